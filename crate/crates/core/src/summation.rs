//! Compensated and lattice summation.
//!
//! Most sums in this crate run over integer windows of 10^6 points or more,
//! and some over ranges far too long to visit pointwise. [`CompensatedSum`]
//! keeps pointwise sums honest; [`lattice_sum`] handles the long ranges by
//! treating the summand as a smooth function of `n` away from a small set of
//! feature points.

use std::iter::FromIterator;

/// Neumaier's improved Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
        self.abs += v.abs();
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of absolute values of everything added, the natural scale for a
    /// rounding budget.
    pub fn abs_total(&self) -> f64 {
        self.abs
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator.
pub fn compensated<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Blocks at most this long are always summed pointwise.
pub const DIRECT_BLOCK: i64 = 8192;
const SIMPSON_PANELS: i64 = 512;

/// Sum of `f(n)` for integers `lo ..= hi`.
///
/// `f` must be smooth as a function of `n` (after extension to real `n`)
/// except near `features`. A block whose distance to every feature is at
/// least its own length is integrated by composite Simpson on integer nodes
/// plus the Euler-Maclaurin endpoint corrections; everything else is split
/// until it is short enough to sum pointwise. Relative error is of order
/// `SIMPSON_PANELS^-4` times the fourth logarithmic derivative of `f`.
pub fn lattice_sum<F: Fn(i64) -> f64>(f: &F, lo: i64, hi: i64, features: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    lattice_block(f, lo, hi, features, &mut acc);
    acc.value()
}

/// Pointwise compensated sum of `f(n)` over `lo ..= hi`.
pub fn direct_sum<F: Fn(i64) -> f64>(f: &F, lo: i64, hi: i64) -> f64 {
    (lo..=hi).map(f).collect::<CompensatedSum>().value()
}

fn lattice_block<F: Fn(i64) -> f64>(
    f: &F,
    a: i64,
    b: i64,
    features: &[f64],
    acc: &mut CompensatedSum,
) {
    if b < a {
        return;
    }
    let len = b - a + 1;
    if len <= DIRECT_BLOCK {
        for n in a..=b {
            acc.add(f(n));
        }
        return;
    }
    let (af, bf) = (a as f64, b as f64);
    let dist = features
        .iter()
        .map(|&e| {
            if e < af {
                af - e
            } else if e > bf {
                e - bf
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min);
    if dist >= len as f64 {
        let h = (len - 1) / SIMPSON_PANELS;
        let end = a + SIMPSON_PANELS * h;
        acc.add(simpson_em(f, a, end, h));
        lattice_block(f, end + 1, b, features, acc);
    } else {
        let mid = a + len / 2;
        lattice_block(f, a, mid - 1, features, acc);
        lattice_block(f, mid, b, features, acc);
    }
}

/// Euler-Maclaurin estimate of `sum_{n=a}^{end} f(n)` from Simpson nodes
/// spaced `h` apart.
fn simpson_em<F: Fn(i64) -> f64>(f: &F, a: i64, end: i64, h: i64) -> f64 {
    let panels = (end - a) / h;
    let mut s = CompensatedSum::new();
    for j in 0..=panels {
        let w = if j == 0 || j == panels {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s.add(w * f(a + j * h));
    }
    let integral = s.value() * h as f64 / 3.0;
    let fa = f(a);
    let fe = f(end);
    let da = 0.5 * (f(a + 1) - f(a - 1));
    let de = 0.5 * (f(end + 1) - f(end - 1));
    integral + 0.5 * (fa + fe) + (de - da) / 12.0
}

/// Largest ratio `|t_{j+1}| / |t_j|` over the second half of a term
/// sequence; the finite-truncation stand-in for a ratio test.
///
/// Returns `None` for fewer than two terms. A zero term followed by a zero
/// term counts as ratio 0.
pub fn tail_ratio(terms: &[f64]) -> Option<f64> {
    if terms.len() < 2 {
        return None;
    }
    let start = (terms.len() / 2).saturating_sub(1);
    let mut worst: f64 = 0.0;
    for w in terms[start..].windows(2) {
        let (p, q) = (w[0].abs(), w[1].abs());
        let r = if p == 0.0 {
            if q == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            q / p
        };
        worst = worst.max(r);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_mass() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated(v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn lattice_sum_matches_direct_on_power_law() {
        let f = |n: i64| {
            let x = n as f64 - 100.5;
            1.0 / (x * x)
        };
        let lo = 0;
        let hi = 3_000_000;
        let direct = direct_sum(&f, lo, hi);
        let fast = lattice_sum(&f, lo, hi, &[100.5]);
        assert!(
            ((fast - direct) / direct).abs() < 1e-11,
            "{fast} vs {direct}"
        );
    }

    #[test]
    fn lattice_sum_without_features_on_short_range_is_direct() {
        let f = |n: i64| n as f64;
        assert_eq!(lattice_sum(&f, 1, 100, &[]), 5050.0);
    }

    #[test]
    fn tail_ratio_flags_constant_terms() {
        assert_eq!(tail_ratio(&[1.0, 1.0, 1.0, 1.0]), Some(1.0));
        let geo: Vec<f64> = (0..10).map(|k| 0.5f64.powi(k)).collect();
        assert!((tail_ratio(&geo).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tail_ratio(&[3.0]), None);
    }
}
