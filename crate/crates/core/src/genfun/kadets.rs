//! The Kadets-type example: zeros `n + delta0` of
//! `G0(z) = (z - 1/2) prod_{n >= 1} (1 - z^2/(n + delta0)^2)` are moved to
//! `n - delta` for the integers `n` of a lacunary family `I'_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{
    cos_pi, ln_gamma, ln_gamma_complex, ln_gamma_ratio, ln_gamma_ratio_complex, sin_pi, sin_pi_over,
};
use crate::spectra::{Interval, IntervalFamily};
use crate::summation::CompensatedSum;

/// Factors closer than this to the evaluation point are multiplied out.
const LOCAL: i64 = 8;
/// Largest admissible center; integers up to `2^53` stay exact.
const MAX_K: i64 = 52;

/// Centers of the shifted blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KadetsRho {
    /// `rho_k = 2^k`; `k_min` defaults to the first admissible index.
    PowersOfTwo {
        #[serde(default)]
        k_min: Option<i64>,
        k_max: i64,
    },
    Explicit {
        rho: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Deflate {
    None,
    Half,
    Sine,
    Shifted(i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KadetsExample {
    pub delta0: f64,
    pub delta: f64,
    family: IntervalFamily,
    blocks: Vec<(i64, i64)>,
    ln_const: f64,
}

fn parity(n: i64) -> f64 {
    if n.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    }
}

impl KadetsExample {
    pub fn new(delta0: f64, delta: f64, rho: &KadetsRho) -> Result<Self> {
        if !(0.5..1.0).contains(&delta0) || !(delta > delta0 && delta < 1.0) {
            return Err(Error::Domain(format!(
                "need 1/2 <= delta0 < delta < 1, got delta0 = {delta0}, delta = {delta}"
            )));
        }
        let e = Self::exponent_of(delta0, delta);
        let admissible = |r: f64| r.powf(e) <= r / 100.0;
        let (centers, k_offset): (Vec<f64>, i64) = match rho {
            KadetsRho::PowersOfTwo { k_min, k_max } => {
                let first = (0..=MAX_K)
                    .find(|&k| admissible(2f64.powi(k as i32)))
                    .ok_or_else(|| Error::Domain("no admissible k up to 2^52".into()))?;
                let lo = k_min.unwrap_or(first).max(first);
                if *k_max > MAX_K {
                    return Err(Error::Domain(format!("k_max = {k_max} exceeds {MAX_K}")));
                }
                if *k_max < lo {
                    return Err(Error::Domain(format!(
                        "k_max = {k_max} is below the first admissible index {lo}"
                    )));
                }
                ((lo..=*k_max).map(|k| 2f64.powi(k as i32)).collect(), lo)
            }
            KadetsRho::Explicit { rho } => {
                if rho
                    .iter()
                    .any(|&r| !(r > 0.0) || r > 2f64.powi(MAX_K as i32))
                {
                    return Err(Error::Domain("centers must lie in (0, 2^52]".into()));
                }
                let skip = rho.iter().take_while(|&&r| !admissible(r)).count();
                if skip == rho.len() {
                    return Err(Error::Domain("no admissible center".into()));
                }
                (rho[skip..].to_vec(), 1 + skip as i64)
            }
        };
        Self::from_centers(delta0, delta, &centers, k_offset)
    }

    /// Builds the model on the given centers without the `d_k <= rho_k / 100`
    /// admissibility cut; centers must still be lacunary.
    pub fn from_centers(delta0: f64, delta: f64, centers: &[f64], k_offset: i64) -> Result<Self> {
        if !(0.5..1.0).contains(&delta0) || !(delta > delta0 && delta < 1.0) {
            return Err(Error::Domain(format!(
                "need 1/2 <= delta0 < delta < 1, got delta0 = {delta0}, delta = {delta}"
            )));
        }
        if centers.windows(2).any(|w| !(w[1] >= 2.0 * w[0])) {
            return Err(Error::Domain(
                "centers must satisfy rho_{k+1} >= 2 rho_k".into(),
            ));
        }
        let e = Self::exponent_of(delta0, delta);
        let entries: Vec<Interval> = centers
            .iter()
            .map(|&rho| Interval {
                rho,
                d: rho.powf(e),
            })
            .collect();
        let family = IntervalFamily::new(entries, k_offset)?;
        let blocks = family
            .entries()
            .iter()
            .map(Interval::integers)
            .filter(|(a, b)| a <= b)
            .collect();
        Ok(Self {
            delta0,
            delta,
            family,
            blocks,
            ln_const: 2.0 * ln_gamma(1.0 + delta0) - PI.ln(),
        })
    }

    /// `2 delta0 / (delta0 + delta)`, so that `d^(delta0 + delta) = rho^(2 delta0)`.
    pub fn exponent_of(delta0: f64, delta: f64) -> f64 {
        2.0 * delta0 / (delta0 + delta)
    }

    pub fn exponent(&self) -> f64 {
        Self::exponent_of(self.delta0, self.delta)
    }

    /// The family `I'_k` whose zeros are shifted.
    pub fn shifted_family(&self) -> &IntervalFamily {
        &self.family
    }

    /// The intervals `[rho_k - 2 d_k, rho_k + 2 d_k]` used with the breaker.
    pub fn breaker_family(&self) -> IntervalFamily {
        self.family
            .widened(2.0)
            .expect("doubling keeps a valid family")
    }

    pub fn blocks(&self) -> &[(i64, i64)] {
        &self.blocks
    }

    fn in_block(&self, n: i64) -> bool {
        self.blocks.iter().any(|&(a, b)| a <= n && n <= b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_parts(x, Deflate::None)
    }

    fn eval_parts(&self, x: f64, deflate: Deflate) -> f64 {
        if !x.is_finite() {
            return f64::NAN;
        }
        let (d0, dl) = (self.delta0, self.delta);
        let ni = x.round() as i64;
        let frac = x - ni as f64;
        let mut sign = 1.0;
        let mut ln = CompensatedSum::new();

        if deflate != Deflate::Half {
            let v = ni as f64 + (frac - 0.5);
            if v == 0.0 {
                return 0.0;
            }
            sign *= v.signum();
            ln.add(v.abs().ln());
        }

        let (yi, yf) = if x >= 0.0 { (ni, frac) } else { (-ni, -frac) };
        let y = x.abs();
        let mut cancelled = None;
        if y <= 1.0 && deflate != Deflate::Sine {
            ln.add(2.0 * ln_gamma(1.0 + d0) - ln_gamma(1.0 + d0 + y) - ln_gamma(1.0 + d0 - y));
        } else {
            // P(y) = Gamma(1+d0)^2 / pi * sin(pi u) / (Gamma(u + 1 + 2 d0) / Gamma(u)), u = y - d0
            let fr = yf - d0;
            let n0 = yi + fr.round() as i64;
            let t = (yi - n0) as f64 + fr;
            let u = yi as f64 + fr;
            let factor = if x > 0.0 && self.in_block(n0) {
                cancelled = Some(n0);
                parity(n0) * sin_pi_over(t)
            } else if deflate == Deflate::Sine {
                PI * parity(n0) * cos_pi(t) * x.signum()
            } else {
                parity(n0) * sin_pi(t)
            };
            if factor == 0.0 {
                return 0.0;
            }
            sign *= factor.signum();
            ln.add(self.ln_const + factor.abs().ln() - ln_gamma_ratio(u, 1.0 + 2.0 * d0));
        }

        let c = d0 + dl;
        for &(a, b) in &self.blocks {
            let left_end = b.min(ni - LOCAL - 1);
            if a <= left_end {
                ln.add(ln_gamma_ratio((ni - a + 1) as f64 + frac - d0, c));
                ln.add(-ln_gamma_ratio((ni - left_end) as f64 + frac - d0, c));
            }
            let right_start = a.max(ni + LOCAL + 1);
            if right_start <= b {
                ln.add(ln_gamma_ratio((right_start - ni) as f64 - frac - dl, c));
                ln.add(-ln_gamma_ratio((b - ni + 1) as f64 - frac - dl, c));
            }
            for n in a.max(ni - LOCAL)..=b.min(ni + LOCAL) {
                let xn = (ni - n) as f64 + frac;
                let num = if deflate == Deflate::Shifted(n) {
                    1.0
                } else {
                    xn + dl
                };
                let den = if cancelled == Some(n) { 1.0 } else { xn - d0 };
                if num == 0.0 {
                    return 0.0;
                }
                sign *= (num / den).signum();
                ln.add(num.abs().ln() - den.abs().ln());
            }
        }
        sign * ln.value().exp()
    }

    /// Analytic `G'(lambda)` at a zero, by removing the vanishing factor.
    pub fn derivative_at_zero(&self, lambda: f64) -> Option<f64> {
        let f = (self.delta0 + self.delta).fract();
        let tol = (0.25 * f.min(1.0 - f)).min(0.1);
        if (lambda - 0.5).abs() < tol {
            return Some(self.eval_parts(lambda, Deflate::Half));
        }
        let n = (lambda + self.delta).round() as i64;
        if self.in_block(n) && (lambda - (n as f64 - self.delta)).abs() < tol {
            return Some(self.eval_parts(lambda, Deflate::Shifted(n)));
        }
        let u = lambda.abs() - self.delta0;
        if u >= 1.0 - tol && (u - u.round()).abs() < tol {
            return Some(self.eval_parts(lambda, Deflate::Sine));
        }
        None
    }

    /// All zeros in `[lo, hi]`, sorted.
    pub fn known_zeros(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if !(hi >= lo) || hi - lo > 1e7 {
            return Err(Error::Domain(format!(
                "zero window [{lo}, {hi}] empty or too long"
            )));
        }
        let (d0, dl) = (self.delta0, self.delta);
        let mut z = Vec::new();
        if (lo..=hi).contains(&0.5) {
            z.push(0.5);
        }
        let near = if lo <= 0.0 && hi >= 0.0 {
            0.0
        } else {
            lo.abs().min(hi.abs())
        };
        let first = ((near - 2.0).floor() as i64).max(1);
        let last = (lo.abs().max(hi.abs()) + 2.0).ceil() as i64;
        for n in first..=last {
            let neg = -(n as f64 + d0);
            if neg >= lo && neg <= hi {
                z.push(neg);
            }
            let pos = if self.in_block(n) {
                n as f64 - dl
            } else {
                n as f64 + d0
            };
            if pos >= lo && pos <= hi {
                z.push(pos);
            }
        }
        z.sort_by(|a, b| a.total_cmp(b));
        z.dedup();
        Ok(z)
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        let (d0, dl) = (self.delta0, self.delta);
        let c = d0 + dl;
        let one = Complex64::new(1.0 + d0, 0.0);
        let mut ln = (z - 0.5).ln() + 2.0 * ln_gamma(1.0 + d0)
            - ln_gamma_complex(one + z)
            - ln_gamma_complex(one - z);
        for &(a, b) in &self.blocks {
            if a as f64 - dl - z.re > 1.0 {
                ln += ln_gamma_ratio_complex(a as f64 - dl - z, c)
                    - ln_gamma_ratio_complex(b as f64 + 1.0 - dl - z, c);
            } else if z.re - d0 - b as f64 > 1.0 {
                ln += ln_gamma_ratio_complex(z - d0 - a as f64 + 1.0, c)
                    - ln_gamma_ratio_complex(z - d0 - b as f64, c);
            } else if b - a <= 100_000 {
                for n in a..=b {
                    ln += ((z - n as f64 + dl) / (z - n as f64 - d0)).ln();
                }
            } else {
                return Err(Error::Domain(format!(
                    "complex evaluation at {z} inside a block of length {}",
                    b - a + 1
                )));
            }
        }
        Ok(ln.exp())
    }

    /// Integer positions where `G(n)^2` stops being a smooth sequence.
    pub fn features(&self) -> Vec<f64> {
        let mut f = vec![0.5];
        for &(a, b) in &self.blocks {
            f.push(a as f64 - 0.5);
            f.push(b as f64 + 0.5);
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(delta0: f64, delta: f64, rho: Vec<f64>) -> KadetsExample {
        KadetsExample::from_centers(delta0, delta, &rho, 1).unwrap()
    }

    #[test]
    fn known_zeros_across_origin() {
        let k = small(0.5, 0.75, vec![64.0]);
        let z = k.known_zeros(-20.0, 20.0).unwrap();
        assert_eq!(z.len(), 39);
        assert!(z.windows(2).all(|w| w[1] - w[0] <= 2.25 + 1e-12));
    }

    /// Direct product over the zeros, truncated at `n_max`, times the
    /// analytic tail correction `exp(-x^2 sum_{n > n_max} (n + d0)^-2)`.
    fn g0_product(x: f64, d0: f64, n_max: i64) -> f64 {
        let mut p = x - 0.5;
        for n in 1..=n_max {
            p *= 1.0 - x * x / ((n as f64 + d0) * (n as f64 + d0));
        }
        let m = n_max as f64 + d0;
        let tail = 1.0 / (m + 0.5) - 1.0 / (12.0 * (m + 0.5).powi(3));
        p * (-x * x * tail).exp()
    }

    #[test]
    fn g0_closed_form_matches_product() {
        let g = small(0.6, 0.8, vec![]);
        for &x in &[7.3, 0.4, -3.9, 2.0] {
            let p = g0_product(x, 0.6, 200_000);
            let closed = g.eval(x);
            assert!(
                (closed - p).abs() < 1e-9 * p.abs().max(1e-3),
                "{x}: {closed} vs {p}"
            );
        }
    }

    #[test]
    fn first_admissible_index() {
        let g = KadetsExample::new(
            0.5,
            0.75,
            &KadetsRho::PowersOfTwo {
                k_min: None,
                k_max: 40,
            },
        )
        .unwrap();
        assert_eq!(g.shifted_family().k_range(), Some((34, 40)));
        for (_, e) in g.shifted_family().iter() {
            assert_eq!(e.d, e.rho.powf(0.8));
            assert!(e.d <= e.rho / 100.0);
        }
    }

    #[test]
    fn rejects_parameter_order() {
        let r = KadetsRho::PowersOfTwo {
            k_min: None,
            k_max: 40,
        };
        assert!(KadetsExample::new(0.75, 0.5, &r).is_err());
        assert!(KadetsExample::new(0.4, 0.5, &r).is_err());
    }

    #[test]
    fn matches_product_with_shifted_block() {
        // rho = 10^5, d = 10^4: block far enough for a direct product oracle.
        let g = small(0.5, 0.75, vec![100_000.0]);
        let (a, b) = g.blocks()[0];
        let x = a as f64 + 17.3;
        let mut ratio = 1.0;
        for n in a..=b {
            ratio *= (x - n as f64 + 0.75) / (x - n as f64 - 0.5);
        }
        let base = small(0.5, 0.75, vec![]);
        let expect = base.eval(x) * ratio;
        let v = g.eval(x);
        assert!((v - expect).abs() < 1e-9 * expect.abs(), "{v} vs {expect}");
    }

    #[test]
    fn zeros_of_shifted_block() {
        let g = small(0.5, 0.75, vec![100_000.0]);
        let (a, _) = g.blocks()[0];
        for n in a + 3..a + 6 {
            let z = n as f64 - 0.75;
            assert_eq!(g.eval(z), 0.0);
            let d = g.derivative_at_zero(z).unwrap();
            let h = 1e-6;
            let fd = (g.eval(z + h) - g.eval(z - h)) / (2.0 * h);
            assert!((d - fd).abs() < 1e-5 * d.abs(), "{d} vs {fd}");
        }
    }

    #[test]
    fn removable_point_is_continuous() {
        let g = small(0.5, 0.75, vec![100_000.0]);
        let (a, _) = g.blocks()[0];
        let p = (a + 10) as f64 + 0.5;
        let v = g.eval(p);
        let h = 1e-7;
        let near = 0.5 * (g.eval(p + h) + g.eval(p - h));
        assert!(v != 0.0 && (v - near).abs() < 1e-6 * v.abs());
    }

    #[test]
    fn derivative_at_unshifted_zeros() {
        let g = small(0.5, 0.75, vec![100_000.0]);
        for &z in &[0.5, 3.5, -4.5, 1000.5] {
            let d = g.derivative_at_zero(z).unwrap();
            let h = 1e-6;
            let fd = (g.eval(z + h) - g.eval(z - h)) / (2.0 * h);
            assert!((d - fd).abs() < 1e-5 * d.abs(), "{z}: {d} vs {fd}");
        }
    }

    #[test]
    fn complex_agrees_with_real_axis() {
        let g = small(0.5, 0.75, vec![100_000.0]);
        for &x in &[2.3, -7.9] {
            let z = g.eval_complex(Complex64::new(x, 0.0)).unwrap();
            let r = g.eval(x);
            assert!((z.re - r).abs() < 1e-10 * r.abs(), "{x}: {z} vs {r}");
        }
    }
}
