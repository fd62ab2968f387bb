//! Bracketed root localization on the real line.

use crate::error::{Error, Result};

/// A refined simple root with the sign-change certificate that located it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedRoot {
    pub x: f64,
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

fn opposite(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
}

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops when the bracket is narrower than `abs_tol` or when the midpoint
/// coincides with an endpoint (floating-point resolution). The returned
/// bracket is the original certificate, not the final sliver.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, abs_tol: f64) -> Result<BracketedRoot> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(BracketedRoot {
            x: lo,
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    if f_hi == 0.0 {
        return Ok(BracketedRoot {
            x: hi,
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    if !opposite(f_lo, f_hi) {
        return Err(Error::Domain(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo:e}, {f_hi:e}"
        )));
    }
    let (mut a, mut b, mut fa) = (lo, hi, f_lo);
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if b - a <= abs_tol || m <= a || m >= b {
            return Ok(BracketedRoot {
                x: m,
                lo,
                hi,
                f_lo,
                f_hi,
            });
        }
        let fm = f(m);
        if fm.is_nan() {
            return Err(Error::Convergence {
                what: format!("bisection hit NaN at {m}"),
                last: b,
                previous: a,
            });
        }
        if fm == 0.0 {
            return Ok(BracketedRoot {
                x: m,
                lo,
                hi,
                f_lo,
                f_hi,
            });
        }
        if opposite(fa, fm) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Err(Error::Convergence {
        what: "bisection iteration cap".into(),
        last: b,
        previous: a,
    })
}

/// One Newton step from `x`, accepted only if it stays inside `[lo, hi]`
/// and does not increase `|f|`.
pub fn polish<F: Fn(f64) -> f64>(f: &F, x: f64, deriv: f64, lo: f64, hi: f64) -> f64 {
    let fx = f(x);
    if fx == 0.0 || deriv == 0.0 || !deriv.is_finite() {
        return x;
    }
    let y = x - fx / deriv;
    if y > lo && y < hi && f(y).abs() <= fx.abs() {
        y
    } else {
        x
    }
}

/// Sign-change brackets of `f` on a grid of spacing `step` over `[lo, hi]`.
///
/// Grid points where `f` is exactly zero are reported as degenerate
/// brackets `[x, x]` provided `f` changes sign across them.
pub fn scan_sign_changes<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let mut last_nonzero: Option<(f64, f64)> = None;
    let mut pending_zero: Option<f64> = None;
    for i in 0..=n {
        let x = if i == n { hi } else { lo + i as f64 * step };
        let fx = f(x);
        if fx == 0.0 {
            pending_zero.get_or_insert(x);
            continue;
        }
        if fx.is_nan() {
            last_nonzero = None;
            pending_zero = None;
            continue;
        }
        if let Some((px, pf)) = last_nonzero {
            if opposite(pf, fx) {
                match pending_zero {
                    Some(z) => out.push((z, z)),
                    None => out.push((px, x)),
                }
            }
        }
        pending_zero = None;
        last_nonzero = Some((x, fx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisection_rejects_missing_sign_change() {
        assert!(bisect(&|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn scan_reports_exact_grid_zero() {
        let hits = scan_sign_changes(&|x: f64| x - 0.5, 0.0, 1.0, 0.25);
        assert_eq!(hits, vec![(0.5, 0.5)]);
    }

    #[test]
    fn scan_ignores_double_zero() {
        let hits = scan_sign_changes(&|x: f64| (x - 0.3).powi(2), 0.0, 1.0, 0.01);
        assert!(hits.is_empty());
    }
}
