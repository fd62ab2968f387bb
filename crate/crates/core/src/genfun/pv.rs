//! Principal-value canonical products over a spectrum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::Spectrum;
use crate::summation::CompensatedSum;

/// Radius of the first truncation.
pub const FIRST_RADIUS: f64 = 16.0;
/// Largest radius ever enumerated pointwise.
pub const MAX_RADIUS: f64 = (1u64 << 24) as f64;

#[derive(Debug, Clone, PartialEq)]
pub struct PvProduct {
    pub spectrum: Spectrum,
    pub tol: f64,
    pub max_doublings: u32,
}

/// Value of the product and the last relative change between successive
/// extrapolants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvValue {
    pub value: Complex64,
    pub rel_change: f64,
    pub radius: f64,
}

fn ln_factor(z: Complex64, lambda: f64) -> Complex64 {
    if lambda == 0.0 {
        z.ln()
    } else {
        (1.0 - z / lambda).ln()
    }
}

impl PvProduct {
    pub fn new(spectrum: Spectrum, tol: f64, max_doublings: u32) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain("product tolerance must be positive".into()));
        }
        Ok(Self {
            spectrum,
            tol,
            max_doublings,
        })
    }

    /// `ln prod_{|lambda| < r} (1 - z/lambda)`; a point at the origin
    /// contributes the factor `z`.
    fn ln_truncated(&self, z: Complex64, r: f64) -> Complex64 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for lambda in self.spectrum.points_in(-r, r) {
            if lambda.abs() >= r {
                continue;
            }
            let l = ln_factor(z, lambda);
            re.add(l.re);
            im.add(l.im);
        }
        Complex64::new(re.value(), im.value())
    }

    /// Symmetric truncations at radii `16 * 2^j`, accelerated by Richardson
    /// extrapolation in powers of `1/R`, until successive extrapolants agree
    /// to `tol` (relative change of the product).
    pub fn eval(&self, z: Complex64) -> Result<PvValue> {
        if z.im == 0.0 {
            let hits = self.spectrum.points_in(z.re, z.re);
            if !hits.is_empty() {
                return Ok(PvValue {
                    value: Complex64::new(0.0, 0.0),
                    rel_change: 0.0,
                    radius: 0.0,
                });
            }
        }
        let mut r = FIRST_RADIUS;
        while r <= z.norm() + 1.0 {
            r *= 2.0;
        }
        if let Some(m) = self.spectrum.max_abs() {
            // A finite spectrum is exhausted by one radius.
            let r = r.max(2.0 * m + 1.0);
            let v = self.ln_truncated(z, r).exp();
            return Ok(PvValue {
                value: v,
                rel_change: 0.0,
                radius: r,
            });
        }
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        let mut prev: Option<Complex64> = None;
        let mut last_change = f64::INFINITY;
        for _ in 0..=self.max_doublings {
            if r > MAX_RADIUS {
                break;
            }
            let mut row = vec![self.ln_truncated(z, r)];
            if let Some(above) = rows.last() {
                for m in 1..=above.len() {
                    let f = 2f64.powi(m as i32) - 1.0;
                    let v = row[m - 1] + (row[m - 1] - above[m - 1]) / f;
                    row.push(v);
                }
            }
            let best = *row.last().unwrap();
            rows.push(row);
            if let Some(p) = prev {
                // |e^{a} - e^{b}| / |e^{b}| ~ |a - b| for nearby logs
                last_change = (best - p).norm();
                if last_change < self.tol {
                    return Ok(PvValue {
                        value: best.exp(),
                        rel_change: last_change,
                        radius: r,
                    });
                }
            }
            prev = Some(best);
            r *= 2.0;
            if rows.len() > 12 {
                // Higher Richardson columns amplify rounding; restart the
                // tableau from the last two rows only.
                let keep = rows.split_off(rows.len() - 2);
                rows = keep
                    .into_iter()
                    .map(|mut v| {
                        v.truncate(1);
                        v
                    })
                    .collect();
            }
        }
        let p = prev.unwrap_or_default();
        Err(Error::Convergence {
            what: format!("principal-value product at {z}"),
            last: p.exp().norm(),
            previous: (p - last_change).exp().norm(),
        })
    }

    pub fn eval_real(&self, x: f64) -> Result<f64> {
        Ok(self.eval(Complex64::new(x, 0.0))?.value.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma_complex;
    use std::f64::consts::PI;

    #[test]
    fn euler_product_for_sine() {
        let p = PvProduct::new(Spectrum::IntegersPunctured, 1e-12, 40).unwrap();
        let v = p.eval_real(0.5).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-10, "{v}");
        let v = p.eval_real(2.3).unwrap();
        let expect = (PI * 2.3).sin() / (PI * 2.3);
        assert!((v - expect).abs() < 1e-10, "{v} vs {expect}");
    }

    #[test]
    fn vanishes_on_spectrum() {
        let p = PvProduct::new(Spectrum::IntegersPunctured, 1e-12, 40).unwrap();
        assert_eq!(p.eval_real(3.0).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_shift_matches_gamma_closed_form() {
        let a = 0.25;
        let p = PvProduct::new(Spectrum::Symmetric { a }, 1e-12, 40).unwrap();
        let z = Complex64::new(0.25, 1.0);
        let v = p.eval(z).unwrap().value;
        let ag = Complex64::new(a, 0.0);
        let expect =
            (2.0 * ln_gamma_complex(ag) - ln_gamma_complex(ag + z) - ln_gamma_complex(ag - z))
                .exp();
        assert!(
            (v - expect).norm() < 1e-8 * expect.norm(),
            "{v} vs {expect}"
        );
    }

    #[test]
    fn even_for_symmetric_spectrum() {
        let p = PvProduct::new(Spectrum::Symmetric { a: 0.4 }, 1e-12, 40).unwrap();
        let a = p.eval_real(1.7).unwrap();
        let b = p.eval_real(-1.7).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn finite_spectrum_is_a_polynomial() {
        let p = PvProduct::new(Spectrum::explicit(vec![1.0, -2.0]), 1e-12, 4).unwrap();
        let v = p.eval_real(3.0).unwrap();
        assert!((v - (1.0 - 3.0) * (1.0 + 1.5)).abs() < 1e-14);
    }

    #[test]
    fn no_doublings_gives_convergence_error() {
        let p = PvProduct::new(Spectrum::IntegersPunctured, 1e-15, 0).unwrap();
        assert!(matches!(p.eval_real(0.5), Err(Error::Convergence { .. })));
    }
}
