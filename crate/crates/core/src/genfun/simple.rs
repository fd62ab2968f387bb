//! The explicit example
//! `G(x) = cos(pi x) (1/(x - 1/2) + sum_{k >= 10} (1/(x - 2^k + 1/2) - 1/(x - 2^k - 1/2)))`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{cos_pi, sin_pi, sin_pi_over};
use crate::summation::CompensatedSum;

/// First index of the series.
pub const FIRST_K: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleExample {
    pub k_cap: u32,
}

impl Default for SimpleExample {
    fn default() -> Self {
        Self { k_cap: 60 }
    }
}

/// A pole of the rational factor: `coeff / (x - at)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Pole {
    at: f64,
    coeff: f64,
}

impl SimpleExample {
    pub fn new(k_cap: u32) -> Result<Self> {
        if !(FIRST_K..=62).contains(&k_cap) {
            return Err(Error::Domain(format!("k_cap = {k_cap} outside 10..=62")));
        }
        Ok(Self { k_cap })
    }

    fn poles(&self) -> impl Iterator<Item = Pole> + '_ {
        std::iter::once(Pole {
            at: 0.5,
            coeff: 1.0,
        })
        .chain((FIRST_K..=self.k_cap).flat_map(|k| {
            let c = 2f64.powi(k as i32);
            [
                Pole {
                    at: c - 0.5,
                    coeff: 1.0,
                },
                Pole {
                    at: c + 0.5,
                    coeff: -1.0,
                },
            ]
        }))
    }

    /// Pole within distance 1/2 of `x`, if any (at most one is closer than 1/2).
    fn nearest_pole(&self, x: f64) -> Option<Pole> {
        if (x - 0.5).abs() < 0.5 {
            return Some(Pole {
                at: 0.5,
                coeff: 1.0,
            });
        }
        if x < 512.0 {
            return None;
        }
        let k = x.log2().round() as i64;
        for k in [k - 1, k, k + 1] {
            if k < FIRST_K as i64 || k > self.k_cap as i64 {
                continue;
            }
            let c = 2f64.powi(k as i32);
            if (x - (c - 0.5)).abs() < 0.5 {
                return Some(Pole {
                    at: c - 0.5,
                    coeff: 1.0,
                });
            }
            if (x - (c + 0.5)).abs() < 0.5 {
                return Some(Pole {
                    at: c + 0.5,
                    coeff: -1.0,
                });
            }
        }
        None
    }

    /// Rational factor and its derivative, omitting the pole `skip`.
    fn rational(&self, x: f64, skip: Option<f64>) -> (f64, f64) {
        let mut s = CompensatedSum::new();
        let mut ds = CompensatedSum::new();
        for p in self.poles() {
            if Some(p.at) == skip {
                continue;
            }
            let r = 1.0 / (x - p.at);
            s.add(p.coeff * r);
            ds.add(-p.coeff * r * r);
        }
        (s.value(), ds.value())
    }

    /// `G(x)` and a bound on the series truncation error at `k_cap`.
    pub fn eval_with_bound(&self, x: f64) -> (f64, f64) {
        (self.eval(x), self.tail_bound(x))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.nearest_pole(x) {
            Some(p) => {
                // cos(pi (p + t)) / t = -sin(pi p) sin(pi t) / t for half-integer p
                let t = x - p.at;
                let (rest, _) = self.rational(x, Some(p.at));
                -p.coeff * sin_pi(p.at) * sin_pi_over(t) + cos_pi(x) * rest
            }
            None => cos_pi(x) * self.rational(x, None).0,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.nearest_pole(x) {
            Some(p) => {
                let t = x - p.at;
                let dphi = if t.abs() < 1e-4 {
                    -PI.powi(3) * t / 3.0 + PI.powi(5) * t.powi(3) / 30.0
                } else {
                    (PI * t * cos_pi(t) - sin_pi(t)) / (t * t)
                };
                let (rest, drest) = self.rational(x, Some(p.at));
                -p.coeff * sin_pi(p.at) * dphi - PI * sin_pi(x) * rest + cos_pi(x) * drest
            }
            None => {
                let (s, ds) = self.rational(x, None);
                -PI * sin_pi(x) * s + cos_pi(x) * ds
            }
        }
    }

    /// Bound on `|cos(pi x)| sum_{k > k_cap} |1/((x - 2^k)^2 - 1/4)|`;
    /// infinite when the first omitted pole pair is not yet far from `x`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        let edge = 2f64.powi(self.k_cap as i32);
        if edge < x.abs() + 0.5 {
            return f64::INFINITY;
        }
        // |x - 2^k| >= 2^{k-1} + 1/2 for k > k_cap, so each term is <= 4^{1-k}.
        cos_pi(x).abs() * (4.0 / 3.0) * 4f64.powi(-(self.k_cap as i32))
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for p in self.poles() {
            let w = z - p.at;
            if w.norm() < 1e-8 {
                return Err(Error::Pole(format!(
                    "complex evaluation at {z} next to {}",
                    p.at
                )));
            }
            s += p.coeff / w;
        }
        Ok((z * PI).cos() * s)
    }

    /// Half-integers carrying a pole of the rational factor.
    pub fn features(&self) -> Vec<f64> {
        self.poles().map(|p| p.at).collect()
    }
}
