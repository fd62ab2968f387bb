//! The coefficient system `D_k c_k + sum_{m != k} A_km c_m = -1/rho_k` and
//! its fixed-point solver in the weighted sup norm `sup |c_k| / d_k`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSystem {
    pub rho: Vec<f64>,
    pub d: Vec<f64>,
    pub diag: Vec<f64>,
    /// `cross[k][m] = sum_{n in I_m} a_n^2 / ((rho_k - n)(rho_m - n))`, zero on the diagonal.
    pub cross: Vec<Vec<f64>>,
}

/// One step of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub norm: f64,
    pub step: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub c: Vec<f64>,
    pub norm: f64,
    pub lin_norm: f64,
    pub iterations: usize,
    pub max_ratio: f64,
    pub trace: Vec<Step>,
}

impl CrossSystem {
    /// Builds the system from `a_n` on the integer ranges `ranges[k]` of the
    /// intervals `I_k` with centers `rho[k]`.
    pub fn from_samples<A: Fn(i64) -> f64 + Sync>(
        rho: &[f64],
        d: &[f64],
        ranges: &[(i64, i64)],
        a: &A,
    ) -> Result<Self> {
        let kk = rho.len();
        // q[m] = (n, a_n^2 / (rho_m - n)) over I_m
        let q: Vec<Vec<(f64, f64)>> = ranges
            .par_iter()
            .zip(rho)
            .map(|(&(lo, hi), &r)| {
                (lo..=hi)
                    .map(|n| {
                        let v = a(n);
                        (n as f64, v * v / (r - n as f64))
                    })
                    .collect()
            })
            .collect();
        let mut diag = vec![0.0; kk];
        for k in 0..kk {
            diag[k] = q[k]
                .iter()
                .map(|&(n, w)| w / (rho[k] - n))
                .collect::<CompensatedSum>()
                .value();
            if !(diag[k] > 0.0) {
                return Err(Error::DegenerateInterval { k: k as i64 });
            }
        }
        let cross: Vec<Vec<f64>> = (0..kk)
            .into_par_iter()
            .map(|k| {
                (0..kk)
                    .map(|m| {
                        if m == k {
                            0.0
                        } else {
                            q[m].iter()
                                .map(|&(n, w)| w / (rho[k] - n))
                                .collect::<CompensatedSum>()
                                .value()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            rho: rho.to_vec(),
            d: d.to_vec(),
            diag,
            cross,
        })
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn banach_norm(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(&self.d)
            .map(|(c, d)| c.abs() / d)
            .fold(0.0, f64::max)
    }

    /// Operator norm of the linear part of `T` in the weighted sup norm.
    pub fn lin_norm(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                let row: f64 = (0..self.len())
                    .map(|m| self.cross[k][m].abs() * self.d[m])
                    .sum();
                row / (self.diag[k] * self.d[k])
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let mut s = CompensatedSum::new();
                s.add(-1.0 / self.rho[k]);
                for m in 0..self.len() {
                    s.add(-self.cross[k][m] * c[m]);
                }
                s.value() / self.diag[k]
            })
            .collect()
    }

    /// `rho_k S(rho_k)`-free residual of the linear system:
    /// `1/rho_k + D_k c_k + sum_m A_km c_m`.
    pub fn residuals(&self, c: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let mut s = CompensatedSum::new();
                s.add(1.0 / self.rho[k]);
                s.add(self.diag[k] * c[k]);
                for m in 0..self.len() {
                    s.add(self.cross[k][m] * c[m]);
                }
                s.value()
            })
            .collect()
    }

    /// Iterates `c <- T c` from `c = 0` until the step is below
    /// `tol * ||c||`, recording norms and step ratios.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<FixedPoint> {
        let lin = self.lin_norm();
        let mut c = vec![0.0; self.len()];
        let mut trace = Vec::new();
        let mut prev_step = f64::NAN;
        let mut max_ratio: f64 = 0.0;
        for it in 1..=max_iter {
            let next = self.apply(&c);
            let diff: Vec<f64> = next.iter().zip(&c).map(|(a, b)| a - b).collect();
            let step = self.banach_norm(&diff);
            let norm = self.banach_norm(&next);
            let ratio = if prev_step > 0.0 {
                step / prev_step
            } else {
                0.0
            };
            c = next;
            trace.push(Step { norm, step, ratio });
            // Steps at rounding level carry no contraction information.
            if it > 1 && step > 1e3 * f64::EPSILON * norm {
                max_ratio = max_ratio.max(ratio);
                if ratio >= 1.0 {
                    return Err(Error::NonContraction { ratio });
                }
            }
            if step <= tol * norm || step == 0.0 {
                return Ok(FixedPoint {
                    c,
                    norm,
                    lin_norm: lin,
                    iterations: it,
                    max_ratio,
                    trace,
                });
            }
            prev_step = step;
        }
        let last = trace.last().map_or(f64::NAN, |s| s.step);
        Err(Error::Convergence {
            what: format!("fixed point after {max_iter} iterations"),
            last,
            previous: prev_step,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(diag: Vec<f64>, cross: Vec<Vec<f64>>, rho: Vec<f64>, d: Vec<f64>) -> CrossSystem {
        CrossSystem {
            rho,
            d,
            diag,
            cross,
        }
    }

    #[test]
    fn single_interval_one_step() {
        let s = sys(vec![0.25], vec![vec![0.0]], vec![8.5], vec![1.0]);
        let fp = s.solve(1e-12, 10).unwrap();
        assert_eq!(fp.c[0], -1.0 / 8.5 / 0.25);
        assert!(fp.iterations <= 2);
    }

    #[test]
    fn two_by_two_matches_cramer() {
        let (d1, d2, a12, a21) = (2.0, 3.0, 0.3, -0.2);
        let (r1, r2) = (10.5, 21.5);
        let s = sys(
            vec![d1, d2],
            vec![vec![0.0, a12], vec![a21, 0.0]],
            vec![r1, r2],
            vec![1.0, 1.0],
        );
        let fp = s.solve(1e-14, 200).unwrap();
        let det = d1 * d2 - a12 * a21;
        let c1 = (-1.0 / r1 * d2 + a12 / r2) / det;
        let c2 = (-1.0 / r2 * d1 + a21 / r1) / det;
        assert!((fp.c[0] - c1).abs() < 1e-12 * c1.abs());
        assert!((fp.c[1] - c2).abs() < 1e-12 * c2.abs());
    }

    #[test]
    fn expanding_map_is_rejected() {
        let s = sys(
            vec![1.0, 1.0],
            vec![vec![0.0, 3.0], vec![3.0, 0.0]],
            vec![4.5, 9.5],
            vec![1.0, 1.0],
        );
        assert!(matches!(
            s.solve(1e-12, 50),
            Err(Error::NonContraction { .. })
        ));
    }

    #[test]
    fn samples_give_positive_diagonal() {
        let s =
            CrossSystem::from_samples(&[10.5, 40.5], &[1.0, 4.0], &[(10, 11), (37, 44)], &|n| {
                1.0 + 0.01 * n as f64
            })
            .unwrap();
        assert!(s.diag.iter().all(|&v| v > 0.0));
        assert_eq!(s.cross[0][0], 0.0);
    }
}
