//! Residual checks of a finished construction.

use rayon::prelude::*;
use serde::Serialize;

use crate::summation::CompensatedSum;

/// Relative rounding allowance applied to sums of absolute values.
pub const ROUNDING: f64 = 1e-12;

/// The sparse data the identities are evaluated from: `(n, a_n, b_n, G(n))`
/// on the support of `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub n: Vec<i64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budgeted {
    pub value: f64,
    pub residual: f64,
    pub budget: f64,
}

impl Budgeted {
    pub fn within(&self) -> bool {
        self.residual <= self.budget
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpotCheck {
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub rel: f64,
    pub budget: f64,
}

fn sum_abs(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut s = CompensatedSum::new();
    for v in it {
        s.add(v);
    }
    (s.value(), s.abs_total())
}

impl Support {
    /// `S(z) = sum a_n b_n / (z - n)` and the sum of absolute terms.
    pub fn s_at(&self, z: f64) -> (f64, f64) {
        sum_abs((0..self.n.len()).map(|i| self.a[i] * self.b[i] / (z - self.n[i] as f64)))
    }

    pub fn pairing(&self) -> f64 {
        sum_abs((0..self.n.len()).map(|i| self.a[i] * self.b[i])).0
    }

    /// `sum (-1)^n b_n G(n) / (z - n)` and the sum of absolute terms.
    pub fn cauchy_g(&self, z: f64) -> (f64, f64) {
        sum_abs((0..self.n.len()).map(|i| {
            let sgn = if self.n[i].rem_euclid(2) == 1 {
                -1.0
            } else {
                1.0
            };
            sgn * self.b[i] * self.g[i] / (z - self.n[i] as f64)
        }))
    }
}

/// `m(z)` with each factor written as `(r - z) t / (r (t - z))`, so that
/// `z` near a center or a zero keeps full relative accuracy.
pub fn eval_m_unchecked(z: f64, rho: &[f64], t: &[f64]) -> f64 {
    rho.iter()
        .zip(t)
        .map(|(r, t)| ((r - z) / r) * (t / (t - z)))
        .product()
}

/// Residues of `1/m` at the centers `rho_j`.
pub fn residues_of_inverse_m(rho: &[f64], t: &[f64]) -> Vec<f64> {
    (0..rho.len())
        .map(|j| {
            let r = rho[j];
            let mut v = -r * ((t[j] - r) / t[j]);
            for k in 0..rho.len() {
                if k != j {
                    v *= ((t[k] - r) / t[k]) * (rho[k] / (rho[k] - r));
                }
            }
            v
        })
        .collect()
}

/// Exact error term of the identity `S/m - sum (-1)^n b_n G(n)/(z-n) = sum_j R_j S(rho_j)/(z - rho_j)`
/// bounded in absolute value, plus rounding allowances.
fn identity_budget(z: f64, rho: &[f64], res: &[f64], s_rho: &[(f64, f64)], abs_terms: f64) -> f64 {
    let mut b = ROUNDING * abs_terms;
    for j in 0..rho.len() {
        let w = res[j].abs() / (z - rho[j]).abs();
        b += w * (s_rho[j].0.abs() + ROUNDING * s_rho[j].1);
    }
    b
}

/// Orthogonality residuals `|sum (-1)^n b_n G(n)/(n - t_k)|` with budgets.
pub fn orthogonality(sup: &Support, rho: &[f64], t: &[f64]) -> Vec<Budgeted> {
    let res = residues_of_inverse_m(rho, t);
    let s_rho: Vec<(f64, f64)> = rho.iter().map(|&r| sup.s_at(r)).collect();
    t.par_iter()
        .map(|&tk| {
            let (v, abs) = sup.cauchy_g(tk);
            Budgeted {
                value: -v,
                residual: v.abs(),
                budget: identity_budget(tk, rho, &res, &s_rho, abs),
            }
        })
        .collect()
}

/// Both sides of `S(z)/m(z) = sum (-1)^n b_n G(n)/(z - n)` at the given points.
pub fn spot_checks(sup: &Support, rho: &[f64], t: &[f64], points: &[f64]) -> Vec<SpotCheck> {
    let res = residues_of_inverse_m(rho, t);
    let s_rho: Vec<(f64, f64)> = rho.iter().map(|&r| sup.s_at(r)).collect();
    points
        .par_iter()
        .map(|&z| {
            let m = eval_m_unchecked(z, rho, t);
            let (s, s_abs) = sup.s_at(z);
            let lhs = s / m;
            let (rhs, r_abs) = sup.cauchy_g(z);
            let diff = (lhs - rhs).abs();
            let scale = lhs.abs().max(rhs.abs());
            SpotCheck {
                z,
                lhs,
                rhs,
                diff,
                rel: if scale > 0.0 { diff / scale } else { 0.0 },
                budget: identity_budget(z, rho, &res, &s_rho, s_abs / m.abs() + r_abs),
            }
        })
        .collect()
}

/// Deterministic off-grid points spread over the family.
pub fn spot_points(rho: &[f64], d: &[f64], count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let k = i % rho.len();
            let frac = (i / rho.len()) as f64;
            let x = rho[k] + (2.5 + 1.75 * frac) * d[k] * if i % 2 == 0 { 1.0 } else { -1.0 };
            let x = x.floor() + std::f64::consts::FRAC_1_PI;
            if rho.iter().any(|&r| (r - x).abs() < 1e-3) {
                x + 0.25
            } else {
                x
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residues_match_limit() {
        let rho = [10.5, 21.5];
        let t = [13.2, 17.9];
        let res = residues_of_inverse_m(&rho, &t);
        for j in 0..2 {
            let h = 1e-7;
            let z = rho[j] + h;
            let approx = h / eval_m_unchecked(z, &rho, &t);
            assert!(
                (approx - res[j]).abs() < 1e-5 * res[j].abs(),
                "{approx} vs {}",
                res[j]
            );
        }
    }

    #[test]
    fn identity_error_term_is_exact() {
        // Arbitrary finite data: the identity's defect must equal the residue sum.
        let rho = [10.5, 21.5];
        let t = [13.2, 17.9];
        let sup = Support {
            n: vec![0, 9, 10, 11, 20, 22],
            a: vec![1.0, 0.3, -0.7, 0.2, 0.5, -0.4],
            b: vec![1.0, 0.1, 0.2, -0.3, 0.4, 0.6],
            g: vec![0.0; 6],
        };
        // G(n) = (-1)^n a_n / m(n)
        let mut sup = sup;
        for i in 0..sup.n.len() {
            let sgn = if sup.n[i] % 2 == 0 { 1.0 } else { -1.0 };
            sup.g[i] = sgn * sup.a[i] / eval_m_unchecked(sup.n[i] as f64, &rho, &t);
        }
        let res = residues_of_inverse_m(&rho, &t);
        for &z in &[3.3, 15.1, 30.7] {
            let lhs = sup.s_at(z).0 / eval_m_unchecked(z, &rho, &t);
            let rhs = sup.cauchy_g(z).0;
            let defect: f64 = (0..2)
                .map(|j| res[j] * sup.s_at(rho[j]).0 / (z - rho[j]))
                .sum();
            assert!((lhs - rhs - defect).abs() < 1e-12 * lhs.abs().max(1.0));
        }
    }
}
