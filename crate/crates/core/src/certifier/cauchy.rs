use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::GenFn;
use crate::roots::bisect;
use crate::special::sin_pi;
use crate::summation::CompensatedSum;

pub const CAUCHY_TOL: f64 = 1e-13;

/// Zero of `f(z) = sum mu_k / (z - t_k)` between two consecutive
/// positive-mass poles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyZero {
    pub left: usize,
    pub right: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyZeros {
    pub zeros: Vec<CauchyZero>,
    /// Partial sums of `(t_{k+1} - s_k) / s_k` over gaps with `t_k > 0`.
    pub outer_positive: Vec<f64>,
    /// Partial sums of `(s_k - t_k) / |s_k|` over gaps with `t_{k+1} < 0`.
    pub outer_negative: Vec<f64>,
}

pub fn cauchy_eval(mu: &[f64], t: &[f64], z: f64) -> f64 {
    mu.iter()
        .zip(t)
        .filter(|(m, _)| **m != 0.0)
        .map(|(m, tk)| m / (z - tk))
        .collect::<CompensatedSum>()
        .value()
}

pub fn cauchy_zeros(mu: &[f64], t: &[f64]) -> Result<CauchyZeros> {
    if mu.len() != t.len() {
        return Err(Error::Domain("mu and t differ in length".into()));
    }
    if mu.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::Domain(
            "masses must be finite and nonnegative".into(),
        ));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("poles must be strictly increasing".into()));
    }
    let support: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 0.0).collect();
    if support.is_empty() {
        return Err(Error::Domain("all masses vanish".into()));
    }
    let f = |z: f64| cauchy_eval(mu, t, z);
    let mut zeros = Vec::new();
    let mut outer_positive = Vec::new();
    let mut outer_negative = Vec::new();
    let (mut pos, mut neg) = (CompensatedSum::new(), CompensatedSum::new());
    for w in support.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (a, b) = (t[i], t[j]);
        let mut h = 0.25 * (b - a);
        let lo = loop {
            let x = a + h;
            if x <= a {
                return Err(Error::Domain(format!("no sign change near pole {a}")));
            }
            if f(x) > 0.0 {
                break x;
            }
            h *= 0.5;
        };
        let mut h = 0.25 * (b - a);
        let hi = loop {
            let x = b - h;
            if x >= b {
                return Err(Error::Domain(format!("no sign change near pole {b}")));
            }
            if f(x) < 0.0 {
                break x;
            }
            h *= 0.5;
        };
        let s = bisect(&f, lo, hi, CAUCHY_TOL)?.x;
        debug_assert!(a < s && s < b);
        if a > 0.0 {
            pos.add((b - s) / s);
            outer_positive.push(pos.value());
        }
        if b < 0.0 {
            neg.add((s - a) / s.abs());
            outer_negative.push(neg.value());
        }
        zeros.push(CauchyZero {
            left: i,
            right: j,
            s,
        });
    }
    Ok(CauchyZeros {
        zeros,
        outer_positive,
        outer_negative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

/// Both sides of `f(z) sum a_n G(n)/(z - n) = G(z) sum a_n^2/(z - n)`,
/// `f(z) = sin(pi z) sum (-1)^n a_n/(z - n)`, for `a` supported on
/// `lo .. lo + a.len()`.
pub fn functional_identity_residual<G: GenFn + ?Sized>(
    g: &G,
    lo: i64,
    a: &[f64],
    z_samples: &[f64],
) -> Result<Vec<IdentityResidual>> {
    let gn: Vec<f64> = (0..a.len())
        .map(|i| g.eval((lo + i as i64) as f64))
        .collect();
    z_samples
        .iter()
        .map(|&z| {
            if !z.is_finite() {
                return Err(Error::Domain(format!("non-finite sample {z}")));
            }
            if z == z.round() {
                return Err(Error::Pole(format!("z = {z} is an integer")));
            }
            let mut alt = CompensatedSum::new();
            let mut mixed = CompensatedSum::new();
            let mut sq = CompensatedSum::new();
            for (i, &an) in a.iter().enumerate() {
                if an == 0.0 {
                    continue;
                }
                let n = lo + i as i64;
                let inv = 1.0 / (z - n as f64);
                let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                alt.add(sign * an * inv);
                mixed.add(an * gn[i] * inv);
                sq.add(an * an * inv);
            }
            let f = sin_pi(z) * alt.value();
            let lhs = f * mixed.value();
            let rhs = g.eval(z) * sq.value();
            Ok(IdentityResidual {
                z,
                lhs,
                rhs,
                diff: (lhs - rhs).abs(),
            })
        })
        .collect()
}
