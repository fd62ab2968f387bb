use serde::Serialize;

use super::weights::KernelWeights;
use crate::error::{Error, Result};
use crate::spectra::IntervalFamily;
use crate::summation::CompensatedSum;

fn check_pole(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("non-finite point {t}")));
    }
    if t == t.round() {
        return Err(Error::Pole(format!("t = {t} is an integer")));
    }
    Ok(())
}

/// `M(t) = sum_n w_n^2 / (n - t)` over the weight window.
pub fn m_eval(weights: &KernelWeights, t: f64) -> Result<f64> {
    check_pole(t)?;
    let n = t.floor();
    m_eval_local(weights, n as i64, t - n)
}

/// `M(n + u)` for `0 < u < 1`, with every difference `m - n - u` formed
/// from the exact integer `m - n`. Keeps full relative precision in `u`
/// when `n` is large.
pub fn m_eval_local(weights: &KernelWeights, n: i64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("offset {u} outside (0, 1)")));
    }
    let lo = weights.lo();
    Ok(weights
        .squares()
        .iter()
        .enumerate()
        .map(|(i, &v)| v / ((lo + i as i64 - n) as f64 - u))
        .collect::<CompensatedSum>()
        .value())
}

/// `||K_{n+u}||^2` in the same local coordinates as [`m_eval_local`].
pub fn kernel_norm_sq_local(weights: &KernelWeights, n: i64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("offset {u} outside (0, 1)")));
    }
    let lo = weights.lo();
    Ok(weights
        .squares()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = (lo + i as i64 - n) as f64 - u;
            v / (x * x)
        })
        .collect::<CompensatedSum>()
        .value())
}

/// `||K_lambda||^2 = sum_n w_n^2 / (lambda - n)^2`.
pub fn kernel_norm_sq(weights: &KernelWeights, lambda: f64) -> Result<f64> {
    check_pole(lambda)?;
    let lo = weights.lo();
    Ok(weights
        .squares()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = lambda - (lo + i as i64) as f64;
            v / (x * x)
        })
        .collect::<CompensatedSum>()
        .value())
}

/// `<K_a, K_b> = sum_n w_n^2 / ((a - n)(b - n))`, summed directly.
pub fn kernel_inner(weights: &KernelWeights, a: f64, b: f64) -> Result<f64> {
    check_pole(a)?;
    check_pole(b)?;
    let lo = weights.lo();
    Ok(weights
        .squares()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let n = (lo + i as i64) as f64;
            v / ((a - n) * (b - n))
        })
        .collect::<CompensatedSum>()
        .value())
}

/// `<K_a, K_b>` through the identity `(M(b) - M(a)) / (b - a)`.
pub fn kernel_inner_via_m(weights: &KernelWeights, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return kernel_norm_sq(weights, a);
    }
    Ok((m_eval(weights, b)? - m_eval(weights, a)?) / (b - a))
}

/// Coefficient vector of `K_lambda` in the isometric picture
/// `sum b_n w_n / (z - n) <-> (b_n)`: `b_n = w_n / (lambda - n)`.
pub fn kernel_coefficients(weights: &KernelWeights, lambda: f64) -> Result<Vec<f64>> {
    check_pole(lambda)?;
    let lo = weights.lo();
    Ok((lo..=weights.hi())
        .map(|n| weights.w(n) / (lambda - n as f64))
        .collect())
}

const NEAR: i64 = 32;
const MOMENTS: usize = 10;

/// `M(n + u)` on `0 < u < 1`: poles within `NEAR` summed exactly, the
/// rest through its Taylor expansion about `u = 1/2`.
struct LocalM<'a> {
    weights: &'a KernelWeights,
    n: i64,
    near_lo: i64,
    near_hi: i64,
    moments: [f64; MOMENTS],
}

impl<'a> LocalM<'a> {
    fn new(weights: &'a KernelWeights, n: i64) -> Self {
        let near_lo = (n - NEAR).max(weights.lo());
        let near_hi = (n + 1 + NEAR).min(weights.hi());
        let mut acc = [CompensatedSum::new(); MOMENTS];
        let lo = weights.lo();
        for (i, &v) in weights.squares().iter().enumerate() {
            let m = lo + i as i64;
            if v == 0.0 || (m >= near_lo && m <= near_hi) {
                continue;
            }
            let x = 1.0 / ((m - n) as f64 - 0.5);
            let mut p = x;
            for a in acc.iter_mut() {
                a.add(v * p);
                p *= x;
            }
        }
        let mut moments = [0.0; MOMENTS];
        for (m, a) in moments.iter_mut().zip(acc.iter()) {
            *m = a.value();
        }
        Self {
            weights,
            n,
            near_lo,
            near_hi,
            moments,
        }
    }

    /// `(M(n + u), M'(n + u))`.
    fn eval(&self, u: f64) -> (f64, f64) {
        let mut v = CompensatedSum::new();
        let mut dv = 0.0;
        for m in self.near_lo..=self.near_hi {
            let w2 = self.weights.w2(m);
            if w2 == 0.0 {
                continue;
            }
            let x = 1.0 / ((m - self.n) as f64 - u);
            v.add(w2 * x);
            dv += w2 * x * x;
        }
        let h = u - 0.5;
        let mut p = 1.0;
        let mut far = 0.0;
        let mut dfar = 0.0;
        for (j, &f) in self.moments.iter().enumerate() {
            far += f * p;
            if j + 1 < MOMENTS {
                dfar += (j + 1) as f64 * self.moments[j + 1] * p;
            }
            p *= h;
        }
        v.add(far);
        (v.value(), dv + dfar)
    }
}

/// One row of the root table. The root is `t = n + u`; `u` carries the
/// full precision, `t` is its rounded sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MRoot {
    pub k: i64,
    pub n: i64,
    pub u: f64,
    pub t: f64,
    /// Sign-change certificate in offsets: `M(n + u_lo) < 0 < M(n + u_hi)`.
    pub u_lo: f64,
    pub u_hi: f64,
    pub m_lo: f64,
    pub m_hi: f64,
    pub in_j: bool,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MRootTable {
    pub window: (i64, i64),
    pub rows: Vec<MRoot>,
}

impl MRootTable {
    pub fn for_k(&self, k: i64) -> impl Iterator<Item = &MRoot> + '_ {
        self.rows.iter().filter(move |r| r.k == k)
    }

    pub fn get(&self, k: i64, n: i64) -> Option<&MRoot> {
        self.rows.iter().find(|r| r.k == k && r.n == n)
    }
}

fn endpoint(local: &LocalM, left: bool) -> Option<(f64, f64)> {
    let mut h = 0.25;
    while h > 0.0 {
        let u = if left { h } else { 1.0 - h };
        if u <= 0.0 || u >= 1.0 {
            return None;
        }
        let (v, _) = local.eval(u);
        if (left && v < 0.0) || (!left && v > 0.0) {
            return Some((u, v));
        }
        h *= 0.5;
    }
    None
}

/// Root offset `u` of `M(n + u)` in `(0, 1)`, with its sign-change
/// bracket `(u_lo, u_hi, M(n + u_lo), M(n + u_hi))`.
///
/// `M` increases strictly between consecutive poles, so a sign change
/// brackets exactly one root; refinement is Newton safeguarded by
/// bisection.
pub fn m_root(weights: &KernelWeights, n: i64) -> Result<(f64, f64, f64, f64, f64)> {
    if n < weights.lo() || n + 1 > weights.hi() {
        return Err(Error::Range {
            index: n,
            first: weights.lo(),
            last: weights.hi() - 1,
        });
    }
    let local = LocalM::new(weights, n);
    let inconsistent = || {
        Error::Domain(format!(
            "M keeps one sign on ({n}, {}) with no pole between: window/tail inconsistency",
            n + 1
        ))
    };
    let (lo, m_lo) = endpoint(&local, true).ok_or_else(inconsistent)?;
    let (hi, m_hi) = endpoint(&local, false).ok_or_else(inconsistent)?;
    let (mut a, mut b) = (lo, hi);
    let mut u = 0.5 * (a + b);
    for _ in 0..400 {
        let (v, dv) = local.eval(u);
        if v == 0.0 {
            break;
        }
        if v < 0.0 {
            a = u;
        } else {
            b = u;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let newton = u - v / dv;
        u = if dv > 0.0 && newton > a && newton < b {
            newton
        } else {
            mid
        };
        if b - a <= 4.0 * f64::EPSILON * u {
            break;
        }
    }
    Ok((u, lo, hi, m_lo, m_hi))
}

/// Roots of `M` in `(n, n + 1)` for every integer `n` of every
/// `J_k = [rho_k - d_k/2, rho_k + d_k/2]`.
pub fn m_roots(weights: &KernelWeights, family: &IntervalFamily) -> Result<MRootTable> {
    let mut rows = Vec::new();
    for (k, iv) in family.iter() {
        let (jl, jh) = (iv.rho - 0.5 * iv.d, iv.rho + 0.5 * iv.d);
        for n in (jl.ceil() as i64)..=(jh.floor() as i64) {
            let (u, u_lo, u_hi, m_lo, m_hi) = m_root(weights, n)?;
            let t = n as f64 + u;
            rows.push(MRoot {
                k,
                n,
                u,
                t,
                u_lo,
                u_hi,
                m_lo,
                m_hi,
                in_j: t >= jl && t <= jh,
                eps: u.min(1.0 - u),
            });
        }
    }
    Ok(MRootTable {
        window: (weights.lo(), weights.hi()),
        rows,
    })
}

pub const ROOT_CSV_HEADER: &str = "n,t_root,eps,in_Nk";
