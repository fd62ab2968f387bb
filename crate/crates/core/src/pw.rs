//! Finite Paley-Wiener model through integer samples.
//!
//! A function in `PW_pi` is determined by its values on the integers and
//! `||f||^2 = sum |f(n)|^2`, so truncating to `[-N, N]` turns kernels,
//! biorthogonal functions and inner products into plain vectors.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::{GenFn, GenFnModel, SCAN_STEP};
use crate::special::sin_pi_over;
use crate::summation::CompensatedSum;

pub const DEFAULT_WINDOW: i64 = 1 << 14;
pub const MAX_COLUMNS: usize = 4096;
/// Singular values below this fraction of the largest are treated as
/// zero when forming the projection.
pub const RANK_TOL: f64 = 1e-13;

/// Samples `f(n)` for `n` in `[-window, window]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPWVector {
    window: i64,
    samples: Vec<f64>,
}

impl SampledPWVector {
    pub fn new(window: i64, samples: Vec<f64>) -> Result<Self> {
        if window < 0 || samples.len() as i64 != 2 * window + 1 {
            return Err(Error::Contract(format!(
                "{} samples do not fill the window [-{window}, {window}]",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite sample".into()));
        }
        Ok(Self { window, samples })
    }

    pub fn from_fn<F: Fn(i64) -> f64 + Sync + Send>(window: i64, f: F) -> Result<Self> {
        Self::new(window, (-window..=window).into_par_iter().map(f).collect())
    }

    /// The unit vector `e_m`.
    pub fn unit(window: i64, m: i64) -> Result<Self> {
        if m.abs() > window {
            return Err(Error::Range {
                index: m,
                first: -window,
                last: window,
            });
        }
        Self::from_fn(window, |n| if n == m { 1.0 } else { 0.0 })
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn get(&self, n: i64) -> Option<f64> {
        if n.abs() > self.window {
            None
        } else {
            Some(self.samples[(n + self.window) as usize])
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.samples
            .iter()
            .map(|v| v * v)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Estimated relative norm of the part beyond the window, assuming the
    /// samples decay like `1/n` from the two edges outward.
    pub fn tail_estimate(&self) -> f64 {
        let first = self.samples[0];
        let last = self.samples[self.samples.len() - 1];
        let missing = (first * first + last * last) * self.window as f64;
        let norm = self.norm_sq();
        if norm > 0.0 {
            (missing / norm).sqrt()
        } else {
            0.0
        }
    }
}

fn same_window(u: &SampledPWVector, v: &SampledPWVector) -> Result<()> {
    if u.window != v.window {
        return Err(Error::Contract(format!(
            "window mismatch: {} vs {}",
            u.window, v.window
        )));
    }
    Ok(())
}

/// `sum_n u(n) v(n)`.
pub fn pairing(u: &SampledPWVector, v: &SampledPWVector) -> Result<f64> {
    same_window(u, v)?;
    Ok(u.samples
        .iter()
        .zip(&v.samples)
        .map(|(a, b)| a * b)
        .collect::<CompensatedSum>()
        .value())
}

/// `K_lambda(n) = sin(pi (n - lambda)) / (pi (n - lambda))`.
pub fn sample_kernel(lambda: f64, window: i64) -> Result<SampledPWVector> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("non-finite lambda {lambda}")));
    }
    SampledPWVector::from_fn(window, |n| {
        sin_pi_over(n as f64 - lambda) / std::f64::consts::PI
    })
}

/// `G_lambda(n) = G(n) / (G'(lambda) (n - lambda))` for a certified zero
/// `lambda` of the model.
pub fn sample_biorth(model: &GenFnModel, lambda: f64, window: i64) -> Result<SampledPWVector> {
    let zeros = model.zeros(lambda - 1.0, lambda + 1.0, SCAN_STEP)?;
    let tol = 1e-9 * lambda.abs().max(1.0);
    let zero = zeros
        .zeros
        .iter()
        .find(|z| (z.x - lambda).abs() <= tol)
        .ok_or_else(|| Error::Domain(format!("{lambda} is not a certified zero of G")))?;
    let (x, deriv) = (zero.x, zero.deriv);
    SampledPWVector::from_fn(window, |n| {
        let nf = n as f64;
        if nf == x {
            1.0
        } else {
            model.eval(nf) / (deriv * (nf - x))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub window: i64,
    pub columns: usize,
    pub rank: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub condition: f64,
    /// Largest [`SampledPWVector::tail_estimate`] among the inputs.
    pub tail_budget: f64,
    pub candidate_norm: Option<f64>,
    /// `||c - P c|| / ||c||` for the candidate `c`.
    pub residual: Option<f64>,
    pub singular_values: Vec<f64>,
}

/// Orthonormal basis of the span of the columns, with the singular values
/// of the column-normalized matrix.
pub struct SpanBasis {
    pub basis: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

pub fn span_basis(vectors: &[SampledPWVector]) -> Result<SpanBasis> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Domain("no vectors".into()))?;
    if vectors.len() > MAX_COLUMNS {
        return Err(Error::Contract(format!(
            "{} columns exceed the dense limit {MAX_COLUMNS}",
            vectors.len()
        )));
    }
    for v in vectors {
        same_window(first, v)?;
    }
    let rows = first.samples.len();
    let cols = vectors.len();
    let norms: Vec<f64> = vectors.iter().map(SampledPWVector::norm).collect();
    if let Some(i) = norms.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Domain(format!("column {i} is the zero vector")));
    }
    let a = DMatrix::from_fn(rows, cols, |r, c| vectors[c].samples[r] / norms[c]);
    let qr = a.qr();
    let q = qr.q();
    let r = qr.r();
    let svd = r.svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::Domain("singular vectors unavailable".into()))?;
    let sv = svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > RANK_TOL * smax).collect();
    let u_keep = DMatrix::from_fn(u.nrows(), keep.len(), |i, j| u[(i, keep[j])]);
    let mut singular_values: Vec<f64> = sv.iter().copied().collect();
    singular_values.sort_by(f64::total_cmp);
    Ok(SpanBasis {
        basis: q * u_keep,
        singular_values,
        rank: keep.len(),
    })
}

impl SpanBasis {
    /// `v - P v` with one reorthogonalization pass.
    pub fn residual(&self, v: &SampledPWVector) -> Result<DVector<f64>> {
        if v.samples.len() != self.basis.nrows() {
            return Err(Error::Contract(
                "candidate window differs from the span".into(),
            ));
        }
        let mut r = DVector::from_column_slice(&v.samples);
        for _ in 0..2 {
            let coef = self.basis.tr_mul(&r);
            r -= &self.basis * coef;
        }
        Ok(r)
    }
}

pub fn gram_defect(
    vectors: &[SampledPWVector],
    candidate: Option<&SampledPWVector>,
) -> Result<DefectReport> {
    let span = span_basis(vectors)?;
    let window = vectors[0].window;
    let mut tail_budget = vectors
        .iter()
        .map(SampledPWVector::tail_estimate)
        .fold(0.0, f64::max);
    let (candidate_norm, residual) = match candidate {
        Some(c) => {
            same_window(&vectors[0], c)?;
            let norm = c.norm();
            if !(norm > 0.0) {
                return Err(Error::Domain("candidate is the zero vector".into()));
            }
            tail_budget = tail_budget.max(c.tail_estimate());
            let r = span.residual(c)?;
            (Some(norm), Some((r.norm() / norm).min(1.0)))
        }
        None => (None, None),
    };
    let sigma_min = span.singular_values[0];
    let sigma_max = *span.singular_values.last().expect("nonempty");
    Ok(DefectReport {
        window,
        columns: vectors.len(),
        rank: span.rank,
        sigma_min,
        sigma_max,
        condition: if sigma_min > 0.0 {
            sigma_max / sigma_min
        } else {
            f64::INFINITY
        },
        tail_budget,
        candidate_norm,
        residual,
        singular_values: span.singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{ModelKind, PvProduct};
    use crate::spectra::Spectrum;
    use std::f64::consts::PI;

    #[test]
    fn integer_kernel_is_unit_vector() {
        let k = sample_kernel(5.0, 64).unwrap();
        assert_eq!(k, SampledPWVector::unit(64, 5).unwrap());
    }

    #[test]
    fn half_integer_kernel_value_at_origin() {
        let k = sample_kernel(0.5, 64).unwrap();
        assert!((k.get(0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((k.get(3).unwrap() - 1.0 / (PI * 2.5)).abs() < 1e-15);
    }

    #[test]
    fn kernel_inner_products_reproduce_sinc() {
        let n = 4096;
        for &(a, b) in &[(0.3, 0.3), (0.3, 2.9), (-10.25, 7.5), (100.1, 99.4)] {
            let ip = pairing(&sample_kernel(a, n).unwrap(), &sample_kernel(b, n).unwrap()).unwrap();
            let exact = sin_pi_over(a - b) / PI;
            assert!(
                (ip - exact).abs() <= 1.0 / n as f64,
                "{a},{b}: {ip} vs {exact}"
            );
        }
    }

    #[test]
    fn biorthogonal_of_shifted_lattice_is_a_kernel() {
        let model = GenFnModel::new(ModelKind::Pv(
            PvProduct::new(Spectrum::Shifted { offset: 0.5 }, 1e-12, 40).unwrap(),
        ));
        let g = sample_biorth(&model, 0.5, 128).unwrap();
        let k = sample_kernel(0.5, 128).unwrap();
        for (x, y) in g.samples().iter().zip(k.samples()) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        assert!(matches!(
            sample_biorth(&model, 0.7, 128),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn orthonormal_columns_and_complement() {
        let n = 32;
        let all: Vec<_> = (-n..=n)
            .map(|m| SampledPWVector::unit(n, m).unwrap())
            .collect();
        let rep = gram_defect(&all, None).unwrap();
        assert!((rep.sigma_min - 1.0).abs() < 1e-12 && (rep.sigma_max - 1.0).abs() < 1e-12);
        let rest: Vec<_> = all
            .iter()
            .filter(|v| v.get(0) != Some(1.0))
            .cloned()
            .collect();
        let rep = gram_defect(&rest, Some(&all[n as usize])).unwrap();
        assert!((rep.residual.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contract_and_domain_errors() {
        let a = SampledPWVector::unit(8, 0).unwrap();
        let b = SampledPWVector::unit(16, 0).unwrap();
        assert!(matches!(pairing(&a, &b), Err(Error::Contract(_))));
        assert!(matches!(
            gram_defect(&[a.clone(), b], None),
            Err(Error::Contract(_))
        ));
        let z = SampledPWVector::new(8, vec![0.0; 17]).unwrap();
        assert!(matches!(gram_defect(&[a, z], None), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_shrinks_as_columns_are_added() {
        let n = 256;
        let c = sample_kernel(0.37, n).unwrap();
        let mut cols = Vec::new();
        let mut last = 1.0;
        for x in [0.0, 1.5, -0.75, 2.25, 0.9] {
            cols.push(sample_kernel(x, n).unwrap());
            let r = gram_defect(&cols, Some(&c)).unwrap().residual.unwrap();
            assert!(r <= last + 1e-14);
            last = r;
        }
    }
}
