//! Generating functions: evaluation, zeros and integer samples.

pub mod kadets;
pub mod pv;
pub mod simple;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bisect, polish, scan_sign_changes};
use crate::spectra::{IntervalFamily, Spectrum};
use crate::summation::{lattice_sum, CompensatedSum};

pub use kadets::{KadetsExample, KadetsRho};
pub use pv::{PvProduct, PvValue};
pub use simple::SimpleExample;

/// Default zero-scan step.
pub const SCAN_STEP: f64 = 1.0 / 64.0;
/// Absolute bisection tolerance for zeros.
pub const ZERO_TOL: f64 = 1e-13;
/// Longest integer window sampled pointwise.
pub const MAX_SAMPLES: i64 = 1 << 26;

/// A real entire function that is real on the real line.
pub trait GenFn: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    fn eval_complex(&self, z: Complex64) -> Result<Complex64>;

    /// `G'(lambda)` at a zero, when the model knows it in closed form.
    fn derivative_at_zero(&self, _lambda: f64) -> Option<f64> {
        None
    }

    /// The zeros in `[lo, hi]`, when the model knows them; the scan is
    /// skipped but every zero still has to show a sign change.
    fn known_zeros(&self, _lo: f64, _hi: f64) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Points away from which `n -> G(n)^2` is a smooth sequence.
    fn features(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Whether long integer sums of `G(n)^2` may use lattice summation.
    fn lattice_smooth(&self) -> bool {
        false
    }
}

fn default_k_cap() -> u32 {
    60
}

fn default_tol() -> f64 {
    1e-10
}

fn default_doublings() -> u32 {
    40
}

/// Model configuration as it appears in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    SimpleExample {
        #[serde(default = "default_k_cap")]
        k_cap: u32,
    },
    Kadets {
        delta0: f64,
        delta: f64,
        rho: KadetsRho,
    },
    Pv {
        spectrum: Spectrum,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_doublings")]
        max_doublings: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Simple(SimpleExample),
    Kadets(KadetsExample),
    Pv(PvProduct),
}

/// One certified zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zero {
    pub x: f64,
    pub deriv: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroList {
    pub lo: f64,
    pub hi: f64,
    pub zeros: Vec<Zero>,
}

impl ZeroList {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.x).collect()
    }

    /// Zeros inside `[a, b]`.
    pub fn within(&self, a: f64, b: f64) -> &[Zero] {
        let i = self.zeros.partition_point(|z| z.x < a);
        let j = self.zeros.partition_point(|z| z.x <= b);
        &self.zeros[i..j.max(i)]
    }
}

/// A generating-function model with a per-window zero cache.
pub struct GenFnModel {
    kind: ModelKind,
    cache: RwLock<BTreeMap<[u64; 3], Arc<ZeroList>>>,
}

impl fmt::Debug for GenFnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenFnModel")
            .field("kind", &self.kind)
            .finish()
    }
}

impl Clone for GenFnModel {
    fn clone(&self) -> Self {
        Self::new(self.kind.clone())
    }
}

impl GenFnModel {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            cache: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        let kind = match cfg {
            ModelConfig::SimpleExample { k_cap } => ModelKind::Simple(SimpleExample::new(*k_cap)?),
            ModelConfig::Kadets { delta0, delta, rho } => {
                ModelKind::Kadets(KadetsExample::new(*delta0, *delta, rho)?)
            }
            ModelConfig::Pv {
                spectrum,
                tol,
                max_doublings,
            } => ModelKind::Pv(PvProduct::new(spectrum.clone(), *tol, *max_doublings)?),
        };
        Ok(Self::new(kind))
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Simple(_) => "simple_example",
            ModelKind::Kadets(_) => "kadets",
            ModelKind::Pv(_) => "pv",
        }
    }

    /// Zeros on `[lo, hi]`, computed once per window and step.
    pub fn zeros(&self, lo: f64, hi: f64, step: f64) -> Result<Arc<ZeroList>> {
        let key = [lo.to_bits(), hi.to_bits(), step.to_bits()];
        if let Some(z) = self.cache.read().expect("zero cache poisoned").get(&key) {
            return Ok(Arc::clone(z));
        }
        let list = Arc::new(find_zeros(self, lo, hi, step)?);
        let mut w = self.cache.write().expect("zero cache poisoned");
        Ok(Arc::clone(w.entry(key).or_insert(list)))
    }
}

impl GenFn for GenFnModel {
    fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            ModelKind::Simple(g) => g.eval(x),
            ModelKind::Kadets(g) => g.eval(x),
            ModelKind::Pv(g) => g.eval_real(x).unwrap_or(f64::NAN),
        }
    }

    fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        match &self.kind {
            ModelKind::Simple(g) => g.eval_complex(z),
            ModelKind::Kadets(g) => g.eval_complex(z),
            ModelKind::Pv(g) => Ok(g.eval(z)?.value),
        }
    }

    fn derivative_at_zero(&self, lambda: f64) -> Option<f64> {
        match &self.kind {
            ModelKind::Simple(g) => Some(g.derivative(lambda)),
            ModelKind::Kadets(g) => g.derivative_at_zero(lambda),
            ModelKind::Pv(_) => None,
        }
    }

    fn known_zeros(&self, lo: f64, hi: f64) -> Option<Result<Vec<f64>>> {
        match &self.kind {
            ModelKind::Simple(_) => None,
            ModelKind::Kadets(g) => Some(g.known_zeros(lo, hi)),
            ModelKind::Pv(g) => Some(Ok(g.spectrum.points_in(lo, hi))),
        }
    }

    fn features(&self) -> Vec<f64> {
        match &self.kind {
            ModelKind::Simple(g) => g.features(),
            ModelKind::Kadets(g) => g.features(),
            ModelKind::Pv(_) => Vec::new(),
        }
    }

    fn lattice_smooth(&self) -> bool {
        !matches!(self.kind, ModelKind::Pv(_))
    }
}

/// Five-point central difference with a step fine enough for functions
/// oscillating at unit scale.
pub fn numeric_derivative<G: GenFn + ?Sized>(g: &G, x: f64) -> f64 {
    let h = 1.0 / 512.0;
    (-g.eval(x + 2.0 * h) + 8.0 * g.eval(x + h) - 8.0 * g.eval(x - h) + g.eval(x - 2.0 * h))
        / (12.0 * h)
}

/// `G'(lambda)`: analytic when available, numeric otherwise.
pub fn derivative<G: GenFn + ?Sized>(g: &G, lambda: f64) -> f64 {
    g.derivative_at_zero(lambda)
        .unwrap_or_else(|| numeric_derivative(g, lambda))
}

fn opposite(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
}

/// Certified simple zeros of `g` on `[lo, hi]`.
///
/// Brackets come from a sign-change scan with spacing `step`, or from the
/// model's own zero list, each checked for a sign change. Every bracket is
/// bisected to `ZERO_TOL` and polished by one Newton step.
pub fn find_zeros<G: GenFn + ?Sized>(g: &G, lo: f64, hi: f64, step: f64) -> Result<ZeroList> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo && step > 0.0) {
        return Err(Error::Domain(format!(
            "bad zero window [{lo}, {hi}] step {step}"
        )));
    }
    let f = |x: f64| g.eval(x);
    let brackets: Vec<(f64, f64)> = match g.known_zeros(lo, hi) {
        Some(known) => {
            let known = known?;
            let mut out = Vec::with_capacity(known.len());
            for (i, &z) in known.iter().enumerate() {
                let mut eta = step.max(2.0 * f64::EPSILON * z.abs());
                if i > 0 {
                    eta = eta.min(0.4 * (z - known[i - 1]));
                }
                if i + 1 < known.len() {
                    eta = eta.min(0.4 * (known[i + 1] - z));
                }
                let (a, b) = (z - eta, z + eta);
                if !opposite(f(a), f(b)) {
                    return Err(Error::Structural(format!(
                        "listed zero {z} shows no sign change"
                    )));
                }
                out.push((a, b));
            }
            out
        }
        None => scan_sign_changes(&f, lo, hi, step)
            .into_iter()
            .map(|(a, b)| if a == b { (a - step, b + step) } else { (a, b) })
            .collect(),
    };
    let zeros: Vec<Zero> = brackets
        .par_iter()
        .map(|&(a, b)| {
            let r = bisect(&f, a, b, ZERO_TOL)?;
            let d0 = derivative(g, r.x);
            let x = polish(&f, r.x, d0, a, b);
            let deriv = if x == r.x { d0 } else { derivative(g, x) };
            if !(deriv != 0.0 && deriv.is_finite()) {
                return Err(Error::Structural(format!(
                    "zero at {x} is not simple (G' = {deriv})"
                )));
            }
            Ok(Zero {
                x,
                deriv,
                lo: a,
                hi: b,
            })
        })
        .collect::<Result<_>>()?;
    if zeros.windows(2).any(|w| !(w[1].x > w[0].x)) {
        return Err(Error::Structural(
            "zeros are not strictly increasing".into(),
        ));
    }
    Ok(ZeroList { lo, hi, zeros })
}

/// `G(n)` on an integer window, with `sum G(n)^2` split by a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegerSamples {
    pub lo: i64,
    pub hi: i64,
    pub values: Vec<f64>,
    pub inside: f64,
    pub outside: f64,
}

impl IntegerSamples {
    pub fn get(&self, n: i64) -> Option<f64> {
        if n < self.lo || n > self.hi {
            None
        } else {
            Some(self.values[(n - self.lo) as usize])
        }
    }
}

pub fn samples_on_integers<G: GenFn + ?Sized>(
    g: &G,
    lo: i64,
    hi: i64,
    family: Option<&IntervalFamily>,
) -> Result<IntegerSamples> {
    if hi < lo || hi - lo >= MAX_SAMPLES {
        return Err(Error::Domain(format!(
            "integer window [{lo}, {hi}] empty or too long"
        )));
    }
    let values: Vec<f64> = (lo..=hi)
        .into_par_iter()
        .map(|n| g.eval(n as f64))
        .collect();
    let mut inside = CompensatedSum::new();
    let mut outside = CompensatedSum::new();
    for (i, v) in values.iter().enumerate() {
        let n = lo + i as i64;
        let hit = family.map_or(false, |f| f.locate(n as f64).is_some());
        if hit {
            inside.add(v * v);
        } else {
            outside.add(v * v);
        }
    }
    Ok(IntegerSamples {
        lo,
        hi,
        values,
        inside: inside.value(),
        outside: outside.value(),
    })
}

const PAR_CHUNK: i64 = 1 << 14;

/// Sum of `h(n)` over `lo ..= hi`, in parallel chunks combined in order.
pub fn par_sum<H: Fn(i64) -> f64 + Sync>(h: &H, lo: i64, hi: i64) -> f64 {
    if hi < lo {
        return 0.0;
    }
    let chunks = (hi - lo) / PAR_CHUNK + 1;
    let parts: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let a = lo + c * PAR_CHUNK;
            let b = (a + PAR_CHUNK - 1).min(hi);
            (a..=b).map(h).collect::<CompensatedSum>().value()
        })
        .collect();
    crate::summation::compensated(parts)
}

/// `sum_{n = lo}^{hi} weight(n) G(n)^2`; long ranges of lattice-smooth
/// models go through lattice summation, everything else pointwise.
pub fn sum_sq<G: GenFn + ?Sized, W: Fn(i64) -> f64 + Sync>(
    g: &G,
    lo: i64,
    hi: i64,
    weight: &W,
    extra_features: &[f64],
) -> f64 {
    let h = |n: i64| {
        let v = g.eval(n as f64);
        weight(n) * v * v
    };
    if hi - lo < MAX_SAMPLES / 16 || !g.lattice_smooth() {
        par_sum(&h, lo, hi)
    } else {
        let mut feats = g.features();
        feats.extend_from_slice(extra_features);
        lattice_sum(&h, lo, hi, &feats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_zero_at_three_halves() {
        let g = GenFnModel::from_config(&ModelConfig::SimpleExample { k_cap: 60 }).unwrap();
        let z = g.zeros(1.0, 2.0, SCAN_STEP).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z.zeros[0].x - 1.5).abs() < 1e-13);
    }

    #[test]
    fn zeros_near_a_center_bracketed() {
        let g = GenFnModel::from_config(&ModelConfig::SimpleExample { k_cap: 60 }).unwrap();
        let c = 32768.0;
        let z = g.zeros(c - 2.0, c + 2.0, SCAN_STEP).unwrap();
        let fine = scan_sign_changes(&|x: f64| g.eval(x), c - 2.0, c + 2.0, 1.0 / 1024.0);
        assert_eq!(z.len(), fine.len());
        for (zz, (a, b)) in z.zeros.iter().zip(&fine) {
            assert!(zz.x >= *a && zz.x <= *b);
            assert!(opposite(g.eval(zz.lo), g.eval(zz.hi)));
        }
    }

    #[test]
    fn cache_returns_same_list() {
        let g = GenFnModel::from_config(&ModelConfig::SimpleExample { k_cap: 60 }).unwrap();
        let a = g.zeros(-5.0, 5.0, SCAN_STEP).unwrap();
        let b = g.zeros(-5.0, 5.0, SCAN_STEP).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn mass_on_interval_k15() {
        let g = GenFnModel::from_config(&ModelConfig::SimpleExample { k_cap: 60 }).unwrap();
        let rho = 32768.0f64;
        let d = 2f64.powf(3.0);
        let (a, b) = ((rho - d).ceil() as i64, (rho + d).floor() as i64);
        let s = samples_on_integers(&g, a, b, None).unwrap();
        let oracle: f64 = (a..=b)
            .map(|n| {
                let x = n as f64;
                let mut s = 1.0 / (x - 0.5);
                for k in 10..=60 {
                    let c = 2f64.powi(k);
                    s += 1.0 / (x - c + 0.5) - 1.0 / (x - c - 0.5);
                }
                s * s
            })
            .sum();
        assert!((s.outside - oracle).abs() < 1e-10 * oracle);
        assert!((s.outside - 19.7).abs() < 0.1, "{}", s.outside);
    }
}
