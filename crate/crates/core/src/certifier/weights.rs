use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::{GenFn, GenFnModel};
use crate::spectra::IntervalFamily;
use crate::summation::CompensatedSum;

/// Where the weights came from; decides how `|G(x)|` is evaluated off
/// the integers.
#[derive(Debug, Clone)]
pub enum WeightSource {
    Model(GenFnModel),
    /// Tabulated weights; `|G(x)|` is the weight at the nearest integer.
    Synthetic,
}

/// `sum (w_n^2 + w_n) / (|n| + 1)` over the full window and over its
/// central half. The hypothesis is a tail condition; the two partial sums
/// are the finite evidence for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandingSums {
    pub full: f64,
    pub half: f64,
}

/// `w_n = |G(n)|` on the integer window `lo ..= hi`, zero outside.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    lo: i64,
    hi: i64,
    w: Vec<f64>,
    w2: Vec<f64>,
    source: WeightSource,
}

impl KernelWeights {
    pub fn from_model(model: &GenFnModel, lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::Domain(format!("empty weight window [{lo}, {hi}]")));
        }
        let w: Vec<f64> = (lo..=hi)
            .into_par_iter()
            .map(|n| model.eval(n as f64).abs())
            .collect();
        if let Some(i) = w.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("G({}) is not finite", lo + i as i64)));
        }
        Ok(Self::build(lo, w, WeightSource::Model(model.clone())))
    }

    pub fn synthetic(lo: i64, w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Domain("empty weight table".into()));
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self::build(lo, w, WeightSource::Synthetic))
    }

    /// Weight `value` on every integer of every interval, zero elsewhere.
    pub fn uniform_on(family: &IntervalFamily, value: f64, lo: i64, hi: i64) -> Result<Self> {
        let w = (lo..=hi)
            .map(|n| {
                if family.locate(n as f64).is_some() {
                    value
                } else {
                    0.0
                }
            })
            .collect();
        Self::synthetic(lo, w)
    }

    fn build(lo: i64, w: Vec<f64>, source: WeightSource) -> Self {
        let hi = lo + w.len() as i64 - 1;
        let w2 = w.iter().map(|v| v * v).collect();
        Self {
            lo,
            hi,
            w,
            w2,
            source,
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn source(&self) -> &WeightSource {
        &self.source
    }

    pub fn source_name(&self) -> &'static str {
        match &self.source {
            WeightSource::Model(m) => m.name(),
            WeightSource::Synthetic => "synthetic",
        }
    }

    pub fn w(&self, n: i64) -> f64 {
        if n < self.lo || n > self.hi {
            0.0
        } else {
            self.w[(n - self.lo) as usize]
        }
    }

    pub fn w2(&self, n: i64) -> f64 {
        if n < self.lo || n > self.hi {
            0.0
        } else {
            self.w2[(n - self.lo) as usize]
        }
    }

    pub fn squares(&self) -> &[f64] {
        &self.w2
    }

    /// Multiplies the weights on `a ..= b` by `factor`.
    pub fn scale_range(&mut self, a: i64, b: i64, factor: f64) {
        for n in a.max(self.lo)..=b.min(self.hi) {
            let i = (n - self.lo) as usize;
            self.w[i] *= factor;
            self.w2[i] = self.w[i] * self.w[i];
        }
    }

    /// `|G(x)|`: the model off the integers, the nearest weight for
    /// synthetic tables.
    pub fn profile(&self, x: f64) -> f64 {
        match &self.source {
            WeightSource::Model(m) => m.eval(x).abs(),
            WeightSource::Synthetic => self.w(x.round() as i64),
        }
    }

    pub fn standing_sums(&self) -> StandingSums {
        let half = (self.hi.abs().max(self.lo.abs())) / 2;
        let mut full = CompensatedSum::new();
        let mut central = CompensatedSum::new();
        for (i, &v) in self.w.iter().enumerate() {
            let n = self.lo + i as i64;
            let t = (v * v + v) / (n.abs() as f64 + 1.0);
            full.add(t);
            if n.abs() <= half {
                central.add(t);
            }
        }
        StandingSums {
            full: full.value(),
            half: central.value(),
        }
    }

    /// `g_k = sum_{n in I_k} w_n^2`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        let a = (lo.ceil() as i64).max(self.lo);
        let b = (hi.floor() as i64).min(self.hi);
        (a..=b)
            .map(|n| self.w2(n))
            .collect::<CompensatedSum>()
            .value()
    }
}
