use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::breaker::BreakerConfig;
use crate::certifier::{CertifierConfig, KernelWeights};
use crate::error::{Error, Result};
use crate::genfun::{GenFnModel, ModelConfig, ModelKind, SCAN_STEP};
use crate::spectra::{IntervalFamily, PowersOfTwo};

/// Where the lacunary family comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    PowersOfTwo(PowersOfTwo),
    Explicit {
        rho: Vec<f64>,
        d: Vec<f64>,
        #[serde(default)]
        k_offset: i64,
    },
    /// The family the model was built around (Kadets models only), with
    /// half-lengths doubled.
    Model,
}

fn default_window() -> i64 {
    1 << 14
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    /// Integer sums run over `[-window, window]`.
    #[serde(default = "default_window")]
    pub window: i64,
    /// Overrides the tolerance of a `pv` model.
    #[serde(default)]
    pub series_tol: Option<f64>,
    #[serde(default)]
    pub max_doublings: Option<u32>,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            window: default_window(),
            series_tol: None,
            max_doublings: None,
        }
    }
}

fn default_eta() -> f64 {
    0.01
}
fn default_fp_tol() -> f64 {
    1e-12
}
fn default_fp_max_iter() -> usize {
    200
}
fn default_cell() -> f64 {
    4.0
}
fn default_s_rescale() -> f64 {
    0.25
}
fn default_zero_step() -> f64 {
    SCAN_STEP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakerSettings {
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_fp_tol")]
    pub fp_tol: f64,
    #[serde(default = "default_fp_max_iter")]
    pub fp_max_iter: usize,
    #[serde(default = "default_cell")]
    pub cell: f64,
    #[serde(default = "default_s_rescale")]
    pub s_rescale: f64,
    #[serde(default = "default_zero_step")]
    pub zero_step: f64,
}

impl Default for BreakerSettings {
    fn default() -> Self {
        Self {
            eta: default_eta(),
            fp_tol: default_fp_tol(),
            fp_max_iter: default_fp_max_iter(),
            cell: default_cell(),
            s_rescale: default_s_rescale(),
            zero_step: default_zero_step(),
        }
    }
}

/// Weights for the certifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsConfig {
    /// `|G(n)|` of the configured model.
    #[default]
    Model,
    /// A constant on the integers of the family, zero elsewhere.
    Uniform { value: f64 },
}

fn default_defect_windows() -> Vec<i64> {
    vec![1 << 14, 1 << 15]
}
fn default_radius() -> f64 {
    16.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSettings {
    /// Sampling windows of the sweep, each at most the truncation window.
    #[serde(default = "default_defect_windows")]
    pub windows: Vec<i64>,
    /// Kernels are taken at zeros within this distance of 0 and of each
    /// center.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

impl Default for DefectSettings {
    fn default() -> Self {
        Self {
            windows: default_defect_windows(),
            radius: default_radius(),
        }
    }
}

fn default_x_min() -> f64 {
    -20.0
}
fn default_x_max() -> f64 {
    20.0
}
fn default_x_step() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleSettings {
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_x_step")]
    pub step: f64,
}

impl Default for ExampleSettings {
    fn default() -> Self {
        Self {
            x_min: default_x_min(),
            x_max: default_x_max(),
            step: default_x_step(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub breaker: BreakerSettings,
    #[serde(default)]
    pub certifier: CertifierConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub defect: DefectSettings,
    #[serde(default)]
    pub example: ExampleSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Largest admissible window; integers beyond it are not exact in `f64`.
pub const MAX_WINDOW: i64 = 1 << 53;
pub const MIN_WINDOW: i64 = 1 << 10;

fn check_window(n: i64, name: &str) -> Result<()> {
    if n < MIN_WINDOW || n > MAX_WINDOW || n.count_ones() != 1 {
        return Err(Error::Config(format!(
            "{name} = {n} must be a power of two in [2^10, 2^53]"
        )));
    }
    Ok(())
}

fn positive(v: f64, name: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive")))
    }
}

/// Largest window the certifier tabulates weights on.
pub const MAX_WEIGHT_WINDOW: i64 = 1 << 22;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        check_window(self.truncation.window, "truncation.window")?;
        if let Some(tol) = self.truncation.series_tol {
            positive(tol, "truncation.series_tol")?;
        }
        let b = &self.breaker;
        if !(b.eta > 0.0 && b.eta < 1.0) {
            return Err(Error::Config("breaker.eta must lie in (0, 1)".into()));
        }
        positive(b.fp_tol, "breaker.fp_tol")?;
        positive(b.cell, "breaker.cell")?;
        positive(b.s_rescale, "breaker.s_rescale")?;
        positive(b.zero_step, "breaker.zero_step")?;
        if b.fp_max_iter == 0 {
            return Err(Error::Config("breaker.fp_max_iter must be positive".into()));
        }
        self.certifier.validate()?;
        if let WeightsConfig::Uniform { value } = self.weights {
            positive(value, "weights.value")?;
        }
        if self.defect.windows.is_empty() {
            return Err(Error::Config("defect.windows is empty".into()));
        }
        for &w in &self.defect.windows {
            check_window(w, "defect.windows")?;
        }
        positive(self.defect.radius, "defect.radius")?;
        let e = &self.example;
        positive(e.step, "example.step")?;
        if !(e.x_max > e.x_min) || !e.x_min.is_finite() || !e.x_max.is_finite() {
            return Err(Error::Config("example needs x_min < x_max".into()));
        }
        if (e.x_max - e.x_min) / e.step > 1e7 {
            return Err(Error::Config("example grid exceeds 10^7 points".into()));
        }
        Ok(())
    }

    /// Replaces the truncation window, revalidating.
    pub fn with_window(mut self, window: i64) -> Result<Self> {
        self.truncation.window = window;
        self.validate()?;
        Ok(self)
    }

    pub fn model(&self) -> Result<GenFnModel> {
        let mut m = self.model.clone();
        if let ModelConfig::Pv {
            tol, max_doublings, ..
        } = &mut m
        {
            if let Some(t) = self.truncation.series_tol {
                *tol = t;
            }
            if let Some(d) = self.truncation.max_doublings {
                *max_doublings = d;
            }
        }
        GenFnModel::from_config(&m).map_err(|e| Error::Config(format!("model: {e}")))
    }

    /// The configured family, or the default one of the model.
    pub fn family_config(&self) -> Result<FamilyConfig> {
        if let Some(f) = &self.family {
            return Ok(f.clone());
        }
        match &self.model {
            ModelConfig::SimpleExample { .. } => Ok(FamilyConfig::PowersOfTwo(PowersOfTwo {
                k_min: 10,
                k_max: 18,
                center_shift: -0.5,
                d_rule: crate::spectra::HalfLengthRule::Power { exponent: 0.2 },
            })),
            ModelConfig::Kadets { .. } => Ok(FamilyConfig::Model),
            ModelConfig::Pv { .. } => Err(Error::Config(
                "missing field `family` (no default for pv models)".into(),
            )),
        }
    }

    pub fn family(&self, model: &GenFnModel) -> Result<IntervalFamily> {
        let f = match self.family_config()? {
            FamilyConfig::PowersOfTwo(p) => p.build(),
            FamilyConfig::Explicit { rho, d, k_offset } => {
                IntervalFamily::from_arrays(&rho, &d, k_offset)
            }
            FamilyConfig::Model => match model.kind() {
                ModelKind::Kadets(k) => Ok(k.breaker_family()),
                _ => {
                    return Err(Error::Config(
                        "family.kind = model needs a kadets model".into(),
                    ))
                }
            },
        };
        f.map_err(|e| Error::Config(format!("family: {e}")))
    }

    /// Whether the family rule has a divergent log-length series, when the
    /// family comes from a rule at all.
    pub fn rule_divergent(&self) -> Result<Option<bool>> {
        Ok(match self.family_config()? {
            FamilyConfig::PowersOfTwo(p) => Some(p.provably_divergent()),
            FamilyConfig::Explicit { .. } => None,
            FamilyConfig::Model => Some(false),
        })
    }

    pub fn breaker_config(&self, family: IntervalFamily) -> BreakerConfig {
        let b = &self.breaker;
        let mut cfg = BreakerConfig::new(family, self.truncation.window);
        cfg.eta = b.eta;
        cfg.fp_tol = b.fp_tol;
        cfg.fp_max_iter = b.fp_max_iter;
        cfg.cell = b.cell;
        cfg.s_rescale = b.s_rescale;
        cfg.zero_step = b.zero_step;
        cfg
    }

    pub fn weights(&self, model: &GenFnModel, family: &IntervalFamily) -> Result<KernelWeights> {
        let n = self.truncation.window;
        if n > MAX_WEIGHT_WINDOW {
            return Err(Error::Config(format!(
                "truncation.window = {n} exceeds the certifier limit 2^22"
            )));
        }
        match self.weights {
            WeightsConfig::Model => KernelWeights::from_model(model, -n, n),
            WeightsConfig::Uniform { value } => KernelWeights::uniform_on(family, value, -n, n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simple_config() {
        let c = RunConfig::from_json(r#"{"model": {"kind": "simple_example"}}"#).unwrap();
        assert_eq!(c.truncation.window, 1 << 14);
        let m = c.model().unwrap();
        let f = c.family(&m).unwrap();
        assert_eq!(f.k_range(), Some((10, 18)));
        assert_eq!(c.rule_divergent().unwrap(), Some(false));
    }

    #[test]
    fn tagged_family_rejects_unknown_keys() {
        let ok = r#"{"model": {"kind": "simple_example"},
            "family": {"kind": "powers_of_two", "k_min": 4, "k_max": 12,
                       "d_rule": {"kind": "ratio", "value": 0.0625}}}"#;
        let c = RunConfig::from_json(ok).unwrap();
        assert_eq!(c.rule_divergent().unwrap(), Some(true));
        let bad = ok.replace("\"k_max\"", "\"bogus\": 1, \"k_max\"");
        let e = RunConfig::from_json(&bad).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn missing_model_names_the_key() {
        let e = RunConfig::from_json("{}").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(e.to_string().contains("model"), "{e}");
    }

    #[test]
    fn window_and_eta_validated() {
        let base = r#"{"model": {"kind": "simple_example"}, "truncation": {"window": W}}"#;
        for w in ["1000", "512", "3072"] {
            assert!(RunConfig::from_json(&base.replace('W', w)).is_err());
        }
        assert!(RunConfig::from_json(&base.replace('W', "1024")).is_ok());
        let eta = r#"{"model": {"kind": "simple_example"}, "breaker": {"eta": 1.0}}"#;
        assert!(matches!(RunConfig::from_json(eta), Err(Error::Config(_))));
    }

    #[test]
    fn pv_needs_a_family_and_takes_truncation_overrides() {
        let c = RunConfig::from_json(
            r#"{"model": {"kind": "pv", "spectrum": {"kind": "integers_punctured"}},
                "truncation": {"window": 1024, "series_tol": 1e-12}}"#,
        )
        .unwrap();
        assert!(c.family_config().is_err());
        assert!(c.model().is_ok());
    }
}
