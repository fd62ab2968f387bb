use serde::{Deserialize, Serialize};

use super::mroots::{kernel_norm_sq, m_eval, MRootTable};
use super::weights::{KernelWeights, StandingSums, WeightSource};
use crate::error::{Error, Result};
use crate::spectra::IntervalFamily;
use crate::summation::CompensatedSum;

fn default_grid_step_max() -> f64 {
    0.1
}
fn default_grid_divisor() -> f64 {
    32.0
}
fn default_c1_start() -> f64 {
    4.0
}
fn default_c1_cap() -> f64 {
    (1u64 << 20) as f64
}
fn default_ratio_bound() -> f64 {
    1e3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifierConfig {
    /// Condition (ii) grid step is `min(grid_step_max, d_k / grid_divisor)`.
    #[serde(default = "default_grid_step_max")]
    pub grid_step_max: f64,
    #[serde(default = "default_grid_divisor")]
    pub grid_divisor: f64,
    #[serde(default = "default_c1_start")]
    pub c1_start: f64,
    #[serde(default = "default_c1_cap")]
    pub c1_cap: f64,
    /// Ratios above this are flagged.
    #[serde(default = "default_ratio_bound")]
    pub ratio_bound: f64,
}

impl Default for CertifierConfig {
    fn default() -> Self {
        Self {
            grid_step_max: default_grid_step_max(),
            grid_divisor: default_grid_divisor(),
            c1_start: default_c1_start(),
            c1_cap: default_c1_cap(),
            ratio_bound: default_ratio_bound(),
        }
    }
}

impl CertifierConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("certifier.{name} must be positive")))
            }
        };
        pos(self.grid_step_max, "grid_step_max")?;
        pos(self.grid_divisor, "grid_divisor")?;
        pos(self.c1_start, "c1_start")?;
        pos(self.ratio_bound, "ratio_bound")?;
        if !(self.c1_cap >= self.c1_start) {
            return Err(Error::Config(
                "certifier.c1_cap must be at least c1_start".into(),
            ));
        }
        Ok(())
    }
}

/// A row is flagged when a ratio exceeds this multiple of the median.
pub const OUTLIER_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionRow {
    pub k: i64,
    pub rho: f64,
    pub d: f64,
    pub g: f64,
    pub cond_i: f64,
    pub cond_ii: f64,
    pub grid_step: f64,
    pub min_abs_g: f64,
    pub argmin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub partial_sums: Vec<f64>,
    /// Least-squares slope of the partial sums against `k`.
    pub slope: f64,
    pub intercept: f64,
    /// Whether the family rule is known to give a divergent series;
    /// `None` when the family carries no rule.
    pub rule_divergent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    pub rows: Vec<ConditionRow>,
    pub sup_cond_i: f64,
    pub sup_cond_ii: f64,
    pub flagged: Vec<i64>,
    pub divergence: Divergence,
    pub standing: StandingSums,
}

fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    if s.is_empty() {
        return f64::INFINITY;
    }
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

fn linear_fit(y: &[f64], x0: f64) -> (f64, f64) {
    let n = y.len() as f64;
    if y.len() < 2 {
        return (0.0, y.first().copied().unwrap_or(0.0));
    }
    let xs: Vec<f64> = (0..y.len()).map(|i| x0 + i as f64).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn check_conditions(
    weights: &KernelWeights,
    family: &IntervalFamily,
    cfg: &CertifierConfig,
    rule_divergent: Option<bool>,
) -> Result<Conditions> {
    if let WeightSource::Model(_) = weights.source() {
        if let Some(n) = (weights.lo()..=weights.hi()).find(|&n| weights.w(n) == 0.0) {
            return Err(Error::WeightDegeneracy(format!(
                "G({n}) = 0: spectrum meets the integers"
            )));
        }
    }
    let mut rows = Vec::with_capacity(family.len());
    for (k, iv) in family.iter() {
        let g = weights.mass(iv.lo(), iv.hi());
        if !(g > 0.0) {
            return Err(Error::WeightDegeneracy(format!("g_{k} = 0")));
        }
        let (a, b) = iv.integers();
        let mut outside = CompensatedSum::new();
        for n in weights.lo()..=weights.hi() {
            if n >= a && n <= b {
                continue;
            }
            let w2 = weights.w2(n);
            if w2 != 0.0 {
                outside.add(w2 / (n as f64 - iv.rho).abs());
            }
        }
        let cond_i = iv.d / g * outside.value();

        let step = cfg.grid_step_max.min(iv.d / cfg.grid_divisor);
        let count = ((2.0 * iv.d) / step).ceil() as i64;
        let mut min_abs = f64::INFINITY;
        let mut argmin = iv.lo();
        for j in 0..=count {
            let x = if j == count {
                iv.hi()
            } else {
                iv.lo() + j as f64 * step
            };
            let v = weights.profile(x);
            if v == 0.0 && x == x.round() {
                return Err(Error::WeightDegeneracy(format!(
                    "G vanishes at the integer {x} (k = {k})"
                )));
            }
            if v < min_abs {
                min_abs = v;
                argmin = x;
            }
        }
        let level = (g / iv.d).sqrt();
        let cond_ii = if min_abs > 0.0 {
            level / min_abs
        } else {
            f64::INFINITY
        };
        rows.push(ConditionRow {
            k,
            rho: iv.rho,
            d: iv.d,
            g,
            cond_i,
            cond_ii,
            grid_step: step,
            min_abs_g: min_abs,
            argmin,
        });
    }
    let ci: Vec<f64> = rows.iter().map(|r| r.cond_i).collect();
    let cii: Vec<f64> = rows.iter().map(|r| r.cond_ii).collect();
    let (mi, mii) = (median(&ci), median(&cii));
    let flagged = rows
        .iter()
        .filter(|r| {
            !r.cond_i.is_finite()
                || !r.cond_ii.is_finite()
                || r.cond_i > cfg.ratio_bound
                || r.cond_ii > cfg.ratio_bound
                || (mi > 0.0 && r.cond_i > OUTLIER_FACTOR * mi)
                || (mii > 0.0 && r.cond_ii > OUTLIER_FACTOR * mii)
        })
        .map(|r| r.k)
        .collect();
    let partial_sums = family.log_length_partial_sums();
    let (slope, intercept) = linear_fit(&partial_sums, family.k_offset() as f64);
    Ok(Conditions {
        sup_cond_i: ci.iter().copied().fold(0.0, f64::max),
        sup_cond_ii: cii.iter().copied().fold(0.0, f64::max),
        rows,
        flagged,
        divergence: Divergence {
            partial_sums,
            slope,
            intercept,
            rule_divergent,
        },
        standing: weights.standing_sums(),
    })
}

/// The set `N_k` with the constant that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NkSet {
    pub k: i64,
    pub c1: f64,
    pub bound: f64,
    pub members: Vec<i64>,
    pub candidates: usize,
    pub required: f64,
    /// `sum_{n in J_k} ||K_{n+1/2}||^2 / g_k`.
    pub aggregate_ratio: f64,
}

/// `N_k = {n in J_k : ||K_{n+1/2}||^2 <= C1 g_k/d_k, |M(n+1/2)| <= C1 g_k/d_k}`,
/// doubling `C1` from its starting value until `|N_k| >= d_k / 2`.
pub fn select_nk(
    weights: &KernelWeights,
    family: &IntervalFamily,
    cfg: &CertifierConfig,
) -> Result<Vec<NkSet>> {
    let mut out = Vec::with_capacity(family.len());
    for (k, iv) in family.iter() {
        let g = weights.mass(iv.lo(), iv.hi());
        if !(g > 0.0) {
            return Err(Error::WeightDegeneracy(format!("g_{k} = 0")));
        }
        let (jl, jh) = (iv.rho - 0.5 * iv.d, iv.rho + 0.5 * iv.d);
        let cands: Vec<(i64, f64, f64)> = ((jl.ceil() as i64).max(0)..=(jh.floor() as i64))
            .map(|n| {
                let x = n as f64 + 0.5;
                Ok((n, kernel_norm_sq(weights, x)?, m_eval(weights, x)?.abs()))
            })
            .collect::<Result<_>>()?;
        let aggregate: f64 = cands.iter().map(|c| c.1).sum();
        let required = 0.5 * iv.d;
        let level = g / iv.d;
        let mut c1 = cfg.c1_start;
        loop {
            let bound = c1 * level;
            let members: Vec<i64> = cands
                .iter()
                .filter(|c| c.1 <= bound && c.2 <= bound)
                .map(|c| c.0)
                .collect();
            if members.len() as f64 >= required {
                out.push(NkSet {
                    k,
                    c1,
                    bound,
                    members,
                    candidates: cands.len(),
                    required,
                    aggregate_ratio: aggregate / g,
                });
                break;
            }
            c1 *= 2.0;
            if c1 > cfg.c1_cap {
                return Err(Error::Certificate(format!(
                    "k = {k}: |N_k| = {} < d_k/2 = {required} even at C1 = {}",
                    members.len(),
                    cfg.c1_cap
                )));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsFloor {
    pub k: i64,
    pub eps: f64,
    pub n: i64,
}

/// `min_{n in N_k} dist(t_n, {n, n + 1})` per `k`.
pub fn epsilon_separation(table: &MRootTable, nk: &[NkSet]) -> Result<Vec<EpsFloor>> {
    nk.iter()
        .map(|set| {
            let mut best = EpsFloor {
                k: set.k,
                eps: f64::INFINITY,
                n: 0,
            };
            for &n in &set.members {
                let r = table.get(set.k, n).ok_or_else(|| {
                    Error::Precondition(format!("no root recorded for n = {n} (k = {})", set.k))
                })?;
                if r.eps < best.eps {
                    best = EpsFloor {
                        k: set.k,
                        eps: r.eps,
                        n,
                    };
                }
            }
            Ok(best)
        })
        .collect()
}

pub const CONDITION_CSV_HEADER: &str = "k,cond_i,cond_ii,C1,Nk_size";
