//! Checks for the hereditary-completeness side: conditions on `|G(n)|`
//! along a lacunary family, the auxiliary kernel space with
//! `||K_lambda||^2 = sum |G(n)|^2 / |lambda - n|^2`, the roots of
//! `M(t) = sum |G(n)|^2 / (n - t)`, the sets `N_k` and the separation of
//! the roots from the integers.

mod cauchy;
mod conditions;
mod mroots;
mod weights;

pub use cauchy::{
    cauchy_eval, cauchy_zeros, functional_identity_residual, CauchyZero, CauchyZeros,
    IdentityResidual, CAUCHY_TOL,
};
pub use conditions::{
    check_conditions, epsilon_separation, select_nk, CertifierConfig, ConditionRow, Conditions,
    Divergence, EpsFloor, NkSet, CONDITION_CSV_HEADER, OUTLIER_FACTOR,
};
pub use mroots::{
    kernel_coefficients, kernel_inner, kernel_inner_via_m, kernel_norm_sq, kernel_norm_sq_local,
    m_eval, m_eval_local, m_root, m_roots, MRoot, MRootTable, ROOT_CSV_HEADER,
};
pub use weights::{KernelWeights, StandingSums, WeightSource};

use serde::Serialize;

use crate::error::Result;
use crate::spectra::IntervalFamily;

/// Relative size allowed for `<K_{t_n}, K_{t_m}>` between distinct roots.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertRow {
    pub k: i64,
    pub rho: f64,
    pub d: f64,
    pub g: f64,
    pub cond_i: f64,
    pub cond_ii: f64,
    pub grid_step: f64,
    pub c1: f64,
    pub nk_size: usize,
    pub nk_required: f64,
    pub aggregate_ratio: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub source: &'static str,
    pub window: (i64, i64),
    pub k_range: Option<(i64, i64)>,
    pub rows: Vec<CertRow>,
    pub sup_cond_i: f64,
    pub sup_cond_ii: f64,
    pub ratio_bound: f64,
    pub flagged: Vec<i64>,
    pub divergence: Divergence,
    pub standing: StandingSums,
    pub c1_max: f64,
    pub eps_floor: f64,
    pub roots_total: usize,
    pub roots_in_j: usize,
    pub orthogonality_max: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct CertifyRun {
    pub report: CertificateReport,
    pub table: MRootTable,
    pub nk: Vec<NkSet>,
}

/// Largest `|<K_a, K_b>| / (||K_a|| ||K_b||)` over distinct roots in the
/// table that lie in their `J_k`.
pub fn orthogonality_max(weights: &KernelWeights, table: &MRootTable) -> Result<f64> {
    let roots: Vec<&MRoot> = table.rows.iter().filter(|r| r.in_j).collect();
    let mut ms = Vec::with_capacity(roots.len());
    let mut norms = Vec::with_capacity(roots.len());
    for r in &roots {
        ms.push(m_eval_local(weights, r.n, r.u)?);
        norms.push(kernel_norm_sq_local(weights, r.n, r.u)?.sqrt());
    }
    let mut worst: f64 = 0.0;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let gap = (roots[j].n - roots[i].n) as f64 + (roots[j].u - roots[i].u);
            let inner = (ms[j] - ms[i]) / gap;
            worst = worst.max(inner.abs() / (norms[i] * norms[j]));
        }
    }
    Ok(worst)
}

pub fn certify(
    weights: &KernelWeights,
    family: &IntervalFamily,
    cfg: &CertifierConfig,
    rule_divergent: Option<bool>,
) -> Result<CertifyRun> {
    let cond = check_conditions(weights, family, cfg, rule_divergent)?;
    let table = m_roots(weights, family)?;
    let nk = select_nk(weights, family, cfg)?;
    let eps = epsilon_separation(&table, &nk)?;
    let ortho = orthogonality_max(weights, &table)?;
    let rows: Vec<CertRow> = cond
        .rows
        .iter()
        .zip(&nk)
        .zip(&eps)
        .map(|((c, s), e)| CertRow {
            k: c.k,
            rho: c.rho,
            d: c.d,
            g: c.g,
            cond_i: c.cond_i,
            cond_ii: c.cond_ii,
            grid_step: c.grid_step,
            c1: s.c1,
            nk_size: s.members.len(),
            nk_required: s.required,
            aggregate_ratio: s.aggregate_ratio,
            eps: e.eps,
        })
        .collect();
    let c1_max = nk.iter().map(|s| s.c1).fold(0.0, f64::max);
    let eps_floor = eps.iter().map(|e| e.eps).fold(f64::INFINITY, f64::min);
    let passed = cond.flagged.is_empty()
        && rule_divergent == Some(true)
        && ortho <= ORTHOGONALITY_TOL
        && eps_floor > 0.0;
    let report = CertificateReport {
        source: weights.source_name(),
        window: (weights.lo(), weights.hi()),
        k_range: family.k_range(),
        rows,
        sup_cond_i: cond.sup_cond_i,
        sup_cond_ii: cond.sup_cond_ii,
        ratio_bound: cfg.ratio_bound,
        flagged: cond.flagged,
        divergence: cond.divergence,
        standing: cond.standing,
        c1_max,
        eps_floor,
        roots_total: table.rows.len(),
        roots_in_j: table.rows.iter().filter(|r| r.in_j).count(),
        orthogonality_max: ortho,
        passed,
    };
    Ok(CertifyRun { report, table, nk })
}

pub fn condition_csv_rows(report: &CertificateReport) -> Vec<String> {
    report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{:.16e},{:.16e},{:.16e},{}",
                r.k, r.cond_i, r.cond_ii, r.c1, r.nk_size
            )
        })
        .collect()
}

pub fn root_csv_rows(run: &CertifyRun) -> Vec<String> {
    run.table
        .rows
        .iter()
        .map(|r| {
            let member = run
                .nk
                .iter()
                .find(|s| s.k == r.k)
                .map_or(false, |s| s.members.contains(&r.n));
            format!("{},{:.16e},{:.16e},{}", r.n, r.t, r.eps, member)
        })
        .collect()
}
