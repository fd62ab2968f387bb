//! Construction of a mixed system that is not complete: zeros `t_k` are
//! moved to `rho_k` by `m`, `f = G m`, and coefficients `c_k` are found
//! by a contracting fixed-point map so that `S(rho_k) = 0`.

pub mod fixed_point;
pub mod hypotheses;
pub mod select;
pub mod verify;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::{samples_on_integers, GenFn, SCAN_STEP};
use crate::spectra::{IntervalFamily, SideInterval};
use crate::summation::CompensatedSum;

pub use fixed_point::{CrossSystem, FixedPoint, Step};
pub use hypotheses::{check_hypotheses, HypothesisReport};
pub use select::{choose_sides, select_tk, Candidate, Selection, Side};
pub use verify::{Budgeted, SpotCheck, Support};

/// Number of off-grid points for the identity spot check.
pub const SPOT_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct BreakerConfig {
    pub family: IntervalFamily,
    /// All integer sums run over `[-window, window]`.
    pub window: i64,
    pub eta: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Cell length `C` for zero selection and the local density check.
    pub cell: f64,
    pub s_rescale: f64,
    pub zero_step: f64,
}

impl BreakerConfig {
    pub fn new(family: IntervalFamily, window: i64) -> Self {
        Self {
            family,
            window,
            eta: 0.01,
            fp_tol: 1e-12,
            fp_max_iter: 200,
            cell: 4.0,
            s_rescale: 1.0,
            zero_step: SCAN_STEP,
        }
    }
}

/// `m(z) = prod_k (1 - z/rho_k) / (1 - z/t_k)`.
pub fn eval_m(z: f64, rho: &[f64], t: &[f64]) -> Result<f64> {
    if let Some(tk) = t.iter().find(|&&tk| tk == z) {
        return Err(Error::Pole(format!("m has a pole at t = {tk}")));
    }
    Ok(verify::eval_m_unchecked(z, rho, t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakerRow {
    pub k: i64,
    pub rho: f64,
    pub d: f64,
    pub g: f64,
    pub s: f64,
    pub t: f64,
    pub side: Side,
    pub running_product: f64,
    pub c: f64,
    pub s_residual: f64,
    pub orth_residual: f64,
    pub orth_budget: f64,
    /// `sum_{I_k} f(n)^2` and its ratio to `d_k / rho_k`.
    pub f_inside: f64,
    pub f_inside_ratio: f64,
    /// `sum_{J_k} f(n)^2` and `s_k sum_{J_k} G(n)^2`.
    pub f_sides: f64,
    pub side_bound: f64,
    /// `D_k d_k rho_k`.
    pub denom_scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakerReport {
    pub input_k_range: Option<(i64, i64)>,
    pub window: i64,
    pub s_rescale: f64,
    pub degenerate: Vec<i64>,
    pub discarded: Vec<i64>,
    pub dropped_prefix: Vec<i64>,
    pub dropped_for_contraction: Vec<i64>,
    pub tail_log_length: f64,
    pub lin_norm: f64,
    pub rows: Vec<BreakerRow>,
    pub fixed_point: FixedPoint,
    pub banach_norm: f64,
    pub max_s_residual: f64,
    pub s_target: f64,
    pub pairing: f64,
    pub pairing_cert_linear: f64,
    pub pairing_cert_squared: f64,
    pub pairing_constant_a: f64,
    pub orth_within_budget: bool,
    pub spot_checks: Vec<SpotCheck>,
    pub spot_within_budget: bool,
    pub max_spot_rel: f64,
    pub f_l2_inside: f64,
    pub f_l2_sides: f64,
    pub f_l2_remainder: f64,
    pub b_l2: f64,
    pub b_bound_constant: f64,
    pub rain_band: (f64, f64),
    pub denom_band: (f64, f64),
}

/// Everything a finished run produced, including the raw sequences.
#[derive(Debug, Clone)]
pub struct BreakerRun {
    pub hypotheses: HypothesisReport,
    pub report: BreakerReport,
    pub support: Support,
    pub rho: Vec<f64>,
    pub d: Vec<f64>,
    pub t: Vec<f64>,
    /// `a_n` on `[-window, window]`.
    pub a: Vec<f64>,
}

fn sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    }
}

struct Built {
    a: Vec<f64>,
    system: CrossSystem,
}

fn build(gs: &[f64], window: i64, work: &[SideInterval], t: &[f64]) -> Result<Built> {
    let rho: Vec<f64> = work.iter().map(|e| e.rho).collect();
    let d: Vec<f64> = work.iter().map(|e| e.d).collect();
    let a: Vec<f64> = (-window..=window)
        .map(|n| sign(n) * gs[(n + window) as usize] * verify::eval_m_unchecked(n as f64, &rho, t))
        .collect();
    if a[window as usize] == 0.0 {
        return Err(Error::Pivot);
    }
    let ranges: Vec<(i64, i64)> = work
        .iter()
        .map(|e| hypotheses::int_range(e.rho - e.d, e.rho + e.d))
        .collect();
    let system = CrossSystem::from_samples(&rho, &d, &ranges, &|n| a[(n + window) as usize])
        .map_err(|e| match e {
            Error::DegenerateInterval { k } => Error::DegenerateInterval {
                k: work[k as usize].k,
            },
            other => other,
        })?;
    Ok(Built { a, system })
}

/// Hypotheses, zero selection, construction of `f`, the fixed point and
/// all residual checks.
pub fn run_breaker<G: GenFn + ?Sized>(g: &G, cfg: &BreakerConfig) -> Result<BreakerRun> {
    if !(cfg.eta > 0.0 && cfg.eta < 1.0) {
        return Err(Error::Domain("eta must lie in (0, 1)".into()));
    }
    let hyp = check_hypotheses(g, cfg)?;
    let window = cfg.window;
    let discarded: Vec<i64> = hyp
        .sides
        .entries
        .iter()
        .filter(|e| e.discard && !e.degenerate)
        .map(|e| e.k)
        .collect();
    let mut work: Vec<SideInterval> = hyp
        .sides
        .entries
        .iter()
        .filter(|e| !e.discard && !e.degenerate)
        .cloned()
        .collect();
    let mut tail: f64 = work.iter().map(|e| e.d / e.rho).sum();
    let mut dropped_prefix = Vec::new();
    while !work.is_empty() && tail >= cfg.eta {
        let e = work.remove(0);
        tail -= e.d / e.rho;
        dropped_prefix.push(e.k);
    }
    if work.is_empty() {
        return Err(Error::Precondition(
            "no interval left after dropping the prefix".into(),
        ));
    }
    let selections = select_tk(g, &work, cfg.cell, cfg.zero_step)?;
    let mut per_k: Vec<(i64, f64, Candidate, Candidate)> = selections
        .iter()
        .map(|s| (s.k, s.rho, s.minus, s.plus))
        .collect();

    let gs = samples_on_integers(g, -window, window, None)?.values;
    let mut dropped_for_contraction = Vec::new();
    let (sel, mut built) = loop {
        let sel = choose_sides(&per_k)?;
        let t: Vec<f64> = sel.iter().map(|s| s.t).collect();
        let built = build(&gs, window, &work, &t)?;
        if built.system.lin_norm() < 0.5 || work.len() == 1 {
            break (sel, built);
        }
        dropped_for_contraction.push(work.remove(0).k);
        per_k.remove(0);
    };
    let fp = built.system.solve(cfg.fp_tol, cfg.fp_max_iter)?;
    let lin_norm = built.system.lin_norm();
    tail = work.iter().map(|e| e.d / e.rho).sum();

    let rho: Vec<f64> = work.iter().map(|e| e.rho).collect();
    let d: Vec<f64> = work.iter().map(|e| e.d).collect();
    let t: Vec<f64> = sel.iter().map(|s| s.t).collect();
    let a = std::mem::take(&mut built.a);
    let at = |n: i64| a[(n + window) as usize];

    // b and its support
    let mut sup = Support {
        n: vec![0],
        a: vec![at(0)],
        b: vec![1.0 / at(0)],
        g: vec![gs[window as usize]],
    };
    for (idx, e) in work.iter().enumerate() {
        let (lo, hi) = hypotheses::int_range(e.rho - e.d, e.rho + e.d);
        for n in lo..=hi {
            sup.n.push(n);
            sup.a.push(at(n));
            sup.b.push(fp.c[idx] * at(n) / (e.rho - n as f64));
            sup.g.push(gs[(n + window) as usize]);
        }
    }

    let s_res: Vec<f64> = rho.iter().map(|&r| sup.s_at(r).0.abs()).collect();
    let orth = verify::orthogonality(&sup, &rho, &t);
    let spots = verify::spot_checks(&sup, &rho, &t, &verify::spot_points(&rho, &d, SPOT_POINTS));
    let pairing = sup.pairing();
    let norm = fp.norm;
    let weighted: f64 = work
        .iter()
        .map(|e| {
            let (lo, hi) = hypotheses::int_range(e.rho - e.d, e.rho + e.d);
            e.d * (lo..=hi)
                .map(|n| at(n) * at(n) / (e.rho - n as f64).abs())
                .sum::<f64>()
        })
        .sum();

    // l2 split of f
    let f2 = |n: i64| at(n) * at(n);
    let mut rows = Vec::with_capacity(work.len());
    let mut inside_total = 0.0;
    let mut sides_total = 0.0;
    let mut denom_band = (f64::INFINITY, 0.0f64);
    for (idx, e) in work.iter().enumerate() {
        let (lo, hi) = hypotheses::int_range(e.rho - e.d, e.rho + e.d);
        let inside: f64 = (lo..=hi).map(f2).collect::<CompensatedSum>().value();
        let (a1, b1) = hypotheses::int_range(e.j_minus.0, e.j_minus.1);
        let (a2, b2) = hypotheses::int_range(e.j_plus.0, e.j_plus.1);
        let sides: f64 = (a1..=b1)
            .chain(a2..=b2)
            .map(f2)
            .collect::<CompensatedSum>()
            .value();
        let gside: f64 = (a1..=b1)
            .chain(a2..=b2)
            .map(|n| gs[(n + window) as usize].powi(2))
            .collect::<CompensatedSum>()
            .value();
        inside_total += inside;
        sides_total += sides;
        let denom = built.system.diag[idx] * e.d * e.rho;
        denom_band = (denom_band.0.min(denom), denom_band.1.max(denom));
        rows.push(BreakerRow {
            k: e.k,
            rho: e.rho,
            d: e.d,
            g: e.g,
            s: e.s,
            t: t[idx],
            side: sel[idx].side,
            running_product: sel[idx].running_product,
            c: fp.c[idx],
            s_residual: s_res[idx],
            orth_residual: orth[idx].residual,
            orth_budget: orth[idx].budget,
            f_inside: inside,
            f_inside_ratio: inside / (e.d / e.rho),
            f_sides: sides,
            side_bound: e.s * gside,
            denom_scaled: denom,
        });
    }
    let total: f64 = a.iter().map(|v| v * v).collect::<CompensatedSum>().value();

    // two-sided comparison |m(n)| ~ |n - rho_k| / |n - t_k| on the bands
    let mut rain = (f64::INFINITY, 0.0f64);
    for n in -window..=window {
        let x = (n as f64).abs();
        let k = match rho.iter().position(|&r| x < 1.5 * r) {
            Some(k) => k,
            None => rho.len() - 1,
        };
        if k > 0 && x < 0.5 * (rho[k - 1] + rho[k]) {
            continue;
        }
        let num = (n as f64 - rho[k]).abs();
        if num == 0.0 {
            continue;
        }
        let m = verify::eval_m_unchecked(n as f64, &rho, &t).abs();
        let r = m * (n as f64 - t[k]).abs() / num;
        rain = (rain.0.min(r), rain.1.max(r));
    }

    let b_l2: f64 = sup.b.iter().map(|v| v * v).sum();
    let b0 = sup.b[0];
    let report = BreakerReport {
        input_k_range: cfg.family.k_range(),
        window,
        s_rescale: cfg.s_rescale,
        degenerate: hyp.degenerate.clone(),
        discarded,
        dropped_prefix,
        dropped_for_contraction,
        tail_log_length: tail,
        lin_norm,
        max_s_residual: s_res.iter().cloned().fold(0.0, f64::max),
        s_target: 1e-8 / rho[0],
        banach_norm: norm,
        pairing,
        pairing_cert_linear: 1.0 - norm * weighted,
        pairing_cert_squared: 1.0 - norm * norm * weighted,
        pairing_constant_a: weighted / tail,
        orth_within_budget: orth.iter().all(Budgeted::within),
        spot_within_budget: spots.iter().all(|s| s.diff <= s.budget),
        max_spot_rel: spots.iter().map(|s| s.rel).fold(0.0, f64::max),
        spot_checks: spots,
        f_l2_inside: inside_total,
        f_l2_sides: sides_total,
        f_l2_remainder: total - inside_total - sides_total,
        b_l2,
        b_bound_constant: if norm > 0.0 {
            (b_l2 - b0 * b0) / (norm * tail)
        } else {
            0.0
        },
        rain_band: rain,
        denom_band,
        fixed_point: fp,
        rows,
    };
    Ok(BreakerRun {
        hypotheses: hyp,
        report,
        support: sup,
        rho,
        d,
        t,
        a,
    })
}

pub const CSV_HEADER: &str = "k,rho,d,g,s,t,side,c,S_residual,orth_residual";

pub fn csv_rows(report: &BreakerReport) -> Vec<String> {
    report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
                r.k,
                r.rho,
                r.d,
                r.g,
                r.s,
                r.t,
                r.side.symbol(),
                r.c,
                r.s_residual,
                r.orth_residual
            )
        })
        .collect()
}
