//! Empirical checks of the standing conditions (a)-(d) and of the
//! summability conditions (i)-(iv) on a finite family.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::BreakerConfig;
use crate::error::{Error, Result};
use crate::genfun::{find_zeros, sum_sq, GenFn};
use crate::spectra::{
    density_gap, dist_to_integers, side_intervals_scaled, CheckResult, SideIntervalData,
};
use crate::summation::tail_ratio;

/// Largest admissible ratio of consecutive tail terms for a series to count
/// as convergent on the stored range.
pub const TAIL_RATIO_MAX: f64 = 0.99;
/// Half-width of the zero window around the origin.
pub const ORIGIN_WINDOW: f64 = 256.0;
/// Zero-scan probes are at most this long.
pub const PROBE: f64 = 256.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub k_range: Option<(i64, i64)>,
    pub window: i64,
    pub g: Vec<f64>,
    pub sides: SideIntervalData,
    pub degenerate: Vec<i64>,
    pub terms_i: Vec<f64>,
    pub partial_i: Vec<f64>,
    pub outside_total: f64,
    pub terms_ii: Vec<f64>,
    pub partial_ii: Vec<f64>,
    pub s_over_rho: Vec<f64>,
    pub terms_iv: Vec<f64>,
    pub partial_iv: Vec<f64>,
    pub zero_count: usize,
    pub zero_dist_to_integers: f64,
    pub zero_max_gap: f64,
    pub imaginary_decay: Vec<(f64, f64)>,
    pub checks: Vec<CheckResult>,
}

impl HypothesisReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub(crate) fn int_range(a: f64, b: f64) -> (i64, i64) {
    (a.ceil() as i64, b.floor() as i64)
}

fn partial(terms: &[f64]) -> Vec<f64> {
    let mut acc = crate::summation::CompensatedSum::new();
    terms
        .iter()
        .map(|&t| {
            acc.add(t);
            acc.value()
        })
        .collect()
}

fn series_check(name: &str, terms: &[f64], what: &str) -> CheckResult {
    let r = tail_ratio(terms);
    let finite = terms.iter().all(|t| t.is_finite());
    let passed = finite && r.map_or(true, |r| r <= TAIL_RATIO_MAX);
    CheckResult {
        name: name.into(),
        passed,
        detail: match r {
            Some(r) => format!("{what}: tail ratio {r:.4} (limit {TAIL_RATIO_MAX})"),
            None => format!("{what}: fewer than two terms"),
        },
        failing_k: vec![],
    }
}

fn plain(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        detail,
        failing_k: vec![],
    }
}

fn unit<T>(_: T) -> f64 {
    1.0
}

/// Mass `sum_{n in I_k} G(n)^2` per interval of the family.
pub fn masses<G: GenFn + ?Sized>(g: &G, cfg: &BreakerConfig) -> Vec<f64> {
    cfg.family
        .iter()
        .map(|(_, e)| {
            let (a, b) = e.integers();
            sum_sq(g, a, b, &unit, &[])
        })
        .collect()
}

/// Sum of `G(n)^2` over `J_k^- ∪ J_k^+` (integers only).
pub(crate) fn side_mass<G: GenFn + ?Sized>(g: &G, j_minus: (f64, f64), j_plus: (f64, f64)) -> f64 {
    let (a, b) = int_range(j_minus.0, j_minus.1);
    let (c, d) = int_range(j_plus.0, j_plus.1);
    sum_sq(g, a, b, &unit, &[]) + sum_sq(g, c, d, &unit, &[])
}

/// Zero-scan regions: a window around the origin and the concentric halves
/// of every side interval, cut into probes no longer than [`PROBE`].
fn zero_regions(sides: &SideIntervalData, window: f64) -> Vec<(f64, f64)> {
    let w = ORIGIN_WINDOW.min(window);
    let mut out = vec![(-w, w)];
    for e in &sides.entries {
        if e.degenerate || e.discard {
            continue;
        }
        for plus in [false, true] {
            let (a, b) = e.half_side(plus);
            if b - a <= PROBE {
                out.push((a, b));
            } else {
                let mid = 0.5 * (a + b);
                out.push((a, a + PROBE));
                out.push((mid - PROBE / 2.0, mid + PROBE / 2.0));
                out.push((b - PROBE, b));
            }
        }
    }
    out
}

pub fn check_hypotheses<G: GenFn + ?Sized>(g: &G, cfg: &BreakerConfig) -> Result<HypothesisReport> {
    let fam = &cfg.family;
    let n_win = cfg.window;
    let gk = masses(g, cfg);
    let sides = side_intervals_scaled(fam, &gk, cfg.s_rescale)?;
    for e in &sides.entries {
        let reach = e.rho + e.d + 4.0 * e.s;
        if reach > n_win as f64 {
            return Err(Error::Precondition(format!(
                "window {n_win} does not cover J_{} with margin 2 s (needs {reach:.0})",
                e.k
            )));
        }
    }
    let degenerate: Vec<i64> = sides
        .entries
        .iter()
        .filter(|e| e.degenerate)
        .map(|e| e.k)
        .collect();
    let ents: Vec<_> = fam.iter().map(|(k, e)| (k, *e)).collect();

    // (i): per-band mass outside the intervals.
    let mut terms_i = Vec::with_capacity(ents.len());
    for (idx, (_, e)) in ents.iter().enumerate() {
        let prev = if idx == 0 { 0.0 } else { ents[idx - 1].1.rho };
        let next = if idx + 1 < ents.len() {
            ents[idx + 1].1.rho
        } else {
            2.0 * e.rho
        };
        let lo = (0.5 * (prev + e.rho)).ceil() as i64;
        let hi = ((0.5 * (e.rho + next)).ceil() as i64 - 1).min(n_win);
        let (ia, ib) = e.integers();
        let mut t = sum_sq(g, lo, (ia - 1).min(hi), &unit, &[]);
        t += sum_sq(g, (ib + 1).max(lo), hi, &unit, &[]);
        t += sum_sq(g, -hi, -(lo.max(1)), &unit, &[]);
        terms_i.push(t);
    }
    let outside_total = {
        let mut edges = vec![];
        let mut prev = -n_win;
        for (_, e) in &ents {
            let (a, b) = e.integers();
            edges.push((prev, a - 1));
            prev = b + 1;
        }
        edges.push((prev, n_win));
        edges
            .iter()
            .map(|&(a, b)| sum_sq(g, a, b, &unit, &[]))
            .sum::<f64>()
    };

    // (ii)-(iv)
    let live: Vec<_> = sides.entries.iter().filter(|e| !e.degenerate).collect();
    let terms_ii: Vec<f64> = live
        .iter()
        .map(|e| e.s * side_mass(g, e.j_minus, e.j_plus))
        .collect();
    let s_over_rho: Vec<f64> = sides.entries.iter().map(|e| e.s / e.rho).collect();
    let bad_iii: Vec<i64> = live
        .iter()
        .filter(|e| e.violates_s_bound)
        .map(|e| e.k)
        .collect();
    let terms_iv: Vec<f64> = ents.iter().map(|(_, e)| e.d / e.rho).collect();

    // (a)-(d)
    let mut reals_ok =
        gk.iter().chain(&terms_i).all(|v| v.is_finite()) && outside_total.is_finite();
    for j in 0..16 {
        let x = -7.3 + 1.37 * j as f64;
        let z = g.eval_complex(Complex64::new(x, 0.0))?;
        reals_ok &= z.im.abs() <= 1e-12 * z.re.abs().max(1e-300) && z.re.is_finite();
    }
    let mut all_zeros = 0usize;
    let mut dist: f64 = f64::INFINITY;
    let mut gap: f64 = 0.0;
    for (a, b) in zero_regions(&sides, n_win as f64) {
        let z = find_zeros(g, a, b, cfg.zero_step)?;
        let xs = z.xs();
        all_zeros += xs.len();
        dist = dist.min(dist_to_integers(&xs));
        gap = gap.max(density_gap(&xs, a, b));
    }
    let mut decay = Vec::new();
    for j in 1..=7 {
        let y = 2f64.powi(j);
        let v = g.eval_complex(Complex64::new(0.0, y))?.norm() * (-PI * y).exp();
        decay.push((y, v));
    }
    let decreasing = decay.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));

    let checks = vec![
        plain("a", reals_ok, "finite real values on the real axis".into()),
        plain(
            "b",
            dist > 0.0 && all_zeros > 0,
            format!("min dist(zero, Z) = {dist:.3e} over {all_zeros} zeros"),
        ),
        plain(
            "c",
            gap <= cfg.cell,
            format!("largest zero gap {gap:.4} against C = {}", cfg.cell),
        ),
        plain(
            "d",
            decreasing,
            format!(
                "|G(iy)| exp(-pi y) at y = 2..128: {:?}",
                decay.iter().map(|p| p.1).collect::<Vec<_>>()
            ),
        ),
        series_check("i", &terms_i, "outside mass per band"),
        series_check("ii", &terms_ii, "s_k * sum_{J_k} G^2"),
        CheckResult {
            name: "iii".into(),
            passed: bad_iii.is_empty(),
            detail: format!(
                "max s_k/rho_k = {:.4} (scale {})",
                s_over_rho.iter().cloned().fold(0.0, f64::max),
                cfg.s_rescale
            ),
            failing_k: bad_iii,
        },
        series_check("iv", &terms_iv, "d_k / rho_k"),
    ];
    Ok(HypothesisReport {
        k_range: fam.k_range(),
        window: n_win,
        g: gk,
        sides,
        degenerate,
        partial_i: partial(&terms_i),
        terms_i,
        outside_total,
        partial_ii: partial(&terms_ii),
        terms_ii,
        s_over_rho,
        partial_iv: partial(&terms_iv),
        terms_iv,
        zero_count: all_zeros,
        zero_dist_to_integers: dist,
        zero_max_gap: gap,
        imaginary_decay: decay,
        checks,
    })
}
