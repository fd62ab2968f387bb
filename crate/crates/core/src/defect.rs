//! Sampled witness for the incompleteness of the mixed system built by
//! the breaker.
//!
//! With `f = G m` and `g` the vector with samples `(-1)^n b_n`, `f` is
//! orthogonal to every `K_lambda` with `G(lambda) = 0` and `lambda` not a
//! selected `t_k`. If `P` projects onto the span of those kernels then
//! `<f, g> = <f, g - P g> + <P f, P g>`, hence
//!
//! `||g - P g|| / ||g|| >= (|<f, g>| - ||P f|| ||g||) / (||f|| ||g||)`,
//!
//! and `g - P g` is the candidate annihilator of the whole mixed system.

use serde::Serialize;

use crate::breaker::BreakerRun;
use crate::error::{Error, Result};
use crate::genfun::{GenFnModel, SCAN_STEP};
use crate::pw::{
    gram_defect, pairing, sample_biorth, sample_kernel, span_basis, DefectReport, SampledPWVector,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedDefect {
    pub window: i64,
    pub kernel_points: usize,
    pub biorth_points: Vec<f64>,
    pub f_norm: f64,
    pub g_norm: f64,
    pub pairing: f64,
    /// `||P f|| ||g||`.
    pub budget: f64,
    pub lower_bound: f64,
    /// `||g - P g|| / ||g||` against the kernels alone.
    pub residual: f64,
    /// Largest `|<g - P g, G_t>| / (||g - P g|| ||G_t||)` over the `t_k`.
    pub annihilator_biorth: f64,
    /// The full mixed system with candidate `g`.
    pub mixed: DefectReport,
}

fn sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Zeros of `G` within `radius` of the origin and of each center, minus
/// the points in `exclude`.
pub fn kernel_points_near(
    model: &GenFnModel,
    centers: &[f64],
    exclude: &[f64],
    radius: f64,
) -> Result<Vec<f64>> {
    let mut windows: Vec<(f64, f64)> = std::iter::once(0.0)
        .chain(centers.iter().copied())
        .map(|c| (c - radius, c + radius))
        .collect();
    windows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for w in windows {
        match merged.last_mut() {
            Some(last) if w.0 <= last.1 => last.1 = last.1.max(w.1),
            _ => merged.push(w),
        }
    }
    let mut out = Vec::new();
    for (lo, hi) in merged {
        let zeros = model.zeros(lo, hi, SCAN_STEP)?;
        for z in &zeros.zeros {
            if exclude
                .iter()
                .all(|t| (z.x - t).abs() > 1e-9 * t.abs().max(1.0))
            {
                out.push(z.x);
            }
        }
    }
    Ok(out)
}

pub fn kernel_points(model: &GenFnModel, run: &BreakerRun, radius: f64) -> Result<Vec<f64>> {
    kernel_points_near(model, &run.rho, &run.t, radius)
}

/// Gram data of the mixed system with kernels at the zeros near the
/// centers and biorthogonal vectors at `biorth`, which must be zeros of `G`.
pub fn partition_defect(
    model: &GenFnModel,
    centers: &[f64],
    biorth: &[f64],
    window: i64,
    radius: f64,
) -> Result<DefectReport> {
    let points = kernel_points_near(model, centers, biorth, radius)?;
    let mut cols: Vec<SampledPWVector> = points
        .iter()
        .map(|&x| sample_kernel(x, window))
        .collect::<Result<_>>()?;
    for &t in biorth {
        cols.push(sample_biorth(model, t, window)?);
    }
    gram_defect(&cols, None)
}

pub fn breaker_defect(
    model: &GenFnModel,
    run: &BreakerRun,
    window: i64,
    radius: f64,
) -> Result<MixedDefect> {
    let w = run.report.window;
    if window > w {
        return Err(Error::Precondition(format!(
            "defect window {window} exceeds the breaker window {w}"
        )));
    }
    let f = SampledPWVector::from_fn(window, |n| sign(n) * run.a[(n + w) as usize])?;
    let mut gs = vec![0.0; (2 * window + 1) as usize];
    for (i, &n) in run.support.n.iter().enumerate() {
        if n.abs() <= window {
            gs[(n + window) as usize] = sign(n) * run.support.b[i];
        }
    }
    let g = SampledPWVector::new(window, gs)?;
    let points = kernel_points(model, run, radius)?;
    let kernels: Vec<SampledPWVector> = points
        .iter()
        .map(|&x| sample_kernel(x, window))
        .collect::<Result<_>>()?;
    let biorth: Vec<SampledPWVector> = run
        .t
        .iter()
        .map(|&t| sample_biorth(model, t, window))
        .collect::<Result<_>>()?;

    let span = span_basis(&kernels)?;
    let (f_norm, g_norm) = (f.norm(), g.norm());
    let pf = span
        .basis
        .tr_mul(&nalgebra::DVector::from_column_slice(f.samples()))
        .norm();
    let h = span.residual(&g)?;
    let h_norm = h.norm();
    let fg = pairing(&f, &g)?;
    let budget = pf * g_norm;
    let annihilator_biorth = biorth
        .iter()
        .map(|v| {
            let ip: f64 = h.iter().zip(v.samples()).map(|(a, b)| a * b).sum();
            ip.abs() / (h_norm * v.norm())
        })
        .fold(0.0, f64::max);

    let mut mixed_cols = kernels;
    mixed_cols.extend(biorth);
    let mixed = gram_defect(&mixed_cols, Some(&g))?;
    Ok(MixedDefect {
        window,
        kernel_points: points.len(),
        biorth_points: run.t.clone(),
        f_norm,
        g_norm,
        pairing: fg,
        budget,
        lower_bound: (fg.abs() - budget) / (f_norm * g_norm),
        residual: h_norm / g_norm,
        annihilator_biorth,
        mixed,
    })
}
