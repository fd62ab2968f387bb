//! Choice of the zeros `t_k` that `m` moves back to `rho_k`.

use rayon::prelude::*;
use serde::Serialize;

use super::hypotheses::int_range;
use crate::error::{Error, Result};
use crate::genfun::{find_zeros, par_sum, GenFn};
use crate::spectra::SideInterval;

/// Running products `prod t_k / rho_k` must stay inside this range.
pub const PRODUCT_RANGE: (f64, f64) = (1e-3, 1e3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Side {
    pub fn symbol(self) -> &'static str {
        match self {
            Side::Minus => "-",
            Side::Plus => "+",
        }
    }
}

/// Best zero on one side: location, cost and number of candidates seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub t: f64,
    pub cost: f64,
    pub candidates: usize,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub k: i64,
    pub rho: f64,
    pub minus: Candidate,
    pub plus: Candidate,
    pub side: Side,
    pub t: f64,
    pub running_product: f64,
}

/// `sum_{n in J_k} s^2 G(n)^2 / (n - lambda)^2`.
pub fn cost(samples: &[(i64, f64)], s: f64, lambda: f64) -> f64 {
    let h = |i: i64| {
        let (n, v) = samples[i as usize];
        let r = v * s / (n as f64 - lambda);
        r * r
    };
    par_sum(&h, 0, samples.len() as i64 - 1)
}

fn side_samples<G: GenFn + ?Sized>(g: &G, e: &SideInterval) -> Vec<(i64, f64)> {
    let (a, b) = int_range(e.j_minus.0, e.j_minus.1);
    let (c, d) = int_range(e.j_plus.0, e.j_plus.1);
    (a..=b)
        .chain(c..=d)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| (n, g.eval(n as f64)))
        .collect()
}

/// Minimizes the cost over all zeros in the concentric half of `J_k^pm`,
/// after checking that every full cell of length `cell` holds a zero.
pub fn best_on_side<G: GenFn + ?Sized>(
    g: &G,
    e: &SideInterval,
    plus: bool,
    cell: f64,
    step: f64,
    samples: &[(i64, f64)],
) -> Result<Candidate> {
    let (a, b) = e.half_side(plus);
    let zeros = find_zeros(g, a, b, step)?;
    let xs = zeros.xs();
    let full = ((b - a) / cell).floor() as usize;
    for j in 0..full {
        let lo = a + j as f64 * cell;
        let hi = lo + cell;
        if !xs.iter().any(|&x| x >= lo && x <= hi) {
            return Err(Error::Structural(format!(
                "k = {}: no zero of G in the cell [{lo}, {hi}] of the {} side",
                e.k,
                if plus { "+" } else { "-" }
            )));
        }
    }
    if xs.is_empty() {
        return Err(Error::Structural(format!(
            "k = {}: no zero in [{a}, {b}]",
            e.k
        )));
    }
    let costs: Vec<f64> = xs.par_iter().map(|&x| cost(samples, e.s, x)).collect();
    let mut best = 0;
    for i in 1..xs.len() {
        if costs[i] < costs[best] {
            best = i;
        }
    }
    Ok(Candidate {
        t: xs[best],
        cost: costs[best],
        candidates: xs.len(),
        cells: full,
    })
}

/// Picks a side per `k` so that the running product of `t_k / rho_k`
/// stays in [`PRODUCT_RANGE`], preferring the product nearer 1 (log scale)
/// and `+` on ties.
pub fn choose_sides(per_k: &[(i64, f64, Candidate, Candidate)]) -> Result<Vec<Selection>> {
    let inside = |p: f64| p >= PRODUCT_RANGE.0 && p <= PRODUCT_RANGE.1;
    let mut run = 1.0f64;
    let mut out = Vec::with_capacity(per_k.len());
    for &(k, rho, minus, plus) in per_k {
        let pm = run * minus.t / rho;
        let pp = run * plus.t / rho;
        let side = match (inside(pm), inside(pp)) {
            (true, true) => {
                if pm.ln().abs() < pp.ln().abs() {
                    Side::Minus
                } else {
                    Side::Plus
                }
            }
            (true, false) => Side::Minus,
            (false, true) => Side::Plus,
            (false, false) => {
                return Err(Error::Contract(format!(
                    "k = {k}: both running products {pm:e}, {pp:e} leave [0.001, 1000]"
                )))
            }
        };
        let (t, p) = match side {
            Side::Minus => (minus.t, pm),
            Side::Plus => (plus.t, pp),
        };
        run = p;
        out.push(Selection {
            k,
            rho,
            minus,
            plus,
            side,
            t,
            running_product: p,
        });
    }
    Ok(out)
}

pub fn select_tk<G: GenFn + ?Sized>(
    g: &G,
    sides: &[SideInterval],
    cell: f64,
    step: f64,
) -> Result<Vec<Selection>> {
    let mut per_k = Vec::with_capacity(sides.len());
    for e in sides {
        let samples = side_samples(g, e);
        let minus = best_on_side(g, e, false, cell, step, &samples)?;
        let plus = best_on_side(g, e, true, cell, step, &samples)?;
        per_k.push((e.k, e.rho, minus, plus));
    }
    choose_sides(&per_k)
}
