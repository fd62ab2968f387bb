//! Lacunary interval families and real spectra.
//!
//! An [`IntervalFamily`] is a finite truncation of a sequence of intervals
//! `I_k = [rho_k - d_k, rho_k + d_k]`; every statement about "all k" is
//! checked on the stored range only, and that range travels with every
//! report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One interval `[rho - d, rho + d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub rho: f64,
    pub d: f64,
}

impl Interval {
    pub fn lo(&self) -> f64 {
        self.rho - self.d
    }

    pub fn hi(&self) -> f64 {
        self.rho + self.d
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    /// Integers inside the interval as an inclusive range (may be empty,
    /// in which case `first > last`).
    pub fn integers(&self) -> (i64, i64) {
        (self.lo().ceil() as i64, self.hi().floor() as i64)
    }

    pub fn log_ratio(&self) -> f64 {
        self.d / self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalFamily {
    entries: Vec<Interval>,
    k_offset: i64,
}

impl IntervalFamily {
    /// Builds a family; rejects non-finite data and degenerate intervals
    /// (`d <= 0` or `rho <= 0`). Structural conditions such as lacunarity
    /// are not enforced here, see [`validate_family`].
    pub fn new(entries: Vec<Interval>, k_offset: i64) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            let k = k_offset + i as i64;
            if !(e.rho.is_finite() && e.d.is_finite()) {
                return Err(Error::Domain(format!("interval k = {k} is not finite")));
            }
            if e.rho <= 0.0 {
                return Err(Error::Domain(format!(
                    "interval k = {k}: rho must be positive"
                )));
            }
            if e.d <= 0.0 {
                return Err(Error::Domain(format!(
                    "interval k = {k}: half-length must be positive"
                )));
            }
        }
        Ok(Self { entries, k_offset })
    }

    pub fn from_arrays(rho: &[f64], d: &[f64], k_offset: i64) -> Result<Self> {
        if rho.len() != d.len() {
            return Err(Error::Domain(format!(
                "rho has {} entries but d has {}",
                rho.len(),
                d.len()
            )));
        }
        let entries = rho
            .iter()
            .zip(d)
            .map(|(&rho, &d)| Interval { rho, d })
            .collect();
        Self::new(entries, k_offset)
    }

    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
            k_offset: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn k_offset(&self) -> i64 {
        self.k_offset
    }

    /// Inclusive index range `(first, last)`, `None` for an empty family.
    pub fn k_range(&self) -> Option<(i64, i64)> {
        if self.entries.is_empty() {
            None
        } else {
            Some((self.k_offset, self.k_offset + self.entries.len() as i64 - 1))
        }
    }

    pub fn entries(&self) -> &[Interval] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Interval)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, e)| (self.k_offset + i as i64, e))
    }

    pub fn get(&self, k: i64) -> Result<&Interval> {
        let idx = k - self.k_offset;
        if idx < 0 || idx >= self.entries.len() as i64 {
            let (first, last) = self.k_range().unwrap_or((self.k_offset, self.k_offset - 1));
            return Err(Error::Range {
                index: k,
                first,
                last,
            });
        }
        Ok(&self.entries[idx as usize])
    }

    /// The `k` whose interval contains `x`, if any.
    pub fn locate(&self, x: f64) -> Option<i64> {
        self.iter().find(|(_, e)| e.contains(x)).map(|(k, _)| k)
    }

    /// Partial logarithmic length `sum_{k <= k_max} d_k / rho_k`.
    pub fn log_length(&self, k_max: i64) -> Result<f64> {
        if self.entries.is_empty() {
            return Ok(0.0);
        }
        self.get(k_max)?;
        Ok(crate::summation::compensated(
            self.iter()
                .take_while(|(k, _)| *k <= k_max)
                .map(|(_, e)| e.log_ratio()),
        ))
    }

    pub fn log_length_total(&self) -> f64 {
        crate::summation::compensated(self.entries.iter().map(Interval::log_ratio))
    }

    /// Partial sums of the logarithmic length, one per stored `k`.
    pub fn log_length_partial_sums(&self) -> Vec<f64> {
        let mut acc = crate::summation::CompensatedSum::new();
        self.entries
            .iter()
            .map(|e| {
                acc.add(e.log_ratio());
                acc.value()
            })
            .collect()
    }

    /// Removes the shortest prefix such that the remaining tail has
    /// `sum d_k / rho_k < eta`.
    pub fn drop_prefix(&self, eta: f64) -> Self {
        let mut tail = self.log_length_total();
        let mut skip = 0;
        while skip < self.entries.len() && tail >= eta {
            tail -= self.entries[skip].log_ratio();
            skip += 1;
        }
        Self {
            entries: self.entries[skip..].to_vec(),
            k_offset: self.k_offset + skip as i64,
        }
    }

    /// Family restricted to the given indices (kept in order).
    pub fn retain_ks(&self, keep: &[i64]) -> Self {
        let mut entries = Vec::new();
        let mut first = None;
        for (k, e) in self.iter() {
            if keep.contains(&k) {
                first.get_or_insert(k);
                entries.push(*e);
            }
        }
        // Indices stay contiguous only if `keep` is; gaps are recorded by
        // relabelling from the first kept index.
        Self {
            entries,
            k_offset: first.unwrap_or(self.k_offset),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.entries
                .iter()
                .map(|e| Interval {
                    rho: e.rho * factor,
                    d: e.d * factor,
                })
                .collect(),
            self.k_offset,
        )
    }

    /// Same centers, half-lengths multiplied by `factor`.
    pub fn widened(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.entries
                .iter()
                .map(|e| Interval {
                    rho: e.rho,
                    d: e.d * factor,
                })
                .collect(),
            self.k_offset,
        )
    }
}

/// Half-length rule of a generated family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HalfLengthRule {
    /// `d_k = rho_k^exponent`
    Power { exponent: f64 },
    /// `d_k = value * rho_k`
    Ratio { value: f64 },
}

/// `rho_k = 2^k + center_shift` for `k_min ..= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowersOfTwo {
    pub k_min: i64,
    pub k_max: i64,
    #[serde(default)]
    pub center_shift: f64,
    pub d_rule: HalfLengthRule,
}

impl PowersOfTwo {
    pub fn build(&self) -> Result<IntervalFamily> {
        if self.k_max < self.k_min {
            return Err(Error::Domain("k_max < k_min".into()));
        }
        if self.k_max > 60 || self.k_min < 0 {
            return Err(Error::Domain("k must lie in 0..=60".into()));
        }
        let entries = (self.k_min..=self.k_max)
            .map(|k| {
                let rho = 2f64.powi(k as i32) + self.center_shift;
                let d = match self.d_rule {
                    HalfLengthRule::Power { exponent } => rho.powf(exponent),
                    HalfLengthRule::Ratio { value } => value * rho,
                };
                Interval { rho, d }
            })
            .collect();
        IntervalFamily::new(entries, self.k_min)
    }

    /// Whether `sum d_k / rho_k` provably diverges for the infinite rule.
    pub fn provably_divergent(&self) -> bool {
        match self.d_rule {
            HalfLengthRule::Ratio { value } => value > 0.0,
            HalfLengthRule::Power { exponent } => exponent >= 1.0,
        }
    }
}

/// Per-`k` side data `g_k`, `s_k`, `J_k^-`, `J_k^+`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideInterval {
    pub k: i64,
    pub rho: f64,
    pub d: f64,
    pub g: f64,
    /// `sqrt(d g rho)` as defined, before any rescaling.
    pub s_raw: f64,
    /// Rescaling factor applied to `s_raw` (1 unless requested).
    pub scale: f64,
    /// Effective `s = scale * s_raw`, used for the `J` intervals.
    pub s: f64,
    pub j_minus: (f64, f64),
    pub j_plus: (f64, f64),
    /// `g = 0`: zero mass, `J` collapses to the endpoints of `I_k`.
    pub degenerate: bool,
    /// `s > 0.1 rho`.
    pub violates_s_bound: bool,
    /// `d >= 0.1 s`: such intervals are discarded before the construction.
    pub discard: bool,
    /// `J_k^pm` meets `I_k` or an interval / side interval of another `k`.
    pub overlaps: bool,
}

impl SideInterval {
    /// Concentric half of `J^-` (`plus = false`) or `J^+`.
    pub fn half_side(&self, plus: bool) -> (f64, f64) {
        let (a, b) = if plus { self.j_plus } else { self.j_minus };
        let c = 0.5 * (a + b);
        let r = 0.25 * (b - a);
        (c - r, c + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideIntervalData {
    pub entries: Vec<SideInterval>,
}

impl SideIntervalData {
    pub fn get(&self, k: i64) -> Option<&SideInterval> {
        self.entries.iter().find(|e| e.k == k)
    }
}

/// Computes `s_k = sqrt(d_k g_k rho_k)` and the side intervals
/// `J_k^- = [rho-d-2s, rho-d-s]`, `J_k^+ = [rho+d+s, rho+d+2s]`.
pub fn side_intervals(family: &IntervalFamily, g: &[f64]) -> Result<SideIntervalData> {
    side_intervals_scaled(family, g, 1.0)
}

/// [`side_intervals`] with `s_k` replaced by `scale * s_k`.
pub fn side_intervals_scaled(
    family: &IntervalFamily,
    g: &[f64],
    scale: f64,
) -> Result<SideIntervalData> {
    if g.len() != family.len() {
        return Err(Error::Domain(format!(
            "{} masses for {} intervals",
            g.len(),
            family.len()
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain("s rescaling factor must be positive".into()));
    }
    let mut entries = Vec::with_capacity(g.len());
    for ((k, e), &gk) in family.iter().zip(g) {
        if !(gk >= 0.0) {
            return Err(Error::Domain(format!("g_{k} = {gk} is negative")));
        }
        let s_raw = (e.d * gk * e.rho).sqrt();
        let s = scale * s_raw;
        entries.push(SideInterval {
            k,
            rho: e.rho,
            d: e.d,
            g: gk,
            s_raw,
            scale,
            s,
            j_minus: (e.rho - e.d - 2.0 * s, e.rho - e.d - s),
            j_plus: (e.rho + e.d + s, e.rho + e.d + 2.0 * s),
            degenerate: gk == 0.0,
            violates_s_bound: s > 0.1 * e.rho,
            discard: e.d >= 0.1 * s,
            overlaps: false,
        });
    }
    let spans: Vec<(i64, f64, f64)> = entries
        .iter()
        .map(|e| (e.k, e.rho - e.d - 2.0 * e.s, e.rho + e.d + 2.0 * e.s))
        .collect();
    for e in entries.iter_mut() {
        let sides = [e.j_minus, e.j_plus];
        let mut hit = false;
        for &(a, b) in &sides {
            // J_k^pm touches I_k only when s = 0.
            if e.s == 0.0 {
                hit = true;
            }
            for &(m, lo, hi) in &spans {
                if m != e.k && a <= hi && b >= lo {
                    hit = true;
                }
            }
        }
        e.overlaps = hit;
    }
    Ok(SideIntervalData { entries })
}

/// A real spectrum, enumerable on any finite window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Spectrum {
    /// `Z \ {0}`.
    IntegersPunctured,
    /// `Z + offset`.
    Shifted { offset: f64 },
    /// `{ +-(n + a) : n >= 0 }`, `a > 0`.
    Symmetric { a: f64 },
    /// A finite sorted set.
    Explicit { points: Vec<f64> },
}

impl Spectrum {
    pub fn explicit(mut points: Vec<f64>) -> Self {
        points.sort_by(|a, b| a.total_cmp(b));
        points.dedup();
        Spectrum::Explicit { points }
    }

    /// Sorted, strictly increasing points in `[lo, hi]`.
    pub fn points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(hi >= lo) {
            return Vec::new();
        }
        match self {
            Spectrum::IntegersPunctured => (lo.ceil() as i64..=hi.floor() as i64)
                .filter(|&n| n != 0)
                .map(|n| n as f64)
                .collect(),
            Spectrum::Shifted { offset } => ((lo - offset).ceil() as i64
                ..=(hi - offset).floor() as i64)
                .map(|n| n as f64 + offset)
                .collect(),
            Spectrum::Symmetric { a } => {
                let mut pts: Vec<f64> = Vec::new();
                let top = (-lo - a).floor() as i64;
                for n in (0..=top).rev() {
                    let x = -(n as f64 + a);
                    if x >= lo && x <= hi {
                        pts.push(x);
                    }
                }
                let top = (hi - a).floor() as i64;
                for n in 0..=top {
                    let x = n as f64 + a;
                    if x >= lo && x <= hi {
                        pts.push(x);
                    }
                }
                pts
            }
            Spectrum::Explicit { points } => points
                .iter()
                .copied()
                .filter(|&x| x >= lo && x <= hi)
                .collect(),
        }
    }

    /// Whether every point is matched by its negative.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Spectrum::IntegersPunctured | Spectrum::Symmetric { .. } => true,
            Spectrum::Shifted { offset } => (2.0 * offset).fract() == 0.0,
            Spectrum::Explicit { points } => points.iter().all(|x| points.iter().any(|y| *y == -x)),
        }
    }

    /// Finite spectra have a last point; the others are unbounded.
    pub fn max_abs(&self) -> Option<f64> {
        match self {
            Spectrum::Explicit { points } => {
                Some(points.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            }
            _ => None,
        }
    }
}

/// Largest gap in `{lo} ∪ points ∪ {hi}`: every subinterval of `[lo, hi]`
/// at least this long contains a point.
pub fn density_gap(points: &[f64], lo: f64, hi: f64) -> f64 {
    let mut prev = lo;
    let mut gap: f64 = 0.0;
    for &x in points {
        gap = gap.max(x - prev);
        prev = x;
    }
    gap.max(hi - prev)
}

/// `min dist(lambda, Z)` over the points (infinite for no points).
pub fn dist_to_integers(points: &[f64]) -> f64 {
    points
        .iter()
        .map(|x| (x - x.round()).abs())
        .fold(f64::INFINITY, f64::min)
}

/// A spectrum restricted to an enumeration window, with its observed
/// structural constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumWindow {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub density_gap: f64,
    pub dist_to_integers: f64,
}

impl SpectrumWindow {
    pub fn observe(points: &[f64], lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            count: points.len(),
            density_gap: density_gap(points, lo, hi),
            dist_to_integers: dist_to_integers(points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub failing_k: Vec<i64>,
}

impl CheckResult {
    fn per_k(name: &str, failing: Vec<i64>, what: &str) -> Self {
        Self {
            name: name.into(),
            passed: failing.is_empty(),
            detail: if failing.is_empty() {
                format!("{what}: holds for every stored k")
            } else {
                format!("{what}: fails for k = {failing:?}")
            },
            failing_k: failing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub k_range: Option<(i64, i64)>,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Structural validation of a family, and optionally of a spectrum window
/// against the separation and local-density conditions with density
/// constant `density_c`.
pub fn validate_family(
    family: &IntervalFamily,
    spectrum: Option<(&SpectrumWindow, f64)>,
) -> ValidationReport {
    let ents: Vec<(i64, Interval)> = family.iter().map(|(k, e)| (k, *e)).collect();
    let lac: Vec<i64> = ents
        .windows(2)
        .filter(|w| w[1].1.rho < 2.0 * w[0].1.rho)
        .map(|w| w[1].0)
        .collect();
    let dbound: Vec<i64> = ents
        .iter()
        .filter(|(_, e)| !(e.d > 0.0 && e.d <= 0.1 * e.rho))
        .map(|(k, _)| *k)
        .collect();
    let disjoint: Vec<i64> = ents
        .windows(2)
        .filter(|w| w[0].1.hi() >= w[1].1.lo())
        .map(|w| w[1].0)
        .collect();
    let centers: Vec<i64> = ents
        .iter()
        .filter(|(_, e)| (e.rho - e.rho.round()).abs() < 1.0 / 3.0)
        .map(|(k, _)| *k)
        .collect();
    let mut checks = vec![
        CheckResult::per_k("lacunarity", lac, "rho_{k+1} >= 2 rho_k"),
        CheckResult::per_k("half_length_bound", dbound, "0 < d_k <= 0.1 rho_k"),
        CheckResult::per_k("disjoint", disjoint, "intervals pairwise disjoint"),
        CheckResult::per_k("center_integer_distance", centers, "dist(rho_k, Z) >= 1/3"),
    ];
    if let Some((w, c)) = spectrum {
        checks.push(CheckResult {
            name: "spectrum_separated".into(),
            passed: w.dist_to_integers > 0.0,
            detail: format!(
                "dist(Lambda, Z) = {:e} on [{}, {}] ({} points)",
                w.dist_to_integers, w.lo, w.hi, w.count
            ),
            failing_k: vec![],
        });
        checks.push(CheckResult {
            name: "spectrum_locally_dense".into(),
            passed: w.density_gap <= c,
            detail: format!(
                "largest gap {} against C = {c} on [{}, {}]",
                w.density_gap, w.lo, w.hi
            ),
            failing_k: vec![],
        });
    }
    ValidationReport {
        k_range: family.k_range(),
        checks,
    }
}
