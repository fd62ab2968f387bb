//! Acceptance runs. Prints one line per criterion and exits nonzero if any
//! fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use expsynth::breaker::{check_hypotheses, run_breaker, BreakerConfig, CrossSystem};
use expsynth::certifier::{
    certify, kernel_coefficients, kernel_norm_sq, m_eval_local, m_root, CertifierConfig,
    KernelWeights,
};
use expsynth::defect::breaker_defect;
use expsynth::genfun::{
    GenFn, GenFnModel, KadetsExample, KadetsRho, ModelKind, PvProduct, SimpleExample,
};
use expsynth::pw::{gram_defect, pairing, SampledPWVector};
use expsynth::spectra::{HalfLengthRule, IntervalFamily, PowersOfTwo, Spectrum};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn simple_model() -> GenFnModel {
    GenFnModel::new(ModelKind::Simple(SimpleExample::new(60).unwrap()))
}

fn powers(k_min: i64, k_max: i64, shift: f64, d_rule: HalfLengthRule) -> IntervalFamily {
    PowersOfTwo {
        k_min,
        k_max,
        center_shift: shift,
        d_rule,
    }
    .build()
    .unwrap()
}

fn fifth_root() -> HalfLengthRule {
    HalfLengthRule::Power { exponent: 0.2 }
}

fn criterion_1() -> Outcome {
    let p = PvProduct::new(Spectrum::IntegersPunctured, 1e-12, 40).unwrap();
    let v = p.eval(Complex64::new(0.5, 0.0)).unwrap().value;
    let err = (v - Complex64::new(2.0 / PI, 0.0)).norm();
    outcome(err <= 1e-10, format!("|G(1/2) - 2/pi| = {err:.2e}"))
}

fn criterion_2() -> Outcome {
    let model = simple_model();
    let family = powers(10, 18, 0.0, fifth_root());
    let mut cfg = BreakerConfig::new(family.clone(), 1 << 20);
    cfg.s_rescale = 0.25;
    let h = check_hypotheses(&model, &cfg).unwrap();
    let names = ["a", "b", "c", "d", "i", "ii", "iii", "iv"];
    let failing: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| !h.check(n).map_or(false, |c| c.passed))
        .collect();
    // direct summation of G(n)^2 over each I_k
    let direct: Vec<f64> = family
        .iter()
        .map(|(_, iv)| {
            let (a, b) = iv.integers();
            (a..=b).map(|n| model.eval(n as f64).powi(2)).sum()
        })
        .collect();
    let oracle_err =
        h.g.iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs() / b)
            .fold(0.0, f64::max);
    let near = h.g.iter().all(|g| (g - 19.7).abs() <= 0.1);
    let steps: Vec<f64> =
        h.g.windows(2)
            .skip(2)
            .map(|w| (w[0] - w[1]).abs())
            .collect();
    let stable = steps.iter().all(|&s| s <= 0.05);
    outcome(
        failing.is_empty() && oracle_err <= 1e-10 && near && stable,
        format!(
            "failing checks {failing:?}; g = {:.4}..{:.4}; max |g_k - g_k+1| (k >= 12) = {:.2e}; direct-sum rel err {oracle_err:.1e}",
            h.g.iter().copied().fold(f64::INFINITY, f64::min),
            h.g.iter().copied().fold(0.0, f64::max),
            steps.iter().copied().fold(0.0, f64::max)
        ),
    )
}

/// A random lacunary family of at most 50 intervals with `d_k = rho_k^0.2`,
/// centers half an integer off, and random positive samples.
fn random_system(rng: &mut ChaCha8Rng, eta: f64) -> CrossSystem {
    let len = rng.gen_range(8..=50usize);
    let mut rho = Vec::with_capacity(len);
    let mut r = 2f64.powi(rng.gen_range(4..8)) + 0.5;
    for _ in 0..len {
        rho.push(r);
        r = (2.0 * r + rng.gen_range(0.0..0.5 * r)).floor() + 0.5;
        if r > 1e15 {
            break;
        }
    }
    let d: Vec<f64> = rho.iter().map(|r| r.powf(0.2)).collect();
    let mut tail: f64 = rho.iter().zip(&d).map(|(r, d)| d / r).sum();
    let mut start = 0;
    while tail >= eta {
        tail -= d[start] / rho[start];
        start += 1;
    }
    let (rho, d) = (&rho[start..], &d[start..]);
    let ranges: Vec<(i64, i64)> = rho
        .iter()
        .zip(d)
        .map(|(r, d)| ((r - d).ceil() as i64, (r + d).floor() as i64))
        .collect();
    let seed: u64 = rng.gen();
    let a = move |n: i64| {
        let mut h =
            ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        h.gen_range(0.5..2.0)
    };
    CrossSystem::from_samples(rho, d, &ranges, &a).unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_err: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut sizes = Vec::new();
    for _ in 0..10 {
        let sys = random_system(&mut rng, 0.01);
        let n = sys.len();
        sizes.push(n);
        let fp = sys.solve(1e-15, 500).unwrap();
        let mut m = DMatrix::from_fn(n, n, |k, j| sys.cross[k][j]);
        for k in 0..n {
            m[(k, k)] = sys.diag[k];
        }
        let rhs = DVector::from_fn(n, |k, _| -1.0 / sys.rho[k]);
        let direct = m.lu().solve(&rhs).unwrap();
        let diff: Vec<f64> = fp.c.iter().zip(direct.iter()).map(|(a, b)| a - b).collect();
        let rel = sys.banach_norm(&diff) / sys.banach_norm(direct.as_slice());
        worst_err = worst_err.max(rel);
        worst_ratio = worst_ratio.max(fp.max_ratio).max(sys.lin_norm());
    }
    outcome(
        worst_err <= 1e-10 && worst_ratio < 0.5,
        format!(
            "sizes {sizes:?}; max rel Banach error {worst_err:.2e}; max contraction {worst_ratio:.3}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let model = simple_model();
    let mut cfg = BreakerConfig::new(powers(10, 18, -0.5, fifth_root()), 1 << 20);
    cfg.s_rescale = 0.25;
    let run = run_breaker(&model, &cfg).unwrap();
    let r = &run.report;
    let rho1 = run.rho[0];
    let s_ok = r.max_s_residual <= 1e-8 / rho1;
    let orth_ok = r
        .rows
        .iter()
        .all(|row| row.orth_residual <= row.orth_budget);
    let spots_ok = r.spot_checks.len() == 20 && r.spot_within_budget;
    outcome(
        s_ok && r.pairing >= 0.5 && orth_ok && spots_ok,
        format!(
            "max|S(rho_k)| = {:.2e} (target {:.2e}); pairing {:.6}; orthogonality within budget: {orth_ok}; {} spot checks within budget: {}",
            r.max_s_residual,
            1e-8 / rho1,
            r.pairing,
            r.spot_checks.len(),
            r.spot_within_budget
        ),
    )
}

fn criterion_5() -> Outcome {
    let k = KadetsExample::new(
        0.5,
        0.75,
        &KadetsRho::PowersOfTwo {
            k_min: None,
            k_max: 50,
        },
    )
    .unwrap();
    let exact = k
        .shifted_family()
        .iter()
        .all(|(_, iv)| iv.d == iv.rho.powf(0.8));
    let mut lo_g = f64::INFINITY;
    let mut hi_g: f64 = 0.0;
    for (_, iv) in k.shifted_family().iter() {
        let (a, b) = (
            (iv.rho + iv.d).ceil() as i64,
            (iv.rho + iv.d + 2.0).floor() as i64,
        );
        for n in a..=b {
            let v = k.eval(n as f64).abs();
            lo_g = lo_g.min(v);
            hi_g = hi_g.max(v);
        }
    }
    let band = lo_g >= 0.2 && hi_g <= 5.0;
    let fam = k.breaker_family();
    let model = GenFnModel::new(ModelKind::Kadets(k));
    let mut cfg = BreakerConfig::new(fam, 1 << 53);
    cfg.s_rescale = 0.25;
    let h = check_hypotheses(&model, &cfg).unwrap();
    let terms = &h.terms_ii;
    let last = terms.last().copied().unwrap_or(f64::INFINITY);
    // the last terms decrease
    let decaying = terms.windows(2).rev().take(8).all(|w| w[1] <= w[0]);
    let ii_ok = h.check("ii").map_or(false, |c| c.passed);
    outcome(
        exact && band && decaying && ii_ok && last < 1e-3,
        format!(
            "d_k = rho_k^0.8 exactly: {exact}; |G(n)| in [{lo_g:.3}, {hi_g:.3}]; (ii) terms {}, last increment {last:.2e}, partial sum {:.4e}",
            terms.len(),
            h.partial_ii.last().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_6() -> Outcome {
    let family = powers(4, 12, 0.0, HalfLengthRule::Ratio { value: 1.0 / 16.0 });
    let weights = KernelWeights::uniform_on(&family, 1.0, -8192, 8192).unwrap();
    let cfg = CertifierConfig::default();
    let run = certify(&weights, &family, &cfg, Some(true)).unwrap();
    let r = &run.report;
    let bounded =
        r.flagged.is_empty() && r.sup_cond_i <= cfg.ratio_bound && r.sup_cond_ii <= cfg.ratio_bound;

    // one root per unit interval of J_k, each bracketed on a 1e-3 grid
    let mut scan_ok = true;
    let mut expected = 0usize;
    for (k, iv) in family.iter() {
        let (jl, jh) = (iv.rho - 0.5 * iv.d, iv.rho + 0.5 * iv.d);
        for n in (jl.ceil() as i64)..=(jh.floor() as i64) {
            expected += 1;
            let Some(root) = run.table.get(k, n) else {
                scan_ok = false;
                continue;
            };
            let vals: Vec<f64> = (1..1000)
                .map(|j| m_eval_local(&weights, n, j as f64 * 1e-3).unwrap())
                .collect();
            let changes: Vec<usize> = (0..vals.len() - 1)
                .filter(|&j| vals[j] < 0.0 && vals[j + 1] >= 0.0)
                .collect();
            let ok = changes.len() == 1 && vals[0] < 0.0 && vals[998] > 0.0 && {
                let j = changes[0];
                let (a, b) = ((j + 1) as f64 * 1e-3, (j + 2) as f64 * 1e-3);
                root.u >= a && root.u <= b
            };
            scan_ok &= ok;
        }
    }
    let count_ok = r.roots_total == expected;
    let nk_ok = r.rows.iter().all(|row| row.nk_size as f64 >= row.d / 2.0);
    let eps: Vec<f64> = r.rows.iter().map(|row| row.eps).collect();
    let half = eps.len() / 2;
    let early = eps[..half].iter().copied().fold(f64::INFINITY, f64::min);
    let late = eps[half..].iter().copied().fold(f64::INFINITY, f64::min);
    let eps_ok = r.eps_floor >= 0.05 && late >= 0.5 * early;

    let sym = KernelWeights::synthetic(0, vec![1.0, 1.0]).unwrap();
    let (u_sym, ..) = m_root(&sym, 0).unwrap();
    let skew = KernelWeights::synthetic(0, vec![1.0, 3f64.sqrt()]).unwrap();
    let (u_skew, ..) = m_root(&skew, 0).unwrap();
    let closed = u_sym == 0.5 && (u_skew - 0.25).abs() <= 1e-12;
    outcome(
        bounded && scan_ok && count_ok && nk_ok && eps_ok && closed,
        format!(
            "sup cond (i) {:.3}, (ii) {:.3}; {} roots for {expected} unit intervals, grid scan ok: {scan_ok}; |N_k| >= d_k/2: {nk_ok}; eps floor {:.3} (early {early:.3}, late {late:.3}); two-atom roots {u_sym}, {:.15}",
            r.sup_cond_i, r.sup_cond_ii, r.roots_total, r.eps_floor, u_skew
        ),
    )
}

fn criterion_7() -> Outcome {
    let model = simple_model();
    let window = 1i64 << 14;
    let weights = KernelWeights::from_model(&model, -window, window).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_norm: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(-window / 2..window / 2);
        let lambda = n as f64 + 0.5;
        let rep = kernel_norm_sq(&weights, lambda).unwrap();
        let coeffs = kernel_coefficients(&weights, lambda).unwrap();
        let v = SampledPWVector::new(window, coeffs).unwrap();
        let gram = pairing(&v, &v).unwrap();
        worst_norm = worst_norm.max((rep - gram).abs() / gram);
    }

    // roots of M for the simple example against a direct offset-coordinate
    // evaluation of the inner products
    let family = powers(10, 12, 0.0, fifth_root());
    let run = certify(&weights, &family, &CertifierConfig::default(), None).unwrap();
    let roots: Vec<(i64, f64)> = run
        .table
        .rows
        .iter()
        .filter(|r| r.in_j)
        .map(|r| (r.n, r.u))
        .collect();
    let inner = |a: (i64, f64), b: (i64, f64)| -> f64 {
        (-window..=window)
            .map(|m| {
                let w2 = weights.w2(m);
                w2 / (((a.0 - m) as f64 + a.1) * ((b.0 - m) as f64 + b.1))
            })
            .sum()
    };
    let norms: Vec<f64> = roots.iter().map(|&r| inner(r, r).sqrt()).collect();
    let mut worst_orth: f64 = 0.0;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let v = inner(roots[i], roots[j]).abs() / (norms[i] * norms[j]);
            worst_orth = worst_orth.max(v);
        }
    }
    outcome(
        worst_norm <= 1e-12 && worst_orth <= 1e-10 && roots.len() > 1,
        format!(
            "max rel |rep - Gram diagonal| over 100 n = {worst_norm:.2e}; {} roots, max relative inner product {worst_orth:.2e} (library {:.2e})",
            roots.len(),
            run.report.orthogonality_max
        ),
    )
}

fn criterion_8() -> Outcome {
    let m = 64i64;
    let basis: Vec<SampledPWVector> = (-m..=m)
        .map(|j| SampledPWVector::unit(m, j).unwrap())
        .collect();
    let full = gram_defect(&basis, None).unwrap();
    let e0 = SampledPWVector::unit(m, 0).unwrap();
    let rest: Vec<SampledPWVector> = basis
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as i64 != m)
        .map(|(_, v)| v.clone())
        .collect();
    let removed = gram_defect(&rest, Some(&e0)).unwrap();
    let onb_ok =
        (full.sigma_min - 1.0).abs() <= 1e-12 && (removed.residual.unwrap() - 1.0).abs() <= 1e-12;

    let model = simple_model();
    let mut cfg = BreakerConfig::new(powers(10, 12, -0.5, fifth_root()), 1 << 15);
    cfg.s_rescale = 0.25;
    let run = run_breaker(&model, &cfg).unwrap();
    let mut trend = Vec::new();
    let mut mixed_ok = true;
    for w in [1i64 << 14, 1 << 15] {
        let d = breaker_defect(&model, &run, w, 16.0).unwrap();
        mixed_ok &= d.lower_bound > 0.0 && d.residual >= d.lower_bound;
        trend.push(format!(
            "N = {w}: bound {:.4}, residual {:.4}",
            d.lower_bound, d.residual
        ));
    }
    outcome(
        onb_ok && mixed_ok,
        format!(
            "sigma_min {:.15}, residual without e_0 {:.15}; {}",
            full.sigma_min,
            removed.residual.unwrap(),
            trend.join("; ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"model": {"kind": "simple_example"},
            "family": {"kind": "powers_of_two", "k_min": 4, "k_max": 12,
                       "d_rule": {"kind": "ratio", "value": 0.0625}},
            "weights": {"kind": "uniform", "value": 1.0},
            "truncation": {"window": 8192}}"#,
    )
    .unwrap();
    let breaker_config = dir.path().join("break.json");
    std::fs::write(
        &breaker_config,
        r#"{"model": {"kind": "simple_example"},
            "family": {"kind": "powers_of_two", "k_min": 10, "k_max": 12, "center_shift": -0.5,
                       "d_rule": {"kind": "power", "exponent": 0.2}},
            "truncation": {"window": 32768}}"#,
    )
    .unwrap();
    let mut same = true;
    let mut sizes = Vec::new();
    for (cmd, cfg) in [
        ("validate", &config),
        ("certify", &config),
        ("example", &config),
        ("break", &breaker_config),
    ] {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{cmd}{run}.json"));
            let args = [
                "expsynth",
                cmd,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ];
            expsynth::cli::run(args);
            outs.push(std::fs::read(&out).unwrap_or_default());
        }
        same &= !outs[0].is_empty() && outs[0] == outs[1];
        sizes.push(format!("{cmd} {} bytes", outs[0].len()));
    }
    outcome(
        same,
        format!("byte-identical reports: {}", sizes.join(", ")),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("euler product", criterion_1),
        ("simple example hypotheses", criterion_2),
        ("fixed point vs direct solve", criterion_3),
        ("breaker residuals", criterion_4),
        ("kadets example", criterion_5),
        ("certifier suite", criterion_6),
        ("kernel consistency", criterion_7),
        ("defect harness", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = f();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{tag}] {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
