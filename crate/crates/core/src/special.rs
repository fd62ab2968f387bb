//! Trigonometric and gamma-function helpers.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `sin(pi x)` with exact argument reduction, so integers give exactly 0.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let n = x.round();
    let t = x - n;
    let s = (PI * t).sin();
    if n.rem_euclid(2.0) == 1.0 {
        -s
    } else {
        s
    }
}

/// `cos(pi x)` with exact argument reduction, so half-integers give exactly 0.
pub fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let n = x.round();
    let t = x - n;
    let c = (PI * (0.5 - t.abs())).sin();
    if n.rem_euclid(2.0) == 1.0 {
        -c
    } else {
        c
    }
}

/// `sin(pi t) / t`, continuous at `t = 0` where it equals `pi`.
pub fn sin_pi_over(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        PI * (1.0 - (PI * t).powi(2) / 6.0)
    } else {
        sin_pi(t) / t
    }
}

/// Natural log of the gamma function for positive real arguments.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Log-gamma on the complex plane (Lanczos, g = 7, with reflection).
///
/// The imaginary part is only defined modulo `2 pi`; callers that need
/// the value of `Gamma` should exponentiate.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_complex(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

const STIRLING: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
];

const STIRLING_MIN: f64 = 10.0;

fn stirling_tail(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut p = inv;
    let mut acc = 0.0;
    for c in STIRLING {
        acc += c * p;
        p *= inv2;
    }
    acc
}

fn stirling_tail_c(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut p = inv;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in STIRLING {
        acc += p * c;
        p *= inv2;
    }
    acc
}

/// `ln Gamma(u + c) - ln Gamma(u)` for `u > 0`, `u + c > 0`.
///
/// Stays accurate when `u` is huge (10^15) and `c` is of order one, where
/// differencing two log-gammas would lose every significant digit.
pub fn ln_gamma_ratio(u: f64, c: f64) -> f64 {
    debug_assert!(u > 0.0 && u + c > 0.0, "ln_gamma_ratio({u}, {c})");
    let mut u = u;
    let mut shift = 0.0;
    while u < STIRLING_MIN {
        // ratio(u) = ratio(u + 1) - ln(1 + c/u)
        shift -= (c / u).ln_1p();
        u += 1.0;
    }
    let v =
        c * u.ln() + (u + c - 0.5) * (c / u).ln_1p() - c + stirling_tail(u + c) - stirling_tail(u);
    v + shift
}

fn ln1p_c(w: Complex64) -> Complex64 {
    if w.norm() < 1e-2 {
        let mut term = w;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=12 {
            acc += term / j as f64;
            term *= -w;
        }
        acc
    } else {
        (1.0 + w).ln()
    }
}

/// Complex counterpart of [`ln_gamma_ratio`], for `Re u > 0`.
pub fn ln_gamma_ratio_complex(u: Complex64, c: f64) -> Complex64 {
    let mut u = u;
    let mut shift = Complex64::new(0.0, 0.0);
    while u.norm() < STIRLING_MIN || u.re < 1.0 {
        shift -= ln1p_c(c / u);
        u += 1.0;
    }
    let w = c / u;
    c * u.ln() + (u + c - 0.5) * ln1p_c(w) - c + stirling_tail_c(u + c) - stirling_tail_c(u) + shift
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_exact_at_lattice_points() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(sin_pi(-7.0), 0.0);
        assert_eq!(cos_pi(1.5), 0.0);
        assert_eq!(cos_pi(-2.5), 0.0);
        assert_eq!(cos_pi(2.0f64.powi(40) + 0.5), 0.0);
        assert_eq!(cos_pi(3.0), -1.0);
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(2.25) - (0.25 * PI).sin()).abs() < 1e-15);
    }

    #[test]
    fn lanczos_agrees_with_statrs_on_real_axis() {
        for &x in &[0.1, 0.5, 1.0, 2.5, 7.3, 30.0, 141.7] {
            let a = ln_gamma_complex(Complex64::new(x, 0.0)).re;
            let b = ln_gamma(x);
            assert!(
                (a - b).abs() < 1e-12 * b.abs().max(1.0),
                "x = {x}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn complex_gamma_reflection_identity() {
        let z = Complex64::new(0.3, 1.7);
        let lhs = (ln_gamma_complex(z) + ln_gamma_complex(1.0 - z)).exp();
        let rhs = PI / (z * PI).sin();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }

    #[test]
    fn gamma_ratio_matches_direct_difference() {
        for &(u, c) in &[(0.3, 1.5), (4.2, 1.25), (12.0, 2.0), (250.5, 1.2)] {
            let direct = ln_gamma(u + c) - ln_gamma(u);
            let r = ln_gamma_ratio(u, c);
            assert!(
                (r - direct).abs() < 1e-12 * direct.abs().max(1.0),
                "{u},{c}"
            );
        }
    }

    #[test]
    fn gamma_ratio_large_argument_asymptotics() {
        // Gamma(u + c) / Gamma(u) ~ u^c (1 + c(c-1)/(2u))
        let u: f64 = 1e15;
        let c = 1.25;
        let expect = c * u.ln() + (c * (c - 1.0) / (2.0 * u));
        assert!((ln_gamma_ratio(u, c) - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn complex_gamma_ratio_matches_lanczos() {
        let u = Complex64::new(3.0, -20.0);
        let c = 1.4;
        let a = ln_gamma_ratio_complex(u, c).exp();
        let b = (ln_gamma_complex(u + c) - ln_gamma_complex(u)).exp();
        assert!((a - b).norm() < 1e-11 * b.norm());
    }
}
