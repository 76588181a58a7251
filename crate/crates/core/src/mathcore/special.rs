use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
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

/// Natural logarithm of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `exp(-x + a ln x - ln Γ(a))`, the common prefactor of both expansions.
fn prefactor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Lower series, returns P(a, x). Converges fast for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * prefactor(a, x)
}

/// Modified Lentz continued fraction, returns Q(a, x). Used for `x ≥ a + 1`.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    prefactor(a, x) * h
}

/// Regularized upper incomplete gamma function `Q(a, x) = Γ(a, x) / Γ(a)`.
///
/// Requires `a > 0` and `x ≥ 0`.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_p_series(a, x)).clamp(0.0, 1.0)
    } else {
        gamma_q_continued_fraction(a, x).clamp(0.0, 1.0)
    }
}

/// Generalized Marcum function with zero non-centrality, `Q_{m/2}(0, b)`.
///
/// This is the upper tail `P(χ²_m > b²)`, evaluated as `Q(m/2, b²/2)`.
/// Strictly decreasing in `b`, equal to 1 at `b = 0`.
pub fn marcum_q_half_m(m: usize, b: f64) -> f64 {
    debug_assert!(m >= 1, "dimension must be positive");
    debug_assert!(b >= 0.0, "b must be nonnegative");
    regularized_gamma_q(m as f64 / 2.0, 0.5 * b * b)
}

/// The scalar weight `w(x) = Q_{m/2}(0, √x)` for `x ≥ 0`.
pub fn scalar_weight(m: usize, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    regularized_gamma_q(m as f64 / 2.0, 0.5 * x)
}

/// Wald threshold `λ_α`, the unique `b ≥ 0` with `Q_{m/2}(0, b) = α`.
///
/// Brackets on `[0, b_hi]` by doubling `b_hi` until the tail drops below
/// `alpha`, then bisects down to a bracket width of `1e-12`.
pub fn invert_threshold(m: usize, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level must lie in (0, 1), got {alpha}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while marcum_q_half_m(m, hi) >= alpha {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::NonConvergence {
                what: "threshold bracketing",
                residual: marcum_q_half_m(m, hi) - alpha,
            });
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if marcum_q_half_m(m, mid) >= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    let residual = marcum_q_half_m(m, b) - alpha;
    if residual.abs() > 1e-10 {
        return Err(Error::NonConvergence {
            what: "threshold bisection",
            residual,
        });
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials_and_half_integers() {
        let mut fact = 1.0f64;
        for n in 1..30u32 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
            fact *= n as f64;
        }
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ln_gamma(0.5) - sqrt_pi.ln()).abs() < 1e-14);
        assert!((ln_gamma(1.5) - (0.5 * sqrt_pi).ln()).abs() < 1e-14);
    }

    #[test]
    fn full_tail_mass_at_zero() {
        for m in 1..20 {
            assert_eq!(marcum_q_half_m(m, 0.0), 1.0);
            assert_eq!(scalar_weight(m, 0.0), 1.0);
        }
    }

    #[test]
    fn two_sided_normal_tail() {
        // m = 1: P(|N(0,1)| > 1.959964) = 0.05
        assert!((marcum_q_half_m(1, 1.959_964) - 0.05).abs() < 1e-6);
        assert!((scalar_weight(1, 3.8416) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn chi2_two_closed_form() {
        let b = (2.0 * (1.0f64 / 0.1).ln()).sqrt();
        assert!((marcum_q_half_m(2, b) - 0.1).abs() < 1e-14);
        for b in [0.1f64, 0.7, 1.3, 2.9, 5.0, 9.0] {
            let exact = (-0.5 * b * b).exp();
            assert!((marcum_q_half_m(2, b) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn strictly_decreasing_and_vanishing() {
        for m in [1, 2, 5, 20, 50] {
            let mut prev = 1.0;
            for i in 1..400 {
                let b = i as f64 * 0.05;
                let q = marcum_q_half_m(m, b);
                // strict only where the value is representable away from 0 and 1
                assert!(q <= prev, "m={m} b={b}");
                assert!(q < prev || q == 0.0 || q == 1.0, "m={m} b={b}");
                prev = q;
            }
            assert!(marcum_q_half_m(m, 60.0) < 1e-300);
        }
    }

    #[test]
    fn threshold_closed_form_m2() {
        let lam = invert_threshold(2, 0.1).unwrap();
        assert!((lam - (2.0 * 10f64.ln()).sqrt()).abs() < 1e-11);
        assert!((lam - 2.14597).abs() < 1e-5);
    }

    #[test]
    fn threshold_round_trip() {
        for m in [1, 2, 3, 10, 50, 100] {
            for alpha in [1e-4, 1e-3, 1e-2, 0.5, 0.999] {
                let lam = invert_threshold(m, alpha).unwrap();
                assert!(
                    (marcum_q_half_m(m, lam) - alpha).abs() < 1e-10,
                    "m={m} a={alpha}"
                );
            }
        }
    }

    #[test]
    fn threshold_rejects_bad_levels() {
        assert!(invert_threshold(3, 0.0).is_err());
        assert!(invert_threshold(3, 1.0).is_err());
        assert!(invert_threshold(3, f64::NAN).is_err());
        assert!(invert_threshold(0, 0.1).is_err());
    }
}
