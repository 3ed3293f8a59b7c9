//! Real-axis Airy function `Ai` and its derivative, plus the Airy kernel.
//!
//! Three evaluation paths are combined:
//!
//! * the Maclaurin series on `[-2.5, 2]`;
//! * the classical asymptotic expansions for `|x| >= 10`, truncated at the
//!   smallest term;
//! * in between, one Taylor step of the Airy equation `y'' = x y` from the
//!   nearest point of a fixed anchor grid. Anchors are produced once by
//!   marching the same Taylor recurrence inward from `x = ±10` with step 0.5.
//!   On the positive axis the march runs toward the origin, the direction in
//!   which `Ai` is the dominant solution, so rounding errors do not grow.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// `Ai(0)`; equals `3^(-2/3) / Gamma(2/3)`.
pub const AI_ZERO: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_176;
/// `Ai'(0)`; equals `-3^(-1/3) / Gamma(1/3)`.
pub const AI_PRIME_ZERO: f64 = -0.258_819_403_792_806_798_405_183_560_189_203_963;

/// Below this spacing the kernel switches to its confluent diagonal form.
pub const DIAGONAL_SWITCH: f64 = 1e-6;

const ASYMPTOTIC_FROM: f64 = 10.0;
const SERIES_LO: f64 = -2.5;
const SERIES_HI: f64 = 2.0;
const ANCHOR_STEP: f64 = 0.5;

/// `Ai(x)` together with `Ai'(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValue {
    pub ai: f64,
    pub ai_prime: f64,
}

/// Evaluates `Ai` and `Ai'` at `x`.
///
/// Intended working range is `|x| <= 200`; for large positive `x` both values
/// underflow gracefully to zero.
pub fn airy(x: f64) -> Result<AiryValue> {
    if !x.is_finite() {
        return Err(invalid(format!("airy argument must be finite, got {x}")));
    }
    Ok(airy_unchecked(x))
}

pub(crate) fn airy_unchecked(x: f64) -> AiryValue {
    if (SERIES_LO..=SERIES_HI).contains(&x) {
        let (ai, ai_prime) = taylor_step(0.0, AI_ZERO, AI_PRIME_ZERO, x);
        AiryValue { ai, ai_prime }
    } else if x >= ASYMPTOTIC_FROM {
        asymptotic_positive(x)
    } else if x <= -ASYMPTOTIC_FROM {
        asymptotic_negative(-x)
    } else {
        let anchors = anchors();
        let (x0, v) = if x > 0.0 {
            let j = ((ASYMPTOTIC_FROM - x) / ANCHOR_STEP).round() as usize;
            (ASYMPTOTIC_FROM - j as f64 * ANCHOR_STEP, anchors.positive[j])
        } else {
            let j = ((x + ASYMPTOTIC_FROM) / ANCHOR_STEP).round() as usize;
            (-ASYMPTOTIC_FROM + j as f64 * ANCHOR_STEP, anchors.negative[j])
        };
        let (ai, ai_prime) = taylor_step(x0, v.ai, v.ai_prime, x - x0);
        AiryValue { ai, ai_prime }
    }
}

/// Classical asymptotic path alone, exposed for cross-checking the other paths.
pub fn airy_asymptotic(x: f64) -> Result<AiryValue> {
    if !x.is_finite() || x == 0.0 {
        return Err(invalid(format!("asymptotic expansion needs finite nonzero x, got {x}")));
    }
    Ok(if x > 0.0 { asymptotic_positive(x) } else { asymptotic_negative(-x) })
}

struct Anchors {
    /// Values at `10, 9.5, ..., 2`.
    positive: Vec<AiryValue>,
    /// Values at `-10, -9.5, ..., -2.5`.
    negative: Vec<AiryValue>,
}

fn anchors() -> &'static Anchors {
    static ANCHORS: OnceLock<Anchors> = OnceLock::new();
    ANCHORS.get_or_init(|| {
        let march = |start: f64, dir: f64, count: usize| {
            let mut out = Vec::with_capacity(count);
            let mut v = airy_asymptotic(start).expect("anchor start is nonzero");
            for j in 0..count {
                out.push(v);
                let x0 = start + dir * j as f64 * ANCHOR_STEP;
                let (ai, ai_prime) = taylor_step(x0, v.ai, v.ai_prime, dir * ANCHOR_STEP);
                v = AiryValue { ai, ai_prime };
            }
            out
        };
        let n_pos = ((ASYMPTOTIC_FROM - SERIES_HI) / ANCHOR_STEP) as usize + 1;
        let n_neg = ((ASYMPTOTIC_FROM + SERIES_LO) / ANCHOR_STEP) as usize + 1;
        Anchors { positive: march(ASYMPTOTIC_FROM, -1.0, n_pos), negative: march(-ASYMPTOTIC_FROM, 1.0, n_neg) }
    })
}

/// Taylor expansion of the solution of `y'' = x y` with `y(x0) = y0`,
/// `y'(x0) = d0`, evaluated at `x0 + h`. Returns `(y, y')`.
fn taylor_step(x0: f64, y0: f64, d0: f64, h: f64) -> (f64, f64) {
    if h == 0.0 {
        return (y0, d0);
    }
    // c[k] h^k, kept as scaled coefficients to avoid overflow in h^k
    let mut c_km1 = y0; // c_{k-1} h^{k-1}
    let mut c_k = d0 * h; // c_k h^k
    let mut c_kp1 = 0.5 * x0 * y0 * h * h;
    let mut y = y0 + c_k + c_kp1;
    let mut dy_h = c_k + 2.0 * c_kp1; // h * y'
    let scale = y0.abs() + (d0 * h).abs();
    let mut quiet = 0;
    for k in 1..200 {
        // c_{k+2} = (x0 c_k + c_{k-1}) / ((k+2)(k+1))
        let kf = k as f64;
        let next = (x0 * c_k * h * h + c_km1 * h * h * h) / ((kf + 2.0) * (kf + 1.0));
        y += next;
        dy_h += (kf + 2.0) * next;
        c_km1 = c_k;
        c_k = c_kp1;
        c_kp1 = next;
        let size = next.abs() * (kf + 2.0);
        if size <= 1e-18 * (scale + y.abs() + dy_h.abs()) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    (y, dy_h / h)
}

/// Coefficients `u_k` of the exponential asymptotics; `v_k` follow from them.
fn u_coeff_next(u_prev: f64, k: usize) -> f64 {
    let k = k as f64;
    u_prev * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0))
}

fn v_from_u(u: f64, k: usize) -> f64 {
    let k = k as f64;
    -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u
}

fn asymptotic_positive(x: f64) -> AiryValue {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let mut su = 1.0;
    let mut sv = 1.0;
    let mut u = 1.0;
    let mut last = f64::INFINITY;
    let mut pow = 1.0;
    for k in 1..200 {
        u = u_coeff_next(u, k);
        pow /= -zeta;
        let tu = u * pow;
        let tv = v_from_u(u, k) * pow;
        let size = tu.abs().max(tv.abs());
        if size >= last {
            break;
        }
        su += tu;
        sv += tv;
        last = size;
        if size < 1e-17 {
            break;
        }
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.sqrt().sqrt();
    AiryValue { ai: e / q * su, ai_prime: -e * q * sv }
}

fn asymptotic_negative(z: f64) -> AiryValue {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    // even and odd parts of sum (-1)^k c_k zeta^-k, with the alternating sign
    // taken over pairs as in the oscillatory expansion
    let (mut ue, mut uo, mut ve, mut vo) = (1.0, 0.0, 1.0, 0.0);
    let mut u = 1.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        u = u_coeff_next(u, k);
        pow /= zeta;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let tu = sign * u * pow;
        let tv = sign * v_from_u(u, k) * pow;
        let size = tu.abs().max(tv.abs());
        if size >= last {
            break;
        }
        if k % 2 == 0 {
            ue += tu;
            ve += tv;
        } else {
            uo += tu;
            vo += tv;
        }
        last = size;
        if size < 1e-17 {
            break;
        }
    }
    let (s, c) = zeta.sin_cos();
    let cos_q = (c + s) * FRAC_1_SQRT_2; // cos(zeta - pi/4)
    let sin_q = (s - c) * FRAC_1_SQRT_2; // sin(zeta - pi/4)
    let q = z.sqrt().sqrt();
    let r = 1.0 / PI.sqrt();
    AiryValue { ai: r / q * (cos_q * ue + sin_q * uo), ai_prime: r * q * (sin_q * ve - cos_q * vo) }
}

/// The Airy kernel `K(u, v)`.
pub fn airy_kernel(u: f64, v: f64) -> Result<f64> {
    if !u.is_finite() || !v.is_finite() {
        return Err(invalid("airy kernel arguments must be finite"));
    }
    Ok(kernel_from_values(u, airy_unchecked(u), v, airy_unchecked(v)))
}

/// Airy kernel from precomputed Airy values.
///
/// Arguments are put in a fixed order first, so swapping `(u, v)` gives a
/// bitwise identical result.
pub fn kernel_from_values(u: f64, au: AiryValue, v: f64, av: AiryValue) -> f64 {
    let ((u, au), (v, av)) = if u <= v { ((u, au), (v, av)) } else { ((v, av), (u, au)) };
    if (u - v).abs() < DIAGONAL_SWITCH {
        // average of the two confluent values; O((u-v)^2) from the true value
        0.5 * (kernel_diagonal(u, au) + kernel_diagonal(v, av))
    } else {
        (au.ai * av.ai_prime - au.ai_prime * av.ai) / (u - v)
    }
}

/// `K(u, u) = Ai'(u)^2 - u Ai(u)^2`.
pub fn kernel_diagonal(u: f64, au: AiryValue) -> f64 {
    au.ai_prime * au.ai_prime - u * au.ai * au.ai
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // reference values to 20 digits
    const GOLDEN: &[(f64, f64, f64)] = &[
        (10.0, 1.1047532552898685934e-10, -3.5206336767389236366e-10),
        (-5.0, 0.35076100902411431979, 0.32719281855444313679),
        (-10.0, 0.040241238486443190689, 0.9962650441327900559),
        (5.0, 0.00010834442813607441735, -0.000247413890868462476),
        (2.0, 0.034924130423274379135, -0.053090384433653631704),
        (-2.5, -0.11232506769296608919, 0.67885273426479436337),
        (30.0, 3.2082175915504955711e-49, -1.7598765814327259821e-48),
        (-30.0, -0.087968188456842162833, 1.2286206026374851347),
        (100.0, 2.6344821520881844896e-291, -2.6351403616044099336e-290),
        (0.5, 0.23169360648083348977, -0.22491053266468389314),
        (-0.75, 0.51777257515158361165, -0.12599054733795419063),
        (7.3, 3.3251378244377592157e-7, -9.094540388833463758e-7),
        (-6.1, -0.35351167612096482551, 0.13836393725271761463),
    ];

    #[test]
    fn golden_values() {
        for &(x, ai, aip) in GOLDEN {
            let v = airy(x).unwrap();
            assert!(rel(v.ai, ai) < 2e-13, "Ai({x}) = {} vs {ai}", v.ai);
            assert!(rel(v.ai_prime, aip) < 2e-13, "Ai'({x}) = {} vs {aip}", v.ai_prime);
        }
    }

    #[test]
    fn value_at_origin() {
        let v = airy(0.0).unwrap();
        assert_eq!(v.ai, AI_ZERO);
        assert_eq!(v.ai_prime, AI_PRIME_ZERO);
    }

    #[test]
    fn large_positive_leading_term() {
        let x = 10.0f64;
        let lead = (-(2.0 / 3.0) * x.powf(1.5)).exp() / (2.0 * PI.sqrt() * x.powf(0.25));
        assert!(rel(airy(x).unwrap().ai, lead) < 0.01);
    }

    #[test]
    fn underflow_is_graceful() {
        let v = airy(200.0).unwrap();
        assert_eq!(v.ai, 0.0);
        assert!(airy(-200.0).unwrap().ai.is_finite());
        assert!(airy(f64::NAN).is_err());
        assert!(airy(f64::INFINITY).is_err());
    }

    #[test]
    fn continuous_across_path_switches() {
        for b in [SERIES_LO, SERIES_HI, ASYMPTOTIC_FROM, -ASYMPTOTIC_FROM, 2.25, 6.25, -6.25] {
            let lo = airy(b - 1e-12).unwrap();
            let hi = airy(b + 1e-12).unwrap();
            let jump = hi.ai - lo.ai - 2e-12 * lo.ai_prime;
            assert!(jump.abs() <= 1e-13 * lo.ai.abs().max(1e-300), "at {b}");
        }
    }

    #[test]
    fn kernel_examples() {
        let k00 = airy_kernel(0.0, 0.0).unwrap();
        assert_eq!(k00, AI_PRIME_ZERO * AI_PRIME_ZERO);
        assert_eq!(airy_kernel(1.0, 2.0).unwrap(), airy_kernel(2.0, 1.0).unwrap());
        let near = airy_kernel(0.5, 0.5 + 1e-9).unwrap();
        let diag = kernel_diagonal(0.5, airy(0.5).unwrap());
        assert!(rel(near, diag) < 1e-7);
    }

    #[test]
    fn kernel_just_above_switch_matches_diagonal() {
        let u = -1.3;
        let d = 2e-6;
        let off = airy_kernel(u, u + d).unwrap();
        let mid = kernel_diagonal(u + d / 2.0, airy(u + d / 2.0).unwrap());
        assert!(rel(off, mid) < 1e-8);
    }
}
