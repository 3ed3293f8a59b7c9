//! Closed-form large-gap expansions of `log Q` and `u`, their exact
//! consistency identities, and the Tracy-Widom deep-tail formula.
//!
//! Everything is expressed through the scaled variable
//! `y = pi^2 x t / c_+^2`. The shape functions lose all digits near `y = 0`
//! in their textbook form, so each one is evaluated in a rationalized form or
//! by its Taylor series there.

use std::f64::consts::{LN_2, PI};

use crate::error::{ensure_finite, invalid, Result};
use crate::sigma::{j_sigma, ModelKind, SigmaModel, Weight};

/// `zeta'(-1)`, the derivative of the Riemann zeta function at `-1`.
#[allow(clippy::excessive_precision)]
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_929_213_919_435_9;

/// Constant term `log(2)/24 + zeta'(-1)` of the Tracy-Widom left tail.
pub fn tw_tail_constant() -> f64 {
    LN_2 / 24.0 + ZETA_PRIME_MINUS_ONE
}

/// Below this `y` the shape functions switch to their Taylor series.
const SERIES_SWITCH: f64 = 0.25;
const SERIES_TERMS: usize = 32;

/// The three model numbers entering the expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub c_plus: f64,
    pub c_plus_prime: f64,
    pub j: f64,
}

impl ModelConstants {
    /// Logistic weight: `c_+ = c'_+ = 1`, `j = -pi/12`.
    pub fn kpz() -> Self {
        ModelConstants { c_plus: 1.0, c_plus_prime: 1.0, j: -PI / 12.0 }
    }

    /// Takes `j` in closed form for the logistic weight and by quadrature
    /// otherwise.
    pub fn from_model(model: &SigmaModel) -> Result<Self> {
        if matches!(model.kind(), ModelKind::Kpz) {
            return Ok(Self::kpz());
        }
        let c = model.tail_constants()?;
        Ok(ModelConstants { c_plus: c.c_plus, c_plus_prime: c.c_plus_prime, j: j_sigma(model)? })
    }

    /// `C = 2 c_+ j / pi + log^2(c'_+) / (2 pi^2)`, the coefficient of `-log t`.
    pub fn log_t_coefficient(&self) -> f64 {
        let l = self.c_plus_prime.ln();
        2.0 * self.c_plus * self.j / PI + l * l / (2.0 * PI * PI)
    }

    /// `y = pi^2 x t / c_+^2`.
    pub fn scaled(&self, x: f64, t: f64) -> f64 {
        PI * PI * x * t / (self.c_plus * self.c_plus)
    }

    fn validate(&self) -> Result<()> {
        if !(self.c_plus > 0.0 && self.c_plus_prime > 0.0 && self.j.is_finite()) {
            return Err(invalid(format!("invalid model constants {self:?}")));
        }
        Ok(())
    }
}

/// A named contribution to an [`AsymptoticEval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
}

/// An expansion evaluated term by term.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticEval {
    pub y: f64,
    pub terms: Vec<Term>,
    pub total: f64,
}

impl AsymptoticEval {
    fn new(y: f64, terms: Vec<Term>) -> Self {
        let total = terms.iter().map(|t| t.value).sum();
        AsymptoticEval { y, terms, total }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

fn check_nonneg(name: &str, y: f64) -> Result<()> {
    ensure_finite(name, y)?;
    if y < 0.0 {
        return Err(invalid(format!("{name} must be >= 0, got {y}")));
    }
    Ok(())
}

fn check_pos(name: &str, y: f64) -> Result<()> {
    ensure_finite(name, y)?;
    if y <= 0.0 {
        return Err(invalid(format!("{name} must be > 0, got {y}")));
    }
    Ok(())
}

/// `sum_{k >= first} binom(p, k) y^k`, the tail of the binomial series of
/// `(1 + y)^p`.
fn binomial_tail(p: f64, first: usize, y: f64) -> f64 {
    let mut coef = 1.0;
    for k in 0..first {
        coef *= (p - k as f64) / (k as f64 + 1.0);
    }
    let mut pow = y.powi(first as i32);
    let mut sum = 0.0;
    let mut terms = Vec::with_capacity(SERIES_TERMS);
    for k in first..first + SERIES_TERMS {
        terms.push(coef * pow);
        coef *= (p - k as f64) / (k as f64 + 1.0);
        pow *= y;
    }
    // smallest first
    for v in terms.iter().rev() {
        sum += v;
    }
    sum
}

/// `sqrt(1 + y) - 1` without cancellation.
fn sqrt1p_m1(y: f64) -> f64 {
    y / ((1.0 + y).sqrt() + 1.0)
}

/// `a_0(y) = (sqrt(y+1) - 1)^2 / y = y / (sqrt(y+1) + 1)^2`, with `a_0(0) = 0`.
pub fn shape_a0(y: f64) -> Result<f64> {
    check_nonneg("y", y)?;
    let d = (1.0 + y).sqrt() + 1.0;
    Ok(y / (d * d))
}

/// `a_1(y) = -(log c'_+ / pi) sqrt(y / (1 + y))`.
pub fn shape_a1(y: f64, c_plus_prime: f64) -> Result<f64> {
    check_nonneg("y", y)?;
    check_pos("c_plus_prime", c_plus_prime)?;
    Ok(-(c_plus_prime.ln() / PI) * (y / (1.0 + y)).sqrt())
}

/// `a_2(y)`, using `y^{3/2} / (s (s-1)^2) = (s+1)^2 / (s sqrt(y))` with
/// `s = sqrt(1 + y)`. Diverges like `y^{-1/2}` at the origin.
pub fn shape_a2(y: f64, c_plus: f64, c_plus_prime: f64, j: f64) -> Result<f64> {
    check_pos("y", y)?;
    check_pos("c_plus", c_plus)?;
    check_pos("c_plus_prime", c_plus_prime)?;
    ensure_finite("j", j)?;
    let s = (1.0 + y).sqrt();
    let l = c_plus_prime.ln();
    let bracket = (1.0 - 2.0 * s) / (s * s) * l * l / (4.0 * PI * c_plus) - j;
    Ok((s + 1.0) * (s + 1.0) / (s * y.sqrt()) * bracket)
}

/// `F_1(y) = (4/15)(1+y)^{5/2} - 4/15 - 2y/3 - y^2/2 ~ y^3/12` near 0.
pub fn f1(y: f64) -> Result<f64> {
    check_nonneg("y", y)?;
    if y < SERIES_SWITCH {
        return Ok(4.0 / 15.0 * binomial_tail(2.5, 3, y));
    }
    Ok(4.0 / 15.0 * (1.0 + y).powf(2.5) - 4.0 / 15.0 - 2.0 * y / 3.0 - 0.5 * y * y)
}

/// `F_2(y) = (2/3)(1+y)^{3/2} - 2/3 - y = F_1'(y) ~ y^2/4` near 0.
pub fn f2(y: f64) -> Result<f64> {
    check_nonneg("y", y)?;
    if y < SERIES_SWITCH {
        return Ok(2.0 / 3.0 * binomial_tail(1.5, 2, y));
    }
    Ok(2.0 / 3.0 * (1.0 + y).powf(1.5) - 2.0 / 3.0 - y)
}

/// The two coefficients of `F_3`: `sqrt(1+y)` and `log(sqrt(1+y) - 1)`.
fn f3_coefficients(c: &ModelConstants) -> (f64, f64) {
    let a = 2.0 * c.c_plus * c.j / PI;
    let l = c.c_plus_prime.ln();
    (a, a + l * l / (2.0 * PI * PI) + 1.0 / 24.0)
}

/// `F_3(y) = A sqrt(1+y) - log(1+y)/48 + B log(sqrt(1+y) - 1)`.
pub fn f3(y: f64, c: &ModelConstants) -> Result<f64> {
    check_pos("y", y)?;
    c.validate()?;
    let (a, b) = f3_coefficients(c);
    Ok(a * (1.0 + y).sqrt() - y.ln_1p() / 48.0 + b * sqrt1p_m1(y).ln())
}

/// `F_1''(y) = sqrt(1+y) - 1`.
pub fn f1_d2(y: f64) -> Result<f64> {
    check_nonneg("y", y)?;
    Ok(sqrt1p_m1(y))
}

/// `F_2''(y) = 1 / (2 sqrt(1+y))`.
pub fn f2_d2(y: f64) -> Result<f64> {
    check_nonneg("y", y)?;
    Ok(0.5 / (1.0 + y).sqrt())
}

/// `F_3''(y)`.
pub fn f3_d2(y: f64, c: &ModelConstants) -> Result<f64> {
    check_pos("y", y)?;
    Ok(f3_d2_times_y2(y, c)? / (y * y))
}

/// `y^2 F_3''(y)`, bounded at the origin.
fn f3_d2_times_y2(y: f64, c: &ModelConstants) -> Result<f64> {
    c.validate()?;
    let (a, b) = f3_coefficients(c);
    let s = (1.0 + y).sqrt();
    let s3 = s * s * s;
    Ok(-a * y * y / (4.0 * s3) + y * y / (48.0 * s3 * s) - b * (2.0 * s - 1.0) * (s + 1.0) * (s + 1.0) / (4.0 * s3))
}

fn check_xt(x: f64, t: f64) -> Result<()> {
    check_pos("x", x)?;
    check_pos("t", t)
}

/// `u ~ (x/2t) a_0(y) + a_1(y) / (2 sqrt(xt)) + (t^{1/2} / 2 x^{3/2}) a_2(y)`.
pub fn u_asymptotic(x: f64, t: f64, c: &ModelConstants) -> Result<AsymptoticEval> {
    check_xt(x, t)?;
    c.validate()?;
    let y = c.scaled(x, t);
    let terms = vec![
        Term { name: "leading", value: x / (2.0 * t) * shape_a0(y)? },
        Term { name: "subleading", value: shape_a1(y, c.c_plus_prime)? / (2.0 * (x * t).sqrt()) },
        Term {
            name: "correction",
            value: t.sqrt() / (2.0 * x.powf(1.5)) * shape_a2(y, c.c_plus, c.c_plus_prime, c.j)?,
        },
    ];
    Ok(AsymptoticEval::new(y, terms))
}

/// `log Q ~ -(c^6/pi^6 t^4) F_1 - (c^3 log c' / pi^4 t^2) F_2 + F_3 - C log t`.
pub fn logq_asymptotic(x: f64, t: f64, c: &ModelConstants) -> Result<AsymptoticEval> {
    check_xt(x, t)?;
    c.validate()?;
    let y = c.scaled(x, t);
    let cp = c.c_plus;
    let cp3 = cp * cp * cp;
    let terms = vec![
        Term { name: "leading", value: -cp3 * cp3 / (PI.powi(6) * t.powi(4)) * f1(y)? },
        Term { name: "subleading", value: -cp3 * c.c_plus_prime.ln() / (PI.powi(4) * t * t) * f2(y)? },
        Term { name: "correction", value: f3(y, c)? },
        Term { name: "log_t", value: -c.log_t_coefficient() * t.ln() },
    ];
    Ok(AsymptoticEval::new(y, terms))
}

/// The same expansion written out for the logistic weight.
pub fn logq_kpz_asymptotic(x: f64, t: f64) -> Result<AsymptoticEval> {
    check_xt(x, t)?;
    let y = PI * PI * x * t;
    let s = (1.0 + y).sqrt();
    let terms = vec![
        Term { name: "leading", value: -f1(y)? / (PI.powi(6) * t.powi(4)) },
        Term { name: "sqrt", value: -s / 6.0 },
        Term { name: "log_1p", value: -y.ln_1p() / 48.0 },
        Term { name: "log_edge", value: -sqrt1p_m1(y).ln() / 8.0 },
        Term { name: "log_t", value: t.ln() / 6.0 },
    ];
    Ok(AsymptoticEval::new(y, terms))
}

/// Residuals of the three identities linking second `x`-derivatives of the
/// `log Q` expansion to the `u` expansion, each divided by
/// `max(1, largest term magnitude)`.
///
/// `y` must equal `pi^2 x t / c_+^2` to 1e-12 relative.
pub fn consistency_identities(y: f64, x: f64, t: f64, c: &ModelConstants) -> Result<[f64; 3]> {
    check_xt(x, t)?;
    check_pos("y", y)?;
    c.validate()?;
    let implied = c.scaled(x, t);
    if (y - implied).abs() > 1e-12 * implied {
        return Err(invalid(format!("y = {y} is inconsistent with pi^2 x t / c_+^2 = {implied}")));
    }
    let cp = c.c_plus;
    let cp3 = cp * cp * cp;
    let yx2 = (y / x) * (y / x);
    let rel = |terms: &[f64]| {
        let sum: f64 = terms.iter().sum();
        let scale = terms.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        sum / scale
    };

    let i1 = -yx2 * cp3 * cp3 / (PI.powi(6) * t.powi(4)) * f1_d2(y)?;
    let i2 = x / (2.0 * t);
    let i3 = -x / (2.0 * t) * shape_a0(y)?;
    let r1 = rel(&[i1, i2, i3]);

    let ii1 = -yx2 * cp3 * c.c_plus_prime.ln() / (PI.powi(4) * t * t) * f2_d2(y)?;
    let ii2 = -shape_a1(y, c.c_plus_prime)? / (2.0 * (x * t).sqrt());
    let r2 = rel(&[ii1, ii2]);

    let s = (1.0 + y).sqrt();
    let iii1 = f3_d2_times_y2(y, c)? / (x * x);
    let iii2 = -t.sqrt() / (2.0 * x.powf(1.5)) * shape_a2(y, c.c_plus, c.c_plus_prime, c.j)?;
    let iii3 = -(-3.0 * y + 2.0 * s - 3.0) * (s + 1.0) * (s + 1.0) / (96.0 * x * x * s.powi(5));
    let r3 = rel(&[iii1, iii2, iii3]);
    Ok([r1, r2, r3])
}

/// `log F_TW(-m) ~ -m^3/12 - log(m)/8 + log(2)/24 + zeta'(-1)`.
pub fn tw_tail(m: f64) -> Result<f64> {
    check_pos("m", m)?;
    Ok(-m * m * m / 12.0 - m.ln() / 8.0 + tw_tail_constant())
}

/// `-x^3/(12 t) - log(x t^{-1/3})/8 + log(2)/24 + zeta'(-1)`: the small-`t`
/// expansion of `log Q` at bounded `x`, without its integral correction.
pub fn region_iii_partial(x: f64, t: f64) -> Result<f64> {
    check_xt(x, t)?;
    Ok(-x * x * x / (12.0 * t) - (x / t.cbrt()).ln() / 8.0 + tw_tail_constant())
}

/// Difference between the large-`x` expansion of `-log Q` at `x = k` and
/// the small-`t` form `k^3/(12t) - (C + 1/24) log t`. Bounded as `t -> 0`.
pub fn gluing_gap(k: f64, t: f64, c: &ModelConstants) -> Result<f64> {
    check_xt(k, t)?;
    c.validate()?;
    let y = c.scaled(k, t);
    let cp = c.c_plus;
    let cp3 = cp * cp * cp;
    let expansion = cp3 * cp3 / (PI.powi(6) * t.powi(4)) * f1(y)?
        + cp3 * c.c_plus_prime.ln() / (PI.powi(4) * t * t) * f2(y)?
        - f3(y, c)?;
    Ok(expansion - (k * k * k / (12.0 * t) - (c.log_t_coefficient() + 1.0 / 24.0) * t.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1_closed(y: f64) -> f64 {
        4.0 / 15.0 * (1.0 + y).powf(2.5) - 4.0 / 15.0 - 2.0 * y / 3.0 - 0.5 * y * y
    }

    #[test]
    fn a0_limits() {
        // a_0 = 1 - 2 y^{-1/2} + 2/y - ..., so a_0(1e8) is 1 only to 2e-4
        let big = shape_a0(1e8).unwrap();
        assert!((big - 1.0).abs() < 2.1e-4);
        assert!((big - (1.0 - 2e-4 + 2e-8)).abs() < 1e-11);
        assert!((shape_a0(1e-6).unwrap() / 2.5e-7 - 1.0).abs() < 1e-6);
        assert_eq!(shape_a0(0.0).unwrap(), 0.0);
        assert!(shape_a0(-1.0).is_err());
        let y: f64 = 3.0;
        let direct = ((y + 1.0).sqrt() - 1.0).powi(2) / y;
        assert!((shape_a0(y).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn a1_vanishes_for_unit_prefactor() {
        for y in [0.0, 0.1, 1.0, 10.0, 1e6] {
            assert_eq!(shape_a1(y, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn a2_matches_unsimplified_form() {
        let (c, cp, j) = (1.5, 2.0f64, 0.3);
        for y in [0.5f64, 2.0, 7.0] {
            let s: f64 = (1.0 + y).sqrt();
            let l = cp.ln();
            let direct =
                y.powf(1.5) / (s * (s - 1.0).powi(2)) * ((1.0 - 2.0 * s) / (y + 1.0) * l * l / (4.0 * PI * c) - j);
            let v = shape_a2(y, c, cp, j).unwrap();
            assert!((v - direct).abs() < 1e-12 * direct.abs());
        }
    }

    #[test]
    fn f_series_matches_closed_form() {
        assert_eq!(f1(0.0).unwrap(), 0.0);
        assert_eq!(f2(0.0).unwrap(), 0.0);
        let y: f64 = 1e-3;
        let series = y.powi(3) / 12.0 - y.powi(4) / 96.0 + y.powi(5) / 320.0 - y.powi(6) / 768.0;
        assert!((f1(y).unwrap() - series).abs() < 1e-9 * series);
        assert!((f1(y).unwrap() - f1_closed(y)).abs() < 1e-5 * series);
        // both branches agree at the switch
        let y = SERIES_SWITCH;
        let series = 4.0 / 15.0 * binomial_tail(2.5, 3, y);
        assert!((series - f1_closed(y)).abs() < 1e-13 * series);
        let series = 2.0 / 3.0 * binomial_tail(1.5, 2, y);
        let closed = 2.0 / 3.0 * (1.0 + y).powf(1.5) - 2.0 / 3.0 - y;
        assert!((series - closed).abs() < 1e-13 * series);
    }

    #[test]
    fn f1_growth() {
        let y: f64 = 1e8;
        assert!((f1(y).unwrap() / y.powf(2.5) - 4.0 / 15.0).abs() < 1e-3);
    }

    #[test]
    fn f2_is_derivative_of_f1() {
        let h = 1e-5;
        for y in [0.5, 2.0, 10.0] {
            let fd = (f1(y + h).unwrap() - f1(y - h).unwrap()) / (2.0 * h);
            assert!((f2(y).unwrap() - fd).abs() < 1e-8, "y = {y}");
        }
    }

    #[test]
    fn second_derivatives_match_differences() {
        let c = ModelConstants { c_plus: 1.3, c_plus_prime: 2.5, j: -0.2 };
        for k in 0..20 {
            let y = 10f64.powf(-1.5 + 3.5 * k as f64 / 19.0);
            let h = 1e-4 * y;
            let fd = |f: &dyn Fn(f64) -> f64| (f(y + h) - 2.0 * f(y) + f(y - h)) / (h * h);
            let checks = [
                (fd(&|v| f1(v).unwrap()), f1_d2(y).unwrap(), f1(y).unwrap()),
                (fd(&|v| f2(v).unwrap()), f2_d2(y).unwrap(), f2(y).unwrap()),
                (fd(&|v| f3(v, &c).unwrap()), f3_d2(y, &c).unwrap(), f3(y, &c).unwrap()),
            ];
            for (i, (num, exact, value)) in checks.into_iter().enumerate() {
                // difference noise ~ eps |f| / h^2
                let noise = 1e-15 * value.abs().max(1.0) / (h * h);
                assert!(
                    (num - exact).abs() < 1e-7 * exact.abs() + 10.0 * noise,
                    "F{} at y = {y}: {num} vs {exact}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn kpz_constants() {
        let c = ModelConstants::kpz();
        assert!((c.log_t_coefficient() + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn identities_at_sample_point() {
        let c = ModelConstants::kpz();
        let (x, t) = (5.0, 0.2);
        let r = consistency_identities(c.scaled(x, t), x, t, &c).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-11), "{r:?}");
        assert_eq!(r[1], 0.0);
        assert!(consistency_identities(1.0, x, t, &c).is_err());
    }

    #[test]
    fn kpz_specialization() {
        let a = logq_asymptotic(5.0, 0.5, &ModelConstants::kpz()).unwrap();
        let b = logq_kpz_asymptotic(5.0, 0.5).unwrap();
        assert!((a.total - b.total).abs() < 1e-12 * a.total.abs());
        let sum: f64 = b.terms.iter().map(|t| t.value).sum();
        assert!((sum - b.total).abs() <= 1e-13 * b.total.abs());
    }

    #[test]
    fn kpz_leading_growth() {
        let (x, t) = (1e4, 1.0);
        let e = logq_kpz_asymptotic(x, t).unwrap();
        let lead = -4.0 / 15.0 * (PI * PI * x * t).powf(2.5) / (PI.powi(6) * t.powi(4));
        assert!((e.total / lead - 1.0).abs() < 1e-2);
    }

    #[test]
    fn u_kpz_has_no_subleading_term() {
        let e = u_asymptotic(6.0, 1.0, &ModelConstants::kpz()).unwrap();
        assert_eq!(e.term("subleading"), Some(0.0));
        let y = PI * PI * 6.0;
        let a2 = shape_a2(y, 1.0, 1.0, -PI / 12.0).unwrap();
        let expect = 3.0 * shape_a0(y).unwrap() + a2 / (2.0 * 6f64.powf(1.5));
        assert!((e.total - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn u_small_y_limit() {
        let (x, t) = (3.0, 1e-9);
        let e = u_asymptotic(x, t, &ModelConstants::kpz()).unwrap();
        let lead = e.term("leading").unwrap();
        assert!((lead / (PI * PI * x * x / 8.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tw_tail_structure() {
        let m = 20.0;
        let ratio = tw_tail(m).unwrap() / (-m * m * m / 12.0);
        assert!(ratio > 1.0 && ratio < 1.001);
        assert!(tw_tail(0.0).is_err());
        assert!((tw_tail(1.0).unwrap() + 1.0 / 12.0 - tw_tail_constant()).abs() < 1e-15);
        assert!((ZETA_PRIME_MINUS_ONE - (1.0 / 12.0 - 1.282_427_129_100_622_6_f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn region_iii_is_tw_tail() {
        for (x, t) in [(0.1, 1e-6), (0.3, 1e-3), (2.0, 0.5)] {
            let m = x / f64::cbrt(t);
            assert!((region_iii_partial(x, t).unwrap() - tw_tail(m).unwrap()).abs() < 1e-9 * tw_tail(m).unwrap().abs());
        }
    }

    #[test]
    fn gluing_gap_stays_bounded() {
        let c = ModelConstants::kpz();
        let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&t| gluing_gap(8.0, t, &c).unwrap()).collect();
        // limit is dominated by the y^4 term of F_1: -pi^2 K^4 / 96
        let limit = -PI * PI * 8f64.powi(4) / 96.0;
        assert!((gaps[2] - limit).abs() < 5.0, "{gaps:?}");
        assert!((gaps[2] - gaps[1]).abs() < (gaps[1] - gaps[0]).abs(), "{gaps:?}");
    }
}
