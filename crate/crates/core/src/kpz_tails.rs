//! Lower-tail function `G(s, T)` of the narrow-wedge KPZ solution, the
//! probability bounds built from it, and its regime expansions.
//!
//! The determinant variables and the KPZ variables are related by
//! `(x, t) = (s T^{-1/6}, T^{-1/2})`. Under this map
//! `G(s, T) = -log Q` expansion for the logistic weight.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::asymptotics::f1;
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fredholm::{log_q_sigma, DetJob};
use crate::sigma::make_kpz_model;

/// Default `epsilon` of the lower bound.
pub const DEFAULT_EPSILON: f64 = 0.1;

fn check_pos(name: &str, v: f64) -> Result<()> {
    ensure_finite(name, v)?;
    if v <= 0.0 {
        return Err(invalid(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

/// `(s, T) -> (x, t) = (s T^{-1/6}, T^{-1/2})`.
pub fn kpz_to_determinant(s: f64, big_t: f64) -> Result<(f64, f64)> {
    ensure_finite("s", s)?;
    check_pos("T", big_t)?;
    Ok((s * big_t.powf(-1.0 / 6.0), 1.0 / big_t.sqrt()))
}

/// `(x, t) -> (s, T) = (x t^{-1/3}, t^{-2})`.
pub fn determinant_to_kpz(x: f64, t: f64) -> Result<(f64, f64)> {
    ensure_finite("x", x)?;
    check_pos("t", t)?;
    Ok((x / t.cbrt(), 1.0 / (t * t)))
}

/// `G(s, T) = T^2 F_1(y)/pi^6 + sqrt(1+y)/6 + log(1+y)/48 + log(sqrt(1+y) - 1)/8 + log(T)/12`
/// with `y = pi^2 s T^{-2/3}`.
#[allow(non_snake_case)]
pub fn G(s: f64, big_t: f64) -> Result<f64> {
    check_pos("s", s)?;
    check_pos("T", big_t)?;
    let y = PI * PI * s * big_t.powf(-2.0 / 3.0);
    let edge = y / ((1.0 + y).sqrt() + 1.0);
    if !(edge > 0.0) {
        return Err(invalid(format!("sqrt(1 + y) - 1 must be > 0, got y = {y}")));
    }
    Ok(big_t * big_t * f1(y)? / PI.powi(6)
        + (1.0 + y).sqrt() / 6.0
        + y.ln_1p() / 48.0
        + edge.ln() / 8.0
        + big_t.ln() / 12.0)
}

/// `p - G(s + T^{-1/3} log p, T) + d_plus`, an upper bound for `log P(Y_T < -s)`.
pub fn upper_bound_log_prob(s: f64, big_t: f64, p: f64, d_plus: f64) -> Result<f64> {
    ensure_finite("p", p)?;
    if p < 1.0 {
        return Err(invalid(format!("p must be >= 1, got {p}")));
    }
    ensure_finite("d_plus", d_plus)?;
    check_pos("T", big_t)?;
    Ok(p - G(s + big_t.cbrt().recip() * p.ln(), big_t)? + d_plus)
}

/// The argument `s^{3 + epsilon} + T^epsilon` inside the lower-bound shift.
pub fn lower_bound_argument(s: f64, big_t: f64, epsilon: f64) -> Result<f64> {
    check_pos("s", s)?;
    check_pos("T", big_t)?;
    check_pos("epsilon", epsilon)?;
    Ok(s.powf(3.0 + epsilon) + big_t.powf(epsilon))
}

/// `-G(s + T^{-1/3} log(s^{3+eps} + T^eps), T) + d_minus`, a lower bound for
/// `log P(Y_T < -s)`.
pub fn lower_bound_log_prob(s: f64, big_t: f64, epsilon: f64, d_minus: f64) -> Result<f64> {
    ensure_finite("d_minus", d_minus)?;
    let q = lower_bound_argument(s, big_t, epsilon)?;
    Ok(-G(s + big_t.cbrt().recip() * q.ln(), big_t)? + d_minus)
}

/// Both bounds at one point. `d_plus` and `d_minus` are unknown in general;
/// with the default 0 the bounds are only meaningful up to constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub s: f64,
    pub big_t: f64,
    pub lower_log_prob: f64,
    pub upper_log_prob: f64,
    pub p_used: f64,
    /// `s^{3+eps} + T^eps`.
    pub q_used: f64,
    pub epsilon: f64,
    pub d_plus: f64,
    pub d_minus: f64,
}

pub fn tail_bounds(s: f64, big_t: f64, p: f64, epsilon: f64, d_plus: f64, d_minus: f64) -> Result<TailBound> {
    Ok(TailBound {
        s,
        big_t,
        lower_log_prob: lower_bound_log_prob(s, big_t, epsilon, d_minus)?,
        upper_log_prob: upper_bound_log_prob(s, big_t, p, d_plus)?,
        p_used: p,
        q_used: lower_bound_argument(s, big_t, epsilon)?,
        epsilon,
        d_plus,
        d_minus,
    })
}

/// Minimizer of [`upper_bound_log_prob`] over `p` on a log grid of `[1, s^3]`
/// (or `[1, e]` when `s^3 < e`).
pub fn optimal_p(s: f64, big_t: f64, points: usize) -> Result<(f64, f64)> {
    check_pos("s", s)?;
    if points < 2 {
        return Err(invalid("need at least two grid points"));
    }
    let top = (3.0 * s.ln()).max(1.0);
    let mut best = (1.0, upper_bound_log_prob(s, big_t, 1.0, 0.0)?);
    for k in 1..points {
        let p = (top * k as f64 / (points - 1) as f64).exp();
        let v = upper_bound_log_prob(s, big_t, p, 0.0)?;
        if v < best.1 {
            best = (p, v);
        }
    }
    Ok(best)
}

/// Asymptotic regimes of `log P(Y_T < -s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `s ~ T^{2/3}`: `-T^2 F_1(pi^2 s T^{-2/3}) / pi^6`.
    LargeDeviation,
    /// `s -> inf` at fixed `T`: seven-term polynomial in `s` and `T`.
    DeepTail,
    /// `s T^{-2/3} -> 0`: `-s^3/12 - log(s)/8`.
    CrossoverSmall,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "large_deviation" => Ok(Regime::LargeDeviation),
            "deep_tail" => Ok(Regime::DeepTail),
            "crossover_small" => Ok(Regime::CrossoverSmall),
            other => Err(invalid(format!(
                "unknown regime `{other}` (expected large_deviation, deep_tail or crossover_small)"
            ))),
        }
    }
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::LargeDeviation => "large_deviation",
            Regime::DeepTail => "deep_tail",
            Regime::CrossoverSmall => "crossover_small",
        }
    }
}

pub fn regime_expansion(s: f64, big_t: f64, regime: Regime) -> Result<f64> {
    check_pos("s", s)?;
    check_pos("T", big_t)?;
    Ok(match regime {
        Regime::LargeDeviation => {
            let y = PI * PI * s * big_t.powf(-2.0 / 3.0);
            -big_t * big_t * f1(y)? / PI.powi(6)
        }
        Regime::DeepTail => {
            let t13 = big_t.cbrt();
            -4.0 * s.powf(2.5) * t13 / (15.0 * PI) + s * s * t13 * t13 / (2.0 * PI * PI)
                - 2.0 * s.powf(1.5) * big_t / (3.0 * PI.powi(3))
                + 2.0 * s * big_t * t13 / (3.0 * PI.powi(4))
                + s.sqrt() * big_t * t13 * t13 / (2.0 * PI.powi(5))
                + 4.0 * big_t * big_t / (15.0 * PI.powi(6))
                - s.powf(1.5) * s.ln() / PI
        }
        Regime::CrossoverSmall => -s * s * s / 12.0 - s.ln() / 8.0,
    })
}

/// `log Q(s T^{-1/6}, T^{-1/2}) + G(s, T)` for the logistic weight.
pub fn compare_g_vs_determinant(s: f64, big_t: f64) -> Result<f64> {
    let (x, t) = kpz_to_determinant(s, big_t)?;
    let model = make_kpz_model();
    let det = log_q_sigma(&DetJob::new(&model, x, t))?;
    Ok(det.log_det + G(s, big_t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::logq_kpz_asymptotic;

    #[test]
    fn g_is_minus_log_q_expansion() {
        for (s, tt) in [(1.0, 1.0), (4.0, 1.0), (3.0, 4.0), (20.0, 100.0)] {
            let (x, t) = kpz_to_determinant(s, tt).unwrap();
            let q = logq_kpz_asymptotic(x, t).unwrap().total;
            let g = G(s, tt).unwrap();
            assert!((g + q).abs() < 1e-12 * g.abs().max(1.0), "{s} {tt}: {g} vs {q}");
        }
        assert!(G(0.0, 1.0).is_err());
    }

    #[test]
    fn g_small_argument_regime() {
        for tt in [1e3, 1e4] {
            let d = G(1.0, tt).unwrap() - (1.0 / 12.0);
            assert!(d.abs() < 3.0, "{d}");
        }
    }

    #[test]
    fn round_trip() {
        for (s, tt) in [(1.0, 1.0), (2.5, 4.0), (100.0, 0.5)] {
            let (x, t) = kpz_to_determinant(s, tt).unwrap();
            let (s2, t2) = determinant_to_kpz(x, t).unwrap();
            assert!((s2 - s).abs() < 1e-14 * s && (t2 - tt).abs() < 1e-14 * tt);
        }
    }

    #[test]
    fn upper_bound_examples() {
        let (s, tt) = (10.0, 10.0);
        assert_eq!(upper_bound_log_prob(s, tt, 1.0, 0.5).unwrap(), 1.0 - G(s, tt).unwrap() + 0.5);
        assert!(upper_bound_log_prob(s, tt, 3.0, 1.0).unwrap() > upper_bound_log_prob(s, tt, 3.0, 0.0).unwrap());
        assert!(upper_bound_log_prob(s, tt, 0.5, 0.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let (s, tt) = (10.0, 10.0);
        let lo = lower_bound_log_prob(s, tt, 0.1, 0.0).unwrap();
        assert!(lo <= upper_bound_log_prob(s, tt, 1.0, 0.0).unwrap());
        assert!(lower_bound_log_prob(s, tt, 0.2, 0.0).unwrap() < lo);
        assert!(lower_bound_log_prob(s, tt, 0.0, 0.0).is_err());
    }

    #[test]
    fn regime_tags() {
        assert_eq!("deep_tail".parse::<Regime>().unwrap(), Regime::DeepTail);
        assert!("shallow".parse::<Regime>().is_err());
        for r in [Regime::LargeDeviation, Regime::DeepTail, Regime::CrossoverSmall] {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), r);
        }
        let (s, tt) = (3.0f64, 8.0f64);
        let y = PI * PI * s * tt.powf(-2.0 / 3.0);
        assert_eq!(regime_expansion(s, tt, Regime::LargeDeviation).unwrap(), -tt * tt * f1(y).unwrap() / PI.powi(6));
        assert_eq!(regime_expansion(s, tt, Regime::CrossoverSmall).unwrap(), -9.0 / 4.0 - s.ln() / 8.0);
    }
}
