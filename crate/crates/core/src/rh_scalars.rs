//! Scalar quantities of the steepest-descent analysis: band endpoints and
//! the coefficients `g_1`, `d_1`, `chi`, `f_1`, `f_2`.
//!
//! Two regimes are covered. For small `xt` the endpoint `alpha(xt)` has a
//! closed form and `d_1`, `chi` are integrals of
//! `W(s; x) = -log F(x^2 s) + x^2 V(s)` with `V(s) = c_+ s 1_{s > 0}`.
//! For large `xt` the endpoint `a(x, t)` solves
//! `int_{-inf}^a (log F)'(x s / t) / sqrt(a - s) ds = pi sqrt(xt) (1 - a)`.
//!
//! All integrals are taken in the variable `r` at which `F` is evaluated.
//! Square-root endpoint singularities are removed by `r = end - tau^2`, and
//! the exponentially small tails of `F` beyond `|r| ~ 45 / rate` are dropped.

use std::f64::consts::PI;

use crate::asymptotics::{shape_a0, shape_a1, shape_a2, ModelConstants};
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::sigma::{SigmaModel, TailConstants, Weight};

/// Default upper limit of `xt` for the small-`xt` formulas.
pub const DEFAULT_DELTA: f64 = 0.25;
/// Default lower limit of `x` for the large-`xt` formulas.
pub const DEFAULT_K: f64 = 8.0;
/// Bisection steps allowed when solving for `a(x, t)`.
pub const MAX_BISECTIONS: usize = 200;

/// Exponent at which a tail `c e^{-k |r|}` is treated as zero: `e^{-45} ~ 3e-20`.
const TAIL_EXPONENT: f64 = 45.0;

/// Validity constants and quadrature tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhOptions {
    pub delta: f64,
    pub k: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for RhOptions {
    fn default() -> Self {
        RhOptions { delta: DEFAULT_DELTA, k: DEFAULT_K, abs_tol: 1e-15, rel_tol: 1e-13 }
    }
}

impl RhOptions {
    /// Small-`xt` formulas apply for `xt <= delta`.
    pub fn small_regime(&self, x: f64, t: f64) -> bool {
        x * t <= self.delta
    }

    /// Large-`xt` formulas apply for `x >= k` and `xt >= delta`.
    pub fn large_regime(&self, x: f64, t: f64) -> bool {
        x >= self.k && x * t >= self.delta
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    ensure_finite(name, v)?;
    if v <= 0.0 {
        return Err(invalid(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

/// Truncation points `(left, right)` in `r` beyond which the tails of
/// `log F` are below `e^{-45}`.
fn tail_cuts(c: &TailConstants) -> (f64, f64) {
    let left = (TAIL_EXPONENT + c.c_minus_prime.ln().max(0.0)) / c.c_minus;
    (-left, TAIL_EXPONENT / c.epsilon)
}

// ---------------------------------------------------------------------------
// Small xt

/// `alpha(xt) = pi^2 / (sqrt(c_+^2 + pi^2 xt) + c_+)^2`, equal to
/// `(2c^2 + pi^2 xt - 2c sqrt(c^2 + pi^2 xt)) / (pi^2 (xt)^2)`.
pub fn alpha_endpoint(xt: f64, c_plus: f64) -> Result<f64> {
    check_pos("xt", xt)?;
    check_pos("c_plus", c_plus)?;
    let d = (c_plus * c_plus + PI * PI * xt).sqrt() + c_plus;
    Ok(PI * PI / (d * d))
}

/// Residual `c_+ sqrt(alpha) / pi - (1 - alpha xt) / 2` of the equation
/// defining `alpha`.
pub fn alpha_defining_residual(xt: f64, c_plus: f64) -> Result<f64> {
    let a = alpha_endpoint(xt, c_plus)?;
    Ok(c_plus * a.sqrt() / PI - (1.0 - a * xt) / 2.0)
}

/// `g_1 = alpha (sqrt(alpha) c_+ / (6 pi) - 1/4)`.
pub fn g1_small(xt: f64, c_plus: f64) -> Result<f64> {
    let a = alpha_endpoint(xt, c_plus)?;
    Ok(a * (a.sqrt() * c_plus / (6.0 * PI) - 0.25))
}

/// `(f_1, f_2)` of the conformal map at `alpha`:
/// `f_1 = (c/(pi sqrt(alpha)) + xt)^{2/3}`,
/// `f_2 = -(2c / (15 pi alpha^{3/2})) (c/(pi sqrt(alpha)) + xt)^{-1/3}`.
pub fn f_coeffs_small(xt: f64, c_plus: f64) -> Result<(f64, f64)> {
    let a = alpha_endpoint(xt, c_plus)?;
    let base = c_plus / (PI * a.sqrt()) + xt;
    let f1 = base.powf(2.0 / 3.0);
    let f2 = -2.0 * c_plus / (15.0 * PI * a.powf(1.5)) * base.powf(-1.0 / 3.0);
    Ok((f1, f2))
}

/// `W` with the linear growth and the constant `log c'_+` removed on the
/// right: `-log F(r)` for `r <= 0` and `-(log F(r) - c_+ r - log c'_+)` for
/// `r > 0`. Decays on both sides with a jump of `log c'_+` at the origin.
fn w_reduced(model: &SigmaModel, r: f64) -> f64 {
    if r > 0.0 {
        -model.log_f_excess(r)
    } else {
        -model.log_f(r)
    }
}

/// `W(zeta; x) = -log F(x^2 zeta) + x^2 V(zeta)`.
pub fn w_function(zeta: f64, x: f64, model: &SigmaModel) -> Result<f64> {
    ensure_finite("zeta", zeta)?;
    check_pos("x", x)?;
    let c = model.tail_constants()?;
    let r = x * x * zeta;
    let jump = if zeta > 0.0 { -c.c_plus_prime.ln() } else { 0.0 };
    Ok(jump + w_reduced(model, r))
}

/// `d_1 = (1/2pi) int_{-inf}^{alpha} W(s; x) / sqrt(alpha - s) ds`.
pub fn d1(x: f64, t: f64, model: &SigmaModel) -> Result<f64> {
    d1_with(x, t, model, &RhOptions::default())
}

pub fn d1_with(x: f64, t: f64, model: &SigmaModel, opts: &RhOptions) -> Result<f64> {
    check_pos("x", x)?;
    let c = model.tail_constants()?;
    let alpha = alpha_endpoint(x * t, c.c_plus)?;
    let x2 = x * x;
    let (left, right) = tail_cuts(&c);
    let neg = integrate_adaptive(
        |r| w_reduced(model, r) / (alpha - r / x2).sqrt(),
        left,
        0.0,
        &[],
        opts.abs_tol,
        opts.rel_tol,
    );
    // s = alpha - tau^2 on (0, alpha): the weight becomes 2 x^2 dtau
    let ra = alpha.sqrt();
    let tau_cut = (alpha - right / x2).max(0.0).sqrt();
    let pos = integrate_adaptive(
        |tau| 2.0 * x2 * w_reduced(model, x2 * (alpha - tau * tau)),
        0.0,
        ra,
        &[tau_cut],
        opts.abs_tol,
        opts.rel_tol,
    );
    let value = (-2.0 * ra * c.c_plus_prime.ln() + (neg.value + pos.value) / x2) / (2.0 * PI);
    ensure_finite("d1", value)?;
    Ok(value)
}

/// `chi = (1/2pi) int_{-inf}^{alpha} (W(alpha; x) - W(s; x)) / (alpha - s)^{3/2} ds`.
pub fn chi(x: f64, t: f64, model: &SigmaModel) -> Result<f64> {
    chi_with(x, t, model, &RhOptions::default())
}

pub fn chi_with(x: f64, t: f64, model: &SigmaModel, opts: &RhOptions) -> Result<f64> {
    check_pos("x", x)?;
    let c = model.tail_constants()?;
    let alpha = alpha_endpoint(x * t, c.c_plus)?;
    let x2 = x * x;
    let ra = alpha.sqrt();
    let (left, right) = tail_cuts(&c);
    let w_end = w_reduced(model, x2 * alpha);
    // s < 0: the constant part integrates to 2 w_end / sqrt(alpha)
    let neg = integrate_adaptive(
        |r| w_reduced(model, r) / (alpha - r / x2).powf(1.5),
        left,
        0.0,
        &[],
        opts.abs_tol,
        opts.rel_tol,
    );
    // 0 < s < alpha with s = alpha - tau^2 turns ds / (alpha - s)^{3/2} into 2 dtau / tau^2
    let tau_cut = (alpha - right / x2).max(0.0).sqrt();
    let pos = integrate_adaptive(
        |tau| 2.0 * (w_end - w_reduced(model, x2 * (alpha - tau * tau))) / (tau * tau),
        0.0,
        ra,
        &[tau_cut],
        opts.abs_tol,
        opts.rel_tol,
    );
    let bracket = 2.0 * w_end / ra - neg.value / x2 + pos.value;
    let value = -c.c_plus_prime.ln() / (PI * ra) + bracket / (2.0 * PI);
    ensure_finite("chi", value)?;
    Ok(value)
}

/// The small-`xt` scalars at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RHScalars {
    pub x: f64,
    pub t: f64,
    pub alpha: f64,
    pub g1_small: f64,
    pub d1: f64,
    pub chi: f64,
    pub f1_small: f64,
    pub f2_small: f64,
    /// `W(alpha; x)`.
    pub w_at_alpha: f64,
    /// `V(alpha) = c_+ alpha`.
    pub v_at_alpha: f64,
    /// Whether `xt <= delta`.
    pub in_regime: bool,
}

pub fn rh_scalars(x: f64, t: f64, model: &SigmaModel, opts: &RhOptions) -> Result<RHScalars> {
    check_pos("x", x)?;
    check_pos("t", t)?;
    let c = model.tail_constants()?;
    let xt = x * t;
    let alpha = alpha_endpoint(xt, c.c_plus)?;
    let (f1_small, f2_small) = f_coeffs_small(xt, c.c_plus)?;
    Ok(RHScalars {
        x,
        t,
        alpha,
        g1_small: g1_small(xt, c.c_plus)?,
        d1: d1_with(x, t, model, opts)?,
        chi: chi_with(x, t, model, opts)?,
        f1_small,
        f2_small,
        w_at_alpha: w_function(alpha, x, model)?,
        v_at_alpha: c.c_plus * alpha,
        in_regime: opts.small_regime(x, t),
    })
}

// ---------------------------------------------------------------------------
// Large xt

/// `(log F)' - c_+ 1_{r > 0}`.
fn v_reduced(model: &SigmaModel, c_plus: f64, r: f64) -> f64 {
    let d = model.log_f_d1(r);
    if r > 0.0 {
        d - c_plus
    } else {
        d
    }
}

/// `int_{left}^{end} f(r) (end - r)^{power} dr` for `power = +-1/2`, where
/// `f` decays for `r > right`.
///
/// The piece on `(0, end)` uses `r = end - tau^2`; `f` may jump at `r = 0`.
fn endpoint_weighted(
    f: &dyn Fn(f64) -> f64,
    end: f64,
    half_power: Power,
    left: f64,
    right: f64,
    opts: &RhOptions,
) -> f64 {
    let weight = |d: f64| match half_power {
        Power::MinusHalf => 1.0 / d.sqrt(),
        Power::PlusHalf => d.sqrt(),
    };
    let lower_top = end.min(0.0);
    let lower = if end > 0.0 {
        integrate_adaptive(|r| f(r) * weight(end - r), left, lower_top, &[], opts.abs_tol, opts.rel_tol).value
    } else {
        // end <= 0: substitute on the whole range near the endpoint
        let span = (end - left).sqrt();
        integrate_adaptive(
            |tau| 2.0 * tau * f(end - tau * tau) * weight(tau * tau),
            0.0,
            span,
            &[],
            opts.abs_tol,
            opts.rel_tol,
        )
        .value
    };
    if end <= 0.0 {
        return lower;
    }
    let top = end.sqrt();
    let cut = (end - right).max(0.0).sqrt();
    let upper = integrate_adaptive(
        |tau| {
            let g = match half_power {
                Power::MinusHalf => 2.0,
                Power::PlusHalf => 2.0 * tau * tau,
            };
            g * f(end - tau * tau)
        },
        cut,
        top,
        &[],
        opts.abs_tol,
        opts.rel_tol,
    )
    .value;
    lower + upper
}

#[derive(Debug, Clone, Copy)]
enum Power {
    MinusHalf,
    PlusHalf,
}

fn check_large_inputs(x: f64, t: f64, model: &SigmaModel) -> Result<TailConstants> {
    check_pos("x", x)?;
    check_pos("t", t)?;
    model.tail_constants()
}

/// The endpoint equation as an increasing function of `a`:
/// `h(a) = int_{-inf}^a (log F)'(x s / t) / sqrt(a - s) ds - pi sqrt(xt) (1 - a)`.
pub fn endpoint_residual(a: f64, x: f64, t: f64, model: &SigmaModel) -> Result<f64> {
    let c = check_large_inputs(x, t, model)?;
    check_pos("a", a)?;
    Ok(endpoint_h(a, x, t, model, &c, &RhOptions::default()))
}

fn endpoint_h(a: f64, x: f64, t: f64, model: &SigmaModel, c: &TailConstants, opts: &RhOptions) -> f64 {
    let lambda = x / t;
    let (left, right) = tail_cuts(c);
    let v = |r: f64| v_reduced(model, c.c_plus, r);
    let reduced = endpoint_weighted(&v, lambda * a, Power::MinusHalf, left, right, opts);
    2.0 * c.c_plus * a.sqrt() + reduced / lambda.sqrt() - PI * (x * t).sqrt() * (1.0 - a)
}

/// `M = ||v||_1 + 2 ||v||_inf` for `v = (log F)' - c_+ 1_{r > 0}`.
pub fn endpoint_bound_constant(model: &SigmaModel) -> Result<f64> {
    let c = model.tail_constants()?;
    let opts = RhOptions::default();
    let (left, right) = tail_cuts(&c);
    let v = |r: f64| v_reduced(model, c.c_plus, r).abs();
    let l1 = integrate_adaptive(v, left, 0.0, &[], opts.abs_tol, opts.rel_tol).value
        + integrate_adaptive(v, 0.0, right, &[], opts.abs_tol, opts.rel_tol).value;
    // (log F)' increases from 0 to c_+, so |v| peaks at the jump
    let d0 = model.log_f_d1(0.0);
    Ok(l1 + 2.0 * d0.max(c.c_plus - d0))
}

/// Bracket `[a_-, a_+]` from `|h(a) - 2 c sqrt(a) + pi sqrt(xt)(1 - a)| <= M sqrt(t/x)`.
/// `None` when the lower bound degenerates (`pi^2 x t <= pi M t - c^2`).
pub fn constructive_bracket(x: f64, t: f64, c_plus: f64, m: f64) -> Option<(f64, f64)> {
    let root = |k: f64| {
        // sqrt(a) solving pi sqrt(xt) a + 2 c sqrt(a) - pi sqrt(xt) = k sqrt(t/x)
        let q = PI * PI * x * t + PI * k * t;
        if q + c_plus * c_plus < 0.0 {
            return None;
        }
        let b = q / (PI * (x * t).sqrt() * (c_plus + (c_plus * c_plus + q).sqrt()));
        Some(b)
    };
    let lo = root(-m)?;
    let hi = root(m)?;
    if lo > 0.0 && hi > lo {
        Some((lo * lo, hi * hi))
    } else {
        None
    }
}

/// Where the bracket for `a(x, t)` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketSource {
    Constructive,
    Fallback,
}

/// Root of the endpoint equation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointSolution {
    pub a: f64,
    /// `h(a)`.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub bracket_source: BracketSource,
    /// Bisection plus Newton steps.
    pub iterations: usize,
    /// The constant `M` used for the bracket.
    pub bound: f64,
    /// Whether `x >= K` and `xt >= delta`.
    pub in_regime: bool,
}

impl EndpointSolution {
    /// `1e-11 (1 + pi sqrt(xt))`.
    pub fn tolerance(x: f64, t: f64) -> f64 {
        1e-11 * (1.0 + PI * (x * t).sqrt())
    }
}

pub fn solve_endpoint_a(x: f64, t: f64, model: &SigmaModel) -> Result<EndpointSolution> {
    solve_endpoint_a_with(x, t, model, &RhOptions::default())
}

pub fn solve_endpoint_a_with(x: f64, t: f64, model: &SigmaModel, opts: &RhOptions) -> Result<EndpointSolution> {
    let c = check_large_inputs(x, t, model)?;
    let h = |a: f64| endpoint_h(a, x, t, model, &c, opts);
    let m = endpoint_bound_constant(model)?;
    let mut source = BracketSource::Constructive;
    let constructive = constructive_bracket(x, t, c.c_plus, m).filter(|&(l, u)| h(l) <= 0.0 && h(u) >= 0.0);
    let (mut lo, mut hi) = match constructive {
        Some(b) => b,
        None => {
            source = BracketSource::Fallback;
            let (lo, hi) = (1e-6, 1.0 + m / (PI * x) + 1.0);
            let (h_lo, h_hi) = (h(lo), h(hi));
            if !(h_lo <= 0.0 && h_hi >= 0.0) {
                return Err(Error::EndpointBracket { lo, hi, h_lo, h_hi });
            }
            (lo, hi)
        }
    };
    let bracket = (lo, hi);
    let tol = EndpointSolution::tolerance(x, t);
    let mut iterations = 0;
    // bisect to a narrow interval, then polish with secant-on-derivative Newton
    while iterations < MAX_BISECTIONS && hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        let hm = h(mid);
        iterations += 1;
        if hm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if hm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut a = 0.5 * (lo + hi);
    let mut ha = h(a);
    let mut newton_steps = 0;
    while ha.abs() > 0.01 * tol && newton_steps < 20 && iterations < MAX_BISECTIONS {
        iterations += 1;
        newton_steps += 1;
        let step = 1e-7 * a;
        let slope = (h(a + step) - h(a - step)) / (2.0 * step);
        let mut next = a - ha / slope;
        if !(next > lo && next < hi) || !slope.is_finite() || slope <= 0.0 {
            next = 0.5 * (lo + hi);
        }
        let hn = h(next);
        if hn < 0.0 {
            lo = lo.max(next);
        } else {
            hi = hi.min(next);
        }
        if hn.abs() >= ha.abs() && ha.abs() <= tol {
            break;
        }
        a = next;
        ha = hn;
    }
    // plain bisection if Newton stalled outside tolerance
    while ha.abs() > tol && iterations < MAX_BISECTIONS && hi > lo {
        iterations += 1;
        a = 0.5 * (lo + hi);
        ha = h(a);
        if ha < 0.0 {
            lo = a;
        } else {
            hi = a;
        }
    }
    ensure_finite("a", a)?;
    Ok(EndpointSolution {
        a,
        residual: ha,
        bracket,
        bracket_source: source,
        iterations,
        bound: m,
        in_regime: opts.large_regime(x, t),
    })
}

/// `a_0(y) + (t^{1/2}/x^{3/2}) a_1(y) + (t^{3/2}/x^{5/2}) a_2(y)`, `y = pi^2 xt / c_+^2`.
pub fn endpoint_a_expansion(x: f64, t: f64, model: &SigmaModel) -> Result<f64> {
    check_large_inputs(x, t, model)?;
    endpoint_a_expansion_from(x, t, &ModelConstants::from_model(model)?)
}

pub fn endpoint_a_expansion_from(x: f64, t: f64, c: &ModelConstants) -> Result<f64> {
    check_pos("x", x)?;
    check_pos("t", t)?;
    let y = c.scaled(x, t);
    Ok(shape_a0(y)?
        + t.sqrt() / x.powf(1.5) * shape_a1(y, c.c_plus_prime)?
        + t.powf(1.5) / x.powf(2.5) * shape_a2(y, c.c_plus, c.c_plus_prime, c.j)?)
}

/// `g_1` split as `(a^2/4 - a/2, integral term)`.
pub fn g1_large_parts(sol: &EndpointSolution, x: f64, t: f64, model: &SigmaModel) -> Result<(f64, f64)> {
    g1_large_parts_with(sol, x, t, model, &RhOptions::default())
}

pub fn g1_large_parts_with(
    sol: &EndpointSolution,
    x: f64,
    t: f64,
    model: &SigmaModel,
    opts: &RhOptions,
) -> Result<(f64, f64)> {
    let c = check_large_inputs(x, t, model)?;
    let a = sol.a;
    let lambda = x / t;
    let end = lambda * a;
    let (left, right) = tail_cuts(&c);
    let v = |r: f64| v_reduced(model, c.c_plus, r);
    let reduced = endpoint_weighted(&v, end, Power::PlusHalf, left, right, opts);
    // c_+ 1_{r>0} contributes c_+ (2/3) a^{3/2} after rescaling
    let integral = 2.0 / 3.0 * c.c_plus * a.powf(1.5) + reduced / lambda.powf(1.5);
    let quadratic = a * a / 4.0 - a / 2.0;
    let tail = integral / (PI * (x * t).sqrt());
    ensure_finite("g1", quadratic + tail)?;
    Ok((quadratic, tail))
}

/// `g_1 = a^2/4 - a/2 + (1/(pi sqrt(xt))) int_{-inf}^a (log F)'(x s/t) sqrt(a - s) ds`.
pub fn g1_large(x: f64, t: f64, model: &SigmaModel) -> Result<f64> {
    let sol = solve_endpoint_a(x, t, model)?;
    let (q, i) = g1_large_parts(&sol, x, t, model)?;
    Ok(q + i)
}

/// `(f_1, f_2)` at the solved endpoint.
pub fn f_coeffs_large_at(sol: &EndpointSolution, x: f64, t: f64, model: &SigmaModel) -> Result<(f64, f64)> {
    f_coeffs_large_with(sol, x, t, model, &RhOptions::default())
}

pub fn f_coeffs_large_with(
    sol: &EndpointSolution,
    x: f64,
    t: f64,
    model: &SigmaModel,
    opts: &RhOptions,
) -> Result<(f64, f64)> {
    let (i2, i3) = curvature_integrals(sol, x, t, model, opts)?;
    let f1 = (1.0 + x.sqrt() / (PI * t.powf(1.5)) * i2).powf(2.0 / 3.0);
    let f2 = 4.0 * x.powf(1.5) / (15.0 * PI * t.powf(2.5) * f1.sqrt()) * i3;
    ensure_finite("f1", f1)?;
    ensure_finite("f2", f2)?;
    Ok((f1, f2))
}

/// `int_{-inf}^a (log F)^{(k)}(x s / t) / sqrt(a - s) ds` for `k = 2, 3`.
pub fn curvature_integrals(
    sol: &EndpointSolution,
    x: f64,
    t: f64,
    model: &SigmaModel,
    opts: &RhOptions,
) -> Result<(f64, f64)> {
    let c = check_large_inputs(x, t, model)?;
    let lambda = x / t;
    let end = lambda * sol.a;
    let (left, right) = tail_cuts(&c);
    let d2 = |r: f64| model.log_f_d2(r);
    let d3 = |r: f64| model.log_f_d3(r);
    let scale = lambda.sqrt();
    Ok((
        endpoint_weighted(&d2, end, Power::MinusHalf, left, right, opts) / scale,
        endpoint_weighted(&d3, end, Power::MinusHalf, left, right, opts) / scale,
    ))
}

pub fn f_coeffs_large(x: f64, t: f64, model: &SigmaModel) -> Result<(f64, f64)> {
    let sol = solve_endpoint_a(x, t, model)?;
    f_coeffs_large_at(&sol, x, t, model)
}

/// The large-`xt` scalars at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScalars {
    pub x: f64,
    pub t: f64,
    pub endpoint: EndpointSolution,
    pub expansion: f64,
    pub g1: f64,
    pub f1: f64,
    pub f2: f64,
}

pub fn large_scalars(x: f64, t: f64, model: &SigmaModel, opts: &RhOptions) -> Result<LargeScalars> {
    let endpoint = solve_endpoint_a_with(x, t, model, opts)?;
    let (q, i) = g1_large_parts_with(&endpoint, x, t, model, opts)?;
    let (f1, f2) = f_coeffs_large_with(&endpoint, x, t, model, opts)?;
    Ok(LargeScalars { x, t, endpoint, expansion: endpoint_a_expansion(x, t, model)?, g1: q + i, f1, f2 })
}

// ---------------------------------------------------------------------------
// Expansion residuals

/// `d_1 + sqrt(alpha) log c'_+ / pi - j / (x^2 sqrt(alpha))`, of order `x^{-4}`
/// at fixed `xt`.
pub fn small_d1_residual(x: f64, t: f64, model: &SigmaModel) -> Result<f64> {
    let c = ModelConstants::from_model(model)?;
    let al = alpha_endpoint(x * t, c.c_plus)?;
    Ok(d1(x, t, model)? + al.sqrt() * c.c_plus_prime.ln() / PI - c.j / (x * x * al.sqrt()))
}

/// `chi + log c'_+ / (pi sqrt(alpha))`, of order `x^{-2}` at fixed `xt`.
pub fn small_chi_residual(x: f64, t: f64, model: &SigmaModel) -> Result<f64> {
    let c = ModelConstants::from_model(model)?;
    let al = alpha_endpoint(x * t, c.c_plus)?;
    Ok(chi(x, t, model)? + c.c_plus_prime.ln() / (PI * al.sqrt()))
}

/// `x^2 (1/4 + g_1) / t` minus its seven-term expansion in the shape
/// functions, of order `(x/t)^{-3/2}`.
pub fn large_g1_residual(s: &LargeScalars, c: &ModelConstants) -> Result<f64> {
    let (x, t) = (s.x, s.t);
    let y = c.scaled(x, t);
    let a0 = shape_a0(y)?;
    let a1 = shape_a1(y, c.c_plus_prime)?;
    let a2 = shape_a2(y, c.c_plus, c.c_plus_prime, c.j)?;
    let (cp, lc, sa) = (c.c_plus, c.c_plus_prime.ln(), a0.sqrt());
    let lhs = x * x * (0.25 + s.g1) / t;
    let rhs = (a0 - 1.0).powi(2) * x * x / (4.0 * t)
        + 2.0 * cp / (3.0 * PI) * a0.powf(1.5) * (x / t).powf(1.5)
        + ((a0 - 1.0) * a1 / 2.0 + lc / PI * sa) * (x / t).sqrt()
        + cp / PI * a1 * sa / t
        + ((a0 - 1.0) * a2 / 2.0 - c.j / sa) * (t / x).sqrt()
        + (a1 * a1 / 4.0 + cp / PI * a2 * sa + lc / (2.0 * PI * sa) * a1) / x
        + cp / (4.0 * PI) * (a1 * a1 / sa) / (t.sqrt() * x.powf(1.5));
    Ok(lhs - rhs)
}

/// `-5 f_2 / (32 f_1^{5/2}) - (1 + sqrt(1+y)) / (48 (1+y))`, of order
/// `t^{1/2} x^{-3/2}`.
pub fn large_f_residual(s: &LargeScalars, c: &ModelConstants) -> Result<f64> {
    let y = c.scaled(s.x, s.t);
    Ok(-5.0 * s.f2 / (32.0 * s.f1.powf(2.5)) - (1.0 + (1.0 + y).sqrt()) / (48.0 * (1.0 + y)))
}
