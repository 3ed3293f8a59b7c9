//! Cross-verification suites: exact identities, scaled-residual bounds,
//! oracle agreement and structural invariants, each with a pinned tolerance
//! and a runtime budget.

use std::f64::consts::PI;
use std::str::FromStr;
use std::time::Instant;

use serde_json::json;

use crate::asymptotics::{
    consistency_identities, f1, f2, logq_asymptotic, logq_kpz_asymptotic, region_iii_partial, shape_a0, tw_tail,
    u_asymptotic, ModelConstants,
};
use crate::error::{invalid, Error, Result};
use crate::fredholm::{kdv_residual, log_q_finite_temp, log_q_sigma, log_tracy_widom, u_sigma_fd, DetJob, DetOptions};
use crate::kpz_tails::{compare_g_vs_determinant, lower_bound_log_prob, upper_bound_log_prob, DEFAULT_EPSILON, G};
use crate::parallel::with_jobs;
use crate::report::to_csv;
use crate::rh_scalars::{
    alpha_defining_residual, alpha_endpoint, endpoint_a_expansion, large_f_residual, large_g1_residual, large_scalars,
    small_chi_residual, small_d1_residual, solve_endpoint_a, RhOptions,
};
use crate::sigma::{j_sigma, make_kpz_model, make_laplace_model, make_zero_model, LaplaceMeasureSpec, SigmaModel};
use crate::sweep::{linear_range, run_sweep, Axes, SweepSpec};

/// Number of criteria.
pub const CRITERIA: u8 = 11;

/// Groups of criteria run together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Props,
    Endpoints,
    Determinants,
    Tails,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Suite::Identities),
            "props" => Ok(Suite::Props),
            "endpoints" => Ok(Suite::Endpoints),
            "determinants" => Ok(Suite::Determinants),
            "tails" => Ok(Suite::Tails),
            "all" => Ok(Suite::All),
            other => Err(invalid(format!(
                "unknown suite `{other}` (expected identities, props, endpoints, determinants, tails or all)"
            ))),
        }
    }
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Props => "props",
            Suite::Endpoints => "endpoints",
            Suite::Determinants => "determinants",
            Suite::Tails => "tails",
            Suite::All => "all",
        }
    }

    pub fn criteria(&self) -> Vec<u8> {
        match self {
            Suite::Identities => vec![1, 2],
            Suite::Props => vec![7],
            Suite::Endpoints => vec![6],
            Suite::Determinants => vec![3, 4, 5, 8, 10, 11],
            Suite::Tails => vec![9],
            Suite::All => (1..=CRITERIA).collect(),
        }
    }
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    /// Error message when the quantity could not be computed.
    pub note: Option<String>,
}

impl CheckOutcome {
    /// Passes when `value <= bound`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckOutcome { name: name.into(), passed: value <= bound, value, tolerance: bound, note: None }
    }

    /// Passes when `value < bound`; NaN fails.
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckOutcome { name: name.into(), passed: value < bound, value, tolerance: bound, note: None }
    }

    pub fn failed(name: impl Into<String>, bound: f64, err: &Error) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            tolerance: bound,
            note: Some(err.to_string()),
        }
    }

    fn from_result(name: impl Into<String>, value: Result<f64>, bound: f64, strict: bool) -> Self {
        match value {
            Ok(v) if strict => CheckOutcome::below(name, v, bound),
            Ok(v) => CheckOutcome::at_most(name, v, bound),
            Err(e) => CheckOutcome::failed(name, bound, &e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub checks: Vec<CheckOutcome>,
    /// Wall-clock seconds.
    pub runtime: f64,
    pub budget: Option<f64>,
    pub passed: bool,
}

impl CriterionOutcome {
    /// `criterion  3 PASS tracy_widom_tail (4/4 checks, 1.234 s)`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let mut line = format!(
            "criterion {:>2} {} {} ({}/{} checks, {:.3} s",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            ok,
            self.checks.len(),
            self.runtime
        );
        if let Some(b) = self.budget {
            line.push_str(&format!(" of {b} s"));
        }
        line.push(')');
        for c in self.checks.iter().filter(|c| !c.passed) {
            line.push_str(&format!("\n    failed {}: value {:e}, tolerance {:e}", c.name, c.value, c.tolerance));
            if let Some(n) = &c.note {
                line.push_str(&format!(" ({n})"));
            }
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suite: Suite,
    pub criteria: Vec<CriterionOutcome>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let num = |v: f64| if v.is_finite() { json!(v) } else { serde_json::Value::Null };
        let criteria: Vec<_> = self
            .criteria
            .iter()
            .map(|c| {
                let checks: Vec<_> = c
                    .checks
                    .iter()
                    .map(|k| {
                        json!({
                            "name": k.name,
                            "status": if k.passed { "pass" } else { "fail" },
                            "value": num(k.value),
                            "tolerance": num(k.tolerance),
                            "note": k.note,
                        })
                    })
                    .collect();
                json!({
                    "criterion": c.id,
                    "name": c.name,
                    "status": if c.passed { "pass" } else { "fail" },
                    "runtime": c.runtime,
                    "budget": c.budget,
                    "checks": checks,
                })
            })
            .collect();
        let doc = json!({ "suite": self.suite.as_str(), "passed": self.passed, "criteria": criteria });
        serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n"
    }
}

pub fn run_suite(suite: Suite) -> Result<VerifyReport> {
    let criteria = suite.criteria().into_iter().map(run_criterion).collect::<Result<Vec<_>>>()?;
    let passed = criteria.iter().all(|c| c.passed);
    Ok(VerifyReport { suite, criteria, passed })
}

type CriterionFn = fn() -> Vec<CheckOutcome>;

/// Runs criterion `id` in `1..=11`, including its runtime budget.
pub fn run_criterion(id: u8) -> Result<CriterionOutcome> {
    let (name, budget, f): (&'static str, Option<f64>, CriterionFn) = match id {
        1 => ("exact_identities", Some(1.0), exact_identities),
        2 => ("model_constants", None, model_constants),
        3 => ("tracy_widom_tail", Some(30.0), tracy_widom_tail),
        4 => ("representation_equivalence", Some(120.0), representation_equivalence),
        5 => ("gap_boundedness", Some(180.0), gap_boundedness),
        6 => ("endpoint_expansion_rate", Some(60.0), endpoint_expansion_rate),
        7 => ("residual_boundedness", Some(60.0), residual_boundedness),
        8 => ("small_time_cross_check", Some(60.0), small_time_cross_check),
        9 => ("tail_gap", Some(180.0), tail_gap),
        10 => ("spectral_invariants", Some(60.0), spectral_invariants),
        11 => ("kdv_residual", Some(120.0), kdv_check),
        _ => return Err(invalid(format!("criterion must be in 1..={CRITERIA}, got {id}"))),
    };
    let start = Instant::now();
    let mut checks = f();
    let runtime = start.elapsed().as_secs_f64();
    if let Some(b) = budget {
        checks.push(CheckOutcome::below("runtime_s", runtime, b));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(CriterionOutcome { id, name, checks, runtime, budget, passed })
}

/// The Laplace model with `c'_+ != 1` used by the residual checks.
pub fn reference_laplace_model() -> SigmaModel {
    make_laplace_model(&LaplaceMeasureSpec::new(vec![(1.0, 2.0), (1.0, 1.0)]))
        .expect("reference Laplace measure is admissible")
}

fn halton(index: usize, base: usize) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, index);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// 100 low-discrepancy points with `x` in `[0.5, 50]` and `t` in `[0.05, 5]`,
/// both log-uniform.
pub fn fuzz_points() -> Vec<(f64, f64)> {
    (1..=100)
        .map(|k| {
            let x = 0.5 * 100f64.powf(halton(k, 2));
            let t = 0.05 * 100f64.powf(halton(k, 3));
            (x, t)
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn max_of(v: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    v.into_iter().try_fold(0.0f64, |m, e| Ok(m.max(e?.abs())))
}

/// `max_k |s_k| / |s_0|` along `x`, the growth of a scaled residual.
fn growth(values: &[f64]) -> f64 {
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    top / values[0].abs()
}

fn growth_check(name: &str, values: Result<Vec<f64>>) -> CheckOutcome {
    match values {
        Ok(v) => {
            let mut c = CheckOutcome::at_most(name, growth(&v), 4.0);
            c.note = Some(format!("scaled residuals {v:?}"));
            c
        }
        Err(e) => CheckOutcome::failed(name, 4.0, &e),
    }
}

fn five_point_derivative(f: impl Fn(f64) -> Result<f64>, y: f64, h: f64) -> Result<f64> {
    Ok((-f(y + 2.0 * h)? + 8.0 * f(y + h)? - 8.0 * f(y - h)? + f(y - 2.0 * h)?) / (12.0 * h))
}

fn exact_identities() -> Vec<CheckOutcome> {
    let pts = fuzz_points();
    let laplace = ModelConstants::from_model(&reference_laplace_model());
    let mut out = Vec::new();
    let constants: Vec<(&str, Result<ModelConstants>)> = vec![("kpz", Ok(ModelConstants::kpz())), ("laplace", laplace)];
    for (label, c) in &constants {
        let c = match c {
            Ok(c) => *c,
            Err(e) => {
                out.push(CheckOutcome::failed(format!("{label}_constants"), 0.0, e));
                continue;
            }
        };
        for k in 0..3 {
            let r = max_of(pts.iter().map(|&(x, t)| Ok(consistency_identities(c.scaled(x, t), x, t, &c)?[k])));
            out.push(CheckOutcome::from_result(format!("{label}_identity_{}", k + 1), r, 1e-11, false));
        }
        let r = max_of(pts.iter().map(|&(x, t)| {
            let xt = x * t;
            let lhs = shape_a0(c.scaled(x, t))?;
            let rhs = xt * alpha_endpoint(xt, c.c_plus)?;
            Ok((lhs - rhs) / rhs)
        }));
        out.push(CheckOutcome::from_result(format!("{label}_shape_vs_alpha"), r, 1e-12, false));
        let r = max_of(pts.iter().map(|&(x, t)| alpha_defining_residual(x * t, c.c_plus)));
        out.push(CheckOutcome::from_result(format!("{label}_alpha_equation"), r, 1e-12, false));
    }
    let ys = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e4];
    let r = max_of(ys.iter().map(|&y| {
        let exact = f2(y)?;
        Ok((five_point_derivative(f1, y, 1e-3 * y)? - exact) / exact)
    }));
    out.push(CheckOutcome::from_result("f2_is_f1_derivative", r, 1e-8, false));
    let kpz = ModelConstants::kpz();
    let r =
        max_of(pts.iter().map(|&(x, t)| Ok(rel(logq_kpz_asymptotic(x, t)?.total, logq_asymptotic(x, t, &kpz)?.total))));
    out.push(CheckOutcome::from_result("kpz_specialization", r, 1e-12, false));
    let r = max_of(pts.iter().map(|&(s, tt)| {
        let (x, t) = crate::kpz_tails::kpz_to_determinant(s, tt)?;
        Ok(rel(G(s, tt)?, -logq_kpz_asymptotic(x, t)?.total))
    }));
    out.push(CheckOutcome::from_result("g_is_minus_expansion", r, 1e-12, false));
    out
}

fn model_constants() -> Vec<CheckOutcome> {
    let kpz = make_kpz_model();
    let j = j_sigma(&kpz).map(|j| (j + PI / 12.0).abs());
    let c = ModelConstants::from_model(&kpz).map(|c| (c.log_t_coefficient() + 1.0 / 6.0).abs());
    vec![
        CheckOutcome::from_result("j_sigma_kpz", j, 1e-10, false),
        CheckOutcome::from_result("log_t_coefficient_kpz", c, 0.0, false),
    ]
}

fn tracy_widom_tail() -> Vec<CheckOutcome> {
    let opts = DetOptions::default();
    let gaps: Result<Vec<f64>> =
        [6.0, 7.0, 8.0].iter().map(|&m| Ok((log_tracy_widom(-m, &opts)?.log_det - tw_tail(m)?).abs())).collect();
    match gaps {
        Ok(g) => vec![
            CheckOutcome::below("gap_at_8", g[2], 2e-2),
            CheckOutcome::below("gap_7_below_gap_6", g[1] - g[0], 0.0),
            CheckOutcome::below("gap_8_below_gap_7", g[2] - g[1], 0.0),
        ],
        Err(e) => vec![CheckOutcome::failed("tracy_widom_gaps", 2e-2, &e)],
    }
}

fn representation_equivalence() -> Vec<CheckOutcome> {
    let kpz = make_kpz_model();
    let opts = DetOptions::default();
    let mut out = Vec::new();
    for x in [0.0, 1.0, 2.0] {
        for t in [0.5, 1.0, 2.0] {
            let d = log_q_sigma(&DetJob::new(&kpz, x, t))
                .and_then(|a| Ok((a.log_det - log_q_finite_temp(x, t, &opts)?.log_det).abs()));
            out.push(CheckOutcome::from_result(format!("x{x}_t{t}"), d, 1e-6, true));
        }
    }
    out
}

/// Step of the finite-difference `u` estimate used by the checks.
pub const U_STEP: f64 = 0.1;

fn gap_boundedness() -> Vec<CheckOutcome> {
    let kpz = make_kpz_model();
    let c = ModelConstants::kpz();
    let mut out = Vec::new();
    for x in [4.0, 6.0, 8.0] {
        let d = log_q_sigma(&DetJob::new(&kpz, x, 1.0))
            .and_then(|r| Ok((r.log_det - logq_asymptotic(x, 1.0, &c)?.total).abs()));
        out.push(CheckOutcome::from_result(format!("logq_gap_x{x}"), d, 3.0, true));
    }
    for (x, t) in [(6.0, 1.0), (8.0, 1.0), (4.0, 2.0)] {
        let d = u_sigma_fd(&kpz, x, t, U_STEP).and_then(|u| {
            let a = u_asymptotic(x, t, &c)?.total;
            Ok((u.value - a).abs() / a.abs())
        });
        out.push(CheckOutcome::from_result(format!("u_rel_gap_x{x}_t{t}"), d, 0.05, true));
    }
    out
}

const RATE_XS: [f64; 3] = [10.0, 20.0, 40.0];

fn endpoint_expansion_rate() -> Vec<CheckOutcome> {
    let kpz = make_kpz_model();
    let scaled: Result<Vec<f64>> = RATE_XS
        .iter()
        .map(|&x| {
            let t = 5.0 / x;
            Ok((solve_endpoint_a(x, t, &kpz)?.a - endpoint_a_expansion(x, t, &kpz)?).abs() * x.powi(6))
        })
        .collect();
    vec![growth_check("kpz_endpoint_x6", scaled)]
}

fn residual_boundedness() -> Vec<CheckOutcome> {
    let models = [("kpz", make_kpz_model()), ("laplace", reference_laplace_model())];
    let opts = RhOptions::default();
    let mut out = Vec::new();
    for (label, m) in &models {
        let d1: Result<Vec<f64>> = RATE_XS.iter().map(|&x| Ok(small_d1_residual(x, 0.5 / x, m)? * x.powi(4))).collect();
        out.push(growth_check(&format!("{label}_d1_x4"), d1));
        let chi: Result<Vec<f64>> = RATE_XS.iter().map(|&x| Ok(small_chi_residual(x, 0.5 / x, m)? * x * x)).collect();
        out.push(growth_check(&format!("{label}_chi_x2"), chi));
        let large: Result<Vec<(f64, f64)>> = RATE_XS
            .iter()
            .map(|&x| {
                let t = 5.0 / x;
                let c = ModelConstants::from_model(m)?;
                let s = large_scalars(x, t, m, &opts)?;
                Ok((large_g1_residual(&s, &c)? * (x / t).powf(1.5), large_f_residual(&s, &c)? * x.powf(1.5) / t.sqrt()))
            })
            .collect();
        let (g, f) = match large {
            Ok(v) => (Ok(v.iter().map(|p| p.0).collect()), Ok(v.iter().map(|p| p.1).collect())),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        out.push(growth_check(&format!("{label}_g1_rate"), g));
        out.push(growth_check(&format!("{label}_f_rate"), f));
    }
    out
}

fn small_time_cross_check() -> Vec<CheckOutcome> {
    let kpz = make_kpz_model();
    let t = 1e-6;
    [0.1, 0.2, 0.3]
        .iter()
        .map(|&x| {
            let d =
                log_q_sigma(&DetJob::new(&kpz, x, t)).and_then(|r| Ok((r.log_det - region_iii_partial(x, t)?).abs()));
            CheckOutcome::from_result(format!("x{x}"), d, 0.1, true)
        })
        .collect()
}

fn tail_gap() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for s in [1.0f64, 2.0, 3.0, 4.0] {
        for tt in [1.0, 4.0] {
            let d = compare_g_vs_determinant(s, tt).map(f64::abs);
            out.push(CheckOutcome::from_result(format!("gap_s{s}_t{tt}"), d, 3.0, true));
            for p in [1.0, s.powf(1.5)] {
                let diff = lower_bound_log_prob(s, tt, DEFAULT_EPSILON, 0.0)
                    .and_then(|lo| Ok(lo - upper_bound_log_prob(s, tt, p, 0.0)?));
                out.push(CheckOutcome::from_result(format!("bounds_ordered_s{s}_t{tt}_p{p:.3}"), diff, 0.0, false));
            }
        }
    }
    out
}

/// Order doubling at the automatically chosen order.
fn order_doubling(model: &SigmaModel, x: f64, t: f64) -> Result<f64> {
    let n = log_q_sigma(&DetJob::new(model, x, t))?.order_used;
    let a = log_q_sigma(&DetJob::new(model, x, t).fixed_order(n))?.log_det;
    let b = log_q_sigma(&DetJob::new(model, x, t).fixed_order(2 * n))?.log_det;
    Ok((a - b).abs())
}

fn spectral_invariants() -> Vec<CheckOutcome> {
    let kpz = make_kpz_model();
    let mut out = Vec::new();
    let mut results = Vec::new();
    for x in [-2.0, 0.0, 2.0, 4.0] {
        for t in [0.5, 1.0, 2.0] {
            match log_q_sigma(&DetJob::new(&kpz, x, t)) {
                Ok(r) => results.push(r),
                Err(e) => out.push(CheckOutcome::failed(format!("det_x{x}_t{t}"), 0.0, &e)),
            }
        }
    }
    let eig_min = results.iter().map(|r| r.eig_min).fold(f64::INFINITY, f64::min);
    let eig_max = results.iter().map(|r| r.eig_max).fold(f64::NEG_INFINITY, f64::max);
    let log_max = results.iter().map(|r| r.log_det).fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckOutcome::at_most("minus_eig_min", -eig_min, 1e-10));
    out.push(CheckOutcome::below("eig_max", eig_max, 1.0));
    out.push(CheckOutcome::at_most("log_q_max", log_max, 0.0));

    let monotone = linear_range(-4.0, 6.0, 10).and_then(|xs| {
        let v =
            xs.iter().map(|&x| Ok(log_q_sigma(&DetJob::new(&kpz, x, 1.0))?.log_det)).collect::<Result<Vec<f64>>>()?;
        Ok(v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max))
    });
    out.push(CheckOutcome::from_result("max_increment_in_x", monotone, 0.0, false));

    let d = max_of([(1.0, 1.0), (2.0, 0.5), (4.0, 2.0)].iter().map(|&(x, t)| order_doubling(&kpz, x, t)));
    out.push(CheckOutcome::from_result("order_doubling", d, 1e-8, true));

    let spec = SweepSpec {
        model: kpz,
        axes: Axes::Grid { xs: vec![-1.0, 1.0, 3.0], ts: vec![0.5, 1.0, 2.0] },
        order: None,
        u_step: None,
        scalars: false,
    };
    let same = with_jobs(4, || run_sweep(&spec, true))
        .and_then(|par| Ok(if to_csv(&par) == to_csv(&run_sweep(&spec, false)?) { 0.0 } else { 1.0 }));
    out.push(CheckOutcome::from_result("parallel_serial_mismatch", same, 0.0, false));
    out
}

fn kdv_check() -> Vec<CheckOutcome> {
    let kpz = make_kpz_model();
    let steps = [(0.2, 0.1), (0.1, 0.05), (0.05, 0.025)];
    let mut out = Vec::new();
    let runs: Result<Vec<_>> = steps.iter().map(|&(hx, ht)| kdv_residual(&kpz, 4.0, 1.0, hx, ht)).collect();
    match runs {
        Ok(r) => {
            out.push(CheckOutcome::below("scaled_residual", r[0].residual.abs() / r[0].u.abs().max(1.0), 0.05));
            for (k, w) in r.windows(2).enumerate() {
                if w[0].noise_dominated {
                    break;
                }
                let inc = if w[1].noise_dominated { 0.0 } else { w[1].residual.abs() - w[0].residual.abs() };
                out.push(CheckOutcome::at_most(format!("halving_{}", k + 1), inc, 0.0));
            }
        }
        Err(e) => out.push(CheckOutcome::failed("kdv_runs", 0.05, &e)),
    }
    let zero = kdv_residual(&make_zero_model(), 4.0, 1.0, 0.2, 0.1).map(|r| r.residual.abs());
    out.push(CheckOutcome::from_result("trivial_solution", zero, 1e-8, true));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse_and_cover() {
        assert_eq!("all".parse::<Suite>().unwrap().criteria().len(), 11);
        assert!("everything".parse::<Suite>().is_err());
        let mut union: Vec<u8> = [Suite::Identities, Suite::Props, Suite::Endpoints, Suite::Determinants, Suite::Tails]
            .iter()
            .flat_map(|s| s.criteria())
            .collect();
        union.sort();
        assert_eq!(union, (1..=11).collect::<Vec<u8>>());
        assert!(run_criterion(0).is_err());
    }

    #[test]
    fn halton_points() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(2, 3) - 2.0 / 3.0).abs() < 1e-15);
        let p = fuzz_points();
        assert_eq!(p.len(), 100);
        assert!(p.iter().all(|&(x, t)| (0.5..=50.0).contains(&x) && (0.05..=5.0).contains(&t)));
    }

    #[test]
    fn nan_checks_fail() {
        assert!(!CheckOutcome::at_most("n", f64::NAN, 1.0).passed);
        assert!(!CheckOutcome::below("n", 1.0, 1.0).passed);
        assert!(CheckOutcome::at_most("n", 1.0, 1.0).passed);
    }

    #[test]
    fn report_json_round_trips() {
        let report = run_suite(Suite::Identities).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["suite"], "identities");
        assert_eq!(v["passed"].as_bool().unwrap(), report.criteria.iter().all(|c| c.passed));
        assert_eq!(v["criteria"].as_array().unwrap().len(), 2);
    }
}
