//! Nyström evaluation of deformed Airy-kernel determinants.
//!
//! The operator `sigma(r(u)) K(u, v)` with `r(u) = u / t^{2/3} + x / t` is
//! symmetrized to `sqrt(sigma) K sqrt(sigma)`, discretized on graded
//! Gauss-Legendre panels, and its log-determinant is accumulated as
//! `sum log1p(-lambda)` over the eigenvalues of the weighted matrix.

use nalgebra::DMatrix;

use crate::airy::{airy_unchecked, kernel_diagonal, kernel_from_values, AiryValue};
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::parallel::par_map;
use crate::quadrature::composite;
use crate::sigma::{SigmaModel, Weight};

pub const DEFAULT_ORDER: usize = 200;
pub const MAX_AUTO_ORDER: usize = 1600;
pub const MIN_ORDER: usize = 8;
/// Successive order doublings must agree to this before a value counts as stable.
pub const REFINE_TOL: f64 = 1e-9;
/// Smallest admissible gap `1 - lambda_max`.
pub const SINGULAR_GAP: f64 = 1e-12;
/// Right truncation of the `u` axis; `2 U Ai(U)^2 < 1e-16` holds here.
pub const DEFAULT_TRUNC_HI: f64 = 10.0;
/// `sigma(r(trunc_lo))` is about `exp(-LEFT_DECAY)`.
const LEFT_DECAY: f64 = 40.0;
const MIN_PANEL_ORDER: usize = 16;

/// Outcome of one determinant evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetResult {
    pub log_det: f64,
    pub eig_min: f64,
    pub eig_max: f64,
    /// Estimated trace of the discarded tails of the operator.
    pub trunc_estimate: f64,
    pub order_used: usize,
    /// Whether the last order doubling changed `log_det` by less than [`REFINE_TOL`].
    pub stable: bool,
}

impl DetResult {
    fn trivial() -> Self {
        DetResult { log_det: 0.0, eig_min: 0.0, eig_max: 0.0, trunc_estimate: 0.0, order_used: 0, stable: true }
    }
}

/// One determinant `det(1 - sigma(r(.)) K)` on `(trunc_lo, trunc_hi)`.
#[derive(Debug, Clone)]
pub struct DetJob<'a> {
    pub model: &'a SigmaModel,
    pub x: f64,
    pub t: f64,
    pub trunc_lo: f64,
    pub trunc_hi: f64,
    /// Starting order; with `auto_refine` it is doubled until stable.
    pub order: usize,
    pub auto_refine: bool,
    /// Range of `x` the node plan must resolve; defaults to `(x, x)`.
    pub envelope: (f64, f64),
}

fn tau(t: f64) -> f64 {
    t.powf(2.0 / 3.0)
}

/// Centre of the `sigma` transition in the `u` variable.
fn transition_centre(x: f64, t: f64) -> f64 {
    -x / t.cbrt()
}

impl<'a> DetJob<'a> {
    /// Default truncation and automatic order selection.
    pub fn new(model: &'a SigmaModel, x: f64, t: f64) -> Self {
        let c_minus = model.tail_constants().map(|c| c.c_minus).unwrap_or(1.0);
        let trunc_lo = tau(t) * (-LEFT_DECAY / c_minus) + transition_centre(x, t);
        DetJob {
            model,
            x,
            t,
            trunc_lo,
            trunc_hi: DEFAULT_TRUNC_HI,
            order: DEFAULT_ORDER,
            auto_refine: true,
            envelope: (x, x),
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn fixed_order(mut self, order: usize) -> Self {
        self.order = order;
        self.auto_refine = false;
        self
    }

    pub fn with_truncation(mut self, lo: f64, hi: f64) -> Self {
        self.trunc_lo = lo;
        self.trunc_hi = hi;
        self
    }

    /// Widens the node plan so it serves every `x` in `[lo, hi]`, and moves
    /// the left truncation accordingly.
    pub fn with_envelope(mut self, lo: f64, hi: f64) -> Self {
        let c_minus = self.model.tail_constants().map(|c| c.c_minus).unwrap_or(1.0);
        self.envelope = (lo.min(self.x), hi.max(self.x));
        self.trunc_lo = tau(self.t) * (-LEFT_DECAY / c_minus) + transition_centre(self.envelope.1, self.t);
        self
    }

    fn validate(&self) -> Result<()> {
        ensure_finite("x", self.x)?;
        ensure_finite("t", self.t)?;
        if self.t <= 0.0 {
            return Err(invalid(format!("t must be positive, got {}", self.t)));
        }
        ensure_finite("trunc_lo", self.trunc_lo)?;
        ensure_finite("trunc_hi", self.trunc_hi)?;
        if self.order < MIN_ORDER {
            return Err(invalid(format!("order must be at least {MIN_ORDER}, got {}", self.order)));
        }
        Ok(())
    }
}

/// Gauss-Legendre panels `(lo, hi, order)` sharing `n` nodes by weight.
fn allocate(panels: &[(f64, f64, f64)], n: usize) -> Vec<(f64, f64, usize)> {
    let total: f64 = panels.iter().map(|p| (p.1 - p.0) * p.2).sum();
    panels
        .iter()
        .map(|&(lo, hi, dens)| {
            let share = (n as f64 * (hi - lo) * dens / total).round() as usize;
            (lo, hi, share.clamp(MIN_PANEL_ORDER, crate::quadrature::MAX_ORDER))
        })
        .collect()
}

/// Nodes per unit length needed to resolve Airy oscillations on `[a, b]`.
fn oscillation_density(a: f64) -> f64 {
    (-a).max(0.0).sqrt() / std::f64::consts::PI + 1.0
}

/// Splits `[lo, hi]` at the given cut points, keeping pieces of positive length.
fn split(lo: f64, hi: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
    let mut pts = vec![lo];
    pts.extend(cuts.iter().copied().filter(|&c| c > lo && c < hi));
    pts.push(hi);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Graded panels for the deformed operator: the `sigma` transition around
/// `u_c` (resolved on the scale `t^{2/3}`) and the oscillatory Airy region.
fn deformed_panels(job: &DetJob, n: usize) -> Vec<(f64, f64, usize)> {
    let tau = tau(job.t);
    let c_hi = transition_centre(job.envelope.0, job.t);
    let c_lo = transition_centre(job.envelope.1, job.t);
    let cuts = [c_lo - 10.0 * tau, c_hi + 10.0 * tau, c_hi + LEFT_DECAY * tau, 0.0];
    let pieces = split(job.trunc_lo, job.trunc_hi, &cuts);
    let weighted: Vec<(f64, f64, f64)> = pieces
        .into_iter()
        .map(|(a, b)| {
            let mid = 0.5 * (a + b);
            let in_transition = mid < c_hi + LEFT_DECAY * tau;
            let core = mid > c_lo - 10.0 * tau && mid < c_hi + 10.0 * tau;
            let dens_sigma = match (in_transition, core) {
                (_, true) => 1.0 / tau,
                (true, false) => 0.5 / tau,
                _ => 0.0,
            };
            (a, b, dens_sigma.max(oscillation_density(a)))
        })
        .collect();
    allocate(&weighted, n)
}

/// Symmetric eigenvalues and the resulting log-determinant.
fn spectrum_log_det(matrix: DMatrix<f64>) -> Result<(f64, f64, f64)> {
    if matrix.nrows() == 0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let eig = matrix.symmetric_eigenvalues();
    let mut sorted: Vec<f64> = eig.iter().copied().collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let eig_min = sorted[0];
    let eig_max = sorted[sorted.len() - 1];
    if eig_max >= 1.0 - SINGULAR_GAP {
        return Err(Error::NearSingular { eig_max, gap: 1.0 - eig_max });
    }
    // ascending magnitude keeps the reduction order fixed and accurate
    let log_det = sorted.iter().map(|&l| (-l).ln_1p()).rev().sum::<f64>();
    Ok((log_det, eig_min, eig_max))
}

/// Assembles `[s_i K(u_i, u_j) s_j]` for nodes with nonzero scale `s`.
fn kernel_matrix(nodes: &[f64], scales: &[f64]) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..nodes.len()).filter(|&i| scales[i] > 0.0).collect();
    let vals: Vec<AiryValue> = keep.iter().map(|&i| airy_unchecked(nodes[i])).collect();
    let m = keep.len();
    let mut a = DMatrix::zeros(m, m);
    for p in 0..m {
        let (i, ui) = (keep[p], nodes[keep[p]]);
        a[(p, p)] = scales[i] * scales[i] * kernel_diagonal(ui, vals[p]);
        for q in p + 1..m {
            let j = keep[q];
            let k = kernel_from_values(ui, vals[p], nodes[j], vals[q]);
            let v = scales[i] * k * scales[j];
            a[(p, q)] = v;
            a[(q, p)] = v;
        }
    }
    a
}

fn deformed_trunc_estimate(job: &DetJob) -> f64 {
    let tau = tau(job.t);
    let c_minus = job.model.tail_constants().map(|c| c.c_minus).unwrap_or(1.0);
    let lo = job.trunc_lo;
    let r_lo = lo / tau + job.x / job.t;
    let left = job.model.sigma(r_lo) * kernel_diagonal(lo, airy_unchecked(lo)).max(0.0) * tau / c_minus;
    left + right_trunc_estimate(job.trunc_hi)
}

fn right_trunc_estimate(hi: f64) -> f64 {
    if hi <= 0.0 {
        return f64::INFINITY;
    }
    kernel_diagonal(hi, airy_unchecked(hi)).max(0.0) / (2.0 * hi.sqrt())
}

fn log_q_fixed(job: &DetJob, n: usize) -> Result<DetResult> {
    let panels = deformed_panels(job, n);
    let rule = composite(&panels)?;
    let tau = tau(job.t);
    let shift = job.x / job.t;
    let scales: Vec<f64> =
        rule.nodes().iter().zip(rule.weights()).map(|(&u, &w)| (w * job.model.sigma(u / tau + shift)).sqrt()).collect();
    let (log_det, eig_min, eig_max) = spectrum_log_det(kernel_matrix(rule.nodes(), &scales))?;
    Ok(DetResult {
        log_det,
        eig_min,
        eig_max,
        trunc_estimate: deformed_trunc_estimate(job),
        order_used: rule.order(),
        stable: false,
    })
}

/// Agreement required between doublings. Near-singular operators resolve
/// `log(1 - lambda)` only to about `eps / (1 - lambda_max)`, which then
/// takes over from [`REFINE_TOL`].
pub fn refine_tolerance(r: &DetResult) -> f64 {
    let gap = (1.0 - r.eig_max).max(f64::MIN_POSITIVE);
    REFINE_TOL.max(100.0 * f64::EPSILON / gap)
}

/// Runs `eval(n)` at the starting order and keeps doubling while requested.
fn refine<F: Fn(usize) -> Result<DetResult>>(order: usize, auto: bool, eval: F) -> Result<DetResult> {
    let mut current = eval(order)?;
    if !auto {
        return Ok(current);
    }
    let mut n = order;
    while n < MAX_AUTO_ORDER {
        n = (2 * n).min(MAX_AUTO_ORDER);
        let next = eval(n)?;
        let change = (next.log_det - current.log_det).abs();
        current = next;
        if change < refine_tolerance(&current) {
            current.stable = true;
            break;
        }
    }
    Ok(current)
}

/// `log Q(x, t)` for the deformed Airy kernel.
pub fn log_q_sigma(job: &DetJob) -> Result<DetResult> {
    job.validate()?;
    if job.model.is_cutoff() {
        return Err(Error::ModelNotAdmissible(job.model.name().to_string()));
    }
    if job.model.is_zero() || job.trunc_lo >= job.trunc_hi {
        return Ok(DetResult::trivial());
    }
    refine(job.order, job.auto_refine, |n| log_q_fixed(job, n))
}

/// Order and refinement controls shared by the undeformed paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetOptions {
    pub order: usize,
    pub auto_refine: bool,
    pub trunc_hi: f64,
}

impl Default for DetOptions {
    fn default() -> Self {
        DetOptions { order: DEFAULT_ORDER, auto_refine: true, trunc_hi: DEFAULT_TRUNC_HI }
    }
}

impl DetOptions {
    fn validate(&self) -> Result<()> {
        ensure_finite("trunc_hi", self.trunc_hi)?;
        if self.order < MIN_ORDER {
            return Err(invalid(format!("order must be at least {MIN_ORDER}, got {}", self.order)));
        }
        Ok(())
    }
}

/// Panels on `[lo, hi]` for a smooth Airy-type integrand, split at 0.
fn airy_panels(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64, usize)> {
    let weighted: Vec<(f64, f64, f64)> =
        split(lo, hi, &[0.0]).into_iter().map(|(a, b)| (a, b, oscillation_density(a))).collect();
    allocate(&weighted, n)
}

/// `log F_TW(s)`: the Airy-kernel determinant on `(s, inf)`.
pub fn log_tracy_widom(s: f64, opts: &DetOptions) -> Result<DetResult> {
    ensure_finite("s", s)?;
    opts.validate()?;
    if s >= opts.trunc_hi {
        return Ok(DetResult::trivial());
    }
    refine(opts.order, opts.auto_refine, |n| {
        let rule = composite(&airy_panels(s, opts.trunc_hi, n))?;
        let scales: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
        let (log_det, eig_min, eig_max) = spectrum_log_det(kernel_matrix(rule.nodes(), &scales))?;
        Ok(DetResult {
            log_det,
            eig_min,
            eig_max,
            trunc_estimate: right_trunc_estimate(opts.trunc_hi),
            order_used: rule.order(),
            stable: false,
        })
    })
}

/// `log Q(x, t)` for the logistic weight through the finite-temperature kernel
/// `L(u, v) = int sigma(s / t^{2/3}) Ai(u + s) Ai(v + s) ds` on `(-x t^{-1/3}, inf)`.
pub fn log_q_finite_temp(x: f64, t: f64, opts: &DetOptions) -> Result<DetResult> {
    ensure_finite("x", x)?;
    ensure_finite("t", t)?;
    opts.validate()?;
    if t <= 0.0 {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let model = crate::sigma::make_kpz_model();
    let a = transition_centre(x, t);
    let tau = tau(t);
    // L(u, u) decays like sigma(-u / t^{2/3}), far slower than the Airy tail
    let hi = opts.trunc_hi + LEFT_DECAY * tau;
    if a >= hi {
        return Ok(DetResult::trivial());
    }
    refine(opts.order, opts.auto_refine, |n| {
        let u_rule = composite(&airy_panels(a, hi, n))?;
        // s covers the sigma transition and stops where Ai(u + s) is negligible
        let s_lo = -LEFT_DECAY * tau;
        let s_hi = opts.trunc_hi - a;
        let pieces = split(s_lo, s_hi, &[-10.0 * tau, 10.0 * tau, LEFT_DECAY * tau]);
        let weighted: Vec<(f64, f64, f64)> = pieces
            .into_iter()
            .map(|(p, q)| {
                let mid = 0.5 * (p + q);
                let dens = if mid.abs() < 10.0 * tau {
                    1.0 / tau
                } else if mid < LEFT_DECAY * tau {
                    0.5 / tau
                } else {
                    0.0
                };
                (p, q, dens.max(oscillation_density(a + p)))
            })
            .collect();
        if s_hi <= s_lo {
            return Ok(DetResult::trivial());
        }
        let s_rule = composite(&allocate(&weighted, 2 * n))?;
        let sw: Vec<f64> =
            s_rule.nodes().iter().zip(s_rule.weights()).map(|(&s, &w)| (w * model.sigma(s / tau)).sqrt()).collect();
        let nu = u_rule.order();
        let ns = s_rule.order();
        let mut b = DMatrix::zeros(nu, ns);
        for (i, (&u, &wu)) in u_rule.nodes().iter().zip(u_rule.weights()).enumerate() {
            let su = wu.sqrt();
            for (k, &s) in s_rule.nodes().iter().enumerate() {
                if sw[k] > 0.0 {
                    b[(i, k)] = su * airy_unchecked(u + s).ai * sw[k];
                }
            }
        }
        let mut l = &b * b.transpose();
        // enforce exact symmetry before the symmetric solver
        for i in 0..nu {
            for j in i + 1..nu {
                let v = 0.5 * (l[(i, j)] + l[(j, i)]);
                l[(i, j)] = v;
                l[(j, i)] = v;
            }
        }
        let (log_det, eig_min, eig_max) = spectrum_log_det(l)?;
        Ok(DetResult {
            log_det,
            eig_min,
            eig_max,
            trunc_estimate: right_trunc_estimate(opts.trunc_hi),
            order_used: nu,
            stable: false,
        })
    })
}

/// Finite-difference estimate of `u = d^2/dx^2 log Q + x / (2t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UEstimate {
    pub value: f64,
    pub h: f64,
    /// Set when `h < 1e-4`, where cancellation dominates the stencil.
    pub cancellation_warning: bool,
    pub order_used: usize,
}

const STENCIL_2ND: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

/// Chooses one order for a family of evaluations over an `x` envelope.
fn plan_order(model: &SigmaModel, x: f64, t: f64, env: (f64, f64), order: usize) -> Result<usize> {
    let probe = DetJob::new(model, x, t).with_envelope(env.0, env.1).with_order(order);
    Ok(log_q_sigma(&probe)?.order_used.max(order))
}

/// Evaluates `log Q` at each `x` with one shared node plan.
fn log_q_on_plan(model: &SigmaModel, xs: &[f64], t: f64, order: Option<usize>) -> Result<Vec<f64>> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let n = match order {
        Some(n) => n,
        None => plan_order(model, mid, t, (lo, hi), DEFAULT_ORDER)?,
    };
    let jobs: Vec<DetJob> = xs.iter().map(|&x| DetJob::new(model, x, t).with_envelope(lo, hi).fixed_order(n)).collect();
    let results = par_map(&jobs, |job| log_q_sigma(job).map(|r| r.log_det));
    results.into_iter().collect()
}

/// `u(x, t)` by the fourth-order central second difference of `log Q` with step `h`.
pub fn u_sigma_fd(model: &SigmaModel, x: f64, t: f64, h: f64) -> Result<UEstimate> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("step must be positive, got {h}")));
    }
    ensure_finite("x", x)?;
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let xs: Vec<f64> = (-2..=2).map(|k| x + k as f64 * h).collect();
    let (vals, order) = if model.is_zero() {
        (vec![0.0; 5], 0)
    } else {
        let n = plan_order(model, x, t, (xs[0], xs[4]), DEFAULT_ORDER)?;
        (log_q_on_plan(model, &xs, t, Some(n))?, n)
    };
    let w: f64 = STENCIL_2ND.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / (12.0 * h * h);
    Ok(UEstimate { value: w + x / (2.0 * t), h, cancellation_warning: h < 1e-4, order_used: order })
}

/// KdV residual `u_t + 2 u u_x + u_xxx / 6` from finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvResidual {
    pub residual: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub u_xxx: f64,
    /// Estimated contribution of determinant rounding to `residual`.
    pub noise_floor: f64,
    pub noise_dominated: bool,
}

/// KdV residual on a stencil of five `x` points and three `t` levels.
///
/// `u` itself is the second difference of `log Q`, so the `x` stencil reaches
/// `x +- 4 hx` at the middle level and `x +- 2 hx` at `t +- ht`. The exact
/// `x / (2t)` part of `u` is differentiated analytically.
pub fn kdv_residual(model: &SigmaModel, x: f64, t: f64, hx: f64, ht: f64) -> Result<KdvResidual> {
    if !(hx > 0.0 && ht > 0.0 && hx.is_finite() && ht.is_finite()) {
        return Err(invalid("steps must be positive and finite"));
    }
    ensure_finite("x", x)?;
    if !(t - ht > 0.0) {
        return Err(invalid(format!("t - ht must stay positive, got t={t}, ht={ht}")));
    }
    let mid: Vec<f64> = (-4..=4).map(|k| x + k as f64 * hx).collect();
    let side: Vec<f64> = (-2..=2).map(|k| x + k as f64 * hx).collect();
    let (lq_mid, lq_minus, lq_plus) = if model.is_zero() {
        (vec![0.0; 9], vec![0.0; 5], vec![0.0; 5])
    } else {
        let n = plan_order(model, x, t, (mid[0], mid[8]), DEFAULT_ORDER)?;
        (
            log_q_on_plan(model, &mid, t, Some(n))?,
            log_q_on_plan(model, &side, t - ht, Some(n))?,
            log_q_on_plan(model, &side, t + ht, Some(n))?,
        )
    };
    let second = |v: &[f64], c: usize| -> f64 {
        STENCIL_2ND.iter().enumerate().map(|(k, s)| s * v[c + k - 2]).sum::<f64>() / (12.0 * hx * hx)
    };
    // w = d^2 log Q / dx^2 at x + k hx, k = -2..2
    let w: Vec<f64> = (2..=6).map(|c| second(&lq_mid, c)).collect();
    let w_minus = second(&lq_minus, 2);
    let w_plus = second(&lq_plus, 2);
    let w0 = w[2];
    let w_x = (-w[4] + 8.0 * w[3] - 8.0 * w[1] + w[0]) / (12.0 * hx);
    let w_xxx = (w[4] - 2.0 * w[3] + 2.0 * w[1] - w[0]) / (2.0 * hx * hx * hx);
    let w_t = (w_plus - w_minus) / (2.0 * ht);

    let u = w0 + x / (2.0 * t);
    let u_x = w_x + 1.0 / (2.0 * t);
    let u_t = w_t - x / (2.0 * t * t);
    let u_xxx = w_xxx;
    let residual = u_t + 2.0 * u * u_x + u_xxx / 6.0;

    let scale = lq_mid.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let delta = 1e-13 * scale;
    let noise_w = 64.0 / 12.0 * delta / (hx * hx);
    let noise_floor = noise_w / ht
        + 2.0 * u.abs() * 1.5 * noise_w / hx
        + 2.0 * u_x.abs() * noise_w
        + 3.0 * noise_w / (hx * hx * hx) / 6.0;
    Ok(KdvResidual { residual, u, u_t, u_x, u_xxx, noise_floor, noise_dominated: noise_floor > residual.abs() })
}
