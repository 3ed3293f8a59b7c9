//! Grid sweeps over `(x, t)` or `(s, T)` with deterministic row order.
//!
//! Points are evaluated independently, in parallel or serially, and emitted
//! in grid order. Every per-point computation is a pure function of the point,
//! so the output does not depend on scheduling.

use crate::asymptotics::{logq_asymptotic, u_asymptotic, ModelConstants};
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fredholm::{log_q_sigma, u_sigma_fd, DetJob};
use crate::kpz_tails::kpz_to_determinant;
use crate::parallel::{par_map, serial_map};
use crate::report::Record;
use crate::rh_scalars::{chi, d1, solve_endpoint_a, RhOptions};
use crate::sigma::{SigmaModel, Weight};

/// The sweep variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Axes {
    /// Every `(x, t)` with `x` from the first list and `t` from the second.
    Grid { xs: Vec<f64>, ts: Vec<f64> },
    /// Every `(s, T)`, mapped to `(x, t) = (s T^{-1/6}, T^{-1/2})`.
    Kpz { ss: Vec<f64>, big_ts: Vec<f64> },
    /// Points along `xt = product` for each `x`.
    FixedProduct { xs: Vec<f64>, product: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: SigmaModel,
    pub axes: Axes,
    /// Fixed quadrature order, or `None` for automatic refinement.
    pub order: Option<usize>,
    /// Also estimate `u` by finite differences with this step.
    pub u_step: Option<f64>,
    /// Also evaluate the steepest-descent scalars.
    pub scalars: bool,
}

/// `n` points from `lo` to `hi` inclusive, equally spaced.
pub fn linear_range(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    ensure_finite("lo", lo)?;
    ensure_finite("hi", hi)?;
    match n {
        0 => Err(invalid("range needs at least one point")),
        1 => Ok(vec![lo]),
        _ => Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()),
    }
}

/// `n` points from `lo` to `hi` inclusive, equally spaced in `log`.
pub fn log_range(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > 0.0) {
        return Err(invalid(format!("log range needs positive ends, got [{lo}, {hi}]")));
    }
    Ok(linear_range(lo.ln(), hi.ln(), n)?.into_iter().map(f64::exp).collect())
}

/// One sweep point; `s` and `big_t` are set for KPZ axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub x: f64,
    pub t: f64,
    pub s: Option<f64>,
    pub big_t: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let nonempty = |v: &[f64], name: &str| {
            if v.is_empty() {
                return Err(invalid(format!("{name} axis is empty")));
            }
            for &e in v {
                ensure_finite(name, e)?;
            }
            Ok(())
        };
        let positive = |v: &[f64], name: &str| {
            if v.iter().any(|&e| e <= 0.0) {
                return Err(invalid(format!("{name} values must be positive")));
            }
            Ok(())
        };
        match &self.axes {
            Axes::Grid { xs, ts } => {
                nonempty(xs, "x")?;
                nonempty(ts, "t")?;
                positive(ts, "t")?;
            }
            Axes::Kpz { ss, big_ts } => {
                nonempty(ss, "s")?;
                nonempty(big_ts, "T")?;
                positive(big_ts, "T")?;
            }
            Axes::FixedProduct { xs, product } => {
                nonempty(xs, "x")?;
                positive(xs, "x")?;
                if !(*product > 0.0 && product.is_finite()) {
                    return Err(invalid("xt must be positive"));
                }
            }
        }
        if let Some(h) = self.u_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid("u step must be positive"));
            }
        }
        Ok(())
    }

    /// Points in row-major order of the axes.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        self.validate()?;
        let mut out = Vec::new();
        match &self.axes {
            Axes::Grid { xs, ts } => {
                for &x in xs {
                    for &t in ts {
                        out.push(SweepPoint { index: out.len(), x, t, s: None, big_t: None });
                    }
                }
            }
            Axes::Kpz { ss, big_ts } => {
                for &s in ss {
                    for &bt in big_ts {
                        let (x, t) = kpz_to_determinant(s, bt)?;
                        out.push(SweepPoint { index: out.len(), x, t, s: Some(s), big_t: Some(bt) });
                    }
                }
            }
            Axes::FixedProduct { xs, product } => {
                for &x in xs {
                    out.push(SweepPoint { index: out.len(), x, t: product / x, s: None, big_t: None });
                }
            }
        }
        Ok(out)
    }
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::NearSingular { .. } => "near_singular",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::ModelNotAdmissible(_) => "not_admissible",
        Error::EndpointBracket { .. } => "endpoint_bracket",
        Error::Parse { .. } => "parse",
    }
}

fn evaluate(spec: &SweepSpec, constants: Option<&ModelConstants>, p: &SweepPoint) -> Record {
    let nan = f64::NAN;
    let mut rec = Record::new().with("index", p.index).with("x", p.x).with("t", p.t);
    if matches!(spec.axes, Axes::Kpz { .. }) {
        rec.push("s", p.s.unwrap_or(nan));
        rec.push("big_t", p.big_t.unwrap_or(nan));
    }
    let mut job = DetJob::new(&spec.model, p.x, p.t);
    if let Some(n) = spec.order {
        job = job.fixed_order(n);
    }
    let mut status = "ok";
    let (log_det, eig_max, order, stable) = match log_q_sigma(&job) {
        Ok(r) => (r.log_det, r.eig_max, r.order_used as i64, r.stable),
        Err(e) => {
            status = status_of(&e);
            (nan, nan, -1, false)
        }
    };
    let asym = constants.filter(|_| p.x > 0.0).and_then(|c| logq_asymptotic(p.x, p.t, c).ok()).map_or(nan, |e| e.total);
    rec.push("log_det", log_det);
    rec.push("eig_max", eig_max);
    rec.push("order_used", order);
    rec.push("stable", stable);
    rec.push("asymptotic_total", asym);
    rec.push("gap", log_det - asym);
    if let Some(h) = spec.u_step {
        let u = u_sigma_fd(&spec.model, p.x, p.t, h).map_or(nan, |u| u.value);
        let ua = constants.filter(|_| p.x > 0.0).and_then(|c| u_asymptotic(p.x, p.t, c).ok()).map_or(nan, |e| e.total);
        rec.push("u_fd", u);
        rec.push("u_asymptotic", ua);
    }
    if spec.scalars {
        let opts = RhOptions::default();
        let ok = p.x > 0.0 && spec.model.admissible();
        let small = |f: &dyn Fn() -> Result<f64>| if ok { f().unwrap_or(nan) } else { nan };
        rec.push("small_regime", ok && opts.small_regime(p.x, p.t));
        rec.push("d1", small(&|| d1(p.x, p.t, &spec.model)));
        rec.push("chi", small(&|| chi(p.x, p.t, &spec.model)));
        rec.push("large_regime", ok && opts.large_regime(p.x, p.t));
        rec.push("endpoint_a", small(&|| solve_endpoint_a(p.x, p.t, &spec.model).map(|s| s.a)));
    }
    rec.push("status", status);
    rec
}

/// Evaluates every point; `parallel = false` forces a single thread.
pub fn run_sweep(spec: &SweepSpec, parallel: bool) -> Result<Vec<Record>> {
    let points = spec.points()?;
    let constants = if spec.model.admissible() { Some(ModelConstants::from_model(&spec.model)?) } else { None };
    let f = |p: &SweepPoint| evaluate(spec, constants.as_ref(), p);
    Ok(if parallel { par_map(&points, f) } else { serial_map(&points, f) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::{make_kpz_model, make_zero_model};

    #[test]
    fn ranges() {
        assert_eq!(linear_range(0.0, 2.0, 3).unwrap(), vec![0.0, 1.0, 2.0]);
        let l = log_range(1.0, 100.0, 3).unwrap();
        assert!((l[1] - 10.0).abs() < 1e-13);
        assert!(log_range(0.0, 1.0, 3).is_err());
        assert!(linear_range(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn grid_order_and_validation() {
        let spec = SweepSpec {
            model: make_zero_model(),
            axes: Axes::Grid { xs: vec![1.0, 2.0], ts: vec![0.5, 1.0, 2.0] },
            order: None,
            u_step: None,
            scalars: false,
        };
        let pts = spec.points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[1].x, pts[1].t), (1.0, 1.0));
        let bad = SweepSpec { axes: Axes::Grid { xs: vec![], ts: vec![1.0] }, ..spec.clone() };
        assert!(bad.validate().is_err());
        let rows = run_sweep(&spec, true).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].get("log_det"), Some(&crate::report::Value::Float(0.0)));
    }

    #[test]
    fn parallel_and_serial_agree() {
        let spec = SweepSpec {
            model: make_kpz_model(),
            axes: Axes::Grid { xs: vec![0.0, 1.0, 2.0], ts: vec![0.5, 1.0] },
            order: Some(64),
            u_step: None,
            scalars: false,
        };
        let a = crate::report::to_csv(&run_sweep(&spec, true).unwrap());
        let b = crate::report::to_csv(&run_sweep(&spec, false).unwrap());
        assert_eq!(a, b);
    }
}
