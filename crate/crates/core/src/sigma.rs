//! Weights `sigma` with `F = 1/(1 - sigma)` and the constant `j`.
//!
//! Admissible weights here all come from finite atomic measures:
//! `F(z) = 1 + sum_k m_k exp(l_k z)` with locations `l_k > 0`. The logistic
//! weight is the single atom of unit mass at 1. Two non-admissible weights
//! are also provided: the identically zero weight, for which every
//! determinant is trivial, and the sharp cutoff `1_(0, inf)`.
//!
//! For atomic measures the log-derivatives of `F` are the cumulants of the
//! discrete distribution that puts mass proportional to `m_k exp(l_k r)` on
//! `l_k` (and proportional to 1 on the origin). This gives stable formulas
//! for all `r` and makes `(log F)'' >= 0` evident.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_legendre, map_rule};

/// Growth and decay constants of `F`.
///
/// `F(r) ~ c_plus_prime * exp(c_plus * r)` with relative corrections of
/// order `exp(-epsilon * r)` as `r -> +inf`, and
/// `F(r) - 1 ~ c_minus_prime * exp(c_minus * r)` as `r -> -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConstants {
    pub c_plus: f64,
    pub c_plus_prime: f64,
    pub c_minus: f64,
    pub c_minus_prime: f64,
    pub epsilon: f64,
}

impl TailConstants {
    /// `2 c_+ j / pi + log^2(c'_+) / (2 pi^2)`, the coefficient of `-log t`.
    pub fn log_t_coefficient(&self, j: f64) -> f64 {
        let l = self.c_plus_prime.ln();
        2.0 * self.c_plus * j / PI + l * l / (2.0 * PI * PI)
    }
}

fn fd_step(r: f64) -> f64 {
    1e-5 * r.abs().max(1.0)
}

/// A weight function together with `log F` and its derivatives.
///
/// Only `sigma` and `log_f` are required; the derivatives fall back to
/// centered differences with step `1e-5 * max(1, |r|)`.
pub trait Weight: Send + Sync {
    fn name(&self) -> &str;

    fn sigma(&self, r: f64) -> f64;

    fn log_f(&self, r: f64) -> f64;

    fn log_f_d1(&self, r: f64) -> f64 {
        let h = fd_step(r);
        (self.log_f(r + h) - self.log_f(r - h)) / (2.0 * h)
    }

    fn log_f_d2(&self, r: f64) -> f64 {
        let h = fd_step(r);
        (self.log_f_d1(r + h) - self.log_f_d1(r - h)) / (2.0 * h)
    }

    fn log_f_d3(&self, r: f64) -> f64 {
        let h = fd_step(r);
        (self.log_f_d1(r + h) - 2.0 * self.log_f_d1(r) + self.log_f_d1(r - h)) / (h * h)
    }

    /// `log F(r) - c_+ r - log c'_+`, which decays like `exp(-epsilon r)`
    /// as `r -> +inf`. NaN for weights without tail constants.
    fn log_f_excess(&self, r: f64) -> f64 {
        match self.tail_constants() {
            Ok(c) => self.log_f(r) - c.c_plus * r - c.c_plus_prime.ln(),
            Err(_) => f64::NAN,
        }
    }

    /// Tail constants, or an error for weights outside the admissible class.
    fn tail_constants(&self) -> Result<TailConstants>;

    fn admissible(&self) -> bool;
}

/// Finite atomic measure `sum_k m_k delta_{l_k}` on `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceMeasureSpec {
    /// `(location, mass)` pairs.
    pub atoms: Vec<(f64, f64)>,
}

impl LaplaceMeasureSpec {
    pub fn new(atoms: Vec<(f64, f64)>) -> Self {
        Self { atoms }
    }

    /// Sorted by location, with atoms at equal locations merged.
    fn normalized(&self) -> Result<Vec<(f64, f64)>> {
        if self.atoms.is_empty() {
            return Err(invalid("measure needs at least one atom so that F grows at +inf"));
        }
        for &(l, m) in &self.atoms {
            if !(l.is_finite() && l > 0.0) {
                return Err(invalid(format!("atom location must be finite and positive, got {l}")));
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(invalid(format!("atom mass must be finite and positive, got {m}")));
            }
        }
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (l, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == l => last.1 += m,
                _ => merged.push((l, m)),
            }
        }
        Ok(merged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Logistic weight `1 / (1 + e^{-r})`.
    Kpz,
    /// `F = 1 + sum m_k e^{l_k z}`; atoms sorted and merged.
    Laplace { atoms: Vec<(f64, f64)>, log_masses: Vec<f64> },
    /// Indicator of `(0, inf)`.
    Cutoff,
    /// `sigma = 0`.
    Zero,
}

/// A built-in weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaModel {
    name: String,
    kind: ModelKind,
    constants: Option<TailConstants>,
}

pub fn make_kpz_model() -> SigmaModel {
    SigmaModel {
        name: "kpz".into(),
        kind: ModelKind::Kpz,
        constants: Some(TailConstants {
            c_plus: 1.0,
            c_plus_prime: 1.0,
            c_minus: 1.0,
            c_minus_prime: 1.0,
            epsilon: 1.0,
        }),
    }
}

pub fn make_laplace_model(spec: &LaplaceMeasureSpec) -> Result<SigmaModel> {
    make_named_laplace_model(spec, "laplace")
}

pub fn make_named_laplace_model(spec: &LaplaceMeasureSpec, name: &str) -> Result<SigmaModel> {
    let atoms = spec.normalized()?;
    let (c_minus, c_minus_prime) = atoms[0];
    let (c_plus, c_plus_prime) = atoms[atoms.len() - 1];
    // the relative correction at +inf comes from the next atom down, or from the 1
    let epsilon = if atoms.len() >= 2 { (c_plus - atoms[atoms.len() - 2].0).min(c_plus) } else { c_plus };
    let log_masses = atoms.iter().map(|a| a.1.ln()).collect();
    Ok(SigmaModel {
        name: name.into(),
        kind: ModelKind::Laplace { atoms, log_masses },
        constants: Some(TailConstants { c_plus, c_plus_prime, c_minus, c_minus_prime, epsilon }),
    })
}

pub fn make_cutoff_model() -> SigmaModel {
    SigmaModel { name: "cutoff".into(), kind: ModelKind::Cutoff, constants: None }
}

pub fn make_zero_model() -> SigmaModel {
    SigmaModel { name: "zero".into(), kind: ModelKind::Zero, constants: None }
}

/// Model by CLI identifier.
pub fn model_by_id(id: &str) -> Result<SigmaModel> {
    match id {
        "kpz" => Ok(make_kpz_model()),
        "cutoff" => Ok(make_cutoff_model()),
        "zero" => Ok(make_zero_model()),
        other => {
            Err(invalid(format!("unknown model `{other}`; valid ids are kpz, cutoff, zero, or a model file path")))
        }
    }
}

/// Parses a model file: one `atom <location> <mass>` per line, optional
/// `name <id>`, blank lines and `#` comments ignored.
pub fn parse_model_file(text: &str) -> Result<SigmaModel> {
    let mut atoms = Vec::new();
    let mut name = String::from("laplace");
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut rest = content;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[start..];
            let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
            tokens.push((offset + start + 1, &tail[..len]));
            offset += start + len;
            rest = &tail[len..];
        }
        let parse_err = |column: usize, message: String| Error::Parse { line: line_no, column, message };
        match tokens.as_slice() {
            [] => {}
            [(_, "atom"), (cl, loc), (cm, mass)] => {
                let l: f64 = loc.parse().map_err(|_| parse_err(*cl, format!("invalid location `{loc}`")))?;
                let m: f64 = mass.parse().map_err(|_| parse_err(*cm, format!("invalid mass `{mass}`")))?;
                if !(l.is_finite() && l > 0.0) {
                    return Err(parse_err(*cl, format!("location must be positive, got {loc}")));
                }
                if !(m.is_finite() && m > 0.0) {
                    return Err(parse_err(*cm, format!("mass must be positive, got {mass}")));
                }
                atoms.push((l, m));
            }
            [(c, "atom"), ..] => {
                return Err(parse_err(*c, "expected `atom <location> <mass>`".into()));
            }
            [(_, "name"), (_, id)] => name = (*id).to_string(),
            [(c, "name"), ..] => return Err(parse_err(*c, "expected `name <id>`".into())),
            [(c, key), ..] => return Err(parse_err(*c, format!("unknown key `{key}`"))),
        }
    }
    if atoms.is_empty() {
        return Err(Error::Parse { line: last_line.max(1), column: 1, message: "model file lists no atoms".into() });
    }
    make_named_laplace_model(&LaplaceMeasureSpec::new(atoms), &name)
}

/// Logistic function evaluated without overflow.
fn logistic(r: f64) -> f64 {
    if r >= 0.0 {
        1.0 / (1.0 + (-r).exp())
    } else {
        let e = r.exp();
        e / (1.0 + e)
    }
}

/// Tilted distribution of an atomic measure at `r`.
struct Tilt {
    log_f: f64,
    sigma: f64,
    mean: f64,
    var: f64,
    third: f64,
}

fn tilt(atoms: &[(f64, f64)], log_masses: &[f64], r: f64) -> Tilt {
    // exponents of the terms m_k e^{l_k r}; the constant term 1 has exponent 0
    let exps: Vec<f64> = atoms.iter().zip(log_masses).map(|(a, lm)| a.0 * r + lm).collect();
    let (arg, peak) =
        exps.iter().enumerate().fold((None, 0.0f64), |acc, (i, &e)| if e > acc.1 { (Some(i), e) } else { acc });
    let w0 = (-peak).exp();
    let weights: Vec<f64> = exps.iter().map(|e| (e - peak).exp()).collect();
    let rest: f64 = weights.iter().sum();
    let others: f64 = match arg {
        None => rest,
        Some(i) => w0 + weights.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, w)| w).sum::<f64>(),
    };
    let total = w0 + rest;
    let log_f = peak + others.ln_1p();
    let first: f64 = weights.iter().zip(atoms).map(|(w, a)| w * a.0).sum();
    let mean = first / total;
    let mut var = w0 * mean * mean;
    let mut third = -w0 * mean * mean * mean;
    for (w, a) in weights.iter().zip(atoms) {
        let d = a.0 - mean;
        var += w * d * d;
        third += w * d * d * d;
    }
    Tilt { log_f, sigma: rest / total, mean, var: var / total, third: third / total }
}

impl SigmaModel {
    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ModelKind::Zero)
    }

    pub fn is_cutoff(&self) -> bool {
        matches!(self.kind, ModelKind::Cutoff)
    }

    pub fn is_kpz(&self) -> bool {
        matches!(self.kind, ModelKind::Kpz)
    }

    /// Atoms of the measure behind `F`, when there is one.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            ModelKind::Kpz => Some(vec![(1.0, 1.0)]),
            ModelKind::Laplace { atoms, .. } => Some(atoms.clone()),
            _ => None,
        }
    }
}

impl Weight for SigmaModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn sigma(&self, r: f64) -> f64 {
        match &self.kind {
            ModelKind::Kpz => logistic(r),
            ModelKind::Laplace { atoms, log_masses } => tilt(atoms, log_masses, r).sigma,
            ModelKind::Cutoff => {
                if r > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ModelKind::Zero => 0.0,
        }
    }

    fn log_f(&self, r: f64) -> f64 {
        match &self.kind {
            ModelKind::Kpz => r.max(0.0) + (-r.abs()).exp().ln_1p(),
            ModelKind::Laplace { atoms, log_masses } => tilt(atoms, log_masses, r).log_f,
            ModelKind::Cutoff => {
                if r > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            ModelKind::Zero => 0.0,
        }
    }

    fn log_f_d1(&self, r: f64) -> f64 {
        match &self.kind {
            ModelKind::Kpz => logistic(r),
            ModelKind::Laplace { atoms, log_masses } => tilt(atoms, log_masses, r).mean,
            ModelKind::Cutoff | ModelKind::Zero => 0.0,
        }
    }

    fn log_f_d2(&self, r: f64) -> f64 {
        match &self.kind {
            ModelKind::Kpz => logistic(r) * logistic(-r),
            ModelKind::Laplace { atoms, log_masses } => tilt(atoms, log_masses, r).var,
            ModelKind::Cutoff | ModelKind::Zero => 0.0,
        }
    }

    fn log_f_d3(&self, r: f64) -> f64 {
        match &self.kind {
            ModelKind::Kpz => -logistic(r) * logistic(-r) * (0.5 * r).tanh(),
            ModelKind::Laplace { atoms, log_masses } => tilt(atoms, log_masses, r).third,
            ModelKind::Cutoff | ModelKind::Zero => 0.0,
        }
    }

    fn log_f_excess(&self, r: f64) -> f64 {
        match &self.kind {
            ModelKind::Kpz => {
                if r >= 0.0 {
                    (-r).exp().ln_1p()
                } else {
                    r.exp().ln_1p() - r
                }
            }
            ModelKind::Laplace { atoms, log_masses } => {
                // relative to the term of the largest location, which is last
                let n = atoms.len();
                let top = atoms[n - 1].0 * r + log_masses[n - 1];
                let others: f64 =
                    (0..n - 1).map(|k| (atoms[k].0 * r + log_masses[k] - top).exp()).sum::<f64>() + (-top).exp();
                others.ln_1p()
            }
            ModelKind::Cutoff | ModelKind::Zero => f64::NAN,
        }
    }

    fn tail_constants(&self) -> Result<TailConstants> {
        self.constants.ok_or_else(|| Error::ModelNotAdmissible(self.name.clone()))
    }

    fn admissible(&self) -> bool {
        self.constants.is_some()
    }
}

const J_ORDER: usize = 512;

/// `j = (1/2pi) * int [log(1 - sigma) + (c_+ r + log c'_+) 1_{r>0}] dr`.
pub fn j_sigma<W: Weight + ?Sized>(model: &W) -> Result<f64> {
    let c = model.tail_constants()?;
    if !model.admissible() {
        return Err(Error::ModelNotAdmissible(model.name().to_string()));
    }
    let base = gauss_legendre(J_ORDER)?;
    let left = map_rule(&base, -40.0 / c.c_minus, 0.0)?;
    let right = map_rule(&base, 0.0, 40.0 / c.epsilon)?;
    let neg = left.integrate(|r| model.log_f(r));
    let pos = right.integrate(|r| model.log_f_excess(r));
    Ok(-(neg + pos) / (2.0 * PI))
}

/// One named check of [`check_assumptions`].
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest slack over the grid; negative when the check fails.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub model: String,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Grid `-30, -29.5, ..., 30`.
pub fn assumption_grid() -> impl Iterator<Item = f64> {
    (0..=120).map(|i| -30.0 + 0.5 * i as f64)
}

/// Evaluates the admissibility conditions of `model` on the standard grid.
pub fn check_assumptions<W: Weight + ?Sized>(model: &W) -> AssumptionReport {
    let mut checks = Vec::new();
    let mut push = |name, margin: f64| {
        checks.push(AssumptionCheck { name, passed: margin >= 0.0, worst_margin: margin });
    };
    push("admissible", if model.admissible() { 0.0 } else { -1.0 });

    let min_over = |f: &dyn Fn(f64) -> f64| assumption_grid().map(f).fold(f64::INFINITY, f64::min);
    let range = min_over(&|r| {
        let s = model.sigma(r);
        if s.is_nan() {
            -1.0
        } else {
            // sigma == 1 counts as a violation of the strict bound
            s.min(if s < 1.0 { 1.0 - s } else { 1.0 - s - f64::MIN_POSITIVE })
        }
    });
    push("sigma_range", range);
    push("log_f_d1_nonnegative", min_over(&|r| model.log_f_d1(r) + 1e-12));
    push("log_f_d2_nonnegative", min_over(&|r| model.log_f_d2(r) + 1e-12));
    push(
        "sigma_log_f_consistency",
        min_over(&|r| {
            let lf = model.log_f(r);
            let implied = -(-lf).exp_m1();
            1e-12 - (model.sigma(r) - implied).abs()
        }),
    );
    match model.tail_constants() {
        Ok(c) => {
            let r = 20.0;
            let left = 10.0 * c.c_minus_prime * (-c.c_minus * r).exp() - model.log_f(-r).abs();
            push("left_tail", left);
            let resid = model.log_f_excess(r);
            push("right_tail", 10.0 * (-c.epsilon * r).exp() - resid.abs());
        }
        Err(_) => {
            push("left_tail", f64::NEG_INFINITY);
            push("right_tail", f64::NEG_INFINITY);
        }
    }
    AssumptionReport { model: model.name().to_string(), checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kpz_basics() {
        let m = make_kpz_model();
        assert_eq!(m.sigma(0.0), 0.5);
        assert!((m.log_f(0.0) - 2f64.ln()).abs() < 1e-16);
        let c = m.tail_constants().unwrap();
        assert_eq!((c.c_plus, c.c_plus_prime), (1.0, 1.0));
        assert!(m.log_f(1e4).is_finite());
        assert_eq!(m.sigma(-800.0), 0.0);
    }

    #[test]
    fn laplace_constants() {
        let m = make_laplace_model(&LaplaceMeasureSpec::new(vec![(0.5, 0.5), (1.0, 2.0)])).unwrap();
        let c = m.tail_constants().unwrap();
        assert_eq!((c.c_plus, c.c_plus_prime, c.c_minus), (1.0, 2.0, 0.5));
        assert_eq!(c.epsilon, 0.5);

        // coinciding leading and trailing atoms add up
        let m = make_laplace_model(&LaplaceMeasureSpec::new(vec![(1.0, 1.0), (0.7, 1.0), (1.0, 1.0)])).unwrap();
        assert_eq!(m.tail_constants().unwrap().c_plus_prime, 2.0);

        assert!(make_laplace_model(&LaplaceMeasureSpec::new(vec![])).is_err());
        assert!(make_laplace_model(&LaplaceMeasureSpec::new(vec![(0.0, 1.0)])).is_err());
        assert!(make_laplace_model(&LaplaceMeasureSpec::new(vec![(1.0, -1.0)])).is_err());
    }

    #[test]
    fn laplace_reproduces_kpz() {
        let kpz = make_kpz_model();
        let lap = make_laplace_model(&LaplaceMeasureSpec::new(vec![(1.0, 1.0)])).unwrap();
        let mut r = -10.0;
        while r <= 10.0 {
            assert!((kpz.sigma(r) - lap.sigma(r)).abs() <= 1e-15);
            assert!((kpz.log_f(r) - lap.log_f(r)).abs() <= 1e-15 * kpz.log_f(r));
            assert!((kpz.log_f_d2(r) - lap.log_f_d2(r)).abs() <= 1e-15);
            assert!((kpz.log_f_d3(r) - lap.log_f_d3(r)).abs() <= 1e-15);
            r += 0.125;
        }
        assert_eq!(kpz.tail_constants(), lap.tail_constants());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let m = make_laplace_model(&LaplaceMeasureSpec::new(vec![(0.5, 0.5), (1.3, 2.0), (2.0, 0.1)])).unwrap();
        for r in [-7.0, -1.0, 0.0, 0.4, 3.0, 9.0] {
            let h = 1e-4;
            let d1 = (m.log_f(r + h) - m.log_f(r - h)) / (2.0 * h);
            let d2 = (m.log_f_d1(r + h) - m.log_f_d1(r - h)) / (2.0 * h);
            let d3 = (m.log_f_d2(r + h) - m.log_f_d2(r - h)) / (2.0 * h);
            assert!((d1 - m.log_f_d1(r)).abs() < 1e-8);
            assert!((d2 - m.log_f_d2(r)).abs() < 1e-8);
            assert!((d3 - m.log_f_d3(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn cutoff_and_zero() {
        let c = make_cutoff_model();
        assert_eq!((c.sigma(-1.0), c.sigma(1.0)), (0.0, 1.0));
        assert!(!c.admissible());
        assert!(matches!(j_sigma(&c), Err(Error::ModelNotAdmissible(_))));
        assert!(j_sigma(&make_zero_model()).is_err());
    }

    #[test]
    fn j_values() {
        let j = j_sigma(&make_kpz_model()).unwrap();
        assert!((j + PI / 12.0).abs() < 1e-10, "{j}");
        let rate2 = make_laplace_model(&LaplaceMeasureSpec::new(vec![(2.0, 1.0)])).unwrap();
        let j2 = j_sigma(&rate2).unwrap();
        assert!((j2 + PI / 24.0).abs() < 1e-9);
        assert!((j2 - j / 2.0).abs() < 1e-9);
        let c = make_kpz_model().tail_constants().unwrap();
        assert!((c.log_t_coefficient(-PI / 12.0) + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn report_examples() {
        assert!(check_assumptions(&make_kpz_model()).passed());
        let r = check_assumptions(&make_cutoff_model());
        assert!(!r.check("admissible").unwrap().passed);
    }

    #[test]
    fn model_file() {
        let m = parse_model_file("# demo\nname two_atoms\natom 0.5 0.5\n\natom 1 2 # trailing\n").unwrap();
        assert_eq!(m.name(), "two_atoms");
        assert_eq!(m.tail_constants().unwrap().c_plus_prime, 2.0);
        match parse_model_file("atom 1 1\natom 1 x\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_model_file("weight 1\n"), Err(Error::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_model_file("\n  atom -1 1"), Err(Error::Parse { line: 2, column: 8, .. })));
        assert!(parse_model_file("# nothing\n").is_err());
        assert!(model_by_id("none").is_err());
    }
}
