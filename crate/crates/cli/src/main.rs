//! `airydet`: single-point evaluation, grid sweeps and verification
//! reports for deformed Airy-kernel determinants.
//!
//! Exit codes: 0 ok, 2 usage, 3 numeric failure, 4 I/O.

mod axis;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use airy_fredholm::asymptotics::{
    logq_asymptotic, logq_kpz_asymptotic, tw_tail, u_asymptotic, AsymptoticEval, ModelConstants,
};
use airy_fredholm::fredholm::{log_q_sigma, log_tracy_widom, DetJob, DetOptions};
use airy_fredholm::kpz_tails::{compare_g_vs_determinant, optimal_p, regime_expansion, tail_bounds, Regime, G};
use airy_fredholm::parallel::with_jobs;
use airy_fredholm::report::{record_to_json, to_csv, to_json, Record};
use airy_fredholm::rh_scalars::{
    endpoint_a_expansion, large_scalars, rh_scalars, solve_endpoint_a, EndpointSolution, RhOptions,
};
use airy_fredholm::sigma::{model_by_id, parse_model_file, SigmaModel, Weight};
use airy_fredholm::sweep::{run_sweep, Axes, SweepSpec};
use airy_fredholm::verify::{run_suite, Suite};
use airy_fredholm::Error as LibError;
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::axis::{parse_axis, parse_scalar};
use crate::config::{usage, Config, Usage};

#[derive(Parser, Debug)]
#[command(name = "airydet", version, about = "Deformed Airy-kernel determinants and their asymptotics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by all commands. Values given here override the config file.
#[derive(Args, Debug, Default)]
struct Common {
    /// Model id (kpz, cutoff, zero) or path to a model file [default: kpz].
    #[arg(long, global = true)]
    model: Option<String>,
    /// x value, list `a,b,c`, range `lo:hi:n` or log range `log:lo:hi:n`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x: Option<String>,
    /// t value or axis, same forms as --x.
    #[arg(long, global = true, allow_hyphen_values = true)]
    t: Option<String>,
    /// KPZ depth s, same forms as --x.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<String>,
    /// KPZ time T, same forms as --x.
    #[arg(long = "T", id = "big_t", global = true)]
    big_t: Option<String>,
    /// Fixed quadrature order; automatic refinement when absent.
    #[arg(long, global = true)]
    order: Option<String>,
    /// Output format [default: csv].
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores [default: 0].
    #[arg(long, global = true)]
    jobs: Option<String>,
    /// Flat `key = value` file with defaults for the options above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// log Q at one point.
    Det {
        /// Add the large-x expansion and its gap.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Grid sweep over (x, t), (s, T) or x at fixed xt.
    Scan {
        /// Sweep x along xt = this value instead of a t axis.
        #[arg(long)]
        xt: Option<f64>,
        /// Also estimate u by finite differences with this step.
        #[arg(long)]
        u_step: Option<f64>,
        /// Also evaluate the steepest-descent scalars.
        #[arg(long)]
        scalars: bool,
    },
    /// Term breakdown of an expansion.
    Asymp {
        #[arg(long, value_enum, default_value_t = What::Logq)]
        what: What,
    },
    /// Band endpoint a(x, t) against its expansion.
    Endpoint,
    /// Lower-tail bounds and expansions at (s, T).
    Tail {
        /// Upper-bound parameter p >= 1; optimized on a grid when absent.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = airy_fredholm::kpz_tails::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        d_plus: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        d_minus: f64,
        /// large_deviation, deep_tail or crossover_small.
        #[arg(long)]
        regime: Option<String>,
        /// Also report log Q + G from the determinant.
        #[arg(long)]
        det: bool,
    },
    /// log F_TW(s) against its left-tail expansion.
    Tw,
    /// Small-xt and large-xt scalars at the same point.
    Compare,
    /// Run a verification suite and print its JSON report.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum What {
    Logq,
    LogqKpz,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

/// Common options after merging flags, config and defaults.
struct Settings {
    model: String,
    x: Option<String>,
    t: Option<String>,
    s: Option<String>,
    big_t: Option<String>,
    order: Option<usize>,
    format: Format,
    out: Option<PathBuf>,
    jobs: usize,
}

impl Settings {
    fn resolve(common: &Common) -> Result<Self> {
        let cfg = match &common.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let format = match cfg.pick("format", common.format.as_deref()).as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(usage(format!("--format must be csv or json, got `{other}`"))),
        };
        let order = cfg
            .pick("order", common.order.as_deref())
            .map(|v| v.parse::<usize>().map_err(|_| usage(format!("--order: `{v}` is not a positive integer"))))
            .transpose()?;
        let jobs = cfg
            .pick("jobs", common.jobs.as_deref())
            .map(|v| v.parse::<usize>().map_err(|_| usage(format!("--jobs: `{v}` is not a thread count"))))
            .transpose()?
            .unwrap_or(0);
        Ok(Settings {
            model: cfg.pick("model", common.model.as_deref()).unwrap_or_else(|| "kpz".to_string()),
            x: cfg.pick("x", common.x.as_deref()),
            t: cfg.pick("t", common.t.as_deref()),
            s: cfg.pick("s", common.s.as_deref()),
            big_t: cfg.pick("T", common.big_t.as_deref()),
            order,
            format,
            out: common.out.clone().or_else(|| cfg.get("out").map(PathBuf::from)),
            jobs,
        })
    }

    fn required<'a>(&self, name: &str, v: &'a Option<String>) -> Result<&'a str> {
        v.as_deref().ok_or_else(|| usage(format!("--{name} is required")))
    }

    fn x(&self) -> Result<f64> {
        parse_scalar("x", self.required("x", &self.x)?)
    }

    fn t(&self) -> Result<f64> {
        parse_scalar("t", self.required("t", &self.t)?)
    }

    fn s(&self) -> Result<f64> {
        parse_scalar("s", self.required("s", &self.s)?)
    }

    fn big_t(&self) -> Result<f64> {
        parse_scalar("T", self.required("T", &self.big_t)?)
    }

    fn model(&self) -> Result<SigmaModel> {
        resolve_model(&self.model)
    }

    fn job<'a>(&self, model: &'a SigmaModel, x: f64, t: f64) -> DetJob<'a> {
        let job = DetJob::new(model, x, t);
        match self.order {
            Some(n) => job.fixed_order(n),
            None => job,
        }
    }

    fn det_options(&self) -> DetOptions {
        match self.order {
            Some(n) => DetOptions { order: n, auto_refine: false, ..DetOptions::default() },
            None => DetOptions::default(),
        }
    }
}

/// Model id, or a model file when the id is unknown and the path exists.
fn resolve_model(spec: &str) -> Result<SigmaModel> {
    match model_by_id(spec) {
        Ok(m) => Ok(m),
        Err(_) if Path::new(spec).is_file() => {
            let text = std::fs::read_to_string(spec).with_context(|| format!("reading model file {spec}"))?;
            parse_model_file(&text).with_context(|| format!("model file {spec}"))
        }
        Err(e) => Err(e.into()),
    }
}

fn emit(settings: &Settings, records: &[Record], sweep: bool) -> Result<()> {
    let text = match settings.format {
        Format::Csv => to_csv(records),
        Format::Json if sweep => to_json(records),
        Format::Json => records.iter().map(|r| record_to_json(r) + "\n").collect(),
    };
    write_text(settings, &text)
}

fn write_text(settings: &Settings, text: &str) -> Result<()> {
    match &settings.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing standard output")?;
            out.flush().context("writing standard output")
        }
    }
}

fn push_eval(rec: &mut Record, eval: &AsymptoticEval) {
    rec.push("y", eval.y);
    for term in &eval.terms {
        rec.push(term.name, term.value);
    }
    rec.push("total", eval.total);
}

fn push_endpoint(rec: &mut Record, sol: &EndpointSolution, x: f64, t: f64) {
    rec.push("a", sol.a);
    rec.push("residual", sol.residual);
    rec.push("tolerance", EndpointSolution::tolerance(x, t));
    rec.push("iterations", sol.iterations);
    rec.push("bracket_lo", sol.bracket.0);
    rec.push("bracket_hi", sol.bracket.1);
    rec.push("bracket_source", format!("{:?}", sol.bracket_source).to_lowercase());
    rec.push("bound", sol.bound);
    rec.push("in_regime", sol.in_regime);
}

fn cmd_det(settings: &Settings, asymptotic: bool) -> Result<()> {
    let model = settings.model()?;
    let (x, t) = (settings.x()?, settings.t()?);
    let r = log_q_sigma(&settings.job(&model, x, t))?;
    let mut rec = Record::new()
        .with("model", model.name())
        .with("x", x)
        .with("t", t)
        .with("log_det", r.log_det)
        .with("eig_min", r.eig_min)
        .with("eig_max", r.eig_max)
        .with("trunc_estimate", r.trunc_estimate)
        .with("order_used", r.order_used)
        .with("stable", r.stable);
    if asymptotic {
        let c = ModelConstants::from_model(&model)?;
        let a = logq_asymptotic(x, t, &c)?.total;
        rec.push("asymptotic_total", a);
        rec.push("gap", r.log_det - a);
    }
    emit(settings, &[rec], false)
}

fn cmd_scan(settings: &Settings, xt: Option<f64>, u_step: Option<f64>, scalars: bool) -> Result<()> {
    let axes = if let Some(product) = xt {
        Axes::FixedProduct { xs: parse_axis("x", settings.required("x", &settings.x)?)?, product }
    } else if settings.s.is_some() || settings.big_t.is_some() {
        Axes::Kpz {
            ss: parse_axis("s", settings.required("s", &settings.s)?)?,
            big_ts: parse_axis("T", settings.required("T", &settings.big_t)?)?,
        }
    } else {
        Axes::Grid {
            xs: parse_axis("x", settings.required("x", &settings.x)?)?,
            ts: parse_axis("t", settings.required("t", &settings.t)?)?,
        }
    };
    let spec = SweepSpec { model: settings.model()?, axes, order: settings.order, u_step, scalars };
    let rows = run_sweep(&spec, settings.jobs != 1)?;
    emit(settings, &rows, true)
}

fn cmd_asymp(settings: &Settings, what: What) -> Result<()> {
    let model = settings.model()?;
    let (x, t) = (settings.x()?, settings.t()?);
    let eval = match what {
        What::Logq => logq_asymptotic(x, t, &ModelConstants::from_model(&model)?)?,
        What::U => u_asymptotic(x, t, &ModelConstants::from_model(&model)?)?,
        What::LogqKpz => {
            if !model.is_kpz() {
                return Err(usage("--what logq-kpz needs --model kpz"));
            }
            logq_kpz_asymptotic(x, t)?
        }
    };
    let mut rec = Record::new().with("model", model.name()).with("x", x).with("t", t);
    push_eval(&mut rec, &eval);
    emit(settings, &[rec], false)
}

fn cmd_endpoint(settings: &Settings) -> Result<()> {
    let model = settings.model()?;
    let (x, t) = (settings.x()?, settings.t()?);
    let sol = solve_endpoint_a(x, t, &model)?;
    let expansion = endpoint_a_expansion(x, t, &model)?;
    let mut rec = Record::new().with("model", model.name()).with("x", x).with("t", t);
    push_endpoint(&mut rec, &sol, x, t);
    rec.push("expansion", expansion);
    rec.push("gap", sol.a - expansion);
    emit(settings, &[rec], false)
}

struct TailArgs {
    p: Option<f64>,
    epsilon: f64,
    d_plus: f64,
    d_minus: f64,
    regime: Option<String>,
    det: bool,
}

fn cmd_tail(settings: &Settings, args: TailArgs) -> Result<()> {
    let (s, big_t) = (settings.s()?, settings.big_t()?);
    let p = match args.p {
        Some(p) => p,
        None => optimal_p(s, big_t, 200)?.0,
    };
    let b = tail_bounds(s, big_t, p, args.epsilon, args.d_plus, args.d_minus)?;
    let mut rec = Record::new()
        .with("s", s)
        .with("big_t", big_t)
        .with("g", G(s, big_t)?)
        .with("lower_log_prob", b.lower_log_prob)
        .with("upper_log_prob", b.upper_log_prob)
        .with("p_used", b.p_used)
        .with("q_used", b.q_used)
        .with("epsilon", b.epsilon)
        .with("d_plus", b.d_plus)
        .with("d_minus", b.d_minus);
    if let Some(name) = &args.regime {
        let regime: Regime = name.parse()?;
        rec.push("regime", regime.as_str());
        rec.push("regime_expansion", regime_expansion(s, big_t, regime)?);
    }
    if args.det {
        rec.push("log_q_plus_g", compare_g_vs_determinant(s, big_t)?);
    }
    emit(settings, &[rec], false)
}

fn cmd_tw(settings: &Settings) -> Result<()> {
    let s = settings.s()?;
    let r = log_tracy_widom(s, &settings.det_options())?;
    let tail = if s < 0.0 { tw_tail(-s)? } else { f64::NAN };
    let rec = Record::new()
        .with("s", s)
        .with("log_f_tw", r.log_det)
        .with("eig_max", r.eig_max)
        .with("order_used", r.order_used)
        .with("stable", r.stable)
        .with("tail_expansion", tail)
        .with("gap", r.log_det - tail);
    emit(settings, &[rec], false)
}

fn cmd_compare(settings: &Settings) -> Result<()> {
    let model = settings.model()?;
    let (x, t) = (settings.x()?, settings.t()?);
    let opts = RhOptions::default();
    let nan = f64::NAN;
    let mut rec = Record::new().with("model", model.name()).with("x", x).with("t", t).with("xt", x * t);
    let small = rh_scalars(x, t, &model, &opts);
    let large = large_scalars(x, t, &model, &opts);
    let s = small.as_ref().ok();
    let l = large.as_ref().ok();
    rec.push("small_regime", opts.small_regime(x, t));
    rec.push("alpha", s.map_or(nan, |s| s.alpha));
    rec.push("g1_small", s.map_or(nan, |s| s.g1_small));
    rec.push("d1", s.map_or(nan, |s| s.d1));
    rec.push("chi", s.map_or(nan, |s| s.chi));
    rec.push("f1_small", s.map_or(nan, |s| s.f1_small));
    rec.push("f2_small", s.map_or(nan, |s| s.f2_small));
    rec.push("large_regime", opts.large_regime(x, t));
    rec.push("a", l.map_or(nan, |l| l.endpoint.a));
    rec.push("g1_large", l.map_or(nan, |l| l.g1));
    rec.push("f1_large", l.map_or(nan, |l| l.f1));
    rec.push("f2_large", l.map_or(nan, |l| l.f2));
    rec.push("a_minus_xt_alpha", l.zip(s).map_or(nan, |(l, s)| l.endpoint.a - x * t * s.alpha));
    rec.push("g1_difference", l.zip(s).map_or(nan, |(l, s)| l.g1 - s.g1_small));
    rec.push("small_status", small.as_ref().err().map_or("ok".to_string(), |e| e.to_string()));
    rec.push("large_status", large.as_ref().err().map_or("ok".to_string(), |e| e.to_string()));
    emit(settings, &[rec], false)
}

/// The suite ran but at least one criterion failed.
#[derive(Debug)]
struct VerifyFailed;

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerifyFailed {}

fn cmd_verify(settings: &Settings, suite: &str) -> Result<()> {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite)?;
    for c in &report.criteria {
        eprintln!("{}", c.summary_line());
    }
    write_text(settings, &report.to_json())?;
    if report.passed {
        Ok(())
    } else {
        Err(VerifyFailed.into())
    }
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings::resolve(&cli.common)?;
    let jobs = settings.jobs;
    with_jobs(jobs, move || match cli.command {
        Command::Det { asymptotic } => cmd_det(&settings, asymptotic),
        Command::Scan { xt, u_step, scalars } => cmd_scan(&settings, xt, u_step, scalars),
        Command::Asymp { what } => cmd_asymp(&settings, what),
        Command::Endpoint => cmd_endpoint(&settings),
        Command::Tail { p, epsilon, d_plus, d_minus, regime, det } => {
            cmd_tail(&settings, TailArgs { p, epsilon, d_plus, d_minus, regime, det })
        }
        Command::Tw => cmd_tw(&settings),
        Command::Compare => cmd_compare(&settings),
        Command::Verify { suite } => cmd_verify(&settings, &suite),
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if cause.is::<VerifyFailed>() {
            return 3;
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<LibError>() {
            return match e {
                LibError::NearSingular { .. } | LibError::EndpointBracket { .. } => 3,
                LibError::InvalidArgument(_) | LibError::ModelNotAdmissible(_) | LibError::Parse { .. } => 2,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
