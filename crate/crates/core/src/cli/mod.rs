//! The `greenfcc` command line.
//!
//! ```text
//! greenfcc eval        --t 4 --gamma 1 --lmn 0 0 0 --method series5
//! greenfcc sweep       --t-range 3.5 10 0.5 --lmn 0 0 0 --method series5,quadrature
//! greenfcc compare     --t 4 --lmn 2 0 0
//! greenfcc convergence --t 5 --terms 30 --accel wynn --format csv
//! ```
//!
//! Exit status: 0 when every reported value converged, 2 when a value was
//! produced but did not reach `--tol`, 1 on bad input (parse errors, domain
//! violations, I/O failures).

mod config;
mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use config::ConfigFile;
pub use output::{write_records, Field, Format, Record};

use crate::green_series::{
    accelerate_partial_sums, evaluate_series, series_trace, SeriesOptions, DEFAULT_N_MAX,
    DEFAULT_TOL,
};
use crate::oracle_quadrature::{green_by_quadrature, QuadratureSpec};
use crate::params::{Acceleration, GreenParams, Method, SeriesEvaluation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

const DEFAULT_TERMS: usize = 30;
/// Upper bound on the number of points in one sweep.
const MAX_SWEEP_POINTS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "greenfcc",
    version,
    about = "Face-centered cubic lattice Green function G(t, l, m, n; gamma)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate G at one point.
    Eval(PointArgs),
    /// Evaluate G on a grid of t (and optionally gamma) values.
    Sweep(SweepArgs),
    /// Evaluate one point with several methods.
    Compare(PointArgs),
    /// Print every term of a series with its partial sum and tail bound.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Anisotropy of the xy bonds.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Lattice site; l+m+n must be even.
    #[arg(long, num_args = 3, value_names = ["L", "M", "N"])]
    lmn: Option<Vec<u32>>,
    /// series5, series6 or quadrature (comma-separated list for sweep/compare).
    #[arg(long)]
    method: Option<String>,
    /// Transform for unconverged partial sums: none, wynn or aitken.
    #[arg(long)]
    accel: Option<String>,
    /// Absolute error target [default: 1e-10].
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum number of outer series terms [default: 400].
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// json (one object per line) or csv.
    #[arg(long)]
    format: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read settings from a key = value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report wall_time_ms as null so that output is reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long = "t", allow_negative_numbers = true)]
    t: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Single t value (instead of --t-range).
    #[arg(long = "t", allow_negative_numbers = true)]
    t: Option<f64>,
    /// START STOP STEP, both ends inclusive.
    #[arg(long = "t-range", num_args = 3, value_names = ["START", "STOP", "STEP"], allow_negative_numbers = true)]
    t_range: Option<Vec<f64>>,
    /// START STOP STEP for gamma; the outer loop of the grid.
    #[arg(long = "gamma-range", num_args = 3, value_names = ["START", "STOP", "STEP"], allow_negative_numbers = true)]
    gamma_range: Option<Vec<f64>>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[arg(long = "t", allow_negative_numbers = true)]
    t: Option<f64>,
    /// Number of terms to print [default: 30].
    #[arg(long)]
    terms: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Everything a command needs once flags and the config file are merged.
#[derive(Debug, Clone)]
struct Settings {
    t: Option<f64>,
    gamma: f64,
    lmn: [u32; 3],
    methods: Vec<Method>,
    accel: Acceleration,
    tol: f64,
    n_max: usize,
    format: Format,
    out: Option<PathBuf>,
    timing: bool,
}

impl Settings {
    fn resolve(common: &CommonArgs, t: Option<f64>, cfg: &ConfigFile) -> Result<Self, String> {
        let lmn = match &common.lmn {
            Some(v) => [v[0], v[1], v[2]],
            None => cfg.get_array::<u32, 3>("lmn")?.unwrap_or([0, 0, 0]),
        };
        let method_list = match &common.method {
            Some(m) => Some(m.clone()),
            None => cfg.get::<String>("method")?,
        };
        let methods = match method_list {
            Some(list) => parse_methods(&list)?,
            None => Vec::new(),
        };
        let accel = match &common.accel {
            Some(a) => a.parse().map_err(|e: crate::Error| e.to_string())?,
            None => cfg
                .get::<String>("accel")?
                .map_or(Ok(Acceleration::None), |a| {
                    a.parse().map_err(|e: crate::Error| e.to_string())
                })?,
        };
        let format = match &common.format {
            Some(f) => f.parse()?,
            None => cfg
                .get::<String>("format")?
                .map_or(Ok(Format::Json), |f| f.parse())?,
        };
        let no_timing = common.no_timing || cfg.get::<bool>("no-timing")?.unwrap_or(false);
        Ok(Self {
            t: t.or(cfg.get("t")?),
            gamma: common.gamma.or(cfg.get("gamma")?).unwrap_or(1.0),
            lmn,
            methods,
            accel,
            tol: common.tol.or(cfg.get("tol")?).unwrap_or(DEFAULT_TOL),
            n_max: common.n_max.or(cfg.get("n-max")?).unwrap_or(DEFAULT_N_MAX),
            format,
            out: common.out.clone().or(cfg.get("out")?),
            timing: !no_timing,
        })
    }

    fn params(&self, t: f64, gamma: f64) -> crate::Result<GreenParams> {
        let [l, m, n] = self.lmn;
        GreenParams::new(t, gamma, l, m, n)
    }

    fn require_t(&self) -> Result<f64, String> {
        self.t.ok_or_else(|| "missing --t".to_string())
    }

    fn methods_or(&self, default: &[Method]) -> Vec<Method> {
        if self.methods.is_empty() {
            default.to_vec()
        } else {
            self.methods.clone()
        }
    }

    fn single_method(&self) -> Result<Method, String> {
        match self.methods.as_slice() {
            [] => Ok(Method::Series5),
            [m] => Ok(*m),
            _ => Err("this command takes a single --method".into()),
        }
    }

    fn series_options(&self) -> SeriesOptions {
        SeriesOptions {
            tol: self.tol,
            n_max: self.n_max,
            accel: self.accel,
            ..SeriesOptions::default()
        }
    }

    fn load_config(path: Option<&PathBuf>) -> Result<ConfigFile, String> {
        path.map_or(Ok(ConfigFile::default()), |p| ConfigFile::load(p))
    }
}

fn parse_methods(list: &str) -> Result<Vec<Method>, String> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Method = name.parse().map_err(|e: crate::Error| e.to_string())?;
        if out.contains(&m) {
            return Err(format!("method '{m}' listed twice"));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err("empty --method list".into());
    }
    Ok(out)
}

/// Grid `start, start + step, ...` up to `stop` inclusive. Points are
/// computed as `start + k·step`, not by accumulation.
fn range_points(spec: [f64; 3], name: &str) -> Result<Vec<f64>, String> {
    let [start, stop, step] = spec;
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(format!("{name} range must be finite"));
    }
    if step <= 0.0 {
        return Err(format!("{name} range step must be > 0, got {step}"));
    }
    if stop < start {
        return Err(format!(
            "{name} range is empty: stop {stop} < start {start}"
        ));
    }
    let count = ((stop - start) / step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
    if count > MAX_SWEEP_POINTS {
        return Err(format!(
            "{name} range has {count} points (limit {MAX_SWEEP_POINTS})"
        ));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn evaluate(params: &GreenParams, method: Method, s: &Settings) -> crate::Result<SeriesEvaluation> {
    match method {
        Method::Quadrature => {
            let spec = QuadratureSpec {
                target_tol: s.tol,
                ..QuadratureSpec::for_params(params)
            };
            green_by_quadrature(params, &spec)
        }
        series => evaluate_series(params, series, &s.series_options()),
    }
}

fn echo(params: &GreenParams) -> Record {
    Record::new()
        .with("t", params.t)
        .with("gamma", params.gamma)
        .with("l", params.l)
        .with("m", params.m)
        .with("n", params.n)
}

/// Evaluate at one point; the wall time is only reported when `timing` is on.
fn eval_record(
    params: &GreenParams,
    method: Method,
    s: &Settings,
) -> crate::Result<(Record, bool)> {
    let start = Instant::now();
    let ev = evaluate(params, method, s)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let wall = s.timing.then(|| (elapsed * 1e3).round() / 1e3);
    let record = echo(params)
        .with("method", method.as_str())
        .with("accel", s.accel.as_str())
        .with("value", ev.value)
        .with("abs_error_estimate", ev.abs_error_estimate)
        .with("terms_used", ev.terms_used)
        .with("converged", ev.converged)
        .with("wall_time_ms", wall);
    Ok((record, ev.converged))
}

/// Output of one command: the records and the exit status they imply.
struct Report {
    records: Vec<Record>,
    status: i32,
}

fn status_for(all_converged: bool) -> i32 {
    if all_converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn cmd_eval(args: &PointArgs) -> Result<(Settings, Report), String> {
    let cfg = Settings::load_config(args.common.config.as_ref())?;
    let s = Settings::resolve(&args.common, args.t, &cfg)?;
    let params = s
        .params(s.require_t()?, s.gamma)
        .map_err(|e| e.to_string())?;
    let method = s.single_method()?;
    let (record, converged) = eval_record(&params, method, &s).map_err(|e| e.to_string())?;
    Ok((
        s,
        Report {
            records: vec![record],
            status: status_for(converged),
        },
    ))
}

fn cmd_compare(args: &PointArgs) -> Result<(Settings, Report), String> {
    let cfg = Settings::load_config(args.common.config.as_ref())?;
    let s = Settings::resolve(&args.common, args.t, &cfg)?;
    let params = s
        .params(s.require_t()?, s.gamma)
        .map_err(|e| e.to_string())?;
    let methods = s.methods_or(&Method::ALL);
    let mut records = Vec::new();
    let mut all_converged = true;
    let mut reference = None;
    for method in methods {
        let (mut record, converged) =
            eval_record(&params, method, &s).map_err(|e| e.to_string())?;
        let value = match record.get("value") {
            Some(Field::Float(v)) => *v,
            _ => f64::NAN,
        };
        let reference = *reference.get_or_insert(value);
        record.push("diff_from_first", value - reference);
        all_converged &= converged;
        records.push(record);
    }
    Ok((
        s,
        Report {
            records,
            status: status_for(all_converged),
        },
    ))
}

fn cmd_sweep(args: &SweepArgs) -> Result<(Settings, Report), String> {
    let cfg = Settings::load_config(args.common.config.as_ref())?;
    let s = Settings::resolve(&args.common, args.t, &cfg)?;
    let t_range = match &args.t_range {
        Some(v) => Some([v[0], v[1], v[2]]),
        None => cfg.get_array::<f64, 3>("t-range")?,
    };
    let ts = match (t_range, s.t) {
        (Some(r), _) => range_points(r, "t")?,
        (None, Some(t)) => vec![t],
        (None, None) => return Err("sweep needs --t-range or --t".into()),
    };
    let gamma_range = match &args.gamma_range {
        Some(v) => Some([v[0], v[1], v[2]]),
        None => cfg.get_array::<f64, 3>("gamma-range")?,
    };
    let gammas = match gamma_range {
        Some(r) => range_points(r, "gamma")?,
        None => vec![s.gamma],
    };
    if ts.len() * gammas.len() > MAX_SWEEP_POINTS {
        return Err(format!("sweep grid exceeds {MAX_SWEEP_POINTS} points"));
    }
    let methods = s.methods_or(&[Method::Series5]);
    let grid: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| ts.iter().map(move |&t| (t, g)))
        .collect();

    let rows: Vec<(Record, bool)> = grid
        .par_iter()
        .map(|&(t, gamma)| sweep_row(t, gamma, &methods, &s))
        .collect();
    let all_converged = rows.iter().all(|(_, c)| *c);
    Ok((
        s,
        Report {
            records: rows.into_iter().map(|(r, _)| r).collect(),
            status: status_for(all_converged),
        },
    ))
}

/// One grid point. A point that cannot be evaluated keeps its row, with
/// empty values and the reason in `note`.
fn sweep_row(t: f64, gamma: f64, methods: &[Method], s: &Settings) -> (Record, bool) {
    let [l, m, n] = s.lmn;
    let mut record = Record::new()
        .with("t", t)
        .with("gamma", gamma)
        .with("l", l)
        .with("m", m)
        .with("n", n);
    let paired = methods.len() > 1;
    let mut notes = Vec::new();
    let mut all_converged = true;
    for &method in methods {
        let result = s.params(t, gamma).and_then(|p| evaluate(&p, method, s));
        let (value, error, terms, converged) = match result {
            Ok(ev) => (
                Some(ev.value),
                Some(ev.abs_error_estimate),
                Some(ev.terms_used),
                ev.converged,
            ),
            Err(e) => {
                notes.push(if paired {
                    format!("{method}: {e}")
                } else {
                    e.to_string()
                });
                (None, None, None, false)
            }
        };
        all_converged &= converged;
        let key = |name: &str| {
            if paired {
                format!("{method}_{name}")
            } else {
                name.to_string()
            }
        };
        if !paired {
            record.push("method", method.as_str());
        }
        record.push(key("value"), value);
        record.push(key("error"), error);
        record.push(key("terms"), terms);
        record.push(key("converged"), converged);
    }
    record.push("note", notes.join("; "));
    (record, all_converged)
}

fn cmd_convergence(args: &ConvergenceArgs) -> Result<(Settings, Report), String> {
    let cfg = Settings::load_config(args.common.config.as_ref())?;
    let s = Settings::resolve(&args.common, args.t, &cfg)?;
    let params = s
        .params(s.require_t()?, s.gamma)
        .map_err(|e| e.to_string())?;
    let method = s.single_method()?;
    if !method.is_series() {
        return Err("convergence needs a series method (series5 or series6)".into());
    }
    let terms = args.terms.or(cfg.get("terms")?).unwrap_or(DEFAULT_TERMS);
    let opts = SeriesOptions {
        n_max: terms,
        ..s.series_options()
    };
    let trace = series_trace(&params, method, &opts).map_err(|e| e.to_string())?;

    let mut records = Vec::with_capacity(trace.terms.len());
    let mut last_accel = None;
    for i in 0..trace.terms.len() {
        let accelerated = match s.accel {
            Acceleration::None => None,
            accel => accelerate_partial_sums(&trace.partial_sums[..=i], trace.ratio, method, accel),
        };
        last_accel = accelerated;
        records.push(
            echo(&params)
                .with("method", method.as_str())
                .with("accel", s.accel.as_str())
                .with("i", i)
                .with("term_i", trace.terms[i])
                .with("partial_sum_i", trace.partial_sums[i])
                .with("tail_bound_i", trace.tail_bounds[i])
                .with("accelerated_estimate_i", accelerated.map(|a| a.value)),
        );
    }
    let converged = trace.converged
        || last_accel.is_some_and(|a| a.error_estimate + trace.inner_residual <= s.tol);
    Ok((
        s,
        Report {
            records,
            status: status_for(converged),
        },
    ))
}

fn emit(s: &Settings, report: &Report, stdout: &mut dyn Write) -> Result<(), String> {
    match &s.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_records(&report.records, s.format, &mut w)
        }
        None => write_records(&report.records, s.format, stdout),
    }
    .map_err(|e| format!("write failed: {e}"))
}

/// Run the CLI on `args` (including the program name) and return the exit
/// status. Records go to `stdout` (or `--out`); diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    if !text.contains("Usage:") {
                        let _ = writeln!(stderr, "\n{}", usage_for(&argv));
                    }
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Convergence(a) => cmd_convergence(a),
    };
    let result = outcome.and_then(|(s, report)| emit(&s, &report, stdout).map(|_| report.status));
    match result {
        Ok(status) => status,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Usage line of the subcommand named in `argv`, or of the whole program.
fn usage_for(argv: &[OsString]) -> String {
    use clap::CommandFactory;
    let mut cmd = Cli::command();
    cmd.build();
    let name = argv.get(1).and_then(|a| a.to_str()).unwrap_or("");
    match cmd.find_subcommand_mut(name) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
