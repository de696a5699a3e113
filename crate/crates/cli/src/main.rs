//! `maser-tur`: evaluate single operating points, write the datasets behind
//! each figure, run histogram sweeps and the self-validation suite.
//!
//! Exit codes: 0 success, 1 invalid input, 2 degenerate physics,
//! 3 numerical failure (including failed validation).

mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maser_tur::io::{csv_string, fmt_f64, json_string, write_file, Metadata};
use maser_tur::sweep::{lambda_curve, p_curve, Curve, ParamRanges};
use maser_tur::validate::{self, ValidationConfig};
use maser_tur::{
    exec, q_histogram, tur_q_with, EngineParams, Histogram, Method, ModelKind, Precision,
    SweepSpec, TurError, TurOptions, TurReport, VERSION,
};

#[derive(Parser)]
#[command(
    name = "maser-tur",
    version,
    about = "Counting statistics and TUR ratios of maser heat engines"
)]
#[command(args_override_self = true)]
struct Cli {
    /// Read default flag values from a `key = value` file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate current, variance, σ, Q and R at one operating point.
    Eval(EvalArgs),
    /// Write the datasets behind one of the figures.
    Figure(FigureArgs),
    /// Histogram of Q over random operating points.
    Sweep(SweepArgs),
    /// Run the self-validation suite.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Args)]
struct EvalArgs {
    /// Engine model: I, II or NIC.
    #[arg(long)]
    model: ModelKind,
    /// Hot-bath coupling Γ_h.
    #[arg(long = "gamma-h")]
    gamma_h: f64,
    /// Cold-bath coupling Γ_c.
    #[arg(long = "gamma-c")]
    gamma_c: f64,
    /// Matter-field coupling λ.
    #[arg(long)]
    lambda: f64,
    /// Hot-bath occupation n_h.
    #[arg(long)]
    nh: f64,
    /// Cold-bath occupation n_c.
    #[arg(long)]
    nc: f64,
    /// Noise-induced coherence p = cos θ (NIC only).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    p: f64,
    /// Cumulant route: charpoly, eigfd or trajectory.
    #[arg(long, default_value = "charpoly")]
    method: Method,
    /// Arithmetic: double, double-double or auto.
    #[arg(long, default_value = "double-double")]
    precision: Precision,
    /// Seed for the trajectory method.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_enum)]
    figure: Figure,
    /// Samples per model (fig3).
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Sampling seed (fig3).
    #[arg(long, default_value_t = ValidationConfig::default().seed)]
    seed: u64,
    /// Grid points per curve (default 200 in λ, 201 in p).
    #[arg(long)]
    points: Option<usize>,
    /// Arithmetic for fig3 sweeps.
    #[arg(long, default_value = "auto")]
    precision: Precision,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output directory.
    #[arg(long, env = "MASER_TUR_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Engine model: I, II or NIC.
    #[arg(long)]
    model: ModelKind,
    /// Number of random operating points.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Sampling seed.
    #[arg(long, default_value_t = ValidationConfig::default().seed)]
    seed: u64,
    /// Histogram bin width in Q.
    #[arg(long = "bin-width", default_value_t = 0.01)]
    bin_width: f64,
    /// Pin a parameter instead of sampling it, e.g. `--fix lambda=0.2`.
    #[arg(long, value_name = "NAME=VALUE", allow_negative_numbers = true)]
    fix: Vec<String>,
    /// Cumulant route: charpoly, eigfd or trajectory.
    #[arg(long, default_value = "charpoly")]
    method: Method,
    /// Arithmetic: double, double-double or auto.
    #[arg(long, default_value = "auto")]
    precision: Precision,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output directory.
    #[arg(long, env = "MASER_TUR_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Add the Monte Carlo agreement check.
    #[arg(long = "with-trajectory")]
    with_trajectory: bool,
    /// Seed for the random draws.
    #[arg(long, default_value_t = ValidationConfig::default().seed)]
    seed: u64,
    /// Random draws per model for the cross-method checks.
    #[arg(long, default_value_t = ValidationConfig::default().draws)]
    draws: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    /// Argument-parser error, already formatted.
    Usage(String),
    Invalid(String),
    Degenerate(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Invalid(_) => 1,
            Failure::Degenerate(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Invalid(m) => write!(f, "invalid input: {m}"),
            Failure::Degenerate(m) => write!(f, "degenerate: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

fn flag_of(field: &str) -> &str {
    match field {
        "gamma_h" => "--gamma-h",
        "gamma_c" => "--gamma-c",
        "lambda" => "--lambda",
        "n_h" => "--nh",
        "n_c" => "--nc",
        "p" => "--p",
        "model" => "--model",
        "method" => "--method",
        other => other,
    }
}

impl From<TurError> for Failure {
    fn from(e: TurError) -> Self {
        match e {
            TurError::InvalidParams { field, reason } => {
                Failure::Invalid(format!("{} {reason}", flag_of(&field)))
            }
            TurError::Io(m) => Failure::Invalid(m),
            e if e.is_degenerate() => Failure::Degenerate(e.to_string()),
            e => Failure::Numeric(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Metadata block shared by every output file.
fn metadata(command: &str) -> Metadata {
    let stamp = std::env::var("SOURCE_DATE_EPOCH")
        .map(|s| format!("unix {s}"))
        .unwrap_or_else(|_| "unset".into());
    Metadata::new()
        .with("command", command)
        .with("version", VERSION)
        .with("timestamp", stamp)
}

fn params_meta(mut m: Metadata, p: &EngineParams) -> Metadata {
    for (k, v) in [
        ("gamma_h", p.gamma_h),
        ("gamma_c", p.gamma_c),
        ("lambda", p.lambda),
        ("n_h", p.n_h),
        ("n_c", p.n_c),
        ("p", p.p),
    ] {
        m.push(k, fmt_f64(v));
    }
    m
}

fn save(path: &Path, text: &str) -> Outcome {
    write_file(path, text).map_err(|e| Failure::Invalid(format!("--out {}: {e}", path.display())))
}

fn cmd_eval(a: &EvalArgs, command: &str) -> Outcome {
    let params = EngineParams::new(a.gamma_h, a.gamma_c, a.lambda, a.nh, a.nc, a.p)?;
    if params.n_h == params.n_c {
        return Err(Failure::Degenerate("zero current at threshold".into()));
    }
    let mut opts = TurOptions::default();
    opts.fcs.precision = a.precision;
    opts.trajectory.seed = a.seed;
    let report = tur_q_with(a.model, &params, a.method, &opts)?;
    let meta = metadata(command).with("seed", a.seed);
    let text = match a.format {
        Format::Csv => csv_string(&meta, &TurReport::CSV_HEADER, &[report.csv_fields()]),
        Format::Json => json_string(&meta, &report)?,
    };
    match &a.out {
        Some(path) => save(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn curve_meta(command: &str, base: &EngineParams, kind: ModelKind, c: &Curve) -> Metadata {
    let failed = c.points.iter().filter(|p| p.report.is_none()).count();
    params_meta(
        metadata(command).with("seed", "none").with("model", kind),
        base,
    )
    .with("abscissa", &c.abscissa)
    .with("failed_points", failed)
}

fn write_curve(dir: &Path, stem: &str, format: Format, meta: &Metadata, c: &Curve) -> Outcome {
    match format {
        Format::Csv => save(
            &dir.join(format!("{stem}.csv")),
            &csv_string(meta, &c.csv_header(), &c.csv_rows()),
        ),
        Format::Json => save(&dir.join(format!("{stem}.json")), &json_string(meta, c)?),
    }
}

fn write_reliability(
    dir: &Path,
    stem: &str,
    format: Format,
    meta: &Metadata,
    c: &Curve,
) -> Outcome {
    match format {
        Format::Csv => {
            let header = [c.abscissa.as_str(), "status", "reliability"];
            save(
                &dir.join(format!("{stem}.csv")),
                &csv_string(meta, &header, &c.reliability_rows()),
            )
        }
        Format::Json => {
            let data: Vec<(f64, f64)> = c.xs().into_iter().zip(c.reliabilities()).collect();
            save(
                &dir.join(format!("{stem}.json")),
                &json_string(meta, &data)?,
            )
        }
    }
}

fn hist_meta(command: &str, spec: &SweepSpec, h: &Histogram) -> Metadata {
    let r = &spec.ranges;
    let mut m = metadata(command)
        .with("seed", spec.seed)
        .with("model", spec.kind)
        .with("samples", spec.count)
        .with("method", spec.method)
        .with("bin_width", fmt_f64(spec.bin_width))
        .with("sampling", "independent uniform draws per parameter");
    let mut ranges = vec![
        ("gamma_h", r.gamma_h),
        ("gamma_c", r.gamma_c),
        ("lambda", r.lambda),
        ("n_h", r.n_h),
        ("n_c", r.n_c),
    ];
    if spec.kind.uses_p() {
        ranges.push(("p", r.p));
    }
    for (k, (lo, hi)) in ranges {
        if !spec.fixed.contains_key(k) {
            m.push(&format!("{k}_range"), format!("[{lo}, {hi}]"));
        }
    }
    if spec.kind.uses_p() && !spec.fixed.contains_key("p") {
        m.push("p_law", format!("uniform on [{}, {}]", r.p.0, r.p.1));
    }
    for (k, v) in &spec.fixed {
        m.push(&format!("fixed_{k}"), fmt_f64(*v));
    }
    let ex: Vec<String> = h
        .exclusions
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    m.push("histogrammed", h.total);
    m.push(
        "excluded",
        if ex.is_empty() {
            "none".into()
        } else {
            ex.join(";")
        },
    );
    m.push("min_q", fmt_f64(h.min_value));
    m.push("max_q", fmt_f64(h.max_value));
    if let Some((i, _)) = &h.argmin {
        m.push("argmin_sample", i);
    }
    m.push("fraction_below_two", fmt_f64(h.violation_fraction));
    m
}

fn write_histogram(
    dir: &Path,
    stem: &str,
    format: Format,
    command: &str,
    spec: &SweepSpec,
) -> Outcome {
    let h = q_histogram(spec)?;
    let meta = hist_meta(command, spec, &h);
    match format {
        Format::Csv => save(
            &dir.join(format!("{stem}.csv")),
            &csv_string(&meta, &Histogram::CSV_HEADER, &h.csv_rows()),
        ),
        Format::Json => save(&dir.join(format!("{stem}.json")), &json_string(&meta, &h)?),
    }
}

fn stem_of(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::ThreeLevelI => "model_i",
        ModelKind::ThreeLevelII => "model_ii",
        ModelKind::FourLevelNIC => "nic",
    }
}

/// `-0.945` → `m0.945`, keeping file names free of leading dashes.
fn tag(x: f64) -> String {
    if x < 0.0 {
        format!("m{}", -x)
    } else {
        format!("{x}")
    }
}

fn cmd_figure(a: &FigureArgs, command: &str) -> Outcome {
    let o = TurOptions::default();
    let dir = a.out.as_path();
    let points = |default: usize| -> Result<usize, Failure> {
        match a.points.unwrap_or(default) {
            n if n >= 3 => Ok(n),
            n => Err(Failure::Invalid(format!(
                "--points must be at least 3, got {n}"
            ))),
        }
    };
    match a.figure {
        Figure::Fig2 => {
            let grid = validate::lambda_grid(points(200)?);
            let base = validate::fig2_params();
            for kind in [ModelKind::ThreeLevelI, ModelKind::ThreeLevelII] {
                let c = lambda_curve(kind, &base, &grid, &o)?;
                let meta = curve_meta(command, &base, kind, &c);
                write_curve(
                    dir,
                    &format!("fig2_q_{}", stem_of(kind)),
                    a.format,
                    &meta,
                    &c,
                )?;
                write_reliability(
                    dir,
                    &format!("fig2_reliability_{}", stem_of(kind)),
                    a.format,
                    &meta,
                    &c,
                )?;
            }
        }
        Figure::Fig3 => {
            for kind in ModelKind::ALL {
                let mut spec = SweepSpec::fig3(kind, a.samples, a.seed);
                spec.precision = a.precision;
                write_histogram(
                    dir,
                    &format!("fig3_histogram_{}", stem_of(kind)),
                    a.format,
                    command,
                    &spec,
                )?;
            }
        }
        Figure::Fig4 => {
            let grid = validate::lambda_grid(points(200)?);
            let base = validate::fig4_params();
            let c = lambda_curve(ModelKind::ThreeLevelI, &base, &grid, &o)?;
            write_curve(
                dir,
                "fig4_q_model_i",
                a.format,
                &curve_meta(command, &base, ModelKind::ThreeLevelI, &c),
                &c,
            )?;
            for p in validate::FIG4_PS {
                let b = base.with_p(p);
                let c = lambda_curve(ModelKind::FourLevelNIC, &b, &grid, &o)?;
                let meta = curve_meta(command, &b, ModelKind::FourLevelNIC, &c);
                write_curve(
                    dir,
                    &format!("fig4_q_nic_p_{}", tag(p)),
                    a.format,
                    &meta,
                    &c,
                )?;
            }
        }
        Figure::Fig5 => {
            let grid = validate::p_grid(points(201)?);
            for lam in validate::FIG5_LAMBDAS {
                let b = validate::fig5_params().with_lambda(lam);
                let c = p_curve(&b, &grid, &o)?;
                let meta = curve_meta(command, &b, ModelKind::FourLevelNIC, &c);
                write_curve(
                    dir,
                    &format!("fig5_q_nic_lambda_{}", tag(lam)),
                    a.format,
                    &meta,
                    &c,
                )?;
            }
        }
    }
    Ok(())
}

fn parse_fix(s: &str) -> Result<(String, f64), Failure> {
    let bad = || Failure::Invalid(format!("--fix expects NAME=VALUE, got '{s}'"));
    let (k, v) = s.split_once('=').ok_or_else(bad)?;
    let v: f64 = v.trim().parse().map_err(|_| bad())?;
    let k = match k.trim() {
        "gamma-h" | "gamma_h" => "gamma_h",
        "gamma-c" | "gamma_c" => "gamma_c",
        "nh" | "n_h" => "n_h",
        "nc" | "n_c" => "n_c",
        other => other,
    };
    Ok((k.to_string(), v))
}

fn cmd_sweep(a: &SweepArgs, command: &str) -> Outcome {
    let mut spec = SweepSpec::fig3(a.model, a.samples, a.seed);
    spec.ranges = ParamRanges::FIG3;
    spec.bin_width = a.bin_width;
    spec.method = a.method;
    spec.precision = a.precision;
    for f in &a.fix {
        let (k, v) = parse_fix(f)?;
        spec.fixed.insert(k, v);
    }
    write_histogram(
        &a.out,
        &format!("sweep_histogram_{}", stem_of(a.model)),
        a.format,
        command,
        &spec,
    )
}

fn cmd_validate(a: &ValidateArgs, command: &str) -> Outcome {
    let cfg = ValidationConfig {
        seed: a.seed,
        draws: a.draws,
        with_trajectory: a.with_trajectory,
        ..Default::default()
    };
    let report = validate::run_validation(&cfg);
    let text = match a.format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => json_string(&metadata(command).with("seed", a.seed), &report)?,
    };
    print!("{text}");
    if let Some(path) = &a.out {
        save(path, &text)?;
    }
    let failures = report.failures();
    if failures.is_empty() {
        return Ok(());
    }
    let names: Vec<&str> = failures.iter().map(|c| c.name.as_str()).collect();
    Err(Failure::Numeric(format!(
        "{} validation check(s) failed: {}",
        names.len(),
        names.join(", ")
    )))
}

fn run(args: Vec<OsString>) -> Outcome {
    let args = config::expand(args).map_err(Failure::Invalid)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            return Err(Failure::Usage(
                e.render().to_string().trim_end().to_string(),
            ))
        }
    };
    let command = config::canonical(&args);
    exec::with_workers(cli.workers, || match &cli.command {
        Command::Eval(a) => cmd_eval(a, &command),
        Command::Figure(a) => cmd_figure(a, &command),
        Command::Sweep(a) => cmd_sweep(a, &command),
        Command::Validate(a) => cmd_validate(a, &command),
    })
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
