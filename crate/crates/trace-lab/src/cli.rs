//! Batch command line front end.
//!
//! One command per process: evaluate a profile sweep to CSV, run a
//! measurability verdict to JSON, tabulate spectral sums against their
//! counting bounds, sweep the power-sum functional, emit catalog models as
//! operator files, or run the acceptance battery. Output is assembled in
//! memory and written in one piece, so interrupted runs never leave partial
//! tables on either stream, and identical configurations produce
//! byte-identical output regardless of thread count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::accept::{self, Thresholds};
use crate::config::{self, ConfigError, FileConfig, Overrides, RunConfig, MAX_GRID_ROWS};
use crate::gallery::{self, GalleryError, SpectrumLaw};
use crate::io::{self, IoError};
use crate::lidskii::{self, CountKind, Region};
use crate::limits::{self, LimitsError, SweepConfig};
use crate::logreal::LogReal;
use crate::profiles::{self, Coord, Profile, ProfileError};
use crate::stepfn::{GeneratorSpec, OperatorModel, SpectrumModel};
use crate::zeta;

/// Default sequence for the plateau catalog entry: values below `1/(n+1)`
/// keep the model inside the normalized unit ball.
const DEFAULT_PLATEAU: &[f64] = &[1.0, 0.5, 0.3, 0.25, 0.2, 0.1];

/// Any failure a command can surface. Each variant maps to one of the
/// documented exit codes: 2 for configuration problems, 3 for numeric
/// failures, 4 for model validation failures.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    File(#[from] IoError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Limits(#[from] LimitsError),
    #[error("unknown operator {0:?}: not a catalog name and not a readable file")]
    UnknownOperator(String),
    #[error("operator {0:?} carries no spectrum")]
    MissingSpectrum(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Gallery(_)
            | CliError::UnknownOperator(_)
            | CliError::Usage(_)
            | CliError::Output(_) => 2,
            CliError::File(e) => match e {
                IoError::Model(_) => 4,
                _ => 2,
            },
            CliError::Profile(e) => profile_exit_code(e),
            CliError::Limits(e) => match e {
                LimitsError::HorizonTooShort(_) | LimitsError::RangeTooNarrow { .. } => 2,
                LimitsError::NotPeriodic { .. } => 3,
                LimitsError::Profile(p) => profile_exit_code(p),
            },
            CliError::MissingSpectrum(_) => 4,
        }
    }
}

fn profile_exit_code(e: &ProfileError) -> i32 {
    match e {
        ProfileError::MissingSpectrum(_) | ProfileError::Model(_) => 4,
        _ => 3,
    }
}

#[derive(Parser)]
#[command(
    name = "trace-lab",
    version,
    about = "Trace profiles of compact operators at double-exponential scales",
    arg_required_else_help = true
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    show_config: bool,
    /// Tolerance spec: "default" or "strict=<N>x".
    #[arg(long, global = true, value_name = "SPEC")]
    thresholds: Option<String>,
    /// Worker threads for sweeps (TRACE_LAB_THREADS caps this).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a profile curve over a coordinate range and emit CSV.
    Profile(ProfileArgs),
    /// Analyze scale-limit behavior and report a verdict as JSON.
    Verdict(VerdictArgs),
    /// Tabulate spectral region sums against their counting bounds.
    Lidskii(LidskiiArgs),
    /// Sweep the power-sum functional g(r) over an r range and emit CSV.
    Zeta(ZetaArgs),
    /// List the model catalog or emit an entry as an operator file.
    Gallery(GalleryArgs),
    /// Run acceptance checks and report pass/fail per criterion.
    Accept(AcceptArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Operator: t0, harmonic, power, plateau, random, or an operator file path.
    #[arg(long)]
    op: String,
    /// Profile kind to evaluate.
    #[arg(long, value_enum, default_value_t = Kind::Dixmier)]
    kind: Kind,
    /// Sweep coordinate: u (log log t), v (log t), or t. Kind zeta sweeps r.
    #[arg(long)]
    coord: Option<String>,
    /// Coordinate range <lo>..<hi>; kind zeta also accepts r=<lo>..<hi>.
    #[arg(long)]
    range: String,
    /// Grid density in samples per coordinate unit (per e-fold for kind zeta).
    #[arg(long)]
    spu: Option<u32>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Running integral of mu over log(1+t).
    Dixmier,
    /// Dixmier minus its tower-limit plateau.
    Steady,
    /// Integral truncated at the distribution depth d(1/t).
    Truncated,
    /// Tail decay of mu against the tower envelope.
    RemainderMu,
    /// Tail decay of the distribution against the tower envelope.
    RemainderD,
    /// Eigenvalue-sum profile beta(t)/t over v.
    Beta,
    /// Power-sum functional g(r) on the r axis.
    Zeta,
}

#[derive(Args)]
struct VerdictArgs {
    /// Operator: catalog name or operator file path.
    #[arg(long)]
    op: String,
    /// Analyzer family.
    #[arg(long, value_enum)]
    class: VerdictClass,
    /// Sweep window <lo>..<hi> in u; defaults follow the model depth.
    #[arg(long)]
    range: Option<String>,
    /// Grid density in samples per unit.
    #[arg(long)]
    spu: Option<u32>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerdictClass {
    /// Extremes of the Dixmier profile over deep scales.
    Dixmier,
    /// Exponentiation-invariant analysis via remainders and periodic means.
    Dp,
}

#[derive(Args)]
struct LidskiiArgs {
    /// Operator: catalog name or operator file path (needs a spectrum).
    #[arg(long)]
    op: String,
    /// Threshold range <lo>..<hi> in l = log t (default 0.5..12).
    #[arg(long)]
    range: Option<String>,
    /// Number of threshold scales.
    #[arg(long)]
    samples: Option<u32>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the JSON summary here instead of the fallback stream.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ZetaArgs {
    /// Operator: catalog name or operator file path.
    #[arg(long)]
    op: String,
    /// r range <lo>..<hi> or r=<lo>..<hi>, swept geometrically.
    #[arg(long)]
    range: String,
    /// Grid density in samples per e-fold of r.
    #[arg(long)]
    spu: Option<u32>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GalleryArgs {
    #[command(subcommand)]
    action: GalleryAction,
}

#[derive(Subcommand)]
enum GalleryAction {
    /// Print the catalog: name, emit defaults, description.
    List,
    /// Expand a catalog entry and write it as an operator file.
    Emit(EmitArgs),
}

#[derive(Args)]
struct EmitArgs {
    /// Catalog name: t0, harmonic, power, plateau, random_spectrum.
    name: String,
    /// Generator parameter override, repeatable: --param key=value.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Write the operator file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AcceptArgs {
    /// Run a single criterion (1..=10) instead of the whole battery.
    #[arg(long)]
    criterion: Option<u32>,
}

/// Parses the command line, runs one command, and returns the process exit
/// code. Errors print one line to stderr.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => Some(FileConfig::load(path)?),
        None => None,
    };
    let (spu_flag, samples_flag) = match &cli.command {
        Some(Command::Profile(a)) => (a.spu, None),
        Some(Command::Verdict(a)) => (a.spu, None),
        Some(Command::Lidskii(a)) => (None, a.samples),
        Some(Command::Zeta(a)) => (a.spu, None),
        _ => (None, None),
    };
    let over = Overrides {
        spu: spu_flag,
        samples: samples_flag,
        threads: cli.threads,
        thresholds: cli.thresholds.clone(),
    };
    let cfg = RunConfig::resolve(file.as_ref(), &over)?;
    if cli.show_config {
        println!("{}", cfg.show());
        return Ok(0);
    }
    match cli.command {
        None => Err(CliError::Usage(
            "a command is required (see --help)".to_string(),
        )),
        Some(Command::Profile(args)) => cmd_profile(&args, &cfg),
        Some(Command::Verdict(args)) => cmd_verdict(&args, &cfg),
        Some(Command::Lidskii(args)) => cmd_lidskii(&args, &cfg),
        Some(Command::Zeta(args)) => cmd_zeta(&args, &cfg),
        Some(Command::Gallery(args)) => cmd_gallery(&args),
        Some(Command::Accept(args)) => cmd_accept(&args, &cfg),
    }
}

/// Resolves an operator source: a catalog name with its standard working
/// size, or a path to an operator file.
fn model_from_op(op: &str) -> Result<Arc<OperatorModel>, CliError> {
    match op {
        "t0" => Ok(gallery::make_t0(30)?),
        "harmonic" => Ok(gallery::make_harmonic(1_000_000)?),
        "power" => Ok(gallery::make_power(2.0, 100_000)?),
        "plateau" => Ok(gallery::make_plateau(DEFAULT_PLATEAU)?),
        "random" | "random_spectrum" => {
            Ok(gallery::make_random_spectrum(1, 10_000, SpectrumLaw::Disc)?)
        }
        other => {
            let path = Path::new(other);
            if path.is_file() {
                Ok(io::read_operator_file(path)?)
            } else {
                Err(CliError::UnknownOperator(other.to_string()))
            }
        }
    }
}

fn cmd_profile(args: &ProfileArgs, cfg: &RunConfig) -> Result<i32, CliError> {
    let model = model_from_op(&args.op)?;
    let (lo, hi) = config::parse_range(&args.range)?;
    if args.kind == Kind::Zeta {
        if args.coord.is_some() {
            return Err(CliError::Usage(
                "kind zeta sweeps the r axis; --coord does not apply".to_string(),
            ));
        }
        let profile = zeta::zeta_profile(&model);
        let csv = geometric_csv(&profile, lo, hi, cfg, &args.range)?;
        return write_output(args.out.as_deref(), &csv);
    }
    let coord_name = args.coord.as_deref().unwrap_or("u");
    let coord = Coord::parse(coord_name)
        .ok_or_else(|| CliError::Usage(format!("unknown coordinate {coord_name:?}")))?;
    if coord == Coord::R {
        return Err(CliError::Usage(
            "coordinate r belongs to kind zeta".to_string(),
        ));
    }
    validate_sweep(coord, lo, hi, &args.range)?;
    let profile = match args.kind {
        Kind::Dixmier => profiles::dixmier_profile(&model),
        Kind::Steady => profiles::dixmier_steady_profile(&model),
        Kind::Truncated => profiles::truncated_profile(&model),
        Kind::RemainderMu => profiles::remainder_mu_profile(&model),
        Kind::RemainderD => profiles::remainder_d_profile(&model),
        Kind::Beta => profiles::beta_profile(&model),
        Kind::Zeta => unreachable!("handled above"),
    };
    let profile = profile.reframe(coord)?;
    let csv = linear_csv(&profile, lo, hi, cfg)?;
    write_output(args.out.as_deref(), &csv)
}

/// Uniform grid sweep: `round((hi-lo)*spu) + 1` points including both ends.
fn linear_csv(profile: &Profile, lo: f64, hi: f64, cfg: &RunConfig) -> Result<String, CliError> {
    let n = linear_count(lo, hi, cfg.spu)?;
    let step = (hi - lo) / ((n - 1) as f64);
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (i as f64) * step })
        .collect();
    render_csv(profile, &grid, cfg.threads)
}

/// Geometric sweep for the r axis: `spu` points per e-fold.
fn geometric_csv(
    profile: &Profile,
    lo: f64,
    hi: f64,
    cfg: &RunConfig,
    range_spec: &str,
) -> Result<String, CliError> {
    if lo <= 0.0 {
        return Err(ConfigError::BadRange(range_spec.to_string()).into());
    }
    let efolds = (hi / lo).ln();
    let n = checked_count(efolds * cfg.spu as f64)?;
    let step = efolds / ((n - 1) as f64);
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * ((i as f64) * step).exp()
            }
        })
        .collect();
    render_csv(profile, &grid, cfg.threads)
}

fn linear_count(lo: f64, hi: f64, spu: u32) -> Result<usize, ConfigError> {
    checked_count((hi - lo) * spu as f64)
}

fn checked_count(spans: f64) -> Result<usize, ConfigError> {
    let rows = spans.round() as i64 + 1;
    if rows as u64 > MAX_GRID_ROWS {
        return Err(ConfigError::GridTooLarge(rows as u64));
    }
    Ok((rows as usize).max(2))
}

/// Coordinate-specific sanity limits for sweep ranges, enforced before any
/// evaluation starts.
fn validate_sweep(coord: Coord, lo: f64, hi: f64, spec: &str) -> Result<(), ConfigError> {
    let ok = match coord {
        Coord::U => lo >= -5.0 && hi <= 40.0,
        Coord::V => lo > 0.0 && hi <= 3.0e17,
        Coord::T => lo > 1.0 && hi <= 1.0e300,
        Coord::R => lo > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(ConfigError::BadRange(spec.to_string()))
    }
}

/// Evaluates the profile over the grid and assembles the full CSV document.
/// Points are computed in parallel chunks but always reduced in grid order.
fn render_csv(profile: &Profile, grid: &[f64], threads: usize) -> Result<String, CliError> {
    let values: Vec<Result<LogReal, ProfileError>> =
        parallel_map(grid.len(), threads, |i| profile.eval_log(grid[i]));
    let axis = profile.coord().axis_name();
    let mut out = String::with_capacity(grid.len() * 96 + 64);
    out.push_str(io::CSV_HEADER);
    out.push('\n');
    for (i, value) in values.into_iter().enumerate() {
        out.push_str(&io::csv_row(
            axis,
            grid[i],
            value?,
            &profile.meta.provenance,
        ));
        out.push('\n');
    }
    Ok(out)
}

/// Maps `f` over `0..n` with contiguous chunks on scoped threads. The chunk
/// results are concatenated in index order, so the output is identical to
/// the serial map for any thread count.
fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if threads <= 1 || n < 32 {
        return (0..n).map(f).collect();
    }
    let workers = threads.min(n);
    let chunk = n.div_ceil(workers);
    let mut parts: Vec<Vec<T>> = Vec::with_capacity(workers);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for w in 0..workers {
            let start = w * chunk;
            let end = ((w + 1) * chunk).min(n);
            if start >= end {
                break;
            }
            let f = &f;
            handles.push(scope.spawn(move || (start..end).map(f).collect::<Vec<T>>()));
        }
        for handle in handles {
            parts.push(handle.join().expect("sweep worker panicked"));
        }
    });
    parts.into_iter().flatten().collect()
}

fn cmd_verdict(args: &VerdictArgs, cfg: &RunConfig) -> Result<i32, CliError> {
    let model = model_from_op(&args.op)?;
    let range = match &args.range {
        Some(spec) => {
            let (lo, hi) = config::parse_range(spec)?;
            validate_sweep(Coord::U, lo, hi, spec)?;
            Some((lo, hi))
        }
        None => None,
    };
    let sweep = SweepConfig {
        range,
        spu: cfg.spu,
        ..SweepConfig::default()
    };
    let verdict = match args.class {
        VerdictClass::Dixmier => limits::dixmier_verdict(&model, &sweep)?,
        VerdictClass::Dp => limits::dp_verdict(&model, &sweep)?,
    };
    let mut text = serde_json::to_string_pretty(&verdict).expect("verdict serializes");
    text.push('\n');
    write_output(args.out.as_deref(), &text)
}

/// Per-scale summary of the spectral bound check, for the JSON sidecar.
#[derive(Serialize)]
struct LidskiiSummary {
    label: String,
    scales: usize,
    max_slack_circle_rect: f64,
    max_slack_re_im: f64,
    all_within_bounds: bool,
}

const LIDSKII_HEADER: &str = "ell,circle_re,circle_im,rect_re,rect_im,gap_circle_rect,\
bound_circle_rect,gap_re_im,bound_re_im,within_bounds";

fn cmd_lidskii(args: &LidskiiArgs, cfg: &RunConfig) -> Result<i32, CliError> {
    let model = model_from_op(&args.op)?;
    let spectrum: &SpectrumModel = model
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::MissingSpectrum(model.label.clone()))?;
    let (lo, hi) = match &args.range {
        Some(spec) => config::parse_range(spec)?,
        None => (0.5, 12.0),
    };
    let n = cfg.samples as usize;
    let mut out = String::with_capacity(n * 180 + 120);
    out.push_str(LIDSKII_HEADER);
    out.push('\n');
    let mut max_slack_cr = 0.0f64;
    let mut max_slack_ri = 0.0f64;
    let mut all_within = true;
    for i in 0..n {
        let ell = if i == n - 1 {
            hi
        } else {
            lo + (i as f64) * (hi - lo) / ((n - 1) as f64)
        };
        let s = (-ell).exp();
        let (cr, ci) = lidskii::region_sum(spectrum, Region::Circle, ell);
        let (rr, ri) = lidskii::region_sum(spectrum, Region::RectUnion, ell);
        let (er, _) = lidskii::region_sum(spectrum, Region::ReOnly, ell);
        let d_mod = lidskii::count_above(spectrum, CountKind::Modulus, ell) as f64;
        let d_im = lidskii::count_above(spectrum, CountKind::ImPart, ell) as f64;
        let gap_cr = (cr - rr).hypot(ci - ri);
        let bound_cr = 2.0 * s * d_mod;
        let gap_ri = (er - rr).abs();
        let bound_ri = s * d_im;
        let within = lidskii::region_bounds_hold(spectrum, ell, 1e-9);
        all_within &= within;
        max_slack_cr = max_slack_cr.max(gap_cr / (bound_cr + 1e-300));
        max_slack_ri = max_slack_ri.max(gap_ri / (bound_ri + 1e-300));
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            ell, cr, ci, rr, ri, gap_cr, bound_cr, gap_ri, bound_ri, within
        ));
    }
    let summary = LidskiiSummary {
        label: model.label.clone(),
        scales: n,
        max_slack_circle_rect: max_slack_cr,
        max_slack_re_im: max_slack_ri,
        all_within_bounds: all_within,
    };
    let mut summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    summary_text.push('\n');
    write_output(args.out.as_deref(), &out)?;
    match (&args.summary, &args.out) {
        (Some(path), _) => write_file(path, &summary_text)?,
        (None, Some(_)) => print!("{summary_text}"),
        (None, None) => eprint!("{summary_text}"),
    }
    Ok(0)
}

fn cmd_zeta(args: &ZetaArgs, cfg: &RunConfig) -> Result<i32, CliError> {
    let model = model_from_op(&args.op)?;
    let (lo, hi) = config::parse_range(&args.range)?;
    let profile = zeta::zeta_profile(&model);
    let csv = geometric_csv(&profile, lo, hi, cfg, &args.range)?;
    write_output(args.out.as_deref(), &csv)
}

/// Catalog rows for `gallery list`: name, emit defaults, description.
const GALLERY_TABLE: &[(&str, &str, &str)] = &[
    (
        "t0",
        "k_max=30",
        "tower plateau: value exp(k - e^k) between consecutive tower scales",
    ),
    (
        "harmonic",
        "n_max=10000",
        "harmonic lattice mu = 1/n with analytic tail envelope",
    ),
    (
        "power",
        "alpha=2 n_max=10000",
        "power lattice mu = n^-alpha with analytic tail envelope",
    ),
    (
        "plateau",
        "seq=[1,0.5,0.3,0.25,0.2,0.1]",
        "unit-lattice plateau values from a finite sequence",
    ),
    (
        "random_spectrum",
        "seed=1 n=10000 law=disc",
        "random eigenvalues with singular values from sorted moduli",
    ),
];

fn emit_defaults(name: &str) -> BTreeMap<String, serde_json::Value> {
    let mut params = BTreeMap::new();
    match name {
        "t0" => {
            params.insert("k_max".to_string(), serde_json::json!(30));
        }
        "harmonic" => {
            params.insert("n_max".to_string(), serde_json::json!(10_000));
        }
        "power" => {
            params.insert("alpha".to_string(), serde_json::json!(2.0));
            params.insert("n_max".to_string(), serde_json::json!(10_000));
        }
        "plateau" => {
            params.insert("seq".to_string(), serde_json::json!(DEFAULT_PLATEAU));
        }
        "random_spectrum" => {
            params.insert("seed".to_string(), serde_json::json!(1));
            params.insert("n".to_string(), serde_json::json!(10_000));
            params.insert("law".to_string(), serde_json::json!("disc"));
        }
        _ => {}
    }
    params
}

/// Parses repeated `key=value` pairs; values are JSON when they parse as
/// JSON, bare strings otherwise.
fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, serde_json::Value>, CliError> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("bad --param {pair:?}: expected key=value"))
        })?;
        let parsed = serde_json::from_str(value)
            .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
        out.insert(key.to_string(), parsed);
    }
    Ok(out)
}

fn cmd_gallery(args: &GalleryArgs) -> Result<i32, CliError> {
    match &args.action {
        GalleryAction::List => {
            let mut out = String::new();
            out.push_str(&format!(
                "{:<17} {:<30} {}\n",
                "name", "emit defaults", "description"
            ));
            for (name, defaults, description) in GALLERY_TABLE {
                out.push_str(&format!("{name:<17} {defaults:<30} {description}\n"));
            }
            print!("{out}");
            Ok(0)
        }
        GalleryAction::Emit(emit) => {
            let mut params = emit_defaults(&emit.name);
            for (key, value) in parse_params(&emit.params)? {
                params.insert(key, value);
            }
            let spec = GeneratorSpec {
                name: emit.name.clone(),
                params,
            };
            let model = gallery::expand(&spec)?;
            match &emit.out {
                Some(path) => {
                    io::write_operator_file(path, &model)?;
                    Ok(0)
                }
                None => {
                    let file = io::model_to_file(&model)?;
                    let mut text =
                        serde_json::to_string_pretty(&file).expect("operator file serializes");
                    text.push('\n');
                    print!("{text}");
                    Ok(0)
                }
            }
        }
    }
}

fn cmd_accept(args: &AcceptArgs, cfg: &RunConfig) -> Result<i32, CliError> {
    let thresholds = Thresholds {
        strict_divisor: cfg.strict_divisor,
    };
    match args.criterion {
        Some(index) => {
            if accept::criterion_name(index).is_none() {
                return Err(CliError::Usage(format!(
                    "unknown criterion {index}: the battery has 1..={}",
                    accept::CRITERIA
                )));
            }
            let result = accept::run_criterion(index, &thresholds);
            println!("{}", result.line());
            Ok(if result.passed { 0 } else { 1 })
        }
        None => {
            let results = accept::run_all(&thresholds);
            for result in &results {
                println!("{}", result.line());
            }
            let passed = results.iter().filter(|r| r.passed).count();
            println!("{passed}/{} criteria passed", results.len());
            Ok(if passed == results.len() { 0 } else { 1 })
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<i32, CliError> {
    match out {
        Some(path) => write_file(path, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(CliError::Output)
}
