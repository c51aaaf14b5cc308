//! `chbell` — curves, searches, and closed-form solves for the trade-off
//! between CH-inequality violation and threshold detection efficiency in
//! two-qubit Bell tests.
//!
//! Exit codes: 0 success, 1 computation or invariant failure, 2 usage error,
//! 3 I/O failure.

mod cache;
mod emit;
mod params;
mod svg;
mod verify;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use chbell::analytic::{max_violation_for_eta, ETA_FLOOR};
use chbell::chmetrics::ch_q;
use chbell::optimizer::{sweep, OptimizerSettings, SearchSettings, Strategy, SweepSettings};
use chbell::states::{ExponentQuad, MeasurementConfig, SchmidtState};

use cache::Cache;
use emit::{AnalyticRow, CurveRow, TableRow};
use params::{Format, Metric};

pub const WORKERS_ENV: &str = "CHBELL_WORKERS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Compute(m) => write!(f, "computation: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl From<chbell::Error> for CliError {
    fn from(e: chbell::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "chbell", version, about = "CH-violation and threshold-efficiency curves for two-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a strategy across a ratio grid and write curve data (CSV/JSON,
    /// optionally an SVG plot)
    Curve(CurveArgs),
    /// Optimal-exponent search at reference ratios, side by side with the
    /// published exponent quads
    Table1(TableArgs),
    /// Closed-form solve per detection efficiency: optimal rotation, top
    /// eigenvalue, optimal state
    Analytic(AnalyticArgs),
    /// Run the numerical invariant suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CurveArgs {
    /// Strategy (comma-separated list allowed with --format svg):
    /// hardy|nm|k|ksearch|maxq|mineta
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<String>,
    /// First paired exponent for --strategy nm
    #[arg(long)]
    n: Option<u32>,
    /// Second paired exponent for --strategy nm
    #[arg(long)]
    m: Option<u32>,
    /// Exponent quad for --strategy k, e.g. 3,10,10,3
    #[arg(long)]
    k: Option<String>,
    /// Which quantity the SVG plots: q|eta
    #[arg(long)]
    metric: Option<Metric>,
    /// Ratio grid start:stop:count (default 0.005:0.995:199)
    #[arg(long)]
    ratios: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Multistart sample count for maxq/mineta
    #[arg(long)]
    samples: Option<usize>,
    /// Exhaustive-stage exponent ceiling for ksearch
    #[arg(long = "kmax-coarse")]
    kmax_coarse: Option<u32>,
    /// Refinement-stage exponent ceiling for ksearch
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv|json|svg (svg also writes the CSV data alongside)
    #[arg(long)]
    format: Option<Format>,
    /// Flat key = value config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "kmax-coarse")]
    kmax_coarse: Option<u32>,
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv|json
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Detection efficiency, a single value or a start:stop:count grid;
    /// every value must lie in (2/3, 1]
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv|json
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Emit the report as JSON instead of text
    #[arg(long)]
    format: Option<String>,
    /// Also write the report to a file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };

    if let Ok(workers) = std::env::var(WORKERS_ENV) {
        if let Ok(n) = workers.parse::<usize>() {
            // Worker count never changes emitted numbers, only wall time.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }

    let result = match cli.command {
        Command::Curve(args) => run_curve(args),
        Command::Table1(args) => run_table1(args),
        Command::Analytic(args) => run_analytic(args),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chbell: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))
}

/// Run descriptor hashed into the cache key; excludes output paths.
#[derive(Serialize)]
struct CurveDescriptor<'a> {
    command: &'static str,
    strategies: Vec<String>,
    metric: &'a str,
    ratios: &'a [f64],
    seed: u64,
    samples: usize,
    kmax_coarse: u32,
    kmax: u32,
    format: &'static str,
}

fn run_curve(args: CurveArgs) -> Result<(), CliError> {
    let file = params::FileConfig::load(args.config.as_deref())?;

    let strategy_names: Vec<String> = if args.strategy.is_empty() {
        match params::resolve_string("strategy", None, &file) {
            Some(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
            None => return Err(CliError::Usage("--strategy is required".into())),
        }
    } else {
        args.strategy
    };
    let n = params::resolve("n", args.n, &file, 0u32).map(|v| (v != 0).then_some(v))?;
    let m = params::resolve("m", args.m, &file, 0u32).map(|v| (v != 0).then_some(v))?;
    let k_spec = params::resolve_string("k", args.k, &file);
    let metric = params::resolve("metric", args.metric, &file, Metric::Q)?;
    let ratio_spec = params::resolve_string("ratios", args.ratios, &file)
        .unwrap_or_else(|| "0.005:0.995:199".to_string());
    let seed = params::resolve("seed", args.seed, &file, 0u64)?;
    let samples = params::resolve("samples", args.samples, &file, 10_000usize)?;
    let kmax_coarse = params::resolve("kmax-coarse", args.kmax_coarse, &file, 32u32)?;
    let kmax = params::resolve("kmax", args.kmax, &file, 1024u32)?;
    let format = params::resolve("format", args.format, &file, Format::Csv)?;
    let out = params::resolve_string("out", args.out.map(display_path), &file)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("curve.{}", format.extension())));

    let strategies: Vec<Strategy> = strategy_names
        .iter()
        .map(|name| params::parse_strategy(name, n, m, k_spec.as_deref()))
        .collect::<Result<_, _>>()?;
    if strategies.is_empty() {
        return Err(CliError::Usage("--strategy is required".into()));
    }
    if samples < 1 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if kmax_coarse < 1 || kmax_coarse > kmax {
        return Err(CliError::Usage(format!(
            "need 1 <= kmax-coarse <= kmax, got {kmax_coarse} and {kmax}"
        )));
    }
    if strategies.len() > 1 && format != Format::Svg {
        return Err(CliError::Usage(
            "multiple strategies need --format svg (one polyline per strategy)".into(),
        ));
    }
    let mut ratios = params::parse_grid(&ratio_spec, "--ratios")?;
    for &r in &ratios {
        if !(r > 0.0 && r <= 1.0) {
            return Err(CliError::Usage(format!("ratio {r} outside (0, 1]")));
        }
    }
    // Curve rows are emitted sorted by ratio ascending.
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let settings = SweepSettings {
        optimizer: OptimizerSettings { sample_count: samples, seed, ..Default::default() },
        search: SearchSettings { coarse_kmax: kmax_coarse, full_kmax: kmax, ..Default::default() },
    };

    let descriptor = CurveDescriptor {
        command: "curve",
        strategies: strategies.iter().map(|s| s.to_string()).collect(),
        metric: if metric == Metric::Q { "q" } else { "eta" },
        ratios: &ratios,
        seed,
        samples,
        kmax_coarse,
        kmax,
        format: format.extension(),
    };
    let key = cache::config_hash(&descriptor);
    let cache = Cache::from_env();

    let outputs = match cache.lookup(&key) {
        Some(hit) => hit,
        None => {
            let mut outputs = BTreeMap::new();
            let mut all_rows = Vec::new();
            for strategy in &strategies {
                let records = sweep(&ratios, strategy, &settings)?;
                all_rows.push((
                    strategy.to_string(),
                    records.iter().map(CurveRow::from_record).collect::<Vec<_>>(),
                ));
            }
            match format {
                Format::Csv => {
                    outputs.insert("primary".to_string(), emit::curve_csv(&all_rows[0].1));
                }
                Format::Json => {
                    outputs.insert("primary".to_string(), emit::curve_json(&all_rows[0].1));
                }
                Format::Svg => {
                    let series: Vec<svg::Series> = all_rows
                        .iter()
                        .map(|(label, rows)| svg::Series {
                            label: label.clone(),
                            points: rows
                                .iter()
                                .map(|r| {
                                    let y = match metric {
                                        Metric::Q => Some(r.q),
                                        Metric::Eta => r.eta_crit,
                                    };
                                    (r.ratio, y)
                                })
                                .collect(),
                        })
                        .collect();
                    let y_label = match metric {
                        Metric::Q => "CH violation Q",
                        Metric::Eta => "threshold efficiency",
                    };
                    outputs.insert(
                        "primary".to_string(),
                        svg::line_chart("alpha/beta", y_label, &series),
                    );
                    for (label, rows) in &all_rows {
                        outputs.insert(format!("csv:{label}"), emit::curve_csv(rows));
                    }
                }
            }
            cache.store(&key, &outputs)?;
            outputs
        }
    };

    for (role, content) in &outputs {
        if role == "primary" {
            write_file(&out, content)?;
        } else if let Some(label) = role.strip_prefix("csv:") {
            write_file(&companion_path(&out, label, strategies.len() > 1), content)?;
        }
    }
    Ok(())
}

fn display_path(p: PathBuf) -> String {
    p.display().to_string()
}

/// `<stem>.csv` next to an SVG output, or `<stem>-<label>.csv` when several
/// strategies share the plot.
fn companion_path(out: &Path, label: &str, multi: bool) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let sanitized: String =
        label.chars().map(|c| if c.is_alphanumeric() { c } else { '-' }).collect();
    let name = if multi {
        format!("{stem}-{}.csv", sanitized.trim_matches('-'))
    } else {
        format!("{stem}.csv")
    };
    out.with_file_name(name)
}

/// Reference ratios and published optimal exponent quads used as the
/// comparison baseline by `table1`.
pub const REFERENCE_ROWS: [(f64, [u32; 4]); 7] = [
    (0.20, [1, 4, 4, 1]),
    (0.39, [1, 6, 4, 2]),
    (0.61, [2, 8, 8, 2]),
    (0.80, [4, 15, 16, 4]),
    (0.90, [4, 46, 23, 12]),
    (0.95, [3, 133, 39, 31]),
    (0.99, [11, 1024, 200, 167]),
];

#[derive(Serialize)]
struct TableDescriptor {
    command: &'static str,
    kmax_coarse: u32,
    kmax: u32,
    format: &'static str,
}

fn run_table1(args: TableArgs) -> Result<(), CliError> {
    let file = params::FileConfig::load(args.config.as_deref())?;
    let kmax_coarse = params::resolve("kmax-coarse", args.kmax_coarse, &file, 32u32)?;
    let kmax = params::resolve("kmax", args.kmax, &file, 1024u32)?;
    let format = params::resolve("format", args.format, &file, Format::Csv)?;
    if format == Format::Svg {
        return Err(CliError::Usage("table1 supports --format csv|json".into()));
    }
    if kmax_coarse < 1 || kmax_coarse > kmax {
        return Err(CliError::Usage(format!(
            "need 1 <= kmax-coarse <= kmax, got {kmax_coarse} and {kmax}"
        )));
    }
    let out = params::resolve_string("out", args.out.map(display_path), &file)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("table1.{}", format.extension())));

    let descriptor = TableDescriptor {
        command: "table1",
        kmax_coarse,
        kmax,
        format: format.extension(),
    };
    let key = cache::config_hash(&descriptor);
    let cache = Cache::from_env();

    let (rows_text, stdout_text) = match cache.lookup(&key) {
        Some(mut hit) => (
            hit.remove("primary").unwrap_or_default(),
            hit.remove("stdout").unwrap_or_default(),
        ),
        None => {
            let rows = table_rows(kmax_coarse, kmax)?;
            let primary = match format {
                Format::Csv => emit::table_csv(&rows),
                Format::Json => emit::table_json(&rows),
                Format::Svg => unreachable!(),
            };
            let stdout_text = emit::table_stdout(&rows);
            let mut outputs = BTreeMap::new();
            outputs.insert("primary".to_string(), primary.clone());
            outputs.insert("stdout".to_string(), stdout_text.clone());
            cache.store(&key, &outputs)?;
            (primary, stdout_text)
        }
    };

    print!("{stdout_text}");
    write_file(&out, &rows_text)?;
    Ok(())
}

fn table_rows(kmax_coarse: u32, kmax: u32) -> Result<Vec<TableRow>, CliError> {
    let search = SearchSettings { coarse_kmax: kmax_coarse, full_kmax: kmax, ..Default::default() };
    REFERENCE_ROWS
        .iter()
        .map(|&(ratio, ref_k)| {
            let state = SchmidtState::from_ratio(ratio).map_err(chbell::Error::from)?;
            let rec = chbell::optimizer::k_search(&state, &search).map_err(chbell::Error::from)?;
            let quad = rec.k.expect("k_search returns a quad");
            let sin_phi =
                std::array::from_fn(|i| rec.config.setting(i).phi().sin());
            let ref_quad = ExponentQuad::new(ref_k[0], ref_k[1], ref_k[2], ref_k[3])
                .map_err(chbell::Error::from)?;
            let ref_config = MeasurementConfig::for_exponents(&state, &ref_quad)
                .map_err(chbell::Error::from)?;
            let ref_eta = ch_q(&state, &ref_config)
                .eta_crit
                .ok_or_else(|| CliError::Compute(format!("reference quad at {ratio} does not violate")))?;
            Ok(TableRow {
                ratio,
                k: quad.values(),
                sin_phi,
                eta_crit: rec
                    .report
                    .eta_crit
                    .ok_or_else(|| CliError::Compute(format!("search at {ratio} found no violation")))?,
                q: rec.report.q,
                ref_k,
                ref_eta_crit: ref_eta,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct AnalyticDescriptor<'a> {
    command: &'static str,
    etas: &'a [f64],
    format: &'static str,
}

fn run_analytic(args: AnalyticArgs) -> Result<(), CliError> {
    let file = params::FileConfig::load(args.config.as_deref())?;
    let eta_spec = params::resolve_string("eta", args.eta, &file)
        .ok_or_else(|| CliError::Usage("--eta is required (value or start:stop:count)".into()))?;
    let format = params::resolve("format", args.format, &file, Format::Csv)?;
    if format == Format::Svg {
        return Err(CliError::Usage("analytic supports --format csv|json".into()));
    }
    let out = params::resolve_string("out", args.out.map(display_path), &file)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("analytic.{}", format.extension())));

    let etas = params::parse_grid(&eta_spec, "--eta")?;
    for &eta in &etas {
        if !(eta > ETA_FLOOR && eta <= 1.0) {
            return Err(CliError::Usage(format!(
                "eta {eta} outside (2/3, 1]; no loophole-free test exists below the floor"
            )));
        }
    }

    let descriptor =
        AnalyticDescriptor { command: "analytic", etas: &etas, format: format.extension() };
    let key = cache::config_hash(&descriptor);
    let cache = Cache::from_env();

    let content = match cache.lookup(&key).and_then(|mut m| m.remove("primary")) {
        Some(hit) => hit,
        None => {
            let rows: Result<Vec<AnalyticRow>, CliError> = etas
                .iter()
                .map(|&eta| {
                    let opt = max_violation_for_eta(eta).map_err(chbell::Error::from)?;
                    Ok(AnalyticRow {
                        eta,
                        t_star: opt.t,
                        lambda1: opt.lambda,
                        ratio: opt.state.ratio(),
                    })
                })
                .collect();
            let rows = rows?;
            let content = match format {
                Format::Csv => emit::analytic_csv(&rows),
                Format::Json => emit::analytic_json(&rows),
                Format::Svg => unreachable!(),
            };
            let mut outputs = BTreeMap::new();
            outputs.insert("primary".to_string(), content.clone());
            cache.store(&key, &outputs)?;
            content
        }
    };

    write_file(&out, &content)?;
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let file = params::FileConfig::load(args.config.as_deref())?;
    let seed = params::resolve("seed", args.seed, &file, 0u64)?;
    let format = params::resolve_string("format", args.format, &file)
        .unwrap_or_else(|| "text".to_string());
    let report = verify::run(seed);
    let rendered = match format.as_str() {
        "text" => verify::render_text(&report),
        "json" => verify::render_json(&report),
        other => return Err(CliError::Usage(format!("verify format `{other}` (text|json)"))),
    };
    print!("{rendered}");
    if let Some(out) = args.out {
        write_file(&out, &rendered)?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Compute("invariant suite failed".into()))
    }
}
