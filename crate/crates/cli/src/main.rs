//! `slit-uncertainty`: reproducible single-slit uncertainty analyses.
//!
//! Exit status: 0 success, 1 usage or I/O error, 2 zero overlap with the
//! slit, 3 inconsistent sigma_p routes, 4 insufficient grid resolution.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};
use slit_uncertainty::analysis::{
    run_analysis, run_analysis_timed, AnalysisConfig, OutputFormat, WaveSpec, TOOL_NAME, TOOL_VERSION,
};
use slit_uncertainty::export::{write_scan_csv, write_spectrum_csv};
use slit_uncertainty::spectral::{MomentumGrid, DEFAULT_MOMENTUM_POINTS, DEFAULT_P_MAX_SCALE};
use slit_uncertainty::variational::{
    default_scan_widths, gaussian_limit_scan, minimize, ScanSettings, SineBasis, VariationalResult,
};
use slit_uncertainty::{Error, PhysicalUnits64, Slit64};

#[derive(Debug, Parser)]
#[command(name = "slit-uncertainty", version, about = "Momentum spread of states prepared by a single slit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project, classify, transform and report moments and bounds (JSON).
    Analyze(AnalyzeArgs),
    /// Momentum amplitudes of the prepared state (CSV).
    Spectrum(StateArgs),
    /// Minimize the Rayleigh quotient over the Dirichlet sine basis (JSON).
    Variational(VariationalArgs),
    /// Moments of the tapered Gaussian family for decreasing widths (CSV).
    LimitScan(ScanArgs),
}

#[derive(Debug, Args)]
struct SlitArgs {
    #[arg(long)]
    slit_width: Option<f64>,
    #[arg(long)]
    slit_center: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Debug, Args)]
struct StateArgs {
    /// JSON configuration file; flags given alongside it override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// plane-wave, gaussian, cosine-hump, tapered-gaussian or random-admissible.
    #[arg(long)]
    family: Option<String>,
    /// Family parameter as key=value (repeatable), e.g. --param width=5.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[command(flatten)]
    slit: SlitArgs,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Also write the spectrum as CSV to this path.
    #[arg(long)]
    spectrum_out: Option<PathBuf>,
    /// Record wall-clock duration in the report (breaks byte-reproducibility).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct VariationalArgs {
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[command(flatten)]
    slit: SlitArgs,
    #[arg(long, default_value_t = slit_uncertainty::slit::DEFAULT_POSITION_POINTS)]
    nx: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Widths s, strictly decreasing (comma separated or repeated). Defaults to dx/4, dx/8, dx/16, dx/32.
    #[arg(long = "s", value_delimiter = ',')]
    s_values: Vec<f64>,
    #[command(flatten)]
    slit: SlitArgs,
    #[arg(long, default_value_t = slit_uncertainty::slit::DEFAULT_POSITION_POINTS)]
    nx: usize,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MOMENTUM_POINTS)]
    np: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        other => Err(format!("unknown format {other:?}, expected json or csv")),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(io::Error),
    Core(Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Io(_) => 1,
            Self::Core(Error::ZeroOverlap { .. }) => 2,
            Self::Core(Error::Inconsistency { .. }) => 3,
            Self::Core(Error::Resolution { .. }) => 4,
            Self::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "usage error: {msg}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str::<Value>(raw)
        .ok()
        .filter(|v| v.is_number() || v.is_boolean())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn wave_spec(family: &str, params: &[String]) -> Result<WaveSpec, Failure> {
    let mut obj = Map::new();
    obj.insert("family".into(), Value::String(family.to_string()));
    for p in params {
        let (key, value) = p
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("parameter {p:?} is not key=value")))?;
        obj.insert(key.trim().to_string(), parse_value(value.trim()));
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| Failure::Usage(format!("wavefunction: {e}")))
}

fn build_config(args: &StateArgs) -> Result<AnalysisConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<AnalysisConfig>(&text)
                .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => {
            let family = args
                .family
                .as_deref()
                .ok_or_else(|| Failure::Usage("either --config or --family is required".into()))?;
            AnalysisConfig::new(wave_spec(family, &args.params)?)
        }
    };
    if args.config.is_some() && (args.family.is_some() || !args.params.is_empty()) {
        let family = args
            .family
            .as_deref()
            .ok_or_else(|| Failure::Usage("--param needs --family when overriding a config file".into()))?;
        config.wavefunction = wave_spec(family, &args.params)?;
    }
    if let Some(w) = args.slit.slit_width {
        config.slit.width = w;
    }
    if let Some(c) = args.slit.slit_center {
        config.slit.center = c;
    }
    if let Some(h) = args.slit.hbar {
        config.units.hbar = h;
    }
    if let Some(p) = args.pmax {
        config.grids.p_max = Some(p);
    }
    if let Some(n) = args.np {
        config.grids.momentum_points = n;
    }
    if let Some(n) = args.nx {
        config.grids.position_points = n;
    }
    if let Some(f) = args.format {
        config.output.format = f;
    }
    if let Some(out) = &args.out {
        config.output.path = Some(out.display().to_string());
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn slit_and_units(args: &SlitArgs) -> Result<(Slit64, PhysicalUnits64), Failure> {
    let slit = Slit64::new(args.slit_width.unwrap_or(1.0), args.slit_center.unwrap_or(0.0))?;
    let units = PhysicalUnits64::new(args.hbar.unwrap_or(1.0))?;
    Ok((slit, units))
}

/// Writes `bytes` to `path` atomically (temporary file, then rename) or to stdout.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| Failure::Io(e.error))?;
        }
    }
    Ok(())
}

fn json_bytes<S: Serialize>(value: &S) -> Result<Vec<u8>, Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(io::Error::other(e)))?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let config = build_config(&args.state)?;
    if config.output.format != OutputFormat::Json {
        return Err(Failure::Usage("analyze writes JSON only".into()));
    }
    let mut analysis = if args.timing {
        run_analysis_timed(&config)?
    } else {
        run_analysis(&config)?
    };
    if let Some(path) = &args.spectrum_out {
        let mut csv = Vec::new();
        write_spectrum_csv(&analysis.spectrum, &mut csv)?;
        emit(Some(path), &csv)?;
        analysis.report.spectrum_file = Some(path.display().to_string());
    }
    let out = analysis.report.config.output.path.clone();
    emit(out.as_deref().map(Path::new), &json_bytes(&analysis.report)?)
}

fn spectrum(args: &StateArgs) -> Result<(), Failure> {
    let mut config = build_config(args)?;
    if args.format.is_none() && args.config.is_none() {
        config.output.format = OutputFormat::Csv;
    }
    let analysis = run_analysis(&config)?;
    let bytes = match config.output.format {
        OutputFormat::Csv => {
            let mut csv = Vec::new();
            write_spectrum_csv(&analysis.spectrum, &mut csv)?;
            csv
        }
        OutputFormat::Json => json_bytes(&analysis.spectrum)?,
    };
    emit(config.output.path.as_deref().map(Path::new), &bytes)
}

#[derive(Serialize)]
struct VariationalReport {
    tool: &'static str,
    version: &'static str,
    n_max: usize,
    position_points: usize,
    slit: Slit64,
    units: PhysicalUnits64,
    result: VariationalResult<f64>,
}

fn variational(args: &VariationalArgs) -> Result<(), Failure> {
    let (slit, units) = slit_and_units(&args.slit)?;
    let basis = SineBasis::with_points(args.n_max, slit, args.nx)?;
    let result = minimize(&basis, units)?;
    let report = VariationalReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        n_max: args.n_max,
        position_points: args.nx,
        slit,
        units,
        result,
    };
    emit(args.out.as_deref(), &json_bytes(&report)?)
}

fn limit_scan(args: &ScanArgs) -> Result<(), Failure> {
    let (slit, units) = slit_and_units(&args.slit)?;
    let s_values = if args.s_values.is_empty() {
        default_scan_widths(&slit)
    } else {
        args.s_values.clone()
    };
    let p_max = args.pmax.unwrap_or(DEFAULT_P_MAX_SCALE * units.hbar / slit.width);
    let settings = ScanSettings {
        position_points: args.nx,
        momentum: MomentumGrid::new(p_max, args.np)?,
    };
    let scan = gaussian_limit_scan(&s_values, slit, units, settings)?;
    let bytes = match args.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut csv = Vec::new();
            write_scan_csv(&scan, &mut csv)?;
            csv
        }
        OutputFormat::Json => json_bytes(&scan)?,
    };
    emit(args.out.as_deref(), &bytes)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Variational(a) => variational(a),
        Command::LimitScan(a) => limit_scan(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{TOOL_NAME}: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
