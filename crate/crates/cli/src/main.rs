use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wnfc::factor::{ols_residuals, sliding_window_rates, DatedTable, FactorData, FactorTable};
use wnfc::harness::{
    emit_power_curve, emit_table, run_experiment, write_power_curve, write_table,
    ExperimentConfig, ExperimentKind, TableFormat,
};
use wnfc::power::{max_power_bounds, sum_power, PowerInputs};
use wnfc::series::read_matrix_csv;
use wnfc::{run_all, Error, ErrorCategory, Result, TestReport, TimeSeriesPanel};

/// White-noise tests for high-dimensional time series.
#[derive(Parser)]
#[command(name = "wnfc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a size experiment from a config file.
    Size(ExperimentArgs),
    /// Run a power experiment from a config file.
    Power(ExperimentArgs),
    /// Test one panel read from CSV.
    Test(TestArgs),
    /// Theoretical SUM power (and optionally MAX power bounds).
    PowerTheory(PowerTheoryArgs),
    /// Factor-model residuals followed by sliding-window testing.
    ResidualTest(ResidualArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentFormat {
    Csv,
    Markdown,
    Curve,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; defaults to the config's `out`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: ExperimentFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct TestArgs {
    /// Panel CSV, one row per time point.
    #[arg(long)]
    input: PathBuf,
    /// Number of lags tested.
    #[arg(long = "K", visible_alias = "lags", short = 'K')]
    lags: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// The first CSV row is a header.
    #[arg(long)]
    header: bool,
    /// Subtract column means before testing.
    #[arg(long)]
    center: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
}

#[derive(Args)]
struct PowerTheoryArgs {
    /// Headerless CSV holding the contemporaneous loading matrix.
    #[arg(long)]
    a0: PathBuf,
    /// Headerless CSV holding the lag-one loading matrix.
    #[arg(long)]
    a1: PathBuf,
    #[arg(long)]
    n: usize,
    /// Fourth moment of the innovations (3 for Gaussian).
    #[arg(long, default_value_t = 3.0)]
    nu4: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Also report MAX power bounds for a single lag-one autocorrelation.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Lag budget for the MAX bounds.
    #[arg(long = "K", default_value_t = 1)]
    lags: usize,
}

#[derive(Args)]
struct ResidualArgs {
    /// Returns CSV: date, then one column per asset.
    #[arg(long)]
    returns: PathBuf,
    /// Factors CSV: date, market excess, SMB, HML, risk-free.
    #[arg(long)]
    factors: PathBuf,
    #[arg(long)]
    window: usize,
    #[arg(long = "K", visible_alias = "lags", short = 'K')]
    lags: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Returns are already in excess of the risk-free rate.
    #[arg(long)]
    already_excess: bool,
    /// Require identical dates row by row.
    #[arg(long)]
    check_dates: bool,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn write_stdout(text: &str) -> Result<()> {
    io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn experiment(args: ExperimentArgs, kind: ExperimentKind) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if cfg.kind != kind {
        return Err(Error::config(
            "kind",
            format!("config describes a {:?} experiment", cfg.kind),
        ));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.workers = (w > 0).then_some(w);
    }
    let out = args.out.or_else(|| cfg.out_path.clone());
    let format = match args.format {
        ExperimentFormat::Csv => Some(TableFormat::Csv),
        ExperimentFormat::Markdown => Some(TableFormat::Markdown),
        ExperimentFormat::Curve if kind == ExperimentKind::Power => None,
        ExperimentFormat::Curve => {
            return Err(Error::config("format", "power curves need a power experiment"))
        }
    };
    let results = run_experiment(&cfg)?;
    match (format, out) {
        (Some(f), Some(path)) => write_table(&results, f, &path),
        (Some(f), None) => emit_table(&results, f, io::stdout().lock()),
        (None, Some(path)) => write_power_curve(&results, &path),
        (None, None) => emit_power_curve(&results, io::stdout().lock()),
    }
}

fn test_panel(args: TestArgs) -> Result<()> {
    let panel = TimeSeriesPanel::read_csv(open(&args.input)?, args.header, args.center)?;
    let report = run_all(&panel, args.lags, args.alpha)?;
    let text = match args.format {
        ReportFormat::Json => format!("{}\n", report.to_json()),
        ReportFormat::Csv => format!(
            "{}\n{}\n",
            TestReport::CSV_HEADER.join(","),
            report.to_csv_record()
        ),
    };
    write_stdout(&text)
}

fn power_theory(args: PowerTheoryArgs) -> Result<()> {
    let a0 = read_matrix_csv(open(&args.a0)?, false)?;
    let a1 = read_matrix_csv(open(&args.a1)?, false)?;
    let p = a0.nrows();
    let breakdown = sum_power(&PowerInputs::new(a0, a1, args.n, args.nu4, args.alpha)?)?;
    let mut doc = json!({
        "n": args.n,
        "p": p,
        "nu4": args.nu4,
        "alpha": args.alpha,
        "sum": breakdown,
    });
    if let Some(rho) = args.rho {
        let (lower, upper) = max_power_bounds(rho, args.n, p, args.lags, args.alpha)?;
        doc["max_bounds"] = json!({ "rho": rho, "K": args.lags, "lower": lower, "upper": upper });
    }
    write_stdout(&format!("{doc:#}\n"))
}

fn residual_test(args: ResidualArgs) -> Result<()> {
    let returns = DatedTable::read_csv(open(&args.returns)?)?;
    let factors = FactorTable::read_csv(open(&args.factors)?)?;
    let data = FactorData::from_tables(returns, factors, args.already_excess, args.check_dates)?;
    let residuals = ols_residuals(&data)?;
    let summary = sliding_window_rates(&residuals, args.window, args.lags, args.alpha)?;
    let dates = data.dates().unwrap_or(&[]);
    let doc = json!({
        "periods": data.periods(),
        "assets": data.assets(),
        "first_date": dates.first(),
        "last_date": dates.last(),
        "summary": summary,
    });
    write_stdout(&format!("{doc:#}\n"))
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Size(a) => experiment(a, ExperimentKind::Size),
        Command::Power(a) => experiment(a, ExperimentKind::Power),
        Command::Test(a) => test_panel(a),
        Command::PowerTheory(a) => power_theory(a),
        Command::ResidualTest(a) => residual_test(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}
