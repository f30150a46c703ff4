//! `qdb` — command-line front end for the quantum dynamic belief library:
//! run the pipeline at explicit parameters, fit payoff parameters to
//! observed conditionals, reproduce or compare model predictions over
//! datasets, and compute BPA entropies.
//!
//! Exit codes: 0 success, 2 validation/parse error, 3 fit failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qdb::evidence::MassFunction;
use qdb::experiments::{
    builtin_datasets, chart_csv, compare_models_with, load_rows, report_to_csv, report_to_json,
    reproduce_qdb_with, DataFormat, ExperimentError, ExperimentRow, PredictionReport,
};
use qdb::model::{
    fit_h, run_pipeline, BeliefActionBasis, InterferenceSign, ModelError, QdbParams,
};

#[derive(Parser)]
#[command(
    name = "qdb",
    version,
    about = "Quantum dynamic belief decision models: predict, fit, reproduce, compare, entropy",
    propagate_version = true
)]
struct Cli {
    /// Output format for results printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Machine-readable JSON with full float precision.
    Json,
    /// Flat CSV with full float precision.
    Csv,
    /// Human-readable table rounded to 4 decimals (default).
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Run the six-step pipeline at explicit parameters.
    Predict(PredictArgs),
    /// Fit the payoff parameters h1, h2 to observed conditionals.
    Fit(FitArgs),
    /// Fit and run the QDB model over a dataset (narrow rows by default).
    Reproduce(DatasetArgs),
    /// Compare Markov, QDB, and BAE predictions over a dataset.
    Compare(CompareArgs),
    /// Compute the Deng entropy of a BPA and the Shannon entropy of its
    /// pignistic transform.
    Entropy(EntropyArgs),
}

#[derive(Args)]
struct PredictArgs {
    /// Payoff parameter for the first belief, in [-0.7, 1].
    #[arg(long, allow_negative_numbers = true)]
    h1: f64,
    /// Payoff parameter for the second belief, in [-0.7, 1].
    #[arg(long, allow_negative_numbers = true)]
    h2: f64,
    /// Prior probability of the first belief, in [0, 1].
    #[arg(long = "p-b1")]
    p_b1: f64,
    /// Evolution time (default π/2).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    t: f64,
    /// Interference sign: + or -.
    #[arg(long, default_value = "+", value_parser = parse_sign, allow_hyphen_values = true)]
    sign: InterferenceSign,
}

#[derive(Args)]
struct FitArgs {
    /// Observed P(target | first belief), e.g. P(A|G).
    #[arg(long = "target-b1")]
    target_b1: f64,
    /// Observed P(target | second belief), e.g. P(A|B).
    #[arg(long = "target-b2")]
    target_b2: f64,
    /// Evolution time (default π/2).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    t: f64,
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset file (.csv or .json); defaults to the built-in tables.
    #[arg(long, conflicts_with = "builtin")]
    data: Option<PathBuf>,
    /// Use the built-in experiment tables (the default when --data is absent).
    #[arg(long)]
    builtin: bool,
    /// Write the report to this file instead of printing a table
    /// (format from --format, or from the file extension under the default).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evolution time (default π/2).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    t: f64,
    /// Interference sign: + or -.
    #[arg(long, default_value = "+", value_parser = parse_sign, allow_hyphen_values = true)]
    sign: InterferenceSign,
    /// Also fit wide-face rows (skipped by default).
    #[arg(long = "fit-wide")]
    fit_wide: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Write the comparison chart data series (CSV) to this file.
    #[arg(long)]
    chart: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    /// BPA JSON file: {"frame": [labels], "masses": [{"set": [labels], "mass": m}]}.
    #[arg(long)]
    bpa: PathBuf,
}

fn parse_sign(text: &str) -> Result<InterferenceSign, String> {
    text.parse::<InterferenceSign>().map_err(|e| e.to_string())
}

/// CLI failure categories, each with its own exit code and a single-line
/// machine-parsable stderr prefix.
enum CliError {
    Validation(String),
    Fit(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Fit(_) => 3,
        }
    }

    fn stderr_line(&self) -> String {
        match self {
            Self::Validation(message) => format!("error[validation]: {message}"),
            Self::Fit(message) => format!("error[fit]: {message}"),
        }
    }
}

fn model_error(err: ModelError) -> CliError {
    match err {
        ModelError::TargetUnreachable { .. } | ModelError::NonMonotoneBracket { .. } => {
            CliError::Fit(err.to_string())
        }
        other => CliError::Validation(other.to_string()),
    }
}

fn experiment_error(err: ExperimentError) -> CliError {
    match err {
        ExperimentError::Model(inner) => model_error(inner),
        other => CliError::Validation(other.to_string()),
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `qdb compare | head`) instead of
    // panicking mid-write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.stderr_line());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Predict(args) => predict(&args, cli.format),
        Command::Fit(args) => fit(&args, cli.format),
        Command::Reproduce(args) => dataset_report(&args, None, false, cli.format),
        Command::Compare(args) => {
            dataset_report(&args.dataset, args.chart.as_deref(), true, cli.format)
        }
        Command::Entropy(args) => entropy(&args, cli.format),
    }
}

fn predict(args: &PredictArgs, format: Format) -> Result<(), CliError> {
    let params = QdbParams::new(args.h1, args.h2, args.p_b1)
        .and_then(|p| p.with_t(args.t))
        .map_err(model_error)?
        .with_sign(args.sign);
    let result = run_pipeline(&params).map_err(model_error)?;
    let basis = BeliefActionBasis::default();

    match format {
        Format::Table => {
            let mut line = String::from("m1:");
            for (name, set) in basis.known_focal_sets() {
                write!(line, " {name}={:.4}", result.m_known.mass(set)).unwrap();
            }
            println!("{line}");
            let mut line = String::from("m2:");
            for (name, set) in basis.unknown_focal_sets() {
                write!(line, " {name}={:.4}", result.m_unknown.mass(set)).unwrap();
            }
            println!("{line}");
            println!(
                "E_d1={:.4}  E_d2={:.4}  gamma={:.4}",
                result.ed_known, result.ed_unknown, result.gamma
            );
            println!(
                "P(A|G)={}  P(A|B)={}",
                cell4(result.p_cond_target_b1),
                cell4(result.p_cond_target_b2)
            );
            let clamped = if result.clamped { " (clamped)" } else { "" };
            println!(
                "P_T={:.4}  P(A)={:.4}  Int={:.4}{clamped}",
                result.p_total, result.p_unknown, result.interference
            );
        }
        Format::Json => {
            let m1: serde_json::Map<String, serde_json::Value> = basis
                .known_focal_sets()
                .into_iter()
                .map(|(name, set)| (name, json!(result.m_known.mass(set))))
                .collect();
            let m2: serde_json::Map<String, serde_json::Value> = basis
                .unknown_focal_sets()
                .into_iter()
                .map(|(name, set)| (name, json!(result.m_unknown.mass(set))))
                .collect();
            let value = json!({
                "h1": args.h1,
                "h2": args.h2,
                "p_b1": args.p_b1,
                "t": args.t,
                "sign": args.sign.signum(),
                "m1": m1,
                "m2": m2,
                "ed_known": result.ed_known,
                "ed_unknown": result.ed_unknown,
                "gamma": result.gamma,
                "p_cond_target_b1": result.p_cond_target_b1,
                "p_cond_target_b2": result.p_cond_target_b2,
                "p_total": result.p_total,
                "p_unknown": result.p_unknown,
                "interference": result.interference,
                "clamped": result.clamped,
            });
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
        Format::Csv => {
            println!(
                "h1,h2,p_b1,t,sign,p_cond_target_b1,p_cond_target_b2,p_total,p_unknown,\
                 gamma,interference,ed_known,ed_unknown,clamped"
            );
            println!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                args.h1,
                args.h2,
                args.p_b1,
                args.t,
                args.sign.signum(),
                opt_full(result.p_cond_target_b1),
                opt_full(result.p_cond_target_b2),
                result.p_total,
                result.p_unknown,
                result.gamma,
                result.interference,
                result.ed_known,
                result.ed_unknown,
                result.clamped
            );
        }
    }
    Ok(())
}

fn fit(args: &FitArgs, format: Format) -> Result<(), CliError> {
    let h1 = fit_h(args.target_b1, args.t).map_err(model_error)?;
    let h2 = fit_h(args.target_b2, args.t).map_err(model_error)?;
    match format {
        Format::Table => {
            println!("h1={h1:.4}");
            println!("h2={h2:.4}");
        }
        Format::Json => {
            let value = json!({ "h1": h1, "h2": h2, "t": args.t });
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
        Format::Csv => {
            println!("h1,h2,t");
            println!("{h1},{h2},{}", args.t);
        }
    }
    Ok(())
}

fn load_input(args: &DatasetArgs) -> Result<Vec<ExperimentRow>, CliError> {
    match &args.data {
        None => Ok(builtin_datasets()),
        Some(path) => {
            let format = match path.extension().and_then(|e| e.to_str()) {
                Some("json") => DataFormat::Json,
                _ => DataFormat::Csv,
            };
            load_rows(path, format).map_err(experiment_error)
        }
    }
}

fn dataset_report(
    args: &DatasetArgs,
    chart: Option<&Path>,
    with_bae: bool,
    format: Format,
) -> Result<(), CliError> {
    let rows = load_input(args)?;
    let report = if with_bae {
        compare_models_with(&rows, args.t, args.sign, args.fit_wide)
    } else {
        reproduce_qdb_with(&rows, args.t, args.sign, args.fit_wide)
    }
    .map_err(experiment_error)?;

    if let Some(path) = chart {
        write_file(path, &chart_csv(&report))?;
    }

    match &args.out {
        Some(path) => {
            let content = match format {
                Format::Json => report_to_json(&report),
                Format::Csv => report_to_csv(&report),
                Format::Table => match path.extension().and_then(|e| e.to_str()) {
                    Some("csv") => report_to_csv(&report),
                    _ => report_to_json(&report),
                },
            };
            write_file(path, &content)?;
        }
        None => match format {
            Format::Json => print!("{}", report_to_json(&report)),
            Format::Csv => print!("{}", report_to_csv(&report)),
            Format::Table => print!("{}", report_table(&report, with_bae)),
        },
    }
    Ok(())
}

fn report_table(report: &PredictionReport, with_bae: bool) -> String {
    let mut out = String::new();
    let bae_header = if with_bae { format!("  {:>9}", "bae_P(A)") } else { String::new() };
    writeln!(
        out,
        "{:<14}  {:<4}  {:>9}  {:>9}  {:>9}  {:>9}{bae_header}",
        "dataset", "face", "obs_P(A)", "markov", "qdb_P_T", "qdb_P(A)"
    )
    .unwrap();
    for row in &report.rows {
        let qdb_pt = cell4(row.qdb.as_ref().map(|q| q.p_total));
        let qdb_pa = cell4(row.qdb.as_ref().map(|q| q.p_unknown));
        let bae_col = if with_bae {
            format!("  {:>9}", cell4(row.bae.as_ref().map(|b| b.p_unknown)))
        } else {
            String::new()
        };
        writeln!(
            out,
            "{:<14}  {:<4}  {:>9.4}  {:>9.4}  {:>9}  {:>9}{bae_col}",
            row.dataset,
            row.face_type.code(),
            row.observed.p_a,
            row.markov,
            qdb_pt,
            qdb_pa
        )
        .unwrap();
    }
    let mut footer = String::from("MAE:");
    if let Some(stats) = &report.aggregate.markov {
        write!(footer, " markov={:.4}", stats.mean_abs_error).unwrap();
    }
    if let Some(stats) = &report.aggregate.qdb {
        write!(footer, " qdb={:.4}", stats.mean_abs_error).unwrap();
    }
    if let Some(stats) = &report.aggregate.bae {
        write!(footer, " bae={:.4}", stats.mean_abs_error).unwrap();
    }
    writeln!(out, "{footer}").unwrap();
    out
}

fn entropy(args: &EntropyArgs, format: Format) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.bpa).map_err(|e| {
        CliError::Validation(format!("cannot read {}: {e}", args.bpa.display()))
    })?;
    let bpa = MassFunction::from_json(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    let deng = bpa.deng_entropy();
    let shannon = bpa.ppt().shannon_entropy();
    match format {
        Format::Table => {
            println!("deng_entropy={deng:.4}");
            println!("shannon_pignistic={shannon:.4}");
        }
        Format::Json => {
            let value = json!({ "deng_entropy": deng, "shannon_pignistic": shannon });
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
        Format::Csv => {
            println!("deng_entropy,shannon_pignistic");
            println!("{deng},{shannon}");
        }
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn cell4(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".to_string())
}

fn opt_full(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}
