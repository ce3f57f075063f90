use std::collections::HashMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use iwa_core::diagnostics;
use iwa_core::ingest::{self, short_label, AliasMap, CauseYearMatrix};
use iwa_core::ols::{self, ModelSpec};
use iwa_core::selection::{self, SelectionConfig};
use iwa_core::spatiotemporal::{self, DistrictHistogram, HourlyHistogram};
use iwa_core::{Error, FitResult64, HoldoutReport64, Relevancy64, ResidualAnalysis64, VifReport64};
use serde::Serialize;

use crate::{Cli, Command, DiagnoseArgs, FitArgs, HistogramArgs, PredictArgs, ReportArgs, SelectArgs};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> CliError {
        CliError { code, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match &e {
            Error::Io(_) => 2,
            Error::Parse { .. } | Error::EmptyInput => 3,
            Error::NoModel(_)
            | Error::DegenerateInput(_)
            | Error::InsufficientDof { .. }
            | Error::CollinearPredictor { .. }
            | Error::ConstantPredictor(_) => 4,
            _ => 1,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::new(2, e.to_string())
    }
}

type CliResult = Result<(), CliError>;

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Histogram(args) => cmd_histogram(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Diagnose(args) => cmd_diagnose(&args),
        Command::Select(args) => cmd_select(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::Report(args) => cmd_report(&args),
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::new(2, format!("{}: {e}", path.display())))
}

fn load_aliases(path: Option<&PathBuf>) -> Result<AliasMap, CliError> {
    match path {
        Some(p) => Ok(AliasMap::from_csv(open(p)?)?),
        None => Ok(AliasMap::empty()),
    }
}

fn load_matrix(
    path: &Path,
    from_year: Option<u16>,
    to_year: Option<u16>,
) -> Result<CauseYearMatrix, CliError> {
    let matrix = CauseYearMatrix::from_csv(open(path)?)?;
    if from_year.is_none() && to_year.is_none() {
        return Ok(matrix);
    }
    let from = from_year.unwrap_or(*matrix.years().first().unwrap());
    let to = to_year.unwrap_or(*matrix.years().last().unwrap());
    let keep: Vec<u16> = matrix.years().iter().copied().filter(|y| (from..=to).contains(y)).collect();
    Ok(matrix.restrict_years(&keep)?)
}

/// Write `contents` to `out/name` and print its manifest line.
fn emit(out: &Path, name: &str, contents: &str) -> CliResult {
    let path = out.join(name);
    fs::write(&path, contents)?;
    println!("wrote {} ({} rows)", path.display(), contents.lines().count());
    Ok(())
}

fn emit_json<T: Serialize>(out: &Path, name: &str, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(1, format!("serialization failed: {e}")))?;
    text.push('\n');
    emit(out, name, &text)
}

fn to_csv_string<F>(write: F) -> Result<String, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> iwa_core::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::new(1, format!("non-UTF-8 output: {e}")))
}

// ---------------------------------------------------------------------------
// histogram

#[derive(Serialize)]
struct PlotBundle<'a> {
    districts: &'a DistrictHistogram,
    hourly: &'a HourlyHistogram,
    am_total: u64,
    pm_total: u64,
    peak_window_total: u64,
}

fn write_histograms(
    out: &Path,
    records: &[ingest::AccidentRecord],
    format: crate::Format,
) -> CliResult {
    let districts = spatiotemporal::district_distribution(records)?;
    let hourly = spatiotemporal::hourly_distribution(records)?;

    if format.csv() {
        emit(out, "districts.csv", &to_csv_string(|w| districts.to_csv(w))?)?;
        emit(out, "hourly.csv", &to_csv_string(|w| hourly.to_csv(w))?)?;
    }
    if format.json() {
        let bundle = PlotBundle {
            districts: &districts,
            hourly: &hourly,
            am_total: hourly.am_total(),
            pm_total: hourly.pm_total(),
            peak_window_total: hourly.peak_window_total(),
        };
        emit_json(out, "plot.json", &bundle)?;
    }
    Ok(())
}

fn cmd_histogram(args: &HistogramArgs) -> CliResult {
    let aliases = load_aliases(args.aliases.as_ref())?;
    let records = ingest::parse_records(open(&args.input)?, &aliases)?;
    fs::create_dir_all(&args.out)?;
    write_histograms(&args.out, &records, args.format)
}

// ---------------------------------------------------------------------------
// fit

/// Full-model fit with Cp filled in (trivially k+1 for the full model).
fn fit_full(matrix: &CauseYearMatrix) -> Result<FitResult64, CliError> {
    let spec = ModelSpec::new(matrix.labels().to_vec())?;
    let mut fit = ols::fit::<f64>(matrix, &spec, None)?;
    fit.cp = Some(ols::mallows_cp(fit.sse, fit.mse, fit.n, fit.k));
    Ok(fit)
}

fn fitted_csv(fit: &FitResult64, matrix: &CauseYearMatrix) -> String {
    let mut s = String::from("year,actual,fitted,residual\n");
    for (i, &year) in fit.years.iter().enumerate() {
        s.push_str(&format!(
            "{year},{},{},{}\n",
            matrix.response()[i],
            fit.fitted[i],
            fit.residuals[i]
        ));
    }
    s
}

fn cmd_fit(args: &FitArgs) -> CliResult {
    let matrix = load_matrix(&args.input, args.from_year, args.to_year)?;
    let fit = fit_full(&matrix)?;
    fs::create_dir_all(&args.out)?;
    if args.format.json() {
        emit_json(&args.out, "fit.json", &fit)?;
    }
    if args.format.csv() {
        emit(&args.out, "fitted.csv", &fitted_csv(&fit, &matrix))?;
    }
    println!("{}", selection::equation_string(&fit));
    Ok(())
}

// ---------------------------------------------------------------------------
// diagnose

#[derive(Serialize)]
struct Diagnostics {
    vif: VifReport64,
    relevancy: Vec<Relevancy64>,
    residual: ResidualAnalysis64,
}

fn cmd_diagnose(args: &DiagnoseArgs) -> CliResult {
    let matrix = load_matrix(&args.input, args.from_year, args.to_year)?;
    let labels = matrix.labels().to_vec();
    let vif = diagnostics::vif::<f64>(&matrix, &labels, args.vif_threshold)?;
    let relevancy = labels
        .iter()
        .map(|l| diagnostics::multiple_r::<f64>(&matrix, l))
        .collect::<iwa_core::Result<Vec<_>>>()?;
    let fit = fit_full(&matrix)?;
    let residual = diagnostics::residual_analysis(&fit, &matrix)?;

    fs::create_dir_all(&args.out)?;
    if args.format.csv() {
        let mut vif_csv = String::from("predictor,vif,flagged\n");
        for e in &vif.entries {
            vif_csv.push_str(&format!("{},{},{}\n", short_label(&e.label), e.vif, e.flagged));
        }
        emit(&args.out, "vif.csv", &vif_csv)?;

        let mut rel_csv = String::from("predictor,r,slope_sign\n");
        for r in &relevancy {
            rel_csv.push_str(&format!("{},{},{}\n", short_label(&r.label), r.r, r.slope_sign));
        }
        emit(&args.out, "relevancy.csv", &rel_csv)?;
    }
    if args.format.json() {
        emit_json(&args.out, "diagnostics.json", &Diagnostics { vif: vif.clone(), relevancy, residual: residual.clone() })?;
    }

    if vif.flagged.is_empty() {
        println!("vif: no predictor at or above {}", args.vif_threshold);
    } else {
        println!("vif: flagged {}", vif.flagged.join(", "));
    }
    println!(
        "runs test: {} (runs = {}, z = {:.3})",
        if residual.runs.degenerate {
            "degenerate"
        } else if residual.runs.pass {
            "pass"
        } else {
            "fail"
        },
        residual.runs.runs,
        residual.runs.z
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// select

fn selection_config(args: &SelectArgs) -> SelectionConfig<f64> {
    SelectionConfig {
        alpha: args.alpha,
        vif_threshold: args.vif_threshold,
        policy: args.policy.into(),
    }
}

fn write_selection(
    out: &Path,
    matrix: &CauseYearMatrix,
    report: &selection::SelectionReport<f64>,
    format: crate::Format,
) -> CliResult {
    if format.json() {
        emit_json(out, "selection.json", report)?;
    }
    if format.csv() {
        let table = to_csv_string(|w| selection::write_model_table(report, matrix.labels(), w))?;
        emit(out, "model_table.csv", &table)?;
    }
    println!("{}", selection::equation_string(report.best_fit_result()));
    Ok(())
}

fn cmd_select(args: &SelectArgs) -> CliResult {
    let matrix = load_matrix(&args.input, args.from_year, args.to_year)?;
    let report = selection::run_pipeline::<f64>(&matrix, &selection_config(args))?;
    fs::create_dir_all(&args.out)?;
    write_selection(&args.out, &matrix, &report, args.format)
}

// ---------------------------------------------------------------------------
// predict

fn load_model(path: &Path) -> Result<FitResult64, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(2, format!("{}: {e}", path.display())))?;
    let fit: FitResult64 = serde_json::from_str(&text)
        .map_err(|e| CliError::new(5, format!("invalid model file {}: {e}", path.display())))?;
    for label in fit.spec.labels() {
        if !fit.coefficients.slopes.contains_key(label) {
            return Err(CliError::new(
                5,
                format!("invalid model file: no coefficient for predictor `{label}`"),
            ));
        }
    }
    Ok(fit)
}

/// Parse `label=value` pairs; labels may be either the full predictor
/// names from the model or their short codes.
fn parse_values(spec: &str, fit: &FitResult64) -> Result<HashMap<String, f64>, CliError> {
    let mut by_short: HashMap<String, String> = HashMap::new();
    for label in fit.coefficients.slopes.keys() {
        by_short.insert(short_label(label).to_string(), label.clone());
    }
    let mut values = HashMap::new();
    for pair in spec.split(',') {
        let (label, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::new(1, format!("expected label=value, got `{pair}`")))?;
        let label = label.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| CliError::new(1, format!("bad value for `{label}`: {e}")))?;
        let canonical = by_short.get(label).cloned().unwrap_or_else(|| label.to_string());
        values.insert(canonical, value);
    }
    Ok(values)
}

fn holdout_years(matrix: &CauseYearMatrix, holdout: usize) -> Result<Vec<u16>, CliError> {
    let n = matrix.n();
    if holdout == 0 || holdout >= n {
        return Err(CliError::new(
            1,
            format!("holdout must be between 1 and {} (matrix spans {n} years)", n - 1),
        ));
    }
    Ok(matrix.years()[n - holdout..].to_vec())
}

fn print_holdout(report: &HoldoutReport64) {
    for row in &report.rows {
        match row.percent_error {
            Some(p) => println!(
                "{}: actual {}, predicted {:.3}, error {:.2}%",
                row.year, row.actual, row.predicted, p
            ),
            None => println!(
                "{}: actual {}, predicted {:.3}, error undefined",
                row.year, row.actual, row.predicted
            ),
        }
    }
    match report.max_percent_error {
        Some(p) => println!("max percent error: {p:.2}%"),
        None => println!("max percent error: undefined"),
    }
}

fn cmd_predict(args: &PredictArgs) -> CliResult {
    let fit = load_model(&args.model)?;
    if args.values.is_none() && args.input.is_none() {
        return Err(CliError::new(1, "provide --values and/or --input"));
    }
    if let Some(values) = &args.values {
        let map = parse_values(values, &fit)?;
        let p = ols::predict(&fit, &map)?;
        println!("prediction: {p:.3}");
    }
    if let Some(input) = &args.input {
        let matrix = load_matrix(input, None, None)?;
        let years = holdout_years(&matrix, args.holdout)?;
        let report = ols::holdout_error(&matrix, &fit, &years)?;
        print_holdout(&report);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report

fn holdout_csv(report: &HoldoutReport64) -> String {
    let mut s = String::from("year,actual,predicted,percent_error\n");
    for row in &report.rows {
        let pct = row.percent_error.map(|p| p.to_string()).unwrap_or_else(|| "NA".into());
        s.push_str(&format!("{},{},{},{pct}\n", row.year, row.actual, row.predicted));
    }
    s
}

fn cmd_report(args: &ReportArgs) -> CliResult {
    let aliases = load_aliases(args.aliases.as_ref())?;
    let records = ingest::parse_records(open(&args.input)?, &aliases)?;
    let from = args
        .from_year
        .unwrap_or_else(|| records.iter().map(|r| r.year).min().unwrap());
    let to = args.to_year.unwrap_or_else(|| records.iter().map(|r| r.year).max().unwrap());
    let matrix = ingest::aggregate(&records, from, to)?;

    fs::create_dir_all(&args.out)?;
    write_histograms(&args.out, &records, args.format)?;
    emit(&args.out, "matrix.csv", &to_csv_string(|w| matrix.to_csv(w))?)?;

    // diagnostics on the aggregated window
    let labels = matrix.labels().to_vec();
    let vif = diagnostics::vif::<f64>(&matrix, &labels, args.vif_threshold)?;
    let relevancy = labels
        .iter()
        .map(|l| diagnostics::multiple_r::<f64>(&matrix, l))
        .collect::<iwa_core::Result<Vec<_>>>()?;

    let fit = fit_full(&matrix)?;
    if args.format.json() {
        emit_json(&args.out, "fit.json", &fit)?;
    }
    if args.format.csv() {
        emit(&args.out, "fitted.csv", &fitted_csv(&fit, &matrix))?;
    }

    let cfg = SelectionConfig {
        alpha: args.alpha,
        vif_threshold: args.vif_threshold,
        policy: args.policy.into(),
    };
    let report = selection::run_pipeline::<f64>(&matrix, &cfg)?;
    let residual = diagnostics::residual_analysis(&fit, &matrix)?;
    if args.format.json() {
        emit_json(
            &args.out,
            "diagnostics.json",
            &Diagnostics { vif, relevancy, residual },
        )?;
    }
    write_selection(&args.out, &matrix, &report, args.format)?;

    // refit the winning model on all but the trailing holdout years and
    // score it on the years it never saw
    let held = holdout_years(&matrix, args.holdout)?;
    let train: Vec<u16> =
        matrix.years().iter().copied().filter(|y| !held.contains(y)).collect();
    let best_spec = report.best_fit_result().spec.clone();
    let train_matrix = matrix.restrict_years(&train)?;
    let holdout_fit = ols::fit::<f64>(&train_matrix, &best_spec, None)?;
    let holdout_report = ols::holdout_error(&matrix, &holdout_fit, &held)?;
    if args.format.csv() {
        emit(&args.out, "holdout.csv", &holdout_csv(&holdout_report))?;
    }
    if args.format.json() {
        emit_json(&args.out, "holdout.json", &holdout_report)?;
    }
    print_holdout(&holdout_report);
    Ok(())
}
