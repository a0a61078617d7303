//! Command-line front end: CSV ingestion, subcommand dispatch and report
//! rendering.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{self, BenchOptions};
use crate::datagen::{
    gen_screening_dataset, gen_showcase, showcase_label, Model, RngStream, ScreeningDesign,
};
use crate::error::{DcovError, Result};
use crate::estimate::{DependenceEstimate, Estimator, Method};
use crate::fast::{bias_corrected_dcor2_fast, omega_fast, vstat_dcor2_fast, vstat_dcov2_fast};
use crate::format::sig6;
use crate::oracle::Direct;
use crate::sample::PairedSample;
use crate::screening::{self, pearson, run_screening_experiment, ScreeningMethod};
use crate::sirs::{sirs_direct, sirs_fast};

/// Seed used by every seeded subcommand when `--seed` is omitted.
pub const DEFAULT_SEED: u64 = 20_140_128;

/// Tolerance of the `--check` comparison, relative to `max(1, |direct|)`.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "fastdcov",
    version,
    about = "Fast exact distance covariance and screening tools"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Distance covariance / correlation of two CSV columns.
    Dcov(DcovArgs),
    /// SIRS utility of two CSV columns (first is x, second is y).
    Sirs(SirsArgs),
    /// Pearson versus distance correlation on the nine showcase patterns.
    Showcase(ShowcaseArgs),
    /// Replicated feature-screening study.
    Screen(ScreenArgs),
    /// Timing study of the fast and direct estimators.
    Bench(BenchArgs),
    /// Write a generated dataset as CSV.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fast,
    Direct,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Fast => Method::Fast,
            MethodArg::Direct => Method::Direct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    /// Unbiased squared distance covariance.
    Unbiased,
    /// V-statistic squared distance covariance.
    Vstat,
    /// V-statistic squared distance correlation.
    Dcor,
    /// Bias-corrected squared distance correlation.
    BiasCorrectedDcor,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Unbiased => Estimator::UnbiasedDcov2,
            EstimatorArg::Vstat => Estimator::VstatDcov2,
            EstimatorArg::Dcor => Estimator::VstatDcor2,
            EstimatorArg::BiasCorrectedDcor => Estimator::BiasCorrectedDcor2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file, or '-' for standard input.
    #[arg(long, default_value = "-")]
    pub input: String,
    /// Comma-separated column names or 1-based indices (default: first two).
    #[arg(long)]
    pub columns: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DcovArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "fast")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "unbiased")]
    pub estimator: EstimatorArg,
    /// Also run the other method and report the difference.
    #[arg(long)]
    pub check: bool,
    /// Allow the direct method above its memory cap.
    #[arg(long)]
    pub force_direct_large: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SirsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "fast")]
    pub method: MethodArg,
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ShowcaseArgs {
    /// Pattern 1..=9; all nine when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
    pub case: Option<u8>,
    #[arg(long = "n", default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScreenArgs {
    #[arg(long, default_value = "1b")]
    pub model: Model,
    #[arg(long = "p", default_value_t = 500)]
    pub p: usize,
    #[arg(long = "n", default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Comma-separated subset of sis, sirs, dc-sis (default: all three).
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated sizes; `2^k` is accepted (default 2^5..2^11).
    #[arg(long = "n")]
    pub n: Option<String>,
    /// Comma-separated subset of fast, direct (default: both).
    #[arg(long)]
    pub method: Option<String>,
    /// Repetitions per size (default: 100 up to 2^11, 10 above).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub force_direct_large: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Showcase pattern 1..=9 (two columns x,y).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9), conflicts_with = "model")]
    pub case: Option<u8>,
    /// Screening model (response y followed by X1..Xp).
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long = "p", default_value_t = 500)]
    pub p: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Numeric columns selected from a CSV source.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvColumns {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub rows: usize,
}

impl CsvColumns {
    /// One column pairs with itself; two columns become (x, y).
    pub fn to_sample(&self) -> Result<PairedSample> {
        match self.columns.as_slice() {
            [v] => PairedSample::diagonal(v.clone()),
            [x, y] => PairedSample::new(x.clone(), y.clone()),
            cols => Err(DcovError::InvalidParameter(format!(
                "select one or two columns, got {}",
                cols.len()
            ))),
        }
    }
}

fn looks_numeric(cell: &str) -> bool {
    cell.trim().parse::<f64>().is_ok()
}

fn resolve_columns(
    list: Option<&str>,
    header: Option<&[String]>,
    width: usize,
) -> Result<Vec<usize>> {
    let Some(list) = list else {
        return Ok((0..width.min(2)).collect());
    };
    list.split(',')
        .map(str::trim)
        .map(|tok| {
            if let Some(pos) = header.and_then(|h| h.iter().position(|name| name == tok)) {
                return Ok(pos);
            }
            match tok.parse::<usize>() {
                Ok(k) if (1..=width).contains(&k) => Ok(k - 1),
                Ok(k) => Err(DcovError::InvalidParameter(format!(
                    "column index {k} outside 1..={width}"
                ))),
                Err(_) => Err(DcovError::InvalidParameter(format!(
                    "no column named {tok:?}"
                ))),
            }
        })
        .collect()
}

/// Read selected columns. A first line with any non-numeric cell is a header.
/// `columns` takes names (with a header) or 1-based indices.
pub fn ingest_csv<R: Read>(source: R, columns: Option<&str>) -> Result<CsvColumns> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut records = reader.records();
    let first = match records.next() {
        None => return Err(DcovError::Empty),
        Some(r) => r.map_err(|e| DcovError::Input(e.to_string()))?,
    };
    let width = first.len();
    let has_header = first.iter().any(|c| !looks_numeric(c));
    let header: Option<Vec<String>> =
        has_header.then(|| first.iter().map(str::to_string).collect());
    let selected = resolve_columns(columns, header.as_deref(), width)?;
    let names: Vec<String> = selected
        .iter()
        .map(|&k| {
            header
                .as_ref()
                .map_or_else(|| format!("{}", k + 1), |h| h[k].clone())
        })
        .collect();

    let mut data = vec![Vec::new(); selected.len()];
    let mut push_row = |record: &csv::StringRecord, row: usize| -> Result<()> {
        for (slot, &k) in selected.iter().enumerate() {
            let cell = record.get(k).unwrap_or("");
            let value = cell.parse::<f64>().ok().filter(|v| v.is_finite());
            match value {
                Some(v) => data[slot].push(v),
                None => {
                    return Err(DcovError::Parse {
                        row,
                        column: names[slot].clone(),
                        message: format!("{cell:?} is not a finite number"),
                    })
                }
            }
        }
        Ok(())
    };
    if !has_header {
        push_row(&first, 1)?;
    }
    for (i, record) in records.enumerate() {
        let record = record.map_err(|e| DcovError::Input(e.to_string()))?;
        let row = record.position().map_or(i + 2, |p| p.line() as usize);
        push_row(&record, row)?;
    }
    let rows = data.first().map_or(0, Vec::len);
    if rows == 0 {
        return Err(DcovError::Empty);
    }
    Ok(CsvColumns {
        names,
        columns: data,
        rows,
    })
}

fn read_input(args: &InputArgs, stdin: &mut dyn Read) -> anyhow::Result<CsvColumns> {
    let table = if args.input == "-" {
        ingest_csv(stdin, args.columns.as_deref())
    } else {
        let file =
            File::open(&args.input).with_context(|| format!("cannot open {}", args.input))?;
        ingest_csv(file, args.columns.as_deref())
    };
    Ok(table?)
}

/// Evaluate `estimator` on `s` with the chosen method.
pub fn evaluate(
    s: &PairedSample,
    estimator: Estimator,
    method: Method,
    direct: &Direct,
) -> Result<DependenceEstimate> {
    match (estimator, method) {
        (Estimator::UnbiasedDcov2, Method::Fast) => omega_fast(s),
        (Estimator::UnbiasedDcov2, Method::Direct) => direct.omega(s),
        (Estimator::VstatDcov2, Method::Fast) => vstat_dcov2_fast(s),
        (Estimator::VstatDcov2, Method::Direct) => direct.vstat_dcov2(s),
        (Estimator::VstatDcor2, Method::Fast) => vstat_dcor2_fast(s),
        (Estimator::VstatDcor2, Method::Direct) => direct.vstat_dcor2(s),
        (Estimator::BiasCorrectedDcor2, Method::Fast) => bias_corrected_dcor2_fast(s),
        (Estimator::BiasCorrectedDcor2, Method::Direct) => direct.bias_corrected_dcor2(s),
        (Estimator::Sirs, Method::Fast) => sirs_fast(s),
        (Estimator::Sirs, Method::Direct) => sirs_direct(s),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub fast: f64,
    pub direct: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(fast: f64, direct: f64) -> Self {
        let abs_diff = (fast - direct).abs();
        let tolerance = CHECK_TOLERANCE * direct.abs().max(1.0);
        Self {
            fast,
            direct,
            abs_diff,
            tolerance,
            passed: abs_diff <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub columns: Vec<String>,
    pub rows: usize,
    pub estimate: DependenceEstimate,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub check: Option<CheckReport>,
}

/// Pearson and distance correlation for one showcase pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShowcaseRow {
    pub case: u8,
    pub label: String,
    pub n: usize,
    pub seed: u64,
    pub pearson: f64,
    /// Square root of the bias-corrected dcor², floored at 0.
    pub dcor: f64,
    pub bias_corrected_dcor2: f64,
}

/// Case `k` draws from RNG stream `k`.
pub fn showcase_rows(cases: &[u8], n: usize, seed: u64) -> Result<Vec<ShowcaseRow>> {
    cases
        .iter()
        .map(|&case| {
            let mut rng = RngStream::new(seed, case as u64);
            let s = gen_showcase(case, n, &mut rng)?;
            let bc = bias_corrected_dcor2_fast(&s)?.value;
            Ok(ShowcaseRow {
                case,
                label: showcase_label(case).to_string(),
                n,
                seed,
                pearson: pearson(s.x(), s.y()),
                dcor: bc.max(0.0).sqrt(),
                bias_corrected_dcor2: bc,
            })
        })
        .collect()
}

fn parse_list<T>(list: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    list.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse)
        .collect()
}

fn parse_size(tok: &str) -> Result<usize> {
    let bad = || DcovError::InvalidParameter(format!("bad size {tok:?}"));
    if let Some(exp) = tok.strip_prefix("2^") {
        let e: u32 = exp.parse().map_err(|_| bad())?;
        1usize
            .checked_shl(e)
            .filter(|_| e < usize::BITS)
            .ok_or_else(bad)
    } else {
        tok.parse().map_err(|_| bad())
    }
}

fn parse_method(tok: &str) -> Result<Method> {
    match tok.to_ascii_lowercase().as_str() {
        "fast" => Ok(Method::Fast),
        "direct" => Ok(Method::Direct),
        _ => Err(DcovError::InvalidParameter(format!(
            "unknown method {tok:?}"
        ))),
    }
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn render_estimate(r: &EstimateReport, format: FormatArg) -> anyhow::Result<String> {
    let e = &r.estimate;
    Ok(match format {
        FormatArg::Json => to_json(r)?,
        FormatArg::Csv => {
            let mut s = String::from("estimator,method,n,value");
            if r.check.is_some() {
                s.push_str(",fast,direct,abs_diff,passed");
            }
            let _ = write!(s, "\n{},{},{},{}", e.estimator, e.method, e.n, e.value);
            if let Some(c) = &r.check {
                let _ = write!(s, ",{},{},{},{}", c.fast, c.direct, c.abs_diff, c.passed);
            }
            s.push('\n');
            s
        }
        FormatArg::Text => {
            let mut s = format!(
                "{} ({}, n={}, columns {}): {}\n",
                e.estimator,
                e.method,
                e.n,
                r.columns.join(","),
                sig6(e.value)
            );
            if let Some(c) = &r.check {
                let _ = writeln!(
                    s,
                    "check: fast={} direct={} |fast-direct|={} tolerance={} {}",
                    sig6(c.fast),
                    sig6(c.direct),
                    sig6(c.abs_diff),
                    sig6(c.tolerance),
                    if c.passed { "ok" } else { "FAILED" }
                );
            }
            s
        }
    })
}

struct Outcome {
    body: String,
    notes: Vec<String>,
    ok: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self {
            body,
            notes: Vec::new(),
            ok: true,
        }
    }
}

fn estimate_command(
    input: &InputArgs,
    estimator: Estimator,
    method: Method,
    check: bool,
    direct: Direct,
    format: FormatArg,
    stdin: &mut dyn Read,
) -> anyhow::Result<Outcome> {
    let table = read_input(input, stdin)?;
    let s = table.to_sample()?;
    let estimate = evaluate(&s, estimator, method, &direct)?;
    let check = if check {
        let other = match method {
            Method::Fast => Method::Direct,
            Method::Direct => Method::Fast,
        };
        let second = evaluate(&s, estimator, other, &direct)?.value;
        Some(match method {
            Method::Fast => CheckReport::new(estimate.value, second),
            Method::Direct => CheckReport::new(second, estimate.value),
        })
    } else {
        None
    };
    let ok = check.as_ref().is_none_or(|c| c.passed);
    let report = EstimateReport {
        columns: table.names,
        rows: table.rows,
        estimate,
        check,
    };
    let mut out = Outcome::ok(render_estimate(&report, format)?);
    out.ok = ok;
    if !ok {
        out.notes
            .push("fast and direct results differ beyond tolerance".into());
    }
    Ok(out)
}

fn showcase_command(a: &ShowcaseArgs) -> anyhow::Result<Outcome> {
    let cases: Vec<u8> = match a.case {
        Some(c) => vec![c],
        None => crate::datagen::SHOWCASE_CASES.collect(),
    };
    let rows = showcase_rows(&cases, a.n, a.seed)?;
    let body = match a.out.format {
        FormatArg::Json => to_json(&rows)?,
        FormatArg::Csv => {
            let mut s = String::from("case,label,n,seed,pearson,dcor,bias_corrected_dcor2\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},\"{}\",{},{},{},{},{}",
                    r.case, r.label, r.n, r.seed, r.pearson, r.dcor, r.bias_corrected_dcor2
                );
            }
            s
        }
        FormatArg::Text => {
            let mut s = format!(
                "n={} seed={}\n{:<5} {:<40} {:>10} {:>10}\n",
                a.n, a.seed, "case", "pattern", "pearson", "dcor"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<5} {:<40} {:>10} {:>10}",
                    r.case,
                    r.label,
                    sig6(r.pearson),
                    sig6(r.dcor)
                );
            }
            s
        }
    };
    Ok(Outcome::ok(body))
}

fn screen_command(a: &ScreenArgs) -> anyhow::Result<Outcome> {
    let methods = match &a.method {
        Some(list) => parse_list(list, |t| t.parse::<ScreeningMethod>())?,
        None => ScreeningMethod::ALL.to_vec(),
    };
    if methods.is_empty() {
        bail!("no screening methods selected");
    }
    let design = ScreeningDesign::new(a.p, a.n, a.rho, a.model)?;
    let reports = run_screening_experiment(&design, &methods, a.reps, a.seed)?;
    let body = match a.out.format {
        FormatArg::Json => to_json(&reports)?,
        FormatArg::Text => screening::render_tables(&reports),
        FormatArg::Csv => {
            let mut s = String::from("method,statistic,level,value\n");
            for r in &reports {
                for (q, v) in r.quantile_levels.iter().zip(&r.s_quantiles) {
                    let _ = writeln!(s, "{},S,{},{}", r.method, q, v);
                }
                for (c, d) in r.cutoffs.iter().enumerate() {
                    for (name, row) in r.active.iter().zip(&r.selection.p_s) {
                        let _ = writeln!(s, "{},P_s:{},{},{}", r.method, name, d, row[c]);
                    }
                    let _ = writeln!(s, "{},P_a,{},{}", r.method, d, r.selection.p_a[c]);
                }
            }
            s
        }
    };
    Ok(Outcome::ok(body))
}

fn bench_command(a: &BenchArgs) -> anyhow::Result<Outcome> {
    let sizes = match &a.n {
        Some(list) => parse_list(list, parse_size)?,
        None => (5..=11).map(|k| 1usize << k).collect(),
    };
    let methods = match &a.method {
        Some(list) => parse_list(list, parse_method)?,
        None => vec![Method::Fast, Method::Direct],
    };
    let mut options = BenchOptions {
        reps: a.reps,
        ..Default::default()
    };
    if a.force_direct_large {
        options.direct_cap = usize::MAX;
    }
    let report = bench::bench_run_with(&sizes, &methods, a.seed, &options)?;
    let body = match a.out.format {
        FormatArg::Json => to_json(&report)?,
        FormatArg::Csv => bench::to_csv(&report.records),
        FormatArg::Text => {
            let mut s = bench::render_table(&report.records);
            for m in [Method::Fast, Method::Direct] {
                let recs = bench::records_for(&report.records, m);
                if let Ok(slope) = bench::fit_scaling_slope(&recs) {
                    let _ = writeln!(s, "log-log slope ({m}): {}", sig6(slope));
                }
            }
            if let Some(gap) = report.max_relative_gap {
                let _ = writeln!(s, "max relative fast/direct gap: {}", sig6(gap));
            }
            s
        }
    };
    Ok(Outcome {
        body,
        notes: report.notices,
        ok: true,
    })
}

fn gen_command(a: &GenArgs) -> anyhow::Result<Outcome> {
    let (names, columns): (Vec<String>, Vec<Vec<f64>>) = match (a.case, a.model) {
        (Some(case), None) => {
            let n = a.n.unwrap_or(10_000);
            let mut rng = RngStream::new(a.seed, case as u64);
            let (x, y) = gen_showcase(case, n, &mut rng)?.into_parts();
            (vec!["x".into(), "y".into()], vec![x, y])
        }
        (None, Some(model)) => {
            let design = ScreeningDesign::new(a.p, a.n.unwrap_or(200), a.rho, model)?;
            let data = gen_screening_dataset(&design, a.seed, 0)?;
            let mut names = vec!["y".to_string()];
            let mut cols = vec![data.y];
            for k in 0..design.p {
                names.push(format!("X{}", k + 1));
                cols.push(data.x.column(k).to_vec());
            }
            (names, cols)
        }
        _ => bail!("gen needs exactly one of --case or --model"),
    };
    let body = match a.out.format {
        FormatArg::Json => {
            let map: serde_json::Map<String, serde_json::Value> = names
                .iter()
                .cloned()
                .zip(columns.iter().map(|c| serde_json::json!(c)))
                .collect();
            to_json(&map)?
        }
        FormatArg::Csv | FormatArg::Text => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&names)?;
            let rows = columns.first().map_or(0, Vec::len);
            for i in 0..rows {
                w.write_record(columns.iter().map(|c| c[i].to_string()))?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    Ok(Outcome::ok(body))
}

fn execute(config: &CliConfig, stdin: &mut dyn Read) -> anyhow::Result<(Outcome, Option<PathBuf>)> {
    Ok(match &config.command {
        Command::Dcov(a) => {
            let direct = if a.force_direct_large {
                Direct::unbounded()
            } else {
                Direct::default()
            };
            let out = estimate_command(
                &a.input,
                a.estimator.into(),
                a.method.into(),
                a.check,
                direct,
                a.out.format,
                stdin,
            )?;
            (out, a.out.output.clone())
        }
        Command::Sirs(a) => {
            let out = estimate_command(
                &a.input,
                Estimator::Sirs,
                a.method.into(),
                a.check,
                Direct::default(),
                a.out.format,
                stdin,
            )?;
            (out, a.out.output.clone())
        }
        Command::Showcase(a) => (showcase_command(a)?, a.out.output.clone()),
        Command::Screen(a) => (screen_command(a)?, a.out.output.clone()),
        Command::Bench(a) => (bench_command(a)?, a.out.output.clone()),
        Command::Gen(a) => (gen_command(a)?, a.out.output.clone()),
    })
}

/// Run a parsed command. The report goes to `--output` or `stdout`;
/// diagnostics go to `stderr`. Returns the process exit code.
pub fn dispatch(
    config: &CliConfig,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let result = execute(config, stdin).and_then(|(outcome, path)| {
        match path {
            Some(p) => std::fs::write(&p, &outcome.body)
                .with_context(|| format!("cannot write {}", p.display()))?,
            None => stdout.write_all(outcome.body.as_bytes())?,
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for note in &outcome.notes {
                let _ = writeln!(stderr, "note: {note}");
            }
            if outcome.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

/// Parse `args` (program name first) and dispatch.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match CliConfig::try_parse_from(args) {
        Ok(config) => dispatch(&config, stdin, stdout, stderr),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_with_std() -> i32 {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ingest_with_header() {
        let t = ingest_csv("x,y\n1,2\n3,4\n".as_bytes(), Some("x,y")).unwrap();
        assert_eq!(t.columns, vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert_eq!(t.rows, 2);
        let s = t.to_sample().unwrap();
        assert_eq!((s.x(), s.y()), (&[1.0, 3.0][..], &[2.0, 4.0][..]));
    }

    #[test]
    fn ingest_without_header_and_by_index() {
        let t = ingest_csv("1,2,3\n4,5,6\n".as_bytes(), Some("3,1")).unwrap();
        assert_eq!(t.columns, vec![vec![3.0, 6.0], vec![1.0, 4.0]]);
        let t = ingest_csv("1,2,3\n4,5,6\n".as_bytes(), None).unwrap();
        assert_eq!(t.names, vec!["1", "2"]);
        let single = ingest_csv("v\n1\n2\n".as_bytes(), Some("v")).unwrap();
        assert_eq!(
            single.to_sample().unwrap().x(),
            single.to_sample().unwrap().y()
        );
    }

    #[test]
    fn ingest_rejects_nan_with_location() {
        let err = ingest_csv("x,y\n1,2\nNaN,4\n".as_bytes(), None).unwrap_err();
        assert_eq!(
            err,
            DcovError::Parse {
                row: 3,
                column: "x".into(),
                message: "\"NaN\" is not a finite number".into()
            }
        );
        let msg = ingest_csv("x,y\n1,abc\n".as_bytes(), None)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("row 2") && msg.contains("column y"), "{msg}");
        assert_eq!(ingest_csv("".as_bytes(), None), Err(DcovError::Empty));
        assert_eq!(ingest_csv("x,y\n".as_bytes(), None), Err(DcovError::Empty));
        assert!(ingest_csv("x,y\n1,2\n".as_bytes(), Some("z")).is_err());
    }

    #[test]
    fn size_lists() {
        assert_eq!(
            parse_list("2^5, 100,2^0", parse_size).unwrap(),
            vec![32, 100, 1]
        );
        assert!(parse_size("2^x").is_err());
        assert!(parse_size("2^99").is_err());
    }

    #[test]
    fn check_report_tolerance() {
        assert!(CheckReport::new(1.0, 1.0 + 5e-10).passed);
        assert!(!CheckReport::new(1.0, 1.0 + 5e-9).passed);
        assert!(CheckReport::new(1e6, 1e6 * (1.0 + 5e-10)).passed);
    }
}
