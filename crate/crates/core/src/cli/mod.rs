//! Command-line front end: argument parsing, evaluation commands and output
//! formatting. `main.rs` only forwards to [`run`].

pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coherent::{cs_build, CsKind};
use crate::error::Error;
use crate::model::{DeformedModel, Truncation};
use crate::thermal::{
    bose_einstein, free_energy, internal_energy, partition, thermal_expect_ap_am, thermal_qubit, thermal_vacuum,
    theta_of_beta, vacuum_expect_num,
};
use verify::{reference_betas, run_verify, NamedModel, Suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "TFDCS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tfdcs", version, about = "Thermal vacua, thermal coherent states and quasi-probabilities of deformed bosons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one thermal quantity at a β value or over a β range.
    Eval(EvalArgs),
    /// Coefficients of a thermal coherent state.
    Cs(CsArgs),
    /// Sweep several quantities over a β range; one CSV row per grid point.
    Scan(ScanArgs),
    /// Run the verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Thermal vacuum of a two-level system.
    Qubit(QubitArgs),
    /// Model-file utilities.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ModelAction {
    /// Parse a model file and print it back in canonical form.
    Print {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Partition,
    Theta,
    InternalEnergy,
    FreeEnergy,
    #[value(name = "nT")]
    NT,
    ThermalVacuum,
    VacuumExpect,
    ThermalExpect,
}

impl Quantity {
    fn column(self) -> &'static str {
        match self {
            Quantity::Partition => "partition",
            Quantity::Theta => "theta",
            Quantity::InternalEnergy => "internal_energy",
            Quantity::FreeEnergy => "free_energy",
            Quantity::NT => "n_t",
            Quantity::ThermalVacuum => "thermal_vacuum",
            Quantity::VacuumExpect => "vacuum_expect",
            Quantity::ThermalExpect => "thermal_expect",
        }
    }
}

#[derive(Debug, Args)]
pub struct TruncArgs {
    /// Fock-space cutoff; raised automatically (doubling, up to 2048) when the tail bound fails.
    #[arg(long, default_value_t = 128)]
    pub n_max: usize,
    /// Largest admissible discarded weight.
    #[arg(long, default_value_t = 1e-12)]
    pub tail_tol: f64,
}

impl TruncArgs {
    fn truncation(&self) -> Result<Truncation, CliError> {
        Truncation::new(self.n_max, self.tail_tol).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    /// A single value `v` or a range `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    /// Space a range geometrically instead of linearly.
    #[arg(long)]
    pub geometric: bool,
}

impl BetaArgs {
    fn grid(&self) -> Result<Vec<f64>, CliError> {
        BetaSpec::parse(&self.beta).map(|s| s.grid(self.geometric)).map_err(CliError::Config)
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub beta: BetaArgs,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Bg)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z_im: f64,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Bg,
    Kp,
}

impl From<KindArg> for CsKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Bg => CsKind::Bg,
            KindArg::Kp => CsKind::Kp,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Comma-separated list of scalar quantities.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub quantity: Vec<Quantity>,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// thermal, coherent, quasiprob, specfun or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Verify a single model file instead of the built-in reference battery.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// β value or range; defaults to the grid {0.5, ln 4, 3}.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub geometric: bool,
    /// Replace every check's tolerance with this value.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub trunc: TruncArgs,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add per-check wall-clock times to the report (makes it non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct QubitArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub e0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub e1: f64,
    #[command(flatten)]
    pub beta: BetaArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// `v` or `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Single(f64),
    Range { start: f64, stop: f64, count: usize },
}

impl BetaSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("invalid β value {t:?}"));
        let positive = |v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!("β = {v} must be positive and finite"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(BetaSpec::Single(positive(num(v)?)?)),
            [a, b, c] => {
                let (start, stop) = (positive(num(a)?)?, positive(num(b)?)?);
                let count: usize = c.trim().parse().map_err(|_| format!("invalid point count {c:?}"))?;
                if count < 2 {
                    return Err(format!("a β range needs at least 2 points, got {count}"));
                }
                if !(start < stop) {
                    return Err(format!("β range start {start} must be below stop {stop}"));
                }
                Ok(BetaSpec::Range { start, stop, count })
            }
            _ => Err(format!("β must be `v` or `start:stop:count`, got {s:?}")),
        }
    }

    pub fn grid(&self, geometric: bool) -> Vec<f64> {
        match *self {
            BetaSpec::Single(v) => vec![v],
            BetaSpec::Range { start, stop, count } => (0..count)
                .map(|i| {
                    if i == 0 {
                        return start;
                    }
                    if i == count - 1 {
                        return stop;
                    }
                    let f = i as f64 / (count - 1) as f64;
                    if geometric {
                        // log10 keeps decade grids exact: 0.1:10:3 → {0.1, 1, 10}
                        10f64.powf(start.log10() + f * (stop.log10() - start.log10()))
                    } else {
                        start + f * (stop - start)
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn report(&self) -> String {
        match self {
            CliError::Config(m) => format!("error[config]: {m}"),
            CliError::Numeric(e) => format!("error[{}]: {e}", e.name()),
        }
    }
}

pub fn load_model(path: &Path) -> Result<DeformedModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    DeformedModel::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Sets the rayon pool size from `TFDCS_THREADS` if present.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
    // a second initialisation (tests running in one process) is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|_| dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Eval(a) => cmd_eval(&a),
        Command::Cs(a) => cmd_cs(&a),
        Command::Scan(a) => cmd_scan(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Qubit(a) => cmd_qubit(&a),
        Command::Model { action: ModelAction::Print { model } } => {
            let m = load_model(&model)?;
            emit(None, &(m.to_json() + "\n"))?;
            Ok(EXIT_OK)
        }
    }
}

/// Number formatting shared by every CSV table: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    // no negative zero in tables
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::Config(format!("stdout: {e}")))
        }
    }
}

/// A header plus rows of optional numbers and optional trailing text fields.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

enum Cell {
    Num(Option<f64>),
    Int(usize),
    Text(String),
}

impl Table {
    fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        let wr = |e: csv::Error| CliError::Config(format!("csv: {e}"));
        w.write_record(&self.header).map_err(wr)?;
        for row in &self.rows {
            let rec: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_opt(*v),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            w.write_record(&rec).map_err(wr)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn to_json(&self, command: &str, extra: Value) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (h, c) in self.header.iter().zip(row) {
                    let v = match c {
                        Cell::Num(v) => v.map(Value::from).unwrap_or(Value::Null),
                        Cell::Int(i) => Value::from(*i),
                        Cell::Text(s) if s.is_empty() => Value::Null,
                        Cell::Text(s) => Value::from(s.clone()),
                    };
                    obj.insert(h.clone(), v);
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "schema_version": verify::SCHEMA_VERSION, "command": command, "meta": extra, "rows": rows });
        serde_json::to_string_pretty(&doc).expect("json serializes") + "\n"
    }

    fn write(&self, out: &OutArgs, command: &str, extra: Value) -> Result<(), CliError> {
        let text = match out.format {
            Format::Csv => self.to_csv()?,
            Format::Json => self.to_json(command, extra),
        };
        emit(out.out.as_deref(), &text)
    }
}

fn scalar(model: &DeformedModel, q: Quantity, beta: f64, trunc: &Truncation) -> crate::Result<f64> {
    trunc.auto_raise(|t| match q {
        Quantity::Partition => Ok(partition(model, beta, t)?.z()),
        Quantity::Theta => theta_of_beta(model, beta),
        Quantity::InternalEnergy => internal_energy(model, beta, t),
        Quantity::FreeEnergy => free_energy(model, beta, t),
        Quantity::NT => bose_einstein(model, beta),
        Quantity::VacuumExpect => vacuum_expect_num(model, beta, t),
        Quantity::ThermalExpect => Ok(thermal_expect_ap_am(model, beta, t)?.value),
        Quantity::ThermalVacuum => Err(Error::Precondition("thermal-vacuum is a vector quantity".into())),
    })
}

fn cmd_eval(a: &EvalArgs) -> Result<i32, CliError> {
    let model = load_model(&a.model)?;
    let trunc = a.trunc.truncation()?;
    let betas = a.beta.grid()?;
    let table = if a.quantity == Quantity::ThermalVacuum {
        let vacua: Vec<_> = betas
            .par_iter()
            .map(|&b| trunc.auto_raise(|t| thermal_vacuum(&model, b, t)))
            .collect::<crate::Result<_>>()?;
        let mut rows = Vec::new();
        for (b, tv) in betas.iter().zip(&vacua) {
            let last = tv.coeffs.iter().rposition(|&c| c > 0.0).unwrap_or(0);
            for (n, &c) in tv.coeffs[..=last].iter().enumerate() {
                rows.push(vec![Cell::Num(Some(*b)), Cell::Int(n), Cell::Num(Some(c))]);
            }
        }
        Table { header: vec!["beta".into(), "n".into(), "c_n".into()], rows }
    } else {
        let values: Vec<f64> = betas
            .par_iter()
            .map(|&b| scalar(&model, a.quantity, b, &trunc))
            .collect::<crate::Result<_>>()?;
        let rows = betas.iter().zip(values).map(|(b, v)| vec![Cell::Num(Some(*b)), Cell::Num(Some(v))]).collect();
        Table { header: vec!["beta".into(), a.quantity.column().into()], rows }
    };
    table.write(&a.out, "eval", json!({ "quantity": a.quantity.column() }))?;
    Ok(EXIT_OK)
}

fn cmd_scan(a: &ScanArgs) -> Result<i32, CliError> {
    let model = load_model(&a.model)?;
    let trunc = a.trunc.truncation()?;
    let betas = a.beta.grid()?;
    if a.quantity.contains(&Quantity::ThermalVacuum) {
        return Err(CliError::Config("scan takes scalar quantities; use eval for thermal-vacuum".into()));
    }
    let rows: Vec<Vec<Cell>> = betas
        .par_iter()
        .map(|&b| {
            let mut row = vec![Cell::Num(Some(b))];
            let mut err = String::new();
            for &q in &a.quantity {
                match scalar(&model, q, b, &trunc) {
                    Ok(v) => row.push(Cell::Num(Some(v))),
                    Err(e) => {
                        row.push(Cell::Num(None));
                        if err.is_empty() {
                            err = e.name().to_string();
                        }
                    }
                }
            }
            row.push(Cell::Text(err));
            row
        })
        .collect();
    let mut header = vec!["beta".to_string()];
    header.extend(a.quantity.iter().map(|q| q.column().to_string()));
    header.push("error".into());
    Table { header, rows }.write(&a.out, "scan", json!({}))?;
    Ok(EXIT_OK)
}

fn cmd_cs(a: &CsArgs) -> Result<i32, CliError> {
    let model = load_model(&a.model)?;
    let trunc = a.trunc.truncation()?;
    let z = C64::new(a.z_re, a.z_im);
    let state = trunc.auto_raise(|t| cs_build(&model, a.kind.into(), z, a.beta, t))?;
    let last = state.coeffs.iter().rposition(|c| c.norm_sqr() > 0.0).unwrap_or(0);
    let rows = state.coeffs[..=last]
        .iter()
        .enumerate()
        .map(|(n, c)| vec![Cell::Int(n), Cell::Num(Some(c.re)), Cell::Num(Some(c.im)), Cell::Num(Some(c.norm_sqr()))])
        .collect();
    let table = Table { header: vec!["n".into(), "re".into(), "im".into(), "abs2".into()], rows };
    let meta = json!({
        "kind": CsKind::from(a.kind).name(),
        "z_re": a.z_re,
        "z_im": a.z_im,
        "beta": a.beta,
        "norm_log": state.norm_log,
        "tail_weight": state.tail_weight,
    });
    if a.out.format == Format::Csv {
        eprintln!("norm_log = {}, tail_weight = {}", fmt_f64(state.norm_log), fmt_f64(state.tail_weight));
    }
    table.write(&a.out, "cs", meta)?;
    Ok(EXIT_OK)
}

fn cmd_qubit(a: &QubitArgs) -> Result<i32, CliError> {
    let betas = a.beta.grid()?;
    let mut rows = Vec::new();
    for &b in &betas {
        let (c0, c1) = thermal_qubit(a.e0, a.e1, b).map_err(|e| match e {
            Error::DegenerateLevels { .. } => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        })?;
        rows.push([b, c0, c1, c0 * c0, c1 * c1].iter().map(|&v| Cell::Num(Some(v))).collect());
    }
    let header = ["beta", "c0", "c1", "c0_sq", "c1_sq"].iter().map(|s| s.to_string()).collect();
    Table { header, rows }.write(&a.out, "qubit", json!({ "e0": a.e0, "e1": a.e1 }))?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32, CliError> {
    let suites = Suite::parse_list(&a.suite).map_err(CliError::Config)?;
    let mut cfg = VerifyConfig::reference(suites);
    cfg.trunc = a.trunc.truncation()?;
    cfg.timings = a.timings;
    if let Some(t) = a.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("tolerance {t} must be positive")));
        }
        cfg.tol_override = Some(t);
    }
    if let Some(path) = &a.model {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
        cfg.models = vec![NamedModel { name, model: load_model(path)? }];
    }
    cfg.betas = match &a.beta {
        Some(s) => BetaSpec::parse(s).map_err(CliError::Config)?.grid(a.geometric),
        None => reference_betas(),
    };
    let report = run_verify(&cfg);
    emit(a.out.as_deref(), &report.to_json())?;
    let s = &report.summary;
    eprintln!(
        "verify: {} checks, {} passed, {} failed, {} skipped, {} errors, {} diagnostics",
        s.total, s.passed, s.failed, s.skipped, s.errors, s.info
    );
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!(
            "  {:?} {}/{} [{}] beta={:?}: {}",
            c.status,
            c.suite.name(),
            c.name,
            c.model,
            c.beta,
            c.reason.clone().unwrap_or_else(|| format!("deviation {:?} > tolerance {:e}", c.deviation, c.tolerance))
        );
    }
    Ok(report.exit_code())
}
