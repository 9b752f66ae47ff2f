//! Command-line front end: equation intake, analysis dispatch, catalog runs,
//! and JSON/CSV report serialization.
//!
//! Exit codes: 0 success (for `criteria`: at least one criterion fired),
//! 1 soundness violation or failing catalog facts, 2 all criteria
//! inconclusive, 64 parse/usage errors, 65 numerical failures.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use disconj::catalog;
use disconj::conjugacy;
use disconj::criteria;
use disconj::expr::CoeffExpr;
use disconj::factorization;
use disconj::green;
use disconj::periodic;
use disconj::{Equation, Interval, Params, Tolerances, SCHEMA_VERSION};

const EXIT_SOUNDNESS: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_PARSE: u8 = 64;
const EXIT_NUMERICAL: u8 = 65;

#[derive(Debug)]
enum CliError {
    Parse(String),
    Numerical(String),
    Soundness(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Soundness(_) => EXIT_SOUNDNESS,
            CliError::Io(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Parse(m) => format!("parse error: {m}"),
            CliError::Numerical(m) => format!("numerical failure: {m}"),
            CliError::Soundness(m) => format!("soundness violation: {m}"),
            CliError::Io(e) => format!("io error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<criteria::CriteriaError> for CliError {
    fn from(e: criteria::CriteriaError) -> Self {
        match e {
            criteria::CriteriaError::Soundness { details } => CliError::Soundness(details),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

macro_rules! numerical_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numerical(e.to_string())
            }
        }
    )*};
}
numerical_from!(
    conjugacy::ConjugacyError,
    disconj::ode::OdeError,
    green::GreenError,
    factorization::FactorizationError,
    periodic::PeriodicError,
    catalog::CatalogError
);

/// Disconjugacy analysis of x'' + p(t) x' + q(t) x = 0.
#[derive(Parser)]
#[command(name = "disconj", version, about)]
struct Cli {
    /// JSON request file; explicit flags override its values.
    #[arg(long, global = true)]
    request: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide disconjugacy on an interval by the shooting oracle.
    Oracle(OracleArgs),
    /// Sweep the conjugate-point maps over a range of base points.
    Rho(RhoArgs),
    /// Evaluate every applicable sufficient criterion plus the oracle.
    Criteria(CriteriaArgs),
    /// Construct the Dirichlet Green's function (and optionally solve a BVP).
    Green(GreenArgs),
    /// Build the positive-factor decomposition of the operator.
    Factorize(FactorizeArgs),
    /// Period map and existence of nontrivial periodic solutions.
    Periodic(PeriodicArgs),
    /// Half-line substitution t -> a + t^2 in both readings.
    Transform(TransformArgs),
    /// List or run the built-in catalog of worked equations.
    Catalog(CatalogArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Coefficient p(t).
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Coefficient q(t).
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Parameter binding name=value (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Relative integration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol_rel: f64,
    /// Absolute integration tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol_abs: f64,
    /// Output path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    /// Treat the left endpoint as open.
    #[arg(long)]
    open_lo: bool,
    /// Treat the right endpoint as open.
    #[arg(long)]
    open_hi: bool,
    /// Also run the initial-angle sweep with this many angles.
    #[arg(long)]
    angles: Option<usize>,
}

#[derive(Args)]
struct RhoArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Search window length for each conjugate point.
    #[arg(long, default_value_t = 100.0)]
    window: f64,
}

#[derive(Args)]
struct CriteriaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Analysis window: two numbers LO HI.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Test function for the semi-effective criterion.
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    /// Auxiliary constant coefficients for the first kernel criterion.
    #[arg(long, num_args = 2, value_names = ["P", "Q"], allow_negative_numbers = true)]
    xa1: Option<Vec<f64>>,
    /// Auxiliary constant coefficient for the second kernel criterion.
    #[arg(long, allow_negative_numbers = true)]
    xa2: Option<f64>,
    /// Comparison function r for condition 6 of the curve criterion.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
}

#[derive(Args)]
struct GreenArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Mesh size for the CSV export.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Right-hand side f: solve the Dirichlet problem Lx = f instead of
    /// exporting the kernel.
    #[arg(long, allow_hyphen_values = true)]
    bvp_f: Option<String>,
}

#[derive(Args)]
struct FactorizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    #[arg(long, default_value_t = 128)]
    grid: usize,
}

#[derive(Args)]
struct PeriodicArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    period: Option<f64>,
    /// Base point of the period map.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    base: f64,
    /// Truncation window standing in for the real line.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [-20.0, 20.0], allow_negative_numbers = true)]
    window: Vec<f64>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Left endpoint of the original half-line domain.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Comparison half-window (the original is compared on (a, a + W^2]).
    #[arg(long, default_value_t = 3.0)]
    half_window: f64,
}

#[derive(Args)]
struct CatalogArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Run all entries or a single one by id.
    #[arg(long, value_name = "all|ID")]
    run: Option<String>,
    /// List entry ids and descriptions.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

/// Values from the request file, used as defaults under explicit flags.
struct RequestFile {
    value: Value,
}

impl RequestFile {
    fn load(path: &Option<PathBuf>) -> Result<Self, CliError> {
        match path {
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let value: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::Parse(format!("request file: {e}")))?;
                Ok(RequestFile { value })
            }
            None => Ok(RequestFile { value: json!({}) }),
        }
    }

    fn str_field(&self, key: &str) -> Option<String> {
        self.value.get(key).and_then(|v| v.as_str()).map(Into::into)
    }

    fn f64_field(&self, key: &str) -> Option<f64> {
        self.value.get(key).and_then(|v| v.as_f64())
    }

    fn params(&self) -> Params {
        self.value
            .get("params")
            .and_then(|v| v.as_object())
            .map(|m| {
                m.iter()
                    .filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x)))
                    .collect()
            })
            .unwrap_or_default()
    }
}

fn parse_params(pairs: &[String]) -> Result<Params, CliError> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("expected NAME=VALUE, got `{pair}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Parse(format!("invalid parameter value in `{pair}`")))?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn build_equation(common: &CommonArgs, file: &RequestFile) -> Result<Equation, CliError> {
    let p_src = common
        .p
        .clone()
        .or_else(|| file.str_field("p"))
        .ok_or_else(|| CliError::Parse("missing coefficient --p".into()))?;
    let q_src = common
        .q
        .clone()
        .or_else(|| file.str_field("q"))
        .ok_or_else(|| CliError::Parse("missing coefficient --q".into()))?;
    let mut params = file.params();
    params.extend(parse_params(&common.params)?);
    let eq = Equation::parse(&p_src, &q_src)
        .map_err(|e| CliError::Parse(e.to_string()))?
        .with_params(params);
    Ok(eq)
}

fn tolerances(common: &CommonArgs) -> Tolerances {
    Tolerances::new(common.tol_rel, common.tol_abs)
}

fn emit(common: &CommonArgs, text: &str) -> Result<(), CliError> {
    match &common.output {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serializes");
    out.push('\n');
    out
}

fn require<T: Copy>(flag: Option<T>, file_val: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file_val)
        .ok_or_else(|| CliError::Parse(format!("missing --{name}")))
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    let file = RequestFile::load(&cli.request)?;
    match cli.command {
        Command::Oracle(args) => run_oracle(args, &file),
        Command::Rho(args) => run_rho(args, &file),
        Command::Criteria(args) => run_criteria(args, &file),
        Command::Green(args) => run_green(args, &file),
        Command::Factorize(args) => run_factorize(args, &file),
        Command::Periodic(args) => run_periodic(args, &file),
        Command::Transform(args) => run_transform(args, &file),
        Command::Catalog(args) => run_catalog(args, &file),
    }
}

fn run_oracle(args: OracleArgs, file: &RequestFile) -> Result<u8, CliError> {
    let eq = build_equation(&args.common, file)?;
    let lo = require(args.lo, file.f64_field("lo"), "lo")?;
    let hi = require(args.hi, file.f64_field("hi"), "hi")?;
    let iv = Interval::new(lo, hi, !args.open_lo, !args.open_hi)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let tol = tolerances(&args.common);
    let verdict = conjugacy::is_disconjugate(&eq, iv, tol)?;
    let brute = match args.angles {
        Some(n) => Some(conjugacy::crosscheck_bruteforce(&eq, iv, n, tol)?),
        None => None,
    };
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "interval": iv,
        "verdict": verdict,
        "crosscheck": brute,
    });
    emit(&args.common, &json_text(&report))?;
    Ok(0)
}

fn run_rho(args: RhoArgs, file: &RequestFile) -> Result<u8, CliError> {
    let eq = build_equation(&args.common, file)?;
    let from = require(args.from, file.f64_field("from"), "from")?;
    let to = require(args.to, file.f64_field("to"), "to")?;
    let step = require(args.step, file.f64_field("step"), "step")?;
    if step <= 0.0 || to < from {
        return Err(CliError::Parse("need from <= to and step > 0".into()));
    }
    let tol = tolerances(&args.common);
    let fmt = |v: f64| {
        if v == f64::INFINITY {
            "inf".to_string()
        } else if v == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            format!("{v}")
        }
    };
    let mut rows = Vec::new();
    let n = ((to - from) / step).round() as usize;
    for k in 0..=n {
        let a = from + step * k as f64;
        if a > to + 1e-12 * (1.0 + to.abs()) {
            break;
        }
        let plus = conjugacy::rho_plus(&eq, a, a + args.window, tol)?;
        let minus = conjugacy::rho_minus(&eq, a, a - args.window, tol)?;
        rows.push((a, plus, minus));
    }
    if args.common.format.as_deref() == Some("json") {
        let entries: Vec<Value> = rows
            .iter()
            .map(|(a, p, m)| {
                json!({
                    "a": a,
                    "rho_plus": p,
                    "rho_minus": m,
                })
            })
            .collect();
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "window": args.window,
            "rows": entries,
        });
        emit(&args.common, &json_text(&report))?;
    } else {
        let mut out = String::new();
        out.push_str(&format!(
            "# rho sweep window={} tol_rel={} tol_abs={}\n",
            args.window, tol.rel, tol.abs
        ));
        out.push_str("a,rho_plus,rho_minus\n");
        for (a, plus, minus) in rows {
            out.push_str(&format!("{},{},{}\n", a, fmt(plus.value), fmt(minus.value)));
        }
        emit(&args.common, &out)?;
    }
    Ok(0)
}

fn run_criteria(args: CriteriaArgs, file: &RequestFile) -> Result<u8, CliError> {
    let eq = build_equation(&args.common, file)?;
    let window = match &args.window {
        Some(w) => (w[0], w[1]),
        None => {
            let lo = file.f64_field("window_lo");
            let hi = file.f64_field("window_hi");
            match (lo, hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(CliError::Parse("missing --window LO HI".into())),
            }
        }
    };
    let iv = Interval::new(window.0, window.1, true, true)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let parse_expr = |src: &Option<String>, what: &str| -> Result<Option<CoeffExpr>, CliError> {
        src.as_ref()
            .map(|s| CoeffExpr::parse(s).map_err(|e| CliError::Parse(format!("{what}: {e}"))))
            .transpose()
    };
    let options = criteria::RunOptions {
        test_function: parse_expr(&args.v, "--v")?,
        xa1: args.xa1.as_ref().map(|v| (v[0], v[1])),
        xa2: args.xa2,
        curve_r: parse_expr(&args.r, "--r")?,
        tol: Some(tolerances(&args.common)),
    };
    let report = criteria::run_all(&eq, iv, &options)?;
    let any_fired = report.any_fired;
    let value = serde_json::to_value(&report).expect("report serializes");
    emit(&args.common, &json_text(&value))?;
    Ok(if any_fired { 0 } else { EXIT_INCONCLUSIVE })
}

fn run_green(args: GreenArgs, file: &RequestFile) -> Result<u8, CliError> {
    let eq = build_equation(&args.common, file)?;
    let a = require(args.a, file.f64_field("a"), "a")?;
    let b = require(args.b, file.f64_field("b"), "b")?;
    let tol = tolerances(&args.common);
    if let Some(f_src) = &args.bvp_f {
        let f = CoeffExpr::parse(f_src).map_err(|e| CliError::Parse(e.to_string()))?;
        let solution = green::solve_bvp(&eq, &f, a, b, tol)?;
        let mut out = Vec::new();
        solution.export_csv(&mut out)?;
        emit(&args.common, &String::from_utf8_lossy(&out))?;
        return Ok(0);
    }
    let g = green::green_function(&eq, a, b, tol)?;
    if args.common.format.as_deref() == Some("json") {
        let discrepancy = g.product_form_discrepancy(&eq, 8)?;
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "a": a,
            "b": b,
            "checks": g.checks,
            "product_form_discrepancy": discrepancy,
        });
        emit(&args.common, &json_text(&report))?;
    } else {
        let mut out = Vec::new();
        green::export_grid_csv(&g, args.grid, &mut out)?;
        emit(&args.common, &String::from_utf8_lossy(&out))?;
    }
    Ok(0)
}

fn run_factorize(args: FactorizeArgs, file: &RequestFile) -> Result<u8, CliError> {
    let eq = build_equation(&args.common, file)?;
    let lo = require(args.lo, file.f64_field("lo"), "lo")?;
    let hi = require(args.hi, file.f64_field("hi"), "hi")?;
    let tol = tolerances(&args.common);
    let fact = factorization::build_factorization(&eq, Interval::closed(lo, hi), tol)?;
    if args.common.format.as_deref() == Some("json") {
        let checks = fact.verify(512)?;
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "interval": fact.iv,
            "checks": checks,
        });
        emit(&args.common, &json_text(&report))?;
    } else {
        let mut out = Vec::new();
        fact.export_csv(args.grid, &mut out)?;
        emit(&args.common, &String::from_utf8_lossy(&out))?;
    }
    Ok(0)
}

fn run_periodic(args: PeriodicArgs, file: &RequestFile) -> Result<u8, CliError> {
    let eq = build_equation(&args.common, file)?;
    let period = require(args.period, file.f64_field("period"), "period")?;
    let tol = tolerances(&args.common);
    let window = Interval::new(args.window[0], args.window[1], true, true)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let verdict = periodic::check_theorem_periodic(&eq, period, window, tol)?;
    let base_map = periodic::monodromy(&eq, args.base, period, tol)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "verdict": verdict,
        "monodromy_at_base": base_map,
    });
    emit(&args.common, &json_text(&report))?;
    Ok(0)
}

fn run_transform(args: TransformArgs, file: &RequestFile) -> Result<u8, CliError> {
    let eq = build_equation(&args.common, file)?;
    let a = require(args.a, file.f64_field("a"), "a")?;
    let tol = tolerances(&args.common);
    let substitution = criteria::substitute_half_line(&eq, a);
    // the literal composed equation may be singular at 0 (inverse-power p);
    // the comparison is then reported as unavailable rather than failing
    // the whole command
    let (comparison, comparison_note) = match criteria::compare_substitution(&eq, a, args.half_window, tol) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "a": a,
        "literal_p": substitution.literal.p.to_string(),
        "literal_q": substitution.literal.q.to_string(),
        "genuine_p": substitution.genuine.p.to_string(),
        "genuine_q": substitution.genuine.q.to_string(),
        "comparison": comparison,
        "comparison_note": comparison_note,
    });
    emit(&args.common, &json_text(&report))?;
    Ok(0)
}

fn run_catalog(args: CatalogArgs, file: &RequestFile) -> Result<u8, CliError> {
    let mut params = file.params();
    params.extend(parse_params(&args.common.params)?);
    let entries = catalog::catalog_list(&params);
    if args.list || args.run.is_none() {
        let listing: Vec<Value> = entries
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "description": e.description,
                    "p": e.equation.p.to_string(),
                    "q": e.equation.q.to_string(),
                    "facts": e.known_facts.len(),
                })
            })
            .collect();
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "entries": listing,
        });
        emit(&args.common, &json_text(&report))?;
        return Ok(0);
    }
    let run = args.run.unwrap();
    let tol = tolerances(&args.common);
    let outcomes = if run == "all" {
        catalog::run_all(&params, tol)?
    } else {
        let entry = entries
            .iter()
            .find(|e| e.id == run)
            .ok_or_else(|| CliError::Parse(format!("no catalog entry named `{run}`")))?;
        catalog::run_entry(entry, tol)?
    };
    let all_pass = outcomes.iter().all(|o| o.pass);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "outcomes": outcomes,
        "all_pass": all_pass,
    });
    emit(&args.common, &json_text(&report))?;
    Ok(if all_pass { 0 } else { 1 })
}
