//! Command-line front end. Exit codes: 0 success, 1 validation or
//! stabilization failure, 2 input error.

pub mod files;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};

use crate::engine::{expand_with_table, EngineError, ExpansionResult, ProblemSpec};
use crate::psi::{Fault, PsiTable};
use crate::validator::residual::{residual_compiled, symmetric_grid, EvalConfig};
use crate::validator::selftest::{i_power_oracle, OracleConfig};
use crate::validator::{selftest_suite, sweep_report, Check, ValidationReport};

pub use files::{ExpansionFile, FileError, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

pub const MAX_ORDER_ENV: &str = "CANARD_MAX_ORDER";
pub const DEFAULT_MAX_ORDER: u32 = 12;

#[derive(Debug, Parser)]
#[command(name = "canard", version, about = "Asymptotic expansions of canard solutions near a degenerate turning point")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Deliberately corrupted ψ tables, for negative controls.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fixture {
    CorruptC2,
    ParityInverted,
    RhoOffByOne,
}

impl From<Fixture> for Fault {
    fn from(f: Fixture) -> Fault {
        match f {
            Fixture::CorruptC2 => Fault::CorruptC2,
            Fixture::ParityInverted => Fault::ParityInverted,
            Fixture::RhoOffByOne => Fault::RhoOffByOne,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the order-K expansion and write it as JSON.
    Expand {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        out: String,
    },
    /// Evaluate a truncated expansion on a t-grid and write CSV.
    Eval {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: String,
        /// Evaluate a stored expansion instead of recomputing it.
        #[arg(long)]
        expansion: Option<String>,
    },
    /// Residual sweep over η plus oracle checks; exit 1 if any check fails.
    Validate {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        order: u32,
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.3,0.2,0.15,0.1")]
        etas: Vec<f64>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, hide = true)]
        fixture: Option<Fixture>,
    },
    /// Tabulate ψ_k and ψ_k' as CSV.
    Psi {
        #[arg(long)]
        p: u32,
        #[arg(long = "L")]
        l: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_negative_numbers = true)]
        tmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        tmax: f64,
        #[arg(long)]
        step: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the oracle self-test for (p, L) in {(3,0), (3,2), (5,2)}.
    Selftest {
        #[arg(long, hide = true)]
        fixture: Option<Fixture>,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(msg: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: msg.to_string(),
        }
    }

    fn validation(msg: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: msg.to_string(),
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError::input(e)
    }
}

fn engine_error(e: EngineError) -> CliError {
    match e {
        EngineError::Spec(_) | EngineError::Table(_) => CliError::input(e),
        other => CliError::validation(other),
    }
}

/// K cap from `CANARD_MAX_ORDER`.
pub fn max_order() -> Result<u32, CliError> {
    match std::env::var(MAX_ORDER_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("{MAX_ORDER_ENV}={v:?} is not a nonnegative integer"))),
        Err(_) => Ok(DEFAULT_MAX_ORDER),
    }
}

fn check_order(order: u32) -> Result<(), CliError> {
    let cap = max_order()?;
    if order > cap {
        return Err(CliError::input(format!("order {order} exceeds the cap {cap} ({MAX_ORDER_ENV})")));
    }
    Ok(())
}

fn load_problem(path: &str) -> Result<(ProblemFile, ProblemSpec), CliError> {
    let file = ProblemFile::read(path)?;
    let spec = file.to_spec()?;
    Ok((file, spec))
}

fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::input(format!("cannot write {path}: {e}")))
}

fn build_table(spec: &ProblemSpec, order: u32, fixture: Option<Fixture>) -> Result<PsiTable, CliError> {
    let t = match fixture {
        Some(f) => spec.table_with_fault(order, f.into()),
        None => spec.table(order),
    };
    t.map_err(CliError::input)
}

fn cmd_expand(problem: &str, order: u32, out: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    check_order(order)?;
    let (file, spec) = load_problem(problem)?;
    let table = build_table(&spec, order, None)?;
    let res = expand_with_table(&table, &spec, order).map_err(engine_error)?;
    let ef = ExpansionFile::from_result(&file, &res);
    write_file(out, &ef.to_json())?;
    for r in &ef.orders {
        let _ = writeln!(
            stdout,
            "order {:>2}: alpha {} slow {} fast {}",
            r.n,
            usize::from(r.a_n.is_some()),
            r.slow.len(),
            r.fast.len()
        );
    }
    let _ = writeln!(stdout, "wrote {} nonzero orders (K = {order}) to {out}", ef.orders.len());
    Ok(())
}

/// CSV `t,T,alpha,u,residual` on an N-point grid of [−t1, t1].
pub fn eval_csv(
    table: &PsiTable,
    spec: &ProblemSpec,
    res: &ExpansionResult,
    eta: f64,
    grid_n: usize,
) -> Result<String, CliError> {
    let compiled = res.state.compile();
    let mut csv = String::from("t,T,alpha,u,residual\n");
    for t in symmetric_grid(spec.t1(), grid_n) {
        let (alpha, u, r) = residual_compiled(table, spec, &compiled, t, eta).map_err(CliError::validation)?;
        csv.push_str(&format!("{t:.16e},{:.16e},{alpha:.16e},{u:.16e},{r:.16e}\n", t / eta));
    }
    Ok(csv)
}

fn cmd_eval(
    problem: &str,
    order: u32,
    eta: f64,
    grid: usize,
    out: &str,
    expansion: Option<&str>,
) -> Result<(), CliError> {
    check_order(order)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(CliError::input(format!("--eta must be positive, got {eta}")));
    }
    if grid == 0 || grid.is_multiple_of(2) {
        return Err(CliError::input(format!("--grid must be odd, got {grid}")));
    }
    let (file, spec) = load_problem(problem)?;
    let table = build_table(&spec, order, None)?;
    let res = match expansion {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {path}: {e}")))?;
            let ef = ExpansionFile::parse(&text)?;
            if ef.problem_hash != file.hash() {
                return Err(CliError::input(format!("{path} was computed for a different problem")));
            }
            if ef.order != order {
                return Err(CliError::input(format!("{path} has order {}, not {order}", ef.order)));
            }
            ef.to_result(&table)?
        }
        None => expand_with_table(&table, &spec, order).map_err(engine_error)?,
    };
    write_file(out, &eval_csv(&table, &spec, &res, eta, grid)?)
}

/// Residual sweep of the order-K expansion plus the I_η power oracle on the
/// table in use.
pub fn validate_report(
    spec: &ProblemSpec,
    order: u32,
    cfg: &EvalConfig,
    fixture: Option<Fixture>,
) -> Result<ValidationReport, CliError> {
    cfg.validate(4).map_err(CliError::input)?;
    let table = build_table(spec, order, fixture)?;
    let mut report = match expand_with_table(&table, spec, order) {
        Ok(res) => sweep_report(&table, spec, &res, cfg),
        Err(e) => {
            let mut r = ValidationReport::new(format!("order sweep, K = {order}"));
            r.push(Check::failed("expansion", e.to_string()));
            r
        }
    };
    report.title = format!("validate p={} L={} K={order}", spec.p(), spec.l());
    for c in i_power_oracle(&table, &OracleConfig::default()) {
        report.push(c);
    }
    Ok(report)
}

fn cmd_validate(
    problem: &str,
    order: u32,
    etas: Vec<f64>,
    grid: usize,
    fixture: Option<Fixture>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    check_order(order)?;
    let (_, spec) = load_problem(problem)?;
    let cfg = EvalConfig {
        eta_list: etas,
        grid_n: grid,
        ..EvalConfig::default()
    };
    let report = validate_report(&spec, order, &cfg, fixture)?;
    let _ = writeln!(stdout, "{report}");
    let _ = writeln!(stdout, "{}", report.summary_json());
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::validation(format!("failing checks: {}", names.join(", "))))
    }
}

/// CSV `T,psi,psi_deriv` over [tmin, tmax] with the given step.
pub fn psi_csv(p: u32, l: u32, k: u32, tmin: f64, tmax: f64, step: f64) -> Result<String, CliError> {
    let table = PsiTable::new(p, l, 0).map_err(CliError::input)?;
    if k > p {
        return Err(CliError::input(format!("k = {k} must lie in 0..={p}")));
    }
    if !(step > 0.0) || !(tmax >= tmin) || !tmin.is_finite() || !tmax.is_finite() {
        return Err(CliError::input("need tmin <= tmax and step > 0"));
    }
    let n = ((tmax - tmin) / step + 1e-9).floor() as usize;
    let mut csv = String::from("T,psi,psi_deriv\n");
    for j in 0..=n {
        let t = tmin + step * j as f64;
        let v = table.psi_eval(k, t).map_err(CliError::validation)?;
        let d = table.psi_deriv(k, t).map_err(CliError::validation)?;
        csv.push_str(&format!("{t:.16e},{v:.16e},{d:.16e}\n"));
    }
    Ok(csv)
}

/// Self-test over the three reference (p, L) pairs.
pub fn selftest_reports(fixture: Option<Fixture>) -> Vec<ValidationReport> {
    [(3, 0), (3, 2), (5, 2)]
        .iter()
        .map(|&(p, l)| selftest_suite(p, l, fixture.map(Fault::from)))
        .collect()
}

fn cmd_selftest(fixture: Option<Fixture>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let reports = selftest_reports(fixture);
    let mut failed = Vec::new();
    for r in &reports {
        let _ = writeln!(stdout, "{r}\n");
        failed.extend(r.failures().map(|c| c.name.clone()));
    }
    let summary = serde_json::json!({
        "passed": failed.is_empty(),
        "failed": failed,
    });
    let _ = writeln!(stdout, "{summary}");
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::validation(format!("failing checks: {}", failed.join(", "))))
    }
}

/// Executes an already-parsed command.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Expand { problem, order, out } => cmd_expand(&problem, order, &out, stdout),
        Command::Eval {
            problem,
            order,
            eta,
            grid,
            out,
            expansion,
        } => cmd_eval(&problem, order, eta, grid, &out, expansion.as_deref()),
        Command::Validate {
            problem,
            order,
            etas,
            grid,
            fixture,
        } => cmd_validate(&problem, order, etas, grid, fixture, stdout),
        Command::Psi {
            p,
            l,
            k,
            tmin,
            tmax,
            step,
            out,
        } => {
            let csv = psi_csv(p, l, k, tmin, tmax, step)?;
            match out {
                Some(path) => write_file(&path, &csv),
                None => {
                    let _ = stdout.write_all(csv.as_bytes());
                    Ok(())
                }
            }
        }
        Command::Selftest { fixture } => cmd_selftest(fixture, stdout),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
