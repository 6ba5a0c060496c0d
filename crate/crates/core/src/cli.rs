//! Command-line surface of the `qadd` binary.
//!
//! Exit codes: 0 on success, 2 on validation or usage errors (including a
//! failed `check`), 1 on internal errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_rational::BigRational;

use crate::analysis::{asymptote, build_osd_model, builtin_osd_cases, model_feasibility, AsymptoteKind};
use crate::closed_form::closed_form_eval;
use crate::error::{Error, Result};
use crate::fit::{fit_evector, fit_exponents, linspace, ExponentSearch, FitProblem, Objective};
use crate::io::{emit_figure_data, format_sig, load_dataset, read_model, resolve_precision, ModelFile};
use crate::lattice::CopyLattice;
use crate::oracle::{oracle_eval_exact, scalability_consistency_check};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qadd", version, about = "q-additive scaling laws for resource quantifiers")]
struct Cli {
    /// Significant digits of printed numbers (default 6, or $QADD_PRECISION).
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the closed form at a (possibly off-lattice) copy number.
    Eval(EvalArgs),
    /// Evaluate the exact recurrence at a lattice copy number N = a^n.
    Oracle(OracleArgs),
    /// Classify and evaluate lim E(N)/N.
    Asymptote(ModelArg),
    /// Run the feasibility checks; exits 2 if any is violated.
    Check(ModelArg),
    /// Fit a model to a dataset.
    Fit(FitArgs),
    /// Build the built-in isotropic-state models and emit figure tables.
    Reproduce(ReproduceArgs),
    /// Check the regrouping identity for all K = a^k, N = a^n with k <= n <= max-n.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model file (JSON, schema v1).
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Number of copies N >= 1.
    #[arg(long)]
    n: f64,
    /// Print E(N)/N instead of E(N).
    #[arg(long)]
    per_copy: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Number of copies; must be a power of the model base.
    #[arg(long)]
    n: BigUint,
    #[arg(long)]
    per_copy: bool,
    /// Print the exact rational value.
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Dataset CSV with header `N,E_total`.
    #[arg(long)]
    data: PathBuf,
    /// Lattice base a; defaults to the dataset's superactivation copies.
    #[arg(long)]
    base: Option<u64>,
    /// Model order.
    #[arg(long)]
    q: usize,
    /// Fixed exponents, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "search")]
    exponents: Option<Vec<f64>>,
    /// Search the exponents over a grid `lo:hi:step` (default -1:2:0.05).
    #[arg(long, num_args = 0..=1, default_missing_value = "-1:2:0.05", allow_hyphen_values = true)]
    search: Option<String>,
    /// Pin e_m to a value, e.g. `--fix 1=0` (1-based index).
    #[arg(long, value_parser = parse_fix)]
    fix: Vec<(usize, f64)>,
    /// Least squares on totals instead of per-copy values.
    #[arg(long)]
    total: bool,
    /// Allow negative e-components.
    #[arg(long)]
    allow_negative: bool,
    /// Write the fitted model here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Local dimension (2, 3 or 4); all three when omitted.
    #[arg(long)]
    d: Option<u32>,
    /// Directory for `osd_d<d>.csv` tables; stdout when omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Dataset to place in the data column (requires --d).
    #[arg(long, requires = "d")]
    data: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    max_n: u64,
}

fn parse_fix(s: &str) -> std::result::Result<(usize, f64), String> {
    let (m, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected m=value, got `{s}`"))?;
    let m: usize = m.trim().parse().map_err(|e| format!("bad index `{m}`: {e}"))?;
    if m == 0 {
        return Err("e-component indices start at 1".into());
    }
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value `{v}`: {e}"))?;
    Ok((m - 1, v))
}

/// Runs the CLI with the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing to the given streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let precision = resolve_precision(cli.precision);
    match dispatch(cli.command, precision, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

fn dispatch(command: Command, precision: usize, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval(a) => {
            let model = read_model(&a.model)?;
            let total = closed_form_eval(&model, a.n)?;
            let value = if a.per_copy { total / a.n } else { total };
            writeln!(out, "{}", format_sig(value, precision))?;
        }
        Command::Oracle(a) => {
            let model = read_model(&a.model)?;
            let lattice = CopyLattice::locate(model.base(), &a.n)?.ok_or_else(|| {
                Error::Invalid(format!("N = {} is not a power of {}", a.n, model.base()))
            })?;
            let mut value = oracle_eval_exact(&model, u64::from(lattice.exponent()));
            if a.per_copy {
                value /= BigRational::from_integer(a.n.clone().into());
            }
            if a.exact {
                writeln!(out, "{value}")?;
            } else {
                writeln!(out, "{}", format_sig(crate::oracle::to_f64(&value), precision))?;
            }
        }
        Command::Asymptote(a) => {
            let report = asymptote(&read_model(&a.model)?)?;
            match (report.kind, report.value) {
                (AsymptoteKind::Finite, Some(v)) => writeln!(out, "{}", format_sig(v, precision))?,
                (kind, _) => writeln!(
                    out,
                    "{kind} (dominant exponent {}, multiplicity {})",
                    format_sig(report.dominant_exponent, precision),
                    report.multiplicity
                )?,
            }
        }
        Command::Check(a) => {
            let report = model_feasibility(&read_model(&a.model)?);
            write!(out, "{report}")?;
            if !report.all_satisfied() {
                return Ok(EXIT_VALIDATION);
            }
        }
        Command::Fit(a) => return fit(a, precision, out, err),
        Command::Reproduce(a) => reproduce(a, precision, out, err)?,
        Command::Verify(a) => {
            let model = read_model(&a.model)?;
            let mut failures = 0usize;
            let mut worst = 0.0f64;
            let mut checks = 0usize;
            for n in 0..=a.max_n {
                for k in 0..=n {
                    let r = scalability_consistency_check(&model, n, k)?;
                    checks += 1;
                    worst = worst.max(r.max_rel_residual);
                    if !r.passed {
                        failures += 1;
                        writeln!(err, "n={n} k={k}: residual {}", r.max_abs_residual)?;
                    }
                }
            }
            writeln!(out, "checks {checks}, failures {failures}, max relative residual {worst:e}")?;
            if failures > 0 {
                return Ok(EXIT_INTERNAL);
            }
        }
    }
    Ok(EXIT_OK)
}

fn fit(a: FitArgs, precision: usize, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let loaded = load_dataset(&a.data)?;
    for w in &loaded.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let dataset = loaded.dataset;
    let base = a
        .base
        .or(dataset.metadata.superactivation_copies)
        .ok_or_else(|| Error::Invalid("--base is required when the dataset has no superactivation copies".into()))?;
    let mut problem = FitProblem::new(&dataset, base, a.q)?;
    for &(m, v) in &a.fix {
        problem = problem.fix_e(m, v)?;
    }
    problem.objective = if a.total { Objective::Total } else { Objective::PerCopy };
    problem.nonnegative = !a.allow_negative;

    let result = match (a.exponents, a.search) {
        (Some(nu), _) => fit_evector(&problem.with_exponents(nu)?)?,
        (None, Some(grid)) => {
            let parts: Vec<f64> = grid
                .split(':')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Invalid(format!("bad grid `{grid}`: {e}")))?;
            let [lo, hi, step] = parts[..] else {
                return Err(Error::Invalid(format!("grid must be lo:hi:step, got `{grid}`")));
            };
            let search = ExponentSearch::with_candidates(vec![linspace(lo, hi, step)?; a.q], step);
            fit_exponents(&problem, &search)?
        }
        (None, None) => {
            return Err(Error::Invalid("give --exponents or --search".into()));
        }
    };

    let model = result.model()?;
    let json = ModelFile::from_model(&model, Some(format!("fitted to {}", a.data.display()))).to_json();
    match &a.out {
        Some(path) => fs::write(path, json)?,
        None => out.write_all(json.as_bytes())?,
    }
    writeln!(err, "rms per-copy residual {}", format_sig(result.rms_per_copy, precision))?;
    if let Some(report) = &result.feasibility {
        for c in report.violations() {
            writeln!(err, "warning: {} violated (margin {})", c.name, c.margin)?;
        }
    }
    Ok(EXIT_OK)
}

fn reproduce(a: ReproduceArgs, precision: usize, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cases: Vec<_> = builtin_osd_cases()
        .into_iter()
        .filter(|c| a.d.is_none_or(|d| d == c.dimension))
        .collect();
    if cases.is_empty() {
        return Err(Error::Invalid(format!(
            "no built-in case for d = {}",
            a.d.unwrap_or_default()
        )));
    }
    let dataset = match &a.data {
        Some(path) => {
            let loaded = load_dataset(path)?;
            for w in &loaded.warnings {
                writeln!(err, "warning: {w}")?;
            }
            Some(loaded.dataset)
        }
        None => None,
    };
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
    }
    for case in cases {
        let osd = build_osd_model(case.spec)?;
        for w in osd.warnings() {
            writeln!(err, "warning: d={}: {w}", case.dimension)?;
        }
        let table = emit_figure_data(&osd.model, dataset.as_ref(), 1..=case.max_copies, precision)?;
        let limit = asymptote(&osd.model)?
            .value
            .map(|v| format_sig(v, precision))
            .unwrap_or_else(|| "none".into());
        match &a.out_dir {
            Some(dir) => {
                let path = dir.join(format!("osd_d{}.csv", case.dimension));
                fs::write(&path, table)?;
                writeln!(out, "d={} F={} a={} asymptote {limit} -> {}", case.dimension, case.fidelity, case.spec.superactivation_copies, path.display())?;
            }
            None => {
                writeln!(out, "# d = {}", case.dimension)?;
                writeln!(out, "# asymptote = {limit}")?;
                out.write_all(table.as_bytes())?;
            }
        }
    }
    Ok(())
}
