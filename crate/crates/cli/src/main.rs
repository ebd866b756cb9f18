use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use jensen_lab_core::columns::{ColumnKind, OperatorColumn};
use jensen_lab_core::error::Error;
use jensen_lab_core::functions::{catalog_names, lookup, ScalarFunction};
use jensen_lab_core::interval::Interval;
use jensen_lab_core::json::{
    parse, parse_hermitian_list, AlgebraJson, ColumnJson, FieldJson, MatrixJson, RepJson,
};
use jensen_lab_core::probe::{probe, FunctionSpec, ProbeConfig};
use jensen_lab_core::spectral::{unitarity_residual, HermitianMatrix, Isometry};
use jensen_lab_core::states::{conditional_expectation, field_jensen_gap, State};
use jensen_lab_core::tolerance::ToleranceProfile;
use jensen_lab_core::verifiers::{
    isometry_defect, jensen_operator_defect, operator_convexity_defect, pinching_defect,
    replay_pinching_chain, trace_jensen_report, two_point_reduction, TraceMode,
};

#[derive(Parser)]
#[command(name = "jensen-lab", version, about = "Numerical checks of Jensen-type operator and trace inequalities")]
struct Cli {
    /// Tolerance overrides, e.g. `order=1e-8,eq=1e-9`.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized search for matrix convexity violations.
    Probe(ProbeArgs),
    /// Check one inequality on instance files.
    Verify(VerifyArgs),
    /// Unitary dilation of a unital (or contractive) column.
    Dilate {
        #[arg(long)]
        col: PathBuf,
    },
    /// Conditional expectation table of x onto the functions of y.
    Expect {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        x: PathBuf,
    },
    /// Trace inequality with the per-eigenvector measures.
    TraceWitness {
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long)]
        col: PathBuf,
        #[arg(long)]
        xs: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "unital")]
        mode: Mode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Unital,
    Contractive,
}

#[derive(Args)]
struct FunctionArgs {
    /// Catalog function name.
    #[arg(long = "fn", conflicts_with = "bs")]
    func: Option<String>,
    /// Bendat–Sherman representation file.
    #[arg(long)]
    bs: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    func: FunctionArgs,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-1.0, 1.0])]
    interval: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "2")]
    orders: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    grid: usize,
    #[arg(long, env = "JENSEN_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    refine_budget: usize,
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    #[arg(long, default_value_t = 3)]
    max_counterexamples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ineq {
    Eq3,
    Eq5,
    Eq6,
    Eq7,
    Eq8,
    Eq9,
    Pinch,
    Chain16,
    Twopoint,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    ineq: Ineq,
    #[command(flatten)]
    func: FunctionArgs,
    #[arg(long)]
    col: Option<PathBuf>,
    /// Operands `x_1, …, x_n`; zeros when omitted.
    #[arg(long)]
    xs: Option<PathBuf>,
    #[arg(long)]
    x: Option<PathBuf>,
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Projection for the compression `pxp + s(1−p)`.
    #[arg(long)]
    p: Option<PathBuf>,
    /// Isometry for `v* f(x) v` versus `f(v* x v)`.
    #[arg(long)]
    v: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long)]
    field: Option<PathBuf>,
    /// Density matrix of the functional.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    algebra: Option<PathBuf>,
}

/// What the command produced: a JSON document and whether it witnesses a
/// violation.
struct Outcome {
    report: serde_json::Value,
    violation: bool,
}

impl Outcome {
    fn new<T: Serialize>(report: &T, holds: bool) -> Result<Self, Error> {
        Ok(Self {
            report: serde_json::to_value(report).map_err(|e| Error::Malformed(e.to_string()))?,
            violation: !holds,
        })
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Error> {
    p.as_deref()
        .ok_or_else(|| Error::InvalidConfig(format!("--{flag} is required here")))
}

fn load_matrix(path: &Path, what: &str) -> Result<HermitianMatrix, Error> {
    parse::<MatrixJson>(&read(path)?, what)?.to_hermitian(what)
}

fn load_column(path: &Path) -> Result<OperatorColumn, Error> {
    parse::<ColumnJson>(&read(path)?, "col")?.to_column()
}

fn load_operands(path: &Option<PathBuf>, col: &OperatorColumn) -> Result<Vec<HermitianMatrix>, Error> {
    match path {
        Some(p) => parse_hermitian_list(&read(p)?, "xs"),
        None => Ok(vec![HermitianMatrix::zeros(col.block_dim()); col.len()]),
    }
}

fn load_function(args: &FunctionArgs) -> Result<ScalarFunction, Error> {
    match (&args.func, &args.bs) {
        (Some(name), _) => lookup(name).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "--fn: unknown function '{name}' (known: {})",
                catalog_names().join(", ")
            ))
        }),
        (None, Some(path)) => Ok(parse::<RepJson>(&read(path)?, "bs")?.to_rep()?.to_function("bs")),
        (None, None) => Err(Error::InvalidConfig("one of --fn or --bs is required".into())),
    }
}

fn function_spec(args: &FunctionArgs) -> Result<FunctionSpec, Error> {
    match (&args.func, &args.bs) {
        (Some(name), _) => Ok(FunctionSpec::Catalog(name.clone())),
        (None, Some(path)) => Ok(FunctionSpec::Rep(parse(&read(path)?, "bs")?)),
        (None, None) => Err(Error::InvalidConfig("one of --fn or --bs is required".into())),
    }
}

fn run_probe(args: &ProbeArgs, tol: ToleranceProfile) -> Result<Outcome, Error> {
    let interval = Interval::closed(args.interval[0], args.interval[1])?;
    let config = ProbeConfig {
        orders: args.orders.clone(),
        trials: args.trials,
        grid: args.grid,
        seed: args.seed,
        refine_budget: args.refine_budget,
        threshold: args.threshold,
        max_counterexamples: args.max_counterexamples,
        tol,
        ..ProbeConfig::new(function_spec(&args.func)?, interval)
    };
    let report = probe(&config)?;
    Outcome::new(&report, !report.found_counterexample())
}

fn run_verify(a: &VerifyArgs, tol: &ToleranceProfile) -> Result<Outcome, Error> {
    let lambda = || {
        a.lambda
            .ok_or_else(|| Error::InvalidConfig("--lambda is required here".into()))
    };
    match a.ineq {
        Ineq::Eq3 => {
            let f = load_function(&a.func)?;
            let x = load_matrix(required(&a.x, "x")?, "x")?;
            let y = load_matrix(required(&a.y, "y")?, "y")?;
            let r = operator_convexity_defect(&f, &x, &y, lambda()?, tol)?;
            Outcome::new(&r, r.holds)
        }
        Ineq::Eq5 | Ineq::Eq6 => {
            let f = load_function(&a.func)?;
            let col = load_column(required(&a.col, "col")?)?;
            let xs = load_operands(&a.xs, &col)?;
            if matches!(a.ineq, Ineq::Eq5) {
                let class = col.classify(tol);
                if class.kind != ColumnKind::Unital {
                    return Err(Error::NotUnital {
                        defect: class.unital_defect,
                    });
                }
            }
            let r = jensen_operator_defect(&f, &col, &xs, tol)?;
            Outcome::new(&r, r.holds)
        }
        Ineq::Eq7 | Ineq::Eq8 => {
            let f = load_function(&a.func)?;
            let col = load_column(required(&a.col, "col")?)?;
            let xs = load_operands(&a.xs, &col)?;
            let mode = if matches!(a.ineq, Ineq::Eq7) {
                TraceMode::Unital
            } else {
                TraceMode::Contractive
            };
            let r = trace_jensen_report(&f, &col, &xs, mode, tol)?;
            Outcome::new(&r, r.holds)
        }
        Ineq::Eq9 => {
            let f = load_function(&a.func)?;
            let field = parse::<FieldJson>(&read(required(&a.field, "field")?)?, "field")?
                .to_field(tol.order)?;
            let state = match (&a.state, &a.algebra) {
                (Some(p), _) => State::new(load_matrix(p, "state")?, tol)?,
                (None, Some(p)) => parse::<AlgebraJson>(&read(p)?, "algebra")?
                    .to_algebra()?
                    .state(),
                (None, None) => State::tracial(field.dim()),
            };
            let r = field_jensen_gap(&f, &field, &state, tol)?;
            Outcome::new(&r, r.holds)
        }
        Ineq::Pinch => {
            let f = load_function(&a.func)?;
            let x = load_matrix(required(&a.x, "x")?, "x")?;
            let r = match (&a.p, &a.v) {
                (_, Some(v)) => {
                    let v = Isometry::new(parse::<MatrixJson>(&read(v)?, "v")?.to_matrix("v")?)?;
                    isometry_defect(&f, &x, &v, tol)?
                }
                (Some(p), None) => {
                    let p = parse::<MatrixJson>(&read(p)?, "p")?.to_matrix("p")?;
                    let s = a.s.unwrap_or_else(|| x.min_eigenvalue());
                    pinching_defect(&f, &x, &p, s, tol)?
                }
                (None, None) => {
                    return Err(Error::InvalidConfig("one of --p or --v is required".into()))
                }
            };
            Outcome::new(&r, r.holds)
        }
        Ineq::Chain16 => {
            let f = load_function(&a.func)?;
            let col = load_column(required(&a.col, "col")?)?;
            let xs = load_operands(&a.xs, &col)?;
            let extra = a.s.map(|s| HermitianMatrix::scalar(col.block_dim(), s));
            let r = replay_pinching_chain(&f, &col, &xs, extra, tol)?;
            Outcome::new(&r, r.holds)
        }
        Ineq::Twopoint => {
            let f = load_function(&a.func)?;
            let x = load_matrix(required(&a.x, "x")?, "x")?;
            let y = load_matrix(required(&a.y, "y")?, "y")?;
            let s = a.s.unwrap_or_else(|| x.min_eigenvalue().min(y.min_eigenvalue()));
            let r = two_point_reduction(&f, &x, &y, lambda()?, s, tol)?;
            Outcome::new(&r, r.holds)
        }
    }
}

fn run_dilate(path: &Path, tol: &ToleranceProfile) -> Result<Outcome, Error> {
    let col = load_column(path)?;
    let class = col.classify(tol);
    let (unital, augmented) = match class.kind {
        ColumnKind::Unital => (col, false),
        _ => (col.augment_to_unital(tol)?, true),
    };
    let u = unital.canonical_dilation(tol)?;
    let residual = unitarity_residual(&u);
    let report = json!({
        "kind": class.kind,
        "augmented": augmented,
        "unitarityResidual": residual,
        "unitary": MatrixJson::from_matrix(&u),
    });
    Ok(Outcome {
        report,
        violation: false,
    })
}

fn run_expect(state: &Path, y: &Path, x: &Path, tol: &ToleranceProfile) -> Result<Outcome, Error> {
    let state = State::new(load_matrix(state, "state")?, tol)?;
    let y = load_matrix(y, "y")?;
    let x = load_matrix(x, "x")?;
    let table = conditional_expectation(&state, &y, &x, tol)?;
    Outcome::new(&table, true)
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let tol = match &cli.tol {
        Some(spec) => ToleranceProfile::default().with_overrides(spec)?,
        None => ToleranceProfile::default(),
    };
    match &cli.command {
        Command::Probe(args) => run_probe(args, tol),
        Command::Verify(args) => run_verify(args, &tol),
        Command::Dilate { col } => run_dilate(col, &tol),
        Command::Expect { state, y, x } => run_expect(state, y, x, &tol),
        Command::TraceWitness {
            func,
            col,
            xs,
            mode,
        } => {
            let f = load_function(func)?;
            let col = load_column(col)?;
            let xs = load_operands(xs, &col)?;
            let mode = match mode {
                Mode::Unital => TraceMode::Unital,
                Mode::Contractive => TraceMode::Contractive,
            };
            let r = trace_jensen_report(&f, &col, &xs, mode, &tol)?;
            Outcome::new(&r, r.holds)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text + "\n") {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
                _ => {}
            }
        }
    }
    if outcome.violation {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
