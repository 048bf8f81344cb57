use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cstar::algebra::Polynomial;
use cstar::exec::{try_map_indices, Execution};
use cstar::ipm::{solve, SolverOptions, Status};
use cstar::oracles::{parse_realization, OracleError};
use cstar::parser::{parse_problem, ObjectiveSense, ProblemFile};
use cstar::relaxation::{build_relaxation_with, jnc_polygon, LevelReport, Relaxation, RelaxationError};
use cstar::sdp::{export_sdpa_with_comments, import_sdpa, SdpError, SdpModel};
use cstar::symmetry::{parse_rep, reduce_sdp_with, SymmetryError};

#[derive(Parser)]
#[command(name = "cstar", version, about = "Moment relaxations of SDPs over *-algebras")]
struct Cli {
    /// Run levels and loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and solve relaxations of a problem file.
    Solve(SolveArgs),
    /// Sample support lines of the joint numerical range of two polynomials.
    Jnc(JncArgs),
    /// Reduce an SDPA model with a group representation.
    Reduce(ReduceArgs),
    /// Check a concrete realization against a relaxation.
    Check(CheckArgs),
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Level to solve; repeat it or give a range such as `1..3`.
    #[arg(short, long = "level", value_name = "N")]
    levels: Vec<String>,
    /// Gap and feasibility tolerance.
    #[arg(long, value_name = "T")]
    tol: Option<f64>,
    /// Write each level's standard-form SDP in SDPA format. With several
    /// levels the level number is added to the file name.
    #[arg(long, value_name = "PATH")]
    export: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct JncArgs {
    file: PathBuf,
    /// Two polynomials: `F0` is the objective, `F1`.. the constraints in
    /// file order, `1` the unit.
    #[arg(long, value_name = "P,Q")]
    pair: String,
    #[arg(long, value_name = "K", default_value_t = 8)]
    directions: usize,
    #[arg(short, long, value_name = "N")]
    level: Option<usize>,
    #[arg(long, value_name = "T")]
    tol: Option<f64>,
    /// Write the CSV here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    sdpa: PathBuf,
    rep: PathBuf,
    /// Write the reduced model in SDPA format.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Solve the full and the reduced model and compare optima.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_name = "T")]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    realization: PathBuf,
    #[arg(short, long, value_name = "N")]
    level: Option<usize>,
    #[arg(long)]
    json: bool,
}

/// A failed command: message for standard error and the exit code.
struct Failure {
    code: u8,
    message: String,
}

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_REPRESENTABLE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_INVARIANCE: u8 = 4;
const EXIT_INFEASIBLE_REALIZATION: u8 = 5;

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(EXIT_INPUT, message)
    }
}

impl From<RelaxationError> for Failure {
    fn from(e: RelaxationError) -> Self {
        let code = match e {
            RelaxationError::NotRepresentable { .. } | RelaxationError::BasisTooLarge { .. } => {
                EXIT_NOT_REPRESENTABLE
            }
            RelaxationError::Solver(_) | RelaxationError::Sdp(_) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        Self::new(code, e.to_string())
    }
}

impl From<SdpError> for Failure {
    fn from(e: SdpError) -> Self {
        let code = match e {
            SdpError::InvalidOptions(_) => EXIT_INPUT,
            _ => EXIT_SOLVER,
        };
        Self::new(code, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<ProblemFile, Failure> {
    parse_problem(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn options(tol: Option<f64>) -> SolverOptions {
    tol.map_or_else(SolverOptions::default, SolverOptions::with_tolerance)
}

/// `N`, `A..B` (exclusive), `A..=B` or `A-B` (inclusive).
fn parse_levels(specs: &[String]) -> Result<Vec<usize>, Failure> {
    let num = |s: &str| -> Result<usize, Failure> {
        s.trim()
            .parse()
            .map_err(|_| Failure::input(format!("cannot read level `{s}`")))
    };
    let mut out = Vec::new();
    for spec in specs {
        let (lo, hi) = if let Some((a, b)) = spec.split_once("..=") {
            (num(a)?, num(b)?)
        } else if let Some((a, b)) = spec.split_once("..") {
            let hi = num(b)?;
            if hi == 0 {
                return Err(Failure::input(format!("empty level range `{spec}`")));
            }
            (num(a)?, hi - 1)
        } else if let Some((a, b)) = spec.split_once('-') {
            (num(a)?, num(b)?)
        } else {
            let n = num(spec)?;
            (n, n)
        };
        if lo > hi {
            return Err(Failure::input(format!("empty level range `{spec}`")));
        }
        out.extend(lo..=hi);
    }
    Ok(out)
}

fn export_path(base: &Path, level: usize, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.level{level}.{}", ext.to_string_lossy()),
        None => format!("{stem}.level{level}"),
    };
    base.with_file_name(name)
}

fn export_comments(file: &Path, relax: &Relaxation) -> Vec<String> {
    let sense = match relax.sense {
        ObjectiveSense::Minimize => "minimize",
        ObjectiveSense::Maximize => "maximize",
    };
    let sign = match relax.sense {
        ObjectiveSense::Minimize => "",
        ObjectiveSense::Maximize => "-",
    };
    vec![
        format!("relaxation of {} at level {}", file.display(), relax.level()),
        format!(
            "problem: {sense}; basis {} words, {} moment variables",
            relax.basis().len(),
            relax.moments.variables.len()
        ),
        format!(
            "bound = {sign}({:?} - p*), where p* = min <C, X> and C = -F0 below",
            relax.reduction.offset
        ),
    ]
}

#[derive(Serialize)]
struct SolveReport<'a> {
    file: String,
    sense: &'a str,
    levels: Vec<LevelReport>,
}

fn cmd_solve(args: &SolveArgs, exec: Execution) -> CmdResult {
    let problem = load_problem(&args.file)?;
    let levels = if args.levels.is_empty() {
        vec![problem.level]
    } else {
        parse_levels(&args.levels)?
    };
    let opts = options(args.tol);
    let several = levels.len() > 1;
    let reports = try_map_indices(levels.len(), exec, |i| -> Result<LevelReport, Failure> {
        let start = Instant::now();
        let relax = build_relaxation_with(&problem, levels[i], exec)?;
        if let Some(base) = &args.export {
            let text = export_sdpa_with_comments(relax.model(), &export_comments(&args.file, &relax));
            write(&export_path(base, levels[i], several), &text)?;
        }
        let res = relax.solve(&opts)?;
        Ok(LevelReport {
            level: relax.level(),
            basis_size: relax.basis().len(),
            moment_variables: relax.moments.variables.len(),
            bound: res.bound,
            gap: res.gap,
            status: res.status,
            iterations: res.iterations,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    })?;
    let sense = match problem.objective.sense {
        ObjectiveSense::Minimize => "minimize",
        ObjectiveSense::Maximize => "maximize",
    };
    if args.json {
        let report = SolveReport {
            file: args.file.display().to_string(),
            sense,
            levels: reports.clone(),
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!(
            "{:>5}  {:>6}  {:>8}  {:>16}  {:>9}  {:>10}  {:>5}  {:>9}",
            "level", "basis", "moments", "bound", "gap", "status", "iter", "time_s"
        );
        for r in &reports {
            let bound = r.bound.map_or_else(|| "-".to_string(), |b| format!("{b:.10}"));
            println!(
                "{:>5}  {:>6}  {:>8}  {:>16}  {:>9.2e}  {:>10}  {:>5}  {:>9.4}",
                r.level,
                r.basis_size,
                r.moment_variables,
                bound,
                r.gap,
                r.status.to_string(),
                r.iterations,
                r.wall_time_s
            );
        }
    }
    if let Some(r) = reports
        .iter()
        .find(|r| matches!(r.status, Status::MaxIter | Status::Numerical))
    {
        return Err(Failure::new(
            EXIT_SOLVER,
            format!("level {}: solver stopped with status {}", r.level, r.status),
        ));
    }
    Ok(())
}

fn named_polynomial(problem: &ProblemFile, name: &str) -> Result<Polynomial, Failure> {
    let name = name.trim();
    if name == "1" {
        return Ok(Polynomial::one());
    }
    let index = name
        .strip_prefix('F')
        .and_then(|k| k.parse::<usize>().ok())
        .ok_or_else(|| Failure::input(format!("unknown polynomial `{name}`; use F0, F1, .. or 1")))?;
    match index {
        0 => Ok(problem.objective.poly.clone()),
        k => problem
            .constraints
            .get(k - 1)
            .map(|c| c.poly.clone())
            .ok_or_else(|| {
                Failure::input(format!(
                    "unknown polynomial `{name}`: the file has {} constraints",
                    problem.constraints.len()
                ))
            }),
    }
}

fn csv_number(v: f64) -> String {
    format!("{v}")
}

fn cmd_jnc(args: &JncArgs, exec: Execution) -> CmdResult {
    let problem = load_problem(&args.file)?;
    let (a, b) = args
        .pair
        .split_once(',')
        .ok_or_else(|| Failure::input(format!("--pair needs two names separated by a comma, got `{}`", args.pair)))?;
    let p = named_polynomial(&problem, a)?;
    let q = named_polynomial(&problem, b)?;
    if args.directions == 0 {
        return Err(Failure::input("--directions must be positive"));
    }
    let level = args.level.unwrap_or(problem.level);
    let polygon = jnc_polygon(&problem, level, [&p, &q], args.directions, &options(args.tol), exec)?;
    let mut out = String::from("kind,index,angle,support,x,y\n");
    for (i, line) in polygon.lines.iter().enumerate() {
        let _ = writeln!(out, "line,{i},{},{},,", csv_number(line.angle), csv_number(line.support));
    }
    for (i, v) in polygon.vertices.iter().enumerate() {
        let _ = writeln!(out, "vertex,{i},,,{},{}", csv_number(v[0]), csv_number(v[1]));
    }
    match &args.out {
        Some(path) => write(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ReduceReport {
    dimension: usize,
    group_order: usize,
    m: usize,
    full: Option<f64>,
    reduced: Option<f64>,
    difference: Option<f64>,
}

fn symmetry_failure(e: SymmetryError) -> Failure {
    match e {
        SymmetryError::NotInvariant { .. } => Failure::new(EXIT_INVARIANCE, e.to_string()),
        SymmetryError::Sdp(e) => e.into(),
        e => Failure::input(e.to_string()),
    }
}

fn solve_optimal(model: &SdpModel, opts: &SolverOptions, what: &str) -> Result<f64, Failure> {
    let sol = solve(model, opts)?;
    if sol.status != Status::Optimal {
        return Err(Failure::new(EXIT_SOLVER, format!("{what}: solver stopped with status {}", sol.status)));
    }
    Ok(sol.primal_objective)
}

fn cmd_reduce(args: &ReduceArgs, exec: Execution) -> CmdResult {
    let model = import_sdpa(&read(&args.sdpa)?)
        .map_err(|e| Failure::input(format!("{}: {e}", args.sdpa.display())))?;
    let rep = parse_rep(&read(&args.rep)?).map_err(|e| Failure::input(format!("{}: {e}", args.rep.display())))?;
    let reduced = reduce_sdp_with(&model, &rep, exec).map_err(symmetry_failure)?;
    let m = reduced.basis.dim();
    if let Some(path) = &args.out {
        let comments = vec![
            format!("symmetry reduction of {} ({} invariant matrices)", args.sdpa.display(), m),
            format!(
                "original optimum = {:?} - p*, where p* = min <C, X> and C = -F0 below",
                reduced.reduction.offset
            ),
        ];
        write(path, &export_sdpa_with_comments(reduced.model(), &comments))?;
    }
    let mut report = ReduceReport {
        dimension: rep.dim(),
        group_order: rep.order(),
        m,
        full: None,
        reduced: None,
        difference: None,
    };
    if args.verify {
        let opts = options(args.tol);
        let full = solve_optimal(&model, &opts, "full model")?;
        let red = reduced.original_value(solve_optimal(reduced.model(), &opts, "reduced model")?);
        report.full = Some(full);
        report.reduced = Some(red);
        report.difference = Some((full - red).abs());
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!(
            "m = {m} (representation dimension d = {}, group order {}, d^2 = {})",
            report.dimension,
            report.group_order,
            report.dimension * report.dimension
        );
        if let (Some(f), Some(r), Some(d)) = (report.full, report.reduced, report.difference) {
            println!("full optimum    = {f:.10}");
            println!("reduced optimum = {r:.10}");
            println!("difference      = {d:.3e}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckReport {
    level: usize,
    relation_residual: f64,
    equality_residual: f64,
    min_eigenvalue: f64,
    objective: f64,
    feasible: bool,
}

/// Largest violation accepted as feasible.
const CHECK_TOL: f64 = 1e-7;

fn cmd_check(args: &CheckArgs, exec: Execution) -> CmdResult {
    let problem = load_problem(&args.file)?;
    let real = parse_realization(&read(&args.realization)?, &problem.presentation).map_err(|e| match e {
        OracleError::Parse { .. } => Failure::input(format!("{}: {e}", args.realization.display())),
        e => Failure::input(e.to_string()),
    })?;
    let level = args.level.unwrap_or(problem.level);
    let relax = build_relaxation_with(&problem, level, exec)?;
    let check = relax.check_moments(&real.moments(&relax.variables))?;
    let report = CheckReport {
        level: relax.level(),
        relation_residual: real.max_relation_residual(&problem.presentation),
        equality_residual: check.equality_residual,
        min_eigenvalue: check.min_eigenvalue,
        objective: check.objective,
        feasible: check.max_violation() <= CHECK_TOL,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("level              {}", report.level);
        println!("relation residual  {:.3e}", report.relation_residual);
        println!("equality residual  {:.3e}", report.equality_residual);
        println!("min eigenvalue     {:.3e}", report.min_eigenvalue);
        println!("objective          {:.10}", report.objective);
        println!("feasible           {}", report.feasible);
    }
    if report.feasible {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_INFEASIBLE_REALIZATION,
            format!("realized moments violate the relaxation by {:.3e}", check.max_violation()),
        ))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, exec),
        Command::Jnc(a) => cmd_jnc(a, exec),
        Command::Reduce(a) => cmd_reduce(a, exec),
        Command::Check(a) => cmd_check(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
