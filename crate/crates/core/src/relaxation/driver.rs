use std::time::Instant;

use serde::Serialize;

use super::build::build_relaxation_with;
use super::RelaxationError;
use crate::exec::{try_map_indices, Execution};
use crate::ipm::{SolverOptions, Status};
use crate::parser::ProblemFile;

/// One row of a hierarchy run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub basis_size: usize,
    /// Distinct normal-form words in the moment matrix.
    pub moment_variables: usize,
    pub bound: Option<f64>,
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    pub wall_time_s: f64,
}

pub fn solve_level(
    problem: &ProblemFile,
    level: usize,
    opts: &SolverOptions,
    exec: Execution,
) -> Result<LevelReport, RelaxationError> {
    let start = Instant::now();
    let relax = build_relaxation_with(problem, level, exec)?;
    let res = relax.solve(opts)?;
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
}

/// Solves every level; levels may run concurrently but reports come back
/// in the order given. The first failing level (in that order) wins.
pub fn solve_levels(
    problem: &ProblemFile,
    levels: &[usize],
    opts: &SolverOptions,
    exec: Execution,
) -> Result<Vec<LevelReport>, RelaxationError> {
    try_map_indices(levels.len(), exec, |i| solve_level(problem, levels[i], opts, exec))
}
