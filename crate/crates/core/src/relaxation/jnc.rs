//! Support functions of outer approximations of the joint numerical cone
//! slice `{(ω(F_0), …, ω(F_N)) : ω positive, ω(1) = 1}`.
//!
//! Problem constraints are not imposed here; only the algebra, its
//! declared positives and normalization shape the set.

use num_complex::Complex64;
use serde::Serialize;

use super::build::{assemble, problem_basis, Relaxation, Spec};
use super::RelaxationError;
use crate::algebra::Polynomial;
use crate::exec::{try_map_indices, Execution};
use crate::ipm::{SolverOptions, Status};
use crate::parser::{ObjectiveSense, ProblemFile};

fn base_relaxation(problem: &ProblemFile, level: usize, exec: Execution) -> Result<Relaxation, RelaxationError> {
    assemble(
        Spec {
            pres: &problem.presentation,
            basis: problem_basis(problem, level)?,
            objective: Polynomial::zero(),
            sense: ObjectiveSense::Minimize,
            constraints: &[],
            positives: &problem.positives,
            normalization: true,
            require_objective: false,
        },
        exec,
    )
}

fn combination(polys: &[Polynomial], lambda: &[f64]) -> Polynomial {
    let mut f = Polynomial::zero();
    for (p, &l) in polys.iter().zip(lambda) {
        f = &f + &p.scale(Complex64::new(l, 0.0));
    }
    f
}

fn support_of(relax: &Relaxation, f: &Polynomial, opts: &SolverOptions) -> Result<f64, RelaxationError> {
    let mut r = relax.clone();
    r.set_objective(f, ObjectiveSense::Minimize)?;
    let res = r.solve(opts)?;
    match res.status {
        Status::Optimal => Ok(res.bound.expect("optimal results carry a bound")),
        Status::Unbounded => Ok(f64::NEG_INFINITY),
        Status::Infeasible => Ok(f64::INFINITY),
        s => Err(RelaxationError::Solver(s)),
    }
}

/// `min Σ λ_μ ω(F_μ)` over the level-`d` relaxed state set.
pub fn jnc_support(
    problem: &ProblemFile,
    level: usize,
    polys: &[Polynomial],
    lambda: &[f64],
    opts: &SolverOptions,
) -> Result<f64, RelaxationError> {
    let relax = base_relaxation(problem, level, Execution::default())?;
    support_of(&relax, &combination(polys, lambda), opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportLine {
    /// Direction `(cos θ, sin θ)`.
    pub angle: f64,
    /// `min cos θ·x + sin θ·y` over the relaxed set.
    pub support: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JncPolygon {
    pub lines: Vec<SupportLine>,
    /// Intersections of consecutive support lines (needs at least three
    /// directions; parallel or infinite lines are skipped).
    pub vertices: Vec<[f64; 2]>,
}

/// Support values in `k` equally spaced directions starting at angle 0,
/// and the outer polygon they cut out.
pub fn jnc_polygon(
    problem: &ProblemFile,
    level: usize,
    pair: [&Polynomial; 2],
    k: usize,
    opts: &SolverOptions,
    exec: Execution,
) -> Result<JncPolygon, RelaxationError> {
    let relax = base_relaxation(problem, level, exec)?;
    let polys = [pair[0].clone(), pair[1].clone()];
    let lines = try_map_indices(k, exec, |i| {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
        let f = combination(&polys, &[angle.cos(), angle.sin()]);
        Ok::<_, RelaxationError>(SupportLine {
            angle,
            support: support_of(&relax, &f, opts)?,
        })
    })?;
    let mut vertices = Vec::new();
    if k >= 3 {
        for i in 0..k {
            let a = lines[i];
            let b = lines[(i + 1) % k];
            if !(a.support.is_finite() && b.support.is_finite()) {
                continue;
            }
            let det = (b.angle - a.angle).sin();
            if det.abs() < 1e-12 {
                continue;
            }
            let (ca, sa) = (a.angle.cos(), a.angle.sin());
            let (cb, sb) = (b.angle.cos(), b.angle.sin());
            let x = (a.support * sb - b.support * sa) / det;
            let y = (ca * b.support - cb * a.support) / det;
            vertices.push([x, y]);
        }
    }
    Ok(JncPolygon { lines, vertices })
}
