//! Independent ground truth for relaxations: concrete matrix
//! realizations of a presentation (whose moments must be feasible for
//! every level) and brute-force grid minimization for commutative
//! problems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{Polynomial, Presentation, Word};
use crate::exec::{map_indices, Execution};
use crate::relaxation::MomentStructure;

/// Tolerance for relations, Hermiticity and state normalization.
pub const REALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("relation `{relation}` fails with residual {residual:e}")]
    Relation { relation: String, residual: f64 },
    #[error("state is not normalized (norm {0})")]
    StateNorm(f64),
    #[error("grid minimization needs commuting selfadjoint generators without relations")]
    NotCommutative,
    #[error("invalid box: {0}")]
    BadBox(String),
    #[error("no grid point satisfies the positivity constraints")]
    EmptyGrid,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

type CMat = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Vector(DVector<Complex64>),
    Density(CMat),
}

/// Generators mapped to `k×k` matrices together with a state.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcreteRealization {
    assignment: Vec<CMat>,
    state: State,
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

impl ConcreteRealization {
    /// Checks every explicit relation, the selfadjoint declarations and the
    /// commuting pairs to [`REALIZATION_TOL`], and that the state has unit
    /// norm (unit trace for densities).
    pub fn new(pres: &Presentation, assignment: Vec<CMat>, state: State) -> Result<Self, OracleError> {
        if assignment.len() != pres.generators().len() {
            return Err(OracleError::DimensionMismatch(format!(
                "{} matrices for {} generators",
                assignment.len(),
                pres.generators().len()
            )));
        }
        let k = match &state {
            State::Vector(v) => v.len(),
            State::Density(r) => r.nrows(),
        };
        if let Some(g) = assignment.iter().position(|m| m.shape() != (k, k)) {
            return Err(OracleError::DimensionMismatch(format!(
                "generator {} is not {k}x{k}",
                pres.generators()[g].name
            )));
        }
        let norm = match &state {
            State::Vector(v) => v.norm(),
            State::Density(r) => r.trace().re,
        };
        if (norm - 1.0).abs() > REALIZATION_TOL {
            return Err(OracleError::StateNorm(norm));
        }
        let real = Self { assignment, state };
        let residual = real.relation_residual(pres);
        if let Some((relation, residual)) = residual {
            return Err(OracleError::Relation { relation, residual });
        }
        Ok(real)
    }

    /// Residual of every relation, selfadjoint declaration and commuting pair.
    fn relation_checks(&self, pres: &Presentation) -> Vec<(String, f64)> {
        let names = pres.names();
        let mut checks: Vec<(String, f64)> = Vec::new();
        for rule in pres.rules() {
            let lhs = self.eval_word(&rule.lhs);
            let rhs = self.eval(&rule.rhs);
            checks.push((
                format!("{} = {}", rule.lhs.display(&names), rule.rhs.display(&names)),
                max_abs(&(lhs - rhs)),
            ));
        }
        for (g, gen) in pres.generators().iter().enumerate() {
            if gen.selfadjoint {
                let m = &self.assignment[g];
                checks.push((format!("{0}* = {0}", gen.name), max_abs(&(m - m.adjoint()))));
            }
        }
        for &(a, b) in pres.commuting_pairs() {
            let (x, y) = (&self.assignment[a], &self.assignment[b]);
            checks.push((
                format!("[{}, {}] = 0", names[a], names[b]),
                max_abs(&(x * y - y * x)),
            ));
        }
        checks
    }

    fn relation_residual(&self, pres: &Presentation) -> Option<(String, f64)> {
        self.relation_checks(pres)
            .into_iter()
            .filter(|c| c.1 > REALIZATION_TOL)
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest residual over all relations.
    pub fn max_relation_residual(&self, pres: &Presentation) -> f64 {
        self.relation_checks(pres)
            .into_iter()
            .map(|c| c.1)
            .fold(0.0, f64::max)
    }

    pub fn dim(&self) -> usize {
        match &self.state {
            State::Vector(v) => v.len(),
            State::Density(r) => r.nrows(),
        }
    }

    pub fn eval_word(&self, w: &Word) -> CMat {
        let k = self.dim();
        let mut out = CMat::identity(k, k);
        for l in w.letters() {
            let m = &self.assignment[l.generator];
            out = if l.starred { out * m.adjoint() } else { out * m };
        }
        out
    }

    pub fn eval(&self, p: &Polynomial) -> CMat {
        let k = self.dim();
        let mut out = CMat::zeros(k, k);
        for (w, c) in p.terms() {
            out += self.eval_word(w) * *c;
        }
        out
    }

    /// `ω(M)` for an operator `M`.
    pub fn expectation(&self, m: &CMat) -> Complex64 {
        match &self.state {
            State::Vector(v) => (v.adjoint() * m * v)[(0, 0)],
            State::Density(r) => (r * m).trace(),
        }
    }

    pub fn moment(&self, w: &Word) -> Complex64 {
        self.expectation(&self.eval_word(w))
    }

    pub fn value(&self, p: &Polynomial) -> Complex64 {
        self.expectation(&self.eval(p))
    }

    /// Moments of arbitrary words, in the given order.
    pub fn moments(&self, words: &[Word]) -> Vec<Complex64> {
        words.iter().map(|w| self.moment(w)).collect()
    }
}

/// Moments of the structure's variables (indexed like `ms.variables`).
pub fn realize_moments(real: &ConcreteRealization, ms: &MomentStructure) -> Vec<Complex64> {
    real.moments(&ms.variables)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Two-qubit realization reaching `2√2` for
/// `A0 B0 + A1 B1 + A0 B1 - A1 B0` with generators ordered
/// `A0, A1, B0, B1`: `A0 = Z`, `A1 = X`, `B0 = (Z - X)/√2`,
/// `B1 = (Z + X)/√2` on the maximally entangled state `(|00⟩ + |11⟩)/√2`.
pub fn tsirelson_assignment() -> (Vec<CMat>, State) {
    let z = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let x = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let id = CMat::identity(2, 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let b0 = (&z - &x) * c(s);
    let b1 = (&z + &x) * c(s);
    let assignment = vec![kron(&z, &id), kron(&x, &id), kron(&id, &b0), kron(&id, &b1)];
    let mut phi = DVector::zeros(4);
    phi[0] = c(s);
    phi[3] = c(s);
    (assignment, State::Vector(phi))
}

/// Deterministic `±1` scalars for `A0, A1, B0, B1` on a one-dimensional
/// space.
pub fn classical_assignment(signs: [f64; 4]) -> (Vec<CMat>, State) {
    let assignment = signs.iter().map(|&s| CMat::from_element(1, 1, c(s))).collect();
    (assignment, State::Vector(DVector::from_element(1, c(1.0))))
}

/// Minimum of a real commutative polynomial over the grid points of a box
/// that satisfy `p >= 0` for every `p` in `positives`.
///
/// Coordinates run from each lower bound in steps of `resolution`; the
/// upper bound is always included. The result is an upper bound on the
/// true minimum over the feasible region.
pub fn grid_min(
    pres: &Presentation,
    f: &Polynomial,
    positives: &[Polynomial],
    bounds: &[(f64, f64)],
    resolution: f64,
    exec: Execution,
) -> Result<f64, OracleError> {
    let n = pres.generators().len();
    if !pres.rules().is_empty()
        || pres.generators().iter().any(|g| !g.selfadjoint)
        || !pres.is_commutative()
    {
        return Err(OracleError::NotCommutative);
    }
    if bounds.len() != n {
        return Err(OracleError::BadBox(format!("{} intervals for {n} variables", bounds.len())));
    }
    if !(resolution > 0.0) {
        return Err(OracleError::BadBox("resolution must be positive".into()));
    }
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &(lo, hi) in bounds {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(OracleError::BadBox(format!("[{lo}, {hi}]")));
        }
        let steps = ((hi - lo) / resolution).floor() as usize;
        let mut axis: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * resolution).collect();
        if axis.last().is_some_and(|&v| hi - v > 1e-12 * resolution) {
            axis.push(hi);
        }
        axes.push(axis);
    }
    let compile = |p: &Polynomial| -> Vec<(f64, Vec<u32>)> {
        p.terms()
            .map(|(w, c)| {
                let mut exps = vec![0u32; n];
                for l in w.letters() {
                    exps[l.generator] += 1;
                }
                (c.re, exps)
            })
            .collect()
    };
    let eval = |terms: &[(f64, Vec<u32>)], x: &[f64]| -> f64 {
        terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    };
    let target = compile(f);
    let cons: Vec<Vec<(f64, Vec<u32>)>> = positives.iter().map(compile).collect();
    if n == 0 {
        return Ok(eval(&target, &[]));
    }
    let first = axes[0].len();
    let rest: usize = axes[1..].iter().map(Vec::len).product();
    let per_first = map_indices(first, exec, |i| {
        let mut best = f64::INFINITY;
        let mut x = vec![0.0; n];
        x[0] = axes[0][i];
        for mut idx in 0..rest {
            for d in 1..n {
                let len = axes[d].len();
                x[d] = axes[d][idx % len];
                idx /= len;
            }
            if cons.iter().all(|c| eval(c, &x) >= 0.0) {
                best = best.min(eval(&target, &x));
            }
        }
        best
    });
    let best = per_first.into_iter().fold(f64::INFINITY, f64::min);
    if best.is_finite() {
        Ok(best)
    } else {
        Err(OracleError::EmptyGrid)
    }
}

/// Reads a realization file: a `NAME:` header per generator followed by
/// the rows of its matrix, and a `state:` stanza holding either one row (a
/// vector) or a square matrix (a density). Entries are real or complex
/// numbers (`0.5`, `0.5-0.5i`, `2i`); `#` starts a comment. The result is
/// validated like [`ConcreteRealization::new`].
pub fn parse_realization(text: &str, pres: &Presentation) -> Result<ConcreteRealization, OracleError> {
    let mut stanzas: Vec<(usize, String, Vec<Vec<Complex64>>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_suffix(':') {
            stanzas.push((line, name.trim().to_string(), Vec::new()));
            continue;
        }
        let Some(current) = stanzas.last_mut() else {
            return Err(OracleError::Parse {
                line,
                message: "matrix rows before the first `NAME:` header".into(),
            });
        };
        let row = content
            .split_whitespace()
            .map(|t| {
                crate::symmetry::parse_complex(t).ok_or_else(|| OracleError::Parse {
                    line,
                    message: format!("cannot read `{t}` as a number"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        current.2.push(row);
    }
    let n = pres.generators().len();
    let mut assignment: Vec<Option<CMat>> = vec![None; n];
    let mut state = None;
    for (line, name, rows) in stanzas {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || rows.iter().any(|r| r.len() != width) {
            return Err(OracleError::Parse {
                line,
                message: format!("`{name}` needs rows of equal length"),
            });
        }
        let m = CMat::from_fn(rows.len(), width, |i, j| rows[i][j]);
        if name == "state" {
            state = Some(if m.nrows() == 1 {
                State::Vector(m.row(0).transpose())
            } else if m.is_square() {
                State::Density(m)
            } else {
                return Err(OracleError::Parse {
                    line,
                    message: "state must be one row or a square matrix".into(),
                });
            });
            continue;
        }
        let g = pres.generator_index(&name).ok_or_else(|| OracleError::Parse {
            line,
            message: format!("unknown generator `{name}`"),
        })?;
        if !m.is_square() {
            return Err(OracleError::Parse {
                line,
                message: format!("`{name}` is not square"),
            });
        }
        if assignment[g].replace(m).is_some() {
            return Err(OracleError::Parse {
                line,
                message: format!("`{name}` assigned twice"),
            });
        }
    }
    let names = pres.names();
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(g, m)| {
            m.ok_or_else(|| OracleError::Parse {
                line: 0,
                message: format!("no matrix for generator `{}`", names[g]),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let state = state.ok_or(OracleError::Parse {
        line: 0,
        message: "missing `state:` stanza".into(),
    })?;
    ConcreteRealization::new(pres, assignment, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Generator;

    fn line() -> Presentation {
        Presentation::new(vec![Generator::new("x", true)]).unwrap()
    }

    fn x() -> Polynomial {
        Polynomial::word(Word::from_generators(&[0]))
    }

    #[test]
    fn quartic_on_interval() {
        let f = &x().pow(4) - &x().pow(2);
        let v = grid_min(&line(), &f, &[], &[(-1.0, 1.0)], 1e-4, Execution::Parallel).unwrap();
        assert!((v + 0.25).abs() < 1e-6);
    }

    #[test]
    fn constant_and_boundary() {
        let v = grid_min(&line(), &Polynomial::real(5.0), &[], &[(-1.0, 1.0)], 0.1, Execution::Sequential).unwrap();
        assert_eq!(v, 5.0);
        let v = grid_min(&line(), &x(), &[], &[(0.0, 1.0)], 0.01, Execution::Sequential).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn positivity_filters_points() {
        // x >= 0.5 on [0, 1]
        let p = &x() - &Polynomial::real(0.5);
        let v = grid_min(&line(), &x(), &[p], &[(0.0, 1.0)], 0.01, Execution::Sequential).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let never = &Polynomial::real(-1.0) - &x().pow(2);
        assert_eq!(
            grid_min(&line(), &x(), &[never], &[(0.0, 1.0)], 0.1, Execution::Sequential),
            Err(OracleError::EmptyGrid)
        );
    }

    #[test]
    fn idempotent_trivial_realization() {
        let mut pres = Presentation::new(vec![Generator::new("p", true)]).unwrap();
        pres.add_rule(Word::from_generators(&[0, 0]), x()).unwrap();
        let one = CMat::from_element(1, 1, c(1.0));
        let state = State::Vector(DVector::from_element(1, c(1.0)));
        let real = ConcreteRealization::new(&pres, vec![one], state.clone()).unwrap();
        assert_eq!(real.value(&x()), c(1.0));
        let two = CMat::from_element(1, 1, c(2.0));
        assert!(matches!(
            ConcreteRealization::new(&pres, vec![two], state),
            Err(OracleError::Relation { .. })
        ));
    }

    #[test]
    fn realization_file() {
        let pres = Presentation::new(vec![crate::algebra::Generator::new("p", true)]).unwrap();
        let text = "# projection onto the first axis\np:\n1 0\n0 0\n\nstate:\n0.6 0.8i\n";
        let real = parse_realization(text, &pres).unwrap();
        let p = Polynomial::word(Word::from_generators(&[0]));
        assert!((real.value(&p).re - 0.36).abs() < 1e-12);
        let missing = parse_realization("state:\n1\n", &pres);
        assert!(matches!(missing, Err(OracleError::Parse { .. })));
        let bad = parse_realization("p:\n1 x\n", &pres);
        assert!(matches!(bad, Err(OracleError::Parse { line: 2, .. })));
    }
}
