use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::basis::{explicit_basis, generate_basis_with_cap, Basis};
use super::moment::{moment_structure_with, single_word, MomentStructure};
use super::RelaxationError;
use crate::algebra::{Polynomial, Presentation, Word};
use crate::exec::{try_map_indices, Execution};
use crate::ipm::{solve, Solution, SolverOptions, Status};
use crate::parser::{ObjectiveSense, ProblemConstraint, ProblemFile, Relation};
use crate::sdp::{
    AffineEntry, BlockSpec, ComplexAffine, Lmi, LmiBlock, LmiReduction, Presolve, SdpModel,
};

/// Real LMI variables carrying one moment word: `y_w = r[re] + i·sign·r[im]`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Slot {
    re: usize,
    im: Option<(usize, f64)>,
}

/// Block `[L(γ_a p γ_b*)]` for a declared-positive `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizingMatrix {
    pub positive: Polynomial,
    pub words: Vec<Word>,
    /// Row-major normal forms.
    pub entries: Vec<Polynomial>,
}

/// A level-`d` relaxation in moment form, with its standard-form model.
#[derive(Clone, Debug)]
pub struct Relaxation {
    pub sense: ObjectiveSense,
    pub objective: Polynomial,
    pub moments: MomentStructure,
    pub localizing: Vec<LocalizingMatrix>,
    /// Every moment word the relaxation refers to, in canonical order.
    pub variables: Vec<Word>,
    /// Whether imaginary parts were dropped (all data real).
    pub real_mode: bool,
    pub lmi: Lmi,
    pub reduction: LmiReduction,
    slots: Vec<Slot>,
    /// Pairs `(w, v)` with `v = nf(w*)` sharing one complex variable.
    pairs: Vec<(usize, usize)>,
    /// Words whose adjoint normal form is not a single word.
    unpaired: Vec<(usize, Polynomial)>,
    index: BTreeMap<Word, usize>,
    pub names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationResult {
    pub status: Status,
    /// Certified side of the relaxation value in the problem's sense
    /// (lower bound for minimization, upper bound for maximization).
    pub bound: Option<f64>,
    /// Objective at the recovered moments.
    pub moment_value: Option<f64>,
    pub gap: f64,
    /// Moments indexed like [`Relaxation::variables`].
    pub moments: Vec<Complex64>,
    pub iterations: usize,
    pub solution: Option<Solution>,
    pub presolve_message: Option<String>,
}

/// Feasibility of a candidate moment vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    /// Largest violation of normalization, equality constraints and the
    /// adjoint relations.
    pub equality_residual: f64,
    /// Smallest eigenvalue over the moment, localizing and inequality blocks.
    pub min_eigenvalue: f64,
    /// Objective in the problem's sense.
    pub objective: f64,
}

impl MomentCheck {
    pub fn max_violation(&self) -> f64 {
        self.equality_residual.max(-self.min_eigenvalue).max(0.0)
    }
}

pub(crate) struct Spec<'a> {
    pub pres: &'a Presentation,
    pub basis: Basis,
    pub objective: Polynomial,
    pub sense: ObjectiveSense,
    pub constraints: &'a [ProblemConstraint],
    pub positives: &'a [Polynomial],
    pub normalization: bool,
    pub require_objective: bool,
}

pub fn build_relaxation(problem: &ProblemFile, level: usize) -> Result<Relaxation, RelaxationError> {
    build_relaxation_with(problem, level, Execution::default())
}

/// Level basis (or the explicit `basis` option when present), moment
/// table, localizing blocks and the standard-form model.
pub fn build_relaxation_with(
    problem: &ProblemFile,
    level: usize,
    exec: Execution,
) -> Result<Relaxation, RelaxationError> {
    let basis = problem_basis(problem, level)?;
    assemble(
        Spec {
            pres: &problem.presentation,
            basis,
            objective: problem.objective.poly.clone(),
            sense: problem.objective.sense,
            constraints: &problem.constraints,
            positives: &problem.positives,
            normalization: problem.normalization,
            require_objective: true,
        },
        exec,
    )
}

pub(crate) fn problem_basis(problem: &ProblemFile, level: usize) -> Result<Basis, RelaxationError> {
    match &problem.basis {
        Some(words) => explicit_basis(&problem.presentation, words),
        None => generate_basis_with_cap(&problem.presentation, level, problem.basis_cap),
    }
}

fn is_real(p: &Polynomial) -> bool {
    p.has_real_coefficients()
}

fn ensure_representable(
    p: &Polynomial,
    ms: &MomentStructure,
    what: &str,
) -> Result<(), RelaxationError> {
    match p.words().find(|w| ms.variable_id(w).is_none()) {
        Some(w) => Err(RelaxationError::NotRepresentable {
            what: what.to_string(),
            word: w.display(&ms.names).to_string(),
            level: ms.basis.level,
        }),
        None => Ok(()),
    }
}

pub(crate) fn assemble(spec: Spec<'_>, exec: Execution) -> Result<Relaxation, RelaxationError> {
    let pres = spec.pres;
    let names = pres.names();
    if spec.require_objective && spec.objective.is_zero() {
        return Err(RelaxationError::EmptyObjective);
    }
    let ms = moment_structure_with(&spec.basis, pres, exec)?;
    ensure_representable(&spec.objective, &ms, "objective")?;
    for (k, c) in spec.constraints.iter().enumerate() {
        ensure_representable(&c.poly, &ms, &format!("constraint {}", k + 1))?;
    }

    let localizing = spec
        .positives
        .iter()
        .filter_map(|p| {
            let half = p.degree().div_ceil(2);
            let max_degree = spec.basis.level.checked_sub(half)?;
            let words = spec.basis.truncated(max_degree);
            Some(localizing_matrix(pres, p, words, exec))
        })
        .collect::<Result<Vec<_>, _>>()?;

    // all referenced words, closed under w ↦ nf(w*)
    let mut words: BTreeSet<Word> = ms.variables.iter().cloned().collect();
    for l in &localizing {
        for e in &l.entries {
            words.extend(e.words().cloned());
        }
    }
    let mut adjoints: BTreeMap<Word, Polynomial> = BTreeMap::new();
    let mut queue: Vec<Word> = words.iter().cloned().collect();
    while let Some(w) = queue.pop() {
        if adjoints.contains_key(&w) {
            continue;
        }
        let adj = pres.reduce_word(&w.adjoint())?;
        for v in adj.words() {
            if words.insert(v.clone()) {
                queue.push(v.clone());
            }
        }
        adjoints.insert(w, adj);
    }
    let variables: Vec<Word> = words.into_iter().collect();
    let index: BTreeMap<Word, usize> = variables
        .iter()
        .enumerate()
        .map(|(k, w)| (w.clone(), k))
        .collect();

    let real_mode = pres.rules().iter().all(|r| is_real(&r.rhs))
        && is_real(&spec.objective)
        && spec.constraints.iter().all(|c| is_real(&c.poly))
        && spec.positives.iter().all(is_real);

    // pair w with v = nf(w*) when the involution maps single words to
    // single words both ways
    let mut partner: Vec<Option<usize>> = vec![None; variables.len()];
    for (k, w) in variables.iter().enumerate() {
        if let Some(v) = single_word(&adjoints[w]) {
            let j = index[v];
            if single_word(&adjoints[v]) == Some(w) {
                partner[k] = Some(j);
            }
        }
    }
    let mut slots: Vec<Option<Slot>> = vec![None; variables.len()];
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    let mut next = 0usize;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    for k in 0..variables.len() {
        if slots[k].is_some() {
            continue;
        }
        match partner[k] {
            Some(j) if j == k => {
                slots[k] = Some(Slot { re: fresh(), im: None });
            }
            Some(j) => {
                let re = fresh();
                let im = (!real_mode).then(&mut fresh);
                slots[k] = Some(Slot {
                    re,
                    im: im.map(|i| (i, 1.0)),
                });
                slots[j] = Some(Slot {
                    re,
                    im: im.map(|i| (i, -1.0)),
                });
                pairs.push((k, j));
            }
            None => {
                let re = fresh();
                let im = (!real_mode).then(&mut fresh);
                slots[k] = Some(Slot {
                    re,
                    im: im.map(|i| (i, 1.0)),
                });
                unpaired.push((k, adjoints[&variables[k]].clone()));
            }
        }
    }
    let num_vars = next;
    let slots: Vec<Slot> = slots.into_iter().map(|s| s.expect("every word has a slot")).collect();

    let mut relax = Relaxation {
        sense: spec.sense,
        objective: spec.objective.clone(),
        moments: ms,
        localizing,
        variables,
        real_mode,
        lmi: Lmi::new(num_vars),
        reduction: LmiReduction {
            model: SdpModel::default(),
            offset: 0.0,
            base: Vec::new(),
            columns: Vec::new(),
            num_free: 0,
            realified: false,
            presolve: Presolve::Ready,
        },
        slots,
        pairs,
        unpaired,
        index,
        names,
    };

    // moment block
    let n = relax.moments.size();
    let mut gamma = LmiBlock::new(BlockSpec::dense(n));
    for i in 0..n {
        for j in i..n {
            gamma.entries.push(AffineEntry {
                row: i,
                col: j,
                expr: relax.affine(relax.moments.entry(i, j)),
            });
        }
    }
    relax.lmi.blocks.push(gamma);
    for l in &relax.localizing {
        let m = l.words.len();
        let mut block = LmiBlock::new(BlockSpec::dense(m));
        for i in 0..m {
            for j in i..m {
                block.entries.push(AffineEntry {
                    row: i,
                    col: j,
                    expr: relax.affine(&l.entries[i * m + j]),
                });
            }
        }
        relax.lmi.blocks.push(block);
    }

    // inequalities as one diagonal block, equalities as rows
    let mut diag = Vec::new();
    for c in spec.constraints {
        let form = relax.real_form(&c.poly);
        match c.relation {
            Relation::Eq => relax.lmi.add_equality(form, c.bound),
            Relation::Ge | Relation::Le => {
                let sign = if c.relation == Relation::Ge { 1.0 } else { -1.0 };
                let mut expr = ComplexAffine::constant(Complex64::new(-sign * c.bound, 0.0));
                for (k, a) in form {
                    expr.add_term(k, Complex64::new(sign * a, 0.0));
                }
                diag.push(expr);
            }
        }
    }
    if !diag.is_empty() {
        let mut block = LmiBlock::new(BlockSpec::diagonal(diag.len()));
        for (i, expr) in diag.into_iter().enumerate() {
            block.entries.push(AffineEntry { row: i, col: i, expr });
        }
        relax.lmi.blocks.push(block);
    }
    if spec.normalization {
        let unit = relax.slots[relax.index[&Word::unit()]].re;
        relax.lmi.add_equality(BTreeMap::from([(unit, 1.0)]), 1.0);
    }
    // y(nf(w*)) = conj(y(w)) where the involution is not a plain pairing
    for (k, adj) in relax.unpaired.clone() {
        let s = relax.slots[k];
        let mut re_row = relax.real_form(&adj);
        *re_row.entry(s.re).or_default() -= 1.0;
        re_row.retain(|_, v| *v != 0.0);
        relax.lmi.add_equality(re_row, 0.0);
        if let Some((im, sign)) = s.im {
            let mut im_row = relax.imag_form(&adj);
            *im_row.entry(im).or_default() += sign;
            im_row.retain(|_, v| *v != 0.0);
            relax.lmi.add_equality(im_row, 0.0);
        }
    }
    relax.set_objective(&spec.objective, spec.sense)?;
    Ok(relax)
}

fn localizing_matrix(
    pres: &Presentation,
    p: &Polynomial,
    words: Vec<Word>,
    exec: Execution,
) -> Result<LocalizingMatrix, RelaxationError> {
    let m = words.len();
    let rows = try_map_indices(m, exec, |i| {
        let left = Polynomial::word(words[i].clone()).mul(p);
        words
            .iter()
            .map(|wj| pres.normal_form(&left.mul(&Polynomial::word(wj.adjoint()))))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(LocalizingMatrix {
        positive: p.clone(),
        words,
        entries: rows.into_iter().flatten().collect(),
    })
}

impl Relaxation {
    pub fn level(&self) -> usize {
        self.moments.basis.level
    }

    pub fn basis(&self) -> &Basis {
        &self.moments.basis
    }

    pub fn model(&self) -> &SdpModel {
        &self.reduction.model
    }

    pub fn variable_id(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Number of real scalars before equality elimination.
    pub fn num_real_variables(&self) -> usize {
        self.lmi.num_vars
    }

    fn affine(&self, p: &Polynomial) -> ComplexAffine {
        let mut e = ComplexAffine::default();
        for (w, c) in p.terms() {
            let s = self.slots[self.index[w]];
            e.add_term(s.re, *c);
            if let Some((im, sign)) = s.im {
                e.add_term(im, c * Complex64::new(0.0, sign));
            }
        }
        e
    }

    /// `Re L(p)` as a real linear form.
    fn real_form(&self, p: &Polynomial) -> BTreeMap<usize, f64> {
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, v) in self.affine(p).terms {
            *out.entry(k).or_default() += v.re;
        }
        out.retain(|_, v| *v != 0.0);
        out
    }

    /// `Im L(p)` as a real linear form.
    fn imag_form(&self, p: &Polynomial) -> BTreeMap<usize, f64> {
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, v) in self.affine(p).terms {
            *out.entry(k).or_default() += v.im;
        }
        out.retain(|_, v| *v != 0.0);
        out
    }

    /// Replaces the objective and rebuilds the standard-form model; the
    /// moment and localizing structure is reused.
    pub fn set_objective(&mut self, objective: &Polynomial, sense: ObjectiveSense) -> Result<(), RelaxationError> {
        ensure_representable(objective, &self.moments, "objective")?;
        let sign = match sense {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        self.lmi.objective = self
            .real_form(objective)
            .into_iter()
            .map(|(k, v)| (k, sign * v))
            .collect();
        self.lmi.objective_constant = 0.0;
        self.objective = objective.clone();
        self.sense = sense;
        self.reduction = self.lmi.reduce()?;
        Ok(())
    }

    fn to_sense(&self, v: f64) -> f64 {
        match self.sense {
            ObjectiveSense::Minimize => v,
            ObjectiveSense::Maximize => -v,
        }
    }

    /// Complex moments from real LMI variables.
    fn moments_from(&self, r: &[f64]) -> Vec<Complex64> {
        self.slots
            .iter()
            .map(|s| {
                let im = s.im.map_or(0.0, |(i, sign)| sign * r[i]);
                Complex64::new(r[s.re], im)
            })
            .collect()
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<RelaxationResult, RelaxationError> {
        match &self.reduction.presolve {
            Presolve::Ready => {}
            Presolve::Infeasible(msg) | Presolve::Unbounded(msg) => {
                let status = if matches!(self.reduction.presolve, Presolve::Infeasible(_)) {
                    Status::Infeasible
                } else {
                    Status::Unbounded
                };
                return Ok(RelaxationResult {
                    status,
                    bound: None,
                    moment_value: None,
                    gap: f64::NAN,
                    moments: Vec::new(),
                    iterations: 0,
                    solution: None,
                    presolve_message: Some(msg.clone()),
                });
            }
        }
        let sol = solve(self.model(), opts)?;
        // the model is the dual of the moment problem
        let status = match sol.status {
            Status::Infeasible => Status::Unbounded,
            Status::Unbounded => Status::Infeasible,
            s => s,
        };
        let has_value = matches!(status, Status::Optimal | Status::MaxIter | Status::Numerical);
        let r = self.reduction.recover(&sol.y);
        Ok(RelaxationResult {
            status,
            bound: has_value.then(|| self.to_sense(self.reduction.bound_from_primal(sol.primal_objective))),
            moment_value: has_value.then(|| self.to_sense(self.reduction.value_from_dual(sol.dual_objective))),
            gap: sol.gap,
            moments: self.moments_from(&r),
            iterations: sol.iterations,
            solution: Some(sol),
            presolve_message: None,
        })
    }

    /// Checks a moment vector indexed like [`Relaxation::variables`]
    /// against every constraint of the relaxation. In real mode only real
    /// parts are used, which is valid because the data are real.
    pub fn check_moments(&self, y: &[Complex64]) -> Result<MomentCheck, RelaxationError> {
        if y.len() != self.variables.len() {
            return Err(RelaxationError::MomentLength {
                expected: self.variables.len(),
                found: y.len(),
            });
        }
        let mut r = vec![0.0; self.lmi.num_vars];
        for (s, v) in self.slots.iter().zip(y) {
            r[s.re] = v.re;
            if let Some((i, sign)) = s.im {
                r[i] = sign * v.im;
            }
        }
        let (eq, eig) = self.lmi.check(&r);
        let mut herm: f64 = 0.0;
        for &(k, j) in &self.pairs {
            herm = herm.max((y[j] - y[k].conj()).norm());
            if self.real_mode {
                herm = herm.max((y[j].re - y[k].re).abs());
            }
        }
        for (k, s) in self.slots.iter().enumerate() {
            if s.im.is_none() && !self.real_mode {
                herm = herm.max(y[k].im.abs());
            }
        }
        Ok(MomentCheck {
            equality_residual: eq.max(herm),
            min_eigenvalue: eig,
            objective: self.to_sense(self.lmi.objective_value(&r)),
        })
    }

    /// Numeric moment matrix at `y`.
    pub fn moment_matrix(&self, y: &[Complex64]) -> DMatrix<Complex64> {
        let ids: Vec<Complex64> = self
            .moments
            .variables
            .iter()
            .map(|w| y[self.index[w]])
            .collect();
        self.moments.evaluate(&ids)
    }
}
