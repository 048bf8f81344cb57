#![allow(dead_code)]

use cstar::algebra::{Letter, Polynomial, Presentation, Word};
use cstar::oracles::{ConcreteRealization, State};
use cstar::ipm::{dual_check, feasibility_check, Solution, Status};
use cstar::parser::{parse_problem, ProblemFile};
use cstar::sdp::{BlockSparse, BlockSpec, LinearConstraint, SdpModel, Sense};
use cstar::symmetry::GroupRep;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn problem_text(name: &str) -> String {
    let path = format!("{}/problems/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

pub fn problem(name: &str) -> ProblemFile {
    parse_problem(&problem_text(name)).unwrap()
}

pub const SHIPPED: [&str; 5] = [
    "chsh.csdp",
    "chsh_paper_basis.csdp",
    "lasserre_x4.csdp",
    "idempotent.csdp",
    "motzkin_box.csdp",
];

fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    // two decimals keep the generated text exact
    (rng.gen_range(-100..=100) as f64) / 100.0
}

/// Whether an instance's generators are `±1` observables or projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Dichotomic,
    Projection,
}

/// A generated problem with enough structure to build realizations.
#[derive(Clone, Debug)]
pub struct Instance {
    pub text: String,
    pub problem: ProblemFile,
    /// Number of generators in the first party; the rest form the second.
    pub split: usize,
    pub kinds: Vec<Kind>,
    pub commutative: bool,
    /// Objective degree.
    pub degree: usize,
}

/// Commuting variables `x0..` on the box `[-1, 1]^n` with a random real
/// objective of degree at most 4.
pub fn random_commutative(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(1..=3);
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut monomials: Vec<Vec<u32>> = Vec::new();
    let mut stack = vec![vec![0u32; n]];
    while let Some(e) = stack.pop() {
        let deg: u32 = e.iter().sum();
        if deg > 0 {
            monomials.push(e.clone());
        }
        if deg < 4 {
            let last = e.iter().rposition(|&k| k > 0).unwrap_or(0);
            for i in last..n {
                let mut f = e.clone();
                f[i] += 1;
                stack.push(f);
            }
        }
    }
    let mut terms = vec![format!("{}", coeff(rng))];
    let mut degree = 0;
    for m in &monomials {
        if rng.gen_bool(0.4) {
            let c = coeff(rng);
            if c == 0.0 {
                continue;
            }
            let factors: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { names[i].clone() } else { format!("{}^{k}", names[i]) })
                .collect();
            degree = degree.max(m.iter().sum::<u32>() as usize);
            terms.push(format!("{c}*{}", factors.join("*")));
        }
    }
    if degree == 0 {
        terms.push(format!("{}*{}^2", coeff(rng).abs() + 0.5, names[0]));
        degree = 2;
    }
    let mut text = String::from("[generators]\n");
    for name in &names {
        text += &format!("{name} selfadjoint\n");
    }
    text += "\n[commute]\nall\n\n[objective]\nminimize ";
    text += &terms.join(" + ").replace("+ -", "- ");
    text += "\n\n[positive]\n";
    for name in &names {
        text += &format!("1 - {name}^2\n");
    }
    let problem = parse_problem(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    Instance {
        text,
        problem,
        split: n,
        kinds: Vec::new(),
        commutative: true,
        degree,
    }
}

fn party_names(split: usize, total: usize) -> Vec<String> {
    (0..total)
        .map(|i| if i < split { format!("A{i}") } else { format!("B{}", i - split) })
        .collect()
}

/// Two parties of selfadjoint generators (at most three in total), each a
/// `±1` observable or a projection, with the parties commuting. The
/// objective is a random symmetrized combination of words of degree at
/// most 4.
pub fn random_noncommutative(rng: &mut ChaCha8Rng) -> Instance {
    let total = rng.gen_range(2..=3);
    let split = rng.gen_range(1..=total.min(2));
    let names = party_names(split, total);
    let kinds: Vec<Kind> = (0..total)
        .map(|_| if rng.gen_bool(0.5) { Kind::Dichotomic } else { Kind::Projection })
        .collect();
    let mut text = String::from("[generators]\n");
    for name in &names {
        text += &format!("{name} selfadjoint\n");
    }
    text += "\n[relations]\n";
    for (name, kind) in names.iter().zip(&kinds) {
        match kind {
            Kind::Dichotomic => text += &format!("{name}^2 = 1\n"),
            Kind::Projection => text += &format!("{name}^2 = {name}\n"),
        }
    }
    if split < total {
        text += &format!(
            "\n[commute]\n{{{}}} with {{{}}}\n",
            names[..split].join(", "),
            names[split..].join(", ")
        );
    }
    let mut terms = vec![format!("{}", coeff(rng))];
    let mut degree = 0;
    let count = rng.gen_range(2..=5);
    for _ in 0..count {
        let len = rng.gen_range(1..=4);
        let word: Vec<usize> = (0..len).map(|_| rng.gen_range(0..total)).collect();
        let fwd: Vec<&str> = word.iter().map(|&g| names[g].as_str()).collect();
        let back: Vec<&str> = fwd.iter().rev().copied().collect();
        let c = coeff(rng);
        if c == 0.0 {
            continue;
        }
        degree = degree.max(len);
        terms.push(format!("{c}*{} + {c}*{}", fwd.join("*"), back.join("*")));
    }
    if degree == 0 {
        terms.push(names[0].to_string());
        degree = 1;
    }
    text += "\n[objective]\nminimize ";
    text += &terms.join(" + ").replace("+ -", "- ");
    text += "\n";
    let problem = parse_problem(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    Instance {
        text,
        problem,
        split,
        kinds,
        commutative: false,
        degree,
    }
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, k: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let n = v.norm();
    v / c(n)
}

/// A mixed state with full support.
pub fn random_density(rng: &mut ChaCha8Rng, k: usize) -> CMat {
    let g = CMat::from_fn(k, k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut rho = &g * g.adjoint() + CMat::identity(k, k) * c(0.1);
    let tr = rho.trace();
    rho /= tr;
    rho
}

fn qubit_operator(rng: &mut ChaCha8Rng, kind: Kind) -> CMat {
    let v = random_unit_vector(rng, 2);
    let p = &v * v.adjoint();
    match kind {
        Kind::Projection => p,
        Kind::Dichotomic => p * c(2.0) - CMat::identity(2, 2),
    }
}

/// A random realization valid for the instance's presentation: diagonal
/// matrices with spectrum in `[-1, 1]` for commutative instances, qubit
/// operators on a two-party tensor product otherwise.
pub fn random_realization(rng: &mut ChaCha8Rng, inst: &Instance) -> ConcreteRealization {
    let pres = &inst.problem.presentation;
    let n = pres.generators().len();
    if inst.commutative {
        let k = 3;
        let assignment = (0..n)
            .map(|_| CMat::from_diagonal(&DVector::from_fn(k, |_, _| c(rng.gen_range(-1.0..=1.0)))))
            .collect();
        let state = State::Density(random_density(rng, k));
        return ConcreteRealization::new(pres, assignment, state).unwrap();
    }
    let id = CMat::identity(2, 2);
    let assignment = (0..n)
        .map(|g| {
            let op = qubit_operator(rng, inst.kinds[g]);
            if g < inst.split {
                op.kronecker(&id)
            } else {
                id.kronecker(&op)
            }
        })
        .collect();
    let state = if rng.gen_bool(0.5) {
        State::Vector(random_unit_vector(rng, 4))
    } else {
        State::Density(random_density(rng, 4))
    };
    ConcreteRealization::new(pres, assignment, state).unwrap()
}

/// CHSH-style presentation realized by random qubit observables on a
/// random two-qubit state.
pub fn random_chsh_realization(rng: &mut ChaCha8Rng, problem: &ProblemFile) -> ConcreteRealization {
    let inst = Instance {
        text: String::new(),
        problem: problem.clone(),
        split: 2,
        kinds: vec![Kind::Dichotomic; 4],
        commutative: false,
        degree: 2,
    };
    random_realization(rng, &inst)
}

/// Random Hermitian PSD matrix of rank at most `rank`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMat {
    let g = CMat::from_fn(n, rank, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    &g * g.adjoint()
}

/// `C_3` acting on six points as two disjoint 3-cycles.
pub fn c3_on_six() -> GroupRep {
    let r: Vec<usize> = vec![1, 2, 0, 4, 5, 3];
    let r2: Vec<usize> = (0..6).map(|i| r[r[i]]).collect();
    GroupRep::from_permutations(&[(0..6).collect(), r, r2]).unwrap()
}

fn to_sparse(m: &DMatrix<f64>) -> BlockSparse {
    let mut s = BlockSparse::new();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            s.add(0, i, j, m[(i, j)]);
        }
    }
    s
}

fn invariant_real(rep: &GroupRep, m: &DMatrix<f64>) -> DMatrix<f64> {
    rep.reynolds(&m.map(c)).map(|v| v.re)
}

/// A single-block `6×6` SDP invariant under [`c3_on_six`]. The cost is
/// positive definite and the constraints are satisfied by a positive
/// definite invariant matrix, so both sides are strictly feasible.
pub fn random_c3_sdp(rng: &mut ChaCha8Rng) -> SdpModel {
    let rep = c3_on_six();
    let d = 6;
    let sym = |rng: &mut ChaCha8Rng| {
        let g = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        (&g + g.transpose()) * 0.5
    };
    let g = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let cost = invariant_real(&rep, &(&g * g.transpose() + DMatrix::identity(d, d) * 0.5 + sym(rng) * 0.2));
    let h = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let x0 = invariant_real(&rep, &(&h * h.transpose() + DMatrix::identity(d, d)));
    let mut model = SdpModel::new(vec![BlockSpec::dense(d)]);
    model.cost = to_sparse(&cost).canonical();
    let m = rng.gen_range(2..=4);
    for k in 0..m {
        let a = if k == 0 {
            DMatrix::identity(d, d)
        } else {
            invariant_real(&rep, &sym(rng))
        };
        let rhs = a.dot(&x0);
        model.constraints.push(LinearConstraint {
            matrix: to_sparse(&a).canonical(),
            sense: Sense::Eq,
            rhs,
        });
    }
    model
}

/// Random word of length at most `max_len` over every letter of the
/// presentation, starred selfadjoint letters included.
pub fn random_word(rng: &mut ChaCha8Rng, pres: &Presentation, max_len: usize) -> Word {
    let n = pres.generators().len();
    let len = rng.gen_range(0..=max_len);
    Word::new(
        (0..len)
            .map(|_| Letter::new(rng.gen_range(0..n), rng.gen_bool(0.3)))
            .collect(),
    )
}

/// Checks idempotence of the normal form, the involution laws and the
/// anti-homomorphism `(uv)* = v* u*` for one pair of words. Returns a
/// description of the first failure.
pub fn rewrite_laws(pres: &Presentation, u: &Word, v: &Word) -> Result<(), String> {
    let names = pres.names();
    let show = |w: &Word| w.display(&names).to_string();
    let nf = |p: &Polynomial| pres.normal_form(p).map_err(|e| e.to_string());
    let pu = Polynomial::word(u.clone());
    let nu = nf(&pu)?;
    if nf(&nu)? != nu {
        return Err(format!("normal form of {} is not idempotent", show(u)));
    }
    if u.adjoint().adjoint() != *u {
        return Err(format!("adjoint is not an involution on {}", show(u)));
    }
    let uv = u.concat(v);
    if uv.adjoint() != v.adjoint().concat(&u.adjoint()) {
        return Err(format!("(uv)* != v*u* for u = {}, v = {}", show(u), show(v)));
    }
    let tol = 1e-12;
    if !nf(&nu.adjoint())?.approx_eq(&nf(&pu.adjoint())?, tol) {
        return Err(format!("nf(nf(u)*) != nf(u*) for u = {}", show(u)));
    }
    let nv = nf(&Polynomial::word(v.clone()))?;
    let lhs = nf(&nu.mul(&nv))?;
    let rhs = nf(&Polynomial::word(uv.clone()))?;
    if !lhs.approx_eq(&rhs, tol) {
        return Err(format!("nf(nf(u) nf(v)) != nf(uv) for u = {}, v = {}", show(u), show(v)));
    }
    let adj_uv = nf(&Polynomial::word(uv.adjoint()))?;
    let anti = nf(&nv.adjoint().mul(&nu.adjoint()))?;
    if !adj_uv.approx_eq(&anti, tol) {
        return Err(format!("nf((uv)*) != nf(v* u*) for u = {}, v = {}", show(u), show(v)));
    }
    Ok(())
}

/// Checks every recorded iterate: `X ⪰ 0`, `Z ⪰ 0`, and
/// `pobj - dobj - y·(A(X) - b) - <X, C - A*y - Z> = <X, Z> >= 0`, i.e. weak
/// duality corrected for the residuals of an infeasible iterate. The logged
/// objectives must match independent evaluations, and an optimal point
/// must have `pobj >= dobj` up to tolerance.
pub fn weak_duality(model: &SdpModel, sol: &Solution) -> Result<(), String> {
    if sol.iterates.is_empty() {
        return Err("no iterates recorded".into());
    }
    for (k, it) in sol.iterates.iter().enumerate() {
        let primal = feasibility_check(model, &it.x).map_err(|e| e.to_string())?;
        let dual = dual_check(model, &it.y).map_err(|e| e.to_string())?;
        let scale = 1.0 + primal.objective.abs() + dual.objective.abs();
        if primal.min_eigenvalue() < -1e-10 * scale {
            return Err(format!("iterate {k}: X has eigenvalue {}", primal.min_eigenvalue()));
        }
        let z_min = it
            .z
            .iter()
            .map(|m| SymmetricEigen::new(m.clone()).eigenvalues.min())
            .fold(f64::INFINITY, f64::min);
        if z_min < -1e-10 * scale {
            return Err(format!("iterate {k}: Z has eigenvalue {z_min}"));
        }
        let xz: f64 = it.x.iter().zip(&it.z).map(|(x, z)| x.dot(z)).sum();
        let infeas: f64 = model
            .constraints
            .iter()
            .zip(&it.y)
            .map(|(c, y)| y * (c.matrix.dot(&it.x) - c.rhs))
            .sum();
        let mut rd = model.cost.to_dense(&model.blocks);
        for (c, &y) in model.constraints.iter().zip(&it.y) {
            c.matrix.add_to_dense(-y, &mut rd);
        }
        let x_rd: f64 = it
            .x
            .iter()
            .zip(rd.iter().zip(&it.z))
            .map(|(x, (r, z))| x.dot(&(r - z)))
            .sum();
        let corrected = primal.objective - dual.objective - infeas - x_rd;
        if xz < -1e-12 * scale {
            return Err(format!("iterate {k}: <X, Z> = {xz}"));
        }
        if (corrected - xz).abs() > 1e-8 * scale * (1.0 + xz.abs()) {
            return Err(format!("iterate {k}: corrected gap {corrected} but <X, Z> = {xz}"));
        }
        let log = &sol.history[k];
        if (log.primal_objective - primal.objective).abs() > 1e-9 * scale
            || (log.dual_objective - dual.objective).abs() > 1e-9 * scale
        {
            return Err(format!("iterate {k}: logged objectives disagree"));
        }
    }
    if sol.status == Status::Optimal
        && sol.primal_objective < sol.dual_objective - 1e-8 * (1.0 + sol.primal_objective.abs())
    {
        return Err(format!(
            "optimal point has pobj {} < dobj {}",
            sol.primal_objective, sol.dual_objective
        ));
    }
    Ok(())
}
