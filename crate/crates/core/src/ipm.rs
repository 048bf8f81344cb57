//! Dense primal-dual interior-point solver for block SDPs.
//!
//! Solves
//!
//! ```text
//! (P) min <C, X>  s.t. <A_k, X> = b_k, X ⪰ 0
//! (D) max b·y     s.t. Σ y_k A_k + Z = C, Z ⪰ 0
//! ```
//!
//! from an infeasible interior start with the HKM search direction and
//! Mehrotra's predictor-corrector. Diagonal blocks are split into `1×1`
//! blocks internally. A solve is single-threaded and deterministic.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::sdp::{BlockKind, SdpError, SdpModel, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
    /// Keep a copy of every iterate in [`Solution::iterates`].
    #[serde(default)]
    pub record_iterates: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_gap: 1e-8,
            tol_feas: 1e-8,
            max_iter: 200,
            step_fraction: 0.98,
            record_iterates: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            tol_gap: tol,
            tol_feas: tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SdpError> {
        let ok = self.tol_gap > 0.0
            && self.tol_feas > 0.0
            && self.max_iter > 0
            && self.step_fraction > 0.0
            && self.step_fraction < 1.0;
        if ok {
            Ok(())
        } else {
            Err(SdpError::InvalidOptions(format!("{self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    /// No `X` satisfies the constraints (the dual diverges).
    Infeasible,
    /// `<C, X>` is unbounded below.
    Unbounded,
    MaxIter,
    Numerical,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "OPTIMAL",
            Status::Infeasible => "INFEASIBLE",
            Status::Unbounded => "UNBOUNDED",
            Status::MaxIter => "MAX_ITER",
            Status::Numerical => "NUMERICAL",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateLog {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub primal_step: f64,
    pub dual_step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    /// Primal blocks in the layout of the input model (slack blocks added
    /// for inequalities are dropped).
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|p - d| / (1 + |p| + |d|)`.
    pub gap: f64,
    /// `‖b - A(X)‖∞`
    pub primal_residual: f64,
    /// Largest entry of `|C - Σ y A - Z|`.
    pub dual_residual: f64,
    pub iterations: usize,
    pub history: Vec<IterateLog>,
    /// Relative size of the infeasibility certificate when the status is
    /// `Infeasible` or `Unbounded`.
    pub certificate_residual: Option<f64>,
    /// Iterates in the input layout, only filled when
    /// [`SolverOptions::record_iterates`] is set.
    pub iterates: Vec<Iterate>,
}

/// A primal-dual point `(X, y, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub z: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub min_eigenvalues: Vec<f64>,
    /// Violation per constraint (absolute for equalities, positive part
    /// for inequalities).
    pub residuals: Vec<f64>,
    pub objective: f64,
}

impl FeasibilityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_blocks(model: &SdpModel, x: &[DMatrix<f64>]) -> Result<(), SdpError> {
    if x.len() != model.blocks.len() {
        return Err(SdpError::DimensionMismatch(format!(
            "{} blocks given, model has {}",
            x.len(),
            model.blocks.len()
        )));
    }
    for (i, (b, m)) in model.blocks.iter().zip(x).enumerate() {
        if m.shape() != (b.size, b.size) {
            return Err(SdpError::DimensionMismatch(format!(
                "block {} is {}x{}, expected {}x{}",
                i + 1,
                m.nrows(),
                m.ncols(),
                b.size,
                b.size
            )));
        }
    }
    Ok(())
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.min()
}

/// Minimum eigenvalue per block, constraint residuals and objective of a
/// candidate primal point. Diagonal blocks only count their diagonal.
pub fn feasibility_check(model: &SdpModel, x: &[DMatrix<f64>]) -> Result<FeasibilityReport, SdpError> {
    check_blocks(model, x)?;
    let min_eigenvalues = model
        .blocks
        .iter()
        .zip(x)
        .map(|(b, m)| match b.kind {
            BlockKind::Dense => min_eigenvalue(m),
            BlockKind::Diagonal => m.diagonal().min(),
        })
        .collect();
    let residuals = model
        .constraints
        .iter()
        .map(|c| {
            let v = c.matrix.dot(x);
            match c.sense {
                Sense::Eq => (v - c.rhs).abs(),
                Sense::Le => (v - c.rhs).max(0.0),
                Sense::Ge => (c.rhs - v).max(0.0),
            }
        })
        .collect();
    Ok(FeasibilityReport {
        min_eigenvalues,
        residuals,
        objective: model.objective(x),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualReport {
    /// Minimum eigenvalue of `C - Σ y A` per block.
    pub min_eigenvalues: Vec<f64>,
    /// Sign violations of multipliers on inequality constraints.
    pub sign_violation: f64,
    pub objective: f64,
}

/// Checks a dual candidate `y` for an equality- or inequality-form model.
/// `<=` rows need `y <= 0` and `>=` rows need `y >= 0`.
pub fn dual_check(model: &SdpModel, y: &[f64]) -> Result<DualReport, SdpError> {
    if y.len() != model.constraints.len() {
        return Err(SdpError::DimensionMismatch(format!(
            "{} multipliers for {} constraints",
            y.len(),
            model.constraints.len()
        )));
    }
    let mut s = model.cost.to_dense(&model.blocks);
    let mut sign_violation: f64 = 0.0;
    for (c, &yk) in model.constraints.iter().zip(y) {
        c.matrix.add_to_dense(-yk, &mut s);
        match c.sense {
            Sense::Le => sign_violation = sign_violation.max(yk),
            Sense::Ge => sign_violation = sign_violation.max(-yk),
            Sense::Eq => {}
        }
    }
    let min_eigenvalues = model
        .blocks
        .iter()
        .zip(&s)
        .map(|(b, m)| match b.kind {
            BlockKind::Dense => min_eigenvalue(m),
            BlockKind::Diagonal => m.diagonal().min(),
        })
        .collect();
    Ok(DualReport {
        min_eigenvalues,
        sign_violation,
        objective: model.constraints.iter().zip(y).map(|(c, yk)| c.rhs * yk).sum(),
    })
}

/// Full (both triangles) sparse entries of one constraint in one block.
type BlockEntries = Vec<(usize, usize, f64)>;

struct Internal {
    sizes: Vec<usize>,
    c: Vec<DMatrix<f64>>,
    /// Per constraint, nonempty `(block, entries)` pairs.
    a: Vec<Vec<(usize, BlockEntries)>>,
    /// Per block, the constraints touching it.
    touching: Vec<Vec<usize>>,
    b: DVector<f64>,
    /// Solver block range of each model block.
    ranges: Vec<(usize, usize)>,
    kinds: Vec<BlockKind>,
}

impl Internal {
    fn new(model: &SdpModel) -> Self {
        let mut sizes = Vec::new();
        let mut ranges = Vec::new();
        for b in &model.blocks {
            let start = sizes.len();
            match b.kind {
                BlockKind::Dense => sizes.push(b.size),
                BlockKind::Diagonal => sizes.extend(std::iter::repeat_n(1, b.size)),
            }
            ranges.push((start, sizes.len()));
        }
        let kinds: Vec<BlockKind> = model.blocks.iter().map(|b| b.kind).collect();
        let locate = |block: usize, row: usize, col: usize| -> (usize, usize, usize) {
            match kinds[block] {
                BlockKind::Dense => (ranges[block].0, row, col),
                BlockKind::Diagonal => (ranges[block].0 + row, 0, 0),
            }
        };
        let mut c: Vec<DMatrix<f64>> = sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for e in model.cost.entries() {
            let (sb, r, s) = locate(e.block, e.row, e.col);
            c[sb][(r, s)] += e.value;
            if r != s {
                c[sb][(s, r)] += e.value;
            }
        }
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
        let a: Vec<Vec<(usize, BlockEntries)>> = model
            .constraints
            .iter()
            .enumerate()
            .map(|(k, con)| {
                let mut per: std::collections::BTreeMap<usize, BlockEntries> = Default::default();
                for e in con.matrix.clone().canonical().entries() {
                    let (sb, r, s) = locate(e.block, e.row, e.col);
                    let list = per.entry(sb).or_default();
                    list.push((r, s, e.value));
                    if r != s {
                        list.push((s, r, e.value));
                    }
                }
                for &sb in per.keys() {
                    touching[sb].push(k);
                }
                per.into_iter().collect()
            })
            .collect();
        Self {
            sizes,
            c,
            a,
            touching,
            b: DVector::from_vec(model.rhs()),
            ranges,
            kinds,
        }
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.a.iter().map(|blocks| {
                blocks
                    .iter()
                    .map(|(sb, es)| es.iter().map(|&(r, s, v)| v * x[*sb][(r, s)]).sum::<f64>())
                    .sum()
            }),
        )
    }

    /// `Σ y_k A_k` as dense blocks.
    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, blocks) in self.a.iter().enumerate() {
            let yk = y[k];
            if yk == 0.0 {
                continue;
            }
            for (sb, es) in blocks {
                for &(r, s, v) in es {
                    out[*sb][(r, s)] += yk * v;
                }
            }
        }
        out
    }

    /// `M_kl = tr(A_k X A_l Z^{-1})`.
    fn schur(&self, x: &[DMatrix<f64>], zi: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        let entries_in = |k: usize, sb: usize| -> &BlockEntries {
            &self.a[k].iter().find(|(b, _)| *b == sb).expect("touching list is consistent").1
        };
        for (sb, ks) in self.touching.iter().enumerate() {
            let xb = &x[sb];
            let zb = &zi[sb];
            let n = self.sizes[sb];
            let mut remaining: usize = ks.iter().map(|&k| entries_in(k, sb).len()).sum();
            for (ia, &k) in ks.iter().enumerate() {
                let ak = entries_in(k, sb);
                // pairing entries costs |A_k| per entry of every later A_l;
                // forming X A_k Z^{-1} costs about n^3 once
                let dense = ak.len() * remaining > ak.len() * n + n * n * n + remaining;
                remaining -= ak.len();
                if dense {
                    let mut xa = DMatrix::<f64>::zeros(n, n);
                    for &(p, q, a) in ak {
                        // column q of X A_k gains a·X[:, p]
                        let col = xb.column(p) * a;
                        let mut target = xa.column_mut(q);
                        target += col;
                    }
                    let g = xa * zb;
                    for &l in &ks[ia..] {
                        let acc: f64 = entries_in(l, sb).iter().map(|&(r, s, b)| b * g[(r, s)]).sum();
                        out[(k, l)] += acc;
                        if k != l {
                            out[(l, k)] += acc;
                        }
                    }
                    continue;
                }
                for &l in &ks[ia..] {
                    let al = entries_in(l, sb);
                    let mut acc = 0.0;
                    for &(p, q, a) in ak {
                        for &(r, s, bv) in al {
                            acc += a * bv * xb[(q, r)] * zb[(s, p)];
                        }
                    }
                    out[(k, l)] += acc;
                    if k != l {
                        out[(l, k)] += acc;
                    }
                }
            }
        }
        out
    }
}

fn dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn max_abs(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|m| m.amax()).fold(0.0, f64::max)
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α dX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &[Cholesky<f64, nalgebra::Dyn>], dx: &[DMatrix<f64>]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (c, d) in chol.iter().zip(dx) {
        let l = c.l_dirty();
        let lmin = if d.nrows() == 1 {
            d[(0, 0)] / (l[(0, 0)] * l[(0, 0)])
        } else {
            let l = c.l();
            let t = l.solve_lower_triangular(d).expect("nonsingular factor");
            let w = l
                .solve_lower_triangular(&t.transpose())
                .expect("nonsingular factor");
            SymmetricEigen::new(sym(w)).eigenvalues.min()
        };
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

fn cholesky_all(blocks: &[DMatrix<f64>]) -> Option<Vec<Cholesky<f64, nalgebra::Dyn>>> {
    blocks.iter().map(|b| Cholesky::new(sym(b.clone()))).collect()
}

/// Factor of the Schur matrix, regularized when it is numerically singular.
fn factor_schur(m: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    if m.nrows() == 0 {
        return Cholesky::new(m);
    }
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = m.diagonal().amax().max(1e-300);
    for exp in [-14, -12, -10] {
        let shift = scale * 10f64.powi(exp);
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Some(c);
        }
    }
    None
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
}

/// Solves for the HKM direction with complementarity target
/// `X Z + ΔX ΔZ = R_c`, where `rc_zi = R_c Z^{-1}`.
fn direction(
    p: &Internal,
    schur: &Cholesky<f64, nalgebra::Dyn>,
    x: &[DMatrix<f64>],
    zi: &[DMatrix<f64>],
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    rc_zi: &[DMatrix<f64>],
) -> Direction {
    // dX̂ = R_c Z^{-1} - X Rd Z^{-1} + Σ dy_l X A_l Z^{-1}
    let base: Vec<DMatrix<f64>> = (0..x.len())
        .map(|j| &rc_zi[j] - &x[j] * &rd[j] * &zi[j])
        .collect();
    let rhs = rp - p.apply(&base);
    let dy = schur.solve(&rhs);
    let ady = p.adjoint(&dy);
    let dz: Vec<DMatrix<f64>> = rd.iter().zip(&ady).map(|(r, a)| r - a).collect();
    let dx: Vec<DMatrix<f64>> = (0..x.len())
        .map(|j| sym(&rc_zi[j] - &x[j] * &dz[j] * &zi[j]))
        .collect();
    Direction { dx, dy, dz }
}

fn initial_point(p: &Internal) -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>) {
    let mut x = Vec::with_capacity(p.sizes.len());
    let mut z = Vec::with_capacity(p.sizes.len());
    for (j, &n) in p.sizes.iter().enumerate() {
        let sn = (n as f64).sqrt();
        let mut xi = 10f64.max(sn);
        let mut eta = 10f64.max(sn).max(p.c[j].norm());
        for (k, blocks) in p.a.iter().enumerate() {
            if let Some((_, es)) = blocks.iter().find(|(sb, _)| *sb == j) {
                let nrm = es.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
                xi = xi.max(sn * (1.0 + p.b[k].abs()) / (1.0 + nrm));
                eta = eta.max(nrm);
            }
        }
        x.push(DMatrix::identity(n, n) * xi);
        z.push(DMatrix::identity(n, n) * eta);
    }
    (x, DVector::zeros(p.m()), z)
}

const DIVERGENCE_TOL: f64 = 1e-8;

/// Solves `model`; inequality constraints are first converted to
/// equalities with a diagonal slack block.
pub fn solve(model: &SdpModel, opts: &SolverOptions) -> Result<Solution, SdpError> {
    opts.validate()?;
    model.validate()?;
    let original_blocks = model.blocks.len();
    let eq = model.to_equality_form();
    let p = Internal::new(&eq);
    let n = p.n().max(1) as f64;
    let b_scale = p.b.amax().max(1.0);
    let c_scale = max_abs(&p.c).max(1.0);
    let c_norm2: f64 = p
        .c
        .iter()
        .map(|m| if m.nrows() == 0 { 0.0 } else { m.norm() })
        .sum();

    let (mut x, mut y, mut z) = initial_point(&p);
    let assemble = |blocks: &[DMatrix<f64>]| -> Vec<DMatrix<f64>> {
        (0..original_blocks)
            .map(|b| {
                let (s, e) = p.ranges[b];
                match p.kinds[b] {
                    BlockKind::Dense => blocks[s].clone(),
                    BlockKind::Diagonal => {
                        DMatrix::from_diagonal(&DVector::from_iterator(e - s, (s..e).map(|i| blocks[i][(0, 0)])))
                    }
                }
            })
            .collect()
    };
    let mut iterates = Vec::new();
    let mut history = Vec::new();
    let mut best: Option<(f64, Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>)> = None;
    let mut status = Status::MaxIter;
    let mut certificate = None;
    let mut stalls = 0;
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let ax = p.apply(&x);
        let rp = &p.b - &ax;
        let aty = p.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = (0..x.len()).map(|j| &p.c[j] - &aty[j] - &z[j]).collect();
        let pobj = dot(&p.c, &x);
        let dobj = p.b.dot(&y);
        let mu = dot(&x, &z) / n;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.amax() / b_scale;
        let dinf = max_abs(&rd) / c_scale;
        history.push(IterateLog {
            iteration: iter,
            primal_objective: pobj,
            dual_objective: dobj,
            relative_gap: gap,
            primal_residual: rp.amax(),
            dual_residual: max_abs(&rd),
            mu,
            primal_step: 0.0,
            dual_step: 0.0,
        });
        if opts.record_iterates {
            iterates.push(Iterate {
                x: assemble(&x),
                y: y.iter().copied().collect(),
                z: assemble(&z),
            });
        }
        let merit = gap.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x.clone(), y.clone(), z.clone()));
        }
        if gap <= opts.tol_gap && pinf <= opts.tol_feas && dinf <= opts.tol_feas {
            status = Status::Optimal;
            break;
        }
        // b·y → ∞ with Σ ȳ A ⪯ (C - Rd)/(b·y): primal infeasible
        if dobj > 0.0 {
            let cert = (c_norm2 + rd.iter().map(|m| m.norm()).sum::<f64>()) / dobj;
            if cert <= DIVERGENCE_TOL {
                status = Status::Infeasible;
                certificate = Some(cert);
                break;
            }
        }
        // <C, X> → -∞ with A(X̄) → 0: primal unbounded
        if pobj < 0.0 {
            let cert = ax.amax() / -pobj;
            if cert <= DIVERGENCE_TOL {
                status = Status::Unbounded;
                certificate = Some(cert);
                break;
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(xc) = cholesky_all(&x) else {
            status = Status::Numerical;
            break;
        };
        let Some(zc) = cholesky_all(&z) else {
            status = Status::Numerical;
            break;
        };
        let zi: Vec<DMatrix<f64>> = zc.iter().map(|c| sym(c.inverse())).collect();
        let Some(schur) = factor_schur(p.schur(&x, &zi)) else {
            status = Status::Numerical;
            break;
        };
        if schur.l_dirty().iter().any(|v| !v.is_finite()) {
            status = Status::Numerical;
            break;
        }

        // predictor: R_c = -XZ, so R_c Z^{-1} = -X
        let neg_x: Vec<DMatrix<f64>> = x.iter().map(|m| -m).collect();
        let pred = direction(&p, &schur, &x, &zi, &rp, &rd, &neg_x);
        let ap = (opts.step_fraction * max_step(&xc, &pred.dx)).min(1.0);
        let ad = (opts.step_fraction * max_step(&zc, &pred.dz)).min(1.0);
        let mut mu_aff = 0.0;
        for j in 0..x.len() {
            let xa = &x[j] + &pred.dx[j] * ap;
            let za = &z[j] + &pred.dz[j] * ad;
            mu_aff += xa.dot(&za);
        }
        mu_aff /= n;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // corrector: R_c = σμI - XZ - dX_a dZ_a
        let rc_zi: Vec<DMatrix<f64>> = (0..x.len())
            .map(|j| &zi[j] * (sigma * mu) - &x[j] - &pred.dx[j] * &pred.dz[j] * &zi[j])
            .collect();
        let corr = direction(&p, &schur, &x, &zi, &rp, &rd, &rc_zi);
        let ap = (opts.step_fraction * max_step(&xc, &corr.dx)).min(1.0);
        let ad = (opts.step_fraction * max_step(&zc, &corr.dz)).min(1.0);
        if !(ap.is_finite() && ad.is_finite())
            || corr.dy.iter().any(|v| !v.is_finite())
        {
            status = Status::Numerical;
            break;
        }
        for j in 0..x.len() {
            x[j] += &corr.dx[j] * ap;
            z[j] += &corr.dz[j] * ad;
        }
        y += &corr.dy * ad;
        // steps are logged on the iterate they start from
        if let Some(last) = history.last_mut() {
            last.primal_step = ap;
            last.dual_step = ad;
        }
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                status = Status::Numerical;
                break;
            }
        } else {
            stalls = 0;
        }
    }

    if matches!(status, Status::MaxIter | Status::Numerical) {
        if let Some((_, bx, by, bz)) = best {
            x = bx;
            y = by;
            z = bz;
        }
    }
    let pobj = dot(&p.c, &x);
    let dobj = p.b.dot(&y);
    let rp = &p.b - p.apply(&x);
    let aty = p.adjoint(&y);
    let rd: Vec<DMatrix<f64>> = (0..x.len()).map(|j| &p.c[j] - &aty[j] - &z[j]).collect();

    Ok(Solution {
        status,
        x: assemble(&x),
        y: y.iter().copied().collect(),
        z: assemble(&z),
        primal_objective: pobj,
        dual_objective: dobj,
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
        primal_residual: rp.amax(),
        dual_residual: max_abs(&rd),
        iterations,
        history,
        certificate_residual: certificate,
        iterates,
    })
}
