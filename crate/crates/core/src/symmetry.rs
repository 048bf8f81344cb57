//! Symmetry reduction of single-block SDPs under a finite group.
//!
//! If every data matrix commutes with a unitary representation `Φ`, an
//! optimal `X` can be averaged into the commutant `{X : Φ(g) X = X Φ(g)}`.
//! With a Hilbert–Schmidt orthonormal Hermitian basis `B_1..B_m` of the
//! commutant, `X = Σ x_k B_k` with real `x`, and `X ⪰ 0` is equivalent to
//! positivity of left multiplication by `X` on the commutant, an `m×m`
//! matrix built from the structure constants `λ_ijk = <B_k, B_i B_j>`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::exec::{map_indices, Execution};
use crate::sdp::{
    AffineEntry, BlockKind, BlockSpec, ComplexAffine, Lmi, LmiBlock, LmiReduction, Presolve,
    SdpError, SdpModel, Sense,
};

/// Tolerance for unitarity, closure and invariance checks.
pub const GROUP_TOL: f64 = 1e-8;
/// Rank tolerance of the Gram–Schmidt step.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("representation has no elements")]
    Empty,
    #[error("element {index} is not unitary (residual {residual:e})")]
    NotUnitary { index: usize, residual: f64 },
    #[error("representation does not contain the identity")]
    MissingIdentity,
    #[error("product of elements {left} and {right} is not in the set")]
    NotClosed { left: usize, right: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{matrix} is not invariant: element {element} gives residual {residual:e}")]
    NotInvariant {
        matrix: String,
        element: usize,
        residual: f64,
    },
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

type CMat = DMatrix<Complex64>;

fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// A finite set of unitaries closed under multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRep {
    elements: Vec<CMat>,
}

impl GroupRep {
    /// Validates unitarity, the identity and closure, all to [`GROUP_TOL`].
    pub fn new(elements: Vec<CMat>) -> Result<Self, SymmetryError> {
        let Some(first) = elements.first() else {
            return Err(SymmetryError::Empty);
        };
        let d = first.nrows();
        let id = CMat::identity(d, d);
        for (i, u) in elements.iter().enumerate() {
            if u.shape() != (d, d) {
                return Err(SymmetryError::DimensionMismatch(format!(
                    "element {} is {}x{}, expected {d}x{d}",
                    i + 1,
                    u.nrows(),
                    u.ncols()
                )));
            }
            let residual = frobenius(&(u * u.adjoint() - &id));
            if residual > GROUP_TOL {
                return Err(SymmetryError::NotUnitary {
                    index: i + 1,
                    residual,
                });
            }
        }
        let find = |m: &CMat| elements.iter().position(|e| frobenius(&(e - m)) <= GROUP_TOL);
        if find(&id).is_none() {
            return Err(SymmetryError::MissingIdentity);
        }
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                if find(&(a * b)).is_none() {
                    return Err(SymmetryError::NotClosed {
                        left: i + 1,
                        right: j + 1,
                    });
                }
            }
        }
        Ok(Self { elements })
    }

    pub fn trivial(d: usize) -> Self {
        Self {
            elements: vec![CMat::identity(d, d)],
        }
    }

    /// Permutation matrices `P e_i = e_{σ(i)}` for each listed permutation.
    pub fn from_permutations(perms: &[Vec<usize>]) -> Result<Self, SymmetryError> {
        let elements = perms
            .iter()
            .map(|p| {
                let d = p.len();
                let mut m = CMat::zeros(d, d);
                for (i, &j) in p.iter().enumerate() {
                    if j >= d {
                        return Err(SymmetryError::DimensionMismatch(format!(
                            "permutation entry {j} out of range"
                        )));
                    }
                    m[(j, i)] = Complex64::new(1.0, 0.0);
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    /// `(1/|G|) Σ_g Φ(g) M Φ(g)†`.
    pub fn reynolds(&self, m: &CMat) -> CMat {
        let mut acc = CMat::zeros(m.nrows(), m.ncols());
        for u in &self.elements {
            acc += u * m * u.adjoint();
        }
        acc / Complex64::new(self.order() as f64, 0.0)
    }

    /// Worst `‖Φ(g) M Φ(g)† - M‖_F` and the element attaining it (1-based).
    pub fn invariance_residual(&self, m: &CMat) -> (f64, usize) {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, u)| (frobenius(&(u * m * u.adjoint() - m)), i + 1))
            .fold((0.0, 1), |a, b| if b.0 > a.0 { b } else { a })
    }
}

/// Orthonormal Hermitian basis of the commutant with its structure
/// constants.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantBasis {
    pub matrices: Vec<CMat>,
    /// `λ_ijk`, stored at `(i * m + j) * m + k`.
    lambda: Vec<Complex64>,
}

impl InvariantBasis {
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn lambda(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let m = self.dim();
        self.lambda[(i * m + j) * m + k]
    }

    /// `(L_k)_ij = λ_ijk`.
    pub fn l_matrix(&self, k: usize) -> CMat {
        let m = self.dim();
        CMat::from_fn(m, m, |i, j| self.lambda(i, j, k))
    }

    /// Matrix of left multiplication by `B_k` on the commutant:
    /// `(L̃_k)_{l,j} = λ_kjl`. Hermitian because `B_k` is.
    pub fn regular(&self, k: usize) -> CMat {
        let m = self.dim();
        CMat::from_fn(m, m, |l, j| self.lambda(k, j, l))
    }

    /// `max |<B_i, B_j> - δ_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let ip = hs_inner(&self.matrices[i], &self.matrices[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `max ‖B_i B_j - Σ_k λ_ijk B_k‖_F`.
    pub fn reconstruction_residual(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut r = &self.matrices[i] * &self.matrices[j];
                for k in 0..m {
                    r -= &self.matrices[k] * self.lambda(i, j, k);
                }
                worst = worst.max(frobenius(&r));
            }
        }
        worst
    }

    /// `max ‖Φ(g) B_i - B_i Φ(g)‖_F`.
    pub fn commutation_residual(&self, rep: &GroupRep) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.matrices {
            for u in rep.elements() {
                worst = worst.max(frobenius(&(u * b - b * u)));
            }
        }
        worst
    }

    /// `Σ_k x_k B_k`.
    pub fn combine(&self, x: &[f64]) -> CMat {
        let d = self.matrices.first().map_or(0, |b| b.nrows());
        let mut out = CMat::zeros(d, d);
        for (b, &xk) in self.matrices.iter().zip(x) {
            out += b * Complex64::new(xk, 0.0);
        }
        out
    }
}

/// `tr(A† B)`
fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn invariant_basis(rep: &GroupRep) -> InvariantBasis {
    invariant_basis_with(rep, Execution::default())
}

/// Reynolds-averages the Hermitian matrix units, orthonormalizes them
/// under the real inner product `Re tr(A B)` and computes structure
/// constants.
pub fn invariant_basis_with(rep: &GroupRep, exec: Execution) -> InvariantBasis {
    let d = rep.dim();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut seeds: Vec<(usize, usize, u8)> = Vec::with_capacity(d * d);
    for k in 0..d {
        seeds.push((k, k, 0));
        for l in k + 1..d {
            seeds.push((k, l, 1));
            seeds.push((k, l, 2));
        }
    }
    let averaged: Vec<CMat> = map_indices(seeds.len(), exec, |t| {
        let (k, l, kind) = seeds[t];
        let mut e = CMat::zeros(d, d);
        match kind {
            0 => e[(k, k)] = Complex64::new(1.0, 0.0),
            1 => {
                e[(k, l)] = Complex64::new(s, 0.0);
                e[(l, k)] = Complex64::new(s, 0.0);
            }
            _ => {
                e[(k, l)] = Complex64::new(0.0, s);
                e[(l, k)] = Complex64::new(0.0, -s);
            }
        }
        rep.reynolds(&e)
    });

    let mut basis: Vec<CMat> = Vec::new();
    for v in averaged {
        let mut w = v;
        // two passes keep the basis orthonormal to working precision
        for _ in 0..2 {
            for b in &basis {
                let c = hs_inner(b, &w).re;
                w -= b * Complex64::new(c, 0.0);
            }
        }
        let nrm = frobenius(&w);
        if nrm > RANK_TOL {
            let w = w / Complex64::new(nrm, 0.0);
            // re-Hermitize against rounding
            basis.push((&w + w.adjoint()) * Complex64::new(0.5, 0.0));
        }
    }

    let m = basis.len();
    let rows: Vec<Vec<Complex64>> = map_indices(m, exec, |i| {
        let mut out = Vec::with_capacity(m * m);
        for j in 0..m {
            let p = &basis[i] * &basis[j];
            for bk in &basis {
                out.push(hs_inner(bk, &p));
            }
        }
        out
    });
    InvariantBasis {
        matrices: basis,
        lambda: rows.into_iter().flatten().collect(),
    }
}

/// A reduced model together with what is needed to read its values.
#[derive(Clone, Debug)]
pub struct ReducedSdp {
    pub basis: InvariantBasis,
    pub lmi: Lmi,
    pub reduction: LmiReduction,
}

impl ReducedSdp {
    pub fn model(&self) -> &SdpModel {
        &self.reduction.model
    }

    /// Optimum of the original model from the reduced model's primal value.
    pub fn original_value(&self, reduced_pobj: f64) -> f64 {
        self.reduction.bound_from_primal(reduced_pobj)
    }

    /// Coordinates `x` of the invariant solution from reduced multipliers.
    pub fn coordinates(&self, y: &[f64]) -> Vec<f64> {
        self.reduction.recover(y)
    }

    pub fn presolve(&self) -> &Presolve {
        &self.reduction.presolve
    }
}

fn dense_complex(model: &SdpModel, m: &crate::sdp::BlockSparse) -> CMat {
    let d = model.blocks[0].size;
    let mut out = CMat::zeros(d, d);
    for e in m.entries() {
        out[(e.row, e.col)] += Complex64::new(e.value, 0.0);
        if e.row != e.col {
            out[(e.col, e.row)] += Complex64::new(e.value, 0.0);
        }
    }
    out
}

pub fn reduce_sdp(model: &SdpModel, rep: &GroupRep) -> Result<ReducedSdp, SymmetryError> {
    reduce_sdp_with(model, rep, Execution::default())
}

/// Substitutes `X = Σ x_k B_k` into a single dense-block model. Positivity
/// becomes `Σ x_k L̃_k ⪰ 0`, the cost `c_k = Re tr(C B_k)` and constraint
/// rows `a_jk = Re tr(A_j B_k)`.
pub fn reduce_sdp_with(model: &SdpModel, rep: &GroupRep, exec: Execution) -> Result<ReducedSdp, SymmetryError> {
    model.validate()?;
    if model.blocks.len() != 1 || model.blocks[0].kind != BlockKind::Dense {
        return Err(SymmetryError::UnsupportedModel(
            "symmetry reduction needs a single dense block".into(),
        ));
    }
    if model.blocks[0].size != rep.dim() {
        return Err(SymmetryError::DimensionMismatch(format!(
            "block size {} but representation dimension {}",
            model.blocks[0].size,
            rep.dim()
        )));
    }
    let mut data = vec![("cost".to_string(), dense_complex(model, &model.cost))];
    for (k, c) in model.constraints.iter().enumerate() {
        data.push((format!("constraint {}", k + 1), dense_complex(model, &c.matrix)));
    }
    let mut worst: Option<(f64, String, usize)> = None;
    for (name, f) in &data {
        let (residual, element) = rep.invariance_residual(f);
        if residual > GROUP_TOL * frobenius(f).max(1.0) && worst.as_ref().is_none_or(|w| residual > w.0) {
            worst = Some((residual, name.clone(), element));
        }
    }
    if let Some((residual, matrix, element)) = worst {
        return Err(SymmetryError::NotInvariant {
            matrix,
            element,
            residual,
        });
    }

    let basis = invariant_basis_with(rep, exec);
    let m = basis.dim();
    let coords = |f: &CMat| -> BTreeMap<usize, f64> {
        basis
            .matrices
            .iter()
            .enumerate()
            .map(|(k, b)| (k, hs_inner(f, b).re))
            .filter(|(_, v)| *v != 0.0)
            .collect()
    };
    let mut lmi = Lmi::new(m);
    lmi.objective = coords(&data[0].1);
    let mut psd = LmiBlock::new(BlockSpec::dense(m));
    for l in 0..m {
        for j in l..m {
            let mut e = ComplexAffine::default();
            for k in 0..m {
                e.add_term(k, basis.lambda(k, j, l));
            }
            if l == j {
                e.terms.values_mut().for_each(|v| v.im = 0.0);
            }
            psd.entries.push(AffineEntry { row: l, col: j, expr: e });
        }
    }
    lmi.blocks.push(psd);
    let mut diag = Vec::new();
    for (c, (_, a)) in model.constraints.iter().zip(&data[1..]) {
        let row = coords(a);
        match c.sense {
            Sense::Eq => lmi.add_equality(row, c.rhs),
            Sense::Ge | Sense::Le => {
                let sign = if c.sense == Sense::Ge { 1.0 } else { -1.0 };
                let mut e = ComplexAffine::constant(Complex64::new(-sign * c.rhs, 0.0));
                for (k, v) in row {
                    e.add_term(k, Complex64::new(sign * v, 0.0));
                }
                diag.push(e);
            }
        }
    }
    if !diag.is_empty() {
        let mut block = LmiBlock::new(BlockSpec::diagonal(diag.len()));
        for (i, expr) in diag.into_iter().enumerate() {
            block.entries.push(AffineEntry { row: i, col: i, expr });
        }
        lmi.blocks.push(block);
    }
    let reduction = lmi.reduce()?;
    Ok(ReducedSdp {
        basis,
        lmi,
        reduction,
    })
}

/// Reads `1`, `-0.5`, `0.5+0.25i`, `2i` or `-i`.
pub(crate) fn parse_complex(tok: &str) -> Option<Complex64> {
    let t = tok.trim();
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or leading
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(p) => (&body[..p], &body[p..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => s.parse().ok()?,
        };
        Some(Complex64::new(re.parse().ok()?, im))
    } else {
        t.parse().ok().map(|v| Complex64::new(v, 0.0))
    }
}

/// Reads representation matrices: one matrix per stanza, stanzas
/// separated by blank lines, rows as whitespace-separated entries
/// (`1`, `-0.5`, `0.5+0.25i`, `2i`). `#` starts a comment.
pub fn parse_rep(text: &str) -> Result<GroupRep, SymmetryError> {
    let mut stanzas: Vec<Vec<(usize, Vec<Complex64>)>> = vec![Vec::new()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            if raw.trim().is_empty() && !stanzas.last().is_some_and(Vec::is_empty) {
                stanzas.push(Vec::new());
            }
            continue;
        }
        let row = content
            .split_whitespace()
            .map(|t| {
                parse_complex(t).ok_or_else(|| SymmetryError::Parse {
                    line,
                    message: format!("cannot read `{t}` as a number"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        stanzas.last_mut().expect("non-empty").push((line, row));
    }
    let mut elements = Vec::new();
    for rows in stanzas.into_iter().filter(|s| !s.is_empty()) {
        let d = rows.len();
        for (line, r) in &rows {
            if r.len() != d {
                return Err(SymmetryError::Parse {
                    line: *line,
                    message: format!("row has {} entries, stanza has {d} rows", r.len()),
                });
            }
        }
        elements.push(CMat::from_fn(d, d, |i, j| rows[i].1[j]));
    }
    if let Some(first) = elements.first() {
        let d = first.nrows();
        if let Some(i) = elements.iter().position(|e| e.nrows() != d) {
            return Err(SymmetryError::DimensionMismatch(format!(
                "matrix {} has dimension {}, the first has {d}",
                i + 1,
                elements[i].nrows()
            )));
        }
    }
    GroupRep::new(elements)
}

/// Text form accepted by [`parse_rep`].
pub fn format_rep(rep: &GroupRep) -> String {
    let mut out = String::new();
    for (g, u) in rep.elements().iter().enumerate() {
        if g > 0 {
            out.push('\n');
        }
        for i in 0..u.nrows() {
            let row: Vec<String> = (0..u.ncols())
                .map(|j| {
                    let v = u[(i, j)];
                    if v.im == 0.0 {
                        format!("{:?}", v.re)
                    } else {
                        format!("{:?}{:+?}i", v.re, v.im)
                    }
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}
