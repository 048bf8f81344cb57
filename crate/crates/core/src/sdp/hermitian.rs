use nalgebra::DMatrix;
use num_complex::Complex64;

use super::model::{BlockKind, BlockSparse, BlockSpec, LinearConstraint, SdpModel, Sense};
use super::SdpError;

/// Upper-triangle entry of a Hermitian block matrix; the lower triangle is
/// the conjugate mirror.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: Complex64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HermitianSparse {
    entries: Vec<HermEntry>,
}

impl HermitianSparse {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[HermEntry] {
        &self.entries
    }

    /// Adds `value` at `(row, col)` and `conj(value)` at `(col, row)`.
    /// Lower-triangle input is conjugated into the upper triangle.
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: Complex64) {
        let (row, col, value) = if row <= col {
            (row, col, value)
        } else {
            (col, row, value.conj())
        };
        if value != Complex64::new(0.0, 0.0) {
            self.entries.push(HermEntry {
                block,
                row,
                col,
                value,
            });
        }
    }

    pub fn canonicalize(&mut self) {
        self.entries
            .sort_by_key(|e| (e.block, e.row, e.col));
        let mut merged: Vec<HermEntry> = Vec::with_capacity(self.entries.len());
        for e in self.entries.drain(..) {
            match merged.last_mut() {
                Some(last) if (last.block, last.row, last.col) == (e.block, e.row, e.col) => {
                    last.value += e.value;
                }
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.value.norm() > 0.0);
        self.entries = merged;
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.value.im == 0.0)
    }

    pub fn to_dense(&self, blocks: &[BlockSpec]) -> Vec<DMatrix<Complex64>> {
        let mut out: Vec<DMatrix<Complex64>> = blocks
            .iter()
            .map(|b| DMatrix::zeros(b.size, b.size))
            .collect();
        for e in &self.entries {
            out[e.block][(e.row, e.col)] += e.value;
            if e.row != e.col {
                out[e.block][(e.col, e.row)] += e.value.conj();
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianConstraint {
    pub matrix: HermitianSparse,
    pub sense: Sense,
    pub rhs: f64,
}

/// Standard-form SDP over Hermitian PSD blocks:
/// minimize `Re<C, X>` subject to `Re<A_k, X> ⋚ b_k`, `X ⪰ 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HermitianModel {
    pub blocks: Vec<BlockSpec>,
    pub cost: HermitianSparse,
    pub constraints: Vec<HermitianConstraint>,
}

impl HermitianModel {
    pub fn new(blocks: Vec<BlockSpec>) -> Self {
        Self {
            blocks,
            ..Self::default()
        }
    }

    pub fn is_real(&self) -> bool {
        self.cost.is_real() && self.constraints.iter().all(|c| c.matrix.is_real())
    }

    fn validate(&self) -> Result<(), SdpError> {
        let check = |m: &HermitianSparse, what: &str| -> Result<(), SdpError> {
            for e in m.entries() {
                let spec = self.blocks.get(e.block).ok_or_else(|| {
                    SdpError::DimensionMismatch(format!("{what}: block {} out of range", e.block + 1))
                })?;
                if e.col >= spec.size {
                    return Err(SdpError::DimensionMismatch(format!(
                        "{what}: entry outside block {}",
                        e.block + 1
                    )));
                }
                if e.row == e.col && e.value.im != 0.0 {
                    return Err(SdpError::NonHermitian(format!(
                        "{what}: complex diagonal entry in block {}",
                        e.block + 1
                    )));
                }
                if spec.kind == BlockKind::Diagonal && (e.row != e.col) {
                    return Err(SdpError::NonHermitian(format!(
                        "{what}: off-diagonal entry in diagonal block {}",
                        e.block + 1
                    )));
                }
            }
            Ok(())
        };
        check(&self.cost, "cost")?;
        for (k, c) in self.constraints.iter().enumerate() {
            check(&c.matrix, &format!("constraint {}", k + 1))?;
        }
        Ok(())
    }

    /// Drops imaginary parts without doubling blocks. Only valid when
    /// [`HermitianModel::is_real`] holds, in which case the real symmetric
    /// program has the same optimum (the real part of a Hermitian PSD
    /// matrix is PSD).
    pub fn to_real(&self) -> Result<SdpModel, SdpError> {
        self.validate()?;
        if !self.is_real() {
            return Err(SdpError::NonHermitian(
                "model has complex data; realify it instead".into(),
            ));
        }
        let conv = |m: &HermitianSparse| {
            let mut out = BlockSparse::new();
            for e in m.entries() {
                out.add(e.block, e.row, e.col, e.value.re);
            }
            out.canonical()
        };
        Ok(SdpModel {
            blocks: self.blocks.clone(),
            cost: conv(&self.cost),
            constraints: self
                .constraints
                .iter()
                .map(|c| LinearConstraint {
                    matrix: conv(&c.matrix),
                    sense: c.sense,
                    rhs: c.rhs,
                })
                .collect(),
        })
    }
}

fn realify_sparse(m: &HermitianSparse, blocks: &[BlockSpec]) -> BlockSparse {
    let mut out = BlockSparse::new();
    for e in m.entries() {
        let spec = blocks[e.block];
        if spec.kind == BlockKind::Diagonal {
            out.add(e.block, e.row, e.col, e.value.re);
            continue;
        }
        let k = spec.size;
        let (i, j, v) = (e.row, e.col, e.value);
        out.add(e.block, i, j, v.re);
        out.add(e.block, k + i, k + j, v.re);
        if i != j {
            // [[Re, -Im], [Im, Re]] with M_ji = conj(M_ij)
            out.add(e.block, i, k + j, -v.im);
            out.add(e.block, j, k + i, v.im);
        }
    }
    out.canonical()
}

/// Maps every `k×k` Hermitian block to the `2k×2k` real symmetric block
/// `[[Re, -Im], [Im, Re]]`. Diagonal blocks are kept as they are.
///
/// Values are preserved through the embedding `X ↦ ½[[Re X, -Im X], [Im X, Re X]]`;
/// [`complexify`] maps any real PSD solution back to a Hermitian PSD one
/// with the same objective and constraint values.
pub fn realify(model: &HermitianModel) -> Result<SdpModel, SdpError> {
    model.validate()?;
    let blocks: Vec<BlockSpec> = model
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Dense => BlockSpec::dense(2 * b.size),
            BlockKind::Diagonal => *b,
        })
        .collect();
    Ok(SdpModel {
        cost: realify_sparse(&model.cost, &model.blocks),
        constraints: model
            .constraints
            .iter()
            .map(|c| LinearConstraint {
                matrix: realify_sparse(&c.matrix, &model.blocks),
                sense: c.sense,
                rhs: c.rhs,
            })
            .collect(),
        blocks,
    })
}

/// Dense `[[Re, -Im], [Im, Re]]` of a complex matrix.
pub fn realify_matrix(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let v = m[(i, j)];
            out[(i, j)] = v.re;
            out[(r + i, c + j)] = v.re;
            out[(i, c + j)] = -v.im;
            out[(r + i, j)] = v.im;
        }
    }
    out
}

/// Inverse of the realified embedding: `(X11 + X22) + i (X21 - X12)`.
pub fn complexify(x: &DMatrix<f64>) -> DMatrix<Complex64> {
    let k = x.nrows() / 2;
    DMatrix::from_fn(k, k, |i, j| {
        Complex64::new(
            x[(i, j)] + x[(k + i, k + j)],
            x[(k + i, j)] - x[(i, k + j)],
        )
    })
}
