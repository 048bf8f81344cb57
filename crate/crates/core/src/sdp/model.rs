use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SdpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    Dense,
    /// Only diagonal entries; a nonnegative orthant of this size.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub size: usize,
    pub kind: BlockKind,
}

impl BlockSpec {
    pub const fn dense(size: usize) -> Self {
        Self {
            size,
            kind: BlockKind::Dense,
        }
    }

    pub const fn diagonal(size: usize) -> Self {
        Self {
            size,
            kind: BlockKind::Diagonal,
        }
    }
}

/// Upper-triangle entry of a symmetric block matrix (`row <= col`, 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Sparse symmetric block-diagonal matrix stored by upper-triangle entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockSparse {
    entries: Vec<SymEntry>,
}

impl BlockSparse {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[SymEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `value` at `(row, col)` and its mirror. Either triangle may be given.
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        if value != 0.0 {
            self.entries.push(SymEntry {
                block,
                row,
                col,
                value,
            });
        }
    }

    /// Merges duplicate positions, drops zeros and sorts entries.
    pub fn canonicalize(&mut self) {
        self.entries
            .sort_by_key(|e| (e.block, e.row, e.col));
        let mut merged: Vec<SymEntry> = Vec::with_capacity(self.entries.len());
        for e in self.entries.drain(..) {
            match merged.last_mut() {
                Some(last) if (last.block, last.row, last.col) == (e.block, e.row, e.col) => {
                    last.value += e.value;
                }
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.value != 0.0);
        self.entries = merged;
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Trace inner product with dense symmetric block matrices.
    pub fn dot(&self, blocks: &[DMatrix<f64>]) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let x = blocks[e.block][(e.row, e.col)];
                if e.row == e.col {
                    e.value * x
                } else {
                    e.value * (x + blocks[e.block][(e.col, e.row)])
                }
            })
            .sum()
    }

    /// Adds `scale · self` into the dense block matrices.
    pub fn add_to_dense(&self, scale: f64, blocks: &mut [DMatrix<f64>]) {
        for e in &self.entries {
            let v = scale * e.value;
            blocks[e.block][(e.row, e.col)] += v;
            if e.row != e.col {
                blocks[e.block][(e.col, e.row)] += v;
            }
        }
    }

    pub fn to_dense(&self, blocks: &[BlockSpec]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = blocks
            .iter()
            .map(|b| DMatrix::zeros(b.size, b.size))
            .collect();
        self.add_to_dense(1.0, &mut out);
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let w = if e.row == e.col { 1.0 } else { 2.0 };
                w * e.value * e.value
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub matrix: BlockSparse,
    pub sense: Sense,
    pub rhs: f64,
}

/// Block-diagonal standard-form SDP:
///
/// ```text
/// minimize   <C, X>
/// subject to <A_k, X>  (<= | >= | =)  b_k
///            X = diag(X_1, ..., X_p) ⪰ 0
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpModel {
    pub blocks: Vec<BlockSpec>,
    pub cost: BlockSparse,
    pub constraints: Vec<LinearConstraint>,
}

impl SdpModel {
    pub fn new(blocks: Vec<BlockSpec>) -> Self {
        Self {
            blocks,
            ..Self::default()
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn total_dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn is_equality_form(&self) -> bool {
        self.constraints.iter().all(|c| c.sense == Sense::Eq)
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    /// Checks block sizes, entry bounds, triangle storage and finiteness.
    pub fn validate(&self) -> Result<(), SdpError> {
        if let Some(i) = self.blocks.iter().position(|b| b.size == 0) {
            return Err(SdpError::DimensionMismatch(format!("block {} has size 0", i + 1)));
        }
        let check = |m: &BlockSparse, what: &str| -> Result<(), SdpError> {
            for e in m.entries() {
                let spec = self.blocks.get(e.block).ok_or_else(|| {
                    SdpError::DimensionMismatch(format!("{what}: block {} out of range", e.block + 1))
                })?;
                if e.row > e.col {
                    return Err(SdpError::NonSymmetric(format!(
                        "{what}: lower-triangle entry ({}, {})",
                        e.row + 1,
                        e.col + 1
                    )));
                }
                if e.col >= spec.size {
                    return Err(SdpError::DimensionMismatch(format!(
                        "{what}: entry ({}, {}) outside block {} of size {}",
                        e.row + 1,
                        e.col + 1,
                        e.block + 1,
                        spec.size
                    )));
                }
                if spec.kind == BlockKind::Diagonal && e.row != e.col {
                    return Err(SdpError::DimensionMismatch(format!(
                        "{what}: off-diagonal entry in diagonal block {}",
                        e.block + 1
                    )));
                }
                if !e.value.is_finite() {
                    return Err(SdpError::NonFinite(what.to_string()));
                }
            }
            Ok(())
        };
        check(&self.cost, "cost")?;
        for (k, c) in self.constraints.iter().enumerate() {
            check(&c.matrix, &format!("constraint {}", k + 1))?;
            if !c.rhs.is_finite() {
                return Err(SdpError::NonFinite(format!("rhs {}", k + 1)));
            }
        }
        Ok(())
    }

    /// Converts inequalities to equalities with a trailing diagonal slack
    /// block (`<= b` gains `+ s`, `>= b` gains `- s`, `s >= 0`). Returns the
    /// model unchanged if it has no inequalities.
    pub fn to_equality_form(&self) -> SdpModel {
        let slacks: Vec<usize> = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.sense != Sense::Eq)
            .map(|(k, _)| k)
            .collect();
        if slacks.is_empty() {
            return self.clone();
        }
        let mut out = self.clone();
        let slack_block = out.blocks.len();
        out.blocks.push(BlockSpec::diagonal(slacks.len()));
        for (s, &k) in slacks.iter().enumerate() {
            let c = &mut out.constraints[k];
            let sign = if c.sense == Sense::Le { 1.0 } else { -1.0 };
            c.matrix.add(slack_block, s, s, sign);
            c.sense = Sense::Eq;
        }
        out
    }

    /// Objective value `<C, X>`.
    pub fn objective(&self, x: &[DMatrix<f64>]) -> f64 {
        self.cost.dot(x)
    }
}
