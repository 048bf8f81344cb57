//! Moment-matrix relaxations.
//!
//! A level-`d` relaxation replaces positive functionals on the algebra by
//! vectors of moments `y_w = ω(w)` indexed by normal-form words. The moment
//! matrix `Γ_ij = y(nf(γ_i γ_j*))` must be positive semidefinite, which is
//! the dual of restricting certificates to sums of squares of elements in
//! the span of `γ`. Products that rewrite to the same normal form share a
//! moment; this is how the kernel of the moment map is annihilated.

mod basis;
mod build;
mod decompose;
mod driver;
mod jnc;
mod moment;

pub use basis::{explicit_basis, generate_basis, generate_basis_with_cap, Basis};
pub use build::{
    build_relaxation, build_relaxation_with, LocalizingMatrix, MomentCheck, Relaxation,
    RelaxationResult,
};
pub use decompose::{decompose_in_q, QDecomposition};
pub use driver::{solve_level, solve_levels, LevelReport};
pub use jnc::{jnc_polygon, jnc_support, JncPolygon, SupportLine};
pub use moment::{moment_structure, moment_structure_with, MomentStructure};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::ipm::Status;
use crate::sdp::SdpError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxationError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("basis at level {level} exceeds {cap} words; lower the level or raise basis_cap")]
    BasisTooLarge { level: usize, cap: usize },
    #[error(
        "{what} is not representable at level {level}: no moment-matrix entry reaches `{word}`; raise the level"
    )]
    NotRepresentable {
        what: String,
        word: String,
        level: usize,
    },
    #[error("objective is empty")]
    EmptyObjective,
    #[error("expected {expected} moments, found {found}")]
    MomentLength { expected: usize, found: usize },
    #[error("solver finished with status {0}")]
    Solver(Status),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}
