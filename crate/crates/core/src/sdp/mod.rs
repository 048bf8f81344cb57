//! Block SDP models, Hermitian realification, linear matrix inequalities
//! and the SDPA sparse text format.

mod hermitian;
mod lmi;
mod model;
mod sdpa;

pub use hermitian::{
    complexify, realify, realify_matrix, HermEntry, HermitianConstraint, HermitianModel,
    HermitianSparse,
};
pub use lmi::{AffineEntry, ComplexAffine, Lmi, LmiBlock, LmiReduction, Presolve};
pub use model::{BlockKind, BlockSparse, BlockSpec, LinearConstraint, SdpModel, Sense, SymEntry};
pub use sdpa::{export_sdpa, export_sdpa_with_comments, import_sdpa};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-symmetric data: {0}")]
    NonSymmetric(String),
    #[error("non-Hermitian data: {0}")]
    NonHermitian(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("SDPA line {line}: {message}")]
    Sdpa { line: usize, message: String },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}
