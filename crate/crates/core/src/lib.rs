//! Moment relaxations of polynomial optimization problems over finitely
//! presented *-algebras, with a primal-dual interior point solver for the
//! resulting SDPs and group-symmetry reduction.
//!
//! A problem file is parsed by [`parser::parse_problem`], turned into an
//! SDP at a chosen level by [`relaxation::build_relaxation`] and solved by
//! [`ipm::solve`].

pub mod algebra;
pub mod exec;
pub mod ipm;
pub mod oracles;
pub mod parser;
pub mod relaxation;
pub mod sdp;
pub mod symmetry;
