mod common;

use cstar::exec::Execution;
use cstar::ipm::{solve, SolverOptions, Status};
use cstar::sdp::{export_sdpa, import_sdpa, Presolve};
use cstar::symmetry::{
    format_rep, invariant_basis, invariant_basis_with, parse_rep, reduce_sdp, GroupRep, SymmetryError,
};
use common::*;

fn full_and_reduced(model: &cstar::sdp::SdpModel, rep: &GroupRep) -> (f64, f64, usize) {
    let full = solve(model, &SolverOptions::default()).unwrap();
    assert_eq!(full.status, Status::Optimal);
    let red = reduce_sdp(model, rep).unwrap();
    assert_eq!(red.presolve(), &Presolve::Ready);
    let sol = solve(red.model(), &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    (full.primal_objective, red.original_value(sol.primal_objective), red.basis.dim())
}

#[test]
fn c3_instances_agree() {
    let rep = c3_on_six();
    let mut r = rng(31);
    for _ in 0..4 {
        let model = random_c3_sdp(&mut r);
        let (full, reduced, m) = full_and_reduced(&model, &rep);
        assert_eq!(m, 12);
        assert!((full - reduced).abs() <= 1e-6, "{full} vs {reduced}");
    }
}

#[test]
fn c3_basis_residuals() {
    let rep = c3_on_six();
    let basis = invariant_basis(&rep);
    assert_eq!(basis.dim(), 12);
    assert!(basis.orthonormality_residual() <= 1e-8);
    assert!(basis.reconstruction_residual() <= 1e-8);
    assert!(basis.commutation_residual(&rep) <= 1e-8);
    let seq = invariant_basis_with(&rep, Execution::Sequential);
    assert_eq!(seq.matrices, basis.matrices);
}

#[test]
fn trivial_group_keeps_everything() {
    let mut r = rng(7);
    let model = random_c3_sdp(&mut r);
    let rep = GroupRep::trivial(6);
    let (full, reduced, m) = full_and_reduced(&model, &rep);
    assert_eq!(m, 36);
    assert!((full - reduced).abs() <= 1e-6);
}

#[test]
fn non_invariant_model_is_rejected() {
    let mut r = rng(9);
    let mut model = random_c3_sdp(&mut r);
    model.cost.add(0, 0, 1, 0.5);
    assert!(matches!(
        reduce_sdp(&model, &c3_on_six()),
        Err(SymmetryError::NotInvariant { .. })
    ));
}

#[test]
fn reduced_model_survives_sdpa() {
    let mut r = rng(12);
    let model = random_c3_sdp(&mut r);
    let red = reduce_sdp(&model, &c3_on_six()).unwrap();
    let back = import_sdpa(&export_sdpa(red.model())).unwrap();
    let a = solve(red.model(), &SolverOptions::default()).unwrap();
    let b = solve(&back, &SolverOptions::default()).unwrap();
    assert!((a.primal_objective - b.primal_objective).abs() <= 1e-8);
}

#[test]
fn representation_files_round_trip() {
    let rep = c3_on_six();
    let back = parse_rep(&format_rep(&rep)).unwrap();
    assert_eq!(back.order(), 3);
    for (a, b) in rep.elements().iter().zip(back.elements()) {
        assert!((a - b).norm() < 1e-15);
    }
}
