use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cstar::exec::Execution;
use cstar::ipm::SolverOptions;
use cstar::oracles::grid_min;
use cstar::parser::{parse_problem, ProblemFile};
use cstar::relaxation::{generate_basis, moment_structure_with, solve_levels};
use cstar::symmetry::{invariant_basis_with, GroupRep};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn problem(name: &str) -> ProblemFile {
    let path = format!("{}/problems/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn moment_tables(c: &mut Criterion) {
    let p = problem("chsh.csdp");
    let basis = generate_basis(&p.presentation, 3).unwrap();
    let mut group = c.benchmark_group("moment_structure/chsh_level3");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| moment_structure_with(black_box(&basis), &p.presentation, exec).unwrap())
        });
    }
    group.finish();
}

/// Cyclic shifts of `n` points.
fn cyclic(n: usize) -> GroupRep {
    let perms: Vec<Vec<usize>> = (0..n).map(|s| (0..n).map(|i| (i + s) % n).collect()).collect();
    GroupRep::from_permutations(&perms).unwrap()
}

fn invariant_bases(c: &mut Criterion) {
    let mut group = c.benchmark_group("invariant_basis");
    group.sample_size(10);
    for n in [8, 16] {
        let rep = cyclic(n);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &rep, |b, rep| {
                b.iter(|| invariant_basis_with(rep, exec))
            });
        }
    }
    group.finish();
}

fn grids(c: &mut Criterion) {
    let p = problem("motzkin_box.csdp");
    let mut group = c.benchmark_group("grid_min/motzkin");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                grid_min(
                    &p.presentation,
                    &p.objective.poly,
                    &p.positives,
                    &[(-1.0, 1.0), (-1.0, 1.0)],
                    2e-3,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn hierarchies(c: &mut Criterion) {
    let p = problem("chsh.csdp");
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("solve_levels/chsh_1_to_3");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| solve_levels(&p, black_box(&[1, 2, 3]), &opts, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, moment_tables, invariant_bases, grids, hierarchies);
criterion_main!(benches);
