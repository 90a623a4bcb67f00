//! Hot-path benchmarks: sector assembly, explicit vs matrix-free matvec,
//! and a full iterative ground-state solve.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use trispin_bench::{probe_vector, sector_operator};
use trispin_core::eigensolver::{lowest_eigenpairs, EigenOptions};
use trispin_core::hamiltonian::{assemble, AssemblyRequest};
use trispin_core::lattice::{build_ladder_a, build_torus};

fn bench_assembly(c: &mut Criterion) {
    let spec = build_torus(4, 4).unwrap();
    c.bench_function("assemble/torus-4x4/nup8", |b| {
        b.iter(|| {
            let op = assemble(AssemblyRequest { spec: black_box(&spec), lambda: 1.5, n_up: 8 })
                .unwrap();
            black_box(op.nnz())
        })
    });
}

fn bench_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for (name, spec, n_up) in [
        ("torus-4x4/nup8", build_torus(4, 4).unwrap(), 8usize),
        ("ladder-a-16/nup8", build_ladder_a(16, true).unwrap(), 8),
    ] {
        for explicit in [true, false] {
            let op = sector_operator(&spec, 1.5, n_up, explicit);
            let x = probe_vector(op.dim());
            let mut y = x.clone();
            let label = if explicit { "csr" } else { "matrix-free" };
            group.bench_with_input(BenchmarkId::new(label, name), &op, |b, op| {
                b.iter(|| {
                    op.matvec_into(
                        x.as_slice().unwrap(),
                        y.as_slice_mut().unwrap(),
                    );
                    black_box(y[0])
                })
            });
        }
    }
    group.finish();
}

fn bench_ground_solve(c: &mut Criterion) {
    let spec = build_torus(3, 4).unwrap();
    let op = sector_operator(&spec, 100.0, 6, true);
    let opts = EigenOptions { k: 2, dense_threshold: 0, ..Default::default() };
    let mut group = c.benchmark_group("lanczos");
    group.sample_size(10);
    group.bench_function("torus-3x4/nup6/k2", |b| {
        b.iter(|| black_box(lowest_eigenpairs(&op, &opts).unwrap()[0].0))
    });
    group.finish();
}

criterion_group!(benches, bench_assembly, bench_matvec, bench_ground_solve);
criterion_main!(benches);
