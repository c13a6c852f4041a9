use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gemcsm_core::assembly::{assemble, assemble_parts, ChannelBasis};
use gemcsm_core::basis::GaussBasisSpec;
use gemcsm_core::eigen::{solve_pencil, EigOptions};
use gemcsm_core::jacobi::JacobiSet;
use gemcsm_core::twobody::GaussPotential;
use gemcsm_core::units::{Dimension, MassConfig};

fn basis(dim: Dimension, n: usize) -> ChannelBasis {
    let (pair, third, blocks) = match dim {
        Dimension::Three => (
            GaussBasisSpec::new(n, 68.83, 0.0058).with_omega(0.8),
            GaussBasisSpec::new(n, 61.85, 0.011).with_omega(0.8),
            vec![(0, 0)],
        ),
        Dimension::One => (
            GaussBasisSpec::new(n, 318.9, 0.037).with_ell(1),
            GaussBasisSpec::new(n, 45.65, 0.023).with_ell(1),
            vec![(0, 0), (1, 1)],
        ),
    };
    ChannelBasis { dimension: dim, pair, third, blocks, jacobi_set: JacobiSet::Two }
}

fn depth(dim: Dimension) -> GaussPotential {
    match dim {
        Dimension::Three => GaussPotential::new(-19.77),
        Dimension::One => GaussPotential::new(-5.44),
    }
}

fn sizes(dim: Dimension) -> [usize; 2] {
    match dim {
        Dimension::Three => [6, 10],
        Dimension::One => [8, 14],
    }
}

fn assembly(c: &mut Criterion) {
    let cfg = MassConfig::new(1.0).unwrap();
    let mut g = c.benchmark_group("assembly");
    g.sample_size(10);
    for dim in [Dimension::Three, Dimension::One] {
        for n in sizes(dim) {
            let b = basis(dim, n);
            g.bench_with_input(BenchmarkId::new(dim.to_string(), n), &b, |bench, b| {
                bench.iter(|| assemble_parts(&cfg, &depth(dim), b, &[0.14, 0.17, 0.21]).unwrap())
            });
        }
    }
    g.finish();
}

fn eigensolve(c: &mut Criterion) {
    let cfg = MassConfig::new(1.0).unwrap();
    let mut g = c.benchmark_group("eigensolve");
    g.sample_size(10);
    for dim in [Dimension::Three, Dimension::One] {
        for n in sizes(dim) {
            let p = assemble(&cfg, &depth(dim), &basis(dim, n), 0.17).unwrap();
            let opts = EigOptions::for_dimension(dim);
            g.bench_with_input(BenchmarkId::new(dim.to_string(), n), &p, |bench, p| {
                bench.iter(|| solve_pencil(&p.h_matrix, &p.s_matrix, false, &opts).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, assembly, eigensolve);
criterion_main!(benches);
