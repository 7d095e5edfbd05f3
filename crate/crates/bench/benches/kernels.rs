use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use lagfib_bench::two_dim_problem;
use lagfib_core::betti::betti_coords;
use lagfib_core::cubic::{all_partials_degenerate, lossen_witness};
use lagfib_core::elliptic::torsion_enumerate;
use lagfib_core::{BettiConfig, Complex64, EllipticFamily, GaussRat, MVPoly};

fn betti(c: &mut Criterion) {
    let (p, s) = two_dim_problem();
    let b = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.05)];
    let cfg = BettiConfig::default();
    c.bench_function("betti_coords n=2", |bench| {
        bench.iter(|| betti_coords(&p, &s, black_box(&b), &cfg).unwrap())
    });
}

fn degeneracy(c: &mut Criterion) {
    let lossen = lossen_witness::<GaussRat>();
    c.bench_function("exact degeneracy n=5", |bench| {
        bench.iter(|| all_partials_degenerate(black_box(&lossen)))
    });
}

fn elliptic(c: &mut Criterion) {
    let one = Complex64::new(1.0, 0.0);
    let tau = MVPoly::from_terms(1, vec![(vec![1], one)]).unwrap();
    let s = MVPoly::from_terms(1, vec![(vec![0], Complex64::new(0.0, 1.0))]).unwrap();
    let fam = EllipticFamily::new(tau, s, [-1.0, 1.0, 0.5, 1.5]).unwrap();
    c.bench_function("torsion_enumerate N=16", |bench| {
        bench.iter(|| torsion_enumerate(&fam, black_box(16), 1e-8).unwrap())
    });
}

criterion_group!(benches, betti, degeneracy, elliptic);
criterion_main!(benches);
