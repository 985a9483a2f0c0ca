use std::hint::black_box;

use confocal::bifurcation::{range_boundary, trace_point};
use confocal::frequency::{frequency, frequency_unguarded};
use confocal::geometry::{billiard_orbit, generic_state};
use confocal::periodic::{cayley_test, invert_frequency};
use confocal::{CausticParam, Ellipsoid, QuadratureConfig, Sigma};
use confocal_bench::{PLANAR_AXES, REFERENCE_AXES};
use criterion::{criterion_group, criterion_main, Criterion};

fn reference() -> Ellipsoid {
    Ellipsoid::new(&REFERENCE_AXES).unwrap()
}

fn geometry(c: &mut Criterion) {
    let e = reference();
    let x = generic_state(&e, &[0.2, 0.52]).unwrap();
    c.bench_function("billiard_orbit/1000", |b| {
        b.iter(|| billiard_orbit(&e, black_box(&x), 1000).unwrap())
    });
}

fn frequency_map(c: &mut Criterion) {
    let e = reference();
    let interior = CausticParam::new(&e, &[0.2, 0.52]).unwrap();
    // both caustics within 1e-9 of a semiaxis, where the guarded map refuses
    let near_collapse = [0.46 - 1e-9, 0.58 + 1e-9];
    let cfg = QuadratureConfig::default();
    let mut g = c.benchmark_group("frequency");
    g.bench_function("interior", |b| b.iter(|| frequency(&e, black_box(&interior)).unwrap()));
    g.bench_function("near_collapse", |b| {
        b.iter(|| frequency_unguarded(&e, black_box(&near_collapse), &cfg).unwrap())
    });
    g.finish();
}

fn closure(c: &mut Criterion) {
    let e = Ellipsoid::new(&PLANAR_AXES).unwrap();
    let lambda = CausticParam::new(&e, &[0.8]).unwrap();
    let e3 = reference();
    let lambda3 = CausticParam::new(&e3, &[0.2, 0.52]).unwrap();
    let mut g = c.benchmark_group("cayley");
    g.bench_function("planar_m8", |b| {
        b.iter(|| cayley_test(&e, black_box(&lambda), 8).unwrap())
    });
    g.bench_function("spatial_m8", |b| {
        b.iter(|| cayley_test(&e3, black_box(&lambda3), 8).unwrap())
    });
    g.finish();
}

fn ranges(c: &mut Criterion) {
    let [cc, bb, aa] = REFERENCE_AXES;
    // (3/8, 1/4) is outside the H1H1 range of the reference ellipsoid
    let e = Ellipsoid::new(&[0.25, 0.5, 1.0]).unwrap();
    let mut g = c.benchmark_group("ranges");
    g.sample_size(10);
    g.bench_function("range_boundary_eh1", |b| {
        b.iter(|| range_boundary(aa, bb, cc, black_box(&Sigma::eh1())).unwrap())
    });
    g.bench_function("trace_point_h1h1", |b| {
        b.iter(|| trace_point(&Sigma::h1h1(), black_box(&[0.375, 0.25]), 0.5).unwrap())
    });
    g.bench_function("invert_frequency_h1h1", |b| {
        b.iter(|| invert_frequency(&e, &Sigma::h1h1(), black_box(&[0.375, 0.25])).unwrap())
    });
    g.finish();
}

criterion_group!(benches, geometry, frequency_map, closure, ranges);
criterion_main!(benches);
