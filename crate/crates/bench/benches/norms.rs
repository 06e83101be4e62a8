use berezin_core::cpn::{cpn_lp_norm_closed, CPnParams};
use berezin_core::fbi::{isometry_check, FbiVariant};
use berezin_core::fock::{fock_lp_norm_closed, FockParams, FockState};
use berezin_core::quad::{lp_norm_quadrature, Eigenfunction, QuadratureSpec};
use berezin_core::spectral::{cpn_model_spectrum, quasimode_sup_norm, sample_quasimode, window_members, SupStrategy};
use berezin_core::{Exponent, MultiIndex};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn closed_forms(c: &mut Criterion) {
    let s = FockState::new(FockParams::new(3, 4000.0).unwrap(), MultiIndex(vec![2000, 0, 0])).unwrap();
    c.bench_function("fock closed norm n=3 N=4000 p=4", |b| b.iter(|| fock_lp_norm_closed(black_box(&s), Exponent::Finite(4.0)).unwrap()));
    let p = CPnParams::new(2, 4000).unwrap();
    c.bench_function("cpn closed norm n=2 N=4000 p=inf", |b| b.iter(|| cpn_lp_norm_closed(black_box(&p), 2000, Exponent::Infinity).unwrap()));
}

fn quadrature(c: &mut Criterion) {
    let s = FockState::new(FockParams::new(2, 16.0).unwrap(), MultiIndex(vec![8, 3])).unwrap();
    let spec = QuadratureSpec::with_rel_tol(1e-11);
    c.bench_function("fock quadrature norm n=2 N=16 p=7.5", |b| b.iter(|| lp_norm_quadrature(Eigenfunction::Fock(black_box(&s)), Exponent::Finite(7.5), &spec).unwrap()));
}

fn quasimodes(c: &mut Criterion) {
    let params = CPnParams::new(1, 400).unwrap();
    let spectrum = cpn_model_spectrum(&params);
    let window = window_members(&spectrum, 0.5, 1.0).unwrap();
    let q = sample_quasimode(&spectrum, &window, 7).unwrap();
    c.bench_function("quasimode sup norm CP1 N=400", |b| b.iter(|| quasimode_sup_norm(black_box(&q), &SupStrategy::default()).unwrap()));
}

fn fbi(c: &mut Criterion) {
    let mut g = c.benchmark_group("fbi");
    g.sample_size(10);
    g.bench_function("isometry phi N=16 k=2", |b| b.iter(|| isometry_check(FbiVariant::Phi, black_box(16.0), 2).unwrap()));
    g.finish();
}

criterion_group!(benches, closed_forms, quadrature, quasimodes, fbi);
criterion_main!(benches);
