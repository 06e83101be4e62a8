use berezin_core::cpn::{cpn_lp_norm_closed, cpn_matrix_element, CPnParams, CpnMonomial};
use berezin_core::fock::{fock_lp_norm_closed, fock_lp_norm_stirling, sharpness_ratio_bound, FockParams, FockState};
use berezin_core::special_fn::{artin_theta, log_gamma};
use berezin_core::spectral::{build_matrix, cpn_model_spectrum, eigendecompose, sample_quasimode, window_members, SpaceParams, Symbol, Truncation};
use berezin_core::{Exponent, LogReal, MultiIndex};
use num_complex::Complex64;
use proptest::prelude::*;

fn index(max_dim: usize, max_entry: u32) -> impl Strategy<Value = MultiIndex> {
    (1..=max_dim).prop_flat_map(move |n| prop::collection::vec(0..=max_entry, n)).prop_map(MultiIndex)
}

fn fock_norm(s: &FockState, p: f64) -> f64 {
    fock_lp_norm_closed(s, Exponent::Finite(p)).unwrap().ln_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_real_arithmetic_matches_f64(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        let (x, y) = (LogReal::from_f64(a), LogReal::from_f64(b));
        prop_assert!(((x * y).to_f64().unwrap() - a * b).abs() <= 1e-13 * (a * b).abs() + 1e-300);
        prop_assert!((x.add(&y).to_f64().unwrap() - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()));
    }

    #[test]
    fn log_gamma_recurrence(x in 0.01f64..300.0) {
        let lhs = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
        prop_assert!((lhs - x.ln()).abs() <= 1e-12 * log_gamma(x + 1.0).unwrap().abs().max(1.0));
    }

    #[test]
    fn artin_theta_in_unit_interval(x in 1.0f64..1e6) {
        let t = artin_theta(x).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn fock_l2_is_one(idx in index(3, 40), nn in 0.1f64..1e4) {
        let s = FockState::new(FockParams::new(idx.dim(), nn).unwrap(), idx).unwrap();
        prop_assert!(fock_norm(&s, 2.0).abs() < 1e-12);
    }

    #[test]
    fn fock_closed_matches_stirling_product(idx in index(3, 60), nn in 0.5f64..1e3, p in 1.0f64..20.0) {
        let s = FockState::new(FockParams::new(idx.dim(), nn).unwrap(), idx).unwrap();
        let st = fock_lp_norm_stirling(&s, Exponent::Finite(p)).unwrap().ln_abs();
        prop_assert!((fock_norm(&s, p) - st).abs() < 1e-10);
    }

    #[test]
    fn fock_norms_interpolate(idx in index(2, 30), nn in 0.5f64..100.0, p0 in 1.0f64..6.0, dp in 0.5f64..10.0, t in 0.0f64..1.0) {
        // ln‖f‖_p is convex in 1/p
        let s = FockState::new(FockParams::new(idx.dim(), nn).unwrap(), idx).unwrap();
        let p1 = p0 + dp;
        let pt = 1.0 / ((1.0 - t) / p0 + t / p1);
        let mid = fock_norm(&s, pt);
        prop_assert!(mid <= (1.0 - t) * fock_norm(&s, p0) + t * fock_norm(&s, p1) + 1e-11);
    }

    #[test]
    fn fock_ratio_bound_holds(idx in index(3, 25), nn in 1.0f64..500.0, p in prop_oneof![Just(Exponent::Finite(2.0)), (2.0f64..30.0).prop_map(Exponent::Finite), Just(Exponent::Infinity)]) {
        let r = sharpness_ratio_bound(&FockParams::new(idx.dim(), nn).unwrap(), p, &idx).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }

    #[test]
    fn cpn_l2_is_one(n in 1usize..4, nn in 1u64..500, frac in 0.0f64..=1.0) {
        let a1 = (frac * nn as f64).round() as u64;
        let v = cpn_lp_norm_closed(&CPnParams::new(n, nn).unwrap(), a1, Exponent::Finite(2.0)).unwrap();
        prop_assert!(v.ln_abs().abs() < 1e-12);
    }

    #[test]
    fn cpn_matrix_elements_are_hermitian(a in 0u32..6, b in 0u32..6, al in 0u32..3, be in 0u32..3, extra in 0u64..3) {
        let p = CPnParams::new(1, 6).unwrap();
        let d = ((al + be) as u64).div_ceil(2) + extra;
        let m = CpnMonomial { alpha: MultiIndex(vec![al]), beta: MultiIndex(vec![be]), d };
        let mt = CpnMonomial { alpha: MultiIndex(vec![be]), beta: MultiIndex(vec![al]), d };
        let x = cpn_matrix_element(&p, &m, &MultiIndex(vec![a]), &MultiIndex(vec![b])).unwrap();
        let y = cpn_matrix_element(&p, &mt, &MultiIndex(vec![b]), &MultiIndex(vec![a])).unwrap();
        prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(1e-300));
        prop_assert!(x.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn cpn_spectrum_bounded_by_symbol(n in 1usize..3, nn in 1u64..6, re in -1.0f64..1.0, im in -1.0f64..1.0, h in -1.0f64..1.0) {
        let p = CPnParams::new(n, nn).unwrap();
        let e = MultiIndex::first_axis(n, 1);
        let z = MultiIndex::zeros(n);
        let c = Complex64::new(re, im);
        // c w_1/(1+|w|²)^{1/2} is not polynomial; use w_1 w̄_0-type terms of degree d = 1
        let sym = Symbol::CpnPolynomial(vec![
            (c, CpnMonomial { alpha: e.clone(), beta: z.clone(), d: 1 }),
            (c.conj(), CpnMonomial { alpha: z, beta: e, d: 1 }),
            (Complex64::new(h, 0.0), CpnMonomial::h(n)),
        ]);
        let m = build_matrix(&SpaceParams::Cpn(p), &sym, Truncation::Full).unwrap();
        prop_assert!(m.hermitian_defect() < 1e-14);
        let s = eigendecompose(&m).unwrap();
        let bound = sym.sup_bound();
        prop_assert!(s.values().iter().all(|v| v.abs() <= bound + 1e-12));
    }

    #[test]
    fn quasimodes_are_unit_and_inside_window(nn in 10u64..400, seed in any::<u64>()) {
        let p = CPnParams::new(1, nn).unwrap();
        let s = cpn_model_spectrum(&p);
        let w = window_members(&s, 0.5, 1.0).unwrap();
        let q = sample_quasimode(&s, &w, seed).unwrap();
        let norm: f64 = q.expansion.iter().map(|(_, c)| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(q.eigenvalues.iter().all(|&e| (w.lo..=w.hi).contains(&e)));
    }
}
