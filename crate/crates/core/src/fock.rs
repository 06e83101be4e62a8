//! The Bargmann–Fock space on ℂⁿ with semiclassical parameter N.
//!
//! Basis: e_α(z) = N^{(n+|α|)/2} e^{-N|z|²/2} z^α / (π^{n/2} √α!).

use crate::error::{domain, Result};
use crate::special_fn::{artin_theta, e_moment, ln_factorial, LogReal};
use crate::types::{binomial, Exponent, MultiIndex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockParams {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: f64,
}

impl FockParams {
    pub fn new(n: usize, big_n: f64) -> Result<Self> {
        if n == 0 {
            return domain("dimension n must be at least 1");
        }
        if !(big_n > 0.0) || !big_n.is_finite() {
            return domain(format!("N must be positive, got {big_n}"));
        }
        Ok(FockParams { n, big_n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockState {
    pub params: FockParams,
    pub index: MultiIndex,
}

impl FockState {
    pub fn new(params: FockParams, index: MultiIndex) -> Result<Self> {
        if index.dim() != params.n {
            return domain(format!("index {index} has dimension {} but n = {}", index.dim(), params.n));
        }
        Ok(FockState { params, index })
    }
}

/// Pointwise value kept as log-magnitude plus phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockValue {
    pub magnitude: LogReal,
    pub phase: f64,
}

impl FockValue {
    pub fn to_complex(&self) -> Result<Complex64> {
        Ok(Complex64::from_polar(self.magnitude.to_f64()?, self.phase))
    }
}

/// ln of the normalising constant N^{(n+|α|)/2} / (π^{n/2} √α!).
pub(crate) fn ln_fock_normaliser(params: &FockParams, index: &MultiIndex) -> f64 {
    let n = params.n as f64;
    0.5 * (n + index.order() as f64) * params.big_n.ln() - 0.5 * n * PI.ln()
        - 0.5 * index.entries().iter().map(|&a| ln_factorial(a as u64)).sum::<f64>()
}

pub fn fock_eval(state: &FockState, z: &[Complex64]) -> Result<FockValue> {
    if z.len() != state.params.n {
        return domain("point dimension does not match n");
    }
    let nn = state.params.big_n;
    let mut ln = ln_fock_normaliser(&state.params, &state.index);
    let mut phase = 0.0;
    for (zj, &a) in z.iter().zip(state.index.entries()) {
        let r = zj.norm();
        ln -= 0.5 * nn * r * r;
        if a > 0 {
            if r == 0.0 {
                return Ok(FockValue { magnitude: LogReal::zero(), phase: 0.0 });
            }
            ln += a as f64 * r.ln();
            phase += a as f64 * zj.arg();
        }
    }
    Ok(FockValue { magnitude: LogReal::from_ln(ln), phase })
}

/// Reproducing kernel K(w, z) = (N/π)ⁿ e^{-N|z|²/2 - N|w|²/2 + N z̄·w}.
pub fn bergman_kernel(params: &FockParams, w: &[Complex64], z: &[Complex64]) -> Result<Complex64> {
    if w.len() != params.n || z.len() != params.n {
        return domain("point dimension does not match n");
    }
    let nn = params.big_n;
    let mut expo = Complex64::new(0.0, 0.0);
    for (wj, zj) in w.iter().zip(z) {
        expo += -0.5 * nn * (zj.norm_sqr() + wj.norm_sqr()) + nn * zj.conj() * wj;
    }
    Ok((nn / PI).powi(params.n as i32) * expo.exp())
}

/// ‖e_ν‖_p from the moment integral E(a) = πΓ(a/2+1)/N^{a/2+1}.
///
/// For p < ∞: (2/p)^{|ν|/2 + n/p} ∏_j E(pν_j)^{1/p} / E(2ν_j)^{1/2}.
/// For p = ∞: ∏_j e^{-ν_j/2} ν_j^{ν_j/2} N^{1/2} / (π^{1/2} √ν_j!), attained at |z_j| = √(ν_j/N).
pub fn fock_lp_norm_closed(state: &FockState, p: Exponent) -> Result<LogReal> {
    let nn = state.params.big_n;
    let n = state.params.n as f64;
    match p {
        Exponent::Finite(p) => {
            if !(p >= 1.0) {
                return domain(format!("p must be >= 1, got {p}"));
            }
            let mut ln = (0.5 * state.index.order() as f64 + n / p) * (2.0 / p).ln();
            for &v in state.index.entries() {
                let v = v as f64;
                ln += e_moment(p * v, nn)?.ln_abs() / p - 0.5 * e_moment(2.0 * v, nn)?.ln_abs();
            }
            Ok(LogReal::from_ln(ln))
        }
        Exponent::Infinity => {
            let mut ln = 0.5 * n * (nn / PI).ln();
            for &v in state.index.entries() {
                if v > 0 {
                    let v = v as f64;
                    ln += -0.5 * v + 0.5 * v * v.ln();
                }
                ln -= 0.5 * ln_factorial(v as u64);
            }
            Ok(LogReal::from_ln(ln))
        }
    }
}

/// Point where |e_ν| attains its supremum: |z_j| = √(ν_j/N), real and positive.
pub fn fock_sup_point(state: &FockState) -> Vec<Complex64> {
    state
        .index
        .entries()
        .iter()
        .map(|&v| Complex64::new((v as f64 / state.params.big_n).sqrt(), 0.0))
        .collect()
}

/// ε(p, ν) = θ(pν/2 + 1)/(6p(pν + 2)) - θ(ν + 1)/(24(ν + 1)).
pub fn stirling_epsilon(p: f64, nu: f64) -> Result<f64> {
    Ok(artin_theta(p * nu / 2.0 + 1.0)? / (6.0 * p * (p * nu + 2.0)) - artin_theta(nu + 1.0)? / (24.0 * (nu + 1.0)))
}

/// The same norm written as a product of explicit elementary factors, with
/// the Gamma functions replaced by their Stirling envelopes.
pub fn fock_lp_norm_stirling(state: &FockState, p: Exponent) -> Result<LogReal> {
    let nn = state.params.big_n;
    let mut ln = 0.0;
    for &v in state.index.entries() {
        let v = v as f64;
        match p {
            Exponent::Finite(p) => {
                ln += (1.0 / p - 0.5) * (PI.powf(1.5) / (nn * std::f64::consts::E)).ln();
                ln += stirling_epsilon(p, v)?;
                ln += (2.0 / p).ln() / p;
                ln += ln_f(p, v);
            }
            Exponent::Infinity => {
                ln += 0.5 * (nn * std::f64::consts::E / PI.powf(1.5)).ln();
                ln -= artin_theta(v + 1.0)? / (24.0 * (v + 1.0));
                ln += ln_g(v);
            }
        }
    }
    Ok(LogReal::from_ln(ln))
}

/// ln f(x) with f(x) = ((x+2/p)/(x+1))^{x/2} (px+2)^{1/(2p)} / (2x+2)^{1/4}.
pub fn ln_f(p: f64, x: f64) -> f64 {
    0.5 * x * ((2.0 / p - 1.0) / (x + 1.0)).ln_1p() + (p * x + 2.0).ln() / (2.0 * p) - 0.25 * (2.0 * x + 2.0).ln()
}

/// ln g(x) with g(x) = (x/(x+1))^{x/2} / (2x+2)^{1/4} and 0⁰ = 1.
pub fn ln_g(x: f64) -> f64 {
    let head = if x == 0.0 { 0.0 } else { -0.5 * x * (1.0 / x).ln_1p() };
    head - 0.25 * (2.0 * x + 2.0).ln()
}

/// (ln f)''(x) = (p-2)(px² + 2(p+2)x + 6) / ((px+2)² (2x+2)²).
pub fn ln_f_second_derivative(p: f64, x: f64) -> f64 {
    (p - 2.0) * (p * x * x + 2.0 * (p + 2.0) * x + 6.0) / ((p * x + 2.0).powi(2) * (2.0 * x + 2.0).powi(2))
}

/// (ln g)''(x) = (x+2) / (x (2x+2)²) for x > 0.
pub fn ln_g_second_derivative(x: f64) -> f64 {
    (x + 2.0) / (x * (2.0 * x + 2.0).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvexityFunction {
    /// f(x) for a finite exponent p.
    F { p: f64 },
    /// g(x), the p = ∞ analogue.
    G,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub function: ConvexityFunction,
    /// Second divided differences of ln f at the interior grid points.
    pub second_differences: Vec<f64>,
    pub min_second_difference: f64,
}

impl ConvexityReport {
    pub fn is_convex(&self, tol: f64) -> bool {
        self.min_second_difference >= -tol
    }
}

pub fn log_convexity_check(function: ConvexityFunction, grid: &[f64]) -> Result<ConvexityReport> {
    if grid.len() < 3 {
        return domain("convexity check needs at least three grid points");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return domain("grid must be strictly increasing and non-negative");
    }
    let vals: Vec<f64> = grid
        .iter()
        .map(|&x| match function {
            ConvexityFunction::F { p } => ln_f(p, x),
            ConvexityFunction::G => ln_g(x),
        })
        .collect();
    let d: Vec<f64> = (1..grid.len() - 1)
        .map(|i| {
            let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
            let s1 = (vals[i] - vals[i - 1]) / (x1 - x0);
            let s2 = (vals[i + 1] - vals[i]) / (x2 - x1);
            2.0 * (s2 - s1) / (x2 - x0)
        })
        .collect();
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ConvexityReport { function, second_differences: d, min_second_difference: min })
}

/// Eigenvalue (|α| + n)/N of T_N(|z|²) on e_α.
pub fn harmonic_eigenvalue(params: &FockParams, index: &MultiIndex) -> f64 {
    (index.order() as f64 + params.n as f64) / params.big_n
}

/// Multiplicity C(k+n-1, n-1) of the level |α| = k.
pub fn harmonic_multiplicity(n: usize, k: u64) -> f64 {
    binomial(k + n as u64 - 1, n as u64 - 1)
}

/// c with z^α e_ν = c e_{ν+α}: c = N^{-|α|/2} √((ν+α)!/ν!).
pub fn shift_coefficient(params: &FockParams, nu: &MultiIndex, alpha: &MultiIndex) -> LogReal {
    let mut ln = -0.5 * alpha.order() as f64 * params.big_n.ln();
    for (&v, &a) in nu.entries().iter().zip(alpha.entries()) {
        ln += 0.5 * (ln_factorial(v as u64 + a as u64) - ln_factorial(v as u64));
    }
    LogReal::from_ln(ln)
}

/// ⟨e_ν, T_N(F) e_ν⟩ for F = Σ c_m |z|^{2m}: Σ c_m ∏_j (ν_j+m_j)!/(ν_j! N^{m_j}).
pub fn radial_symbol_diagonal(params: &FockParams, coeffs: &[(f64, MultiIndex)], nu: &MultiIndex) -> Result<f64> {
    let mut acc = 0.0;
    for (c, m) in coeffs {
        if m.dim() != params.n {
            return domain("monomial dimension does not match n");
        }
        acc += c * shift_coefficient(params, nu, m).powf(2.0)?.to_f64()?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioBound {
    pub ratio: f64,
    pub bound: f64,
    pub holds: bool,
}

/// e^{1/24} (e^{1/12} √(e/√(2π)))ⁿ.
pub fn ratio_bound_constant(n: usize) -> f64 {
    let e = std::f64::consts::E;
    (1.0 / 24.0f64).exp() * ((1.0 / 12.0f64).exp() * (e / (2.0 * PI).sqrt()).sqrt()).powi(n as i32)
}

/// Compares ‖e_ν‖_p / ‖e_μ‖_p against the universal constant, μ = (|ν|, 0, …, 0).
pub fn sharpness_ratio_bound(params: &FockParams, p: Exponent, nu: &MultiIndex) -> Result<RatioBound> {
    let mu = MultiIndex::first_axis(params.n, nu.order() as u32);
    let a = fock_lp_norm_closed(&FockState::new(*params, nu.clone())?, p)?;
    let b = fock_lp_norm_closed(&FockState::new(*params, mu)?, p)?;
    let ratio = (a / b).to_f64()?;
    let bound = ratio_bound_constant(params.n);
    Ok(RatioBound { ratio, bound, holds: ratio <= bound })
}

/// ν = (k/α, …, k/α, 0, …, 0) with α equal entries and k = round(λN)
/// moved to the nearest positive multiple of α.
pub fn nu_k_index(n: usize, alpha: usize, lambda: f64, big_n: f64) -> Result<MultiIndex> {
    if alpha == 0 || alpha > n {
        return domain(format!("alpha must lie in 1..={n}, got {alpha}"));
    }
    if !(lambda > 0.0) {
        return domain("lambda must be positive");
    }
    let k = (lambda * big_n).round() as u64;
    let per = (((k as f64) / alpha as f64).round() as u64).max(1) as u32;
    let mut v = vec![0u32; n];
    for e in v.iter_mut().take(alpha) {
        *e = per;
    }
    Ok(MultiIndex(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    /// γ = (n - α/2)(1/2 - 1/p).
    pub exponent: f64,
    /// Leading-order value of ‖e_{ν_k}‖_p, a constant times N^γ.
    pub value: LogReal,
}

/// Leading large-N law for ‖e_{ν_k}‖_p with ν_k = (λN/α, …, 0).
///
/// Coordinates carrying λN/α contribute their ν → ∞ limit; idle coordinates
/// contribute their exact factor.
pub fn fock_asymptotic_prediction(n: usize, lambda: f64, alpha: usize, p: Exponent, big_n: f64) -> Result<AsymptoticPrediction> {
    if alpha == 0 || alpha > n || !(lambda > 0.0) || !(big_n > 0.0) {
        return domain("need 1 <= alpha <= n, lambda > 0, N > 0");
    }
    let e = std::f64::consts::E;
    let nu = lambda * big_n / alpha as f64;
    let q = p.recip();
    let exponent = (n as f64 - alpha as f64 / 2.0) * (0.5 - q);
    let base = (q - 0.5) * (PI.powf(1.5) / (big_n * e)).ln();
    let (busy, idle) = match p {
        Exponent::Finite(p) => (
            base + (2.0 / p).ln() / p + (1.0 / p - 0.5) + p.ln() / (2.0 * p) - 0.25 * 2f64.ln() + (1.0 / (2.0 * p) - 0.25) * nu.ln(),
            base + stirling_epsilon(p, 0.0)? + (2.0 / p).ln() / p + ln_f(p, 0.0),
        ),
        Exponent::Infinity => (
            base - 0.5 - 0.25 * (2.0 * nu).ln(),
            base - artin_theta(1.0)? / 24.0 + ln_g(0.0),
        ),
    };
    let ln = alpha as f64 * busy + (n - alpha) as f64 * idle;
    Ok(AsymptoticPrediction { exponent, value: LogReal::from_ln(ln) })
}

/// One line of a norm comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub p: Exponent,
    #[serde(rename = "N")]
    pub big_n: f64,
    pub index: MultiIndex,
    pub closed_form: f64,
    pub quadrature: Option<f64>,
    pub asymptotic: Option<f64>,
    pub rel_discrepancy: Option<f64>,
}

impl NormReport {
    pub fn new(p: Exponent, big_n: f64, index: MultiIndex, closed_form: f64, quadrature: Option<f64>, asymptotic: Option<f64>) -> Self {
        let rel_discrepancy = quadrature.map(|q| ((q - closed_form) / closed_form).abs());
        NormReport { p, big_n, index, closed_form, quadrature, asymptotic, rel_discrepancy }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn st(n: usize, nn: f64, idx: &[u32]) -> FockState {
        FockState::new(FockParams::new(n, nn).unwrap(), MultiIndex(idx.to_vec())).unwrap()
    }

    #[test]
    fn eval_example() {
        let v = fock_eval(&st(1, 1.0, &[1]), &[Complex64::new(1.0, 0.0)]).unwrap();
        assert_relative_eq!(v.magnitude.to_f64().unwrap(), (-0.5f64).exp() / PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn lp_example_values() {
        // ν = (2), N = 1, p = 4: 2^{-5/4} (24π)^{1/4} / (2π)^{1/2}
        let want = 2f64.powf(-1.25) * (24.0 * PI).powf(0.25) / (2.0 * PI).sqrt();
        let got = fock_lp_norm_closed(&st(1, 1.0, &[2]), Exponent::Finite(4.0)).unwrap().to_f64().unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-13);
        assert!((got - 0.4943).abs() < 1e-4);
        for idx in [[0u32, 0], [3, 5], [8, 1]] {
            let s = st(2, 4.0, &idx);
            assert_relative_eq!(fock_lp_norm_closed(&s, Exponent::Finite(2.0)).unwrap().to_f64().unwrap(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn sup_closed_matches_value_at_critical_point() {
        for idx in [[0u32, 0], [3, 5], [8, 1], [0, 7]] {
            let s = st(2, 4.0, &idx);
            let at = fock_eval(&s, &fock_sup_point(&s)).unwrap().magnitude;
            let sup = fock_lp_norm_closed(&s, Exponent::Infinity).unwrap();
            assert_relative_eq!(at.ln_abs(), sup.ln_abs(), max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn stirling_product_equals_closed_form() {
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Finite(7.5), Exponent::Infinity] {
            for idx in [[0u32, 0, 0], [3, 0, 1], [10, 20, 0], [500, 1, 2000]] {
                for nn in [1.0, 16.0, 1000.0] {
                    let s = st(3, nn, &idx);
                    let a = fock_lp_norm_closed(&s, p).unwrap().ln_abs();
                    let b = fock_lp_norm_stirling(&s, p).unwrap().ln_abs();
                    assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()), "{p} {idx:?} {nn}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn harmonic_examples() {
        let pr = FockParams::new(3, 5.0).unwrap();
        assert_relative_eq!(harmonic_eigenvalue(&pr, &MultiIndex(vec![1, 2, 0])), 6.0 / 5.0);
        assert_eq!(harmonic_multiplicity(2, 5), 6.0);
        let pr1 = FockParams::new(1, 4.0).unwrap();
        let d = radial_symbol_diagonal(&pr1, &[(1.0, MultiIndex(vec![1]))], &MultiIndex(vec![3])).unwrap();
        assert_relative_eq!(d, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn kernel_reproduces_on_diagonal() {
        let pr = FockParams::new(2, 3.0).unwrap();
        let z = [Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)];
        let mut sum = 0.0;
        for a in MultiIndex::up_to_order(2, 40) {
            sum += fock_eval(&FockState::new(pr, a).unwrap(), &z).unwrap().magnitude.to_f64().unwrap().powi(2);
        }
        let k = bergman_kernel(&pr, &z, &z).unwrap();
        assert_relative_eq!(k.re, sum, max_relative = 1e-12);
        assert!(k.im.abs() < 1e-14);
    }

    #[test]
    fn asymptotic_examples() {
        let a = fock_asymptotic_prediction(1, 0.5, 1, Exponent::Infinity, 100.0).unwrap();
        assert_relative_eq!(a.exponent, 0.25);
        let a = fock_asymptotic_prediction(3, 0.5, 3, Exponent::Finite(4.0), 100.0).unwrap();
        assert_relative_eq!(a.exponent, 0.375);
        // leading law approaches the exact norm
        for (n, alpha, p) in [(1, 1, Exponent::Infinity), (2, 2, Exponent::Finite(4.0)), (3, 1, Exponent::Finite(3.0))] {
            let nn = 1.0e6;
            let idx = nu_k_index(n, alpha, 0.5, nn).unwrap();
            let s = FockState::new(FockParams::new(n, nn).unwrap(), idx).unwrap();
            let exact = fock_lp_norm_closed(&s, p).unwrap().ln_abs();
            let lead = fock_asymptotic_prediction(n, 0.5, alpha, p, nn).unwrap().value.ln_abs();
            assert!((exact - lead).abs() < 1e-4, "{n} {alpha} {p}: {exact} {lead}");
        }
    }

    #[test]
    fn nu_k_rounding() {
        assert_eq!(nu_k_index(3, 2, 0.5, 100.0).unwrap(), MultiIndex(vec![25, 25, 0]));
        assert_eq!(nu_k_index(3, 3, 0.5, 10.0).unwrap(), MultiIndex(vec![2, 2, 2]));
        assert!(nu_k_index(2, 3, 0.5, 10.0).is_err());
    }

    #[test]
    fn ratio_bound_examples() {
        let pr = FockParams::new(2, 10.0).unwrap();
        let r = sharpness_ratio_bound(&pr, Exponent::Finite(4.0), &MultiIndex(vec![3, 3])).unwrap();
        assert!(r.holds && r.ratio > 0.0);
        let r = sharpness_ratio_bound(&pr, Exponent::Finite(2.0), &MultiIndex(vec![3, 3])).unwrap();
        assert_relative_eq!(r.ratio, 1.0, max_relative = 1e-13);
        // e^{-ε(p,0)} = (e/√(2π))^{1/2-1/p}
        let e = std::f64::consts::E;
        for p in [2.0, 3.0, 4.0, 10.0] {
            let lhs = (-stirling_epsilon(p, 0.0).unwrap()).exp();
            assert_relative_eq!(lhs, (e / (2.0 * PI).sqrt()).powf(0.5 - 1.0 / p), max_relative = 1e-13);
        }
    }

    #[test]
    fn convexity_analytic_agrees_with_differences() {
        for p in [3.0, 4.0, 10.0] {
            for x in [0.5, 3.0, 40.0] {
                let h = 1e-3;
                let fd = (ln_f(p, x + h) - 2.0 * ln_f(p, x) + ln_f(p, x - h)) / (h * h);
                assert_relative_eq!(fd, ln_f_second_derivative(p, x), max_relative = 1e-4);
            }
        }
        for x in [0.5, 3.0, 40.0] {
            let h = 1e-3;
            let fd = (ln_g(x + h) - 2.0 * ln_g(x) + ln_g(x - h)) / (h * h);
            assert_relative_eq!(fd, ln_g_second_derivative(x), max_relative = 1e-4);
        }
        let grid: Vec<f64> = (0..=200).map(|x| x as f64).collect();
        let r = log_convexity_check(ConvexityFunction::F { p: 2.0 }, &grid).unwrap();
        assert!(r.min_second_difference.abs() < 1e-14);
        assert!(log_convexity_check(ConvexityFunction::G, &grid[..2]).is_err());
    }
}
