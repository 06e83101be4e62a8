//! Holomorphic sections of O(N) over ℂℙⁿ in the affine chart w ∈ ℂⁿ.
//!
//! Basis: e_a(w) = Λ_a w^a (section factor) with |e_a(w)| = Λ_a |w^a| / (1+|w|²)^{N/2},
//! Λ_a = √((N+n)⋯(N+1) / (2π)ⁿ · N!/(a!(N-|a|)!)), against the Fubini–Study
//! volume 2ⁿ(1+|w|²)^{-(n+1)} dm(w).

use crate::error::{domain, Error, Result};
use crate::fock::{AsymptoticPrediction, FockValue};
use crate::special_fn::{ln_factorial, log_beta, log_multinomial, LogReal};
use crate::types::{binomial, Exponent, MultiIndex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CPnParams {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: u64,
}

impl CPnParams {
    pub fn new(n: usize, big_n: u64) -> Result<Self> {
        if n == 0 {
            return domain("dimension n must be at least 1");
        }
        if big_n == 0 {
            return domain("N must be at least 1");
        }
        Ok(CPnParams { n, big_n })
    }

    /// Dimension C(N+n, n) of the space of sections.
    pub fn dimension(&self) -> f64 {
        binomial(self.big_n + self.n as u64, self.n as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CPnState {
    pub params: CPnParams,
    pub index: MultiIndex,
}

impl CPnState {
    pub fn new(params: CPnParams, index: MultiIndex) -> Result<Self> {
        if index.dim() != params.n {
            return domain(format!("index {index} has dimension {} but n = {}", index.dim(), params.n));
        }
        if index.order() > params.big_n {
            return domain(format!("index {index} has |a| > N = {}", params.big_n));
        }
        Ok(CPnState { params, index })
    }
}

/// ln Λ_a.
pub fn cpn_ln_normalizer(params: &CPnParams, index: &MultiIndex) -> Result<f64> {
    let nn = params.big_n;
    let n = params.n as u64;
    let rising = ln_factorial(nn + n) - ln_factorial(nn);
    Ok(0.5 * (rising - n as f64 * (2.0 * PI).ln() + log_multinomial(nn, index.entries())?))
}

pub fn cpn_normalizer(params: &CPnParams, index: &MultiIndex) -> Result<LogReal> {
    Ok(LogReal::from_ln(cpn_ln_normalizer(params, index)?))
}

/// Value in the affine chart, section factor omitted (it has modulus ⟨w⟩^{-N}
/// after normalisation and a phase common to all basis elements).
pub fn cpn_eval(state: &CPnState, w: &[Complex64]) -> Result<FockValue> {
    if w.len() != state.params.n {
        return domain("point dimension does not match n");
    }
    let r2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    let mut ln = cpn_ln_normalizer(&state.params, &state.index)? - 0.5 * state.params.big_n as f64 * r2.ln_1p();
    let mut phase = 0.0;
    for (wj, &a) in w.iter().zip(state.index.entries()) {
        if a > 0 {
            let r = wj.norm();
            if r == 0.0 {
                return Ok(FockValue { magnitude: LogReal::zero(), phase: 0.0 });
            }
            ln += a as f64 * r.ln();
            phase += a as f64 * wj.arg();
        }
    }
    Ok(FockValue { magnitude: LogReal::from_ln(ln), phase })
}

/// 2ⁿ (1+|w|²)^{-(n+1)}.
pub fn fubini_study_weight(w: &[Complex64]) -> f64 {
    let r2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    let n = w.len() as i32;
    2f64.powi(n) * (1.0 + r2).powi(-(n + 1))
}

/// ∫_{[0,∞)ⁿ} ∏ r_j^{2a_j+1} (1+|r|²)^{-(b+n+1)} dr = a!(b-|a|)! / (2ⁿ (b+n)!).
pub fn lcalcul_integral(n: usize, a: &MultiIndex, b: u64) -> Result<LogReal> {
    if a.dim() != n {
        return domain("index dimension does not match n");
    }
    if a.order() > b {
        return domain(format!("need |a| <= b, got |a| = {}, b = {b}", a.order()));
    }
    let ln = a.entries().iter().map(|&x| ln_factorial(x as u64)).sum::<f64>() + ln_factorial(b - a.order())
        - n as f64 * 2f64.ln()
        - ln_factorial(b + n as u64);
    Ok(LogReal::from_ln(ln))
}

/// Eigenvalue (a_1+1)/(N+n+1) of T_N(|w_1|²/(1+|w|²)) on e_a.
pub fn cpn_model_eigenvalue(params: &CPnParams, index: &MultiIndex) -> f64 {
    (index.entries()[0] as f64 + 1.0) / (params.big_n as f64 + params.n as f64 + 1.0)
}

/// Number of a with |a| ≤ N and a_1 = k: C(N-k+n-1, n-1).
pub fn cpn_level_multiplicity(params: &CPnParams, k: u64) -> f64 {
    if k > params.big_n {
        return 0.0;
    }
    binomial(params.big_n - k + params.n as u64 - 1, params.n as u64 - 1)
}

/// Λ_a (N-|a|)^{(N-|a|)/2} N^{-N/2} ∏ a_j^{a_j/2}, valid for |a| < N.
pub fn cpn_sup_norm_closed(state: &CPnState) -> Result<LogReal> {
    let nn = state.params.big_n;
    let k = state.index.order();
    if k >= nn {
        return Err(Error::Degenerate(format!("|a| = N = {nn}: supremum is approached at infinity of the chart")));
    }
    let rest = (nn - k) as f64;
    let mut ln = cpn_ln_normalizer(&state.params, &state.index)? + 0.5 * rest * rest.ln() - 0.5 * nn as f64 * (nn as f64).ln();
    for &a in state.index.entries() {
        if a > 0 {
            ln += 0.5 * a as f64 * (a as f64).ln();
        }
    }
    Ok(LogReal::from_ln(ln))
}

/// Maximiser r_j = √(a_j/(N-|a|)) of |e_a|, for |a| < N.
pub fn cpn_sup_point(state: &CPnState) -> Result<Vec<Complex64>> {
    let nn = state.params.big_n;
    let k = state.index.order();
    if k >= nn {
        return Err(Error::Degenerate("no finite maximiser when |a| = N".into()));
    }
    Ok(state
        .index
        .entries()
        .iter()
        .map(|&a| Complex64::new((a as f64 / (nn - k) as f64).sqrt(), 0.0))
        .collect())
}

/// ‖e_a‖_p for a = (a_1, 0, …, 0).
///
/// ‖e_a‖_p^p = Λ^p (2π)ⁿ / ∏_{k=2}^{n} (pN/2 + k) · B(p(N-a_1)/2 + 1, p a_1/2 + 1).
pub fn cpn_lp_norm_closed(params: &CPnParams, a1: u64, p: Exponent) -> Result<LogReal> {
    let idx = MultiIndex::first_axis(params.n, a1 as u32);
    let state = CPnState::new(*params, idx)?;
    let p = match p {
        Exponent::Infinity => return cpn_sup_norm_closed(&state),
        Exponent::Finite(p) => p,
    };
    let nn = params.big_n as f64;
    let a = a1 as f64;
    let mut ln = p * cpn_ln_normalizer(params, &state.index)? + params.n as f64 * (2.0 * PI).ln();
    for k in 2..=params.n {
        ln -= (p * nn / 2.0 + k as f64).ln();
    }
    ln += log_beta(p * (nn - a) / 2.0 + 1.0, p * a / 2.0 + 1.0)?;
    Ok(LogReal::from_ln(ln / p))
}

/// C(n, p) = (2/p)^{(n-1/2)/p} (π^{n+1/2} 2^{n-1/2})^{-(1/2-1/p)}.
pub fn cpn_asymptotic_constant(n: usize, p: Exponent) -> f64 {
    let n = n as f64;
    let q = p.recip();
    let head = if q == 0.0 { 1.0 } else { (2.0 * q).powf((n - 0.5) * q) };
    head * (PI.powf(n + 0.5) * 2f64.powf(n - 0.5)).powf(-(0.5 - q))
}

/// C(n, p) N^{(n-1/2)(1/2-1/p)} for the sections with a_1 = round(N/2).
pub fn cpn_asymptotic_prediction(n: usize, p: Exponent, big_n: u64) -> AsymptoticPrediction {
    let exponent = (n as f64 - 0.5) * (0.5 - p.recip());
    let ln = cpn_asymptotic_constant(n, p).ln() + exponent * (big_n as f64).ln();
    AsymptoticPrediction { exponent, value: LogReal::from_ln(ln) }
}

/// The bounded symbol w^α w̄^β / (1+|w|²)^d on ℂℙⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpnMonomial {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub d: u64,
}

impl CpnMonomial {
    /// H = |w_1|²/(1+|w|²) in dimension n.
    pub fn h(n: usize) -> Self {
        Self::h_power(n, 1)
    }

    pub fn h_power(n: usize, k: u32) -> Self {
        let e = MultiIndex::first_axis(n, k);
        CpnMonomial { alpha: e.clone(), beta: e, d: k as u64 }
    }

    pub fn constant(n: usize) -> Self {
        CpnMonomial { alpha: MultiIndex::zeros(n), beta: MultiIndex::zeros(n), d: 0 }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.alpha.dim() != n || self.beta.dim() != n {
            return domain("monomial dimension does not match n");
        }
        if self.alpha.order() + self.beta.order() > 2 * self.d {
            return Err(Error::UnsupportedSymbol(format!(
                "w^{} w̄^{} / (1+|w|²)^{} is unbounded on the chart",
                self.alpha, self.beta, self.d
            )));
        }
        Ok(())
    }
}

/// ⟨e_a, T_N(w^α w̄^β/(1+|w|²)^d) e_b⟩, zero unless b + α = a + β, and then
/// Λ_a Λ_b (2π)ⁿ (a+β)! (N+d-|a+β|)! / (N+d+n)!.
pub fn cpn_matrix_element(params: &CPnParams, symbol: &CpnMonomial, a: &MultiIndex, b: &MultiIndex) -> Result<f64> {
    symbol.validate(params.n)?;
    if a.dim() != params.n || b.dim() != params.n || a.order() > params.big_n || b.order() > params.big_n {
        return domain("basis index out of range");
    }
    let s: Vec<u32> = a.entries().iter().zip(symbol.beta.entries()).map(|(x, y)| x + y).collect();
    let t: Vec<u32> = b.entries().iter().zip(symbol.alpha.entries()).map(|(x, y)| x + y).collect();
    if s != t {
        return Ok(0.0);
    }
    let s = MultiIndex(s);
    let top = params.big_n + symbol.d;
    let ln = cpn_ln_normalizer(params, a)? + cpn_ln_normalizer(params, b)? + params.n as f64 * (2.0 * PI).ln()
        + s.entries().iter().map(|&x| ln_factorial(x as u64)).sum::<f64>()
        + ln_factorial(top - s.order())
        - ln_factorial(top + params.n as u64);
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sup_example() {
        let s = CPnState::new(CPnParams::new(1, 2).unwrap(), MultiIndex(vec![1])).unwrap();
        let v = cpn_sup_norm_closed(&s).unwrap().to_f64().unwrap();
        assert_relative_eq!(v, (3.0 / PI).sqrt() / 2.0, max_relative = 1e-14);
        let at = cpn_eval(&s, &cpn_sup_point(&s).unwrap()).unwrap().magnitude.to_f64().unwrap();
        assert_relative_eq!(at, v, max_relative = 1e-14);
        let top = CPnState::new(CPnParams::new(1, 2).unwrap(), MultiIndex(vec![2])).unwrap();
        assert!(matches!(cpn_sup_norm_closed(&top), Err(Error::Degenerate(_))));
    }

    #[test]
    fn lp_example() {
        let pr = CPnParams::new(1, 2).unwrap();
        let v = cpn_lp_norm_closed(&pr, 1, Exponent::Finite(4.0)).unwrap().to_f64().unwrap();
        assert_relative_eq!(v, (3.0 / (5.0 * PI)).powf(0.25), max_relative = 1e-13);
    }

    #[test]
    fn l2_normalisation() {
        for n in 1..=3 {
            for nn in [1u64, 2, 7, 50, 200] {
                let pr = CPnParams::new(n, nn).unwrap();
                for a1 in 0..=nn {
                    let v = cpn_lp_norm_closed(&pr, a1, Exponent::Finite(2.0)).unwrap().ln_abs();
                    assert!(v.abs() < 1e-12, "n={n} N={nn} a1={a1}: {v}");
                }
            }
        }
    }

    #[test]
    fn lcalcul_examples() {
        assert_relative_eq!(lcalcul_integral(1, &MultiIndex(vec![1]), 1).unwrap().to_f64().unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(lcalcul_integral(2, &MultiIndex(vec![1, 0]), 2).unwrap().to_f64().unwrap(), 1.0 / 96.0, max_relative = 1e-14);
        assert!(lcalcul_integral(1, &MultiIndex(vec![3]), 2).is_err());
    }

    #[test]
    fn model_eigenvalues_from_matrix_elements() {
        for n in 1..=3 {
            let pr = CPnParams::new(n, 6).unwrap();
            let h = CpnMonomial::h(n);
            let idx = MultiIndex::up_to_order(n, 6);
            for a in &idx {
                for b in &idx {
                    let m = cpn_matrix_element(&pr, &h, a, b).unwrap();
                    if a == b {
                        assert_relative_eq!(m, cpn_model_eigenvalue(&pr, a), max_relative = 1e-13);
                    } else {
                        assert_eq!(m, 0.0);
                    }
                }
                let one = cpn_matrix_element(&pr, &CpnMonomial::constant(n), a, a).unwrap();
                assert_relative_eq!(one, 1.0, max_relative = 1e-13);
            }
            let total: f64 = (0..=6).map(|k| cpn_level_multiplicity(&pr, k)).sum();
            assert_eq!(total, pr.dimension());
        }
        let bad = CpnMonomial { alpha: MultiIndex(vec![2]), beta: MultiIndex(vec![0]), d: 0 };
        assert!(matches!(cpn_matrix_element(&CPnParams::new(1, 3).unwrap(), &bad, &MultiIndex(vec![0]), &MultiIndex(vec![0])), Err(Error::UnsupportedSymbol(_))));
    }

    #[test]
    fn asymptotic_constants() {
        assert!((cpn_asymptotic_constant(1, Exponent::Infinity) - 0.35638).abs() < 1e-4);
        let want = 0.5f64.powf(0.375) * (PI.powf(2.5) * 2f64.powf(1.5)).powf(-0.25);
        assert_relative_eq!(cpn_asymptotic_constant(2, Exponent::Finite(4.0)), want, max_relative = 1e-14);
        assert_relative_eq!(cpn_asymptotic_constant(3, Exponent::Finite(2.0)), 1.0, max_relative = 1e-14);
    }
}
