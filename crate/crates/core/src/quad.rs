//! Adaptive quadrature and grid searches used as independent checks on the
//! closed-form norms.
//!
//! Nothing in here calls the Gamma or Beta functions: the oracles evaluate
//! the eigenfunctions pointwise from their definitions and integrate.

use crate::cpn::{CPnState, CpnMonomial, CPnParams};
use crate::error::{domain, Error, Result};
use crate::fock::FockState;
use crate::special_fn::LogReal;
use crate::spectral::{quasimode_sup_norm, Quasimode, SpaceParams, SupStrategy};
use crate::types::{Exponent, MultiIndex};
use num_complex::Complex64;
use std::cell::RefCell;
use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// [start, ∞), split at `split`; the tail is mapped by r = split + t/(1-t).
    SemiInfinite { start: f64, split: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Number of equal panels the finite part starts with.
    pub initial_panels: usize,
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-12, abs_tol: 0.0, max_depth: 60, initial_panels: 8, max_intervals: 20_000 }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
enum Map {
    Direct,
    Tail(f64),
}

struct Panel {
    a: f64,
    b: f64,
    map: Map,
    depth: u32,
    value: f64,
    error: f64,
}

fn apply<F: Fn(f64) -> f64>(f: &F, map: Map, t: f64) -> f64 {
    match map {
        Map::Direct => f(t),
        Map::Tail(s) => {
            let u = 1.0 - t;
            f(s + t / u) / (u * u)
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, map: Map, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = apply(f, map, c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = apply(f, map, c - x);
        let f2 = apply(f, map, c + x);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    if !resk.is_finite() {
        return domain(format!("integrand is not finite on [{a}, {b}]"));
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    resasc *= h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    Ok((resk * h, err.max(50.0 * f64::EPSILON * (resk * h).abs())))
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature.
///
/// The subinterval with the largest error estimate is bisected until the
/// summed estimate falls below `max(rel_tol·|I|, abs_tol)`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, dom: Domain, spec: &QuadratureSpec) -> Result<QuadResult> {
    let mut segs: Vec<(f64, f64, Map)> = Vec::new();
    let k = spec.initial_panels.max(1);
    let (a, b) = match dom {
        Domain::Finite(a, b) => (a, b),
        Domain::SemiInfinite { start, split } => {
            if !(split > start) {
                return domain("semi-infinite split must exceed start");
            }
            segs.push((0.0, 0.5, Map::Tail(split)));
            segs.push((0.5, 1.0, Map::Tail(split)));
            (start, split)
        }
    };
    if !(a.is_finite() && b.is_finite()) {
        return domain("finite integration limits required");
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    for i in 0..k {
        let lo = a + (b - a) * i as f64 / k as f64;
        let hi = if i + 1 == k { b } else { a + (b - a) * (i + 1) as f64 / k as f64 };
        segs.push((lo, hi, Map::Direct));
    }
    let mut panels = Vec::with_capacity(segs.len() * 4);
    for (lo, hi, map) in segs {
        let (value, error) = gk15(&f, map, lo, hi)?;
        panels.push(Panel { a: lo, b: hi, map, depth: 0, value, error });
    }
    let mut evals = 15 * panels.len();
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= (spec.rel_tol * total.abs()).max(spec.abs_tol) {
            return Ok(QuadResult { value: total, error: err, evaluations: evals });
        }
        let (iw, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let w = panels.swap_remove(iw);
        let mid = 0.5 * (w.a + w.b);
        if w.depth >= spec.max_depth || panels.len() + 2 > spec.max_intervals || mid <= w.a || mid >= w.b {
            // Round-off floor relative to ∫|f|, reached under heavy cancellation.
            let mass: f64 = panels.iter().map(|p| p.value.abs()).sum::<f64>() + w.value.abs();
            if err <= 1e3 * f64::EPSILON * mass.max(spec.abs_tol) {
                panels.push(w);
                let total: f64 = panels.iter().map(|p| p.value).sum();
                return Ok(QuadResult { value: total, error: err, evaluations: evals });
            }
            let (lo, hi) = match w.map {
                Map::Direct => (w.a, w.b),
                Map::Tail(s) => (s + w.a / (1.0 - w.a), s + w.b / (1.0 - w.b)),
            };
            return Err(Error::NonConvergence { a: lo, b: hi, estimate: err });
        }
        for (lo, hi) in [(w.a, mid), (mid, w.b)] {
            let (value, error) = gk15(&f, w.map, lo, hi)?;
            panels.push(Panel { a: lo, b: hi, map: w.map, depth: w.depth + 1, value, error });
        }
        evals += 30;
    }
}

/// Iterated integral over a product of domains; `f` receives the full point.
pub fn integrate_nested<F: Fn(&[f64]) -> f64>(f: F, domains: &[Domain], spec: &QuadratureSpec) -> Result<QuadResult> {
    if domains.is_empty() {
        return Ok(QuadResult { value: f(&[]), error: 0.0, evaluations: 1 });
    }
    let mut prefix = Vec::with_capacity(domains.len());
    nested_rec(&f, domains, spec, &mut prefix)
}

fn nested_rec<F: Fn(&[f64]) -> f64>(
    f: &F,
    domains: &[Domain],
    spec: &QuadratureSpec,
    prefix: &mut [f64],
) -> Result<QuadResult> {
    let depth = prefix.len();
    if depth + 1 == domains.len() {
        let base = prefix.to_vec();
        let mut pt = base.clone();
        pt.push(0.0);
        let pt = RefCell::new(pt);
        return integrate_1d(
            |x| {
                let mut p = pt.borrow_mut();
                p[depth] = x;
                f(&p)
            },
            domains[depth],
            spec,
        );
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evals = RefCell::new(0usize);
    let inner_spec = QuadratureSpec { rel_tol: spec.rel_tol * 0.1, ..*spec };
    let pre = RefCell::new(prefix.to_vec());
    let r = integrate_1d(
        |x| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            let mut p = pre.borrow().clone();
            p.push(x);
            match nested_rec(f, domains, &inner_spec, &mut p) {
                Ok(q) => {
                    *evals.borrow_mut() += q.evaluations;
                    q.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        domains[depth],
        spec,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(QuadResult { evaluations: evals.into_inner(), ..r })
}

/// Maximises a unimodal function on [a, b] by golden-section search.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}


/// ln k! as a plain sum of logarithms.
fn ln_fact(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// What to integrate or search over.
#[derive(Debug, Clone, Copy)]
pub enum Eigenfunction<'a> {
    Fock(&'a FockState),
    Cpn(&'a CPnState),
    Quasimode(&'a Quasimode),
}

/// Resolution of [`sup_norm_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    pub grid_points: usize,
    pub refine_tol: f64,
    pub max_rounds: usize,
    /// Strategy used for quasimodes.
    pub quasimode: SupStrategy,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec { grid_points: 256, refine_tol: 1e-14, max_rounds: 400, quasimode: SupStrategy::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupSearchResult {
    pub value: LogReal,
    /// Maximiser in the affine chart; `None` when it lies at infinity.
    pub argmax: Option<Vec<Complex64>>,
    /// Moduli (|z_0|, …, |z_n|) of the maximiser on the unit sphere (ℂℙⁿ only).
    pub homogeneous: Option<Vec<f64>>,
}

/// Grid search plus golden-section refinement for sup |f|.
///
/// Basis states are searched coordinate by coordinate (ℂⁿ) or over the
/// simplex of squared homogeneous moduli (ℂℙⁿ), which also covers maximisers
/// at infinity of the affine chart.
pub fn sup_norm_search(f: Eigenfunction<'_>, search: &SearchSpec) -> Result<SupSearchResult> {
    match f {
        Eigenfunction::Fock(s) => {
            let nn = s.params.big_n;
            let mut ln = 0.0;
            let mut pt = Vec::with_capacity(s.params.n);
            for &v in s.index.entries() {
                let v = v as f64;
                let c = 0.5 * (1.0 + v) * nn.ln() - 0.5 * PI.ln() - 0.5 * ln_fact(v as u64);
                let phi = |r: f64| if r == 0.0 { if v == 0.0 { c } else { f64::NEG_INFINITY } } else { c + v * r.ln() - 0.5 * nn * r * r };
                let top = 3.0 * (v / nn).sqrt() + 6.0 / nn.sqrt();
                let g = search.grid_points.max(8);
                let h = top / g as f64;
                let (mut br, mut bv) = (0.0, phi(0.0));
                for i in 1..=g {
                    let r = i as f64 * h;
                    let val = phi(r);
                    if val > bv {
                        bv = val;
                        br = r;
                    }
                }
                let (r, val) = golden_max(phi, (br - h).max(0.0), br + h, search.refine_tol);
                if val > bv {
                    bv = val;
                    br = r;
                }
                ln += bv;
                pt.push(Complex64::new(br, 0.0));
            }
            Ok(SupSearchResult { value: LogReal::from_ln(ln), argmax: Some(pt), homogeneous: None })
        }
        Eigenfunction::Cpn(s) => {
            let n = s.params.n;
            let nn = s.params.big_n;
            let a: Vec<f64> = s.index.entries().iter().map(|&x| x as f64).collect();
            let rest = (nn - s.index.order()) as f64;
            let ln_lambda = 0.5
                * ((1..=n as u64).map(|k| ((nn + k) as f64).ln()).sum::<f64>() - n as f64 * (2.0 * PI).ln() + ln_fact(nn)
                    - s.index.entries().iter().map(|&x| ln_fact(x as u64)).sum::<f64>()
                    - ln_fact(nn - s.index.order()));
            let term = |c: f64, t: f64| if c == 0.0 { 0.0 } else if t <= 0.0 { f64::NEG_INFINITY } else { 0.5 * c * t.ln() };
            let value = |t: &[f64]| -> f64 {
                let t0 = 1.0 - t.iter().sum::<f64>();
                term(rest, t0) + a.iter().zip(t).map(|(&c, &x)| term(c, x)).sum::<f64>()
            };
            let mut t = vec![1.0 / (n as f64 + 1.0); n];
            let mut cur = value(&t);
            for _ in 0..search.max_rounds {
                let before = cur;
                for j in 0..n {
                    let others: f64 = t.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x).sum();
                    let room = (1.0 - others).max(0.0);
                    let g = search.grid_points.max(8);
                    let mut y = t.clone();
                    let (mut bx, mut bv) = (t[j], cur);
                    for i in 0..=g {
                        y[j] = room * i as f64 / g as f64;
                        let v = value(&y);
                        if v > bv {
                            bv = v;
                            bx = y[j];
                        }
                    }
                    let h = room / g as f64;
                    let (x, v) = golden_max(
                        |x| {
                            y[j] = x;
                            value(&y)
                        },
                        (bx - h).max(0.0),
                        (bx + h).min(room),
                        search.refine_tol,
                    );
                    if v > bv {
                        bv = v;
                        bx = x;
                    }
                    // the boundary points are exact candidates
                    for x in [0.0, room] {
                        y[j] = x;
                        let v = value(&y);
                        if v > bv {
                            bv = v;
                            bx = x;
                        }
                    }
                    t[j] = bx;
                    cur = bv;
                }
                if cur - before <= 1e-16 * cur.abs().max(1.0) {
                    break;
                }
            }
            let t0 = (1.0 - t.iter().sum::<f64>()).max(0.0);
            let mut hom = vec![t0.sqrt()];
            hom.extend(t.iter().map(|x| x.sqrt()));
            let argmax = if t0 > 0.0 { Some(t.iter().map(|x| Complex64::new((x / t0).sqrt(), 0.0)).collect()) } else { None };
            Ok(SupSearchResult { value: LogReal::from_ln(ln_lambda + cur), argmax, homogeneous: Some(hom) })
        }
        Eigenfunction::Quasimode(q) => {
            let est = quasimode_sup_norm(q, &search.quasimode)?;
            Ok(SupSearchResult { value: LogReal::from_ln(est.ln_value), argmax: Some(est.argmax), homogeneous: None })
        }
    }
}

/// ‖f‖_p by quadrature of |f|^p; p = ∞ is delegated to [`sup_norm_search`].
///
/// Fock basis states factor into n radial integrals. ℂℙⁿ basis states are
/// integrated over [0, π/2)ⁿ after r_j = tan φ_j. Quasimodes (n ≤ 2) use a
/// trapezoidal rule in each angle and adaptive quadrature in the radii.
pub fn lp_norm_quadrature(f: Eigenfunction<'_>, p: Exponent, spec: &QuadratureSpec) -> Result<LogReal> {
    let p = match p {
        Exponent::Infinity => return Ok(sup_norm_search(f, &SearchSpec::default())?.value),
        Exponent::Finite(p) => p,
    };
    match f {
        Eigenfunction::Fock(s) => {
            let nn = s.params.big_n;
            let mut ln_total = 0.0;
            for &v in s.index.entries() {
                let v = v as f64;
                let c = 0.5 * (1.0 + v) * nn.ln() - 0.5 * PI.ln() - 0.5 * ln_fact(v as u64);
                let expo = |r: f64| p * (c + v * r.ln() - 0.5 * nn * r * r) + r.ln();
                let rstar = ((p * v + 1.0) / (p * nn)).sqrt();
                let shift = expo(rstar);
                let split = 4.0 * (v / nn).sqrt() + rstar + 8.0 / (p * nn).sqrt();
                let r = integrate_1d(|r| if r <= 0.0 { 0.0 } else { (expo(r) - shift).exp() }, Domain::SemiInfinite { start: 0.0, split }, spec)?;
                ln_total += shift + (2.0 * PI * r.value).ln();
            }
            Ok(LogReal::from_ln(ln_total / p))
        }
        Eigenfunction::Cpn(s) => {
            let (ln_lambda, ln_int) = cpn_state_integral(s, p, spec, false)?;
            let n = s.params.n as f64;
            Ok(LogReal::from_ln((p * ln_lambda + n * (4.0 * PI).ln() + ln_int) / p))
        }
        Eigenfunction::Quasimode(q) => quasimode_lp_quadrature(q, p, spec, 64),
    }
}

/// Same ℂℙ² norm with the radii in polar form (ρ, ψ), ρ = tan χ; an
/// independent path for cross-checking the Cartesian one.
pub fn cpn_lp_norm_quadrature_polar(s: &CPnState, p: f64, spec: &QuadratureSpec) -> Result<LogReal> {
    if s.params.n != 2 {
        return domain("polar path is implemented for n = 2");
    }
    let (ln_lambda, ln_int) = cpn_state_integral(s, p, spec, true)?;
    Ok(LogReal::from_ln((p * ln_lambda + 2.0 * (4.0 * PI).ln() + ln_int) / p))
}

fn cpn_state_integral(s: &CPnState, p: f64, spec: &QuadratureSpec, polar: bool) -> Result<(f64, f64)> {
    let n = s.params.n;
    let nn = s.params.big_n;
    let ln_lambda = 0.5
        * ((1..=n as u64).map(|k| ((nn + k) as f64).ln()).sum::<f64>() - n as f64 * (2.0 * PI).ln() + ln_fact(nn)
            - s.index.entries().iter().map(|&x| ln_fact(x as u64)).sum::<f64>()
            - ln_fact(nn - s.index.order()));
    let e: Vec<f64> = s.index.entries().iter().map(|&a| p * a as f64 + 1.0).collect();
    let m = p * nn as f64 / 2.0 + n as f64 + 1.0;
    // ∫ ∏ r_j^{e_j} (1+|r|²)^{-m} dr with r_j = tan φ_j
    let ln_cart = |phi: &[f64]| -> f64 {
        let mut ln = 0.0;
        let mut r2 = 0.0;
        for (j, &f) in phi.iter().enumerate() {
            let t = f.tan();
            r2 += t * t;
            ln += e[j] * t.ln() - 2.0 * f.cos().ln();
        }
        ln - m * r2.ln_1p()
    };
    let ln_polar = |x: &[f64]| -> f64 {
        let (psi, chi) = (x[0], x[1]);
        let rho = chi.tan();
        (e[0] + e[1] + 1.0) * rho.ln() + e[0] * psi.cos().ln() + e[1] * psi.sin().ln() - 2.0 * chi.cos().ln() - m * (rho * rho).ln_1p()
    };
    let ln_f = |x: &[f64]| if polar { ln_polar(x) } else { ln_cart(x) };
    // scale by the value near the analytic maximiser of the untransformed integrand
    let sum_e: f64 = e.iter().sum();
    let denom = (2.0 * m - sum_e).max(1e-3);
    let rstar: Vec<f64> = e.iter().map(|&x| (x / denom).sqrt()).collect();
    let x0: Vec<f64> = if polar {
        let rho = rstar.iter().map(|r| r * r).sum::<f64>().sqrt();
        vec![rstar[1].atan2(rstar[0]), rho.atan()]
    } else {
        rstar.iter().map(|r| r.atan()).collect()
    };
    let shift = ln_f(&x0);
    let doms = vec![Domain::Finite(0.0, 0.5 * PI); n];
    let g = |x: &[f64]| {
        if x.iter().any(|&v| v <= 0.0 || v >= 0.5 * PI) {
            return 0.0;
        }
        let v = (ln_f(x) - shift).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    };
    let r = integrate_nested(g, &doms, spec)?;
    Ok((ln_lambda, shift + r.value.ln()))
}

/// ∫_{[0,∞)ⁿ} ∏ r_j^{2a_j+1} (1+|r|²)^{-(b+n+1)} dr by nested adaptive quadrature.
pub fn lcalcul_quadrature(n: usize, a: &MultiIndex, b: u64, spec: &QuadratureSpec) -> Result<f64> {
    if a.dim() != n {
        return domain("index dimension does not match n");
    }
    let m = (b + n as u64 + 1) as i32;
    let ex: Vec<i32> = a.entries().iter().map(|&x| 2 * x as i32 + 1).collect();
    let doms = vec![Domain::SemiInfinite { start: 0.0, split: 1.0 }; n];
    Ok(integrate_nested(
        |r| {
            let r2: f64 = r.iter().map(|x| x * x).sum();
            r.iter().zip(&ex).map(|(x, &k)| x.powi(k)).product::<f64>() * (1.0 + r2).powi(-m)
        },
        &doms,
        spec,
    )?
    .value)
}

/// ⟨e_a, T_N(w^α w̄^β/(1+|w|²)^d) e_b⟩ by quadrature: an `angular_points`
/// trapezoidal rule in each angle and nested adaptive quadrature in the radii.
pub fn cpn_toeplitz_quadrature(
    params: &CPnParams,
    symbol: &CpnMonomial,
    a: &MultiIndex,
    b: &MultiIndex,
    angular_points: usize,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    symbol.validate(params.n)?;
    let n = params.n;
    let nn = params.big_n;
    let ln_lam = |x: &MultiIndex| {
        0.5 * ((1..=n as u64).map(|k| ((nn + k) as f64).ln()).sum::<f64>() - n as f64 * (2.0 * PI).ln() + ln_fact(nn)
            - x.entries().iter().map(|&v| ln_fact(v as u64)).sum::<f64>()
            - ln_fact(nn - x.order()))
    };
    // angular factor ∏_j ∫_0^{2π} e^{i k_j θ} dθ by the trapezoidal rule
    let m = angular_points.max(1);
    let mut ang = Complex64::new(1.0, 0.0);
    for j in 0..n {
        let k = b.0[j] as f64 + symbol.alpha.0[j] as f64 - a.0[j] as f64 - symbol.beta.0[j] as f64;
        let s: Complex64 = (0..m).map(|i| Complex64::from_polar(1.0, k * 2.0 * PI * i as f64 / m as f64)).sum();
        ang *= s * (2.0 * PI / m as f64);
    }
    if ang.norm() < 1e-13 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ex: Vec<f64> = (0..n).map(|j| (a.0[j] + b.0[j] + symbol.alpha.0[j] + symbol.beta.0[j]) as f64 + 1.0).collect();
    let pw = (nn + symbol.d + n as u64 + 1) as f64;
    let doms = vec![Domain::Finite(0.0, 0.5 * PI); n];
    let rad = integrate_nested(
        |phi| {
            if phi.iter().any(|&v| v <= 0.0 || v >= 0.5 * PI) {
                return 0.0;
            }
            let mut ln = 0.0;
            let mut r2 = 0.0;
            for (j, &f) in phi.iter().enumerate() {
                let t = f.tan();
                r2 += t * t;
                ln += ex[j] * t.ln() - 2.0 * f.cos().ln();
            }
            (ln - pw * r2.ln_1p()).exp()
        },
        &doms,
        spec,
    )?;
    let pre = (ln_lam(a) + ln_lam(b)).exp() * 2f64.powi(n as i32);
    Ok(ang * pre * rad.value)
}

fn quasimode_radial(q: &Quasimode) -> (Domain, bool) {
    match q.space {
        SpaceParams::Cpn(_) => (Domain::Finite(0.0, 0.5 * PI), true),
        SpaceParams::Fock(p) => {
            let top = q.expansion.iter().map(|(a, _)| a.order()).max().unwrap_or(0) as f64;
            (Domain::SemiInfinite { start: 0.0, split: (top / p.big_n).sqrt() + 6.0 / p.big_n.sqrt() }, false)
        }
    }
}

/// ln of (2π/M)ⁿ Σ_θ |V(r, θ)|^p over the angular grid.
fn ln_angular_power(q: &Quasimode, radii: &[f64], p: f64, m: usize) -> f64 {
    let n = radii.len();
    let total = m.pow(n as u32);
    let mut vals = Vec::with_capacity(total);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for idx in 0..total {
        let mut rem = idx;
        for j in 0..n {
            w[j] = Complex64::from_polar(radii[j], 2.0 * PI * (rem % m) as f64 / m as f64);
            rem /= m;
        }
        vals.push(p * q.ln_abs_at(&w));
    }
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + vals.iter().map(|v| (v - top).exp()).sum::<f64>().ln() + n as f64 * (2.0 * PI / m as f64).ln()
}

fn quasimode_radial_ln_integrand(q: &Quasimode, s: &[f64], p: f64, m: usize, tangent: bool) -> f64 {
    let mut ln = 0.0;
    let radii: Vec<f64> = s
        .iter()
        .map(|&x| {
            if tangent {
                ln -= 2.0 * x.cos().ln();
                x.tan()
            } else {
                x
            }
        })
        .collect();
    let r2: f64 = radii.iter().map(|r| r * r).sum();
    ln += radii.iter().map(|r| r.ln()).sum::<f64>() + q.space.volume_density(r2).ln();
    ln + ln_angular_power(q, &radii, p, m)
}

fn quasimode_lp_quadrature(q: &Quasimode, p: f64, spec: &QuadratureSpec, m: usize) -> Result<LogReal> {
    let n = q.space.n();
    if n > 2 {
        return Err(Error::DimensionTooLarge(n));
    }
    let (dom, tangent) = quasimode_radial(q);
    let m = if n == 1 { m } else { m.min(24) };
    let (lo, hi) = match dom {
        Domain::Finite(a, b) => (a, b),
        Domain::SemiInfinite { start, split } => (start, split),
    };
    // scale from a coarse sample
    let k: usize = if n == 1 { 200 } else { 40 };
    let mut shift = f64::NEG_INFINITY;
    let mut x = vec![0.0; n];
    for idx in 0..k.pow(n as u32) {
        let mut rem = idx;
        for xj in x.iter_mut() {
            *xj = lo + (hi - lo) * ((rem % k) as f64 + 0.5) / k as f64;
            rem /= k;
        }
        shift = shift.max(quasimode_radial_ln_integrand(q, &x, p, m, tangent));
    }
    let doms = vec![dom; n];
    let r = integrate_nested(
        |s| {
            if s.iter().any(|&v| v <= 0.0 || (tangent && v >= 0.5 * PI)) {
                return 0.0;
            }
            let v = (quasimode_radial_ln_integrand(q, s, p, m, tangent) - shift).exp();
            if v.is_nan() {
                0.0
            } else {
                v
            }
        },
        &doms,
        spec,
    )?;
    Ok(LogReal::from_ln((shift + r.value.ln()) / p))
}

/// ln of the L² mass of a ℂℙ¹ quasimode on {H < h_lo} ∪ {H > h_hi},
/// H = |w|²/(1+|w|²).
pub fn cpn_quasimode_band_mass(q: &Quasimode, h_lo: f64, h_hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    if q.space.n() != 1 || !matches!(q.space, SpaceParams::Cpn(_)) {
        return domain("band mass is implemented for ℂℙ¹ quasimodes");
    }
    if !(0.0 < h_lo && h_lo < h_hi && h_hi < 1.0) {
        return domain("need 0 < h_lo < h_hi < 1");
    }
    let spread = q.expansion.iter().map(|(a, _)| a.0[0]).max().unwrap_or(0) - q.expansion.iter().map(|(a, _)| a.0[0]).min().unwrap_or(0);
    let m = 2 * spread as usize + 8;
    let pieces = [(0.0, h_lo.sqrt().asin()), (h_hi.sqrt().asin(), 0.5 * PI)];
    let mut parts = Vec::new();
    for (a, b) in pieces {
        let f = |s: f64| quasimode_radial_ln_integrand(q, &[s], 2.0, m, true);
        let k = 256;
        let shift = (0..=k)
            .map(|i| a + (b - a) * i as f64 / k as f64)
            .filter(|&s| s > 0.0 && s < 0.5 * PI)
            .map(f)
            .fold(f64::NEG_INFINITY, f64::max);
        let r = integrate_1d(
            |s| {
                if s <= 0.0 || s >= 0.5 * PI {
                    return 0.0;
                }
                let v = (f(s) - shift).exp();
                if v.is_nan() {
                    0.0
                } else {
                    v
                }
            },
            Domain::Finite(a, b),
            spec,
        )?;
        parts.push(shift + r.value.ln());
    }
    let top = parts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(top + parts.iter().map(|v| (v - top).exp()).sum::<f64>().ln())
}
