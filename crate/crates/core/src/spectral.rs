//! Toeplitz matrices, spectral windows, random quasimodes and the
//! smoothed spectral projector.

use crate::cpn::{cpn_ln_normalizer, cpn_matrix_element, CPnParams, CpnMonomial};
use crate::error::{domain, Error, Result};
use crate::fock::{ln_fock_normaliser, shift_coefficient, FockParams};
use crate::quad::{golden_max, integrate_1d, Domain, QuadratureSpec};
use crate::types::{binomial, MultiIndex};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The phase space a Toeplitz operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpaceParams {
    Fock(FockParams),
    Cpn(CPnParams),
}

impl SpaceParams {
    pub fn n(&self) -> usize {
        match self {
            SpaceParams::Fock(p) => p.n,
            SpaceParams::Cpn(p) => p.n,
        }
    }

    pub fn big_n(&self) -> f64 {
        match self {
            SpaceParams::Fock(p) => p.big_n,
            SpaceParams::Cpn(p) => p.big_n as f64,
        }
    }

    /// ln of the normalising constant of basis element `a`.
    pub fn ln_normalizer(&self, a: &MultiIndex) -> Result<f64> {
        match self {
            SpaceParams::Fock(p) => Ok(ln_fock_normaliser(p, a)),
            SpaceParams::Cpn(p) => cpn_ln_normalizer(p, a),
        }
    }

    /// ln of the radial weight shared by all basis elements at |w|² = r2:
    /// -N r2/2 on ℂⁿ, -(N/2) ln(1 + r2) on ℂℙⁿ.
    pub fn ln_radial_factor(&self, r2: f64) -> f64 {
        match self {
            SpaceParams::Fock(p) => -0.5 * p.big_n * r2,
            SpaceParams::Cpn(p) => -0.5 * p.big_n as f64 * r2.ln_1p(),
        }
    }

    /// Volume density with respect to Lebesgue measure on the chart.
    pub fn volume_density(&self, r2: f64) -> f64 {
        match self {
            SpaceParams::Fock(_) => 1.0,
            SpaceParams::Cpn(p) => 2f64.powi(p.n as i32) * (1.0 + r2).powi(-(p.n as i32 + 1)),
        }
    }
}

/// Symbols with an exact reduction of their Toeplitz matrix elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Symbol {
    /// Σ c z^α z̄^β on ℂⁿ.
    FockPolynomial(Vec<(Complex64, MultiIndex, MultiIndex)>),
    /// Σ c w^α w̄^β / (1+|w|²)^d on ℂℙⁿ.
    CpnPolynomial(Vec<(Complex64, CpnMonomial)>),
}

impl Symbol {
    /// |z|² on ℂⁿ.
    pub fn fock_harmonic(n: usize) -> Self {
        Symbol::FockPolynomial(
            (0..n)
                .map(|j| {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    (Complex64::new(1.0, 0.0), MultiIndex(e.clone()), MultiIndex(e))
                })
                .collect(),
        )
    }

    /// Re z_j = (z_j + z̄_j)/2.
    pub fn fock_re(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        let half = Complex64::new(0.5, 0.0);
        Symbol::FockPolynomial(vec![(half, MultiIndex(e.clone()), MultiIndex::zeros(n)), (half, MultiIndex::zeros(n), MultiIndex(e))])
    }

    /// Σ c_m |z|^{2m}.
    pub fn fock_radial(coeffs: &[(f64, MultiIndex)]) -> Self {
        Symbol::FockPolynomial(coeffs.iter().map(|(c, m)| (Complex64::new(*c, 0.0), m.clone(), m.clone())).collect())
    }

    pub fn cpn_h(n: usize) -> Self {
        Symbol::CpnPolynomial(vec![(Complex64::new(1.0, 0.0), CpnMonomial::h(n))])
    }

    pub fn cpn_h_power(n: usize, k: u32) -> Self {
        Symbol::CpnPolynomial(vec![(Complex64::new(1.0, 0.0), CpnMonomial::h_power(n, k))])
    }

    /// True when every term is radial, so the matrix is diagonal.
    pub fn is_radial(&self) -> bool {
        match self {
            Symbol::FockPolynomial(t) => t.iter().all(|(_, a, b)| a == b),
            Symbol::CpnPolynomial(t) => t.iter().all(|(_, m)| m.alpha == m.beta),
        }
    }

    /// Least upper bound of |symbol| if it is bounded.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Symbol::FockPolynomial(t) => {
                if t.iter().all(|(_, a, b)| a.order() == 0 && b.order() == 0) {
                    t.iter().map(|(c, _, _)| c.norm()).sum()
                } else {
                    f64::INFINITY
                }
            }
            // |w^α w̄^β|/(1+|w|²)^d ≤ 1 when |α|+|β| ≤ 2d
            Symbol::CpnPolynomial(t) => t.iter().map(|(c, _)| c.norm()).sum(),
        }
    }
}

/// Basis selection for the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// Fock basis elements with |α| ≤ K.
    FockOrder(u32),
    /// The whole (finite) space of sections on ℂℙⁿ.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixEntries {
    Diagonal(Vec<Complex64>),
    Dense(DMatrix<Complex64>),
}

/// Matrix of T_N(f) in an orthonormal basis, entries ⟨e_row, T_N(f) e_col⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix {
    pub space: SpaceParams,
    pub basis: Vec<MultiIndex>,
    pub entries: MatrixEntries,
}

impl ToeplitzMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.entries {
            MatrixEntries::Dense(m) => m.clone(),
            MatrixEntries::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())),
        }
    }

    /// max |M - M*| over entries.
    pub fn hermitian_defect(&self) -> f64 {
        match &self.entries {
            MatrixEntries::Diagonal(d) => d.iter().map(|x| x.im.abs() * 2.0).fold(0.0, f64::max),
            MatrixEntries::Dense(m) => {
                let mut worst = 0.0f64;
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                worst
            }
        }
    }
}

fn fock_entry(params: &FockParams, terms: &[(Complex64, MultiIndex, MultiIndex)], mu: &MultiIndex, nu: &MultiIndex) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, alpha, beta) in terms {
        if alpha.dim() != params.n || beta.dim() != params.n {
            return domain("symbol dimension does not match n");
        }
        // ⟨e_μ, z^α z̄^β e_ν⟩ = ⟨z^β e_μ, z^α e_ν⟩
        let lhs: Vec<u32> = mu.entries().iter().zip(beta.entries()).map(|(x, y)| x + y).collect();
        let rhs: Vec<u32> = nu.entries().iter().zip(alpha.entries()).map(|(x, y)| x + y).collect();
        if lhs == rhs {
            let v = shift_coefficient(params, nu, alpha) * shift_coefficient(params, mu, beta);
            acc += c * v.to_f64()?;
        }
    }
    Ok(acc)
}

pub fn build_matrix(space: &SpaceParams, symbol: &Symbol, truncation: Truncation) -> Result<ToeplitzMatrix> {
    assemble(space, symbol, truncation, symbol.is_radial())
}

/// Like [`build_matrix`] but computes every entry, including those a radial
/// symbol forces to vanish.
pub fn build_dense_matrix(space: &SpaceParams, symbol: &Symbol, truncation: Truncation) -> Result<ToeplitzMatrix> {
    assemble(space, symbol, truncation, false)
}

fn assemble(space: &SpaceParams, symbol: &Symbol, truncation: Truncation, diagonal: bool) -> Result<ToeplitzMatrix> {
    let basis: Vec<MultiIndex> = match (space, truncation) {
        (SpaceParams::Fock(p), Truncation::FockOrder(k)) => MultiIndex::up_to_order(p.n, k),
        (SpaceParams::Cpn(p), Truncation::Full) => MultiIndex::up_to_order(p.n, p.big_n as u32),
        _ => return domain("truncation does not match the space"),
    };
    let entry = |a: &MultiIndex, b: &MultiIndex| -> Result<Complex64> {
        match (space, symbol) {
            (SpaceParams::Fock(p), Symbol::FockPolynomial(t)) => fock_entry(p, t, a, b),
            (SpaceParams::Cpn(p), Symbol::CpnPolynomial(t)) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, m) in t {
                    acc += c * cpn_matrix_element(p, m, a, b)?;
                }
                Ok(acc)
            }
            _ => Err(Error::UnsupportedSymbol("symbol does not live on this space".into())),
        }
    };
    let entries = if diagonal {
        MatrixEntries::Diagonal(basis.iter().map(|a| entry(a, a)).collect::<Result<_>>()?)
    } else {
        let d = basis.len();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = entry(&basis[i], &basis[j])?;
            }
        }
        MatrixEntries::Dense(m)
    };
    Ok(ToeplitzMatrix { space: *space, basis, entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: f64,
    /// Expansion of the unit eigenvector in the basis.
    pub vector: Vec<(MultiIndex, Complex64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub space: SpaceParams,
    /// Sorted by eigenvalue; ties keep basis order.
    pub pairs: Vec<Eigenpair>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// Eigendecomposition of a Hermitian Toeplitz matrix.
///
/// Diagonal matrices are read off directly; dense ones go through the
/// Hermitian eigensolver and every pair is checked for
/// ‖Mv - λv‖ ≤ 1e-10 ‖M‖.
pub fn eigendecompose(m: &ToeplitzMatrix) -> Result<Spectrum> {
    let defect = m.hermitian_defect();
    let mut pairs: Vec<Eigenpair> = match &m.entries {
        MatrixEntries::Diagonal(d) => {
            if defect > 1e-12 * d.iter().map(|x| x.norm()).fold(1.0, f64::max) {
                return Err(Error::Eigen(format!("diagonal is not real (defect {defect:e})")));
            }
            d.iter()
                .zip(&m.basis)
                .map(|(v, a)| Eigenpair { value: v.re, vector: vec![(a.clone(), Complex64::new(1.0, 0.0))] })
                .collect()
        }
        MatrixEntries::Dense(a) => {
            let scale = a.norm();
            if defect > 1e-12 * scale.max(1.0) {
                return Err(Error::Eigen(format!("matrix is not Hermitian (defect {defect:e})")));
            }
            let eig = nalgebra::SymmetricEigen::try_new(a.clone(), 1e-15, 10_000)
                .ok_or_else(|| Error::Eigen(format!("no convergence, dim {}, ‖M‖_F = {scale:e}", a.nrows())))?;
            let mut out = Vec::with_capacity(a.nrows());
            for k in 0..a.nrows() {
                let mut v = eig.eigenvectors.column(k).into_owned();
                // fix the phase: largest component real and positive
                let (imax, _) = v.iter().enumerate().fold((0, -1.0), |acc, (i, x)| if x.norm() > acc.1 + 1e-12 { (i, x.norm()) } else { acc });
                let ph = v[imax] / v[imax].norm();
                v /= ph;
                let lam = eig.eigenvalues[k];
                let res = (a * &v - v.scale(lam)).norm();
                if res > 1e-10 * scale.max(1e-300) {
                    return Err(Error::Eigen(format!("eigenpair {k} residual {res:e} exceeds 1e-10 ‖M‖ = {scale:e}")));
                }
                out.push(Eigenpair { value: lam, vector: m.basis.iter().cloned().zip(v.iter().cloned()).collect() });
            }
            out
        }
    };
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(Spectrum { space: m.space, pairs })
}

/// Eigenvalues in [E - C/N, E + C/N].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub energy: f64,
    pub width: f64,
    #[serde(rename = "N")]
    pub big_n: f64,
    pub lo: f64,
    pub hi: f64,
    /// Positions in `Spectrum::pairs`.
    pub members: Vec<usize>,
    /// Original C when the window had to be widened.
    pub expanded_from: Option<f64>,
}

fn window_bounds(e: f64, c: f64, big_n: f64) -> (f64, f64) {
    (e - c / big_n, e + c / big_n)
}

fn in_window(lam: f64, lo: f64, hi: f64) -> bool {
    let slack = 1e-12 * (lo.abs() + hi.abs()).max(1e-300);
    lam >= lo - slack && lam <= hi + slack
}

pub fn window_members(spectrum: &Spectrum, e: f64, c: f64) -> Result<SpectralWindow> {
    if !(c > 0.0) {
        return domain("window width C must be positive");
    }
    let big_n = spectrum.space.big_n();
    let (lo, hi) = window_bounds(e, c, big_n);
    let members: Vec<usize> = spectrum.pairs.iter().enumerate().filter(|(_, p)| in_window(p.value, lo, hi)).map(|(i, _)| i).collect();
    if members.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    Ok(SpectralWindow { energy: e, width: c, big_n, lo, hi, members, expanded_from: None })
}

/// Doubles C until the window is nonempty (at most 60 times).
pub fn window_members_expanding(spectrum: &Spectrum, e: f64, c: f64) -> Result<SpectralWindow> {
    let mut cc = c;
    for _ in 0..60 {
        match window_members(spectrum, e, cc) {
            Ok(mut w) => {
                if cc != c {
                    w.expanded_from = Some(c);
                }
                return Ok(w);
            }
            Err(Error::EmptyWindow { .. }) => cc *= 2.0,
            Err(e) => return Err(e),
        }
    }
    let (lo, hi) = window_bounds(e, cc, spectrum.space.big_n());
    Err(Error::EmptyWindow { lo, hi })
}

/// Spectrum of the diagonal ℂℙⁿ model T_N(|w_1|²/(1+|w|²)) without forming a matrix.
pub fn cpn_model_spectrum(params: &CPnParams) -> Spectrum {
    let denom = params.big_n as f64 + params.n as f64 + 1.0;
    let mut pairs: Vec<Eigenpair> = MultiIndex::up_to_order(params.n, params.big_n as u32)
        .into_iter()
        .map(|a| Eigenpair { value: (a.entries()[0] as f64 + 1.0) / denom, vector: vec![(a, Complex64::new(1.0, 0.0))] })
        .collect();
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    Spectrum { space: SpaceParams::Cpn(*params), pairs }
}

/// Eigenvalue count of the ℂℙⁿ model in the window, from the level multiplicities.
pub fn cpn_window_count(params: &CPnParams, e: f64, c: f64) -> f64 {
    let denom = params.big_n as f64 + params.n as f64 + 1.0;
    let (lo, hi) = window_bounds(e, c, params.big_n as f64);
    (0..=params.big_n)
        .filter(|&k| in_window((k as f64 + 1.0) / denom, lo, hi))
        .map(|k| binomial(params.big_n - k + params.n as u64 - 1, params.n as u64 - 1))
        .sum()
}

/// A unit combination of window eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quasimode {
    pub space: SpaceParams,
    pub energy: f64,
    pub width: f64,
    pub seed: u64,
    /// Coefficients on the window eigenvectors.
    pub coefficients: Vec<Complex64>,
    pub eigenvalues: Vec<f64>,
    /// The same vector expanded in the orthonormal basis.
    pub expansion: Vec<(MultiIndex, Complex64)>,
    #[serde(skip)]
    ln_norms: Vec<f64>,
}

impl Quasimode {
    /// Builds a quasimode from basis coefficients directly.
    pub fn from_expansion(space: SpaceParams, energy: f64, width: f64, expansion: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        let ln_norms = expansion.iter().map(|(a, _)| space.ln_normalizer(a)).collect::<Result<Vec<_>>>()?;
        Ok(Quasimode { space, energy, width, seed: 0, coefficients: vec![], eigenvalues: vec![], expansion, ln_norms })
    }

    /// ln|V(w)|, -∞ where V vanishes.
    pub fn ln_abs_at(&self, w: &[Complex64]) -> f64 {
        let r2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
        let common = self.space.ln_radial_factor(r2);
        let lnr: Vec<f64> = w.iter().map(|x| x.norm().ln()).collect();
        let arg: Vec<f64> = w.iter().map(|x| x.arg()).collect();
        let mut terms: Vec<(f64, f64)> = Vec::with_capacity(self.expansion.len());
        let mut top = f64::NEG_INFINITY;
        for ((a, c), ln0) in self.expansion.iter().zip(&self.ln_norms) {
            if c.norm() == 0.0 {
                continue;
            }
            let mut ln = ln0 + c.norm().ln();
            let mut ph = c.arg();
            for (j, &aj) in a.entries().iter().enumerate() {
                if aj > 0 {
                    ln += aj as f64 * lnr[j];
                    ph += aj as f64 * arg[j];
                }
            }
            if ln > top {
                top = ln;
            }
            terms.push((ln, ph));
        }
        if top == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let s: Complex64 = terms.iter().map(|(ln, ph)| Complex64::from_polar((ln - top).exp(), *ph)).sum();
        top + s.norm().ln() + common
    }

    pub fn abs_at(&self, w: &[Complex64]) -> f64 {
        self.ln_abs_at(w).exp()
    }
}

/// Draws coefficients uniformly from the unit sphere of ℂ^m, m = #members.
///
/// The stream is ChaCha8 seeded with `seed`, so the draw depends only on
/// the seed and the window.
pub fn sample_quasimode(spectrum: &Spectrum, window: &SpectralWindow, seed: u64) -> Result<Quasimode> {
    if window.members.is_empty() {
        return Err(Error::EmptyWindow { lo: window.lo, hi: window.hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs: Vec<Complex64> = (0..window.members.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|c| *c /= norm);
    let mut expansion: Vec<(MultiIndex, Complex64)> = Vec::new();
    for (c, &j) in coeffs.iter().zip(&window.members) {
        for (a, u) in &spectrum.pairs[j].vector {
            match expansion.iter_mut().find(|(b, _)| b == a) {
                Some(slot) => slot.1 += c * u,
                None => expansion.push((a.clone(), c * u)),
            }
        }
    }
    let eigenvalues = window.members.iter().map(|&j| spectrum.pairs[j].value).collect();
    let mut q = Quasimode::from_expansion(spectrum.space, window.energy, window.width, expansion)?;
    q.seed = seed;
    q.coefficients = coeffs;
    q.eigenvalues = eigenvalues;
    Ok(q)
}

/// Grid resolution and refinement for [`quasimode_sup_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupStrategy {
    pub radial_points: usize,
    pub angular_points: usize,
    pub refine_rounds: usize,
}

impl Default for SupStrategy {
    fn default() -> Self {
        SupStrategy { radial_points: 400, angular_points: 64, refine_rounds: 4 }
    }
}

/// A certified lower bound for the supremum: the best value found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupEstimate {
    pub ln_value: f64,
    pub value: f64,
    pub argmax: Vec<Complex64>,
}

fn radial_of(space: &SpaceParams, s: f64) -> f64 {
    match space {
        // s = arctan r on ℂℙⁿ, s = r on ℂⁿ
        SpaceParams::Cpn(_) => s.tan(),
        SpaceParams::Fock(_) => s,
    }
}

fn radial_range(q: &Quasimode) -> (f64, f64) {
    match q.space {
        SpaceParams::Cpn(_) => (0.0, 0.5 * PI),
        SpaceParams::Fock(p) => {
            let top = q.expansion.iter().map(|(a, _)| a.order()).max().unwrap_or(0) as f64;
            (0.0, (top / p.big_n).sqrt() + 8.0 / p.big_n.sqrt())
        }
    }
}

/// Structured grid search for sup |V| followed by coordinate-wise
/// golden-section refinement from the best grid points. Supports n ≤ 2.
pub fn quasimode_sup_norm(q: &Quasimode, strategy: &SupStrategy) -> Result<SupEstimate> {
    let n = q.space.n();
    if n > 2 {
        return Err(Error::DimensionTooLarge(n));
    }
    let (s0, s1) = radial_range(q);
    let (nr, na) = if n == 1 {
        (strategy.radial_points.max(8), strategy.angular_points.max(4))
    } else {
        ((strategy.radial_points / 6).max(8), (strategy.angular_points / 4).max(4))
    };
    let ds = (s1 - s0) / nr as f64;
    let da = 2.0 * PI / na as f64;
    let point = |x: &[f64]| -> Vec<Complex64> { (0..n).map(|j| Complex64::from_polar(radial_of(&q.space, x[j]), x[n + j])).collect() };
    let f = |x: &[f64]| -> f64 {
        let v = q.ln_abs_at(&point(x));
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    // enumerate the tensor grid (cell centres in s, uniform in angle)
    let total = nr.pow(n as u32) * na.pow(n as u32);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let keep = 6;
    let mut x = vec![0.0; 2 * n];
    for idx in 0..total {
        let mut rem = idx;
        for xj in x.iter_mut().take(n) {
            *xj = s0 + (rem % nr) as f64 * ds + 0.5 * ds;
            rem /= nr;
        }
        for xj in x.iter_mut().skip(n) {
            *xj = (rem % na) as f64 * da;
            rem /= na;
        }
        let v = f(&x);
        if best.len() < keep || v > best[best.len() - 1].0 {
            best.push((v, x.clone()));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(keep);
        }
    }
    let mut winner = best[0].clone();
    for (v0, x0) in best {
        let mut xc = x0;
        let mut vc = v0;
        let mut steps: Vec<f64> = (0..n).map(|_| ds).chain((0..n).map(|_| da)).collect();
        for _ in 0..strategy.refine_rounds.max(1) {
            for k in 0..2 * n {
                let lo = if k < n { (xc[k] - steps[k]).max(s0) } else { xc[k] - steps[k] };
                let hi = if k < n { (xc[k] + steps[k]).min(s1) } else { xc[k] + steps[k] };
                let mut y = xc.clone();
                let (t, v) = golden_max(
                    |t| {
                        y[k] = t;
                        f(&y)
                    },
                    lo,
                    hi,
                    1e-13,
                );
                if v > vc {
                    vc = v;
                    xc[k] = t;
                }
                steps[k] *= 0.5;
            }
        }
        if vc > winner.0 {
            winner = (vc, xc);
        }
    }
    Ok(SupEstimate { ln_value: winner.0, value: winner.0.exp(), argmax: point(&winner.1) })
}

/// A window function ρ ≥ 0 with ρ(0) = 1 and compactly supported ρ̂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WindowKernel {
    /// ρ(E) = (sin(rE/2)/(rE/2))², ρ̂(t) = (2π/r)(1 - |t|/r)_+.
    Fejer { radius: f64 },
    /// Fejér times |b̂(E)/b̂(0)|² for the bump b(t) = exp(-1/(1-(2t/δ)²)) on
    /// |t| < δ/2; ρ̂ is smooth and supported in |t| ≤ r + δ.
    SmoothFejer { radius: f64, delta: f64 },
}

fn sinc2(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 3.0
    } else {
        let s = x.sin() / x;
        s * s
    }
}

fn bump(t: f64, delta: f64) -> f64 {
    let u = 2.0 * t / delta;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn bump_hat(e: f64, delta: f64) -> f64 {
    // b is even, so b̂(E) = 2∫_0^{δ/2} b(t) cos(Et) dt
    // b̂(0) ≈ 0.22 δ; an absolute floor of 1e-14 δ still leaves 13 digits
    let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14 * delta, ..Default::default() };
    let r = integrate_1d(|t| bump(t, delta) * (e * t).cos(), Domain::Finite(0.0, 0.5 * delta), &spec);
    2.0 * r.map(|q| q.value).unwrap_or(f64::NAN)
}

impl WindowKernel {
    pub fn fejer(radius: f64) -> Self {
        WindowKernel::Fejer { radius }
    }

    pub fn eval(&self, e: f64) -> f64 {
        match *self {
            WindowKernel::Fejer { radius } => sinc2(0.5 * radius * e),
            WindowKernel::SmoothFejer { radius, delta } => {
                let b = bump_hat(e, delta) / bump_hat(0.0, delta);
                sinc2(0.5 * radius * e) * b * b
            }
        }
    }

    /// Radius of the support of ρ̂.
    pub fn fourier_support(&self) -> f64 {
        match *self {
            WindowKernel::Fejer { radius } => radius,
            WindowKernel::SmoothFejer { radius, delta } => radius + delta,
        }
    }

    /// ρ̂(t) = ∫ ρ(E) e^{-iEt} dE; closed form for Fejér.
    pub fn fourier_transform(&self, t: f64) -> Result<f64> {
        match *self {
            WindowKernel::Fejer { radius } => Ok((2.0 * PI / radius) * (1.0 - t.abs() / radius).max(0.0)),
            WindowKernel::SmoothFejer { .. } => domain("no closed form for the smoothed kernel"),
        }
    }
}

/// Pointwise values of Σ_j ρ(N(E - λ_j)) |v_j(x)|².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorDiagonal {
    pub values: Vec<f64>,
    /// Σ_j ρ(N(E - λ_j)), the integral of the diagonal over the whole space.
    pub trace: f64,
}

pub fn projector_diagonal<R: Fn(f64) -> f64>(spectrum: &Spectrum, rho: R, e: f64, points: &[Vec<Complex64>]) -> Result<ProjectorDiagonal> {
    let big_n = spectrum.space.big_n();
    let active: Vec<(f64, Quasimode)> = spectrum
        .pairs
        .iter()
        .map(|p| (rho(big_n * (e - p.value)), p))
        .filter(|(w, _)| *w != 0.0)
        .map(|(w, p)| Quasimode::from_expansion(spectrum.space, p.value, 0.0, p.vector.clone()).map(|q| (w, q)))
        .collect::<Result<_>>()?;
    let trace = active.iter().map(|(w, _)| w).sum();
    let values = points
        .iter()
        .map(|x| active.iter().map(|(w, q)| w * (2.0 * q.ln_abs_at(x)).exp()).sum())
        .collect();
    Ok(ProjectorDiagonal { values, trace })
}

/// Radial profile of the projector diagonal for a diagonal model with n = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorProfile {
    pub sup: f64,
    pub argmax_r: f64,
    /// ∫ diag dvol by quadrature over the radius.
    pub integral: f64,
    pub trace: f64,
}

pub fn projector_diagonal_profile<R: Fn(f64) -> f64>(spectrum: &Spectrum, rho: R, e: f64, radial_points: usize) -> Result<ProjectorProfile> {
    let space = spectrum.space;
    if space.n() != 1 || spectrum.pairs.iter().any(|p| p.vector.len() != 1) {
        return domain("radial profile needs a diagonal model with n = 1");
    }
    let big_n = space.big_n();
    let weights: Vec<(f64, u32, f64)> = spectrum
        .pairs
        .iter()
        .map(|p| {
            let a = &p.vector[0].0;
            Ok((rho(big_n * (e - p.value)), a.entries()[0], space.ln_normalizer(a)?))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(w, _, _)| *w > 1e-300)
        .collect();
    let trace: f64 = spectrum.pairs.iter().map(|p| rho(big_n * (e - p.value))).sum();
    let diag = |r: f64| -> f64 {
        let common = space.ln_radial_factor(r * r);
        let lnr = r.ln();
        weights
            .iter()
            .map(|(w, a, ln0)| {
                let ln = ln0 + if *a > 0 { *a as f64 * lnr } else { 0.0 } + common;
                w * (2.0 * ln).exp()
            })
            .sum()
    };
    let (s0, s1, to_r): (f64, f64, fn(f64) -> f64) = match space {
        SpaceParams::Cpn(_) => (0.0, 0.5 * PI, f64::tan),
        SpaceParams::Fock(p) => {
            let top = spectrum.pairs.iter().map(|q| q.vector[0].0.order()).max().unwrap_or(0) as f64;
            (0.0, (top / p.big_n).sqrt() + 10.0 / p.big_n.sqrt(), |s| s)
        }
    };
    let m = radial_points.max(16);
    let ds = (s1 - s0) / m as f64;
    let (mut bs, mut bv) = (s0, f64::NEG_INFINITY);
    for i in 0..m {
        let s = s0 + (i as f64 + 0.5) * ds;
        let v = diag(to_r(s));
        if v > bv {
            bv = v;
            bs = s;
        }
    }
    let (bs, bv) = {
        let (t, v) = golden_max(|s| diag(to_r(s)), (bs - ds).max(s0), (bs + ds).min(s1), 1e-13);
        if v > bv {
            (t, v)
        } else {
            (bs, bv)
        }
    };
    let spec = QuadratureSpec { rel_tol: 1e-10, abs_tol: 0.0, initial_panels: 64, ..Default::default() };
    let integral = match space {
        SpaceParams::Cpn(_) => {
            integrate_1d(
                |s| {
                    let r = s.tan();
                    let c = s.cos();
                    diag(r) * space.volume_density(r * r) * r / (c * c)
                },
                Domain::Finite(0.0, 0.5 * PI),
                &spec,
            )?
            .value
        }
        SpaceParams::Fock(_) => integrate_1d(|r| diag(r) * r, Domain::SemiInfinite { start: 0.0, split: s1 }, &spec)?.value,
    } * 2.0
        * PI;
    Ok(ProjectorProfile { sup: bv, argmax_r: to_r(bs), integral, trace })
}

/// Least-squares line through (ln x, ln y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

impl SlopeFit {
    /// exp(intercept) x^slope.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return domain("slope_fit needs equally many x and y values");
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return domain("slope_fit needs positive finite data");
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    slope_fit_log(&lx, &ly)
}

/// Same fit on data already in log form.
pub fn slope_fit_log(lx: &[f64], ly: &[f64]) -> Result<SlopeFit> {
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if lx.len() < 2 || !(sxx > 1e-300) {
        return Err(Error::Degenerate("slope fit needs at least two distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = lx.iter().zip(ly).map(|(x, y)| y - intercept - slope * x).collect();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(SlopeFit { slope, intercept, r2, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_matrix_is_diagonal() {
        let sp = SpaceParams::Fock(FockParams::new(1, 4.0).unwrap());
        let m = build_matrix(&sp, &Symbol::fock_harmonic(1), Truncation::FockOrder(6)).unwrap();
        let s = eigendecompose(&m).unwrap();
        for (k, p) in s.pairs.iter().enumerate() {
            assert_relative_eq!(p.value, (k as f64 + 1.0) / 4.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn re_z_block() {
        let sp = SpaceParams::Fock(FockParams::new(1, 1.0).unwrap());
        let m = build_matrix(&sp, &Symbol::fock_re(1, 0), Truncation::FockOrder(1)).unwrap();
        let s = eigendecompose(&m).unwrap();
        assert_relative_eq!(s.pairs[0].value, -0.5, max_relative = 1e-13);
        assert_relative_eq!(s.pairs[1].value, 0.5, max_relative = 1e-13);
        // K = 2: entries 1/2 and √2/2 give ±√(3/4)
        let m = build_matrix(&sp, &Symbol::fock_re(1, 0), Truncation::FockOrder(2)).unwrap();
        let v = eigendecompose(&m).unwrap().values();
        assert_relative_eq!(v[2], (0.75f64).sqrt(), max_relative = 1e-13);
        assert!(v[1].abs() < 1e-14);
    }

    #[test]
    fn dense_path_residuals_and_hermiticity() {
        let sp = SpaceParams::Fock(FockParams::new(2, 3.0).unwrap());
        let mut t = match Symbol::fock_re(2, 0) {
            Symbol::FockPolynomial(t) => t,
            _ => unreachable!(),
        };
        if let Symbol::FockPolynomial(h) = Symbol::fock_harmonic(2) {
            t.extend(h);
        }
        let m = build_matrix(&sp, &Symbol::FockPolynomial(t), Truncation::FockOrder(5)).unwrap();
        assert!(m.hermitian_defect() < 1e-14);
        let s = eigendecompose(&m).unwrap();
        assert_eq!(s.pairs.len(), 21);
        let tr: f64 = s.values().iter().sum();
        let d = m.to_dense();
        let tr0: f64 = (0..d.nrows()).map(|i| d[(i, i)].re).sum();
        assert_relative_eq!(tr, tr0, max_relative = 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let sp = SpaceParams::Fock(FockParams::new(1, 1.0).unwrap());
        let z = Symbol::FockPolynomial(vec![(Complex64::new(1.0, 0.0), MultiIndex(vec![1]), MultiIndex(vec![0]))]);
        let m = build_matrix(&sp, &z, Truncation::FockOrder(3)).unwrap();
        assert!(matches!(eigendecompose(&m), Err(Error::Eigen(_))));
    }

    #[test]
    fn fock_window_example() {
        let sp = SpaceParams::Fock(FockParams::new(1, 8.0).unwrap());
        let m = build_matrix(&sp, &Symbol::fock_harmonic(1), Truncation::FockOrder(20)).unwrap();
        let s = eigendecompose(&m).unwrap();
        let w = window_members(&s, 1.0, 0.5).unwrap();
        assert_eq!(w.members.len(), 1);
        assert_eq!(s.pairs[w.members[0]].vector[0].0, MultiIndex(vec![7]));
        assert!(matches!(window_members(&s, 100.0, 0.5), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn cpn_window_example_and_counts() {
        let pr = CPnParams::new(1, 10).unwrap();
        let s = cpn_model_spectrum(&pr);
        let w = window_members(&s, 0.5, 1.0).unwrap();
        assert_eq!(w.members.len(), 3);
        for n in 1..=3 {
            for nn in [4u64, 9, 17] {
                let pr = CPnParams::new(n, nn).unwrap();
                let m = build_matrix(&SpaceParams::Cpn(pr), &Symbol::cpn_h(n), Truncation::Full).unwrap();
                let s = eigendecompose(&m).unwrap();
                for (e, c) in [(0.5, 1.0), (0.3, 2.0), (0.7, 0.5)] {
                    let count = window_members(&s, e, c).map(|w| w.members.len()).unwrap_or(0);
                    assert_eq!(count as f64, cpn_window_count(&pr, e, c), "n={n} N={nn} E={e} C={c}");
                }
            }
        }
    }

    #[test]
    fn window_expansion_is_recorded() {
        let s = cpn_model_spectrum(&CPnParams::new(1, 10).unwrap());
        let w = window_members_expanding(&s, 0.52, 0.01).unwrap();
        assert_eq!(w.expanded_from, Some(0.01));
        assert!(!w.members.is_empty());
    }

    #[test]
    fn quasimode_determinism_and_norm() {
        let s = cpn_model_spectrum(&CPnParams::new(1, 100).unwrap());
        let w = window_members(&s, 0.5, 1.0).unwrap();
        let a = sample_quasimode(&s, &w, 7).unwrap();
        let b = sample_quasimode(&s, &w, 7).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
        let c = sample_quasimode(&s, &w, 8).unwrap();
        assert_ne!(a.coefficients, c.coefficients);
        let norm: f64 = a.coefficients.iter().map(|c| c.norm_sqr()).sum();
        assert_relative_eq!(norm, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn single_member_sup_matches_closed_form() {
        use crate::cpn::{cpn_sup_norm_closed, CPnState};
        let pr = CPnParams::new(1, 40).unwrap();
        let s = cpn_model_spectrum(&pr);
        let w = window_members(&s, 21.0 / 42.0, 0.01).unwrap();
        assert_eq!(w.members.len(), 1);
        let q = sample_quasimode(&s, &w, 3).unwrap();
        let est = quasimode_sup_norm(&q, &SupStrategy::default()).unwrap();
        let exact = cpn_sup_norm_closed(&CPnState::new(pr, MultiIndex(vec![20])).unwrap()).unwrap().to_f64().unwrap();
        assert_relative_eq!(est.value, exact, max_relative = 1e-10);
        assert!(est.value <= exact * (1.0 + 1e-12));
    }

    #[test]
    fn fejer_kernel() {
        let k = WindowKernel::fejer(1.0);
        assert_eq!(k.eval(0.0), 1.0);
        assert!(k.eval(2.0 * PI).abs() < 1e-30);
        assert_relative_eq!(k.fourier_transform(0.5).unwrap(), PI, max_relative = 1e-15);
        let sm = WindowKernel::SmoothFejer { radius: 1.0, delta: 0.5 };
        assert_relative_eq!(sm.eval(0.0), 1.0, max_relative = 1e-12);
        for e in [0.3, 1.7, 5.0, 20.0] {
            let v = sm.eval(e);
            assert!(v >= 0.0 && v <= k.eval(e) + 1e-15);
        }
    }

    #[test]
    fn projector_trace_and_zero_kernel() {
        let s = cpn_model_spectrum(&CPnParams::new(1, 60).unwrap());
        let k = WindowKernel::fejer(1.0);
        let prof = projector_diagonal_profile(&s, |x| k.eval(x), 0.5, 400).unwrap();
        assert_relative_eq!(prof.integral, prof.trace, max_relative = 1e-8);
        let pts = vec![vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(0.3, 0.2)]];
        let z = projector_diagonal(&s, |_| 0.0, 0.5, &pts).unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
        let d = projector_diagonal(&s, |x| k.eval(x), 0.5, &pts).unwrap();
        assert!(d.values[0] <= prof.sup * (1.0 + 1e-12));
    }

    #[test]
    fn slope_fit_exact_power() {
        let xs = [10.0, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.75)).collect();
        let f = slope_fit(&xs, &ys).unwrap();
        assert_relative_eq!(f.slope, 0.75, max_relative = 1e-13);
        assert_relative_eq!(f.predict(160.0), 3.0 * 160f64.powf(0.75), max_relative = 1e-12);
        assert!(slope_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(slope_fit(&[1.0, 2.0], &[0.0, 2.0]).is_err());
    }
}
