//! FBI transforms on ℝ, discretised by direct quadrature.
//!
//! Two variants are provided:
//!
//! * [`FbiVariant::Appendix`]: the Bargmann transform onto the Fock space
//!   F_N with weight e^{−N|z|²/2}; it sends 2^{1/4}e^{−πx²} to the ground state.
//! * [`FbiVariant::Phi`]: the transform onto H_Φ with Φ(z) = Im(z)²/2, which
//!   intertwines semiclassical Weyl operators with Toeplitz operators built
//!   from the projector [`pi_phi_project`].
//!
//! Phase-space functions always carry their weight, so plain Riemann sums
//! approximate L²(ℂ) norms.

use crate::error::{Error, Result};
use crate::types::Exponent;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Uniform grid `center + (i − (count−1)/2)·spacing`, i = 0..count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub center: f64,
    pub spacing: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(center: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) || count < 3 {
            return Err(Error::Grid(format!("invalid grid: spacing {spacing}, count {count}")));
        }
        Ok(UniformGrid { center, spacing, count })
    }

    /// Odd-sized grid centred on `center` reaching at least `half_width` on each side.
    pub fn symmetric(center: f64, half_width: f64, spacing: f64) -> Result<Self> {
        let m = (half_width / spacing).ceil() as usize;
        Self::new(center, spacing, 2 * m + 1)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.center + (i as f64 - 0.5 * (self.count as f64 - 1.0)) * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.point(0).abs().max(self.point(self.count - 1).abs())
    }
}

/// Boundary values above this fraction of the peak are rejected.
pub const BOUNDARY_DECAY: f64 = 1e-12;

/// Complex samples of a function on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction1D {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
}

impl SampledFunction1D {
    /// Rejects samples that have not decayed at both ends of the grid.
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::Grid(format!("{} values for {} nodes", values.len(), grid.count)));
        }
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let edge = values[0].norm().max(values[grid.count - 1].norm());
        if edge > BOUNDARY_DECAY * peak {
            return Err(Error::Grid(format!("boundary value {edge:.3e} exceeds {BOUNDARY_DECAY:e} of peak {peak:.3e}")));
        }
        Ok(SampledFunction1D { grid, values })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        SampledFunction1D { grid, values: vec![Complex64::new(0.0, 0.0); grid.count] }
    }

    /// ⟨self, other⟩ = Σ conj(self)·other·h on a shared grid.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Grid("inner product of functions on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.spacing)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing).sqrt()
    }
}

/// Complex samples on a rectangle of ℂ; `values[i * im.count + j]` sits at
/// `re.point(i) + i·im.point(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPhaseSpaceFunction {
    pub re: UniformGrid,
    pub im: UniformGrid,
    pub values: Vec<Complex64>,
}

impl SampledPhaseSpaceFunction {
    pub fn zeros(re: UniformGrid, im: UniformGrid) -> Self {
        SampledPhaseSpaceFunction { re, im, values: vec![Complex64::new(0.0, 0.0); re.count * im.count] }
    }

    pub fn from_fn(re: UniformGrid, im: UniformGrid, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let values = (0..re.count)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = re.point(i);
                (0..im.count).map(move |j| (x, im.point(j)))
            })
            .map(|(x, y)| f(x, y))
            .collect();
        SampledPhaseSpaceFunction { re, im, values }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.im.count + j]
    }

    pub fn cell_area(&self) -> f64 {
        self.re.spacing * self.im.spacing
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(Error::Grid("inner product of functions on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.cell_area())
    }

    pub fn l2_norm(&self) -> f64 {
        lp_norm_phase_space(self, Exponent::Finite(2.0))
    }

    /// Pointwise product with a real function of (Re z, Im z).
    pub fn multiply(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.re.count {
            let x = self.re.point(i);
            for j in 0..self.im.count {
                out.values[i * self.im.count + j] *= f(x, self.im.point(j));
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::Grid("difference of functions on different grids".into()));
        }
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Largest modulus on the outer frame of the grid relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let (nx, ny) = (self.re.count, self.im.count);
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge: f64 = 0.0;
        for i in 0..nx {
            edge = edge.max(self.at(i, 0).norm()).max(self.at(i, ny - 1).norm());
        }
        for j in 0..ny {
            edge = edge.max(self.at(0, j).norm()).max(self.at(nx - 1, j).norm());
        }
        edge / peak
    }
}

/// Discrete L^p norm (Riemann sum); p = ∞ gives the largest sample modulus.
pub fn lp_norm_phase_space(v: &SampledPhaseSpaceFunction, p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => v.values.iter().map(|x| x.norm()).fold(0.0, f64::max),
        Exponent::Finite(p) => (v.values.iter().map(|x| x.norm().powf(p)).sum::<f64>() * v.cell_area()).powf(1.0 / p),
    }
}

/// L²-normalised Hermite function of degree k at width `scale`:
/// (2^k k! √π s)^{−1/2} H_k(x/s) e^{−x²/(2s²)}.
pub fn hermite_function(k: usize, scale: f64, x: f64) -> f64 {
    let t = x / scale;
    let mut prev = 0.0;
    let mut cur = (-0.5 * t * t).exp() / (PI.sqrt() * scale).sqrt();
    for j in 0..k {
        let next = (2.0 / (j as f64 + 1.0)).sqrt() * t * cur - (j as f64 / (j as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbiVariant {
    Appendix,
    Phi,
}

impl FbiVariant {
    /// Width of the Hermite functions natural to this variant.
    pub fn hermite_scale(self, big_n: f64) -> f64 {
        match self {
            FbiVariant::Appendix => 1.0 / (2.0 * PI).sqrt(),
            FbiVariant::Phi => 1.0 / big_n.sqrt(),
        }
    }

    fn u_spacing(self, big_n: f64) -> f64 {
        match self {
            FbiVariant::Appendix => 0.02,
            FbiVariant::Phi => 0.08 / big_n.sqrt(),
        }
    }

    /// Largest angular frequency in x of the transform kernel over `phase`.
    fn kernel_frequency(self, big_n: f64, phase_im: &UniformGrid) -> f64 {
        match self {
            FbiVariant::Appendix => 2.0 * (PI * big_n).sqrt() * phase_im.max_abs(),
            FbiVariant::Phi => big_n * phase_im.max_abs(),
        }
    }
}

/// Grids for a test state of Hermite degree ≤ `k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbiGrids {
    pub u: UniformGrid,
    pub re: UniformGrid,
    pub im: UniformGrid,
}

/// Phase-space spacing 1/(4√N) on both axes and half-width 12/√N plus 1.5×
/// the classical radius; the line grid reaches 9 Hermite widths past the
/// turning point.
pub fn standard_grids(variant: FbiVariant, big_n: f64, k_max: usize) -> Result<FbiGrids> {
    if !(big_n > 0.0 && big_n.is_finite()) {
        return Err(Error::Domain(format!("N must be positive, got {big_n}")));
    }
    let h = 0.25 / big_n.sqrt();
    let radius = ((2 * k_max + 2) as f64 / big_n).sqrt();
    let half = 12.0 / big_n.sqrt() + 1.5 * radius;
    let re = UniformGrid::symmetric(0.0, half, h)?;
    let s = variant.hermite_scale(big_n);
    let u = UniformGrid::symmetric(0.0, s * ((2 * k_max + 1) as f64).sqrt() + 9.0 * s, variant.u_spacing(big_n))?;
    Ok(FbiGrids { u, re, im: re })
}

/// k-th Hermite test function of `variant` sampled on `grid`.
pub fn hermite_test_function(variant: FbiVariant, big_n: f64, k: usize, grid: UniformGrid) -> Result<SampledFunction1D> {
    let s = variant.hermite_scale(big_n);
    SampledFunction1D::from_fn(grid, |x| Complex64::new(hermite_function(k, s, x), 0.0))
}

fn check_nyquist(variant: FbiVariant, big_n: f64, u: &UniformGrid, im: &UniformGrid) -> Result<()> {
    let w = variant.kernel_frequency(big_n, im) * u.spacing;
    if w > 0.5 * PI {
        return Err(Error::Grid(format!("line grid too coarse: kernel phase step {w:.3} rad exceeds π/2")));
    }
    Ok(())
}

/// Kernel of the forward transform at (x, z) without the normalising constant,
/// as (Gaussian modulus, phase).
fn kernel(variant: FbiVariant, big_n: f64, x: f64, re: f64, im: f64) -> (f64, f64) {
    match variant {
        // e^{−N(x0−x)²/2} e^{−iN(x0−x)y}
        FbiVariant::Phi => ((-0.5 * big_n * (re - x).powi(2)).exp(), -big_n * (re - x) * im),
        // e^{−π(x−√(N/π)r)²} e^{i(2√(πN)xs − Nrs)}
        FbiVariant::Appendix => {
            let shift = (big_n / PI).sqrt() * re;
            ((-PI * (x - shift).powi(2)).exp(), 2.0 * (PI * big_n).sqrt() * x * im - big_n * re * im)
        }
    }
}

fn constant(variant: FbiVariant, big_n: f64) -> f64 {
    match variant {
        FbiVariant::Phi => 2f64.powf(-0.5) * (big_n / PI).powf(0.75),
        FbiVariant::Appendix => (big_n / PI).sqrt() * 2f64.powf(0.25),
    }
}

/// Forward transform of `u` onto the phase-space grid `re × im`, one
/// quadrature over the line grid per node.
pub fn fbi_forward(variant: FbiVariant, u: &SampledFunction1D, big_n: f64, re: UniformGrid, im: UniformGrid) -> Result<SampledPhaseSpaceFunction> {
    check_nyquist(variant, big_n, &u.grid, &im)?;
    let xs = u.grid.points();
    let c = constant(variant, big_n) * u.grid.spacing;
    let rows: Vec<Vec<Complex64>> = (0..re.count)
        .into_par_iter()
        .map(|i| {
            let r = re.point(i);
            (0..im.count)
                .map(|j| {
                    let s = im.point(j);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (x, v) in xs.iter().zip(&u.values) {
                        let (m, ph) = kernel(variant, big_n, *x, r, s);
                        if m > 1e-300 {
                            acc += v * Complex64::from_polar(m, ph);
                        }
                    }
                    acc * c
                })
                .collect()
        })
        .collect();
    Ok(SampledPhaseSpaceFunction { re, im, values: rows.concat() })
}

/// Transform onto the Fock space F_N (n = 1).
pub fn fbi_forward_appendix(u: &SampledFunction1D, big_n: f64, re: UniformGrid, im: UniformGrid) -> Result<SampledPhaseSpaceFunction> {
    fbi_forward(FbiVariant::Appendix, u, big_n, re, im)
}

/// Transform onto H_Φ, Φ(z) = Im(z)²/2 (n = 1).
pub fn fbi_forward_phi(u: &SampledFunction1D, big_n: f64, re: UniformGrid, im: UniformGrid) -> Result<SampledPhaseSpaceFunction> {
    fbi_forward(FbiVariant::Phi, u, big_n, re, im)
}

/// Adjoint of [`fbi_forward`] for the discrete inner products, evaluated on `grid`.
pub fn fbi_adjoint(variant: FbiVariant, v: &SampledPhaseSpaceFunction, big_n: f64, grid: UniformGrid) -> Result<SampledFunction1D> {
    check_nyquist(variant, big_n, &grid, &v.im)?;
    let c = constant(variant, big_n) * v.cell_area();
    let values: Vec<Complex64> = grid
        .points()
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..v.re.count {
                let r = v.re.point(i);
                for j in 0..v.im.count {
                    let (m, ph) = kernel(variant, big_n, x, r, v.im.point(j));
                    if m > 1e-300 {
                        acc += v.at(i, j) * Complex64::from_polar(m, -ph);
                    }
                }
            }
            acc * c
        })
        .collect();
    Ok(SampledFunction1D { grid, values })
}

/// Kernel moduli below this are dropped in [`pi_phi_project`].
const PROJECTOR_CUTOFF: f64 = 1e-18;

/// Π_Φ v(z) = (N/2π)∫ e^{−NIm(z)²/2} e^{−N(z−w̄)²/4} e^{−NIm(w)²/2} v(w) dA(w)
/// by a Riemann sum over the grid of `v`.
///
/// With z = x+iy, w = a+ib the kernel is e^{−N(x−a)²/4} e^{−N(y−b)²/4}
/// e^{−iN(x−a)(y+b)/2}, which is tabulated per grid offset.
pub fn pi_phi_project(v: &SampledPhaseSpaceFunction, big_n: f64) -> Result<SampledPhaseSpaceFunction> {
    let leak = v.boundary_ratio();
    if leak > 1e-10 {
        return Err(Error::Grid(format!("boundary leak: edge/peak = {leak:.3e}")));
    }
    let (nx, ny) = (v.re.count, v.im.count);
    let (hx, hy) = (v.re.spacing, v.im.spacing);
    let reach = |h: f64, n: usize| (((-4.0 * PROJECTOR_CUTOFF.ln() / big_n).sqrt() / h).ceil() as usize).min(n - 1);
    let (dx, dy) = (reach(hx, nx), reach(hy, ny));
    let ax: Vec<f64> = (0..=dx).map(|d| (-0.25 * big_n * (d as f64 * hx).powi(2)).exp()).collect();
    let ay: Vec<f64> = (0..=dy).map(|d| (-0.25 * big_n * (d as f64 * hy).powi(2)).exp()).collect();
    let ys = v.im.points();
    // phase[d + dx][b] = e^{−iN(d·hx)y_b/2}
    let phase: Vec<Vec<Complex64>> = (0..=2 * dx)
        .map(|k| {
            let delta = (k as f64 - dx as f64) * hx;
            ys.iter().map(|&y| Complex64::from_polar(1.0, -0.5 * big_n * delta * y)).collect()
        })
        .collect();
    let c = big_n / (2.0 * PI) * v.cell_area();
    let rows: Vec<Vec<Complex64>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![Complex64::new(0.0, 0.0); ny];
            let mut w = vec![Complex64::new(0.0, 0.0); ny];
            let lo = i.saturating_sub(dx);
            let hi = (i + dx).min(nx - 1);
            for a in lo..=hi {
                let d = i as isize - a as isize;
                let k = (d + dx as isize) as usize;
                let row = &v.values[a * ny..(a + 1) * ny];
                for b in 0..ny {
                    w[b] = row[b] * phase[k][b];
                }
                let mx = ax[d.unsigned_abs()];
                for (j, o) in out.iter_mut().enumerate() {
                    let blo = j.saturating_sub(dy);
                    let bhi = (j + dy).min(ny - 1);
                    let mut s = Complex64::new(0.0, 0.0);
                    for b in blo..=bhi {
                        s += w[b] * ay[j.abs_diff(b)];
                    }
                    *o += s * phase[k][j] * mx;
                }
            }
            out.iter_mut().for_each(|o| *o *= c);
            out
        })
        .collect();
    Ok(SampledPhaseSpaceFunction { re: v.re, im: v.im, values: rows.concat() })
}

/// T_Φ(f)v = Π_Φ(f·v) for a real symbol f(Re z, Im z).
pub fn toeplitz_phi(v: &SampledPhaseSpaceFunction, big_n: f64, f: impl Fn(f64, f64) -> f64) -> Result<SampledPhaseSpaceFunction> {
    pi_phi_project(&v.multiply(f), big_n)
}

/// Result of the ∂̄ test on a weighted transform output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbarResidual {
    /// max |∂̄v + (∂̄ weight exponent)·v| over interior nodes.
    pub max_abs: f64,
    /// max |∂_x v|/2 over the same nodes.
    pub scale: f64,
    pub relative: f64,
}

/// Spectral derivative along one axis of a row-major block.
fn spectral_derivative(v: &SampledPhaseSpaceFunction, along_re: bool) -> Vec<Complex64> {
    let (nx, ny) = (v.re.count, v.im.count);
    let (len, h, lines) = if along_re { (nx, v.re.spacing, ny) } else { (ny, v.im.spacing, nx) };
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let period = len as f64 * h;
    let mut out = vec![Complex64::new(0.0, 0.0); nx * ny];
    let idx = |line: usize, k: usize| if along_re { k * ny + line } else { line * ny + k };
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for line in 0..lines {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = v.values[idx(line, k)];
        }
        fwd.process(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            let m = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            // the Nyquist mode has no odd-symmetric derivative
            let m = if len % 2 == 0 && k == len / 2 { 0.0 } else { m };
            *b *= Complex64::new(0.0, 2.0 * PI * m / period) / len as f64;
        }
        inv.process(&mut buf);
        for (k, b) in buf.iter().enumerate() {
            out[idx(line, k)] = *b;
        }
    }
    out
}

/// Cauchy–Riemann residual of the holomorphic factor of `v`, computed as
/// ∂̄v + (∂̄ψ)v for the weight e^{−ψ} of `variant` (ψ = N|z|²/2 or NIm(z)²/2),
/// with spectral derivatives and the outer eighth of each axis excluded.
pub fn cbar_residual(variant: FbiVariant, v: &SampledPhaseSpaceFunction, big_n: f64) -> CbarResidual {
    let dx = spectral_derivative(v, true);
    let dy = spectral_derivative(v, false);
    let (nx, ny) = (v.re.count, v.im.count);
    let (mx, my) = (nx / 8, ny / 8);
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in mx..nx - mx {
        let x = v.re.point(i);
        for j in my..ny - my {
            let y = v.im.point(j);
            let k = i * ny + j;
            let dbar = 0.5 * (dx[k] + Complex64::i() * dy[k]);
            let weight = match variant {
                FbiVariant::Appendix => 0.5 * big_n * Complex64::new(x, y),
                FbiVariant::Phi => Complex64::new(0.0, 0.5 * big_n * y),
            };
            max_abs = max_abs.max((dbar + weight * v.values[k]).norm());
            scale = scale.max(0.5 * dx[k].norm());
        }
    }
    CbarResidual { max_abs, scale, relative: if scale > 0.0 { max_abs / scale } else { 0.0 } }
}

/// Isometry and holomorphy of one Hermite test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryCheck {
    pub variant: FbiVariant,
    pub big_n: f64,
    pub k: usize,
    pub input_norm: f64,
    pub output_norm: f64,
    pub ratio: f64,
    pub cbar: CbarResidual,
    pub grid_points: usize,
}

pub fn isometry_check(variant: FbiVariant, big_n: f64, k: usize) -> Result<IsometryCheck> {
    let g = standard_grids(variant, big_n, k)?;
    let u = hermite_test_function(variant, big_n, k, g.u)?;
    let v = fbi_forward(variant, &u, big_n, g.re, g.im)?;
    let (a, b) = (u.l2_norm(), v.l2_norm());
    Ok(IsometryCheck {
        variant,
        big_n,
        k,
        input_norm: a,
        output_norm: b,
        ratio: b / a,
        cbar: cbar_residual(variant, &v, big_n),
        grid_points: g.re.count * g.im.count,
    })
}

/// Relative residuals of T_Φ(f)𝔅u_k − ħ(2k+1)𝔅u_k for the harmonic
/// oscillator x² + ξ², ħ = 1/N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugationResidual {
    pub k: usize,
    pub big_n: f64,
    pub eigenvalue: f64,
    /// f = Re(z)² + Im(z)² − 1/N.
    pub corrected: f64,
    /// f = Re(z)² + Im(z)².
    pub uncorrected: f64,
    /// Residual of the constant symbol ħ(2k+1), which vanishes exactly in the
    /// continuum; an estimate of the grid error.
    pub discretisation: f64,
    pub discretisation_dominated: bool,
}

pub fn conjugation_residual(k: usize, big_n: f64) -> Result<ConjugationResidual> {
    let g = standard_grids(FbiVariant::Phi, big_n, k)?;
    let u = hermite_test_function(FbiVariant::Phi, big_n, k, g.u)?;
    let v = fbi_forward_phi(&u, big_n, g.re, g.im)?;
    let norm = v.l2_norm();
    let lambda = (2 * k + 1) as f64 / big_n;
    let target = v.scale(Complex64::new(lambda, 0.0));
    let rel = |w: SampledPhaseSpaceFunction| -> Result<f64> { Ok(w.sub(&target)?.l2_norm() / norm) };
    let corrected = rel(toeplitz_phi(&v, big_n, |x, y| x * x + y * y - 1.0 / big_n)?)?;
    let uncorrected = rel(toeplitz_phi(&v, big_n, |x, y| x * x + y * y)?)?;
    let discretisation = rel(toeplitz_phi(&v, big_n, |_, _| lambda)?)?;
    Ok(ConjugationResidual {
        k,
        big_n,
        eigenvalue: lambda,
        corrected,
        uncorrected,
        discretisation,
        discretisation_dominated: discretisation > corrected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_functions_are_orthonormal() {
        let g = UniformGrid::symmetric(0.0, 12.0, 0.01).unwrap();
        for k in 0..5 {
            for l in 0..5 {
                let s: f64 = g.points().iter().map(|&x| hermite_function(k, 0.7, x) * hermite_function(l, 0.7, x)).sum::<f64>() * g.spacing;
                assert!((s - if k == l { 1.0 } else { 0.0 }).abs() < 1e-12, "{k} {l} {s}");
            }
        }
        // H_2(t) = 4t² − 2
        let t: f64 = 0.3;
        let want = (4.0 * t * t - 2.0) * (-t * t / 2.0).exp() / (8.0 * PI.sqrt()).sqrt();
        assert_relative_eq!(hermite_function(2, 1.0, t), want, max_relative = 1e-14);
    }

    #[test]
    fn boundary_decay_is_enforced() {
        let g = UniformGrid::symmetric(0.0, 2.0, 0.1).unwrap();
        assert!(matches!(SampledFunction1D::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.0)), Err(Error::Grid(_))));
    }

    #[test]
    fn appendix_maps_ground_state_to_fock_ground_state() {
        let nn = 16.0;
        let g = standard_grids(FbiVariant::Appendix, nn, 0).unwrap();
        let u = hermite_test_function(FbiVariant::Appendix, nn, 0, g.u).unwrap();
        // 2^{1/4}e^{−πx²} is the unit Hermite ground state at this scale
        assert_relative_eq!(u.values[g.u.count / 2].re, 2f64.powf(0.25), max_relative = 1e-13);
        let v = fbi_forward_appendix(&u, nn, g.re, g.im).unwrap();
        for (i, j) in [(g.re.count / 2, g.im.count / 2), (40, 50), (30, 20)] {
            let (x, y) = (g.re.point(i), g.im.point(j));
            let e0 = (nn / PI).sqrt() * (-0.5 * nn * (x * x + y * y)).exp();
            assert!((v.at(i, j) - e0).norm() < 1e-12, "{:?} {e0}", v.at(i, j));
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = standard_grids(FbiVariant::Phi, 16.0, 0).unwrap();
        let v = fbi_forward_phi(&SampledFunction1D::zeros(g.u), 16.0, g.re, g.im).unwrap();
        assert!(v.values.iter().all(|x| x.norm() == 0.0));
        assert!(pi_phi_project(&v, 16.0).unwrap().values.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn both_variants_are_isometric_and_holomorphic() {
        for variant in [FbiVariant::Appendix, FbiVariant::Phi] {
            for k in [0, 3] {
                let c = isometry_check(variant, 16.0, k).unwrap();
                assert!((c.ratio - 1.0).abs() < 1e-8, "{variant:?} {k} {}", c.ratio);
                assert!(c.cbar.relative < 1e-8, "{variant:?} {k} {:?}", c.cbar);
            }
        }
    }

    #[test]
    fn adjoint_inverts_and_is_consistent() {
        let nn = 16.0;
        let g = standard_grids(FbiVariant::Phi, nn, 2).unwrap();
        let u = SampledFunction1D::from_fn(g.u, |x| {
            let s = 1.0 / nn.sqrt();
            Complex64::new(hermite_function(0, s, x), 0.5 * hermite_function(2, s, x))
        })
        .unwrap();
        let v = fbi_forward_phi(&u, nn, g.re, g.im).unwrap();
        let back = fbi_adjoint(FbiVariant::Phi, &v, nn, g.u).unwrap();
        let err: f64 = (back.values.iter().zip(&u.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * g.u.spacing).sqrt();
        assert!(err / u.l2_norm() < 1e-8, "{err}");
        let w = SampledPhaseSpaceFunction::from_fn(g.re, g.im, |x, y| {
            Complex64::new((-nn * ((x - 0.3).powi(2) + y * y)).exp(), (-nn * (x * x + (y + 0.2).powi(2))).exp())
        });
        let lhs = v.inner(&w).unwrap();
        let rhs = u.inner(&fbi_adjoint(FbiVariant::Phi, &w, nn, g.u).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn projector_fixes_range_and_is_idempotent() {
        let nn = 16.0;
        let g = standard_grids(FbiVariant::Phi, nn, 1).unwrap();
        let u = hermite_test_function(FbiVariant::Phi, nn, 1, g.u).unwrap();
        let v = fbi_forward_phi(&u, nn, g.re, g.im).unwrap();
        let pv = pi_phi_project(&v, nn).unwrap();
        assert!(pv.sub(&v).unwrap().l2_norm() / v.l2_norm() < 1e-8);
        // a Gaussian bump not in the range
        let w = SampledPhaseSpaceFunction::from_fn(g.re, g.im, |x, y| Complex64::new((-2.0 * nn * (x * x + y * y)).exp(), 0.0));
        let pw = pi_phi_project(&w, nn).unwrap();
        let ppw = pi_phi_project(&pw, nn).unwrap();
        assert!(ppw.sub(&pw).unwrap().l2_norm() / pw.l2_norm() < 1e-8);
        assert!(w.inner(&pw).unwrap().re >= -1e-10);
        assert!(pw.l2_norm() < w.l2_norm());
    }

    #[test]
    fn conjugation_correction_is_exact_for_the_oscillator() {
        let r = conjugation_residual(1, 16.0).unwrap();
        assert!(r.corrected < 1e-8, "{r:?}");
        // omitting the correction leaves exactly the shift 1/N
        assert_relative_eq!(r.uncorrected, 1.0 / 16.0, max_relative = 1e-6);
    }
}
