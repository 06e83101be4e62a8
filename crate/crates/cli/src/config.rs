//! Experiment configuration: per-experiment defaults, overridden by a config
//! file and then by command-line flags.

use berezin_core::fbi::FbiVariant;
use berezin_core::{Exponent, MultiIndex};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    FockNorms,
    FockSpectrum,
    FockSharpness,
    FockNuK,
    FockRatioBound,
    Convexity,
    CpnNorms,
    CpnIntegrals,
    CpnSharpness,
    CpnConstant,
    CpnSpectrum,
    WeylWindow,
    ProjectorDiag,
    QuasimodeSup,
    QuasimodeConcentration,
    FbiIsometry,
    FbiConjugation,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 17] = [
        ExperimentId::FockNorms,
        ExperimentId::FockSpectrum,
        ExperimentId::FockSharpness,
        ExperimentId::FockNuK,
        ExperimentId::FockRatioBound,
        ExperimentId::Convexity,
        ExperimentId::CpnNorms,
        ExperimentId::CpnIntegrals,
        ExperimentId::CpnSharpness,
        ExperimentId::CpnConstant,
        ExperimentId::CpnSpectrum,
        ExperimentId::WeylWindow,
        ExperimentId::ProjectorDiag,
        ExperimentId::QuasimodeSup,
        ExperimentId::QuasimodeConcentration,
        ExperimentId::FbiIsometry,
        ExperimentId::FbiConjugation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::FockNorms => "fock-norms",
            ExperimentId::FockSpectrum => "fock-spectrum",
            ExperimentId::FockSharpness => "fock-sharpness",
            ExperimentId::FockNuK => "fock-nu-k",
            ExperimentId::FockRatioBound => "fock-ratio-bound",
            ExperimentId::Convexity => "convexity",
            ExperimentId::CpnNorms => "cpn-norms",
            ExperimentId::CpnIntegrals => "cpn-integrals",
            ExperimentId::CpnSharpness => "cpn-sharpness",
            ExperimentId::CpnConstant => "cpn-constant",
            ExperimentId::CpnSpectrum => "cpn-spectrum",
            ExperimentId::WeylWindow => "weyl-window",
            ExperimentId::ProjectorDiag => "projector-diag",
            ExperimentId::QuasimodeSup => "quasimode-sup",
            ExperimentId::QuasimodeConcentration => "quasimode-concentration",
            ExperimentId::FbiIsometry => "fbi-isometry",
            ExperimentId::FbiConjugation => "fbi-conjugation",
        }
    }

    /// The statement the experiment checks, printed in the report header.
    pub fn claim(self) -> &'static str {
        match self {
            ExperimentId::FockNorms => "closed-form L^p norms of Fock basis states match quadrature; L^2 norms equal 1",
            ExperimentId::FockSpectrum => "T_N(|z|^2) is diagonal with eigenvalues (|a|+n)/N of multiplicity binom(k+n-1, n-1)",
            ExperimentId::FockSharpness => "||e_(k,0,..,0)||_p grows like N^((n-1/2)(1/2-1/p)) with k = round(N/2)",
            ExperimentId::FockNuK => "states with alpha equal busy coordinates grow like N^((n-alpha/2)(1/2-1/p))",
            ExperimentId::FockRatioBound => "||e_nu||_p <= e^(1/24) (e^(1/12) sqrt(e/sqrt(2 pi)))^n ||e_(|nu|,0,..,0)||_p",
            ExperimentId::Convexity => "ln f_p and ln g have nonnegative second differences",
            ExperimentId::CpnNorms => "closed-form L^p norms of CP^n sections match quadrature; L^2 norms equal 1",
            ExperimentId::CpnIntegrals => "closed form of the radial moment integral on C^n matches quadrature",
            ExperimentId::CpnSharpness => "||e_(N/2,0,..,0)||_p on CP^n grows like N^((n-1/2)(1/2-1/p))",
            ExperimentId::CpnConstant => "||e_(N/2,0,..,0)||_p / N^((n-1/2)(1/2-1/p)) approaches the predicted constant",
            ExperimentId::CpnSpectrum => "quadrature-assembled T_N(H) on CP^n is diagonal with entries (a_1+1)/(N+n+1), norm <= 1",
            ExperimentId::WeylWindow => "[E-C/N, E+C/N] contains an eigenvalue of the CP^1 model for every N",
            ExperimentId::ProjectorDiag => "the smoothed spectral projector diagonal is of size N^(n-1/2) with integral ~ N^(n-1/2)",
            ExperimentId::QuasimodeSup => "sup norms of random quasimodes grow at most like N^((n-1/2)/2)",
            ExperimentId::QuasimodeConcentration => "quasimode mass away from the energy level decays faster than any power",
            ExperimentId::FbiIsometry => "both FBI transforms are isometries onto weighted holomorphic functions",
            ExperimentId::FbiConjugation => "T_Phi(|z|^2 - 1/N) conjugates to the Weyl harmonic oscillator under the FBI transform",
        }
    }

    pub fn space(self) -> Space {
        use ExperimentId::*;
        match self {
            FockNorms | FockSpectrum | FockSharpness | FockNuK | FockRatioBound | Convexity => Space::Fock,
            FbiIsometry | FbiConjugation => Space::Fbi,
            _ => Space::Cpn,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Usage { field: "experiment".into(), message: format!("unknown experiment {s:?}") })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Fock,
    Cpn,
    Fbi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Which basis states an experiment visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum IndexFamily {
    /// (round(λN), 0, …, 0).
    Mu,
    /// α equal entries summing to about λN.
    NuK,
    /// Every index with entries ≤ `max_entry`.
    Box { max_entry: u32 },
    /// Every index of the given order.
    Order { order: u32 },
    Explicit { indices: Vec<MultiIndex> },
}

/// Pass/fail thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub slope: f64,
    pub rel: f64,
    pub exact: f64,
    pub nested: f64,
    pub band_ratio: f64,
    pub envelope: f64,
    pub decay_rate: f64,
    pub cbar: f64,
    pub convexity: f64,
}

impl Tolerances {
    pub fn default_for(id: ExperimentId) -> Self {
        use ExperimentId::*;
        let rel = match id {
            FockNorms | CpnNorms => 1e-6,
            CpnIntegrals => 1e-10,
            CpnConstant => 0.02,
            CpnSpectrum => 1e-8,
            FbiIsometry => 1e-4,
            _ => 1e-12,
        };
        let slope = if id == ProjectorDiag { 0.1 } else { 0.05 };
        Tolerances { slope, rel, exact: 1e-12, nested: 1e-8, band_ratio: 3.0, envelope: 3.0, decay_rate: 4.0, cbar: 1e-6, convexity: 1e-12 }
    }
}

/// A list of values written as `a,b,c`, `a:b:step` (inclusive) or `a:b:xk`
/// (geometric with ratio k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueList(#[serde(deserialize_with = "de_values")] pub Vec<f64>);

fn de_values<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(f64),
        List(Vec<f64>),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::One(x) => Ok(vec![x]),
        Raw::List(v) => Ok(v),
        Raw::Text(s) => parse_values(&s).map_err(serde::de::Error::custom),
    }
}

pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [a, b, step] => {
            let (a, b) = (num(a)?, num(b)?);
            let mut v = Vec::new();
            if let Some(r) = step.trim().strip_prefix('x') {
                let r = num(r)?;
                if !(r > 1.0) || !(a > 0.0) {
                    return Err(format!("geometric range {s:?} needs a > 0 and ratio > 1"));
                }
                let mut x = a;
                while x <= b * (1.0 + 1e-12) {
                    v.push(x);
                    x *= r;
                }
            } else {
                let h = num(step)?;
                if !(h > 0.0) {
                    return Err(format!("range step must be positive in {s:?}"));
                }
                let m = ((b - a) / h + 1e-9).floor();
                if m < 0.0 {
                    return Err(format!("empty range {s:?}"));
                }
                v = (0..=m as usize).map(|i| a + i as f64 * h).collect();
            }
            v
        }
        [a, b] => return parse_values(&format!("{a}:{b}:1")),
        [_] => s.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(format!("cannot parse {s:?}")),
    };
    if out.is_empty() {
        return Err(format!("empty list {s:?}"));
    }
    Ok(out)
}

impl FromStr for ValueList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_values(s).map(ValueList)
    }
}

/// Comma-separated exponents, `inf` allowed.
pub fn parse_exponents(s: &str) -> Result<Vec<Exponent>, String> {
    s.split(',').map(|t| t.trim().parse::<Exponent>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub space: Space,
    pub n: Vec<usize>,
    #[serde(rename = "N")]
    pub big_n: Vec<f64>,
    pub p: Vec<Exponent>,
    pub family: IndexFamily,
    /// Fraction λ in k = round(λN).
    pub lambda: f64,
    pub alpha: Vec<usize>,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub seeds: Vec<u64>,
    /// Per-experiment integers: Hermite degrees (FBI), truncation order
    /// (spectra), grid points x (convexity), oracle N (cpn-norms) or the
    /// largest |a| (cpn-integrals).
    pub k: Vec<usize>,
    pub variants: Vec<FbiVariant>,
    /// Support radius of the Fourier transform of the Fejér window.
    pub kernel_radius: f64,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
}

fn geometric(a: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| a * 2f64.powi(i as i32)).collect()
}

impl ExperimentConfig {
    pub fn default_for(id: ExperimentId) -> Self {
        use ExperimentId::*;
        let inf = Exponent::Infinity;
        let fin = Exponent::Finite;
        let mut c = ExperimentConfig {
            experiment: id,
            space: id.space(),
            n: vec![1],
            big_n: vec![1.0],
            p: vec![fin(2.0)],
            family: IndexFamily::Mu,
            lambda: 0.5,
            alpha: vec![],
            energy: 0.5,
            c: 1.0,
            seeds: vec![],
            k: vec![],
            variants: vec![],
            kernel_radius: 1.0,
            tolerances: Tolerances::default_for(id),
            out: None,
            formats: vec![Format::Csv, Format::Json, Format::Svg],
        };
        match id {
            FockNorms => {
                c.n = vec![1, 2];
                c.big_n = vec![1.0, 4.0, 16.0];
                c.p = vec![fin(2.0), fin(3.0), fin(4.0), fin(7.5), inf];
                c.family = IndexFamily::Box { max_entry: 8 };
            }
            FockSpectrum => {
                c.n = vec![1, 2, 3];
                c.big_n = (1..=20).map(f64::from).collect();
                c.k = vec![8];
            }
            FockSharpness | CpnSharpness => {
                c.n = vec![1, 2, 3];
                c.big_n = geometric(250.0, 5);
                c.p = vec![fin(4.0), inf];
            }
            FockNuK => {
                c.n = vec![2, 3];
                c.alpha = vec![2, 3];
                c.big_n = geometric(250.0, 5);
                c.p = vec![fin(4.0), inf];
                c.family = IndexFamily::NuK;
            }
            FockRatioBound => {
                c.n = vec![1, 2, 3];
                c.p = vec![fin(2.0), fin(4.0), inf];
                c.family = IndexFamily::Order { order: 20 };
            }
            Convexity => {
                c.p = vec![fin(2.0), fin(4.0), fin(10.0)];
                c.k = (0..=200).collect();
            }
            CpnNorms => {
                c.n = vec![1, 2, 3];
                c.big_n = (1..=200).map(f64::from).collect();
                c.p = vec![fin(2.0), fin(3.0), fin(4.0), fin(7.5), inf];
                c.k = vec![1, 4, 9];
            }
            CpnIntegrals => {
                c.n = vec![1, 2];
                c.k = vec![10, 6];
                c.big_n = vec![20.0, 12.0];
            }
            CpnConstant => {
                c.n = vec![1, 2];
                c.big_n = vec![4000.0];
                c.p = vec![fin(4.0), inf];
            }
            CpnSpectrum => {
                c.n = vec![1, 2];
                c.big_n = (1..=8).map(f64::from).collect();
                c.k = vec![16];
            }
            WeylWindow => {
                c.big_n = (10..=2000).map(f64::from).collect();
            }
            ProjectorDiag => {
                c.big_n = geometric(50.0, 5);
            }
            QuasimodeSup | QuasimodeConcentration => {
                c.big_n = geometric(100.0, 4);
                c.seeds = (0..100).collect();
                c.p = vec![inf];
            }
            FbiIsometry => {
                c.big_n = vec![16.0, 64.0];
                c.k = vec![0, 1, 2, 3];
                c.variants = vec![FbiVariant::Appendix, FbiVariant::Phi];
            }
            FbiConjugation => {
                c.big_n = vec![16.0, 64.0];
                c.k = vec![0, 1, 2];
                c.variants = vec![FbiVariant::Phi];
            }
        }
        c
    }

    /// Checks every field the chosen experiment reads.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: String| Err(CliError::Usage { field: field.into(), message });
        use ExperimentId::*;
        let id = self.experiment;
        if self.space != id.space() {
            return bad("space", format!("{id} runs on {:?}", id.space()));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n", "need a nonempty list of positive dimensions".into());
        }
        if self.big_n.is_empty() {
            return bad("N", "empty list".into());
        }
        if self.big_n.iter().any(|x| !(x.is_finite() && *x >= 1.0)) {
            return bad("N", "values must be finite and >= 1".into());
        }
        let integral = matches!(id, CpnNorms | CpnSharpness | CpnConstant | CpnSpectrum | WeylWindow | ProjectorDiag | QuasimodeSup | QuasimodeConcentration | CpnIntegrals);
        if integral && self.big_n.iter().any(|x| x.fract() != 0.0) {
            return bad("N", format!("{id} needs integer N"));
        }
        if self.p.is_empty() {
            return bad("p", "empty list".into());
        }
        if self.p.iter().any(|p| matches!(p, Exponent::Finite(x) if !(*x >= 1.0 && x.is_finite()))) {
            return bad("p", "exponents must be >= 1 or inf".into());
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad("lambda", "need 0 < lambda < 1".into());
        }
        if !(self.c > 0.0) {
            return bad("C", "window width must be positive".into());
        }
        if !(self.energy > 0.0 && self.energy < 1.0) && id.space() == Space::Cpn {
            return bad("E", "energy must lie strictly inside the range (0, 1) of H".into());
        }
        if matches!(id, QuasimodeSup | QuasimodeConcentration) && self.seeds.is_empty() {
            return bad("seeds", "need at least one seed".into());
        }
        if matches!(id, QuasimodeSup | QuasimodeConcentration | ProjectorDiag | WeylWindow) && self.n != [1] {
            return bad("n", format!("{id} is implemented for n = 1"));
        }
        if id == FockNuK && (self.alpha.is_empty() || self.alpha.contains(&0)) {
            return bad("alpha", "need positive alpha values".into());
        }
        if matches!(id, FbiIsometry | FbiConjugation) {
            if self.k.is_empty() || self.variants.is_empty() {
                return bad("k", "need Hermite degrees and transform variants".into());
            }
            if self.k.iter().any(|&k| k > 8) {
                return bad("k", "Hermite degree above 8 is outside the grid design".into());
            }
        }
        if matches!(id, FockSpectrum | CpnSpectrum | CpnIntegrals | Convexity) && self.k.is_empty() {
            return bad("k", "need a truncation order or grid".into());
        }
        if id == CpnIntegrals && (self.k.len() != self.n.len() || self.big_n.len() != self.n.len()) {
            return bad("k", "cpn-integrals pairs n[i] with max |a| = k[i] and max b = N[i]".into());
        }
        if matches!(id, FockSharpness | FockNuK | CpnSharpness | ProjectorDiag | QuasimodeSup | QuasimodeConcentration) && self.big_n.len() < 2 {
            return bad("N", format!("{id} fits a slope and needs at least two N"));
        }
        if self.formats.is_empty() {
            return bad("formats", "no output format".into());
        }
        Ok(())
    }
}

/// Optional overrides, from a config file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub experiment: Option<ExperimentId>,
    pub space: Option<Space>,
    pub n: Option<Vec<usize>>,
    #[serde(rename = "N")]
    pub big_n: Option<ValueList>,
    pub p: Option<Vec<Exponent>>,
    pub family: Option<IndexFamily>,
    pub lambda: Option<f64>,
    pub alpha: Option<Vec<usize>>,
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub seeds: Option<ValueList>,
    pub k: Option<Vec<usize>>,
    pub variants: Option<Vec<FbiVariant>>,
    pub kernel_radius: Option<f64>,
    pub tolerances: Option<ToleranceOverrides>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub slope: Option<f64>,
    pub rel: Option<f64>,
    pub exact: Option<f64>,
    pub nested: Option<f64>,
    pub band_ratio: Option<f64>,
    pub envelope: Option<f64>,
    pub decay_rate: Option<f64>,
    pub cbar: Option<f64>,
    pub convexity: Option<f64>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let usage = |message: String| CliError::Usage { field: "config".into(), message: format!("{}: {message}", path.display()) };
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| usage(e.to_string())),
            _ => toml::from_str(&text).map_err(|e| usage(e.to_string())),
        }
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: Overrides) -> Overrides {
        let t = match (self.tolerances, other.tolerances) {
            (Some(a), Some(b)) => Some(ToleranceOverrides {
                slope: b.slope.or(a.slope),
                rel: b.rel.or(a.rel),
                exact: b.exact.or(a.exact),
                nested: b.nested.or(a.nested),
                band_ratio: b.band_ratio.or(a.band_ratio),
                envelope: b.envelope.or(a.envelope),
                decay_rate: b.decay_rate.or(a.decay_rate),
                cbar: b.cbar.or(a.cbar),
                convexity: b.convexity.or(a.convexity),
            }),
            (a, b) => b.or(a),
        };
        Overrides {
            experiment: other.experiment.or(self.experiment),
            space: other.space.or(self.space),
            n: other.n.or(self.n),
            big_n: other.big_n.or(self.big_n),
            p: other.p.or(self.p),
            family: other.family.or(self.family),
            lambda: other.lambda.or(self.lambda),
            alpha: other.alpha.or(self.alpha),
            energy: other.energy.or(self.energy),
            c: other.c.or(self.c),
            seeds: other.seeds.or(self.seeds),
            k: other.k.or(self.k),
            variants: other.variants.or(self.variants),
            kernel_radius: other.kernel_radius.or(self.kernel_radius),
            tolerances: t,
            out: other.out.or(self.out),
            formats: other.formats.or(self.formats),
        }
    }

    /// Defaults of the chosen experiment with these overrides applied.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let id = self.experiment.ok_or_else(|| CliError::Usage { field: "experiment".into(), message: "no experiment given".into() })?;
        let mut c = ExperimentConfig::default_for(id);
        if let Some(v) = self.space {
            c.space = v;
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.big_n {
            c.big_n = v.0;
        }
        if let Some(v) = self.p {
            c.p = v;
        }
        if let Some(v) = self.family {
            c.family = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.energy {
            c.energy = v;
        }
        if let Some(v) = self.c {
            c.c = v;
        }
        if let Some(v) = self.seeds {
            if v.0.iter().any(|s| *s < 0.0 || s.fract() != 0.0 || *s > 2f64.powi(53)) {
                return Err(CliError::Usage { field: "seeds".into(), message: "seeds must be non-negative integers".into() });
            }
            c.seeds = v.0.iter().map(|&s| s as u64).collect();
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.variants {
            c.variants = v;
        }
        if let Some(v) = self.kernel_radius {
            c.kernel_radius = v;
        }
        if let Some(t) = self.tolerances {
            let d = &mut c.tolerances;
            let set = |x: &mut f64, v: Option<f64>| {
                if let Some(v) = v {
                    *x = v;
                }
            };
            set(&mut d.slope, t.slope);
            set(&mut d.rel, t.rel);
            set(&mut d.exact, t.exact);
            set(&mut d.nested, t.nested);
            set(&mut d.band_ratio, t.band_ratio);
            set(&mut d.envelope, t.envelope);
            set(&mut d.decay_rate, t.decay_rate);
            set(&mut d.cbar, t.cbar);
            set(&mut d.convexity, t.convexity);
        }
        if let Some(v) = self.out {
            c.out = Some(v);
        }
        if let Some(v) = self.formats {
            c.formats = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_values("250:4000:x2").unwrap(), vec![250.0, 500.0, 1000.0, 2000.0, 4000.0]);
        assert_eq!(parse_values("1:3:1").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_values("4,16").unwrap(), vec![4.0, 16.0]);
        assert!(parse_values("3:1:1").is_err());
        assert!(parse_values("a").is_err());
    }

    #[test]
    fn every_default_validates() {
        for id in ExperimentId::ALL {
            ExperimentConfig::default_for(id).validate().unwrap();
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
    }

    #[test]
    fn toml_overrides() {
        let o: Overrides = toml::from_str("experiment = \"fock-sharpness\"\nn = [2]\nN = \"100:400:x2\"\np = [4, \"inf\"]\n[tolerances]\nslope = 0.1\n").unwrap();
        let c = o.resolve().unwrap();
        assert_eq!(c.big_n, vec![100.0, 200.0, 400.0]);
        assert_eq!(c.p, vec![Exponent::Finite(4.0), Exponent::Infinity]);
        assert_eq!(c.tolerances.slope, 0.1);
        assert_eq!(c.tolerances.rel, 1e-12);
    }

    #[test]
    fn invalid_fields_are_named() {
        let o = Overrides { experiment: Some(ExperimentId::WeylWindow), n: Some(vec![2]), ..Default::default() };
        match o.resolve() {
            Err(CliError::Usage { field, .. }) => assert_eq!(field, "n"),
            other => panic!("{other:?}"),
        }
    }
}
