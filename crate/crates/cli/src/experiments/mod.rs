//! One function per experiment id. Each returns the table, fits and checks;
//! [`run`] wraps them into a report.

mod cpn;
mod fbi;
mod fock;
mod spectral;

use std::time::Instant;

use berezin_core::fock::nu_k_index;
use berezin_core::spectral::{slope_fit_log, SlopeFit};
use berezin_core::{Exponent, MultiIndex};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentId, IndexFamily};
use crate::report::{Cell, Check, ExperimentReport, Fit, Meta, PlotSpec};
use crate::CliError;

/// What an experiment produces before it is wrapped in a report.
#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub plot: Option<PlotSpec>,
}

impl Outcome {
    fn new(columns: &[&'static str]) -> Self {
        Outcome { columns: columns.to_vec(), ..Default::default() }
    }

    fn col(&self, name: &str) -> usize {
        self.columns.iter().position(|c| *c == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    fn num(&self, row: &[Cell], name: &str) -> f64 {
        row[self.col(name)].as_f64().unwrap_or(f64::NAN)
    }

    fn ok_rows(&self) -> impl Iterator<Item = &Vec<Cell>> {
        let s = self.col("status");
        self.rows.iter().filter(move |r| r[s].as_text() == Some("ok"))
    }

    fn plot(&mut self, x: &str, y: &str, series: &[&str]) {
        self.plot = Some(PlotSpec { x: x.into(), y: y.into(), series: series.iter().map(|s| s.to_string()).collect() });
    }

    /// Fails when any row carries an error status; rows whose status starts
    /// with "skip" are exempt.
    fn check_no_errors(&mut self) {
        let s = self.col("status");
        let bad: Vec<String> = self
            .rows
            .iter()
            .filter_map(|r| r[s].as_text().filter(|t| *t != "ok" && !t.starts_with("skip")).map(String::from))
            .collect();
        let detail = bad.first().cloned().unwrap_or_default();
        self.checks.push(Check::new("error rows", bad.len(), 0usize, bad.is_empty(), detail));
    }

    /// Log-log fit of `y` against `x` over ok rows matching `keep`.
    fn fit(&self, x: &str, y: &str, keep: impl Fn(&[Cell]) -> bool) -> Option<SlopeFit> {
        let (lx, ly): (Vec<f64>, Vec<f64>) = self
            .ok_rows()
            .filter(|r| keep(r))
            .map(|r| (self.num(r, x).ln(), self.num(r, y).ln()))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .unzip();
        slope_fit_log(&lx, &ly).ok()
    }

    /// Same fit on a column that already holds ln y.
    fn fit_ln(&self, x: &str, ln_y: &str, keep: impl Fn(&[Cell]) -> bool) -> Option<SlopeFit> {
        let (lx, ly): (Vec<f64>, Vec<f64>) = self
            .ok_rows()
            .filter(|r| keep(r))
            .map(|r| (self.num(r, x).ln(), self.num(r, ln_y)))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .unzip();
        slope_fit_log(&lx, &ly).ok()
    }

    /// A failing placeholder for a fit that could not be computed.
    fn missing_fit(&mut self, name: &str, series: String) {
        self.checks.push(Check::new(format!("fit {name}"), "missing", "present", false, format!("series {series}: not enough valid rows")));
    }
}

pub(crate) fn p_cell(p: Exponent) -> Cell {
    Cell::Num(p.value())
}

/// Series label for the given (column, value) pairs, matching
/// [`ExperimentReport::series_label`](crate::report::ExperimentReport::series_label).
pub(crate) fn label(parts: &[(&str, Cell)]) -> String {
    parts.iter().map(|(k, v)| format!("{k}={}", crate::report::label_cell(v))).collect::<Vec<_>>().join(", ")
}

pub(crate) fn status<T>(r: &berezin_core::Result<T>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => Cell::Text(format!("error: {e}")),
    }
}

/// Order-preserving parallel map.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

/// Basis indices of `family` in dimension n at parameter N.
pub(crate) fn family_indices(cfg: &ExperimentConfig, n: usize, big_n: f64, alpha: usize) -> berezin_core::Result<Vec<MultiIndex>> {
    Ok(match &cfg.family {
        IndexFamily::Mu => vec![MultiIndex::first_axis(n, (cfg.lambda * big_n).round() as u32)],
        IndexFamily::NuK => vec![nu_k_index(n, alpha, cfg.lambda, big_n)?],
        IndexFamily::Box { max_entry } => MultiIndex::bounded_entries(n, *max_entry),
        IndexFamily::Order { order } => MultiIndex::with_order(n, *order),
        IndexFamily::Explicit { indices } => indices.iter().filter(|a| a.dim() == n).cloned().collect(),
    })
}

fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    use ExperimentId::*;
    match cfg.experiment {
        FockNorms => fock::norms(cfg),
        FockSpectrum => fock::spectrum(cfg),
        FockSharpness => fock::sharpness(cfg),
        FockNuK => fock::nu_k(cfg),
        FockRatioBound => fock::ratio_bound(cfg),
        Convexity => fock::convexity(cfg),
        CpnNorms => cpn::norms(cfg),
        CpnIntegrals => cpn::integrals(cfg),
        CpnSharpness => cpn::sharpness(cfg, false),
        CpnConstant => cpn::sharpness(cfg, true),
        CpnSpectrum => cpn::spectrum(cfg),
        WeylWindow => spectral::weyl_window(cfg),
        ProjectorDiag => spectral::projector_diag(cfg),
        QuasimodeSup => spectral::quasimode_sup(cfg),
        QuasimodeConcentration => spectral::quasimode_concentration(cfg),
        FbiIsometry => fbi::isometry(cfg),
        FbiConjugation => fbi::conjugation(cfg),
    }
}

/// Runs the configured experiment. Pass/fail comes only from the fits and
/// checks, which read their thresholds from `cfg.tolerances`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let out = dispatch(cfg)?;
    let pass = out.fits.iter().all(|f| f.pass) && out.checks.iter().all(|c| c.pass) && !(out.fits.is_empty() && out.checks.is_empty());
    Ok(ExperimentReport {
        experiment: cfg.experiment,
        claim: cfg.experiment.claim().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        seeds: cfg.seeds.clone(),
        columns: out.columns.iter().map(|s| s.to_string()).collect(),
        rows: out.rows,
        fits: out.fits,
        checks: out.checks,
        plot: out.plot,
        pass,
        meta: Meta {
            runtime_seconds: start.elapsed().as_secs_f64(),
            timestamp: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            threads: rayon::current_num_threads(),
        },
    })
}
