use berezin_core::fbi::{conjugation_residual, isometry_check, FbiVariant};

use super::{label, status, Outcome};
use crate::config::ExperimentConfig;
use crate::report::{Cell, Check};
use crate::CliError;

fn variant_name(v: FbiVariant) -> &'static str {
    match v {
        FbiVariant::Appendix => "appendix",
        FbiVariant::Phi => "phi",
    }
}

pub(crate) fn isometry(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["variant", "N", "k", "input_norm", "output_norm", "ratio_error", "cbar_relative", "grid_points", "status"]);
    let mut cells = Vec::new();
    for &v in &cfg.variants {
        for &nn in &cfg.big_n {
            for &k in &cfg.k {
                cells.push((v, nn, k));
            }
        }
    }
    // each check parallelises internally; run the cells in order
    out.rows = cells
        .iter()
        .map(|&(v, nn, k)| {
            let r = isometry_check(v, nn, k);
            let row = r.as_ref().map(|c| (c.input_norm, c.output_norm, (c.ratio - 1.0).abs(), c.cbar.relative, c.grid_points));
            let (a, b, e, cb, g) = row.unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0));
            vec![variant_name(v).into(), nn.into(), k.into(), a.into(), b.into(), e.into(), cb.into(), g.into(), status(&r)]
        })
        .collect();
    let max = |name: &str| out.ok_rows().map(|r| out.num(r, name)).fold(0.0, f64::max);
    let (e, cb) = (max("ratio_error"), max("cbar_relative"));
    out.checks.push(Check::at_most("norm ratio (max |ratio - 1|)", e, cfg.tolerances.rel, "Hermite functions, k = 0 is the Gaussian"));
    out.checks.push(Check::at_most("Cauchy-Riemann residual (max relative)", cb, cfg.tolerances.cbar, "interior nodes"));
    out.check_no_errors();
    Ok(out)
}

pub(crate) fn conjugation(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["k", "N", "eigenvalue", "corrected", "uncorrected", "discretisation", "discretisation_dominated", "status"]);
    let cells: Vec<(usize, f64)> = cfg.k.iter().flat_map(|&k| cfg.big_n.iter().map(move |&nn| (k, nn))).collect();
    out.rows = cells
        .iter()
        .map(|&(k, nn)| {
            let r = conjugation_residual(k, nn);
            let row = r.as_ref().map(|c| (c.eigenvalue, c.corrected, c.uncorrected, c.discretisation, c.discretisation_dominated));
            let (ev, c, u, d, dd) = row.unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN, false));
            vec![k.into(), nn.into(), ev.into(), c.into(), u.into(), d.into(), dd.into(), status(&r)]
        })
        .collect();
    let mut ks = cfg.k.clone();
    ks.dedup();
    let mut ns = cfg.big_n.clone();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    for k in ks {
        let series = label(&[("k", k.into())]);
        let rows: Vec<Vec<Cell>> = ns
            .iter()
            .filter_map(|&nn| out.ok_rows().find(|r| out.num(r, "k") == k as f64 && out.num(r, "N") == nn).cloned())
            .collect();
        let corrected: Vec<f64> = rows.iter().map(|r| out.num(r, "corrected")).collect();
        let decreasing = corrected.len() == ns.len() && corrected.windows(2).all(|w| w[1] < w[0]);
        let rate = out.fit("N", "corrected", |r| r[0] == Cell::from(k)).map(|f| format!("fitted rate N^{:.3}", f.slope)).unwrap_or_default();
        let first_last = (corrected.first().copied().unwrap_or(f64::NAN), corrected.last().copied().unwrap_or(f64::NAN));
        out.checks.push(Check::new(
            format!("corrected residual decreases in N ({series})"),
            first_last.1,
            first_last.0,
            decreasing,
            format!("{:.3e} -> {:.3e}; {rate}", first_last.0, first_last.1),
        ));
        let above = rows.iter().filter(|r| out.num(r, "uncorrected") > out.num(r, "corrected")).count();
        out.checks.push(Check::new(
            format!("uncorrected residual exceeds corrected ({series})"),
            above,
            ns.len(),
            above == ns.len(),
            "at every N",
        ));
    }
    out.plot("N", "corrected", &["k"]);
    out.check_no_errors();
    Ok(out)
}
