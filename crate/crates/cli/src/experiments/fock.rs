use berezin_core::fock::{
    fock_asymptotic_prediction, fock_lp_norm_closed, fock_lp_norm_stirling, harmonic_eigenvalue, harmonic_multiplicity, log_convexity_check, nu_k_index,
    sharpness_ratio_bound, ConvexityFunction, FockParams, FockState,
};
use berezin_core::quad::{lp_norm_quadrature, Eigenfunction, QuadratureSpec};
use berezin_core::spectral::{build_dense_matrix, MatrixEntries, SpaceParams, Symbol, Truncation};
use berezin_core::{Exponent, MultiIndex};

use super::{family_indices, label, p_cell, par_map, status, Outcome};
use crate::config::ExperimentConfig;
use crate::report::{Cell, Check, Fit, Relation};
use crate::CliError;

fn numeric(e: berezin_core::Error) -> CliError {
    CliError::Numeric(e.to_string())
}

pub(crate) fn norms(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["n", "N", "index", "p", "closed", "quadrature", "stirling", "rel_discrepancy", "status"]);
    let mut cells = Vec::new();
    for &n in &cfg.n {
        for &nn in &cfg.big_n {
            for idx in family_indices(cfg, n, nn, 1).map_err(numeric)? {
                for &p in &cfg.p {
                    cells.push((n, nn, idx.clone(), p));
                }
            }
        }
    }
    let spec = QuadratureSpec::with_rel_tol(1e-11);
    out.rows = par_map(&cells, |(n, nn, idx, p)| {
        let r = (|| {
            let s = FockState::new(FockParams::new(*n, *nn)?, idx.clone())?;
            let c = fock_lp_norm_closed(&s, *p)?.ln_abs();
            let q = lp_norm_quadrature(Eigenfunction::Fock(&s), *p, &spec)?.ln_abs();
            let st = fock_lp_norm_stirling(&s, *p)?.ln_abs();
            Ok((c, q, st))
        })();
        let (c, q, st) = r.clone().unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        vec![
            Cell::from(*n),
            Cell::Num(*nn),
            Cell::Text(idx.to_string()),
            p_cell(*p),
            Cell::Num(c.exp()),
            Cell::Num(q.exp()),
            Cell::Num(st.exp()),
            Cell::Num((q - c).exp_m1().abs()),
            status(&r),
        ]
    });
    let worst = out.ok_rows().map(|r| out.num(r, "rel_discrepancy")).fold(0.0, f64::max);
    out.checks.push(Check::at_most("closed form vs quadrature (max relative)", worst, cfg.tolerances.rel, "sup norms compared against the grid search"));
    let l2 = out
        .ok_rows()
        .filter(|r| out.num(r, "p") == 2.0)
        .map(|r| (out.num(r, "closed") - 1.0).abs())
        .fold(0.0, f64::max);
    out.checks.push(Check::at_most("L2 norm equals 1 (max |closed - 1|)", l2, cfg.tolerances.exact, ""));
    out.check_no_errors();
    Ok(out)
}

pub(crate) fn spectrum(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["n", "N", "level", "eigenvalue", "max_diag_error", "multiplicity", "binomial", "offdiag_max", "status"]);
    let order = cfg.k[0] as u32;
    let cells: Vec<(usize, f64)> = cfg.n.iter().flat_map(|&n| cfg.big_n.iter().map(move |&nn| (n, nn))).collect();
    let per = par_map(&cells, |&(n, nn)| -> Vec<Vec<Cell>> {
        let built = (|| {
            let params = FockParams::new(n, nn)?;
            let m = build_dense_matrix(&SpaceParams::Fock(params), &Symbol::fock_harmonic(n), Truncation::FockOrder(order))?;
            Ok((params, m))
        })();
        let (params, m) = match built {
            Ok(v) => v,
            Err(e) => {
                let r: berezin_core::Result<()> = Err(e);
                return vec![vec![n.into(), nn.into(), 0usize.into(), f64::NAN.into(), f64::NAN.into(), 0usize.into(), f64::NAN.into(), f64::NAN.into(), status(&r)]];
            }
        };
        let MatrixEntries::Dense(a) = &m.entries else { unreachable!("dense assembly") };
        (0..=order)
            .map(|level| {
                let mut diag_err = 0.0f64;
                let mut off = 0.0f64;
                let mut count = 0usize;
                let expected = harmonic_eigenvalue(&params, &MultiIndex::first_axis(n, level));
                for (i, bi) in m.basis.iter().enumerate() {
                    if bi.order() != level as u64 {
                        continue;
                    }
                    count += 1;
                    diag_err = diag_err.max((a[(i, i)].re - expected).abs().max(a[(i, i)].im.abs()) / expected);
                    for j in 0..m.dim() {
                        if j != i {
                            off = off.max(a[(i, j)].norm());
                        }
                    }
                }
                vec![
                    n.into(),
                    nn.into(),
                    (level as usize).into(),
                    expected.into(),
                    diag_err.into(),
                    count.into(),
                    harmonic_multiplicity(n, level as u64).into(),
                    off.into(),
                    "ok".into(),
                ]
            })
            .collect()
    });
    out.rows = per.into_iter().flatten().collect();
    let off = out.ok_rows().map(|r| out.num(r, "offdiag_max")).fold(0.0, f64::max);
    out.checks.push(Check::new("off-diagonal entries vanish", off, 0.0, off == 0.0, format!("truncation |a| <= {order}")));
    let diag = out.ok_rows().map(|r| out.num(r, "max_diag_error")).fold(0.0, f64::max);
    out.checks.push(Check::at_most("diagonal equals (|a|+n)/N (max relative)", diag, cfg.tolerances.exact, ""));
    let bad = out.ok_rows().filter(|r| out.num(r, "multiplicity") != out.num(r, "binomial")).count();
    out.checks.push(Check::new("level multiplicities equal binom(k+n-1, n-1)", bad, 0usize, bad == 0, "counted by enumeration"));
    out.check_no_errors();
    Ok(out)
}

fn sharpness_target(n: usize, alpha: usize, p: Exponent) -> f64 {
    (n as f64 - alpha as f64 / 2.0) * (0.5 - p.recip())
}

/// Shared by the μ and ν_k sweeps: closed-form norms of one index per N.
fn slope_sweep(cfg: &ExperimentConfig, alphas: &[usize], nu_family: bool) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["n", "alpha", "N", "index", "p", "norm", "prediction", "ratio", "status"]);
    let mut cells = Vec::new();
    for &n in &cfg.n {
        for &alpha in alphas.iter().filter(|&&a| a <= n) {
            for &p in &cfg.p {
                for &nn in &cfg.big_n {
                    cells.push((n, alpha, p, nn));
                }
            }
        }
    }
    out.rows = par_map(&cells, |&(n, alpha, p, nn)| {
        let r = (|| {
            let idx = if nu_family { nu_k_index(n, alpha, cfg.lambda, nn)? } else { MultiIndex::first_axis(n, (cfg.lambda * nn).round() as u32) };
            let v = fock_lp_norm_closed(&FockState::new(FockParams::new(n, nn)?, idx.clone())?, p)?.ln_abs();
            let pred = fock_asymptotic_prediction(n, cfg.lambda, alpha, p, nn)?.value.ln_abs();
            Ok((idx, v, pred))
        })();
        let (idx, v, pred) = r.clone().unwrap_or((MultiIndex::zeros(n), f64::NAN, f64::NAN));
        vec![n.into(), alpha.into(), nn.into(), idx.to_string().into(), p_cell(p), v.exp().into(), pred.exp().into(), (v - pred).exp().into(), status(&r)]
    });
    let mut groups: Vec<(usize, usize, Exponent)> = Vec::new();
    for &(n, alpha, p, _) in &cells {
        if !groups.contains(&(n, alpha, p)) {
            groups.push((n, alpha, p));
        }
    }
    for (n, alpha, p) in groups {
        let series = if nu_family {
            label(&[("n", n.into()), ("alpha", alpha.into()), ("p", p_cell(p))])
        } else {
            label(&[("n", n.into()), ("p", p_cell(p))])
        };
        let keep = |r: &[Cell]| r[0] == Cell::from(n) && r[1] == Cell::from(alpha) && r[4] == p_cell(p);
        match out.fit("N", "norm", keep) {
            Some(f) => {
                let fit = Fit::judge("norm vs N", series, &f, sharpness_target(n, alpha, p), cfg.tolerances.slope, Relation::Within);
                out.fits.push(fit);
            }
            None => out.missing_fit("norm vs N", series),
        }
    }
    if nu_family {
        out.plot("N", "norm", &["n", "alpha", "p"]);
    } else {
        out.plot("N", "norm", &["n", "p"]);
    }
    out.check_no_errors();
    Ok(out)
}

pub(crate) fn sharpness(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    slope_sweep(cfg, &[1], false)
}

pub(crate) fn nu_k(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    slope_sweep(cfg, &cfg.alpha, true)
}

pub(crate) fn ratio_bound(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["n", "N", "index", "p", "ratio", "bound", "holds", "status"]);
    let mut cells = Vec::new();
    for &n in &cfg.n {
        for &nn in &cfg.big_n {
            for idx in family_indices(cfg, n, nn, 1).map_err(numeric)? {
                for &p in &cfg.p {
                    cells.push((n, nn, idx.clone(), p));
                }
            }
        }
    }
    out.rows = par_map(&cells, |(n, nn, idx, p)| {
        let r = FockParams::new(*n, *nn).and_then(|params| sharpness_ratio_bound(&params, *p, idx));
        let (ratio, bound, holds) = r.as_ref().map(|b| (b.ratio, b.bound, b.holds)).unwrap_or((f64::NAN, f64::NAN, false));
        vec![Cell::from(*n), Cell::Num(*nn), idx.to_string().into(), p_cell(*p), ratio.into(), bound.into(), holds.into(), status(&r)]
    });
    let failing = out.ok_rows().filter(|r| r[6] != Cell::from(true)).count();
    let worst = out.ok_rows().map(|r| out.num(r, "ratio") / out.num(r, "bound")).fold(0.0, f64::max);
    out.checks.push(Check::new("ratio <= bound for every index", failing, 0usize, failing == 0, format!("{} cases, largest ratio/bound {worst:.6}", out.rows.len())));
    out.check_no_errors();
    Ok(out)
}

pub(crate) fn convexity(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["function", "p", "points", "min_second_difference", "argmin_x", "status"]);
    let mut grid: Vec<f64> = cfg.k.iter().map(|&x| x as f64).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let functions: Vec<ConvexityFunction> = cfg
        .p
        .iter()
        .filter_map(|p| match p {
            Exponent::Finite(p) => Some(ConvexityFunction::F { p: *p }),
            Exponent::Infinity => None,
        })
        .chain(std::iter::once(ConvexityFunction::G))
        .collect();
    for f in functions {
        let r = log_convexity_check(f, &grid);
        let (name, p) = match f {
            ConvexityFunction::F { p } => ("ln f", p),
            ConvexityFunction::G => ("ln g", f64::INFINITY),
        };
        let (min, at) = match &r {
            Ok(rep) => {
                let i = rep.second_differences.iter().enumerate().fold(0, |b, (i, v)| if *v < rep.second_differences[b] { i } else { b });
                (rep.min_second_difference, grid[i + 1])
            }
            Err(_) => (f64::NAN, f64::NAN),
        };
        out.rows.push(vec![name.into(), p.into(), grid.len().into(), min.into(), at.into(), status(&r)]);
    }
    let min = out.ok_rows().map(|r| out.num(r, "min_second_difference")).fold(f64::INFINITY, f64::min);
    out.checks.push(Check::at_least("smallest second difference", min, -cfg.tolerances.convexity, format!("x in [{}, {}]", grid[0], grid[grid.len() - 1])));
    out.check_no_errors();
    Ok(out)
}
