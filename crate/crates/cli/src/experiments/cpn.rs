use berezin_core::cpn::{cpn_asymptotic_prediction, cpn_lp_norm_closed, cpn_model_eigenvalue, lcalcul_integral, CPnParams, CPnState, CpnMonomial};
use berezin_core::quad::{cpn_toeplitz_quadrature, lcalcul_quadrature, lp_norm_quadrature, Eigenfunction, QuadratureSpec};
use berezin_core::{Error, Exponent, MultiIndex};

use super::{label, p_cell, par_map, status, Outcome};
use crate::config::ExperimentConfig;
use crate::report::{Cell, Check, Fit, Relation};
use crate::CliError;

pub(crate) fn norms(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["kind", "n", "N", "a1", "p", "closed", "quadrature", "rel_discrepancy", "status"]);
    // every a_1 <= N at p = 2, one row per (n, N) holding the worst a_1
    let cells: Vec<(usize, u64)> = cfg.n.iter().flat_map(|&n| cfg.big_n.iter().map(move |&nn| (n, nn as u64))).collect();
    let l2 = par_map(&cells, |&(n, nn)| {
        let r = (|| {
            let params = CPnParams::new(n, nn)?;
            let mut worst = (0u64, 1.0f64);
            for a1 in 0..=nn {
                let v = cpn_lp_norm_closed(&params, a1, Exponent::Finite(2.0))?.ln_abs().exp();
                if (v - 1.0).abs() > (worst.1 - 1.0).abs() {
                    worst = (a1, v);
                }
            }
            Ok(worst)
        })();
        let (a1, v) = r.clone().unwrap_or((0, f64::NAN));
        vec!["l2".into(), n.into(), nn.into(), a1.into(), 2.0.into(), v.into(), Cell::Num(1.0), (v - 1.0).abs().into(), status(&r)]
    });
    // quadrature oracle on selected N
    let mut oracle = Vec::new();
    for &n in cfg.n.iter().filter(|&&n| n <= 2) {
        for &nn in &cfg.k {
            let nn = nn as u64;
            let mut a1s = vec![0, nn / 2, nn];
            a1s.dedup();
            for a1 in a1s {
                for &p in &cfg.p {
                    oracle.push((n, nn, a1, p));
                }
            }
        }
    }
    let spec = QuadratureSpec::with_rel_tol(1e-11);
    let orows = par_map(&oracle, |&(n, nn, a1, p)| {
        let r = (|| {
            let params = CPnParams::new(n, nn)?;
            let s = CPnState::new(params, MultiIndex::first_axis(n, a1 as u32))?;
            let q = lp_norm_quadrature(Eigenfunction::Cpn(&s), p, &spec)?.ln_abs();
            let c = cpn_lp_norm_closed(&params, a1, p).map(|v| v.ln_abs());
            Ok((c, q))
        })();
        let row = |c: f64, q: f64, st: Cell| vec!["oracle".into(), n.into(), nn.into(), a1.into(), p_cell(p), c.exp().into(), q.exp().into(), (q - c).exp_m1().abs().into(), st];
        match r {
            Ok((Ok(c), q)) => row(c, q, "ok".into()),
            Ok((Err(Error::Degenerate(m)), q)) => row(f64::NAN, q, format!("skip: {m}").into()),
            Ok((Err(e), _)) | Err(e) => row(f64::NAN, f64::NAN, format!("error: {e}").into()),
        }
    });
    out.rows = l2.into_iter().chain(orows).collect();
    let kind = |r: &[Cell], k: &str| r[0].as_text() == Some(k);
    let dev = out.ok_rows().filter(|r| kind(r, "l2")).map(|r| out.num(r, "rel_discrepancy")).fold(0.0, f64::max);
    out.checks.push(Check::at_most("L2 norm equals 1 for every a_1 <= N (max |closed - 1|)", dev, cfg.tolerances.exact, ""));
    let rel = out.ok_rows().filter(|r| kind(r, "oracle")).map(|r| out.num(r, "rel_discrepancy")).fold(0.0, f64::max);
    let count = out.ok_rows().filter(|r| kind(r, "oracle")).count();
    out.checks.push(Check::at_most("closed form vs quadrature (max relative)", rel, cfg.tolerances.rel, format!("{count} comparisons, n <= 2")));
    out.check_no_errors();
    Ok(out)
}

pub(crate) fn integrals(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["n", "a", "b", "closed", "quadrature", "rel_discrepancy", "tolerance", "status"]);
    let mut cells = Vec::new();
    for ((&n, &amax), &bmax) in cfg.n.iter().zip(&cfg.k).zip(&cfg.big_n) {
        let tol = if n == 1 { cfg.tolerances.rel } else { cfg.tolerances.nested };
        for a in MultiIndex::up_to_order(n, amax as u32) {
            for b in a.order()..=bmax as u64 {
                cells.push((n, a.clone(), b, tol));
            }
        }
    }
    let spec = QuadratureSpec::with_rel_tol(1e-12);
    out.rows = par_map(&cells, |(n, a, b, tol)| {
        let r = (|| Ok((lcalcul_integral(*n, a, *b)?.ln_abs().exp(), lcalcul_quadrature(*n, a, *b, &spec)?)))();
        let (c, q) = r.clone().unwrap_or((f64::NAN, f64::NAN));
        vec![Cell::from(*n), a.to_string().into(), (*b).into(), c.into(), q.into(), ((q - c) / c).abs().into(), (*tol).into(), status(&r)]
    });
    let over = out.ok_rows().filter(|r| !(out.num(r, "rel_discrepancy") <= out.num(r, "tolerance"))).count();
    let worst = out.ok_rows().map(|r| out.num(r, "rel_discrepancy")).fold(0.0, f64::max);
    out.checks.push(Check::new("closed form vs quadrature within tolerance", over, 0usize, over == 0, format!("largest relative discrepancy {worst:.3e}")));
    let spot = lcalcul_integral(2, &MultiIndex(vec![1, 0]), 2).map(|v| v.ln_abs().exp()).unwrap_or(f64::NAN);
    out.checks.push(Check::at_most("n=2, a=(1,0), b=2 equals 1/96", (spot - 1.0 / 96.0).abs() * 96.0, cfg.tolerances.exact, format!("value {spot:.17}")));
    out.check_no_errors();
    Ok(out)
}

/// Saturating sections a_1 = floor(N/2). With `constant` the ratio to the
/// leading-order prediction is checked; otherwise the log-log slope.
pub(crate) fn sharpness(cfg: &ExperimentConfig, constant: bool) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["n", "N", "a1", "p", "norm", "prediction", "ratio", "status"]);
    let mut cells = Vec::new();
    for &n in &cfg.n {
        for &p in &cfg.p {
            for &nn in &cfg.big_n {
                cells.push((n, p, nn as u64));
            }
        }
    }
    out.rows = par_map(&cells, |&(n, p, nn)| {
        let a1 = nn / 2;
        let r = CPnParams::new(n, nn).and_then(|params| cpn_lp_norm_closed(&params, a1, p)).map(|v| v.ln_abs());
        let v = *r.as_ref().unwrap_or(&f64::NAN);
        let pred = cpn_asymptotic_prediction(n, p, nn).value.ln_abs();
        vec![n.into(), nn.into(), a1.into(), p_cell(p), v.exp().into(), pred.exp().into(), (v - pred).exp().into(), status(&r)]
    });
    let mut groups: Vec<(usize, Exponent)> = Vec::new();
    for &(n, p, _) in &cells {
        if !groups.contains(&(n, p)) {
            groups.push((n, p));
        }
    }
    if constant {
        for r in out.ok_rows().cloned().collect::<Vec<_>>() {
            let ratio = out.num(&r, "ratio");
            let name = format!("norm / prediction at {}, N={}", label(&[("n", r[0].clone()), ("p", r[3].clone())]), out.num(&r, "N"));
            out.checks.push(Check::at_most(name, (ratio - 1.0).abs(), cfg.tolerances.rel, format!("ratio {ratio:.6}")));
        }
    } else {
        for (n, p) in groups {
            let series = label(&[("n", n.into()), ("p", p_cell(p))]);
            match out.fit("N", "norm", |r| r[0] == Cell::from(n) && r[3] == p_cell(p)) {
                Some(f) => {
                    let target = (n as f64 - 0.5) * (0.5 - p.recip());
                    out.fits.push(Fit::judge("norm vs N", series, &f, target, cfg.tolerances.slope, Relation::Within));
                }
                None => out.missing_fit("norm vs N", series),
            }
        }
    }
    out.plot("N", "norm", &["n", "p"]);
    out.check_no_errors();
    Ok(out)
}

pub(crate) fn spectrum(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(&["n", "N", "dim", "offdiag_max", "max_diag_error", "gershgorin_bound", "status"]);
    let angular = cfg.k[0];
    let cells: Vec<(usize, u64)> = cfg.n.iter().flat_map(|&n| cfg.big_n.iter().map(move |&nn| (n, nn as u64))).collect();
    let spec = QuadratureSpec::with_rel_tol(1e-12);
    out.rows = par_map(&cells, |&(n, nn)| {
        let r = (|| {
            let params = CPnParams::new(n, nn)?;
            let basis = MultiIndex::up_to_order(n, nn as u32);
            let h = CpnMonomial::h(n);
            let (mut off, mut diag_err, mut gersh) = (0.0f64, 0.0f64, 0.0f64);
            for a in &basis {
                let mut row_sum = 0.0;
                for b in &basis {
                    let v = cpn_toeplitz_quadrature(&params, &h, a, b, angular, &spec)?;
                    row_sum += v.norm();
                    if a == b {
                        diag_err = diag_err.max((v - cpn_model_eigenvalue(&params, a)).norm());
                    } else {
                        off = off.max(v.norm());
                    }
                }
                gersh = gersh.max(row_sum);
            }
            Ok((basis.len(), off, diag_err, gersh))
        })();
        let (d, off, de, g) = r.clone().unwrap_or((0, f64::NAN, f64::NAN, f64::NAN));
        vec![n.into(), nn.into(), d.into(), off.into(), de.into(), g.into(), status(&r)]
    });
    let max = |name: &str| out.ok_rows().map(|r| out.num(r, name)).fold(0.0, f64::max);
    let (off, de, g) = (max("offdiag_max"), max("max_diag_error"), max("gershgorin_bound"));
    out.checks.push(Check::at_most("off-diagonal entries (max modulus)", off, cfg.tolerances.rel, format!("{angular} angular nodes")));
    out.checks.push(Check::at_most("diagonal vs (a_1+1)/(N+n+1) (max error)", de, cfg.tolerances.rel, ""));
    out.checks.push(Check::at_most("eigenvalue bound (largest Gershgorin row sum)", g, 1.0, "every eigenvalue is at most this"));
    out.check_no_errors();
    Ok(out)
}
