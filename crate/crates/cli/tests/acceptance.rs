//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the PASS/FAIL lines are always printed; exits non-zero if any fails.

use std::time::Instant;

use berezin_cli::config::{ExperimentConfig, ExperimentId};
use berezin_cli::{run, ExperimentReport};
use berezin_core::Exponent;

struct Verdict {
    pass: bool,
    detail: String,
}

fn report(id: ExperimentId, edit: impl FnOnce(&mut ExperimentConfig)) -> ExperimentReport {
    let mut c = ExperimentConfig::default_for(id);
    edit(&mut c);
    run(&c).unwrap_or_else(|e| panic!("{id}: {e}"))
}

/// Verdict from the named checks and fits (substring match); `None` takes all.
fn judge(r: &ExperimentReport, names: Option<&[&str]>) -> Verdict {
    let wanted = |n: &str| names.map_or(true, |ns| ns.iter().any(|w| n.contains(w)));
    let mut pass = true;
    let mut parts = Vec::new();
    let mut seen = 0;
    for c in r.checks.iter().filter(|c| wanted(&c.name)) {
        seen += 1;
        pass &= c.pass;
        if !c.pass {
            parts.push(format!("{}: {:?} vs {:?} {}", c.name, c.value, c.threshold, c.detail));
        }
    }
    for f in r.fits.iter().filter(|f| wanted(&f.name)) {
        seen += 1;
        pass &= f.pass;
        let series = if f.series.is_empty() { String::new() } else { format!("[{}] ", f.series) };
        parts.push(format!("{series}slope {:.4} target {:.4}", f.slope, f.target));
    }
    if seen == 0 {
        return Verdict { pass: false, detail: "no matching checks".into() };
    }
    Verdict { pass, detail: parts.join("; ") }
}

fn both(a: Verdict, b: Verdict) -> Verdict {
    let detail = [a.detail, b.detail].into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().join("; ");
    Verdict { pass: a.pass && b.pass, detail }
}

fn fock_norms() -> Verdict {
    judge(&report(ExperimentId::FockNorms, |_| {}), Some(&["closed form vs quadrature", "error rows"]))
}

fn l2_exact() -> Verdict {
    let f = judge(&report(ExperimentId::FockNorms, |_| {}), Some(&["L2 norm"]));
    let c = judge(&report(ExperimentId::CpnNorms, |_| {}), Some(&["L2 norm"]));
    both(f, c)
}

fn harmonic_spectrum() -> Verdict {
    judge(&report(ExperimentId::FockSpectrum, |_| {}), None)
}

fn fock_sharpness() -> Verdict {
    judge(&report(ExperimentId::FockSharpness, |_| {}), None)
}

fn nu_k() -> Verdict {
    judge(&report(ExperimentId::FockNuK, |_| {}), None)
}

fn ratio_bound() -> Verdict {
    judge(&report(ExperimentId::FockRatioBound, |_| {}), None)
}

fn convexity() -> Verdict {
    judge(&report(ExperimentId::Convexity, |_| {}), None)
}

fn radial_integrals() -> Verdict {
    judge(&report(ExperimentId::CpnIntegrals, |_| {}), None)
}

fn cpn_spectrum() -> Verdict {
    judge(&report(ExperimentId::CpnSpectrum, |_| {}), None)
}

fn cpn_constant() -> Verdict {
    let one = report(ExperimentId::CpnConstant, |c| {
        c.n = vec![1];
        c.p = vec![Exponent::Finite(4.0), Exponent::Infinity];
    });
    let two = report(ExperimentId::CpnConstant, |c| {
        c.n = vec![2];
        c.p = vec![Exponent::Finite(4.0)];
    });
    // the stated constant for n = 1, p = inf, read straight off the table
    let (ip, inorm) = (one.column("p").unwrap(), one.column("norm").unwrap());
    let row = one.rows.iter().find(|r| r[ip].as_f64() == Some(f64::INFINITY)).expect("p = inf row");
    let scaled = row[inorm].as_f64().unwrap() / 4000f64.powf(0.25);
    let stated = Verdict {
        pass: ((scaled / 0.35638) - 1.0).abs() <= 0.02,
        detail: format!("norm / N^(1/4) = {scaled:.5} vs 0.35638"),
    };
    both(both(judge(&one, None), judge(&two, None)), stated)
}

fn weyl_window() -> Verdict {
    judge(&report(ExperimentId::WeylWindow, |_| {}), None)
}

fn projector_band() -> Verdict {
    judge(&report(ExperimentId::ProjectorDiag, |_| {}), Some(&["band", "error rows"]))
}

fn projector_integral() -> Verdict {
    judge(&report(ExperimentId::ProjectorDiag, |_| {}), Some(&["integral"]))
}

fn quasimode_sup() -> Verdict {
    judge(&report(ExperimentId::QuasimodeSup, |_| {}), None)
}

fn quasimode_concentration() -> Verdict {
    judge(&report(ExperimentId::QuasimodeConcentration, |_| {}), None)
}

fn fbi_isometry() -> Verdict {
    judge(&report(ExperimentId::FbiIsometry, |_| {}), None)
}

fn fbi_conjugation() -> Verdict {
    judge(&report(ExperimentId::FbiConjugation, |_| {}), None)
}

fn determinism() -> Verdict {
    let in_pool = |threads: usize, id: ExperimentId| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run(&ExperimentConfig::default_for(id)).unwrap().payload_json())
    };
    let differing: Vec<&str> = ExperimentId::ALL.iter().filter(|&&id| in_pool(1, id) != in_pool(8, id)).map(|id| id.name()).collect();
    Verdict { pass: differing.is_empty(), detail: if differing.is_empty() { "17 experiments".into() } else { format!("differs: {differing:?}") } }
}

fn main() {
    let criteria: [(&str, &str, fn() -> Verdict); 18] = [
        ("1", "Fock closed-form norms match quadrature to 1e-6", fock_norms),
        ("2", "L2 norms equal 1 to 1e-12 on Fock and CP^n", l2_exact),
        ("3", "T_N(|z|^2) diagonal with (|a|+n)/N and binomial multiplicities", harmonic_spectrum),
        ("4", "Fock sharpness slopes (n-1/2)(1/2-1/p) +- 0.05", fock_sharpness),
        ("5", "nu_k slopes (n-alpha/2)(1/2-1/p) +- 0.05", nu_k),
        ("6", "ratio bound over |nu| = 20", ratio_bound),
        ("7", "log-convexity of f_p and g", convexity),
        ("8", "radial moment integral closed form vs quadrature", radial_integrals),
        ("9", "CP^n quadrature-assembled T_N(H) spectrum", cpn_spectrum),
        ("10", "CP^n constant within 2% at N = 4000", cpn_constant),
        ("11", "Weyl window nonempty for N in [10, 2000], count 3 at N = 10", weyl_window),
        ("12a", "projector diagonal sup / N^(1/2) in a band of ratio <= 3", projector_band),
        ("12b", "projector diagonal integral slope 1/2 +- 0.1", projector_integral),
        ("13", "quasimode sup slope <= 0.30, samples within 3x of the fit", quasimode_sup),
        ("14", "quasimode mass off the band decays at rate >= 4", quasimode_concentration),
        ("15", "FBI isometry to 1e-4 and Cauchy-Riemann residual <= 1e-6", fbi_isometry),
        ("16", "conjugation residual decreases in N, correction helps", fbi_conjugation),
        ("17", "byte-identical JSON payloads with 1 and 8 threads", determinism),
    ];
    let mut failed = Vec::new();
    for (id, what, f) in criteria {
        let t = Instant::now();
        let v = f();
        println!("criterion {id:>3} {} {what} ({:.1}s) {}", if v.pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("all criteria pass");
    } else {
        println!("failing criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
