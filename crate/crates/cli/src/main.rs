use std::path::PathBuf;
use std::process::ExitCode;

use berezin_cli::config::{parse_exponents, ValueList};
use berezin_cli::config::ToleranceOverrides;
use berezin_cli::{emit, run, CliError, ExperimentId, Format, Overrides};
use berezin_core::Exponent;
use clap::Parser;

/// Runs one experiment and writes its report.
///
/// Exit status: 0 when every check passes, 2 when a check fails, 1 on a
/// usage or numeric error. Set RAYON_NUM_THREADS to fix the thread count.
#[derive(Debug, Parser)]
#[command(name = "berezin", version)]
struct Args {
    #[arg(long, value_enum)]
    experiment: Option<ExperimentId>,
    /// TOML or JSON file with config overrides; flags win over the file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimensions, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// List `a,b,c`, range `a:b:step` or geometric range `a:b:xk`.
    #[arg(long = "N")]
    big_n: Option<ValueList>,
    /// Exponents, comma-separated; `inf` allowed.
    #[arg(long, value_parser = exponents)]
    p: Option<Exponents>,
    #[arg(long = "E")]
    energy: Option<f64>,
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<usize>>,
    /// Seeds, same syntax as --N.
    #[arg(long)]
    seeds: Option<ValueList>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    #[arg(long)]
    tol_slope: Option<f64>,
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Print the experiment catalogue and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Debug, Clone)]
struct Exponents(Vec<Exponent>);

fn exponents(s: &str) -> Result<Exponents, String> {
    parse_exponents(s).map(Exponents)
}

fn overrides(a: &Args) -> Result<Overrides, CliError> {
    let file = match &a.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let tolerances = (a.tol_slope.is_some() || a.tol_rel.is_some()).then(|| ToleranceOverrides { slope: a.tol_slope, rel: a.tol_rel, ..Default::default() });
    let flags = Overrides {
        experiment: a.experiment,
        n: a.n.clone(),
        big_n: a.big_n.clone(),
        p: a.p.clone().map(|p| p.0),
        alpha: a.alpha.clone(),
        energy: a.energy,
        c: a.c,
        seeds: a.seeds.clone(),
        k: a.k.clone(),
        tolerances,
        formats: a.format.clone(),
        ..Default::default()
    };
    Ok(file.merge(flags))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if args.list {
        for id in ExperimentId::ALL {
            println!("{:<24} {}", id.name(), id.claim());
        }
        return ExitCode::SUCCESS;
    }
    let result = overrides(&args).and_then(Overrides::resolve).and_then(|cfg| {
        let report = run(&cfg)?;
        let dir = cfg.out.clone().unwrap_or_else(|| args.out.clone());
        let files = emit::emit(&report, &dir, &cfg.formats)?;
        Ok((report, files))
    });
    match result {
        Ok((report, files)) => {
            print!("{}", report.summary());
            for f in files {
                println!("  wrote {}", f.display());
            }
            let errors = report.rows.iter().any(|r| r.iter().any(|c| c.as_text().is_some_and(|t| t.starts_with("error"))));
            if errors {
                eprintln!("numeric errors in some rows; see the status column");
                ExitCode::from(1)
            } else if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
