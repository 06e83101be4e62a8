use std::collections::BTreeSet;

use berezin_cli::config::{ExperimentConfig, ExperimentId, Format};
use berezin_cli::emit::{emit, read_csv, render_svg};
use berezin_cli::{run, Cell};
use berezin_core::Exponent;

fn small(id: ExperimentId) -> ExperimentConfig {
    let mut c = ExperimentConfig::default_for(id);
    match id {
        ExperimentId::FockNorms => {
            c.n = vec![1];
            c.big_n = vec![4.0];
        }
        ExperimentId::FockSharpness => {
            c.n = vec![1];
            c.p = vec![Exponent::Finite(2.0), Exponent::Finite(4.0), Exponent::Infinity];
        }
        _ => {}
    }
    c
}

fn same_bits(a: &Cell, b: &Cell) -> bool {
    match (a, b) {
        (Cell::Num(x), Cell::Num(y)) => x.to_bits() == y.to_bits(),
        _ => a == b,
    }
}

#[test]
fn csv_reproduces_rows_bit_exactly() {
    let report = run(&small(ExperimentId::FockNorms)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit(&report, dir.path(), &[Format::Csv]).unwrap();
    let (header, rows) = read_csv(&files[0]).unwrap();
    assert_eq!(header, report.columns);
    assert_eq!(rows.len(), report.rows.len());
    for (r, s) in rows.iter().zip(&report.rows) {
        assert!(r.iter().zip(s).all(|(a, b)| same_bits(a, b)), "{r:?} vs {s:?}");
    }
}

#[test]
fn json_validates_against_the_shipped_schema() {
    let schema: serde_json::Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for id in [ExperimentId::FockNorms, ExperimentId::FockSharpness, ExperimentId::Convexity, ExperimentId::WeylWindow] {
        let report = run(&small(id)).unwrap();
        let files = emit(&report, dir.path(), &[Format::Json]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{id}: {errors:?}");
        let back: berezin_cli::ExperimentReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.payload_json(), report.payload_json());
    }
}

#[test]
fn svg_has_one_series_per_exponent() {
    let report = run(&small(ExperimentId::FockSharpness)).unwrap();
    let svg = render_svg(&report);
    let labels: BTreeSet<&str> = svg
        .lines()
        .filter(|l| l.contains(r#"class="series""#))
        .filter_map(|l| l.split(r#"data-series=""#).nth(1).and_then(|r| r.split('"').next()))
        .collect();
    assert_eq!(labels, BTreeSet::from(["n=1, p=2", "n=1, p=4", "n=1, p=inf"]));
    assert_eq!(svg.matches(r#"class="fit""#).count(), 3);
    assert_eq!(svg.matches(r#"class="target""#).count(), 3);
}

#[test]
fn usage_errors_name_the_field() {
    let mut c = ExperimentConfig::default_for(ExperimentId::QuasimodeSup);
    c.seeds.clear();
    let e = run(&c).unwrap_err().to_string();
    assert!(e.contains("seeds"), "{e}");
}
