//! JSON views of the core verification reports.
//!
//! `serde_json` maps are BTree-backed here (the `preserve_order` feature is
//! off), so object keys always serialize sorted; floats use the shortest
//! representation that round-trips. Non-finite values become `null`.

use serde_json::{json, Value};

use jetmech_core::simulate::EquivalenceReport;
use jetmech_core::submanifolds::{EqualityReport, SubmanifoldCheckReport};
use jetmech_core::triples::MapCheckReport;

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn map_check(report: &MapCheckReport) -> Value {
    json!({
        "map": report.map,
        "n": report.n,
        "samples": report.samples,
        "seed": report.seed,
        "sign": float(report.sign),
        "max_error": float(report.max_error),
        "pass": report.pass,
    })
}

pub fn submanifold_check(
    object: &str,
    scenario: &str,
    n: usize,
    report: &SubmanifoldCheckReport,
) -> Value {
    json!({
        "object": object,
        "scenario": scenario,
        "n": n,
        "points_tested": report.points_tested,
        "points_skipped": report.points_skipped,
        "max_bracket_violation": float(report.max_violation),
        "intersection_dims": report.intersection_dims,
        "pass": report.pass,
    })
}

pub fn equality_check(report: &EqualityReport) -> Value {
    json!({
        "scenario": report.scenario,
        "variant": report.variant,
        "samples": report.samples,
        "seed": report.seed,
        "skipped": report.skipped,
        "max_lagrangian_side": float(report.max_lagrangian_side),
        "max_hamiltonian_side": float(report.max_hamiltonian_side),
        "pass": report.pass,
    })
}

pub fn equivalence(report: &EquivalenceReport) -> Value {
    json!({
        "scenario": report.scenario,
        "t0": float(report.t0),
        "t1": float(report.t1),
        "step": float(report.step),
        "sup_gap": float(report.sup_gap),
        "max_SL_residual": float(report.max_sl_residual),
        "max_SH_residual": float(report.max_sh_residual),
        "lemma_l1_max": float(report.lemma_l1_max),
        "ec2_residual_max": float(report.ec2_residual_max),
        "order_estimate": report.order_estimate.map_or(Value::Null, float),
    })
}
