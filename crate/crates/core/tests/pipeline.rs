//! End-to-end runs of the comparison on a small city: ordering of the schemes,
//! determinism, and agreement between the reported gains and the cost tables.

use std::sync::OnceLock;

use atc_core::experiment::{compare, Comparison, DAILY};
use atc_core::optimizer::{OptimizerSettings, Scheme};
use atc_core::scenario::{load_scenario, BASELINE_CFG};
use atc_core::Scenario;

fn small() -> (Scenario, OptimizerSettings) {
    let text = BASELINE_CFG
        .replace("radius = 25.0", "radius = 10.0")
        .replace("dx = 0.5", "dx = 1.0")
        .replace("multistart = 6", "multistart = 2");
    (load_scenario(&text).unwrap(), OptimizerSettings::from_config(&text).unwrap())
}

fn run() -> &'static Comparison {
    static RUN: OnceLock<Comparison> = OnceLock::new();
    RUN.get_or_init(|| {
        let (p, s) = small();
        compare(&p, &s).unwrap()
    })
}

#[test]
fn richer_schemes_never_cost_more() {
    let c = run();
    let only = c.result(Scheme::MrtOnly).z_24h;
    let frf = c.result(Scheme::MrtFrf).z_24h;
    let adaptive = c.result(Scheme::Adaptive).z_24h;
    assert!(frf <= only * (1.0 + 1e-12), "{frf} > {only}");
    assert!(adaptive <= frf * (1.0 + 1e-12), "{adaptive} > {frf}");
}

#[test]
fn every_design_passes_validation() {
    for r in &run().results {
        assert!(r.violations.is_empty(), "{}: {:?}", r.spec.scheme.label(), r.violations);
        assert_eq!(r.periods.len(), small().0.periods.len());
    }
}

#[test]
fn daily_gain_matches_the_cost_tables() {
    let c = run();
    for reference in [Scheme::MrtOnly, Scheme::MrtFrf] {
        let g = c.gain(reference, DAILY).unwrap();
        let z_ref = c.result(reference).z_24h;
        let z_alt = c.result(Scheme::Adaptive).z_24h;
        approx::assert_relative_eq!(g.total, (z_ref - z_alt) / z_ref, epsilon = 1e-12);
    }
}

#[test]
fn comparison_is_deterministic() {
    let (p, s) = small();
    let again = compare(&p, &s).unwrap();
    assert_eq!(&again, run());
}
