//! Row builders for every CSV and JSON the commands emit.

use anyhow::Result;
use serde::Serialize;

use atc_core::cost::{Component, CostBreakdown};
use atc_core::design::Feeder;
use atc_core::experiment::{Comparison, GridCell, DAILY};
use atc_core::optimizer::SchemeResult;
use atc_core::sim_oracle::OracleRow;
use atc_core::Scenario;

use crate::output::{num, opt, OutputDir};

pub const DESIGN_HEADER: [&str; 17] = [
    "scheme", "period", "x", "zone", "theta_r", "S_r", "s", "S_c", "s_c", "phi", "H", "Q", "feeder", "n_s", "d", "d0", "h",
];

fn design_rows(results: &[SchemeResult]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for res in results {
        for p in &res.periods {
            for n in &p.profile().nodes {
                let d = &n.design;
                let (stop, walk) = match d.feeder {
                    Feeder::Frf { d, .. } => (Some(d), None),
                    Feeder::Drf { d0, .. } => (None, Some(d0)),
                    Feeder::None => (None, None),
                };
                rows.push(vec![
                    res.spec.scheme.label().to_string(),
                    p.label.clone(),
                    num(n.x),
                    n.zone.label().to_string(),
                    num(d.theta_r),
                    num(d.radial_line_spacing(n.x)),
                    num(d.s),
                    opt(d.ring_spacing),
                    opt(d.ring_station_spacing),
                    opt(d.phi(n.x)),
                    num(d.headway),
                    num(d.flow()),
                    d.feeder.mode().label().to_string(),
                    if d.feeder == Feeder::None { String::new() } else { d.feeder.strips().to_string() },
                    opt(stop),
                    opt(walk),
                    opt(d.feeder.headway()),
                ]);
            }
        }
    }
    rows
}

pub const COST_HEADER: [&str; 8] = ["scheme", "period", "hours", "component", "mrt_local", "mrt_global", "fmlm_local", "total"];

fn rollups(b: &CostBreakdown<f64>) -> [(&'static str, f64); 4] {
    [("Z_user", b.z_user()), ("Z_cap", b.z_cap()), ("Z_op", b.z_op()), ("Z_total", b.z_total())]
}

fn cost_rows(results: &[SchemeResult]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for res in results {
        let scheme = res.spec.scheme.label().to_string();
        for p in &res.periods {
            let b = &p.breakdown;
            for c in Component::ALL {
                let v = b.get(c);
                rows.push(vec![
                    scheme.clone(),
                    p.label.clone(),
                    p.hours.to_string(),
                    format!("Z_{}", c.label()),
                    num(v.mrt_local),
                    num(v.mrt_global),
                    num(v.fmlm_local),
                    num(v.total()),
                ]);
            }
            for (name, v) in rollups(b) {
                rows.push(vec![scheme.clone(), p.label.clone(), p.hours.to_string(), name.into(), String::new(), String::new(), String::new(), num(v)]);
            }
        }
        let hours: u32 = res.periods.iter().map(|p| p.hours).sum();
        for (name, v) in [("Z_agency", res.daily_agency()), ("Z_user", res.daily_user()), ("Z_24h", res.z_24h)] {
            rows.push(vec![scheme.clone(), DAILY.into(), hours.to_string(), name.into(), String::new(), String::new(), String::new(), num(v)]);
        }
    }
    rows
}

#[derive(Serialize)]
struct PeriodSummary<'a> {
    label: &'a str,
    hours: u32,
    r: f64,
    q0: f64,
    phi_b: f64,
    h_b: f64,
    z_user: f64,
    z_cap: f64,
    z_op: f64,
    z_total: f64,
    breakdown: &'a CostBreakdown<f64>,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct SchemeSummary<'a> {
    scheme: &'static str,
    peak_source: &'static str,
    z24h: f64,
    z_cap: f64,
    daily_agency: f64,
    daily_user: f64,
    violations: Vec<String>,
    periods: Vec<PeriodSummary<'a>>,
}

#[derive(Serialize)]
struct Summary<'a> {
    radius: f64,
    dx: f64,
    schemes: Vec<SchemeSummary<'a>>,
}

fn summary<'a>(params: &Scenario, results: &'a [SchemeResult]) -> Summary<'a> {
    Summary {
        radius: params.radius,
        dx: params.dx,
        schemes: results
            .iter()
            .map(|res| SchemeSummary {
                scheme: res.spec.scheme.label(),
                peak_source: res.peak_source.label(),
                z24h: res.z_24h,
                z_cap: res.z_cap,
                daily_agency: res.daily_agency(),
                daily_user: res.daily_user(),
                violations: res.violations.iter().map(|v| v.to_string()).collect(),
                periods: res
                    .periods
                    .iter()
                    .map(|p| {
                        let g = p.global();
                        let b = &p.breakdown;
                        PeriodSummary {
                            label: &p.label,
                            hours: p.hours,
                            r: g.r,
                            q0: g.q0,
                            phi_b: g.phi_b,
                            h_b: g.h_b,
                            z_user: b.z_user(),
                            z_cap: b.z_cap(),
                            z_op: b.z_op(),
                            z_total: b.z_total(),
                            breakdown: b,
                            warnings: &p.warnings,
                        }
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// design_profile.csv, costs.csv and summary.json for one or more schemes.
pub fn write_scheme_outputs(out: &OutputDir, params: &Scenario, results: &[SchemeResult]) -> Result<()> {
    out.write_csv("design_profile.csv", "atc.design_profile/1", &DESIGN_HEADER, &design_rows(results))?;
    out.write_csv("costs.csv", "atc.costs/1", &COST_HEADER, &cost_rows(results))?;
    out.write_json("summary.json", &summary(params, results))
}

pub const GAINS_HEADER: [&str; 8] = ["kind", "reference", "alternative", "scheme", "period", "zone", "metric", "value"];

/// gains.csv: the gains of Adaptive plus the zonal access-time table, in long format.
pub fn write_gains(out: &OutputDir, cmp: &Comparison) -> Result<()> {
    let mut rows = Vec::new();
    for g in &cmp.gains {
        for (metric, v) in [("total", g.total), ("agency", g.agency), ("user", g.user)] {
            rows.push(vec![
                "gain".into(),
                g.reference.label().into(),
                g.alternative.label().into(),
                String::new(),
                g.period.clone(),
                String::new(),
                metric.into(),
                num(v),
            ]);
        }
    }
    for a in &cmp.access {
        for (metric, v) in [
            ("walk_feeder", a.walk_feeder),
            ("wait_feeder", a.wait_feeder),
            ("ride_feeder", a.ride_feeder),
            ("walk_mrt", a.walk_mrt),
            ("wait_mrt", a.wait_mrt),
            ("access_total", a.total),
        ] {
            rows.push(vec![
                "access_min".into(),
                String::new(),
                String::new(),
                a.scheme.label().into(),
                a.period.clone(),
                a.zone.into(),
                metric.into(),
                num(v),
            ]);
        }
    }
    out.write_csv("gains.csv", "atc.gains/1", &GAINS_HEADER, &rows)
}

pub const SWEEP_HEADER: [&str; 7] = ["radius", "vot", "total_gain", "agency_gain", "user_gain", "status", "error"];

pub fn write_sweep(out: &OutputDir, cells: &[GridCell]) -> Result<()> {
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                num(c.radius),
                num(c.vot),
                opt(c.total),
                opt(c.agency),
                opt(c.user),
                if c.ok() { "ok".into() } else { "failed".into() },
                c.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    out.write_csv("sweep.csv", "atc.sweep/1", &SWEEP_HEADER, &rows)
}

pub const ORACLE_HEADER: [&str; 13] = [
    "mode", "l", "w", "expected_n", "sim_n", "sim_cl", "sim_cl_ci95", "ca_cl", "cl_rel_error", "sim_c", "sim_c_ci95", "ca_c", "c_rel_error",
];

pub fn write_oracle(out: &OutputDir, rows: &[OracleRow]) -> Result<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.mode.label().into(),
                num(r.l),
                num(r.w),
                num(r.expected_n),
                num(r.sim_n),
                num(r.sim_cl),
                num(r.sim_cl_ci95),
                num(r.ca_cl),
                num(r.cl_error()),
                num(r.sim_c),
                num(r.sim_c_ci95),
                num(r.ca_c),
                num(r.c_error()),
            ]
        })
        .collect();
    out.write_csv("oracle.csv", "atc.oracle/1", &ORACLE_HEADER, &body)
}
