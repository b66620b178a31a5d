//! Independent checks of an optimized design: ordering along the radius, every
//! capacity limit, the boundary station spacing, scheme rules, and the pins and
//! fleet caps that tie each period to the peak.
//!
//! The profile is re-priced from scratch, so nothing the optimizer cached is trusted.
//! Comparisons allow a relative slack of 1e-9 for floating-point round-off only.

use std::fmt;

use serde::Serialize;

use super::period::{PeriodResult, SchemeResult};
use super::{OptimizerSettings, Scheme, SchemeSpec};
use crate::cost::evaluate_profile;
use crate::design::{Feeder, FeederMode, Zone};
use crate::scenario::{DemandField, ScenarioParams};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub period: String,
    pub x: Option<f64>,
    pub constraint: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.x {
            Some(x) => write!(f, "period={} x={x} constraint={} {}", self.period, self.constraint, self.detail),
            None => write!(f, "period={} constraint={} {}", self.period, self.constraint, self.detail),
        }
    }
}

struct Sink<'a> {
    period: &'a str,
    out: Vec<Violation>,
}

impl Sink<'_> {
    fn check(&mut self, ok: bool, x: Option<f64>, constraint: &'static str, detail: impl FnOnce() -> String) {
        if !ok {
            self.out.push(Violation {
                period: self.period.to_string(),
                x,
                constraint,
                detail: detail(),
            });
        }
    }
}

#[inline]
fn le(a: f64, b: f64) -> bool {
    a <= b + TOL * b.abs().max(a.abs())
}

/// Checks one period's design on its own.
pub fn validate_period(
    params: &ScenarioParams<f64>,
    settings: &OptimizerSettings,
    spec: &SchemeSpec,
    period: &PeriodResult,
) -> Vec<Violation> {
    let mut sink = Sink {
        period: &period.label,
        out: Vec::new(),
    };
    let profile = period.profile();
    let field = match DemandField::new(params, &period.label) {
        Ok(f) => f,
        Err(e) => {
            sink.check(false, None, "evaluation", || e.to_string());
            return sink.out;
        }
    };
    let eval = match evaluate_profile(params, &field, profile, settings.d_ref) {
        Ok(e) => e,
        Err(e) => {
            sink.check(false, None, "evaluation", || e.to_string());
            return sink.out;
        }
    };

    for w in profile.nodes.windows(2) {
        let (a, b) = (&w[0].design, &w[1].design);
        sink.check(le(a.headway, b.headway), Some(w[1].x), "headway_order", || {
            format!("H={} after H={}", b.headway, a.headway)
        });
        sink.check(le(b.flow(), a.flow()), Some(w[1].x), "flow_order", || {
            format!("Q={} after Q={}", b.flow(), a.flow())
        });
    }
    let q0 = profile.nodes[0].design.flow();
    sink.check(le(q0, profile.global.q0) && le(profile.global.q0, q0), Some(0.0), "centre_flow", || {
        format!("Q(0)={q0} but Q0={}", profile.global.q0)
    });

    for (node, ne) in profile.nodes.iter().zip(&eval.nodes) {
        let x = Some(node.x);
        sink.check(le(ne.occupancy.radial, params.cap_mrt), x, "radial_capacity", || {
            format!("load {} > {}", ne.occupancy.radial, params.cap_mrt)
        });
        if let Some(o) = ne.occupancy.ring {
            sink.check(le(o, params.cap_mrt), x, "ring_capacity", || format!("load {o} > {}", params.cap_mrt));
        }
        let d = &node.design;
        match node.zone {
            Zone::Central => {
                sink.check(d.feeder == Feeder::None, x, "scheme_mode", || "feeder inside the central area".into());
                sink.check(d.ring_spacing.is_some() && d.ring_station_spacing.is_some(), x, "ring_design", || {
                    "central node without ring variables".into()
                });
            }
            Zone::Suburban => {
                let mode = d.feeder.mode();
                sink.check(spec.modes.contains(&mode), x, "scheme_mode", || {
                    format!("{mode} not allowed in {}", spec.scheme)
                });
                sink.check(d.feeder.strips() <= spec.max_strips, x, "scheme_strips", || {
                    format!("N_s={} above {}", d.feeder.strips(), spec.max_strips)
                });
            }
        }
        let l = d.theta_r * node.x / 2.0;
        match d.feeder {
            Feeder::Frf { d: stop, .. } => {
                sink.check(stop > 0.0 && stop < 2.0 * l, x, "stop_fits", || format!("d={stop} vs 2l={}", 2.0 * l));
            }
            Feeder::Drf { d0, .. } => {
                sink.check(d0 >= 0.0 && le(d0, l.min(d.s)), x, "walk_area", || {
                    format!("d0={d0} vs min(l, s)={}", l.min(d.s))
                });
            }
            Feeder::None => {}
        }
        if let Some(fe) = ne.feeder {
            let cap = if fe.mode == FeederMode::Frf { params.cap_frf } else { params.cap_drf };
            sink.check(le(fe.occupancy, cap), x, "feeder_capacity", || format!("load {} > {cap}", fe.occupancy));
        }
    }
    sink.check(le(eval.boundary_occupancy, params.cap_mrt), Some(profile.global.r), "boundary_capacity", || {
        format!("load {} > {}", eval.boundary_occupancy, params.cap_mrt)
    });

    let g = &profile.global;
    match profile.boundary_node().and_then(|n| n.design.ring_station_spacing) {
        Some(sc) => sink.check(le(g.phi_b * g.r, sc) && le(sc, g.phi_b * g.r), Some(g.r), "boundary_spacing", || {
            format!("φ_B·r={} but φ(r)·r={sc}", g.phi_b * g.r)
        }),
        None => sink.check(false, Some(g.r), "boundary_spacing", || "no central node at r".into()),
    }
    sink.out
}

/// Checks the pins and fleet caps tying `period` to `peak`.
pub fn validate_pins(
    params: &ScenarioParams<f64>,
    settings: &OptimizerSettings,
    spec: &SchemeSpec,
    peak: &PeriodResult,
    period: &PeriodResult,
) -> Vec<Violation> {
    let mut sink = Sink {
        period: &period.label,
        out: Vec::new(),
    };
    let (pp, tp) = (peak.profile(), period.profile());
    sink.check(pp.global.r == tp.global.r, None, "pin_r", || format!("r={} vs peak {}", tp.global.r, pp.global.r));
    sink.check(le(pp.global.h_b, tp.global.h_b), None, "fleet_boundary", || {
        format!("H_B={} below peak {}", tp.global.h_b, pp.global.h_b)
    });
    if pp.nodes.len() != tp.nodes.len() {
        sink.check(false, None, "pin_grid", || "node count differs from the peak".into());
        return sink.out;
    }
    let field_t = DemandField::new(params, &period.label);
    let field_p = DemandField::new(params, &peak.label);
    let (eval_t, eval_p) = match (field_t, field_p) {
        (Ok(ft), Ok(fp)) => (
            evaluate_profile(params, &ft, tp, settings.d_ref),
            evaluate_profile(params, &fp, pp, settings.d_ref),
        ),
        (Err(e), _) | (_, Err(e)) => {
            sink.check(false, None, "evaluation", || e.to_string());
            return sink.out;
        }
    };
    let (eval_t, eval_p) = match (eval_t, eval_p) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            sink.check(false, None, "evaluation", || e.to_string());
            return sink.out;
        }
    };

    for (i, (p, t)) in pp.nodes.iter().zip(&tp.nodes).enumerate() {
        let x = Some(t.x);
        if p.x != t.x || p.zone != t.zone {
            sink.check(false, x, "pin_grid", || "node position differs from the peak".into());
            continue;
        }
        let (dp, dt) = (&p.design, &t.design);
        sink.check(dp.theta_r == dt.theta_r, x, "pin_theta", || format!("{} vs peak {}", dt.theta_r, dp.theta_r));
        sink.check(dp.ring_spacing == dt.ring_spacing, x, "pin_ring_spacing", || {
            format!("{:?} vs peak {:?}", dt.ring_spacing, dp.ring_spacing)
        });
        sink.check(dp.ring_station_spacing == dt.ring_station_spacing, x, "pin_ring_stations", || {
            format!("{:?} vs peak {:?}", dt.ring_station_spacing, dp.ring_station_spacing)
        });
        let widen = spec.relaxed_periods() && t.zone == Zone::Suburban;
        if widen {
            sink.check(dt.s >= dp.s, x, "pin_station_spacing", || format!("s={} below peak {}", dt.s, dp.s));
        } else {
            sink.check(dt.s == dp.s, x, "pin_station_spacing", || format!("s={} vs peak {}", dt.s, dp.s));
        }
        match spec.scheme {
            Scheme::MrtOnly | Scheme::MrtFrf => {
                sink.check(dp.feeder.mode() == dt.feeder.mode(), x, "pin_mode", || {
                    format!("{} vs peak {}", dt.feeder.mode(), dp.feeder.mode())
                });
                sink.check(dp.feeder.strips() == dt.feeder.strips(), x, "pin_strips", || {
                    format!("N_s={} vs peak {}", dt.feeder.strips(), dp.feeder.strips())
                });
                sink.check(dp.feeder.stop_spacing() == dt.feeder.stop_spacing(), x, "pin_stop_spacing", || {
                    format!("{:?} vs peak {:?}", dt.feeder.stop_spacing(), dp.feeder.stop_spacing())
                });
            }
            Scheme::Adaptive => {
                if dp.feeder.mode() != FeederMode::None && dt.feeder.mode() != FeederMode::None {
                    sink.check(dp.feeder.strips() == dt.feeder.strips(), x, "pin_strips", || {
                        format!("N_s={} vs peak {}", dt.feeder.strips(), dp.feeder.strips())
                    });
                }
                if let (Some(a), Some(b)) = (dp.feeder.stop_spacing(), dt.feeder.stop_spacing()) {
                    sink.check(b >= a, x, "pin_stop_spacing", || format!("d={b} below peak {a}"));
                }
                if let (Some(a), Some(b)) = (dp.feeder.walk_extent(), dt.feeder.walk_extent()) {
                    sink.check(b >= a, x, "pin_walk_area", || format!("d0={b} below peak {a}"));
                }
            }
        }
        let (mp, mt) = (eval_p.nodes[i].mrt.m, eval_t.nodes[i].mrt.m);
        sink.check(le(mt, mp), x, "fleet_mrt", || format!("Y_M={mt} above peak {mp}"));
        let (fp, ft) = (eval_p.nodes[i].feeder_densities().m, eval_t.nodes[i].feeder_densities().m);
        sink.check(le(ft, fp), x, "fleet_feeder", || format!("y_M={ft} above peak {fp}"));
    }
    sink.out
}

/// All checks for every period of a scheme result.
pub fn validate_scheme(params: &ScenarioParams<f64>, settings: &OptimizerSettings, result: &SchemeResult) -> Vec<Violation> {
    let mut out = Vec::new();
    let peak = result.peak();
    for p in &result.periods {
        out.extend(validate_period(params, settings, &result.spec, p));
        if p.label != peak.label {
            out.extend(validate_pins(params, settings, &result.spec, peak, p));
        }
    }
    out
}
