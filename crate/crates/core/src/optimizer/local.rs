//! The local subproblem at one radius: choose the MRT and feeder variables that
//! minimize the monetary cost density, subject to capacity, the centre-flow cap and,
//! off-peak, the pins and fleet caps inherited from the peak design.
//!
//! Continuous variables are searched in a unit cube that is mapped onto a nested
//! box: each variable's range is computed from those decoded before it, so every
//! point of the cube is capacity-feasible by construction. The order is θ_r, s, Q,
//! S_c, φ·x, then the feeder spacing and headway.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::search::minimize_unit_cube;
use super::{OptimizerSettings, Scheme, SchemeSpec};
use crate::cost::evaluate_node;
use crate::design::{Feeder, FeederMode, LocalDesign, ProfileNode, Zone};
use crate::error::{Error, Result};
use crate::feeder::{capacity_headway, drf_cycle, feeder_agency_densities, fmlm_geometry, frf_cycle, FmlmGeometry};
use crate::mrt::{radial_load, ring_load};
use crate::scenario::{DemandField, ScenarioParams, Site};

/// Peak design at a node, with the feeder fleet it needs per km (y_M).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReference {
    pub design: LocalDesign<f64>,
    pub feeder_fleet: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalConstraints {
    /// Upper bound on the radial flow, veh/h.
    pub q_cap: f64,
    /// Exact flow required at the centre node.
    pub q_pin: Option<f64>,
    pub peak: Option<PeakReference>,
}

impl LocalConstraints {
    pub fn free() -> Self {
        Self {
            q_cap: f64::INFINITY,
            q_pin: None,
            peak: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSolution {
    pub design: LocalDesign<f64>,
    /// Objective density at the optimum, €/(h·km).
    pub cost: f64,
}

/// Shared inputs of every local subproblem in one period.
#[derive(Debug, Clone, Copy)]
pub struct LocalProblem<'a> {
    pub params: &'a ScenarioParams<f64>,
    pub field: &'a DemandField<f64>,
    pub spec: &'a SchemeSpec,
    pub settings: &'a OptimizerSettings,
    /// Whether capital terms enter the objective (true when dimensioning the peak).
    pub capital: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Combo {
    mode: FeederMode,
    n_s: u32,
}

/// Minimizes the cost density at `x` over every allowed (mode, N_s) combination.
pub fn solve_local(problem: &LocalProblem<'_>, x: f64, zone: Zone, c: &LocalConstraints) -> Result<LocalSolution> {
    problem.params.check_x(x)?;
    let site = problem.field.site(x);
    let combos = problem.combos(zone, c.peak.as_ref());
    let mut best: Option<LocalSolution> = None;
    for (k, combo) in combos.iter().enumerate() {
        let setup = Setup::new(problem, &site, zone, *combo, c);
        let dim = setup.dims();
        let mut rng = ChaCha8Rng::seed_from_u64(seed_for(problem.settings.seed, x, zone, k, c));
        let m = minimize_unit_cube(dim, |u| setup.objective(u), &problem.settings.pattern(), &mut rng);
        if !m.value.is_finite() {
            continue;
        }
        let design = setup.decode(&m.x).expect("finite objective implies a decodable point");
        // earlier combinations (simpler operations) win near-ties
        let wins = match &best {
            None => true,
            Some(b) => m.value < b.cost - 1e-9 * b.cost.abs(),
        };
        if wins {
            best = Some(LocalSolution { design, cost: m.value });
        }
    }
    best.ok_or_else(|| Error::infeasible(x, problem.diagnose(&site, zone, c)))
}

impl<'a> LocalProblem<'a> {
    fn combos(&self, zone: Zone, peak: Option<&PeakReference>) -> Vec<Combo> {
        let none = Combo {
            mode: FeederMode::None,
            n_s: 1,
        };
        if zone == Zone::Central {
            return vec![none];
        }
        match peak {
            None => {
                let mut out = Vec::new();
                for &mode in &self.spec.modes {
                    if mode == FeederMode::None {
                        out.push(none);
                    } else {
                        out.extend((1..=self.spec.max_strips).map(|n_s| Combo { mode, n_s }));
                    }
                }
                out
            }
            Some(p) => {
                let pm = p.design.feeder.mode();
                let n_s = p.design.feeder.strips();
                match (self.spec.scheme, pm) {
                    (_, FeederMode::None) | (Scheme::MrtOnly, _) => vec![none],
                    (Scheme::MrtFrf, mode) => vec![Combo { mode, n_s }],
                    (Scheme::Adaptive, _) => self
                        .spec
                        .modes
                        .iter()
                        .map(|&mode| Combo {
                            mode,
                            n_s: if mode == FeederMode::None { 1 } else { n_s },
                        })
                        .collect(),
                }
            }
        }
    }

    /// Cost density of a given design, with the same objective as the solver.
    pub fn node_cost(&self, x: f64, zone: Zone, design: &LocalDesign<f64>) -> Result<f64> {
        let node = ProfileNode { x, zone, design: *design };
        let eval = evaluate_node(self.params, self.field, &node, self.settings.d_ref)?;
        Ok(eval.cost_density(&self.params.costs, self.capital))
    }

    fn diagnose(&self, site: &Site<'_, f64>, zone: Zone, c: &LocalConstraints) -> String {
        let q_req = radial_load(site, zone) / self.params.cap_mrt;
        let fleet = c.peak.map_or(f64::INFINITY, |p| p.design.flow());
        if let Some(q0) = c.q_pin {
            if q_req > q0 {
                return format!("radial capacity needs Q >= {q_req:.2} veh/h but Q0 = {q0:.2}");
            }
        }
        if q_req > c.q_cap {
            return format!("radial capacity needs Q >= {q_req:.2} veh/h above the Q0 cap {:.2}", c.q_cap);
        }
        if q_req > fleet {
            return format!("radial capacity needs Q >= {q_req:.2} veh/h above the peak flow {fleet:.2}");
        }
        "no design within the variable bounds meets capacity and the peak pins".to_string()
    }
}

fn seed_for(base: u64, x: f64, zone: Zone, combo: usize, c: &LocalConstraints) -> u64 {
    let mut h = base ^ 0x9e37_79b9_7f4a_7c15;
    for v in [
        x.to_bits(),
        zone as u64,
        combo as u64,
        c.q_cap.to_bits(),
        c.q_pin.map_or(1, f64::to_bits),
    ] {
        h = splitmix(h ^ v);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps `t ∈ [0, 1]` onto `[lo, hi]`, geometrically when the range is positive.
#[inline]
fn map_unit(t: f64, lo: f64, hi: f64) -> f64 {
    if lo > 0.0 && hi > lo {
        (lo * (hi / lo).powf(t)).clamp(lo, hi)
    } else {
        lo + (hi - lo) * t
    }
}

/// One (mode, N_s) subproblem at one node.
struct Setup<'p, 'a> {
    prob: &'p LocalProblem<'a>,
    site: &'p Site<'a, f64>,
    x: f64,
    zone: Zone,
    combo: Combo,
    c: &'p LocalConstraints,
    q_req: f64,
    ring_load: f64,
    /// Off-peak suburban station spacing may widen.
    relax_s: bool,
    /// Off-peak MRT_FRF keeps the peak stop spacing.
    pin_spacing: bool,
}

impl<'p, 'a> Setup<'p, 'a> {
    fn new(prob: &'p LocalProblem<'a>, site: &'p Site<'a, f64>, zone: Zone, combo: Combo, c: &'p LocalConstraints) -> Self {
        let pinned = c.peak.is_some();
        Self {
            prob,
            site,
            x: site.x,
            zone,
            combo,
            c,
            q_req: radial_load(site, zone) / prob.params.cap_mrt,
            ring_load: if zone == Zone::Central { ring_load(site) } else { 0.0 },
            relax_s: pinned && prob.spec.relaxed_periods() && zone == Zone::Suburban,
            pin_spacing: pinned && prob.spec.scheme == Scheme::MrtFrf,
        }
    }

    fn has_rings(&self) -> bool {
        self.zone == Zone::Central && self.x > 0.0
    }

    fn dims(&self) -> usize {
        let pinned = self.c.peak.is_some();
        let mut d = 0;
        if !pinned {
            d += 1; // θ_r
        }
        if !pinned || self.relax_s {
            d += 1; // s
        }
        if self.c.q_pin.is_none() {
            d += 1; // Q
        }
        if self.has_rings() && !pinned {
            d += 2; // S_c, φ·x
        }
        if self.combo.mode != FeederMode::None {
            if !self.pin_spacing {
                d += 1;
            }
            d += 1; // h
        }
        d
    }

    fn objective(&self, u: &[f64]) -> f64 {
        match self.decode(u) {
            Some(design) => self.prob.node_cost(self.x, self.zone, &design).unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        }
    }

    fn decode(&self, u: &[f64]) -> Option<LocalDesign<f64>> {
        let b = &self.prob.settings.bounds;
        let p = self.prob.params;
        let peak = self.c.peak.map(|r| r.design);
        let mut coords = u.iter().copied();
        let mut pick = |lo: f64, hi: f64| -> Option<f64> {
            let t = coords.next().expect("dimension count matches decode");
            (hi >= lo).then(|| map_unit(t, lo, hi))
        };

        let a = TAU / b.headway[1];
        let c_hi = TAU / b.headway[0];
        let s_ring_lo = match peak.and_then(|d| d.ring_spacing) {
            Some(sc) => sc,
            None => b.ring_spacing[0],
        };
        let b_ring = self.ring_load * s_ring_lo / p.cap_mrt;
        let q_fleet = peak.map_or(f64::INFINITY, |d| d.flow());
        let q_cap = self.c.q_cap.min(q_fleet);

        let theta = match peak {
            Some(d) => d.theta_r,
            None => {
                let (lo, hi) = match self.c.q_pin {
                    Some(q0) => (b.theta_r[0].max(a / q0).max(b_ring / q0), b.theta_r[1].min(c_hi / q0)),
                    None => (
                        b.theta_r[0].max(a / q_cap).max(b_ring / q_cap),
                        b.theta_r[1].min(c_hi / self.q_req),
                    ),
                };
                pick(lo, hi)?
            }
        };
        let s = match peak {
            Some(d) if self.relax_s => pick(d.s.max(b.station_spacing[0]), b.station_spacing[1])?,
            Some(d) => d.s,
            None => pick(b.station_spacing[0], b.station_spacing[1])?,
        };
        let q_lo = self.q_req.max(a / theta).max(b_ring / theta);
        let q_hi = q_cap.min(c_hi / theta);
        let q = match self.c.q_pin {
            Some(q0) => {
                let slack = 1e-12 * q0;
                if q0 < q_lo - slack || q0 > q_hi + slack {
                    return None;
                }
                q0
            }
            None => pick(q_lo, q_hi)?,
        };
        let headway = TAU / (theta * q);

        let (ring_spacing, ring_station_spacing) = if self.zone == Zone::Central {
            match peak {
                Some(d) => (d.ring_spacing, d.ring_station_spacing),
                None if self.has_rings() => {
                    let cap = if self.ring_load > 0.0 {
                        TAU * p.cap_mrt / (self.ring_load * headway)
                    } else {
                        f64::INFINITY
                    };
                    let sc = pick(b.ring_spacing[0], b.ring_spacing[1].min(cap))?;
                    let phi_x = pick(b.ring_station_spacing[0], b.ring_station_spacing[1])?;
                    (Some(sc), Some(phi_x))
                }
                // no ring passes through the centre; any admissible value prices the same
                None => (Some(b.ring_spacing[0]), Some(b.ring_station_spacing[0])),
            }
        } else {
            (None, None)
        };

        let feeder = match self.combo.mode {
            FeederMode::None => Feeder::None,
            mode => {
                let geom = fmlm_geometry(self.x, theta, s, self.combo.n_s).ok()?;
                let peak_feeder = peak.map(|d| d.feeder);
                let spacing = match mode {
                    FeederMode::Frf => {
                        let hi = b.stop_spacing[1].min(2.0 * geom.l * (1.0 - 1e-9));
                        match peak_feeder {
                            Some(Feeder::Frf { d, .. }) if self.pin_spacing => (d < 2.0 * geom.l).then_some(d)?,
                            Some(Feeder::Frf { d, .. }) => pick(b.stop_spacing[0].max(d), hi)?,
                            _ => pick(b.stop_spacing[0], hi)?,
                        }
                    }
                    _ => {
                        let hi = geom.l.min(s);
                        match peak_feeder {
                            Some(Feeder::Drf { d0, .. }) if self.pin_spacing => (d0 <= hi).then_some(d0)?,
                            Some(Feeder::Drf { d0, .. }) => pick(d0, hi)?,
                            _ => pick(0.0, hi)?,
                        }
                    }
                };
                let (p_walk, cap) = match mode {
                    FeederMode::Frf => (spacing / (2.0 * geom.l), p.cap_frf),
                    _ => (spacing * spacing / (geom.l * s), p.cap_drf),
                };
                let h_cap = capacity_headway(&geom, p_walk, self.site.rho, cap);
                let h_fleet = match self.c.peak {
                    Some(r) => self.fleet_headway(mode, &geom, spacing, r.feeder_fleet)?,
                    None => 0.0,
                };
                let h = pick(b.feeder_headway[0].max(h_fleet), b.feeder_headway[1].min(h_cap))?;
                match mode {
                    FeederMode::Frf => Feeder::Frf {
                        d: spacing,
                        h,
                        n_s: self.combo.n_s,
                    },
                    _ => Feeder::Drf {
                        d0: spacing,
                        h,
                        n_s: self.combo.n_s,
                    },
                }
            }
        };

        Some(LocalDesign {
            theta_r: theta,
            s,
            ring_spacing,
            ring_station_spacing,
            headway,
            feeder,
        })
    }

    /// Fleet per km of a feeder running at headway `h`.
    fn fleet(&self, mode: FeederMode, geom: &FmlmGeometry<f64>, spacing: f64, h: f64) -> Option<f64> {
        let rho = self.site.rho;
        let p = self.prob.params;
        let cycle = match mode {
            FeederMode::Frf => frf_cycle(geom, spacing, h, rho, p).ok()?,
            _ => drf_cycle(geom, spacing, h, rho, p).ok()?,
        };
        Some(feeder_agency_densities(geom, &cycle, 0.0, h).m)
    }

    /// Smallest headway keeping the fleet within the peak fleet; the fleet falls with h.
    fn fleet_headway(&self, mode: FeederMode, geom: &FmlmGeometry<f64>, spacing: f64, limit: f64) -> Option<f64> {
        let [h_lo, h_hi] = self.prob.settings.bounds.feeder_headway;
        let within = |h: f64| self.fleet(mode, geom, spacing, h).map(|m| m <= limit);
        if within(h_lo)? {
            return Some(h_lo);
        }
        if !within(h_hi)? {
            return None;
        }
        let (mut lo, mut hi) = (h_lo.ln(), h_hi.ln());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if within(mid.exp())? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi.exp())
    }
}
