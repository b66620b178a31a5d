//! Monetary cost assembly: integrates local densities along the radius, adds the
//! boundary-ring terms, and rolls hourly costs up into daily totals and gains.

use serde::Serialize;

use crate::design::{DesignProfile, Feeder, FeederMode, ProfileNode, Zone};
use crate::error::{Error, Result};
use crate::feeder::{
    drf_cycle, feeder_agency_densities, feeder_occupancy, feeder_user_densities, fmlm_geometry, frf_cycle,
    frf_cycle_length, FeederCycle, FeederDensities,
};
use crate::grid::trapezoid;
use crate::mrt::{
    boundary_occupancy, boundary_speed, mrt_agency_densities, mrt_global_agency, mrt_global_user, mrt_occupancy,
    mrt_user_densities, GlobalAgency, GlobalUser, MrtDensities, Occupancy,
};
use crate::scalar::Scalar;
use crate::scenario::{CostCoefficients, DemandField, ScenarioParams};

/// The seven cost components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Component {
    L,
    ST,
    V,
    M,
    A,
    W,
    T,
}

impl Component {
    pub const ALL: [Component; 7] = [
        Component::L,
        Component::ST,
        Component::V,
        Component::M,
        Component::A,
        Component::W,
        Component::T,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Component::L => "L",
            Component::ST => "ST",
            Component::V => "V",
            Component::M => "M",
            Component::A => "A",
            Component::W => "W",
            Component::T => "T",
        }
    }
}

/// Hourly cost of one component, €/h.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ComponentCost<T> {
    pub mrt_local: T,
    pub mrt_global: T,
    pub fmlm_local: T,
}

impl<T: Scalar> ComponentCost<T> {
    pub fn total(&self) -> T {
        self.mrt_local + self.mrt_global + self.fmlm_local
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown<T> {
    pub l: ComponentCost<T>,
    pub st: ComponentCost<T>,
    pub v: ComponentCost<T>,
    pub m: ComponentCost<T>,
    /// Includes the transfer penalty as its global part.
    pub a: ComponentCost<T>,
    pub w: ComponentCost<T>,
    pub t: ComponentCost<T>,
}

impl<T: Scalar> CostBreakdown<T> {
    pub fn get(&self, c: Component) -> &ComponentCost<T> {
        match c {
            Component::L => &self.l,
            Component::ST => &self.st,
            Component::V => &self.v,
            Component::M => &self.m,
            Component::A => &self.a,
            Component::W => &self.w,
            Component::T => &self.t,
        }
    }

    pub fn z_user(&self) -> T {
        self.a.total() + self.w.total() + self.t.total()
    }

    pub fn z_cap(&self) -> T {
        self.l.total() + self.st.total() + self.m.total()
    }

    pub fn z_op(&self) -> T {
        self.v.total()
    }

    pub fn z_agency(&self) -> T {
        self.z_cap() + self.z_op()
    }

    pub fn z_total(&self) -> T {
        self.z_user() + self.z_cap() + self.z_op()
    }

    /// Replaces the capital components with those of `peak`.
    pub fn with_capital_of(mut self, peak: &CostBreakdown<T>) -> Self {
        self.l = peak.l;
        self.st = peak.st;
        self.m = peak.m;
        self
    }
}

/// Feeder evaluation at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeederEval<T> {
    pub mode: FeederMode,
    pub cycle: FeederCycle<T>,
    pub densities: FeederDensities<T>,
    pub occupancy: T,
}

/// Every density at one profile node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEval<T> {
    pub x: T,
    pub zone: Zone,
    pub mrt: MrtDensities<T>,
    pub occupancy: Occupancy<T>,
    pub feeder: Option<FeederEval<T>>,
}

impl<T: Scalar> NodeEval<T> {
    pub fn feeder_densities(&self) -> FeederDensities<T> {
        self.feeder.map(|f| f.densities).unwrap_or_default()
    }

    /// Access time (walk, waits and feeder ride) in pax·h per hour per km.
    pub fn access_time(&self) -> T {
        let f = self.feeder_densities();
        self.mrt.a + self.mrt.w + f.a + f.w + f.t
    }

    /// Monetary density, €/(h·km). Capital terms are skipped when `capital` is false.
    pub fn cost_density(&self, mu: &CostCoefficients<T>, capital: bool) -> T {
        let f = self.feeder_densities();
        let (mu_l, mu_st) = zone_infrastructure(mu, self.zone);
        let mut z = mu.mu_v_mrt * self.mrt.v
            + mu.mu_v_feeder * f.v
            + mu.mu_a * (self.mrt.a + f.a)
            + mu.mu_w * (self.mrt.w + f.w)
            + mu.mu_t * (self.mrt.t + f.t);
        if capital {
            z = z + mu_l * self.mrt.l
                + mu_st * self.mrt.st
                + mu.mu_m_mrt * self.mrt.m
                + mu.mu_l_feeder * f.l
                + mu.mu_m_feeder * f.m;
        }
        z
    }
}

/// Line and station coefficients of the zone.
#[inline]
pub fn zone_infrastructure<T: Scalar>(mu: &CostCoefficients<T>, zone: Zone) -> (T, T) {
    match zone {
        Zone::Central => (mu.mu_l_mrt_central, mu.mu_st_central),
        Zone::Suburban => (mu.mu_l_mrt_suburban, mu.mu_st_suburban),
    }
}

/// Densities of one node. `d_ref` sizes feeder roads where a DRF runs.
pub fn evaluate_node<T: Scalar>(
    params: &ScenarioParams<T>,
    field: &DemandField<T>,
    node: &ProfileNode<T>,
    d_ref: T,
) -> Result<NodeEval<T>> {
    let site = field.site(node.x);
    let d = &node.design;
    let active = node.zone == Zone::Suburban && d.feeder.mode() != FeederMode::None;
    let agency = mrt_agency_densities(node.x, node.zone, d, params)?;
    let user = mrt_user_densities(&site, node.zone, d, params, active)?;
    let mrt = MrtDensities {
        a: user.a,
        w: user.w,
        t: user.t,
        ..agency
    };
    let feeder = if active {
        let n_s = d.feeder.strips();
        let geom = fmlm_geometry(node.x, d.theta_r, d.s, n_s)?;
        let (mode, cycle, spacing, h, cl_frf) = match d.feeder {
            Feeder::Frf { d: stop, h, .. } => {
                let c = frf_cycle(&geom, stop, h, site.rho, params)?;
                (FeederMode::Frf, c, stop, h, c.cl)
            }
            Feeder::Drf { d0, h, .. } => {
                let c = drf_cycle(&geom, d0, h, site.rho, params)?;
                let cl_frf = frf_cycle_length(geom.l, geom.delta_l, d_ref.min(geom.l));
                (FeederMode::Drf, c, d0, h, cl_frf)
            }
            Feeder::None => unreachable!("feeder checked active"),
        };
        let ag = feeder_agency_densities(&geom, &cycle, cl_frf, h);
        let us = feeder_user_densities(mode, &geom, &cycle, spacing, h, site.n(), params)?;
        Some(FeederEval {
            mode,
            cycle,
            densities: FeederDensities {
                l: ag.l,
                v: ag.v,
                m: ag.m,
                a: us.a,
                w: us.w,
                t: us.t,
            },
            occupancy: feeder_occupancy(&geom, &cycle, site.rho, h),
        })
    } else {
        None
    };
    Ok(NodeEval {
        x: node.x,
        zone: node.zone,
        mrt,
        occupancy: mrt_occupancy(&site, node.zone, d),
        feeder,
    })
}

/// Full evaluation of a profile in one period.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEval<T> {
    pub nodes: Vec<NodeEval<T>>,
    pub v_cb: T,
    pub agency: GlobalAgency<T>,
    pub user: GlobalUser<T>,
    pub boundary_occupancy: T,
    pub breakdown: CostBreakdown<T>,
}

pub fn evaluate_profile<T: Scalar>(
    params: &ScenarioParams<T>,
    field: &DemandField<T>,
    profile: &DesignProfile<T>,
    d_ref: T,
) -> Result<ProfileEval<T>> {
    let nodes = profile
        .nodes
        .iter()
        .map(|n| evaluate_node(params, field, n, d_ref))
        .collect::<Result<Vec<_>>>()?;
    let g = &profile.global;
    let v_cb = boundary_speed(g.phi_b, g.r, params)?;
    let agency = mrt_global_agency(g.r, g.h_b, v_cb);
    let user = mrt_global_user(field, g.r, g.h_b, v_cb, profile.theta_r_min());
    let breakdown = assemble(params, field, &nodes, &agency, &user);
    Ok(ProfileEval {
        nodes,
        v_cb,
        agency,
        user,
        boundary_occupancy: boundary_occupancy(field, g.r, g.h_b),
        breakdown,
    })
}

/// Hourly cost breakdown of a profile.
pub fn total_cost<T: Scalar>(
    params: &ScenarioParams<T>,
    field: &DemandField<T>,
    profile: &DesignProfile<T>,
    d_ref: T,
) -> Result<CostBreakdown<T>> {
    Ok(evaluate_profile(params, field, profile, d_ref)?.breakdown)
}

/// Hourly cost of a single component of a profile.
pub fn component_cost<T: Scalar>(
    params: &ScenarioParams<T>,
    field: &DemandField<T>,
    profile: &DesignProfile<T>,
    d_ref: T,
    component: Component,
) -> Result<ComponentCost<T>> {
    Ok(*total_cost(params, field, profile, d_ref)?.get(component))
}

fn assemble<T: Scalar>(
    params: &ScenarioParams<T>,
    field: &DemandField<T>,
    nodes: &[NodeEval<T>],
    agency: &GlobalAgency<T>,
    user: &GlobalUser<T>,
) -> CostBreakdown<T> {
    let mu = &params.costs;
    let xs: Vec<T> = nodes.iter().map(|n| n.x).collect();
    let integrate = |f: &dyn Fn(&NodeEval<T>) -> T| {
        let ys: Vec<T> = nodes.iter().map(f).collect();
        trapezoid(&xs, &ys)
    };
    let fd = |n: &NodeEval<T>| n.feeder_densities();
    CostBreakdown {
        l: ComponentCost {
            mrt_local: integrate(&|n| zone_infrastructure(mu, n.zone).0 * n.mrt.l),
            mrt_global: T::zero(),
            fmlm_local: mu.mu_l_feeder * integrate(&|n| fd(n).l),
        },
        st: ComponentCost {
            mrt_local: integrate(&|n| zone_infrastructure(mu, n.zone).1 * n.mrt.st),
            ..Default::default()
        },
        v: ComponentCost {
            mrt_local: mu.mu_v_mrt * integrate(&|n| n.mrt.v),
            mrt_global: mu.mu_v_mrt * agency.f_v,
            fmlm_local: mu.mu_v_feeder * integrate(&|n| fd(n).v),
        },
        m: ComponentCost {
            mrt_local: mu.mu_m_mrt * integrate(&|n| n.mrt.m),
            mrt_global: mu.mu_m_mrt * agency.f_m,
            fmlm_local: mu.mu_m_feeder * integrate(&|n| fd(n).m),
        },
        a: ComponentCost {
            mrt_local: mu.mu_a * integrate(&|n| n.mrt.a),
            mrt_global: mu.mu_a * params.delta_a * field.total() * user.f_a,
            fmlm_local: mu.mu_a * integrate(&|n| fd(n).a),
        },
        w: ComponentCost {
            mrt_local: mu.mu_w * integrate(&|n| n.mrt.w),
            mrt_global: mu.mu_w * user.f_w,
            fmlm_local: mu.mu_w * integrate(&|n| fd(n).w),
        },
        t: ComponentCost {
            mrt_local: mu.mu_t * integrate(&|n| n.mrt.t),
            mrt_global: mu.mu_t * user.f_t,
            fmlm_local: mu.mu_t * integrate(&|n| fd(n).t),
        },
    }
}

/// Hourly breakdown of one period, tagged with its hour count.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodCost<T> {
    pub label: String,
    pub hours: u32,
    pub breakdown: CostBreakdown<T>,
}

/// Daily cost with the capital cost frozen at its peak value. `periods[0]` must be the peak.
pub fn daily_cost<T: Scalar>(periods: &[PeriodCost<T>], params: &ScenarioParams<T>) -> Result<T> {
    let peak_label = &params.peak().label;
    let peak = periods
        .iter()
        .find(|p| &p.label == peak_label)
        .ok_or_else(|| Error::MissingPeriod(peak_label.clone()))?;
    for p in &params.periods {
        if !periods.iter().any(|q| q.label == p.label) {
            return Err(Error::MissingPeriod(p.label.clone()));
        }
    }
    let z_cap = peak.breakdown.z_cap();
    Ok(periods
        .iter()
        .map(|p| T::of(p.hours as f64) * (z_cap + p.breakdown.z_op() + p.breakdown.z_user()))
        .sum())
}

/// Relative saving (ref − alt)/ref.
pub fn gain<T: Scalar>(reference: T, alternative: T) -> Result<T> {
    if reference == T::zero() {
        return Err(Error::ZeroReference);
    }
    Ok((reference - alternative) / reference)
}

/// Mean access time per trip end over `[a, b]`, minutes.
pub fn zone_access_time<T: Scalar>(eval: &ProfileEval<T>, field: &DemandField<T>, a: T, b: T) -> T {
    let mut xs = Vec::new();
    let mut num = Vec::new();
    let mut den = Vec::new();
    for n in eval.nodes.iter().filter(|n| n.x >= a && n.x <= b) {
        xs.push(n.x);
        num.push(n.access_time());
        den.push(field.n(n.x));
    }
    if xs.len() < 2 {
        return T::zero();
    }
    let d = trapezoid(&xs, &den);
    if d > T::zero() {
        trapezoid(&xs, &num) / d * T::of(60.0)
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{profile_grid, GlobalDesign, LocalDesign};
    use crate::scenario::baseline;
    use approx::assert_relative_eq;

    /// A hand-built feasible-looking profile with feeders beyond r.
    fn sample_profile(p: &ScenarioParams<f64>, dx: f64, feeder: bool) -> DesignProfile<f64> {
        sample_profile_switching(p, dx, feeder, 20.0)
    }

    fn sample_profile_switching(p: &ScenarioParams<f64>, dx: f64, feeder: bool, drf_from: f64) -> DesignProfile<f64> {
        let grid = crate::grid::radial_grid(p.radius, dx);
        let r = 5.5;
        let nodes = profile_grid(&grid, r)
            .into_iter()
            .map(|(x, zone)| {
                let central = zone == Zone::Central;
                ProfileNode {
                    x,
                    zone,
                    design: LocalDesign {
                        theta_r: 0.35,
                        s: if central { 1.0 } else { 2.0 },
                        ring_spacing: central.then_some(1.5),
                        ring_station_spacing: central.then_some(1.2),
                        headway: 0.05 + 0.004 * x,
                        feeder: if !central && feeder {
                            if x > drf_from {
                                Feeder::Drf { d0: 0.3, h: 0.25, n_s: 2 }
                            } else {
                                Feeder::Frf { d: 0.5, h: 0.15, n_s: 1 }
                            }
                        } else {
                            Feeder::None
                        },
                    },
                }
            })
            .collect();
        DesignProfile {
            nodes,
            global: GlobalDesign { r, q0: 300.0, phi_b: 1.2 / r, h_b: 0.1 },
        }
    }

    #[test]
    fn rollups_are_sums_of_parts() {
        let p = baseline();
        let field = DemandField::new(&p, "peak").unwrap();
        let b = total_cost(&p, &field, &sample_profile(&p, 0.5, true), 0.1).unwrap();
        let sum: f64 = Component::ALL.iter().map(|c| b.get(*c).total()).sum();
        assert_relative_eq!(b.z_total(), sum, max_relative = 1e-12);
        assert_relative_eq!(b.z_cap(), b.l.total() + b.st.total() + b.m.total());
        assert_eq!(b.z_op(), b.v.total());
        assert_eq!(b.st.mrt_global, 0.0);
        for c in Component::ALL {
            let cc = b.get(c);
            assert!(cc.mrt_local >= 0.0 && cc.mrt_global >= 0.0 && cc.fmlm_local >= 0.0);
        }
    }

    #[test]
    fn mrt_only_profile_has_no_feeder_cost() {
        let p = baseline();
        let field = DemandField::new(&p, "peak").unwrap();
        let b = total_cost(&p, &field, &sample_profile(&p, 0.5, false), 0.1).unwrap();
        for c in Component::ALL {
            assert_eq!(b.get(c).fmlm_local, 0.0);
        }
    }

    #[test]
    fn doubling_coefficients_doubles_total() {
        let p = baseline();
        let field = DemandField::new(&p, "peak").unwrap();
        let prof = sample_profile(&p, 0.5, true);
        let base = total_cost(&p, &field, &prof, 0.1).unwrap().z_total();
        let mut q = p.clone();
        q.costs = q.costs.scaled(2.0);
        let twice = total_cost(&q, &field, &prof, 0.1).unwrap().z_total();
        assert_relative_eq!(twice, 2.0 * base, max_relative = 1e-12);
    }

    #[test]
    fn zero_demand_has_no_walking_cost() {
        let p = baseline();
        let field = DemandField::from_parts(0.0, p.gamma, p.radius, p.dx);
        let a = component_cost(&p, &field, &sample_profile(&p, 0.5, true), 0.1, Component::A).unwrap();
        assert_eq!(a.total(), 0.0);
    }

    #[test]
    fn constant_density_integrates_to_length() {
        let grid = crate::grid::radial_grid(25.0, 0.5);
        let ys = vec![3.0; grid.len()];
        assert_relative_eq!(2.0 * trapezoid(&grid, &ys), 2.0 * 3.0 * 25.0, max_relative = 1e-12);
    }

    #[test]
    fn finer_grid_changes_components_little() {
        let p = baseline();
        let coarse_field = DemandField::new(&p, "peak").unwrap();
        let fine_p = p.clone().with_dx(0.25).unwrap();
        let fine_field = DemandField::new(&fine_p, "peak").unwrap();
        // no mode switch: a jump inside a cell is first-order in dx
        let c = total_cost(&p, &coarse_field, &sample_profile_switching(&p, 0.5, true, 99.0), 0.1).unwrap();
        let f = total_cost(&fine_p, &fine_field, &sample_profile_switching(&p, 0.25, true, 99.0), 0.1).unwrap();
        for comp in Component::ALL {
            let (a, b) = (c.get(comp).total(), f.get(comp).total());
            assert!((a - b).abs() <= 0.01 * b.abs().max(1e-9), "{comp:?}: {a} vs {b}");
        }
    }

    #[test]
    fn demand_additivity_of_user_terms() {
        let p = baseline();
        let prof = sample_profile(&p, 0.5, false);
        let f1 = DemandField::from_parts(300.0, p.gamma, p.radius, p.dx);
        let f2 = DemandField::from_parts(500.0, p.gamma, p.radius, p.dx);
        let both = DemandField::from_parts(800.0, p.gamma, p.radius, p.dx);
        let (a, b, c) = (
            total_cost(&p, &f1, &prof, 0.1).unwrap(),
            total_cost(&p, &f2, &prof, 0.1).unwrap(),
            total_cost(&p, &both, &prof, 0.1).unwrap(),
        );
        assert_relative_eq!(c.z_user(), a.z_user() + b.z_user(), max_relative = 1e-9);
        assert_relative_eq!(c.z_cap(), a.z_cap(), max_relative = 1e-12);
        assert_relative_eq!(c.z_op(), a.z_op(), max_relative = 1e-12);
    }

    #[test]
    fn daily_cost_examples() {
        let p = baseline();
        let field = DemandField::new(&p, "peak").unwrap();
        let b = total_cost(&p, &field, &sample_profile(&p, 0.5, true), 0.1).unwrap();
        let periods: Vec<PeriodCost<f64>> = p
            .periods
            .iter()
            .map(|q| PeriodCost { label: q.label.clone(), hours: q.hours, breakdown: b })
            .collect();
        assert_relative_eq!(daily_cost(&periods, &p).unwrap(), 18.0 * b.z_total(), max_relative = 1e-12);
        let mut single = p.clone();
        single.periods.truncate(1);
        single.periods[0].hours = 18;
        let one = [PeriodCost { label: "peak".into(), hours: 18, breakdown: b }];
        assert_relative_eq!(daily_cost(&one, &single).unwrap(), 18.0 * b.z_total());
        assert!(matches!(daily_cost(&periods[1..], &p), Err(Error::MissingPeriod(_))));
    }

    #[test]
    fn gain_examples() {
        assert_eq!(gain(10.0, 10.0).unwrap(), 0.0);
        assert_relative_eq!(gain(1.0, 0.964).unwrap(), 0.036, max_relative = 1e-12);
        assert!(gain(-2.0, -1.0).unwrap() < 0.0 || gain(2.0, 2.5).unwrap() < 0.0);
        assert!(matches!(gain(0.0, 1.0), Err(Error::ZeroReference)));
    }

    #[test]
    fn access_time_is_finite_per_zone() {
        let p = baseline();
        let field = DemandField::new(&p, "off_peak").unwrap();
        let e = evaluate_profile(&p, &field, &sample_profile(&p, 0.5, true), 0.1).unwrap();
        for (a, b) in [(0.0, 6.0), (6.0, 15.0), (15.0, 25.0)] {
            let t = zone_access_time(&e, &field, a, b);
            assert!(t > 0.0 && t < 120.0, "{a}-{b}: {t}");
        }
    }
}
