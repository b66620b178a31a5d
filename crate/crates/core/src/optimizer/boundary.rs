//! The boundary-ring headway: a one-variable problem once r, φ_B and the local
//! profile are fixed.

use super::search::golden_section;
use crate::error::{Error, Result};
use crate::mrt::{boundary_occupancy, boundary_speed, mrt_global_agency, mrt_global_user};
use crate::scenario::{DemandField, ScenarioParams};

#[derive(Debug, Clone, Copy)]
pub struct BoundaryProblem<'a> {
    pub params: &'a ScenarioParams<f64>,
    pub field: &'a DemandField<f64>,
    pub r: f64,
    pub phi_b: f64,
    /// Smallest θ_r of the profile (enters the transfer count).
    pub theta_min: f64,
    /// Whether the fleet term is part of the objective.
    pub capital: bool,
    /// Admissible headway range, h.
    pub bounds: [f64; 2],
}

impl BoundaryProblem<'_> {
    /// Hourly global MRT cost at boundary headway `h_b`.
    pub fn cost(&self, h_b: f64) -> Result<f64> {
        let mu = &self.params.costs;
        let v_cb = boundary_speed(self.phi_b, self.r, self.params)?;
        let ag = mrt_global_agency(self.r, h_b, v_cb);
        let us = mrt_global_user(self.field, self.r, h_b, v_cb, self.theta_min);
        let mut z = mu.mu_v_mrt * ag.f_v
            + mu.mu_a * self.params.delta_a * self.field.total() * us.f_a
            + mu.mu_w * us.f_w
            + mu.mu_t * us.f_t;
        if self.capital {
            z += mu.mu_m_mrt * ag.f_m;
        }
        Ok(z)
    }
}

/// Largest boundary headway the MRT vehicle capacity allows.
pub fn boundary_capacity_headway(params: &ScenarioParams<f64>, field: &DemandField<f64>, r: f64) -> f64 {
    let per_hour = boundary_occupancy(field, r, 1.0);
    if per_hour > 0.0 {
        params.cap_mrt / per_hour
    } else {
        f64::INFINITY
    }
}

/// Minimizes the global MRT cost over the boundary headway by golden-section search in log H_B.
pub fn solve_boundary_headway(problem: &BoundaryProblem<'_>) -> Result<f64> {
    let hi = problem.bounds[1].min(boundary_capacity_headway(problem.params, problem.field, problem.r));
    let lo = problem.bounds[0];
    if hi < lo {
        return Err(Error::infeasible(
            problem.r,
            format!("boundary ring capacity needs H_B <= {hi:.5} h below the lower bound {lo:.5} h"),
        ));
    }
    // validates φ_B once, so the closure below cannot fail
    problem.cost(lo)?;
    let f = |t: f64| problem.cost(t.exp()).unwrap_or(f64::INFINITY);
    let (t, _) = golden_section(lo.ln(), hi.ln(), f, 1e-12);
    Ok(t.exp().clamp(lo, hi))
}
