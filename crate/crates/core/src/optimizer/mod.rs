//! Bi-level design optimization: per-radius local subproblems, a scalar search on the
//! boundary-ring headway, and outer sweeps over the central radius `r` and the
//! centre flow `Q0`. The peak period is dimensioned first; every other period is
//! re-optimized with the infrastructure pinned to the peak design.

mod boundary;
mod local;
mod period;
mod repair;
pub mod search;
mod sweep;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::FeederMode;
use crate::error::{Error, Result};

pub use boundary::{boundary_capacity_headway, solve_boundary_headway, BoundaryProblem};
pub use local::{solve_local, LocalConstraints, LocalProblem, LocalSolution, PeakReference};
pub use period::{
    dimension_peak, evaluate_candidate, optimize_period, optimize_scheme, Candidate, PeriodResult, SchemeResult,
    SweepRecord,
};
pub use repair::{repair_monotonicity, RepairReport};
pub use sweep::{run_sweep, SweepOutcome, SweepPoint};
pub use validate::{validate_period, validate_pins, validate_scheme, Violation};

/// The three transit schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "MRT_ONLY")]
    MrtOnly,
    #[serde(rename = "MRT_FRF")]
    MrtFrf,
    #[serde(rename = "ADAPTIVE")]
    Adaptive,
}

impl Scheme {
    /// Schemes whose designs are all admissible here, simplest first.
    pub fn nested(self) -> &'static [Scheme] {
        match self {
            Scheme::MrtOnly => &[],
            Scheme::MrtFrf => &[Scheme::MrtOnly],
            Scheme::Adaptive => &[Scheme::MrtOnly, Scheme::MrtFrf],
        }
    }

    pub const ALL: [Scheme; 3] = [Scheme::MrtOnly, Scheme::MrtFrf, Scheme::Adaptive];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::MrtOnly => "MRT_ONLY",
            Scheme::MrtFrf => "MRT_FRF",
            Scheme::Adaptive => "ADAPTIVE",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "MRT_ONLY" | "MRTONLY" => Ok(Scheme::MrtOnly),
            "MRT_FRF" | "MRTFRF" => Ok(Scheme::MrtFrf),
            "ADAPTIVE" => Ok(Scheme::Adaptive),
            other => Err(Error::InvalidInput(format!(
                "unknown scheme `{other}` (expected MRT_ONLY, MRT_FRF or ADAPTIVE)"
            ))),
        }
    }
}

/// What a scheme may deploy, and how its off-peak designs relate to the peak one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    /// Feeder modes allowed beyond `r`, in tie-break order.
    pub modes: Vec<FeederMode>,
    pub max_strips: u32,
}

impl SchemeSpec {
    pub fn new(scheme: Scheme, max_strips: u32) -> Self {
        let modes = match scheme {
            Scheme::MrtOnly => vec![FeederMode::None],
            Scheme::MrtFrf => vec![FeederMode::None, FeederMode::Frf],
            Scheme::Adaptive => vec![FeederMode::None, FeederMode::Frf, FeederMode::Drf],
        };
        let max_strips = if scheme == Scheme::MrtOnly { 1 } else { max_strips.max(1) };
        Self {
            scheme,
            modes,
            max_strips,
        }
    }

    /// Off-peak periods may widen suburban station spacing and re-select the feeder mode.
    pub fn relaxed_periods(&self) -> bool {
        self.scheme == Scheme::Adaptive
    }
}

/// Box bounds on the continuous decision variables, `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariableBounds {
    /// Radial-line angular spacing, rad.
    pub theta_r: [f64; 2],
    /// Radial station spacing s, km.
    pub station_spacing: [f64; 2],
    /// Ring spacing S_c, km.
    pub ring_spacing: [f64; 2],
    /// Ring station spacing φ·x, km.
    pub ring_station_spacing: [f64; 2],
    /// MRT headway, h (also bounds the boundary ring).
    pub headway: [f64; 2],
    /// Feeder headway, h.
    pub feeder_headway: [f64; 2],
    /// FRF stop spacing d, km.
    pub stop_spacing: [f64; 2],
}

impl Default for VariableBounds {
    fn default() -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            theta_r: [tau / 120.0, std::f64::consts::FRAC_PI_2],
            station_spacing: [0.3, 5.0],
            ring_spacing: [0.3, 5.0],
            ring_station_spacing: [0.3, 5.0],
            headway: [1.0 / 30.0, 1.0],
            feeder_headway: [1.0 / 30.0, 1.0],
            stop_spacing: [0.1, 2.0],
        }
    }
}

impl VariableBounds {
    fn validate(&self) -> Result<()> {
        let check = |name: &str, b: [f64; 2]| {
            if b[0] > 0.0 && b[1] >= b[0] && b[1].is_finite() {
                Ok(())
            } else {
                Err(Error::param(&format!("optimizer.bounds.{name}"), "must satisfy 0 < lo <= hi"))
            }
        };
        check("theta_r", self.theta_r)?;
        check("station_spacing", self.station_spacing)?;
        check("ring_spacing", self.ring_spacing)?;
        check("ring_station_spacing", self.ring_station_spacing)?;
        check("headway", self.headway)?;
        check("feeder_headway", self.feeder_headway)?;
        check("stop_spacing", self.stop_spacing)
    }
}

/// Sweep, local-solver and bound settings; read from the `[optimizer]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub r_start: f64,
    pub r_step: f64,
    /// Largest r tried; defaults to R − dx.
    pub r_max: Option<f64>,
    pub q0_start: f64,
    /// Multiplicative Q0 step.
    pub q0_growth: f64,
    pub q0_max: f64,
    /// Stop once a cost exceeds the mean of this many previous feasible iterates.
    pub window: usize,
    pub multistart: usize,
    /// Smallest pattern step in the unit cube.
    pub tolerance: f64,
    pub max_evals: usize,
    pub max_strips: u32,
    /// Reference stop spacing sizing the roads a DRF needs, km.
    pub d_ref: f64,
    pub seed: u64,
    pub bounds: VariableBounds,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            r_start: 3.0,
            r_step: 0.5,
            r_max: None,
            q0_start: 100.0,
            q0_growth: 1.1,
            q0_max: 5000.0,
            window: 3,
            multistart: 6,
            tolerance: 1e-7,
            max_evals: 20_000,
            max_strips: 4,
            d_ref: 0.1,
            seed: 7,
            bounds: VariableBounds::default(),
        }
    }
}

impl OptimizerSettings {
    /// Reads the `[optimizer]` table of a scenario file; absent keys keep their defaults.
    pub fn from_config(source: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(source).map_err(|e| Error::Parse(e.to_string()))?;
        let settings = match table.get("optimizer") {
            Some(v) => v.clone().try_into::<Self>().map_err(|e| Error::Parse(format!("[optimizer]: {e}")))?,
            None => Self::default(),
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(&format!("optimizer.{name}"), "must be positive"))
            }
        };
        positive("r_start", self.r_start)?;
        positive("r_step", self.r_step)?;
        positive("q0_start", self.q0_start)?;
        positive("q0_max", self.q0_max)?;
        positive("tolerance", self.tolerance)?;
        positive("d_ref", self.d_ref)?;
        if let Some(r) = self.r_max {
            positive("r_max", r)?;
        }
        if !(self.q0_growth > 1.0 && self.q0_growth.is_finite()) {
            return Err(Error::param("optimizer.q0_growth", "must exceed 1"));
        }
        if self.window == 0 {
            return Err(Error::param("optimizer.window", "must be at least 1"));
        }
        if self.multistart == 0 || self.max_evals == 0 || self.max_strips == 0 {
            return Err(Error::param("optimizer", "multistart, max_evals and max_strips must be at least 1"));
        }
        self.bounds.validate()
    }

    pub fn pattern(&self) -> search::PatternSettings {
        search::PatternSettings {
            starts: self.multistart,
            initial_step: 0.25,
            min_step: self.tolerance,
            max_evals: self.max_evals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::BASELINE_CFG;

    #[test]
    fn settings_from_baseline_file() {
        let s = OptimizerSettings::from_config(BASELINE_CFG).unwrap();
        assert_eq!(s.r_start, 3.0);
        assert_eq!(s.r_step, 0.5);
        assert_eq!(s.q0_growth, 1.1);
        assert_eq!(s.window, 3);
        assert_eq!(s.bounds, VariableBounds::default());
    }

    #[test]
    fn settings_reject_bad_values() {
        let bad = "[optimizer]\nr_step = -1.0\n";
        assert!(matches!(OptimizerSettings::from_config(bad), Err(Error::InvalidParam { .. })));
        let bad = "[optimizer]\nwindow = 0\n";
        assert!(OptimizerSettings::from_config(bad).is_err());
        let bad = "[optimizer]\nunknown_key = 1\n";
        assert!(matches!(OptimizerSettings::from_config(bad), Err(Error::Parse(_))));
        assert_eq!(OptimizerSettings::from_config("").unwrap(), OptimizerSettings::default());
    }

    #[test]
    fn nested_schemes_are_admissible_subsets() {
        for outer in [Scheme::MrtOnly, Scheme::MrtFrf, Scheme::Adaptive] {
            let big = SchemeSpec::new(outer, 4);
            for &inner in outer.nested() {
                assert_ne!(inner, outer);
                let small = SchemeSpec::new(inner, 4);
                assert!(small.modes.iter().all(|m| big.modes.contains(m)));
                assert!(small.max_strips <= big.max_strips);
            }
        }
    }

    #[test]
    fn scheme_specs() {
        assert_eq!(SchemeSpec::new(Scheme::MrtOnly, 4).max_strips, 1);
        assert_eq!(SchemeSpec::new(Scheme::MrtOnly, 4).modes, vec![FeederMode::None]);
        assert!(SchemeSpec::new(Scheme::Adaptive, 4).modes.contains(&FeederMode::Drf));
        assert!(!SchemeSpec::new(Scheme::MrtFrf, 4).modes.contains(&FeederMode::Drf));
        for s in Scheme::ALL {
            assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("mrt-frf".parse::<Scheme>().unwrap(), Scheme::MrtFrf);
        assert!("bus".parse::<Scheme>().is_err());
    }
}
