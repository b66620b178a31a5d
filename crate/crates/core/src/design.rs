//! Decision variables: per-radius local designs, the global design and the radial profile.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Feeder service deployed at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeederMode {
    None,
    Frf,
    Drf,
}

impl FeederMode {
    pub fn label(self) -> &'static str {
        match self {
            FeederMode::None => "NONE",
            FeederMode::Frf => "FRF",
            FeederMode::Drf => "DRF",
        }
    }
}

impl fmt::Display for FeederMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FeederMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NONE" => Ok(FeederMode::None),
            "FRF" => Ok(FeederMode::Frf),
            "DRF" => Ok(FeederMode::Drf),
            other => Err(Error::InvalidInput(format!("unknown feeder mode `{other}`"))),
        }
    }
}

/// Central area (inside r, ring lines present) or suburbs (outside r, feeders possible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Zone {
    Central,
    Suburban,
}

impl Zone {
    pub fn of(x: f64, r: f64) -> Zone {
        if x < r {
            Zone::Central
        } else {
            Zone::Suburban
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Zone::Central => "central",
            Zone::Suburban => "suburban",
        }
    }
}

/// Feeder design at one radius. Only meaningful in the suburbs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feeder<T> {
    None,
    /// Fixed-route feeder with stop spacing `d`.
    Frf { d: T, h: T, n_s: u32 },
    /// Demand-responsive feeder whose walking area has half-extent `d0`.
    Drf { d0: T, h: T, n_s: u32 },
}

impl<T: Scalar> Feeder<T> {
    pub fn mode(&self) -> FeederMode {
        match self {
            Feeder::None => FeederMode::None,
            Feeder::Frf { .. } => FeederMode::Frf,
            Feeder::Drf { .. } => FeederMode::Drf,
        }
    }

    pub fn headway(&self) -> Option<T> {
        match *self {
            Feeder::None => None,
            Feeder::Frf { h, .. } | Feeder::Drf { h, .. } => Some(h),
        }
    }

    pub fn strips(&self) -> u32 {
        match *self {
            Feeder::None => 1,
            Feeder::Frf { n_s, .. } | Feeder::Drf { n_s, .. } => n_s,
        }
    }

    pub fn stop_spacing(&self) -> Option<T> {
        match *self {
            Feeder::Frf { d, .. } => Some(d),
            _ => None,
        }
    }

    pub fn walk_extent(&self) -> Option<T> {
        match *self {
            Feeder::Drf { d0, .. } => Some(d0),
            _ => None,
        }
    }
}

/// The local decision variables at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDesign<T> {
    /// Angular spacing between radial lines, rad.
    pub theta_r: T,
    /// Station spacing along radial lines, km.
    pub s: T,
    /// Spacing between ring lines, km (central area only).
    pub ring_spacing: Option<T>,
    /// Station spacing along ring lines φ·x, km (central area only).
    pub ring_station_spacing: Option<T>,
    /// MRT headway, h.
    pub headway: T,
    pub feeder: Feeder<T>,
}

impl<T: Scalar> LocalDesign<T> {
    /// Radial vehicle flow Q = 2π/(θ_r·H).
    pub fn flow(&self) -> T {
        T::two_pi() / (self.theta_r * self.headway)
    }

    /// Distance between adjacent radial lines at `x`, km.
    pub fn radial_line_spacing(&self, x: T) -> T {
        self.theta_r * x
    }

    /// Angular station spacing on the ring at `x`, rad; `None` outside the centre or at x = 0.
    pub fn phi(&self, x: T) -> Option<T> {
        match self.ring_station_spacing {
            Some(sc) if x > T::zero() => Some(sc / x),
            _ => None,
        }
    }

    pub fn cast<U: Scalar>(&self) -> LocalDesign<U> {
        let c = |v: T| U::of(v.to_f64_lossy());
        LocalDesign {
            theta_r: c(self.theta_r),
            s: c(self.s),
            ring_spacing: self.ring_spacing.map(c),
            ring_station_spacing: self.ring_station_spacing.map(c),
            headway: c(self.headway),
            feeder: match self.feeder {
                Feeder::None => Feeder::None,
                Feeder::Frf { d, h, n_s } => Feeder::Frf { d: c(d), h: c(h), n_s },
                Feeder::Drf { d0, h, n_s } => Feeder::Drf { d0: c(d0), h: c(h), n_s },
            },
        }
    }
}

/// Global decision variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalDesign<T> {
    /// Radius of the central area, km.
    pub r: T,
    /// Radial flow at the centre, veh/h.
    pub q0: T,
    /// Station angular spacing on the boundary ring, rad (equals φ at r).
    pub phi_b: T,
    /// Boundary-ring headway, h.
    pub h_b: T,
}

/// One node of the radial profile. The node at x = r appears twice, once per zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileNode<T> {
    pub x: T,
    pub zone: Zone,
    pub design: LocalDesign<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProfile<T> {
    pub nodes: Vec<ProfileNode<T>>,
    pub global: GlobalDesign<T>,
}

impl<T: Scalar> DesignProfile<T> {
    pub fn theta_r_min(&self) -> T {
        self.nodes
            .iter()
            .map(|n| n.design.theta_r)
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// The central-zone node at x = r, which sets φ_B.
    pub fn boundary_node(&self) -> Option<&ProfileNode<T>> {
        self.nodes
            .iter()
            .rev()
            .find(|n| n.zone == Zone::Central && n.x == self.global.r)
    }

    /// True if headways never shrink outward.
    pub fn headways_non_decreasing(&self, rel_tol: T) -> bool {
        self.nodes.windows(2).all(|w| {
            let (a, b) = (w[0].design.headway, w[1].design.headway);
            b >= a * (T::one() - rel_tol)
        })
    }

    /// True if the radial flow never grows outward.
    pub fn flows_non_increasing(&self, rel_tol: T) -> bool {
        self.nodes.windows(2).all(|w| {
            let (a, b) = (w[0].design.flow(), w[1].design.flow());
            b <= a * (T::one() + rel_tol)
        })
    }

    /// Nodes in one zone, in increasing x.
    pub fn zone_nodes(&self, zone: Zone) -> impl Iterator<Item = &ProfileNode<T>> {
        self.nodes.iter().filter(move |n| n.zone == zone)
    }
}

/// Profile abscissae: the scenario grid with `r` inserted and duplicated (central then suburban).
pub fn profile_grid<T: Scalar>(grid: &[T], r: T) -> Vec<(T, Zone)> {
    let tol = T::of(1e-9);
    let mut out = Vec::with_capacity(grid.len() + 2);
    for &x in grid.iter().filter(|&&x| x < r - tol) {
        out.push((x, Zone::Central));
    }
    out.push((r, Zone::Central));
    out.push((r, Zone::Suburban));
    for &x in grid.iter().filter(|&&x| x > r + tol) {
        out.push((x, Zone::Suburban));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_grid_duplicates_r() {
        let grid = crate::grid::radial_grid(3.0, 0.5);
        let g = profile_grid(&grid, 1.25);
        let xs: Vec<f64> = g.iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0, 1.25, 1.25, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(g[3].1, Zone::Central);
        assert_eq!(g[4].1, Zone::Suburban);
        let g = profile_grid(&grid, 1.5);
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn mode_round_trip() {
        for m in [FeederMode::None, FeederMode::Frf, FeederMode::Drf] {
            assert_eq!(m.label().parse::<FeederMode>().unwrap(), m);
        }
        assert!("bus".parse::<FeederMode>().is_err());
    }
}
