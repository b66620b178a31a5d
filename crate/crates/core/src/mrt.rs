//! Trunk (MRT) quantities: radial flow, commercial speeds, occupancies and the
//! agency/user cost densities of the ring-radial network.

use crate::design::{LocalDesign, Zone};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{DemandField, ScenarioParams, Site};

/// Radial vehicle flow Q = (2π/θ_r)/H, veh/h.
pub fn radial_flow<T: Scalar>(theta_r: T, headway: T) -> Result<T> {
    if !(theta_r > T::zero()) || !(headway > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "radial flow needs theta_r > 0 and H > 0 (got {theta_r}, {headway})"
        )));
    }
    Ok(T::two_pi() / theta_r / headway)
}

/// Cruise speed reduced by one dwell of `tau` every `spacing` km.
#[inline]
pub fn commercial_speed<T: Scalar>(v: T, tau: T, spacing: T) -> T {
    T::one() / (T::one() / v + tau / spacing)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speeds<T> {
    /// Along radial lines (stations every s).
    pub v_cr: T,
    /// Along ring lines (stations every φ·x); `None` outside the centre.
    pub v_cc: Option<T>,
}

/// Commercial speeds on radial and ring lines.
///
/// ```
/// let p = atc_core::scenario::baseline();
/// let v = atc_core::mrt::commercial_speeds(1.0, Some(1.0), &p).unwrap();
/// assert!((v.v_cr - 34.2857).abs() < 1e-3);
/// assert_eq!(Some(v.v_cr), v.v_cc);
/// ```
pub fn commercial_speeds<T: Scalar>(
    s: T,
    ring_station_spacing: Option<T>,
    params: &ScenarioParams<T>,
) -> Result<Speeds<T>> {
    if !(s > T::zero()) {
        return Err(Error::InvalidInput("station spacing must be positive".into()));
    }
    let v_cc = match ring_station_spacing {
        Some(sc) if !(sc > T::zero()) => {
            return Err(Error::InvalidInput("ring station spacing must be positive".into()))
        }
        Some(sc) => Some(commercial_speed(params.v_mrt, params.tau_s_mrt, sc)),
        None => None,
    };
    Ok(Speeds {
        v_cr: commercial_speed(params.v_mrt, params.tau_s_mrt, s),
        v_cc,
    })
}

/// Commercial speed on the boundary ring, stations every φ_B·r.
pub fn boundary_speed<T: Scalar>(phi_b: T, r: T, params: &ScenarioParams<T>) -> Result<T> {
    let spacing = phi_b * r;
    if !(spacing > T::zero()) {
        return Err(Error::InvalidInput("boundary station spacing must be positive".into()));
    }
    Ok(commercial_speed(params.v_mrt, params.tau_s_mrt, spacing))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupancy<T> {
    /// Ring-line load, central area only.
    pub ring: Option<T>,
    pub radial: T,
}

impl<T: Scalar> Occupancy<T> {
    pub fn max(&self) -> T {
        self.ring.map_or(self.radial, |o| o.max(self.radial))
    }
}

/// Share of trips routed along rings: origin–destination angle below 2 rad.
#[inline]
fn ring_share<T: Scalar>() -> T {
    T::of(2.0) * T::FRAC_1_PI()
}

/// Radial load per unit θ_r·H/(2π); radial capacity depends on the design only through Q.
#[inline]
pub fn radial_load<T: Scalar>(site: &Site<'_, T>, zone: Zone) -> T {
    let k = ring_share::<T>();
    match zone {
        Zone::Central => site.total * (site.outer * site.inner * k + site.outer * (T::one() - k)),
        Zone::Suburban => site.total * site.outer,
    }
}

/// Ring load per unit S_c·H/(2π).
#[inline]
pub fn ring_load<T: Scalar>(site: &Site<'_, T>) -> T {
    site.dem * site.outer * ring_share::<T>()
}

/// Expected maximum on-board passengers on ring and radial vehicles at the site.
pub fn mrt_occupancy<T: Scalar>(site: &Site<'_, T>, zone: Zone, design: &LocalDesign<T>) -> Occupancy<T> {
    let per = design.headway / T::two_pi();
    let radial = radial_load(site, zone) * design.theta_r * per;
    let ring = match (zone, design.ring_spacing) {
        (Zone::Central, Some(sc)) => Some(ring_load(site) * sc * per),
        _ => None,
    };
    Occupancy { ring, radial }
}

/// Load on the boundary ring with headway `h_b`.
pub fn boundary_occupancy<T: Scalar>(field: &DemandField<T>, r: T, h_b: T) -> T {
    let a = field.between(r, field.radius());
    field.total() * a * a * ring_share::<T>() * (h_b * T::of(0.5)) / T::two_pi()
}

/// Local MRT densities per km of radius (before monetary weighting).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MrtDensities<T> {
    /// Line length, km/km.
    pub l: T,
    /// Stations per km.
    pub st: T,
    /// Vehicle-km per hour per km.
    pub v: T,
    /// Vehicles per km.
    pub m: T,
    /// Walking pax·h per hour per km.
    pub a: T,
    /// Waiting pax·h per hour per km.
    pub w: T,
    /// In-vehicle pax·h per hour per km.
    pub t: T,
}

/// Agency densities Y_L, Y_ST, Y_V, Y_M. Demand-independent.
pub fn mrt_agency_densities<T: Scalar>(
    x: T,
    zone: Zone,
    design: &LocalDesign<T>,
    params: &ScenarioParams<T>,
) -> Result<MrtDensities<T>> {
    let central = ring_terms(zone, design)?;
    let two_pi = T::two_pi();
    let radial_len = two_pi / design.theta_r;
    let speeds = commercial_speeds(design.s, central.map(|c| c.1), params)?;
    let h = design.headway;
    let mut out = MrtDensities {
        l: radial_len,
        st: radial_len / design.s,
        v: T::of(2.0) * radial_len / h,
        m: T::of(2.0) * radial_len / (h * speeds.v_cr),
        ..Default::default()
    };
    if let (Some((sc, scc)), Some(v_cc)) = (central, speeds.v_cc) {
        let ring_len = two_pi * x / sc;
        out.l = out.l + ring_len;
        out.st = out.st + ring_len / scc;
        out.v = out.v + T::of(2.0) * ring_len / h;
        out.m = out.m + T::of(2.0) * ring_len / (h * v_cc);
    }
    Ok(out)
}

fn ring_terms<T: Scalar>(zone: Zone, design: &LocalDesign<T>) -> Result<Option<(T, T)>> {
    match zone {
        Zone::Suburban => Ok(None),
        Zone::Central => match (design.ring_spacing, design.ring_station_spacing) {
            (Some(a), Some(b)) => Ok(Some((a, b))),
            _ => Err(Error::InvalidInput("central-area design needs ring spacings".into())),
        },
    }
}

/// User densities Y_A, Y_W, Y_T.
///
/// `feeder_active` removes the suburban walking term, which the feeder's own
/// access cost replaces.
pub fn mrt_user_densities<T: Scalar>(
    site: &Site<'_, T>,
    zone: Zone,
    design: &LocalDesign<T>,
    params: &ScenarioParams<T>,
    feeder_active: bool,
) -> Result<MrtDensities<T>> {
    let central = ring_terms(zone, design)?;
    let speeds = commercial_speeds(design.s, central.map(|c| c.1), params)?;
    Ok(user_terms(site, zone, design, central, &speeds, params.v_walk, feeder_active))
}

/// Shared by the optimizer's hot path: speeds already known.
pub(crate) fn user_terms<T: Scalar>(
    site: &Site<'_, T>,
    zone: Zone,
    design: &LocalDesign<T>,
    central: Option<(T, T)>,
    speeds: &Speeds<T>,
    v_walk: T,
    feeder_active: bool,
) -> MrtDensities<T> {
    let two = T::of(2.0);
    let quarter = T::of(0.25);
    let k = ring_share::<T>();
    let theta_share = design.theta_r * T::FRAC_1_PI();
    let x = site.x;
    let (inner, outer) = (site.inner, site.outer);
    let radial_walk = (design.theta_r * x + design.s) * quarter / v_walk;
    let half_h = design.headway * T::of(0.5);

    let mut out = MrtDensities::default();
    match (zone, central, speeds.v_cc) {
        (Zone::Central, Some((sc, scc)), Some(v_cc)) => {
            let ring_walk = (scc + sc) * quarter / v_walk;
            out.a = two * site.dem * (inner * radial_walk + outer * ring_walk);
            out.w = two * site.dem * (T::one() - inner * theta_share) * half_h;
            out.t = site.total * two * outer / speeds.v_cr * (T::one() - k)
                + site.total * two * outer * inner / speeds.v_cr * k
                + two * site.dem * outer * x / v_cc * k;
        }
        _ => {
            let band = site.band(design.s);
            if !feeder_active {
                out.a = two * site.dem * radial_walk;
            }
            out.w = two * site.dem * (T::one() - (inner + band) * theta_share) * half_h;
            let ride = site.total * two * outer / speeds.v_cr;
            out.t = ride * (T::one() - k) + ride * k
                - site.total * two * band * band / speeds.v_cr * theta_share
                - site.total * two * outer * inner / speeds.v_cr * theta_share;
        }
    }
    out.a = out.a.max(T::zero());
    out.w = out.w.max(T::zero());
    out.t = out.t.max(T::zero());
    out
}

/// Boundary-ring agency terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalAgency<T> {
    /// Vehicle-km per hour.
    pub f_v: T,
    /// Vehicles.
    pub f_m: T,
}

pub fn mrt_global_agency<T: Scalar>(r: T, h_b: T, v_cb: T) -> GlobalAgency<T> {
    let f_v = T::of(4.0) * T::PI() * r / h_b;
    GlobalAgency { f_v, f_m: f_v / v_cb }
}

/// Boundary-ring user terms and the expected transfer count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalUser<T> {
    /// Expected MRT-to-MRT transfers per trip.
    pub f_a: T,
    /// Waiting pax·h per hour on the boundary ring.
    pub f_w: T,
    /// In-vehicle pax·h per hour on the boundary ring.
    pub f_t: T,
}

pub fn mrt_global_user<T: Scalar>(field: &DemandField<T>, r: T, h_b: T, v_cb: T, theta_r_min: T) -> GlobalUser<T> {
    let a = field.between(r, field.radius());
    let share = (ring_share::<T>() - theta_r_min * T::FRAC_1_PI()).max(T::zero());
    let periphery = a * a * share;
    GlobalUser {
        f_a: T::one() + periphery,
        f_w: field.total() * periphery * h_b * T::of(0.5),
        f_t: field.total() * periphery * r / v_cb,
    }
}
