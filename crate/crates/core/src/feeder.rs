//! First/last-mile feeders: sub-region geometry, fixed-route and demand-responsive
//! cycle models, their cost densities and the feeder capacity constraint.

use crate::design::FeederMode;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::ScenarioParams;

/// Below this passenger count the DRF detour share n/(n+1) is evaluated at the floor.
pub const DRF_MIN_LOAD: f64 = 0.05;

/// Rectangle approximating the catchment of one station on one side of a radial line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmlmGeometry<T> {
    /// Half-length along the ring direction, km.
    pub l: T,
    /// Width (station spacing), km.
    pub s: T,
    /// Strip width s/N_s, km.
    pub w: T,
    pub n_s: u32,
    /// Sub-regions per unit radius around the ring: 2π/(θ_r/2).
    pub sa: T,
    /// Extra vertical distance to reach a strip that does not face the station, km.
    pub delta_l: T,
}

pub fn fmlm_geometry<T: Scalar>(x: T, theta_r: T, s: T, n_s: u32) -> Result<FmlmGeometry<T>> {
    if !(x > T::zero()) || !(theta_r > T::zero()) || !(s > T::zero()) || n_s == 0 {
        return Err(Error::InvalidInput(format!(
            "feeder geometry needs x, theta_r, s > 0 and N_s >= 1 (got x={x}, theta_r={theta_r}, s={s}, N_s={n_s})"
        )));
    }
    let two = T::of(2.0);
    Ok(FmlmGeometry {
        l: theta_r * x / two,
        s,
        w: s / T::of(n_s as f64),
        n_s,
        sa: T::two_pi() / (theta_r / two),
        delta_l: if n_s > 1 { s * T::of(0.25) } else { T::zero() },
    })
}

/// Expected outcome of one feeder round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeederCycle<T> {
    /// Cycle length, km.
    pub cl: T,
    /// Cycle time, h.
    pub c: T,
    /// Passengers boarding or alighting per cycle.
    pub n: T,
    /// Share of the sub-region that walks straight to the station.
    pub p_walk: T,
    /// Mean walk to the feeder stop, km (zero for DRF).
    pub d_walk: T,
}

/// Passengers per cycle: both trip ends of the strip's demand, minus the walkers.
#[inline]
pub fn cycle_load<T: Scalar>(geom: &FmlmGeometry<T>, rho: T, h: T, p_walk: T) -> T {
    T::of(2.0) * rho * geom.w * geom.l * h * (T::one() - p_walk)
}

/// Back-and-forth route length with the first stop d/2 from the station.
#[inline]
pub fn frf_cycle_length<T: Scalar>(l: T, delta_l: T, d: T) -> T {
    T::of(2.0) * (l + delta_l - d * T::of(0.5))
}

/// Cruise time, stop dwells, per-passenger dwell and terminal time.
#[inline]
pub fn frf_cycle_time<T: Scalar>(cl: T, l: T, d: T, n: T, v: T, params: &ScenarioParams<T>) -> T {
    cl / v + params.tau_s_feeder * (T::of(2.0) * l / d - T::one()) + params.tau_p * n + params.tau_t
}

pub fn frf_cycle<T: Scalar>(geom: &FmlmGeometry<T>, d: T, h: T, rho: T, params: &ScenarioParams<T>) -> Result<FeederCycle<T>> {
    let limit = T::of(2.0) * geom.l;
    if !(d > T::zero()) {
        return Err(Error::InvalidInput("stop spacing must be positive".into()));
    }
    if d >= limit {
        return Err(Error::NoStopFits {
            d: d.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    check_headway(h)?;
    let p_walk = d / limit;
    let n = cycle_load(geom, rho, h, p_walk);
    let cl = frf_cycle_length(geom.l, geom.delta_l, d);
    Ok(FeederCycle {
        cl,
        c: frf_cycle_time(cl, geom.l, d, n, params.v_frf, params),
        n,
        p_walk,
        d_walk: (geom.s + d) * T::of(0.25),
    })
}

/// Expected sweep length for `n` requests in a `2l × w` strip, as printed (n = 0 gives w/2).
#[inline]
pub fn drf_cycle_length<T: Scalar>(l: T, w: T, n: T) -> T {
    T::of(2.0) * l * n / (n + T::one()) + n * w / T::of(3.0) + w * T::of(0.5)
}

/// [`drf_cycle_length`] with the detour share evaluated at no fewer than [`DRF_MIN_LOAD`] passengers.
#[inline]
pub fn drf_cycle_length_floored<T: Scalar>(l: T, w: T, n: T) -> T {
    let m = n.max(T::of(DRF_MIN_LOAD));
    T::of(2.0) * l * m / (m + T::one()) + n * w / T::of(3.0) + w * T::of(0.5)
}

#[inline]
pub fn drf_cycle_time<T: Scalar>(cl: T, n: T, v: T, params: &ScenarioParams<T>) -> T {
    cl / v + (params.tau_s_feeder + params.tau_p) * n + params.tau_t
}

pub fn drf_cycle<T: Scalar>(geom: &FmlmGeometry<T>, d0: T, h: T, rho: T, params: &ScenarioParams<T>) -> Result<FeederCycle<T>> {
    let cap = geom.l.min(geom.s);
    if !(d0 >= T::zero()) || d0 > cap {
        return Err(Error::InvalidInput(format!("walk-area extent d0 = {d0} outside [0, {cap}]")));
    }
    check_headway(h)?;
    let p_walk = d0 * d0 / (geom.l * geom.s);
    let n = cycle_load(geom, rho, h, p_walk);
    let cl = drf_cycle_length_floored(geom.l, geom.w, n);
    Ok(FeederCycle {
        cl,
        c: drf_cycle_time(cl, n, params.v_drf, params),
        n,
        p_walk,
        d_walk: T::zero(),
    })
}

fn check_headway<T: Scalar>(h: T) -> Result<()> {
    if h > T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("feeder headway must be positive (got {h})")))
    }
}

/// Feeder densities per km of radius.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeederDensities<T> {
    /// Road length, km/km.
    pub l: T,
    pub v: T,
    pub m: T,
    pub a: T,
    pub w: T,
    pub t: T,
}

/// Agency densities. `cl_frf` is the fixed-route cycle length that sizes the road
/// infrastructure whichever mode runs.
pub fn feeder_agency_densities<T: Scalar>(geom: &FmlmGeometry<T>, cycle: &FeederCycle<T>, cl_frf: T, h: T) -> FeederDensities<T> {
    let ns = T::of(geom.n_s as f64);
    let per = ns * geom.sa / geom.s;
    FeederDensities {
        l: per * cl_frf * T::of(0.5),
        v: per * cycle.cl / h,
        m: per * cycle.c / h,
        ..Default::default()
    }
}

/// User densities for `n_x = N(x)` trip ends per km at this radius.
///
/// `spacing` is the stop spacing d for FRF and the walking-area extent d0 for DRF.
pub fn feeder_user_densities<T: Scalar>(
    mode: FeederMode,
    geom: &FmlmGeometry<T>,
    cycle: &FeederCycle<T>,
    spacing: T,
    h: T,
    n_x: T,
    params: &ScenarioParams<T>,
) -> Result<FeederDensities<T>> {
    let riders = n_x * (T::one() - cycle.p_walk);
    let quarter = T::of(0.25);
    let (a, t) = match mode {
        FeederMode::Frf => (
            n_x * (geom.s + spacing) / (T::of(4.0) * params.v_walk),
            riders * (cycle.c * quarter + (geom.delta_l + spacing * T::of(0.5)) / params.v_frf),
        ),
        FeederMode::Drf => {
            let mut a = n_x * cycle.p_walk * (T::of(2.0) / T::of(3.0) * spacing) / params.v_walk;
            if params.legacy_drf_walk_divisor {
                a = a * quarter;
            }
            (a, riders * (cycle.c * quarter + geom.delta_l / params.v_drf))
        }
        FeederMode::None => return Err(Error::InvalidInput("no feeder deployed".into())),
    };
    Ok(FeederDensities {
        a,
        w: riders * h * T::of(0.5),
        t,
        ..Default::default()
    })
}

/// Directional load per feeder vehicle.
pub fn feeder_occupancy<T: Scalar>(geom: &FmlmGeometry<T>, cycle: &FeederCycle<T>, rho: T, h: T) -> T {
    rho * geom.w * geom.l * (T::one() - cycle.p_walk) * h
}

/// Largest headway the vehicle capacity allows.
pub fn capacity_headway<T: Scalar>(geom: &FmlmGeometry<T>, p_walk: T, rho: T, cap: T) -> T {
    let per_hour = rho * geom.w * geom.l * (T::one() - p_walk);
    if per_hour > T::zero() {
        cap / per_hour
    } else {
        T::infinity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::baseline;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn geom(l: f64, s: f64, n_s: u32) -> FmlmGeometry<f64> {
        // x chosen so that θ_r·x/2 = l with θ_r = π/8
        fmlm_geometry(2.0 * l / (PI / 8.0), PI / 8.0, s, n_s).unwrap()
    }

    #[test]
    fn geometry_examples() {
        let g = fmlm_geometry(10.0, 0.4, 1.0, 2).unwrap();
        assert_relative_eq!(g.l, 2.0, max_relative = 1e-12);
        assert_eq!((g.w, g.delta_l), (0.5, 0.25));
        let g1 = fmlm_geometry(10.0, 0.4, 1.0, 1).unwrap();
        assert_eq!(g1.delta_l, 0.0);
        for theta in [0.05, 0.4, 1.3] {
            let g = fmlm_geometry(3.0, theta, 1.0, 1).unwrap();
            assert_relative_eq!(g.sa * theta / 2.0, 2.0 * PI, max_relative = 1e-12);
        }
        assert!(fmlm_geometry(0.0, 0.4, 1.0, 1).is_err());
        assert!(fmlm_geometry(1.0, 0.4, 1.0, 0).is_err());
    }

    #[test]
    fn frf_examples() {
        let mut p = baseline();
        assert_relative_eq!(frf_cycle_length(2.0, 0.0, 0.5), 3.5);
        let g = geom(2.0, 1.0, 1);
        let c = frf_cycle(&g, 0.5, 0.1, 0.0, &p).unwrap();
        assert_relative_eq!(c.d_walk, 0.375);
        assert_eq!(c.n, 0.0);
        assert_relative_eq!(c.c, 3.5 / 25.0 + p.tau_s_feeder * 7.0 + p.tau_t, max_relative = 1e-12);
        p.tau_t = 0.0;
        assert_relative_eq!(frf_cycle_time(3.5, 2.0, 0.5, 5.0, 25.0, &p), 0.2011, epsilon = 1e-4);
        assert!(matches!(frf_cycle(&g, 4.0, 0.1, 1.0, &p), Err(Error::NoStopFits { .. })));
        assert!(frf_cycle(&g, 0.5, 0.0, 1.0, &p).is_err());
    }

    #[test]
    fn drf_examples() {
        let p = baseline();
        let g = geom(2.0, 1.0, 2);
        let c = drf_cycle(&g, 0.5, 0.1, 0.0, &p).unwrap();
        assert_relative_eq!(c.p_walk, 0.125, max_relative = 1e-12);
        assert_eq!(drf_cycle(&g, 0.0, 0.1, 10.0, &p).unwrap().p_walk, 0.0);
        assert_relative_eq!(drf_cycle_length(2.0, 0.5, 3.0), 3.75, max_relative = 1e-12);
        assert_eq!(drf_cycle_length(2.0, 0.5, 0.0), 0.25);
        assert!(drf_cycle(&g, 1.5, 0.1, 1.0, &p).is_err());
        // the floor only changes the near-empty regime
        assert_eq!(drf_cycle_length_floored(2.0, 0.5, 3.0), drf_cycle_length(2.0, 0.5, 3.0));
        assert!(drf_cycle_length_floored(2.0, 0.5, 0.0) > 0.25);
    }

    #[test]
    fn agency_examples() {
        let g = fmlm_geometry(10.0, PI / 8.0, 1.0, 1).unwrap();
        assert_relative_eq!(g.sa, 32.0, max_relative = 1e-12);
        let cyc = FeederCycle { cl: 3.5, c: 0.2, n: 3.0, p_walk: 0.1, d_walk: 0.3 };
        let a = feeder_agency_densities(&g, &cyc, 3.5, 0.2);
        assert_relative_eq!(a.l, 56.0, max_relative = 1e-12);
        assert_relative_eq!(a.m / a.v, cyc.c / cyc.cl, max_relative = 1e-12);
        let far = feeder_agency_densities(&g, &cyc, 3.5, 1e15);
        assert!(far.v < 1e-9 && far.m < 1e-9);
    }

    #[test]
    fn user_examples() {
        let p = baseline();
        let g = geom(2.0, 1.0, 1);
        let c = frf_cycle(&g, 0.5, 0.1, 50.0, &p).unwrap();
        let u = feeder_user_densities(FeederMode::Frf, &g, &c, 0.5, 0.1, 1.0, &p).unwrap();
        assert_relative_eq!(u.a, 0.375 / 4.5, max_relative = 1e-12);
        let zero = feeder_user_densities(FeederMode::Frf, &g, &c, 0.5, 0.1, 0.0, &p).unwrap();
        assert_eq!((zero.a, zero.w, zero.t), (0.0, 0.0, 0.0));
        let cd = drf_cycle(&g, 0.0, 0.1, 50.0, &p).unwrap();
        let ud = feeder_user_densities(FeederMode::Drf, &g, &cd, 0.0, 0.1, 1.0, &p).unwrap();
        assert_relative_eq!(ud.w, 0.05, max_relative = 1e-12);
        assert!(feeder_user_densities(FeederMode::None, &g, &cd, 0.0, 0.1, 1.0, &p).is_err());
    }

    #[test]
    fn legacy_walk_divisor_quarters_drf_walk() {
        let mut p = baseline();
        let g = geom(2.0, 1.0, 1);
        let c = drf_cycle(&g, 0.6, 0.1, 50.0, &p).unwrap();
        let plain = feeder_user_densities(FeederMode::Drf, &g, &c, 0.6, 0.1, 100.0, &p).unwrap();
        p.legacy_drf_walk_divisor = true;
        let legacy = feeder_user_densities(FeederMode::Drf, &g, &c, 0.6, 0.1, 100.0, &p).unwrap();
        assert_relative_eq!(legacy.a * 4.0, plain.a, max_relative = 1e-12);
        assert_relative_eq!(plain.a, 100.0 * c.p_walk * 0.4 / 4.5, max_relative = 1e-12);
    }

    #[test]
    fn occupancy_examples() {
        let g = geom(2.0, 1.0, 2);
        let cyc = FeederCycle { cl: 3.0, c: 0.2, n: 0.0, p_walk: 0.125, d_walk: 0.0 };
        assert_relative_eq!(feeder_occupancy(&g, &cyc, 10.0, 0.25), 2.1875, max_relative = 1e-12);
        assert_eq!(feeder_occupancy(&g, &cyc, 0.0, 0.25), 0.0);
        let p = baseline();
        let c = frf_cycle(&g, 0.4, 0.2, 37.0, &p).unwrap();
        assert_relative_eq!(feeder_occupancy(&g, &c, 37.0, 0.2), c.n / 2.0, max_relative = 1e-12);
        let hcap = capacity_headway(&g, c.p_walk, 37.0, 80.0);
        assert_relative_eq!(feeder_occupancy(&g, &c, 37.0, hcap), 80.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn drf_length_increasing_concave(l in 0.2f64..5.0, w in 0.1f64..3.0, n in 0.0f64..50.0, dn in 0.01f64..2.0) {
            let f = |n: f64| drf_cycle_length(l, w, n);
            prop_assert!(f(n + dn) > f(n));
            // concavity: midpoint above chord
            prop_assert!(f(n + dn / 2.0) >= (f(n) + f(n + dn)) / 2.0 - 1e-12);
            // asymptote
            let big = 1e7;
            prop_assert!(((2.0 * l + big * w / 3.0 + w / 2.0) - f(big)).abs() / f(big) < 1e-6);
        }

        #[test]
        fn cycle_times_increase_with_load(
            l in 0.3f64..4.0, s in 0.3f64..5.0, n_s in 1u32..5, frac in 0.05f64..0.95,
            rho in 0.0f64..500.0, h in 0.034f64..1.0, dr in 1.0f64..100.0,
        ) {
            let p = baseline();
            let g = geom(l, s, n_s);
            let d = frac * (2.0 * l).min(2.0);
            let a = frf_cycle(&g, d, h, rho, &p).unwrap();
            let b = frf_cycle(&g, d, h, rho + dr, &p).unwrap();
            prop_assert!(b.c > a.c);
            prop_assert!(a.c >= a.cl / p.v_frf + p.tau_t);
            prop_assert!((0.0..=1.0).contains(&a.p_walk));
            let d0 = frac * l.min(s);
            let a = drf_cycle(&g, d0, h, rho, &p).unwrap();
            let b = drf_cycle(&g, d0, h, rho + dr, &p).unwrap();
            prop_assert!(b.c > a.c);
            prop_assert!(a.c >= a.cl / p.v_drf + p.tau_t);
            prop_assert!((0.0..=1.0).contains(&a.p_walk));
        }
    }
}
