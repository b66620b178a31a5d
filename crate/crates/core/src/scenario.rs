//! Exogenous inputs of a transit-design run and the demand field derived from them.
//!
//! The configuration file is TOML with the sections `[geometry]`, `[demand]`,
//! `[periods]`, `[vehicles]`, `[costs]`, `[numerics]` and (optionally)
//! `[optimizer]`. Dwell times and the transfer penalty are written in seconds
//! in the file and held in hours in memory; every other quantity uses km, h,
//! € and passengers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{radial_grid, PrefixIntegral};
use crate::scalar::Scalar;

const SECONDS_PER_HOUR: f64 = 3600.0;

/// One demand level of the operating day.
#[derive(Debug, Clone, PartialEq)]
pub struct Period<T> {
    pub label: String,
    /// Demand density at the centre, trips/(km²·h).
    pub rho0: T,
    /// Number of one-hour slots at this level.
    pub hours: u32,
}

/// Monetary conversion coefficients. Fixed-route and demand-responsive feeders share one set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients<T> {
    /// Value of walking time, €/h.
    pub mu_a: T,
    /// Value of waiting time, €/h.
    pub mu_w: T,
    /// Value of in-vehicle time, €/h.
    pub mu_t: T,
    /// MRT line cost inside the central area, €/(km·h).
    pub mu_l_mrt_central: T,
    /// MRT line cost in the suburbs, €/(km·h).
    pub mu_l_mrt_suburban: T,
    /// MRT station cost inside the central area, €/(station·h).
    pub mu_st_central: T,
    /// MRT station cost in the suburbs, €/(station·h).
    pub mu_st_suburban: T,
    /// Feeder road infrastructure, €/(km·h).
    pub mu_l_feeder: T,
    /// €/(veh·km).
    pub mu_v_mrt: T,
    /// €/(veh·km).
    pub mu_v_feeder: T,
    /// Fleet and crew, €/(veh·h).
    pub mu_m_mrt: T,
    /// Fleet and crew, €/(veh·h).
    pub mu_m_feeder: T,
}

impl<T: Scalar> CostCoefficients<T> {
    fn fields(&self) -> [(&'static str, T); 12] {
        [
            ("mu_a", self.mu_a),
            ("mu_w", self.mu_w),
            ("mu_t", self.mu_t),
            ("mu_l_mrt_central", self.mu_l_mrt_central),
            ("mu_l_mrt_suburban", self.mu_l_mrt_suburban),
            ("mu_st_central", self.mu_st_central),
            ("mu_st_suburban", self.mu_st_suburban),
            ("mu_l_feeder", self.mu_l_feeder),
            ("mu_v_mrt", self.mu_v_mrt),
            ("mu_v_feeder", self.mu_v_feeder),
            ("mu_m_mrt", self.mu_m_mrt),
            ("mu_m_feeder", self.mu_m_feeder),
        ]
    }

    /// Every coefficient multiplied by `k`.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            mu_a: self.mu_a * k,
            mu_w: self.mu_w * k,
            mu_t: self.mu_t * k,
            mu_l_mrt_central: self.mu_l_mrt_central * k,
            mu_l_mrt_suburban: self.mu_l_mrt_suburban * k,
            mu_st_central: self.mu_st_central * k,
            mu_st_suburban: self.mu_st_suburban * k,
            mu_l_feeder: self.mu_l_feeder * k,
            mu_v_mrt: self.mu_v_mrt * k,
            mu_v_feeder: self.mu_v_feeder * k,
            mu_m_mrt: self.mu_m_mrt * k,
            mu_m_feeder: self.mu_m_feeder * k,
        }
    }

    fn cast<U: Scalar>(&self) -> CostCoefficients<U> {
        let c = |v: T| U::of(v.to_f64_lossy());
        CostCoefficients {
            mu_a: c(self.mu_a),
            mu_w: c(self.mu_w),
            mu_t: c(self.mu_t),
            mu_l_mrt_central: c(self.mu_l_mrt_central),
            mu_l_mrt_suburban: c(self.mu_l_mrt_suburban),
            mu_st_central: c(self.mu_st_central),
            mu_st_suburban: c(self.mu_st_suburban),
            mu_l_feeder: c(self.mu_l_feeder),
            mu_v_mrt: c(self.mu_v_mrt),
            mu_v_feeder: c(self.mu_v_feeder),
            mu_m_mrt: c(self.mu_m_mrt),
            mu_m_feeder: c(self.mu_m_feeder),
        }
    }
}

/// All exogenous inputs. Immutable once validated.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams<T> {
    /// Radius of the metropolitan area, km.
    pub radius: T,
    /// Exponential density gradient, 1/km.
    pub gamma: T,
    /// Demand levels, highest `rho0` first.
    pub periods: Vec<Period<T>>,
    pub v_walk: T,
    pub v_mrt: T,
    pub v_frf: T,
    pub v_drf: T,
    pub cap_mrt: T,
    pub cap_frf: T,
    pub cap_drf: T,
    /// Dwell per MRT station, h.
    pub tau_s_mrt: T,
    /// Dwell per feeder stop, h.
    pub tau_s_feeder: T,
    /// Extra dwell per boarding/alighting passenger, h.
    pub tau_p: T,
    /// Terminal dwell per feeder cycle, h.
    pub tau_t: T,
    /// Time penalty per MRT transfer, h.
    pub delta_a: T,
    pub costs: CostCoefficients<T>,
    /// Radial discretization step, km.
    pub dx: T,
    pub operating_hours_per_day: u32,
    /// Reproduces the extra ÷4 printed in the DRF walking-cost expression.
    pub legacy_drf_walk_divisor: bool,
}

impl<T: Scalar> ScenarioParams<T> {
    /// The period with the highest central density.
    pub fn peak(&self) -> &Period<T> {
        &self.periods[0]
    }

    pub fn period(&self, label: &str) -> Result<&Period<T>> {
        self.periods
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| Error::UnknownPeriod(label.to_string()))
    }

    pub fn grid(&self) -> Vec<T> {
        radial_grid(self.radius, self.dx)
    }

    pub fn check_x(&self, x: T) -> Result<()> {
        if x.is_nan() || x < T::zero() || x > self.radius {
            return Err(Error::OutOfDomain {
                x: x.to_f64_lossy(),
                radius: self.radius.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Sets walking/waiting/in-vehicle values of time to `vot · (1, 1.5, 2)`.
    pub fn with_value_of_time(mut self, vot: T) -> Self {
        self.costs.mu_a = vot;
        self.costs.mu_w = vot * T::of(1.5);
        self.costs.mu_t = vot * T::of(2.0);
        self
    }

    pub fn with_radius(mut self, radius: T) -> Result<Self> {
        self.radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dx(mut self, dx: T) -> Result<Self> {
        self.dx = dx;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be positive"))
            }
        };
        let non_negative = |name: &str, v: T| {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be non-negative"))
            }
        };
        positive("radius", self.radius)?;
        non_negative("gamma", self.gamma)?;
        positive("dx", self.dx)?;
        if self.dx >= self.radius {
            return Err(Error::param("dx", "must be smaller than radius"));
        }
        if self.periods.is_empty() {
            return Err(Error::param("rho0", "at least one period is required"));
        }
        for p in &self.periods {
            positive(&format!("rho0.{}", p.label), p.rho0)?;
        }
        let hours: u32 = self.periods.iter().map(|p| p.hours).sum();
        if hours != self.operating_hours_per_day {
            return Err(Error::param(
                "periods",
                format!(
                    "hours sum to {hours}, expected operating_hours_per_day = {}",
                    self.operating_hours_per_day
                ),
            ));
        }
        for (name, v) in [
            ("v_w", self.v_walk),
            ("v_mrt", self.v_mrt),
            ("v_frf", self.v_frf),
            ("v_drf", self.v_drf),
        ] {
            positive(name, v)?;
        }
        for (name, v) in [
            ("c_mrt", self.cap_mrt),
            ("c_frf", self.cap_frf),
            ("c_drf", self.cap_drf),
        ] {
            if !(v >= T::one()) {
                return Err(Error::param(name, "capacity must be at least 1"));
            }
        }
        for (name, v) in [
            ("tau_s_mrt", self.tau_s_mrt),
            ("tau_s_feeder", self.tau_s_feeder),
            ("tau_p", self.tau_p),
            ("tau_t", self.tau_t),
            ("delta_a", self.delta_a),
        ] {
            non_negative(name, v)?;
        }
        for (name, v) in self.costs.fields() {
            non_negative(name, v)?;
        }
        Ok(())
    }

    /// Converts every value to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ScenarioParams<U> {
        let c = |v: T| U::of(v.to_f64_lossy());
        ScenarioParams {
            radius: c(self.radius),
            gamma: c(self.gamma),
            periods: self
                .periods
                .iter()
                .map(|p| Period {
                    label: p.label.clone(),
                    rho0: c(p.rho0),
                    hours: p.hours,
                })
                .collect(),
            v_walk: c(self.v_walk),
            v_mrt: c(self.v_mrt),
            v_frf: c(self.v_frf),
            v_drf: c(self.v_drf),
            cap_mrt: c(self.cap_mrt),
            cap_frf: c(self.cap_frf),
            cap_drf: c(self.cap_drf),
            tau_s_mrt: c(self.tau_s_mrt),
            tau_s_feeder: c(self.tau_s_feeder),
            tau_p: c(self.tau_p),
            tau_t: c(self.tau_t),
            delta_a: c(self.delta_a),
            costs: self.costs.cast(),
            dx: c(self.dx),
            operating_hours_per_day: self.operating_hours_per_day,
            legacy_drf_walk_divisor: self.legacy_drf_walk_divisor,
        }
    }

    /// Serializes back into the configuration format (without an `[optimizer]` section).
    pub fn to_config_string(&self) -> String {
        let raw = RawConfig::from_params(&self.cast::<f64>());
        toml::to_string(&raw).expect("scenario serializes")
    }
}

/// Clark's-law demand density ρ0(t)·e^(−γx), trips/(km²·h).
pub fn demand_density<T: Scalar>(params: &ScenarioParams<T>, x: T, period: &str) -> Result<T> {
    params.check_x(x)?;
    let p = params.period(period)?;
    Ok(p.rho0 * (-params.gamma * x).exp())
}

/// Trip quantities at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripDensity<T> {
    /// Trips generated in the annulus at x, trips/(km·h).
    pub dem: T,
    /// Probability density of a trip end lying at x, 1/km.
    pub p: T,
    /// Trip ends (origins plus destinations) in the annulus, pax/(km·h).
    pub n: T,
}

pub fn trip_density<T: Scalar>(params: &ScenarioParams<T>, x: T, period: &str) -> Result<TripDensity<T>> {
    params.check_x(x)?;
    let field = DemandField::new(params, period)?;
    Ok(field.trip_density(x))
}

/// Radial demand of one period, with trapezoid prefix sums on the scenario grid.
#[derive(Debug, Clone)]
pub struct DemandField<T> {
    rho0: T,
    gamma: T,
    radius: T,
    integral: PrefixIntegral<T>,
}

impl<T: Scalar> DemandField<T> {
    pub fn new(params: &ScenarioParams<T>, period: &str) -> Result<Self> {
        let rho0 = params.period(period)?.rho0;
        Ok(Self::from_parts(rho0, params.gamma, params.radius, params.dx))
    }

    pub fn from_parts(rho0: T, gamma: T, radius: T, dx: T) -> Self {
        let xs = radial_grid(radius, dx);
        let ys: Vec<T> = xs.iter().map(|&x| dem_at(rho0, gamma, x)).collect();
        Self {
            rho0,
            gamma,
            radius,
            integral: PrefixIntegral::new(xs, ys),
        }
    }

    /// Same shape with every density scaled by `k`.
    pub fn scaled(&self, k: T) -> Self {
        let xs = self.integral.xs().to_vec();
        let rho0 = self.rho0 * k;
        let ys = xs.iter().map(|&x| dem_at(rho0, self.gamma, x)).collect();
        Self {
            rho0,
            gamma: self.gamma,
            radius: self.radius,
            integral: PrefixIntegral::new(xs, ys),
        }
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn rho0(&self) -> T {
        self.rho0
    }

    /// ρ(x), trips/(km²·h).
    #[inline]
    pub fn rho(&self, x: T) -> T {
        self.rho0 * (-self.gamma * x).exp()
    }

    /// Dem(x) = 2πx·ρ(x).
    #[inline]
    pub fn dem(&self, x: T) -> T {
        dem_at(self.rho0, self.gamma, x)
    }

    /// N(x) = 2ρ(x)·2πx.
    #[inline]
    pub fn n(&self, x: T) -> T {
        T::of(2.0) * self.dem(x)
    }

    /// DEM = ∫₀^R Dem, trips/h.
    #[inline]
    pub fn total(&self) -> T {
        self.integral.total()
    }

    #[inline]
    pub fn p(&self, x: T) -> T {
        let total = self.total();
        if total > T::zero() {
            self.dem(x) / total
        } else {
            T::zero()
        }
    }

    /// ∫₀^x P(y) dy, with x clamped into [0, R].
    #[inline]
    pub fn cum(&self, x: T) -> T {
        let total = self.total();
        if total > T::zero() {
            self.integral.at(x) / total
        } else {
            T::zero()
        }
    }

    /// ∫_a^b P(y) dy over the clamped interval; zero when b ≤ a.
    #[inline]
    pub fn between(&self, a: T, b: T) -> T {
        if b <= a {
            return T::zero();
        }
        (self.cum(b) - self.cum(a)).max(T::zero())
    }

    pub fn trip_density(&self, x: T) -> TripDensity<T> {
        TripDensity {
            dem: self.dem(x),
            p: self.p(x),
            n: self.n(x),
        }
    }
}

/// Demand quantities at one radius, precomputed for repeated model evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Site<'a, T> {
    pub field: &'a DemandField<T>,
    pub x: T,
    /// ρ(x).
    pub rho: T,
    /// Dem(x).
    pub dem: T,
    /// DEM.
    pub total: T,
    /// ∫₀^x P.
    pub inner: T,
    /// ∫_x^R P.
    pub outer: T,
}

impl<'a, T: Scalar> Site<'a, T> {
    /// N(x) = 2·Dem(x).
    #[inline]
    pub fn n(&self) -> T {
        T::of(2.0) * self.dem
    }

    /// ∫ P over the band of width `s` centred on x.
    #[inline]
    pub fn band(&self, s: T) -> T {
        let half = s * T::of(0.5);
        self.field.between(self.x - half, self.x + half)
    }
}

impl<T: Scalar> DemandField<T> {
    pub fn site(&self, x: T) -> Site<'_, T> {
        let inner = self.cum(x);
        Site {
            field: self,
            x,
            rho: self.rho(x),
            dem: self.dem(x),
            total: self.total(),
            inner,
            outer: (T::one() - inner).max(T::zero()),
        }
    }
}

#[inline]
fn dem_at<T: Scalar>(rho0: T, gamma: T, x: T) -> T {
    T::two_pi() * x * rho0 * (-gamma * x).exp()
}

// ---------------------------------------------------------------------------
// configuration file

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawConfig {
    pub geometry: RawGeometry,
    pub demand: RawDemand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<BTreeMap<String, u32>>,
    pub vehicles: RawVehicles,
    pub costs: CostCoefficients<f64>,
    #[serde(default)]
    pub numerics: RawNumerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<toml::Table>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawGeometry {
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawDemand {
    pub gamma: f64,
    pub rho0: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawVehicles {
    pub v_w: f64,
    pub v_mrt: f64,
    pub v_frf: f64,
    pub v_drf: f64,
    pub c_mrt: f64,
    pub c_frf: f64,
    pub c_drf: f64,
    /// Seconds.
    pub tau_s_mrt: f64,
    pub tau_s_feeder: f64,
    pub tau_p: f64,
    #[serde(default = "default_tau_t")]
    pub tau_t: f64,
    pub delta_a: f64,
}

fn default_tau_t() -> f64 {
    30.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub(crate) struct RawNumerics {
    pub dx: f64,
    pub operating_hours_per_day: u32,
    pub legacy_drf_walk_divisor: bool,
}

impl Default for RawNumerics {
    fn default() -> Self {
        Self {
            dx: 0.5,
            operating_hours_per_day: 18,
            legacy_drf_walk_divisor: false,
        }
    }
}

fn default_hours(label: &str) -> Option<u32> {
    match label {
        "peak" => Some(4),
        "off_peak" => Some(8),
        "low_peak" => Some(6),
        _ => None,
    }
}

impl RawConfig {
    pub(crate) fn parse(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| Error::Parse(e.to_string()))
    }

    pub(crate) fn into_params(self) -> Result<ScenarioParams<f64>> {
        let s = |v: f64| v / SECONDS_PER_HOUR;
        let mut periods = Vec::with_capacity(self.demand.rho0.len());
        for (label, rho0) in &self.demand.rho0 {
            let hours = match &self.periods {
                Some(map) => *map
                    .get(label)
                    .ok_or_else(|| Error::param(&format!("periods.{label}"), "missing hour count"))?,
                None => default_hours(label).ok_or_else(|| {
                    Error::param(&format!("periods.{label}"), "no default hour count; add a [periods] section")
                })?,
            };
            periods.push(Period {
                label: label.clone(),
                rho0: *rho0,
                hours,
            });
        }
        if let Some(map) = &self.periods {
            if let Some(extra) = map.keys().find(|k| !self.demand.rho0.contains_key(*k)) {
                return Err(Error::param(&format!("periods.{extra}"), "period has no rho0"));
            }
        }
        periods.sort_by(|a, b| b.rho0.total_cmp(&a.rho0).then_with(|| a.label.cmp(&b.label)));
        let v = &self.vehicles;
        let params = ScenarioParams {
            radius: self.geometry.radius,
            gamma: self.demand.gamma,
            periods,
            v_walk: v.v_w,
            v_mrt: v.v_mrt,
            v_frf: v.v_frf,
            v_drf: v.v_drf,
            cap_mrt: v.c_mrt,
            cap_frf: v.c_frf,
            cap_drf: v.c_drf,
            tau_s_mrt: s(v.tau_s_mrt),
            tau_s_feeder: s(v.tau_s_feeder),
            tau_p: s(v.tau_p),
            tau_t: s(v.tau_t),
            delta_a: s(v.delta_a),
            costs: self.costs,
            dx: self.numerics.dx,
            operating_hours_per_day: self.numerics.operating_hours_per_day,
            legacy_drf_walk_divisor: self.numerics.legacy_drf_walk_divisor,
        };
        params.validate()?;
        Ok(params)
    }

    fn from_params(p: &ScenarioParams<f64>) -> Self {
        let h = |v: f64| v * SECONDS_PER_HOUR;
        RawConfig {
            geometry: RawGeometry { radius: p.radius },
            demand: RawDemand {
                gamma: p.gamma,
                rho0: p.periods.iter().map(|q| (q.label.clone(), q.rho0)).collect(),
            },
            periods: Some(p.periods.iter().map(|q| (q.label.clone(), q.hours)).collect()),
            vehicles: RawVehicles {
                v_w: p.v_walk,
                v_mrt: p.v_mrt,
                v_frf: p.v_frf,
                v_drf: p.v_drf,
                c_mrt: p.cap_mrt,
                c_frf: p.cap_frf,
                c_drf: p.cap_drf,
                tau_s_mrt: h(p.tau_s_mrt),
                tau_s_feeder: h(p.tau_s_feeder),
                tau_p: h(p.tau_p),
                tau_t: h(p.tau_t),
                delta_a: h(p.delta_a),
            },
            costs: p.costs,
            numerics: RawNumerics {
                dx: p.dx,
                operating_hours_per_day: p.operating_hours_per_day,
                legacy_drf_walk_divisor: p.legacy_drf_walk_divisor,
            },
            optimizer: None,
        }
    }
}

/// Parses and validates a scenario configuration.
pub fn load_scenario(source: &str) -> Result<ScenarioParams<f64>> {
    RawConfig::parse(source)?.into_params()
}

/// The base scenario shipped as `scenarios/baseline.cfg`.
pub const BASELINE_CFG: &str = include_str!("../../../scenarios/baseline.cfg");
/// Automated-vehicle overrides shipped as `scenarios/automated.cfg`.
pub const AUTOMATED_CFG: &str = include_str!("../../../scenarios/automated.cfg");

pub fn baseline() -> ScenarioParams<f64> {
    load_scenario(BASELINE_CFG).expect("shipped baseline scenario is valid")
}

pub fn automated() -> ScenarioParams<f64> {
    load_scenario(AUTOMATED_CFG).expect("shipped automated scenario is valid")
}
