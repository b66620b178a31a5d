//! Multi-scheme experiments: the three-scheme comparison with its gains and zonal
//! access-time table, and the city-size × value-of-time grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{gain, NodeEval};
use crate::error::Result;
use crate::grid::trapezoid;
use crate::optimizer::{optimize_scheme, OptimizerSettings, Scheme, SchemeResult, SchemeSpec};
use crate::scenario::{DemandField, ScenarioParams};

/// Label used for whole-day rows next to the period labels.
pub const DAILY: &str = "daily";

/// Zones of the access-time table: inner city, first ring of suburbs, outer suburbs.
pub const ZONE_EDGES: [(&str, f64, f64); 3] = [("x<=6", 0.0, 6.0), ("6<x<=15", 6.0, 15.0), ("x>15", 15.0, f64::INFINITY)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainRow {
    pub reference: Scheme,
    pub alternative: Scheme,
    /// Period label, or [`DAILY`].
    pub period: String,
    pub total: f64,
    pub agency: f64,
    pub user: f64,
}

/// Mean access time per trip end in one zone, minutes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessRow {
    pub scheme: Scheme,
    pub period: String,
    pub zone: &'static str,
    pub walk_feeder: f64,
    pub wait_feeder: f64,
    pub ride_feeder: f64,
    pub walk_mrt: f64,
    pub wait_mrt: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// MRT_ONLY, MRT_FRF, ADAPTIVE in that order.
    pub results: Vec<SchemeResult>,
    /// Adaptive against each conventional scheme, periods first then the day.
    pub gains: Vec<GainRow>,
    pub access: Vec<AccessRow>,
}

impl Comparison {
    pub fn result(&self, scheme: Scheme) -> &SchemeResult {
        self.results.iter().find(|r| r.spec.scheme == scheme).expect("every scheme is run")
    }

    pub fn gain(&self, reference: Scheme, period: &str) -> Option<&GainRow> {
        self.gains.iter().find(|g| g.reference == reference && g.period == period)
    }

    pub fn access(&self, scheme: Scheme, period: &str, zone: &str) -> Option<&AccessRow> {
        self.access.iter().find(|a| a.scheme == scheme && a.period == period && a.zone == zone)
    }
}

pub fn run_scheme(params: &ScenarioParams<f64>, settings: &OptimizerSettings, scheme: Scheme) -> Result<SchemeResult> {
    optimize_scheme(params, &SchemeSpec::new(scheme, settings.max_strips), settings)
}

/// Gains of `alternative` over `reference`, per period (hourly, capital included) and daily.
pub fn scheme_gains(reference: &SchemeResult, alternative: &SchemeResult) -> Result<Vec<GainRow>> {
    let mut rows = Vec::with_capacity(reference.periods.len() + 1);
    for p in &reference.periods {
        let Some(q) = alternative.period(&p.label) else {
            return Err(crate::Error::MissingPeriod(p.label.clone()));
        };
        let (a, b) = (&p.breakdown, &q.breakdown);
        rows.push(GainRow {
            reference: reference.spec.scheme,
            alternative: alternative.spec.scheme,
            period: p.label.clone(),
            total: gain(a.z_total(), b.z_total())?,
            agency: gain(a.z_agency(), b.z_agency())?,
            user: gain(a.z_user(), b.z_user())?,
        });
    }
    rows.push(GainRow {
        reference: reference.spec.scheme,
        alternative: alternative.spec.scheme,
        period: DAILY.to_string(),
        total: gain(reference.z_24h, alternative.z_24h)?,
        agency: gain(reference.daily_agency(), alternative.daily_agency())?,
        user: gain(reference.daily_user(), alternative.daily_user())?,
    });
    Ok(rows)
}

/// Zonal access-time rows for every period of one scheme.
pub fn access_table(params: &ScenarioParams<f64>, result: &SchemeResult) -> Result<Vec<AccessRow>> {
    let mut rows = Vec::new();
    for p in &result.periods {
        let field = DemandField::new(params, &p.label)?;
        for (zone, a, b) in ZONE_EDGES {
            let nodes: Vec<&NodeEval<f64>> = p.eval().nodes.iter().filter(|n| n.x >= a && n.x <= b).collect();
            let xs: Vec<f64> = nodes.iter().map(|n| n.x).collect();
            let trips = trapezoid(&xs, &nodes.iter().map(|n| field.n(n.x)).collect::<Vec<_>>());
            let mean = |f: &dyn Fn(&NodeEval<f64>) -> f64| {
                if xs.len() < 2 || trips <= 0.0 {
                    return 0.0;
                }
                let ys: Vec<f64> = nodes.iter().map(|n| f(n)).collect();
                60.0 * trapezoid(&xs, &ys) / trips
            };
            let walk_feeder = mean(&|n| n.feeder_densities().a);
            let wait_feeder = mean(&|n| n.feeder_densities().w);
            let ride_feeder = mean(&|n| n.feeder_densities().t);
            let walk_mrt = mean(&|n| n.mrt.a);
            let wait_mrt = mean(&|n| n.mrt.w);
            rows.push(AccessRow {
                scheme: result.spec.scheme,
                period: p.label.clone(),
                zone,
                walk_feeder,
                wait_feeder,
                ride_feeder,
                walk_mrt,
                wait_mrt,
                total: walk_feeder + wait_feeder + ride_feeder + walk_mrt + wait_mrt,
            });
        }
    }
    Ok(rows)
}

/// Runs all three schemes and compares Adaptive against the other two.
pub fn compare(params: &ScenarioParams<f64>, settings: &OptimizerSettings) -> Result<Comparison> {
    let results = Scheme::ALL
        .iter()
        .map(|&s| run_scheme(params, settings, s))
        .collect::<Result<Vec<_>>>()?;
    let adaptive = &results[2];
    let mut gains = scheme_gains(&results[0], adaptive)?;
    gains.extend(scheme_gains(&results[1], adaptive)?);
    let mut access = Vec::new();
    for r in &results {
        access.extend(access_table(params, r)?);
    }
    Ok(Comparison { results, gains, access })
}

/// One cell of the city-size × value-of-time grid: daily gains of Adaptive over MRT_FRF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub radius: f64,
    pub vot: f64,
    pub total: Option<f64>,
    pub agency: Option<f64>,
    pub user: Option<f64>,
    pub error: Option<String>,
}

impl GridCell {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

fn grid_cell(params: &ScenarioParams<f64>, settings: &OptimizerSettings, radius: f64, vot: f64) -> Result<GridCell> {
    let p = params.clone().with_radius(radius)?.with_value_of_time(vot);
    let frf = run_scheme(&p, settings, Scheme::MrtFrf)?;
    let adaptive = run_scheme(&p, settings, Scheme::Adaptive)?;
    let daily = scheme_gains(&frf, &adaptive)?.pop().expect("daily row is always present");
    Ok(GridCell {
        radius,
        vot,
        total: Some(daily.total),
        agency: Some(daily.agency),
        user: Some(daily.user),
        error: None,
    })
}

/// Evaluates every (radius, vot) cell; a failing cell is recorded and the rest carry on.
pub fn sweep_grid(params: &ScenarioParams<f64>, settings: &OptimizerSettings, radii: &[f64], vots: &[f64]) -> Vec<GridCell> {
    let cells: Vec<(f64, f64)> = radii.iter().flat_map(|&r| vots.iter().map(move |&v| (r, v))).collect();
    cells
        .par_iter()
        .map(|&(radius, vot)| {
            grid_cell(params, settings, radius, vot).unwrap_or_else(|e| {
                log::warn!("grid radius={radius} vot={vot} status=failed reason=\"{e}\"");
                GridCell {
                    radius,
                    vot,
                    total: None,
                    agency: None,
                    user: None,
                    error: Some(e.to_string()),
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::baseline;

    fn small() -> ScenarioParams<f64> {
        baseline().with_radius(10.0).unwrap().with_dx(1.0).unwrap()
    }

    #[test]
    fn gains_of_a_scheme_against_itself_are_zero() {
        let p = small();
        let s = OptimizerSettings::default();
        let r = run_scheme(&p, &s, Scheme::MrtOnly).unwrap();
        let rows = scheme_gains(&r, &r).unwrap();
        assert_eq!(rows.len(), p.periods.len() + 1);
        assert!(rows.iter().all(|g| g.total == 0.0 && g.agency == 0.0 && g.user == 0.0));
        assert_eq!(rows.last().unwrap().period, DAILY);
    }

    #[test]
    fn access_rows_cover_every_zone_and_period() {
        let p = small();
        let s = OptimizerSettings::default();
        let r = run_scheme(&p, &s, Scheme::MrtOnly).unwrap();
        let rows = access_table(&p, &r).unwrap();
        assert_eq!(rows.len(), 3 * p.periods.len());
        for row in &rows {
            // no feeders in this scheme
            assert_eq!(row.walk_feeder + row.wait_feeder + row.ride_feeder, 0.0);
            if row.zone == "x>15" {
                // the city ends at 10 km
                assert_eq!(row.total, 0.0);
                continue;
            }
            assert!(row.total > 0.0 && row.total.is_finite());
            assert!((row.total - row.walk_mrt - row.wait_mrt).abs() < 1e-12);
        }
    }

    #[test]
    fn failing_cells_are_recorded() {
        let p = small();
        let s = OptimizerSettings::default();
        let cells = sweep_grid(&p, &s, &[-1.0], &[10.0]);
        assert_eq!(cells.len(), 1);
        assert!(!cells[0].ok());
        assert!(cells[0].total.is_none());
    }
}
