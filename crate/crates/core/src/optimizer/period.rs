//! Candidate evaluation, the nested (r, Q0) sweeps and the per-period pipeline.

use std::collections::HashMap;
use std::sync::Mutex;

use log::{info, warn};
use rayon::prelude::*;

use super::boundary::{solve_boundary_headway, BoundaryProblem};
use super::local::{solve_local, LocalConstraints, LocalProblem, LocalSolution, PeakReference};
use super::repair::{repair_monotonicity, RepairReport};
use super::sweep::{arithmetic, geometric, run_sweep, SweepOutcome};
use super::validate::{validate_scheme, Violation};
use super::{OptimizerSettings, Scheme, SchemeSpec};
use crate::cost::{daily_cost, evaluate_profile, CostBreakdown, PeriodCost, ProfileEval};
use crate::design::{profile_grid, DesignProfile, GlobalDesign, ProfileNode, Zone};
use crate::error::{Error, Result};
use crate::scenario::{DemandField, ScenarioParams};

/// A fully priced (r, Q0) candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub profile: DesignProfile<f64>,
    pub eval: ProfileEval<f64>,
    /// Sweep objective: Z_total at the peak, Z_op + Z_user in other periods.
    pub objective: f64,
    pub repair: RepairReport,
}

/// One sweep iterate, as logged.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SweepRecord {
    pub r: f64,
    pub q0: f64,
    /// `+∞` for an infeasible candidate.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodResult {
    pub label: String,
    pub hours: u32,
    pub candidate: Candidate,
    /// Hourly costs with the capital part frozen at the peak design.
    pub breakdown: CostBreakdown<f64>,
    pub sweep: Vec<SweepRecord>,
    pub warnings: Vec<String>,
}

impl PeriodResult {
    pub fn profile(&self) -> &DesignProfile<f64> {
        &self.candidate.profile
    }

    pub fn global(&self) -> &GlobalDesign<f64> {
        &self.candidate.profile.global
    }

    pub fn eval(&self) -> &ProfileEval<f64> {
        &self.candidate.eval
    }

    fn peak_references(&self) -> Vec<PeakReference> {
        self.profile()
            .nodes
            .iter()
            .zip(&self.eval().nodes)
            .map(|(n, e)| PeakReference {
                design: n.design,
                feeder_fleet: e.feeder_densities().m,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    pub spec: SchemeSpec,
    /// Peak first, then the scenario's other periods in order.
    pub periods: Vec<PeriodResult>,
    pub z_cap: f64,
    pub z_24h: f64,
    /// Scheme whose peak dimensioning produced the peak design.
    pub peak_source: Scheme,
    /// Output of the independent constraint validator; empty for a clean result.
    pub violations: Vec<Violation>,
}

impl SchemeResult {
    pub fn peak(&self) -> &PeriodResult {
        &self.periods[0]
    }

    pub fn period(&self, label: &str) -> Option<&PeriodResult> {
        self.periods.iter().find(|p| p.label == label)
    }

    pub fn period_costs(&self) -> Vec<PeriodCost<f64>> {
        self.periods
            .iter()
            .map(|p| PeriodCost {
                label: p.label.clone(),
                hours: p.hours,
                breakdown: p.breakdown,
            })
            .collect()
    }

    /// Daily agency cost Σ Δt·(Z_cap + Z_op).
    pub fn daily_agency(&self) -> f64 {
        self.periods
            .iter()
            .map(|p| p.hours as f64 * (self.z_cap + p.breakdown.z_op()))
            .sum()
    }

    /// Daily user cost Σ Δt·Z_user.
    pub fn daily_user(&self) -> f64 {
        self.periods.iter().map(|p| p.hours as f64 * p.breakdown.z_user()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum FlowKey {
    Free,
    Cap(u64),
    Pin(u64),
}

type CacheKey = (u64, Zone, FlowKey);

/// Everything needed to price candidates in one period, with a cache of local solves
/// shared across candidates.
struct PeriodRun<'a> {
    params: &'a ScenarioParams<f64>,
    field: DemandField<f64>,
    label: String,
    spec: &'a SchemeSpec,
    settings: &'a OptimizerSettings,
    peak: Option<(&'a PeriodResult, Vec<PeakReference>)>,
    cache: Mutex<HashMap<CacheKey, Result<LocalSolution>>>,
}

impl<'a> PeriodRun<'a> {
    fn new(
        params: &'a ScenarioParams<f64>,
        spec: &'a SchemeSpec,
        settings: &'a OptimizerSettings,
        label: &str,
        peak: Option<&'a PeriodResult>,
    ) -> Result<Self> {
        Ok(Self {
            params,
            field: DemandField::new(params, label)?,
            label: label.to_string(),
            spec,
            settings,
            peak: peak.map(|p| (p, p.peak_references())),
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn problem(&self) -> LocalProblem<'_> {
        LocalProblem {
            params: self.params,
            field: &self.field,
            spec: self.spec,
            settings: self.settings,
            capital: self.peak.is_none(),
        }
    }

    /// Solves every missing key in parallel. Each solve is seeded by its key alone.
    fn ensure(&self, jobs: &[(CacheKey, f64, Zone, LocalConstraints)]) {
        let missing: Vec<_> = {
            let cache = self.cache.lock().expect("cache lock");
            let mut seen = std::collections::HashSet::new();
            jobs.iter()
                .filter(|j| !cache.contains_key(&j.0) && seen.insert(j.0))
                .copied()
                .collect()
        };
        if missing.is_empty() {
            return;
        }
        let problem = self.problem();
        let solved: Vec<_> = missing
            .par_iter()
            .map(|(key, x, zone, c)| (*key, solve_local(&problem, *x, *zone, c)))
            .collect();
        self.cache.lock().expect("cache lock").extend(solved);
    }

    fn lookup(&self, key: &CacheKey) -> Result<LocalSolution> {
        self.cache.lock().expect("cache lock")[key].clone()
    }

    fn evaluate(&self, r: f64, q0: f64) -> Result<Candidate> {
        let grid = self.params.grid();
        let at = profile_grid(&grid, r);
        let refs = self.peak.as_ref().map(|(_, refs)| refs.as_slice());
        if let Some((peak, refs)) = &self.peak {
            if peak.global().r != r || refs.len() != at.len() {
                return Err(Error::InvalidInput("off-peak candidates must keep the peak radius".into()));
            }
        }
        let peak_at = |i: usize| refs.map(|r| r[i]);

        let first: Vec<_> = at
            .iter()
            .enumerate()
            .map(|(i, &(x, zone))| {
                if x == 0.0 {
                    let c = LocalConstraints {
                        q_cap: q0,
                        q_pin: Some(q0),
                        peak: peak_at(i),
                    };
                    ((x.to_bits(), zone, FlowKey::Pin(q0.to_bits())), x, zone, c)
                } else {
                    let c = LocalConstraints {
                        peak: peak_at(i),
                        ..LocalConstraints::free()
                    };
                    ((x.to_bits(), zone, FlowKey::Free), x, zone, c)
                }
            })
            .collect();
        self.ensure(&first);

        let mut keys = Vec::with_capacity(at.len());
        let mut capped = Vec::new();
        for (i, job) in first.iter().enumerate() {
            let sol = self.lookup(&job.0)?;
            if job.0 .2 == FlowKey::Free && sol.design.flow() > q0 {
                let c = LocalConstraints {
                    q_cap: q0,
                    q_pin: None,
                    peak: peak_at(i),
                };
                let key = (job.1.to_bits(), job.2, FlowKey::Cap(q0.to_bits()));
                capped.push((key, job.1, job.2, c));
                keys.push(key);
            } else {
                keys.push(job.0);
            }
        }
        self.ensure(&capped);

        let mut nodes = Vec::with_capacity(at.len());
        for (&(x, zone), key) in at.iter().zip(&keys) {
            let sol = self.lookup(key)?;
            nodes.push(ProfileNode {
                x,
                zone,
                design: sol.design,
            });
        }
        // the centre node carries no ring, so it shows the rings of its neighbour
        if nodes.len() > 1 && nodes[0].x == 0.0 && nodes[1].zone == Zone::Central && self.peak.is_none() {
            nodes[0].design.ring_spacing = nodes[1].design.ring_spacing;
            nodes[0].design.ring_station_spacing = nodes[1].design.ring_station_spacing;
        }
        let repair = repair_monotonicity(&mut nodes, self.settings.bounds.headway[0]);

        let phi_b = nodes
            .iter()
            .rev()
            .find(|n| n.zone == Zone::Central && n.x == r)
            .and_then(|n| n.design.phi(r))
            .ok_or_else(|| Error::infeasible(r, "no central node at r to set the boundary station spacing"))?;
        let theta_min = nodes.iter().map(|n| n.design.theta_r).fold(f64::INFINITY, f64::min);
        let h_lo = match &self.peak {
            Some((p, _)) => self.settings.bounds.headway[0].max(p.global().h_b),
            None => self.settings.bounds.headway[0],
        };
        let h_b = solve_boundary_headway(&BoundaryProblem {
            params: self.params,
            field: &self.field,
            r,
            phi_b,
            theta_min,
            capital: self.peak.is_none(),
            bounds: [h_lo, self.settings.bounds.headway[1]],
        })?;
        let profile = DesignProfile {
            global: GlobalDesign {
                r,
                q0: nodes[0].design.flow(),
                phi_b,
                h_b,
            },
            nodes,
        };
        let eval = evaluate_profile(self.params, &self.field, &profile, self.settings.d_ref)?;
        let objective = if self.peak.is_none() {
            eval.breakdown.z_total()
        } else {
            eval.breakdown.z_op() + eval.breakdown.z_user()
        };
        Ok(Candidate {
            profile,
            eval,
            objective,
            repair,
        })
    }

    /// Inner sweep over Q0 at fixed r.
    fn sweep_q0(&self, r: f64, q0_max: f64, log: &mut Vec<SweepRecord>) -> (Option<Candidate>, SweepOutcome, Option<Error>) {
        let s = self.settings;
        let mut best: Option<Candidate> = None;
        let mut last_err = None;
        let outcome = run_sweep(geometric(s.q0_start, s.q0_growth, q0_max), s.window, |q0| {
            match self.evaluate(r, q0) {
                Ok(c) => {
                    let z = c.objective;
                    info!(
                        "scheme={} period={} r={r:.3} q0={q0:.3} z={z:.6} repair={:.3e} status=ok",
                        self.spec.scheme, self.label, c.repair.max_headway_change
                    );
                    log.push(SweepRecord { r, q0, z });
                    if best.as_ref().map_or(true, |b| z < b.objective) {
                        best = Some(c);
                    }
                    z
                }
                Err(e) => {
                    info!(
                        "scheme={} period={} r={r:.3} q0={q0:.3} z=inf status=infeasible reason=\"{e}\"",
                        self.spec.scheme, self.label
                    );
                    log.push(SweepRecord { r, q0, z: f64::INFINITY });
                    last_err = Some(e);
                    f64::INFINITY
                }
            }
        });
        (best, outcome, last_err)
    }
}

/// Prices one (r, Q0) pair in `label`. Off-peak calls need the peak result.
pub fn evaluate_candidate(
    params: &ScenarioParams<f64>,
    spec: &SchemeSpec,
    settings: &OptimizerSettings,
    label: &str,
    peak: Option<&PeriodResult>,
    r: f64,
    q0: f64,
) -> Result<Candidate> {
    PeriodRun::new(params, spec, settings, label, peak)?.evaluate(r, q0)
}

/// Dimensions the peak period: outer sweep over r, inner sweep over Q0.
pub fn dimension_peak(params: &ScenarioParams<f64>, spec: &SchemeSpec, settings: &OptimizerSettings) -> Result<PeriodResult> {
    settings.validate()?;
    let peak = params.peak();
    let run = PeriodRun::new(params, spec, settings, &peak.label, None)?;
    let r_max = settings
        .r_max
        .unwrap_or(params.radius - params.dx)
        .min(params.radius - params.dx);
    let mut log = Vec::new();
    let mut warnings = Vec::new();
    let mut per_r: Vec<(f64, Candidate)> = Vec::new();
    let mut last_err = None;
    let outer = run_sweep(arithmetic(settings.r_start, settings.r_step, r_max), settings.window, |r| {
        let (best, inner, err) = run.sweep_q0(r, settings.q0_max, &mut log);
        if best.is_some() && !inner.stopped {
            warnings.push(format!("Q0 sweep at r={r} reached q0_max without the stop rule firing"));
        }
        if err.is_some() {
            last_err = err;
        }
        match best {
            Some(c) => {
                let z = c.objective;
                info!("scheme={} period={} sweep=r r={r:.3} z={z:.6}", spec.scheme, peak.label);
                per_r.push((r, c));
                z
            }
            None => f64::INFINITY,
        }
    });
    finish(params, &peak.label, outer, per_r, log, warnings, last_err, None)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    params: &ScenarioParams<f64>,
    label: &str,
    outcome: SweepOutcome,
    mut found: Vec<(f64, Candidate)>,
    sweep: Vec<SweepRecord>,
    mut warnings: Vec<String>,
    last_err: Option<Error>,
    peak: Option<&PeriodResult>,
) -> Result<PeriodResult> {
    let best = match outcome.best_point() {
        Some(b) => b,
        None => {
            let what = if peak.is_none() { "r" } else { "Q0" };
            let detail = last_err.map_or(String::new(), |e| format!(" (last failure: {e})"));
            return Err(Error::SweepExhausted(format!("{what} in period {label}{detail}")));
        }
    };
    if !outcome.stopped {
        let what = if peak.is_none() { "r" } else { "Q0" };
        warnings.push(format!("{what} sweep in period {label} reached its bound without the stop rule firing"));
    }
    for w in &warnings {
        warn!("{w}");
    }
    let idx = found.iter().position(|(v, _)| *v == best.value).expect("best iterate was stored");
    let candidate = found.swap_remove(idx).1;
    let hours = params.period(label)?.hours;
    let breakdown = match peak {
        Some(p) => candidate.eval.breakdown.with_capital_of(&p.candidate.eval.breakdown),
        None => candidate.eval.breakdown,
    };
    Ok(PeriodResult {
        label: label.to_string(),
        hours,
        candidate,
        breakdown,
        sweep,
        warnings,
    })
}

/// Re-optimizes a non-peak period around the fixed peak infrastructure.
pub fn optimize_period(
    params: &ScenarioParams<f64>,
    spec: &SchemeSpec,
    settings: &OptimizerSettings,
    label: &str,
    peak: &PeriodResult,
) -> Result<PeriodResult> {
    settings.validate()?;
    let run = PeriodRun::new(params, spec, settings, label, Some(peak))?;
    let r = peak.global().r;
    let mut log = Vec::new();
    let (best, outcome, err) = run.sweep_q0(r, settings.q0_max.min(peak.global().q0), &mut log);
    let found = match best {
        Some(c) => {
            let q0 = outcome.best_point().map(|b| b.value).unwrap_or(f64::NAN);
            vec![(q0, c)]
        }
        None => Vec::new(),
    };
    finish(params, label, outcome, found, log, Vec::new(), err, Some(peak))
}

/// Peak dimensioning, then every other period, then the daily total.
///
/// A scheme whose design space contains simpler schemes also tries their peak
/// designs as its own peak (re-optimizing the other periods under its own rules) and
/// keeps whichever day is cheapest. Dimensioning the peak alone is myopic about the
/// capital it freezes for the rest of the day; this keeps the containing scheme from
/// ending up dearer than the scheme it contains.
pub fn optimize_scheme(params: &ScenarioParams<f64>, spec: &SchemeSpec, settings: &OptimizerSettings) -> Result<SchemeResult> {
    let mut best = complete_day(params, spec, settings, dimension_peak(params, spec, settings)?, spec.scheme)?;
    for &sub in spec.scheme.nested() {
        let sub_spec = SchemeSpec::new(sub, spec.max_strips);
        let Ok(peak) = dimension_peak(params, &sub_spec, settings) else {
            continue;
        };
        let alt = complete_day(params, spec, settings, peak, sub)?;
        info!(
            "scheme={} peak_from={sub} z24h={:.6} current={:.6}",
            spec.scheme, alt.z_24h, best.z_24h
        );
        if alt.z_24h < best.z_24h {
            best = alt;
        }
    }
    best.violations = validate_scheme(params, settings, &best);
    for v in &best.violations {
        warn!("scheme={} violation {v}", spec.scheme);
    }
    Ok(best)
}

fn complete_day(
    params: &ScenarioParams<f64>,
    spec: &SchemeSpec,
    settings: &OptimizerSettings,
    peak: PeriodResult,
    peak_source: Scheme,
) -> Result<SchemeResult> {
    let others: Vec<PeriodResult> = params.periods[1..]
        .par_iter()
        .map(|p| optimize_period(params, spec, settings, &p.label, &peak))
        .collect::<Result<_>>()?;
    let mut periods = vec![peak];
    periods.extend(others);
    let z_cap = periods[0].breakdown.z_cap();
    let costs: Vec<PeriodCost<f64>> = periods
        .iter()
        .map(|p| PeriodCost {
            label: p.label.clone(),
            hours: p.hours,
            breakdown: p.breakdown,
        })
        .collect();
    let z_24h = daily_cost(&costs, params)?;
    Ok(SchemeResult {
        spec: spec.clone(),
        periods,
        z_cap,
        z_24h,
        peak_source,
        violations: Vec::new(),
    })
}
