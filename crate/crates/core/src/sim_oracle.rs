//! Seeded Monte-Carlo feeder cycles inside one strip, used as an independent check
//! of the closed-form cycle lengths and times.
//!
//! Geometry: the strip spans `[0, l] × [0, w]` with the MRT station at the origin.
//! A demand-responsive vehicle leaves the station, visits its requests in order of
//! horizontal coordinate, and returns; horizontal travel is twice the farthest
//! request, vertical travel is the sum of the Manhattan legs between consecutive
//! stops plus the entry and exit legs. An empty dispatch is charged the strip
//! half-width, as in the closed form. A fixed-route vehicle always covers its
//! route, so its length carries no randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use serde::Serialize;

use crate::design::FeederMode;
use crate::error::{Error, Result};
use crate::feeder::{drf_cycle_length, frf_cycle_length};
use crate::scenario::ScenarioParams;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Strip length along the ring direction, km.
    pub l: f64,
    /// Strip width, km.
    pub w: f64,
    /// Width of the whole sub-region, km (the walking-area share depends on it).
    pub region_width: f64,
    /// Demand density, trips/(km²·h).
    pub rho: f64,
    /// Headway, h.
    pub h: f64,
    pub mode: FeederMode,
    /// Stop spacing d (FRF) or walking-area extent d0 (DRF), km.
    pub spacing: f64,
    /// Extra vertical distance of the strip, km.
    pub delta_l: f64,
    pub v: f64,
    /// Dwell per stop, h.
    pub tau_s: f64,
    /// Dwell per passenger, h.
    pub tau_p: f64,
    /// Terminal dwell, h.
    pub tau_t: f64,
    pub trials: usize,
    pub seed: u64,
}

impl OracleConfig {
    /// Share of the sub-region walking straight to the station.
    pub fn p_walk(&self) -> f64 {
        match self.mode {
            FeederMode::Frf => self.spacing / (2.0 * self.l),
            FeederMode::Drf => self.spacing * self.spacing / (self.l * self.region_width),
            FeederMode::None => 1.0,
        }
    }

    /// Expected passengers per cycle.
    pub fn expected_load(&self) -> f64 {
        2.0 * self.rho * self.w * self.l * self.h * (1.0 - self.p_walk())
    }

    /// Sets the headway so the expected load equals `n`.
    pub fn with_expected_load(mut self, n: f64) -> Self {
        self.h = 1.0;
        let per_hour = self.expected_load();
        self.h = if per_hour > 0.0 { n / per_hour } else { 1.0 };
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = self.l > 0.0
            && self.w > 0.0
            && self.region_width >= self.w
            && self.rho >= 0.0
            && self.h > 0.0
            && self.v > 0.0
            && self.trials >= 1
            && self.spacing >= 0.0;
        if !ok {
            return Err(Error::InvalidInput(format!("invalid oracle configuration {self:?}")));
        }
        match self.mode {
            FeederMode::None => Err(Error::InvalidInput("oracle needs a feeder mode".into())),
            FeederMode::Frf if !(self.spacing > 0.0 && self.spacing < 2.0 * self.l) => Err(Error::NoStopFits {
                d: self.spacing,
                limit: 2.0 * self.l,
            }),
            FeederMode::Drf if self.spacing > self.l.min(self.region_width) => {
                Err(Error::InvalidInput("d0 exceeds min(l, s)".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Sample mean with its 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub ci95: f64,
}

impl Estimate {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            ci95: 1.96 * (var / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub cl: Estimate,
    pub c: Estimate,
    pub n: Estimate,
    pub trials: usize,
}

/// Runs `cfg.trials` independent cycles. Each trial draws from its own ChaCha stream,
/// so the result does not depend on how rayon partitions the work.
pub fn simulate_cycles(cfg: &OracleConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mean_n = cfg.expected_load();
    let samples: Vec<(f64, f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            one_cycle(cfg, mean_n, &mut rng)
        })
        .collect();
    let col = |f: fn(&(f64, f64, f64)) -> f64| samples.iter().map(f).collect::<Vec<_>>();
    Ok(SimResult {
        cl: Estimate::of(&col(|s| s.0)),
        c: Estimate::of(&col(|s| s.1)),
        n: Estimate::of(&col(|s| s.2)),
        trials: cfg.trials,
    })
}

/// Integer count with mean `mean` and the smallest possible variance.
fn draw_count(mean: f64, rng: &mut impl Rng) -> usize {
    let lo = mean.floor();
    let extra = if rng.gen::<f64>() < mean - lo { 1.0 } else { 0.0 };
    (lo + extra) as usize
}

fn one_cycle(cfg: &OracleConfig, mean_n: f64, rng: &mut impl Rng) -> (f64, f64, f64) {
    let k = draw_count(mean_n, rng);
    match cfg.mode {
        FeederMode::Frf => {
            let d = cfg.spacing;
            let cl = 2.0 * (cfg.l + cfg.delta_l - d / 2.0);
            let c = cl / cfg.v + cfg.tau_s * (2.0 * cfg.l / d - 1.0) + cfg.tau_p * k as f64 + cfg.tau_t;
            (cl, c, k as f64)
        }
        _ => {
            let cl = if k == 0 {
                cfg.w / 2.0
            } else {
                let mut pts: Vec<(f64, f64)> =
                    (0..k).map(|_| (rng.gen::<f64>() * cfg.l, rng.gen::<f64>() * cfg.w)).collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let horizontal = 2.0 * pts[k - 1].0;
                let mut vertical = pts[0].1 + pts[k - 1].1;
                for pair in pts.windows(2) {
                    vertical += (pair[1].1 - pair[0].1).abs();
                }
                horizontal + vertical
            };
            let c = cl / cfg.v + (cfg.tau_s + cfg.tau_p) * k as f64 + cfg.tau_t;
            (cl, c, k as f64)
        }
    }
}

/// Closed-form cycle length and time for the same configuration, at the expected load.
pub fn closed_form(cfg: &OracleConfig) -> (f64, f64) {
    let n = cfg.expected_load();
    match cfg.mode {
        FeederMode::Frf => {
            let cl = frf_cycle_length(cfg.l, cfg.delta_l, cfg.spacing);
            let c = cl / cfg.v + cfg.tau_s * (2.0 * cfg.l / cfg.spacing - 1.0) + cfg.tau_p * n + cfg.tau_t;
            (cl, c)
        }
        _ => {
            let cl = drf_cycle_length(cfg.l, cfg.w, n);
            (cl, cl / cfg.v + (cfg.tau_s + cfg.tau_p) * n + cfg.tau_t)
        }
    }
}

/// One configuration of the oracle grid with both estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub mode: FeederMode,
    pub l: f64,
    pub w: f64,
    pub expected_n: f64,
    pub sim_n: f64,
    pub sim_cl: f64,
    pub sim_cl_ci95: f64,
    pub ca_cl: f64,
    pub sim_c: f64,
    pub sim_c_ci95: f64,
    pub ca_c: f64,
}

impl OracleRow {
    pub fn cl_error(&self) -> f64 {
        (self.ca_cl - self.sim_cl).abs() / self.sim_cl
    }

    pub fn c_error(&self) -> f64 {
        (self.ca_c - self.sim_c).abs() / self.sim_c
    }
}

/// Strip lengths and widths of the validation grid, km.
pub const GRID_L: [f64; 3] = [1.0, 2.0, 3.0];
pub const GRID_W: [f64; 3] = [0.25, 0.5, 1.0];

/// Runs the 3×3 (l, w) grid with expected loads 1..=10 for the demand-responsive
/// feeder, plus one fixed-route row per (l, w). Feeder speeds and dwells come from `params`.
pub fn oracle_grid(params: &ScenarioParams<f64>, trials: usize, seed: u64) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();
    for (i, &l) in GRID_L.iter().enumerate() {
        for (j, &w) in GRID_W.iter().enumerate() {
            let base = OracleConfig {
                l,
                w,
                region_width: w,
                rho: 100.0,
                h: 1.0,
                mode: FeederMode::Drf,
                spacing: 0.0,
                delta_l: 0.0,
                v: params.v_drf,
                tau_s: params.tau_s_feeder,
                tau_p: params.tau_p,
                tau_t: params.tau_t,
                trials,
                seed: seed ^ ((i as u64) << 8 | j as u64),
            };
            let mut cases: Vec<OracleConfig> = (1..=10).map(|n| base.clone().with_expected_load(n as f64)).collect();
            cases.push(
                OracleConfig {
                    mode: FeederMode::Frf,
                    spacing: l / 2.0,
                    v: params.v_frf,
                    ..base.clone()
                }
                .with_expected_load(5.0),
            );
            for c in cases {
                let sim = simulate_cycles(&c)?;
                let (ca_cl, ca_c) = closed_form(&c);
                rows.push(OracleRow {
                    mode: c.mode,
                    l,
                    w,
                    expected_n: c.expected_load(),
                    sim_n: sim.n.mean,
                    sim_cl: sim.cl.mean,
                    sim_cl_ci95: sim.cl.ci95,
                    ca_cl,
                    sim_c: sim.c.mean,
                    sim_c_ci95: sim.c.ci95,
                    ca_c,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: FeederMode) -> OracleConfig {
        OracleConfig {
            l: 2.0,
            w: 0.5,
            region_width: 0.5,
            rho: 100.0,
            h: 0.1,
            mode,
            spacing: if mode == FeederMode::Frf { 0.5 } else { 0.0 },
            delta_l: 0.0,
            v: 25.0,
            tau_s: 30.0 / 3600.0,
            tau_p: 2.0 / 3600.0,
            tau_t: 30.0 / 3600.0,
            trials: 4000,
            seed: 7,
        }
    }

    #[test]
    fn empty_strip_charges_half_width() {
        let mut c = cfg(FeederMode::Drf);
        c.rho = 0.0;
        let r = simulate_cycles(&c).unwrap();
        assert_eq!(r.cl.mean, 0.25);
        assert_eq!(r.cl.ci95, 0.0);
        assert_eq!(r.cl.mean, drf_cycle_length(2.0, 0.5, 0.0));
    }

    #[test]
    fn frf_length_is_deterministic() {
        let r = simulate_cycles(&cfg(FeederMode::Frf)).unwrap();
        assert_eq!(r.cl.mean, frf_cycle_length(2.0, 0.0, 0.5));
        assert_eq!(r.cl.ci95, 0.0);
    }

    #[test]
    fn drf_close_to_closed_form_at_three_passengers() {
        let c = cfg(FeederMode::Drf).with_expected_load(3.0);
        let r = simulate_cycles(&c).unwrap();
        assert!((r.n.mean - 3.0).abs() < 0.05);
        let ca = drf_cycle_length(2.0, 0.5, 3.0);
        assert!(((ca - r.cl.mean) / r.cl.mean).abs() < 0.10, "{ca} vs {}", r.cl.mean);
    }

    #[test]
    fn seeded_runs_repeat_and_ci_shrinks() {
        let c = cfg(FeederMode::Drf).with_expected_load(4.5);
        let a = simulate_cycles(&c).unwrap();
        let b = simulate_cycles(&c).unwrap();
        assert_eq!(a, b);
        let mut big = c.clone();
        big.trials *= 2;
        let r = simulate_cycles(&big).unwrap();
        let ratio = r.cl.ci95 / a.cl.ci95;
        assert!((ratio - 1.0 / 2f64.sqrt()).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn independent_of_thread_count() {
        let c = cfg(FeederMode::Drf).with_expected_load(2.5);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate_cycles(&c).unwrap());
        let b = four.install(|| simulate_cycles(&c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn drf_length_grows_with_demand() {
        let mut last = 0.0;
        for rho in [10.0, 50.0, 100.0, 400.0] {
            let mut c = cfg(FeederMode::Drf);
            c.rho = rho;
            let r = simulate_cycles(&c).unwrap();
            assert!(r.cl.mean >= last);
            last = r.cl.mean;
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = cfg(FeederMode::Frf);
        c.spacing = 5.0;
        assert!(matches!(simulate_cycles(&c), Err(Error::NoStopFits { .. })));
        let mut c = cfg(FeederMode::Drf);
        c.mode = FeederMode::None;
        assert!(simulate_cycles(&c).is_err());
    }

    #[test]
    fn grid_has_every_configuration() {
        let rows = oracle_grid(&crate::scenario::baseline(), 200, 3).unwrap();
        assert_eq!(rows.len(), 9 * 11);
        let frf: Vec<_> = rows.iter().filter(|r| r.mode == FeederMode::Frf).collect();
        assert_eq!(frf.len(), 9);
        assert!(frf.iter().all(|r| r.cl_error() == 0.0));
    }
}
