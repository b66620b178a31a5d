//! One-dimensional sweep with the trailing-average stop rule.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// `+∞` marks an infeasible iterate.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    /// Index into `points` of the cheapest feasible iterate.
    pub best: Option<usize>,
    /// True if the stop rule fired; false if the values ran out first.
    pub stopped: bool,
}

impl SweepOutcome {
    pub fn best_point(&self) -> Option<SweepPoint> {
        self.best.map(|i| self.points[i])
    }
}

/// Evaluates `values` in order and stops at the first feasible cost above the mean of
/// the previous `window` feasible costs, or at the first infeasible iterate after a
/// feasible one. Returns the cheapest iterate seen.
pub fn run_sweep<I, F>(values: I, window: usize, mut eval: F) -> SweepOutcome
where
    I: IntoIterator<Item = f64>,
    F: FnMut(f64) -> f64,
{
    let mut out = SweepOutcome::default();
    let mut feasible: Vec<f64> = Vec::new();
    for value in values {
        let cost = eval(value);
        let cost = if cost.is_nan() { f64::INFINITY } else { cost };
        out.points.push(SweepPoint { value, cost });
        let idx = out.points.len() - 1;
        if !cost.is_finite() {
            if !feasible.is_empty() {
                out.stopped = true;
                break;
            }
            continue;
        }
        if out.best.map_or(true, |b| cost < out.points[b].cost) {
            out.best = Some(idx);
        }
        let stop = feasible.len() >= window && {
            let tail = &feasible[feasible.len() - window..];
            cost > tail.iter().sum::<f64>() / window as f64
        };
        feasible.push(cost);
        if stop {
            out.stopped = true;
            break;
        }
    }
    out
}

/// `start, start·g, start·g², …` up to `max`.
pub(crate) fn geometric(start: f64, growth: f64, max: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = start;
    while x <= max * (1.0 + 1e-12) {
        v.push(x);
        x *= growth;
    }
    v
}

/// `start, start+step, …` up to `max`, computed without accumulating rounding.
pub(crate) fn arithmetic(start: f64, step: f64, max: f64) -> Vec<f64> {
    (0..)
        .map(|k| start + step * k as f64)
        .take_while(|&x| x <= max + 1e-9)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn convex_curve_returns_discrete_minimizer() {
        let values = arithmetic(3.0, 0.5, 24.0);
        let f = |r: f64| (r - 7.3).powi(2) + 10.0;
        let out = run_sweep(values.clone(), 3, f);
        assert!(out.stopped);
        let exact = values.iter().copied().min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        assert_eq!(out.best_point().unwrap().value, exact);
        assert_eq!(exact, 7.5);
    }

    #[test]
    fn leading_infeasible_iterates_are_skipped() {
        let out = run_sweep(geometric(100.0, 1.1, 5000.0), 3, |q| {
            if q < 170.0 {
                f64::INFINITY
            } else {
                1e4 / q + q
            }
        });
        let best = out.best_point().unwrap();
        // the cost rises over the feasible range, so the first feasible Q0 wins
        assert!(best.value >= 170.0 && best.value < 170.0 * 1.1);
        assert!(out.stopped);
    }

    #[test]
    fn exhausted_without_feasible_point() {
        let out = run_sweep([1.0, 2.0, 3.0], 3, |_| f64::INFINITY);
        assert_eq!(out.best, None);
        assert!(!out.stopped);
        assert_eq!(out.points.len(), 3);
    }

    #[test]
    fn infeasible_after_feasible_stops() {
        let out = run_sweep([1.0, 2.0, 3.0, 4.0], 3, |x| if x > 2.5 { f64::INFINITY } else { -x });
        assert!(out.stopped);
        assert_eq!(out.points.len(), 3);
        assert_eq!(out.best_point().unwrap().value, 2.0);
    }

    #[test]
    fn grids() {
        assert_eq!(arithmetic(3.0, 0.5, 4.0), vec![3.0, 3.5, 4.0]);
        let g = geometric(100.0, 1.1, 130.0);
        assert_eq!(g.len(), 3);
        assert!((g[2] - 121.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn never_returns_an_iterate_above_its_trailing_mean(
            costs in proptest::collection::vec(0.0f64..100.0, 1..40),
            window in 1usize..5,
        ) {
            let c = costs.clone();
            let out = run_sweep((0..costs.len()).map(|i| i as f64), window, |v| c[v as usize]);
            if let Some(b) = out.best {
                let prior: Vec<f64> = out.points[..b].iter().map(|p| p.cost).collect();
                if prior.len() >= window {
                    let mean = prior[prior.len() - window..].iter().sum::<f64>() / window as f64;
                    prop_assert!(out.points[b].cost <= mean);
                }
                prop_assert!(out.points.iter().all(|p| p.cost >= out.points[b].cost));
            }
        }
    }
}
