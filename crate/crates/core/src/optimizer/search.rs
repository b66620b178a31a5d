//! Derivative-free minimizers: multistart Hooke–Jeeves on the unit cube and
//! golden-section search on an interval.

use rand::Rng;

/// Settings for [`minimize_unit_cube`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSettings {
    /// Number of starts; the first is the cube centre, the rest are uniform draws.
    pub starts: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Evaluation budget per start.
    pub max_evals: usize,
}

impl Default for PatternSettings {
    fn default() -> Self {
        Self {
            starts: 6,
            initial_step: 0.25,
            min_step: 1e-7,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `f` over `[0, 1]^dim`. Non-finite values count as worse than any finite one.
pub fn minimize_unit_cube<F, R>(dim: usize, mut f: F, settings: &PatternSettings, rng: &mut R) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
    R: Rng,
{
    let centre = vec![0.5; dim];
    if dim == 0 {
        let value = f(&centre);
        return Minimum { x: centre, value, evals: 1 };
    }
    let mut best = Minimum {
        x: centre.clone(),
        value: f64::INFINITY,
        evals: 0,
    };
    for k in 0..settings.starts.max(1) {
        let start = if k == 0 {
            centre.clone()
        } else {
            (0..dim).map(|_| rng.gen::<f64>()).collect()
        };
        let m = hooke_jeeves(&mut f, start, settings);
        let evals = best.evals + m.evals;
        if better(m.value, best.value) {
            best = m;
        }
        best.evals = evals;
    }
    best
}

#[inline]
fn better(a: f64, b: f64) -> bool {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a < b,
        (true, false) => true,
        _ => false,
    }
}

fn hooke_jeeves<F: FnMut(&[f64]) -> f64>(f: &mut F, start: Vec<f64>, s: &PatternSettings) -> Minimum {
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut base = start;
    let mut f_base = eval(&base, &mut evals);
    let mut step = s.initial_step;
    while step >= s.min_step && evals < s.max_evals {
        let (mut x, mut fx) = explore(&mut eval, &base, f_base, step, &mut evals);
        if better(fx, f_base) {
            // accelerate along the improving direction while it keeps paying off
            loop {
                let pattern: Vec<f64> = x.iter().zip(&base).map(|(a, b)| (2.0 * a - b).clamp(0.0, 1.0)).collect();
                base = x;
                f_base = fx;
                if evals >= s.max_evals {
                    break;
                }
                let fp = eval(&pattern, &mut evals);
                let (x2, f2) = explore(&mut eval, &pattern, fp, step, &mut evals);
                if better(f2, f_base) {
                    x = x2;
                    fx = f2;
                } else {
                    break;
                }
            }
        } else {
            step *= 0.5;
        }
    }
    Minimum {
        x: base,
        value: f_base,
        evals,
    }
}

fn explore<E: FnMut(&[f64], &mut usize) -> f64>(
    eval: &mut E,
    p: &[f64],
    fp: f64,
    step: f64,
    evals: &mut usize,
) -> (Vec<f64>, f64) {
    let mut x = p.to_vec();
    let mut fx = fp;
    for i in 0..x.len() {
        let orig = x[i];
        let mut moved = false;
        for dir in [1.0, -1.0] {
            let cand = (orig + dir * step).clamp(0.0, 1.0);
            if cand == orig {
                continue;
            }
            x[i] = cand;
            let v = eval(&x, evals);
            if better(v, fx) {
                fx = v;
                moved = true;
                break;
            }
        }
        if !moved {
            x[i] = orig;
        }
    }
    (x, fx)
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F, tol: f64) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > tol * (1.0 + a.abs() + b.abs()) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // the interval ends are candidates too: the minimum may sit on a bound
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for e in [lo, hi] {
        let fe = f(e);
        if fe < best.1 {
            best = (e, fe);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finds_interior_quadratic_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = minimize_unit_cube(
            3,
            |x| (x[0] - 0.2).powi(2) + 3.0 * (x[1] - 0.7).powi(2) + (x[2] - 0.9).powi(2) + 0.5 * x[0] * x[1],
            &PatternSettings::default(),
            &mut rng,
        );
        // the coupled quadratic is stationary where both partials vanish
        assert!((m.x[2] - 0.9).abs() < 1e-5);
        let grad0 = 2.0 * (m.x[0] - 0.2) + 0.5 * m.x[1];
        let grad1 = 6.0 * (m.x[1] - 0.7) + 0.5 * m.x[0];
        assert!(grad0.abs() < 1e-4 && grad1.abs() < 1e-4, "{grad0} {grad1}");
    }

    #[test]
    fn respects_bounds_and_infeasible_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = minimize_unit_cube(
            2,
            |x| if x[0] + x[1] < 0.5 { f64::INFINITY } else { x[0] + 2.0 * x[1] },
            &PatternSettings::default(),
            &mut rng,
        );
        assert!(m.x[0] >= 0.0 && m.x[0] <= 1.0);
        assert!((m.value - 0.5).abs() < 1e-5, "{m:?}");
    }

    #[test]
    fn same_seed_same_result() {
        let f = |x: &[f64]| (x[0] - 0.3).abs() + (x[1] - 0.6).powi(2);
        let a = minimize_unit_cube(2, f, &PatternSettings::default(), &mut ChaCha8Rng::seed_from_u64(9));
        let b = minimize_unit_cube(2, f, &PatternSettings::default(), &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn golden_section_matches_dense_scan() {
        let f = |x: f64| 2.0 / x + 3.0 * x;
        let (x, fx) = golden_section(0.05, 5.0, f, 1e-10);
        assert!((x - (2.0f64 / 3.0).sqrt()).abs() < 1e-6);
        let scan = (0..=100_000)
            .map(|i| 0.05 + 4.95 * i as f64 / 100_000.0)
            .map(f)
            .fold(f64::INFINITY, f64::min);
        assert!(fx <= scan + 1e-9);
        let (xb, _) = golden_section(0.05, 0.5, f, 1e-10);
        assert_eq!(xb, 0.5);
    }
}
