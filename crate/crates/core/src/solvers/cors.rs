//! Constrained optimization using response surfaces with a cubic RBF model.
//!
//! Each iteration maximizes the surrogate subject to keeping a distance of at
//! least `β·Δ` from every sample, where `Δ` estimates the largest gap in the
//! domain and `β` cycles through [`BETA_CYCLE`]. All distances are measured
//! after scaling the box to the unit cube.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rbf::{fit_surrogate, RbfSurrogate, SurrogateError};
use super::{distance, CorsStep, Evaluator, SolverError, SolverTrace, Space};
use crate::clock::Clock;
use crate::math::sqrt;

pub const BETA_CYCLE: [f64; 5] = [0.98, 0.6, 0.75, 0.2, 0.01];

/// Random starts for the gap estimate.
const GAP_STARTS: usize = 64;
/// Best pair midpoints refined in the gap estimate.
const GAP_MIDPOINTS: usize = 16;
/// Corners are scored in the gap estimate up to this dimension.
const GAP_CORNER_DIM: usize = 12;
/// Random candidates screened for the constrained search.
const CANDIDATES: usize = 400;
/// Local searches run per iteration.
const LOCAL_STARTS: usize = 10;
const LOCAL_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorsOptions {
    /// Total true evaluations, initial sites included. Initial sites are
    /// always evaluated even if there are more of them than the budget.
    pub budget: usize,
    pub seed: u64,
}

impl Default for CorsOptions {
    fn default() -> Self {
        CorsOptions {
            budget: 200,
            seed: 0,
        }
    }
}

/// Distance from `u` to its nearest sample, and that sample's index.
fn nearest(samples: &[Vec<f64>], u: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (k, s) in samples.iter().enumerate() {
        let d = distance(u, s);
        if d < best.0 {
            best = (d, k);
        }
    }
    best
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

fn clip_unit(u: &mut [f64]) {
    for v in u.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Pushes `u` away from its nearest sample in steps, keeping the gain.
fn ascend_gap(samples: &[Vec<f64>], mut u: Vec<f64>, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>) {
    let n = u.len();
    let (mut g, mut k) = nearest(samples, &u);
    let mut h = 0.1;
    for _ in 0..100 {
        if h < 1e-7 {
            break;
        }
        let mut dir: Vec<f64> = u.iter().zip(&samples[k]).map(|(a, b)| a - b).collect();
        let len = sqrt(dir.iter().map(|d| d * d).sum());
        if len == 0.0 {
            dir = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        }
        let len = sqrt(dir.iter().map(|d| d * d).sum()).max(f64::MIN_POSITIVE);
        let mut v: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + h * d / len).collect();
        clip_unit(&mut v);
        let (gv, kv) = nearest(samples, &v);
        if gv > g {
            u = v;
            g = gv;
            k = kv;
            h *= 1.5;
        } else {
            h *= 0.5;
        }
    }
    (g, u)
}

/// Approximates `Δ = max_u min_k ‖u − s_k‖` and returns it with its argmax.
fn estimate_gap(samples: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>) {
    let mut starts: Vec<Vec<f64>> = (0..GAP_STARTS).map(|_| random_point(rng, n)).collect();
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    for a in 0..samples.len() {
        for b in a + 1..samples.len() {
            let m: Vec<f64> = samples[a].iter().zip(&samples[b]).map(|(p, q)| 0.5 * (p + q)).collect();
            scored.push((nearest(samples, &m).0, m));
        }
    }
    if n <= GAP_CORNER_DIM {
        for c in 0..(1usize << n) {
            let m: Vec<f64> = (0..n).map(|i| ((c >> i) & 1) as f64).collect();
            scored.push((nearest(samples, &m).0, m));
        }
    }
    // stable sort keeps the enumeration order among ties
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    starts.extend(scored.into_iter().take(GAP_MIDPOINTS).map(|(_, m)| m));
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for s in starts {
        let (g, u) = ascend_gap(samples, s, rng);
        if g > best.0 {
            best = (g, u);
        }
    }
    best
}

/// Moves `u` out of the exclusion balls of radius `r`, then back into the
/// cube. Returns `None` if it is still infeasible after a few rounds.
fn project_feasible(samples: &[Vec<f64>], mut u: Vec<f64>, r: f64) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let (d, k) = nearest(samples, &u);
        if d >= r {
            return Some(u);
        }
        if d == 0.0 {
            return None;
        }
        let s = &samples[k];
        // land just outside the ball so rounding keeps it feasible
        let scale = r * (1.0 + 1e-9) / d;
        u = s.iter().zip(&u).map(|(c, p)| c + scale * (p - c)).collect();
        clip_unit(&mut u);
    }
    (nearest(samples, &u).0 >= r).then_some(u)
}

/// Projected gradient ascent on the surrogate that never leaves the
/// feasible set.
fn local_search(model: &RbfSurrogate, samples: &[Vec<f64>], mut u: Vec<f64>, r: f64) -> (f64, Vec<f64>) {
    let mut fu = model.eval(&u);
    let mut h = 0.05;
    for _ in 0..LOCAL_STEPS {
        if h < 1e-6 {
            break;
        }
        let g = model.gradient(&u);
        let len = sqrt(g.iter().map(|v| v * v).sum());
        if !(len > 0.0) || !len.is_finite() {
            break;
        }
        let mut v: Vec<f64> = u.iter().zip(&g).map(|(a, d)| a + h * d / len).collect();
        clip_unit(&mut v);
        let moved = match project_feasible(samples, v, r) {
            Some(v) => {
                let fv = model.eval(&v);
                (fv > fu).then_some((fv, v))
            }
            None => None,
        };
        match moved {
            Some((fv, v)) => {
                u = v;
                fu = fv;
                h *= 1.5;
            }
            None => h *= 0.5,
        }
    }
    (fu, u)
}

/// Maximizes the surrogate over points at least `r` from every sample.
fn constrained_max(
    model: &RbfSurrogate,
    samples: &[Vec<f64>],
    r: f64,
    gap_point: &[f64],
    best_site: &[f64],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<f64>> {
    let n = gap_point.len();
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::new();
    if nearest(samples, gap_point).0 >= r {
        pool.push((model.eval(gap_point), gap_point.to_vec()));
    }
    for i in 0..CANDIDATES {
        let u = if i % 2 == 0 {
            random_point(rng, n)
        } else {
            // perturbations around the incumbent, scaled to the radius
            let spread = (4.0 * r).max(0.02);
            let mut u: Vec<f64> = best_site
                .iter()
                .map(|c| c + spread * rng.gen_range(-1.0..1.0))
                .collect();
            clip_unit(&mut u);
            u
        };
        if let Some(u) = project_feasible(samples, u, r) {
            pool.push((model.eval(&u), u));
        }
    }
    if pool.is_empty() {
        return None;
    }
    pool.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (_, u) in pool.into_iter().take(LOCAL_STARTS) {
        let (fu, u) = local_search(model, samples, u, r);
        if best.as_ref().map_or(true, |b| fu > b.0) {
            best = Some((fu, u));
        }
    }
    best.map(|b| b.1)
}

/// CORS-RBF maximizer started from `initial` sites (at least `n + 1`
/// distinct ones). Returns when the budget is spent or no point at the
/// required distance from all samples remains.
pub fn cors_rbf<F, E>(
    f: F,
    initial: &[Vec<f64>],
    bounds: &[(f64, f64)],
    opts: &CorsOptions,
    clock: &dyn Clock,
) -> Result<SolverTrace, SolverError<E>>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let space = Space::new(bounds)?;
    let n = space.dim();
    let min_sep = 1e-9 * sqrt(n as f64);
    let mut units: Vec<Vec<f64>> = Vec::new();
    for x in initial {
        let u = space.to_unit(&space.reduce(x)?);
        if units.iter().all(|s| distance(s, &u) > min_sep) {
            units.push(u);
        }
    }
    if units.len() < n + 1 {
        return Err(SolverError::InitialSites {
            got: units.len(),
            required: n + 1,
        });
    }
    let mut ev = Evaluator::new(f, &space, clock, opts.budget.max(units.len()));
    let mut samples = Vec::with_capacity(ev.budget);
    let mut values = Vec::with_capacity(ev.budget);
    for u in units {
        let v = ev.eval(&space.from_unit(&u), 0)?.expect("budget covers initial sites");
        samples.push(u);
        values.push(v);
    }
    if n == 0 {
        return Ok(ev.trace);
    }
    let mut model = fit_surrogate(&samples, &values)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut iter = 0;
    while !ev.exhausted() {
        iter += 1;
        let (delta, gap_point) = estimate_gap(&samples, n, &mut rng);
        let best_site = samples[ev.trace.best.expect("initial sites evaluated")].clone();
        let mut chosen = None;
        for phase in 0..BETA_CYCLE.len() {
            let beta = BETA_CYCLE[(iter - 1 + phase) % BETA_CYCLE.len()];
            let r = beta * delta;
            if r <= min_sep {
                continue;
            }
            if let Some(u) = constrained_max(&model, &samples, r, &gap_point, &best_site, &mut rng) {
                chosen = Some((beta, u));
                break;
            }
        }
        let Some((beta, u)) = chosen else { break };
        let separation = nearest(&samples, &u).0;
        let step = CorsStep {
            beta,
            delta,
            separation,
        };
        let Some(v) = ev.eval_with(&space.from_unit(&u), iter, Some(step))? else { break };
        match model.add_site(&u, v) {
            Ok(()) => {}
            Err(SurrogateError::Singular(_)) => {
                // retry once at a slightly moved site; drop the sample from
                // the model if that fails too
                let jitter: Vec<f64> = u.iter().map(|c| (c + 1e-6 * rng.gen_range(-1.0..1.0)).clamp(0.0, 1.0)).collect();
                let _ = model.add_site(&jitter, v);
            }
            Err(e) => return Err(e.into()),
        }
        samples.push(u);
        values.push(v);
    }
    Ok(ev.trace)
}
