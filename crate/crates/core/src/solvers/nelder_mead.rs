use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{distance, Evaluator, SolverError, SolverTrace, Space};
use crate::clock::Clock;
use crate::math::sqrt;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
/// Initial and re-initialization step, as a fraction of each span.
const STEP: f64 = 0.05;
const DIAMETER_TOL: f64 = 1e-6;
/// Normalized volume below which the simplex counts as degenerate.
const DEGENERATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NelderMeadOptions {
    pub budget: usize,
    /// When set, the initial step along each axis points in a random
    /// direction drawn from this seed instead of always upward.
    pub seed: Option<u64>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            budget: 200,
            seed: None,
        }
    }
}

struct Vertex {
    y: Vec<f64>,
    f: f64,
}

/// Simplex steps of 5% span from `base`, pointing into the box.
fn axis_steps(space: &Space, base: &[f64], signs: &[f64]) -> Vec<Vec<f64>> {
    (0..space.dim())
        .map(|i| {
            let step = STEP * space.span(i);
            let mut y = base.to_vec();
            let up = base[i] + signs[i] * step;
            y[i] = if up >= space.lo[i] && up <= space.hi[i] {
                up
            } else {
                base[i] - signs[i] * step
            };
            space.clip(&mut y);
            y
        })
        .collect()
}

/// Ratio of the simplex volume to the product of its edge lengths, with edges
/// scaled by the bound spans. Zero for a flat simplex.
fn normalized_volume(space: &Space, simplex: &[Vertex]) -> f64 {
    let n = space.dim();
    let base = &simplex[0].y;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut ratio = 1.0;
    for v in &simplex[1..] {
        let mut e: Vec<f64> = (0..n).map(|i| (v.y[i] - base[i]) / space.span(i)).collect();
        let len = sqrt(e.iter().map(|a| a * a).sum());
        if len == 0.0 {
            return 0.0;
        }
        for q in &basis {
            let d: f64 = e.iter().zip(q).map(|(a, b)| a * b).sum();
            for (a, b) in e.iter_mut().zip(q) {
                *a -= d * b;
            }
        }
        let r = sqrt(e.iter().map(|a| a * a).sum());
        ratio *= r / len;
        if r == 0.0 {
            return 0.0;
        }
        basis.push(e.iter().map(|a| a / r).collect());
    }
    ratio
}

fn order(simplex: &mut [Vertex]) {
    // stable: earlier vertices win ties
    simplex.sort_by(|a, b| b.f.partial_cmp(&a.f).unwrap_or(core::cmp::Ordering::Equal));
}

/// Bounded Nelder–Mead maximizer. Candidates are clipped to the box; a
/// collapsed simplex is rebuilt around its best vertex.
pub fn nelder_mead<F, E>(
    f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: &NelderMeadOptions,
    clock: &dyn Clock,
) -> Result<SolverTrace, SolverError<E>>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let space = Space::new(bounds)?;
    let y0 = space.reduce(x0)?;
    let n = space.dim();
    if opts.budget < n + 1 {
        return Err(SolverError::Budget {
            budget: opts.budget,
            required: n + 1,
        });
    }
    let mut ev = Evaluator::new(f, &space, clock, opts.budget);
    let signs: Vec<f64> = match opts.seed {
        None => alloc::vec![1.0; n],
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
        }
    };

    let f0 = ev.eval(&y0, 0)?.expect("budget checked");
    let mut simplex = alloc::vec![Vertex { y: y0.clone(), f: f0 }];
    for y in axis_steps(&space, &y0, &signs) {
        let f = ev.eval(&y, 0)?.expect("budget checked");
        simplex.push(Vertex { y, f });
    }
    if n == 0 {
        return Ok(ev.trace);
    }
    let tol = DIAMETER_TOL * space.diagonal();
    let mut iter = 0;
    'outer: loop {
        order(&mut simplex);
        let diameter = simplex[1..]
            .iter()
            .map(|v| distance(&v.y, &simplex[0].y))
            .fold(0.0, f64::max);
        if diameter < tol || ev.exhausted() {
            break;
        }
        iter += 1;
        if normalized_volume(&space, &simplex) < DEGENERATE {
            let best = simplex.swap_remove(0);
            let mut fresh = alloc::vec![];
            for y in axis_steps(&space, &best.y, &signs) {
                match ev.eval(&y, iter)? {
                    Some(f) => fresh.push(Vertex { y, f }),
                    None => break 'outer,
                }
            }
            simplex = fresh;
            simplex.insert(0, best);
            continue;
        }

        let worst = &simplex[n];
        let mut centroid = alloc::vec![0.0; n];
        for v in &simplex[..n] {
            for (c, a) in centroid.iter_mut().zip(&v.y) {
                *c += a / n as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            let mut y: Vec<f64> = centroid.iter().zip(from).map(|(c, w)| c + t * (c - w)).collect();
            space.clip(&mut y);
            y
        };
        let (f_best, f_second, f_worst) = (simplex[0].f, simplex[n - 1].f, worst.f);

        let yr = along(REFLECT, &worst.y);
        let Some(fr) = ev.eval(&yr, iter)? else { break };
        let replacement = if fr > f_best {
            let ye = along(EXPAND * REFLECT, &worst.y);
            let Some(fe) = ev.eval(&ye, iter)? else { break };
            Some(if fe > fr { Vertex { y: ye, f: fe } } else { Vertex { y: yr, f: fr } })
        } else if fr > f_second {
            Some(Vertex { y: yr, f: fr })
        } else if fr > f_worst {
            let yc = along(CONTRACT * REFLECT, &worst.y);
            let Some(fc) = ev.eval(&yc, iter)? else { break };
            (fc >= fr).then_some(Vertex { y: yc, f: fc })
        } else {
            let yc = along(-CONTRACT, &worst.y);
            let Some(fc) = ev.eval(&yc, iter)? else { break };
            (fc > f_worst).then_some(Vertex { y: yc, f: fc })
        };
        match replacement {
            Some(v) => simplex[n] = v,
            None => {
                let best = simplex[0].y.clone();
                for v in simplex[1..].iter_mut() {
                    let mut y: Vec<f64> = best.iter().zip(&v.y).map(|(b, a)| b + SHRINK * (a - b)).collect();
                    space.clip(&mut y);
                    match ev.eval(&y, iter)? {
                        Some(f) => *v = Vertex { y, f },
                        None => break 'outer,
                    }
                }
            }
        }
    }
    Ok(ev.trace)
}
