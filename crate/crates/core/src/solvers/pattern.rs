use alloc::vec::Vec;

use super::{Evaluator, SolverError, SolverTrace, Space};
use crate::clock::Clock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternOptions {
    pub budget: usize,
}

impl Default for PatternOptions {
    fn default() -> Self {
        PatternOptions { budget: 200 }
    }
}

/// Coordinate pattern search. Steps start at a quarter of each span, the
/// first strict improvement is taken, and all steps halve after a sweep
/// without one.
pub fn pattern_search<F, E>(
    f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: &PatternOptions,
    clock: &dyn Clock,
) -> Result<SolverTrace, SolverError<E>>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let space = Space::new(bounds)?;
    let mut y = space.reduce(x0)?;
    if opts.budget == 0 {
        return Err(SolverError::Budget {
            budget: 0,
            required: 1,
        });
    }
    let n = space.dim();
    let mut ev = Evaluator::new(f, &space, clock, opts.budget);
    let mut fy = ev.eval(&y, 0)?.expect("budget checked");
    let mut steps: Vec<f64> = (0..n).map(|i| 0.25 * space.span(i)).collect();
    let mut iter = 0;
    'outer: while (0..n).any(|i| steps[i] >= 1e-6 * space.span(i)) {
        iter += 1;
        let mut improved = false;
        'sweep: for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut c = y.clone();
                c[i] = (y[i] + sign * steps[i]).clamp(space.lo[i], space.hi[i]);
                if c[i] == y[i] {
                    continue;
                }
                let Some(fc) = ev.eval(&c, iter)? else { break 'outer };
                if fc > fy {
                    y = c;
                    fy = fc;
                    improved = true;
                    break 'sweep;
                }
            }
        }
        if !improved {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    Ok(ev.trace)
}
