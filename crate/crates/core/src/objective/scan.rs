use alloc::vec::Vec;

use super::{ObjectiveError, Problem};
use crate::clock::Clock;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub x: Vec<f64>,
    pub value: f64,
    pub millis: f64,
}

/// Exhaustive evaluation of a lattice, in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// True when larger values are better (coverage).
    pub maximize: bool,
}

impl ScanTable {
    /// Index of the best row; the first one wins ties.
    pub fn best(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, r) in self.rows.iter().enumerate() {
            let better = match best {
                None => true,
                Some(b) => {
                    let v = self.rows[b].value;
                    if self.maximize {
                        r.value > v
                    } else {
                        r.value < v
                    }
                }
            };
            if better {
                best = Some(i);
            }
        }
        best
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        1 => alloc::vec![0.5 * (lo + hi)],
        _ => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// Cartesian lattice of per-scalar linspaces, last scalar varying fastest.
/// A single step samples the midpoint of the range.
pub fn lattice_points(bounds: &[(f64, f64)], steps: &[usize]) -> Result<Vec<Vec<f64>>, ObjectiveError> {
    if steps.len() != bounds.len() || steps.contains(&0) {
        return Err(ObjectiveError::ScanSteps);
    }
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .zip(steps)
        .map(|(&(lo, hi), &s)| linspace(lo, hi, s))
        .collect();
    let total: usize = steps.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = alloc::vec![0usize; steps.len()];
    for _ in 0..total {
        out.push(idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect());
        for d in (0..idx.len()).rev() {
            idx[d] += 1;
            if idx[d] < steps[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

/// Number of lattice points for the given steps, saturating on overflow.
pub fn lattice_size(steps: &[usize]) -> usize {
    steps.iter().fold(1usize, |a, &s| a.saturating_mul(s))
}

/// Evaluates `problem` on every lattice point. Refuses when the lattice has
/// more points than `budget`.
pub fn grid_scan(
    problem: &Problem,
    steps: &[usize],
    budget: usize,
    clock: &dyn Clock,
) -> Result<ScanTable, ObjectiveError> {
    let bounds = problem.domain().bounds();
    if steps.len() != bounds.len() || steps.contains(&0) {
        return Err(ObjectiveError::ScanSteps);
    }
    let required = lattice_size(steps);
    if required > budget {
        return Err(ObjectiveError::ScanBudget { required, budget });
    }
    let mut rows = Vec::with_capacity(required);
    for x in lattice_points(&bounds, steps)? {
        let start = clock.now_millis();
        let value = problem.evaluate(&x)?;
        let millis = clock.now_millis() - start;
        rows.push(ScanRow { x, value, millis });
    }
    Ok(ScanTable {
        rows,
        maximize: problem.spec().sense() > 0.0,
    })
}
