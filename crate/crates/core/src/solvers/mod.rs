//! Derivative-free maximizers over box domains.
//!
//! Every solver maximizes `f` and records each true evaluation in a
//! [`SolverTrace`]. Minimization problems are passed in negated. Coordinates
//! whose bounds have zero width are held fixed and hidden from the solver.

mod cors;
mod linalg;
mod nelder_mead;
mod pattern;
mod rbf;

pub use cors::{cors_rbf, CorsOptions, BETA_CYCLE};
pub use linalg::{Lu, LinalgError};
pub use nelder_mead::{nelder_mead, NelderMeadOptions};
pub use pattern::{pattern_search, PatternOptions};
pub use rbf::{fit_surrogate, RbfSurrogate, SurrogateError};

use alloc::vec::Vec;

use crate::clock::Clock;
use crate::math::sqrt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError<E> {
    #[error("objective evaluation failed: {0}")]
    Objective(E),
    #[error("start point has {got} entries, bounds have {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("bound {index} is invalid: [{lo}, {hi}]")]
    Bounds { index: usize, lo: f64, hi: f64 },
    #[error("start point component {index} = {value} lies outside its bounds")]
    StartOutOfBounds { index: usize, value: f64 },
    #[error("budget {budget} is below the {required} evaluations the method needs")]
    Budget { budget: usize, required: usize },
    #[error("{got} distinct initial sites given, at least {required} needed")]
    InitialSites { got: usize, required: usize },
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

/// Distance-constraint data of a CORS iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorsStep {
    /// Ratio taken from the cycle.
    pub beta: f64,
    /// Estimated largest distance from any point to its nearest sample.
    pub delta: f64,
    /// Smallest distance from the chosen site to any earlier sample. All
    /// distances are measured in coordinates scaled to the unit cube.
    pub separation: f64,
}

/// One true objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Solver iteration; 0 for start-up evaluations.
    pub iter: usize,
    /// Cumulative evaluation count including this one.
    pub evals: usize,
    pub x: Vec<f64>,
    pub value: f64,
    pub millis: f64,
    pub cors: Option<CorsStep>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    /// Index of the best record so far (first one on ties).
    pub best: Option<usize>,
}

impl SolverTrace {
    pub fn evals(&self) -> usize {
        self.records.len()
    }

    pub fn best_record(&self) -> Option<&TraceRecord> {
        self.best.map(|i| &self.records[i])
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best_record().map(|r| r.value)
    }

    /// Best value among the first `i + 1` records.
    pub fn best_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.records.len());
        let mut best = f64::NEG_INFINITY;
        for r in &self.records {
            if r.value > best {
                best = r.value;
            }
            out.push(best);
        }
        out
    }

    /// Number of evaluations after which the best value first reached
    /// `target`, if it did.
    pub fn evals_to_reach(&self, target: f64) -> Option<usize> {
        self.records.iter().find(|r| r.value >= target).map(|r| r.evals)
    }

    fn push(&mut self, record: TraceRecord) {
        let better = match self.best {
            None => true,
            Some(b) => record.value > self.records[b].value,
        };
        self.records.push(record);
        if better {
            self.best = Some(self.records.len() - 1);
        }
    }
}

/// Checks bounds and splits coordinates into free ones and pinned ones.
#[derive(Debug, Clone)]
pub(crate) struct Space {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Indices of coordinates with positive span.
    pub active: Vec<usize>,
    pub full: Vec<f64>,
}

impl Space {
    pub fn new<E>(bounds: &[(f64, f64)]) -> Result<Self, SolverError<E>> {
        for (index, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(SolverError::Bounds { index, lo, hi });
            }
        }
        let active: Vec<usize> = (0..bounds.len()).filter(|&i| bounds[i].1 > bounds[i].0).collect();
        Ok(Space {
            lo: active.iter().map(|&i| bounds[i].0).collect(),
            hi: active.iter().map(|&i| bounds[i].1).collect(),
            active,
            full: bounds.iter().map(|b| b.0).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn span(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn diagonal(&self) -> f64 {
        sqrt((0..self.dim()).map(|i| self.span(i) * self.span(i)).sum())
    }

    pub fn clip(&self, y: &mut [f64]) {
        for (i, v) in y.iter_mut().enumerate() {
            *v = v.clamp(self.lo[i], self.hi[i]);
        }
    }

    /// Reduced coordinates of a full start point, validated against bounds.
    pub fn reduce<E>(&self, x: &[f64]) -> Result<Vec<f64>, SolverError<E>> {
        if x.len() != self.full.len() {
            return Err(SolverError::Dimension {
                expected: self.full.len(),
                got: x.len(),
            });
        }
        for (index, &value) in x.iter().enumerate() {
            let lo = self.full[index];
            let hi = match self.active.iter().position(|&a| a == index) {
                Some(k) => self.hi[k],
                None => lo,
            };
            if !(value >= lo && value <= hi) {
                return Err(SolverError::StartOutOfBounds { index, value });
            }
        }
        Ok(self.active.iter().map(|&i| x[i]).collect())
    }

    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.full.clone();
        for (k, &i) in self.active.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }

    pub fn to_unit(&self, y: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| (y[i] - self.lo[i]) / self.span(i)).collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (self.lo[i] + u[i] * self.span(i)).clamp(self.lo[i], self.hi[i]))
            .collect()
    }
}

/// Wraps the objective with budget accounting, timing and trace recording.
pub(crate) struct Evaluator<'a, F> {
    f: F,
    space: &'a Space,
    clock: &'a dyn Clock,
    pub budget: usize,
    pub trace: SolverTrace,
}

impl<'a, F, E> Evaluator<'a, F>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    pub fn new(f: F, space: &'a Space, clock: &'a dyn Clock, budget: usize) -> Self {
        Evaluator {
            f,
            space,
            clock,
            budget,
            trace: SolverTrace::default(),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.trace.evals() >= self.budget
    }

    /// Evaluates at reduced coordinates `y`; `None` once the budget is spent.
    pub fn eval(&mut self, y: &[f64], iter: usize) -> Result<Option<f64>, SolverError<E>> {
        self.eval_with(y, iter, None)
    }

    pub fn eval_with(
        &mut self,
        y: &[f64],
        iter: usize,
        cors: Option<CorsStep>,
    ) -> Result<Option<f64>, SolverError<E>> {
        if self.exhausted() {
            return Ok(None);
        }
        let x = self.space.expand(y);
        let start = self.clock.now_millis();
        let value = (self.f)(&x).map_err(SolverError::Objective)?;
        let millis = self.clock.now_millis() - start;
        let evals = self.trace.evals() + 1;
        self.trace.push(TraceRecord {
            iter,
            evals,
            x,
            value,
            millis,
            cors,
        });
        Ok(Some(value))
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}
