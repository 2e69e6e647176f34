//! Cubic radial basis function interpolant with a linear polynomial tail.

use alloc::vec::Vec;

use super::distance;
use super::linalg::{mat_vec, LinalgError, Lu};
use crate::math::sqrt;

const REFACTOR_RESIDUAL: f64 = 1e-6;
const REFINEMENT_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurrogateError {
    #[error("{got} sites given, at least {required} needed")]
    TooFewSites { got: usize, required: usize },
    #[error("site {index} has {got} coordinates, expected {expected}")]
    Dimension { index: usize, expected: usize, got: usize },
    #[error("sites {first} and {second} coincide")]
    DuplicateSite { first: usize, second: usize },
    #[error("sample value {index} is not finite")]
    NonFinite { index: usize },
    #[error("interpolation system is near-singular")]
    Singular(#[from] LinalgError),
    #[error("{sites} sites and {values} values")]
    Length { sites: usize, values: usize },
}

#[inline]
fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn phi(r: f64) -> f64 {
    r * r * r
}

/// `f̃(x) = Σ λ_k ‖x − s_k‖³ + c_0 + Σ c_i x_i`.
///
/// The interpolation system orders the tail unknowns first and one row per
/// site after them, so adding a site borders the existing factorization.
#[derive(Debug, Clone)]
pub struct RbfSurrogate {
    n: usize,
    sites: Vec<Vec<f64>>,
    values: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    lu: Lu,
    /// Tail coefficients `c_0..c_n` followed by kernel weights.
    coef: Vec<f64>,
    min_separation: f64,
    refactorizations: usize,
}

/// Fits the interpolant through `(sites[k], values[k])`. Needs at least
/// `n + 1` affinely independent sites; sites closer than 1e-9 times the
/// larger of 1 and their bounding-box diagonal count as duplicates.
pub fn fit_surrogate(sites: &[Vec<f64>], values: &[f64]) -> Result<RbfSurrogate, SurrogateError> {
    let n = sites.first().map_or(0, Vec::len);
    if sites.len() != values.len() {
        return Err(SurrogateError::Length {
            sites: sites.len(),
            values: values.len(),
        });
    }
    if sites.len() < n + 1 || sites.is_empty() {
        return Err(SurrogateError::TooFewSites {
            got: sites.len(),
            required: n + 1,
        });
    }
    for (index, s) in sites.iter().enumerate() {
        if s.len() != n {
            return Err(SurrogateError::Dimension {
                index,
                expected: n,
                got: s.len(),
            });
        }
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(SurrogateError::NonFinite { index });
    }
    let diag = sqrt(
        (0..n)
            .map(|i| {
                let lo = sites.iter().map(|s| s[i]).fold(f64::INFINITY, f64::min);
                let hi = sites.iter().map(|s| s[i]).fold(f64::NEG_INFINITY, f64::max);
                (hi - lo) * (hi - lo)
            })
            .sum(),
    );
    let min_separation = 1e-9 * diag.max(1.0);
    for second in 1..sites.len() {
        for first in 0..second {
            if distance(&sites[first], &sites[second]) <= min_separation {
                return Err(SurrogateError::DuplicateSite { first, second });
            }
        }
    }
    let m = n + 1 + sites.len();
    let mut matrix = alloc::vec![alloc::vec![0.0; m]; m];
    for (k, s) in sites.iter().enumerate() {
        let row = n + 1 + k;
        matrix[row][0] = 1.0;
        matrix[0][row] = 1.0;
        for i in 0..n {
            matrix[row][1 + i] = s[i];
            matrix[1 + i][row] = s[i];
        }
        for (l, t) in sites.iter().enumerate() {
            matrix[row][n + 1 + l] = phi(distance(s, t));
        }
    }
    let lu = Lu::factor(&matrix)?;
    let mut surrogate = RbfSurrogate {
        n,
        sites: sites.to_vec(),
        values: values.to_vec(),
        matrix,
        lu,
        coef: Vec::new(),
        min_separation,
        refactorizations: 0,
    };
    surrogate.solve()?;
    Ok(surrogate)
}

impl RbfSurrogate {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Kernel weights `λ_k`.
    pub fn weights(&self) -> &[f64] {
        &self.coef[self.n + 1..]
    }

    /// Tail coefficients `c_0, c_1..c_n`.
    pub fn tail(&self) -> &[f64] {
        &self.coef[..self.n + 1]
    }

    /// How often a bordered update fell back to a full factorization.
    pub fn refactorizations(&self) -> usize {
        self.refactorizations
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let tail = self.coef[0] + (0..self.n).map(|i| self.coef[1 + i] * x[i]).sum::<f64>();
        tail + self
            .sites
            .iter()
            .zip(self.weights())
            .map(|(s, w)| w * phi(distance(x, s)))
            .sum::<f64>()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self.coef[1..=self.n].to_vec();
        for (s, w) in self.sites.iter().zip(self.weights()) {
            let r = distance(x, s);
            for i in 0..self.n {
                g[i] += w * 3.0 * r * (x[i] - s[i]);
            }
        }
        g
    }

    /// Largest `|f̃(s_k) − v_k| / (1 + |v_k|)` over the samples.
    pub fn max_relative_error(&self) -> f64 {
        self.sites
            .iter()
            .zip(&self.values)
            .map(|(s, v)| (self.eval(s) - v).abs() / (1.0 + v.abs()))
            .fold(0.0, f64::max)
    }

    /// Adds a sample, updating the factorization by bordering. Falls back to
    /// a full factorization when the update is unstable or inaccurate.
    pub fn add_site(&mut self, site: &[f64], value: f64) -> Result<(), SurrogateError> {
        if site.len() != self.n {
            return Err(SurrogateError::Dimension {
                index: self.sites.len(),
                expected: self.n,
                got: site.len(),
            });
        }
        if !value.is_finite() {
            return Err(SurrogateError::NonFinite {
                index: self.sites.len(),
            });
        }
        if let Some(first) = self.sites.iter().position(|s| distance(s, site) <= self.min_separation) {
            return Err(SurrogateError::DuplicateSite {
                first,
                second: self.sites.len(),
            });
        }
        let mut column = Vec::with_capacity(self.matrix.len());
        column.push(1.0);
        column.extend_from_slice(site);
        column.extend(self.sites.iter().map(|s| phi(distance(s, site))));

        let mut lu = self.lu.clone();
        let bordered = lu.border(&column, &column, 0.0).is_ok();
        let mut matrix = self.matrix.clone();
        for (row, c) in matrix.iter_mut().zip(&column) {
            row.push(*c);
        }
        column.push(0.0);
        matrix.push(column);
        let lu = if bordered {
            lu
        } else {
            self.refactorizations += 1;
            Lu::factor(&matrix)?
        };
        let previous = (
            core::mem::replace(&mut self.matrix, matrix),
            core::mem::replace(&mut self.lu, lu),
        );
        self.sites.push(site.to_vec());
        self.values.push(value);
        if let Err(e) = self.solve() {
            self.sites.pop();
            self.values.pop();
            self.matrix = previous.0;
            self.lu = previous.1;
            self.solve().expect("previous system was solvable");
            return Err(e);
        }
        Ok(())
    }

    fn rhs(&self) -> Vec<f64> {
        let mut b = alloc::vec![0.0; self.n + 1];
        b.extend_from_slice(&self.values);
        b
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, x).iter().zip(b).map(|(ax, b)| b - ax).collect()
    }

    /// Solves with a few steps of iterative refinement; refactorizes when the
    /// residual stays large.
    fn solve(&mut self) -> Result<(), SurrogateError> {
        let b = self.rhs();
        let bound = REFACTOR_RESIDUAL * (1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        for attempt in 0..2 {
            let mut x = self.lu.solve(&b);
            let mut r = self.residual(&x, &b);
            let mut err = max_abs(&r);
            // iterative refinement; stops once the residual stops shrinking
            for _ in 0..REFINEMENT_STEPS {
                let dx = self.lu.solve(&r);
                let next: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
                let next_r = self.residual(&next, &b);
                let next_err = max_abs(&next_r);
                if !(next_err < err) {
                    break;
                }
                (x, r, err) = (next, next_r, next_err);
            }
            if err <= bound && x.iter().all(|v| v.is_finite()) {
                self.coef = x;
                return Ok(());
            }
            if attempt == 0 {
                self.refactorizations += 1;
                self.lu = Lu::factor(&self.matrix)?;
            }
        }
        Err(SurrogateError::Singular(LinalgError::Singular {
            pivot: self.lu.min_relative_pivot(),
            scale: 1.0,
        }))
    }
}
