//! Dense LU factorization with partial pivoting, extendable by one bordered
//! row and column at a time.

use alloc::vec::Vec;

/// Pivots smaller than this times the largest matrix entry count as zero.
const PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e}, scale {scale:e})")]
    Singular { pivot: f64, scale: f64 },
}

/// `P·A = L·U`, stored as a square array of rows: `L` strictly below the
/// diagonal (unit diagonal implied), `U` on and above it.
#[derive(Debug, Clone, PartialEq)]
pub struct Lu {
    rows: Vec<Vec<f64>>,
    /// `perm[i]` is the row of `A` stored in row `i`.
    perm: Vec<usize>,
    scale: f64,
}

fn max_abs(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl Lu {
    pub fn factor(a: &[Vec<f64>]) -> Result<Lu, LinalgError> {
        let n = a.len();
        let scale = max_abs(a).max(f64::MIN_POSITIVE);
        let mut rows: Vec<Vec<f64>> = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if rows[i][k].abs() > rows[p][k].abs() {
                    p = i;
                }
            }
            let pivot = rows[p][k];
            if pivot.abs() <= PIVOT_TOL * scale {
                return Err(LinalgError::Singular {
                    pivot: pivot.abs(),
                    scale,
                });
            }
            rows.swap(k, p);
            perm.swap(k, p);
            let (top, bottom) = rows.split_at_mut(k + 1);
            let pr = &top[k];
            for r in bottom.iter_mut() {
                let m = r[k] / pivot;
                r[k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        r[j] -= m * pr[j];
                    }
                }
            }
        }
        Ok(Lu { rows, perm, scale })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Smallest pivot magnitude relative to the largest matrix entry.
    pub fn min_relative_pivot(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.rows[i][i].abs())
            .fold(f64::INFINITY, f64::min)
            / self.scale
    }

    fn forward(&self, b: &mut [f64]) {
        for i in 0..b.len() {
            let s: f64 = (0..i).map(|j| self.rows[i][j] * b[j]).sum();
            b[i] -= s;
        }
    }

    fn backward(&self, b: &mut [f64]) {
        for i in (0..b.len()).rev() {
            let s: f64 = (i + 1..b.len()).map(|j| self.rows[i][j] * b[j]).sum();
            b[i] = (b[i] - s) / self.rows[i][i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    /// Extends the factorization of `A` to that of `[[A, c], [r, d]]`
    /// without pivoting on the new row. Fails when the new pivot is too
    /// small, in which case the caller should refactorize.
    pub fn border(&mut self, c: &[f64], r: &[f64], d: f64) -> Result<(), LinalgError> {
        let n = self.dim();
        // L u = P c
        let mut u: Vec<f64> = self.perm.iter().map(|&p| c[p]).collect();
        self.forward(&mut u);
        // Uᵀ l = r
        let mut l = r.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.rows[j][i] * l[j]).sum();
            l[i] = (l[i] - s) / self.rows[i][i];
        }
        let delta = d - l.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        let scale = self
            .scale
            .max(c.iter().chain(r).fold(d.abs(), |m, v| m.max(v.abs())));
        if delta.abs() <= PIVOT_TOL * scale {
            return Err(LinalgError::Singular {
                pivot: delta.abs(),
                scale,
            });
        }
        for (row, ui) in self.rows.iter_mut().zip(&u) {
            row.push(*ui);
        }
        l.push(delta);
        self.rows.push(l);
        self.perm.push(n);
        self.scale = scale;
        Ok(())
    }
}

pub(crate) fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    }

    fn residual(a: &[Vec<f64>], x: &[f64], b: &[f64]) -> f64 {
        mat_vec(a, x)
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn solves_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 20] {
            let a = random(n, &mut rng);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = Lu::factor(&a).unwrap().solve(&b);
            assert!(residual(&a, &x, &b) < 1e-10);
        }
    }

    #[test]
    fn zero_leading_block_needs_pivoting() {
        let a = alloc::vec![
            alloc::vec![0.0, 1.0, 1.0],
            alloc::vec![1.0, 0.0, 2.0],
            alloc::vec![1.0, 2.0, 0.0],
        ];
        let b = [1.0, 2.0, 3.0];
        let x = Lu::factor(&a).unwrap().solve(&b);
        assert!(residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = alloc::vec![alloc::vec![1.0, 2.0], alloc::vec![2.0, 4.0]];
        assert!(matches!(Lu::factor(&a), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn bordered_update_matches_full_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let full = random(8, &mut rng);
        let head: Vec<Vec<f64>> = full[..5].iter().map(|r| r[..5].to_vec()).collect();
        let mut lu = Lu::factor(&head).unwrap();
        for k in 5..8 {
            let c: Vec<f64> = (0..k).map(|i| full[i][k]).collect();
            lu.border(&c, &full[k][..k], full[k][k]).unwrap();
        }
        let b: Vec<f64> = (0..8).map(|i| i as f64 - 3.0).collect();
        let x = lu.solve(&b);
        assert!(residual(&full, &x, &b) < 1e-9);
    }
}
