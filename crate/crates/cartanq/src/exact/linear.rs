//! Dense exact linear solving.
//!
//! Systems have a square rational coefficient matrix and polynomial-valued
//! right-hand sides, so the unknowns come out as polynomials. Elimination is
//! plain Gauss with row swaps; with exact arithmetic any nonzero pivot is a
//! valid pivot, and rank deficiency is detected outright.

use num_traits::Zero;

use super::poly::Poly;
use super::rational::Rational;
use crate::{Error, Result};

/// A square linear system `matrix * u = rhs` with labelled unknowns.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    /// Row-major square coefficient matrix.
    pub matrix: Vec<Vec<Rational>>,
    /// One label per unknown, used in diagnostics.
    pub labels: Vec<String>,
    /// Polynomial right-hand side, one entry per equation.
    pub rhs: Vec<Poly>,
}

impl LinearSystem {
    /// Builds a system, validating shapes.
    pub fn new(matrix: Vec<Vec<Rational>>, labels: Vec<String>, rhs: Vec<Poly>) -> Self {
        let n = matrix.len();
        assert!(matrix.iter().all(|r| r.len() == n), "matrix must be square");
        assert_eq!(labels.len(), n);
        assert_eq!(rhs.len(), n);
        LinearSystem {
            matrix,
            labels,
            rhs,
        }
    }

    /// Solves for the unknowns.
    ///
    /// Returns [`Error::SingularSystem`] when the matrix is rank deficient;
    /// otherwise the unique solution, whose residual is identically zero.
    pub fn solve(&self) -> Result<Vec<Poly>> {
        let n = self.matrix.len();
        let mut a = self.matrix.clone();
        let mut b = self.rhs.clone();

        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !a[r][col].is_zero()).ok_or_else(|| {
                Error::SingularSystem(format!(
                    "no pivot for unknown `{}` (column {col})",
                    self.labels[col]
                ))
            })?;
            a.swap(col, pivot_row);
            b.swap(col, pivot_row);

            let inv = {
                let p = &a[col][col];
                p.recip()
            };
            for c in col..n {
                a[col][c] = &a[col][c] * &inv;
            }
            b[col] = b[col].scale(&inv);

            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in col..n {
                    let t = &a[col][c] * &f;
                    a[r][c] = &a[r][c] - &t;
                }
                let t = b[col].scale(&f);
                b[r] = &b[r] - &t;
            }
        }
        Ok(b)
    }

    /// `matrix * solution - rhs`, entry by entry.
    pub fn residual(&self, solution: &[Poly]) -> Vec<Poly> {
        let n = self.matrix.len();
        assert_eq!(solution.len(), n);
        let nvars = self.rhs[0].nvars();
        (0..n)
            .map(|r| {
                let mut acc = Poly::zero(nvars);
                for c in 0..n {
                    acc = &acc + &solution[c].scale(&self.matrix[r][c]);
                }
                &acc - &self.rhs[r]
            })
            .collect()
    }
}
