//! Exact solver for affine fixpoint systems `V = A·V + B`.
//!
//! `A` is a constant rational matrix; `B` is either a vector of rationals or
//! a vector of [`LinearTerm`]s, in which case the parametric right-hand side
//! is carried through the row operations untouched by any parameter value.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::param::{LinearTerm, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("I - A is singular (no pivot in column {column})")]
    SingularSystem { column: usize },
    #[error("dimension mismatch: matrix is {matrix}x{matrix}, right-hand side has {rhs} entries")]
    DimensionMismatch { matrix: usize, rhs: usize },
}

/// Dense square matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(n: usize) -> Self {
        RationalMatrix {
            n,
            entries: vec![Rational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Panics if `rows` is not square.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        RationalMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `A·v` for a term vector.
    pub fn apply_terms(&self, v: &[LinearTerm]) -> Vec<LinearTerm> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(LinearTerm::zero(), |acc, (a, t)| &acc + &t.scale(a))
            })
            .collect()
    }

    /// `A·v` for a rational vector.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }
}

/// Unique `V` with `V = A·V + B`, by forward elimination on `I − A` and back
/// substitution, carrying the parametric right-hand side.
pub fn solve_affine_fixpoint(a: &RationalMatrix, b: &[LinearTerm]) -> Result<Vec<LinearTerm>, SolveError> {
    let n = a.dim();
    if b.len() != n {
        return Err(SolveError::DimensionMismatch {
            matrix: n,
            rhs: b.len(),
        });
    }
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let delta = if i == j { Rational::one() } else { Rational::zero() };
                    delta - a.get(i, j)
                })
                .collect()
        })
        .collect();
    let mut rhs: Vec<LinearTerm> = b.to_vec();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(SolveError::SingularSystem { column: col })?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &m[col][col];
            let (upper, lower) = m.split_at_mut(r);
            for (target, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *target -= &factor * p;
            }
            let delta = rhs[col].scale(&factor);
            rhs[r] = &rhs[r] - &delta;
        }
    }

    let mut x = vec![LinearTerm::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i].clone();
        for k in i + 1..n {
            if !m[i][k].is_zero() {
                acc = &acc - &x[k].scale(&m[i][k]);
            }
        }
        x[i] = acc.scale(&(Rational::one() / &m[i][i]));
    }
    Ok(x)
}

/// Numeric counterpart of [`solve_affine_fixpoint`], by Gauss–Jordan
/// reduction of the augmented matrix `[I − A | b]`.
pub fn solve_rational_fixpoint(a: &RationalMatrix, b: &[Rational]) -> Result<Vec<Rational>, SolveError> {
    let n = a.dim();
    if b.len() != n {
        return Err(SolveError::DimensionMismatch {
            matrix: n,
            rhs: b.len(),
        });
    }
    let mut aug: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one() - a.get(i, j)
                    } else {
                        -a.get(i, j)
                    }
                })
                .collect();
            row.push(b[i].clone());
            row
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or(SolveError::SingularSystem { column: col })?;
        aug.swap(col, pivot);
        let inv = Rational::one() / &aug[col][col];
        for v in aug[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
        }
    }
    Ok(aug.into_iter().map(|mut row| row.pop().unwrap()).collect())
}
