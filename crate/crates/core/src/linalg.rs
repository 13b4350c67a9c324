//! Exact linear algebra over `Q`.
//!
//! Square systems go through Bareiss fraction-free elimination, so the
//! determinant comes out exactly as a by-product. Rectangular systems use
//! plain Gauss-Jordan over the rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has {got} entries, expected {expected}")]
    RhsLength { expected: usize, got: usize },
    #[error("ragged matrix: row {row} has {got} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
}

/// Dense row-major matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::Ragged {
                    row,
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Outcome of a square solve: `solution` is `None` exactly when `determinant` is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareSolution {
    pub determinant: Rational,
    pub solution: Option<Vec<Rational>>,
}

/// Clears denominators row by row so elimination runs over `Z`.
/// Returns the integer rows and the product of the row scalings.
fn integer_rows(m: &Matrix, rhs: &[Rational]) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let rows = (0..m.rows)
        .map(|r| {
            let lcm = m
                .row(r)
                .iter()
                .chain(std::iter::once(&rhs[r]))
                .fold(BigInt::one(), |acc, v| {
                    num_integer::lcm(acc, v.denom().clone())
                });
            scale *= &lcm;
            m.row(r)
                .iter()
                .chain(std::iter::once(&rhs[r]))
                .map(|v| (v * Rational::from_integer(lcm.clone())).to_integer())
                .collect()
        })
        .collect();
    (rows, scale)
}

/// Solves `m * x = rhs` for square `m` by Bareiss elimination.
pub fn solve_square(m: &Matrix, rhs: &[Rational]) -> Result<SquareSolution, LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if rhs.len() != m.rows {
        return Err(LinalgError::RhsLength {
            expected: m.rows,
            got: rhs.len(),
        });
    }
    let n = m.rows;
    let (mut a, scale) = integer_rows(m, rhs);
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(pivot) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Ok(SquareSolution {
                determinant: Rational::zero(),
                solution: None,
            });
        };
        if pivot != k {
            a.swap(pivot, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det_int = if n == 0 {
        BigInt::one()
    } else {
        a[n - 1][n - 1].clone()
    };
    let determinant = Rational::new(det_int * sign, scale);
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rational::from_integer(a[i][n].clone());
        for j in i + 1..n {
            acc -= Rational::from_integer(a[i][j].clone()) * &x[j];
        }
        x[i] = acc / Rational::from_integer(a[i][i].clone());
    }
    Ok(SquareSolution {
        determinant,
        solution: Some(x),
    })
}

pub fn determinant(m: &Matrix) -> Result<Rational, LinalgError> {
    let zeros = vec![Rational::zero(); m.rows];
    Ok(solve_square(m, &zeros)?.determinant)
}

/// Any solution of a possibly rectangular system, or `None` if inconsistent.
/// Free variables are set to zero.
pub fn solve_any(m: &Matrix, rhs: &[Rational]) -> Result<Option<Vec<Rational>>, LinalgError> {
    if rhs.len() != m.rows {
        return Err(LinalgError::RhsLength {
            expected: m.rows,
            got: rhs.len(),
        });
    }
    let mut a: Vec<Vec<Rational>> = (0..m.rows)
        .map(|r| {
            let mut row = m.row(r).to_vec();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        let Some(p) = (r..m.rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        let pivot = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot).skip(c) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[m.cols].is_zero()) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); m.cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][m.cols].clone();
    }
    Ok(Some(x))
}
