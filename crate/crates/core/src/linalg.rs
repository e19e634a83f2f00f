//! Exact linear algebra over the rationals.
//!
//! Systems are cleared to integer rows and brought to echelon form by
//! Bareiss fraction-free elimination (first nonzero pivot in each column),
//! then back-substituted in rationals.

use num::{BigInt, Integer, One, Signed, Zero};
use thiserror::Error;

use crate::jetcore::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("inconsistent system: equation {row} reduces to 0 = nonzero")]
    Inconsistent { row: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    Shape { row: usize, found: usize, expected: usize },
}

/// Particular solution (free variables set to zero) plus a kernel basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<Rational>,
    pub kernel: Vec<Vec<Rational>>,
    pub pivots: Vec<usize>,
}

impl AffineSolution {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    cols: usize,
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    row.iter().map(|r| r.numer() * (&lcm / r.denom())).collect()
}

/// Echelon form of `rows` restricted to the first `cols` columns (trailing
/// columns are carried along).
fn bareiss(rows: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let mut m = rows;
    let width = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let factor = row[col].clone();
            for j in col + 1..width {
                let num = &pivot_row[col] * &row[j] - &factor * &pivot_row[j];
                let (q, rem) = num.div_rem(&prev);
                assert!(rem.is_zero(), "Bareiss division must be exact");
                row[j] = q;
            }
            row[col] = BigInt::zero();
        }
        prev = m[r][col].clone();
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    Echelon { rows: m, pivots, cols }
}

fn check_shape(a: &[Vec<Rational>], cols: usize) -> Result<(), LinalgError> {
    for (row, r) in a.iter().enumerate() {
        if r.len() != cols {
            return Err(LinalgError::Shape {
                row,
                found: r.len(),
                expected: cols,
            });
        }
    }
    Ok(())
}

/// Solves `A x = b` for an `m × cols` matrix.
pub fn solve_affine(a: &[Vec<Rational>], b: &[Rational], cols: usize) -> Result<AffineSolution, LinalgError> {
    check_shape(a, cols)?;
    let augmented: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut full = row.clone();
            full.push(rhs.clone());
            integer_row(&full)
        })
        .collect();
    let ech = bareiss(augmented, cols);
    let rank = ech.pivots.len();
    for (i, row) in ech.rows.iter().enumerate().skip(rank) {
        if !row[cols].is_zero() {
            return Err(LinalgError::Inconsistent { row: i });
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !ech.pivots.contains(c)).collect();
    let particular = back_substitute(&ech, None);
    let kernel = free.iter().map(|&f| back_substitute(&ech, Some(f))).collect();
    Ok(AffineSolution {
        particular,
        kernel,
        pivots: ech.pivots,
    })
}

/// With `free = None`, solves the inhomogeneous system with all free
/// variables zero; with `Some(f)`, the homogeneous system with `x_f = 1`.
fn back_substitute(ech: &Echelon, free: Option<usize>) -> Vec<Rational> {
    let cols = ech.cols;
    let mut x = vec![Rational::zero(); cols];
    if let Some(f) = free {
        x[f] = Rational::one();
    }
    for (r, &pc) in ech.pivots.iter().enumerate().rev() {
        let row = &ech.rows[r];
        let mut acc = if free.is_none() {
            Rational::from_integer(row[cols].clone())
        } else {
            Rational::zero()
        };
        for j in pc + 1..cols {
            if !row[j].is_zero() && !x[j].is_zero() {
                acc -= Rational::from_integer(row[j].clone()) * &x[j];
            }
        }
        x[pc] = acc / Rational::from_integer(row[pc].clone());
    }
    x
}

pub fn rank(a: &[Vec<Rational>], cols: usize) -> Result<usize, LinalgError> {
    check_shape(a, cols)?;
    let rows = a.iter().map(|r| integer_row(r)).collect();
    Ok(bareiss(rows, cols).pivots.len())
}

/// Basis of `{x : A x = 0}`.
pub fn nullspace(a: &[Vec<Rational>], cols: usize) -> Result<Vec<Vec<Rational>>, LinalgError> {
    let zeros = vec![Rational::zero(); a.len()];
    Ok(solve_affine(a, &zeros, cols)?.kernel)
}

pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    let cols = v.len();
    let r0 = rank(basis, cols).expect("uniform rows");
    let mut ext = basis.to_vec();
    ext.push(v.to_vec());
    r0 == rank(&ext, cols).expect("uniform rows")
}

/// Coordinates of `v` in a linearly independent `basis`, if `v` is in its span.
pub fn coordinates(basis: &[Vec<Rational>], v: &[Rational]) -> Option<Vec<Rational>> {
    let n = basis.len();
    let dim = v.len();
    // Solve Σ c_i basis_i = v, i.e. Bᵀ c = v.
    let a: Vec<Vec<Rational>> = (0..dim).map(|r| basis.iter().map(|b| b[r].clone()).collect()).collect();
    let sol = solve_affine(&a, v, n).ok()?;
    (sol.kernel.is_empty()).then_some(sol.particular)
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn has_negative(v: &[Rational]) -> bool {
    v.iter().any(|x| x.is_negative())
}
