//! Dense matrices over exact rationals.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, ExactRational};

/// Row-major dense matrix of [`ExactRational`] entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<ExactRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![ExactRational::zero(); rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        Self::from_fn(size, size, |i, j| {
            if i == j {
                ExactRational::one()
            } else {
                ExactRational::zero()
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExactRational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, entries }
    }

    /// Builds a matrix from nested rows. Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<ExactRational>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        RationalMatrix {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[ExactRational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &ExactRational> {
        self.entries.iter()
    }

    pub fn scale(&self, factor: &ExactRational) -> Self {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn column_sums(&self) -> Vec<ExactRational> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| &self[(i, j)]).sum())
            .collect()
    }

    /// `row · self` for a row vector of length `rows()`.
    pub fn left_mul(&self, row: &[ExactRational]) -> Vec<ExactRational> {
        assert_eq!(row.len(), self.rows, "row vector length mismatch");
        let mut out = vec![ExactRational::zero(); self.cols];
        for (i, r) in row.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            for (o, e) in out.iter_mut().zip(self.row(i)) {
                if !e.is_zero() {
                    *o += r * e;
                }
            }
        }
        out
    }

    /// `self · col` for a column vector of length `cols()`.
    pub fn right_mul(&self, col: &[ExactRational]) -> Vec<ExactRational> {
        assert_eq!(col.len(), self.cols, "column vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(col)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Exact inverse by Gauss-Jordan elimination, pivoting on the first
    /// nonzero entry of each column.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Invariant(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let size = self.rows;
        let mut work = self.clone();
        let mut inv = Self::identity(size);
        for col in 0..size {
            let pivot = (col..size)
                .find(|&r| !work[(r, col)].is_zero())
                .ok_or_else(|| Error::Invariant(format!("zero pivot column {col} during elimination")))?;
            if pivot != col {
                work.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = work[(col, col)].clone();
            if !p.is_one() {
                let scale = p.recip();
                work.scale_row(col, &scale);
                inv.scale_row(col, &scale);
            }
            for r in 0..size {
                if r == col || work[(r, col)].is_zero() {
                    continue;
                }
                let factor = work[(r, col)].clone();
                work.sub_scaled_row(r, col, &factor);
                inv.sub_scaled_row(r, col, &factor);
            }
        }
        Ok(inv)
    }

    pub fn frobenius_norm_squared(&self) -> ExactRational {
        self.entries.iter().map(|e| e * e).sum()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(to_f64).collect())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, row: usize, factor: &ExactRational) {
        for j in 0..self.cols {
            self[(row, j)] *= factor;
        }
    }

    // row[target] -= factor * row[source]
    fn sub_scaled_row(&mut self, target: usize, source: usize, factor: &ExactRational) {
        for j in 0..self.cols {
            if self[(source, j)].is_zero() {
                continue;
            }
            let delta = factor * &self[(source, j)];
            self[(target, j)] -= delta;
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&ExactRational, &ExactRational) -> ExactRational) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = ExactRational;

    fn index(&self, (i, j): (usize, usize)) -> &ExactRational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactRational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &RationalMatrix {
    type Output = RationalMatrix;

    fn add(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &RationalMatrix {
    type Output = RationalMatrix;

    fn sub(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = RationalMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = rhs.left_mul(self.row(i));
            for (j, v) in row.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}
