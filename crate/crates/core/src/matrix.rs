//! Dense matrices over a [`Field`] and exact Gaussian elimination.

use std::fmt;

use thiserror::Error;

use crate::field::{Fe, Field};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>, // row-major
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("system has more than one solution (rank {rank} < {unknowns} unknowns)")]
    Underdetermined { rank: usize, unknowns: usize },
    #[error("system has no solution")]
    Inconsistent,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Fe>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data does not match shape");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
        }
    }

    /// Builds a matrix from rows of equal length; `cols` is used when there
    /// are no rows.
    pub fn from_rows(rows: Vec<Vec<Fe>>, cols: usize) -> Self {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row);
        }
        Matrix {
            rows: nrows,
            cols,
            data,
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Fe> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// All columns, materialized; handy for repeated subset checks.
    pub fn columns(&self) -> Vec<Vec<Fe>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[Fe]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Matrix::new(self.rows, cols.len(), data)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for (k, &a) in self.row(r).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let acc = field.add(out.get(r, c), field.mul(a, other.get(k, c)));
                    out.set(r, c, acc);
                }
            }
        }
        out
    }

    /// `M · v` for a column vector `v`.
    pub fn mul_vec(&self, field: &Field, v: &[Fe]) -> Vec<Fe> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        self.iter_rows().map(|row| dot(field, row, v)).collect()
    }

    /// `v · M` for a row vector `v`.
    pub fn vec_mul(&self, field: &Field, v: &[Fe]) -> Vec<Fe> {
        assert_eq!(self.rows, v.len(), "shape mismatch");
        let mut out = vec![Fe::ZERO; self.cols];
        for (row, &a) in self.iter_rows().zip(v) {
            if a.is_zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(row) {
                *o = field.add(*o, field.mul(a, x));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self, field: &Field) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            m.swap_rows(lead, pr);
            let inv = field.inv(m.get(lead, c)).expect("pivot is nonzero");
            for cc in c..m.cols {
                let v = field.mul(m.get(lead, cc), inv);
                m.set(lead, cc, v);
            }
            for r in 0..m.rows {
                if r == lead {
                    continue;
                }
                let factor = m.get(r, c);
                if factor.is_zero() {
                    continue;
                }
                for cc in c..m.cols {
                    let v = field.sub(m.get(r, cc), field.mul(factor, m.get(lead, cc)));
                    m.set(r, cc, v);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, field: &Field) -> usize {
        rank_of_vectors(field, &self.iter_rows().collect::<Vec<_>>())
    }

    /// Basis of the right kernel `{x : M x = 0}`, one vector per row, returned
    /// in reduced row echelon form.
    pub fn nullspace(&self, field: &Field) -> Matrix {
        let (r, pivots) = self.rref(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Fe::ZERO; self.cols];
            v[f] = Fe::ONE;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(r.get(i, f));
            }
            basis.push(v);
        }
        let kernel = Matrix::from_rows(basis, self.cols);
        kernel.rref(field).0
    }

    /// The unique solution of `M x = b`.
    pub fn solve(&self, field: &Field, b: &[Fe]) -> Result<Vec<Fe>, SolveError> {
        assert_eq!(self.rows, b.len(), "shape mismatch");
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, b[r]);
        }
        let (red, pivots) = aug.rref(field);
        if pivots.last() == Some(&self.cols) {
            return Err(SolveError::Inconsistent);
        }
        if pivots.len() < self.cols {
            return Err(SolveError::Underdetermined {
                rank: pivots.len(),
                unknowns: self.cols,
            });
        }
        Ok((0..self.cols).map(|i| red.get(i, self.cols)).collect())
    }
}

#[inline]
pub fn dot(field: &Field, a: &[Fe], b: &[Fe]) -> Fe {
    a.iter()
        .zip(b)
        .fold(Fe::ZERO, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// Rank of the span of `vectors` (all of equal length).
pub fn rank_of_vectors(field: &Field, vectors: &[&[Fe]]) -> usize {
    let mut work: Vec<Vec<Fe>> = vectors.iter().map(|v| v.to_vec()).collect();
    let len = work.first().map_or(0, |v| v.len());
    let mut rank = 0;
    for c in 0..len {
        let Some(pr) = (rank..work.len()).find(|&r| !work[r][c].is_zero()) else {
            continue;
        };
        work.swap(rank, pr);
        let inv = field.inv(work[rank][c]).expect("pivot is nonzero");
        let (head, tail) = work.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for row in tail.iter_mut() {
            let factor = field.mul(row[c], inv);
            if factor.is_zero() {
                continue;
            }
            for cc in c..len {
                row[cc] = field.sub(row[cc], field.mul(factor, pivot[cc]));
            }
        }
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    rank
}

/// A nontrivial `a` with `Σ a_i v_i = 0`, or `None` if the vectors are
/// linearly independent. Among dependencies, the one found has its last
/// nonzero coefficient equal to 1.
pub fn linear_dependency(field: &Field, vectors: &[&[Fe]]) -> Option<Vec<Fe>> {
    let w = vectors.len();
    let len = vectors.first().map_or(0, |v| v.len());
    // Columns are the vectors; the kernel of that matrix is the answer.
    let mut m = Matrix::zeros(len, w);
    for (j, v) in vectors.iter().enumerate() {
        for (i, &x) in v.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    let kernel = m.nullspace(field);
    if kernel.rows() == 0 {
        return None;
    }
    let mut v = kernel.row(kernel.rows() - 1).to_vec();
    if let Some(&last) = v.iter().rev().find(|x| !x.is_zero()) {
        let inv = field.inv(last).expect("nonzero");
        for x in v.iter_mut() {
            *x = field.mul(*x, inv);
        }
    }
    Some(v)
}
