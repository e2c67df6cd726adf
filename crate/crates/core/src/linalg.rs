//! Small dense linear algebra: column-subset least squares, numerical rank,
//! pseudoinverse application and the top eigenvalue of a Gram matrix.
//!
//! Matrices here are desk scale (a few dozen rows and columns at most).
//! Factorizations are delegated to `nalgebra`; the types in this module
//! keep a plain row-major layout so the rest of the crate never touches
//! `nalgebra` directly.

use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries given for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(cols.iter().map(|&j| row[j]));
        }
        DenseMatrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// `M x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Mᵀ y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Relative rank threshold used when none is configured: `1e-10 · max(rows, cols)`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    1e-10 * rows.max(cols).max(1) as f64
}

fn check_finite(m: &DenseMatrix) -> Result<()> {
    if m.data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Singular values, unordered; empty for a matrix with no rows or columns.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.rows == 0 || m.cols == 0 {
        return Vec::new();
    }
    m.to_nalgebra().singular_values().iter().copied().collect()
}

/// Number of singular values strictly above `rank_tol · σ_max`.
pub fn numerical_rank(m: &DenseMatrix, rank_tol: f64) -> Result<usize> {
    check_finite(m)?;
    if rank_tol.is_nan() || rank_tol < 0.0 {
        return Err(Error::InvalidInput(format!(
            "rank tolerance {rank_tol} < 0"
        )));
    }
    let sv = singular_values(m);
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return Ok(0);
    }
    let threshold = rank_tol * smax;
    Ok(sv.iter().filter(|&&s| s > threshold).count())
}

/// Least-squares solution on a column submatrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    pub full_rank: bool,
}

/// Solves `min ‖A_S z − b‖`.
///
/// Full column rank: Householder QR, unique minimizer. Otherwise the
/// minimum-norm minimizer from a truncated SVD, with `full_rank = false`.
pub fn solve_normal_equations(a_s: &DenseMatrix, b: &[f64], rank_tol: f64) -> Result<LeastSquares> {
    if a_s.rows != b.len() {
        return Err(Error::InvalidInput(format!(
            "matrix has {} rows but right-hand side has length {}",
            a_s.rows,
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "right-hand side has non-finite entries".into(),
        ));
    }
    let k = a_s.cols;
    if k == 0 {
        return Ok(LeastSquares {
            x: Vec::new(),
            full_rank: true,
        });
    }
    let rank = numerical_rank(a_s, rank_tol)?;
    let a = a_s.to_nalgebra();
    let rhs = DVector::from_column_slice(b);
    if rank == k {
        let qr = a.qr();
        let qtb = qr.q().transpose() * &rhs;
        let r = qr.r();
        let x = r
            .solve_upper_triangular(&qtb.rows(0, k).into_owned())
            .ok_or(Error::RankDeficient { rank, cols: k })?;
        return Ok(LeastSquares {
            x: x.iter().copied().collect(),
            full_rank: true,
        });
    }
    if a_s.rows == 0 || rank == 0 {
        return Ok(LeastSquares {
            x: vec![0.0; k],
            full_rank: false,
        });
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(&rhs, rank_tol * smax)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(LeastSquares {
        x: x.iter().copied().collect(),
        full_rank: false,
    })
}

/// `A_S⁺ b` through the SVD of `A_S`; requires full column rank.
pub fn pseudoinverse_apply(a_s: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a_s.rows != b.len() {
        return Err(Error::InvalidInput(format!(
            "matrix has {} rows but vector has length {}",
            a_s.rows,
            b.len()
        )));
    }
    let k = a_s.cols;
    if k == 0 {
        return Ok(Vec::new());
    }
    let rank = numerical_rank(a_s, default_rank_tol(a_s.rows, a_s.cols))?;
    if rank < k {
        return Err(Error::RankDeficient { rank, cols: k });
    }
    let svd = a_s.to_nalgebra().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let rhs = DVector::from_column_slice(b);
    // x = V Σ⁻¹ Uᵀ b
    let mut coeffs = u.transpose() * rhs;
    for (c, s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c /= s;
    }
    let x = v_t.transpose() * coeffs;
    Ok(x.iter().copied().collect())
}

/// `λ_max(AᵀA)` by power iteration from the normalized all-ones vector.
///
/// Stops once the Rayleigh quotient changes by at most `iter_tol` relative.
pub fn largest_eigenvalue_gram(a: &DenseMatrix, iter_tol: f64) -> Result<f64> {
    check_finite(a)?;
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    const MAX_ITER: usize = 100_000;
    let n = a.cols;
    let gram_apply = |v: &[f64]| a.tr_mul_vec(&a.mul_vec(v));

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = gram_apply(&v);
    // The all-ones start can lie in the null space of AᵀA; fall back to
    // coordinate vectors, which cannot all be annihilated unless A = 0.
    if norm2(&w) == 0.0 {
        match (0..n).find(|&j| a.column(j).iter().any(|&c| c != 0.0)) {
            None => return Ok(0.0),
            Some(j) => {
                v = vec![0.0; n];
                v[j] = 1.0;
                w = gram_apply(&v);
            }
        }
    }
    let mut lambda = dot(&v, &w);
    for _ in 0..MAX_ITER {
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w.iter().map(|x| x / nw).collect();
        w = gram_apply(&v);
        let next = dot(&v, &w);
        if (next - lambda).abs() <= iter_tol * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Ok(lambda)
}
