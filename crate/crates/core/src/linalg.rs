//! Dense helpers on top of nalgebra used across the crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn ones(n: usize) -> Mat {
    Mat::from_element(n, 1, 1.0)
}

pub fn block_diag(blocks: &[Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_symmetric(m: &Mat, rel_tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.transpose())) <= rel_tol * (1.0 + max_abs(m))
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Factor `L` with `L Lᵀ = m` for symmetric PSD `m`, clamping eigenvalues below zero.
pub fn psd_factor(m: &Mat) -> Mat {
    let eig = symmetrize(m).symmetric_eigen();
    let mut v = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        v.column_mut(j).scale_mut(s);
    }
    v
}

/// Inverse of an SPD matrix; fails when the smallest eigenvalue is at or below `tol`.
pub fn spd_inverse(m: &Mat, tol: f64) -> Option<Mat> {
    let sym = symmetrize(m);
    if min_eigenvalue(&sym) <= tol {
        return None;
    }
    sym.cholesky().map(|c| c.inverse())
}

/// Solve `(I - x) z = rhs` for strictly lower-triangular `x` by forward substitution.
///
/// `x` is nilpotent, so `I - x` is unit lower-triangular and the solve is exact
/// up to rounding; no factorization is formed.
pub fn unit_lower_solve(x: &Mat, rhs: &Mat) -> Mat {
    let n = x.nrows();
    assert!(x.is_square() && rhs.nrows() == n, "unit_lower_solve shape");
    debug_assert!(is_strictly_lower(x), "unit_lower_solve needs a strictly lower-triangular operator");
    let mut z = rhs.clone();
    for r in 0..n {
        for c in 0..r {
            let coeff = x[(r, c)];
            if coeff != 0.0 {
                for k in 0..z.ncols() {
                    let add = coeff * z[(c, k)];
                    z[(r, k)] += add;
                }
            }
        }
    }
    z
}

/// `(I - x)^{-1}` for strictly lower-triangular `x`.
pub fn unit_lower_inverse(x: &Mat) -> Mat {
    unit_lower_solve(x, &Mat::identity(x.nrows(), x.nrows()))
}

pub fn is_strictly_lower(x: &Mat) -> bool {
    let n = x.nrows().min(x.ncols());
    (0..n).all(|r| (r..x.ncols()).all(|c| x[(r, c)] == 0.0))
}

/// Matrix rank through the singular values, relative tolerance.
pub fn rank(m: &Mat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax).count()
}

/// Trace of `a * b` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn check_shape(m: &Mat, rows: usize, cols: usize, name: &str) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}
