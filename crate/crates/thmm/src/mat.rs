//! Small helpers over dense complex matrices.
//!
//! Everything in this crate works on `DMatrix<Complex64>` at desk scale
//! (block orders below ~10, block sizes below ~8), so the helpers favour
//! clarity over asymptotics.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// (M + M*)/2.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// ‖M − M*‖_max ≤ tol·(1 + ‖M‖_max).
pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    max_abs(&(m - m.adjoint())) <= tol * (1.0 + max_abs(m))
}

/// Scale-free residual ‖lhs − rhs‖_F / (1 + max(‖lhs‖_F, ‖rhs‖_F)).
pub fn rel_residual(lhs: &CMat, rhs: &CMat) -> f64 {
    fro_norm(&(lhs - rhs)) / (1.0 + fro_norm(lhs).max(fro_norm(rhs)))
}

/// Solve A X = B. Cholesky on the hermitized matrix first (the usual case
/// here is a positive definite block Hankel), column-pivoted LU as fallback.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if is_hermitian(a, 1e-12) {
        if let Some(chol) = hermitize(a).cholesky() {
            // the generic complex Cholesky does not detect indefinite
            // input (it happily takes complex square roots), so accept the
            // factorization only if it actually solves the system
            let x = chol.solve(b);
            let backward = fro_norm(&(a * &x - b));
            if backward <= 1e-10 * (one_norm(a) * fro_norm(&x) + fro_norm(b)) {
                return Ok(x);
            }
        }
    }
    let lu = a.clone().lu();
    lu.solve(b).ok_or_else(|| Error::SingularMatrix {
        what: format!("{}x{} system matrix", a.nrows(), a.ncols()),
        cond: f64::INFINITY,
    })
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &eye(a.nrows()))
}

/// X such that X A* = B, i.e. X = B (A*)^{-1}, computed as a solve on the
/// adjoint system rather than through an explicit inverse.
pub fn solve_adjoint_from_right(b: &CMat, a: &CMat) -> Result<CMat> {
    // X A* = B  <=>  A X* = B*.
    let xadj = solve(a, &b.adjoint())?;
    Ok(xadj.adjoint())
}

/// 1-norm condition estimate ‖A‖₁ ‖A⁻¹‖₁ (∞ for singular input).
pub fn cond_one(a: &CMat) -> f64 {
    match inverse(a) {
        Ok(inv) => one_norm(a) * one_norm(&inv),
        Err(_) => f64::INFINITY,
    }
}

/// Invertibility relative to the size of the terms the matrix was built
/// from.  A bare condition estimate cannot see a matrix like I + X that
/// cancels to roundoff (a 1×1 example has condition exactly 1), so the
/// smallest singular value is compared against the constituent scale too.
pub fn robustly_invertible(a: &CMat, term_scale: f64) -> bool {
    let sv = a.clone().svd(false, false).singular_values;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    smin > 1e-12 * (1.0 + term_scale) && smax < 1e12 * smin
}

/// Eigenvalues of the hermitized input, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = hermitize(m);
    let mut eigs: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

pub fn min_eig_hermitian(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)[0]
}

pub fn max_eig_hermitian(m: &CMat) -> f64 {
    *hermitian_eigenvalues(m).last().unwrap()
}

/// Stack q×q blocks into a (kq)×q column.
pub fn stack_column(blocks: &[CMat]) -> CMat {
    assert!(!blocks.is_empty());
    let q = blocks[0].nrows();
    let mut out = zeros(blocks.len() * q, q);
    for (k, b) in blocks.iter().enumerate() {
        assert_eq!(b.nrows(), q);
        assert_eq!(b.ncols(), q);
        out.view_mut((k * q, 0), (q, q)).copy_from(b);
    }
    out
}

/// The (i, j) q×q block of a block matrix.
pub fn get_block(m: &CMat, q: usize, i: usize, j: usize) -> CMat {
    m.view((i * q, j * q), (q, q)).into()
}

pub fn set_block(m: &mut CMat, q: usize, i: usize, j: usize, b: &CMat) {
    m.view_mut((i * q, j * q), (q, q)).copy_from(b);
}

/// Assemble a 2×2 block matrix from q×q (or equal-sized) blocks.
pub fn block2x2(a: &CMat, b: &CMat, c_: &CMat, d: &CMat) -> CMat {
    let q = a.nrows();
    let mut m = zeros(2 * q, 2 * q);
    set_block(&mut m, q, 0, 0, a);
    set_block(&mut m, q, 0, 1, b);
    set_block(&mut m, q, 1, 0, c_);
    set_block(&mut m, q, 1, 1, d);
    m
}
