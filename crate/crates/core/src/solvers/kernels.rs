//! Vector-vector and rank-1 kernels. Every hot-path operation in the solvers
//! goes through here so the flop counter sees it.

use crate::matrix::DenseMatrix;
use crate::scalar::Real;

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T], fl: &mut u64) -> T {
    debug_assert_eq!(a.len(), b.len());
    *fl += 2 * a.len() as u64;
    let mut acc = [T::zero(); 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] = acc[0] + x[0] * y[0];
        acc[1] = acc[1] + x[1] * y[1];
        acc[2] = acc[2] + x[2] * y[2];
        acc[3] = acc[3] + x[3] * y[3];
    }
    let mut tail = T::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        tail = tail + x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha·x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T], fl: &mut u64) {
    debug_assert_eq!(x.len(), y.len());
    *fl += 2 * x.len() as u64;
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Kaczmarz projection of every column of `y` onto one row equation.
///
/// `r` holds the right-hand side row on entry and the residual
/// `rhs − a_row·Y` (before the update) on exit. Afterwards
/// `Y += a_rowᵀ·r·inv`.
pub fn row_project<T: Real>(
    y: &mut DenseMatrix<T>,
    a_row: &[T],
    r: &mut [T],
    inv: T,
    fl: &mut u64,
) {
    for (k, &a) in a_row.iter().enumerate() {
        if a != T::zero() {
            axpy(-a, y.row(k), r, fl);
        }
    }
    for (k, &a) in a_row.iter().enumerate() {
        if a != T::zero() {
            *fl += 1;
            axpy(a * inv, r, y.row_mut(k), fl);
        }
    }
}

/// `X += (target − X·b)·bᵀ·inv`, row by row of `X`.
pub fn col_project<T: Real>(
    x: &mut DenseMatrix<T>,
    b: &[T],
    target: impl Fn(usize) -> T,
    inv: T,
    fl: &mut u64,
) {
    for k in 0..x.rows() {
        let xk = x.row_mut(k);
        let s = (target(k) - dot(xk, b, fl)) * inv;
        *fl += 2;
        axpy(s, b, xk, fl);
    }
}

/// `g = inv·coefᵀZ`, then `Z −= coef·g`.
///
/// With `coef` a column of `A` this is both the extended-Kaczmarz Z-step and
/// the Gauss-Seidel residual update (where `g` is the coordinate increment).
pub fn deflate<T: Real>(z: &mut DenseMatrix<T>, coef: &[T], inv: T, g: &mut [T], fl: &mut u64) {
    g.fill(T::zero());
    for (i, &c) in coef.iter().enumerate() {
        if c != T::zero() {
            axpy(c, z.row(i), g, fl);
        }
    }
    *fl += g.len() as u64;
    for v in g.iter_mut() {
        *v = *v * inv;
    }
    for (i, &c) in coef.iter().enumerate() {
        if c != T::zero() {
            axpy(-c, g, z.row_mut(i), fl);
        }
    }
}

/// `U = inv·E·b`, `X[:, col] += U`, `E −= U·bᵀ`.
pub fn gs_row<T: Real>(
    x: &mut DenseMatrix<T>,
    col: usize,
    e: &mut DenseMatrix<T>,
    b: &[T],
    inv: T,
    fl: &mut u64,
) {
    for k in 0..e.rows() {
        let ek = e.row_mut(k);
        let u = dot(ek, b, fl) * inv;
        *fl += 2;
        x[(k, col)] = x[(k, col)] + u;
        axpy(-u, b, ek, fl);
    }
}
