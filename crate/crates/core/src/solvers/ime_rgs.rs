use crate::error::{Error, Result};
use crate::matrix::{Axis, DenseMatrix};
use crate::rng::RandomSource;
use crate::scalar::Real;

use super::kernels::{axpy, deflate, gs_row};
use super::{
    check_index, check_system, drive_single, nonzero_norm, AxisTable, SolveConfig, SolveReport,
    Stepper, StoppingRule,
};

/// Gauss-Seidel update of row `j` of `Y` against the residual `R = C − AY`.
///
/// Returns the increment `W = A[:, j]ᵀR / ‖A[:, j]‖²`.
pub fn rgs_col_step<T: Real>(
    y: &mut DenseMatrix<T>,
    r: &mut DenseMatrix<T>,
    a: &DenseMatrix<T>,
    j: usize,
) -> Result<Vec<T>> {
    check_index("column", j, a.cols())?;
    if y.rows() != a.cols() || r.rows() != a.rows() || r.cols() != y.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A {:?}, Y {:?}, R {:?}",
            a.shape(),
            y.shape(),
            r.shape()
        )));
    }
    let aj = a.column(j);
    let norm = nonzero_norm(&aj);
    if norm == T::zero() {
        return Err(Error::ZeroColumn {
            matrix: 'A',
            index: j,
        });
    }
    let mut w = vec![T::zero(); y.cols()];
    deflate(r, &aj, T::one() / norm, &mut w, &mut 0);
    axpy(T::one(), &w, y.row_mut(j), &mut 0);
    Ok(w)
}

/// `U = E·B[i, :]ᵀ / ‖B[i, :]‖²`, `X[:, i] += U`, `E −= U·B[i, :]`.
pub fn rgs_row_step<T: Real>(
    x: &mut DenseMatrix<T>,
    e: &mut DenseMatrix<T>,
    b: &DenseMatrix<T>,
    i: usize,
) -> Result<()> {
    check_index("row", i, b.rows())?;
    if x.cols() != b.rows() || e.cols() != b.cols() || e.rows() != x.rows() {
        return Err(Error::ShapeMismatch(format!(
            "X {:?}, E {:?}, B {:?}",
            x.shape(),
            e.shape(),
            b.shape()
        )));
    }
    let norm = nonzero_norm(b.row(i));
    if norm == T::zero() {
        return Err(Error::ZeroRow {
            matrix: 'B',
            index: i,
        });
    }
    gs_row(x, i, e, b.row(i), T::one() / norm, &mut 0);
    Ok(())
}

/// Iteration state of IME-RGS. Maintains `R = C − AY` and `E = Y − XB`.
#[derive(Debug, Clone)]
pub struct ImeRgs<'a, T> {
    b: &'a DenseMatrix<T>,
    at: DenseMatrix<T>,
    cols_a: AxisTable<T>,
    rows_b: AxisTable<T>,
    y: DenseMatrix<T>,
    r: DenseMatrix<T>,
    e: DenseMatrix<T>,
    x: DenseMatrix<T>,
    w: Vec<T>,
    flops: u64,
}

impl<'a, T: Real> ImeRgs<'a, T> {
    pub fn new(a: &DenseMatrix<T>, b: &'a DenseMatrix<T>, c: &DenseMatrix<T>) -> Result<Self> {
        check_system(a, b, c)?;
        let (p, q, n) = (a.cols(), b.rows(), b.cols());
        Ok(Self {
            b,
            at: a.transpose(),
            cols_a: AxisTable::new(a, Axis::Column, 'A')?,
            rows_b: AxisTable::new(b, Axis::Row, 'B')?,
            y: DenseMatrix::zeros(p, n),
            r: c.clone(),
            e: DenseMatrix::zeros(p, n),
            x: DenseMatrix::zeros(p, q),
            w: vec![T::zero(); n],
            flops: 0,
        })
    }

    /// Column step with column `j` of `A`, then row step with row `i` of `B`.
    pub fn step_with(&mut self, j: usize, i: usize) {
        let fl = &mut self.flops;
        deflate(
            &mut self.r,
            self.at.row(j),
            self.cols_a.inv[j],
            &mut self.w,
            fl,
        );
        axpy(T::one(), &self.w, self.y.row_mut(j), fl);
        axpy(T::one(), &self.w, self.e.row_mut(j), fl);
        gs_row(
            &mut self.x,
            i,
            &mut self.e,
            self.b.row(i),
            self.rows_b.inv[i],
            fl,
        );
    }

    pub fn x(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &DenseMatrix<T> {
        &self.y
    }

    pub fn r(&self) -> &DenseMatrix<T> {
        &self.r
    }

    pub fn e(&self) -> &DenseMatrix<T> {
        &self.e
    }

    pub fn into_x(self) -> DenseMatrix<T> {
        self.x
    }
}

impl<T: Real> Stepper<T> for ImeRgs<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let j = self.cols_a.draw(rng);
        let i = self.rows_b.draw(rng);
        self.step_with(j, i);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.x
    }

    fn flops(&self) -> u64 {
        self.flops
    }
}

/// IME-RGS: coordinate descent on `AY = C` feeding a row-action solve of
/// `XB = Y` through the lagged buffer `E`.
pub fn solve_ime_rgs<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    let state = ImeRgs::new(a, b, c)?;
    stop.validate(a.cols(), b.rows(), b.cols())?;
    Ok(drive_single(state, cfg, stop, ImeRgs::into_x))
}
