use crate::error::{Error, Result};
use crate::matrix::{Axis, DenseMatrix};
use crate::rng::RandomSource;
use crate::scalar::Real;

use super::kernels::{col_project, row_project};
use super::{
    check_index, check_system, drive_single, nonzero_norm, AxisTable, SolveConfig, SolveReport,
    Stepper, StoppingRule,
};

/// Projects `Y` onto the solutions of row `i` of `AY = C`, in place.
pub fn rk_row_step<T: Real>(
    y: &mut DenseMatrix<T>,
    a: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    i: usize,
) -> Result<()> {
    check_index("row", i, a.rows())?;
    if y.rows() != a.cols() || c.rows() != a.rows() || c.cols() != y.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A {:?}, Y {:?}, C {:?}",
            a.shape(),
            y.shape(),
            c.shape()
        )));
    }
    let norm = nonzero_norm(a.row(i));
    if norm == T::zero() {
        return Err(Error::ZeroRow {
            matrix: 'A',
            index: i,
        });
    }
    let mut r = c.row(i).to_vec();
    row_project(y, a.row(i), &mut r, T::one() / norm, &mut 0);
    Ok(())
}

/// Projects `X` onto `{X : X·B[:, j] = y_col}`, in place.
pub fn rk_col_step<T: Real>(
    x: &mut DenseMatrix<T>,
    b: &DenseMatrix<T>,
    y_col: &[T],
    j: usize,
) -> Result<()> {
    check_index("column", j, b.cols())?;
    if x.cols() != b.rows() || y_col.len() != x.rows() {
        return Err(Error::ShapeMismatch(format!(
            "X {:?}, B {:?}, target length {}",
            x.shape(),
            b.shape(),
            y_col.len()
        )));
    }
    let bj = b.column(j);
    let norm = nonzero_norm(&bj);
    if norm == T::zero() {
        return Err(Error::ZeroColumn {
            matrix: 'B',
            index: j,
        });
    }
    col_project(x, &bj, |k| y_col[k], T::one() / norm, &mut 0);
    Ok(())
}

/// Iteration state of CME-RK.
#[derive(Debug, Clone)]
pub struct CmeRk<'a, T> {
    a: &'a DenseMatrix<T>,
    c: &'a DenseMatrix<T>,
    bt: DenseMatrix<T>,
    rows_a: AxisTable<T>,
    cols_b: AxisTable<T>,
    y: DenseMatrix<T>,
    x: DenseMatrix<T>,
    r: Vec<T>,
    ycol: Vec<T>,
    flops: u64,
}

impl<'a, T: Real> CmeRk<'a, T> {
    pub fn new(a: &'a DenseMatrix<T>, b: &DenseMatrix<T>, c: &'a DenseMatrix<T>) -> Result<Self> {
        check_system(a, b, c)?;
        let (p, q, n) = (a.cols(), b.rows(), b.cols());
        Ok(Self {
            a,
            c,
            bt: b.transpose(),
            rows_a: AxisTable::new(a, Axis::Row, 'A')?,
            cols_b: AxisTable::new(b, Axis::Column, 'B')?,
            y: DenseMatrix::zeros(p, n),
            x: DenseMatrix::zeros(p, q),
            r: vec![T::zero(); n],
            ycol: vec![T::zero(); p],
            flops: 0,
        })
    }

    /// Row step on `Y` with row `i` of `A`, then column step on `X` with
    /// column `j` of `B`.
    pub fn step_with(&mut self, i: usize, j: usize) {
        self.r.copy_from_slice(self.c.row(i));
        row_project(
            &mut self.y,
            self.a.row(i),
            &mut self.r,
            self.rows_a.inv[i],
            &mut self.flops,
        );
        for (k, v) in self.ycol.iter_mut().enumerate() {
            *v = self.y[(k, j)];
        }
        let ycol = &self.ycol;
        col_project(
            &mut self.x,
            self.bt.row(j),
            |k| ycol[k],
            self.cols_b.inv[j],
            &mut self.flops,
        );
    }

    pub fn x(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &DenseMatrix<T> {
        &self.y
    }

    pub fn flops(&self) -> u64 {
        self.flops
    }

    pub fn into_x(self) -> DenseMatrix<T> {
        self.x
    }
}

impl<T: Real> Stepper<T> for CmeRk<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let i = self.rows_a.draw(rng);
        let j = self.cols_b.draw(rng);
        self.step_with(i, j);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.x
    }

    fn flops(&self) -> u64 {
        self.flops
    }
}

/// CME-RK: Kaczmarz on `AY = C` interleaved with Kaczmarz on `XB = Y`.
pub fn solve_cme_rk<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    let state = CmeRk::new(a, b, c)?;
    stop.validate(a.cols(), b.rows(), b.cols())?;
    Ok(drive_single(state, cfg, stop, CmeRk::into_x))
}
