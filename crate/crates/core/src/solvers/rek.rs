use crate::error::{Error, Result};
use crate::matrix::{Axis, DenseMatrix};
use crate::rng::RandomSource;
use crate::scalar::Real;

use super::kernels::{axpy, col_project, deflate, gs_row, row_project};
use super::{
    check_index, check_system, drive_single, nonzero_norm, AxisTable, SolveConfig, SolveReport,
    Stepper, StoppingRule,
};

/// `Z ← (I − A[:, j]A[:, j]ᵀ/‖A[:, j]‖²)·Z`, in place.
pub fn rek_z_step<T: Real>(z: &mut DenseMatrix<T>, a: &DenseMatrix<T>, j: usize) -> Result<()> {
    check_index("column", j, a.cols())?;
    if z.rows() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "Z {:?} vs A {:?}",
            z.shape(),
            a.shape()
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
    let mut g = vec![T::zero(); z.cols()];
    deflate(z, &aj, T::one() / norm, &mut g, &mut 0);
    Ok(())
}

/// The extended-Kaczmarz half shared by every REK-based method: a Z-step on
/// column `j` of `A`, then a row step on `Y` against `C − Z`.
#[derive(Debug, Clone)]
pub(crate) struct RekCore<'a, T> {
    pub a: &'a DenseMatrix<T>,
    pub c: &'a DenseMatrix<T>,
    pub at: DenseMatrix<T>,
    pub rows_a: AxisTable<T>,
    pub cols_a: AxisTable<T>,
    pub z: DenseMatrix<T>,
    pub y: DenseMatrix<T>,
    /// Holds the row residual after `step_with`.
    pub r: Vec<T>,
    g: Vec<T>,
    pub flops: u64,
}

impl<'a, T: Real> RekCore<'a, T> {
    pub fn new(a: &'a DenseMatrix<T>, c: &'a DenseMatrix<T>) -> Result<Self> {
        let n = c.cols();
        Ok(Self {
            a,
            c,
            at: a.transpose(),
            rows_a: AxisTable::new(a, Axis::Row, 'A')?,
            cols_a: AxisTable::new(a, Axis::Column, 'A')?,
            z: c.clone(),
            y: DenseMatrix::zeros(a.cols(), n),
            r: vec![T::zero(); n],
            g: vec![T::zero(); n],
            flops: 0,
        })
    }

    pub fn step_with(&mut self, i: usize, j: usize) {
        let fl = &mut self.flops;
        deflate(
            &mut self.z,
            self.at.row(j),
            self.cols_a.inv[j],
            &mut self.g,
            fl,
        );
        *fl += self.r.len() as u64;
        for ((r, &c), &z) in self.r.iter_mut().zip(self.c.row(i)).zip(self.z.row(i)) {
            *r = c - z;
        }
        row_project(
            &mut self.y,
            self.a.row(i),
            &mut self.r,
            self.rows_a.inv[i],
            fl,
        );
    }

    pub fn draw(&self, rng: &mut RandomSource) -> (usize, usize) {
        let i = self.rows_a.draw(rng);
        let j = self.cols_a.draw(rng);
        (i, j)
    }
}

/// Iteration state of IME-REKRK.
#[derive(Debug, Clone)]
pub struct ImeRekRk<'a, T> {
    core: RekCore<'a, T>,
    bt: DenseMatrix<T>,
    cols_b: AxisTable<T>,
    x: DenseMatrix<T>,
    ycol: Vec<T>,
}

impl<'a, T: Real> ImeRekRk<'a, T> {
    pub fn new(a: &'a DenseMatrix<T>, b: &DenseMatrix<T>, c: &'a DenseMatrix<T>) -> Result<Self> {
        check_system(a, b, c)?;
        Ok(Self {
            core: RekCore::new(a, c)?,
            bt: b.transpose(),
            cols_b: AxisTable::new(b, Axis::Column, 'B')?,
            x: DenseMatrix::zeros(a.cols(), b.rows()),
            ycol: vec![T::zero(); a.cols()],
        })
    }

    pub fn step_with(&mut self, i: usize, j: usize, l: usize) {
        self.core.step_with(i, j);
        let y = &self.core.y;
        for (k, v) in self.ycol.iter_mut().enumerate() {
            *v = y[(k, l)];
        }
        let ycol = &self.ycol;
        col_project(
            &mut self.x,
            self.bt.row(l),
            |k| ycol[k],
            self.cols_b.inv[l],
            &mut self.core.flops,
        );
    }

    pub fn x(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &DenseMatrix<T> {
        &self.core.y
    }

    pub fn z(&self) -> &DenseMatrix<T> {
        &self.core.z
    }

    pub fn into_x(self) -> DenseMatrix<T> {
        self.x
    }
}

impl<T: Real> Stepper<T> for ImeRekRk<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let (i, j) = self.core.draw(rng);
        let l = self.cols_b.draw(rng);
        self.step_with(i, j, l);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.x
    }

    fn flops(&self) -> u64 {
        self.core.flops
    }
}

/// Iteration state of IME-REKRGS.
///
/// `E` accumulates each Y-increment `A[i, :]ᵀr/‖A[i, :]‖²` and is drained by
/// the Gauss-Seidel row step, so `E = Y − XB` throughout.
#[derive(Debug, Clone)]
pub struct ImeRekRgs<'a, T> {
    core: RekCore<'a, T>,
    b: &'a DenseMatrix<T>,
    rows_b: AxisTable<T>,
    e: DenseMatrix<T>,
    x: DenseMatrix<T>,
}

impl<'a, T: Real> ImeRekRgs<'a, T> {
    pub fn new(
        a: &'a DenseMatrix<T>,
        b: &'a DenseMatrix<T>,
        c: &'a DenseMatrix<T>,
    ) -> Result<Self> {
        check_system(a, b, c)?;
        Ok(Self {
            core: RekCore::new(a, c)?,
            b,
            rows_b: AxisTable::new(b, Axis::Row, 'B')?,
            e: DenseMatrix::zeros(a.cols(), b.cols()),
            x: DenseMatrix::zeros(a.cols(), b.rows()),
        })
    }

    pub fn step_with(&mut self, i: usize, j: usize, l: usize) {
        self.core.step_with(i, j);
        let core = &mut self.core;
        let inv = core.rows_a.inv[i];
        for (k, &a) in core.a.row(i).iter().enumerate() {
            if a != T::zero() {
                core.flops += 1;
                axpy(a * inv, &core.r, self.e.row_mut(k), &mut core.flops);
            }
        }
        gs_row(
            &mut self.x,
            l,
            &mut self.e,
            self.b.row(l),
            self.rows_b.inv[l],
            &mut core.flops,
        );
    }

    pub fn x(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &DenseMatrix<T> {
        &self.core.y
    }

    pub fn z(&self) -> &DenseMatrix<T> {
        &self.core.z
    }

    pub fn e(&self) -> &DenseMatrix<T> {
        &self.e
    }

    pub fn into_x(self) -> DenseMatrix<T> {
        self.x
    }
}

impl<T: Real> Stepper<T> for ImeRekRgs<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let (i, j) = self.core.draw(rng);
        let l = self.rows_b.draw(rng);
        self.step_with(i, j, l);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.x
    }

    fn flops(&self) -> u64 {
        self.core.flops
    }
}

/// IME-REKRK: extended Kaczmarz on `AY = C`, Kaczmarz on `XB = Y`.
pub fn solve_ime_rekrk<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    let state = ImeRekRk::new(a, b, c)?;
    stop.validate(a.cols(), b.rows(), b.cols())?;
    Ok(drive_single(state, cfg, stop, ImeRekRk::into_x))
}

/// IME-REKRGS: extended Kaczmarz on `AY = C`, Gauss-Seidel on `XB = Y`.
pub fn solve_ime_rekrgs<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    let state = ImeRekRgs::new(a, b, c)?;
    stop.validate(a.cols(), b.rows(), b.cols())?;
    Ok(drive_single(state, cfg, stop, ImeRekRgs::into_x))
}
