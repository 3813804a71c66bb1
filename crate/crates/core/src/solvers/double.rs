//! Two-phase solvers: first `AY = C`, then `XB = Y^{K₁}`.

use crate::error::Result;
use crate::matrix::{Axis, DenseMatrix};
use crate::rng::RandomSource;
use crate::scalar::Real;

use super::kernels::{axpy, col_project, deflate, dot, gs_row};
use super::rek::RekCore;
use super::{
    check_system, drive_double, AxisTable, SolveConfig, SolveReport, Stepper, StoppingRule,
};

/// Phase 1 of DREK: extended Kaczmarz on `AY = C`.
#[derive(Debug, Clone)]
pub struct DrekFirst<'a, T> {
    core: RekCore<'a, T>,
}

impl<'a, T: Real> DrekFirst<'a, T> {
    pub fn new(a: &'a DenseMatrix<T>, c: &'a DenseMatrix<T>) -> Result<Self> {
        Ok(Self {
            core: RekCore::new(a, c)?,
        })
    }

    pub fn step_with(&mut self, i: usize, j: usize) {
        self.core.step_with(i, j);
    }

    pub fn y(&self) -> &DenseMatrix<T> {
        &self.core.y
    }

    pub fn z(&self) -> &DenseMatrix<T> {
        &self.core.z
    }
}

impl<T: Real> Stepper<T> for DrekFirst<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let (i, j) = self.core.draw(rng);
        self.step_with(i, j);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.core.y
    }

    fn flops(&self) -> u64 {
        self.core.flops
    }
}

/// Phase 2 of DREK: extended Kaczmarz on `BᵀXᵀ = Yᵀ`.
///
/// `W` is stored as `p×n`, i.e. transposed relative to the `Bᵀ` system; it
/// starts at `Y^{K₁}` and is deflated by rows of `B`.
#[derive(Debug, Clone)]
pub struct DrekSecond<'a, T> {
    b: &'a DenseMatrix<T>,
    bt: DenseMatrix<T>,
    rows_b: AxisTable<T>,
    cols_b: AxisTable<T>,
    y1: DenseMatrix<T>,
    w: DenseMatrix<T>,
    x: DenseMatrix<T>,
    flops: u64,
}

impl<'a, T: Real> DrekSecond<'a, T> {
    pub fn new(b: &'a DenseMatrix<T>, y1: DenseMatrix<T>) -> Result<Self> {
        let p = y1.rows();
        Ok(Self {
            b,
            bt: b.transpose(),
            rows_b: AxisTable::new(b, Axis::Row, 'B')?,
            cols_b: AxisTable::new(b, Axis::Column, 'B')?,
            w: y1.clone(),
            y1,
            x: DenseMatrix::zeros(p, b.rows()),
            flops: 0,
        })
    }

    pub fn step_with(&mut self, s: usize, t: usize) {
        let fl = &mut self.flops;
        // W ← W − (W·B[s, :]ᵀ)·B[s, :] / ‖B[s, :]‖²
        col_project(
            &mut self.w,
            self.b.row(s),
            |_| T::zero(),
            self.rows_b.inv[s],
            fl,
        );
        *fl += self.x.rows() as u64;
        let (y1, w) = (&self.y1, &self.w);
        col_project(
            &mut self.x,
            self.bt.row(t),
            |k| y1[(k, t)] - w[(k, t)],
            self.cols_b.inv[t],
            fl,
        );
    }

    pub fn x(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn w(&self) -> &DenseMatrix<T> {
        &self.w
    }

    pub fn into_x(self) -> DenseMatrix<T> {
        self.x
    }
}

impl<T: Real> Stepper<T> for DrekSecond<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let s = self.rows_b.draw(rng);
        let t = self.cols_b.draw(rng);
        self.step_with(s, t);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.x
    }

    fn flops(&self) -> u64 {
        self.flops
    }
}

/// Phase 1 of DREGS: Gauss-Seidel on `AF = C` plus a row projection pulling
/// `Y` toward `F` within the row space of `A`.
#[derive(Debug, Clone)]
pub struct DregsFirst<'a, T> {
    a: &'a DenseMatrix<T>,
    at: DenseMatrix<T>,
    rows_a: AxisTable<T>,
    cols_a: AxisTable<T>,
    f: DenseMatrix<T>,
    r: DenseMatrix<T>,
    y: DenseMatrix<T>,
    w: Vec<T>,
    d: Vec<T>,
    flops: u64,
}

impl<'a, T: Real> DregsFirst<'a, T> {
    pub fn new(a: &'a DenseMatrix<T>, c: &DenseMatrix<T>) -> Result<Self> {
        let (p, n) = (a.cols(), c.cols());
        Ok(Self {
            a,
            at: a.transpose(),
            rows_a: AxisTable::new(a, Axis::Row, 'A')?,
            cols_a: AxisTable::new(a, Axis::Column, 'A')?,
            f: DenseMatrix::zeros(p, n),
            r: c.clone(),
            y: DenseMatrix::zeros(p, n),
            w: vec![T::zero(); n],
            d: vec![T::zero(); n],
            flops: 0,
        })
    }

    pub fn step_with(&mut self, i: usize, j: usize) {
        let fl = &mut self.flops;
        deflate(
            &mut self.r,
            self.at.row(j),
            self.cols_a.inv[j],
            &mut self.w,
            fl,
        );
        axpy(T::one(), &self.w, self.f.row_mut(j), fl);
        // d = A[i, :]·(Y − F), then Y −= A[i, :]ᵀ·d / ‖A[i, :]‖²
        self.d.fill(T::zero());
        let a_row = self.a.row(i);
        for (k, &a) in a_row.iter().enumerate() {
            if a != T::zero() {
                axpy(a, self.y.row(k), &mut self.d, fl);
                axpy(-a, self.f.row(k), &mut self.d, fl);
            }
        }
        let inv = self.rows_a.inv[i];
        for (k, &a) in a_row.iter().enumerate() {
            if a != T::zero() {
                *fl += 1;
                axpy(-a * inv, &self.d, self.y.row_mut(k), fl);
            }
        }
    }

    pub fn y(&self) -> &DenseMatrix<T> {
        &self.y
    }

    pub fn f(&self) -> &DenseMatrix<T> {
        &self.f
    }

    pub fn r(&self) -> &DenseMatrix<T> {
        &self.r
    }
}

impl<T: Real> Stepper<T> for DregsFirst<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let i = self.rows_a.draw(rng);
        let j = self.cols_a.draw(rng);
        self.step_with(i, j);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.y
    }

    fn flops(&self) -> u64 {
        self.flops
    }
}

/// Phase 2 of DREGS: Gauss-Seidel on `UB = Y^{K₁}` through `E`, plus a
/// column projection pulling `X` toward `U`.
#[derive(Debug, Clone)]
pub struct DregsSecond<'a, T> {
    b: &'a DenseMatrix<T>,
    bt: DenseMatrix<T>,
    rows_b: AxisTable<T>,
    cols_b: AxisTable<T>,
    e: DenseMatrix<T>,
    u: DenseMatrix<T>,
    x: DenseMatrix<T>,
    flops: u64,
}

impl<'a, T: Real> DregsSecond<'a, T> {
    pub fn new(b: &'a DenseMatrix<T>, y1: DenseMatrix<T>) -> Result<Self> {
        let (p, q) = (y1.rows(), b.rows());
        Ok(Self {
            b,
            bt: b.transpose(),
            rows_b: AxisTable::new(b, Axis::Row, 'B')?,
            cols_b: AxisTable::new(b, Axis::Column, 'B')?,
            e: y1,
            u: DenseMatrix::zeros(p, q),
            x: DenseMatrix::zeros(p, q),
            flops: 0,
        })
    }

    pub fn step_with(&mut self, s: usize, t: usize) {
        let fl = &mut self.flops;
        gs_row(
            &mut self.u,
            s,
            &mut self.e,
            self.b.row(s),
            self.rows_b.inv[s],
            fl,
        );
        // X −= ((X − U)·B[:, t])·B[:, t]ᵀ / ‖B[:, t]‖²
        let bt = self.bt.row(t);
        let inv = self.cols_b.inv[t];
        for k in 0..self.x.rows() {
            let d = dot(self.x.row(k), bt, fl) - dot(self.u.row(k), bt, fl);
            *fl += 3;
            axpy(-d * inv, bt, self.x.row_mut(k), fl);
        }
    }

    pub fn x(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn u(&self) -> &DenseMatrix<T> {
        &self.u
    }

    pub fn e(&self) -> &DenseMatrix<T> {
        &self.e
    }

    pub fn into_x(self) -> DenseMatrix<T> {
        self.x
    }
}

impl<T: Real> Stepper<T> for DregsSecond<'_, T> {
    fn step(&mut self, rng: &mut RandomSource) {
        let s = self.rows_b.draw(rng);
        let t = self.cols_b.draw(rng);
        self.step_with(s, t);
    }

    fn tracked(&self) -> &DenseMatrix<T> {
        &self.x
    }

    fn flops(&self) -> u64 {
        self.flops
    }
}

/// DREK: extended Kaczmarz on both factor equations.
pub fn solve_drek<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    check_system(a, b, c)?;
    let first = DrekFirst::new(a, c)?;
    let second = DrekSecond::new(b, DenseMatrix::zeros(a.cols(), b.cols()))?;
    stop.validate(a.cols(), b.rows(), b.cols())?;
    Ok(drive_double(
        first,
        cfg,
        stop,
        |f| DrekSecond {
            w: f.core.y.clone(),
            y1: f.core.y,
            ..second
        },
        DrekSecond::into_x,
    ))
}

/// DREGS: Gauss-Seidel with row-space projection on both factor equations.
pub fn solve_dregs<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    check_system(a, b, c)?;
    let first = DregsFirst::new(a, c)?;
    let second = DregsSecond::new(b, DenseMatrix::zeros(a.cols(), b.cols()))?;
    stop.validate(a.cols(), b.rows(), b.cols())?;
    Ok(drive_double(
        first,
        cfg,
        stop,
        |f| DregsSecond { e: f.y, ..second },
        DregsSecond::into_x,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::reference_solution;
    use crate::solvers::Termination;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn rank_one_oracle_value() {
        let ones = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let c = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let r = reference_solution(&ones, &ones, &c).unwrap();
        assert!(!r.consistent);
        // A⁺ = B⁺ = ones/4, so X* = ones·C·ones/16 = (sum C)/16 = 0.625.
        assert!(
            r.x_star
                .max_abs_diff(&DenseMatrix::from_fn(2, 2, |_, _| 0.625))
                < 1e-14
        );
    }

    #[test]
    fn drek_and_dregs_on_rank_one_inconsistent() {
        let ones = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let c = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let r = reference_solution(&ones, &ones, &c).unwrap();
        let cfg = SolveConfig::default();
        let d = solve_drek(&ones, &ones, &c, &cfg, StoppingRule::OracleRe(&r)).unwrap();
        assert_eq!(d.terminated, Termination::Converged);
        let (k1, k2) = d.phase_iterations.unwrap();
        assert_eq!(k1 + k2, d.iterations);
        let g = solve_dregs(&ones, &ones, &c, &cfg, StoppingRule::OracleRe(&r)).unwrap();
        assert_eq!(g.terminated, Termination::Converged);
        assert!(g.x_final.max_abs_diff(&r.x_star) < 1e-3);
        assert!(relative_ok(&g.x_final, &r.x_star, 1e-6));
    }

    fn relative_ok(x: &DenseMatrix<f64>, xs: &DenseMatrix<f64>, tol: f64) -> bool {
        crate::matrix::relative_error(x, xs).unwrap() < tol
    }

    #[test]
    fn identity_systems_converge() {
        let id = DenseMatrix::<f64>::identity(3);
        let c = DenseMatrix::from_fn(3, 3, |i, j| 1.0 + i as f64 * 2.0 - j as f64);
        let r = reference_solution(&id, &id, &c).unwrap();
        for solve in [solve_drek::<f64>, solve_dregs::<f64>] {
            let rep = solve(
                &id,
                &id,
                &c,
                &SolveConfig::default(),
                StoppingRule::OracleRe(&r),
            )
            .unwrap();
            assert_eq!(rep.terminated, Termination::Converged);
        }
    }

    #[test]
    fn explicit_phase_split_runs_k1_exactly() {
        let id = DenseMatrix::<f64>::identity(3);
        let c = DenseMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64 - 4.0);
        let r = reference_solution(&id, &id, &c).unwrap();
        let cfg = SolveConfig {
            phase_split: Some((400, 2000)),
            ..Default::default()
        };
        let rep = solve_drek(&id, &id, &c, &cfg, StoppingRule::OracleRe(&r)).unwrap();
        assert_eq!(rep.phase_iterations.unwrap().0, 400);
        assert!(rep.phase_iterations.unwrap().1 <= 2000);
    }

    #[test]
    fn dregs_first_phase_keeps_residual() {
        let a = m(&[&[1.0, 2.0], &[0.5, -1.0], &[3.0, 1.0]]);
        let c = DenseMatrix::from_fn(3, 2, |i, j| (i as f64) - 0.5 * j as f64 + 0.25);
        let mut s = DregsFirst::new(&a, &c).unwrap();
        let mut rng = RandomSource::new(8);
        for _ in 0..300 {
            s.step(&mut rng);
        }
        let direct = c.sub(&a.matmul(s.f()).unwrap()).unwrap();
        assert!(direct.max_abs_diff(s.r()) < 1e-10);
    }
}
