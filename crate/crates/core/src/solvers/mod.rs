//! Randomized row/column projection solvers for `AXB = C`.
//!
//! Every solver starts from zero iterates and touches `A`, `B`, `C` only
//! through single rows, single columns and rank-1 updates.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{axis_norms_sq, relative_error, Axis, DenseMatrix};
use crate::oracle::ReferenceSolution;
use crate::rng::RandomSource;
use crate::sampling::{build_weights, SamplingWeights};
use crate::scalar::Real;

mod cme_rk;
mod double;
mod ime_rgs;
pub mod kernels;
mod rek;

pub use cme_rk::{rk_col_step, rk_row_step, solve_cme_rk, CmeRk};
pub use double::{solve_dregs, solve_drek, DregsFirst, DregsSecond, DrekFirst, DrekSecond};
pub use ime_rgs::{rgs_col_step, rgs_row_step, solve_ime_rgs, ImeRgs};
pub use rek::{rek_z_step, solve_ime_rekrgs, solve_ime_rekrk, ImeRekRgs, ImeRekRk};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// RE threshold under the oracle rule, window-change threshold under the
    /// surrogate rule.
    pub tol: f64,
    /// Record `(k, RE)` every this many iterations; 0 disables the trace.
    pub trace_every: usize,
    pub seed: u64,
    /// Fixed `(K₁, K₂)` for the two-phase methods. Phase 2 still stops early
    /// on its own criterion.
    pub phase_split: Option<(usize, usize)>,
    /// RE is evaluated every this many iterations and on the last one.
    pub check_every: usize,
    /// Window `w` of the surrogate rule.
    pub window: usize,
    /// Phase 1 of DREK/DREGS stops on `RE(Y) < tol·phase1_tol_factor`.
    pub phase1_tol_factor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            tol: 1e-6,
            trace_every: 0,
            seed: 0,
            phase_split: None,
            check_every: 10,
            window: 100,
            phase1_tol_factor: 0.01,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::BadConfig("max_iters must be at least 1".into()));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::BadConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.check_every == 0 || self.window == 0 {
            return Err(Error::BadConfig(
                "check_every and window must be at least 1".into(),
            ));
        }
        if self.phase1_tol_factor.is_nan() || self.phase1_tol_factor <= 0.0 {
            return Err(Error::BadConfig(
                "phase1_tol_factor must be positive".into(),
            ));
        }
        if let Some((k1, k2)) = self.phase_split {
            if k1 == 0 || k2 == 0 {
                return Err(Error::BadConfig(format!(
                    "phase_split needs K1, K2 >= 1, got ({k1}, {k2})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIters,
    Stagnated,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "Converged",
            Termination::MaxIters => "MaxIters",
            Termination::Stagnated => "Stagnated",
        })
    }
}

impl FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Converged" => Ok(Termination::Converged),
            "MaxIters" => Ok(Termination::MaxIters),
            "Stagnated" => Ok(Termination::Stagnated),
            other => Err(Error::BadConfig(format!("unknown termination {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub x_final: DenseMatrix<T>,
    /// `K₁ + K₂` for the two-phase methods.
    pub iterations: usize,
    pub wall_seconds: f64,
    pub final_re: Option<f64>,
    pub terminated: Termination,
    /// `(k, RE)`; during phase 1 of DREK/DREGS the tracked iterate is `Y`
    /// against `Y*`.
    pub trace: Vec<(usize, f64)>,
    pub phase_iterations: Option<(usize, usize)>,
    pub flops: u64,
}

#[derive(Debug, Clone, Copy)]
pub enum StoppingRule<'a, T> {
    /// Stop once `RE(X^k) < tol` against a known reference.
    OracleRe(&'a ReferenceSolution<T>),
    /// Stop once `‖X^k − X^{k−w}‖_F / max(1, ‖X^k‖_F) < tol`.
    ResidualSurrogate,
}

impl<T: Real> StoppingRule<'_, T> {
    fn validate(&self, p: usize, q: usize, n: usize) -> Result<()> {
        if let StoppingRule::OracleRe(r) = self {
            if r.x_star.shape() != (p, q) || r.y_star.shape() != (p, n) {
                return Err(Error::ShapeMismatch(format!(
                    "reference X* is {:?}, expected {p}x{q}",
                    r.x_star.shape()
                )));
            }
            if r.x_star.is_zero() {
                return Err(Error::ZeroReference);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CmeRk,
    ImeRgs,
    ImeRekrk,
    ImeRekrgs,
    Drek,
    Dregs,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::CmeRk,
        Method::ImeRgs,
        Method::ImeRekrk,
        Method::ImeRekrgs,
        Method::Drek,
        Method::Dregs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CmeRk => "cme-rk",
            Method::ImeRgs => "ime-rgs",
            Method::ImeRekrk => "ime-rekrk",
            Method::ImeRekrgs => "ime-rekrgs",
            Method::Drek => "drek",
            Method::Dregs => "dregs",
        }
    }

    pub fn is_two_phase(self) -> bool {
        matches!(self, Method::Drek | Method::Dregs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::BadConfig(format!("unknown method {s:?}")))
    }
}

pub fn solve<T: Real>(
    method: Method,
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
) -> Result<SolveReport<T>> {
    match method {
        Method::CmeRk => solve_cme_rk(a, b, c, cfg, stop),
        Method::ImeRgs => solve_ime_rgs(a, b, c, cfg, stop),
        Method::ImeRekrk => solve_ime_rekrk(a, b, c, cfg, stop),
        Method::ImeRekrgs => solve_ime_rekrgs(a, b, c, cfg, stop),
        Method::Drek => solve_drek(a, b, c, cfg, stop),
        Method::Dregs => solve_dregs(a, b, c, cfg, stop),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing

pub(crate) fn check_system<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
) -> Result<()> {
    if c.rows() != a.rows() || c.cols() != b.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A is {:?} and B is {:?}, so C must be {}x{}, got {:?}",
            a.shape(),
            b.shape(),
            a.rows(),
            b.cols(),
            c.shape()
        )));
    }
    Ok(())
}

/// Sampling table plus reciprocal norms for one axis of one matrix.
#[derive(Debug, Clone)]
pub(crate) struct AxisTable<T> {
    pub weights: SamplingWeights,
    pub inv: Vec<T>,
}

impl<T: Real> AxisTable<T> {
    pub fn new(m: &DenseMatrix<T>, axis: Axis, name: char) -> Result<Self> {
        let norms = axis_norms_sq(m, axis);
        let weights = build_weights(&norms).map_err(|e| match e {
            Error::ZeroWeight { index, .. } => match axis {
                Axis::Row => Error::ZeroRow {
                    matrix: name,
                    index,
                },
                Axis::Column => Error::ZeroColumn {
                    matrix: name,
                    index,
                },
            },
            other => other,
        })?;
        let inv = norms.iter().map(|&v| T::one() / v).collect();
        Ok(Self { weights, inv })
    }

    #[inline]
    pub fn draw(&self, rng: &mut RandomSource) -> usize {
        self.weights.sample(rng)
    }
}

pub(crate) fn nonzero_norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum()
}

pub(crate) fn check_index(kind: &str, index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::BadShape(format!(
            "{kind} index {index} out of range 0..{len}"
        )));
    }
    Ok(())
}

/// One randomized iteration of a single-phase method or one phase of a
/// two-phase method.
pub(crate) trait Stepper<T: Real> {
    fn step(&mut self, rng: &mut RandomSource);
    /// Iterate watched by the stopping rule.
    fn tracked(&self) -> &DenseMatrix<T>;
    fn flops(&self) -> u64;
}

pub(crate) enum Watch<'a, T> {
    Oracle {
        target: &'a DenseMatrix<T>,
        tol: f64,
    },
    Surrogate {
        tol: f64,
    },
    Fixed,
}

pub(crate) struct PhaseOutcome {
    pub iterations: usize,
    pub terminated: Termination,
    pub last_re: Option<f64>,
}

pub(crate) struct Trace<'a, T> {
    pub every: usize,
    pub offset: usize,
    pub target: Option<&'a DenseMatrix<T>>,
    pub points: Vec<(usize, f64)>,
}

fn re_f64<T: Real>(x: &DenseMatrix<T>, target: &DenseMatrix<T>) -> f64 {
    relative_error(x, target)
        .expect("reference validated before the loop")
        .to_f64_lossy()
}

fn change_ratio<T: Real>(x: &DenseMatrix<T>, snap: &DenseMatrix<T>) -> f64 {
    let diff: T = x
        .as_slice()
        .iter()
        .zip(snap.as_slice())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    diff.to_f64_lossy().sqrt() / x.frobenius_norm().to_f64_lossy().max(1.0)
}

pub(crate) fn run_phase<T: Real, S: Stepper<T>>(
    state: &mut S,
    rng: &mut RandomSource,
    budget: usize,
    watch: &Watch<'_, T>,
    check_every: usize,
    window: usize,
    trace: &mut Trace<'_, T>,
) -> PhaseOutcome {
    let mut snap = match watch {
        Watch::Surrogate { .. } => Some(state.tracked().clone()),
        _ => None,
    };
    for k in 1..=budget {
        state.step(rng);
        if trace.every > 0 && (trace.offset + k).is_multiple_of(trace.every) {
            if let Some(t) = trace.target {
                trace
                    .points
                    .push((trace.offset + k, re_f64(state.tracked(), t)));
            }
        }
        match watch {
            Watch::Oracle { target, tol } => {
                if k % check_every == 0 || k == budget {
                    let re = re_f64(state.tracked(), target);
                    if re < *tol {
                        return PhaseOutcome {
                            iterations: k,
                            terminated: Termination::Converged,
                            last_re: Some(re),
                        };
                    }
                    if k == budget {
                        return PhaseOutcome {
                            iterations: k,
                            terminated: Termination::MaxIters,
                            last_re: Some(re),
                        };
                    }
                }
            }
            Watch::Surrogate { tol } => {
                if k % window == 0 {
                    let s = snap
                        .as_mut()
                        .expect("snapshot exists under the surrogate rule");
                    if change_ratio(state.tracked(), s) < *tol {
                        return PhaseOutcome {
                            iterations: k,
                            terminated: Termination::Stagnated,
                            last_re: None,
                        };
                    }
                    s.as_mut_slice().copy_from_slice(state.tracked().as_slice());
                }
            }
            Watch::Fixed => {}
        }
    }
    PhaseOutcome {
        iterations: budget,
        terminated: Termination::MaxIters,
        last_re: None,
    }
}

/// Drives a single-phase method and assembles the report.
pub(crate) fn drive_single<T: Real, S: Stepper<T>>(
    mut state: S,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
    finish: impl FnOnce(S) -> DenseMatrix<T>,
) -> SolveReport<T> {
    let mut rng = RandomSource::new(cfg.seed);
    let (watch, target) = match stop {
        StoppingRule::OracleRe(r) => (
            Watch::Oracle {
                target: &r.x_star,
                tol: cfg.tol,
            },
            Some(&r.x_star),
        ),
        StoppingRule::ResidualSurrogate => (Watch::Surrogate { tol: cfg.tol }, None),
    };
    let mut trace = Trace {
        every: cfg.trace_every,
        offset: 0,
        target,
        points: Vec::new(),
    };
    if let (true, Some(t)) = (cfg.trace_every > 0, target) {
        trace.points.push((0, re_f64(state.tracked(), t)));
    }
    let start = Instant::now();
    let out = run_phase(
        &mut state,
        &mut rng,
        cfg.max_iters,
        &watch,
        cfg.check_every,
        cfg.window,
        &mut trace,
    );
    let wall_seconds = start.elapsed().as_secs_f64();
    let flops = state.flops();
    SolveReport {
        x_final: finish(state),
        iterations: out.iterations,
        wall_seconds,
        final_re: out.last_re,
        terminated: out.terminated,
        trace: trace.points,
        phase_iterations: None,
        flops,
    }
}

/// Drives a two-phase method: phase 1 on `AY = C`, phase 2 on `XB = Y^{K₁}`.
pub(crate) fn drive_double<T: Real, P: Stepper<T>, Q: Stepper<T>>(
    mut first: P,
    cfg: &SolveConfig,
    stop: StoppingRule<'_, T>,
    into_second: impl FnOnce(P) -> Q,
    finish: impl FnOnce(Q) -> DenseMatrix<T>,
) -> SolveReport<T> {
    let mut rng = RandomSource::new(cfg.seed);
    let (k1_budget, k2_budget) = cfg.phase_split.unwrap_or((cfg.max_iters, cfg.max_iters));
    let (w1, w2, t1, t2) = match stop {
        StoppingRule::OracleRe(r) => (
            Watch::Oracle {
                target: &r.y_star,
                tol: cfg.tol * cfg.phase1_tol_factor,
            },
            Watch::Oracle {
                target: &r.x_star,
                tol: cfg.tol,
            },
            Some(&r.y_star),
            Some(&r.x_star),
        ),
        StoppingRule::ResidualSurrogate => (
            Watch::Surrogate {
                tol: cfg.tol * cfg.phase1_tol_factor,
            },
            Watch::Surrogate { tol: cfg.tol },
            None,
            None,
        ),
    };
    let w1 = if cfg.phase_split.is_some() {
        Watch::Fixed
    } else {
        w1
    };
    let mut trace = Trace {
        every: cfg.trace_every,
        offset: 0,
        target: t1,
        points: Vec::new(),
    };
    if let (true, Some(t)) = (cfg.trace_every > 0, t1) {
        trace.points.push((0, re_f64(first.tracked(), t)));
    }
    let start = Instant::now();
    let o1 = run_phase(
        &mut first,
        &mut rng,
        k1_budget,
        &w1,
        cfg.check_every,
        cfg.window,
        &mut trace,
    );
    let flops1 = first.flops();
    let mut second = into_second(first);
    trace.offset = o1.iterations;
    trace.target = t2;
    let o2 = run_phase(
        &mut second,
        &mut rng,
        k2_budget,
        &w2,
        cfg.check_every,
        cfg.window,
        &mut trace,
    );
    let wall_seconds = start.elapsed().as_secs_f64();
    let flops = flops1 + second.flops();
    SolveReport {
        x_final: finish(second),
        iterations: o1.iterations + o2.iterations,
        wall_seconds,
        final_re: o2.last_re,
        terminated: o2.terminated,
        trace: trace.points,
        phase_iterations: Some((o1.iterations, o2.iterations)),
        flops,
    }
}
