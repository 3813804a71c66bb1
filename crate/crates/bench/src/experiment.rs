//! Seeded multi-trial runs of one method on one problem.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use axb_core::io::{
    read_matrix_market, write_report_csv, write_trace_json, ReportRow, TraceRecord,
};
use axb_core::{
    generate, make_rhs, numerical_rank, reference_solution, solve, Matrix, Method, ProblemSpec,
    RandomSource, SolveConfig, StoppingRule, Termination,
};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    /// `spec.seed` is replaced by the trial seed.
    Synthetic(ProblemSpec),
    /// Fixed `A` and `B` from Matrix Market files; each trial plants a fresh
    /// `X` and, when inconsistent, fresh noise.
    Files {
        a: PathBuf,
        b: PathBuf,
        a_transpose: bool,
        b_transpose: bool,
        consistent: bool,
        delta: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub problem: ProblemSource,
    pub instance: String,
    pub trials: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub trace_every: usize,
    /// Trial `t` uses seed `base_seed + t`.
    pub base_seed: u64,
    pub out_csv: Option<PathBuf>,
    pub out_trace: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(method: Method, problem: ProblemSource) -> Self {
        Self {
            method,
            problem,
            instance: String::new(),
            trials: 20,
            tol: 1e-6,
            max_iters: 50_000,
            trace_every: 0,
            base_seed: 1,
            out_csv: None,
            out_trace: None,
        }
    }

    /// Seed for the instance of trial `t`.
    pub fn trial_seed(&self, t: usize) -> u64 {
        self.base_seed.wrapping_add(t as u64)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        self.solve_config(0)
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        if let ProblemSource::Synthetic(spec) = &self.problem {
            spec.validate()?;
        }
        Ok(())
    }

    fn solve_config(&self, seed: u64) -> SolveConfig {
        SolveConfig {
            max_iters: self.max_iters,
            tol: self.tol,
            trace_every: self.trace_every,
            seed: RandomSource::derive_seed(seed, 1),
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub row: ReportRow,
    pub phases: Option<(usize, usize)>,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub instance: String,
    pub trials: usize,
    pub converged: usize,
    /// Over trials that did not hit `max_iters`; `None` if all did.
    pub mean_iters: Option<f64>,
    pub mean_phases: Option<(f64, f64)>,
    pub mean_wall_seconds: f64,
    pub convergence_fraction: f64,
}

impl Summary {
    pub fn from_trials(method: Method, instance: &str, trials: &[TrialResult]) -> Self {
        let done: Vec<&TrialResult> = trials
            .iter()
            .filter(|t| t.row.terminated != Termination::MaxIters)
            .collect();
        let mean = |xs: &mut dyn Iterator<Item = f64>, n: usize| xs.sum::<f64>() / n as f64;
        let mean_iters = (!done.is_empty())
            .then(|| mean(&mut done.iter().map(|t| t.row.iters as f64), done.len()));
        let mean_phases = if method.is_two_phase() && !done.is_empty() {
            let k1 = mean(
                &mut done.iter().filter_map(|t| t.phases).map(|p| p.0 as f64),
                done.len(),
            );
            let k2 = mean(
                &mut done.iter().filter_map(|t| t.phases).map(|p| p.1 as f64),
                done.len(),
            );
            Some((k1, k2))
        } else {
            None
        };
        let converged = trials
            .iter()
            .filter(|t| t.row.terminated == Termination::Converged)
            .count();
        Summary {
            method,
            instance: instance.to_string(),
            trials: trials.len(),
            converged,
            mean_iters,
            mean_phases,
            mean_wall_seconds: mean(&mut trials.iter().map(|t| t.row.wall_seconds), trials.len()),
            convergence_fraction: converged as f64 / trials.len() as f64,
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let it = match (self.mean_phases, self.mean_iters) {
            (Some((k1, k2)), _) => format!("{k1:.1} + {k2:.1}"),
            (None, Some(k)) => format!("{k:.1}"),
            (None, None) => ">".to_string(),
        };
        write!(
            f,
            "{:<11} {:<28} IT {:>16}  CPU {:>8.4}  converged {}/{}",
            self.method.name(),
            self.instance,
            it,
            self.mean_wall_seconds,
            self.converged,
            self.trials
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialResult>,
    pub summary: Summary,
}

impl ExperimentOutput {
    pub fn rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.trials.iter().map(|t| &t.row)
    }

    pub fn traces(&self) -> impl Iterator<Item = &TraceRecord> {
        self.trials.iter().flat_map(|t| t.trace.iter())
    }
}

fn load(path: &Path, transpose: bool) -> Result<Matrix> {
    let m: Matrix = read_matrix_market(path)?;
    Ok(if transpose { m.transpose() } else { m })
}

enum Prepared {
    Synthetic(ProblemSpec),
    Files {
        a: Matrix,
        b: Matrix,
        r1: usize,
        r2: usize,
        consistent: bool,
        delta: f64,
    },
}

fn run_trial(cfg: &ExperimentConfig, prepared: &Prepared, t: usize) -> Result<TrialResult> {
    let seed = cfg.trial_seed(t);
    let (a, b, c, r1, r2) = match prepared {
        Prepared::Synthetic(spec) => {
            let inst = generate::<f64>(&ProblemSpec {
                seed,
                ..spec.clone()
            })?;
            (inst.a, inst.b, inst.c, spec.rank_a, spec.rank_b)
        }
        Prepared::Files {
            a,
            b,
            r1,
            r2,
            consistent,
            delta,
        } => {
            let mut rng = RandomSource::new(seed);
            let (c, _) = make_rhs(a, b, !consistent, *delta, &mut rng)?;
            (a.clone(), b.clone(), c, *r1, *r2)
        }
    };
    let reference = reference_solution(&a, &b, &c)?;
    let rep = solve(
        cfg.method,
        &a,
        &b,
        &c,
        &cfg.solve_config(seed),
        StoppingRule::OracleRe(&reference),
    )?;
    let trace = rep
        .trace
        .iter()
        .map(|&(k, re)| TraceRecord {
            method: cfg.method.name().to_string(),
            instance: cfg.instance.clone(),
            trial: t,
            k,
            re,
        })
        .collect();
    Ok(TrialResult {
        row: ReportRow {
            method: cfg.method.name().to_string(),
            instance: cfg.instance.clone(),
            m: a.rows(),
            p: a.cols(),
            r1,
            q: b.rows(),
            n: b.cols(),
            r2,
            trial: t,
            seed,
            iters: rep.iterations,
            wall_seconds: rep.wall_seconds,
            final_re: rep.final_re,
            terminated: rep.terminated,
        },
        phases: rep.phase_iterations,
        trace,
    })
}

/// Runs every trial without writing anything.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let prepared = match &cfg.problem {
        ProblemSource::Synthetic(spec) => Prepared::Synthetic(spec.clone()),
        ProblemSource::Files {
            a,
            b,
            a_transpose,
            b_transpose,
            consistent,
            delta,
        } => {
            let a = load(a, *a_transpose)?;
            let b = load(b, *b_transpose)?;
            Prepared::Files {
                r1: numerical_rank(&a),
                r2: numerical_rank(&b),
                a,
                b,
                consistent: *consistent,
                delta: *delta,
            }
        }
    };
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &prepared, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_trials(cfg.method, &cfg.instance, &trials);
    Ok(ExperimentOutput { trials, summary })
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })
}

/// Runs the trials, writes the CSV and trace outputs that are configured,
/// and returns the summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    let out = run_trials(cfg)?;
    if let Some(path) = &cfg.out_csv {
        write_report_csv(out.rows(), create(path)?)?;
    }
    if let Some(path) = &cfg.out_trace {
        write_trace_json(out.traces(), create(path)?)?;
    }
    Ok(out.summary)
}
