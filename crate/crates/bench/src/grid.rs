//! Declarative experiment grids: a TOML list of (method, problem) cells with
//! optional convergence expectations.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use axb_core::io::{write_report_csv, write_trace_json, ReportRow, TraceRecord};
use axb_core::{Family, Method, ProblemSpec, Termination, DEFAULT_DELTA};

use crate::error::{BenchError, Result};
use crate::experiment::{create, run_trials, ExperimentConfig, ProblemSource, Summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridDefaults {
    pub trials: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub trace_every: usize,
    pub base_seed: u64,
    /// A trial counts for "Y" when its final RE is below this.
    pub converge_below: f64,
    /// A trial counts for "N" when it ran out of iterations with RE above this.
    pub diverge_above: f64,
    /// Trials that must agree with the expectation.
    pub min_agree: usize,
    pub delta: f64,
}

impl Default for GridDefaults {
    fn default() -> Self {
        Self {
            trials: 20,
            tol: 1e-6,
            max_iters: 50_000,
            trace_every: 0,
            base_seed: 1,
            converge_below: 1e-6,
            diverge_above: 1e-2,
            min_agree: 18,
            delta: DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expect {
    Y,
    N,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub label: String,
    pub method: Method,
    /// `[m, p, q, n]`; ignored for file cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 4]>,
    /// `[rank A, rank B]`; defaults to full rank.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<[usize; 2]>,
    #[serde(default = "type1")]
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub a_transpose: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub b_transpose: bool,
    pub consistent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

fn type1() -> Family {
    Family::Type1
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub defaults: GridDefaults,
    #[serde(default, rename = "cell")]
    pub cells: Vec<GridCell>,
}

impl Grid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: Grid = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        for cell in &grid.cells {
            grid.experiment(cell)?;
        }
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("grid serializes")
    }

    /// The experiment a cell stands for; checks the problem description.
    pub fn experiment(&self, cell: &GridCell) -> Result<ExperimentConfig> {
        let d = &self.defaults;
        let bad = |msg: &str| BenchError::Config(format!("cell {:?}: {msg}", cell.label));
        let delta = cell.delta.unwrap_or(d.delta);
        let problem = match (&cell.a_file, &cell.b_file, cell.dims) {
            (Some(a), Some(b), None) => ProblemSource::Files {
                a: a.clone(),
                b: b.clone(),
                a_transpose: cell.a_transpose,
                b_transpose: cell.b_transpose,
                consistent: cell.consistent,
                delta,
            },
            (None, None, Some([m, p, q, n])) => {
                let [rank_a, rank_b] = cell.ranks.unwrap_or([m.min(p), q.min(n)]);
                let [cond_a, cond_b] = cell.cond.unwrap_or([1.0, 1.0]);
                let spec = ProblemSpec {
                    m,
                    p,
                    q,
                    n,
                    rank_a,
                    rank_b,
                    cond_a,
                    cond_b,
                    family: cell.family,
                    consistent: cell.consistent,
                    noise_delta: (!cell.consistent).then_some(delta),
                    seed: 0,
                };
                spec.validate().map_err(|e| bad(&e.to_string()))?;
                ProblemSource::Synthetic(spec)
            }
            _ => return Err(bad("give either dims or both a_file and b_file")),
        };
        if d.min_agree > d.trials {
            return Err(BenchError::Config("min_agree exceeds trials".into()));
        }
        Ok(ExperimentConfig {
            instance: cell.label.clone(),
            trials: d.trials,
            tol: d.tol,
            max_iters: d.max_iters,
            trace_every: d.trace_every,
            base_seed: cell.seed.unwrap_or(d.base_seed),
            out_csv: None,
            out_trace: None,
            ..ExperimentConfig::new(cell.method, problem)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The cell carries no expectation.
    Unchecked,
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub label: String,
    pub method: Method,
    pub expect: Option<Expect>,
    /// Trials with final RE below `converge_below`.
    pub converged: usize,
    /// Trials that hit `max_iters` with final RE above `diverge_above`.
    pub diverged: usize,
    pub verdict: Verdict,
    pub summary: Summary,
    pub rows: Vec<ReportRow>,
    pub traces: Vec<TraceRecord>,
}

impl fmt::Display for CellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let expect = match self.expect {
            Some(Expect::Y) => "Y",
            Some(Expect::N) => "N",
            None => "-",
        };
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Unchecked => "n/a",
        };
        let res: Vec<f64> = self.rows.iter().filter_map(|r| r.final_re).collect();
        let median = if res.is_empty() {
            f64::NAN
        } else {
            let mut s = res.clone();
            s.sort_by(f64::total_cmp);
            s[s.len() / 2]
        };
        write!(
            f,
            "{:<4} {:<11} {:<40} expect {}  Y {:>2}/{}  N {:>2}/{}  median RE {:.2e}",
            verdict,
            self.method.name(),
            self.label,
            expect,
            self.converged,
            self.summary.trials,
            self.diverged,
            self.summary.trials,
            median
        )
    }
}

#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    pub cells: Vec<CellOutcome>,
}

impl MatrixOutcome {
    pub fn failures(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.verdict == Verdict::Fail)
            .count()
    }

    pub fn rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.cells.iter().flat_map(|c| c.rows.iter())
    }

    pub fn traces(&self) -> impl Iterator<Item = &TraceRecord> {
        self.cells.iter().flat_map(|c| c.traces.iter())
    }

    /// 0 when every expectation held, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failures() > 0)
    }
}

pub fn judge(
    d: &GridDefaults,
    expect: Option<Expect>,
    rows: &[ReportRow],
) -> (usize, usize, Verdict) {
    let converged = rows
        .iter()
        .filter(|r| r.final_re.is_some_and(|re| re < d.converge_below))
        .count();
    let diverged = rows
        .iter()
        .filter(|r| r.terminated == Termination::MaxIters)
        .filter(|r| r.final_re.is_some_and(|re| re > d.diverge_above))
        .count();
    let verdict = match expect {
        None => Verdict::Unchecked,
        Some(Expect::Y) if converged >= d.min_agree => Verdict::Pass,
        Some(Expect::N) if diverged >= d.min_agree => Verdict::Pass,
        Some(_) => Verdict::Fail,
    };
    (converged, diverged, verdict)
}

fn run_cell(grid: &Grid, cell: &GridCell) -> Result<CellOutcome> {
    let out = run_trials(&grid.experiment(cell)?)?;
    let rows: Vec<ReportRow> = out.rows().cloned().collect();
    let (converged, diverged, verdict) = judge(&grid.defaults, cell.expect, &rows);
    Ok(CellOutcome {
        label: cell.label.clone(),
        method: cell.method,
        expect: cell.expect,
        converged,
        diverged,
        verdict,
        traces: out.traces().cloned().collect(),
        summary: out.summary,
        rows,
    })
}

/// Runs every cell, in parallel, keeping grid order in the result. A cell
/// whose run errors is reported on stderr and counted as failed.
pub fn run_grid(grid: &Grid) -> MatrixOutcome {
    let cells = grid
        .cells
        .par_iter()
        .map(|cell| {
            run_cell(grid, cell).unwrap_or_else(|e| {
                eprintln!("cell {:?}: {e}", cell.label);
                CellOutcome {
                    label: cell.label.clone(),
                    method: cell.method,
                    expect: cell.expect,
                    converged: 0,
                    diverged: 0,
                    verdict: Verdict::Fail,
                    summary: Summary::from_trials(cell.method, &cell.label, &[]),
                    rows: Vec::new(),
                    traces: Vec::new(),
                }
            })
        })
        .collect();
    MatrixOutcome { cells }
}

/// Loads and runs a grid file, printing one line per cell and writing the
/// combined CSV and trace when paths are given.
pub fn run_matrix(
    path: &Path,
    out_csv: Option<&Path>,
    out_trace: Option<&Path>,
) -> Result<MatrixOutcome> {
    let grid = Grid::load(path)?;
    let outcome = run_grid(&grid);
    for cell in &outcome.cells {
        println!("{cell}");
    }
    if let Some(p) = out_csv {
        write_report_csv(outcome.rows(), create(p)?)?;
    }
    if let Some(p) = out_trace {
        write_trace_json(outcome.traces(), create(p)?)?;
    }
    Ok(outcome)
}
