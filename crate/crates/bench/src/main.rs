use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};

use axb_bench::{convergence, run_experiment, run_matrix, ExperimentConfig, ProblemSource, Result};
use axb_core::{Family, Method, ProblemSpec, DEFAULT_DELTA};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Type1,
    Type2,
}

#[derive(Debug, Parser)]
#[command(
    version,
    about = "Randomized projection solvers for AXB = C: seeded experiments"
)]
#[command(group(ArgGroup::new("consistency").args(["consistent", "inconsistent"])))]
struct Cli {
    /// Run a TOML grid instead of a single experiment.
    #[arg(long, conflicts_with_all = ["method", "a_file", "b_file"])]
    grid: Option<PathBuf>,

    /// Print the shipped 6 × 8 convergence grid as TOML and exit.
    #[arg(long, exclusive = true)]
    print_convergence_grid: bool,

    #[arg(long, value_parser = parse_method, required_unless_present_any = ["grid", "print_convergence_grid"])]
    method: Option<Method>,

    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 40)]
    p: usize,
    #[arg(long, default_value_t = 40)]
    q: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Defaults to min(m, p).
    #[arg(long)]
    rank_a: Option<usize>,
    /// Defaults to min(q, n).
    #[arg(long)]
    rank_b: Option<usize>,
    #[arg(long, value_enum, default_value = "type1")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    cond_a: f64,
    #[arg(long, default_value_t = 1.0)]
    cond_b: f64,

    /// The default.
    #[arg(long)]
    consistent: bool,
    #[arg(long)]
    inconsistent: bool,
    /// Noise level of inconsistent right-hand sides.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,

    /// Matrix Market file for A; needs --b-file.
    #[arg(long, requires = "b_file")]
    a_file: Option<PathBuf>,
    #[arg(long, requires = "a_file")]
    b_file: Option<PathBuf>,
    /// Use the transpose of the matrix read from --a-file.
    #[arg(long, requires = "a_file")]
    a_transpose: bool,
    #[arg(long, requires = "b_file")]
    b_transpose: bool,

    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Record RE every this many iterations; 0 disables traces.
    #[arg(long, default_value_t = 0)]
    trace_every: usize,
    /// Base seed; trial t uses seed + t.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// NDJSON convergence trace.
    #[arg(long)]
    out_trace: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

impl Cli {
    fn experiment(&self, method: Method) -> ExperimentConfig {
        let consistent = !self.inconsistent;
        let problem = match (&self.a_file, &self.b_file) {
            (Some(a), Some(b)) => ProblemSource::Files {
                a: a.clone(),
                b: b.clone(),
                a_transpose: self.a_transpose,
                b_transpose: self.b_transpose,
                consistent,
                delta: self.delta,
            },
            _ => ProblemSource::Synthetic(ProblemSpec {
                m: self.m,
                p: self.p,
                q: self.q,
                n: self.n,
                rank_a: self.rank_a.unwrap_or(self.m.min(self.p)),
                rank_b: self.rank_b.unwrap_or(self.q.min(self.n)),
                cond_a: self.cond_a,
                cond_b: self.cond_b,
                family: match self.family {
                    FamilyArg::Type1 => Family::Type1,
                    FamilyArg::Type2 => Family::Type2,
                },
                consistent,
                noise_delta: (!consistent).then_some(self.delta),
                seed: self.seed,
            }),
        };
        let instance = match (&self.a_file, &self.b_file) {
            (Some(a), Some(b)) => format!("{}|{}", a.display(), b.display()),
            _ => format!(
                "{:?} ({},{},{},{},{},{}) {}",
                self.family,
                self.m,
                self.p,
                self.rank_a.unwrap_or(self.m.min(self.p)),
                self.q,
                self.n,
                self.rank_b.unwrap_or(self.q.min(self.n)),
                if consistent {
                    "consistent"
                } else {
                    "inconsistent"
                }
            )
            .to_lowercase(),
        };
        ExperimentConfig {
            instance,
            trials: self.trials,
            tol: self.tol,
            max_iters: self.max_iters,
            trace_every: self.trace_every,
            base_seed: self.seed,
            out_csv: self.out_csv.clone(),
            out_trace: self.out_trace.clone(),
            ..ExperimentConfig::new(method, problem)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if cli.print_convergence_grid {
        print!("{}", convergence::FIXTURE);
        return Ok(0);
    }
    if let Some(path) = &cli.grid {
        let outcome = run_matrix(path, cli.out_csv.as_deref(), cli.out_trace.as_deref())?;
        let failed = outcome.failures();
        println!("{} cells, {} failed", outcome.cells.len(), failed);
        return Ok(u8::from(failed > 0));
    }
    let method = cli.method.expect("clap enforces --method");
    let summary = run_experiment(&cli.experiment(method))?;
    println!("{summary}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
