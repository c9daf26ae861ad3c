use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ptf_lab::Backend;
use ptf_lab_harness::entropy::BoundKind;
use ptf_lab_harness::{
    compare_entropy, default_grid, print_bounds, run, verify_lower_bounds, ExperimentConfig, GridEntry,
    Learner, ModelKind,
};

#[derive(Parser)]
#[command(name = "ptf-lab", version, about = "Query-complexity experiments for polynomial threshold learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep of learner trials and write per-trial CSV plus aggregate JSON.
    Run(RunArgs),
    /// Build and exactly verify the lower-bound witnesses.
    VerifyLowerBounds(VerifyArgs),
    /// Check average-case result files against entropy lower bounds.
    CompareEntropy {
        /// CSV files written by `run`.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Tabulate the iterative learner's deterministic query bound.
    PrintBounds {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "256,4096,65536")]
        n: Vec<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_learner)]
    learner: Learner,
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Batch exponents (batch learner).
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, default_value = "uniform", value_parser = parse_model)]
    model: ModelKind,
    /// Dirichlet concentrations (dirichlet model).
    #[arg(long, value_delimiter = ',')]
    dirichlet_alpha: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "float", value_parser = parse_backend)]
    backend: Backend,
    /// CSV output path; aggregates go next to it as `.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write wall_ms = 0 so that repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
    /// Draw the leading sign of each hidden polynomial at random.
    #[arg(long)]
    random_leading: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Write one JSON fixture per verified witness into this directory.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// JSON file holding a list of grid entries; the built-in grid otherwise.
    #[arg(long)]
    grid: Option<PathBuf>,
}

fn parse_learner(s: &str) -> Result<Learner, String> {
    s.parse().map_err(|e: ptf_lab_harness::HarnessError| e.to_string())
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: ptf_lab_harness::HarnessError| e.to_string())
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: ptf_lab::ScalarError| e.to_string())
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let cfg = ExperimentConfig {
        learner: a.learner,
        d: a.d,
        n: a.n,
        alpha: a.alpha,
        model: a.model,
        dirichlet_alpha: a.dirichlet_alpha,
        trials: a.trials,
        master_seed: a.seed,
        backend: a.backend,
        random_leading: a.random_leading,
        timing: !a.no_timing,
        out: a.out,
    };
    let result = run(&cfg)?;
    println!("{:>4} {:>8} {:>8} {:>8} {:>10} {:>9} {:>8} {:>9}", "d", "n", "alpha", "trials", "queries", "stderr", "rounds", "mean_z");
    for c in &result.aggregates {
        let alpha = c.alpha.map_or("-".into(), |a| format!("{a}"));
        match (c.queries, c.rounds) {
            (Some(q), Some(r)) => println!(
                "{:>4} {:>8} {:>8} {:>8} {:>10.2} {:>9.3} {:>8.3} {:>9}",
                c.d,
                c.n,
                alpha,
                c.trials,
                q.mean,
                q.stderr,
                r.mean,
                c.z.map_or("-".into(), |z| format!("{:.2}", z.mean))
            ),
            _ => println!("{:>4} {:>8} {:>8} {:>8}  {} failed trial(s), no aggregate", c.d, c.n, alpha, c.trials, c.failures),
        }
    }
    for r in result.failures() {
        eprintln!(
            "trial {} (d={}, n={}, stream {}): {}",
            r.trial,
            r.d,
            r.n,
            r.seed_stream,
            r.error.as_deref().unwrap_or("labels differ from ground truth")
        );
    }
    Ok(result.ok())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let grid: Vec<GridEntry> = match &a.grid {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => default_grid(),
    };
    let report = verify_lower_bounds(&grid);
    for e in &report.entries {
        println!("{} {:<40} {}", if e.passed { "PASS" } else { "FAIL" }, e.entry.label(), e.detail);
    }
    if let Some(dir) = &a.fixtures {
        report.write_fixtures(dir)?;
    }
    Ok(report.passed())
}

fn cmd_entropy(files: Vec<PathBuf>) -> Result<bool> {
    let report = compare_entropy(&files)?;
    if report.cells.is_empty() {
        bail!("no sample_search rows found");
    }
    for c in &report.cells {
        let q = c.queries.map_or("n/a".into(), |q| format!("{:.2} +- {:.2}", q.mean, q.stderr));
        let kind = match c.kind {
            BoundKind::Uniform => "uniform",
            BoundKind::DirichletExact => "dirichlet exact",
            BoundKind::DirichletSurrogate => "dirichlet surrogate (not asserted)",
        };
        println!(
            "{} {:<9} d={} n={} alpha={} mean {} vs bound {:.3} [{}]",
            if c.passed { "PASS" } else { "FAIL" },
            c.model,
            c.d,
            c.n,
            c.alpha.map_or("-".into(), |a| a.to_string()),
            q,
            c.bound,
            kind
        );
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::VerifyLowerBounds(a) => cmd_verify(a),
        Command::CompareEntropy { files } => cmd_entropy(files),
        Command::PrintBounds { d, n } => {
            println!("{:>3} {:>10} {:>8} {:>9} {:>9}", "d", "n", "log2_n", "segments", "queries");
            for r in print_bounds(&d, &n) {
                println!("{:>3} {:>10} {:>8} {:>9} {:>9}", r.d, r.n, r.log2_n, r.segments, r.queries);
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
