//! Command-line surface: distribution grids, exact-vs-MC timing tables,
//! optimization experiments and runtime ECDF reports, all emitted as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hvi_core::bo::ExperimentConfig;
use hvi_core::dist::BiGaussian;
use hvi_core::gauss::QuadratureConfig;
use hvi_core::mc::{self, McConfig};
use hvi_core::report;

#[derive(Parser)]
#[command(
    name = "hvi",
    about = "Exact hypervolume-improvement distributions for bi-objective Bayesian optimization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the improvement PDF/CDF of a front under a Gaussian
    /// predictive law over a grid and write (delta, pdf, cdf) rows.
    Dist(DistArgs),
    /// Time the exact CDF evaluation against the Monte-Carlo estimate for
    /// growing front sizes and write an (n, t_exact_s, t_mc_s) table.
    Bench(BenchArgs),
    /// Run a Bayesian-optimization experiment from a TOML config, writing
    /// one CSV per repetition plus a summary.
    Optimize(OptimizeArgs),
    /// Aggregate run CSVs into the runtime ECDF over hypervolume targets.
    Ecdf(EcdfArgs),
}

#[derive(Args)]
struct DistArgs {
    /// Front file: `# ref: r1,r2` header plus one `y1,y2` point per line.
    #[arg(long)]
    front: PathBuf,
    /// Predictive means `mu1,mu2`.
    #[arg(long)]
    mu: String,
    /// Predictive standard deviations `sigma1,sigma2`.
    #[arg(long)]
    sigma: String,
    /// Number of grid points.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Optional evaluation range `lo,hi` (defaults to the support).
    #[arg(long)]
    range: Option<String>,
    /// Append an empirical CDF column from this many Monte-Carlo samples.
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    quad_tol: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated front sizes.
    #[arg(long, default_value = "10,20,30,40,50,60,70,80,90,100")]
    sizes: String,
    /// Monte-Carlo samples per evaluation.
    #[arg(long, default_value_t = 10_000)]
    mc_samples: usize,
    /// Timing repetitions (medians are reported).
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    quad_tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Quadrature tolerance override.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Directory for run and summary CSVs.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EcdfArgs {
    /// Run record CSVs produced by `optimize`.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Number of hypervolume targets.
    #[arg(long, default_value_t = 10)]
    targets: usize,
    #[arg(long)]
    out: PathBuf,
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        bail!("{what} must be two comma-separated numbers, got `{text}`");
    }
    Ok((
        parts[0]
            .trim()
            .parse()
            .with_context(|| format!("bad {what}"))?,
        parts[1]
            .trim()
            .parse()
            .with_context(|| format!("bad {what}"))?,
    ))
}

fn cmd_dist(args: &DistArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.front)
        .with_context(|| format!("reading {}", args.front.display()))?;
    let front = report::parse_front_file(&text)?;
    let (mu1, mu2) = parse_pair(&args.mu, "--mu")?;
    let (sigma1, sigma2) = parse_pair(&args.sigma, "--sigma")?;
    let pred = BiGaussian::new(mu1, mu2, sigma1, sigma2)?;
    let quad = QuadratureConfig::with_tol(args.quad_tol);
    let range = args
        .range
        .as_deref()
        .map(|r| parse_pair(r, "--range"))
        .transpose()?;
    let mc_cfg = args.mc.map(|n| McConfig {
        n_samples: n,
        seed: args.seed,
    });
    let rows = report::dist_grid(&front, &pred, &quad, args.grid, range, mc_cfg.as_ref())?;
    std::fs::write(&args.out, report::write_dist_grid(&rows))
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| s.trim().parse().context("bad --sizes entry"))
        .collect::<Result<_>>()?;
    if sizes.contains(&0) {
        bail!("front sizes must be at least 1");
    }
    let fronts: Vec<_> = sizes
        .iter()
        .map(|&n| mc::bench_front(n, args.seed))
        .collect();
    // Predictive law centered on the benchmark fronts' segment.
    let pred = BiGaussian::new(5.0, 5.0, 1.5, 1.5)?;
    let rows = mc::timing_comparison(
        &fronts,
        &pred,
        &McConfig {
            n_samples: args.mc_samples,
            seed: args.seed,
        },
        &QuadratureConfig::with_tol(args.quad_tol),
        args.reps,
    );
    std::fs::write(&args.out, report::write_bench(&rows))
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg: ExperimentConfig = report::parse_experiment_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.quad_tol {
        cfg.quad_tol = tol;
    }
    let out = report::optimize_experiment(&cfg, &args.out_dir)?;
    for (rep, diagnostic) in &out.failures {
        eprintln!("repetition {rep} aborted: {diagnostic}");
    }
    println!(
        "{} runs completed, summary at {}",
        out.records.len(),
        out.summary_file.display()
    );
    Ok(())
}

fn cmd_ecdf(args: &EcdfArgs) -> Result<()> {
    let mut records = Vec::new();
    for path in &args.runs {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        records.push(report::parse_run_record(&text)?);
    }
    let ecdf = report::ecdf_report(&records, args.targets)?;
    std::fs::write(&args.out, report::write_ecdf(&ecdf))
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Dist(args) => cmd_dist(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Ecdf(args) => cmd_ecdf(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
