//! Command-line surface: moment tables, matching-order detection, limit
//! constants, numerical distances, asymptotic sweeps, and theorem
//! verification, over measures stored as JSON files.
//!
//! Exit codes: 0 on success (and all-pass verification), 1 when a verify
//! verdict fails, 2 on input or precondition errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smoothot::divergences::{
    f_divergence, moser_w2_upper_bound, sinkhorn_w2, w1_dual_lower_bound, wp_1d, FDivKind,
    FDivMethod, Method,
};
use smoothot::harness::{
    auto_eps, read_measure, report_to_csv, sweep, verify, write_measure, write_report, Metric,
    Theorem, DEFAULT_POINTS, DEFAULT_SINKHORN_GRID, DEFAULT_T_MAX, DEFAULT_T_MIN,
    DEFAULT_WP_GRID,
};
use smoothot::limits::{limit_constants, DEFAULT_TV_SAMPLES};
use smoothot::measures::{gen_matched_pair, matching_order, moment_table, MatchingOrder};
use smoothot::Measure;

#[derive(Parser)]
#[command(
    name = "smoothot",
    about = "Distances and asymptotics of Gaussian-smoothed discrete measures",
    version
)]
struct Cli {
    /// RNG seed for every stochastic component.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Rescale input weights to sum to one instead of rejecting them.
    #[arg(long, global = true)]
    renormalize: bool,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every two-measure subcommand.
#[derive(Args)]
struct PairArgs {
    /// First measure (JSON file).
    #[arg(long)]
    mu: PathBuf,
    /// Second measure (JSON file).
    #[arg(long)]
    nu: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Print the moment table of one measure up to a degree.
    Moments {
        /// Measure (JSON file).
        #[arg(long)]
        measure: PathBuf,
        /// Largest total degree to include.
        #[arg(long, default_value_t = 4)]
        max_degree: u32,
    },
    /// Detect the moment-matching order of a pair.
    MatchOrder {
        #[command(flatten)]
        pair: PairArgs,
        /// Largest degree checked before reporting all-match.
        #[arg(long, default_value_t = 10)]
        cap: u32,
        /// Relative tolerance for moment equality.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Closed-form limiting constants and decay exponents of a pair.
    Limits {
        #[command(flatten)]
        pair: PairArgs,
        /// Monte-Carlo samples for the TV constant.
        #[arg(long, default_value_t = DEFAULT_TV_SAMPLES)]
        mc_samples: usize,
    },
    /// Numerically compute one distance or divergence at a bandwidth.
    Distance {
        #[command(flatten)]
        pair: PairArgs,
        /// Gaussian smoothing bandwidth (variance per axis).
        #[arg(long)]
        t: f64,
        /// Solver.
        #[arg(long, value_enum)]
        method: Method,
        /// Transport order p (exact1d solver).
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// f-divergence kind (quadrature / montecarlo solvers).
        #[arg(long, value_enum, default_value_t = FDivKind::Chi2)]
        kind: FDivKind,
        /// Quantile panels, Sinkhorn grid per axis, or Lipschitz grid.
        #[arg(long, default_value_t = DEFAULT_WP_GRID)]
        grid: usize,
        /// Entropic regularization; 0 picks a grid-scaled default.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Quadrature node / Monte-Carlo sample budget.
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        /// Chaos truncation degree (chaos_bound solver).
        #[arg(long, default_value_t = 6)]
        k: u32,
    },
    /// Chaos (Moser coupling) upper bound on W₂².
    MoserBound {
        #[command(flatten)]
        pair: PairArgs,
        /// Gaussian smoothing bandwidth.
        #[arg(long)]
        t: f64,
        /// Chaos truncation degree.
        #[arg(long, default_value_t = 6)]
        k: u32,
    },
    /// Evaluate a metric on a geometric bandwidth grid and fit its rate.
    Sweep {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_T_MIN)]
        t_min: f64,
        #[arg(long, default_value_t = DEFAULT_T_MAX)]
        t_max: f64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
    },
    /// Check one asymptotic statement against a fresh sweep.
    Verify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum)]
        theorem: Theorem,
        /// Relative tolerance (absolute, for rate checks).
        #[arg(long, default_value_t = 0.05)]
        rtol: f64,
        /// Solver budget hint.
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Generate a random pair with a prescribed matching order.
    GenPair {
        /// Matching order n of the generated pair.
        #[arg(long)]
        n: u32,
        /// Ambient dimension.
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Print to --out when given, stdout otherwise.
fn emit(cli: &Cli, text: &str) -> smoothot::Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n"))?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn load_pair(cli: &Cli, pair: &PairArgs) -> smoothot::Result<(Measure, Measure)> {
    Ok((
        read_measure(&pair.mu, cli.renormalize)?,
        read_measure(&pair.nu, cli.renormalize)?,
    ))
}

fn run(cli: &Cli) -> smoothot::Result<ExitCode> {
    match &cli.command {
        Command::Moments {
            measure,
            max_degree,
        } => {
            let m = read_measure(measure, cli.renormalize)?;
            let table = moment_table(&m, *max_degree)?;
            let rendered: serde_json::Map<String, serde_json::Value> = table
                .values
                .iter()
                .map(|(alpha, v)| (alpha.to_string(), serde_json::json!(v)))
                .collect();
            emit(cli, &serde_json::to_string_pretty(&rendered)?)?;
        }
        Command::MatchOrder { pair, cap, tol } => {
            let (mu, nu) = load_pair(cli, pair)?;
            let order = matching_order(&mu, &nu, *cap, *tol)?;
            let body = match order {
                MatchingOrder::Order(n) => serde_json::json!({ "order": n }),
                MatchingOrder::AllMatch => {
                    serde_json::json!({ "order": "all_match", "cap": cap })
                }
            };
            emit(cli, &serde_json::to_string_pretty(&body)?)?;
        }
        Command::Limits { pair, mc_samples } => {
            let (mu, nu) = load_pair(cli, pair)?;
            let lc = limit_constants(&mu, &nu, *mc_samples, cli.seed)?;
            emit(cli, &serde_json::to_string_pretty(&lc)?)?;
        }
        Command::Distance {
            pair,
            t,
            method,
            p,
            kind,
            grid,
            eps,
            budget,
            k,
        } => {
            let (mu, nu) = load_pair(cli, pair)?;
            let result = match method {
                Method::Exact1d => wp_1d(&mu, &nu, *t, *p, *grid)?,
                Method::Sinkhorn => {
                    let grid = if *grid == DEFAULT_WP_GRID {
                        DEFAULT_SINKHORN_GRID
                    } else {
                        *grid
                    };
                    let eps = if *eps > 0.0 {
                        *eps
                    } else {
                        auto_eps(&mu, &nu, *t, grid)
                    };
                    sinkhorn_w2(&mu, &nu, *t, grid, eps)?
                }
                Method::Quadrature => {
                    f_divergence(&mu, &nu, *t, *kind, FDivMethod::Quadrature, *budget, cli.seed)?
                }
                Method::Montecarlo => f_divergence(
                    &mu,
                    &nu,
                    *t,
                    *kind,
                    FDivMethod::Montecarlo,
                    *budget,
                    cli.seed,
                )?,
                Method::ChaosBound => moser_w2_upper_bound(&mu, &nu, *t, *k)?,
                Method::DualBound => w1_dual_lower_bound(&mu, &nu, *t, *grid)?,
            };
            emit(cli, &serde_json::to_string_pretty(&result)?)?;
        }
        Command::MoserBound { pair, t, k } => {
            let (mu, nu) = load_pair(cli, pair)?;
            let result = moser_w2_upper_bound(&mu, &nu, *t, *k)?;
            emit(cli, &serde_json::to_string_pretty(&result)?)?;
        }
        Command::Sweep {
            pair,
            metric,
            method,
            t_min,
            t_max,
            points,
        } => {
            let (mu, nu) = load_pair(cli, pair)?;
            let report = sweep(&mu, &nu, *metric, *method, *t_min, *t_max, *points, cli.seed)?;
            match &cli.out {
                Some(path) => {
                    write_report(&report, path)?;
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "pair_id": report.pair_id,
                            "fitted_exponent": report.fitted_exponent,
                            "fit_stderr": report.fit_stderr,
                            "rows": report.rows.len(),
                            "skipped": report.skipped.len(),
                        }))?
                    );
                }
                None => print!("{}", report_to_csv(&report)),
            }
        }
        Command::Verify {
            pair,
            theorem,
            rtol,
            budget,
        } => {
            let (mu, nu) = load_pair(cli, pair)?;
            let verdict = verify(&mu, &nu, *theorem, *rtol, *budget, cli.seed)?;
            emit(cli, &serde_json::to_string_pretty(&verdict)?)?;
            if !verdict.pass {
                if verdict.details.starts_with("precondition:") {
                    return Ok(ExitCode::from(2));
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::GenPair { n, dim } => {
            let (mu, nu) = gen_matched_pair::<f64>(*n, *dim, cli.seed)?;
            match &cli.out {
                Some(path) => {
                    let stem = path.to_string_lossy();
                    let mu_path = PathBuf::from(format!("{stem}.mu.json"));
                    let nu_path = PathBuf::from(format!("{stem}.nu.json"));
                    write_measure(&mu, &mu_path)?;
                    write_measure(&nu, &nu_path)?;
                    println!("wrote {} and {}", mu_path.display(), nu_path.display());
                }
                None => {
                    let body = serde_json::json!({
                        "mu": mu.clone().canonicalized(),
                        "nu": nu.clone().canonicalized(),
                    });
                    println!("{}", serde_json::to_string_pretty(&body)?);
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
