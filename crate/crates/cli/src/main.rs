use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dbm_cli::commands::{self, default_budget, Exit, Output};
use dbm_cli::parse_alpha;
use dbm_core::experiment::ExperimentConfig;
use dbm_core::obstruction::{Semantics, Strategy};
use dbm_core::smoothness::Alpha;
use dbm_core::variety::IntPoint;
use dbm_core::Result;

#[derive(Parser)]
#[command(
    name = "dbm",
    version,
    about = "Orbits of polynomial maps modulo m: cycle scans, smoothness figures, obstruction search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure tail and cycle length of the orbit modulo every prime up to a bound.
    CycleScan {
        #[arg(long)]
        map_file: PathBuf,
        #[arg(long)]
        point: IntPoint,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = default_budget())]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Resumable cache file; created when missing.
        #[arg(long)]
        cache: PathBuf,
        /// Also write the rows as plain CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot log S(x) from a scan cache against x * rho(d1 / (2 alpha)).
    SmoothFigure {
        #[arg(long)]
        cache: PathBuf,
        #[arg(long, value_parser = parse_alpha_arg)]
        alpha: Alpha,
        #[arg(long)]
        d1: Option<u32>,
        /// Output prefix; `.csv` and `.svg` are appended.
        #[arg(long)]
        out: PathBuf,
        /// Use the top-of-range threshold instead of the running one.
        #[arg(long)]
        fixed_top: bool,
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Search for a modulus m with the orbit disjoint from V modulo m.
    Obstruct {
        #[arg(long)]
        map_file: PathBuf,
        #[arg(long)]
        point: IntPoint,
        #[arg(long)]
        variety_file: PathBuf,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value = "all")]
        strategy: Strategy,
        /// Known integral points of V, one per line.
        #[arg(long)]
        integral_points: Option<PathBuf>,
        /// Test only the periodic part of the orbit.
        #[arg(long)]
        cycle_only: bool,
        #[arg(long, default_value_t = default_budget())]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Obstruction search over seeded random maps of affine n-space against the unit sphere.
    Experiment {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, default_value_t = 10)]
        coeff_bound: u64,
        #[arg(long, default_value_t = 50)]
        count: u64,
        #[arg(long, default_value_t = 500)]
        bound: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Starting point; all ones by default.
        #[arg(long)]
        point: Option<IntPoint>,
        /// Replace map 0 by the identity.
        #[arg(long)]
        inject_identity: bool,
        #[arg(long)]
        cycle_only: bool,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Per-map CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leading-order probability estimates, from a scan cache or from the orbit-length model.
    Heuristic {
        #[arg(long)]
        d1: u32,
        #[arg(long)]
        d2: u32,
        #[arg(long, value_parser = parse_alpha_arg)]
        alpha: Alpha,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        t_max: u64,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Tail and cycle statistics of uniformly random self-maps of {0..n-1}.
    Baseline {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print rho(u).
    Dickman { u: f64 },
}

fn parse_alpha_arg(s: &str) -> std::result::Result<Alpha, String> {
    parse_alpha(s).map_err(|e| e.to_string())
}

fn run(cmd: Command) -> Result<Output> {
    match cmd {
        Command::CycleScan {
            map_file,
            point,
            bound,
            budget,
            workers,
            cache,
            out,
        } => commands::cycle_scan(&commands::CycleScanArgs {
            map_file,
            point,
            bound,
            budget,
            workers,
            cache,
            out,
        }),
        Command::SmoothFigure {
            cache,
            alpha,
            d1,
            out,
            fixed_top,
            stride,
        } => commands::smooth_figure(&commands::SmoothFigureArgs {
            cache,
            alpha,
            d1,
            out,
            fixed_top,
            stride,
        }),
        Command::Obstruct {
            map_file,
            point,
            variety_file,
            bound,
            strategy,
            integral_points,
            cycle_only,
            budget,
            workers,
            out,
        } => commands::obstruct_cmd(&commands::ObstructArgs {
            map_file,
            point,
            variety_file,
            bound,
            strategy,
            integral_points,
            cycle_only,
            budget,
            workers,
            out,
        }),
        Command::Experiment {
            n,
            degree,
            coeff_bound,
            count,
            bound,
            seed,
            point,
            inject_identity,
            cycle_only,
            budget,
            workers,
            out,
        } => {
            let config = ExperimentConfig {
                n,
                degree,
                coeff_bound,
                count,
                bound,
                seed,
                point: point.unwrap_or_else(|| IntPoint::from_i64(&vec![1; n])),
                semantics: if cycle_only {
                    Semantics::CycleOnly
                } else {
                    Semantics::Full
                },
                budget,
                inject_identity,
                ..ExperimentConfig::default()
            };
            commands::experiment(&commands::ExperimentArgs {
                config,
                workers,
                out,
            })
        }
        Command::Heuristic {
            d1,
            d2,
            alpha,
            t,
            t_max,
            cache,
        } => commands::heuristic(&commands::HeuristicArgs {
            d1,
            d2,
            alpha,
            t,
            t_max,
            cache,
        }),
        Command::Baseline {
            n,
            trials,
            seed,
            workers,
            out,
        } => commands::baseline(&commands::BaselineArgs {
            n,
            trials,
            seed,
            workers,
            out,
        }),
        Command::Dickman { u } => commands::dickman(u),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = run(cli.command).unwrap_or_else(|e| commands::failure(&e));
    if out.exit == Exit::Error {
        eprint!("{}", out.text);
    } else {
        print!("{}", out.text);
    }
    ExitCode::from(out.exit as u8)
}
