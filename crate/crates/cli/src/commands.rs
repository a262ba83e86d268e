//! One function per subcommand. Each returns the text printed on stdout and
//! writes any requested files itself.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dbm_core::dynamics::DEFAULT_BUDGET;
use dbm_core::experiment::{run_experiment, ExperimentConfig};
use dbm_core::heuristics::{
    build_smooth_modulus, fmt_sig, orbit_exponent_fit, prob_all_large_primes_hit,
    prob_empty_composite, random_endofunction_baseline, HeuristicParams, LengthSource,
};
use dbm_core::obstruction::{obstruct, ObstructionReport, SearchOptions, Semantics, Strategy};
use dbm_core::scan::RowOutcome;
use dbm_core::smoothness::{accumulate_s_with, dickman_rho, Alpha, Threshold};
use dbm_core::variety::text::{parse_map, parse_points, parse_variety};
use dbm_core::variety::{IntPoint, PolyMap, Subvariety};
use dbm_core::{Error, Result};

use crate::cache::{read_cache, scan_csv, ScanCache};
use crate::figure::build_figure;
use crate::with_workers;

/// Process exit status: found or success, nothing found, or failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Error = 1,
    NotFound = 2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub exit: Exit,
}

impl Output {
    fn ok(text: String) -> Self {
        Output {
            text,
            exit: Exit::Success,
        }
    }
}

pub fn load_map(path: &Path) -> Result<PolyMap> {
    parse_map(&std::fs::read_to_string(path)?)
}

pub fn load_variety(path: &Path) -> Result<Subvariety> {
    parse_variety(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug)]
pub struct CycleScanArgs {
    pub map_file: PathBuf,
    pub point: IntPoint,
    pub bound: u64,
    pub budget: u64,
    pub workers: usize,
    pub cache: PathBuf,
    pub out: Option<PathBuf>,
}

pub fn cycle_scan(a: &CycleScanArgs) -> Result<Output> {
    let phi = load_map(&a.map_file)?;
    let mut cache = ScanCache::open(&a.cache, &phi, &a.point)?;
    let added = with_workers(a.workers, |exec| {
        cache.extend(&phi, a.bound, a.budget, exec)
    })??;
    let scan = cache.scan();
    if let Some(out) = &a.out {
        std::fs::write(out, scan_csv(scan))?;
    }
    let count = |f: fn(&RowOutcome) -> bool| scan.rows.iter().filter(|r| f(&r.outcome)).count();
    let text = format!(
        "map_digest={:016x}\nprimes={}\nnew={added}\nmeasured={}\noverrun={}\nbad_reduction={}\n",
        scan.map_digest,
        scan.rows.len(),
        count(|o| matches!(o, RowOutcome::Cycle { .. })),
        count(|o| *o == RowOutcome::Overrun),
        count(|o| *o == RowOutcome::BadReduction),
    );
    Ok(Output::ok(text))
}

#[derive(Clone, Debug)]
pub struct SmoothFigureArgs {
    pub cache: PathBuf,
    pub alpha: Alpha,
    pub d1: Option<u32>,
    pub out: PathBuf,
    pub fixed_top: bool,
    pub stride: usize,
}

/// Writes `<out>.csv` and `<out>.svg`.
pub fn smooth_figure(a: &SmoothFigureArgs) -> Result<Output> {
    let (_, scan) = read_cache(&a.cache)?;
    let threshold = if a.fixed_top {
        Threshold::FixedTop
    } else {
        Threshold::Running
    };
    let ledger = accumulate_s_with(&scan, a.alpha, threshold)?;
    let fig = build_figure(&ledger, a.d1, a.stride)?;
    let csv_path = a.out.with_extension("csv");
    let svg_path = a.out.with_extension("svg");
    std::fs::write(&csv_path, fig.to_csv())?;
    std::fs::write(&svg_path, fig.to_svg())?;
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_sig);
    let text = format!(
        "alpha={}\nthreshold={}\nx_max={}\nlog_S={}\nqualifying_primes={}\nobserved_slope={}\npredicted_slope={}\ncsv={}\nsvg={}\n",
        a.alpha,
        if a.fixed_top { "fixed_top" } else { "running" },
        ledger.x_max,
        fmt_sig(ledger.samples.last().map_or(0.0, |s| s.log_s)),
        ledger.qualifying_primes.len(),
        opt(fig.observed_slope),
        opt(fig.predicted_slope),
        csv_path.display(),
        svg_path.display(),
    );
    Ok(Output::ok(text))
}

#[derive(Clone, Debug)]
pub struct ObstructArgs {
    pub map_file: PathBuf,
    pub point: IntPoint,
    pub variety_file: PathBuf,
    pub bound: u64,
    pub strategy: Strategy,
    pub integral_points: Option<PathBuf>,
    pub cycle_only: bool,
    pub budget: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

pub fn obstruct_cmd(a: &ObstructArgs) -> Result<Output> {
    let phi = load_map(&a.map_file)?;
    let v = load_variety(&a.variety_file)?;
    let points = match &a.integral_points {
        Some(p) => Some(parse_points(&std::fs::read_to_string(p)?)?),
        None => None,
    };
    let report: ObstructionReport = with_workers(a.workers, |exec| {
        let opts = SearchOptions {
            semantics: if a.cycle_only {
                Semantics::CycleOnly
            } else {
                Semantics::Full
            },
            budget: a.budget,
            exec,
            ..SearchOptions::default()
        };
        obstruct(
            &phi,
            &a.point,
            &v,
            a.bound,
            a.strategy,
            points.as_deref(),
            &opts,
        )
    })??;
    let text = report.to_string();
    if let Some(out) = &a.out {
        std::fs::write(out, &text)?;
    }
    let exit = if report.outcome.is_found() {
        Exit::Success
    } else {
        Exit::NotFound
    };
    Ok(Output { text, exit })
}

#[derive(Clone, Debug)]
pub struct ExperimentArgs {
    pub config: ExperimentConfig,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

pub fn experiment(a: &ExperimentArgs) -> Result<Output> {
    let summary = with_workers(a.workers, |exec| run_experiment(&a.config, exec))??;
    if let Some(out) = &a.out {
        std::fs::write(out, summary.to_csv())?;
    }
    Ok(Output::ok(summary.summary_text()))
}

#[derive(Clone, Debug)]
pub struct HeuristicArgs {
    pub d1: u32,
    pub d2: u32,
    pub alpha: Alpha,
    pub t: u64,
    pub t_max: u64,
    pub cache: Option<PathBuf>,
}

pub fn heuristic(a: &HeuristicArgs) -> Result<Output> {
    let params = HeuristicParams::new(a.d1, a.d2, a.alpha, a.t)?;
    let scan = a
        .cache
        .as_deref()
        .map(read_cache)
        .transpose()?
        .map(|(_, s)| s);
    let mut text = String::from("# leading-order estimates; every o(1) correction is dropped\n");
    let _ = writeln!(
        text,
        "d1={}\nd2={}\nalpha={}\nT={}\nT_max={}",
        a.d1, a.d2, a.alpha, a.t, a.t_max
    );
    let source = match &scan {
        Some(s) => {
            let _ = writeln!(text, "lengths=scan");
            LengthSource::Scan(s)
        }
        None => {
            let _ = writeln!(text, "lengths=model |O_p| = p^(d1/2) (no cache given)");
            LengthSource::Model
        }
    };
    let hit = prob_all_large_primes_hit(a.t_max, &params, source)?;
    if let Some(w) = &hit.warning {
        let _ = writeln!(text, "warning={w}");
    }
    let _ = writeln!(
        text,
        "prob_all_large_primes_hit={}",
        fmt_sig(hit.probability)
    );
    let _ = writeln!(
        text,
        "log_prob_all_large_primes_hit={}",
        fmt_sig(hit.log_probability)
    );
    let _ = writeln!(
        text,
        "primes_used={}\nprimes_skipped={}",
        hit.primes_used, hit.primes_skipped
    );
    let _ = writeln!(
        text,
        "remainder_estimate={}",
        hit.remainder.map_or_else(|| "none".to_string(), fmt_sig)
    );
    match &scan {
        Some(s) => {
            let m = build_smooth_modulus(s, a.t_max, a.alpha)?;
            let _ = writeln!(text, "smooth_modulus_primes={}", m.primes.len());
            let _ = writeln!(text, "log_m={}", fmt_sig(m.log_m));
            let _ = writeln!(text, "log_cycle_lcm={}", fmt_sig(m.cycle_lcm.ln()));
            let _ = writeln!(
                text,
                "prob_empty_composite={}",
                fmt_sig(prob_empty_composite(m.log_m, &m.cycle_lcm, &params))
            );
            if let Ok(fit) = orbit_exponent_fit(s) {
                let _ = writeln!(text, "mean_orbit_exponent={}", fmt_sig(fit.mean_exponent));
            }
        }
        None => {
            let _ = writeln!(
                text,
                "smooth_modulus=unavailable (needs measured cycles from --cache)"
            );
        }
    }
    Ok(Output::ok(text))
}

#[derive(Clone, Debug)]
pub struct BaselineArgs {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

pub fn baseline(a: &BaselineArgs) -> Result<Output> {
    let stats = with_workers(a.workers, |exec| {
        random_endofunction_baseline(a.n, a.trials, a.seed, exec)
    })??;
    let csv = stats.to_csv();
    if let Some(out) = &a.out {
        std::fs::write(out, &csv)?;
    }
    Ok(Output::ok(csv))
}

pub fn dickman(u: f64) -> Result<Output> {
    Ok(Output::ok(format!("{}\n", fmt_sig(dickman_rho(u)?))))
}

/// Budget used when none is given on the command line.
pub const fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

/// Reports an error as the command's output with exit status 1.
pub fn failure(e: &Error) -> Output {
    Output {
        text: format!("error: {e}\n"),
        exit: Exit::Error,
    }
}
