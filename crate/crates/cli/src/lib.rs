//! Command implementations behind the `dbm` binary: resumable cycle scans,
//! smoothness figures, obstruction searches, the random-map experiment and
//! the heuristic calculators.

pub mod cache;
pub mod commands;
pub mod figure;

use dbm_core::smoothness::{check_alpha, Alpha};
use dbm_core::{Error, Exec, Result};

/// Runs `f` on a pool of `workers` threads (0 means the default pool). The
/// outputs never depend on the worker count. Without the `parallel` feature
/// everything runs on the calling thread.
#[cfg(feature = "parallel")]
pub fn with_workers<R, F>(workers: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce(Exec) -> R + Send,
{
    if workers == 0 {
        return Ok(f(Exec::Parallel));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| f(Exec::Parallel)))
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<R, F>(workers: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce(Exec) -> R + Send,
{
    if workers > 1 {
        log::warn!("built without the parallel feature; ignoring --workers {workers}");
    }
    Ok(f(Exec::Sequential))
}

/// Parses `1/3` or a decimal such as `0.25` into an exact exponent in `(0, 1)`.
pub fn parse_alpha(s: &str) -> Result<Alpha> {
    let bad = || Error::InvalidParams(format!("cannot read alpha from {s:?}"));
    let alpha = if let Some((n, d)) = s.split_once('/') {
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        let d: u32 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Alpha::new(n, d)
    } else {
        let (int, frac) = s.trim().split_once('.').unwrap_or((s.trim(), ""));
        if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u32 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10u32.pow(frac.len() as u32);
        let num: u32 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        Alpha::new(
            int.checked_mul(den)
                .and_then(|v| v.checked_add(num))
                .ok_or_else(bad)?,
            den,
        )
    };
    check_alpha(alpha)?;
    Ok(alpha)
}
