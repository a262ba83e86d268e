//! Per-prime cycle scans: for every prime `p` in a range, the tail and cycle
//! length of the reduced orbit of a fixed starting point.

use crate::dynamics::brent_orbit;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modarith::sieve_primes;
use crate::variety::{Ambient, IntPoint, PolyMap};

/// What the scan found at one prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowOutcome {
    Cycle {
        tail: u64,
        cycle: u64,
    },
    /// The iteration budget ran out before the cycle closed.
    Overrun,
    /// The reduced map (or the reduced starting point) is degenerate at `p`.
    BadReduction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScanRow {
    pub prime: u64,
    pub outcome: RowOutcome,
}

impl ScanRow {
    pub fn cycle(&self) -> Option<u64> {
        match self.outcome {
            RowOutcome::Cycle { cycle, .. } => Some(cycle),
            _ => None,
        }
    }

    pub fn tail(&self) -> Option<u64> {
        match self.outcome {
            RowOutcome::Cycle { tail, .. } => Some(tail),
            _ => None,
        }
    }

    /// `tail + cycle`, the number of distinct orbit points.
    pub fn rho(&self) -> Option<u64> {
        match self.outcome {
            RowOutcome::Cycle { tail, cycle } => Some(tail + cycle),
            _ => None,
        }
    }
}

/// Scan results for one map and starting point, sorted by prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleScan {
    pub map_digest: u64,
    pub ambient: Ambient,
    pub point: IntPoint,
    pub rows: Vec<ScanRow>,
}

impl CycleScan {
    pub fn new(phi: &PolyMap, point: IntPoint, rows: Vec<ScanRow>) -> Result<Self> {
        let scan = CycleScan {
            map_digest: phi.digest(),
            ambient: phi.ambient(),
            point,
            rows,
        };
        scan.validate()?;
        Ok(scan)
    }

    /// Rows strictly ascending by prime.
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.rows.windows(2).find(|w| w[0].prime >= w[1].prime) {
            return Err(Error::InvalidParams(format!(
                "scan rows out of order at primes {} and {}",
                w[0].prime, w[1].prime
            )));
        }
        Ok(())
    }

    pub fn max_prime(&self) -> Option<u64> {
        self.rows.last().map(|r| r.prime)
    }

    /// Rows with a measured cycle, as `(prime, tail, cycle)`.
    pub fn measured(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        self.rows.iter().filter_map(|r| match r.outcome {
            RowOutcome::Cycle { tail, cycle } => Some((r.prime, tail, cycle)),
            _ => None,
        })
    }
}

/// Orbit shape at a single prime.
pub fn scan_prime(phi: &PolyMap, point: &IntPoint, p: u64, budget: u64) -> Result<ScanRow> {
    let start = match point.reduce(phi.ambient(), p) {
        Ok(s) => s,
        Err(Error::InvalidPoint(_)) => {
            return Ok(ScanRow {
                prime: p,
                outcome: RowOutcome::BadReduction,
            })
        }
        Err(e) => return Err(e),
    };
    let map = phi.reduce(p)?;
    let outcome = match brent_orbit(&map, start.coords(), budget) {
        Ok(o) => RowOutcome::Cycle {
            tail: o.tail,
            cycle: o.cycle,
        },
        Err(Error::OrbitTooLong { .. }) => RowOutcome::Overrun,
        Err(Error::BadReduction { .. }) => RowOutcome::BadReduction,
        Err(e) => return Err(e),
    };
    if outcome == RowOutcome::BadReduction {
        log::info!("skipping p = {p}: bad reduction");
    }
    Ok(ScanRow { prime: p, outcome })
}

/// Scans the given primes; rows come back in the order of `primes`.
pub fn scan_primes(
    phi: &PolyMap,
    point: &IntPoint,
    primes: &[u64],
    budget: u64,
    exec: Exec,
) -> Result<Vec<ScanRow>> {
    if point.len() != phi.ambient().num_vars() {
        return Err(Error::DimensionMismatch {
            expected: phi.ambient().num_vars(),
            got: point.len(),
        });
    }
    exec.map(primes, |&p| scan_prime(phi, point, p, budget))
        .into_iter()
        .collect()
}

/// Scans every prime `<= bound`.
pub fn cycle_scan(
    phi: &PolyMap,
    point: &IntPoint,
    bound: u64,
    budget: u64,
    exec: Exec,
) -> Result<CycleScan> {
    let primes = sieve_primes(bound)?;
    let rows = scan_primes(phi, point, &primes, budget, exec)?;
    CycleScan::new(phi, point.clone(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::text::parse_map;

    fn phi() -> PolyMap {
        parse_map("ambient projective 1\nx1^2 + 5*x2^2\nx2^2\n").unwrap()
    }

    #[test]
    fn small_scan() {
        let pt = IntPoint::from_i64(&[1, 1]);
        let scan = cycle_scan(&phi(), &pt, 10, 1_000, Exec::Sequential).unwrap();
        let primes: Vec<u64> = scan.rows.iter().map(|r| r.prime).collect();
        assert_eq!(primes, vec![2, 3, 5, 7]);
        assert_eq!(
            scan.rows[1].outcome,
            RowOutcome::Cycle { tail: 1, cycle: 2 }
        );
        assert_eq!(
            scan.rows[3].outcome,
            RowOutcome::Cycle { tail: 1, cycle: 1 }
        );
        assert!(cycle_scan(&phi(), &pt, 1, 1_000, Exec::Sequential)
            .unwrap()
            .rows
            .is_empty());
    }

    #[test]
    fn overrun_and_bad_rows() {
        let pt = IntPoint::from_i64(&[1, 1]);
        let row = scan_prime(&phi(), &pt, 7, 1).unwrap();
        assert_eq!(row.outcome, RowOutcome::Overrun);
        // [3:3] has no unit coordinate mod 3
        let row = scan_prime(&phi(), &IntPoint::from_i64(&[3, 3]), 3, 100).unwrap();
        assert_eq!(row.outcome, RowOutcome::BadReduction);
        let bad = parse_map("ambient projective 1\n3*x1^2\n3*x2^2\n").unwrap();
        assert_eq!(
            scan_prime(&bad, &pt, 3, 100).unwrap().outcome,
            RowOutcome::BadReduction
        );
    }

    #[test]
    fn sequential_and_parallel_scans_match() {
        let pt = IntPoint::from_i64(&[1, 1]);
        let a = cycle_scan(&phi(), &pt, 3000, 1_000_000, Exec::Sequential).unwrap();
        let b = cycle_scan(&phi(), &pt, 3000, 1_000_000, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
