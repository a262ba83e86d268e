//! Orbits in `X(Z/m)`: tail (pre-period) and cycle length of
//! `P, phi(P), phi(phi(P)), ...`.
//!
//! Two independent engines compute the same [`OrbitSummary`]:
//! [`orbit_summary`] runs Brent's cycle finder in constant memory, and
//! [`orbit_summary_hashed`] remembers every visited point. The second one
//! exists to cross-check the first.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::modarith::{factorize, gcd, FactoredInt};
use crate::variety::{check_compatible, PolyMap, ReducedMap, ResiduePoint};

/// Default cap on map applications per modulus.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Default cap on points stored by the hashed engine.
pub const DEFAULT_MEMORY_BUDGET: u64 = 10_000_000;

/// Shape of a reduced orbit: `phi^tail(P) = phi^(tail+cycle)(P)` with both
/// numbers minimal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrbitSummary {
    pub modulus: u64,
    pub tail: u64,
    pub cycle: u64,
    /// `phi^tail(P)`, the first point on the cycle.
    pub entry_point: ResiduePoint,
}

impl OrbitSummary {
    /// Number of distinct points in the orbit.
    pub fn rho(&self) -> u64 {
        self.tail + self.cycle
    }
}

/// Tail, cycle and entry point of a raw orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct RawOrbit {
    pub tail: u64,
    pub cycle: u64,
    pub entry: Vec<u64>,
}

/// Result of [`brent_scan`]: either the orbit shape, or the first index at
/// which the visitor asked to stop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Scan {
    Complete(RawOrbit),
    Stopped(u64),
}

struct Stepper<'a> {
    map: &'a ReducedMap,
    budget: u64,
    used: u64,
}

impl Stepper<'_> {
    /// `dst = phi(src)`; `index` is the orbit index of `dst`, for errors only.
    #[inline]
    fn step(&mut self, src: &[u64], dst: &mut [u64], index: u64) -> Result<()> {
        self.used += 1;
        if self.used > self.budget {
            return Err(Error::OrbitTooLong {
                modulus: self.map.modulus(),
                budget: self.budget,
            });
        }
        if !self.map.apply(src, dst) {
            return Err(Error::BadReduction {
                modulus: self.map.modulus(),
                index,
            });
        }
        Ok(())
    }
}

/// Brent's cycle finder with tail recovery.
///
/// The hare walks the orbit one index at a time, so `visit(i, x_i)` is called
/// exactly once for `i = 0, 1, 2, ...` up to at least `tail + cycle - 1`.
/// Returning `true` from `visit` stops the walk at that index.
pub(crate) fn brent_scan<F>(
    map: &ReducedMap,
    start: &[u64],
    budget: u64,
    mut visit: F,
) -> Result<Scan>
where
    F: FnMut(u64, &[u64]) -> bool,
{
    let dim = start.len();
    let mut st = Stepper {
        map,
        budget,
        used: 0,
    };
    if visit(0, start) {
        return Ok(Scan::Stopped(0));
    }
    let mut tortoise = start.to_vec();
    let mut hare = vec![0u64; dim];
    let mut scratch = vec![0u64; dim];
    st.step(start, &mut hare, 1)?;
    let mut index = 1u64;
    if visit(index, &hare) {
        return Ok(Scan::Stopped(index));
    }
    let (mut power, mut lam) = (1u64, 1u64);
    while tortoise != hare {
        if power == lam {
            tortoise.copy_from_slice(&hare);
            power *= 2;
            lam = 0;
        }
        index += 1;
        st.step(&hare, &mut scratch, index)?;
        std::mem::swap(&mut hare, &mut scratch);
        lam += 1;
        if visit(index, &hare) {
            return Ok(Scan::Stopped(index));
        }
    }
    let cycle = lam;
    // Two cursors `cycle` apart meet at the entry point.
    let mut behind = start.to_vec();
    let mut ahead = start.to_vec();
    for i in 0..cycle {
        st.step(&ahead, &mut scratch, i + 1)?;
        std::mem::swap(&mut ahead, &mut scratch);
    }
    let mut tail = 0u64;
    while behind != ahead {
        st.step(&behind, &mut scratch, tail + 1)?;
        std::mem::swap(&mut behind, &mut scratch);
        st.step(&ahead, &mut scratch, tail + cycle + 1)?;
        std::mem::swap(&mut ahead, &mut scratch);
        tail += 1;
    }
    Ok(Scan::Complete(RawOrbit {
        tail,
        cycle,
        entry: behind,
    }))
}

pub(crate) fn brent_orbit(map: &ReducedMap, start: &[u64], budget: u64) -> Result<RawOrbit> {
    match brent_scan(map, start, budget, |_, _| false)? {
        Scan::Complete(o) => Ok(o),
        Scan::Stopped(_) => unreachable!("visitor never stops"),
    }
}

/// Hashed engine: stores every point with its index until one repeats.
pub(crate) fn hashed_orbit(
    map: &ReducedMap,
    start: &[u64],
    memory_budget: u64,
) -> Result<RawOrbit> {
    let mut seen: HashMap<Box<[u64]>, u64> = HashMap::new();
    let mut cur = start.to_vec();
    let mut next = vec![0u64; start.len()];
    let mut index = 0u64;
    loop {
        if let Some(&first) = seen.get(cur.as_slice()) {
            return Ok(RawOrbit {
                tail: first,
                cycle: index - first,
                entry: cur,
            });
        }
        if seen.len() as u64 >= memory_budget {
            return Err(Error::MemoryBudget {
                budget: memory_budget,
            });
        }
        seen.insert(cur.clone().into_boxed_slice(), index);
        if !map.apply(&cur, &mut next) {
            return Err(Error::BadReduction {
                modulus: map.modulus(),
                index: index + 1,
            });
        }
        std::mem::swap(&mut cur, &mut next);
        index += 1;
    }
}

fn summary(map: &ReducedMap, raw: RawOrbit) -> OrbitSummary {
    OrbitSummary {
        modulus: map.modulus(),
        tail: raw.tail,
        cycle: raw.cycle,
        entry_point: map.point(raw.entry),
    }
}

/// Orbit shape of `p` under `phi` by Brent's algorithm, with the default
/// budget of map applications.
pub fn orbit_summary(phi: &PolyMap, p: &ResiduePoint) -> Result<OrbitSummary> {
    orbit_summary_with_budget(phi, p, DEFAULT_BUDGET)
}

pub fn orbit_summary_with_budget(
    phi: &PolyMap,
    p: &ResiduePoint,
    budget: u64,
) -> Result<OrbitSummary> {
    check_compatible(phi.ambient(), p)?;
    let map = phi.reduce(p.modulus())?;
    let raw = brent_orbit(&map, p.coords(), budget)?;
    Ok(summary(&map, raw))
}

/// Orbit shape of `p` by exhaustive storage of visited points.
pub fn orbit_summary_hashed(phi: &PolyMap, p: &ResiduePoint) -> Result<OrbitSummary> {
    orbit_summary_hashed_with_budget(phi, p, DEFAULT_MEMORY_BUDGET)
}

pub fn orbit_summary_hashed_with_budget(
    phi: &PolyMap,
    p: &ResiduePoint,
    memory_budget: u64,
) -> Result<OrbitSummary> {
    check_compatible(phi.ambient(), p)?;
    let map = phi.reduce(p.modulus())?;
    let raw = hashed_orbit(&map, p.coords(), memory_budget)?;
    Ok(summary(&map, raw))
}

/// The first `upto` iterates `P, phi(P), ..., phi^(upto-1)(P)`.
pub fn orbit_elements(phi: &PolyMap, p: &ResiduePoint, upto: u64) -> Result<Vec<ResiduePoint>> {
    if upto == 0 {
        return Err(Error::InvalidParams("upto must be at least 1".into()));
    }
    check_compatible(phi.ambient(), p)?;
    let map = phi.reduce(p.modulus())?;
    let mut out = Vec::with_capacity(upto.min(1 << 20) as usize);
    let mut cur = p.coords().to_vec();
    let mut next = vec![0u64; cur.len()];
    for i in 0..upto {
        if i > 0 {
            if !map.apply(&cur, &mut next) {
                return Err(Error::BadReduction {
                    modulus: map.modulus(),
                    index: i,
                });
            }
            std::mem::swap(&mut cur, &mut next);
        }
        out.push(map.point(cur.clone()));
    }
    Ok(out)
}

/// Orbit shape modulo the product of pairwise coprime moduli: the tail is the
/// largest component tail and the cycle is the lcm of component cycles.
pub fn composite_cycle_length(summaries: &[OrbitSummary]) -> Result<(u64, FactoredInt)> {
    if summaries.is_empty() {
        return Err(Error::Empty("orbit summaries"));
    }
    for (i, a) in summaries.iter().enumerate() {
        for b in &summaries[i + 1..] {
            if gcd(a.modulus, b.modulus) != 1 {
                return Err(Error::NotCoprime(a.modulus, b.modulus));
            }
        }
    }
    let tail = summaries.iter().map(|s| s.tail).max().unwrap_or(0);
    let mut cycle = FactoredInt::one();
    for s in summaries {
        cycle = cycle.lcm(&factorize(s.cycle)?);
    }
    Ok((tail, cycle))
}
