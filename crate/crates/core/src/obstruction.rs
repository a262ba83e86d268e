//! Search for a modulus `m` such that the orbit of `P` modulo `m` never
//! lands on `V(Z/m)`, which proves that the orbit over `Z` misses `V`.
//!
//! Composite moduli are iterated directly in `Z/m`; by the Chinese remainder
//! theorem this is the product of the prime-power component orbits, and a
//! point lies on `V(Z/m)` exactly when every component lies on `V`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::dynamics::{
    brent_orbit, brent_scan, hashed_orbit, Scan, DEFAULT_BUDGET, DEFAULT_MEMORY_BUDGET,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modarith::{factorize, is_prime, FactoredInt};
use crate::variety::{IntPoint, PolyMap, ReducedMap, ReducedVariety, Subvariety, MAX_MODULUS};

/// Which orbit indices count as meeting `V`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// Tail and cycle.
    #[default]
    Full,
    /// Only the periodic part.
    CycleOnly,
}

impl Semantics {
    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Full => "full",
            Semantics::CycleOnly => "cycle_only",
        }
    }
}

impl FromStr for Semantics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Semantics::Full),
            "cycle_only" | "cycle-only" => Ok(Semantics::CycleOnly),
            _ => Err(Error::InvalidParams(format!("unknown semantics {s:?}"))),
        }
    }
}

/// Shapes of moduli tried by [`search_modulus`], always in ascending order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    Primes,
    PrimePowers,
    #[default]
    All,
    Squarefree,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Primes => "primes",
            Strategy::PrimePowers => "prime_powers",
            Strategy::All => "all",
            Strategy::Squarefree => "squarefree",
        }
    }

    pub fn admits(self, m: u64) -> bool {
        match self {
            Strategy::Primes => is_prime(m),
            Strategy::PrimePowers => is_prime_power(m),
            Strategy::All => m >= 2,
            Strategy::Squarefree => m >= 2 && factorize(m).is_ok_and(|f| f.is_squarefree()),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primes" => Ok(Strategy::Primes),
            "prime_powers" | "prime-powers" => Ok(Strategy::PrimePowers),
            "all" => Ok(Strategy::All),
            "squarefree" => Ok(Strategy::Squarefree),
            _ => Err(Error::InvalidParams(format!("unknown strategy {s:?}"))),
        }
    }
}

pub fn is_prime_power(m: u64) -> bool {
    m >= 2 && factorize(m).is_ok_and(|f| f.factors().len() == 1)
}

/// Outcome of intersecting one reduced orbit with `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Meeting {
    /// Smallest orbit index on `V`.
    Hit { index: u64 },
    /// No index on `V`; the orbit has this shape.
    Miss { tail: u64, cycle: u64 },
}

impl Meeting {
    pub fn is_hit(&self) -> bool {
        matches!(self, Meeting::Hit { .. })
    }
}

/// Reduced data for one modulus.
struct Reduced {
    map: ReducedMap,
    start: Vec<u64>,
}

fn reduce_all(phi: &PolyMap, point: &IntPoint, m: u64) -> Result<Reduced> {
    if phi.ambient().is_projective() && !is_prime_power(m) {
        return Err(Error::Unsupported(format!(
            "projective orbits need a prime-power modulus, got {m}"
        )));
    }
    let start = match point.reduce(phi.ambient(), m) {
        Ok(s) => s.coords().to_vec(),
        Err(Error::InvalidPoint(_)) => {
            return Err(Error::BadReduction {
                modulus: m,
                index: 0,
            })
        }
        Err(e) => return Err(e),
    };
    Ok(Reduced {
        map: phi.reduce(m)?,
        start,
    })
}

fn check_spaces(phi: &PolyMap, v: &Subvariety, point: &IntPoint) -> Result<()> {
    if phi.ambient() != v.ambient() {
        return Err(Error::InvalidParams(format!(
            "map lives in {} space but the variety in {} space",
            phi.ambient(),
            v.ambient()
        )));
    }
    if point.len() != phi.ambient().num_vars() {
        return Err(Error::DimensionMismatch {
            expected: phi.ambient().num_vars(),
            got: point.len(),
        });
    }
    Ok(())
}

/// Walks the orbit looking for the first index satisfying `hit`.
fn meet_with<F>(
    map: &ReducedMap,
    start: &[u64],
    semantics: Semantics,
    budget: u64,
    mut hit: F,
) -> Result<Meeting>
where
    F: FnMut(&[u64]) -> bool,
{
    match semantics {
        Semantics::Full => match brent_scan(map, start, budget, |_, x| hit(x))? {
            Scan::Stopped(index) => Ok(Meeting::Hit { index }),
            Scan::Complete(o) => Ok(Meeting::Miss {
                tail: o.tail,
                cycle: o.cycle,
            }),
        },
        Semantics::CycleOnly => {
            let o = brent_orbit(map, start, budget)?;
            let mut cur = o.entry.clone();
            let mut next = cur.clone();
            for i in 0..o.cycle {
                if hit(&cur) {
                    return Ok(Meeting::Hit { index: o.tail + i });
                }
                map.apply(&cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
            Ok(Meeting::Miss {
                tail: o.tail,
                cycle: o.cycle,
            })
        }
    }
}

/// Does the orbit of `point` modulo `m` meet `V(Z/m)`? A hit carries the
/// smallest witnessing index. Since the reduced orbit repeats after
/// `tail + cycle` steps, a miss covers the entire infinite orbit.
pub fn orbit_meets_v_mod(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    m: u64,
    semantics: Semantics,
    budget: u64,
) -> Result<Meeting> {
    check_spaces(phi, v, point)?;
    let red = reduce_all(phi, point, m)?;
    let var = v.reduce(m)?;
    meet_with(&red.map, &red.start, semantics, budget, |x| var.contains(x))
}

/// Repeats a miss with the hashed engine and a plain walk of the orbit.
fn verify_miss(
    red: &Reduced,
    var: &ReducedVariety,
    semantics: Semantics,
    (tail, cycle): (u64, u64),
    memory_budget: u64,
) -> Result<()> {
    let m = red.map.modulus();
    let o = hashed_orbit(&red.map, &red.start, memory_budget)?;
    if (o.tail, o.cycle) != (tail, cycle) {
        return Err(Error::EngineMismatch(format!(
            "mod {m}: brent gives ({tail}, {cycle}), hashed gives ({}, {})",
            o.tail, o.cycle
        )));
    }
    let mut cur = red.start.clone();
    let mut next = cur.clone();
    for i in 0..tail + cycle {
        let counted = semantics == Semantics::Full || i >= tail;
        if counted && var.contains(&cur) {
            return Err(Error::EngineMismatch(format!(
                "mod {m}: index {i} lies on V"
            )));
        }
        red.map.apply(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub semantics: Semantics,
    /// Map applications per modulus.
    pub budget: u64,
    /// Points stored when re-verifying a miss.
    pub memory_budget: u64,
    pub exec: Exec,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            semantics: Semantics::Full,
            budget: DEFAULT_BUDGET,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            exec: Exec::default(),
        }
    }
}

/// Result for one tried modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tried {
    Meets {
        witness: u64,
    },
    Misses {
        tail: u64,
        cycle: u64,
    },
    /// Orbit too long, bad reduction, or unverifiable; the reason is logged.
    Skipped(String),
    /// The integral-point check: some reduced integral point lies on the orbit.
    PointsMeet {
        witness: u64,
    },
    PointsMiss {
        tail: u64,
        cycle: u64,
    },
}

impl Tried {
    fn label(&self) -> &'static str {
        match self {
            Tried::Meets { .. } => "meets",
            Tried::Misses { .. } => "misses",
            Tried::Skipped(_) => "skipped",
            Tried::PointsMeet { .. } => "points_meet",
            Tried::PointsMiss { .. } => "points_miss",
        }
    }

    fn witness(&self) -> Option<u64> {
        match *self {
            Tried::Meets { witness } | Tried::PointsMeet { witness } => Some(witness),
            _ => None,
        }
    }

    fn shape(&self) -> Option<(u64, u64)> {
        match *self {
            Tried::Misses { tail, cycle } | Tried::PointsMiss { tail, cycle } => {
                Some((tail, cycle))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    FoundPrime,
    FoundPrimePower,
    FoundComposite,
    FoundByIntegralPoints,
    NotFound,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::FoundPrime => "found_prime",
            Outcome::FoundPrimePower => "found_prime_power",
            Outcome::FoundComposite => "found_composite",
            Outcome::FoundByIntegralPoints => "found_by_integral_points",
            Outcome::NotFound => "not_found",
        }
    }

    pub fn is_found(self) -> bool {
        self != Outcome::NotFound
    }

    fn classify(m: &FactoredInt) -> Outcome {
        if m.is_prime() {
            Outcome::FoundPrime
        } else if m.is_prime_power() {
            Outcome::FoundPrimePower
        } else {
            Outcome::FoundComposite
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Outcome::FoundPrime,
            Outcome::FoundPrimePower,
            Outcome::FoundComposite,
            Outcome::FoundByIntegralPoints,
            Outcome::NotFound,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
        .ok_or_else(|| Error::InvalidParams(format!("unknown outcome {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionReport {
    pub outcome: Outcome,
    pub modulus: Option<FactoredInt>,
    /// Orbit shape modulo the found modulus.
    pub certificate: Option<(u64, u64)>,
    pub map_digest: u64,
    pub variety_digest: u64,
    pub point: IntPoint,
    pub bound: u64,
    pub strategy: Strategy,
    pub semantics: Semantics,
    /// Every modulus examined, in order.
    pub tried: Vec<(u64, Tried)>,
}

impl ObstructionReport {
    pub fn tried_count(&self) -> usize {
        self.tried.len()
    }

    /// Largest first-hit index over the tried moduli.
    pub fn max_witness(&self) -> Option<u64> {
        self.tried.iter().filter_map(|(_, t)| t.witness()).max()
    }

    pub fn modulus_u64(&self) -> Option<u64> {
        self.modulus.as_ref().and_then(FactoredInt::to_u64)
    }
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

impl fmt::Display for ObstructionReport {
    /// `key=value` lines, then a CSV of tried moduli after `# tried moduli`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "outcome={}", self.outcome.as_str())?;
        writeln!(f, "m={}", opt(self.modulus_u64()))?;
        writeln!(f, "witness={}", opt(self.max_witness()))?;
        writeln!(f, "tail={}", opt(self.certificate.map(|c| c.0)))?;
        writeln!(f, "cycle={}", opt(self.certificate.map(|c| c.1)))?;
        writeln!(f, "strategy={}", self.strategy.as_str())?;
        writeln!(f, "semantics={}", self.semantics.as_str())?;
        writeln!(f, "bound={}", self.bound)?;
        writeln!(f, "map_digest={:016x}", self.map_digest)?;
        writeln!(f, "variety_digest={:016x}", self.variety_digest)?;
        writeln!(f, "point={}", self.point)?;
        writeln!(f, "tried_count={}", self.tried_count())?;
        writeln!(f, "# tried moduli")?;
        writeln!(f, "m,result,witness,tail,cycle,reason")?;
        for (m, t) in &self.tried {
            let (tail, cycle) = t.shape().map_or((String::new(), String::new()), |(a, b)| {
                (a.to_string(), b.to_string())
            });
            let reason = match t {
                Tried::Skipped(r) => r.replace([',', '\n'], ";"),
                _ => String::new(),
            };
            let witness = t.witness().map_or(String::new(), |w| w.to_string());
            writeln!(f, "{m},{},{witness},{tail},{cycle},{reason}", t.label())?;
        }
        Ok(())
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        msg: msg.into(),
    }
}

fn parse_opt_u64(s: &str) -> Result<Option<u64>> {
    if s == "none" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| bad(format!("bad number {s:?}")))
}

impl FromStr for ObstructionReport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let mut kv = std::collections::HashMap::new();
        for line in lines.by_ref() {
            if line.starts_with('#') {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            kv.get(k)
                .cloned()
                .ok_or_else(|| bad(format!("missing {k}")))
        };
        let hex = |k: &str| -> Result<u64> {
            u64::from_str_radix(&get(k)?, 16).map_err(|_| bad(format!("bad digest in {k}")))
        };
        let modulus = parse_opt_u64(&get("m")?)?.map(factorize).transpose()?;
        let tail = parse_opt_u64(&get("tail")?)?;
        let cycle = parse_opt_u64(&get("cycle")?)?;
        let header = lines.next().unwrap_or("");
        if header != "m,result,witness,tail,cycle,reason" {
            return Err(bad("missing tried-moduli table"));
        }
        let mut tried = Vec::new();
        for line in lines {
            let cols: Vec<&str> = line.splitn(6, ',').collect();
            if cols.len() != 6 {
                return Err(bad(format!("bad tried row {line:?}")));
            }
            let num = |c: &str| {
                c.parse::<u64>()
                    .map_err(|_| bad(format!("bad field {c:?}")))
            };
            let m = num(cols[0])?;
            let t = match cols[1] {
                "meets" => Tried::Meets {
                    witness: num(cols[2])?,
                },
                "points_meet" => Tried::PointsMeet {
                    witness: num(cols[2])?,
                },
                "misses" => Tried::Misses {
                    tail: num(cols[3])?,
                    cycle: num(cols[4])?,
                },
                "points_miss" => Tried::PointsMiss {
                    tail: num(cols[3])?,
                    cycle: num(cols[4])?,
                },
                "skipped" => Tried::Skipped(cols[5].to_string()),
                other => return Err(bad(format!("unknown result {other:?}"))),
            };
            tried.push((m, t));
        }
        let report = ObstructionReport {
            outcome: get("outcome")?.parse()?,
            modulus,
            certificate: tail.zip(cycle),
            map_digest: hex("map_digest")?,
            variety_digest: hex("variety_digest")?,
            point: get("point")?.parse()?,
            bound: get("bound")?.parse().map_err(|_| bad("bad bound"))?,
            strategy: get("strategy")?.parse()?,
            semantics: get("semantics")?.parse()?,
            tried,
        };
        if report.tried_count().to_string() != get("tried_count")? {
            return Err(bad("tried_count does not match the table"));
        }
        Ok(report)
    }
}

/// One modulus: meets, misses (verified by the hashed engine) or skipped.
pub(crate) fn try_modulus(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    m: u64,
    opts: &SearchOptions,
) -> Result<Tried> {
    let red = match reduce_all(phi, point, m) {
        Ok(r) => r,
        Err(e @ (Error::BadReduction { .. } | Error::Unsupported(_))) => return Ok(skip(m, e)),
        Err(e) => return Err(e),
    };
    let var = v.reduce(m)?;
    match meet_with(&red.map, &red.start, opts.semantics, opts.budget, |x| {
        var.contains(x)
    }) {
        Ok(Meeting::Hit { index }) => Ok(Tried::Meets { witness: index }),
        Ok(Meeting::Miss { tail, cycle }) => {
            match verify_miss(
                &red,
                &var,
                opts.semantics,
                (tail, cycle),
                opts.memory_budget,
            ) {
                Ok(()) => Ok(Tried::Misses { tail, cycle }),
                Err(e @ Error::MemoryBudget { .. }) => Ok(skip(m, e)),
                Err(e) => Err(e),
            }
        }
        Err(e @ (Error::OrbitTooLong { .. } | Error::BadReduction { .. })) => Ok(skip(m, e)),
        Err(e) => Err(e),
    }
}

fn skip(m: u64, e: Error) -> Tried {
    log::info!("skipping modulus {m}: {e}");
    Tried::Skipped(e.to_string())
}

/// Tries moduli in the given ascending order until one misses `V`. With a
/// parallel executor, moduli are evaluated in batches and results past the
/// first miss are discarded, so the answer never depends on worker count.
pub(crate) fn first_miss<I, F>(
    moduli: I,
    exec: Exec,
    mut attempt: F,
    tried: &mut Vec<(u64, Tried)>,
) -> Result<Option<(u64, u64, u64)>>
where
    I: IntoIterator<Item = u64>,
    F: FnMut(&[u64]) -> Vec<Result<Tried>>,
{
    let batch = if exec.is_parallel() { 16 } else { 1 };
    let mut it = moduli.into_iter();
    loop {
        let chunk: Vec<u64> = it.by_ref().take(batch).collect();
        if chunk.is_empty() {
            return Ok(None);
        }
        for (m, r) in chunk.iter().zip(attempt(&chunk)) {
            let t = r?;
            let found = match t {
                Tried::Misses { tail, cycle } | Tried::PointsMiss { tail, cycle } => {
                    Some((*m, tail, cycle))
                }
                _ => None,
            };
            tried.push((*m, t));
            if found.is_some() {
                return Ok(found);
            }
        }
    }
}

/// Scans moduli `2..=bound` of the chosen shape in increasing order and stops
/// at the first one whose reduced orbit misses `V`.
pub fn search_modulus(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    bound: u64,
    strategy: Strategy,
    opts: &SearchOptions,
) -> Result<ObstructionReport> {
    obstruct(phi, point, v, bound, strategy, None, opts)
}

/// [`search_modulus`], followed when nothing is found by the integral-point
/// check over primes `<= bound`.
pub fn obstruct(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    bound: u64,
    strategy: Strategy,
    integral_points: Option<&[IntPoint]>,
    opts: &SearchOptions,
) -> Result<ObstructionReport> {
    check_spaces(phi, v, point)?;
    if bound < 2 {
        return Err(Error::InvalidParams(
            "the modulus bound must be at least 2".into(),
        ));
    }
    if bound > MAX_MODULUS {
        return Err(Error::OutOfRange(format!("bound {bound} above 2^62")));
    }
    let mut tried = Vec::new();
    let moduli = (2..=bound).filter(|&m| strategy.admits(m));
    let attempt = |ms: &[u64]| opts.exec.map(ms, |&m| try_modulus(phi, point, v, m, opts));
    let mut found = first_miss(moduli, opts.exec, attempt, &mut tried)?;
    let mut outcome = None;
    if found.is_none() {
        if let Some(points) = integral_points {
            let checked = checked_points(v, points)?;
            let primes = (2..=bound).filter(|&m| is_prime(m));
            let attempt = |ms: &[u64]| {
                opts.exec
                    .map(ms, |&m| try_points(phi, point, checked, m, opts))
            };
            found = first_miss(primes, opts.exec, attempt, &mut tried)?;
            outcome = found.map(|_| Outcome::FoundByIntegralPoints);
        }
    }
    let modulus = found.map(|(m, _, _)| factorize(m)).transpose()?;
    let outcome = outcome.unwrap_or_else(|| {
        modulus
            .as_ref()
            .map_or(Outcome::NotFound, Outcome::classify)
    });
    Ok(ObstructionReport {
        outcome,
        modulus,
        certificate: found.map(|(_, t, c)| (t, c)),
        map_digest: phi.digest(),
        variety_digest: v.digest(),
        point: point.clone(),
        bound,
        strategy,
        semantics: opts.semantics,
        tried,
    })
}

fn checked_points<'a>(v: &Subvariety, points: &'a [IntPoint]) -> Result<&'a [IntPoint]> {
    if v.ambient().is_projective() {
        return Err(Error::Unsupported(
            "the integral-point check needs an affine ambient".into(),
        ));
    }
    for p in points {
        if p.len() != v.ambient().num_vars() || !v.contains_int(p)? {
            return Err(Error::NotOnVariety(p.to_string()));
        }
    }
    Ok(points)
}

fn try_points(
    phi: &PolyMap,
    point: &IntPoint,
    points: &[IntPoint],
    m: u64,
    opts: &SearchOptions,
) -> Result<Tried> {
    match points_meet_orbit(phi, point, points, m, opts.semantics, opts.budget) {
        Ok(Meeting::Hit { index }) => Ok(Tried::PointsMeet { witness: index }),
        Ok(Meeting::Miss { tail, cycle }) => Ok(Tried::PointsMiss { tail, cycle }),
        Err(e @ (Error::OrbitTooLong { .. } | Error::BadReduction { .. })) => Ok(skip(m, e)),
        Err(e) => Err(e),
    }
}

fn points_meet_orbit(
    phi: &PolyMap,
    point: &IntPoint,
    points: &[IntPoint],
    m: u64,
    semantics: Semantics,
    budget: u64,
) -> Result<Meeting> {
    let red = reduce_all(phi, point, m)?;
    let targets: HashSet<Vec<u64>> = points
        .iter()
        .map(|p| p.reduce(phi.ambient(), m).map(|r| r.coords().to_vec()))
        .collect::<Result<_>>()?;
    meet_with(&red.map, &red.start, semantics, budget, |x| {
        targets.contains(x)
    })
}

/// True iff no reduction mod `m` of the supplied integral points of `V` lies
/// on the reduced orbit. If the points are all of `V(Z)`, this proves the
/// orbit misses `V` even when the orbit meets `V(Z/m)`.
pub fn integral_point_trick(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    integral_points: &[IntPoint],
    m: u64,
    semantics: Semantics,
    budget: u64,
) -> Result<bool> {
    check_spaces(phi, v, point)?;
    let pts = checked_points(v, integral_points)?;
    Ok(!points_meet_orbit(phi, point, pts, m, semantics, budget)?.is_hit())
}

/// Largest valuation reported by [`valuation_diagnostic`].
pub const VALUATION_CEILING: u32 = 64;

/// Default number of iterates examined by [`valuation_diagnostic`].
pub const DEFAULT_ITERATES: u64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ValuationStep {
    pub index: u64,
    /// `min_i v_p(H_i(phi^index(P)))`, capped at the ceiling.
    pub valuation: u32,
    /// The true valuation is at least the ceiling.
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationTrace {
    pub prime: u64,
    pub ceiling: u32,
    pub steps: Vec<ValuationStep>,
    /// Indices `n` where the valuation went up from `n - 1` to `n`.
    pub increases: Vec<u64>,
}

impl ValuationTrace {
    pub fn is_non_increasing(&self) -> bool {
        self.increases.is_empty()
    }
}

fn valuation(x: &BigInt, p: &BigInt, ceiling: u32) -> u32 {
    if x.is_zero() {
        return ceiling;
    }
    let mut v = 0;
    let mut y = x.clone();
    while v < ceiling {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            break;
        }
        y = q;
        v += 1;
    }
    v
}

/// `w(n) = min_i v_p(H_i(phi^n(P)))` for `n < iterates`, computed modulo
/// `p^ceiling`. For an etale map and an invariant `V` the sequence cannot
/// increase; increases are recorded rather than treated as errors.
pub fn valuation_diagnostic(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    p: u64,
    iterates: u64,
    ceiling: u32,
) -> Result<ValuationTrace> {
    check_spaces(phi, v, point)?;
    if phi.ambient().is_projective() {
        return Err(Error::Unsupported(
            "the valuation diagnostic needs an affine ambient".into(),
        ));
    }
    if !is_prime(p) || ceiling == 0 {
        return Err(Error::InvalidParams(format!(
            "need a prime p and a positive ceiling, got {p}, {ceiling}"
        )));
    }
    let pb = BigInt::from(p);
    let modulus = pb.pow(ceiling);
    let reduce = |x: &BigInt| x.mod_floor(&modulus);
    let mut cur = IntPoint(point.0.iter().map(reduce).collect());
    let mut steps: Vec<ValuationStep> = Vec::new();
    let mut increases = Vec::new();
    for index in 0..iterates {
        if index > 0 {
            cur = IntPoint(phi.apply_int(&cur)?.0.iter().map(reduce).collect());
        }
        let mut w = ceiling;
        for eq in v.equations() {
            w = w.min(valuation(&reduce(&eq.eval_int(&cur.0)?), &pb, ceiling));
        }
        if steps.last().is_some_and(|s| w > s.valuation) {
            increases.push(index);
        }
        steps.push(ValuationStep {
            index,
            valuation: w,
            capped: w >= ceiling,
        });
    }
    Ok(ValuationTrace {
        prime: p,
        ceiling,
        steps,
        increases,
    })
}

/// A prime power `p^exponent` modulo which the orbit misses `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePowerCertificate {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
    pub tail: u64,
    pub cycle: u64,
}

/// Smallest `n <= n_max` with the orbit missing `V` modulo `p^n`. Such a miss
/// shows that the `p`-adic closure of the orbit avoids `V(Z_p)`.
pub fn prime_power_certificate(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    p: u64,
    n_max: u32,
    semantics: Semantics,
    budget: u64,
) -> Result<Option<PrimePowerCertificate>> {
    check_spaces(phi, v, point)?;
    if !is_prime(p) {
        return Err(Error::InvalidParams(format!("{p} is not prime")));
    }
    let mut q = 1u64;
    for n in 1..=n_max {
        q = match q.checked_mul(p) {
            Some(q) if q <= MAX_MODULUS => q,
            _ => break,
        };
        match orbit_meets_v_mod(phi, point, v, q, semantics, budget) {
            Ok(Meeting::Miss { tail, cycle }) => {
                return Ok(Some(PrimePowerCertificate {
                    prime: p,
                    exponent: n,
                    modulus: q,
                    tail,
                    cycle,
                }))
            }
            Ok(Meeting::Hit { .. }) => {}
            Err(e @ (Error::OrbitTooLong { .. } | Error::BadReduction { .. })) => {
                log::info!("no certificate mod {p}^{n}: {e}");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// `x1 + 1` in the first coordinate and the identity elsewhere.
pub fn translation_map(n: usize) -> PolyMap {
    let mut coords: Vec<_> = (0..n).map(|i| crate::variety::IntPoly::var(n, i)).collect();
    let shifted = coords[0]
        .terms()
        .iter()
        .map(|t| (t.exps.clone(), t.coeff.clone()))
        .chain([(vec![0; n], BigInt::one())]);
    coords[0] = crate::variety::IntPoly::new(n, shifted).expect("valid translation");
    PolyMap::new(crate::variety::Ambient::Affine(n), coords).expect("valid translation")
}
