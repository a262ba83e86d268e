//! Probability calculators for orbits meeting a subvariety, and empirical
//! checks of the assumptions behind them.
//!
//! Every `p^(o(1))` correction in the underlying asymptotics is dropped; the
//! numbers are leading-order estimates only.

use std::collections::HashMap;

use crate::dynamics::{brent_orbit, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modarith::{factorize, is_prime, sieve_primes, FactoredInt};
use crate::rng::{derive_seed, SplitMix64};
use crate::scan::CycleScan;
use crate::smoothness::{below_power, check_alpha, largest_prime_factor, Alpha, LogSum};
use crate::variety::{count_points, IntPoint, PolyMap, Subvariety};

/// `d1 = dim X`, `d2 = dim V`, the smoothness exponent and the prime
/// threshold `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeuristicParams {
    pub d1: u32,
    pub d2: u32,
    pub alpha: Alpha,
    pub t: u64,
}

impl HeuristicParams {
    pub fn new(d1: u32, d2: u32, alpha: Alpha, t: u64) -> Result<Self> {
        if d1 == 0 {
            return Err(Error::InvalidParams("d1 must be at least 1".into()));
        }
        if d2 >= d1 {
            return Err(Error::InvalidParams(format!(
                "need d2 < d1 for a proper subvariety, got d1 = {d1}, d2 = {d2}"
            )));
        }
        check_alpha(alpha)?;
        Ok(HeuristicParams { d1, d2, alpha, t })
    }

    fn codim(&self) -> f64 {
        (self.d1 - self.d2) as f64
    }

    /// `d2 - d1/2`; the large-prime argument needs this positive.
    pub fn excess(&self) -> f64 {
        self.d2 as f64 - self.d1 as f64 / 2.0
    }

    pub fn in_large_prime_regime(&self) -> bool {
        2 * self.d2 > self.d1
    }
}

/// `ln(1 - p^(d2-d1))`.
fn ln_miss_one(p: u64, params: &HeuristicParams) -> f64 {
    (-(p as f64).powf(-params.codim())).ln_1p()
}

/// `(1 - p^(d2-d1))^orbit_len`: chance that `orbit_len` independent points
/// all avoid `V(F_p)`.
pub fn prob_orbit_misses_v(p: u64, orbit_len: f64, params: &HeuristicParams) -> f64 {
    if orbit_len <= 0.0 {
        return 1.0;
    }
    (orbit_len * ln_miss_one(p, params)).exp()
}

/// Where orbit lengths `|O_p|` come from.
#[derive(Clone, Copy, Debug)]
pub enum LengthSource<'a> {
    /// Measured `tail + cycle` at every prime of the range.
    Scan(&'a CycleScan),
    /// The model `|O_p| = p^(d1/2)`.
    Model,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HitProbability {
    pub probability: f64,
    pub log_probability: f64,
    pub primes_used: usize,
    /// Scan rows in range that had no measured length (overrun).
    pub primes_skipped: usize,
    /// `sum_{p > T_max} exp(-p^(d2 - d1/2))`, or `None` outside the regime
    /// where it converges.
    pub remainder: Option<f64>,
    pub warning: Option<String>,
}

/// `prod_{T < p <= T_max} (1 - (1 - p^(d2-d1))^len(p))`, the chance that the
/// orbit meets `V` modulo every prime in the range.
pub fn prob_all_large_primes_hit(
    t_max: u64,
    params: &HeuristicParams,
    source: LengthSource<'_>,
) -> Result<HitProbability> {
    let t = params.t;
    if t_max < t {
        return Err(Error::InvalidParams(format!(
            "empty prime range ({t}, {t_max}]"
        )));
    }
    let warning = (!params.in_large_prime_regime()).then(|| {
        format!(
            "d2 = {} is not above d1/2 = {}; the product need not tend to 1 and is reported untruncated",
            params.d2,
            params.d1 as f64 / 2.0
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    let mut acc = LogSum::default();
    let (mut used, mut skipped) = (0usize, 0usize);
    let mut add = |p: u64, len: f64| {
        let miss = len * ln_miss_one(p, params);
        acc.add((-miss.exp_m1()).ln());
    };
    match source {
        LengthSource::Model => {
            for p in sieve_primes(t_max)?.into_iter().filter(|&p| p > t) {
                add(p, (p as f64).powf(params.d1 as f64 / 2.0));
                used += 1;
            }
        }
        LengthSource::Scan(scan) => {
            let top = scan.max_prime().unwrap_or(0);
            if top < largest_prime_at_most(t_max).unwrap_or(0) {
                return Err(Error::OutOfRange(format!(
                    "scan stops at {top}, below the requested bound {t_max}"
                )));
            }
            for row in scan.rows.iter().filter(|r| r.prime > t && r.prime <= t_max) {
                match row.rho() {
                    Some(len) => {
                        add(row.prime, len as f64);
                        used += 1;
                    }
                    None => skipped += 1,
                }
            }
        }
    }
    let log_probability = acc.value();
    Ok(HitProbability {
        probability: log_probability.exp(),
        log_probability,
        primes_used: used,
        primes_skipped: skipped,
        remainder: params
            .in_large_prime_regime()
            .then(|| tail_remainder(t_max, params.excess())),
        warning,
    })
}

fn largest_prime_at_most(x: u64) -> Option<u64> {
    (2..=x).rev().find(|&n| is_prime(n))
}

/// `sum_{p > x} exp(-p^s)` for `s > 0`, summed until terms stop mattering.
fn tail_remainder(x: u64, s: f64) -> f64 {
    let mut sum = 0.0;
    let mut p = x + 1;
    loop {
        if is_prime(p) {
            let term = (-(p as f64).powf(s)).exp();
            sum += term;
            if term < 1e-18 * sum.max(f64::MIN_POSITIVE) || term == 0.0 {
                return sum;
            }
        }
        p += 1;
    }
}

/// The squarefree modulus `m_{x,alpha}`: product of primes `p <= x` whose
/// cycle length is `x^alpha`-smooth.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothModulus {
    pub primes: Vec<u64>,
    pub log_m: f64,
    /// `|C_m| = lcm` of the qualifying cycle lengths.
    pub cycle_lcm: FactoredInt,
}

pub fn build_smooth_modulus(scan: &CycleScan, x: u64, alpha: Alpha) -> Result<SmoothModulus> {
    check_alpha(alpha)?;
    scan.validate()?;
    let needed = largest_prime_at_most(x).unwrap_or(0);
    if scan.max_prime().unwrap_or(0) < needed {
        return Err(Error::OutOfRange(format!("scan does not reach x = {x}")));
    }
    let mut primes = Vec::new();
    let mut log_m = LogSum::default();
    let mut cycle_lcm = FactoredInt::one();
    for (p, _, cycle) in scan.measured().filter(|&(p, _, _)| p <= x) {
        let smooth = largest_prime_factor(cycle).is_none_or(|g| below_power(g, x, alpha));
        if smooth {
            primes.push(p);
            log_m.add((p as f64).ln());
            cycle_lcm = cycle_lcm.lcm(&factorize(cycle)?);
        }
    }
    Ok(SmoothModulus {
        primes,
        log_m: log_m.value(),
        cycle_lcm,
    })
}

/// `exp(-|C_m| / m^(d1-d2))` from logarithms.
pub fn prob_empty_composite_log(log_cycle: f64, log_m: f64, params: &HeuristicParams) -> f64 {
    (-(log_cycle - params.codim() * log_m).exp()).exp()
}

pub fn prob_empty_composite(log_m: f64, cycle_lcm: &FactoredInt, params: &HeuristicParams) -> f64 {
    prob_empty_composite_log(cycle_lcm.ln(), log_m, params)
}

/// Per-prime orbit exponents `log(tail + cycle) / log p` and their mean.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub mean_exponent: f64,
    pub per_prime: Vec<(u64, f64)>,
}

impl ExponentFit {
    /// CSV with columns `prime,exponent`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prime,exponent\n");
        for (p, e) in &self.per_prime {
            out.push_str(&format!("{p},{}\n", fmt_sig(*e)));
        }
        out
    }
}

/// Minimum number of measured rows for [`orbit_exponent_fit`].
pub const MIN_FIT_ROWS: usize = 10;

pub fn orbit_exponent_fit(scan: &CycleScan) -> Result<ExponentFit> {
    let per_prime: Vec<(u64, f64)> = scan
        .measured()
        .map(|(p, tail, cycle)| (p, ((tail + cycle) as f64).ln() / (p as f64).ln()))
        .collect();
    if per_prime.len() < MIN_FIT_ROWS {
        return Err(Error::InvalidParams(format!(
            "need at least {MIN_FIT_ROWS} measured rows, got {}",
            per_prime.len()
        )));
    }
    let mean_exponent = per_prime.iter().map(|r| r.1).sum::<f64>() / per_prime.len() as f64;
    Ok(ExponentFit {
        mean_exponent,
        per_prime,
    })
}

/// Tail and cycle of `start` under an explicit function on `0..f.len()`.
pub fn functional_orbit(f: &[u64], start: u64) -> (u64, u64) {
    let mut seen: HashMap<u64, u64> = HashMap::new();
    let mut x = start;
    let mut i = 0u64;
    loop {
        if let Some(&first) = seen.get(&x) {
            return (first, i - first);
        }
        seen.insert(x, i);
        x = f[x as usize];
        i += 1;
    }
}

/// Orbit of a uniformly random function on `0..n` from a uniform start.
///
/// The function is drawn lazily: `start` first, then `f(x)` at the moment `x`
/// is first visited. Each value is drawn once and independently, so this is
/// the same distribution as drawing the whole table up front.
pub fn random_trial(n: u64, seed: u64) -> (u64, u64) {
    let mut rng = SplitMix64::new(seed);
    let mut seen: HashMap<u64, u64> = HashMap::new();
    let mut x = rng.below(n);
    let mut i = 0u64;
    loop {
        if let Some(&first) = seen.get(&x) {
            return (first, i - first);
        }
        seen.insert(x, i);
        x = rng.below(n);
        i += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineStats {
    pub n: u64,
    pub trials: u64,
    pub mean_tail: f64,
    pub mean_cycle: f64,
    pub mean_rho: f64,
    /// `mean_rho / sqrt(n)`; tends to `sqrt(pi/2)`.
    pub rho_ratio: f64,
}

impl BaselineStats {
    /// CSV with header `n,trials,mean_tail,mean_cycle,mean_rho,rho_ratio`.
    pub fn to_csv(&self) -> String {
        format!(
            "n,trials,mean_tail,mean_cycle,mean_rho,rho_ratio\n{},{},{},{},{},{}\n",
            self.n,
            self.trials,
            fmt_sig(self.mean_tail),
            fmt_sig(self.mean_cycle),
            fmt_sig(self.mean_rho),
            fmt_sig(self.rho_ratio)
        )
    }
}

/// Mean tail, cycle and rho length over `trials` random functions on
/// `0..n`. Trial `i` uses seed `derive_seed(seed, i)`.
pub fn random_endofunction_baseline(
    n: u64,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<BaselineStats> {
    if n < 2 || trials == 0 {
        return Err(Error::InvalidParams("need n >= 2 and trials >= 1".into()));
    }
    let results = exec.map_range(trials, |i| random_trial(n, derive_seed(seed, i)));
    let k = trials as f64;
    let mean_tail = results.iter().map(|r| r.0 as f64).sum::<f64>() / k;
    let mean_cycle = results.iter().map(|r| r.1 as f64).sum::<f64>() / k;
    let mean_rho = mean_tail + mean_cycle;
    Ok(BaselineStats {
        n,
        trials,
        mean_tail,
        mean_cycle,
        mean_rho,
        rho_ratio: mean_rho / (n as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndependenceRates {
    /// Fraction of distinct orbit points lying on `V(F_p)`.
    pub empirical: f64,
    /// `|V(F_p)| / |X(F_p)|`.
    pub expected: f64,
    pub orbit_points: u64,
    pub count_v: u64,
    pub count_ambient: u64,
}

/// Compares the share of orbit points on `V` with the share of all points.
pub fn independence_check(
    phi: &PolyMap,
    point: &IntPoint,
    v: &Subvariety,
    p: u64,
) -> Result<IndependenceRates> {
    if v.ambient() != phi.ambient() {
        return Err(Error::InvalidParams(
            "map and variety live in different spaces".into(),
        ));
    }
    let (count_v, count_ambient) = count_points(v, p)?;
    let start = point.reduce(phi.ambient(), p)?;
    let map = phi.reduce(p)?;
    let red = v.reduce(p)?;
    let orbit = brent_orbit(&map, start.coords(), DEFAULT_BUDGET)?;
    let rho = orbit.tail + orbit.cycle;
    let mut cur = start.coords().to_vec();
    let mut next = cur.clone();
    let mut on_v = 0u64;
    for i in 0..rho {
        if i > 0 {
            map.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        if red.contains(&cur) {
            on_v += 1;
        }
    }
    Ok(IndependenceRates {
        empirical: on_v as f64 / rho as f64,
        expected: count_v as f64 / count_ambient as f64,
        orbit_points: rho,
        count_v,
        count_ambient,
    })
}

/// Decimal with 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = 12i32;
    let mag = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        return format!("{:.*e}", (digits - 1) as usize, v);
    }
    let decimals = (digits - 1 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::{RowOutcome, ScanRow};
    use crate::variety::text::parse_poly;
    use crate::variety::{random_map, Ambient};
    use num_bigint::BigUint;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    fn params(d1: u32, d2: u32) -> HeuristicParams {
        HeuristicParams::new(d1, d2, Alpha::new(1, 3), 10).unwrap()
    }

    fn scan_of(rows: &[(u64, u64, u64)]) -> CycleScan {
        CycleScan {
            map_digest: 0,
            ambient: Ambient::Affine(2),
            point: IntPoint::from_i64(&[0, 0]),
            rows: rows
                .iter()
                .map(|&(p, tail, cycle)| ScanRow {
                    prime: p,
                    outcome: RowOutcome::Cycle { tail, cycle },
                })
                .collect(),
        }
    }

    #[test]
    fn params_validation() {
        assert!(HeuristicParams::new(2, 2, Alpha::new(1, 3), 10).is_err());
        assert!(HeuristicParams::new(2, 1, Alpha::new(3, 2), 10).is_err());
        assert!(!params(2, 1).in_large_prime_regime());
        assert!(params(5, 4).in_large_prime_regime());
    }

    #[test]
    fn miss_probability_against_exact_rational() {
        assert_eq!(prob_orbit_misses_v(101, 0.0, &params(2, 1)), 1.0);
        let exact = BigRational::new(
            BigUint::from(100u32).pow(10).into(),
            BigUint::from(101u32).pow(10).into(),
        );
        let got = prob_orbit_misses_v(101, 10.0, &params(2, 1));
        let want = exact.to_f64().unwrap();
        assert!(((got - want) / want).abs() < 1e-13);
        let mut prev = 0.0;
        for p in [3u64, 11, 101, 1009, 10007, 100003] {
            let v = prob_orbit_misses_v(p, 10.0, &params(2, 1));
            assert!(v > prev && v <= 1.0);
            prev = v;
        }
        assert!(1.0 - prev < 1e-3);
    }

    #[test]
    fn composite_probability() {
        let pr = params(2, 1);
        assert!((prob_empty_composite_log(3.0, 3.0, &pr) - (-1f64).exp()).abs() < 1e-12);
        let log_m = 50.0;
        let v = prob_empty_composite_log(log_m - 10f64.ln(), log_m, &pr);
        assert!((v - (-0.1f64).exp()).abs() < 1e-12);
        assert!(prob_empty_composite(200.0, &FactoredInt::one(), &pr) >= 1.0 - 1e-15);
    }

    #[test]
    fn large_prime_product() {
        let pr = HeuristicParams::new(5, 4, Alpha::new(1, 3), 14).unwrap();
        let r = prob_all_large_primes_hit(16, &pr, LengthSource::Model).unwrap();
        assert_eq!(r.primes_used, 0);
        assert_eq!(r.probability, 1.0);
        let r = prob_all_large_primes_hit(13, &params(2, 1), LengthSource::Model);
        assert!(r.is_ok());
        assert!(r.unwrap().warning.is_some());
        assert!(prob_all_large_primes_hit(5, &pr, LengthSource::Model).is_err());
        let r = prob_all_large_primes_hit(1000, &pr, LengthSource::Model).unwrap();
        assert!(r.probability > 0.0 && r.probability <= 1.0);
        assert!(r.remainder.unwrap() >= 0.0 && r.warning.is_none());
        // naive product agrees with log-space evaluation
        let naive: f64 = sieve_primes(1000)
            .unwrap()
            .into_iter()
            .filter(|&p| p > 14)
            .map(|p| {
                let pf = p as f64;
                1.0 - (1.0 - 1.0 / pf).powf(pf.powf(2.5))
            })
            .product();
        assert!((naive - r.probability).abs() < 1e-12);
    }

    #[test]
    fn smooth_modulus_examples() {
        let s = scan_of(&[(2, 0, 1), (3, 1, 2), (5, 0, 1), (7, 1, 1)]);
        let m = build_smooth_modulus(&s, 7, Alpha::new(1, 2)).unwrap();
        assert_eq!(m.primes, vec![2, 3, 5, 7]);
        assert_eq!(m.cycle_lcm.to_u64(), Some(2));
        assert!((m.log_m - 210f64.ln()).abs() < 1e-12);
        let big = scan_of(&[(2, 0, 101), (3, 0, 103)]);
        let m = build_smooth_modulus(&big, 3, Alpha::new(1, 2)).unwrap();
        assert!(m.primes.is_empty() && m.cycle_lcm.is_one() && m.log_m == 0.0);
        assert!(build_smooth_modulus(&s, 100, Alpha::new(1, 2)).is_err());
    }

    #[test]
    fn smooth_modulus_grows_with_alpha() {
        let primes = sieve_primes(3000).unwrap();
        let mut g = SplitMix64::new(9);
        let rows: Vec<(u64, u64, u64)> = primes.iter().map(|&p| (p, 0, 1 + g.below(p))).collect();
        let s = scan_of(&rows);
        let mut prev: Vec<u64> = Vec::new();
        for den in [6u32, 5, 4, 3, 2] {
            let m = build_smooth_modulus(&s, 3000, Alpha::new(1, den)).unwrap();
            assert!(prev.iter().all(|p| m.primes.contains(p)));
            prev = m.primes;
        }
    }

    #[test]
    fn exponent_fit() {
        let primes = sieve_primes(50).unwrap();
        let rows: Vec<_> = primes.iter().map(|&p| (p, 0, p)).collect();
        let f = orbit_exponent_fit(&scan_of(&rows)).unwrap();
        assert!((f.mean_exponent - 1.0).abs() < 1e-12);
        let rows: Vec<_> = primes.iter().map(|&p| (p, 0, 1)).collect();
        assert_eq!(
            orbit_exponent_fit(&scan_of(&rows)).unwrap().mean_exponent,
            0.0
        );
        assert!(orbit_exponent_fit(&scan_of(&rows[..5])).is_err());
    }

    #[test]
    fn baseline_exhaustive_two_points() {
        for f in [[0u64, 0], [0, 1], [1, 0], [1, 1]] {
            for s in 0..2 {
                let (t, c) = functional_orbit(&f, s);
                assert!((1..=2).contains(&(t + c)));
            }
        }
        assert_eq!(functional_orbit(&[1, 0], 0), (0, 2));
        assert_eq!(functional_orbit(&[1, 1], 0), (1, 1));
        for seed in 0..50 {
            let (t, c) = random_trial(2, seed);
            assert!((1..=2).contains(&(t + c)));
        }
    }

    #[test]
    fn baseline_matches_random_mapping_constant() {
        let a = random_endofunction_baseline(10_000, 200, 7, Exec::Sequential).unwrap();
        let b = random_endofunction_baseline(10_000, 200, 7, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!((0.8..=1.8).contains(&a.rho_ratio), "{}", a.rho_ratio);
        assert!(random_endofunction_baseline(1, 1, 0, Exec::Sequential).is_err());
    }

    #[test]
    fn independence_examples() {
        let phi = random_map(2, 2, 10, 3).unwrap();
        let pt = IntPoint::from_i64(&[1, 2]);
        let whole = Subvariety::whole(Ambient::Affine(2));
        let r = independence_check(&phi, &pt, &whole, 5).unwrap();
        assert_eq!((r.empirical, r.expected), (1.0, 1.0));
        let empty =
            Subvariety::new(Ambient::Affine(2), vec![parse_poly("x1^2 + 1", 2).unwrap()]).unwrap();
        let r = independence_check(&phi, &pt, &empty, 3).unwrap();
        assert_eq!((r.empirical, r.expected), (0.0, 0.0));
        let circle = Subvariety::new(
            Ambient::Affine(2),
            vec![parse_poly("x1^2 + x2^2 - 1", 2).unwrap()],
        )
        .unwrap();
        let r = independence_check(&phi, &pt, &circle, 5).unwrap();
        assert_eq!(r.count_v, 4);
        assert!((0.0..=1.0).contains(&r.empirical));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(1234.5), "1234.5");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        let back: f64 = fmt_sig(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-11);
    }
}
