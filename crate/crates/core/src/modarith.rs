//! Integer and residue arithmetic: sieving, factorization, CRT, inverses and
//! lcm over factored integers.
//!
//! Per-prime work stays in 64-bit words with 128-bit intermediates. Only
//! [`FactoredInt::value`] is arbitrary precision, because the lcm of many
//! cycle lengths quickly leaves the 64-bit range.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Largest bound accepted by [`sieve_primes`].
pub const SIEVE_LIMIT: u64 = 1 << 32;

const SEGMENT: u64 = 1 << 18;

/// Trial division covers every prime below this before Pollard rho takes over.
const TRIAL_LIMIT: u64 = 1 << 16;

/// All primes `<= bound`, ascending.
pub fn sieve_primes(bound: u64) -> Result<Vec<u64>> {
    sieve_primes_with(bound, Exec::default())
}

/// Segmented sieve of Eratosthenes. Segments are independent and may be
/// processed by several workers; they are concatenated in order.
pub fn sieve_primes_with(bound: u64, exec: Exec) -> Result<Vec<u64>> {
    if bound > SIEVE_LIMIT {
        return Err(Error::CapacityExceeded {
            bound,
            limit: SIEVE_LIMIT,
        });
    }
    if bound < 2 {
        return Ok(Vec::new());
    }
    let root = isqrt(bound);
    let base = simple_sieve(root);
    if bound <= SEGMENT {
        return Ok(simple_sieve(bound));
    }
    let nseg = bound.div_ceil(SEGMENT);
    let parts = exec.map_range(nseg, |k| {
        let lo = k * SEGMENT;
        let hi = ((k + 1) * SEGMENT - 1).min(bound);
        sieve_segment(lo, hi, &base)
    });
    Ok(parts.into_iter().flatten().collect())
}

fn simple_sieve(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p > hi {
            break;
        }
        let mut start = (lo.div_ceil(p) * p).max(p * p);
        while start <= hi {
            composite[(start - lo) as usize] = true;
            start += p;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|&(i, &c)| !c && lo + i as u64 >= 2)
        .map(|(i, _)| lo + i as u64)
        .collect()
}

pub(crate) fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for
/// every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Finds a nontrivial factor of an odd composite `n` with Brent's variant of
/// Pollard rho on `x -> x^2 + c`, trying `c = 1, 2, 3, ...` from `x0 = 2`.
fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    for c in 1u64.. {
        let f = |x: u64| add_mod(mul_mod(x, x, n), c, n);
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho always finds a factor of a composite")
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| simple_sieve(TRIAL_LIMIT))
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Prime factorization of `n >= 1`.
pub fn factorize(n: u64) -> Result<FactoredInt> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let mut rest = n;
    let mut factors = Vec::new();
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        if rest < TRIAL_LIMIT * TRIAL_LIMIT {
            factors.push((rest, 1));
        } else {
            let mut big = Vec::new();
            split_large(rest, &mut big);
            big.sort_unstable();
            for p in big {
                match factors.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => factors.push((p, 1)),
                }
            }
        }
    }
    Ok(FactoredInt::from_sorted(factors))
}

/// A positive integer together with its prime factorization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredInt {
    value: BigUint,
    factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    pub fn one() -> Self {
        FactoredInt {
            value: BigUint::one(),
            factors: Vec::new(),
        }
    }

    /// Builds from `(prime, exponent)` pairs in any order; repeated primes are
    /// merged and zero exponents dropped. Primality is checked.
    pub fn from_factors<I: IntoIterator<Item = (u64, u32)>>(pairs: I) -> Result<Self> {
        let mut v: Vec<(u64, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        for &(p, _) in &v {
            if !is_prime(p) {
                return Err(Error::InvalidParams(format!("{p} is not prime")));
            }
        }
        v.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(v.len());
        for (p, e) in v {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Ok(Self::from_sorted(merged))
    }

    pub fn prime_power(p: u64, e: u32) -> Result<Self> {
        Self::from_factors([(p, e)])
    }

    fn from_sorted(factors: Vec<(u64, u32)>) -> Self {
        let mut value = BigUint::one();
        for &(p, e) in &factors {
            value *= BigUint::from(p).pow(e);
        }
        FactoredInt { value, factors }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_prime(&self) -> bool {
        matches!(self.factors.as_slice(), [(_, 1)])
    }

    pub fn is_prime_power(&self) -> bool {
        self.factors.len() == 1
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.factors.last().map(|&(p, _)| p)
    }

    /// Natural logarithm of the value, summed factor by factor.
    pub fn ln(&self) -> f64 {
        self.factors
            .iter()
            .map(|&(p, e)| e as f64 * (p as f64).ln())
            .sum()
    }

    /// The prime-power components `p^e`, ascending by prime. `None` if one of
    /// them does not fit in 64 bits.
    pub fn prime_power_parts(&self) -> Option<Vec<u64>> {
        self.factors
            .iter()
            .map(|&(p, e)| p.checked_pow(e))
            .collect()
    }

    pub fn lcm(&self, other: &FactoredInt) -> FactoredInt {
        lcm_factored(self, other)
    }
}

impl fmt::Display for FactoredInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// lcm by taking the larger exponent of every prime.
pub fn lcm_factored(a: &FactoredInt, b: &FactoredInt) -> FactoredInt {
    let (x, y) = (&a.factors, &b.factors);
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        match (x.get(i), y.get(j)) {
            (Some(&(p, e)), Some(&(q, f))) if p == q => {
                out.push((p, e.max(f)));
                i += 1;
                j += 1;
            }
            (Some(&(p, e)), Some(&(q, _))) if p < q => {
                out.push((p, e));
                i += 1;
            }
            (Some(_), Some(&(q, f))) => {
                out.push((q, f));
                j += 1;
            }
            (Some(&pe), None) => {
                out.push(pe);
                i += 1;
            }
            (None, Some(&qf)) => {
                out.push(qf);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    FactoredInt::from_sorted(out)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    (old_r, old_s, old_t)
}

/// Inverse of `a` modulo `q`.
pub fn mod_inverse(a: u64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::InvalidParams("modulus must be positive".into()));
    }
    if q == 1 {
        return Ok(0);
    }
    let (g, s, _) = ext_gcd((a % q) as i128, q as i128);
    if g != 1 {
        return Err(Error::NotInvertible(a, q));
    }
    Ok(s.rem_euclid(q as i128) as u64)
}

/// The unique residue modulo `m1 * m2` congruent to `r1` mod `m1` and `r2` mod
/// `m2`. The product must fit in 64 bits.
pub fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> Result<u64> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidParams("moduli must be positive".into()));
    }
    if r1 >= m1 || r2 >= m2 {
        return Err(Error::InvalidParams(format!(
            "residues must be reduced: {r1} mod {m1}, {r2} mod {m2}"
        )));
    }
    if gcd(m1, m2) != 1 {
        return Err(Error::NotCoprime(m1, m2));
    }
    let m = m1
        .checked_mul(m2)
        .ok_or_else(|| Error::Overflow(format!("{m1} * {m2}")))?;
    // r = r1 + m1 * ((r2 - r1) * m1^{-1} mod m2)
    let inv = mod_inverse(m1 % m2, m2)?;
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128) as u64;
    let k = mul_mod(diff, inv, m2);
    Ok(((r1 as u128 + m1 as u128 * k as u128) % m as u128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division_is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn sieve_small_bounds() {
        assert!(sieve_primes(0).unwrap().is_empty());
        assert!(sieve_primes(1).unwrap().is_empty());
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        let brute: Vec<u64> = (0..=100).filter(|&n| trial_division_is_prime(n)).collect();
        assert_eq!(brute.len(), 25);
        assert_eq!(sieve_primes(100).unwrap(), brute);
    }

    #[test]
    fn segmented_sieve_matches_simple_sieve() {
        let bound = 3 * SEGMENT + 12345;
        let seg = sieve_primes_with(bound, Exec::Sequential).unwrap();
        assert_eq!(seg, simple_sieve(bound));
        assert_eq!(sieve_primes_with(bound, Exec::Parallel).unwrap(), seg);
    }

    #[test]
    fn sieve_rejects_huge_bound() {
        assert!(matches!(
            sieve_primes(SIEVE_LIMIT + 1),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn factorize_examples() {
        let one = factorize(1).unwrap();
        assert!(one.factors().is_empty());
        assert_eq!(one.value(), &BigUint::one());
        assert_eq!(factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert!(trial_division_is_prime(9_999_991));
        assert_eq!(factorize(9_999_991).unwrap().factors(), &[(9_999_991, 1)]);
        assert_eq!(factorize(0), Err(Error::ZeroInput));
    }

    #[test]
    fn factorize_large_semiprimes() {
        let p = 4_294_967_291u64; // largest prime below 2^32
        let q = 4_294_967_279u64;
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors(), &[(q, 1), (p, 1)]);
        let f = factorize(u64::MAX).unwrap();
        assert_eq!(
            f.factors(),
            &[
                (3, 1),
                (5, 1),
                (17, 1),
                (257, 1),
                (641, 1),
                (65537, 1),
                (6_700_417, 1)
            ]
        );
        let p2 = 1_000_000_007u64;
        assert_eq!(factorize(p2 * p2).unwrap().factors(), &[(p2, 2)]);
    }

    #[test]
    fn factorize_round_trip_first_million() {
        for n in 1..=1_000_000u64 {
            let f = factorize(n).unwrap();
            assert_eq!(f.to_u64(), Some(n));
            let prod: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), trial_division_is_prime(n), "n = {n}");
        }
        // strong pseudoprime to bases 2..=11
        assert!(!is_prime(3_825_123_056_546_413_051));
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_pair(1, 3, 1, 7).unwrap(), 1);
        let brute = (0..21).find(|r| r % 3 == 2 && r % 7 == 6).unwrap();
        assert_eq!(brute, 20);
        assert_eq!(crt_pair(2, 3, 6, 7).unwrap(), 20);
        assert_eq!(crt_pair(0, 2, 0, 5).unwrap(), 0);
        assert_eq!(crt_pair(1, 4, 1, 6), Err(Error::NotCoprime(4, 6)));
    }

    #[test]
    fn crt_exhaustive_small() {
        for m1 in 1..=100u64 {
            for m2 in 1..=(10_000 / m1) {
                if gcd(m1, m2) != 1 {
                    continue;
                }
                for r1 in 0..m1 {
                    for r2 in 0..m2 {
                        let r = crt_pair(r1, m1, r2, m2).unwrap();
                        assert!(r < m1 * m2);
                        assert_eq!((r % m1, r % m2), (r1, r2));
                    }
                }
            }
        }
    }

    #[test]
    fn lcm_examples() {
        let n = factorize(360).unwrap();
        assert_eq!(lcm_factored(&FactoredInt::one(), &n), n);
        let l = lcm_factored(&factorize(12).unwrap(), &factorize(18).unwrap());
        assert_eq!(l.to_u64(), Some(36));
        let l = lcm_factored(&factorize(2).unwrap(), &factorize(1).unwrap());
        assert_eq!(l.to_u64(), Some(2));
    }

    #[test]
    fn lcm_exceeds_64_bits() {
        let mut acc = FactoredInt::one();
        for p in sieve_primes(200).unwrap() {
            acc = acc.lcm(&factorize(p).unwrap());
        }
        assert!(acc.to_u64().is_none());
        assert!(acc.is_squarefree());
        assert!(
            (acc.ln()
                - sieve_primes(200)
                    .unwrap()
                    .iter()
                    .map(|&p| (p as f64).ln())
                    .sum::<f64>())
            .abs()
                < 1e-9
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, 97).unwrap(), 1);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert_eq!((0..9).find(|x| 2 * x % 9 == 1), Some(5));
        assert_eq!(mod_inverse(2, 9).unwrap(), 5);
        assert_eq!(mod_inverse(3, 9), Err(Error::NotInvertible(3, 9)));
    }

    proptest! {
        #[test]
        fn lcm_is_least_common_multiple(a in 1u64..(1 << 32), b in 1u64..(1 << 32)) {
            let l = lcm_factored(&factorize(a).unwrap(), &factorize(b).unwrap());
            let naive = a as u128 / gcd(a, b) as u128 * b as u128;
            prop_assert_eq!(l.value().clone(), BigUint::from(naive));
        }

        #[test]
        fn inverse_is_inverse(a in 1u64..1_000_000, q in 2u64..1_000_000) {
            match mod_inverse(a, q) {
                Ok(x) => prop_assert_eq!(mul_mod(a, x, q), 1),
                Err(_) => prop_assert!(gcd(a, q) != 1),
            }
        }

        #[test]
        fn factorize_random_u64(n in 1u64..) {
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.value().clone(), BigUint::from(n));
            prop_assert!(f.factors().iter().all(|&(p, _)| is_prime(p)));
        }
    }
}
