//! Smooth numbers: the smoothness predicate, brute-force `psi(x, y)`, the
//! Dickman function, and the ledger `log S(x)` accumulated over a cycle scan.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::modarith::factorize;
use crate::scan::{CycleScan, RowOutcome};

/// Largest `u` for which [`dickman_rho`] is tabulated.
pub const RHO_MAX_U: f64 = 20.0;

/// Integration step of the Dickman table.
const RHO_STEPS_PER_UNIT: usize = 1000;

/// Largest `x` accepted by [`psi_count`].
pub const PSI_BUDGET: u64 = 10_000_000;

/// An exponent `alpha` in `(0, 1)`, kept exact so that thresholds `x^alpha`
/// are compared without rounding.
pub type Alpha = Ratio<u32>;

/// Checks `0 < alpha < 1`.
pub fn check_alpha(alpha: Alpha) -> Result<()> {
    if *alpha.numer() == 0 || alpha.numer() >= alpha.denom() {
        return Err(Error::InvalidParams(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// True iff every prime factor of `n` is `<= y`. `1` is vacuously smooth;
/// `0` is never smooth.
pub fn is_smooth(n: u64, y: f64) -> bool {
    match factorize(n) {
        Ok(f) => f.largest_prime().is_none_or(|p| p as f64 <= y),
        Err(_) => false,
    }
}

/// Exact `p <= x^alpha`, i.e. `p^den <= x^num`.
pub fn below_power(p: u64, x: u64, alpha: Alpha) -> bool {
    let lhs = BigUint::from(p).pow(*alpha.denom());
    let rhs = BigUint::from(x).pow(*alpha.numer());
    lhs <= rhs
}

/// True iff `n` is `x^alpha`-smooth, compared exactly.
pub fn is_smooth_power(n: u64, x: u64, alpha: Alpha) -> bool {
    largest_prime_factor(n).is_none_or(|p| below_power(p, x, alpha))
}

/// Largest prime factor, `None` for `n <= 1`.
pub fn largest_prime_factor(n: u64) -> Option<u64> {
    factorize(n).ok().and_then(|f| f.largest_prime())
}

/// Number of `y`-smooth integers in `[1, x]`, by a largest-prime-factor sieve.
pub fn psi_count(x: u64, y: f64) -> Result<u64> {
    if x > PSI_BUDGET {
        return Err(Error::BudgetExceeded {
            size: x as u128,
            budget: PSI_BUDGET as u128,
        });
    }
    if x == 0 {
        return Ok(0);
    }
    let n = x as usize;
    // lpf[k] ends up as the largest prime dividing k (0 for k = 1).
    let mut lpf = vec![0u32; n + 1];
    for p in 2..=n {
        if lpf[p] == 0 {
            let mut k = p;
            while k <= n {
                lpf[k] = p as u32;
                k += p;
            }
        }
    }
    Ok(lpf[1..].iter().filter(|&&g| g as f64 <= y).count() as u64)
}

struct RhoTable {
    values: Vec<f64>,
}

impl RhoTable {
    fn step() -> f64 {
        1.0 / RHO_STEPS_PER_UNIT as f64
    }

    fn node(i: usize) -> f64 {
        i as f64 / RHO_STEPS_PER_UNIT as f64
    }

    /// Derivative at node `i`, taken from the cell on the given side. The
    /// only kink is at `u = 1`.
    fn slope(values: &[f64], i: usize, from_right: bool) -> f64 {
        let n = RHO_STEPS_PER_UNIT;
        if i < n || (i == n && !from_right) {
            0.0
        } else {
            -values[i - n] / Self::node(i)
        }
    }

    /// Cubic Hermite interpolation inside cell `[k, k+1]` at fraction `t`.
    fn hermite(values: &[f64], k: usize, t: f64) -> f64 {
        let h = Self::step();
        let (y0, y1) = (values[k], values[k + 1]);
        let d0 = Self::slope(values, k, true);
        let d1 = Self::slope(values, k + 1, false);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1
    }

    /// Classical RK4 on `rho'(u) = -rho(u - 1)/u`. The right-hand side does
    /// not involve `rho(u)` itself, so each step needs the delayed value at
    /// both cell ends (grid nodes) and at the midpoint (Hermite interpolant).
    fn build() -> Self {
        let n = RHO_STEPS_PER_UNIT;
        let total = (RHO_MAX_U as usize) * n;
        let h = Self::step();
        let mut values = vec![1.0f64; total + 1];
        for i in n..total {
            let u0 = Self::node(i);
            let u1 = Self::node(i + 1);
            let um = 0.5 * (u0 + u1);
            let f0 = -values[i - n] / u0;
            let fm = -Self::hermite(&values, i - n, 0.5) / um;
            let f1 = -values[i + 1 - n] / u1;
            values[i + 1] = values[i] + h / 6.0 * (f0 + 4.0 * fm + f1);
        }
        RhoTable { values }
    }

    fn eval(&self, u: f64) -> f64 {
        if u <= 1.0 {
            return 1.0;
        }
        let pos = u * RHO_STEPS_PER_UNIT as f64;
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - k as f64;
        Self::hermite(&self.values, k, t)
    }
}

fn rho_table() -> &'static RhoTable {
    static TABLE: OnceLock<RhoTable> = OnceLock::new();
    TABLE.get_or_init(RhoTable::build)
}

/// Dickman's function on `[0, 20]`.
pub fn dickman_rho(u: f64) -> Result<f64> {
    if !(0.0..=RHO_MAX_U).contains(&u) {
        return Err(Error::OutOfRange(format!(
            "dickman rho at u = {u}; supported range is [0, 20]"
        )));
    }
    Ok(rho_table().eval(u))
}

/// `x * rho(d1 / (2 alpha))`, the predicted `log S(x)` (lower-order terms
/// dropped).
pub fn predicted_log_s(x: f64, alpha: Alpha, d1: u32) -> Result<f64> {
    check_alpha(alpha)?;
    if x <= 0.0 || d1 == 0 {
        return Err(Error::InvalidParams("need x > 0 and d1 >= 1".into()));
    }
    let u = d1 as f64 * *alpha.denom() as f64 / (2.0 * *alpha.numer() as f64);
    Ok(x * dickman_rho(u)?)
}

/// Compensated summation (Neumaier), giving roughly twice `f64` precision
/// for long sums of logarithms.
#[derive(Clone, Copy, Debug, Default)]
pub struct LogSum {
    sum: f64,
    comp: f64,
}

impl LogSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Which `x` the smoothness bound `x^alpha` refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Threshold {
    /// At sample `x`, primes `p <= x` count if `|C_p|` is `x^alpha`-smooth.
    #[default]
    Running,
    /// One bound `x_max^alpha` for every sample.
    FixedTop,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerSample {
    pub x: u64,
    pub log_s: f64,
}

/// `log S(x)` at every prime of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothLedger {
    pub alpha: Alpha,
    pub threshold: Threshold,
    pub x_max: u64,
    pub samples: Vec<LedgerSample>,
    /// Primes counted at `x = x_max`, ascending.
    pub qualifying_primes: Vec<u64>,
}

impl SmoothLedger {
    /// `log S` at the largest sample `<= x`, or 0 below the first sample.
    pub fn log_s_at(&self, x: u64) -> f64 {
        match self.samples.partition_point(|s| s.x <= x) {
            0 => 0.0,
            k => self.samples[k - 1].log_s,
        }
    }
}

/// [`accumulate_s_with`] using the running threshold.
pub fn accumulate_s(scan: &CycleScan, alpha: Alpha) -> Result<SmoothLedger> {
    accumulate_s_with(scan, alpha, Threshold::Running)
}

/// Builds `log S(x) = sum of log p` over primes `p <= x` whose cycle length is
/// `x^alpha`-smooth (or `x_max^alpha`-smooth under [`Threshold::FixedTop`]).
///
/// Every prime row of the scan is a sample point except bad-reduction rows.
/// Overrun rows are samples but never qualify, since their cycle is unknown.
pub fn accumulate_s_with(
    scan: &CycleScan,
    alpha: Alpha,
    threshold: Threshold,
) -> Result<SmoothLedger> {
    check_alpha(alpha)?;
    scan.validate()?;
    let rows: Vec<_> = scan
        .rows
        .iter()
        .filter(|r| r.outcome != RowOutcome::BadReduction)
        .collect();
    if rows.is_empty() {
        return Err(Error::Empty("cycle scan"));
    }
    let xs: Vec<u64> = rows.iter().map(|r| r.prime).collect();
    let x_max = *xs.last().unwrap();

    // activation[i]: index of the first sample at which row i counts.
    let mut events: Vec<(usize, u64)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let Some(cycle) = r.cycle() else { continue };
        let act = match largest_prime_factor(cycle) {
            None => Some(i),
            Some(g) => match threshold {
                Threshold::FixedTop => below_power(g, x_max, alpha).then_some(i),
                Threshold::Running => {
                    let first = xs.partition_point(|&x| !below_power(g, x, alpha));
                    (first < xs.len()).then_some(first.max(i))
                }
            },
        };
        if let Some(a) = act {
            events.push((a, r.prime));
        }
    }
    events.sort_unstable();

    let mut samples = Vec::with_capacity(xs.len());
    let mut acc = LogSum::default();
    let mut ev = events.iter().peekable();
    for (i, &x) in xs.iter().enumerate() {
        while let Some(&&(a, p)) = ev.peek() {
            if a > i {
                break;
            }
            acc.add((p as f64).ln());
            ev.next();
        }
        samples.push(LedgerSample {
            x,
            log_s: acc.value(),
        });
    }
    let mut qualifying_primes: Vec<u64> = events.iter().map(|&(_, p)| p).collect();
    qualifying_primes.sort_unstable();
    Ok(SmoothLedger {
        alpha,
        threshold,
        x_max,
        samples,
        qualifying_primes,
    })
}

/// Least-squares slope of `log S(x)` against `x` over samples with
/// `x >= x_max / 2`.
pub fn upper_half_slope(ledger: &SmoothLedger) -> Option<f64> {
    let lo = ledger.x_max / 2;
    let pts: Vec<(f64, f64)> = ledger
        .samples
        .iter()
        .filter(|s| s.x >= lo)
        .map(|s| (s.x as f64, s.log_s))
        .collect();
    least_squares_slope(&pts)
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
