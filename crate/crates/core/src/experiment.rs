//! Batch search over seeded random maps of affine `n`-space against the unit
//! sphere `1 - x1^2 - ... - xn^2 = 0`.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modarith::is_prime;
use crate::obstruction::{
    first_miss, is_prime_power, try_modulus, SearchOptions, Semantics, Tried,
};
use crate::rng::derive_seed;
use crate::variety::{random_map, Ambient, IntPoint, PolyMap, Subvariety};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub degree: u32,
    pub coeff_bound: u64,
    pub count: u64,
    /// Largest modulus tried.
    pub bound: u64,
    pub seed: u64,
    pub point: IntPoint,
    pub semantics: Semantics,
    /// Map applications per modulus.
    pub budget: u64,
    pub memory_budget: u64,
    /// Replace map 0 by the identity.
    pub inject_identity: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 5,
            degree: 2,
            coeff_bound: 10,
            count: 50,
            bound: 500,
            seed: 1,
            point: IntPoint::from_i64(&[1, 1, 1, 1, 1]),
            semantics: Semantics::Full,
            budget: 100_000_000,
            memory_budget: 10_000_000,
            inject_identity: false,
        }
    }
}

impl ExperimentConfig {
    /// Map `index` of the batch.
    pub fn map(&self, index: u64) -> Result<PolyMap> {
        if self.inject_identity && index == 0 {
            return Ok(PolyMap::identity(Ambient::Affine(self.n)));
        }
        random_map(
            self.n,
            self.degree,
            self.coeff_bound,
            derive_seed(self.seed, index),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRow {
    pub index: u64,
    pub map_digest: u64,
    /// Smallest prime power `q <= bound` modulo which the orbit misses `V`.
    pub prime_power_m: Option<u64>,
    /// Smallest modulus of any shape.
    pub any_m: Option<u64>,
    /// Moduli skipped for budget or bad reduction.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentSummary {
    pub fn prime_power_fraction(&self) -> f64 {
        self.fraction(|r| r.prime_power_m.is_some())
    }

    pub fn any_fraction(&self) -> f64 {
        self.fraction(|r| r.any_m.is_some())
    }

    fn fraction(&self, f: impl Fn(&ExperimentRow) -> bool) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| f(r)).count() as f64 / self.rows.len() as f64
    }

    /// Indices of maps without any modulus up to the bound.
    pub fn unresolved(&self) -> Vec<u64> {
        self.rows
            .iter()
            .filter(|r| r.any_m.is_none())
            .map(|r| r.index)
            .collect()
    }

    /// One row per map: `index,seed,map_digest,prime_power_m,any_m,skipped`,
    /// with empty fields for "none".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,seed,map_digest,prime_power_m,any_m,skipped\n");
        let cell = |v: Option<u64>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:016x},{},{},{}\n",
                r.index,
                derive_seed(self.config.seed, r.index),
                r.map_digest,
                cell(r.prime_power_m),
                cell(r.any_m),
                r.skipped
            ));
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let unresolved: Vec<String> = self.unresolved().iter().map(u64::to_string).collect();
        format!(
            "maps={}\nbound={}\nprime_power_fraction={:.6}\nany_fraction={:.6}\nunresolved={}\n",
            self.rows.len(),
            self.config.bound,
            self.prime_power_fraction(),
            self.any_fraction(),
            if unresolved.is_empty() {
                "none".to_string()
            } else {
                unresolved.join(" ")
            }
        )
    }
}

/// Searches one map: prime powers first, then the remaining composites below
/// the prime-power answer. Together this is the ascending search over all
/// moduli, without repeating the prime-power work.
pub fn run_one(cfg: &ExperimentConfig, index: u64, v: &Subvariety) -> Result<ExperimentRow> {
    let phi = cfg.map(index)?;
    let opts = SearchOptions {
        semantics: cfg.semantics,
        budget: cfg.budget,
        memory_budget: cfg.memory_budget,
        exec: Exec::Sequential,
    };
    let attempt = |ms: &[u64]| {
        ms.iter()
            .map(|&m| try_modulus(&phi, &cfg.point, v, m, &opts))
            .collect::<Vec<_>>()
    };
    let mut tried: Vec<(u64, Tried)> = Vec::new();
    let pp = (2..=cfg.bound).filter(|&m| is_prime_power(m));
    let prime_power_m = first_miss(pp, Exec::Sequential, attempt, &mut tried)?.map(|f| f.0);
    let limit = prime_power_m.map_or(cfg.bound, |m| m - 1);
    let composites = (6..=limit).filter(|&m| !is_prime(m) && !is_prime_power(m));
    let composite_m = first_miss(composites, Exec::Sequential, attempt, &mut tried)?.map(|f| f.0);
    let skipped = tried
        .iter()
        .filter(|t| matches!(t.1, Tried::Skipped(_)))
        .count();
    Ok(ExperimentRow {
        index,
        map_digest: phi.digest(),
        prime_power_m,
        any_m: composite_m.or(prime_power_m),
        skipped,
    })
}

/// Runs the whole batch; maps are processed in parallel under
/// [`Exec::Parallel`] and rows always come back in index order.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentSummary> {
    if cfg.count == 0 {
        return Err(Error::InvalidParams("count must be at least 1".into()));
    }
    if cfg.point.len() != cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n,
            got: cfg.point.len(),
        });
    }
    let v = Subvariety::unit_sphere(cfg.n);
    let rows = exec
        .map_range(cfg.count, |i| run_one(cfg, i, &v))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentSummary {
        config: cfg.clone(),
        rows,
    })
}
