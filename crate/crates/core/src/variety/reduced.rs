//! Maps and varieties compiled for one modulus.
//!
//! Coefficients are reduced once and each term is flattened to a list of
//! variable indices (`x1^2*x3` becomes `[0, 0, 2]`). Evaluation picks the
//! cheapest arithmetic that cannot overflow:
//!
//! * `Lazy`: `terms * (m-1)^(deg+1) < 2^64`, so the whole sum is formed in
//!   plain 64-bit arithmetic and reduced once per coordinate;
//! * `Word`: `m < 2^32`, one 64-bit reduction per multiplication;
//! * `Wide`: 128-bit intermediates.

use super::point::{normalize_projective, prime_of_prime_power, PointKind, ResiduePoint};
use super::poly::{reduce_bigint, IntPoly};
use super::{PolyMap, Subvariety};
use crate::error::{Error, Result};

/// Largest modulus accepted for iteration.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tier {
    Lazy,
    Word,
    Wide,
}

#[derive(Clone, Debug)]
struct FlatPoly {
    coeffs: Vec<u64>,
    offsets: Vec<u32>,
    vars: Vec<u16>,
}

impl FlatPoly {
    fn new(f: &IntPoly, m: u64) -> Self {
        let mut coeffs = Vec::new();
        let mut offsets = vec![0u32];
        let mut vars = Vec::new();
        for t in f.terms() {
            let c = reduce_bigint(&t.coeff, m);
            if c == 0 {
                continue;
            }
            coeffs.push(c);
            for (i, &e) in t.exps.iter().enumerate() {
                for _ in 0..e {
                    vars.push(i as u16);
                }
            }
            offsets.push(vars.len() as u32);
        }
        FlatPoly {
            coeffs,
            offsets,
            vars,
        }
    }

    fn max_factors(&self) -> u32 {
        self.offsets
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0)
            + 1
    }

    #[inline]
    fn eval(&self, x: &[u64], m: u64, tier: Tier) -> u64 {
        match tier {
            Tier::Lazy => {
                let mut acc = 0u64;
                for (t, &c) in self.coeffs.iter().enumerate() {
                    let mut prod = c;
                    for &v in &self.vars[self.offsets[t] as usize..self.offsets[t + 1] as usize] {
                        prod *= x[v as usize];
                    }
                    acc += prod;
                }
                acc % m
            }
            Tier::Word => {
                let mut acc = 0u64;
                for (t, &c) in self.coeffs.iter().enumerate() {
                    let mut prod = c;
                    for &v in &self.vars[self.offsets[t] as usize..self.offsets[t + 1] as usize] {
                        prod = prod * x[v as usize] % m;
                    }
                    acc += prod;
                    if acc >= m {
                        acc -= m;
                    }
                }
                acc
            }
            Tier::Wide => {
                let m128 = m as u128;
                let mut acc = 0u128;
                for (t, &c) in self.coeffs.iter().enumerate() {
                    let mut prod = c as u128;
                    for &v in &self.vars[self.offsets[t] as usize..self.offsets[t + 1] as usize] {
                        prod = prod * x[v as usize] as u128 % m128;
                    }
                    acc = (acc + prod) % m128;
                }
                acc as u64
            }
        }
    }
}

fn choose_tier(polys: &[FlatPoly], m: u64) -> Tier {
    let lazy_ok = polys.iter().all(|p| {
        let mut bound: u128 = p.coeffs.len() as u128;
        for _ in 0..p.max_factors() {
            bound = bound.saturating_mul((m - 1) as u128);
        }
        bound <= u64::MAX as u128
    });
    if lazy_ok {
        Tier::Lazy
    } else if m < (1 << 32) {
        Tier::Word
    } else {
        Tier::Wide
    }
}

fn check_modulus(m: u64) -> Result<()> {
    if m == 0 || m > MAX_MODULUS {
        return Err(Error::OutOfRange(format!(
            "modulus {m} must lie in 1..=2^62"
        )));
    }
    Ok(())
}

/// A [`PolyMap`] reduced modulo one modulus.
#[derive(Clone, Debug)]
pub struct ReducedMap {
    modulus: u64,
    kind: PointKind,
    polys: Vec<FlatPoly>,
    tier: Tier,
}

impl ReducedMap {
    pub fn new(phi: &PolyMap, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        let kind = if phi.ambient().is_projective() {
            PointKind::Projective {
                prime: prime_of_prime_power(modulus)?,
            }
        } else {
            PointKind::Affine
        };
        let polys: Vec<FlatPoly> = phi
            .coords()
            .iter()
            .map(|c| FlatPoly::new(c, modulus))
            .collect();
        let tier = choose_tier(&polys, modulus);
        Ok(ReducedMap {
            modulus,
            kind,
            polys,
            tier,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    /// Coordinates per point.
    pub fn dim(&self) -> usize {
        self.polys.len()
    }

    /// Writes `phi(src)` into `dst`. Returns false on bad reduction (a
    /// projective image without unit coordinate); `dst` is then unspecified.
    #[inline]
    pub fn apply(&self, src: &[u64], dst: &mut [u64]) -> bool {
        for (d, p) in dst.iter_mut().zip(&self.polys) {
            *d = p.eval(src, self.modulus, self.tier);
        }
        match self.kind {
            PointKind::Affine => true,
            PointKind::Projective { prime } => normalize_projective(dst, self.modulus, prime),
        }
    }

    pub(crate) fn point(&self, coords: Vec<u64>) -> ResiduePoint {
        ResiduePoint::from_raw(self.modulus, self.kind, coords)
    }
}

/// A [`Subvariety`] reduced modulo one modulus.
#[derive(Clone, Debug)]
pub struct ReducedVariety {
    modulus: u64,
    polys: Vec<FlatPoly>,
    tier: Tier,
}

impl ReducedVariety {
    pub fn new(v: &Subvariety, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        let polys: Vec<FlatPoly> = v
            .equations()
            .iter()
            .map(|e| FlatPoly::new(e, modulus))
            .collect();
        let tier = choose_tier(&polys, modulus);
        Ok(ReducedVariety {
            modulus,
            polys,
            tier,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// True iff every equation vanishes at `x`.
    #[inline]
    pub fn contains(&self, x: &[u64]) -> bool {
        self.polys
            .iter()
            .all(|p| p.eval(x, self.modulus, self.tier) == 0)
    }
}
