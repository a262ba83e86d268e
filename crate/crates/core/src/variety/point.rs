use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use super::poly::reduce_bigint;
use super::Ambient;
use crate::error::{Error, Result};
use crate::modarith::{factorize, mod_inverse, mul_mod};

/// How the coordinates of a [`ResiduePoint`] are to be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointKind {
    Affine,
    /// Projective over `Z/p^k`; `prime` is `p`.
    Projective {
        prime: u64,
    },
}

/// A point of `X(Z/m)`.
///
/// Affine points are tuples of least nonnegative residues. Projective points
/// live over prime powers only and are kept in canonical form: the last
/// coordinate that is a unit mod `q` equals 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResiduePoint {
    modulus: u64,
    kind: PointKind,
    coords: Vec<u64>,
}

impl ResiduePoint {
    pub fn affine(coords: Vec<u64>, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidPoint("modulus must be positive".into()));
        }
        let coords = coords.into_iter().map(|c| c % modulus).collect();
        Ok(ResiduePoint {
            modulus,
            kind: PointKind::Affine,
            coords,
        })
    }

    /// Projective point modulo the prime power `modulus`, normalized.
    pub fn projective(coords: Vec<u64>, modulus: u64) -> Result<Self> {
        let prime = prime_of_prime_power(modulus)?;
        let mut coords: Vec<u64> = coords.into_iter().map(|c| c % modulus).collect();
        if !normalize_projective(&mut coords, modulus, prime) {
            return Err(Error::InvalidPoint(format!(
                "no coordinate is a unit modulo {modulus}"
            )));
        }
        Ok(ResiduePoint {
            modulus,
            kind: PointKind::Projective { prime },
            coords,
        })
    }

    pub(crate) fn from_raw(modulus: u64, kind: PointKind, coords: Vec<u64>) -> Self {
        ResiduePoint {
            modulus,
            kind,
            coords,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn is_projective(&self) -> bool {
        matches!(self.kind, PointKind::Projective { .. })
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl fmt::Display for ResiduePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(u64::to_string).collect();
        match self.kind {
            PointKind::Affine => write!(f, "({}) mod {}", parts.join(","), self.modulus),
            PointKind::Projective { .. } => {
                write!(f, "[{}] mod {}", parts.join(":"), self.modulus)
            }
        }
    }
}

pub(crate) fn prime_of_prime_power(q: u64) -> Result<u64> {
    let f = factorize(q.max(1))?;
    match f.factors() {
        [(p, _)] => Ok(*p),
        _ => Err(Error::Unsupported(format!(
            "projective points need a prime-power modulus, got {q}"
        ))),
    }
}

/// Scales `coords` so the last unit coordinate becomes 1. Returns false when
/// no coordinate is a unit (the tuple is not a point of projective space).
pub(crate) fn normalize_projective(coords: &mut [u64], q: u64, p: u64) -> bool {
    let Some(idx) = coords.iter().rposition(|&c| c % p != 0) else {
        return false;
    };
    let lead = coords[idx];
    if lead != 1 {
        let inv = mod_inverse(lead, q).expect("unit is invertible");
        for c in coords.iter_mut() {
            *c = mul_mod(*c, inv, q);
        }
    }
    true
}

/// A point with integer coordinates, e.g. the starting point of an orbit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoint(pub Vec<BigInt>);

impl IntPoint {
    pub fn from_i64(coords: &[i64]) -> Self {
        IntPoint(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reduction into `X(Z/m)` for the given ambient space.
    pub fn reduce(&self, ambient: Ambient, modulus: u64) -> Result<ResiduePoint> {
        if self.len() != ambient.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: ambient.num_vars(),
                got: self.len(),
            });
        }
        let coords: Vec<u64> = self.0.iter().map(|c| reduce_bigint(c, modulus)).collect();
        match ambient {
            Ambient::Affine(_) => ResiduePoint::affine(coords, modulus),
            Ambient::Projective(_) => ResiduePoint::projective(coords, modulus),
        }
    }
}

impl fmt::Display for IntPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(BigInt::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for IntPoint {
    type Err = Error;

    /// Accepts `1,1,1`, `1:1`, `[1:1]` or `(1,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s
            .trim()
            .trim_matches(|c| matches!(c, '[' | ']' | '(' | ')'));
        let coords = trimmed
            .split([',', ':'])
            .map(|t| {
                t.trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::InvalidPoint(format!("bad coordinate {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(Error::InvalidPoint("empty point".into()));
        }
        Ok(IntPoint(coords))
    }
}
