use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// One monomial with its integer coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coeff: BigInt,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

/// Graded lexicographic order, largest first: higher total degree, then
/// lexicographically larger exponent vector.
fn grlex_desc(a: &[u32], b: &[u32]) -> Ordering {
    let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
    db.cmp(&da).then_with(|| b.cmp(a))
}

/// Sparse multivariate polynomial with integer coefficients.
///
/// Terms are kept merged, nonzero and sorted in descending graded
/// lexicographic order; the zero polynomial has no terms and degree 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    num_vars: usize,
    terms: Vec<Term>,
}

impl IntPoly {
    pub fn new<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        if num_vars == 0 {
            return Err(Error::InvalidMap(
                "polynomials need at least one variable".into(),
            ));
        }
        let mut raw: Vec<Term> = Vec::new();
        for (exps, coeff) in terms {
            if exps.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    got: exps.len(),
                });
            }
            raw.push(Term { exps, coeff });
        }
        raw.sort_by(|a, b| grlex_desc(&a.exps, &b.exps));
        let mut merged: Vec<Term> = Vec::with_capacity(raw.len());
        for t in raw {
            match merged.last_mut() {
                Some(last) if last.exps == t.exps => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        Ok(IntPoly {
            num_vars,
            terms: merged,
        })
    }

    /// Convenience constructor from small coefficients.
    pub fn from_terms(num_vars: usize, terms: &[(&[u32], i64)]) -> Result<Self> {
        Self::new(
            num_vars,
            terms.iter().map(|(e, c)| (e.to_vec(), BigInt::from(*c))),
        )
    }

    pub fn zero(num_vars: usize) -> Self {
        IntPoly {
            num_vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(num_vars: usize, c: i64) -> Self {
        Self::new(num_vars, [(vec![0; num_vars], BigInt::from(c))]).expect("valid constant")
    }

    /// The coordinate function `x_{index+1}`.
    pub fn var(num_vars: usize, index: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[index] = 1;
        Self::new(num_vars, [(e, BigInt::one())]).expect("valid variable")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    /// True if every term has total degree `d`. The zero polynomial is
    /// homogeneous of every degree.
    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.iter().all(|t| t.degree() == d)
    }

    /// Exact value at an integer point.
    pub fn eval_int(&self, point: &[BigInt]) -> Result<BigInt> {
        self.check_len(point.len())?;
        let mut acc = BigInt::zero();
        for t in &self.terms {
            let mut v = t.coeff.clone();
            for (x, &e) in point.iter().zip(&t.exps) {
                if e > 0 {
                    v *= x.pow(e);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Value at a residue tuple modulo `m`, reducing after every operation.
    pub fn eval_mod(&self, point: &[u64], m: u64) -> Result<u64> {
        self.check_len(point.len())?;
        if m == 1 {
            return Ok(0);
        }
        let m128 = m as u128;
        let mut acc: u128 = 0;
        for t in &self.terms {
            let mut v = reduce_bigint(&t.coeff, m) as u128;
            for (&x, &e) in point.iter().zip(&t.exps) {
                for _ in 0..e {
                    v = v * (x % m) as u128 % m128;
                }
            }
            acc = (acc + v) % m128;
        }
        Ok(acc as u64)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got,
            });
        }
        Ok(())
    }
}

/// Least nonnegative residue of `c` modulo `m`.
pub(crate) fn reduce_bigint(c: &BigInt, m: u64) -> u64 {
    c.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue below modulus fits in u64")
}

impl fmt::Display for IntPoly {
    /// Canonical text: `3*x1^2*x2 - x3 + 7`, terms in descending graded
    /// lexicographic order, unit coefficients and exponents omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = t.coeff.abs();
            let mut factors: Vec<String> = Vec::new();
            let constant = t.exps.iter().all(|&e| e == 0);
            if !mag.is_one() || constant {
                factors.push(mag.to_string());
            }
            for (j, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", j + 1)),
                    _ => factors.push(format!("x{}^{}", j + 1, e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
