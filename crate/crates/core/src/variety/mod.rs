//! Polynomials, polynomial self-maps of affine and projective space,
//! subvarieties, and their reductions modulo `m`.

mod point;
mod poly;
mod reduced;
pub mod text;

use std::fmt;

use num_bigint::BigInt;

pub use point::{IntPoint, PointKind, ResiduePoint};
pub use poly::{IntPoly, Term};
pub use reduced::{ReducedMap, ReducedVariety, MAX_MODULUS};

use crate::error::{Error, Result};
use crate::modarith::is_prime;
use crate::rng::SplitMix64;

/// Default cap on `p^n` for exhaustive point enumeration.
pub const COUNT_BUDGET: u128 = 10_000_000;

/// Affine `n`-space or projective `n`-space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ambient {
    Affine(usize),
    Projective(usize),
}

impl Ambient {
    /// Dimension `n`.
    pub fn dim(self) -> usize {
        match self {
            Ambient::Affine(n) | Ambient::Projective(n) => n,
        }
    }

    /// Number of coordinates of a point: `n` affine, `n + 1` projective.
    pub fn num_vars(self) -> usize {
        match self {
            Ambient::Affine(n) => n,
            Ambient::Projective(n) => n + 1,
        }
    }

    pub fn is_projective(self) -> bool {
        matches!(self, Ambient::Projective(_))
    }

    /// `|X(F_p)|`: `p^n` or `(p^{n+1} - 1)/(p - 1)`.
    pub fn count_over(self, p: u64) -> u128 {
        let p = p as u128;
        match self {
            Ambient::Affine(n) => p.pow(n as u32),
            Ambient::Projective(n) => (0..=n as u32).map(|k| p.pow(k)).sum(),
        }
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ambient::Affine(n) => write!(f, "affine {n}"),
            Ambient::Projective(n) => write!(f, "projective {n}"),
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A polynomial self-map `phi: X -> X` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMap {
    ambient: Ambient,
    coords: Vec<IntPoly>,
    degree: u32,
}

impl PolyMap {
    pub fn new(ambient: Ambient, coords: Vec<IntPoly>) -> Result<Self> {
        let nv = ambient.num_vars();
        if ambient.dim() == 0 {
            return Err(Error::InvalidMap(
                "ambient dimension must be positive".into(),
            ));
        }
        if coords.len() != nv {
            return Err(Error::InvalidMap(format!(
                "{ambient} needs {nv} coordinate polynomials, got {}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| c.num_vars() != nv) {
            return Err(Error::DimensionMismatch {
                expected: nv,
                got: bad.num_vars(),
            });
        }
        let degree = coords.iter().map(IntPoly::degree).max().unwrap_or(0);
        if ambient.is_projective() {
            if coords.iter().all(IntPoly::is_zero) {
                return Err(Error::InvalidMap("all coordinates are zero".into()));
            }
            if !coords.iter().all(|c| c.is_homogeneous_of(degree)) {
                return Err(Error::InvalidMap(format!(
                    "projective coordinates must be homogeneous of common degree {degree}"
                )));
            }
        }
        Ok(PolyMap {
            ambient,
            coords,
            degree,
        })
    }

    pub fn identity(ambient: Ambient) -> Self {
        let nv = ambient.num_vars();
        let coords = (0..nv).map(|i| IntPoly::var(nv, i)).collect();
        PolyMap::new(ambient, coords).expect("identity is valid")
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn coords(&self) -> &[IntPoly] {
        &self.coords
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Compiles the map for fast iteration modulo `modulus`.
    pub fn reduce(&self, modulus: u64) -> Result<ReducedMap> {
        ReducedMap::new(self, modulus)
    }

    /// Applies the map over `Z` (affine maps; for projective maps the raw
    /// coordinate tuple is returned without rescaling).
    pub fn apply_int(&self, pt: &IntPoint) -> Result<IntPoint> {
        let out = self
            .coords
            .iter()
            .map(|c| c.eval_int(&pt.0))
            .collect::<Result<Vec<BigInt>>>()?;
        Ok(IntPoint(out))
    }

    /// Header line plus one canonical polynomial per line.
    pub fn canonical_text(&self) -> String {
        text::render(self.ambient, &self.coords)
    }

    /// FNV-1a of [`PolyMap::canonical_text`].
    pub fn digest(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }
}

/// The zero locus `V(H_1, ..., H_s)` inside an ambient space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subvariety {
    ambient: Ambient,
    equations: Vec<IntPoly>,
}

impl Subvariety {
    pub fn new(ambient: Ambient, equations: Vec<IntPoly>) -> Result<Self> {
        if equations.is_empty() {
            return Err(Error::InvalidMap(
                "a subvariety needs at least one equation".into(),
            ));
        }
        let nv = ambient.num_vars();
        for eq in &equations {
            if eq.num_vars() != nv {
                return Err(Error::DimensionMismatch {
                    expected: nv,
                    got: eq.num_vars(),
                });
            }
            if ambient.is_projective() && !eq.is_homogeneous_of(eq.degree()) {
                return Err(Error::InvalidMap(format!(
                    "projective equation {eq} is not homogeneous"
                )));
            }
        }
        Ok(Subvariety { ambient, equations })
    }

    /// The whole ambient space, cut out by the zero polynomial.
    pub fn whole(ambient: Ambient) -> Self {
        Subvariety {
            ambient,
            equations: vec![IntPoly::zero(ambient.num_vars())],
        }
    }

    /// `1 - x1^2 - ... - xn^2 = 0` in affine `n`-space.
    pub fn unit_sphere(n: usize) -> Self {
        let mut terms = vec![(vec![0; n], BigInt::from(1))];
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 2;
            terms.push((e, BigInt::from(-1)));
        }
        let eq = IntPoly::new(n, terms).expect("valid sphere");
        Subvariety::new(Ambient::Affine(n), vec![eq]).expect("valid sphere")
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn equations(&self) -> &[IntPoly] {
        &self.equations
    }

    pub fn reduce(&self, modulus: u64) -> Result<ReducedVariety> {
        ReducedVariety::new(self, modulus)
    }

    /// Exact membership of an integer point.
    pub fn contains_int(&self, pt: &IntPoint) -> Result<bool> {
        for eq in &self.equations {
            if !num_traits::Zero::is_zero(&eq.eval_int(&pt.0)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn canonical_text(&self) -> String {
        text::render(self.ambient, &self.equations)
    }

    pub fn digest(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }
}

/// Value of `f` at a residue point.
pub fn poly_eval(f: &IntPoly, pt: &ResiduePoint) -> Result<u64> {
    f.eval_mod(pt.coords(), pt.modulus())
}

/// `phi(pt)`; projective images are renormalized, and an image with no unit
/// coordinate is reported as [`Error::BadReduction`].
pub fn map_apply(phi: &PolyMap, pt: &ResiduePoint) -> Result<ResiduePoint> {
    check_compatible(phi.ambient(), pt)?;
    let red = phi.reduce(pt.modulus())?;
    let mut out = vec![0; red.dim()];
    if !red.apply(pt.coords(), &mut out) {
        return Err(Error::BadReduction {
            modulus: pt.modulus(),
            index: 1,
        });
    }
    Ok(red.point(out))
}

/// True iff every defining equation vanishes at `pt`.
pub fn on_subvariety(v: &Subvariety, pt: &ResiduePoint) -> Result<bool> {
    check_compatible(v.ambient(), pt)?;
    for eq in v.equations() {
        if poly_eval(eq, pt)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn check_compatible(ambient: Ambient, pt: &ResiduePoint) -> Result<()> {
    if pt.coords().len() != ambient.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: ambient.num_vars(),
            got: pt.coords().len(),
        });
    }
    if ambient.is_projective() != pt.is_projective() {
        return Err(Error::InvalidPoint(format!(
            "point {pt} does not live in {ambient} space"
        )));
    }
    Ok(())
}

/// Calls `f` on every point of `X(F_p)`; projective points are produced in
/// canonical form.
pub fn for_each_point<F: FnMut(&[u64])>(ambient: Ambient, p: u64, mut f: F) {
    let nv = ambient.num_vars();
    let mut buf = vec![0u64; nv];
    match ambient {
        Ambient::Affine(_) => enumerate_tuples(&mut buf, nv, p, &mut f),
        Ambient::Projective(_) => {
            for lead in 0..nv {
                buf.iter_mut().for_each(|c| *c = 0);
                buf[lead] = 1;
                enumerate_tuples(&mut buf, lead, p, &mut f);
            }
        }
    }
}

/// Runs through all assignments of `buf[..free]` in `0..p`.
fn enumerate_tuples<F: FnMut(&[u64])>(buf: &mut [u64], free: usize, p: u64, f: &mut F) {
    for c in buf[..free].iter_mut() {
        *c = 0;
    }
    loop {
        f(buf);
        let mut i = 0;
        loop {
            if i == free {
                return;
            }
            buf[i] += 1;
            if buf[i] < p {
                break;
            }
            buf[i] = 0;
            i += 1;
        }
    }
}

/// Exhaustive `(|V(F_p)|, |X(F_p)|)`.
pub fn count_points(v: &Subvariety, p: u64) -> Result<(u64, u64)> {
    count_points_with_budget(v, p, COUNT_BUDGET)
}

pub fn count_points_with_budget(v: &Subvariety, p: u64, budget: u128) -> Result<(u64, u64)> {
    if !is_prime(p) {
        return Err(Error::InvalidParams(format!("{p} is not prime")));
    }
    let total = v.ambient().count_over(p);
    if total > budget {
        return Err(Error::BudgetExceeded {
            size: total,
            budget,
        });
    }
    let red = v.reduce(p)?;
    let mut on = 0u64;
    for_each_point(v.ambient(), p, |pt| {
        if red.contains(pt) {
            on += 1;
        }
    });
    Ok((on, total as u64))
}

/// Exponent vectors of all monomials of total degree `<= degree` in `n`
/// variables: by ascending total degree, and within one degree in descending
/// lexicographic order (`x1^2, x1*x2, ..., xn^2`).
pub fn monomials_up_to(n: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut cur = vec![0u32; n];
        push_compositions(&mut cur, 0, d, &mut out);
    }
    out
}

fn push_compositions(cur: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    let n = cur.len();
    if i == n - 1 {
        cur[i] = left;
        out.push(cur.clone());
        cur[i] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e;
        push_compositions(cur, i + 1, left - e, out);
    }
    cur[i] = 0;
}

/// A random affine map of `A^n` whose coordinates use every monomial of
/// degree `<= degree`.
///
/// Coefficients are drawn from a [`SplitMix64`] seeded with `seed`, uniformly
/// in `[-coeff_bound, coeff_bound]`, coordinate by coordinate and within a
/// coordinate in [`monomials_up_to`] order.
pub fn random_map(n: usize, degree: u32, coeff_bound: u64, seed: u64) -> Result<PolyMap> {
    if n == 0 || degree == 0 {
        return Err(Error::InvalidParams("need n >= 1 and degree >= 1".into()));
    }
    let monos = monomials_up_to(n, degree);
    let mut rng = SplitMix64::new(seed);
    let mut coords = Vec::with_capacity(n);
    for _ in 0..n {
        let terms: Vec<(Vec<u32>, BigInt)> = monos
            .iter()
            .map(|e| (e.clone(), BigInt::from(rng.symmetric(coeff_bound))))
            .collect();
        coords.push(IntPoly::new(n, terms)?);
    }
    PolyMap::new(Ambient::Affine(n), coords)
}
