//! Plain-text format for maps and varieties.
//!
//! ```text
//! # comment lines and blank lines are ignored
//! ambient projective 1
//! x1^2 + 5*x2^2
//! x2^2
//! ```
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! file    := header poly+
//! header  := "ambient" ("affine" | "projective") N
//! poly    := [sign] term (sign term)*
//! sign    := "+" | "-"
//! term    := factor ("*" factor)*
//! factor  := INTEGER | "x" INDEX ["^" EXPONENT]
//! ```
//!
//! Variables are `x1 .. xN` for affine `N`-space and `x1 .. x(N+1)` for
//! projective `N`-space. A map file has one line per coordinate; a variety
//! file has one line per defining equation. Integral-point files list one
//! point per line as comma-separated integers.

use num_bigint::BigInt;
use num_traits::One;

use super::{Ambient, IntPoint, IntPoly, PolyMap, Subvariety};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Meaningful lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_header(line: usize, s: &str) -> Result<Ambient> {
    let words: Vec<&str> = s.split_whitespace().collect();
    match words.as_slice() {
        ["ambient", kind, n] => {
            let n: usize = n
                .parse()
                .map_err(|_| parse_err(line, format!("bad dimension {n:?}")))?;
            if n == 0 {
                return Err(parse_err(line, "dimension must be positive"));
            }
            match *kind {
                "affine" => Ok(Ambient::Affine(n)),
                "projective" => Ok(Ambient::Projective(n)),
                other => Err(parse_err(line, format!("unknown ambient {other:?}"))),
            }
        }
        _ => Err(parse_err(line, "expected `ambient affine|projective N`")),
    }
}

fn parse_body(text: &str) -> Result<(Ambient, Vec<IntPoly>)> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let ambient = parse_header(hl, header)?;
    let polys = lines
        .map(|(ln, l)| parse_poly_line(l, ambient.num_vars(), ln))
        .collect::<Result<Vec<_>>>()?;
    Ok((ambient, polys))
}

pub fn parse_map(text: &str) -> Result<PolyMap> {
    let (ambient, polys) = parse_body(text)?;
    PolyMap::new(ambient, polys)
}

pub fn parse_variety(text: &str) -> Result<Subvariety> {
    let (ambient, polys) = parse_body(text)?;
    Subvariety::new(ambient, polys)
}

pub fn parse_points(text: &str) -> Result<Vec<IntPoint>> {
    content_lines(text)
        .map(|(ln, l)| {
            l.parse::<IntPoint>()
                .map_err(|e| parse_err(ln, e.to_string()))
        })
        .collect()
}

/// Parses one polynomial in `num_vars` variables.
pub fn parse_poly(s: &str, num_vars: usize) -> Result<IntPoly> {
    parse_poly_line(s, num_vars, 1)
}

fn parse_poly_line(s: &str, num_vars: usize, line: usize) -> Result<IntPoly> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(parse_err(line, "empty polynomial"));
    }
    let bytes = compact.as_bytes();
    let mut terms: Vec<(Vec<u32>, BigInt)> = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let mut negative = false;
        match bytes[pos] {
            b'+' => pos += 1,
            b'-' => {
                negative = true;
                pos += 1;
            }
            _ if pos > 0 => return Err(parse_err(line, format!("expected sign at offset {pos}"))),
            _ => {}
        }
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'+' || b == b'-')
            .map_or(bytes.len(), |k| pos + k);
        let term = &compact[pos..end];
        if term.is_empty() {
            return Err(parse_err(line, format!("missing term at offset {pos}")));
        }
        let (exps, mut coeff) = parse_term(term, num_vars, line)?;
        if negative {
            coeff = -coeff;
        }
        terms.push((exps, coeff));
        pos = end;
    }
    IntPoly::new(num_vars, terms)
}

fn parse_term(term: &str, num_vars: usize, line: usize) -> Result<(Vec<u32>, BigInt)> {
    let mut exps = vec![0u32; num_vars];
    let mut coeff = BigInt::one();
    for factor in term.split('*') {
        if factor.is_empty() {
            return Err(parse_err(line, format!("empty factor in {term:?}")));
        }
        if let Some(rest) = factor.strip_prefix('x') {
            let (idx, exp) = match rest.split_once('^') {
                Some((i, e)) => (i, e),
                None => (rest, "1"),
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(line, format!("bad variable {factor:?}")))?;
            if idx == 0 || idx > num_vars {
                return Err(parse_err(
                    line,
                    format!("variable x{idx} outside x1..x{num_vars}"),
                ));
            }
            let exp: u32 = exp
                .parse()
                .map_err(|_| parse_err(line, format!("bad exponent in {factor:?}")))?;
            exps[idx - 1] += exp;
        } else {
            let c: BigInt = factor
                .parse()
                .map_err(|_| parse_err(line, format!("bad factor {factor:?}")))?;
            coeff *= c;
        }
    }
    Ok((exps, coeff))
}

pub(crate) fn render(ambient: Ambient, polys: &[IntPoly]) -> String {
    let mut out = format!("ambient {ambient}\n");
    for p in polys {
        out.push_str(&p.to_string());
        out.push('\n');
    }
    out
}
