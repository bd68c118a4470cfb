//! Exact arithmetic in graded commutative polynomial coefficient rings.
//!
//! Generators carry negative cohomological degrees: the universal
//! coefficients `a[i,j]` have degree `-(i+j-1)`, the logarithm coefficients
//! `m[k]` have degree `-k`. Polynomials are sparse maps from canonical
//! monomials to arbitrary-precision integers, truncated by a coefficient
//! degree bound: any monomial whose absolute degree exceeds the bound is
//! discarded, never rounded.

use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// A coefficient-ring generator.
///
/// `A(i, j)` is stored with `i <= j`; construction through [`CoeffGenerator::a`]
/// normalizes the index order, which is how the commutativity identification
/// of the two mixed coefficients is enforced.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoeffGenerator {
    A(u32, u32),
    M(u32),
    Named(String, i64),
}

impl CoeffGenerator {
    /// Universal coefficient `a[i,j]`, normalized so `i <= j`.
    pub fn a(i: u32, j: u32) -> Self {
        assert!(i >= 1 && j >= 1, "a[i,j] requires i, j >= 1");
        if i <= j {
            CoeffGenerator::A(i, j)
        } else {
            CoeffGenerator::A(j, i)
        }
    }

    /// Logarithm coefficient `m[k]`.
    pub fn m(k: u32) -> Self {
        assert!(k >= 1, "m[k] requires k >= 1");
        CoeffGenerator::M(k)
    }

    /// Free-form generator with an explicit nonzero degree.
    pub fn named(name: &str, degree: i64) -> Self {
        assert!(degree != 0, "named generators must have nonzero degree");
        CoeffGenerator::Named(name.to_string(), degree)
    }

    /// Cohomological degree of the generator.
    pub fn degree(&self) -> i64 {
        match self {
            CoeffGenerator::A(i, j) => -((i + j - 1) as i64),
            CoeffGenerator::M(k) => -(*k as i64),
            CoeffGenerator::Named(_, d) => *d,
        }
    }
}

impl fmt::Display for CoeffGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffGenerator::A(i, j) => write!(f, "a[{i},{j}]"),
            CoeffGenerator::M(k) => write!(f, "m[{k}]"),
            CoeffGenerator::Named(name, _) => write!(f, "{name}"),
        }
    }
}

/// A canonical monomial: generators with positive powers, sorted by
/// generator order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffMonomial {
    factors: Vec<(CoeffGenerator, u32)>,
}

impl CoeffMonomial {
    /// The empty monomial `1`.
    pub fn unit() -> Self {
        CoeffMonomial {
            factors: Vec::new(),
        }
    }

    pub fn generator(g: CoeffGenerator) -> Self {
        CoeffMonomial {
            factors: vec![(g, 1)],
        }
    }

    /// Build from arbitrary factor pairs; merges duplicates and drops zero
    /// powers.
    pub fn from_factors(pairs: impl IntoIterator<Item = (CoeffGenerator, u32)>) -> Self {
        let mut map: BTreeMap<CoeffGenerator, u32> = BTreeMap::new();
        for (g, p) in pairs {
            if p > 0 {
                *map.entry(g).or_insert(0) += p;
            }
        }
        CoeffMonomial {
            factors: map.into_iter().collect(),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(CoeffGenerator, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> i64 {
        self.factors
            .iter()
            .map(|(g, p)| g.degree() * *p as i64)
            .sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_factors(self.factors.iter().chain(other.factors.iter()).cloned())
    }

    /// Pure lexicographic comparison over the merged generator sequence:
    /// at the first generator (in ascending generator order) where the
    /// powers differ, the monomial with the larger power is the greater.
    fn lex_cmp(&self, other: &Self) -> Ordering {
        let mut i = 0;
        let mut j = 0;
        loop {
            match (self.factors.get(i), other.factors.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((ga, pa)), Some((gb, pb))) => match ga.cmp(gb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match pa.cmp(pb) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

/// Graded-lexicographic order: smaller absolute degree first, then
/// lexicographically descending. Map iteration therefore matches the
/// canonical printed order.
impl Ord for CoeffMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .abs()
            .cmp(&other.degree().abs())
            .then_with(|| other.lex_cmp(self))
    }
}

impl PartialOrd for CoeffMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CoeffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(g, p)| {
                if *p == 1 {
                    g.to_string()
                } else {
                    format!("{g}^{p}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Homogeneity classification of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    /// The zero polynomial; no degree is defined.
    Undefined,
    /// All terms share this degree (0 for nonzero constants).
    Degree(i64),
    /// Terms of differing degrees.
    Mixed,
}

/// Sparse polynomial over the coefficient generators with arbitrary-precision
/// integer coefficients and a degree truncation bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffPoly {
    terms: BTreeMap<CoeffMonomial, BigInt>,
    bound: u32,
}

impl CoeffPoly {
    pub fn zero(bound: u32) -> Self {
        assert!(bound >= 1, "coefficient bound must be positive");
        CoeffPoly {
            terms: BTreeMap::new(),
            bound,
        }
    }

    pub fn one(bound: u32) -> Self {
        Self::constant(BigInt::one(), bound)
    }

    pub fn constant(c: impl Into<BigInt>, bound: u32) -> Self {
        let mut p = Self::zero(bound);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(CoeffMonomial::unit(), c);
        }
        p
    }

    pub fn generator(g: CoeffGenerator, bound: u32) -> Self {
        Self::from_terms([(CoeffMonomial::generator(g), BigInt::one())], bound)
    }

    /// Build from term pairs, accumulating duplicates and applying the bound.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (CoeffMonomial, BigInt)>,
        bound: u32,
    ) -> Self {
        let mut p = Self::zero(bound);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: CoeffMonomial, c: BigInt) {
        if c.is_zero() || m.degree().unsigned_abs() > self.bound as u64 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// Re-truncate to a (usually smaller) bound.
    pub fn with_bound(&self, bound: u32) -> Self {
        Self::from_terms(
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())),
            bound,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CoeffMonomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The integer value if the polynomial is constant (including zero).
    pub fn as_constant(&self) -> Option<BigInt> {
        if self.terms.is_empty() {
            return Some(BigInt::zero());
        }
        if self.terms.len() == 1 {
            if let Some((m, c)) = self.terms.iter().next() {
                if m.is_unit() {
                    return Some(c.clone());
                }
            }
        }
        None
    }

    /// The coefficient of the empty monomial.
    pub fn constant_part(&self) -> BigInt {
        self.terms
            .get(&CoeffMonomial::unit())
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = Self::zero(bound);
        for (m, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.bound);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = Self::zero(bound);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.bound);
        }
        let mut out = Self::zero(self.bound);
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut out = Self::one(self.bound);
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// Common degree of all terms, `Mixed` if they disagree, `Undefined` for
    /// the zero polynomial. Nonzero constants have degree 0.
    pub fn degree_of(&self) -> Homogeneity {
        let mut found: Option<i64> = None;
        for m in self.terms.keys() {
            let d = m.degree();
            match found {
                None => found = Some(d),
                Some(prev) if prev != d => return Homogeneity::Mixed,
                _ => {}
            }
        }
        match found {
            None => Homogeneity::Undefined,
            Some(d) => Homogeneity::Degree(d),
        }
    }

    /// Ring-homomorphism evaluation: replaces every generator by its image.
    ///
    /// `images` returns `None` for unassigned generators, which is an error.
    /// With `check_grading` every image must be homogeneous of the
    /// generator's degree (the zero image is always allowed).
    pub fn apply_hom(
        &self,
        images: &dyn Fn(&CoeffGenerator) -> Option<CoeffPoly>,
        check_grading: bool,
    ) -> Result<CoeffPoly> {
        let mut bound = self.bound;
        let mut resolved: BTreeMap<CoeffGenerator, CoeffPoly> = BTreeMap::new();
        for m in self.terms.keys() {
            for (g, _) in m.factors() {
                if resolved.contains_key(g) {
                    continue;
                }
                let img = images(g).ok_or_else(|| Error::MissingImage(g.clone()))?;
                if check_grading {
                    match img.degree_of() {
                        Homogeneity::Undefined => {}
                        Homogeneity::Degree(d) if d == g.degree() => {}
                        found => {
                            return Err(Error::DegreeMismatch {
                                generator: g.clone(),
                                expected: g.degree(),
                                found,
                            })
                        }
                    }
                }
                bound = bound.min(img.bound);
                resolved.insert(g.clone(), img);
            }
        }
        let mut out = CoeffPoly::zero(bound);
        for (m, c) in &self.terms {
            let mut term = CoeffPoly::constant(c.clone(), bound);
            for (g, p) in m.factors() {
                term = term.mul(&resolved[g].pow(*p));
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Canonical text form. `a[1,1]^2 - 8*a[1,2]` style: terms in
    /// graded-lexicographic order, unit coefficients elided.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if m.is_unit() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&m.to_string());
            } else {
                out.push_str(&format!("{mag}*{m}"));
            }
        }
        out
    }

    /// Parse the canonical text form produced by [`CoeffPoly::to_text`].
    pub fn parse_text(input: &str, bound: u32) -> Result<CoeffPoly> {
        let input = input.trim();
        if input == "0" {
            return Ok(CoeffPoly::zero(bound));
        }
        let mut out = CoeffPoly::zero(bound);
        for (sign, chunk) in split_signed_terms(input)? {
            let (m, c) = parse_term(chunk)?;
            out.add_term(m, if sign { -c } else { c });
        }
        Ok(out)
    }

    /// JSON form: array of `{monomial, coeff}` objects in canonical order,
    /// coefficients as decimal strings.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mono: Vec<Value> = m
                    .factors()
                    .iter()
                    .map(|(g, p)| match g {
                        CoeffGenerator::A(i, j) => json!(["a", i, j, p]),
                        CoeffGenerator::M(k) => json!(["m", k, p]),
                        CoeffGenerator::Named(n, d) => json!(["g", n, d, p]),
                    })
                    .collect();
                json!({ "monomial": mono, "coeff": c.to_string() })
            })
            .collect();
        Value::Array(terms)
    }

    pub fn from_json(v: &Value, bound: u32) -> Result<CoeffPoly> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("coefficient polynomial must be an array".into()))?;
        let mut out = CoeffPoly::zero(bound);
        for t in arr {
            let coeff = t
                .get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("term missing coeff string".into()))?;
            let c: BigInt = coeff
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer {coeff}")))?;
            let mono = t
                .get("monomial")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term missing monomial array".into()))?;
            let mut factors = Vec::new();
            for fac in mono {
                let fac = fac
                    .as_array()
                    .ok_or_else(|| Error::Parse("monomial factor must be an array".into()))?;
                let tag = fac
                    .first()
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Parse("factor missing tag".into()))?;
                let num = |i: usize| -> Result<u64> {
                    fac.get(i)
                        .and_then(Value::as_u64)
                        .ok_or_else(|| Error::Parse("factor index must be an integer".into()))
                };
                let g = match tag {
                    "a" => CoeffGenerator::a(num(1)? as u32, num(2)? as u32),
                    "m" => CoeffGenerator::m(num(1)? as u32),
                    "g" => {
                        let name = fac
                            .get(1)
                            .and_then(Value::as_str)
                            .ok_or_else(|| Error::Parse("named factor missing name".into()))?;
                        let deg = fac
                            .get(2)
                            .and_then(Value::as_i64)
                            .ok_or_else(|| Error::Parse("named factor missing degree".into()))?;
                        CoeffGenerator::named(name, deg)
                    }
                    other => return Err(Error::Parse(format!("unknown factor tag {other}"))),
                };
                let p = match tag {
                    "g" => num(3)?,
                    "a" => num(3)?,
                    _ => num(2)?,
                } as u32;
                factors.push((g, p));
            }
            out.add_term(CoeffMonomial::from_factors(factors), c);
        }
        Ok(out)
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Split `a - b + c` into `(sign, chunk)` pairs at top level.
fn split_signed_terms(input: &str) -> Result<Vec<(bool, &str)>> {
    let mut parts = Vec::new();
    let bytes = input.as_bytes();
    let mut start = 0;
    let mut sign = false;
    if bytes.first() == Some(&b'-') {
        sign = true;
        start = 1;
    }
    let mut i = start;
    while i < bytes.len() {
        if bytes[i] == b' '
            && i + 2 < bytes.len()
            && (bytes[i + 1] == b'+' || bytes[i + 1] == b'-')
            && bytes[i + 2] == b' '
        {
            parts.push((sign, input[start..i].trim()));
            sign = bytes[i + 1] == b'-';
            start = i + 3;
            i = start;
        } else {
            i += 1;
        }
    }
    if start >= input.len() {
        return Err(Error::Parse("dangling sign".into()));
    }
    parts.push((sign, input[start..].trim()));
    Ok(parts)
}

/// Parse one `coeff*gen^p*...` chunk.
fn parse_term(chunk: &str) -> Result<(CoeffMonomial, BigInt)> {
    let mut coeff = BigInt::one();
    let mut factors = Vec::new();
    for factor in chunk.split('*') {
        let factor = factor.trim();
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in {chunk}")));
        }
        if factor.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            let c: BigInt = factor
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer {factor}")))?;
            coeff *= c;
            continue;
        }
        let (base, power) = match factor.split_once('^') {
            Some((b, p)) => (
                b,
                p.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad power in {factor}")))?,
            ),
            None => (factor, 1),
        };
        let g = parse_generator(base)?;
        factors.push((g, power));
    }
    Ok((CoeffMonomial::from_factors(factors), coeff))
}

fn parse_generator(base: &str) -> Result<CoeffGenerator> {
    if let Some(rest) = base.strip_prefix("a[") {
        let inner = rest
            .strip_suffix(']')
            .ok_or_else(|| Error::Parse(format!("unterminated generator {base}")))?;
        let (i, j) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("a generator needs two indices: {base}")))?;
        let i: u32 = i.trim().parse().map_err(|_| Error::Parse(base.into()))?;
        let j: u32 = j.trim().parse().map_err(|_| Error::Parse(base.into()))?;
        return Ok(CoeffGenerator::a(i, j));
    }
    if let Some(rest) = base.strip_prefix("m[") {
        let inner = rest
            .strip_suffix(']')
            .ok_or_else(|| Error::Parse(format!("unterminated generator {base}")))?;
        let k: u32 = inner
            .trim()
            .parse()
            .map_err(|_| Error::Parse(base.into()))?;
        return Ok(CoeffGenerator::m(k));
    }
    // bare symbol: degree -1 by convention of the multiplicative parameter
    if base.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Ok(CoeffGenerator::named(base, -1));
    }
    Err(Error::Parse(format!("unknown generator {base}")))
}
