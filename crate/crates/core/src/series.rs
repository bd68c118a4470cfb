//! Truncated multivariate power series over [`CoeffPoly`] coefficients.
//!
//! A series lives in an ordered list of weighted variables and stores sparse
//! terms keyed by exponent vector. Two truncation bounds apply: `var_bound`
//! caps the weighted total degree in the variables, `coeff_bound` caps the
//! absolute degree of every coefficient polynomial. Truncation discards;
//! mixed-bound arithmetic takes the minimum bound on each side.

use crate::coeff::CoeffPoly;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A series variable: a name together with a positive weight (the
/// cohomological degree it contributes per exponent).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeriesVar {
    name: String,
    weight: u32,
}

impl SeriesVar {
    pub fn new(name: &str, weight: u32) -> Self {
        assert!(weight >= 1, "variable weight must be positive");
        assert!(!name.is_empty(), "variable name must be nonempty");
        SeriesVar {
            name: name.to_string(),
            weight,
        }
    }

    /// Weight-1 variable.
    pub fn w1(name: &str) -> Self {
        Self::new(name, 1)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }
}

impl fmt::Display for SeriesVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Sparse truncated power series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    vars: Vec<SeriesVar>,
    terms: BTreeMap<Vec<u32>, CoeffPoly>,
    var_bound: u32,
    coeff_bound: u32,
}

fn weighted_degree(vars: &[SeriesVar], exps: &[u32]) -> u32 {
    exps.iter().zip(vars).map(|(e, v)| e * v.weight).sum()
}

/// Canonical term order: weighted degree ascending, then exponent vectors
/// lexicographically descending.
fn term_cmp(vars: &[SeriesVar], a: &[u32], b: &[u32]) -> Ordering {
    weighted_degree(vars, a)
        .cmp(&weighted_degree(vars, b))
        .then_with(|| b.cmp(a))
}

impl TruncatedSeries {
    /// The zero series over an explicit variable universe.
    pub fn zero_over(vars: Vec<SeriesVar>, var_bound: u32, coeff_bound: u32) -> Self {
        Self::from_terms(vars, var_bound, coeff_bound, [])
    }

    /// The zero series with no variables.
    pub fn zero(var_bound: u32, coeff_bound: u32) -> Self {
        Self::zero_over(Vec::new(), var_bound, coeff_bound)
    }

    /// A constant series (no variables).
    pub fn constant(c: CoeffPoly, var_bound: u32) -> Self {
        let coeff_bound = c.bound();
        Self::from_terms(Vec::new(), var_bound, coeff_bound, [(vec![], c)])
    }

    pub fn integer(n: impl Into<BigInt>, var_bound: u32, coeff_bound: u32) -> Self {
        Self::constant(CoeffPoly::constant(n, coeff_bound), var_bound)
    }

    /// The series consisting of a single variable.
    pub fn variable(v: SeriesVar, var_bound: u32, coeff_bound: u32) -> Self {
        let one = CoeffPoly::one(coeff_bound);
        Self::from_terms(vec![v], var_bound, coeff_bound, [(vec![1], one)])
    }

    /// Build from raw terms aligned with `vars` (any order, deduplicated and
    /// truncated here). Variable names must be unique.
    pub fn from_terms(
        vars: Vec<SeriesVar>,
        var_bound: u32,
        coeff_bound: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, CoeffPoly)>,
    ) -> Self {
        assert!(var_bound >= 1, "variable bound must be positive");
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by(|&a, &b| vars[a].cmp(&vars[b]));
        let sorted: Vec<SeriesVar> = order.iter().map(|&i| vars[i].clone()).collect();
        for w in sorted.windows(2) {
            assert!(
                w[0].name != w[1].name,
                "duplicate variable name {}",
                w[0].name
            );
        }
        let mut out = TruncatedSeries {
            vars: sorted,
            terms: BTreeMap::new(),
            var_bound,
            coeff_bound,
        };
        for (exps, cp) in terms {
            assert_eq!(exps.len(), vars.len(), "exponent arity mismatch");
            let remapped: Vec<u32> = order.iter().map(|&i| exps[i]).collect();
            out.add_term(remapped, cp);
        }
        out
    }

    fn add_term(&mut self, exps: Vec<u32>, cp: CoeffPoly) {
        if weighted_degree(&self.vars, &exps) > self.var_bound {
            return;
        }
        let cp = cp.with_bound(self.coeff_bound);
        if cp.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&cp);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(cp);
            }
        }
    }

    pub fn vars(&self) -> &[SeriesVar] {
        &self.vars
    }

    pub fn var_bound(&self) -> u32 {
        self.var_bound
    }

    pub fn coeff_bound(&self) -> u32 {
        self.coeff_bound
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms_iter(&self) -> impl Iterator<Item = (&Vec<u32>, &CoeffPoly)> {
        self.terms.iter()
    }

    /// Terms in the canonical (degree, lex-descending) order.
    pub fn ordered_terms(&self) -> Vec<(Vec<u32>, CoeffPoly)> {
        let mut v: Vec<(Vec<u32>, CoeffPoly)> = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        v.sort_by(|a, b| term_cmp(&self.vars, &a.0, &b.0));
        v
    }

    /// The canonically lowest term, if any.
    pub fn min_term(&self) -> Option<(Vec<u32>, CoeffPoly)> {
        self.terms
            .iter()
            .min_by(|a, b| term_cmp(&self.vars, a.0, b.0))
            .map(|(e, c)| (e.clone(), c.clone()))
    }

    pub fn min_weighted_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| weighted_degree(&self.vars, e))
            .min()
    }

    pub fn constant_term(&self) -> CoeffPoly {
        let key = vec![0u32; self.vars.len()];
        self.terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| CoeffPoly::zero(self.coeff_bound))
    }

    pub fn has_zero_constant_term(&self) -> bool {
        self.constant_term().is_zero()
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Coefficient polynomial at the given exponents, addressed by name.
    /// Unnamed variables are taken to have exponent zero.
    pub fn coeff_at(&self, exps_by_name: &[(&str, u32)]) -> CoeffPoly {
        let mut key = vec![0u32; self.vars.len()];
        for (name, e) in exps_by_name {
            match self.var_index(name) {
                Some(i) => key[i] = *e,
                None if *e == 0 => {}
                None => return CoeffPoly::zero(self.coeff_bound),
            }
        }
        self.terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| CoeffPoly::zero(self.coeff_bound))
    }

    /// Re-truncate to a smaller variable bound.
    pub fn truncated(&self, var_bound: u32) -> Self {
        Self::from_terms(
            self.vars.clone(),
            var_bound,
            self.coeff_bound,
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    /// Change the variable bound in either direction. Raising the bound is
    /// only meaningful when the stored terms are exact (a polynomial rather
    /// than a truncation); the caller owns that judgement.
    pub fn with_var_bound(&self, var_bound: u32) -> Self {
        Self::from_terms(
            self.vars.clone(),
            var_bound,
            self.coeff_bound,
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    /// Re-truncate all coefficients to a smaller coefficient bound.
    pub fn with_coeff_bound(&self, coeff_bound: u32) -> Self {
        Self::from_terms(
            self.vars.clone(),
            self.var_bound,
            coeff_bound,
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    /// Embed into a superset variable universe.
    pub fn embedded(&self, vars: &[SeriesVar]) -> Self {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|u| u.name == v.name)
                    .unwrap_or_else(|| panic!("variable {} missing from target universe", v.name))
            })
            .collect();
        for (v, &j) in self.vars.iter().zip(&map) {
            assert_eq!(
                v.weight, vars[j].weight,
                "variable {} used with conflicting weights",
                v.name
            );
        }
        Self::from_terms(
            vars.to_vec(),
            self.var_bound,
            self.coeff_bound,
            self.terms.iter().map(|(e, c)| {
                let mut exps = vec![0u32; vars.len()];
                for (i, &j) in map.iter().enumerate() {
                    exps[j] = e[i];
                }
                (exps, c.clone())
            }),
        )
    }

    /// Drop variables that occur in no term.
    pub fn pruned(&self) -> Self {
        let used: Vec<usize> = (0..self.vars.len())
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect();
        Self::from_terms(
            used.iter().map(|&i| self.vars[i].clone()).collect(),
            self.var_bound,
            self.coeff_bound,
            self.terms
                .iter()
                .map(|(e, c)| (used.iter().map(|&i| e[i]).collect(), c.clone())),
        )
    }

    /// Structural equality after pruning unused variables on both sides.
    pub fn equivalent(&self, other: &Self) -> bool {
        let a = self.pruned();
        let b = other.pruned();
        a.vars == b.vars && a.terms == b.terms
    }

    fn unified_universe(parts: &[&TruncatedSeries]) -> Vec<SeriesVar> {
        let mut set: BTreeSet<SeriesVar> = BTreeSet::new();
        for p in parts {
            for v in &p.vars {
                if let Some(existing) = set.iter().find(|u| u.name == v.name) {
                    assert_eq!(
                        existing.weight, v.weight,
                        "variable {} used with conflicting weights",
                        v.name
                    );
                } else {
                    set.insert(v.clone());
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let vars = Self::unified_universe(&[self, other]);
        let a = self.embedded(&vars);
        let b = other.embedded(&vars);
        let mut out = TruncatedSeries {
            vars,
            terms: a.terms,
            var_bound: self.var_bound.min(other.var_bound),
            coeff_bound: self.coeff_bound.min(other.coeff_bound),
        };
        out.terms
            .retain(|e, _| weighted_degree(&out.vars, e) <= out.var_bound);
        let keys: Vec<Vec<u32>> = out.terms.keys().cloned().collect();
        for k in keys {
            let c = out.terms.remove(&k).unwrap().with_bound(out.coeff_bound);
            if !c.is_zero() {
                out.terms.insert(k, c);
            }
        }
        for (e, c) in b.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiply every coefficient by a polynomial.
    pub fn scale(&self, cp: &CoeffPoly) -> Self {
        let coeff_bound = self.coeff_bound.min(cp.bound());
        Self::from_terms(
            self.vars.clone(),
            self.var_bound,
            coeff_bound,
            self.terms.iter().map(|(e, c)| (e.clone(), c.mul(cp))),
        )
    }

    pub fn scale_int(&self, n: impl Into<BigInt>) -> Self {
        self.scale(&CoeffPoly::constant(n, self.coeff_bound))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let vars = Self::unified_universe(&[self, other]);
        let a = self.embedded(&vars);
        let b = other.embedded(&vars);
        let var_bound = self.var_bound.min(other.var_bound);
        let coeff_bound = self.coeff_bound.min(other.coeff_bound);
        let mut out = TruncatedSeries {
            vars,
            terms: BTreeMap::new(),
            var_bound,
            coeff_bound,
        };
        for (ea, ca) in &a.terms {
            let da = weighted_degree(&out.vars, ea);
            for (eb, cb) in &b.terms {
                if da + weighted_degree(&out.vars, eb) > var_bound {
                    continue;
                }
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(exps, ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut out = TruncatedSeries::from_terms(
            self.vars.clone(),
            self.var_bound,
            self.coeff_bound,
            [(vec![0; self.vars.len()], CoeffPoly::one(self.coeff_bound))],
        );
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// Rename a variable, keeping its weight. No-op if `old` is absent or
    /// equals `new`.
    pub fn rename_var(&self, old: &str, new: &str) -> Self {
        if old == new {
            return self.clone();
        }
        let Some(idx) = self.var_index(old) else {
            return self.clone();
        };
        assert!(
            self.var_index(new).is_none(),
            "rename target {new} already present"
        );
        let mut vars = self.vars.clone();
        vars[idx] = SeriesVar::new(new, vars[idx].weight);
        Self::from_terms(
            vars,
            self.var_bound,
            self.coeff_bound,
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    /// Exchange the exponents of two equal-weight variables.
    pub fn swap_vars(&self, a: &str, b: &str) -> Self {
        let ia = self.var_index(a).expect("swap variable missing");
        let ib = self.var_index(b).expect("swap variable missing");
        assert_eq!(self.vars[ia].weight, self.vars[ib].weight);
        Self::from_terms(
            self.vars.clone(),
            self.var_bound,
            self.coeff_bound,
            self.terms.iter().map(|(e, c)| {
                let mut exps = e.clone();
                exps.swap(ia, ib);
                (exps, c.clone())
            }),
        )
    }

    /// Map every coefficient through a generator homomorphism.
    pub fn apply_hom(
        &self,
        images: &dyn Fn(&crate::coeff::CoeffGenerator) -> Option<CoeffPoly>,
        check_grading: bool,
    ) -> Result<Self> {
        let mut out = TruncatedSeries {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
            var_bound: self.var_bound,
            coeff_bound: self.coeff_bound,
        };
        for (e, c) in &self.terms {
            let img = c.apply_hom(images, check_grading)?;
            out.coeff_bound = out.coeff_bound.min(img.bound());
            out.add_term(e.clone(), img);
        }
        // re-normalize in case the bound shrank after earlier insertions
        let collected: Vec<(Vec<u32>, CoeffPoly)> = out
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Ok(Self::from_terms(
            out.vars,
            out.var_bound,
            out.coeff_bound,
            collected,
        ))
    }

    /// Composition: replace bound variables by series. Bound variables must
    /// have zero constant term; unbound variables pass through.
    pub fn substitute(&self, bindings: &[(SeriesVar, TruncatedSeries)]) -> Result<Self> {
        self.substitute_impl(bindings, false)
    }

    /// Like [`TruncatedSeries::substitute`] but the caller certifies that
    /// replacements with nonzero constant terms contribute only finitely
    /// many terms.
    pub fn substitute_allowing_constants(
        &self,
        bindings: &[(SeriesVar, TruncatedSeries)],
    ) -> Result<Self> {
        self.substitute_impl(bindings, true)
    }

    fn substitute_impl(
        &self,
        bindings: &[(SeriesVar, TruncatedSeries)],
        allow_constants: bool,
    ) -> Result<Self> {
        let mut bound: Vec<Option<&TruncatedSeries>> = vec![None; self.vars.len()];
        for (v, s) in bindings {
            if let Some(i) = self.var_index(&v.name) {
                assert_eq!(
                    v.weight, self.vars[i].weight,
                    "binding weight mismatch for {}",
                    v.name
                );
                bound[i] = Some(s);
            }
        }
        let occurs: Vec<bool> = (0..self.vars.len())
            .map(|i| self.terms.keys().any(|e| e[i] > 0))
            .collect();
        if !allow_constants {
            for (i, b) in bound.iter().enumerate() {
                if let Some(s) = b {
                    if occurs[i] && !s.has_zero_constant_term() {
                        return Err(Error::NonNilpotentSubstitution(self.vars[i].name.clone()));
                    }
                }
            }
        }

        let mut var_bound = self.var_bound;
        let mut coeff_bound = self.coeff_bound;
        let mut universe: Vec<&TruncatedSeries> = Vec::new();
        let mut pass_vars: Vec<SeriesVar> = Vec::new();
        for (i, b) in bound.iter().enumerate() {
            match b {
                Some(s) => {
                    var_bound = var_bound.min(s.var_bound);
                    coeff_bound = coeff_bound.min(s.coeff_bound);
                    universe.push(s);
                }
                None => pass_vars.push(self.vars[i].clone()),
            }
        }
        let pass_series = TruncatedSeries::zero_over(pass_vars, var_bound, coeff_bound);
        universe.push(&pass_series);
        let vars = Self::unified_universe(&universe);

        let mut acc = TruncatedSeries::zero_over(vars.clone(), var_bound, coeff_bound);
        // lazily computed powers of each bound replacement
        let mut powers: BTreeMap<usize, Vec<TruncatedSeries>> = BTreeMap::new();
        for (exps, cp) in &self.terms {
            let mut val = TruncatedSeries::from_terms(
                vars.clone(),
                var_bound,
                coeff_bound,
                [(vec![0; vars.len()], CoeffPoly::one(coeff_bound))],
            );
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match bound[i] {
                    Some(s) => {
                        let cache = powers.entry(i).or_insert_with(|| vec![s.clone()]);
                        while (cache.len() as u32) < e {
                            let next = cache.last().unwrap().mul(s);
                            cache.push(next);
                        }
                        val = val.mul(&cache[(e - 1) as usize]);
                    }
                    None => {
                        let j = vars
                            .iter()
                            .position(|u| u.name == self.vars[i].name)
                            .expect("pass-through variable in universe");
                        let mut mono = vec![0u32; vars.len()];
                        mono[j] = e;
                        let unit = TruncatedSeries::from_terms(
                            vars.clone(),
                            var_bound,
                            coeff_bound,
                            [(mono, CoeffPoly::one(coeff_bound))],
                        );
                        val = val.mul(&unit);
                    }
                }
                if val.is_zero() {
                    break;
                }
            }
            acc = acc.add(&val.scale(cp));
        }
        Ok(acc)
    }

    /// Compositional inverse of a univariate series with zero constant term
    /// and unit linear coefficient: returns `g` with `g(f(t)) = f(g(t)) = t`
    /// up to the variable bound.
    pub fn compositional_inverse(&self) -> Result<Self> {
        if self.vars.len() != 1 {
            return Err(Error::NotInvertible(format!(
                "expected a univariate series, found {} variables",
                self.vars.len()
            )));
        }
        let v = self.vars[0].clone();
        if !self.has_zero_constant_term() {
            return Err(Error::NotInvertible("nonzero constant term".into()));
        }
        let lin = self.coeff_at(&[(v.name(), 1)]);
        let unit = lin
            .as_constant()
            .filter(|c| c.abs().is_one())
            .ok_or_else(|| Error::NotInvertible("linear coefficient must be 1 or -1".into()))?;
        let d = self.var_bound;
        let dc = self.coeff_bound;
        let t = TruncatedSeries::variable(v.clone(), d, dc);
        let mut g = t.scale_int(unit.clone());
        let max_exp = d / v.weight;
        for e in 2..=max_exp {
            let comp = self.substitute(&[(v.clone(), g.clone())])?;
            let ck = comp.coeff_at(&[(v.name(), e)]);
            if ck.is_zero() {
                continue;
            }
            let correction = t.pow(e).scale(&ck.scale(&unit)).neg();
            g = g.add(&correction);
        }
        Ok(g)
    }

    /// Greedy lowest-degree triangular solve: rewrite `self` as a series in
    /// the named target series plus a residual.
    ///
    /// Each target must have zero constant term and a unit (plus or minus
    /// one) coefficient on its canonically lowest term. The result series
    /// lives in fresh variables (one per target, weighted by the target's
    /// lowest weighted degree); substituting the targets back in and adding
    /// the residual reproduces `self` exactly up to the bound. Ties between
    /// matching target-power products are broken by preferring higher powers
    /// of earlier targets.
    pub fn express_in(
        &self,
        targets: &[(&str, &TruncatedSeries)],
    ) -> Result<(TruncatedSeries, TruncatedSeries)> {
        if targets.is_empty() {
            return Err(Error::InvalidTarget("no targets supplied".into()));
        }
        let mut seen = BTreeSet::new();
        for (name, _) in targets {
            if !seen.insert(*name) {
                return Err(Error::InvalidTarget(format!(
                    "duplicate target name {name}"
                )));
            }
        }

        let mut universe_parts: Vec<&TruncatedSeries> = vec![self];
        universe_parts.extend(targets.iter().map(|(_, s)| *s));
        let vars = Self::unified_universe(&universe_parts);
        let var_bound = universe_parts.iter().map(|s| s.var_bound).min().unwrap();
        let coeff_bound = universe_parts.iter().map(|s| s.coeff_bound).min().unwrap();

        struct Target {
            series: TruncatedSeries,
            lead_exps: Vec<u32>,
            lead_deg: u32,
            lead_sign: BigInt,
            powers: Vec<TruncatedSeries>,
        }
        let mut tinfo: Vec<Target> = Vec::new();
        for (name, s) in targets {
            let s = s
                .embedded(&vars)
                .truncated(var_bound)
                .with_coeff_bound(coeff_bound);
            if !s.has_zero_constant_term() {
                return Err(Error::InvalidTarget(format!(
                    "target {name} has a nonzero constant term"
                )));
            }
            let (lead_exps, lead_coeff) = s
                .min_term()
                .ok_or_else(|| Error::InvalidTarget(format!("target {name} is zero")))?;
            let lead_sign = lead_coeff
                .as_constant()
                .filter(|c| c.abs().is_one())
                .ok_or_else(|| {
                    Error::InvalidTarget(format!(
                        "target {name} must have a unit lowest coefficient"
                    ))
                })?;
            let lead_deg = weighted_degree(&vars, &lead_exps);
            tinfo.push(Target {
                powers: vec![s.clone()],
                series: s,
                lead_exps,
                lead_deg,
                lead_sign,
            });
        }

        let new_vars: Vec<SeriesVar> = targets
            .iter()
            .zip(&tinfo)
            .map(|((name, _), t)| SeriesVar::new(name, t.lead_deg))
            .collect();
        let mut result = TruncatedSeries::zero_over(new_vars.clone(), var_bound, coeff_bound);
        let mut residual = TruncatedSeries::zero_over(vars.clone(), var_bound, coeff_bound);
        let mut work = self
            .embedded(&vars)
            .truncated(var_bound)
            .with_coeff_bound(coeff_bound);

        while let Some((exps, coeff)) = work.min_term() {
            let deg = weighted_degree(&vars, &exps);
            let matched = match_target_powers(
                &exps,
                deg,
                &tinfo
                    .iter()
                    .map(|t| (t.lead_exps.clone(), t.lead_deg))
                    .collect::<Vec<_>>(),
            );
            let single = TruncatedSeries::from_terms(
                vars.clone(),
                var_bound,
                coeff_bound,
                [(exps.clone(), coeff.clone())],
            );
            match matched {
                Some(ks) => {
                    let mut sign = BigInt::one();
                    for (t, &k) in tinfo.iter().zip(&ks) {
                        for _ in 0..k {
                            sign *= &t.lead_sign;
                        }
                    }
                    let c = coeff.scale(&sign);
                    let mut prod = TruncatedSeries::from_terms(
                        vars.clone(),
                        var_bound,
                        coeff_bound,
                        [(vec![0; vars.len()], CoeffPoly::one(coeff_bound))],
                    );
                    for (t, &k) in tinfo.iter_mut().zip(&ks) {
                        if k == 0 {
                            continue;
                        }
                        while (t.powers.len() as u32) < k {
                            let next = t.powers.last().unwrap().mul(&t.series);
                            t.powers.push(next);
                        }
                        prod = prod.mul(&t.powers[(k - 1) as usize]);
                    }
                    work = work.sub(&prod.scale(&c));
                    let term = TruncatedSeries::from_terms(
                        new_vars.clone(),
                        var_bound,
                        coeff_bound,
                        [(ks, c)],
                    );
                    result = result.add(&term);
                }
                None => {
                    residual = residual.add(&single);
                    work = work.sub(&single);
                }
            }
        }
        Ok((result, residual))
    }

    /// Evaluate at integer points; every coefficient must be constant.
    pub fn eval_integers(&self, values: &BTreeMap<String, BigInt>) -> Result<BigInt> {
        let mut total = BigInt::zero();
        for (exps, cp) in &self.terms {
            let c = cp.as_constant().ok_or_else(|| {
                Error::InvalidParameters("series has non-constant coefficients".into())
            })?;
            let mut term = c;
            for (v, &e) in self.vars.iter().zip(exps) {
                if e == 0 {
                    continue;
                }
                let x = values.get(&v.name).ok_or_else(|| {
                    Error::InvalidParameters(format!("no value for variable {}", v.name))
                })?;
                term *= x.pow(e);
            }
            total += term;
        }
        Ok(total)
    }

    /// Canonical text form: terms in (degree, lex-descending) order, each as
    /// `coeff*monomial` with unit integer parts elided and multi-term
    /// coefficient polynomials parenthesized.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (exps, cp)) in self.ordered_terms().iter().enumerate() {
            let mono: Vec<String> = self
                .vars
                .iter()
                .zip(exps)
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        v.name.clone()
                    } else {
                        format!("{}^{}", v.name, e)
                    }
                })
                .collect();
            let mono = mono.join("*");
            let (sign_negative, body) = render_series_coeff(cp, &mono);
            if idx == 0 {
                if sign_negative {
                    out.push('-');
                }
            } else {
                out.push_str(if sign_negative { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }

    /// JSON form: variables with weights, bounds, and terms in canonical
    /// order with exponent vectors.
    pub fn to_json(&self) -> Value {
        let vars: Vec<Value> = self
            .vars
            .iter()
            .map(|v| json!({ "name": v.name, "weight": v.weight }))
            .collect();
        let terms: Vec<Value> = self
            .ordered_terms()
            .iter()
            .map(|(e, c)| json!({ "exps": e, "coeff": c.to_json() }))
            .collect();
        json!({
            "vars": vars,
            "var_bound": self.var_bound,
            "coeff_bound": self.coeff_bound,
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let var_bound =
            v.get("var_bound")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("series missing var_bound".into()))? as u32;
        let coeff_bound = v
            .get("coeff_bound")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("series missing coeff_bound".into()))?
            as u32;
        let vars_json = v
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("series missing vars".into()))?;
        let mut vars = Vec::new();
        for vj in vars_json {
            let name = vj
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("variable missing name".into()))?;
            let weight = vj
                .get("weight")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("variable missing weight".into()))?;
            vars.push(SeriesVar::new(name, weight as u32));
        }
        let terms_json = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("series missing terms".into()))?;
        let mut terms = Vec::new();
        for tj in terms_json {
            let exps_json = tj
                .get("exps")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term missing exps".into()))?;
            let exps: Vec<u32> = exps_json
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|n| n as u32)
                        .ok_or_else(|| Error::Parse("bad exponent".into()))
                })
                .collect::<Result<_>>()?;
            let coeff = tj
                .get("coeff")
                .ok_or_else(|| Error::Parse("term missing coeff".into()))?;
            terms.push((exps, CoeffPoly::from_json(coeff, coeff_bound)?));
        }
        Ok(Self::from_terms(vars, var_bound, coeff_bound, terms))
    }
}

/// Render one series term given its variable-monomial string; returns the
/// sign to pull into the separator plus the body text.
fn render_series_coeff(cp: &CoeffPoly, mono: &str) -> (bool, String) {
    if cp.num_terms() == 1 {
        let (cm, c) = cp.terms().next().expect("nonzero");
        let neg = c.is_negative();
        let mag = c.abs();
        let mut pieces: Vec<String> = Vec::new();
        if !mag.is_one() {
            pieces.push(mag.to_string());
        }
        if !cm.is_unit() {
            pieces.push(cm.to_string());
        }
        if !mono.is_empty() {
            pieces.push(mono.to_string());
        }
        if pieces.is_empty() {
            pieces.push("1".to_string());
        }
        (neg, pieces.join("*"))
    } else {
        let inner = format!("({})", cp.to_text());
        if mono.is_empty() {
            (false, inner)
        } else {
            (false, format!("{inner}*{mono}"))
        }
    }
}

/// Find exponents `ks` with `sum ks[i]*lead_deg[i] == deg` whose product of
/// leading monomials equals `exps`. Searches higher powers of earlier
/// targets first.
fn match_target_powers(exps: &[u32], deg: u32, leads: &[(Vec<u32>, u32)]) -> Option<Vec<u32>> {
    fn rec(
        idx: usize,
        remaining: u32,
        acc: &mut Vec<u32>,
        exps: &[u32],
        leads: &[(Vec<u32>, u32)],
    ) -> bool {
        if idx == leads.len() {
            if remaining != 0 {
                return false;
            }
            let mut sum = vec![0u32; exps.len()];
            for (k, (lead, _)) in acc.iter().zip(leads) {
                for (s, l) in sum.iter_mut().zip(lead) {
                    *s += k * l;
                }
            }
            return sum == exps;
        }
        let d = leads[idx].1;
        let max = remaining / d;
        for k in (0..=max).rev() {
            acc.push(k);
            if rec(idx + 1, remaining - k * d, acc, exps, leads) {
                return true;
            }
            acc.pop();
        }
        false
    }
    let mut acc = Vec::new();
    if rec(0, deg, &mut acc, exps, leads) {
        Some(acc)
    } else {
        None
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffGenerator;

    const D: u32 = 6;
    const DC: u32 = 6;

    fn x() -> SeriesVar {
        SeriesVar::w1("x")
    }

    fn xs() -> TruncatedSeries {
        TruncatedSeries::variable(x(), D, DC)
    }

    fn gen(g: CoeffGenerator) -> CoeffPoly {
        CoeffPoly::generator(g, DC)
    }

    #[test]
    fn monomial_substitution() {
        // f = x + a11*x^2, x -> x^2 gives x^2 + a11*x^4
        let a11 = gen(CoeffGenerator::a(1, 1));
        let f = xs().add(&xs().pow(2).scale(&a11));
        let out = f.substitute(&[(x(), xs().pow(2))]).unwrap();
        assert_eq!(out.to_text(), "x^2 + a[1,1]*x^4");
    }

    #[test]
    fn substitution_renames_variables() {
        let y = SeriesVar::w1("y");
        let f = xs().add(&TruncatedSeries::variable(y.clone(), D, DC));
        let m = TruncatedSeries::variable(SeriesVar::w1("m"), D, DC);
        let n = TruncatedSeries::variable(SeriesVar::w1("n"), D, DC);
        let out = f.substitute(&[(x(), m), (y, n)]).unwrap();
        assert_eq!(out.to_text(), "m + n");
    }

    #[test]
    fn identity_substitution_is_identity() {
        let a11 = gen(CoeffGenerator::a(1, 1));
        let f = xs().add(&xs().pow(3).scale(&a11));
        let out = f.substitute(&[(x(), xs())]).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn nonnilpotent_substitution_is_rejected() {
        let f = xs().pow(2);
        let bad = xs().add(&TruncatedSeries::integer(1, D, DC));
        let err = f.substitute(&[(x(), bad.clone())]).unwrap_err();
        assert_eq!(err.kind(), "non-nilpotent-substitution");
        assert!(f.substitute_allowing_constants(&[(x(), bad)]).is_ok());
    }

    #[test]
    fn inverse_of_identity() {
        let g = xs().compositional_inverse().unwrap();
        assert_eq!(g, xs());
    }

    #[test]
    fn inverse_with_log_coefficients() {
        // t + m1 t^2 + m2 t^3 inverts to t - m1 t^2 + (2 m1^2 - m2) t^3,
        // checked against the back-substitution oracle below.
        let t = SeriesVar::w1("t");
        let ts = TruncatedSeries::variable(t.clone(), 3, DC);
        let m1 = gen(CoeffGenerator::m(1));
        let m2 = gen(CoeffGenerator::m(2));
        let f = ts.add(&ts.pow(2).scale(&m1)).add(&ts.pow(3).scale(&m2));
        let g = f.compositional_inverse().unwrap();
        assert_eq!(g.to_text(), "t - m[1]*t^2 + (2*m[1]^2 - m[2])*t^3");
        let back = f.substitute(&[(t.clone(), g.clone())]).unwrap();
        assert_eq!(back, ts);
        let fwd = g.substitute(&[(t, f)]).unwrap();
        assert_eq!(fwd, ts);
    }

    #[test]
    fn inverse_integer_catalan_signs() {
        let t = SeriesVar::w1("t");
        let ts = TruncatedSeries::variable(t.clone(), 4, DC);
        let f = ts.add(&ts.pow(2));
        let g = f.compositional_inverse().unwrap();
        assert_eq!(g.to_text(), "t - t^2 + 2*t^3 - 5*t^4");
        assert_eq!(f.substitute(&[(t, g.clone())]).unwrap(), ts);
    }

    #[test]
    fn inverse_requires_unit_linear_coefficient() {
        let f = xs().scale_int(2);
        assert_eq!(
            f.compositional_inverse().unwrap_err().kind(),
            "not-invertible"
        );
    }

    #[test]
    fn express_zero() {
        let z = TruncatedSeries::zero_over(vec![x()], D, DC);
        let p = xs().pow(2).neg();
        let (result, residual) = z.express_in(&[("u", &p)]).unwrap();
        assert!(result.is_zero());
        assert!(residual.is_zero());
    }

    #[test]
    fn express_inverse_sum_in_product() {
        // s = a11 x^2 - a11^2 x^3 and p = -x^2 + a11 x^3 at bound 3
        // satisfy s = -a11 * p with zero residual.
        let a11 = gen(CoeffGenerator::a(1, 1));
        let x3 = TruncatedSeries::variable(x(), 3, DC);
        let s = x3.pow(2).scale(&a11).sub(&x3.pow(3).scale(&a11.pow(2)));
        let p = x3.pow(2).neg().add(&x3.pow(3).scale(&a11));
        let (result, residual) = s.express_in(&[("u", &p)]).unwrap();
        assert!(residual.is_zero());
        assert_eq!(result.to_text(), "-a[1,1]*u");
        // round trip
        let u = SeriesVar::new("u", 2);
        let back = result.substitute(&[(u, p)]).unwrap();
        assert!(back.equivalent(&s));
    }

    #[test]
    fn express_reports_unmatchable_terms_as_residual() {
        // x^3 cannot be written in powers of a target with lowest degree 2.
        let p = xs().pow(2).neg();
        let g = xs().pow(3);
        let (result, residual) = g.express_in(&[("u", &p)]).unwrap();
        assert!(result.is_zero());
        assert_eq!(residual, g);
    }

    #[test]
    fn canonical_order_is_graded_lex_descending() {
        let y = SeriesVar::w1("y");
        let ys = TruncatedSeries::variable(y, D, DC);
        let f = ys.pow(2).add(&xs().mul(&ys)).add(&xs().pow(2));
        assert_eq!(f.to_text(), "x^2 + x*y + y^2");
    }

    #[test]
    fn weighted_variables_truncate_by_weight() {
        let z = SeriesVar::new("z", 2);
        let zs = TruncatedSeries::variable(z, 5, DC);
        assert!(zs.pow(3).is_zero()); // weight 6 > 5
        assert_eq!(zs.pow(2).to_text(), "z^2");
    }

    #[test]
    fn json_round_trip() {
        let a11 = gen(CoeffGenerator::a(1, 1));
        let f = xs().add(&xs().pow(2).scale(&a11)).scale_int(3);
        let v = f.to_json();
        let g = TruncatedSeries::from_json(&v).unwrap();
        assert_eq!(f, g);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_series(vars: Vec<SeriesVar>, d: u32) -> impl Strategy<Value = TruncatedSeries> {
            let n = vars.len();
            prop::collection::vec((prop::collection::vec(0u32..=3, n), -5i64..=5), 0..=4).prop_map(
                move |raw| {
                    TruncatedSeries::from_terms(
                        vars.clone(),
                        d,
                        DC,
                        raw.into_iter()
                            .map(|(e, c)| (e, CoeffPoly::constant(c, DC))),
                    )
                },
            )
        }

        fn arb_nilpotent_univariate(d: u32) -> impl Strategy<Value = TruncatedSeries> {
            prop::collection::vec(-4i64..=4, 2..=4).prop_map(move |cs| {
                let t = TruncatedSeries::variable(SeriesVar::w1("t"), d, DC);
                let mut f = t.clone();
                for (i, c) in cs.into_iter().enumerate() {
                    f = f.add(&t.pow(i as u32 + 2).scale_int(c));
                }
                f
            })
        }

        proptest! {
            #[test]
            fn inverse_is_an_involution(f in arb_nilpotent_univariate(6)) {
                let g = f.compositional_inverse().unwrap();
                let h = g.compositional_inverse().unwrap();
                prop_assert_eq!(h, f);
            }

            #[test]
            fn substitution_is_associative(
                f in arb_series(vec![SeriesVar::w1("x")], 6),
                g in arb_nilpotent_univariate(6),
                h in arb_nilpotent_univariate(6),
            ) {
                let x = SeriesVar::w1("x");
                let t = SeriesVar::w1("t");
                let g = g.rename_var("t", "x");
                let fg = f.substitute(&[(x.clone(), g.clone())]).unwrap();
                let lhs = fg.substitute(&[(x.clone(), h.clone().rename_var("t", "x"))]).unwrap();
                let gh = g.substitute(&[(x.clone(), h.rename_var("t", "x"))]).unwrap();
                let rhs = f.substitute(&[(x, gh)]).unwrap();
                prop_assert!(lhs.equivalent(&rhs));
                let _ = t;
            }

            #[test]
            fn truncation_coherence(
                f in arb_series(vec![SeriesVar::w1("x"), SeriesVar::w1("y")], 6),
                g in arb_nilpotent_univariate(6),
                dprime in 1u32..=5,
            ) {
                // computing at bound 6 then truncating equals computing at
                // the lower bound directly
                let x = SeriesVar::w1("x");
                let g = g.rename_var("t", "x");
                let full = f.substitute(&[(x.clone(), g.clone())]).unwrap();
                let low = f
                    .truncated(dprime)
                    .substitute(&[(x, g.truncated(dprime))])
                    .unwrap();
                prop_assert_eq!(full.truncated(dprime).pruned(), low.truncated(dprime).pruned());
            }

            #[test]
            fn express_round_trip(
                g in arb_series(vec![SeriesVar::w1("x")], 8),
                d in 2u32..=8,
            ) {
                let g = g.truncated(d);
                let x = TruncatedSeries::variable(SeriesVar::w1("x"), d, DC);
                let target = x.pow(2).neg().add(&x.pow(3));
                let (result, residual) = g.express_in(&[("u", &target)]).unwrap();
                let u = SeriesVar::new("u", 2);
                let back = result
                    .substitute(&[(u, target)])
                    .unwrap()
                    .add(&residual);
                prop_assert!(back.equivalent(&g));
            }
        }
    }
}
