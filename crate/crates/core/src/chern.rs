//! Splitting-principle Chern class calculus.
//!
//! Bundles are syntax trees over line bundles; a rank-n expression has n
//! formal roots, each a truncated series. Tensor products combine roots
//! under the model's formal sum, duals apply the inverse series, and Chern
//! classes are elementary symmetric polynomials in the roots. On top of
//! that sit the symmetric-basis rewrite and the derived power series: the
//! one-variable elimination `x + [-1](x) = P(x*[-1](x))`, its
//! two-variable analogue with targets `(d2, d4)`, and dual Chern classes.

use crate::coeff::CoeffPoly;
use crate::fgl::FGLModel;
use crate::series::{SeriesVar, TruncatedSeries};
use crate::{Error, Result};
use std::fmt;

/// Syntax tree for a virtual bundle built from line bundles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundleExpression {
    /// A line bundle with the named first Chern root.
    Line(SeriesVar),
    Sum(Vec<BundleExpression>),
    Tensor(Vec<BundleExpression>),
    Dual(Box<BundleExpression>),
    /// A trivial bundle of the given rank; all roots are zero.
    Trivial(u32),
}

impl BundleExpression {
    pub fn line(name: &str) -> Self {
        BundleExpression::Line(SeriesVar::w1(name))
    }

    pub fn rank(&self) -> u32 {
        match self {
            BundleExpression::Line(_) => 1,
            BundleExpression::Sum(parts) => parts.iter().map(|p| p.rank()).sum(),
            BundleExpression::Tensor(parts) => parts.iter().map(|p| p.rank()).product(),
            BundleExpression::Dual(inner) => inner.rank(),
            BundleExpression::Trivial(r) => *r,
        }
    }

    /// Parse the text grammar `L(x)`, `e1 + e2`, `e1 * e2`, `dual(e)`,
    /// `1^r`, with parentheses.
    pub fn parse(input: &str) -> Result<Self> {
        let mut p = BundleParser {
            input: input.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.input.len() {
            return Err(Error::Parse(format!(
                "trailing input at byte {} of {input:?}",
                p.pos
            )));
        }
        Ok(e)
    }
}

impl fmt::Display for BundleExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleExpression::Line(v) => write!(f, "L({v})"),
            BundleExpression::Sum(parts) => {
                let texts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", texts.join(" + "))
            }
            BundleExpression::Tensor(parts) => {
                let texts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", texts.join(" * "))
            }
            BundleExpression::Dual(inner) => write!(f, "dual({inner})"),
            BundleExpression::Trivial(r) => write!(f, "1^{r}"),
        }
    }
}

struct BundleParser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> BundleParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.pos < self.input.len() && self.input[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected {:?} at byte {}",
                c as char, self.pos
            )))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<BundleExpression> {
        let mut parts = vec![self.term()?];
        while self.peek() == Some(b'+') {
            self.pos += 1;
            parts.push(self.term()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            BundleExpression::Sum(parts)
        })
    }

    fn term(&mut self) -> Result<BundleExpression> {
        let mut parts = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            BundleExpression::Tensor(parts)
        })
    }

    fn factor(&mut self) -> Result<BundleExpression> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(b')')?;
                Ok(e)
            }
            Some(b'1') => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.skip_ws();
                    let start = self.pos;
                    while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let digits = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
                    let r: u32 = digits
                        .parse()
                        .map_err(|_| Error::Parse("bad trivial rank".into()))?;
                    Ok(BundleExpression::Trivial(r))
                } else {
                    Ok(BundleExpression::Trivial(1))
                }
            }
            Some(c) if c == b'L' || c == b'd' => {
                let start = self.pos;
                while self.pos < self.input.len() && self.input[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
                match word {
                    "L" => {
                        self.eat(b'(')?;
                        self.skip_ws();
                        let ns = self.pos;
                        while self.pos < self.input.len()
                            && (self.input[self.pos].is_ascii_alphanumeric()
                                || self.input[self.pos] == b'_')
                        {
                            self.pos += 1;
                        }
                        let name = std::str::from_utf8(&self.input[ns..self.pos]).unwrap();
                        if name.is_empty() {
                            return Err(Error::Parse("empty line-bundle root name".into()));
                        }
                        let name = name.to_string();
                        self.eat(b')')?;
                        Ok(BundleExpression::line(&name))
                    }
                    "dual" => {
                        self.eat(b'(')?;
                        let e = self.expr()?;
                        self.eat(b')')?;
                        Ok(BundleExpression::Dual(Box::new(e)))
                    }
                    other => Err(Error::Parse(format!("unknown bundle keyword {other}"))),
                }
            }
            _ => Err(Error::Parse(format!(
                "unexpected input at byte {}",
                self.pos
            ))),
        }
    }
}

/// Formal roots of a bundle expression under the model's group law.
///
/// Sums concatenate, duals apply the inverse series to each root, tensor
/// factors distribute (left fold, outer factor first), trivial summands
/// contribute zero roots.
pub fn roots_of(e: &BundleExpression, model: &FGLModel) -> Result<Vec<TruncatedSeries>> {
    let d = model.var_bound();
    let dc = model.coeff_bound();
    match e {
        BundleExpression::Line(v) => Ok(vec![TruncatedSeries::variable(v.clone(), d, dc)]),
        BundleExpression::Sum(parts) => {
            let mut roots = Vec::new();
            for p in parts {
                roots.extend(roots_of(p, model)?);
            }
            Ok(roots)
        }
        BundleExpression::Trivial(r) => Ok(vec![TruncatedSeries::zero(d, dc); *r as usize]),
        BundleExpression::Dual(inner) => {
            let inv = model.inverse_series()?;
            let x = SeriesVar::w1("x");
            roots_of(inner, model)?
                .into_iter()
                .map(|root| inv.substitute(&[(x.clone(), root)]))
                .collect()
        }
        BundleExpression::Tensor(parts) => {
            let mut acc: Option<Vec<TruncatedSeries>> = None;
            for p in parts {
                let next = roots_of(p, model)?;
                acc = Some(match acc {
                    None => next,
                    Some(prev) => {
                        let mut combined = Vec::with_capacity(prev.len() * next.len());
                        for a in &prev {
                            for b in &next {
                                combined.push(model.formal_sum(a, b)?);
                            }
                        }
                        combined
                    }
                });
            }
            Ok(acc.unwrap_or_else(|| vec![TruncatedSeries::zero(d, dc)]))
        }
    }
}

/// Elementary symmetric polynomial `e_k` of a list of series.
pub fn elementary_symmetric(
    roots: &[TruncatedSeries],
    k: usize,
    var_bound: u32,
    coeff_bound: u32,
) -> TruncatedSeries {
    let one = TruncatedSeries::integer(1, var_bound, coeff_bound);
    let mut e: Vec<TruncatedSeries> = Vec::with_capacity(k + 1);
    e.push(one);
    for _ in 0..k {
        e.push(TruncatedSeries::zero(var_bound, coeff_bound));
    }
    for r in roots {
        for j in (1..=k).rev() {
            let bump = e[j - 1].mul(r);
            e[j] = e[j].add(&bump);
        }
    }
    e.pop().expect("e_k present")
}

/// The i-th Chern class of a bundle expression: `e_i` of its roots, with
/// `c_0 = 1`.
pub fn chern_class(e: &BundleExpression, i: usize, model: &FGLModel) -> Result<TruncatedSeries> {
    let rank = e.rank() as usize;
    if i > rank {
        return Err(Error::IndexOutOfRange { index: i, rank });
    }
    let roots = roots_of(e, model)?;
    Ok(elementary_symmetric(
        &roots,
        i,
        model.var_bound(),
        model.coeff_bound(),
    ))
}

/// Rewrite a series symmetric in the given roots as a series in their
/// elementary symmetric polynomials (named by `e_names`, weights
/// `1*w..k*w`). Variables other than the roots pass through as spectators.
///
/// Classical leading-term elimination with the roots ordered as given:
/// the lex-greatest root monomial `r^lambda` of a symmetric series has
/// weakly decreasing exponents, and subtracting
/// `c * e_1^(l1-l2) * ... * e_k^(lk)` cancels the whole lambda-slice.
pub fn symmetric_reduce(
    f: &TruncatedSeries,
    roots: &[SeriesVar],
    e_names: &[&str],
) -> Result<TruncatedSeries> {
    assert_eq!(roots.len(), e_names.len(), "one name per symmetric degree");
    assert!(!roots.is_empty());
    let w = roots[0].weight();
    assert!(
        roots.iter().all(|r| r.weight() == w),
        "roots must share a weight"
    );
    let d = f.var_bound();
    let dc = f.coeff_bound();

    // work in a universe that contains every root
    let mut universe_vars: Vec<SeriesVar> = f.vars().to_vec();
    for r in roots {
        if !universe_vars.iter().any(|v| v.name() == r.name()) {
            universe_vars.push(r.clone());
        }
    }
    let vars: Vec<SeriesVar> = TruncatedSeries::zero_over(universe_vars, d, dc)
        .vars()
        .to_vec();
    let work0 = f.embedded(&vars);

    for pair in roots.windows(2) {
        if work0.swap_vars(pair[0].name(), pair[1].name()) != work0 {
            return Err(Error::NotSymmetric(
                pair[0].name().to_string(),
                pair[1].name().to_string(),
            ));
        }
    }

    let root_idx: Vec<usize> = roots
        .iter()
        .map(|r| {
            vars.iter()
                .position(|v| v.name() == r.name())
                .expect("root in universe")
        })
        .collect();
    let spectator_idx: Vec<usize> = (0..vars.len()).filter(|i| !root_idx.contains(i)).collect();

    let out_vars: Vec<SeriesVar> = spectator_idx
        .iter()
        .map(|&i| vars[i].clone())
        .chain(
            e_names
                .iter()
                .enumerate()
                .map(|(i, name)| SeriesVar::new(name, (i as u32 + 1) * w)),
        )
        .collect();
    // positions of spectators and e-vars inside the (sorted) output universe
    let out_sorted = TruncatedSeries::zero_over(out_vars.clone(), d, dc);
    let out_pos = |name: &str| {
        out_sorted
            .vars()
            .iter()
            .position(|v| v.name() == name)
            .expect("output variable")
    };

    let elem: Vec<TruncatedSeries> = (1..=roots.len())
        .map(|k| {
            let rs: Vec<TruncatedSeries> = roots
                .iter()
                .map(|r| TruncatedSeries::variable(r.clone(), d, dc))
                .collect();
            elementary_symmetric(&rs, k, d, dc).embedded(&vars)
        })
        .collect();

    let mut work = work0;
    let mut out_terms: Vec<(Vec<u32>, CoeffPoly)> = Vec::new();
    while !work.is_zero() {
        // move root-free terms straight to the output
        let mut constant_slice: Vec<(Vec<u32>, CoeffPoly)> = Vec::new();
        for (exps, cp) in work.terms_iter() {
            if root_idx.iter().all(|&i| exps[i] == 0) {
                constant_slice.push((exps.clone(), cp.clone()));
            }
        }
        if !constant_slice.is_empty() {
            let removal = TruncatedSeries::from_terms(vars.clone(), d, dc, constant_slice.clone());
            work = work.sub(&removal);
            for (exps, cp) in constant_slice {
                let mut out = vec![0u32; out_sorted.vars().len()];
                for &i in &spectator_idx {
                    out[out_pos(vars[i].name())] = exps[i];
                }
                out_terms.push((out, cp));
            }
            continue;
        }

        // lex-greatest root exponent pattern
        let lambda: Vec<u32> = work
            .terms_iter()
            .map(|(exps, _)| root_idx.iter().map(|&i| exps[i]).collect::<Vec<u32>>())
            .max()
            .expect("nonzero work");
        if lambda.windows(2).any(|p| p[0] < p[1]) {
            return Err(Error::NotSymmetric(
                roots[0].name().to_string(),
                roots[roots.len() - 1].name().to_string(),
            ));
        }

        // the coefficient of the lambda-slice, as a spectator-only series
        let slice: Vec<(Vec<u32>, CoeffPoly)> = work
            .terms_iter()
            .filter(|(exps, _)| root_idx.iter().zip(&lambda).all(|(&i, &l)| exps[i] == l))
            .map(|(exps, cp)| {
                let mut spect = exps.clone();
                for &i in &root_idx {
                    spect[i] = 0;
                }
                (spect, cp.clone())
            })
            .collect();
        let coeff_series = TruncatedSeries::from_terms(vars.clone(), d, dc, slice);

        let mut e_prod = TruncatedSeries::integer(1, d, dc).embedded(&vars);
        let mut e_exps = Vec::with_capacity(roots.len());
        for k in 0..roots.len() {
            let power = if k + 1 < roots.len() {
                lambda[k] - lambda[k + 1]
            } else {
                lambda[k]
            };
            e_exps.push(power);
            if power > 0 {
                e_prod = e_prod.mul(&elem[k].pow(power));
            }
        }
        work = work.sub(&coeff_series.mul(&e_prod));

        for (exps, cp) in coeff_series.terms_iter() {
            let mut out = vec![0u32; out_sorted.vars().len()];
            for &i in &spectator_idx {
                out[out_pos(vars[i].name())] = exps[i];
            }
            for (k, &p) in e_exps.iter().enumerate() {
                out[out_pos(e_names[k])] = p;
            }
            out_terms.push((out, cp.clone()));
        }
    }

    Ok(TruncatedSeries::from_terms(
        out_sorted.vars().to_vec(),
        d,
        dc,
        out_terms,
    ))
}

/// A series rewritten in target series, plus whatever could not be matched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressedSeries {
    pub series: TruncatedSeries,
    pub residual: TruncatedSeries,
}

/// The elimination series of `x + [-1](x)` against `x * [-1](x)`: returns
/// `P` (in the weight-2 variable `u`) and the residual of the greedy solve.
pub fn p_series(model: &FGLModel) -> Result<ExpressedSeries> {
    let d = model.var_bound();
    let dc = model.coeff_bound();
    let x = TruncatedSeries::variable(SeriesVar::w1("x"), d, dc);
    let inv = model.inverse_series()?;
    let s = x.add(&inv);
    let p = x.mul(&inv);
    let (series, residual) = s.express_in(&[("u", &p)])?;
    Ok(ExpressedSeries { series, residual })
}

/// Root configuration for [`sp2_series`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sp2RootConfig {
    /// Roots `r, s, t` and `u = [-1](r +_F s +_F t)`.
    DualOfProduct,
    /// Inverse-paired roots `r, [-1](r), s, [-1](s)`.
    InversePairs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sp2Series {
    pub p1: TruncatedSeries,
    pub residual1: TruncatedSeries,
    pub p3: TruncatedSeries,
    pub residual3: TruncatedSeries,
    /// The elementary symmetric functions (d1, d2, d3, d4) of the four roots.
    pub d: [TruncatedSeries; 4],
}

/// Attempt to express `d1` and `d3` of the four-root configuration in
/// `(d2, d4)`. Existence is never assumed: obstructions surface as nonzero
/// residuals.
pub fn sp2_series(model: &FGLModel, config: Sp2RootConfig) -> Result<Sp2Series> {
    let d = model.var_bound();
    let dc = model.coeff_bound();
    let inv = model.inverse_series()?;
    let x = SeriesVar::w1("x");
    let roots: Vec<TruncatedSeries> = match config {
        Sp2RootConfig::DualOfProduct => {
            let r = TruncatedSeries::variable(SeriesVar::w1("r"), d, dc);
            let s = TruncatedSeries::variable(SeriesVar::w1("s"), d, dc);
            let t = TruncatedSeries::variable(SeriesVar::w1("t"), d, dc);
            let sum = model.formal_sum(&model.formal_sum(&r, &s)?, &t)?;
            let u = inv.substitute(&[(x.clone(), sum)])?;
            vec![r, s, t, u]
        }
        Sp2RootConfig::InversePairs => {
            let r = TruncatedSeries::variable(SeriesVar::w1("r"), d, dc);
            let s = TruncatedSeries::variable(SeriesVar::w1("s"), d, dc);
            let ri = inv.substitute(&[(x.clone(), r.clone())])?;
            let si = inv.substitute(&[(x.clone(), s.clone())])?;
            vec![r, ri, s, si]
        }
    };
    let e: Vec<TruncatedSeries> = (1..=4)
        .map(|k| elementary_symmetric(&roots, k, d, dc))
        .collect();
    // sanity: every d_i is invariant under the free-variable permutations
    for di in &e {
        for pair in [("r", "s"), ("s", "t")] {
            if di.vars().iter().any(|v| v.name() == pair.0)
                && di.vars().iter().any(|v| v.name() == pair.1)
            {
                let swapped = di.swap_vars(pair.0, pair.1);
                if swapped != *di {
                    return Err(Error::NotSymmetric(pair.0.to_string(), pair.1.to_string()));
                }
            }
        }
    }
    // at small bounds d4 (or even d2) truncates to zero and drops out of
    // the target list
    let mut targets: Vec<(&str, &TruncatedSeries)> = Vec::new();
    if !e[1].is_zero() {
        targets.push(("v2", &e[1]));
    }
    if !e[3].is_zero() {
        targets.push(("v4", &e[3]));
    }
    let solve = |g: &TruncatedSeries| -> Result<(TruncatedSeries, TruncatedSeries)> {
        if targets.is_empty() {
            Ok((TruncatedSeries::zero(d, dc), g.clone()))
        } else {
            g.express_in(&targets)
        }
    };
    let (p1, residual1) = solve(&e[0])?;
    let (p3, residual3) = solve(&e[2])?;
    Ok(Sp2Series {
        p1,
        residual1,
        p3,
        residual3,
        d: [e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()],
    })
}

/// The i-th dual Chern class of the rank-n standard family: `e_i` of the
/// inverted roots, rewritten in `c_1..c_n`.
pub fn dual_chern(n: u32, i: u32, model: &FGLModel) -> Result<TruncatedSeries> {
    if i < 1 || i > n {
        return Err(Error::IndexOutOfRange {
            index: i as usize,
            rank: n as usize,
        });
    }
    let d = model.var_bound();
    let dc = model.coeff_bound();
    let inv = model.inverse_series()?;
    let x = SeriesVar::w1("x");
    let roots: Vec<SeriesVar> = (1..=n).map(|j| SeriesVar::w1(&format!("x{j}"))).collect();
    let inverted: Vec<TruncatedSeries> = roots
        .iter()
        .map(|r| inv.substitute(&[(x.clone(), TruncatedSeries::variable(r.clone(), d, dc))]))
        .collect::<Result<_>>()?;
    let f = elementary_symmetric(&inverted, i as usize, d, dc);
    let names: Vec<String> = (1..=n).map(|j| format!("c{j}")).collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    symmetric_reduce(&f, &roots, &name_refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use std::collections::BTreeMap;

    const D: u32 = 4;
    const DC: u32 = 6;

    fn free(d: u32) -> FGLModel {
        FGLModel::universal_free(d, DC).unwrap()
    }

    fn additive(d: u32) -> FGLModel {
        FGLModel::additive(d, DC).unwrap()
    }

    #[test]
    fn line_root_is_its_variable() {
        let m = additive(D);
        let roots = roots_of(&BundleExpression::line("x"), &m).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].to_text(), "x");
    }

    #[test]
    fn dual_line_root_is_the_inverse_series() {
        let m = free(3);
        let e = BundleExpression::Dual(Box::new(BundleExpression::line("x")));
        let roots = roots_of(&e, &m).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].to_text(), "-x + a[1,1]*x^2 - a[1,1]^2*x^3");
    }

    #[test]
    fn tensor_square_distributes_roots() {
        let m = free(3);
        let v = BundleExpression::Sum(vec![
            BundleExpression::line("m"),
            BundleExpression::line("n"),
        ]);
        let e = BundleExpression::Tensor(vec![v.clone(), v]);
        let roots = roots_of(&e, &m).unwrap();
        assert_eq!(roots.len(), 4);
        let ms = TruncatedSeries::variable(SeriesVar::w1("m"), 3, DC);
        let ns = TruncatedSeries::variable(SeriesVar::w1("n"), 3, DC);
        let two_m = m.n_series(2).unwrap().rename_var("x", "m");
        let two_n = m.n_series(2).unwrap().rename_var("x", "n");
        let mixed = m.formal_sum(&ms, &ns).unwrap();
        assert!(roots[0].equivalent(&two_m));
        assert!(roots[1].equivalent(&mixed));
        assert!(roots[2].equivalent(&mixed)); // commutativity
        assert!(roots[3].equivalent(&two_n));
    }

    #[test]
    fn c2_of_two_lines_is_the_product() {
        let m = additive(D);
        let e = BundleExpression::Sum(vec![
            BundleExpression::line("m"),
            BundleExpression::line("n"),
        ]);
        assert_eq!(chern_class(&e, 2, &m).unwrap().to_text(), "m*n");
    }

    #[test]
    fn c1_of_tensor_of_lines_is_the_formal_sum() {
        let m = free(3);
        let e = BundleExpression::Tensor(vec![
            BundleExpression::line("x"),
            BundleExpression::line("m"),
        ]);
        let c1 = chern_class(&e, 1, &m).unwrap();
        let xs = TruncatedSeries::variable(SeriesVar::w1("x"), 3, DC);
        let ms = TruncatedSeries::variable(SeriesVar::w1("m"), 3, DC);
        assert!(c1.equivalent(&m.formal_sum(&xs, &ms).unwrap()));
    }

    #[test]
    fn c2_of_four_copies_additive_pairwise_count() {
        let m = additive(D);
        let eta = BundleExpression::Sum(vec![
            BundleExpression::line("m"),
            BundleExpression::line("n"),
        ]);
        let four = BundleExpression::Sum(vec![eta.clone(), eta.clone(), eta.clone(), eta]);
        let c2 = chern_class(&four, 2, &m).unwrap();
        // 6 m^2 + 6 n^2 + 16 m n over the eight roots
        let ms = TruncatedSeries::variable(SeriesVar::w1("m"), D, DC);
        let ns = TruncatedSeries::variable(SeriesVar::w1("n"), D, DC);
        let expect = ms
            .pow(2)
            .scale_int(6)
            .add(&ns.pow(2).scale_int(6))
            .add(&ms.mul(&ns).scale_int(16));
        assert!(c2.equivalent(&expect));
    }

    #[test]
    fn chern_index_out_of_range() {
        let m = additive(D);
        let e = BundleExpression::line("x");
        assert_eq!(
            chern_class(&e, 2, &m).unwrap_err().kind(),
            "index-out-of-range"
        );
    }

    #[test]
    fn rank_arithmetic() {
        let e = BundleExpression::parse("(L(m) + L(n)) * (L(a) + 1^2) + dual(L(b))").unwrap();
        assert_eq!(e.rank(), 2 * 3 + 1);
    }

    #[test]
    fn parse_round_trips_structure() {
        let e = BundleExpression::parse("dual(L(x)) * (L(m) + L(n))").unwrap();
        assert_eq!(
            e,
            BundleExpression::Tensor(vec![
                BundleExpression::Dual(Box::new(BundleExpression::line("x"))),
                BundleExpression::Sum(vec![
                    BundleExpression::line("m"),
                    BundleExpression::line("n"),
                ]),
            ])
        );
    }

    #[test]
    fn newton_identity_two_roots() {
        let ms = TruncatedSeries::variable(SeriesVar::w1("m"), D, DC);
        let ns = TruncatedSeries::variable(SeriesVar::w1("n"), D, DC);
        let roots = [SeriesVar::w1("m"), SeriesVar::w1("n")];
        let sq = ms.pow(2).add(&ns.pow(2));
        let out = symmetric_reduce(&sq, &roots, &["e1", "e2"]).unwrap();
        assert_eq!(out.to_text(), "e1^2 - 2*e2");
        let cu = ms.pow(3).add(&ns.pow(3));
        let out = symmetric_reduce(&cu, &roots, &["e1", "e2"]).unwrap();
        assert_eq!(out.to_text(), "e1^3 - 3*e1*e2");
    }

    #[test]
    fn asymmetric_input_is_rejected_with_witness() {
        let ms = TruncatedSeries::variable(SeriesVar::w1("m"), D, DC);
        let ns = TruncatedSeries::variable(SeriesVar::w1("n"), D, DC);
        let roots = [SeriesVar::w1("m"), SeriesVar::w1("n")];
        let f = ms.pow(2).add(&ns);
        let err = symmetric_reduce(&f, &roots, &["e1", "e2"]).unwrap_err();
        assert_eq!(err, Error::NotSymmetric("m".into(), "n".into()));
    }

    #[test]
    fn symmetric_reduce_round_trip_with_spectator() {
        // ((m+n)^2 * a + 3 m n + a^3 + (m^3 + n^3) m n) reduces and
        // substitutes back exactly at every bound up to 8
        for d in 2..=8u32 {
            let ms = TruncatedSeries::variable(SeriesVar::w1("m"), d, DC);
            let ns = TruncatedSeries::variable(SeriesVar::w1("n"), d, DC);
            let a = TruncatedSeries::variable(SeriesVar::w1("a"), d, DC);
            let f = ms
                .add(&ns)
                .pow(2)
                .mul(&a)
                .add(&ms.mul(&ns).scale_int(3))
                .add(&a.pow(3))
                .add(&ms.pow(3).add(&ns.pow(3)).mul(&ms.mul(&ns)));
            let roots = [SeriesVar::w1("m"), SeriesVar::w1("n")];
            let out = symmetric_reduce(&f, &roots, &["e1", "e2"]).unwrap();
            let e1 = ms.add(&ns);
            let e2 = ms.mul(&ns);
            let back = out
                .substitute(&[(SeriesVar::w1("e1"), e1), (SeriesVar::new("e2", 2), e2)])
                .unwrap();
            assert!(back.equivalent(&f), "bound {d}");
        }
    }

    #[test]
    fn symmetric_reduce_three_roots_round_trip() {
        let d = 6;
        let rs = TruncatedSeries::variable(SeriesVar::w1("r"), d, DC);
        let ss = TruncatedSeries::variable(SeriesVar::w1("s"), d, DC);
        let ts = TruncatedSeries::variable(SeriesVar::w1("t"), d, DC);
        // power sums p2 and p4 of three roots
        for k in [2u32, 4] {
            let f = rs.pow(k).add(&ss.pow(k)).add(&ts.pow(k));
            let roots = [SeriesVar::w1("r"), SeriesVar::w1("s"), SeriesVar::w1("t")];
            let out = symmetric_reduce(&f, &roots, &["e1", "e2", "e3"]).unwrap();
            let e1 = rs.add(&ss).add(&ts);
            let e2 = rs.mul(&ss).add(&rs.mul(&ts)).add(&ss.mul(&ts));
            let e3 = rs.mul(&ss).mul(&ts);
            let back = out
                .substitute(&[
                    (SeriesVar::w1("e1"), e1),
                    (SeriesVar::new("e2", 2), e2),
                    (SeriesVar::new("e3", 3), e3),
                ])
                .unwrap();
            assert!(back.equivalent(&f), "power sum {k}");
        }
    }

    #[test]
    fn p_series_additive_is_zero() {
        let out = p_series(&additive(6)).unwrap();
        assert!(out.series.is_zero());
        assert!(out.residual.is_zero());
    }

    #[test]
    fn p_series_multiplicative_is_minus_beta_u() {
        let out = p_series(&FGLModel::multiplicative(6, DC).unwrap()).unwrap();
        assert!(out.residual.is_zero());
        assert_eq!(out.series.to_text(), "-b*u");
    }

    #[test]
    fn p_series_free_at_bound_three() {
        let out = p_series(&free(3)).unwrap();
        assert!(out.residual.is_zero());
        assert_eq!(out.series.to_text(), "-a[1,1]*u");
    }

    #[test]
    fn sp2_additive_p1_vanishes_and_p3_is_obstructed() {
        let out = sp2_series(&additive(4), Sp2RootConfig::DualOfProduct).unwrap();
        assert!(out.p1.is_zero());
        assert!(out.residual1.is_zero());
        assert!(!out.residual3.is_zero());
    }

    #[test]
    fn sp2_additive_evaluation_oracle() {
        // (r,s,t) = (2,-1,0) and (1,1,0) share (d2,d4) = (-3,0) but give
        // d3 = 2 and -2; no series in (d2,d4) can reproduce d3.
        let out = sp2_series(&additive(4), Sp2RootConfig::DualOfProduct).unwrap();
        let eval = |vals: [i64; 3], s: &TruncatedSeries| -> BigInt {
            let mut map = BTreeMap::new();
            for (name, v) in ["r", "s", "t"].iter().zip(vals) {
                map.insert(name.to_string(), BigInt::from(v));
            }
            s.eval_integers(&map).unwrap()
        };
        for tuple in [[2i64, -1, 0], [1, 1, 0]] {
            assert_eq!(eval(tuple, &out.d[1]), BigInt::from(-3));
            assert_eq!(eval(tuple, &out.d[3]), BigInt::from(0));
        }
        assert_eq!(eval([2, -1, 0], &out.d[2]), BigInt::from(2));
        assert_eq!(eval([1, 1, 0], &out.d[2]), BigInt::from(-2));
    }

    #[test]
    fn sp2_free_leading_term_at_bound_two() {
        let out = sp2_series(&free(2), Sp2RootConfig::DualOfProduct).unwrap();
        assert!(out.residual1.is_zero());
        assert_eq!(out.p1.to_text(), "-a[1,1]*v2");
    }

    #[test]
    fn sp2_inverse_pairs_configuration_runs() {
        let out = sp2_series(&additive(4), Sp2RootConfig::InversePairs).unwrap();
        // with roots r, -r, s, -s both d1 and d3 vanish identically
        assert!(out.p1.is_zero());
        assert!(out.residual1.is_zero());
        assert!(out.p3.is_zero());
        assert!(out.residual3.is_zero());
    }

    #[test]
    fn sp2_dual_of_product_obstruction_observed_in_the_log_model() {
        // at bound 3 the first elimination already fails, with residual
        // 3*m2*(e1*e2 - e3); recorded as observed behavior of this root
        // configuration, not as a statement about other configurations
        let log = FGLModel::universal_log(3, DC).unwrap();
        let out = sp2_series(&log, Sp2RootConfig::DualOfProduct).unwrap();
        let m2 = CoeffPoly::generator(crate::coeff::CoeffGenerator::m(2), DC);
        let rs = TruncatedSeries::variable(SeriesVar::w1("r"), 3, DC);
        let ss = TruncatedSeries::variable(SeriesVar::w1("s"), 3, DC);
        let ts = TruncatedSeries::variable(SeriesVar::w1("t"), 3, DC);
        let e1 = rs.add(&ss).add(&ts);
        let e2 = rs.mul(&ss).add(&rs.mul(&ts)).add(&ss.mul(&ts));
        let e3 = rs.mul(&ss).mul(&ts);
        let expect = e1.mul(&e2).sub(&e3).scale(&m2.scale(&3.into()));
        assert_eq!(out.residual1, expect);
        assert!(!out.residual3.is_zero());
    }

    #[test]
    fn sp2_inverse_pairs_expressible_in_the_log_model() {
        // the paired configuration admits both eliminations at bound 5
        let log = FGLModel::universal_log(5, DC).unwrap();
        let out = sp2_series(&log, Sp2RootConfig::InversePairs).unwrap();
        assert!(out.residual1.is_zero());
        assert!(out.residual3.is_zero());
        assert_eq!(out.p3.to_text(), "4*m[1]*v4");
        assert_eq!(out.p1.coeff_at(&[("v2", 1)]).to_text(), "2*m[1]");
    }

    #[test]
    fn dual_chern_rank_one_is_the_inverse_series() {
        let m = free(3);
        let c1s = dual_chern(1, 1, &m).unwrap();
        assert_eq!(c1s.to_text(), "-c1 + a[1,1]*c1^2 - a[1,1]^2*c1^3");
    }

    #[test]
    fn dual_chern_additive_parity() {
        // e_i of negated roots is (-1)^i e_i
        for n in 1..=4u32 {
            let m = additive(4);
            for i in 1..=n {
                let ci = dual_chern(n, i, &m).unwrap();
                let names: Vec<String> = (1..=n).map(|j| format!("c{j}")).collect();
                let pairs: Vec<(&str, u32)> = names
                    .iter()
                    .enumerate()
                    .map(|(j, s)| (s.as_str(), if j as u32 == i - 1 { 1 } else { 0 }))
                    .collect();
                let got = ci.coeff_at(&pairs).as_constant().unwrap();
                let sign = if i % 2 == 0 { 1 } else { -1 };
                assert_eq!(got, BigInt::from(sign), "n {n} i {i}");
                assert_eq!(ci.num_terms(), 1, "additive dual class is a single term");
            }
        }
    }

    #[test]
    fn dual_involution_on_roots() {
        let m = free(4);
        let e = BundleExpression::Sum(vec![
            BundleExpression::line("m"),
            BundleExpression::line("n"),
        ]);
        let dd = BundleExpression::Dual(Box::new(BundleExpression::Dual(Box::new(e.clone()))));
        let roots = roots_of(&e, &m).unwrap();
        let roots_dd = roots_of(&dd, &m).unwrap();
        for (a, b) in roots.iter().zip(&roots_dd) {
            assert!(a.equivalent(b));
        }
    }

    #[test]
    fn determinant_line_has_the_formal_sum_of_roots() {
        let m = free(3);
        let lines = ["r", "s", "t"];
        let det =
            BundleExpression::Tensor(lines.iter().map(|n| BundleExpression::line(n)).collect());
        let c1 = chern_class(&det, 1, &m).unwrap();
        let rs = TruncatedSeries::variable(SeriesVar::w1("r"), 3, DC);
        let ss = TruncatedSeries::variable(SeriesVar::w1("s"), 3, DC);
        let ts = TruncatedSeries::variable(SeriesVar::w1("t"), 3, DC);
        let expect = m.formal_sum(&m.formal_sum(&rs, &ss).unwrap(), &ts).unwrap();
        assert!(c1.equivalent(&expect));
    }

    #[test]
    fn chern_class_is_invariant_under_child_permutation() {
        let m = free(3);
        let e1 = BundleExpression::Sum(vec![
            BundleExpression::line("m"),
            BundleExpression::line("n"),
        ]);
        let e2 = BundleExpression::Sum(vec![
            BundleExpression::line("n"),
            BundleExpression::line("m"),
        ]);
        for i in 1..=2 {
            assert_eq!(
                chern_class(&e1, i, &m).unwrap(),
                chern_class(&e2, i, &m).unwrap()
            );
        }
        let t1 = BundleExpression::Tensor(vec![e1.clone(), BundleExpression::line("a")]);
        let t2 = BundleExpression::Tensor(vec![BundleExpression::line("a"), e1]);
        for i in 1..=2 {
            assert_eq!(
                chern_class(&t1, i, &m).unwrap(),
                chern_class(&t2, i, &m).unwrap()
            );
        }
    }

    #[test]
    fn symmetric_reduce_handles_free_model_coefficients() {
        // duals under the free law: e_1 of the inverted roots at bound 3
        let m = free(3);
        let c1s = dual_chern(2, 1, &m).unwrap();
        // substituting the definitions back must reproduce e_1 of inverses
        let inv = m.inverse_series().unwrap();
        let x = SeriesVar::w1("x");
        let z1 = inv
            .substitute(&[(
                x.clone(),
                TruncatedSeries::variable(SeriesVar::w1("x1"), 3, DC),
            )])
            .unwrap();
        let z2 = inv
            .substitute(&[(x, TruncatedSeries::variable(SeriesVar::w1("x2"), 3, DC))])
            .unwrap();
        let f = z1.add(&z2);
        let x1s = TruncatedSeries::variable(SeriesVar::w1("x1"), 3, DC);
        let x2s = TruncatedSeries::variable(SeriesVar::w1("x2"), 3, DC);
        let back = c1s
            .substitute(&[
                (SeriesVar::w1("c1"), x1s.add(&x2s)),
                (SeriesVar::new("c2", 2), x1s.mul(&x2s)),
            ])
            .unwrap();
        assert!(back.equivalent(&f));
    }

    #[test]
    fn trivial_summand_contributes_zero_roots() {
        let m = additive(D);
        let e = BundleExpression::parse("L(x) + 1^2").unwrap();
        let roots = roots_of(&e, &m).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(roots[1].is_zero() && roots[2].is_zero());
    }
}
