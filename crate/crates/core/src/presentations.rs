//! Graded ring presentations of classifying-space invariants.
//!
//! A presentation is a list of positively graded generators plus relation
//! series over a coefficient descriptor: the truncated universal ring in
//! either generator family, or the integers after specialization. The
//! integer level supports exact graded-component computation through Smith
//! normal form, which is where the torsion answers live.

use crate::chern::{self, elementary_symmetric};
use crate::coeff::CoeffPoly;
use crate::fgl::{FGLKind, FGLModel};
use crate::series::{SeriesVar, TruncatedSeries};
use crate::snf::{self, SmithInvariants};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};
use std::fmt;
use std::str::FromStr;

/// Supported groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Group {
    GL(u32),
    SL(u32),
    /// Argument is the (even) matrix size 2n.
    Sp(u32),
    O(u32),
    /// Argument is the (odd) matrix size 2n+1.
    SO(u32),
    /// Product of cyclic groups of the given orders; empty list is a point.
    CyclicProduct(Vec<u64>),
    Q8,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::GL(n) => write!(f, "GL({n})"),
            Group::SL(n) => write!(f, "SL({n})"),
            Group::Sp(n) => write!(f, "Sp({n})"),
            Group::O(n) => write!(f, "O({n})"),
            Group::SO(n) => write!(f, "SO({n})"),
            Group::CyclicProduct(ns) => {
                if ns.is_empty() {
                    return write!(f, "point");
                }
                let parts: Vec<String> = ns.iter().map(|n| format!("Z/{n}")).collect();
                write!(f, "{}", parts.join("x"))
            }
            Group::Q8 => write!(f, "Q8"),
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Group> {
        let s = s.trim();
        let parse_arg = |s: &str, prefix: &str| -> Result<u32> {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.trim().parse().ok())
                .ok_or_else(|| Error::UnsupportedGroup(s.to_string()))
        };
        if s == "Q8" || s == "q8" {
            return Ok(Group::Q8);
        }
        if s == "point" {
            return Ok(Group::CyclicProduct(Vec::new()));
        }
        if s.starts_with("GL") {
            return Ok(Group::GL(parse_arg(s, "GL")?));
        }
        if s.starts_with("SL") {
            return Ok(Group::SL(parse_arg(s, "SL")?));
        }
        if s.starts_with("Sp") {
            return Ok(Group::Sp(parse_arg(s, "Sp")?));
        }
        if s.starts_with("SO") {
            return Ok(Group::SO(parse_arg(s, "SO")?));
        }
        if s.starts_with('O') {
            return Ok(Group::O(parse_arg(s, "O")?));
        }
        // cyclic products: Z/2, Z/2xZ/4, ...
        let mut orders = Vec::new();
        for part in s.split('x') {
            let part = part.trim();
            let n = part
                .strip_prefix("Z/")
                .or_else(|| part.strip_prefix("z/"))
                .and_then(|r| r.parse::<u64>().ok())
                .ok_or_else(|| Error::UnsupportedGroup(s.to_string()))?;
            orders.push(n);
        }
        if orders.is_empty() {
            return Err(Error::UnsupportedGroup(s.to_string()));
        }
        Ok(Group::CyclicProduct(orders))
    }
}

/// Coefficient ring of a presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffDescriptor {
    LazardFree { var_bound: u32, coeff_bound: u32 },
    LogModel { var_bound: u32, coeff_bound: u32 },
    Integers,
}

impl fmt::Display for CoeffDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffDescriptor::LazardFree {
                var_bound,
                coeff_bound,
            } => write!(f, "lazard-free(D={var_bound},Dc={coeff_bound})"),
            CoeffDescriptor::LogModel {
                var_bound,
                coeff_bound,
            } => write!(f, "log(D={var_bound},Dc={coeff_bound})"),
            CoeffDescriptor::Integers => write!(f, "integers"),
        }
    }
}

impl CoeffDescriptor {
    fn for_model(model: &FGLModel) -> Result<Self> {
        match model.kind() {
            FGLKind::UniversalFree => Ok(CoeffDescriptor::LazardFree {
                var_bound: model.var_bound(),
                coeff_bound: model.coeff_bound(),
            }),
            FGLKind::UniversalLog => Ok(CoeffDescriptor::LogModel {
                var_bound: model.var_bound(),
                coeff_bound: model.coeff_bound(),
            }),
            FGLKind::Additive => Ok(CoeffDescriptor::Integers),
            other => Err(Error::UnsupportedModel(other.to_string())),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            CoeffDescriptor::LazardFree {
                var_bound,
                coeff_bound,
            } => json!({"kind": "lazard-free", "var_bound": var_bound, "coeff_bound": coeff_bound}),
            CoeffDescriptor::LogModel {
                var_bound,
                coeff_bound,
            } => json!({"kind": "log", "var_bound": var_bound, "coeff_bound": coeff_bound}),
            CoeffDescriptor::Integers => json!({"kind": "integers"}),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("coefficient descriptor missing kind".into()))?;
        let bounds = || -> Result<(u32, u32)> {
            let d = v
                .get("var_bound")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("descriptor missing var_bound".into()))?;
            let dc = v
                .get("coeff_bound")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("descriptor missing coeff_bound".into()))?;
            Ok((d as u32, dc as u32))
        };
        match kind {
            "lazard-free" => {
                let (var_bound, coeff_bound) = bounds()?;
                Ok(CoeffDescriptor::LazardFree {
                    var_bound,
                    coeff_bound,
                })
            }
            "log" => {
                let (var_bound, coeff_bound) = bounds()?;
                Ok(CoeffDescriptor::LogModel {
                    var_bound,
                    coeff_bound,
                })
            }
            "integers" => Ok(CoeffDescriptor::Integers),
            other => Err(Error::Parse(format!("unknown coefficient kind {other}"))),
        }
    }
}

/// Generators with positive degrees plus relation series in those
/// generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPresentation {
    coefficient: CoeffDescriptor,
    generators: Vec<(String, u32)>,
    relations: Vec<TruncatedSeries>,
    group: String,
}

impl GradedPresentation {
    /// Validating constructor: every relation must live in the declared
    /// generators; over the integers relations must additionally be
    /// homogeneous with constant coefficients.
    pub fn new(
        coefficient: CoeffDescriptor,
        group: String,
        generators: Vec<(String, u32)>,
        relations: Vec<TruncatedSeries>,
    ) -> Result<Self> {
        let mut generators = generators;
        generators.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        for (idx, r) in relations.iter().enumerate() {
            for v in r.vars() {
                let declared = generators
                    .iter()
                    .find(|(name, _)| name == v.name())
                    .ok_or_else(|| {
                        Error::InvalidParameters(format!(
                            "relation {idx} uses undeclared generator {}",
                            v.name()
                        ))
                    })?;
                if declared.1 != v.weight() {
                    return Err(Error::InvalidParameters(format!(
                        "generator {} declared with degree {} but used with weight {}",
                        v.name(),
                        declared.1,
                        v.weight()
                    )));
                }
            }
            if coefficient == CoeffDescriptor::Integers {
                let degrees: Vec<u32> = r
                    .terms_iter()
                    .map(|(e, _)| e.iter().zip(r.vars()).map(|(x, v)| x * v.weight()).sum())
                    .collect();
                if degrees.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::NonHomogeneousRelation { index: idx });
                }
                for (_, cp) in r.terms_iter() {
                    if cp.as_constant().is_none() {
                        return Err(Error::InvalidParameters(format!(
                            "relation {idx} has non-integer coefficients"
                        )));
                    }
                }
            }
        }
        Ok(GradedPresentation {
            coefficient,
            generators,
            relations,
            group,
        })
    }

    /// The empty presentation (a point); the unit for the tensor product.
    pub fn point(coefficient: CoeffDescriptor) -> Self {
        GradedPresentation {
            coefficient,
            generators: Vec::new(),
            relations: Vec::new(),
            group: "point".to_string(),
        }
    }

    pub fn coefficient(&self) -> &CoeffDescriptor {
        &self.coefficient
    }

    pub fn group(&self) -> &str {
        &self.group
    }

    /// Generators sorted by (degree, name).
    pub fn generators(&self) -> &[(String, u32)] {
        &self.generators
    }

    pub fn relations(&self) -> &[TruncatedSeries] {
        &self.relations
    }

    pub fn relation_texts(&self) -> Vec<String> {
        self.relations.iter().map(|r| r.to_text()).collect()
    }

    /// Structural comparison: same coefficient ring and degree sequence, and
    /// the same relations after matching generators positionally.
    pub fn structurally_equal(&self, other: &Self) -> bool {
        if self.coefficient != other.coefficient {
            return false;
        }
        if self.generators.len() != other.generators.len() {
            return false;
        }
        for (a, b) in self.generators.iter().zip(&other.generators) {
            if a.1 != b.1 {
                return false;
            }
        }
        // positional rename through fresh intermediates
        let rename = |r: &TruncatedSeries| -> TruncatedSeries {
            let mut s = r.clone();
            for (i, (from, _)) in self.generators.iter().enumerate() {
                s = s.rename_var(from, &format!("__tmp{i}"));
            }
            for (i, (_, _)) in self.generators.iter().enumerate() {
                s = s.rename_var(&format!("__tmp{i}"), &other.generators[i].0);
            }
            s
        };
        let mut lhs: Vec<String> = self.relations.iter().map(|r| rename(r).to_text()).collect();
        let mut rhs: Vec<String> = other.relation_texts();
        lhs.sort();
        rhs.sort();
        lhs == rhs
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("group: {}\ncoefficient: {}\n", self.group, self.coefficient);
        if self.generators.is_empty() {
            out.push_str("generators: (none)\n");
        } else {
            let gens: Vec<String> = self
                .generators
                .iter()
                .map(|(n, d)| format!("{n} (degree {d})"))
                .collect();
            out.push_str(&format!("generators: {}\n", gens.join(", ")));
        }
        if self.relations.is_empty() {
            out.push_str("relations: (none)");
        } else {
            out.push_str("relations:");
            for r in &self.relations {
                out.push_str(&format!("\n  {}", r.to_text()));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "coefficient": self.coefficient.to_json(),
            "generators": self.generators.iter()
                .map(|(n, d)| json!({"name": n, "degree": d}))
                .collect::<Vec<_>>(),
            "relations": self.relations.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "meta": {"group": self.group},
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let coefficient = CoeffDescriptor::from_json(
            v.get("coefficient")
                .ok_or_else(|| Error::Parse("presentation missing coefficient".into()))?,
        )?;
        let group = v
            .get("meta")
            .and_then(|m| m.get("group"))
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string();
        let gens_json = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("presentation missing generators".into()))?;
        let mut generators = Vec::new();
        for g in gens_json {
            let name = g
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("generator missing name".into()))?;
            let degree = g
                .get("degree")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("generator missing degree".into()))?;
            generators.push((name.to_string(), degree as u32));
        }
        let rel_json = v
            .get("relations")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("presentation missing relations".into()))?;
        let relations = rel_json
            .iter()
            .map(TruncatedSeries::from_json)
            .collect::<Result<Vec<_>>>()?;
        GradedPresentation::new(coefficient, group, generators, relations)
    }
}

/// Build the presentation of the classifying-space invariant ring for a
/// supported group over the given model.
pub fn present(group: &Group, model: &FGLModel) -> Result<GradedPresentation> {
    let coefficient = CoeffDescriptor::for_model(model)?;
    let d = model.var_bound();
    let label = group.to_string();
    let chern_gens = |range: Vec<u32>| -> Vec<(String, u32)> {
        range.into_iter().map(|i| (format!("c{i}"), i)).collect()
    };
    let check_depth = |max_degree: u32| -> Result<()> {
        if d < max_degree {
            return Err(Error::BoundTooSmall(d));
        }
        Ok(())
    };
    match group {
        Group::GL(n) => {
            if *n < 1 {
                return Err(Error::UnsupportedGroup(label));
            }
            check_depth(*n)?;
            GradedPresentation::new(coefficient, label, chern_gens((1..=*n).collect()), vec![])
        }
        Group::SL(n) => {
            if *n < 1 {
                return Err(Error::UnsupportedGroup(label));
            }
            check_depth(*n)?;
            GradedPresentation::new(coefficient, label, chern_gens((2..=*n).collect()), vec![])
        }
        Group::Sp(n) => {
            if *n < 2 || *n % 2 != 0 {
                return Err(Error::UnsupportedGroup(label));
            }
            check_depth(*n)?;
            let gens = chern_gens((1..=*n / 2).map(|i| 2 * i).collect());
            GradedPresentation::new(coefficient, label, gens, vec![])
        }
        Group::O(n) => {
            if *n < 1 {
                return Err(Error::UnsupportedGroup(label));
            }
            check_depth(*n)?;
            let mut relations = Vec::new();
            for i in 1..=*n {
                let ci = TruncatedSeries::variable(
                    SeriesVar::new(&format!("c{i}"), i),
                    d,
                    model.coeff_bound(),
                );
                let dual = chern::dual_chern(*n, i, model)?;
                relations.push(ci.sub(&dual));
            }
            GradedPresentation::new(
                coefficient,
                label,
                chern_gens((1..=*n).collect()),
                relations,
            )
        }
        Group::SO(n) => {
            if *n < 3 || *n % 2 == 0 {
                return Err(Error::UnsupportedGroup(label));
            }
            check_depth(*n)?;
            // the determinant constraint removes c1: set it to zero inside
            // the dual classes
            let c1 = SeriesVar::new("c1", 1);
            let zero = TruncatedSeries::zero(d, model.coeff_bound());
            let mut relations = Vec::new();
            for i in 2..=*n {
                let ci = TruncatedSeries::variable(
                    SeriesVar::new(&format!("c{i}"), i),
                    d,
                    model.coeff_bound(),
                );
                let dual =
                    chern::dual_chern(*n, i, model)?.substitute(&[(c1.clone(), zero.clone())])?;
                relations.push(ci.sub(&dual));
            }
            GradedPresentation::new(
                coefficient,
                label,
                chern_gens((2..=*n).collect()),
                relations,
            )
        }
        Group::CyclicProduct(orders) => {
            let r = orders.len();
            if r == 0 {
                return Ok(GradedPresentation::point(coefficient));
            }
            check_depth(1)?;
            let names: Vec<String> = if r == 1 {
                vec!["x".to_string()]
            } else {
                (1..=r).map(|i| format!("x{i}")).collect()
            };
            let mut relations = Vec::new();
            for (name, &order) in names.iter().zip(orders) {
                if order < 1 {
                    return Err(Error::UnsupportedGroup(label));
                }
                let n = i64::try_from(order)
                    .map_err(|_| Error::InvalidParameters(format!("order {order} too large")))?;
                relations.push(model.n_series(n)?.rename_var("x", name));
            }
            let generators = names.into_iter().map(|n| (n, 1)).collect();
            GradedPresentation::new(coefficient, label, generators, relations)
        }
        Group::Q8 => {
            check_depth(2)?;
            let bq = bq_relations(model)?;
            let generators = vec![
                ("x".to_string(), 1),
                ("y".to_string(), 1),
                ("z".to_string(), 2),
            ];
            GradedPresentation::new(coefficient, label, generators, bq.relations.to_vec())
        }
    }
}

/// Output of the quaternion-group relation pipeline.
#[derive(Clone, Debug)]
pub struct BqData {
    /// The six relations in `x, y, z`, in the fixed order: the two
    /// `F(a,m)F(a,n) = mn` style relations, the two 2-torsion relations,
    /// the second-Chern-class comparison, and the `c2(4V) = c2(V^3)`
    /// relation.
    pub relations: [TruncatedSeries; 6],
    /// The eliminated series `P` with `m + n = P(mn)`.
    pub p: TruncatedSeries,
    /// `c2` of four copies of the determinant-one rank-2 family, as a
    /// series in its own `c2`.
    pub g: TruncatedSeries,
    /// `c2` of the tensor cube of the same family.
    pub h: TruncatedSeries,
    /// First-Chern-class comparison (implied, archived for audit).
    pub r5a: TruncatedSeries,
    /// Third-Chern-class comparison (implied, archived for audit).
    pub r5c: TruncatedSeries,
}

/// Derive the six quaternion-group relations over the model.
///
/// Roots `a, b` stand for the two order-4 line classes, `m, n` for the
/// splitting roots of the 2-dimensional representation. Relations symmetric
/// in `(m, n)` are rewritten in `s = m + n`, `p = m*n`, then `s` is
/// eliminated through `P` and the variables renamed `a -> x`, `b -> y`,
/// `p -> z`.
pub fn bq_relations(model: &FGLModel) -> Result<BqData> {
    let d = model.var_bound();
    let dc = model.coeff_bound();
    let pres = chern::p_series(model)?;
    if !pres.residual.is_zero() {
        return Err(Error::PSeriesObstructed(format!(
            "m + n is not a series in m*n at bound {d} over the {} model",
            model.kind()
        )));
    }
    let p_of = pres.series; // series in "u" (weight 2)

    let var = |name: &str| TruncatedSeries::variable(SeriesVar::w1(name), d, dc);
    let a = var("a");
    let b = var("b");
    let m = var("m");
    let n = var("n");

    let two = model.n_series(2)?; // in "x"
    let c = model.formal_sum(&a, &b)?;

    let r1_raw = model
        .formal_sum(&a, &m)?
        .mul(&model.formal_sum(&a, &n)?)
        .sub(&m.mul(&n));
    let r2_raw = model
        .formal_sum(&b, &m)?
        .mul(&model.formal_sum(&b, &n)?)
        .sub(&m.mul(&n));
    let two_m = two.rename_var("x", "m");
    let two_n = two.rename_var("x", "n");
    let r5_raw = a
        .mul(&b)
        .add(&b.mul(&c))
        .add(&c.mul(&a))
        .sub(&two_m.mul(&two_n));
    let r5a_raw = a.add(&b).add(&c).sub(&two_m.add(&two_n));
    let r5c_raw = a.mul(&b).mul(&c);

    // (m, n)-symmetric part -> (s, p), then s -> P(p)
    let roots = [SeriesVar::w1("m"), SeriesVar::w1("n")];
    let p_in_p = p_of.rename_var("u", "p");
    let reduce = |raw: &TruncatedSeries| -> Result<TruncatedSeries> {
        let red = chern::symmetric_reduce(raw, &roots, &["s", "p"])?;
        red.substitute(&[(SeriesVar::w1("s"), p_in_p.clone())])
    };
    let finish = |series: TruncatedSeries| -> TruncatedSeries {
        series
            .rename_var("a", "x")
            .rename_var("b", "y")
            .rename_var("p", "z")
    };

    let r1 = finish(reduce(&r1_raw)?);
    let r2 = finish(reduce(&r2_raw)?);
    let r3 = two.clone();
    let r4 = two.rename_var("x", "y");
    let r5 = finish(reduce(&r5_raw)?);
    let r5a = finish(reduce(&r5a_raw)?);
    let r5c = finish(reduce(&r5c_raw)?);

    // c2(4V) = c2(V^3) through the splitting roots {m, [-1](m)}
    let inv = model.inverse_series()?;
    let root_m = var("m");
    let root_mi = inv.substitute(&[(SeriesVar::w1("x"), root_m.clone())])?;
    let p_m = root_m.mul(&root_mi);
    let four_v: Vec<TruncatedSeries> = std::iter::repeat_n(root_m.clone(), 4)
        .chain(std::iter::repeat_n(root_mi.clone(), 4))
        .collect();
    let c2_four = elementary_symmetric(&four_v, 2, d, dc);
    let mut cube_roots = Vec::with_capacity(8);
    for r1 in [&root_m, &root_mi] {
        for r2 in [&root_m, &root_mi] {
            for r3 in [&root_m, &root_mi] {
                cube_roots.push(model.formal_sum(&model.formal_sum(r1, r2)?, r3)?);
            }
        }
    }
    let c2_cube = elementary_symmetric(&cube_roots, 2, d, dc);
    let (g, g_res) = c2_four.express_in(&[("u", &p_m)])?;
    if !g_res.is_zero() {
        return Err(Error::PSeriesObstructed(format!(
            "c2 of the quadruple is not a series in m*[-1](m) at bound {d}"
        )));
    }
    let (h, h_res) = c2_cube.express_in(&[("u", &p_m)])?;
    if !h_res.is_zero() {
        return Err(Error::PSeriesObstructed(format!(
            "c2 of the tensor cube is not a series in m*[-1](m) at bound {d}"
        )));
    }
    let r6 = g.sub(&h).rename_var("u", "z");

    Ok(BqData {
        relations: [r1, r2, r3, r4, r5, r6],
        p: p_of,
        g,
        h,
        r5a,
        r5c,
    })
}

/// Integral fixture for the dihedral group of order 8 (the wreath square
/// of the order-2 group): `Z[x, y, z]/(2x, 2y, 4z, x*y - 2*z)` with `x, y`
/// in degree 1 and `z` in degree 2. Recorded at the integral level only;
/// no relation lift is derived.
pub fn dihedral_chow_fixture(var_bound: u32, coeff_bound: u32) -> Result<GradedPresentation> {
    let x = TruncatedSeries::variable(SeriesVar::w1("x"), var_bound, coeff_bound);
    let y = TruncatedSeries::variable(SeriesVar::w1("y"), var_bound, coeff_bound);
    let z = TruncatedSeries::variable(SeriesVar::new("z", 2), var_bound, coeff_bound);
    GradedPresentation::new(
        CoeffDescriptor::Integers,
        "D8".to_string(),
        vec![
            ("x".to_string(), 1),
            ("y".to_string(), 1),
            ("z".to_string(), 2),
        ],
        vec![
            x.scale_int(2),
            y.scale_int(2),
            z.scale_int(4),
            x.mul(&y).sub(&z.scale_int(2)),
        ],
    )
}

/// Specialize all relation coefficients to the integers (every generator of
/// the coefficient ring to zero), dropping relations that die.
pub fn chow_specialize(p: &GradedPresentation) -> Result<GradedPresentation> {
    let mut relations = Vec::new();
    for r in p.relations() {
        let img = r.apply_hom(&|_| Some(CoeffPoly::zero(r.coeff_bound())), true)?;
        if !img.is_zero() {
            relations.push(img);
        }
    }
    GradedPresentation::new(
        CoeffDescriptor::Integers,
        p.group().to_string(),
        p.generators().to_vec(),
        relations,
    )
}

/// One graded piece of an integer presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedComponent {
    pub degree: u32,
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl GradedComponent {
    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "torsion": self.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(degree: u32, v: &Value) -> Result<Self> {
        let rank =
            v.get("rank")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("component missing rank".into()))? as usize;
        let torsion = v
            .get("torsion")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("component missing torsion".into()))?
            .iter()
            .map(|t| {
                t.as_str()
                    .and_then(|s| s.parse::<BigInt>().ok())
                    .ok_or_else(|| Error::Parse("bad torsion entry".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GradedComponent {
            degree,
            rank,
            torsion,
        })
    }

    pub fn to_text(&self) -> String {
        let torsion: Vec<String> = self.torsion.iter().map(|t| t.to_string()).collect();
        format!("rank {}; torsion [{}]", self.rank, torsion.join(","))
    }
}

/// Monomials of exact weighted degree `d` in the presentation's generators,
/// in a fixed deterministic order.
pub fn degree_basis(p: &GradedPresentation, d: u32) -> Vec<Vec<u32>> {
    fn rec(degrees: &[u32], remaining: u32, out: &mut Vec<Vec<u32>>, acc: &mut Vec<u32>) {
        if degrees.is_empty() {
            if remaining == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let w = degrees[0];
        let max = remaining / w;
        for e in 0..=max {
            acc.push(e);
            rec(&degrees[1..], remaining - e * w, out, acc);
            acc.pop();
        }
    }
    let degrees: Vec<u32> = p.generators().iter().map(|(_, d)| *d).collect();
    let mut out = Vec::new();
    rec(&degrees, d, &mut out, &mut Vec::new());
    out
}

/// Integer coordinates of a homogeneous degree-`d` series over the basis of
/// generator monomials.
pub fn series_vector(p: &GradedPresentation, s: &TruncatedSeries, d: u32) -> Result<Vec<BigInt>> {
    let basis = degree_basis(p, d);
    let gen_vars: Vec<SeriesVar> = p
        .generators()
        .iter()
        .map(|(n, deg)| SeriesVar::new(n, *deg))
        .collect();
    let zero = TruncatedSeries::zero_over(gen_vars.clone(), s.var_bound(), s.coeff_bound());
    let embedded = s.embedded(zero.vars());
    // map exponent vectors (in sorted universe) back to generator order
    let positions: Vec<usize> = p
        .generators()
        .iter()
        .map(|(n, _)| {
            zero.vars()
                .iter()
                .position(|v| v.name() == n)
                .expect("generator present")
        })
        .collect();
    let mut vector = vec![BigInt::zero(); basis.len()];
    for (exps, cp) in embedded.terms_iter() {
        let key: Vec<u32> = positions.iter().map(|&i| exps[i]).collect();
        let idx = basis.iter().position(|b| *b == key).ok_or_else(|| {
            Error::InvalidParameters(format!("series has a term outside degree {d}"))
        })?;
        let c = cp.as_constant().ok_or_else(|| {
            Error::InvalidParameters("series has non-integer coefficients".into())
        })?;
        vector[idx] = c;
    }
    Ok(vector)
}

/// Rows of the degree-`d` relation lattice spanned by monomial multiples of
/// the selected relations.
pub fn relation_rows(
    p: &GradedPresentation,
    d: u32,
    indices: &[usize],
) -> Result<Vec<Vec<BigInt>>> {
    if p.coefficient != CoeffDescriptor::Integers {
        return Err(Error::InvalidParameters(
            "graded components require an integer presentation".into(),
        ));
    }
    let gen_vars: Vec<SeriesVar> = p
        .generators()
        .iter()
        .map(|(n, deg)| SeriesVar::new(n, *deg))
        .collect();
    let mut rows = Vec::new();
    for &ri in indices {
        let r = &p.relations[ri];
        let w = r.min_weighted_degree().unwrap_or(0);
        if w > d {
            continue;
        }
        // integer relations are exact homogeneous polynomials, so the bound
        // may be raised to keep degree-d products alive
        let r = r.with_var_bound(r.var_bound().max(d));
        for mono in degree_basis(p, d - w) {
            let mono_series = TruncatedSeries::from_terms(
                gen_vars.clone(),
                r.var_bound(),
                r.coeff_bound(),
                [(mono, CoeffPoly::one(r.coeff_bound()))],
            );
            let prod = mono_series.mul(&r.embedded(mono_series.vars()));
            rows.push(series_vector(p, &prod, d)?);
        }
    }
    Ok(rows)
}

/// Exact graded component of an integer presentation: free rank plus
/// invariant-factor torsion of the degree-`d` piece.
pub fn graded_component(p: &GradedPresentation, d: u32) -> Result<GradedComponent> {
    let indices: Vec<usize> = (0..p.relations.len()).collect();
    let rows = relation_rows(p, d, &indices)?;
    let basis_size = degree_basis(p, d).len();
    let snf: SmithInvariants = snf::smith_normal_form(rows);
    Ok(GradedComponent {
        degree: d,
        rank: basis_size - snf.rank,
        torsion: snf.torsion(),
    })
}

/// Tensor product of presentations over a common coefficient ring:
/// generators and relations concatenate, with colliding generator names of
/// the right factor renamed by the smallest free numeric suffix.
pub fn kunneth(a: &GradedPresentation, b: &GradedPresentation) -> Result<GradedPresentation> {
    if a.coefficient != b.coefficient {
        return Err(Error::InvalidParameters(
            "tensor factors must share a coefficient ring".into(),
        ));
    }
    let mut generators = a.generators.clone();
    let mut relations = a.relations.clone();
    let mut taken: Vec<String> = generators.iter().map(|(n, _)| n.clone()).collect();
    let mut b_relations = b.relations.clone();
    for (name, degree) in &b.generators {
        let fresh = if taken.iter().any(|t| t == name) {
            let mut k = 2;
            loop {
                let candidate = format!("{name}{k}");
                if !taken.contains(&candidate) {
                    break candidate;
                }
                k += 1;
            }
        } else {
            name.clone()
        };
        if fresh != *name {
            for r in &mut b_relations {
                *r = r.rename_var(name, &fresh);
            }
        }
        taken.push(fresh.clone());
        generators.push((fresh, *degree));
    }
    relations.extend(b_relations);
    let group = if a.generators.is_empty() {
        b.group.clone()
    } else if b.generators.is_empty() {
        a.group.clone()
    } else {
        format!("{}x{}", a.group, b.group)
    };
    GradedPresentation::new(a.coefficient.clone(), group, generators, relations)
}
