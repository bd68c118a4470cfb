//! Formal group law models and their series operations.
//!
//! Four built-in models share the interface: the universal-free model over
//! the `a[i,j]` generators (commutativity only), the universal-log model
//! `F = exp(log x + log y)` over the torsion-free ring `Z[m1, m2, ...]`
//! (associativity-exact), the additive model `x + y`, and the
//! multiplicative model `x + y + b*x*y`. The log model is the oracle for
//! identities the free model cannot certify: a free-model identity pushed
//! through the `a[i,j] -> log image` homomorphism must agree with the
//! direct log-model computation.

use crate::coeff::{CoeffGenerator, CoeffPoly};
use crate::series::{SeriesVar, TruncatedSeries};
use crate::{Error, Result};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;

/// Which formal group law a model realizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FGLKind {
    UniversalFree,
    UniversalLog,
    Additive,
    Multiplicative(CoeffGenerator),
    Custom(String),
}

impl fmt::Display for FGLKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FGLKind::UniversalFree => write!(f, "universal-free"),
            FGLKind::UniversalLog => write!(f, "universal-log"),
            FGLKind::Additive => write!(f, "additive"),
            FGLKind::Multiplicative(_) => write!(f, "multiplicative"),
            FGLKind::Custom(tag) => write!(f, "custom({tag})"),
        }
    }
}

/// A two-variable formal sum `F(x, y)` truncated at a weighted degree bound,
/// tagged with the law it realizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FGLModel {
    kind: FGLKind,
    f: TruncatedSeries,
    var_bound: u32,
    coeff_bound: u32,
}

fn xv() -> SeriesVar {
    SeriesVar::w1("x")
}

fn yv() -> SeriesVar {
    SeriesVar::w1("y")
}

impl FGLModel {
    /// `F = x + y + sum a[i,j] x^i y^j` with `a[j,i]` identified to `a[i,j]`.
    pub fn universal_free(var_bound: u32, coeff_bound: u32) -> Result<Self> {
        Self::check_bounds(var_bound, coeff_bound)?;
        let mut terms = vec![
            (vec![1, 0], CoeffPoly::one(coeff_bound)),
            (vec![0, 1], CoeffPoly::one(coeff_bound)),
        ];
        for i in 1..=var_bound {
            for j in 1..=var_bound {
                if i + j > var_bound {
                    continue;
                }
                terms.push((
                    vec![i, j],
                    CoeffPoly::generator(CoeffGenerator::a(i, j), coeff_bound),
                ));
            }
        }
        let f = TruncatedSeries::from_terms(vec![xv(), yv()], var_bound, coeff_bound, terms);
        Ok(FGLModel {
            kind: FGLKind::UniversalFree,
            f,
            var_bound,
            coeff_bound,
        })
    }

    /// `F = exp(log x + log y)` with `log t = t + m1 t^2 + m2 t^3 + ...`.
    pub fn universal_log(var_bound: u32, coeff_bound: u32) -> Result<Self> {
        Self::check_bounds(var_bound, coeff_bound)?;
        let log = Self::log_series(var_bound, coeff_bound);
        let exp = log.compositional_inverse()?;
        let lx = log.rename_var("t", "x");
        let ly = log.rename_var("t", "y");
        let t = SeriesVar::w1("t");
        let f = exp.substitute(&[(t, lx.add(&ly))])?;
        Ok(FGLModel {
            kind: FGLKind::UniversalLog,
            f,
            var_bound,
            coeff_bound,
        })
    }

    /// The logarithm `t + m1 t^2 + m2 t^3 + ...` truncated at the bound.
    pub fn log_series(var_bound: u32, coeff_bound: u32) -> TruncatedSeries {
        let t = TruncatedSeries::variable(SeriesVar::w1("t"), var_bound, coeff_bound);
        let mut log = t.clone();
        for k in 1..var_bound {
            let mk = CoeffPoly::generator(CoeffGenerator::m(k), coeff_bound);
            log = log.add(&t.pow(k + 1).scale(&mk));
        }
        log
    }

    pub fn additive(var_bound: u32, coeff_bound: u32) -> Result<Self> {
        Self::check_bounds(var_bound, coeff_bound)?;
        let x = TruncatedSeries::variable(xv(), var_bound, coeff_bound);
        let y = TruncatedSeries::variable(yv(), var_bound, coeff_bound);
        Ok(FGLModel {
            kind: FGLKind::Additive,
            f: x.add(&y),
            var_bound,
            coeff_bound,
        })
    }

    /// `F = x + y + b*x*y` for the degree -1 parameter `b`.
    pub fn multiplicative(var_bound: u32, coeff_bound: u32) -> Result<Self> {
        Self::check_bounds(var_bound, coeff_bound)?;
        let beta = CoeffGenerator::named("b", -1);
        let x = TruncatedSeries::variable(xv(), var_bound, coeff_bound);
        let y = TruncatedSeries::variable(yv(), var_bound, coeff_bound);
        let f = x.add(&y).add(
            &x.mul(&y)
                .scale(&CoeffPoly::generator(beta.clone(), coeff_bound)),
        );
        Ok(FGLModel {
            kind: FGLKind::Multiplicative(beta),
            f,
            var_bound,
            coeff_bound,
        })
    }

    /// Look up a model by its CLI tag.
    pub fn by_name(name: &str, var_bound: u32, coeff_bound: u32) -> Result<Self> {
        match name {
            "free" => Self::universal_free(var_bound, coeff_bound),
            "log" => Self::universal_log(var_bound, coeff_bound),
            "add" | "additive" => Self::additive(var_bound, coeff_bound),
            "mult" | "multiplicative" => Self::multiplicative(var_bound, coeff_bound),
            other => Err(Error::UnsupportedModel(other.to_string())),
        }
    }

    fn check_bounds(var_bound: u32, coeff_bound: u32) -> Result<()> {
        if var_bound < 1 {
            return Err(Error::BoundTooSmall(var_bound));
        }
        if coeff_bound < 1 {
            return Err(Error::BoundTooSmall(coeff_bound));
        }
        Ok(())
    }

    pub fn kind(&self) -> &FGLKind {
        &self.kind
    }

    /// The formal sum `F(x, y)` itself.
    pub fn formal_series(&self) -> &TruncatedSeries {
        &self.f
    }

    pub fn var_bound(&self) -> u32 {
        self.var_bound
    }

    pub fn coeff_bound(&self) -> u32 {
        self.coeff_bound
    }

    /// `f +_F g`: both inputs must have zero constant term.
    pub fn formal_sum(&self, f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.f.substitute(&[(xv(), f.clone()), (yv(), g.clone())])
    }

    /// The n-fold formal sum `[n](x)`; `[0] = 0`, negative `n` composes with
    /// the inverse series.
    pub fn n_series(&self, n: i64) -> Result<TruncatedSeries> {
        let x = TruncatedSeries::variable(xv(), self.var_bound, self.coeff_bound);
        if n == 0 {
            return Ok(TruncatedSeries::zero_over(
                vec![xv()],
                self.var_bound,
                self.coeff_bound,
            ));
        }
        let mut s = x.clone();
        for _ in 2..=n.unsigned_abs() {
            s = self.formal_sum(&x, &s)?;
        }
        if n < 0 {
            let inv = self.inverse_series()?;
            s = s.substitute(&[(xv(), inv)])?;
        }
        Ok(s)
    }

    /// The unique `i(x)` with `F(x, i(x)) = 0` up to the bound, found degree
    /// by degree.
    pub fn inverse_series(&self) -> Result<TruncatedSeries> {
        let x = TruncatedSeries::variable(xv(), self.var_bound, self.coeff_bound);
        let mut inv = x.neg();
        for e in 2..=self.var_bound {
            let r = self.formal_sum(&x, &inv)?;
            let ce = r.coeff_at(&[("x", e)]);
            if !ce.is_zero() {
                inv = inv.sub(&x.pow(e).scale(&ce));
            }
        }
        Ok(inv)
    }

    /// Residual checks for unitality, commutativity, and associativity.
    pub fn check_axioms(&self) -> Result<AxiomReport> {
        let d = self.var_bound;
        let dc = self.coeff_bound;
        let x = TruncatedSeries::variable(xv(), d, dc);
        let y = TruncatedSeries::variable(yv(), d, dc);
        let z = TruncatedSeries::variable(SeriesVar::w1("z"), d, dc);
        let zero = TruncatedSeries::zero(d, dc);

        let left_unit = self.formal_sum(&x, &zero)?.sub(&x);
        let right_unit = self.formal_sum(&zero, &y)?.sub(&y);
        let comm = self.f.sub(&self.f.swap_vars("x", "y"));
        let fxy = self.f.clone();
        let fyz = self.f.substitute(&[(xv(), y.clone()), (yv(), z.clone())])?;
        let assoc_l = self.f.substitute(&[(xv(), fxy), (yv(), z.clone())])?;
        let assoc_r = self.f.substitute(&[(yv(), fyz)])?;
        let assoc = assoc_l.sub(&assoc_r);

        let entry = |axiom: &str, residual: &TruncatedSeries| AxiomCheck {
            axiom: axiom.to_string(),
            residual_degree: residual.min_weighted_degree(),
        };
        Ok(AxiomReport {
            checks: vec![
                entry("left-unit", &left_unit),
                entry("right-unit", &right_unit),
                entry("commutativity", &comm),
                entry("associativity", &assoc),
            ],
        })
    }

    /// Map all coefficients through a generator homomorphism, producing a
    /// custom model.
    pub fn specialize(
        &self,
        images: &dyn Fn(&CoeffGenerator) -> Option<CoeffPoly>,
        check_grading: bool,
    ) -> Result<FGLModel> {
        let f = self.f.apply_hom(images, check_grading)?;
        Ok(FGLModel {
            kind: FGLKind::Custom(format!("specialized({})", self.kind)),
            f,
            var_bound: self.var_bound,
            coeff_bound: self.coeff_bound,
        })
    }
}

/// Images of the `a[i,j]` generators inside the log model: the coefficient
/// of `x^i y^j` in `exp(log x + log y)`. The identity on `m[k]`.
pub fn log_images(var_bound: u32, coeff_bound: u32) -> Result<BTreeMap<CoeffGenerator, CoeffPoly>> {
    let log_model = FGLModel::universal_log(var_bound, coeff_bound)?;
    let mut map = BTreeMap::new();
    for i in 1..=var_bound {
        for j in i..=var_bound {
            if i + j > var_bound {
                continue;
            }
            let c = log_model.formal_series().coeff_at(&[("x", i), ("y", j)]);
            map.insert(CoeffGenerator::a(i, j), c);
        }
    }
    Ok(map)
}

/// Homomorphism closure over [`log_images`]: `a[i,j]` to its log image,
/// `m[k]` to itself.
pub fn log_image_hom(
    images: &BTreeMap<CoeffGenerator, CoeffPoly>,
    coeff_bound: u32,
) -> impl Fn(&CoeffGenerator) -> Option<CoeffPoly> + '_ {
    move |g: &CoeffGenerator| match g {
        CoeffGenerator::A(_, _) => images.get(g).cloned(),
        CoeffGenerator::M(_) => Some(CoeffPoly::generator(g.clone(), coeff_bound)),
        CoeffGenerator::Named(_, _) => None,
    }
}

/// One axiom residual: `None` means the residual vanished, otherwise the
/// lowest weighted degree of failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: String,
    pub residual_degree: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.residual_degree.is_none())
    }

    pub fn residual_degree(&self, axiom: &str) -> Option<u32> {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .and_then(|c| c.residual_degree)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.checks
                .iter()
                .map(|c| json!({ "axiom": c.axiom, "residual_degree": c.residual_degree }))
                .collect(),
        )
    }

    pub fn to_text(&self) -> String {
        self.checks
            .iter()
            .map(|c| match c.residual_degree {
                None => format!("{}: ok", c.axiom),
                Some(d) => format!("{}: fails at degree {}", c.axiom, d),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}
