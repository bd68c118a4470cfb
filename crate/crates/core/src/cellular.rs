//! Cell decompositions of projective spaces, Grassmannians, and products,
//! and the free-module structure they induce.
//!
//! A space filtered by affine cells contributes one free module generator
//! per cell, in cohomological degree `ambient - dim(cell)`. Only degrees
//! and ranks are emitted: the splitting itself depends on choices.

use crate::{Error, Result};
use serde_json::{json, Value};
use std::fmt;

/// A space with a known affine cell decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    Projective(u32),
    /// `Grassmannian(k, n)`: k-planes in n-space.
    Grassmannian(u32, u32),
    Product(Box<Space>, Box<Space>),
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Projective(n) => write!(f, "p({n})"),
            Space::Grassmannian(k, n) => write!(f, "gr({k},{n})"),
            Space::Product(a, b) => write!(f, "{a} x {b}"),
        }
    }
}

/// A list of affine cells with dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellComplex {
    pub name: String,
    /// `(label, dimension)` pairs; labels unique.
    pub cells: Vec<(String, u32)>,
    pub ambient: u32,
}

/// Partitions fitting in a k-by-m box, largest part first.
fn box_partitions(k: u32, m: u32) -> Vec<Vec<u32>> {
    fn rec(rows: u32, cap: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rows == 0 {
            out.push(acc.clone());
            return;
        }
        for part in (0..=cap).rev() {
            acc.push(part);
            rec(rows - 1, part, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, m, &mut Vec::new(), &mut out);
    // drop trailing zeros for readable labels, keep one empty vec for the
    // zero partition
    out.into_iter()
        .map(|p| {
            let mut p = p;
            while p.last() == Some(&0) {
                p.pop();
            }
            p
        })
        .collect()
}

/// Build the cell decomposition of a supported space.
pub fn build_complex(space: &Space) -> Result<CellComplex> {
    match space {
        Space::Projective(n) => Ok(CellComplex {
            name: space.to_string(),
            cells: (0..=*n).map(|d| (format!("e{d}"), d)).collect(),
            ambient: *n,
        }),
        Space::Grassmannian(k, n) => {
            if k > n {
                return Err(Error::InvalidParameters(format!(
                    "gr({k},{n}) requires k <= n"
                )));
            }
            let m = n - k;
            let mut cells: Vec<(String, u32)> = box_partitions(*k, m)
                .into_iter()
                .map(|p| {
                    let size: u32 = p.iter().sum();
                    let label = if p.is_empty() {
                        "s[]".to_string()
                    } else {
                        let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                        format!("s[{}]", parts.join(","))
                    };
                    (label, size)
                })
                .collect();
            cells.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            Ok(CellComplex {
                name: space.to_string(),
                cells,
                ambient: k * m,
            })
        }
        Space::Product(a, b) => {
            let ca = build_complex(a)?;
            let cb = build_complex(b)?;
            let mut cells = Vec::with_capacity(ca.cells.len() * cb.cells.len());
            for (la, da) in &ca.cells {
                for (lb, db) in &cb.cells {
                    cells.push((format!("{la}|{lb}"), da + db));
                }
            }
            cells.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            Ok(CellComplex {
                name: space.to_string(),
                cells,
                ambient: ca.ambient + cb.ambient,
            })
        }
    }
}

/// Free-module structure: one generator per cell in cohomological degree
/// `ambient - dim`, plus the per-degree rank table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulePresentation {
    /// Cohomological generator degrees, ascending.
    pub generator_degrees: Vec<u32>,
    /// `ranks[d]` counts generators in degree `d`, for `0..=ambient`.
    pub ranks: Vec<usize>,
}

pub fn module_presentation(c: &CellComplex) -> ModulePresentation {
    let mut degrees: Vec<u32> = c.cells.iter().map(|(_, d)| c.ambient - d).collect();
    degrees.sort_unstable();
    let mut ranks = vec![0usize; c.ambient as usize + 1];
    for &d in &degrees {
        ranks[d as usize] += 1;
    }
    ModulePresentation {
        generator_degrees: degrees,
        ranks,
    }
}

impl CellComplex {
    pub fn to_json(&self) -> Value {
        let ranks = module_presentation(self).ranks;
        json!({
            "space": self.name,
            "cells": self.cells.iter()
                .map(|(l, d)| json!({"label": l, "dim": d}))
                .collect::<Vec<_>>(),
            "ranks": ranks,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let name = v
            .get("space")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("complex missing space".into()))?
            .to_string();
        let cells_json = v
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("complex missing cells".into()))?;
        let mut cells = Vec::new();
        let mut ambient = 0;
        for c in cells_json {
            let label = c
                .get("label")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("cell missing label".into()))?;
            let dim =
                c.get("dim")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("cell missing dim".into()))? as u32;
            ambient = ambient.max(dim);
            cells.push((label.to_string(), dim));
        }
        Ok(CellComplex {
            name,
            cells,
            ambient,
        })
    }
}

/// Parse a CLI space description: `p N`, `gr K N`, `prod <a> <b>` with
/// nested specs written `p:N` / `gr:K:N`.
pub fn parse_space(args: &[&str]) -> Result<Space> {
    fn parse_compact(s: &str) -> Result<Space> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["p", n] => Ok(Space::Projective(
                n.parse().map_err(|_| Error::Parse(s.into()))?,
            )),
            ["gr", k, n] => Ok(Space::Grassmannian(
                k.parse().map_err(|_| Error::Parse(s.into()))?,
                n.parse().map_err(|_| Error::Parse(s.into()))?,
            )),
            _ => Err(Error::Parse(format!("bad space spec {s}"))),
        }
    }
    match args {
        ["p", n] => Ok(Space::Projective(
            n.parse()
                .map_err(|_| Error::Parse(format!("bad dimension {n}")))?,
        )),
        ["gr", k, n] => Ok(Space::Grassmannian(
            k.parse()
                .map_err(|_| Error::Parse(format!("bad index {k}")))?,
            n.parse()
                .map_err(|_| Error::Parse(format!("bad dimension {n}")))?,
        )),
        ["prod", a, b] => Ok(Space::Product(
            Box::new(parse_compact(a)?),
            Box::new(parse_compact(b)?),
        )),
        _ => Err(Error::Parse(format!("unrecognized space {args:?}"))),
    }
}
