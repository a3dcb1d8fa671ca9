//! JSON function-spec documents.
//!
//! ```json
//! {"op": "tilt", "a": [1, 0],
//!  "f": {"atom": "scaled_norm", "ell": 1, "center": [0, 0]}}
//! ```
//!
//! Atoms carry `"atom"` plus their parameters, combinators carry `"op"`, the
//! child under `"f"`, and their parameter. Unknown keys, missing keys and
//! keys that do not belong to the node kind are all errors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ConvexFunction, Node};
use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Box<NodeDoc>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, alias = "ℓ", skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
    #[serde(default, alias = "β", skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, alias = "λ", skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, alias = "μ", skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

/// Parameter keys, in declaration order, with presence tests.
const PARAMS: &[(&str, fn(&NodeDoc) -> bool)] = &[
    ("f", |d| d.f.is_some()),
    ("a", |d| d.a.is_some()),
    ("b", |d| d.b.is_some()),
    ("c", |d| d.c.is_some()),
    ("Q", |d| d.q.is_some()),
    ("ell", |d| d.ell.is_some()),
    ("center", |d| d.center.is_some()),
    ("p", |d| d.p.is_some()),
    ("radius", |d| d.radius.is_some()),
    ("lo", |d| d.lo.is_some()),
    ("hi", |d| d.hi.is_some()),
    ("beta", |d| d.beta.is_some()),
    ("t", |d| d.t.is_some()),
    ("lambda", |d| d.lambda.is_some()),
    ("mu", |d| d.mu.is_some()),
];

fn allowed_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "affine" => &["a", "c"],
        "quadratic" => &["Q", "b", "c"],
        "scaled_norm" => &["ell", "center"],
        "indicator_point" => &["p"],
        "indicator_ball" | "support_ball" => &["center", "radius"],
        "indicator_box" | "support_box" => &["lo", "hi"],
        "indicator_halfspace" => &["a", "beta"],
        "tilt" => &["f", "a"],
        "translate" => &["f", "t"],
        "add_const" => &["f", "c"],
        "envelope" => &["f", "lambda"],
        "regularize" => &["f", "mu"],
        _ => return None,
    })
}

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("at {path}: {msg}"))
}

fn need<'a, T>(v: &'a Option<T>, path: &str, key: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| err(path, format!("missing key \"{key}\"")))
}

fn vector(v: &Option<Vec<f64>>, path: &str, key: &str) -> Result<Point> {
    Point::new(need(v, path, key)?.clone()).map_err(|e| err(&format!("{path}.{key}"), e))
}

fn matrix(rows: &[Vec<f64>], path: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(err(
            &format!("{path}.Q[{i}]"),
            format!("row has {} entries, matrix needs {n}", r.len()),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl NodeDoc {
    pub fn to_function(&self) -> Result<ConvexFunction> {
        self.build("$")
    }

    fn build(&self, path: &str) -> Result<ConvexFunction> {
        let kind = match (&self.atom, &self.op) {
            (Some(a), None) => a.as_str(),
            (None, Some(o)) => o.as_str(),
            (Some(_), Some(_)) => return Err(err(path, "node has both \"atom\" and \"op\"")),
            (None, None) => return Err(err(path, "node needs \"atom\" or \"op\"")),
        };
        let allowed = allowed_keys(kind).ok_or_else(|| err(path, format!("unknown kind \"{kind}\"")))?;
        let is_atom = self.atom.is_some();
        if is_atom && allowed.contains(&"f") || !is_atom && !allowed.contains(&"f") {
            let which = if is_atom { "atom" } else { "op" };
            return Err(err(path, format!("\"{kind}\" is not a valid {which}")));
        }
        for (key, present) in PARAMS {
            if present(self) && !allowed.contains(key) {
                return Err(err(path, format!("key \"{key}\" does not belong to \"{kind}\"")));
            }
        }
        let with_ctx = |r: Result<ConvexFunction>| r.map_err(|e| match e {
            Error::Parse(_) => e,
            other => err(path, other),
        });
        let child = || -> Result<ConvexFunction> { need(&self.f, path, "f")?.build(&format!("{path}.f")) };

        with_ctx(match kind {
            "affine" => ConvexFunction::affine(vector(&self.a, path, "a")?, *need(&self.c, path, "c")?),
            "quadratic" => {
                let b = vector(&self.b, path, "b")?;
                let q = matrix(need(&self.q, path, "Q")?, path)?;
                ConvexFunction::quadratic(q, b, *need(&self.c, path, "c")?)
            }
            "scaled_norm" => ConvexFunction::scaled_norm(
                *need(&self.ell, path, "ell")?,
                vector(&self.center, path, "center")?,
            ),
            "indicator_point" => ConvexFunction::indicator_point(vector(&self.p, path, "p")?),
            "indicator_ball" => ConvexFunction::indicator_ball(
                vector(&self.center, path, "center")?,
                *need(&self.radius, path, "radius")?,
            ),
            "indicator_box" => {
                ConvexFunction::indicator_box(vector(&self.lo, path, "lo")?, vector(&self.hi, path, "hi")?)
            }
            "indicator_halfspace" => ConvexFunction::indicator_halfspace(
                vector(&self.a, path, "a")?,
                *need(&self.beta, path, "beta")?,
            ),
            "support_ball" => ConvexFunction::support_ball(
                vector(&self.center, path, "center")?,
                *need(&self.radius, path, "radius")?,
            ),
            "support_box" => {
                ConvexFunction::support_box(vector(&self.lo, path, "lo")?, vector(&self.hi, path, "hi")?)
            }
            "tilt" => child()?.tilt(vector(&self.a, path, "a")?),
            "translate" => child()?.translate(vector(&self.t, path, "t")?),
            "add_const" => child()?.add_const(*need(&self.c, path, "c")?),
            "envelope" => child()?.envelope(*need(&self.lambda, path, "lambda")?),
            "regularize" => child()?.regularize(*need(&self.mu, path, "mu")?),
            _ => unreachable!("kind validated above"),
        })
    }

    pub fn from_function(f: &ConvexFunction) -> Result<NodeDoc> {
        let v = |p: &Point| Some(p.to_vec());
        let atom = |name: &str| NodeDoc {
            atom: Some(name.to_string()),
            ..NodeDoc::default()
        };
        let op = |name: &str, child: &ConvexFunction| -> Result<NodeDoc> {
            Ok(NodeDoc {
                op: Some(name.to_string()),
                f: Some(Box::new(NodeDoc::from_function(child)?)),
                ..NodeDoc::default()
            })
        };
        Ok(match f.node() {
            Node::Affine { a, c } => NodeDoc { a: v(a), c: Some(*c), ..atom("affine") },
            Node::Quadratic { q, b, c } => NodeDoc {
                q: Some((0..q.nrows()).map(|i| q.row(i).iter().copied().collect()).collect()),
                b: v(b),
                c: Some(*c),
                ..atom("quadratic")
            },
            Node::ScaledNorm { ell, center } => NodeDoc {
                ell: Some(*ell),
                center: v(center),
                ..atom("scaled_norm")
            },
            Node::IndicatorPoint { p } => NodeDoc { p: v(p), ..atom("indicator_point") },
            Node::IndicatorBall { center, radius } => NodeDoc {
                center: v(center),
                radius: Some(*radius),
                ..atom("indicator_ball")
            },
            Node::IndicatorBox { lo, hi } => NodeDoc { lo: v(lo), hi: v(hi), ..atom("indicator_box") },
            Node::IndicatorHalfspace { a, beta } => NodeDoc {
                a: v(a),
                beta: Some(*beta),
                ..atom("indicator_halfspace")
            },
            Node::SupportBall { center, radius } => NodeDoc {
                center: v(center),
                radius: Some(*radius),
                ..atom("support_ball")
            },
            Node::SupportBox { lo, hi } => NodeDoc { lo: v(lo), hi: v(hi), ..atom("support_box") },
            Node::Tilt { f, a } => NodeDoc { a: v(a), ..op("tilt", f)? },
            Node::Translate { f, t } => NodeDoc { t: v(t), ..op("translate", f)? },
            Node::AddConst { f, c } => NodeDoc { c: Some(*c), ..op("add_const", f)? },
            Node::Envelope { f, lambda } => NodeDoc {
                lambda: Some(*lambda),
                ..op("envelope", f)?
            },
            Node::Regularize { f, mu } => NodeDoc { mu: Some(*mu), ..op("regularize", f)? },
        })
    }
}

impl ConvexFunction {
    /// Parses a JSON function-spec document. Syntax errors report line and
    /// column; semantic errors report a `$.f.f`-style path to the node.
    pub fn from_json_str(s: &str) -> Result<ConvexFunction> {
        let doc: NodeDoc = serde_json::from_str(s).map_err(|e| {
            let msg = e.to_string();
            let pos = format!(" at line {} column {}", e.line(), e.column());
            let msg = msg.strip_suffix(&pos).unwrap_or(&msg);
            Error::Parse(format!("line {} column {}: {msg}", e.line(), e.column()))
        })?;
        doc.to_function()
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = NodeDoc::from_function(self)?;
        serde_json::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))
    }
}
