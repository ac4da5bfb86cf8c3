//! JSON model files.
//!
//! ```json
//! {
//!   "name": "rl_circuit",
//!   "n": 2, "m": 1,
//!   "f": ["(-x1 + x2)/(1 + x1^2)", "x1 - x2"],
//!   "B": [["0"], ["1"]],
//!   "Q": [["3 + 4*x1^2 + x1^4", "0"], ["0", "1"]],
//!   "X": [["2*(1 + x1^2)^2", "1 + x1^2"], ["1 + x1^2", "1"]]
//! }
//! ```
//!
//! Matrices are arrays of rows of expression strings; complex entries are
//! written `"re @ im"`. `A` defaults to `∂f/∂x` and `R` to `BBᵀ` when `B` is
//! given. Symbols listed in `params` are opaque: they may appear in `U`,
//! `V`, and eigenpairs, are sampled as free values in zero tests, and cannot
//! be differentiated.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contraction::ControlModel;
use crate::eigen::{EigenPair, Side};
use crate::error::{Error, Result};
use crate::expr::{parse_with, Expr, ParseContext, ZeroTestPolicy};
use crate::field::{CExpr, CMatrix};
use crate::grid::Grid;
use crate::lieop::VectorField;
use crate::riccati::{RiccatiData, SubspaceBasis};

type Rows = Vec<Vec<String>>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub f: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Rows>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Rows>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Rows>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rows>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Rows>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Rows>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Rows>,
    /// Diagonal of `Λ`.
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigenpairs: Vec<EigenPairSpec>,
    /// Controller components `k₁..kₘ` with `u = −k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<Vec<String>>,
    /// Candidate vectors certifying that `U` is singular.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses_u: Vec<WitnessSpec>,
    /// Candidate vectors certifying that `V` is singular.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses_v: Vec<WitnessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenPairSpec {
    pub side: Side,
    pub lambda: String,
    pub vector: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub lambda: String,
    pub vector: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, alias = "N", skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// `"xmin,xmax,steps;ymin,ymax,steps"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

/// A parsed and dimension-checked model.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub n: usize,
    pub m: Option<usize>,
    pub context: ParseContext,
    pub f: VectorField,
    pub a: Option<CMatrix>,
    pub r: Option<CMatrix>,
    pub q: Option<CMatrix>,
    pub b: Option<CMatrix>,
    pub x: Option<CMatrix>,
    pub u: Option<CMatrix>,
    pub v: Option<CMatrix>,
    pub lambda: Option<Vec<CExpr>>,
    pub eigenpairs: Vec<EigenPair>,
    pub controller: Option<Vec<Expr>>,
    pub witnesses_u: Vec<(CExpr, CMatrix)>,
    pub witnesses_v: Vec<(CExpr, CMatrix)>,
    pub policy: ZeroTestPolicy,
    pub grid: Option<Grid>,
}

fn in_field(name: &str, e: Error) -> Error {
    match e {
        Error::Parse(p) => Error::Model(format!("{name}: {p}")),
        other => other,
    }
}

fn matrix(name: &str, rows: &Rows, shape: (usize, usize), ctx: &ParseContext) -> Result<CMatrix> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::Model(format!("{name} must be {}x{}", shape.0, shape.1)));
    }
    CMatrix::parse_rows(rows, ctx).map_err(|e| in_field(name, e))
}

fn column(name: &str, entries: &[String], len: usize, ctx: &ParseContext) -> Result<CMatrix> {
    if entries.len() != len {
        return Err(Error::Model(format!("{name} must have {len} entries")));
    }
    let values = entries
        .iter()
        .map(|s| CExpr::parse(s, ctx))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| in_field(name, e))?;
    CMatrix::column_vector(values)
}

fn scalar(name: &str, s: &str, ctx: &ParseContext) -> Result<CExpr> {
    CExpr::parse(s, ctx).map_err(|e| in_field(name, e))
}

impl Model {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Model(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(format!("invalid model JSON: {e}")))?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        let n = file.n;
        if n == 0 {
            return Err(Error::Model("n must be positive".into()));
        }
        for p in &file.params {
            let valid = p.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || p == "t" || (p.starts_with('x') && p[1..].chars().all(|c| c.is_ascii_digit())) {
                return Err(Error::Model(format!("invalid opaque symbol name \"{p}\"")));
            }
        }
        let ctx = ParseContext::with_params(n, file.params.iter().cloned());
        let real_ctx = ParseContext::new(n);
        if file.f.len() != n {
            return Err(Error::Model(format!("f must have {n} components")));
        }
        let f = VectorField::parse(&file.f, &real_ctx).map_err(|e| in_field("f", e))?;
        let square = (n, n);
        let b = match &file.b {
            Some(rows) => {
                let m = rows.first().map_or(0, Vec::len);
                if m == 0 {
                    return Err(Error::Model("B needs at least one column".into()));
                }
                if file.m.is_some_and(|mm| mm != m) {
                    return Err(Error::Model(format!("B has {m} columns but m = {}", file.m.unwrap_or(0))));
                }
                Some(matrix("B", rows, (n, m), &real_ctx)?)
            }
            None => None,
        };
        let m = file.m.or(b.as_ref().map(CMatrix::cols));
        let opt = |name: &str, rows: &Option<Rows>, ctx: &ParseContext| {
            rows.as_ref().map(|r| matrix(name, r, square, ctx)).transpose()
        };
        let lambda = match &file.lambda {
            Some(vals) => {
                if vals.len() != n {
                    return Err(Error::Model(format!("Lambda must have {n} diagonal entries")));
                }
                Some(vals.iter().map(|s| scalar("Lambda", s, &ctx)).collect::<Result<Vec<_>>>()?)
            }
            None => None,
        };
        let eigenpairs = file
            .eigenpairs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let name = format!("eigenpairs[{i}]");
                let pair = EigenPair {
                    side: p.side,
                    value: scalar(&name, &p.lambda, &ctx)?,
                    vector: column(&name, &p.vector, 2 * n, &ctx)?,
                    label: p.label.clone(),
                };
                Ok(pair)
            })
            .collect::<Result<Vec<_>>>()?;
        let controller = match &file.controller {
            Some(k) => {
                if m.is_some_and(|m| m != k.len()) {
                    return Err(Error::Model("controller length differs from m".into()));
                }
                Some(
                    k.iter()
                        .map(|s| parse_with(s, &real_ctx).map_err(|e| in_field("controller", e.into())))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            None => None,
        };
        let witnesses = |name: &str, list: &[WitnessSpec]| {
            list.iter()
                .map(|w| Ok((scalar(name, &w.lambda, &ctx)?, column(name, &w.vector, n, &ctx)?)))
                .collect::<Result<Vec<_>>>()
        };
        let mut policy = ZeroTestPolicy::default();
        let mut grid = None;
        if let Some(p) = &file.policy {
            if let Some(v) = p.seed {
                policy.seed = v;
            }
            if let Some(v) = p.samples {
                policy.samples = v;
            }
            if let Some(v) = p.tol_abs {
                policy.tol_abs = v;
            }
            if let Some(v) = p.tol_rel {
                policy.tol_rel = v;
            }
            if let Some(v) = p.center {
                policy.center = v;
            }
            if let Some(v) = p.half_width {
                policy.half_width = v;
            }
            if let Some(g) = &p.grid {
                grid = Some(g.parse::<Grid>()?);
            }
            policy.validate().map_err(|e| Error::Model(format!("policy: {e}")))?;
        }
        Ok(Self {
            name: file.name.clone(),
            n,
            m,
            f,
            a: opt("A", &file.a, &real_ctx)?,
            r: opt("R", &file.r, &real_ctx)?,
            q: opt("Q", &file.q, &real_ctx)?,
            x: opt("X", &file.x, &real_ctx)?,
            u: opt("U", &file.u, &ctx)?,
            v: opt("V", &file.v, &ctx)?,
            b,
            lambda,
            eigenpairs,
            controller,
            witnesses_u: witnesses("witnesses_u", &file.witnesses_u)?,
            witnesses_v: witnesses("witnesses_v", &file.witnesses_v)?,
            policy,
            grid,
            context: ctx,
        })
    }

    /// `A`, or `∂f/∂x` when only `B` is given.
    pub fn a_matrix(&self) -> Result<CMatrix> {
        match (&self.a, &self.b) {
            (Some(a), _) => Ok(a.clone()),
            (None, Some(_)) => self.f.jacobian(),
            (None, None) => Err(Error::Model("model needs A, or B to default A to df/dx".into())),
        }
    }

    /// `R`, or `BBᵀ` when only `B` is given.
    pub fn r_matrix(&self) -> Result<CMatrix> {
        match (&self.r, &self.b) {
            (Some(r), _) => Ok(r.clone()),
            (None, Some(b)) => b.mul(&b.transpose()),
            (None, None) => Err(Error::Model("model needs R, or B to default R to B B^T".into())),
        }
    }

    pub fn q_matrix(&self) -> Result<CMatrix> {
        self.q.clone().ok_or_else(|| Error::Model("model has no Q".into()))
    }

    pub fn riccati_data(&self, policy: &ZeroTestPolicy) -> Result<RiccatiData> {
        RiccatiData::new(self.a_matrix()?, self.r_matrix()?, self.q_matrix()?, self.f.clone(), policy)
    }

    pub fn basis(&self) -> Result<SubspaceBasis> {
        let (Some(u), Some(v)) = (&self.u, &self.v) else {
            return Err(Error::Model("model needs U and V".into()));
        };
        let b = SubspaceBasis::new(u.clone(), v.clone())?;
        match &self.lambda {
            Some(l) => b.with_eigenvalues(l.clone()),
            None => Ok(b),
        }
    }

    pub fn control_model(&self, policy: &ZeroTestPolicy) -> Result<ControlModel> {
        let b = self.b.clone().ok_or_else(|| Error::Model("model has no B".into()))?;
        let x = self.x.clone().ok_or_else(|| Error::Model("model has no X".into()))?;
        ControlModel::new(self.f.clone(), b, x, self.q_matrix()?, policy)
    }
}
