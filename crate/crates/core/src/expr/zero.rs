//! Deciding equality in the function field.
//!
//! An expression is zero exactly when its canonical form is the literal
//! zero. When canonicalization leaves a nonzero remainder (floating-point
//! data lifted to rationals, elementary-function identities the canonical
//! form does not see), the decision falls back to evaluation at random
//! points: a nonzero rational function vanishes on a random point of a box
//! with probability zero.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Expr, Point, Var};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x0D1F_F5EE_D5EE_D001;

/// Parameters of every probabilistic zero decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZeroTestPolicy {
    /// Number of finite sample points required.
    pub samples: usize,
    /// Center of the sampling box in every coordinate.
    pub center: f64,
    /// Half-width of the sampling box.
    pub half_width: f64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Resampling attempts per point when evaluation is non-finite.
    pub retries: usize,
    pub seed: u64,
}

impl Default for ZeroTestPolicy {
    fn default() -> Self {
        Self {
            samples: 20,
            center: 0.0,
            half_width: 1.0,
            tol_abs: 1e-9,
            tol_rel: 1e-9,
            retries: 8,
            seed: DEFAULT_SEED,
        }
    }
}

impl ZeroTestPolicy {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Precondition("sample count must be at least 1".into()));
        }
        if !(self.tol_abs > 0.0 && self.tol_rel > 0.0) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        if !(self.half_width > 0.0) || !self.center.is_finite() {
            return Err(Error::Precondition("sampling box must be non-degenerate".into()));
        }
        if self.retries == 0 {
            return Err(Error::Precondition("retry cap must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Random point in the sampling box covering `vars`.
    pub(crate) fn sample_point(&self, vars: &[Var], rng: &mut impl Rng) -> Point<f64> {
        let n = vars
            .iter()
            .filter_map(|v| match v {
                Var::State(i) => Some(*i as usize),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut draw = || self.center + self.half_width * rng.gen_range(-1.0..=1.0);
        let x = (0..n).map(|_| draw()).collect();
        let t = draw();
        let mut p = Point::new(x, t);
        for v in vars {
            if let Var::Param(name) = v {
                p.params.insert(name.clone(), draw());
            }
        }
        p
    }
}

/// Outcome of a zero test together with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCertificate {
    pub zero: bool,
    /// Decided by canonicalization rather than sampling.
    pub exact: bool,
    /// Finite sample points evaluated.
    pub points: usize,
    /// Largest absolute value observed.
    pub max_abs: f64,
    /// A point where the value exceeded the tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, f64>>,
}

impl ZeroCertificate {
    pub(crate) fn exact_zero() -> Self {
        Self {
            zero: true,
            exact: true,
            points: 0,
            max_abs: 0.0,
            witness: None,
        }
    }
}

fn describe(p: &Point<f64>, vars: &[Var]) -> BTreeMap<String, f64> {
    vars.iter()
        .filter_map(|v| p.value(v).map(|x| (v.to_string(), x)))
        .collect()
}

/// Decides whether `e` is the zero element of the function field.
pub fn is_zero(e: &Expr, policy: &ZeroTestPolicy) -> Result<ZeroCertificate> {
    policy.validate()?;
    let canonical = e.cached_canon();
    if canonical.is_some_and(|r| r.is_zero()) {
        return Ok(ZeroCertificate::exact_zero());
    }
    let target = canonical.map_or_else(|| e.clone(), |r| r.to_expr());
    let vars: Vec<Var> = target.vars().into_iter().collect();
    let mut rng = policy.rng();
    let mut max_abs = 0.0f64;
    for i in 0..policy.samples {
        let mut hit = None;
        for _ in 0..policy.retries {
            let p = policy.sample_point(&vars, &mut rng);
            if let Some(vs) = target.eval_scaled(&p) {
                hit = Some((p, vs));
                break;
            }
        }
        let Some((p, (value, scale))) = hit else {
            return Err(Error::Inconclusive {
                finite: i,
                required: policy.samples,
            });
        };
        let mag = value.abs();
        max_abs = max_abs.max(mag);
        if mag > policy.tol_abs + policy.tol_rel * scale {
            return Ok(ZeroCertificate {
                zero: false,
                exact: false,
                points: i + 1,
                max_abs,
                witness: Some(describe(&p, &vars)),
            });
        }
    }
    Ok(ZeroCertificate {
        zero: true,
        exact: false,
        points: policy.samples,
        max_abs,
        witness: None,
    })
}
