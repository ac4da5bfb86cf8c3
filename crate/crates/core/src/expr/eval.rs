use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::ToPrimitive;

use super::{Expr, Func, Node, Var};
use crate::Real;

/// Evaluation point: state coordinates, time, and values for opaque symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<F> {
    pub x: Vec<F>,
    pub t: F,
    pub params: BTreeMap<Arc<str>, F>,
}

impl<F: Real> Point<F> {
    pub fn new(x: Vec<F>, t: F) -> Self {
        Self {
            x,
            t,
            params: BTreeMap::new(),
        }
    }

    pub fn value(&self, v: &Var) -> Option<F> {
        match v {
            Var::State(i) => self.x.get(*i as usize - 1).copied(),
            Var::Time => Some(self.t),
            Var::Param(name) => self.params.get(name).copied(),
        }
    }
}

fn finite<F: Real>(v: F) -> Option<F> {
    v.is_finite().then_some(v)
}

fn rational<F: Real>(c: &crate::Rational) -> Option<F> {
    F::from_f64(c.to_f64()?)
}

impl Expr {
    /// Floating-point value at `p`; `None` marks a non-finite result
    /// (a pole, a domain violation, overflow, or a missing coordinate).
    pub fn eval<F: Real>(&self, p: &Point<F>) -> Option<F> {
        match self.node() {
            Node::Const(c) => rational(c),
            Node::Var(v) => p.value(v),
            Node::Add(a, b) => finite(a.eval(p)? + b.eval(p)?),
            Node::Mul(a, b) => finite(a.eval(p)? * b.eval(p)?),
            Node::Div(a, b) => {
                let d = b.eval(p)?;
                if d.abs() <= F::min_positive_value() {
                    return None;
                }
                finite(a.eval(p)? / d)
            }
            Node::Pow(a, k) => {
                let base = a.eval(p)?;
                if *k < 0 && base.abs() <= F::min_positive_value() {
                    return None;
                }
                finite(base.powi(*k))
            }
            Node::Neg(a) => Some(-a.eval(p)?),
            Node::Apply(f, a) => {
                let v = a.eval(p)?;
                finite(match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => {
                        if v < F::zero() {
                            return None;
                        }
                        v.sqrt()
                    }
                })
            }
        }
    }

    /// Value together with the magnitude it would have without cancellation
    /// between summands; used to scale relative tolerances.
    pub fn eval_scaled<F: Real>(&self, p: &Point<F>) -> Option<(F, F)> {
        match self.node() {
            Node::Add(a, b) => {
                let (va, sa) = a.eval_scaled(p)?;
                let (vb, sb) = b.eval_scaled(p)?;
                Some((finite(va + vb)?, finite(sa + sb)?))
            }
            Node::Mul(a, b) => {
                let (va, sa) = a.eval_scaled(p)?;
                let (vb, sb) = b.eval_scaled(p)?;
                Some((finite(va * vb)?, finite(sa * sb)?))
            }
            Node::Div(a, b) => {
                let (va, sa) = a.eval_scaled(p)?;
                let vb = b.eval(p)?;
                if vb.abs() <= F::min_positive_value() {
                    return None;
                }
                Some((finite(va / vb)?, finite(sa / vb.abs())?))
            }
            Node::Pow(a, k) if *k > 0 => {
                let (va, sa) = a.eval_scaled(p)?;
                Some((finite(va.powi(*k))?, finite(sa.powi(*k))?))
            }
            Node::Neg(a) => {
                let (v, s) = a.eval_scaled(p)?;
                Some((-v, s))
            }
            _ => {
                let v = self.eval(p)?;
                Some((v, v.abs()))
            }
        }
    }
}
