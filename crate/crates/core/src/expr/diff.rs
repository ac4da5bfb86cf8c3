use super::{Expr, Func, Node, Var};
use crate::error::{Error, Result};

impl Expr {
    /// Exact partial derivative with respect to `v`.
    ///
    /// Fails on opaque symbols other than `v` itself, whose dependence on the
    /// remaining variables is unknown.
    pub fn diff(&self, v: &Var) -> Result<Expr> {
        Ok(match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(w) => {
                if w == v {
                    Expr::one()
                } else if let Var::Param(name) = w {
                    return Err(Error::OpaqueSymbol(name.to_string()));
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff(v)? + b.diff(v)?,
            Node::Mul(a, b) => a.diff(v)? * b + a * b.diff(v)?,
            Node::Div(a, b) => {
                let (da, db) = (a.diff(v)?, b.diff(v)?);
                if db.is_literal_zero() {
                    da / b
                } else {
                    (da * b - a * db) / b.powi(2)
                }
            }
            Node::Pow(a, k) => Expr::int(i64::from(*k)) * a.powi(k - 1) * a.diff(v)?,
            Node::Neg(a) => -a.diff(v)?,
            Node::Apply(f, a) => {
                let da = a.diff(v)?;
                if da.is_literal_zero() {
                    return Ok(Expr::zero());
                }
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => Expr::one() / (Expr::int(2) * a.sqrt()),
                };
                outer * da
            }
        })
    }
}
