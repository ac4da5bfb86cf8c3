//! The derivation `δ_f(a) = ∂a/∂t + Σ (∂a/∂xᵢ)·fᵢ` on scalars and matrices.

use crate::error::{Error, Result};
use crate::expr::{simplify, Expr, ParseContext, Point, Var};
use crate::field::{CExpr, CMatrix};
use crate::Real;

/// Real vector field `f(x, t)` on `n` states.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    n: usize,
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Dimension("vector field needs at least one component".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if let Some(Var::State(k)) = c.vars().into_iter().find(|v| matches!(v, Var::State(k) if *k as usize > n)) {
                return Err(Error::Dimension(format!(
                    "component {} of a {n}-state field uses x{k}",
                    i + 1
                )));
            }
        }
        Ok(Self { n, components })
    }

    pub fn parse<S: AsRef<str>>(components: &[S], ctx: &ParseContext) -> Result<Self> {
        Self::new(
            components
                .iter()
                .map(|s| Ok(crate::parse_with(s.as_ref(), ctx)?))
                .collect::<Result<_>>()?,
        )
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            components: vec![Expr::zero(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    /// Jacobian `∂f/∂x` as an `n×n` matrix over the field.
    pub fn jacobian(&self) -> Result<CMatrix> {
        let mut data = Vec::with_capacity(self.n * self.n);
        for fi in &self.components {
            for j in 0..self.n {
                data.push(CExpr::real(simplify(&fi.diff(&Var::State(j as u32 + 1))?)));
            }
        }
        CMatrix::new(self.n, self.n, data)
    }

    /// `f(x, t)` at a numeric point; `None` when some component is not finite.
    pub fn eval<F: Real>(&self, x: &[F], t: F) -> Option<Vec<F>> {
        let p = Point::new(x.to_vec(), t);
        self.eval_at(&p)
    }

    pub fn eval_at<F: Real>(&self, p: &Point<F>) -> Option<Vec<F>> {
        self.components.iter().map(|c| c.eval(p)).collect()
    }
}

/// `δ_f` of a real expression.
pub fn delta_f_real(a: &Expr, f: &VectorField) -> Result<Expr> {
    let vars = a.vars();
    let mut acc = Expr::zero();
    for v in &vars {
        match v {
            Var::Time => acc = acc + a.diff(v)?,
            Var::State(i) => {
                let i = *i as usize;
                if i > f.n {
                    return Err(Error::Dimension(format!("x{i} outside a {}-state field", f.n)));
                }
                acc = acc + a.diff(v)? * &f.components[i - 1];
            }
            Var::Param(name) => return Err(Error::OpaqueSymbol(name.to_string())),
        }
    }
    Ok(simplify(&acc))
}

/// `δ_f` of a field element, applied to real and imaginary parts.
pub fn delta_f(a: &CExpr, f: &VectorField) -> Result<CExpr> {
    Ok(CExpr::new(delta_f_real(&a.re, f)?, delta_f_real(&a.im, f)?))
}

/// Entrywise `δ_f`.
pub fn delta_f_matrix(m: &CMatrix, f: &VectorField) -> Result<CMatrix> {
    m.try_map(|e| delta_f(e, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;

    fn rl() -> VectorField {
        VectorField::parse(&["(-x1 + x2)/(1 + x1^2)", "x1 - x2"], &ParseContext::new(2)).unwrap()
    }

    fn c(s: &str) -> CExpr {
        CExpr::real(parse(s, 2).unwrap())
    }

    #[test]
    fn coordinates_map_to_components() {
        assert_eq!(delta_f(&c("x2"), &rl()).unwrap(), c("x1 - x2").simplify());
        assert_eq!(delta_f(&c("7/3"), &rl()).unwrap(), CExpr::zero());
    }

    #[test]
    fn product_by_hand() {
        let got = delta_f(&c("x1*x2"), &rl()).unwrap();
        let want = c("x2*(-x1 + x2)/(1 + x1^2) + x1*(x1 - x2)").simplify();
        assert_eq!(got, want);
    }

    #[test]
    fn time_derivative_and_imaginary_part() {
        let f = VectorField::zero(1);
        let a = CExpr::new(parse("t^2", 1).unwrap(), parse("x1*t", 1).unwrap());
        let d = delta_f(&a, &f).unwrap();
        assert_eq!(d.re.to_string(), "2*t");
        assert_eq!(d.im.to_string(), "x1");
    }

    #[test]
    fn diagonal_coordinates() {
        let m = CMatrix::diag(&[c("x1"), c("x2")]);
        let d = delta_f_matrix(&m, &rl()).unwrap();
        assert_eq!(d, CMatrix::diag(&[rl().component(0).clone().into(), rl().component(1).clone().into()]).simplify());
    }

    #[test]
    fn opaque_symbols_are_rejected() {
        let ctx = ParseContext::with_params(2, ["c"]);
        let a = CExpr::real(crate::parse_with("c*x1", &ctx).unwrap());
        assert!(matches!(delta_f(&a, &rl()), Err(Error::OpaqueSymbol(_))));
    }

    #[test]
    fn jacobian_entry() {
        let j = rl().jacobian().unwrap();
        let want = c("-(1 + 2*x1*x2 - x1^2)/(1 + x1^2)^2").simplify();
        assert_eq!(j.get(0, 0), &want);
        assert_eq!(j.get(1, 1), &CExpr::int(-1));
    }

    #[test]
    fn out_of_range_state() {
        assert!(VectorField::new(vec![parse("x2", 2).unwrap()]).is_err());
    }
}
