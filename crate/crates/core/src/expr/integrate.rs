use super::canon::RatFn;
use super::poly::{Atom, Poly};
use super::{Expr, Var};
use crate::Rational;

impl Expr {
    /// Antiderivative in `v` that vanishes at `v = 0`.
    ///
    /// Only integrands whose canonical form is a polynomial in `v` over
    /// rational functions of the remaining variables are handled; anything
    /// else gives `None`.
    pub fn integrate_from_zero(&self, v: &Var) -> Option<Expr> {
        let r = self.cached_canon()?;
        let atom = Atom::Var(v.clone());
        if r.den.degree_in(&atom) > 0 {
            return None;
        }
        let transcendental = |p: &Poly| {
            p.atoms()
                .iter()
                .any(|a| matches!(a, Atom::Apply(_, arg) if arg.depends_on(v)))
        };
        if transcendental(&r.num) || transcendental(&r.den) {
            return None;
        }
        let coeffs = r.num.coeffs_in(&atom);
        let mut shifted = vec![Poly::zero(); coeffs.len() + 1];
        for (e, c) in coeffs.iter().enumerate() {
            shifted[e + 1] = c.scale(&Rational::new(1.into(), (e as i64 + 1).into()));
        }
        let num = Poly::from_coeffs(&atom, &shifted);
        Some(RatFn::new(num, r.den.clone())?.to_expr())
    }
}
