//! Canonical quotient-of-polynomials form.

use num_traits::{One, Signed, Zero};

use super::poly::{Atom, Monomial, Poly};
use super::{exact_sqrt, Expr, Func, Node};
use crate::Rational;

/// Reduced rational function `num / den`.
///
/// Invariants: `gcd(num, den) = 1`; a constant denominator is exactly one;
/// otherwise the denominator has coprime integer coefficients and a positive
/// leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct RatFn {
    pub(crate) num: Poly,
    pub(crate) den: Poly,
}

impl RatFn {
    pub(crate) fn constant(c: Rational) -> Self {
        RatFn {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub(crate) fn from_poly(p: Poly) -> Self {
        RatFn {
            num: p,
            den: Poly::one(),
        }
    }

    /// Normalizing constructor; `None` when the denominator is zero.
    pub(crate) fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::constant(Rational::zero()));
        }
        let num = reduce_sqrt(num);
        let den = reduce_sqrt(den);
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        if let Some(c) = den.as_constant() {
            return Some(RatFn {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            });
        }
        let mut s = den.integer_normalizer();
        if den.lead().is_some_and(|(_, c)| c.is_negative()) {
            s = -s;
        }
        Some(RatFn {
            num: num.scale(&s),
            den: den.scale(&s),
        })
    }

    pub(crate) fn size(&self) -> usize {
        self.num.terms.len() + self.den.terms.len()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub(crate) fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub(crate) fn add(&self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num), self.den.clone()).expect("nonzero denominator");
        }
        // Only the common part of the denominators can cancel.
        let g = self.den.gcd(&o.den);
        let d1 = self.den.div_exact(&g).expect("gcd divides");
        let d2 = o.den.div_exact(&g).expect("gcd divides");
        let t = self.num.mul(&d2).add(&o.num.mul(&d1));
        let h = t.gcd(&g);
        let num = t.div_exact(&h).expect("gcd divides");
        let den = d1.mul(&o.den.div_exact(&h).expect("gcd divides"));
        RatFn::new(num, den).expect("nonzero denominator")
    }

    pub(crate) fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub(crate) fn mul(&self, o: &RatFn) -> RatFn {
        Self::cross(&self.num, &self.den, &o.num, &o.den).expect("nonzero denominator")
    }

    pub(crate) fn div(&self, o: &RatFn) -> Option<RatFn> {
        if o.num.is_zero() {
            return None;
        }
        Self::cross(&self.num, &self.den, &o.den, &o.num)
    }

    /// `(n1 / d1) (n2 / d2)` for reduced factors, cancelling crosswise.
    fn cross(n1: &Poly, d1: &Poly, n2: &Poly, d2: &Poly) -> Option<RatFn> {
        if n1.is_zero() || n2.is_zero() {
            return RatFn::new(Poly::zero(), d1.mul(d2));
        }
        let g1 = n1.gcd(d2);
        let g2 = n2.gcd(d1);
        let q = |a: &Poly, g: &Poly| a.div_exact(g).expect("gcd divides");
        RatFn::new(q(n1, &g1).mul(&q(n2, &g2)), q(d1, &g2).mul(&q(d2, &g1)))
    }

    pub(crate) fn powi(&self, k: i32) -> Option<RatFn> {
        let (num, den) = if k >= 0 {
            (self.num.pow(k as u32), self.den.pow(k as u32))
        } else {
            (self.den.pow(k.unsigned_abs()), self.num.pow(k.unsigned_abs()))
        };
        RatFn::new(num, den)
    }

    /// Canonical expression tree. Printing it and parsing the text back
    /// yields the same tree.
    pub(crate) fn to_expr(&self) -> Expr {
        let num = poly_expr(&self.num);
        let e = if self.den.is_one() {
            num
        } else {
            Expr::raw_div(num, poly_expr(&self.den))
        };
        e.seed_canon(self.clone());
        e
    }
}

/// `sqrt(c)^2 = c` for non-negative rational constants `c`.
fn reduce_sqrt(p: Poly) -> Poly {
    let reducible = |a: &Atom| match a {
        Atom::Apply(Func::Sqrt, arg) => arg.as_const().is_some_and(|c| !c.is_negative()),
        _ => false,
    };
    let needs = p
        .terms
        .keys()
        .any(|m| m.0.iter().any(|(a, e)| *e >= 2 && reducible(a)));
    if !needs {
        return p;
    }
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let mut coeff = c.clone();
        let mut rest = Vec::with_capacity(m.0.len());
        for (a, e) in &m.0 {
            if *e >= 2 && reducible(a) {
                if let Atom::Apply(_, arg) = a {
                    let radicand = arg.as_const().expect("checked constant");
                    coeff *= num_traits::pow::Pow::pow(radicand, e / 2);
                }
                if e % 2 == 1 {
                    rest.push((a.clone(), 1));
                }
            } else {
                rest.push((a.clone(), *e));
            }
        }
        let mut term = Poly::constant(coeff);
        term.terms = term
            .terms
            .into_iter()
            .map(|(_, k)| (Monomial(rest.clone()), k))
            .collect();
        out = out.add(&term);
    }
    out
}

/// Bound on the product of operand term counts at one node. Beyond it the
/// canonical form is not attempted and zero tests fall back to sampling.
pub(crate) const CANON_BUDGET: usize = 2500;

fn within_budget(a: &RatFn, b: &RatFn) -> Option<()> {
    (a.size().saturating_mul(b.size()) <= CANON_BUDGET).then_some(())
}

pub(super) fn canonicalize(e: &Expr) -> Option<RatFn> {
    Some(match e.node() {
        Node::Const(c) => RatFn::constant(c.clone()),
        Node::Var(v) => RatFn::from_poly(Poly::atom(Atom::Var(v.clone()))),
        Node::Add(a, b) => {
            let (a, b) = (a.cached_canon()?, b.cached_canon()?);
            within_budget(a, b)?;
            a.add(b)
        }
        Node::Mul(a, b) => {
            let (a, b) = (a.cached_canon()?, b.cached_canon()?);
            within_budget(a, b)?;
            a.mul(b)
        }
        Node::Div(a, b) => {
            let (a, b) = (a.cached_canon()?, b.cached_canon()?);
            within_budget(a, b)?;
            a.div(b)?
        }
        Node::Pow(a, k) => {
            let a = a.cached_canon()?;
            (a.size().saturating_pow(k.unsigned_abs()) <= CANON_BUDGET).then_some(())?;
            a.powi(*k)?
        }
        Node::Neg(a) => a.cached_canon()?.neg(),
        Node::Apply(f, a) => {
            let arg = a.cached_canon()?;
            if let Some(c) = arg.as_constant() {
                match f {
                    Func::Sin if c.is_zero() => return Some(RatFn::constant(Rational::zero())),
                    Func::Cos | Func::Exp if c.is_zero() => {
                        return Some(RatFn::constant(Rational::one()))
                    }
                    Func::Sqrt => {
                        if let Some(r) = exact_sqrt(&c) {
                            return Some(RatFn::constant(r));
                        }
                    }
                    _ => {}
                }
            }
            RatFn::from_poly(Poly::atom(Atom::Apply(*f, arg.to_expr())))
        }
    })
}

fn atom_expr(a: &Atom) -> Expr {
    match a {
        Atom::Var(v) => Expr::var(v.clone()),
        Atom::Apply(f, arg) => Expr::raw_apply(*f, arg.clone()),
    }
}

fn int_expr(v: &num_bigint::BigInt) -> Expr {
    Expr::constant(Rational::from_integer(v.clone()))
}

fn term_expr(mag: &Rational, m: &Monomial, negate: bool) -> Expr {
    let mut factors = Vec::with_capacity(m.0.len() + 1);
    if !mag.numer().is_one() || m.is_one() {
        factors.push(int_expr(mag.numer()));
    }
    for (a, e) in &m.0 {
        let base = atom_expr(a);
        factors.push(if *e == 1 {
            base
        } else {
            Expr::raw_pow(base, *e as i32)
        });
    }
    if negate {
        factors[0] = Expr::raw_neg(factors[0].clone());
    }
    let mut it = factors.into_iter();
    let first = it.next().expect("at least one factor");
    let prod = it.fold(first, Expr::raw_mul);
    if mag.denom().is_one() {
        prod
    } else {
        Expr::raw_div(prod, int_expr(mag.denom()))
    }
}

fn poly_expr(p: &Poly) -> Expr {
    let mut acc: Option<Expr> = None;
    for (m, c) in p.terms.iter().rev() {
        let negative = c.is_negative();
        let mag = c.abs();
        acc = Some(match acc {
            None => term_expr(&mag, m, negative),
            Some(prev) => {
                let t = term_expr(&mag, m, false);
                Expr::raw_add(prev, if negative { Expr::raw_neg(t) } else { t })
            }
        });
    }
    acc.unwrap_or_else(Expr::zero)
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr};

    fn simp(s: &str) -> String {
        parse(s, 3).unwrap().simplify().to_string()
    }

    #[test]
    fn cancellation() {
        assert_eq!(simp("(x1^2 - 1)/(x1 - 1)"), "x1 + 1");
        assert_eq!(simp("x1*(1/x1)"), "1");
        assert_eq!(simp("x1 - x1"), "0");
        assert_eq!(simp("(x1 + x2)^2 - x1^2 - x2^2"), "2*x1*x2");
    }

    #[test]
    fn normalized_denominators() {
        assert_eq!(simp("x1/(2*x1 + 2*x2)"), "x1/2/(x1 + x2)");
        assert_eq!(simp("1/(-x1)"), "-1/x1");
        assert_eq!(simp("x1^3/3 + x1 + x2"), "x1^3/3 + x1 + x2");
        assert_eq!(simp("(x1 + 1/2)/(x2/3)"), "(3*x1 + 3/2)/x2");
    }

    #[test]
    fn kernels_and_radicals() {
        assert_eq!(simp("sin(x1 + x1) - sin(2*x1)"), "0");
        assert_eq!(simp("sqrt(3)*sqrt(3)"), "3");
        assert_eq!(simp("sqrt(4)"), "2");
        assert_eq!(simp("exp(x2 - x2)"), "1");
    }

    #[test]
    fn singular_expressions_are_left_alone() {
        let e = parse("1/(x1 - x1)", 1).unwrap();
        assert_eq!(e.simplify(), e);
        assert!(e.cached_canon().is_none());
        assert!(Expr::one().cached_canon().is_some());
    }
}
