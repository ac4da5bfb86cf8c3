//! The complex extension `{a + bj}` of the real function field, and dense
//! matrices over it.

mod matrix;

use std::fmt;
use std::ops;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{is_zero, parse_with, simplify, Expr, ParseContext, Point, ZeroCertificate, ZeroTestPolicy};

pub use matrix::{CMatrix, ResidualReport, SVD_RANK_THRESHOLD};

/// Field element `re + im·j`; both parts are real expressions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CExpr {
    pub re: Expr,
    pub im: Expr,
}

impl CExpr {
    pub fn new(re: Expr, im: Expr) -> Self {
        Self { re, im }
    }

    pub fn real(re: Expr) -> Self {
        Self::new(re, Expr::zero())
    }

    pub fn zero() -> Self {
        Self::real(Expr::zero())
    }

    pub fn one() -> Self {
        Self::real(Expr::one())
    }

    /// The imaginary unit.
    pub fn j() -> Self {
        Self::new(Expr::zero(), Expr::one())
    }

    pub fn int(v: i64) -> Self {
        Self::real(simplify(&Expr::int(v)))
    }

    pub fn from_complex(z: Complex64) -> Option<Self> {
        Some(Self::new(Expr::from_f64(z.re)?, Expr::from_f64(z.im)?))
    }

    /// Reads `"re"` or `"re @ im"`.
    pub fn parse(text: &str, ctx: &ParseContext) -> Result<Self> {
        match text.split_once('@') {
            Some((re, im)) => {
                let offset = re.len() + 1;
                let im = parse_with(im, ctx).map_err(|mut e| {
                    e.position += offset;
                    e
                })?;
                Ok(Self::new(parse_with(re, ctx)?, im))
            }
            None => Ok(Self::real(parse_with(text, ctx)?)),
        }
    }

    pub fn is_real_literal(&self) -> bool {
        self.im.is_literal_zero()
    }

    pub fn simplify(&self) -> Self {
        Self::new(simplify(&self.re), simplify(&self.im))
    }

    pub fn conj(&self) -> Self {
        Self::new(simplify(&self.re), simplify(&-&self.im))
    }

    /// Division; fails when `other` is zero in the field.
    pub fn div(&self, other: &CExpr, policy: &ZeroTestPolicy) -> Result<CExpr> {
        if other.is_zero(policy)?.zero {
            return Err(Error::DivisionByZero);
        }
        if other.im.is_literal_zero() {
            return Ok(Self::new(
                simplify(&(&self.re / &other.re)),
                simplify(&(&self.im / &other.re)),
            ));
        }
        let norm = simplify(&(&other.re * &other.re + &other.im * &other.im));
        let re = &self.re * &other.re + &self.im * &other.im;
        let im = &self.im * &other.re - &self.re * &other.im;
        Ok(Self::new(simplify(&(re / &norm)), simplify(&(im / &norm))))
    }

    pub fn recip(&self, policy: &ZeroTestPolicy) -> Result<CExpr> {
        CExpr::one().div(self, policy)
    }

    /// Zero test on both parts; the certificate merges the evidence.
    pub fn is_zero(&self, policy: &ZeroTestPolicy) -> Result<ZeroCertificate> {
        let re = is_zero(&self.re, policy)?;
        if !re.zero {
            return Ok(re);
        }
        let im = is_zero(&self.im, policy)?;
        Ok(ZeroCertificate {
            zero: im.zero,
            exact: re.exact && im.exact,
            points: re.points.max(im.points),
            max_abs: re.max_abs.max(im.max_abs),
            witness: im.witness,
        })
    }

    pub fn eval(&self, p: &Point<f64>) -> Option<Complex64> {
        let re = self.re.eval(p)?;
        let im = if self.im.is_literal_zero() {
            0.0
        } else {
            self.im.eval(p)?
        };
        Some(Complex64::new(re, im))
    }

    pub fn vars(&self) -> std::collections::BTreeSet<crate::Var> {
        let mut v = self.re.vars();
        v.extend(self.im.vars());
        v
    }
}

impl From<Expr> for CExpr {
    fn from(re: Expr) -> Self {
        CExpr::real(re)
    }
}

impl fmt::Display for CExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_literal_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{} @ {}", self.re, self.im)
        }
    }
}

impl fmt::Debug for CExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CExpr({self})")
    }
}

fn add(a: &CExpr, b: &CExpr) -> CExpr {
    CExpr::new(simplify(&(&a.re + &b.re)), simplify(&(&a.im + &b.im)))
}

fn sub(a: &CExpr, b: &CExpr) -> CExpr {
    CExpr::new(simplify(&(&a.re - &b.re)), simplify(&(&a.im - &b.im)))
}

fn mul(a: &CExpr, b: &CExpr) -> CExpr {
    if a.im.is_literal_zero() && b.im.is_literal_zero() {
        return CExpr::real(simplify(&(&a.re * &b.re)));
    }
    CExpr::new(
        simplify(&(&a.re * &b.re - &a.im * &b.im)),
        simplify(&(&a.re * &b.im + &a.im * &b.re)),
    )
}

macro_rules! cbinop {
    ($trait:ident, $method:ident, $func:ident) => {
        impl ops::$trait<CExpr> for CExpr {
            type Output = CExpr;
            fn $method(self, rhs: CExpr) -> CExpr {
                $func(&self, &rhs)
            }
        }
        impl ops::$trait<&CExpr> for CExpr {
            type Output = CExpr;
            fn $method(self, rhs: &CExpr) -> CExpr {
                $func(&self, rhs)
            }
        }
        impl ops::$trait<CExpr> for &CExpr {
            type Output = CExpr;
            fn $method(self, rhs: CExpr) -> CExpr {
                $func(self, &rhs)
            }
        }
        impl ops::$trait<&CExpr> for &CExpr {
            type Output = CExpr;
            fn $method(self, rhs: &CExpr) -> CExpr {
                $func(self, rhs)
            }
        }
    };
}

cbinop!(Add, add, add);
cbinop!(Sub, sub, sub);
cbinop!(Mul, mul, mul);

impl ops::Neg for &CExpr {
    type Output = CExpr;
    fn neg(self) -> CExpr {
        CExpr::new(simplify(&-&self.re), simplify(&-&self.im))
    }
}

impl ops::Neg for CExpr {
    type Output = CExpr;
    fn neg(self) -> CExpr {
        -&self
    }
}
