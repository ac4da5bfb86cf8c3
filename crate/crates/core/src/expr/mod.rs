//! Symbolic scalar expressions over the real function field in `x1..xn, t`.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Constants are exact
//! rationals. Besides the state variables and time, a tree may contain
//! *opaque symbols*: named generic field elements (declared per model) that
//! take part in algebra and sampling but have no known derivative.

mod canon;
mod diff;
mod eval;
mod integrate;
mod parse;
mod poly;
mod print;
mod zero;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use eval::Point;
pub use parse::{parse, parse_with, ParseContext};
pub use zero::{is_zero, ZeroCertificate, ZeroTestPolicy};

pub(crate) use canon::RatFn;

use crate::Rational;

/// A variable of the function field.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// State coordinate `x_i`, 1-based.
    State(u32),
    /// The time symbol `t`.
    Time,
    /// A named opaque field element.
    Param(Arc<str>),
}

impl Var {
    pub fn state(i: u32) -> Self {
        Var::State(i)
    }

    pub fn param(name: &str) -> Self {
        Var::Param(Arc::from(name))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::State(i) => write!(f, "x{i}"),
            Var::Time => f.write_str("t"),
            Var::Param(name) => f.write_str(name),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Var(Var),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Neg(Expr),
    Apply(Func, Expr),
}

struct Inner {
    node: Node,
    // Canonical rational form, computed on first use. `None` inside means the
    // expression divides by something that canonicalizes to zero.
    canon: OnceLock<Option<RatFn>>,
}

/// Immutable expression tree. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl Expr {
    fn from_node(node: Node) -> Self {
        Expr(Arc::new(Inner {
            node,
            canon: OnceLock::new(),
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(value: Rational) -> Self {
        Self::from_node(Node::Const(value))
    }

    pub fn int(value: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(value)))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::constant(Rational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Lifts the exact binary value of a finite float.
    pub fn from_f64(value: f64) -> Option<Self> {
        Rational::from_float(value).map(Self::constant)
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn var(v: Var) -> Self {
        Self::from_node(Node::Var(v))
    }

    pub fn state(i: u32) -> Self {
        Self::var(Var::State(i))
    }

    pub fn time() -> Self {
        Self::var(Var::Time)
    }

    pub fn param(name: &str) -> Self {
        Self::var(Var::param(name))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_literal_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_literal_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    // Structural constructors: no folding. Used by the parser and by the
    // canonical-form builder so that printed output parses back verbatim.
    pub(crate) fn raw_add(a: Expr, b: Expr) -> Self {
        Self::from_node(Node::Add(a, b))
    }

    pub(crate) fn raw_mul(a: Expr, b: Expr) -> Self {
        Self::from_node(Node::Mul(a, b))
    }

    pub(crate) fn raw_div(a: Expr, b: Expr) -> Self {
        debug_assert!(!b.is_literal_zero());
        Self::from_node(Node::Div(a, b))
    }

    pub(crate) fn raw_pow(a: Expr, k: i32) -> Self {
        Self::from_node(Node::Pow(a, k))
    }

    pub(crate) fn raw_neg(a: Expr) -> Self {
        Self::from_node(Node::Neg(a))
    }

    pub(crate) fn raw_apply(f: Func, a: Expr) -> Self {
        Self::from_node(Node::Apply(f, a))
    }

    /// Integer power with light constant folding.
    ///
    /// Panics when raising a literal zero to a negative power.
    pub fn powi(&self, k: i32) -> Expr {
        match k {
            0 => return Expr::one(),
            1 => return self.clone(),
            _ => {}
        }
        if let Some(c) = self.as_const() {
            if c.is_zero() {
                assert!(k > 0, "literal zero raised to a negative power");
                return Expr::zero();
            }
            return Expr::constant(num_traits::pow::Pow::pow(c, k));
        }
        Self::raw_pow(self.clone(), k)
    }

    /// Elementary function application, folding the obvious constant cases.
    pub fn apply(f: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            match f {
                Func::Sin if c.is_zero() => return Expr::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return Expr::one(),
                Func::Sqrt => {
                    if let Some(r) = exact_sqrt(c) {
                        return Expr::constant(r);
                    }
                }
                _ => {}
            }
        }
        Self::raw_apply(f, arg)
    }

    pub fn sin(&self) -> Expr {
        Self::apply(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Self::apply(Func::Cos, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Self::apply(Func::Exp, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Self::apply(Func::Sqrt, self.clone())
    }

    /// All variables occurring in the tree.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Apply(_, a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, v: &Var) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(w) => w == v,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(v) || b.depends_on(v)
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Apply(_, a) => a.depends_on(v),
        }
    }

    /// True when no elementary function occurs (the rational subclass).
    pub fn is_rational(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) => true,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.is_rational() && b.is_rational(),
            Node::Pow(a, _) | Node::Neg(a) => a.is_rational(),
            Node::Apply(..) => false,
        }
    }

    /// Replaces every occurrence of `v` by `with`.
    pub fn subst(&self, v: &Var, with: &Expr) -> Expr {
        if !self.depends_on(v) {
            return self.clone();
        }
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(w) => {
                if w == v {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Node::Add(a, b) => a.subst(v, with) + b.subst(v, with),
            Node::Mul(a, b) => a.subst(v, with) * b.subst(v, with),
            Node::Div(a, b) => a.subst(v, with) / b.subst(v, with),
            Node::Pow(a, k) => a.subst(v, with).powi(*k),
            Node::Neg(a) => -a.subst(v, with),
            Node::Apply(f, a) => Expr::apply(*f, a.subst(v, with)),
        }
    }

    /// Canonical form; see [`simplify`].
    pub fn simplify(&self) -> Expr {
        simplify(self)
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.size() + b.size(),
            Node::Pow(a, _) | Node::Neg(a) | Node::Apply(_, a) => 1 + a.size(),
        }
    }

    pub(crate) fn seed_canon(&self, r: RatFn) {
        let _ = self.0.canon.set(Some(r));
    }

    pub(crate) fn cached_canon(&self) -> Option<&RatFn> {
        self.0
            .canon
            .get_or_init(|| canon::canonicalize(self))
            .as_ref()
    }
}

/// Exact square root of a non-negative rational, when it is rational.
pub(crate) fn exact_sqrt(c: &Rational) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().sqrt();
    let d = c.denom().sqrt();
    if &(&n * &n) == c.numer() && &(&d * &d) == c.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Canonical form of `e`.
///
/// For the rational subclass this is the reduced quotient of two expanded
/// polynomials in lexicographic monomial order (`x1 > x2 > ... > t >` opaque
/// symbols), with a constant denominator folded into the coefficients and a
/// non-constant denominator made primitive with a positive leading
/// coefficient. Elementary-function applications are canonicalized
/// recursively and treated as extra indeterminates. Expressions that divide
/// by a canonical zero are returned unchanged.
pub fn simplify(e: &Expr) -> Expr {
    match e.cached_canon() {
        Some(r) => r.to_expr(),
        None => e.clone(),
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.node() == other.node()
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.node().cmp(other.node())
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.node().hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<Rational> for Expr {
    fn from(v: Rational) -> Self {
        Expr::constant(v)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

fn add(a: &Expr, b: &Expr) -> Expr {
    if a.is_literal_zero() {
        return b.clone();
    }
    if b.is_literal_zero() {
        return a.clone();
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Expr::constant(x + y);
    }
    Expr::raw_add(a.clone(), b.clone())
}

fn neg(a: &Expr) -> Expr {
    match a.node() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::raw_neg(a.clone()),
    }
}

fn sub(a: &Expr, b: &Expr) -> Expr {
    if b.is_literal_zero() {
        return a.clone();
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Expr::constant(x - y);
    }
    if a.is_literal_zero() {
        return neg(b);
    }
    Expr::raw_add(a.clone(), neg(b))
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    if a.is_literal_zero() || b.is_literal_zero() {
        return Expr::zero();
    }
    if a.is_literal_one() {
        return b.clone();
    }
    if b.is_literal_one() {
        return a.clone();
    }
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => return Expr::constant(x * y),
        (Some(x), None) if *x == -Rational::one() => return neg(b),
        (None, Some(y)) if *y == -Rational::one() => return neg(a),
        _ => {}
    }
    Expr::raw_mul(a.clone(), b.clone())
}

fn div(a: &Expr, b: &Expr) -> Expr {
    assert!(!b.is_literal_zero(), "division by the literal zero constant");
    if b.is_literal_one() {
        return a.clone();
    }
    if a.is_literal_zero() {
        return Expr::zero();
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Expr::constant(x / y);
    }
    Expr::raw_div(a.clone(), b.clone())
}

macro_rules! binop {
    ($trait:ident, $method:ident, $func:ident) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $func(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $func(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $func(self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $func(self, rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}
