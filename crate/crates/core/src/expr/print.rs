use std::fmt;

use num_traits::{Signed, Zero};

use super::{Expr, Node};

// Binding strength of the printed form of a node; a child is parenthesized
// when its strength is below what its position requires.
const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn strength(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) => ADD,
        Node::Mul(..) | Node::Div(..) => MUL,
        Node::Neg(_) => NEG,
        Node::Pow(..) => POW,
        Node::Var(_) | Node::Apply(..) => ATOM,
        Node::Const(c) => {
            if !c.is_integer() {
                MUL
            } else if c.is_negative() {
                NEG
            } else {
                ATOM
            }
        }
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if strength(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => {
                if c.denom().is_zero() || c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Node::Var(v) => write!(f, "{v}"),
            Node::Add(a, b) => {
                child(f, a, ADD)?;
                if let Node::Neg(inner) = b.node() {
                    f.write_str(" - ")?;
                    child(f, inner, MUL)
                } else {
                    f.write_str(" + ")?;
                    child(f, b, MUL)
                }
            }
            Node::Mul(a, b) => {
                child(f, a, MUL)?;
                f.write_str("*")?;
                child(f, b, POW)
            }
            Node::Div(a, b) => {
                child(f, a, MUL)?;
                f.write_str("/")?;
                child(f, b, POW)
            }
            Node::Neg(a) => {
                f.write_str("-")?;
                child(f, a, POW)
            }
            Node::Pow(a, k) => {
                child(f, a, ATOM)?;
                write!(f, "^{k}")
            }
            Node::Apply(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn round(s: &str) -> String {
        parse(s, 3).unwrap().to_string()
    }

    #[test]
    fn precedence_is_preserved() {
        assert_eq!(round("x1 - (x2 - x3)"), "x1 - (x2 - x3)");
        assert_eq!(round("(x1 + x2)*x3"), "(x1 + x2)*x3");
        assert_eq!(round("x1/(x2*x3)"), "x1/(x2*x3)");
        assert_eq!(round("-(x1*x2)"), "-(x1*x2)");
        assert_eq!(round("-x1^2"), "-x1^2");
        assert_eq!(round("(-x1)^2"), "(-x1)^2");
        assert_eq!(round("x1*(-x2)"), "x1*(-x2)");
        assert_eq!(round("sin(x1 + t)^2"), "sin(x1 + t)^2");
        assert_eq!(round("x1^-2"), "x1^-2");
    }
}
