//! Recursive-descent reader for the expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" ["-" | "+"] INTEGER)?
//! primary := NUMBER | "x"INDEX | "t" | SYMBOL | FUNC "(" expr ")" | "(" expr ")"
//! ```
//!
//! `a - b` reads as `a + (-b)`. Decimal literals are exact (`0.5` is `1/2`).

use num_bigint::BigInt;
use num_traits::Pow;

use super::{Expr, Func, Var};
use crate::error::ParseError;
use crate::Rational;

/// Names that may appear in an expression.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    /// State dimension; `x1..x<n>` are valid.
    pub n: usize,
    /// Declared opaque symbols.
    pub params: Vec<String>,
}

impl ParseContext {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            params: Vec::new(),
        }
    }

    pub fn with_params(n: usize, params: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            n,
            params: params.into_iter().map(Into::into).collect(),
        }
    }
}

pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    parse_with(text, &ParseContext::new(n))
}

pub fn parse_with(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
        end: text.len(),
    };
    let e = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(ParseError::new(tok.at, format!("unexpected {}", tok.kind.describe())));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Number { value: Rational, integer: bool },
    Ident(String),
    Op(char),
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Number { value, .. } => format!("number `{value}`"),
            Kind::Ident(s) => format!("identifier `{s}`"),
            Kind::Op(c) => format!("`{c}`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    at: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac_part = "";
            let mut integer = true;
            if i < bytes.len() && bytes[i] == b'.' {
                integer = false;
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &text[fs..i];
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseError::new(start, "malformed number"));
            }
            let digits = format!("{int_part}{frac_part}");
            let numer: BigInt = digits
                .parse()
                .map_err(|_| ParseError::new(start, "malformed number"))?;
            let denom = BigInt::from(10).pow(frac_part.len() as u32);
            out.push(Token {
                kind: Kind::Number {
                    value: Rational::new(numer, denom),
                    integer,
                },
                at: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Kind::Ident(text[start..i].to_string()),
                at: start,
            });
        } else if "+-*/^()".contains(c) {
            out.push(Token {
                kind: Kind::Op(c),
                at: i,
            });
            i += 1;
        } else {
            return Err(ParseError::new(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a ParseContext,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: Kind::Op(c), ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.at)
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::new(self.here(), format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' {
                Expr::raw_add(acc, rhs)
            } else {
                Expr::raw_add(acc, Expr::raw_neg(rhs))
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            let at = self.here();
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '*' {
                Expr::raw_mul(acc, rhs)
            } else {
                if rhs.is_literal_zero() {
                    return Err(ParseError::new(at, "division by literal zero"));
                }
                Expr::raw_div(acc, rhs)
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::raw_neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let mut negative = false;
        match self.peek_op() {
            Some('-') => {
                negative = true;
                self.pos += 1;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        let at = self.here();
        let k = match self.peek() {
            Some(Token {
                kind: Kind::Number {
                    value,
                    integer: true,
                },
                ..
            }) => {
                let k: i32 = value
                    .to_integer()
                    .try_into()
                    .map_err(|_| ParseError::new(at, "exponent out of range"))?;
                self.pos += 1;
                if negative {
                    -k
                } else {
                    k
                }
            }
            _ => return Err(ParseError::new(at, "exponent must be an integer literal")),
        };
        if k < 0 && base.is_literal_zero() {
            return Err(ParseError::new(at, "division by literal zero"));
        }
        Ok(Expr::raw_pow(base, k))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::new(self.end, "unexpected end of input"));
        };
        match tok.kind {
            Kind::Number { value, .. } => {
                self.pos += 1;
                Ok(Expr::constant(value))
            }
            Kind::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Kind::Ident(name) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::raw_apply(func, arg));
                }
                self.identifier(&name, tok.at)
            }
            other => Err(ParseError::new(tok.at, format!("unexpected {}", other.describe()))),
        }
    }

    fn identifier(&self, name: &str, at: usize) -> Result<Expr, ParseError> {
        if name == "t" {
            return Ok(Expr::time());
        }
        if self.ctx.params.iter().any(|p| p == name) {
            return Ok(Expr::param(name));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits
                    .parse()
                    .map_err(|_| ParseError::new(at, "variable index out of range"))?;
                if index == 0 || index > self.ctx.n || digits.starts_with('0') {
                    return Err(ParseError::new(
                        at,
                        format!("variable index out of range: `{name}` with n = {}", self.ctx.n),
                    ));
                }
                return Ok(Expr::var(Var::State(index as u32)));
            }
        }
        Err(ParseError::new(at, format!("unknown identifier `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn grammar_cases() {
        let e = parse("x1^2 + 1", 2).unwrap();
        match e.node() {
            Node::Add(a, b) => {
                assert_eq!(a.node(), &Node::Pow(Expr::state(1), 2));
                assert!(b.is_literal_one());
            }
            other => panic!("unexpected {other:?}"),
        }
        let f1 = parse("(-x1+x2)/(1+x1^2)", 2).unwrap();
        assert!(matches!(f1.node(), Node::Div(..)));
        assert_eq!(f1.to_string(), "(-x1 + x2)/(1 + x1^2)");
    }

    #[test]
    fn literals_are_exact() {
        assert_eq!(parse("0.5", 1).unwrap(), Expr::ratio(1, 2));
        assert_eq!(parse("3/4", 1).unwrap().simplify().to_string(), "3/4");
        assert_eq!(parse("1.25", 1).unwrap(), Expr::ratio(5, 4));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("x3", 2).unwrap_err();
        assert_eq!(err.position, 0);
        assert!(err.message.contains("out of range"));
        let err = parse("x1 + foo", 2).unwrap_err();
        assert_eq!(err.position, 5);
        assert!(err.message.contains("unknown identifier"));
        let err = parse("x1 +", 2).unwrap_err();
        assert_eq!(err.position, 4);
        assert!(parse("x1^0.5", 1).is_err());
        assert!(parse("x1/0", 1).is_err());
        assert!(parse("(x1", 1).is_err());
        assert!(parse("x1 $ 2", 1).is_err());
        assert!(parse("x0", 1).is_err());
    }

    #[test]
    fn symbols_need_declaration() {
        assert!(parse("c*x1", 2).is_err());
        let ctx = ParseContext::with_params(2, ["c"]);
        let e = parse_with("c*x1", &ctx).unwrap();
        assert!(e.vars().contains(&Var::param("c")));
    }

    #[test]
    fn functions() {
        let e = parse("sin(t) + cos(x1)*exp(-x1) - sqrt(2)", 1).unwrap();
        assert_eq!(e.to_string(), "sin(t) + cos(x1)*exp(-x1) - sqrt(2)");
        assert!(parse("sin x1", 1).is_err());
    }
}
