#![allow(dead_code)]

pub mod oracle;

use drekit::{parse, Expr, ParseContext};
use proptest::prelude::*;

/// A random polynomial in `x1, x2` with small integer coefficients, as text.
pub fn poly_text() -> impl Strategy<Value = String> {
    prop::collection::vec((-4i64..=4, 0u32..=2, 0u32..=2), 1..4).prop_map(|terms| {
        terms
            .iter()
            .map(|(c, a, b)| format!("({c})*x1^{a}*x2^{b}"))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

/// A random rational function whose denominator has no real zeros.
pub fn rational_text() -> impl Strategy<Value = String> {
    (poly_text(), poly_text(), 1i64..=3).prop_map(|(n, d, k)| format!("({n})/({k} + ({d})^2)"))
}

/// A random nonzero rational function.
pub fn unit_text() -> impl Strategy<Value = String> {
    (poly_text(), 1i64..=3).prop_map(|(p, k)| format!("{k} + ({p})^2"))
}

pub fn expr(text: &str) -> Expr {
    parse(text, 2).expect("generated text parses")
}

pub fn ctx2() -> ParseContext {
    ParseContext::new(2)
}

/// Closed-form fields used across property tests.
pub fn field_texts() -> Vec<[&'static str; 2]> {
    vec![
        ["(-x1 + x2)/(1 + x1^2)", "x1 - x2"],
        ["-x1 + x2^2", "-x2"],
        ["x2", "-x1 - x2"],
        ["-x1^3", "x1 - 2*x2"],
    ]
}

use drekit::field::CMatrix;
use drekit::{RiccatiData, VectorField, ZeroTestPolicy};

pub fn mat(rows: &[&[&str]]) -> CMatrix {
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
    CMatrix::parse_rows(&rows, &ctx2()).unwrap()
}

pub fn col(entries: &[&str]) -> CMatrix {
    let rows: Vec<&[&str]> = entries.iter().map(std::slice::from_ref).collect();
    mat(&rows)
}

pub fn int_matrix(rows: usize, cols: usize, v: &[i64]) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| drekit::CExpr::int(v[i * cols + j]))
}

/// The RL-circuit example: `f`, `A = ∂f/∂x`, `R = BBᵀ`, `Q`.
pub fn rl_circuit() -> RiccatiData {
    let f = VectorField::parse(&["(-x1 + x2)/(1 + x1^2)", "x1 - x2"], &ctx2()).unwrap();
    let a = f.jacobian().unwrap();
    let r = mat(&[&["0", "0"], &["0", "1"]]);
    let q = mat(&[&["3 + 4*x1^2 + x1^4", "0"], &["0", "1"]]);
    RiccatiData::new(a, r, q, f, &ZeroTestPolicy::default()).unwrap()
}

pub fn rl_x() -> CMatrix {
    mat(&[&["2*(1 + x1^2)^2", "1 + x1^2"], &["1 + x1^2", "1"]])
}

pub const RL_BETA1: &str = "-(2 + x1^2)/(1 + x1^2)";

pub fn rl_w1() -> CMatrix {
    col(&["1/(1 + x1^2)", "-1", "1 + x1^2", "0"])
}
