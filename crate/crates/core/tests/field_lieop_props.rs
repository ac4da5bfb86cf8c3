mod common;

use common::{ctx2, expr, field_texts, poly_text, rational_text, unit_text};
use drekit::field::CMatrix;
use drekit::sim::integrate;
use drekit::{delta_f, delta_f_matrix, is_zero, CExpr, Expr, Point, VectorField, ZeroTestPolicy};
use proptest::prelude::*;

fn policy() -> ZeroTestPolicy {
    ZeroTestPolicy::default()
}

fn czero(e: &CExpr) -> bool {
    e.is_zero(&policy()).unwrap().zero
}

fn field(i: usize) -> VectorField {
    VectorField::parse(&field_texts()[i], &ctx2()).unwrap()
}

fn cexpr(re: &str, im: &str) -> CExpr {
    CExpr::new(expr(re), expr(im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn delta_leibniz(a in rational_text(), b in rational_text(), c in rational_text(), k in 0usize..4) {
        let f = field(k);
        let a = cexpr(&a, &c);
        let b = CExpr::real(expr(&b));
        let lhs = delta_f(&(a.clone() * b.clone()), &f).unwrap();
        let rhs = delta_f(&a, &f).unwrap() * b.clone() + a * delta_f(&b, &f).unwrap();
        prop_assert!(czero(&(lhs - rhs)));
    }

    #[test]
    fn delta_inverse_rule(a in unit_text(), k in 0usize..4) {
        let f = field(k);
        let a = CExpr::real(expr(&a));
        let inv = a.recip(&policy()).unwrap();
        let lhs = delta_f(&inv, &f).unwrap();
        let rhs = -(delta_f(&a, &f).unwrap() * inv.clone() * inv);
        prop_assert!(czero(&(lhs - rhs)));
    }

    #[test]
    fn delta_commutes_with_conjugation(a in rational_text(), b in rational_text(), k in 0usize..4) {
        let f = field(k);
        let z = cexpr(&a, &b);
        let lhs = delta_f(&z.conj(), &f).unwrap();
        let rhs = delta_f(&z, &f).unwrap().conj();
        prop_assert!(czero(&(lhs - rhs)));
    }

    #[test]
    fn delta_of_state_is_field_component(k in 0usize..4) {
        let f = field(k);
        for i in 0..2 {
            let xi = CExpr::real(Expr::state(i as u32 + 1));
            let d = delta_f(&xi, &f).unwrap();
            prop_assert!(czero(&(d - CExpr::real(f.component(i).clone()))));
        }
    }

    #[test]
    fn matrix_inverse_is_two_sided(e in prop::collection::vec(rational_text(), 2), d in unit_text()) {
        // det(L U) = d, which has no real zeros.
        let l = CMatrix::parse_rows(&[vec!["1".to_string(), "0".into()], vec![e[0].clone(), "1".into()]], &ctx2()).unwrap();
        let u = CMatrix::parse_rows(&[vec![d.clone(), e[1].clone()], vec!["0".into(), "1".into()]], &ctx2()).unwrap();
        let m = l.mul(&u).unwrap();
        let inv = m.inverse(&policy()).unwrap();
        let i = CMatrix::identity(2);
        prop_assert!(m.mul(&inv).unwrap().sub(&i).unwrap().is_zero(&policy()).unwrap().zero);
        prop_assert!(inv.mul(&m).unwrap().sub(&i).unwrap().is_zero(&policy()).unwrap().zero);
    }

    #[test]
    fn delta_matrix_product_rule(a in prop::collection::vec(rational_text(), 4), b in prop::collection::vec(poly_text(), 4), k in 0usize..4) {
        let f = field(k);
        let m = |v: &Vec<String>| CMatrix::parse_rows(&[vec![v[0].clone(), v[1].clone()], vec![v[2].clone(), v[3].clone()]], &ctx2()).unwrap();
        let (a, b) = (m(&a), m(&b));
        let lhs = delta_f_matrix(&a.mul(&b).unwrap(), &f).unwrap();
        let rhs = delta_f_matrix(&a, &f).unwrap().mul(&b).unwrap()
            .add(&a.mul(&delta_f_matrix(&b, &f).unwrap()).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().is_zero(&policy()).unwrap().zero);
    }

    #[test]
    fn delta_agrees_with_time_derivative_along_trajectories(
        a in rational_text(), x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, k in 0usize..4
    ) {
        let f = field(k);
        let a = expr(&a);
        let da = delta_f(&CExpr::real(a.clone()), &f).unwrap().re;
        let h = 1e-4;
        let tr = integrate(&f, &[x1, x2], 0.0, 0.02, h).unwrap();
        prop_assert!(tr.is_complete());
        let at = |s: &[f64]| a.eval(&Point::new(s.to_vec(), 0.0)).unwrap();
        let mid = tr.states.len() / 2;
        let deriv = (at(&tr.states[mid + 1]) - at(&tr.states[mid - 1])) / (2.0 * h);
        let exact = da.eval(&Point::new(tr.states[mid].clone(), 0.0)).unwrap();
        prop_assert!((deriv - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "{deriv} vs {exact}");
    }
}

#[test]
fn delta_includes_explicit_time_dependence() {
    let f = field(2);
    let a = CExpr::real(drekit::parse("t*x1", 2).unwrap());
    let d = delta_f(&a, &f).unwrap();
    let want = CExpr::real(drekit::parse("x1 + t*x2", 2).unwrap());
    assert!(czero(&(d - want)));
}

#[test]
fn zero_test_on_complex_entries() {
    let z = CExpr::parse("x1 @ x2", &ctx2()).unwrap();
    let w = z.clone() * z.conj();
    let r = CExpr::real(expr("x1^2 + x2^2"));
    assert!(czero(&(w - r.clone())));
    assert!(is_zero(&(&z.conj().im + &z.im), &policy()).unwrap().zero);
}
