mod common;

use common::{expr, poly_text, rational_text, unit_text};
use drekit::{is_zero, parse, simplify, Expr, Point, Var, ZeroTestPolicy};
use proptest::prelude::*;

fn policy() -> ZeroTestPolicy {
    ZeroTestPolicy::default()
}

fn zero(e: &Expr) -> bool {
    is_zero(e, &policy()).unwrap().zero
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printed_form_reparses_to_equal_function(t in rational_text()) {
        let e = simplify(&expr(&t));
        let back = parse(&e.to_string(), 2).unwrap();
        prop_assert!(zero(&(&back - &e)));
        prop_assert_eq!(simplify(&back).to_string(), e.to_string());
    }

    #[test]
    fn simplification_preserves_values(t in rational_text(), x1 in -2.0f64..2.0, x2 in -2.0f64..2.0) {
        let e = expr(&t);
        let p = Point::new(vec![x1, x2], 0.0);
        let a = e.eval(&p).unwrap();
        let b = simplify(&e).eval(&p).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn difference_with_itself_is_exact_zero(t in rational_text()) {
        let e = expr(&t);
        let c = is_zero(&(&e - &e), &policy()).unwrap();
        prop_assert!(c.zero && c.exact);
    }

    #[test]
    fn unit_plus_square_is_never_zero(t in unit_text()) {
        prop_assert!(!zero(&expr(&t)));
    }

    #[test]
    fn product_rule(a in rational_text(), b in rational_text()) {
        let (a, b) = (expr(&a), expr(&b));
        let v = Var::State(1);
        let lhs = (&a * &b).diff(&v).unwrap();
        let rhs = &a.diff(&v).unwrap() * &b + &a * &b.diff(&v).unwrap();
        prop_assert!(zero(&(lhs - rhs)));
    }

    #[test]
    fn quotient_rule(a in poly_text(), b in unit_text()) {
        let (a, b) = (expr(&a), expr(&b));
        let v = Var::State(2);
        let lhs = (&a / &b).diff(&v).unwrap();
        let rhs = (&a.diff(&v).unwrap() * &b - &a * &b.diff(&v).unwrap()) / (&b * &b);
        prop_assert!(zero(&(lhs - rhs)));
    }

    #[test]
    fn derivative_matches_central_difference(t in rational_text(), x1 in -1.5f64..1.5, x2 in -1.5f64..1.5) {
        let e = expr(&t);
        let d = e.diff(&Var::State(1)).unwrap();
        let h = 1e-5;
        let f = |x: f64| e.eval(&Point::new(vec![x, x2], 0.0)).unwrap();
        let fd = (f(x1 + h) - f(x1 - h)) / (2.0 * h);
        let exact = d.eval(&Point::new(vec![x1, x2], 0.0)).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-4 * (1.0 + exact.abs()));
    }

    #[test]
    fn antiderivative_differentiates_back(t in rational_text()) {
        let e = expr(&t);
        for v in [Var::State(1), Var::State(2)] {
            if let Some(k) = e.integrate_from_zero(&v) {
                prop_assert!(zero(&(k.diff(&v).unwrap() - &e)));
                let p = Point::new(vec![0.0f64, 0.0], 0.0);
                let at0 = k.subst(&v, &Expr::zero()).eval(&p);
                prop_assert!(at0.map_or(true, |z| z.abs() < 1e-12));
            }
        }
    }
}

#[test]
fn zero_test_is_deterministic_for_a_seed() {
    let e = parse("sin(x1)^2 + cos(x1)^2 - 1", 1).unwrap();
    let p = ZeroTestPolicy::with_seed(7);
    let a = is_zero(&e, &p).unwrap();
    let b = is_zero(&e, &p).unwrap();
    assert_eq!(a, b);
    assert!(a.zero);
}

#[test]
fn zero_test_reports_a_witness_for_nonzero_input() {
    let e = parse("sin(x1)^2 - cos(x1)^2", 1).unwrap();
    let c = is_zero(&e, &ZeroTestPolicy::default()).unwrap();
    assert!(!c.zero);
    assert!(c.witness.is_some());
}
