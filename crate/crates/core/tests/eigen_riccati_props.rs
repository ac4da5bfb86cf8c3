mod common;

use common::oracle;
use common::{col, ctx2, expr, int_matrix, mat, poly_text, rational_text, rl_circuit, rl_w1, unit_text, RL_BETA1};
use drekit::eigen::{
    check_left_eigenpair, check_matrix_conjugate, check_right_eigenpair, check_scalar_conjugate, constant_eigendecomposition,
    scale_eigenpair,
};
use drekit::field::CMatrix;
use drekit::riccati::{
    build_hamiltonian, check_closedloop_spectrum, check_gram_symmetry, check_invariance, check_j_skew,
    check_lyapunov_relation, reflect_pair, solve_from_subspace, stable_subspace,
};
use drekit::{delta_f, delta_f_matrix, CExpr, EigenPair, RiccatiData, VectorField, ZeroTestPolicy};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn policy() -> ZeroTestPolicy {
    ZeroTestPolicy::default()
}

fn linear_field(a: &[i64; 4]) -> VectorField {
    let c = ctx2();
    VectorField::parse(
        &[
            format!("({})*x1 + ({})*x2", a[0], a[1]),
            format!("({})*x1 + ({})*x2", a[2], a[3]),
        ],
        &c,
    )
    .unwrap()
}

/// `AᵀX + XA − XX + Q = 0` with `B = I`.
fn lqr(a: [i64; 4], q: [i64; 2]) -> RiccatiData {
    RiccatiData::new(
        int_matrix(2, 2, &a),
        CMatrix::identity(2),
        int_matrix(2, 2, &[q[0], 0, 0, q[1]]),
        linear_field(&a),
        &policy(),
    )
    .unwrap()
}

fn oracle_x(a: [i64; 4], q: [i64; 2]) -> DMatrix<f64> {
    let am = DMatrix::from_row_slice(2, 2, &a.map(|v| v as f64));
    let b = DMatrix::identity(2, 2);
    let qm = DMatrix::from_row_slice(2, 2, &[q[0] as f64, 0.0, 0.0, q[1] as f64]);
    let k0 = &am + DMatrix::identity(2, 2) * (am.amax() * 2.0 + 1.0);
    let x = oracle::care(&am, &b, &qm, &k0);
    assert!(oracle::care_residual(&am, &b, &qm, &x) < 1e-10);
    x
}

fn lqr_strategy() -> impl Strategy<Value = ([i64; 4], [i64; 2])> {
    (prop::array::uniform4(-3i64..=3), prop::array::uniform2(1i64..=4))
}

/// Skips Hamiltonians without an eigenvector basis (a Jordan block in the
/// closed loop); the eigenvector construction needs a simple matrix.
fn simple_hamiltonian(d: &RiccatiData) -> Option<CMatrix> {
    let h = build_hamiltonian(d).unwrap();
    match constant_eigendecomposition(&h) {
        Err(drekit::Error::Defective(_)) => None,
        _ => Some(h),
    }
}

fn czero(e: &CExpr) -> bool {
    e.is_zero(&policy()).unwrap().zero
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stable_subspace_solution_matches_newton_oracle((a, q) in lqr_strategy()) {
        let d = lqr(a, q);
        let h = simple_hamiltonian(&d);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        let b = stable_subspace(&h).unwrap();
        let s = solve_from_subspace(&b, &d, &[], &policy()).unwrap();
        prop_assert!(s.invariance.pass && s.residual.pass);
        let x = s.x.eval_real(&drekit::Point::new(vec![0.0, 0.0], 0.0)).unwrap();
        let want = oracle_x(a, q);
        prop_assert!((&x - &want).amax() < 1e-8, "{x} vs {want}");
    }

    #[test]
    fn stable_basis_has_symmetric_gram_and_lyapunov_relation((a, q) in lqr_strategy()) {
        let d = lqr(a, q);
        let h = simple_hamiltonian(&d);
        prop_assume!(h.is_some());
        let b = stable_subspace(&h.unwrap()).unwrap();
        let g = check_gram_symmetry(&b, &policy()).unwrap();
        prop_assert!(g.symmetric.pass);
        prop_assert!(check_lyapunov_relation(&b, &d, &policy()).unwrap().pass);
        let x = solve_from_subspace(&b, &d, &[], &policy()).unwrap().x;
        let pairs: Vec<_> = b.eigenvalues.clone().unwrap().into_iter().enumerate().collect();
        prop_assert!(check_closedloop_spectrum(&b, &x, &d, &pairs, &policy()).unwrap().pass);
    }

    #[test]
    fn reflected_constant_pairs_are_left_pairs((a, q) in lqr_strategy()) {
        let d = lqr(a, q);
        let h = simple_hamiltonian(&d);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        for p in constant_eigendecomposition(&h).unwrap() {
            prop_assert!(check_right_eigenpair(&h, &p, &d.f, &policy()).unwrap().pass);
            let (alpha, v) = reflect_pair(&p.value, &p.vector).unwrap();
            prop_assert!(check_left_eigenpair(&h, &EigenPair::left(alpha, v), &d.f, &policy()).unwrap().pass);
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn basis_change_leaves_solution_unchanged((a, q) in lqr_strategy(), r in poly_text(), u in unit_text()) {
        let d = lqr(a, q);
        let h = simple_hamiltonian(&d);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        let b = stable_subspace(&h).unwrap();
        let x = solve_from_subspace(&b, &d, &[], &policy()).unwrap().x;
        let t = CMatrix::parse_rows(&[vec![u, r], vec!["0".into(), "1".into()]], &ctx2()).unwrap();
        let bt = b.transform(&t).unwrap();
        prop_assert!(check_invariance(&bt, &h, &d.f, &[], &policy()).unwrap().pass);
        let xt = solve_from_subspace(&bt, &d, &[], &policy()).unwrap().x;
        prop_assert!(xt.sub(&x).unwrap().is_zero(&policy()).unwrap().zero);
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonians_are_j_skew(a in prop::collection::vec(rational_text(), 4), r in prop::collection::vec(poly_text(), 3), q in prop::collection::vec(poly_text(), 3)) {
        let am = CMatrix::parse_rows(&[vec![a[0].clone(), a[1].clone()], vec![a[2].clone(), a[3].clone()]], &ctx2()).unwrap();
        let sym = |v: &Vec<String>| CMatrix::parse_rows(&[vec![v[0].clone(), v[1].clone()], vec![v[1].clone(), v[2].clone()]], &ctx2()).unwrap();
        let f = VectorField::parse(&["x2", "-x1"], &ctx2()).unwrap();
        let d = RiccatiData::new(am, sym(&r), sym(&q), f, &policy()).unwrap();
        prop_assert!(check_j_skew(&build_hamiltonian(&d).unwrap(), &policy()).unwrap().pass);
    }

    #[test]
    fn scaling_preserves_eigenpairs(a in unit_text()) {
        let d = rl_circuit();
        let h = build_hamiltonian(&d).unwrap();
        let p = EigenPair::right(CExpr::parse(RL_BETA1, &ctx2()).unwrap(), rl_w1());
        let a = CExpr::real(expr(&a));
        let s = scale_eigenpair(&p, &a, &d.f, &policy()).unwrap();
        prop_assert!(check_right_eigenpair(&h, &s, &d.f, &policy()).unwrap().pass);
        let want = p.value.clone() - delta_f(&a, &d.f).unwrap() * a.recip(&policy()).unwrap();
        prop_assert!(czero(&(s.value.clone() - want)));
    }

    #[test]
    fn scalar_conjugacy(a in rational_text(), c in unit_text(), k in 0usize..4) {
        let f = VectorField::parse(&common::field_texts()[k], &ctx2()).unwrap();
        let a = CExpr::real(expr(&a));
        let c = CExpr::real(expr(&c));
        let b = a.clone() + delta_f(&c, &f).unwrap() * c.recip(&policy()).unwrap();
        prop_assert!(check_scalar_conjugate(&a, &b, &c, &f, &policy()).unwrap().pass);
        let off = b + CExpr::one();
        prop_assert!(!check_scalar_conjugate(&a, &off, &c, &f, &policy()).unwrap().pass);
    }

    #[test]
    fn matrix_conjugacy(n in prop::array::uniform4(-3i64..=3), r in rational_text(), u in unit_text(), k in 0usize..4) {
        let f = VectorField::parse(&common::field_texts()[k], &ctx2()).unwrap();
        let nm = int_matrix(2, 2, &n);
        let t = CMatrix::parse_rows(&[vec![u, r], vec!["0".into(), "1".into()]], &ctx2()).unwrap();
        let tinv = t.inverse(&policy()).unwrap();
        let m = t.mul(&nm).unwrap().add(&delta_f_matrix(&t, &f).unwrap()).unwrap().mul(&tinv).unwrap();
        prop_assert!(check_matrix_conjugate(&m, &nm, &t, &f, &policy()).unwrap().pass);
        let mut bad = m.clone();
        bad.set(0, 0, m.get(0, 0).clone() + CExpr::one());
        prop_assert!(!check_matrix_conjugate(&bad, &nm, &t, &f, &policy()).unwrap().pass);
    }
}

#[test]
fn rl_circuit_pair_and_its_reflection() {
    let d = rl_circuit();
    let h = build_hamiltonian(&d).unwrap();
    let beta = CExpr::parse(RL_BETA1, &ctx2()).unwrap();
    let p = EigenPair::right(beta.clone(), rl_w1());
    assert!(check_right_eigenpair(&h, &p, &d.f, &policy()).unwrap().pass);
    let (alpha, v) = reflect_pair(&beta, &rl_w1()).unwrap();
    assert!(check_left_eigenpair(&h, &EigenPair::left(alpha, v), &d.f, &policy()).unwrap().pass);
    let flipped = col(&["1/(1 + x1^2)", "-1", "-(1 + x1^2)", "0"]);
    assert!(!check_right_eigenpair(&h, &EigenPair::right(beta, flipped), &d.f, &policy()).unwrap().pass);
}

#[test]
fn rl_circuit_hamiltonian_entries() {
    let h = build_hamiltonian(&rl_circuit()).unwrap();
    let want = mat(&[
        &["-(1 + 2*x1*x2 - x1^2)/(1 + x1^2)^2", "1/(1 + x1^2)", "0", "0"],
        &["1", "-1", "0", "-1"],
        &["-(3 + 4*x1^2 + x1^4)", "0", "(1 + 2*x1*x2 - x1^2)/(1 + x1^2)^2", "-1"],
        &["0", "-1", "-1/(1 + x1^2)", "1"],
    ]);
    let diff = h.sub(&want).unwrap().is_zero(&policy()).unwrap();
    assert!(diff.zero && diff.exact);
}

#[test]
fn constant_eigenvectors_of_a_diagonalizable_3x3() {
    let m = int_matrix(3, 3, &[2, 1, 0, 0, 3, 1, 0, 0, -1]);
    let f = VectorField::zero(3);
    let pairs = constant_eigendecomposition(&m).unwrap();
    assert_eq!(pairs.len(), 3);
    for p in &pairs {
        assert!(check_right_eigenpair(&m, p, &f, &policy()).unwrap().pass);
    }
}
