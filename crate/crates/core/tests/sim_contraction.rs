mod common;

use common::{ctx2, mat, rl_x};
use drekit::contraction::{
    check_contraction_identity, check_integrability, closed_loop_field, synthesize_controller, ClosedLoop, ControlModel,
    Controller, Method,
};
use drekit::field::CMatrix;
use drekit::grid::Grid;
use drekit::sim::{
    incremental_convergence, integrate, integrate_variational, phase_portrait, portrait_svg, trajectories_csv, Termination,
};
use drekit::{Error, ParseContext, Point, VectorField, ZeroTestPolicy};
use proptest::prelude::*;

fn policy() -> ZeroTestPolicy {
    ZeroTestPolicy::default()
}

fn rl_model() -> ControlModel {
    let f = VectorField::parse(&["(-x1 + x2)/(1 + x1^2)", "x1 - x2"], &ctx2()).unwrap();
    ControlModel::new(
        f,
        mat(&[&["0"], &["1"]]),
        rl_x(),
        mat(&[&["3 + 4*x1^2 + x1^4", "0"], &["0", "1"]]),
        &policy(),
    )
    .unwrap()
}

fn decay() -> VectorField {
    VectorField::parse(&["-x1"], &ParseContext::new(1)).unwrap()
}

/// Observed order `log2(e(h) / e(h/2))` for `ẋ = −x` at `t = 1`.
fn observed_orders<F: drekit::Real>(h0: f64) -> Vec<f64> {
    let f = decay();
    let err = |h: f64| {
        let tr = integrate(&f, &[F::one()], F::zero(), F::one(), F::from(h).unwrap()).unwrap();
        (tr.final_state()[0].to_f64().unwrap() - (-1.0f64).exp()).abs()
    };
    let e: Vec<f64> = [h0, h0 / 2.0, h0 / 4.0].iter().map(|&h| err(h)).collect();
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn rk4_is_fourth_order() {
    for p in observed_orders::<f64>(0.1) {
        assert!((3.5..=4.5).contains(&p), "order {p}");
    }
}

#[test]
fn rk4_runs_in_single_precision() {
    let f = decay();
    let tr = integrate(&f, &[1.0f32], 0.0, 1.0, 0.1).unwrap();
    assert!((tr.final_state()[0] - (-1.0f32).exp()).abs() < 1e-5);
    assert_eq!(tr.times.len(), 11);
}

#[test]
fn final_step_lands_on_end_time() {
    let f = decay();
    let tr = integrate(&f, &[1.0f64], 0.0, 1.0, 0.3).unwrap();
    assert!((tr.final_time() - 1.0).abs() < 1e-12);
}

#[test]
fn divergence_guard_stops_unstable_flow() {
    let f = VectorField::parse(&["x1", "x2"], &ctx2()).unwrap();
    let tr = integrate(&f, &[1.0, 1.0], 0.0, 100.0, 0.01).unwrap();
    assert_eq!(tr.termination, Termination::Diverged);
    assert!(tr.final_time() < 100.0);
}

#[test]
fn zero_field_is_stationary() {
    let tr = integrate(&VectorField::zero(2), &[0.3, -0.7], 0.0, 2.0, 0.1).unwrap();
    assert!(tr.states.iter().all(|s| s == &vec![0.3, -0.7]));
}

#[test]
fn csv_and_svg_shapes() {
    let f = VectorField::parse(&["-x2", "x1"], &ctx2()).unwrap();
    let trs = phase_portrait(&f, &[vec![1.0, 0.0], vec![0.0, 2.0]], 1.0, 0.25).unwrap();
    let csv = trajectories_csv(&trs);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("traj_id,t,x1,x2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[0].starts_with("0,0.0000000000000000e0,1.0000000000000000e0,"));
    assert!(rows[5].starts_with("1,"));
    let svg = portrait_svg(&trs).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn variational_flow_matches_finite_differences() {
    let f = VectorField::parse(&["(-x1 + x2)/(1 + x1^2)", "x1 - x2"], &ctx2()).unwrap();
    let (x0, dx0, eps) = ([0.5f64, -0.3], [0.2f64, 0.7], 1e-6);
    let tr = integrate_variational(&f, &x0, &dx0, 0.0, 1.0, 1e-3).unwrap();
    let a = integrate(&f, &x0, 0.0, 1.0, 1e-3).unwrap();
    let shifted = [x0[0] + eps * dx0[0], x0[1] + eps * dx0[1]];
    let b = integrate(&f, &shifted, 0.0, 1.0, 1e-3).unwrap();
    let dx = tr.variations.as_ref().unwrap().last().unwrap();
    for i in 0..2 {
        let fd = (b.final_state()[i] - a.final_state()[i]) / eps;
        assert!((fd - dx[i]).abs() < 1e-5, "{fd} vs {}", dx[i]);
    }
}

#[test]
fn rl_controller_is_the_printed_polynomial() {
    let m = rl_model();
    assert!(check_integrability(&m, &policy()).unwrap().pass);
    let s = synthesize_controller(&m, &policy()).unwrap();
    assert_eq!(s.method, Method::Symbolic);
    assert!(s.gradient.pass);
    let k = s.controller.expressions().unwrap();
    assert_eq!(k[0].to_string(), "x1^3/3 + x1 + x2");
    let g = closed_loop_field(&m, k).unwrap();
    assert_eq!(g.component(1).to_string(), "-x1^3/3 - 2*x2");
    let r = check_contraction_identity(&m, &s.controller, Some(&Grid::square(2, -2.0, 2.0, 21)), &policy()).unwrap();
    assert!(r.identity.pass);
    assert_eq!(r.rhs_negative_definite, Some(true));
}

#[test]
fn identity_metric_gives_linear_controller() {
    let f = VectorField::parse(&["-x1", "-x2"], &ctx2()).unwrap();
    let m = ControlModel::new(f, mat(&[&["1"], &["0"]]), CMatrix::identity(2), CMatrix::identity(2), &policy()).unwrap();
    let s = synthesize_controller(&m, &policy()).unwrap();
    assert_eq!(s.controller.expressions().unwrap()[0].to_string(), "x1");
}

#[test]
fn non_integrable_metric_is_rejected() {
    let f = VectorField::parse(&["x2", "-x1"], &ctx2()).unwrap();
    let x = mat(&[&["1 + x2^2", "0"], &["0", "1"]]);
    let m = ControlModel::new(f, mat(&[&["0"], &["1"]]), x, CMatrix::identity(2), &policy()).unwrap();
    assert!(!check_integrability(&m, &policy()).unwrap().pass);
    assert!(matches!(synthesize_controller(&m, &policy()), Err(Error::Verification(_))));
}

#[test]
fn quadrature_controller_has_the_right_gradient() {
    let f = VectorField::parse(&["-x1", "-x2"], &ctx2()).unwrap();
    // k = ∫₀^x1 exp(s²) ds + x2 has no elementary closed form.
    let x = mat(&[&["2*exp(2*x1^2)", "exp(x1^2)"], &["exp(x1^2)", "1"]]);
    let m = ControlModel::new(f, mat(&[&["0"], &["1"]]), x, CMatrix::identity(2), &policy()).unwrap();
    let s = synthesize_controller(&m, &policy()).unwrap();
    assert_eq!(s.method, Method::Quadrature);
    let Controller::Quadrature(q) = &s.controller else { panic!("expected quadrature") };
    let h = 1e-5;
    for x1 in [-1.0f64, 0.3, 1.2] {
        let k = |y: f64| q.eval(&[y, 0.4], 0.0).unwrap()[0];
        let fd = (k(x1 + h) - k(x1 - h)) / (2.0 * h);
        assert!((fd - (x1 * x1).exp()).abs() < 1e-6);
    }
    assert!((q.eval(&[0.0f64, 0.4], 0.0).unwrap()[0] - 0.4).abs() < 1e-12);
    let g = ClosedLoop::new(&m, s.controller.clone()).unwrap();
    let tr = integrate(&g, &[1.0f64, 1.0], 0.0, 5.0, 1e-2).unwrap();
    assert!(tr.final_state().iter().all(|v| v.abs() < 0.05));
}

#[test]
fn rl_metric_is_non_increasing_along_the_closed_loop() {
    let m = rl_model();
    let s = synthesize_controller(&m, &policy()).unwrap();
    let g = closed_loop_field(&m, s.controller.expressions().unwrap()).unwrap();
    let tr = integrate_variational(&g, &[1.5, -1.0], &[0.3, 0.4], 0.0, 5.0, 1e-3).unwrap();
    let x = rl_x();
    let metric = |s: &[f64], d: &[f64]| {
        let xm = x.eval_real(&Point::new(s.to_vec(), 0.0)).unwrap();
        let v = nalgebra::DVector::from_column_slice(d);
        v.dot(&(&xm * &v))
    };
    let dxs = tr.variations.as_ref().unwrap();
    let values: Vec<f64> = tr.states.iter().zip(dxs).map(|(s, d)| metric(s, d)).collect();
    for w in values.windows(2) {
        assert!(w[1] <= w[0] + 1e-8, "{} -> {}", w[0], w[1]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rl_closed_loop_pairs_converge(a in prop::array::uniform2(-2.0f64..2.0), b in prop::array::uniform2(-2.0f64..2.0)) {
        let m = rl_model();
        let s = synthesize_controller(&m, &policy()).unwrap();
        let g = closed_loop_field(&m, s.controller.expressions().unwrap()).unwrap();
        let r = incremental_convergence(&g, &[(a.to_vec(), b.to_vec())], 20.0, 1e-2).unwrap();
        prop_assert!(r[0].completed);
        prop_assert!(r[0].final_separation <= 1e-2);
    }
}
