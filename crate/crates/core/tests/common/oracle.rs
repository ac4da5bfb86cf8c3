//! Independent reference for constant algebraic Riccati equations.
//!
//! Newton-Kleinman iteration; each Lyapunov step is solved as a dense
//! Kronecker-product linear system. Nothing here goes through the crate's
//! Hamiltonian or eigenvector code.

use nalgebra::DMatrix;

/// Solves `Acᵀ P + P Ac + M = 0` by vectorization.
pub fn lyapunov(ac: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ac.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let act = ac.transpose();
    // vec(Acᵀ P) = (I ⊗ Acᵀ) vec(P); vec(P Ac) = (Acᵀ ⊗ I) vec(P).
    let k = id.kronecker(&act) + act.kronecker(&id);
    let rhs = -DMatrix::from_column_slice(n * n, 1, m.as_slice());
    let sol = k.lu().solve(&rhs).expect("Lyapunov operator is invertible for stable Ac");
    DMatrix::from_column_slice(n, n, sol.as_slice())
}

/// Stabilizing solution of `AᵀX + XA − XBBᵀX + Q = 0` from a stabilizing
/// initial gain `k0` (so that `A − B k0` is Hurwitz).
pub fn care(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, k0: &DMatrix<f64>) -> DMatrix<f64> {
    let mut k = k0.clone();
    let mut x = DMatrix::zeros(a.nrows(), a.ncols());
    for _ in 0..100 {
        let ac = a - b * &k;
        let next = lyapunov(&ac, &(q + k.transpose() * &k));
        let done = (&next - &x).amax() < 1e-14 * (1.0 + next.amax());
        x = next;
        k = b.transpose() * &x;
        if done {
            break;
        }
    }
    x
}

pub fn care_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    (a.transpose() * x + x * a - x * b * b.transpose() * x + q).amax()
}
