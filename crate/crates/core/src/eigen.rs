//! Nonlinear eigenpairs, `δ_f`-conjugacy, and simplicity.
//!
//! A right eigenpair `(β, w)` of `M` satisfies `Mw − δ_f(w) = βw`; a left
//! eigenpair `(α, v)` satisfies `vᵀM + δ_f(v)ᵀ = αvᵀ`. Scaling `w` by a
//! nonzero `a` moves `β` to `β − δ_f(a)/a`, so eigenvalues are only defined
//! up to `δ_f`-conjugacy.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Point, ZeroTestPolicy};
use crate::field::{CExpr, CMatrix};
use crate::lieop::{delta_f, delta_f_matrix, VectorField};
use crate::verdict::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub side: Side,
    pub value: CExpr,
    /// Column vector.
    pub vector: CMatrix,
    pub label: Option<String>,
}

impl EigenPair {
    pub fn right(value: CExpr, vector: CMatrix) -> Self {
        Self {
            side: Side::Right,
            value,
            vector,
            label: None,
        }
    }

    pub fn left(value: CExpr, vector: CMatrix) -> Self {
        Self {
            side: Side::Left,
            ..Self::right(value, vector)
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

fn conform(m: &CMatrix, p: &EigenPair, side: Side) -> Result<()> {
    if p.side != side {
        return Err(Error::Precondition(format!("expected a {side:?} eigenpair").to_lowercase()));
    }
    if !m.is_square() {
        return Err(Error::Dimension("eigenpairs need a square matrix".into()));
    }
    if p.vector.cols() != 1 || p.vector.rows() != m.rows() {
        return Err(Error::Dimension(format!(
            "eigenvector is {}x{}, matrix is {}x{}",
            p.vector.rows(),
            p.vector.cols(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn nonzero_vector(w: &CMatrix, policy: &ZeroTestPolicy) -> Result<Option<Verdict>> {
    if w.is_zero(policy)?.zero {
        return Ok(Some(Verdict::fail("eigenvector is zero")));
    }
    Ok(None)
}

/// Residual `Mw − δ_f(w) − βw`.
pub fn right_residual(m: &CMatrix, p: &EigenPair, f: &VectorField) -> Result<CMatrix> {
    conform(m, p, Side::Right)?;
    m.mul(&p.vector)?
        .sub(&delta_f_matrix(&p.vector, f)?)?
        .sub(&p.vector.scale(&p.value))
}

/// Residual `vᵀM + δ_f(v)ᵀ − αvᵀ`, a row.
pub fn left_residual(m: &CMatrix, p: &EigenPair, f: &VectorField) -> Result<CMatrix> {
    conform(m, p, Side::Left)?;
    let vt = p.vector.transpose();
    vt.mul(m)?
        .add(&delta_f_matrix(&vt, f)?)?
        .sub(&vt.scale(&p.value))
}

pub fn check_right_eigenpair(
    m: &CMatrix,
    p: &EigenPair,
    f: &VectorField,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    let r = right_residual(m, p, f)?;
    if let Some(v) = nonzero_vector(&p.vector, policy)? {
        return Ok(v);
    }
    Ok(r.is_zero(policy)?.into())
}

pub fn check_left_eigenpair(
    m: &CMatrix,
    p: &EigenPair,
    f: &VectorField,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    let r = left_residual(m, p, f)?;
    if let Some(v) = nonzero_vector(&p.vector, policy)? {
        return Ok(v);
    }
    Ok(r.is_zero(policy)?.into())
}

/// `(λ − δ_f(a)/a, a·w)`.
pub fn scale_eigenpair(
    p: &EigenPair,
    a: &CExpr,
    f: &VectorField,
    policy: &ZeroTestPolicy,
) -> Result<EigenPair> {
    if p.side != Side::Right {
        return Err(Error::Precondition("scaling applies to right eigenpairs".into()));
    }
    let shift = delta_f(a, f)?.div(a, policy)?;
    Ok(EigenPair {
        side: Side::Right,
        value: &p.value - &shift,
        vector: p.vector.scale(a),
        label: p.label.clone(),
    })
}

/// `b = a + δ_f(c)/c`.
pub fn check_scalar_conjugate(
    a: &CExpr,
    b: &CExpr,
    c: &CExpr,
    f: &VectorField,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    if c.is_zero(policy)?.zero {
        return Err(Error::Precondition("conjugacy witness is zero".into()));
    }
    let log_derivative = delta_f(c, f)?.div(c, policy)?;
    Ok((&(b - a) - &log_derivative).is_zero(policy)?.into())
}

/// `M·T − T·N − δ_f(T) ≡ 0` with `T` regular.
pub fn check_matrix_conjugate(
    m: &CMatrix,
    n: &CMatrix,
    t: &CMatrix,
    f: &VectorField,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    if !t.is_square() || !m.is_square() || !n.is_square() || m.rows() != t.rows() || n.rows() != t.rows() {
        return Err(Error::Dimension("conjugacy needs square matrices of one size".into()));
    }
    if t.rank_numeric(policy)? < t.rows() {
        return Err(Error::Singular);
    }
    let r = m.mul(t)?.sub(&t.mul(n)?)?.sub(&delta_f_matrix(t, f)?)?;
    Ok(r.is_zero(policy)?.into())
}

/// Simplicity relative to the supplied eigenvectors: all verify and span.
pub fn check_simple(
    m: &CMatrix,
    pairs: &[EigenPair],
    f: &VectorField,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    let Some(first) = pairs.first() else {
        return Ok(Verdict::fail("no eigenpairs supplied"));
    };
    if pairs.iter().any(|p| p.side != first.side) {
        return Err(Error::Precondition("eigenpairs mix left and right".into()));
    }
    let mut verdict = Verdict::pass();
    for (i, p) in pairs.iter().enumerate() {
        let v = match p.side {
            Side::Right => check_right_eigenpair(m, p, f, policy)?,
            Side::Left => check_left_eigenpair(m, p, f, policy)?,
        };
        if !v.pass {
            return Err(Error::Verification(format!("eigenpair {} does not verify", i + 1)));
        }
        verdict = verdict.and(v);
    }
    let mut stacked = first.vector.clone();
    for p in &pairs[1..] {
        stacked = stacked.hstack(&p.vector)?;
    }
    let rank = stacked.rank_numeric(policy)?;
    if rank < m.rows() {
        return Ok(Verdict::fail(format!("eigenvectors span rank {rank} of {}", m.rows())));
    }
    Ok(verdict)
}

fn constant_values(m: &CMatrix) -> Result<DMatrix<Complex64>> {
    if !m.is_constant() {
        return Err(Error::Precondition("matrix is not constant".into()));
    }
    m.eval(&Point::new(Vec::new(), 0.0))
        .ok_or_else(|| Error::NonFinite("constant matrix entry".into()))
}

/// Numeric eigenvalues of a constant matrix.
pub fn constant_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let values = constant_values(m)?;
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let real = values.map(|z| z.re);
    if values.iter().any(|z| z.im != 0.0) {
        return Err(Error::Precondition("matrix is not real".into()));
    }
    real_eigenvalues(&real)
}

fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)])
        .eigenvalues()
        .map_err(|e| Error::Precondition(format!("eigenvalue iteration did not converge: {e:?}")))
}

/// Eigendecomposition of a constant real matrix, lifted to exact constant
/// pairs. Eigenvalues are grouped when closer than `1e-6·max(1, ‖M‖)`; a
/// group whose eigenspace is smaller than the group is defective.
pub fn constant_eigendecomposition(m: &CMatrix) -> Result<Vec<EigenPair>> {
    let values = constant_values(m)?;
    let eigenvalues = constant_eigenvalues(m)?;
    let n = m.rows();
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let cluster_tol = 1e-6 * scale;
    let null_tol = 1e-8 * scale;

    let mut order: Vec<Complex64> = eigenvalues.clone();
    order.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for z in order {
        match groups.iter_mut().find(|g| (g[0] - z).norm() <= cluster_tol) {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }

    let mut pairs = Vec::with_capacity(n);
    for g in groups {
        let lambda = g.iter().sum::<Complex64>() / g.len() as f64;
        let shifted = &values - DMatrix::<Complex64>::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        // Rounding splits a repeated eigenvalue by about the error of the
        // averaged shift; a Jordan block instead leaves an O(1) singular value.
        let spread = g.iter().map(|z| (z - lambda).norm()).fold(0.0, f64::max);
        let tol = null_tol.max(100.0 * spread);
        let null: Vec<usize> = (0..n).filter(|&k| svd.singular_values[k] <= tol).collect();
        if null.len() < g.len() {
            return Err(Error::Defective(format!(
                "eigenvalue {lambda} has multiplicity {} but {} eigenvectors",
                g.len(),
                null.len()
            )));
        }
        let value = lift(clean(lambda))?;
        for &k in null.iter().take(g.len()) {
            let mut w: Vec<Complex64> = v_t.row(k).iter().map(|z| z.conj()).collect();
            let pivot = *w
                .iter()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("nonempty vector");
            for z in &mut w {
                *z = clean(*z / pivot);
            }
            let vector = CMatrix::column_vector(w.into_iter().map(lift).collect::<Result<_>>()?)?;
            pairs.push(EigenPair::right(value.clone(), vector));
        }
    }
    Ok(pairs)
}

/// Drops floating noise below `1e-15` in either part.
fn clean(z: Complex64) -> Complex64 {
    let tidy = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    Complex64::new(tidy(z.re), tidy(z.im))
}

fn lift(z: Complex64) -> Result<CExpr> {
    CExpr::from_complex(z).ok_or_else(|| Error::NonFinite(format!("{z}")))
}
