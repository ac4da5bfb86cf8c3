//! Differential Riccati equations and their Hamiltonian matrices.
//!
//! For data `(A, R, Q)` and a vector field `f`, the DRE is
//! `δ_f(X) + XA + AᵀX − XRX + Q = 0` and the Hamiltonian is
//! `ℋ = [[A, −R], [−Q, −Aᵀ]]`. An `n`-dimensional subspace `Im [U; V]`
//! satisfying `ℋ[U; V] − δ_f([U; V]) = [U; V]Λ` with `U` regular yields the
//! solution `X = V U⁻¹`.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{constant_eigendecomposition, constant_eigenvalues};
use crate::error::{Error, Result};
use crate::expr::{Point, Var, ZeroTestPolicy};
use crate::field::{CExpr, CMatrix};
use crate::grid::Grid;
use crate::lieop::{delta_f_matrix, VectorField};
use crate::verdict::Verdict;

/// Coefficients of a DRE. `R` and `Q` are symmetric.
#[derive(Clone, Debug)]
pub struct RiccatiData {
    pub a: CMatrix,
    pub r: CMatrix,
    pub q: CMatrix,
    pub f: VectorField,
}

fn symmetric(m: &CMatrix, policy: &ZeroTestPolicy) -> Result<bool> {
    Ok(m.sub(&m.transpose())?.is_zero(policy)?.zero)
}

impl RiccatiData {
    pub fn new(a: CMatrix, r: CMatrix, q: CMatrix, f: VectorField, policy: &ZeroTestPolicy) -> Result<Self> {
        let n = f.n();
        for (name, m) in [("A", &a), ("R", &r), ("Q", &q)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if !symmetric(&r, policy)? {
            return Err(Error::Precondition("R is not symmetric".into()));
        }
        if !symmetric(&q, policy)? {
            return Err(Error::Precondition("Q is not symmetric".into()));
        }
        Ok(Self { a, r, q, f })
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }
}

/// `J = [[0, I], [−I, 0]]`.
pub fn j_matrix(n: usize) -> CMatrix {
    let i = CMatrix::identity(n);
    let z = CMatrix::zeros(n, n);
    CMatrix::block(&z, &i, &i.neg(), &z).expect("conforming blocks")
}

/// `J⁻¹ = −J`.
pub fn j_inverse(n: usize) -> CMatrix {
    j_matrix(n).neg()
}

pub fn build_hamiltonian(d: &RiccatiData) -> Result<CMatrix> {
    CMatrix::block(&d.a, &d.r.neg(), &d.q.neg(), &d.a.transpose().neg())
}

/// `δ_f(X) + XA + AᵀX − XRX + Q`.
pub fn dre_residual(x: &CMatrix, d: &RiccatiData) -> Result<CMatrix> {
    let n = d.n();
    if x.rows() != n || x.cols() != n {
        return Err(Error::Dimension(format!("X is {}x{}, expected {n}x{n}", x.rows(), x.cols())));
    }
    delta_f_matrix(x, &d.f)?
        .add(&x.mul(&d.a)?)?
        .add(&d.a.transpose().mul(x)?)?
        .sub(&x.mul(&d.r)?.mul(x)?)?
        .add(&d.q)
}

/// Basis `[U; V]` of an `n`-dimensional subspace, optionally with the matrix
/// `Λ` of its invariance relation.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub u: CMatrix,
    pub v: CMatrix,
    pub lambda: Option<CMatrix>,
    /// Set when `Λ = diag(λ₁..λₙ)`.
    pub eigenvalues: Option<Vec<CExpr>>,
}

impl SubspaceBasis {
    pub fn new(u: CMatrix, v: CMatrix) -> Result<Self> {
        if !u.is_square() || u.rows() != v.rows() || u.cols() != v.cols() {
            return Err(Error::Dimension("U and V must be n x n".into()));
        }
        Ok(Self {
            u,
            v,
            lambda: None,
            eigenvalues: None,
        })
    }

    pub fn with_lambda(mut self, lambda: CMatrix) -> Result<Self> {
        if lambda.rows() != self.n() || lambda.cols() != self.n() {
            return Err(Error::Dimension("Lambda must be n x n".into()));
        }
        self.lambda = Some(lambda);
        self.eigenvalues = None;
        Ok(self)
    }

    pub fn with_eigenvalues(mut self, values: Vec<CExpr>) -> Result<Self> {
        if values.len() != self.n() {
            return Err(Error::Dimension(format!(
                "{} eigenvalues for an {}-dimensional basis",
                values.len(),
                self.n()
            )));
        }
        self.lambda = Some(CMatrix::diag(&values));
        self.eigenvalues = Some(values);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn stacked(&self) -> CMatrix {
        self.u.vstack(&self.v).expect("U and V share columns")
    }

    /// Multiplies the basis on the right by `t`; the subspace is unchanged.
    pub fn transform(&self, t: &CMatrix) -> Result<Self> {
        Self::new(self.u.mul(t)?, self.v.mul(t)?)
    }
}

/// Rows of `m` forming a maximal set of generically independent rows.
fn independent_rows(m: &CMatrix, policy: &ZeroTestPolicy) -> Result<Vec<usize>> {
    let mut rows = Vec::new();
    for r in 0..m.rows() {
        let mut trial = rows.clone();
        trial.push(r);
        if m.select_rows(&trial).rank_numeric(policy)? == trial.len() {
            rows = trial;
            if rows.len() == m.cols() {
                break;
            }
        }
    }
    Ok(rows)
}

/// Checks `ℋW − δ_f(W) − WΛ ≡ 0` for `W = [U; V]`, column by column.
///
/// Columns listed in `skip` are not checked. When the basis carries no `Λ`,
/// each checked column of `Λ` is recovered from an `n`-row regular block of
/// `W`.
pub fn check_invariance(
    b: &SubspaceBasis,
    h: &CMatrix,
    f: &VectorField,
    skip: &[usize],
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    let n = b.n();
    if h.rows() != 2 * n || h.cols() != 2 * n {
        return Err(Error::Dimension(format!("Hamiltonian must be {0}x{0}", 2 * n)));
    }
    if let Some(&j) = skip.iter().find(|&&j| j >= n) {
        return Err(Error::Dimension(format!("skipped column {} out of range", j + 1)));
    }
    let w = b.stacked();
    let solver = match &b.lambda {
        Some(_) => None,
        None => {
            let rows = independent_rows(&w, policy)?;
            if rows.len() < n {
                return Err(Error::Precondition(format!(
                    "[U; V] has generic rank {} < {n}",
                    rows.len()
                )));
            }
            let block_inv = w.select_rows(&rows).inverse(policy)?;
            Some((rows, block_inv))
        }
    };
    let mut verdict = Verdict::pass();
    for j in (0..n).filter(|j| !skip.contains(j)) {
        let wj = w.column(j);
        let image = h.mul(&wj)?.sub(&delta_f_matrix(&wj, f)?)?;
        let lambda_j = match (&b.lambda, &solver) {
            (Some(l), _) => l.column(j),
            (None, Some((rows, block_inv))) => block_inv.mul(&image.select_rows(rows))?,
            (None, None) => unreachable!("solver exists without Lambda"),
        };
        let residual = image.sub(&w.mul(&lambda_j)?)?;
        let v = Verdict::from(residual.is_zero(policy)?).at_column(j);
        if !v.pass {
            return Ok(v.with_note(format!("column {} is not invariant", j + 1)));
        }
        verdict = verdict.and(v);
    }
    if !skip.is_empty() {
        let cols: Vec<String> = skip.iter().map(|j| (j + 1).to_string()).collect();
        verdict = verdict.with_note(format!("columns {} not checked", cols.join(",")));
    }
    Ok(verdict)
}

/// Result of the subspace solution map.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: CMatrix,
    pub invariance: Verdict,
    pub residual: Verdict,
}

/// `X = V U⁻¹` after checking invariance; the DRE residual of `X` is
/// verified before returning.
pub fn solve_from_subspace(
    b: &SubspaceBasis,
    d: &RiccatiData,
    skip: &[usize],
    policy: &ZeroTestPolicy,
) -> Result<Solution> {
    if b.n() != d.n() {
        return Err(Error::Dimension("basis and data sizes differ".into()));
    }
    let h = build_hamiltonian(d)?;
    let invariance = check_invariance(b, &h, &d.f, skip, policy)?;
    if !invariance.pass {
        return Err(Error::Verification(format!(
            "basis is not invariant: {}",
            invariance.note.as_deref().unwrap_or("nonzero residual")
        )));
    }
    let u_inv = match b.u.inverse(policy) {
        Err(Error::Singular) => {
            return Err(Error::Verification(
                "U is singular; a regularity witness for U certifies this".into(),
            ))
        }
        other => other?,
    };
    let x = b.v.mul(&u_inv)?;
    let residual = Verdict::from(dre_residual(&x, d)?.is_zero(policy)?);
    if !residual.pass {
        return Err(Error::Verification("V U^-1 does not solve the DRE".into()));
    }
    Ok(Solution {
        x,
        invariance,
        residual,
    })
}

/// Columns of `U` as right eigenvectors of `A − RX`:
/// `(A − RX)uᵢ − δ_f(uᵢ) − λᵢuᵢ ≡ 0` for each `(i, λᵢ)`.
pub fn check_closedloop_spectrum(
    b: &SubspaceBasis,
    x: &CMatrix,
    d: &RiccatiData,
    pairs: &[(usize, CExpr)],
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    let closed = d.a.sub(&d.r.mul(x)?)?;
    let mut verdict = Verdict::pass();
    for (i, lambda) in pairs {
        if *i >= b.n() {
            return Err(Error::Dimension(format!("column {} out of range", i + 1)));
        }
        let u = b.u.column(*i);
        let r = closed
            .mul(&u)?
            .sub(&delta_f_matrix(&u, &d.f)?)?
            .sub(&u.scale(lambda))?;
        let v = Verdict::from(r.is_zero(policy)?).at_column(*i);
        if !v.pass {
            return Ok(v.with_note(format!("column {} is not a closed-loop eigenvector", i + 1)));
        }
        verdict = verdict.and(v);
    }
    Ok(verdict)
}

/// `J⁻¹H + HᵀJ⁻¹ ≡ 0`.
pub fn check_j_skew(h: &CMatrix, policy: &ZeroTestPolicy) -> Result<Verdict> {
    if !h.is_square() || h.rows() % 2 != 0 {
        return Err(Error::Dimension("J-skewness needs a 2n x 2n matrix".into()));
    }
    let ji = j_inverse(h.rows() / 2);
    let r = ji.mul(h)?.add(&h.transpose().mul(&ji)?)?;
    Ok(r.is_zero(policy)?.into())
}

/// The left pair `(−β, J⁻¹w)` reflected from a right pair `(β, w)` of ℋ.
pub fn reflect_pair(value: &CExpr, w: &CMatrix) -> Result<(CExpr, CMatrix)> {
    if w.rows() % 2 != 0 {
        return Err(Error::Dimension("reflection needs an even-length vector".into()));
    }
    Ok((-value, j_inverse(w.rows() / 2).mul(w)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    /// `U*V` is Hermitian.
    pub hermitian: Verdict,
    /// `UᵀV` is symmetric.
    pub symmetric: Verdict,
}

pub fn check_gram_symmetry(b: &SubspaceBasis, policy: &ZeroTestPolicy) -> Result<GramReport> {
    let omega = b.u.conj_transpose().mul(&b.v)?;
    let hermitian = omega.sub(&omega.conj_transpose())?.is_zero(policy)?.into();
    let sigma = b.u.transpose().mul(&b.v)?;
    let symmetric = sigma.sub(&sigma.transpose())?.is_zero(policy)?.into();
    Ok(GramReport { hermitian, symmetric })
}

fn witness_vector(v: &CMatrix, n: usize, policy: &ZeroTestPolicy) -> Result<()> {
    if v.cols() != 1 || v.rows() != n {
        return Err(Error::Dimension(format!("witness must be an {n}-vector")));
    }
    if v.is_zero(policy)?.zero {
        return Err(Error::Precondition("witness vector is zero".into()));
    }
    Ok(())
}

/// `Aᵀv + δ_f(v) + λv ≡ 0` and `Rv ≡ 0`: certifies that `U` is singular.
pub fn check_regularity_witness_u(
    v: &CMatrix,
    lambda: &CExpr,
    d: &RiccatiData,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    witness_vector(v, d.n(), policy)?;
    let first = d
        .a
        .transpose()
        .mul(v)?
        .add(&delta_f_matrix(v, &d.f)?)?
        .add(&v.scale(lambda))?;
    let first = Verdict::from(first.is_zero(policy)?);
    if !first.pass {
        return Ok(first.with_note("A^T v + delta_f(v) + lambda v is not zero"));
    }
    let second = Verdict::from(d.r.mul(v)?.is_zero(policy)?);
    if !second.pass {
        return Ok(second.with_note("R v is not zero"));
    }
    Ok(first.and(second))
}

/// `Au − δ_f(u) − λu ≡ 0` and `Qu ≡ 0`: certifies that `V` is singular.
pub fn check_regularity_witness_v(
    u: &CMatrix,
    lambda: &CExpr,
    d: &RiccatiData,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    witness_vector(u, d.n(), policy)?;
    let first = d
        .a
        .mul(u)?
        .sub(&delta_f_matrix(u, &d.f)?)?
        .sub(&u.scale(lambda))?;
    let first = Verdict::from(first.is_zero(policy)?);
    if !first.pass {
        return Ok(first.with_note("A u - delta_f(u) - lambda u is not zero"));
    }
    let second = Verdict::from(d.q.mul(u)?.is_zero(policy)?);
    if !second.pass {
        return Ok(second.with_note("Q u is not zero"));
    }
    Ok(first.and(second))
}

/// `δ_f(V*U) + V*UΛ + Λ*V*U + V*RV + U*QU ≡ 0`.
pub fn check_lyapunov_relation(
    b: &SubspaceBasis,
    d: &RiccatiData,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    let lambda = b
        .lambda
        .as_ref()
        .ok_or_else(|| Error::Precondition("basis has no Lambda".into()))?;
    let vs = b.v.conj_transpose();
    let us = b.u.conj_transpose();
    let g = vs.mul(&b.u)?;
    let r = delta_f_matrix(&g, &d.f)?
        .add(&g.mul(lambda)?)?
        .add(&lambda.conj_transpose().mul(&g)?)?
        .add(&vs.mul(&d.r)?.mul(&b.v)?)?
        .add(&us.mul(&d.q)?.mul(&b.u)?)?;
    Ok(r.is_zero(policy)?.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    /// Minimum eigenvalue at least `−PSD_SLACK`.
    Semidefinite,
    /// Minimum eigenvalue strictly positive.
    Definite,
}

/// Slack allowed below zero for semidefiniteness.
pub const PSD_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub pass: bool,
    pub mode: Definiteness,
    pub grid: Grid,
    pub min_eigenvalue: f64,
    /// Grid point of the minimum.
    pub argmin: Vec<f64>,
    /// Minimum eigenvalue at each grid point, in grid order.
    pub per_point: Vec<f64>,
}

/// Numeric eigenvalues of the symmetric matrix `X` at every grid point
/// (states from the grid, `t = 0`).
pub fn check_psd_on_grid(
    x: &CMatrix,
    grid: &Grid,
    mode: Definiteness,
    policy: &ZeroTestPolicy,
) -> Result<PsdReport> {
    if !x.is_square() {
        return Err(Error::Dimension("X must be square".into()));
    }
    if !symmetric(x, policy)? {
        return Err(Error::Precondition("X is not symmetric".into()));
    }
    for v in x.vars() {
        match v {
            Var::State(i) if i as usize > grid.axes.len() => {
                return Err(Error::Dimension(format!("grid has no axis for x{i}")))
            }
            Var::Param(name) => return Err(Error::OpaqueSymbol(name.to_string())),
            _ => {}
        }
    }
    let per_point: Vec<Option<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let m = x.eval_real(&Point::new(grid.point(k), 0.0))?;
            let min = SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            min.is_finite().then_some(min)
        })
        .collect();
    let mut values = Vec::with_capacity(per_point.len());
    for (k, v) in per_point.into_iter().enumerate() {
        values.push(v.ok_or_else(|| {
            Error::NonFinite(format!("X is not finite and real at {:?}", grid.point(k)))
        })?);
    }
    let (kmin, &min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Precondition("empty grid".into()))?;
    let pass = match mode {
        Definiteness::Semidefinite => min >= -PSD_SLACK,
        Definiteness::Definite => min > 0.0,
    };
    Ok(PsdReport {
        pass,
        mode,
        grid: grid.clone(),
        min_eigenvalue: min,
        argmin: grid.point(kmin),
        per_point: values,
    })
}

/// Smallest distance of a constant matrix's spectrum to the imaginary axis.
pub fn imaginary_axis_margin(h: &CMatrix) -> Result<f64> {
    Ok(constant_eigenvalues(h)?
        .iter()
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min))
}

/// Basis of the stable invariant subspace of a constant Hamiltonian: the
/// eigenvectors whose eigenvalues have negative real part, with `Λ` their
/// diagonal.
pub fn stable_subspace(h: &CMatrix) -> Result<SubspaceBasis> {
    if !h.is_square() || h.rows() % 2 != 0 {
        return Err(Error::Dimension("Hamiltonian must be 2n x 2n".into()));
    }
    let n = h.rows() / 2;
    if imaginary_axis_margin(h)? <= 1e-9 {
        return Err(Error::Precondition("Hamiltonian has eigenvalues on the imaginary axis".into()));
    }
    let origin = Point::new(Vec::new(), 0.0);
    let stable: Vec<_> = constant_eigendecomposition(h)?
        .into_iter()
        .filter(|p| p.value.eval(&origin).is_some_and(|z| z.re < 0.0))
        .collect();
    if stable.len() != n {
        return Err(Error::Precondition(format!(
            "{} stable eigenvectors, expected {n}",
            stable.len()
        )));
    }
    let mut w = stable[0].vector.clone();
    for p in &stable[1..] {
        w = w.hstack(&p.vector)?;
    }
    SubspaceBasis::new(w.submatrix(0, 0, n, n), w.submatrix(n, 0, n, n))?
        .with_eigenvalues(stable.into_iter().map(|p| p.value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ParseContext;

    fn m(rows: &[&[&str]]) -> CMatrix {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        CMatrix::parse_rows(&rows, &ParseContext::new(2)).unwrap()
    }

    fn col(entries: &[&str]) -> CMatrix {
        let rows: Vec<&[&str]> = entries.iter().map(std::slice::from_ref).collect();
        m(&rows)
    }

    fn p() -> ZeroTestPolicy {
        ZeroTestPolicy::default()
    }

    fn double_integrator() -> RiccatiData {
        RiccatiData::new(
            m(&[&["0", "1"], &["0", "0"]]),
            m(&[&["0", "0"], &["0", "1"]]),
            CMatrix::identity(2),
            VectorField::parse(&["x2", "0"], &ParseContext::new(2)).unwrap(),
            &p(),
        )
        .unwrap()
    }

    #[test]
    fn zero_data() {
        let z = CMatrix::zeros(2, 2);
        let d = RiccatiData::new(z.clone(), z.clone(), z.clone(), VectorField::zero(2), &p()).unwrap();
        assert_eq!(build_hamiltonian(&d).unwrap(), CMatrix::zeros(4, 4));
        assert!(check_j_skew(&CMatrix::zeros(4, 4), &p()).unwrap().pass);
        let b = SubspaceBasis::new(CMatrix::identity(2), z.clone()).unwrap().with_lambda(z).unwrap();
        assert!(check_lyapunov_relation(&b, &d, &p()).unwrap().pass);
    }

    #[test]
    fn asymmetric_data_is_rejected() {
        let r = m(&[&["0", "1"], &["0", "0"]]);
        let err = RiccatiData::new(CMatrix::zeros(2, 2), r, CMatrix::zeros(2, 2), VectorField::zero(2), &p());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_candidate_leaves_q() {
        let d = double_integrator();
        assert_eq!(dre_residual(&CMatrix::zeros(2, 2), &d).unwrap(), d.q.simplify());
    }

    #[test]
    fn asymmetric_r_breaks_j_skew() {
        let h = CMatrix::block(
            &CMatrix::zeros(2, 2),
            &m(&[&["0", "1"], &["0", "0"]]),
            &CMatrix::zeros(2, 2),
            &CMatrix::zeros(2, 2),
        )
        .unwrap();
        assert!(!check_j_skew(&h, &p()).unwrap().pass);
        assert!(check_j_skew(&build_hamiltonian(&double_integrator()).unwrap(), &p()).unwrap().pass);
    }

    #[test]
    fn gram_symmetry_cases() {
        let sym = SubspaceBasis::new(CMatrix::identity(2), m(&[&["1", "x1"], &["x1", "2"]])).unwrap();
        let g = check_gram_symmetry(&sym, &p()).unwrap();
        assert!(g.hermitian.pass && g.symmetric.pass);
        let nil = SubspaceBasis::new(CMatrix::identity(2), m(&[&["0", "1"], &["0", "0"]])).unwrap();
        let g = check_gram_symmetry(&nil, &p()).unwrap();
        assert!(!g.hermitian.pass && !g.symmetric.pass);
    }

    #[test]
    fn canonical_basis_round_trip() {
        let d = double_integrator();
        let h = build_hamiltonian(&d).unwrap();
        let b = stable_subspace(&h).unwrap();
        let x = solve_from_subspace(&b, &d, &[], &p()).unwrap().x;
        let canonical = SubspaceBasis::new(CMatrix::identity(2), x.clone()).unwrap();
        assert!(check_invariance(&canonical, &h, &d.f, &[], &p()).unwrap().pass);
        let lambda = d.a.sub(&d.r.mul(&x).unwrap()).unwrap();
        let with = canonical.clone().with_lambda(lambda).unwrap();
        assert!(check_invariance(&with, &h, &d.f, &[], &p()).unwrap().pass);
        let again = solve_from_subspace(&canonical, &d, &[], &p()).unwrap().x;
        assert!(again.sub(&x).unwrap().is_zero(&p()).unwrap().zero);
    }

    #[test]
    fn double_integrator_solution() {
        let d = double_integrator();
        let h = build_hamiltonian(&d).unwrap();
        let b = stable_subspace(&h).unwrap();
        let x = solve_from_subspace(&b, &d, &[], &p()).unwrap().x;
        let v = x.eval_real(&Point::new(vec![], 0.0)).unwrap();
        let s3 = 3f64.sqrt();
        for (got, want) in v.iter().zip([s3, 1.0, 1.0, s3]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        let g = check_gram_symmetry(&b, &p()).unwrap();
        assert!(g.hermitian.pass && g.symmetric.pass);
        assert!(check_lyapunov_relation(&b, &d, &p()).unwrap().pass);
        let pairs: Vec<(usize, CExpr)> = b.eigenvalues.clone().unwrap().into_iter().enumerate().collect();
        assert!(check_closedloop_spectrum(&b, &x, &d, &pairs, &p()).unwrap().pass);
        let grid = Grid::square(2, -1.0, 1.0, 3);
        assert!(check_psd_on_grid(&x, &grid, Definiteness::Definite, &p()).unwrap().pass);
    }

    #[test]
    fn non_invariant_basis() {
        let d = double_integrator();
        let h = build_hamiltonian(&d).unwrap();
        let b = SubspaceBasis::new(CMatrix::identity(2), m(&[&["1", "x1"], &["x1", "2"]])).unwrap();
        assert!(!check_invariance(&b, &h, &d.f, &[], &p()).unwrap().pass);
        assert!(matches!(solve_from_subspace(&b, &d, &[], &p()), Err(Error::Verification(_))));
        let flat = SubspaceBasis::new(m(&[&["1", "1"], &["1", "1"]]), CMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(check_invariance(&flat, &h, &d.f, &[], &p()), Err(Error::Precondition(_))));
    }

    #[test]
    fn witnesses() {
        let f = VectorField::zero(2);
        let unc = RiccatiData::new(
            m(&[&["1", "0"], &["0", "-1"]]),
            m(&[&["1", "0"], &["0", "0"]]),
            CMatrix::identity(2),
            f.clone(),
            &p(),
        )
        .unwrap();
        assert!(check_regularity_witness_u(&col(&["0", "1"]), &CExpr::int(1), &unc, &p()).unwrap().pass);
        assert!(matches!(
            check_regularity_witness_u(&col(&["0", "0"]), &CExpr::int(1), &unc, &p()),
            Err(Error::Precondition(_))
        ));
        let uno = RiccatiData::new(
            m(&[&["1", "0"], &["0", "2"]]),
            CMatrix::identity(2),
            m(&[&["1", "0"], &["0", "0"]]),
            f,
            &p(),
        )
        .unwrap();
        assert!(check_regularity_witness_v(&col(&["0", "1"]), &CExpr::int(2), &uno, &p()).unwrap().pass);
        assert!(!check_regularity_witness_v(&col(&["1", "0"]), &CExpr::int(1), &uno, &p()).unwrap().pass);
    }

    #[test]
    fn psd_grid_finds_negative_point() {
        let x = m(&[&["1", "0"], &["0", "-x1^2"]]);
        let grid = Grid::square(2, -1.0, 1.0, 5);
        let r = check_psd_on_grid(&x, &grid, Definiteness::Semidefinite, &p()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.min_eigenvalue, -1.0);
        assert_eq!(r.argmin[0].abs(), 1.0);
        let id = check_psd_on_grid(&CMatrix::identity(2), &grid, Definiteness::Definite, &p()).unwrap();
        assert!(id.pass && id.min_eigenvalue == 1.0);
        let asym = m(&[&["1", "1"], &["0", "1"]]);
        assert!(check_psd_on_grid(&asym, &grid, Definiteness::Semidefinite, &p()).is_err());
    }
}
