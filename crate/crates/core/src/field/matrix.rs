use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CExpr;
use crate::error::{Error, Result};
use crate::expr::{ParseContext, Point, ZeroTestPolicy};
use crate::Var;

/// Singular values at or below this fraction of the largest count as zero.
pub const SVD_RANK_THRESHOLD: f64 = 1e-9;

/// Dense matrix over the complex function field, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<CExpr>,
}

/// Entrywise zero decision for a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub zero: bool,
    /// Every entry was decided by canonicalization.
    pub exact: bool,
    /// Sample points evaluated across entries.
    pub points: usize,
    /// Largest magnitude observed over all sampled entries.
    pub max_abs: f64,
    /// First entry found nonzero, `(row, col)`, 0-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<std::collections::BTreeMap<String, f64>>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<CExpr>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CExpr) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| CExpr::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { CExpr::one() } else { CExpr::zero() })
    }

    pub fn diag(entries: &[CExpr]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { CExpr::zero() })
    }

    pub fn column_vector(entries: Vec<CExpr>) -> Result<Self> {
        let n = entries.len();
        Self::new(n, 1, entries)
    }

    /// Reads rows of `"re"` / `"re @ im"` strings.
    pub fn parse_rows<S: AsRef<str>>(rows: &[Vec<S>], ctx: &ParseContext) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        let data = rows
            .iter()
            .flatten()
            .map(|s| CExpr::parse(s.as_ref(), ctx))
            .collect::<Result<Vec<_>>>()?;
        Self::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CExpr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CExpr) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &CExpr> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }

    pub fn map(&self, f: impl Fn(&CExpr) -> CExpr) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&CExpr) -> Result<CExpr>) -> Result<Self> {
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn simplify(&self) -> Self {
        self.map(CExpr::simplify)
    }

    pub fn column(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self.get(i, j).clone())
    }

    pub fn columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, k| self.get(i, cols[k]).clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |k, j| self.get(rows[k], j).clone())
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// `[self; below]`.
    pub fn vstack(&self, below: &CMatrix) -> Result<Self> {
        if self.cols != below.cols {
            return Err(Error::Dimension(format!(
                "vertical stack of {} and {} columns",
                self.cols, below.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Self::new(self.rows + below.rows, self.cols, data)
    }

    /// `[self, right]`.
    pub fn hstack(&self, right: &CMatrix) -> Result<Self> {
        if self.rows != right.rows {
            return Err(Error::Dimension(format!(
                "horizontal stack of {} and {} rows",
                self.rows, right.rows
            )));
        }
        Ok(Self::from_fn(self.rows, self.cols + right.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                right.get(i, j - self.cols).clone()
            }
        }))
    }

    /// `[[a, b], [c, d]]`.
    pub fn block(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> Result<Self> {
        a.hstack(b)?.vstack(&c.hstack(d)?)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn conj(&self) -> Self {
        self.map(CExpr::conj)
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    fn same_shape(&self, o: &CMatrix, what: &str) -> Result<()> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::Dimension(format!(
                "{what} of {}x{} and {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &CMatrix) -> Result<Self> {
        self.same_shape(o, "sum")?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + o.get(i, j)))
    }

    pub fn sub(&self, o: &CMatrix) -> Result<Self> {
        self.same_shape(o, "difference")?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - o.get(i, j)))
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    pub fn scale(&self, k: &CExpr) -> Self {
        self.map(|e| k * e)
    }

    pub fn mul(&self, o: &CMatrix) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(Self::from_fn(self.rows, o.cols, |i, j| {
            let mut re = crate::Expr::zero();
            let mut im = crate::Expr::zero();
            for k in 0..self.cols {
                let (a, b) = (self.get(i, k), o.get(k, j));
                if a.re.is_literal_zero() && a.im.is_literal_zero() {
                    continue;
                }
                re = &re + &a.re * &b.re - &a.im * &b.im;
                im = &im + &a.re * &b.im + &a.im * &b.re;
            }
            CExpr::new(crate::simplify(&re), crate::simplify(&im))
        }))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.data.iter().flat_map(CExpr::vars).collect()
    }

    /// All entries free of variables.
    pub fn is_constant(&self) -> bool {
        self.vars().is_empty()
    }

    /// Entrywise zero test; stops at the first nonzero entry.
    pub fn is_zero(&self, policy: &ZeroTestPolicy) -> Result<ResidualReport> {
        let mut report = ResidualReport {
            zero: true,
            exact: true,
            points: 0,
            max_abs: 0.0,
            entry: None,
            witness: None,
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                let c = self.get(i, j).is_zero(policy)?;
                report.exact &= c.exact;
                report.points += c.points;
                report.max_abs = report.max_abs.max(c.max_abs);
                if !c.zero {
                    report.zero = false;
                    report.entry = Some((i, j));
                    report.witness = c.witness;
                    return Ok(report);
                }
            }
        }
        Ok(report)
    }

    pub fn eval(&self, p: &Point<f64>) -> Option<DMatrix<Complex64>> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self.get(i, j).eval(p)?;
            }
        }
        Some(out)
    }

    /// Real part evaluated at `p`; `None` when non-finite or when some
    /// imaginary part is not negligible.
    pub fn eval_real(&self, p: &Point<f64>) -> Option<DMatrix<f64>> {
        let z = self.eval(p)?;
        let scale = z.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if z.iter().any(|v| v.im.abs() > 1e-12 * scale) {
            return None;
        }
        Some(z.map(|v| v.re))
    }

    /// Inverse by Gauss-Jordan elimination with zero-tested pivots: in each
    /// column the first remaining row whose entry is not zero in the field
    /// becomes the pivot.
    pub fn inverse(&self, policy: &ZeroTestPolicy) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "inverse of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a: Vec<Vec<CExpr>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).simplify()).collect())
            .collect();
        let mut inv: Vec<Vec<CExpr>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { CExpr::one() } else { CExpr::zero() }).collect())
            .collect();
        for k in 0..n {
            let mut pivot = None;
            for r in k..n {
                if !a[r][k].is_zero(policy)?.zero {
                    pivot = Some(r);
                    break;
                }
            }
            let p = pivot.ok_or(Error::Singular)?;
            a.swap(k, p);
            inv.swap(k, p);
            let pinv = a[k][k].recip(policy)?;
            for j in 0..n {
                a[k][j] = &a[k][j] * &pinv;
                inv[k][j] = &inv[k][j] * &pinv;
            }
            for r in 0..n {
                if r == k {
                    continue;
                }
                let factor = a[r][k].clone();
                if factor.re.is_literal_zero() && factor.im.is_literal_zero() {
                    continue;
                }
                for j in 0..n {
                    a[r][j] = &a[r][j] - &(&factor * &a[k][j]);
                    inv[r][j] = &inv[r][j] - &(&factor * &inv[k][j]);
                }
            }
        }
        Ok(Self::from_fn(n, n, |i, j| inv[i][j].clone()))
    }

    /// Generic rank over the field: the largest numeric rank seen at up to
    /// `policy.samples` random finite points.
    pub fn rank_numeric(&self, policy: &ZeroTestPolicy) -> Result<usize> {
        policy.validate()?;
        let vars: Vec<Var> = self.vars().into_iter().collect();
        let full = self.rows.min(self.cols);
        let mut rng = policy.rng();
        let mut best = None;
        let samples = if vars.is_empty() { 1 } else { policy.samples };
        for _ in 0..samples {
            let mut value = None;
            for _ in 0..policy.retries {
                let p = policy.sample_point(&vars, &mut rng);
                if let Some(m) = self.eval(&p) {
                    value = Some(m);
                    break;
                }
            }
            let Some(m) = value else { continue };
            let r = numeric_rank(&m);
            best = Some(best.map_or(r, |b: usize| b.max(r)));
            if r == full {
                break;
            }
        }
        best.ok_or(Error::Inconclusive {
            finite: 0,
            required: samples,
        })
    }
}

/// Rank of a complex matrix by singular-value threshold.
pub(crate) fn numeric_rank(m: &DMatrix<Complex64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > SVD_RANK_THRESHOLD * max).count()
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}
