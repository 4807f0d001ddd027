use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use super::form::{pair_index, pairs};
use super::{CurvatureTensor, KForm};
use crate::error::{Error, Result};

/// Tolerance on `A + Aᵀ` when accepting a matrix as skew.
pub const SKEW_TOL: f64 = 1e-9;

/// Element of so(n). `e_i∧e_j` corresponds to the map `e_i ↦ e_j, e_j ↦ −e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMap {
    m: DMatrix<f64>,
}

impl SkewMap {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::FrameMismatch { left: m.nrows(), right: m.ncols() });
        }
        let residual = crate::linalg::mat_inf_norm(&(&m + m.transpose()));
        if residual > SKEW_TOL {
            return Err(Error::NotSkew { residual });
        }
        Ok(Self { m: (&m - m.transpose()) * 0.5 })
    }

    pub fn zero(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    pub fn from_two_form(a: &KForm) -> Result<Self> {
        if a.degree() != 2 && !a.is_empty() {
            return Err(Error::WrongDegree { expected: 2, found: a.degree() });
        }
        let n = a.dim();
        let mut m = DMatrix::zeros(n, n);
        for (k, c) in a.terms() {
            m[(k[1], k[0])] = *c;
            m[(k[0], k[1])] = -*c;
        }
        Ok(Self { m })
    }

    pub fn to_two_form(&self) -> KForm {
        KForm::from_lambda2(self.dim(), &self.to_lambda2())
    }

    pub fn to_lambda2(&self) -> DVector<f64> {
        let n = self.dim();
        DVector::from_iterator(n * n.saturating_sub(1) / 2, pairs(n).into_iter().map(|(i, j)| self.m[(j, i)]))
    }

    pub fn from_lambda2(n: usize, v: &DVector<f64>) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for (p, (i, j)) in pairs(n).into_iter().enumerate() {
            m[(j, i)] = v[p];
            m[(i, j)] = -v[p];
        }
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn norm_inf(&self) -> f64 {
        crate::linalg::mat_inf_norm(&self.m)
    }

    fn same_frame(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::FrameMismatch { left: self.dim(), right: dim });
        }
        Ok(())
    }

    pub fn commutator(&self, other: &SkewMap) -> Result<SkewMap> {
        self.same_frame(other.dim())?;
        Ok(Self { m: &self.m * &other.m - &other.m * &self.m })
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    /// Derivation action on forms: `(A·ω)(X_1,…) = −Σ ω(…, A X_s, …)`.
    pub fn act_on_form(&self, t: &KForm) -> Result<KForm> {
        self.same_frame(t.dim())?;
        let n = self.dim();
        let mut out = KForm::zero(n, t.degree());
        for (idx, c) in t.terms() {
            for s in 0..idx.len() {
                let col = idx[s];
                for r in 0..n {
                    let a = self.m[(r, col)];
                    if a != 0.0 {
                        let mut new_idx = idx.clone();
                        new_idx[s] = r;
                        out.add_term(new_idx, a * c);
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn act_on_curvature(&self, r: &CurvatureTensor) -> Result<CurvatureTensor> {
        self.same_frame(r.dim())?;
        let mut out = CurvatureTensor::zero(r.dim());
        for p in r.pairs() {
            out.push_pair(self.act_on_form(&p.a)?, p.b.clone(), p.weight)?;
            out.push_pair(p.a.clone(), self.act_on_form(&p.b)?, p.weight)?;
        }
        Ok(out)
    }

    /// Matrix of the induced action on Λ² in the lexicographic basis.
    pub fn lambda2_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let ps = pairs(n);
        let mut out = DMatrix::zeros(ps.len(), ps.len());
        for (col, &(i, j)) in ps.iter().enumerate() {
            for r in 0..n {
                // (A e_i)∧e_j + e_i∧(A e_j)
                let a = self.m[(r, i)];
                if a != 0.0 && r != j {
                    let (p, s) = if r < j { (pair_index(n, r, j), 1.0) } else { (pair_index(n, j, r), -1.0) };
                    out[(p, col)] += s * a;
                }
                let b = self.m[(r, j)];
                if b != 0.0 && r != i {
                    let (p, s) = if i < r { (pair_index(n, i, r), 1.0) } else { (pair_index(n, r, i), -1.0) };
                    out[(p, col)] += s * b;
                }
            }
        }
        out
    }

    /// Same map inside `R^{new_dim}` acting on the block starting at `offset`.
    pub fn embed(&self, offset: usize, new_dim: usize) -> SkewMap {
        let n = self.dim();
        let mut m = DMatrix::zeros(new_dim, new_dim);
        m.view_mut((offset, offset), (n, n)).copy_from(&self.m);
        Self { m }
    }

    /// Conjugate by an orthogonal change of frame `P` (columns = new vectors).
    pub fn transform(&self, p: &DMatrix<f64>) -> SkewMap {
        Self { m: p.transpose() * &self.m * p }
    }

    /// Trace-form pairing normalized so that `{e_i∧e_j}` is orthonormal.
    pub fn inner(&self, other: &SkewMap) -> f64 {
        0.5 * self.m.component_mul(&other.m).sum()
    }

    pub fn scale(&self, s: f64) -> SkewMap {
        Self { m: &self.m * s }
    }
}

impl Add for &SkewMap {
    type Output = SkewMap;
    fn add(self, rhs: &SkewMap) -> SkewMap {
        SkewMap { m: &self.m + &rhs.m }
    }
}

impl Sub for &SkewMap {
    type Output = SkewMap;
    fn sub(self, rhs: &SkewMap) -> SkewMap {
        SkewMap { m: &self.m - &rhs.m }
    }
}

impl Mul<&SkewMap> for f64 {
    type Output = SkewMap;
    fn mul(self, rhs: &SkewMap) -> SkewMap {
        rhs.scale(self)
    }
}
