use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::form::{pair_index, pairs};
use super::{KForm, SkewMap};
use crate::error::{Error, Result};

/// One summand `weight · (a ⊙ b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPair {
    pub a: KForm,
    pub b: KForm,
    pub weight: f64,
}

/// Element of Λ²⊙Λ², evaluated as `(a⊙b)(X,Y) = ½(a(X,Y)·b + b(X,Y)·a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    pairs: Vec<SymPair>,
}

fn check_two_form(dim: usize, f: &KForm) -> Result<()> {
    if f.dim() != dim {
        return Err(Error::FrameMismatch { left: dim, right: f.dim() });
    }
    if f.degree() != 2 && !f.is_empty() {
        return Err(Error::WrongDegree { expected: 2, found: f.degree() });
    }
    Ok(())
}

impl CurvatureTensor {
    pub fn zero(dim: usize) -> Self {
        Self { dim, pairs: Vec::new() }
    }

    pub fn sym_square(a: &KForm) -> Result<Self> {
        let mut r = Self::zero(a.dim());
        r.push_pair(a.clone(), a.clone(), 1.0)?;
        Ok(r)
    }

    pub fn sym_pair(a: &KForm, b: &KForm, weight: f64) -> Result<Self> {
        let mut r = Self::zero(a.dim());
        r.push_pair(a.clone(), b.clone(), weight)?;
        Ok(r)
    }

    /// Append `weight · (a⊙b)`; zero summands are skipped.
    pub fn push_pair(&mut self, a: KForm, b: KForm, weight: f64) -> Result<()> {
        check_two_form(self.dim, &a)?;
        check_two_form(self.dim, &b)?;
        if weight != 0.0 && !a.is_empty() && !b.is_empty() {
            self.pairs.push(SymPair { a, b, weight });
        }
        Ok(())
    }

    pub fn push_square(&mut self, a: KForm, weight: f64) -> Result<()> {
        self.push_pair(a.clone(), a, weight)
    }

    /// Diagonalize a symmetric operator on Λ² into weighted squares.
    pub fn from_gram(n: usize, g: &DMatrix<f64>) -> Result<Self> {
        let len = n * n.saturating_sub(1) / 2;
        if g.nrows() != len || g.ncols() != len {
            return Err(Error::FrameMismatch { left: len, right: g.nrows() });
        }
        let mut r = Self::zero(n);
        if len == 0 {
            return Ok(r);
        }
        let eig = SymmetricEigen::new((g + g.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());
        for k in order {
            let w = eig.eigenvalues[k];
            if w.abs() > super::PRUNE_TOL {
                let mut v: DVector<f64> = eig.eigenvectors.column(k).into();
                crate::linalg::sign_fix(&mut v);
                r.push_square(KForm::from_lambda2(n, &v), w)?;
            }
        }
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[SymPair] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn add(&self, other: &CurvatureTensor) -> Result<CurvatureTensor> {
        if self.dim != other.dim {
            return Err(Error::FrameMismatch { left: self.dim, right: other.dim });
        }
        let mut out = self.clone();
        out.pairs.extend(other.pairs.iter().cloned());
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> CurvatureTensor {
        let mut out = Self::zero(self.dim);
        if s != 0.0 {
            out.pairs = self.pairs.iter().map(|p| SymPair { weight: p.weight * s, ..p.clone() }).collect();
        }
        out
    }

    /// The 2-form `R(e_i, e_j)`.
    pub fn eval(&self, i: usize, j: usize) -> Result<KForm> {
        for &x in &[i, j] {
            if x >= self.dim {
                return Err(Error::IndexOutOfRange { index: x, dim: self.dim });
            }
        }
        let mut out = KForm::zero(self.dim, 2);
        for p in &self.pairs {
            let (x, y) = (p.a.coeff(&[i, j]), p.b.coeff(&[i, j]));
            if x != 0.0 {
                out += &p.b.scale(0.5 * p.weight * x);
            }
            if y != 0.0 {
                out += &p.a.scale(0.5 * p.weight * y);
            }
        }
        Ok(out)
    }

    /// Symmetric matrix `G[q][p] = ⟨R(e_p), e_q⟩` on the lexicographic Λ² basis.
    pub fn gram(&self) -> DMatrix<f64> {
        let len = self.dim * self.dim.saturating_sub(1) / 2;
        let mut g = DMatrix::zeros(len, len);
        for p in &self.pairs {
            let u = p.a.to_lambda2().expect("2-form");
            let v = p.b.to_lambda2().expect("2-form");
            g.ger(0.5 * p.weight, &u, &v, 1.0);
            g.ger(0.5 * p.weight, &v, &u, 1.0);
        }
        g
    }

    /// `R(e_i, e_j)` as skew maps for all pairs i < j (lexicographic).
    pub fn operators(&self) -> Vec<SkewMap> {
        let g = self.gram();
        (0..g.ncols()).map(|p| SkewMap::from_lambda2(self.dim, &g.column(p).into())).collect()
    }

    /// `R(X,Y,Z,V) = ⟨R(X,Y), Z∧V⟩` on basis vectors.
    pub fn eval4(gram: &DMatrix<f64>, n: usize, x: usize, y: usize, z: usize, v: usize) -> f64 {
        let idx = |a: usize, b: usize| -> Option<(usize, f64)> {
            match a.cmp(&b) {
                std::cmp::Ordering::Less => Some((pair_index(n, a, b), 1.0)),
                std::cmp::Ordering::Greater => Some((pair_index(n, b, a), -1.0)),
                std::cmp::Ordering::Equal => None,
            }
        };
        match (idx(x, y), idx(z, v)) {
            (Some((p, s)), Some((q, t))) => s * t * gram[(q, p)],
            _ => 0.0,
        }
    }

    /// Derivation action of `A` on each slot.
    pub fn act(&self, a: &SkewMap) -> Result<CurvatureTensor> {
        a.act_on_curvature(self)
    }

    /// `Σ weight · (a∧b)`; the first Bianchi identity reads `b(R) = 2σ_T`.
    pub fn bianchi_4form(&self) -> KForm {
        let mut out = KForm::zero(self.dim, 4);
        for p in &self.pairs {
            out += &p.a.wedge(&p.b).expect("same frame").scale(p.weight);
        }
        out
    }

    /// Pull back both slots along the frame change `P` (see `KForm::pullback`).
    pub fn pullback(&self, p: &DMatrix<f64>) -> Result<CurvatureTensor> {
        let mut out = Self::zero(p.ncols());
        for s in &self.pairs {
            out.push_pair(s.a.pullback(p)?, s.b.pullback(p)?, s.weight)?;
        }
        Ok(out)
    }

    pub fn reindex(&self, map: &[Option<usize>], new_dim: usize) -> CurvatureTensor {
        let mut out = Self::zero(new_dim);
        for s in &self.pairs {
            out.push_pair(s.a.reindex(map, new_dim), s.b.reindex(map, new_dim), s.weight).expect("same frame");
        }
        out
    }

    pub fn embed(&self, offset: usize, new_dim: usize) -> CurvatureTensor {
        let map: Vec<Option<usize>> = (0..self.dim).map(|i| Some(i + offset)).collect();
        self.reindex(&map, new_dim)
    }

    /// ∞-norm of the Gram matrix.
    pub fn norm_inf(&self) -> f64 {
        crate::linalg::mat_inf_norm(&self.gram())
    }

    /// ∞-norm distance between Gram matrices.
    pub fn distance(&self, other: &CurvatureTensor) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::FrameMismatch { left: self.dim, right: other.dim });
        }
        Ok(crate::linalg::mat_inf_norm(&(self.gram() - other.gram())))
    }

    pub fn all_pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.dim)
    }
}

/// Positive-definite pairing on Λ² with `{e_i∧e_j}` orthonormal.
pub fn lambda2_inner(a: &KForm, b: &KForm) -> Result<f64> {
    check_two_form(a.dim(), a)?;
    check_two_form(a.dim(), b)?;
    a.inner(b).or_else(|e| if a.is_empty() || b.is_empty() { Ok(0.0) } else { Err(e) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, idx: &[usize]) -> KForm {
        KForm::basis(dim, idx).unwrap()
    }

    #[test]
    fn evaluation_convention() {
        let s2 = CurvatureTensor::sym_square(&e(2, &[0, 1])).unwrap().scale(-1.0);
        assert_eq!(s2.eval(0, 1).unwrap(), -e(2, &[0, 1]));
        let r = CurvatureTensor::sym_pair(&e(4, &[0, 1]), &e(4, &[2, 3]), 1.0).unwrap();
        assert_eq!(r.eval(0, 1).unwrap(), e(4, &[2, 3]).scale(0.5));
        let a = &e(4, &[0, 1]) + &e(4, &[2, 3]);
        assert_eq!(CurvatureTensor::sym_square(&a).unwrap().eval(0, 1).unwrap(), a);
        assert!(r.eval(0, 4).is_err());
    }

    #[test]
    fn inner_products() {
        assert_eq!(lambda2_inner(&e(3, &[0, 1]), &e(3, &[0, 1])).unwrap(), 1.0);
        assert_eq!(lambda2_inner(&e(3, &[0, 1]), &e(3, &[0, 2])).unwrap(), 0.0);
        assert!(lambda2_inner(&e(3, &[0, 1]), &e(3, &[0])).is_err());
    }

    #[test]
    fn gram_matches_eval() {
        let a = KForm::from_terms(4, 2, [(vec![0, 1], 1.0), (vec![2, 3], -2.0)]).unwrap();
        let b = KForm::from_terms(4, 2, [(vec![0, 2], 0.5), (vec![1, 3], 1.0)]).unwrap();
        let r = CurvatureTensor::sym_pair(&a, &b, 0.7).unwrap();
        let g = r.gram();
        assert!((&g - g.transpose()).abs().max() == 0.0);
        for (p, (i, j)) in pairs(4).into_iter().enumerate() {
            let col: DVector<f64> = g.column(p).into();
            assert!((col - r.eval(i, j).unwrap().to_lambda2().unwrap()).norm() < 1e-14);
        }
        let back = CurvatureTensor::from_gram(4, &g).unwrap();
        assert!(back.distance(&r).unwrap() < 1e-12);
    }

    #[test]
    fn action_examples() {
        let r = CurvatureTensor::sym_square(&e(3, &[0, 1])).unwrap();
        let a = SkewMap::from_two_form(&e(3, &[0, 1])).unwrap();
        assert!(r.act(&a).unwrap().norm_inf() == 0.0);
        let b = SkewMap::from_two_form(&e(3, &[0, 2])).unwrap();
        let expected = CurvatureTensor::sym_pair(&e(3, &[1, 2]), &e(3, &[0, 1]), -2.0).unwrap();
        assert!(r.act(&b).unwrap().distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn bianchi_examples() {
        assert!(CurvatureTensor::sym_square(&e(4, &[0, 1])).unwrap().bianchi_4form().is_empty());
        let r = CurvatureTensor::sym_pair(&e(4, &[0, 1]), &e(4, &[2, 3]), 1.0).unwrap();
        assert_eq!(r.bianchi_4form(), e(4, &[0, 1, 2, 3]));
    }
}
