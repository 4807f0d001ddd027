//! Finite-dimensional real Lie algebras given by structure constants.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Subspace};
use crate::multilinear::{Frame, SkewMap};

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    frame: Frame,
    /// `c[(i*d + j)*d + k]` is the coefficient of `x_k` in `[x_i, x_j]`.
    c: Vec<f64>,
    /// Optional bilinear form in this basis (e.g. an invariant metric).
    pub form: Option<DMatrix<f64>>,
}

impl LieAlgebra {
    pub fn abelian(frame: Frame) -> Self {
        let d = frame.dim();
        Self { frame, c: vec![0.0; d * d * d], form: None }
    }

    /// Algebra whose nonzero brackets `[x_i, x_j] = v` (i ≠ j) are listed;
    /// the opposite brackets are filled in by antisymmetry.
    pub fn from_brackets(frame: Frame, brackets: &[(usize, usize, DVector<f64>)]) -> Result<Self> {
        let mut out = Self::abelian(frame);
        let d = out.dim();
        for (i, j, v) in brackets {
            for &x in &[*i, *j] {
                if x >= d {
                    return Err(Error::IndexOutOfRange { index: x, dim: d });
                }
            }
            if v.len() != d {
                return Err(Error::FrameMismatch { left: d, right: v.len() });
            }
            if i == j {
                if v.iter().any(|x| *x != 0.0) {
                    return Err(Error::Format(format!("bracket [x{0}, x{0}] must vanish", i + 1)));
                }
                continue;
            }
            out.set_bracket(*i, *j, v);
        }
        Ok(out)
    }

    /// Structure constants from a full table (`table[i][j]` = `[x_i, x_j]`).
    pub fn from_table(frame: Frame, table: &[Vec<DVector<f64>>]) -> Result<Self> {
        let d = frame.dim();
        let mut out = Self::abelian(frame);
        if table.len() != d {
            return Err(Error::FrameMismatch { left: d, right: table.len() });
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != d {
                return Err(Error::FrameMismatch { left: d, right: row.len() });
            }
            for (j, v) in row.iter().enumerate() {
                for k in 0..d {
                    out.c[(i * d + j) * d + k] = v[k];
                }
            }
        }
        Ok(out)
    }

    fn set_bracket(&mut self, i: usize, j: usize, v: &DVector<f64>) {
        let d = self.dim();
        for k in 0..d {
            self.c[(i * d + j) * d + k] = v[k];
            self.c[(j * d + i) * d + k] = -v[k];
        }
    }

    pub fn with_form(mut self, form: DMatrix<f64>) -> Self {
        self.form = Some(form);
        self
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn structure(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.c[(i * d + j) * d + k]
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        let d = self.dim();
        DVector::from_column_slice(&self.c[(i * d + j) * d..(i * d + j + 1) * d])
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let s = x[i] * y[j];
                if s == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += s * self.c[base + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad(x_i)`; column `j` is `[x_i, x_j]`.
    pub fn ad(&self, i: usize) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, j| self.structure(i, j, k))
    }

    pub fn ad_vec(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            if x[i] != 0.0 {
                out += self.ad(i) * x[i];
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                for k in 0..d {
                    worst = worst.max((self.structure(i, j, k) + self.structure(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// `max ‖[[x,y],z] + [[y,z],x] + [[z,x],y]‖∞` over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let basis = |i: usize| {
            let mut v = DVector::zeros(d);
            v[i] = 1.0;
            v
        };
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let s = self.bracket(&self.bracket_basis(i, j), &basis(k))
                        + self.bracket(&self.bracket_basis(j, k), &basis(i))
                        + self.bracket(&self.bracket_basis(k, i), &basis(j));
                    worst = worst.max(linalg::inf_norm(&s));
                }
            }
        }
        worst
    }

    /// `tr(ad x_i ∘ ad x_j)`.
    pub fn killing(&self) -> DMatrix<f64> {
        let d = self.dim();
        let ads: Vec<DMatrix<f64>> = (0..d).map(|i| self.ad(i)).collect();
        DMatrix::from_fn(d, d, |i, j| (&ads[i] * &ads[j]).trace())
    }

    /// `max |B([x_i,x_j],x_k) + B(x_j,[x_i,x_k])|`.
    pub fn invariance_residual(&self, b: &DMatrix<f64>) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            let ad = self.ad(i);
            let m = ad.transpose() * b + b * &ad;
            worst = worst.max(linalg::mat_inf_norm(&m));
        }
        worst
    }

    /// Algebra spanned by the given (independent) skew maps, with brackets
    /// read off from matrix commutators. Returns the closure residual.
    pub fn from_skew_maps(frame: Frame, maps: &[SkewMap]) -> Result<(Self, f64)> {
        let d = maps.len();
        if frame.dim() != d {
            return Err(Error::FrameMismatch { left: frame.dim(), right: d });
        }
        let mut out = Self::abelian(frame);
        if d == 0 {
            return Ok((out, 0.0));
        }
        let cols: Vec<DVector<f64>> = maps.iter().map(|m| m.to_lambda2()).collect();
        let a = DMatrix::from_columns(&cols);
        if linalg::rank(&a) < d {
            return Err(Error::DependentIsotropy);
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                let c = maps[i].commutator(&maps[j])?;
                let (mut x, res) = linalg::least_squares(&a, &c.to_lambda2());
                worst = worst.max(res);
                let scale = x.amax().max(1.0);
                x.iter_mut().filter(|v| v.abs() < 1e-13 * scale).for_each(|v| *v = 0.0);
                out.set_bracket(i, j, &x);
            }
        }
        Ok((out, worst))
    }

    /// `max ‖ρ([x_i,x_j]) − [ρ(x_i), ρ(x_j)]‖∞` for a representation by skew maps.
    pub fn homomorphism_residual(&self, rho: &[SkewMap]) -> Result<f64> {
        let d = self.dim();
        if rho.len() != d {
            return Err(Error::FrameMismatch { left: d, right: rho.len() });
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                let lhs = combine(rho, &self.bracket_basis(i, j));
                let rhs = rho[i].commutator(&rho[j])?;
                worst = worst.max((&lhs - &rhs).norm_inf());
            }
        }
        Ok(worst)
    }

    /// Algebra in the basis `y_a = Σ_i p[(i, a)] x_i` (p invertible). The
    /// form, if any, is transformed to `pᵀ B p`.
    pub fn change_basis(&self, p: &DMatrix<f64>, frame: Frame) -> Result<Self> {
        let d = self.dim();
        if p.nrows() != d || p.ncols() != d || frame.dim() != d {
            return Err(Error::FrameMismatch { left: d, right: p.ncols() });
        }
        let inv = p.clone().try_inverse().ok_or_else(|| Error::Format("singular change of basis".into()))?;
        let mut out = Self::abelian(frame);
        for a in 0..d {
            for b in a + 1..d {
                let w = self.bracket(&p.column(a).into(), &p.column(b).into());
                out.set_bracket(a, b, &(&inv * w));
            }
        }
        out.form = self.form.as_ref().map(|f| p.transpose() * f * p);
        Ok(out)
    }

    /// Max distance of `[A, B]` from `target` for `A` in `left`, `B` in `right`.
    pub fn bracket_inclusion_residual(&self, left: &[DVector<f64>], right: &[DVector<f64>], target: &Subspace) -> f64 {
        let mut worst = 0.0f64;
        for x in left {
            for y in right {
                worst = worst.max(target.residual(&self.bracket(x, y)));
            }
        }
        worst
    }

    /// Subalgebra spanned by `vectors` as an abstract algebra in that basis,
    /// with the residual of closure.
    pub fn restrict(&self, vectors: &[DVector<f64>], frame: Frame) -> Result<(Self, f64)> {
        let k = vectors.len();
        if frame.dim() != k {
            return Err(Error::FrameMismatch { left: frame.dim(), right: k });
        }
        let mut out = Self::abelian(frame);
        if k == 0 {
            return Ok((out, 0.0));
        }
        let a = DMatrix::from_columns(vectors);
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i + 1..k {
                let (x, res) = linalg::least_squares(&a, &self.bracket(&vectors[i], &vectors[j]));
                worst = worst.max(res);
                out.set_bracket(i, j, &x);
            }
        }
        Ok((out, worst))
    }
}

/// `Σ c_i A_i`.
pub fn combine(maps: &[SkewMap], coeffs: &DVector<f64>) -> SkewMap {
    let n = maps.first().map(|m| m.dim()).unwrap_or(0);
    let mut out = SkewMap::zero(n);
    for (m, &c) in maps.iter().zip(coeffs.iter()) {
        if c != 0.0 {
            out = &out + &m.scale(c);
        }
    }
    out
}

/// su(2) with `[x1,x2] = s·x3` and cyclic permutations.
pub fn su2(frame: Frame, s: f64) -> LieAlgebra {
    let e = |k: usize| {
        let mut v = DVector::zeros(3);
        v[k] = s;
        v
    };
    LieAlgebra::from_brackets(frame, &[(0, 1, e(2)), (1, 2, e(0)), (2, 0, e(1))]).expect("valid su(2) table")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_is_a_lie_algebra() {
        let g = su2(Frame::numbered("x", 3), -1.0);
        assert_eq!(g.jacobi_residual(), 0.0);
        assert_eq!(g.antisymmetry_residual(), 0.0);
        let k = g.killing();
        assert!((k[(0, 0)] + 2.0).abs() < 1e-14 && k[(0, 1)].abs() < 1e-14);
        assert!(g.invariance_residual(&DMatrix::identity(3, 3)) < 1e-14);
    }

    #[test]
    fn corrupted_so3_fails_jacobi() {
        let g = su2(Frame::numbered("x", 3), 1.0);
        let mut c = g.clone();
        let mut v = c.bracket_basis(0, 1);
        v[0] += 0.1;
        c.set_bracket(0, 1, &v);
        assert!(c.jacobi_residual() >= 0.01);
    }

    #[test]
    fn skew_maps_recover_brackets() {
        let n = 3;
        let maps: Vec<SkewMap> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| SkewMap::from_two_form(&crate::KForm::basis(n, &[i, j]).unwrap()).unwrap())
            .collect();
        let (g, res) = LieAlgebra::from_skew_maps(Frame::numbered("a", 3), &maps).unwrap();
        assert!(res < 1e-14);
        assert!(g.jacobi_residual() < 1e-14);
        assert!(g.homomorphism_residual(&maps).unwrap() < 1e-14);
    }

    #[test]
    fn change_basis_preserves_jacobi() {
        let g = su2(Frame::numbered("x", 3), 1.0).with_form(DMatrix::identity(3, 3));
        let p = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        let h = g.change_basis(&p, Frame::numbered("y", 3)).unwrap();
        assert!(h.jacobi_residual() < 1e-12);
        let x: DVector<f64> = p.column(0).into();
        let y: DVector<f64> = p.column(1).into();
        let direct = g.bracket(&x, &y);
        let via = &p * h.bracket_basis(0, 1);
        assert!((direct - via).norm() < 1e-12);
    }
}
