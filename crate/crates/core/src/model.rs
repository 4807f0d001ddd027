//! Infinitesimal models `(T, R)` and the Ambrose–Singer checks.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Subspace};
use crate::multilinear::{binomial, pairs, CurvatureTensor, Frame, KForm, SkewMap};
use crate::report::VerificationReport;

/// Default comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct InfinitesimalModel {
    pub frame: Frame,
    pub torsion: KForm,
    pub curvature: CurvatureTensor,
    /// Named blocks of 0-based frame indices.
    pub grading: BTreeMap<String, Vec<usize>>,
    pub params: BTreeMap<String, f64>,
}

impl InfinitesimalModel {
    pub fn new(frame: Frame, torsion: KForm, curvature: CurvatureTensor) -> Result<Self> {
        let n = frame.dim();
        if torsion.dim() != n {
            return Err(Error::FrameMismatch { left: n, right: torsion.dim() });
        }
        if curvature.dim() != n {
            return Err(Error::FrameMismatch { left: n, right: curvature.dim() });
        }
        let torsion = if torsion.is_empty() { KForm::zero(n, 3) } else { torsion };
        if torsion.degree() != 3 {
            return Err(Error::WrongDegree { expected: 3, found: torsion.degree() });
        }
        Ok(Self { frame, torsion, curvature, grading: BTreeMap::new(), params: BTreeMap::new() })
    }

    /// The flat model `(0, 0)` on Rⁿ.
    pub fn flat(frame: Frame) -> Self {
        let n = frame.dim();
        Self::new(frame, KForm::zero(n, 3), CurvatureTensor::zero(n)).expect("consistent dimensions")
    }

    pub fn with_grading(mut self, name: &str, indices: Vec<usize>) -> Self {
        self.grading.insert(name.to_string(), indices);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim() });
        }
        Ok(())
    }

    /// The vector `T(e_i, e_j)`.
    pub fn torsion_map(&self, i: usize, j: usize) -> Result<DVector<f64>> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(DVector::from_iterator(self.dim(), (0..self.dim()).map(|k| self.torsion.coeff(&[i, j, k]))))
    }

    /// `T(X, Y)` for arbitrary vectors.
    pub fn torsion_vec(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (idx, c) in self.torsion.terms() {
            let (a, b, k) = (idx[0], idx[1], idx[2]);
            // Antisymmetrize over the three slots.
            out[k] += c * (x[a] * y[b] - x[b] * y[a]);
            out[a] += c * (x[b] * y[k] - x[k] * y[b]);
            out[b] += c * (x[k] * y[a] - x[a] * y[k]);
        }
        out
    }

    /// `R(e_i, e_j)` for all pairs i < j, as skew maps (lexicographic order).
    pub fn curvature_operators(&self) -> Vec<SkewMap> {
        self.curvature.operators()
    }

    /// ∞-norms of `A·T` and `A·R`.
    pub fn action_residuals(&self, a: &SkewMap, gram: &DMatrix<f64>) -> Result<(f64, f64)> {
        let t = a.act_on_form(&self.torsion)?.norm_inf();
        let m = a.lambda2_matrix();
        let r = linalg::mat_inf_norm(&(&m * gram + gram * m.transpose()));
        Ok((t, r))
    }

    /// `R(X,Y)·T = 0` and `R(X,Y)·R = 0` over all basis pairs.
    pub fn check_invariance(&self, tol: f64) -> VerificationReport {
        let gram = self.curvature.gram();
        let (mut rt, mut rr) = (0.0f64, 0.0f64);
        for a in self.curvature_operators() {
            if a.norm_inf() == 0.0 {
                continue;
            }
            let (t, r) = self.action_residuals(&a, &gram).expect("same frame");
            rt = rt.max(t);
            rr = rr.max(r);
        }
        let mut rep = VerificationReport::new(tol, &self.frame);
        rep.push("invariance-T", rt);
        rep.push("invariance-R", rr);
        rep
    }

    /// Direct first-Bianchi residual: `2·max |𝔖 R(X,Y,Z,V) − 𝔖 ⟨T(T(X,Y),Z),V⟩|`
    /// over basis vectors (the factor matches the 4-form route's units).
    pub fn bianchi1_cyclic(&self) -> f64 {
        let n = self.dim();
        let gram = self.curvature.gram();
        let tmaps: Vec<Vec<DVector<f64>>> =
            (0..n).map(|i| (0..n).map(|j| self.torsion_map(i, j).expect("in range")).collect()).collect();
        let unit = |k: usize| {
            let mut v = DVector::zeros(n);
            v[k] = 1.0;
            v
        };
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    let cyc = [(x, y, z), (y, z, x), (z, x, y)];
                    // 𝔖 T(T(X,Y),Z) as a vector.
                    let mut tt = DVector::zeros(n);
                    for &(a, b, c) in &cyc {
                        tt += self.torsion_vec(&tmaps[a][b], &unit(c));
                    }
                    for v in 0..n {
                        let r: f64 =
                            cyc.iter().map(|&(a, b, c)| CurvatureTensor::eval4(&gram, n, a, b, c, v)).sum();
                        worst = worst.max((r - tt[v]).abs());
                    }
                }
            }
        }
        2.0 * worst
    }

    /// `‖b(R) − 2σ_T‖∞`.
    pub fn bianchi1_4form(&self) -> f64 {
        let sigma = sigma_t(&self.torsion).expect("degree 3");
        (&self.curvature.bianchi_4form() - &sigma.scale(2.0)).norm_inf()
    }

    pub fn check_bianchi1(&self, tol: f64) -> VerificationReport {
        let mut rep = VerificationReport::new(tol, &self.frame);
        rep.push("bianchi1", self.bianchi1_cyclic());
        rep.push("bianchi1-4form", self.bianchi1_4form());
        rep
    }

    /// `max ‖𝔖 R(T(X,Y),Z)‖∞` over basis triples.
    pub fn bianchi2_residual(&self) -> f64 {
        let n = self.dim();
        let ops = self.curvature_operators();
        let op = |k: usize, z: usize| -> Option<(usize, f64)> {
            match k.cmp(&z) {
                std::cmp::Ordering::Less => Some((crate::multilinear::pair_index(n, k, z), 1.0)),
                std::cmp::Ordering::Greater => Some((crate::multilinear::pair_index(n, z, k), -1.0)),
                std::cmp::Ordering::Equal => None,
            }
        };
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    let mut acc = DMatrix::zeros(n, n);
                    for &(a, b, c) in &[(x, y, z), (y, z, x), (z, x, y)] {
                        for k in 0..n {
                            let t = self.torsion.coeff(&[a, b, k]);
                            if t == 0.0 {
                                continue;
                            }
                            if let Some((p, s)) = op(k, c) {
                                acc += ops[p].matrix() * (s * t);
                            }
                        }
                    }
                    worst = worst.max(linalg::mat_inf_norm(&acc));
                }
            }
        }
        worst
    }

    pub fn check_bianchi2(&self, tol: f64) -> VerificationReport {
        let mut rep = VerificationReport::new(tol, &self.frame);
        rep.push("bianchi2", self.bianchi2_residual());
        rep
    }

    /// All Ambrose–Singer checks.
    pub fn verify(&self, tol: f64) -> VerificationReport {
        let mut rep = self.check_invariance(tol);
        rep.extend(self.check_bianchi1(tol));
        rep.extend(self.check_bianchi2(tol));
        rep
    }

    /// Matrix of `so(n) → Λ³ ⊕ Sym(Λ²)`, `A ↦ (A·T, A·R)`, in the
    /// lexicographic Λ² basis of so(n).
    fn stabilizer_system(&self) -> DMatrix<f64> {
        let n = self.dim();
        let ps = pairs(n);
        let len = ps.len();
        let gram = self.curvature.gram();
        let t_rows = binomial(n, 3);
        let r_rows = len * (len + 1) / 2;
        let mut sys = DMatrix::zeros(t_rows + r_rows, len);
        for (col, &(i, j)) in ps.iter().enumerate() {
            let a = SkewMap::from_two_form(&KForm::basis(n, &[i, j]).expect("in range")).expect("2-form");
            let at = a.act_on_form(&self.torsion).expect("same frame").to_dense();
            sys.view_mut((0, col), (t_rows, 1)).copy_from(&at);
            if !self.curvature.is_empty() {
                let m = a.lambda2_matrix();
                let ar = &m * &gram + &gram * m.transpose();
                let mut row = t_rows;
                for p in 0..len {
                    for q in p..len {
                        sys[(row, col)] = ar[(p, q)];
                        row += 1;
                    }
                }
            }
        }
        sys
    }

    /// Basis of `{A ∈ so(n) : A·T = 0, A·R = 0}`.
    pub fn stabilizer(&self) -> Vec<SkewMap> {
        let n = self.dim();
        linalg::nullspace(&self.stabilizer_system()).iter().map(|v| SkewMap::from_lambda2(n, v)).collect()
    }

    /// Canonical basis of `span{R(e_i, e_j)}` without consistency checks.
    pub fn image_basis(&self) -> Vec<SkewMap> {
        let n = self.dim();
        let gram = self.curvature.gram();
        let cols: Vec<DVector<f64>> = (0..gram.ncols()).map(|p| gram.column(p).into()).collect();
        linalg::span_basis(&cols, gram.nrows()).iter().map(|v| SkewMap::from_lambda2(n, v)).collect()
    }

    /// Basis of im(R), checked to stabilize `(T, R)` and to be a subalgebra.
    pub fn image_of_r(&self, tol: f64) -> Result<Vec<SkewMap>> {
        let basis = self.image_basis();
        let gram = self.curvature.gram();
        let mut worst = 0.0f64;
        for a in &basis {
            let (t, r) = self.action_residuals(a, &gram)?;
            worst = worst.max(t).max(r);
        }
        if worst >= tol {
            return Err(Error::ImageNotInStabilizer { residual: worst });
        }
        let closure = commutator_closure_residual(&basis);
        if closure >= tol {
            return Err(Error::ImageNotSubalgebra { residual: closure });
        }
        Ok(basis)
    }

    /// Apply an orthogonal change of frame; column `i` of `p` is the new
    /// basis vector `i` in old coordinates.
    pub fn transform(&self, p: &DMatrix<f64>) -> Result<InfinitesimalModel> {
        let mut out = InfinitesimalModel::new(
            Frame::numbered("v", p.ncols()),
            self.torsion.pullback(p)?,
            self.curvature.pullback(p)?,
        )?;
        out.params = self.params.clone();
        Ok(out)
    }

    /// ∞-norm distance of torsion and curvature from another model on the same frame.
    pub fn distance(&self, other: &InfinitesimalModel) -> Result<(f64, f64)> {
        Ok(((&self.torsion - &other.torsion).norm_inf(), self.curvature.distance(&other.curvature)?))
    }
}

/// `σ_T = ½ Σ_i (e_i⌟T)∧(e_i⌟T)`.
pub fn sigma_t(t: &KForm) -> Result<KForm> {
    if t.degree() != 3 && !t.is_empty() {
        return Err(Error::WrongDegree { expected: 3, found: t.degree() });
    }
    if t.is_empty() {
        return Ok(KForm::zero(t.dim(), 4));
    }
    Ok(t.barwedge(t)?.scale(0.5))
}

/// Max distance of pairwise commutators from the span of `basis`.
pub fn commutator_closure_residual(basis: &[SkewMap]) -> f64 {
    if basis.is_empty() {
        return 0.0;
    }
    let len = basis[0].to_lambda2().len();
    let vecs: Vec<DVector<f64>> = basis.iter().map(|a| a.to_lambda2()).collect();
    let span = Subspace::new(&vecs, len);
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            let c = a.commutator(b).expect("same frame");
            worst = worst.max(span.residual(&c.to_lambda2()));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, idx: &[usize]) -> KForm {
        KForm::basis(dim, idx).unwrap()
    }

    fn model(n: usize, t: KForm, r: CurvatureTensor) -> InfinitesimalModel {
        InfinitesimalModel::new(Frame::numbered("e", n), t, r).unwrap()
    }

    fn s2() -> InfinitesimalModel {
        model(2, KForm::zero(2, 3), CurvatureTensor::sym_square(&e(2, &[0, 1])).unwrap().scale(-1.0))
    }

    #[test]
    fn torsion_map_reads_off() {
        let m = model(3, e(3, &[0, 1, 2]), CurvatureTensor::zero(3));
        assert_eq!(m.torsion_map(0, 1).unwrap(), DVector::from_vec(vec![0.0, 0.0, 1.0]));
        assert_eq!(m.torsion_map(1, 1).unwrap().norm(), 0.0);
        assert!(m.torsion_map(0, 3).is_err());
        let x = DVector::from_vec(vec![1.0, 2.0, 0.5]);
        let y = DVector::from_vec(vec![-1.0, 0.3, 2.0]);
        let mut direct = DVector::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                direct += m.torsion_map(i, j).unwrap() * (x[i] * y[j]);
            }
        }
        assert!((m.torsion_vec(&x, &y) - direct).norm() < 1e-14);
    }

    #[test]
    fn invariance_examples() {
        assert!(InfinitesimalModel::flat(Frame::numbered("e", 3)).verify(DEFAULT_TOL).pass());
        assert!(s2().check_invariance(DEFAULT_TOL).pass());
        let bad = model(3, e(3, &[0, 1, 2]), CurvatureTensor::sym_pair(&e(3, &[0, 1]), &e(3, &[0, 2]), 1.0).unwrap());
        assert!(!bad.check_invariance(DEFAULT_TOL).pass());
    }

    #[test]
    fn sigma_examples() {
        assert!(sigma_t(&e(3, &[0, 1, 2])).unwrap().is_empty());
        let t = &e(5, &[0, 1, 2]) + &e(5, &[0, 3, 4]);
        assert_eq!(sigma_t(&t).unwrap(), e(5, &[1, 2, 3, 4]));
        assert!(sigma_t(&KForm::zero(4, 3)).unwrap().is_empty());
    }

    #[test]
    fn bianchi1_examples() {
        let cartan = model(3, e(3, &[0, 1, 2]), CurvatureTensor::zero(3));
        assert!(cartan.check_bianchi1(DEFAULT_TOL).pass());
        let bad = model(5, &e(5, &[0, 1, 2]) + &e(5, &[0, 3, 4]), CurvatureTensor::zero(5));
        let rep = bad.check_bianchi1(DEFAULT_TOL);
        assert!(!rep.get("bianchi1").unwrap().pass);
        assert!((rep.get("bianchi1").unwrap().residual - 2.0).abs() < 1e-12);
        assert!((rep.get("bianchi1-4form").unwrap().residual - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stabilizer_examples() {
        let flat = InfinitesimalModel::flat(Frame::numbered("e", 4));
        assert_eq!(flat.stabilizer().len(), 6);
        let st = s2().stabilizer();
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].to_two_form(), e(2, &[0, 1]));
        assert!(flat.image_of_r(DEFAULT_TOL).unwrap().is_empty());
        let im = s2().image_of_r(DEFAULT_TOL).unwrap();
        assert_eq!(im.len(), 1);
        assert_eq!(im[0].to_two_form(), e(2, &[0, 1]));
    }
}
