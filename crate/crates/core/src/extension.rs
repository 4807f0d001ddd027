//! Symmetry algebra s(g) of a model and the (k,B)-extension.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{combine, LieAlgebra};
use crate::linalg;
use crate::model::InfinitesimalModel;
use crate::multilinear::{pairs, CurvatureTensor, Frame, KForm, SkewMap};
use crate::report::VerificationReport;

/// Inputs of the extension: a Lie algebra `k` with invariant metric `B`
/// (stored as `k.form`), a faithful representation `φ: k → so(m)` and the
/// base model on `m`.
#[derive(Debug, Clone)]
pub struct ExtensionData {
    pub k: LieAlgebra,
    pub phi: Vec<SkewMap>,
    pub base: InfinitesimalModel,
    /// Labels of the `n` copy of `k`; defaults to `f1, f2, …`.
    pub n_labels: Option<Vec<String>>,
}

impl ExtensionData {
    pub fn new(k: LieAlgebra, phi: Vec<SkewMap>, base: InfinitesimalModel) -> Self {
        Self { k, phi, base, n_labels: None }
    }

    /// `k` realized as the span of skew maps inside s(base), with brackets
    /// inferred from commutators.
    pub fn from_generators(
        base: InfinitesimalModel,
        generators: Vec<SkewMap>,
        b: DMatrix<f64>,
        labels: Frame,
    ) -> Result<Self> {
        let (k, _) = LieAlgebra::from_skew_maps(labels, &generators)?;
        Ok(Self::new(k.with_form(b), generators, base))
    }

    pub fn l(&self) -> usize {
        self.k.dim()
    }

    pub fn metric(&self) -> DMatrix<f64> {
        self.k.form.clone().unwrap_or_else(|| DMatrix::identity(self.l(), self.l()))
    }

    pub fn n_frame(&self) -> Result<Frame> {
        match &self.n_labels {
            Some(labels) => Frame::new(labels.clone()),
            None => Ok(Frame::numbered("f", self.l())),
        }
    }

    /// Re-base `k` by `y_a = Σ_i q[(i,a)] k_i`, transforming brackets, `B`
    /// and `φ` consistently.
    pub fn rebase(&self, q: &DMatrix<f64>) -> Result<ExtensionData> {
        let k = self.k.change_basis(q, self.k.frame().clone())?;
        let phi = (0..q.ncols()).map(|a| combine(&self.phi, &q.column(a).into())).collect();
        Ok(ExtensionData { k, phi, base: self.base.clone(), n_labels: self.n_labels.clone() })
    }
}

/// Stacked linear conditions `A·T₀ = 0`, `A·R₀ = 0` (upper triangle of the
/// Gram action) and `[A, H] = 0` for `H` in `isotropy`, as a matrix on the
/// lexicographic Λ² coordinates of `A`.
fn s_system(base: &InfinitesimalModel, isotropy: &[SkewMap]) -> DMatrix<f64> {
    let n = base.dim();
    let ps = pairs(n);
    let len = ps.len();
    let gram = base.curvature.gram();
    let t_rows = crate::multilinear::binomial(n, 3);
    let r_rows = if base.curvature.is_empty() { 0 } else { len * (len + 1) / 2 };
    let h_rows = isotropy.len() * len;
    let mut sys = DMatrix::zeros(t_rows + r_rows + h_rows, len);
    for (col, &(i, j)) in ps.iter().enumerate() {
        let a = SkewMap::from_two_form(&KForm::basis(n, &[i, j]).expect("in range")).expect("2-form");
        let at = a.act_on_form(&base.torsion).expect("same frame").to_dense();
        sys.view_mut((0, col), (t_rows, 1)).copy_from(&at);
        let mut row = t_rows;
        if r_rows > 0 {
            let m = a.lambda2_matrix();
            let ar = &m * &gram + &gram * m.transpose();
            for p in 0..len {
                for q in p..len {
                    sys[(row, col)] = ar[(p, q)];
                    row += 1;
                }
            }
        }
        for h in isotropy {
            let c = a.commutator(h).expect("same frame").to_lambda2();
            sys.view_mut((row, col), (len, 1)).copy_from(&c);
            row += len;
        }
    }
    sys
}

/// Basis of `{A ∈ so(m) : A·T₀ = 0, A·R₀ = 0, [A, H] = 0 for H in isotropy}`.
/// `None` uses `im(R₀)` as isotropy.
pub fn compute_s(base: &InfinitesimalModel, isotropy: Option<&[SkewMap]>) -> Vec<SkewMap> {
    let default;
    let iso = match isotropy {
        Some(iso) => iso,
        None => {
            default = base.image_basis();
            &default
        }
    };
    let n = base.dim();
    linalg::nullspace(&s_system(base, iso)).iter().map(|v| SkewMap::from_lambda2(n, v)).collect()
}

/// Max violation of membership in s(base) for each generator.
pub fn s_membership_residual(base: &InfinitesimalModel, isotropy: &[SkewMap], a: &SkewMap) -> f64 {
    let gram = base.curvature.gram();
    let (t, r) = base.action_residuals(a, &gram).expect("same frame");
    let h = isotropy.iter().map(|h| a.commutator(h).expect("same frame").norm_inf()).fold(0.0, f64::max);
    t.max(r).max(h)
}

/// All invariants of extension data as named report entries.
pub fn validate_extension_data(data: &ExtensionData, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::detached(tol);
    let l = data.l();
    let m = data.base.dim();
    rep.push("k-antisymmetry", data.k.antisymmetry_residual());
    rep.push("k-jacobi", data.k.jacobi_residual());

    let b = data.metric();
    if b.nrows() != l || b.ncols() != l {
        rep.push("B-shape", f64::INFINITY);
    } else {
        rep.push("B-symmetric", linalg::mat_inf_norm(&(&b - b.transpose())));
        let min_ev = linalg::sym_eigenvalues(&b).first().copied().unwrap_or(f64::INFINITY);
        rep.push_margin("B-positive", min_ev);
        rep.push("B-invariance", data.k.invariance_residual(&b));
    }

    let shapes_ok = data.phi.len() == l && data.phi.iter().all(|p| p.dim() == m);
    rep.push("phi-shape", if shapes_ok { 0.0 } else { f64::INFINITY });
    if shapes_ok {
        rep.push("homomorphism", data.k.homomorphism_residual(&data.phi).unwrap_or(f64::INFINITY));
        let cols: Vec<DVector<f64>> = data.phi.iter().map(|p| p.to_lambda2()).collect();
        let margin = if l == 0 { f64::INFINITY } else { linalg::min_singular_value(&DMatrix::from_columns(&cols)) };
        rep.push_margin("faithful", margin);
        let iso = data.base.image_basis();
        let worst = data.phi.iter().map(|p| s_membership_residual(&data.base, &iso, p)).fold(0.0, f64::max);
        rep.push("phi-in-s", worst);
    }

    let disjoint = data.n_frame().and_then(|n| n.concat(&data.base.frame)).is_ok();
    rep.push("labels-disjoint", if disjoint { 0.0 } else { f64::INFINITY });
    rep
}

/// Re-base `k` so that `B` becomes the identity (modified Gram–Schmidt).
pub fn orthonormalize_k(data: &ExtensionData) -> Result<ExtensionData> {
    let l = data.l();
    let b = data.metric();
    let mut q = DMatrix::<f64>::identity(l, l);
    for a in 0..l {
        for c in 0..a {
            let qc: DVector<f64> = q.column(c).into();
            let qa: DVector<f64> = q.column(a).into();
            let proj = (qc.transpose() * &b * &qa)[0];
            let new = qa - qc * proj;
            q.set_column(a, &new);
        }
        let qa: DVector<f64> = q.column(a).into();
        let norm2 = (qa.transpose() * &b * &qa)[0];
        if !(norm2 > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        q.set_column(a, &(qa / norm2.sqrt()));
    }
    let mut out = data.rebase(&q)?;
    // Exact identity on the new basis.
    out.k.form = Some(DMatrix::identity(l, l));
    Ok(out)
}

/// `ad(k_i)` on the `n` copy as a skew map (requires orthonormal `k`).
pub fn ad_k(k: &LieAlgebra, i: usize) -> SkewMap {
    let ad = k.ad(i);
    SkewMap::new((&ad - ad.transpose()) * 0.5).expect("antisymmetrized")
}

/// `T_n(a,b,c) = B([k_a,k_b],k_c)` on the `n` frame (orthonormal `k`).
pub fn t_n(k: &LieAlgebra) -> KForm {
    let l = k.dim();
    let mut terms = Vec::new();
    for a in 0..l {
        for b in a + 1..l {
            for c in b + 1..l {
                terms.push((vec![a, b, c], k.structure(a, b, c)));
            }
        }
    }
    KForm::from_terms(l, 3, terms).expect("indices in range")
}

/// `ψ(k_i) = ad(k_i) ⊕ φ(k_i)` as 2-forms on `n ⊕ m` (orthonormal `k`).
pub fn psi_forms(data: &ExtensionData) -> Vec<KForm> {
    let l = data.l();
    let total = l + data.base.dim();
    (0..l)
        .map(|i| &ad_k(&data.k, i).to_two_form().embed(0, total) + &data.phi[i].to_two_form().embed(l, total))
        .collect()
}

fn ensure_valid(data: &ExtensionData, tol: f64) -> Result<()> {
    let rep = validate_extension_data(data, tol);
    if rep.pass() {
        Ok(())
    } else {
        Err(Error::InvalidExtension(Box::new(rep)))
    }
}

/// Validate, orthonormalize and return the data used by the constructions.
pub fn prepare(data: &ExtensionData, tol: f64) -> Result<ExtensionData> {
    ensure_valid(data, tol)?;
    let b = data.metric();
    let l = data.l();
    if linalg::mat_inf_norm(&(&b - DMatrix::identity(l, l))) == 0.0 {
        Ok(data.clone())
    } else {
        orthonormalize_k(data)
    }
}

/// The (k,B)-extension: `T = T₀ + Σ φ(k_i)∧n_i + 2T_n`, `R = R₀ + Σ ψ(k_i)⊙ψ(k_i)`
/// on the frame `n ++ m`.
pub fn build_extension(data: &ExtensionData, tol: f64) -> Result<InfinitesimalModel> {
    let data = prepare(data, tol)?;
    let l = data.l();
    if l == 0 {
        return Ok(data.base.clone());
    }
    let m = data.base.dim();
    let total = l + m;
    let frame = data.n_frame()?.concat(&data.base.frame)?;

    let mut t = data.base.torsion.embed(l, total);
    for i in 0..l {
        let n_i = KForm::basis(total, &[i])?;
        t += &data.phi[i].to_two_form().embed(l, total).wedge(&n_i)?;
    }
    t += &t_n(&data.k).embed(0, total).scale(2.0);

    let mut r = data.base.curvature.embed(l, total);
    for psi in psi_forms(&data) {
        r.push_square(psi, 1.0)?;
    }

    let mut out = InfinitesimalModel::new(frame, t, r)?;
    out.grading.insert("n".into(), (0..l).collect());
    out.grading.insert("m".into(), (l..total).collect());
    for (name, idx) in &data.base.grading {
        if name != "n" && name != "m" {
            out.grading.insert(name.clone(), idx.iter().map(|i| i + l).collect());
        }
    }
    out.params = data.base.params.clone();
    Ok(out)
}

/// The fiber model `(2T_n, Σ ad(k_i)⊙ad(k_i))` on the `n` frame.
pub fn fiber_model(data: &ExtensionData, tol: f64) -> Result<InfinitesimalModel> {
    let data = prepare(data, tol)?;
    let l = data.l();
    let mut r = CurvatureTensor::zero(l);
    for i in 0..l {
        r.push_square(ad_k(&data.k, i).to_two_form(), 1.0)?;
    }
    InfinitesimalModel::new(data.n_frame()?, t_n(&data.k).scale(2.0), r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::su2;
    use crate::model::DEFAULT_TOL;

    fn e(dim: usize, idx: &[usize]) -> KForm {
        KForm::basis(dim, idx).unwrap()
    }

    fn skew(f: KForm) -> SkewMap {
        SkewMap::from_two_form(&f).unwrap()
    }

    /// su(2) acting on R⁴ by `λ(e13+e24), λ(−e12+e34), λ(−e14+e23)`.
    fn qh7_data(lambda: f64) -> ExtensionData {
        let phi = vec![
            skew((&e(4, &[0, 2]) + &e(4, &[1, 3])).scale(lambda)),
            skew((&e(4, &[2, 3]) - &e(4, &[0, 1])).scale(lambda)),
            skew((&e(4, &[1, 2]) - &e(4, &[0, 3])).scale(lambda)),
        ];
        let k = su2(Frame::numbered("k", 3), 2.0 * lambda).with_form(DMatrix::identity(3, 3));
        ExtensionData::new(k, phi, InfinitesimalModel::flat(Frame::numbered("e", 4)))
    }

    #[test]
    fn flat_s_is_so_n() {
        let flat = InfinitesimalModel::flat(Frame::numbered("e", 4));
        assert_eq!(compute_s(&flat, None).len(), 6);
    }

    #[test]
    fn qh7_data_is_valid_and_extends() {
        let data = qh7_data(1.0);
        let rep = validate_extension_data(&data, DEFAULT_TOL);
        assert!(rep.pass(), "{:?}", rep.failures());
        let model = build_extension(&data, DEFAULT_TOL).unwrap();
        assert!(model.verify(DEFAULT_TOL).pass(), "{:?}", model.verify(DEFAULT_TOL));
        assert!((model.torsion.coeff(&[0, 1, 2]) - 4.0).abs() < 1e-14);
        assert!((model.torsion_map(3, 5).unwrap()[0] - 1.0).abs() < 1e-14);
        let fiber = fiber_model(&data, DEFAULT_TOL).unwrap();
        assert!(fiber.verify(DEFAULT_TOL).pass());
    }

    #[test]
    fn validation_names_failures() {
        let mut data = qh7_data(1.0);
        let mut b = DMatrix::identity(3, 3);
        b[(0, 1)] = 0.3;
        b[(1, 0)] = 0.3;
        data.k.form = Some(b);
        let rep = validate_extension_data(&data, DEFAULT_TOL);
        assert!(!rep.get("B-invariance").unwrap().pass);

        let mut dup = qh7_data(1.0);
        dup.k = LieAlgebra::abelian(Frame::numbered("k", 2)).with_form(DMatrix::identity(2, 2));
        dup.phi = vec![dup.phi[0].clone(), dup.phi[0].clone()];
        assert!(!validate_extension_data(&dup, DEFAULT_TOL).get("faithful").unwrap().pass);
        assert!(matches!(build_extension(&dup, DEFAULT_TOL), Err(Error::InvalidExtension(_))));
    }

    #[test]
    fn orthonormalize_scales_basis() {
        let lambda = 2.0;
        let mut data = qh7_data(1.0);
        // B = (1/λ²)·I makes λ·k_i orthonormal.
        data.k.form = Some(DMatrix::identity(3, 3) / (lambda * lambda));
        let o = orthonormalize_k(&data).unwrap();
        for i in 0..3 {
            assert!((o.phi[i].matrix() - data.phi[i].matrix() * lambda).abs().max() < 1e-14);
        }
        let unchanged = orthonormalize_k(&qh7_data(1.0)).unwrap();
        assert_eq!(unchanged.phi, qh7_data(1.0).phi);
    }

    #[test]
    fn empty_k_returns_base() {
        let mut data = qh7_data(1.0);
        data.k = LieAlgebra::abelian(Frame::numbered("k", 0)).with_form(DMatrix::zeros(0, 0));
        data.phi.clear();
        let model = build_extension(&data, DEFAULT_TOL).unwrap();
        assert_eq!(model, data.base);
    }
}
