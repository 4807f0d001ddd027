//! Lie algebras attached to infinitesimal models: the Nomizu construction,
//! the double extension g(k), invariant metrics and transitive presentations.

mod kostant;
mod presentation;

pub use kostant::{invariant_metric_extension, solve_b, InvariantMetric, KostantSetup};
pub use presentation::{mixed_decomposition, presentation_basis, KBlocks, Presentation};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::extension::{build_extension, prepare, psi_forms, ExtensionData};
use crate::lie::LieAlgebra;
use crate::linalg::{self, Subspace};
use crate::model::{commutator_closure_residual, InfinitesimalModel};
use crate::multilinear::{pairs, CurvatureTensor, Frame, KForm, SkewMap};
use crate::report::VerificationReport;

/// Lie algebra with named index blocks; the blocks listed in `isotropy`
/// span the isotropy subalgebra.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedLieAlgebra {
    pub algebra: LieAlgebra,
    pub blocks: Vec<(String, Vec<usize>)>,
    pub isotropy: Vec<String>,
}

impl GradedLieAlgebra {
    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn block(&self, name: &str) -> &[usize] {
        self.blocks.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice()).unwrap_or(&[])
    }

    pub fn unit(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[i] = 1.0;
        v
    }

    pub fn vectors(&self, indices: &[usize]) -> Vec<DVector<f64>> {
        indices.iter().map(|&i| self.unit(i)).collect()
    }

    pub fn isotropy_indices(&self) -> Vec<usize> {
        self.isotropy.iter().flat_map(|b| self.block(b).to_vec()).collect()
    }

    pub fn complement_indices(&self) -> Vec<usize> {
        let iso = self.isotropy_indices();
        (0..self.dim()).filter(|i| !iso.contains(i)).collect()
    }

    pub fn jacobi_residual(&self) -> f64 {
        self.algebra.jacobi_residual().max(self.algebra.antisymmetry_residual())
    }

    /// `[isotropy, complement] ⊆ complement`.
    pub fn reductivity_residual(&self) -> f64 {
        let comp = self.vectors(&self.complement_indices());
        let target = Subspace::new(&comp, self.dim());
        self.algebra.bracket_inclusion_residual(&self.vectors(&self.isotropy_indices()), &comp, &target)
    }

    pub fn span(&self, vectors: &[DVector<f64>]) -> Subspace {
        Subspace::new(vectors, self.dim())
    }
}

/// Realize `vectors` (Λ² coordinates) inside the span of `basis`; returns the
/// coordinates and the ∞-norm residual.
fn coordinates(basis: &DMatrix<f64>, v: &DVector<f64>) -> (DVector<f64>, f64) {
    linalg::least_squares(basis, v)
}

/// Nomizu algebra on `isotropy ⊕ m` with
/// `[A+X, B+Y] = [A,B] − R(X,Y) + A(Y) − B(X) − T(X,Y)`.
pub fn nomizu_algebra(model: &InfinitesimalModel, isotropy: &[SkewMap], tol: f64) -> Result<GradedLieAlgebra> {
    let n = model.dim();
    let p = isotropy.len();
    let cols: Vec<DVector<f64>> = isotropy.iter().map(|a| a.to_lambda2()).collect();
    let hmat = if p == 0 { DMatrix::zeros(n * n.saturating_sub(1) / 2, 0) } else { DMatrix::from_columns(&cols) };
    if p > 0 && linalg::rank(&hmat) < p {
        return Err(Error::DependentIsotropy);
    }
    let gram = model.curvature.gram();
    for (index, a) in isotropy.iter().enumerate() {
        let (t, r) = model.action_residuals(a, &gram)?;
        if t.max(r) >= tol {
            return Err(Error::NotStabilizing { index, residual: t.max(r) });
        }
    }
    let closure = commutator_closure_residual(isotropy);
    if closure >= tol {
        return Err(Error::IsotropyNotSubalgebra { residual: closure });
    }

    let d = p + n;
    let mut labels: Vec<String> = (1..=p).map(|i| format!("h{i}")).collect();
    labels.extend(model.frame.labels().iter().cloned());
    let frame = Frame::new(labels)?;
    let mut brackets = Vec::new();

    for a in 0..p {
        for b in a + 1..p {
            let c = isotropy[a].commutator(&isotropy[b])?.to_lambda2();
            let (x, _) = coordinates(&hmat, &c);
            let mut v = DVector::zeros(d);
            v.rows_mut(0, p).copy_from(&x);
            brackets.push((a, b, v));
        }
        for j in 0..n {
            let mut v = DVector::zeros(d);
            v.rows_mut(p, n).copy_from(&isotropy[a].matrix().column(j));
            brackets.push((a, p + j, v));
        }
    }
    let mut worst = 0.0f64;
    for (col, (i, j)) in pairs(n).into_iter().enumerate() {
        let r: DVector<f64> = gram.column(col).into();
        let mut v = DVector::zeros(d);
        if r.iter().any(|x| *x != 0.0) {
            let (x, res) = if p == 0 { (DVector::zeros(0), linalg::inf_norm(&r)) } else { coordinates(&hmat, &r) };
            worst = worst.max(res);
            if p > 0 {
                v.rows_mut(0, p).copy_from(&(-x));
            }
        }
        let t = model.torsion_map(i, j)?;
        v.rows_mut(p, n).copy_from(&(-t));
        brackets.push((p + i, p + j, v));
    }
    if worst >= tol {
        return Err(Error::IsotropyTooSmall { residual: worst });
    }
    let algebra = LieAlgebra::from_brackets(frame, &brackets)?;
    Ok(GradedLieAlgebra {
        algebra,
        blocks: vec![("h".into(), (0..p).collect()), ("m".into(), (p..d).collect())],
        isotropy: vec!["h".into()],
    })
}

/// `max ‖𝔖[[x,y],z]‖∞` over basis triples.
pub fn jacobi_residual(l: &GradedLieAlgebra) -> f64 {
    l.jacobi_residual()
}

/// Images of `h ⊕ k` in so(n⊕m): `h` acting on `m`, `k_i` acting by `ψ(k_i)`.
/// `data` must be prepared (orthonormal `k`).
pub fn isotropy_realization(data: &ExtensionData, h: &[SkewMap]) -> Vec<SkewMap> {
    let l = data.l();
    let total = l + data.base.dim();
    let mut out: Vec<SkewMap> = h.iter().map(|a| a.embed(l, total)).collect();
    for psi in psi_forms(data) {
        out.push(SkewMap::from_two_form(&psi).expect("2-form"));
    }
    out
}

/// The double extension `g(k) = h ⊕ k ⊕ n ⊕ m`, with `h = im(R₀)`.
pub fn double_extension(data: &ExtensionData, tol: f64) -> Result<GradedLieAlgebra> {
    let data = prepare(data, tol)?;
    let base = &data.base;
    let h = base.image_of_r(tol)?;
    let ext = build_extension(&data, tol)?;
    let (p, l, m) = (h.len(), data.l(), base.dim());
    let (ko, no, mo) = (p, p + l, p + 2 * l);
    let d = p + 2 * l + m;

    let mut labels: Vec<String> = (1..=p).map(|i| format!("h{i}")).collect();
    let k_labels: Vec<String> = data.k.frame().labels().to_vec();
    let k_labels = if k_labels.iter().all(|s| s.starts_with('k')) {
        k_labels
    } else {
        (1..=l).map(|i| format!("k{i}")).collect()
    };
    labels.extend(k_labels);
    labels.extend(ext.frame.labels().iter().cloned());
    let frame = Frame::new(labels)?;

    let hcols: Vec<DVector<f64>> = h.iter().map(|a| a.to_lambda2()).collect();
    let hmat = if p == 0 { DMatrix::zeros(m * m.saturating_sub(1) / 2, 0) } else { DMatrix::from_columns(&hcols) };
    let mut brackets = Vec::new();
    let unit_block = |off: usize, v: &DVector<f64>| {
        let mut out = DVector::zeros(d);
        out.rows_mut(off, v.len()).copy_from(v);
        out
    };

    for a in 0..p {
        for b in a + 1..p {
            let (x, _) = coordinates(&hmat, &h[a].commutator(&h[b])?.to_lambda2());
            brackets.push((a, b, unit_block(0, &x)));
        }
        for j in 0..m {
            brackets.push((a, mo + j, unit_block(mo, &h[a].matrix().column(j).into())));
        }
    }
    for i in 0..l {
        for j in 0..l {
            if i < j {
                brackets.push((ko + i, ko + j, unit_block(ko, &data.k.bracket_basis(i, j))));
            }
            brackets.push((ko + i, no + j, unit_block(no, &data.k.bracket_basis(i, j))));
        }
        for j in 0..m {
            brackets.push((ko + i, mo + j, unit_block(mo, &data.phi[i].matrix().column(j).into())));
        }
    }

    let psi = psi_forms(&data);
    let r0 = base.curvature.gram();
    let total = l + m;
    for (u, v) in pairs(total) {
        let mut out = DVector::zeros(d);
        if u >= l {
            let col = crate::multilinear::pair_index(m, u - l, v - l);
            let r: DVector<f64> = r0.column(col).into();
            if p > 0 && r.iter().any(|x| *x != 0.0) {
                let (x, res) = coordinates(&hmat, &r);
                if res >= tol {
                    return Err(Error::IsotropyTooSmall { residual: res });
                }
                out.rows_mut(0, p).copy_from(&(-x));
            }
        }
        for (i, f) in psi.iter().enumerate() {
            out[ko + i] -= f.coeff(&[u, v]);
        }
        let t = ext.torsion_map(u, v)?;
        out.rows_mut(no, total).copy_from(&(-t));
        brackets.push((no + u, no + v, out));
    }

    let algebra = LieAlgebra::from_brackets(frame, &brackets)?;
    Ok(GradedLieAlgebra {
        algebra,
        blocks: vec![
            ("h".into(), (0..p).collect()),
            ("k".into(), (ko..ko + l).collect()),
            ("n".into(), (no..no + l).collect()),
            ("m".into(), (mo..d).collect()),
        ],
        isotropy: vec!["h".into(), "k".into()],
    })
}

/// Basis of the diagonal `a = span{n_i + k_i}`.
pub fn diagonal_a(l: &GradedLieAlgebra) -> Vec<DVector<f64>> {
    l.block("k")
        .iter()
        .zip(l.block("n"))
        .map(|(&k, &n)| {
            let mut v = l.unit(k);
            v[n] = 1.0;
            v
        })
        .collect()
}

/// Kernel of `r = h ⊕ k ⊕ n → gl(m)`, `x ↦ proj_m ∘ ad(x)|_m`.
pub fn q_kernel(l: &GradedLieAlgebra) -> Vec<DVector<f64>> {
    let r: Vec<usize> = [l.block("h"), l.block("k"), l.block("n")].concat();
    let m = l.block("m");
    if r.is_empty() {
        return Vec::new();
    }
    let mut sys = DMatrix::zeros(m.len() * m.len(), r.len());
    for (col, &x) in r.iter().enumerate() {
        for (a, &y) in m.iter().enumerate() {
            let br = l.algebra.bracket_basis(x, y);
            for (b, &z) in m.iter().enumerate() {
                sys[(a * m.len() + b, col)] = br[z];
            }
        }
    }
    linalg::nullspace(&sys)
        .into_iter()
        .map(|c| {
            let mut v = DVector::zeros(l.dim());
            for (col, &x) in r.iter().enumerate() {
                v[x] = c[col];
            }
            v
        })
        .collect()
}

/// Ideal and subalgebra checks on a double extension `h ⊕ k ⊕ n ⊕ m`.
pub fn structure_checks(l: &GradedLieAlgebra, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::detached(tol);
    let d = l.dim();
    let g = &l.algebra;
    let all: Vec<DVector<f64>> = (0..d).map(|i| l.unit(i)).collect();
    let h = l.vectors(l.block("h"));
    let k = l.vectors(l.block("k"));
    let n = l.vectors(l.block("n"));
    let m = l.vectors(l.block("m"));
    let a = diagonal_a(l);
    let zero = Subspace::new(&[], d);

    rep.push("jacobi", l.jacobi_residual());
    rep.push("reductive", l.reductivity_residual());

    let hm: Vec<DVector<f64>> = h.iter().chain(&m).cloned().collect();
    rep.push("a-commutes", g.bracket_inclusion_residual(&a, &hm, &zero));
    rep.push("a-abelian", g.bracket_inclusion_residual(&a, &a, &zero));
    rep.push("a-ideal", g.bracket_inclusion_residual(&all, &a, &l.span(&a)));

    let lbasis: Vec<DVector<f64>> = h.iter().chain(&a).chain(&m).cloned().collect();
    rep.push("l-ideal", g.bracket_inclusion_residual(&all, &lbasis, &l.span(&lbasis)));
    rep.push("semidirect", g.bracket_inclusion_residual(&k, &k, &l.span(&k)));
    let kl: Vec<DVector<f64>> = k.iter().chain(&lbasis).cloned().collect();
    let margin = if kl.len() == d { linalg::min_singular_value(&DMatrix::from_columns(&kl)) } else { 0.0 };
    rep.push_margin("k-complement", if d == 0 { f64::INFINITY } else { margin });

    let r: Vec<DVector<f64>> = h.iter().chain(&k).chain(&n).cloned().collect();
    rep.push("r-subalgebra", g.bracket_inclusion_residual(&r, &r, &l.span(&r)));

    let q = q_kernel(l);
    let qspan = l.span(&q);
    rep.push("a-in-q", a.iter().map(|v| qspan.residual(v)).fold(0.0, f64::max));

    // Over a flat base, l = a ⊕ m is 2-step nilpotent.
    let mm_in_m = g.bracket_inclusion_residual(&m, &m, &l.span(&[h.clone(), k.clone(), n.clone()].concat()));
    if h.is_empty() && mm_in_m < tol {
        rep.push("l-two-step", two_step_residual(g, &lbasis));
    }
    rep
}

/// `max ‖[[x,y],z]‖∞` over basis vectors of a subalgebra.
pub fn two_step_residual(g: &LieAlgebra, basis: &[DVector<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for x in basis {
        for y in basis {
            let xy = g.bracket(x, y);
            for z in basis {
                worst = worst.max(linalg::inf_norm(&g.bracket(&xy, z)));
            }
        }
    }
    worst
}

/// Infinitesimal model of a reductive decomposition `g = h ⊕ m` with
/// `m` orthonormal: `T(X,Y) = −[X,Y]_m`, `R(X,Y) = −ad([X,Y]_h)|_m`.
pub fn reductive_model(g: &LieAlgebra, h: &[usize], m: &[usize], frame: Frame) -> Result<InfinitesimalModel> {
    let n = m.len();
    if frame.dim() != n {
        return Err(Error::FrameMismatch { left: frame.dim(), right: n });
    }
    let mut t = KForm::zero(n, 3);
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                t.add_term(vec![a, b, c], -g.structure(m[a], m[b], m[c]));
            }
        }
    }
    t.prune();
    let ad_m = |x: &DVector<f64>| -> SkewMap {
        let full = g.ad_vec(x);
        let mut s = DMatrix::zeros(n, n);
        for (i, &mi) in m.iter().enumerate() {
            for (j, &mj) in m.iter().enumerate() {
                s[(i, j)] = full[(mi, mj)];
            }
        }
        SkewMap::new(s).unwrap_or_else(|_| SkewMap::zero(n))
    };
    let ps = pairs(n);
    let mut gram = DMatrix::zeros(ps.len(), ps.len());
    for (col, &(a, b)) in ps.iter().enumerate() {
        let br = g.bracket_basis(m[a], m[b]);
        let mut z = DVector::zeros(g.dim());
        for &i in h {
            z[i] = br[i];
        }
        gram.set_column(col, &(-ad_m(&z).to_lambda2()));
    }
    InfinitesimalModel::new(frame, t, CurvatureTensor::from_gram(n, &gram)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_TOL;

    fn e(dim: usize, idx: &[usize]) -> KForm {
        KForm::basis(dim, idx).unwrap()
    }

    #[test]
    fn cartan_model_gives_su2() {
        let m = InfinitesimalModel::new(Frame::numbered("e", 3), e(3, &[0, 1, 2]), CurvatureTensor::zero(3)).unwrap();
        let l = nomizu_algebra(&m, &[], DEFAULT_TOL).unwrap();
        assert_eq!(l.dim(), 3);
        assert_eq!(l.algebra.bracket_basis(0, 1), DVector::from_vec(vec![0.0, 0.0, -1.0]));
        assert!(jacobi_residual(&l) < 1e-14);
    }

    #[test]
    fn sphere_gives_so3() {
        let r = CurvatureTensor::sym_square(&e(2, &[0, 1])).unwrap().scale(-1.0);
        let m = InfinitesimalModel::new(Frame::numbered("e", 2), KForm::zero(2, 3), r).unwrap();
        let h = m.image_of_r(DEFAULT_TOL).unwrap();
        let l = nomizu_algebra(&m, &h, DEFAULT_TOL).unwrap();
        assert_eq!(l.algebra.bracket_basis(1, 2), DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(l.algebra.bracket_basis(0, 1), DVector::from_vec(vec![0.0, 0.0, 1.0]));
        assert_eq!(l.algebra.bracket_basis(0, 2), DVector::from_vec(vec![0.0, -1.0, 0.0]));
        assert!(jacobi_residual(&l) < 1e-14);
        let back = reductive_model(&l.algebra, &[0], &[1, 2], Frame::numbered("e", 2)).unwrap();
        assert!(back.curvature.distance(&m.curvature).unwrap() < 1e-14);
    }

    #[test]
    fn guards() {
        let r = CurvatureTensor::sym_square(&e(2, &[0, 1])).unwrap();
        let m = InfinitesimalModel::new(Frame::numbered("e", 2), KForm::zero(2, 3), r).unwrap();
        assert!(matches!(nomizu_algebra(&m, &[], DEFAULT_TOL), Err(Error::IsotropyTooSmall { .. })));
        let bad = InfinitesimalModel::new(
            Frame::numbered("e", 3),
            e(3, &[0, 1, 2]),
            CurvatureTensor::sym_pair(&e(3, &[0, 1]), &e(3, &[0, 2]), 1.0).unwrap(),
        )
        .unwrap();
        let h = bad.image_basis();
        assert!(matches!(nomizu_algebra(&bad, &h, DEFAULT_TOL), Err(Error::NotStabilizing { .. })));
    }
}
