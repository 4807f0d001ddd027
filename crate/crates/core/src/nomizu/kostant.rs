use nalgebra::{DMatrix, DVector};

use super::{double_extension, nomizu_algebra, GradedLieAlgebra};
use crate::error::{Error, Result};
use crate::extension::{prepare, ExtensionData};
use crate::linalg;
use crate::model::InfinitesimalModel;
use crate::multilinear::SkewMap;

const CONDITION_LIMIT: f64 = 1e8;

/// Ad-invariant symmetric form on `g = h ⊕ m` extending the metric on `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMetric {
    pub matrix: DMatrix<f64>,
    pub residual: f64,
}

impl InvariantMetric {
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.matrix * y)[(0, 0)]
    }
}

fn sym_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

/// The unique ad-invariant form with `ḡ|_m = g0` and `h ⊥ m` on a
/// semisimple `g = h ⊕ m` generated by `m`.
pub fn invariant_metric_extension(l: &GradedLieAlgebra, g0: &DMatrix<f64>, tol: f64) -> Result<InvariantMetric> {
    let d = l.dim();
    let g = &l.algebra;
    let (h, m) = (l.block("h"), l.block("m"));
    if g0.nrows() != m.len() || g0.ncols() != m.len() {
        return Err(Error::FrameMismatch { left: m.len(), right: g0.nrows() });
    }
    if d == 0 {
        return Ok(InvariantMetric { matrix: DMatrix::zeros(0, 0), residual: 0.0 });
    }
    let eig = linalg::sym_eigenvalues(&g.killing());
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x.abs()), hi.max(x.abs())));
    let condition = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    if condition > CONDITION_LIMIT {
        return Err(Error::NotSemisimple { condition });
    }
    let mut gen = l.vectors(m);
    for &a in m {
        for &b in m {
            gen.push(g.bracket_basis(a, b));
        }
    }
    if linalg::rank(&DMatrix::from_columns(&gen)) < d {
        return Err(Error::NotGeneratedByM);
    }

    let vars = d * (d + 1) / 2;
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    // (ad_iᵀ X + X ad_i)[j][k] = Σ_p c_ij^p X_pk + Σ_p c_ik^p X_jp
    for i in 0..d {
        for j in 0..d {
            for k in j..d {
                let mut row = Vec::new();
                for p in 0..d {
                    let a = g.structure(i, j, p);
                    if a != 0.0 {
                        row.push((sym_index(d, p, k), a));
                    }
                    let b = g.structure(i, k, p);
                    if b != 0.0 {
                        row.push((sym_index(d, j, p), b));
                    }
                }
                if !row.is_empty() {
                    rows.push((row, 0.0));
                }
            }
        }
    }
    for (a, &ma) in m.iter().enumerate() {
        for (b, &mb) in m.iter().enumerate().skip(a) {
            rows.push((vec![(sym_index(d, ma, mb), 1.0)], g0[(a, b)]));
        }
        for &hb in h {
            rows.push((vec![(sym_index(d, ma, hb), 1.0)], 0.0));
        }
    }
    let mut a = DMatrix::zeros(rows.len(), vars);
    let mut rhs = DVector::zeros(rows.len());
    for (r, (row, v)) in rows.iter().enumerate() {
        for &(c, x) in row {
            a[(r, c)] += x;
        }
        rhs[r] = *v;
    }
    let nullity = linalg::nullspace(&a).len();
    if nullity > 0 {
        return Err(Error::NonUniqueSolution { nullity });
    }
    let (x, residual) = linalg::least_squares(&a, &rhs);
    if residual >= tol {
        return Err(Error::NoInvariantExtension { residual });
    }
    let mut matrix = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            matrix[(i, j)] = x[sym_index(d, i, j)];
        }
    }
    if !h.is_empty() {
        let hh = DMatrix::from_fn(h.len(), h.len(), |i, j| matrix[(h[i], h[j])]);
        if linalg::min_singular_value(&hh) <= tol {
            return Err(Error::DegenerateOnIsotropy);
        }
    }
    let residual = g.invariance_residual(&matrix);
    Ok(InvariantMetric { matrix, residual })
}

/// Solve `ad(b)|_h = 0`, `ad(b)|_m = φ` for `b ∈ g`; returns `b` and the residual.
pub fn solve_b(l: &GradedLieAlgebra, phi: &SkewMap) -> (DVector<f64>, f64) {
    let d = l.dim();
    let (h, m) = (l.block("h"), l.block("m"));
    if d == 0 {
        return (DVector::zeros(0), 0.0);
    }
    let targets: Vec<usize> = h.iter().chain(m).copied().collect();
    let mut a = DMatrix::zeros(targets.len() * d, d);
    let mut rhs = DVector::zeros(targets.len() * d);
    for (t, &x) in targets.iter().enumerate() {
        for i in 0..d {
            a.view_mut((t * d, i), (d, 1)).copy_from(&l.algebra.bracket_basis(i, x));
        }
    }
    for (j, _) in m.iter().enumerate() {
        let t = h.len() + j;
        for (r, &mr) in m.iter().enumerate() {
            rhs[t * d + mr] = phi.matrix()[(r, j)];
        }
    }
    linalg::least_squares(&a, &rhs)
}

/// Everything needed to map `g ⊕ a` homomorphically into `g(k)`, for a base
/// that splits as a reductive semisimple factor times a flat factor.
#[derive(Debug, Clone)]
pub struct KostantSetup {
    /// Prepared data (orthonormal `k`).
    pub data: ExtensionData,
    /// Nomizu algebra `g = h ⊕ m_ss` of the semisimple factor.
    pub base_algebra: GradedLieAlgebra,
    pub metric: InvariantMetric,
    pub double: GradedLieAlgebra,
    /// Columns: images of the basis of `g` in `g(k)` as vector spaces.
    pub embed: DMatrix<f64>,
    pub ss: Vec<usize>,
    pub flat: Vec<usize>,
    pub b: Vec<DVector<f64>>,
    pub b_residual: f64,
}

fn sub_skew(a: &SkewMap, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a.matrix()[(rows[i], cols[j])])
}

/// Split a base model into the blocks `ss` and `flat` recorded in its
/// grading; the flat block must carry no torsion or curvature.
pub fn split_base(base: &InfinitesimalModel, tol: f64) -> Result<(Vec<usize>, Vec<usize>, InfinitesimalModel)> {
    let n = base.dim();
    let (ss, flat) = match (base.grading.get("ss"), base.grading.get("flat")) {
        (Some(s), Some(f)) => (s.clone(), f.clone()),
        (None, Some(f)) => (((0..n).filter(|i| !f.contains(i)).collect()), f.clone()),
        (Some(s), None) => (s.clone(), (0..n).filter(|i| !s.contains(i)).collect()),
        (None, None) if base.torsion.is_empty() && base.curvature.is_empty() => (Vec::new(), (0..n).collect()),
        (None, None) => ((0..n).collect(), Vec::new()),
    };
    let mut all: Vec<usize> = ss.iter().chain(&flat).copied().collect();
    all.sort_unstable();
    if all != (0..n).collect::<Vec<_>>() {
        return Err(Error::BaseNotProduct("ss and flat blocks do not partition the frame".into()));
    }
    let mut map = vec![None; n];
    for (i, &s) in ss.iter().enumerate() {
        map[s] = Some(i);
    }
    let t = base.torsion.reindex(&map, ss.len());
    let r = base.curvature.reindex(&map, ss.len());
    let back: Vec<Option<usize>> = ss.iter().map(|&s| Some(s)).collect();
    let dt = (&t.reindex(&back, n) - &base.torsion).norm_inf();
    let dr = r.reindex(&back, n).distance(&base.curvature)?;
    if dt.max(dr) >= tol {
        return Err(Error::BaseNotProduct(format!("torsion or curvature leaves the ss block (residual {:.3e})", dt.max(dr))));
    }
    let model = InfinitesimalModel::new(base.frame.select(&ss), t, r)?;
    Ok((ss, flat, model))
}

impl KostantSetup {
    pub fn new(data: &ExtensionData, tol: f64) -> Result<Self> {
        let data = prepare(data, tol)?;
        let (ss, flat, ss_model) = split_base(&data.base, tol)?;
        for (i, phi) in data.phi.iter().enumerate() {
            let cross = linalg::mat_inf_norm(&sub_skew(phi, &ss, &flat));
            if cross >= tol {
                return Err(Error::BaseNotProduct(format!("phi(k{}) mixes the ss and flat blocks", i + 1)));
            }
        }
        let h_ss = ss_model.image_of_r(tol)?;
        let base_algebra = nomizu_algebra(&ss_model, &h_ss, tol)?;
        let g0 = DMatrix::identity(ss.len(), ss.len());
        let metric = invariant_metric_extension(&base_algebra, &g0, tol)?;
        let double = double_extension(&data, tol)?;

        let (gd, d) = (double.dim(), base_algebra.dim());
        let m_full = data.base.dim();
        let hg = double.block("h");
        let h_full = data.base.image_of_r(tol)?;
        let mut embed = DMatrix::zeros(gd, d);
        if !hg.is_empty() {
            let hmat = DMatrix::from_columns(&h_full.iter().map(|a| a.to_lambda2()).collect::<Vec<_>>());
            for (a, ha) in h_ss.iter().enumerate() {
                let mut full = DMatrix::zeros(m_full, m_full);
                for (i, &si) in ss.iter().enumerate() {
                    for (j, &sj) in ss.iter().enumerate() {
                        full[(si, sj)] = ha.matrix()[(i, j)];
                    }
                }
                let (x, res) = linalg::least_squares(&hmat, &SkewMap::new(full)?.to_lambda2());
                if res >= tol {
                    return Err(Error::IsotropyTooSmall { residual: res });
                }
                for (c, &hc) in hg.iter().enumerate() {
                    embed[(hc, a)] = x[c];
                }
            }
        }
        let mg = double.block("m");
        for (j, &sj) in ss.iter().enumerate() {
            embed[(mg[sj], h_ss.len() + j)] = 1.0;
        }

        let mut b = Vec::new();
        let mut b_residual = 0.0f64;
        for phi in &data.phi {
            let p1 = SkewMap::new(sub_skew(phi, &ss, &ss))?;
            let (x, res) = solve_b(&base_algebra, &p1);
            b_residual = b_residual.max(res);
            b.push(x);
        }
        Ok(Self { data, base_algebra, metric, double, embed, ss, flat, b, b_residual })
    }

    /// Coefficients `ḡ(x, b_i)` of `a(x) = Σ ḡ(x, b_i)(n_i + k_i)`.
    pub fn a_coeffs(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.b.len(), self.b.iter().map(|b| self.metric.inner(x, b)))
    }

    /// `Σ c_i (n_i + k_i)` in `g(k)`.
    pub fn diagonal(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.double.dim());
        for (i, (&k, &n)) in self.double.block("k").iter().zip(self.double.block("n")).enumerate() {
            v[k] += c[i];
            v[n] += c[i];
        }
        v
    }

    /// `f(x) = x − a(x)`.
    pub fn f(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.embed * x - self.diagonal(&self.a_coeffs(x))
    }

    pub fn f_matrix(&self) -> DMatrix<f64> {
        let d = self.base_algebra.dim();
        let cols: Vec<DVector<f64>> = (0..d).map(|i| self.f(&self.base_algebra.unit(i))).collect();
        if cols.is_empty() {
            DMatrix::zeros(self.double.dim(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    /// `max ‖f([x_i,x_j]) − [f x_i, f x_j]‖∞`.
    pub fn homomorphism_residual(&self) -> f64 {
        let d = self.base_algebra.dim();
        let f = self.f_matrix();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                let lhs = &f * self.base_algebra.algebra.bracket_basis(i, j);
                let rhs = self.double.algebra.bracket(&f.column(i).into(), &f.column(j).into());
                worst = worst.max(linalg::inf_norm(&(lhs - rhs)));
            }
        }
        worst
    }

    pub fn injectivity_margin(&self) -> f64 {
        if self.base_algebra.dim() == 0 {
            f64::INFINITY
        } else {
            linalg::min_singular_value(&self.f_matrix())
        }
    }
}
