//! Dense linear algebra used by the verifiers: rank-revealing nullspaces,
//! deterministic subspace bases, least squares and subspace membership.
//!
//! Every basis handed out by this module is canonical: the subspace is
//! computed with an SVD, reduced to row-echelon form, normalized, and each
//! vector is sign-fixed so that its largest-magnitude coordinate is positive.
//! Two calls on the same subspace therefore return bit-comparable output.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

/// Relative singular-value threshold for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;

const PIVOT_TOL: f64 = 1e-9;
const CLEAN_TOL: f64 = 1e-14;

fn full_svd(m: &DMatrix<f64>) -> SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    // nalgebra only returns a thin V^T; pad with zero rows so V is square.
    let (rows, cols) = m.shape();
    if rows < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        SVD::new(padded, true, true)
    } else {
        SVD::new(m.clone(), true, true)
    }
}

fn threshold(singular: &DVector<f64>) -> f64 {
    let max = singular.iter().cloned().fold(0.0, f64::max);
    max * RANK_RTOL
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = SVD::new(m.clone(), false, false);
    let thr = threshold(&svd.singular_values);
    svd.singular_values.iter().filter(|&&s| s > thr && s > 0.0).count()
}

/// Smallest singular value over the columns of `m`: 0 when the columns are
/// dependent by count, infinity when there are no columns.
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.ncols() > m.nrows() {
        return 0.0;
    }
    let svd = SVD::new(m.clone(), false, false);
    svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Canonical basis of the nullspace of `m` (vectors of length `m.ncols()`).
pub fn nullspace(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return canonical_basis(&DMatrix::identity(cols, cols));
    }
    let svd = full_svd(m);
    let thr = threshold(&svd.singular_values);
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= thr)
        .collect();
    let mut basis = DMatrix::zeros(cols, null_rows.len());
    for (c, &r) in null_rows.iter().enumerate() {
        for k in 0..cols {
            basis[(k, c)] = v_t[(r, k)];
        }
    }
    canonical_basis(&basis)
}

/// Canonical basis of the span of the given vectors.
pub fn span_basis(vectors: &[DVector<f64>], len: usize) -> Vec<DVector<f64>> {
    let onb = orthonormal_basis(vectors, len);
    canonical_basis(&onb)
}

/// Orthonormal basis (as matrix columns) of the span of `vectors`.
pub fn orthonormal_basis(vectors: &[DVector<f64>], len: usize) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(len, 0);
    }
    let m = DMatrix::from_columns(vectors);
    let svd = SVD::new(m, true, false);
    let thr = threshold(&svd.singular_values);
    let u = svd.u.as_ref().expect("U requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thr && svd.singular_values[i] > 0.0)
        .collect();
    let mut out = DMatrix::zeros(len, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Reduce the column span of `basis` to a canonical, normalized, sign-fixed basis.
pub fn canonical_basis(basis: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let (n, r) = basis.shape();
    if r == 0 {
        return Vec::new();
    }
    let mut rows = basis.transpose();
    let mut lead = 0;
    for col in 0..n {
        if lead == r {
            break;
        }
        let (mut best, mut best_val) = (lead, 0.0);
        for i in lead..r {
            let v = rows[(i, col)].abs();
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        if best_val < PIVOT_TOL {
            continue;
        }
        rows.swap_rows(lead, best);
        let p = rows[(lead, col)];
        for k in 0..n {
            rows[(lead, k)] /= p;
        }
        for i in 0..r {
            if i != lead {
                let f = rows[(i, col)];
                if f != 0.0 {
                    for k in 0..n {
                        rows[(i, k)] -= f * rows[(lead, k)];
                    }
                }
            }
        }
        lead += 1;
    }
    (0..lead)
        .map(|i| {
            let mut v: DVector<f64> = rows.row(i).transpose();
            clean(&mut v);
            let norm = v.norm();
            v /= norm;
            sign_fix(&mut v);
            clean(&mut v);
            v
        })
        .collect()
}

fn clean(v: &mut DVector<f64>) {
    for x in v.iter_mut() {
        if x.abs() < CLEAN_TOL {
            *x = 0.0;
        }
    }
}

/// Flip `v` so that its largest-magnitude coordinate (first on ties) is positive.
pub fn sign_fix(v: &mut DVector<f64>) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best + 1e-12 {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        *v *= -1.0;
    }
}

/// Least-squares solution of `a x = b` and the ∞-norm of the residual.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    if a.ncols() == 0 {
        return (DVector::zeros(0), inf_norm(b));
    }
    let svd = SVD::new(a.clone(), true, true);
    let thr = threshold(&svd.singular_values).max(1e-300);
    let x = svd.solve(b, thr).expect("U and V^T were computed");
    let res = inf_norm(&(a * &x - b));
    (x, res)
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn mat_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// A linear subspace of R^n with an orthonormal basis, used for membership tests.
#[derive(Debug, Clone)]
pub struct Subspace {
    onb: DMatrix<f64>,
}

impl Subspace {
    pub fn new(vectors: &[DVector<f64>], len: usize) -> Self {
        Self { onb: orthonormal_basis(vectors, len) }
    }

    pub fn dim(&self) -> usize {
        self.onb.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.onb.nrows()
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.onb.ncols() == 0 {
            return DVector::zeros(v.len());
        }
        &self.onb * (self.onb.transpose() * v)
    }

    /// ∞-norm distance of `v` from the subspace (orthogonal projection).
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        inf_norm(&(v - self.project(v)))
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.onb
    }
}
