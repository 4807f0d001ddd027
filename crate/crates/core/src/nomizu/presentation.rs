use nalgebra::{DMatrix, DVector};

use super::kostant::KostantSetup;
use crate::error::{Error, Result};
use crate::extension::ExtensionData;
use crate::linalg::{self, Subspace};
use crate::multilinear::SkewMap;
use crate::report::VerificationReport;

/// Index blocks of an adapted orthonormal basis of `k`:
/// `k1 = ker φ_flat = k1z ⊕ k1p`, `k3 = ker φ_ss`, `k2` the complement.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KBlocks {
    pub k1z: Vec<usize>,
    pub k1p: Vec<usize>,
    pub k2: Vec<usize>,
    pub k3: Vec<usize>,
}

/// Basis of a transitive algebra acting on the extended space, given both in
/// source coordinates `g ⊕ a ⊕ flat` and as images in `g(k)`.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub setup: KostantSetup,
    pub blocks: KBlocks,
    /// Whether `k` had to be rotated into an adapted basis.
    pub rotated: bool,
    pub labels: Vec<String>,
    pub groups: Vec<(String, Vec<usize>)>,
    pub source_labels: Vec<String>,
    pub source: Vec<DVector<f64>>,
    pub image: Vec<DVector<f64>>,
    /// Index in `g(k)` of the `n ⊕ m` vector each element projects to.
    pub target: Vec<usize>,
    /// Bases in `h` coordinates of `g`.
    pub h0: Vec<DVector<f64>>,
    pub h1: Vec<DVector<f64>>,
    /// Elements `h_i ∈ h1` dual to `b_i`, `i ∈ k1z`.
    pub h_dual: Vec<DVector<f64>>,
    /// `h + a2(h)` for `h ∈ ker(a1|_h)`, in source coordinates.
    pub h_prime: Vec<DVector<f64>>,
    pub report: VerificationReport,
}

impl Presentation {
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// `label = Σ coeff·source_label`, dropping zero coefficients.
    pub fn describe(&self, i: usize) -> String {
        let mut out = String::new();
        for (c, name) in self.source[i].iter().zip(&self.source_labels) {
            if c.abs() <= crate::multilinear::PRUNE_TOL {
                continue;
            }
            let sign = if *c < 0.0 { "-" } else { "+" };
            if out.is_empty() {
                out.push_str(if *c < 0.0 { "-" } else { "" });
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if (c.abs() - 1.0).abs() > 1e-12 {
                out.push_str(&format!("{}*", (c.abs() * 1e12).round() / 1e12));
            }
            out.push_str(name);
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{} = {}", self.labels[i], out)
    }
}

fn columns(vs: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    if vs.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(vs)
    }
}

/// Deterministic orthonormal basis of a span: canonical basis, then Gram-Schmidt.
fn canonical_onb(vectors: &[DVector<f64>], len: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in linalg::span_basis(vectors, len) {
        let mut w = v.clone();
        for u in &out {
            w -= u * u.dot(&v);
        }
        out.push(w.normalize());
    }
    out
}

/// Orthonormal basis of `V ⊖ W` inside `V` (both given by spanning sets).
fn complement_in(v: &[DVector<f64>], w: &[DVector<f64>], len: usize) -> Vec<DVector<f64>> {
    let ws = Subspace::new(w, len);
    let rest: Vec<DVector<f64>> = v.iter().map(|x| x - ws.project(x)).filter(|r| r.amax() > 1e-9).collect();
    canonical_onb(&rest, len)
}

fn lambda2_columns(maps: &[DMatrix<f64>]) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = maps
        .iter()
        .map(|m| SkewMap::new(m.clone()).map(|s| s.to_lambda2()).unwrap_or_else(|_| DVector::zeros(0)))
        .collect();
    let rows = cols.first().map_or(0, |c| c.len());
    columns(&cols, rows)
}

fn restrict(a: &SkewMap, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a.matrix()[(idx[i], idx[j])])
}

fn kernel(m: &DMatrix<f64>, l: usize) -> Vec<DVector<f64>> {
    if m.nrows() == 0 {
        (0..l).map(|i| DVector::from_fn(l, |j, _| if i == j { 1.0 } else { 0.0 })).collect()
    } else {
        linalg::nullspace(m)
    }
}

/// The four subspaces of `k` (as orthonormal bases of R^l).
fn k_subspaces(s: &KostantSetup) -> [Vec<DVector<f64>>; 4] {
    let l = s.data.l();
    let phi1 = lambda2_columns(&s.data.phi.iter().map(|p| restrict(p, &s.ss)).collect::<Vec<_>>());
    let phi2 = lambda2_columns(&s.data.phi.iter().map(|p| restrict(p, &s.flat)).collect::<Vec<_>>());
    let k1 = canonical_onb(&kernel(&phi2, l), l);
    let k3 = canonical_onb(&kernel(&phi1, l), l);
    let all: Vec<DVector<f64>> = (0..l).map(|i| DVector::from_fn(l, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    let k13: Vec<DVector<f64>> = k1.iter().chain(&k3).cloned().collect();
    let k2 = complement_in(&all, &k13, l);

    // b(c) ∈ p: no h-component and [h, b(c)] = 0.
    let g = &s.base_algebra;
    let (h, d) = (g.block("h"), g.dim());
    let bc: Vec<DVector<f64>> = k1
        .iter()
        .map(|c| c.iter().zip(&s.b).fold(DVector::zeros(d), |acc, (ci, bi)| acc + bi * *ci))
        .collect();
    let mut sys = DMatrix::zeros(h.len() * (d + 1), k1.len());
    for (col, b) in bc.iter().enumerate() {
        for (a, &ha) in h.iter().enumerate() {
            sys[(a, col)] = b[ha];
            let br = g.algebra.bracket(&g.unit(ha), b);
            sys.view_mut((h.len() + a * d, col), (d, 1)).copy_from(&br);
        }
    }
    let coeffs = if k1.is_empty() { Vec::new() } else { kernel(&sys, k1.len()) };
    let k1p_raw: Vec<DVector<f64>> =
        coeffs.iter().map(|c| c.iter().zip(&k1).fold(DVector::zeros(l), |acc, (ci, v)| acc + v * *ci)).collect();
    let k1p = canonical_onb(&k1p_raw, l);
    let k1z = complement_in(&k1, &k1p, l);
    [k1z, k1p, k2, k3]
}

/// Index blocks if every standard basis vector lies in one subspace.
fn adapted(spaces: &[Vec<DVector<f64>>; 4], l: usize, tol: f64) -> Option<KBlocks> {
    let subs: Vec<Subspace> = spaces.iter().map(|v| Subspace::new(v, l)).collect();
    let mut out: [Vec<usize>; 4] = Default::default();
    for i in 0..l {
        let e = DVector::from_fn(l, |j, _| if i == j { 1.0 } else { 0.0 });
        let hit = subs.iter().position(|s| s.residual(&e) < tol)?;
        out[hit].push(i);
    }
    if out.iter().zip(spaces).any(|(o, s)| o.len() != s.len()) {
        return None;
    }
    let [k1z, k1p, k2, k3] = out;
    Some(KBlocks { k1z, k1p, k2, k3 })
}

/// Complementary ideal of `ker` inside `h` (coordinates in the `h` block).
fn complementary_ideal(s: &KostantSetup, ker: &[DVector<f64>], tol: f64) -> Result<Vec<DVector<f64>>> {
    let g = &s.base_algebra;
    let h = g.block("h");
    let p = h.len();
    if ker.len() == p {
        return Ok(Vec::new());
    }
    let gbar = DMatrix::from_fn(p, p, |i, j| s.metric.matrix[(h[i], h[j])]);
    let eig = linalg::sym_eigenvalues(&gbar);
    let definite = eig.iter().all(|x| *x > tol) || eig.iter().all(|x| *x < -tol);
    let form = if definite {
        gbar
    } else {
        let hv = g.vectors(h);
        let (hk, _) = g.algebra.restrict(&hv, crate::multilinear::Frame::numbered("h", p))?;
        -hk.killing()
    };
    let kmat = columns(ker, p);
    let comp = if ker.is_empty() {
        (0..p).map(|i| DVector::from_fn(p, |j, _| if i == j { 1.0 } else { 0.0 })).collect()
    } else {
        linalg::nullspace(&(kmat.transpose() * &form))
    };
    if comp.len() + ker.len() != p || linalg::rank(&columns(&[ker, &comp[..]].concat(), p)) < p {
        return Err(Error::NoComplementaryIdeal("orthogonal complement is not a complement".into()));
    }
    let to_g = |c: &DVector<f64>| h.iter().zip(c.iter()).fold(DVector::zeros(g.dim()), |mut acc, (&hi, &ci)| {
        acc[hi] += ci;
        acc
    });
    let hv: Vec<DVector<f64>> = h.iter().map(|&i| g.unit(i)).collect();
    let cv: Vec<DVector<f64>> = comp.iter().map(to_g).collect();
    let res = g.algebra.bracket_inclusion_residual(&hv, &cv, &g.span(&cv));
    if res >= tol {
        return Err(Error::NoComplementaryIdeal(format!("complement is not an ideal (residual {res:.3e})")));
    }
    Ok(comp)
}

fn build(data: &ExtensionData, tol: f64) -> Result<Presentation> {
    let mut setup = KostantSetup::new(data, tol)?;
    let l = setup.data.l();
    let spaces = k_subspaces(&setup);
    let (blocks, rotated) = match adapted(&spaces, l, tol) {
        Some(b) => (b, false),
        None => {
            let cols: Vec<DVector<f64>> = spaces.iter().flatten().cloned().collect();
            let q = columns(&cols, l);
            let mut rebased = setup.data.rebase(&q)?;
            rebased.k.form = Some(DMatrix::identity(l, l));
            setup = KostantSetup::new(&rebased, tol)?;
            let mut next = 0;
            let mut take = |n: usize| {
                let v: Vec<usize> = (next..next + n).collect();
                next += n;
                v
            };
            let b = KBlocks {
                k1z: take(spaces[0].len()),
                k1p: take(spaces[1].len()),
                k2: take(spaces[2].len()),
                k3: take(spaces[3].len()),
            };
            (b, true)
        }
    };

    let s = &setup;
    let g = &s.base_algebra;
    let d = g.dim();
    let h = g.block("h").to_vec();
    let nf = s.flat.len();
    let src_dim = d + l + nf;
    let mut report = VerificationReport::detached(tol);
    report.push("b-solve", s.b_residual);
    report.push("metric-invariance", s.metric.residual);
    report.push("homomorphism", s.homomorphism_residual());
    report.push_margin("injective", s.injectivity_margin());

    let k1: Vec<usize> = blocks.k1z.iter().chain(&blocks.k1p).copied().collect();
    // a(h_c) coefficient matrices: rows k indices, columns h basis.
    let a_on_h = |rows: &[usize]| -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), h.len(), |r, c| s.metric.inner(&g.unit(h[c]), &s.b[rows[r]]))
    };
    let all_k: Vec<usize> = (0..l).collect();
    let h0 = kernel(&a_on_h(&all_k), h.len());
    let ker_a1 = kernel(&a_on_h(&k1), h.len());
    let h1 = complementary_ideal(s, &ker_a1, tol)?;

    let h_to_g = |c: &DVector<f64>| -> DVector<f64> {
        let mut v = DVector::zeros(d);
        for (i, &hi) in h.iter().enumerate() {
            v[hi] = c[i];
        }
        v
    };
    // Dual basis: ḡ(h_i, b_j) = δ_ij for i, j ∈ k1z.
    let mut h_dual = Vec::new();
    if !blocks.k1z.is_empty() {
        let h1g: Vec<DVector<f64>> = h1.iter().map(h_to_g).collect();
        let n = DMatrix::from_fn(blocks.k1z.len(), h1g.len(), |j, a| s.metric.inner(&h1g[a], &s.b[blocks.k1z[j]]));
        let mut worst = 0.0f64;
        for (j, _) in blocks.k1z.iter().enumerate() {
            let rhs = DVector::from_fn(blocks.k1z.len(), |r, _| if r == j { 1.0 } else { 0.0 });
            let (x, res) = linalg::least_squares(&n, &rhs);
            worst = worst.max(res);
            h_dual.push(h1.iter().zip(x.iter()).fold(DVector::zeros(h.len()), |acc, (v, c)| acc + v * *c));
        }
        report.push("duality", worst);
    }

    let a_coeffs_on = |x: &DVector<f64>, idx: &[usize]| -> DVector<f64> {
        let full = s.a_coeffs(x);
        DVector::from_fn(l, |i, _| if idx.contains(&i) { full[i] } else { 0.0 })
    };
    let image_of = |src: &DVector<f64>| -> DVector<f64> {
        let x: DVector<f64> = src.rows(0, d).into();
        let a: DVector<f64> = src.rows(d, l).into();
        let mut v = s.f(&x) + s.diagonal(&a);
        let mg = s.double.block("m");
        for (j, &fj) in s.flat.iter().enumerate() {
            v[mg[fj]] += src[d + l + j];
        }
        v
    };

    let n_labels = s.data.n_frame()?;
    let (mut labels, mut groups, mut source, mut target) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let ng = s.double.block("n").to_vec();
    let mg = s.double.block("m").to_vec();
    let mut push_group = |name: &str, items: Vec<(String, DVector<f64>, usize)>| {
        let start = labels.len();
        groups.push((name.to_string(), (start..start + items.len()).collect()));
        for (lab, src, t) in items {
            labels.push(lab);
            source.push(src);
            target.push(t);
        }
    };
    let k2 = blocks.k2.clone();
    push_group(
        "f1z",
        blocks
            .k1z
            .iter()
            .zip(&h_dual)
            .map(|(&i, hd)| {
                let hg = h_to_g(hd);
                let mut src = DVector::zeros(src_dim);
                src.rows_mut(0, d).copy_from(&(-&hg));
                src.rows_mut(d, l).copy_from(&(-a_coeffs_on(&hg, &k2)));
                (n_labels.label(i).to_string(), src, ng[i])
            })
            .collect(),
    );
    for (name, idx) in [("f1p", &blocks.k1p), ("f2", &blocks.k2), ("f3", &blocks.k3)] {
        push_group(
            name,
            idx.iter()
                .map(|&i| {
                    let mut src = DVector::zeros(src_dim);
                    src[d + i] = 1.0;
                    (n_labels.label(i).to_string(), src, ng[i])
                })
                .collect(),
        );
    }
    let m_idx = g.block("m").to_vec();
    let mut e_items = Vec::new();
    for j in 0..s.data.base.dim() {
        let mut src = DVector::zeros(src_dim);
        if let Some(pos) = s.ss.iter().position(|&x| x == j) {
            let x = g.unit(m_idx[pos]);
            src.rows_mut(0, d).copy_from(&x);
            src.rows_mut(d, l).copy_from(&s.a_coeffs(&x));
        } else {
            let pos = s.flat.iter().position(|&x| x == j).expect("partition");
            src[d + l + pos] = 1.0;
        }
        e_items.push((format!("e{}", j + 1), src, mg[j]));
    }
    push_group("e", e_items);

    let image: Vec<DVector<f64>> = source.iter().map(image_of).collect();
    let nm: Vec<usize> = ng.iter().chain(&mg).copied().collect();
    let project = |v: &DVector<f64>| DVector::from_fn(nm.len(), |r, _| v[nm[r]]);
    let mut worst = 0.0f64;
    for (v, &t) in image.iter().zip(&target) {
        let mut want = DVector::zeros(s.double.dim());
        want[t] = 1.0;
        worst = worst.max(linalg::inf_norm(&(project(v) - project(&want))));
    }
    report.push("projection", worst);
    let projected: Vec<DVector<f64>> = image.iter().map(project).collect();
    let margin = if nm.is_empty() {
        f64::INFINITY
    } else if projected.len() < nm.len() {
        0.0
    } else {
        linalg::min_singular_value(&columns(&projected, nm.len()))
    };
    report.push_margin("projection-surjective", margin);

    let mut h_prime = Vec::new();
    for c in &ker_a1 {
        let hg = h_to_g(c);
        let mut src = DVector::zeros(src_dim);
        src.rows_mut(0, d).copy_from(&hg);
        src.rows_mut(d, l).copy_from(&a_coeffs_on(&hg, &k2));
        h_prime.push(src);
    }
    let iso_res = h_prime.iter().map(|v| linalg::inf_norm(&project(&image_of(v)))).fold(0.0, f64::max);
    report.push("isotropy", iso_res);

    // Structure of the pieces in g(k).
    let big = &s.double;
    let diag = |i: usize| s.diagonal(&DVector::from_fn(l, |j, _| if i == j { 1.0 } else { 0.0 }));
    let mut nil: Vec<DVector<f64>> = blocks.k2.iter().chain(&blocks.k3).map(|&i| diag(i)).collect();
    nil.extend(s.flat.iter().map(|&j| big.unit(mg[j])));
    let a1p: Vec<DVector<f64>> = blocks.k1p.iter().map(|&i| diag(i)).collect();
    let fg: Vec<DVector<f64>> = (0..d).map(|i| s.f(&g.unit(i))).collect();
    let zero = Subspace::new(&[], big.dim());
    report.push("nil-subalgebra", big.algebra.bracket_inclusion_residual(&nil, &nil, &big.span(&nil)));
    report.push("a1p-subalgebra", big.algebra.bracket_inclusion_residual(&a1p, &a1p, &big.span(&a1p)));
    let na: Vec<DVector<f64>> = nil.iter().chain(&a1p).cloned().collect();
    let commute = big
        .algebra
        .bracket_inclusion_residual(&nil, &a1p, &zero)
        .max(big.algebra.bracket_inclusion_residual(&na, &fg, &zero));
    report.push("commute", commute);

    // Source m-vectors are named after the base index they lift (m_j), so
    // that e_j = m_j + a(m_j) reads as in the semisimple construction.
    let mut source_labels: Vec<String> = g.block("h").iter().map(|&i| g.algebra.frame().label(i).to_string()).collect();
    source_labels.extend(s.ss.iter().map(|&j| format!("m{}", j + 1)));
    source_labels.extend(n_labels.labels().iter().cloned());
    source_labels.extend(s.flat.iter().map(|&j| s.data.base.frame.label(j).to_string()));

    let h_dual_out = h_dual;
    Ok(Presentation {
        setup,
        blocks,
        rotated,
        labels,
        groups,
        source_labels,
        source,
        image,
        target,
        h0,
        h1,
        h_dual: h_dual_out,
        h_prime,
        report,
    })
}

/// Transitive presentation for a reductive base with semisimple Nomizu
/// algebra (no flat factor required).
pub fn presentation_basis(data: &ExtensionData, tol: f64) -> Result<Presentation> {
    build(data, tol)
}

/// Presentation over a product base `semisimple × flat`, whose split is
/// recorded in the base grading blocks `ss` and `flat`.
pub fn mixed_decomposition(data: &ExtensionData, tol: f64) -> Result<Presentation> {
    if !data.base.grading.contains_key("flat") && !data.base.grading.contains_key("ss") {
        return Err(Error::BaseNotProduct("base grading has no ss/flat split".into()));
    }
    build(data, tol)
}
