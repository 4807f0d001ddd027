//! Built-in parameterized examples with their printed tensors as golden
//! references, and a coefficient-level diff against the construction.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector, Matrix3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{build_extension, ExtensionData};
use crate::lie::LieAlgebra;
use crate::model::InfinitesimalModel;
use crate::multilinear::{pairs, CurvatureTensor, Frame, KForm, SkewMap};
use crate::nomizu::reductive_model;

/// Golden coefficients are compared at this absolute tolerance.
pub const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Positive,
    NonZero,
    Real,
    /// Integer at least the given value.
    IntegerAtLeast(i64),
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub domain: Domain,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: Vec<ParamSpec>,
    pub notes: Vec<&'static str>,
}

/// One coefficient where construction and printed formula disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffEntry {
    pub tensor: String,
    pub location: String,
    pub constructed: f64,
    pub printed: f64,
}

/// Printed tensors of an entry, on the labels of the constructed frame.
#[derive(Debug, Clone)]
pub struct Golden {
    pub base_torsion: Option<KForm>,
    pub base_curvature: Option<CurvatureTensor>,
    pub torsion: Option<KForm>,
    pub curvature: Option<CurvatureTensor>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub entry: CatalogEntry,
    pub params: BTreeMap<String, f64>,
    pub data: ExtensionData,
    pub model: InfinitesimalModel,
    pub golden: Golden,
    pub diff: Vec<DiffEntry>,
}

pub fn list() -> Vec<CatalogEntry> {
    use Domain::*;
    let p = |name, default, domain| ParamSpec { name, default, domain };
    vec![
        CatalogEntry {
            name: "su2xsu2",
            summary: "SU(2)xSU(2)xR^3 over the flat product SU(2)xSU(2), k = diagonal su(2)",
            params: vec![p("alpha", 1.0, Positive), p("lambda", 1.0, NonZero)],
            notes: vec![
                "printed mixed torsion terms carry +lambda/sqrt(1+alpha) f_i^(...) while phi(k_i) is printed with -lambda/sqrt(1+alpha); the construction follows phi",
            ],
        },
        CatalogEntry {
            name: "gordon-nil",
            summary: "2-step nilpotent space over R^n with k a torus in so(n)",
            params: vec![p("n", 4.0, IntegerAtLeast(2)), p("rank", 2.0, IntegerAtLeast(1)), p("lambda", 1.0, NonZero)],
            notes: vec!["k is spanned by lambda*e_(2i-1,2i), i = 1..rank; rank <= n/2"],
        },
        CatalogEntry {
            name: "qh7",
            summary: "quaternionic Heisenberg group QH^7 over R^4, k = su(2)",
            params: vec![p("lambda", 1.0, NonZero)],
            notes: vec![],
        },
        CatalogEntry {
            name: "s2r2",
            summary: "(SU(2)xH^3)/R over S^2xR^2, k one-dimensional",
            params: vec![p("lambda", 1.0, NonZero), p("mu", 1.0, NonZero)],
            notes: vec![],
        },
        CatalogEntry {
            name: "aloff-wallach",
            summary: "SU(3)/S^1 x R^4 base, k = su(2) + u(1) (or su(2)+su(2) when mu1 = 0)",
            params: vec![p("lambda", 1.0, NonZero), p("mu1", 1.0, Real), p("mu2", 0.0, Real)],
            notes: vec![
                "printed T and R are compared only for mu2 = 0, mu1 != 0",
                "printed f1 and f3 terms both contain e_(8,11); phi(k1) has e_(9,11)",
                "printed R ends with (3 mu1)^2 (e34+e67)^2; the f4 torsion term suggests e45+e67",
                "printed R0 = -(-3e45-3e67)^2 differs by a factor 3 from -ad(h)|m (.) ad(h)|m / |h|^2 with |h|^2 = 3",
                "mu1 = 0 adds k5 = mu(e_(8,10)-e_(9,11)), k6 = mu(e_(8,11)+e_(9,10)) with mu = mu2",
            ],
        },
    ]
}

fn entry(name: &str) -> Result<CatalogEntry> {
    list().into_iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownEntry(name.to_string()))
}

fn resolve_params(e: &CatalogEntry, given: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    for k in given.keys() {
        if !e.params.iter().any(|p| p.name == k) {
            return Err(Error::UnknownParam { entry: e.name.into(), param: k.clone() });
        }
    }
    let mut out = BTreeMap::new();
    for p in &e.params {
        let v = given.get(p.name).copied().unwrap_or(p.default);
        let bad = |reason: &str| Err(Error::ParamOutOfDomain { param: p.name.into(), reason: reason.into() });
        if !v.is_finite() {
            return bad("must be finite");
        }
        match p.domain {
            Domain::Positive if v <= 0.0 => return bad("must be > 0"),
            Domain::NonZero if v == 0.0 => return bad("must be nonzero"),
            Domain::IntegerAtLeast(m) if v.fract() != 0.0 || v < m as f64 => {
                return bad(&format!("must be an integer >= {m}"));
            }
            _ => {}
        }
        out.insert(p.name.to_string(), v);
    }
    Ok(out)
}

/// Build a form from label terms such as `("f1 e2 e3", c)`; index order
/// within a term may be arbitrary (the sign of the permutation is applied).
pub fn form(frame: &Frame, degree: usize, terms: &[(&str, f64)]) -> Result<KForm> {
    let mut idx_terms = Vec::new();
    for (labels, c) in terms {
        let idx = labels
            .split_whitespace()
            .map(|l| frame.index_of(l).ok_or_else(|| Error::Format(format!("unknown label `{l}`"))))
            .collect::<Result<Vec<usize>>>()?;
        idx_terms.push((idx, *c));
    }
    KForm::from_terms(frame.dim(), degree, idx_terms)
}

fn squares(frame: &Frame, items: &[(f64, Vec<(&str, f64)>)]) -> Result<CurvatureTensor> {
    let mut r = CurvatureTensor::zero(frame.dim());
    for (w, terms) in items {
        r.push_square(form(frame, 2, terms)?, *w)?;
    }
    Ok(r)
}

fn diff_forms(name: &str, frame: &Frame, built: &KForm, printed: &KForm, out: &mut Vec<DiffEntry>) {
    let mut keys: Vec<&Vec<usize>> = built.terms().keys().chain(printed.terms().keys()).collect();
    keys.sort();
    keys.dedup();
    for k in keys {
        let (a, b) = (built.coeff(k), printed.coeff(k));
        if (a - b).abs() > GOLDEN_TOL {
            out.push(DiffEntry { tensor: name.into(), location: frame.multi_label(k), constructed: a, printed: b });
        }
    }
}

fn diff_curvature(name: &str, frame: &Frame, built: &CurvatureTensor, printed: &CurvatureTensor, out: &mut Vec<DiffEntry>) {
    let (g1, g2) = (built.gram(), printed.gram());
    let ps = pairs(frame.dim());
    for p in 0..ps.len() {
        for q in p..ps.len() {
            let (a, b) = (g1[(p, q)], g2[(p, q)]);
            if (a - b).abs() > GOLDEN_TOL {
                let (i, j) = ps[p];
                let (k, l) = ps[q];
                out.push(DiffEntry {
                    tensor: name.into(),
                    location: format!("{}|{}", frame.multi_label(&[i, j]), frame.multi_label(&[k, l])),
                    constructed: a,
                    printed: b,
                });
            }
        }
    }
}

/// Every coefficient where the constructed tensors and the golden ones differ.
pub fn golden_diff(data: &ExtensionData, model: &InfinitesimalModel, golden: &Golden) -> Vec<DiffEntry> {
    let mut out = Vec::new();
    if let Some(t0) = &golden.base_torsion {
        diff_forms("T0", &data.base.frame, &data.base.torsion, t0, &mut out);
    }
    if let Some(r0) = &golden.base_curvature {
        diff_curvature("R0", &data.base.frame, &data.base.curvature, r0, &mut out);
    }
    if let Some(t) = &golden.torsion {
        diff_forms("T", &model.frame, &model.torsion, t, &mut out);
    }
    if let Some(r) = &golden.curvature {
        diff_curvature("R", &model.frame, &model.curvature, r, &mut out);
    }
    out
}

pub fn instantiate(name: &str, params: &BTreeMap<String, f64>) -> Result<Instance> {
    let entry = entry(name)?;
    let params = resolve_params(&entry, params)?;
    let p = |k: &str| params[k];
    let (data, golden) = match name {
        "su2xsu2" => su2xsu2(p("alpha"), p("lambda"))?,
        "gordon-nil" => gordon_nil(p("n") as usize, p("rank") as usize, p("lambda"))?,
        "qh7" => qh7(p("lambda"))?,
        "s2r2" => s2r2(p("lambda"), p("mu"))?,
        "aloff-wallach" => aloff_wallach(p("lambda"), p("mu1"), p("mu2"))?,
        _ => unreachable!("entry list and builders agree"),
    };
    let mut data = data;
    for (k, v) in &params {
        data.base.params.insert(k.clone(), *v);
    }
    let model = build_extension(&data, crate::model::DEFAULT_TOL)?;
    let diff = golden_diff(&data, &model, &golden);
    Ok(Instance { entry, params, data, model, golden, diff })
}

fn ext_frame(l: usize, base: &Frame) -> Result<Frame> {
    Frame::numbered("f", l).concat(base)
}

fn with_generators(base: InfinitesimalModel, gens: Vec<SkewMap>) -> Result<ExtensionData> {
    let l = gens.len();
    ExtensionData::from_generators(base, gens, DMatrix::identity(l, l), Frame::numbered("k", l))
}

/// su(2) ⊕ su(2) with `[x1,x2] = −x3` (cyclic) on each factor.
fn su2_pair() -> LieAlgebra {
    let mut brackets = Vec::new();
    for off in [0, 3] {
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let mut v = DVector::zeros(6);
            v[off + k] = -1.0;
            brackets.push((off + i, off + j, v));
        }
    }
    LieAlgebra::from_brackets(Frame::new(["x1", "x2", "x3", "y1", "y2", "y3"]).expect("distinct"), &brackets)
        .expect("valid table")
}

fn su2xsu2(alpha: f64, lambda: f64) -> Result<(ExtensionData, Golden)> {
    let mut p = DMatrix::zeros(6, 6);
    let (s1, s2) = ((1.0 + alpha).powf(-0.5), (1.0 + 1.0 / alpha).powf(-0.5));
    for i in 0..3 {
        p[(i, i)] = s1;
        p[(3 + i, i)] = s1;
        p[(i, 3 + i)] = s2;
        p[(3 + i, 3 + i)] = -s2 / alpha;
    }
    let frame = Frame::numbered("e", 6);
    let g = su2_pair().change_basis(&p, frame.clone())?;
    let idx: Vec<usize> = (0..6).collect();
    let base = reductive_model(&g, &[], &idx, frame.clone())?;
    let gens: Vec<SkewMap> = (0..3).map(|i| SkewMap::new(g.ad(i) * lambda)).collect::<Result<_>>()?;
    let data = with_generators(base, gens)?;

    let r = 1.0 / (1.0 + alpha).sqrt();
    let c = (1.0 - alpha) * (1.0 + 1.0 / alpha).sqrt() / (1.0 + alpha);
    let t0_terms = [("e1 e2 e3", r), ("e1 e5 e6", r), ("e2 e6 e4", r), ("e3 e4 e5", r), ("e4 e5 e6", -c)];
    let ef = ext_frame(3, &frame)?;
    let q = lambda * r;
    let mut t_terms: Vec<(&str, f64)> = t0_terms.to_vec();
    t_terms.extend([
        ("f1 e2 e3", q),
        ("f1 e5 e6", q),
        ("f2 e3 e1", q),
        ("f2 e6 e4", q),
        ("f3 e1 e2", q),
        ("f3 e4 e5", q),
        ("f1 f2 f3", -2.0 * q),
    ]);
    let w = lambda * lambda / (1.0 + alpha);
    let golden = Golden {
        base_torsion: Some(form(&frame, 3, &t0_terms)?),
        base_curvature: None,
        torsion: Some(form(&ef, 3, &t_terms)?),
        curvature: Some(squares(
            &ef,
            &[
                (w, vec![("e2 e3", 1.0), ("e5 e6", 1.0), ("f2 f3", 1.0)]),
                (w, vec![("e3 e1", 1.0), ("e6 e4", 1.0), ("f3 f1", 1.0)]),
                (w, vec![("e1 e2", 1.0), ("e4 e5", 1.0), ("f1 f2", 1.0)]),
            ],
        )?),
    };
    Ok((data, golden))
}

fn gordon_nil(n: usize, rank: usize, lambda: f64) -> Result<(ExtensionData, Golden)> {
    if 2 * rank > n {
        return Err(Error::ParamOutOfDomain { param: "rank".into(), reason: "must be <= n/2".into() });
    }
    let frame = Frame::numbered("e", n);
    let base = InfinitesimalModel::flat(frame.clone());
    let labels: Vec<String> = (0..rank).map(|i| format!("e{} e{}", 2 * i + 1, 2 * i + 2)).collect();
    let gens = labels
        .iter()
        .map(|l| SkewMap::from_two_form(&form(&frame, 2, &[(l.as_str(), lambda)])?))
        .collect::<Result<Vec<_>>>()?;
    let data = with_generators(base, gens)?;
    let ef = ext_frame(rank, &frame)?;
    let f_labels: Vec<String> = (0..rank).map(|i| format!("f{} {}", i + 1, labels[i])).collect();
    let t: Vec<(&str, f64)> = f_labels.iter().map(|s| (s.as_str(), lambda)).collect();
    let r: Vec<(f64, Vec<(&str, f64)>)> = labels.iter().map(|s| (1.0, vec![(s.as_str(), lambda)])).collect();
    let golden = Golden {
        base_torsion: None,
        base_curvature: None,
        torsion: Some(form(&ef, 3, &t)?),
        curvature: Some(squares(&ef, &r)?),
    };
    Ok((data, golden))
}

fn qh7(lambda: f64) -> Result<(ExtensionData, Golden)> {
    let frame = Frame::numbered("e", 4);
    let base = InfinitesimalModel::flat(frame.clone());
    let phi_terms: [Vec<(&str, f64)>; 3] = [
        vec![("e1 e3", lambda), ("e2 e4", lambda)],
        vec![("e1 e2", -lambda), ("e3 e4", lambda)],
        vec![("e1 e4", -lambda), ("e2 e3", lambda)],
    ];
    let gens = phi_terms
        .iter()
        .map(|t| SkewMap::from_two_form(&form(&frame, 2, t)?))
        .collect::<Result<Vec<_>>>()?;
    let data = with_generators(base, gens)?;
    let ef = ext_frame(3, &frame)?;
    let l = lambda;
    let torsion = form(
        &ef,
        3,
        &[
            ("e1 e3 f1", l),
            ("e2 e4 f1", l),
            ("e1 e2 f2", -l),
            ("e3 e4 f2", l),
            ("e1 e4 f3", -l),
            ("e2 e3 f3", l),
            ("f1 f2 f3", 4.0 * l),
        ],
    )?;
    let curvature = squares(
        &ef,
        &[
            (1.0, vec![("f2 f3", 2.0 * l), ("e1 e3", l), ("e2 e4", l)]),
            (1.0, vec![("f3 f1", 2.0 * l), ("e1 e2", -l), ("e3 e4", l)]),
            (1.0, vec![("f1 f2", 2.0 * l), ("e1 e4", -l), ("e2 e3", l)]),
        ],
    )?;
    Ok((data, Golden { base_torsion: None, base_curvature: None, torsion: Some(torsion), curvature: Some(curvature) }))
}

fn s2r2(lambda: f64, mu: f64) -> Result<(ExtensionData, Golden)> {
    let frame = Frame::numbered("e", 4);
    let r0 = squares(&frame, &[(-1.0, vec![("e1 e2", 1.0)])])?;
    let base = InfinitesimalModel::new(frame.clone(), KForm::zero(4, 3), r0)?
        .with_grading("ss", vec![0, 1])
        .with_grading("flat", vec![2, 3]);
    let phi = SkewMap::from_two_form(&form(&frame, 2, &[("e1 e2", lambda), ("e3 e4", mu)])?)?;
    let data = with_generators(base, vec![phi])?;
    let ef = ext_frame(1, &frame)?;
    let golden = Golden {
        base_torsion: None,
        base_curvature: None,
        torsion: Some(form(&ef, 3, &[("f1 e1 e2", lambda), ("f1 e3 e4", mu)])?),
        curvature: Some(squares(
            &ef,
            &[(-1.0, vec![("e1 e2", 1.0)]), (1.0, vec![("e1 e2", lambda), ("e3 e4", mu)])],
        )?),
    };
    Ok((data, golden))
}

type C3 = Matrix3<Complex<f64>>;

fn cmat(entries: [[(f64, f64); 3]; 3]) -> C3 {
    C3::from_fn(|i, j| Complex::new(entries[i][j].0, entries[i][j].1))
}

/// `h, m1, …, m7` inside su(3).
pub fn su3_basis() -> Vec<C3> {
    let o = (0.0, 0.0);
    let (r, n, i, ni) = ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0));
    vec![
        cmat([[i, o, o], [o, i, o], [o, o, (0.0, -2.0)]]),
        cmat([[o, n, o], [r, o, o], [o, o, o]]),
        cmat([[i, o, o], [o, ni, o], [o, o, o]]),
        cmat([[o, i, o], [i, o, o], [o, o, o]]),
        cmat([[o, o, n], [o, o, o], [r, o, o]]),
        cmat([[o, o, i], [o, o, o], [i, o, o]]),
        cmat([[o, o, o], [o, o, n], [o, r, o]]),
        cmat([[o, o, o], [o, o, i], [o, i, o]]),
    ]
}

/// `−½ Re tr(XY)`.
pub fn su3_metric(x: &C3, y: &C3) -> f64 {
    -0.5 * (x * y).trace().re
}

/// su(3) in the basis `h, m1, …, m7`, with the metric as its form.
pub fn su3() -> LieAlgebra {
    let basis = su3_basis();
    let norms: Vec<f64> = basis.iter().map(|b| su3_metric(b, b)).collect();
    let mut brackets = Vec::new();
    for a in 0..8 {
        for b in a + 1..8 {
            let c = basis[a] * basis[b] - basis[b] * basis[a];
            let v = DVector::from_fn(8, |k, _| su3_metric(&c, &basis[k]) / norms[k]);
            brackets.push((a, b, v));
        }
    }
    let mut labels = vec!["h".to_string()];
    labels.extend((1..=7).map(|i| format!("m{i}")));
    let gram = DMatrix::from_fn(8, 8, |i, j| su3_metric(&basis[i], &basis[j]));
    LieAlgebra::from_brackets(Frame::new(labels).expect("distinct"), &brackets).expect("valid table").with_form(gram)
}

fn aloff_wallach(lambda: f64, mu1: f64, mu2: f64) -> Result<(ExtensionData, Golden)> {
    if mu1 == 0.0 && mu2 == 0.0 {
        return Err(Error::ParamOutOfDomain { param: "mu1".into(), reason: "mu1 and mu2 cannot both vanish".into() });
    }
    let g = su3();
    let m_idx: Vec<usize> = (1..8).collect();
    let aw = reductive_model(&g, &[0], &m_idx, Frame::numbered("e", 7))?;
    let frame = Frame::numbered("e", 11);
    let embed: Vec<Option<usize>> = (0..7).map(Some).collect();
    let base = InfinitesimalModel::new(frame.clone(), aw.torsion.reindex(&embed, 11), aw.curvature.reindex(&embed, 11))?
        .with_grading("ss", (0..7).collect())
        .with_grading("flat", (7..11).collect());

    let ad_m = |i: usize| -> DMatrix<f64> {
        let full = g.ad(i);
        let mut out = DMatrix::zeros(11, 11);
        for a in 0..7 {
            for b in 0..7 {
                out[(a, b)] = full[(a + 1, b + 1)];
            }
        }
        out
    };
    let flat = |terms: &[(&str, f64)]| -> Result<DMatrix<f64>> {
        Ok(SkewMap::from_two_form(&form(&frame, 2, terms)?)?.matrix().clone())
    };
    let mut gens = vec![
        (ad_m(1) + flat(&[("e8 e10", 1.0), ("e9 e11", 1.0)])?) * lambda,
        (ad_m(2) + flat(&[("e8 e9", -1.0), ("e10 e11", 1.0)])?) * lambda,
        (ad_m(3) + flat(&[("e8 e11", -1.0), ("e9 e10", 1.0)])?) * lambda,
        ad_m(0) * mu1 + flat(&[("e8 e9", mu2), ("e10 e11", mu2)])?,
    ];
    if mu1 == 0.0 {
        gens.push(flat(&[("e8 e10", mu2), ("e9 e11", -mu2)])?);
        gens.push(flat(&[("e8 e11", mu2), ("e9 e10", mu2)])?);
    }
    let gens = gens.into_iter().map(SkewMap::new).collect::<Result<Vec<_>>>()?;
    let data = with_generators(base, gens)?;

    let t0_terms: Vec<(&str, f64)> = vec![
        ("e1 e2 e3", -2.0),
        ("e1 e4 e6", -1.0),
        ("e1 e5 e7", -1.0),
        ("e2 e4 e5", 1.0),
        ("e2 e6 e7", -1.0),
        ("e3 e4 e7", 1.0),
        ("e3 e5 e6", -1.0),
    ];
    let base_torsion = Some(form(&frame, 3, &t0_terms)?);
    let base_curvature = Some(squares(&frame, &[(-1.0, vec![("e4 e5", -3.0), ("e6 e7", -3.0)])])?);
    let (torsion, curvature) = if mu2 == 0.0 && mu1 != 0.0 {
        let ef = ext_frame(4, &frame)?;
        let l = lambda;
        let mut t = vec![
            ("e1 e2 e3", -2.0),
            ("e1 e5 e7", -1.0),
            ("e1 e4 e6", -1.0),
            ("e2 e4 e5", 1.0),
            ("e2 e6 e7", -1.0),
            ("e3 e4 e7", 1.0),
            ("e3 e5 e6", -1.0),
        ];
        t.extend([
            ("f1 e2 e3", 2.0 * l),
            ("f1 e5 e7", l),
            ("f1 e4 e6", l),
            ("f1 e8 e10", l),
            ("f1 e8 e11", l),
            ("f2 e3 e1", 2.0 * l),
            ("f2 e4 e5", -l),
            ("f2 e6 e7", l),
            ("f2 e8 e9", l),
            ("f2 e10 e11", -l),
            ("f3 e1 e2", 2.0 * l),
            ("f3 e4 e7", -l),
            ("f3 e5 e6", l),
            ("f3 e8 e11", l),
            ("f3 e10 e11", l),
            ("f4 e4 e5", -3.0 * mu1),
            ("f4 e6 e7", -3.0 * mu1),
            ("f1 f2 f3", 4.0 * l),
        ]);
        let l2 = l * l;
        let r = squares(
            &ef,
            &[
                (l2, vec![("e2 e3", 2.0), ("e5 e7", 1.0), ("e4 e6", 1.0), ("e8 e10", 1.0), ("e8 e11", 1.0), ("f2 f3", 2.0)]),
                (l2, vec![("e3 e1", 2.0), ("e4 e5", -1.0), ("e6 e7", 1.0), ("e8 e9", 1.0), ("e10 e11", -1.0), ("f3 f1", 2.0)]),
                (l2, vec![("e1 e2", 2.0), ("e4 e7", -1.0), ("e5 e6", 1.0), ("e8 e11", 1.0), ("e10 e11", 1.0), ("f1 f2", 2.0)]),
                (9.0 * mu1 * mu1, vec![("e3 e4", 1.0), ("e6 e7", 1.0)]),
            ],
        )?;
        (Some(form(&ef, 3, &t)?), Some(r))
    } else {
        (None, None)
    };
    Ok((data, Golden { base_torsion, base_curvature, torsion, curvature }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_TOL;

    fn run(name: &str, params: &[(&str, f64)]) -> Instance {
        let p = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        instantiate(name, &p).unwrap()
    }

    #[test]
    fn su3_basis_is_orthogonal() {
        let b = su3_basis();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i != j { 0.0 } else if i == 0 { 3.0 } else { 1.0 };
                assert!((su3_metric(&b[i], &b[j]) - want).abs() < 1e-15);
            }
        }
        let g = su3();
        assert!(g.jacobi_residual() < 1e-14);
        assert!(g.invariance_residual(g.form.as_ref().unwrap()) < 1e-14);
    }

    #[test]
    fn defaults_instantiate_and_verify() {
        for e in list() {
            let inst = instantiate(e.name, &BTreeMap::new()).unwrap();
            let rep = inst.model.verify(DEFAULT_TOL);
            assert!(rep.pass(), "{}: {:?}", e.name, rep.failures());
        }
    }

    #[test]
    fn qh7_matches_print() {
        assert!(run("qh7", &[("lambda", 1.0)]).diff.is_empty());
        assert!(run("qh7", &[("lambda", -2.5)]).diff.is_empty());
    }

    #[test]
    fn s2r2_matches_print() {
        assert!(run("s2r2", &[("lambda", 0.3), ("mu", -1.7)]).diff.is_empty());
    }

    #[test]
    fn su2xsu2_base_matches_print() {
        for alpha in [0.5, 1.0, 2.0] {
            let inst = run("su2xsu2", &[("alpha", alpha), ("lambda", 1.0)]);
            assert!(inst.diff.iter().all(|d| d.tensor == "T"), "{:?}", inst.diff);
        }
    }

    #[test]
    fn param_errors() {
        let p = |k: &str, v: f64| [(k.to_string(), v)].into_iter().collect::<BTreeMap<_, _>>();
        assert!(matches!(instantiate("nope", &BTreeMap::new()), Err(Error::UnknownEntry(_))));
        assert!(matches!(instantiate("qh7", &p("mu", 1.0)), Err(Error::UnknownParam { .. })));
        assert!(matches!(instantiate("qh7", &p("lambda", 0.0)), Err(Error::ParamOutOfDomain { .. })));
        assert!(matches!(instantiate("su2xsu2", &p("alpha", -1.0)), Err(Error::ParamOutOfDomain { .. })));
        assert!(matches!(instantiate("gordon-nil", &p("rank", 3.0)), Err(Error::ParamOutOfDomain { .. })));
    }
}
