//! JSON model and extension files (1-based indices) and canonical export.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::ExtensionData;
use crate::lie::LieAlgebra;
use crate::model::InfinitesimalModel;
use crate::multilinear::{CurvatureTensor, Frame, KForm, SkewMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub idx: Vec<usize>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Square {
    pub form: Vec<Term>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub a: Vec<Term>,
    pub b: Vec<Term>,
    pub w: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub squares: Vec<Square>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub basis: Vec<String>,
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grading: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub torsion: Vec<Term>,
    #[serde(default)]
    pub curvature: CurvatureFile,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KFile {
    pub dim: usize,
    pub labels: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseRef {
    Path(String),
    Inline(Box<ModelFile>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionFile {
    pub k: KFile,
    pub phi: Vec<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_labels: Option<Vec<String>>,
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn form_from_terms(dim: usize, degree: usize, terms: &[Term], what: &str) -> Result<KForm> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        if t.idx.len() != degree {
            return Err(fmt_err(format!("{what}: index {:?} must have {degree} entries", t.idx)));
        }
        if t.idx.iter().any(|&i| i == 0 || i > dim) {
            return Err(fmt_err(format!("{what}: index {:?} out of range 1..={dim}", t.idx)));
        }
        if t.idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err(fmt_err(format!("{what}: index {:?} must be strictly increasing", t.idx)));
        }
        if !t.c.is_finite() {
            return Err(fmt_err(format!("{what}: coefficient must be finite")));
        }
        out.push((t.idx.iter().map(|i| i - 1).collect(), t.c));
    }
    KForm::from_terms(dim, degree, out)
}

pub fn terms_from_form(f: &KForm) -> Vec<Term> {
    f.terms().iter().map(|(idx, &c)| Term { idx: idx.iter().map(|i| i + 1).collect(), c }).collect()
}

fn square_matrix(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(fmt_err(format!("{what} must be a {dim}x{dim} matrix")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(fmt_err(format!("{what} entries must be finite")));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

/// Change of basis to an orthonormal frame: columns are the new vectors in
/// old coordinates (`P = L⁻ᵀ` for `G = L Lᵀ`).
fn orthonormalizer(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = (g - g.transpose()).abs().max();
    if asym > 1e-12 * g.abs().max().max(1.0) {
        return Err(fmt_err("metric must be symmetric"));
    }
    let chol = Cholesky::new(g.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let inv = l.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    Ok(inv.transpose())
}

impl ModelFile {
    pub fn into_model(self) -> Result<InfinitesimalModel> {
        let n = self.dim;
        if self.basis.len() != n {
            return Err(fmt_err(format!("basis has {} labels, dim is {n}", self.basis.len())));
        }
        let frame = Frame::new(self.basis.clone())?;
        let torsion = form_from_terms(n, 3, &self.torsion, "torsion")?;
        if self.curvature.squares.iter().any(|s| !s.w.is_finite()) || self.curvature.pairs.iter().any(|p| !p.w.is_finite()) {
            return Err(fmt_err("curvature weights must be finite"));
        }
        let mut r = CurvatureTensor::zero(n);
        for s in &self.curvature.squares {
            r.push_square(form_from_terms(n, 2, &s.form, "curvature square")?, s.w)?;
        }
        for p in &self.curvature.pairs {
            r.push_pair(form_from_terms(n, 2, &p.a, "curvature pair")?, form_from_terms(n, 2, &p.b, "curvature pair")?, p.w)?;
        }
        let (torsion, r) = match &self.metric {
            Metric::Named(s) if s == "orthonormal" => (torsion, r),
            Metric::Named(s) => return Err(fmt_err(format!("unknown metric `{s}`"))),
            Metric::Matrix(rows) => {
                let p = orthonormalizer(&square_matrix(rows, n, "metric")?)?;
                (torsion.pullback(&p)?, r.pullback(&p)?)
            }
        };
        let mut model = InfinitesimalModel::new(frame, torsion, r)?;
        for (name, idx) in self.grading {
            if idx.iter().any(|&i| i == 0 || i > n) {
                return Err(fmt_err(format!("grading `{name}`: index out of range")));
            }
            model.grading.insert(name, idx.iter().map(|i| i - 1).collect());
        }
        model.params = self.params;
        Ok(model)
    }

    pub fn from_model(m: &InfinitesimalModel) -> Self {
        let mut curvature = CurvatureFile::default();
        for p in m.curvature.pairs() {
            if p.a == p.b {
                curvature.squares.push(Square { form: terms_from_form(&p.a), w: p.weight });
            } else {
                curvature.pairs.push(Pair { a: terms_from_form(&p.a), b: terms_from_form(&p.b), w: p.weight });
            }
        }
        ModelFile {
            dim: m.dim(),
            basis: m.frame.labels().to_vec(),
            metric: Metric::Named("orthonormal".into()),
            grading: m.grading.iter().map(|(k, v)| (k.clone(), v.iter().map(|i| i + 1).collect())).collect(),
            torsion: terms_from_form(&m.torsion),
            curvature,
            params: m.params.clone(),
        }
    }
}

/// Canonical JSON: sorted keys, two-space indentation, shortest round-trip floats.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_model(text: &str) -> Result<InfinitesimalModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model()
}

pub fn export_model(m: &InfinitesimalModel) -> Result<String> {
    canonical_json(&ModelFile::from_model(m))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| fmt_err(format!("{}: {e}", path.display())))
}

pub fn read_model(path: &Path) -> Result<InfinitesimalModel> {
    parse_model(&read_text(path)?)
}

impl ExtensionFile {
    /// Resolve into extension data. `base` overrides the file's own base;
    /// relative base paths are resolved against `dir`.
    pub fn into_data(self, base: Option<InfinitesimalModel>, dir: Option<&Path>) -> Result<ExtensionData> {
        let base = match (base, self.base) {
            (Some(b), _) => b,
            (None, Some(BaseRef::Inline(m))) => m.into_model()?,
            (None, Some(BaseRef::Path(p))) => {
                let path = match dir {
                    Some(d) if Path::new(&p).is_relative() => d.join(&p),
                    _ => PathBuf::from(&p),
                };
                read_model(&path)?
            }
            (None, None) => return Err(fmt_err("extension file has no base model")),
        };
        let k = &self.k;
        let l = k.dim;
        if k.labels.len() != l {
            return Err(fmt_err(format!("k has {} labels, dim is {l}", k.labels.len())));
        }
        let mut brackets = Vec::new();
        for b in &k.brackets {
            if b.i == 0 || b.j == 0 || b.i > l || b.j > l || b.coeffs.len() != l {
                return Err(fmt_err(format!("k bracket ({}, {}) malformed", b.i, b.j)));
            }
            if b.i == b.j {
                return Err(fmt_err("k bracket with i == j"));
            }
            let v = DVector::from_vec(b.coeffs.clone());
            let (i, j, v) = if b.i < b.j { (b.i - 1, b.j - 1, v) } else { (b.j - 1, b.i - 1, -v) };
            brackets.push((i, j, v));
        }
        let alg = LieAlgebra::from_brackets(Frame::new(k.labels.clone())?, &brackets)?
            .with_form(square_matrix(&k.b, l, "B")?);
        if self.phi.len() != l {
            return Err(fmt_err(format!("phi has {} entries, k has dim {l}", self.phi.len())));
        }
        let n = base.dim();
        let phi = self
            .phi
            .iter()
            .map(|terms| SkewMap::from_two_form(&form_from_terms(n, 2, terms, "phi")?))
            .collect::<Result<Vec<_>>>()?;
        let mut data = ExtensionData::new(alg, phi, base);
        if let Some(labels) = self.n_labels {
            if labels.len() != l {
                return Err(fmt_err("n_labels length must equal dim k"));
            }
            data.n_labels = Some(labels);
        }
        Ok(data)
    }

    pub fn from_data(data: &ExtensionData, inline_base: bool) -> Self {
        let l = data.l();
        let mut brackets = Vec::new();
        for i in 0..l {
            for j in i + 1..l {
                let v = data.k.bracket_basis(i, j);
                if v.iter().any(|x| *x != 0.0) {
                    brackets.push(BracketEntry { i: i + 1, j: j + 1, coeffs: v.iter().copied().collect() });
                }
            }
        }
        let b = data.metric();
        ExtensionFile {
            k: KFile {
                dim: l,
                labels: data.k.frame().labels().to_vec(),
                brackets,
                b: (0..l).map(|i| b.row(i).iter().copied().collect()).collect(),
            },
            phi: data.phi.iter().map(|p| terms_from_form(&p.to_two_form())).collect(),
            base: inline_base.then(|| BaseRef::Inline(Box::new(ModelFile::from_model(&data.base)))),
            n_labels: data.n_labels.clone(),
        }
    }
}

pub fn parse_extension(text: &str, base: Option<InfinitesimalModel>, dir: Option<&Path>) -> Result<ExtensionData> {
    let file: ExtensionFile = serde_json::from_str(text)?;
    file.into_data(base, dir)
}

pub fn read_extension(path: &Path, base: Option<InfinitesimalModel>) -> Result<ExtensionData> {
    parse_extension(&read_text(path)?, base, path.parent())
}

/// A JSON list of 2-forms (each a list of terms) as skew maps on `dim` vectors.
pub fn parse_two_forms(text: &str, dim: usize) -> Result<Vec<SkewMap>> {
    let forms: Vec<Vec<Term>> = serde_json::from_str(text)?;
    forms.iter().map(|t| SkewMap::from_two_form(&form_from_terms(dim, 2, t, "2-form")?)).collect()
}

pub fn read_two_forms(path: &Path, dim: usize) -> Result<Vec<SkewMap>> {
    parse_two_forms(&read_text(path)?, dim)
}

pub fn export_extension(data: &ExtensionData) -> Result<String> {
    canonical_json(&ExtensionFile::from_data(data, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CARTAN: &str = r#"{"dim":3,"basis":["a","b","c"],"metric":"orthonormal","torsion":[{"idx":[1,2,3],"c":1.0}]}"#;

    #[test]
    fn parse_and_round_trip() {
        let m = parse_model(CARTAN).unwrap();
        assert_eq!(m.torsion.coeff(&[0, 1, 2]), 1.0);
        let out = export_model(&m).unwrap();
        assert_eq!(export_model(&parse_model(&out).unwrap()).unwrap(), out);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            r#"{"dim":3,"basis":["a","b","c"],"metric":"orthonormal","torsion":[{"idx":[2,1,3],"c":1.0}]}"#,
            r#"{"dim":3,"basis":["a","b","c"],"metric":"orthonormal","torsion":[{"idx":[1,2,4],"c":1.0}]}"#,
            r#"{"dim":3,"basis":["a","b"],"metric":"orthonormal"}"#,
            r#"{"dim":2,"basis":["a","b"],"metric":[[1,2],[2,1]]}"#,
            r#"{"dim":2,"basis":["a","b"],"metric":"round"}"#,
            r#"{"dim":2,"basis":["a","b"],"metric":"orthonormal","extra":1}"#,
            r#"{"dim":2"#,
        ] {
            assert!(parse_model(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn metric_is_orthonormalized() {
        // e1, e2 with |e1|² = 4: the torsion-free S² curvature scales accordingly.
        let text = r#"{"dim":2,"basis":["a","b"],"metric":[[4,0],[0,1]],
            "curvature":{"squares":[{"form":[{"idx":[1,2],"c":1.0}],"w":-1.0}]}}"#;
        let m = parse_model(text).unwrap();
        assert!((m.curvature.gram()[(0, 0)] + 0.25).abs() < 1e-15);
    }
}
