use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};

use super::Frame;
use crate::error::{Error, Result};

/// Coefficients with smaller magnitude are dropped after every operation.
pub const PRUNE_TOL: f64 = 1e-11;

/// Sort `idx` in place and return the sign of the sorting permutation,
/// or `None` if an index repeats.
pub(crate) fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Position of `e_i∧e_j` (i < j) in the lexicographic basis of Λ²(Rⁿ).
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Lexicographic list of pairs (i, j), i < j.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Position of the strictly increasing tuple `idx` among the k-subsets of
/// `0..n` in lexicographic order.
pub fn comb_rank(n: usize, idx: &[usize]) -> usize {
    let k = idx.len();
    let mut rank = 0;
    let mut next = 0;
    for (s, &c) in idx.iter().enumerate() {
        for v in next..c {
            rank += binomial(n - 1 - v, k - 1 - s);
        }
        next = c + 1;
    }
    rank
}

/// Sparse antisymmetric form over Rⁿ with orthonormal frame, keyed by
/// strictly increasing index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl KForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_term(Vec::new(), c);
        f.prune();
        f
    }

    /// `e_{i1}∧…∧e_{ik}` for indices in any order (a repeat gives zero).
    pub fn basis(dim: usize, idx: &[usize]) -> Result<Self> {
        Self::from_terms(dim, idx.len(), [(idx.to_vec(), 1.0)])
    }

    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut f = Self::zero(dim, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::WrongDegree { expected: degree, found: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::IndexOutOfRange { index: bad, dim });
            }
            f.add_term(idx, c);
        }
        f.prune();
        Ok(f)
    }

    /// 1-form with the given coordinates.
    pub fn one_form(v: &DVector<f64>) -> Self {
        let mut f = Self::zero(v.len(), 1);
        for (i, &c) in v.iter().enumerate() {
            f.add_term(vec![i], c);
        }
        f.prune();
        f
    }

    /// Accumulate `c·e_idx`; `idx` may be unsorted. Call `prune` afterwards.
    pub(crate) fn add_term(&mut self, mut idx: Vec<usize>, c: f64) {
        if c == 0.0 {
            return;
        }
        if let Some(sign) = sort_with_sign(&mut idx) {
            *self.terms.entry(idx).or_insert(0.0) += sign * c;
        }
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= PRUNE_TOL);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient on `e_idx` with indices in any order.
    pub fn coeff(&self, idx: &[usize]) -> f64 {
        let mut key = idx.to_vec();
        match sort_with_sign(&mut key) {
            Some(sign) => sign * self.terms.get(&key).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), c * s);
        }
        out.prune();
        out
    }

    fn same_frame(&self, other: &KForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::FrameMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    fn same_space(&self, other: &KForm) {
        assert_eq!(self.dim, other.dim, "adding forms over different frames");
        assert!(
            self.degree == other.degree || self.is_empty() || other.is_empty(),
            "adding forms of degree {} and {}",
            self.degree,
            other.degree
        );
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        self.same_frame(other)?;
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                out.add_term(idx, x * y);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Interior product `e_i ⌟ self`.
    pub fn contract(&self, i: usize) -> Result<KForm> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim });
        }
        if self.degree == 0 {
            return Err(Error::ContractScalar);
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (idx, c) in &self.terms {
            if let Some(pos) = idx.iter().position(|&j| j == i) {
                let mut rest = idx.clone();
                rest.remove(pos);
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.terms.insert(rest, sign * c);
            }
        }
        Ok(out)
    }

    /// `Σ_i (e_i⌟self) ∧ (e_i⌟other)`.
    pub fn barwedge(&self, other: &KForm) -> Result<KForm> {
        self.same_frame(other)?;
        if self.degree == 0 || other.degree == 0 {
            return Err(Error::ContractScalar);
        }
        let mut out = Self::zero(self.dim, self.degree + other.degree - 2);
        let touched = |f: &KForm| {
            let mut s = std::collections::BTreeSet::new();
            for k in f.terms.keys() {
                s.extend(k.iter().copied());
            }
            s
        };
        let common: Vec<usize> = touched(self).intersection(&touched(other)).copied().collect();
        for i in common {
            out += &self.contract(i)?.wedge(&other.contract(i)?)?;
        }
        out.prune();
        Ok(out)
    }

    /// Pairing making `{e_I}` orthonormal.
    pub fn inner(&self, other: &KForm) -> Result<f64> {
        self.same_frame(other)?;
        if self.degree != other.degree {
            return Err(Error::WrongDegree { expected: self.degree, found: other.degree });
        }
        Ok(self.terms.iter().map(|(k, c)| c * other.terms.get(k).copied().unwrap_or(0.0)).sum())
    }

    /// Pull back along the frame change whose `i`-th column expresses new
    /// vector `i` in old coordinates: `(P^*ω)(v_1,…) = ω(P v_1, …)`.
    pub fn pullback(&self, p: &DMatrix<f64>) -> Result<KForm> {
        if p.nrows() != self.dim {
            return Err(Error::FrameMismatch { left: self.dim, right: p.nrows() });
        }
        let new_dim = p.ncols();
        // e_j (old covector) = Σ_a P[j][a] f_a.
        let mut out = KForm::zero(new_dim, self.degree);
        for (idx, c) in &self.terms {
            let mut acc = KForm::scalar(new_dim, *c);
            for &j in idx {
                let row: Vec<(Vec<usize>, f64)> =
                    (0..new_dim).filter(|&a| p[(j, a)] != 0.0).map(|a| (vec![a], p[(j, a)])).collect();
                let one = KForm::from_terms(new_dim, 1, row)?;
                acc = acc.wedge(&one)?;
            }
            out += &acc;
        }
        out.prune();
        Ok(out)
    }

    /// Relabel index `i` as `map[i]`, dropping terms that hit `None`.
    pub fn reindex(&self, map: &[Option<usize>], new_dim: usize) -> KForm {
        assert_eq!(map.len(), self.dim);
        let mut out = KForm::zero(new_dim, self.degree);
        'terms: for (idx, c) in &self.terms {
            let mut new_idx = Vec::with_capacity(idx.len());
            for &i in idx {
                match map[i] {
                    Some(j) => new_idx.push(j),
                    None => continue 'terms,
                }
            }
            out.add_term(new_idx, *c);
        }
        out.prune();
        out
    }

    /// Same form inside `R^{new_dim}`, indices shifted by `offset`.
    pub fn embed(&self, offset: usize, new_dim: usize) -> KForm {
        let map: Vec<Option<usize>> = (0..self.dim).map(|i| Some(i + offset)).collect();
        self.reindex(&map, new_dim)
    }

    /// Coordinates of a 1-form.
    pub fn to_vector(&self) -> Result<DVector<f64>> {
        if self.degree != 1 && !self.is_empty() {
            return Err(Error::WrongDegree { expected: 1, found: self.degree });
        }
        let mut v = DVector::zeros(self.dim);
        for (k, c) in &self.terms {
            v[k[0]] = *c;
        }
        Ok(v)
    }

    /// Coordinates of a 2-form in the lexicographic Λ² basis.
    pub fn to_lambda2(&self) -> Result<DVector<f64>> {
        if self.degree != 2 && !self.is_empty() {
            return Err(Error::WrongDegree { expected: 2, found: self.degree });
        }
        let n = self.dim;
        let mut v = DVector::zeros(n * n.saturating_sub(1) / 2);
        for (k, c) in &self.terms {
            v[pair_index(n, k[0], k[1])] = *c;
        }
        Ok(v)
    }

    /// Dense coordinates over the lexicographic basis of Λᵏ.
    pub fn to_dense(&self) -> DVector<f64> {
        let mut v = DVector::zeros(binomial(self.dim, self.degree));
        for (k, c) in &self.terms {
            v[comb_rank(self.dim, k)] = *c;
        }
        v
    }

    pub fn from_lambda2(n: usize, v: &DVector<f64>) -> KForm {
        let mut f = KForm::zero(n, 2);
        for (p, (i, j)) in pairs(n).into_iter().enumerate() {
            f.add_term(vec![i, j], v[p]);
        }
        f.prune();
        f
    }

    /// Human-readable rendering over `frame`, e.g. `0.5·m1∧m2 - m3∧m4`.
    pub fn display(&self, frame: &Frame) -> String {
        if self.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (n, (k, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if n == 0 {
                if sign == "-" {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            if (mag - 1.0).abs() > 1e-12 || k.is_empty() {
                s.push_str(&format!("{mag}"));
                if !k.is_empty() {
                    s.push('·');
                }
            }
            if !k.is_empty() {
                s.push_str(&frame.multi_label(k));
            }
        }
        s
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&Frame::numbered("e", self.dim)))
    }
}

impl AddAssign<&KForm> for KForm {
    fn add_assign(&mut self, rhs: &KForm) {
        self.same_space(rhs);
        if rhs.is_empty() {
            return;
        }
        if self.is_empty() {
            self.degree = rhs.degree;
        }
        for (k, c) in &rhs.terms {
            *self.terms.entry(k.clone()).or_insert(0.0) += c;
        }
        self.prune();
    }
}

impl SubAssign<&KForm> for KForm {
    fn sub_assign(&mut self, rhs: &KForm) {
        *self += &rhs.scale(-1.0);
    }
}

impl Add for &KForm {
    type Output = KForm;
    fn add(self, rhs: &KForm) -> KForm {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for KForm {
    type Output = KForm;
    fn add(mut self, rhs: KForm) -> KForm {
        self += &rhs;
        self
    }
}

impl Sub for KForm {
    type Output = KForm;
    fn sub(mut self, rhs: KForm) -> KForm {
        self -= &rhs;
        self
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-1.0)
    }
}

impl Neg for KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-1.0)
    }
}

impl Mul<&KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: &KForm) -> KForm {
        rhs.scale(self)
    }
}

impl Mul<KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: KForm) -> KForm {
        rhs.scale(self)
    }
}
