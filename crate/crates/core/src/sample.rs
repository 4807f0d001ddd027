//! Random extension data for property checks. Randomness comes from a
//! caller-supplied source so the library carries no RNG dependency.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::extension::{compute_s, ExtensionData};
use crate::lie::LieAlgebra;
use crate::linalg;
use crate::model::InfinitesimalModel;
use crate::multilinear::{Frame, SkewMap};

/// Uniform samples in `[0, 1)`.
pub trait Source {
    fn uniform(&mut self) -> f64;

    fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

impl<F: FnMut() -> f64> Source for F {
    fn uniform(&mut self) -> f64 {
        self()
    }
}

fn orthonormal(maps: &[SkewMap], n: usize) -> Vec<SkewMap> {
    let vecs: Vec<DVector<f64>> = maps.iter().map(|a| a.to_lambda2()).collect();
    let onb = linalg::orthonormal_basis(&vecs, n * (n - 1) / 2);
    onb.column_iter().map(|c| SkewMap::from_lambda2(n, &c.into())).collect()
}

/// Subalgebra generated by a random subset of `s` (nonempty when `s` is),
/// as an orthonormal basis of skew maps.
pub fn random_subalgebra(s: &[SkewMap], n: usize, rng: &mut impl Source) -> Vec<SkewMap> {
    if s.is_empty() {
        return Vec::new();
    }
    let count = 1 + rng.index(s.len().min(3));
    let mut picked: Vec<SkewMap> = Vec::new();
    for _ in 0..count {
        picked.push(s[rng.index(s.len())].clone());
    }
    let mut basis = orthonormal(&picked, n);
    loop {
        let mut all = basis.clone();
        for a in &basis {
            for b in &basis {
                all.push(a.commutator(b).expect("same frame"));
            }
        }
        let next = orthonormal(&all, n);
        if next.len() == basis.len() {
            return basis;
        }
        basis = next;
    }
}

/// Random ad-invariant inner product on `k`: `a·I + b·(−Killing)` for an
/// orthonormal skew-map basis, or an arbitrary SPD matrix when `k` is abelian.
pub fn random_invariant_metric(k: &LieAlgebra, rng: &mut impl Source) -> DMatrix<f64> {
    let l = k.dim();
    let abelian = (0..l).all(|i| (0..l).all(|j| k.bracket_basis(i, j).amax() == 0.0));
    if abelian {
        let x = DMatrix::from_fn(l, l, |_, _| rng.range(-0.5, 0.5));
        return DMatrix::identity(l, l) * rng.range(0.5, 2.0) + x.transpose() * x;
    }
    let b = -k.killing() * rng.range(0.0, 1.0) + DMatrix::identity(l, l) * rng.range(0.5, 2.0);
    (&b + b.transpose()) * 0.5
}

/// Extension data with `k` a random subalgebra of `s(base)` (isotropy im R)
/// and a random invariant `B`.
pub fn random_extension(base: &InfinitesimalModel, rng: &mut impl Source) -> Result<ExtensionData> {
    let s = compute_s(base, None);
    let gens = random_subalgebra(&s, base.dim(), rng);
    let (k, _) = LieAlgebra::from_skew_maps(Frame::numbered("k", gens.len()), &gens)?;
    let b = random_invariant_metric(&k, rng);
    Ok(ExtensionData::new(k.with_form(b), gens, base.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::validate_extension_data;
    use crate::multilinear::{CurvatureTensor, KForm};

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut x = seed;
        move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    #[test]
    fn random_extensions_of_flat_space_are_valid() {
        let base = InfinitesimalModel::new(Frame::numbered("e", 4), KForm::zero(4, 3), CurvatureTensor::zero(4)).unwrap();
        let mut rng = lcg(7);
        for _ in 0..20 {
            let data = random_extension(&base, &mut rng).unwrap();
            let rep = validate_extension_data(&data, 1e-9);
            assert!(rep.pass(), "{:?}", rep.failures());
        }
    }
}
