use nalgebra::DMatrix;
use nrw::extension::{build_extension, compute_s, validate_extension_data};
use nrw::model::sigma_t;
use nrw::multilinear::{CurvatureTensor, Frame, KForm, SkewMap};
use nrw::nomizu::{double_extension, structure_checks, KostantSetup};
use nrw::sample::random_extension;
use nrw::InfinitesimalModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn random_form(rng: &mut ChaCha8Rng, n: usize, k: usize) -> KForm {
    let mut terms = Vec::new();
    for _ in 0..4 {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            idx.swap(i, j);
        }
        let mut idx = idx[..k].to_vec();
        idx.sort();
        terms.push((idx, rng.gen_range(-1.0..1.0)));
    }
    KForm::from_terms(n, k, terms).unwrap()
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

fn flat(n: usize) -> InfinitesimalModel {
    InfinitesimalModel::new(Frame::numbered("e", n), KForm::zero(n, 3), CurvatureTensor::zero(n)).unwrap()
}

fn source(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || rng.gen()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>(), n in 4usize..8, p in 1usize..3, q in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, n, p);
        let b = random_form(&mut rng, n, q);
        let sign = if p * q % 2 == 0 { 1.0 } else { -1.0 };
        let diff = &a.wedge(&b).unwrap() - &b.wedge(&a).unwrap().scale(sign);
        prop_assert!(diff.norm_inf() < 1e-12);
    }

    #[test]
    fn barwedge_is_commutator_on_two_forms(seed in any::<u64>(), n in 3usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, n, 2);
        let b = random_form(&mut rng, n, 2);
        let am = SkewMap::from_two_form(&a).unwrap();
        let bm = SkewMap::from_two_form(&b).unwrap();
        let diff = &am.commutator(&bm).unwrap().to_two_form() - &a.barwedge(&b).unwrap();
        prop_assert!(diff.norm_inf() < 1e-13);
    }

    #[test]
    fn skew_map_action_is_a_derivation_of_wedge(seed in any::<u64>(), n in 4usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = SkewMap::from_two_form(&random_form(&mut rng, n, 2)).unwrap();
        let x = random_form(&mut rng, n, 1);
        let y = random_form(&mut rng, n, 2);
        let lhs = a.act_on_form(&x.wedge(&y).unwrap()).unwrap();
        let rhs = &a.act_on_form(&x).unwrap().wedge(&y).unwrap() + &x.wedge(&a.act_on_form(&y).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).norm_inf() < 1e-12);
    }

    #[test]
    fn bianchi_routes_agree_on_squares(seed in any::<u64>(), n in 4usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_form(&mut rng, n, 3);
        let mut r = CurvatureTensor::zero(n);
        r.push_square(random_form(&mut rng, n, 2), rng.gen_range(-1.0..1.0)).unwrap();
        r.push_pair(random_form(&mut rng, n, 2), random_form(&mut rng, n, 2), 1.0).unwrap();
        let m = InfinitesimalModel::new(Frame::numbered("e", n), t, r).unwrap();
        let (c, f) = (m.bianchi1_cyclic(), m.bianchi1_4form());
        prop_assert!((c - f).abs() <= 1e-9 * c.max(f).max(1.0), "cyclic {} vs 4-form {}", c, f);
    }

    #[test]
    fn random_extensions_are_models(seed in any::<u64>(), n in 3usize..6) {
        let mut src = source(seed);
        let data = random_extension(&flat(n), &mut src).unwrap();
        prop_assert!(validate_extension_data(&data, TOL).pass());
        let model = build_extension(&data, TOL).unwrap();
        let rep = model.verify(1e-8);
        prop_assert!(rep.pass(), "{:?}", rep.failures());
        let g = double_extension(&data, TOL).unwrap();
        let sc = structure_checks(&g, 1e-8);
        prop_assert!(sc.pass(), "{:?}", sc.failures());
        let setup = KostantSetup::new(&data, TOL).unwrap();
        prop_assert!(setup.homomorphism_residual() < 1e-8);
    }

    #[test]
    fn verdicts_are_frame_independent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = nrw::catalog::instantiate("qh7", &Default::default()).unwrap();
        let p = random_orthogonal(&mut rng, inst.model.dim());
        let moved = inst.model.transform(&p).unwrap();
        let rep = moved.verify(1e-9);
        prop_assert!(rep.pass(), "{:?}", rep.failures());
        let mut t = moved.torsion.clone();
        t += &random_form(&mut rng, 7, 3).scale(1e-2);
        let broken = InfinitesimalModel::new(moved.frame.clone(), t, moved.curvature.clone()).unwrap();
        prop_assert!(!broken.verify(1e-9).pass());
    }

    #[test]
    fn sigma_is_half_barwedge_square(seed in any::<u64>(), n in 3usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_form(&mut rng, n, 3);
        let s = sigma_t(&t).unwrap();
        prop_assert!((&s - &t.barwedge(&t).unwrap().scale(0.5)).norm_inf() < 1e-13);
    }
}

#[test]
fn s_contains_stabilizer_action_on_flat_space() {
    for n in 2..7 {
        assert_eq!(compute_s(&flat(n), None).len(), n * (n - 1) / 2);
    }
}
