use eex_core::inference::{rank_representation, rank_types, type_representations, mention_representation};
use eex_core::linalg::{cosine, Matrix, Tensor3};
use eex_core::neural::{cnn_forward, compose_mention_tuple, compose_type_tuple, ModelParams};
use eex_core::testing::{random_vector, MicroModel};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tuples(rng: &mut ChaCha8Rng, n: usize, width: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| random_vector(rng, width)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pooling_ignores_order_and_padding(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=6);
        let mut params = ModelParams::init(d, rng.gen_range(1..=8), 2, 1.0, rng.gen()).unwrap();
        for b in params.conv_b.iter_mut() {
            *b = rng.gen_range(-1.0..1.0);
        }
        let real = rng.gen_range(1..=6);
        let pad = rng.gen_range(0..=4);
        let mut tuples = random_tuples(&mut rng, real, 2 * d);
        tuples.extend(std::iter::repeat_n(vec![0.0; 2 * d], pad));
        let base = cnn_forward(&tuples, real, &params).unwrap();

        let mut shuffled = tuples.clone();
        shuffled[..real].shuffle(&mut rng);
        let permuted = cnn_forward(&shuffled, real, &params).unwrap();
        prop_assert_eq!(bits(&permuted), bits(&base));

        let mut doubled = tuples.clone();
        doubled.extend(std::iter::repeat_n(vec![0.0; 2 * d], pad.max(1)));
        prop_assert_eq!(bits(&cnn_forward(&doubled, real, &params).unwrap()), bits(&base));
    }

    // Pre-activations stay well below the point where f64 tanh rounds to 1.
    #[test]
    fn compositions_stay_in_open_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=5);
        let v1 = random_vector(&mut rng, d);
        let v2 = random_vector(&mut rng, d);
        let m = Matrix::from_vec(2 * d, 2 * d, random_vector(&mut rng, 4 * d * d));
        let u = Tensor3::from_vec(2 * d, random_vector(&mut rng, 8 * d * d * d));
        for x in compose_mention_tuple(&v1, &v2, &m).unwrap().into_iter().chain(compose_type_tuple(&v1, &v2, &u).unwrap()) {
            prop_assert!(x > -1.0 && x < 1.0, "{}", x);
        }
    }

    #[test]
    fn tensor_composition_ignores_antisymmetric_part(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=5);
        let vy = random_vector(&mut rng, d);
        let vr = random_vector(&mut rng, d);
        let u = Tensor3::from_vec(2 * d, random_vector(&mut rng, 8 * d * d * d));
        let a = compose_type_tuple(&vy, &vr, &u).unwrap();
        let b = compose_type_tuple(&vy, &vr, &u.symmetrized()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
        }
    }

    #[test]
    fn cosine_is_bounded_and_scale_free(seed in any::<u64>(), alpha in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=10);
        let u = random_vector(&mut rng, n);
        let v = random_vector(&mut rng, n);
        let c = cosine(&u, &v);
        prop_assert!((-1.0..=1.0).contains(&c));
        let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
        prop_assert!((cosine(&scaled, &v) - c).abs() < 1e-12);
    }

    #[test]
    fn scaling_the_mention_keeps_the_ranking(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = MicroModel::random(&mut rng, 3, 4);
        let mention = model.mention(&mut rng);
        let rep = mention_representation(&mention, &model.table, &model.params).unwrap();
        let types = type_representations(&model.ontology, None, &model.table, &model.params, 5).unwrap();
        let base = rank_representation(&rep, &types);
        prop_assert_eq!(&base, &rank_types(&mention, &model.params, &model.table, &model.ontology, 5).unwrap());
        for alpha in [0.1, 3.0, 100.0] {
            let scaled: Vec<f64> = rep.iter().map(|x| alpha * x).collect();
            let ranked = rank_representation(&scaled, &types);
            prop_assert_eq!(ranked.labels().collect::<Vec<_>>(), base.labels().collect::<Vec<_>>());
        }
    }
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn no_real_tuples_pool_to_zero() {
    let params = ModelParams::init(2, 3, 2, 1.0, 0).unwrap();
    assert_eq!(cnn_forward(&[vec![0.0; 4]], 0, &params).unwrap(), vec![0.0; 3]);
    assert!(cnn_forward(&[vec![0.0; 4]], 2, &params).is_err());
    assert!(cnn_forward(&[vec![0.0; 3]], 1, &params).is_err());
}

#[test]
fn identity_relation_is_plain_concatenation() {
    let out = compose_mention_tuple(&[0.5, -0.25], &[1.0, 0.0], &Matrix::identity(4)).unwrap();
    let expected: Vec<f64> = [0.5f64, -0.25, 1.0, 0.0].iter().map(|x| x.tanh()).collect();
    for (a, b) in out.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-15);
    }
}
