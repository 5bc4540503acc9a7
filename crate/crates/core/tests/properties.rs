use proptest::prelude::*;

use tilda::{split, AnchorStore, FeatureVector, ModelConfig};

/// (P, k, d) with d divisible by P.
fn arb_config() -> impl Strategy<Value = ModelConfig> {
    (1usize..5, 1usize..5, 1usize..4, any::<u64>())
        .prop_map(|(p, k, m, seed)| ModelConfig::new(p, k, p * m, seed).unwrap())
}

fn arb_stream(dim: usize, classes: usize) -> impl Strategy<Value = Vec<(Vec<f32>, usize)>> {
    proptest::collection::vec(
        (proptest::collection::vec(-100.0f32..100.0, dim), 0..classes),
        1..60,
    )
}

fn config_and_stream() -> impl Strategy<Value = (ModelConfig, Vec<(Vec<f32>, usize)>)> {
    arb_config().prop_flat_map(|c| (Just(c), arb_stream(c.dim, 4)))
}

fn learn_all(config: ModelConfig, stream: &[(Vec<f32>, usize)]) -> AnchorStore {
    let mut s = AnchorStore::new(config).unwrap();
    for (x, c) in stream {
        s.learn_one(&FeatureVector::from(x.clone()), &format!("c{c}"))
            .unwrap();
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counters_are_conserved((config, stream) in config_and_stream()) {
        let s = learn_all(config, &stream);
        for ci in 0..s.num_classes() {
            let label = s.label(ci).to_owned();
            let expected = stream.iter().filter(|(_, c)| format!("c{c}") == label).count() as u64;
            for p in 0..config.subspaces {
                let total: u64 = (0..config.anchors).map(|i| s.counter(ci, p, i)).sum();
                prop_assert_eq!(total, expected);
            }
        }
    }

    #[test]
    fn learning_leaves_other_classes_untouched((config, stream) in config_and_stream()) {
        let mut s = AnchorStore::new(config).unwrap();
        for (x, c) in &stream {
            let before = s.clone();
            let touched = s.learn_one(&FeatureVector::from(x.clone()), &format!("c{c}")).unwrap();
            for other in (0..before.num_classes()).filter(|&o| o != touched) {
                let (a0, n0) = before.class_block(other);
                let (a1, n1) = s.class_block(other);
                prop_assert_eq!(n0, n1);
                prop_assert!(a0.iter().zip(a1).all(|(p, q)| p.to_bits() == q.to_bits()));
            }
        }
    }

    #[test]
    fn anchors_are_means_of_their_members((config, stream) in config_and_stream()) {
        // with k = 1 every subvector of a class goes to the single anchor
        let config = ModelConfig { anchors: 1, ..config };
        let s = learn_all(config, &stream);
        let sub = config.sub_dim();
        for ci in 0..s.num_classes() {
            let label = s.label(ci).to_owned();
            let members: Vec<&Vec<f32>> = stream
                .iter()
                .filter(|(_, c)| format!("c{c}") == label)
                .map(|(x, _)| x)
                .collect();
            for p in 0..config.subspaces {
                let y = s.anchor(ci, p, 0);
                for j in 0..sub {
                    let mean = members.iter().map(|x| x[p * sub + j] as f64).sum::<f64>()
                        / members.len() as f64;
                    prop_assert!((y[j] - mean).abs() <= 1e-6 * mean.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn zero_counter_anchors_are_zero((config, stream) in config_and_stream()) {
        let s = learn_all(config, &stream);
        for ci in 0..s.num_classes() {
            for p in 0..config.subspaces {
                for i in 0..config.anchors {
                    if s.counter(ci, p, i) == 0 {
                        prop_assert!(s.anchor(ci, p, i).iter().all(|&v| v == 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_model((config, stream) in config_and_stream(), probe in proptest::collection::vec(-100.0f32..100.0, 12)) {
        let a = learn_all(config, &stream);
        let b = learn_all(config, &stream);
        prop_assert_eq!(&a, &b);
        let x = FeatureVector::from(probe[..config.dim].to_vec());
        prop_assert_eq!(a.predict_one(&x).unwrap(), a.predict_one(&x).unwrap());
    }

    #[test]
    fn prediction_invariants((config, stream) in config_and_stream(), probe in proptest::collection::vec(-100.0f32..100.0, 12)) {
        let s = learn_all(config, &stream);
        let x = FeatureVector::from(probe[..config.dim].to_vec());
        let p = s.predict_one(&x).unwrap();
        prop_assert_eq!(p.votes.iter().sum::<usize>(), config.subspaces);
        prop_assert_eq!(p.votes[p.class], *p.votes.iter().max().unwrap());
        prop_assert_eq!(p.subspace_decisions.len(), config.subspaces);
        // each subspace decision attains the minimal nearest-anchor distance
        let sub = config.sub_dim();
        for (sp, &winner) in p.subspace_decisions.iter().enumerate() {
            let xp = &x.as_slice()[sp * sub..(sp + 1) * sub];
            let nearest = |c: usize| {
                (0..config.anchors)
                    .filter(|&i| s.counter(c, sp, i) > 0)
                    .map(|i| {
                        s.anchor(c, sp, i)
                            .iter()
                            .zip(xp)
                            .map(|(&y, &v)| (v as f64 - y).powi(2))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            let best = (0..s.num_classes()).map(nearest).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(nearest(winner), best);
        }
        if config.subspaces == 1 {
            prop_assert_eq!(p.class, p.subspace_decisions[0]);
        }
    }

    #[test]
    fn split_concatenates_back(p in 1usize..8, m in 1usize..8, seed in any::<u32>()) {
        let x: Vec<f32> = (0..p * m).map(|i| (i as u32 ^ seed) as f32).collect();
        let parts = split(&x, p).unwrap();
        prop_assert_eq!(parts.len(), p);
        prop_assert!(parts.iter().all(|s| s.len() == m));
        prop_assert_eq!(parts.concat(), x);
    }
}
