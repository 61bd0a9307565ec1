use kcd_core::bench::{random_dag, sample_discrete, sample_linear, BayesNet, LinearScm};
use kcd_core::citest::{CiTester, FisherZ, GSquare};
use kcd_core::{Dag, VertexSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn g_square_is_non_negative_and_symmetric(seed in any::<u64>(), rows in 5usize..200, states in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dag(5, 6, &mut rng).unwrap();
        let data = sample_discrete(&BayesNet::random(d, states, &mut rng), rows, &mut rng);
        let t = GSquare::new(&data, 0.05, 0.0).unwrap();
        for cond in [VertexSet::EMPTY, VertexSet::singleton(2), VertexSet::singleton(2).with(3)] {
            let (g, dof) = t.statistic(0, 1, cond);
            prop_assert!(g >= -1e-9, "G2 = {g}");
            prop_assert_eq!(t.statistic(1, 0, cond).1, dof);
            prop_assert!((t.statistic(1, 0, cond).0 - g).abs() < 1e-9);
            let v = t.test(0, 1, cond).unwrap();
            prop_assert!((0.0..=1.0).contains(&v.p_value));
        }
    }
}

/// Under a true conditional independence the rejection rate over many
/// resamples stays within three standard errors of alpha.
#[test]
fn fisher_z_is_calibrated() {
    let d = Dag::from_named_edges(&["x", "z", "y", "w"], &[("x", "z"), ("z", "y"), ("w", "y")]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let scm = LinearScm::random(d, 0.5, 1.5, &mut rng);
    let (alpha, runs) = (0.05, 1000);
    let queries = [(0, 2, VertexSet::singleton(1)), (0, 3, VertexSet::EMPTY), (1, 3, VertexSet::singleton(0))];
    for (a, b, cond) in queries {
        let rejected = (0..runs)
            .filter(|_| {
                let data = sample_linear(&scm, 200, &mut rng);
                !FisherZ::new(&data, alpha).unwrap().independent(a, b, cond).unwrap()
            })
            .count();
        let rate = rejected as f64 / runs as f64;
        let se = (alpha * (1.0 - alpha) / runs as f64).sqrt();
        assert!((rate - alpha).abs() <= 3.0 * se, "({a},{b}|{cond:?}) rejection rate {rate}");
    }
}
