use std::collections::HashSet;

use proptest::prelude::*;

use stochnlw::montecarlo::{sample_norms, tail_from_samples, NormFunctional};
use stochnlw::randomization::{in_index_set, randomize_with_seed, sample_noise, DistributionKind, SeedSpec};
use stochnlw::spectral::{GridSpec, LinearFlow, WavePair};

fn dist_strategy() -> impl Strategy<Value = DistributionKind> {
    prop_oneof![Just(DistributionKind::Gaussian), Just(DistributionKind::Bernoulli), Just(DistributionKind::Uniform)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn randomized_fields_stay_real(seed in any::<u64>(), sample in any::<u64>(), dim in 3usize..=5, dist in dist_strategy()) {
        let grid = GridSpec::base(dim, 8).unwrap();
        let data = WavePair::power_law(grid, 8.0, 1.0, 1.0);
        let out = randomize_with_seed(&data, &SeedSpec::new(seed).with_sample(sample), dist);
        prop_assert_eq!(out.position.max_asymmetry(), 0.0);
        prop_assert_eq!(out.velocity.max_asymmetry(), 0.0);
        prop_assert!(out.position.is_real() && out.velocity.is_real());
        let noise = sample_noise(&SeedSpec::new(seed).with_sample(sample), &grid, dist);
        prop_assert_eq!(noise.max_asymmetry(), 0.0);
    }

    #[test]
    fn noise_is_a_function_of_the_seed(seed in any::<u64>(), sample in any::<u64>(), dist in dist_strategy()) {
        let grid = GridSpec::base(3, 8).unwrap();
        let data = WavePair::power_law(grid, 8.0, 1.0, 1.0);
        let spec = SeedSpec::new(seed).with_sample(sample);
        let a = randomize_with_seed(&data, &spec, dist);
        let b = randomize_with_seed(&data, &spec, dist);
        prop_assert_eq!(a.position.coefficients(), b.position.coefficients());
        prop_assert_eq!(a.velocity.coefficients(), b.velocity.coefficients());
        let c = randomize_with_seed(&data, &spec.with_sample(sample.wrapping_add(1)), dist);
        prop_assert_ne!(a.position.coefficients(), c.position.coefficients());
    }

    #[test]
    fn index_set_splits_the_punctured_lattice(n in proptest::collection::vec(-20i64..=20, 1..=5)) {
        let neg: Vec<i64> = n.iter().map(|c| -c).collect();
        if n.iter().all(|&c| c == 0) {
            prop_assert!(!in_index_set(&n));
        } else {
            prop_assert!(in_index_set(&n) ^ in_index_set(&neg));
        }
    }
}

#[test]
fn sample_keys_are_distinct() {
    for base in [0u64, 7, u64::MAX] {
        let spec = SeedSpec::new(base);
        let keys: HashSet<u64> = (0..100_000u64).map(|i| spec.with_sample(i).key()).collect();
        assert_eq!(keys.len(), 100_000);
    }
}

#[test]
fn doubling_the_data_doubles_every_sample() {
    let grid = GridSpec::base(3, 8).unwrap();
    let data = WavePair::power_law(grid, 4.0, 1.5, 1.0);
    let double = data.scaled(2.0);
    for (q, r) in [(3.0, 6.0), (f64::INFINITY, 2.0)] {
        let f = NormFunctional::new(LinearFlow::SPer, q, r, 0.0, 1.0, 16).unwrap();
        for dist in DistributionKind::ALL {
            let a = sample_norms(&f, &data, dist, 1000, 3, 1).unwrap();
            let b = sample_norms(&f, &double, dist, 1000, 3, 1).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| 2.0 * x == *y));
            let (ta, tb) = (tail_from_samples(&a).unwrap(), tail_from_samples(&b).unwrap());
            assert_eq!(ta.p_hat, tb.p_hat);
            assert!(ta.lambda.iter().zip(&tb.lambda).all(|(x, y)| 2.0 * x == *y));
        }
    }
}

#[test]
fn worker_count_does_not_change_samples() {
    let grid = GridSpec::base(3, 8).unwrap();
    let data = WavePair::power_law(grid, 4.0, 1.5, 1.0);
    let f = NormFunctional::new(LinearFlow::STilde, f64::INFINITY, 2.0, 0.0, 1.0, 8).unwrap();
    let one = sample_norms(&f, &data, DistributionKind::Uniform, 300, 11, 1).unwrap();
    let four = sample_norms(&f, &data, DistributionKind::Uniform, 300, 11, 4).unwrap();
    assert_eq!(one, four);
}
