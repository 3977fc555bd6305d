use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qchan::capacity::{holevo_capacity, min_output_entropy, CapacityOptions};
use qchan::channels::{choi_distance, complementary, from_choi, isometric_equivalence, to_choi, Ensemble, KrausChannel};
use qchan::entropy::{holevo, holevo_both, holevo_image, vn_entropy};
use qchan::io::{channel_to_json, parse_channel, RENORMALIZE_TOL};
use qchan::matcore::trace;
use qchan::petz::petz_recovery;
use qchan::random;

fn instance(seed: u64) -> (ChaCha8Rng, KrausChannel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let din = rng.random_range(2..=4);
    let dout = rng.random_range(2..=4);
    let kc = rng.random_range(1..=4);
    let chan = random::channel(&mut rng, din, dout, kc);
    (rng, chan)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn representations_agree(seed in any::<u64>()) {
        let (mut rng, chan) = instance(seed);
        let rho = random::density_matrix(&mut rng, chan.dim_in(), chan.dim_in());
        prop_assert!((trace(chan.apply(&rho).unwrap().matrix()).re - 1.0).abs() <= 1e-10);
        let back = from_choi(&to_choi(&chan)).unwrap();
        prop_assert!(choi_distance(&chan, &back) <= 1e-9);
        let double = complementary(&complementary(&chan).unwrap()).unwrap();
        prop_assert!(isometric_equivalence(&double, &chan).unwrap().residual() <= 1e-8);
    }

    #[test]
    fn holevo_is_monotone_and_forms_agree(seed in any::<u64>()) {
        let (mut rng, chan) = instance(seed);
        let n = rng.random_range(2..=5);
        let rank = rng.random_range(1..=chan.dim_in());
        let ens = random::ensemble(&mut rng, chan.dim_in(), n, rank);
        let (entropic, relative) = holevo_both(&ens.image(&chan).unwrap()).unwrap();
        prop_assert!((entropic.value() - relative).abs() <= 1e-9);
        prop_assert!(holevo_image(&chan, &ens).unwrap().value() <= holevo(&ens).unwrap().value() + 1e-9);
    }

    #[test]
    fn petz_map_fixes_its_reference(seed in any::<u64>()) {
        let (mut rng, chan) = instance(seed);
        let rank = rng.random_range(1..=chan.dim_in());
        let sigma = random::density_matrix(&mut rng, chan.dim_in(), rank);
        let theta = petz_recovery(&chan, &sigma).unwrap();
        let back = theta.apply(&chan.apply(&sigma).unwrap()).unwrap();
        prop_assert!(back.trace_distance(&sigma).unwrap() <= 1e-9);
    }

    #[test]
    fn emitted_channels_reparse_exactly(seed in any::<u64>()) {
        let (_, chan) = instance(seed);
        let text = channel_to_json(&chan);
        let back = parse_channel(&text, "emitted", RENORMALIZE_TOL).unwrap();
        prop_assert_eq!(back.kraus_ops(), chan.kraus_ops());
        prop_assert_eq!(channel_to_json(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // the optimizers never report below a sampled candidate, nor beyond the dimension bound
    #[test]
    fn capacity_optimizers_dominate_samples(seed in any::<u64>()) {
        let (mut rng, chan) = instance(seed);
        let opts = CapacityOptions { restarts: 3, seed, ..CapacityOptions::default() };
        let cbar = holevo_capacity(&chan, &opts).unwrap().bits();
        let hmin = min_output_entropy(&chan, &opts).unwrap().bits();
        prop_assert!(cbar <= (chan.dim_in() as f64).log2() + 1e-9);
        for _ in 0..20 {
            let n = rng.random_range(2..=4);
            let ens: Ensemble = random::pure_ensemble(&mut rng, chan.dim_in(), n);
            prop_assert!(holevo_image(&chan, &ens).unwrap().value() <= cbar + 1e-9);
            let psi = random::pure_state(&mut rng, chan.dim_in()).projector();
            prop_assert!(hmin <= vn_entropy(&chan.apply(&psi).unwrap()).value() + 1e-9);
        }
    }
}
