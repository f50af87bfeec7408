mod common;

use common::{brute_range, brute_worlds, random_instance, support};
use logical_induction::logic::{plausible_worlds, World};
use logical_induction::trading::{plausible_value_range, Holdings};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn plausible_worlds_match_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 12);
        let atoms: Vec<_> = support(&inst).into_iter().collect();
        let mut got: Vec<World> = plausible_worlds(&inst.fragment, &support(&inst)).unwrap();
        let mut want = brute_worlds(&inst.fragment, &atoms);
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn value_range_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 12);
        let atoms: Vec<_> = support(&inst).into_iter().collect();
        let mut h = Holdings::new();
        h.cash = inst.cash.clone();
        for (s, q) in &inst.terms {
            *h.shares.entry(s.clone()).or_default() += q;
        }
        let want = brute_range(&inst.fragment, &atoms, &inst.cash, &inst.terms);
        match (plausible_value_range(&h, &inst.fragment), want) {
            (Ok(got), Some(want)) => prop_assert_eq!(got, want),
            (Err(_), None) => {}
            (got, want) => prop_assert!(false, "engine {:?} vs oracle {:?}", got, want),
        }
    }
}
