use lsc::canon::{canonicalize, push_and_eliminate};
use lsc::circuit::{validate, Form};
use lsc::random::random_inverted_icm;
use lsc::stabilizer::circuit_state;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn canonical_program_prepares_the_same_state(seed in any::<u64>()) {
        let c = random_inverted_icm(&mut ChaCha8Rng::seed_from_u64(seed), 10, 25);
        let p = canonicalize(&c).unwrap();
        prop_assert!(p.invariant_violations().is_empty());
        let want = circuit_state(&c).unwrap();
        let got = circuit_state(&p.to_circuit()).unwrap();
        prop_assert!(got.same_state(&want).unwrap());
    }

    #[test]
    fn push_and_eliminate_preserves_state(seed in any::<u64>()) {
        let c = random_inverted_icm(&mut ChaCha8Rng::seed_from_u64(seed), 8, 20);
        let out = push_and_eliminate(&c).unwrap();
        prop_assert!(validate(&out, Form::InvertedIcm).is_empty());
        prop_assert!(circuit_state(&out).unwrap().same_state(&circuit_state(&c).unwrap()).unwrap());
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let c = random_inverted_icm(&mut ChaCha8Rng::seed_from_u64(seed), 10, 25);
        let p = canonicalize(&c).unwrap();
        let again = canonicalize(&p.to_circuit()).unwrap();
        prop_assert_eq!(again, p);
    }
}
