//! Cost-model invariants on random compiled programs.

use lsc::canon::canonicalize;
use lsc::circuit::{Circuit, InitState};
use lsc::estimate::{compare_table, estimate, Baseline};
use lsc::random::random_inverted_icm;
use lsc::schedule::{emit_schedule, naive_layout, naive_schedule};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_circuit(seed: u64, n: usize, gates: usize) -> Circuit {
    random_inverted_icm(&mut ChaCha8Rng::seed_from_u64(seed), n, gates)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn volume_is_twice_footprint_times_depth(seed in any::<u64>(), n in 1usize..10, gates in 0usize..25) {
        let p = canonicalize(&random_circuit(seed, n, gates)).unwrap();
        let s = naive_schedule(&p, &[]).unwrap();
        let e = estimate(&s);
        prop_assert_eq!(e.volume_coefficient, 2 * e.patches * e.timesteps);
        prop_assert_eq!(e.timesteps, s.num_timesteps() as u64);
        prop_assert_eq!(e.patches, s.occupied_cells().len() as u64);
        prop_assert!(e.patches <= (s.grid.0 * s.grid.1) as u64);
        for d in 1..6u64 {
            prop_assert_eq!(e.volume(d), e.physical_qubits(d) * e.cycles(d));
        }
        for b in Baseline::ALL {
            let cmp = compare_table(&e, b);
            prop_assert_eq!(cmp.ratio_num * cmp.braiding, cmp.ratio_den * cmp.surgery);
        }
    }

    #[test]
    fn spare_grid_rows_cost_nothing(seed in any::<u64>(), n in 1usize..10, extra in 1usize..4) {
        let p = canonicalize(&random_circuit(seed, n, 20)).unwrap();
        let tight = naive_layout(&p);
        let mut roomy = tight.clone();
        roomy.rows += extra;
        let a = estimate(&emit_schedule(&p, &tight, &[]).unwrap());
        let b = estimate(&emit_schedule(&p, &roomy, &[]).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn an_idle_qubit_never_shrinks_the_footprint(seed in any::<u64>(), n in 1usize..9) {
        let c = random_circuit(seed, n, 20);
        let mut padded = Circuit::new(c.num_qubits + 1);
        padded.init(c.num_qubits, InitState::Zero);
        padded.statements.extend(c.statements.iter().cloned());
        let small = estimate(&naive_schedule(&canonicalize(&c).unwrap(), &[]).unwrap());
        let big = estimate(&naive_schedule(&canonicalize(&padded).unwrap(), &[]).unwrap());
        prop_assert!(big.patches > small.patches);
        prop_assert!(big.timesteps >= small.timesteps);
    }
}
