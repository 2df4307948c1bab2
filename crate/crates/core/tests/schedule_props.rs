//! Randomized checks of the compile pipeline: canonicalize, lay out naively,
//! emit, validate and interpret, against direct simulation of the circuit.

use lsc::canon::canonicalize;
use lsc::circuit::{Basis, Circuit, Statement};
use lsc::icm::Trigger;
use lsc::pauli::Sign;
use lsc::random::random_inverted_icm;
use lsc::schedule::{interpret_prefix, interpret_schedule, naive_schedule, simulate_schedule, validate_schedule, InterpretError};
use lsc::stabilizer::{circuit_state, run_circuit, Outcomes};
use lsc::statevec::{self, StateVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Measures a random subset of qubits in random bases; a measurement may be
/// conditioned on earlier ones.
fn with_measurements(c: &Circuit, rng: &mut ChaCha8Rng, bases: &[Basis]) -> Circuit {
    let mut out = c.clone();
    let mut done: Vec<usize> = Vec::new();
    for q in 0..c.num_qubits {
        if rng.gen_bool(0.5) {
            let basis = bases[rng.gen_range(0..bases.len())];
            let cond: Vec<usize> = done.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
            out.measure_if(q, basis, &cond);
            done.push(q);
        }
    }
    out
}

/// Readout outcomes of the schedule in the circuit's measurement order.
fn branch_of(c: &Circuit, triggers: &std::collections::BTreeMap<Trigger, bool>) -> Vec<bool> {
    c.statements
        .iter()
        .filter_map(|s| match s {
            Statement::Measure(q, _) => Some(triggers[&Trigger::Measurement(*q)]),
            _ => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn naive_schedules_validate_and_prepare_the_circuit_state(seed in any::<u64>()) {
        let c = random_inverted_icm(&mut ChaCha8Rng::seed_from_u64(seed), 10, 25);
        let p = canonicalize(&c).unwrap();
        let s = naive_schedule(&p, &[]).unwrap();
        prop_assert!(validate_schedule(&s).is_empty());
        let i = interpret_schedule(&s, &mut Outcomes::seeded(seed)).unwrap();
        prop_assert!(i.state.same_state(&circuit_state(&c).unwrap()).unwrap());
    }

    #[test]
    fn stabilizer_readouts_agree_with_the_circuit(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = with_measurements(&random_inverted_icm(&mut rng, 8, 16), &mut rng, &[Basis::X, Basis::Z, Basis::Y]);
        let p = canonicalize(&c).unwrap();
        let s = naive_schedule(&p, &[]).unwrap();
        prop_assert!(validate_schedule(&s).is_empty());
        let i = interpret_schedule(&s, &mut Outcomes::seeded(seed)).unwrap();
        let mut forced = Outcomes::Forced {
            queue: branch_of(&c, &i.triggers).into_iter().map(Sign::from_bit).collect(),
            include_deterministic: true,
        };
        let (want, _) = run_circuit(&c, &mut forced).unwrap();
        prop_assert!(i.state.same_state(&want).unwrap());
        let k = s.entangling_steps();
        let prefix = interpret_prefix(&s, k, &mut Outcomes::seeded(seed)).unwrap();
        prop_assert!(prefix.state.same_state(&circuit_state(&c).unwrap()).unwrap());
    }

    #[test]
    fn dense_branches_with_magic_state_readouts_agree_with_the_circuit(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = with_measurements(&random_inverted_icm(&mut rng, 5, 8), &mut rng, &[Basis::X, Basis::Z, Basis::Y, Basis::A]);
        let p = canonicalize(&c).unwrap();
        let s = naive_schedule(&p, &[]).unwrap();
        prop_assume!(s.peak_live_patches() <= 12);
        // Deterministic readouts make some random branches impossible; redraw.
        let mut run = None;
        for _ in 0..64 {
            let branch: Vec<bool> = (0..256).map(|_| rng.gen()).collect();
            match simulate_schedule(&s, &StateVector::scalar(), &branch) {
                Ok(r) => {
                    run = Some(r);
                    break;
                }
                Err(InterpretError::ZeroProbability { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        let run = run.expect("some branch has non-zero probability");
        let want = statevec::run_circuit(&c, &StateVector::scalar(), &branch_of(&c, &run.triggers)).unwrap();
        prop_assert!(want.norm_sqr() > 1e-12);
        prop_assert!(run.state.approx_eq_up_to_phase(&want.normalized().unwrap(), 1e-9));
    }
}
