//! Seeded generators of random circuits for property tests and fuzzing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{Basis, Circuit, InitState};

/// Random inverted-ICM circuit: `2..=max_qubits` qubits initialized to `|0⟩` or
/// `|+⟩`, up to `max_cnots` single-target CNOTs, and no measurements.
pub fn random_inverted_icm<R: Rng>(rng: &mut R, max_qubits: usize, max_cnots: usize) -> Circuit {
    let n = rng.gen_range(2..=max_qubits.max(2));
    let mut c = Circuit::new(n);
    for q in 0..n {
        let s = if rng.gen() { InitState::Plus } else { InitState::Zero };
        c.init(q, s);
    }
    let g = rng.gen_range(0..=max_cnots);
    for _ in 0..g {
        let ctrl = rng.gen_range(0..n);
        let mut t = rng.gen_range(0..n - 1);
        if t >= ctrl {
            t += 1;
        }
        c.cnot(ctrl, &[t]);
    }
    c
}

/// Random ICM circuit built from teleportation gadgets.
///
/// A random CNOT network over `data` qubits (declared inputs, or `|0⟩`/`|+⟩` when
/// `open` is false) is followed by `gadgets` gadgets, each consuming one data
/// qubit and one fresh `|Y⟩` or `|A⟩` qubit; the kind of gadget is random. Data
/// qubits not used by a gadget stay as outputs. Returns the circuit and, for each
/// gadget, `(rotated, partner, state, is_control_gadget)`.
#[allow(clippy::type_complexity)]
pub fn random_icm_gadgets<R: Rng>(
    rng: &mut R,
    data: usize,
    gadgets: usize,
    cnots: usize,
    open: bool,
) -> (Circuit, Vec<(usize, usize, InitState, bool)>) {
    assert!(gadgets <= data, "each gadget consumes one data qubit");
    let n = data + gadgets;
    let mut c = Circuit::new(n);
    let mut specs = Vec::new();
    for q in 0..data {
        if open {
            c.input(q);
        } else {
            c.init(q, if rng.gen() { InitState::Plus } else { InitState::Zero });
        }
    }
    let mut partners: Vec<usize> = (0..data).collect();
    partners.shuffle(rng);
    partners.truncate(gadgets);
    for (k, &d) in partners.iter().enumerate() {
        let r = data + k;
        let state = if rng.gen() { InitState::Y } else { InitState::A };
        c.init(r, state);
        specs.push((r, d, state, rng.gen::<bool>()));
    }
    if data >= 2 {
        for _ in 0..cnots {
            let ctrl = rng.gen_range(0..data);
            let mut t = rng.gen_range(0..data - 1);
            if t >= ctrl {
                t += 1;
            }
            c.cnot(ctrl, &[t]);
        }
    }
    for &(r, d, _, control) in &specs {
        if control {
            c.cnot(r, &[d]);
        } else {
            c.cnot(d, &[r]);
        }
    }
    for &(_, d, _, control) in &specs {
        c.measure(d, if control { Basis::Z } else { Basis::X });
    }
    (c, specs)
}
