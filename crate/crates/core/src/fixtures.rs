//! Reference circuits and placements shipped with the crate.
//!
//! Distillation circuits use 1-based qubit numbers (`base 1`), matching the
//! labels in their placements.

/// Two `|+⟩` controls entangled through a shared `|0⟩` target.
pub const TWO_CNOT: &str = include_str!("../fixtures/two_cnot.circ");
/// `|Y⟩` distillation with the Steane code.
pub const STEANE: &str = include_str!("../fixtures/steane.circ");
pub const STEANE_PLACEMENT: &str = include_str!("../fixtures/steane.place");
/// Reed-Muller `|A⟩` distillation in multi-target form.
pub const REED_MULLER: &str = include_str!("../fixtures/rm.circ");
/// The same state before canonicalization, ending in a CNOT controlled by a targeted qubit.
pub const REED_MULLER_ORIGINAL: &str = include_str!("../fixtures/rm_original.circ");
pub const REED_MULLER_PLACEMENT: &str = include_str!("../fixtures/rm.place");
/// Bravyi-Haah `|A⟩` distillation (k = 4).
pub const BRAVYI_HAAH: &str = include_str!("../fixtures/bh.circ");
pub const BRAVYI_HAAH_PLACEMENT: &str = include_str!("../fixtures/bh.place");

/// A named circuit with an optional hand-made placement.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub circuit: &'static str,
    pub placement: Option<&'static str>,
}

pub const ALL: [Fixture; 5] = [
    Fixture {
        name: "two-cnot",
        circuit: TWO_CNOT,
        placement: None,
    },
    Fixture {
        name: "steane",
        circuit: STEANE,
        placement: Some(STEANE_PLACEMENT),
    },
    Fixture {
        name: "reed-muller",
        circuit: REED_MULLER,
        placement: Some(REED_MULLER_PLACEMENT),
    },
    Fixture {
        name: "reed-muller-original",
        circuit: REED_MULLER_ORIGINAL,
        placement: None,
    },
    Fixture {
        name: "bravyi-haah",
        circuit: BRAVYI_HAAH,
        placement: Some(BRAVYI_HAAH_PLACEMENT),
    },
];

pub fn by_name(name: &str) -> Option<Fixture> {
    ALL.iter().copied().find(|f| f.name == name)
}

impl Fixture {
    /// Parses and canonicalises the circuit; fixtures are known to be valid.
    pub fn program(&self) -> crate::canon::MultiTargetProgram {
        let c = crate::circuit::parse_circuit(self.circuit).expect("fixture circuit parses");
        crate::canon::canonicalize(&c).expect("fixture circuit canonicalises")
    }

    /// The hand-made placement, or the naive layout when there is none.
    pub fn layout(&self) -> crate::schedule::Placement {
        match self.placement {
            Some(t) => crate::schedule::load_placement(t).expect("fixture placement parses"),
            None => crate::schedule::naive_layout(&self.program()),
        }
    }
}
