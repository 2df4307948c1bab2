//! Replaying schedules on the stabilizer engine and on dense state vectors.
//!
//! Both replays share one executor that tracks which patch sits in which column
//! of the backend state. Splits insert the new part next to the split patch;
//! a merge joins `merged[1..]` into `merged[0]` one by one, the joined patch's
//! column being the one removed. Bridge cells are `|0⟩` patches joined with a
//! rough merge, which is the identity, so they are not simulated. Moves,
//! shrinks and grows do not change the logical state.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::circuit::InitState;
use crate::icm::{Action, Trigger};
use crate::pauli::{Letter, Sign};
use crate::stabilizer::{EngineError, Outcomes, StabilizerMatrix};
use crate::statevec::{init_amplitudes, phase_state, DenseError, StateVector};

use super::{MagicState, PatchId, ReadoutBasis, SurgeryOp, SurgerySchedule};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterpretError {
    #[error("step {step}: {source}")]
    Engine { step: usize, source: EngineError },
    #[error("step {step}: {source}")]
    Dense { step: usize, source: DenseError },
    #[error("step {step}: patch {patch} is not live")]
    UnknownPatch { step: usize, patch: PatchId },
    #[error("step {step}: correction rule {rule} does not exist")]
    UnknownRule { step: usize, rule: usize },
    #[error("step {step}: correction targets q{qubit}, which has {live} live patches")]
    NoSinglePatch { step: usize, qubit: usize, live: usize },
    #[error("step {step}: the requested branch has probability 0")]
    ZeroProbability { step: usize },
    #[error("branch has {got} outcomes but the schedule needs more")]
    BranchExhausted { got: usize },
    #[error("schedule has {expected} input patches, state has {got} qubits")]
    InputWidth { expected: usize, got: usize },
}

/// Result of replaying a schedule on the stabilizer engine.
#[derive(Debug, Clone)]
pub struct Interpretation {
    /// State of the live patches, ordered by circuit qubit (then patch id);
    /// patches that encode no circuit qubit come last.
    pub state: StabilizerMatrix,
    pub patches: Vec<PatchId>,
    pub qubits: Vec<Option<usize>>,
    /// Every classical outcome produced (`true` ↔ eigenvalue −1).
    pub triggers: BTreeMap<Trigger, bool>,
}

/// Result of replaying a schedule on a dense state vector.
#[derive(Debug, Clone)]
pub struct DenseRun {
    /// Normalized state of the live patches, ordered as in [`Interpretation`].
    pub state: StateVector,
    pub patches: Vec<PatchId>,
    pub qubits: Vec<Option<usize>>,
    pub triggers: BTreeMap<Trigger, bool>,
}

/// Fresh single-patch states.
#[derive(Debug, Clone, Copy)]
enum Fresh {
    Init(InitState),
    Magic(MagicState),
}

trait Backend {
    type Error;
    fn wrap(step: usize, e: Self::Error) -> InterpretError;
    fn push(&mut self, state: Fresh) -> Result<(), Self::Error>;
    /// Splits column `pos`, inserting the new part at `pos + 1`.
    fn split(&mut self, pos: usize, smooth: bool) -> Result<(), Self::Error>;
    /// Joins column `drop` into column `keep`; returns the outcome bit, or
    /// `None` if the outcome has probability 0.
    fn merge(&mut self, drop: usize, keep: usize, smooth: bool) -> Result<Option<bool>, InterpretError>;
    /// Destructive readout; same return convention as `merge`.
    fn measure(&mut self, pos: usize, basis: ReadoutBasis) -> Result<Option<bool>, InterpretError>;
    fn correct(&mut self, pos: usize, action: Action) -> Result<(), Self::Error>;
}

struct Executor<'a> {
    s: &'a SurgerySchedule,
    cols: Vec<PatchId>,
    triggers: BTreeMap<Trigger, bool>,
    /// Placeholder ids of input columns not yet claimed by an `input` op.
    pending_inputs: Vec<PatchId>,
}

impl<'a> Executor<'a> {
    fn new(s: &'a SurgerySchedule, inputs: usize) -> Self {
        let pending: Vec<PatchId> = (0..inputs).map(|k| usize::MAX - k).collect();
        Executor {
            s,
            cols: pending.clone(),
            triggers: BTreeMap::new(),
            pending_inputs: pending,
        }
    }

    fn pos(&self, step: usize, patch: PatchId) -> Result<usize, InterpretError> {
        self.cols
            .iter()
            .position(|&p| p == patch)
            .ok_or(InterpretError::UnknownPatch { step, patch })
    }

    fn fires(&self, triggers: &[Trigger]) -> bool {
        triggers
            .iter()
            .fold(false, |acc, t| acc ^ self.triggers.get(t).copied().unwrap_or(false))
    }

    fn run<B: Backend>(&mut self, b: &mut B, steps: usize) -> Result<(), InterpretError> {
        for (step, ops) in self.s.steps.iter().take(steps).enumerate() {
            for sop in ops {
                if !sop.condition.is_empty() && !self.fires(&sop.condition) {
                    continue;
                }
                self.apply(b, step, &sop.op)?;
            }
        }
        Ok(())
    }

    fn apply<B: Backend>(&mut self, b: &mut B, step: usize, op: &SurgeryOp) -> Result<(), InterpretError> {
        let wrap = |e| B::wrap(step, e);
        match op {
            SurgeryOp::InitPlus { patch, .. } | SurgeryOp::InitZero { patch, .. } | SurgeryOp::Inject { patch, .. } => {
                let fresh = match op {
                    SurgeryOp::InitPlus { .. } => Fresh::Init(InitState::Plus),
                    SurgeryOp::InitZero { .. } => Fresh::Init(InitState::Zero),
                    SurgeryOp::Inject { state, .. } => Fresh::Magic(*state),
                    _ => unreachable!(),
                };
                b.push(fresh).map_err(wrap)?;
                self.cols.push(*patch);
            }
            SurgeryOp::Input { patch, .. } => {
                if self.pending_inputs.is_empty() {
                    return Err(InterpretError::InputWidth {
                        expected: self.count_inputs(),
                        got: self.cols.len(),
                    });
                }
                let placeholder = self.pending_inputs.remove(0);
                let pos = self.pos(step, placeholder)?;
                self.cols[pos] = *patch;
            }
            SurgeryOp::SmoothSplit { patch, parts, .. } | SurgeryOp::RoughSplit { patch, parts, .. } => {
                let smooth = matches!(op, SurgeryOp::SmoothSplit { .. });
                let pos = self.pos(step, *patch)?;
                let Some((first, rest)) = parts.split_first() else {
                    // A split into nothing discards the patch; not produced by the emitter.
                    return Err(InterpretError::UnknownPatch { step, patch: *patch });
                };
                self.cols[pos] = first.patch;
                for part in rest {
                    b.split(pos, smooth).map_err(wrap)?;
                    self.cols.insert(pos + 1, part.patch);
                }
            }
            SurgeryOp::RoughMerge {
                patch, merged, outcomes, ..
            }
            | SurgeryOp::SmoothMerge {
                patch, merged, outcomes, ..
            } => {
                let smooth = matches!(op, SurgeryOp::SmoothMerge { .. });
                let Some((&kept, joined)) = merged.split_first() else {
                    return Err(InterpretError::UnknownPatch { step, patch: *patch });
                };
                for (i, &d) in joined.iter().enumerate() {
                    let (dp, kp) = (self.pos(step, d)?, self.pos(step, kept)?);
                    let bit = b
                        .merge(dp, kp, smooth)
                        .map_err(|e| e.at(step))?
                        .ok_or(InterpretError::ZeroProbability { step })?;
                    self.cols.remove(dp);
                    if let Some(&t) = outcomes.get(i) {
                        self.triggers.insert(t, bit);
                    }
                }
                let kp = self.pos(step, kept)?;
                self.cols[kp] = *patch;
            }
            SurgeryOp::Move { patch, .. } | SurgeryOp::Shrink { patch, .. } | SurgeryOp::Grow { patch, .. } => {
                self.pos(step, *patch)?;
            }
            SurgeryOp::Measure { patch, basis, .. } => {
                let pos = self.pos(step, *patch)?;
                let bit = b
                    .measure(pos, *basis)
                    .map_err(|e| e.at(step))?
                    .ok_or(InterpretError::ZeroProbability { step })?;
                self.cols.remove(pos);
                if let Some(&q) = self.s.qubit_map.get(patch) {
                    self.triggers.insert(Trigger::Measurement(q), bit);
                }
            }
            SurgeryOp::ConditionalCorrect { rule } => {
                let r = self
                    .s
                    .corrections
                    .get(*rule)
                    .ok_or(InterpretError::UnknownRule { step, rule: *rule })?;
                if r.fires(|t| self.triggers.get(&t).copied().unwrap_or(false)) {
                    let live: Vec<usize> = (0..self.cols.len())
                        .filter(|&i| self.s.qubit_map.get(&self.cols[i]) == Some(&r.qubit))
                        .collect();
                    if live.len() != 1 {
                        return Err(InterpretError::NoSinglePatch {
                            step,
                            qubit: r.qubit + self.s.base,
                            live: live.len(),
                        });
                    }
                    b.correct(live[0], r.action).map_err(wrap)?;
                }
            }
        }
        Ok(())
    }

    fn count_inputs(&self) -> usize {
        self.s
            .steps
            .iter()
            .flatten()
            .filter(|o| matches!(o.op, SurgeryOp::Input { .. }))
            .count()
    }

    /// Column order sorting live patches by circuit qubit, then patch id.
    fn output_order(&self) -> (Vec<usize>, Vec<PatchId>, Vec<Option<usize>>) {
        let key = |p: PatchId| (self.s.qubit_map.get(&p).copied().unwrap_or(usize::MAX), p);
        let mut order: Vec<usize> = (0..self.cols.len()).collect();
        order.sort_by_key(|&i| key(self.cols[i]));
        let patches: Vec<PatchId> = order.iter().map(|&i| self.cols[i]).collect();
        let qubits = patches.iter().map(|p| self.s.qubit_map.get(p).copied()).collect();
        (order, patches, qubits)
    }
}

struct Tableau<'o> {
    state: StabilizerMatrix,
    outcomes: &'o mut Outcomes,
}

impl Backend for Tableau<'_> {
    type Error = EngineError;

    fn wrap(step: usize, source: EngineError) -> InterpretError {
        InterpretError::Engine { step, source }
    }

    fn push(&mut self, state: Fresh) -> Result<(), EngineError> {
        let letter = match state {
            Fresh::Init(InitState::Plus) => Letter::X,
            Fresh::Init(InitState::Zero) => Letter::Z,
            Fresh::Init(InitState::Y) | Fresh::Magic(MagicState::Y) => Letter::Y,
            Fresh::Init(InitState::A) | Fresh::Magic(MagicState::A) => {
                return Err(EngineError::NonStabilizer("|A⟩ state injected".into()));
            }
        };
        self.state.push_qubit(letter);
        Ok(())
    }

    fn split(&mut self, pos: usize, smooth: bool) -> Result<(), EngineError> {
        if smooth {
            self.state.smooth_split(pos)
        } else {
            self.state.rough_split(pos)
        }
    }

    fn merge(&mut self, drop: usize, keep: usize, smooth: bool) -> Result<Option<bool>, InterpretError> {
        let out = if smooth {
            self.state.smooth_merge(drop, keep, self.outcomes)
        } else {
            self.state.rough_merge(drop, keep, self.outcomes)
        };
        out.map(|o| Some(o.eigenvalue.is_minus())).map_err(impossible_or)
    }

    fn measure(&mut self, pos: usize, basis: ReadoutBasis) -> Result<Option<bool>, InterpretError> {
        let letter = match basis {
            ReadoutBasis::X => Letter::X,
            ReadoutBasis::Z => Letter::Z,
        };
        self.state
            .measure_logical(pos, letter, true, self.outcomes)
            .map(|o| Some(o.eigenvalue.is_minus()))
            .map_err(impossible_or)
    }

    fn correct(&mut self, pos: usize, action: Action) -> Result<(), EngineError> {
        match action {
            Action::TrackX => self.state.apply_single_pauli(pos, Letter::X),
            Action::TrackZ => self.state.apply_single_pauli(pos, Letter::Z),
            Action::ApplyP => self.state.apply_p(pos),
        }
    }
}

/// Backend errors are raised without a step; [`InterpretError::at`] fills it in.
const NO_STEP: usize = usize::MAX;

fn impossible_or(e: EngineError) -> InterpretError {
    InterpretError::Engine { step: NO_STEP, source: e }
}

impl InterpretError {
    fn at(self, step: usize) -> Self {
        match self {
            InterpretError::Engine { step: NO_STEP, source } => InterpretError::Engine { step, source },
            InterpretError::Dense { step: NO_STEP, source } => InterpretError::Dense { step, source },
            other => other,
        }
    }
}

struct Dense<'b> {
    state: StateVector,
    branch: std::slice::Iter<'b, bool>,
    len: usize,
}

impl Dense<'_> {
    fn next_bit(&mut self) -> Result<bool, InterpretError> {
        self.branch.next().copied().ok_or(InterpretError::BranchExhausted { got: self.len })
    }

    /// Renormalizes; `None` if the branch has vanished.
    fn renormalize(&mut self, before: f64, bit: bool) -> Result<Option<bool>, InterpretError> {
        let after = self.state.norm_sqr();
        if after <= 1e-20 * before.max(f64::MIN_POSITIVE) {
            return Ok(None);
        }
        self.state = self
            .state
            .normalized()
            .map_err(|e| InterpretError::Dense { step: NO_STEP, source: e })?;
        Ok(Some(bit))
    }
}

impl Backend for Dense<'_> {
    type Error = DenseError;

    fn wrap(step: usize, source: DenseError) -> InterpretError {
        InterpretError::Dense { step, source }
    }

    fn push(&mut self, state: Fresh) -> Result<(), DenseError> {
        let ket = match state {
            Fresh::Init(s) => init_amplitudes(s),
            Fresh::Magic(MagicState::Y) => phase_state(std::f64::consts::FRAC_PI_2),
            Fresh::Magic(MagicState::A) => phase_state(std::f64::consts::FRAC_PI_4),
        };
        self.state.push_qubit(ket)
    }

    fn split(&mut self, pos: usize, smooth: bool) -> Result<(), DenseError> {
        if smooth {
            self.state.smooth_split(pos)
        } else {
            self.state.rough_split(pos)
        }
    }

    fn merge(&mut self, drop: usize, keep: usize, smooth: bool) -> Result<Option<bool>, InterpretError> {
        let bit = self.next_bit()?;
        let before = self.state.norm_sqr();
        let sign = Sign::from_bit(bit);
        let res = if smooth {
            self.state.smooth_merge(drop, keep, sign)
        } else {
            self.state.rough_merge(drop, keep, sign)
        };
        res.map_err(|e| InterpretError::Dense { step: NO_STEP, source: e })?;
        self.renormalize(before, bit)
    }

    fn measure(&mut self, pos: usize, basis: ReadoutBasis) -> Result<Option<bool>, InterpretError> {
        let bit = self.next_bit()?;
        let before = self.state.norm_sqr();
        let b = match basis {
            ReadoutBasis::X => crate::circuit::Basis::X,
            ReadoutBasis::Z => crate::circuit::Basis::Z,
        };
        self.state
            .measure(pos, b, bit)
            .map_err(|e| InterpretError::Dense { step: NO_STEP, source: e })?;
        self.renormalize(before, bit)
    }

    fn correct(&mut self, pos: usize, action: Action) -> Result<(), DenseError> {
        match action {
            Action::TrackX => self.state.apply_x(pos),
            Action::TrackZ => self.state.apply_z(pos),
            Action::ApplyP => self.state.apply_phase(pos, Complex64::i()),
        }
    }
}

/// Replays the whole schedule on the stabilizer engine.
pub fn interpret_schedule(s: &SurgerySchedule, outcomes: &mut Outcomes) -> Result<Interpretation, InterpretError> {
    interpret_prefix(s, s.steps.len(), outcomes)
}

/// Replays the first `steps` timesteps on the stabilizer engine.
pub fn interpret_prefix(s: &SurgerySchedule, steps: usize, outcomes: &mut Outcomes) -> Result<Interpretation, InterpretError> {
    let mut exec = Executor::new(s, 0);
    let mut backend = Tableau {
        state: StabilizerMatrix::empty(),
        outcomes,
    };
    exec.run(&mut backend, steps)?;
    let (order, patches, qubits) = exec.output_order();
    Ok(Interpretation {
        state: backend.state.permute_qubits(&order),
        patches,
        qubits,
        triggers: exec.triggers,
    })
}

/// Replays the schedule on a dense state vector along one outcome branch.
///
/// `inputs` is the joint state of the schedule's `input` patches, in the order
/// the inputs appear. `branch` supplies one outcome bit (`true` ↔ −1) for every
/// merge join and readout, in execution order; conditional operations that do
/// not fire consume nothing.
pub fn simulate_schedule(s: &SurgerySchedule, inputs: &StateVector, branch: &[bool]) -> Result<DenseRun, InterpretError> {
    let mut exec = Executor::new(s, inputs.num_qubits());
    let expected = exec.count_inputs();
    if expected != inputs.num_qubits() {
        return Err(InterpretError::InputWidth {
            expected,
            got: inputs.num_qubits(),
        });
    }
    let mut backend = Dense {
        state: inputs.clone(),
        branch: branch.iter(),
        len: branch.len(),
    };
    exec.run(&mut backend, s.steps.len())?;
    let (order, patches, qubits) = exec.output_order();
    Ok(DenseRun {
        state: backend.state.permuted(&order),
        patches,
        qubits,
        triggers: exec.triggers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_circuit, Statement};
    use crate::fixtures;
    use crate::pauli::Sign;
    use crate::schedule::{emit_schedule, naive_schedule, ReadoutBasis, SurgeryOp};
    use crate::stabilizer::{circuit_state, run_circuit};

    fn steane_schedule() -> SurgerySchedule {
        let f = fixtures::by_name("steane").unwrap();
        emit_schedule(&f.program(), &f.layout(), &[]).unwrap()
    }

    #[test]
    fn empty_schedule_gives_the_empty_state() {
        let i = interpret_schedule(&SurgerySchedule::empty(1, 1), &mut Outcomes::AllPlus).unwrap();
        assert_eq!(i.state.num_qubits(), 0);
        assert!(i.patches.is_empty() && i.triggers.is_empty());
    }

    #[test]
    fn two_cnot_prepares_the_three_qubit_state() {
        let s = naive_schedule(&fixtures::by_name("two-cnot").unwrap().program(), &[]).unwrap();
        for seed in 0..8 {
            let i = interpret_schedule(&s, &mut Outcomes::seeded(seed)).unwrap();
            assert_eq!(i.qubits, vec![Some(0), Some(1), Some(2)]);
            let want = StabilizerMatrix::parse(&["ZZZ", "XXI", "IXX"]).unwrap();
            assert!(i.state.same_state(&want).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn steane_entangled_state_matches_the_hand_derived_matrix() {
        let s = steane_schedule();
        let i = interpret_prefix(&s, s.entangling_steps(), &mut Outcomes::seeded(3)).unwrap();
        assert_eq!(i.qubits, (0..8).map(Some).collect::<Vec<_>>());
        // Columns are qubits 1..8.
        let x = ["IIXXXXII", "XIIXIXXI", "IXIIXXXI", "IIIXXIXX"];
        let z = ["ZZZIIZII", "ZZIIIIZZ", "ZIZZIIIZ", "IZZIZIIZ"];
        let rows: Vec<&str> = x.iter().chain(&z).copied().collect();
        let want = StabilizerMatrix::parse(&rows).unwrap();
        assert!(i.state.same_state(&want).unwrap());
    }

    #[test]
    fn steane_matrix_with_x_row_on_2578_is_not_a_state() {
        // The row X2 X5 X7 X8 anticommutes with Z1 Z2 Z3 Z6.
        let rows = [
            "IIXXXXII", "IXIIXIXX", "IXIIXXXI", "IIIXXIXX", "ZZZIIZII", "ZZIIIIZZ", "ZIZZIIIZ", "IZZIZIIZ",
        ];
        assert!(StabilizerMatrix::parse(&rows).is_err());
    }

    /// Outcome bits of the schedule's readouts, in the order the circuit measures.
    fn readout_queue(c: &crate::circuit::Circuit, i: &Interpretation) -> Vec<Sign> {
        c.statements
            .iter()
            .filter_map(|st| match st {
                Statement::Measure(q, _) => Some(Sign::from_bit(i.triggers[&Trigger::Measurement(*q)])),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn full_steane_schedule_agrees_with_the_circuit() {
        let s = steane_schedule();
        let c = parse_circuit(fixtures::STEANE).unwrap();
        for seed in 0..20 {
            let i = interpret_schedule(&s, &mut Outcomes::seeded(seed)).unwrap();
            assert_eq!(i.qubits, vec![Some(7)]);
            let mut forced = Outcomes::Forced {
                queue: readout_queue(&c, &i).into(),
                include_deterministic: true,
            };
            let (want, _) = run_circuit(&c, &mut forced).unwrap();
            assert!(i.state.same_state(&want).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn prefixes_of_every_fixture_match_the_circuit_state() {
        for f in fixtures::ALL {
            let p = f.program();
            let s = emit_schedule(&p, &f.layout(), &[]).unwrap();
            let i = interpret_prefix(&s, s.entangling_steps(), &mut Outcomes::seeded(11)).unwrap();
            assert!(i.state.same_state(&circuit_state(&p.to_circuit()).unwrap()).unwrap(), "{}", f.name);
        }
    }

    #[test]
    fn tableau_rejects_a_state_injection() {
        let s = naive_schedule(&fixtures::by_name("reed-muller").unwrap().program(), &[]).unwrap();
        let err = interpret_schedule(&s, &mut Outcomes::AllPlus).unwrap_err();
        assert!(
            matches!(
                err,
                InterpretError::Engine {
                    source: EngineError::NonStabilizer(_),
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn correction_needs_exactly_one_patch() {
        // q0 is spread over two patches when the correction fires.
        let mut s = SurgerySchedule::empty(1, 3);
        s.qubit_map.extend([(0, 0), (1, 0), (2, 1)]);
        s.corrections
            .push(crate::icm::CorrectionRule::new(vec![Trigger::Measurement(1)], Action::TrackX, 0));
        s.steps.push(vec![
            SurgeryOp::InitZero {
                cells: vec![(0, 0)],
                patch: 0,
            }
            .into(),
            SurgeryOp::InitZero {
                cells: vec![(0, 1)],
                patch: 1,
            }
            .into(),
            SurgeryOp::InitPlus {
                cells: vec![(0, 2)],
                patch: 2,
            }
            .into(),
        ]);
        s.steps.push(vec![SurgeryOp::Measure {
            cells: vec![(0, 2)],
            patch: 2,
            basis: ReadoutBasis::Z,
        }
        .into()]);
        s.steps.push(vec![SurgeryOp::ConditionalCorrect { rule: 0 }.into()]);
        assert!(interpret_schedule(&s, &mut Outcomes::forced([Sign::Plus])).is_ok());
        let err = interpret_schedule(&s, &mut Outcomes::forced([Sign::Minus])).unwrap_err();
        assert_eq!(
            err,
            InterpretError::NoSinglePatch {
                step: 2,
                qubit: 0,
                live: 2
            }
        );
        s.steps.push(vec![SurgeryOp::ConditionalCorrect { rule: 5 }.into()]);
        let err = interpret_schedule(&s, &mut Outcomes::forced([Sign::Plus])).unwrap_err();
        assert_eq!(err, InterpretError::UnknownRule { step: 3, rule: 5 });
    }

    #[test]
    fn dense_input_width_is_checked() {
        let s = crate::schedule::expand_general_cnot(1);
        let err = simulate_schedule(&s, &StateVector::ket("0").unwrap(), &[]).unwrap_err();
        assert_eq!(err, InterpretError::InputWidth { expected: 2, got: 1 });
        let err = simulate_schedule(&s, &StateVector::ket("00").unwrap(), &[]).unwrap_err();
        assert!(matches!(err, InterpretError::BranchExhausted { .. }), "{err}");
    }
}
