//! ICM → inverted-ICM transformation and the branch-by-branch equivalence oracle.
//!
//! An ICM circuit consumes rotated states (`|Y⟩`, `|A⟩`) prepared at initialization.
//! The inverted form only prepares `|0⟩` and `|+⟩` and moves the rotation into the
//! measurement basis of the partner qubit. Two teleportation gadgets are supported:
//!
//! * **target gadget** – the rotated qubit `r` is the target of a CNOT from data
//!   qubit `d`, and `d` is measured in X. Inverted: `r` starts in `|+⟩`, the CNOT is
//!   reversed (`r → d`) and `d` is measured in the rotated basis.
//! * **control gadget** – `r` controls a CNOT onto `d`, and `d` is measured in Z.
//!   Inverted: `r` starts in `|0⟩`, the CNOT is reversed (`d → r`) and `d` is
//!   measured in the rotated basis.
//!
//! In both cases outcome 1 on `d` leaves `r` off by a Pauli Z, so the inverted
//! circuit only needs the tracked rule `track_z(r) if m_d`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{validate, Basis, Circuit, Form, Gate, InitState, Statement, Violation};
use crate::statevec::{run_circuit, DenseError, StateVector};

/// Classical signal a correction depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Trigger {
    /// Outcome of the final measurement of a qubit (`m<q>`).
    Measurement(usize),
    /// Outcome of the injection merge performing a qubit's basis change (`inj<q>`).
    Injection(usize),
    /// Outcome of the corrective `|Y⟩` merge that follows an `|A⟩` injection (`cinj<q>`).
    Corrective(usize),
    /// Parity outcome of joining schedule patch `p` into a rough merge (`mrg<p>`).
    Merge(usize),
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::Measurement(q) => write!(f, "m{q}"),
            Trigger::Injection(q) => write!(f, "inj{q}"),
            Trigger::Corrective(q) => write!(f, "cinj{q}"),
            Trigger::Merge(p) => write!(f, "mrg{p}"),
        }
    }
}

impl From<Trigger> for String {
    fn from(t: Trigger) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Trigger {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        let parse = |digits: &str| digits.parse::<usize>().map_err(|_| format!("bad trigger {s:?}"));
        if let Some(d) = s.strip_prefix("cinj") {
            Ok(Trigger::Corrective(parse(d)?))
        } else if let Some(d) = s.strip_prefix("inj") {
            Ok(Trigger::Injection(parse(d)?))
        } else if let Some(d) = s.strip_prefix("mrg") {
            Ok(Trigger::Merge(parse(d)?))
        } else if let Some(d) = s.strip_prefix('m') {
            Ok(Trigger::Measurement(parse(d)?))
        } else {
            Err(format!("bad trigger {s:?}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Record a Pauli X in the classical frame.
    TrackX,
    /// Record a Pauli Z in the classical frame.
    TrackZ,
    /// Physically apply the phase gate `P` (cannot be tracked).
    ApplyP,
}

/// A correction that fires when the XOR of its trigger outcomes is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrectionRule {
    #[serde(rename = "if")]
    pub triggers: Vec<Trigger>,
    #[serde(rename = "do")]
    pub action: Action,
    pub qubit: usize,
}

impl CorrectionRule {
    pub fn new(triggers: Vec<Trigger>, action: Action, qubit: usize) -> Self {
        CorrectionRule { triggers, action, qubit }
    }

    /// Whether the rule fires for the given outcome lookup.
    pub fn fires(&self, outcome: impl Fn(Trigger) -> bool) -> bool {
        self.triggers.iter().fold(false, |acc, &t| acc ^ outcome(t))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IcmError {
    #[error("input is not a valid ICM circuit: {}", list(.0))]
    NotIcm(Vec<Violation>),
    #[error("qubit {qubit}: {reason}")]
    UnsupportedGadget { qubit: usize, reason: String },
    #[error("circuits have {got} qubits, limit is {limit}")]
    SizeExceeded { got: usize, limit: usize },
    #[error("circuits differ in {0}")]
    InterfaceMismatch(&'static str),
    #[error("rule {0:?} cannot be evaluated on a circuit")]
    UnsupportedRule(CorrectionRule),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Rewrites every rotated initialization into a rotated measurement.
///
/// Each `|Y⟩`/`|A⟩` qubit `r` must be touched by exactly one single-target CNOT
/// (after flattening), must not be measured, and its partner `d` must not be
/// touched after that CNOT. Returns the inverted circuit and the Pauli corrections
/// it needs to reproduce the original circuit's output on every branch.
pub fn invert_icm(c: &Circuit) -> Result<(Circuit, Vec<CorrectionRule>), IcmError> {
    let report = validate(c, Form::Icm);
    if !report.is_empty() {
        return Err(IcmError::NotIcm(report));
    }
    let inits = c.inits();
    if !inits.iter().any(|s| s.is_some_and(InitState::is_rotated)) {
        return Ok((c.clone(), Vec::new()));
    }
    let mut out = c.flattened();
    let measurements = out.measurements();
    let gate_positions: Vec<usize> = out
        .statements
        .iter()
        .enumerate()
        .filter_map(|(i, s)| matches!(s, Statement::Cnot(_)).then_some(i))
        .collect();
    let mut rules = Vec::new();
    for (r, init) in inits.iter().enumerate() {
        let Some(state) = init.filter(|s| s.is_rotated()) else {
            continue;
        };
        let unsupported = |reason: &str| IcmError::UnsupportedGadget {
            qubit: r,
            reason: reason.to_string(),
        };
        if measurements[r].is_some() {
            return Err(unsupported("rotated qubit is measured; only output gadgets are supported"));
        }
        let touching: Vec<usize> = gate_positions
            .iter()
            .copied()
            .filter(|&i| matches!(&out.statements[i], Statement::Cnot(g) if g.touches(r)))
            .collect();
        let [pos] = touching.as_slice() else {
            return Err(unsupported("rotated qubit must be used by exactly one CNOT"));
        };
        let Statement::Cnot(gate) = out.statements[*pos].clone() else {
            unreachable!()
        };
        let (d, target_gadget) = if gate.control == r {
            (gate.targets[0], false)
        } else {
            (gate.control, true)
        };
        if gate_positions
            .iter()
            .any(|&i| i > *pos && matches!(&out.statements[i], Statement::Cnot(g) if g.touches(d)))
        {
            return Err(unsupported("partner qubit is used after the gadget CNOT"));
        }
        let expected = if target_gadget { Basis::X } else { Basis::Z };
        match &measurements[d] {
            Some(m) if m.basis == expected => {}
            _ => {
                return Err(unsupported(&format!(
                    "partner qubit {d} must be measured in {} for this gadget",
                    expected.symbol()
                )))
            }
        }
        let basis = if state == InitState::Y { Basis::Y } else { Basis::A };
        let (new_init, new_gate) = if target_gadget {
            (InitState::Plus, Gate::cnot(r, d))
        } else {
            (InitState::Zero, Gate::cnot(d, r))
        };
        out.statements[*pos] = Statement::Cnot(new_gate);
        for s in &mut out.statements {
            match s {
                Statement::Init(q, st) if *q == r => *st = new_init,
                Statement::Measure(q, m) if *q == d => m.basis = basis,
                _ => {}
            }
        }
        rules.push(CorrectionRule::new(vec![Trigger::Measurement(d)], Action::TrackZ, r));
    }
    Ok((out, rules))
}

/// Corrections an ICM control gadget needs on outcome 1 of its Z measurement:
/// `X` then `P` for `|A⟩`, `X` then `Z` for `|Y⟩`.
pub fn icm_control_gadget_rules(rotated: usize, partner: usize, state: InitState) -> Vec<CorrectionRule> {
    let second = if state == InitState::A { Action::ApplyP } else { Action::TrackZ };
    vec![
        CorrectionRule::new(vec![Trigger::Measurement(partner)], Action::TrackX, rotated),
        CorrectionRule::new(vec![Trigger::Measurement(partner)], second, rotated),
    ]
}

fn measured_qubits(c: &Circuit) -> Vec<usize> {
    c.statements
        .iter()
        .filter_map(|s| match s {
            Statement::Measure(q, _) => Some(*q),
            _ => None,
        })
        .collect()
}

/// Linear map from input basis states to output states along one branch, with
/// the rules applied; columns are concatenated into a single vector.
fn branch_map(c: &Circuit, rules: &[CorrectionRule], outcome_of: &dyn Fn(usize) -> bool) -> Result<Vec<Complex64>, IcmError> {
    let inputs = c.inputs();
    let order = measured_qubits(c);
    let branch: Vec<bool> = order.iter().map(|&q| outcome_of(q)).collect();
    let outputs = c.outputs();
    let mut columns = Vec::new();
    for x in 0..1usize << inputs.len() {
        let label: String = (0..inputs.len())
            .map(|i| if x >> (inputs.len() - 1 - i) & 1 == 1 { '1' } else { '0' })
            .collect();
        let input = if inputs.is_empty() {
            StateVector::scalar()
        } else {
            StateVector::ket(&label)?
        };
        let mut v = run_circuit(c, &input, &branch)?;
        for rule in rules {
            let fires = rule.fires(|t| match t {
                Trigger::Measurement(q) => outcome_of(q),
                Trigger::Injection(_) | Trigger::Corrective(_) | Trigger::Merge(_) => false,
            });
            if !fires {
                continue;
            }
            let pos = outputs
                .iter()
                .position(|&q| q == rule.qubit)
                .ok_or_else(|| IcmError::UnsupportedRule(rule.clone()))?;
            match rule.action {
                Action::TrackX => v.apply_x(pos)?,
                Action::TrackZ => v.apply_z(pos)?,
                Action::ApplyP => v.apply_phase(pos, Complex64::i())?,
            }
        }
        columns.extend_from_slice(v.amplitudes());
    }
    Ok(columns)
}

/// Whether two circuits agree on every measurement branch and every input.
///
/// Both circuits must declare the same input qubits, measure the same set of
/// qubits and leave the same outputs. For each outcome assignment the linear maps
/// from inputs to corrected outputs must be equal up to a unit-modulus factor.
pub fn check_equivalence_small(
    a: &Circuit,
    rules_a: &[CorrectionRule],
    b: &Circuit,
    rules_b: &[CorrectionRule],
    max_qubits: usize,
) -> Result<bool, IcmError> {
    let limit = max_qubits.min(12);
    for c in [a, b] {
        if c.num_qubits > limit {
            return Err(IcmError::SizeExceeded { got: c.num_qubits, limit });
        }
    }
    let mut ia = a.inputs();
    let mut ib = b.inputs();
    ia.sort_unstable();
    ib.sort_unstable();
    if ia != ib || a.inputs() != b.inputs() {
        return Err(IcmError::InterfaceMismatch("declared inputs"));
    }
    if a.outputs() != b.outputs() {
        return Err(IcmError::InterfaceMismatch("outputs"));
    }
    let mut measured = measured_qubits(a);
    let mut mb = measured_qubits(b);
    measured.sort_unstable();
    mb.sort_unstable();
    if measured != mb {
        return Err(IcmError::InterfaceMismatch("measured qubits"));
    }
    for assignment in 0..1usize << measured.len() {
        let outcome_of = |q: usize| {
            let k = measured.iter().position(|&m| m == q).expect("measured qubit");
            assignment >> k & 1 == 1
        };
        let ma = branch_map(a, rules_a, &outcome_of)?;
        let mb = branch_map(b, rules_b, &outcome_of)?;
        if !proportional_unit(&ma, &mb, 1e-9) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn proportional_unit(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let norm_a: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm_a < tol || norm_b < tol {
        return norm_a < tol && norm_b < tol;
    }
    if (norm_a - norm_b).abs() > tol {
        return false;
    }
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (overlap.norm() - norm_a * norm_b).abs() <= tol * norm_a * norm_b.max(1.0)
}
