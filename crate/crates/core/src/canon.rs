//! Rewrites the CNOT block of an inverted-ICM circuit into multi-target CNOTs
//! whose controls start in `|+⟩` and are never targeted.
//!
//! Three local facts drive the rewrite:
//!
//! 1. a CNOT whose target is still `|+⟩` does nothing;
//! 2. a CNOT whose control is still `|0⟩` does nothing;
//! 3. two identical CNOTs with only commuting gates between them cancel.
//!
//! Offending gates are moved towards the front of the circuit with the
//! commutation identities of [`commute`] until the state in front of them makes
//! them trivial, and deleted there. Once no gate targets a `|+⟩` qubit
//! and no gate is controlled by a `|0⟩` qubit, every control is `|+⟩` and every
//! target is `|0⟩`, so all gates commute and can be grouped by control.

use std::collections::HashMap;

use crate::circuit::{validate, Circuit, Form, Gate, InitState, Measurement, Statement, Violation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CanonError {
    #[error("input is not a valid inverted-ICM circuit: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInput(Vec<Violation>),
    #[error("qubit {0} is an open input; only closed circuits can be canonicalized")]
    OpenInput(usize),
    #[error("rewrite exceeded its iteration cap of {0} steps")]
    IterationCap(usize),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

/// Single-target CNOT as `(control, target)`.
type Cx = (usize, usize);

/// Canonical multi-target form of an inverted-ICM circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTargetProgram {
    pub num_qubits: usize,
    pub base: usize,
    pub inits: Vec<InitState>,
    pub mtcnots: Vec<Gate>,
    pub measurements: Vec<Option<Measurement>>,
}

impl MultiTargetProgram {
    /// Circuit with the same initializations, the multi-target CNOTs and the
    /// measurements (in qubit order).
    pub fn to_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.num_qubits);
        c.base = self.base;
        for (q, &s) in self.inits.iter().enumerate() {
            c.init(q, s);
        }
        for g in &self.mtcnots {
            c.cnot(g.control, &g.targets);
        }
        for (q, m) in self.measurements.iter().enumerate() {
            if let Some(m) = m {
                c.statements.push(Statement::Measure(q, m.clone()));
            }
        }
        c
    }

    /// Checks the structural invariants, returning every violation found.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut controls = Vec::new();
        for g in &self.mtcnots {
            if self.inits.get(g.control) != Some(&InitState::Plus) {
                out.push(format!("control {} is not initialized to |+⟩", g.control));
            }
            if controls.contains(&g.control) {
                out.push(format!("control {} appears in more than one multi-target CNOT", g.control));
            }
            controls.push(g.control);
            if g.targets.is_empty() {
                out.push(format!("control {} has no targets", g.control));
            }
        }
        for g in &self.mtcnots {
            for t in &g.targets {
                if controls.contains(t) {
                    out.push(format!("control {t} is also a target"));
                }
            }
        }
        for (q, s) in self.inits.iter().enumerate() {
            if s.is_rotated() {
                out.push(format!("qubit {q} has a rotated initialization"));
            }
        }
        out
    }

    /// Qubits that appear in at least one multi-target CNOT.
    pub fn entangled_qubits(&self) -> Vec<usize> {
        let mut used = vec![false; self.num_qubits];
        for g in &self.mtcnots {
            used[g.control] = true;
            for &t in &g.targets {
                used[t] = true;
            }
        }
        (0..self.num_qubits).filter(|&q| used[q]).collect()
    }
}

/// Moves `right` in front of `left` (`left` acts first).
///
/// Returns the replacement sequence in time order — `right`, `left`, then possibly
/// one extra CNOT — implementing the same unitary as `left` followed by `right`.
/// Returns `None` for a reversed pair (`a→b` followed by `b→a`), which has no
/// such three-gate form.
pub fn commute(left: &Gate, right: &Gate) -> Option<Vec<Gate>> {
    assert!(
        left.targets.len() == 1 && right.targets.len() == 1,
        "commute expects single-target CNOTs"
    );
    let (p, q) = (left.control, left.targets[0]);
    let (c, t) = (right.control, right.targets[0]);
    let swapped = vec![right.clone(), left.clone()];
    if q == c && p == t {
        return None;
    }
    if q == c {
        // p→q then q→t: the control of the later gate carries p's parity onto t.
        return Some(vec![right.clone(), left.clone(), Gate::cnot(p, t)]);
    }
    if p == t {
        // t→q then c→t: moving c→t first leaks c into q.
        return Some(vec![right.clone(), left.clone(), Gate::cnot(c, q)]);
    }
    Some(swapped)
}

fn commute_cx(left: Cx, right: Cx) -> Option<Vec<Cx>> {
    commute(&Gate::cnot(left.0, left.1), &Gate::cnot(right.0, right.1)).map(|v| v.into_iter().map(|g| (g.control, g.targets[0])).collect())
}

/// Which gates an elimination pass removes.
#[derive(Clone, Copy)]
enum Rule {
    /// CNOTs whose target is `|+⟩`.
    TargetPlus,
    /// CNOTs whose control is `|0⟩`.
    ControlZero,
}

impl Rule {
    fn qubit(self, (c, t): Cx) -> usize {
        match self {
            Rule::TargetPlus => t,
            Rule::ControlZero => c,
        }
    }

    fn state(self) -> InitState {
        match self {
            Rule::TargetPlus => InitState::Plus,
            Rule::ControlZero => InitState::Zero,
        }
    }
}

struct Rewriter {
    inits: Vec<InitState>,
    gates: Vec<Cx>,
    steps: usize,
    cap: usize,
}

impl Rewriter {
    fn tick(&mut self) -> Result<(), CanonError> {
        self.steps += 1;
        if self.steps > self.cap {
            Err(CanonError::IterationCap(self.cap))
        } else {
            Ok(())
        }
    }

    /// Whether the gate at `idx` is the identity on the state prepared by the
    /// gates before it: its target is stabilized by `+X` (rule 1) or its control
    /// by `+Z` (rule 2). The single-qubit operator is pulled back through the
    /// prefix; it stays X-type (Z-type) and stabilizes the product of initial
    /// states exactly when its support lies on `|+⟩` (`|0⟩`) qubits.
    fn acts_trivially(&self, idx: usize, rule: Rule) -> bool {
        let mut support = vec![false; self.inits.len()];
        support[rule.qubit(self.gates[idx])] = true;
        for &(c, t) in self.gates[..idx].iter().rev() {
            match rule {
                // CNOT conjugates X_c to X_c X_t.
                Rule::TargetPlus => support[t] ^= support[c],
                // CNOT conjugates Z_t to Z_c Z_t.
                Rule::ControlZero => support[c] ^= support[t],
            }
        }
        support.iter().zip(&self.inits).all(|(&on, &s)| !on || s == rule.state())
    }

    /// Moves the offending gate at `idx` leftwards until it acts trivially on the
    /// state prepared before it, and deletes it there. Cancels against an
    /// identical neighbour on the way.
    fn eliminate(&mut self, mut idx: usize, rule: Rule) -> Result<(), CanonError> {
        loop {
            self.tick()?;
            let cur = self.gates[idx];
            if self.acts_trivially(idx, rule) {
                self.gates.remove(idx);
                return Ok(());
            }
            let left = self.gates[idx - 1];
            if left == cur {
                self.gates.drain(idx - 1..=idx);
                return Ok(());
            }
            match commute_cx(left, cur) {
                Some(seq) => {
                    self.gates.splice(idx - 1..=idx, seq);
                    idx -= 1;
                }
                None => {
                    // a→b then b→a equals a SWAP followed by a→b. The SWAP is pushed
                    // through the prefix (relabelling it) into the initial states.
                    let (c, t) = cur;
                    for g in &mut self.gates[..idx - 1] {
                        let relabel = |q: usize| {
                            if q == c {
                                t
                            } else if q == t {
                                c
                            } else {
                                q
                            }
                        };
                        *g = (relabel(g.0), relabel(g.1));
                    }
                    self.inits.swap(c, t);
                    self.gates.remove(idx - 1);
                    idx -= 1;
                    self.gates[idx] = (t, c);
                }
            }
        }
    }

    fn pass(&mut self, rule: Rule) -> Result<(), CanonError> {
        while let Some(idx) = self.gates.iter().position(|&g| self.inits[rule.qubit(g)] == rule.state()) {
            self.eliminate(idx, rule)?;
            self.cancel_pairs()?;
        }
        Ok(())
    }

    /// Annihilates pairs of identical CNOTs separated only by gates that commute
    /// with them without spawning a new gate, to a fixed point. Moving a gate past
    /// a neighbour and the annihilation each count as one rewrite step.
    fn cancel_pairs(&mut self) -> Result<(), CanonError> {
        let mut i = 0;
        while i < self.gates.len() {
            let g = self.gates[i];
            let partner = (i + 1..self.gates.len())
                .take_while(|&j| commutes_plainly(g, self.gates[j]))
                .find(|&j| self.gates[j] == g);
            match partner {
                Some(j) => {
                    for _ in i..j {
                        self.tick()?;
                    }
                    self.gates.remove(j);
                    self.gates.remove(i);
                    // The removal can unblock a pair further left.
                    i = 0;
                }
                None => i += 1,
            }
        }
        Ok(())
    }
}

/// Whether two CNOTs commute as they stand: they share no qubit, or share only
/// their control or only their target.
fn commutes_plainly(a: Cx, b: Cx) -> bool {
    a.1 != b.0 && a.0 != b.1
}

fn closed_inverted(c: &Circuit) -> Result<Vec<InitState>, CanonError> {
    let report = validate(c, Form::InvertedIcm);
    if !report.is_empty() {
        return Err(CanonError::InvalidInput(report));
    }
    if let Some(&q) = c.inputs().first() {
        return Err(CanonError::OpenInput(q));
    }
    Ok(c.inits()
        .into_iter()
        .map(|s| s.expect("validated circuits initialize every qubit"))
        .collect())
}

fn rewrite(c: &Circuit) -> Result<Rewriter, CanonError> {
    let inits = closed_inverted(c)?;
    let gates: Vec<Cx> = c.flattened().gates().map(|g| (g.control, g.targets[0])).collect();
    let g = gates.len();
    let mut rw = Rewriter {
        inits,
        gates,
        steps: 0,
        cap: 4 * g * g,
    };
    rw.pass(Rule::TargetPlus)?;
    rw.pass(Rule::ControlZero)?;
    rw.cancel_pairs()?;
    Ok(rw)
}

/// Removes every CNOT that targets a `|+⟩` qubit or is controlled by a `|0⟩`
/// qubit, commuting each one leftwards until it acts trivially, then cancels
/// identical pairs.
///
/// The returned circuit prepares the same state; its initializations can differ
/// from the input's when a reversed CNOT pair was resolved by relabelling.
pub fn push_and_eliminate(c: &Circuit) -> Result<Circuit, CanonError> {
    let rw = rewrite(c)?;
    let mut out = Circuit::new(c.num_qubits);
    out.base = c.base;
    for (q, &s) in rw.inits.iter().enumerate() {
        out.init(q, s);
    }
    for &(ctrl, t) in &rw.gates {
        out.cnot(ctrl, &[t]);
    }
    for s in &c.statements {
        if let Statement::Measure(..) = s {
            out.statements.push(s.clone());
        }
    }
    Ok(out)
}

/// Canonicalizes an inverted-ICM circuit into a [`MultiTargetProgram`].
pub fn canonicalize(c: &Circuit) -> Result<MultiTargetProgram, CanonError> {
    let rw = rewrite(c)?;
    for &(ctrl, t) in &rw.gates {
        if rw.inits[ctrl] != InitState::Plus || rw.inits[t] != InitState::Zero {
            return Err(CanonError::Invariant(format!("gate {ctrl}->{t} survived elimination")));
        }
    }
    for (i, &a) in rw.gates.iter().enumerate() {
        for &b in &rw.gates[i + 1..] {
            if commute_cx(a, b).is_none_or(|seq| seq.len() != 2) {
                return Err(CanonError::Invariant(format!("gates {a:?} and {b:?} do not commute")));
            }
        }
    }
    // All gates commute: cancel by parity, then group by control in order of first
    // occurrence (targets likewise).
    let mut parity: HashMap<Cx, bool> = HashMap::new();
    for &g in &rw.gates {
        *parity.entry(g).or_insert(false) ^= true;
    }
    let mut mtcnots: Vec<Gate> = Vec::new();
    for &(ctrl, t) in &rw.gates {
        if !parity[&(ctrl, t)] {
            continue;
        }
        match mtcnots.iter_mut().find(|g| g.control == ctrl) {
            Some(g) if g.targets.contains(&t) => {}
            Some(g) => g.targets.push(t),
            None => mtcnots.push(Gate {
                control: ctrl,
                targets: vec![t],
            }),
        }
    }
    let program = MultiTargetProgram {
        num_qubits: c.num_qubits,
        base: c.base,
        inits: rw.inits,
        mtcnots,
        measurements: c.measurements(),
    };
    let violations = program.invariant_violations();
    if !violations.is_empty() {
        return Err(CanonError::Invariant(violations.join("; ")));
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::stabilizer::circuit_state;

    /// Applies single-target CNOTs (time order) to a basis state over `n` bits.
    fn apply(gates: &[Gate], mut bits: u32) -> u32 {
        for g in gates {
            if bits >> g.control & 1 == 1 {
                bits ^= 1 << g.targets[0];
            }
        }
        bits
    }

    fn same_unitary(a: &[Gate], b: &[Gate], n: u32) -> bool {
        (0..1u32 << n).all(|x| apply(a, x) == apply(b, x))
    }

    #[test]
    fn disjoint_gates_swap() {
        let (l, r) = (Gate::cnot(0, 1), Gate::cnot(2, 3));
        assert_eq!(commute(&l, &r).unwrap(), vec![r, l]);
    }

    #[test]
    fn chained_gates_gain_one_extra_cnot() {
        for (l, r) in [(Gate::cnot(0, 1), Gate::cnot(1, 2)), (Gate::cnot(1, 2), Gate::cnot(0, 1))] {
            let seq = commute(&l, &r).unwrap();
            assert_eq!(seq.len(), 3);
            assert_eq!(seq[0], r);
            assert!(same_unitary(&[l, r], &seq, 3));
        }
    }

    #[test]
    fn all_small_pairs_match_unitaries() {
        let gates: Vec<Gate> = (0..3)
            .flat_map(|c| (0..3).filter(move |&t| t != c).map(move |t| Gate::cnot(c, t)))
            .collect();
        for l in &gates {
            for r in &gates {
                match commute(l, r) {
                    Some(seq) => assert!(same_unitary(&[l.clone(), r.clone()], &seq, 3), "{l:?} {r:?}"),
                    None => assert!(l.control == r.targets[0] && r.control == l.targets[0]),
                }
            }
        }
    }

    fn gates_of(c: &Circuit) -> usize {
        c.num_gates()
    }

    #[test]
    fn rule_one_removes_gate_on_plus_target() {
        let c = parse_circuit("qubits 2\ninit 0 +\ninit 1 +\ncnot 0 -> 1").unwrap();
        assert_eq!(gates_of(&push_and_eliminate(&c).unwrap()), 0);
    }

    #[test]
    fn rule_two_removes_gate_with_zero_control() {
        let c = parse_circuit("qubits 2\ninit 0 0\ninit 1 0\ncnot 0 -> 1").unwrap();
        assert_eq!(gates_of(&push_and_eliminate(&c).unwrap()), 0);
    }

    #[test]
    fn rule_three_cancels_duplicates() {
        let c = parse_circuit("qubits 2\ninit 0 +\ninit 1 0\ncnot 0 -> 1\ncnot 0 -> 1").unwrap();
        assert_eq!(gates_of(&push_and_eliminate(&c).unwrap()), 0);
    }

    #[test]
    fn two_control_example() {
        let c = parse_circuit("qubits 3\ninit 0 +\ninit 1 0\ninit 2 +\ncnot 0 -> 1\ncnot 2 -> 1").unwrap();
        let p = canonicalize(&c).unwrap();
        assert_eq!(p.mtcnots, vec![Gate::cnot(0, 1), Gate::cnot(2, 1)]);
        assert!(circuit_state(&p.to_circuit())
            .unwrap()
            .same_state(&circuit_state(&c).unwrap())
            .unwrap());
    }

    #[test]
    fn reversed_pair_relabels_inits() {
        // CNOT 0→1 then CNOT 1→0 on |+⟩|0⟩ yields |0⟩|+⟩: the inits swap and no gate survives.
        let c = parse_circuit("qubits 2\ninit 0 +\ninit 1 0\ncnot 0 -> 1\ncnot 1 -> 0").unwrap();
        let p = canonicalize(&c).unwrap();
        assert!(p.invariant_violations().is_empty());
        assert!(p.mtcnots.is_empty());
        assert_eq!(p.inits, vec![InitState::Zero, InitState::Plus]);
        assert!(circuit_state(&p.to_circuit())
            .unwrap()
            .same_state(&circuit_state(&c).unwrap())
            .unwrap());
    }

    #[test]
    fn rejects_rotated_inits() {
        let c = parse_circuit("qubits 1\ninit 0 A").unwrap();
        assert!(matches!(canonicalize(&c), Err(CanonError::InvalidInput(_))));
    }

    #[test]
    fn dense_random_circuit_stays_within_the_cap() {
        // Without eager pair cancellation this circuit needs hundreds of
        // thousands of rewrites.
        let c = parse_circuit("qubits 10\ninit 0 +\ninit 1 0\ninit 2 +\ninit 3 +\ninit 4 0\ninit 5 0\ninit 6 +\ninit 7 +\ninit 8 0\ninit 9 +\ncnot 3 -> 5\ncnot 6 -> 1\ncnot 1 -> 4\ncnot 3 -> 4\ncnot 1 -> 8\ncnot 6 -> 1\ncnot 9 -> 6\ncnot 0 -> 3\ncnot 6 -> 5\ncnot 7 -> 2\ncnot 1 -> 0\ncnot 7 -> 2\ncnot 8 -> 1\ncnot 4 -> 7\ncnot 0 -> 6\ncnot 7 -> 0\ncnot 2 -> 0\ncnot 3 -> 6\ncnot 7 -> 0\ncnot 6 -> 4\ncnot 5 -> 3\ncnot 4 -> 0\ncnot 2 -> 8\ncnot 7 -> 1\ncnot 2 -> 3\n").unwrap();
        let p = canonicalize(&c).unwrap();
        assert!(circuit_state(&p.to_circuit())
            .unwrap()
            .same_state(&circuit_state(&c).unwrap())
            .unwrap());
        assert!(p.invariant_violations().is_empty());
    }

    #[test]
    fn reed_muller_original_reaches_the_multi_target_form() {
        let original = parse_circuit(crate::fixtures::REED_MULLER_ORIGINAL).unwrap();
        let target = parse_circuit(crate::fixtures::REED_MULLER).unwrap();
        let p = canonicalize(&original).unwrap();
        assert!(p.invariant_violations().is_empty());
        let controls: Vec<usize> = p.mtcnots.iter().map(|g| g.control).collect();
        assert!(p.mtcnots.iter().all(|g| g.targets.iter().all(|t| !controls.contains(t))));
        let got = circuit_state(&p.to_circuit().without_measurements()).unwrap();
        assert!(got.same_state(&circuit_state(&target.without_measurements()).unwrap()).unwrap());
        assert!(got.same_state(&circuit_state(&original.without_measurements()).unwrap()).unwrap());
    }
}
