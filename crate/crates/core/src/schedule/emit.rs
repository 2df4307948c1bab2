//! Turning a multi-target program and a placement into a timed schedule.
//!
//! Timesteps, in order (optional ones are omitted when empty):
//!
//! 1. `init` — one `|+⟩` block per multi-target CNOT (plus any standalone qubits
//!    placed in the init phase);
//! 2. `split` — each block is smooth-split into one patch per CNOT member;
//! 3. `move` — one step per move phase;
//! 4. `merge` — all patches of a qubit are rough-merged over its region, using
//!    free cells as `|0⟩` bridges; standalone qubits may be initialized here.
//!    Always present when the program has CNOTs;
//! 5. `shrink`;
//! 6. `inject` and the injection smooth merge, for `Y`/`A`-measured qubits;
//! 7. the corrective `|Y⟩` injection and merge, for `A`-measured qubits;
//! 8. readout layers ordered by classical feed-forward.
//!
//! Corrections after each injection merge are applied through generated
//! [`CorrectionRule`]s appended after the caller's rules.

use std::collections::{BTreeMap, BTreeSet};

use crate::canon::MultiTargetProgram;
use crate::circuit::{Basis, InitState};
use crate::icm::{Action, CorrectionRule, Trigger};

use super::placement::{naive_layout, CellLabel, Phase, PhaseKind, Placement};
use super::{
    is_connected, is_unit_shift, touching, Cell, MagicState, Part, PatchId, ReadoutBasis, ScheduledOp, SurgeryOp, SurgerySchedule,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmitError {
    #[error("program is not in multi-target form: {0}")]
    InvalidProgram(String),
    #[error("phase {phase}: unknown label {label}")]
    UnknownLabel { phase: &'static str, label: String },
    #[error("phase {phase}: cell ({}, {}) is already occupied", .cell.0, .cell.1)]
    Occupied { phase: &'static str, cell: Cell },
    #[error("phase {phase}: q{qubit} does not form one connected region with its partners")]
    NotAdjacent { phase: &'static str, qubit: usize },
    #[error("phase {phase}: {reason}")]
    Infeasible { phase: &'static str, reason: String },
    #[error("measurement feed-forward is cyclic among qubits {0:?}")]
    FeedForwardCycle(Vec<usize>),
}

fn infeasible(phase: PhaseKind, reason: String) -> EmitError {
    EmitError::Infeasible {
        phase: phase.name(),
        reason,
    }
}

/// Schedule for `program` laid out by [`naive_layout`].
pub fn naive_schedule(program: &MultiTargetProgram, rules: &[CorrectionRule]) -> Result<SurgerySchedule, EmitError> {
    emit_schedule(program, &naive_layout(program), rules)
}

/// Builds the schedule realizing `program` on `placement`. `rules` are the
/// classical corrections of the program (from circuit inversion); they become
/// `conditional_correct` operations placed after their triggers.
pub fn emit_schedule(program: &MultiTargetProgram, placement: &Placement, rules: &[CorrectionRule]) -> Result<SurgerySchedule, EmitError> {
    let violations = program.invariant_violations();
    if !violations.is_empty() {
        return Err(EmitError::InvalidProgram(violations.join("; ")));
    }
    for g in &program.mtcnots {
        for &t in &g.targets {
            if program.inits[t] != InitState::Zero {
                return Err(EmitError::InvalidProgram(format!(
                    "target q{} is not initialized to |0⟩",
                    t + program.base
                )));
            }
        }
    }
    let mut b = Builder::new(program, placement, rules);
    b.check_labels()?;
    b.init_and_split()?;
    for phase in placement.phases.iter().filter(|ph| ph.kind == PhaseKind::Move) {
        b.moves(phase)?;
    }
    b.merge()?;
    b.shrink()?;
    b.injections()?;
    b.readout()?;
    Ok(b.sched)
}

struct Builder<'a> {
    p: &'a MultiTargetProgram,
    placement: &'a Placement,
    sched: SurgerySchedule,
    live: BTreeMap<PatchId, BTreeSet<Cell>>,
    /// Live patches of each circuit qubit.
    pieces: Vec<Vec<PatchId>>,
    /// Split part → control of the block it came from.
    block_of: BTreeMap<PatchId, usize>,
    /// Number of caller-supplied correction rules.
    given_rules: usize,
    next: PatchId,
}

impl<'a> Builder<'a> {
    fn new(p: &'a MultiTargetProgram, placement: &'a Placement, rules: &[CorrectionRule]) -> Self {
        let mut sched = SurgerySchedule::empty(placement.rows, placement.cols);
        sched.corrections = rules.to_vec();
        sched.base = p.base;
        Builder {
            p,
            placement,
            sched,
            live: BTreeMap::new(),
            pieces: vec![Vec::new(); p.num_qubits],
            block_of: BTreeMap::new(),
            given_rules: rules.len(),
            next: 0,
        }
    }

    fn display(&self, q: usize) -> usize {
        q + self.p.base
    }

    fn fresh(&mut self, q: Option<usize>, cells: BTreeSet<Cell>) -> PatchId {
        let id = self.next;
        self.next += 1;
        self.live.insert(id, cells);
        if let Some(q) = q {
            self.sched.qubit_map.insert(id, q);
            self.pieces[q].push(id);
        }
        id
    }

    fn owner(&self, cell: Cell) -> Option<PatchId> {
        self.live.iter().find(|(_, cells)| cells.contains(&cell)).map(|(&id, _)| id)
    }

    /// Fails unless every cell is free or belongs to one of `allowed`.
    fn require_free<'c>(&self, phase: PhaseKind, cells: impl IntoIterator<Item = &'c Cell>, allowed: &[PatchId]) -> Result<(), EmitError> {
        for &cell in cells {
            if let Some(id) = self.owner(cell) {
                if !allowed.contains(&id) {
                    return Err(EmitError::Occupied { phase: phase.name(), cell });
                }
            }
        }
        Ok(())
    }

    /// Circuit qubit named by a label's displayed number.
    fn qubit(&self, phase: PhaseKind, label: CellLabel) -> Result<usize, EmitError> {
        let k = match label {
            CellLabel::Qubit(k) | CellLabel::Magic(_, k) => k,
            _ => unreachable!("only qubit and magic labels name qubits"),
        };
        k.checked_sub(self.p.base)
            .filter(|&q| q < self.p.num_qubits)
            .ok_or_else(|| EmitError::UnknownLabel {
                phase: phase.name(),
                label: label.to_string(),
            })
    }

    fn check_labels(&self) -> Result<(), EmitError> {
        for phase in &self.placement.phases {
            for label in phase.labels() {
                if matches!(label, CellLabel::Qubit(_) | CellLabel::Magic(..)) {
                    self.qubit(phase.kind, label)?;
                }
            }
        }
        Ok(())
    }

    fn push_step(&mut self, ops: Vec<ScheduledOp>) {
        self.sched.steps.push(ops);
    }

    fn is_control(&self, q: usize) -> Option<usize> {
        self.p.mtcnots.iter().position(|g| g.control == q)
    }

    fn is_entangled(&self, q: usize) -> bool {
        self.p.mtcnots.iter().any(|g| g.touches(q))
    }

    fn init_op(&self, q: usize, cells: &BTreeSet<Cell>, patch: PatchId) -> SurgeryOp {
        let cells = cells.iter().copied().collect();
        match self.p.inits[q] {
            InitState::Plus => SurgeryOp::InitPlus { cells, patch },
            _ => SurgeryOp::InitZero { cells, patch },
        }
    }

    fn init_and_split(&mut self) -> Result<(), EmitError> {
        let init = self.placement.phase(PhaseKind::Init);
        if init.is_none() && self.p.mtcnots.is_empty() {
            return Ok(());
        }
        let init = init.ok_or_else(|| infeasible(PhaseKind::Init, "missing init phase".into()))?;
        let mut blocks: Vec<Option<(PatchId, BTreeSet<Cell>)>> = vec![None; self.p.mtcnots.len()];
        let mut ops: Vec<ScheduledOp> = Vec::new();
        for label in init.labels() {
            let q = self.qubit(PhaseKind::Init, label)?;
            let cells: BTreeSet<Cell> = init.cells_of(label).into_iter().collect();
            if !is_connected(&cells) {
                return Err(EmitError::NotAdjacent {
                    phase: "init",
                    qubit: self.display(q),
                });
            }
            if let Some(g) = self.is_control(q) {
                // The block holds the control's |+⟩ until it is split; it is not
                // one of the pieces merged later.
                let id = self.fresh(None, cells.clone());
                self.sched.qubit_map.insert(id, q);
                ops.push(
                    SurgeryOp::InitPlus {
                        cells: cells.iter().copied().collect(),
                        patch: id,
                    }
                    .into(),
                );
                blocks[g] = Some((id, cells));
            } else if !self.is_entangled(q) {
                let id = self.fresh(Some(q), cells.clone());
                ops.push(self.init_op(q, &cells, id).into());
            } else {
                return Err(infeasible(
                    PhaseKind::Init,
                    format!("q{} is a CNOT target and has no block of its own", self.display(q)),
                ));
            }
        }
        self.push_step(ops);
        if self.p.mtcnots.is_empty() {
            return Ok(());
        }

        let split = self
            .placement
            .phase(PhaseKind::Split)
            .ok_or_else(|| infeasible(PhaseKind::Split, "missing split phase".into()))?;
        let mut used: BTreeSet<Cell> = BTreeSet::new();
        let mut ops = Vec::new();
        for (gi, g) in self.p.mtcnots.iter().enumerate() {
            let (block_id, block) = blocks[gi].clone().ok_or_else(|| {
                infeasible(
                    PhaseKind::Init,
                    format!("no block for the CNOT controlled by q{}", self.display(g.control)),
                )
            })?;
            let mut members = vec![g.control];
            members.extend(&g.targets);
            let mut parts = Vec::new();
            for m in members {
                let cells: BTreeSet<Cell> = split
                    .cells_of(CellLabel::Qubit(self.display(m)))
                    .into_iter()
                    .filter(|c| block.contains(c))
                    .collect();
                if cells.is_empty() {
                    return Err(infeasible(
                        PhaseKind::Split,
                        format!("q{} has no patch in the block of q{}", self.display(m), self.display(g.control)),
                    ));
                }
                if !is_connected(&cells) {
                    return Err(EmitError::NotAdjacent {
                        phase: "split",
                        qubit: self.display(m),
                    });
                }
                used.extend(cells.iter().copied());
                let id = self.fresh(Some(m), cells.clone());
                self.block_of.insert(id, g.control);
                parts.push(Part {
                    cells: cells.into_iter().collect(),
                    patch: id,
                });
            }
            self.live.remove(&block_id);
            ops.push(
                SurgeryOp::SmoothSplit {
                    cells: block.into_iter().collect(),
                    patch: block_id,
                    parts,
                }
                .into(),
            );
        }
        for &(cell, label) in &split.cells {
            if label != CellLabel::Free && !used.contains(&cell) {
                return Err(infeasible(
                    PhaseKind::Split,
                    format!(
                        "cell ({}, {}) labelled {label} lies outside the blocks of its CNOTs",
                        cell.0, cell.1
                    ),
                ));
            }
        }
        self.push_step(ops);
        Ok(())
    }

    fn moves(&mut self, phase: &Phase) -> Result<(), EmitError> {
        let mut ops = Vec::new();
        for label in phase.labels() {
            let q = self.qubit(PhaseKind::Move, label)?;
            let dest: BTreeSet<Cell> = phase.cells_of(label).into_iter().collect();
            let piece = self.pieces[q]
                .iter()
                .copied()
                .find(|id| is_unit_shift(&self.live[id], &dest))
                .ok_or_else(|| {
                    infeasible(
                        PhaseKind::Move,
                        format!("cells of q{} are not a one-cell shift of one of its patches", self.display(q)),
                    )
                })?;
            self.require_free(PhaseKind::Move, &dest, &[piece])?;
            self.live.insert(piece, dest.clone());
            ops.push(
                SurgeryOp::Move {
                    cells: dest.into_iter().collect(),
                    patch: piece,
                }
                .into(),
            );
        }
        self.push_step(ops);
        Ok(())
    }

    fn merge(&mut self) -> Result<(), EmitError> {
        let kind = PhaseKind::Merge;
        let empty = Phase::new(kind);
        let phase = self.placement.phase(kind).unwrap_or(&empty);
        let labels: Vec<CellLabel> = phase.labels().into_iter().filter(|l| matches!(l, CellLabel::Qubit(_))).collect();
        let mut regions: BTreeMap<usize, BTreeSet<Cell>> = BTreeMap::new();
        for &label in &labels {
            let q = self.qubit(kind, label)?;
            let mut region: BTreeSet<Cell> = phase.cells_of(label).into_iter().collect();
            for id in &self.pieces[q] {
                region.extend(self.live[id].iter().copied());
            }
            regions.insert(q, region);
        }
        // Explicit bridge cells join the one region they are attached to.
        let zeros: BTreeSet<Cell> = phase.cells_of(CellLabel::Zero).into_iter().collect();
        for component in components(&zeros) {
            let owners: Vec<usize> = regions.iter().filter(|(_, r)| touching(&component, r)).map(|(&q, _)| q).collect();
            if owners.len() != 1 {
                let (r, c) = *component.iter().next().expect("components are non-empty");
                return Err(infeasible(
                    kind,
                    format!("bridge cells at ({r}, {c}) touch {} merge regions", owners.len()),
                ));
            }
            regions.get_mut(&owners[0]).expect("owner exists").extend(component);
        }
        let mut ops = Vec::new();
        for (&q, region) in &regions {
            let pieces = self.pieces[q].clone();
            self.require_free(kind, region, &pieces)?;
            if !is_connected(region) {
                return Err(EmitError::NotAdjacent {
                    phase: kind.name(),
                    qubit: self.display(q),
                });
            }
            let cells: Vec<Cell> = region.iter().copied().collect();
            match pieces.len() {
                0 => {
                    if self.is_entangled(q) {
                        return Err(infeasible(kind, format!("q{} has no patch to merge", self.display(q))));
                    }
                    let id = self.fresh(Some(q), region.clone());
                    ops.push(self.init_op(q, region, id).into());
                }
                1 => {
                    if region != &self.live[&pieces[0]] {
                        ops.push(SurgeryOp::Grow { cells, patch: pieces[0] }.into());
                        self.live.insert(pieces[0], region.clone());
                    }
                }
                _ => {
                    ops.push(
                        SurgeryOp::RoughMerge {
                            cells,
                            patch: pieces[0],
                            merged: pieces.clone(),
                            outcomes: pieces[1..].iter().map(|&id| Trigger::Merge(id)).collect(),
                        }
                        .into(),
                    );
                    // Joining a piece with outcome −1 leaves a Z on its block's GHZ
                    // state, i.e. on the control that block came from.
                    for &id in &pieces[1..] {
                        let control = self.block_of[&id];
                        let fix = self.add_rule(CorrectionRule::new(vec![Trigger::Merge(id)], Action::TrackZ, control));
                        ops.push(fix);
                    }
                    for id in &pieces[1..] {
                        self.live.remove(id);
                    }
                    self.live.insert(pieces[0], region.clone());
                    self.pieces[q].truncate(1);
                }
            }
        }
        // Merges may not reuse a cell that another region claims.
        let mut claimed: BTreeSet<Cell> = BTreeSet::new();
        for region in regions.values() {
            if let Some(&cell) = region.iter().find(|c| !claimed.insert(**c)) {
                return Err(EmitError::Occupied { phase: kind.name(), cell });
            }
        }
        for q in 0..self.p.num_qubits {
            match self.pieces[q].len() {
                0 => return Err(infeasible(kind, format!("q{} is never placed", self.display(q)))),
                1 => {}
                n => {
                    return Err(infeasible(
                        kind,
                        format!("q{} has {n} patches but no merge region", self.display(q)),
                    ))
                }
            }
        }
        if !ops.is_empty() || !self.p.mtcnots.is_empty() {
            self.push_step(ops);
        }
        Ok(())
    }

    fn data(&self, q: usize) -> PatchId {
        self.pieces[q][0]
    }

    fn shrink(&mut self) -> Result<(), EmitError> {
        let kind = PhaseKind::Shrink;
        let Some(phase) = self.placement.phase(kind) else {
            return Ok(());
        };
        let mut ops = Vec::new();
        for label in phase.labels() {
            let q = self.qubit(kind, label)?;
            let id = self.data(q);
            let cells: BTreeSet<Cell> = phase.cells_of(label).into_iter().collect();
            if !cells.is_subset(&self.live[&id]) {
                return Err(infeasible(
                    kind,
                    format!("q{} can only keep cells it already occupies", self.display(q)),
                ));
            }
            if !is_connected(&cells) {
                return Err(EmitError::NotAdjacent {
                    phase: kind.name(),
                    qubit: self.display(q),
                });
            }
            self.live.insert(id, cells.clone());
            ops.push(
                SurgeryOp::Shrink {
                    cells: cells.into_iter().collect(),
                    patch: id,
                }
                .into(),
            );
        }
        if !ops.is_empty() {
            self.push_step(ops);
        }
        Ok(())
    }

    /// Magic-state cells for every rotated measurement in `phase`, checked for
    /// type, freeness and adjacency to the consuming patch.
    fn magic_cells(
        &self,
        kind: PhaseKind,
        wanted: impl Fn(Basis) -> Option<MagicState>,
    ) -> Result<BTreeMap<usize, (MagicState, BTreeSet<Cell>)>, EmitError> {
        let empty = Phase::new(kind);
        let phase = self.placement.phase(kind).unwrap_or(&empty);
        let mut out = BTreeMap::new();
        for label in phase.labels() {
            let CellLabel::Magic(state, _) = label else { continue };
            let q = self.qubit(kind, label)?;
            let expected = self.p.measurements[q].as_ref().and_then(|m| wanted(m.basis));
            if expected != Some(state) {
                return Err(infeasible(
                    kind,
                    format!("q{} does not consume a |{}⟩ state here", self.display(q), state.symbol()),
                ));
            }
            if out.contains_key(&q) {
                return Err(infeasible(kind, format!("q{} is given two magic states", self.display(q))));
            }
            let cells: BTreeSet<Cell> = phase.cells_of(label).into_iter().collect();
            self.require_free(kind, &cells, &[])?;
            if !is_connected(&cells) || !touching(&cells, &self.live[&self.data(q)]) {
                return Err(EmitError::NotAdjacent {
                    phase: kind.name(),
                    qubit: self.display(q),
                });
            }
            out.insert(q, (state, cells));
        }
        for (q, m) in self.p.measurements.iter().enumerate() {
            if m.as_ref().is_some_and(|m| wanted(m.basis).is_some()) && !out.contains_key(&q) {
                return Err(infeasible(kind, format!("no magic state placed for q{}", self.display(q))));
            }
        }
        Ok(out)
    }

    fn add_rule(&mut self, rule: CorrectionRule) -> ScheduledOp {
        self.sched.corrections.push(rule);
        SurgeryOp::ConditionalCorrect {
            rule: self.sched.corrections.len() - 1,
        }
        .into()
    }

    /// Phase-state injection followed by a smooth merge into `q`'s patch.
    /// Returns the (inject, merge) operations.
    fn inject_and_merge(
        &mut self,
        q: usize,
        state: MagicState,
        cells: BTreeSet<Cell>,
        condition: Vec<Trigger>,
        outcome: Trigger,
    ) -> (ScheduledOp, ScheduledOp) {
        let data = self.data(q);
        let magic = self.fresh(None, cells.clone());
        let inject = ScheduledOp {
            op: SurgeryOp::Inject {
                cells: cells.iter().copied().collect(),
                patch: magic,
                state,
                consumer: q,
            },
            condition: condition.clone(),
        };
        let mut region = self.live[&data].clone();
        region.extend(cells);
        self.live.remove(&magic);
        self.live.insert(data, region.clone());
        let merge = ScheduledOp {
            op: SurgeryOp::SmoothMerge {
                cells: region.into_iter().collect(),
                patch: data,
                merged: vec![magic, data],
                outcomes: vec![outcome],
            },
            condition,
        };
        (inject, merge)
    }

    fn injections(&mut self) -> Result<(), EmitError> {
        let first = self.magic_cells(PhaseKind::Inject, |b| match b {
            Basis::Y => Some(MagicState::Y),
            Basis::A => Some(MagicState::A),
            _ => None,
        })?;
        if first.is_empty() {
            if self.placement.phase(PhaseKind::Correct).is_some_and(|p| !p.cells.is_empty()) {
                return Err(infeasible(PhaseKind::Correct, "corrective states without injections".into()));
            }
            return Ok(());
        }
        let (mut injects, mut merges) = (Vec::new(), Vec::new());
        for (q, (state, cells)) in first {
            let (i, m) = self.inject_and_merge(q, state, cells, Vec::new(), Trigger::Injection(q));
            injects.push(i);
            merges.push(m);
            let fixes: &[Action] = match state {
                MagicState::Y => &[Action::TrackX, Action::TrackZ],
                MagicState::A => &[Action::TrackX],
            };
            for &action in fixes {
                let op = self.add_rule(CorrectionRule::new(vec![Trigger::Injection(q)], action, q));
                merges.push(op);
            }
        }
        self.push_step(injects);
        self.push_step(merges);

        // The A-state merge may leave a P to undo, applied by a conditional |Y⟩ merge.
        let second = self.magic_cells(PhaseKind::Correct, |b| (b == Basis::A).then_some(MagicState::Y))?;
        if second.is_empty() {
            return Ok(());
        }
        let (mut injects, mut merges) = (Vec::new(), Vec::new());
        for (q, (state, cells)) in second {
            let (i, m) = self.inject_and_merge(q, state, cells, vec![Trigger::Injection(q)], Trigger::Corrective(q));
            injects.push(i);
            merges.push(m);
            for action in [Action::TrackX, Action::TrackZ] {
                let op = self.add_rule(CorrectionRule::new(vec![Trigger::Corrective(q)], action, q));
                merges.push(op);
            }
        }
        self.push_step(injects);
        self.push_step(merges);
        Ok(())
    }

    /// Readout layers: a qubit is read once everything it depends on (its
    /// feed-forward sources and the triggers of corrections aimed at it) is known.
    fn readout(&mut self) -> Result<(), EmitError> {
        let n = self.p.num_qubits;
        let measured: Vec<bool> = self.p.measurements.iter().map(|m| m.is_some()).collect();
        let program_rules: Vec<(usize, CorrectionRule)> =
            self.sched.corrections.iter().cloned().enumerate().take(self.given_rules).collect();
        let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (q, m) in self.p.measurements.iter().enumerate() {
            if let Some(m) = m {
                deps[q].extend(m.conditioned_on.iter().copied());
            }
        }
        for (_, rule) in &program_rules {
            for t in &rule.triggers {
                if let Trigger::Measurement(s) = *t {
                    if s >= n || !measured[s] {
                        return Err(infeasible(
                            PhaseKind::Correct,
                            format!("a correction waits on q{}, which is never measured", s + self.p.base),
                        ));
                    }
                    if rule.qubit < n {
                        deps[rule.qubit].insert(s);
                    }
                }
            }
        }
        for (q, d) in deps.iter().enumerate() {
            if let Some(&s) = d.iter().find(|&&s| s >= n || !measured[s]) {
                return Err(infeasible(
                    PhaseKind::Correct,
                    format!("q{} depends on q{}, which is never measured", q + self.p.base, s + self.p.base),
                ));
            }
        }
        // Longest-path layering over the dependency graph.
        let mut layer: Vec<Option<usize>> = vec![None; n];
        let mut remaining: Vec<usize> = (0..n).filter(|&q| measured[q]).collect();
        while !remaining.is_empty() {
            let before = remaining.len();
            remaining.retain(|&q| {
                if deps[q].iter().all(|&s| layer[s].is_some()) {
                    layer[q] = Some(deps[q].iter().map(|&s| layer[s].unwrap() + 1).max().unwrap_or(0));
                    false
                } else {
                    true
                }
            });
            if remaining.len() == before {
                return Err(EmitError::FeedForwardCycle(remaining.iter().map(|&q| q + self.p.base).collect()));
            }
        }
        let layers = layer.iter().flatten().map(|&l| l + 1).max().unwrap_or(0);
        let mut steps: Vec<Vec<ScheduledOp>> = vec![Vec::new(); layers];
        for (q, m) in self.p.measurements.iter().enumerate() {
            let (Some(m), Some(l)) = (m, layer[q]) else { continue };
            let id = self.data(q);
            let basis = if m.basis == Basis::Z { ReadoutBasis::Z } else { ReadoutBasis::X };
            steps[l].push(
                SurgeryOp::Measure {
                    cells: self.live[&id].iter().copied().collect(),
                    patch: id,
                    basis,
                }
                .into(),
            );
        }
        for (idx, rule) in program_rules {
            let at = rule
                .triggers
                .iter()
                .filter_map(|t| match *t {
                    Trigger::Measurement(s) => layer[s],
                    _ => None,
                })
                .max();
            let op: ScheduledOp = SurgeryOp::ConditionalCorrect { rule: idx }.into();
            match at {
                Some(l) => steps[l].push(op),
                None if layers > 0 => steps[0].insert(0, op),
                None => steps.push(vec![op]),
            }
        }
        for step in steps {
            self.push_step(step);
        }
        Ok(())
    }
}

/// Edge-connected components of a cell set.
fn components(cells: &BTreeSet<Cell>) -> Vec<BTreeSet<Cell>> {
    let mut left = cells.clone();
    let mut out = Vec::new();
    while let Some(&start) = left.iter().next() {
        let mut comp = BTreeSet::from([start]);
        let mut stack = vec![start];
        left.remove(&start);
        while let Some(c) = stack.pop() {
            for nb in super::neighbours(c) {
                if left.remove(&nb) {
                    comp.insert(nb);
                    stack.push(nb);
                }
            }
        }
        out.push(comp);
    }
    out
}
