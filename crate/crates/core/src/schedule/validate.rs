//! Structural checks on a schedule, independent of how it was produced.
//!
//! The checker replays the schedule on an occupancy map. Conditional operations
//! are treated as if they run, which over-approximates every branch.

use std::collections::{BTreeMap, BTreeSet};

use crate::icm::Trigger;

use super::{is_connected, is_unit_shift, Cell, PatchId, SurgeryOp, SurgerySchedule};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleViolation {
    #[error("step {step}: cell ({}, {}) is outside the grid", .cell.0, .cell.1)]
    OutOfGrid { step: usize, cell: Cell },
    #[error("step {step}: cell ({}, {}) is used by two operations", .cell.0, .cell.1)]
    Overlap { step: usize, cell: Cell },
    #[error("step {step}: cell ({}, {}) is held by another patch", .cell.0, .cell.1)]
    Occupied { step: usize, cell: Cell },
    #[error("step {step}: patch {patch} is not live")]
    UnknownPatch { step: usize, patch: PatchId },
    #[error("step {step}: patch id {patch} is reused")]
    ReusedPatch { step: usize, patch: PatchId },
    #[error("step {step}: cells of the operation disagree with patch {patch}")]
    CellMismatch { step: usize, patch: PatchId },
    #[error("step {step}: patch {patch} is not connected")]
    Disconnected { step: usize, patch: PatchId },
    #[error("step {step}: merge into patch {patch} joins non-adjacent patches")]
    NotAdjacent { step: usize, patch: PatchId },
    #[error("step {step}: merge into patch {patch} names the wrong number of outcomes")]
    OutcomeCount { step: usize, patch: PatchId },
    #[error("step {step}: patch {patch} does not move by exactly one cell")]
    BadMove { step: usize, patch: PatchId },
    #[error("step {step}: measured patch {patch} encodes no circuit qubit")]
    UnknownQubit { step: usize, patch: PatchId },
    #[error("step {step}: trigger {trigger} is used before it is produced")]
    TriggerNotReady { step: usize, trigger: Trigger },
    #[error("step {step}: correction rule {rule} does not exist")]
    UnknownRule { step: usize, rule: usize },
}

struct Checker<'a> {
    s: &'a SurgerySchedule,
    live: BTreeMap<PatchId, BTreeSet<Cell>>,
    seen: BTreeSet<PatchId>,
    ready: BTreeSet<Trigger>,
    out: Vec<ScheduleViolation>,
    step: usize,
}

/// Returns every violation found; an empty list means the schedule is well formed.
pub fn validate_schedule(s: &SurgerySchedule) -> Vec<ScheduleViolation> {
    let mut c = Checker {
        s,
        live: BTreeMap::new(),
        seen: BTreeSet::new(),
        ready: BTreeSet::new(),
        out: Vec::new(),
        step: 0,
    };
    for (step, ops) in s.steps.iter().enumerate() {
        c.step = step;
        let mut used: BTreeSet<Cell> = BTreeSet::new();
        for sop in ops {
            for &cell in sop.op.cells() {
                if cell.0 >= s.grid.0 || cell.1 >= s.grid.1 {
                    c.out.push(ScheduleViolation::OutOfGrid { step, cell });
                }
                if !used.insert(cell) {
                    c.out.push(ScheduleViolation::Overlap { step, cell });
                }
            }
            for &t in &sop.condition {
                c.need(t);
            }
            c.apply(&sop.op);
        }
    }
    c.out
}

impl Checker<'_> {
    fn need(&mut self, trigger: Trigger) {
        if !self.ready.contains(&trigger) {
            self.out.push(ScheduleViolation::TriggerNotReady { step: self.step, trigger });
        }
    }

    fn owner(&self, cell: Cell) -> Option<PatchId> {
        self.live.iter().find(|(_, cells)| cells.contains(&cell)).map(|(&id, _)| id)
    }

    /// Reports cells held by live patches other than `allowed`.
    fn require_free(&mut self, cells: &BTreeSet<Cell>, allowed: &[PatchId]) {
        for &cell in cells {
            if self.owner(cell).is_some_and(|id| !allowed.contains(&id)) {
                self.out.push(ScheduleViolation::Occupied { step: self.step, cell });
            }
        }
    }

    fn create(&mut self, patch: PatchId, cells: BTreeSet<Cell>) {
        if !self.seen.insert(patch) {
            self.out.push(ScheduleViolation::ReusedPatch { step: self.step, patch });
        }
        self.require_free(&cells, &[]);
        if !is_connected(&cells) {
            self.out.push(ScheduleViolation::Disconnected { step: self.step, patch });
        }
        self.live.insert(patch, cells);
    }

    fn cells_of(&mut self, patch: PatchId) -> Option<BTreeSet<Cell>> {
        let cells = self.live.get(&patch).cloned();
        if cells.is_none() {
            self.out.push(ScheduleViolation::UnknownPatch { step: self.step, patch });
        }
        cells
    }

    fn apply(&mut self, op: &SurgeryOp) {
        let step = self.step;
        let cells: BTreeSet<Cell> = op.cells().iter().copied().collect();
        match op {
            SurgeryOp::InitPlus { patch, .. }
            | SurgeryOp::InitZero { patch, .. }
            | SurgeryOp::Input { patch, .. }
            | SurgeryOp::Inject { patch, .. } => {
                self.create(*patch, cells);
            }
            SurgeryOp::SmoothSplit { patch, parts, .. } | SurgeryOp::RoughSplit { patch, parts, .. } => {
                if let Some(own) = self.cells_of(*patch) {
                    if own != cells {
                        self.out.push(ScheduleViolation::CellMismatch { step, patch: *patch });
                    }
                }
                self.live.remove(patch);
                for part in parts {
                    let pc: BTreeSet<Cell> = part.cells.iter().copied().collect();
                    if !pc.is_subset(&cells) {
                        self.out.push(ScheduleViolation::CellMismatch { step, patch: part.patch });
                    }
                    self.create(part.patch, pc);
                }
            }
            SurgeryOp::RoughMerge {
                patch, merged, outcomes, ..
            }
            | SurgeryOp::SmoothMerge {
                patch, merged, outcomes, ..
            } => {
                if !outcomes.is_empty() && outcomes.len() + 1 != merged.len() {
                    self.out.push(ScheduleViolation::OutcomeCount { step, patch: *patch });
                }
                if !merged.contains(patch) {
                    self.out.push(ScheduleViolation::UnknownPatch { step, patch: *patch });
                }
                for id in merged {
                    if let Some(own) = self.cells_of(*id) {
                        if !own.is_subset(&cells) {
                            self.out.push(ScheduleViolation::CellMismatch { step, patch: *id });
                        }
                    }
                }
                self.require_free(&cells, merged);
                if !is_connected(&cells) {
                    self.out.push(ScheduleViolation::NotAdjacent { step, patch: *patch });
                }
                for id in merged {
                    self.live.remove(id);
                }
                self.live.insert(*patch, cells);
                self.ready.extend(outcomes.iter().copied());
            }
            SurgeryOp::Move { patch, .. } => {
                if let Some(own) = self.cells_of(*patch) {
                    if !is_unit_shift(&own, &cells) {
                        self.out.push(ScheduleViolation::BadMove { step, patch: *patch });
                    }
                    self.require_free(&cells, &[*patch]);
                    self.live.insert(*patch, cells);
                }
            }
            SurgeryOp::Shrink { patch, .. } | SurgeryOp::Grow { patch, .. } => {
                if let Some(own) = self.cells_of(*patch) {
                    let ok = if matches!(op, SurgeryOp::Shrink { .. }) {
                        cells.is_subset(&own)
                    } else {
                        own.is_subset(&cells)
                    };
                    if !ok {
                        self.out.push(ScheduleViolation::CellMismatch { step, patch: *patch });
                    }
                    if !is_connected(&cells) {
                        self.out.push(ScheduleViolation::Disconnected { step, patch: *patch });
                    }
                    self.require_free(&cells, &[*patch]);
                    self.live.insert(*patch, cells);
                }
            }
            SurgeryOp::Measure { patch, .. } => {
                if let Some(own) = self.cells_of(*patch) {
                    if own != cells {
                        self.out.push(ScheduleViolation::CellMismatch { step, patch: *patch });
                    }
                }
                self.live.remove(patch);
                match self.s.qubit_map.get(patch) {
                    Some(&q) => {
                        self.ready.insert(Trigger::Measurement(q));
                    }
                    None => self.out.push(ScheduleViolation::UnknownQubit { step, patch: *patch }),
                }
            }
            SurgeryOp::ConditionalCorrect { rule } => match self.s.corrections.get(*rule) {
                Some(r) => {
                    for &t in &r.triggers {
                        self.need(t);
                    }
                }
                None => self.out.push(ScheduleViolation::UnknownRule { step, rule: *rule }),
            },
        }
    }
}
