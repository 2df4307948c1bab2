//! Timed lattice-surgery schedules on a 2D grid of patch cells.
//!
//! A [`SurgerySchedule`] is a list of timesteps, each a set of [`SurgeryOp`]s that
//! touch disjoint cells. Every timestep costs one logical unit (`d` code cycles).
//! Patches are identified by [`PatchId`]s that are fresh for every patch created
//! by an initialization, split part or injection; merges keep the id of their
//! first operand. `qubit_map` records which circuit qubit each data patch encodes.

mod emit;
mod expand;
mod interpret;
mod placement;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::icm::{CorrectionRule, Trigger};

pub use emit::{emit_schedule, naive_schedule, EmitError};
pub use expand::expand_general_cnot;
pub use interpret::{interpret_prefix, interpret_schedule, simulate_schedule, DenseRun, InterpretError, Interpretation};
pub use placement::{load_placement, naive_layout, CellLabel, Phase, PhaseKind, Placement, PlacementError};
pub use validate::{validate_schedule, ScheduleViolation};

/// Grid coordinates `(row, col)`.
pub type Cell = (usize, usize);

/// Identifier of one patch instance within a schedule.
pub type PatchId = usize;

/// Magic state injected into a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MagicState {
    Y,
    A,
}

impl MagicState {
    pub fn symbol(self) -> char {
        match self {
            MagicState::Y => 'Y',
            MagicState::A => 'A',
        }
    }
}

/// Basis of a destructive patch readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReadoutBasis {
    X,
    Z,
}

/// One product patch of a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub cells: Vec<Cell>,
    pub patch: PatchId,
}

/// A patch operation. `cells` is the set of cells the operation touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SurgeryOp {
    /// Fresh patch in `|+⟩`.
    InitPlus { cells: Vec<Cell>, patch: PatchId },
    /// Fresh patch in `|0⟩`.
    InitZero { cells: Vec<Cell>, patch: PatchId },
    /// Patch carrying an externally supplied state (open fragments only).
    Input { cells: Vec<Cell>, patch: PatchId },
    /// Smooth split of `patch` into `parts`; cells of `patch` outside every part are released.
    SmoothSplit {
        cells: Vec<Cell>,
        patch: PatchId,
        parts: Vec<Part>,
    },
    /// Rough split of `patch` into `parts`.
    RoughSplit {
        cells: Vec<Cell>,
        patch: PatchId,
        parts: Vec<Part>,
    },
    /// Rough merge of `merged` over `cells`, which may include free bridge cells
    /// that are initialized to `|0⟩`. `merged[0]` is the surviving physical patch;
    /// the others are joined into it one by one, `outcomes[i]` naming the parity
    /// outcome of joining `merged[i + 1]`. The result is known as `patch`.
    RoughMerge {
        cells: Vec<Cell>,
        patch: PatchId,
        merged: Vec<PatchId>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        outcomes: Vec<Trigger>,
    },
    /// Smooth merge of `merged`, with the same operand conventions as `RoughMerge`.
    SmoothMerge {
        cells: Vec<Cell>,
        patch: PatchId,
        merged: Vec<PatchId>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        outcomes: Vec<Trigger>,
    },
    /// Moves `patch` one cell: `cells` is the destination.
    Move { cells: Vec<Cell>, patch: PatchId },
    /// Reduces `patch` to `cells`.
    Shrink { cells: Vec<Cell>, patch: PatchId },
    /// Extends `patch` to `cells`.
    Grow { cells: Vec<Cell>, patch: PatchId },
    /// Injects and encodes a magic state consumed by circuit qubit `consumer`.
    Inject {
        cells: Vec<Cell>,
        patch: PatchId,
        state: MagicState,
        consumer: usize,
    },
    /// Destructive readout of `patch`, producing the trigger `m<qubit>`.
    Measure {
        cells: Vec<Cell>,
        patch: PatchId,
        basis: ReadoutBasis,
    },
    /// Applies `corrections[rule]` when its triggers fire.
    ConditionalCorrect { rule: usize },
}

impl SurgeryOp {
    /// Cells the operation touches; empty for purely classical operations.
    pub fn cells(&self) -> &[Cell] {
        match self {
            SurgeryOp::InitPlus { cells, .. }
            | SurgeryOp::InitZero { cells, .. }
            | SurgeryOp::Input { cells, .. }
            | SurgeryOp::SmoothSplit { cells, .. }
            | SurgeryOp::RoughSplit { cells, .. }
            | SurgeryOp::RoughMerge { cells, .. }
            | SurgeryOp::SmoothMerge { cells, .. }
            | SurgeryOp::Move { cells, .. }
            | SurgeryOp::Shrink { cells, .. }
            | SurgeryOp::Grow { cells, .. }
            | SurgeryOp::Inject { cells, .. }
            | SurgeryOp::Measure { cells, .. } => cells,
            SurgeryOp::ConditionalCorrect { .. } => &[],
        }
    }

    /// Short operation name as used in the JSON form.
    pub fn name(&self) -> &'static str {
        match self {
            SurgeryOp::InitPlus { .. } => "init_plus",
            SurgeryOp::InitZero { .. } => "init_zero",
            SurgeryOp::Input { .. } => "input",
            SurgeryOp::SmoothSplit { .. } => "smooth_split",
            SurgeryOp::RoughSplit { .. } => "rough_split",
            SurgeryOp::RoughMerge { .. } => "rough_merge",
            SurgeryOp::SmoothMerge { .. } => "smooth_merge",
            SurgeryOp::Move { .. } => "move",
            SurgeryOp::Shrink { .. } => "shrink",
            SurgeryOp::Grow { .. } => "grow",
            SurgeryOp::Inject { .. } => "inject",
            SurgeryOp::Measure { .. } => "measure",
            SurgeryOp::ConditionalCorrect { .. } => "conditional_correct",
        }
    }
}

/// An operation together with the classical triggers it is conditioned on. An
/// operation with a non-empty condition runs only when the XOR of its triggers is 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledOp {
    #[serde(flatten)]
    pub op: SurgeryOp,
    #[serde(rename = "if", default, skip_serializing_if = "Vec::is_empty")]
    pub condition: Vec<Trigger>,
}

impl From<SurgeryOp> for ScheduledOp {
    fn from(op: SurgeryOp) -> Self {
        ScheduledOp { op, condition: Vec::new() }
    }
}

/// A timed lattice-surgery schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgerySchedule {
    /// `(rows, cols)` of the patch grid.
    pub grid: (usize, usize),
    pub steps: Vec<Vec<ScheduledOp>>,
    pub corrections: Vec<CorrectionRule>,
    /// Data patch → circuit qubit id (0-based).
    pub qubit_map: BTreeMap<PatchId, usize>,
    /// Offset added to qubit ids when they are displayed.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub base: usize,
}

fn is_zero(b: &usize) -> bool {
    *b == 0
}

impl SurgerySchedule {
    pub fn empty(rows: usize, cols: usize) -> Self {
        SurgerySchedule {
            grid: (rows, cols),
            steps: Vec::new(),
            corrections: Vec::new(),
            qubit_map: BTreeMap::new(),
            base: 0,
        }
    }

    pub fn num_timesteps(&self) -> usize {
        self.steps.len()
    }

    /// Number of leading timesteps before the first injection or readout, i.e.
    /// the part of the schedule that prepares the entangled state.
    pub fn entangling_steps(&self) -> usize {
        self.steps
            .iter()
            .position(|step| {
                step.iter()
                    .any(|o| matches!(o.op, SurgeryOp::Inject { .. } | SurgeryOp::Measure { .. }))
            })
            .unwrap_or(self.steps.len())
    }

    /// Every cell touched by any operation.
    pub fn occupied_cells(&self) -> BTreeSet<Cell> {
        self.steps.iter().flatten().flat_map(|o| o.op.cells().iter().copied()).collect()
    }

    /// Largest number of patches alive at once, counted after every operation
    /// (conditional operations are assumed to run). This is the width a dense
    /// simulation of the schedule needs.
    pub fn peak_live_patches(&self) -> usize {
        let (mut live, mut peak) = (0usize, 0usize);
        for sop in self.steps.iter().flatten() {
            match &sop.op {
                SurgeryOp::InitPlus { .. } | SurgeryOp::InitZero { .. } | SurgeryOp::Input { .. } | SurgeryOp::Inject { .. } => live += 1,
                SurgeryOp::SmoothSplit { parts, .. } | SurgeryOp::RoughSplit { parts, .. } => live = live + parts.len() - 1,
                SurgeryOp::RoughMerge { merged, .. } | SurgeryOp::SmoothMerge { merged, .. } => {
                    live = live.saturating_sub(merged.len().saturating_sub(1))
                }
                SurgeryOp::Measure { .. } => live = live.saturating_sub(1),
                SurgeryOp::Move { .. } | SurgeryOp::Shrink { .. } | SurgeryOp::Grow { .. } | SurgeryOp::ConditionalCorrect { .. } => {}
            }
            peak = peak.max(live);
        }
        peak
    }

    /// Canonical JSON form with the fixed field order `grid, steps, corrections, qubit_map`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedules always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Whether `cells` form one edge-connected region.
pub(crate) fn is_connected(cells: &BTreeSet<Cell>) -> bool {
    let Some(&start) = cells.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        for n in neighbours(c) {
            if cells.contains(&n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == cells.len()
}

/// The up-to-four edge neighbours of a cell (without bounds on the high side).
pub(crate) fn neighbours((r, c): Cell) -> impl Iterator<Item = Cell> {
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push((r - 1, c));
    }
    if c > 0 {
        out.push((r, c - 1));
    }
    out.push((r + 1, c));
    out.push((r, c + 1));
    out.into_iter()
}

/// Whether two cell sets share a boundary edge.
pub(crate) fn touching(a: &BTreeSet<Cell>, b: &BTreeSet<Cell>) -> bool {
    a.iter().any(|&c| neighbours(c).any(|n| b.contains(&n)))
}

/// Whether `to` is `from` translated by one cell in a grid direction.
pub(crate) fn is_unit_shift(from: &BTreeSet<Cell>, to: &BTreeSet<Cell>) -> bool {
    let shift = |(r, c): Cell, (dr, dc): (isize, isize)| -> Option<Cell> {
        let (nr, nc) = (r as isize + dr, c as isize + dc);
        (nr >= 0 && nc >= 0).then_some((nr as usize, nc as usize))
    };
    from.len() == to.len()
        && [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .iter()
            .any(|&d| from.iter().all(|&c| shift(c, d).is_some_and(|n| to.contains(&n))))
}
