//! Patch placements: where every patch sits in each phase of a schedule.
//!
//! Text format (`#` starts a comment):
//!
//! ```text
//! grid 5 4            # rows cols
//! phase init          # |+⟩ block of each multi-target CNOT, labelled by its control
//! at 1 0 q8
//! phase split         # product patches; unlisted block cells are released
//! at 1 0 q5
//! phase move          # optional, repeatable: patches shifted by one cell
//! phase merge         # merged region of each qubit; extra cells are bridges
//! at 0 0 q5
//! at 0 2 0            # explicit zero-initialized bridge cell
//! phase shrink        # optional: cells each patch keeps
//! phase inject        # magic states next to the qubit that consumes them
//! at 0 0 Y5
//! phase correct       # corrective |Y⟩ states for |A⟩-measured qubits
//! ```
//!
//! Labels use the circuit's displayed qubit numbers: `q<k>` for data patches,
//! `Y<k>`/`A<k>` for magic states consumed by qubit `k`, `0` for a bridge cell,
//! `free` for a released cell.

use std::fmt;

use crate::canon::MultiTargetProgram;
use crate::circuit::Basis;

use super::{Cell, MagicState};

/// Phases of a placement, in the order they must appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhaseKind {
    Init,
    Split,
    Move,
    Merge,
    Shrink,
    Inject,
    Correct,
}

impl PhaseKind {
    pub fn name(self) -> &'static str {
        match self {
            PhaseKind::Init => "init",
            PhaseKind::Split => "split",
            PhaseKind::Move => "move",
            PhaseKind::Merge => "merge",
            PhaseKind::Shrink => "shrink",
            PhaseKind::Inject => "inject",
            PhaseKind::Correct => "correct",
        }
    }

    fn from_name(s: &str) -> Option<PhaseKind> {
        [
            PhaseKind::Init,
            PhaseKind::Split,
            PhaseKind::Move,
            PhaseKind::Merge,
            PhaseKind::Shrink,
            PhaseKind::Inject,
            PhaseKind::Correct,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// Occupant of a cell in one phase, using displayed qubit numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellLabel {
    Qubit(usize),
    Magic(MagicState, usize),
    Zero,
    Free,
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::Qubit(k) => write!(f, "q{k}"),
            CellLabel::Magic(m, k) => write!(f, "{}{k}", m.symbol()),
            CellLabel::Zero => write!(f, "0"),
            CellLabel::Free => write!(f, "free"),
        }
    }
}

impl CellLabel {
    fn parse(s: &str) -> Option<CellLabel> {
        let num = |d: &str| d.parse::<usize>().ok();
        match s {
            "0" => Some(CellLabel::Zero),
            "free" => Some(CellLabel::Free),
            _ => {
                if let Some(d) = s.strip_prefix('q') {
                    num(d).map(CellLabel::Qubit)
                } else if let Some(d) = s.strip_prefix('Y') {
                    num(d).map(|k| CellLabel::Magic(MagicState::Y, k))
                } else if let Some(d) = s.strip_prefix('A') {
                    num(d).map(|k| CellLabel::Magic(MagicState::A, k))
                } else {
                    None
                }
            }
        }
    }

    fn allowed_in(self, kind: PhaseKind) -> bool {
        match self {
            CellLabel::Qubit(_) => !matches!(kind, PhaseKind::Inject | PhaseKind::Correct),
            CellLabel::Magic(MagicState::Y, _) => matches!(kind, PhaseKind::Inject | PhaseKind::Correct),
            CellLabel::Magic(MagicState::A, _) => kind == PhaseKind::Inject,
            CellLabel::Zero => kind == PhaseKind::Merge,
            CellLabel::Free => kind == PhaseKind::Split,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub kind: PhaseKind,
    pub cells: Vec<(Cell, CellLabel)>,
}

impl Phase {
    pub fn new(kind: PhaseKind) -> Self {
        Phase { kind, cells: Vec::new() }
    }

    /// Cells carrying `label`, in listing order.
    pub fn cells_of(&self, label: CellLabel) -> Vec<Cell> {
        self.cells.iter().filter(|(_, l)| *l == label).map(|&(c, _)| c).collect()
    }

    /// Distinct labels in order of first appearance.
    pub fn labels(&self) -> Vec<CellLabel> {
        let mut out: Vec<CellLabel> = Vec::new();
        for &(_, l) in &self.cells {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        out
    }
}

/// A grid together with per-phase cell assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub rows: usize,
    pub cols: usize,
    pub phases: Vec<Phase>,
}

impl Placement {
    pub fn phase(&self, kind: PhaseKind) -> Option<&Phase> {
        self.phases.iter().find(|p| p.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlacementError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("phase {phase}: cell ({}, {}) is assigned twice", .cell.0, .cell.1)]
    Overlap { phase: &'static str, cell: Cell },
}

/// Parses a placement file.
pub fn load_placement(text: &str) -> Result<Placement, PlacementError> {
    let perr = |line: usize, message: String| PlacementError::Parse { line, message };
    let mut grid: Option<(usize, usize)> = None;
    let mut phases: Vec<Phase> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words[0] {
            "grid" => {
                if grid.is_some() {
                    return Err(perr(line, "duplicate `grid` header".into()));
                }
                let dims: Vec<usize> = words[1..].iter().filter_map(|w| w.parse().ok()).collect();
                if words.len() != 3 || dims.len() != 2 || dims[0] == 0 || dims[1] == 0 {
                    return Err(perr(line, "expected `grid <rows> <cols>` with positive sizes".into()));
                }
                grid = Some((dims[0], dims[1]));
            }
            "phase" => {
                if grid.is_none() {
                    return Err(perr(line, "`grid` must come first".into()));
                }
                let kind = words
                    .get(1)
                    .and_then(|w| PhaseKind::from_name(w))
                    .filter(|_| words.len() == 2)
                    .ok_or_else(|| perr(line, format!("unknown phase in {content:?}")))?;
                if let Some(prev) = phases.last() {
                    let repeat_ok = kind == PhaseKind::Move && prev.kind == PhaseKind::Move;
                    if kind < prev.kind || (kind == prev.kind && !repeat_ok) {
                        return Err(perr(
                            line,
                            format!("phase `{}` out of order after `{}`", kind.name(), prev.kind.name()),
                        ));
                    }
                }
                phases.push(Phase::new(kind));
            }
            "at" => {
                let (rows, cols) = grid.ok_or_else(|| perr(line, "`grid` must come first".into()))?;
                let phase = phases.last_mut().ok_or_else(|| perr(line, "`at` outside a phase".into()))?;
                if words.len() != 4 {
                    return Err(perr(line, "expected `at <row> <col> <label>`".into()));
                }
                let r: usize = words[1].parse().map_err(|_| perr(line, format!("bad row {:?}", words[1])))?;
                let c: usize = words[2].parse().map_err(|_| perr(line, format!("bad column {:?}", words[2])))?;
                if r >= rows || c >= cols {
                    return Err(perr(line, format!("cell ({r}, {c}) is outside the {rows}x{cols} grid")));
                }
                let label = CellLabel::parse(words[3]).ok_or_else(|| perr(line, format!("bad label {:?}", words[3])))?;
                if !label.allowed_in(phase.kind) {
                    return Err(perr(line, format!("label {label} is not allowed in phase `{}`", phase.kind.name())));
                }
                if phase.cells.iter().any(|&(cell, _)| cell == (r, c)) {
                    return Err(PlacementError::Overlap {
                        phase: phase.kind.name(),
                        cell: (r, c),
                    });
                }
                phase.cells.push(((r, c), label));
            }
            other => return Err(perr(line, format!("unknown statement {other:?}"))),
        }
    }
    let (rows, cols) = grid.ok_or_else(|| perr(0, "missing `grid` header".into()))?;
    Ok(Placement { rows, cols, phases })
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grid {} {}", self.rows, self.cols)?;
        for phase in &self.phases {
            writeln!(f, "phase {}", phase.kind.name())?;
            for &((r, c), label) in &phase.cells {
                writeln!(f, "at {r} {c} {label}")?;
            }
        }
        Ok(())
    }
}

/// Unoptimized placement: one grid row per circuit qubit and one column per
/// multi-target CNOT.
///
/// Each CNOT's `|+⟩` block fills its whole column and is split into one patch
/// per member, in the member's row. Patches of a qubit are merged along its row,
/// bridging the columns the qubit does not take part in. Qubits outside every
/// CNOT are initialized in the first column of their row during the merge phase.
/// For rotated measurements the qubit shrinks to one end of its row segment and
/// its magic state (and corrective `|Y⟩`) take the neighbouring cells of the row,
/// preferring the right. The grid gets at least two columns when some qubit is
/// measured in the `Y` basis and three for the `A` basis, so there is always room.
pub fn naive_layout(p: &MultiTargetProgram) -> Placement {
    let rows = p.num_qubits.max(1);
    let basis_of = |q: usize| p.measurements.get(q).and_then(|m| m.as_ref()).map(|m| m.basis);
    let room = (0..p.num_qubits)
        .map(|q| match basis_of(q) {
            Some(Basis::Y) => 2,
            Some(Basis::A) => 3,
            _ => 1,
        })
        .max()
        .unwrap_or(1);
    let cols = p.mtcnots.len().max(room);
    let b = p.base;
    let mut init = Phase::new(PhaseKind::Init);
    let mut split = Phase::new(PhaseKind::Split);
    let mut columns_of: Vec<Vec<usize>> = vec![Vec::new(); p.num_qubits];
    for (k, g) in p.mtcnots.iter().enumerate() {
        for r in 0..rows {
            init.cells.push(((r, k), CellLabel::Qubit(g.control + b)));
        }
        let mut members = vec![g.control];
        members.extend(&g.targets);
        members.sort_unstable();
        for &q in &members {
            split.cells.push(((q, k), CellLabel::Qubit(q + b)));
            columns_of[q].push(k);
        }
    }
    let mut merge = Phase::new(PhaseKind::Merge);
    let mut shrink = Phase::new(PhaseKind::Shrink);
    let mut inject = Phase::new(PhaseKind::Inject);
    let mut correct = Phase::new(PhaseKind::Correct);
    for (q, cols_q) in columns_of.iter().enumerate() {
        let label = CellLabel::Qubit(q + b);
        let (lo, hi) = match (cols_q.first(), cols_q.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0, 0),
        };
        if cols_q.len() != 1 {
            for k in lo..=hi {
                merge.cells.push(((q, k), label));
            }
        }
        let magic = match basis_of(q) {
            Some(Basis::Y) => Some(MagicState::Y),
            Some(Basis::A) => Some(MagicState::A),
            _ => None,
        };
        let Some(m) = magic else { continue };
        // Keep one end of the row segment and put the magic state next to it;
        // the corrective |Y⟩ goes beyond either end of the (patch, magic) pair.
        let (keep, spot) = if lo + 1 < cols { (lo, lo + 1) } else { (hi, hi - 1) };
        let (left, right) = (keep.min(spot), keep.max(spot));
        if hi > lo {
            shrink.cells.push(((q, keep), label));
        }
        inject.cells.push(((q, spot), CellLabel::Magic(m, q + b)));
        if m == MagicState::A {
            let y = if right + 1 < cols { right + 1 } else { left - 1 };
            correct.cells.push(((q, y), CellLabel::Magic(MagicState::Y, q + b)));
        }
    }
    let mut phases = Vec::new();
    if !p.mtcnots.is_empty() {
        phases.push(init);
        phases.push(split);
    }
    phases.push(merge);
    for phase in [shrink, inject, correct] {
        if !phase.cells.is_empty() {
            phases.push(phase);
        }
    }
    Placement { rows, cols, phases }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonicalize;
    use crate::circuit::parse_circuit;
    use crate::fixtures;

    fn program(text: &str) -> MultiTargetProgram {
        canonicalize(&parse_circuit(text).unwrap()).unwrap()
    }

    #[test]
    fn parses_phases_and_labels() {
        let p = load_placement("grid 2 3\nphase init\nat 0 0 q1 # block\nphase split\nat 0 0 q1\nat 1 0 free\nphase merge\nat 0 1 0\nphase inject\nat 1 1 A2\n").unwrap();
        assert_eq!((p.rows, p.cols), (2, 3));
        let kinds: Vec<PhaseKind> = p.phases.iter().map(|ph| ph.kind).collect();
        assert_eq!(kinds, vec![PhaseKind::Init, PhaseKind::Split, PhaseKind::Merge, PhaseKind::Inject]);
        assert_eq!(p.phases[1].cells[1], ((1, 0), CellLabel::Free));
        assert_eq!(p.phases[2].cells[0], ((0, 1), CellLabel::Zero));
        assert_eq!(p.phases[3].labels(), vec![CellLabel::Magic(MagicState::A, 2)]);
    }

    #[test]
    fn display_round_trips() {
        for text in [
            fixtures::STEANE_PLACEMENT,
            fixtures::REED_MULLER_PLACEMENT,
            fixtures::BRAVYI_HAAH_PLACEMENT,
        ] {
            let p = load_placement(text).unwrap();
            assert_eq!(load_placement(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn fixture_footprints() {
        let dims = |t| {
            let p = load_placement(t).unwrap();
            (p.rows, p.cols)
        };
        assert_eq!(dims(fixtures::STEANE_PLACEMENT), (5, 4));
        assert_eq!(dims(fixtures::REED_MULLER_PLACEMENT), (12, 5));
        assert_eq!(dims(fixtures::BRAVYI_HAAH_PLACEMENT), (7, 18));
    }

    #[test]
    fn overlap_is_rejected() {
        let err = load_placement("grid 2 2\nphase init\nat 0 0 q1\nat 0 0 q2\n").unwrap_err();
        assert_eq!(
            err,
            PlacementError::Overlap {
                phase: "init",
                cell: (0, 0)
            }
        );
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in [
            "phase init\n",
            "grid 0 2\n",
            "grid 2 2\nat 0 0 q1\n",
            "grid 2 2\nphase init\nat 2 0 q1\n",
            "grid 2 2\nphase init\nat 0 0 x1\n",
            "grid 2 2\nphase merge\nphase init\n",
            "grid 2 2\nphase inject\nat 0 0 q1\n",
            "grid 2 2\nphase correct\nat 0 0 A1\n",
            "grid 2 2\nphase init\nat 0 0 0\n",
            "grid 2 2\nphase warp\n",
            "",
        ] {
            assert!(matches!(load_placement(bad), Err(PlacementError::Parse { .. })), "{bad:?}");
        }
        assert!(load_placement("grid 2 2\nphase move\nphase move\n").is_ok());
    }

    #[test]
    fn naive_layout_has_one_column_per_cnot_and_one_row_per_qubit() {
        let steane = naive_layout(&program(fixtures::STEANE));
        assert_eq!((steane.rows, steane.cols), (8, 4));
        let single = naive_layout(&program("qubits 2\ninit 0 +\ninit 1 0\ncnot 0 -> 1\n"));
        assert_eq!((single.rows, single.cols), (2, 1));
        assert_eq!(
            naive_layout(&program(fixtures::TWO_CNOT)),
            naive_layout(&program(fixtures::TWO_CNOT))
        );
        // Rotated measurements widen the grid until the magic states fit.
        let y = naive_layout(&program("qubits 2\ninit 0 +\ninit 1 0\ncnot 0 -> 1\nmeasure 0 Y\n"));
        assert_eq!(y.cols, 2);
        let a = naive_layout(&program("qubits 1\ninit 0 +\nmeasure 0 A\n"));
        assert_eq!(a.cols, 3);
    }

    #[test]
    fn naive_layout_places_magic_states_beside_their_qubit() {
        let p = naive_layout(&program(fixtures::STEANE));
        let inject = p.phase(PhaseKind::Inject).unwrap();
        assert_eq!(inject.cells.len(), 7);
        assert!(p.phase(PhaseKind::Correct).is_none());
        let rm = naive_layout(&program(fixtures::REED_MULLER));
        assert_eq!(rm.phase(PhaseKind::Inject).unwrap().cells.len(), 15);
        assert_eq!(rm.phase(PhaseKind::Correct).unwrap().cells.len(), 15);
    }
}
