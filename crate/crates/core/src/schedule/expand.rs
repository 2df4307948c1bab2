//! Multi-target CNOT on arbitrary input states through an ancilla column.

use crate::icm::{Action, CorrectionRule, Trigger};

use super::{Cell, Part, ScheduledOp, SurgeryOp, SurgerySchedule};

/// Schedule applying a CNOT from an arbitrary control onto `targets` arbitrary
/// targets.
///
/// Layout on an `(targets + 1) × 3` grid: the control sits at `(0, 0)`, an
/// ancilla column prepared in `|+⟩` fills column 1, and target `k` sits at
/// `(k, 2)`. The ancilla is smooth-merged with the control, which leaves the
/// control state spread over the joint patch; a smooth split then cuts it into a
/// GHZ-type state with one part per row, and part `k` is rough-merged with
/// target `k`. The byproduct of each rough merge is a `Z` on the control, undone
/// by a conditional correction.
///
/// Circuit qubit 0 is the control, qubit `k` is target `k`; all of them are
/// `input` patches, so the schedule is meant for the dense oracle.
///
/// # Panics
/// If `targets` is zero.
pub fn expand_general_cnot(targets: usize) -> SurgerySchedule {
    assert!(targets >= 1, "a CNOT needs at least one target");
    let n = targets;
    let mut s = SurgerySchedule::empty(n + 1, 3);
    let control: usize = 0;
    let ancilla = n + 1;
    let column: Vec<Cell> = (0..=n).map(|r| (r, 1)).collect();

    let mut step0: Vec<ScheduledOp> = vec![SurgeryOp::Input {
        cells: vec![(0, 0)],
        patch: control,
    }
    .into()];
    s.qubit_map.insert(control, 0);
    for k in 1..=n {
        step0.push(
            SurgeryOp::Input {
                cells: vec![(k, 2)],
                patch: k,
            }
            .into(),
        );
        s.qubit_map.insert(k, k);
    }
    step0.push(
        SurgeryOp::InitPlus {
            cells: column.clone(),
            patch: ancilla,
        }
        .into(),
    );
    s.steps.push(step0);

    let mut joint = vec![(0, 0)];
    joint.extend(&column);
    s.steps.push(vec![SurgeryOp::SmoothMerge {
        cells: joint.clone(),
        patch: control,
        merged: vec![control, ancilla],
        outcomes: vec![Trigger::Merge(ancilla)],
    }
    .into()]);

    // Fresh ids: the control's part, then one part per target row.
    let control_part = n + 2;
    let part = |k: usize| n + 2 + k;
    s.qubit_map.insert(control_part, 0);
    let mut parts = vec![Part {
        cells: vec![(0, 0)],
        patch: control_part,
    }];
    for k in 1..=n {
        parts.push(Part {
            cells: vec![(k, 1)],
            patch: part(k),
        });
        s.qubit_map.insert(part(k), k);
    }
    s.steps.push(vec![SurgeryOp::SmoothSplit {
        cells: joint,
        patch: control,
        parts,
    }
    .into()]);

    let mut merges: Vec<ScheduledOp> = Vec::new();
    let mut fixes: Vec<ScheduledOp> = Vec::new();
    for k in 1..=n {
        merges.push(
            SurgeryOp::RoughMerge {
                cells: vec![(k, 1), (k, 2)],
                patch: k,
                merged: vec![k, part(k)],
                outcomes: vec![Trigger::Merge(part(k))],
            }
            .into(),
        );
        s.corrections
            .push(CorrectionRule::new(vec![Trigger::Merge(part(k))], Action::TrackZ, 0));
        fixes.push(
            SurgeryOp::ConditionalCorrect {
                rule: s.corrections.len() - 1,
            }
            .into(),
        );
    }
    merges.extend(fixes);
    s.steps.push(merges);
    s
}
