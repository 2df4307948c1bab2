//! Frame-by-frame pictures of a schedule: the grid after every timestep.
//!
//! Cells show the patch occupying them: `q<k>` for a patch of circuit qubit `k`,
//! `Y<k>`/`A<k>` for a magic state consumed by qubit `k`, `anc` for any other
//! patch and `.` for a free cell. Conditional operations are drawn as if they
//! run. Output is deterministic so it can be compared byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::schedule::{Cell, PatchId, SurgeryOp, SurgerySchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Ascii,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown render format {0:?} (expected ascii or svg)")]
pub struct UnknownFormat(pub String);

impl FromStr for Format {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(Format::Ascii),
            "svg" => Ok(Format::Svg),
            _ => Err(UnknownFormat(s.to_string())),
        }
    }
}

/// What a cell holds after a timestep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellContent {
    Free,
    Qubit(usize),
    Magic(char, usize),
    Ancilla,
}

impl CellContent {
    fn label(&self) -> String {
        match self {
            CellContent::Free => ".".into(),
            CellContent::Qubit(k) => format!("q{k}"),
            CellContent::Magic(m, k) => format!("{m}{k}"),
            CellContent::Ancilla => "anc".into(),
        }
    }
}

/// The grid after one timestep, with a summary of the operations it ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    /// 1-based timestep number.
    pub step: usize,
    /// Operation names with multiplicities, in order of first appearance.
    pub ops: Vec<(String, usize)>,
    /// `cells[row][col]`.
    pub cells: Vec<Vec<CellContent>>,
}

impl Frame {
    fn title(&self, total: usize) -> String {
        let ops: Vec<String> = self
            .ops
            .iter()
            .map(|(name, n)| if *n == 1 { name.clone() } else { format!("{name} x{n}") })
            .collect();
        format!("step {}/{}: {}", self.step, total, ops.join(", "))
    }
}

/// Replays occupancy and returns one frame per timestep.
pub fn frames(s: &SurgerySchedule) -> Vec<Frame> {
    let (rows, cols) = s.grid;
    let mut live: BTreeMap<PatchId, Vec<Cell>> = BTreeMap::new();
    let mut content: BTreeMap<PatchId, CellContent> = BTreeMap::new();
    let label = |id: PatchId| match s.qubit_map.get(&id) {
        Some(&q) => CellContent::Qubit(q + s.base),
        None => CellContent::Ancilla,
    };
    let mut out = Vec::new();
    for (i, step) in s.steps.iter().enumerate() {
        let mut ops: Vec<(String, usize)> = Vec::new();
        for sop in step {
            let name = sop.op.name();
            match ops.iter_mut().find(|(n, _)| n == name) {
                Some((_, count)) => *count += 1,
                None => ops.push((name.to_string(), 1)),
            }
            match &sop.op {
                SurgeryOp::InitPlus { cells, patch } | SurgeryOp::InitZero { cells, patch } | SurgeryOp::Input { cells, patch } => {
                    live.insert(*patch, cells.clone());
                    content.insert(*patch, label(*patch));
                }
                SurgeryOp::Inject {
                    cells,
                    patch,
                    state,
                    consumer,
                } => {
                    live.insert(*patch, cells.clone());
                    content.insert(*patch, CellContent::Magic(state.symbol(), consumer + s.base));
                }
                SurgeryOp::SmoothSplit { patch, parts, .. } | SurgeryOp::RoughSplit { patch, parts, .. } => {
                    live.remove(patch);
                    for part in parts {
                        live.insert(part.patch, part.cells.clone());
                        content.insert(part.patch, label(part.patch));
                    }
                }
                SurgeryOp::RoughMerge { cells, patch, merged, .. } | SurgeryOp::SmoothMerge { cells, patch, merged, .. } => {
                    for id in merged {
                        live.remove(id);
                    }
                    live.insert(*patch, cells.clone());
                    content.entry(*patch).or_insert_with(|| label(*patch));
                }
                SurgeryOp::Move { cells, patch } | SurgeryOp::Shrink { cells, patch } | SurgeryOp::Grow { cells, patch } => {
                    live.insert(*patch, cells.clone());
                }
                SurgeryOp::Measure { patch, .. } => {
                    live.remove(patch);
                }
                SurgeryOp::ConditionalCorrect { .. } => {}
            }
        }
        let mut grid = vec![vec![CellContent::Free; cols]; rows];
        for (id, cells) in &live {
            for &(r, c) in cells {
                if r < rows && c < cols {
                    grid[r][c] = content.get(id).cloned().unwrap_or(CellContent::Ancilla);
                }
            }
        }
        out.push(Frame {
            step: i + 1,
            ops,
            cells: grid,
        });
    }
    out
}

/// Text frames separated by blank lines; every cell label is padded to a common width.
pub fn render_ascii(s: &SurgerySchedule) -> String {
    let frames = frames(s);
    let width = frames
        .iter()
        .flat_map(|f| f.cells.iter().flatten())
        .map(|c| c.label().chars().count())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    for (i, f) in frames.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&f.title(frames.len()));
        out.push('\n');
        for row in &f.cells {
            let line: Vec<String> = row.iter().map(|c| format!("{:<width$}", c.label())).collect();
            out.push_str(line.join(" ").trim_end());
            out.push('\n');
        }
    }
    out
}

const CELL: usize = 40;
const TITLE: usize = 24;
const GAP: usize = 16;

fn fill(c: &CellContent) -> String {
    match c {
        CellContent::Free => "#f4f4f4".into(),
        CellContent::Qubit(k) => format!("hsl({}, 60%, 70%)", (k * 47) % 360),
        CellContent::Magic('Y', _) => "#f2c14e".into(),
        CellContent::Magic(_, _) => "#f08a4b".into(),
        CellContent::Ancilla => "#b0b0b0".into(),
    }
}

/// One SVG document with the frames stacked vertically; flat rectangles and labels.
pub fn render_svg(s: &SurgerySchedule) -> String {
    let frames = frames(s);
    let (rows, cols) = s.grid;
    let frame_h = TITLE + rows * CELL;
    let width = (cols * CELL).max(320);
    let height = frames.len() * (frame_h + GAP);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="12">"#
    );
    for (i, f) in frames.iter().enumerate() {
        let y0 = i * (frame_h + GAP);
        let _ = writeln!(out, r#"<g id="step{}">"#, f.step);
        let _ = writeln!(out, r#"<text x="0" y="{}">{}</text>"#, y0 + 16, f.title(frames.len()));
        for (r, row) in f.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                let (x, y) = (c * CELL, y0 + TITLE + r * CELL);
                let _ = writeln!(
                    out,
                    r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#555"/>"##,
                    fill(cell)
                );
                if *cell != CellContent::Free {
                    let _ = writeln!(
                        out,
                        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                        x + CELL / 2,
                        y + CELL / 2 + 4,
                        cell.label()
                    );
                }
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(s: &SurgerySchedule, format: Format) -> String {
    match format {
        Format::Ascii => render_ascii(s),
        Format::Svg => render_svg(s),
    }
}
