//! Signed stabilizer matrices and the lattice-surgery rewrite rules acting on them.
//!
//! A [`StabilizerMatrix`] holds a list of pairwise-commuting signed Pauli rows over
//! `n` logical qubits. Splits add a qubit and a row, merges remove one of each, and
//! logical measurements follow the usual stabilizer update. Every state comparison
//! goes through [`StabilizerMatrix::canonical_form`], a reduced row-echelon form that
//! is unique for a given stabilizer group.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Basis, Circuit, InitState, Statement};
use crate::pauli::{Bits, Letter, PauliRow, Sign};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("merge partners must be distinct qubits (got {0} twice)")]
    SameQubit(usize),
    #[error("row has {got} qubits, matrix has {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("inconsistent stabilizer matrix: {0}")]
    Inconsistent(String),
    #[error("forced outcome list exhausted")]
    OutcomesExhausted,
    #[error("forced outcome {forced:?} contradicts deterministic outcome {actual:?}")]
    ImpossibleBranch { forced: Sign, actual: Sign },
    #[error("not a stabilizer operation: {0}")]
    NonStabilizer(String),
    #[error("qubit {0} used before initialization")]
    Uninitialized(usize),
}

/// Result of a joint-parity or single-qubit logical measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeOutcome {
    pub eigenvalue: Sign,
    pub deterministic: bool,
}

/// Where random measurement outcomes come from.
///
/// `AllPlus` selects the `+1` branch for every random outcome. `Seeded` samples
/// uniformly from a reproducible generator. `Forced` supplies outcomes in order;
/// for deterministic measurements a forced value is checked against the actual one.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // built once per run; boxing the generator buys nothing
pub enum Outcomes {
    AllPlus,
    Seeded(ChaCha8Rng),
    Forced {
        queue: VecDeque<Sign>,
        /// When true, deterministic measurements also consume (and check) a value.
        include_deterministic: bool,
    },
}

impl Default for Outcomes {
    fn default() -> Self {
        Outcomes::seeded(0)
    }
}

impl Outcomes {
    pub fn seeded(seed: u64) -> Self {
        Outcomes::Seeded(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Forced outcomes consumed only by random measurements.
    pub fn forced(outcomes: impl IntoIterator<Item = Sign>) -> Self {
        Outcomes::Forced {
            queue: outcomes.into_iter().collect(),
            include_deterministic: false,
        }
    }

    fn random(&mut self) -> Result<Sign, EngineError> {
        match self {
            Outcomes::AllPlus => Ok(Sign::Plus),
            Outcomes::Seeded(rng) => Ok(Sign::from_bit(rng.gen::<bool>())),
            Outcomes::Forced { queue, .. } => queue.pop_front().ok_or(EngineError::OutcomesExhausted),
        }
    }

    fn deterministic(&mut self, actual: Sign) -> Result<(), EngineError> {
        if let Outcomes::Forced {
            queue,
            include_deterministic: true,
        } = self
        {
            let forced = queue.pop_front().ok_or(EngineError::OutcomesExhausted)?;
            if forced != actual {
                return Err(EngineError::ImpossibleBranch { forced, actual });
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerMatrix {
    n: usize,
    rows: Vec<PauliRow>,
}

impl StabilizerMatrix {
    /// The matrix over zero qubits with no rows.
    pub fn empty() -> Self {
        StabilizerMatrix { n: 0, rows: Vec::new() }
    }

    /// Builds a matrix from rows, checking widths and pairwise commutation.
    pub fn from_rows(n: usize, rows: Vec<PauliRow>) -> Result<Self, EngineError> {
        for row in &rows {
            if row.num_qubits() != n {
                return Err(EngineError::WidthMismatch {
                    expected: n,
                    got: row.num_qubits(),
                });
            }
        }
        let m = StabilizerMatrix { n, rows };
        m.check_commuting()?;
        Ok(m)
    }

    /// Parses rows such as `["ZZZ", "XXI", "-IXX"]`.
    pub fn parse(rows: &[&str]) -> Result<Self, EngineError> {
        let parsed: Vec<PauliRow> = rows
            .iter()
            .map(|r| PauliRow::parse(r).ok_or_else(|| EngineError::Inconsistent(format!("bad row {r:?}"))))
            .collect::<Result<_, _>>()?;
        let n = parsed.first().map_or(0, |r| r.num_qubits());
        StabilizerMatrix::from_rows(n, parsed)
    }

    /// Product state where qubit `q` is the `+1` eigenstate of `letters[q]`.
    pub fn product(letters: &[Letter]) -> Self {
        let n = letters.len();
        let rows = letters.iter().enumerate().map(|(q, &l)| PauliRow::single(n, q, l)).collect();
        StabilizerMatrix { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliRow] {
        &self.rows
    }

    fn check_index(&self, q: usize) -> Result<(), EngineError> {
        if q >= self.n {
            Err(EngineError::IndexOutOfRange { index: q, n: self.n })
        } else {
            Ok(())
        }
    }

    fn check_commuting(&self) -> Result<(), EngineError> {
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(EngineError::Inconsistent(format!("rows {a} and {b} anticommute")));
                }
            }
        }
        Ok(())
    }

    /// Appends a fresh qubit in the `+1` eigenstate of `letter` as the last column.
    pub fn push_qubit(&mut self, letter: Letter) {
        let n = self.n;
        for row in &mut self.rows {
            *row = row.inserted(n, Letter::I);
        }
        self.n += 1;
        self.rows.push(PauliRow::single(self.n, n, letter));
    }

    /// Inserts a fresh qubit in the `+1` eigenstate of `letter` at column `at`.
    pub fn insert_qubit(&mut self, at: usize, letter: Letter) -> Result<(), EngineError> {
        if at > self.n {
            return Err(EngineError::IndexOutOfRange { index: at, n: self.n });
        }
        for row in &mut self.rows {
            *row = row.inserted(at, Letter::I);
        }
        self.n += 1;
        self.rows.push(PauliRow::single(self.n, at, letter));
        Ok(())
    }

    /// Tensor product `self ⊗ other`, with `other`'s qubits appended after `self`'s.
    pub fn tensor(&self, other: &StabilizerMatrix) -> StabilizerMatrix {
        let n = self.n + other.n;
        let mut rows = Vec::with_capacity(self.rows.len() + other.rows.len());
        for r in &self.rows {
            let mut x: Vec<bool> = r.x.iter().collect();
            let mut z: Vec<bool> = r.z.iter().collect();
            x.resize(n, false);
            z.resize(n, false);
            rows.push(PauliRow {
                x: Bits::from_bools(&x),
                z: Bits::from_bools(&z),
                sign: r.sign,
            });
        }
        for r in &other.rows {
            let mut x = vec![false; self.n];
            let mut z = vec![false; self.n];
            x.extend(r.x.iter());
            z.extend(r.z.iter());
            rows.push(PauliRow {
                x: Bits::from_bools(&x),
                z: Bits::from_bools(&z),
                sign: r.sign,
            });
        }
        StabilizerMatrix { n, rows }
    }

    /// Reorders qubits so that new column `i` is old column `perm[i]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> StabilizerMatrix {
        assert_eq!(perm.len(), self.n);
        StabilizerMatrix {
            n: self.n,
            rows: self.rows.iter().map(|r| r.permuted(perm)).collect(),
        }
    }

    // ---- Clifford gates ------------------------------------------------------

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), EngineError> {
        self.check_index(control)?;
        self.check_index(target)?;
        if control == target {
            return Err(EngineError::SameQubit(control));
        }
        for row in &mut self.rows {
            let (xc, zc, xt, zt) = (row.x.get(control), row.z.get(control), row.x.get(target), row.z.get(target));
            if xc && zt && (xt == zc) {
                row.sign = row.sign.flipped();
            }
            row.x.set(target, xt ^ xc);
            row.z.set(control, zc ^ zt);
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<(), EngineError> {
        self.check_index(q)?;
        for row in &mut self.rows {
            let (x, z) = (row.x.get(q), row.z.get(q));
            if x && z {
                row.sign = row.sign.flipped();
            }
            row.x.set(q, z);
            row.z.set(q, x);
        }
        Ok(())
    }

    /// Phase gate `P = diag(1, i)`.
    pub fn apply_p(&mut self, q: usize) -> Result<(), EngineError> {
        self.check_index(q)?;
        for row in &mut self.rows {
            let (x, z) = (row.x.get(q), row.z.get(q));
            if x && z {
                row.sign = row.sign.flipped();
            }
            row.z.set(q, z ^ x);
        }
        Ok(())
    }

    /// Conjugates the state by a Pauli operator (signs of anticommuting rows flip).
    pub fn apply_pauli(&mut self, pauli: &PauliRow) -> Result<(), EngineError> {
        if pauli.num_qubits() != self.n {
            return Err(EngineError::WidthMismatch {
                expected: self.n,
                got: pauli.num_qubits(),
            });
        }
        for row in &mut self.rows {
            if !row.commutes_with(pauli) {
                row.sign = row.sign.flipped();
            }
        }
        Ok(())
    }

    pub fn apply_single_pauli(&mut self, q: usize, letter: Letter) -> Result<(), EngineError> {
        self.check_index(q)?;
        let p = PauliRow::single(self.n, q, letter);
        self.apply_pauli(&p)
    }

    // ---- canonical form and span queries ---------------------------------------

    /// Unique reduced row-echelon form over the column order `[X-block | Z-block]`.
    ///
    /// Dependent rows are dropped; a dependent row that reduces to `-I` means the
    /// matrix does not describe a state and is reported as inconsistent.
    pub fn canonical_form(&self) -> Result<StabilizerMatrix, EngineError> {
        self.check_commuting()?;
        let mut rows = self.rows.clone();
        let rank = reduce(&mut rows, self.n);
        for r in &rows[rank..] {
            if r.sign.is_minus() {
                return Err(EngineError::Inconsistent("rows generate -I".into()));
            }
        }
        rows.truncate(rank);
        Ok(StabilizerMatrix { n: self.n, rows })
    }

    /// Whether both matrices describe the same stabilizer group.
    pub fn same_state(&self, other: &StabilizerMatrix) -> Result<bool, EngineError> {
        Ok(self.canonical_form()? == other.canonical_form()?)
    }

    /// Number of independent generators.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        reduce(&mut rows, self.n)
    }

    /// If `±target` lies in the row span, returns the sign it carries in the group.
    pub fn span_sign(&self, target: &PauliRow) -> Option<Sign> {
        let mut rows = self.rows.clone();
        let rank = reduce(&mut rows, self.n);
        let mut residual = target.clone();
        residual.sign = Sign::Plus;
        let mut acc = PauliRow::identity(self.n);
        for row in &rows[..rank] {
            let pivot = pivot_col(row, self.n).expect("nonzero row has a pivot");
            if col_bit(&residual, self.n, pivot) {
                residual.x.xor_assign(&row.x);
                residual.z.xor_assign(&row.z);
                acc.mul_assign(row);
            }
        }
        if residual.is_identity() {
            Some(acc.sign * target.sign)
        } else {
            None
        }
    }

    /// Pauli operator `F` (on `self.n` qubits) such that `F · other · F = self`,
    /// if the two matrices share the same unsigned stabilizer group.
    pub fn pauli_frame_to(&self, other: &StabilizerMatrix) -> Result<Option<PauliRow>, EngineError> {
        let a = self.canonical_form()?;
        let b = other.canonical_form()?;
        if a.n != b.n || a.rows.len() != b.rows.len() {
            return Ok(None);
        }
        let n = a.n;
        let mut equations: Vec<(Bits, bool)> = Vec::with_capacity(a.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            if ra.x != rb.x || ra.z != rb.z {
                return Ok(None);
            }
            // Unknown F = (fx | fz); anticommutation with row r is r.x·fz + r.z·fx.
            let mut coeffs = Bits::zeros(2 * n);
            for q in 0..n {
                coeffs.set(q, ra.z.get(q));
                coeffs.set(n + q, ra.x.get(q));
            }
            equations.push((coeffs, ra.sign != rb.sign));
        }
        let solution = solve_gf2(equations, 2 * n).expect("rows are independent so the system is solvable");
        let mut f = PauliRow::identity(n);
        for q in 0..n {
            f.x.set(q, solution.get(q));
            f.z.set(q, solution.get(n + q));
        }
        Ok(Some(f))
    }

    // ---- measurement -----------------------------------------------------------

    /// Measures the Pauli `observable` and returns the outcome together with the index
    /// of a row equal to `eigenvalue · observable`.
    fn measure_pinned(&mut self, observable: &PauliRow, outcomes: &mut Outcomes) -> Result<(MergeOutcome, usize), EngineError> {
        let mut observable = observable.clone();
        observable.sign = Sign::Plus;
        if let Some(p) = self.rows.iter().position(|r| !r.commutes_with(&observable)) {
            let pivot = self.rows[p].clone();
            for (j, row) in self.rows.iter_mut().enumerate() {
                if j != p && !row.commutes_with(&observable) {
                    row.mul_assign(&pivot);
                }
            }
            let eigenvalue = outcomes.random()?;
            observable.sign = eigenvalue;
            self.rows[p] = observable;
            return Ok((
                MergeOutcome {
                    eigenvalue,
                    deterministic: false,
                },
                p,
            ));
        }
        let (eigenvalue, deterministic) = match self.span_sign(&observable) {
            Some(sign) => {
                outcomes.deterministic(sign)?;
                (sign, true)
            }
            None => (outcomes.random()?, false),
        };
        observable.sign = eigenvalue;
        self.rows.push(observable);
        Ok((MergeOutcome { eigenvalue, deterministic }, self.rows.len() - 1))
    }

    /// Measures an arbitrary Pauli observable without removing any qubit.
    pub fn measure_pauli(&mut self, observable: &PauliRow, outcomes: &mut Outcomes) -> Result<MergeOutcome, EngineError> {
        if observable.num_qubits() != self.n {
            return Err(EngineError::WidthMismatch {
                expected: self.n,
                got: observable.num_qubits(),
            });
        }
        let (outcome, _) = self.measure_pinned(observable, outcomes)?;
        self.drop_trivial_rows()?;
        Ok(outcome)
    }

    /// Measures qubit `q` in the eigenbasis of `basis` (X, Y or Z).
    ///
    /// With `discard` the measured qubit's column is removed afterwards, leaving the
    /// state of the remaining qubits.
    pub fn measure_logical(
        &mut self,
        q: usize,
        basis: Letter,
        discard: bool,
        outcomes: &mut Outcomes,
    ) -> Result<MergeOutcome, EngineError> {
        self.check_index(q)?;
        assert!(basis != Letter::I, "measurement basis must be X, Y or Z");
        let observable = PauliRow::single(self.n, q, basis);
        let (outcome, idx) = self.measure_pinned(&observable, outcomes)?;
        if discard {
            self.clear_column_with(idx, |row| row.x.get(q) || row.z.get(q));
            self.rows.swap_remove(idx);
            self.remove_column(q);
        }
        self.drop_trivial_rows()?;
        Ok(outcome)
    }

    /// Multiplies row `idx` into every other row selected by `hit`.
    fn clear_column_with(&mut self, idx: usize, hit: impl Fn(&PauliRow) -> bool) {
        let pivot = self.rows[idx].clone();
        for (j, row) in self.rows.iter_mut().enumerate() {
            if j != idx && hit(row) {
                row.mul_assign(&pivot);
            }
        }
    }

    fn remove_column(&mut self, q: usize) {
        for row in &mut self.rows {
            *row = row.removed(q);
        }
        self.n -= 1;
    }

    /// Removes identity rows, reporting `-I` as an inconsistency.
    fn drop_trivial_rows(&mut self) -> Result<(), EngineError> {
        if let Some(bad) = self.rows.iter().find(|r| r.is_identity() && r.sign.is_minus()) {
            return Err(EngineError::Inconsistent(format!("row {bad} is -I")));
        }
        self.rows.retain(|r| !r.is_identity());
        Ok(())
    }

    // ---- splits and merges -----------------------------------------------------

    /// Smooth split of qubit `q`: a new qubit is inserted at `q + 1`, every row's
    /// X component on `q` is copied onto it, and the row `Z_q Z_{q+1}` is added.
    pub fn smooth_split(&mut self, q: usize) -> Result<(), EngineError> {
        self.split(q, true)
    }

    /// Rough split of qubit `q`: the X↔Z dual of [`Self::smooth_split`].
    pub fn rough_split(&mut self, q: usize) -> Result<(), EngineError> {
        self.split(q, false)
    }

    fn split(&mut self, q: usize, smooth: bool) -> Result<(), EngineError> {
        self.check_index(q)?;
        for row in &mut self.rows {
            let copied = if smooth {
                if row.x.get(q) {
                    Letter::X
                } else {
                    Letter::I
                }
            } else if row.z.get(q) {
                Letter::Z
            } else {
                Letter::I
            };
            *row = row.inserted(q + 1, copied);
        }
        self.n += 1;
        let link = if smooth { Letter::Z } else { Letter::X };
        self.rows.push(PauliRow::on(self.n, &[q, q + 1], link));
        Ok(())
    }

    /// Rough merge measuring `X_{q1} X_{q2}`.
    ///
    /// Column `q1` is removed and the merged qubit continues as `q2` (whose index
    /// shifts down by one when `q2 > q1`). In terms of basis states the merge maps
    /// `|i, j⟩ ↦ (−1)^{M·i} |i ⊕ j⟩` where `(−1)^M` is the returned eigenvalue.
    pub fn rough_merge(&mut self, q1: usize, q2: usize, outcomes: &mut Outcomes) -> Result<MergeOutcome, EngineError> {
        self.merge(q1, q2, Letter::X, outcomes)
    }

    /// Smooth merge measuring `Z_{q1} Z_{q2}`; the X↔Z dual of [`Self::rough_merge`].
    pub fn smooth_merge(&mut self, q1: usize, q2: usize, outcomes: &mut Outcomes) -> Result<MergeOutcome, EngineError> {
        self.merge(q1, q2, Letter::Z, outcomes)
    }

    fn merge(&mut self, q1: usize, q2: usize, letter: Letter, outcomes: &mut Outcomes) -> Result<MergeOutcome, EngineError> {
        self.check_index(q1)?;
        self.check_index(q2)?;
        if q1 == q2 {
            return Err(EngineError::SameQubit(q1));
        }
        let observable = PauliRow::on(self.n, &[q1, q2], letter);
        let (outcome, idx) = self.measure_pinned(&observable, outcomes)?;
        let rough = letter == Letter::X;
        self.clear_column_with(idx, |row| if rough { row.x.get(q1) } else { row.z.get(q1) });
        self.rows.swap_remove(idx);
        // Every remaining row commutes with the measured parity, so its component on
        // q1 is either identity or the dual letter shared with q2; dropping q1 then
        // carries the joint operator onto the merged qubit.
        for row in &self.rows {
            let (a, b) = if rough {
                (row.z.get(q1), row.z.get(q2))
            } else {
                (row.x.get(q1), row.x.get(q2))
            };
            if a != b {
                return Err(EngineError::Inconsistent("merge left an unpaired operator".into()));
            }
        }
        self.remove_column(q1);
        self.drop_trivial_rows()?;
        Ok(outcome)
    }

    /// Grid notation: one line per generator with a leading sign.
    pub fn to_grid(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&row.to_string());
            out.push('\n');
        }
        out
    }

    /// Whether every row is purely X-type or purely Z-type.
    pub fn is_css(&self) -> bool {
        self.rows.iter().all(|r| r.is_x_type() || r.is_z_type())
    }
}

impl fmt::Debug for StabilizerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StabilizerMatrix({} qubits) [", self.n)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for StabilizerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_grid())
    }
}

/// Outcome of one measurement statement when a circuit is run on the tableau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordedMeasurement {
    pub qubit: usize,
    pub basis: Basis,
    /// Outcome bit: `false` for outcome 0.
    pub bit: bool,
    pub deterministic: bool,
}

fn init_letter(qubit: usize, state: InitState) -> Result<Letter, EngineError> {
    match state {
        InitState::Zero => Ok(Letter::Z),
        InitState::Plus => Ok(Letter::X),
        InitState::Y => Ok(Letter::Y),
        InitState::A => Err(EngineError::NonStabilizer(format!("qubit {qubit} initialized to |A⟩"))),
    }
}

/// Stabilizer state prepared by a circuit's initializations and CNOTs, ignoring
/// measurements. Columns follow circuit qubit ids.
pub fn circuit_state(c: &Circuit) -> Result<StabilizerMatrix, EngineError> {
    let (state, _) = run_circuit(&c.without_measurements(), &mut Outcomes::AllPlus)?;
    Ok(state)
}

/// Runs a circuit on the tableau, measuring and discarding measured qubits.
///
/// X and Z measurements are direct; a Y measurement is the phase gate followed by
/// an X measurement, so outcome 0 corresponds to the `−1` eigenvalue of Y. A
/// rotated `|A⟩` preparation or A-basis measurement is not a stabilizer operation.
/// The returned matrix covers the unmeasured qubits in id order.
pub fn run_circuit(c: &Circuit, outcomes: &mut Outcomes) -> Result<(StabilizerMatrix, Vec<RecordedMeasurement>), EngineError> {
    let mut state = StabilizerMatrix::empty();
    let mut alive: Vec<usize> = Vec::new();
    let mut record = Vec::new();
    let pos_of = |alive: &[usize], q: usize| alive.iter().position(|&a| a == q).ok_or(EngineError::Uninitialized(q));
    for s in &c.statements {
        match s {
            Statement::Input(q) => {
                return Err(EngineError::NonStabilizer(format!("qubit {q} is an open input")));
            }
            Statement::Init(q, st) => {
                state.push_qubit(init_letter(*q, *st)?);
                alive.push(*q);
            }
            Statement::Cnot(g) => {
                let cp = pos_of(&alive, g.control)?;
                for &t in &g.targets {
                    state.apply_cnot(cp, pos_of(&alive, t)?)?;
                }
            }
            Statement::Measure(q, m) => {
                let pos = pos_of(&alive, *q)?;
                let letter = match m.basis {
                    Basis::X => Letter::X,
                    Basis::Z => Letter::Z,
                    Basis::Y => {
                        state.apply_p(pos)?;
                        Letter::X
                    }
                    Basis::A => return Err(EngineError::NonStabilizer(format!("qubit {q} measured in the A basis"))),
                };
                let out = state.measure_logical(pos, letter, true, outcomes)?;
                alive.remove(pos);
                record.push(RecordedMeasurement {
                    qubit: *q,
                    basis: m.basis,
                    bit: out.eigenvalue.is_minus(),
                    deterministic: out.deterministic,
                });
            }
        }
    }
    let mut order: Vec<usize> = (0..alive.len()).collect();
    order.sort_by_key(|&i| alive[i]);
    Ok((state.permute_qubits(&order), record))
}

#[inline]
fn col_bit(row: &PauliRow, n: usize, col: usize) -> bool {
    if col < n {
        row.x.get(col)
    } else {
        row.z.get(col - n)
    }
}

fn pivot_col(row: &PauliRow, n: usize) -> Option<usize> {
    (0..2 * n).find(|&c| col_bit(row, n, c))
}

/// In-place reduced row echelon form with sign tracking; returns the rank.
/// Rows past the rank are identities (possibly signed).
fn reduce(rows: &mut [PauliRow], n: usize) -> usize {
    let mut rank = 0;
    for col in 0..2 * n {
        if rank == rows.len() {
            break;
        }
        let Some(p) = (rank..rows.len()).find(|&r| col_bit(&rows[r], n, col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (j, row) in rows.iter_mut().enumerate() {
            if j != rank && col_bit(row, n, col) {
                row.mul_assign(&pivot);
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `A·v = b` over GF(2) for equations `(row of A, b)`; any solution is returned.
pub(crate) fn solve_gf2(mut equations: Vec<(Bits, bool)>, width: usize) -> Option<Bits> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..equations.len()).find(|&r| equations[r].0.get(col)) else {
            continue;
        };
        equations.swap(rank, p);
        let (pivot_row, pivot_rhs) = equations[rank].clone();
        for (j, (row, rhs)) in equations.iter_mut().enumerate() {
            if j != rank && row.get(col) {
                row.xor_assign(&pivot_row);
                *rhs ^= pivot_rhs;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if equations[rank..].iter().any(|(_, rhs)| *rhs) {
        return None;
    }
    let mut solution = Bits::zeros(width);
    for (i, &col) in pivots.iter().enumerate() {
        solution.set(col, equations[i].1);
    }
    Some(solution)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&str]) -> StabilizerMatrix {
        StabilizerMatrix::parse(rows).unwrap()
    }

    fn canon(rows: &[&str]) -> StabilizerMatrix {
        m(rows).canonical_form().unwrap()
    }

    #[test]
    fn smooth_split_of_plus_gives_bell_pair() {
        let mut s = StabilizerMatrix::product(&[Letter::X]);
        s.smooth_split(0).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["XX", "ZZ"]));
    }

    #[test]
    fn smooth_split_of_zero_keeps_zero() {
        let mut s = StabilizerMatrix::product(&[Letter::Z]);
        s.smooth_split(0).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["ZI", "ZZ"]));
    }

    #[test]
    fn rough_split_cases() {
        let mut s = StabilizerMatrix::product(&[Letter::Z]);
        s.rough_split(0).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["ZZ", "XX"]));
        let mut s = StabilizerMatrix::product(&[Letter::X]);
        s.rough_split(0).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["XI", "XX"]));
    }

    #[test]
    fn splitting_a_bell_pair_gives_ghz() {
        let mut s = m(&["XX", "ZZ"]);
        s.smooth_split(1).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["XXX", "ZZI", "IZZ"]));
    }

    #[test]
    fn merging_middle_qubits_of_two_bell_pairs() {
        let mut s = m(&["XXII", "ZZII", "IIXX", "IIZZ"]);
        let out = s.rough_merge(1, 2, &mut Outcomes::AllPlus).unwrap();
        assert!(!out.deterministic);
        assert_eq!(out.eigenvalue, Sign::Plus);
        assert_eq!(s.canonical_form().unwrap(), canon(&["ZZZ", "XXI", "IXX"]));

        // The other branch differs only by a Pauli frame.
        let mut t = m(&["XXII", "ZZII", "IIXX", "IIZZ"]);
        t.rough_merge(1, 2, &mut Outcomes::forced([Sign::Minus])).unwrap();
        assert!(!t.same_state(&s).unwrap());
        assert!(s.pauli_frame_to(&t).unwrap().is_some());
    }

    #[test]
    fn smooth_merge_is_dual_of_rough_merge() {
        let mut s = m(&["ZZII", "XXII", "IIZZ", "IIXX"]);
        s.smooth_merge(1, 2, &mut Outcomes::AllPlus).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["XXX", "ZZI", "IZZ"]));
    }

    #[test]
    fn merging_plus_states() {
        let mut s = StabilizerMatrix::product(&[Letter::X, Letter::X]);
        let out = s.rough_merge(0, 1, &mut Outcomes::seeded(3)).unwrap();
        assert_eq!(
            out,
            MergeOutcome {
                eigenvalue: Sign::Plus,
                deterministic: true
            }
        );
        assert_eq!(s.canonical_form().unwrap(), canon(&["X"]));

        let mut s = StabilizerMatrix::product(&[Letter::Z, Letter::Z]);
        let out = s.smooth_merge(0, 1, &mut Outcomes::seeded(3)).unwrap();
        assert!(out.deterministic);
        assert_eq!(s.canonical_form().unwrap(), canon(&["Z"]));
    }

    #[test]
    fn rough_merge_with_zero_keeps_partner() {
        for partner in [Letter::X, Letter::Y, Letter::Z] {
            let mut s = StabilizerMatrix::product(&[Letter::Z, partner]);
            let out = s.rough_merge(0, 1, &mut Outcomes::AllPlus).unwrap();
            assert!(!out.deterministic);
            assert_eq!(s.canonical_form().unwrap(), StabilizerMatrix::product(&[partner]));
        }
    }

    #[test]
    fn minus_outcome_flips_dropped_x() {
        // |+⟩|−⟩ measured with XX gives −1 deterministically; the survivor is |−⟩.
        let mut s = m(&["XI", "-IX"]);
        let out = s.rough_merge(0, 1, &mut Outcomes::AllPlus).unwrap();
        assert_eq!(
            out,
            MergeOutcome {
                eigenvalue: Sign::Minus,
                deterministic: true
            }
        );
        assert_eq!(s.canonical_form().unwrap(), canon(&["-X"]));
    }

    #[test]
    fn canonical_form_is_row_span_invariant() {
        let a = canon(&["ZZZ", "XXI", "IXX"]);
        let b = canon(&["XIX", "IXX", "ZZZ"]);
        assert_eq!(a, b);
        assert_eq!(a.canonical_form().unwrap(), a);
        assert_eq!(canon(&["XX", "ZZ"]), m(&["XX", "ZZ"]));
    }

    #[test]
    fn canonical_form_rejects_anticommuting_rows() {
        assert!(StabilizerMatrix::parse(&["XI", "ZI"]).is_err());
    }

    #[test]
    fn measure_x_on_plus_is_deterministic() {
        let mut s = StabilizerMatrix::product(&[Letter::X]);
        let out = s.measure_logical(0, Letter::X, false, &mut Outcomes::seeded(0)).unwrap();
        assert_eq!(
            out,
            MergeOutcome {
                eigenvalue: Sign::Plus,
                deterministic: true
            }
        );
    }

    #[test]
    fn measure_z_on_plus_is_random_and_reproducible() {
        let run = |seed| {
            let mut s = StabilizerMatrix::product(&[Letter::X]);
            s.measure_logical(0, Letter::Z, false, &mut Outcomes::seeded(seed)).unwrap()
        };
        let first: Vec<_> = (0..16).map(run).collect();
        let second: Vec<_> = (0..16).map(run).collect();
        assert_eq!(first, second);
        assert!(first.iter().all(|o| !o.deterministic));
        assert!(first.iter().any(|o| o.eigenvalue == Sign::Plus));
        assert!(first.iter().any(|o| o.eigenvalue == Sign::Minus));
    }

    #[test]
    fn discarding_a_measured_ghz_qubit() {
        let mut s = m(&["XXX", "ZZI", "IZZ"]);
        let out = s.measure_logical(0, Letter::X, true, &mut Outcomes::forced([Sign::Minus])).unwrap();
        assert!(!out.deterministic);
        assert_eq!(s.canonical_form().unwrap(), canon(&["-XX", "ZZ"]));
    }

    #[test]
    fn cnot_and_phase_gates() {
        let mut s = StabilizerMatrix::product(&[Letter::X, Letter::Z]);
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["XX", "ZZ"]));
        let mut s = StabilizerMatrix::product(&[Letter::X]);
        s.apply_p(0).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["Y"]));
        s.apply_p(0).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["-X"]));
        s.apply_h(0).unwrap();
        assert_eq!(s.canonical_form().unwrap(), canon(&["-Z"]));
    }

    #[test]
    fn pauli_frame_between_branches() {
        let a = m(&["XX", "ZZ"]);
        let b = m(&["-XX", "ZZ"]);
        let f = a.pauli_frame_to(&b).unwrap().unwrap();
        let mut fixed = b.clone();
        fixed.apply_pauli(&f).unwrap();
        assert!(fixed.same_state(&a).unwrap());
        assert!(a.pauli_frame_to(&m(&["XX", "YY"])).unwrap().is_some());
        assert_eq!(a.pauli_frame_to(&m(&["XI", "IX"])).unwrap(), None);
    }

    #[test]
    fn circuit_semantics_on_the_tableau() {
        let c = crate::circuit::parse_circuit("qubits 3\ninit 0 +\ninit 1 0\ninit 2 +\ncnot 0 -> 1\ncnot 2 -> 1").unwrap();
        assert!(circuit_state(&c).unwrap().same_state(&m(&["ZZZ", "XXI", "IXX"])).unwrap());

        // P|Y⟩ = |−⟩, so |Y⟩ gives outcome 1 under the phase-then-X convention.
        let y = crate::circuit::parse_circuit("qubits 1\ninit 0 Y\nmeasure 0 Y").unwrap();
        let (_, rec) = run_circuit(&y, &mut Outcomes::AllPlus).unwrap();
        assert!(rec[0].bit);
        assert!(rec[0].deterministic);

        let a = crate::circuit::parse_circuit("qubits 1\ninit 0 A").unwrap();
        assert!(matches!(circuit_state(&a), Err(EngineError::NonStabilizer(_))));
    }

    #[test]
    fn span_sign_reports_membership() {
        let s = m(&["XX", "ZZ"]);
        assert_eq!(s.span_sign(&PauliRow::parse("YY").unwrap()), Some(Sign::Minus));
        assert_eq!(s.span_sign(&PauliRow::parse("XI").unwrap()), None);
    }
}
