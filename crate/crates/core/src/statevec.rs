//! Dense state-vector oracle for small systems.
//!
//! Positions are ordered left to right: in a basis label `|b0 b1 … b(n-1)⟩`,
//! position 0 is the most significant bit of the amplitude index. Merges and
//! measurements are applied as the literal (unnormalized) linear maps, so branch
//! maps can be compared for proportionality; call [`StateVector::normalized`] to
//! obtain the physical state.

use num_complex::Complex64;

use crate::circuit::{Basis, Circuit, InitState, Statement};
use crate::pauli::Sign;

/// Largest number of simultaneously live qubits the oracle accepts.
pub const MAX_DENSE_QUBITS: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DenseError {
    #[error("dense oracle limited to {MAX_DENSE_QUBITS} live qubits, needed {0}")]
    TooLarge(usize),
    #[error("requested branch has probability zero")]
    ProbabilityZero,
    #[error("phase {0} does not have unit modulus")]
    NotUnitPhase(Complex64),
    #[error("position {pos} out of range for {n} qubits")]
    OutOfRange { pos: usize, n: usize },
    #[error("branch has {got} outcomes, circuit measures {expected} qubits")]
    BranchLength { expected: usize, got: usize },
    #[error("input state has {got} qubits, circuit declares {expected} inputs")]
    InputWidth { expected: usize, got: usize },
    #[error("qubit {0} used before initialization")]
    Uninitialized(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Single-qubit state `(|0⟩ + e^{iθ}|1⟩)/√2`.
pub fn phase_state(theta: f64) -> [Complex64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [Complex64::new(s, 0.0), Complex64::from_polar(s, theta)]
}

/// Single-qubit amplitudes for an initialization.
pub fn init_amplitudes(state: InitState) -> [Complex64; 2] {
    match state {
        InitState::Zero => [ONE, ZERO],
        InitState::Plus => phase_state(0.0),
        InitState::Y => phase_state(std::f64::consts::FRAC_PI_2),
        InitState::A => phase_state(std::f64::consts::FRAC_PI_4),
    }
}

/// Basis state selected by `outcome` (`false` ↔ outcome 0) for a measurement.
///
/// A rotated (Y or A) measurement is the phase gate `diag(1, e^{iθ})` followed by
/// an X measurement, so outcome 0 selects `(|0⟩ + e^{−iθ}|1⟩)/√2`.
pub fn measurement_ket(basis: Basis, outcome: bool) -> [Complex64; 2] {
    let flip = if outcome { std::f64::consts::PI } else { 0.0 };
    match basis {
        Basis::Z => {
            if outcome {
                [ZERO, ONE]
            } else {
                [ONE, ZERO]
            }
        }
        Basis::X => phase_state(flip),
        Basis::Y | Basis::A => phase_state(flip - basis.theta().unwrap()),
    }
}

impl StateVector {
    /// The zero-qubit state (the scalar 1).
    pub fn scalar() -> Self {
        StateVector { n: 0, amps: vec![ONE] }
    }

    /// `|0…0⟩` on `n` qubits.
    pub fn zeros(n: usize) -> Result<Self, DenseError> {
        if n > MAX_DENSE_QUBITS {
            return Err(DenseError::TooLarge(n));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(StateVector { n, amps })
    }

    /// Computational basis state given by a string of `0`/`1`.
    pub fn ket(bits: &str) -> Result<Self, DenseError> {
        let n = bits.len();
        let mut v = StateVector::zeros(n)?;
        v.amps[0] = ZERO;
        v.amps[usize::from_str_radix(bits, 2).unwrap_or(0)] = ONE;
        Ok(v)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, DenseError> {
        assert!(amps.len().is_power_of_two(), "amplitude count must be a power of two");
        let n = amps.len().trailing_zeros() as usize;
        if n > MAX_DENSE_QUBITS {
            return Err(DenseError::TooLarge(n));
        }
        Ok(StateVector { n, amps })
    }

    /// Product state of single-qubit amplitude pairs.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self, DenseError> {
        let mut v = StateVector::scalar();
        for q in qubits {
            v.push_qubit(*q)?;
        }
        Ok(v)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &str) -> Complex64 {
        self.amps[usize::from_str_radix(bits, 2).expect("binary label")]
    }

    #[inline]
    fn mask(&self, pos: usize) -> usize {
        1 << (self.n - 1 - pos)
    }

    fn check(&self, pos: usize) -> Result<(), DenseError> {
        if pos >= self.n {
            Err(DenseError::OutOfRange { pos, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<StateVector, DenseError> {
        let norm = self.norm_sqr().sqrt();
        if norm < 1e-12 {
            return Err(DenseError::ProbabilityZero);
        }
        Ok(StateVector {
            n: self.n,
            amps: self.amps.iter().map(|a| a / norm).collect(),
        })
    }

    /// Inserts a fresh qubit with the given amplitudes at position `pos`.
    pub fn insert_qubit(&mut self, pos: usize, state: [Complex64; 2]) -> Result<(), DenseError> {
        if pos > self.n {
            return Err(DenseError::OutOfRange { pos, n: self.n });
        }
        if self.n + 1 > MAX_DENSE_QUBITS {
            return Err(DenseError::TooLarge(self.n + 1));
        }
        let n = self.n + 1;
        let low_bits = n - 1 - pos;
        let mut amps = vec![ZERO; 1 << n];
        for (old, &a) in self.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let high = old >> low_bits;
            let low = old & ((1 << low_bits) - 1);
            for (b, &s) in state.iter().enumerate() {
                amps[(high << (low_bits + 1)) | (b << low_bits) | low] = a * s;
            }
        }
        self.n = n;
        self.amps = amps;
        Ok(())
    }

    pub fn push_qubit(&mut self, state: [Complex64; 2]) -> Result<(), DenseError> {
        self.insert_qubit(self.n, state)
    }

    /// Contracts position `pos` with `⟨ket|` and removes it (no renormalization).
    pub fn project(&mut self, pos: usize, ket: [Complex64; 2]) -> Result<(), DenseError> {
        self.check(pos)?;
        let n = self.n - 1;
        let low_bits = n - pos;
        let bra = [ket[0].conj(), ket[1].conj()];
        let mut amps = vec![ZERO; 1 << n];
        for (new, slot) in amps.iter_mut().enumerate() {
            let high = new >> low_bits;
            let low = new & ((1 << low_bits) - 1);
            let i0 = (high << (low_bits + 1)) | low;
            let i1 = i0 | (1 << low_bits);
            *slot = bra[0] * self.amps[i0] + bra[1] * self.amps[i1];
        }
        self.n = n;
        self.amps = amps;
        Ok(())
    }

    /// Measures position `pos` in `basis`, keeping the branch selected by `outcome`
    /// and removing the qubit. Returns the branch probability (relative to the
    /// current norm); the state is left unnormalized.
    pub fn measure(&mut self, pos: usize, basis: Basis, outcome: bool) -> Result<f64, DenseError> {
        let before = self.norm_sqr();
        self.project(pos, measurement_ket(basis, outcome))?;
        Ok(if before > 0.0 { self.norm_sqr() / before } else { 0.0 })
    }

    pub fn apply_single(&mut self, pos: usize, u: [[Complex64; 2]; 2]) -> Result<(), DenseError> {
        self.check(pos)?;
        let m = self.mask(pos);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | m] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_x(&mut self, pos: usize) -> Result<(), DenseError> {
        self.apply_single(pos, [[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn apply_z(&mut self, pos: usize) -> Result<(), DenseError> {
        self.apply_phase(pos, -ONE)
    }

    /// `diag(1, p)` on position `pos`.
    pub fn apply_phase(&mut self, pos: usize, p: Complex64) -> Result<(), DenseError> {
        self.apply_single(pos, [[ONE, ZERO], [ZERO, p]])
    }

    pub fn apply_h(&mut self, pos: usize) -> Result<(), DenseError> {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(pos, [[s, s], [s, -s]])
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), DenseError> {
        self.check(control)?;
        self.check(target)?;
        assert_ne!(control, target, "CNOT control equals target");
        let (mc, mt) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amps.swap(i, i | mt);
            }
        }
        Ok(())
    }

    /// Reorders positions so that new position `i` holds old position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> StateVector {
        assert_eq!(perm.len(), self.n);
        let mut amps = vec![ZERO; self.amps.len()];
        for (old, &a) in self.amps.iter().enumerate() {
            let mut new = 0;
            for (i, &p) in perm.iter().enumerate() {
                if old & self.mask(p) != 0 {
                    new |= 1 << (self.n - 1 - i);
                }
            }
            amps[new] = a;
        }
        StateVector { n: self.n, amps }
    }

    /// `α|0⟩ + β|1⟩ ↦ α|00⟩ + β|11⟩`, new qubit at `pos + 1`.
    pub fn smooth_split(&mut self, pos: usize) -> Result<(), DenseError> {
        self.check(pos)?;
        self.insert_qubit(pos + 1, [ONE, ZERO])?;
        self.apply_cnot(pos, pos + 1)
    }

    /// `a|+⟩ + b|−⟩ ↦ a|++⟩ + b|−−⟩`, new qubit at `pos + 1`.
    pub fn rough_split(&mut self, pos: usize) -> Result<(), DenseError> {
        self.apply_h(pos)?;
        self.smooth_split(pos)?;
        self.apply_h(pos)?;
        self.apply_h(pos + 1)
    }

    /// Rough merge with outcome `(−1)^M`: `|i, j⟩ ↦ (−1)^{M·i} |i ⊕ j⟩`, where `i` is
    /// the bit of `q1` (removed) and `j` the bit of `q2` (kept). Unnormalized.
    pub fn rough_merge(&mut self, q1: usize, q2: usize, outcome: Sign) -> Result<(), DenseError> {
        self.check(q1)?;
        self.check(q2)?;
        assert_ne!(q1, q2, "merge partners must differ");
        let (m1, m2) = (self.mask(q1), self.mask(q2));
        let sign = if outcome.is_minus() { -ONE } else { ONE };
        let mut next = self.amps.clone();
        for (i, slot) in next.iter_mut().enumerate() {
            if i & m1 == 0 {
                // Result stored with q1 = 0: combine |0, j⟩ and (−1)^M |1, j⊕1⟩.
                *slot = self.amps[i] + sign * self.amps[(i | m1) ^ m2];
            }
        }
        self.amps = next;
        self.project(q1, [ONE, ZERO])
    }

    /// Smooth merge with outcome `(−1)^M`: the rough merge in the `±` basis.
    pub fn smooth_merge(&mut self, q1: usize, q2: usize, outcome: Sign) -> Result<(), DenseError> {
        self.apply_h(q1)?;
        self.apply_h(q2)?;
        self.rough_merge(q1, q2, outcome)?;
        let kept = if q2 > q1 { q2 - 1 } else { q2 };
        self.apply_h(kept)
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// If `other = c · self` for some scalar `c`, returns `c`.
    pub fn proportionality(&self, other: &StateVector, tol: f64) -> Option<Complex64> {
        if self.n != other.n {
            return None;
        }
        let pivot = (0..self.amps.len()).max_by(|&a, &b| self.amps[a].norm_sqr().total_cmp(&self.amps[b].norm_sqr()))?;
        let c = if self.amps[pivot].norm() < tol {
            if other.norm_sqr().sqrt() < tol {
                return Some(ZERO);
            }
            return None;
        } else {
            other.amps[pivot] / self.amps[pivot]
        };
        let ok = self.amps.iter().zip(&other.amps).all(|(a, b)| (a * c - b).norm() <= tol);
        ok.then_some(c)
    }

    /// Equality up to a global phase for normalized states.
    pub fn approx_eq_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        match self.proportionality(other, tol) {
            Some(c) => (c.norm() - 1.0).abs() <= tol,
            None => false,
        }
    }
}

/// Correction left behind by a phase-state merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseCorrection {
    None,
    /// Pauli X followed by Pauli Z (the `p = i` case).
    XThenZ,
    /// Pauli X followed by the phase gate `P` (the `p = e^{iπ/4}` case).
    XThenP,
    /// Pauli X followed by `diag(1, phase)` for any other phase.
    XThenPhase(Complex64),
}

impl PhaseCorrection {
    /// Applies the correction to position `pos`.
    pub fn apply(self, v: &mut StateVector, pos: usize) -> Result<(), DenseError> {
        match self {
            PhaseCorrection::None => Ok(()),
            PhaseCorrection::XThenZ => {
                v.apply_x(pos)?;
                v.apply_z(pos)
            }
            PhaseCorrection::XThenP => {
                v.apply_x(pos)?;
                v.apply_phase(pos, Complex64::i())
            }
            PhaseCorrection::XThenPhase(p) => {
                v.apply_x(pos)?;
                v.apply_phase(pos, p)
            }
        }
    }
}

/// Smooth merge of the phase state `|0⟩ + p|1⟩` into qubit `target`.
///
/// The phase patch is the surviving qubit and takes `target`'s position. For
/// outcome `+1` the target's `α|0⟩ + β|1⟩` becomes `α|0⟩ + pβ|1⟩`; for `−1` it
/// becomes `β|0⟩ + pα|1⟩`, which the returned correction maps back to the
/// `+1` branch up to global phase. The returned state is normalized.
pub fn phase_merge(v: &StateVector, target: usize, p: Complex64, outcome: Sign) -> Result<(StateVector, PhaseCorrection), DenseError> {
    if (p.norm() - 1.0).abs() > 1e-12 {
        return Err(DenseError::NotUnitPhase(p));
    }
    v.check(target)?;
    let mut w = v.clone();
    w.insert_qubit(target, [ONE, p])?;
    w.smooth_merge(target + 1, target, outcome)?;
    let correction = if !outcome.is_minus() {
        PhaseCorrection::None
    } else if (p - Complex64::i()).norm() < 1e-12 {
        PhaseCorrection::XThenZ
    } else if (p - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-12 {
        PhaseCorrection::XThenP
    } else {
        PhaseCorrection::XThenPhase(p * p)
    };
    Ok((w.normalized()?, correction))
}

/// Runs a circuit on a dense vector along one measurement branch.
///
/// `inputs` holds the joint state of the circuit's declared input qubits in id
/// order. `branch[k]` is the outcome bit (`true` ↔ eigenvalue −1) of the k-th
/// measurement statement. The result is the unnormalized state of the unmeasured
/// qubits in id order, so that branch maps stay linear in the input.
pub fn run_circuit(c: &Circuit, inputs: &StateVector, branch: &[bool]) -> Result<StateVector, DenseError> {
    let input_ids = c.inputs();
    if inputs.num_qubits() != input_ids.len() {
        return Err(DenseError::InputWidth {
            expected: input_ids.len(),
            got: inputs.num_qubits(),
        });
    }
    let measured = c.statements.iter().filter(|s| matches!(s, Statement::Measure(..))).count();
    if branch.len() != measured {
        return Err(DenseError::BranchLength {
            expected: measured,
            got: branch.len(),
        });
    }
    // Inputs occupy the first positions in declaration order.
    let mut alive: Vec<usize> = input_ids.clone();
    let mut v = inputs.clone();
    let mut outcomes = branch.iter();
    let pos_of = |alive: &[usize], q: usize| alive.iter().position(|&a| a == q).ok_or(DenseError::Uninitialized(q));
    for s in &c.statements {
        match s {
            Statement::Input(_) => {}
            Statement::Init(q, st) => {
                v.push_qubit(init_amplitudes(*st))?;
                alive.push(*q);
            }
            Statement::Cnot(g) => {
                let cpos = pos_of(&alive, g.control)?;
                for &t in &g.targets {
                    let tpos = pos_of(&alive, t)?;
                    v.apply_cnot(cpos, tpos)?;
                }
            }
            Statement::Measure(q, m) => {
                let pos = pos_of(&alive, *q)?;
                v.measure(pos, m.basis, *outcomes.next().unwrap())?;
                alive.remove(pos);
            }
        }
    }
    let mut order: Vec<usize> = (0..alive.len()).collect();
    order.sort_by_key(|&i| alive[i]);
    Ok(v.permuted(&order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &StateVector, b: &StateVector) -> bool {
        a.proportionality(b, 1e-12).is_some_and(|k| (k - ONE).norm() < 1e-12)
    }

    #[test]
    fn two_cnot_example_state() {
        let circ = parse_circuit("qubits 3\ninit 0 +\ninit 1 0\ninit 2 +\ncnot 0 -> 1\ncnot 2 -> 1").unwrap();
        let v = run_circuit(&circ, &StateVector::scalar(), &[]).unwrap();
        for label in ["000", "110", "011", "101"] {
            assert!((v.amplitude(label) - c(0.5, 0.0)).norm() < 1e-12);
        }
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_splits_and_a_merge_match_the_circuit() {
        let plus = phase_state(0.0);
        let mut v = StateVector::product(&[plus, plus]).unwrap();
        v.smooth_split(1).unwrap();
        v.smooth_split(0).unwrap();
        // Positions now: a a' b b'; merge a' into b.
        v.rough_merge(1, 2, Sign::Plus).unwrap();
        let v = v.normalized().unwrap();
        let circ = parse_circuit("qubits 3\ninit 0 +\ninit 1 0\ninit 2 +\ncnot 0 -> 1\ncnot 2 -> 1").unwrap();
        let want = run_circuit(&circ, &StateVector::scalar(), &[]).unwrap();
        assert!(close(&v, &want));
    }

    #[test]
    fn rough_split_matches_displayed_state() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let mut v = StateVector::product(&[[a, b]]).unwrap();
        v.rough_split(0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = StateVector::from_amplitudes(vec![a * s, b * s, b * s, a * s]).unwrap();
        assert!(close(&v, &want));
    }

    #[test]
    fn rough_merge_formula() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let (a2, b2) = (c(0.28, 0.96), c(0.0, 0.0));
        let (a2, b2) = (a2 * 0.6, c(0.8, 0.0) + b2);
        for outcome in [Sign::Plus, Sign::Minus] {
            let mut v = StateVector::product(&[[a, b], [a2, b2]]).unwrap();
            v.rough_merge(0, 1, outcome).unwrap();
            let s = if outcome.is_minus() { -ONE } else { ONE };
            // α|φ⟩ + (−1)^M β σx|φ⟩
            let want = StateVector::from_amplitudes(vec![a * a2 + s * b * b2, a * b2 + s * b * a2]).unwrap();
            assert!(close(&v, &want));
        }
    }

    #[test]
    fn rough_merge_with_zero_is_identity() {
        let phi = [c(0.6, 0.0), c(0.0, 0.8)];
        let mut v = StateVector::product(&[[ONE, ZERO], phi]).unwrap();
        v.rough_merge(0, 1, Sign::Plus).unwrap();
        assert!(close(&v, &StateVector::product(&[phi]).unwrap()));
    }

    #[test]
    fn phase_merge_cases() {
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let v = StateVector::product(&[[alpha, beta]]).unwrap();
        let p = Complex64::i();
        let (w, corr) = phase_merge(&v, 0, p, Sign::Plus).unwrap();
        assert_eq!(corr, PhaseCorrection::None);
        assert!(close(&w, &StateVector::product(&[[alpha, p * beta]]).unwrap()));
        let (w, corr) = phase_merge(&v, 0, p, Sign::Minus).unwrap();
        assert_eq!(corr, PhaseCorrection::XThenZ);
        assert!(w.approx_eq_up_to_phase(&StateVector::product(&[[beta, p * alpha]]).unwrap(), 1e-12));
        assert!(phase_merge(&v, 0, c(2.0, 0.0), Sign::Plus).is_err());
    }

    #[test]
    fn measurement_kets() {
        // P·|−i⟩ = |+⟩, so the state (|0⟩ − i|1⟩)/√2 gives outcome 0 with certainty.
        let mut v = StateVector::product(&[phase_state(-std::f64::consts::FRAC_PI_2)]).unwrap();
        let p = v.clone().measure(0, Basis::Y, false).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let p = v.measure(0, Basis::Y, true).unwrap();
        assert!(p.abs() < 1e-12);
    }

    #[test]
    fn permutation_reorders_positions() {
        let v = StateVector::ket("100").unwrap();
        let w = v.permuted(&[2, 0, 1]);
        assert!((w.amplitude("010") - ONE).norm() < 1e-12);
    }

    #[test]
    fn size_cap() {
        assert!(StateVector::zeros(MAX_DENSE_QUBITS + 1).is_err());
    }
}
