//! Signed Pauli operators over `n` qubits in binary symplectic form.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Fixed-length bit vector packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Bits::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the bitwise AND with `other`.
    pub fn dot(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Returns a copy with a new bit inserted at `at`.
    pub fn inserted(&self, at: usize, value: bool) -> Bits {
        let mut v: Vec<bool> = self.iter().collect();
        v.insert(at, value);
        Bits::from_bools(&v)
    }

    /// Returns a copy with bit `at` removed.
    pub fn removed(&self, at: usize) -> Bits {
        let mut v: Vec<bool> = self.iter().collect();
        v.remove(at);
        Bits::from_bools(&v)
    }

    /// Returns a copy with bits reordered so that output bit `i` is input bit `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Bits {
        let v: Vec<bool> = perm.iter().map(|&p| self.get(p)).collect();
        Bits::from_bools(&v)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Eigenvalue of a Pauli measurement or sign of a stabilizer row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn from_bit(bit: bool) -> Sign {
        if bit {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    /// Eigenvalue as an integer, `+1` or `-1`.
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    #[allow(clippy::suspicious_arithmetic_impl)] // signs multiply by XOR of their bits
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bit(self.is_minus() ^ rhs.is_minus())
    }
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// A Hermitian Pauli operator `±P1⊗…⊗Pn`. `x = z = 1` on a qubit denotes `Y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliRow {
    pub x: Bits,
    pub z: Bits,
    pub sign: Sign,
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis `(x1,z1)·(x2,z2)`.
fn phase_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => (z2 as i32) * (2 * x2 as i32 - 1),
        (false, true) => (x2 as i32) * (1 - 2 * z2 as i32),
    }
}

impl PauliRow {
    pub fn identity(n: usize) -> Self {
        PauliRow {
            x: Bits::zeros(n),
            z: Bits::zeros(n),
            sign: Sign::Plus,
        }
    }

    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut row = PauliRow::identity(n);
        row.set(qubit, letter);
        row
    }

    /// Product of the same letter on every qubit in `support`.
    pub fn on(n: usize, support: &[usize], letter: Letter) -> Self {
        let mut row = PauliRow::identity(n);
        for &q in support {
            row.set(q, letter);
        }
        row
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, letter: Letter) {
        let (x, z) = letter.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn is_identity(&self) -> bool {
        !self.x.any() && !self.z.any()
    }

    pub fn is_x_type(&self) -> bool {
        !self.z.any()
    }

    pub fn is_z_type(&self) -> bool {
        !self.x.any()
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits()).filter(|&q| self.x.get(q) || self.z.get(q)).count()
    }

    pub fn commutes_with(&self, other: &PauliRow) -> bool {
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    /// Replaces `self` by the product `self · other`. The two operators must commute.
    pub fn mul_assign(&mut self, other: &PauliRow) {
        let mut exp: i32 = 0;
        for q in 0..self.num_qubits() {
            exp += phase_exponent(self.x.get(q), self.z.get(q), other.x.get(q), other.z.get(q));
        }
        exp += 2 * (self.sign.is_minus() as i32 + other.sign.is_minus() as i32);
        let exp = exp.rem_euclid(4);
        debug_assert!(exp % 2 == 0, "product of anticommuting Paulis is not Hermitian");
        self.sign = Sign::from_bit(exp == 2);
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn mul(&self, other: &PauliRow) -> PauliRow {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    /// Exchanges the roles of X and Z on every qubit (conjugation by `H^⊗n`).
    ///
    /// The sign of each `Y` factor flips under Hadamard conjugation.
    pub fn dual(&self) -> PauliRow {
        let ys = (0..self.num_qubits()).filter(|&q| self.x.get(q) && self.z.get(q)).count();
        PauliRow {
            x: self.z.clone(),
            z: self.x.clone(),
            sign: if ys % 2 == 1 { self.sign.flipped() } else { self.sign },
        }
    }

    pub fn inserted(&self, at: usize, letter: Letter) -> PauliRow {
        let (x, z) = letter.bits();
        PauliRow {
            x: self.x.inserted(at, x),
            z: self.z.inserted(at, z),
            sign: self.sign,
        }
    }

    pub fn removed(&self, at: usize) -> PauliRow {
        PauliRow {
            x: self.x.removed(at),
            z: self.z.removed(at),
            sign: self.sign,
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> PauliRow {
        PauliRow {
            x: self.x.permuted(perm),
            z: self.z.permuted(perm),
            sign: self.sign,
        }
    }

    /// Grid notation without sign, one letter per qubit.
    pub fn letters(&self) -> String {
        (0..self.num_qubits()).map(|q| self.letter(q).as_char()).collect()
    }

    /// Parses a row such as `+XZI`, `-YY` or `ZZI` (sign optional).
    pub fn parse(text: &str) -> Option<PauliRow> {
        let text = text.trim();
        let (sign, body) = match text.chars().next()? {
            '+' => (Sign::Plus, &text[1..]),
            '-' => (Sign::Minus, &text[1..]),
            _ => (Sign::Plus, text),
        };
        let mut row = PauliRow::identity(body.chars().count());
        row.sign = sign;
        for (q, c) in body.chars().enumerate() {
            let letter = match c {
                'I' | '.' | '_' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                _ => return None,
            };
            row.set(q, letter);
        }
        Some(row)
    }
}

impl fmt::Display for PauliRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign.is_minus() { '-' } else { '+' };
        write!(f, "{}{}", s, self.letters())
    }
}

impl fmt::Debug for PauliRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_track_phase() {
        let x = PauliRow::parse("X").unwrap();
        let z = PauliRow::parse("Z").unwrap();
        // XZ = -iY is not Hermitian; use commuting pairs instead.
        let xx = PauliRow::parse("XX").unwrap();
        let zz = PauliRow::parse("ZZ").unwrap();
        assert_eq!(xx.mul(&zz).to_string(), "-YY");
        assert!(!x.commutes_with(&z));
        let yy = PauliRow::parse("YY").unwrap();
        assert_eq!(yy.mul(&xx).to_string(), "-ZZ");
    }

    #[test]
    fn dual_swaps_letters() {
        let row = PauliRow::parse("-XZIY").unwrap();
        assert_eq!(row.dual().to_string(), "+ZXIY");
    }

    #[test]
    fn insert_and_remove_columns() {
        let row = PauliRow::parse("+XZ").unwrap();
        assert_eq!(row.inserted(1, Letter::Y).to_string(), "+XYZ");
        assert_eq!(row.removed(0).to_string(), "+Z");
    }
}
