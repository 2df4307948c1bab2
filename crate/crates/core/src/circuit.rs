//! Circuit intermediate representation for ICM and inverted-ICM circuits.
//!
//! A circuit is an ordered list of statements over dense 0-based qubit ids:
//! initializations, declared inputs (for open fragments), CNOTs with one or more
//! targets, and single-qubit measurements. Order is kept so that ordering
//! violations can be reported by [`validate`].
//!
//! Text format, one statement per line, `#` starts a comment:
//!
//! ```text
//! qubits 3
//! base 1              # optional: labels in the file are offset by 1
//! init 1 +
//! init 2 0
//! input 3             # qubit carries an external input state
//! cnot 1 -> 2 3
//! measure 1 X
//! measure 2 A if m1
//! ```

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitState {
    Zero,
    Plus,
    Y,
    A,
}

impl InitState {
    pub fn is_rotated(self) -> bool {
        matches!(self, InitState::Y | InitState::A)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            InitState::Zero => "0",
            InitState::Plus => "+",
            InitState::Y => "Y",
            InitState::A => "A",
        }
    }

    pub fn from_symbol(s: &str) -> Option<InitState> {
        match s {
            "0" => Some(InitState::Zero),
            "+" => Some(InitState::Plus),
            "Y" => Some(InitState::Y),
            "A" => Some(InitState::A),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Z,
    Y,
    A,
}

impl Basis {
    pub fn is_rotated(self) -> bool {
        matches!(self, Basis::Y | Basis::A)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Basis::X => "X",
            Basis::Z => "Z",
            Basis::Y => "Y",
            Basis::A => "A",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Basis> {
        match s {
            "X" => Some(Basis::X),
            "Z" => Some(Basis::Z),
            "Y" => Some(Basis::Y),
            "A" => Some(Basis::A),
            _ => None,
        }
    }

    /// Phase angle of the rotated basis state `|0⟩ + e^{iθ}|1⟩`, if any.
    pub fn theta(self) -> Option<f64> {
        match self {
            Basis::Y => Some(std::f64::consts::FRAC_PI_2),
            Basis::A => Some(std::f64::consts::FRAC_PI_4),
            _ => None,
        }
    }
}

/// A measurement together with the earlier measurements it is classically conditioned on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measurement {
    pub basis: Basis,
    /// Qubits whose measurement outcomes feed forward into this one.
    pub conditioned_on: Vec<usize>,
}

impl Measurement {
    pub fn new(basis: Basis) -> Self {
        Measurement {
            basis,
            conditioned_on: Vec::new(),
        }
    }
}

/// A CNOT with one control and one or more targets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gate {
    pub control: usize,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate {
            control,
            targets: vec![target],
        }
    }

    pub fn touches(&self, q: usize) -> bool {
        self.control == q || self.targets.contains(&q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Statement {
    Init(usize, InitState),
    Input(usize),
    Cnot(Gate),
    Measure(usize, Measurement),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Circuit {
    pub num_qubits: usize,
    /// Label offset used when reading and writing text (0 or 1 in practice).
    pub base: usize,
    pub statements: Vec<Statement>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            base: 0,
            statements: Vec::new(),
        }
    }

    pub fn init(&mut self, q: usize, state: InitState) -> &mut Self {
        self.statements.push(Statement::Init(q, state));
        self
    }

    pub fn input(&mut self, q: usize) -> &mut Self {
        self.statements.push(Statement::Input(q));
        self
    }

    pub fn cnot(&mut self, control: usize, targets: &[usize]) -> &mut Self {
        self.statements.push(Statement::Cnot(Gate {
            control,
            targets: targets.to_vec(),
        }));
        self
    }

    pub fn measure(&mut self, q: usize, basis: Basis) -> &mut Self {
        self.statements.push(Statement::Measure(q, Measurement::new(basis)));
        self
    }

    pub fn measure_if(&mut self, q: usize, basis: Basis, conditioned_on: &[usize]) -> &mut Self {
        self.statements.push(Statement::Measure(
            q,
            Measurement {
                basis,
                conditioned_on: conditioned_on.to_vec(),
            },
        ));
        self
    }

    /// Initial state per qubit; `None` for declared inputs (or missing inits).
    pub fn inits(&self) -> Vec<Option<InitState>> {
        let mut out = vec![None; self.num_qubits];
        for s in &self.statements {
            if let Statement::Init(q, st) = s {
                if *q < self.num_qubits {
                    out[*q] = Some(*st);
                }
            }
        }
        out
    }

    pub fn inputs(&self) -> Vec<usize> {
        self.statements
            .iter()
            .filter_map(|s| match s {
                Statement::Input(q) => Some(*q),
                _ => None,
            })
            .collect()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Cnot(g) => Some(g),
            _ => None,
        })
    }

    pub fn num_gates(&self) -> usize {
        self.gates().count()
    }

    /// Measurement per qubit; `None` for output qubits.
    pub fn measurements(&self) -> Vec<Option<Measurement>> {
        let mut out = vec![None; self.num_qubits];
        for s in &self.statements {
            if let Statement::Measure(q, m) = s {
                if *q < self.num_qubits {
                    out[*q] = Some(m.clone());
                }
            }
        }
        out
    }

    /// Qubits without a measurement, in id order.
    pub fn outputs(&self) -> Vec<usize> {
        self.measurements()
            .iter()
            .enumerate()
            .filter_map(|(q, m)| m.is_none().then_some(q))
            .collect()
    }

    /// Same circuit with every multi-target CNOT split into single-target CNOTs
    /// (targets in listed order).
    pub fn flattened(&self) -> Circuit {
        let mut out = Circuit {
            num_qubits: self.num_qubits,
            base: self.base,
            statements: Vec::with_capacity(self.statements.len()),
        };
        for s in &self.statements {
            match s {
                Statement::Cnot(g) => {
                    for &t in &g.targets {
                        out.statements.push(Statement::Cnot(Gate::cnot(g.control, t)));
                    }
                }
                other => out.statements.push(other.clone()),
            }
        }
        out
    }

    /// Copy with all measurements removed.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            base: self.base,
            statements: self
                .statements
                .iter()
                .filter(|s| !matches!(s, Statement::Measure(..)))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn perr(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Parses the line-based circuit format described in the module docs.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;
    let mut has_init = Vec::new();
    let mut has_measure = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();

        if keyword == "qubits" {
            if circuit.is_some() {
                return Err(perr(lineno, "duplicate `qubits` header"));
            }
            let [n] = rest.as_slice() else {
                return Err(perr(lineno, "expected `qubits <n>`"));
            };
            let n: usize = n.parse().map_err(|_| perr(lineno, format!("bad qubit count {n:?}")))?;
            circuit = Some(Circuit::new(n));
            has_init = vec![false; n];
            has_measure = vec![false; n];
            continue;
        }
        let Some(c) = circuit.as_mut() else {
            return Err(perr(lineno, "`qubits <n>` must come first"));
        };
        let base = c.base;
        let n = c.num_qubits;
        let qubit = |tok: &str| -> Result<usize, ParseError> {
            let label: usize = tok.parse().map_err(|_| perr(lineno, format!("bad qubit id {tok:?}")))?;
            if label < base || label - base >= n {
                return Err(perr(lineno, format!("qubit {label} out of range")));
            }
            Ok(label - base)
        };
        match keyword {
            "base" => {
                if !c.statements.is_empty() {
                    return Err(perr(lineno, "`base` must precede all statements"));
                }
                let [b] = rest.as_slice() else {
                    return Err(perr(lineno, "expected `base <b>`"));
                };
                c.base = b.parse().map_err(|_| perr(lineno, format!("bad base {b:?}")))?;
            }
            "init" | "input" => {
                let q;
                if keyword == "init" {
                    let [qs, st] = rest.as_slice() else {
                        return Err(perr(lineno, "expected `init <q> <0|+|Y|A>`"));
                    };
                    q = qubit(qs)?;
                    let state = InitState::from_symbol(st).ok_or_else(|| perr(lineno, format!("unknown init state {st:?}")))?;
                    c.statements.push(Statement::Init(q, state));
                } else {
                    let [qs] = rest.as_slice() else {
                        return Err(perr(lineno, "expected `input <q>`"));
                    };
                    q = qubit(qs)?;
                    c.statements.push(Statement::Input(q));
                }
                if has_init[q] {
                    return Err(perr(lineno, format!("duplicate init for qubit {}", q + base)));
                }
                has_init[q] = true;
            }
            "cnot" => {
                let Some((control, targets)) = rest.split_first() else {
                    return Err(perr(lineno, "expected `cnot <c> -> <t...>`"));
                };
                let Some(("->", targets)) = targets.split_first().map(|(a, b)| (*a, b)) else {
                    return Err(perr(lineno, "expected `->` after control"));
                };
                if targets.is_empty() {
                    return Err(perr(lineno, "cnot needs at least one target"));
                }
                let control = qubit(control)?;
                let targets: Vec<usize> = targets.iter().map(|t| qubit(t)).collect::<Result<_, _>>()?;
                let gate = Gate { control, targets };
                check_gate(&gate).map_err(|m| perr(lineno, m))?;
                c.statements.push(Statement::Cnot(gate));
            }
            "measure" => {
                let (qs, bs, cond) = match rest.as_slice() {
                    [qs, bs] => (qs, bs, None),
                    [qs, bs, "if", list] => (qs, bs, Some(*list)),
                    _ => return Err(perr(lineno, "expected `measure <q> <X|Z|Y|A> [if m<q>,...]`")),
                };
                let q = qubit(qs)?;
                let basis = Basis::from_symbol(bs).ok_or_else(|| perr(lineno, format!("unknown basis {bs:?}")))?;
                let mut conditioned_on = Vec::new();
                if let Some(list) = cond {
                    for item in list.split(',') {
                        let id = item
                            .strip_prefix('m')
                            .ok_or_else(|| perr(lineno, format!("condition {item:?} must look like m<q>")))?;
                        conditioned_on.push(qubit(id)?);
                    }
                }
                if has_measure[q] {
                    return Err(perr(lineno, format!("duplicate measurement of qubit {}", q + base)));
                }
                has_measure[q] = true;
                c.statements.push(Statement::Measure(q, Measurement { basis, conditioned_on }));
            }
            other => return Err(perr(lineno, format!("unknown statement {other:?}"))),
        }
    }
    circuit.ok_or_else(|| perr(1, "missing `qubits <n>` header"))
}

fn check_gate(g: &Gate) -> Result<(), String> {
    if g.targets.contains(&g.control) {
        return Err("control appears among targets".into());
    }
    for (i, t) in g.targets.iter().enumerate() {
        if g.targets[..i].contains(t) {
            return Err("targets must be pairwise distinct".into());
        }
    }
    Ok(())
}

/// Canonical text form: header, optional base, then statements in order.
pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.num_qubits);
    if c.base != 0 {
        out.push_str(&format!("base {}\n", c.base));
    }
    let b = c.base;
    for s in &c.statements {
        match s {
            Statement::Init(q, st) => out.push_str(&format!("init {} {}\n", q + b, st.symbol())),
            Statement::Input(q) => out.push_str(&format!("input {}\n", q + b)),
            Statement::Cnot(g) => {
                out.push_str(&format!("cnot {} ->", g.control + b));
                for t in &g.targets {
                    out.push_str(&format!(" {}", t + b));
                }
                out.push('\n');
            }
            Statement::Measure(q, m) => {
                out.push_str(&format!("measure {} {}", q + b, m.basis.symbol()));
                if !m.conditioned_on.is_empty() {
                    let ids: Vec<String> = m.conditioned_on.iter().map(|c| format!("m{}", c + b)).collect();
                    out.push_str(&format!(" if {}", ids.join(",")));
                }
                out.push('\n');
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Icm,
    InvertedIcm,
}

/// One violated well-formedness constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RotatedInit { qubit: usize },
    RotatedMeasurement { qubit: usize },
    MissingInit { qubit: usize },
    DuplicateInit { qubit: usize },
    DuplicateMeasurement { qubit: usize },
    OutOfRange { statement: usize, qubit: usize },
    MalformedGate { statement: usize, detail: String },
    Ordering { statement: usize, detail: String },
    UnknownCondition { qubit: usize, condition: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RotatedInit { qubit } => write!(f, "qubit {qubit}: rotated initialization forbidden"),
            Violation::RotatedMeasurement { qubit } => write!(f, "qubit {qubit}: rotated measurement forbidden"),
            Violation::MissingInit { qubit } => write!(f, "qubit {qubit}: no initialization"),
            Violation::DuplicateInit { qubit } => write!(f, "qubit {qubit}: initialized more than once"),
            Violation::DuplicateMeasurement { qubit } => write!(f, "qubit {qubit}: measured more than once"),
            Violation::OutOfRange { statement, qubit } => write!(f, "statement {statement}: qubit {qubit} out of range"),
            Violation::MalformedGate { statement, detail } => write!(f, "statement {statement}: {detail}"),
            Violation::Ordering { statement, detail } => write!(f, "statement {statement}: ordering violation: {detail}"),
            Violation::UnknownCondition { qubit, condition } => {
                write!(f, "qubit {qubit}: condition on m{condition}, which is not measured earlier")
            }
        }
    }
}

/// Checks ICM or inverted-ICM well-formedness; an empty report means valid.
///
/// Declared inputs count as initialized. Both forms require the init block, the
/// CNOT block and the measurement block to appear in that order.
pub fn validate(c: &Circuit, form: Form) -> Vec<Violation> {
    let n = c.num_qubits;
    let mut report = Vec::new();
    let mut init_seen = vec![false; n];
    let mut measured = vec![false; n];
    // 0 = init block, 1 = CNOT block, 2 = measurement block.
    let mut phase = 0;
    for (i, s) in c.statements.iter().enumerate() {
        let qubits: Vec<usize> = match s {
            Statement::Init(q, _) | Statement::Input(q) | Statement::Measure(q, _) => vec![*q],
            Statement::Cnot(g) => std::iter::once(g.control).chain(g.targets.iter().copied()).collect(),
        };
        if let Some(&bad) = qubits.iter().find(|&&q| q >= n) {
            report.push(Violation::OutOfRange { statement: i, qubit: bad });
            continue;
        }
        match s {
            Statement::Init(q, st) => {
                if phase > 0 {
                    report.push(Violation::Ordering {
                        statement: i,
                        detail: format!("initialization of qubit {q} after the CNOT block started"),
                    });
                }
                if init_seen[*q] {
                    report.push(Violation::DuplicateInit { qubit: *q });
                }
                init_seen[*q] = true;
                if form == Form::InvertedIcm && st.is_rotated() {
                    report.push(Violation::RotatedInit { qubit: *q });
                }
            }
            Statement::Input(q) => {
                if phase > 0 {
                    report.push(Violation::Ordering {
                        statement: i,
                        detail: format!("input qubit {q} declared after the CNOT block started"),
                    });
                }
                if init_seen[*q] {
                    report.push(Violation::DuplicateInit { qubit: *q });
                }
                init_seen[*q] = true;
            }
            Statement::Cnot(g) => {
                if let Err(detail) = check_gate(g) {
                    report.push(Violation::MalformedGate { statement: i, detail });
                }
                if phase == 2 {
                    let after: Vec<usize> = qubits.iter().copied().filter(|&q| measured[q]).collect();
                    let detail = if after.is_empty() {
                        "CNOT after the measurement block started".to_string()
                    } else {
                        format!("CNOT acts on already measured qubit(s) {after:?}")
                    };
                    report.push(Violation::Ordering { statement: i, detail });
                }
                phase = phase.max(1);
            }
            Statement::Measure(q, m) => {
                phase = 2;
                if measured[*q] {
                    report.push(Violation::DuplicateMeasurement { qubit: *q });
                }
                for &cond in &m.conditioned_on {
                    if cond >= n || !measured[cond] {
                        report.push(Violation::UnknownCondition {
                            qubit: *q,
                            condition: cond,
                        });
                    }
                }
                measured[*q] = true;
                if form == Form::Icm && m.basis.is_rotated() {
                    report.push(Violation::RotatedMeasurement { qubit: *q });
                }
            }
        }
    }
    for (q, seen) in init_seen.iter().enumerate() {
        if !seen {
            report.push(Violation::MissingInit { qubit: q });
        }
    }
    report
}
