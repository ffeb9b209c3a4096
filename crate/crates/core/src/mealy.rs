//! Finite invertible Mealy machines as a self-similar action backend.
//!
//! The states of a machine are group elements, the transition `(g, x) ↦ g|_x`
//! and output `(g, x) ↦ g·x` describe one level of the action. Group elements
//! of [`MealyAction`] are reduced words over the states and their formal
//! inverses.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::action::SelfSimilarAction;
use crate::alphabet::{Alphabet, Letter, Word};
use crate::error::{Error, Result};
use crate::partition;

/// A finite letter-to-letter transducer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyMachine {
    alphabet: Alphabet,
    names: Vec<String>,
    output: Vec<Vec<Letter>>,
    transition: Vec<Vec<usize>>,
    identity: Option<usize>,
}

/// A reason a machine does not define an invertible action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RowLength { state: String },
    OutputOutOfRange { state: String, letter: String },
    NotPermutation { state: String, duplicated: String },
    TransitionOutOfRange { state: String, letter: String },
    IdentityOutOfRange,
    IdentityNotTrivial { state: String },
    DuplicateState { state: String },
    MissingOutput { state: String, letter: String },
    MissingTransition { state: String, letter: String },
    UnknownLetter { state: String, letter: String },
    UnknownState { state: String, target: String },
    UnknownIdentity { name: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowLength { state } => write!(f, "state {state}: row length differs from alphabet size"),
            Violation::OutputOutOfRange { state, letter } => {
                write!(f, "state {state}: output at letter {letter} out of range")
            }
            Violation::NotPermutation { state, duplicated } => write!(
                f,
                "state {state}: output row is not a permutation (letter {duplicated} produced twice)"
            ),
            Violation::TransitionOutOfRange { state, letter } => {
                write!(f, "state {state}: transition at letter {letter} out of range")
            }
            Violation::IdentityOutOfRange => write!(f, "identity state index out of range"),
            Violation::IdentityNotTrivial { state } => {
                write!(f, "designated identity state {state} does not act trivially")
            }
            Violation::DuplicateState { state } => write!(f, "duplicate state name {state}"),
            Violation::MissingOutput { state, letter } => {
                write!(f, "state {state}: missing output for letter {letter}")
            }
            Violation::MissingTransition { state, letter } => {
                write!(f, "state {state}: missing transition for letter {letter}")
            }
            Violation::UnknownLetter { state, letter } => {
                write!(f, "state {state}: unknown letter {letter}")
            }
            Violation::UnknownState { state, target } => {
                write!(f, "state {state}: transition to unknown state {target}")
            }
            Violation::UnknownIdentity { name } => write!(f, "identity names unknown state {name}"),
        }
    }
}

impl MealyMachine {
    /// Assembles a machine without validating it; see [`MealyMachine::validate`].
    pub fn from_tables(
        alphabet: Alphabet,
        names: Vec<String>,
        output: Vec<Vec<Letter>>,
        transition: Vec<Vec<usize>>,
        identity: Option<usize>,
    ) -> Self {
        MealyMachine {
            alphabet,
            names,
            output,
            transition,
            identity,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn identity(&self) -> Option<usize> {
        self.identity
    }

    /// `s·x`.
    pub fn output(&self, s: usize, x: Letter) -> Letter {
        self.output[s][x]
    }

    /// `s|_x`.
    pub fn transition(&self, s: usize, x: Letter) -> usize {
        self.transition[s][x]
    }

    /// Runs the machine from state `s` over `v`, returning `s·v` and the
    /// final state `s|_v`.
    pub fn run(&self, s: usize, v: &Word) -> (Word, usize) {
        let mut state = s;
        let mut out = Vec::with_capacity(v.len());
        for x in v.iter() {
            out.push(self.output[state][x]);
            state = self.transition[state][x];
        }
        (Word(out), state)
    }

    /// Checks that every output row is a permutation and every transition
    /// targets an existing state.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let size = self.alphabet.size();
        let n = self.names.len();
        let mut violations = Vec::new();
        for s in 0..n {
            let state = self.names[s].clone();
            if self.output[s].len() != size || self.transition[s].len() != size {
                violations.push(Violation::RowLength { state });
                continue;
            }
            let mut seen = vec![false; size];
            for x in 0..size {
                let y = self.output[s][x];
                if y >= size {
                    violations.push(Violation::OutputOutOfRange {
                        state: state.clone(),
                        letter: self.alphabet.name(x).to_string(),
                    });
                } else if std::mem::replace(&mut seen[y], true) {
                    violations.push(Violation::NotPermutation {
                        state: state.clone(),
                        duplicated: self.alphabet.name(y).to_string(),
                    });
                }
                if self.transition[s][x] >= n {
                    violations.push(Violation::TransitionOutOfRange {
                        state: state.clone(),
                        letter: self.alphabet.name(x).to_string(),
                    });
                }
            }
        }
        match self.identity {
            Some(i) if i >= n => violations.push(Violation::IdentityOutOfRange),
            Some(i) if violations.is_empty() => {
                let trivial =
                    (0..size).all(|x| self.output[i][x] == x && self.transition[i][x] == i);
                if !trivial {
                    violations.push(Violation::IdentityNotTrivial {
                        state: self.names[i].clone(),
                    });
                }
            }
            _ => {}
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Quotient by action-equivalence. Returns the minimal machine and the
    /// map from original states to minimal states.
    pub fn minimize(&self) -> (MealyMachine, Vec<usize>) {
        let class = partition::refine(&self.output, &self.transition);
        let count = class.iter().copied().max().map_or(0, |m| m + 1);
        let mut first = vec![usize::MAX; count];
        for s in (0..self.names.len()).rev() {
            first[class[s]] = s;
        }
        let machine = MealyMachine {
            alphabet: self.alphabet.clone(),
            names: first.iter().map(|&s| self.names[s].clone()).collect(),
            output: first.iter().map(|&s| self.output[s].clone()).collect(),
            transition: first
                .iter()
                .map(|&s| self.transition[s].iter().map(|&t| class[t]).collect())
                .collect(),
            identity: self.identity.map(|i| class[i]),
        };
        (machine, class)
    }

    /// The machine of formal inverses: state `g⁻¹` outputs the inverse
    /// permutation and moves to `(g|_{g⁻¹·y})⁻¹` on letter `y`.
    pub fn inverse(&self) -> MealyMachine {
        let size = self.alphabet.size();
        let n = self.names.len();
        let mut output = vec![vec![0; size]; n];
        let mut transition = vec![vec![0; size]; n];
        for s in 0..n {
            for x in 0..size {
                let y = self.output[s][x];
                output[s][y] = x;
                transition[s][y] = self.transition[s][x];
            }
        }
        let names = (0..n)
            .map(|s| {
                if Some(s) == self.identity {
                    self.names[s].clone()
                } else {
                    format!("{}^-1", self.names[s])
                }
            })
            .collect();
        MealyMachine {
            alphabet: self.alphabet.clone(),
            names,
            output,
            transition,
            identity: self.identity,
        }
    }

    /// Returns the machine with an identity state, adding a fresh one
    /// (self-loops, trivial output) if none is designated.
    pub fn with_identity(&self) -> MealyMachine {
        if self.identity.is_some() {
            return self.clone();
        }
        let size = self.alphabet.size();
        let mut m = self.clone();
        let mut name = "e".to_string();
        while m.names.contains(&name) {
            name.push('\'');
        }
        let id = m.names.len();
        m.names.push(name);
        m.output.push((0..size).collect());
        m.transition.push(vec![id; size]);
        m.identity = Some(id);
        m
    }

    /// Parses and validates the JSON machine format.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MachineDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        MealyMachine::from_document(&doc)
    }

    pub fn from_document(doc: &MachineDocument) -> Result<Self> {
        let alphabet = Alphabet::new(doc.alphabet.iter().cloned())?;
        let mut violations = Vec::new();
        let mut seen = HashSet::new();
        for s in &doc.states {
            if !seen.insert(s.name.as_str()) {
                violations.push(Violation::DuplicateState {
                    state: s.name.clone(),
                });
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidMachine(violations));
        }
        let mut states: Vec<&StateDocument> = doc.states.iter().collect();
        states.sort_by(|a, b| a.name.cmp(&b.name));
        let names: Vec<String> = states.iter().map(|s| s.name.clone()).collect();
        let lookup = |n: &str| names.iter().position(|m| m == n);

        let size = alphabet.size();
        let mut output = vec![vec![0; size]; names.len()];
        let mut transition = vec![vec![0; size]; names.len()];
        for (i, s) in states.iter().enumerate() {
            for key in s.out.keys().chain(s.to.keys()) {
                if alphabet.index_of(key).is_none() {
                    violations.push(Violation::UnknownLetter {
                        state: s.name.clone(),
                        letter: key.clone(),
                    });
                }
            }
            for (x, letter) in alphabet.names().iter().enumerate() {
                match s.out.get(letter) {
                    None => violations.push(Violation::MissingOutput {
                        state: s.name.clone(),
                        letter: letter.clone(),
                    }),
                    Some(y) => match alphabet.index_of(y) {
                        Some(y) => output[i][x] = y,
                        None => violations.push(Violation::UnknownLetter {
                            state: s.name.clone(),
                            letter: y.clone(),
                        }),
                    },
                }
                match s.to.get(letter) {
                    None => violations.push(Violation::MissingTransition {
                        state: s.name.clone(),
                        letter: letter.clone(),
                    }),
                    Some(t) => match lookup(t) {
                        Some(t) => transition[i][x] = t,
                        None => violations.push(Violation::UnknownState {
                            state: s.name.clone(),
                            target: t.clone(),
                        }),
                    },
                }
            }
        }
        let identity = match &doc.identity {
            None => None,
            Some(name) => match lookup(name) {
                Some(i) => Some(i),
                None => {
                    violations.push(Violation::UnknownIdentity { name: name.clone() });
                    None
                }
            },
        };
        if !violations.is_empty() {
            return Err(Error::InvalidMachine(violations));
        }
        let machine = MealyMachine {
            alphabet,
            names,
            output,
            transition,
            identity,
        };
        machine.validate().map_err(Error::InvalidMachine)?;
        Ok(machine)
    }

    pub fn to_document(&self) -> MachineDocument {
        let letter = |x: Letter| self.alphabet.name(x).to_string();
        MachineDocument {
            alphabet: self.alphabet.names().to_vec(),
            states: (0..self.names.len())
                .map(|s| StateDocument {
                    name: self.names[s].clone(),
                    out: (0..self.alphabet.size())
                        .map(|x| (letter(x), letter(self.output[s][x])))
                        .collect(),
                    to: (0..self.alphabet.size())
                        .map(|x| (letter(x), self.names[self.transition[s][x]].clone()))
                        .collect(),
                })
                .collect(),
            identity: self.identity.map(|i| self.names[i].clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable")
    }
}

/// JSON form of a machine:
/// `{"alphabet": [...], "states": [{"name", "out", "to"}, ...], "identity": "e"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDocument {
    pub alphabet: Vec<String>,
    pub states: Vec<StateDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub name: String,
    pub out: BTreeMap<String, String>,
    pub to: BTreeMap<String, String>,
}

/// Parses and validates a JSON machine document.
pub fn load_machine(text: &str) -> Result<MealyMachine> {
    MealyMachine::from_json(text)
}

fn machine_from_rows(
    alphabet: Alphabet,
    rows: &[(&str, &[&str], &[&str])],
    identity: &str,
) -> MealyMachine {
    let names: Vec<String> = rows.iter().map(|r| r.0.to_string()).collect();
    let idx = |n: &str| names.iter().position(|m| m == n).expect("known state");
    let output = rows
        .iter()
        .map(|r| {
            r.1.iter()
                .map(|y| alphabet.index_of(y).expect("letter"))
                .collect()
        })
        .collect();
    let transition = rows
        .iter()
        .map(|r| r.2.iter().map(|t| idx(t)).collect())
        .collect();
    MealyMachine {
        identity: Some(idx(identity)),
        alphabet,
        names,
        output,
        transition,
    }
}

/// The `N`-adic odometer: `g` adds one with carry in little-endian base `N`.
pub fn builtin_odometer(n: usize) -> Result<MealyMachine> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "odometer needs N ≥ 2, got {n}"
        )));
    }
    let alphabet = Alphabet::numeric(n);
    let e_out: Vec<usize> = (0..n).collect();
    let g_out: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    // states: e = 0, g = 1
    let g_to: Vec<usize> = (0..n).map(|i| if i == n - 1 { 1 } else { 0 }).collect();
    Ok(MealyMachine {
        alphabet,
        names: vec!["e".into(), "g".into()],
        output: vec![e_out, g_out],
        transition: vec![vec![0; n], g_to],
        identity: Some(0),
    })
}

/// The basilica group on `{x, y}`:
/// `a·(xw) = y(b·w)`, `a·(yw) = xw`, `b·(xw) = x(a·w)`, `b·(yw) = yw`.
pub fn builtin_basilica() -> MealyMachine {
    let alphabet = Alphabet::new(["x", "y"]).expect("valid alphabet");
    machine_from_rows(
        alphabet,
        &[
            ("a", &["y", "x"], &["b", "e"]),
            ("b", &["x", "y"], &["a", "e"]),
            ("e", &["x", "y"], &["e", "e"]),
        ],
        "e",
    )
}

/// The first Grigorchuk group on `{x, y}`.
pub fn builtin_grigorchuk() -> MealyMachine {
    let alphabet = Alphabet::new(["x", "y"]).expect("valid alphabet");
    machine_from_rows(
        alphabet,
        &[
            ("a", &["y", "x"], &["e", "e"]),
            ("b", &["x", "y"], &["a", "c"]),
            ("c", &["x", "y"], &["a", "d"]),
            ("d", &["x", "y"], &["e", "b"]),
            ("e", &["x", "y"], &["e", "e"]),
        ],
        "e",
    )
}

/// An element of a [`MealyAction`]: a freely reduced word over the
/// non-identity states and their formal inverses. The word `s₁⋯sₙ` acts as
/// `s₁∘⋯∘sₙ`, so `sₙ` acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MealyElement(Vec<u32>);

impl MealyElement {
    pub fn factors(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The self-similar action generated by the states of a Mealy machine.
///
/// Internally the machine is joined with its inverse machine: states
/// `0..n` are the original states and `n..2n` their formal inverses.
#[derive(Clone, Debug)]
pub struct MealyAction {
    machine: MealyMachine,
    n: usize,
    identity: usize,
    output: Vec<Vec<Letter>>,
    transition: Vec<Vec<u32>>,
    names: Vec<String>,
    concatenate_names: bool,
}

impl MealyAction {
    /// Validates the machine and synthesizes an identity state if needed.
    pub fn new(machine: MealyMachine) -> Result<Self> {
        machine.validate().map_err(Error::InvalidMachine)?;
        let machine = machine.with_identity();
        let identity = machine.identity.expect("synthesized");
        let n = machine.state_count();
        let inverse = machine.inverse();
        let inv_state = |s: usize| if s == identity { s } else { s + n };

        let mut output = Vec::with_capacity(2 * n);
        let mut transition = Vec::with_capacity(2 * n);
        for s in 0..n {
            output.push(machine.output[s].clone());
            transition.push(machine.transition[s].iter().map(|&t| t as u32).collect());
        }
        for s in 0..n {
            output.push(inverse.output[s].clone());
            transition.push(
                inverse.transition[s]
                    .iter()
                    .map(|&t| inv_state(t) as u32)
                    .collect(),
            );
        }
        let mut names = machine.names.clone();
        names.extend(inverse.names.iter().cloned());
        let concatenate_names = machine.names.iter().all(|n| n.chars().count() == 1);
        Ok(MealyAction {
            machine,
            n,
            identity,
            output,
            transition,
            names,
            concatenate_names,
        })
    }

    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn odometer(n: usize) -> Result<Self> {
        MealyAction::new(builtin_odometer(n)?)
    }

    pub fn basilica() -> Self {
        MealyAction::new(builtin_basilica()).expect("valid builtin")
    }

    pub fn grigorchuk() -> Self {
        MealyAction::new(builtin_grigorchuk()).expect("valid builtin")
    }

    /// The element given by a single named state.
    pub fn state(&self, name: &str) -> Option<MealyElement> {
        self.machine
            .state(name)
            .map(|s| self.reduce(std::iter::once(s as u32)))
    }

    fn inverse_symbol(&self, s: u32) -> u32 {
        let s = s as usize;
        let t = if s == self.identity {
            s
        } else if s < self.n {
            s + self.n
        } else {
            s - self.n
        };
        t as u32
    }

    fn reduce(&self, symbols: impl IntoIterator<Item = u32>) -> MealyElement {
        let mut stack: Vec<u32> = Vec::new();
        for s in symbols {
            if s as usize == self.identity {
                continue;
            }
            if stack.last() == Some(&self.inverse_symbol(s)) {
                stack.pop();
            } else {
                stack.push(s);
            }
        }
        MealyElement(stack)
    }
}

impl SelfSimilarAction for MealyAction {
    type Element = MealyElement;

    fn alphabet(&self) -> &Alphabet {
        &self.machine.alphabet
    }

    fn identity(&self) -> MealyElement {
        MealyElement::default()
    }

    fn act_letter(&self, g: &MealyElement, x: Letter) -> Letter {
        g.0.iter().rev().fold(x, |l, &s| self.output[s as usize][l])
    }

    fn restrict_letter(&self, g: &MealyElement, x: Letter) -> MealyElement {
        // gh|_x = g|_{h·x} h|_x, evaluated right to left
        let mut letter = x;
        let mut parts = Vec::with_capacity(g.0.len());
        for &s in g.0.iter().rev() {
            parts.push(self.transition[s as usize][letter]);
            letter = self.output[s as usize][letter];
        }
        parts.reverse();
        self.reduce(parts)
    }

    fn compose(&self, g: &MealyElement, h: &MealyElement) -> MealyElement {
        self.reduce(g.0.iter().chain(h.0.iter()).copied())
    }

    fn invert(&self, g: &MealyElement) -> MealyElement {
        MealyElement(g.0.iter().rev().map(|&s| self.inverse_symbol(s)).collect())
    }

    fn generators(&self) -> Vec<MealyElement> {
        (0..self.n)
            .filter(|&s| s != self.identity)
            .map(|s| MealyElement(vec![s as u32]))
            .collect()
    }

    fn format_element(&self, g: &MealyElement) -> String {
        if g.0.is_empty() {
            return self.names[self.identity].clone();
        }
        let sep = if self.concatenate_names { "" } else { " " };
        g.0.iter()
            .map(|&s| self.names[s as usize].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    fn parse_element(&self, text: &str) -> Result<MealyElement> {
        let mut symbols = Vec::new();
        let mut pos = 0;
        while pos < text.len() {
            let rest = &text[pos..];
            let c = rest.chars().next().expect("non-empty");
            if c.is_whitespace() {
                pos += c.len_utf8();
                continue;
            }
            let best = self
                .machine
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            let Some((s, name)) = best else {
                return Err(Error::parse(pos, format!("unknown generator at {rest:?}")));
            };
            pos += name.len();
            let after = text[pos..].trim_start();
            let skipped = text.len() - pos - after.len();
            let mut symbol = s as u32;
            if let Some(stripped) = after.strip_prefix("^-1") {
                pos = text.len() - stripped.len();
                symbol = self.inverse_symbol(symbol);
            } else if after.starts_with('^') {
                return Err(Error::parse(
                    pos + skipped,
                    "only ^-1 exponents are supported",
                ));
            }
            symbols.push(symbol);
        }
        Ok(self.reduce(symbols))
    }

    fn is_identity(&self, g: &MealyElement) -> bool {
        g.0.is_empty()
    }
}
