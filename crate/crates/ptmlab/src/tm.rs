//! Deterministic single-tape Turing machines, step-bounded execution, and
//! the (t,[c]) machine-code format.
//!
//! A machine with distinct accept and reject states is a decider. When the
//! accept and reject ids coincide the machine is a transducer: the shared
//! state acts as the halt state and the run yields the tape as output.

use crate::godel::{self, GodelNumber};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

pub type StateId = usize;
/// Index into the machine's tape alphabet. 0, 1 and 2 are always the input
/// bits and the blank.
pub type SymId = u8;

pub const SYM_ZERO: SymId = 0;
pub const SYM_ONE: SymId = 1;
pub const SYM_BLANK: SymId = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    L,
    R,
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dir::L => write!(f, "L"),
            Dir::R => write!(f, "R"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TmError {
    #[error("machine is invalid: {0}")]
    InvalidMachine(String),
    #[error("step applied in a halting state")]
    AlreadyHalted,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("input contains a character outside the alphabet: {0:?}")]
    BadInputChar(char),
}

/// Transition table plus the distinguished states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TMDescription {
    pub num_states: usize,
    /// Tape alphabet. The first three entries are always `0`, `1`, `_`.
    pub alphabet: Vec<char>,
    pub start: StateId,
    pub accept: StateId,
    pub reject: StateId,
    /// Row per (state, symbol), indexed `q * alphabet.len() + s`.
    /// Halting-state rows are `None`.
    delta: Vec<Option<(StateId, SymId, Dir)>>,
}

impl TMDescription {
    pub fn new(
        num_states: usize,
        extra_symbols: &[char],
        start: StateId,
        accept: StateId,
        reject: StateId,
        transitions: &[(StateId, SymId, StateId, SymId, Dir)],
    ) -> Result<Self, TmError> {
        let mut alphabet = vec!['0', '1', '_'];
        for &c in extra_symbols {
            if alphabet.contains(&c) {
                return Err(TmError::InvalidMachine(format!("duplicate symbol {c:?}")));
            }
            alphabet.push(c);
        }
        let nsym = alphabet.len();
        if num_states == 0 {
            return Err(TmError::InvalidMachine("no states".into()));
        }
        for (name, id) in [("start", start), ("accept", accept), ("reject", reject)] {
            if id >= num_states {
                return Err(TmError::InvalidMachine(format!("{name} state out of range")));
            }
        }
        if start == accept || start == reject {
            return Err(TmError::InvalidMachine("start state must not halt".into()));
        }
        let mut delta: Vec<Option<(StateId, SymId, Dir)>> = vec![None; num_states * nsym];
        for &(q, s, q2, s2, d) in transitions {
            if q >= num_states || q2 >= num_states {
                return Err(TmError::InvalidMachine("transition state out of range".into()));
            }
            if usize::from(s) >= nsym || usize::from(s2) >= nsym {
                return Err(TmError::InvalidMachine("transition symbol out of range".into()));
            }
            if q == accept || q == reject {
                return Err(TmError::InvalidMachine(
                    "transition out of a halting state".into(),
                ));
            }
            let slot = &mut delta[q * nsym + usize::from(s)];
            if slot.is_some() {
                return Err(TmError::InvalidMachine(format!(
                    "duplicate transition for (q{q}, symbol {s})"
                )));
            }
            *slot = Some((q2, s2, d));
        }
        for q in 0..num_states {
            if q == accept || q == reject {
                continue;
            }
            for s in 0..nsym {
                if delta[q * nsym + s].is_none() {
                    return Err(TmError::InvalidMachine(format!(
                        "missing transition for (q{q}, symbol {s})"
                    )));
                }
            }
        }
        Ok(TMDescription {
            num_states,
            alphabet,
            start,
            accept,
            reject,
            delta,
        })
    }

    pub fn is_halting(&self, q: StateId) -> bool {
        q == self.accept || q == self.reject
    }

    /// Transducers use one shared halting state and report output.
    pub fn is_transducer(&self) -> bool {
        self.accept == self.reject
    }

    pub fn lookup(&self, q: StateId, s: SymId) -> Option<(StateId, SymId, Dir)> {
        self.delta[q * self.alphabet.len() + usize::from(s)]
    }

    /// Transitions in canonical order: non-halting states ascending, symbols
    /// ascending.
    pub fn transitions(&self) -> Vec<(StateId, SymId, StateId, SymId, Dir)> {
        let mut out = Vec::new();
        for q in 0..self.num_states {
            if self.is_halting(q) {
                continue;
            }
            for s in 0..self.alphabet.len() {
                let (q2, s2, d) = self.delta[q * self.alphabet.len() + s].expect("total");
                out.push((q, s as SymId, q2, s2, d));
            }
        }
        out
    }

    pub fn alphabet_is_core(&self) -> bool {
        self.alphabet.len() == 3
    }
}

/// Head-at-leftmost-of-right split representation of a machine snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub left: Vec<SymId>,
    pub state: StateId,
    pub right: Vec<SymId>,
}

impl Configuration {
    pub fn initial(m: &TMDescription, input: &[SymId]) -> Configuration {
        let right = if input.is_empty() {
            vec![SYM_BLANK]
        } else {
            input.to_vec()
        };
        Configuration {
            left: Vec::new(),
            state: m.start,
            right,
        }
    }

    pub fn head_symbol(&self) -> SymId {
        self.right[0]
    }

    /// Tape rendering with leading and trailing blanks trimmed.
    pub fn tape_string(&self, m: &TMDescription) -> String {
        let mut syms: Vec<SymId> = self.left.clone();
        syms.extend_from_slice(&self.right);
        let start = syms.iter().position(|&s| s != SYM_BLANK);
        match start {
            None => String::new(),
            Some(a) => {
                let b = syms.iter().rposition(|&s| s != SYM_BLANK).unwrap();
                syms[a..=b].iter().map(|&s| m.alphabet[usize::from(s)]).collect()
            }
        }
    }
}

/// One application of the transition function. The tape is extended with a
/// blank when the head walks off either end.
pub fn step(m: &TMDescription, c: &Configuration) -> Result<Configuration, TmError> {
    if m.is_halting(c.state) {
        return Err(TmError::AlreadyHalted);
    }
    let b = c.head_symbol();
    let (q2, written, dir) = m.lookup(c.state, b).expect("delta is total");
    let mut left = c.left.clone();
    let mut right = c.right.clone();
    right[0] = written;
    match dir {
        Dir::R => {
            let moved = right.remove(0);
            left.push(moved);
            if right.is_empty() {
                right.push(SYM_BLANK);
            }
        }
        Dir::L => {
            let a = left.pop().unwrap_or(SYM_BLANK);
            right.insert(0, a);
        }
    }
    Ok(Configuration {
        left,
        state: q2,
        right,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictKind {
    Accept,
    Reject,
    /// Transducer halt; carries the tape contents.
    Output(String),
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub steps_used: u64,
}

impl Verdict {
    pub fn accepts(&self) -> bool {
        matches!(self.kind, VerdictKind::Accept)
    }

    pub fn rejects(&self) -> bool {
        matches!(self.kind, VerdictKind::Reject)
    }

    /// Output value as a natural, when the run produced a canonical binary
    /// string. Non-canonical or absent output yields `None`.
    pub fn output_value(&self) -> Option<BigUint> {
        match &self.kind {
            VerdictKind::Output(s) => parse_binary_output(s),
            _ => None,
        }
    }
}

fn parse_binary_output(s: &str) -> Option<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    if s.len() > 1 && s.starts_with('0') {
        return None;
    }
    BigUint::parse_bytes(s.as_bytes(), 2)
}

pub fn input_symbols(m: &TMDescription, input: &str) -> Result<Vec<SymId>, TmError> {
    input
        .chars()
        .map(|c| {
            m.alphabet
                .iter()
                .position(|&a| a == c)
                .map(|i| i as SymId)
                .ok_or(TmError::BadInputChar(c))
        })
        .collect()
}

/// Simulates from the start configuration for at most `bound` transition
/// applications. The step counter counts only applications of the
/// transition function, not any bookkeeping.
pub fn run_bounded(
    m: &TMDescription,
    input: &str,
    bound: u64,
    trace: bool,
) -> Result<(Verdict, Option<Vec<Configuration>>), TmError> {
    let syms = input_symbols(m, input)?;
    let mut config = Configuration::initial(m, &syms);
    let mut history = if trace { vec![config.clone()] } else { Vec::new() };
    let mut steps: u64 = 0;
    loop {
        if m.is_halting(config.state) {
            let kind = if m.is_transducer() {
                VerdictKind::Output(config.tape_string(m))
            } else if config.state == m.accept {
                VerdictKind::Accept
            } else {
                VerdictKind::Reject
            };
            let verdict = Verdict {
                kind,
                steps_used: steps,
            };
            return Ok((verdict, trace.then_some(history)));
        }
        if steps == bound {
            let verdict = Verdict {
                kind: VerdictKind::Timeout,
                steps_used: steps,
            };
            return Ok((verdict, trace.then_some(history)));
        }
        config = step(m, &config)?;
        steps += 1;
        if trace {
            history.push(config.clone());
        }
    }
}

/// Natural-number code of a pair (t, [c]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineCode(pub GodelNumber);

impl MachineCode {
    pub fn value(&self) -> &BigUint {
        self.0.value()
    }
}

impl fmt::Display for MachineCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

const DIR_L: u64 = 0;
const DIR_R: u64 = 1;

/// Canonical serialization of the transition table: the flat integer list
/// `[|Q|, |Γ|, start, accept, reject]` followed by five integers per
/// transition, in canonical row order.
pub fn machine_flat_list(m: &TMDescription) -> Vec<BigUint> {
    let mut flat: Vec<u64> = vec![
        m.num_states as u64,
        m.alphabet.len() as u64,
        m.start as u64,
        m.accept as u64,
        m.reject as u64,
    ];
    for (q, s, q2, s2, d) in m.transitions() {
        flat.push(q as u64);
        flat.push(u64::from(s));
        flat.push(q2 as u64);
        flat.push(u64::from(s2));
        flat.push(match d {
            Dir::L => DIR_L,
            Dir::R => DIR_R,
        });
    }
    flat.into_iter().map(BigUint::from).collect()
}

pub fn encode_machine(m: &TMDescription, c: &BigUint) -> MachineCode {
    let t = godel::encode_seq(&machine_flat_list(m)).expect("non-empty");
    let code = godel::encode_seq(&[t.0.clone(), c.clone()]).expect("non-empty");
    MachineCode(code)
}

/// Canonical extra symbols synthesized when decoding: `A`, `B`, ...
fn canonical_extras(count: usize) -> Vec<char> {
    (0..count)
        .map(|i| char::from_u32('A' as u32 + i as u32).unwrap_or('?'))
        .collect()
}

fn decode_flat_table(flat: &[BigUint]) -> Option<TMDescription> {
    if flat.len() < 5 {
        return None;
    }
    let as_usize = |b: &BigUint| -> Option<usize> { b.to_usize() };
    let num_states = as_usize(&flat[0])?;
    let nsym = as_usize(&flat[1])?;
    let start = as_usize(&flat[2])?;
    let accept = as_usize(&flat[3])?;
    let reject = as_usize(&flat[4])?;
    if nsym < 3 || nsym > 3 + 26 || num_states == 0 || num_states > 100_000 {
        return None;
    }
    let rows = &flat[5..];
    if rows.len() % 5 != 0 {
        return None;
    }
    let mut transitions = Vec::with_capacity(rows.len() / 5);
    for chunk in rows.chunks_exact(5) {
        let q = as_usize(&chunk[0])?;
        let s = as_usize(&chunk[1])?;
        let q2 = as_usize(&chunk[2])?;
        let s2 = as_usize(&chunk[3])?;
        let d = match as_usize(&chunk[4])? as u64 {
            DIR_L => Dir::L,
            DIR_R => Dir::R,
            _ => return None,
        };
        if s >= nsym || s2 >= nsym {
            return None;
        }
        transitions.push((q, s as SymId, q2, s2 as SymId, d));
    }
    let m = TMDescription::new(
        num_states,
        &canonical_extras(nsym - 3),
        start,
        accept,
        reject,
        &transitions,
    )
    .ok()?;
    // The canonical serialization lists rows in canonical order; anything
    // else is rejected so that encode and decode stay mutually inverse.
    if m.transitions() != transitions {
        return None;
    }
    Some(m)
}

/// Total decoder: every natural either yields a machine and exponent or the
/// distinguished invalid-code outcome.
pub fn decode_machine(code: &MachineCode) -> Option<(TMDescription, BigUint)> {
    let parts = godel::decode_seq(&code.0).ok()?;
    if parts.len() != 2 {
        return None;
    }
    let t = GodelNumber(parts[0].clone());
    let c = parts[1].clone();
    let flat = godel::decode_seq(&t).ok()?;
    let m = decode_flat_table(&flat)?;
    Some((m, c))
}

/// Size functions for the step bound `Size(w)^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeFn {
    /// Bit length of `[w]`; the default.
    BitLen,
    /// Variable count of a decoded 3-CNF code, with fallback `|w|` on
    /// invalid codes.
    Sat3,
}

impl SizeFn {
    pub fn parse(name: &str) -> Option<SizeFn> {
        match name {
            "bitlen" | "default" => Some(SizeFn::BitLen),
            "3sat" | "sat3" => Some(SizeFn::Sat3),
            _ => None,
        }
    }
}

pub fn size_of(fn_id: SizeFn, w: &BigUint) -> u64 {
    match fn_id {
        SizeFn::BitLen => godel::bit_len(w),
        SizeFn::Sat3 => crate::sat::size_sat3(w),
    }
}

/// `Size(w)^c`, saturating at `u64::MAX`.
pub fn step_bound(size: u64, c: &BigUint) -> u64 {
    let Some(c) = c.to_u32() else {
        return u64::MAX;
    };
    BigUint::from(size)
        .pow(c)
        .to_u64()
        .unwrap_or(u64::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    Ran,
    InvalidCode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversalOutcome {
    pub verdict: Verdict,
    pub diagnostic: Diagnostic,
}

/// Runs the machine coded by `code` on input `[w]` for at most
/// `Size(w)^c` steps. Codes that fail the syntactic check yield a Reject
/// verdict with the invalid-code diagnostic; the function is total.
pub fn universal_ptm(code: &MachineCode, w: &BigUint, size_fn: SizeFn) -> UniversalOutcome {
    match decode_machine(code) {
        None => UniversalOutcome {
            verdict: Verdict {
                kind: VerdictKind::Reject,
                steps_used: 0,
            },
            diagnostic: Diagnostic::InvalidCode,
        },
        Some((m, c)) => {
            let bound = step_bound(size_of(size_fn, w), &c);
            let input = godel::binary_repr(w);
            let (verdict, _) = run_bounded(&m, &input, bound, false).expect("alphabet covers 0/1");
            UniversalOutcome {
                verdict,
                diagnostic: Diagnostic::Ran,
            }
        }
    }
}

/// Parses the line-based machine description format:
///
/// ```text
/// states: q0 acc rej
/// start: q0
/// accept: acc
/// reject: rej
/// alphabet: 0 1 _
/// q0 0 -> acc 0 R
/// ```
pub fn parse_machine(text: &str) -> Result<TMDescription, TmError> {
    let mut state_names: Vec<String> = Vec::new();
    let mut start = None;
    let mut accept = None;
    let mut reject = None;
    let mut alphabet: Option<Vec<char>> = None;
    let mut raw_transitions: Vec<(usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| TmError::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        if let Some(rest) = line.strip_prefix("states:") {
            state_names = rest.split_whitespace().map(str::to_string).collect();
            if state_names.is_empty() {
                return Err(err("states directive lists no states"));
            }
        } else if let Some(rest) = line.strip_prefix("start:") {
            start = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("accept:") {
            accept = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("reject:") {
            reject = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("alphabet:") {
            let syms: Vec<&str> = rest.split_whitespace().collect();
            if syms.len() < 3 || syms[0] != "0" || syms[1] != "1" || syms[2] != "_" {
                return Err(err("alphabet must start with: 0 1 _"));
            }
            let mut chars = Vec::new();
            for s in &syms[3..] {
                let mut it = s.chars();
                let (Some(c), None) = (it.next(), it.next()) else {
                    return Err(err("extra symbols must be single characters"));
                };
                chars.push(c);
            }
            alphabet = Some(chars);
        } else if line.contains("->") {
            raw_transitions.push((line_no, line.to_string()));
        } else {
            return Err(err("unknown directive"));
        }
    }

    let extras = alphabet.ok_or(TmError::Parse {
        line: 0,
        msg: "missing alphabet directive".into(),
    })?;
    let mut full_alphabet = vec!['0', '1', '_'];
    full_alphabet.extend_from_slice(&extras);

    let state_index: HashMap<&str, usize> = state_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    if state_index.len() != state_names.len() {
        return Err(TmError::Parse {
            line: 0,
            msg: "duplicate state name".into(),
        });
    }
    let resolve_state = |name: &Option<String>, what: &str| -> Result<usize, TmError> {
        let name = name.as_ref().ok_or(TmError::Parse {
            line: 0,
            msg: format!("missing {what} directive"),
        })?;
        state_index.get(name.as_str()).copied().ok_or(TmError::Parse {
            line: 0,
            msg: format!("{what} names unknown state {name:?}"),
        })
    };
    let start = resolve_state(&start, "start")?;
    let accept = resolve_state(&accept, "accept")?;
    let reject = resolve_state(&reject, "reject")?;

    let sym_index = |tok: &str, line: usize| -> Result<SymId, TmError> {
        let mut it = tok.chars();
        let (Some(c), None) = (it.next(), it.next()) else {
            return Err(TmError::Parse {
                line,
                msg: format!("bad symbol token {tok:?}"),
            });
        };
        full_alphabet
            .iter()
            .position(|&a| a == c)
            .map(|i| i as SymId)
            .ok_or(TmError::Parse {
                line,
                msg: format!("symbol {c:?} not in alphabet"),
            })
    };

    let mut transitions = Vec::new();
    for (line, t) in &raw_transitions {
        let (lhs, rhs) = t.split_once("->").expect("checked");
        let l: Vec<&str> = lhs.split_whitespace().collect();
        let r: Vec<&str> = rhs.split_whitespace().collect();
        if l.len() != 2 || r.len() != 3 {
            return Err(TmError::Parse {
                line: *line,
                msg: "transition must be: <q> <s> -> <q'> <s'> <L|R>".into(),
            });
        }
        let q = *state_index.get(l[0]).ok_or(TmError::Parse {
            line: *line,
            msg: format!("unknown state {:?}", l[0]),
        })?;
        let s = sym_index(l[1], *line)?;
        let q2 = *state_index.get(r[0]).ok_or(TmError::Parse {
            line: *line,
            msg: format!("unknown state {:?}", r[0]),
        })?;
        let s2 = sym_index(r[1], *line)?;
        let d = match r[2] {
            "L" => Dir::L,
            "R" => Dir::R,
            other => {
                return Err(TmError::Parse {
                    line: *line,
                    msg: format!("direction must be L or R, got {other:?}"),
                })
            }
        };
        transitions.push((q, s, q2, s2, d));
    }

    TMDescription::new(state_names.len(), &extras, start, accept, reject, &transitions)
        .map_err(|e| TmError::Parse {
            line: 0,
            msg: e.to_string(),
        })
}

pub fn print_machine(m: &TMDescription) -> String {
    let name = |q: usize| format!("q{q}");
    let mut out = String::new();
    let names: Vec<String> = (0..m.num_states).map(name).collect();
    out.push_str(&format!("states: {}\n", names.join(" ")));
    out.push_str(&format!("start: {}\n", names[m.start]));
    out.push_str(&format!("accept: {}\n", names[m.accept]));
    out.push_str(&format!("reject: {}\n", names[m.reject]));
    let alpha: Vec<String> = m.alphabet.iter().map(|c| c.to_string()).collect();
    out.push_str(&format!("alphabet: {}\n", alpha.join(" ")));
    for (q, s, q2, s2, d) in m.transitions() {
        out.push_str(&format!(
            "{} {} -> {} {} {}\n",
            names[q],
            m.alphabet[usize::from(s)],
            names[q2],
            m.alphabet[usize::from(s2)],
            d
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use num_traits::Zero;

    /// Independent oracle: a direct array-tape interpreter written against
    /// the transition cases, kept free of the split-string representation.
    pub fn oracle_run(m: &TMDescription, input: &str, bound: u64) -> (Option<StateId>, String, u64) {
        let mut tape: Vec<SymId> = input
            .chars()
            .map(|c| m.alphabet.iter().position(|&a| a == c).unwrap() as SymId)
            .collect();
        if tape.is_empty() {
            tape.push(SYM_BLANK);
        }
        let mut head: isize = 0;
        let mut state = m.start;
        let mut steps = 0u64;
        while !m.is_halting(state) && steps < bound {
            if head < 0 {
                tape.insert(0, SYM_BLANK);
                head = 0;
            }
            if head as usize >= tape.len() {
                tape.push(SYM_BLANK);
            }
            let (q2, s2, d) = m.lookup(state, tape[head as usize]).unwrap();
            tape[head as usize] = s2;
            head += match d {
                Dir::L => -1,
                Dir::R => 1,
            };
            state = q2;
            steps += 1;
        }
        let rendered: String = tape
            .iter()
            .map(|&s| m.alphabet[usize::from(s)])
            .collect::<String>()
            .trim_matches('_')
            .to_string();
        let halted = m.is_halting(state).then_some(state);
        (halted, rendered, steps)
    }

    fn write_one_machine() -> TMDescription {
        // On (q0, 0): write 1, move R, accept. Other symbols: reject.
        TMDescription::new(
            3,
            &[],
            0,
            1,
            2,
            &[
                (0, SYM_ZERO, 1, SYM_ONE, Dir::R),
                (0, SYM_ONE, 2, SYM_ONE, Dir::R),
                (0, SYM_BLANK, 2, SYM_BLANK, Dir::R),
            ],
        )
        .unwrap()
    }

    #[test]
    fn step_r_case_appends_written_symbol() {
        let m = write_one_machine();
        let c = Configuration::initial(&m, &[SYM_ZERO, SYM_ONE]);
        let c2 = step(&m, &c).unwrap();
        assert_eq!(c2.left, vec![SYM_ONE]);
        assert_eq!(c2.state, 1);
        assert_eq!(c2.right, vec![SYM_ONE]);
    }

    #[test]
    fn step_l_at_left_edge_lands_on_fresh_blank() {
        // Machine that moves L on its first step.
        let m = TMDescription::new(
            3,
            &[],
            0,
            1,
            2,
            &[
                (0, SYM_ZERO, 1, SYM_ZERO, Dir::L),
                (0, SYM_ONE, 1, SYM_ONE, Dir::L),
                (0, SYM_BLANK, 1, SYM_BLANK, Dir::L),
            ],
        )
        .unwrap();
        let c = Configuration::initial(&m, &[SYM_ONE, SYM_ZERO]);
        let c2 = step(&m, &c).unwrap();
        assert!(c2.left.is_empty());
        assert_eq!(c2.right, vec![SYM_BLANK, SYM_ONE, SYM_ZERO]);
        // Hand simulation of short runs near the edge agrees with the oracle.
        let (verdict, _) = run_bounded(&m, "10", 2, false).unwrap();
        let (halted, _, steps) = oracle_run(&m, "10", 2);
        assert_eq!(steps, verdict.steps_used);
        assert_eq!(halted.is_some(), !matches!(verdict.kind, VerdictKind::Timeout));
    }

    #[test]
    fn step_in_halting_state_is_an_error() {
        let m = write_one_machine();
        let c = Configuration {
            left: vec![],
            state: m.accept,
            right: vec![SYM_BLANK],
        };
        assert_eq!(step(&m, &c), Err(TmError::AlreadyHalted));
    }

    #[test]
    fn accept_in_one_step() {
        let m = corpus::accept_all();
        let (v, _) = run_bounded(&m, "101", 5, false).unwrap();
        assert_eq!(v.kind, VerdictKind::Accept);
        assert_eq!(v.steps_used, 1);
    }

    #[test]
    fn bit_flip_transducer_output() {
        let m = corpus::bit_flip_transducer();
        let (v, _) = run_bounded(&m, "1011", 100, false).unwrap();
        assert_eq!(v.kind, VerdictKind::Output("0100".into()));
    }

    #[test]
    fn looping_machine_times_out() {
        let m = corpus::looper();
        let (v, _) = run_bounded(&m, "1", 10, false).unwrap();
        assert_eq!(v.kind, VerdictKind::Timeout);
        assert_eq!(v.steps_used, 10);
    }

    #[test]
    fn run_agrees_with_oracle_interpreter() {
        let machines = corpus::all_named();
        for (name, m) in &machines {
            for n in 0..=4usize {
                for bits in 0..(1u32 << n) {
                    let input: String = (0..n)
                        .map(|i| if bits >> (n - 1 - i) & 1 == 1 { '1' } else { '0' })
                        .collect();
                    for bound in [0u64, 1, 3, 25] {
                        let (v, _) = run_bounded(m, &input, bound, false).unwrap();
                        let (halted, tape, steps) = oracle_run(m, &input, bound);
                        assert_eq!(v.steps_used, steps, "{name} on {input:?} bound {bound}");
                        match (&v.kind, halted) {
                            (VerdictKind::Timeout, None) => {}
                            (VerdictKind::Accept, Some(q)) => assert_eq!(q, m.accept),
                            (VerdictKind::Reject, Some(q)) => assert_eq!(q, m.reject),
                            (VerdictKind::Output(out), Some(_)) => assert_eq!(*out, tape),
                            other => panic!("{name} on {input:?}: mismatch {other:?}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_runs() {
        let m = corpus::parity();
        let a = run_bounded(&m, "1101", 64, true).unwrap();
        let b = run_bounded(&m, "1101", 64, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn encode_decode_round_trip() {
        let c = BigUint::from(2u32);
        for (_, m) in corpus::all_named() {
            let code = encode_machine(&m, &c);
            let (m2, c2) = decode_machine(&code).expect("valid code");
            assert_eq!(m, m2);
            assert_eq!(c, c2);
        }
    }

    #[test]
    fn state_order_changes_the_code() {
        // Same behavior, states declared in different order.
        let m1 = TMDescription::new(
            3,
            &[],
            0,
            1,
            2,
            &[
                (0, 0, 1, 0, Dir::R),
                (0, 1, 1, 1, Dir::R),
                (0, 2, 1, 2, Dir::R),
            ],
        )
        .unwrap();
        let m2 = TMDescription::new(
            3,
            &[],
            0,
            2,
            1,
            &[
                (0, 0, 2, 0, Dir::R),
                (0, 1, 2, 1, Dir::R),
                (0, 2, 2, 2, Dir::R),
            ],
        )
        .unwrap();
        let c = BigUint::from(1u32);
        assert_ne!(encode_machine(&m1, &c), encode_machine(&m2, &c));
    }

    #[test]
    fn golden_code_for_flip_machine() {
        // Hand application of the sequence-encoding rules to the flat list
        // of the two-state flip transducer with c = 1, frozen once.
        let m = corpus::bit_flip_transducer();
        let flat = machine_flat_list(&m);
        let expect_flat: Vec<u64> = vec![
            2, 3, 0, 1, 1, // header: |Q|, |Gamma|, start, accept, reject
            0, 0, 0, 1, 1, // (q0,0) -> (q0,1,R)
            0, 1, 0, 0, 1, // (q0,1) -> (q0,0,R)
            0, 2, 1, 2, 0, // (q0,_) -> (halt,_,L)
        ];
        let expect: Vec<BigUint> = expect_flat.iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(flat, expect);
        let t = godel::encode_seq(&expect).unwrap();
        let code = encode_machine(&m, &BigUint::from(1u32));
        assert_eq!(
            code.0,
            godel::encode_seq(&[t.0.clone(), BigUint::from(1u32)]).unwrap()
        );
    }

    #[test]
    fn decode_zero_is_invalid() {
        assert!(decode_machine(&MachineCode(GodelNumber::from(0u64))).is_none());
    }

    #[test]
    fn decode_non_total_table_is_invalid() {
        // Header claims 3 states but provides a single transition row.
        let flat: Vec<BigUint> = [3u64, 3, 0, 1, 2, 0, 0, 1, 0, 1]
            .iter()
            .map(|&x| BigUint::from(x))
            .collect();
        let t = godel::encode_seq(&flat).unwrap();
        let code = MachineCode(godel::encode_seq(&[t.0, BigUint::from(1u32)]).unwrap());
        assert!(decode_machine(&code).is_none());
    }

    #[test]
    fn decode_is_total_on_small_naturals() {
        use num_traits::One;
        let mut v = BigUint::zero();
        let one = BigUint::one();
        for _ in 0..(1u32 << 20) {
            let _ = decode_machine(&MachineCode(GodelNumber(v.clone())));
            v += &one;
        }
    }

    #[test]
    fn universal_matches_direct_run() {
        let c = BigUint::from(1u32);
        for (_, m) in corpus::deciders() {
            let code = encode_machine(&m, &c);
            for w in 0u64..=255 {
                let w = BigUint::from(w);
                let out = universal_ptm(&code, &w, SizeFn::BitLen);
                let bound = step_bound(size_of(SizeFn::BitLen, &w), &c);
                let (direct, _) = run_bounded(&m, &godel::binary_repr(&w), bound, false).unwrap();
                assert_eq!(out.verdict, direct);
                assert_eq!(out.diagnostic, Diagnostic::Ran);
            }
        }
    }

    #[test]
    fn universal_rejects_invalid_code() {
        let out = universal_ptm(
            &MachineCode(GodelNumber::from(7u64)),
            &BigUint::from(5u32),
            SizeFn::BitLen,
        );
        assert_eq!(out.verdict.kind, VerdictKind::Reject);
        assert_eq!(out.diagnostic, Diagnostic::InvalidCode);
    }

    #[test]
    fn timeout_when_bound_too_small() {
        // accept_all needs one step; Size("")... use a machine needing n+1
        // steps on inputs of length n with c = 1.
        let m = corpus::scan_right_accept();
        let code = encode_machine(&m, &BigUint::from(1u32));
        // w = 13 -> [w] = 1101, Size = 4, bound = 4, machine needs 5 steps.
        let out = universal_ptm(&code, &BigUint::from(13u32), SizeFn::BitLen);
        assert_eq!(out.verdict.kind, VerdictKind::Timeout);
        assert_eq!(out.verdict.steps_used, 4);
    }

    #[test]
    fn default_size_values() {
        assert_eq!(size_of(SizeFn::BitLen, &BigUint::from(13u32)), 4);
        assert_eq!(size_of(SizeFn::BitLen, &BigUint::zero()), 1);
    }

    #[test]
    fn parse_print_round_trip() {
        for (_, m) in corpus::all_named() {
            let text = print_machine(&m);
            let parsed = parse_machine(&text).unwrap();
            assert_eq!(m, parsed);
        }
    }

    #[test]
    fn parse_rejects_unknown_directive() {
        let text = "states: a b c\nstart: a\naccept: b\nreject: c\nalphabet: 0 1 _\nfoo: 1\n";
        assert!(matches!(parse_machine(text), Err(TmError::Parse { .. })));
    }

    #[test]
    fn parse_rejects_duplicate_transition() {
        let text = "states: a b c\nstart: a\naccept: b\nreject: c\nalphabet: 0 1 _\n\
                    a 0 -> b 0 R\na 0 -> c 0 R\na 1 -> b 1 R\na _ -> b _ R\n";
        assert!(parse_machine(text).is_err());
    }
}
