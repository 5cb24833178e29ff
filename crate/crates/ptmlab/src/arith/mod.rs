//! The compiler core: bounded machine runs become tableau circuits, the
//! circuits become 3-CNF instances, and the same local transition tables
//! become a PA formula family.
//!
//! Cell contents are one-hot elements: 0, 1 and blank for bare tape
//! symbols, then `3 + 3q + b` for the head in state `q` over symbol `b`.
//! States are renumbered so the start state is 0, the reject state is
//! `l - 2`, and the accept state is `l - 1`; the accept lights of the
//! final row, read at the configured output cell, decide acceptance.

pub mod meta;

use crate::config::Config;
use crate::pa::{
    self, and, and_all, eq, exists_lt, exists_unique_lt, forall_lt, implies, lt, not, or_all,
    Formula, Term, VarId,
};
use crate::sat::Cnf;
use crate::tm::{Dir, TMDescription, SYM_BLANK};
use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("tableau requires the bare alphabet 0, 1, blank")]
    Alphabet,
    #[error("tableau requires a decider with distinct accept and reject states")]
    NotDecider,
    #[error("tableau needs at least two cells; n^c = {0}")]
    TooSmall(u64),
    #[error("n^c = {got} exceeds the configured cap {cap}")]
    CapExceeded { got: u64, cap: u64 },
    #[error("output cell {cell} is outside the tape range {rows}")]
    BadOutputCell { cell: usize, rows: u64 },
    #[error("input length {got} does not match the circuit arity {want}")]
    InputLength { got: usize, want: usize },
}

/// Transition table over tableau state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabMachine {
    /// Number of states; the element alphabet has k = 3 + 3*ell entries.
    pub ell: usize,
    /// Rows indexed by `q * 3 + sym` for non-halting q.
    delta: Vec<Option<(usize, u8, Dir)>>,
}

impl TabMachine {
    /// Renumbers the machine's states into tableau order.
    pub fn new(m: &TMDescription) -> Result<TabMachine, ArithError> {
        if !m.alphabet_is_core() {
            return Err(ArithError::Alphabet);
        }
        if m.is_transducer() {
            return Err(ArithError::NotDecider);
        }
        let ell = m.num_states;
        let mut to_tab = vec![usize::MAX; ell];
        to_tab[m.start] = 0;
        to_tab[m.reject] = ell - 2;
        to_tab[m.accept] = ell - 1;
        let mut next = 1usize;
        for q in 0..ell {
            if q == m.start || q == m.accept || q == m.reject {
                continue;
            }
            to_tab[q] = next;
            next += 1;
        }
        let mut delta = vec![None; ell * 3];
        for (q, s, q2, s2, d) in m.transitions() {
            delta[to_tab[q] * 3 + usize::from(s)] = Some((to_tab[q2], s2, d));
        }
        Ok(TabMachine { ell, delta })
    }

    pub fn k(&self) -> usize {
        3 + 3 * self.ell
    }

    pub fn is_halting(&self, q: usize) -> bool {
        q >= self.ell - 2
    }

    pub fn accept_state(&self) -> usize {
        self.ell - 1
    }

    fn lookup(&self, q: usize, sym: u8) -> Option<(usize, u8, Dir)> {
        self.delta[q * 3 + usize::from(sym)]
    }

    /// Splits an element into its head state and symbol, if it has one.
    pub fn head_of(&self, elem: usize) -> Option<(usize, u8)> {
        if elem >= 3 {
            Some(((elem - 3) / 3, ((elem - 3) % 3) as u8))
        } else {
            None
        }
    }

    pub fn head_elem(&self, q: usize, sym: u8) -> usize {
        3 + 3 * q + usize::from(sym)
    }

    /// The local update: the element of a cell at the next step, given
    /// its neighborhood. Absent neighbors are tape edges. Halting heads
    /// freeze. If two heads try to arrive, the left one wins; such
    /// neighborhoods never occur in a reachable configuration.
    pub fn successor_element(
        &self,
        left: Option<usize>,
        center: usize,
        right: Option<usize>,
    ) -> usize {
        if let Some((q, sym)) = self.head_of(center) {
            if self.is_halting(q) {
                return center;
            }
            let (_, written, _) = self.lookup(q, sym).expect("delta total");
            return usize::from(written);
        }
        if let Some(a) = left {
            if let Some((q, sym)) = self.head_of(a) {
                if !self.is_halting(q) {
                    let (q2, _, d) = self.lookup(q, sym).expect("delta total");
                    if d == Dir::R {
                        return self.head_elem(q2, center as u8);
                    }
                }
            }
        }
        if let Some(c) = right {
            if let Some((q, sym)) = self.head_of(c) {
                if !self.is_halting(q) {
                    let (q2, _, d) = self.lookup(q, sym).expect("delta total");
                    if d == Dir::L {
                        return self.head_elem(q2, center as u8);
                    }
                }
            }
        }
        center
    }

    /// Consistent neighborhood: at most one head among the cells.
    fn consistent(&self, cells: &[usize]) -> bool {
        cells.iter().filter(|&&e| e >= 3).count() <= 1
    }

    /// `A_s` for interior cells: consistent predecessor triples mapping
    /// to each target element.
    pub fn middle_tables(&self) -> Vec<Vec<(usize, usize, usize)>> {
        let k = self.k();
        let mut tables = vec![Vec::new(); k];
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if !self.consistent(&[a, b, c]) {
                        continue;
                    }
                    let s = self.successor_element(Some(a), b, Some(c));
                    tables[s].push((a, b, c));
                }
            }
        }
        tables
    }

    /// `A_s` at the left tape edge (no left neighbor): pairs (b, c).
    pub fn left_tables(&self) -> Vec<Vec<(usize, usize)>> {
        let k = self.k();
        let mut tables = vec![Vec::new(); k];
        for b in 0..k {
            for c in 0..k {
                if !self.consistent(&[b, c]) {
                    continue;
                }
                let s = self.successor_element(None, b, Some(c));
                tables[s].push((b, c));
            }
        }
        tables
    }

    /// `A_s` at the right tape edge (no right neighbor): pairs (a, b).
    pub fn right_tables(&self) -> Vec<Vec<(usize, usize)>> {
        let k = self.k();
        let mut tables = vec![Vec::new(); k];
        for a in 0..k {
            for b in 0..k {
                if !self.consistent(&[a, b]) {
                    continue;
                }
                let s = self.successor_element(Some(a), b, None);
                tables[s].push((a, b));
            }
        }
        tables
    }
}

/// Gate definition at layer 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layer0Gate {
    Const(bool),
    /// On iff input bit `bit` equals `on_value`.
    InputBit { bit: usize, on_value: bool },
}

/// The tableau circuit for one machine, exponent and input length.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub n: usize,
    pub c: u32,
    /// Rows and cells: n^c each.
    pub rows: usize,
    pub k: usize,
    pub ell: usize,
    pub output_cell: usize,
    pub tab: TabMachine,
    middle: Vec<Vec<(usize, usize, usize)>>,
    left: Vec<Vec<(usize, usize)>>,
    right: Vec<Vec<(usize, usize)>>,
}

fn pow_u64(n: u64, c: u32) -> Option<u64> {
    n.checked_pow(c)
}

/// Builds the tableau circuit. The machine must be a decider over the
/// bare alphabet; the construction needs at least two cells.
pub fn tableau(m: &TMDescription, c: u32, n: usize, cfg: &Config) -> Result<Circuit, ArithError> {
    let tab = TabMachine::new(m)?;
    let rows = pow_u64(n as u64, c).ok_or(ArithError::CapExceeded {
        got: u64::MAX,
        cap: cfg.tableau_cap,
    })?;
    if rows > cfg.tableau_cap {
        return Err(ArithError::CapExceeded {
            got: rows,
            cap: cfg.tableau_cap,
        });
    }
    if rows < 2 {
        return Err(ArithError::TooSmall(rows));
    }
    if cfg.output_cell as u64 >= rows {
        return Err(ArithError::BadOutputCell {
            cell: cfg.output_cell,
            rows,
        });
    }
    let rows = rows as usize;
    let k = tab.k();
    let ell = tab.ell;
    let middle = tab.middle_tables();
    let left = tab.left_tables();
    let right = tab.right_tables();
    Ok(Circuit {
        n,
        c,
        rows,
        k,
        ell,
        output_cell: cfg.output_cell,
        tab,
        middle,
        left,
        right,
    })
}

impl Circuit {
    /// Total node count: (n^c)^2 * k, every layer included.
    pub fn gate_count(&self) -> u64 {
        (self.rows as u64) * (self.rows as u64) * (self.k as u64)
    }

    /// Layer-0 gate definition per the input-initialization pattern:
    /// the head cell holds the start-state element over the first bit,
    /// the remaining input cells hold their bare bit, padding is blank.
    pub fn layer0_gate(&self, j: usize, s: usize) -> Layer0Gate {
        if j >= self.n {
            return Layer0Gate::Const(s == usize::from(SYM_BLANK));
        }
        if j == 0 {
            // Head over the leftmost input bit in tableau state 0.
            match s {
                3 => Layer0Gate::InputBit { bit: 0, on_value: false },
                4 => Layer0Gate::InputBit { bit: 0, on_value: true },
                _ => Layer0Gate::Const(false),
            }
        } else {
            match s {
                0 => Layer0Gate::InputBit { bit: j, on_value: false },
                1 => Layer0Gate::InputBit { bit: j, on_value: true },
                _ => Layer0Gate::Const(false),
            }
        }
    }

    fn initial_elements(&self, bits: &[bool]) -> Vec<usize> {
        let mut row = Vec::with_capacity(self.rows);
        for j in 0..self.rows {
            row.push(if j >= self.n {
                usize::from(SYM_BLANK)
            } else {
                let sym = usize::from(bits[j]);
                if j == 0 {
                    3 + sym
                } else {
                    sym
                }
            });
        }
        row
    }

    /// One-hot element table of the run: rows x cells.
    pub fn light_table(&self, input: &str) -> Result<Vec<Vec<usize>>, ArithError> {
        let bits = parse_bits(input, self.n)?;
        let mut rows = Vec::with_capacity(self.rows);
        rows.push(self.initial_elements(&bits));
        for _ in 1..self.rows {
            let prev = rows.last().unwrap();
            let mut next = Vec::with_capacity(self.rows);
            for j in 0..self.rows {
                let left = if j == 0 { None } else { Some(prev[j - 1]) };
                let right = if j + 1 == self.rows { None } else { Some(prev[j + 1]) };
                next.push(self.tab.successor_element(left, prev[j], right));
            }
            rows.push(next);
        }
        Ok(rows)
    }

    /// Forward evaluation: accept iff an accept-state light is on at the
    /// output cell of the final row.
    pub fn eval(&self, input: &str) -> Result<bool, ArithError> {
        let table = self.light_table(input)?;
        let elem = table[self.rows - 1][self.output_cell];
        Ok(self
            .tab
            .head_of(elem)
            .is_some_and(|(q, _)| q == self.tab.accept_state()))
    }

    /// The witness natural: bit `i*rows*k + j*k + s` is light[i,j,s].
    pub fn witness(&self, input: &str) -> Result<BigUint, ArithError> {
        let table = self.light_table(input)?;
        let rows = self.rows as u64;
        let k = self.k as u64;
        let mut y = BigUint::ZERO;
        for (i, row) in table.iter().enumerate() {
            for (j, &elem) in row.iter().enumerate() {
                let idx = (i as u64) * rows * k + (j as u64) * k + elem as u64;
                y.set_bit(idx, true);
            }
        }
        Ok(y)
    }

    /// Line-based gate listing:
    /// `light i j s = CONST0 | CONST1 | INPUTDEF bit value | OR{ AND(a,b,c) ... }`.
    pub fn emit_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# tableau n={} c={} rows={} k={} output_cell={}",
            self.n, self.c, self.rows, self.k, self.output_cell
        );
        for j in 0..self.rows {
            for s in 0..self.k {
                match self.layer0_gate(j, s) {
                    Layer0Gate::Const(false) => {
                        let _ = writeln!(out, "light 0 {j} {s} = CONST0");
                    }
                    Layer0Gate::Const(true) => {
                        let _ = writeln!(out, "light 0 {j} {s} = CONST1");
                    }
                    Layer0Gate::InputBit { bit, on_value } => {
                        let _ = writeln!(
                            out,
                            "light 0 {j} {s} = INPUTDEF {bit} {}",
                            u8::from(on_value)
                        );
                    }
                }
            }
        }
        for i in 1..self.rows {
            for j in 0..self.rows {
                for s in 0..self.k {
                    let _ = write!(out, "light {i} {j} {s} = OR{{");
                    if j == 0 {
                        for (b, c) in &self.left[s] {
                            let _ = write!(out, " AND(-,{b},{c})");
                        }
                    } else if j + 1 == self.rows {
                        for (a, b) in &self.right[s] {
                            let _ = write!(out, " AND({a},{b},-)");
                        }
                    } else {
                        for (a, b, c) in &self.middle[s] {
                            let _ = write!(out, " AND({a},{b},{c})");
                        }
                    }
                    let _ = writeln!(out, " }}");
                }
            }
        }
        out
    }
}

fn parse_bits(input: &str, want: usize) -> Result<Vec<bool>, ArithError> {
    if input.len() != want || !input.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(ArithError::InputLength {
            got: input.len(),
            want,
        });
    }
    Ok(input.bytes().map(|b| b == b'1').collect())
}

/// Variable bookkeeping of the CNF translation.
#[derive(Debug, Clone)]
pub struct CnfVarMap {
    pub rows: usize,
    pub k: usize,
    /// 1-based CNF variable of light[i,j,s].
    pub light_base: usize,
    /// Variables carrying the input bits: the head-cell 1-light and the
    /// bit-1 lights of the remaining input cells.
    pub input_vars: Vec<i64>,
    pub num_vars: usize,
}

impl CnfVarMap {
    pub fn light_var(&self, i: usize, j: usize, s: usize) -> i64 {
        (self.light_base + i * self.rows * self.k + j * self.k + s) as i64
    }
}

/// Tseitin-style clausal translation with one variable per light and
/// fresh definitional variables per gate; clauses have width at most 3.
/// With `force_accept` a unit clause asserts an accept light at the
/// output cell of the final row.
pub fn circuit_to_cnf(circuit: &Circuit, force_accept: bool) -> (Cnf, CnfVarMap) {
    let rows = circuit.rows;
    let k = circuit.k;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut next_var = rows * rows * k + 1;
    let mut fresh = || {
        let v = next_var as i64;
        next_var += 1;
        v
    };
    let mut map = CnfVarMap {
        rows,
        k,
        light_base: 1,
        input_vars: Vec::new(),
        num_vars: 0,
    };

    // Layer 0: cells are one-hot and tied to the input bits.
    for j in 0..rows {
        let (off_sym, bit_pair) = if j >= circuit.n {
            // Padding: blank on, everything else off.
            clauses.push(vec![map.light_var(0, j, usize::from(SYM_BLANK))]);
            (Some(usize::from(SYM_BLANK)), None)
        } else if j == 0 {
            (None, Some((3usize, 4usize)))
        } else {
            (None, Some((0usize, 1usize)))
        };
        if let Some((s0, s1)) = bit_pair {
            let v0 = map.light_var(0, j, s0);
            let v1 = map.light_var(0, j, s1);
            clauses.push(vec![v0, v1]);
            clauses.push(vec![-v0, -v1]);
            map.input_vars.push(v1);
            for s in 0..k {
                if s != s0 && s != s1 {
                    clauses.push(vec![-map.light_var(0, j, s)]);
                }
            }
        } else if let Some(on) = off_sym {
            for s in 0..k {
                if s != on {
                    clauses.push(vec![-map.light_var(0, j, s)]);
                }
            }
        }
    }

    // Inner gates: light <-> OR of AND-triples over the A_s entries.
    for i in 1..rows {
        for j in 0..rows {
            for s in 0..k {
                let out = map.light_var(i, j, s);
                let mut entry_vars: Vec<i64> = Vec::new();
                let mut add_entry = |lits: &[i64], clauses: &mut Vec<Vec<i64>>| {
                    // aux <-> AND(lits), chained pairwise to stay width-3.
                    let mut acc = lits[0];
                    for &lit in &lits[1..] {
                        let t = fresh();
                        clauses.push(vec![-t, acc]);
                        clauses.push(vec![-t, lit]);
                        clauses.push(vec![t, -acc, -lit]);
                        acc = t;
                    }
                    entry_vars.push(acc);
                };
                if j == 0 {
                    for &(b, c) in &circuit.left[s] {
                        add_entry(
                            &[map.light_var(i - 1, j, b), map.light_var(i - 1, j + 1, c)],
                            &mut clauses,
                        );
                    }
                } else if j + 1 == rows {
                    for &(a, b) in &circuit.right[s] {
                        add_entry(
                            &[map.light_var(i - 1, j - 1, a), map.light_var(i - 1, j, b)],
                            &mut clauses,
                        );
                    }
                } else {
                    for &(a, b, c) in &circuit.middle[s] {
                        add_entry(
                            &[
                                map.light_var(i - 1, j - 1, a),
                                map.light_var(i - 1, j, b),
                                map.light_var(i - 1, j + 1, c),
                            ],
                            &mut clauses,
                        );
                    }
                }
                if entry_vars.is_empty() {
                    clauses.push(vec![-out]);
                    continue;
                }
                for &e in &entry_vars {
                    clauses.push(vec![-e, out]);
                }
                // -out -> some entry, split into width-3 links.
                let mut tail = -out;
                for (idx, &e) in entry_vars.iter().enumerate() {
                    if idx + 1 == entry_vars.len() {
                        clauses.push(vec![tail, e]);
                    } else if idx == entry_vars.len().saturating_sub(2) {
                        clauses.push(vec![tail, e, entry_vars[idx + 1]]);
                        break;
                    } else {
                        let link = fresh();
                        clauses.push(vec![tail, e, link]);
                        tail = -link;
                    }
                }
            }
        }
    }

    if force_accept {
        // An accept light at the designated output cell.
        let accepts: Vec<i64> = (0..3)
            .map(|b| map.light_var(rows - 1, circuit.output_cell, circuit.k - 3 + b))
            .collect();
        let d = fresh();
        for &a in &accepts {
            clauses.push(vec![-a, d]);
        }
        let tail = fresh_or(&mut clauses, &accepts[1..], &mut fresh);
        clauses.push(vec![-d, accepts[0], tail]);
        clauses.push(vec![d]);
    }

    map.num_vars = next_var - 1;
    let cnf = Cnf {
        num_vars: map.num_vars,
        clauses,
    };
    (cnf, map)
}

/// Folds literals into an OR chain returning a literal equivalent to the
/// disjunction; used for short tails.
fn fresh_or(
    clauses: &mut Vec<Vec<i64>>,
    lits: &[i64],
    fresh: &mut impl FnMut() -> i64,
) -> i64 {
    if lits.len() == 1 {
        return lits[0];
    }
    let d = fresh();
    for &l in lits {
        clauses.push(vec![-l, d]);
    }
    let mut clause = vec![-d];
    clause.extend_from_slice(lits);
    // lits is at most 2 long here, keeping the clause within width 3.
    clauses.push(clause);
    d
}

/// Variable ids of the generated rho formula.
pub const RHO_X: VarId = 1;
pub const RHO_Y: VarId = 2;
pub const RHO_N: VarId = 3;
const RHO_I: VarId = 4;
const RHO_J: VarId = 5;
const RHO_S: VarId = 6;

/// The generated formula family rho(x) for one machine and exponent,
/// together with the bookkeeping needed to evaluate it with hints.
#[derive(Debug, Clone)]
pub struct RhoFormula {
    pub formula: Formula,
    /// Conjunct parts for targeted testing: input transcription,
    /// transition closure, acceptance check.
    pub iset: Formula,
    pub trans: Formula,
    pub eval_part: Formula,
    pub c: u32,
    pub k: usize,
}

fn nvar() -> Term {
    Term::Var(RHO_N)
}

fn num(v: u64) -> Term {
    Term::num(v)
}

/// n^c as a term.
fn rows_term(c: u32) -> Term {
    nvar().pow(num(u64::from(c)))
}

/// Bit index of light[i,j,s]: i * n^c * k + j * k + s.
fn light_index(i: Term, j: Term, s: Term, c: u32, k: usize) -> Term {
    i.mul(rows_term(c)).mul(num(k as u64)).add(j.mul(num(k as u64))).add(s)
}

fn bit_is(y: VarId, index: Term, value: u64) -> Formula {
    eq(Term::Var(y).bit(index), num(value))
}

/// Exactly the element `e` is lit at layer-0 cell `j`.
fn onehot0(j: Term, e: usize, k: usize) -> Formula {
    let cell_base = j.mul(num(k as u64));
    and(
        bit_is(RHO_Y, cell_base.clone().add(num(e as u64)), 1),
        forall_lt(
            RHO_S,
            num(k as u64),
            implies(
                not(eq(Term::Var(RHO_S), num(e as u64))),
                bit_is(RHO_Y, cell_base.add(Term::Var(RHO_S)), 0),
            ),
        ),
    )
}

/// ISET: the input bits are transcribed into layer 0, most significant
/// bit at cell 0 under the start head, blanks beyond the input.
fn build_iset(c: u32, k: usize) -> Formula {
    let bit_x = |j: Term| Term::Var(RHO_X).bit(nvar().monus(num(1)).monus(j));
    let head = and(
        implies(eq(bit_x(num(0)), num(0)), onehot0(num(0), 3, k)),
        implies(eq(bit_x(num(0)), num(1)), onehot0(num(0), 4, k)),
    );
    let j = Term::Var(RHO_J);
    let mid = implies(
        and(lt(num(0), j.clone()), lt(j.clone(), nvar())),
        and(
            implies(eq(bit_x(j.clone()), num(0)), onehot0(j.clone(), 0, k)),
            implies(eq(bit_x(j.clone()), num(1)), onehot0(j.clone(), 1, k)),
        ),
    );
    let pad = implies(
        not(lt(j.clone(), nvar())),
        onehot0(j.clone(), usize::from(SYM_BLANK), k),
    );
    and(head, forall_lt(RHO_J, rows_term(c), and(mid, pad)))
}

/// One predecessor-window conjunct: the eta_0, eta_1, eta_2 bit checks of
/// a concrete table entry.
fn entry_conjunct(
    prev_row: &Term,
    j: &Term,
    entry: (Option<usize>, usize, Option<usize>),
    c: u32,
    k: usize,
) -> Formula {
    let (a, b, cc) = entry;
    let mut parts = Vec::new();
    if let Some(a) = a {
        parts.push(bit_is(
            RHO_Y,
            light_index(prev_row.clone(), j.clone().monus(num(1)), num(a as u64), c, k),
            1,
        ));
    }
    parts.push(bit_is(
        RHO_Y,
        light_index(prev_row.clone(), j.clone(), num(b as u64), c, k),
        1,
    ));
    if let Some(cc) = cc {
        parts.push(bit_is(
            RHO_Y,
            light_index(prev_row.clone(), j.clone().add(num(1)), num(cc as u64), c, k),
            1,
        ));
    }
    and_all(parts)
}

/// TRANS: for every interior row, cell and element, the light is on
/// exactly when some A_s predecessor window fires.
fn build_trans(circuit: &Circuit) -> Formula {
    let c = circuit.c;
    let k = circuit.k;
    let i = Term::Var(RHO_I);
    let j = Term::Var(RHO_J);
    let s = Term::Var(RHO_S);
    let prev = i.clone().monus(num(1));
    let or_table = |entries: Vec<(Option<usize>, usize, Option<usize>)>| -> Formula {
        if entries.is_empty() {
            // No window produces this element.
            lt(Term::Zero, Term::Zero)
        } else {
            or_all(
                entries
                    .into_iter()
                    .map(|e| entry_conjunct(&prev, &j, e, c, k))
                    .collect(),
            )
        }
    };
    let mut per_target = Vec::with_capacity(k);
    for target in 0..k {
        let left_or = or_table(
            circuit.left[target]
                .iter()
                .map(|&(b, cc)| (None, b, Some(cc)))
                .collect(),
        );
        let right_or = or_table(
            circuit.right[target]
                .iter()
                .map(|&(a, b)| (Some(a), b, None))
                .collect(),
        );
        let mid_or = or_table(
            circuit.middle[target]
                .iter()
                .map(|&(a, b, cc)| (Some(a), b, Some(cc)))
                .collect(),
        );
        let last_cell = rows_term(c).monus(num(1));
        let fire = and_all(vec![
            implies(eq(j.clone(), num(0)), left_or),
            implies(
                and(lt(num(0), j.clone()), lt(j.clone(), last_cell.clone())),
                mid_or,
            ),
            implies(and(eq(j.clone(), last_cell), not(eq(j.clone(), num(0)))), right_or),
        ]);
        let light_on = bit_is(
            RHO_Y,
            light_index(i.clone(), j.clone(), s.clone(), c, k),
            1,
        );
        per_target.push(implies(
            eq(s.clone(), num(target as u64)),
            pa::iff(fire, light_on),
        ));
    }
    forall_lt(
        RHO_I,
        rows_term(c),
        implies(
            lt(num(0), i.clone()),
            forall_lt(
                RHO_J,
                rows_term(c),
                forall_lt(RHO_S, num(k as u64), and_all(per_target)),
            ),
        ),
    )
}

/// EVAL: an accept light at the output cell of the final row.
fn build_eval(circuit: &Circuit) -> Formula {
    let c = circuit.c;
    let k = circuit.k;
    let last_row = rows_term(c).monus(num(1));
    let idx = light_index(
        last_row,
        num(circuit.output_cell as u64),
        Term::Var(RHO_S),
        c,
        k,
    );
    exists_lt(
        RHO_S,
        num(k as u64),
        and(
            lt(num(k as u64 - 4), Term::Var(RHO_S)),
            bit_is(RHO_Y, idx, 1),
        ),
    )
}

/// rho(x): there is a unique execution-history witness below
/// 2^(n^(2c) * k) that transcribes the input, is transition-closed, and
/// shows an accept light at the output cell.
pub fn to_pa_formula(m: &TMDescription, c: u32, cfg: &Config) -> Result<RhoFormula, ArithError> {
    // The tables do not depend on n; build them at the smallest size.
    let circuit = tableau(m, 1, 2, &Config {
        output_cell: 0,
        ..cfg.clone()
    })
    .map_err(|e| match e {
        ArithError::TooSmall(_) => unreachable!("two cells requested"),
        other => other,
    })?;
    let circuit = Circuit {
        c,
        output_cell: cfg.output_cell,
        ..circuit
    };
    let k = circuit.k;
    let iset = build_iset(c, k);
    let trans = build_trans(&circuit);
    let eval_part = build_eval(&circuit);
    let witness_bound = num(2).pow(
        Term::Var(RHO_X)
            .len()
            .pow(num(2 * u64::from(c)))
            .mul(num(k as u64)),
    );
    let body = and(iset.clone(), and(trans.clone(), eval_part.clone()));
    let formula = exists_unique_lt(
        RHO_Y,
        witness_bound,
        exists_lt(
            RHO_N,
            Term::Var(RHO_X).len().succ(),
            and(eq(nvar(), Term::Var(RHO_X).len()), body),
        ),
    );
    Ok(RhoFormula {
        formula,
        iset,
        trans,
        eval_part,
        c,
        k,
    })
}

/// The unique execution-history witness for machine `m` on `[x]`.
pub fn run_witness(
    m: &TMDescription,
    c: u32,
    x: &BigUint,
    cfg: &Config,
) -> Result<BigUint, ArithError> {
    let input = crate::godel::binary_repr(x);
    let circuit = tableau(m, c, input.len(), cfg)?;
    circuit.witness(&input)
}

/// Convenience: the instance rho(a) evaluated with the run witness as
/// the hint for the unique existential.
pub fn eval_rho_at(
    rho: &RhoFormula,
    m: &TMDescription,
    a: &BigUint,
    cfg: &Config,
    fuel: u64,
) -> Result<bool, crate::pa::EvalError> {
    let witness = match run_witness(m, rho.c, a, cfg) {
        Ok(w) => w,
        Err(_) => BigUint::one(),
    };
    let instance = rho
        .formula
        .subst(RHO_X, &pa::numeral_of(a))
        .expect("numerals never capture");
    let mut opts = pa::EvalOptions::with_fuel(fuel);
    opts.hints.insert(RHO_Y, witness);
    opts.check_uniqueness = false;
    pa::eval_bounded(&instance, &Default::default(), &opts, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::tm::{run_bounded, step_bound};

    fn cfg() -> Config {
        Config::default()
    }

    fn inputs_of_len(n: usize) -> Vec<String> {
        (0..(1u32 << n))
            .map(|bits| {
                (0..n)
                    .map(|i| if bits >> (n - 1 - i) & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn accept_all_circuit_accepts_every_input() {
        let m = corpus::accept_all();
        let circuit = tableau(&m, 1, 2, &cfg()).unwrap();
        for input in inputs_of_len(2) {
            assert!(circuit.eval(&input).unwrap(), "input {input}");
        }
    }

    #[test]
    fn gate_count_law() {
        // (n^c)^2 * k with k = 3 + 3*ell; a 3-state machine at n=3, c=1
        // has 9 * 12 = 108 gates.
        let m = corpus::accept_all();
        let circuit = tableau(&m, 1, 3, &cfg()).unwrap();
        assert_eq!(circuit.gate_count(), 108);
        for (_, m) in corpus::deciders() {
            for n in 2..=5usize {
                let circuit = tableau(&m, 1, n, &cfg()).unwrap();
                let k = (3 + 3 * m.num_states) as u64;
                assert_eq!(circuit.gate_count(), (n as u64).pow(2) * k);
            }
        }
    }

    #[test]
    fn circuit_matches_interpreter_exhaustively() {
        for (name, m) in corpus::deciders() {
            for c in 1..=2u32 {
                for n in 1..=5usize {
                    if (n as u64).pow(c) < 2 {
                        continue;
                    }
                    let circuit = tableau(&m, c, n, &cfg()).unwrap();
                    for input in inputs_of_len(n) {
                        let bound = step_bound(n as u64, &BigUint::from(c));
                        let (verdict, _) = run_bounded(&m, &input, bound, false).unwrap();
                        assert_eq!(
                            circuit.eval(&input).unwrap(),
                            verdict.accepts(),
                            "{name} c={c} on {input}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn one_hot_invariant_on_all_rows() {
        // The element representation is one-hot by construction; check
        // against the literal OR-of-ANDs gate semantics on a small case.
        let m = corpus::parity();
        let circuit = tableau(&m, 2, 3, &cfg()).unwrap();
        for input in inputs_of_len(3) {
            let table = circuit.light_table(&input).unwrap();
            for i in 1..circuit.rows {
                for j in 0..circuit.rows {
                    let mut on = Vec::new();
                    for s in 0..circuit.k {
                        let fired = if j == 0 {
                            circuit.left[s]
                                .iter()
                                .any(|&(b, c)| table[i - 1][j] == b && table[i - 1][j + 1] == c)
                        } else if j + 1 == circuit.rows {
                            circuit.right[s]
                                .iter()
                                .any(|&(a, b)| table[i - 1][j - 1] == a && table[i - 1][j] == b)
                        } else {
                            circuit.middle[s].iter().any(|&(a, b, c)| {
                                table[i - 1][j - 1] == a
                                    && table[i - 1][j] == b
                                    && table[i - 1][j + 1] == c
                            })
                        };
                        if fired {
                            on.push(s);
                        }
                    }
                    assert_eq!(on, vec![table[i][j]], "cell ({i},{j}) on {input}");
                }
            }
        }
    }

    #[test]
    fn tableau_rejects_bad_shapes() {
        let m = corpus::bit_flip_transducer();
        assert_eq!(tableau(&m, 1, 3, &cfg()).unwrap_err(), ArithError::NotDecider);
        let m = corpus::accept_all();
        assert_eq!(tableau(&m, 1, 1, &cfg()).unwrap_err(), ArithError::TooSmall(1));
        let tight = Config {
            tableau_cap: 8,
            ..Config::default()
        };
        assert!(matches!(
            tableau(&m, 2, 4, &tight),
            Err(ArithError::CapExceeded { got: 16, cap: 8 })
        ));
    }

    #[test]
    fn cnf_satisfiable_iff_some_input_accepted() {
        for (name, m) in corpus::deciders() {
            for n in 2..=4usize {
                let circuit = tableau(&m, 1, n, &cfg()).unwrap();
                let (cnf, _) = circuit_to_cnf(&circuit, true);
                cnf.validate().unwrap();
                assert!(cnf.max_clause_width() <= 3, "{name} n={n}");
                let brute = inputs_of_len(n)
                    .iter()
                    .any(|input| circuit.eval(input).unwrap());
                let solved = crate::sat::solve(&cnf).is_some();
                assert_eq!(solved, brute, "{name} n={n}");
            }
        }
    }

    #[test]
    fn cnf_models_restrict_to_accepted_inputs() {
        // For each accepted input, pinning the input variables keeps the
        // CNF satisfiable; for each rejected input it becomes
        // unsatisfiable.
        let m = corpus::parity();
        let n = 3usize;
        let circuit = tableau(&m, 2, n, &cfg()).unwrap();
        let (cnf, map) = circuit_to_cnf(&circuit, true);
        for input in inputs_of_len(n) {
            let mut pinned = cnf.clone();
            for (bit, &var) in input.bytes().zip(map.input_vars.iter()) {
                pinned.clauses.push(vec![if bit == b'1' { var } else { -var }]);
            }
            let expect = circuit.eval(&input).unwrap();
            assert_eq!(crate::sat::solve(&pinned).is_some(), expect, "input {input}");
        }
    }

    #[test]
    fn witness_bits_follow_the_packing_order() {
        let m = corpus::accept_all();
        let circuit = tableau(&m, 1, 2, &cfg()).unwrap();
        let input = "10";
        let table = circuit.light_table(input).unwrap();
        let y = circuit.witness(input).unwrap();
        let rows = circuit.rows as u64;
        let k = circuit.k as u64;
        for (i, row) in table.iter().enumerate() {
            for (j, &elem) in row.iter().enumerate() {
                for s in 0..circuit.k {
                    let idx = (i as u64) * rows * k + (j as u64) * k + s as u64;
                    assert_eq!(y.bit(idx), s == elem);
                }
            }
        }
        // Determinism: same inputs give identical witnesses.
        assert_eq!(y, circuit.witness(input).unwrap());
    }

    #[test]
    fn rho_matches_interpreter_on_small_inputs() {
        let config = cfg();
        for (name, m) in corpus::deciders() {
            let c = 2u32;
            let rho = to_pa_formula(&m, c, &config).unwrap();
            for a in 2u64..16 {
                let a = BigUint::from(a);
                let input = crate::godel::binary_repr(&a);
                let bound = step_bound(input.len() as u64, &BigUint::from(c));
                let (verdict, _) = run_bounded(&m, &input, bound, false).unwrap();
                let got = eval_rho_at(&rho, &m, &a, &config, 2_000_000_000).unwrap();
                assert_eq!(got, verdict.accepts(), "{name} at a={a}");
            }
        }
    }

    #[test]
    fn rho_conjunct_structure_is_the_papers() {
        let m = corpus::accept_all();
        let rho = to_pa_formula(&m, 1, &cfg()).unwrap();
        // E! y < 2^(n^2c * k) . E n <= |x| . (n = |x| & (ISET & (TRANS & EVAL)))
        match &rho.formula {
            Formula::ExistsUniqueB(RHO_Y, bound, body) => {
                assert!(matches!(bound, Term::Pow(_, _)));
                match &**body {
                    Formula::ExistsB(RHO_N, _, _, inner) => match &**inner {
                        Formula::And(n_def, rest) => {
                            assert!(matches!(&**n_def, Formula::Eq(_, _)));
                            assert!(matches!(&**rest, Formula::And(_, _)));
                        }
                        other => panic!("unexpected inner shape {other:?}"),
                    },
                    other => panic!("unexpected body shape {other:?}"),
                }
            }
            other => panic!("unexpected formula shape {other:?}"),
        }
    }

    #[test]
    fn rejecting_input_fails_only_the_eval_conjunct() {
        // On a rejected input the run witness satisfies ISET and TRANS
        // while EVAL is false.
        let m = corpus::parity();
        let c = 2u32;
        let config = cfg();
        let rho = to_pa_formula(&m, c, &config).unwrap();
        let a = BigUint::from(2u32); // "10": one 1-bit, rejected
        let witness = run_witness(&m, c, &a, &config).unwrap();
        let mut opts = pa::EvalOptions::with_fuel(500_000_000);
        opts.hints.insert(RHO_Y, witness.clone());
        let mut env = std::collections::HashMap::new();
        env.insert(RHO_X, a.clone());
        env.insert(RHO_Y, witness);
        env.insert(RHO_N, BigUint::from(2u32));
        assert!(pa::eval_bounded(&rho.iset, &env, &opts, None).unwrap());
        assert!(pa::eval_bounded(&rho.trans, &env, &opts, None).unwrap());
        assert!(!pa::eval_bounded(&rho.eval_part, &env, &opts, None).unwrap());
        assert!(!eval_rho_at(&rho, &m, &a, &config, 2_000_000_000).unwrap());
    }
}
