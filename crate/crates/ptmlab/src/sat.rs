//! Independent SAT ground truth: a DPLL solver, the 3-CNF natural-number
//! codec, and the 3SAT relation.

use crate::godel::{self, GodelNumber};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::fmt::Write as _;
use thiserror::Error;

/// CNF with signed 1-indexed literals. Clauses from the tableau pipeline
/// have at most three literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("literal {0} references an undeclared variable")]
    BadLiteral(i64),
    #[error("dimacs parse error: {0}")]
    Dimacs(String),
}

impl Cnf {
    pub fn validate(&self) -> Result<(), CnfError> {
        for clause in &self.clauses {
            for &lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > self.num_vars {
                    return Err(CnfError::BadLiteral(lit));
                }
            }
        }
        Ok(())
    }

    pub fn max_clause_width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Complete DPLL with unit propagation over variable occurrence lists.
/// Branches on the lowest-indexed unassigned variable that still occurs
/// in an unresolved clause, trying false first.
pub fn solve(cnf: &Cnf) -> Option<Vec<bool>> {
    let mut solver = Solver::new(cnf);
    if solver.initial_propagation() && solver.dpll() {
        Some(
            solver
                .assign
                .iter()
                .skip(1)
                .map(|a| a.unwrap_or(false))
                .collect(),
        )
    } else {
        None
    }
}

struct Solver<'a> {
    cnf: &'a Cnf,
    assign: Vec<Option<bool>>,
    /// Clause indices per variable.
    occ: Vec<Vec<u32>>,
    trail: Vec<usize>,
}

impl<'a> Solver<'a> {
    fn new(cnf: &'a Cnf) -> Self {
        let mut occ: Vec<Vec<u32>> = vec![Vec::new(); cnf.num_vars + 1];
        for (ci, clause) in cnf.clauses.iter().enumerate() {
            for &lit in clause {
                occ[lit.unsigned_abs() as usize].push(ci as u32);
            }
        }
        Solver {
            cnf,
            assign: vec![None; cnf.num_vars + 1],
            occ,
            trail: Vec::new(),
        }
    }

    fn lit_value(&self, lit: i64) -> Option<bool> {
        self.assign[lit.unsigned_abs() as usize].map(|v| if lit > 0 { v } else { !v })
    }

    fn set(&mut self, var: usize, value: bool) {
        self.assign[var] = Some(value);
        self.trail.push(var);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            self.assign[var] = None;
        }
    }

    /// Examines one clause: Err(()) on conflict, Ok(Some(lit)) for a unit.
    fn clause_status(&self, ci: usize) -> Result<Option<i64>, ()> {
        let mut unassigned: Option<i64> = None;
        let mut unassigned_count = 0;
        for &lit in &self.cnf.clauses[ci] {
            match self.lit_value(lit) {
                Some(true) => return Ok(None),
                Some(false) => {}
                None => {
                    unassigned_count += 1;
                    if unassigned.is_none() {
                        unassigned = Some(lit);
                    }
                }
            }
        }
        match unassigned_count {
            0 => Err(()),
            1 => Ok(unassigned),
            _ => Ok(None),
        }
    }

    /// Seeds propagation from all clauses once.
    fn initial_propagation(&mut self) -> bool {
        let mut queue: Vec<i64> = Vec::new();
        for ci in 0..self.cnf.clauses.len() {
            match self.clause_status(ci) {
                Err(()) => return false,
                Ok(Some(lit)) => queue.push(lit),
                Ok(None) => {}
            }
        }
        self.propagate(queue)
    }

    /// Assigns queued units and follows consequences through the
    /// occurrence lists. False on conflict.
    fn propagate(&mut self, mut queue: Vec<i64>) -> bool {
        while let Some(lit) = queue.pop() {
            let var = lit.unsigned_abs() as usize;
            match self.assign[var] {
                Some(v) => {
                    if v != (lit > 0) {
                        return false;
                    }
                    continue;
                }
                None => self.set(var, lit > 0),
            }
            for idx in 0..self.occ[var].len() {
                let ci = self.occ[var][idx] as usize;
                match self.clause_status(ci) {
                    Err(()) => return false,
                    Ok(Some(unit)) => queue.push(unit),
                    Ok(None) => {}
                }
            }
        }
        true
    }

    fn branch_variable(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (ci, clause) in self.cnf.clauses.iter().enumerate() {
            if clause.iter().any(|&l| self.lit_value(l) == Some(true)) {
                continue;
            }
            let _ = ci;
            for &lit in clause {
                if self.lit_value(lit).is_none() {
                    let var = lit.unsigned_abs() as usize;
                    best = Some(best.map_or(var, |b| b.min(var)));
                }
            }
        }
        best
    }

    fn dpll(&mut self) -> bool {
        let Some(var) = self.branch_variable() else {
            return true;
        };
        for value in [false, true] {
            let mark = self.trail.len();
            if self.propagate(vec![if value { var as i64 } else { -(var as i64) }])
                && self.dpll()
            {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

/// Zig-zag literal code: `+v -> 2v`, `-v -> 2v+1`.
fn zigzag(lit: i64) -> BigUint {
    let var = lit.unsigned_abs();
    if lit > 0 {
        BigUint::from(2 * var)
    } else {
        BigUint::from(2 * var + 1)
    }
}

fn unzigzag(code: &BigUint) -> Option<i64> {
    let code = code.to_u64()?;
    let var = i64::try_from(code / 2).ok()?;
    if var == 0 {
        return None;
    }
    Some(if code % 2 == 0 { var } else { -var })
}

/// Natural-number code of a 3-CNF: the sequence code of
/// `[varcount, lit, lit, lit, ...]` with exactly three literals per clause.
/// Shorter clauses are padded by repeating their last literal.
pub fn encode_cnf3(cnf: &Cnf) -> Option<GodelNumber> {
    cnf.validate().ok()?;
    if cnf.max_clause_width() > 3 {
        return None;
    }
    let mut entries = vec![BigUint::from(cnf.num_vars as u64)];
    for clause in &cnf.clauses {
        if clause.is_empty() {
            return None;
        }
        let mut padded = clause.clone();
        while padded.len() < 3 {
            padded.push(*padded.last().unwrap());
        }
        for lit in padded {
            entries.push(zigzag(lit));
        }
    }
    godel::encode_seq(&entries).ok()
}

/// Total decoder; anything outside the codec's range is an invalid 3-CNF.
pub fn decode_cnf3(x: &BigUint) -> Option<Cnf> {
    let entries = godel::decode_seq(&GodelNumber(x.clone())).ok()?;
    if entries.is_empty() || (entries.len() - 1) % 3 != 0 {
        return None;
    }
    let num_vars = entries[0].to_u64()?;
    if num_vars > u64::from(u32::MAX) {
        return None;
    }
    let num_vars = num_vars as usize;
    let mut clauses = Vec::with_capacity((entries.len() - 1) / 3);
    for chunk in entries[1..].chunks_exact(3) {
        let mut clause = Vec::with_capacity(3);
        for code in chunk {
            let lit = unzigzag(code)?;
            if lit.unsigned_abs() as usize > num_vars {
                return None;
            }
            clause.push(lit);
        }
        clauses.push(clause);
    }
    Some(Cnf { num_vars, clauses })
}

/// `x` is in the 3SAT relation iff it codes a satisfiable 3-CNF.
pub fn sat_relation(x: &BigUint) -> bool {
    match decode_cnf3(x) {
        None => false,
        Some(cnf) => solve(&cnf).is_some(),
    }
}

/// Size function for 3SAT inputs: the variable count of a valid code,
/// the bit length otherwise.
pub fn size_sat3(w: &BigUint) -> u64 {
    match decode_cnf3(w) {
        Some(cnf) => cnf.num_vars as u64,
        None => godel::bit_len(w),
    }
}

/// Occurrence-indexed satisfaction: assignment bit j of `w` gives the
/// value of the j-th distinct variable in order of first occurrence.
/// This is the semantics of the `sat_matrix` formula atom; it agrees with
/// plain satisfiability because renaming variables preserves it.
pub fn sat_matrix(x: &BigUint, w: &BigUint) -> bool {
    let Some(cnf) = decode_cnf3(x) else {
        return false;
    };
    let mut order: Vec<usize> = Vec::new();
    let value = |var: usize, w: &BigUint, order: &mut Vec<usize>| -> bool {
        let idx = match order.iter().position(|&v| v == var) {
            Some(i) => i,
            None => {
                order.push(var);
                order.len() - 1
            }
        };
        w.bit(idx as u64)
    };
    for clause in &cnf.clauses {
        let mut ok = false;
        for &lit in clause {
            let var = lit.unsigned_abs() as usize;
            let v = value(var, w, &mut order);
            if (lit > 0) == v {
                ok = true;
            }
        }
        if !ok {
            return false;
        }
    }
    true
}

/// DIMACS cnf emission: header then zero-terminated clauses.
pub fn to_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for clause in &cnf.clauses {
        for &lit in clause {
            let _ = write!(out, "{lit} ");
        }
        let _ = writeln!(out, "0");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, CnfError> {
    let mut num_vars: Option<usize> = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(CnfError::Dimacs("bad problem line".into()));
            }
            num_vars = Some(
                parts[0]
                    .parse()
                    .map_err(|_| CnfError::Dimacs("bad variable count".into()))?,
            );
            declared_clauses = parts[1]
                .parse()
                .map_err(|_| CnfError::Dimacs("bad clause count".into()))?;
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| CnfError::Dimacs(format!("bad literal {tok:?}")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(CnfError::Dimacs("unterminated clause".into()));
    }
    let num_vars = num_vars.ok_or(CnfError::Dimacs("missing problem line".into()))?;
    if clauses.len() != declared_clauses {
        return Err(CnfError::Dimacs(format!(
            "clause count mismatch: declared {declared_clauses}, got {}",
            clauses.len()
        )));
    }
    let cnf = Cnf { num_vars, clauses };
    cnf.validate()?;
    Ok(cnf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(num_vars: usize, clauses: &[&[i64]]) -> Cnf {
        Cnf {
            num_vars,
            clauses: clauses.iter().map(|c| c.to_vec()).collect(),
        }
    }

    /// Brute-force oracle over all assignments.
    fn brute_force(cnf: &Cnf) -> bool {
        let n = cnf.num_vars;
        assert!(n <= 20);
        'outer: for mask in 0u64..(1 << n) {
            for clause in &cnf.clauses {
                let sat = clause.iter().any(|&lit| {
                    let var = lit.unsigned_abs() as usize;
                    let v = mask >> (var - 1) & 1 == 1;
                    (lit > 0) == v
                });
                if !sat {
                    continue 'outer;
                }
            }
            return true;
        }
        false
    }

    #[test]
    fn empty_clause_set_is_sat() {
        assert_eq!(solve(&cnf(0, &[])), Some(vec![]));
    }

    #[test]
    fn contradiction_is_unsat() {
        assert!(solve(&cnf(1, &[&[1], &[-1]])).is_none());
    }

    #[test]
    fn model_satisfies_the_formula() {
        let f = cnf(3, &[&[1, -2, 3], &[-1, 2, 2], &[-3, -3, -3]]);
        let model = solve(&f).unwrap();
        for clause in &f.clauses {
            assert!(clause.iter().any(|&lit| {
                let v = model[lit.unsigned_abs() as usize - 1];
                (lit > 0) == v
            }));
        }
    }

    #[test]
    fn random_instances_agree_with_brute_force() {
        // Deterministic LCG; up to 12 variables, exhaustive cross-check.
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..200 {
            let n = (next() % 12 + 1) as usize;
            let m = (next() % 24 + 1) as usize;
            let mut clauses = Vec::new();
            for _ in 0..m {
                let mut clause = Vec::new();
                for _ in 0..3 {
                    let var = (next() % n as u64 + 1) as i64;
                    let neg = next() % 2 == 0;
                    clause.push(if neg { -var } else { var });
                }
                clauses.push(clause);
            }
            let f = Cnf {
                num_vars: n,
                clauses,
            };
            assert_eq!(solve(&f).is_some(), brute_force(&f));
        }
    }

    #[test]
    fn codec_round_trip() {
        let f = cnf(3, &[&[1, -2, 3], &[-1, -1, -1]]);
        let code = encode_cnf3(&f).unwrap();
        let back = decode_cnf3(code.value()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn sat_relation_on_simple_codes() {
        let tauto = cnf(1, &[&[1, 1, 1]]);
        assert!(sat_relation(encode_cnf3(&tauto).unwrap().value()));
        let contra = cnf(1, &[&[1, 1, 1], &[-1, -1, -1]]);
        assert!(!sat_relation(encode_cnf3(&contra).unwrap().value()));
        // Invalid codes are outside the relation; 5 = 0b101 has odd bit
        // length. 3 decodes to the clause-free CNF <1>, which is
        // vacuously satisfiable.
        assert!(!sat_relation(&BigUint::from(0u32)));
        assert!(!sat_relation(&BigUint::from(5u32)));
        assert!(sat_relation(&BigUint::from(3u32)));
    }

    #[test]
    fn size_fallback_for_invalid_codes() {
        let f = cnf(5, &[&[1, 2, 3]]);
        let code = encode_cnf3(&f).unwrap();
        assert_eq!(size_sat3(code.value()), 5);
        // 13 = 0b1101 is not a valid sequence code of a 3-CNF.
        assert_eq!(size_sat3(&BigUint::from(13u32)), 4);
    }

    #[test]
    fn sat_matrix_agrees_with_solver() {
        let fs = [
            cnf(2, &[&[1, 2, 2], &[-1, 2, 2]]),
            cnf(3, &[&[1, -2, 3], &[-1, -1, -1], &[2, 2, 2]]),
            cnf(1, &[&[1, 1, 1], &[-1, -1, -1]]),
        ];
        for f in fs {
            let code = encode_cnf3(&f).unwrap();
            let mut any = false;
            let occurring: usize = {
                let mut seen = Vec::new();
                for c in &f.clauses {
                    for &l in c {
                        let v = l.unsigned_abs() as usize;
                        if !seen.contains(&v) {
                            seen.push(v);
                        }
                    }
                }
                seen.len()
            };
            for w in 0u64..(1 << occurring) {
                if sat_matrix(code.value(), &BigUint::from(w)) {
                    any = true;
                    break;
                }
            }
            assert_eq!(any, solve(&f).is_some());
        }
    }

    #[test]
    fn dimacs_round_trip() {
        let f = cnf(4, &[&[1, -2, 3], &[-4, 2, 2]]);
        let text = to_dimacs(&f);
        assert!(text.starts_with("p cnf 4 2\n"));
        let back = parse_dimacs(&text).unwrap();
        assert_eq!(f, back);
    }
}
