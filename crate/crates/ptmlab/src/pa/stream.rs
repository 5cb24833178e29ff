//! Canonical symbol streams of core formulas and their Gödel numbers.
//!
//! Numerals stream in the binary form `n0 + n1*SS0 + n2*SS0*SS0 + ...`,
//! so the code of the numeral of n has length of order log^2 n.

use super::{Formula, PaError, Term, VarId};
use crate::godel::{self, GodelNumber, Symbol};
use num_bigint::BigUint;
use num_traits::Zero as _;

/// Precedence level of a term in the stream grammar: 0 = factor,
/// 1 = product, 2 = sum. Numerals of two or more bits stream as sums.
fn level(t: &Term) -> u8 {
    match t {
        Term::Add(_, _) => 2,
        Term::Numeral(n) => {
            if godel::bit_len(n) >= 2 {
                2
            } else {
                0
            }
        }
        Term::Mul(_, _) => 1,
        _ => 0,
    }
}

/// Streams a term at the given maximum precedence level. Sums and
/// products stay flat and left-associative; anything that would
/// reassociate on reparse gets parentheses.
fn emit_at(t: &Term, max_level: u8, out: &mut Vec<Symbol>) -> Result<(), PaError> {
    if level(t) > max_level {
        out.push(Symbol::LParen);
        emit_at(t, 2, out)?;
        out.push(Symbol::RParen);
        return Ok(());
    }
    match t {
        Term::Zero => out.push(Symbol::Zero),
        Term::Succ(a) => {
            out.push(Symbol::Succ);
            emit_at(a, 0, out)?;
        }
        Term::Var(v) => {
            if *v == 0 {
                return Err(PaError::Stream("variables are 1-indexed".into()));
            }
            out.push(Symbol::Var(*v));
        }
        Term::Param(p) => {
            if *p == 0 {
                return Err(PaError::Stream("parameters are 1-indexed".into()));
            }
            out.push(Symbol::Param(*p));
        }
        Term::Add(a, b) => {
            emit_at(a, 2, out)?;
            out.push(Symbol::Plus);
            emit_at(b, 1, out)?;
        }
        Term::Mul(a, b) => {
            emit_at(a, 1, out)?;
            out.push(Symbol::Times);
            emit_at(b, 0, out)?;
        }
        Term::Numeral(n) => emit_numeral(n, out),
        Term::Len(_) | Term::Bit(_, _) | Term::Monus(_, _) | Term::Pow(_, _) => {
            return Err(PaError::DerivedSymbol)
        }
    }
    Ok(())
}

fn emit_term(t: &Term, out: &mut Vec<Symbol>) -> Result<(), PaError> {
    emit_at(t, 2, out)
}

/// `n0 + n1*SS0 + n2*SS0*SS0 + ...` with every bit of n present as a
/// summand coefficient (0 or S0).
fn emit_numeral(n: &BigUint, out: &mut Vec<Symbol>) {
    let k = godel::bit_len(n);
    if n.is_zero() {
        out.push(Symbol::Zero);
        return;
    }
    if k == 1 {
        out.push(Symbol::Succ);
        out.push(Symbol::Zero);
        return;
    }
    for i in 0..k {
        if i > 0 {
            out.push(Symbol::Plus);
        }
        if n.bit(i) {
            out.push(Symbol::Succ);
            out.push(Symbol::Zero);
        } else {
            out.push(Symbol::Zero);
        }
        for _ in 0..i {
            out.push(Symbol::Times);
            out.push(Symbol::Succ);
            out.push(Symbol::Succ);
            out.push(Symbol::Zero);
        }
    }
}

/// Binary-form numeral as an explicit term tree (left-associated), the
/// shape the stream parser folds back into a `Numeral`.
pub fn binary_form(n: &BigUint) -> Term {
    let k = godel::bit_len(n);
    if n.is_zero() {
        return Term::Zero;
    }
    if k == 1 {
        return Term::Zero.succ();
    }
    let ss0 = Term::Zero.succ().succ();
    let mut sum: Option<Term> = None;
    for i in 0..k {
        let coeff = if n.bit(i) { Term::Zero.succ() } else { Term::Zero };
        let mut summand = coeff;
        for _ in 0..i {
            summand = summand.mul(ss0.clone());
        }
        sum = Some(match sum {
            None => summand,
            Some(s) => s.add(summand),
        });
    }
    sum.unwrap()
}

/// Canonical symbol stream of a core formula. Errors on derived symbols
/// and non-core connectives.
pub fn symbol_stream(f: &Formula) -> Result<Vec<Symbol>, PaError> {
    if f.has_derived() {
        return Err(PaError::DerivedSymbol);
    }
    let mut out = Vec::new();
    emit_formula(f, &mut out)?;
    Ok(out)
}

fn emit_formula(f: &Formula, out: &mut Vec<Symbol>) -> Result<(), PaError> {
    match f {
        Formula::Eq(a, b) => {
            emit_term(a, out)?;
            out.push(Symbol::Equal);
            emit_term(b, out)?;
        }
        Formula::Lt(a, b) => {
            emit_term(a, out)?;
            out.push(Symbol::Less);
            emit_term(b, out)?;
        }
        Formula::Not(g) => {
            out.push(Symbol::Not);
            out.push(Symbol::LParen);
            emit_formula(g, out)?;
            out.push(Symbol::RParen);
        }
        Formula::Implies(a, b) => {
            out.push(Symbol::LParen);
            emit_formula(a, out)?;
            out.push(Symbol::Implies);
            emit_formula(b, out)?;
            out.push(Symbol::RParen);
        }
        Formula::ForAll(v, g) => {
            if *v == 0 {
                return Err(PaError::Stream("variables are 1-indexed".into()));
            }
            out.push(Symbol::ForAll);
            out.push(Symbol::Var(*v));
            out.push(Symbol::LParen);
            emit_formula(g, out)?;
            out.push(Symbol::RParen);
        }
        _ => return Err(PaError::NotCore),
    }
    Ok(())
}

/// `#f`: the sequence code of the core symbol stream. The formula is
/// rewritten to the core basis first; derived function symbols are an
/// error since they carry no codes.
pub fn godel_number(f: &Formula) -> Result<GodelNumber, PaError> {
    if f.has_derived() {
        return Err(PaError::DerivedSymbol);
    }
    let core = super::to_core(f)?;
    let stream = symbol_stream(&core)?;
    Ok(godel::encode_expression(&stream)?)
}

struct StreamParser<'a> {
    syms: &'a [Symbol],
    pos: usize,
}

impl<'a> StreamParser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, PaError> {
        Err(PaError::Stream(format!("at symbol {}: {}", self.pos, msg)))
    }

    fn peek(&self) -> Option<Symbol> {
        self.syms.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Symbol> {
        let s = self.peek();
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, s: Symbol) -> Result<(), PaError> {
        if self.next() == Some(s) {
            Ok(())
        } else {
            self.err(&format!("expected {s}"))
        }
    }

    fn factor(&mut self) -> Result<Term, PaError> {
        match self.next() {
            Some(Symbol::Zero) => Ok(Term::Zero),
            Some(Symbol::Var(v)) => Ok(Term::Var(v as VarId)),
            Some(Symbol::Param(p)) => Ok(Term::Param(p)),
            Some(Symbol::Succ) => Ok(self.factor()?.succ()),
            Some(Symbol::LParen) => {
                let t = self.sum()?;
                self.expect(Symbol::RParen)?;
                Ok(t)
            }
            _ => self.err("expected a term factor"),
        }
    }

    fn product(&mut self) -> Result<Term, PaError> {
        let mut t = self.factor()?;
        while self.peek() == Some(Symbol::Times) {
            self.pos += 1;
            t = t.mul(self.factor()?);
        }
        Ok(t)
    }

    fn sum(&mut self) -> Result<Term, PaError> {
        let mut t = self.product()?;
        while self.peek() == Some(Symbol::Plus) {
            self.pos += 1;
            t = t.add(self.product()?);
        }
        Ok(fold_binary_form(&t))
    }

    fn formula(&mut self) -> Result<Formula, PaError> {
        match self.peek() {
            Some(Symbol::Not) => {
                self.pos += 1;
                self.expect(Symbol::LParen)?;
                let g = self.formula()?;
                self.expect(Symbol::RParen)?;
                Ok(super::not(g))
            }
            Some(Symbol::ForAll) => {
                self.pos += 1;
                let v = match self.next() {
                    Some(Symbol::Var(v)) => v,
                    _ => return self.err("expected a variable after the quantifier"),
                };
                self.expect(Symbol::LParen)?;
                let g = self.formula()?;
                self.expect(Symbol::RParen)?;
                Ok(super::forall(v as VarId, g))
            }
            Some(Symbol::LParen) => {
                // Ambiguous: an implication or an atom whose left term is
                // parenthesized. Try the implication, then backtrack.
                let save = self.pos;
                match self.implication() {
                    Ok(f) => Ok(f),
                    Err(_) => {
                        self.pos = save;
                        self.atom()
                    }
                }
            }
            _ => self.atom(),
        }
    }

    fn implication(&mut self) -> Result<Formula, PaError> {
        self.expect(Symbol::LParen)?;
        let a = self.formula()?;
        self.expect(Symbol::Implies)?;
        let b = self.formula()?;
        self.expect(Symbol::RParen)?;
        Ok(super::implies(a, b))
    }

    fn atom(&mut self) -> Result<Formula, PaError> {
        let a = self.sum()?;
        match self.next() {
            Some(Symbol::Equal) => Ok(super::eq(a, self.sum()?)),
            Some(Symbol::Less) => Ok(super::lt(a, self.sum()?)),
            _ => self.err("expected = or < after the left term"),
        }
    }
}

/// Folds a parsed left-associated binary-form chain back into a `Numeral`.
/// Non-canonical chains are left structural.
fn fold_binary_form(t: &Term) -> Term {
    fn summands(t: &Term, out: &mut Vec<Term>) {
        match t {
            Term::Add(a, b) => {
                summands(a, out);
                out.push((**b).clone());
            }
            other => out.push(other.clone()),
        }
    }
    fn factors(t: &Term, out: &mut Vec<Term>) {
        match t {
            Term::Mul(a, b) => {
                factors(a, out);
                out.push((**b).clone());
            }
            other => out.push(other.clone()),
        }
    }
    let is_ss0 = |t: &Term| {
        matches!(t, Term::Succ(a) if matches!(&**a, Term::Succ(b) if matches!(&**b, Term::Zero)))
    };
    let coeff_value = |t: &Term| -> Option<bool> {
        match t {
            Term::Zero => Some(false),
            Term::Succ(a) if matches!(&**a, Term::Zero) => Some(true),
            _ => None,
        }
    };
    let mut parts = Vec::new();
    summands(t, &mut parts);
    if parts.len() < 2 {
        return t.clone();
    }
    let mut value = BigUint::zero();
    for (i, part) in parts.iter().enumerate() {
        let mut fs = Vec::new();
        factors(part, &mut fs);
        if fs.len() != i + 1 {
            return t.clone();
        }
        let Some(bit) = coeff_value(&fs[0]) else {
            return t.clone();
        };
        if !fs[1..].iter().all(is_ss0) {
            return t.clone();
        }
        if bit {
            value.set_bit(i as u64, true);
        }
    }
    // Canonical binary forms carry a leading 1 bit.
    if godel::bit_len(&value) as usize != parts.len() {
        return t.clone();
    }
    Term::Numeral(value)
}

impl<'a> StreamParser<'a> {
    fn run(symbols: &'a [Symbol]) -> Result<Formula, PaError> {
        let mut p = StreamParser { syms: symbols, pos: 0 };
        let f = p.formula()?;
        if p.pos != p.syms.len() {
            return p.err("trailing symbols");
        }
        Ok(f)
    }
}

/// Parses a canonical core symbol stream back into a formula. Binary-form
/// numeral chains fold to `Numeral` nodes, so the composition with
/// `symbol_stream` is the identity on canonical formulas.
pub fn formula_from_symbols(symbols: &[Symbol]) -> Result<Formula, PaError> {
    StreamParser::run(symbols)
}
