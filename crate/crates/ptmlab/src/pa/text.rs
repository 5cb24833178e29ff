//! Concrete ASCII grammar for terms and formulas.
//!
//! Terms: `0 | S t | (t + t) | (t * t) | xN | aN | #N` plus the derived
//! forms `len(t)`, `bit(t,t)`, `monus(t,t)`, `pow(t,t)`.
//! Formulas: `t = t | t < t | !f | (f & f) | (f | f) | (f -> f) |
//! (f <-> f) | A xN. f | E xN. f | E! xN. f` and the bounded forms
//! `A xN < t. f`, `E xN < t. f`, `E xN >= t. f`.

use super::{BoundKind, Formula, PaError, SemAtom, SemKind, Term};
use num_bigint::BigUint;

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Zero => "0".into(),
        Term::Succ(a) => format!("S {}", print_term(a)),
        Term::Add(a, b) => format!("({} + {})", print_term(a), print_term(b)),
        Term::Mul(a, b) => format!("({} * {})", print_term(a), print_term(b)),
        Term::Var(v) => format!("x{v}"),
        Term::Param(p) => format!("a{p}"),
        Term::Numeral(n) => format!("#{n}"),
        Term::Len(a) => format!("len({})", print_term(a)),
        Term::Bit(a, b) => format!("bit({}, {})", print_term(a), print_term(b)),
        Term::Monus(a, b) => format!("monus({}, {})", print_term(a), print_term(b)),
        Term::Pow(a, b) => format!("pow({}, {})", print_term(a), print_term(b)),
    }
}

pub fn print_formula(f: &Formula) -> String {
    match f {
        Formula::Eq(a, b) => format!("{} = {}", print_term(a), print_term(b)),
        Formula::Lt(a, b) => format!("{} < {}", print_term(a), print_term(b)),
        Formula::Not(g) => format!("!{}", print_formula(g)),
        Formula::And(a, b) => format!("({} & {})", print_formula(a), print_formula(b)),
        Formula::Or(a, b) => format!("({} | {})", print_formula(a), print_formula(b)),
        Formula::Implies(a, b) => format!("({} -> {})", print_formula(a), print_formula(b)),
        Formula::Iff(a, b) => format!("({} <-> {})", print_formula(a), print_formula(b)),
        Formula::ForAll(v, g) => format!("A x{v}. {}", print_formula(g)),
        Formula::Exists(v, g) => format!("E x{v}. {}", print_formula(g)),
        Formula::ExistsUnique(v, g) => format!("E! x{v}. {}", print_formula(g)),
        Formula::ForAllB(v, BoundKind::Lt, t, g) => {
            format!("A x{v} < {}. {}", print_term(t), print_formula(g))
        }
        Formula::ForAllB(v, BoundKind::Ge, t, g) => {
            format!("A x{v} >= {}. {}", print_term(t), print_formula(g))
        }
        Formula::ExistsB(v, BoundKind::Lt, t, g) => {
            format!("E x{v} < {}. {}", print_term(t), print_formula(g))
        }
        Formula::ExistsB(v, BoundKind::Ge, t, g) => {
            format!("E x{v} >= {}. {}", print_term(t), print_formula(g))
        }
        Formula::ExistsUniqueB(v, t, g) => {
            format!("E! x{v} < {}. {}", print_term(t), print_formula(g))
        }
        Formula::Sem(atom) => {
            let args: Vec<String> = atom.args.iter().map(print_term).collect();
            match &atom.kind {
                SemKind::SatMatrix => format!("@sat_matrix({})", args.join(", ")),
                SemKind::MachineAcc { family } => {
                    format!("@acc{{{family}}}({})", args.join(", "))
                }
                SemKind::MachineOut { family } => {
                    format!("@out{{{family}}}({})", args.join(", "))
                }
                SemKind::ProofAcpt { family } => {
                    format!("@proof_acpt{{{family}}}({})", args.join(", "))
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PaError> {
        Err(PaError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, expected: u8) -> Result<(), PaError> {
        if self.peek() == Some(expected) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {:?}", expected as char))
        }
    }

    fn eat_str(&mut self, expected: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(expected.as_bytes()) {
            self.pos += expected.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<BigUint, PaError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        Ok(BigUint::parse_bytes(&self.src[start..self.pos], 10).expect("digits"))
    }

    fn small_number(&mut self) -> Result<u32, PaError> {
        let n = self.number()?;
        u32::try_from(&n).map_err(|_| PaError::Parse {
            pos: self.pos,
            msg: "index too large".into(),
        })
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        }
    }

    fn term(&mut self) -> Result<Term, PaError> {
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(Term::Zero)
            }
            Some(b'#') => {
                self.pos += 1;
                Ok(super::numeral_of(&self.number()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let a = self.term()?;
                let op = self.peek();
                let t = match op {
                    Some(b'+') => {
                        self.pos += 1;
                        a.add(self.term()?)
                    }
                    Some(b'*') => {
                        self.pos += 1;
                        a.mul(self.term()?)
                    }
                    _ => return self.err("expected + or * in a parenthesized term"),
                };
                self.eat(b')')?;
                Ok(t)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let save = self.pos;
                let Some(word) = self.ident() else {
                    return self.err("expected a term");
                };
                match word.as_str() {
                    "S" => Ok(self.term()?.succ()),
                    "len" => {
                        self.eat(b'(')?;
                        let t = self.term()?;
                        self.eat(b')')?;
                        Ok(t.len())
                    }
                    "bit" | "monus" | "pow" => {
                        self.eat(b'(')?;
                        let a = self.term()?;
                        self.eat(b',')?;
                        let b = self.term()?;
                        self.eat(b')')?;
                        Ok(match word.as_str() {
                            "bit" => a.bit(b),
                            "monus" => a.monus(b),
                            _ => a.pow(b),
                        })
                    }
                    w if w.starts_with('x') && w[1..].bytes().all(|b| b.is_ascii_digit()) && w.len() > 1 => {
                        Ok(Term::Var(w[1..].parse().map_err(|_| PaError::Parse {
                            pos: save,
                            msg: "variable index too large".into(),
                        })?))
                    }
                    w if w.starts_with('a') && w[1..].bytes().all(|b| b.is_ascii_digit()) && w.len() > 1 => {
                        Ok(Term::Param(w[1..].parse().map_err(|_| PaError::Parse {
                            pos: save,
                            msg: "parameter index too large".into(),
                        })?))
                    }
                    _ => {
                        self.pos = save;
                        self.err(format!("unknown term head {word:?}"))
                    }
                }
            }
            _ => self.err("expected a term"),
        }
    }

    fn var(&mut self) -> Result<u32, PaError> {
        self.skip_ws();
        if self.peek() != Some(b'x') {
            return self.err("expected a variable xN");
        }
        self.pos += 1;
        self.small_number()
    }

    fn quantifier_tail(&mut self, universal: bool, unique: bool) -> Result<Formula, PaError> {
        let v = self.var()?;
        let bound = if self.eat_str(">=") {
            Some((BoundKind::Ge, self.term()?))
        } else if self.peek() == Some(b'<') {
            self.pos += 1;
            Some((BoundKind::Lt, self.term()?))
        } else {
            None
        };
        self.eat(b'.')?;
        let body = self.formula()?;
        Ok(match (universal, unique, bound) {
            (true, false, None) => super::forall(v, body),
            (false, false, None) => super::exists(v, body),
            (false, true, None) => Formula::ExistsUnique(v, Box::new(body)),
            (true, false, Some((k, t))) => Formula::ForAllB(v, k, t, Box::new(body)),
            (false, false, Some((k, t))) => Formula::ExistsB(v, k, t, Box::new(body)),
            (false, true, Some((BoundKind::Lt, t))) => {
                Formula::ExistsUniqueB(v, t, Box::new(body))
            }
            (false, true, Some((BoundKind::Ge, _))) => {
                return self.err("E! supports only a < bound")
            }
            (true, true, _) => unreachable!(),
        })
    }

    fn sem_atom(&mut self) -> Result<Formula, PaError> {
        // Leading '@' consumed by the caller.
        let Some(name) = self.ident() else {
            return self.err("expected a semantic-atom name after @");
        };
        let mut braced_family = |p: &mut Self| -> Result<String, PaError> {
            p.eat(b'{')?;
            let start = p.pos;
            while p.pos < p.src.len() && p.src[p.pos] != b'}' {
                p.pos += 1;
            }
            let family = String::from_utf8_lossy(&p.src[start..p.pos]).into_owned();
            p.eat(b'}')?;
            Ok(family)
        };
        let kind = match name.as_str() {
            "sat_matrix" => SemKind::SatMatrix,
            "acc" => SemKind::MachineAcc {
                family: braced_family(self)?,
            },
            "out" => SemKind::MachineOut {
                family: braced_family(self)?,
            },
            "proof_acpt" => SemKind::ProofAcpt {
                family: braced_family(self)?,
            },
            other => return self.err(format!("unknown semantic atom {other:?}")),
        };
        self.eat(b'(')?;
        let mut args = vec![self.term()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.eat(b')')?;
        Ok(Formula::Sem(SemAtom { kind, args }))
    }

    fn formula(&mut self) -> Result<Formula, PaError> {
        // Attempt an atomic formula first; terms and formulas both start
        // with '(' so a failed attempt backtracks.
        let save = self.pos;
        let opens_with_paren = self.peek() == Some(b'(');
        if let Ok(t1) = self.term() {
            match self.peek() {
                Some(b'=') => {
                    self.pos += 1;
                    let t2 = self.term()?;
                    return Ok(super::eq(t1, t2));
                }
                Some(b'<') if !self.src[self.pos..].starts_with(b"<->") => {
                    self.pos += 1;
                    let t2 = self.term()?;
                    return Ok(super::lt(t1, t2));
                }
                _ if !opens_with_paren => {
                    // A bare term can only continue as an atomic formula.
                    return self.err("expected = or < after the term");
                }
                _ => self.pos = save,
            }
        } else {
            self.pos = save;
        }

        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(super::not(self.formula()?))
            }
            Some(b'@') => {
                self.pos += 1;
                self.sem_atom()
            }
            Some(b'A') => {
                self.pos += 1;
                self.quantifier_tail(true, false)
            }
            Some(b'E') => {
                self.pos += 1;
                let unique = self.peek() == Some(b'!');
                if unique {
                    self.pos += 1;
                }
                self.quantifier_tail(false, unique)
            }
            Some(b'(') => {
                self.pos += 1;
                let a = self.formula()?;
                let f = if self.eat_str("<->") {
                    super::iff(a, self.formula()?)
                } else if self.eat_str("->") {
                    super::implies(a, self.formula()?)
                } else if self.eat_str("&") {
                    super::and(a, self.formula()?)
                } else if self.eat_str("|") {
                    super::or(a, self.formula()?)
                } else if self.peek() == Some(b')') {
                    // Redundant parentheses around a formula.
                    a
                } else {
                    return self.err("expected a connective");
                };
                self.eat(b')')?;
                Ok(f)
            }
            _ => self.err("expected a formula"),
        }
    }
}

pub fn parse_term(text: &str) -> Result<Term, PaError> {
    let mut p = Parser::new(text);
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input after term");
    }
    Ok(t)
}

pub fn parse_formula(text: &str) -> Result<Formula, PaError> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input after formula");
    }
    Ok(f)
}
