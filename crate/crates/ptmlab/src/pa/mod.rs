//! PA syntax: terms, formulas, binary-form numerals, substitution,
//! derived-symbol elimination, and Gödel numbering of formulas.

mod classify;
mod eval;
mod stream;
mod text;

pub use classify::{classify, FormulaClass};
pub use eval::{eval_bounded, EvalError, EvalOptions, SemanticHook};
pub use stream::{formula_from_symbols, godel_number, symbol_stream};
pub use text::{parse_formula, parse_term};

use crate::godel::{self, GodelNumber};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Variable index: `Var(1)` is x1.
pub type VarId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Zero,
    Succ(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Var(VarId),
    /// Parameter symbol `a_i`; a free placeholder distinct from variables.
    Param(u32),
    /// Numeral in binary form; prints as `#n` in the text grammar and
    /// expands to `n0 + n1*SS0 + ...` in the symbol stream.
    Numeral(BigUint),
    /// Bit length `|t|`; derived, carries no Gödel code.
    Len(Box<Term>),
    /// `Bit(t, i)`: the i-th rightmost binary digit of t.
    Bit(Box<Term>, Box<Term>),
    /// Truncated subtraction.
    Monus(Box<Term>, Box<Term>),
    /// Exponentiation.
    Pow(Box<Term>, Box<Term>),
}

impl Term {
    pub fn succ(self) -> Term {
        Term::Succ(Box::new(self))
    }
    pub fn add(self, other: Term) -> Term {
        Term::Add(Box::new(self), Box::new(other))
    }
    pub fn mul(self, other: Term) -> Term {
        Term::Mul(Box::new(self), Box::new(other))
    }
    pub fn len(self) -> Term {
        Term::Len(Box::new(self))
    }
    pub fn bit(self, i: Term) -> Term {
        Term::Bit(Box::new(self), Box::new(i))
    }
    pub fn monus(self, other: Term) -> Term {
        Term::Monus(Box::new(self), Box::new(other))
    }
    pub fn pow(self, e: Term) -> Term {
        Term::Pow(Box::new(self), Box::new(e))
    }

    pub fn num(n: u64) -> Term {
        numeral_of(&BigUint::from(n))
    }

    pub fn has_derived(&self) -> bool {
        match self {
            Term::Zero | Term::Var(_) | Term::Param(_) => false,
            Term::Numeral(_) => false,
            Term::Succ(t) => t.has_derived(),
            Term::Add(a, b) | Term::Mul(a, b) => a.has_derived() || b.has_derived(),
            Term::Len(_) | Term::Bit(_, _) | Term::Monus(_, _) | Term::Pow(_, _) => true,
        }
    }

    fn vars_into(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Term::Zero | Term::Param(_) | Term::Numeral(_) => {}
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Succ(t) | Term::Len(t) => t.vars_into(out),
            Term::Add(a, b)
            | Term::Mul(a, b)
            | Term::Bit(a, b)
            | Term::Monus(a, b)
            | Term::Pow(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut s = BTreeSet::new();
        self.vars_into(&mut s);
        s
    }

    /// Substitutes `replacement` for `v`.
    pub fn subst(&self, v: VarId, replacement: &Term) -> Term {
        match self {
            Term::Var(w) if *w == v => replacement.clone(),
            Term::Zero | Term::Var(_) | Term::Param(_) | Term::Numeral(_) => self.clone(),
            Term::Succ(t) => Term::Succ(Box::new(t.subst(v, replacement))),
            Term::Len(t) => Term::Len(Box::new(t.subst(v, replacement))),
            Term::Add(a, b) => Term::Add(
                Box::new(a.subst(v, replacement)),
                Box::new(b.subst(v, replacement)),
            ),
            Term::Mul(a, b) => Term::Mul(
                Box::new(a.subst(v, replacement)),
                Box::new(b.subst(v, replacement)),
            ),
            Term::Bit(a, b) => Term::Bit(
                Box::new(a.subst(v, replacement)),
                Box::new(b.subst(v, replacement)),
            ),
            Term::Monus(a, b) => Term::Monus(
                Box::new(a.subst(v, replacement)),
                Box::new(b.subst(v, replacement)),
            ),
            Term::Pow(a, b) => Term::Pow(
                Box::new(a.subst(v, replacement)),
                Box::new(b.subst(v, replacement)),
            ),
        }
    }

    /// Value of a closed term, if it is closed.
    pub fn closed_value(&self) -> Option<BigUint> {
        match self {
            Term::Zero => Some(BigUint::zero()),
            Term::Var(_) | Term::Param(_) => None,
            Term::Numeral(n) => Some(n.clone()),
            Term::Succ(t) => Some(t.closed_value()? + 1u32),
            Term::Add(a, b) => Some(a.closed_value()? + b.closed_value()?),
            Term::Mul(a, b) => Some(a.closed_value()? * b.closed_value()?),
            Term::Len(t) => Some(BigUint::from(godel::bit_len(&t.closed_value()?))),
            Term::Bit(a, b) => {
                let x = a.closed_value()?;
                let i = b.closed_value()?;
                let bit = u64::try_from(&i).ok().map(|i| x.bit(i)).unwrap_or(false);
                Some(if bit { BigUint::one() } else { BigUint::zero() })
            }
            Term::Monus(a, b) => {
                let x = a.closed_value()?;
                let y = b.closed_value()?;
                Some(if x >= y { x - y } else { BigUint::zero() })
            }
            Term::Pow(a, b) => {
                let x = a.closed_value()?;
                let e = u32::try_from(&b.closed_value()?).ok()?;
                Some(x.pow(e))
            }
        }
    }
}

/// Bound kind of the bounded-quantifier sugar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// `x < t`
    Lt,
    /// `x >= t`
    Ge,
}

/// Opaque bounded atoms standing for polynomial-time-checkable matrices.
/// They evaluate through a semantic hook and carry no Gödel number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SemKind {
    /// `sat_matrix(x, w)`: the 3-CNF coded by x is satisfied by the
    /// assignment whose bits (indexed by first variable occurrence) are w.
    SatMatrix,
    /// `acc{family}(e, a)`: the machine coded by e accepts the decision
    /// input for the named family at a.
    MachineAcc { family: String },
    /// `out{family}(e, a, b)`: the machine coded by e, on the proof-mode
    /// input for the named family at a, outputs b.
    MachineOut { family: String },
    /// `proof_acpt{family}(a, b)`: b codes a proof tree the checker
    /// accepts for the family instance at a.
    ProofAcpt { family: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemAtom {
    pub kind: SemKind,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Lt(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(VarId, Box<Formula>),
    Exists(VarId, Box<Formula>),
    ExistsUnique(VarId, Box<Formula>),
    /// `A x < t. f` / `A x >= t. f`
    ForAllB(VarId, BoundKind, Term, Box<Formula>),
    /// `E x < t. f` / `E x >= t. f`
    ExistsB(VarId, BoundKind, Term, Box<Formula>),
    /// `E! x < t. f`
    ExistsUniqueB(VarId, Term, Box<Formula>),
    Sem(SemAtom),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaError {
    #[error("syntax error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("formula contains a derived function symbol; eliminate it first")]
    DerivedSymbol,
    #[error("formula is not in the core connective basis")]
    NotCore,
    #[error("substituting {term} for x{var} would capture a bound variable")]
    Capture { var: VarId, term: String },
    #[error("exponent is not a constant; the graph expansion applies only in formulas")]
    NonConstantExponent,
    #[error("malformed symbol stream: {0}")]
    Stream(String),
    #[error(transparent)]
    Godel(#[from] godel::GodelError),
}

pub fn eq(a: Term, b: Term) -> Formula {
    Formula::Eq(a, b)
}
pub fn lt(a: Term, b: Term) -> Formula {
    Formula::Lt(a, b)
}
pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}
pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}
pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}
pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}
pub fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Box::new(a), Box::new(b))
}
pub fn forall(v: VarId, f: Formula) -> Formula {
    Formula::ForAll(v, Box::new(f))
}
pub fn exists(v: VarId, f: Formula) -> Formula {
    Formula::Exists(v, Box::new(f))
}
pub fn forall_lt(v: VarId, t: Term, f: Formula) -> Formula {
    Formula::ForAllB(v, BoundKind::Lt, t, Box::new(f))
}
pub fn exists_lt(v: VarId, t: Term, f: Formula) -> Formula {
    Formula::ExistsB(v, BoundKind::Lt, t, Box::new(f))
}
pub fn exists_ge(v: VarId, t: Term, f: Formula) -> Formula {
    Formula::ExistsB(v, BoundKind::Ge, t, Box::new(f))
}
pub fn exists_unique_lt(v: VarId, t: Term, f: Formula) -> Formula {
    Formula::ExistsUniqueB(v, t, Box::new(f))
}

/// Conjunction of a non-empty list, right-nested.
pub fn and_all(mut fs: Vec<Formula>) -> Formula {
    let last = fs.pop().expect("non-empty conjunction");
    fs.into_iter().rev().fold(last, |acc, f| and(f, acc))
}

/// Disjunction of a non-empty list, right-nested.
pub fn or_all(mut fs: Vec<Formula>) -> Formula {
    let last = fs.pop().expect("non-empty disjunction");
    fs.into_iter().rev().fold(last, |acc, f| or(f, acc))
}

impl Formula {
    pub fn free_vars(&self) -> BTreeSet<VarId> {
        fn go(f: &Formula, bound: &mut Vec<VarId>, out: &mut BTreeSet<VarId>) {
            let term_vars = |t: &Term, bound: &Vec<VarId>, out: &mut BTreeSet<VarId>| {
                for v in t.vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            };
            match f {
                Formula::Eq(a, b) | Formula::Lt(a, b) => {
                    term_vars(a, bound, out);
                    term_vars(b, bound, out);
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::ForAll(v, g) | Formula::Exists(v, g) | Formula::ExistsUnique(v, g) => {
                    bound.push(*v);
                    go(g, bound, out);
                    bound.pop();
                }
                Formula::ForAllB(v, _, t, g)
                | Formula::ExistsB(v, _, t, g)
                | Formula::ExistsUniqueB(v, t, g) => {
                    term_vars(t, bound, out);
                    bound.push(*v);
                    go(g, bound, out);
                    bound.pop();
                }
                Formula::Sem(atom) => {
                    for t in &atom.args {
                        term_vars(t, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Largest variable index mentioned anywhere (free or bound).
    pub fn max_var(&self) -> VarId {
        fn tmax(t: &Term) -> VarId {
            t.vars().into_iter().max().unwrap_or(0)
        }
        match self {
            Formula::Eq(a, b) | Formula::Lt(a, b) => tmax(a).max(tmax(b)),
            Formula::Not(g) => g.max_var(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.max_var().max(b.max_var()),
            Formula::ForAll(v, g) | Formula::Exists(v, g) | Formula::ExistsUnique(v, g) => {
                (*v).max(g.max_var())
            }
            Formula::ForAllB(v, _, t, g)
            | Formula::ExistsB(v, _, t, g)
            | Formula::ExistsUniqueB(v, t, g) => (*v).max(tmax(t)).max(g.max_var()),
            Formula::Sem(atom) => atom.args.iter().map(tmax).max().unwrap_or(0),
        }
    }

    pub fn has_derived(&self) -> bool {
        match self {
            Formula::Eq(a, b) | Formula::Lt(a, b) => a.has_derived() || b.has_derived(),
            Formula::Not(g) => g.has_derived(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.has_derived() || b.has_derived(),
            Formula::ForAll(_, g) | Formula::Exists(_, g) | Formula::ExistsUnique(_, g) => {
                g.has_derived()
            }
            Formula::ForAllB(_, _, t, g)
            | Formula::ExistsB(_, _, t, g)
            | Formula::ExistsUniqueB(_, t, g) => t.has_derived() || g.has_derived(),
            Formula::Sem(_) => false,
        }
    }

    pub fn has_sem_atom(&self) -> bool {
        match self {
            Formula::Sem(_) => true,
            Formula::Eq(_, _) | Formula::Lt(_, _) => false,
            Formula::Not(g) => g.has_sem_atom(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.has_sem_atom() || b.has_sem_atom(),
            Formula::ForAll(_, g) | Formula::Exists(_, g) | Formula::ExistsUnique(_, g) => {
                g.has_sem_atom()
            }
            Formula::ForAllB(_, _, _, g)
            | Formula::ExistsB(_, _, _, g)
            | Formula::ExistsUniqueB(_, _, g) => g.has_sem_atom(),
        }
    }

    /// Capture-avoiding substitution of `replacement` for free `v`.
    /// Errors when a variable of `replacement` would be captured.
    pub fn subst(&self, v: VarId, replacement: &Term) -> Result<Formula, PaError> {
        let repl_vars = replacement.vars();
        fn go(
            f: &Formula,
            v: VarId,
            replacement: &Term,
            repl_vars: &BTreeSet<VarId>,
        ) -> Result<Formula, PaError> {
            let quant = |w: VarId,
                         g: &Formula,
                         v: VarId,
                         replacement: &Term,
                         repl_vars: &BTreeSet<VarId>|
             -> Result<Option<Box<Formula>>, PaError> {
                if w == v {
                    // v is shadowed; nothing to substitute below.
                    return Ok(None);
                }
                if repl_vars.contains(&w) && g.free_vars().contains(&v) {
                    return Err(PaError::Capture {
                        var: w,
                        term: crate::pa::text::print_term(replacement),
                    });
                }
                Ok(Some(Box::new(go(g, v, replacement, repl_vars)?)))
            };
            Ok(match f {
                Formula::Eq(a, b) => Formula::Eq(a.subst(v, replacement), b.subst(v, replacement)),
                Formula::Lt(a, b) => Formula::Lt(a.subst(v, replacement), b.subst(v, replacement)),
                Formula::Not(g) => Formula::Not(Box::new(go(g, v, replacement, repl_vars)?)),
                Formula::And(a, b) => Formula::And(
                    Box::new(go(a, v, replacement, repl_vars)?),
                    Box::new(go(b, v, replacement, repl_vars)?),
                ),
                Formula::Or(a, b) => Formula::Or(
                    Box::new(go(a, v, replacement, repl_vars)?),
                    Box::new(go(b, v, replacement, repl_vars)?),
                ),
                Formula::Implies(a, b) => Formula::Implies(
                    Box::new(go(a, v, replacement, repl_vars)?),
                    Box::new(go(b, v, replacement, repl_vars)?),
                ),
                Formula::Iff(a, b) => Formula::Iff(
                    Box::new(go(a, v, replacement, repl_vars)?),
                    Box::new(go(b, v, replacement, repl_vars)?),
                ),
                Formula::ForAll(w, g) => match quant(*w, g, v, replacement, repl_vars)? {
                    None => f.clone(),
                    Some(g2) => Formula::ForAll(*w, g2),
                },
                Formula::Exists(w, g) => match quant(*w, g, v, replacement, repl_vars)? {
                    None => f.clone(),
                    Some(g2) => Formula::Exists(*w, g2),
                },
                Formula::ExistsUnique(w, g) => match quant(*w, g, v, replacement, repl_vars)? {
                    None => f.clone(),
                    Some(g2) => Formula::ExistsUnique(*w, g2),
                },
                Formula::ForAllB(w, k, t, g) => {
                    let t2 = t.subst(v, replacement);
                    match quant(*w, g, v, replacement, repl_vars)? {
                        None => Formula::ForAllB(*w, *k, t2, g.clone()),
                        Some(g2) => Formula::ForAllB(*w, *k, t2, g2),
                    }
                }
                Formula::ExistsB(w, k, t, g) => {
                    let t2 = t.subst(v, replacement);
                    match quant(*w, g, v, replacement, repl_vars)? {
                        None => Formula::ExistsB(*w, *k, t2, g.clone()),
                        Some(g2) => Formula::ExistsB(*w, *k, t2, g2),
                    }
                }
                Formula::ExistsUniqueB(w, t, g) => {
                    let t2 = t.subst(v, replacement);
                    match quant(*w, g, v, replacement, repl_vars)? {
                        None => Formula::ExistsUniqueB(*w, t2, g.clone()),
                        Some(g2) => Formula::ExistsUniqueB(*w, t2, g2),
                    }
                }
                Formula::Sem(atom) => Formula::Sem(SemAtom {
                    kind: atom.kind.clone(),
                    args: atom.args.iter().map(|t| t.subst(v, replacement)).collect(),
                }),
            })
        }
        go(self, v, replacement, &repl_vars)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::pa::text::print_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::pa::text::print_term(self))
    }
}

/// Binary-form numeral of `n`: `Zero` for 0, `S 0` for 1, the dedicated
/// binary expansion for larger values.
pub fn numeral_of(n: &BigUint) -> Term {
    if n.is_zero() {
        Term::Zero
    } else if n.is_one() {
        Term::Succ(Box::new(Term::Zero))
    } else {
        Term::Numeral(n.clone())
    }
}

/// Desugars bounded quantifiers, unique existence, and `Iff` into the
/// plain first-order constructors. `And`, `Or` and `Exists` stay.
pub fn desugar(f: &Formula) -> Formula {
    fn fresh_pair(f: &Formula) -> (VarId, VarId) {
        let m = f.max_var();
        (m + 1, m + 2)
    }
    match f {
        Formula::Eq(_, _) | Formula::Lt(_, _) | Formula::Sem(_) => f.clone(),
        Formula::Not(g) => not(desugar(g)),
        Formula::And(a, b) => and(desugar(a), desugar(b)),
        Formula::Or(a, b) => or(desugar(a), desugar(b)),
        Formula::Implies(a, b) => implies(desugar(a), desugar(b)),
        Formula::Iff(a, b) => {
            let a = desugar(a);
            let b = desugar(b);
            and(implies(a.clone(), b.clone()), implies(b, a))
        }
        Formula::ForAll(v, g) => forall(*v, desugar(g)),
        Formula::Exists(v, g) => exists(*v, desugar(g)),
        Formula::ExistsUnique(v, g) => {
            let g = desugar(g);
            let (y1, y2) = fresh_pair(&g);
            let g1 = g.subst(*v, &Term::Var(y1)).expect("fresh");
            let g2 = g.subst(*v, &Term::Var(y2)).expect("fresh");
            and(
                exists(*v, g),
                forall(
                    y1,
                    forall(
                        y2,
                        implies(and(g1, g2), eq(Term::Var(y1), Term::Var(y2))),
                    ),
                ),
            )
        }
        Formula::ForAllB(v, k, t, g) => {
            let guard = match k {
                BoundKind::Lt => lt(Term::Var(*v), t.clone()),
                BoundKind::Ge => not(lt(Term::Var(*v), t.clone())),
            };
            forall(*v, implies(guard, desugar(g)))
        }
        Formula::ExistsB(v, k, t, g) => {
            let guard = match k {
                BoundKind::Lt => lt(Term::Var(*v), t.clone()),
                BoundKind::Ge => not(lt(Term::Var(*v), t.clone())),
            };
            exists(*v, and(guard, desugar(g)))
        }
        Formula::ExistsUniqueB(v, t, g) => desugar(&Formula::ExistsUnique(
            *v,
            Box::new(and(lt(Term::Var(*v), t.clone()), (**g).clone())),
        )),
    }
}

/// Rewrites into the core basis over `=`, `<`, `¬`, `→`, `∀`: the form the
/// proof kernel and the Gödel numbering consume.
pub fn to_core(f: &Formula) -> Result<Formula, PaError> {
    fn go(f: &Formula) -> Result<Formula, PaError> {
        Ok(match f {
            Formula::Eq(_, _) | Formula::Lt(_, _) => f.clone(),
            Formula::Sem(_) => return Err(PaError::NotCore),
            Formula::Not(g) => not(go(g)?),
            Formula::Implies(a, b) => implies(go(a)?, go(b)?),
            Formula::And(a, b) => not(implies(go(a)?, not(go(b)?))),
            Formula::Or(a, b) => implies(not(go(a)?), go(b)?),
            Formula::ForAll(v, g) => forall(*v, go(g)?),
            Formula::Exists(v, g) => not(forall(*v, not(go(g)?))),
            other => go(&desugar(other))?,
        })
    }
    go(&desugar(f))
}

pub fn is_core(f: &Formula) -> bool {
    match f {
        Formula::Eq(a, b) | Formula::Lt(a, b) => !a.has_derived() && !b.has_derived(),
        Formula::Not(g) => is_core(g),
        Formula::Implies(a, b) => is_core(a) && is_core(b),
        Formula::ForAll(_, g) => is_core(g),
        _ => false,
    }
}

/// Replaces derived function symbols by their defining equivalences.
///
/// Closed applications fold to numerals. Open `Monus`, `Len` and `Bit`
/// expand to graph formulas behind fresh quantifiers; `Len` and `Bit`
/// introduce `Pow(2, ·)` with a bounded exponent variable, and any
/// remaining open `Pow` expands through the Gödel beta-function graph.
pub fn eliminate_derived(f: &Formula) -> Result<Formula, PaError> {
    let mut next = f.max_var() + 1;
    eliminate_inner(f, &mut next)
}

fn eliminate_inner(f: &Formula, next: &mut VarId) -> Result<Formula, PaError> {
    Ok(match f {
        Formula::Eq(a, b) => eliminate_atom(f, &[a.clone(), b.clone()], next)?,
        Formula::Lt(a, b) => eliminate_atom(f, &[a.clone(), b.clone()], next)?,
        Formula::Not(g) => not(eliminate_inner(g, next)?),
        Formula::And(a, b) => and(eliminate_inner(a, next)?, eliminate_inner(b, next)?),
        Formula::Or(a, b) => or(eliminate_inner(a, next)?, eliminate_inner(b, next)?),
        Formula::Implies(a, b) => implies(eliminate_inner(a, next)?, eliminate_inner(b, next)?),
        Formula::Iff(a, b) => iff(eliminate_inner(a, next)?, eliminate_inner(b, next)?),
        Formula::ForAll(v, g) => forall(*v, eliminate_inner(g, next)?),
        Formula::Exists(v, g) => exists(*v, eliminate_inner(g, next)?),
        Formula::ExistsUnique(v, g) => {
            Formula::ExistsUnique(*v, Box::new(eliminate_inner(g, next)?))
        }
        Formula::ForAllB(v, k, t, g) => {
            let desired = Formula::ForAllB(*v, *k, t.clone(), Box::new((**g).clone()));
            if t.has_derived() {
                eliminate_inner(&desugar_one_bounded(&desired), next)?
            } else {
                Formula::ForAllB(*v, *k, t.clone(), Box::new(eliminate_inner(g, next)?))
            }
        }
        Formula::ExistsB(v, k, t, g) => {
            let desired = Formula::ExistsB(*v, *k, t.clone(), Box::new((**g).clone()));
            if t.has_derived() {
                eliminate_inner(&desugar_one_bounded(&desired), next)?
            } else {
                Formula::ExistsB(*v, *k, t.clone(), Box::new(eliminate_inner(g, next)?))
            }
        }
        Formula::ExistsUniqueB(v, t, g) => {
            let desired = Formula::ExistsUniqueB(*v, t.clone(), Box::new((**g).clone()));
            if t.has_derived() {
                eliminate_inner(&desugar_one_bounded(&desired), next)?
            } else {
                Formula::ExistsUniqueB(*v, t.clone(), Box::new(eliminate_inner(g, next)?))
            }
        }
        Formula::Sem(_) => f.clone(),
    })
}

fn desugar_one_bounded(f: &Formula) -> Formula {
    match f {
        Formula::ForAllB(v, k, t, g) => {
            let guard = match k {
                BoundKind::Lt => lt(Term::Var(*v), t.clone()),
                BoundKind::Ge => not(lt(Term::Var(*v), t.clone())),
            };
            forall(*v, implies(guard, (**g).clone()))
        }
        Formula::ExistsB(v, k, t, g) => {
            let guard = match k {
                BoundKind::Lt => lt(Term::Var(*v), t.clone()),
                BoundKind::Ge => not(lt(Term::Var(*v), t.clone())),
            };
            exists(*v, and(guard, (**g).clone()))
        }
        Formula::ExistsUniqueB(v, t, g) => Formula::ExistsUnique(
            *v,
            Box::new(and(lt(Term::Var(*v), t.clone()), (**g).clone())),
        ),
        other => other.clone(),
    }
}

/// Folds closed derived subterms, then lifts one remaining derived subterm
/// out of the atom at a time, until the atom is derived-free.
fn eliminate_atom(atom: &Formula, _terms: &[Term], next: &mut VarId) -> Result<Formula, PaError> {
    let folded = fold_formula_terms(atom);
    let (a, b, is_eq) = match &folded {
        Formula::Eq(a, b) => (a, b, true),
        Formula::Lt(a, b) => (a, b, false),
        _ => unreachable!("eliminate_atom is called on atoms"),
    };
    if !a.has_derived() && !b.has_derived() {
        return Ok(folded);
    }
    // Pick an innermost derived subterm (its own arguments derived-free).
    let target = find_innermost_derived(a).or_else(|| find_innermost_derived(b)).unwrap();
    let z = *next;
    *next += 1;
    let (def, bound) = derived_graph(&target, z, next)?;
    let def = eliminate_inner(&def, next)?;
    let a2 = replace_subterm(a, &target, &Term::Var(z));
    let b2 = replace_subterm(b, &target, &Term::Var(z));
    let inner_atom = if is_eq {
        Formula::Eq(a2, b2)
    } else {
        Formula::Lt(a2, b2)
    };
    let rest = eliminate_inner(&inner_atom, next)?;
    Ok(match bound {
        Some(bound) => exists_lt(z, bound, and(def, rest)),
        None => exists(z, and(def, rest)),
    })
}

/// One defining-equivalence step: lifts every derived subterm of the
/// formula's atoms behind fresh quantifiers but keeps derived symbols
/// appearing inside the introduced definitions (`2^i` in the length and
/// bit graphs) as terms, which keeps the result evaluable.
pub fn eliminate_derived_shallow(f: &Formula) -> Result<Formula, PaError> {
    let mut next = f.max_var() + 1;
    shallow_inner(f, &mut next)
}

fn shallow_inner(f: &Formula, next: &mut VarId) -> Result<Formula, PaError> {
    Ok(match f {
        Formula::Eq(_, _) | Formula::Lt(_, _) => {
            let folded = fold_formula_terms(f);
            let (a, b, is_eq) = match &folded {
                Formula::Eq(a, b) => (a, b, true),
                Formula::Lt(a, b) => (a, b, false),
                _ => unreachable!(),
            };
            let target = match find_innermost_derived(a).or_else(|| find_innermost_derived(b)) {
                None => return Ok(folded),
                Some(t) => t,
            };
            let z = *next;
            *next += 1;
            let (def, bound) = derived_graph(&target, z, next)?;
            let a2 = replace_subterm(a, &target, &Term::Var(z));
            let b2 = replace_subterm(b, &target, &Term::Var(z));
            let inner_atom = if is_eq {
                Formula::Eq(a2, b2)
            } else {
                Formula::Lt(a2, b2)
            };
            let rest = shallow_inner(&inner_atom, next)?;
            match bound {
                Some(bound) => exists_lt(z, bound, and(def, rest)),
                None => exists(z, and(def, rest)),
            }
        }
        Formula::Not(g) => not(shallow_inner(g, next)?),
        Formula::And(a, b) => and(shallow_inner(a, next)?, shallow_inner(b, next)?),
        Formula::Or(a, b) => or(shallow_inner(a, next)?, shallow_inner(b, next)?),
        Formula::Implies(a, b) => implies(shallow_inner(a, next)?, shallow_inner(b, next)?),
        Formula::Iff(a, b) => iff(shallow_inner(a, next)?, shallow_inner(b, next)?),
        Formula::ForAll(v, g) => forall(*v, shallow_inner(g, next)?),
        Formula::Exists(v, g) => exists(*v, shallow_inner(g, next)?),
        Formula::ExistsUnique(v, g) => {
            Formula::ExistsUnique(*v, Box::new(shallow_inner(g, next)?))
        }
        Formula::ForAllB(v, k, t, g) => {
            Formula::ForAllB(*v, *k, t.clone(), Box::new(shallow_inner(g, next)?))
        }
        Formula::ExistsB(v, k, t, g) => {
            Formula::ExistsB(*v, *k, t.clone(), Box::new(shallow_inner(g, next)?))
        }
        Formula::ExistsUniqueB(v, t, g) => {
            Formula::ExistsUniqueB(*v, t.clone(), Box::new(shallow_inner(g, next)?))
        }
        Formula::Sem(_) => f.clone(),
    })
}

fn fold_term(t: &Term) -> Term {
    match t {
        Term::Zero | Term::Var(_) | Term::Param(_) | Term::Numeral(_) => t.clone(),
        Term::Succ(a) => {
            let a = fold_term(a);
            match a.closed_value() {
                Some(v) => numeral_of(&(v + 1u32)),
                None => Term::Succ(Box::new(a)),
            }
        }
        Term::Add(a, b) | Term::Mul(a, b) | Term::Bit(a, b) | Term::Monus(a, b) | Term::Pow(a, b) => {
            let fa = fold_term(a);
            let fb = fold_term(b);
            let rebuilt = match t {
                Term::Add(_, _) => Term::Add(Box::new(fa), Box::new(fb)),
                Term::Mul(_, _) => Term::Mul(Box::new(fa), Box::new(fb)),
                Term::Bit(_, _) => Term::Bit(Box::new(fa), Box::new(fb)),
                Term::Monus(_, _) => Term::Monus(Box::new(fa), Box::new(fb)),
                Term::Pow(_, _) => Term::Pow(Box::new(fa), Box::new(fb)),
                _ => unreachable!(),
            };
            match rebuilt.closed_value() {
                Some(v) if rebuilt.has_derived() || matches!(rebuilt, Term::Add(_, _) | Term::Mul(_, _)) => {
                    // Fold derived nodes always; fold core nodes too when closed.
                    numeral_of(&v)
                }
                _ => rebuilt,
            }
        }
        Term::Len(a) => {
            let a = fold_term(a);
            match a.closed_value() {
                Some(v) => numeral_of(&BigUint::from(godel::bit_len(&v))),
                None => Term::Len(Box::new(a)),
            }
        }
    }
}

fn fold_formula_terms(f: &Formula) -> Formula {
    match f {
        Formula::Eq(a, b) => Formula::Eq(fold_term(a), fold_term(b)),
        Formula::Lt(a, b) => Formula::Lt(fold_term(a), fold_term(b)),
        _ => f.clone(),
    }
}

fn find_innermost_derived(t: &Term) -> Option<Term> {
    match t {
        Term::Zero | Term::Var(_) | Term::Param(_) | Term::Numeral(_) => None,
        Term::Succ(a) => find_innermost_derived(a),
        Term::Add(a, b) | Term::Mul(a, b) => {
            find_innermost_derived(a).or_else(|| find_innermost_derived(b))
        }
        Term::Len(a) => find_innermost_derived(a).or_else(|| Some(t.clone())),
        Term::Bit(a, b) | Term::Monus(a, b) | Term::Pow(a, b) => find_innermost_derived(a)
            .or_else(|| find_innermost_derived(b))
            .or_else(|| Some(t.clone())),
    }
}

fn replace_subterm(t: &Term, target: &Term, replacement: &Term) -> Term {
    if t == target {
        return replacement.clone();
    }
    match t {
        Term::Zero | Term::Var(_) | Term::Param(_) | Term::Numeral(_) => t.clone(),
        Term::Succ(a) => Term::Succ(Box::new(replace_subterm(a, target, replacement))),
        Term::Len(a) => Term::Len(Box::new(replace_subterm(a, target, replacement))),
        Term::Add(a, b) => Term::Add(
            Box::new(replace_subterm(a, target, replacement)),
            Box::new(replace_subterm(b, target, replacement)),
        ),
        Term::Mul(a, b) => Term::Mul(
            Box::new(replace_subterm(a, target, replacement)),
            Box::new(replace_subterm(b, target, replacement)),
        ),
        Term::Bit(a, b) => Term::Bit(
            Box::new(replace_subterm(a, target, replacement)),
            Box::new(replace_subterm(b, target, replacement)),
        ),
        Term::Monus(a, b) => Term::Monus(
            Box::new(replace_subterm(a, target, replacement)),
            Box::new(replace_subterm(b, target, replacement)),
        ),
        Term::Pow(a, b) => Term::Pow(
            Box::new(replace_subterm(a, target, replacement)),
            Box::new(replace_subterm(b, target, replacement)),
        ),
    }
}

/// Defining formula and optional exclusive upper bound for `z = target`.
/// A missing bound means the defining quantifier is genuinely unbounded
/// (the beta-coded exponent graph).
fn derived_graph(
    target: &Term,
    z: VarId,
    next: &mut VarId,
) -> Result<(Formula, Option<Term>), PaError> {
    let zv = Term::Var(z);
    Ok(match target {
        Term::Monus(a, b) => {
            // (a < b & z = 0) | (!(a < b) & a = b + z); z <= a.
            let def = or(
                and(lt((**a).clone(), (**b).clone()), eq(zv.clone(), Term::Zero)),
                and(
                    not(lt((**a).clone(), (**b).clone())),
                    eq((**a).clone(), (**b).clone().add(zv.clone())),
                ),
            );
            (def, Some((**a).clone().succ()))
        }
        Term::Len(a) => {
            // (a = 0 & z = 1) | (0 < a & 2^(z-1) <= a < 2^z); z <= |a| <= a+1.
            let two = Term::num(2);
            let low = two.clone().pow(zv.clone().monus(Term::num(1)));
            let hi = two.pow(zv.clone());
            let def = or(
                and(eq((**a).clone(), Term::Zero), eq(zv.clone(), Term::num(1))),
                and(
                    lt(Term::Zero, (**a).clone()),
                    and(
                        not(lt((**a).clone(), low)),
                        lt((**a).clone(), hi),
                    ),
                ),
            );
            (def, Some((**a).clone().succ().succ()))
        }
        Term::Bit(x, i) => {
            // Unique-decomposition: z < 2 and
            // exists y < 2^i, w < x+1: x = y + z*2^i + w*2^(i+1).
            let y = *next;
            *next += 1;
            let w = *next;
            *next += 1;
            let two = Term::num(2);
            let p_i = two.clone().pow((**i).clone());
            let p_i1 = two.clone().pow((**i).clone().add(Term::num(1)));
            let decomposition = eq(
                (**x).clone(),
                Term::Var(y)
                    .add(zv.clone().mul(p_i.clone()))
                    .add(Term::Var(w).mul(p_i1)),
            );
            let def = and(
                lt(zv.clone(), two),
                exists_lt(
                    y,
                    p_i,
                    exists_lt(w, (**x).clone().succ(), decomposition),
                ),
            );
            (def, Some(Term::num(2)))
        }
        Term::Pow(b, e) => {
            if let Some(ev) = e.closed_value() {
                // Constant exponent: unfold as a repeated product.
                let ev = u32::try_from(&ev).map_err(|_| PaError::NonConstantExponent)?;
                let unfolded = if ev == 0 {
                    Term::num(1)
                } else {
                    let mut t = (**b).clone();
                    for _ in 1..ev {
                        t = t.mul((**b).clone());
                    }
                    t
                };
                (eq(zv.clone(), unfolded.clone()), Some(unfolded.succ()))
            } else {
                // Beta-function graph: z = b^e via a coded sequence of
                // partial powers. The coding quantifiers are unbounded in
                // any term of the inputs; this is the classical Sigma_1
                // graph, kept for completeness of the rewriting.
                let c = *next;
                *next += 1;
                let d = *next;
                *next += 1;
                let i = *next;
                *next += 1;
                let beta = |idx: Term, val: Term, nx: &mut VarId| {
                    // val = c mod (1 + (idx+1)*d): exists q <= c:
                    // c = q*m + val and val < m, m = 1 + (idx+1)*d.
                    let q = *nx;
                    *nx += 1;
                    let m = Term::num(1).add(idx.add(Term::num(1)).mul(Term::Var(d)));
                    exists_lt(
                        q,
                        Term::Var(c).succ(),
                        and(
                            eq(
                                Term::Var(c),
                                Term::Var(q).mul(m.clone()).add(val.clone()),
                            ),
                            lt(val, m),
                        ),
                    )
                };
                let base = beta(Term::Zero, Term::num(1), next);
                let last = beta((**e).clone(), zv.clone(), next);
                let succ_var = *next;
                *next += 1;
                let step_prev = beta(Term::Var(i), Term::Var(succ_var), next);
                let step_next = beta(
                    Term::Var(i).add(Term::num(1)),
                    Term::Var(succ_var).mul((**b).clone()),
                    next,
                );
                let step = forall_lt(
                    i,
                    (**e).clone(),
                    exists_lt(
                        succ_var,
                        Term::Var(c).succ(),
                        and(step_prev, step_next),
                    ),
                );
                let def = exists(
                    c,
                    exists(d, and(base, and(last, step))),
                );
                (def, None)
            }
        }
        _ => unreachable!("derived_graph is called on derived nodes only"),
    })
}

/// Gödel number of the one-line description of a formula family.
pub fn family_number(descriptor: &str) -> GodelNumber {
    godel::encode_description(descriptor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pa::eval::{eval_bounded, EvalOptions};

    fn n(x: u64) -> Term {
        Term::num(x)
    }

    fn eval_sentence(f: &Formula) -> bool {
        eval_bounded(f, &Default::default(), &EvalOptions::default(), None).unwrap()
    }

    #[test]
    fn numeral_shapes() {
        assert_eq!(numeral_of(&BigUint::zero()), Term::Zero);
        assert_eq!(numeral_of(&BigUint::one()), Term::Zero.succ());
        assert!(matches!(numeral_of(&BigUint::from(2u32)), Term::Numeral(_)));
    }

    #[test]
    fn subst_shadowing() {
        // (A x1. x1 = x2)[x2 := 0] substitutes under the binder.
        let f = forall(1, eq(Term::Var(1), Term::Var(2)));
        let g = f.subst(2, &Term::Zero).unwrap();
        assert_eq!(g, forall(1, eq(Term::Var(1), Term::Zero)));
        // Substituting for the bound variable is a no-op.
        let h = f.subst(1, &Term::Zero).unwrap();
        assert_eq!(h, f);
    }

    #[test]
    fn subst_capture_detected() {
        // (A x1. x2 < x1)[x2 := x1] would capture x1.
        let f = forall(1, lt(Term::Var(2), Term::Var(1)));
        assert!(matches!(
            f.subst(2, &Term::Var(1)),
            Err(PaError::Capture { .. })
        ));
    }

    #[test]
    fn desugar_unique_existence() {
        let f = Formula::ExistsUnique(1, Box::new(eq(Term::Var(1), Term::Zero)));
        let d = desugar(&f);
        // Shape: E y. phi(y) & A y1. A y2. (phi(y1) & phi(y2) -> y1 = y2)
        match d {
            Formula::And(l, r) => {
                assert!(matches!(*l, Formula::Exists(1, _)));
                assert!(matches!(*r, Formula::ForAll(_, _)));
            }
            other => panic!("unexpected desugar shape {other:?}"),
        }
    }

    #[test]
    fn desugar_is_idempotent() {
        let f = exists_lt(
            1,
            n(4),
            and(
                Formula::ExistsUniqueB(2, n(3), Box::new(eq(Term::Var(2), Term::Var(1)))),
                iff(eq(Term::Var(1), n(1)), lt(Term::Zero, Term::Var(1))),
            ),
        );
        let once = desugar(&f);
        let twice = desugar(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn to_core_removes_everything_but_the_basis() {
        let f = exists_lt(1, n(4), or(eq(Term::Var(1), n(3)), lt(Term::Var(1), n(1))));
        let core = to_core(&f).unwrap();
        assert!(is_core(&core));
    }

    #[test]
    fn eliminate_on_core_formula_is_identity_modulo_folding() {
        let f = forall_lt(1, n(3), lt(Term::Var(1), n(3)));
        let e = eliminate_derived(&f).unwrap();
        assert_eq!(e, f);
    }

    #[test]
    fn eliminate_len_of_five_is_true() {
        // |5| = 3; the oracle is the bit-length computation.
        assert_eq!(godel::bit_len(&BigUint::from(5u32)), 3);
        let f = eq(n(5).len(), n(3));
        let e = eliminate_derived(&f).unwrap();
        assert!(!e.has_derived());
        assert!(eval_sentence(&e));
        let f_false = eq(n(5).len(), n(4));
        assert!(!eval_sentence(&eliminate_derived(&f_false).unwrap()));
    }

    #[test]
    fn eliminate_bit_of_five_is_true() {
        // 5 = 101b, bit 1 is 0, bit 0 and bit 2 are 1.
        let cases = [(5u64, 0u64, 1u64), (5, 1, 0), (5, 2, 1)];
        for (x, i, v) in cases {
            let f = eq(n(x).bit(n(i)), n(v));
            let e = eliminate_derived(&f).unwrap();
            assert!(!e.has_derived());
            assert!(eval_sentence(&e), "bit({x},{i}) = {v}");
        }
    }

    #[test]
    fn graph_expansions_evaluate_correctly_on_open_terms() {
        // Wrap the argument in a bounded quantifier so the graph paths
        // (not the constant folder) are exercised.
        // A x1 < 8. |x1 + 1| = |x1 + 1| folds trivially; instead check
        // monus: A x1 < 8. A x2 < 8. (x1 monus x2) + x2 >= min -- use
        // equality with truncation semantics.
        let f = forall_lt(
            1,
            n(8),
            forall_lt(
                2,
                n(8),
                or(
                    and(
                        lt(Term::Var(1), Term::Var(2)),
                        eq(Term::Var(1).monus(Term::Var(2)), Term::Zero),
                    ),
                    and(
                        not(lt(Term::Var(1), Term::Var(2))),
                        eq(
                            Term::Var(1).monus(Term::Var(2)).add(Term::Var(2)),
                            Term::Var(1),
                        ),
                    ),
                ),
            ),
        );
        let e = eliminate_derived(&f).unwrap();
        assert!(!e.has_derived());
        assert!(eval_sentence(&e));
    }

    #[test]
    fn len_graph_on_open_argument() {
        // Check |x1| < 5 for x1 < 9 (true since |8| = 4). The shallow
        // expansion keeps 2^i as a term, so it stays evaluable.
        let f = forall_lt(1, n(9), lt(Term::Var(1).len(), n(5)));
        let e = eliminate_derived_shallow(&f).unwrap();
        assert!(eval_sentence(&e));
        let f_false = forall_lt(1, n(9), lt(Term::Var(1).len(), n(4)));
        assert!(!eval_sentence(&eliminate_derived_shallow(&f_false).unwrap()));
        // The full elimination removes every derived symbol; the
        // beta-coded power graph is not enumerable, so only structure is
        // checked here.
        let full = eliminate_derived(&f).unwrap();
        assert!(!full.has_derived());
    }

    #[test]
    fn bit_graph_on_open_argument() {
        // A x1 < 2. bit(5, x1 * 2) = 1: bits 0 and 2 of 101b are 1.
        let f = forall_lt(
            1,
            n(2),
            eq(n(5).bit(Term::Var(1).mul(n(2))), n(1)),
        );
        let e = eliminate_derived_shallow(&f).unwrap();
        assert!(eval_sentence(&e));
    }

    #[test]
    fn pow_constant_exponent_unfolds() {
        // x^3 with open base: A x1 < 4. x1^3 < 64.
        let f = forall_lt(1, n(4), lt(Term::Var(1).pow(n(3)), n(64)));
        let e = eliminate_derived(&f).unwrap();
        assert!(!e.has_derived());
        assert!(eval_sentence(&e));
    }
}
