//! Ground-truth evaluation of bounded formulas over the naturals.
//!
//! Bounded quantifiers enumerate; every term node and every quantifier
//! instantiation costs one unit of fuel. Witness hints let a caller skip
//! the enumeration of an existential whose witness is already known
//! (machine determinism supplies the uniqueness argument).

use super::{BoundKind, Formula, SemAtom, Term, VarId};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbounded quantifier over x{0} with no witness hint")]
    Unbounded(VarId),
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("exponent too large to evaluate")]
    ExponentTooLarge,
    #[error("semantic atom cannot be evaluated here: {0}")]
    SemanticUnavailable(String),
    #[error("unique existence over x{0} needs a syntactic bound to scan")]
    UniquenessNeedsBound(VarId),
}

/// Evaluates the polynomial-time-checkable opaque atoms.
pub trait SemanticHook {
    fn eval_sem(&self, atom: &SemAtom, args: &[BigUint]) -> Result<bool, EvalError>;
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub fuel: u64,
    pub hints: HashMap<VarId, BigUint>,
    /// When set, a hinted unique existential still scans for a second
    /// witness; scans need a syntactic bound.
    pub check_uniqueness: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            fuel: 10_000_000,
            hints: HashMap::new(),
            check_uniqueness: false,
        }
    }
}

impl EvalOptions {
    pub fn with_fuel(fuel: u64) -> Self {
        EvalOptions {
            fuel,
            ..Default::default()
        }
    }

    pub fn hint(mut self, v: VarId, value: BigUint) -> Self {
        self.hints.insert(v, value);
        self
    }
}

struct Scope {
    stack: Vec<(VarId, BigUint)>,
}

impl Scope {
    fn lookup(&self, v: VarId) -> Option<&BigUint> {
        self.stack.iter().rev().find(|(w, _)| *w == v).map(|(_, x)| x)
    }
}

struct Evaluator<'a> {
    fuel: u64,
    opts: &'a EvalOptions,
    hook: Option<&'a dyn SemanticHook>,
}

impl<'a> Evaluator<'a> {
    fn spend(&mut self, amount: u64) -> Result<(), EvalError> {
        if self.fuel < amount {
            self.fuel = 0;
            return Err(EvalError::FuelExhausted);
        }
        self.fuel -= amount;
        Ok(())
    }

    fn term(&mut self, t: &Term, scope: &Scope) -> Result<BigUint, EvalError> {
        self.spend(1)?;
        Ok(match t {
            Term::Zero => BigUint::zero(),
            Term::Succ(a) => self.term(a, scope)? + 1u32,
            Term::Add(a, b) => self.term(a, scope)? + self.term(b, scope)?,
            Term::Mul(a, b) => self.term(a, scope)? * self.term(b, scope)?,
            Term::Var(v) => scope
                .lookup(*v)
                .cloned()
                .or_else(|| self.opts.hints.get(v).cloned())
                .ok_or(EvalError::Unbounded(*v))?,
            Term::Param(_) => return Err(EvalError::SemanticUnavailable(
                "parameter symbols have no value".into(),
            )),
            Term::Numeral(n) => n.clone(),
            Term::Len(a) => BigUint::from(crate::godel::bit_len(&self.term(a, scope)?)),
            Term::Bit(a, b) => {
                let x = self.term(a, scope)?;
                let i = self.term(b, scope)?;
                let bit = i.to_u64().map(|i| x.bit(i)).unwrap_or(false);
                if bit {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            }
            Term::Monus(a, b) => {
                let x = self.term(a, scope)?;
                let y = self.term(b, scope)?;
                if x >= y {
                    x - y
                } else {
                    BigUint::zero()
                }
            }
            Term::Pow(a, b) => {
                let x = self.term(a, scope)?;
                let e = self.term(b, scope)?;
                let e = e.to_u32().ok_or(EvalError::ExponentTooLarge)?;
                // Large powers are legitimate as quantifier bounds; charge
                // for the result size so fuel still limits the work.
                let est_bits = (crate::godel::bit_len(&x)).saturating_mul(u64::from(e));
                self.spend(est_bits / 64 + 1)?;
                x.pow(e)
            }
        })
    }

    fn formula(&mut self, f: &Formula, scope: &mut Scope) -> Result<bool, EvalError> {
        self.spend(1)?;
        match f {
            Formula::Eq(a, b) => Ok(self.term(a, scope)? == self.term(b, scope)?),
            Formula::Lt(a, b) => Ok(self.term(a, scope)? < self.term(b, scope)?),
            Formula::Not(g) => Ok(!self.formula(g, scope)?),
            Formula::And(a, b) => Ok(self.formula(a, scope)? && self.formula(b, scope)?),
            Formula::Or(a, b) => Ok(self.formula(a, scope)? || self.formula(b, scope)?),
            Formula::Implies(a, b) => Ok(!self.formula(a, scope)? || self.formula(b, scope)?),
            Formula::Iff(a, b) => Ok(self.formula(a, scope)? == self.formula(b, scope)?),
            Formula::Sem(atom) => {
                let mut args = Vec::with_capacity(atom.args.len());
                for t in &atom.args {
                    args.push(self.term(t, scope)?);
                }
                match self.hook {
                    Some(h) => h.eval_sem(atom, &args),
                    None => Err(EvalError::SemanticUnavailable(
                        "no semantic hook installed".into(),
                    )),
                }
            }
            Formula::ForAllB(v, BoundKind::Lt, t, g) => {
                let n = self.term(t, scope)?;
                self.forall_upto(*v, &n, g, scope)
            }
            Formula::ForAllB(v, BoundKind::Ge, _, _) => Err(EvalError::Unbounded(*v)),
            Formula::ExistsB(v, BoundKind::Lt, t, g) => {
                let n = self.term(t, scope)?;
                if let Some(hint) = self.opts.hints.get(v).cloned() {
                    if hint >= n {
                        return Ok(false);
                    }
                    scope.stack.push((*v, hint));
                    let r = self.formula(g, scope);
                    scope.stack.pop();
                    return r;
                }
                self.exists_upto(*v, &n, g, scope)
            }
            Formula::ExistsB(v, BoundKind::Ge, t, g) => {
                let n = self.term(t, scope)?;
                let Some(hint) = self.opts.hints.get(v).cloned() else {
                    return Err(EvalError::Unbounded(*v));
                };
                if hint < n {
                    return Ok(false);
                }
                scope.stack.push((*v, hint));
                let r = self.formula(g, scope);
                scope.stack.pop();
                r
            }
            Formula::ExistsUniqueB(v, t, g) => {
                let n = self.term(t, scope)?;
                if let Some(hint) = self.opts.hints.get(v).cloned() {
                    if hint >= n {
                        return Ok(false);
                    }
                    scope.stack.push((*v, hint.clone()));
                    let holds = self.formula(g, scope)?;
                    scope.stack.pop();
                    if !holds {
                        return Ok(false);
                    }
                    if !self.opts.check_uniqueness {
                        return Ok(true);
                    }
                    return Ok(self.count_witnesses(*v, &n, g, scope, 2)? == 1);
                }
                Ok(self.count_witnesses(*v, &n, g, scope, 2)? == 1)
            }
            Formula::ForAll(v, g) => {
                if let Some(bound) = guarded_upper_bound(*v, g) {
                    let n = self.term(&bound, scope)?;
                    return self.forall_upto(*v, &n, g, scope);
                }
                Err(EvalError::Unbounded(*v))
            }
            Formula::Exists(v, g) => {
                if let Some(hint) = self.opts.hints.get(v).cloned() {
                    scope.stack.push((*v, hint));
                    let r = self.formula(g, scope);
                    scope.stack.pop();
                    return r;
                }
                if let Some(bound) = conjunct_upper_bound(*v, g) {
                    let n = self.term(&bound, scope)?;
                    return self.exists_upto(*v, &n, g, scope);
                }
                Err(EvalError::Unbounded(*v))
            }
            Formula::ExistsUnique(v, g) => {
                if let Some(hint) = self.opts.hints.get(v).cloned() {
                    scope.stack.push((*v, hint));
                    let holds = self.formula(g, scope)?;
                    scope.stack.pop();
                    if !holds {
                        return Ok(false);
                    }
                    if !self.opts.check_uniqueness {
                        return Ok(true);
                    }
                }
                let Some(bound) = conjunct_upper_bound(*v, g) else {
                    return Err(EvalError::UniquenessNeedsBound(*v));
                };
                let n = self.term(&bound, scope)?;
                Ok(self.count_witnesses(*v, &n, g, scope, 2)? == 1)
            }
        }
    }

    fn forall_upto(
        &mut self,
        v: VarId,
        n: &BigUint,
        g: &Formula,
        scope: &mut Scope,
    ) -> Result<bool, EvalError> {
        let mut val = BigUint::zero();
        while &val < n {
            self.spend(1)?;
            scope.stack.push((v, val.clone()));
            let holds = self.formula(g, scope);
            scope.stack.pop();
            if !holds? {
                return Ok(false);
            }
            val += 1u32;
        }
        Ok(true)
    }

    fn exists_upto(
        &mut self,
        v: VarId,
        n: &BigUint,
        g: &Formula,
        scope: &mut Scope,
    ) -> Result<bool, EvalError> {
        let mut val = BigUint::zero();
        while &val < n {
            self.spend(1)?;
            scope.stack.push((v, val.clone()));
            let holds = self.formula(g, scope);
            scope.stack.pop();
            if holds? {
                return Ok(true);
            }
            val += 1u32;
        }
        Ok(false)
    }

    fn count_witnesses(
        &mut self,
        v: VarId,
        n: &BigUint,
        g: &Formula,
        scope: &mut Scope,
        stop_at: usize,
    ) -> Result<usize, EvalError> {
        let mut count = 0usize;
        let mut val = BigUint::zero();
        while &val < n {
            self.spend(1)?;
            scope.stack.push((v, val.clone()));
            let holds = self.formula(g, scope);
            scope.stack.pop();
            if holds? {
                count += 1;
                if count >= stop_at {
                    return Ok(count);
                }
            }
            val += 1u32;
        }
        Ok(count)
    }
}

fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other),
    }
}

/// Upper bound from a top-level conjunct `v < t` with v not free in t.
fn conjunct_upper_bound(v: VarId, body: &Formula) -> Option<Term> {
    let mut cs = Vec::new();
    conjuncts(body, &mut cs);
    for c in cs {
        if let Formula::Lt(lhs, t) = c {
            if *lhs == Term::Var(v) && !t.vars().contains(&v) {
                return Some(t.clone());
            }
        }
    }
    None
}

/// Upper bound of a guarded universal `A v. (guard -> body)`: enumeration
/// below the bound suffices since the guard fails beyond it. The guard may
/// sit under further quantifiers, as in the unique-existence expansion.
fn guarded_upper_bound(v: VarId, body: &Formula) -> Option<Term> {
    match body {
        Formula::Implies(guard, _) => conjunct_upper_bound(v, guard),
        Formula::ForAll(w, inner) | Formula::Exists(w, inner) if *w != v => {
            guarded_upper_bound(v, inner)
        }
        Formula::ForAllB(w, _, _, inner) | Formula::ExistsB(w, _, _, inner) if *w != v => {
            guarded_upper_bound(v, inner)
        }
        _ => None,
    }
}

pub(crate) fn conjunct_upper_bound_pub(v: VarId, body: &Formula) -> Option<Term> {
    conjunct_upper_bound(v, body)
}

pub(crate) fn guarded_upper_bound_pub(v: VarId, body: &Formula) -> Option<Term> {
    guarded_upper_bound(v, body)
}

/// Standard-model truth of a bounded formula under the given assignment.
pub fn eval_bounded(
    f: &Formula,
    env: &HashMap<VarId, BigUint>,
    opts: &EvalOptions,
    hook: Option<&dyn SemanticHook>,
) -> Result<bool, EvalError> {
    let mut evaluator = Evaluator {
        fuel: opts.fuel,
        opts,
        hook,
    };
    let mut scope = Scope {
        stack: env.iter().map(|(v, x)| (*v, x.clone())).collect(),
    };
    evaluator.formula(f, &mut scope)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn ev(f: &Formula) -> Result<bool, EvalError> {
        eval_bounded(f, &HashMap::new(), &EvalOptions::default(), None)
    }

    fn n(x: u64) -> Term {
        Term::num(x)
    }

    #[test]
    fn trivial_bounded_universal() {
        let f = forall_lt(1, n(3), lt(Term::Var(1), n(3)));
        assert_eq!(ev(&f), Ok(true));
    }

    #[test]
    fn bounded_existential_finds_square() {
        // E x < 4. x*x = 9 is true with witness 3.
        let f = exists_lt(1, n(4), eq(Term::Var(1).mul(Term::Var(1)), n(9)));
        assert_eq!(ev(&f), Ok(true));
        let g = exists_lt(1, n(3), eq(Term::Var(1).mul(Term::Var(1)), n(9)));
        assert_eq!(ev(&g), Ok(false));
    }

    #[test]
    fn unbounded_universal_errors() {
        let f = forall(1, eq(Term::Var(1), Term::Var(1)));
        assert_eq!(ev(&f), Err(EvalError::Unbounded(1)));
    }

    #[test]
    fn guarded_core_universal_enumerates() {
        // A x. (x < 5 -> x < 6): the desugared shape of A x < 5.
        let f = forall(1, implies(lt(Term::Var(1), n(5)), lt(Term::Var(1), n(6))));
        assert_eq!(ev(&f), Ok(true));
    }

    #[test]
    fn guarded_core_existential_enumerates() {
        let f = exists(
            1,
            and(lt(Term::Var(1), n(5)), eq(Term::Var(1), n(4))),
        );
        assert_eq!(ev(&f), Ok(true));
    }

    #[test]
    fn sugar_and_desugared_forms_agree() {
        let cases = [
            exists_lt(1, n(7), eq(Term::Var(1).add(n(2)), n(6))),
            forall_lt(1, n(4), lt(Term::Var(1), n(9))),
            exists_unique_lt(1, n(9), eq(Term::Var(1).mul(Term::Var(1)), n(4))),
        ];
        for f in cases {
            let sugar = ev(&f).unwrap();
            let core = ev(&desugar(&f)).unwrap();
            assert_eq!(sugar, core, "formula {f}");
        }
    }

    #[test]
    fn hints_skip_enumeration() {
        // E x < 2^64. x = 2^40: enumeration would exhaust fuel, the hint
        // answers immediately.
        let big_bound = Term::num(2).pow(n(64));
        let target = BigUint::from(1u64 << 40);
        let f = exists_lt(1, big_bound, eq(Term::Var(1), numeral_of(&target)));
        let opts = EvalOptions::default().hint(1, target.clone());
        assert_eq!(eval_bounded(&f, &HashMap::new(), &opts, None), Ok(true));
        let wrong = EvalOptions::default().hint(1, &target + 1u32);
        assert_eq!(eval_bounded(&f, &HashMap::new(), &wrong, None), Ok(false));
    }

    #[test]
    fn hint_out_of_bound_is_false() {
        let f = exists_lt(1, n(4), eq(Term::Var(1), n(10)));
        let opts = EvalOptions::default().hint(1, BigUint::from(10u32));
        assert_eq!(eval_bounded(&f, &HashMap::new(), &opts, None), Ok(false));
    }

    #[test]
    fn exists_ge_needs_hint() {
        let f = exists_ge(1, n(5), eq(Term::Var(1), n(9)));
        assert_eq!(ev(&f), Err(EvalError::Unbounded(1)));
        let opts = EvalOptions::default().hint(1, BigUint::from(9u32));
        assert_eq!(eval_bounded(&f, &HashMap::new(), &opts, None), Ok(true));
        let low = EvalOptions::default().hint(1, BigUint::from(3u32));
        assert_eq!(eval_bounded(&f, &HashMap::new(), &low, None), Ok(false));
    }

    #[test]
    fn unique_existence_scans() {
        // Exactly one x < 9 with x * x = 4.
        let f = exists_unique_lt(1, n(9), eq(Term::Var(1).mul(Term::Var(1)), n(4)));
        assert_eq!(ev(&f), Ok(true));
        // x + 0 = x has nine witnesses below 9.
        let g = exists_unique_lt(1, n(9), eq(Term::Var(1).add(Term::Zero), Term::Var(1)));
        assert_eq!(ev(&g), Ok(false));
    }

    #[test]
    fn hinted_unique_existence_with_scan() {
        let f = exists_unique_lt(1, n(9), eq(Term::Var(1).mul(Term::Var(1)), n(4)));
        let mut opts = EvalOptions::default().hint(1, BigUint::from(2u32));
        opts.check_uniqueness = true;
        assert_eq!(eval_bounded(&f, &HashMap::new(), &opts, None), Ok(true));
    }

    #[test]
    fn fuel_exhaustion_reported() {
        let f = forall_lt(1, n(1000), lt(Term::Var(1), n(1001)));
        let opts = EvalOptions::with_fuel(50);
        assert_eq!(
            eval_bounded(&f, &HashMap::new(), &opts, None),
            Err(EvalError::FuelExhausted)
        );
    }

    #[test]
    fn substitution_lemma_on_corpus() {
        // eval(f[x := numeral(k)]) = eval(f with env x -> k).
        let bodies = [
            lt(Term::Var(1), n(5)),
            exists_lt(2, n(6), eq(Term::Var(2), Term::Var(1))),
            forall_lt(2, Term::Var(1), lt(Term::Var(2), n(12))),
        ];
        for body in bodies {
            for k in 0u64..6 {
                let subst = body.subst(1, &numeral_of(&BigUint::from(k))).unwrap();
                let direct = ev(&subst).unwrap();
                let mut env = HashMap::new();
                env.insert(1, BigUint::from(k));
                let via_env = eval_bounded(&body, &env, &EvalOptions::default(), None).unwrap();
                assert_eq!(direct, via_env, "body {body} at {k}");
            }
        }
    }

    #[test]
    fn semantic_atom_without_hook_errors() {
        let f = Formula::Sem(SemAtom {
            kind: SemKind::SatMatrix,
            args: vec![n(5), n(1)],
        });
        assert!(matches!(ev(&f), Err(EvalError::SemanticUnavailable(_))));
    }
}
