//! Syntactic classification of quantifier-prefix patterns.
//!
//! Quantifiers bounded by `2^(poly)` count as witness blocks; quantifiers
//! with polynomial-magnitude bounds are part of the matrix. A formula with
//! no witness blocks and no unbounded quantifier is the syntactic
//! Delta-1 surrogate. Alternation counting is pattern matching over the
//! negation normal form, not a provable-equivalence search.

use super::eval::{self};
use super::{desugar, BoundKind, Formula, Term, VarId};
use num_bigint::BigUint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaClass {
    /// All quantifiers carry polynomial-magnitude bounds.
    CoreDelta1Syntactic,
    SigmaP(u32),
    PiP(u32),
    /// Matches both the Sigma and Pi pattern at the same level.
    DeltaP(u32),
    Other,
}

impl std::fmt::Display for FormulaClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormulaClass::CoreDelta1Syntactic => write!(f, "core-delta1-syntactic"),
            FormulaClass::SigmaP(i) => write!(f, "sigma-p-{i}"),
            FormulaClass::PiP(i) => write!(f, "pi-p-{i}"),
            FormulaClass::DeltaP(i) => write!(f, "delta-p-{i}"),
            FormulaClass::Other => write!(f, "other"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoundClass {
    /// `2^(polynomial)`: an exponential witness space, one block.
    Exp,
    /// Polynomial magnitude: matrix-level enumeration.
    Small,
    Unrecognized,
}

/// Polynomial-shaped term: built from numerals, variables, lengths, sums,
/// products, monus and constant powers.
fn is_poly_term(t: &Term) -> bool {
    match t {
        Term::Zero | Term::Var(_) | Term::Param(_) | Term::Numeral(_) => true,
        Term::Succ(a) => is_poly_term(a),
        Term::Len(_) | Term::Bit(_, _) => true,
        Term::Add(a, b) | Term::Mul(a, b) | Term::Monus(a, b) => {
            is_poly_term(a) && is_poly_term(b)
        }
        Term::Pow(a, e) => is_poly_term(a) && e.closed_value().is_some(),
    }
}

fn bound_class(t: &Term) -> BoundClass {
    if let Term::Pow(base, e) = t {
        if base.closed_value() == Some(BigUint::from(2u32)) && is_poly_term(e) {
            return BoundClass::Exp;
        }
    }
    if is_poly_term(t) {
        BoundClass::Small
    } else {
        BoundClass::Unrecognized
    }
}

/// Negation normal form over the full constructor set; bounded sugar
/// flips quantifier kind under negation.
fn nnf(f: &Formula, positive: bool) -> Formula {
    match f {
        Formula::Eq(_, _) | Formula::Lt(_, _) | Formula::Sem(_) => {
            if positive {
                f.clone()
            } else {
                super::not(f.clone())
            }
        }
        Formula::Not(g) => nnf(g, !positive),
        Formula::And(a, b) => {
            if positive {
                super::and(nnf(a, true), nnf(b, true))
            } else {
                super::or(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Or(a, b) => {
            if positive {
                super::or(nnf(a, true), nnf(b, true))
            } else {
                super::and(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Implies(a, b) => {
            if positive {
                super::or(nnf(a, false), nnf(b, true))
            } else {
                super::and(nnf(a, true), nnf(b, false))
            }
        }
        Formula::Iff(a, b) => {
            let expanded = super::and(
                super::implies((**a).clone(), (**b).clone()),
                super::implies((**b).clone(), (**a).clone()),
            );
            nnf(&expanded, positive)
        }
        Formula::ForAll(v, g) => {
            if positive {
                super::forall(*v, nnf(g, true))
            } else {
                super::exists(*v, nnf(g, false))
            }
        }
        Formula::Exists(v, g) => {
            if positive {
                super::exists(*v, nnf(g, true))
            } else {
                super::forall(*v, nnf(g, false))
            }
        }
        Formula::ForAllB(v, k, t, g) => {
            if positive {
                Formula::ForAllB(*v, *k, t.clone(), Box::new(nnf(g, true)))
            } else {
                Formula::ExistsB(*v, *k, t.clone(), Box::new(nnf(g, false)))
            }
        }
        Formula::ExistsB(v, k, t, g) => {
            if positive {
                Formula::ExistsB(*v, *k, t.clone(), Box::new(nnf(g, true)))
            } else {
                Formula::ForAllB(*v, *k, t.clone(), Box::new(nnf(g, false)))
            }
        }
        Formula::ExistsUnique(_, _) | Formula::ExistsUniqueB(_, _, _) => {
            nnf(&desugar(f), positive)
        }
    }
}

/// (sigma blocks, pi blocks) of the best matching patterns, or None when
/// an unbounded or unrecognizable quantifier blocks classification.
fn analyze(f: &Formula) -> Option<(u32, u32)> {
    match f {
        Formula::Eq(_, _) | Formula::Lt(_, _) | Formula::Sem(_) => Some((0, 0)),
        Formula::Not(g) => match &**g {
            Formula::Eq(_, _) | Formula::Lt(_, _) | Formula::Sem(_) => Some((0, 0)),
            _ => analyze(&nnf(f, true)),
        },
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (sa, pa) = analyze(a)?;
            let (sb, pb) = analyze(b)?;
            Some((sa.max(sb), pa.max(pb)))
        }
        Formula::Implies(_, _) | Formula::Iff(_, _) => analyze(&nnf(f, true)),
        Formula::ExistsB(v, k, t, g) => {
            if *k == BoundKind::Ge {
                return None;
            }
            let _ = v;
            quantifier_blocks(bound_class(t), analyze(g)?, true)
        }
        Formula::ForAllB(v, k, t, g) => {
            if *k == BoundKind::Ge {
                return None;
            }
            let _ = v;
            quantifier_blocks(bound_class(t), analyze(g)?, false)
        }
        Formula::Exists(v, g) => {
            let bound = conjunct_bound(*v, g)?;
            quantifier_blocks(bound, analyze(g)?, true)
        }
        Formula::ForAll(v, g) => {
            let bound = guard_bound(*v, g)?;
            quantifier_blocks(bound, analyze(g)?, false)
        }
        Formula::ExistsUnique(_, _) | Formula::ExistsUniqueB(_, _, _) => analyze(&desugar(f)),
    }
}

fn conjunct_bound(v: VarId, body: &Formula) -> Option<BoundClass> {
    eval::conjunct_upper_bound_pub(v, body).map(|t| bound_class(&t))
}

fn guard_bound(v: VarId, body: &Formula) -> Option<BoundClass> {
    eval::guarded_upper_bound_pub(v, body).map(|t| bound_class(&t))
}

fn quantifier_blocks(
    bound: BoundClass,
    inner: (u32, u32),
    existential: bool,
) -> Option<(u32, u32)> {
    let (sd, pd) = inner;
    match bound {
        BoundClass::Unrecognized => None,
        BoundClass::Small if sd == 0 && pd == 0 => Some((0, 0)),
        BoundClass::Small | BoundClass::Exp => {
            if existential {
                let s = std::cmp::min(std::cmp::max(1, sd), 1 + pd);
                Some((s, s + 1))
            } else {
                let p = std::cmp::min(std::cmp::max(1, pd), 1 + sd);
                Some((p + 1, p))
            }
        }
    }
}

/// Syntactic class of the quantifier-prefix pattern.
pub fn classify(f: &Formula) -> FormulaClass {
    let normal = nnf(f, true);
    match analyze(&normal) {
        None => FormulaClass::Other,
        Some((0, 0)) => FormulaClass::CoreDelta1Syntactic,
        Some((sd, pd)) => {
            if sd < pd {
                FormulaClass::SigmaP(sd)
            } else if pd < sd {
                FormulaClass::PiP(pd)
            } else {
                FormulaClass::DeltaP(sd)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn n(x: u64) -> Term {
        Term::num(x)
    }

    fn exp_bound(c: u64) -> Term {
        // 2^(|x1|^c)
        n(2).pow(Term::Var(1).len().pow(n(c)))
    }

    #[test]
    fn quantifier_free_bounded_is_core_delta1() {
        let f = forall_lt(2, Term::Var(1).len(), eq(Term::Var(1).bit(Term::Var(2)), Term::Zero));
        assert_eq!(classify(&f), FormulaClass::CoreDelta1Syntactic);
        let g = eq(Term::Var(1), n(3));
        assert_eq!(classify(&g), FormulaClass::CoreDelta1Syntactic);
    }

    #[test]
    fn single_exponential_witness_is_sigma_one() {
        let f = exists_lt(2, exp_bound(2), eq(Term::Var(2).add(Term::Var(1)), n(9)));
        assert_eq!(classify(&f), FormulaClass::SigmaP(1));
    }

    #[test]
    fn universal_exponential_is_pi_one() {
        let f = forall_lt(2, exp_bound(1), lt(Term::Zero, Term::Var(2).add(n(1))));
        assert_eq!(classify(&f), FormulaClass::PiP(1));
    }

    #[test]
    fn negation_flips_sigma_and_pi() {
        let f = exists_lt(2, exp_bound(1), eq(Term::Var(2), n(4)));
        assert_eq!(classify(&not(f)), FormulaClass::PiP(1));
    }

    #[test]
    fn cd_shape_is_delta_two() {
        // (Acc & E w. M) | (!Acc & !E w. M) with an opaque Acc atom:
        // the not-decided combination matches both level-2 patterns.
        let acc = Formula::Sem(SemAtom {
            kind: SemKind::MachineAcc {
                family: "family:test".into(),
            },
            args: vec![Term::Var(2), Term::Var(1)],
        });
        let sat = exists_lt(3, exp_bound(1), Formula::Sem(SemAtom {
            kind: SemKind::SatMatrix,
            args: vec![Term::Var(1), Term::Var(3)],
        }));
        let cd = or(
            and(acc.clone(), sat.clone()),
            and(not(acc), not(sat)),
        );
        assert_eq!(classify(&not(cd)), FormulaClass::DeltaP(2));
    }

    #[test]
    fn unbounded_prefix_is_other() {
        let f = forall(1, forall(2, exists_ge(3, Term::Var(2), eq(Term::Var(3), Term::Var(3)))));
        assert_eq!(classify(&f), FormulaClass::Other);
    }

    #[test]
    fn alternating_prefix_counts_blocks() {
        let f = exists_lt(
            2,
            exp_bound(1),
            forall_lt(3, exp_bound(1), lt(Term::Var(3), Term::Var(2).add(n(1)))),
        );
        assert_eq!(classify(&f), FormulaClass::SigmaP(2));
    }
}
