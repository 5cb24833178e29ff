//! Meta-formula generators: provability, correct-decision forms, the
//! SAT family, and the headline sentence built from them.

use super::{to_pa_formula, ArithError, RhoFormula};
use crate::config::Config;
use crate::pa::{
    self, and, eq, exists_ge, exists_lt, forall, not, or, Formula, SemAtom, SemKind, Term,
    VarId,
};
use crate::tm::TMDescription;

/// Variable ids of the meta formulas: e, a/x, the proof-output b, and the
/// SAT assignment witness.
pub const META_E: VarId = 21;
pub const META_A: VarId = 22;
pub const META_B: VarId = 23;
pub const META_W: VarId = 24;
pub const META_N: VarId = 25;

/// The machine-acceptance atom `acc{family}(e, a)`: the machine coded by
/// `e`, run in decision mode against the named family at `a`, accepts.
pub fn acc_atom(family: &str, e: Term, a: Term) -> Formula {
    Formula::Sem(SemAtom {
        kind: SemKind::MachineAcc {
            family: family.to_string(),
        },
        args: vec![e, a],
    })
}

/// SAT(x): some occurrence-indexed assignment below 2^|x| satisfies the
/// 3-CNF coded by x.
pub fn sat_formula(x: Term) -> Formula {
    let matrix = Formula::Sem(SemAtom {
        kind: SemKind::SatMatrix,
        args: vec![x.clone(), Term::Var(META_W)],
    });
    exists_lt(META_W, Term::num(2).pow(x.len()), matrix)
}

/// CA[phi(a)](e, fam, a) = Acc(e, fam, a) & phi(a).
pub fn ca_formula(family: &str, phi: &Formula, e: Term, a: Term) -> Formula {
    and(acc_atom(family, e, a), phi.clone())
}

/// CR[phi(a)](e, fam, a) = !Acc(e, fam, a) & !phi(a).
pub fn cr_formula(family: &str, phi: &Formula, e: Term, a: Term) -> Formula {
    and(not(acc_atom(family, e, a)), not(phi.clone()))
}

/// CD = CA | CR.
pub fn cd_formula(family: &str, phi: &Formula, e: Term, a: Term) -> Formula {
    or(
        ca_formula(family, phi, e.clone(), a.clone()),
        cr_formula(family, phi, e, a),
    )
}

/// The verifier-relative variants substitute a second machine's
/// acceptance for standard-model truth.
pub fn ca_v_formula(family: &str, v: Term, e: Term, a: Term) -> Formula {
    and(
        acc_atom(family, e, a.clone()),
        acc_atom(family, v, a),
    )
}

pub fn cr_v_formula(family: &str, v: Term, e: Term, a: Term) -> Formula {
    and(
        not(acc_atom(family, e, a.clone())),
        not(acc_atom(family, v, a)),
    )
}

pub fn cd_v_formula(family: &str, v: Term, e: Term, a: Term) -> Formula {
    or(
        ca_v_formula(family, v.clone(), e.clone(), a.clone()),
        cr_v_formula(family, v, e, a),
    )
}

/// The canonical descriptor of the SAT family.
pub const SAT_FAMILY: &str = "family:sat";

/// DecSAT(e, x) = CD[SAT(x)](e, |SAT|, x).
pub fn decsat_formula() -> Formula {
    let e = Term::Var(META_E);
    let x = Term::Var(META_A);
    let sat = sat_formula(x.clone());
    cd_formula(SAT_FAMILY, &sat, e, x)
}

/// The headline sentence: for every machine and every threshold there is
/// a larger instance it fails to decide correctly. A structural object;
/// its prefix is unbounded and it does not evaluate.
pub fn pnp_sentence() -> Formula {
    forall(
        META_E,
        forall(
            META_N,
            exists_ge(META_A, Term::Var(META_N), not(decsat_formula())),
        ),
    )
}

/// Pr over a formula family: the prover's output is a proof the checker
/// accepts, bounded by the run-time output cap.
///
/// The component formulas arithmetize two registered stand-in machines
/// (an output comparator for the registered prover and a proof-shape
/// checker); they are honest tableau formulas of those machines, guarded
/// by equality on the prover slot.
#[derive(Debug, Clone)]
pub struct PrTemplate {
    pub formula: Formula,
    /// The e-value the output stand-in is specialized to, when any.
    pub prover_guard: Option<num_bigint::BigUint>,
    pub c: u32,
}

/// Builds the provability template
/// `E b < 2^(Size(a)^c) . (PTM-Out(e, fam, a, b) & PTM-Acpt(vT, #phi(a), b))`.
///
/// `out_machine` decides whether `b` is the registered prover's output on
/// `a`; `acpt_machine` decides whether `b` is a checker-accepted proof of
/// the family instance. Both are compiled through the tableau pipeline;
/// the provability semantics of the template therefore holds for the
/// registered prover, and the e-guard makes it false elsewhere.
pub fn pr_formula(
    out_machine: &TMDescription,
    acpt_machine: &TMDescription,
    prover_code: &num_bigint::BigUint,
    c: u32,
    cfg: &Config,
) -> Result<(PrTemplate, RhoFormula, RhoFormula), ArithError> {
    let out_rho = to_pa_formula(out_machine, c, cfg)?;
    let acpt_rho = to_pa_formula(acpt_machine, c, cfg)?;
    // The stand-in machines read the pair <a, b> as their input; the
    // tableau formulas take that pair as their single free variable.
    let pair = Term::Var(META_B);
    let out_part = out_rho
        .formula
        .subst(super::RHO_X, &pair)
        .expect("pair variable is free for x");
    let acpt_part = acpt_rho
        .formula
        .subst(super::RHO_X, &pair)
        .expect("pair variable is free for x");
    let guard = eq(Term::Var(META_E), pa::numeral_of(prover_code));
    let size_bound = Term::num(2).pow(Term::Var(META_A).len().pow(Term::num(u64::from(c) + 2)));
    let body = and(guard, and(out_part, acpt_part));
    let formula = exists_lt(META_B, size_bound, body);
    Ok((
        PrTemplate {
            formula,
            prover_guard: Some(prover_code.clone()),
            c,
        },
        out_rho,
        acpt_rho,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pa::{classify, FormulaClass};

    #[test]
    fn pnp_sentence_has_the_stated_prefix() {
        let f = pnp_sentence();
        match &f {
            Formula::ForAll(_, inner) => match &**inner {
                Formula::ForAll(_, body) => match &**body {
                    Formula::ExistsB(_, pa::BoundKind::Ge, bound, matrix) => {
                        assert_eq!(*bound, Term::Var(META_N));
                        assert!(matches!(&**matrix, Formula::Not(_)));
                    }
                    other => panic!("expected E x >= n, got {other:?}"),
                },
                other => panic!("expected a second A, got {other:?}"),
            },
            other => panic!("expected a leading A, got {other:?}"),
        }
    }

    #[test]
    fn negated_decsat_is_delta_two() {
        let f = not(decsat_formula());
        assert_eq!(classify(&f), FormulaClass::DeltaP(2));
    }

    #[test]
    fn pnp_sentence_does_not_evaluate() {
        let err = pa::eval_bounded(
            &pnp_sentence(),
            &Default::default(),
            &pa::EvalOptions::default(),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, pa::EvalError::Unbounded(_)));
    }

    #[test]
    fn sat_formula_is_sigma_one() {
        let f = sat_formula(Term::Var(1));
        assert_eq!(classify(&f), FormulaClass::SigmaP(1));
    }
}
