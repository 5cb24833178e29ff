//! The executable machine universe behind the natural-number codes.
//!
//! Three code shapes share one total decoder: a plain pair `(t, c)` is a
//! transition table with its exponent; `[1, inner]` is the
//! recursion-theorem self-application of a template (the runner pairs the
//! machine's own code with the input, the constant-time self-read charged
//! zero steps); `[0, id, params..]` is a registered built-in whose
//! behavior is native. Built-ins stand in for machines whose honest
//! transition tables would be astronomically large at desk scale: the
//! truth verifier, proof emitters, and the self-referential templates.

use crate::config::Config;
use crate::family::FormulaFamily;
use crate::godel::{self, GodelNumber};
use crate::kernel::{self, Theory};
use crate::pa::{self, EvalError, SemAtom, SemKind, SemanticHook};
use crate::sat;
use crate::tm::{self, MachineCode, SizeFn, TMDescription, Verdict, VerdictKind};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Exponent assigned to built-ins and self-applications when a bound is
/// needed; their native implementations are polynomial by construction.
pub const NOMINAL_EXPONENT: u32 = 2;

const TAG_BUILTIN: u64 = 0;
const TAG_SELF_APPLY: u64 = 1;

const ID_ECHO_FIRST: u64 = 1;
const ID_ECHO_SECOND: u64 = 2;
const ID_SECOND_PARITY: u64 = 3;
const ID_NULL_PROVER: u64 = 4;
const ID_EQSELF_PROVER: u64 = 5;
const ID_EVEN_PROVER: u64 = 6;
const ID_ACCEPT_ALL: u64 = 7;
const ID_REJECT_ALL: u64 = 8;
const ID_SAT_BRUTE: u64 = 9;
const ID_TRUTH_VERIFIER: u64 = 10;
const ID_GODEL_PROOF: u64 = 11;
const ID_GODEL_DECISION: u64 = 12;

/// Decision-flavor of the self-referential decision machines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GFlavor {
    Ca,
    Cr,
}

/// Finite description of a PT-extension: extra axioms as formula texts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TheorySpec {
    pub extra_axioms: Vec<String>,
}

impl TheorySpec {
    pub fn pa() -> TheorySpec {
        TheorySpec::default()
    }

    pub fn to_theory(&self) -> Result<Theory, kernel::KernelError> {
        if self.extra_axioms.is_empty() {
            return Ok(Theory::pa());
        }
        let extras = self
            .extra_axioms
            .iter()
            .map(|t| {
                pa::parse_formula(t)
                    .map_err(|e| kernel::KernelError::Malformed(format!("extra axiom: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Theory::extension("PA+", extras)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Builtin {
    /// On pair input (k, w): outputs k.
    EchoFirst,
    /// On pair input (k, w): outputs w.
    EchoSecond,
    /// On pair input (k, w): accepts iff w is even.
    SecondParity,
    /// Outputs 0 on every input.
    NullProver,
    /// On (p, fam, a): outputs the one-axiom proof of numeral(a) = numeral(a).
    EqSelfProver,
    /// Like EqSelfProver for even a; outputs 0 otherwise.
    EvenProver,
    AcceptAll,
    RejectAll,
    /// On (d, fam, x): accepts iff x codes a satisfiable 3-CNF.
    SatBrute,
    /// On (d, fam, a): accepts iff the named family's instance is true.
    TruthVerifier,
    /// Self-referential proof template: on (k, x), accepts iff the
    /// embedded prover fails to produce a checker-valid proof of the
    /// k-derived family instance at x.
    GodelProof {
        prover: BigUint,
        theory: TheorySpec,
    },
    /// Self-referential decision template: on (k, x), runs the embedded
    /// decider and verifier on the k-derived family and applies the
    /// flavor's accept/reject twist.
    GodelDecision {
        flavor: GFlavor,
        e: BigUint,
        v: BigUint,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineSpec {
    Table(TMDescription, BigUint),
    /// Inner template code.
    SelfApply(BigUint),
    Builtin(Builtin),
}

/// Gödel-sequence tuple of naturals; the standard multi-argument input
/// shape.
pub fn tuple(parts: &[BigUint]) -> BigUint {
    godel::encode_seq(parts).expect("non-empty tuple").0
}

pub fn untuple(w: &BigUint) -> Option<Vec<BigUint>> {
    godel::decode_seq(&GodelNumber(w.clone())).ok()
}

pub fn encode_spec(spec: &MachineSpec) -> BigUint {
    match spec {
        MachineSpec::Table(m, c) => tm::encode_machine(m, c).0 .0,
        MachineSpec::SelfApply(inner) => tuple(&[BigUint::from(TAG_SELF_APPLY), inner.clone()]),
        MachineSpec::Builtin(b) => {
            let mut parts = vec![BigUint::from(TAG_BUILTIN)];
            match b {
                Builtin::EchoFirst => parts.push(BigUint::from(ID_ECHO_FIRST)),
                Builtin::EchoSecond => parts.push(BigUint::from(ID_ECHO_SECOND)),
                Builtin::SecondParity => parts.push(BigUint::from(ID_SECOND_PARITY)),
                Builtin::NullProver => parts.push(BigUint::from(ID_NULL_PROVER)),
                Builtin::EqSelfProver => parts.push(BigUint::from(ID_EQSELF_PROVER)),
                Builtin::EvenProver => parts.push(BigUint::from(ID_EVEN_PROVER)),
                Builtin::AcceptAll => parts.push(BigUint::from(ID_ACCEPT_ALL)),
                Builtin::RejectAll => parts.push(BigUint::from(ID_REJECT_ALL)),
                Builtin::SatBrute => parts.push(BigUint::from(ID_SAT_BRUTE)),
                Builtin::TruthVerifier => parts.push(BigUint::from(ID_TRUTH_VERIFIER)),
                Builtin::GodelProof { prover, theory } => {
                    parts.push(BigUint::from(ID_GODEL_PROOF));
                    parts.push(prover.clone());
                    parts.push(BigUint::from(theory.extra_axioms.len() as u64));
                    for axiom in &theory.extra_axioms {
                        parts.push(godel::encode_description(axiom).0);
                    }
                }
                Builtin::GodelDecision { flavor, e, v } => {
                    parts.push(BigUint::from(ID_GODEL_DECISION));
                    parts.push(BigUint::from(match flavor {
                        GFlavor::Ca => 0u64,
                        GFlavor::Cr => 1u64,
                    }));
                    parts.push(e.clone());
                    parts.push(v.clone());
                }
            }
            tuple(&parts)
        }
    }
}

/// Total decoder over the whole code space.
pub fn decode_spec(code: &BigUint) -> Option<MachineSpec> {
    let parts = untuple(code)?;
    match parts.as_slice() {
        [tag, inner] if tag.to_u64() == Some(TAG_SELF_APPLY) => {
            Some(MachineSpec::SelfApply(inner.clone()))
        }
        [t, c] => {
            let (m, c) = tm::decode_machine(&MachineCode(GodelNumber(tuple(&[t.clone(), c.clone()]))))?;
            Some(MachineSpec::Table(m, c))
        }
        [tag, rest @ ..] if tag.to_u64() == Some(TAG_BUILTIN) && !rest.is_empty() => {
            let id = rest[0].to_u64()?;
            let b = match (id, &rest[1..]) {
                (ID_ECHO_FIRST, []) => Builtin::EchoFirst,
                (ID_ECHO_SECOND, []) => Builtin::EchoSecond,
                (ID_SECOND_PARITY, []) => Builtin::SecondParity,
                (ID_NULL_PROVER, []) => Builtin::NullProver,
                (ID_EQSELF_PROVER, []) => Builtin::EqSelfProver,
                (ID_EVEN_PROVER, []) => Builtin::EvenProver,
                (ID_ACCEPT_ALL, []) => Builtin::AcceptAll,
                (ID_REJECT_ALL, []) => Builtin::RejectAll,
                (ID_SAT_BRUTE, []) => Builtin::SatBrute,
                (ID_TRUTH_VERIFIER, []) => Builtin::TruthVerifier,
                (ID_GODEL_PROOF, params) if params.len() >= 2 => {
                    let prover = params[0].clone();
                    let n = params[1].to_u64()? as usize;
                    if params.len() != 2 + n {
                        return None;
                    }
                    let mut extra_axioms = Vec::with_capacity(n);
                    for p in &params[2..] {
                        extra_axioms.push(godel::decode_description(&GodelNumber(p.clone())).ok()?);
                    }
                    Builtin::GodelProof {
                        prover,
                        theory: TheorySpec { extra_axioms },
                    }
                }
                (ID_GODEL_DECISION, [flavor, e, v]) => {
                    let flavor = match flavor.to_u64()? {
                        0 => GFlavor::Ca,
                        1 => GFlavor::Cr,
                        _ => return None,
                    };
                    Builtin::GodelDecision {
                        flavor,
                        e: e.clone(),
                        v: v.clone(),
                    }
                }
                _ => return None,
            };
            Some(MachineSpec::Builtin(b))
        }
        _ => None,
    }
}

pub fn builtin_code(b: Builtin) -> BigUint {
    encode_spec(&MachineSpec::Builtin(b))
}

pub fn table_code(m: &TMDescription, c: u32) -> BigUint {
    encode_spec(&MachineSpec::Table(m.clone(), BigUint::from(c)))
}

/// The declared exponent of a code: the table's own, or the nominal one
/// for built-ins and self-applications.
pub fn nominal_exponent(code: &BigUint) -> u32 {
    match decode_spec(code) {
        Some(MachineSpec::Table(_, c)) => c.to_u32().unwrap_or(NOMINAL_EXPONENT),
        _ => NOMINAL_EXPONENT,
    }
}

/// Execution context: caps plus a recursion guard for machines that run
/// machines.
pub struct ExecCtx<'a> {
    pub cfg: &'a Config,
    pub depth: u32,
}

impl<'a> ExecCtx<'a> {
    pub fn new(cfg: &'a Config) -> Self {
        ExecCtx { cfg, depth: 0 }
    }

    fn deeper(&self) -> ExecCtx<'a> {
        ExecCtx {
            cfg: self.cfg,
            depth: self.depth + 1,
        }
    }
}

const MAX_DEPTH: u32 = 12;

fn reject() -> Verdict {
    Verdict {
        kind: VerdictKind::Reject,
        steps_used: 0,
    }
}

fn accept() -> Verdict {
    Verdict {
        kind: VerdictKind::Accept,
        steps_used: 0,
    }
}

fn accept_if(cond: bool) -> Verdict {
    if cond {
        accept()
    } else {
        reject()
    }
}

fn output(value: &BigUint) -> Verdict {
    Verdict {
        kind: VerdictKind::Output(godel::binary_repr(value)),
        steps_used: 0,
    }
}

fn timeout() -> Verdict {
    Verdict {
        kind: VerdictKind::Timeout,
        steps_used: 0,
    }
}

/// Runs the machine coded by `code` on input `[w]`. Table machines obey
/// the step bound `Size(w)^c` capped by the configuration; built-ins run
/// natively with their steps charged as constant.
pub fn run(code: &BigUint, w: &BigUint, ctx: &ExecCtx) -> Verdict {
    if ctx.depth > MAX_DEPTH {
        return timeout();
    }
    let Some(spec) = decode_spec(code) else {
        return reject();
    };
    match spec {
        MachineSpec::Table(m, c) => {
            let size = tm::size_of(SizeFn::BitLen, w);
            let bound = tm::step_bound(size, &c).min(ctx.cfg.exec_step_cap);
            let input = godel::binary_repr(w);
            let (verdict, _) = tm::run_bounded(&m, &input, bound, false).expect("bit input");
            verdict
        }
        MachineSpec::SelfApply(inner) => {
            // The machine reads its own code and runs the template on the
            // paired input; the self-read is charged zero steps.
            let paired = tuple(&[code.clone(), w.clone()]);
            run(&inner, &paired, &ctx.deeper())
        }
        MachineSpec::Builtin(b) => run_builtin(&b, w, ctx),
    }
}

/// Proof-mode run: input (p, fam, a) with p = 0.
pub fn run_proof(code: &BigUint, family_number: &BigUint, a: &BigUint, ctx: &ExecCtx) -> Verdict {
    run(code, &tuple(&[BigUint::zero(), family_number.clone(), a.clone()]), ctx)
}

/// Decision-mode run: input (d, fam, a) with d = 1.
pub fn run_decision(code: &BigUint, family_number: &BigUint, a: &BigUint, ctx: &ExecCtx) -> Verdict {
    run(
        code,
        &tuple(&[BigUint::from(1u32), family_number.clone(), a.clone()]),
        ctx,
    )
}

fn eq_self_proof(a: &BigUint) -> BigUint {
    let numeral = pa::numeral_of(a);
    let tree = kernel::ProofTree::axiom(&pa::eq(numeral.clone(), numeral)).expect("axiom leaf");
    kernel::godel_number_tree(&tree).expect("core formula").0
}

fn run_builtin(b: &Builtin, w: &BigUint, ctx: &ExecCtx) -> Verdict {
    match b {
        Builtin::AcceptAll => accept(),
        Builtin::RejectAll => reject(),
        Builtin::NullProver => output(&BigUint::zero()),
        Builtin::EchoFirst | Builtin::EchoSecond | Builtin::SecondParity => {
            let Some(parts) = untuple(w) else {
                return reject();
            };
            if parts.len() != 2 {
                return reject();
            }
            match b {
                Builtin::EchoFirst => output(&parts[0]),
                Builtin::EchoSecond => output(&parts[1]),
                Builtin::SecondParity => accept_if(!parts[1].bit(0)),
                _ => unreachable!(),
            }
        }
        Builtin::EqSelfProver | Builtin::EvenProver => {
            let Some(parts) = untuple(w) else {
                return output(&BigUint::zero());
            };
            let Some(a) = parts.last() else {
                return output(&BigUint::zero());
            };
            if matches!(b, Builtin::EvenProver) && a.bit(0) {
                return output(&BigUint::zero());
            }
            output(&eq_self_proof(a))
        }
        Builtin::SatBrute => {
            let Some(parts) = untuple(w) else {
                return reject();
            };
            let Some(x) = parts.last() else {
                return reject();
            };
            accept_if(sat::sat_relation(x))
        }
        Builtin::TruthVerifier => {
            let Some(parts) = untuple(w) else {
                return reject();
            };
            if parts.len() != 3 {
                return reject();
            }
            let Some(family) = FormulaFamily::from_number(&GodelNumber(parts[1].clone())) else {
                return reject();
            };
            match family.truth(&parts[2], &ctx.deeper()) {
                Ok(Some(true)) => accept(),
                Ok(Some(false)) | Ok(None) | Err(_) => reject(),
            }
        }
        Builtin::GodelProof { prover, theory } => {
            // Input: (k, x) via self-application.
            let Some(parts) = untuple(w) else {
                return reject();
            };
            if parts.len() != 2 {
                return reject();
            }
            let k = &parts[0];
            let x = &parts[1];
            let Ok(theory) = theory.to_theory() else {
                return reject();
            };
            let Some(family) = FormulaFamily::godel_proof(k) else {
                return reject();
            };
            let proved = kernel::prover_proves(&theory, prover, &family, x, &ctx.deeper());
            accept_if(!proved)
        }
        Builtin::GodelDecision { flavor, e, v } => {
            let Some(parts) = untuple(w) else {
                return reject();
            };
            if parts.len() != 2 {
                return reject();
            }
            let k = &parts[0];
            let x = &parts[1];
            let Some(family) = FormulaFamily::godel_decision(*flavor, k) else {
                return reject();
            };
            let deeper = ctx.deeper();
            let ve = run_decision(e, family.number.value(), x, &deeper);
            let vv = run_decision(v, family.number.value(), x, &deeper);
            match flavor {
                // Reject iff both the decider and the verifier accept.
                GFlavor::Ca => accept_if(!(ve.accepts() && vv.accepts())),
                // Accept iff both reject.
                GFlavor::Cr => accept_if(ve.rejects() && vv.rejects()),
            }
        }
    }
}

/// The standard semantic hook: machine-backed atoms run through the
/// universe, the SAT matrix through the solver-side checker, and proof
/// atoms through the kernel.
pub struct MachineHook<'a> {
    pub cfg: &'a Config,
}

impl<'a> SemanticHook for MachineHook<'a> {
    fn eval_sem(&self, atom: &SemAtom, args: &[BigUint]) -> Result<bool, EvalError> {
        let ctx = ExecCtx::new(self.cfg);
        match (&atom.kind, args) {
            (SemKind::SatMatrix, [x, w]) => Ok(sat::sat_matrix(x, w)),
            (SemKind::MachineAcc { family }, [e, a]) => {
                let number = godel::encode_description(family);
                Ok(run_decision(e, &number.0, a, &ctx).accepts())
            }
            (SemKind::MachineOut { family }, [e, a, b]) => {
                let number = godel::encode_description(family);
                let verdict = run_proof(e, &number.0, a, &ctx);
                Ok(verdict.output_value().as_ref() == Some(b))
            }
            (SemKind::ProofAcpt { family }, [a, b]) => {
                let Some(fam) = FormulaFamily::from_descriptor(family) else {
                    return Err(EvalError::SemanticUnavailable(format!(
                        "unknown family {family:?}"
                    )));
                };
                let theory = fam.theory();
                let Ok(tree) = kernel::decode_tree(&GodelNumber(b.clone())) else {
                    return Ok(false);
                };
                let Ok(target) = fam.instance(a) else {
                    return Ok(false);
                };
                Ok(kernel::check_proof(&theory, &target, &tree).is_ok())
            }
            _ => Err(EvalError::SemanticUnavailable(format!(
                "arity mismatch for {:?}",
                atom.kind
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn spec_codec_round_trips() {
        let specs = vec![
            MachineSpec::Table(corpus::parity(), BigUint::from(2u32)),
            MachineSpec::SelfApply(builtin_code(Builtin::EchoFirst)),
            MachineSpec::Builtin(Builtin::AcceptAll),
            MachineSpec::Builtin(Builtin::GodelProof {
                prover: builtin_code(Builtin::NullProver),
                theory: TheorySpec::pa(),
            }),
            MachineSpec::Builtin(Builtin::GodelDecision {
                flavor: GFlavor::Cr,
                e: builtin_code(Builtin::AcceptAll),
                v: builtin_code(Builtin::RejectAll),
            }),
        ];
        for spec in specs {
            let code = encode_spec(&spec);
            assert_eq!(decode_spec(&code), Some(spec));
        }
    }

    #[test]
    fn plain_table_codes_run_like_universal_ptm() {
        let m = corpus::parity();
        let code = table_code(&m, 2);
        let config = cfg();
        let ctx = ExecCtx::new(&config);
        for w in 0u64..64 {
            let w = BigUint::from(w);
            let direct = tm::universal_ptm(
                &MachineCode(GodelNumber(code.clone())),
                &w,
                SizeFn::BitLen,
            );
            assert_eq!(run(&code, &w, &ctx), direct.verdict);
        }
    }

    #[test]
    fn decode_is_total_on_junk() {
        let config = cfg();
        let ctx = ExecCtx::new(&config);
        for v in 0u64..2000 {
            let code = BigUint::from(v);
            let _ = run(&code, &BigUint::from(5u32), &ctx);
        }
    }

    #[test]
    fn self_apply_satisfies_the_fixed_point_equation() {
        let config = cfg();
        let ctx = ExecCtx::new(&config);
        for template in [Builtin::EchoFirst, Builtin::EchoSecond, Builtin::SecondParity] {
            let t = builtin_code(template);
            let k = encode_spec(&MachineSpec::SelfApply(t.clone()));
            for w in 0u64..64 {
                let w = BigUint::from(w);
                let left = run(&k, &w, &ctx);
                let right = run(&t, &tuple(&[k.clone(), w.clone()]), &ctx);
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn echo_first_self_application_prints_its_own_code() {
        let config = cfg();
        let ctx = ExecCtx::new(&config);
        let t = builtin_code(Builtin::EchoFirst);
        let k = encode_spec(&MachineSpec::SelfApply(t));
        for w in 0u64..16 {
            let verdict = run(&k, &BigUint::from(w), &ctx);
            assert_eq!(verdict.output_value(), Some(k.clone()));
        }
    }

    #[test]
    fn eq_self_prover_output_checks() {
        let config = cfg();
        let ctx = ExecCtx::new(&config);
        let prover = builtin_code(Builtin::EqSelfProver);
        let family = FormulaFamily::eq_self();
        for a in 0u64..6 {
            let a = BigUint::from(a);
            let verdict = run_proof(&prover, family.number.value(), &a, &ctx);
            let tree = kernel::decode_tree(&GodelNumber(verdict.output_value().unwrap())).unwrap();
            let target = family.instance(&a).unwrap();
            assert!(kernel::check_proof(&Theory::pa(), &target, &tree).is_ok());
        }
    }

    #[test]
    fn sat_brute_matches_the_relation() {
        let config = cfg();
        let ctx = ExecCtx::new(&config);
        let code = builtin_code(Builtin::SatBrute);
        let fam = FormulaFamily::sat();
        for x in 0u64..512 {
            let x = BigUint::from(x);
            let got = run_decision(&code, fam.number.value(), &x, &ctx).accepts();
            assert_eq!(got, sat::sat_relation(&x));
        }
    }

    #[test]
    fn truth_verifier_tracks_family_truth() {
        let config = cfg();
        let ctx = ExecCtx::new(&config);
        let code = builtin_code(Builtin::TruthVerifier);
        let eq_self = FormulaFamily::eq_self();
        let lt_self = FormulaFamily::lt_self();
        for a in 0u64..4 {
            let a = BigUint::from(a);
            assert!(run_decision(&code, eq_self.number.value(), &a, &ctx).accepts());
            assert!(run_decision(&code, lt_self.number.value(), &a, &ctx).rejects());
        }
    }
}
