//! Hilbert-style proof trees and the validity-checking algorithm.
//!
//! Leaves carry axioms; inner nodes follow from their parents by Modus
//! Ponens, Generalization, or a restatement. Formulas are kept in the
//! core connective basis. The axiom basis is a fixed standard set:
//! K, S and contraposition for the propositional part, instantiation,
//! distribution and vacuous introduction for quantifiers, equality and
//! congruence schemas, the PA successor/addition/multiplication/order
//! axioms, and the induction schema recognized by pattern.

use crate::godel::{self, GodelNumber};
use crate::pa::{self, Formula, Term, VarId};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rule {
    Axiom,
    ModusPonens,
    Generalization(VarId),
    Restate,
}

impl Rule {
    fn arity_ok(&self, n: usize) -> bool {
        match self {
            Rule::Axiom => n == 0,
            Rule::ModusPonens => n == 2,
            Rule::Generalization(_) | Rule::Restate => n == 1,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Axiom => write!(f, "axiom"),
            Rule::ModusPonens => write!(f, "mp"),
            Rule::Generalization(v) => write!(f, "gen x{v}"),
            Rule::Restate => write!(f, "restate"),
        }
    }
}

/// A proof tree node: its formula, the rule deriving it, and the subtrees
/// proving its premises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTree {
    pub formula: Formula,
    pub rule: Rule,
    pub children: Vec<ProofTree>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("rule {0} takes a different number of premises")]
    Arity(String),
    #[error("modus ponens premises do not fit: {0}")]
    MpShape(String),
    #[error("formula is not expressible in the core basis: {0}")]
    NotCore(String),
    #[error("malformed proof-tree code: {0}")]
    Malformed(String),
}

impl ProofTree {
    /// Builds a node, normalizing the formula into the core basis.
    pub fn new(formula: &Formula, rule: Rule, children: Vec<ProofTree>) -> Result<ProofTree, KernelError> {
        let formula = pa::to_core(formula).map_err(|e| KernelError::NotCore(e.to_string()))?;
        if !rule.arity_ok(children.len()) {
            return Err(KernelError::Arity(rule.to_string()));
        }
        Ok(ProofTree {
            formula,
            rule,
            children,
        })
    }

    pub fn axiom(formula: &Formula) -> Result<ProofTree, KernelError> {
        ProofTree::new(formula, Rule::Axiom, vec![])
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ProofTree::node_count).sum::<usize>()
    }
}

/// Composes proofs of `phi` and `phi -> psi` into a proof of `psi`;
/// a shape mismatch is an error (the zero branch of the composition
/// function).
pub fn mp(pi1: &ProofTree, pi2: &ProofTree) -> Result<ProofTree, KernelError> {
    let Formula::Implies(a, b) = &pi2.formula else {
        return Err(KernelError::MpShape(format!(
            "second premise is not an implication: {}",
            pi2.formula
        )));
    };
    if **a != pi1.formula {
        return Err(KernelError::MpShape(format!(
            "antecedent {} does not match the first premise {}",
            a, pi1.formula
        )));
    }
    let conclusion = (**b).clone();
    Ok(ProofTree {
        formula: conclusion,
        rule: Rule::ModusPonens,
        children: vec![pi1.clone(), pi2.clone()],
    })
}

/// Wraps a proof of `phi` into a proof of `A x. phi`. The kernel carries
/// no assumption context, so the eigenvariable condition holds trivially.
pub fn gen(pi: &ProofTree, x: VarId) -> ProofTree {
    let formula = pa::forall(x, pi.formula.clone());
    ProofTree {
        formula,
        rule: Rule::Generalization(x),
        children: vec![pi.clone()],
    }
}

/// A theory: the built-in PA axiom schemas plus a finite list of extra
/// axioms, membership decidable by schema matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub name: String,
    pub extras: Vec<Formula>,
}

impl Theory {
    pub fn pa() -> Theory {
        Theory {
            name: "PA".into(),
            extras: Vec::new(),
        }
    }

    /// PT-extension of PA by finitely many extra axioms.
    pub fn extension(name: &str, extras: Vec<Formula>) -> Result<Theory, KernelError> {
        let extras = extras
            .iter()
            .map(|f| pa::to_core(f).map_err(|e| KernelError::NotCore(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Theory {
            name: name.into(),
            extras,
        })
    }
}

/// Schema matching for the axiom basis. The formula must be in the core
/// basis; anything else is not an axiom.
pub fn is_axiom(theory: &Theory, f: &Formula) -> bool {
    if !pa::is_core(f) {
        return false;
    }
    if theory.extras.iter().any(|a| a == f) {
        return true;
    }
    propositional_axiom(f)
        || quantifier_axiom(f)
        || equality_axiom(f)
        || pa_axiom(f)
        || induction_instance(f)
}

fn propositional_axiom(f: &Formula) -> bool {
    use Formula::{Implies, Not};
    // K: a -> (b -> a)
    if let Implies(a, rest) = f {
        if let Implies(_, c) = &**rest {
            if a == c {
                return true;
            }
        }
    }
    // S: (a -> (b -> c)) -> ((a -> b) -> (a -> c))
    if let Implies(left, right) = f {
        if let (Implies(a1, bc), Implies(ab, ac)) = (&**left, &**right) {
            if let (Implies(b1, c1), Implies(a2, b2), Implies(a3, c2)) = (&**bc, &**ab, &**ac) {
                if a1 == a2 && a1 == a3 && b1 == b2 && c1 == c2 {
                    return true;
                }
            }
        }
    }
    // Contraposition: (!a -> !b) -> (b -> a)
    if let Implies(left, right) = f {
        if let (Implies(na, nb), Implies(b2, a2)) = (&**left, &**right) {
            if let (Not(a1), Not(b1)) = (&**na, &**nb) {
                if a1 == a2 && b1 == b2 {
                    return true;
                }
            }
        }
    }
    false
}

/// Finds `t` such that `pattern[x := t] == target`, walking both trees.
/// Occurrences of `x` under a rebinding of `x` must match verbatim.
fn match_instantiation(pattern: &Formula, target: &Formula, x: VarId) -> Option<Term> {
    fn terms(p: &Term, t: &Term, x: VarId, shadowed: bool, out: &mut Option<Term>) -> bool {
        if !shadowed {
            if let Term::Var(v) = p {
                if *v == x {
                    match out {
                        None => {
                            *out = Some(t.clone());
                            return true;
                        }
                        Some(seen) => return seen == t,
                    }
                }
            }
        }
        match (p, t) {
            (Term::Zero, Term::Zero) => true,
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Param(a), Term::Param(b)) => a == b,
            (Term::Numeral(a), Term::Numeral(b)) => a == b,
            (Term::Succ(a), Term::Succ(b)) => terms(a, b, x, shadowed, out),
            (Term::Add(a1, a2), Term::Add(b1, b2))
            | (Term::Mul(a1, a2), Term::Mul(b1, b2)) => {
                terms(a1, b1, x, shadowed, out) && terms(a2, b2, x, shadowed, out)
            }
            _ => false,
        }
    }
    fn go(p: &Formula, t: &Formula, x: VarId, shadowed: bool, out: &mut Option<Term>) -> bool {
        match (p, t) {
            (Formula::Eq(a1, a2), Formula::Eq(b1, b2))
            | (Formula::Lt(a1, a2), Formula::Lt(b1, b2)) => {
                terms(a1, b1, x, shadowed, out) && terms(a2, b2, x, shadowed, out)
            }
            (Formula::Not(a), Formula::Not(b)) => go(a, b, x, shadowed, out),
            (Formula::Implies(a1, a2), Formula::Implies(b1, b2)) => {
                go(a1, b1, x, shadowed, out) && go(a2, b2, x, shadowed, out)
            }
            (Formula::ForAll(v1, a), Formula::ForAll(v2, b)) => {
                v1 == v2 && go(a, b, x, shadowed || *v1 == x, out)
            }
            _ => false,
        }
    }
    let mut out = None;
    if go(pattern, target, x, false, &mut out) {
        // A vacuous instantiation (x not free) matches with any term.
        Some(out.unwrap_or(Term::Zero))
    } else {
        None
    }
}

fn quantifier_axiom(f: &Formula) -> bool {
    use Formula::{ForAll, Implies};
    let Implies(left, right) = f else {
        return false;
    };
    // Instantiation: (A x. phi) -> phi[x := t], t free for x.
    if let ForAll(x, body) = &**left {
        if let Some(t) = match_instantiation(body, right, *x) {
            if let Ok(inst) = body.subst(*x, &t) {
                if inst == **right {
                    return true;
                }
            }
        }
    }
    // Distribution: (A x. (phi -> psi)) -> ((A x. phi) -> (A x. psi))
    if let (ForAll(x, body), Implies(l2, r2)) = (&**left, &**right) {
        if let (Formula::Implies(phi, psi), ForAll(x2, phi2), ForAll(x3, psi2)) =
            (&**body, &**l2, &**r2)
        {
            if x == x2 && x == x3 && phi == phi2 && psi == psi2 {
                return true;
            }
        }
    }
    // Vacuous introduction: phi -> (A x. phi), x not free in phi.
    if let ForAll(x, body) = &**right {
        if **left == **body && !left.free_vars().contains(x) {
            return true;
        }
    }
    false
}

fn equality_axiom(f: &Formula) -> bool {
    use Formula::{Eq, Implies, Lt};
    // t = t
    if let Eq(a, b) = f {
        if a == b {
            return true;
        }
    }
    // s = t -> t = s
    if let Implies(l, r) = f {
        if let (Eq(s1, t1), Eq(t2, s2)) = (&**l, &**r) {
            if s1 == s2 && t1 == t2 {
                return true;
            }
        }
        // s = t -> S s = S t
        if let (Eq(s, t), Eq(ss, st)) = (&**l, &**r) {
            if Term::Succ(Box::new(s.clone())) == *ss && Term::Succ(Box::new(t.clone())) == *st {
                return true;
            }
        }
        // s = t -> (t = u -> s = u)
        if let (Eq(s1, t1), Implies(l2, r2)) = (&**l, &**r) {
            if let (Eq(t2, u1), Eq(s2, u2)) = (&**l2, &**r2) {
                if s1 == s2 && t1 == t2 && u1 == u2 {
                    return true;
                }
            }
        }
        // s1 = t1 -> (s2 = t2 -> s1 (+|*) s2 = t1 (+|*) t2)
        if let (Eq(s1, t1), Implies(l2, r2)) = (&**l, &**r) {
            if let (Eq(s2, t2), Eq(lhs, rhs)) = (&**l2, &**r2) {
                let add_ok = *lhs == s1.clone().add(s2.clone()) && *rhs == t1.clone().add(t2.clone());
                let mul_ok = *lhs == s1.clone().mul(s2.clone()) && *rhs == t1.clone().mul(t2.clone());
                if add_ok || mul_ok {
                    return true;
                }
            }
            // s1 = t1 -> (s2 = t2 -> (s1 = s2 -> t1 = t2)) and the < version
            if let (Eq(s2, t2), Implies(l3, r3)) = (&**l2, &**r2) {
                match (&**l3, &**r3) {
                    (Eq(a, b), Eq(c, d)) | (Lt(a, b), Lt(c, d)) => {
                        if a == s1 && b == s2 && c == t1 && d == t2 {
                            return true;
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    false
}

fn pa_axiom(f: &Formula) -> bool {
    use Formula::{Eq, Implies, Lt, Not};
    // !(S t = 0)
    if let Not(inner) = f {
        if let Eq(st, z) = &**inner {
            if matches!(st, Term::Succ(_)) && *z == Term::Zero {
                return true;
            }
        }
        // !(t < 0)
        if let Lt(_, z) = &**inner {
            if *z == Term::Zero {
                return true;
            }
        }
    }
    if let Implies(l, r) = f {
        // S s = S t -> s = t
        if let (Eq(ss, st), Eq(s, t)) = (&**l, &**r) {
            if *ss == s.clone().succ() && *st == t.clone().succ() {
                return true;
            }
        }
        // s < S t -> (!(s < t) -> s = t)
        if let (Lt(s1, st), Implies(l2, r2)) = (&**l, &**r) {
            if let (Not(inner), Eq(s2, t2)) = (&**l2, &**r2) {
                if let Lt(s3, t3) = &**inner {
                    if *st == t2.clone().succ() && s1 == s2 && s1 == s3 && t2 == t3 {
                        return true;
                    }
                }
            }
        }
        // s < t -> s < S t
        if let (Lt(s1, t1), Lt(s2, st)) = (&**l, &**r) {
            if s1 == s2 && *st == t1.clone().succ() {
                return true;
            }
        }
        // s = t -> s < S t
        if let (Eq(s1, t1), Lt(s2, st)) = (&**l, &**r) {
            if s1 == s2 && *st == t1.clone().succ() {
                return true;
            }
        }
        // s < t -> (t < u -> s < u)
        if let (Lt(s1, t1), Implies(l2, r2)) = (&**l, &**r) {
            if let (Lt(t2, u1), Lt(s2, u2)) = (&**l2, &**r2) {
                if s1 == s2 && t1 == t2 && u1 == u2 {
                    return true;
                }
            }
        }
        // !(s < t) -> (!(s = t) -> t < s)
        if let (Not(nl), Implies(l2, r2)) = (&**l, &**r) {
            if let (Lt(s1, t1), Not(ne), Lt(t2, s2)) = (&**nl, &**l2, &**r2) {
                if let Eq(s3, t3) = &**ne {
                    if s1 == s2 && s1 == s3 && t1 == t2 && t1 == t3 {
                        return true;
                    }
                }
            }
        }
    }
    if let Eq(lhs, rhs) = f {
        // t + 0 = t
        if let Term::Add(t, z) = lhs {
            if **z == Term::Zero && **t == *rhs {
                return true;
            }
        }
        // s + S t = S (s + t)
        if let (Term::Add(s1, st), Term::Succ(sum)) = (lhs, rhs) {
            if let (Term::Succ(t1), Term::Add(s2, t2)) = (&**st, &**sum) {
                if s1 == s2 && t1 == t2 {
                    return true;
                }
            }
        }
        // t * 0 = 0
        if let Term::Mul(_, z) = lhs {
            if **z == Term::Zero && *rhs == Term::Zero {
                return true;
            }
        }
        // s * S t = (s * t) + s
        if let (Term::Mul(s1, st), Term::Add(prod, s3)) = (lhs, rhs) {
            if let (Term::Succ(t1), Term::Mul(s2, t2)) = (&**st, &**prod) {
                if s1 == s2 && s1 == s3 && t1 == t2 {
                    return true;
                }
            }
        }
    }
    false
}

/// Induction schema in core form:
/// `!(phi(0) -> !(A x. (phi(x) -> phi(S x)))) -> (A x. phi(x))`.
fn induction_instance(f: &Formula) -> bool {
    use Formula::{ForAll, Implies, Not};
    let Implies(premise, conclusion) = f else {
        return false;
    };
    let ForAll(x, phi) = &**conclusion else {
        return false;
    };
    let Not(inner) = &**premise else {
        return false;
    };
    let Implies(base, not_step) = &**inner else {
        return false;
    };
    let Not(step_all) = &**not_step else {
        return false;
    };
    let ForAll(x2, step) = &**step_all else {
        return false;
    };
    if x != x2 {
        return false;
    }
    let Implies(phi_x, phi_sx) = &**step else {
        return false;
    };
    if **phi_x != **phi {
        return false;
    }
    let Ok(expect_base) = phi.subst(*x, &Term::Zero) else {
        return false;
    };
    let Ok(expect_step) = phi.subst(*x, &Term::Var(*x).succ()) else {
        return false;
    };
    **base == expect_base && **phi_sx == expect_step
}

/// Path from the root: child indices taken at each level.
pub type NodePath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub path: NodePath,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at node {:?}: {}", self.path, self.reason)
    }
}

/// The validity-checking algorithm: structural checks, every leaf an
/// axiom, every inner node justified by its rule, and the root equal to
/// the target. A rejection carries the first failing node path.
pub fn check_proof(theory: &Theory, target: &Formula, tree: &ProofTree) -> Result<(), Rejection> {
    let target = match pa::to_core(target) {
        Ok(f) => f,
        Err(e) => {
            return Err(Rejection {
                path: vec![],
                reason: format!("target formula is not core-expressible: {e}"),
            })
        }
    };
    check_node(theory, tree, &mut Vec::new())?;
    if tree.formula != target {
        return Err(Rejection {
            path: vec![],
            reason: format!(
                "root proves {} but the target is {}",
                tree.formula, target
            ),
        });
    }
    Ok(())
}

fn check_node(theory: &Theory, node: &ProofTree, path: &mut NodePath) -> Result<(), Rejection> {
    let reject = |path: &NodePath, reason: String| Rejection {
        path: path.clone(),
        reason,
    };
    if !node.rule.arity_ok(node.children.len()) {
        return Err(reject(
            path,
            format!(
                "rule {} with {} premises",
                node.rule,
                node.children.len()
            ),
        ));
    }
    match &node.rule {
        Rule::Axiom => {
            if !is_axiom(theory, &node.formula) {
                return Err(reject(
                    path,
                    format!("leaf formula is not an axiom of {}: {}", theory.name, node.formula),
                ));
            }
        }
        Rule::ModusPonens => {
            let phi = &node.children[0].formula;
            let imp = &node.children[1].formula;
            let Formula::Implies(a, b) = imp else {
                return Err(reject(path, format!("second premise {imp} is not an implication")));
            };
            if **a != *phi {
                return Err(reject(
                    path,
                    format!("antecedent {a} does not match the first premise {phi}"),
                ));
            }
            if **b != node.formula {
                return Err(reject(
                    path,
                    format!("conclusion {} does not match the implication {imp}", node.formula),
                ));
            }
        }
        Rule::Generalization(x) => {
            let premise = &node.children[0].formula;
            let expect = pa::forall(*x, premise.clone());
            if node.formula != expect {
                return Err(reject(
                    path,
                    format!("generalization over x{x} of {premise} does not yield {}", node.formula),
                ));
            }
        }
        Rule::Restate => {
            if node.children[0].formula != node.formula {
                return Err(reject(path, "restated formula differs from its premise".into()));
            }
        }
    }
    for (i, child) in node.children.iter().enumerate() {
        path.push(i);
        check_node(theory, child, path)?;
        path.pop();
    }
    Ok(())
}

const TAG_AXIOM: u64 = 0;
const TAG_MP: u64 = 1;
const TAG_RESTATE: u64 = 2;
const TAG_GEN_BASE: u64 = 2; // gen(x_v) encodes as 2 + v, v >= 1

/// Canonical sequence encoding: preorder triples
/// (formula number, rule tag, child count).
pub fn godel_number_tree(tree: &ProofTree) -> Result<GodelNumber, KernelError> {
    let mut flat: Vec<BigUint> = Vec::new();
    fn walk(node: &ProofTree, flat: &mut Vec<BigUint>) -> Result<(), KernelError> {
        let num = pa::godel_number(&node.formula)
            .map_err(|e| KernelError::NotCore(e.to_string()))?;
        let tag = match &node.rule {
            Rule::Axiom => TAG_AXIOM,
            Rule::ModusPonens => TAG_MP,
            Rule::Restate => TAG_RESTATE,
            Rule::Generalization(v) => TAG_GEN_BASE + u64::from(*v),
        };
        flat.push(num.0.clone());
        flat.push(BigUint::from(tag));
        flat.push(BigUint::from(node.children.len() as u64));
        for child in &node.children {
            walk(child, flat)?;
        }
        Ok(())
    }
    walk(tree, &mut flat)?;
    Ok(godel::encode_seq(&flat).expect("non-empty"))
}

/// Inverse of `godel_number_tree`; total via the error channel.
pub fn decode_tree(code: &GodelNumber) -> Result<ProofTree, KernelError> {
    let flat = godel::decode_seq(code).map_err(|e| KernelError::Malformed(e.to_string()))?;
    if flat.len() % 3 != 0 || flat.is_empty() {
        return Err(KernelError::Malformed("flat list is not triples".into()));
    }
    let mut pos = 0usize;
    let tree = decode_node(&flat, &mut pos, 0)?;
    if pos != flat.len() {
        return Err(KernelError::Malformed("trailing triples after the root".into()));
    }
    Ok(tree)
}

fn decode_node(flat: &[BigUint], pos: &mut usize, depth: usize) -> Result<ProofTree, KernelError> {
    if depth > 10_000 {
        return Err(KernelError::Malformed("tree too deep".into()));
    }
    if *pos + 3 > flat.len() {
        return Err(KernelError::Malformed("truncated triple".into()));
    }
    let formula_code = GodelNumber(flat[*pos].clone());
    let tag = flat[*pos + 1]
        .to_u64()
        .ok_or_else(|| KernelError::Malformed("rule tag out of range".into()))?;
    let nchildren = flat[*pos + 2]
        .to_u64()
        .ok_or_else(|| KernelError::Malformed("child count out of range".into()))?;
    *pos += 3;
    if nchildren > 2 {
        return Err(KernelError::Malformed("child count exceeds 2".into()));
    }
    let rule = match tag {
        TAG_AXIOM => Rule::Axiom,
        TAG_MP => Rule::ModusPonens,
        TAG_RESTATE => Rule::Restate,
        v if v > TAG_GEN_BASE => {
            let var = u32::try_from(v - TAG_GEN_BASE)
                .map_err(|_| KernelError::Malformed("generalization variable too large".into()))?;
            Rule::Generalization(var)
        }
        _ => return Err(KernelError::Malformed(format!("unknown rule tag {tag}"))),
    };
    if !rule.arity_ok(nchildren as usize) {
        return Err(KernelError::Malformed(format!(
            "rule {rule} with {nchildren} children"
        )));
    }
    let symbols = godel::decode_expression(&formula_code)
        .map_err(|e| KernelError::Malformed(e.to_string()))?;
    let formula = pa::formula_from_symbols(&symbols)
        .map_err(|e| KernelError::Malformed(e.to_string()))?;
    let mut children = Vec::with_capacity(nchildren as usize);
    for _ in 0..nchildren {
        children.push(decode_node(flat, pos, depth + 1)?);
    }
    Ok(ProofTree {
        formula,
        rule,
        children,
    })
}

/// Text format: `(node "<formula>" <axiom|mp|gen xN|restate> <child>*)`.
pub fn print_tree(tree: &ProofTree) -> String {
    let mut out = String::new();
    fn walk(node: &ProofTree, out: &mut String) {
        out.push_str("(node \"");
        out.push_str(&node.formula.to_string());
        out.push_str("\" ");
        out.push_str(&node.rule.to_string());
        for child in &node.children {
            out.push(' ');
            walk(child, out);
        }
        out.push(')');
    }
    walk(tree, &mut out);
    out
}

pub fn parse_tree(text: &str) -> Result<ProofTree, KernelError> {
    let mut chars: Vec<char> = text.chars().collect();
    chars.retain(|c| *c != '\n' && *c != '\r');
    let mut pos = 0usize;
    let tree = parse_node(&chars, &mut pos)?;
    while pos < chars.len() && chars[pos].is_whitespace() {
        pos += 1;
    }
    if pos != chars.len() {
        return Err(KernelError::Malformed("trailing input after tree".into()));
    }
    Ok(tree)
}

fn parse_node(chars: &[char], pos: &mut usize) -> Result<ProofTree, KernelError> {
    let err = |msg: &str| KernelError::Malformed(msg.into());
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(pos);
    let expect_str = |pos: &mut usize, s: &str| -> Result<(), KernelError> {
        for c in s.chars() {
            if chars.get(*pos) != Some(&c) {
                return Err(KernelError::Malformed(format!("expected {s:?}")));
            }
            *pos += 1;
        }
        Ok(())
    };
    expect_str(pos, "(node")?;
    skip_ws(pos);
    expect_str(pos, "\"")?;
    let start = *pos;
    while *pos < chars.len() && chars[*pos] != '"' {
        *pos += 1;
    }
    if *pos == chars.len() {
        return Err(err("unterminated formula string"));
    }
    let formula_text: String = chars[start..*pos].iter().collect();
    *pos += 1;
    let formula = pa::parse_formula(&formula_text)
        .map_err(|e| KernelError::Malformed(format!("formula: {e}")))?;
    skip_ws(pos);
    let word_start = *pos;
    while *pos < chars.len() && (chars[*pos].is_ascii_alphanumeric() || chars[*pos] == ' ' && false) {
        *pos += 1;
    }
    let mut rule_word: String = chars[word_start..*pos].iter().collect();
    if rule_word == "gen" {
        skip_ws(pos);
        let vstart = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_alphanumeric() {
            *pos += 1;
        }
        let vtok: String = chars[vstart..*pos].iter().collect();
        rule_word = format!("gen {vtok}");
    }
    let rule = match rule_word.as_str() {
        "axiom" => Rule::Axiom,
        "mp" => Rule::ModusPonens,
        "restate" => Rule::Restate,
        w if w.starts_with("gen x") => {
            let v: u32 = w[5..]
                .parse()
                .map_err(|_| err("bad generalization variable"))?;
            Rule::Generalization(v)
        }
        other => return Err(KernelError::Malformed(format!("unknown rule {other:?}"))),
    };
    let mut children = Vec::new();
    loop {
        skip_ws(pos);
        match chars.get(*pos) {
            Some(')') => {
                *pos += 1;
                break;
            }
            Some('(') => children.push(parse_node(chars, pos)?),
            _ => return Err(err("expected a child node or )")),
        }
    }
    ProofTree::new(&formula, rule, children)
}
