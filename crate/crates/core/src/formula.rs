//! Quantifier-free formulas over term equations, plus the three
//! normalisation passes the solvers rely on: conditional-term removal,
//! skolemisation of top-level universals, and CNF/DNF conversion with a
//! clause-count guard.
//!
//! Conditions of `ite` terms are formulas. Inside a [`Term`] they are stored
//! as an embedded encoding (`=`, `not`, `and`, `or`, `=>` as term heads);
//! [`term_to_formula`] and [`formula_to_term`] convert between the two views.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::{Signature, Symbol, Term, EMBEDDED_EQ, ITE};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Eq(..) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| t.is_ground())
    }

    pub fn contains_ite(&self) -> bool {
        self.terms().iter().any(|t| t.contains_ite())
    }

    pub fn contains_op(&self, name: &str) -> bool {
        self.terms().iter().any(|t| t.contains_op(name))
    }

    /// The top-level terms of every equation, in syntactic order.
    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Formula::Eq(s, t) => {
                out.push(s);
                out.push(t);
            }
            Formula::Not(f) => f.collect_terms(out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_terms(out);
                }
            }
            Formula::Implies(a, b) => {
                a.collect_terms(out);
                b.collect_terms(out);
            }
            Formula::Forall(_, f) | Formula::Exists(_, f) => f.collect_terms(out),
        }
    }

    /// Rewrite every equation's terms with `f`.
    pub fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::Eq(s, t) => Formula::Eq(f(s), f(t)),
            Formula::Not(g) => Formula::not(g.map_terms(f)),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.map_terms(f)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.map_terms(f)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.map_terms(f), b.map_terms(f)),
            Formula::Forall(vs, g) => Formula::Forall(vs.clone(), Box::new(g.map_terms(f))),
            Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(g.map_terms(f))),
        }
    }

    pub fn symbol_names(&self, out: &mut BTreeSet<String>) {
        for t in self.terms() {
            t.symbol_names(out);
        }
    }

    /// Rename a nullary op throughout (used by skolemisation).
    pub fn rename_op(&self, from: &str, to: &str) -> Formula {
        self.map_terms(&|t| rename_op_term(t, from, to))
    }
}

fn rename_op_term(t: &Term, from: &str, to: &str) -> Term {
    let head = match &t.head {
        Symbol::Op(n) if n == from => Symbol::Op(to.to_string()),
        h => h.clone(),
    };
    Term {
        head,
        args: t.args.iter().map(|a| rename_op_term(a, from, to)).collect(),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(s, t) => write!(f, "(= {s} {t})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(fs) => {
                write!(f, "(and")?;
                for g in fs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Or(fs) => {
                write!(f, "(or")?;
                for g in fs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Implies(a, b) => write!(f, "(=> {a} {b})"),
            Formula::Forall(vs, g) => {
                write!(f, "(forall (")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "({v} U)")?;
                }
                write!(f, ") {g})")
            }
            Formula::Exists(vs, g) => {
                write!(f, "(exists (")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "({v} U)")?;
                }
                write!(f, ") {g})")
            }
        }
    }
}

/// Decode a term in the embedded-formula encoding.
pub fn term_to_formula(t: &Term) -> Result<Formula> {
    match &t.head {
        Symbol::Op(n) if n == EMBEDDED_EQ && t.args.len() == 2 => {
            Ok(Formula::Eq(t.args[0].clone(), t.args[1].clone()))
        }
        Symbol::Op(n) if n == "not" && t.args.len() == 1 => {
            Ok(Formula::not(term_to_formula(&t.args[0])?))
        }
        Symbol::Op(n) if n == "and" => Ok(Formula::And(
            t.args.iter().map(term_to_formula).collect::<Result<_>>()?,
        )),
        Symbol::Op(n) if n == "or" => Ok(Formula::Or(
            t.args.iter().map(term_to_formula).collect::<Result<_>>()?,
        )),
        Symbol::Op(n) if n == "=>" && t.args.len() == 2 => Ok(Formula::implies(
            term_to_formula(&t.args[0])?,
            term_to_formula(&t.args[1])?,
        )),
        _ => Err(Error::Unsupported(format!(
            "not an embedded formula: {t}"
        ))),
    }
}

/// Encode a quantifier-free formula as a term, the inverse of
/// [`term_to_formula`].
pub fn formula_to_term(f: &Formula) -> Result<Term> {
    match f {
        Formula::Eq(s, t) => Ok(Term::op(EMBEDDED_EQ, vec![s.clone(), t.clone()])),
        Formula::Not(g) => Ok(Term::op("not", vec![formula_to_term(g)?])),
        Formula::And(fs) => Ok(Term::op(
            "and",
            fs.iter().map(formula_to_term).collect::<Result<_>>()?,
        )),
        Formula::Or(fs) => Ok(Term::op(
            "or",
            fs.iter().map(formula_to_term).collect::<Result<_>>()?,
        )),
        Formula::Implies(a, b) => Ok(Term::op(
            "=>",
            vec![formula_to_term(a)?, formula_to_term(b)?],
        )),
        Formula::Forall(..) | Formula::Exists(..) => Err(Error::Unsupported(
            "quantifier inside an embedded formula".to_string(),
        )),
    }
}

/// Remove every conditional term. Each innermost `ite` node is replaced by a
/// fresh constant `c_ite_<n>` and the two defining implications are added as
/// hypotheses, so the result is valid iff the input is. A formula without
/// conditional terms is returned unchanged.
pub fn desugar_ite(phi: &Formula) -> Result<Formula> {
    let mut used = BTreeSet::new();
    phi.symbol_names(&mut used);
    let mut counter = 0usize;
    let mut work = phi.clone();
    let mut defs: Vec<Formula> = Vec::new();

    while let Some(node) = find_innermost_ite(&work, &defs) {
        let name = loop {
            let cand = format!("c_ite_{counter}");
            counter += 1;
            if !used.contains(&cand) {
                break cand;
            }
        };
        used.insert(name.clone());
        let fresh = Term::constant(&name);
        let cond = term_to_formula(&node.args[0])?;
        let then_branch = node.args[1].clone();
        let else_branch = node.args[2].clone();

        let subst = |t: &Term| replace_subterm(t, &node, &fresh);
        work = work.map_terms(&subst);
        for d in &mut defs {
            *d = d.map_terms(&subst);
        }
        defs.push(Formula::implies(
            cond.clone(),
            Formula::Eq(fresh.clone(), then_branch),
        ));
        defs.push(Formula::implies(
            Formula::not(cond),
            Formula::Eq(fresh, else_branch),
        ));
    }

    if defs.is_empty() {
        Ok(work)
    } else {
        Ok(Formula::implies(Formula::And(defs), work))
    }
}

fn find_innermost_ite(work: &Formula, defs: &[Formula]) -> Option<Term> {
    for t in work.terms().into_iter().chain(defs.iter().flat_map(|d| d.terms())) {
        if let Some(node) = innermost_ite_in(t) {
            return Some(node);
        }
    }
    None
}

fn innermost_ite_in(t: &Term) -> Option<Term> {
    for a in &t.args {
        if let Some(n) = innermost_ite_in(a) {
            return Some(n);
        }
    }
    if t.head == Symbol::Op(ITE.to_string()) {
        Some(t.clone())
    } else {
        None
    }
}

fn replace_subterm(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    Term {
        head: t.head.clone(),
        args: t.args.iter().map(|a| replace_subterm(a, from, to)).collect(),
    }
}

/// Replace top-level universal variables by fresh constants `sk_<var>`. The
/// body must be quantifier-free; nested or existential quantifiers are
/// rejected.
pub fn skolemize_universals(phi: &Formula, sig: &Signature) -> Result<(Formula, Signature)> {
    let mut sig = sig.clone();
    let mut body = phi.clone();
    let mut vars: Vec<String> = Vec::new();
    loop {
        match body {
            Formula::Forall(vs, inner) => {
                vars.extend(vs);
                body = *inner;
            }
            Formula::Exists(..) => {
                return Err(Error::Unsupported(
                    "existential quantifier".to_string(),
                ))
            }
            _ => break,
        }
    }
    if !body.is_quantifier_free() {
        return Err(Error::Unsupported(
            "quantifier below the top level".to_string(),
        ));
    }
    for v in vars {
        let fresh = sig.fresh_name(&format!("sk_{v}"));
        sig.add_constant(&fresh)?;
        body = body.rename_op(&v, &fresh);
    }
    Ok((body, sig))
}

/// An equation or its negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub lhs: Term,
    pub rhs: Term,
}

impl Literal {
    pub fn pos(lhs: Term, rhs: Term) -> Literal {
        Literal {
            positive: true,
            lhs,
            rhs,
        }
    }

    pub fn neg(lhs: Term, rhs: Term) -> Literal {
        Literal {
            positive: false,
            lhs,
            rhs,
        }
    }

    pub fn negated(&self) -> Literal {
        Literal {
            positive: !self.positive,
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "(= {} {})", self.lhs, self.rhs)
        } else {
            write!(f, "(not (= {} {}))", self.lhs, self.rhs)
        }
    }
}

/// Clauses (for CNF) or cubes (for DNF): the outer level is a conjunction of
/// disjunctions or a disjunction of conjunctions respectively.
pub type ClauseSet = Vec<Vec<Literal>>;

/// Default ceiling on the number of clauses produced by distribution.
pub const DEFAULT_CLAUSE_LIMIT: usize = 100_000;

enum Nnf {
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn to_nnf(phi: &Formula, negate: bool) -> Result<Nnf> {
    match phi {
        Formula::Eq(s, t) => Ok(Nnf::Lit(Literal {
            positive: !negate,
            lhs: s.clone(),
            rhs: t.clone(),
        })),
        Formula::Not(g) => to_nnf(g, !negate),
        Formula::And(fs) => {
            let parts = fs
                .iter()
                .map(|g| to_nnf(g, negate))
                .collect::<Result<Vec<_>>>()?;
            Ok(if negate { Nnf::Or(parts) } else { Nnf::And(parts) })
        }
        Formula::Or(fs) => {
            let parts = fs
                .iter()
                .map(|g| to_nnf(g, negate))
                .collect::<Result<Vec<_>>>()?;
            Ok(if negate { Nnf::And(parts) } else { Nnf::Or(parts) })
        }
        Formula::Implies(a, b) => {
            if negate {
                Ok(Nnf::And(vec![to_nnf(a, false)?, to_nnf(b, true)?]))
            } else {
                Ok(Nnf::Or(vec![to_nnf(a, true)?, to_nnf(b, false)?]))
            }
        }
        Formula::Forall(..) | Formula::Exists(..) => Err(Error::Unsupported(
            "quantified formula in clause conversion".to_string(),
        )),
    }
}

fn cross(limit: usize, sets: Vec<ClauseSet>) -> Result<ClauseSet> {
    let mut acc: ClauseSet = vec![Vec::new()];
    for s in sets {
        let needed = acc.len().saturating_mul(s.len());
        if needed > limit {
            return Err(Error::ResourceLimit(format!(
                "clause distribution exceeds {limit} clauses"
            )));
        }
        let mut next = Vec::with_capacity(needed);
        for a in &acc {
            for b in &s {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                next.push(c);
            }
        }
        acc = next;
    }
    Ok(acc)
}

fn nnf_to_cnf(n: &Nnf, limit: usize) -> Result<ClauseSet> {
    match n {
        Nnf::Lit(l) => Ok(vec![vec![l.clone()]]),
        Nnf::And(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(nnf_to_cnf(p, limit)?);
                if out.len() > limit {
                    return Err(Error::ResourceLimit(format!(
                        "clause set exceeds {limit} clauses"
                    )));
                }
            }
            Ok(out)
        }
        Nnf::Or(parts) => {
            let sets = parts
                .iter()
                .map(|p| nnf_to_cnf(p, limit))
                .collect::<Result<Vec<_>>>()?;
            cross(limit, sets)
        }
    }
}

fn nnf_to_dnf(n: &Nnf, limit: usize) -> Result<ClauseSet> {
    match n {
        Nnf::Lit(l) => Ok(vec![vec![l.clone()]]),
        Nnf::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(nnf_to_dnf(p, limit)?);
                if out.len() > limit {
                    return Err(Error::ResourceLimit(format!(
                        "cube set exceeds {limit} cubes"
                    )));
                }
            }
            Ok(out)
        }
        Nnf::And(parts) => {
            let sets = parts
                .iter()
                .map(|p| nnf_to_dnf(p, limit))
                .collect::<Result<Vec<_>>>()?;
            cross(limit, sets)
        }
    }
}

fn dedup_clauses(mut cs: ClauseSet) -> ClauseSet {
    for c in &mut cs {
        let mut seen = BTreeSet::new();
        c.retain(|l| seen.insert(l.clone()));
    }
    cs
}

/// Conjunctive normal form by distribution, without fresh symbols.
pub fn to_cnf(phi: &Formula, limit: usize) -> Result<ClauseSet> {
    let n = to_nnf(phi, false)?;
    Ok(dedup_clauses(nnf_to_cnf(&n, limit)?))
}

/// Disjunctive normal form by distribution, without fresh symbols.
pub fn to_dnf(phi: &Formula, limit: usize) -> Result<ClauseSet> {
    let n = to_nnf(phi, false)?;
    Ok(dedup_clauses(nnf_to_dnf(&n, limit)?))
}

/// Rebuild a formula from CNF clauses.
pub fn cnf_to_formula(cs: &ClauseSet) -> Formula {
    Formula::And(
        cs.iter()
            .map(|c| {
                Formula::Or(
                    c.iter()
                        .map(|l| {
                            let eq = Formula::Eq(l.lhs.clone(), l.rhs.clone());
                            if l.positive {
                                eq
                            } else {
                                Formula::not(eq)
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn t(name: &str) -> Term {
        Term::constant(name)
    }

    fn eq(a: &str, b: &str) -> Formula {
        Formula::Eq(t(a), t(b))
    }

    #[test]
    fn cnf_of_implication_is_one_clause() {
        let phi = Formula::implies(Formula::And(vec![eq("a", "b"), eq("b", "c")]), eq("a", "c"));
        let cs = to_cnf(&phi, DEFAULT_CLAUSE_LIMIT).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].len(), 3);
        assert_eq!(cs[0][0], Literal::neg(t("a"), t("b")));
        assert_eq!(cs[0][2], Literal::pos(t("a"), t("c")));
    }

    #[test]
    fn dnf_of_negated_implication() {
        let phi = Formula::not(Formula::implies(eq("a", "b"), eq("a", "c")));
        let cs = to_dnf(&phi, DEFAULT_CLAUSE_LIMIT).unwrap();
        assert_eq!(cs, vec![vec![
            Literal::pos(t("a"), t("b")),
            Literal::neg(t("a"), t("c")),
        ]]);
    }

    #[test]
    fn distribution_respects_the_clause_limit() {
        // Or of 18 two-clause conjunctions distributes to 2^18 cubes in CNF.
        let parts: Vec<Formula> = (0..18)
            .map(|i| Formula::And(vec![eq(&format!("a{i}"), "b"), eq(&format!("c{i}"), "d")]))
            .collect();
        let phi = Formula::Or(parts);
        assert!(matches!(
            to_cnf(&phi, DEFAULT_CLAUSE_LIMIT),
            Err(Error::ResourceLimit(_))
        ));
        // The DNF direction is linear for the same formula.
        assert!(to_dnf(&phi, DEFAULT_CLAUSE_LIMIT).is_ok());
    }

    #[test]
    fn desugar_single_ite() {
        // ITE(a = b, a, c) = d becomes hypotheses over a fresh constant.
        let ite = Term::op(
            ITE,
            vec![
                formula_to_term(&eq("a", "b")).unwrap(),
                t("a"),
                t("c"),
            ],
        );
        let phi = Formula::Eq(ite, t("d"));
        let out = desugar_ite(&phi).unwrap();
        let Formula::Implies(defs, core) = &out else {
            panic!("expected hypotheses, got {out}");
        };
        assert_eq!(**core, Formula::Eq(t("c_ite_0"), t("d")));
        let Formula::And(ds) = defs.as_ref() else {
            panic!("expected a conjunction of definitions");
        };
        assert_eq!(ds.len(), 2);
        assert_eq!(
            ds[0],
            Formula::implies(eq("a", "b"), Formula::Eq(t("c_ite_0"), t("a")))
        );
        assert_eq!(
            ds[1],
            Formula::implies(
                Formula::not(eq("a", "b")),
                Formula::Eq(t("c_ite_0"), t("c"))
            )
        );
        assert!(!out.contains_ite());
    }

    #[test]
    fn desugar_nested_ite_is_innermost_first() {
        let inner = Term::op(
            ITE,
            vec![formula_to_term(&eq("a", "b")).unwrap(), t("a"), t("b")],
        );
        let outer = Term::op(
            ITE,
            vec![
                formula_to_term(&eq("c", "d")).unwrap(),
                inner,
                t("c"),
            ],
        );
        let phi = Formula::Eq(outer, t("d"));
        let out = desugar_ite(&phi).unwrap();
        assert!(!out.contains_ite());
        let names: Vec<&Term> = out.terms();
        assert!(names.iter().any(|t| t.contains_op("c_ite_1")));
    }

    #[test]
    fn desugar_leaves_plain_formulas_alone() {
        let phi = Formula::implies(eq("a", "b"), eq("b", "a"));
        assert_eq!(desugar_ite(&phi).unwrap(), phi);
    }

    #[test]
    fn skolemize_renames_top_level_universals() {
        let mut syms = BTreeMap::new();
        syms.insert("a".to_string(), 0);
        let sig = Signature::new(syms, "f", vec![]).unwrap();
        let phi = Formula::Forall(
            vec!["y".to_string()],
            Box::new(Formula::Eq(Term::constant("y"), Term::constant("a"))),
        );
        let (out, sig2) = skolemize_universals(&phi, &sig).unwrap();
        assert_eq!(out, Formula::Eq(Term::constant("sk_y"), Term::constant("a")));
        assert_eq!(sig2.arity_of("sk_y"), Some(0));
    }

    #[test]
    fn skolemize_rejects_inner_quantifiers() {
        let sig = Signature::new(BTreeMap::new(), "f", vec![]).unwrap();
        let inner = Formula::Forall(
            vec!["y".to_string()],
            Box::new(Formula::Eq(Term::constant("y"), Term::constant("y"))),
        );
        let phi = Formula::not(inner.clone());
        assert!(skolemize_universals(&phi, &sig).is_err());
        let ex = Formula::Exists(vec!["y".to_string()], Box::new(inner));
        assert!(skolemize_universals(&ex, &sig).is_err());
    }

    #[test]
    fn embedded_encoding_round_trips() {
        let phi = Formula::implies(
            Formula::And(vec![eq("a", "b"), Formula::not(eq("b", "c"))]),
            Formula::Or(vec![eq("a", "c")]),
        );
        let enc = formula_to_term(&phi).unwrap();
        assert_eq!(term_to_formula(&enc).unwrap(), phi);
    }
}
