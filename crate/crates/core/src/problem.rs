//! A synthesis problem: a declared signature, one synthesis target with a
//! regular tree grammar of candidate bodies, and a constraint to make valid.

use std::fmt;

use crate::automata::{TreeAutomaton, TreeGrammar};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::term::{Signature, Symbol, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    Euf,
    Fd,
    Bv,
}

impl Theory {
    pub fn name(self) -> &'static str {
        match self {
            Theory::Euf => "EUF",
            Theory::Fd => "FD",
            Theory::Bv => "BV",
        }
    }

    pub fn from_name(s: &str) -> Result<Theory> {
        match s {
            "EUF" => Ok(Theory::Euf),
            "FD" => Ok(Theory::Fd),
            "BV" => Ok(Theory::Bv),
            _ => Err(Error::Unsupported(format!("logic {s}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SygusProblem {
    pub theory: Theory,
    pub signature: Signature,
    pub grammar: TreeGrammar,
    pub constraint: Formula,
}

impl SygusProblem {
    pub fn new(
        theory: Theory,
        signature: Signature,
        grammar: TreeGrammar,
        constraint: Formula,
    ) -> Result<SygusProblem> {
        for nt in grammar.nonterminals() {
            if signature.arity_of(nt).is_some()
                || signature.is_param(nt)
                || nt == signature.target()
            {
                return Err(Error::DuplicateDeclaration(nt.clone()));
            }
        }
        grammar.validate_against(&signature)?;
        check_formula(&signature, &constraint, &mut Vec::new())?;
        Ok(SygusProblem {
            theory,
            signature,
            grammar,
            constraint,
        })
    }

    /// Check a candidate body: over the base alphabet and the target's bound
    /// variables, without the target itself.
    pub fn check_candidate(&self, body: &Term) -> Result<()> {
        self.signature.check_term(body, false, true)
    }

    /// The constraint with every target application replaced by the body.
    pub fn plug(&self, body: &Term) -> Result<Formula> {
        let w = crate::term::Replacement::new(
            self.signature.target(),
            self.signature.params().to_vec(),
            body.clone(),
        )?;
        Ok(self.constraint.map_terms(&|t| w.apply(t)))
    }
}

fn check_formula(sig: &Signature, phi: &Formula, bound: &mut Vec<String>) -> Result<()> {
    match phi {
        Formula::Eq(s, t) => {
            check_term_with_bound(sig, s, bound)?;
            check_term_with_bound(sig, t, bound)
        }
        Formula::Not(f) => check_formula(sig, f, bound),
        Formula::And(fs) | Formula::Or(fs) => {
            fs.iter().try_for_each(|f| check_formula(sig, f, bound))
        }
        Formula::Implies(a, b) => {
            check_formula(sig, a, bound)?;
            check_formula(sig, b, bound)
        }
        Formula::Forall(vs, f) | Formula::Exists(vs, f) => {
            for v in vs {
                if sig.arity_of(v).is_some() || v == sig.target() || bound.contains(v) {
                    return Err(Error::DuplicateDeclaration(v.clone()));
                }
                bound.push(v.clone());
            }
            let r = check_formula(sig, f, bound);
            for _ in vs {
                bound.pop();
            }
            r
        }
    }
}

fn check_term_with_bound(sig: &Signature, t: &Term, bound: &[String]) -> Result<()> {
    if bound.is_empty() {
        return sig.check_term(t, true, true);
    }
    // Bound variables act as extra constants inside the quantifier body.
    let mut extended = sig.clone();
    for v in bound {
        extended.add_constant(v.clone())?;
    }
    extended.check_term(t, true, true)
}

/// Outcome of solving a problem.
#[derive(Debug, Clone)]
pub enum Verdict {
    Solvable {
        witness: Term,
        /// For the automata-based engine, the full solution language.
        solutions: Option<TreeAutomaton>,
    },
    Unsolvable,
    Unknown {
        bound: usize,
    },
}

impl Verdict {
    pub fn solvable(witness: Term, solutions: Option<TreeAutomaton>) -> Verdict {
        Verdict::Solvable { witness, solutions }
    }

    pub fn is_solvable(&self) -> bool {
        matches!(self, Verdict::Solvable { .. })
    }

    pub fn witness(&self) -> Option<&Term> {
        match self {
            Verdict::Solvable { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Solvable { witness, .. } => write!(f, "solvable {witness}"),
            Verdict::Unsolvable => write!(f, "unsolvable"),
            Verdict::Unknown { bound } => write!(f, "unknown up to size {bound}"),
        }
    }
}

/// Resolve an atom inside a candidate or production: parameters of the
/// target parse as bound variables, everything else as an operator.
pub fn resolve_atom(sig: &Signature, name: &str) -> Symbol {
    if sig.is_param(name) {
        Symbol::Param(name.to_string())
    } else {
        Symbol::Op(name.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn simple_problem() -> SygusProblem {
        let mut syms = BTreeMap::new();
        syms.insert("g".to_string(), 1);
        syms.insert("a".to_string(), 0);
        let sig = Signature::new(syms, "f", vec!["x1".to_string()]).unwrap();
        let grammar = TreeGrammar::new(vec![(
            "S".to_string(),
            vec![
                Term::constant("a"),
                Term::param("x1"),
                Term::op("g", vec![Term::constant("S")]),
            ],
        )])
        .unwrap();
        let constraint = Formula::Eq(
            Term::op("f", vec![Term::constant("a")]),
            Term::op("g", vec![Term::constant("a")]),
        );
        SygusProblem::new(Theory::Euf, sig, grammar, constraint).unwrap()
    }

    #[test]
    fn plug_substitutes_the_target() {
        let p = simple_problem();
        let body = Term::op("g", vec![Term::param("x1")]);
        let plugged = p.plug(&body).unwrap();
        assert_eq!(
            plugged,
            Formula::Eq(
                Term::op("g", vec![Term::constant("a")]),
                Term::op("g", vec![Term::constant("a")]),
            )
        );
    }

    #[test]
    fn constraint_validation_catches_unknowns() {
        let mut syms = BTreeMap::new();
        syms.insert("a".to_string(), 0);
        let sig = Signature::new(syms, "f", vec![]).unwrap();
        let grammar =
            TreeGrammar::new(vec![("S".to_string(), vec![Term::constant("a")])]).unwrap();
        let bad = Formula::Eq(Term::constant("zz"), Term::constant("a"));
        assert!(SygusProblem::new(Theory::Euf, sig.clone(), grammar.clone(), bad).is_err());
        let quantified = Formula::Forall(
            vec!["y".to_string()],
            Box::new(Formula::Eq(Term::constant("y"), Term::constant("a"))),
        );
        assert!(SygusProblem::new(Theory::Euf, sig, grammar, quantified).is_ok());
    }

    #[test]
    fn candidate_check_rejects_target_and_unknowns() {
        let p = simple_problem();
        assert!(p.check_candidate(&Term::param("x1")).is_ok());
        assert!(p
            .check_candidate(&Term::op("g", vec![Term::constant("a")]))
            .is_ok());
        assert!(p.check_candidate(&Term::op("f", vec![Term::constant("a")])).is_err());
        assert!(p.check_candidate(&Term::constant("b")).is_err());
    }
}
