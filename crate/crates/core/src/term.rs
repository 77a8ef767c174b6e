//! First-order terms over a ranked alphabet, plus the pieces of syntax the
//! solvers manipulate directly: one-hole contexts, second-order replacements
//! for the synthesis target, and problem signatures.
//!
//! Terms are immutable trees compared structurally. The ordering on terms is
//! the one used for witnesses and enumeration everywhere in the crate: size
//! first, then head symbol, then children left to right. Bound synthesis
//! variables are a separate [`Symbol`] variant so they sort before operator
//! symbols of any name.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Head of a term node. `Param` is a bound variable of the synthesis target;
/// `Op` is any declared symbol (constants are nullary ops).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Param(String),
    Op(String),
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::Param(s) | Symbol::Op(s) => s,
        }
    }

    pub fn is_param(&self) -> bool {
        matches!(self, Symbol::Param(_))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reserved head for conditional terms. Never declarable.
pub const ITE: &str = "ite";
/// Reserved head for formulas embedded in ite conditions. Never declarable.
pub const EMBEDDED_EQ: &str = "=";
/// Head of the hole in a [`Context`]. `#` cannot appear in a parsed atom, so
/// no input term can collide with it.
pub const HOLE: &str = "#hole";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub head: Symbol,
    pub args: Vec<Term>,
}

impl Term {
    pub fn op(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term {
            head: Symbol::Op(name.into()),
            args,
        }
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::op(name, Vec::new())
    }

    pub fn param(name: impl Into<String>) -> Term {
        Term {
            head: Symbol::Param(name.into()),
            args: Vec::new(),
        }
    }

    /// Node count, the size used by witness selection and enumeration.
    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.args.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn is_ground(&self) -> bool {
        !self.head.is_param() && self.args.iter().all(Term::is_ground)
    }

    pub fn is_ite(&self) -> bool {
        self.head == Symbol::Op(ITE.to_string())
    }

    pub fn contains_ite(&self) -> bool {
        self.is_ite() || self.args.iter().any(Term::contains_ite)
    }

    pub fn contains_op(&self, name: &str) -> bool {
        match &self.head {
            Symbol::Op(n) if n == name => true,
            _ => self.args.iter().any(|a| a.contains_op(name)),
        }
    }

    pub fn count_op(&self, name: &str) -> usize {
        let here = usize::from(matches!(&self.head, Symbol::Op(n) if n == name));
        here + self.args.iter().map(|a| a.count_op(name)).sum::<usize>()
    }

    /// All distinct subterms, including the term itself.
    pub fn subterms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms(&self, out: &mut BTreeSet<Term>) {
        for a in &self.args {
            a.collect_subterms(out);
        }
        out.insert(self.clone());
    }

    /// Every symbol name occurring in the term, params included.
    pub fn symbol_names(&self, out: &mut BTreeSet<String>) {
        out.insert(self.head.name().to_string());
        for a in &self.args {
            a.symbol_names(out);
        }
    }

    /// Replace every `Param` leaf using `map`; leaves without a binding stay.
    pub fn substitute_params(&self, map: &BTreeMap<String, Term>) -> Term {
        match &self.head {
            Symbol::Param(name) => match map.get(name) {
                Some(t) => t.clone(),
                None => self.clone(),
            },
            Symbol::Op(_) => Term {
                head: self.head.clone(),
                args: self
                    .args
                    .iter()
                    .map(|a| a.substitute_params(map))
                    .collect(),
            },
        }
    }
}

/// Subterm closure of a set of terms.
pub fn subterm_closure<'a>(terms: impl IntoIterator<Item = &'a Term>) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for t in terms {
        t.collect_subterms(&mut out);
    }
    out
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.head.cmp(&other.head))
            .then_with(|| {
                for (a, b) in self.args.iter().zip(&other.args) {
                    let c = a.cmp(b);
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                self.args.len().cmp(&other.args.len())
            })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "{}", self.head);
        }
        write!(f, "({}", self.head)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A term with exactly one hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context(Term);

impl Context {
    pub fn new(skeleton: Term) -> Result<Context> {
        match skeleton.count_op(HOLE) {
            1 => Ok(Context(skeleton)),
            n => Err(Error::InvalidSupport(format!(
                "context must have exactly one hole, found {n}"
            ))),
        }
    }

    /// The trivial context whose plug is the identity.
    pub fn hole() -> Context {
        Context(Term::constant(HOLE))
    }

    pub fn is_hole(&self) -> bool {
        self.0 == Term::constant(HOLE)
    }

    pub fn plug(&self, filler: &Term) -> Term {
        fn go(t: &Term, filler: &Term) -> Term {
            if t.head == Symbol::Op(HOLE.to_string()) {
                filler.clone()
            } else {
                Term {
                    head: t.head.clone(),
                    args: t.args.iter().map(|a| go(a, filler)).collect(),
                }
            }
        }
        go(&self.0, filler)
    }

    pub fn skeleton(&self) -> &Term {
        &self.0
    }
}

/// Second-order replacement: substitutes a body for every application of the
/// synthesis target, mapping the target's bound variables to the argument
/// terms. Inner applications are rewritten first, so nested applications of
/// the target compose as expected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub target: String,
    pub params: Vec<String>,
    pub body: Term,
}

impl Replacement {
    pub fn new(target: impl Into<String>, params: Vec<String>, body: Term) -> Result<Replacement> {
        let target = target.into();
        if body.contains_op(&target) {
            return Err(Error::InvalidSupport(format!(
                "replacement body mentions the target {target}"
            )));
        }
        let mut names = BTreeSet::new();
        body.symbol_names(&mut names);
        for n in body_params(&body) {
            if !params.contains(&n) {
                return Err(Error::UnknownSymbol(n));
            }
        }
        let _ = names;
        Ok(Replacement {
            target,
            params,
            body,
        })
    }

    pub fn apply(&self, t: &Term) -> Term {
        let args: Vec<Term> = self.args_rewritten(t);
        if self.head_is_target(t) {
            let map: BTreeMap<String, Term> = self
                .params
                .iter()
                .cloned()
                .zip(args.iter().cloned())
                .collect();
            self.body.substitute_params(&map)
        } else {
            Term {
                head: t.head.clone(),
                args,
            }
        }
    }

    fn head_is_target(&self, t: &Term) -> bool {
        matches!(&t.head, Symbol::Op(n) if *n == self.target)
    }

    fn args_rewritten(&self, t: &Term) -> Vec<Term> {
        t.args.iter().map(|a| self.apply(a)).collect()
    }
}

fn body_params(t: &Term) -> Vec<String> {
    let mut out = Vec::new();
    fn go(t: &Term, out: &mut Vec<String>) {
        if let Symbol::Param(p) = &t.head {
            out.push(p.clone());
        }
        for a in &t.args {
            go(a, out);
        }
    }
    go(t, &mut out);
    out
}

/// Declared symbols of a problem: the base alphabet, the synthesis target,
/// and the target's bound variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<String, usize>,
    target: String,
    params: Vec<String>,
}

impl Signature {
    pub fn new(
        symbols: BTreeMap<String, usize>,
        target: impl Into<String>,
        params: Vec<String>,
    ) -> Result<Signature> {
        let target = target.into();
        for reserved in [ITE, EMBEDDED_EQ] {
            if symbols.contains_key(reserved) || target == reserved {
                return Err(Error::DuplicateDeclaration(reserved.to_string()));
            }
        }
        if symbols.contains_key(&target) {
            return Err(Error::DuplicateDeclaration(target));
        }
        let mut seen = BTreeSet::new();
        for p in &params {
            if !seen.insert(p.clone()) || symbols.contains_key(p) || *p == target {
                return Err(Error::DuplicateDeclaration(p.clone()));
            }
        }
        Ok(Signature {
            symbols,
            target,
            params,
        })
    }

    pub fn symbols(&self) -> &BTreeMap<String, usize> {
        &self.symbols
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn target_arity(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p == name)
    }

    pub fn add_constant(&mut self, name: impl Into<String>) -> Result<()> {
        let name = name.into();
        if self.symbols.contains_key(&name) || name == self.target || self.is_param(&name) {
            return Err(Error::DuplicateDeclaration(name));
        }
        self.symbols.insert(name, 0);
        Ok(())
    }

    /// A constant name not yet taken, built from `stem` by appending a
    /// counter only on collision.
    pub fn fresh_name(&self, stem: &str) -> String {
        if self.arity_of(stem).is_none() && !self.is_param(stem) && stem != self.target {
            return stem.to_string();
        }
        let mut n = 0usize;
        loop {
            let cand = format!("{stem}_{n}");
            if self.arity_of(&cand).is_none() && !self.is_param(&cand) && cand != self.target {
                return cand;
            }
            n += 1;
        }
    }

    /// Ranked alphabet of the base symbols.
    pub fn alphabet(&self) -> BTreeMap<Symbol, usize> {
        self.symbols
            .iter()
            .map(|(n, a)| (Symbol::Op(n.clone()), *a))
            .collect()
    }

    /// Ranked alphabet of the base symbols plus the bound variables, the
    /// alphabet candidate bodies live over.
    pub fn alphabet_with_params(&self) -> BTreeMap<Symbol, usize> {
        let mut a = self.alphabet();
        for p in &self.params {
            a.insert(Symbol::Param(p.clone()), 0);
        }
        a
    }

    /// Check arities and symbol visibility throughout a term. `allow_target`
    /// admits applications of the synthesis target; ite nodes are admitted
    /// only when `allow_ite` is set, with their condition checked as an
    /// embedded formula.
    pub fn check_term(&self, t: &Term, allow_target: bool, allow_ite: bool) -> Result<()> {
        match &t.head {
            Symbol::Param(p) => {
                if !self.is_param(p) {
                    return Err(Error::UnknownSymbol(p.clone()));
                }
                if !t.args.is_empty() {
                    return Err(Error::ArityMismatch {
                        symbol: p.clone(),
                        expected: 0,
                        found: t.args.len(),
                    });
                }
                Ok(())
            }
            Symbol::Op(name) if name == ITE => {
                if !allow_ite {
                    return Err(Error::Unsupported("ite not allowed here".to_string()));
                }
                if t.args.len() != 3 {
                    return Err(Error::ArityMismatch {
                        symbol: ITE.to_string(),
                        expected: 3,
                        found: t.args.len(),
                    });
                }
                self.check_embedded_formula(&t.args[0], allow_target, allow_ite)?;
                self.check_term(&t.args[1], allow_target, allow_ite)?;
                self.check_term(&t.args[2], allow_target, allow_ite)
            }
            Symbol::Op(name) => {
                let expected = if name == &self.target {
                    if !allow_target {
                        return Err(Error::UnknownSymbol(name.clone()));
                    }
                    self.target_arity()
                } else {
                    self.arity_of(name)
                        .ok_or_else(|| Error::UnknownSymbol(name.clone()))?
                };
                if t.args.len() != expected {
                    return Err(Error::ArityMismatch {
                        symbol: name.clone(),
                        expected,
                        found: t.args.len(),
                    });
                }
                for a in &t.args {
                    self.check_term(a, allow_target, allow_ite)?;
                }
                Ok(())
            }
        }
    }

    fn check_embedded_formula(&self, t: &Term, allow_target: bool, allow_ite: bool) -> Result<()> {
        match &t.head {
            Symbol::Op(name) if name == EMBEDDED_EQ => {
                if t.args.len() != 2 {
                    return Err(Error::ArityMismatch {
                        symbol: EMBEDDED_EQ.to_string(),
                        expected: 2,
                        found: t.args.len(),
                    });
                }
                self.check_term(&t.args[0], allow_target, allow_ite)?;
                self.check_term(&t.args[1], allow_target, allow_ite)
            }
            Symbol::Op(name) if name == "not" && t.args.len() == 1 => {
                self.check_embedded_formula(&t.args[0], allow_target, allow_ite)
            }
            Symbol::Op(name) if (name == "and" || name == "or") && !t.args.is_empty() => {
                for a in &t.args {
                    self.check_embedded_formula(a, allow_target, allow_ite)?;
                }
                Ok(())
            }
            Symbol::Op(name) if name == "=>" && t.args.len() == 2 => {
                self.check_embedded_formula(&t.args[0], allow_target, allow_ite)?;
                self.check_embedded_formula(&t.args[1], allow_target, allow_ite)
            }
            _ => Err(Error::Unsupported(format!(
                "ite condition must be a formula, found {t}"
            ))),
        }
    }
}
