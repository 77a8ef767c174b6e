//! Bottom-up deterministic tree automata and regular tree grammars.
//!
//! Automata are deterministic but possibly incomplete: a missing transition
//! means the run is undefined and the term is rejected. Grammars are compiled
//! to automata by a subset construction, so every language in the crate lives
//! in one representation and the solvers can intersect freely.
//!
//! Witness extraction, state representatives and enumeration all use the
//! global term order (size, then head, then children), which composes under
//! substitution because size dominates.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::term::{Signature, Symbol, Term};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAutomaton {
    alphabet: BTreeMap<Symbol, usize>,
    num_states: usize,
    transitions: BTreeMap<(Symbol, Vec<StateId>), StateId>,
    accepting: BTreeSet<StateId>,
}

impl TreeAutomaton {
    pub fn new(
        alphabet: BTreeMap<Symbol, usize>,
        num_states: usize,
        transitions: BTreeMap<(Symbol, Vec<StateId>), StateId>,
        accepting: BTreeSet<StateId>,
    ) -> Result<TreeAutomaton> {
        for ((sym, kids), target) in &transitions {
            let arity = *alphabet
                .get(sym)
                .ok_or_else(|| Error::UnknownSymbol(sym.name().to_string()))?;
            if kids.len() != arity {
                return Err(Error::ArityMismatch {
                    symbol: sym.name().to_string(),
                    expected: arity,
                    found: kids.len(),
                });
            }
            if kids.iter().any(|q| *q >= num_states) || *target >= num_states {
                return Err(Error::InvalidSupport(format!(
                    "transition on {sym} mentions a state out of range"
                )));
            }
        }
        if accepting.iter().any(|q| *q >= num_states) {
            return Err(Error::InvalidSupport(
                "accepting state out of range".to_string(),
            ));
        }
        Ok(TreeAutomaton {
            alphabet,
            num_states,
            transitions,
            accepting,
        })
    }

    /// Accepts every term over the alphabet.
    pub fn universal(alphabet: BTreeMap<Symbol, usize>) -> TreeAutomaton {
        let transitions = alphabet
            .iter()
            .map(|(sym, arity)| ((sym.clone(), vec![0; *arity]), 0))
            .collect();
        TreeAutomaton {
            alphabet,
            num_states: 1,
            transitions,
            accepting: BTreeSet::from([0]),
        }
    }

    /// Accepts nothing.
    pub fn empty(alphabet: BTreeMap<Symbol, usize>) -> TreeAutomaton {
        let mut a = TreeAutomaton::universal(alphabet);
        a.accepting.clear();
        a
    }

    pub fn alphabet(&self) -> &BTreeMap<Symbol, usize> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn transitions(&self) -> &BTreeMap<(Symbol, Vec<StateId>), StateId> {
        &self.transitions
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.contains(&q)
    }

    /// The unique run on `t`, or `None` when a transition is missing.
    pub fn run(&self, t: &Term) -> Option<StateId> {
        let mut kids = Vec::with_capacity(t.args.len());
        for a in &t.args {
            kids.push(self.run(a)?);
        }
        self.transitions.get(&(t.head.clone(), kids)).copied()
    }

    pub fn accepts(&self, t: &Term) -> bool {
        matches!(self.run(t), Some(q) if self.accepting.contains(&q))
    }

    fn reachable(&self) -> BTreeSet<StateId> {
        let mut reach = BTreeSet::new();
        loop {
            let mut changed = false;
            for ((_, kids), target) in &self.transitions {
                if !reach.contains(target) && kids.iter().all(|q| reach.contains(q)) {
                    reach.insert(*target);
                    changed = true;
                }
            }
            if !changed {
                return reach;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        let reach = self.reachable();
        self.accepting.iter().all(|q| !reach.contains(q))
    }

    /// Restrict to states that are both reachable and productive, renumbering
    /// compactly. Fails when the language is empty.
    pub fn trim(&self) -> Result<TreeAutomaton> {
        let reach = self.reachable();
        let mut useful: BTreeSet<StateId> = self
            .accepting
            .iter()
            .filter(|q| reach.contains(q))
            .copied()
            .collect();
        if useful.is_empty() {
            return Err(Error::EmptyLanguage);
        }
        loop {
            let mut changed = false;
            for ((_, kids), target) in &self.transitions {
                if useful.contains(target) && kids.iter().all(|q| reach.contains(q)) {
                    for q in kids {
                        if useful.insert(*q) {
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let keep: Vec<StateId> = useful.intersection(&reach).copied().collect();
        let index: BTreeMap<StateId, StateId> =
            keep.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let transitions = self
            .transitions
            .iter()
            .filter(|((_, kids), target)| {
                index.contains_key(target) && kids.iter().all(|q| index.contains_key(q))
            })
            .map(|((sym, kids), target)| {
                (
                    (sym.clone(), kids.iter().map(|q| index[q]).collect()),
                    index[target],
                )
            })
            .collect();
        let accepting = self
            .accepting
            .iter()
            .filter_map(|q| index.get(q).copied())
            .collect();
        Ok(TreeAutomaton {
            alphabet: self.alphabet.clone(),
            num_states: keep.len(),
            transitions,
            accepting,
        })
    }

    /// The minimal term reaching each reachable state.
    pub fn representatives(&self) -> BTreeMap<StateId, Term> {
        let mut best: BTreeMap<StateId, Term> = BTreeMap::new();
        loop {
            // Settle states in increasing term order: the smallest candidate
            // buildable from settled states is final for its target.
            let mut round_best: Option<(Term, StateId)> = None;
            for ((sym, kids), target) in &self.transitions {
                if best.contains_key(target) {
                    continue;
                }
                let args: Option<Vec<Term>> = kids.iter().map(|q| best.get(q).cloned()).collect();
                let Some(args) = args else { continue };
                let cand = Term {
                    head: sym.clone(),
                    args,
                };
                match &round_best {
                    Some((t, _)) if *t <= cand => {}
                    _ => round_best = Some((cand, *target)),
                }
            }
            match round_best {
                Some((t, q)) => {
                    best.insert(q, t);
                }
                None => return best,
            }
        }
    }

    /// The minimal accepted term, if any.
    pub fn witness(&self) -> Option<Term> {
        let reps = self.representatives();
        self.accepting
            .iter()
            .filter_map(|q| reps.get(q))
            .min()
            .cloned()
    }

    /// Accepted terms in term order, up to `max_size` nodes and at most
    /// `limit` results.
    pub fn enumerate_language(&self, max_size: usize, limit: usize) -> Vec<Term> {
        // by_size[s - 1] holds the terms of size s, keyed by reached state.
        let mut by_size: Vec<BTreeMap<StateId, BTreeSet<Term>>> = Vec::new();
        let mut out = Vec::new();
        for size in 1..=max_size {
            let mut layer: BTreeMap<StateId, BTreeSet<Term>> = BTreeMap::new();
            for (sym, arity) in &self.alphabet {
                if *arity == 0 {
                    if size == 1 {
                        if let Some(q) = self.transitions.get(&(sym.clone(), Vec::new())) {
                            layer.entry(*q).or_default().insert(Term {
                                head: sym.clone(),
                                args: Vec::new(),
                            });
                        }
                    }
                    continue;
                }
                if size < arity + 1 {
                    continue;
                }
                for split in compositions(size - 1, *arity) {
                    let pools: Vec<&BTreeMap<StateId, BTreeSet<Term>>> =
                        split.iter().map(|s| &by_size[*s - 1]).collect();
                    let choices: Vec<Vec<(StateId, &Term)>> = pools
                        .iter()
                        .map(|m| {
                            m.iter()
                                .flat_map(|(q, ts)| ts.iter().map(move |t| (*q, t)))
                                .collect()
                        })
                        .collect();
                    if choices.iter().any(Vec::is_empty) {
                        continue;
                    }
                    for combo in choices.into_iter().multi_cartesian_product() {
                        let kids: Vec<StateId> = combo.iter().map(|(q, _)| *q).collect();
                        if let Some(q) = self.transitions.get(&(sym.clone(), kids)) {
                            layer.entry(*q).or_default().insert(Term {
                                head: sym.clone(),
                                args: combo.into_iter().map(|(_, t)| t.clone()).collect(),
                            });
                        }
                    }
                }
            }
            let mut accepted: Vec<Term> = layer
                .iter()
                .filter(|(q, _)| self.accepting.contains(q))
                .flat_map(|(_, ts)| ts.iter().cloned())
                .collect();
            accepted.sort();
            for t in accepted {
                if out.len() >= limit {
                    return out;
                }
                out.push(t);
            }
            by_size.push(layer);
        }
        out
    }

    /// Compare languages on every term of depth at most `depth`.
    pub fn language_equal_up_to(&self, other: &TreeAutomaton, depth: usize) -> Result<bool> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        for t in terms_up_to_depth(&self.alphabet, depth, 1_000_000)? {
            if self.accepts(&t) != other.accepts(&t) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Relabel reachable states in the order of their minimal reaching terms
    /// and drop everything else. Reachable deterministic automata with equal
    /// canonical forms are isomorphic.
    pub fn canonical_form(&self) -> TreeAutomaton {
        let reps = self.representatives();
        let mut order: Vec<(Term, StateId)> =
            reps.iter().map(|(q, t)| (t.clone(), *q)).collect();
        order.sort();
        let index: BTreeMap<StateId, StateId> = order
            .iter()
            .enumerate()
            .map(|(i, (_, q))| (*q, i))
            .collect();
        let transitions = self
            .transitions
            .iter()
            .filter(|((_, kids), target)| {
                index.contains_key(target) && kids.iter().all(|q| index.contains_key(q))
            })
            .map(|((sym, kids), target)| {
                (
                    (sym.clone(), kids.iter().map(|q| index[q]).collect()),
                    index[target],
                )
            })
            .collect();
        let accepting = self
            .accepting
            .iter()
            .filter_map(|q| index.get(q).copied())
            .collect();
        TreeAutomaton {
            alphabet: self.alphabet.clone(),
            num_states: index.len(),
            transitions,
            accepting,
        }
    }

    /// Identify two states and cascade: whenever the identification makes two
    /// transitions share a left-hand side, their targets are identified as
    /// well, keeping the target already in the table. Accepting status is
    /// inherited from either member.
    pub fn merged(&self, keep: StateId, gone: StateId) -> TreeAutomaton {
        let mut parent: Vec<StateId> = (0..self.num_states).collect();
        fn find(parent: &mut Vec<StateId>, mut q: StateId) -> StateId {
            while parent[q] != q {
                parent[q] = parent[parent[q]];
                q = parent[q];
            }
            q
        }
        let mut pending = VecDeque::from([(keep, gone)]);
        loop {
            while let Some((a, b)) = pending.pop_front() {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                if ra != rb {
                    parent[rb] = ra;
                }
            }
            let mut table: BTreeMap<(Symbol, Vec<StateId>), StateId> = BTreeMap::new();
            for ((sym, kids), target) in &self.transitions {
                let key = (
                    sym.clone(),
                    kids.iter().map(|q| find(&mut parent, *q)).collect(),
                );
                let t = find(&mut parent, *target);
                match table.get(&key) {
                    Some(existing) if *existing != t => pending.push_back((*existing, t)),
                    _ => {
                        table.insert(key, t);
                    }
                }
            }
            if pending.is_empty() {
                let roots: Vec<StateId> = (0..self.num_states)
                    .filter(|q| parent[*q] == *q)
                    .collect();
                let index: BTreeMap<StateId, StateId> =
                    roots.iter().enumerate().map(|(i, q)| (*q, i)).collect();
                let transitions = table
                    .into_iter()
                    .map(|((sym, kids), target)| {
                        (
                            (sym, kids.iter().map(|q| index[q]).collect()),
                            index[&target],
                        )
                    })
                    .collect();
                let accepting = (0..self.num_states)
                    .filter(|q| self.accepting.contains(q))
                    .map(|q| index[&find(&mut parent, q)])
                    .collect();
                return TreeAutomaton {
                    alphabet: self.alphabet.clone(),
                    num_states: roots.len(),
                    transitions,
                    accepting,
                };
            }
        }
    }

    /// Quotient by a precomputed partition. Fails if the partition is not a
    /// congruence for the transition table.
    pub fn quotient(&self, class_of: &[StateId], num_classes: usize) -> Result<TreeAutomaton> {
        if class_of.len() != self.num_states {
            return Err(Error::InvalidSupport(
                "partition size does not match state count".to_string(),
            ));
        }
        let mut transitions: BTreeMap<(Symbol, Vec<StateId>), StateId> = BTreeMap::new();
        for ((sym, kids), target) in &self.transitions {
            let key = (sym.clone(), kids.iter().map(|q| class_of[*q]).collect());
            let t = class_of[*target];
            if let Some(existing) = transitions.insert(key, t) {
                if existing != t {
                    return Err(Error::InvalidSupport(
                        "partition is not a congruence for the transitions".to_string(),
                    ));
                }
            }
        }
        let accepting = self.accepting.iter().map(|q| class_of[*q]).collect();
        TreeAutomaton::new(self.alphabet.clone(), num_classes, transitions, accepting)
    }

    /// Shrink to a smaller alphabet, dropping transitions on removed symbols.
    pub fn restrict_alphabet(
        &self,
        alphabet: &BTreeMap<Symbol, usize>,
    ) -> Result<TreeAutomaton> {
        for (sym, arity) in alphabet {
            if self.alphabet.get(sym) != Some(arity) {
                return Err(Error::AlphabetMismatch);
            }
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|((sym, _), _)| alphabet.contains_key(sym))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        TreeAutomaton::new(
            alphabet.clone(),
            self.num_states,
            transitions,
            self.accepting.clone(),
        )
    }

    pub fn with_accepting(&self, accepting: BTreeSet<StateId>) -> Result<TreeAutomaton> {
        TreeAutomaton::new(
            self.alphabet.clone(),
            self.num_states,
            self.transitions.clone(),
            accepting,
        )
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{");
        let _ = writeln!(s, "  rankdir=BT;");
        for q in 0..self.num_states {
            let shape = if self.accepting.contains(&q) {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(s, "  q{q} [shape={shape}];");
        }
        for (i, ((sym, kids), target)) in self.transitions.iter().enumerate() {
            if kids.is_empty() {
                let _ = writeln!(s, "  t{i} [shape=point,label=\"\"];");
                let _ = writeln!(s, "  t{i} -> q{target} [label=\"{sym}\"];");
            } else if kids.len() == 1 {
                let _ = writeln!(s, "  q{} -> q{target} [label=\"{sym}\"];", kids[0]);
            } else {
                let _ = writeln!(s, "  t{i} [shape=point,label=\"\"];");
                for (pos, k) in kids.iter().enumerate() {
                    let _ = writeln!(s, "  q{k} -> t{i} [label=\"{pos}\",style=dashed];");
                }
                let _ = writeln!(s, "  t{i} -> q{target} [label=\"{sym}\"];");
            }
        }
        let _ = writeln!(s, "}}");
        s
    }
}

/// Positive integer compositions of `total` into `parts` summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if total < parts {
        return Vec::new();
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every term over the alphabet of depth at most `depth`, with a hard cap on
/// how many are materialised.
pub fn terms_up_to_depth(
    alphabet: &BTreeMap<Symbol, usize>,
    depth: usize,
    cap: usize,
) -> Result<Vec<Term>> {
    let mut terms: BTreeSet<Term> = BTreeSet::new();
    for _ in 0..depth {
        let prev: Vec<Term> = terms.iter().cloned().collect();
        let mut next = terms.clone();
        for (sym, arity) in alphabet {
            if *arity == 0 {
                next.insert(Term {
                    head: sym.clone(),
                    args: Vec::new(),
                });
                continue;
            }
            if prev.is_empty() {
                continue;
            }
            for combo in (0..*arity).map(|_| prev.iter()).multi_cartesian_product() {
                next.insert(Term {
                    head: sym.clone(),
                    args: combo.into_iter().cloned().collect(),
                });
                if next.len() > cap {
                    return Err(Error::ResourceLimit(format!(
                        "more than {cap} terms within depth {depth}"
                    )));
                }
            }
        }
        if next.len() == terms.len() {
            break;
        }
        terms = next;
    }
    Ok(terms.into_iter().collect())
}

enum ProductMode {
    Intersect,
    Union,
}

fn product(
    a: &TreeAutomaton,
    b: &TreeAutomaton,
    mode: ProductMode,
) -> Result<TreeAutomaton> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    type Pair = (Option<StateId>, Option<StateId>);
    let mut states: Vec<Pair> = Vec::new();
    let mut index: BTreeMap<Pair, StateId> = BTreeMap::new();
    let mut transitions: BTreeMap<(Symbol, Vec<StateId>), StateId> = BTreeMap::new();
    loop {
        let mut changed = false;
        for (sym, arity) in &a.alphabet {
            let tuples: Vec<Vec<StateId>> = if *arity == 0 {
                vec![Vec::new()]
            } else {
                (0..*arity)
                    .map(|_| 0..states.len())
                    .multi_cartesian_product()
                    .collect()
            };
            for tuple in tuples {
                let key = (sym.clone(), tuple.clone());
                if transitions.contains_key(&key) {
                    continue;
                }
                let left: Option<StateId> = tuple
                    .iter()
                    .map(|i| states[*i].0)
                    .collect::<Option<Vec<_>>>()
                    .and_then(|kids| a.transitions.get(&(sym.clone(), kids)).copied());
                let right: Option<StateId> = tuple
                    .iter()
                    .map(|i| states[*i].1)
                    .collect::<Option<Vec<_>>>()
                    .and_then(|kids| b.transitions.get(&(sym.clone(), kids)).copied());
                let keep = match mode {
                    ProductMode::Intersect => left.is_some() && right.is_some(),
                    ProductMode::Union => left.is_some() || right.is_some(),
                };
                if !keep {
                    continue;
                }
                let pair = (left, right);
                let id = match index.get(&pair) {
                    Some(id) => *id,
                    None => {
                        let id = states.len();
                        states.push(pair);
                        index.insert(pair, id);
                        id
                    }
                };
                transitions.insert(key, id);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let accepting = states
        .iter()
        .enumerate()
        .filter(|(_, (l, r))| {
            let la = matches!(l, Some(q) if a.accepting.contains(q));
            let ra = matches!(r, Some(q) if b.accepting.contains(q));
            match mode {
                ProductMode::Intersect => la && ra,
                ProductMode::Union => la || ra,
            }
        })
        .map(|(i, _)| i)
        .collect();
    Ok(TreeAutomaton {
        alphabet: a.alphabet.clone(),
        num_states: states.len(),
        transitions,
        accepting,
    })
}

/// Reachable-pairs intersection.
pub fn intersect(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton> {
    product(a, b, ProductMode::Intersect)
}

/// Reachable-pairs union; missing transitions act as an implicit sink.
pub fn union(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton> {
    product(a, b, ProductMode::Union)
}

/// Intersect many automata, smallest first to keep intermediate products
/// small.
pub fn intersect_all(mut auts: Vec<TreeAutomaton>) -> Result<TreeAutomaton> {
    let Some(first) = auts.pop() else {
        return Err(Error::InvalidSupport(
            "intersection of zero automata".to_string(),
        ));
    };
    auts.push(first);
    auts.sort_by_key(TreeAutomaton::num_states);
    let mut iter = auts.into_iter();
    let mut acc = iter.next().unwrap();
    for next in iter {
        acc = intersect(&acc, &next)?;
    }
    Ok(acc)
}

/// Union of many automata over a shared alphabet.
pub fn union_all(alphabet: &BTreeMap<Symbol, usize>, auts: Vec<TreeAutomaton>) -> Result<TreeAutomaton> {
    let mut acc = TreeAutomaton::empty(alphabet.clone());
    for next in auts {
        acc = union(&acc, &next)?;
    }
    Ok(acc)
}

/// A regular tree grammar: named nonterminals with ordered production rules.
/// Rule bodies are terms whose nullary `Op` leaves may name nonterminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeGrammar {
    start: String,
    nonterminals: Vec<String>,
    rules: BTreeMap<String, Vec<Term>>,
}

impl TreeGrammar {
    /// Build from `(nonterminal, productions)` pairs in declaration order;
    /// the first nonterminal is the start. Productions that are a bare
    /// nonterminal are rejected, as are nonterminals applied to arguments.
    pub fn new(blocks: Vec<(String, Vec<Term>)>) -> Result<TreeGrammar> {
        if blocks.is_empty() {
            return Err(Error::InvalidSupport("grammar with no nonterminals".to_string()));
        }
        let mut nonterminals = Vec::new();
        let mut rules: BTreeMap<String, Vec<Term>> = BTreeMap::new();
        for (name, _) in &blocks {
            if rules.contains_key(name) {
                return Err(Error::DuplicateDeclaration(name.clone()));
            }
            nonterminals.push(name.clone());
            rules.insert(name.clone(), Vec::new());
        }
        let start = nonterminals[0].clone();
        let nts: BTreeSet<&String> = nonterminals.iter().collect();
        for (name, prods) in blocks {
            if prods.is_empty() {
                return Err(Error::InvalidSupport(format!(
                    "nonterminal {name} has no productions"
                )));
            }
            for p in &prods {
                if let Symbol::Op(h) = &p.head {
                    if nts.contains(h) {
                        return Err(Error::Unsupported(format!(
                            "production {name} -> {p} is a bare nonterminal"
                        )));
                    }
                }
                check_nt_occurrences(p, &nts)?;
            }
            rules.insert(name, prods);
        }
        Ok(TreeGrammar {
            start,
            nonterminals,
            rules,
        })
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn rules(&self, nt: &str) -> &[Term] {
        self.rules.get(nt).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_nonterminal(&self, name: &str) -> bool {
        self.rules.contains_key(name)
    }

    /// Every non-nonterminal symbol must be declared with matching arity;
    /// the synthesis target may not occur.
    pub fn validate_against(&self, sig: &Signature) -> Result<()> {
        for nt in &self.nonterminals {
            for p in &self.rules[nt] {
                self.check_rule_term(p, sig)?;
            }
        }
        Ok(())
    }

    fn check_rule_term(&self, t: &Term, sig: &Signature) -> Result<()> {
        match &t.head {
            Symbol::Op(name) if self.is_nonterminal(name) => Ok(()),
            Symbol::Op(name) if name == sig.target() => {
                Err(Error::Unsupported(format!(
                    "grammar mentions the synthesis target {name}"
                )))
            }
            Symbol::Op(name) if name == crate::term::ITE => {
                if t.args.len() != 3 {
                    return Err(Error::ArityMismatch {
                        symbol: crate::term::ITE.to_string(),
                        expected: 3,
                        found: t.args.len(),
                    });
                }
                self.check_rule_condition(&t.args[0], sig)?;
                self.check_rule_term(&t.args[1], sig)?;
                self.check_rule_term(&t.args[2], sig)
            }
            Symbol::Param(p) => {
                if sig.is_param(p) {
                    Ok(())
                } else {
                    Err(Error::UnknownSymbol(p.clone()))
                }
            }
            Symbol::Op(name) => {
                let arity = sig
                    .arity_of(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                if t.args.len() != arity {
                    return Err(Error::ArityMismatch {
                        symbol: name.clone(),
                        expected: arity,
                        found: t.args.len(),
                    });
                }
                for a in &t.args {
                    self.check_rule_term(a, sig)?;
                }
                Ok(())
            }
        }
    }

    fn check_rule_condition(&self, t: &Term, sig: &Signature) -> Result<()> {
        match &t.head {
            Symbol::Op(name) if name == crate::term::EMBEDDED_EQ && t.args.len() == 2 => {
                self.check_rule_term(&t.args[0], sig)?;
                self.check_rule_term(&t.args[1], sig)
            }
            Symbol::Op(name) if name == "not" && t.args.len() == 1 => {
                self.check_rule_condition(&t.args[0], sig)
            }
            Symbol::Op(name) if (name == "and" || name == "or") && !t.args.is_empty() => {
                t.args
                    .iter()
                    .try_for_each(|a| self.check_rule_condition(a, sig))
            }
            Symbol::Op(name) if name == "=>" && t.args.len() == 2 => {
                self.check_rule_condition(&t.args[0], sig)?;
                self.check_rule_condition(&t.args[1], sig)
            }
            _ => Err(Error::Unsupported(format!(
                "ite condition in a production must be a formula, found {t}"
            ))),
        }
    }

    /// True if the grammar can derive `t` from the start nonterminal.
    pub fn derives(&self, t: &Term) -> bool {
        self.derives_from(&self.start, t)
    }

    fn derives_from(&self, nt: &str, t: &Term) -> bool {
        self.rules(nt)
            .iter()
            .any(|body| self.matches(body, t))
    }

    fn matches(&self, body: &Term, t: &Term) -> bool {
        if let Symbol::Op(name) = &body.head {
            if self.is_nonterminal(name) {
                return self.derives_from(name, t);
            }
        }
        body.head == t.head
            && body.args.len() == t.args.len()
            && body.args.iter().zip(&t.args).all(|(b, a)| self.matches(b, a))
    }

    /// Derivable terms from the start nonterminal in term order, up to
    /// `max_size` nodes and at most `limit` results. Unlike going through an
    /// automaton, this handles productions with conditional terms.
    pub fn enumerate(&self, max_size: usize, limit: usize) -> Vec<Term> {
        // dp[nt][s - 1] holds the terms of size s derivable from nt.
        let mut dp: BTreeMap<&str, Vec<BTreeSet<Term>>> = self
            .nonterminals
            .iter()
            .map(|nt| (nt.as_str(), Vec::new()))
            .collect();
        let mut out = Vec::new();
        for size in 1..=max_size {
            let mut layers: BTreeMap<&str, BTreeSet<Term>> = BTreeMap::new();
            for nt in &self.nonterminals {
                let mut layer = BTreeSet::new();
                for body in &self.rules[nt] {
                    let slots = nt_leaves(body, self);
                    let skeleton = body.size() - slots.len();
                    if slots.is_empty() {
                        if body.size() == size {
                            layer.insert(body.clone());
                        }
                        continue;
                    }
                    if size < skeleton + slots.len() {
                        continue;
                    }
                    for split in compositions(size - skeleton, slots.len()) {
                        let pools: Vec<Vec<&Term>> = slots
                            .iter()
                            .zip(&split)
                            .map(|(slot_nt, s)| {
                                dp[slot_nt.as_str()]
                                    .get(*s - 1)
                                    .map(|set| set.iter().collect())
                                    .unwrap_or_default()
                            })
                            .collect();
                        if pools.iter().any(Vec::is_empty) {
                            continue;
                        }
                        for combo in pools.into_iter().multi_cartesian_product() {
                            let mut fills = combo.into_iter();
                            layer.insert(fill_nt_leaves(body, self, &mut fills));
                        }
                    }
                }
                layers.insert(nt.as_str(), layer);
            }
            let mut accepted: Vec<Term> =
                layers[self.start.as_str()].iter().cloned().collect();
            accepted.sort();
            for t in accepted {
                if out.len() >= limit {
                    return out;
                }
                out.push(t);
            }
            for (nt, layer) in layers {
                dp.get_mut(nt).unwrap().push(layer);
            }
        }
        out
    }

    /// Compile to a deterministic automaton over `alphabet` by the subset
    /// construction. The automaton accepts exactly the terms derivable from
    /// the start nonterminal.
    pub fn to_automaton(&self, alphabet: &BTreeMap<Symbol, usize>) -> Result<TreeAutomaton> {
        // States of the intermediate nondeterministic automaton: one per
        // nonterminal, one per distinct proper rule subterm.
        let mut nfa_states: BTreeMap<NfaKey, usize> = BTreeMap::new();
        for nt in &self.nonterminals {
            let id = nfa_states.len();
            nfa_states.insert(NfaKey::Nt(nt.clone()), id);
        }
        let mut nfa: BTreeMap<Symbol, Vec<(Vec<usize>, usize)>> = BTreeMap::new();
        for nt in &self.nonterminals {
            for p in &self.rules[nt] {
                let kids = self.nfa_children(p, &mut nfa_states, &mut nfa, alphabet)?;
                let nt_id = nfa_states[&NfaKey::Nt(nt.clone())];
                nfa.entry(p.head.clone())
                    .or_default()
                    .push((kids, nt_id));
            }
        }

        let start_id = nfa_states[&NfaKey::Nt(self.start.clone())];
        let mut macro_states: Vec<BTreeSet<usize>> = Vec::new();
        let mut macro_index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let mut transitions: BTreeMap<(Symbol, Vec<StateId>), StateId> = BTreeMap::new();
        loop {
            let mut changed = false;
            for (sym, arity) in alphabet {
                let Some(edges) = nfa.get(sym) else { continue };
                let tuples: Vec<Vec<StateId>> = if *arity == 0 {
                    vec![Vec::new()]
                } else {
                    (0..*arity)
                        .map(|_| 0..macro_states.len())
                        .multi_cartesian_product()
                        .collect()
                };
                for tuple in tuples {
                    let key = (sym.clone(), tuple.clone());
                    if transitions.contains_key(&key) {
                        continue;
                    }
                    let mut result: BTreeSet<usize> = BTreeSet::new();
                    for (kids, target) in edges {
                        if kids.len() == tuple.len()
                            && kids
                                .iter()
                                .zip(&tuple)
                                .all(|(k, m)| macro_states[*m].contains(k))
                        {
                            result.insert(*target);
                        }
                    }
                    if result.is_empty() {
                        continue;
                    }
                    let id = match macro_index.get(&result) {
                        Some(id) => *id,
                        None => {
                            let id = macro_states.len();
                            macro_states.push(result.clone());
                            macro_index.insert(result, id);
                            id
                        }
                    };
                    transitions.insert(key, id);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let accepting = macro_states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(&start_id))
            .map(|(i, _)| i)
            .collect();
        TreeAutomaton::new(
            alphabet.clone(),
            macro_states.len(),
            transitions,
            accepting,
        )
    }

    fn nfa_children(
        &self,
        t: &Term,
        nfa_states: &mut BTreeMap<NfaKey, usize>,
        nfa: &mut BTreeMap<Symbol, Vec<(Vec<usize>, usize)>>,
        alphabet: &BTreeMap<Symbol, usize>,
    ) -> Result<Vec<usize>> {
        if !alphabet.contains_key(&t.head) {
            return Err(Error::UnknownSymbol(t.head.name().to_string()));
        }
        let mut kids = Vec::with_capacity(t.args.len());
        for a in &t.args {
            kids.push(self.nfa_state_of(a, nfa_states, nfa, alphabet)?);
        }
        Ok(kids)
    }

    fn nfa_state_of(
        &self,
        t: &Term,
        nfa_states: &mut BTreeMap<NfaKey, usize>,
        nfa: &mut BTreeMap<Symbol, Vec<(Vec<usize>, usize)>>,
        alphabet: &BTreeMap<Symbol, usize>,
    ) -> Result<usize> {
        if let Symbol::Op(name) = &t.head {
            if self.is_nonterminal(name) {
                return Ok(nfa_states[&NfaKey::Nt(name.clone())]);
            }
        }
        let kids = self.nfa_children(t, nfa_states, nfa, alphabet)?;
        let key = NfaKey::Node(t.clone());
        if let Some(id) = nfa_states.get(&key) {
            return Ok(*id);
        }
        let id = nfa_states.len();
        nfa_states.insert(key, id);
        nfa.entry(t.head.clone()).or_default().push((kids, id));
        Ok(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum NfaKey {
    Nt(String),
    Node(Term),
}

/// Nonterminal leaves of a production body, left to right.
fn nt_leaves(body: &Term, g: &TreeGrammar) -> Vec<String> {
    let mut out = Vec::new();
    fn go(t: &Term, g: &TreeGrammar, out: &mut Vec<String>) {
        if let Symbol::Op(name) = &t.head {
            if t.args.is_empty() && g.is_nonterminal(name) {
                out.push(name.clone());
                return;
            }
        }
        for a in &t.args {
            go(a, g, out);
        }
    }
    go(body, g, &mut out);
    out
}

fn fill_nt_leaves<'a>(
    body: &Term,
    g: &TreeGrammar,
    fills: &mut impl Iterator<Item = &'a Term>,
) -> Term {
    if let Symbol::Op(name) = &body.head {
        if body.args.is_empty() && g.is_nonterminal(name) {
            return fills.next().expect("one fill per nonterminal leaf").clone();
        }
    }
    Term {
        head: body.head.clone(),
        args: body
            .args
            .iter()
            .map(|a| fill_nt_leaves(a, g, fills))
            .collect(),
    }
}

fn check_nt_occurrences(t: &Term, nts: &BTreeSet<&String>) -> Result<()> {
    for a in &t.args {
        if let Symbol::Op(h) = &a.head {
            if nts.contains(h) && !a.args.is_empty() {
                return Err(Error::ArityMismatch {
                    symbol: h.clone(),
                    expected: 0,
                    found: a.args.len(),
                });
            }
        }
        check_nt_occurrences(a, nts)?;
    }
    Ok(())
}
