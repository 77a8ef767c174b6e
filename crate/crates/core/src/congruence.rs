//! Ground congruence closure and the validity checks built on it, plus the
//! bridge from closures to tree automata: the subtree automaton of a finite
//! support and its quotient under the congruence generated by a set of ground
//! equations.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{StateId, TreeAutomaton};
use crate::error::{Error, Result};
use crate::formula::{to_dnf, Formula, Literal};
use crate::term::{Symbol, Term};

/// Union-find with a signature table; terms are interned on the fly.
#[derive(Debug, Clone, Default)]
pub struct CongruenceClosure {
    index: BTreeMap<Term, usize>,
    heads: Vec<Symbol>,
    args: Vec<Vec<usize>>,
    parent: Vec<usize>,
    size: Vec<usize>,
    uses: Vec<Vec<usize>>,
    signatures: BTreeMap<(Symbol, Vec<usize>), usize>,
}

impl CongruenceClosure {
    pub fn new() -> CongruenceClosure {
        CongruenceClosure::default()
    }

    pub fn with_equations<'a>(
        equations: impl IntoIterator<Item = (&'a Term, &'a Term)>,
    ) -> CongruenceClosure {
        let mut cc = CongruenceClosure::new();
        for (s, t) in equations {
            cc.merge(s, t);
        }
        cc
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Intern a term and every subterm, closing under congruence.
    pub fn add(&mut self, t: &Term) -> usize {
        if let Some(id) = self.index.get(t) {
            return *id;
        }
        let kid_ids: Vec<usize> = t.args.iter().map(|a| self.add(a)).collect();
        let id = self.heads.len();
        self.index.insert(t.clone(), id);
        self.heads.push(t.head.clone());
        self.args.push(kid_ids.clone());
        self.parent.push(id);
        self.size.push(1);
        self.uses.push(Vec::new());
        for k in kid_ids {
            let rk = self.find(k);
            self.uses[rk].push(id);
        }
        let sig = self.signature_of(id);
        match self.signatures.get(&sig) {
            Some(&q) => self.union(id, q),
            None => {
                self.signatures.insert(sig, id);
            }
        }
        id
    }

    fn signature_of(&mut self, node: usize) -> (Symbol, Vec<usize>) {
        let kids = self.args[node].clone();
        (
            self.heads[node].clone(),
            kids.into_iter().map(|k| self.find(k)).collect(),
        )
    }

    fn union(&mut self, a: usize, b: usize) {
        let mut queue = vec![(a, b)];
        while let Some((a, b)) = queue.pop() {
            let ra = self.find(a);
            let rb = self.find(b);
            if ra == rb {
                continue;
            }
            let (win, lose) = if self.size[ra] > self.size[rb]
                || (self.size[ra] == self.size[rb] && ra < rb)
            {
                (ra, rb)
            } else {
                (rb, ra)
            };
            self.parent[lose] = win;
            self.size[win] += self.size[lose];
            let moved = std::mem::take(&mut self.uses[lose]);
            for p in moved {
                let sig = self.signature_of(p);
                match self.signatures.get(&sig).copied() {
                    Some(q) => {
                        if self.find(q) != self.find(p) {
                            queue.push((p, q));
                        }
                    }
                    None => {
                        self.signatures.insert(sig, p);
                    }
                }
                self.uses[win].push(p);
            }
        }
    }

    /// Assert an equation.
    pub fn merge(&mut self, s: &Term, t: &Term) {
        let a = self.add(s);
        let b = self.add(t);
        self.union(a, b);
    }

    /// Does the closure identify the two terms? Both are interned first, so
    /// the check is entailment over the enlarged subterm set.
    pub fn same(&mut self, s: &Term, t: &Term) -> bool {
        let a = self.add(s);
        let b = self.add(t);
        self.find(a) == self.find(b)
    }

    /// Class index of every given term, compact and ordered by the minimal
    /// member of each class.
    pub fn partition<'a>(
        &mut self,
        terms: impl IntoIterator<Item = &'a Term>,
    ) -> (BTreeMap<Term, usize>, usize) {
        let added: Vec<(Term, usize)> = terms
            .into_iter()
            .map(|t| (t.clone(), self.add(t)))
            .collect();
        let ids: Vec<(Term, usize)> = added
            .into_iter()
            .map(|(t, id)| {
                let root = self.find(id);
                (t, root)
            })
            .collect();
        let mut class_index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut out = BTreeMap::new();
        // Iteration is in term order, so class numbers follow minimal members.
        for (t, root) in ids {
            let n = class_index.len();
            let c = *class_index.entry(root).or_insert(n);
            out.insert(t, c);
        }
        let count = class_index.len();
        (out, count)
    }
}

/// Do the equations entail `s = t` in the theory of equality?
pub fn entails(equations: &[(Term, Term)], s: &Term, t: &Term) -> bool {
    let mut cc = CongruenceClosure::with_equations(equations.iter().map(|(a, b)| (a, b)));
    cc.same(s, t)
}

/// Validity of a ground clause: the conjunction of `negative` entails some
/// member of `positive`. By convexity of equality reasoning this is complete.
pub fn ground_clause_valid(negative: &[(Term, Term)], positive: &[(Term, Term)]) -> bool {
    let mut cc = CongruenceClosure::with_equations(negative.iter().map(|(a, b)| (a, b)));
    positive.iter().any(|(s, t)| {
        let mut probe = cc.clone();
        let r = probe.same(s, t);
        if r {
            cc = probe;
        }
        r
    })
}

/// Validity of an arbitrary ground formula: the negation is put in
/// disjunctive normal form and each cube is checked for satisfiability.
pub fn ground_formula_valid(phi: &Formula, clause_limit: usize) -> Result<bool> {
    if !phi.is_ground() {
        return Err(Error::Unsupported(
            "validity check on a non-ground formula".to_string(),
        ));
    }
    if phi.contains_ite() {
        return Err(Error::Unsupported(
            "validity check on a formula with conditional terms".to_string(),
        ));
    }
    let cubes = to_dnf(&Formula::not(phi.clone()), clause_limit)?;
    for cube in cubes {
        if cube_satisfiable(&cube) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn cube_satisfiable(cube: &[Literal]) -> bool {
    let mut cc = CongruenceClosure::new();
    for l in cube.iter().filter(|l| l.positive) {
        cc.merge(&l.lhs, &l.rhs);
    }
    // A cube of equations alone is always satisfiable; a disequation refutes
    // it exactly when the equations entail it.
    !cube
        .iter()
        .filter(|l| !l.positive)
        .any(|l| cc.same(&l.lhs, &l.rhs))
}

/// An automaton whose states carry representative terms.
#[derive(Debug, Clone)]
pub struct ClassedAutomaton {
    pub automaton: TreeAutomaton,
    /// Minimal support term parsing to each state.
    pub state_term: Vec<Term>,
    pub state_of: BTreeMap<Term, StateId>,
}

impl ClassedAutomaton {
    pub fn state_of(&self, t: &Term) -> Option<StateId> {
        self.state_of.get(t).copied()
    }
}

/// The subtree automaton of a finite subterm-closed support: one state per
/// support term, every state accepting, and the only runs are the supports'
/// own subterm runs.
pub fn subtree_automaton(
    support: &BTreeSet<Term>,
    alphabet: &BTreeMap<Symbol, usize>,
) -> Result<ClassedAutomaton> {
    let state_term: Vec<Term> = support.iter().cloned().collect();
    let state_of: BTreeMap<Term, StateId> = state_term
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    let mut transitions = BTreeMap::new();
    for (i, t) in state_term.iter().enumerate() {
        if !alphabet.contains_key(&t.head) {
            return Err(Error::UnknownSymbol(t.head.name().to_string()));
        }
        let kids: Option<Vec<StateId>> =
            t.args.iter().map(|a| state_of.get(a).copied()).collect();
        let Some(kids) = kids else {
            return Err(Error::InvalidSupport(format!(
                "support is not subterm-closed at {t}"
            )));
        };
        transitions.insert((t.head.clone(), kids), i);
    }
    let accepting = (0..state_term.len()).collect();
    let automaton =
        TreeAutomaton::new(alphabet.clone(), state_term.len(), transitions, accepting)?;
    Ok(ClassedAutomaton {
        automaton,
        state_term,
        state_of,
    })
}

/// Quotient of the subtree automaton of `support` by the congruence closure
/// of `equations`. States are congruence classes of support terms; the
/// automaton accepts every term the closure identifies with a support term.
pub fn congruence_automaton(
    equations: &[(Term, Term)],
    support: &BTreeSet<Term>,
    alphabet: &BTreeMap<Symbol, usize>,
) -> Result<ClassedAutomaton> {
    let sa = subtree_automaton(support, alphabet)?;
    let mut cc = CongruenceClosure::with_equations(equations.iter().map(|(a, b)| (a, b)));
    let (class_of_term, num_classes) = cc.partition(support.iter());
    let class_of: Vec<usize> = sa
        .state_term
        .iter()
        .map(|t| class_of_term[t])
        .collect();
    let automaton = sa.automaton.quotient(&class_of, num_classes)?;
    let mut state_term: Vec<Option<Term>> = vec![None; num_classes];
    for (t, c) in &class_of_term {
        if state_term[*c].is_none() {
            state_term[*c] = Some(t.clone());
        }
    }
    let state_term: Vec<Term> = state_term.into_iter().map(Option::unwrap).collect();
    Ok(ClassedAutomaton {
        automaton,
        state_term,
        state_of: class_of_term
            .into_iter()
            .map(|(t, c)| (t, c as StateId))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::subterm_closure;

    fn a() -> Term {
        Term::constant("a")
    }

    fn b() -> Term {
        Term::constant("b")
    }

    fn c() -> Term {
        Term::constant("c")
    }

    fn g(t: Term) -> Term {
        Term::op("g", vec![t])
    }

    fn alpha() -> BTreeMap<Symbol, usize> {
        BTreeMap::from([
            (Symbol::Op("g".to_string()), 1),
            (Symbol::Op("a".to_string()), 0),
            (Symbol::Op("b".to_string()), 0),
            (Symbol::Op("c".to_string()), 0),
        ])
    }

    #[test]
    fn transitivity_and_congruence() {
        let eqs = vec![(a(), b()), (b(), c())];
        assert!(entails(&eqs, &a(), &c()));
        assert!(entails(&eqs, &g(a()), &g(c())));
        assert!(!entails(&eqs, &a(), &g(a())));
    }

    #[test]
    fn loop_equation_folds_chains() {
        let eqs = vec![(g(g(a())), a())];
        assert!(entails(&eqs, &g(g(g(g(a())))), &a()));
        assert!(entails(&eqs, &g(g(g(a()))), &g(a())));
        assert!(!entails(&eqs, &g(a()), &a()));
    }

    #[test]
    fn merging_arguments_merges_applications() {
        let eqs = vec![(a(), b())];
        assert!(entails(&eqs, &g(a()), &g(b())));
        let deep = vec![(
            Term::op("p", vec![a(), g(a())]),
            Term::op("p", vec![a(), g(b())]),
        )];
        // No argument equation, so the two tuples stay apart.
        assert!(!entails(&deep, &a(), &b()));
    }

    #[test]
    fn clause_validity_uses_convexity() {
        let n = vec![(a(), b()), (b(), c())];
        assert!(ground_clause_valid(&n, &[(a(), c())]));
        assert!(!ground_clause_valid(&n, &[(a(), g(a()))]));
        assert!(ground_clause_valid(&[], &[(a(), a())]));
        assert!(ground_clause_valid(
            &n,
            &[(a(), g(a())), (c(), a())]
        ));
        assert!(!ground_clause_valid(&[], &[]));
    }

    #[test]
    fn formula_validity_matches_hand_checks() {
        let eq = |s: Term, t: Term| Formula::Eq(s, t);
        let valid = Formula::implies(
            Formula::And(vec![eq(a(), b()), eq(b(), c())]),
            eq(a(), c()),
        );
        assert!(ground_formula_valid(&valid, 1000).unwrap());
        let invalid = Formula::implies(
            Formula::Or(vec![eq(a(), b()), eq(b(), c())]),
            eq(a(), c()),
        );
        assert!(!ground_formula_valid(&invalid, 1000).unwrap());
        let disj = Formula::implies(
            eq(a(), b()),
            Formula::Or(vec![eq(a(), c()), eq(b(), a())]),
        );
        assert!(ground_formula_valid(&disj, 1000).unwrap());
        assert!(ground_formula_valid(&eq(a(), a()), 1000).unwrap());
        assert!(!ground_formula_valid(&eq(a(), b()), 1000).unwrap());
    }

    #[test]
    fn subtree_automaton_accepts_exactly_the_support() {
        let support = subterm_closure([&g(g(a()))]);
        let sa = subtree_automaton(&support, &alpha()).unwrap();
        assert!(sa.automaton.accepts(&a()));
        assert!(sa.automaton.accepts(&g(a())));
        assert!(sa.automaton.accepts(&g(g(a()))));
        assert!(!sa.automaton.accepts(&g(g(g(a())))));
        assert!(!sa.automaton.accepts(&b()));

        let mut gap = support.clone();
        gap.remove(&g(a()));
        assert!(subtree_automaton(&gap, &alpha()).is_err());
    }

    #[test]
    fn congruence_automaton_folds_the_loop() {
        // g(g(a)) = a over the support of g(g(a)) gives a two-state cycle.
        let eqs = vec![(g(g(a())), a())];
        let support = subterm_closure([&g(g(a()))]);
        let ca = congruence_automaton(&eqs, &support, &alpha()).unwrap();
        assert_eq!(ca.automaton.num_states(), 2);
        assert!(ca.automaton.accepts(&a()));
        assert!(ca.automaton.accepts(&g(g(g(g(a()))))));
        assert!(ca.automaton.accepts(&g(a())));
        assert!(ca.automaton.accepts(&g(g(g(a())))));
        assert!(!ca.automaton.accepts(&b()));
        assert_eq!(ca.state_term[ca.state_of(&a()).unwrap()], a());
        assert_eq!(ca.state_term[ca.state_of(&g(a())).unwrap()], g(a()));
    }

    #[test]
    fn congruence_automaton_matches_iterated_merges() {
        let eqs = vec![(g(g(a())), a()), (b(), g(a()))];
        let support = subterm_closure([&g(g(a())), &b()]);
        let ca = congruence_automaton(&eqs, &support, &alpha()).unwrap();

        let sa = subtree_automaton(&support, &alpha()).unwrap();
        let mut aut = sa.automaton;
        for (s, t) in &eqs {
            let qs = aut.run(s).unwrap();
            let qt = aut.run(t).unwrap();
            aut = aut.merged(qs, qt);
        }
        assert_eq!(
            ca.automaton.canonical_form(),
            aut.canonical_form()
        );
    }

    #[test]
    fn partition_orders_classes_by_minimal_member() {
        let mut cc = CongruenceClosure::new();
        cc.merge(&a(), &c());
        let terms = [a(), b(), c()];
        let (classes, n) = cc.partition(terms.iter());
        assert_eq!(n, 2);
        assert_eq!(classes[&a()], 0);
        assert_eq!(classes[&c()], 0);
        assert_eq!(classes[&b()], 1);
    }
}
