//! The automata-based solver for the regular fragment.
//!
//! The constraint is normalised to ground clauses in which the synthesis
//! target occurs at most once per equation. A clause whose target occurrences
//! all sit in the conclusion (case 1), or in a single hypothesis equation
//! (case 2), has a regular solution language computed from a congruence
//! quotient of a subtree automaton. Clause languages are intersected with
//! each other and with the candidate grammar; the final automaton carries
//! every solution, and its minimal member is the reported witness.
//!
//! The translation also runs backwards: any tree automaton turns into a
//! problem whose solutions are exactly its language, which is the engine of
//! the hardness reductions.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{intersect_all, union_all, StateId, TreeAutomaton, TreeGrammar};
use crate::congruence::{congruence_automaton, CongruenceClosure};
use crate::error::{Error, Result};
use crate::formula::{
    desugar_ite, skolemize_universals, to_cnf, Formula, Literal, DEFAULT_CLAUSE_LIMIT,
};
use crate::problem::{SygusProblem, Theory, Verdict};
use crate::term::{subterm_closure, Context, Signature, Symbol, Term, HOLE};

/// A clause after normalisation, split into hypothesis equations `negatives`
/// and conclusion equations `positives`: the clause is their implication.
#[derive(Debug, Clone)]
pub struct ClassifiedClause {
    pub negatives: Vec<(Term, Term)>,
    pub positives: Vec<(Term, Term)>,
    pub class: ClauseClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseClass {
    /// The target does not occur.
    FFree,
    /// The target occurs only in conclusion equations, one occurrence each;
    /// the indices point into `positives`.
    Case1(Vec<usize>),
    /// The target occurs in exactly one hypothesis equation and nowhere
    /// else; the index points into `negatives`.
    Case2(usize),
}

/// One equation containing a single target application, factored as
/// `context[target(args)] = other` with the target on the left.
#[derive(Debug, Clone)]
pub struct TargetEquation {
    pub context: Context,
    pub args: Vec<Term>,
    pub other: Term,
}

/// The constraint after conditional-term removal, skolemisation and clause
/// splitting, together with the signature extended by the fresh constants
/// those passes introduce.
#[derive(Debug, Clone)]
pub struct NormalizedProblem {
    pub signature: Signature,
    pub clauses: Vec<Vec<Literal>>,
}

pub fn normalize(problem: &SygusProblem) -> Result<NormalizedProblem> {
    for nt in problem.grammar.nonterminals() {
        if problem.grammar.rules(nt).iter().any(Term::contains_ite) {
            return Err(Error::IteInGrammar(nt.clone()));
        }
    }
    let (phi, mut signature) = skolemize_universals(&problem.constraint, &problem.signature)?;
    let before: BTreeSet<String> = {
        let mut s = BTreeSet::new();
        phi.symbol_names(&mut s);
        s
    };
    let phi = desugar_ite(&phi)?;
    let mut after = BTreeSet::new();
    phi.symbol_names(&mut after);
    for name in after.difference(&before) {
        signature.add_constant(name.clone())?;
    }
    let clauses = to_cnf(&phi, DEFAULT_CLAUSE_LIMIT)?;
    Ok(NormalizedProblem { signature, clauses })
}

/// Split a clause into hypothesis and conclusion equations and decide which
/// solvable shape it has, if any.
pub fn classify(clause: &[Literal], target: &str) -> Result<ClassifiedClause> {
    let mut negatives = Vec::new();
    let mut positives = Vec::new();
    let mut neg_hits = Vec::new();
    let mut pos_hits = Vec::new();
    for l in clause {
        let count = l.lhs.count_op(target) + l.rhs.count_op(target);
        if count > 1 {
            return Err(Error::NotRegular(format!(
                "equation (= {} {}) applies {target} more than once",
                l.lhs, l.rhs
            )));
        }
        if l.positive {
            if count == 1 {
                pos_hits.push(positives.len());
            }
            positives.push((l.lhs.clone(), l.rhs.clone()));
        } else {
            if count == 1 {
                neg_hits.push(negatives.len());
            }
            negatives.push((l.lhs.clone(), l.rhs.clone()));
        }
    }
    let class = match (neg_hits.as_slice(), pos_hits.as_slice()) {
        ([], []) => ClauseClass::FFree,
        ([], _) => ClauseClass::Case1(pos_hits),
        ([i], []) => ClauseClass::Case2(*i),
        _ => {
            return Err(Error::NotRegular(format!(
                "{target} occurs in {} hypothesis equation(s) and {} conclusion equation(s)",
                neg_hits.len(),
                pos_hits.len()
            )))
        }
    };
    Ok(ClassifiedClause {
        negatives,
        positives,
        class,
    })
}

/// Factor an equation with one target occurrence into context, arguments and
/// the target-free side, orienting the target to the left.
pub fn factor_target(lhs: &Term, rhs: &Term, target: &str) -> Result<TargetEquation> {
    let (carrier, other) = if lhs.count_op(target) == 1 {
        (lhs, rhs)
    } else if rhs.count_op(target) == 1 {
        (rhs, lhs)
    } else {
        return Err(Error::NotRegular(format!(
            "equation (= {lhs} {rhs}) does not apply {target} exactly once"
        )));
    };
    if other.contains_op(target) {
        return Err(Error::NotRegular(format!(
            "both sides of (= {lhs} {rhs}) apply {target}"
        )));
    }
    let mut args = None;
    let skeleton = carve(carrier, target, &mut args);
    let args = args.expect("target occurrence was counted");
    Ok(TargetEquation {
        context: Context::new(skeleton)?,
        args,
        other: other.clone(),
    })
}

fn carve(t: &Term, target: &str, args: &mut Option<Vec<Term>>) -> Term {
    if matches!(&t.head, Symbol::Op(n) if n == target) {
        *args = Some(t.args.clone());
        return Term::constant(HOLE);
    }
    Term {
        head: t.head.clone(),
        args: t.args.iter().map(|a| carve(a, target, args)).collect(),
    }
}

fn target_free_subterms(t: &Term, target: &str) -> BTreeSet<Term> {
    t.subterms()
        .into_iter()
        .filter(|s| !s.contains_op(target))
        .collect()
}

/// Solution automaton of a clause whose conclusion applies the target:
/// the union over the target-bearing conclusion equations, or the universal
/// automaton when a target-free conclusion already follows from the
/// hypotheses.
fn solve_case1(
    sig: &Signature,
    alphabet: &BTreeMap<Symbol, usize>,
    clause: &ClassifiedClause,
    hits: &[usize],
) -> Result<TreeAutomaton> {
    let target = sig.target();
    let mut cc = CongruenceClosure::with_equations(
        clause.negatives.iter().map(|(a, b)| (a, b)),
    );
    for (i, (u, v)) in clause.positives.iter().enumerate() {
        if !hits.contains(&i) && cc.same(u, v) {
            return Ok(TreeAutomaton::universal(alphabet.clone()));
        }
    }
    let mut parts = Vec::new();
    for i in hits {
        let (lhs, rhs) = &clause.positives[*i];
        let eq = factor_target(lhs, rhs, target)?;
        parts.push(case1_equation_automaton(sig, alphabet, &clause.negatives, &eq)?);
    }
    union_all(alphabet, parts)
}

fn case1_equation_automaton(
    sig: &Signature,
    alphabet: &BTreeMap<Symbol, usize>,
    negatives: &[(Term, Term)],
    eq: &TargetEquation,
) -> Result<TreeAutomaton> {
    let target = sig.target();
    let mut support: BTreeSet<Term> = BTreeSet::new();
    for (a, b) in negatives {
        support.extend(subterm_closure([a, b]));
    }
    let carrier = eq.context.plug(&Term::op(target, eq.args.clone()));
    support.extend(target_free_subterms(&carrier, target));
    support.extend(subterm_closure([&eq.other]));

    let ca = congruence_automaton(negatives, &support, alphabet)?;
    let probe = Term::constant(sig.fresh_name("probe"));
    let plugged = eq.context.plug(&probe);
    let base = CongruenceClosure::with_equations(negatives.iter().map(|(a, b)| (a, b)));
    let mut accepting = BTreeSet::new();
    for q in 0..ca.automaton.num_states() {
        let mut cc = base.clone();
        cc.merge(&probe, &ca.state_term[q]);
        if cc.same(&plugged, &eq.other) {
            accepting.insert(q);
        }
    }
    with_argument_transitions(sig, &ca.automaton, &eq.args, &ca.state_of, accepting)
}

/// Solution automaton of a clause whose single target application sits in a
/// hypothesis equation.
fn solve_case2(
    sig: &Signature,
    alphabet: &BTreeMap<Symbol, usize>,
    clause: &ClassifiedClause,
    hit: usize,
) -> Result<TreeAutomaton> {
    let target = sig.target();
    let rest: Vec<(Term, Term)> = clause
        .negatives
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != hit)
        .map(|(_, e)| e.clone())
        .collect();
    let mut base = CongruenceClosure::with_equations(rest.iter().map(|(a, b)| (a, b)));
    if clause.positives.iter().any(|(u, v)| {
        let mut cc = base.clone();
        let r = cc.same(u, v);
        if r {
            base = cc;
        }
        r
    }) {
        return Ok(TreeAutomaton::universal(alphabet.clone()));
    }
    if clause.positives.is_empty() {
        return Ok(TreeAutomaton::empty(alphabet.clone()));
    }

    let (lhs, rhs) = &clause.negatives[hit];
    let eq = factor_target(lhs, rhs, target)?;
    let mut support: BTreeSet<Term> = BTreeSet::new();
    for (a, b) in rest.iter().chain(clause.positives.iter()) {
        support.extend(subterm_closure([a, b]));
    }
    support.extend(subterm_closure([&eq.other]));
    support.extend(subterm_closure(eq.args.iter()));

    let ca = congruence_automaton(&rest, &support, alphabet)?;
    let base = CongruenceClosure::with_equations(rest.iter().map(|(a, b)| (a, b)));
    let mut accepting = BTreeSet::new();
    for q in 0..ca.automaton.num_states() {
        let mut cc = base.clone();
        cc.merge(&eq.context.plug(&ca.state_term[q]), &eq.other);
        if clause.positives.iter().any(|(u, v)| cc.same(u, v)) {
            accepting.insert(q);
        }
    }
    with_argument_transitions(sig, &ca.automaton, &eq.args, &ca.state_of, accepting)
}

/// Attach the bound-variable transitions: each parameter runs to the state
/// of the corresponding argument of the factored application.
fn with_argument_transitions(
    sig: &Signature,
    aut: &TreeAutomaton,
    args: &[Term],
    state_of: &BTreeMap<Term, StateId>,
    accepting: BTreeSet<StateId>,
) -> Result<TreeAutomaton> {
    if args.len() != sig.target_arity() {
        return Err(Error::ArityMismatch {
            symbol: sig.target().to_string(),
            expected: sig.target_arity(),
            found: args.len(),
        });
    }
    let mut transitions = aut.transitions().clone();
    for (x, s) in sig.params().iter().zip(args) {
        let q = state_of.get(s).copied().ok_or_else(|| {
            Error::InvalidSupport(format!("argument {s} is outside the support"))
        })?;
        transitions.insert((Symbol::Param(x.clone()), Vec::new()), q);
    }
    TreeAutomaton::new(
        aut.alphabet().clone(),
        aut.num_states(),
        transitions,
        accepting,
    )
}

/// Solution automaton of one classified clause.
pub fn clause_automaton(
    sig: &Signature,
    alphabet: &BTreeMap<Symbol, usize>,
    clause: &ClassifiedClause,
) -> Result<TreeAutomaton> {
    match &clause.class {
        ClauseClass::FFree => {
            if crate::congruence::ground_clause_valid(&clause.negatives, &clause.positives) {
                Ok(TreeAutomaton::universal(alphabet.clone()))
            } else {
                Ok(TreeAutomaton::empty(alphabet.clone()))
            }
        }
        ClauseClass::Case1(hits) => solve_case1(sig, alphabet, clause, hits),
        ClauseClass::Case2(hit) => solve_case2(sig, alphabet, clause, *hit),
    }
}

/// Solve a problem with the automata engine. Fails with
/// [`Error::NotRegular`] or [`Error::IteInGrammar`] outside the fragment.
pub fn solve(problem: &SygusProblem) -> Result<Verdict> {
    let norm = normalize(problem)?;
    let alphabet = norm.signature.alphabet_with_params();
    let mut automata = Vec::new();
    for clause in &norm.clauses {
        let classified = classify(clause, norm.signature.target())?;
        automata.push(clause_automaton(&norm.signature, &alphabet, &classified)?);
    }
    automata.push(problem.grammar.to_automaton(&alphabet)?);
    let combined = intersect_all(automata)?;
    match combined.trim() {
        Ok(solutions) => {
            let witness = solutions
                .witness()
                .expect("a trimmed automaton accepts its witness");
            Ok(Verdict::solvable(witness, Some(solutions)))
        }
        Err(Error::EmptyLanguage) => Ok(Verdict::Unsolvable),
        Err(e) => Err(e),
    }
}

/// Check one candidate against the constraint by substitution and ground
/// validity.
pub fn check_candidate(problem: &SygusProblem, body: &Term) -> Result<bool> {
    problem.check_candidate(body)?;
    let plugged = problem.plug(body)?;
    let (plugged, _) = skolemize_universals(&plugged, &problem.signature)?;
    let plugged = desugar_ite(&plugged)?;
    crate::congruence::ground_formula_valid(&plugged, DEFAULT_CLAUSE_LIMIT)
}

/// Translate an automaton into a problem whose solution set is exactly the
/// automaton's language. States are named by their minimal reaching terms;
/// parameters are frozen to fresh constants in the constraint and kept out
/// of the reconstruction grammar's terminals.
pub fn automaton_to_problem(aut: &TreeAutomaton, target: &str) -> Result<SygusProblem> {
    let trimmed = aut.trim()?;
    let reps = trimmed.representatives();

    let mut params: Vec<String> = Vec::new();
    let mut base_symbols: BTreeMap<String, usize> = BTreeMap::new();
    for (sym, arity) in trimmed.alphabet() {
        match sym {
            Symbol::Param(x) => params.push(x.clone()),
            Symbol::Op(name) => {
                base_symbols.insert(name.clone(), *arity);
            }
        }
    }

    let mut symbols = base_symbols.clone();
    let mut frozen: BTreeMap<String, Term> = BTreeMap::new();
    for x in &params {
        let mut cand = format!("c_{x}");
        let mut n = 0usize;
        while symbols.contains_key(&cand) || cand == target {
            cand = format!("c_{x}_{n}");
            n += 1;
        }
        symbols.insert(cand.clone(), 0);
        frozen.insert(x.clone(), Term::constant(&cand));
    }
    let signature = Signature::new(symbols, target, params.clone())?;

    let freeze = |t: &Term| t.substitute_params(&frozen);
    let mut hypotheses = Vec::new();
    for ((sym, kids), q) in trimmed.transitions() {
        let lhs = Term {
            head: sym.clone(),
            args: kids.iter().map(|k| reps[k].clone()).collect(),
        };
        hypotheses.push(Formula::Eq(freeze(&lhs), freeze(&reps[q])));
    }
    let application = Term::op(target, params.iter().map(Term::param).collect());
    let conclusions: Vec<Formula> = trimmed
        .accepting()
        .iter()
        .map(|q| Formula::Eq(freeze(&application), freeze(&reps[q])))
        .collect();
    let constraint = Formula::implies(Formula::And(hypotheses), Formula::Or(conclusions));

    let grammar = universal_grammar(&base_symbols, &params)?;
    SygusProblem::new(Theory::Euf, signature, grammar, constraint)
}

/// The grammar deriving every term over the given operators and parameters.
pub fn universal_grammar(
    symbols: &BTreeMap<String, usize>,
    params: &[String],
) -> Result<TreeGrammar> {
    let mut nt = "S".to_string();
    while symbols.contains_key(&nt) || params.contains(&nt) {
        nt.push('_');
    }
    let mut rules: Vec<Term> = Vec::new();
    for (name, arity) in symbols {
        rules.push(Term::op(
            name,
            (0..*arity).map(|_| Term::constant(&nt)).collect(),
        ));
    }
    for x in params {
        rules.push(Term::param(x));
    }
    TreeGrammar::new(vec![(nt, rules)])
}

/// A problem solvable exactly when all the automata accept a common term.
/// The synthesised constant is that common term.
pub fn intersection_nonempty_problem(automata: &[TreeAutomaton]) -> Result<SygusProblem> {
    let Some(first) = automata.first() else {
        return Err(Error::Unsupported(
            "intersection reduction needs at least one automaton".to_string(),
        ));
    };
    if automata.iter().any(|a| a.alphabet() != first.alphabet()) {
        return Err(Error::AlphabetMismatch);
    }
    if first.alphabet().keys().any(|s| s.is_param()) {
        return Err(Error::Unsupported(
            "intersection reduction needs a ground alphabet".to_string(),
        ));
    }
    let mut base_symbols: BTreeMap<String, usize> = first
        .alphabet()
        .iter()
        .map(|(s, r)| (s.name().to_string(), *r))
        .collect();
    let target = {
        let mut t = "f".to_string();
        while base_symbols.contains_key(&t) {
            t.push('_');
        }
        t
    };

    let mut extra: Vec<String> = Vec::new();
    let mut clause_for = |aut: &TreeAutomaton, symbols: &mut BTreeMap<String, usize>| {
        match aut.trim() {
            Ok(trimmed) => {
                let reps = trimmed.representatives();
                let hypotheses: Vec<Formula> = trimmed
                    .transitions()
                    .iter()
                    .map(|((sym, kids), q)| {
                        Formula::Eq(
                            Term {
                                head: sym.clone(),
                                args: kids.iter().map(|k| reps[k].clone()).collect(),
                            },
                            reps[q].clone(),
                        )
                    })
                    .collect();
                let conclusions: Vec<Formula> = trimmed
                    .accepting()
                    .iter()
                    .map(|q| Formula::Eq(Term::constant(&target), reps[q].clone()))
                    .collect();
                Ok(Formula::implies(
                    Formula::And(hypotheses),
                    Formula::Or(conclusions),
                ))
            }
            Err(Error::EmptyLanguage) => {
                // An unsatisfiable conclusion stands in for the empty
                // language: two fresh constants never provably equal.
                let mut fresh = || {
                    let mut n = extra.len();
                    loop {
                        let cand = format!("never_{n}");
                        if !symbols.contains_key(&cand) && cand != target {
                            symbols.insert(cand.clone(), 0);
                            extra.push(cand.clone());
                            return cand;
                        }
                        n += 1;
                    }
                };
                let u = fresh();
                let v = fresh();
                Ok(Formula::Eq(Term::constant(u), Term::constant(v)))
            }
            Err(e) => Err(e),
        }
    };

    let clauses = automata
        .iter()
        .map(|a| clause_for(a, &mut base_symbols))
        .collect::<Result<Vec<Formula>>>()?;
    let grammar_symbols: BTreeMap<String, usize> = first
        .alphabet()
        .iter()
        .map(|(s, r)| (s.name().to_string(), *r))
        .collect();
    let signature = Signature::new(base_symbols, target, Vec::new())?;
    let grammar = universal_grammar(&grammar_symbols, &[])?;
    SygusProblem::new(Theory::Euf, signature, grammar, Formula::And(clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_problem;

    fn a() -> Term {
        Term::constant("a")
    }

    fn g(t: Term) -> Term {
        Term::op("g", vec![t])
    }

    fn h(t: Term) -> Term {
        Term::op("h", vec![t])
    }

    const FOLD_LOOP: &str = "
(set-logic EUF)
(declare-fun g (U) U)
(declare-const a U)
(synth-fun f ((x1 U)) U
  ((S U))
  ((S U (a x1 (g S)))))
(constraint (=> (= (g (g a)) a) (= (f a) (g a))))
(check-synth)
";

    #[test]
    fn fold_loop_solves_with_an_odd_chain() {
        let p = parse_problem(FOLD_LOOP).unwrap();
        let v = solve(&p).unwrap();
        let Verdict::Solvable { witness, solutions } = v else {
            panic!("expected solvable");
        };
        assert_eq!(witness, g(Term::param("x1")));
        let solutions = solutions.unwrap();
        assert!(solutions.accepts(&g(Term::param("x1"))));
        assert!(solutions.accepts(&g(a())));
        assert!(!solutions.accepts(&Term::param("x1")));
        assert!(!solutions.accepts(&g(g(Term::param("x1")))));
        assert!(solutions.accepts(&g(g(g(a())))));
    }

    #[test]
    fn candidate_checks_agree_with_the_automaton() {
        let p = parse_problem(FOLD_LOOP).unwrap();
        let Verdict::Solvable { solutions, .. } = solve(&p).unwrap() else {
            panic!("expected solvable");
        };
        let solutions = solutions.unwrap();
        for body in p.grammar.enumerate(6, 200) {
            assert_eq!(
                check_candidate(&p, &body).unwrap(),
                solutions.accepts(&body),
                "disagreement on {body}"
            );
        }
    }

    #[test]
    fn hypothesis_occurrence_is_case2() {
        let text = "
(set-logic EUF)
(declare-fun g (U) U)
(declare-fun h (U) U)
(declare-const a U)
(declare-const b U)
(synth-fun f ((x1 U)) U
  ((S U))
  ((S U (a x1 (g S) (h S)))))
(constraint (=> (= (f a) b) (= (h a) b)))
(check-synth)
";
        let p = parse_problem(text).unwrap();
        let norm = normalize(&p).unwrap();
        assert_eq!(norm.clauses.len(), 1);
        let c = classify(&norm.clauses[0], "f").unwrap();
        assert_eq!(c.class, ClauseClass::Case2(0));
        let v = solve(&p).unwrap();
        let Verdict::Solvable { witness, solutions } = v else {
            panic!("expected solvable");
        };
        assert_eq!(witness, h(Term::param("x1")));
        let solutions = solutions.unwrap();
        assert!(solutions.accepts(&h(a())));
        assert!(!solutions.accepts(&g(Term::param("x1"))));
        assert!(!solutions.accepts(&a()));
    }

    #[test]
    fn two_target_occurrences_are_not_regular() {
        let text = "
(set-logic EUF)
(declare-const a U)
(synth-fun f ((x1 U)) U ((S U)) ((S U (a x1))))
(constraint (= (f (f a)) a))
(check-synth)
";
        let p = parse_problem(text).unwrap();
        assert!(matches!(solve(&p), Err(Error::NotRegular(_))));
    }

    #[test]
    fn occurrences_on_both_sides_are_not_regular() {
        let text = "
(set-logic EUF)
(declare-fun g (U) U)
(declare-const a U)
(synth-fun f ((x1 U)) U ((S U)) ((S U (a x1 (g S)))))
(constraint (=> (= (f a) a) (= (f (g a)) (g a))))
(check-synth)
";
        let p = parse_problem(text).unwrap();
        assert!(matches!(solve(&p), Err(Error::NotRegular(_))));
    }

    #[test]
    fn unsolvable_when_no_grammar_term_fits() {
        let text = "
(set-logic EUF)
(declare-fun g (U) U)
(declare-const a U)
(declare-const b U)
(synth-fun f () U ((S U)) ((S U (b (g S)))))
(constraint (= f a))
(check-synth)
";
        let p = parse_problem(text).unwrap();
        assert!(matches!(solve(&p).unwrap(), Verdict::Unsolvable));
    }

    #[test]
    fn target_free_valid_constraint_solves_with_minimal_term() {
        let text = "
(set-logic EUF)
(declare-fun g (U) U)
(declare-const a U)
(synth-fun f ((x1 U)) U ((S U)) ((S U (a x1 (g S)))))
(constraint (= a a))
(check-synth)
";
        let p = parse_problem(text).unwrap();
        let v = solve(&p).unwrap();
        assert_eq!(v.witness(), Some(&Term::param("x1")));
    }

    #[test]
    fn round_trip_automaton_to_problem() {
        let p = parse_problem(FOLD_LOOP).unwrap();
        let Verdict::Solvable { solutions, .. } = solve(&p).unwrap() else {
            panic!("expected solvable");
        };
        let original = solutions.unwrap();
        let back = automaton_to_problem(&original, "f").unwrap();
        let Verdict::Solvable { solutions, .. } = solve(&back).unwrap() else {
            panic!("round trip should stay solvable");
        };
        let recovered = solutions
            .unwrap()
            .restrict_alphabet(original.alphabet())
            .unwrap();
        assert!(recovered.language_equal_up_to(&original, 4).unwrap());
    }

    #[test]
    fn intersection_reduction_tracks_emptiness() {
        let alpha = BTreeMap::from([
            (Symbol::Op("g".to_string()), 1),
            (Symbol::Op("a".to_string()), 0),
            (Symbol::Op("b".to_string()), 0),
        ]);
        let only_a = TreeGrammar::new(vec![(
            "S".to_string(),
            vec![a(), Term::op("g", vec![Term::constant("S")])],
        )])
        .unwrap()
        .to_automaton(&alpha)
        .unwrap();
        let only_b = TreeGrammar::new(vec![(
            "S".to_string(),
            vec![Term::constant("b"), Term::op("g", vec![Term::constant("S")])],
        )])
        .unwrap()
        .to_automaton(&alpha)
        .unwrap();

        let joint = intersection_nonempty_problem(&[only_a.clone(), only_b]).unwrap();
        assert!(matches!(solve(&joint).unwrap(), Verdict::Unsolvable));

        let overlap = intersection_nonempty_problem(&[only_a.clone(), only_a.clone()]).unwrap();
        let v = solve(&overlap).unwrap();
        assert_eq!(v.witness(), Some(&a()));

        let empty = TreeAutomaton::empty(alpha.clone());
        let with_empty = intersection_nonempty_problem(&[only_a, empty]).unwrap();
        assert!(matches!(solve(&with_empty).unwrap(), Verdict::Unsolvable));
    }
}
