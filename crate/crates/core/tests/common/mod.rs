//! Reference implementations and seeded generators for the acceptance
//! suite. Everything here recomputes answers from first principles with
//! different algorithms than the library, so the code under test never
//! certifies itself.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use regsyn_core::automata::{TreeAutomaton, TreeGrammar};
use regsyn_core::fd::FiniteModel;
use regsyn_core::formula::{term_to_formula, Formula};
use regsyn_core::problem::{SygusProblem, Theory};
use regsyn_core::term::{subterm_closure, Signature, Symbol, Term, ITE};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A congruence partition computed by repeated merging until fixpoint,
/// with a quadratic congruence scan instead of a signature table.
pub struct Partition {
    terms: Vec<Term>,
    class: Vec<usize>,
}

impl Partition {
    fn index(&self, t: &Term) -> usize {
        self.terms.binary_search(t).expect("term outside the closed set")
    }

    pub fn same(&self, s: &Term, t: &Term) -> bool {
        self.class[self.index(s)] == self.class[self.index(t)]
    }
}

pub fn oracle_partition(equations: &[(Term, Term)], extra: &[Term]) -> Partition {
    let mut all: BTreeSet<Term> = BTreeSet::new();
    for t in extra {
        all.extend(t.subterms());
    }
    for (l, r) in equations {
        all.extend(l.subterms());
        all.extend(r.subterms());
    }
    let terms: Vec<Term> = all.into_iter().collect();
    let mut class: Vec<usize> = (0..terms.len()).collect();
    let find = |terms: &[Term], t: &Term| terms.binary_search(t).expect("closed");
    loop {
        let mut changed = false;
        let merge = |class: &mut Vec<usize>, a: usize, b: usize| {
            if a != b {
                for c in class.iter_mut() {
                    if *c == b {
                        *c = a;
                    }
                }
            }
        };
        for (l, r) in equations {
            let (a, b) = (class[find(&terms, l)], class[find(&terms, r)]);
            if a != b {
                merge(&mut class, a, b);
                changed = true;
            }
        }
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                if class[i] == class[j]
                    || terms[i].head != terms[j].head
                    || terms[i].args.len() != terms[j].args.len()
                {
                    continue;
                }
                let congruent = terms[i]
                    .args
                    .iter()
                    .zip(&terms[j].args)
                    .all(|(x, y)| class[find(&terms, x)] == class[find(&terms, y)]);
                if congruent {
                    let (a, b) = (class[i], class[j]);
                    merge(&mut class, a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Partition { terms, class }
}

fn replace_everywhere(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    Term {
        head: t.head.clone(),
        args: t
            .args
            .iter()
            .map(|a| replace_everywhere(a, from, to))
            .collect(),
    }
}

fn formula_terms(phi: &Formula, out: &mut Vec<Term>) {
    match phi {
        Formula::Eq(l, r) => {
            out.push(l.clone());
            out.push(r.clone());
        }
        Formula::Not(f) => formula_terms(f, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for f in fs {
                formula_terms(f, out);
            }
        }
        Formula::Implies(a, b) => {
            formula_terms(a, out);
            formula_terms(b, out);
        }
        _ => panic!("quantifier reached the ground oracle"),
    }
}

fn innermost_ite(phi: &Formula) -> Option<Term> {
    let mut tops = Vec::new();
    formula_terms(phi, &mut tops);
    let mut found: Option<Term> = None;
    for top in tops {
        for sub in top.subterms() {
            if sub.head == Symbol::Op(ITE.to_string())
                && sub
                    .args
                    .iter()
                    .flat_map(|a| a.subterms())
                    .all(|s| s.head != Symbol::Op(ITE.to_string()))
            {
                found = Some(sub);
                break;
            }
        }
        if found.is_some() {
            break;
        }
    }
    found
}

type Cube = Vec<(Term, Term, bool)>;

fn cross(parts: Vec<Vec<Cube>>) -> Vec<Cube> {
    let mut acc: Vec<Cube> = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::new();
        for base in &acc {
            for cube in &part {
                let mut merged = base.clone();
                merged.extend(cube.iter().cloned());
                next.push(merged);
            }
        }
        acc = next;
    }
    acc
}

fn cubes_of(phi: &Formula, positive: bool) -> Vec<Cube> {
    match phi {
        Formula::Eq(l, r) => vec![vec![(l.clone(), r.clone(), positive)]],
        Formula::Not(f) => cubes_of(f, !positive),
        Formula::And(fs) => {
            if positive {
                cross(fs.iter().map(|f| cubes_of(f, true)).collect())
            } else {
                fs.iter().flat_map(|f| cubes_of(f, false)).collect()
            }
        }
        Formula::Or(fs) => {
            if positive {
                fs.iter().flat_map(|f| cubes_of(f, true)).collect()
            } else {
                cross(fs.iter().map(|f| cubes_of(f, false)).collect())
            }
        }
        Formula::Implies(a, b) => {
            if positive {
                let mut v = cubes_of(a, false);
                v.extend(cubes_of(b, true));
                v
            } else {
                cross(vec![cubes_of(a, true), cubes_of(b, false)])
            }
        }
        _ => panic!("quantifier reached the ground oracle"),
    }
}

fn cube_unsat(cube: &Cube) -> bool {
    let eqs: Vec<(Term, Term)> = cube
        .iter()
        .filter(|(_, _, pos)| *pos)
        .map(|(l, r, _)| (l.clone(), r.clone()))
        .collect();
    let extra: Vec<Term> = cube
        .iter()
        .flat_map(|(l, r, _)| [l.clone(), r.clone()])
        .collect();
    let p = oracle_partition(&eqs, &extra);
    cube.iter().any(|(l, r, pos)| !pos && p.same(l, r))
}

/// Ground validity by case analysis: split every embedded conditional,
/// then refute each cube of the negation with the congruence oracle.
pub fn oracle_valid(phi: &Formula) -> bool {
    if let Some(ite) = innermost_ite(phi) {
        let cond = term_to_formula(&ite.args[0]).expect("embedded condition");
        let then_case = phi.map_terms(&|t| replace_everywhere(t, &ite, &ite.args[1]));
        let else_case = phi.map_terms(&|t| replace_everywhere(t, &ite, &ite.args[2]));
        return oracle_valid(&Formula::implies(cond.clone(), then_case))
            && oracle_valid(&Formula::implies(Formula::not(cond), else_case));
    }
    cubes_of(phi, false).into_iter().all(|cube| cube_unsat(&cube))
}

fn subst_params(body: &Term, params: &[String], args: &[Term]) -> Term {
    match &body.head {
        Symbol::Param(p) => {
            let i = params.iter().position(|q| q == p).expect("unbound parameter");
            args[i].clone()
        }
        _ => Term {
            head: body.head.clone(),
            args: body
                .args
                .iter()
                .map(|b| subst_params(b, params, args))
                .collect(),
        },
    }
}

fn plug_term(t: &Term, target: &str, params: &[String], body: &Term) -> Term {
    let args: Vec<Term> = t
        .args
        .iter()
        .map(|a| plug_term(a, target, params, body))
        .collect();
    if t.head == Symbol::Op(target.to_string()) {
        return subst_params(body, params, &args);
    }
    Term {
        head: t.head.clone(),
        args,
    }
}

/// Second-order substitution done directly on the syntax tree.
pub fn oracle_plug(phi: &Formula, target: &str, params: &[String], body: &Term) -> Formula {
    phi.map_terms(&|t| plug_term(t, target, params, body))
}

fn find_nt_path(grammar: &TreeGrammar, t: &Term, path: &mut Vec<usize>) -> Option<String> {
    if let Symbol::Op(name) = &t.head {
        if t.args.is_empty() && grammar.is_nonterminal(name) {
            return Some(name.clone());
        }
    }
    for (i, a) in t.args.iter().enumerate() {
        path.push(i);
        if let Some(n) = find_nt_path(grammar, a, path) {
            return Some(n);
        }
        path.pop();
    }
    None
}

fn replace_at(t: &Term, path: &[usize], with: &Term) -> Term {
    if path.is_empty() {
        return with.clone();
    }
    let mut args = t.args.clone();
    args[path[0]] = replace_at(&args[path[0]], &path[1..], with);
    Term {
        head: t.head.clone(),
        args,
    }
}

/// Every complete derivation of a nonterminal up to the size bound, found
/// by expanding sentential forms leftmost-first.
pub fn oracle_enumerate(grammar: &TreeGrammar, nt: &str, max_size: usize) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    let mut work: Vec<Term> = grammar.rules(nt).to_vec();
    while let Some(form) = work.pop() {
        if form.size() > max_size {
            continue;
        }
        let mut path = Vec::new();
        match find_nt_path(grammar, &form, &mut path) {
            None => {
                out.insert(form);
            }
            Some(hole) => {
                for rule in grammar.rules(&hole) {
                    work.push(replace_at(&form, &path, rule));
                }
            }
        }
    }
    out
}

/// Does the grammar derive the term from the given nonterminal? Checked by
/// structural matching against every rule.
pub fn oracle_derives(grammar: &TreeGrammar, nt: &str, t: &Term) -> bool {
    grammar.rules(nt).iter().any(|rule| rule_matches(grammar, rule, t))
}

fn rule_matches(grammar: &TreeGrammar, rule: &Term, t: &Term) -> bool {
    if let Symbol::Op(name) = &rule.head {
        if rule.args.is_empty() && grammar.is_nonterminal(name) {
            return oracle_derives(grammar, name, t);
        }
    }
    rule.head == t.head
        && rule.args.len() == t.args.len()
        && rule
            .args
            .iter()
            .zip(&t.args)
            .all(|(r, u)| rule_matches(grammar, r, u))
}

/// Assignment tuples over a finite domain, first slot outermost.
pub fn oracle_assignments(k: usize, d: usize) -> Vec<Vec<usize>> {
    let total = d.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    for mut i in 0..total {
        let mut v = vec![0; k];
        for slot in (0..k).rev() {
            v[slot] = i % d;
            i /= d;
        }
        out.push(v);
    }
    out
}

pub fn oracle_eval_term(model: &FiniteModel, t: &Term, env: &BTreeMap<String, usize>) -> usize {
    match &t.head {
        Symbol::Param(p) => env[p.as_str()],
        Symbol::Op(name) => {
            if t.args.is_empty() {
                if let Some(v) = model.constant(name) {
                    return v;
                }
                return env[name.as_str()];
            }
            let args: Vec<usize> = t
                .args
                .iter()
                .map(|a| oracle_eval_term(model, a, env))
                .collect();
            let (_, table) = model.function(name).expect("uninterpreted function");
            let mut idx = 0usize;
            for v in args {
                idx = idx * model.domain() + v;
            }
            table[idx]
        }
    }
}

pub fn oracle_eval_formula(
    model: &FiniteModel,
    phi: &Formula,
    env: &BTreeMap<String, usize>,
) -> bool {
    match phi {
        Formula::Eq(l, r) => oracle_eval_term(model, l, env) == oracle_eval_term(model, r, env),
        Formula::Not(f) => !oracle_eval_formula(model, f, env),
        Formula::And(fs) => fs.iter().all(|f| oracle_eval_formula(model, f, env)),
        Formula::Or(fs) => fs.iter().any(|f| oracle_eval_formula(model, f, env)),
        Formula::Implies(a, b) => {
            !oracle_eval_formula(model, a, env) || oracle_eval_formula(model, b, env)
        }
        _ => panic!("quantifier reached the finite oracle"),
    }
}

/// The uninterpreted nullary symbols of a problem, in sorted order.
pub fn oracle_variables(problem: &SygusProblem, model: &FiniteModel) -> Vec<String> {
    problem
        .signature
        .symbols()
        .iter()
        .filter(|(name, arity)| **arity == 0 && model.constant(name.as_str()).is_none())
        .map(|(name, _)| name.clone())
        .collect()
}

/// Is the plugged constraint true under every assignment of the variables?
pub fn oracle_fd_valid(problem: &SygusProblem, model: &FiniteModel, body: &Term) -> bool {
    let plugged = oracle_plug(
        &problem.constraint,
        problem.signature.target(),
        problem.signature.params(),
        body,
    );
    let vars = oracle_variables(problem, model);
    oracle_assignments(vars.len(), model.domain())
        .into_iter()
        .all(|assign| {
            let env: BTreeMap<String, usize> = vars.iter().cloned().zip(assign).collect();
            oracle_eval_formula(model, &plugged, &env)
        })
}

/// Distinct denotations per nonterminal from brute-force derivation, keyed
/// the same way the fixpoint engine keys its tables.
pub fn oracle_fd_tables(
    problem: &SygusProblem,
    model: &FiniteModel,
    max_size: usize,
) -> BTreeMap<String, BTreeSet<Vec<usize>>> {
    let mut names = oracle_variables(problem, model);
    names.extend(problem.signature.params().iter().cloned());
    names.sort();
    let mut out = BTreeMap::new();
    for nt in problem.grammar.nonterminals() {
        let mut tables = BTreeSet::new();
        for body in oracle_enumerate(&problem.grammar, nt, max_size) {
            let table: Vec<usize> = oracle_assignments(names.len(), model.domain())
                .into_iter()
                .map(|assign| {
                    let env: BTreeMap<String, usize> =
                        names.iter().cloned().zip(assign).collect();
                    oracle_eval_term(model, &body, &env)
                })
                .collect();
            tables.insert(table);
        }
        out.insert(nt.clone(), tables);
    }
    out
}

pub fn rand_ground_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    let roll = rng.gen_range(0..if depth == 0 { 2 } else { 4 });
    match roll {
        0 => Term::constant("a"),
        1 => Term::constant("b"),
        2 => Term::op("g", vec![rand_ground_term(rng, depth - 1)]),
        _ => Term::op(
            "k",
            vec![
                rand_ground_term(rng, depth - 1),
                rand_ground_term(rng, depth - 1),
            ],
        ),
    }
}

fn rand_ite_term(rng: &mut ChaCha8Rng, depth: usize, budget: &mut usize) -> Term {
    if depth == 0 {
        return rand_ground_term(rng, 0);
    }
    match rng.gen_range(0..6) {
        0 | 1 => rand_ground_term(rng, depth),
        2 => Term::op("g", vec![rand_ite_term(rng, depth - 1, budget)]),
        3 => Term::op(
            "k",
            vec![
                rand_ite_term(rng, depth - 1, budget),
                rand_ground_term(rng, 1),
            ],
        ),
        _ if *budget > 0 => {
            *budget -= 1;
            let cond = Formula::Eq(rand_ground_term(rng, 1), rand_ground_term(rng, 1));
            Term::op(
                ITE,
                vec![
                    regsyn_core::formula::formula_to_term(&cond).unwrap(),
                    rand_ite_term(rng, depth - 1, budget),
                    rand_ite_term(rng, depth - 1, budget),
                ],
            )
        }
        _ => rand_ground_term(rng, depth),
    }
}

/// A random ground formula of the given connective depth whose equations
/// may contain embedded conditionals. The conditional count is capped so
/// clause normalization stays within its budget.
pub fn rand_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    let mut budget = 4usize;
    rand_formula_inner(rng, depth, &mut budget)
}

fn rand_formula_inner(rng: &mut ChaCha8Rng, depth: usize, budget: &mut usize) -> Formula {
    if depth == 0 {
        return Formula::Eq(
            rand_ite_term(rng, 2, budget),
            rand_ite_term(rng, 2, budget),
        );
    }
    match rng.gen_range(0..6) {
        0 => Formula::not(rand_formula_inner(rng, depth - 1, budget)),
        1 => Formula::And(
            (0..rng.gen_range(1..3))
                .map(|_| rand_formula_inner(rng, depth - 1, budget))
                .collect(),
        ),
        2 => Formula::Or(
            (0..rng.gen_range(1..3))
                .map(|_| rand_formula_inner(rng, depth - 1, budget))
                .collect(),
        ),
        3 => Formula::implies(
            rand_formula_inner(rng, depth - 1, budget),
            rand_formula_inner(rng, depth - 1, budget),
        ),
        _ => Formula::Eq(
            rand_ite_term(rng, 2, budget),
            rand_ite_term(rng, 2, budget),
        ),
    }
}

/// A subterm-closed support set of at most twelve terms.
pub fn rand_support(rng: &mut ChaCha8Rng) -> BTreeSet<Term> {
    loop {
        let n = rng.gen_range(1..4);
        let seeds: Vec<Term> = (0..n).map(|_| rand_ground_term(rng, 3)).collect();
        let closed = subterm_closure(seeds.iter());
        if closed.len() <= 12 {
            return closed;
        }
    }
}

pub fn rand_equations(rng: &mut ChaCha8Rng, support: &BTreeSet<Term>) -> Vec<(Term, Term)> {
    let pool: Vec<&Term> = support.iter().collect();
    (0..rng.gen_range(0..6))
        .map(|_| {
            (
                pool[rng.gen_range(0..pool.len())].clone(),
                pool[rng.gen_range(0..pool.len())].clone(),
            )
        })
        .collect()
}

pub fn ground_alphabet() -> BTreeMap<Symbol, usize> {
    BTreeMap::from([
        (Symbol::Op("a".to_string()), 0),
        (Symbol::Op("b".to_string()), 0),
        (Symbol::Op("g".to_string()), 1),
        (Symbol::Op("k".to_string()), 2),
    ])
}

/// A random trimmed automaton over a small fixed alphabet; retries until
/// the language is nonempty.
pub fn rand_automaton(rng: &mut ChaCha8Rng) -> TreeAutomaton {
    let alphabet = BTreeMap::from([
        (Symbol::Op("a".to_string()), 0),
        (Symbol::Op("g".to_string()), 1),
        (Symbol::Op("k".to_string()), 2),
    ]);
    loop {
        let n = rng.gen_range(1..4);
        let mut transitions = BTreeMap::new();
        if rng.gen_bool(0.9) {
            transitions.insert((Symbol::Op("a".to_string()), vec![]), rng.gen_range(0..n));
        }
        for q in 0..n {
            if rng.gen_bool(0.7) {
                transitions.insert((Symbol::Op("g".to_string()), vec![q]), rng.gen_range(0..n));
            }
            for r in 0..n {
                if rng.gen_bool(0.4) {
                    transitions.insert(
                        (Symbol::Op("k".to_string()), vec![q, r]),
                        rng.gen_range(0..n),
                    );
                }
            }
        }
        let mut accepting = BTreeSet::new();
        for q in 0..n {
            if rng.gen_bool(0.5) {
                accepting.insert(q);
            }
        }
        let raw = TreeAutomaton::new(alphabet.clone(), n, transitions, accepting)
            .expect("well-formed transitions");
        if let Ok(trimmed) = raw.trim() {
            return trimmed;
        }
    }
}

/// A random synthesis problem over one unary target whose constraint is a
/// small conjunction of clauses the automata engine accepts.
pub fn rand_regular_problem(rng: &mut ChaCha8Rng) -> SygusProblem {
    let symbols = BTreeMap::from([
        ("a".to_string(), 0),
        ("b".to_string(), 0),
        ("g".to_string(), 1),
    ]);
    let sig = Signature::new(symbols, "f", vec!["x1".to_string()]).unwrap();
    let leaves = [Term::constant("a"), Term::constant("b"), Term::param("x1")];
    let mut rules = vec![leaves[rng.gen_range(0..3)].clone()];
    for leaf in &leaves {
        if rng.gen_bool(0.4) && !rules.contains(leaf) {
            rules.push(leaf.clone());
        }
    }
    if rng.gen_bool(0.8) {
        rules.push(Term::op("g", vec![Term::constant("S")]));
    }
    let grammar = TreeGrammar::new(vec![("S".to_string(), rules)]).unwrap();
    let mut clauses: Vec<Formula> = (0..rng.gen_range(1..3))
        .map(|_| rand_regular_clause(rng))
        .collect();
    let constraint = if clauses.len() == 1 {
        clauses.pop().unwrap()
    } else {
        Formula::And(clauses)
    };
    SygusProblem::new(Theory::Euf, sig, grammar, constraint).unwrap()
}

fn shallow_ground(rng: &mut ChaCha8Rng) -> Term {
    let leaf = if rng.gen_bool(0.5) {
        Term::constant("a")
    } else {
        Term::constant("b")
    };
    match rng.gen_range(0..3) {
        0 => leaf,
        1 => Term::op("g", vec![leaf]),
        _ => Term::op("g", vec![Term::op("g", vec![leaf])]),
    }
}

fn target_equation(rng: &mut ChaCha8Rng) -> Formula {
    let call = Term::op("f", vec![shallow_ground(rng)]);
    let lhs = if rng.gen_bool(0.3) {
        Term::op("g", vec![call])
    } else {
        call
    };
    Formula::Eq(lhs, shallow_ground(rng))
}

fn ground_equation(rng: &mut ChaCha8Rng) -> Formula {
    Formula::Eq(shallow_ground(rng), shallow_ground(rng))
}

fn rand_regular_clause(rng: &mut ChaCha8Rng) -> Formula {
    match rng.gen_range(0..3) {
        0 => {
            let hyps: Vec<Formula> = (0..rng.gen_range(0..3))
                .map(|_| ground_equation(rng))
                .collect();
            let concl = Formula::Or(
                (0..rng.gen_range(1..3))
                    .map(|_| ground_equation(rng))
                    .collect(),
            );
            if hyps.is_empty() {
                concl
            } else {
                Formula::implies(Formula::And(hyps), concl)
            }
        }
        1 => {
            let hyps: Vec<Formula> = (0..rng.gen_range(0..3))
                .map(|_| ground_equation(rng))
                .collect();
            let mut concls = vec![target_equation(rng)];
            if rng.gen_bool(0.5) {
                concls.push(if rng.gen_bool(0.5) {
                    target_equation(rng)
                } else {
                    ground_equation(rng)
                });
            }
            let concl = Formula::Or(concls);
            if hyps.is_empty() {
                concl
            } else {
                Formula::implies(Formula::And(hyps), concl)
            }
        }
        _ => {
            let mut hyps = vec![target_equation(rng)];
            if rng.gen_bool(0.5) {
                hyps.push(ground_equation(rng));
            }
            let concl = Formula::Or(
                (0..rng.gen_range(1..3))
                    .map(|_| ground_equation(rng))
                    .collect(),
            );
            Formula::implies(Formula::And(hyps), concl)
        }
    }
}

/// A random synthesis problem over the two-valued model with a nullary
/// target, mixing connective shapes and grammar rules.
pub fn rand_boolean_problem(rng: &mut ChaCha8Rng) -> SygusProblem {
    let symbols = BTreeMap::from([
        ("x".to_string(), 0),
        ("y".to_string(), 0),
        ("tt".to_string(), 0),
        ("ff".to_string(), 0),
        ("not".to_string(), 1),
        ("and".to_string(), 2),
        ("or".to_string(), 2),
        ("xor".to_string(), 2),
    ]);
    let sig = Signature::new(symbols, "f", vec![]).unwrap();
    let s = || Term::constant("S");
    let pool = [
        Term::constant("x"),
        Term::constant("y"),
        Term::constant("tt"),
        Term::constant("ff"),
        Term::op("not", vec![s()]),
        Term::op("and", vec![s(), s()]),
        Term::op("or", vec![s(), s()]),
        Term::op("xor", vec![s(), s()]),
    ];
    let mut rules = vec![pool[rng.gen_range(0..4)].clone()];
    for rule in &pool {
        if rng.gen_bool(0.35) && !rules.contains(rule) {
            rules.push(rule.clone());
        }
    }
    let grammar = TreeGrammar::new(vec![("S".to_string(), rules)]).unwrap();
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => Term::constant("x"),
        1 => Term::constant("y"),
        2 => Term::constant("tt"),
        _ => Term::constant("ff"),
    };
    let call = Term::constant("f");
    let lhs = match rng.gen_range(0..3) {
        0 => call.clone(),
        1 => Term::op("xor", vec![call.clone(), leaf(rng)]),
        _ => Term::op("not", vec![call]),
    };
    let goal = Formula::Eq(lhs, leaf(rng));
    let constraint = if rng.gen_bool(0.3) {
        Formula::implies(Formula::Eq(Term::constant("x"), leaf(rng)), goal)
    } else {
        goal
    };
    SygusProblem::new(Theory::Fd, sig, grammar, constraint).unwrap()
}

/// Every term over the symbols and parameters up to the size bound.
pub fn all_terms(
    symbols: &[(&str, usize)],
    params: &[&str],
    max_size: usize,
) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max_size + 1];
    for p in params {
        by_size[1].push(Term::param(*p));
    }
    for s in 1..=max_size {
        for (name, arity) in symbols {
            match arity {
                0 if s == 1 => by_size[1].push(Term::constant(*name)),
                1 if s >= 2 => {
                    let inner = by_size[s - 1].clone();
                    for t in inner {
                        by_size[s].push(Term::op(*name, vec![t]));
                    }
                }
                2 if s >= 3 => {
                    for ls in 1..=(s - 2) {
                        let rs = s - 1 - ls;
                        let (left, right) = (by_size[ls].clone(), by_size[rs].clone());
                        for l in &left {
                            for r in &right {
                                by_size[s].push(Term::op(*name, vec![l.clone(), r.clone()]));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    by_size.concat()
}
