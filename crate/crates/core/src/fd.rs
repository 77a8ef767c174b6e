//! Solving over a finite interpreted domain.
//!
//! Every candidate body denotes a finite table: a function from assignments
//! of the problem's free variables and the target's bound variables to
//! domain elements. The grammar derives only finitely many distinct tables,
//! so a round-based closure enumerates them all, and the constraint is then
//! decided table by table. Verdicts from this engine are never `Unknown`.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formula::{term_to_formula, Formula};
use crate::problem::{SygusProblem, Verdict};
use crate::term::{Symbol, Term};

/// A fully interpreted finite structure. Elements are `0..domain`; every
/// element is the value of at least one named constant.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    domain: usize,
    constants: BTreeMap<String, usize>,
    functions: BTreeMap<String, (usize, Vec<usize>)>,
}

#[derive(Deserialize)]
struct ModelFile {
    domain: usize,
    #[serde(default)]
    constants: BTreeMap<String, usize>,
    #[serde(default)]
    functions: BTreeMap<String, FunctionFile>,
}

#[derive(Deserialize)]
struct FunctionFile {
    arity: usize,
    table: Vec<usize>,
}

impl FiniteModel {
    pub fn new(
        domain: usize,
        constants: BTreeMap<String, usize>,
        functions: BTreeMap<String, (usize, Vec<usize>)>,
    ) -> Result<FiniteModel> {
        if domain == 0 {
            return Err(Error::ModelMismatch("domain must be nonempty".to_string()));
        }
        let mut named = vec![false; domain];
        for (name, v) in &constants {
            if *v >= domain {
                return Err(Error::ModelMismatch(format!(
                    "constant {name} maps to {v}, outside the domain"
                )));
            }
            named[*v] = true;
        }
        if let Some(e) = named.iter().position(|n| !n) {
            return Err(Error::ModelMismatch(format!(
                "domain element {e} has no naming constant"
            )));
        }
        for (name, (arity, table)) in &functions {
            if constants.contains_key(name) {
                return Err(Error::DuplicateDeclaration(name.clone()));
            }
            let expect = domain.pow(*arity as u32);
            if table.len() != expect {
                return Err(Error::ModelMismatch(format!(
                    "function {name} needs {expect} table entries, has {}",
                    table.len()
                )));
            }
            if table.iter().any(|v| *v >= domain) {
                return Err(Error::ModelMismatch(format!(
                    "function {name} maps outside the domain"
                )));
            }
        }
        Ok(FiniteModel {
            domain,
            constants,
            functions,
        })
    }

    pub fn from_json(text: &str) -> Result<FiniteModel> {
        let raw: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::ModelMismatch(format!("model JSON: {e}")))?;
        FiniteModel::new(
            raw.domain,
            raw.constants,
            raw.functions
                .into_iter()
                .map(|(n, f)| (n, (f.arity, f.table)))
                .collect(),
        )
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn function(&self, name: &str) -> Option<(usize, &[usize])> {
        self.functions.get(name).map(|(a, t)| (*a, t.as_slice()))
    }

    fn apply(&self, name: &str, args: &[usize]) -> Result<usize> {
        let (arity, table) = self
            .functions
            .get(name)
            .ok_or_else(|| Error::ModelMismatch(format!("no interpretation for {name}")))?;
        if args.len() != *arity {
            return Err(Error::ArityMismatch {
                symbol: name.to_string(),
                expected: *arity,
                found: args.len(),
            });
        }
        let mut idx = 0usize;
        for a in args {
            idx = idx * self.domain + a;
        }
        Ok(table[idx])
    }
}

/// The two-element structure with the usual connectives: `ff`, `tt`,
/// `not`, `and`, `or`, `xor`.
pub fn boolean_model() -> FiniteModel {
    FiniteModel::new(
        2,
        BTreeMap::from([("ff".to_string(), 0), ("tt".to_string(), 1)]),
        BTreeMap::from([
            ("not".to_string(), (1, vec![1, 0])),
            ("and".to_string(), (2, vec![0, 0, 0, 1])),
            ("or".to_string(), (2, vec![0, 1, 1, 1])),
            ("xor".to_string(), (2, vec![0, 1, 1, 0])),
        ]),
    )
    .expect("fixed model is well formed")
}

/// Bit vectors of the given width as the domain `0..2^width` with bitwise
/// `and`, `or`, `xor`, `not`, addition and left shift, plus one naming
/// constant per element (`c0`, `c1`, ...).
pub fn bv_model(width: u32) -> Result<FiniteModel> {
    if width == 0 {
        return Err(Error::ModelMismatch("width must be positive".to_string()));
    }
    if width > 4 {
        return Err(Error::ResourceLimit(format!(
            "bit-vector width {width} exceeds 4"
        )));
    }
    let d = 1usize << width;
    let mask = d - 1;
    let constants = (0..d).map(|v| (format!("c{v}"), v)).collect();
    let unary = |f: &dyn Fn(usize) -> usize| (1, (0..d).map(|x| f(x) & mask).collect());
    let binary = |f: &dyn Fn(usize, usize) -> usize| {
        (
            2,
            (0..d)
                .flat_map(|x| (0..d).map(move |y| f(x, y) & mask))
                .collect(),
        )
    };
    FiniteModel::new(
        d,
        constants,
        BTreeMap::from([
            ("not".to_string(), unary(&|x| !x)),
            ("shl1".to_string(), unary(&|x| x << 1)),
            ("and".to_string(), binary(&|x, y| x & y)),
            ("or".to_string(), binary(&|x, y| x | y)),
            ("xor".to_string(), binary(&|x, y| x ^ y)),
            ("add".to_string(), binary(&|x, y| x + y)),
        ]),
    )
}

/// Evaluate a term under an assignment of the free variables (and bound
/// variables, during table construction). `candidate` interprets the
/// synthesis target when it occurs.
pub fn eval_term(
    model: &FiniteModel,
    t: &Term,
    env: &BTreeMap<String, usize>,
    candidate: Option<&CandidateFn>,
) -> Result<usize> {
    match &t.head {
        Symbol::Param(x) => env
            .get(x)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(x.clone())),
        Symbol::Op(name) if name == crate::term::ITE => {
            let cond = term_to_formula(&t.args[0])?;
            if eval_formula(model, &cond, env, candidate)? {
                eval_term(model, &t.args[1], env, candidate)
            } else {
                eval_term(model, &t.args[2], env, candidate)
            }
        }
        Symbol::Op(name) => {
            if let Some(c) = candidate {
                if name == &c.target {
                    let args = t
                        .args
                        .iter()
                        .map(|a| eval_term(model, a, env, candidate))
                        .collect::<Result<Vec<_>>>()?;
                    return c.apply(env, &args);
                }
            }
            if t.args.is_empty() {
                if let Some(v) = model.constant(name) {
                    return Ok(v);
                }
                if let Some(v) = env.get(name) {
                    return Ok(*v);
                }
            }
            let args = t
                .args
                .iter()
                .map(|a| eval_term(model, a, env, candidate))
                .collect::<Result<Vec<_>>>()?;
            model.apply(name, &args)
        }
    }
}

/// Evaluate a formula; quantifiers range over the domain.
pub fn eval_formula(
    model: &FiniteModel,
    phi: &Formula,
    env: &BTreeMap<String, usize>,
    candidate: Option<&CandidateFn>,
) -> Result<bool> {
    match phi {
        Formula::Eq(s, t) => Ok(eval_term(model, s, env, candidate)?
            == eval_term(model, t, env, candidate)?),
        Formula::Not(f) => Ok(!eval_formula(model, f, env, candidate)?),
        Formula::And(fs) => {
            for f in fs {
                if !eval_formula(model, f, env, candidate)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(fs) => {
            for f in fs {
                if eval_formula(model, f, env, candidate)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Implies(a, b) => Ok(!eval_formula(model, a, env, candidate)?
            || eval_formula(model, b, env, candidate)?),
        Formula::Forall(vars, body) => {
            quantify(model, vars, body, env, candidate, true)
        }
        Formula::Exists(vars, body) => {
            quantify(model, vars, body, env, candidate, false)
        }
    }
}

fn quantify(
    model: &FiniteModel,
    vars: &[String],
    body: &Formula,
    env: &BTreeMap<String, usize>,
    candidate: Option<&CandidateFn>,
    universal: bool,
) -> Result<bool> {
    let mut env = env.clone();
    for assign in assignments(vars.len(), model.domain()) {
        for (v, val) in vars.iter().zip(&assign) {
            env.insert(v.clone(), *val);
        }
        let r = eval_formula(model, body, &env, candidate)?;
        if universal && !r {
            return Ok(false);
        }
        if !universal && r {
            return Ok(true);
        }
    }
    Ok(universal)
}

/// All assignments of `k` slots over `0..d`, first slot outermost.
fn assignments(k: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..d.pow(k as u32)).map(move |mut idx| {
        let mut v = vec![0; k];
        for slot in v.iter_mut().rev() {
            *slot = idx % d;
            idx /= d;
        }
        v
    })
}

/// The denotation of a candidate body: a table over the problem variables
/// and the target's bound variables, in sorted name order with the first
/// name outermost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateFn {
    pub target: String,
    pub params: Vec<String>,
    pub variables: Vec<String>,
    pub domain: usize,
    pub table: Vec<usize>,
}

impl CandidateFn {
    fn apply(&self, env: &BTreeMap<String, usize>, args: &[usize]) -> Result<usize> {
        if args.len() != self.params.len() {
            return Err(Error::ArityMismatch {
                symbol: self.target.clone(),
                expected: self.params.len(),
                found: args.len(),
            });
        }
        let mut idx = 0usize;
        for name in &self.variables {
            let v = match self.params.iter().position(|p| p == name) {
                Some(i) => args[i],
                None => env
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?,
            };
            idx = idx * self.domain + v;
        }
        Ok(self.table[idx])
    }
}

/// The free variables of a finite-domain problem: declared nullary symbols
/// the model leaves uninterpreted. Symbols of positive arity must all be
/// interpreted.
pub fn problem_variables(problem: &SygusProblem, model: &FiniteModel) -> Result<Vec<String>> {
    let mut vars = Vec::new();
    for (name, arity) in problem.signature.symbols() {
        if *arity == 0 {
            if model.constant(name).is_none() {
                if model.function(name).is_some() {
                    return Err(Error::ModelMismatch(format!(
                        "{name} is declared as a constant but interpreted as a function"
                    )));
                }
                vars.push(name.clone());
            }
        } else {
            match model.function(name) {
                Some((a, _)) if a == *arity => {}
                Some((a, _)) => {
                    return Err(Error::ModelMismatch(format!(
                        "{name} is declared with arity {arity} but interpreted with arity {a}"
                    )))
                }
                None => {
                    return Err(Error::ModelMismatch(format!(
                        "no interpretation for {name}"
                    )))
                }
            }
        }
    }
    Ok(vars)
}

fn table_names(problem: &SygusProblem, vars: &[String]) -> Vec<String> {
    let mut names: Vec<String> = vars.to_vec();
    names.extend(problem.signature.params().iter().cloned());
    names.sort();
    names
}

fn table_of(model: &FiniteModel, body: &Term, names: &[String]) -> Result<Vec<usize>> {
    let mut table = Vec::new();
    for assign in assignments(names.len(), model.domain()) {
        let env = names.iter().cloned().zip(assign).collect();
        table.push(eval_term(model, body, &env, None)?);
    }
    Ok(table)
}

/// One nonterminal's enumeration state: representative terms in discovery
/// order, each with its table.
pub type TableSets = BTreeMap<String, Vec<(Term, Vec<usize>)>>;

const TABLE_LIMIT: usize = 100_000;

/// Round-based closure of the grammar under the model: each round plugs the
/// previous round's sets into every production and keeps entries whose table
/// is new. The result has one entry per derivable denotation. When `trace`
/// is given, the state after each round is appended to it.
pub fn fixpoint_enumerate(
    problem: &SygusProblem,
    model: &FiniteModel,
    mut trace: Option<&mut Vec<TableSets>>,
) -> Result<TableSets> {
    let vars = problem_variables(problem, model)?;
    let names = table_names(problem, &vars);
    let g = &problem.grammar;
    let mut sets: TableSets = g
        .nonterminals()
        .iter()
        .map(|nt| (nt.clone(), Vec::new()))
        .collect();
    loop {
        let snapshot = sets.clone();
        let mut grew = false;
        for nt in g.nonterminals() {
            for body in g.rules(nt) {
                let slots = nt_leaf_names(body, g);
                let pools: Vec<&[(Term, Vec<usize>)]> =
                    slots.iter().map(|s| snapshot[s].as_slice()).collect();
                if pools.iter().any(|p| p.is_empty()) {
                    continue;
                }
                let combos: Box<dyn Iterator<Item = Vec<&(Term, Vec<usize>)>>> =
                    if pools.is_empty() {
                        Box::new(std::iter::once(Vec::new()))
                    } else {
                        Box::new(pools.iter().map(|p| p.iter()).multi_cartesian_product())
                    };
                for combo in combos {
                    let mut fills = combo.iter().map(|(t, _)| t);
                    let term = fill_leaves(body, g, &mut fills);
                    let table = table_of(model, &term, &names)?;
                    let entries = sets.get_mut(nt).expect("every nonterminal has a set");
                    if entries.iter().all(|(_, t)| *t != table) {
                        entries.push((term, table));
                        grew = true;
                        if sets.values().map(Vec::len).sum::<usize>() > TABLE_LIMIT {
                            return Err(Error::ResourceLimit(format!(
                                "more than {TABLE_LIMIT} distinct tables"
                            )));
                        }
                    }
                }
            }
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(sets.clone());
        }
        if !grew {
            return Ok(sets);
        }
    }
}

fn nt_leaf_names(body: &Term, g: &crate::automata::TreeGrammar) -> Vec<String> {
    let mut out = Vec::new();
    fn go(t: &Term, g: &crate::automata::TreeGrammar, out: &mut Vec<String>) {
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

fn fill_leaves<'a>(
    body: &Term,
    g: &crate::automata::TreeGrammar,
    fills: &mut impl Iterator<Item = &'a Term>,
) -> Term {
    if let Symbol::Op(name) = &body.head {
        if body.args.is_empty() && g.is_nonterminal(name) {
            return fills.next().expect("one fill per leaf").clone();
        }
    }
    Term {
        head: body.head.clone(),
        args: body
            .args
            .iter()
            .map(|a| fill_leaves(a, g, fills))
            .collect(),
    }
}

/// Is the constraint true under every assignment of the free variables,
/// with the target bound to the candidate table?
pub fn constraint_valid(
    problem: &SygusProblem,
    model: &FiniteModel,
    candidate: &CandidateFn,
) -> Result<bool> {
    let vars: Vec<String> = candidate
        .variables
        .iter()
        .filter(|v| !candidate.params.contains(v))
        .cloned()
        .collect();
    for assign in assignments(vars.len(), model.domain()) {
        let env = vars.iter().cloned().zip(assign).collect();
        if !eval_formula(model, &problem.constraint, &env, Some(candidate))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The candidate function a body denotes over the model.
pub fn candidate_of(
    problem: &SygusProblem,
    model: &FiniteModel,
    body: &Term,
) -> Result<CandidateFn> {
    let vars = problem_variables(problem, model)?;
    let names = table_names(problem, &vars);
    let table = table_of(model, body, &names)?;
    Ok(CandidateFn {
        target: problem.signature.target().to_string(),
        params: problem.signature.params().to_vec(),
        variables: names,
        domain: model.domain(),
        table,
    })
}

/// Does the body satisfy the constraint under every assignment?
pub fn check_candidate(problem: &SygusProblem, model: &FiniteModel, body: &Term) -> Result<bool> {
    let candidate = candidate_of(problem, model, body)?;
    constraint_valid(problem, model, &candidate)
}

/// Decide the problem over the model: enumerate every derivable table and
/// test them in discovery order.
pub fn solve_fd(problem: &SygusProblem, model: &FiniteModel) -> Result<Verdict> {
    let vars = problem_variables(problem, model)?;
    let names = table_names(problem, &vars);
    let sets = fixpoint_enumerate(problem, model, None)?;
    for (term, table) in &sets[problem.grammar.start()] {
        let candidate = CandidateFn {
            target: problem.signature.target().to_string(),
            params: problem.signature.params().to_vec(),
            variables: names.clone(),
            domain: model.domain(),
            table: table.clone(),
        };
        if constraint_valid(problem, model, &candidate)? {
            return Ok(Verdict::solvable(term.clone(), None));
        }
    }
    Ok(Verdict::Unsolvable)
}
