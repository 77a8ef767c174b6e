//! Generators that compile classic hard problems into synthesis problems,
//! the matching candidate checkers, and a bounded search engine.
//!
//! Each generator is deterministic: equal inputs give byte-identical
//! problems. The checkers decide candidate correctness directly, without
//! going through equational reasoning, so they stay usable on instances the
//! automata-based solver rejects.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::automata::TreeGrammar;
use crate::error::{Error, Result};
use crate::formula::{formula_to_term, Formula};
use crate::parser::{read_sexps, syntax, Sexp};
use crate::problem::{SygusProblem, Theory, Verdict};
use crate::term::{Signature, Symbol, Term, ITE};

const ENUM_LIMIT: usize = 1_000_000;

/// A word-matching instance: pairs of nonempty strings over {a, b}. A
/// solution is a nonempty index sequence under which the left and right
/// concatenations agree. `y_bound` caps the instantiation depth of the
/// universally intended equation schemas in the emitted problems.
#[derive(Debug, Clone)]
pub struct PcpInstance {
    pairs: Vec<(String, String)>,
    y_bound: usize,
}

#[derive(Deserialize)]
struct PcpFile {
    pairs: Vec<(String, String)>,
    #[serde(default = "default_y_bound")]
    y_bound: usize,
}

fn default_y_bound() -> usize {
    4
}

impl PcpInstance {
    pub fn new(pairs: Vec<(String, String)>, y_bound: usize) -> Result<PcpInstance> {
        if pairs.is_empty() {
            return Err(Error::Unsupported("word instance needs pairs".to_string()));
        }
        for (l, r) in &pairs {
            if l.is_empty() || r.is_empty() {
                return Err(Error::Unsupported("pair strings must be nonempty".to_string()));
            }
            if l.chars().chain(r.chars()).any(|c| c != 'a' && c != 'b') {
                return Err(Error::Unsupported(format!(
                    "pair ({l}, {r}) uses letters outside a, b"
                )));
            }
        }
        Ok(PcpInstance { pairs, y_bound })
    }

    pub fn from_json(text: &str) -> Result<PcpInstance> {
        let raw: PcpFile = serde_json::from_str(text)
            .map_err(|e| Error::Unsupported(format!("word-instance JSON: {e}")))?;
        PcpInstance::new(raw.pairs, raw.y_bound)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn y_bound(&self) -> usize {
        self.y_bound
    }
}

fn letter_symbol(c: char, primed: bool) -> String {
    if primed {
        format!("gp{c}")
    } else {
        format!("g{c}")
    }
}

/// Wrap `inner` in the unary encoding of `word`, first letter outermost.
fn encode_word(word: &str, primed: bool, inner: Term) -> Term {
    word.chars().rev().fold(inner, |t, c| {
        Term::op(letter_symbol(c, primed), vec![t])
    })
}

fn pair_block(pair: &(String, String), inner: Term) -> Term {
    encode_word(&pair.0, false, encode_word(&pair.1, true, inner))
}

const UNPRIMED: [&str; 2] = ["ga", "gb"];
const PRIMED: [&str; 2] = ["gpa", "gpb"];

fn pcp_symbols() -> BTreeMap<String, usize> {
    let mut syms = BTreeMap::new();
    syms.insert("x".to_string(), 0);
    for s in UNPRIMED.iter().chain(PRIMED.iter()) {
        syms.insert(s.to_string(), 1);
    }
    syms.insert("h".to_string(), 1);
    syms
}

/// Ground instances of the commutation and cancellation schemas: primed
/// letters commute past unprimed ones, and a matched unprimed/primed pair
/// cancels directly under `h`. Instantiated at every letter chain over `x`
/// up to the given length.
fn schema_instances(y_bound: usize) -> Vec<Formula> {
    let mut chains = vec![Term::constant("x")];
    let mut layer = vec![Term::constant("x")];
    for _ in 0..y_bound {
        let mut next = Vec::new();
        for sym in UNPRIMED.iter().chain(PRIMED.iter()) {
            for t in &layer {
                next.push(Term::op(*sym, vec![t.clone()]));
            }
        }
        chains.extend(next.iter().cloned());
        layer = next;
    }
    let mut out = Vec::new();
    for y in &chains {
        for u in UNPRIMED {
            for p in PRIMED {
                out.push(Formula::Eq(
                    Term::op(u, vec![Term::op(p, vec![y.clone()])]),
                    Term::op(p, vec![Term::op(u, vec![y.clone()])]),
                ));
            }
        }
        for (u, p) in UNPRIMED.iter().zip(PRIMED.iter()) {
            out.push(Formula::Eq(
                Term::op("h", vec![Term::op(*u, vec![Term::op(*p, vec![y.clone()])])]),
                Term::op("h", vec![y.clone()]),
            ));
        }
    }
    out
}

fn pcp_grammar(p: &PcpInstance) -> Result<TreeGrammar> {
    let v = Term::constant("V");
    let blocks: Vec<Term> = p.pairs.iter().map(|pr| pair_block(pr, v.clone())).collect();
    let mut v_rules = blocks.clone();
    v_rules.push(Term::constant("x"));
    TreeGrammar::new(vec![("S".to_string(), blocks), ("V".to_string(), v_rules)])
}

fn pcp_constraint(p: &PcpInstance) -> Formula {
    let f = Term::op("f", vec![]);
    let goal = Formula::Eq(
        Term::op("h", vec![f]),
        Term::op("h", vec![Term::constant("x")]),
    );
    Formula::Implies(
        Box::new(Formula::And(schema_instances(p.y_bound))),
        Box::new(goal),
    )
}

/// Word-matching instance as a synthesis problem over unary symbols: the
/// grammar derives encoded index sequences, and a candidate satisfies the
/// constraint exactly when its two concatenations agree (up to the schema
/// instantiation bound).
pub fn gen_pcp_tree(p: &PcpInstance) -> Result<SygusProblem> {
    let sig = Signature::new(pcp_symbols(), "f", vec![])?;
    SygusProblem::new(Theory::Euf, sig, pcp_grammar(p)?, pcp_constraint(p))
}

/// The same construction with every unary application `g(t)` recast as a
/// lookup `read(g, t)`, so all letter symbols become constants.
pub fn gen_pcp_arrays(p: &PcpInstance) -> Result<SygusProblem> {
    let tree = gen_pcp_tree(p)?;
    let mut syms = BTreeMap::new();
    syms.insert("x".to_string(), 0);
    syms.insert("read".to_string(), 2);
    for s in UNPRIMED.iter().chain(PRIMED.iter()).chain(["h"].iter()) {
        syms.insert(s.to_string(), 0);
    }
    let sig = Signature::new(syms, "f", vec![])?;
    let blocks = |nt: &str| -> Vec<Term> {
        tree.grammar.rules(nt).iter().map(to_reads).collect()
    };
    let grammar = TreeGrammar::new(vec![
        ("S".to_string(), blocks("S")),
        ("V".to_string(), blocks("V")),
    ])?;
    let constraint = tree.constraint.map_terms(&to_reads);
    SygusProblem::new(Theory::Euf, sig, grammar, constraint)
}

fn to_reads(t: &Term) -> Term {
    if let Symbol::Op(name) = &t.head {
        if t.args.len() == 1 && is_letter_or_h(name) {
            return Term::op(
                "read",
                vec![Term::constant(name.clone()), to_reads(&t.args[0])],
            );
        }
    }
    Term {
        head: t.head.clone(),
        args: t.args.iter().map(to_reads).collect(),
    }
}

fn is_letter_or_h(name: &str) -> bool {
    name == "h" || UNPRIMED.contains(&name) || PRIMED.contains(&name)
}

/// A grammar over string tokens. Productions may be context-free; the
/// single-nonterminal-last shape used by the right-regular variant is just a
/// special case. Construction rejects empty alternatives.
#[derive(Debug, Clone)]
pub struct StringGrammar {
    start: String,
    productions: Vec<(String, Vec<String>)>,
    lhs: BTreeSet<String>,
}

impl StringGrammar {
    pub fn new(productions: Vec<(String, Vec<String>)>) -> Result<StringGrammar> {
        let Some((start, _)) = productions.first() else {
            return Err(Error::Unsupported("grammar needs productions".to_string()));
        };
        if let Some((lhs, _)) = productions.iter().find(|(_, rhs)| rhs.is_empty()) {
            return Err(Error::Unsupported(format!(
                "empty production for {lhs}"
            )));
        }
        let start = start.clone();
        let lhs = productions.iter().map(|(l, _)| l.clone()).collect();
        Ok(StringGrammar {
            start,
            productions,
            lhs,
        })
    }

    /// Parse the line format `N -> tok tok | tok`, one nonterminal per line
    /// (repeated lines extend it). The first line's nonterminal starts.
    pub fn from_bnf(text: &str) -> Result<StringGrammar> {
        let mut productions = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with(';') {
                continue;
            }
            let Some((lhs, rhs)) = line.split_once("->") else {
                return Err(syntax(i + 1, 1, "expected 'N -> alternatives'"));
            };
            let lhs = lhs.trim();
            if lhs.is_empty() || lhs.split_whitespace().count() != 1 {
                return Err(syntax(i + 1, 1, "left side must be one nonterminal"));
            }
            for alt in rhs.split('|') {
                let tokens: Vec<String> =
                    alt.split_whitespace().map(str::to_string).collect();
                if tokens.is_empty() {
                    return Err(syntax(i + 1, 1, "empty alternative is not allowed"));
                }
                productions.push((lhs.to_string(), tokens));
            }
        }
        StringGrammar::new(productions)
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn productions(&self) -> &[(String, Vec<String>)] {
        &self.productions
    }

    pub fn is_nonterminal(&self, tok: &str) -> bool {
        self.lhs.contains(tok)
    }

    pub fn terminals(&self) -> BTreeSet<String> {
        self.productions
            .iter()
            .flat_map(|(_, rhs)| rhs.iter())
            .filter(|t| !self.is_nonterminal(t))
            .cloned()
            .collect()
    }

    /// All derivable words of at most `max_tokens` tokens, sorted. Every
    /// production emits at least one token, so leftmost expansion with a
    /// length cutoff terminates; `limit` bounds the explored forms.
    pub fn enumerate_words(&self, max_tokens: usize, limit: usize) -> Result<Vec<Vec<String>>> {
        #[derive(Clone)]
        enum Piece {
            Word(String),
            Hole(String),
        }
        let mut words = BTreeSet::new();
        let mut work = vec![vec![Piece::Hole(self.start.clone())]];
        let mut seen = 0usize;
        while let Some(form) = work.pop() {
            seen += 1;
            if seen > limit {
                return Err(Error::ResourceLimit(format!(
                    "more than {limit} sentential forms"
                )));
            }
            if form.len() > max_tokens {
                continue;
            }
            let Some(at) = form.iter().position(|p| matches!(p, Piece::Hole(_))) else {
                words.insert(
                    form.iter()
                        .map(|p| match p {
                            Piece::Word(w) => w.clone(),
                            Piece::Hole(_) => unreachable!(),
                        })
                        .collect(),
                );
                continue;
            };
            let Piece::Hole(nt) = &form[at] else {
                unreachable!()
            };
            for (lhs, rhs) in &self.productions {
                if lhs != nt {
                    continue;
                }
                let mut next = form[..at].to_vec();
                for tok in rhs {
                    if self.is_nonterminal(tok) {
                        next.push(Piece::Hole(tok.clone()));
                    } else {
                        next.push(Piece::Word(tok.clone()));
                    }
                }
                next.extend(form[at + 1..].iter().cloned());
                work.push(next);
            }
        }
        Ok(words.into_iter().collect())
    }

    pub fn to_text(&self) -> String {
        let mut order = Vec::new();
        for (lhs, _) in &self.productions {
            if !order.contains(lhs) {
                order.push(lhs.clone());
            }
        }
        let mut out = String::new();
        for nt in order {
            let alts: Vec<String> = self
                .productions
                .iter()
                .filter(|(l, _)| *l == nt)
                .map(|(_, rhs)| rhs.join(" "))
                .collect();
            out.push_str(&format!("{nt} -> {}\n", alts.join(" | ")));
        }
        out
    }
}

/// The right-regular word grammar from the regular-grammar variant: one
/// token per opening application, dedicated closer rules, and a `V -> x V`
/// production so the well-formed fragment matches the tree grammar.
pub fn pcp_string_grammar(p: &PcpInstance) -> StringGrammar {
    let mut productions = vec![
        ("S".to_string(), vec!["x".to_string(), "V".to_string()]),
        ("V".to_string(), vec![")".to_string(), "V".to_string()]),
        ("V".to_string(), vec![")".to_string()]),
        ("V".to_string(), vec!["x".to_string(), "V".to_string()]),
    ];
    for pair in &p.pairs {
        let mut tokens: Vec<String> = pair
            .0
            .chars()
            .map(|c| format!("{}(", letter_symbol(c, false)))
            .collect();
        tokens.extend(
            pair.1
                .chars()
                .map(|c| format!("{}(", letter_symbol(c, true))),
        );
        tokens.push("V".to_string());
        productions.push(("S".to_string(), tokens.clone()));
        productions.push(("V".to_string(), tokens));
    }
    StringGrammar::new(productions).expect("fixed shape is well formed")
}

/// Parse a token word of the right-regular grammar back into a term:
/// opening tokens, one `x`, and exactly matching closers. Anything else is
/// not a well-formed expression.
pub fn word_to_term(tokens: &[String]) -> Option<Term> {
    let mut opens = Vec::new();
    let mut i = 0;
    while i < tokens.len() && tokens[i].ends_with('(') && tokens[i].len() > 1 {
        opens.push(&tokens[i][..tokens[i].len() - 1]);
        i += 1;
    }
    if i >= tokens.len() || tokens[i] != "x" {
        return None;
    }
    i += 1;
    for _ in &opens {
        if i >= tokens.len() || tokens[i] != ")" {
            return None;
        }
        i += 1;
    }
    if i != tokens.len() {
        return None;
    }
    Some(
        opens
            .iter()
            .rev()
            .fold(Term::constant("x"), |t, name| Term::op(*name, vec![t])),
    )
}

/// The regular-grammar variant: the same synthesis problem, paired with the
/// right-regular string grammar whose well-formed words spell exactly the
/// tree grammar's language.
pub fn gen_pcp_regular(p: &PcpInstance) -> Result<(SygusProblem, StringGrammar)> {
    Ok((gen_pcp_tree(p)?, pcp_string_grammar(p)))
}

/// Decode a candidate's unary spine into an index sequence by greedy
/// longest match of the pair blocks, then compare the two concatenations.
/// Accepts both the unary and the `read`-encoded spellings.
pub fn check_pcp_candidate(p: &PcpInstance, w: &Term) -> Result<bool> {
    let spine = spine_symbols(w)?;
    let indices = decode_indices(p, &spine)?;
    let left: String = indices.iter().map(|i| p.pairs[*i].0.as_str()).collect();
    let right: String = indices.iter().map(|i| p.pairs[*i].1.as_str()).collect();
    Ok(left == right)
}

fn spine_symbols(w: &Term) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut t = w;
    loop {
        match &t.head {
            Symbol::Op(name) if name == "x" && t.args.is_empty() => return Ok(out),
            Symbol::Op(name)
                if t.args.len() == 1 && (UNPRIMED.contains(&name.as_str()) || PRIMED.contains(&name.as_str())) =>
            {
                out.push(name.clone());
                t = &t.args[0];
            }
            Symbol::Op(name) if name == "read" && t.args.len() == 2 => {
                let Symbol::Op(g) = &t.args[0].head else {
                    return Err(Error::MalformedCandidate(format!("bad lookup in {w}")));
                };
                if !t.args[0].args.is_empty()
                    || !(UNPRIMED.contains(&g.as_str()) || PRIMED.contains(&g.as_str()))
                {
                    return Err(Error::MalformedCandidate(format!("bad lookup in {w}")));
                }
                out.push(g.clone());
                t = &t.args[1];
            }
            _ => {
                return Err(Error::MalformedCandidate(format!(
                    "{w} is not an encoded index sequence"
                )))
            }
        }
    }
}

fn decode_indices(p: &PcpInstance, spine: &[String]) -> Result<Vec<usize>> {
    let blocks: Vec<Vec<String>> = p
        .pairs
        .iter()
        .map(|(l, r)| {
            l.chars()
                .map(|c| letter_symbol(c, false))
                .chain(r.chars().map(|c| letter_symbol(c, true)))
                .collect()
        })
        .collect();
    if spine.is_empty() {
        return Err(Error::MalformedCandidate(
            "candidate encodes the empty index sequence".to_string(),
        ));
    }
    let mut indices = Vec::new();
    let mut at = 0;
    while at < spine.len() {
        let mut best: Option<usize> = None;
        for (i, block) in blocks.iter().enumerate() {
            if spine[at..].starts_with(block)
                && best.map_or(true, |b| blocks[b].len() < block.len())
            {
                best = Some(i);
            }
        }
        let Some(i) = best else {
            return Err(Error::MalformedCandidate(format!(
                "no pair block matches at position {at}"
            )));
        };
        indices.push(i);
        at += blocks[i].len();
    }
    Ok(indices)
}

/// Evaluate a term in the pair-of-strings structure that refutes
/// non-solutions: `x` is a pair of empty strings, unprimed letters prepend
/// to the first string, primed letters to the second, and `h` strips the
/// longest common prefix.
pub fn eval_pair(t: &Term) -> Result<(String, String)> {
    let Symbol::Op(name) = &t.head else {
        return Err(Error::MalformedCandidate(format!("{t} has no pair value")));
    };
    if name == "read" && t.args.len() == 2 {
        if let Symbol::Op(g) = &t.args[0].head {
            if t.args[0].args.is_empty() {
                return eval_pair(&Term::op(g.clone(), vec![t.args[1].clone()]));
            }
        }
        return Err(Error::MalformedCandidate(format!("{t} has no pair value")));
    }
    match (name.as_str(), t.args.len()) {
        ("x", 0) => Ok((String::new(), String::new())),
        ("ga", 1) | ("gb", 1) | ("gpa", 1) | ("gpb", 1) => {
            let (mut u, mut v) = eval_pair(&t.args[0])?;
            let c = name.chars().last().expect("letter symbol");
            if name.starts_with("gp") {
                v.insert(0, c);
            } else {
                u.insert(0, c);
            }
            Ok((u, v))
        }
        ("h", 1) => {
            let (u, v) = eval_pair(&t.args[0])?;
            let k = u
                .chars()
                .zip(v.chars())
                .take_while(|(a, b)| a == b)
                .count();
            Ok((u[k..].to_string(), v[k..].to_string()))
        }
        _ => Err(Error::MalformedCandidate(format!("{t} has no pair value"))),
    }
}

/// The arity-mismatch variant: a context-free word grammar whose derivations
/// spell well-formed terms over `f` (arity `m`) and `g` (arity `n`) exactly
/// when the underlying index sequence is a solution. Letters `a` map to `f`
/// applications and `b` to `g` applications; argument-list tails are padded
/// with `x` and emitted in reverse.
pub fn gen_pcp_wellformed(p: &PcpInstance, m: usize, n: usize) -> Result<StringGrammar> {
    if m == 0 || n == 0 || m == n {
        return Err(Error::Unsupported(
            "arities must be distinct and positive".to_string(),
        ));
    }
    let opener = |word: &str| -> String {
        word.chars()
            .map(|c| if c == 'a' { "f(" } else { "g(" })
            .collect()
    };
    let closer = |word: &str| -> String {
        word.chars()
            .rev()
            .map(|c| {
                let arity = if c == 'a' { m } else { n };
                format!("{})", ",x".repeat(arity - 1))
            })
            .collect()
    };
    let mut productions = Vec::new();
    for nt in ["S", "V"] {
        for pair in &p.pairs {
            productions.push((
                nt.to_string(),
                vec![opener(&pair.0), "V".to_string(), closer(&pair.1)],
            ));
        }
    }
    productions.push(("V".to_string(), vec!["x".to_string()]));
    StringGrammar::new(productions)
}

/// Does the concatenated word parse as a well-formed term over `f` of arity
/// `m`, `g` of arity `n`, and the leaf `x`?
pub fn check_wellformed_candidate(word: &str, m: usize, n: usize) -> bool {
    fn parse(s: &[u8], at: usize, m: usize, n: usize) -> Option<usize> {
        if s.get(at) == Some(&b'x') {
            return Some(at + 1);
        }
        let arity = match s.get(at) {
            Some(b'f') => m,
            Some(b'g') => n,
            _ => return None,
        };
        if s.get(at + 1) != Some(&b'(') {
            return None;
        }
        let mut at = parse(s, at + 2, m, n)?;
        for _ in 1..arity {
            if s.get(at) != Some(&b',') {
                return None;
            }
            at = parse(s, at + 1, m, n)?;
        }
        if s.get(at) != Some(&b')') {
            return None;
        }
        Some(at + 1)
    }
    let bytes = word.as_bytes();
    parse(bytes, 0, m, n) == Some(bytes.len())
}

/// A rigid-reasoning instance: equation groups over a shared signature and
/// variables `x1..xm`, each group paired with a goal equation that must
/// follow from it under one common substitution.
#[derive(Debug, Clone)]
pub struct SreuInstance {
    symbols: BTreeMap<String, usize>,
    num_vars: usize,
    rigid: Vec<(Vec<(Term, Term)>, (Term, Term))>,
}

impl SreuInstance {
    pub fn symbols(&self) -> &BTreeMap<String, usize> {
        &self.symbols
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rigid(&self) -> &[(Vec<(Term, Term)>, (Term, Term))] {
        &self.rigid
    }

    /// Parse the s-expression form
    /// `(sreu (sig (g 1) (c 0)) (vars 2) (rigid ((= s t) ...) (= u v)) ...)`.
    pub fn from_text(text: &str) -> Result<SreuInstance> {
        let forms = read_sexps(text)?;
        let [form] = forms.as_slice() else {
            return Err(syntax(1, 1, "expected one sreu form"));
        };
        let items = form.list()?;
        let (l, c) = form.pos();
        if items.len() < 4 || items[0].atom()? != "sreu" {
            return Err(syntax(l, c, "expected (sreu (sig ...) (vars m) (rigid ...) ...)"));
        }

        let sig_items = items[1].list()?;
        let (sl, sc) = items[1].pos();
        if sig_items.first().and_then(|s| s.atom().ok()) != Some("sig") {
            return Err(syntax(sl, sc, "expected (sig (name arity) ...)"));
        }
        let mut symbols = BTreeMap::new();
        for entry in &sig_items[1..] {
            let pair = entry.list()?;
            let (el, ec) = entry.pos();
            if pair.len() != 2 {
                return Err(syntax(el, ec, "signature entry must be (name arity)"));
            }
            let name = pair[0].atom()?.to_string();
            let arity: usize = pair[1]
                .atom()?
                .parse()
                .map_err(|_| syntax(el, ec, "arity must be a number"))?;
            if symbols.insert(name.clone(), arity).is_some() {
                return Err(Error::DuplicateDeclaration(name));
            }
        }

        let vars_items = items[2].list()?;
        let (vl, vc) = items[2].pos();
        if vars_items.len() != 2 || vars_items[0].atom()? != "vars" {
            return Err(syntax(vl, vc, "expected (vars m)"));
        }
        let num_vars: usize = vars_items[1]
            .atom()?
            .parse()
            .map_err(|_| syntax(vl, vc, "variable count must be a number"))?;
        if num_vars == 0 {
            return Err(syntax(vl, vc, "need at least one variable"));
        }

        let mut rigid = Vec::new();
        for group in &items[3..] {
            let parts = group.list()?;
            let (gl, gc) = group.pos();
            if parts.len() != 3 || parts[0].atom()? != "rigid" {
                return Err(syntax(gl, gc, "expected (rigid (eq ...) eq)"));
            }
            let mut hyps = Vec::new();
            for eq in parts[1].list()? {
                hyps.push(parse_sreu_equation(eq, &symbols, num_vars)?);
            }
            let goal = parse_sreu_equation(&parts[2], &symbols, num_vars)?;
            rigid.push((hyps, goal));
        }
        Ok(SreuInstance {
            symbols,
            num_vars,
            rigid,
        })
    }
}

fn parse_sreu_equation(
    s: &Sexp,
    symbols: &BTreeMap<String, usize>,
    num_vars: usize,
) -> Result<(Term, Term)> {
    let items = s.list()?;
    let (l, c) = s.pos();
    if items.len() != 3 || items[0].atom()? != "=" {
        return Err(syntax(l, c, "equation must be (= s t)"));
    }
    Ok((
        parse_sreu_term(&items[1], symbols, num_vars)?,
        parse_sreu_term(&items[2], symbols, num_vars)?,
    ))
}

fn parse_sreu_term(
    s: &Sexp,
    symbols: &BTreeMap<String, usize>,
    num_vars: usize,
) -> Result<Term> {
    let resolve = |name: &str, found: usize, l: usize, c: usize| -> Result<Symbol> {
        if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if k >= 1 && k <= num_vars {
                if found != 0 {
                    return Err(syntax(l, c, format!("variable {name} takes no arguments")));
                }
                return Ok(Symbol::Param(name.to_string()));
            }
        }
        match symbols.get(name) {
            Some(&arity) if arity == found => Ok(Symbol::Op(name.to_string())),
            Some(&arity) => Err(Error::ArityMismatch {
                symbol: name.to_string(),
                expected: arity,
                found,
            }),
            None => Err(Error::UnknownSymbol(name.to_string())),
        }
    };
    match s {
        Sexp::Atom(name, l, c) => Ok(Term {
            head: resolve(name, 0, *l, *c)?,
            args: Vec::new(),
        }),
        Sexp::List(items, l, c) => {
            if items.is_empty() {
                return Err(syntax(*l, *c, "empty application"));
            }
            let args = items[1..]
                .iter()
                .map(|a| parse_sreu_term(a, symbols, num_vars))
                .collect::<Result<Vec<_>>>()?;
            Ok(Term {
                head: resolve(items[0].atom()?, args.len(), *l, *c)?,
                args,
            })
        }
    }
}

/// Encode a rigid-reasoning instance as synthesis of one unary function.
/// Each variable `xi` becomes the application `(f ai)` for a fresh constant
/// `ai`; the grammar forces candidates into a branch-per-constant shape, so
/// a candidate is exactly a simultaneous ground substitution.
pub fn gen_sreu(s: &SreuInstance) -> Result<SygusProblem> {
    let m = s.num_vars;
    let mut symbols = s.symbols.clone();
    for i in 1..=m {
        let name = format!("a{i}");
        if symbols.insert(name.clone(), 0).is_some() {
            return Err(Error::DuplicateDeclaration(name));
        }
    }
    if symbols.insert("bot".to_string(), 0).is_some() {
        return Err(Error::DuplicateDeclaration("bot".to_string()));
    }
    let sig = Signature::new(symbols, "f", vec!["x1".to_string()])?;

    let subst: BTreeMap<String, Term> = (1..=m)
        .map(|i| {
            (
                format!("x{i}"),
                Term::op("f", vec![Term::constant(format!("a{i}"))]),
            )
        })
        .collect();
    let mut distinct = Vec::new();
    for k in 1..=m {
        for j in k + 1..=m {
            distinct.push(Formula::not(Formula::Eq(
                Term::constant(format!("a{k}")),
                Term::constant(format!("a{j}")),
            )));
        }
    }
    let mut parts = Vec::new();
    for (hyps, goal) in &s.rigid {
        let mut antecedent: Vec<Formula> = hyps
            .iter()
            .map(|(a, b)| Formula::Eq(a.substitute_params(&subst), b.substitute_params(&subst)))
            .collect();
        antecedent.extend(distinct.iter().cloned());
        let conclusion = Formula::Eq(
            goal.0.substitute_params(&subst),
            goal.1.substitute_params(&subst),
        );
        parts.push(if antecedent.is_empty() {
            conclusion
        } else {
            Formula::Implies(Box::new(Formula::And(antecedent)), Box::new(conclusion))
        });
    }
    let constraint = if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        Formula::And(parts)
    };

    let ground = Term::constant("Sp");
    let mut blocks = Vec::new();
    for i in 1..=m {
        let cond = formula_to_term(&Formula::Eq(
            Term::param("x1"),
            Term::constant(format!("a{i}")),
        ))?;
        let next = if i == m {
            Term::constant("bot")
        } else {
            Term::constant(format!("A{}", i + 1))
        };
        blocks.push((
            format!("A{i}"),
            vec![Term::op(ITE, vec![cond, ground.clone(), next])],
        ));
    }
    let sp_rules = s
        .symbols
        .iter()
        .map(|(name, arity)| Term::op(name.clone(), vec![ground.clone(); *arity]))
        .collect();
    blocks.push(("Sp".to_string(), sp_rules));
    let grammar = TreeGrammar::new(blocks)?;
    SygusProblem::new(Theory::Euf, sig, grammar, constraint)
}

/// Two token grammars read from one text, separated by a `%%` line.
#[derive(Debug, Clone)]
pub struct CfgPair {
    pub g1: StringGrammar,
    pub g2: StringGrammar,
}

impl CfgPair {
    pub fn from_text(text: &str) -> Result<CfgPair> {
        let mut parts = text.splitn(2, "\n%%");
        let first = parts.next().unwrap_or("");
        let Some(second) = parts.next() else {
            return Err(syntax(1, 1, "expected two grammars separated by a %% line"));
        };
        Ok(CfgPair {
            g1: StringGrammar::from_bnf(first)?,
            g2: StringGrammar::from_bnf(second)?,
        })
    }
}

fn ceil_log2(n: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < n {
        bits += 1;
    }
    bits
}

/// The width of one encoded letter for a combined terminal alphabet.
pub fn letter_width(alphabet_size: usize) -> usize {
    1 + ceil_log2(alphabet_size)
}

fn letter_code(index: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if index >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn eliminate_units(g: &StringGrammar) -> Vec<(String, Vec<String>)> {
    let nts: Vec<String> = {
        let mut seen = Vec::new();
        for (lhs, _) in g.productions() {
            if !seen.contains(lhs) {
                seen.push(lhs.clone());
            }
        }
        seen
    };
    let mut out = Vec::new();
    for nt in &nts {
        let mut reach = vec![nt.clone()];
        let mut at = 0;
        while at < reach.len() {
            let cur = reach[at].clone();
            at += 1;
            for (lhs, rhs) in g.productions() {
                if *lhs == cur && rhs.len() == 1 && g.is_nonterminal(&rhs[0]) {
                    if !reach.contains(&rhs[0]) {
                        reach.push(rhs[0].clone());
                    }
                }
            }
        }
        for source in &reach {
            for (lhs, rhs) in g.productions() {
                let unit = rhs.len() == 1 && g.is_nonterminal(&rhs[0]);
                if lhs == source && !unit {
                    out.push((nt.clone(), rhs.clone()));
                }
            }
        }
    }
    out
}

/// Encode a grammar-intersection question over fixed-width letter codes: the
/// candidate grammar derives one equation between a word of each grammar,
/// and the constraint asks for an equation that fails. The checker, not
/// equational reasoning, is the authority on candidates.
pub fn gen_cfg_bv(c: &CfgPair) -> Result<SygusProblem> {
    let mut letters: BTreeSet<String> = c.g1.terminals();
    letters.extend(c.g2.terminals());
    if letters.is_empty() {
        return Err(Error::Unsupported("grammars derive no terminals".to_string()));
    }
    let width = letter_width(letters.len());
    let codes: BTreeMap<String, String> = letters
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), format!("b{}", letter_code(i, width))))
        .collect();

    let mut symbols = BTreeMap::new();
    symbols.insert("concat".to_string(), 2);
    symbols.insert("eq".to_string(), 2);
    symbols.insert("tt".to_string(), 0);
    for code in codes.values() {
        symbols.insert(code.clone(), 0);
    }
    let sig = Signature::new(symbols, "f", vec![])?;

    let mut blocks = vec![(
        "S".to_string(),
        vec![Term::op(
            "eq",
            vec![
                Term::constant(format!("g1_{}", c.g1.start())),
                Term::constant(format!("g2_{}", c.g2.start())),
            ],
        )],
    )];
    for (k, g) in [(1, &c.g1), (2, &c.g2)] {
        let mut rules: BTreeMap<String, Vec<Term>> = BTreeMap::new();
        let mut order = Vec::new();
        for (lhs, rhs) in eliminate_units(g) {
            let items: Vec<Term> = rhs
                .iter()
                .map(|tok| {
                    if g.is_nonterminal(tok) {
                        Term::constant(format!("g{k}_{tok}"))
                    } else {
                        Term::constant(codes[tok].clone())
                    }
                })
                .collect();
            let body = items
                .into_iter()
                .rev()
                .reduce(|acc, item| Term::op("concat", vec![item, acc]))
                .expect("alternatives are nonempty");
            let key = format!("g{k}_{lhs}");
            if !rules.contains_key(&key) {
                order.push(key.clone());
            }
            rules.entry(key).or_default().push(body);
        }
        for key in order {
            let bodies = rules.remove(&key).expect("queued above");
            blocks.push((key, bodies));
        }
    }
    let grammar = TreeGrammar::new(blocks)?;
    let constraint = Formula::not(Formula::Eq(Term::op("f", vec![]), Term::constant("tt")));
    SygusProblem::new(Theory::Bv, sig, grammar, constraint)
}

/// Decode both sides of a candidate equation to bit strings and report
/// whether they differ (length differences count).
pub fn check_bv_candidate(w: &Term) -> Result<bool> {
    let Symbol::Op(name) = &w.head else {
        return Err(Error::MalformedCandidate(format!("{w} is not an equation")));
    };
    if name != "eq" || w.args.len() != 2 {
        return Err(Error::MalformedCandidate(format!("{w} is not an equation")));
    }
    Ok(bits_of(&w.args[0])? != bits_of(&w.args[1])?)
}

fn bits_of(t: &Term) -> Result<String> {
    match &t.head {
        Symbol::Op(name) if name == "concat" && t.args.len() == 2 => {
            Ok(format!("{}{}", bits_of(&t.args[0])?, bits_of(&t.args[1])?))
        }
        Symbol::Op(name) if t.args.is_empty() => name
            .strip_prefix('b')
            .filter(|rest| !rest.is_empty() && rest.chars().all(|c| c == '0' || c == '1'))
            .map(str::to_string)
            .ok_or_else(|| Error::MalformedCandidate(format!("{t} is not a letter code"))),
        _ => Err(Error::MalformedCandidate(format!(
            "{t} is not a letter code"
        ))),
    }
}

/// Search the grammar's language in size order and return the first
/// candidate the oracle accepts. Exhausting the bound is `Unknown`, never
/// `Unsolvable`: the oracle only ever certifies single candidates.
pub fn bounded_solve<F>(problem: &SygusProblem, mut oracle: F, max_size: usize) -> Result<Verdict>
where
    F: FnMut(&Term) -> Result<bool>,
{
    for t in problem.grammar.enumerate(max_size, ENUM_LIMIT) {
        if oracle(&t)? {
            return Ok(Verdict::solvable(t, None));
        }
    }
    Ok(Verdict::Unknown { bound: max_size })
}
