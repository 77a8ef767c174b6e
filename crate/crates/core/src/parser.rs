//! Reading and writing the problem format: an s-expression surface with
//! `set-logic`, declarations, one `synth-fun` carrying the candidate grammar,
//! `constraint` blocks, and a final `check-synth`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::automata::TreeGrammar;
use crate::error::{Error, Result};
use crate::formula::{formula_to_term, Formula};
use crate::problem::{resolve_atom, SygusProblem, Theory};
use crate::term::{Signature, Term, ITE};

#[derive(Debug, Clone)]
pub(crate) enum Sexp {
    Atom(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    pub(crate) fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }

    pub(crate) fn atom(&self) -> Result<&str> {
        match self {
            Sexp::Atom(s, _, _) => Ok(s),
            Sexp::List(_, l, c) => Err(syntax(*l, *c, "expected an atom")),
        }
    }

    pub(crate) fn list(&self) -> Result<&[Sexp]> {
        match self {
            Sexp::List(items, _, _) => Ok(items),
            Sexp::Atom(s, l, c) => Err(syntax(*l, *c, format!("expected a list, found {s}"))),
        }
    }
}

pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        col,
        message: message.into(),
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

#[derive(Debug)]
enum Token {
    Open(usize, usize),
    Close(usize, usize),
    Atom(String, usize, usize),
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Lexer<'a> {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                ';' => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                '(' => {
                    self.bump();
                    out.push(Token::Open(line, col));
                }
                ')' => {
                    self.bump();
                    out.push(Token::Close(line, col));
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => return Err(syntax(line, col, "'#' cannot start or appear in an atom")),
                _ => {
                    let mut atom = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                            break;
                        }
                        if c == '#' {
                            return Err(syntax(
                                self.line,
                                self.col,
                                "'#' cannot start or appear in an atom",
                            ));
                        }
                        atom.push(c);
                        self.bump();
                    }
                    out.push(Token::Atom(atom, line, col));
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn read_sexps(text: &str) -> Result<Vec<Sexp>> {
    let tokens = Lexer::new(text).tokens()?;
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = Vec::new();
    let mut top = Vec::new();
    for tok in tokens {
        match tok {
            Token::Open(l, c) => stack.push((Vec::new(), l, c)),
            Token::Close(l, c) => {
                let Some((items, ol, oc)) = stack.pop() else {
                    return Err(syntax(l, c, "unmatched ')'"));
                };
                let sexp = Sexp::List(items, ol, oc);
                match stack.last_mut() {
                    Some((items, _, _)) => items.push(sexp),
                    None => top.push(sexp),
                }
            }
            Token::Atom(s, l, c) => {
                let sexp = Sexp::Atom(s, l, c);
                match stack.last_mut() {
                    Some((items, _, _)) => items.push(sexp),
                    None => top.push(sexp),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.pop() {
        return Err(syntax(l, c, "unclosed '('"));
    }
    Ok(top)
}

fn expect_sort(s: &Sexp) -> Result<()> {
    let (l, c) = s.pos();
    if s.atom()? == "U" {
        Ok(())
    } else {
        Err(syntax(l, c, "the only sort is U"))
    }
}

/// Parse a full problem file.
pub fn parse_problem(text: &str) -> Result<SygusProblem> {
    let forms = read_sexps(text)?;
    let mut theory: Option<Theory> = None;
    let mut symbols: BTreeMap<String, usize> = BTreeMap::new();
    let mut synth: Option<(String, Vec<String>, Vec<(String, Vec<Sexp>)>)> = None;
    let mut constraint_forms: Vec<Sexp> = Vec::new();
    let mut checked = false;

    for form in &forms {
        let (l, c) = form.pos();
        if checked {
            return Err(syntax(l, c, "content after (check-synth)"));
        }
        let items = form.list()?;
        if items.is_empty() {
            return Err(syntax(l, c, "empty form"));
        }
        match items[0].atom()? {
            "set-logic" => {
                if items.len() != 2 {
                    return Err(syntax(l, c, "set-logic takes one argument"));
                }
                if theory.is_some() {
                    return Err(syntax(l, c, "set-logic given twice"));
                }
                theory = Some(Theory::from_name(items[1].atom()?)?);
            }
            "declare-fun" => {
                if items.len() != 4 {
                    return Err(syntax(l, c, "declare-fun takes name, argument sorts, sort"));
                }
                let name = items[1].atom()?.to_string();
                let args = items[2].list()?;
                for a in args {
                    expect_sort(a)?;
                }
                expect_sort(&items[3])?;
                if symbols.insert(name.clone(), args.len()).is_some() {
                    return Err(Error::DuplicateDeclaration(name));
                }
            }
            "declare-const" => {
                if items.len() != 3 {
                    return Err(syntax(l, c, "declare-const takes name and sort"));
                }
                let name = items[1].atom()?.to_string();
                expect_sort(&items[2])?;
                if symbols.insert(name.clone(), 0).is_some() {
                    return Err(Error::DuplicateDeclaration(name));
                }
            }
            "synth-fun" => {
                if synth.is_some() {
                    return Err(syntax(l, c, "more than one synth-fun"));
                }
                synth = Some(parse_synth_fun(items, l, c)?);
            }
            "constraint" => {
                if items.len() != 2 {
                    return Err(syntax(l, c, "constraint takes one formula"));
                }
                constraint_forms.push(items[1].clone());
            }
            "check-synth" => {
                if items.len() != 1 {
                    return Err(syntax(l, c, "check-synth takes no arguments"));
                }
                checked = true;
            }
            other => return Err(syntax(l, c, format!("unknown form {other}"))),
        }
    }

    if !checked {
        return Err(Error::MissingConstraint(
            "problem has no (check-synth)".to_string(),
        ));
    }
    let theory = theory.ok_or_else(|| {
        Error::MissingConstraint("problem has no (set-logic ...)".to_string())
    })?;
    let Some((target, params, rule_blocks)) = synth else {
        return Err(Error::MissingConstraint(
            "problem has no (synth-fun ...)".to_string(),
        ));
    };
    if constraint_forms.is_empty() {
        return Err(Error::MissingConstraint(
            "problem has no (constraint ...)".to_string(),
        ));
    }

    let signature = Signature::new(symbols, target, params)?;
    let blocks = rule_blocks
        .into_iter()
        .map(|(nt, prods)| {
            let terms = prods
                .iter()
                .map(|p| parse_term(p, &signature))
                .collect::<Result<Vec<_>>>()?;
            Ok((nt, terms))
        })
        .collect::<Result<Vec<_>>>()?;
    let grammar = TreeGrammar::new(blocks)?;

    let mut constraints = constraint_forms
        .iter()
        .map(|f| parse_formula(f, &signature))
        .collect::<Result<Vec<_>>>()?;
    let constraint = if constraints.len() == 1 {
        constraints.pop().unwrap()
    } else {
        Formula::And(constraints)
    };

    SygusProblem::new(theory, signature, grammar, constraint)
}

type SynthParts = (String, Vec<String>, Vec<(String, Vec<Sexp>)>);

fn parse_synth_fun(items: &[Sexp], l: usize, c: usize) -> Result<SynthParts> {
    if items.len() != 6 {
        return Err(syntax(
            l,
            c,
            "synth-fun takes name, parameters, sort, nonterminal list, rule list",
        ));
    }
    let target = items[1].atom()?.to_string();
    let mut params = Vec::new();
    for p in items[2].list()? {
        let pair = p.list()?;
        let (pl, pc) = p.pos();
        if pair.len() != 2 {
            return Err(syntax(pl, pc, "parameter must be (name U)"));
        }
        expect_sort(&pair[1])?;
        params.push(pair[0].atom()?.to_string());
    }
    expect_sort(&items[3])?;

    let mut declared = Vec::new();
    for d in items[4].list()? {
        let pair = d.list()?;
        let (dl, dc) = d.pos();
        if pair.len() != 2 {
            return Err(syntax(dl, dc, "nonterminal must be declared as (name U)"));
        }
        expect_sort(&pair[1])?;
        declared.push(pair[0].atom()?.to_string());
    }

    let mut blocks = Vec::new();
    for b in items[5].list()? {
        let parts = b.list()?;
        let (bl, bc) = b.pos();
        if parts.len() != 3 {
            return Err(syntax(bl, bc, "rule block must be (name U (production...))"));
        }
        let name = parts[0].atom()?.to_string();
        expect_sort(&parts[1])?;
        let prods = parts[2].list()?.to_vec();
        if prods.is_empty() {
            return Err(syntax(bl, bc, format!("nonterminal {name} has no productions")));
        }
        blocks.push((name, prods));
    }

    let names: Vec<&String> = blocks.iter().map(|(n, _)| n).collect();
    if declared.len() != names.len()
        || declared.iter().zip(&names).any(|(d, n)| d != *n)
    {
        return Err(syntax(
            l,
            c,
            "nonterminal list does not match the rule blocks",
        ));
    }
    Ok((target, params, blocks))
}

fn parse_term(s: &Sexp, sig: &Signature) -> Result<Term> {
    match s {
        Sexp::Atom(name, _, _) => Ok(Term {
            head: resolve_atom(sig, name),
            args: Vec::new(),
        }),
        Sexp::List(items, l, c) => {
            if items.is_empty() {
                return Err(syntax(*l, *c, "empty application"));
            }
            let head = items[0].atom()?;
            if head == ITE {
                if items.len() != 4 {
                    return Err(syntax(*l, *c, "ite takes condition, then, else"));
                }
                let cond = parse_formula(&items[1], sig)?;
                let then_branch = parse_term(&items[2], sig)?;
                let else_branch = parse_term(&items[3], sig)?;
                return Ok(Term::op(
                    ITE,
                    vec![formula_to_term(&cond)?, then_branch, else_branch],
                ));
            }
            let args = items[1..]
                .iter()
                .map(|a| parse_term(a, sig))
                .collect::<Result<Vec<_>>>()?;
            Ok(Term {
                head: resolve_atom(sig, head),
                args,
            })
        }
    }
}

fn parse_formula(s: &Sexp, sig: &Signature) -> Result<Formula> {
    let (l, c) = s.pos();
    let items = s.list()?;
    if items.is_empty() {
        return Err(syntax(l, c, "empty formula"));
    }
    match items[0].atom()? {
        "=" => {
            if items.len() != 3 {
                return Err(syntax(l, c, "= takes two terms"));
            }
            Ok(Formula::Eq(
                parse_term(&items[1], sig)?,
                parse_term(&items[2], sig)?,
            ))
        }
        "not" => {
            if items.len() != 2 {
                return Err(syntax(l, c, "not takes one formula"));
            }
            Ok(Formula::not(parse_formula(&items[1], sig)?))
        }
        "and" => Ok(Formula::And(
            items[1..]
                .iter()
                .map(|f| parse_formula(f, sig))
                .collect::<Result<_>>()?,
        )),
        "or" => Ok(Formula::Or(
            items[1..]
                .iter()
                .map(|f| parse_formula(f, sig))
                .collect::<Result<_>>()?,
        )),
        "=>" => {
            if items.len() != 3 {
                return Err(syntax(l, c, "=> takes two formulas"));
            }
            Ok(Formula::implies(
                parse_formula(&items[1], sig)?,
                parse_formula(&items[2], sig)?,
            ))
        }
        q @ ("forall" | "exists") => {
            if items.len() != 3 {
                return Err(syntax(l, c, format!("{q} takes bindings and a body")));
            }
            let mut vars = Vec::new();
            for b in items[1].list()? {
                let pair = b.list()?;
                let (bl, bc) = b.pos();
                if pair.len() != 2 {
                    return Err(syntax(bl, bc, "binding must be (name U)"));
                }
                expect_sort(&pair[1])?;
                vars.push(pair[0].atom()?.to_string());
            }
            let body = Box::new(parse_formula(&items[2], sig)?);
            Ok(if q == "forall" {
                Formula::Forall(vars, body)
            } else {
                Formula::Exists(vars, body)
            })
        }
        other => Err(syntax(l, c, format!("unknown connective {other}"))),
    }
}

/// Parse a single candidate body for the synthesis target and check it
/// against the signature.
pub fn parse_candidate(text: &str, sig: &Signature) -> Result<Term> {
    let forms = read_sexps(text)?;
    let [form] = forms.as_slice() else {
        return Err(syntax(1, 1, "expected exactly one term"));
    };
    let t = parse_term(form, sig)?;
    sig.check_term(&t, false, true)?;
    Ok(t)
}

/// Canonical text for a problem; parsing it back yields an equal problem.
pub fn print_problem(p: &SygusProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {})", p.theory.name());
    for (name, arity) in p.signature.symbols() {
        if *arity == 0 {
            let _ = writeln!(out, "(declare-const {name} U)");
        } else {
            let sorts = vec!["U"; *arity].join(" ");
            let _ = writeln!(out, "(declare-fun {name} ({sorts}) U)");
        }
    }
    let params = p
        .signature
        .params()
        .iter()
        .map(|x| format!("({x} U)"))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "(synth-fun {} ({params}) U", p.signature.target());
    let decls = p
        .grammar
        .nonterminals()
        .iter()
        .map(|n| format!("({n} U)"))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "  ({decls})");
    let _ = writeln!(out, "  (");
    for nt in p.grammar.nonterminals() {
        let prods = p
            .grammar
            .rules(nt)
            .iter()
            .map(Term::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "   ({nt} U ({prods}))");
    }
    let _ = writeln!(out, "  ))");
    match &p.constraint {
        Formula::And(fs) if fs.len() >= 2 => {
            for f in fs {
                let _ = writeln!(out, "(constraint {f})");
            }
        }
        f => {
            let _ = writeln!(out, "(constraint {f})");
        }
    }
    let _ = writeln!(out, "(check-synth)");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = "
(set-logic EUF)
(declare-fun g (U) U)
(declare-const a U)
(synth-fun f ((x1 U)) U
  ((S U))
  ((S U (a x1 (g S)))))
(constraint (= (f a) (g a)))
(check-synth)
";

    #[test]
    fn parses_a_small_problem() {
        let p = parse_problem(CHAIN).unwrap();
        assert_eq!(p.theory, Theory::Euf);
        assert_eq!(p.signature.target(), "f");
        assert_eq!(p.signature.params(), ["x1".to_string()]);
        assert_eq!(p.signature.arity_of("g"), Some(1));
        assert_eq!(p.grammar.nonterminals(), ["S".to_string()]);
        assert_eq!(p.grammar.rules("S").len(), 3);
        assert_eq!(p.grammar.rules("S")[1], Term::param("x1"));
        assert_eq!(
            p.constraint,
            Formula::Eq(
                Term::op("f", vec![Term::constant("a")]),
                Term::op("g", vec![Term::constant("a")]),
            )
        );
    }

    #[test]
    fn print_then_parse_is_identity() {
        let p = parse_problem(CHAIN).unwrap();
        let text = print_problem(&p);
        let q = parse_problem(&text).unwrap();
        assert_eq!(print_problem(&q), text);
        assert_eq!(q.constraint, p.constraint);
    }

    #[test]
    fn multiple_constraints_conjoin() {
        let text = "
(set-logic EUF)
(declare-const a U)
(declare-const b U)
(synth-fun f () U ((S U)) ((S U (a b))))
(constraint (= f a))
(constraint (= f b))
(check-synth)
";
        let p = parse_problem(text).unwrap();
        let Formula::And(fs) = &p.constraint else {
            panic!("expected conjunction");
        };
        assert_eq!(fs.len(), 2);
        let printed = print_problem(&p);
        assert_eq!(printed.matches("(constraint ").count(), 2);
    }

    #[test]
    fn missing_pieces_are_reported() {
        assert!(matches!(
            parse_problem("(set-logic EUF)(check-synth)"),
            Err(Error::MissingConstraint(_))
        ));
        let no_check = "
(set-logic EUF)
(declare-const a U)
(synth-fun f () U ((S U)) ((S U (a))))
(constraint (= f a))
";
        assert!(matches!(
            parse_problem(no_check),
            Err(Error::MissingConstraint(_))
        ));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_problem("(set-logic EUF").is_err());
        assert!(parse_problem("(set-logic EUF))").is_err());
        assert!(matches!(
            parse_problem("(set-logic EUF)(declare-const #x U)(check-synth)"),
            Err(Error::Syntax { .. })
        ));
        let bad_sort = "
(set-logic EUF)
(declare-const a Int)
(synth-fun f () U ((S U)) ((S U (a))))
(constraint (= f a))
(check-synth)
";
        assert!(matches!(parse_problem(bad_sort), Err(Error::Syntax { .. })));
    }

    #[test]
    fn ite_and_quantifiers_parse() {
        let text = "
(set-logic EUF)
(declare-fun g (U) U)
(declare-const a U)
(declare-const b U)
(synth-fun f ((x1 U)) U
  ((S U))
  ((S U (a (ite (= x1 a) b (g S))))))
(constraint (forall ((y U)) (=> (= y a) (= (f y) b))))
(check-synth)
";
        let p = parse_problem(text).unwrap();
        let rules = p.grammar.rules("S");
        assert!(rules[1].is_ite());
        assert!(matches!(p.constraint, Formula::Forall(..)));
        let text2 = print_problem(&p);
        let q = parse_problem(&text2).unwrap();
        assert_eq!(print_problem(&q), text2);
    }

    #[test]
    fn candidate_parsing_respects_the_signature() {
        let p = parse_problem(CHAIN).unwrap();
        let t = parse_candidate("(g (g x1))", &p.signature).unwrap();
        assert_eq!(
            t,
            Term::op("g", vec![Term::op("g", vec![Term::param("x1")])])
        );
        assert!(parse_candidate("(g zz)", &p.signature).is_err());
        assert!(parse_candidate("(f a)", &p.signature).is_err());
        assert!(parse_candidate("(g a) (g a)", &p.signature).is_err());
    }
}
