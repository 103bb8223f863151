//! Text format for planning problems.
//!
//! ```text
//! # a machine and its cooldown
//! var machine {
//!   values busy, idle;
//!   trans busy -> {idle};
//!   trans idle -> {busy, idle};
//! }
//!
//! rule cooldown: a0[machine=busy] => exists a1[machine=idle].
//!   start(a0) <= end(a0) & end(a0) <= start(a1);
//! ```
//!
//! `<` is a strict precedence, `<=` a plain one, and `=` expands into the
//! two plain precedences.  A rule body is one or more `exists` clauses
//! separated by `|`; the clause `true` carries no atoms.  A trigger of
//! `true` makes the rule triggerless.  Metric constructs such as bounds
//! on `<=` or numeric terms are recognized and rejected: durations play
//! no role in this fragment.

use std::collections::HashMap;

use crate::model::{
    Atom, Existential, Problem, Quantifier, Rule, StateVariable, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, col {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokKind {
    Ident,
    Int,
    Punct,
    Eof,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    text: String,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Tok>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&d) = chars.peek() {
                if d == '\n' {
                    break;
                }
                chars.next();
                col += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            toks.push(Tok { kind: TokKind::Ident, text: s, line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() {
                    s.push(d);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            toks.push(Tok { kind: TokKind::Int, text: s, line, col: start_col });
            continue;
        }
        chars.next();
        col += 1;
        let two = |chars: &mut std::iter::Peekable<std::str::Chars>, col: &mut usize, next: char| {
            if chars.peek() == Some(&next) {
                chars.next();
                *col += 1;
                true
            } else {
                false
            }
        };
        let text = match c {
            '-' => {
                if two(&mut chars, &mut col, '>') {
                    "->".to_string()
                } else {
                    return Err(ParseError {
                        line,
                        col: start_col,
                        message: "stray '-'; expected '->'".into(),
                    });
                }
            }
            '<' => {
                if two(&mut chars, &mut col, '=') {
                    "<=".to_string()
                } else {
                    "<".to_string()
                }
            }
            '=' => {
                if two(&mut chars, &mut col, '>') {
                    "=>".to_string()
                } else {
                    "=".to_string()
                }
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ',' | ';' | ':' | '.' | '&' | '|' => c.to_string(),
            other => {
                return Err(ParseError {
                    line,
                    col: start_col,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        toks.push(Tok { kind: TokKind::Punct, text, line, col: start_col });
    }
    toks.push(Tok { kind: TokKind::Eof, text: String::new(), line, col });
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, tok: &Tok, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: tok.line, col: tok.col, message: message.into() })
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.kind == TokKind::Punct && t.text == p {
            Ok(())
        } else {
            self.err(&t, format!("expected {p:?}, found {:?}", t.text))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Tok, ParseError> {
        let t = self.next();
        if t.kind == TokKind::Ident {
            Ok(t)
        } else {
            self.err(&t, format!("expected {what}, found {:?}", t.text))
        }
    }

    fn at_punct(&self, p: &str) -> bool {
        let t = self.peek();
        t.kind == TokKind::Punct && t.text == p
    }

    fn at_ident(&self, word: &str) -> bool {
        let t = self.peek();
        t.kind == TokKind::Ident && t.text == word
    }

    /// `name[var=value]`
    fn quantifier(&mut self) -> Result<Quantifier, ParseError> {
        let name = self.expect_ident("token name")?;
        self.expect_punct("[")?;
        let var = self.expect_ident("variable name")?;
        self.expect_punct("=")?;
        let value = self.expect_ident("value name")?;
        self.expect_punct("]")?;
        Ok(Quantifier { name: name.text, var: var.text, value: value.text })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next();
        if t.kind == TokKind::Int {
            return self.err(&t, "numeric terms are not supported in this fragment");
        }
        if t.kind != TokKind::Ident || (t.text != "start" && t.text != "end") {
            return self.err(&t, format!("expected start(..) or end(..), found {:?}", t.text));
        }
        self.expect_punct("(")?;
        let name = self.expect_ident("token name")?;
        self.expect_punct(")")?;
        Ok(if t.text == "start" {
            Term::start(&name.text)
        } else {
            Term::end(&name.text)
        })
    }

    /// One atom, expanded: `=` yields both directions.
    fn atoms(&mut self, out: &mut Vec<Atom>) -> Result<(), ParseError> {
        let lhs = self.term()?;
        let op = self.next();
        if op.kind != TokKind::Punct || !["<", "<=", "="].contains(&op.text.as_str()) {
            return self.err(&op, format!("expected <, <= or =, found {:?}", op.text));
        }
        if self.at_punct("[") {
            let t = self.peek().clone();
            return self.err(&t, "bounded precedences are not supported in this fragment");
        }
        let rhs = self.term()?;
        match op.text.as_str() {
            "<" => out.push(Atom::lt(lhs, rhs)),
            "<=" => out.push(Atom::le(lhs, rhs)),
            _ => out.extend(Atom::eq(lhs, rhs)),
        }
        Ok(())
    }

    /// `exists b1[..] b2[..]. CLAUSE` where CLAUSE is `true` or atoms
    /// joined by `&`.
    fn disjunct(&mut self) -> Result<Existential, ParseError> {
        let kw = self.expect_ident("exists")?;
        if kw.text != "exists" {
            return self.err(&kw, format!("expected exists, found {:?}", kw.text));
        }
        let mut quantifiers = vec![self.quantifier()?];
        while self.peek().kind == TokKind::Ident && !self.at_ident("true") {
            quantifiers.push(self.quantifier()?);
        }
        self.expect_punct(".")?;
        let mut atoms = Vec::new();
        if self.at_ident("true") {
            self.next();
        } else {
            self.atoms(&mut atoms)?;
            while self.at_punct("&") {
                self.next();
                self.atoms(&mut atoms)?;
            }
        }
        Ok(Existential { quantifiers, atoms })
    }

}

/// Parses the text format into a problem.  Value names are shared across
/// variables; undeclared variables or values inside rules are left for
/// problem validation to report.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let mut values: Vec<String> = Vec::new();
    let mut value_ids: HashMap<String, usize> = HashMap::new();
    let intern = |values: &mut Vec<String>, ids: &mut HashMap<String, usize>, name: &str| {
        if let Some(&id) = ids.get(name) {
            return id;
        }
        let id = values.len();
        values.push(name.to_string());
        ids.insert(name.to_string(), id);
        id
    };
    let mut vars: Vec<StateVariable> = Vec::new();
    let mut rules: Vec<Rule> = Vec::new();

    loop {
        let t = parser.peek().clone();
        match (&t.kind, t.text.as_str()) {
            (TokKind::Eof, _) => break,
            (TokKind::Ident, "var") => {
                parser.next();
                let name = parser.expect_ident("variable name")?;
                parser.expect_punct("{")?;
                let kw = parser.expect_ident("values")?;
                if kw.text != "values" {
                    return parser.err(&kw, "variable blocks start with a values line");
                }
                let mut decl_values = vec![parser.expect_ident("value name")?];
                while parser.at_punct(",") {
                    parser.next();
                    decl_values.push(parser.expect_ident("value name")?);
                }
                parser.expect_punct(";")?;
                let domain: Vec<usize> = decl_values
                    .iter()
                    .map(|v| intern(&mut values, &mut value_ids, &v.text))
                    .collect();
                let local = |tok: &Tok,
                             parser: &Parser|
                 -> Result<usize, ParseError> {
                    match decl_values.iter().position(|v| v.text == tok.text) {
                        Some(i) => Ok(i),
                        None => parser.err(
                            tok,
                            format!("value {:?} is not declared for this variable", tok.text),
                        ),
                    }
                };
                let mut trans: Vec<Vec<usize>> = vec![Vec::new(); domain.len()];
                while parser.at_ident("trans") {
                    parser.next();
                    let from = parser.expect_ident("value name")?;
                    let from_ix = local(&from, &parser)?;
                    parser.expect_punct("->")?;
                    parser.expect_punct("{")?;
                    let mut succs = Vec::new();
                    if !parser.at_punct("}") {
                        loop {
                            let to = parser.expect_ident("value name")?;
                            succs.push(domain[local(&to, &parser)?]);
                            if parser.at_punct(",") {
                                parser.next();
                            } else {
                                break;
                            }
                        }
                    }
                    parser.expect_punct("}")?;
                    parser.expect_punct(";")?;
                    succs.sort_unstable();
                    succs.dedup();
                    trans[from_ix] = succs;
                }
                parser.expect_punct("}")?;
                vars.push(StateVariable { name: name.text, domain, trans });
            }
            (TokKind::Ident, "rule") => {
                parser.next();
                let name = parser.expect_ident("rule name")?;
                parser.expect_punct(":")?;
                let trigger = if parser.at_ident("true") {
                    parser.next();
                    None
                } else {
                    Some(parser.quantifier()?)
                };
                parser.expect_punct("=>")?;
                let mut disjuncts = vec![parser.disjunct()?];
                while parser.at_punct("|") {
                    parser.next();
                    disjuncts.push(parser.disjunct()?);
                }
                parser.expect_punct(";")?;
                rules.push(Rule { name: name.text, trigger, disjuncts });
            }
            _ => {
                return parser.err(&t, format!("expected var or rule, found {:?}", t.text));
            }
        }
    }

    Ok(Problem { values, vars, rules })
}

/// Renders a problem in the same text format; the output parses back to
/// the same problem.
pub fn render_problem(p: &Problem) -> String {
    let mut out = String::new();
    for var in &p.vars {
        out.push_str(&format!("var {} {{\n  values ", var.name));
        let names: Vec<&str> = var.domain.iter().map(|&v| p.value_name(v)).collect();
        out.push_str(&names.join(", "));
        out.push_str(";\n");
        for (i, succs) in var.trans.iter().enumerate() {
            let ss: Vec<&str> = succs.iter().map(|&v| p.value_name(v)).collect();
            out.push_str(&format!(
                "  trans {} -> {{{}}};\n",
                p.value_name(var.domain[i]),
                ss.join(", ")
            ));
        }
        out.push_str("}\n\n");
    }
    for rule in &p.rules {
        out.push_str(&format!("rule {}: ", rule.name));
        match &rule.trigger {
            Some(q) => out.push_str(&format!("{}[{}={}]", q.name, q.var, q.value)),
            None => out.push_str("true"),
        }
        out.push_str(" =>\n");
        let rendered: Vec<String> = rule.disjuncts.iter().map(render_disjunct).collect();
        out.push_str(&format!("  {};\n\n", rendered.join("\n  | ")));
    }
    out
}

fn render_term(t: &Term) -> String {
    match t.endpoint {
        crate::model::Endpoint::Start => format!("start({})", t.name),
        crate::model::Endpoint::End => format!("end({})", t.name),
    }
}

fn render_disjunct(d: &Existential) -> String {
    let mut s = String::from("exists");
    for q in &d.quantifiers {
        s.push_str(&format!(" {}[{}={}]", q.name, q.var, q.value));
    }
    s.push_str(". ");
    if d.atoms.is_empty() {
        s.push_str("true");
    } else {
        let atoms: Vec<String> = d
            .atoms
            .iter()
            .map(|a| {
                format!(
                    "{} {} {}",
                    render_term(&a.lhs),
                    if a.strict { "<" } else { "<=" },
                    render_term(&a.rhs)
                )
            })
            .collect();
        s.push_str(&atoms.join(" & "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_problem;

    const SAMPLE: &str = "\
# a machine and its cooldown
var machine {
  values busy, idle;
  trans busy -> {idle};
  trans idle -> {busy, idle};
}

rule cooldown: a0[machine=busy] => exists a1[machine=idle].
  start(a0) <= end(a0) & end(a0) <= start(a1);

rule someday: true => exists t[machine=busy]. true;
";

    #[test]
    fn parses_sample_problem() {
        let p = parse_problem(SAMPLE).unwrap();
        assert_eq!(p.vars.len(), 1);
        assert_eq!(p.values, vec!["busy".to_string(), "idle".to_string()]);
        assert_eq!(p.rules.len(), 2);
        assert!(p.rules[0].trigger.is_some());
        assert!(p.rules[1].trigger.is_none());
        assert!(validate_problem(&p).is_empty());
    }

    #[test]
    fn equality_expands_into_both_directions() {
        let text = "\
var x { values u; }
rule r: true => exists a[x=u] b[x=u]. start(a) = start(b);
";
        let p = parse_problem(text).unwrap();
        let atoms = &p.rules[0].disjuncts[0].atoms;
        assert_eq!(atoms.len(), 2);
        assert!(atoms.iter().all(|a| !a.strict));
    }

    #[test]
    fn disjuncts_split_on_pipe() {
        let text = "\
var x { values u, v; }
rule r: a0[x=u] => exists a[x=v]. start(a0) <= start(a) & end(a0) < end(a)
  | exists b[x=v]. end(a0) <= start(b);
";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.rules[0].disjuncts.len(), 2);
        assert!(p.rules[0].disjuncts[0].atoms[1].strict);
    }

    #[test]
    fn shared_value_names_intern_once() {
        let text = "\
var x { values idle, busy; }
var y { values idle, off; }
";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.values.len(), 3);
        assert_eq!(p.vars[0].domain[0], p.vars[1].domain[0]);
    }

    #[test]
    fn bounded_precedence_is_rejected() {
        let text = "\
var x { values u; }
rule r: true => exists a[x=u] b[x=u]. start(a) <=[1,4] start(b);
";
        let e = parse_problem(text).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("bounded"));
    }

    #[test]
    fn numeric_term_is_rejected() {
        let text = "\
var x { values u; }
rule r: true => exists a[x=u]. start(a) <= 5;
";
        let e = parse_problem(text).unwrap_err();
        assert!(e.message.contains("numeric"));
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_problem("var x { values u; trans u -> {w}; }").unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.col, 31);
        assert!(e.message.contains("not declared"));

        let e = parse_problem("var x { values u; }\nnonsense").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.col, 1);
    }

    #[test]
    fn round_trip_through_render() {
        let p = parse_problem(SAMPLE).unwrap();
        let rendered = render_problem(&p);
        let p2 = parse_problem(&rendered).unwrap();
        assert_eq!(render_problem(&p2), rendered);
        assert_eq!(p2.values, p.values);
        assert_eq!(p2.vars.len(), p.vars.len());
    }

    #[test]
    fn missing_transition_line_means_no_successors() {
        let p = parse_problem("var x { values u, v; trans u -> {v}; }").unwrap();
        assert_eq!(p.vars[0].trans[0], vec![1]);
        assert!(p.vars[0].trans[1].is_empty());
    }
}
