//! Core data model for qualitative timeline-based planning.
//!
//! A problem is a set of state variables together with synchronization rules.
//! Each state variable has a finite value domain and a transition relation
//! constraining which value may follow which on its timeline.  A plan assigns
//! one timeline (a sequence of positive-duration tokens) to every variable,
//! all ending at the same horizon.  Rules relate tokens of different variables
//! through qualitative ordering atoms over token endpoints.
//!
//! Value names are interned in a single table shared by all variables, so two
//! variables may use the same value name (and then denote the same value).

use std::collections::{HashMap, HashSet};

pub type VarId = usize;
pub type ValId = usize;
pub type Time = u64;

/// A state variable: named finite domain plus transition relation.
///
/// `domain` lists the variable's values in declaration order; `trans[i]` is
/// the set of values allowed to follow `domain[i]`, in ascending `ValId`
/// order.  Token durations are implicitly unconstrained positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVariable {
    pub name: String,
    pub domain: Vec<ValId>,
    pub trans: Vec<Vec<ValId>>,
}

impl StateVariable {
    pub fn contains(&self, v: ValId) -> bool {
        self.domain.contains(&v)
    }

    /// Allowed successors of `v`; empty if `v` is not in the domain.
    pub fn successors(&self, v: ValId) -> &[ValId] {
        match self.domain.iter().position(|&d| d == v) {
            Some(i) => &self.trans[i],
            None => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Start,
    End,
}

/// An endpoint of a named token, e.g. `start(a)` or `end(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub name: String,
    pub endpoint: Endpoint,
}

impl Term {
    pub fn start(name: &str) -> Term {
        Term { name: name.to_string(), endpoint: Endpoint::Start }
    }

    pub fn end(name: &str) -> Term {
        Term { name: name.to_string(), endpoint: Endpoint::End }
    }
}

/// A qualitative ordering constraint between two terms.  `strict` selects
/// strict precedence (`<`) over the non-strict one (`<=`).  Quantitative
/// (bounded) atoms are outside the supported fragment and are rejected by the
/// parser, so they have no representation here.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub lhs: Term,
    pub rhs: Term,
    pub strict: bool,
}

impl Atom {
    pub fn le(lhs: Term, rhs: Term) -> Atom {
        Atom { lhs, rhs, strict: false }
    }

    pub fn lt(lhs: Term, rhs: Term) -> Atom {
        Atom { lhs, rhs, strict: true }
    }

    /// Equality is shorthand for a pair of non-strict atoms.
    pub fn eq(lhs: Term, rhs: Term) -> [Atom; 2] {
        [Atom::le(lhs.clone(), rhs.clone()), Atom::le(rhs, lhs)]
    }
}

/// `name[var = value]`: binds a token name to tokens of `var` holding `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    pub name: String,
    pub var: String,
    pub value: String,
}

impl Quantifier {
    pub fn new(name: &str, var: &str, value: &str) -> Quantifier {
        Quantifier { name: name.into(), var: var.into(), value: value.into() }
    }
}

/// One disjunct of a rule body: an existential prefix plus a conjunctive
/// clause.  An empty clause is the trivially true clause; the quantified
/// tokens are still required to exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Existential {
    pub quantifiers: Vec<Quantifier>,
    pub atoms: Vec<Atom>,
}

/// A synchronization rule.  With a trigger, every token matching the trigger
/// must be matched by some disjunct; without one, some disjunct must be
/// satisfied once globally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub trigger: Option<Quantifier>,
    pub disjuncts: Vec<Existential>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Problem {
    /// Global value-name table; `ValId` indexes into it.
    pub values: Vec<String>,
    pub vars: Vec<StateVariable>,
    pub rules: Vec<Rule>,
}

impl Problem {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn value_id(&self, name: &str) -> Option<ValId> {
        self.values.iter().position(|v| v == name)
    }

    pub fn value_name(&self, id: ValId) -> &str {
        &self.values[id]
    }

    /// Number of distinct values across all domains.
    pub fn value_count(&self) -> usize {
        self.values.len()
    }
}

/// Incremental construction of a [`Problem`], interning value names.
#[derive(Debug, Default)]
pub struct ProblemBuilder {
    values: Vec<String>,
    index: HashMap<String, ValId>,
    vars: Vec<StateVariable>,
    rules: Vec<Rule>,
}

impl ProblemBuilder {
    pub fn new() -> ProblemBuilder {
        ProblemBuilder::default()
    }

    pub fn intern(&mut self, value: &str) -> ValId {
        if let Some(&id) = self.index.get(value) {
            return id;
        }
        let id = self.values.len();
        self.values.push(value.to_string());
        self.index.insert(value.to_string(), id);
        id
    }

    /// Adds a variable with `(value, successors)` pairs in declaration order.
    pub fn var(&mut self, name: &str, spec: &[(&str, &[&str])]) -> &mut Self {
        let domain: Vec<ValId> = spec.iter().map(|(v, _)| self.intern(v)).collect();
        let trans: Vec<Vec<ValId>> = spec
            .iter()
            .map(|(_, succs)| {
                let mut t: Vec<ValId> = succs.iter().map(|s| self.intern(s)).collect();
                t.sort_unstable();
                t.dedup();
                t
            })
            .collect();
        self.vars.push(StateVariable { name: name.to_string(), domain, trans });
        self
    }

    pub fn rule(&mut self, rule: Rule) -> &mut Self {
        self.rules.push(rule);
        self
    }

    pub fn build(self) -> Problem {
        Problem { values: self.values, vars: self.vars, rules: self.rules }
    }
}

/// A token: a value held for a positive duration.  The owning variable is
/// implied by the timeline the token sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub value: ValId,
    pub duration: Time,
}

pub type Timeline = Vec<Token>;

/// One timeline per variable (indexed by `VarId`), all spanning `horizon`.
/// The empty plan (horizon 0, all timelines empty) is valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub horizon: Time,
    pub timelines: Vec<Timeline>,
}

impl Plan {
    pub fn empty(var_count: usize) -> Plan {
        Plan { horizon: 0, timelines: vec![Vec::new(); var_count] }
    }

    /// Start times of all tokens of one timeline (prefix sums of durations).
    pub fn start_times(&self, var: VarId) -> Vec<Time> {
        let mut t = 0;
        self.timelines[var]
            .iter()
            .map(|tok| {
                let s = t;
                t += tok.duration;
                s
            })
            .collect()
    }
}

/// A structural problem defect reported by [`validate_problem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// What the violation is attached to, e.g. `var x` or `rule r`.
    pub context: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.context, self.message)
    }
}

fn atom_is_trivial(atom: &Atom) -> bool {
    atom.lhs.name == atom.rhs.name
        && ((atom.lhs == atom.rhs && !atom.strict)
            || (atom.lhs.endpoint == Endpoint::Start && atom.rhs.endpoint == Endpoint::End))
}

/// Checks every structural invariant of a problem and reports all defects.
/// An empty report means the problem is well-formed.
pub fn validate_problem(p: &Problem) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut var_names = HashSet::new();
    for var in &p.vars {
        let ctx = format!("var {}", var.name);
        if !var_names.insert(var.name.clone()) {
            out.push(Violation { context: ctx.clone(), message: "duplicate variable name".into() });
        }
        if var.domain.is_empty() {
            out.push(Violation { context: ctx.clone(), message: "empty value domain".into() });
        }
        let mut seen = HashSet::new();
        for &v in &var.domain {
            if !seen.insert(v) {
                out.push(Violation {
                    context: ctx.clone(),
                    message: format!("duplicate value {}", p.value_name(v)),
                });
            }
        }
        for (i, succs) in var.trans.iter().enumerate() {
            for &s in succs {
                if !var.domain.contains(&s) {
                    out.push(Violation {
                        context: ctx.clone(),
                        message: format!(
                            "transition {} -> {} leaves the domain",
                            p.value_name(var.domain[i]),
                            p.value_name(s)
                        ),
                    });
                }
            }
        }
    }

    let mut rule_names = HashSet::new();
    for rule in &p.rules {
        let ctx = format!("rule {}", rule.name);
        if !rule_names.insert(rule.name.clone()) {
            out.push(Violation { context: ctx.clone(), message: "duplicate rule name".into() });
        }
        if rule.disjuncts.is_empty() {
            out.push(Violation { context: ctx.clone(), message: "rule has no disjuncts".into() });
        }
        let check_quant = |q: &Quantifier, out: &mut Vec<Violation>| match p.var_id(&q.var) {
            None => out.push(Violation {
                context: ctx.clone(),
                message: format!("token {} refers to unknown variable {}", q.name, q.var),
            }),
            Some(v) => {
                let ok = p
                    .value_id(&q.value)
                    .map(|val| p.vars[v].contains(val))
                    .unwrap_or(false);
                if !ok {
                    out.push(Violation {
                        context: ctx.clone(),
                        message: format!(
                            "token {} refers to value {} outside the domain of {}",
                            q.name, q.value, q.var
                        ),
                    });
                }
            }
        };
        if let Some(t) = &rule.trigger {
            check_quant(t, &mut out);
        }
        for (di, d) in rule.disjuncts.iter().enumerate() {
            let mut names: Vec<&str> = Vec::new();
            if let Some(t) = &rule.trigger {
                names.push(&t.name);
            }
            for q in &d.quantifiers {
                check_quant(q, &mut out);
                if names.contains(&q.name.as_str()) {
                    out.push(Violation {
                        context: ctx.clone(),
                        message: format!("duplicate token name {} in disjunct {}", q.name, di),
                    });
                } else {
                    names.push(&q.name);
                }
            }
            for atom in &d.atoms {
                for t in [&atom.lhs, &atom.rhs] {
                    if !names.contains(&t.name.as_str()) {
                        out.push(Violation {
                            context: ctx.clone(),
                            message: format!("atom mentions undeclared token name {}", t.name),
                        });
                    }
                }
                let on_trigger = rule
                    .trigger
                    .as_ref()
                    .map(|t| t.name == atom.lhs.name)
                    .unwrap_or(false);
                if atom_is_trivial(atom) && !on_trigger {
                    out.push(Violation {
                        context: ctx.clone(),
                        message: format!(
                            "trivial atom over non-trigger token {} in disjunct {}",
                            atom.lhs.name, di
                        ),
                    });
                }
            }
            // A token name may be left out of the clause only when the clause
            // is empty (pure existence assertion).
            if !d.atoms.is_empty() {
                for q in &d.quantifiers {
                    let used = d
                        .atoms
                        .iter()
                        .any(|a| a.lhs.name == q.name || a.rhs.name == q.name);
                    if !used {
                        out.push(Violation {
                            context: ctx.clone(),
                            message: format!("unused quantified token {} in disjunct {}", q.name, di),
                        });
                    }
                }
            }
            // Triggered rules must constrain both trigger endpoints in every
            // disjunct; the automaton construction relies on it.
            if let Some(t) = &rule.trigger {
                for ep in [Endpoint::Start, Endpoint::End] {
                    let occurs = d
                        .atoms
                        .iter()
                        .any(|a| {
                            (a.lhs.name == t.name && a.lhs.endpoint == ep)
                                || (a.rhs.name == t.name && a.rhs.endpoint == ep)
                        });
                    if !occurs && !d.atoms.is_empty() {
                        out.push(Violation {
                            context: ctx.clone(),
                            message: format!(
                                "trigger endpoint {}({}) never occurs in disjunct {}",
                                if ep == Endpoint::Start { "start" } else { "end" },
                                t.name,
                                di
                            ),
                        });
                    }
                }
            }
        }
    }
    out
}

/// A quantifier with variable and value resolved to ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenBinding {
    pub name: String,
    pub var: VarId,
    pub value: ValId,
}

/// An atom over token indices of a [`BoundDisjunct`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundAtom {
    pub lhs: (usize, Endpoint),
    pub rhs: (usize, Endpoint),
    pub strict: bool,
}

/// One resolved disjunct.  When the rule has a trigger, `tokens[0]` is the
/// trigger binding; quantified tokens follow in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundDisjunct {
    pub tokens: Vec<TokenBinding>,
    pub atoms: Vec<BoundAtom>,
}

impl BoundDisjunct {
    /// The clause's atoms plus an implicit strict `start < end` span for
    /// every token the clause never mentions.  A pure existence requirement
    /// (a quantified token with no atoms about it) still demands a token
    /// with both endpoints, and downstream analyses see that through the
    /// added span.
    pub fn effective_atoms(&self) -> Vec<BoundAtom> {
        let mut atoms = self.atoms.clone();
        for (i, _) in self.tokens.iter().enumerate() {
            let mentioned = self
                .atoms
                .iter()
                .any(|a| a.lhs.0 == i || a.rhs.0 == i);
            if !mentioned {
                atoms.push(BoundAtom {
                    lhs: (i, Endpoint::Start),
                    rhs: (i, Endpoint::End),
                    strict: true,
                });
            }
        }
        atoms
    }
}

/// A rule with all names resolved, ready for analysis.  Token names are
/// scoped per rule, so equal names in different rules never interact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRule {
    pub index: usize,
    pub name: String,
    pub has_trigger: bool,
    /// `(var, value)` of the trigger, when present.
    pub trigger: Option<(VarId, ValId)>,
    pub disjuncts: Vec<BoundDisjunct>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("rule {rule}: {message}")]
pub struct BindError {
    pub rule: String,
    pub message: String,
}

fn bind_quantifier(p: &Problem, rule: &str, q: &Quantifier) -> Result<TokenBinding, BindError> {
    let var = p.var_id(&q.var).ok_or_else(|| BindError {
        rule: rule.into(),
        message: format!("unknown variable {}", q.var),
    })?;
    let value = p
        .value_id(&q.value)
        .filter(|&v| p.vars[var].contains(v))
        .ok_or_else(|| BindError {
            rule: rule.into(),
            message: format!("value {} not in domain of {}", q.value, q.var),
        })?;
    Ok(TokenBinding { name: q.name.clone(), var, value })
}

/// Resolves one rule against the problem's variables and values.
pub fn bind_rule(p: &Problem, index: usize) -> Result<BoundRule, BindError> {
    let rule = &p.rules[index];
    let trigger_binding = rule
        .trigger
        .as_ref()
        .map(|t| bind_quantifier(p, &rule.name, t))
        .transpose()?;
    let mut disjuncts = Vec::new();
    for d in &rule.disjuncts {
        let mut tokens = Vec::new();
        if let Some(t) = &trigger_binding {
            tokens.push(t.clone());
        }
        for q in &d.quantifiers {
            tokens.push(bind_quantifier(p, &rule.name, q)?);
        }
        let lookup = |t: &Term| -> Result<(usize, Endpoint), BindError> {
            tokens
                .iter()
                .position(|b| b.name == t.name)
                .map(|i| (i, t.endpoint))
                .ok_or_else(|| BindError {
                    rule: rule.name.clone(),
                    message: format!("atom mentions undeclared token name {}", t.name),
                })
        };
        let mut atoms = Vec::new();
        for a in &d.atoms {
            atoms.push(BoundAtom { lhs: lookup(&a.lhs)?, rhs: lookup(&a.rhs)?, strict: a.strict });
        }
        disjuncts.push(BoundDisjunct { tokens, atoms });
    }
    Ok(BoundRule {
        index,
        name: rule.name.clone(),
        has_trigger: trigger_binding.is_some(),
        trigger: trigger_binding.as_ref().map(|t| (t.var, t.value)),
        disjuncts,
    })
}

/// Resolves all rules; the usual entry point for analysis passes.
pub fn bind_all(p: &Problem) -> Result<Vec<BoundRule>, BindError> {
    (0..p.rules.len()).map(|i| bind_rule(p, i)).collect()
}

/// Checks a plan against a problem: one timeline per variable, values in
/// domain, positive durations, transition-respecting successions, and all
/// timelines summing to the plan horizon.
pub fn validate_plan(p: &Problem, plan: &Plan) -> Vec<String> {
    let mut out = Vec::new();
    if plan.timelines.len() != p.vars.len() {
        out.push(format!(
            "plan has {} timelines for {} variables",
            plan.timelines.len(),
            p.vars.len()
        ));
        return out;
    }
    for (vi, var) in p.vars.iter().enumerate() {
        let tl = &plan.timelines[vi];
        let mut sum: Time = 0;
        for (i, tok) in tl.iter().enumerate() {
            if tok.duration == 0 {
                out.push(format!("{}: token {} has zero duration", var.name, i));
            }
            if !var.contains(tok.value) {
                out.push(format!(
                    "{}: token {} holds out-of-domain value {}",
                    var.name,
                    i,
                    p.value_name(tok.value)
                ));
            }
            if i > 0 {
                let prev = tl[i - 1].value;
                if !var.successors(prev).contains(&tok.value) {
                    out.push(format!(
                        "{}: transition {} -> {} not allowed",
                        var.name,
                        p.value_name(prev),
                        p.value_name(tok.value)
                    ));
                }
            }
            sum += tok.duration;
        }
        if sum != plan.horizon {
            out.push(format!(
                "{}: timeline spans {} instead of the horizon {}",
                var.name, sum, plan.horizon
            ));
        }
    }
    out
}
