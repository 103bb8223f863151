//! Compilation of structured process trees into eager planning problems.
//!
//! A process is a tree of single-entry single-exit blocks: tasks,
//! sequential flows, parallel branches, exclusive choices and loops.
//! Every block becomes a boolean activity variable; flows add a phase
//! variable sequencing their two children and choices add a decision
//! variable recording the branch taken.  The synchronization rules tie
//! each activation interval of a block to matching intervals of its
//! children, using only start-anchored and end-anchored shapes, so the
//! whole encoding stays inside the eager fragment.  A triggerless goal
//! rule demands one activation of the root.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::model::{
    Atom, Existential, Plan, Problem, ProblemBuilder, Quantifier, Rule, Term, Token,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SeseBlock {
    Task { id: String },
    Flow { id: String, first: Box<SeseBlock>, second: Box<SeseBlock> },
    Parallel { id: String, first: Box<SeseBlock>, second: Box<SeseBlock> },
    Loop { id: String, body: Box<SeseBlock> },
    Xor { id: String, high: Box<SeseBlock>, low: Box<SeseBlock> },
}

impl SeseBlock {
    pub fn id(&self) -> &str {
        match self {
            SeseBlock::Task { id }
            | SeseBlock::Flow { id, .. }
            | SeseBlock::Parallel { id, .. }
            | SeseBlock::Loop { id, .. }
            | SeseBlock::Xor { id, .. } => id,
        }
    }

    fn children(&self) -> Vec<&SeseBlock> {
        match self {
            SeseBlock::Task { .. } => Vec::new(),
            SeseBlock::Flow { first, second, .. }
            | SeseBlock::Parallel { first, second, .. } => vec![first, second],
            SeseBlock::Loop { body, .. } => vec![body],
            SeseBlock::Xor { high, low, .. } => vec![high, low],
        }
    }

    /// Pre-order traversal.
    fn walk<'a>(&'a self, out: &mut Vec<&'a SeseBlock>) {
        out.push(self);
        for c in self.children() {
            c.walk(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("block id may not be empty")]
    EmptyId,
    #[error("duplicate block id {0}")]
    DuplicateId(String),
    #[error("block id {0} collides with a generated variable name")]
    ClashingName(String),
    #[error("no block named {0}")]
    UnknownBlock(String),
    #[error("cannot parse process tree: {0}")]
    Json(String),
}

pub fn from_json(text: &str) -> Result<SeseBlock, TreeError> {
    serde_json::from_str(text).map_err(|e| TreeError::Json(e.to_string()))
}

pub fn to_json(tree: &SeseBlock) -> String {
    serde_json::to_string_pretty(tree).expect("tree serialization cannot fail")
}

#[derive(Debug, Clone)]
pub struct CompiledProblem {
    pub problem: Problem,
    pub root: String,
    pub block_ids: Vec<String>,
}

const TOP: &str = "top";
const BOT: &str = "bot";
const BEFORE: &str = "top_before";
const AFTER: &str = "top_after";
const HIGH: &str = "top_high";
const LOW: &str = "top_low";

fn flow_var(id: &str) -> String {
    format!("{id}_flow")
}

fn dec_var(id: &str) -> String {
    format!("{id}_dec")
}

/// Tracks which variable holds which values, so rules whose trigger or
/// witness value is missing from the variable's domain can be dropped.
struct Catalog {
    rules: Vec<Rule>,
    domains: Vec<(String, Vec<&'static str>)>,
}

impl Catalog {
    fn has(&self, var: &str, value: &str) -> bool {
        self.domains
            .iter()
            .any(|(v, dom)| v == var && dom.contains(&value))
    }

    fn push(&mut self, name: String, trigger: (&str, &str), witness: (&str, &str), atoms: Vec<Atom>) {
        if !self.has(trigger.0, trigger.1) || !self.has(witness.0, witness.1) {
            return;
        }
        self.rules.push(Rule {
            name,
            trigger: Some(Quantifier::new("a0", trigger.0, trigger.1)),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("a1", witness.0, witness.1)],
                atoms,
            }],
        });
    }
}

/// Trigger and witness cover the same interval.
fn equal_atoms() -> Vec<Atom> {
    let mut v = Atom::eq(Term::start("a0"), Term::start("a1")).to_vec();
    v.extend(Atom::eq(Term::end("a0"), Term::end("a1")));
    v
}

/// The witness starts with the trigger and ends within it.
fn leads_atoms() -> Vec<Atom> {
    let mut v = Atom::eq(Term::start("a0"), Term::start("a1")).to_vec();
    v.push(Atom::le(Term::end("a1"), Term::end("a0")));
    v
}

/// The witness starts within the trigger and ends with it.
fn closes_atoms() -> Vec<Atom> {
    let mut v = vec![Atom::le(Term::start("a0"), Term::start("a1"))];
    v.extend(Atom::eq(Term::end("a0"), Term::end("a1")));
    v
}

/// The witness starts with the trigger and outlives it.
fn opens_atoms() -> Vec<Atom> {
    let mut v = Atom::eq(Term::start("a0"), Term::start("a1")).to_vec();
    v.push(Atom::le(Term::end("a0"), Term::end("a1")));
    v
}

pub fn compile(tree: &SeseBlock) -> Result<CompiledProblem, TreeError> {
    let mut blocks = Vec::new();
    tree.walk(&mut blocks);

    let mut seen = HashSet::new();
    for b in &blocks {
        if b.id().is_empty() {
            return Err(TreeError::EmptyId);
        }
        if !seen.insert(b.id().to_string()) {
            return Err(TreeError::DuplicateId(b.id().to_string()));
        }
    }
    let mut var_names = HashSet::new();
    for b in &blocks {
        let mut names = vec![b.id().to_string()];
        if matches!(b, SeseBlock::Flow { .. }) {
            names.push(flow_var(b.id()));
        }
        if matches!(b, SeseBlock::Xor { .. }) {
            names.push(dec_var(b.id()));
        }
        for n in names {
            if !var_names.insert(n.clone()) {
                return Err(TreeError::ClashingName(n));
            }
        }
    }

    let root_id = tree.id().to_string();
    let mut builder = ProblemBuilder::new();
    let mut catalog = Catalog { rules: Vec::new(), domains: Vec::new() };

    for b in &blocks {
        let id = b.id();
        if id == root_id {
            builder.var(id, &[(TOP, &[])]);
            catalog.domains.push((id.to_string(), vec![TOP]));
        } else {
            builder.var(id, &[(TOP, &[TOP, BOT]), (BOT, &[TOP])]);
            catalog.domains.push((id.to_string(), vec![TOP, BOT]));
        }
        match b {
            SeseBlock::Flow { .. } => {
                let fv = flow_var(id);
                builder.var(
                    &fv,
                    &[(BOT, &[BEFORE]), (BEFORE, &[AFTER]), (AFTER, &[BOT, BEFORE])],
                );
                catalog.domains.push((fv, vec![BOT, BEFORE, AFTER]));
            }
            SeseBlock::Xor { .. } => {
                let dv = dec_var(id);
                let all = [BOT, HIGH, LOW];
                builder.var(&dv, &[(BOT, &all), (HIGH, &all), (LOW, &all)]);
                catalog.domains.push((dv, vec![BOT, HIGH, LOW]));
            }
            _ => {}
        }
    }

    for b in &blocks {
        let id = b.id();
        match b {
            SeseBlock::Task { .. } => {}
            SeseBlock::Flow { first, second, .. } => {
                let fv = flow_var(id);
                let (c1, c2) = (first.id(), second.id());
                catalog.push(format!("{id}_Ff1"), (id, TOP), (&fv, BEFORE), leads_atoms());
                catalog.push(format!("{id}_Ff2"), (id, TOP), (&fv, AFTER), closes_atoms());
                catalog.push(format!("{id}_Ff3"), (&fv, BEFORE), (id, TOP), opens_atoms());
                catalog.push(format!("{id}_Ff4"), (id, BOT), (&fv, BOT), equal_atoms());
                catalog.push(format!("{id}_Ff5"), (&fv, BOT), (id, BOT), equal_atoms());
                catalog.push(format!("{id}_Ff6"), (&fv, BEFORE), (c1, TOP), equal_atoms());
                catalog.push(format!("{id}_Ff7"), (&fv, AFTER), (c2, TOP), equal_atoms());
                catalog.push(format!("{id}_Fb1"), (c1, TOP), (&fv, BEFORE), equal_atoms());
                catalog.push(format!("{id}_Fb2"), (c2, TOP), (&fv, AFTER), equal_atoms());
            }
            SeseBlock::Parallel { first, second, .. } => {
                let (c1, c2) = (first.id(), second.id());
                catalog.push(format!("{id}_Pf1"), (id, TOP), (c1, TOP), equal_atoms());
                catalog.push(format!("{id}_Pf2"), (id, TOP), (c2, TOP), equal_atoms());
                catalog.push(format!("{id}_Pb1"), (c1, TOP), (id, TOP), equal_atoms());
                catalog.push(format!("{id}_Pb2"), (c2, TOP), (id, TOP), equal_atoms());
            }
            SeseBlock::Loop { body, .. } => {
                let c = body.id();
                catalog.push(format!("{id}_Lf1"), (id, TOP), (c, TOP), leads_atoms());
                catalog.push(format!("{id}_Lf2"), (id, TOP), (c, TOP), closes_atoms());
                catalog.push(format!("{id}_Lf3"), (id, BOT), (c, BOT), equal_atoms());
                catalog.push(format!("{id}_Lb1"), (c, BOT), (id, BOT), equal_atoms());
            }
            SeseBlock::Xor { high, low, .. } => {
                let dv = dec_var(id);
                let (c1, c2) = (high.id(), low.id());
                catalog.push(format!("{id}_Xf1"), (id, BOT), (&dv, BOT), equal_atoms());
                catalog.push(format!("{id}_Xf2"), (&dv, BOT), (id, BOT), equal_atoms());
                catalog.push(format!("{id}_Xf3"), (&dv, HIGH), (id, TOP), equal_atoms());
                catalog.push(format!("{id}_Xf4"), (&dv, LOW), (id, TOP), equal_atoms());
                catalog.push(format!("{id}_Xf5"), (&dv, HIGH), (c1, TOP), equal_atoms());
                catalog.push(format!("{id}_Xf6"), (&dv, LOW), (c2, TOP), equal_atoms());
                catalog.push(format!("{id}_Xb1"), (c1, TOP), (&dv, HIGH), equal_atoms());
                catalog.push(format!("{id}_Xb2"), (c2, TOP), (&dv, LOW), equal_atoms());
            }
        }
    }

    for rule in catalog.rules {
        builder.rule(rule);
    }
    builder.rule(Rule {
        name: "goal".into(),
        trigger: None,
        disjuncts: vec![Existential {
            quantifiers: vec![Quantifier::new("t", &root_id, TOP)],
            atoms: vec![],
        }],
    });

    Ok(CompiledProblem {
        problem: builder.build(),
        root: root_id,
        block_ids: blocks.iter().map(|b| b.id().to_string()).collect(),
    })
}

/// Extends a compiled problem with an environment condition variable that
/// must be unstable while `during_id` runs and stable while `after_id`
/// runs.  The condition may settle but never destabilize again.
pub fn condition_overlay(
    c: &CompiledProblem,
    during_id: &str,
    after_id: &str,
) -> Result<CompiledProblem, TreeError> {
    for id in [during_id, after_id] {
        if c.problem.var_id(id).is_none() {
            return Err(TreeError::UnknownBlock(id.to_string()));
        }
    }
    let mut builder = ProblemBuilder::new();
    for var in &c.problem.vars {
        let spec: Vec<(String, Vec<String>)> = var
            .domain
            .iter()
            .map(|&v| {
                (
                    c.problem.value_name(v).to_string(),
                    var.successors(v)
                        .iter()
                        .map(|&s| c.problem.value_name(s).to_string())
                        .collect(),
                )
            })
            .collect();
        let spec_refs: Vec<(&str, Vec<&str>)> = spec
            .iter()
            .map(|(v, ss)| (v.as_str(), ss.iter().map(|s| s.as_str()).collect()))
            .collect();
        let spec_slices: Vec<(&str, &[&str])> =
            spec_refs.iter().map(|(v, ss)| (*v, ss.as_slice())).collect();
        builder.var(&var.name, &spec_slices);
    }
    builder.var(
        "condition",
        &[("unstable", &["stable", "unstable"]), ("stable", &["stable"])],
    );
    for rule in &c.problem.rules {
        builder.rule(rule.clone());
    }
    builder.rule(Rule {
        name: format!("{during_id}_Cf1"),
        trigger: Some(Quantifier::new("a0", during_id, TOP)),
        disjuncts: vec![Existential {
            quantifiers: vec![Quantifier::new("a1", "condition", "unstable")],
            atoms: leads_atoms(),
        }],
    });
    builder.rule(Rule {
        name: format!("{after_id}_Cf1"),
        trigger: Some(Quantifier::new("a0", after_id, TOP)),
        disjuncts: vec![Existential {
            quantifiers: vec![Quantifier::new("a1", "condition", "stable")],
            atoms: equal_atoms(),
        }],
    });
    Ok(CompiledProblem {
        problem: builder.build(),
        root: c.root.clone(),
        block_ids: c.block_ids.clone(),
    })
}

fn leaf(id: &str) -> Box<SeseBlock> {
    Box::new(SeseBlock::Task { id: id.into() })
}

/// The worked expense-claim process: intake and decision, then either a
/// reimbursement branch with parallel bookings and a wrap-up task, or a
/// rejection branch with a notification and a repeated follow-up loop.
pub fn ed_tree() -> SeseBlock {
    SeseBlock::Flow {
        id: "b1".into(),
        first: Box::new(SeseBlock::Flow {
            id: "b2".into(),
            first: leaf("b15"),
            second: Box::new(SeseBlock::Xor {
                id: "b3".into(),
                high: Box::new(SeseBlock::Flow {
                    id: "b4".into(),
                    first: Box::new(SeseBlock::Parallel {
                        id: "b5".into(),
                        first: leaf("b11"),
                        second: leaf("b12"),
                    }),
                    second: leaf("b6"),
                }),
                low: Box::new(SeseBlock::Flow {
                    id: "b7".into(),
                    first: leaf("b8"),
                    second: Box::new(SeseBlock::Loop { id: "b9".into(), body: leaf("b13") }),
                }),
            }),
        }),
        second: leaf("b16"),
    }
}

type TokenRow<'a> = (&'a str, &'a [(&'a str, u64)]);

fn plan_from_rows(c: &CompiledProblem, horizon: u64, rows: &[TokenRow]) -> Plan {
    let p = &c.problem;
    let mut plan = Plan::empty(p.vars.len());
    plan.horizon = horizon;
    for (var, tokens) in rows {
        let vid = p.var_id(var).unwrap_or_else(|| panic!("fixture names unknown variable {var}"));
        plan.timelines[vid] = tokens
            .iter()
            .map(|&(value, duration)| Token {
                value: p.value_id(value).unwrap_or_else(|| panic!("unknown value {value}")),
                duration,
            })
            .collect();
    }
    plan
}

/// Hand-written execution where the decision takes the reimbursement
/// branch, with the loop side idle throughout.
pub fn critical_fixture(c: &CompiledProblem) -> Plan {
    let mut rows: Vec<TokenRow> = vec![
        ("b1", &[(TOP, 11)]),
        ("b1_flow", &[(BEFORE, 9), (AFTER, 2)]),
        ("b2", &[(TOP, 9), (BOT, 2)]),
        ("b2_flow", &[(BEFORE, 2), (AFTER, 7), (BOT, 2)]),
        ("b15", &[(TOP, 2), (BOT, 9)]),
        ("b3", &[(BOT, 2), (TOP, 7), (BOT, 2)]),
        ("b3_dec", &[(BOT, 2), (HIGH, 7), (BOT, 2)]),
        ("b4", &[(BOT, 2), (TOP, 7), (BOT, 2)]),
        ("b4_flow", &[(BOT, 2), (BEFORE, 4), (AFTER, 3), (BOT, 2)]),
        ("b5", &[(BOT, 2), (TOP, 4), (BOT, 5)]),
        ("b11", &[(BOT, 2), (TOP, 4), (BOT, 5)]),
        ("b12", &[(BOT, 2), (TOP, 4), (BOT, 5)]),
        ("b6", &[(BOT, 6), (TOP, 3), (BOT, 2)]),
        ("b16", &[(BOT, 9), (TOP, 2)]),
        ("b7", &[(BOT, 11)]),
        ("b7_flow", &[(BOT, 11)]),
        ("b8", &[(BOT, 11)]),
        ("b9", &[(BOT, 11)]),
        ("b13", &[(BOT, 11)]),
    ];
    if c.problem.var_id("condition").is_some() {
        rows.push(("condition", &[("unstable", 2), ("unstable", 4), ("stable", 3), ("stable", 2)]));
    }
    plan_from_rows(c, 11, &rows)
}

/// Hand-written execution taking the rejection branch, where the loop
/// body runs twice.
pub fn non_critical_fixture(c: &CompiledProblem) -> Plan {
    let mut rows: Vec<TokenRow> = vec![
        ("b1", &[(TOP, 11)]),
        ("b1_flow", &[(BEFORE, 9), (AFTER, 2)]),
        ("b2", &[(TOP, 9), (BOT, 2)]),
        ("b2_flow", &[(BEFORE, 2), (AFTER, 7), (BOT, 2)]),
        ("b15", &[(TOP, 2), (BOT, 9)]),
        ("b16", &[(BOT, 9), (TOP, 2)]),
        ("b3", &[(BOT, 2), (TOP, 7), (BOT, 2)]),
        ("b3_dec", &[(BOT, 2), (LOW, 7), (BOT, 2)]),
        ("b7", &[(BOT, 2), (TOP, 7), (BOT, 2)]),
        ("b7_flow", &[(BOT, 2), (BEFORE, 2), (AFTER, 5), (BOT, 2)]),
        ("b8", &[(BOT, 2), (TOP, 2), (BOT, 7)]),
        ("b9", &[(BOT, 4), (TOP, 5), (BOT, 2)]),
        ("b13", &[(BOT, 4), (TOP, 3), (TOP, 2), (BOT, 2)]),
        ("b4", &[(BOT, 11)]),
        ("b4_flow", &[(BOT, 11)]),
        ("b5", &[(BOT, 11)]),
        ("b11", &[(BOT, 11)]),
        ("b12", &[(BOT, 11)]),
        ("b6", &[(BOT, 11)]),
    ];
    if c.problem.var_id("condition").is_some() {
        rows.push(("condition", &[("unstable", 9), ("stable", 2)]));
    }
    plan_from_rows(c, 11, &rows)
}

/// The critical fixture with the flow phase of the root never switching
/// to its second half; the root's closing rule must flag this.
pub fn critical_mutation(c: &CompiledProblem) -> Plan {
    let mut plan = critical_fixture(c);
    let vid = c.problem.var_id("b1_flow").unwrap();
    plan.timelines[vid] = vec![Token {
        value: c.problem.value_id(BEFORE).unwrap(),
        duration: 11,
    }];
    plan
}

/// The non-critical fixture with the second loop iteration cut short, so
/// no body run closes together with the loop.
pub fn non_critical_mutation(c: &CompiledProblem) -> Plan {
    let mut plan = non_critical_fixture(c);
    let vid = c.problem.var_id("b13").unwrap();
    let bot = c.problem.value_id(BOT).unwrap();
    let top = c.problem.value_id(TOP).unwrap();
    plan.timelines[vid] = vec![
        Token { value: bot, duration: 4 },
        Token { value: top, duration: 3 },
        Token { value: bot, duration: 4 },
    ];
    plan
}
