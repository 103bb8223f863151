//! Deterministic automaton tracking synchronization-rule satisfaction.
//!
//! Each rule's single clause closes into a DAG: nodes are coincidence
//! classes of token endpoints, arcs are the entailed precedences (strict
//! arcs kept apart), labels are the events a class manifests as.  A
//! viewpoint pairs that DAG with a downward-closed set K of already-matched
//! nodes; reading a symbol extends K maximally with the nodes whose events
//! the symbol carries ([`RuleDag::consumed`]), subject to never skipping an
//! end the rule is waiting on.
//!
//! The automaton state holds a set of viewpoints per rule: one lineage that
//! stays behind to catch future trigger tokens, plus one per distinct level
//! of progress among pending trigger tokens.  For eager rules, pending
//! tokens with equal remaining obligations share a viewpoint, which keeps
//! the per-rule set a short inclusion chain.

use std::collections::HashMap;

use crate::model::{bind_all, BoundRule, Endpoint, Problem, ValId, VarId};
use crate::closure::{term_index, ClauseClosure};
use crate::words::{events, Event, EventKind, EventSet, Symbol};

/// One coincidence class of token endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagNode {
    /// Member endpoints as `(token index, endpoint)`, ascending.
    pub terms: Vec<(usize, Endpoint)>,
    /// Events the class manifests as when its instant is read.
    pub label: EventSet,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DagError {
    #[error(transparent)]
    Bind(#[from] crate::model::BindError),
    #[error("rule {rule}: body has {count} disjuncts; only single-clause rules compile")]
    Disjunctive { rule: String, count: usize },
    #[error("rule {rule}: clause is inconsistent")]
    InconsistentClause { rule: String },
    #[error("rule {rule}: clause never mentions both trigger endpoints")]
    MissingTriggerEndpoint { rule: String },
    #[error("rule {rule}: clause has {count} endpoint classes; at most 64 supported")]
    TooManyNodes { rule: String, count: usize },
}

/// The labeled precedence DAG of one rule, with per-node bitmask adjacency.
/// Arcs are transitively closed, exactly as entailed by the clause closure.
#[derive(Debug, Clone)]
pub struct RuleDag {
    pub rule_index: usize,
    pub name: String,
    pub trigger: Option<(VarId, ValId)>,
    /// Token names of the clause, trigger first when present.
    pub token_names: Vec<String>,
    pub nodes: Vec<DagNode>,
    arcs: Vec<u64>,
    strict_arcs: Vec<u64>,
    preds: Vec<u64>,
    strict_preds: Vec<u64>,
    /// Node holding the trigger's start endpoint, for triggered rules.
    pub trigger_start: Option<usize>,
    token_start: Vec<Option<usize>>,
    token_end: Vec<Option<usize>>,
    /// Tokens whose pending end may never be silently skipped once started.
    waiting_token: Vec<bool>,
    full: u64,
}

fn bit(i: usize) -> u64 {
    1u64 << i
}

impl RuleDag {
    pub fn build(rule: &BoundRule) -> Result<RuleDag, DagError> {
        if rule.disjuncts.len() != 1 {
            return Err(DagError::Disjunctive {
                rule: rule.name.clone(),
                count: rule.disjuncts.len(),
            });
        }
        let d = &rule.disjuncts[0];
        let closure = ClauseClosure::close(d.tokens.len(), &d.effective_atoms());
        if !closure.consistent() {
            return Err(DagError::InconsistentClause { rule: rule.name.clone() });
        }
        if rule.has_trigger
            && !(closure.occurs(0, Endpoint::Start) && closure.occurs(0, Endpoint::End))
        {
            return Err(DagError::MissingTriggerEndpoint { rule: rule.name.clone() });
        }

        let classes = closure.classes();
        if classes.len() > 64 {
            return Err(DagError::TooManyNodes {
                rule: rule.name.clone(),
                count: classes.len(),
            });
        }

        let n = classes.len();
        let mut node_of_term: HashMap<usize, usize> = HashMap::new();
        let mut nodes = Vec::with_capacity(n);
        for (ni, class) in classes.iter().enumerate() {
            let mut terms = Vec::with_capacity(class.len());
            let mut label = Vec::new();
            for &ti in class {
                node_of_term.insert(ti, ni);
                let (tok, ep) = (ti / 2, if ti % 2 == 0 { Endpoint::Start } else { Endpoint::End });
                terms.push((tok, ep));
                let b = &d.tokens[tok];
                label.push(Event {
                    kind: if ep == Endpoint::Start { EventKind::Start } else { EventKind::End },
                    var: b.var,
                    value: b.value,
                });
            }
            nodes.push(DagNode { terms, label: EventSet::new(label) });
        }

        let mut arcs = vec![0u64; n];
        let mut strict_arcs = vec![0u64; n];
        let mut preds = vec![0u64; n];
        let mut strict_preds = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let ti = classes[i][0];
                let tj = classes[j][0];
                if closure.leq_idx(ti, tj) {
                    arcs[i] |= bit(j);
                    preds[j] |= bit(i);
                    if closure.lt_idx(ti, tj) {
                        strict_arcs[i] |= bit(j);
                        strict_preds[j] |= bit(i);
                    }
                }
            }
        }

        let term_node = |tok: usize, ep: Endpoint| {
            node_of_term.get(&term_index(tok, ep)).copied()
        };
        let token_count = d.tokens.len();
        let token_start: Vec<_> = (0..token_count).map(|t| term_node(t, Endpoint::Start)).collect();
        let token_end: Vec<_> = (0..token_count).map(|t| term_node(t, Endpoint::End)).collect();

        // A started token's end is "waiting" (may not be skipped) when the
        // token is the trigger, or when some other token's endpoint either
        // coincides with its start or is ordered after its start but not
        // after its end.  This mirrors the ambiguity conditions: such an end
        // is the evidence that decides how the other endpoint relates.
        let waiting_token: Vec<bool> = (0..token_count)
            .map(|a| {
                let (sa, ea) = match (token_start[a], token_end[a]) {
                    (Some(s), Some(e)) => (s, e),
                    _ => return false,
                };
                if rule.has_trigger && a == 0 {
                    return true;
                }
                (0..token_count).any(|b| {
                    b != a
                        && [Endpoint::Start, Endpoint::End].iter().any(|&ep| {
                            match term_node(b, ep) {
                                Some(t) => {
                                    sa == t
                                        || (arcs[sa] & bit(t) != 0 && arcs[ea] & bit(t) == 0)
                                }
                                None => false,
                            }
                        })
                })
            })
            .collect();

        Ok(RuleDag {
            rule_index: rule.index,
            name: rule.name.clone(),
            trigger: rule.trigger,
            token_names: d.tokens.iter().map(|t| t.name.clone()).collect(),
            nodes,
            arcs,
            strict_arcs,
            preds,
            strict_preds,
            trigger_start: rule
                .trigger
                .map(|_| node_of_term[&term_index(0, Endpoint::Start)]),
            token_start,
            token_end,
            waiting_token,
            full: if n == 64 { u64::MAX } else { bit(n) - 1 },
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn full(&self) -> u64 {
        self.full
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn strict_arc_count(&self) -> usize {
        self.strict_arcs.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arcs[from] & bit(to) != 0
    }

    pub fn has_strict_arc(&self, from: usize, to: usize) -> bool {
        self.strict_arcs[from] & bit(to) != 0
    }

    pub fn strict_arc_row(&self, from: usize) -> u64 {
        self.strict_arcs[from]
    }

    pub fn is_downward_closed(&self, k: u64) -> bool {
        (0..self.nodes.len()).all(|i| k & bit(i) == 0 || self.preds[i] & !k == 0)
    }

    /// Largest downward-closed superset of `k` with no strict arc between
    /// two of its new nodes: everything that could be matched at the next
    /// instant, regardless of which events it carries.
    pub fn next_set(&self, k: u64) -> u64 {
        let mut cur = k;
        loop {
            let mut grown = false;
            for i in 0..self.nodes.len() {
                if cur & bit(i) == 0
                    && self.preds[i] & !cur == 0
                    && self.strict_preds[i] & cur & !k == 0
                {
                    cur |= bit(i);
                    grown = true;
                }
            }
            if !grown {
                return cur;
            }
        }
    }

    /// Largest downward-closed subset of `next_set(k)` whose new nodes all
    /// have their labels among the symbol's events: how far the viewpoint
    /// actually advances on this symbol.
    pub fn consumed(&self, k: u64, ev: &EventSet) -> u64 {
        let limit = self.next_set(k);
        let mut cur = k;
        loop {
            let mut grown = false;
            for i in 0..self.nodes.len() {
                if limit & bit(i) != 0
                    && cur & bit(i) == 0
                    && self.preds[i] & !cur == 0
                    && self.nodes[i].label.is_subset_of(ev)
                {
                    cur |= bit(i);
                    grown = true;
                }
            }
            if !grown {
                return cur;
            }
        }
    }

    /// End events the viewpoint must not see pass unconsumed: ends of
    /// started-but-unfinished tokens whose ending carries information.
    pub fn waiting_events(&self, k: u64) -> EventSet {
        let mut out = Vec::new();
        for t in 0..self.waiting_token.len() {
            if !self.waiting_token[t] {
                continue;
            }
            if let (Some(s), Some(e)) = (self.token_start[t], self.token_end[t]) {
                if k & bit(s) != 0 && k & bit(e) == 0 {
                    out.extend(self.nodes[e].label.iter().copied().filter(|ev| {
                        ev.kind == EventKind::End
                    }));
                }
            }
        }
        EventSet::new(out)
    }

    /// The viewpoint may read the symbol: every waited-on end among the
    /// symbol's events is absorbed by the advance the symbol allows.
    pub fn compatible(&self, k: u64, ev: &EventSet) -> bool {
        let gained = self.consumed(k, ev) & !k;
        let mut gained_labels = Vec::new();
        for i in 0..self.nodes.len() {
            if gained & bit(i) != 0 {
                gained_labels.extend(self.nodes[i].label.iter().copied());
            }
        }
        let gained_labels = EventSet::new(gained_labels);
        self.waiting_events(k)
            .iter()
            .filter(|e| ev.contains(e))
            .all(|e| gained_labels.contains(e))
    }

    /// The symbol starts a trigger token that this viewpoint picks up: the
    /// trigger's start node is among the freshly consumed ones.
    pub fn enables(&self, k: u64, ev: &EventSet) -> bool {
        match self.trigger_start {
            Some(ts) => self.consumed(k, ev) & !k & bit(ts) != 0,
            None => false,
        }
    }

    /// The symbol starts a token matching the rule's trigger.
    pub fn fires(&self, ev: &EventSet) -> bool {
        match self.trigger {
            Some((var, value)) => ev.contains(&Event::start(var, value)),
            None => false,
        }
    }

    /// A viewpoint is obligated once its rule is triggerless or it has
    /// picked up a trigger token; obligated viewpoints must finish.
    pub fn is_obligated(&self, k: u64) -> bool {
        match self.trigger_start {
            Some(ts) => k & bit(ts) != 0,
            None => true,
        }
    }

    pub fn render_dot(&self, p: &Problem) -> String {
        let mut out = String::new();
        out.push_str(&format!("digraph \"{}\" {{\n  rankdir=LR;\n", self.name));
        for (i, node) in self.nodes.iter().enumerate() {
            let terms: Vec<String> = node
                .terms
                .iter()
                .map(|&(tok, ep)| {
                    let e = if ep == Endpoint::Start { "start" } else { "end" };
                    format!("{}({})", e, self.token_names[tok])
                })
                .collect();
            let label: Vec<String> = node
                .label
                .iter()
                .map(|ev| {
                    let kind = if ev.kind == EventKind::Start { "start" } else { "end" };
                    format!("{}({},{})", kind, p.vars[ev.var].name, p.value_name(ev.value))
                })
                .collect();
            out.push_str(&format!(
                "  n{} [shape=box, label=\"{}\\n{{{}}}\"];\n",
                i,
                terms.join(", "),
                label.join(", ")
            ));
        }
        for i in 0..self.nodes.len() {
            for j in 0..self.nodes.len() {
                if self.arcs[i] & bit(j) != 0 {
                    let style = if self.strict_arcs[i] & bit(j) != 0 { "solid" } else { "dashed" };
                    out.push_str(&format!("  n{} -> n{} [style={}];\n", i, j, style));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A state: per rule, the inclusion chain of viewpoint progress sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleStateData {
    Sink,
    Set(Vec<Vec<u64>>),
}

/// The joint rule automaton: one DAG per rule, states interned on demand.
#[derive(Debug)]
pub struct RuleAutomaton {
    pub dags: Vec<RuleDag>,
    states: Vec<RuleStateData>,
    index: HashMap<RuleStateData, usize>,
}

pub const RULE_SINK: usize = 0;
pub const RULE_INITIAL: usize = 1;

impl RuleAutomaton {
    pub fn new(p: &Problem) -> Result<RuleAutomaton, DagError> {
        let rules = bind_all(p)?;
        let dags = rules
            .iter()
            .map(RuleDag::build)
            .collect::<Result<Vec<_>, _>>()?;
        let mut automaton = RuleAutomaton { dags, states: Vec::new(), index: HashMap::new() };
        let sink = automaton.intern(RuleStateData::Sink);
        debug_assert_eq!(sink, RULE_SINK);
        let initial = RuleStateData::Set(
            automaton.dags.iter().map(|_| vec![0u64]).collect(),
        );
        let initial = automaton.intern(initial);
        debug_assert_eq!(initial, RULE_INITIAL);
        Ok(automaton)
    }

    fn intern(&mut self, data: RuleStateData) -> usize {
        if let Some(&id) = self.index.get(&data) {
            return id;
        }
        let id = self.states.len();
        self.states.push(data.clone());
        self.index.insert(data, id);
        id
    }

    pub fn state(&self, id: usize) -> &RuleStateData {
        &self.states[id]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Advances on the events of one symbol.
    pub fn step_events(&mut self, q: usize, ev: &EventSet) -> usize {
        let vps = match &self.states[q] {
            RuleStateData::Sink => return RULE_SINK,
            RuleStateData::Set(vps) => vps.clone(),
        };
        let mut next_vps = Vec::with_capacity(vps.len());
        for (r, dag) in self.dags.iter().enumerate() {
            if vps[r].iter().any(|&k| !dag.compatible(k, ev)) {
                return RULE_SINK;
            }
            if dag.fires(ev) && !vps[r].iter().any(|&k| dag.enables(k, ev)) {
                return RULE_SINK;
            }
            let mut set: Vec<u64> = Vec::with_capacity(vps[r].len() + 1);
            for &k in &vps[r] {
                set.push(dag.consumed(k, ev));
                if dag.enables(k, ev) {
                    set.push(k);
                }
            }
            set.sort_unstable();
            set.dedup();
            debug_assert!(
                set.windows(2).all(|w| w[0] & !w[1] == 0),
                "rule {}: viewpoints not an inclusion chain: {set:?}",
                dag.name
            );
            debug_assert!(set.len() <= dag.node_count() + 1);
            next_vps.push(set);
        }
        self.intern(RuleStateData::Set(next_vps))
    }

    pub fn step(&mut self, q: usize, symbol: &Symbol) -> usize {
        self.step_events(q, &events(symbol))
    }

    /// Every obligated viewpoint has matched its whole DAG.
    pub fn is_final(&self, q: usize) -> bool {
        match &self.states[q] {
            RuleStateData::Sink => false,
            RuleStateData::Set(vps) => vps.iter().zip(&self.dags).all(|(set, dag)| {
                set.iter().all(|&k| !dag.is_obligated(k) || k == dag.full())
            }),
        }
    }

    /// Largest per-rule viewpoint count over all states interned so far.
    pub fn max_viewpoints_per_rule(&self) -> Vec<usize> {
        let mut out = vec![0; self.dags.len()];
        for s in &self.states {
            if let RuleStateData::Set(vps) = s {
                for (r, set) in vps.iter().enumerate() {
                    out[r] = out[r].max(set.len());
                }
            }
        }
        out
    }
}
