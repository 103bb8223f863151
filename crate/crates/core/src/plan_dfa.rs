//! Deterministic automaton for the well-formed plan encodings of a problem.
//!
//! A word encodes a plan when its first symbol assigns every variable an
//! initial domain value and every later symbol either keeps a variable's
//! running token or switches it along a declared transition.  The automaton
//! checks exactly that; after the first symbol it only needs each
//! variable's last change, so a state is one `(from, to)` pair per
//! variable.  Every non-sink state is accepting: the empty word encodes the
//! empty plan, and any run that never broke a constraint encodes the plan
//! whose final tokens close at the horizon.

use std::collections::HashMap;

use crate::model::{Problem, ValId};
use crate::words::{Event, EventSet, StepEntry, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlanStateData {
    /// No symbol read yet.
    Init,
    /// Some symbol broke well-formedness; absorbs everything.
    Sink,
    /// Last change per variable; the current value is each pair's second.
    Snap(Vec<(ValId, ValId)>),
}

pub const PLAN_INIT: usize = 0;
pub const PLAN_SINK: usize = 1;

/// Plan-encoding automaton with states interned on demand.
#[derive(Debug)]
pub struct PlanAutomaton {
    var_count: usize,
    /// Per variable, membership of each global value in its domain.
    in_domain: Vec<Vec<bool>>,
    /// Per variable and global value, the declared successors (ascending).
    succ: Vec<Vec<Vec<ValId>>>,
    /// Variable indices ordered by name; enumeration significance order.
    var_order: Vec<usize>,
    domains: Vec<Vec<ValId>>,
    states: Vec<PlanStateData>,
    index: HashMap<PlanStateData, usize>,
}

impl PlanAutomaton {
    pub fn new(p: &Problem) -> PlanAutomaton {
        let value_count = p.value_count();
        let mut in_domain = Vec::with_capacity(p.vars.len());
        let mut succ = Vec::with_capacity(p.vars.len());
        for var in &p.vars {
            let mut dom = vec![false; value_count];
            for &v in &var.domain {
                dom[v] = true;
            }
            let mut s = vec![Vec::new(); value_count];
            for &v in &var.domain {
                s[v] = var.successors(v).to_vec();
            }
            in_domain.push(dom);
            succ.push(s);
        }
        let mut var_order: Vec<usize> = (0..p.vars.len()).collect();
        var_order.sort_by(|&a, &b| p.vars[a].name.cmp(&p.vars[b].name));
        let mut automaton = PlanAutomaton {
            var_count: p.vars.len(),
            in_domain,
            succ,
            var_order,
            domains: p.vars.iter().map(|v| v.domain.clone()).collect(),
            states: Vec::new(),
            index: HashMap::new(),
        };
        let init = automaton.intern(PlanStateData::Init);
        debug_assert_eq!(init, PLAN_INIT);
        let sink = automaton.intern(PlanStateData::Sink);
        debug_assert_eq!(sink, PLAN_SINK);
        automaton
    }

    fn intern(&mut self, data: PlanStateData) -> usize {
        if let Some(&id) = self.index.get(&data) {
            return id;
        }
        let id = self.states.len();
        self.states.push(data.clone());
        self.index.insert(data, id);
        id
    }

    pub fn state(&self, id: usize) -> &PlanStateData {
        &self.states[id]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn step(&mut self, s: usize, symbol: &Symbol) -> usize {
        let data = self.states[s].clone();
        match (data, symbol) {
            (PlanStateData::Sink, _) => PLAN_SINK,
            (PlanStateData::Init, Symbol::Initial(vals)) => {
                if vals.len() != self.var_count
                    || vals.iter().enumerate().any(|(i, &v)| {
                        v >= self.in_domain[i].len() || !self.in_domain[i][v]
                    })
                {
                    return PLAN_SINK;
                }
                self.intern(PlanStateData::Snap(vals.iter().map(|&v| (v, v)).collect()))
            }
            (PlanStateData::Init, Symbol::Step(_)) => PLAN_SINK,
            (PlanStateData::Snap(_), Symbol::Initial(_)) => PLAN_SINK,
            (PlanStateData::Snap(pairs), Symbol::Step(entries)) => {
                if entries.len() != self.var_count {
                    return PLAN_SINK;
                }
                let mut next = pairs;
                for (i, entry) in entries.iter().enumerate() {
                    match *entry {
                        StepEntry::Unchanged => {}
                        StepEntry::Change { from, to } => {
                            if from != next[i].1
                                || to >= self.in_domain[i].len()
                                || !self.succ[i][from].contains(&to)
                            {
                                return PLAN_SINK;
                            }
                            next[i] = (from, to);
                        }
                    }
                }
                self.intern(PlanStateData::Snap(next))
            }
        }
    }

    pub fn is_sink(&self, s: usize) -> bool {
        s == PLAN_SINK
    }

    /// Every non-sink state accepts; the empty word encodes the empty plan.
    pub fn is_final(&self, s: usize) -> bool {
        s != PLAN_SINK
    }

    pub fn accepts(&mut self, word: &[Symbol]) -> bool {
        let mut s = PLAN_INIT;
        for sym in word {
            s = self.step(s, sym);
            if s == PLAN_SINK {
                return false;
            }
        }
        self.is_final(s)
    }

    pub fn current_values(&self, s: usize) -> Option<Vec<ValId>> {
        match &self.states[s] {
            PlanStateData::Snap(pairs) => Some(pairs.iter().map(|&(_, to)| to).collect()),
            _ => None,
        }
    }

    /// Events implied by cutting the word here: every running token ends.
    pub fn closing_events(&self, s: usize) -> EventSet {
        match &self.states[s] {
            PlanStateData::Snap(pairs) => EventSet::new(
                pairs
                    .iter()
                    .enumerate()
                    .map(|(var, &(_, to))| Event::end(var, to))
                    .collect(),
            ),
            _ => EventSet::empty(),
        }
    }

    /// Lazy enumeration of the symbols that keep the run out of the sink,
    /// in ascending order: per-variable choices ordered by value id (a step
    /// lists Unchanged first), combined with alphabetically earlier
    /// variables more significant.  The cursor owns its choice tables, so
    /// the automaton stays free for stepping while enumerating.
    pub fn symbol_cursor(&self, s: usize) -> SymbolCursor {
        let slots = match &self.states[s] {
            PlanStateData::Sink => CursorSlots::Exhausted,
            PlanStateData::Init => CursorSlots::Initial(
                self.var_order.iter().map(|&v| (v, self.domains[v].clone())).collect(),
            ),
            PlanStateData::Snap(pairs) => CursorSlots::Step(
                self.var_order
                    .iter()
                    .map(|&v| {
                        let cur = pairs[v].1;
                        let mut entries = vec![StepEntry::Unchanged];
                        entries.extend(
                            self.succ[v][cur]
                                .iter()
                                .map(|&to| StepEntry::Change { from: cur, to }),
                        );
                        (v, entries)
                    })
                    .collect(),
            ),
        };
        SymbolCursor::new(slots, self.var_count)
    }

    /// Materialized form of [`Self::symbol_cursor`], for small states.
    pub fn compatible_symbols(&self, s: usize) -> Vec<Symbol> {
        self.symbol_cursor(s).collect()
    }

    /// Upper bound on reachable states: one per initial assignment, one per
    /// last-change snapshot, plus the start and sink states.
    pub fn reachable_bound(p: &Problem) -> u128 {
        let v = p.value_count() as u128;
        let n = p.vars.len() as u32;
        v.pow(n) + (v * v + 1).pow(n) + 2
    }

    /// Walks the reachable fragment and renders it; intended for problems
    /// small enough to draw.
    pub fn render_dot(&mut self, p: &Problem) -> String {
        let mut out = String::from("digraph plan {\n  rankdir=LR;\n");
        let mut queue = vec![PLAN_INIT];
        let mut seen = vec![PLAN_INIT];
        while let Some(s) = queue.pop() {
            let label = match &self.states[s] {
                PlanStateData::Init => "init".to_string(),
                PlanStateData::Sink => "sink".to_string(),
                PlanStateData::Snap(pairs) => pairs
                    .iter()
                    .enumerate()
                    .map(|(var, &(_, to))| {
                        format!("{}={}", p.vars[var].name, p.value_name(to))
                    })
                    .collect::<Vec<_>>()
                    .join(", "),
            };
            let shape = if self.is_final(s) { "doublecircle" } else { "circle" };
            out.push_str(&format!("  s{s} [shape={shape}, label=\"{label}\"];\n"));
            for sym in self.compatible_symbols(s) {
                let t = self.step(s, &sym);
                out.push_str(&format!(
                    "  s{s} -> s{t} [label=\"{}\"];\n",
                    crate::words::render_symbol(p, &sym)
                ));
                if !seen.contains(&t) {
                    seen.push(t);
                    queue.push(t);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

enum CursorSlots {
    /// One domain value per variable, `(variable, choices)` in name order.
    Initial(Vec<(usize, Vec<ValId>)>),
    /// One step entry per variable, `(variable, choices)` in name order.
    Step(Vec<(usize, Vec<StepEntry>)>),
    Exhausted,
}

impl CursorSlots {
    fn widths(&self) -> Option<Vec<usize>> {
        match self {
            CursorSlots::Initial(slots) => Some(slots.iter().map(|(_, c)| c.len()).collect()),
            CursorSlots::Step(slots) => Some(slots.iter().map(|(_, c)| c.len()).collect()),
            CursorSlots::Exhausted => None,
        }
    }
}

/// Odometer over per-variable choices; the last position cycles fastest,
/// making the first (alphabetically earliest) variable most significant.
pub struct SymbolCursor {
    slots: CursorSlots,
    var_count: usize,
    idx: Vec<usize>,
    done: bool,
}

impl SymbolCursor {
    fn new(slots: CursorSlots, var_count: usize) -> SymbolCursor {
        let (idx, done) = match slots.widths() {
            Some(widths) if widths.iter().all(|&w| w > 0) => (vec![0; widths.len()], false),
            _ => (Vec::new(), true),
        };
        SymbolCursor { slots, var_count, idx, done }
    }

    fn advance(&mut self) {
        let widths = self.slots.widths().expect("advance only before exhaustion");
        for pos in (0..self.idx.len()).rev() {
            self.idx[pos] += 1;
            if self.idx[pos] < widths[pos] {
                return;
            }
            self.idx[pos] = 0;
        }
        self.done = true;
    }
}

impl Iterator for SymbolCursor {
    type Item = Symbol;

    fn next(&mut self) -> Option<Symbol> {
        if self.done {
            return None;
        }
        let symbol = match &self.slots {
            CursorSlots::Initial(slots) => {
                let mut vals = vec![0; self.var_count];
                for (pos, (var, choices)) in slots.iter().enumerate() {
                    vals[*var] = choices[self.idx[pos]];
                }
                Symbol::Initial(vals)
            }
            CursorSlots::Step(slots) => {
                let mut entries = vec![StepEntry::Unchanged; self.var_count];
                for (pos, (var, choices)) in slots.iter().enumerate() {
                    entries[*var] = choices[self.idx[pos]];
                }
                Symbol::Step(entries)
            }
            CursorSlots::Exhausted => unreachable!("done is set for exhausted slots"),
        };
        self.advance();
        Some(symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemBuilder;
    use crate::words::encode;

    fn toggle_problem() -> Problem {
        let mut b = ProblemBuilder::new();
        b.var("x", &[("u", &["v"]), ("v", &["u"])]);
        b.build()
    }

    #[test]
    fn empty_word_is_accepted() {
        let p = toggle_problem();
        let mut a = PlanAutomaton::new(&p);
        assert!(a.accepts(&[]));
    }

    #[test]
    fn valid_toggle_run_stays_final() {
        let p = toggle_problem();
        let mut a = PlanAutomaton::new(&p);
        let u = p.value_id("u").unwrap();
        let v = p.value_id("v").unwrap();
        let word = vec![
            Symbol::Initial(vec![u]),
            Symbol::Step(vec![StepEntry::Unchanged]),
            Symbol::Step(vec![StepEntry::Change { from: u, to: v }]),
        ];
        assert!(a.accepts(&word));
    }

    #[test]
    fn self_loop_without_transition_sinks() {
        let p = toggle_problem();
        let mut a = PlanAutomaton::new(&p);
        let u = p.value_id("u").unwrap();
        let word = vec![
            Symbol::Initial(vec![u]),
            Symbol::Step(vec![StepEntry::Change { from: u, to: u }]),
        ];
        assert!(!a.accepts(&word));
    }

    #[test]
    fn stale_from_value_sinks() {
        let p = toggle_problem();
        let mut a = PlanAutomaton::new(&p);
        let u = p.value_id("u").unwrap();
        let v = p.value_id("v").unwrap();
        let s1 = a.step(PLAN_INIT, &Symbol::Initial(vec![u]));
        let s2 = a.step(s1, &Symbol::Step(vec![StepEntry::Change { from: v, to: u }]));
        assert_eq!(s2, PLAN_SINK);
    }

    #[test]
    fn initial_after_start_sinks() {
        let p = toggle_problem();
        let mut a = PlanAutomaton::new(&p);
        let u = p.value_id("u").unwrap();
        let s1 = a.step(PLAN_INIT, &Symbol::Initial(vec![u]));
        assert_eq!(a.step(s1, &Symbol::Initial(vec![u])), PLAN_SINK);
        assert_eq!(a.step(PLAN_INIT, &Symbol::Step(vec![StepEntry::Unchanged])), PLAN_SINK);
    }

    #[test]
    fn closing_events_end_running_tokens() {
        let p = toggle_problem();
        let mut a = PlanAutomaton::new(&p);
        let u = p.value_id("u").unwrap();
        let s1 = a.step(PLAN_INIT, &Symbol::Initial(vec![u]));
        let ends = a.closing_events(s1);
        assert_eq!(ends.len(), 1);
        assert!(ends.contains(&Event::end(0, u)));
        assert!(a.closing_events(PLAN_INIT).is_empty());
    }

    #[test]
    fn encoded_plans_are_accepted() {
        let mut b = ProblemBuilder::new();
        b.var("x", &[("u", &["v"]), ("v", &["u", "w"]), ("w", &["w"])]);
        b.var("y", &[("a", &["b"]), ("b", &["a"])]);
        let p = b.build();
        let mut plan = crate::model::Plan::empty(2);
        plan.horizon = 5;
        plan.timelines[0] = vec![
            crate::model::Token { value: p.value_id("u").unwrap(), duration: 2 },
            crate::model::Token { value: p.value_id("v").unwrap(), duration: 3 },
        ];
        plan.timelines[1] = vec![
            crate::model::Token { value: p.value_id("a").unwrap(), duration: 1 },
            crate::model::Token { value: p.value_id("b").unwrap(), duration: 4 },
        ];
        assert!(crate::model::validate_plan(&p, &plan).is_empty());
        let mut a = PlanAutomaton::new(&p);
        assert!(a.accepts(&encode(&p, &plan)));
    }

    #[test]
    fn compatible_symbols_cover_exactly_the_non_sink_arrows() {
        let mut b = ProblemBuilder::new();
        b.var("x", &[("u", &["v"]), ("v", &["u"])]);
        b.var("y", &[("w", &["w"])]);
        let p = b.build();
        let mut a = PlanAutomaton::new(&p);
        let init = a.compatible_symbols(PLAN_INIT);
        assert_eq!(init.len(), 2);
        for sym in &init {
            assert_ne!(a.step(PLAN_INIT, sym), PLAN_SINK);
        }
        let s1 = a.step(PLAN_INIT, &init[0]);
        let steps = a.compatible_symbols(s1);
        // x: keep or toggle; y: keep or self-loop via declared w->w.
        assert_eq!(steps.len(), 4);
        for sym in &steps {
            assert_ne!(a.step(s1, sym), PLAN_SINK);
        }
        // Any step symbol outside the list sinks.
        let u = p.value_id("u").unwrap();
        let bad = Symbol::Step(vec![
            StepEntry::Change { from: u, to: u },
            StepEntry::Unchanged,
        ]);
        assert!(!steps.contains(&bad));
        assert_eq!(a.step(s1, &bad), PLAN_SINK);
    }

    #[test]
    fn enumeration_order_is_lexicographic_by_variable_name() {
        // Declaration order z then a; enumeration must treat a as most
        // significant.
        let mut b = ProblemBuilder::new();
        b.var("z", &[("u", &[]), ("v", &[])]);
        b.var("a", &[("m", &[]), ("n", &[])]);
        let p = b.build();
        let a = PlanAutomaton::new(&p);
        let syms = a.compatible_symbols(PLAN_INIT);
        let vals: Vec<Vec<usize>> = syms
            .iter()
            .map(|s| match s {
                Symbol::Initial(v) => v.clone(),
                _ => unreachable!(),
            })
            .collect();
        let m = p.value_id("m").unwrap();
        let n = p.value_id("n").unwrap();
        let u = p.value_id("u").unwrap();
        let v = p.value_id("v").unwrap();
        assert_eq!(
            vals,
            vec![vec![u, m], vec![v, m], vec![u, n], vec![v, n]],
        );
    }

    #[test]
    fn reachable_bound_matches_formula() {
        let p = toggle_problem();
        assert_eq!(PlanAutomaton::reachable_bound(&p), 2 + 5 + 2);
        let mut b = ProblemBuilder::new();
        b.var("x", &[("u", &["v"]), ("v", &["u"])]);
        b.var("y", &[("w", &["w"])]);
        let p2 = b.build();
        // Three global values: 3^2 + 10^2 + 2.
        assert_eq!(PlanAutomaton::reachable_bound(&p2), 9 + 100 + 2);
    }
}
