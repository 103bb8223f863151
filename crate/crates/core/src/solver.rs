//! Plan existence by product-automaton search, plus a cross-route check of
//! the automaton language against the direct semantic oracle.
//!
//! A word encodes a solution exactly when the plan automaton stays well
//! formed and the rule automaton is final after one virtual closing step
//! that ends every still-running token.  Search explores the product of the
//! two automata breadth-first, so the first witness found is the shortest
//! one, and lexicographically least among those because successor symbols
//! are generated in a fixed order.

use std::collections::{HashMap, VecDeque};

use crate::eager::{classify_problem, RuleClassification};
use crate::model::{bind_all, BoundRule, Plan, Problem};
use crate::oracle;
use crate::plan_dfa::{PlanAutomaton, PLAN_INIT, PLAN_SINK};
use crate::rule_dfa::{DagError, RuleAutomaton, RULE_INITIAL, RULE_SINK};
use crate::words::{alphabet_size, decode, events, full_alphabet, render_word, Symbol, Word};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("invalid problem:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("problem is outside the eager fragment:\n{}", .0.join("\n"))]
    NotEager(Vec<String>),
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// The two automata over a validated, eager problem, plus the bound rules
/// the oracle route needs.
pub struct Product {
    pub problem: Problem,
    pub plans: PlanAutomaton,
    pub rules: RuleAutomaton,
    pub bound_rules: Vec<BoundRule>,
    pub classifications: Vec<RuleClassification>,
    accept_cache: HashMap<(usize, usize), bool>,
}

impl Product {
    pub fn new(p: &Problem) -> Result<Product, BuildError> {
        let issues = crate::model::validate_problem(p);
        if !issues.is_empty() {
            return Err(BuildError::Invalid(issues.iter().map(|v| v.to_string()).collect()));
        }
        let classifications =
            classify_problem(p).map_err(|e| BuildError::Invalid(vec![e.to_string()]))?;
        let reasons: Vec<String> = classifications
            .iter()
            .filter(|c| !c.eager)
            .flat_map(|c| {
                c.reasons().into_iter().map(move |r| format!("rule {}: {}", c.name, r))
            })
            .collect();
        if !reasons.is_empty() {
            return Err(BuildError::NotEager(reasons));
        }
        let bound_rules = bind_all(p).map_err(|e| BuildError::Invalid(vec![e.to_string()]))?;
        Ok(Product {
            problem: p.clone(),
            plans: PlanAutomaton::new(p),
            rules: RuleAutomaton::new(p)?,
            bound_rules,
            classifications,
            accept_cache: HashMap::new(),
        })
    }

    /// Acceptance of the word read so far if it were cut here: the plan
    /// side must be well formed and the rule side final after the closing
    /// events that cutting implies.
    fn accepting(&mut self, ps: usize, rq: usize) -> bool {
        if ps == PLAN_SINK || rq == RULE_SINK {
            return false;
        }
        if let Some(&hit) = self.accept_cache.get(&(ps, rq)) {
            return hit;
        }
        let closing = self.plans.closing_events(ps);
        let closed = self.rules.step_events(rq, &closing);
        let hit = self.rules.is_final(closed);
        self.accept_cache.insert((ps, rq), hit);
        hit
    }

    pub fn accepts(&mut self, word: &[Symbol]) -> bool {
        let mut ps = PLAN_INIT;
        let mut rq = RULE_INITIAL;
        for sym in word {
            let ev = events(sym);
            ps = self.plans.step(ps, sym);
            rq = self.rules.step_events(rq, &ev);
            if ps == PLAN_SINK || rq == RULE_SINK {
                return false;
            }
        }
        self.accepting(ps, rq)
    }

    pub fn find_solution(&mut self, budget: &SolveBudget) -> SolveOutcome {
        struct Node {
            ps: usize,
            rq: usize,
            parent: usize,
            sym: Option<Symbol>,
            depth: usize,
        }
        let mut stats = SolveStats::default();
        let mut nodes = vec![Node {
            ps: PLAN_INIT,
            rq: RULE_INITIAL,
            parent: usize::MAX,
            sym: None,
            depth: 0,
        }];
        let reconstruct = |nodes: &[Node], mut i: usize| -> Word {
            let mut word = Vec::new();
            while let Some(sym) = &nodes[i].sym {
                word.push(sym.clone());
                i = nodes[i].parent;
            }
            word.reverse();
            word
        };
        let finish = |word: Word, p: &Problem, rules: &[BoundRule], stats: SolveStats| {
            let plan = decode(p, &word).expect("witness word must encode a plan");
            let plan_issues = crate::model::validate_plan(p, &plan);
            assert!(plan_issues.is_empty(), "witness plan malformed: {plan_issues:?}");
            let failures = oracle::verify_solution(&plan, rules);
            assert!(
                failures.is_empty(),
                "witness failed oracle re-verification: {failures:?}"
            );
            SolveOutcome { status: SolveStatus::Solution, word: Some(word), plan: Some(plan), stats }
        };

        let mut visited: HashMap<(usize, usize), ()> = HashMap::new();
        visited.insert((PLAN_INIT, RULE_INITIAL), ());
        stats.states = 1;
        if self.accepting(PLAN_INIT, RULE_INITIAL) {
            return finish(Vec::new(), &self.problem, &self.bound_rules, stats);
        }

        // The budget caps distinct states in the product and in each
        // component automaton: successors that immediately sink still
        // intern plan snapshots, and with many variables a single state
        // has exponentially many outgoing symbols, so checking only the
        // product count would let one expansion exhaust memory.
        let component_cap = budget.max_states.saturating_add(2);
        let exhausted = |stats: SolveStats| SolveOutcome {
            status: SolveStatus::BudgetExhausted,
            word: None,
            plan: None,
            stats,
        };

        let mut queue = VecDeque::new();
        queue.push_back(0usize);
        let mut truncated = false;
        while let Some(i) = queue.pop_front() {
            let (ps, rq, depth) = (nodes[i].ps, nodes[i].rq, nodes[i].depth);
            if depth >= budget.max_len {
                truncated = true;
                continue;
            }
            let mut cursor = self.plans.symbol_cursor(ps);
            while let Some(sym) = cursor.next() {
                stats.edges += 1;
                let ev = events(&sym);
                let nps = self.plans.step(ps, &sym);
                debug_assert_ne!(nps, PLAN_SINK, "compatible symbol must not sink");
                let nrq = self.rules.step_events(rq, &ev);
                if self.plans.state_count() > component_cap
                    || self.rules.state_count() > component_cap
                {
                    return exhausted(stats);
                }
                if nrq == RULE_SINK || visited.contains_key(&(nps, nrq)) {
                    continue;
                }
                visited.insert((nps, nrq), ());
                stats.states += 1;
                stats.depth = stats.depth.max(depth + 1);
                nodes.push(Node { ps: nps, rq: nrq, parent: i, sym: Some(sym), depth: depth + 1 });
                if self.accepting(nps, nrq) {
                    let word = reconstruct(&nodes, nodes.len() - 1);
                    return finish(word, &self.problem, &self.bound_rules, stats);
                }
                if stats.states > budget.max_states {
                    return exhausted(stats);
                }
                queue.push_back(nodes.len() - 1);
            }
        }
        SolveOutcome {
            status: if truncated { SolveStatus::BudgetExhausted } else { SolveStatus::Empty },
            word: None,
            plan: None,
            stats,
        }
    }

    /// Compares the automaton route against the semantic oracle on every
    /// word up to `full_len`, and on every word up to `pruned_len` modulo
    /// skipping subtrees under malformed prefixes: once the plan side
    /// sinks, the word and all its extensions fail shape or transition
    /// checks, which the oracle is asserted to agree on at the boundary.
    pub fn language_smoke(&mut self, full_len: usize, pruned_len: usize) -> SmokeReport {
        let alphabet = full_alphabet(&self.problem);
        let sigma = alphabet_size(self.problem.vars.len(), self.problem.value_count());
        assert_eq!(sigma, alphabet.len() as u128);
        let mut report = SmokeReport::default();

        let compare = |product: &mut Product, word: &[Symbol], report: &mut SmokeReport| {
            let automaton = product.accepts(word);
            let semantic = oracle::word_is_solution(
                &product.problem,
                &product.bound_rules,
                word,
            );
            report.words_checked += 1;
            if automaton != semantic {
                report.record_mismatch(&product.problem, word, automaton, semantic);
            }
        };

        // Unpruned sweep: every word, both routes, no shortcuts.
        let mut stack: Vec<Word> = vec![Vec::new()];
        while let Some(word) = stack.pop() {
            compare(self, &word, &mut report);
            if word.len() < full_len {
                for sym in &alphabet {
                    let mut next = word.clone();
                    next.push(sym.clone());
                    stack.push(next);
                }
            }
        }
        let full_total: u128 = (0..=full_len as u32).map(|k| sigma.pow(k)).sum();
        assert_eq!(report.words_checked, full_total);

        // Pruned sweep: walk only well-formed prefixes; at each boundary
        // into the sink, check that the oracle also rejects, then account
        // for the skipped subtree arithmetically.
        let before = report.words_checked;
        let mut covered: u128 = 0;
        let mut stack: Vec<(Word, usize)> = vec![(Vec::new(), PLAN_INIT)];
        while let Some((word, ps)) = stack.pop() {
            compare(self, &word, &mut report);
            if word.len() >= pruned_len {
                continue;
            }
            for sym in &alphabet {
                let mut next = word.clone();
                next.push(sym.clone());
                let nps = self.plans.step(ps, sym);
                if nps == PLAN_SINK {
                    compare(self, &next, &mut report);
                    assert!(
                        !oracle::word_is_solution(&self.problem, &self.bound_rules, &next),
                        "oracle accepted a malformed word"
                    );
                    covered += (1..=(pruned_len - next.len()) as u32)
                        .map(|k| sigma.pow(k))
                        .sum::<u128>();
                } else {
                    stack.push((next, nps));
                }
            }
        }
        let pruned_total: u128 = (0..=pruned_len as u32).map(|k| sigma.pow(k)).sum();
        assert_eq!(report.words_checked - before + covered, pruned_total);
        report.words_covered = full_total + pruned_total;
        report
    }
}

/// Search limits.  `max_states` caps distinct states in the product and in
/// each component automaton; `max_len` caps word length.  The defaults keep
/// the search within a few hundred megabytes; raise them explicitly for
/// larger instances.
#[derive(Debug, Clone)]
pub struct SolveBudget {
    pub max_states: usize,
    pub max_len: usize,
}

impl Default for SolveBudget {
    fn default() -> SolveBudget {
        SolveBudget { max_states: 200_000, max_len: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solution,
    Empty,
    BudgetExhausted,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub states: usize,
    pub edges: u64,
    pub depth: usize,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub word: Option<Word>,
    pub plan: Option<Plan>,
    pub stats: SolveStats,
}

#[derive(Debug, Default)]
pub struct SmokeReport {
    /// Words actually run through both routes.
    pub words_checked: u128,
    /// Words accounted for, including pruned subtrees.
    pub words_covered: u128,
    pub mismatches: Vec<String>,
}

impl SmokeReport {
    fn record_mismatch(&mut self, p: &Problem, word: &[Symbol], automaton: bool, semantic: bool) {
        if self.mismatches.len() < 5 {
            self.mismatches.push(format!(
                "automaton={automaton} oracle={semantic} on:\n{}",
                render_word(p, word)
            ));
        } else if self.mismatches.len() == 5 {
            self.mismatches.push("...".into());
        }
    }

    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}
