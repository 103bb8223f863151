//! Direct semantic evaluation of synchronization rules against plans.
//!
//! This module answers "is this plan a solution?" from first principles: it
//! enumerates every assignment of rule token names to concrete plan tokens
//! and evaluates the ordering atoms on actual start and end times.  It knows
//! nothing about the automata pipeline, which makes it a trustworthy
//! cross-check for it (and vice versa).

use crate::model::{
    validate_plan, BoundDisjunct, BoundRule, Endpoint, Plan, Problem, Time,
};
use crate::words::{decode, Symbol};

/// Start and end times of every token of a plan, precomputed once.
#[derive(Debug, Clone)]
pub struct PlanTimes {
    /// `spans[var][tok] = (start, end)`.
    pub spans: Vec<Vec<(Time, Time)>>,
}

impl PlanTimes {
    pub fn of(plan: &Plan) -> PlanTimes {
        let spans = plan
            .timelines
            .iter()
            .map(|tl| {
                let mut t = 0;
                tl.iter()
                    .map(|tok| {
                        let s = t;
                        t += tok.duration;
                        (s, t)
                    })
                    .collect()
            })
            .collect();
        PlanTimes { spans }
    }
}

fn eval_term(
    times: &PlanTimes,
    disjunct: &BoundDisjunct,
    assignment: &[usize],
    term: (usize, Endpoint),
) -> Time {
    let binding = &disjunct.tokens[term.0];
    let span = times.spans[binding.var][assignment[term.0]];
    match term.1 {
        Endpoint::Start => span.0,
        Endpoint::End => span.1,
    }
}

fn assignment_satisfies(
    times: &PlanTimes,
    disjunct: &BoundDisjunct,
    assignment: &[usize],
) -> bool {
    disjunct.atoms.iter().all(|a| {
        let l = eval_term(times, disjunct, assignment, a.lhs);
        let r = eval_term(times, disjunct, assignment, a.rhs);
        if a.strict {
            l < r
        } else {
            l <= r
        }
    })
}

/// Indices of tokens on `var`'s timeline holding `value`.
fn candidates(plan: &Plan, var: usize, value: usize) -> Vec<usize> {
    plan.timelines[var]
        .iter()
        .enumerate()
        .filter(|(_, t)| t.value == value)
        .map(|(i, _)| i)
        .collect()
}

/// Does some assignment of the disjunct's quantified tokens satisfy the
/// clause?  With a trigger, `fixed` pins token 0 to a concrete trigger
/// token.  Distinct names may map to the same concrete token.
fn satisfies_disjunct(
    plan: &Plan,
    times: &PlanTimes,
    disjunct: &BoundDisjunct,
    fixed: Option<usize>,
) -> bool {
    let first_free = fixed.is_some() as usize;
    let mut choices: Vec<Vec<usize>> = Vec::with_capacity(disjunct.tokens.len());
    if let Some(t) = fixed {
        choices.push(vec![t]);
    }
    for b in &disjunct.tokens[first_free..] {
        let c = candidates(plan, b.var, b.value);
        if c.is_empty() {
            return false;
        }
        choices.push(c);
    }
    // Odometer over all assignments.
    let mut idx = vec![0usize; choices.len()];
    loop {
        let assignment: Vec<usize> =
            idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        if assignment_satisfies(times, disjunct, &assignment) {
            return true;
        }
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Does the plan satisfy one rule?  A triggered rule must match every token
/// of the trigger's variable holding the trigger's value against some
/// disjunct; a triggerless rule must satisfy some disjunct once.
pub fn satisfies_rule(plan: &Plan, times: &PlanTimes, rule: &BoundRule) -> bool {
    match rule.trigger {
        Some((var, value)) => candidates(plan, var, value).iter().all(|&tok| {
            rule.disjuncts
                .iter()
                .any(|d| satisfies_disjunct(plan, times, d, Some(tok)))
        }),
        None => rule
            .disjuncts
            .iter()
            .any(|d| satisfies_disjunct(plan, times, d, None)),
    }
}

/// A rule the plan falls short of.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleFailure {
    pub rule: String,
    /// Timeline index of an unmatched trigger token; `None` when the whole
    /// (triggerless) rule is unsatisfied.
    pub trigger_token: Option<usize>,
}

impl std::fmt::Display for RuleFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.trigger_token {
            Some(i) => write!(f, "rule {} unmatched for trigger token {}", self.rule, i),
            None => write!(f, "rule {} unsatisfied", self.rule),
        }
    }
}

/// All rule failures of a structurally valid plan.  Empty means the plan is
/// a solution of the rule set.
pub fn verify_solution(plan: &Plan, rules: &[BoundRule]) -> Vec<RuleFailure> {
    let times = PlanTimes::of(plan);
    let mut out = Vec::new();
    for rule in rules {
        match rule.trigger {
            Some((var, value)) => {
                for tok in candidates(plan, var, value) {
                    let ok = rule
                        .disjuncts
                        .iter()
                        .any(|d| satisfies_disjunct(plan, &times, d, Some(tok)));
                    if !ok {
                        out.push(RuleFailure {
                            rule: rule.name.clone(),
                            trigger_token: Some(tok),
                        });
                    }
                }
            }
            None => {
                if !satisfies_rule(plan, &times, rule) {
                    out.push(RuleFailure { rule: rule.name.clone(), trigger_token: None });
                }
            }
        }
    }
    out
}

/// Full semantic check of a plan: structural validity plus every rule.
pub fn is_solution(p: &Problem, rules: &[BoundRule], plan: &Plan) -> bool {
    validate_plan(p, plan).is_empty() && verify_solution(plan, rules).is_empty()
}

/// Full semantic check of a word: it must decode into a plan (well-shaped,
/// consistently encoded), and that plan must be valid and satisfy every
/// rule.  This is the reference definition of the solution language that
/// the automata pipeline is measured against.
pub fn word_is_solution(p: &Problem, rules: &[BoundRule], word: &[Symbol]) -> bool {
    match decode(p, word) {
        Ok(plan) => is_solution(p, rules, &plan),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        bind_all, Atom, Existential, Plan, ProblemBuilder, Quantifier, Rule, Term, Token,
    };

    /// Three free variables with explicit padding values, able to carry the
    /// reference plan: x0 holds v0 over [1,4), x1 holds v1 over [2,3) and
    /// [5,6) around v2 over [3,5), x2 holds v1 over [2,5).
    fn reference_problem() -> Problem {
        let mut b = ProblemBuilder::new();
        b.var("x0", &[("v0", &["v0", "p0"]), ("p0", &["p0", "v0"])]);
        b.var(
            "x1",
            &[
                ("v1", &["v1", "v2", "p1"]),
                ("v2", &["v2", "v1", "p1"]),
                ("p1", &["p1", "v1", "v2"]),
            ],
        );
        b.var("x2", &[("v1", &["v1", "p2"]), ("p2", &["p2", "v1"])]);
        b.rule(Rule {
            name: "carry_forward".into(),
            trigger: Some(Quantifier::new("a0", "x0", "v0")),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("a1", "x1", "v1")],
                atoms: vec![
                    Atom::le(Term::start("a0"), Term::start("a1")),
                    Atom::le(Term::end("a0"), Term::end("a1")),
                ],
            }],
        });
        b.rule(Rule {
            name: "cover_end".into(),
            trigger: Some(Quantifier::new("a0", "x0", "v0")),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("a3", "x2", "v1")],
                atoms: vec![
                    Atom::le(Term::start("a0"), Term::start("a3")),
                    Atom::le(Term::start("a3"), Term::end("a0")),
                    Atom::le(Term::end("a0"), Term::end("a3")),
                ],
            }],
        });
        b.build()
    }

    fn reference_plan(p: &Problem) -> Plan {
        let id = |s: &str| p.value_id(s).unwrap();
        Plan {
            horizon: 6,
            timelines: vec![
                vec![
                    Token { value: id("p0"), duration: 1 },
                    Token { value: id("v0"), duration: 3 },
                    Token { value: id("p0"), duration: 2 },
                ],
                vec![
                    Token { value: id("p1"), duration: 2 },
                    Token { value: id("v1"), duration: 1 },
                    Token { value: id("v2"), duration: 2 },
                    Token { value: id("v1"), duration: 1 },
                ],
                vec![
                    Token { value: id("p2"), duration: 2 },
                    Token { value: id("v1"), duration: 1 },
                    Token { value: id("v1"), duration: 2 },
                    Token { value: id("p2"), duration: 1 },
                ],
            ],
        }
    }

    #[test]
    fn reference_plan_satisfies_both_rules() {
        let p = reference_problem();
        let rules = bind_all(&p).unwrap();
        let plan = reference_plan(&p);
        assert!(validate_plan(&p, &plan).is_empty());
        assert!(verify_solution(&plan, &rules).is_empty());
        assert!(is_solution(&p, &rules, &plan));
    }

    #[test]
    fn dropping_the_late_token_fails_the_first_rule() {
        let p = reference_problem();
        let rules = bind_all(&p).unwrap();
        let mut plan = reference_plan(&p);
        // Replace the final x1 token (v1 over [5,6)) with more v2: now no
        // v1 token ends at or after time 4.
        let id = |s: &str| p.value_id(s).unwrap();
        plan.timelines[1] = vec![
            Token { value: id("p1"), duration: 2 },
            Token { value: id("v1"), duration: 1 },
            Token { value: id("v2"), duration: 3 },
        ];
        assert!(validate_plan(&p, &plan).is_empty());
        let failures = verify_solution(&plan, &rules);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].rule, "carry_forward");
        assert_eq!(failures[0].trigger_token, Some(1));
    }

    #[test]
    fn strict_atom_requires_strict_inequality() {
        let mut b = ProblemBuilder::new();
        b.var("x", &[("u", &["u"])]);
        b.rule(Rule {
            name: "strictly_longer".into(),
            trigger: Some(Quantifier::new("a", "x", "u")),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("b", "x", "u")],
                atoms: vec![
                    Atom::le(Term::start("a"), Term::start("b")),
                    Atom::lt(Term::end("a"), Term::end("b")),
                ],
            }],
        });
        let p = b.build();
        let rules = bind_all(&p).unwrap();
        let u = p.value_id("u").unwrap();
        // A single token: end(a) < end(b) has no witness (b = a fails).
        let one = Plan {
            horizon: 2,
            timelines: vec![vec![Token { value: u, duration: 2 }]],
        };
        assert!(!verify_solution(&one, &rules).is_empty());
        // Two tokens: the first finds the second, the second finds nobody.
        let two = Plan {
            horizon: 3,
            timelines: vec![vec![
                Token { value: u, duration: 1 },
                Token { value: u, duration: 2 },
            ]],
        };
        let failures = verify_solution(&two, &rules);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].trigger_token, Some(1));
    }

    #[test]
    fn empty_plan_vacuous_for_triggered_fails_triggerless() {
        let mut b = ProblemBuilder::new();
        b.var("x", &[("u", &["u"])]);
        b.rule(Rule {
            name: "triggered".into(),
            trigger: Some(Quantifier::new("a", "x", "u")),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("b", "x", "u")],
                atoms: vec![
                    Atom::le(Term::start("a"), Term::start("b")),
                    Atom::le(Term::end("a"), Term::end("b")),
                ],
            }],
        });
        b.rule(Rule {
            name: "existence".into(),
            trigger: None,
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("t", "x", "u")],
                atoms: vec![],
            }],
        });
        let p = b.build();
        let rules = bind_all(&p).unwrap();
        let empty = Plan::empty(1);
        let failures = verify_solution(&empty, &rules);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].rule, "existence");
        assert_eq!(failures[0].trigger_token, None);
        let u = p.value_id("u").unwrap();
        let one = Plan {
            horizon: 1,
            timelines: vec![vec![Token { value: u, duration: 1 }]],
        };
        assert!(verify_solution(&one, &rules).is_empty());
    }

    #[test]
    fn triggerless_disjunction_needs_only_one_branch() {
        let mut b = ProblemBuilder::new();
        b.var("x", &[("u", &["v"]), ("v", &["u"])]);
        b.rule(Rule {
            name: "either".into(),
            trigger: None,
            disjuncts: vec![
                Existential {
                    quantifiers: vec![
                        Quantifier::new("s", "x", "u"),
                        Quantifier::new("t", "x", "u"),
                    ],
                    atoms: vec![Atom::lt(Term::end("s"), Term::start("t"))],
                },
                Existential {
                    quantifiers: vec![Quantifier::new("s", "x", "v")],
                    atoms: vec![],
                },
            ],
        });
        let p = b.build();
        let rules = bind_all(&p).unwrap();
        let u = p.value_id("u").unwrap();
        let v = p.value_id("v").unwrap();
        // Only one u token and no v token: both branches fail.
        let bad = Plan {
            horizon: 1,
            timelines: vec![vec![Token { value: u, duration: 1 }]],
        };
        assert!(!verify_solution(&bad, &rules).is_empty());
        // A v token satisfies the second branch.
        let good = Plan {
            horizon: 2,
            timelines: vec![vec![
                Token { value: u, duration: 1 },
                Token { value: v, duration: 1 },
            ]],
        };
        assert!(verify_solution(&good, &rules).is_empty());
        // Two u tokens separated by a v token satisfy the first branch too.
        let both = Plan {
            horizon: 3,
            timelines: vec![vec![
                Token { value: u, duration: 1 },
                Token { value: v, duration: 1 },
                Token { value: u, duration: 1 },
            ]],
        };
        assert!(verify_solution(&both, &rules).is_empty());
    }

    #[test]
    fn word_route_agrees_with_plan_route() {
        let p = reference_problem();
        let rules = bind_all(&p).unwrap();
        let plan = reference_plan(&p);
        let word = crate::words::encode(&p, &plan);
        assert!(word_is_solution(&p, &rules, &word));
        // Truncating the word cuts the final v1 token and breaks the first
        // rule.
        assert!(!word_is_solution(&p, &rules, &word[..5]));
    }

    fn random_plan(p: &Problem, rng: &mut rand_chacha::ChaCha8Rng) -> Plan {
        use rand::Rng;
        let horizon = rng.gen_range(0..=8u64);
        let timelines = p
            .vars
            .iter()
            .map(|var| {
                let mut line = Vec::new();
                let mut value = var.domain[rng.gen_range(0..var.domain.len())];
                let mut remaining = horizon;
                while remaining > 0 {
                    let duration = rng.gen_range(1..=remaining);
                    line.push(Token { value, duration });
                    remaining -= duration;
                    let successors = var.successors(value);
                    if remaining > 0 {
                        value = successors[rng.gen_range(0..successors.len())];
                    }
                }
                line
            })
            .collect();
        Plan { horizon, timelines }
    }

    #[test]
    fn span_times_are_monotone_per_timeline() {
        use rand::SeedableRng;
        let p = reference_problem();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let plan = random_plan(&p, &mut rng);
            assert!(validate_plan(&p, &plan).is_empty());
            let times = PlanTimes::of(&plan);
            for spans in &times.spans {
                for w in spans.windows(2) {
                    assert!(w[0].0 < w[1].0, "starts must increase: {spans:?}");
                    assert!(w[0].1 < w[1].1, "ends must increase: {spans:?}");
                }
                for &(s, e) in spans {
                    assert!(s < e, "token spans are non-empty: {spans:?}");
                }
            }
        }
    }

    #[test]
    fn adding_a_disjunct_never_breaks_satisfaction() {
        use rand::SeedableRng;
        let base = reference_problem();
        let mut widened = reference_problem();
        widened.rules[0].disjuncts.push(Existential {
            quantifiers: vec![Quantifier::new("late", "x1", "v2")],
            atoms: vec![Atom::le(Term::start("late"), Term::end("late"))],
        });
        let base_rules = bind_all(&base).unwrap();
        let widened_rules = bind_all(&widened).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let mut flipped = 0;
        for _ in 0..300 {
            let plan = random_plan(&base, &mut rng);
            let times = PlanTimes::of(&plan);
            let before = satisfies_rule(&plan, &times, &base_rules[0]);
            let after = satisfies_rule(&plan, &times, &widened_rules[0]);
            assert!(!before || after, "adding a disjunct flipped true to false");
            if !before && after {
                flipped += 1;
            }
        }
        assert!(flipped > 0, "the extra disjunct should rescue some plans");
    }
}
