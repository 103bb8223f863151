//! Classification of synchronization rules as eager or not.
//!
//! A rule is eager when its body is a single disjunct in which no quantified
//! token is ambiguous.  Ambiguity is a property of the clause closure: a
//! token is left-ambiguous when its start is not anchored to the trigger yet
//! relates to some other token's endpoint loosely enough that an earlier
//! candidate token could also satisfy the clause prefix, and symmetrically
//! right-ambiguous when its end is left loose towards later candidates.  A
//! token that is both can be matched too early and released too late, which
//! is what breaks one-pass deterministic checking; eager rules exclude that.

use crate::closure::ClauseClosure;
use crate::model::{
    bind_all, BindError, BoundDisjunct, BoundRule, Endpoint, Problem,
};
use Endpoint::{End, Start};

/// Ambiguity flags of one token name within one disjunct.  The trigger (when
/// present) is never ambiguous by definition and carries all-false flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenFlags {
    pub name: String,
    pub is_trigger: bool,
    pub left: bool,
    pub right: bool,
}

impl TokenFlags {
    pub fn ambiguous(&self) -> bool {
        self.left && self.right
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctClassification {
    pub consistent: bool,
    pub tokens: Vec<TokenFlags>,
}

impl DisjunctClassification {
    pub fn ambiguous_names(&self) -> Vec<&str> {
        self.tokens
            .iter()
            .filter(|t| t.ambiguous())
            .map(|t| t.name.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleClassification {
    pub name: String,
    pub eager: bool,
    pub disjuncts: Vec<DisjunctClassification>,
}

impl RuleClassification {
    /// Why the rule is not eager, in order: a disjunctive body first, then
    /// one entry per ambiguous token name.  Empty for eager rules.
    pub fn reasons(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.disjuncts.len() > 1 {
            out.push("disjunctive".to_string());
        }
        let mut seen: Vec<&str> = Vec::new();
        for d in &self.disjuncts {
            for name in d.ambiguous_names() {
                if !seen.contains(&name) {
                    seen.push(name);
                    out.push(format!("ambiguous token {name}"));
                }
            }
        }
        out
    }
}

fn left_ambiguous(
    rule: &BoundRule,
    d: &BoundDisjunct,
    c: &ClauseClosure,
    ti: usize,
) -> bool {
    if rule.has_trigger && ti == 0 {
        return false;
    }
    // The token's start must not coincide with either trigger endpoint:
    // anchored tokens are picked unambiguously when the trigger is read.
    if rule.has_trigger
        && (c.equiv((ti, Start), (0, Start)) || c.equiv((ti, Start), (0, End)))
    {
        return false;
    }
    for bi in 0..d.tokens.len() {
        if bi == ti {
            continue;
        }
        let b_is_trigger = rule.has_trigger && bi == 0;
        for ep in [Start, End] {
            let t = (bi, ep);
            // Coinciding with another quantified token's endpoint leaves
            // open which of several equal-start candidates is meant.
            if !b_is_trigger && c.equiv((ti, Start), t) {
                return true;
            }
            // Start bounded above by t without the end being too: an
            // earlier candidate could equally sit below t.
            if c.leq((ti, Start), t) && !c.leq((ti, End), t) {
                return true;
            }
        }
    }
    false
}

fn right_ambiguous(rule: &BoundRule, d: &BoundDisjunct, c: &ClauseClosure, ti: usize) -> bool {
    if rule.has_trigger && ti == 0 {
        return false;
    }
    for bi in 0..d.tokens.len() {
        if bi == ti {
            continue;
        }
        for ep in [Start, End] {
            let t = (bi, ep);
            // The end is bounded above by someone else's endpoint, or
            // bounded below by an endpoint that does not already bound the
            // start: either way a later candidate could serve instead.
            if c.leq((ti, End), t) {
                return true;
            }
            if c.leq(t, (ti, End)) && !c.leq(t, (ti, Start)) {
                return true;
            }
        }
    }
    false
}

pub fn classify_disjunct(rule: &BoundRule, d: &BoundDisjunct) -> DisjunctClassification {
    let closure = ClauseClosure::close(d.tokens.len(), &d.effective_atoms());
    let tokens = d
        .tokens
        .iter()
        .enumerate()
        .map(|(ti, b)| TokenFlags {
            name: b.name.clone(),
            is_trigger: rule.has_trigger && ti == 0,
            left: left_ambiguous(rule, d, &closure, ti),
            right: right_ambiguous(rule, d, &closure, ti),
        })
        .collect();
    DisjunctClassification { consistent: closure.consistent(), tokens }
}

pub fn classify_rule(rule: &BoundRule) -> RuleClassification {
    let disjuncts: Vec<DisjunctClassification> = rule
        .disjuncts
        .iter()
        .map(|d| classify_disjunct(rule, d))
        .collect();
    let eager = disjuncts.len() == 1
        && disjuncts
            .iter()
            .all(|d| d.tokens.iter().all(|t| !t.ambiguous()));
    RuleClassification { name: rule.name.clone(), eager, disjuncts }
}

/// Classifies every rule of a problem.  Fails only when a rule does not
/// resolve against the problem's variables and values.
pub fn classify_problem(p: &Problem) -> Result<Vec<RuleClassification>, BindError> {
    Ok(bind_all(p)?.iter().map(classify_rule).collect())
}

pub fn all_eager(classes: &[RuleClassification]) -> bool {
    classes.iter().all(|c| c.eager)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        bind_rule, Atom, Existential, ProblemBuilder, Quantifier, Rule, Term,
    };

    fn base_problem() -> ProblemBuilder {
        let mut b = ProblemBuilder::new();
        b.var("x0", &[("v0", &["v0"])]);
        b.var("x1", &[("v1", &["v1"])]);
        b.var("x2", &[("v1", &["v1"])]);
        b
    }

    fn flags<'a>(c: &'a RuleClassification, name: &str) -> &'a TokenFlags {
        c.disjuncts[0]
            .tokens
            .iter()
            .find(|t| t.name == name)
            .unwrap()
    }

    #[test]
    fn forward_covering_rule_is_eager() {
        // a0[x0=v0] implies some a1[x1=v1] starting no earlier and ending no
        // earlier.
        let mut b = base_problem();
        b.rule(Rule {
            name: "r".into(),
            trigger: Some(Quantifier::new("a0", "x0", "v0")),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("a1", "x1", "v1")],
                atoms: vec![
                    Atom::le(Term::start("a0"), Term::start("a1")),
                    Atom::le(Term::end("a0"), Term::end("a1")),
                ],
            }],
        });
        let p = b.build();
        let c = classify_rule(&bind_rule(&p, 0).unwrap());
        assert!(c.eager);
        assert!(c.reasons().is_empty());
        let a1 = flags(&c, "a1");
        assert!(!a1.left);
        assert!(a1.right);
    }

    #[test]
    fn containment_rule_is_ambiguous() {
        // As above but a1 must also start before the trigger ends: now a1
        // is both left- and right-ambiguous.
        let mut b = base_problem();
        b.rule(Rule {
            name: "r".into(),
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
        let p = b.build();
        let c = classify_rule(&bind_rule(&p, 0).unwrap());
        assert!(!c.eager);
        assert_eq!(c.reasons(), vec!["ambiguous token a3"]);
        let a3 = flags(&c, "a3");
        assert!(a3.left && a3.right && a3.ambiguous());
    }

    #[test]
    fn trigger_is_never_ambiguous() {
        let mut b = base_problem();
        b.rule(Rule {
            name: "r".into(),
            trigger: Some(Quantifier::new("a0", "x0", "v0")),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("a1", "x1", "v1")],
                atoms: vec![
                    Atom::le(Term::start("a0"), Term::start("a1")),
                    Atom::le(Term::end("a0"), Term::end("a1")),
                ],
            }],
        });
        let p = b.build();
        let c = classify_rule(&bind_rule(&p, 0).unwrap());
        let a0 = flags(&c, "a0");
        assert!(a0.is_trigger && !a0.left && !a0.right);
    }

    #[test]
    fn disjunction_alone_blocks_eagerness() {
        let mut b = base_problem();
        let disjunct = |var: &str| Existential {
            quantifiers: vec![Quantifier::new("a1", var, "v1")],
            atoms: vec![
                Atom::le(Term::start("a0"), Term::start("a1")),
                Atom::le(Term::end("a0"), Term::end("a1")),
            ],
        };
        b.rule(Rule {
            name: "r".into(),
            trigger: Some(Quantifier::new("a0", "x0", "v0")),
            disjuncts: vec![disjunct("x1"), disjunct("x2")],
        });
        let p = b.build();
        let c = classify_rule(&bind_rule(&p, 0).unwrap());
        assert!(!c.eager);
        assert_eq!(c.reasons(), vec!["disjunctive"]);
    }

    #[test]
    fn pure_existence_token_is_unambiguous() {
        let mut b = base_problem();
        b.rule(Rule {
            name: "goal".into(),
            trigger: None,
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("t", "x0", "v0")],
                atoms: vec![],
            }],
        });
        let p = b.build();
        let c = classify_rule(&bind_rule(&p, 0).unwrap());
        assert!(c.eager);
        let t = flags(&c, "t");
        assert!(!t.left && !t.right);
    }

    #[test]
    fn anchored_start_is_not_left_ambiguous() {
        // start(a1) equals start(a0): reading the trigger start identifies
        // a1 immediately, so only the right side stays loose.
        let mut b = base_problem();
        b.rule(Rule {
            name: "r".into(),
            trigger: Some(Quantifier::new("a0", "x0", "v0")),
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("a1", "x1", "v1")],
                atoms: vec![
                    Atom::le(Term::start("a0"), Term::start("a1")),
                    Atom::le(Term::start("a1"), Term::start("a0")),
                    Atom::lt(Term::end("a0"), Term::end("a1")),
                ],
            }],
        });
        let p = b.build();
        let c = classify_rule(&bind_rule(&p, 0).unwrap());
        let a1 = flags(&c, "a1");
        assert!(!a1.left);
        assert!(a1.right);
        assert!(c.eager);
    }

    #[test]
    fn coinciding_quantified_starts_are_left_ambiguous() {
        // Two quantified tokens with equal starts and loose ends: both are
        // ambiguous through each other.
        let mut b = base_problem();
        b.rule(Rule {
            name: "r".into(),
            trigger: None,
            disjuncts: vec![Existential {
                quantifiers: vec![
                    Quantifier::new("s", "x1", "v1"),
                    Quantifier::new("t", "x2", "v1"),
                ],
                atoms: vec![
                    Atom::le(Term::start("s"), Term::start("t")),
                    Atom::le(Term::start("t"), Term::start("s")),
                ],
            }],
        });
        let p = b.build();
        let c = classify_rule(&bind_rule(&p, 0).unwrap());
        let s = flags(&c, "s");
        assert!(s.left, "equal starts leave the choice of witness open");
    }

    #[test]
    fn classify_problem_covers_all_rules() {
        let mut b = base_problem();
        b.rule(Rule {
            name: "goal".into(),
            trigger: None,
            disjuncts: vec![Existential {
                quantifiers: vec![Quantifier::new("t", "x0", "v0")],
                atoms: vec![],
            }],
        });
        let p = b.build();
        let classes = classify_problem(&p).unwrap();
        assert_eq!(classes.len(), 1);
        assert!(all_eager(&classes));
    }
}
