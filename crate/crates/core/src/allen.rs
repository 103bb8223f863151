//! Ambiguity survey of the seven basic interval relations.
//!
//! Each relation between two tokens `a` and `b`, under each choice of
//! which token (if any) is the rule trigger, yields one synchronization
//! rule; the table reports the left/right ambiguity flags of the
//! quantified tokens and whether the rule as a whole is ambiguous.  The
//! strict style encodes the relations with strict precedences where the
//! intervals must not touch; the reflexive style loosens those to plain
//! precedences.  Both styles classify identically.

use crate::eager::{classify_rule, TokenFlags};
use crate::model::{bind_rule, Atom, Existential, ProblemBuilder, Quantifier, Rule, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllenRelation {
    Before,
    Meets,
    Ends,
    Starts,
    Overlaps,
    During,
    Equal,
}

pub const RELATIONS: [AllenRelation; 7] = [
    AllenRelation::Before,
    AllenRelation::Meets,
    AllenRelation::Ends,
    AllenRelation::Starts,
    AllenRelation::Overlaps,
    AllenRelation::During,
    AllenRelation::Equal,
];

impl AllenRelation {
    pub fn name(self) -> &'static str {
        match self {
            AllenRelation::Before => "before",
            AllenRelation::Meets => "meets",
            AllenRelation::Ends => "ends",
            AllenRelation::Starts => "starts",
            AllenRelation::Overlaps => "overlaps",
            AllenRelation::During => "during",
            AllenRelation::Equal => "equal",
        }
    }

    /// Atoms placing token `a` in this relation to token `b`.  With
    /// `strict` unset, the strict orderings loosen to plain ones.
    fn atoms(self, strict: bool) -> Vec<Atom> {
        let prec = |l: Term, r: Term| if strict { Atom::lt(l, r) } else { Atom::le(l, r) };
        let eq = |l: Term, r: Term| Atom::eq(l, r).to_vec();
        match self {
            AllenRelation::Before => vec![prec(Term::end("a"), Term::start("b"))],
            AllenRelation::Meets => eq(Term::end("a"), Term::start("b")),
            AllenRelation::Ends => {
                let mut v = vec![prec(Term::start("b"), Term::start("a"))];
                v.extend(eq(Term::end("a"), Term::end("b")));
                v
            }
            AllenRelation::Starts => {
                let mut v = eq(Term::start("a"), Term::start("b"));
                v.push(prec(Term::end("a"), Term::end("b")));
                v
            }
            AllenRelation::Overlaps => vec![
                prec(Term::start("a"), Term::start("b")),
                prec(Term::start("b"), Term::end("a")),
                prec(Term::end("a"), Term::end("b")),
            ],
            AllenRelation::During => vec![
                prec(Term::start("b"), Term::start("a")),
                prec(Term::end("a"), Term::end("b")),
            ],
            AllenRelation::Equal => {
                let mut v = eq(Term::start("a"), Term::start("b"));
                v.extend(eq(Term::end("a"), Term::end("b")));
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerRole {
    A,
    B,
    None,
}

impl TriggerRole {
    pub fn name(self) -> &'static str {
        match self {
            TriggerRole::A => "a",
            TriggerRole::B => "b",
            TriggerRole::None => "none",
        }
    }
}

/// Ambiguity flags of one token, or nothing for the trigger.
pub type FlagCell = Option<(bool, bool, bool)>;

#[derive(Debug, Clone)]
pub struct TableRow {
    pub index: usize,
    pub relation: AllenRelation,
    pub trigger: TriggerRole,
    pub a: FlagCell,
    pub b: FlagCell,
    pub rule_ambiguous: bool,
}

fn flags_of(f: &TokenFlags) -> (bool, bool, bool) {
    (f.left, f.right, f.ambiguous())
}

fn classify(relation: AllenRelation, role: TriggerRole, strict: bool) -> TableRow {
    let mut builder = ProblemBuilder::new();
    builder.var("x", &[("u", &[])]);
    builder.var("y", &[("v", &[])]);
    let qa = Quantifier::new("a", "x", "u");
    let qb = Quantifier::new("b", "y", "v");
    let atoms = relation.atoms(strict);
    let rule = match role {
        TriggerRole::A => Rule {
            name: "r".into(),
            trigger: Some(qa),
            disjuncts: vec![Existential { quantifiers: vec![qb], atoms }],
        },
        TriggerRole::B => Rule {
            name: "r".into(),
            trigger: Some(qb),
            disjuncts: vec![Existential { quantifiers: vec![qa], atoms }],
        },
        TriggerRole::None => Rule {
            name: "r".into(),
            trigger: None,
            disjuncts: vec![Existential { quantifiers: vec![qa, qb], atoms }],
        },
    };
    builder.rule(rule);
    let p = builder.build();
    let bound = bind_rule(&p, 0).expect("table rule must bind");
    let classification = classify_rule(&bound);
    let d = &classification.disjuncts[0];
    assert!(d.consistent, "table clause must be consistent");
    let cell = |name: &str| -> FlagCell {
        let f = d.tokens.iter().find(|t| t.name == name).unwrap();
        if f.is_trigger {
            None
        } else {
            Some(flags_of(f))
        }
    };
    let rule_ambiguous = d.tokens.iter().any(|t| t.ambiguous());
    TableRow {
        index: 0,
        relation,
        trigger: role,
        a: cell("a"),
        b: cell("b"),
        rule_ambiguous,
    }
}

/// The full 21-row table: each relation under trigger `a`, trigger `b`,
/// and no trigger, in that order.
pub fn allen_table(strict: bool) -> Vec<TableRow> {
    let mut rows = Vec::with_capacity(21);
    for &rel in &RELATIONS {
        for role in [TriggerRole::A, TriggerRole::B, TriggerRole::None] {
            let mut row = classify(rel, role, strict);
            row.index = rows.len() + 1;
            rows.push(row);
        }
    }
    rows
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cell_text(c: FlagCell) -> [String; 3] {
    match c {
        None => ["-".into(), "-".into(), "-".into()],
        Some((l, r, a)) => [yn(l).into(), yn(r).into(), yn(a).into()],
    }
}

pub fn render_text(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>2}  {:<8}  {:<7}  {:<24}  {:<24}  {}\n",
        "#", "relation", "trigger", "a: left  right  amb", "b: left  right  amb", "ambiguous"
    ));
    for row in rows {
        let a = cell_text(row.a);
        let b = cell_text(row.b);
        out.push_str(&format!(
            "{:>2}  {:<8}  {:<7}  {:<8}{:<7}{:<9}  {:<8}{:<7}{:<9}  {}\n",
            row.index,
            row.relation.name(),
            row.trigger.name(),
            a[0],
            a[1],
            a[2],
            b[0],
            b[1],
            b[2],
            yn(row.rule_ambiguous)
        ));
    }
    out
}

pub fn render_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(
        "index,relation,trigger,a_left,a_right,a_ambiguous,b_left,b_right,b_ambiguous,rule_ambiguous\n",
    );
    for row in rows {
        let a = cell_text(row.a);
        let b = cell_text(row.b);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.index,
            row.relation.name(),
            row.trigger.name(),
            a[0],
            a[1],
            a[2],
            b[0],
            b[1],
            b[2],
            yn(row.rule_ambiguous)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ends_with_trigger_a_is_ambiguous() {
        let row = classify(AllenRelation::Ends, TriggerRole::A, true);
        assert_eq!(row.a, None);
        assert_eq!(row.b, Some((true, true, true)));
        assert!(row.rule_ambiguous);
    }

    #[test]
    fn starts_with_trigger_a_is_unambiguous() {
        let row = classify(AllenRelation::Starts, TriggerRole::A, true);
        assert_eq!(row.b, Some((false, true, false)));
        assert!(!row.rule_ambiguous);
    }

    #[test]
    fn triggerless_before_keeps_both_tokens_clean() {
        let row = classify(AllenRelation::Before, TriggerRole::None, true);
        assert_eq!(row.a, Some((false, true, false)));
        assert_eq!(row.b, Some((false, false, false)));
        assert!(!row.rule_ambiguous);
    }

    #[test]
    fn meets_without_trigger_marks_b_left() {
        let row = classify(AllenRelation::Meets, TriggerRole::None, true);
        assert_eq!(row.b, Some((true, false, false)));
        assert!(!row.rule_ambiguous);
    }

    #[test]
    fn reflexive_style_classifies_identically() {
        let strict = allen_table(true);
        let reflexive = allen_table(false);
        for (s, r) in strict.iter().zip(&reflexive) {
            assert_eq!(s.a, r.a, "row {}", s.index);
            assert_eq!(s.b, r.b, "row {}", s.index);
            assert_eq!(s.rule_ambiguous, r.rule_ambiguous, "row {}", s.index);
        }
    }

    #[test]
    fn table_has_21_rows_in_relation_major_order() {
        let rows = allen_table(true);
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[0].relation, AllenRelation::Before);
        assert_eq!(rows[0].trigger, TriggerRole::A);
        assert_eq!(rows[20].relation, AllenRelation::Equal);
        assert_eq!(rows[20].trigger, TriggerRole::None);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.index, i + 1);
        }
    }

    #[test]
    fn csv_header_is_stable() {
        let csv = render_csv(&allen_table(true));
        assert!(csv.starts_with(
            "index,relation,trigger,a_left,a_right,a_ambiguous,b_left,b_right,b_ambiguous,rule_ambiguous\n"
        ));
        assert_eq!(csv.lines().count(), 22);
    }
}
