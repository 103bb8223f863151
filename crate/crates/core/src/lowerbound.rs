//! State-count lower bound for the rule automaton outside the eager
//! fragment.
//!
//! The family built here has, for each choice of a set of size-k subsets
//! of {1..n}, a word whose pending obligations are exactly "every later
//! witness batch must intersect each chosen subset".  Distinct choices
//! give distinct residual languages, so any deterministic automaton for
//! the language needs at least 2^C(n,k) states, which for k = n/2 is
//! doubly exponential in the rule size.  Membership is decided by the
//! semantic oracle alone; the disjunctive rule is far outside the eager
//! fragment.

use std::time::Instant;

use crate::model::{
    bind_all, Atom, BoundRule, Existential, Problem, ProblemBuilder, Quantifier, Rule, Term,
};
use crate::oracle::word_is_solution;
use crate::words::{StepEntry, Symbol, Word};

pub fn subset_size(n: usize) -> usize {
    (n / 2).max(1)
}

/// All size-k subsets of {1..n}, each ascending, in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..=n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(1, n, k, &mut cur, &mut out);
    out
}

/// One driver variable plus n witness variables, all transitions free.
/// The single rule demands, for every driver token, some j whose main
/// value starts during the token and whose primed value starts after it.
pub fn build_pn(n: usize) -> Problem {
    let mut b = ProblemBuilder::new();
    let dom0: [&str; 2] = ["v0", "bar0"];
    b.var("x0", &[("v0", &dom0), ("bar0", &dom0)]);
    let mut names = Vec::new();
    for j in 1..=n {
        names.push((format!("x{j}"), format!("v{j}"), format!("vp{j}"), format!("bar{j}")));
    }
    for (var, v, vp, bar) in &names {
        let dom: [&str; 3] = [v, vp, bar];
        b.var(var, &[(v, &dom), (vp, &dom), (bar, &dom)]);
    }
    let mut disjuncts = Vec::new();
    for (var, v, vp, _) in &names {
        disjuncts.push(Existential {
            quantifiers: vec![
                Quantifier::new("a", var, v),
                Quantifier::new("ap", var, vp),
            ],
            atoms: vec![
                Atom::le(Term::start("a0"), Term::start("a")),
                Atom::le(Term::start("a"), Term::end("a0")),
                Atom::le(Term::end("a0"), Term::start("ap")),
            ],
        });
    }
    b.rule(Rule {
        name: "witness_batches".into(),
        trigger: Some(Quantifier::new("a0", "x0", "v0")),
        disjuncts,
    });
    b.build()
}

/// The word carrying the batch sequence: the driver runs one token per
/// batch, batch t's members start their main value inside driver token t,
/// and the last step parks every variable on its idle value.  An empty
/// sequence gives the empty word.
pub fn w_word(p: &Problem, n: usize, mus: &[Vec<usize>]) -> Word {
    if mus.is_empty() {
        return Vec::new();
    }
    let m = mus.len();
    let h = 2 * m;
    let v0 = p.value_id("v0").unwrap();
    let bar0 = p.value_id("bar0").unwrap();
    let v: Vec<usize> = (1..=n).map(|j| p.value_id(&format!("v{j}")).unwrap()).collect();
    let bar: Vec<usize> = (1..=n).map(|j| p.value_id(&format!("bar{j}")).unwrap()).collect();

    let mut word = Vec::with_capacity(h + 1);
    let mut init = vec![v0];
    init.extend(bar.iter().copied());
    word.push(Symbol::Initial(init));
    let mut cur: Vec<usize> = bar.clone();
    for i in 1..=h {
        let mut entries = vec![StepEntry::Unchanged; n + 1];
        if i % 2 == 1 {
            let t = (i + 1) / 2;
            for &j in &mus[t - 1] {
                entries[j] = StepEntry::Change { from: cur[j - 1], to: v[j - 1] };
                cur[j - 1] = v[j - 1];
            }
        } else if i < h {
            entries[0] = StepEntry::Change { from: v0, to: v0 };
        } else {
            entries[0] = StepEntry::Change { from: v0, to: bar0 };
            for j in 1..=n {
                if cur[j - 1] == v[j - 1] {
                    entries[j] = StepEntry::Change { from: v[j - 1], to: bar[j - 1] };
                    cur[j - 1] = bar[j - 1];
                }
            }
        }
        word.push(Symbol::Step(entries));
    }
    word
}

/// The probe symbol: members of `mu` switch from idle to primed, the rest
/// stay put.  Well formed after any `w_word` output, and identical across
/// them, so it can distinguish residuals.
pub fn sigma_mu(p: &Problem, n: usize, mu: &[usize]) -> Symbol {
    let mut entries = vec![StepEntry::Unchanged; n + 1];
    for &j in mu {
        let bar = p.value_id(&format!("bar{j}")).unwrap();
        let vp = p.value_id(&format!("vp{j}")).unwrap();
        entries[j] = StepEntry::Change { from: bar, to: vp };
    }
    Symbol::Step(entries)
}

/// Appends the probe for `mu` to `prefix` and decides membership twice:
/// by the oracle, and by the closed form "every batch of the prefix
/// intersects `mu`".  Both must agree; the verdict is returned.
pub fn extend_and_check(
    p: &Problem,
    rules: &[BoundRule],
    n: usize,
    prefix_mus: &[Vec<usize>],
    mu: &[usize],
) -> bool {
    let mut word = w_word(p, n, prefix_mus);
    word.push(sigma_mu(p, n, mu));
    let oracle = word_is_solution(p, rules, &word);
    let closed_form = !prefix_mus.is_empty()
        && prefix_mus.iter().all(|batch| batch.iter().any(|j| mu.contains(j)));
    assert_eq!(
        oracle, closed_form,
        "oracle and closed form disagree on prefix {prefix_mus:?} probe {mu:?}"
    );
    oracle
}

#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    pub n: usize,
    pub subset_size: usize,
    /// Pairwise-distinguished prefixes: 2 to the number of batches.
    pub classes: u128,
    /// The single-exponential count the experiment must beat.
    pub threshold: u128,
    pub pairs_certified: u64,
    pub millis: u128,
}

/// Builds the family for `n`, distinguishes every pair of batch-set
/// classes with an explicit probe checked by the oracle, and reports the
/// certified class count next to the 2^n threshold.
pub fn count_distinguished(n: usize) -> LowerBoundReport {
    let start = Instant::now();
    let k = subset_size(n);
    let p = build_pn(n);
    debug_assert!(crate::model::validate_problem(&p).is_empty());
    let rules = bind_all(&p).expect("family rule must bind");
    let subsets = k_subsets(n, k);
    let count = subsets.len();
    assert!(count < 64, "support enumeration uses a u64 mask");
    let supports: Vec<Vec<Vec<usize>>> = (0u64..(1 << count))
        .map(|mask| {
            (0..count)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| subsets[i].clone())
                .collect()
        })
        .collect();

    let mut pairs_certified = 0u64;
    for s1 in 0..supports.len() {
        for s2 in (s1 + 1)..supports.len() {
            let (a, b) = (&supports[s1], &supports[s2]);
            // Some batch separates the two sets; the side holding it is
            // "rich".  A probe that misses the separating batch but meets
            // every batch of the poor side tells the residuals apart.
            let separating = a
                .iter()
                .find(|m| !b.contains(m))
                .or_else(|| b.iter().find(|m| !a.contains(m)))
                .expect("distinct supports must differ");
            let (rich, poor) = if a.contains(separating) { (a, b) } else { (b, a) };
            if poor.is_empty() {
                // The poor side is the empty word; a probe meeting every
                // rich batch accepts there, while a lone step symbol is
                // not even well formed.
                let probe: Vec<usize> =
                    rich.iter().map(|m| m[0]).collect::<std::collections::BTreeSet<_>>()
                        .into_iter()
                        .collect();
                assert!(extend_and_check(&p, &rules, n, rich, &probe));
                assert!(!extend_and_check(&p, &rules, n, poor, &probe));
            } else {
                let probe: Vec<usize> = poor
                    .iter()
                    .map(|m| {
                        *m.iter()
                            .find(|j| !separating.contains(j))
                            .expect("distinct equal-size batches cannot contain each other")
                    })
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                assert!(extend_and_check(&p, &rules, n, poor, &probe));
                assert!(!extend_and_check(&p, &rules, n, rich, &probe));
            }
            pairs_certified += 1;
        }
    }

    LowerBoundReport {
        n,
        subset_size: k,
        classes: 1u128 << count,
        threshold: 1u128 << n,
        pairs_certified,
        millis: start.elapsed().as_millis(),
    }
}

pub fn csv_report(reports: &[LowerBoundReport]) -> String {
    let mut out = String::from("n,classes,threshold,verified_pairs,millis\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n, r.classes, r.threshold, r.pairs_certified, r.millis
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eager::classify_problem;
    use crate::words::decode;

    #[test]
    fn family_is_valid_and_disjunctive() {
        let p = build_pn(2);
        assert!(crate::model::validate_problem(&p).is_empty());
        assert_eq!(p.vars.len(), 3);
        let classes = classify_problem(&p).unwrap();
        assert_eq!(classes.len(), 1);
        assert!(!classes[0].eager);
        assert_eq!(classes[0].reasons(), vec!["disjunctive".to_string()]);
    }

    #[test]
    fn batch_word_decodes_to_expected_timelines() {
        let n = 2;
        let p = build_pn(n);
        let word = w_word(&p, n, &[vec![1]]);
        assert_eq!(word.len(), 3);
        let plan = decode(&p, &word).unwrap();
        assert_eq!(plan.horizon, 3);
        let name = |v| p.value_name(v).to_string();
        let tl: Vec<Vec<(String, u64)>> = plan
            .timelines
            .iter()
            .map(|ts| ts.iter().map(|t| (name(t.value), t.duration)).collect())
            .collect();
        assert_eq!(
            tl[0],
            vec![("v0".into(), 2), ("bar0".into(), 1)]
        );
        assert_eq!(
            tl[1],
            vec![("bar1".into(), 1), ("v1".into(), 1), ("bar1".into(), 1)]
        );
        assert_eq!(tl[2], vec![("bar2".into(), 3)]);
    }

    #[test]
    fn closed_form_matches_oracle_exhaustively_for_two() {
        let n = 2;
        let p = build_pn(n);
        let rules = bind_all(&p).unwrap();
        let batches = k_subsets(n, subset_size(n));
        let all_mus: Vec<Vec<usize>> =
            vec![vec![], vec![1], vec![2], vec![1, 2]];
        for mask in 0u8..4 {
            let prefix: Vec<Vec<usize>> = (0..2)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| batches[i].clone())
                .collect();
            for mu in &all_mus {
                extend_and_check(&p, &rules, n, &prefix, mu);
            }
        }
    }

    #[test]
    fn probe_only_word_is_rejected() {
        let n = 2;
        let p = build_pn(n);
        let rules = bind_all(&p).unwrap();
        let word = vec![sigma_mu(&p, n, &[1, 2])];
        assert!(!word_is_solution(&p, &rules, &word));
    }

    #[test]
    fn closed_form_matches_oracle_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4usize {
            let p = build_pn(n);
            let rules = bind_all(&p).unwrap();
            let batches = k_subsets(n, subset_size(n));
            // extend_and_check asserts agreement internally on every call.
            for _ in 0..167 {
                let prefix: Vec<Vec<usize>> = batches
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .cloned()
                    .collect();
                let mu: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
                extend_and_check(&p, &rules, n, &prefix, &mu);
            }
        }
    }

    #[test]
    fn small_counts_are_exact() {
        let r1 = count_distinguished(1);
        assert_eq!(r1.subset_size, 1);
        assert_eq!(r1.classes, 2);
        assert_eq!(r1.pairs_certified, 1);
        let r2 = count_distinguished(2);
        assert_eq!(r2.classes, 4);
        assert_eq!(r2.pairs_certified, 6);
        assert_eq!(r2.threshold, 4);
    }

    #[test]
    fn csv_lists_one_line_per_report() {
        let r = count_distinguished(1);
        let csv = csv_report(&[r]);
        assert!(csv.starts_with("n,classes,threshold,verified_pairs,millis\n"));
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,2,2,1,"));
    }
}
