//! Closure of a conjunctive clause of ordering atoms.
//!
//! The closure of a clause contains everything the clause entails about the
//! relative order of token endpoints: reflexivity on occurring terms, the
//! strict span of every token whose two endpoints both occur, weakening of
//! strict to non-strict precedence, and transitive composition (strict
//! whenever at least one composed step is strict).  A clause is consistent
//! exactly when its closure derives no strict self-precedence.

use crate::model::{BoundAtom, Endpoint};

/// Index of a token endpoint in the closure matrices.
pub fn term_index(token: usize, endpoint: Endpoint) -> usize {
    token * 2 + (endpoint == Endpoint::End) as usize
}

/// Saturated precedence relation of one clause over a fixed token list.
///
/// Terms that appear in no atom take part in no relation: every membership
/// query about them answers `false`.
#[derive(Debug, Clone)]
pub struct ClauseClosure {
    n_terms: usize,
    occurs: Vec<bool>,
    leq: Vec<Vec<bool>>,
    lt: Vec<Vec<bool>>,
}

impl ClauseClosure {
    pub fn close(token_count: usize, atoms: &[BoundAtom]) -> ClauseClosure {
        let n = token_count * 2;
        let mut occurs = vec![false; n];
        for a in atoms {
            occurs[term_index(a.lhs.0, a.lhs.1)] = true;
            occurs[term_index(a.rhs.0, a.rhs.1)] = true;
        }

        let mut leq = vec![vec![false; n]; n];
        let mut strict_base: Vec<(usize, usize)> = Vec::new();
        let mut add = |leq: &mut Vec<Vec<bool>>, i: usize, j: usize, strict: bool| {
            leq[i][j] = true;
            if strict {
                strict_base.push((i, j));
            }
        };
        for (i, &o) in occurs.iter().enumerate() {
            if o {
                add(&mut leq, i, i, false);
            }
        }
        for t in 0..token_count {
            let s = term_index(t, Endpoint::Start);
            let e = term_index(t, Endpoint::End);
            if occurs[s] && occurs[e] {
                add(&mut leq, s, e, true);
            }
        }
        for a in atoms {
            let i = term_index(a.lhs.0, a.lhs.1);
            let j = term_index(a.rhs.0, a.rhs.1);
            add(&mut leq, i, j, a.strict);
        }

        // Warshall closure of the non-strict relation.
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }

        // A composed chain is strict exactly when it passes through some
        // strict base step.
        let mut lt = vec![vec![false; n]; n];
        for &(a, b) in &strict_base {
            for i in 0..n {
                if leq[i][a] {
                    for j in 0..n {
                        if leq[b][j] {
                            lt[i][j] = true;
                        }
                    }
                }
            }
        }

        ClauseClosure { n_terms: n, occurs, leq, lt }
    }

    pub fn term_count(&self) -> usize {
        self.n_terms
    }

    pub fn occurs(&self, token: usize, endpoint: Endpoint) -> bool {
        self.occurs[term_index(token, endpoint)]
    }

    /// Is `lhs <= rhs` in the closure?
    pub fn leq(&self, lhs: (usize, Endpoint), rhs: (usize, Endpoint)) -> bool {
        self.leq[term_index(lhs.0, lhs.1)][term_index(rhs.0, rhs.1)]
    }

    /// Is `lhs < rhs` in the closure?
    pub fn lt(&self, lhs: (usize, Endpoint), rhs: (usize, Endpoint)) -> bool {
        self.lt[term_index(lhs.0, lhs.1)][term_index(rhs.0, rhs.1)]
    }

    /// Are the two terms forced to coincide (`<=` in both directions)?
    pub fn equiv(&self, lhs: (usize, Endpoint), rhs: (usize, Endpoint)) -> bool {
        self.leq(lhs, rhs) && self.leq(rhs, lhs)
    }

    pub fn leq_idx(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn lt_idx(&self, i: usize, j: usize) -> bool {
        self.lt[i][j]
    }

    /// A clause is consistent when no term must strictly precede itself.
    pub fn consistent(&self) -> bool {
        (0..self.n_terms).all(|i| !self.lt[i][i])
    }

    /// Coincidence classes of occurring terms.  Each class is an ascending
    /// list of term indices; classes are ordered by their smallest member.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.n_terms];
        let mut out = Vec::new();
        for i in 0..self.n_terms {
            if !self.occurs[i] || assigned[i] {
                continue;
            }
            let class: Vec<usize> = (i..self.n_terms)
                .filter(|&j| self.occurs[j] && self.leq[i][j] && self.leq[j][i])
                .collect();
            for &j in &class {
                assigned[j] = true;
            }
            out.push(class);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Endpoint::{End, Start};

    fn atom(lhs: (usize, Endpoint), rhs: (usize, Endpoint), strict: bool) -> BoundAtom {
        BoundAtom { lhs, rhs, strict }
    }

    #[test]
    fn occurring_terms_are_reflexive_and_others_unrelated() {
        let c = ClauseClosure::close(2, &[atom((0, Start), (1, Start), false)]);
        assert!(c.leq((0, Start), (0, Start)));
        assert!(c.leq((1, Start), (1, Start)));
        assert!(!c.leq((0, End), (0, End)));
        assert!(!c.occurs(0, End));
    }

    #[test]
    fn token_span_is_strict_when_both_endpoints_occur() {
        let c = ClauseClosure::close(
            2,
            &[
                atom((0, Start), (1, Start), false),
                atom((1, End), (0, End), false),
            ],
        );
        // Both endpoints of token 0 occur (in different atoms), so its span
        // is derived strict.
        assert!(c.lt((0, Start), (0, End)));
        assert!(c.lt((1, Start), (1, End)));
        // Composition through the strict span stays strict.
        assert!(c.lt((0, Start), (0, End)));
        assert!(c.lt((0, Start), (1, End)));
    }

    #[test]
    fn strictness_propagates_through_composition() {
        let c = ClauseClosure::close(
            3,
            &[
                atom((0, Start), (1, Start), false),
                atom((1, Start), (2, Start), true),
                atom((2, Start), (0, End), false),
            ],
        );
        assert!(c.lt((0, Start), (2, Start)));
        assert!(c.lt((0, Start), (0, End)));
        assert!(c.leq((0, Start), (0, End)));
        assert!(!c.lt((0, Start), (1, Start)));
        assert!(c.consistent());
    }

    #[test]
    fn strict_cycle_is_inconsistent() {
        let c = ClauseClosure::close(
            2,
            &[
                atom((0, Start), (1, Start), true),
                atom((1, Start), (0, Start), false),
            ],
        );
        assert!(!c.consistent());
    }

    #[test]
    fn nonstrict_cycle_forms_a_class() {
        let c = ClauseClosure::close(
            2,
            &[
                atom((0, Start), (1, Start), false),
                atom((1, Start), (0, Start), false),
                atom((0, End), (1, End), false),
            ],
        );
        assert!(c.consistent());
        assert!(c.equiv((0, Start), (1, Start)));
        assert!(!c.equiv((0, End), (1, End)));
        let classes = c.classes();
        // {start0, start1}, {end0}, {end1}
        assert_eq!(classes.len(), 3);
        assert_eq!(classes[0], vec![term_index(0, Start), term_index(1, Start)]);
    }

    #[test]
    fn containment_clause_closure() {
        // start(a0) <= start(a1), start(a1) <= end(a0), end(a0) <= end(a1):
        // token 1 starts inside token 0 and ends after it.
        let c = ClauseClosure::close(
            2,
            &[
                atom((0, Start), (1, Start), false),
                atom((1, Start), (0, End), false),
                atom((0, End), (1, End), false),
            ],
        );
        assert!(c.consistent());
        assert!(c.lt((0, Start), (0, End)));
        assert!(c.lt((1, Start), (1, End)));
        assert!(c.leq((0, Start), (1, End)));
        assert!(c.lt((0, Start), (1, End)));
        assert!(!c.leq((1, Start), (0, Start)));
        assert!(!c.equiv((0, End), (1, Start)));
        assert_eq!(c.classes().len(), 4);
    }

    #[test]
    fn equality_pair_collapses_endpoints() {
        let c = ClauseClosure::close(
            2,
            &[
                atom((0, Start), (1, Start), false),
                atom((1, Start), (0, Start), false),
                atom((0, End), (1, End), false),
                atom((1, End), (0, End), false),
            ],
        );
        assert!(c.consistent());
        assert!(c.equiv((0, Start), (1, Start)));
        assert!(c.equiv((0, End), (1, End)));
        assert_eq!(c.classes().len(), 2);
        assert!(c.lt((1, Start), (1, End)));
    }
}
