//! Plan existence, verification and analysis for the eager fragment of
//! qualitative timeline-based planning.
//!
//! The crate models planning problems as sets of state variables plus
//! synchronization rules, classifies rules as eager or not, compiles eager
//! problems into a product of two deterministic automata (one tracking
//! timeline evolution, one tracking rule satisfaction), and decides plan
//! existence by searching that product.  Witness words decode into plans.
//!
//! Independent of the automata pipeline, [`oracle`] evaluates rules directly
//! against plans by enumerating token assignments; the two routes check each
//! other throughout the test suite.
//!
//! The remaining modules cover the surrounding toolkit: a small text format
//! for problems ([`dsl`]), an encoding of Allen's interval relations as rules
//! ([`allen`]), a family of problems witnessing an exponential lower bound on
//! rule-automaton size ([`lowerbound`]), and a compiler from block-structured
//! process trees into eager planning problems ([`bpmn`]).

pub mod allen;
pub mod bpmn;
pub mod closure;
pub mod dsl;
pub mod eager;
pub mod lowerbound;
pub mod model;
pub mod oracle;
pub mod plan_dfa;
pub mod planfile;
pub mod rule_dfa;
pub mod solver;
pub mod words;
