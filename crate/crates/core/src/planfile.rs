//! JSON format for plans.
//!
//! ```json
//! {
//!   "horizon": 3,
//!   "timelines": {
//!     "machine": [
//!       { "value": "busy", "duration": 1 },
//!       { "value": "idle", "duration": 2 }
//!     ]
//!   }
//! }
//! ```
//!
//! Timelines are keyed by variable name; a missing variable means an
//! empty timeline, which plan validation only accepts at horizon zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Plan, Problem, Token};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenDoc {
    pub value: String,
    pub duration: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanDoc {
    pub horizon: u64,
    pub timelines: BTreeMap<String, Vec<TokenDoc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanFileError {
    #[error("cannot parse plan: {0}")]
    Json(String),
    #[error("plan mentions unknown variable {0}")]
    UnknownVariable(String),
    #[error("timeline of {variable} uses unknown value {value}")]
    UnknownValue { variable: String, value: String },
}

pub fn to_doc(p: &Problem, plan: &Plan) -> PlanDoc {
    let mut timelines = BTreeMap::new();
    for (var, tokens) in plan.timelines.iter().enumerate() {
        timelines.insert(
            p.vars[var].name.clone(),
            tokens
                .iter()
                .map(|t| TokenDoc {
                    value: p.value_name(t.value).to_string(),
                    duration: t.duration,
                })
                .collect(),
        );
    }
    PlanDoc { horizon: plan.horizon, timelines }
}

pub fn from_doc(p: &Problem, doc: &PlanDoc) -> Result<Plan, PlanFileError> {
    let mut plan = Plan::empty(p.vars.len());
    plan.horizon = doc.horizon;
    for (name, tokens) in &doc.timelines {
        let var = p
            .var_id(name)
            .ok_or_else(|| PlanFileError::UnknownVariable(name.clone()))?;
        plan.timelines[var] = tokens
            .iter()
            .map(|t| {
                p.value_id(&t.value)
                    .map(|value| Token { value, duration: t.duration })
                    .ok_or_else(|| PlanFileError::UnknownValue {
                        variable: name.clone(),
                        value: t.value.clone(),
                    })
            })
            .collect::<Result<_, _>>()?;
    }
    Ok(plan)
}

pub fn render_plan(p: &Problem, plan: &Plan) -> String {
    serde_json::to_string_pretty(&to_doc(p, plan)).expect("plan serialization cannot fail")
}

pub fn parse_plan(p: &Problem, text: &str) -> Result<Plan, PlanFileError> {
    let doc: PlanDoc =
        serde_json::from_str(text).map_err(|e| PlanFileError::Json(e.to_string()))?;
    from_doc(p, &doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_plan, ProblemBuilder};

    fn problem() -> Problem {
        let mut b = ProblemBuilder::new();
        b.var("machine", &[("busy", &["idle"]), ("idle", &["busy"])]);
        b.build()
    }

    #[test]
    fn round_trip_preserves_plan() {
        let p = problem();
        let mut plan = Plan::empty(1);
        plan.horizon = 3;
        plan.timelines[0] = vec![
            Token { value: p.value_id("busy").unwrap(), duration: 1 },
            Token { value: p.value_id("idle").unwrap(), duration: 2 },
        ];
        let text = render_plan(&p, &plan);
        let back = parse_plan(&p, &text).unwrap();
        assert_eq!(back.horizon, plan.horizon);
        assert_eq!(back.timelines, plan.timelines);
    }

    #[test]
    fn unknown_names_are_reported() {
        let p = problem();
        let text = r#"{"horizon":1,"timelines":{"widget":[]}}"#;
        assert_eq!(
            parse_plan(&p, text),
            Err(PlanFileError::UnknownVariable("widget".into()))
        );
        let text = r#"{"horizon":1,"timelines":{"machine":[{"value":"warp","duration":1}]}}"#;
        assert!(matches!(
            parse_plan(&p, text),
            Err(PlanFileError::UnknownValue { .. })
        ));
    }

    #[test]
    fn missing_timeline_fails_validation_at_positive_horizon() {
        let p = problem();
        let plan = parse_plan(&p, r#"{"horizon":2,"timelines":{}}"#).unwrap();
        assert!(!validate_plan(&p, &plan).is_empty());
    }

    #[test]
    fn malformed_json_is_an_error() {
        let p = problem();
        assert!(matches!(
            parse_plan(&p, "{"),
            Err(PlanFileError::Json(_))
        ));
    }
}
