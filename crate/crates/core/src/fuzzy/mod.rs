//! Mamdani controller for RSU reward and punishment amounts.
//!
//! Pipeline: fuzzify DPB, SI and RC, fire the 27-rule table, keep the
//! strongest set per output label, take the max envelope, then the exact
//! centroid.

mod aggregate;
mod config;
mod engine;
mod lookup;
mod membership;
mod rules;
mod variable;

pub use aggregate::{aggregate, defuzzify_centroid, AggregatedOutput};
pub use config::{FuzzyConfig, RuleTableSpec, TermSpec, VariableSpec};
pub use engine::{AssessmentTrace, Assessor, FuzzyEngine};
pub use lookup::{LookupGrid, LookupTable, LOOKUP_HEADER};
pub use membership::MembershipFunction;
pub use rules::{reduce_redundant, AssessmentKind, ClippedOutputSet, Connective, FuzzyRule, RuleBase};
pub use variable::{FuzzifiedInput, LinguisticVariable, Term, DOMAIN_TOLERANCE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuzzyError {
    #[error("{variable} value {value} is outside [{lo}, {hi}]")]
    CrispOutOfDomain {
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("no rule fired")]
    EmptyRuleFiring,
    #[error("aggregated output has zero mass")]
    ZeroMass,
    #[error("invalid membership function: {0}")]
    InvalidMembership(String),
    #[error("invalid variable {name}: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("unknown label {label} for {variable}")]
    UnknownLabel { variable: String, label: String },
    #[error("rule base is not a complete product: {0}")]
    IncompleteRuleBase(String),
    #[error("fuzzy config: {0}")]
    Config(String),
    #[error("lookup cache: {0}")]
    LookupFormat(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dpb_anchor() {
        let e = FuzzyEngine::default();
        let f = e.dpb().fuzzify(0.4).unwrap();
        assert!((f.get("Good").unwrap() - 0.24).abs() <= 0.02);
        assert!((f.get("Neutral").unwrap() - 0.76).abs() <= 0.02);
        assert_eq!(f.get("Bad"), Some(0.0));
        let z = e.dpb().fuzzify(0.0).unwrap();
        assert_eq!(
            [z.degree(0), z.degree(1), z.degree(2)],
            [1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn si_anchor() {
        let e = FuzzyEngine::default();
        let f = e.si().fuzzify(4.0).unwrap();
        assert!((f.get("NotSevere").unwrap() - 0.18).abs() <= 0.02);
        assert!((f.get("LessSevere").unwrap() - 0.82).abs() <= 0.02);
        assert_eq!(f.get("HighSevere"), Some(0.0));
    }

    #[test]
    fn worked_example_rule_set() {
        let e = FuzzyEngine::default();
        let t = e.assess_traced(0.8, 4, 0.33, AssessmentKind::Reward).unwrap();
        let rules: Vec<usize> = t.fired.iter().map(|c| c.rule).collect();
        assert_eq!(rules, [10, 11, 13, 14, 19, 20, 22, 23]);
        let labels: Vec<&str> = t.reduced.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["VeryLow", "Low", "Medium"]);
        assert!((t.value - 0.030014).abs() <= 0.01, "{}", t.value);
    }

    #[test]
    fn uniform_degree_and_rule_strength() {
        let e = FuzzyEngine::default();
        let rb = e.rules(AssessmentKind::Reward);
        let one_hot = |i: usize| FuzzifiedInput {
            degrees: (0..3).map(|k| (k.to_string(), if k == i { 0.3 } else { 0.0 })).collect(),
        };
        let fired = rb.fire([&one_hot(1), &one_hot(2), &one_hot(0)]);
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].rule, 16);
        assert_eq!(fired[0].height, 0.3);
    }
}
