use super::{
    aggregate, reduce_redundant, AggregatedOutput, AssessmentKind, ClippedOutputSet,
    FuzzifiedInput, FuzzyConfig, FuzzyError, LinguisticVariable, RuleBase,
};

/// Anything that can turn (DPB, SI, RC) into a reward or punishment amount.
pub trait Assessor: Send + Sync {
    fn assess(&self, dpb: f64, si: u8, rc: f64, kind: AssessmentKind) -> Result<f64, FuzzyError>;
}

/// Immutable Mamdani controller holding the input and output variables and
/// both rule tables.
#[derive(Debug, Clone)]
pub struct FuzzyEngine {
    dpb: LinguisticVariable,
    si: LinguisticVariable,
    rc: LinguisticVariable,
    reward_out: LinguisticVariable,
    punishment_out: LinguisticVariable,
    reward_rules: RuleBase,
    punishment_rules: RuleBase,
}

/// Every intermediate of one assessment, for inspection and logging.
#[derive(Debug, Clone)]
pub struct AssessmentTrace {
    pub inputs: [FuzzifiedInput; 3],
    pub fired: Vec<ClippedOutputSet>,
    pub reduced: Vec<ClippedOutputSet>,
    pub aggregated: AggregatedOutput,
    pub value: f64,
}

impl FuzzyEngine {
    pub fn from_config(cfg: &FuzzyConfig) -> Result<Self, FuzzyError> {
        let dpb = cfg.dpb.build()?;
        let si = cfg.si.build()?;
        let rc = cfg.rc.build()?;
        let reward_out = cfg.reward_output.build()?;
        let punishment_out = cfg.punishment_output.build()?;
        for v in [&dpb, &si, &rc] {
            if v.terms().len() != 3 {
                return Err(FuzzyError::InvalidVariable {
                    name: v.name().into(),
                    reason: format!("{} terms, inputs need exactly 3", v.terms().len()),
                });
            }
        }
        for v in [&reward_out, &punishment_out] {
            if v.terms().len() != 5 {
                return Err(FuzzyError::InvalidVariable {
                    name: v.name().into(),
                    reason: format!("{} terms, outputs need exactly 5", v.terms().len()),
                });
            }
        }
        let reward_rules = RuleBase::from_labels(
            AssessmentKind::Reward,
            cfg.reward.connective,
            [&dpb, &si, &rc],
            &reward_out,
            &cfg.reward.rules,
        )?;
        let punishment_rules = RuleBase::from_labels(
            AssessmentKind::Punishment,
            cfg.punishment.connective,
            [&dpb, &si, &rc],
            &punishment_out,
            &cfg.punishment.rules,
        )?;
        Ok(Self {
            dpb,
            si,
            rc,
            reward_out,
            punishment_out,
            reward_rules,
            punishment_rules,
        })
    }

    pub fn dpb(&self) -> &LinguisticVariable {
        &self.dpb
    }

    pub fn si(&self) -> &LinguisticVariable {
        &self.si
    }

    pub fn rc(&self) -> &LinguisticVariable {
        &self.rc
    }

    pub fn output(&self, kind: AssessmentKind) -> &LinguisticVariable {
        match kind {
            AssessmentKind::Reward => &self.reward_out,
            AssessmentKind::Punishment => &self.punishment_out,
        }
    }

    pub fn rules(&self, kind: AssessmentKind) -> &RuleBase {
        match kind {
            AssessmentKind::Reward => &self.reward_rules,
            AssessmentKind::Punishment => &self.punishment_rules,
        }
    }

    pub fn fuzzify_inputs(&self, dpb: f64, si: u8, rc: f64) -> Result<[FuzzifiedInput; 3], FuzzyError> {
        if si > 12 {
            return Err(FuzzyError::CrispOutOfDomain {
                variable: self.si.name().into(),
                value: si as f64,
                lo: 0.0,
                hi: 12.0,
            });
        }
        Ok([
            self.dpb.fuzzify(dpb)?,
            self.si.fuzzify(si as f64)?,
            self.rc.fuzzify(rc)?,
        ])
    }

    pub fn assess_traced(
        &self,
        dpb: f64,
        si: u8,
        rc: f64,
        kind: AssessmentKind,
    ) -> Result<AssessmentTrace, FuzzyError> {
        let inputs = self.fuzzify_inputs(dpb, si, rc)?;
        let fired = self.rules(kind).fire([&inputs[0], &inputs[1], &inputs[2]]);
        let reduced = reduce_redundant(&fired);
        let aggregated = aggregate(&reduced, self.output(kind))?;
        let value = aggregated.centroid()?;
        Ok(AssessmentTrace {
            inputs,
            fired,
            reduced,
            aggregated,
            value,
        })
    }
}

impl Assessor for FuzzyEngine {
    fn assess(&self, dpb: f64, si: u8, rc: f64, kind: AssessmentKind) -> Result<f64, FuzzyError> {
        self.assess_traced(dpb, si, rc, kind).map(|t| t.value)
    }
}

impl Default for FuzzyEngine {
    fn default() -> Self {
        Self::from_config(&FuzzyConfig::default()).expect("bundled fuzzy config is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crisp_corner_fires_one_and_rule() {
        let e = FuzzyEngine::default();
        let t = e.assess_traced(0.0, 0, 0.0, AssessmentKind::Reward).unwrap();
        assert_eq!(t.fired.len(), 1);
        assert_eq!(t.fired[0].rule, 1);
        assert_eq!(t.fired[0].height, 1.0);
    }

    #[test]
    fn out_of_range_severity_is_rejected() {
        let e = FuzzyEngine::default();
        assert!(matches!(
            e.assess(0.0, 13, 0.5, AssessmentKind::Reward),
            Err(FuzzyError::CrispOutOfDomain { .. })
        ));
        assert!(e.assess(1.5, 3, 0.5, AssessmentKind::Reward).is_err());
    }

    #[test]
    fn wrong_term_counts_are_rejected() {
        let mut cfg = FuzzyConfig::default();
        cfg.dpb.terms.pop();
        assert!(FuzzyEngine::from_config(&cfg).is_err());
    }

    #[test]
    fn duplicate_rule_is_rejected() {
        let mut cfg = FuzzyConfig::default();
        cfg.reward.rules[1] = cfg.reward.rules[0].clone();
        assert!(matches!(
            FuzzyEngine::from_config(&cfg),
            Err(FuzzyError::IncompleteRuleBase(_))
        ));
    }

    #[test]
    fn unknown_label_is_rejected() {
        let mut cfg = FuzzyConfig::default();
        cfg.punishment.rules[3][3] = "Huge".into();
        assert!(matches!(
            FuzzyEngine::from_config(&cfg),
            Err(FuzzyError::UnknownLabel { .. })
        ));
    }
}
