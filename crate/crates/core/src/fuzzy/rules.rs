use serde::{Deserialize, Serialize};

use super::{FuzzifiedInput, FuzzyError, LinguisticVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    /// Firing strength is the minimum antecedent degree.
    And,
    /// Firing strength is the maximum antecedent degree.
    Or,
}

impl Connective {
    pub fn combine(self, degrees: [f64; 3]) -> f64 {
        match self {
            Connective::And => degrees[0].min(degrees[1]).min(degrees[2]),
            Connective::Or => degrees[0].max(degrees[1]).max(degrees[2]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessmentKind {
    Reward,
    Punishment,
}

impl std::fmt::Display for AssessmentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AssessmentKind::Reward => "reward",
            AssessmentKind::Punishment => "punishment",
        })
    }
}

/// One row of a rule table, stored as term indices of the DPB, SI, RC and
/// output variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzyRule {
    pub antecedent: [usize; 3],
    pub consequent: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    kind: AssessmentKind,
    connective: Connective,
    rules: Vec<FuzzyRule>,
    output_labels: Vec<String>,
}

/// A rule's output term clipped at the rule's firing strength.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedOutputSet {
    /// 1-based position of the rule in its table.
    pub rule: usize,
    pub term: usize,
    pub label: String,
    pub height: f64,
}

impl RuleBase {
    /// Resolves a table of label rows against the variables and checks that
    /// the antecedents cover the label product exactly once.
    pub fn from_labels(
        kind: AssessmentKind,
        connective: Connective,
        inputs: [&LinguisticVariable; 3],
        output: &LinguisticVariable,
        rows: &[[String; 4]],
    ) -> Result<Self, FuzzyError> {
        let lookup = |var: &LinguisticVariable, label: &str| {
            var.index_of(label).ok_or_else(|| FuzzyError::UnknownLabel {
                variable: var.name().to_string(),
                label: label.to_string(),
            })
        };
        let mut rules = Vec::with_capacity(rows.len());
        for row in rows {
            rules.push(FuzzyRule {
                antecedent: [
                    lookup(inputs[0], &row[0])?,
                    lookup(inputs[1], &row[1])?,
                    lookup(inputs[2], &row[2])?,
                ],
                consequent: lookup(output, &row[3])?,
            });
        }
        let sizes = inputs.map(|v| v.terms().len());
        let rb = Self {
            kind,
            connective,
            rules,
            output_labels: output.labels().map(str::to_string).collect(),
        };
        rb.check_complete(sizes)?;
        Ok(rb)
    }

    fn check_complete(&self, sizes: [usize; 3]) -> Result<(), FuzzyError> {
        let total = sizes[0] * sizes[1] * sizes[2];
        if self.rules.len() != total {
            return Err(FuzzyError::IncompleteRuleBase(format!(
                "{} rules for a product of {total} antecedents",
                self.rules.len()
            )));
        }
        let mut seen = vec![false; total];
        for r in &self.rules {
            let [a, b, c] = r.antecedent;
            let slot = (a * sizes[1] + b) * sizes[2] + c;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(FuzzyError::IncompleteRuleBase(format!(
                    "antecedent {:?} appears twice",
                    r.antecedent
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> AssessmentKind {
        self.kind
    }

    pub fn connective(&self) -> Connective {
        self.connective
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn output_label(&self, term: usize) -> &str {
        &self.output_labels[term]
    }

    /// Evaluates every rule and keeps the ones with nonzero strength.
    pub fn fire(&self, inputs: [&FuzzifiedInput; 3]) -> Vec<ClippedOutputSet> {
        self.rules
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                let d = [
                    inputs[0].degree(r.antecedent[0]),
                    inputs[1].degree(r.antecedent[1]),
                    inputs[2].degree(r.antecedent[2]),
                ];
                let height = self.connective.combine(d);
                (height > 0.0).then(|| ClippedOutputSet {
                    rule: i + 1,
                    term: r.consequent,
                    label: self.output_labels[r.consequent].clone(),
                    height,
                })
            })
            .collect()
    }
}

/// Keeps one set per output label, the one with the greatest height.
///
/// Ties keep the earliest rule. The result is ordered by output term.
pub fn reduce_redundant(clipped: &[ClippedOutputSet]) -> Vec<ClippedOutputSet> {
    let mut best: Vec<ClippedOutputSet> = Vec::new();
    for c in clipped {
        match best.iter_mut().find(|b| b.label == c.label) {
            Some(b) if c.height > b.height => *b = c.clone(),
            Some(_) => {}
            None => best.push(c.clone()),
        }
    }
    best.sort_by_key(|c| c.term);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rule: usize, label: &str, term: usize, height: f64) -> ClippedOutputSet {
        ClippedOutputSet {
            rule,
            term,
            label: label.into(),
            height,
        }
    }

    #[test]
    fn connectives() {
        assert_eq!(Connective::And.combine([0.3, 0.7, 0.5]), 0.3);
        assert_eq!(Connective::Or.combine([0.3, 0.7, 0.5]), 0.7);
        assert_eq!(Connective::And.combine([0.3, 0.3, 0.3]), 0.3);
    }

    #[test]
    fn reduction_takes_the_maximum_per_label() {
        let sets = vec![
            set(1, "L", 1, 0.05),
            set(2, "L", 1, 0.064),
            set(3, "L", 1, 0.021),
        ];
        let r = reduce_redundant(&sets);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].height, 0.064);
        assert_eq!(r[0].rule, 2);
    }

    #[test]
    fn reduction_of_a_single_set_is_identity() {
        let sets = vec![set(4, "M", 2, 0.4)];
        assert_eq!(reduce_redundant(&sets), sets);
    }

    #[test]
    fn reduction_ties_keep_the_earliest_rule() {
        let sets = vec![set(7, "H", 3, 0.5), set(9, "H", 3, 0.5), set(1, "VL", 0, 0.2)];
        let r = reduce_redundant(&sets);
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].label, "VL");
        assert_eq!(r[1].rule, 7);
    }
}
