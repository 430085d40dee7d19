use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Connective, FuzzyError, LinguisticVariable, MembershipFunction, Term};

const DEFAULT_TOML: &str = include_str!("../../data/default_fuzzy.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub domain: [f64; 2],
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTableSpec {
    pub connective: Connective,
    /// Rows of `[dpb, si, rc, output]` labels.
    pub rules: Vec<[String; 4]>,
}

/// File form of the fuzzy controller: five variables and two rule tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyConfig {
    pub dpb: VariableSpec,
    pub si: VariableSpec,
    pub rc: VariableSpec,
    pub reward_output: VariableSpec,
    pub punishment_output: VariableSpec,
    pub reward: RuleTableSpec,
    pub punishment: RuleTableSpec,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_TOML).expect("bundled fuzzy config parses")
    }
}

impl FuzzyConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, FuzzyError> {
        toml::from_str(s).map_err(|e| FuzzyError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, FuzzyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FuzzyError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("fuzzy config serializes")
    }

    /// The bundled default config, verbatim.
    pub fn default_toml() -> &'static str {
        DEFAULT_TOML
    }
}

impl VariableSpec {
    pub fn build(&self) -> Result<LinguisticVariable, FuzzyError> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mf = MembershipFunction::new(t.points.iter().map(|p| (p[0], p[1])).collect())
                    .map_err(|e| match e {
                        FuzzyError::InvalidMembership(m) => {
                            FuzzyError::InvalidMembership(format!("{}/{}: {m}", self.name, t.label))
                        }
                        other => other,
                    })?;
                Ok(Term {
                    label: t.label.clone(),
                    mf,
                })
            })
            .collect::<Result<Vec<_>, FuzzyError>>()?;
        LinguisticVariable::new(self.name.clone(), (self.domain[0], self.domain[1]), terms)
    }
}
