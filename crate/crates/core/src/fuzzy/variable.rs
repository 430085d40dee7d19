use super::{FuzzyError, MembershipFunction};

/// Crisp inputs this close outside the domain are clamped instead of rejected.
pub const DOMAIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub label: String,
    pub mf: MembershipFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    domain: (f64, f64),
    terms: Vec<Term>,
}

impl LinguisticVariable {
    /// Builds a variable and checks the breakpoint, label and coverage rules.
    pub fn new(
        name: impl Into<String>,
        domain: (f64, f64),
        terms: Vec<Term>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::InvalidVariable {
                name,
                reason: format!("bad domain [{lo}, {hi}]"),
            });
        }
        if terms.is_empty() {
            return Err(FuzzyError::InvalidVariable {
                name,
                reason: "no terms".into(),
            });
        }
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].iter().any(|o| o.label == t.label) {
                return Err(FuzzyError::InvalidVariable {
                    name,
                    reason: format!("duplicate label {}", t.label),
                });
            }
            if t.mf.lo() != lo || t.mf.hi() != hi {
                return Err(FuzzyError::InvalidVariable {
                    name,
                    reason: format!(
                        "term {} spans [{}, {}] instead of the domain",
                        t.label,
                        t.mf.lo(),
                        t.mf.hi()
                    ),
                });
            }
        }
        let var = Self {
            name,
            domain,
            terms,
        };
        if let Some(x) = var.coverage_gap() {
            return Err(FuzzyError::InvalidVariable {
                name: var.name,
                reason: format!("no term covers x = {x}"),
            });
        }
        Ok(var)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.label.as_str())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    /// Returns a point where every term is zero, if there is one.
    ///
    /// The sum of the terms is piecewise linear, so it is enough to look at
    /// the merged breakpoints and the midpoints between them.
    fn coverage_gap(&self) -> Option<f64> {
        let mut xs: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| t.mf.points().iter().map(|p| p.0))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut probes = xs.clone();
        probes.extend(xs.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        probes
            .into_iter()
            .find(|&x| self.terms.iter().all(|t| t.mf.eval(x) <= 0.0))
    }

    pub fn fuzzify(&self, crisp: f64) -> Result<FuzzifiedInput, FuzzyError> {
        let (lo, hi) = self.domain;
        if !crisp.is_finite() || crisp < lo - DOMAIN_TOLERANCE || crisp > hi + DOMAIN_TOLERANCE {
            return Err(FuzzyError::CrispOutOfDomain {
                variable: self.name.clone(),
                value: crisp,
                lo,
                hi,
            });
        }
        let x = crisp.clamp(lo, hi);
        Ok(FuzzifiedInput {
            degrees: self
                .terms
                .iter()
                .map(|t| (t.label.clone(), t.mf.eval(x)))
                .collect(),
        })
    }
}

/// Degree of membership of one crisp value in each term, in term order.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzifiedInput {
    pub degrees: Vec<(String, f64)>,
}

impl FuzzifiedInput {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.degrees
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, mu)| mu)
    }

    pub fn degree(&self, index: usize) -> f64 {
        self.degrees[index].1
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(label: &str, pts: &[(f64, f64)]) -> Term {
        Term {
            label: label.into(),
            mf: MembershipFunction::new(pts.to_vec()).unwrap(),
        }
    }

    fn two_terms() -> LinguisticVariable {
        LinguisticVariable::new(
            "x",
            (0.0, 1.0),
            vec![
                term("lo", &[(0.0, 1.0), (1.0, 0.0)]),
                term("hi", &[(0.0, 0.0), (1.0, 1.0)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fuzzify_reports_every_label() {
        let f = two_terms().fuzzify(0.25).unwrap();
        assert_eq!(f.len(), 2);
        assert!((f.get("lo").unwrap() - 0.75).abs() < 1e-15);
        assert!((f.get("hi").unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn marginal_overshoot_is_clamped_and_large_is_rejected() {
        let v = two_terms();
        assert_eq!(v.fuzzify(1.0 + 1e-12).unwrap().get("hi"), Some(1.0));
        assert!(matches!(
            v.fuzzify(1.01),
            Err(FuzzyError::CrispOutOfDomain { .. })
        ));
        assert!(v.fuzzify(f64::NAN).is_err());
    }

    #[test]
    fn gaps_are_rejected() {
        let r = LinguisticVariable::new(
            "x",
            (0.0, 1.0),
            vec![
                term("a", &[(0.0, 1.0), (0.4, 0.0), (1.0, 0.0)]),
                term("b", &[(0.0, 0.0), (0.6, 0.0), (1.0, 1.0)]),
            ],
        );
        assert!(matches!(r, Err(FuzzyError::InvalidVariable { .. })));
    }

    #[test]
    fn terms_must_span_domain() {
        let r = LinguisticVariable::new("x", (0.0, 2.0), vec![term("a", &[(0.0, 1.0), (1.0, 1.0)])]);
        assert!(r.is_err());
    }
}
