//! Six-state Markov model of driver honesty.
//!
//! A driver's state is a pure function of its trust; each state carries the
//! probabilities of lying when announcing, of sending an untrue report, and
//! of giving positive feedback as a clarifier.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::trust::{TrustScore, TRUST_MAX, TRUST_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BehaviourState {
    AccessBlocked,
    VeryBad,
    Bad,
    Normal,
    Good,
    VeryGood,
}

impl BehaviourState {
    /// Non-blocked states from best to worst; the row order of the tables.
    pub const ACTIVE: [BehaviourState; 5] = [
        BehaviourState::VeryGood,
        BehaviourState::Good,
        BehaviourState::Normal,
        BehaviourState::Bad,
        BehaviourState::VeryBad,
    ];

    pub const ALL: [BehaviourState; 6] = [
        BehaviourState::VeryGood,
        BehaviourState::Good,
        BehaviourState::Normal,
        BehaviourState::Bad,
        BehaviourState::VeryBad,
        BehaviourState::AccessBlocked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BehaviourState::AccessBlocked => "access-blocked",
            BehaviourState::VeryBad => "very-bad",
            BehaviourState::Bad => "bad",
            BehaviourState::Normal => "normal",
            BehaviourState::Good => "good",
            BehaviourState::VeryGood => "very-good",
        }
    }

    /// Row index into per-state arrays, `None` for the blocked state.
    fn row(self) -> Option<usize> {
        Self::ACTIVE.iter().position(|&s| s == self)
    }
}

impl std::fmt::Display for BehaviourState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Upper trust bound of each state. Lower bounds are the previous state's
/// upper bound (exclusive); blocked is exactly the trust floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRanges {
    pub very_bad: f64,
    pub bad: f64,
    pub normal: f64,
    pub good: f64,
}

impl Default for StateRanges {
    fn default() -> Self {
        Self {
            very_bad: 0.2,
            bad: 0.4,
            normal: 0.6,
            good: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BehaviourError {
    #[error("state bounds must increase strictly inside (0.05, 0.9)")]
    BadRanges,
    #[error("{table} row {state}: {reason}")]
    BadProbability {
        table: &'static str,
        state: &'static str,
        reason: String,
    },
}

impl StateRanges {
    pub fn validate(&self) -> Result<(), BehaviourError> {
        let b = [TRUST_MIN, self.very_bad, self.bad, self.normal, self.good, TRUST_MAX];
        if b.windows(2).all(|w| w[0] < w[1]) {
            Ok(())
        } else {
            Err(BehaviourError::BadRanges)
        }
    }

    /// Closed-open description `(lo, hi]` of a state's trust range.
    pub fn range(&self, s: BehaviourState) -> (f64, f64) {
        match s {
            BehaviourState::AccessBlocked => (TRUST_MIN, TRUST_MIN),
            BehaviourState::VeryBad => (TRUST_MIN, self.very_bad),
            BehaviourState::Bad => (self.very_bad, self.bad),
            BehaviourState::Normal => (self.bad, self.normal),
            BehaviourState::Good => (self.normal, self.good),
            BehaviourState::VeryGood => (self.good, TRUST_MAX),
        }
    }

    pub fn state_for(&self, t: TrustScore) -> BehaviourState {
        let v = t.value();
        if v <= TRUST_MIN {
            BehaviourState::AccessBlocked
        } else if v <= self.very_bad {
            BehaviourState::VeryBad
        } else if v <= self.bad {
            BehaviourState::Bad
        } else if v <= self.normal {
            BehaviourState::Normal
        } else if v <= self.good {
            BehaviourState::Good
        } else {
            BehaviourState::VeryGood
        }
    }
}

/// Per-state probability tables, rows ordered very-good .. very-bad. A
/// blocked driver has all-zero rows and never acts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviourProfile {
    pub p_truthful_announce: [f64; 5],
    pub p_malicious_announce: [f64; 5],
    pub p_report_untrue: [f64; 5],
    pub p_not_report: [f64; 5],
    pub p_feedback_positive: [f64; 5],
    pub p_feedback_negative: [f64; 5],
}

impl Default for BehaviourProfile {
    fn default() -> Self {
        Self {
            p_truthful_announce: [0.8, 0.6, 0.4, 0.2, 0.1],
            p_malicious_announce: [0.2, 0.4, 0.6, 0.8, 0.9],
            p_report_untrue: [0.1, 0.3, 0.5, 0.7, 0.9],
            p_not_report: [0.9, 0.7, 0.5, 0.3, 0.1],
            p_feedback_positive: [0.8, 0.6, 0.4, 0.2, 0.1],
            p_feedback_negative: [0.2, 0.4, 0.6, 0.8, 0.9],
        }
    }
}

/// Optional replacements for single columns of a driver's profile. Each
/// entry gives the "active" probability per state; the complement is
/// derived.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileOverride {
    pub p_malicious_announce: Option<[f64; 5]>,
    pub p_report_untrue: Option<[f64; 5]>,
    pub p_feedback_positive: Option<[f64; 5]>,
}

fn complement(p: [f64; 5]) -> [f64; 5] {
    p.map(|x| 1.0 - x)
}

impl BehaviourProfile {
    pub fn with_override(&self, o: &ProfileOverride) -> Self {
        let mut p = self.clone();
        if let Some(m) = o.p_malicious_announce {
            p.p_malicious_announce = m;
            p.p_truthful_announce = complement(m);
        }
        if let Some(r) = o.p_report_untrue {
            p.p_report_untrue = r;
            p.p_not_report = complement(r);
        }
        if let Some(f) = o.p_feedback_positive {
            p.p_feedback_positive = f;
            p.p_feedback_negative = complement(f);
        }
        p
    }

    /// Checks that every pair sums to one and every entry is a probability.
    pub fn validate(&self) -> Result<(), BehaviourError> {
        let pairs: [(&'static str, &[f64; 5], &[f64; 5]); 3] = [
            ("announcement", &self.p_truthful_announce, &self.p_malicious_announce),
            ("report", &self.p_report_untrue, &self.p_not_report),
            ("feedback", &self.p_feedback_positive, &self.p_feedback_negative),
        ];
        for (table, a, b) in pairs {
            for (i, s) in BehaviourState::ACTIVE.iter().enumerate() {
                let bad = |reason: String| BehaviourError::BadProbability {
                    table,
                    state: s.name(),
                    reason,
                };
                if !(0.0..=1.0).contains(&a[i]) || !(0.0..=1.0).contains(&b[i]) {
                    return Err(bad(format!("{} / {} not in [0, 1]", a[i], b[i])));
                }
                if (a[i] + b[i] - 1.0).abs() > 1e-9 {
                    return Err(bad(format!("{} + {} != 1", a[i], b[i])));
                }
            }
        }
        Ok(())
    }

    pub fn p_malicious(&self, s: BehaviourState) -> f64 {
        s.row().map_or(0.0, |i| self.p_malicious_announce[i])
    }

    pub fn p_truthful(&self, s: BehaviourState) -> f64 {
        s.row().map_or(0.0, |i| self.p_truthful_announce[i])
    }

    pub fn p_report(&self, s: BehaviourState) -> f64 {
        s.row().map_or(0.0, |i| self.p_report_untrue[i])
    }

    pub fn p_positive(&self, s: BehaviourState) -> f64 {
        s.row().map_or(0.0, |i| self.p_feedback_positive[i])
    }

    pub fn p_negative(&self, s: BehaviourState) -> f64 {
        s.row().map_or(0.0, |i| self.p_feedback_negative[i])
    }
}

/// Deterministic per-driver random source.
#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    /// Stream `stream` of the generator seeded by `seed`. Streams of one
    /// seed never overlap, so adding drivers does not disturb the others.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.0.random_range(lo..hi)
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Announcement {
    Truthful,
    Malicious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportDecision {
    Report,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackOpinion {
    Positive,
    Negative,
}

/// True iff a fresh uniform draw falls below `p`.
fn draw(rng: &mut RandomStream, p: f64) -> bool {
    rng.uniform() < p
}

pub fn sample_announcement(
    profile: &BehaviourProfile,
    s: BehaviourState,
    rng: &mut RandomStream,
) -> Option<Announcement> {
    if s == BehaviourState::AccessBlocked {
        return None;
    }
    Some(if draw(rng, profile.p_malicious(s)) {
        Announcement::Malicious
    } else {
        Announcement::Truthful
    })
}

pub fn sample_report_decision(
    profile: &BehaviourProfile,
    s: BehaviourState,
    rng: &mut RandomStream,
) -> ReportDecision {
    if s == BehaviourState::AccessBlocked {
        return ReportDecision::Ignore;
    }
    if draw(rng, profile.p_report(s)) {
        ReportDecision::Report
    } else {
        ReportDecision::Ignore
    }
}

/// A clarifier's answer. `None` for blocked drivers, who do not clarify.
pub fn sample_feedback(
    profile: &BehaviourProfile,
    s: BehaviourState,
    witnessed_event: bool,
    rng: &mut RandomStream,
) -> Option<FeedbackOpinion> {
    if s == BehaviourState::AccessBlocked {
        return None;
    }
    Some(if witnessed_event {
        if draw(rng, profile.p_positive(s)) {
            FeedbackOpinion::Positive
        } else {
            FeedbackOpinion::Negative
        }
    } else if draw(rng, profile.p_negative(s)) {
        FeedbackOpinion::Negative
    } else {
        FeedbackOpinion::Positive
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub from: BehaviourState,
    pub to: BehaviourState,
}

/// State after a trust update, and the transition if the state changed.
pub fn transition(
    ranges: &StateRanges,
    current: BehaviourState,
    updated: TrustScore,
) -> (BehaviourState, Option<Transition>) {
    let next = ranges.state_for(updated);
    let t = (next != current).then_some(Transition { from: current, to: next });
    (next, t)
}
