//! Trust scores, access thresholds and the TA dispute ledger.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub const TRUST_MIN: f64 = 0.05;
pub const TRUST_MAX: f64 = 0.9;
pub const OFFICIAL_TRUST: f64 = 1.0;
pub const RELAY_THRESHOLD: f64 = 0.25;
pub const GENERATION_THRESHOLD: f64 = 0.5;
pub const HIGH_TRUST_THRESHOLD: f64 = 0.8;
/// Fixed-scheme RSU reward and punishment.
pub const FIXED_ASSESSMENT: f64 = 0.1;
pub const MAX_SINGLE_REWARD: f64 = 0.8;
pub const CLARIFIER_REWARD_MAX: f64 = 0.8;
pub const RELAY_REWARD: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrustError {
    #[error("trust value {0} is not finite")]
    NonFiniteInput(f64),
    #[error("trust value {0} is outside [0.05, 0.9]")]
    OutOfRange(f64),
}

/// A regular driver's trust, always inside [0.05, 0.9], or an official
/// vehicle's fixed 1.0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TrustScore(f64);

impl TrustScore {
    pub const OFFICIAL: TrustScore = TrustScore(OFFICIAL_TRUST);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_official(self) -> bool {
        self.0 == OFFICIAL_TRUST
    }
}

impl std::fmt::Display for TrustScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

pub fn clamp_trust(t: f64) -> Result<TrustScore, TrustError> {
    if !t.is_finite() {
        return Err(TrustError::NonFiniteInput(t));
    }
    Ok(TrustScore(t.clamp(TRUST_MIN, TRUST_MAX)))
}

pub fn is_blacklisted(t: TrustScore) -> bool {
    t.0 <= TRUST_MIN
}

pub fn relaying_ability(t: TrustScore) -> bool {
    t.0 >= RELAY_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationAbility {
    Limited,
    All,
}

pub fn generation_ability(t: TrustScore) -> GenerationAbility {
    if t.0 >= GENERATION_THRESHOLD {
        GenerationAbility::All
    } else {
        GenerationAbility::Limited
    }
}

/// Whether a driver may originate a message about an event of the given
/// severity. Limited drivers may only speak about events at or below
/// `limited_cutoff`; blacklisted drivers may not speak at all.
pub fn may_originate(t: TrustScore, severity: u8, limited_cutoff: u8) -> bool {
    if is_blacklisted(t) {
        return false;
    }
    match generation_ability(t) {
        GenerationAbility::All => true,
        GenerationAbility::Limited => severity <= limited_cutoff,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrustCategory {
    AccessBlocked,
    NotTrusted,
    LowlyTrusted,
    Trusted,
    HighlyTrusted,
}

/// Category of a regular driver's trust. Exactly 0.8 sits between the
/// half-open "trusted" and "highly trusted" bands and is treated as trusted.
pub fn categorize(t: f64) -> Result<TrustCategory, TrustError> {
    if !(TRUST_MIN..=TRUST_MAX).contains(&t) {
        return Err(TrustError::OutOfRange(t));
    }
    Ok(if t <= TRUST_MIN {
        TrustCategory::AccessBlocked
    } else if t <= RELAY_THRESHOLD {
        TrustCategory::NotTrusted
    } else if t < GENERATION_THRESHOLD {
        TrustCategory::LowlyTrusted
    } else if t <= HIGH_TRUST_THRESHOLD {
        TrustCategory::Trusted
    } else {
        TrustCategory::HighlyTrusted
    })
}

/// Adds an assessment to a trust score. Official trust never moves.
pub fn apply_assessment(t: TrustScore, delta: f64) -> TrustScore {
    if t.is_official() {
        return t;
    }
    debug_assert!(delta.abs() <= MAX_SINGLE_REWARD + 1e-12, "delta {delta}");
    clamp_trust(t.0 + delta).unwrap_or(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Reward,
    Punishment,
}

pub const DEFAULT_LEDGER_WINDOW: usize = 10;

/// The most recent dispute outcomes of one driver.
#[derive(Debug, Clone, PartialEq)]
pub struct DisputeLedger {
    window: usize,
    records: VecDeque<Outcome>,
}

impl Default for DisputeLedger {
    fn default() -> Self {
        Self::new(DEFAULT_LEDGER_WINDOW)
    }
}

impl DisputeLedger {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "ledger window must be positive");
        Self {
            window,
            records: VecDeque::with_capacity(window),
        }
    }

    pub fn push(&mut self, o: Outcome) {
        if self.records.len() == self.window {
            self.records.pop_front();
        }
        self.records.push_back(o);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Outcome> + '_ {
        self.records.iter().copied()
    }

    pub fn punishments(&self) -> usize {
        self.iter().filter(|&o| o == Outcome::Punishment).count()
    }

    pub fn rewards(&self) -> usize {
        self.len() - self.punishments()
    }
}

/// NoP / (NoP + NoR) over the ledger window, 0 for an empty ledger.
pub fn compute_dpb(ledger: &DisputeLedger) -> f64 {
    if ledger.is_empty() {
        return 0.0;
    }
    ledger.punishments() as f64 / ledger.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnouncementRewardParams {
    pub max: f64,
    pub min: f64,
    pub delay_weight: f64,
    pub distance_weight: f64,
    pub delay_cap_s: f64,
    pub distance_cap_m: f64,
}

impl Default for AnnouncementRewardParams {
    fn default() -> Self {
        Self {
            max: 0.8,
            min: 0.1,
            delay_weight: 0.5,
            distance_weight: 0.5,
            delay_cap_s: 60.0,
            distance_cap_m: 500.0,
        }
    }
}

/// TPD reward for a timely, nearby announcement: a clamped linear blend of
/// the delay and distance penalties mapped onto [min, max].
pub fn announcement_reward(delay_s: f64, distance_m: f64, p: &AnnouncementRewardParams) -> f64 {
    let penalty = p.delay_weight * delay_s.max(0.0) / p.delay_cap_s
        + p.distance_weight * distance_m.max(0.0) / p.distance_cap_m;
    (p.max - (p.max - p.min) * penalty.min(1.0)).clamp(p.min, p.max)
}
