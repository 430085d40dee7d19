use serde::{Deserialize, Serialize};

use crate::behaviour::{BehaviourProfile, ProfileOverride, StateRanges};
use crate::dispute::{AssessmentMode, DisputePolicy, SeverityTable};
use crate::trust::{AnnouncementRewardParams, CLARIFIER_REWARD_MAX, TRUST_MAX, TRUST_MIN};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid simulation config: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrustDistribution {
    Uniform { lo: f64, hi: f64 },
    Fixed { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialTrust {
    pub driver: usize,
    pub trust: f64,
}

/// How clarifiers form their opinion of a disputed announcement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClarifierModel {
    /// Per-state feedback table of the behaviour profile.
    Table,
    /// Clarifiers report what they saw, correctly with this probability.
    Witness { accuracy: f64 },
}

/// Trust sources besides the RSU verdicts. All default off, so only RSU
/// judgements move trust.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrustSources {
    pub rsu_judgement: bool,
    pub announcement_reward: bool,
    pub announcement_params: AnnouncementRewardParams,
    /// Amount given to clarifiers whose answer matched the verdict; 0 disables.
    pub clarifier_reward: f64,
    /// Amount given per relayed announcement; 0 disables.
    pub relay_reward: f64,
    /// Amount given per trace tick to drivers in RSU range; 0 disables.
    pub beacon_reward: f64,
}

impl Default for TrustSources {
    fn default() -> Self {
        Self {
            rsu_judgement: true,
            announcement_reward: false,
            announcement_params: AnnouncementRewardParams::default(),
            clarifier_reward: 0.0,
            relay_reward: 0.0,
            beacon_reward: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub name: String,
    pub first_at_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverOverride {
    pub driver: usize,
    #[serde(default)]
    pub profile: ProfileOverride,
    /// This many of the driver's first announcements are malicious
    /// regardless of the profile.
    #[serde(default)]
    pub malicious_first: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub duration_s: f64,
    pub warmup_s: f64,
    pub announcement_interval_s: f64,
    /// No announcement starts after this time.
    pub announcement_stop_s: f64,
    pub vehicles: usize,
    pub rsus: usize,
    pub tas: usize,
    pub officials: Vec<usize>,
    pub road_length_m: f64,
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub comm_range_m: f64,
    pub latency_s: f64,
    pub loss_probability: f64,
    pub relay_enabled: bool,
    pub witness_radius_m: f64,
    pub query_interval_s: f64,
    pub delivery_retry_s: f64,
    pub trace_cadence_s: f64,
    pub mode: AssessmentMode,
    pub seed: u64,
    pub initial_trust: TrustDistribution,
    pub initial_overrides: Vec<InitialTrust>,
    pub sources: TrustSources,
    pub dispute: DisputePolicy,
    pub ledger_window: usize,
    /// Highest severity a driver with limited generation ability may announce.
    pub limited_cutoff: u8,
    pub sender: usize,
    pub reporters: Vec<usize>,
    pub schedule: Vec<ScheduledEvent>,
    pub clarifiers: ClarifierModel,
    pub states: StateRanges,
    pub behaviour: BehaviourProfile,
    pub driver_overrides: Vec<DriverOverride>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration_s: 5000.0,
            warmup_s: 500.0,
            announcement_interval_s: 1000.0,
            announcement_stop_s: 4400.0,
            vehicles: 100,
            rsus: 12,
            tas: 1,
            officials: Vec::new(),
            road_length_m: 3000.0,
            speed_min_mps: 10.0,
            speed_max_mps: 15.0,
            comm_range_m: 300.0,
            latency_s: 0.1,
            loss_probability: 0.0,
            relay_enabled: true,
            witness_radius_m: 50.0,
            query_interval_s: 1.0,
            delivery_retry_s: 1.0,
            trace_cadence_s: 10.0,
            mode: AssessmentMode::Fuzzy,
            seed: 1,
            initial_trust: TrustDistribution::Uniform { lo: 0.5, hi: 0.6 },
            initial_overrides: Vec::new(),
            sources: TrustSources::default(),
            dispute: DisputePolicy::default(),
            ledger_window: 10,
            limited_cutoff: 5,
            sender: 0,
            reporters: (1..=5).collect(),
            schedule: default_schedule(),
            clarifiers: ClarifierModel::Table,
            states: StateRanges::default(),
            behaviour: BehaviourProfile::default(),
            driver_overrides: Vec::new(),
        }
    }
}

pub fn default_schedule() -> Vec<ScheduledEvent> {
    [
        ("Accident", 500.0),
        ("Debris", 700.0),
        ("Road Defect", 900.0),
        ("Traffic Element", 1100.0),
        ("Fallen Tree", 1300.0),
    ]
    .into_iter()
    .map(|(n, t)| ScheduledEvent {
        name: n.into(),
        first_at_s: t,
    })
    .collect()
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(s).map_err(|e| ConfigError(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sim config serializes")
    }

    /// Announcement times in order: each event type recurs every interval
    /// from its first occurrence, within [warmup, stop].
    pub fn announcement_times(&self) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        for (i, ev) in self.schedule.iter().enumerate() {
            let mut k = 0u32;
            loop {
                let t = ev.first_at_s + k as f64 * self.announcement_interval_s;
                if t > self.announcement_stop_s || t > self.duration_s {
                    break;
                }
                if t >= self.warmup_s {
                    out.push((t, i));
                }
                k += 1;
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        let positive = [
            ("duration_s", self.duration_s),
            ("announcement_interval_s", self.announcement_interval_s),
            ("road_length_m", self.road_length_m),
            ("comm_range_m", self.comm_range_m),
            ("query_interval_s", self.query_interval_s),
            ("delivery_retry_s", self.delivery_retry_s),
            ("trace_cadence_s", self.trace_cadence_s),
            ("dispute.collaboration_timer_s", self.dispute.collaboration_timer_s),
        ];
        for (n, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return err(format!("{n} must be positive, got {v}"));
            }
        }
        for (n, v) in [
            ("warmup_s", self.warmup_s),
            ("latency_s", self.latency_s),
            ("witness_radius_m", self.witness_radius_m),
            ("speed_min_mps", self.speed_min_mps),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return err(format!("{n} must be non-negative, got {v}"));
            }
        }
        if self.speed_max_mps < self.speed_min_mps {
            return err("speed_max_mps is below speed_min_mps".into());
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return err("loss_probability must be in [0, 1]".into());
        }
        if self.rsus == 0 {
            return err("at least one RSU is required".into());
        }
        if self.tas != 1 {
            return err(format!("exactly one TA is modelled, got {}", self.tas));
        }
        if self.ledger_window == 0 {
            return err("ledger_window must be positive".into());
        }
        if self.limited_cutoff > 12 {
            return err("limited_cutoff must be a severity level 0-12".into());
        }
        let mut roles: Vec<usize> = vec![self.sender];
        roles.extend(&self.reporters);
        roles.extend(&self.officials);
        roles.extend(self.initial_overrides.iter().map(|o| o.driver));
        roles.extend(self.driver_overrides.iter().map(|o| o.driver));
        if let Some(&m) = roles.iter().max() {
            if m >= self.vehicles {
                return err(format!("driver {m} referenced but only {} vehicles", self.vehicles));
            }
        }
        if self.reporters.contains(&self.sender) || self.officials.contains(&self.sender) {
            return err("the sender cannot also be a reporter or official".into());
        }
        if self.reporters.iter().any(|r| self.officials.contains(r)) {
            return err("reporters cannot be officials".into());
        }
        let in_range = |t: f64| (TRUST_MIN..=TRUST_MAX).contains(&t);
        match self.initial_trust {
            TrustDistribution::Uniform { lo, hi } if !(in_range(lo) && in_range(hi) && lo <= hi) => {
                return err(format!("initial trust range [{lo}, {hi}] is invalid"));
            }
            TrustDistribution::Fixed { value } if !in_range(value) => {
                return err(format!("initial trust {value} is outside [0.05, 0.9]"));
            }
            _ => {}
        }
        if let Some(o) = self.initial_overrides.iter().find(|o| !in_range(o.trust)) {
            return err(format!("initial trust {} for driver {} is invalid", o.trust, o.driver));
        }
        if let ClarifierModel::Witness { accuracy } = self.clarifiers {
            if !(0.0..=1.0).contains(&accuracy) {
                return err("clarifier accuracy must be in [0, 1]".into());
            }
        }
        let s = &self.sources;
        for (n, v) in [
            ("clarifier_reward", s.clarifier_reward),
            ("relay_reward", s.relay_reward),
            ("beacon_reward", s.beacon_reward),
        ] {
            if !(0.0..=CLARIFIER_REWARD_MAX).contains(&v) {
                return err(format!("sources.{n} must be in [0, 0.8], got {v}"));
            }
        }
        self.states
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        self.behaviour
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        for o in &self.driver_overrides {
            self.behaviour
                .with_override(&o.profile)
                .validate()
                .map_err(|e| ConfigError(format!("driver {}: {e}", o.driver)))?;
        }
        let table = SeverityTable::default();
        for ev in &self.schedule {
            table
                .severity_of(&ev.name)
                .map_err(|e| ConfigError(e.to_string()))?;
        }
        Ok(())
    }
}
