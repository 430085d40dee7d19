//! RSU arbitration of sender-versus-reporter disputes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::fuzzy::{AssessmentKind, Assessor, FuzzyError};
use crate::trust::{compute_dpb, DisputeLedger, Outcome, FIXED_ASSESSMENT};

pub const COLLABORATION_TIMER_S: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DisputeError {
    #[error("a dispute for this announcement and reporter is already open")]
    DuplicateDispute,
    #[error("announcement {0} was never seen by this RSU")]
    UnknownAnnouncement(u64),
    #[error("dispute {0} is closed")]
    DisputeClosed(u64),
    #[error("feedback at {now} s arrived after the deadline {deadline} s")]
    LateFeedback { now: f64, deadline: f64 },
    #[error("dispute has no feedback")]
    NoFeedback,
    #[error("unknown incident {0:?}")]
    UnknownIncident(String),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// The known incident types and their severity levels.
#[derive(Debug, Clone)]
pub struct SeverityTable {
    rows: Vec<(&'static str, u8)>,
    aliases: Vec<(&'static str, u8)>,
}

impl Default for SeverityTable {
    fn default() -> Self {
        Self {
            rows: vec![
                ("Road Clear", 0),
                ("Debris or Road Spillage (Oil or Muds or Sands)", 1),
                ("Illegal Waste Dumping", 2),
                ("Poor Conditioned Road", 3),
                ("Minor Road Defect (Faded Sign) or Malfunctioning Traffic Element", 4),
                ("Stranded or Abandoned Vehicle or Obstacle or No Obstacle", 5),
                ("Major Road Defect (Pothole, Illegal Sign)", 6),
                ("Diversion or Road Maintenance", 7),
                (
                    "Severe Weather (Snowy Road or Poor Visibility Due to Fog etc) or Environmental Incident",
                    8,
                ),
                ("Flood or Fallen Tree on Road", 9),
                ("Congestion", 10),
                ("Traffic jam", 11),
                ("Accident", 12),
            ],
            aliases: vec![
                ("Debris", 1),
                ("Road Spillage", 1),
                ("Minor Road Defect", 4),
                ("Traffic Element", 4),
                ("Malfunctioning Traffic Element", 4),
                ("Stranded Vehicle", 5),
                ("Abandoned Vehicle", 5),
                ("Obstacle", 5),
                ("Road Defect", 6),
                ("Major Road Defect", 6),
                ("Pothole", 6),
                ("Diversion", 7),
                ("Road Maintenance", 7),
                ("Severe Weather", 8),
                ("Environmental Incident", 8),
                ("Flood", 9),
                ("Fallen Tree", 9),
                ("Tree on Road", 9),
            ],
        }
    }
}

impl SeverityTable {
    pub fn rows(&self) -> &[(&'static str, u8)] {
        &self.rows
    }

    /// Case-insensitive match on the full incident name or a short alias.
    pub fn severity_of(&self, name: &str) -> Result<u8, DisputeError> {
        let key = name.trim();
        self.rows
            .iter()
            .chain(&self.aliases)
            .find(|(n, _)| n.eq_ignore_ascii_case(key))
            .map(|&(_, s)| s)
            .ok_or_else(|| DisputeError::UnknownIncident(name.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Sender,
    Reporter,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Sender => Party::Reporter,
            Party::Reporter => Party::Sender,
        }
    }
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Party::Sender => "sender",
            Party::Reporter => "reporter",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessmentMode {
    Fixed,
    Fuzzy,
}

impl std::fmt::Display for AssessmentMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AssessmentMode::Fixed => "fixed",
            AssessmentMode::Fuzzy => "fuzzy",
        })
    }
}

impl std::str::FromStr for AssessmentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(AssessmentMode::Fixed),
            "fuzzy" => Ok(AssessmentMode::Fuzzy),
            other => Err(format!("unknown mode {other:?} (expected fixed or fuzzy)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceRule {
    Count,
    Weighted,
}

/// Which RSU confidence feeds the loser's punishment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PunishmentConfidence {
    Winner,
    Loser,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisputePolicy {
    pub collaboration_timer_s: f64,
    pub tie_winner: Party,
    pub confidence: ConfidenceRule,
    pub punishment_confidence: PunishmentConfidence,
}

impl Default for DisputePolicy {
    fn default() -> Self {
        Self {
            collaboration_timer_s: COLLABORATION_TIMER_S,
            tie_winner: Party::Sender,
            confidence: ConfidenceRule::Count,
            punishment_confidence: PunishmentConfidence::Winner,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRef {
    pub name: String,
    pub severity: u8,
    pub location_m: f64,
    pub time_s: f64,
}

/// An untrue-attack report as it reaches an RSU.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub announcement_id: u64,
    pub event: EventRef,
    pub sender: usize,
    pub reporter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feedback {
    pub clarifier: usize,
    pub supports_sender: bool,
    pub weight: f64,
    pub official: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DisputeStatus {
    Open,
    Decided(Party),
    Dismissed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispute {
    pub id: u64,
    pub announcement_id: u64,
    pub event: EventRef,
    pub sender: usize,
    pub reporter: usize,
    pub opened_at: f64,
    pub deadline: f64,
    pub feedback: Vec<Feedback>,
    pub status: DisputeStatus,
}

impl Dispute {
    pub fn is_open(&self) -> bool {
        self.status == DisputeStatus::Open
    }

    pub fn party_id(&self, p: Party) -> usize {
        match p {
            Party::Sender => self.sender,
            Party::Reporter => self.reporter,
        }
    }

    pub fn has_answer_from(&self, clarifier: usize) -> bool {
        self.feedback.iter().any(|f| f.clarifier == clarifier)
    }
}

/// Appends feedback. Official feedback settles the dispute at once; the
/// returned party is the winner when that happens.
pub fn add_feedback(d: &mut Dispute, f: Feedback, now: f64) -> Result<Option<Party>, DisputeError> {
    if !d.is_open() {
        return Err(DisputeError::DisputeClosed(d.id));
    }
    if now > d.deadline {
        return Err(DisputeError::LateFeedback {
            now,
            deadline: d.deadline,
        });
    }
    d.feedback.push(f);
    if f.official {
        let w = if f.supports_sender { Party::Sender } else { Party::Reporter };
        d.status = DisputeStatus::Decided(w);
        return Ok(Some(w));
    }
    Ok(None)
}

/// Weighted-sum verdict. `None` means there was no feedback and the dispute
/// is dismissed.
pub fn decide(d: &Dispute, policy: &DisputePolicy) -> Option<Party> {
    if let Some(f) = d.feedback.iter().find(|f| f.official) {
        return Some(if f.supports_sender { Party::Sender } else { Party::Reporter });
    }
    if d.feedback.is_empty() {
        return None;
    }
    let (mut pro, mut con) = (0.0, 0.0);
    for f in &d.feedback {
        if f.supports_sender {
            pro += f.weight;
        } else {
            con += f.weight;
        }
    }
    Some(if pro > con {
        Party::Sender
    } else if con > pro {
        Party::Reporter
    } else {
        policy.tie_winner
    })
}

/// Share of feedback supporting `party`, by count or by clarifier trust.
pub fn confidence(d: &Dispute, party: Party, rule: ConfidenceRule) -> Result<f64, DisputeError> {
    if d.feedback.is_empty() {
        return Err(DisputeError::NoFeedback);
    }
    let w = |f: &Feedback| match rule {
        ConfidenceRule::Count => 1.0,
        ConfidenceRule::Weighted => f.weight,
    };
    let total: f64 = d.feedback.iter().map(w).sum();
    let pro: f64 = d.feedback.iter().filter(|f| f.supports_sender).map(w).sum();
    let c = pro / total;
    Ok(match party {
        Party::Sender => c,
        Party::Reporter => 1.0 - c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub dispute_id: u64,
    pub decided_at: f64,
    pub event: String,
    pub severity: u8,
    pub winner: Party,
    pub winner_id: usize,
    pub loser_id: usize,
    pub confidence_sender: f64,
    pub confidence_reporter: f64,
    pub dpb_winner: f64,
    pub dpb_loser: f64,
    pub reward_amount: f64,
    pub punishment_amount: f64,
    pub mode: AssessmentMode,
}

/// Central store of dispute ledgers and decided incidents.
#[derive(Debug, Clone)]
pub struct TrustAuthority {
    ledgers: Vec<DisputeLedger>,
    incidents: Vec<Verdict>,
}

impl TrustAuthority {
    pub fn new(drivers: usize, window: usize) -> Self {
        Self {
            ledgers: vec![DisputeLedger::new(window); drivers],
            incidents: Vec::new(),
        }
    }

    pub fn ledger(&self, driver: usize) -> &DisputeLedger {
        &self.ledgers[driver]
    }

    pub fn dpb(&self, driver: usize) -> f64 {
        compute_dpb(&self.ledgers[driver])
    }

    pub fn record(&mut self, v: &Verdict) {
        self.ledgers[v.winner_id].push(Outcome::Reward);
        self.ledgers[v.loser_id].push(Outcome::Punishment);
        self.incidents.push(v.clone());
    }

    pub fn incidents(&self) -> &[Verdict] {
        &self.incidents
    }
}

/// Computes the reward and punishment for a decided dispute and records the
/// outcomes with the TA. DPB is read before the new outcomes are added.
pub fn assess_outcome(
    winner: Party,
    d: &Dispute,
    mode: AssessmentMode,
    ta: &mut TrustAuthority,
    assessor: &dyn Assessor,
    policy: &DisputePolicy,
    now: f64,
) -> Result<Verdict, DisputeError> {
    let conf_sender = confidence(d, Party::Sender, policy.confidence)?;
    let conf = |p: Party| match p {
        Party::Sender => conf_sender,
        Party::Reporter => 1.0 - conf_sender,
    };
    let winner_id = d.party_id(winner);
    let loser_id = d.party_id(winner.other());
    let dpb_winner = ta.dpb(winner_id);
    let dpb_loser = ta.dpb(loser_id);
    let (reward, punishment) = match mode {
        AssessmentMode::Fixed => (FIXED_ASSESSMENT, FIXED_ASSESSMENT),
        AssessmentMode::Fuzzy => {
            let pc = match policy.punishment_confidence {
                PunishmentConfidence::Winner => conf(winner),
                PunishmentConfidence::Loser => conf(winner.other()),
            };
            (
                assessor.assess(dpb_winner, d.event.severity, conf(winner), AssessmentKind::Reward)?,
                assessor.assess(dpb_loser, d.event.severity, pc, AssessmentKind::Punishment)?,
            )
        }
    };
    let v = Verdict {
        dispute_id: d.id,
        decided_at: now,
        event: d.event.name.clone(),
        severity: d.event.severity,
        winner,
        winner_id,
        loser_id,
        confidence_sender: conf_sender,
        confidence_reporter: 1.0 - conf_sender,
        dpb_winner,
        dpb_loser,
        reward_amount: reward,
        punishment_amount: punishment,
        mode,
    };
    ta.record(&v);
    Ok(v)
}

/// One RSU's view: announcements it knows about and its disputes.
#[derive(Debug, Clone, Default)]
pub struct DisputeDesk {
    seen: BTreeSet<u64>,
    disputes: BTreeMap<u64, Dispute>,
    open_keys: BTreeSet<(u64, usize, usize)>,
}

impl DisputeDesk {
    pub fn observe(&mut self, announcement_id: u64) {
        self.seen.insert(announcement_id);
    }

    pub fn has_seen(&self, announcement_id: u64) -> bool {
        self.seen.contains(&announcement_id)
    }

    pub fn open_dispute(
        &mut self,
        id: u64,
        report: Report,
        now: f64,
        policy: &DisputePolicy,
    ) -> Result<&Dispute, DisputeError> {
        if !self.seen.contains(&report.announcement_id) {
            return Err(DisputeError::UnknownAnnouncement(report.announcement_id));
        }
        let key = (report.announcement_id, report.sender, report.reporter);
        if !self.open_keys.insert(key) {
            return Err(DisputeError::DuplicateDispute);
        }
        let d = Dispute {
            id,
            announcement_id: report.announcement_id,
            event: report.event,
            sender: report.sender,
            reporter: report.reporter,
            opened_at: now,
            deadline: now + policy.collaboration_timer_s,
            feedback: Vec::new(),
            status: DisputeStatus::Open,
        };
        Ok(self.disputes.entry(id).or_insert(d))
    }

    pub fn get(&self, id: u64) -> Option<&Dispute> {
        self.disputes.get(&id)
    }

    pub fn get_mut(&mut self, id: u64) -> Option<&mut Dispute> {
        self.disputes.get_mut(&id)
    }

    /// Marks a dispute closed and frees its duplicate key.
    pub fn close(&mut self, id: u64, status: DisputeStatus) {
        if let Some(d) = self.disputes.get_mut(&id) {
            d.status = status;
            self.open_keys.remove(&(d.announcement_id, d.sender, d.reporter));
        }
    }

    pub fn disputes(&self) -> impl Iterator<Item = &Dispute> {
        self.disputes.values()
    }
}
