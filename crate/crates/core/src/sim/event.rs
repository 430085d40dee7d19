use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dispute::{Feedback, Report};

/// Kinds in tie-break order: at equal times, lower ranks run first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Announce,
    Relay,
    Report,
    ClarifierQuery,
    Feedback,
    VerdictDue,
    RewardDelivery,
    PunishmentDelivery,
    TraceSample,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Announce { schedule_index: usize },
    /// A copy of announcement `announcement` reaches vehicle `receiver`.
    Relay { announcement: u64, receiver: usize },
    Report { rsu: usize, report: Report },
    ClarifierQuery { rsu: usize, dispute: u64 },
    Feedback { rsu: usize, dispute: u64, feedback: Feedback },
    VerdictDue { rsu: usize, dispute: u64 },
    RewardDelivery { vehicle: usize, amount: f64, dispute: u64 },
    PunishmentDelivery { vehicle: usize, amount: f64, dispute: u64 },
    TraceSample,
}

impl Payload {
    pub fn kind(&self) -> EventKind {
        match self {
            Payload::Announce { .. } => EventKind::Announce,
            Payload::Relay { .. } => EventKind::Relay,
            Payload::Report { .. } => EventKind::Report,
            Payload::ClarifierQuery { .. } => EventKind::ClarifierQuery,
            Payload::Feedback { .. } => EventKind::Feedback,
            Payload::VerdictDue { .. } => EventKind::VerdictDue,
            Payload::RewardDelivery { .. } => EventKind::RewardDelivery,
            Payload::PunishmentDelivery { .. } => EventKind::PunishmentDelivery,
            Payload::TraceSample => EventKind::TraceSample,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub seq: u64,
    pub payload: Payload,
}

impl SimEvent {
    fn key(&self) -> (f64, EventKind, u64) {
        (self.time, self.payload.kind(), self.seq)
    }
}

impl Eq for SimEvent {}

impl Ord for SimEvent {
    /// Reversed so that `BinaryHeap` pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        let (ta, ka, sa) = self.key();
        let (tb, kb, sb) = other.key();
        tb.total_cmp(&ta).then(kb.cmp(&ka)).then(sb.cmp(&sa))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Time-ordered queue with a total, deterministic tie-break on
/// (time, kind, insertion order).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<SimEvent>,
    next_seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: f64, payload: Payload) {
        debug_assert!(time.is_finite());
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(SimEvent { time, seq, payload });
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
