use std::collections::BTreeMap;

use crate::behaviour::{
    sample_announcement, sample_feedback, sample_report_decision, transition, Announcement,
    FeedbackOpinion, ReportDecision,
};
use crate::dispute::{
    add_feedback, assess_outcome, decide, DisputeError, DisputeStatus, EventRef, Feedback, Party,
    Report, SeverityTable, TrustAuthority,
};
use crate::fuzzy::Assessor;
use crate::trust::{
    announcement_reward, apply_assessment, is_blacklisted, may_originate, relaying_ability,
};

use super::config::{ClarifierModel, SimConfig};
use super::event::{EventQueue, Payload};
use super::trace::{AnnouncementRecord, Trace, TraceSample, TransitionRecord, TrustUpdate};
use super::world::World;
use super::SimError;

struct Announced {
    record: AnnouncementRecord,
    received: Vec<bool>,
}

/// Per-dispute bookkeeping the RSU desk does not hold.
struct DisputeMeta {
    asked: Vec<bool>,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    assessor: &'a dyn Assessor,
    world: World,
    ta: TrustAuthority,
    queue: EventQueue,
    severity: SeverityTable,
    announced: Vec<Announced>,
    meta: BTreeMap<u64, DisputeMeta>,
    next_dispute: u64,
    trace: Trace,
}

/// Runs one scenario to `duration_s` and returns everything it recorded.
pub fn run(cfg: &SimConfig, assessor: &dyn Assessor) -> Result<Trace, SimError> {
    cfg.validate()?;
    let world = World::build(cfg);
    let mut e = Engine {
        cfg,
        assessor,
        ta: TrustAuthority::new(cfg.vehicles, cfg.ledger_window),
        queue: EventQueue::default(),
        severity: SeverityTable::default(),
        announced: Vec::new(),
        meta: BTreeMap::new(),
        next_dispute: 0,
        trace: Trace {
            initial_trust: world.vehicles.iter().map(|v| v.trust.value()).collect(),
            ..Default::default()
        },
        world,
    };
    for (t, i) in cfg.announcement_times() {
        e.queue.push(t, Payload::Announce { schedule_index: i });
    }
    let mut k = 0u64;
    loop {
        let t = k as f64 * cfg.trace_cadence_s;
        if t > cfg.duration_s {
            break;
        }
        e.queue.push(t, Payload::TraceSample);
        k += 1;
    }
    while let Some(ev) = e.queue.pop() {
        if ev.time > cfg.duration_s {
            break;
        }
        e.handle(ev.time, ev.payload)?;
    }
    e.trace.final_trust = e.world.vehicles.iter().map(|v| v.trust.value()).collect();
    e.trace.verdicts = e.ta.incidents().to_vec();
    Ok(e.trace)
}

impl Engine<'_> {
    fn handle(&mut self, t: f64, p: Payload) -> Result<(), SimError> {
        match p {
            Payload::Announce { schedule_index } => self.announce(t, schedule_index),
            Payload::Relay {
                announcement,
                receiver,
            } => self.receive(t, announcement, receiver),
            Payload::Report { rsu, report } => self.report(t, rsu, report),
            Payload::ClarifierQuery { rsu, dispute } => self.query(t, rsu, dispute),
            Payload::Feedback {
                rsu,
                dispute,
                feedback,
            } => return self.feedback(t, rsu, dispute, feedback),
            Payload::VerdictDue { rsu, dispute } => return self.finalize(t, rsu, dispute),
            Payload::RewardDelivery {
                vehicle,
                amount,
                dispute,
            } => self.deliver(t, vehicle, amount, dispute),
            Payload::PunishmentDelivery {
                vehicle,
                amount,
                dispute,
            } => self.deliver(t, vehicle, -amount, dispute),
            Payload::TraceSample => self.sample(t),
        }
        Ok(())
    }

    /// Sends a copy of an announcement from `from_m` to every vehicle in
    /// range that has not had one, subject to radio loss.
    fn broadcast(&mut self, t: f64, announcement: u64, from_m: f64, exclude: usize) {
        let near = self.world.vehicles_near(from_m, t, self.cfg.comm_range_m);
        // RSUs forward to each other, so one RSU hearing it is enough.
        if !self.world.rsus_near(from_m).is_empty() {
            for r in &mut self.world.rsus {
                r.desk.observe(announcement);
            }
        }
        let received = &self.announced[announcement as usize].received;
        let targets: Vec<usize> = near
            .into_iter()
            .filter(|&v| v != exclude && !received[v])
            .collect();
        for v in targets {
            if self.cfg.loss_probability > 0.0 && self.world.radio_rng.uniform() < self.cfg.loss_probability {
                continue;
            }
            self.queue.push(
                t + self.cfg.latency_s,
                Payload::Relay {
                    announcement,
                    receiver: v,
                },
            );
        }
    }

    fn announce(&mut self, t: f64, schedule_index: usize) {
        let sched = &self.cfg.schedule[schedule_index];
        let severity = self
            .severity
            .severity_of(&sched.name)
            .expect("schedule validated");
        let s = self.cfg.sender;
        let v = &mut self.world.vehicles[s];
        if !may_originate(v.trust, severity, self.cfg.limited_cutoff) {
            self.trace.counters.suppressed_announcements += 1;
            return;
        }
        let kind = if v.malicious_first > 0 {
            v.malicious_first -= 1;
            Some(Announcement::Malicious)
        } else {
            sample_announcement(&v.profile, v.state, &mut v.rng)
        };
        let Some(kind) = kind else {
            self.trace.counters.suppressed_announcements += 1;
            return;
        };
        let location_m = self.world.position(s, t);
        let id = self.announced.len() as u64;
        let record = AnnouncementRecord {
            id,
            time_s: t,
            sender: s,
            event: sched.name.clone(),
            severity,
            truthful: kind == Announcement::Truthful,
            location_m,
        };
        self.trace.announcements.push(record.clone());
        self.trace.counters.announcements += 1;
        let mut received = vec![false; self.cfg.vehicles];
        received[s] = true;
        self.announced.push(Announced { record, received });
        self.broadcast(t, id, location_m, s);

        if self.cfg.sources.announcement_reward {
            let dist = self
                .world
                .nearest_rsu(location_m)
                .map_or(f64::INFINITY, |r| {
                    self.world.ring_distance(self.world.rsus[r].position_m, location_m)
                });
            let amount = announcement_reward(self.cfg.latency_s, dist, &self.cfg.sources.announcement_params);
            self.apply(t, s, amount, None);
        }
    }

    fn receive(&mut self, t: f64, announcement: u64, v: usize) {
        let a = &mut self.announced[announcement as usize];
        if a.received[v] {
            return;
        }
        a.received[v] = true;
        self.trace.counters.receptions += 1;
        let record = a.record.clone();
        let veh = &mut self.world.vehicles[v];
        if is_blacklisted(veh.trust) {
            return;
        }
        // A reporter decides once, on first reception.
        if self.cfg.reporters.contains(&v)
            && may_originate(veh.trust, record.severity, self.cfg.limited_cutoff)
            && sample_report_decision(&veh.profile, veh.state, &mut veh.rng) == ReportDecision::Report
        {
            self.trace.counters.reports += 1;
            let here = self.world.position(v, t);
            match self.world.nearest_rsu(here) {
                Some(rsu) => self.queue.push(
                    t + self.cfg.latency_s,
                    Payload::Report {
                        rsu,
                        report: Report {
                            announcement_id: announcement,
                            event: EventRef {
                                name: record.event.clone(),
                                severity: record.severity,
                                location_m: record.location_m,
                                time_s: record.time_s,
                            },
                            sender: record.sender,
                            reporter: v,
                        },
                    },
                ),
                None => self.trace.counters.reports_without_rsu += 1,
            }
        }
        let veh = &self.world.vehicles[v];
        if self.cfg.relay_enabled && (veh.official || relaying_ability(veh.trust)) {
            let here = self.world.position(v, t);
            self.broadcast(t, announcement, here, v);
            if self.cfg.sources.relay_reward > 0.0 {
                self.apply(t, v, self.cfg.sources.relay_reward, None);
            }
        }
    }

    fn report(&mut self, t: f64, rsu: usize, report: Report) {
        let id = self.next_dispute;
        let policy = &self.cfg.dispute;
        match self.world.rsus[rsu].desk.open_dispute(id, report, t, policy) {
            Ok(d) => {
                let deadline = d.deadline;
                self.next_dispute += 1;
                self.trace.counters.disputes += 1;
                self.meta.insert(
                    id,
                    DisputeMeta {
                        asked: vec![false; self.cfg.vehicles],
                    },
                );
                self.queue.push(t + self.cfg.query_interval_s, Payload::ClarifierQuery { rsu, dispute: id });
                self.queue.push(deadline, Payload::VerdictDue { rsu, dispute: id });
            }
            Err(DisputeError::UnknownAnnouncement(_) | DisputeError::DuplicateDispute) => {
                self.trace.counters.rejected_reports += 1;
            }
            Err(other) => unreachable!("open_dispute only rejects unknown or duplicate: {other}"),
        }
    }

    /// Asks every eligible vehicle near the event location for its opinion.
    fn query(&mut self, t: f64, rsu: usize, dispute: u64) {
        let Some(d) = self.world.rsus[rsu].desk.get(dispute) else {
            return;
        };
        if !d.is_open() || t > d.deadline {
            return;
        }
        let (sender, reporter, location, deadline) = (d.sender, d.reporter, d.event.location_m, d.deadline);
        let truthful = self.announced[d.announcement_id as usize].record.truthful;
        let near = self
            .world
            .vehicles_near(location, t, self.cfg.witness_radius_m);
        for c in near {
            if c == sender || c == reporter || self.meta[&dispute].asked[c] {
                continue;
            }
            let veh = &mut self.world.vehicles[c];
            if !veh.official && is_blacklisted(veh.trust) {
                continue;
            }
            let supports = if veh.official {
                Some(truthful)
            } else {
                match self.cfg.clarifiers {
                    ClarifierModel::Table => sample_feedback(&veh.profile, veh.state, truthful, &mut veh.rng)
                        .map(|o| o == FeedbackOpinion::Positive),
                    ClarifierModel::Witness { accuracy } => {
                        let correct = veh.rng.uniform() < accuracy;
                        Some(correct == truthful)
                    }
                }
            };
            let Some(supports_sender) = supports else {
                continue;
            };
            self.meta.get_mut(&dispute).expect("meta exists").asked[c] = true;
            let feedback = Feedback {
                clarifier: c,
                supports_sender,
                weight: veh.trust.value(),
                official: veh.official,
            };
            self.queue.push(
                t + self.cfg.latency_s,
                Payload::Feedback {
                    rsu,
                    dispute,
                    feedback,
                },
            );
        }
        let next = t + self.cfg.query_interval_s;
        if next <= deadline {
            self.queue.push(next, Payload::ClarifierQuery { rsu, dispute });
        }
    }

    fn feedback(&mut self, t: f64, rsu: usize, dispute: u64, f: Feedback) -> Result<(), SimError> {
        let Some(d) = self.world.rsus[rsu].desk.get_mut(dispute) else {
            return Ok(());
        };
        match add_feedback(d, f, t) {
            Ok(Some(winner)) => {
                self.trace.counters.feedback += 1;
                self.settle(t, rsu, dispute, winner)
            }
            Ok(None) => {
                self.trace.counters.feedback += 1;
                Ok(())
            }
            Err(DisputeError::LateFeedback { .. } | DisputeError::DisputeClosed(_)) => {
                self.trace.counters.late_feedback += 1;
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    }

    fn finalize(&mut self, t: f64, rsu: usize, dispute: u64) -> Result<(), SimError> {
        let desk = &mut self.world.rsus[rsu].desk;
        let Some(d) = desk.get(dispute) else {
            return Ok(());
        };
        if !d.is_open() {
            return Ok(());
        }
        let Some(winner) = decide(d, &self.cfg.dispute) else {
            desk.close(dispute, DisputeStatus::Dismissed);
            self.trace.counters.dismissed += 1;
            return Ok(());
        };
        self.settle(t, rsu, dispute, winner)
    }

    fn settle(&mut self, t: f64, rsu: usize, dispute: u64, winner: Party) -> Result<(), SimError> {
        let desk = &mut self.world.rsus[rsu].desk;
        let d = desk.get(dispute).expect("dispute exists").clone();
        desk.close(dispute, DisputeStatus::Decided(winner));
        let v = assess_outcome(
            winner,
            &d,
            self.cfg.mode,
            &mut self.ta,
            self.assessor,
            &self.cfg.dispute,
            t,
        )?;
        if self.cfg.sources.rsu_judgement {
            let at = t + self.cfg.latency_s;
            self.queue.push(
                at,
                Payload::RewardDelivery {
                    vehicle: v.winner_id,
                    amount: v.reward_amount,
                    dispute,
                },
            );
            self.queue.push(
                at,
                Payload::PunishmentDelivery {
                    vehicle: v.loser_id,
                    amount: v.punishment_amount,
                    dispute,
                },
            );
        }
        let reward = self.cfg.sources.clarifier_reward;
        if reward > 0.0 {
            let sender_won = winner == Party::Sender;
            for f in d.feedback.iter().filter(|f| f.supports_sender == sender_won) {
                self.apply(t, f.clarifier, reward, None);
            }
        }
        Ok(())
    }

    /// Applies an RSU assessment once the vehicle is in RSU range, retrying
    /// until it is.
    fn deliver(&mut self, t: f64, vehicle: usize, delta: f64, dispute: u64) {
        if !self.world.in_rsu_range(vehicle, t) {
            self.trace.counters.delivery_retries += 1;
            let at = t + self.cfg.delivery_retry_s;
            let p = if delta >= 0.0 {
                Payload::RewardDelivery {
                    vehicle,
                    amount: delta,
                    dispute,
                }
            } else {
                Payload::PunishmentDelivery {
                    vehicle,
                    amount: -delta,
                    dispute,
                }
            };
            self.queue.push(at, p);
            return;
        }
        self.apply(t, vehicle, delta, Some(dispute));
    }

    fn apply(&mut self, t: f64, vehicle: usize, delta: f64, dispute: Option<u64>) {
        let v = &mut self.world.vehicles[vehicle];
        if v.official {
            return;
        }
        let before = v.trust;
        v.trust = apply_assessment(before, delta);
        let (state, tr) = transition(&self.cfg.states, v.state, v.trust);
        v.state = state;
        let after = v.trust.value();
        self.trace.updates.push(TrustUpdate {
            time_s: t,
            vehicle,
            dispute,
            delta,
            before: before.value(),
            after,
        });
        self.trace.samples.push(TraceSample {
            time_s: t,
            vehicle,
            trust: after,
        });
        if let Some(tr) = tr {
            self.trace.transitions.push(TransitionRecord {
                time_s: t,
                vehicle,
                from: tr.from,
                to: tr.to,
                trust: after,
            });
        }
    }

    fn sample(&mut self, t: f64) {
        let beacon = self.cfg.sources.beacon_reward;
        if beacon > 0.0 && t > 0.0 {
            for i in 0..self.world.vehicles.len() {
                let v = &self.world.vehicles[i];
                if !v.official && !is_blacklisted(v.trust) && self.world.in_rsu_range(i, t) {
                    self.apply(t, i, beacon, None);
                }
            }
        }
        for v in &self.world.vehicles {
            self.trace.samples.push(TraceSample {
                time_s: t,
                vehicle: v.id,
                trust: v.trust.value(),
            });
        }
    }
}
