use std::io::{self, Write};

use serde::Serialize;

use crate::behaviour::BehaviourState;
use crate::dispute::Verdict;
use crate::trust::{TRUST_MAX, TRUST_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub time_s: f64,
    pub vehicle: usize,
    pub trust: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionRecord {
    pub time_s: f64,
    pub vehicle: usize,
    pub from: BehaviourState,
    pub to: BehaviourState,
    pub trust: f64,
}

/// One applied trust change. `dispute` is `None` for non-RSU sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustUpdate {
    pub time_s: f64,
    pub vehicle: usize,
    pub dispute: Option<u64>,
    pub delta: f64,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnouncementRecord {
    pub id: u64,
    pub time_s: f64,
    pub sender: usize,
    pub event: String,
    pub severity: u8,
    pub truthful: bool,
    pub location_m: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub announcements: u64,
    pub suppressed_announcements: u64,
    pub receptions: u64,
    pub reports: u64,
    pub reports_without_rsu: u64,
    pub rejected_reports: u64,
    pub disputes: u64,
    pub dismissed: u64,
    pub feedback: u64,
    pub late_feedback: u64,
    pub delivery_retries: u64,
}

/// Everything a run produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    pub verdicts: Vec<Verdict>,
    pub transitions: Vec<TransitionRecord>,
    pub updates: Vec<TrustUpdate>,
    pub announcements: Vec<AnnouncementRecord>,
    pub initial_trust: Vec<f64>,
    pub final_trust: Vec<f64>,
    pub counters: Counters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Snapshot {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Trace {
    /// Samples of one vehicle in time order.
    pub fn series(&self, vehicle: usize) -> impl Iterator<Item = &TraceSample> {
        self.samples.iter().filter(move |s| s.vehicle == vehicle)
    }

    /// First time the vehicle's trust reached `level` or more.
    pub fn first_at_or_above(&self, vehicle: usize, level: f64) -> Option<f64> {
        self.series(vehicle)
            .find(|s| s.trust >= level - 1e-12)
            .map(|s| s.time_s)
    }

    pub fn first_at_or_below(&self, vehicle: usize, level: f64) -> Option<f64> {
        self.series(vehicle)
            .find(|s| s.trust <= level + 1e-12)
            .map(|s| s.time_s)
    }

    pub fn min_trust(&self, vehicle: usize) -> f64 {
        self.series(vehicle).map(|s| s.trust).fold(f64::INFINITY, f64::min)
    }

    /// Trust histogram over [0.05, 0.9]; the last bin is closed.
    pub fn snapshot_density(&self, at: Snapshot, bin_width: f64) -> Vec<HistogramBin> {
        let values = match at {
            Snapshot::Start => &self.initial_trust,
            Snapshot::End => &self.final_trust,
        };
        histogram(values, bin_width)
    }

    pub fn write_trace(&self, mut w: impl Write, header: &str) -> io::Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "time_s,vehicle_id,trust")?;
        for s in &self.samples {
            writeln!(w, "{:.3},{},{:.6}", s.time_s, s.vehicle, s.trust)?;
        }
        Ok(())
    }

    pub fn write_verdicts(&self, mut w: impl Write, header: &str) -> io::Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(
            w,
            "time_s,dispute_id,event,severity,winner,confidence_sender,reward,punishment,mode"
        )?;
        for v in &self.verdicts {
            writeln!(
                w,
                "{:.3},{},{},{},{},{:.6},{:.6},{:.6},{}",
                v.decided_at,
                v.dispute_id,
                v.event,
                v.severity,
                v.winner,
                v.confidence_sender,
                v.reward_amount,
                v.punishment_amount,
                v.mode
            )?;
        }
        Ok(())
    }

    pub fn write_transitions(&self, mut w: impl Write, header: &str) -> io::Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "time_s,vehicle_id,from,to,trust")?;
        for t in &self.transitions {
            writeln!(
                w,
                "{:.3},{},{},{},{:.6}",
                t.time_s, t.vehicle, t.from, t.to, t.trust
            )?;
        }
        Ok(())
    }
}

pub fn histogram(values: &[f64], bin_width: f64) -> Vec<HistogramBin> {
    let span = TRUST_MAX - TRUST_MIN;
    let n = ((span / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let mut bins: Vec<HistogramBin> = (0..n)
        .map(|i| HistogramBin {
            lo: TRUST_MIN + i as f64 * bin_width,
            hi: (TRUST_MIN + (i + 1) as f64 * bin_width).min(TRUST_MAX),
            count: 0,
        })
        .collect();
    for &v in values {
        if !(TRUST_MIN..=TRUST_MAX).contains(&v) {
            continue;
        }
        let i = (((v - TRUST_MIN) / bin_width) + 1e-9).floor() as usize;
        bins[i.min(n - 1)].count += 1;
    }
    bins
}

pub fn write_histogram(bins: &[HistogramBin], mut w: impl Write, header: &str) -> io::Result<()> {
    writeln!(w, "# {header}")?;
    writeln!(w, "bin_lo,bin_hi,count")?;
    for b in bins {
        writeln!(w, "{:.2},{:.2},{}", b.lo, b.hi, b.count)?;
    }
    Ok(())
}
