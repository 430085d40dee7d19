//! Per-driver summaries and multi-seed aggregates.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::dispute::Party;
use crate::fuzzy::Assessor;
use crate::sim::{run, SimConfig, SimError, Trace};
use crate::trust::{TRUST_MAX, TRUST_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Sender,
    Reporter,
    Other,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Role::Sender => "sender",
            Role::Reporter => "reporter",
            Role::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverSummary {
    pub vehicle: usize,
    pub role: Role,
    pub initial_trust: f64,
    pub final_trust: f64,
    pub min_trust: f64,
    pub max_trust: f64,
    pub disputes: usize,
    pub wins: usize,
    pub losses: usize,
    pub time_to_max: Option<f64>,
    pub time_to_blacklist: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub drivers: Vec<DriverSummary>,
}

impl SummaryReport {
    /// Summarizes the scripted drivers plus any other driver whose trust
    /// moved; `all` includes every driver.
    pub fn from_trace(cfg: &SimConfig, trace: &Trace, all: bool) -> Self {
        let drivers = (0..cfg.vehicles)
            .filter_map(|v| {
                let role = if v == cfg.sender {
                    Role::Sender
                } else if cfg.reporters.contains(&v) {
                    Role::Reporter
                } else {
                    Role::Other
                };
                let s = summarize(trace, v, role);
                (all || role != Role::Other || s.initial_trust != s.final_trust).then_some(s)
            })
            .collect();
        Self { drivers }
    }

    pub fn driver(&self, vehicle: usize) -> Option<&DriverSummary> {
        self.drivers.iter().find(|d| d.vehicle == vehicle)
    }

    pub fn write_csv(&self, mut w: impl Write, header: &str) -> io::Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(
            w,
            "vehicle_id,role,initial_trust,final_trust,min_trust,max_trust,disputes,wins,losses,time_to_max_s,time_to_blacklist_s"
        )?;
        let opt = |t: Option<f64>| t.map_or(String::new(), |t| format!("{t:.3}"));
        for d in &self.drivers {
            writeln!(
                w,
                "{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{}",
                d.vehicle,
                d.role,
                d.initial_trust,
                d.final_trust,
                d.min_trust,
                d.max_trust,
                d.disputes,
                d.wins,
                d.losses,
                opt(d.time_to_max),
                opt(d.time_to_blacklist)
            )?;
        }
        Ok(())
    }
}

pub fn summarize(trace: &Trace, vehicle: usize, role: Role) -> DriverSummary {
    let (mut wins, mut losses) = (0, 0);
    for v in &trace.verdicts {
        if v.winner_id == vehicle {
            wins += 1;
        } else if v.loser_id == vehicle {
            losses += 1;
        }
    }
    let initial = trace.initial_trust[vehicle];
    let max = trace
        .series(vehicle)
        .map(|s| s.trust)
        .fold(initial, f64::max);
    DriverSummary {
        vehicle,
        role,
        initial_trust: initial,
        final_trust: trace.final_trust[vehicle],
        min_trust: trace.min_trust(vehicle).min(initial),
        max_trust: max,
        disputes: wins + losses,
        wins,
        losses,
        time_to_max: trace.first_at_or_above(vehicle, TRUST_MAX),
        time_to_blacklist: trace.first_at_or_below(vehicle, TRUST_MIN),
    }
}

/// Which side won each verdict the vehicle was party to, in order.
pub fn outcomes(trace: &Trace, vehicle: usize) -> Vec<Party> {
    trace
        .verdicts
        .iter()
        .filter(|v| v.winner_id == vehicle || v.loser_id == vehicle)
        .map(|v| v.winner)
        .collect()
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub result: Result<Trace, SimError>,
}

/// Runs one scenario per seed in parallel; results are in seed order.
pub fn run_seeds(base: &SimConfig, seeds: &[u64], assessor: &dyn Assessor) -> Vec<SeedRun> {
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = SimConfig {
                seed,
                ..base.clone()
            };
            SeedRun {
                seed,
                result: run(&cfg, assessor),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverAggregate {
    pub vehicle: usize,
    pub role: Role,
    pub runs: usize,
    pub mean_final: f64,
    pub stddev_final: f64,
    pub blacklist_rate: f64,
    pub max_trust_rate: f64,
}

/// Mean and population standard deviation of final trust over successful
/// seeds, plus the share of seeds in which each driver hit the floor or
/// the ceiling.
pub fn aggregate(cfg: &SimConfig, runs: &[SeedRun]) -> Vec<DriverAggregate> {
    let ok: Vec<&Trace> = runs.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let mut ids = vec![cfg.sender];
    ids.extend(&cfg.reporters);
    ids.into_iter()
        .map(|v| {
            let role = if v == cfg.sender { Role::Sender } else { Role::Reporter };
            let n = ok.len();
            let finals: Vec<f64> = ok.iter().map(|t| t.final_trust[v]).collect();
            let mean = finals.iter().sum::<f64>() / n.max(1) as f64;
            let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n.max(1) as f64;
            let rate = |hit: &dyn Fn(&Trace) -> bool| {
                ok.iter().filter(|t| hit(t)).count() as f64 / n.max(1) as f64
            };
            DriverAggregate {
                vehicle: v,
                role,
                runs: n,
                mean_final: mean,
                stddev_final: var.sqrt(),
                blacklist_rate: rate(&|t| t.first_at_or_below(v, TRUST_MIN).is_some()),
                max_trust_rate: rate(&|t| t.first_at_or_above(v, TRUST_MAX).is_some()),
            }
        })
        .collect()
}

pub fn write_aggregate(rows: &[DriverAggregate], mut w: impl Write, header: &str) -> io::Result<()> {
    writeln!(w, "# {header}")?;
    writeln!(
        w,
        "vehicle_id,role,runs,mean_final_trust,stddev_final_trust,blacklist_rate,max_trust_rate"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{:.3},{:.3}",
            r.vehicle, r.role, r.runs, r.mean_final, r.stddev_final, r.blacklist_rate, r.max_trust_rate
        )?;
    }
    Ok(())
}
