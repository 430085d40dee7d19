use crate::behaviour::{BehaviourProfile, BehaviourState, RandomStream};
use crate::dispute::DisputeDesk;
use crate::trust::{clamp_trust, TrustScore};

use super::config::{SimConfig, TrustDistribution};

/// Stream ids at or above this are reserved for world-level randomness;
/// drivers use their own id.
const WORLD_STREAM: u64 = 1 << 40;
const RADIO_STREAM: u64 = WORLD_STREAM + 1;

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: usize,
    pub start_m: f64,
    pub speed_mps: f64,
    pub trust: TrustScore,
    pub state: BehaviourState,
    pub official: bool,
    pub profile: BehaviourProfile,
    pub rng: RandomStream,
    pub malicious_first: u32,
}

#[derive(Debug, Clone)]
pub struct Rsu {
    pub id: usize,
    pub position_m: f64,
    pub desk: DisputeDesk,
}

/// Circular road with constant-speed vehicles and evenly spaced RSUs.
#[derive(Debug, Clone)]
pub struct World {
    pub road_length_m: f64,
    pub comm_range_m: f64,
    pub vehicles: Vec<Vehicle>,
    pub rsus: Vec<Rsu>,
    pub radio_rng: RandomStream,
}

impl World {
    pub fn build(cfg: &SimConfig) -> Self {
        let mut setup = RandomStream::new(cfg.seed, WORLD_STREAM);
        let l = cfg.road_length_m;
        let vehicles = (0..cfg.vehicles)
            .map(|id| {
                let start_m = setup.range(0.0, l);
                let speed_mps = setup.range(cfg.speed_min_mps, cfg.speed_max_mps);
                let drawn = match cfg.initial_trust {
                    TrustDistribution::Uniform { lo, hi } => setup.range(lo, hi),
                    TrustDistribution::Fixed { value } => value,
                };
                let official = cfg.officials.contains(&id);
                let trust = if official {
                    TrustScore::OFFICIAL
                } else {
                    let t = cfg
                        .initial_overrides
                        .iter()
                        .find(|o| o.driver == id)
                        .map_or(drawn, |o| o.trust);
                    clamp_trust(t).expect("validated initial trust")
                };
                let ov = cfg.driver_overrides.iter().find(|o| o.driver == id);
                let profile = ov.map_or_else(
                    || cfg.behaviour.clone(),
                    |o| cfg.behaviour.with_override(&o.profile),
                );
                Vehicle {
                    id,
                    start_m,
                    speed_mps,
                    trust,
                    state: if official {
                        BehaviourState::VeryGood
                    } else {
                        cfg.states.state_for(trust)
                    },
                    official,
                    profile,
                    rng: RandomStream::new(cfg.seed, id as u64),
                    malicious_first: ov.map_or(0, |o| o.malicious_first),
                }
            })
            .collect();
        let spacing = l / cfg.rsus as f64;
        let rsus = (0..cfg.rsus)
            .map(|id| Rsu {
                id,
                position_m: (id as f64 + 0.5) * spacing,
                desk: DisputeDesk::default(),
            })
            .collect();
        Self {
            road_length_m: l,
            comm_range_m: cfg.comm_range_m,
            vehicles,
            rsus,
            radio_rng: RandomStream::new(cfg.seed, RADIO_STREAM),
        }
    }

    pub fn position(&self, vehicle: usize, t: f64) -> f64 {
        let v = &self.vehicles[vehicle];
        (v.start_m + v.speed_mps * t).rem_euclid(self.road_length_m)
    }

    /// Shortest distance along the ring.
    pub fn ring_distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(self.road_length_m);
        d.min(self.road_length_m - d)
    }

    /// Vehicles within radio range of a point, in id order.
    pub fn vehicles_near(&self, at_m: f64, t: f64, range_m: f64) -> Vec<usize> {
        (0..self.vehicles.len())
            .filter(|&i| self.ring_distance(self.position(i, t), at_m) <= range_m)
            .collect()
    }

    pub fn rsus_near(&self, at_m: f64) -> Vec<usize> {
        self.rsus
            .iter()
            .filter(|r| self.ring_distance(r.position_m, at_m) <= self.comm_range_m)
            .map(|r| r.id)
            .collect()
    }

    /// Closest RSU in range of a point; ties go to the lower id.
    pub fn nearest_rsu(&self, at_m: f64) -> Option<usize> {
        self.rsus
            .iter()
            .map(|r| (self.ring_distance(r.position_m, at_m), r.id))
            .filter(|&(d, _)| d <= self.comm_range_m)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }

    pub fn in_rsu_range(&self, vehicle: usize, t: f64) -> bool {
        self.nearest_rsu(self.position(vehicle, t)).is_some()
    }
}
