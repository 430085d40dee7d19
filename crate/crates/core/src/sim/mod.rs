//! Discrete-event simulation of one scenario on a circular road.

mod config;
mod engine;
mod event;
mod trace;
mod world;

pub use config::{
    default_schedule, ClarifierModel, ConfigError, DriverOverride, InitialTrust, ScheduledEvent,
    SimConfig, TrustDistribution, TrustSources,
};
pub use engine::run;
pub use event::{EventKind, EventQueue, Payload, SimEvent};
pub use trace::{
    histogram, write_histogram, AnnouncementRecord, Counters, HistogramBin, Snapshot, Trace,
    TraceSample, TransitionRecord, TrustUpdate,
};
pub use world::{Rsu, Vehicle, World};

use sha2::{Digest, Sha256};

use crate::dispute::DisputeError;
use crate::fuzzy::FuzzyConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dispute(#[from] DisputeError),
}

/// Short digest of everything that determines a run's output.
pub fn config_hash(cfg: &SimConfig, fuzzy: &FuzzyConfig) -> String {
    let mut h = Sha256::new();
    h.update(cfg.to_toml_string());
    h.update([0u8]);
    h.update(fuzzy.to_toml_string());
    hex::encode(&h.finalize()[..8])
}

/// Header line embedded (after `# `) in every artifact.
pub fn artifact_header(preset: &str, cfg: &SimConfig, fuzzy: &FuzzyConfig) -> String {
    format!(
        "preset={preset} seed={} mode={} config_hash={}",
        cfg.seed,
        cfg.mode,
        config_hash(cfg, fuzzy)
    )
}

/// Digest of a fuzzy configuration alone, used to tag lookup caches.
pub fn fuzzy_config_hash(fuzzy: &FuzzyConfig) -> String {
    hex::encode(&Sha256::digest(fuzzy.to_toml_string())[..8])
}
