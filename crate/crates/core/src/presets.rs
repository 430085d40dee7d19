//! Scenario presets for the shipped experiments.

use crate::behaviour::ProfileOverride;
use crate::dispute::AssessmentMode;
use crate::sim::{ClarifierModel, DriverOverride, InitialTrust, SimConfig, TrustDistribution};

pub const PRESET_NAMES: [&str; 6] = [
    "uniform-0.4-0.5",
    "fixed-0.9",
    "sender-0.3",
    "sender-0.7",
    "fuzzy-compare",
    "fixed-compare",
];

/// Witness accuracy used by the comparison presets.
pub const COMPARE_WITNESS_ACCURACY: f64 = 0.9;
/// One-hop radio of the comparison presets: long reach, lossy links, so
/// each reporter hears a given announcement with probability near 0.2.
pub const COMPARE_COMM_RANGE_M: f64 = 750.0;
pub const COMPARE_LOSS_PROBABILITY: f64 = 0.55;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: SimConfig,
}

fn sender_profile(malicious: [f64; 5]) -> DriverOverride {
    DriverOverride {
        driver: 0,
        profile: ProfileOverride {
            p_malicious_announce: Some(malicious),
            ..Default::default()
        },
        malicious_first: 0,
    }
}

/// Reporters that answer every reception with an untrue-attack report.
fn eager_reporters(cfg: &SimConfig) -> Vec<DriverOverride> {
    cfg.reporters
        .iter()
        .map(|&driver| DriverOverride {
            driver,
            profile: ProfileOverride {
                p_report_untrue: Some([1.0; 5]),
                ..Default::default()
            },
            malicious_first: 0,
        })
        .collect()
}

/// Shared setup of the fuzzy-versus-fixed comparison: only RSU verdicts move
/// trust, announcements travel one hop and clarifiers report what they saw.
fn comparison_base(mode: AssessmentMode) -> SimConfig {
    let mut c = SimConfig {
        mode,
        relay_enabled: false,
        comm_range_m: COMPARE_COMM_RANGE_M,
        loss_probability: COMPARE_LOSS_PROBABILITY,
        clarifiers: ClarifierModel::Witness {
            accuracy: COMPARE_WITNESS_ACCURACY,
        },
        ..SimConfig::default()
    };
    c.driver_overrides = eager_reporters(&c);
    c
}

pub fn preset(name: &str) -> Option<ScenarioPreset> {
    let (name, description, config) = match name {
        "uniform-0.4-0.5" => (
            PRESET_NAMES[0],
            "all drivers start uniformly in [0.4, 0.5]",
            SimConfig {
                initial_trust: TrustDistribution::Uniform { lo: 0.4, hi: 0.5 },
                ..SimConfig::default()
            },
        ),
        "fixed-0.9" => (
            PRESET_NAMES[1],
            "all drivers start at 0.9; the sender lies 10% of the time when very good",
            SimConfig {
                initial_trust: TrustDistribution::Fixed { value: 0.9 },
                driver_overrides: vec![sender_profile([0.1, 0.4, 0.6, 0.8, 0.9])],
                ..SimConfig::default()
            },
        ),
        "sender-0.3" => (
            PRESET_NAMES[2],
            "sender starts at 0.3, everyone else at 0.6",
            SimConfig {
                initial_trust: TrustDistribution::Fixed { value: 0.6 },
                initial_overrides: vec![InitialTrust { driver: 0, trust: 0.3 }],
                ..SimConfig::default()
            },
        ),
        "sender-0.7" => (
            PRESET_NAMES[3],
            "sender starts at 0.7, everyone else at 0.6",
            SimConfig {
                initial_trust: TrustDistribution::Fixed { value: 0.6 },
                initial_overrides: vec![InitialTrust { driver: 0, trust: 0.7 }],
                ..SimConfig::default()
            },
        ),
        "fuzzy-compare" => {
            let mut c = comparison_base(AssessmentMode::Fuzzy);
            c.driver_overrides.push(sender_profile([0.0; 5]));
            (
                PRESET_NAMES[4],
                "truthful sender against always-reporting attackers, fuzzy verdicts",
                c,
            )
        }
        "fixed-compare" => {
            let mut c = comparison_base(AssessmentMode::Fixed);
            let mut s = sender_profile([0.2, 0.4, 0.8, 0.8, 1.0]);
            s.malicious_first = 1;
            c.driver_overrides.push(s);
            (
                PRESET_NAMES[5],
                "sender that opens with a lie and degrades, fixed verdicts",
                c,
            )
        }
        _ => return None,
    };
    Some(ScenarioPreset {
        name,
        description,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_preset_resolves_and_validates() {
        for n in PRESET_NAMES {
            let p = preset(n).unwrap();
            assert_eq!(p.name, n);
            p.config.validate().unwrap();
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn comparison_presets_differ_only_in_mode_and_sender() {
        let a = preset("fuzzy-compare").unwrap().config;
        let b = preset("fixed-compare").unwrap().config;
        assert_eq!(a.mode, AssessmentMode::Fuzzy);
        assert_eq!(b.mode, AssessmentMode::Fixed);
        assert_eq!(a.initial_trust, b.initial_trust);
        assert_eq!(a.reporters, b.reporters);
        assert!(!a.relay_enabled && !b.relay_enabled);
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for n in PRESET_NAMES {
            let c = preset(n).unwrap().config;
            assert_eq!(SimConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
        }
    }
}
