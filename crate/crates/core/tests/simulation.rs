use proptest::prelude::*;

use rsu_trust::fuzzy::FuzzyEngine;
use rsu_trust::presets::{preset, PRESET_NAMES};
use rsu_trust::report::{summarize, Role, SummaryReport};
use rsu_trust::sim::{run, ClarifierModel, SimConfig, Snapshot, Trace, World};
use rsu_trust::trust::{TRUST_MAX, TRUST_MIN};

fn go(cfg: &SimConfig) -> Trace {
    run(cfg, &FuzzyEngine::default()).unwrap()
}

fn with_seed(name: &str, seed: u64) -> SimConfig {
    SimConfig {
        seed,
        ..preset(name).unwrap().config
    }
}

#[test]
fn first_announcements_follow_the_schedule() {
    let cfg = SimConfig {
        initial_trust: rsu_trust::sim::TrustDistribution::Fixed { value: 0.9 },
        ..SimConfig::default()
    };
    let tr = go(&cfg);
    let times: Vec<f64> = tr.announcements.iter().take(5).map(|a| a.time_s).collect();
    assert_eq!(times, [500.0, 700.0, 900.0, 1100.0, 1300.0]);
    assert!(tr.announcements.iter().all(|a| a.time_s <= 4400.0));
}

#[test]
fn every_sample_stays_within_the_trust_range() {
    for name in PRESET_NAMES {
        for seed in 1..=3 {
            let tr = go(&with_seed(name, seed));
            for s in &tr.samples {
                assert!((TRUST_MIN..=TRUST_MAX).contains(&s.trust), "{name} seed {seed}: {s:?}");
            }
        }
    }
}

#[test]
fn samples_are_recorded_in_time_order() {
    let tr = go(&with_seed("fuzzy-compare", 3));
    assert!(tr.samples.windows(2).all(|w| w[0].time_s <= w[1].time_s));
    assert!(tr.updates.windows(2).all(|w| w[0].time_s <= w[1].time_s));
}

#[test]
fn blocked_drivers_originate_nothing() {
    for seed in 1..=10 {
        let cfg = with_seed("fixed-compare", seed);
        let tr = go(&cfg);
        for v in 0..cfg.vehicles {
            let Some(t) = tr.first_at_or_below(v, TRUST_MIN) else {
                continue;
            };
            assert!(
                tr.announcements.iter().all(|a| a.sender != v || a.time_s <= t),
                "seed {seed}: vehicle {v} announced after blocking at {t}"
            );
            let window = cfg.dispute.collaboration_timer_s + 1.0;
            assert!(
                tr.verdicts
                    .iter()
                    .filter(|x| x.winner_id == v || x.loser_id == v)
                    .all(|x| x.decided_at <= t + window),
                "seed {seed}: vehicle {v} reported after blocking"
            );
        }
    }
}

#[test]
fn only_rsu_verdicts_move_trust_in_the_comparison_presets() {
    for name in ["fuzzy-compare", "fixed-compare"] {
        let tr = go(&with_seed(name, 2));
        assert!(tr.updates.iter().all(|u| u.dispute.is_some()));
        let ids: std::collections::BTreeSet<u64> = tr.verdicts.iter().map(|v| v.dispute_id).collect();
        assert_eq!(ids.len(), tr.verdicts.len(), "one verdict per dispute");
        assert_eq!(tr.updates.len(), 2 * tr.verdicts.len());
    }
}

#[test]
fn fuzzy_amounts_match_the_engine_bit_for_bit() {
    let e = FuzzyEngine::default();
    use rsu_trust::fuzzy::{AssessmentKind, Assessor};
    let tr = go(&with_seed("fuzzy-compare", 4));
    assert!(!tr.verdicts.is_empty());
    for v in &tr.verdicts {
        let rc_w = match v.winner {
            rsu_trust::Party::Sender => v.confidence_sender,
            rsu_trust::Party::Reporter => v.confidence_reporter,
        };
        let r = e.assess(v.dpb_winner, v.severity, rc_w, AssessmentKind::Reward).unwrap();
        let p = e.assess(v.dpb_loser, v.severity, rc_w, AssessmentKind::Punishment).unwrap();
        assert_eq!(r.to_bits(), v.reward_amount.to_bits());
        assert_eq!(p.to_bits(), v.punishment_amount.to_bits());
    }
}

#[test]
fn zero_witness_radius_dismisses_every_dispute() {
    let cfg = SimConfig {
        witness_radius_m: 0.0,
        ..with_seed("fuzzy-compare", 1)
    };
    let tr = go(&cfg);
    assert!(tr.counters.disputes > 0);
    assert_eq!(tr.counters.dismissed, tr.counters.disputes);
    assert!(tr.verdicts.is_empty());
    assert_eq!(tr.initial_trust, tr.final_trust);
}

#[test]
fn total_loss_means_no_receptions() {
    let cfg = SimConfig {
        loss_probability: 1.0,
        ..SimConfig::default()
    };
    let tr = go(&cfg);
    assert!(tr.counters.announcements > 0);
    assert_eq!(tr.counters.receptions, 0);
    assert_eq!(tr.counters.disputes, 0);
}

#[test]
fn default_geometry_finds_clarifiers_for_every_dispute() {
    let tr = go(&SimConfig::default());
    assert!(tr.counters.disputes > 0);
    assert_eq!(tr.counters.dismissed, 0);
}

#[test]
fn official_feedback_settles_before_the_timer() {
    let mut cfg = with_seed("fuzzy-compare", 1);
    cfg.officials = (6..100).collect();
    let tr = go(&cfg);
    assert!(!tr.verdicts.is_empty());
    for v in &tr.verdicts {
        assert_eq!(v.winner, rsu_trust::Party::Sender, "the sender never lies here");
        let a = tr.announcements.iter().filter(|a| a.event == v.event && a.time_s < v.decided_at).last().unwrap();
        assert!(v.decided_at - a.time_s < cfg.dispute.collaboration_timer_s);
    }
}

#[test]
fn deliveries_wait_for_rsu_coverage() {
    // One RSU with a short range leaves most of the ring uncovered.
    let cfg = SimConfig {
        rsus: 1,
        comm_range_m: 400.0,
        relay_enabled: true,
        ..with_seed("fixed-compare", 1)
    };
    let tr = go(&cfg);
    let world = World::build(&cfg);
    assert!(tr.counters.delivery_retries > 0);
    for u in &tr.updates {
        assert!(world.in_rsu_range(u.vehicle, u.time_s), "{u:?}");
        let v = tr.verdicts.iter().find(|v| Some(v.dispute_id) == u.dispute).unwrap();
        assert!(u.time_s >= v.decided_at + cfg.latency_s - 1e-9);
    }
}

#[test]
fn start_and_end_densities() {
    let tr = go(&SimConfig::default());
    let start = tr.snapshot_density(Snapshot::Start, 0.05);
    let total: usize = start.iter().map(|b| b.count).sum();
    assert_eq!(total, 100);
    let inside: usize = start
        .iter()
        .filter(|b| b.lo >= 0.5 - 1e-9 && b.hi <= 0.6 + 1e-9)
        .map(|b| b.count)
        .sum();
    assert_eq!(inside, 100);

    let tr = go(&with_seed("fuzzy-compare", 1));
    let end = tr.snapshot_density(Snapshot::End, 0.05);
    assert_eq!(end.last().unwrap().count, 1, "only the sender ends at the ceiling");
    let tr = go(&with_seed("fixed-compare", 1));
    assert_eq!(tr.snapshot_density(Snapshot::End, 0.05)[0].count, 1);
}

#[test]
fn low_trust_senders_skip_severe_events() {
    let tr = go(&with_seed("uniform-0.4-0.5", 1));
    assert!(tr.announcements.iter().all(|a| a.severity <= 5));
    assert!(tr.counters.suppressed_announcements > 0);
}

#[test]
fn summary_agrees_with_verdicts() {
    let cfg = with_seed("fuzzy-compare", 5);
    let tr = go(&cfg);
    let s = SummaryReport::from_trace(&cfg, &tr, false);
    let sender = s.driver(0).unwrap();
    assert_eq!(sender.role, Role::Sender);
    assert_eq!(sender.wins, tr.verdicts.iter().filter(|v| v.winner_id == 0).count());
    assert_eq!(sender.time_to_max, tr.first_at_or_above(0, TRUST_MAX));
    let total: usize = s.drivers.iter().map(|d| d.disputes).sum();
    assert_eq!(total, 2 * tr.verdicts.len());
    assert_eq!(summarize(&tr, 50, Role::Other).disputes, 0);
}

#[test]
fn table_clarifiers_are_supported() {
    let cfg = SimConfig {
        clarifiers: ClarifierModel::Table,
        ..with_seed("fuzzy-compare", 1)
    };
    let tr = go(&cfg);
    assert!(tr.counters.feedback > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn runs_are_pure_functions_of_the_config(seed in 0u64..10_000, which in 0usize..6) {
        let cfg = with_seed(PRESET_NAMES[which], seed);
        prop_assert_eq!(go(&cfg), go(&cfg));
    }

    #[test]
    fn fixed_mode_moves_trust_by_exactly_a_tenth(seed in 0u64..10_000) {
        let tr = go(&with_seed("fixed-compare", seed));
        for u in &tr.updates {
            prop_assert_eq!(u.delta.abs(), 0.1);
            prop_assert!((u.after - (u.before + u.delta).clamp(TRUST_MIN, TRUST_MAX)).abs() < 1e-12);
        }
    }

    #[test]
    fn unscripted_drivers_keep_their_trust(seed in 0u64..10_000) {
        let cfg = SimConfig { seed, ..SimConfig::default() };
        let tr = go(&cfg);
        for v in 6..cfg.vehicles {
            prop_assert_eq!(tr.initial_trust[v], tr.final_trust[v]);
        }
    }
}
