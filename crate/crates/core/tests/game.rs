//! The spectrum game: traffic, sensing, datasets, metrics, defense and KL.

mod common;

use common::theory;
use dlphy::game::*;
use dlphy::nn::classifier::Dataset;
use dlphy::nn::tensor::Tensor;
use dlphy::rng;
use rand::Rng as _;

fn log(t: u64, reading: f64, busy: bool) -> SlotLog {
    SlotLog {
        t,
        channel_busy: busy,
        sensing_t: reading,
        sensing_a: -reading,
        t_transmitted: !busy,
        a_jammed: false,
        ack: !busy,
        ack_heard: !busy,
        ack_unjammed: !busy,
        s_t: None,
        flipped: false,
    }
}

fn small_game() -> GameConfig {
    GameConfig { collect_slots: 400, test_slots: 300, epochs: 30, ..GameConfig::default() }
}

#[test]
fn background_busy_fraction_matches_arrival_rate() {
    let mut state = BackgroundState::default();
    let mut r = rng::stream(11, 0);
    let n = 100_000;
    let busy = (0..n).filter(|_| step_background(&mut state, 0.2, 0.8, &mut r)).count();
    let frac = busy as f64 / n as f64;
    assert!((frac - 0.2).abs() < 0.02, "busy fraction {frac}");
}

#[test]
fn background_busy_until_queue_drains() {
    let mut state = BackgroundState::default();
    let mut r = rng::stream(3, 0);
    for _ in 0..10_000 {
        let was_busy = state.busy;
        let on = step_background(&mut state, 0.3, 0.5, &mut r);
        if was_busy {
            assert!(on, "a busy user keeps transmitting");
        }
        assert_eq!(state.busy, on && state.queue > 0);
    }
}

#[test]
fn sensing_mean_is_noise_plus_received_power() {
    let scn = Scenario::default();
    let n = 20_000;
    let mut r = rng::stream(5, 0);
    let quiet: f64 = (0..n).map(|_| sense(&scn, Node::Transmitter, &[], &mut r).unwrap()).sum::<f64>() / n as f64;
    let loud: f64 =
        (0..n).map(|_| sense(&scn, Node::Transmitter, &[Node::Background], &mut r).unwrap()).sum::<f64>() / n as f64;
    // Unit-variance complex noise plus 30 dB over a distance of 10.
    let expected = 1.0 + 1000.0 / 100.0;
    assert!((quiet - 1.0).abs() < 0.02, "{quiet}");
    assert!((loud - expected).abs() / expected < 0.02, "{loud}");
}

#[test]
fn transmitter_and_adversary_read_different_channels() {
    let scn = Scenario::default();
    let mut r = rng::stream(6, 0);
    let n = 5_000;
    let at_t: f64 = (0..n).map(|_| sense(&scn, Node::Transmitter, &[Node::Background], &mut r).unwrap()).sum();
    let at_a: f64 = (0..n).map(|_| sense(&scn, Node::Adversary, &[Node::Background], &mut r).unwrap()).sum();
    // B is 10 away from T and 10 away from A, but T is also on the air at A.
    let at_a_with_t: f64 = (0..n)
        .map(|_| sense(&scn, Node::Adversary, &[Node::Background, Node::Transmitter], &mut r).unwrap())
        .sum();
    assert!((at_t - at_a).abs() / at_t < 0.05);
    assert!(at_a_with_t > 1.3 * at_a);
}

#[test]
fn windows_end_at_the_labeled_slot() {
    let logs: Vec<SlotLog> = (0..8).map(|t| log(t, t as f64, t % 3 == 0)).collect();
    let d = build_dataset_t(&logs, 3, LabelSource::ChannelState).unwrap();
    assert_eq!(d.len(), 6);
    for i in 0..d.len() {
        let end = i + 2;
        assert_eq!(d.features.row(i), &[(end - 2) as f64, (end - 1) as f64, end as f64]);
        assert_eq!(d.labels[i], usize::from(end % 3 != 0));
    }
    let a = build_dataset_a(&logs, 3).unwrap();
    assert_eq!(a.features.row(0), &[0.0, -1.0, -2.0]);
    assert!(build_dataset_t(&logs[..2], 3, LabelSource::Ack).is_err());
}

#[test]
fn always_idle_channel_gives_idle_labels() {
    let logs: Vec<SlotLog> = (0..20).map(|t| log(t, 1.0, false)).collect();
    for source in [LabelSource::Ack, LabelSource::ChannelState] {
        let d = build_dataset_t(&logs, 4, source).unwrap();
        assert!(d.labels.iter().all(|&l| l == 1));
    }
}

#[test]
fn outage_of_an_unjammed_link_matches_shadowing() {
    // No background traffic: every probe fails only through shadowing.
    let scn = Scenario { arrival_rate: 0.0, ..Scenario::default() };
    let mut w = World::new(scn, 1, 21).unwrap();
    let logs = w.run(20_000, TxRule::Probe, JamRule::Off).unwrap();
    let fails = logs.iter().filter(|l| !l.ack).count() as u64;
    let (lo, hi) = theory::wilson_z(fails, logs.len() as u64, 3.290_526_731_491_926);
    let expected = 17.0 / 400.0;
    assert!(lo <= expected && expected <= hi, "{fails} failures");
}

#[test]
fn acks_require_a_transmission_and_metrics_are_conserved() {
    let out = run_game(&small_game(), Attack::DlJammer, None, 2).unwrap();
    for l in out.logs.iter().chain(&out.collection_logs) {
        assert!(!l.ack || l.t_transmitted);
        assert!(!l.ack || l.ack_unjammed);
    }
    let m = out.metrics;
    assert_eq!(m.slots, out.logs.len());
    assert!(m.successes <= m.attempts && m.attempts <= m.slots);
    assert!(m.throughput <= m.success_ratio + 1e-12);
    assert_eq!(m.attempts, out.logs.iter().filter(|l| l.t_transmitted).count());
    assert_eq!(m.successes, out.logs.iter().filter(|l| l.ack).count());
}

#[test]
fn jamming_idle_slots_changes_nothing() {
    let cfg = small_game();
    let mut a = prepare(&cfg, None, 4).unwrap();
    let mut b = prepare(&cfg, None, 4).unwrap();
    let rule = |c| TxRule::Sensing { classifier: c, eta: cfg.eta, defense: None };
    let quiet = a.world.run(300, rule(&mut a.c_t), JamRule::Off).unwrap();
    let jammed = b.world.run(300, rule(&mut b.c_t), JamRule::Threshold(1e-3)).unwrap();
    for (q, j) in quiet.iter().zip(&jammed) {
        assert!(j.a_jammed);
        assert_eq!(q.t_transmitted, j.t_transmitted);
        if !q.t_transmitted {
            assert_eq!(SlotLog { a_jammed: false, ..j.clone() }, q.clone());
        }
        assert_eq!(q.ack_unjammed, j.ack_unjammed);
    }
}

#[test]
fn same_seed_same_game() {
    let cfg = small_game();
    let a = run_game(&cfg, Attack::SensingJammer { tau: 4.7 }, None, 8).unwrap();
    let b = run_game(&cfg, Attack::SensingJammer { tau: 4.7 }, None, 8).unwrap();
    assert_eq!(a.logs, b.logs);
    assert_eq!(slot_logs_to_csv(8, &a.logs), slot_logs_to_csv(8, &b.logs));
}

#[test]
fn attacks_share_traffic_and_channel_draws() {
    let cfg = small_game();
    let none = run_game(&cfg, Attack::None, None, 9).unwrap();
    let dl = run_game(&cfg, Attack::DlJammer, None, 9).unwrap();
    for (x, y) in none.logs.iter().zip(&dl.logs) {
        assert_eq!(x.channel_busy, y.channel_busy);
        assert_eq!(x.sensing_t, y.sensing_t);
        assert_eq!(x.t_transmitted, y.t_transmitted);
        assert_eq!(x.ack_unjammed, y.ack_unjammed);
    }
}

#[test]
fn transmitter_learns_the_channel() {
    let p = prepare(&small_game(), None, 1).unwrap();
    assert!(p.t_errors.max() < 0.1, "{:?}", p.t_errors);
}

#[test]
fn defense_stays_within_budget() {
    for p_d in [0.0, 5.0, 10.0, 20.0, 40.0] {
        let policy = DefensePolicy::new(p_d, 0.25, Ranking::Extremeness).unwrap();
        let out = run_game(&small_game(), Attack::DlJammer, Some(&policy), 3).unwrap();
        let n = out.logs.len();
        let flipped = out.logs.iter().filter(|l| l.flipped).count();
        assert!(flipped as f64 / n as f64 <= p_d / 100.0 + 1.0 / n as f64, "p_d {p_d}: {flipped}");
        assert_eq!(flipped, policy.budget(n));
    }
}

#[test]
fn zero_budget_defense_is_no_defense() {
    let cfg = small_game();
    let policy = DefensePolicy::new(0.0, cfg.eta, Ranking::Extremeness).unwrap();
    let with = run_game(&cfg, Attack::DlJammer, Some(&policy), 5).unwrap();
    let without = run_game(&cfg, Attack::DlJammer, None, 5).unwrap();
    assert_eq!(with.logs, without.logs);
}

#[test]
fn flipped_slots_are_the_most_confident() {
    let mut r = rng::stream(12, 0);
    let scores: Vec<f64> = (0..500).map(|_| r.random::<f64>()).collect();
    for (ranking, key) in [
        (Ranking::Extremeness, Box::new(|s: f64| s.min(1.0 - s)) as Box<dyn Fn(f64) -> f64>),
        (Ranking::ThresholdDistance, Box::new(|s: f64| -(s - 0.25).abs())),
    ] {
        let policy = DefensePolicy::new(10.0, 0.25, ranking).unwrap();
        let flips = policy.select(&scores);
        assert_eq!(flips.iter().filter(|&&f| f).count(), 50);
        let worst_flipped = scores.iter().zip(&flips).filter(|(_, &f)| f).map(|(&s, _)| key(s)).fold(f64::MIN, f64::max);
        let best_kept = scores.iter().zip(&flips).filter(|(_, &f)| !f).map(|(&s, _)| key(s)).fold(f64::MAX, f64::min);
        assert!(worst_flipped <= best_kept);
        let transmit: Vec<bool> = scores.iter().map(|&s| s < 0.25).collect();
        let (out, mask) = apply_defense(&transmit, &scores, &policy);
        assert_eq!(mask, flips);
        for i in 0..scores.len() {
            assert_eq!(out[i], transmit[i] ^ flips[i]);
        }
    }
}

#[test]
fn defense_rejects_invalid_settings() {
    assert!(DefensePolicy::new(-1.0, 0.25, Ranking::Extremeness).is_err());
    assert!(DefensePolicy::new(100.5, 0.25, Ranking::Extremeness).is_err());
    assert!(DefensePolicy::new(10.0, 1.0, Ranking::Extremeness).is_err());
}

#[test]
fn kl_of_two_point_histograms() {
    let expected = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
    let got = kl_histograms(&[0.5, 0.5], &[0.9, 0.1], 1e-6);
    assert!((got - expected).abs() < 1e-5, "{got} vs {expected}");
    assert!((expected - 0.511).abs() < 1e-3);
}

#[test]
fn kl_is_nonnegative_and_zero_on_identical_samples() {
    let mut r = rng::stream(13, 0);
    for _ in 0..20 {
        let p = Tensor::matrix(50, 3, (0..150).map(|_| r.random::<f64>()).collect());
        let q = Tensor::matrix(70, 3, (0..210).map(|_| r.random::<f64>() * 2.0).collect());
        assert!(kl_divergence(&p, &q, 20, 1e-6) >= 0.0);
        assert!(kl_divergence(&p, &p, 20, 1e-6) < 1e-9);
    }
}

#[test]
fn kl_of_disjoint_samples_is_large() {
    let p = Tensor::matrix(4, 1, vec![0.0, 0.1, 0.2, 0.3]);
    let q = Tensor::matrix(4, 1, vec![5.0, 5.1, 5.2, 5.3]);
    assert!(kl_divergence(&p, &q, 20, 1e-6) > 10.0);
}

#[test]
fn raising_the_threshold_trades_false_alarms_for_misses() {
    let p = prepare(&small_game(), None, 6).unwrap();
    let taus: Vec<f64> = (1..=40).map(|i| i as f64 * 0.5).collect();
    let sweep = tau_sweep(&p.collection, &taus);
    for w in sweep.windows(2) {
        assert!(w[1].1.e_md >= w[0].1.e_md - 1e-12);
        assert!(w[1].1.e_fa <= w[0].1.e_fa + 1e-12);
    }
    let best = best_tau(&sweep).unwrap();
    let best_err = sweep.iter().find(|(t, _)| *t == best).unwrap().1.max();
    assert!(sweep.iter().all(|(_, e)| e.max() >= best_err));
}

#[test]
fn early_discriminator_spots_the_generator() {
    let mut r = rng::stream(14, 0);
    let n = 40;
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let rows: Vec<f64> = labels
        .iter()
        .flat_map(|&l| [if l == 1 { 6.0 } else { 14.0 }; 4])
        .map(|c| c + r.random::<f64>())
        .collect();
    let real = Dataset::new(Tensor::matrix(n, 4, rows), labels).unwrap();
    let cfg = CGanConfig { iterations: 60, instance_noise: 0.0, ..CGanConfig::default() };
    let mut gan = train_cgan(&real, &cfg).unwrap();
    let fake = gan.generate_balanced(n, &mut rng::stream(14, 1)).unwrap();
    let real_logits = gan.discriminate(&real).unwrap();
    let fake_logits = gan.discriminate(&fake).unwrap();
    let correct = real_logits.iter().filter(|&&z| z > 0.0).count() + fake_logits.iter().filter(|&&z| z < 0.0).count();
    let accuracy = correct as f64 / (2 * n) as f64;
    assert!(accuracy > 0.7, "accuracy {accuracy}");
}

#[test]
fn gan_losses_are_recorded_and_finite() {
    let p = prepare(&small_game(), None, 7).unwrap();
    let data = build_dataset_a(&p.collection, 10).unwrap();
    let cfg = CGanConfig { iterations: 200, ..CGanConfig::default() };
    let mut gan = train_cgan(&data.subset(&(0..40).collect::<Vec<_>>()), &cfg).unwrap();
    assert_eq!(gan.d_loss.len(), 200);
    assert_eq!(gan.g_loss.len(), 200);
    assert!(gan.d_loss.iter().chain(&gan.g_loss).all(|v| v.is_finite()));
    let x = gan.generate(&[0, 1, 1], &mut rng::stream(7, 2)).unwrap();
    assert_eq!((x.rows(), x.cols()), (3, 10));
}

#[test]
fn configs_reject_unknown_keys() {
    assert!(toml::from_str::<GameConfig>("window = 5\nbogus = 1").is_err());
    assert!(toml::from_str::<Scenario>("tx_power_db = 20.0").is_ok());
    let cfg: GameConfig = toml::from_str("window = 5").unwrap();
    assert_eq!(cfg.eta, 0.25);
    assert_eq!(cfg.scenario, Scenario::default());
}

#[test]
fn metrics_csv_has_seed_header() {
    let m = Metrics::from_logs(&[log(0, 1.0, false), log(1, 1.0, true)]);
    let csv = metrics_to_csv(42, &[("none".into(), m)]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# seed=42"));
    assert_eq!(lines.next(), Some("attack_type,throughput,success_ratio"));
    assert!(lines.next().unwrap().starts_with("none,0.5"));
}

#[test]
fn saturated_traffic_keeps_the_channel_busy() {
    let mut state = BackgroundState::default();
    let mut r = rng::stream(15, 0);
    assert!((0..1000).all(|_| step_background(&mut state, 1.0, 1.0, &mut r)));
}

#[test]
fn silent_reading_never_triggers_the_threshold_jammer() {
    for tau in [1e-9, 0.5, 3.4, 4.7, 100.0] {
        assert!(!sensing_jammer_decision(0.0, tau));
    }
    assert!(sensing_jammer_decision(5.0, 4.7));
}

#[test]
fn online_retraining_is_reproducible() {
    let cfg = GameConfig { online_epochs: 10, ..small_game() };
    let a = run_game(&cfg, Attack::DlJammer, None, 10).unwrap();
    let b = run_game(&cfg, Attack::DlJammer, None, 10).unwrap();
    assert_eq!(a.logs, b.logs);
    assert_eq!(a.logs.len(), cfg.test_slots);
    let once = run_game(&small_game(), Attack::DlJammer, None, 10).unwrap();
    assert_eq!(once.collection_logs, a.collection_logs);
    let policy = DefensePolicy::new(10.0, cfg.eta, Ranking::Extremeness).unwrap();
    assert!(run_game(&cfg, Attack::DlJammer, Some(&policy), 10).is_err());
}
