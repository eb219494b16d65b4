//! Experiment runners. Each returns its CSV outputs in memory together with a
//! summary that the acceptance checks read.

use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::settings::*;
use crate::autoencoder::{
    eval_mimo_with_estimation_error, pool_users, train_ic_pair, train_mimo_ae, train_single_ae, Autoencoder,
    Constellation, EncodingCodebook, IcConfig,
};
use crate::baselines::{
    curves_to_csv, hamming_blocks, run_bler, svd_closed_loop_mimo, time_sharing_blocks, uncoded_bpsk_blocks,
    BlerSettings, ErrorRateResult, HammingDecoder, SvdLink,
};
use crate::channel::{draw_rayleigh_mimo, ChannelRealization};
use crate::error::Result;
use crate::game::{
    best_tau, gan_augment, metrics_to_csv, run_game, slot_logs_to_csv, tau_sweep, Attack, AugmentOutcome,
    DefensePolicy, GameOutcome, Metrics,
};
use crate::nn::ErrorReport;
use crate::rng::{self, stream_id};

/// One output file, not yet written.
#[derive(Debug, Clone)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self { name: name.into(), contents }
    }
}

#[derive(Debug, Clone)]
pub struct NamedCurve {
    pub name: String,
    pub curve: ErrorRateResult,
}

#[derive(Debug, Clone)]
pub struct IcSystem {
    pub n: usize,
    pub k: usize,
    pub ae: ErrorRateResult,
    pub time_sharing: ErrorRateResult,
    pub overlap: f64,
}

#[derive(Debug, Clone)]
pub struct ConstellationSummary {
    pub name: String,
    pub constellation: Constellation,
}

#[derive(Debug, Clone)]
pub struct PooledAttack {
    pub label: String,
    pub attack: Attack,
    pub metrics: Metrics,
}

/// What the acceptance checks need from a run.
#[derive(Debug, Clone)]
pub enum Report {
    Curves(Vec<NamedCurve>),
    Constellations(Vec<ConstellationSummary>),
    Mimo { pooled_ae: ErrorRateResult, pooled_svd: ErrorRateResult },
    EstimationError(Vec<(f64, ErrorRateResult)>),
    Ic(Vec<IcSystem>),
    Table3 {
        rows: Vec<PooledAttack>,
        best_sensing: Metrics,
        /// Wall-clock seconds of the first full game.
        single_run_secs: f64,
    },
    Defense(Vec<(f64, Metrics)>),
    Augment(Vec<AugmentOutcome>),
    Custom(Box<GameOutcome>),
}

impl Report {
    pub fn curve(&self, name: &str) -> Option<&ErrorRateResult> {
        match self {
            Report::Curves(c) => c.iter().find(|c| c.name == name).map(|c| &c.curve),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub files: Vec<OutputFile>,
}

/// Runs an experiment without touching the file system.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let seed = cfg.seed;
    match &cfg.settings {
        Settings::Fig5a(s) => fig5a(s, seed),
        Settings::Fig5b(s) => fig5b(s, seed),
        Settings::Fig6(s) => fig6(s, seed),
        Settings::Fig10a(s) => fig10a(s, seed),
        Settings::Fig10b(s) => fig10b(s, seed),
        Settings::Fig11b(s) => fig11b(s, seed),
        Settings::Table3(s) => table3(s, seed),
        Settings::Fig23a(s) => fig23a(s, seed),
        Settings::GanAugment(s) => augment(s, seed),
        Settings::Custom(s) => custom(s, seed),
    }
}

fn mc_seed(seed: u64, curve: u64) -> u64 {
    stream_id(&[seed, 0x6d63, curve])
}

fn ae_curve(ae: &mut Autoencoder, grid: &[f64], settings: &BlerSettings) -> Result<ErrorRateResult> {
    let cb = ae.codebook()?;
    run_bler(grid, settings, |snr, r, n| ae.count_errors(&cb, snr, r, n))
}

fn bpsk_curve(k: usize, grid: &[f64], settings: &BlerSettings) -> Result<ErrorRateResult> {
    run_bler(grid, settings, |snr, r, n| uncoded_bpsk_blocks(k, snr, r, n))
}

fn curves_output(seed: u64, file: &str, curves: Vec<(&str, ErrorRateResult)>) -> RunOutput {
    let refs: Vec<(&str, &ErrorRateResult)> = curves.iter().map(|(n, c)| (*n, c)).collect();
    let csv = curves_to_csv(seed, &refs);
    let named = curves.into_iter().map(|(n, c)| NamedCurve { name: n.into(), curve: c }).collect();
    RunOutput { report: Report::Curves(named), files: vec![OutputFile::new(file, csv)] }
}

fn fig5a(s: &Fig5aSettings, seed: u64) -> Result<RunOutput> {
    let grid = s.grid.points();
    let validation = BlerSettings {
        min_errors: s.validation_blocks,
        max_trials: s.validation_blocks,
        chunk: s.mc.chunk,
        seed: stream_id(&[seed, 0x7661]),
    };
    let mut log = format!("# seed={seed}\ntrain_seed,validation_ebno_db,blocks,errors,selected\n");
    let mut trained = Vec::with_capacity(s.train_seeds);
    for i in 0..s.train_seeds as u64 {
        let mut ae = train_single_ae(s.ae.clone(), seed + i)?;
        let errors = ae_curve(&mut ae, &[s.validation_ebno_db], &validation)?.points[0].errors;
        trained.push((seed + i, errors, ae));
    }
    let best = (0..trained.len()).min_by_key(|&i| trained[i].1).expect("at least one training seed");
    for (i, (train_seed, errors, _)) in trained.iter().enumerate() {
        log.push_str(&format!(
            "{train_seed},{},{},{errors},{}\n",
            s.validation_ebno_db,
            s.validation_blocks,
            u8::from(i == best)
        ));
    }
    let mut ae = trained.swap_remove(best).2;

    let bpsk = bpsk_curve(4, &grid, &s.mc.settings(mc_seed(seed, 0)))?;
    let hard = run_bler(&grid, &s.mc.settings(mc_seed(seed, 1)), |snr, r, n| {
        hamming_blocks(HammingDecoder::Hard, snr, r, n)
    })?;
    let mld = run_bler(&grid, &s.mc.settings(mc_seed(seed, 2)), |snr, r, n| {
        hamming_blocks(HammingDecoder::Mld, snr, r, n)
    })?;
    let ae74 = ae_curve(&mut ae, &grid, &s.mc.settings(mc_seed(seed, 3)))?;
    let mut out = curves_output(
        seed,
        "bler_fig5a.csv",
        vec![("bpsk44", bpsk), ("hamming_hard", hard), ("hamming_mld", mld), ("ae74", ae74)],
    );
    out.files.push(OutputFile::new("training_fig5a.csv", log));
    Ok(out)
}

fn fig5b(s: &Fig5bSettings, seed: u64) -> Result<RunOutput> {
    let grid = s.grid.points();
    let mut ae22 = train_single_ae(s.ae22.clone(), seed)?;
    let mut ae88 = train_single_ae(s.ae88.clone(), seed)?;
    let curves = vec![
        ("bpsk22", bpsk_curve(2, &grid, &s.mc.settings(mc_seed(seed, 0)))?),
        ("ae22", ae_curve(&mut ae22, &grid, &s.mc.settings(mc_seed(seed, 1)))?),
        ("bpsk88", bpsk_curve(8, &grid, &s.mc.settings(mc_seed(seed, 2)))?),
        ("ae88", ae_curve(&mut ae88, &grid, &s.mc.settings(mc_seed(seed, 3)))?),
    ];
    Ok(curves_output(seed, "bler_fig5b.csv", curves))
}

fn fig6(s: &Fig6Settings, seed: u64) -> Result<RunOutput> {
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for (name, cfg) in [("ae22", &s.ae22), ("ae24", &s.ae24), ("ae24_avg", &s.ae24_avg)] {
        let constellation = train_single_ae(cfg.clone(), seed)?.constellation()?;
        files.push(OutputFile::new(format!("constellation_{name}.csv"), constellation.to_csv(seed)));
        summaries.push(ConstellationSummary { name: name.into(), constellation });
    }
    Ok(RunOutput { report: Report::Constellations(summaries), files })
}

fn channel_rows(out: &mut String, draw: u64, ch: &ChannelRealization) {
    for r in 0..ch.rx() {
        for c in 0..ch.tx() {
            let h = ch.h[(r, c)];
            out.push_str(&format!("{draw},{r},{c},{:.9},{:.9}\n", h.re, h.im));
        }
    }
}

fn mimo_channel(n_t: usize, n_r: usize, seed: u64) -> Result<ChannelRealization> {
    draw_rayleigh_mimo(n_t, n_r, &mut rng::stream(seed, 0x6d))
}

fn pool(curves: &[ErrorRateResult]) -> ErrorRateResult {
    let mut pooled = curves[0].clone();
    for (i, p) in pooled.points.iter_mut().enumerate() {
        let trials = curves.iter().map(|c| c.points[i].trials).sum();
        let errors = curves.iter().map(|c| c.points[i].errors).sum();
        *p = crate::baselines::BlerPoint::new(p.snr_db, trials, errors);
    }
    pooled
}

fn fig10a(s: &Fig10aSettings, seed: u64) -> Result<RunOutput> {
    let grid = s.grid.points();
    let fixed = |curve: u64| BlerSettings {
        min_errors: s.trials_per_point,
        max_trials: s.trials_per_point,
        chunk: 4096,
        seed: mc_seed(seed, curve),
    };
    let mut channels = format!("# seed={seed}\ndraw,row,col,re,im\n");
    let mut ae_curves = Vec::with_capacity(s.draws);
    let mut svd_curves = Vec::with_capacity(s.draws);
    for d in 0..s.draws as u64 {
        let ch = mimo_channel(s.mimo.n_t, s.mimo.n_r, seed + d)?;
        channel_rows(&mut channels, d, &ch);
        let link = SvdLink::new(ch.h.clone())?;
        svd_curves.push(run_bler(&grid, &fixed(2 * d), |snr, r, n| svd_closed_loop_mimo(&link, snr, r, n))?);
        let mut ae = train_mimo_ae(s.mimo.clone(), ch, seed + d)?;
        let cb = ae.codebook()?;
        ae_curves.push(run_bler(&grid, &fixed(2 * d + 1), |snr, r, n| ae.count_errors(&cb, snr, 0.0, r, n))?);
    }
    let pooled_svd = pool(&svd_curves);
    let pooled_ae = pool(&ae_curves);
    let names: Vec<String> = (0..s.draws).flat_map(|d| [format!("svd_draw{d}"), format!("ae_draw{d}")]).collect();
    let mut refs: Vec<(&str, &ErrorRateResult)> = vec![("svd", &pooled_svd), ("ae", &pooled_ae)];
    for d in 0..s.draws {
        refs.push((&names[2 * d], &svd_curves[d]));
        refs.push((&names[2 * d + 1], &ae_curves[d]));
    }
    let files = vec![
        OutputFile::new("ser_fig10a.csv", curves_to_csv(seed, &refs)),
        OutputFile::new("channels_fig10a.csv", channels),
    ];
    Ok(RunOutput { report: Report::Mimo { pooled_ae, pooled_svd }, files })
}

fn fig10b(s: &Fig10bSettings, seed: u64) -> Result<RunOutput> {
    let grid = s.grid.points();
    let ch = mimo_channel(s.mimo.n_t, s.mimo.n_r, seed + s.draw)?;
    let h = ch.h.clone();
    let codebook = EncodingCodebook { entries: vec![train_mimo_ae(s.mimo.clone(), ch, seed + s.draw)?] };
    let mut curves = Vec::with_capacity(s.est_vars.len());
    for (i, &var) in s.est_vars.iter().enumerate() {
        let c = eval_mimo_with_estimation_error(&codebook, &h, var, &grid, &s.mc.settings(mc_seed(seed, i as u64)))?;
        curves.push((var, c));
    }
    let names: Vec<String> = s.est_vars.iter().map(|v| format!("est_var_{v}")).collect();
    let refs: Vec<(&str, &ErrorRateResult)> = names.iter().zip(&curves).map(|(n, (_, c))| (n.as_str(), c)).collect();
    let files = vec![OutputFile::new("ser_fig10b.csv", curves_to_csv(seed, &refs))];
    Ok(RunOutput { report: Report::EstimationError(curves), files })
}

fn fig11b(s: &Fig11bSettings, seed: u64) -> Result<RunOutput> {
    let grid = s.grid.points();
    let mut systems = Vec::with_capacity(s.systems.len());
    let mut summary = format!("# seed={seed}\nn,k,direction_overlap,final_alpha\n");
    for (i, &[n, k]) in s.systems.iter().enumerate() {
        let cfg = IcConfig { train_ebno_db: s.train_ebno_db, schedule: s.schedule.clone(), ..IcConfig::new(n, k) };
        let mut pair = train_ic_pair(cfg, seed + i as u64)?;
        let cbs = pair.codebooks()?;
        let base = 3 * i as u64;
        let users: Vec<ErrorRateResult> = (0..2)
            .map(|u| {
                run_bler(&grid, &s.mc.settings(mc_seed(seed, base + u as u64)), |snr, r, b| {
                    pair.count_errors(&cbs, u, snr, r, b)
                })
            })
            .collect::<Result<_>>()?;
        let time_sharing = run_bler(&grid, &s.mc.settings(mc_seed(seed, base + 2)), |snr, r, b| {
            time_sharing_blocks(n, k, snr, r, b)
        })?;
        let overlap = pair.direction_overlap()?;
        let alpha = pair.alpha_trace.last().copied().unwrap_or(0.5);
        summary.push_str(&format!("{n},{k},{overlap:.6},{alpha:.6}\n"));
        systems.push(IcSystem { n, k, ae: pool_users(&users[0], &users[1]), time_sharing, overlap });
    }
    let names: Vec<String> =
        systems.iter().flat_map(|s| [format!("ae_{}_{}", s.n, s.k), format!("ts_{}_{}", s.n, s.k)]).collect();
    let refs: Vec<(&str, &ErrorRateResult)> = systems
        .iter()
        .enumerate()
        .flat_map(|(i, s)| [(names[2 * i].as_str(), &s.ae), (names[2 * i + 1].as_str(), &s.time_sharing)])
        .collect();
    let files = vec![
        OutputFile::new("bler_fig11b.csv", curves_to_csv(seed, &refs)),
        OutputFile::new("ic_fig11b.csv", summary),
    ];
    Ok(RunOutput { report: Report::Ic(systems), files })
}

fn sum_metrics(ms: impl IntoIterator<Item = Metrics>) -> Metrics {
    let (mut slots, mut attempts, mut successes) = (0, 0, 0);
    for m in ms {
        slots += m.slots;
        attempts += m.attempts;
        successes += m.successes;
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Metrics { slots, attempts, successes, throughput: ratio(successes, slots), success_ratio: ratio(successes, attempts) }
}

fn errors_row(r: &ErrorReport) -> String {
    format!("{:.6},{:.6}", r.e_md, r.e_fa)
}

struct Replicate {
    seed: u64,
    games: Vec<GameOutcome>,
    best_tau: f64,
    best: GameOutcome,
    secs: f64,
}

fn table3(s: &Table3Settings, seed: u64) -> Result<RunOutput> {
    let mut attacks = vec![Attack::None, Attack::DlJammer];
    attacks.extend(s.taus.iter().map(|&tau| Attack::SensingJammer { tau }));
    let taus = s.tau_search.points();
    let reps: Vec<Replicate> = (0..s.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let rs = seed + r;
            let start = Instant::now();
            let mut games = Vec::with_capacity(attacks.len());
            for &a in &attacks {
                games.push(run_game(&s.game, a, None, rs)?);
            }
            let secs = start.elapsed().as_secs_f64() / attacks.len() as f64;
            let sweep = tau_sweep(&games[0].collection_logs, &taus);
            let tau = best_tau(&sweep).expect("nonempty threshold grid");
            let best = run_game(&s.game, Attack::SensingJammer { tau }, None, rs)?;
            Ok(Replicate { seed: rs, games, best_tau: tau, best, secs })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<PooledAttack> = attacks
        .iter()
        .enumerate()
        .map(|(i, &attack)| PooledAttack {
            label: attack.to_string(),
            attack,
            metrics: sum_metrics(reps.iter().map(|r| r.games[i].metrics)),
        })
        .collect();
    let best_sensing = sum_metrics(reps.iter().map(|r| r.best.metrics));

    let table: Vec<(String, Metrics)> = rows.iter().map(|r| (r.label.clone(), r.metrics)).collect();
    let mut per_rep =
        format!("# seed={seed}\nreplicate_seed,attack_type,slots,attempts,successes,throughput,success_ratio\n");
    let mut errors = format!("# seed={seed}\nreplicate_seed,attack_type,t_md,t_fa,a_md,a_fa,jam_md,jam_fa\n");
    let mut best = format!("# seed={seed}\nreplicate_seed,best_tau,a_md,a_fa,throughput,success_ratio\n");
    for r in &reps {
        for g in &r.games {
            let m = g.metrics;
            per_rep.push_str(&format!(
                "{},{},{},{},{},{:.6},{:.6}\n",
                r.seed, g.attack, m.slots, m.attempts, m.successes, m.throughput, m.success_ratio
            ));
            errors.push_str(&format!(
                "{},{},{},{},{}\n",
                r.seed,
                g.attack,
                errors_row(&g.t_errors),
                errors_row(&g.a_errors),
                errors_row(&g.jam_errors)
            ));
        }
        let sweep = tau_sweep(&r.games[0].collection_logs, &[r.best_tau]);
        best.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            r.seed,
            r.best_tau,
            errors_row(&sweep[0].1),
            r.best.metrics.throughput,
            r.best.metrics.success_ratio
        ));
    }
    let first = &reps[0];
    let mut sweep_csv = format!("# seed={}\ntau,e_md,e_fa\n", first.seed);
    for (tau, e) in tau_sweep(&first.games[0].collection_logs, &taus) {
        sweep_csv.push_str(&format!("{tau},{}\n", errors_row(&e)));
    }
    let mut files = vec![
        OutputFile::new("metrics_table3.csv", metrics_to_csv(seed, &table)),
        OutputFile::new("replicates_table3.csv", per_rep),
        OutputFile::new("classifier_errors_table3.csv", errors),
        OutputFile::new("best_sensing_table3.csv", best),
        OutputFile::new("tau_sweep_table3.csv", sweep_csv),
    ];
    for g in &first.games {
        let tag = match g.attack {
            Attack::None => "none".to_string(),
            Attack::DlJammer => "dl_jammer".to_string(),
            Attack::SensingJammer { tau } => format!("sensing_jammer_tau{tau}"),
        };
        files.push(OutputFile::new(format!("slots_table3_{tag}.csv"), slot_logs_to_csv(first.seed, &g.logs)));
    }
    let report = Report::Table3 { rows, best_sensing, single_run_secs: first.secs };
    Ok(RunOutput { report, files })
}

fn fig23a(s: &Fig23aSettings, seed: u64) -> Result<RunOutput> {
    let mut pooled = Vec::with_capacity(s.p_d.len());
    let mut per_rep = format!("# seed={seed}\np_d,replicate_seed,slots,attempts,successes,throughput,success_ratio\n");
    for &p_d in &s.p_d {
        let policy = DefensePolicy::new(p_d, s.game.eta, s.game.defense_ranking)?;
        let games: Vec<Metrics> = (0..s.replicates as u64)
            .into_par_iter()
            .map(|r| run_game(&s.game, Attack::DlJammer, Some(&policy), seed + r).map(|g| g.metrics))
            .collect::<Result<_>>()?;
        for (r, m) in games.iter().enumerate() {
            per_rep.push_str(&format!(
                "{p_d},{},{},{},{},{:.6},{:.6}\n",
                seed + r as u64,
                m.slots,
                m.attempts,
                m.successes,
                m.throughput,
                m.success_ratio
            ));
        }
        pooled.push((p_d, sum_metrics(games)));
    }
    let mut table = format!("# seed={seed}\np_d,throughput,success_ratio,slots,attempts,successes\n");
    for (p_d, m) in &pooled {
        table.push_str(&format!(
            "{p_d},{:.6},{:.6},{},{},{}\n",
            m.throughput, m.success_ratio, m.slots, m.attempts, m.successes
        ));
    }
    let files = vec![
        OutputFile::new("throughput_fig23a.csv", table),
        OutputFile::new("replicates_fig23a.csv", per_rep),
    ];
    Ok(RunOutput { report: Report::Defense(pooled), files })
}

fn augment(s: &GanAugmentSettings, seed: u64) -> Result<RunOutput> {
    let outcomes: Vec<AugmentOutcome> = (0..s.replicates as u64)
        .into_par_iter()
        .map(|r| gan_augment(&s.game, &s.augment, seed + r))
        .collect::<Result<_>>()?;
    let mut table = format!("# seed={seed}\nreplicate_seed,real_md,real_fa,augmented_md,augmented_fa,kl_class0,kl_class1\n");
    for (r, o) in outcomes.iter().enumerate() {
        table.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            seed + r as u64,
            errors_row(&o.real_only),
            errors_row(&o.augmented),
            o.kl[0],
            o.kl[1]
        ));
    }
    let mut losses = format!("# seed={seed}\niteration,d_loss,g_loss\n");
    for (i, (d, g)) in outcomes[0].d_loss.iter().zip(&outcomes[0].g_loss).enumerate() {
        losses.push_str(&format!("{i},{d:.6},{g:.6}\n"));
    }
    let files = vec![OutputFile::new("gan_augment.csv", table), OutputFile::new("gan_losses.csv", losses)];
    Ok(RunOutput { report: Report::Augment(outcomes), files })
}

fn custom(s: &CustomSettings, seed: u64) -> Result<RunOutput> {
    let attack = match s.attack {
        AttackKind::None => Attack::None,
        AttackKind::DlJammer => Attack::DlJammer,
        AttackKind::SensingJammer => Attack::SensingJammer { tau: s.tau },
    };
    let policy =
        if s.p_d > 0.0 { Some(DefensePolicy::new(s.p_d, s.game.eta, s.game.defense_ranking)?) } else { None };
    let g = run_game(&s.game, attack, policy.as_ref(), seed)?;
    let mut errors = format!("# seed={seed}\nclassifier,e_md,e_fa\n");
    for (name, e) in [("transmitter", &g.t_errors), ("adversary", &g.a_errors), ("jamming", &g.jam_errors)] {
        errors.push_str(&format!("{name},{}\n", errors_row(e)));
    }
    let files = vec![
        OutputFile::new("metrics_custom.csv", metrics_to_csv(seed, &[(attack.to_string(), g.metrics)])),
        OutputFile::new("classifier_errors_custom.csv", errors),
        OutputFile::new("slots_custom.csv", slot_logs_to_csv(seed, &g.logs)),
    ];
    Ok(RunOutput { report: Report::Custom(Box::new(g)), files })
}
