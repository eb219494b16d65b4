//! Command-line front end: train models, evaluate error rates, play the
//! spectrum game, and reproduce the reference experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dlphy::autoencoder::{
    train_ic_pair, train_mimo_ae, train_single_ae, AeConfig, Autoencoder, EncodingCodebook, IcConfig, IcPair,
    MimoAeConfig, PowerConstraint,
};
use dlphy::baselines::{
    curves_to_csv, hamming_blocks, run_bler_checkpointed, uncoded_bpsk_blocks, BlerSettings, HammingDecoder,
};
use dlphy::channel::draw_rayleigh_mimo;
use dlphy::harness::{
    self, check_files, evaluate, read_manifest, run_and_write, verify_manifest, Experiment, ExperimentConfig,
    THREADS_ENV,
};
use dlphy::harness::settings::Grid;
use dlphy::rng;

#[derive(Parser)]
#[command(name = "dlphy", version, about = "Learned physical-layer transceivers and an adversarial spectrum game")]
struct Cli {
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Config file (TOML); defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set game.test_slots=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate the acceptance criteria of the experiment and exit nonzero
    /// if any fails.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct Out {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Power {
    Energy,
    AvgPower,
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Bpsk,
    HammingHard,
    HammingMld,
    Ae,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Single,
    Ic,
}

#[derive(Subcommand)]
enum Command {
    /// Run a reference experiment and write its CSVs and manifest.
    Reproduce {
        experiment: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check a config file and print it with every default filled in.
    ValidateConfig { path: PathBuf },
    /// Check a finished run: on-disk checksums, then an in-memory rerun.
    Verify {
        dir: PathBuf,
        /// Only compare files on disk with the manifest.
        #[arg(long)]
        no_rerun: bool,
    },
    /// Train a single-user (n, k) autoencoder.
    TrainAe {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Power::Energy)]
        power: Power,
        #[arg(long, default_value_t = 7.0)]
        train_ebno: f64,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Block error rate of one system over an Eb/N0 grid.
    EvalBler {
        #[arg(long, value_enum)]
        system: System,
        /// Information bits of uncoded BPSK.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Autoencoder saved by `train-ae`.
        #[arg(long, required_if_eq("system", "ae"))]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = 8.0)]
        stop: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 200)]
        min_errors: u64,
        #[arg(long, default_value_t = 1 << 22)]
        max_trials: u64,
        /// Resumable progress file, saved every few rounds.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Train a 2x2 MIMO autoencoder on one fixed Rayleigh draw.
    TrainMimo {
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Train a two-user interference-channel autoencoder pair.
    TrainIc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Play one spectrum game (the `custom` experiment).
    RunGame {
        #[arg(long)]
        attack: Option<String>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        p_d: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train the conditional GAN and compare augmented and real-only
    /// adversary classifiers (the `gan-augment` experiment).
    TrainGan {
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write the constellation of a saved model as CSV.
    ExportConstellation {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelKind::Single)]
        kind: ModelKind,
        #[command(flatten)]
        out: Out,
    },
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn build_config(experiment: Experiment, run: &RunArgs, extra: &[String]) -> Result<ExperimentConfig> {
    let mut cfg = match &run.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != experiment {
                bail!("{} configures `{}`, not `{experiment}`", path.display(), cfg.experiment);
            }
            cfg
        }
        None => ExperimentConfig::new(experiment, 0, PathBuf::from("results").join(experiment.name())),
    };
    let mut sets = extra.to_vec();
    sets.extend(run.set.iter().cloned());
    if !sets.is_empty() {
        cfg.set(&sets)?;
    }
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &run.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

/// Runs and writes an experiment; `Ok(false)` when `--check` found a failure.
fn reproduce(cfg: &ExperimentConfig, check: bool) -> Result<bool> {
    log::info!("running {} with seed {} on {} threads", cfg.experiment, cfg.seed, harness::worker_threads());
    let (out, manifest) = run_and_write(cfg)?;
    for f in &manifest.files {
        println!("wrote {} ({} bytes, sha256 {})", cfg.output_dir.join(&f.name).display(), f.bytes, f.sha256);
    }
    println!("finished in {:.1} s", manifest.wall_clock_secs);
    if !check {
        return Ok(true);
    }
    let results = evaluate(&out);
    if results.is_empty() {
        println!("no acceptance criteria apply to {}", cfg.experiment);
    }
    for r in &results {
        println!("{r}");
    }
    Ok(results.iter().all(|r| r.passed))
}

fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && stop >= start) {
        bail!("need step > 0 and stop >= start");
    }
    Ok(Grid::new(start, stop, step).points())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        harness::configure_threads(t)?;
    }
    match cli.command {
        Command::Reproduce { experiment, run } => {
            let exp: Experiment = experiment.parse()?;
            reproduce(&build_config(exp, &run, &[])?, run.check)
        }
        Command::ValidateConfig { path } => {
            let cfg = ExperimentConfig::load(&path)?;
            print!("{}", cfg.to_toml());
            Ok(true)
        }
        Command::Verify { dir, no_rerun } => {
            let manifest = read_manifest(&dir)?;
            let mut bad = check_files(&dir, &manifest);
            if !no_rerun {
                bad.extend(verify_manifest(&manifest)?);
            }
            for b in &bad {
                println!("{b}");
            }
            if bad.is_empty() {
                println!("{} files reproduce their checksums", manifest.files.len());
            }
            Ok(bad.is_empty())
        }
        Command::TrainAe { n, k, power, train_ebno, steps, out } => {
            let power = match power {
                Power::Energy => PowerConstraint::Energy,
                Power::AvgPower => PowerConstraint::AvgPower,
            };
            let mut cfg = AeConfig { power, train_ebno_db: train_ebno, ..AeConfig::new(n, k) };
            cfg.schedule.steps = steps.unwrap_or(cfg.schedule.steps);
            let mut ae = train_single_ae(cfg, out.seed)?;
            std::fs::create_dir_all(&out.out)?;
            let model = out.out.join(format!("ae_{n}_{k}.json"));
            ae.save(&model)?;
            println!("wrote {}", model.display());
            write(&out.out, &format!("constellation_ae_{n}_{k}.csv"), &ae.constellation()?.to_csv(out.seed))?;
            Ok(true)
        }
        Command::EvalBler { system, k, model, start, stop, step, min_errors, max_trials, checkpoint, out } => {
            let grid = grid(start, stop, step)?;
            let settings = BlerSettings { min_errors, max_trials, chunk: 4096, seed: out.seed };
            let ckpt = checkpoint.unwrap_or_else(|| std::env::temp_dir().join(format!("dlphy-bler-{}.json", std::process::id())));
            let (name, curve) = match system {
                System::Bpsk => (
                    format!("bpsk{k}{k}"),
                    run_bler_checkpointed(&grid, &settings, &ckpt, 4, |snr, r, b| uncoded_bpsk_blocks(k, snr, r, b))?,
                ),
                System::HammingHard => (
                    "hamming_hard".into(),
                    run_bler_checkpointed(&grid, &settings, &ckpt, 4, |snr, r, b| {
                        hamming_blocks(HammingDecoder::Hard, snr, r, b)
                    })?,
                ),
                System::HammingMld => (
                    "hamming_mld".into(),
                    run_bler_checkpointed(&grid, &settings, &ckpt, 4, |snr, r, b| {
                        hamming_blocks(HammingDecoder::Mld, snr, r, b)
                    })?,
                ),
                System::Ae => {
                    let path = model.expect("clap requires --model for ae");
                    let mut ae = Autoencoder::load(&path).with_context(|| format!("cannot load {}", path.display()))?;
                    let cb = ae.codebook()?;
                    let name = format!("ae{}{}", ae.cfg.n, ae.cfg.k);
                    (name, run_bler_checkpointed(&grid, &settings, &ckpt, 4, |snr, r, b| ae.count_errors(&cb, snr, r, b))?)
                }
            };
            write(&out.out, &format!("bler_{name}.csv"), &curves_to_csv(out.seed, &[(&name, &curve)]))?;
            Ok(true)
        }
        Command::TrainMimo { steps, out } => {
            let mut cfg = MimoAeConfig::default();
            cfg.schedule.steps = steps.unwrap_or(cfg.schedule.steps);
            let ch = draw_rayleigh_mimo(cfg.n_t, cfg.n_r, &mut rng::stream(out.seed, 0x6d))?;
            let ae = train_mimo_ae(cfg, ch, out.seed)?;
            println!("final training loss {:.5}", ae.loss_trace.last().copied().unwrap_or(f64::NAN));
            std::fs::create_dir_all(&out.out)?;
            let path = out.out.join("mimo_codebook.json");
            EncodingCodebook { entries: vec![ae] }.save(&path)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::TrainIc { n, k, steps, out } => {
            let mut cfg = IcConfig::new(n, k);
            cfg.schedule.steps = steps.unwrap_or(cfg.schedule.steps);
            let mut pair = train_ic_pair(cfg, out.seed)?;
            println!("direction overlap {:.4}", pair.direction_overlap()?);
            std::fs::create_dir_all(&out.out)?;
            let path = out.out.join(format!("ic_{n}_{k}.json"));
            pair.save(&path)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::RunGame { attack, tau, p_d, run } => {
            let mut sets = Vec::new();
            if let Some(a) = attack {
                sets.push(format!("attack={a}"));
            }
            if let Some(t) = tau {
                sets.push(format!("tau={t:?}"));
            }
            if let Some(p) = p_d {
                sets.push(format!("p_d={p:?}"));
            }
            reproduce(&build_config(Experiment::Custom, &run, &sets)?, run.check)
        }
        Command::TrainGan { replicates, run } => {
            let sets = [format!("replicates={replicates}")];
            reproduce(&build_config(Experiment::GanAugment, &run, &sets)?, run.check)
        }
        Command::ExportConstellation { model, kind, out } => {
            match kind {
                ModelKind::Single => {
                    let mut ae = Autoencoder::load(&model).with_context(|| format!("cannot load {}", model.display()))?;
                    let name = format!("constellation_ae_{}_{}.csv", ae.cfg.n, ae.cfg.k);
                    write(&out.out, &name, &ae.constellation()?.to_csv(out.seed))?;
                }
                ModelKind::Ic => {
                    let mut pair = IcPair::load(&model).with_context(|| format!("cannot load {}", model.display()))?;
                    let (n, k) = (pair.cfg.n, pair.cfg.k);
                    for (u, c) in pair.constellations()?.iter().enumerate() {
                        write(&out.out, &format!("constellation_ic_{n}_{k}_user{}.csv", u + 1), &c.to_csv(out.seed))?;
                    }
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            match e.downcast_ref::<dlphy::Error>() {
                Some(dlphy::Error::Config(list)) => {
                    eprintln!("error: invalid configuration");
                    for item in list {
                        eprintln!("  - {item}");
                    }
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(2)
        }
    }
}
