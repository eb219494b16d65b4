//! Monte-Carlo block-error-rate harness.
//!
//! Each point is simulated in rounds of [`CHUNKS_PER_ROUND`] fixed-size chunks.
//! Chunk `c` of point `p` always draws from stream `(seed, p, c)`, and the
//! stopping rule is only checked between rounds, so the result does not
//! depend on how many threads run the chunks. The same property makes long
//! runs resumable: [`run_bler_checkpointed`] saves per-point accumulators
//! between rounds and a restarted run continues from them.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

pub const CHUNKS_PER_ROUND: u64 = 16;

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlerSettings {
    pub min_errors: u64,
    pub max_trials: u64,
    /// Blocks per chunk.
    pub chunk: u64,
    pub seed: u64,
}

impl BlerSettings {
    pub fn new(min_errors: u64, max_trials: u64, seed: u64) -> Self {
        Self { min_errors, max_trials, chunk: 4096, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub bler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BlerPoint {
    pub fn new(snr_db: f64, trials: u64, errors: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, trials);
        let bler = if trials == 0 { 0.0 } else { errors as f64 / trials as f64 };
        Self { snr_db, trials, errors, bler, ci_low, ci_high }
    }
}

/// One error-rate curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateResult {
    pub points: Vec<BlerPoint>,
}

impl ErrorRateResult {
    /// SNR at which the curve crosses `target`, interpolating linearly in
    /// (snr_db, log10 bler). `None` if the curve never brackets the target.
    pub fn snr_at(&self, target: f64) -> Option<f64> {
        let lt = target.log10();
        for w in self.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.bler >= target && b.bler <= target && b.bler > 0.0 {
                let (la, lb) = (a.bler.log10(), b.bler.log10());
                if (la - lb).abs() < 1e-15 {
                    return Some(a.snr_db);
                }
                return Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db));
            }
        }
        None
    }

    /// Error rate at `snr_db`, interpolated in log domain between grid points.
    pub fn bler_at(&self, snr_db: f64) -> Option<f64> {
        for w in self.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.snr_db <= snr_db && snr_db <= b.snr_db && a.bler > 0.0 && b.bler > 0.0 {
                let f = (snr_db - a.snr_db) / (b.snr_db - a.snr_db);
                return Some(10f64.powf(a.bler.log10() + f * (b.bler.log10() - a.bler.log10())));
            }
        }
        None
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Simulates every grid point. `trial(snr_db, rng, blocks)` must simulate
/// `blocks` independent blocks and return how many were decoded wrongly.
pub fn run_bler<F>(grid: &[f64], settings: &BlerSettings, trial: F) -> Result<ErrorRateResult>
where
    F: Fn(f64, &mut Rng, u64) -> Result<u64> + Sync,
{
    check_inputs(grid, settings)?;
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(p, &snr)| run_point(p as u64, snr, settings, PointState::default(), &trial, |_| Ok(())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorRateResult { points })
}

/// Accumulators of one grid point between rounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    pub trials: u64,
    pub errors: u64,
    pub next_chunk: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Checkpoint {
    grid: Vec<f64>,
    settings: BlerSettings,
    points: Vec<PointState>,
}

/// [`run_bler`] that saves its accumulators to `path` after every
/// `every_rounds` rounds of any point. If `path` holds a checkpoint for the
/// same grid and settings, the run resumes from it; the result equals an
/// uninterrupted run. The file is removed on success.
pub fn run_bler_checkpointed<F>(
    grid: &[f64],
    settings: &BlerSettings,
    path: &Path,
    every_rounds: u64,
    trial: F,
) -> Result<ErrorRateResult>
where
    F: Fn(f64, &mut Rng, u64) -> Result<u64> + Sync,
{
    check_inputs(grid, settings)?;
    if every_rounds == 0 {
        return Err(Error::Config(vec!["checkpoint interval must be at least one round".into()]));
    }
    let fresh = Checkpoint { grid: grid.to_vec(), settings: *settings, points: vec![PointState::default(); grid.len()] };
    let start = match std::fs::read_to_string(path) {
        Ok(text) => {
            let saved: Checkpoint = serde_json::from_str(&text)?;
            if saved.grid != fresh.grid || saved.settings != *settings || saved.points.len() != grid.len() {
                return Err(Error::State(format!("{} belongs to a different run", path.display())));
            }
            saved
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => fresh,
        Err(e) => return Err(e.into()),
    };
    let shared = Mutex::new(start.clone());
    let save = |p: usize, st: PointState| -> Result<()> {
        let mut ck = shared.lock().map_err(|_| Error::State("checkpoint lock poisoned".into()))?;
        ck.points[p] = st;
        if (st.next_chunk / CHUNKS_PER_ROUND) % every_rounds == 0 {
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, serde_json::to_string(&*ck)?)?;
            std::fs::rename(&tmp, path)?;
        }
        Ok(())
    };
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(p, &snr)| run_point(p as u64, snr, settings, start.points[p], &trial, |st| save(p, st)))
        .collect::<Result<Vec<_>>>()?;
    std::fs::remove_file(path).or_else(|e| if e.kind() == std::io::ErrorKind::NotFound { Ok(()) } else { Err(e) })?;
    Ok(ErrorRateResult { points })
}

fn check_inputs(grid: &[f64], settings: &BlerSettings) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(vec!["empty SNR grid".into()]));
    }
    if settings.chunk == 0 || settings.max_trials == 0 {
        return Err(Error::Config(vec!["chunk and max_trials must be positive".into()]));
    }
    Ok(())
}

fn run_point<F, S>(point: u64, snr: f64, s: &BlerSettings, start: PointState, trial: &F, mut on_round: S) -> Result<BlerPoint>
where
    F: Fn(f64, &mut Rng, u64) -> Result<u64> + Sync,
    S: FnMut(PointState) -> Result<()>,
{
    let PointState { mut trials, mut errors, mut next_chunk } = start;
    while errors < s.min_errors && trials < s.max_trials {
        let remaining = s.max_trials - trials;
        let sizes: Vec<(u64, u64)> = (0..CHUNKS_PER_ROUND)
            .scan(remaining, |left, c| {
                let n = (*left).min(s.chunk);
                *left -= n;
                (n > 0).then_some((next_chunk + c, n))
            })
            .collect();
        let round = sizes
            .par_iter()
            .map(|&(c, n)| {
                let mut r = rng::stream(s.seed, rng::stream_id(&[point, c]));
                trial(snr, &mut r, n)
            })
            .collect::<Result<Vec<u64>>>()?;
        errors += round.iter().sum::<u64>();
        trials += sizes.iter().map(|x| x.1).sum::<u64>();
        next_chunk += CHUNKS_PER_ROUND;
        on_round(PointState { trials, errors, next_chunk })?;
    }
    Ok(BlerPoint::new(snr, trials, errors))
}

/// CSV with a `curve` column so several curves can share a file.
pub fn curves_to_csv(seed: u64, curves: &[(&str, &ErrorRateResult)]) -> String {
    let mut out = format!("# seed={seed}\ncurve,snr_db,trials,errors,bler,ci_low,ci_high\n");
    for (name, c) in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{name},{},{},{},{:.6e},{:.6e},{:.6e}",
                p.snr_db, p.trials, p.errors, p.bler, p.ci_low, p.ci_high
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn stops_at_min_errors_after_a_full_round() {
        let s = BlerSettings { min_errors: 10, max_trials: 1_000_000, chunk: 100, seed: 1 };
        let res = run_bler(&[0.0], &s, |_, r, n| Ok((0..n).filter(|_| r.random::<f64>() < 0.5).count() as u64)).unwrap();
        assert_eq!(res.points[0].trials, 1600);
    }

    #[test]
    fn noiseless_system_has_no_errors() {
        let s = BlerSettings { min_errors: 10, max_trials: 5000, chunk: 512, seed: 1 };
        let res = run_bler(&[0.0, 5.0], &s, |_, _, _| Ok(0)).unwrap();
        for p in res.points {
            assert_eq!((p.trials, p.errors, p.bler), (5000, 0, 0.0));
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let s = BlerSettings { min_errors: 200, max_trials: 200_000, chunk: 333, seed: 5 };
        let f = |_: f64, r: &mut Rng, n: u64| Ok((0..n).filter(|_| r.random::<f64>() < 0.01).count() as u64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_bler(&[1.0], &s, f).unwrap());
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_bler(&[1.0], &s, f).unwrap());
        assert_eq!(one, four);
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let s = BlerSettings { min_errors: 500, max_trials: 400_000, chunk: 250, seed: 9 };
        let grid = [0.0, 1.0, 2.0];
        let f = |snr: f64, r: &mut Rng, n: u64| Ok((0..n).filter(|_| r.random::<f64>() < 0.02 / (1.0 + snr)).count() as u64);
        let straight = run_bler(&grid, &s, f).unwrap();
        let calls = std::sync::atomic::AtomicU64::new(0);
        let failing = |snr: f64, r: &mut Rng, n: u64| {
            if calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst) > 100 {
                return Err(Error::State("interrupted".into()));
            }
            f(snr, r, n)
        };
        assert!(run_bler_checkpointed(&grid, &s, &path, 1, failing).is_err());
        assert!(path.exists());
        let other = BlerSettings { seed: 10, ..s };
        assert!(matches!(run_bler_checkpointed(&grid, &other, &path, 1, f), Err(Error::State(_))));
        let resumed = run_bler_checkpointed(&grid, &s, &path, 1, f).unwrap();
        assert_eq!(resumed, straight);
        assert!(!path.exists());
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let c = ErrorRateResult { points: vec![BlerPoint::new(0.0, 100, 10), BlerPoint::new(2.0, 1000, 1)] };
        assert!((c.snr_at(1e-2).unwrap() - 1.0).abs() < 1e-12);
        assert!((c.bler_at(1.0).unwrap() - 1e-2).abs() < 1e-12);
        assert_eq!(c.snr_at(1e-4), None);
    }
}
