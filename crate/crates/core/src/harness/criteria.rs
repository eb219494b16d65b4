//! Acceptance checks evaluated on a finished run.

use std::fmt;

use super::experiments::{Report, RunOutput};
use crate::baselines::analytic::{bpsk_block_error, hamming_hard_block_error};
use crate::baselines::{BlerPoint, ErrorRateResult};
use crate::game::Attack;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn new(id: u32, name: &str, passed: bool, detail: String) -> Self {
        Self { id, name: name.into(), passed, detail }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] criterion {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn point_at(c: &ErrorRateResult, snr: f64) -> Option<&BlerPoint> {
    c.points.iter().find(|p| (p.snr_db - snr).abs() < 1e-9)
}

fn within_ci(c: &ErrorRateResult, snr: f64, expected: f64) -> (bool, String) {
    match point_at(c, snr) {
        Some(p) => (
            p.ci_low <= expected && expected <= p.ci_high,
            format!("{snr} dB: {:.4e} in [{:.4e}, {:.4e}]?", expected, p.ci_low, p.ci_high),
        ),
        None => (false, format!("{snr} dB not on the grid")),
    }
}

/// Largest `|snr_a - snr_b|` at the given error-rate targets, or a message
/// naming a target one of the curves never reaches.
fn max_gap(a: &ErrorRateResult, b: &ErrorRateResult, targets: &[f64]) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for &t in targets {
        match (a.snr_at(t), b.snr_at(t)) {
            (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
            _ => return Err(format!("a curve does not reach {t:e}")),
        }
    }
    Ok(worst)
}

/// Simulated Hamming hard-decision and uncoded BPSK(4,4) curves against the
/// closed-form error rates.
pub fn coding_oracle(hamming_hard: &ErrorRateResult, bpsk44: &ErrorRateResult) -> CriterionResult {
    let mut ok = true;
    let mut parts = Vec::new();
    for snr in [0.0, 4.0, 8.0] {
        let (p, d) = within_ci(hamming_hard, snr, hamming_hard_block_error(snr));
        ok &= p;
        parts.push(format!("hamming {d}"));
    }
    let (p, d) = within_ci(bpsk44, 0.0, bpsk_block_error(4, 0.0));
    ok &= p;
    parts.push(format!("bpsk44 {d}"));
    CriterionResult::new(2, "coding oracle", ok, parts.join("; "))
}

fn curve<'a>(out: &'a Report, name: &str) -> Option<&'a ErrorRateResult> {
    out.curve(name)
}

fn missing(id: u32, name: &str) -> CriterionResult {
    CriterionResult::new(id, name, false, "required curves missing from the run".into())
}

fn fig5a(report: &Report) -> Vec<CriterionResult> {
    let mut v = Vec::new();
    match (curve(report, "hamming_hard"), curve(report, "bpsk44")) {
        (Some(h), Some(b)) => v.push(coding_oracle(h, b)),
        _ => v.push(missing(2, "coding oracle")),
    }
    let name = "AE(7,4) vs Hamming MLD";
    match (curve(report, "ae74"), curve(report, "hamming_mld")) {
        (Some(ae), Some(mld)) => v.push(match max_gap(ae, mld, &[1e-2, 1e-3, 1e-4]) {
            Ok(g) => CriterionResult::new(3, name, g <= 0.5, format!("largest gap over 1e-2..1e-4 is {g:.3} dB (limit 0.5)")),
            Err(e) => CriterionResult::new(3, name, false, e),
        }),
        _ => v.push(missing(3, name)),
    }
    v
}

fn fig5b(report: &Report) -> Vec<CriterionResult> {
    let name = "AE(2,2) ~ BPSK, AE(8,8) beats BPSK";
    let (Some(ae22), Some(b22), Some(ae88), Some(b88)) =
        (curve(report, "ae22"), curve(report, "bpsk22"), curve(report, "ae88"), curve(report, "bpsk88"))
    else {
        return vec![missing(4, name)];
    };
    let small = max_gap(ae22, b22, &[1e-2, 1e-3]);
    let large = match (ae88.snr_at(1e-3), b88.snr_at(1e-3)) {
        (Some(a), Some(b)) => Ok(b - a),
        _ => Err("an (8,8) curve does not reach 1e-3".to_string()),
    };
    let (passed, detail) = match (small, large) {
        (Ok(g), Ok(gain)) => (
            g <= 0.2 && gain > 0.0,
            format!("(2,2) gap {g:.3} dB (limit 0.2); (8,8) gain at 1e-3 is {gain:.3} dB (must be > 0)"),
        ),
        (Err(e), _) | (_, Err(e)) => (false, e),
    };
    vec![CriterionResult::new(4, name, passed, detail)]
}

fn fig6(report: &Report) -> Vec<CriterionResult> {
    let Report::Constellations(cs) = report else { return vec![missing(5, "constellation geometry")] };
    let find = |n: &str| cs.iter().find(|c| c.name == n).map(|c| &c.constellation);
    let (Some(qpsk), Some(ring)) = (find("ae22"), find("ae24")) else {
        return vec![missing(5, "constellation geometry")];
    };
    let spread22 = qpsk.amplitude_spread(0);
    let gaps = qpsk.angular_gaps_deg(0);
    let worst_gap = gaps.iter().map(|g| (g - 90.0).abs()).fold(0.0, f64::max);
    let spread24 = ring.amplitude_spread(0);
    let passed = qpsk.messages() == 4 && spread22 < 0.05 && worst_gap <= 5.0 && spread24 < 0.05;
    let detail = format!(
        "(2,2): {} points, spread {:.2}%, gaps off 90 by at most {worst_gap:.2} deg; (2,4): spread {:.2}%",
        qpsk.messages(),
        100.0 * spread22,
        100.0 * spread24
    );
    vec![CriterionResult::new(5, "constellation geometry", passed, detail)]
}

fn fig10a(report: &Report) -> Vec<CriterionResult> {
    let name = "MIMO AE vs SVD";
    let Report::Mimo { pooled_ae, pooled_svd } = report else { return vec![missing(6, name)] };
    let r = match (pooled_ae.snr_at(1e-2), pooled_svd.snr_at(1e-2)) {
        (Some(a), Some(s)) => CriterionResult::new(
            6,
            name,
            s - a >= 5.0,
            format!("gain at SER 1e-2 is {:.2} dB (AE {a:.2}, SVD {s:.2}; floor 5, reported >10)", s - a),
        ),
        _ => CriterionResult::new(6, name, false, "a curve does not reach 1e-2".into()),
    };
    vec![r]
}

/// `SER(v_i) <= SER(v_j)` for `v_i < v_j`, violated only where the intervals
/// separate in the wrong direction.
pub fn ordered_by_variance(curves: &[(f64, ErrorRateResult)]) -> (bool, String) {
    let mut sorted: Vec<&(f64, ErrorRateResult)> = curves.iter().filter(|(v, _)| *v > 0.0).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut violations = Vec::new();
    for w in sorted.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        for (p, q) in lo.1.points.iter().zip(&hi.1.points) {
            if p.ci_low > q.ci_high {
                violations.push(format!("{} dB: var {} above var {}", p.snr_db, lo.0, hi.0));
            }
        }
    }
    let names: Vec<String> = sorted.iter().map(|(v, _)| v.to_string()).collect();
    if violations.is_empty() {
        (true, format!("SER ordered over variances {} at every point", names.join(" <= ")))
    } else {
        (false, violations.join("; "))
    }
}

fn fig10b(report: &Report) -> Vec<CriterionResult> {
    let Report::EstimationError(curves) = report else { return vec![missing(7, "estimation-error ordering")] };
    let (passed, detail) = ordered_by_variance(curves);
    vec![CriterionResult::new(7, "estimation-error ordering", passed, detail)]
}

fn fig11b(report: &Report) -> Vec<CriterionResult> {
    let name = "interference channel";
    let Report::Ic(systems) = report else { return vec![missing(8, name)] };
    let mut ok = true;
    let mut parts = Vec::new();
    for s in systems {
        match (s.n, s.k) {
            (1, 1) | (2, 2) => match max_gap(&s.ae, &s.time_sharing, &[1e-2, 1e-3]) {
                Ok(g) => {
                    ok &= g <= 0.3;
                    parts.push(format!("({},{}) gap {g:.3} dB (limit 0.3)", s.n, s.k));
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("({},{}) {e}", s.n, s.k));
                }
            },
            (4, 8) => match (s.ae.snr_at(1e-3), s.time_sharing.snr_at(1e-3)) {
                (Some(a), Some(t)) => {
                    ok &= t - a >= 0.5;
                    parts.push(format!("(4,8) gain at 1e-3 {:.3} dB (floor 0.5)", t - a));
                }
                _ => {
                    ok = false;
                    parts.push("(4,8) a curve does not reach 1e-3".into());
                }
            },
            _ => {}
        }
        if (s.n, s.k) == (1, 1) {
            ok &= s.overlap < 0.2;
            parts.push(format!("(1,1) direction overlap {:.3} (limit 0.2)", s.overlap));
        }
    }
    let required = [(1, 1), (2, 2), (4, 8)];
    if !required.iter().all(|r| systems.iter().any(|s| (s.n, s.k) == *r)) {
        ok = false;
        parts.push("systems (1,1), (2,2) and (4,8) are all required".into());
    }
    vec![CriterionResult::new(8, name, ok, parts.join("; "))]
}

fn table3(report: &Report) -> Vec<CriterionResult> {
    let name = "spectrum game";
    let Report::Table3 { rows, best_sensing, single_run_secs } = report else { return vec![missing(9, name)] };
    let find = |pred: &dyn Fn(&Attack) -> bool| rows.iter().find(|r| pred(&r.attack)).map(|r| r.metrics);
    let none = find(&|a| *a == Attack::None);
    let dl = find(&|a| *a == Attack::DlJammer);
    let tau = |t: f64| move |a: &Attack| matches!(a, Attack::SensingJammer { tau } if (tau - t).abs() < 1e-9);
    let (Some(none), Some(dl), Some(t34), Some(t47)) = (none, dl, find(&tau(3.4)), find(&tau(4.7))) else {
        return vec![missing(9, name)];
    };
    let checks = [
        ((none.throughput - 0.766).abs() <= 0.05, format!("no-attack throughput {:.3} (0.766 +- 0.05)", none.throughput)),
        (none.success_ratio >= 0.9, format!("no-attack success {:.1}% (>= 90%)", 100.0 * none.success_ratio)),
        (dl.success_ratio < 0.15, format!("DL jammer success {:.1}% (< 15%)", 100.0 * dl.success_ratio)),
        (
            dl.throughput < best_sensing.throughput,
            format!("DL throughput {:.3} < best sensing jammer {:.3}", dl.throughput, best_sensing.throughput),
        ),
        (
            t47.throughput >= 1.5 * t34.throughput,
            format!("tau 4.7 throughput {:.3} >= 1.5 x tau 3.4 {:.3}", t47.throughput, t34.throughput),
        ),
        (*single_run_secs < 600.0, format!("one run {single_run_secs:.1} s (< 600)")),
    ];
    let passed = checks.iter().all(|c| c.0);
    let detail = checks.iter().map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "FAILED " })).collect::<Vec<_>>();
    vec![CriterionResult::new(9, name, passed, detail.join("; "))]
}

fn augment(report: &Report) -> Vec<CriterionResult> {
    let name = "GAN augmentation";
    let Report::Augment(outcomes) = report else { return vec![missing(10, name)] };
    let n = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&crate::game::AugmentOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let real = mean(&|o| o.real_only.max());
    let aug = mean(&|o| o.augmented.max());
    let kl0 = mean(&|o| o.kl[0]);
    let kl1 = mean(&|o| o.kl[1]);
    let passed = aug < real && kl0 <= 0.3 && kl1 <= 0.3;
    let detail = format!(
        "mean max error {real:.3} real-only vs {aug:.3} augmented (must drop); mean KL {kl0:.3} / {kl1:.3} (limit 0.3); {} replicates",
        outcomes.len()
    );
    vec![CriterionResult::new(10, name, passed, detail)]
}

/// Rises to a single peak and falls after it, with the peak strictly inside.
pub fn unimodal_interior_peak(values: &[f64]) -> Option<usize> {
    let peak = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a)))?;
    let rising = values[..=peak].windows(2).all(|w| w[0] < w[1]);
    let falling = values[peak..].windows(2).all(|w| w[0] > w[1]);
    (rising && falling && peak > 0 && peak + 1 < values.len()).then_some(peak)
}

fn fig23a(report: &Report) -> Vec<CriterionResult> {
    let name = "defense budget";
    let Report::Defense(rows) = report else { return vec![missing(11, name)] };
    let tput: Vec<f64> = rows.iter().map(|(_, m)| m.throughput).collect();
    let listing = rows.iter().map(|(p, m)| format!("{p}%: {:.4}", m.throughput)).collect::<Vec<_>>().join(", ");
    let (passed, detail) = match unimodal_interior_peak(&tput) {
        Some(i) if (5.0..=20.0).contains(&rows[i].0) => (true, format!("peak at {}% ({listing})", rows[i].0)),
        Some(i) => (false, format!("peak at {}% is outside 5..20% ({listing})", rows[i].0)),
        None => (false, format!("not unimodal with an interior peak ({listing})")),
    };
    vec![CriterionResult::new(11, name, passed, detail)]
}

/// Checks applicable to the run's experiment; empty for `custom`.
pub fn evaluate(out: &RunOutput) -> Vec<CriterionResult> {
    let r = &out.report;
    match r {
        Report::Curves(c) if c.iter().any(|c| c.name == "ae74") => fig5a(r),
        Report::Curves(_) => fig5b(r),
        Report::Constellations(_) => fig6(r),
        Report::Mimo { .. } => fig10a(r),
        Report::EstimationError(_) => fig10b(r),
        Report::Ic(_) => fig11b(r),
        Report::Table3 { .. } => table3(r),
        Report::Defense(_) => fig23a(r),
        Report::Augment(_) => augment(r),
        Report::Custom(_) => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodality() {
        assert_eq!(unimodal_interior_peak(&[0.1, 0.3, 0.2, 0.1]), Some(1));
        assert_eq!(unimodal_interior_peak(&[0.3, 0.2, 0.1]), None);
        assert_eq!(unimodal_interior_peak(&[0.1, 0.2, 0.3]), None);
        assert_eq!(unimodal_interior_peak(&[0.1, 0.3, 0.2, 0.25]), None);
        assert_eq!(unimodal_interior_peak(&[0.1, 0.3, 0.3, 0.1]), None);
    }
}
