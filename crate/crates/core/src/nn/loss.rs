//! Loss functions, each returning the scalar loss and the gradient at the
//! pre-activation logits of the output layer.

use super::layer::sigmoid;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Floor applied to probabilities inside the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// Mean categorical cross-entropy of softmax outputs `p` against `labels`.
///
/// Returns `(loss, grad)` where `grad = (p - onehot) / M` is the gradient with
/// respect to the softmax input. A zero probability at the true class is
/// clamped to [`PROB_FLOOR`] rather than producing an infinite loss.
pub fn cross_entropy(p: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    let (m, c) = (p.rows(), p.cols());
    if labels.len() != m {
        return Err(Error::Dimension(format!("{} labels for {m} rows", labels.len())));
    }
    if m == 0 {
        return Err(Error::Dimension("empty batch".into()));
    }
    let mut loss = 0.0;
    let mut grad = p.data().to_vec();
    for (r, &l) in labels.iter().enumerate() {
        if l >= c {
            return Err(Error::Domain(format!("label {l} outside {c} classes")));
        }
        let row = p.row(r);
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("row {r} sums to {total}, not 1")));
        }
        loss -= row[l].max(PROB_FLOOR).ln();
        grad[r * c + l] -= 1.0;
    }
    let scale = 1.0 / m as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok((loss * scale, Tensor::matrix(m, c, grad)))
}

/// Discriminator objective on single-logit outputs.
///
/// Minimizes `-(1/N) Σ [log D(real) + log(1 - D(fake))]`, i.e. gradient ascent
/// on the discriminator's log-likelihood. Returns the loss and the gradients
/// at the real and fake logits.
pub fn gan_discriminator_loss(real_logits: &Tensor, fake_logits: &Tensor) -> (f64, Tensor, Tensor) {
    let nr = real_logits.rows().max(1) as f64;
    let nf = fake_logits.rows().max(1) as f64;
    let mut loss = 0.0;
    let gr: Vec<f64> = real_logits
        .data()
        .iter()
        .map(|&z| {
            loss += softplus(-z) / nr;
            -(1.0 - sigmoid(z)) / nr
        })
        .collect();
    let gf: Vec<f64> = fake_logits
        .data()
        .iter()
        .map(|&z| {
            loss += softplus(z) / nf;
            sigmoid(z) / nf
        })
        .collect();
    (
        loss,
        Tensor::matrix(real_logits.rows(), real_logits.cols(), gr),
        Tensor::matrix(fake_logits.rows(), fake_logits.cols(), gf),
    )
}

/// Generator objective on the discriminator's logits for synthetic samples.
///
/// `saturating = true` minimizes `(1/N) Σ log(1 - D(G(z)))` exactly;
/// otherwise the usual non-saturating surrogate `-(1/N) Σ log D(G(z))` is used.
pub fn gan_generator_loss(fake_logits: &Tensor, saturating: bool) -> (f64, Tensor) {
    let n = fake_logits.rows().max(1) as f64;
    let mut loss = 0.0;
    let g: Vec<f64> = fake_logits
        .data()
        .iter()
        .map(|&z| {
            if saturating {
                // log(1 - sigmoid(z)) = -softplus(z)
                loss -= softplus(z) / n;
                -sigmoid(z) / n
            } else {
                loss += softplus(-z) / n;
                -(1.0 - sigmoid(z)) / n
            }
        })
        .collect();
    (loss, Tensor::matrix(fake_logits.rows(), fake_logits.cols(), g))
}

/// Numerically stable `ln(1 + e^z)`.
pub fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else if z < -30.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_one_hot_gives_zero_loss() {
        let p = Tensor::matrix(2, 3, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let (loss, _) = cross_entropy(&p, &[0, 2]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn uniform_binary_is_ln2() {
        let p = Tensor::matrix(1, 2, vec![0.5, 0.5]);
        let (loss, g) = cross_entropy(&p, &[0]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(g.data(), &[-0.5, 0.5]);
    }

    #[test]
    fn zero_probability_is_clamped() {
        let p = Tensor::matrix(1, 2, vec![0.0, 1.0]);
        let (loss, _) = cross_entropy(&p, &[0]).unwrap();
        assert!((loss + PROB_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_rows_and_labels() {
        let p = Tensor::matrix(1, 2, vec![0.4, 0.4]);
        assert!(cross_entropy(&p, &[0]).is_err());
        let p = Tensor::matrix(1, 2, vec![0.5, 0.5]);
        assert!(cross_entropy(&p, &[2]).is_err());
    }

    #[test]
    fn gan_losses_at_even_odds() {
        let z = Tensor::matrix(1, 1, vec![0.0]);
        let (ld, _, _) = gan_discriminator_loss(&z, &z);
        assert!((ld - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let (lg, g) = gan_generator_loss(&z, true);
        assert!((lg + std::f64::consts::LN_2).abs() < 1e-12);
        assert!((g.data()[0] + 0.5).abs() < 1e-12);
    }
}
