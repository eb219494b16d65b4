//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Suited to the small channel matrices used here (a few antennas). Column
//! pairs of `A V` are rotated until mutually orthogonal; the column norms are
//! then the singular values and the normalized columns form `U`.

use num_complex::Complex64;

use super::cmat::CMat;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x rows` unitary.
    pub u: CMat,
    /// Nonnegative, descending, `min(rows, cols)` entries.
    pub singular: Vec<f64>,
    /// `cols x cols` unitary.
    pub v: CMat,
}

impl Svd {
    /// The `rows x cols` diagonal matrix of singular values.
    pub fn lambda(&self) -> CMat {
        CMat::diag(self.u.rows, self.v.rows, &self.singular)
    }

    /// `U Λ V*`.
    pub fn reconstruct(&self) -> CMat {
        self.u.matmul(&self.lambda()).matmul(&self.v.adjoint())
    }
}

/// Full SVD `h = U Λ V*`. Rank-deficient inputs are allowed.
pub fn svd_channel(h: &CMat) -> Svd {
    if h.rows >= h.cols {
        tall_svd(h)
    } else {
        // h* = U' Λ V'*  =>  h = V' Λ* U'*
        let t = tall_svd(&h.adjoint());
        Svd { u: t.v, singular: t.singular, v: t.u }
    }
}

fn tall_svd(a: &CMat) -> Svd {
    let (m, n) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut v = CMat::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so the inner product is real,
                // then apply a real Jacobi rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| w.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let smax = norms.iter().copied().fold(0.0, f64::max);
    let tol = smax * (m.max(n) as f64) * f64::EPSILON;
    let mut singular = Vec::with_capacity(n);
    let mut v_sorted = CMat::zeros(n, n);
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for (k, &j) in order.iter().enumerate() {
        for i in 0..n {
            v_sorted[(i, k)] = v[(i, j)];
        }
        let s = norms[j];
        if s > tol && s > 0.0 {
            singular.push(s);
            u_cols.push(w.col(j).iter().map(|z| z / s).collect());
        } else {
            singular.push(0.0);
        }
    }
    complete_basis(&mut u_cols, m);
    // Zero singular values took no column above; the completed basis fills
    // the remaining slots, and Λ is zero there so the order is immaterial.
    let mut u = CMat::zeros(m, m);
    for (j, col) in u_cols.iter().enumerate() {
        for i in 0..m {
            u[(i, j)] = col[i];
        }
    }
    Svd { u, singular, v: v_sorted }
}

/// Applies the rotation `(x_p, x_q) <- (c x_p - s y_q, s x_p + c y_q)` with
/// `y_q = e^{-iφ} x_q` to the columns of `m`,
/// where `phase = e^{iφ}` aligns column `q` with column `p`.
fn rotate(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let ph = phase.conj();
    for i in 0..m.rows {
        let xp = m[(i, p)];
        let xq = m[(i, q)] * ph;
        m[(i, p)] = xp * c - xq * s;
        m[(i, q)] = xp * s + xq * c;
    }
}

/// Extends orthonormal columns to a basis of C^dim via Gram-Schmidt on the
/// standard basis.
fn complete_basis(cols: &mut Vec<Vec<Complex64>>, dim: usize) {
    let mut k = 0;
    while cols.len() < dim && k < dim {
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in cols.iter() {
                let proj: Complex64 = c.iter().zip(&e).map(|(a, b)| a.conj() * b).sum();
                for (ei, ci) in e.iter_mut().zip(c) {
                    *ei -= proj * ci;
                }
            }
        }
        let norm = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(e.iter().map(|z| z / norm).collect());
        }
        k += 1;
    }
}
