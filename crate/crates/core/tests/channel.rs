use dlphy::channel::{apply_awgn, draw_rayleigh_mimo, ebno_to_noise_var, mmse_error_variance, svd_channel, CMat};
use dlphy::rng;
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

fn to_nalgebra(h: &CMat) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(h.rows, h.cols, |r, c| {
        let v = h[(r, c)];
        Complex::new(v.re, v.im)
    })
}

fn max_abs(m: &CMat) -> f64 {
    m.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn matrix(rows: usize, cols: usize, parts: &[f64]) -> CMat {
    let data = parts.chunks(2).take(rows * cols).map(|p| Complex64::new(p[0], p[1])).collect();
    CMat::from_rows(rows, cols, data)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn singular_values_agree_with_nalgebra(
        rows in 1usize..=4,
        cols in 1usize..=4,
        parts in prop::collection::vec(-3.0f64..3.0, 32),
    ) {
        let h = matrix(rows, cols, &parts);
        let ours = svd_channel(&h);
        let mut theirs: Vec<f64> = to_nalgebra(&h).singular_values().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(ours.singular.len(), theirs.len());
        for (a, b) in ours.singular.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", ours.singular, theirs);
        }
    }

    #[test]
    fn factors_are_unitary_and_reconstruct(
        rows in 1usize..=4,
        cols in 1usize..=4,
        parts in prop::collection::vec(-3.0f64..3.0, 32),
    ) {
        let h = matrix(rows, cols, &parts);
        let s = svd_channel(&h);
        prop_assert!(max_abs(&s.reconstruct().sub(&h)) < 1e-10);
        prop_assert!(max_abs(&s.u.adjoint().matmul(&s.u).sub(&CMat::identity(rows))) < 1e-10);
        prop_assert!(max_abs(&s.v.adjoint().matmul(&s.v).sub(&CMat::identity(cols))) < 1e-10);
    }

    #[test]
    fn estimation_error_shrinks_with_training(rho in 0.0f64..1e4, t in 0.0f64..100.0, n_t in 1usize..=8) {
        let v = mmse_error_variance(rho, t, n_t).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(mmse_error_variance(rho * 2.0 + 1.0, t, n_t).unwrap() <= v);
        prop_assert!(mmse_error_variance(rho, t + 1.0, n_t).unwrap() <= v);
        prop_assert!(mmse_error_variance(rho, t, n_t + 1).unwrap() >= v);
    }
}

#[test]
fn rank_one_channel_has_one_nonzero_singular_value() {
    let a = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3)];
    let b = [Complex64::new(0.7, -1.1), Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)];
    let data = a.iter().flat_map(|x| b.iter().map(move |y| x * y.conj())).collect();
    let s = svd_channel(&CMat::from_rows(2, 3, data));
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!((s.singular[0] - norm(&a) * norm(&b)).abs() < 1e-10);
    assert!(s.singular[1].abs() < 1e-10);
}

#[test]
fn awgn_has_the_requested_variance_per_real_dimension() {
    let beta = ebno_to_noise_var(0.5, 3.0).unwrap();
    let mut rng = rng::stream(4, 0);
    let y = apply_awgn(&vec![Complex64::new(0.0, 0.0); 200_000], beta, &mut rng).unwrap();
    let var_re = y.iter().map(|z| z.re * z.re).sum::<f64>() / y.len() as f64;
    let var_im = y.iter().map(|z| z.im * z.im).sum::<f64>() / y.len() as f64;
    // Sample variance of 2e5 normals has relative sd about 0.3%.
    for v in [var_re, var_im] {
        assert!((v / beta - 1.0).abs() < 0.015, "{v} vs {beta}");
    }
    assert!(apply_awgn(&y, -1.0, &mut rng).is_err());
}

#[test]
fn rayleigh_entries_have_unit_power() {
    let mut rng = rng::stream(8, 1);
    let mut total = 0.0;
    let draws = 20_000;
    for _ in 0..draws {
        let c = draw_rayleigh_mimo(2, 2, &mut rng).unwrap();
        total += c.h.frobenius().powi(2);
    }
    let per_entry = total / (4 * draws) as f64;
    assert!((per_entry - 1.0).abs() < 0.03, "{per_entry}");
}
