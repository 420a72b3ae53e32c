mod common;

use common::*;
use dyntex_core::baselines::{elm_train, lds_train, ElmConfig};
use dyntex_core::frameio::{center, resize_bilinear};
use dyntex_core::harness::{argmax_entry, GridEntry};
use dyntex_core::kernels::{gram_matrix, kernel_value, kernel_vector, KernelSpec};
use dyntex_core::metrics::{psnr_frame, ssim_frame, PsnrConfig, SsimConfig};
use dyntex_core::solver::pinv_solve;
use dyntex_core::{
    load_sequence, save_sequence, train, DenseMatrix, Frame, FrameSequence, Geometry, ImageFormat,
    LoadOptions,
};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = Mat> {
    prop::collection::vec(prop::collection::vec(lo..hi, cols), rows)
}

fn sized_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Mat> {
    (2..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| matrix(r, c, -2.0, 2.0))
}

fn pixels(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..255.0, len)
}

fn all_specs(dim: usize) -> Vec<KernelSpec> {
    let a = 1.0 / dim as f64;
    vec![
        KernelSpec::Gaussian { gamma: 1.7 },
        KernelSpec::Linear,
        KernelSpec::Polynomial { a, c: 1.0, d: 2 },
        KernelSpec::RationalQuadratic { c: 1.0 },
        KernelSpec::Multiquadric { c: 1.0 },
        KernelSpec::Sigmoid { a, c: 0.5 },
    ]
}

fn smallest_eigenvalue(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let na = nalgebra::DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    na.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Textured 16×16 test pattern with values in [30, 225].
fn pattern(phase: f64) -> Vec<f64> {
    (0..256)
        .map(|i| {
            let (x, y) = ((i % 16) as f64, (i / 16) as f64);
            127.5 + 90.0 * (0.9 * x + phase).sin() * (0.5 * y - phase).cos()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn center_then_restore(rows in sized_matrix(6, 8)) {
        let rows: Mat = rows.iter().map(|r| r.iter().map(|v| 100.0 * v + 120.0).collect()).collect();
        let seq = seq_from_rows(&rows);
        let back = center(&seq).unwrap().restore();
        for (a, b) in back.frames().iter().zip(seq.frames()) {
            prop_assert!(vec_rel_diff(a.data(), b.data()) <= 1e-12);
        }
    }

    #[test]
    fn resize_is_deterministic_and_in_range(
        data in pixels(7 * 5),
        w in 1usize..20,
        h in 1usize..20,
    ) {
        let f = Frame::new(Geometry::new(7, 5, 1), data).unwrap();
        let a = resize_bilinear(&f, w, h).unwrap();
        prop_assert_eq!(&a, &resize_bilinear(&f, w, h).unwrap());
        prop_assert!(a.data().iter().all(|v| (0.0..=255.0).contains(v)));
    }

    #[test]
    fn gram_symmetric_for_every_family(rows in sized_matrix(7, 5)) {
        let dense = to_dense(&rows);
        for spec in all_specs(dense.cols()) {
            let g = gram_matrix(&dense, &spec).unwrap();
            for i in 0..g.n() {
                for j in 0..g.n() {
                    prop_assert_eq!(g.get(i, j).to_bits(), g.get(j, i).to_bits());
                }
            }
        }
    }

    #[test]
    fn gram_psd_for_gaussian_and_linear(
        rows in (2usize..=50, 1usize..=6).prop_flat_map(|(r, c)| matrix(r, c, -3.0, 3.0))
    ) {
        let dense = to_dense(&rows);
        for spec in [KernelSpec::Gaussian { gamma: 2.0 }, KernelSpec::Linear] {
            let g = gram_matrix(&dense, &spec).unwrap();
            let trace = g.as_matrix().trace();
            prop_assert!(smallest_eigenvalue(g.as_matrix()) >= -1e-8 * trace);
        }
    }

    #[test]
    fn kernel_ranges(u in prop::collection::vec(-1.0f64..1.0, 4), v in prop::collection::vec(-1.0f64..1.0, 4)) {
        let g = kernel_value(&u, &v, &KernelSpec::Gaussian { gamma: 0.8 }).unwrap();
        prop_assert!(g > 0.0 && g <= 1.0);
        let rq = kernel_value(&u, &v, &KernelSpec::RationalQuadratic { c: 0.5 }).unwrap();
        prop_assert!((0.0..=1.0).contains(&rq));
        let s = kernel_value(&u, &v, &KernelSpec::Sigmoid { a: 0.25, c: 0.1 }).unwrap();
        prop_assert!(s > -1.0 && s < 1.0);
    }

    #[test]
    fn gaussian_decreases_with_distance(
        u in prop::collection::vec(-5.0f64..5.0, 3),
        dir in prop::collection::vec(-1.0f64..1.0, 3),
        t in 0.05f64..2.0,
    ) {
        prop_assume!(dir.iter().map(|d| d * d).sum::<f64>() > 1e-3);
        let spec = KernelSpec::Gaussian { gamma: 10.0 };
        let near: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
        let far: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + 1.5 * t * d).collect();
        prop_assert!(kernel_value(&u, &far, &spec).unwrap() < kernel_value(&u, &near, &spec).unwrap());
    }

    #[test]
    fn kernel_vector_is_gram_row(rows in sized_matrix(6, 4), pick in 0usize..6) {
        let dense = to_dense(&rows);
        let i = pick % rows.len();
        for spec in all_specs(dense.cols()) {
            let g = gram_matrix(&dense, &spec).unwrap();
            let kv = kernel_vector(&rows[i], &dense, &spec).unwrap();
            for (a, b) in kv.iter().zip(g.row(i)) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn dual_and_primal_ridge_agree(
        h in (1usize..=6, 1usize..=9).prop_flat_map(|(n, t)| matrix(n, t, -1.0, 1.0)),
        lambda in 1e-3f64..10.0,
    ) {
        let y: Mat = h.iter().map(|r| vec![r.iter().sum::<f64>(), r[0] - 0.5]).collect();
        let dual = naive_matmul(
            &transpose(&h),
            &naive_matmul(&gauss_jordan_inverse(&add_ridge(&naive_matmul(&h, &transpose(&h)), lambda)), &y),
        );
        let primal = ridge_primal(&h, &y, lambda);
        prop_assert!(rel_diff(&dual, &primal) < 1e-8);
        let got = pinv_solve(&to_dense(&h), &to_dense(&y), lambda).unwrap();
        prop_assert!(rel_diff(&to_mat(&got), &primal) < 1e-8);
    }

    #[test]
    fn ridge_residual_non_decreasing(
        h in (2usize..=6, 2usize..=8).prop_flat_map(|(n, t)| matrix(n, t, -1.0, 1.0)),
    ) {
        let y: Mat = h.iter().enumerate().map(|(i, r)| vec![r[1] * 2.0 - i as f64]).collect();
        let (hd, yd) = (to_dense(&h), to_dense(&y));
        let mut last = -1.0;
        for lambda in [1e-8, 1e-4, 1.0, 100.0] {
            let beta = pinv_solve(&hd, &yd, lambda).unwrap();
            let r = hd.matmul(&beta).unwrap().sub(&yd).unwrap().frobenius_norm();
            prop_assert!(r >= last - 1e-9 * (1.0 + r));
            last = r;
        }
    }

    #[test]
    fn linear_kernel_prediction_equals_primal_ridge(
        rows in (3usize..=8, 1usize..=10).prop_flat_map(|(n, d)| matrix(n, d, -3.0, 3.0)),
        x in prop::collection::vec(-3.0f64..3.0, 10),
        lambda in 1e-6f64..1.0,
    ) {
        let d = rows[0].len();
        let seq = seq_from_rows(&rows);
        let model = train(&seq, &KernelSpec::Linear, lambda).unwrap();
        let input = Frame::new(seq.geometry(), x[..d].to_vec()).unwrap();
        let got = model.predict_next(&input).unwrap();

        let (mean, centered) = center_rows(&rows);
        let n = rows.len();
        let xs: Mat = centered[..n - 1].to_vec();
        let ys: Mat = centered[1..].to_vec();
        let w = ridge_primal(&xs, &ys, lambda + model.jitter_applied());
        let xc: Mat = vec![x[..d].iter().zip(&mean).map(|(a, m)| a - m).collect()];
        let want: Vec<f64> = naive_matmul(&xc, &w)[0].iter().zip(&mean).map(|(p, m)| p + m).collect();
        prop_assert!(vec_rel_diff(got.data(), &want) < 1e-6, "{:?} vs {:?}", got.data(), want);
    }

    #[test]
    fn coefficient_norm_shrinks_with_ridge(rows in sized_matrix(7, 6)) {
        prop_assume!(rows.windows(2).any(|w| w[0] != w[1]));
        let seq = seq_from_rows(&rows);
        let mut last = f64::INFINITY;
        for lambda in [1e-4, 1e-2, 1.0, 100.0, 1e4] {
            let m = train(&seq, &KernelSpec::Gaussian { gamma: 3.0 }, lambda).unwrap();
            let norm = m.coefficients().frobenius_norm();
            prop_assert!(norm <= last * (1.0 + 1e-9));
            last = norm;
        }
    }

    #[test]
    fn training_residual_small(rows in sized_matrix(8, 5), lambda in 1e-6f64..1.0) {
        prop_assume!(rows.windows(2).any(|w| w[0] != w[1]));
        let m = train(&seq_from_rows(&rows), &KernelSpec::Gaussian { gamma: 2.0 }, lambda).unwrap();
        prop_assert!(m.training_residual().unwrap() < 1e-6);
    }

    #[test]
    fn mean_input_maps_to_mean_under_linear_kernel(rows in sized_matrix(6, 5)) {
        prop_assume!(rows.windows(2).any(|w| w[0] != w[1]));
        let seq = seq_from_rows(&rows);
        let m = train(&seq, &KernelSpec::Linear, 1e-3).unwrap();
        let at_mean = Frame::new(seq.geometry(), m.temporal_mean().to_vec()).unwrap();
        let out = m.predict_next(&at_mean).unwrap();
        prop_assert_eq!(out.data(), m.temporal_mean());
    }

    #[test]
    fn synthesis_is_a_pure_function(rows in sized_matrix(6, 4), count in 1usize..12) {
        prop_assume!(rows.windows(2).any(|w| w[0] != w[1]));
        let seq = seq_from_rows(&rows);
        let m = train(&seq, &KernelSpec::Gaussian { gamma: 1.0 }, 1e-3).unwrap();
        let a = m.synthesize_from(seq.frame(0), count).unwrap();
        let b = m.synthesize_from(seq.frame(0), count).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lds_columns_orthonormal(rows in (4usize..=8, 3usize..=8).prop_flat_map(|(n, d)| matrix(n, d, 0.0, 255.0))) {
        let seq = seq_from_rows(&rows);
        let n = 2.min(rows.len() - 1).min(rows[0].len());
        let m = lds_train(&seq, n).unwrap();
        let ctc = m.c_map().transpose_matmul(m.c_map()).unwrap();
        prop_assert!(ctc.sub(&DenseMatrix::identity(n)).unwrap().frobenius_norm() < 1e-8);
        let x0 = m.project(seq.frame(0)).unwrap();
        for (a, b) in x0.iter().zip(m.x0()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn elm_bit_reproducible(seed in any::<u64>()) {
        let seq = seq_from_rows(&vec![vec![0.0, 1.0], vec![2.0, 1.5], vec![1.0, 4.0], vec![3.0, 0.0]]);
        let cfg = ElmConfig { hidden_nodes: 16, lambda: 1e-4, rng_seed: seed, ..ElmConfig::default() };
        prop_assert_eq!(elm_train(&seq, &cfg).unwrap(), elm_train(&seq, &cfg).unwrap());
    }

    #[test]
    fn psnr_symmetric_and_shift_invariant(a in pixels(24), b in pixels(24), c in -20.0f64..20.0) {
        let g = Geometry::new(6, 4, 1);
        let cfg = PsnrConfig::default();
        let (fa, fb) = (Frame::new(g, a.clone()).unwrap(), Frame::new(g, b.clone()).unwrap());
        prop_assert_eq!(psnr_frame(&fa, &fb, &cfg).unwrap(), psnr_frame(&fb, &fa, &cfg).unwrap());
        let shift = |v: &Vec<f64>| Frame::new(g, v.iter().map(|x| (x + c).clamp(0.0, 255.0)).collect()).unwrap();
        prop_assume!(a.iter().chain(&b).all(|x| (0.0..=255.0).contains(&(x + c))));
        let shifted = psnr_frame(&shift(&a), &shift(&b), &cfg).unwrap();
        prop_assert!((shifted - psnr_frame(&fa, &fb, &cfg).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn ssim_symmetric_and_bounded(a in pixels(13 * 12), b in pixels(13 * 12)) {
        let g = Geometry::new(13, 12, 1);
        let (fa, fb) = (Frame::new(g, a).unwrap(), Frame::new(g, b).unwrap());
        let cfg = SsimConfig::default();
        let ab = ssim_frame(&fa, &fb, &cfg).unwrap();
        let ba = ssim_frame(&fb, &fa, &cfg).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn contrast_loss_lowers_ssim(phase in 0.0f64..6.0, k in 0.1f64..0.9) {
        let g = Geometry::new(16, 16, 1);
        let x = Frame::new(g, pattern(phase)).unwrap();
        let y = Frame::new(g, x.data().iter().map(|v| 127.5 + k * (v - 127.5)).collect()).unwrap();
        prop_assert!(ssim_frame(&x, &y, &SsimConfig::default()).unwrap() < 1.0);
        let yy = Frame::new(g, x.data().iter().map(|v| 127.5 + 0.5 * k * (v - 127.5)).collect()).unwrap();
        let cfg = SsimConfig::default();
        prop_assert!(ssim_frame(&x, &yy, &cfg).unwrap() < ssim_frame(&x, &y, &cfg).unwrap());
    }

    #[test]
    fn argmax_respects_tie_rule(scores in prop::collection::vec(prop::sample::select(vec![0.1, 0.5, 0.9, f64::NAN]), 1..12)) {
        let entries: Vec<GridEntry> = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| GridEntry {
                lambda: [1e-3, 1e-1, 10.0][i % 3],
                gamma: (i / 3) as f64 + 1.0,
                mean_psnr: s,
                mean_ssim: s,
                train_seconds: 0.0,
                error: None,
            })
            .collect();
        let got = argmax_entry(&entries, |e| e.mean_ssim);
        let finite: Vec<&GridEntry> = entries.iter().filter(|e| !e.mean_ssim.is_nan()).collect();
        match got {
            None => prop_assert!(finite.is_empty()),
            Some(i) => {
                let best = &entries[i];
                for e in &finite {
                    prop_assert!(e.mean_ssim <= best.mean_ssim);
                    if e.mean_ssim == best.mean_ssim {
                        prop_assert!((best.lambda, best.gamma) <= (e.lambda, e.gamma));
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn save_load_identity_on_integer_frames(
        values in prop::collection::vec(0u8..=255, 3 * 5 * 4),
    ) {
        let g = Geometry::new(5, 4, 1);
        let frames = values
            .chunks(20)
            .map(|c| Frame::new(g, c.iter().map(|&v| f64::from(v)).collect()).unwrap())
            .collect();
        let seq = FrameSequence::new(frames).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_sequence(&seq, dir.path(), ImageFormat::Png).unwrap();
        prop_assert_eq!(load_sequence(dir.path(), &LoadOptions::default()).unwrap(), seq);
    }
}
