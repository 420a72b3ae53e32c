mod common;

use common::*;
use dyntex_core::metrics::{
    evaluate, psnr_frame, psnr_sequence, ssim_frame, ssim_sequence, EvalConfig, PsnrConfig,
    SsimConfig,
};
use dyntex_core::{Frame, FrameSequence, Geometry};

fn pattern_a(w: usize, h: usize) -> Vec<f64> {
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            127.5 + 100.0 * (0.7 * x + 0.3 * y).sin() * (0.2 * y).cos()
        })
        .collect()
}

fn pattern_b(w: usize, h: usize) -> Vec<f64> {
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            ((x * 37.0 + y * 11.0 + x * y * 3.0) % 256.0).clamp(0.0, 255.0)
        })
        .collect()
}

fn constant_seq(values: &[f64], g: Geometry) -> FrameSequence {
    FrameSequence::new(values.iter().map(|&v| Frame::filled(g, v)).collect()).unwrap()
}

#[test]
fn psnr_examples() {
    let g = Geometry::new(6, 5, 1);
    let zero = constant_seq(&[0.0; 4], g);
    let cfg = PsnrConfig::default();
    let (pf, _) = psnr_sequence(&zero, &zero, &cfg).unwrap();
    assert!(pf.iter().all(|&p| p == 100.0));

    let white = constant_seq(&[255.0; 4], g);
    let (_, mean) = psnr_sequence(&zero, &white, &cfg).unwrap();
    assert!(mean.abs() < 1e-12);

    let sixteen = constant_seq(&[16.0; 4], g);
    let (pf, mean) = psnr_sequence(&zero, &sixteen, &cfg).unwrap();
    let want = 10.0 * (65025.0f64 / 256.0).log10();
    assert!((mean - want).abs() < 1e-12);
    assert!((mean - 24.0494).abs() < 1e-3);
    assert_eq!(pf.len(), 3);
}

#[test]
fn psnr_matches_direct_formula() {
    let mut r = rng(61);
    let g = Geometry::new(7, 5, 1);
    let a = random_sequence(&mut r, 5, g);
    let b = random_sequence(&mut r, 5, g);
    let (pf, mean) = psnr_sequence(&a, &b, &PsnrConfig::default()).unwrap();
    for (k, p) in pf.iter().enumerate() {
        let want = naive_psnr(a.frame(k + 1).data(), b.frame(k + 1).data());
        assert!((p - want).abs() < 1e-12);
    }
    assert!((mean - pf.iter().sum::<f64>() / pf.len() as f64).abs() < 1e-12);
}

#[test]
fn ssim_identity_and_constants() {
    let g = Geometry::new(16, 16, 1);
    let x = Frame::new(g, pattern_a(16, 16)).unwrap();
    assert!((ssim_frame(&x, &x, &SsimConfig::default()).unwrap() - 1.0).abs() < 1e-12);
    let c = Frame::filled(g, 42.0);
    assert!((ssim_frame(&c, &c, &SsimConfig::default()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn ssim_matches_sliding_window_oracle() {
    let (w, h) = (16, 16);
    let g = Geometry::new(w, h, 1);
    let (a, b) = (pattern_a(w, h), pattern_b(w, h));
    let got = ssim_frame(
        &Frame::new(g, a.clone()).unwrap(),
        &Frame::new(g, b.clone()).unwrap(),
        &SsimConfig::default(),
    )
    .unwrap();
    let want = naive_ssim(&a, &b, w, h);
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");

    let mut r = rng(62);
    let (w, h) = (19, 14);
    let g = Geometry::new(w, h, 1);
    let x = random_sequence(&mut r, 1, g);
    let y = random_sequence(&mut r, 1, g);
    let got = ssim_frame(x.frame(0), y.frame(0), &SsimConfig::default()).unwrap();
    let want = naive_ssim(x.frame(0).data(), y.frame(0).data(), w, h);
    assert!((got - want).abs() < 1e-9);
}

#[test]
fn ssim_of_colour_frames_averages_channels() {
    let (w, h) = (12, 12);
    let (a, b) = (pattern_a(w, h), pattern_b(w, h));
    let interleave = |planes: [&Vec<f64>; 3]| -> Vec<f64> {
        (0..w * h).flat_map(|i| planes.iter().map(move |p| p[i])).collect()
    };
    let g = Geometry::new(w, h, 3);
    let x = Frame::new(g, interleave([&a, &b, &a])).unwrap();
    let y = Frame::new(g, interleave([&b, &b, &a])).unwrap();
    let got = ssim_frame(&x, &y, &SsimConfig::default()).unwrap();
    let want = (naive_ssim(&a, &b, w, h) + 1.0 + 1.0) / 3.0;
    assert!((got - want).abs() < 1e-9);
}

#[test]
fn inverted_frames_score_negative() {
    let (w, h) = (16, 16);
    let g = Geometry::new(w, h, 1);
    let obs: Vec<Frame> = (0..3)
        .map(|k| Frame::new(g, pattern_b(w, h).iter().map(|v| (v + 40.0 * k as f64) % 256.0).collect()).unwrap())
        .collect();
    let inv: Vec<Frame> = obs
        .iter()
        .map(|f| Frame::new(g, f.data().iter().map(|v| 255.0 - v).collect()).unwrap())
        .collect();
    let (pf, mean) = ssim_sequence(
        &FrameSequence::new(obs.clone()).unwrap(),
        &FrameSequence::new(inv).unwrap(),
        &SsimConfig::default(),
        2,
    )
    .unwrap();
    assert!(mean < 0.0, "{mean}");
    for (k, s) in pf.iter().enumerate() {
        let inv: Vec<f64> = obs[k + 1].data().iter().map(|v| 255.0 - v).collect();
        assert!((s - naive_ssim(obs[k + 1].data(), &inv, w, h)).abs() < 1e-9);
    }
}

#[test]
fn evaluate_range_and_mean() {
    let mut r = rng(63);
    let g = Geometry::new(12, 11, 1);
    let a = random_sequence(&mut r, 6, g);
    let b = random_sequence(&mut r, 4, g);
    let rep = evaluate(&a, &b, &EvalConfig::default()).unwrap();
    assert_eq!(rep.frames_compared, 3);
    assert_eq!(rep.frame_indices().collect::<Vec<_>>(), vec![2, 3, 4]);
    let m = rep.per_frame_ssim.iter().sum::<f64>() / 3.0;
    assert!((rep.mean_ssim - m).abs() < 1e-15);
    assert_eq!(rep.to_csv().lines().count(), rep.frames_compared + 2);

    let same = evaluate(&a, &a, &EvalConfig::default()).unwrap();
    assert!((same.mean_ssim - 1.0).abs() < 1e-12);
    assert_eq!(same.mean_psnr, 100.0);
}

#[test]
fn psnr_cap_is_configurable() {
    let g = Geometry::new(2, 2, 1);
    let x = Frame::filled(g, 10.0);
    let y = Frame::filled(g, 10.001);
    let cfg = PsnrConfig {
        cap_db: 60.0,
        ..PsnrConfig::default()
    };
    assert_eq!(psnr_frame(&x, &y, &cfg).unwrap(), 60.0);
    assert!(psnr_frame(&x, &y, &PsnrConfig::default()).unwrap() > 60.0);
}
