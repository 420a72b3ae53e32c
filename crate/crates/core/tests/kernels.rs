mod common;

use common::*;
use dyntex_core::kernels::{
    gram_matrix, kernel_value, kernel_vector, median_bandwidth, KernelConfig, KernelFamily,
    KernelSpec,
};
use dyntex_core::{DenseMatrix, Error};

#[test]
fn scalar_examples() {
    let g = KernelSpec::gaussian(2.0).unwrap();
    assert_eq!(kernel_value(&[1.5, -2.0], &[1.5, -2.0], &g).unwrap(), 1.0);
    assert_eq!(kernel_value(&[1.0, 2.0], &[3.0, 4.0], &KernelSpec::Linear).unwrap(), 11.0);
    let v = kernel_value(&[0.0, 0.0], &[1.0, 1.0], &g).unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    assert!((v - 0.367879).abs() < 1e-6);
}

#[test]
fn scalar_errors() {
    assert!(matches!(
        kernel_value(&[1.0], &[1.0, 2.0], &KernelSpec::Linear),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        kernel_value(&[f64::NAN], &[1.0], &KernelSpec::Linear),
        Err(Error::NonFinite(_))
    ));
    assert!(KernelSpec::gaussian(0.0).is_err());
}

#[test]
fn gram_identical_rows_gaussian() {
    let rows = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
    let g = gram_matrix(&rows, &KernelSpec::gaussian(3.0).unwrap()).unwrap();
    assert_eq!(g.as_matrix().as_slice(), &[1.0; 4]);
}

#[test]
fn linear_gram_matches_triple_loop() {
    let mut r = rng(31);
    let rows = random_mat(&mut r, 3, 7, -4.0, 4.0);
    let g = gram_matrix(&to_dense(&rows), &KernelSpec::Linear).unwrap();
    let want = naive_matmul(&rows, &transpose(&rows));
    assert!(rel_diff(&to_mat(g.as_matrix()), &want) < 1e-14);
}

#[test]
fn gaussian_diagonal_is_one() {
    let mut r = rng(32);
    let rows = random_mat(&mut r, 9, 20, -100.0, 100.0);
    let g = gram_matrix(&to_dense(&rows), &KernelSpec::gaussian(50.0).unwrap()).unwrap();
    assert!((0..9).all(|i| g.get(i, i) == 1.0));
}

#[test]
fn kernel_vector_examples() {
    let mut r = rng(33);
    let rows = random_mat(&mut r, 4, 6, -1.0, 1.0);
    let dense = to_dense(&rows);
    let g = KernelSpec::gaussian(1.0).unwrap();
    assert_eq!(kernel_vector(&rows[2], &dense, &g).unwrap()[2], 1.0);

    let single = to_dense(&vec![rows[0].clone()]);
    let v = kernel_vector(&rows[1], &single, &g).unwrap();
    assert_eq!(v, vec![kernel_value(&rows[1], &rows[0], &g).unwrap()]);

    let rq = KernelSpec::RationalQuadratic { c: 2.5 };
    let x = random_mat(&mut r, 1, 6, -1.0, 1.0).remove(0);
    let got = kernel_vector(&x, &dense, &rq).unwrap();
    for (i, row) in rows.iter().enumerate() {
        let d2: f64 = x.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
        let want = 1.0 - d2 / (d2 + 2.5);
        assert!((got[i] - want).abs() < 1e-14);
    }
}

#[test]
fn every_family_matches_its_closed_form() {
    let u = [0.3, -1.2, 2.0];
    let v = [1.1, 0.4, -0.7];
    let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    let d2: f64 = u.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
    let cases = [
        (KernelSpec::Gaussian { gamma: 4.0 }, (-d2 / 4.0).exp()),
        (KernelSpec::Linear, dot),
        (KernelSpec::Polynomial { a: 0.5, c: 1.0, d: 3 }, (0.5 * dot + 1.0).powi(3)),
        (KernelSpec::RationalQuadratic { c: 1.5 }, 1.0 - d2 / (d2 + 1.5)),
        (KernelSpec::Multiquadric { c: 2.0 }, (d2 + 4.0).sqrt()),
        (KernelSpec::Sigmoid { a: 0.2, c: -0.1 }, (0.2 * dot - 0.1).tanh()),
    ];
    for (spec, want) in cases {
        let got = kernel_value(&u, &v, &spec).unwrap();
        assert!((got - want).abs() < 1e-13, "{spec}: {got} vs {want}");
    }
}

#[test]
fn median_examples() {
    let two = DenseMatrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
    assert_eq!(median_bandwidth(&two).unwrap(), 4.0);
    let three = DenseMatrix::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
    assert_eq!(median_bandwidth(&three).unwrap(), 4.0);
}

#[test]
fn median_matches_brute_force() {
    let mut r = rng(34);
    for n in [50, 51] {
        let rows = random_mat(&mut r, n, 5, -10.0, 10.0);
        let got = median_bandwidth(&to_dense(&rows)).unwrap();
        let want = brute_median_sq_dist(&rows);
        assert!((got - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn median_of_identical_rows_is_degenerate() {
    let rows = DenseMatrix::from_rows(&vec![vec![1.0, 1.0]; 4]).unwrap();
    assert!(matches!(median_bandwidth(&rows), Err(Error::DegenerateSequence)));
}

#[test]
fn kernel_grammar() {
    let spec: KernelSpec = "gaussian:gamma=2.5".parse().unwrap();
    assert_eq!(spec, KernelSpec::Gaussian { gamma: 2.5 });
    let round: KernelSpec = spec.to_string().parse().unwrap();
    assert_eq!(round, spec);

    let cfg: KernelConfig = "gaussian:gamma=auto".parse().unwrap();
    assert_eq!(cfg, KernelConfig::gaussian_auto());
    let cfg: KernelConfig = "polynomial:d=3".parse().unwrap();
    assert_eq!(cfg.family, KernelFamily::Polynomial);
    assert_eq!(cfg.d, Some(3));

    let rows = DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert_eq!(
        cfg.resolve(&rows).unwrap(),
        KernelSpec::Polynomial { a: 0.5, c: 1.0, d: 3 }
    );
    assert_eq!(
        KernelConfig::gaussian_auto().resolve(&rows).unwrap(),
        KernelSpec::Gaussian { gamma: 2.0 }
    );

    for bad in ["cubic", "gaussian:gamma=-1", "gaussian:beta=2", "linear:gamma=1"] {
        assert!(bad.parse::<KernelConfig>().is_err(), "{bad}");
    }
    assert!("gaussian:gamma=auto".parse::<KernelSpec>().is_err());
}
