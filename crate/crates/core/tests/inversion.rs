use photoct::inversion::{
    apply_forward, fredholm_solve, kramers_kronig, kramers_kronig_half, material_split,
    normalize_data, recover_gamma, solve_with, ConeSampling, FredholmMethod, FredholmOperator,
    FredholmOptions, KernelK, RecoverOptions,
};
use photoct::medium::{DispersionModel, Grid3, Lorentz};
use photoct::oct::cap_directions;
use photoct::pat::PatRecord;
use photoct::{Complex64, ErrorCategory};

const MODEL: Lorentz = Lorentz {
    strength: 1.0,
    resonance: 2.0,
    damping: 1.0,
};

fn freqs(step: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 * step).collect()
}

/// `p~ = gamma Re mu` on a ball with Grüneisen parameter `gamma(x)`.
fn ball_record(grid: &Grid3, nus: &[f64], radius: f64, gamma: impl Fn([f64; 3]) -> f64) -> PatRecord {
    let n = grid.len();
    let mut values = vec![0.0; nus.len() * n];
    for v in 0..n {
        let x = grid.center(v);
        if x.iter().map(|a| a * a).sum::<f64>().sqrt() > radius {
            continue;
        }
        for (i, &nu) in nus.iter().enumerate() {
            values[i * n + v] = gamma(x) * MODEL.response(nu).re;
        }
    }
    PatRecord::new(grid.clone(), nus.to_vec(), values).unwrap()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[test]
fn half_lattice_transform_matches_lorentz_imaginary_part() {
    let step = 0.05;
    let nus = freqs(step, 800);
    let re: Vec<f64> = nus.iter().map(|&w| MODEL.response(w).re).collect();
    let im = kramers_kronig_half(&re, step).unwrap();
    let keep = nus.len() * 8 / 10;
    let peak = nus[..keep].iter().map(|&w| MODEL.response(w).im.abs()).fold(0.0, f64::max);
    let err = (0..keep)
        .map(|i| (im[i] - MODEL.response(nus[i]).im).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-2 * peak, "{err:e}");
}

#[test]
fn transform_of_even_input_is_odd_and_translation_invariant() {
    let lattice: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.05).collect();
    let g: Vec<f64> = lattice.iter().map(|w| (-w * w).exp()).collect();
    let h = kramers_kronig(&g, &lattice).unwrap();
    let n = h.len();
    for i in 0..n {
        assert!((h[i] + h[n - 1 - i]).abs() < 1e-12);
    }
    let shifted: Vec<f64> = lattice.iter().map(|w| w + 7.0).collect();
    assert_eq!(kramers_kronig(&g, &shifted).unwrap(), h);
    let uneven = [0.0, 0.1, 0.3];
    assert!(kramers_kronig(&[1.0, 2.0, 3.0], &uneven).is_err());
}

#[test]
fn rank_one_record_splits_exactly() {
    let grid = Grid3::centered(0.5, [6, 6, 6]).unwrap();
    let nus = freqs(0.25, 24);
    let p = ball_record(&grid, &nus, 1.1, |x| 1.0 + 0.3 * x[0]);
    let split = material_split(&p).unwrap();
    assert!(split.residual_is_zero());
    assert!(split.residual_bracket.is_empty());
    // Singular values come from Gram eigenvalues, so round-off enters at sqrt(eps).
    assert!(split.tail_energy() < 1e-6 * split.singular_values[0]);
    let norm: f64 = nus.iter().map(|&w| MODEL.response(w).re.powi(2)).sum::<f64>().sqrt();
    let sign = split.alpha[0].signum() * MODEL.response(nus[0]).re.signum();
    for (a, &w) in split.alpha.iter().zip(&nus) {
        assert!((a - sign * MODEL.response(w).re / norm).abs() < 1e-12);
    }
    assert!(split.beta.iter().sum::<f64>() >= 0.0);
}

#[test]
fn rank_two_residual_matches_singular_tail() {
    let grid = Grid3::centered(0.5, [5, 5, 5]).unwrap();
    let nus = freqs(0.25, 16);
    let n = grid.len();
    let mut values = vec![0.0; nus.len() * n];
    for v in 0..n {
        let x = grid.center(v);
        for (i, &nu) in nus.iter().enumerate() {
            values[i * n + v] = MODEL.response(nu).re * (1.0 + x[2]) + 0.2 * (-nu).exp() * x[0];
        }
    }
    let split = material_split(&PatRecord::new(grid, nus, values).unwrap()).unwrap();
    let rel = (split.residual_norm() - split.tail_energy()).abs() / split.tail_energy();
    assert!(rel < 1e-8, "{rel:e}");
    assert!(!split.residual_bracket.is_empty());
}

#[test]
fn zero_record_cannot_be_split() {
    let grid = Grid3::centered(0.5, [3, 3, 3]).unwrap();
    let p = PatRecord::new(grid.clone(), freqs(0.25, 4), vec![0.0; 4 * grid.len()]).unwrap();
    assert_eq!(material_split(&p).unwrap_err().category(), ErrorCategory::Precondition);
}

#[test]
fn fredholm_adjoint_is_consistent_and_large_norm_is_rejected() {
    let grid = Grid3::centered(0.5, [5, 5, 5]).unwrap();
    let nus = freqs(0.25, 12);
    let n = grid.len();
    let mut values = vec![0.0; nus.len() * n];
    for v in 0..n {
        let x = grid.center(v);
        if x.iter().map(|a| a * a).sum::<f64>() > 1.0 {
            continue;
        }
        for (i, &nu) in nus.iter().enumerate() {
            values[i * n + v] = MODEL.response(nu).re + 0.5 * (-nu).exp() * x[1];
        }
    }
    let split = material_split(&PatRecord::new(grid, nus.clone(), values).unwrap()).unwrap();
    let sampling = ConeSampling::new(&nus, &cap_directions(6, 0.5, 2).unwrap(), 0.5, 1.0).unwrap();
    let op = FredholmOperator::new(&split, &sampling, 1e-3).unwrap();
    let m = sampling.len();
    let x: Vec<Complex64> = (0..m).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
    let y: Vec<Complex64> = (0..m).map(|i| Complex64::new((i as f64 * 0.7).cos(), 0.1 * i as f64)).collect();
    let lhs = dot(&op.apply(&x), &y);
    let rhs = dot(&x, &op.apply_adjoint(&y));
    assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1e-300));

    let norm = op.norm_estimate(60);
    let big = split.with_residual_scaled(2.0 / norm);
    let opts = FredholmOptions::default();
    let err = fredholm_solve(&x, &big, &sampling, &opts).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Convergence);

    let small = split.with_residual_scaled(0.5 / norm);
    let op = FredholmOperator::new(&small, &sampling, 1e-3).unwrap();
    let (g, report) = solve_with(&op, &x, &opts).unwrap();
    assert!(report.residual < 1e-10);
    assert_ne!(report.method, FredholmMethod::Identity);
    let back: Vec<Complex64> = g.iter().zip(op.apply(&g)).map(|(a, b)| a + b).collect();
    let diff: Vec<Complex64> = back.iter().zip(&x).map(|(a, b)| a - b).collect();
    assert!(dot(&diff, &diff).re.sqrt() < 1e-10 * dot(&x, &x).re.sqrt());
}

#[test]
fn variable_gruneisen_is_recovered_from_consistent_data() {
    let grid = Grid3::centered(0.5, [8, 8, 8]).unwrap();
    let nus = freqs(0.25, 32);
    let gamma = |x: [f64; 3]| 1.0 + 0.25 * x[0] - 0.15 * x[2];
    let p = ball_record(&grid, &nus, 1.3, gamma);
    let split = material_split(&p).unwrap();
    let sampling = ConeSampling::new(&nus, &cap_directions(64, 0.9, 5).unwrap(), 0.9, 1.0).unwrap();
    let inverse: Vec<f64> = (0..grid.len())
        .map(|v| if p.values[v] != 0.0 { 1.0 / gamma(grid.center(v)) } else { 0.0 })
        .collect();
    let h = apply_forward(&p, &inverse, &sampling).unwrap();
    let kernel = KernelK::new(&p).unwrap();
    assert_eq!(kernel.apply(&inverse, &sampling).unwrap(), h);

    let data = normalize_data(&h, &split, &sampling).unwrap();
    let (gamma_hat, report) = fredholm_solve(&data, &split, &sampling, &FredholmOptions::default()).unwrap();
    assert_eq!(report.method, FredholmMethod::Identity);
    let est = recover_gamma(&gamma_hat, &split, &sampling, &RecoverOptions::default()).unwrap();
    let mut worst = 0.0f64;
    for v in 0..grid.len() {
        if est.mask[v] {
            let truth = gamma(grid.center(v));
            worst = worst.max((est.values[v] - truth).abs() / truth);
        }
    }
    assert!(est.mask.iter().filter(|m| **m).count() > 20);
    assert!(worst < 1e-3, "worst relative error {worst:e}");
}

#[test]
fn recovery_rejects_bad_inputs() {
    let grid = Grid3::centered(0.5, [4, 4, 4]).unwrap();
    let nus = freqs(0.25, 8);
    let p = ball_record(&grid, &nus, 0.8, |_| 1.0);
    let split = material_split(&p).unwrap();
    let sampling = ConeSampling::new(&nus, &cap_directions(4, 0.5, 1).unwrap(), 0.5, 1.0).unwrap();
    let short = vec![Complex64::new(1.0, 0.0); sampling.len() - 1];
    assert!(recover_gamma(&short, &split, &sampling, &RecoverOptions::default()).is_err());
    let full = vec![Complex64::new(1.0, 0.0); sampling.len()];
    let bad = RecoverOptions {
        reg: Some(-1.0),
        ..RecoverOptions::default()
    };
    assert!(recover_gamma(&full, &split, &sampling, &bad).is_err());
    assert!(ConeSampling::new(&nus, &cap_directions(4, 0.5, 1).unwrap(), 1.0, 1.0).is_err());
    assert!(ConeSampling::new(&[0.0, 1.0], &cap_directions(4, 0.5, 1).unwrap(), 0.5, 1.0).is_err());
}
