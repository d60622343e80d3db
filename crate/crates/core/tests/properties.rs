use proptest::prelude::*;

use photoct::forward::born_far_field;
use photoct::inversion::{kramers_kronig, material_split, ConeSampling};
use photoct::medium::{
    DispersionModel, FrequencyLattice, Grid3, Lorentz, PulseShape, PulseSpectrum, SusceptibilityField,
};
use photoct::oct::{cap_directions, h_tilde};
use photoct::pat::{absorbed_energy_spectral, PatRecord};
use photoct::pipeline::ExperimentConfig;
use photoct::Complex64;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn direction(a: f64, phi: f64) -> [f64; 3] {
    [a * phi.cos(), a * phi.sin(), (1.0 - a * a).sqrt()]
}

/// Random susceptibility on a 4^3 grid with zero boundary layer, lattice `{1, 1.25, 1.5}`.
fn random_medium(seed: &[f64]) -> SusceptibilityField {
    let grid = Grid3::centered(0.3, [4, 4, 4]).unwrap();
    let lattice = FrequencyLattice::uniform(1.0, 0.25, 3, true).unwrap();
    let n = grid.len();
    let values: Vec<Complex64> = (0..3 * n)
        .map(|i| {
            let v = i % n;
            if grid.in_boundary_layer(v, 1) {
                Complex64::new(0.0, 0.0)
            } else {
                let s = seed[i % seed.len()];
                Complex64::new(s, 0.5 * (s * 7.0 + i as f64).sin())
            }
        })
        .collect();
    SusceptibilityField::from_values(grid, lattice, 1, values).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pulse_band_energy_is_one_half(center in 1.0f64..4.0, hw in 0.05f64..0.5, delay in -3.0f64..3.0, chirp in -1.0f64..1.0) {
        let p = PulseSpectrum::new(center, hw, [0.6, 0.8, 0.0], PulseShape { delay, chirp }, 17).unwrap();
        prop_assert!((p.normalization() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn passive_lorentz_absorbs_positive_energy(s in 0.1f64..3.0, w0 in 0.5f64..4.0, g in 0.1f64..2.0, center in 1.0f64..3.0) {
        let model = Lorentz { strength: s, resonance: w0, damping: g };
        let p = PulseSpectrum::new(center, 0.3, [1.0, 0.0, 0.0], PulseShape::default(), 17).unwrap();
        let field: Vec<_> = p.samples().iter().map(|f| [*f, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]).collect();
        let mu: Vec<_> = p.lattice().values().iter().map(|&w| model.response(w)).collect();
        prop_assert!(absorbed_energy_spectral(p.lattice(), &field, &mu).unwrap() > 0.0);
    }

    #[test]
    fn kramers_kronig_maps_even_to_odd(width in 0.3f64..3.0, amp in -2.0f64..2.0) {
        let lattice: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.1).collect();
        let g: Vec<f64> = lattice.iter().map(|w| amp * (-(w / width).powi(2)).exp()).collect();
        let h = kramers_kronig(&g, &lattice).unwrap();
        let n = h.len();
        for i in 0..n {
            prop_assert!((h[i] + h[n - 1 - i]).abs() <= 1e-12 * amp.abs().max(1e-300));
        }
    }

    #[test]
    fn h_tilde_is_spatial_fourier_transform_of_mu(seed in proptest::collection::vec(-1.0f64..1.0, 5..9), a in 0.0f64..0.8, phi in 0.0f64..6.28, m_idx in 0usize..3) {
        let m = random_medium(&seed);
        let nu = m.freqs().values()[m_idx];
        let theta = direction(a, phi);
        let pulse = PulseSpectrum::new(1.25, 0.3, [0.6, 0.8, 0.0], PulseShape::default(), 9).unwrap();
        let r = 500.0;
        let h = h_tilde(born_far_field(&m, &pulse, nu, theta, r, 1.0).unwrap().value, &pulse, nu, theta, r, 1.0).unwrap();
        let grid = m.grid();
        let k = [nu * theta[0], nu * theta[1], nu * (theta[2] + 1.0)];
        let direct: Complex64 = (0..grid.len())
            .map(|v| {
                let y = grid.center(v);
                m.value(m_idx, v) * Complex64::from_polar(grid.voxel_volume(), -(k[0] * y[0] + k[1] * y[1] + k[2] * y[2]))
            })
            .sum();
        prop_assert!((h - direct).norm() <= 1e-8 * direct.norm().max(1e-12), "{h} vs {direct}");
    }

    #[test]
    fn h_tilde_is_independent_of_distance_and_linear_in_mu(seed in proptest::collection::vec(-1.0f64..1.0, 5..9), a in 0.0f64..0.8, phi in 0.0f64..6.28, s in 0.1f64..5.0) {
        let m = random_medium(&seed);
        let theta = direction(a, phi);
        let pulse = PulseSpectrum::new(1.25, 0.25, [1.0, 0.0, 0.0], PulseShape::default(), 9).unwrap();
        let at = |m: &SusceptibilityField, r: f64| {
            h_tilde(born_far_field(m, &pulse, 1.25, theta, r, 1.0).unwrap().value, &pulse, 1.25, theta, r, 1.0).unwrap()
        };
        let base = at(&m, 300.0);
        prop_assert!((at(&m, 600.0) - base).norm() <= 1e-10 * base.norm().max(1e-12));
        prop_assert!((at(&m.scaled(s), 300.0) - base * s).norm() <= 1e-10 * s * base.norm().max(1e-12));
    }

    #[test]
    fn cone_samples_lie_on_the_cone(count in 1usize..20, na in 0.1f64..0.95, seed in 0u64..1000, c in 0.5f64..2.0) {
        let dirs = cap_directions(count, na, seed).unwrap();
        let freqs = [0.5, 1.0, 1.5];
        let cone = ConeSampling::new(&freqs, &dirs, na, c).unwrap();
        prop_assert_eq!(cone.len(), count * freqs.len());
        let cos_max = (1.0 - na * na).sqrt();
        for s in cone.samples() {
            let radius = s.nu / c;
            let d = [s.k[0], s.k[1], s.k[2] - radius];
            prop_assert!(((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() - radius).abs() < 1e-12);
            prop_assert!(s.direction[2] >= cos_max - 1e-12);
            prop_assert!(s.weight > 0.0);
        }
    }

    #[test]
    fn material_split_reconstructs_the_record(seed in proptest::collection::vec(-1.0f64..1.0, 3..30), mix in 0.0f64..0.5) {
        let grid = Grid3::centered(0.5, [3, 3, 3]).unwrap();
        let n = grid.len();
        let freqs: Vec<f64> = (1..=8).map(|i| i as f64 * 0.25).collect();
        let values: Vec<f64> = (0..freqs.len() * n)
            .map(|i| {
                let (f, v) = (freqs[i / n], i % n);
                (1.0 + seed[v % seed.len()]) / (1.0 + f * f) + mix * seed[(v + 1) % seed.len()] * (-f).exp()
            })
            .collect();
        let record = PatRecord::new(grid, freqs, values.clone()).unwrap();
        let split = material_split(&record).unwrap();
        prop_assert!((split.alpha.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(split.beta.iter().sum::<f64>() >= 0.0);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, &a) in split.alpha.iter().enumerate() {
            for v in 0..n {
                let rebuilt = a * split.beta[v] + split.residual[i * n + v];
                prop_assert!((rebuilt - values[i * n + v]).abs() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn config_survives_a_toml_round_trip(seed in 0u64..u64::MAX / 2, na in 0.1f64..0.95, dirs in 1usize..128, background in 0.1f64..3.0) {
        let text = format!(
            "seed = {seed}\n[grid]\nspacing = 0.25\ndims = [8, 8, 8]\n[frequencies]\nspacing = 0.25\ncount = 8\n\
             [gruneisen]\nbackground = {background}\n[detector]\nnumerical_aperture = {na}\ndirections = {dirs}\n"
        );
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
