use photoct::forward::ComplexVectorField;
use photoct::medium::{
    build_lorentzian_phantom, FrequencyLattice, Grid3, GruneisenField, LorentzInclusion,
    SusceptibilityField,
};
use photoct::rte::{
    absorption_estimate, diffusion_coefficient, magnetic_field, poynting_time_averaged,
    rte_initial_pressure, surface_flux, RteParams,
};
use photoct::Complex64;

fn grid() -> Grid3 {
    Grid3::centered(0.1, [17, 17, 17]).unwrap()
}

fn params(g: &Grid3) -> RteParams {
    let n = g.len();
    let mu_a: Vec<f64> = (0..n).map(|v| 0.1 + 0.01 * (v % 7) as f64).collect();
    RteParams::new(g.clone(), mu_a, vec![5.0; n], vec![2.4; n]).unwrap()
}

#[test]
fn initial_pressure_is_product_of_gamma_absorption_and_fluence() {
    let g = grid();
    let p = params(&g);
    let fluence: Vec<f64> = (0..g.len()).map(|v| 1.0 + (v as f64 * 0.01).cos()).collect();
    let gamma = GruneisenField::constant(g.clone(), 0.8);
    let p0 = rte_initial_pressure(&gamma, &p, &fluence).unwrap();
    for v in 0..g.len() {
        assert!((p0[v] - 0.8 * p.mu_a[v] * fluence[v]).abs() < 1e-15);
    }
    assert!(rte_initial_pressure(&gamma, &p, &fluence[1..]).is_err());
    let other = GruneisenField::constant(Grid3::centered(0.1, [3, 3, 3]).unwrap(), 0.8);
    assert!(rte_initial_pressure(&other, &p, &fluence).is_err());
}

#[test]
fn coefficients_are_validated() {
    let g = Grid3::centered(0.1, [2, 2, 2]).unwrap();
    let n = g.len();
    assert!(RteParams::new(g.clone(), vec![0.1; n], vec![-1.0; n], vec![0.0; n]).is_err());
    assert!(RteParams::new(g.clone(), vec![0.1; n - 1], vec![1.0; n], vec![0.0; n]).is_err());
    let p = RteParams::new(g, vec![0.1; n], vec![1.0; n], vec![0.0; n]).unwrap();
    assert!((diffusion_coefficient(&p, 0).unwrap() - 1.0 / 3.3).abs() < 1e-14);
    assert!(diffusion_coefficient(&p, n).is_err());
}

#[test]
fn plane_wave_has_no_net_flux_through_a_ball() {
    let g = grid();
    let omega = 3.0;
    let c = 1.0;
    let values = (0..g.len())
        .map(|v| {
            let z = g.center(v)[2];
            let a = Complex64::from_polar(1.0, -omega * z / c);
            [a * 0.6, a * 0.8, Complex64::new(0.0, 0.0)]
        })
        .collect();
    let e = ComplexVectorField {
        grid: g.clone(),
        frequency: omega,
        values,
    };
    let b = magnetic_field(&e, c).unwrap();
    let s: Vec<[f64; 3]> = e.values.iter().zip(&b).map(|(e, b)| poynting_time_averaged(*e, *b, c)).collect();
    let centre = g.index(8, 8, 8);
    assert!(s[centre][2] < 0.0);
    let flux = surface_flux(&g, &s, [0.0; 3], 0.5).unwrap();
    assert!(flux.abs() < 1e-12, "{flux:e}");
    assert!(surface_flux(&g, &s, [0.0; 3], 0.85).is_err());
}

#[test]
fn absorption_estimate_is_linear_in_strength_and_zero_in_vacuum() {
    let g = grid();
    let lattice = FrequencyLattice::uniform(1.0, 0.25, 3, true).unwrap();
    let ball = |strength| LorentzInclusion {
        center: [0.0; 3],
        radius: 0.5,
        strength,
        resonance: 2.0,
        damping: 1.0,
    };
    let one = build_lorentzian_phantom(g.clone(), lattice.clone(), &[ball(1.0)]).unwrap();
    let two = build_lorentzian_phantom(g.clone(), lattice.clone(), &[ball(2.0)]).unwrap();
    let a = absorption_estimate(&one, [0.0; 3], 0.4, 1.0, 1.25).unwrap();
    let b = absorption_estimate(&two, [0.0; 3], 0.4, 1.0, 1.25).unwrap();
    assert!(a > 0.0);
    assert!((b - 2.0 * a).abs() < 1e-12 * a);
    let vacuum = SusceptibilityField::zeros(g, lattice);
    assert_eq!(absorption_estimate(&vacuum, [0.0; 3], 0.4, 1.0, 1.25).unwrap(), 0.0);
    assert!(absorption_estimate(&one, [0.0; 3], 2.0, 1.0, 1.25).is_err());
    assert!(absorption_estimate(&one, [0.0; 3], 0.4, 1.0, 1.3).is_err());
}
