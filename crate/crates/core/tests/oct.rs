use photoct::forward::born_far_field;
use photoct::medium::{
    build_lorentzian_phantom, FrequencyLattice, Grid3, LorentzInclusion, PulseShape, PulseSpectrum,
    SusceptibilityField,
};
use photoct::oct::{
    cap_directions, detector_spectrum, extract_h, h_tilde, h_tilde_components, measurement_window,
    simulate_scan, DetectorPlane, OctRecord, OctSample,
};
use photoct::vec3::norm;
use photoct::{Complex64, ErrorCategory};

fn pulse(pol: [f64; 2]) -> PulseSpectrum {
    PulseSpectrum::new(2.5, 1.0, [pol[0], pol[1], 0.0], PulseShape::default(), 17).unwrap()
}

/// Step `1/64` keeps the aliased incident pulse far outside the measurement window.
fn phantom() -> SusceptibilityField {
    let grid = Grid3::centered(0.25, [6, 6, 6]).unwrap();
    let lattice = FrequencyLattice::uniform(0.015625, 0.015625, 240, true).unwrap();
    let ball = LorentzInclusion {
        center: [0.0; 3],
        radius: 0.5,
        strength: 5.0,
        resonance: 2.0,
        damping: 2.0,
    };
    build_lorentzian_phantom(grid, lattice, &[ball]).unwrap()
}

#[test]
fn mirror_scan_recovers_detector_field_and_h_tilde() {
    let m = phantom();
    let p = pulse([0.6, 0.8]);
    let theta = [0.3, 0.2, (1.0f64 - 0.13).sqrt()];
    let r = 60.0;
    let xi = theta.map(|t| t * r);
    let spec = detector_spectrum(&m, &p, xi, 1.0).unwrap();
    let window = measurement_window(&m, &p, &spec, 1.0).unwrap();
    let scan = simulate_scan(&spec, &p, &window, 1.0).unwrap();
    let mut checked = 0;
    for (k, &w) in spec.frequencies.iter().enumerate() {
        if (w - p.center()).abs() > 0.5 * p.half_width() {
            continue;
        }
        let got = extract_h(&scan, &p, w, 1.0).unwrap();
        let want = spec.values[k];
        for j in 0..2 {
            let rel = (got[j] - want[j]).norm() / want[j].norm();
            assert!(rel < 1e-3, "nu = {w}, component {j}: {rel:e}");
        }
        let chain = h_tilde([got[0], got[1], want[2]], &p, w, theta, r, 1.0).unwrap();
        let born = h_tilde(born_far_field(&m, &p, w, theta, r, 1.0).unwrap().value, &p, w, theta, r, 1.0).unwrap();
        assert!((chain - born).norm() < 1e-3 * born.norm(), "h~ at nu = {w}");
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn too_coarse_frequency_step_is_rejected() {
    let grid = Grid3::centered(0.25, [6, 6, 6]).unwrap();
    let lattice = FrequencyLattice::uniform(0.25, 0.25, 16, true).unwrap();
    let ball = LorentzInclusion {
        center: [0.0; 3],
        radius: 0.5,
        strength: 1.0,
        resonance: 2.0,
        damping: 2.0,
    };
    let m = build_lorentzian_phantom(grid, lattice, &[ball]).unwrap();
    let p = pulse([0.6, 0.8]);
    let spec = detector_spectrum(&m, &p, [0.0, 0.0, 60.0], 1.0).unwrap();
    let err = measurement_window(&m, &p, &spec, 1.0).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Precondition);
}

#[test]
fn detector_inside_pulse_reach_is_rejected() {
    let m = phantom();
    let p = pulse([0.6, 0.8]);
    let spec = detector_spectrum(&m, &p, [0.0, 0.0, 5.0], 1.0).unwrap();
    assert!(measurement_window(&m, &p, &spec, 1.0).is_err());
    let plane = DetectorPlane::new(5.0, &[[0.0, 0.0]]).unwrap();
    assert!(plane.check_clearance(&p, 1.0).is_err());
    let far = DetectorPlane::new(p.temporal_support().1 + 1.0, &[[0.0, 0.0]]).unwrap();
    assert!(far.check_clearance(&p, 1.0).is_ok());
}

#[test]
fn extraction_needs_both_polarization_components() {
    let m = phantom();
    let p = pulse([1.0, 0.0]);
    let spec = detector_spectrum(&m, &p, [0.0, 0.0, 60.0], 1.0).unwrap();
    let window = measurement_window(&m, &p, &spec, 1.0).unwrap();
    let scan = simulate_scan(&spec, &p, &window, 1.0).unwrap();
    let err = extract_h(&scan, &p, 2.5, 1.0).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Precondition);
}

#[test]
fn h_tilde_does_not_depend_on_polarization() {
    let m = phantom();
    let theta = [0.2, -0.1, (1.0f64 - 0.05).sqrt()];
    let nu = 2.5;
    let a = pulse([1.0, 0.0]);
    let b = pulse([0.0, 1.0]);
    let ha = h_tilde(born_far_field(&m, &a, nu, theta, 80.0, 1.0).unwrap().value, &a, nu, theta, 80.0, 1.0).unwrap();
    let hb = h_tilde(born_far_field(&m, &b, nu, theta, 80.0, 1.0).unwrap().value, &b, nu, theta, 80.0, 1.0).unwrap();
    assert!((ha - hb).norm() < 1e-10 * ha.norm());
}

#[test]
fn degenerate_component_is_skipped() {
    // theta = e3 and eta = e1: (theta x theta x eta) has no second component.
    let p = pulse([1.0, 0.0]);
    let field = [Complex64::new(0.1, 0.0); 3];
    let parts = h_tilde_components(field, &p, 2.5, [0.0, 0.0, 1.0], 10.0, 1.0).unwrap();
    assert!(parts[0].is_some());
    assert!(parts[1].is_none());
}

#[test]
fn record_round_trips_through_csv() {
    let dirs = cap_directions(5, 0.7, 9).unwrap();
    let record = OctRecord {
        samples: [1.0, 1.5]
            .iter()
            .flat_map(|&nu| {
                dirs.iter().enumerate().map(move |(i, &d)| OctSample {
                    nu,
                    direction: d,
                    value: Complex64::new(nu * i as f64, -0.1 * i as f64 + 1e-17),
                })
            })
            .collect(),
    };
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("oct.csv");
    record.write_csv(&path).unwrap();
    let back = OctRecord::read_csv(&path).unwrap();
    assert_eq!(back, record);
    assert_eq!(back.frequencies(), vec![1.0, 1.5]);
}

#[test]
fn malformed_record_is_a_format_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("oct.csv");
    std::fs::write(&path, "nu,theta_x\n1.0,oops\n").unwrap();
    let err = OctRecord::read_csv(&path).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Io);
    let missing = OctRecord::read_csv(&tmp.path().join("absent.csv")).unwrap_err();
    assert_eq!(missing.category(), ErrorCategory::Io);
}

#[test]
fn detector_points_lie_on_the_plane_along_their_directions() {
    let dirs = cap_directions(12, 0.8, 4).unwrap();
    let plane = DetectorPlane::from_directions(30.0, &dirs).unwrap();
    for (p, d) in plane.points().iter().zip(plane.directions()) {
        assert!((p[2] - 30.0).abs() < 1e-12);
        assert!((norm(d) - 1.0).abs() < 1e-12);
    }
    for (a, b) in plane.directions().iter().zip(&dirs) {
        assert!((0..3).all(|k| (a[k] - b[k]).abs() < 1e-12));
    }
    assert_eq!(cap_directions(12, 0.8, 4).unwrap(), dirs);
    assert_ne!(cap_directions(12, 0.8, 5).unwrap(), dirs);
}
