use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, Suite};
use super::with_workers;
use crate::error::{Error, Result};
use crate::forward::{
    born_far_field, far_field_from_solution, lippmann_schwinger_solve, SolverOptions,
};
use crate::inversion::{
    kramers_kronig, material_split, solve_with, ConeSampling, FredholmOperator, FredholmOptions,
};
use crate::linalg::norm2;
use crate::medium::{
    build_lorentzian_phantom, Debye, DispersionModel, FrequencyLattice, Grid3, Lorentz,
    LorentzInclusion, PulseShape, PulseSpectrum,
};
use crate::oct::{cap_directions, check_linearity, h_tilde, DetectorPlane};
use crate::pat::{absorbed_energy_spectral, absorbed_energy_time, PatRecord};
use crate::vec3::{CVec3, Vec3};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, name: &str) -> Option<&VerifyEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// One line per check.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                format!(
                    "{} {:<28} measured {:.3e} tolerance {:.1e}  {}\n",
                    if e.passed { "PASS" } else { "FAIL" },
                    e.name,
                    e.measured,
                    e.tolerance,
                    e.detail
                )
            })
            .collect()
    }
}

/// Runs the configured suites on small built-in fixtures seeded by the
/// configuration. Never fails: a suite that cannot run is reported as failed.
pub fn run_verify(cfg: &ExperimentConfig) -> VerifyReport {
    let mut suites = cfg.verify.suites.clone();
    suites.sort();
    suites.dedup();
    let run = || -> Result<VerifyReport> {
        Ok(VerifyReport {
            entries: suites.iter().flat_map(|&s| run_suite(cfg, s)).collect(),
        })
    };
    with_workers(cfg.workers, run).unwrap_or_else(|e| VerifyReport {
        entries: suites
            .iter()
            .map(|&s| failed(s, s.name(), f64::NAN, &e))
            .collect(),
    })
}

fn run_suite(cfg: &ExperimentConfig, suite: Suite) -> Vec<VerifyEntry> {
    let c = cfg.speed_of_light;
    let out = match suite {
        Suite::Symmetry => symmetry(cfg.verify.break_symmetry).map(|e| vec![e]),
        Suite::Linearity => linearity(cfg.seed, c).map(|e| vec![e]),
        Suite::Plancherel => plancherel(cfg.seed).map(|e| vec![e]),
        Suite::KramersKronig => kk_lorentzian().map(|e| vec![e]),
        Suite::BornScaling => born_scaling(c).map(|e| vec![e]),
        Suite::RCancellation => r_cancellation(cfg.seed, c).map(|e| vec![e]),
        Suite::Manufactured => manufactured(cfg.seed, c),
    };
    out.unwrap_or_else(|e| vec![failed(suite, suite.name(), f64::NAN, &e)])
}

fn failed(suite: Suite, name: &str, tolerance: f64, e: &Error) -> VerifyEntry {
    VerifyEntry {
        suite,
        name: name.to_string(),
        passed: false,
        measured: f64::NAN,
        tolerance,
        detail: format!("error: {e}"),
    }
}

fn entry(suite: Suite, name: &str, measured: f64, tolerance: f64, detail: String) -> VerifyEntry {
    VerifyEntry {
        suite,
        name: name.to_string(),
        passed: measured <= tolerance,
        measured,
        tolerance,
        detail,
    }
}

fn lorentz_ball(strength: f64) -> LorentzInclusion {
    LorentzInclusion {
        center: [0.0; 3],
        radius: 0.6,
        strength,
        resonance: 2.0,
        damping: 0.5,
    }
}

fn unit_pulse(center: f64, pol: [f64; 2]) -> Result<PulseSpectrum> {
    PulseSpectrum::new(center, 0.25, [pol[0], pol[1], 0.0], PulseShape::default(), 9)
}

/// Spectral absorbed energy on a full symmetric lattice with a Hermitian
/// field and response; the broken variant perturbs one negative-frequency response.
fn symmetry(broken: bool) -> Result<VerifyEntry> {
    let name = "symmetry_real_energy";
    let tol = 1e-10;
    let omegas: Vec<f64> = (-4..=4).map(|i| 0.1 * i as f64).collect();
    let lattice = FrequencyLattice::new(omegas.clone(), false)?;
    let model = Lorentz {
        strength: 1.0,
        resonance: 0.3,
        damping: 0.2,
    };
    let field: Vec<CVec3> = omegas
        .iter()
        .map(|&w| {
            let a = Complex64::from_polar((-w * w * 20.0).exp(), 3.0 * w);
            [a, a * 0.5, Complex64::new(0.0, 0.0)]
        })
        .collect();
    let mut mu: Vec<Complex64> = omegas.iter().map(|&w| model.response(w)).collect();
    if broken {
        let bump = Complex64::new(0.0, 0.3 * mu[1].norm().max(0.1));
        mu[1] += bump;
    }
    let weights = lattice.trapezoid_weights();
    let (mut sum, mut mag) = (Complex64::new(0.0, 0.0), 0.0);
    for ((w, e), m) in weights.iter().zip(&field).zip(&mu) {
        let t = m * (w * e.iter().map(|c| c.norm_sqr()).sum::<f64>());
        sum += t;
        mag += t.norm();
    }
    let measured = sum.im.abs() / mag;
    let detail = match absorbed_energy_spectral(&lattice, &field, &mu) {
        Ok(v) => format!("energy {v:.6e}"),
        Err(e) => format!("rejected: {e}"),
    };
    Ok(entry(Suite::Symmetry, name, measured, tol, detail))
}

/// `eta^3 = 0.6 eta^1 + 0.8 eta^2` on a Lorentz ball, Born detector data.
fn linearity(seed: u64, c: f64) -> Result<VerifyEntry> {
    let tol = 1e-8;
    let nu = 1.0;
    let pulses = [
        unit_pulse(nu, [1.0, 0.0])?,
        unit_pulse(nu, [0.0, 1.0])?,
        PulseSpectrum::new(
            nu,
            0.25,
            [0.6, 0.8, 0.0],
            PulseShape {
                delay: 3.0,
                chirp: 0.5,
            },
            9,
        )?,
    ];
    let grid = Grid3::centered(0.25, [12, 12, 12])?;
    let m = build_lorentzian_phantom(grid, pulses[0].lattice().clone(), &[lorentz_ball(0.5)])?;
    let depth = c * pulses.iter().map(|p| p.temporal_support().1).fold(0.0, f64::max) + 1.0;
    let plane = DetectorPlane::from_directions(depth, &cap_directions(16, 0.5, seed)?)?;
    let report = check_linearity(&m, [&pulses[0], &pulses[1], &pulses[2]], &plane, c)?;
    Ok(entry(
        Suite::Linearity,
        "oct_linearity",
        report.max_violation,
        tol,
        format!("{} samples, c = {:?}", report.samples, report.coefficients),
    ))
}

/// Time-domain and spectral absorbed energy on random band-limited pulses.
fn plancherel(seed: u64) -> Result<VerifyEntry> {
    let tol = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    let mut worst = 0.0f64;
    let fixtures = 20;
    for _ in 0..fixtures {
        let gap = plancherel_gap(&mut rng)?;
        worst = worst.max(gap);
    }
    Ok(entry(
        Suite::Plancherel,
        "plancherel_routes",
        worst,
        tol,
        format!("{fixtures} random fixtures"),
    ))
}

/// Relative gap between the two absorbed-energy routes for one random fixture.
pub(crate) fn plancherel_gap(rng: &mut impl Rng) -> Result<f64> {
    let center = rng.gen_range(1.0..3.0);
    let half_width = rng.gen_range(0.2..0.6);
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let pulse = PulseSpectrum::new(
        center,
        half_width,
        [angle.cos(), angle.sin(), 0.0],
        PulseShape {
            delay: rng.gen_range(-2.0..2.0),
            chirp: rng.gen_range(-1.0..1.0),
        },
        129,
    )?;
    let model: Box<dyn DispersionModel> = if rng.gen_bool(0.5) {
        Box::new(Lorentz {
            strength: rng.gen_range(0.2..2.0),
            resonance: rng.gen_range(0.5..4.0),
            damping: rng.gen_range(0.3..2.0),
        })
    } else {
        Box::new(Debye {
            strength: rng.gen_range(0.2..2.0),
            relaxation_time: rng.gen_range(0.2..2.0),
        })
    };
    let lattice = pulse.lattice();
    let eta = pulse.polarization();
    let field: Vec<CVec3> = pulse
        .samples()
        .iter()
        .map(|f| eta.map(|e| f * e))
        .collect();
    let mu: Vec<Complex64> = lattice.values().iter().map(|&w| model.response(w)).collect();
    let spectral = absorbed_energy_spectral(lattice, &field, &mu)?;

    let (lo, hi) = pulse.temporal_support();
    let dt = std::f64::consts::PI / (4.0 * pulse.omega_max());
    let n = ((hi - lo) / dt).ceil() as usize + 1;
    let samples: Vec<Vec3> = (0..n)
        .map(|k| {
            let f = pulse.time_signal(lo + k as f64 * dt);
            eta.map(|e| f * e)
        })
        .collect();
    let time = absorbed_energy_time(&samples, dt, model.as_ref())?;
    Ok((time - spectral).abs() / spectral.abs().max(f64::MIN_POSITIVE))
}

/// Discrete Hilbert transform of `Re` of a Lorentz response against the
/// analytic `Im`, in sup norm over the central 80% of a symmetric lattice.
fn kk_lorentzian() -> Result<VerifyEntry> {
    let (measured, points) = kk_lorentzian_error(0.05, 800)?;
    Ok(entry(
        Suite::KramersKronig,
        "kramers_kronig_lorentzian",
        measured,
        1e-2,
        format!("{points} lattice points"),
    ))
}

pub(crate) fn kk_lorentzian_error(step: f64, half: usize) -> Result<(f64, usize)> {
    let model = Lorentz {
        strength: 1.0,
        resonance: 2.0,
        damping: 1.0,
    };
    let lattice: Vec<f64> = (-(half as i64)..=half as i64).map(|i| i as f64 * step).collect();
    let re: Vec<f64> = lattice.iter().map(|&w| model.response(w).re).collect();
    let im = kramers_kronig(&re, &lattice)?;
    let n = lattice.len();
    let (a, b) = (n / 10, n - n / 10);
    let mut err = 0.0f64;
    let mut peak = 0.0f64;
    for i in a..b {
        let exact = model.response(lattice[i]).im;
        err = err.max((im[i] - exact).abs());
        peak = peak.max(exact.abs());
    }
    Ok((err / peak, n))
}

/// `|E_LS - E_Born| / |E_Born - E_inc|` over four contrast amplitudes; the log-log slope.
fn born_scaling(c: f64) -> Result<VerifyEntry> {
    let amps = [0.01, 0.02, 0.04, 0.08];
    let gaps = born_gaps(&amps, c)?;
    let slope = log_slope(&amps, &gaps);
    Ok(entry(
        Suite::BornScaling,
        "born_gap_slope",
        (slope - 1.0).abs(),
        0.15,
        format!(
            "slope {slope:.4}, gaps [{}]",
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub(crate) fn born_gaps(amps: &[f64], c: f64) -> Result<Vec<f64>> {
    let grid = Grid3::centered(0.2, [10, 10, 10])?;
    let pulse = unit_pulse(1.0, [0.6, 0.8])?;
    let lattice = FrequencyLattice::uniform(0.75, 0.125, 5, true)?;
    let theta = [0.3, 0.2, (1.0f64 - 0.13).sqrt()];
    let r = 50.0;
    let opts = SolverOptions {
        tol: 1e-12,
        speed_of_light: c,
        ..SolverOptions::default()
    };
    amps.iter()
        .map(|&s| {
            let m = build_lorentzian_phantom(grid.clone(), lattice.clone(), &[lorentz_ball(s)])?;
            let (e, _) = lippmann_schwinger_solve(&m, &pulse, 1.0, &opts)?;
            let ls = far_field_from_solution(&e, &m, &pulse, theta, r, c)?;
            let born = born_far_field(&m, &pulse, 1.0, theta, r, c)?;
            let inc = Complex64::from_polar(1.0, -r * theta[2] / c) * pulse.profile(1.0);
            let eta = pulse.polarization();
            let num: f64 = (0..3).map(|a| (ls.value[a] - born.value[a]).norm_sqr()).sum();
            let den: f64 = (0..3).map(|a| (born.value[a] - inc * eta[a]).norm_sqr()).sum();
            Ok((num / den).sqrt())
        })
        .collect()
}

/// `h~` from Born far fields at `R` and `2R`.
fn r_cancellation(seed: u64, c: f64) -> Result<VerifyEntry> {
    let grid = Grid3::centered(0.25, [10, 10, 10])?;
    let pulse = unit_pulse(1.0, [1.0, 0.0])?;
    let m = build_lorentzian_phantom(grid, pulse.lattice().clone(), &[lorentz_ball(0.5)])?;
    let mut worst = 0.0f64;
    let dirs = cap_directions(16, 0.6, seed)?;
    for nu in [0.875, 1.0, 1.125] {
        for &theta in &dirs {
            let r = 200.0;
            let a = h_tilde(born_far_field(&m, &pulse, nu, theta, r, c)?.value, &pulse, nu, theta, r, c)?;
            let b = h_tilde(
                born_far_field(&m, &pulse, nu, theta, 2.0 * r, c)?.value,
                &pulse,
                nu,
                theta,
                2.0 * r,
                c,
            )?;
            worst = worst.max((a - b).norm() / a.norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok(entry(
        Suite::RCancellation,
        "r_cancellation",
        worst,
        1e-10,
        format!("{} directions x 3 frequencies", dirs.len()),
    ))
}

/// Rank-2 PAT record on a small grid: returns its split and cone sampling.
pub(crate) fn fredholm_fixture(seed: u64, c: f64) -> Result<(crate::inversion::MaterialSplit, ConeSampling)> {
    let grid = Grid3::centered(0.25, [8, 8, 8])?;
    let step = 0.25;
    let freqs: Vec<f64> = (1..=16).map(|i| i as f64 * step).collect();
    let a0 = Lorentz {
        strength: 1.0,
        resonance: 2.0,
        damping: 1.0,
    };
    let a1 = Lorentz {
        strength: 0.5,
        resonance: 3.0,
        damping: 0.7,
    };
    let n = grid.len();
    let mut values = vec![0.0; freqs.len() * n];
    for v in 0..n {
        let x = grid.center(v);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if r2 > 0.64 {
            continue;
        }
        let b0 = 1.0;
        let b1 = x[0] + 0.5 * x[2];
        for (i, &nu) in freqs.iter().enumerate() {
            values[i * n + v] = a0.response(nu).re * b0 + a1.response(nu).re * b1;
        }
    }
    let pat = PatRecord::new(grid, freqs.clone(), values)?;
    let split = material_split(&pat)?;
    let dirs = cap_directions(8, 0.5, seed)?;
    let sampling = ConeSampling::new(&freqs, &dirs, 0.5, c)?;
    Ok((split, sampling))
}

/// `eps = 0` gives `Gamma = h^`; with `|T| = 0.4`, a manufactured `Gamma*` is recovered.
fn manufactured(seed: u64, c: f64) -> Result<Vec<VerifyEntry>> {
    let (split, sampling) = fredholm_fixture(seed, c)?;
    let opts = FredholmOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    let data: Vec<Complex64> = (0..sampling.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();

    let zero = split.with_residual_scaled(0.0);
    let op0 = FredholmOperator::new(&zero, &sampling, opts.profile_floor)?;
    let (g0, _) = solve_with(&op0, &data, &opts)?;
    let diff: Vec<Complex64> = g0.iter().zip(&data).map(|(a, b)| a - b).collect();
    let identity = norm2(&diff) / norm2(&data);

    let op = FredholmOperator::new(&split, &sampling, opts.profile_floor)?;
    let norm = op.norm_estimate(opts.power_iterations);
    let scaled = split.with_residual_scaled(0.4 / norm);
    let op = FredholmOperator::new(&scaled, &sampling, opts.profile_floor)?;
    let star = data;
    let t = op.apply(&star);
    let h: Vec<Complex64> = star.iter().zip(&t).map(|(a, b)| a + b).collect();
    let (g, report) = solve_with(&op, &h, &opts)?;
    let diff: Vec<Complex64> = g.iter().zip(&star).map(|(a, b)| a - b).collect();
    let err = norm2(&diff) / norm2(&star);
    Ok(vec![
        entry(
            Suite::Manufactured,
            "fredholm_identity",
            identity,
            0.0,
            "eps = 0".to_string(),
        ),
        entry(
            Suite::Manufactured,
            "fredholm_manufactured",
            err,
            10.0 * opts.tol,
            format!(
                "|T| = {:.3}, {:?} in {} iterations",
                report.norm_estimate, report.method, report.iterations
            ),
        ),
    ])
}
