use std::path::PathBuf;

use log::info;
use rayon::prelude::*;

use super::config::{ExperimentConfig, PressureModel, ScatteringModel};
use super::manifest::Manifest;
use super::{config_hash, create_dir, with_workers, write_table};
use crate::error::{Result, StageExt};
use crate::forward::{born_far_field, far_field_from_solution, lippmann_schwinger_solve};
use crate::medium::PulseSpectrum;
use crate::oct::{h_tilde, DetectorPlane, OctRecord, OctSample};
use crate::pat::{initial_pressure, narrowband_pressure, FieldSource, PatRecord};
use crate::Complex64;

pub const OCT_RECORD_FILE: &str = "oct_record.csv";
pub const PAT_RECORD_STEM: &str = "pat_record";
const MANIFEST_FILE: &str = "manifest_forward.json";

#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub oct: OctRecord,
    pub pat: PatRecord,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

/// Phantom, OCT record (`h~` on the detector directions) and PAT record, with
/// plot tables and a manifest, written to the configured output directory.
pub fn run_forward(cfg: &ExperimentConfig) -> Result<ForwardOutput> {
    cfg.validate()?;
    with_workers(cfg.workers, || forward_inner(cfg))
}

fn forward_inner(cfg: &ExperimentConfig) -> Result<ForwardOutput> {
    let c = cfg.speed_of_light;
    let m = cfg.medium().stage("medium")?;
    let gamma = cfg.gruneisen().stage("medium")?;
    let directions = cfg.directions().stage("oct")?;
    let oct_freqs = cfg.oct_frequencies();
    let pulses: Vec<PulseSpectrum> = cfg
        .frequencies()
        .iter()
        .map(|&nu| cfg.pulse(nu))
        .collect::<Result<_>>()
        .stage("medium")?;
    let depth = cfg.detector_depth(&pulses[0]);
    let plane = DetectorPlane::from_directions(depth, &directions).stage("oct")?;
    plane.check_clearance(&pulses[0], c).stage("oct")?;
    info!(
        "forward: {} voxels, {} frequencies ({} for OCT), {} directions, depth {depth}",
        m.grid().len(),
        pulses.len(),
        oct_freqs.len(),
        directions.len()
    );

    let (medium, dirs) = (&m, &directions);
    let samples: Vec<OctSample> = match cfg.forward.scattering {
        ScatteringModel::Born => oct_freqs
            .par_iter()
            .zip(&pulses[..oct_freqs.len()])
            .flat_map_iter(|(&nu, pulse)| {
                dirs.iter().map(move |&theta| {
                    let r = depth / theta[2];
                    let e = born_far_field(medium, pulse, nu, theta, r, c)?;
                    Ok(OctSample {
                        nu,
                        direction: theta,
                        value: h_tilde(e.value, pulse, nu, theta, r, c)?,
                    })
                })
            })
            .collect::<Result<_>>()
            .stage("oct")?,
        ScatteringModel::LippmannSchwinger => {
            let opts = cfg.solver_options();
            let mut out = Vec::with_capacity(oct_freqs.len() * directions.len());
            for (&nu, pulse) in oct_freqs.iter().zip(&pulses) {
                let (field, report) = lippmann_schwinger_solve(&m, pulse, nu, &opts).stage("forward")?;
                log::debug!("nu = {nu}: {:?} in {} iterations", report.method, report.iterations);
                let row: Vec<OctSample> = directions
                    .par_iter()
                    .map(|&theta| {
                        let r = depth / theta[2];
                        let e = far_field_from_solution(&field, &m, pulse, theta, r, c)?;
                        Ok(OctSample {
                            nu,
                            direction: theta,
                            value: h_tilde(e.value, pulse, nu, theta, r, c)?,
                        })
                    })
                    .collect::<Result<_>>()
                    .stage("oct")?;
                out.extend(row);
            }
            out
        }
    };
    let oct = OctRecord { samples };

    let freqs = cfg.frequencies();
    let slices: Vec<Vec<f64>> = match cfg.forward.pressure {
        PressureModel::Narrowband => freqs
            .par_iter()
            .map(|&nu| narrowband_pressure(&m, &gamma, nu))
            .collect::<Result<_>>(),
        PressureModel::Spectral => pulses
            .par_iter()
            .map(|pulse| {
                let band = cfg.medium_on(pulse.lattice().clone())?;
                initial_pressure(&band, &gamma, pulse, FieldSource::Incident)
            })
            .collect::<Result<_>>(),
    }
    .stage("pat")?;
    let pat = PatRecord::new(m.grid().clone(), freqs.clone(), slices.concat()).stage("pat")?;

    let dir = cfg.output_dir.clone();
    create_dir(&dir)?;
    let mut files = Vec::new();
    files.extend(m.save(&dir.join("medium"))?);
    files.extend(gamma.save(&dir.join("gruneisen"))?);
    let oct_path = dir.join(OCT_RECORD_FILE);
    oct.write_csv(&oct_path)?;
    files.push(oct_path);
    files.extend(pat.save(&dir.join(PAT_RECORD_STEM))?);

    let per = directions.len();
    let spectrum: Vec<Vec<f64>> = oct
        .samples
        .chunks(per)
        .map(|row| {
            let abs: Vec<f64> = row.iter().map(|s| s.value.norm()).collect();
            let mean = abs.iter().sum::<f64>() / abs.len() as f64;
            let max = abs.iter().fold(0.0f64, |a, b| a.max(*b));
            let mean_h = row.iter().map(|s| s.value).sum::<Complex64>() / row.len() as f64;
            vec![row[0].nu, mean, max, mean_h.re, mean_h.im]
        })
        .collect();
    let path = dir.join("plot_h_tilde_spectrum.csv");
    write_table(&path, &["nu", "mean_abs_h", "max_abs_h", "re_mean_h", "im_mean_h"], &spectrum)?;
    files.push(path);

    let grid = m.grid();
    let [nx, ny, nz] = grid.dims;
    let mut profile = Vec::with_capacity(freqs.len() * nx);
    for (i, &nu) in freqs.iter().enumerate() {
        for ix in 0..nx {
            let v = grid.index(ix, ny / 2, nz / 2);
            profile.push(vec![nu, grid.center(v)[0], pat.slice(i)[v]]);
        }
    }
    let path = dir.join("plot_pressure_profiles.csv");
    write_table(&path, &["nu", "x", "pressure"], &profile)?;
    files.push(path);

    let manifest = Manifest::new("forward", config_hash(cfg)?, cfg.seed).finish(
        &dir,
        &files,
        &dir.join(MANIFEST_FILE),
    )?;
    info!("forward: wrote {} files to {}", manifest.files.len(), dir.display());
    Ok(ForwardOutput {
        oct,
        pat,
        manifest,
        output_dir: dir,
    })
}
