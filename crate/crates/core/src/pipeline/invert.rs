use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use super::config::ExperimentConfig;
use super::manifest::Manifest;
use super::{config_hash, create_dir, with_workers, write_json, write_table};
use crate::error::{Error, Result, StageExt};
use crate::inversion::{
    fredholm_solve, material_split, normalize_data, recover_gamma, ConeSampling, FredholmReport,
    GammaDiagnostics, GammaEstimate,
};
use crate::medium::volume::read_header;
use crate::oct::OctRecord;
use crate::pat::PatRecord;
use crate::Complex64;

const MANIFEST_FILE: &str = "manifest_inversion.json";

#[derive(Debug, Clone)]
pub struct InversionOutput {
    pub estimate: GammaEstimate,
    /// Solution of the Fredholm equation on `sampling`.
    pub gamma_hat: Vec<Complex64>,
    pub sampling: ConeSampling,
    pub fredholm: FredholmReport,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    gamma: &'a GammaDiagnostics,
    fredholm: &'a FredholmReport,
    split_singular_values: Vec<f64>,
    split_residual_norm: f64,
    cone_samples: usize,
}

/// Material split, Fredholm solve and recovery of `gamma` from an OCT record
/// (CSV) and a PAT record (volume sidecar); writes the estimate, diagnostics,
/// a summary table, a central slice and a manifest.
pub fn run_inversion(cfg: &ExperimentConfig, oct_path: &Path, pat_path: &Path) -> Result<InversionOutput> {
    cfg.validate()?;
    let oct = OctRecord::read_csv(oct_path)?;
    let pat_sidecar = if pat_path.extension().is_some_and(|e| e == "json") {
        pat_path.to_path_buf()
    } else {
        pat_path.with_extension("json")
    };
    let pat = PatRecord::load(&pat_sidecar)?;
    let payload = pat_sidecar
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(read_header(&pat_sidecar)?.payload);
    with_workers(cfg.workers, || {
        let (estimate, gamma_hat, sampling, fredholm, split) = invert_records(cfg, &oct, &pat)?;
        let dir = cfg.output_dir.clone();
        create_dir(&dir)?;
        let mut files = Vec::new();
        files.extend(estimate.save(&dir.join("gamma_estimate"))?);
        files.extend(estimate.save_mask(&dir.join("gamma_mask"))?);

        let rows: Vec<Vec<f64>> = sampling
            .samples()
            .iter()
            .zip(&gamma_hat)
            .map(|(s, g)| vec![s.nu, s.k[0], s.k[1], s.k[2], s.weight, g.re, g.im])
            .collect();
        let path = dir.join("gamma_hat.csv");
        write_table(&path, &["nu", "kx", "ky", "kz", "weight", "re_gamma_hat", "im_gamma_hat"], &rows)?;
        files.push(path);

        let path = dir.join("inversion_diagnostics.json");
        write_json(
            &path,
            &Diagnostics {
                gamma: &estimate.diagnostics,
                fredholm: &fredholm,
                split_singular_values: split.0,
                split_residual_norm: split.1,
                cone_samples: sampling.len(),
            },
        )?;
        files.push(path);

        let d = &estimate.diagnostics;
        let summary = [
            ("data_residual", d.data_residual),
            ("mask_fraction", d.mask_fraction),
            ("support_voxels", d.support_voxels as f64),
            ("regularization", d.regularization),
            ("cg_iterations", d.cg_iterations as f64),
            ("fredholm_iterations", d.fredholm_iterations as f64),
            ("fredholm_residual", d.fredholm_residual),
            ("operator_norm", d.operator_norm),
            ("dropped_frequencies", d.dropped_frequencies.len() as f64),
            ("split_residual_norm", split.1),
        ];
        let path = dir.join("inversion_summary.csv");
        let err = |e: csv::Error| crate::oct::csv_error(&path, e);
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(["quantity", "value"]).map_err(err)?;
        for (k, v) in summary {
            w.write_record([k.to_string(), v.to_string()]).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        files.push(path);

        let grid = &estimate.grid;
        let [nx, ny, nz] = grid.dims;
        let mut slice = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            for iy in 0..ny {
                let v = grid.index(ix, iy, nz / 2);
                let x = grid.center(v);
                let mask = if estimate.mask[v] { 1.0 } else { 0.0 };
                slice.push(vec![x[0], x[1], estimate.values[v], mask]);
            }
        }
        let path = dir.join("plot_gamma_slice.csv");
        write_table(&path, &["x", "y", "gamma", "mask"], &slice)?;
        files.push(path);

        let mut manifest = Manifest::new("invert", config_hash(cfg)?, cfg.seed);
        let root = dir.as_path();
        manifest.add_inputs(root, &[oct_path.to_path_buf(), pat_sidecar.clone(), payload.clone()])?;
        let manifest = manifest.finish(root, &files, &dir.join(MANIFEST_FILE))?;
        info!(
            "inversion: data residual {:.3e}, mask fraction {:.3}",
            d.data_residual, d.mask_fraction
        );
        Ok(InversionOutput {
            estimate,
            gamma_hat,
            sampling,
            fredholm,
            manifest,
            output_dir: dir,
        })
    })
}

type Inverted = (GammaEstimate, Vec<Complex64>, ConeSampling, FredholmReport, (Vec<f64>, f64));

/// The in-memory part of [`run_inversion`].
fn invert_records(cfg: &ExperimentConfig, oct: &OctRecord, pat: &PatRecord) -> Result<Inverted> {
    if oct.is_empty() {
        return Err(Error::precondition("OCT record is empty")).stage("inversion");
    }
    let c = cfg.speed_of_light;
    let na = cfg.detector.numerical_aperture;
    let sampling = ConeSampling::from_record(oct, na, c).stage("inversion")?;
    if !pat.grid.same_as(&cfg.grid()?) {
        return Err(Error::precondition("PAT record grid differs from the configured grid"))
            .stage("inversion");
    }
    let full = material_split(pat).stage("inversion")?;
    let split = full.restrict(sampling.freqs()).stage("inversion")?;

    let floor = cfg.inversion.profile_floor;
    let peak = split.profile.iter().fold(0.0f64, |m, a| m.max(a.norm()));
    let keep: Vec<bool> = split.profile.iter().map(|a| a.norm() > floor * peak).collect();
    let dropped: Vec<f64> = split
        .freqs
        .iter()
        .zip(&keep)
        .filter(|(_, k)| !**k)
        .map(|(f, _)| *f)
        .collect();
    for nu in &dropped {
        warn!("dropping nu = {nu}: material profile |A(nu)| is below {floor} of its peak");
    }
    if dropped.len() == split.freqs.len() {
        return Err(Error::precondition("material profile vanishes at every OCT frequency"))
            .stage("inversion");
    }
    let per = oct.len() / sampling.freqs().len();
    let (split, sampling, h) = if dropped.is_empty() {
        let h: Vec<Complex64> = oct.samples.iter().map(|s| s.value).collect();
        (split, sampling, h)
    } else {
        let kept: Vec<f64> = split
            .freqs
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(f, _)| *f)
            .collect();
        let h: Vec<Complex64> = oct
            .samples
            .chunks(per)
            .zip(&keep)
            .filter(|(_, k)| **k)
            .flat_map(|(row, _)| row.iter().map(|s| s.value))
            .collect();
        (
            split.restrict(&kept).stage("inversion")?,
            sampling.restrict(&keep, na, c).stage("inversion")?,
            h,
        )
    };
    let data = normalize_data(&h, &split, &sampling).stage("inversion")?;
    let (gamma_hat, report) =
        fredholm_solve(&data, &split, &sampling, &cfg.fredholm_options()).stage("fredholm")?;
    let mut estimate =
        recover_gamma(&gamma_hat, &split, &sampling, &cfg.recover_options()).stage("recovery")?;
    let d = &mut estimate.diagnostics;
    d.fredholm_iterations = report.iterations;
    d.fredholm_residual = report.residual;
    d.operator_norm = report.norm_estimate;
    d.dropped_frequencies = dropped;
    let split_info = (full.singular_values.iter().take(4).copied().collect(), full.tail_energy());
    Ok((estimate, gamma_hat, sampling, report, split_info))
}
