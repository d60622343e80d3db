use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::hilbert::{half_lattice_step, kramers_kronig_half};
use super::kernel::analytic_bracket;
use crate::error::{Error, Result};
use crate::medium::Grid3;
use crate::pat::PatRecord;

/// Residual entries below this fraction of `max |p~|` are set to zero.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// `p~(nu, x) = alpha(nu) beta(x) + eps(nu, x)` with `|alpha|_2 = 1` and `sum beta >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSplit {
    pub grid: Grid3,
    pub freqs: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `nu`-major, like the PAT record.
    pub residual: Vec<f64>,
    /// `A(nu) = alpha(nu) - (i/pi) PV ∫ alpha(nu') / (nu' - nu) d nu'`.
    pub profile: Vec<Complex64>,
    /// `eps + i KK[eps]`, `nu`-major; empty when the residual vanishes.
    pub residual_bracket: Vec<Complex64>,
    /// Singular values of the `nu x voxel` matrix, descending.
    pub singular_values: Vec<f64>,
}

impl MaterialSplit {
    pub fn residual_norm(&self) -> f64 {
        self.residual.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn residual_is_zero(&self) -> bool {
        self.residual.iter().all(|v| *v == 0.0)
    }

    /// Restriction to a subset of the frequencies. The transforms were taken
    /// over the full lattice and are kept, so the result is not a split of
    /// the restricted record.
    pub fn restrict(&self, freqs: &[f64]) -> Result<Self> {
        let tol = 1e-12 * self.freqs.last().copied().unwrap_or(1.0);
        let rows: Vec<usize> = freqs
            .iter()
            .map(|&f| {
                self.freqs
                    .iter()
                    .position(|&g| (g - f).abs() <= tol)
                    .ok_or_else(|| {
                        Error::precondition(format!("frequency {f} is not in the PAT record"))
                    })
            })
            .collect::<Result<_>>()?;
        let n = self.grid.len();
        let pick_rows = |table: &[f64]| -> Vec<f64> {
            rows.iter().flat_map(|&i| table[i * n..(i + 1) * n].iter().copied()).collect()
        };
        Ok(Self {
            grid: self.grid.clone(),
            freqs: rows.iter().map(|&i| self.freqs[i]).collect(),
            alpha: rows.iter().map(|&i| self.alpha[i]).collect(),
            beta: self.beta.clone(),
            residual: pick_rows(&self.residual),
            profile: rows.iter().map(|&i| self.profile[i]).collect(),
            residual_bracket: if self.residual_bracket.is_empty() {
                Vec::new()
            } else {
                rows.iter()
                    .flat_map(|&i| self.residual_bracket[i * n..(i + 1) * n].iter().copied())
                    .collect()
            },
            singular_values: self.singular_values.clone(),
        })
    }

    /// Same split with `eps` replaced by `s eps`.
    pub fn with_residual_scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.residual.iter_mut().for_each(|r| *r *= s);
        out.residual_bracket.iter_mut().for_each(|b| *b *= s);
        if s == 0.0 {
            out.residual_bracket.clear();
        }
        out
    }

    /// `sqrt(sum_{i >= 2} sigma_i^2)`, the residual norm of the best rank-1 fit.
    pub fn tail_energy(&self) -> f64 {
        self.singular_values.iter().skip(1).map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Dominant singular pair of the `nu x voxel` matrix of `p~`, from the
/// eigen-decomposition of its (small) frequency Gram matrix.
pub fn material_split(p: &PatRecord) -> Result<MaterialSplit> {
    let n_nu = p.freqs.len();
    let n_vox = p.grid.len();
    let peak = p.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::precondition("PAT record is identically zero; nothing to split"));
    }
    let step = half_lattice_step(&p.freqs)?;
    let mut gram = DMatrix::<f64>::zeros(n_nu, n_nu);
    for a in 0..n_nu {
        let ra = p.slice(a);
        for b in a..n_nu {
            let rb = p.slice(b);
            let s: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
            gram[(a, b)] = s;
            gram[(b, a)] = s;
        }
    }
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n_nu).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = order[0];
    let mut alpha: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    alpha.iter_mut().for_each(|a| *a /= norm);
    let mut beta = vec![0.0; n_vox];
    for (i, a) in alpha.iter().enumerate() {
        for (b, v) in beta.iter_mut().zip(p.slice(i)) {
            *b += a * v;
        }
    }
    if beta.iter().sum::<f64>() < 0.0 {
        alpha.iter_mut().for_each(|a| *a = -*a);
        beta.iter_mut().for_each(|b| *b = -*b);
    }
    let floor = RESIDUAL_FLOOR * peak;
    let mut residual = Vec::with_capacity(n_nu * n_vox);
    for (i, a) in alpha.iter().enumerate() {
        for (v, b) in p.slice(i).iter().zip(&beta) {
            let r = v - a * b;
            residual.push(if r.abs() < floor { 0.0 } else { r });
        }
    }
    let im = kramers_kronig_half(&alpha, step)?;
    let profile = alpha
        .iter()
        .zip(im)
        .map(|(&re, im)| Complex64::new(re, im))
        .collect();
    let residual_bracket = if residual.iter().all(|r| *r == 0.0) {
        Vec::new()
    } else {
        analytic_bracket(&p.freqs, n_vox, &residual)?
    };
    let singular_values = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0).sqrt())
        .collect();
    Ok(MaterialSplit {
        grid: p.grid.clone(),
        freqs: p.freqs.clone(),
        alpha,
        beta,
        residual,
        profile,
        residual_bracket,
        singular_values,
    })
}
