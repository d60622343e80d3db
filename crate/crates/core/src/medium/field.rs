use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::grid::Grid3;
use super::lattice::FrequencyLattice;
use super::model::{DispersionModel, Lorentz};
use crate::error::{Error, Result};
use crate::vec3::{norm, sub, Vec3};

/// Default thickness, in voxels, of the layer that must carry no medium.
pub const DEFAULT_BOUNDARY_WIDTH: usize = 1;

/// Samples of `F_t mu(omega, x)`, frequency-major then voxel row-major.
#[derive(Debug, Clone)]
pub struct SusceptibilityField {
    grid: Grid3,
    freqs: FrequencyLattice,
    boundary_width: usize,
    values: Vec<Complex64>,
}

impl SusceptibilityField {
    pub fn zeros(grid: Grid3, freqs: FrequencyLattice) -> Self {
        let n = grid.len() * freqs.len();
        Self {
            grid,
            freqs,
            boundary_width: DEFAULT_BOUNDARY_WIDTH,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Wraps raw samples without enforcing the medium invariants; run
    /// [`validate_medium`] to check them.
    pub fn from_values(
        grid: Grid3,
        freqs: FrequencyLattice,
        boundary_width: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != grid.len() * freqs.len() {
            return Err(Error::precondition(format!(
                "expected {} samples ({} frequencies x {} voxels), got {}",
                grid.len() * freqs.len(),
                freqs.len(),
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            freqs,
            boundary_width,
            values,
        })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn freqs(&self) -> &FrequencyLattice {
        &self.freqs
    }

    pub fn boundary_width(&self) -> usize {
        self.boundary_width
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// All voxel samples at lattice index `m`.
    pub fn slice(&self, m: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.values[m * n..(m + 1) * n]
    }

    pub fn value(&self, m: usize, voxel: usize) -> Complex64 {
        self.values[m * self.grid.len() + voxel]
    }

    /// Voxel samples at `omega`, using the conjugate extension when needed.
    pub fn at_frequency(&self, omega: f64) -> Option<Vec<Complex64>> {
        let p = self.freqs.locate(omega)?;
        let s = self.slice(p.index);
        Some(if p.conjugate {
            s.iter().map(|v| v.conj()).collect()
        } else {
            s.to_vec()
        })
    }

    /// Voxels carrying a nonzero sample at any frequency, ascending.
    pub fn support(&self) -> Vec<usize> {
        let n = self.grid.len();
        (0..n)
            .filter(|&v| {
                (0..self.freqs.len()).any(|m| self.values[m * n + v] != Complex64::new(0.0, 0.0))
            })
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn is_vacuum(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }
}

/// Ball of homogeneous material.
#[derive(Debug, Clone)]
pub struct Inclusion {
    pub center: Vec3,
    pub radius: f64,
    pub model: Arc<dyn DispersionModel>,
}

/// Lorentz-oscillator ball, the parameter set of the default phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzInclusion {
    pub center: Vec3,
    pub radius: f64,
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

/// Voxels whose centres lie inside the ball, after checking that the ball
/// stays clear of the zero boundary layer.
fn ball_voxels(
    grid: &Grid3,
    center: Vec3,
    radius: f64,
    boundary_width: usize,
) -> Result<Vec<usize>> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::precondition(format!(
            "inclusion radius must be positive, got {radius}"
        )));
    }
    let (lo, hi) = grid.interior_box(boundary_width).ok_or_else(|| {
        Error::precondition(format!(
            "grid {:?} has no interior outside a boundary layer of width {boundary_width}",
            grid.dims
        ))
    })?;
    for a in 0..3 {
        if center[a] - radius < lo[a] || center[a] + radius > hi[a] {
            return Err(Error::precondition(format!(
                "inclusion at {center:?} with radius {radius} reaches the zero boundary layer \
                 (interior spans {lo:?}..{hi:?}); shrink it or enlarge the grid"
            )));
        }
    }
    Ok((0..grid.len())
        .filter(|&v| norm(sub(grid.center(v), center)) <= radius)
        .collect())
}

/// Sums the responses of all inclusions voxelwise.
pub fn build_phantom(
    grid: Grid3,
    freqs: FrequencyLattice,
    inclusions: &[Inclusion],
    boundary_width: usize,
) -> Result<SusceptibilityField> {
    let n = grid.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n * freqs.len()];
    for inc in inclusions {
        let voxels = ball_voxels(&grid, inc.center, inc.radius, boundary_width)?;
        for (m, &omega) in freqs.values().iter().enumerate() {
            let r = inc.model.response(omega);
            for &v in &voxels {
                values[m * n + v] += r;
            }
        }
    }
    SusceptibilityField::from_values(grid, freqs, boundary_width, values)
}

pub fn build_lorentzian_phantom(
    grid: Grid3,
    freqs: FrequencyLattice,
    inclusions: &[LorentzInclusion],
) -> Result<SusceptibilityField> {
    let mut built = Vec::with_capacity(inclusions.len());
    for inc in inclusions {
        if !(inc.damping > 0.0) {
            return Err(Error::precondition(format!(
                "Lorentz damping must be positive, got {}",
                inc.damping
            )));
        }
        built.push(Inclusion {
            center: inc.center,
            radius: inc.radius,
            model: Arc::new(Lorentz {
                strength: inc.strength,
                resonance: inc.resonance,
                damping: inc.damping,
            }),
        });
    }
    build_phantom(grid, freqs, &built, DEFAULT_BOUNDARY_WIDTH)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediumReport {
    pub max_boundary_magnitude: f64,
    pub max_symmetry_violation: f64,
    /// Inclusive voxel-index bounds of the nonzero support.
    pub support_bbox: Option<([usize; 3], [usize; 3])>,
    pub passed: bool,
}

const MEDIUM_TOL: f64 = 1e-12;

pub fn validate_medium(m: &SusceptibilityField) -> MediumReport {
    let grid = m.grid();
    let n = grid.len();
    let freqs = m.freqs().values();

    let mut max_boundary: f64 = 0.0;
    let mut bbox: Option<([usize; 3], [usize; 3])> = None;
    for v in 0..n {
        let peak = (0..freqs.len())
            .map(|f| m.value(f, v).norm())
            .fold(0.0, f64::max);
        if peak == 0.0 {
            continue;
        }
        if grid.in_boundary_layer(v, m.boundary_width()) {
            max_boundary = max_boundary.max(peak);
        }
        let c = grid.coords(v);
        bbox = Some(match bbox {
            None => (c, c),
            Some((lo, hi)) => (
                [0, 1, 2].map(|a| lo[a].min(c[a])),
                [0, 1, 2].map(|a| hi[a].max(c[a])),
            ),
        });
    }

    // Pairs (omega, -omega) present in storage; omega = 0 pairs with itself.
    let mut max_sym: f64 = 0.0;
    for (fi, &w) in freqs.iter().enumerate() {
        let partner = if w == 0.0 {
            Some(fi)
        } else if m.freqs().symmetric_closure() {
            None
        } else {
            m.freqs()
                .locate(-w)
                .filter(|p| !p.conjugate)
                .map(|p| p.index)
        };
        if let Some(pi) = partner {
            for v in 0..n {
                let d = m.value(pi, v) - m.value(fi, v).conj();
                max_sym = max_sym.max(d.norm());
            }
        }
    }

    MediumReport {
        max_boundary_magnitude: max_boundary,
        max_symmetry_violation: max_sym,
        support_bbox: bbox,
        passed: max_boundary <= MEDIUM_TOL && max_sym <= MEDIUM_TOL,
    }
}

/// Real Grüneisen parameter per voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct GruneisenField {
    grid: Grid3,
    values: Vec<f64>,
}

impl GruneisenField {
    pub fn constant(grid: Grid3, value: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![value; n],
        }
    }

    pub fn from_values(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::precondition(format!(
                "expected {} Grüneisen samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("Grüneisen samples must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Checks positivity wherever the medium is nonzero.
    pub fn check_against(&self, m: &SusceptibilityField) -> Result<()> {
        if !self.grid.same_as(m.grid()) {
            return Err(Error::precondition("Grüneisen and medium grids differ"));
        }
        for v in m.support() {
            if !(self.values[v] > 0.0) {
                return Err(Error::precondition(format!(
                    "Grüneisen parameter must be positive inside the medium; voxel {v} has {}",
                    self.values[v]
                )));
            }
        }
        Ok(())
    }
}
