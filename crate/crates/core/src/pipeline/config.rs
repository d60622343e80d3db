use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{SolverMethod, SolverOptions};
use crate::inversion::{FredholmOptions, RecoverOptions};
use crate::medium::{
    build_phantom, FrequencyLattice, Grid3, GruneisenField, Inclusion, ModelSpec, PulseShape,
    PulseSpectrum, SusceptibilityField,
};
use crate::oct::cap_directions;
use crate::vec3::{norm, sub, Vec3};

/// One experiment, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Relative paths are taken relative to the configuration file.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_speed_of_light")]
    pub speed_of_light: f64,
    pub grid: GridConfig,
    pub frequencies: LatticeConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub gruneisen: GruneisenConfig,
    pub detector: DetectorConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub forward: ForwardConfig,
    #[serde(default)]
    pub inversion: InversionConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_speed_of_light() -> f64 {
    crate::DEFAULT_SPEED_OF_LIGHT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub spacing: f64,
    pub dims: [usize; 3],
    /// Centre of the first voxel; the grid is centred on the origin when absent.
    #[serde(default)]
    pub origin: Option<Vec3>,
}

/// Illumination frequencies `nu_i = i spacing`, `i = 1..=count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub spacing: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    /// Band half-width `eps`; must stay below the frequency spacing.
    /// Defaults to a quarter of the spacing.
    pub half_width: Option<f64>,
    pub band_points: usize,
    pub polarization: [f64; 2],
    pub delay: f64,
    pub chirp: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            half_width: None,
            band_points: 9,
            polarization: [1.0, 0.0],
            delay: 0.0,
            chirp: 0.0,
        }
    }
}

/// Unknown keys cannot be rejected here: the model parameters are flattened in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionConfig {
    pub center: Vec3,
    pub radius: f64,
    #[serde(flatten)]
    pub model: ModelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumConfig {
    pub boundary_width: usize,
    pub inclusions: Vec<InclusionConfig>,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self {
            boundary_width: 1,
            inclusions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub center: Vec3,
    pub radius: f64,
    pub value: f64,
}

/// `gamma = background`, overwritten inside each region in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GruneisenConfig {
    pub background: f64,
    pub regions: Vec<RegionConfig>,
}

impl Default for GruneisenConfig {
    fn default() -> Self {
        Self {
            background: 1.0,
            regions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// Plane depth `d`; the smallest admissible depth when absent.
    #[serde(default)]
    pub depth: Option<f64>,
    pub numerical_aperture: f64,
    pub directions: usize,
    /// OCT uses the first this many illumination frequencies; all by default.
    #[serde(default)]
    pub oct_frequencies: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub method: SolverMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            restart: d.restart,
            method: d.method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatteringModel {
    Born,
    LippmannSchwinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureModel {
    /// `gamma Re F mu(nu)`.
    Narrowband,
    /// Band quadrature of the absorbed energy under the incident field.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForwardConfig {
    pub scattering: ScatteringModel,
    pub pressure: PressureModel,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            scattering: ScatteringModel::Born,
            pressure: PressureModel::Narrowband,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionConfig {
    pub reg: Option<f64>,
    pub threshold: f64,
    pub fredholm_tol: f64,
    pub fredholm_max_iter: usize,
    /// Frequencies with `|A(nu)|` at or below this fraction of the peak are dropped.
    pub profile_floor: f64,
    pub dense_limit: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        let f = FredholmOptions::default();
        let r = RecoverOptions::default();
        Self {
            reg: r.reg,
            threshold: r.threshold,
            fredholm_tol: f.tol,
            fredholm_max_iter: f.max_iter,
            profile_floor: f.profile_floor,
            dense_limit: r.dense_limit,
            cg_tol: r.cg_tol,
            cg_max_iter: r.cg_max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Symmetry,
    Linearity,
    Plancherel,
    KramersKronig,
    BornScaling,
    RCancellation,
    Manufactured,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Symmetry,
        Suite::Linearity,
        Suite::Plancherel,
        Suite::KramersKronig,
        Suite::BornScaling,
        Suite::RCancellation,
        Suite::Manufactured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Symmetry => "symmetry",
            Suite::Linearity => "linearity",
            Suite::Plancherel => "plancherel",
            Suite::KramersKronig => "kramers_kronig",
            Suite::BornScaling => "born_scaling",
            Suite::RCancellation => "r_cancellation",
            Suite::Manufactured => "manufactured",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    /// Feeds the symmetry suite a fixture without Hermitian symmetry.
    pub break_symmetry: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            break_symmetry: false,
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; a relative `output_dir` is rebased on the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        cfg.validate()?;
        if cfg.output_dir.is_relative() {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)
            .map_err(|e| Error::precondition(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::precondition(format!("cannot serialize configuration: {e}")))
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::precondition(msg));
        if !(self.speed_of_light.is_finite() && self.speed_of_light > 0.0) {
            return bad(format!("speed_of_light must be positive, got {}", self.speed_of_light));
        }
        self.grid()?;
        let f = &self.frequencies;
        if !(f.spacing.is_finite() && f.spacing > 0.0) {
            return bad(format!("frequency spacing must be positive, got {}", f.spacing));
        }
        if f.count < 2 {
            return bad(format!("need at least two frequencies, got {}", f.count));
        }
        let eps = self.half_width();
        if !(eps > 0.0 && eps < f.spacing) {
            return bad(format!(
                "pulse half_width must lie in (0, {}), got {eps}",
                f.spacing
            ));
        }
        let d = &self.detector;
        if !(d.numerical_aperture > 0.0 && d.numerical_aperture < 1.0) {
            return bad(format!(
                "numerical_aperture must lie in (0, 1), got {}",
                d.numerical_aperture
            ));
        }
        if d.directions == 0 {
            return bad("detector needs at least one direction".into());
        }
        if let Some(n) = d.oct_frequencies {
            if n == 0 || n > f.count {
                return bad(format!("oct_frequencies must lie in 1..={}, got {n}", f.count));
            }
        }
        if let Some(depth) = d.depth {
            if !(depth > 0.0) {
                return bad(format!("detector depth must be positive, got {depth}"));
            }
        }
        for inc in &self.medium.inclusions {
            inc.model.build()?;
        }
        for r in &self.gruneisen.regions {
            if !(r.radius > 0.0 && r.value.is_finite()) {
                return bad(format!("invalid Grüneisen region {r:?}"));
            }
        }
        if !self.gruneisen.background.is_finite() {
            return bad("Grüneisen background must be finite".into());
        }
        let s = &self.solver;
        if !(s.tol > 0.0) || s.max_iter == 0 || s.restart == 0 {
            return bad("solver needs tol > 0, max_iter > 0 and restart > 0".into());
        }
        let inv = &self.inversion;
        if let Some(r) = inv.reg {
            if !(r > 0.0) {
                return bad(format!("inversion reg must be positive, got {r}"));
            }
        }
        if !(inv.fredholm_tol > 0.0 && inv.cg_tol > 0.0) || !(0.0..1.0).contains(&inv.profile_floor) {
            return bad("inversion needs positive tolerances and profile_floor in [0, 1)".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid3> {
        match self.grid.origin {
            Some(o) => Grid3::new(o, self.grid.spacing, self.grid.dims),
            None => Grid3::centered(self.grid.spacing, self.grid.dims),
        }
    }

    pub fn half_width(&self) -> f64 {
        self.pulse.half_width.unwrap_or(0.25 * self.frequencies.spacing)
    }

    /// `nu_i = i spacing`.
    pub fn frequencies(&self) -> Vec<f64> {
        (1..=self.frequencies.count)
            .map(|i| i as f64 * self.frequencies.spacing)
            .collect()
    }

    pub fn oct_frequencies(&self) -> Vec<f64> {
        let mut f = self.frequencies();
        f.truncate(self.detector.oct_frequencies.unwrap_or(f.len()));
        f
    }

    /// Medium lattice: the illumination frequencies with conjugate closure.
    pub fn lattice(&self) -> Result<FrequencyLattice> {
        let s = self.frequencies.spacing;
        FrequencyLattice::uniform(s, s, self.frequencies.count, true)
    }

    fn inclusions(&self) -> Result<Vec<Inclusion>> {
        self.medium
            .inclusions
            .iter()
            .map(|inc| {
                Ok(Inclusion {
                    center: inc.center,
                    radius: inc.radius,
                    model: inc.model.build()?,
                })
            })
            .collect()
    }

    pub fn medium(&self) -> Result<SusceptibilityField> {
        self.medium_on(self.lattice()?)
    }

    /// The phantom sampled on an arbitrary lattice.
    pub fn medium_on(&self, lattice: FrequencyLattice) -> Result<SusceptibilityField> {
        build_phantom(self.grid()?, lattice, &self.inclusions()?, self.medium.boundary_width)
    }

    pub fn gruneisen(&self) -> Result<GruneisenField> {
        let grid = self.grid()?;
        let values = (0..grid.len())
            .map(|v| {
                let x = grid.center(v);
                self.gruneisen
                    .regions
                    .iter()
                    .rev()
                    .find(|r| norm(sub(x, r.center)) <= r.radius)
                    .map_or(self.gruneisen.background, |r| r.value)
            })
            .collect();
        GruneisenField::from_values(grid, values)
    }

    pub fn pulse(&self, center: f64) -> Result<PulseSpectrum> {
        let [a, b] = self.pulse.polarization;
        let len = (a * a + b * b).sqrt();
        if !(len > 0.0) {
            return Err(Error::precondition("pulse polarization must be non-zero"));
        }
        PulseSpectrum::new(
            center,
            self.half_width(),
            [a / len, b / len, 0.0],
            PulseShape {
                delay: self.pulse.delay,
                chirp: self.pulse.chirp,
            },
            self.pulse.band_points,
        )
    }

    pub fn directions(&self) -> Result<Vec<Vec3>> {
        cap_directions(
            self.detector.directions,
            self.detector.numerical_aperture,
            self.seed,
        )
    }

    /// Configured depth, or the smallest depth clearing the pulse.
    pub fn detector_depth(&self, pulse: &PulseSpectrum) -> f64 {
        self.detector
            .depth
            .unwrap_or_else(|| self.speed_of_light * pulse.temporal_support().1.max(0.0) + 1.0)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            restart: self.solver.restart,
            method: self.solver.method,
            speed_of_light: self.speed_of_light,
        }
    }

    pub fn fredholm_options(&self) -> FredholmOptions {
        FredholmOptions {
            tol: self.inversion.fredholm_tol,
            max_iter: self.inversion.fredholm_max_iter,
            profile_floor: self.inversion.profile_floor,
            ..FredholmOptions::default()
        }
    }

    pub fn recover_options(&self) -> RecoverOptions {
        RecoverOptions {
            reg: self.inversion.reg,
            threshold: self.inversion.threshold,
            cg_tol: self.inversion.cg_tol,
            cg_max_iter: self.inversion.cg_max_iter,
            dense_limit: self.inversion.dense_limit,
        }
    }
}
