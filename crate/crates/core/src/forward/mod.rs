//! Frequency-domain electric field: incident plane wave, Lippmann–Schwinger
//! solve, Born far field, and a time-domain retarded-field oracle.
//!
//! The scalar kernel is `i exp(i omega r / c) / (omega r)`, applied as
//! `F E = F E0 + (grad div + omega^2/c^2) ∫ kernel(|x - y|) F mu(omega, y) F E(omega, y) dy`.

mod far_field;
pub(crate) use far_field::born_field_value;
pub mod green;
mod retarded;
mod solver;

pub use far_field::{
    born_far_field, check_direction, double_cross, double_cross_complex, far_field_from_solution,
    incident_plane_wave, scattering_amplitude, FarFieldSample,
};
pub use retarded::{
    frequency_domain_field, retarded_field_oracle, retarded_field_spectrum, CurrentSource,
    GaussianBlobCurrent, OracleOptions,
};
pub use solver::{
    lippmann_schwinger_solve, ComplexVectorField, ScatteringOperator, SolveReport, SolverMethod,
    SolverOptions,
};
