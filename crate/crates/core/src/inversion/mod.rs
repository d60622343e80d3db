//! Reconstruction of the Grüneisen parameter from OCT and PAT data:
//! Kramers–Kronig transform, the kernel `K[p~]`, single-material split,
//! second-kind Fredholm solve on the cone, and recovery of `gamma`.

mod cone;
mod fredholm;
mod hilbert;
mod kernel;
mod recover;
mod split;

pub use cone::{ConeSample, ConeSampling};
pub use fredholm::{
    fredholm_solve, normalize_data, solve_with, FredholmMethod, FredholmOperator,
    FredholmOptions, FredholmReport,
};
pub use hilbert::{half_lattice_step, kramers_kronig, kramers_kronig_half};
pub use kernel::{apply_forward, kernel_k, KernelK};
pub use recover::{recover_gamma, GammaDiagnostics, GammaEstimate, RecoverOptions};
pub use split::{material_split, MaterialSplit};
