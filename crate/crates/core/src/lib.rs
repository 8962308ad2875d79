//! SU(2) phase-space toolkit for lossy two-mode interferometry at fixed
//! photon number.
//!
//! The crate covers the full desk-scale analysis chain (N up to about 50):
//!
//! - [`su2`]: numerically stable special functions (log-factorials,
//!   Clebsch–Gordan coefficients, Wigner d-matrices, spherical harmonics).
//! - [`spin`]: fixed-photon-number two-mode states and the phase shift.
//! - [`loss`]: the equal-arm photon-loss channel as binomial probabilities
//!   plus conditional maps between photon-number subspaces, with a
//!   brute-force Fock-space oracle for validation.
//! - [`wigner`]: the spin Wigner transform, its inverse, band-limited
//!   quadrature on the sphere, overlaps and azimuthal derivatives.
//! - [`metrology`]: quantum Fisher information (pure, mixed, lossy), the
//!   superfidelity and Wigner-derivative lower bounds, the asymptotic
//!   precision law, and the optimal-input-state search.
//! - [`loss_kernel`]: the loss transformation as a zonal convolution on the
//!   sphere, with exact and asymptotic kernel profiles.
//!
//! Heavy inner loops (field evaluation over grid nodes, loss branches,
//! optimizer restarts) run on rayon when the default `parallel` feature is
//! enabled and fall back to plain iteration without it; either way the
//! reduction order is fixed, so results are bit-identical across thread
//! counts.

pub mod error;
pub mod half_int;
pub mod loss;
pub mod loss_kernel;
pub mod metrology;
mod par;
mod quad;
pub mod spin;
pub mod su2;
pub mod wigner;

pub use error::{Error, Result};
pub use half_int::HalfInt;
pub use loss::{conditional_loss_map, full_loss_ensemble, loss_probability, LossBranch, LossEnsemble};
pub use loss_kernel::{
    asymptotic_kernel_profile, convolve_loss, exact_kernel_profile, order0_kernel, KernelKind,
    KernelProfile,
};
pub use metrology::{
    asymptotic_precision, optimize_input_state, qfi_lossy, qfi_mixed, qfi_pure,
    superfidelity_qfi_bound, wigner_qfi_bound, OptimizeOptions, OptimizerMeta, PrecisionRecord,
};
pub use spin::{monomial_lower, noon_state, number_operator_a, su2_rotate, SpinDensity, SpinKet};
pub use su2::{
    clebsch_gordan, log_factorial, spherical_harmonic, wigner_rotation_matrix, wigner_small_d,
};
pub use wigner::{
    azimuthal_section, azimuthal_spectrum, default_grids, inverse_wigner, overlap_trace,
    phi_derivative, wigner_function, wigner_kernel_matrix, SphereGrid, WignerField,
};
