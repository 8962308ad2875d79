use thiserror::Error;

/// Errors raised by domain checks across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angular momentum pair: 2j = {twice_j}, 2m = {twice_m}")]
    InvalidAngularMomentum { twice_j: i64, twice_m: i64 },

    #[error("amplitude vector has length {len}, expected {expected}")]
    AmplitudeLength { len: usize, expected: usize },

    #[error("state norm {norm} deviates from 1 beyond tolerance")]
    NotNormalized { norm: f64 },

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    MatrixShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("trace {trace} deviates from 1 beyond tolerance")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("a N00N state needs at least one photon")]
    EmptyNoon,

    #[error("monomial degree l + k = {degree} exceeds photon number {n_photons}")]
    MonomialDegree { degree: usize, n_photons: usize },

    #[error("cannot lose {lost} photons from a {n_photons}-photon state")]
    TooManyPhotonsLost { lost: usize, n_photons: usize },

    #[error("transmission {eta} outside [0, 1]")]
    TransmissionOutOfRange { eta: f64 },

    #[error("asymptotic expression is degenerate at transmission {eta}")]
    DegenerateTransmission { eta: f64 },

    #[error("photon number must be at least 1")]
    ZeroPhotons,

    #[error("grid supports photon numbers up to {supported}, but {needed} is required")]
    GridTooCoarse { supported: usize, needed: usize },

    #[error("fields live on mismatched grids or photon numbers")]
    GridMismatch,

    #[error("grid must have at least one node per axis")]
    EmptyGrid,

    #[error("Fock truncation at {max_total} photons exceeded (state holds up to {found})")]
    TruncationExceeded { max_total: usize, found: usize },

    #[error("imaginary residue {residue:e} exceeds tolerance; input is not a valid Wigner field source")]
    ImaginaryResidue { residue: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
