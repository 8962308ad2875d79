//! Fixed-photon-number two-mode states in the angular momentum
//! representation, and the phase-shift action on them.
//!
//! A state of N photons split over modes a and b is a spin J = N/2 object;
//! the basis vector |J,m> carries J+m photons in arm a and J-m in arm b.
//! Amplitude vectors are ordered by ascending m = -J..J, so index i equals
//! the photon count in the sensing arm.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{log_factorial, wigner_rotation_matrix};

pub type C64 = Complex<f64>;

/// Tolerance for accepting externally supplied norms and traces.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Loss maps produce eigenvalues this far below zero from rounding alone.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Pure N-photon two-mode state: amplitudes c_m over |J,m>, m ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KetRepr", into = "KetRepr")]
pub struct SpinKet {
    n_photons: usize,
    amplitudes: DVector<C64>,
}

impl SpinKet {
    /// Build from amplitudes; rejects wrong length and norms off unity by
    /// more than 1e-9.
    pub fn new(n_photons: usize, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != n_photons + 1 {
            return Err(Error::AmplitudeLength {
                len: amplitudes.len(),
                expected: n_photons + 1,
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            n_photons,
            amplitudes,
        })
    }

    /// Normalise an arbitrary nonzero amplitude vector.
    pub fn normalized(n_photons: usize, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(n_photons, amplitudes / C64::new(norm, 0.0))
    }

    /// Real nonnegative amplitudes (the optimizer's default search space).
    pub fn from_real(n_photons: usize, amplitudes: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| C64::new(x, 0.0)),
        );
        Self::normalized(n_photons, v)
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// Amplitude on |J,m>, indexed by i = J + m.
    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    /// c_m -> exp(-i varphi (J + m)) c_m.
    pub fn phase_shift(&self, varphi: f64) -> SpinKet {
        let amplitudes = DVector::from_iterator(
            self.amplitudes.len(),
            self.amplitudes
                .iter()
                .enumerate()
                .map(|(i, c)| C64::from_polar(1.0, -varphi * i as f64) * c),
        );
        SpinKet {
            n_photons: self.n_photons,
            amplitudes,
        }
    }

    /// Projector |psi><psi| as a density.
    pub fn density(&self) -> SpinDensity {
        let n = self.amplitudes.len();
        let mat = DMatrix::from_fn(n, n, |r, c| {
            self.amplitudes[r] * self.amplitudes[c].conj()
        });
        SpinDensity {
            n_photons: self.n_photons,
            matrix: mat,
        }
    }
}

/// Mixed state on a fixed-photon-number subspace: Hermitian, unit trace,
/// positive semidefinite (up to -1e-10 on eigenvalues).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub struct SpinDensity {
    n_photons: usize,
    matrix: DMatrix<C64>,
}

impl SpinDensity {
    /// Validating constructor: shape, Hermiticity, trace and positivity.
    pub fn new(n_photons: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = n_photons + 1;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::MatrixShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: dim,
            });
        }
        let mut max_asym = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                let diff = (matrix[(r, c)] - matrix[(c, r)].conj()).norm();
                max_asym = max_asym.max(diff);
            }
        }
        if max_asym > NORMALIZATION_TOL {
            return Err(Error::NotHermitian {
                max_asymmetry: max_asym,
            });
        }
        let trace: C64 = matrix.diagonal().iter().sum();
        if (trace.re - 1.0).abs() > NORMALIZATION_TOL || trace.im.abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidTrace { trace: trace.re });
        }
        let min_ev = matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_ev < -POSITIVITY_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min_ev,
            });
        }
        Ok(Self { n_photons, matrix })
    }

    /// Constructor for matrices produced inside the crate, where the
    /// invariants hold by construction.
    pub(crate) fn from_trusted(n_photons: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), n_photons + 1);
        Self { n_photons, matrix }
    }

    /// The maximally mixed state I/(N+1).
    pub fn maximally_mixed(n_photons: usize) -> Self {
        let dim = n_photons + 1;
        let matrix =
            DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        Self { n_photons, matrix }
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.matrix
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Eigenvalues of the density matrix (unsorted).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    /// rho_{m1,m2} -> exp(-i varphi (m1 - m2)) rho_{m1,m2}.
    pub fn phase_shift(&self, varphi: f64) -> SpinDensity {
        let n = self.matrix.nrows();
        let matrix = DMatrix::from_fn(n, n, |r, c| {
            self.matrix[(r, c)] * C64::from_polar(1.0, -varphi * (r as f64 - c as f64))
        });
        SpinDensity {
            n_photons: self.n_photons,
            matrix,
        }
    }
}

/// Diagonal of the sensing-arm photon number operator on N photons:
/// n_a |J,m> = (J+m) |J,m>, i.e. (0, 1, ..., N).
pub fn number_operator_a(n_photons: usize) -> DVector<f64> {
    DVector::from_iterator(n_photons + 1, (0..=n_photons).map(|i| i as f64))
}

/// The N00N state (|N,0> + |0,N>)/sqrt(2).
pub fn noon_state(n_photons: usize) -> Result<SpinKet> {
    if n_photons == 0 {
        return Err(Error::EmptyNoon);
    }
    let mut v = DVector::zeros(n_photons + 1);
    let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] = amp;
    v[n_photons] = amp;
    SpinKet::new(n_photons, v)
}

/// Matrix of the monomial a^l b^k mapping the spin-N/2 basis into the
/// spin-(N-l-k)/2 basis. Row i' receives column i = i' + l with weight
/// sqrt(i!/(i-l)! * (N-i)!/(N-i-k)!); entries that would need a negative
/// factorial argument are zero.
pub fn monomial_lower(n_photons: usize, l: usize, k: usize) -> Result<DMatrix<f64>> {
    let degree = l + k;
    if degree > n_photons {
        return Err(Error::MonomialDegree {
            degree,
            n_photons,
        });
    }
    let rows = n_photons - degree + 1;
    let cols = n_photons + 1;
    let mut m = DMatrix::zeros(rows, cols);
    for row in 0..rows {
        let col = row + l;
        let b_in = n_photons - col;
        // b-mode needs at least k photons; guaranteed here since
        // b_in = N - row - l >= N - (rows-1) - l = k.
        debug_assert!(b_in >= k);
        let ln = 0.5
            * (log_factorial(col) - log_factorial(col - l) + log_factorial(b_in)
                - log_factorial(b_in - k));
        m[(row, col)] = ln.exp();
    }
    Ok(m)
}

/// Conjugate a density by the rotation D(alpha, beta, gamma).
pub fn su2_rotate(rho: &SpinDensity, alpha: f64, beta: f64, gamma: f64) -> SpinDensity {
    let d = wigner_rotation_matrix(rho.n_photons(), alpha, beta, gamma);
    let matrix = &d * rho.matrix() * d.adjoint();
    SpinDensity::from_trusted(rho.n_photons(), matrix)
}

#[derive(Serialize, Deserialize)]
struct KetRepr {
    n_photons: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<SpinKet> for KetRepr {
    fn from(ket: SpinKet) -> Self {
        Self {
            n_photons: ket.n_photons,
            re: ket.amplitudes.iter().map(|z| z.re).collect(),
            im: ket.amplitudes.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<KetRepr> for SpinKet {
    type Error = Error;
    fn try_from(repr: KetRepr) -> Result<Self> {
        if repr.re.len() != repr.im.len() {
            return Err(Error::AmplitudeLength {
                len: repr.im.len(),
                expected: repr.re.len(),
            });
        }
        let v = DVector::from_iterator(
            repr.re.len(),
            repr.re
                .iter()
                .zip(&repr.im)
                .map(|(&re, &im)| C64::new(re, im)),
        );
        SpinKet::new(repr.n_photons, v)
    }
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    n_photons: usize,
    /// Row-major flattening of the (N+1)x(N+1) matrix.
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<SpinDensity> for DensityRepr {
    fn from(rho: SpinDensity) -> Self {
        let dim = rho.n_photons + 1;
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                re.push(rho.matrix[(r, c)].re);
                im.push(rho.matrix[(r, c)].im);
            }
        }
        Self {
            n_photons: rho.n_photons,
            re,
            im,
        }
    }
}

impl TryFrom<DensityRepr> for SpinDensity {
    type Error = Error;
    fn try_from(repr: DensityRepr) -> Result<Self> {
        let dim = repr.n_photons + 1;
        if repr.re.len() != dim * dim || repr.im.len() != dim * dim {
            return Err(Error::MatrixShape {
                rows: repr.re.len() / dim.max(1),
                cols: dim,
                expected: dim,
            });
        }
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            C64::new(repr.re[r * dim + c], repr.im[r * dim + c])
        });
        SpinDensity::new(repr.n_photons, matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_operator_eigenvalues() {
        assert_eq!(number_operator_a(2).as_slice(), &[0.0, 1.0, 2.0]);
        assert_eq!(number_operator_a(0).as_slice(), &[0.0]);
        assert_eq!(number_operator_a(10)[10], 10.0);
    }

    #[test]
    fn noon_state_amplitudes() {
        let ket = noon_state(2).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ket.amplitude(0).re - inv).abs() < 1e-15);
        assert!(ket.amplitude(1).norm() < 1e-15);
        assert!((ket.amplitude(2).re - inv).abs() < 1e-15);
        assert!((ket.amplitudes().norm() - 1.0).abs() < 1e-15);
        assert!(noon_state(0).is_err());
    }

    #[test]
    fn constructors_reject_bad_inputs() {
        let v = DVector::from_element(3, C64::new(1.0, 0.0));
        assert!(matches!(
            SpinKet::new(2, v.clone()),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            SpinKet::new(3, v),
            Err(Error::AmplitudeLength { .. })
        ));

        let m = DMatrix::from_diagonal_element(3, 3, C64::new(0.9, 0.0));
        assert!(matches!(
            SpinDensity::new(2, m),
            Err(Error::InvalidTrace { .. })
        ));
        let mut m = DMatrix::from_element(3, 3, C64::new(0.0, 0.0));
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(
            SpinDensity::new(2, m),
            Err(Error::NotHermitian { .. })
        ));
        // Hermitian, unit trace, but indefinite.
        let mut m = DMatrix::from_element(2, 2, C64::new(0.0, 0.0));
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(matches!(
            SpinDensity::new(1, m),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn phase_shift_noon() {
        let n = 4;
        let phi = 0.37;
        let shifted = noon_state(n).unwrap().phase_shift(phi);
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        assert!((shifted.amplitude(0) - C64::new(inv, 0.0)).norm() < 1e-15);
        let expect = C64::from_polar(inv, -phi * n as f64);
        assert!((shifted.amplitude(n) - expect).norm() < 1e-15);
    }

    #[test]
    fn phase_shift_is_group_action() {
        let ket = SpinKet::from_real(3, &[0.5, 0.1, 0.7, 0.2]).unwrap();
        let a = ket.phase_shift(0.4).phase_shift(1.1);
        let b = ket.phase_shift(1.5);
        for i in 0..4 {
            assert!((a.amplitude(i) - b.amplitude(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_shift_preserves_purity() {
        let ket = SpinKet::from_real(4, &[0.1, 0.4, 0.2, 0.6, 0.3]).unwrap();
        let rho = ket.density();
        let shifted = rho.phase_shift(2.2);
        assert!((rho.purity() - shifted.purity()).abs() < 1e-12);
        assert!((shifted.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monomial_identity_and_annihilation() {
        let id = monomial_lower(5, 0, 0).unwrap();
        assert_eq!(id, DMatrix::identity(6, 6));

        // a |N_a 0_b> = sqrt(N) |N-1_a 0_b>
        let n = 7;
        let m = monomial_lower(n, 1, 0).unwrap();
        assert!((m[(n - 1, n)] - (n as f64).sqrt()).abs() < 1e-12);

        // a b |1_a 1_b> = |0,0>: N=2 basis index 1 is |1_a 1_b>
        let m = monomial_lower(2, 1, 1).unwrap();
        assert_eq!(m.nrows(), 1);
        assert!((m[(0, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(0, 2)], 0.0);

        assert!(monomial_lower(2, 2, 1).is_err());
    }

    #[test]
    fn su2_rotation_preserves_spectrum() {
        let ket = SpinKet::from_real(8, &[0.2, 0.1, 0.3, 0.4, 0.5, 0.1, 0.2, 0.3, 0.1]).unwrap();
        // Mix with the maximally mixed state for a full-rank test case.
        let pure = ket.density();
        let dim = 9;
        let mm = SpinDensity::maximally_mixed(8);
        let mat = pure.matrix() * C64::new(0.6, 0.0) + mm.matrix() * C64::new(0.4, 0.0);
        let rho = SpinDensity::new(8, mat).unwrap();

        let rotated = su2_rotate(&rho, 0.3, 1.2, -0.4);
        assert!((rotated.trace() - 1.0).abs() < 1e-12);
        let mut before = rho.eigenvalues();
        let mut after = rotated.eigenvalues();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for i in 0..dim {
            assert!((before[i] - after[i]).abs() < 1e-12);
        }

        let same = su2_rotate(&rho, 0.0, 0.0, 0.0);
        assert!((same.matrix() - rho.matrix()).norm() < 1e-13);
    }

    #[test]
    fn rotation_about_z_matches_phase_shift_on_densities() {
        let ket = SpinKet::from_real(5, &[0.4, 0.2, 0.1, 0.3, 0.5, 0.1]).unwrap();
        let rho = ket.density();
        let varphi = 0.83;
        let a = su2_rotate(&rho, varphi, 0.0, 0.0);
        let b = rho.phase_shift(varphi);
        assert!((a.matrix() - b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn serde_roundtrip() {
        let ket = SpinKet::from_real(3, &[0.5, 0.1, 0.7, 0.2]).unwrap();
        let json = serde_json::to_string(&ket).unwrap();
        let back: SpinKet = serde_json::from_str(&json).unwrap();
        assert_eq!(ket, back);

        let rho = ket.density();
        let json = serde_json::to_string(&rho).unwrap();
        let back: SpinDensity = serde_json::from_str(&json).unwrap();
        assert!((rho.matrix() - back.matrix()).norm() < 1e-14);
    }
}
