//! Quantum Fisher information for the phase family exp(-i varphi n_a),
//! lossy-channel decompositions of it, lower bounds, and the asymptotic
//! precision law.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{loss_probability, LossMapSet};
use crate::par::indexed_map;
use crate::spin::{SpinDensity, SpinKet, C64, POSITIVITY_TOL};
use crate::wigner::{phi_derivative, SphereGrid};

mod optimizer;

pub use optimizer::{optimize_input_state, OptimizeOptions};

/// Relative eigenvalue cutoff in the SLD spectral sum; loss branches are
/// generically rank-deficient.
const EIGEN_CUTOFF_REL: f64 = 1e-12;

/// QFI of a pure state under the n_a phase generator: quadrupled photon
/// number variance in the sensing arm.
pub fn qfi_pure(state: &SpinKet) -> f64 {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, amp) in state.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        mean += i as f64 * p;
        second += (i * i) as f64 * p;
    }
    4.0 * (second - mean * mean)
}

/// Mixed-state QFI via the symmetric logarithmic derivative spectral form
/// F = 2 sum_{k,l} (lk - ll)^2 / (lk + ll) |<k| n_a |l>|^2.
pub fn qfi_mixed(rho: &SpinDensity) -> Result<f64> {
    let eig = rho.matrix().clone().symmetric_eigen();
    let mut lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let min_ev = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    if min_ev < -POSITIVITY_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: min_ev,
        });
    }
    for l in &mut lambdas {
        *l = l.max(0.0);
    }
    let max_ev = lambdas.iter().copied().fold(0.0f64, f64::max);
    let cutoff = EIGEN_CUTOFF_REL * max_ev;

    // B = V^H diag(0..N) V
    let dim = rho.matrix().nrows();
    let v = &eig.eigenvectors;
    let mut gv = v.clone();
    for r in 0..dim {
        for c in 0..dim {
            gv[(r, c)] *= r as f64;
        }
    }
    let b = v.adjoint() * gv;

    let mut fisher = 0.0;
    for k in 0..dim {
        for l in (k + 1)..dim {
            let sum = lambdas[k] + lambdas[l];
            if sum <= cutoff {
                continue;
            }
            let diff = lambdas[k] - lambdas[l];
            fisher += 2.0 * 2.0 * diff * diff / sum * b[(k, l)].norm_sqr();
        }
    }
    Ok(fisher)
}

/// QFI of a branch density given as a Kraus-column factorisation
/// rho = U U^dagger, evaluated in the column space. Equivalent to
/// `qfi_mixed` on the assembled matrix but cheaper for low-rank branches.
pub(crate) fn qfi_pure_state_branch(u: &DMatrix<C64>) -> f64 {
    let dim = u.nrows();
    let mut gu = u.clone();
    let mut ggu = u.clone();
    for r in 0..dim {
        let g = r as f64;
        for c in 0..u.ncols() {
            gu[(r, c)] *= g;
            ggu[(r, c)] *= g * g;
        }
    }
    let gram = u.adjoint() * u;
    let m1 = u.adjoint() * &gu;
    let m2 = u.adjoint() * &ggu;

    let eig = gram.symmetric_eigen();
    let mus: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mu_max = mus.iter().copied().fold(0.0f64, f64::max);
    if mu_max <= 0.0 {
        return 0.0;
    }
    let cutoff = EIGEN_CUTOFF_REL * mu_max;
    let support: Vec<usize> = (0..mus.len()).filter(|&a| mus[a] > cutoff).collect();

    // Generator blocks in the eigenbasis of the Gram matrix; eigenvectors of
    // rho restricted to its support are U w_a / sqrt(mu_a).
    let w = &eig.eigenvectors;
    let b_full = w.adjoint() * &m1 * w;
    let g2_full = w.adjoint() * &m2 * w;

    let mut fisher = 0.0;
    for &a in &support {
        let g2 = g2_full[(a, a)].re / mus[a];
        let in_support: f64 = support
            .iter()
            .map(|&bb| b_full[(a, bb)].norm_sqr() / (mus[a] * mus[bb]))
            .sum();
        // coupling of the support vector to the kernel of rho
        fisher += 4.0 * mus[a] * (g2 - in_support).max(0.0);
        for &bb in &support {
            if bb == a {
                continue;
            }
            let sum = mus[a] + mus[bb];
            let diff = mus[a] - mus[bb];
            fisher += 2.0 * diff * diff / sum * b_full[(a, bb)].norm_sqr() / (mus[a] * mus[bb]);
        }
    }
    fisher
}

/// QFI after equal-arm loss, decomposed over definite-loss branches:
/// sum_L p^N_L F_Q[Lambda^N_L(|psi><psi|)].
pub fn qfi_lossy(state: &SpinKet, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmissionOutOfRange { eta });
    }
    let n = state.n_photons();
    let maps = LossMapSet::new(n);
    let probs: Vec<f64> = (0..=n)
        .map(|lost| loss_probability(n, lost, eta).expect("lost <= n"))
        .collect();
    Ok(qfi_lossy_with(&maps, &probs, state.amplitudes()))
}

/// Branch-decomposed lossy QFI with precomputed maps and probabilities.
pub(crate) fn qfi_lossy_with(maps: &LossMapSet, probs: &[f64], amplitudes: &DVector<C64>) -> f64 {
    let terms = indexed_map(maps.n + 1, |lost| {
        branch_term(maps, probs, amplitudes, lost)
    });
    terms.iter().sum()
}

/// Sequential twin of [`qfi_lossy_with`] for callers that already saturate
/// the thread pool (the optimizer evaluates restarts concurrently instead).
/// Identical summation order keeps the two paths bit-equal.
pub(crate) fn qfi_lossy_with_seq(
    maps: &LossMapSet,
    probs: &[f64],
    amplitudes: &DVector<C64>,
) -> f64 {
    (0..=maps.n)
        .map(|lost| branch_term(maps, probs, amplitudes, lost))
        .sum()
}

fn branch_term(maps: &LossMapSet, probs: &[f64], amplitudes: &DVector<C64>, lost: usize) -> f64 {
    let p = probs[lost];
    if p == 0.0 || maps.n == lost {
        return 0.0;
    }
    let u = maps.branches[lost].pure_columns(amplitudes);
    p * qfi_pure_state_branch(&u)
}

/// Asymptotic precision limit sqrt((1 - eta) / (eta N)) for a lossy
/// interferometer; degenerate at eta = 0 and eta = 1.
pub fn asymptotic_precision(n: usize, eta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroPhotons);
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmissionOutOfRange { eta });
    }
    if eta == 0.0 || eta == 1.0 {
        return Err(Error::DegenerateTransmission { eta });
    }
    Ok(((1.0 - eta) / (eta * n as f64)).sqrt())
}

/// Superfidelity lower bound on the QFI: 2 Tr[(d rho / d varphi)^2] with
/// d rho / d varphi = -i [n_a, rho]. The purity-derivative term of the
/// general bound vanishes identically for a phase shift and is checked
/// before being dropped.
pub fn superfidelity_qfi_bound(rho: &SpinDensity) -> f64 {
    let dim = rho.matrix().nrows();
    let mut bound = 0.0;
    let mut purity_derivative = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let w = (r as f64 - c as f64) * rho.matrix()[(r, c)].norm_sqr();
            purity_derivative += w;
            bound += (r as f64 - c as f64) * w;
        }
    }
    debug_assert!(
        purity_derivative.abs() <= 1e-12,
        "purity must be stationary under a phase shift"
    );
    2.0 * bound
}

/// Phase-space lower bound on the lossy QFI:
/// 2 sum_{N'} p^N_{N-N'} (N'+1)/(4 pi) * integral (dW^{N'}/dphi)^2.
///
/// `grids` is indexed by remaining photon number and must cover 0..=N.
pub fn wigner_qfi_bound(state: &SpinKet, eta: f64, grids: &[SphereGrid]) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmissionOutOfRange { eta });
    }
    let n = state.n_photons();
    if grids.len() <= n {
        return Err(Error::GridTooCoarse {
            supported: grids.len().saturating_sub(1),
            needed: n,
        });
    }
    let maps = LossMapSet::new(n);
    let mut bound = 0.0;
    for lost in 0..=n {
        let p = loss_probability(n, lost, eta)?;
        if p == 0.0 {
            continue;
        }
        let remaining = n - lost;
        let u = maps.branches[lost].pure_columns(state.amplitudes());
        let branch = SpinDensity::from_trusted(remaining, &u * u.adjoint());
        let dfield = phi_derivative(&branch, &grids[remaining])?;
        let grid = dfield.grid();
        let dphi = 2.0 * std::f64::consts::PI / grid.n_phi() as f64;
        let mut integral = 0.0;
        for i in 0..grid.n_theta() {
            let mut row = 0.0;
            for j in 0..grid.n_phi() {
                let v = dfield.values()[(i, j)];
                row += v * v;
            }
            integral += grid.theta_weights()[i] * row * dphi;
        }
        bound += p * (remaining as f64 + 1.0) / (4.0 * std::f64::consts::PI) * integral;
    }
    Ok(2.0 * bound)
}

/// One solved optimisation cell: the achieved Fisher information and the
/// accompanying bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrecisionRecord {
    pub n_photons: usize,
    pub eta: f64,
    pub fisher: f64,
    /// 1 / sqrt(fisher).
    pub delta_phi: f64,
    /// Asymptotic law, absent at the degenerate transmissions 0 and 1.
    pub bound_asymptotic: Option<f64>,
    /// Wigner-derivative lower bound on the Fisher information.
    pub bound_wigner: f64,
    pub optimizer_meta: OptimizerMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerMeta {
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::conditional_loss_map;
    use crate::spin::noon_state;

    #[test]
    fn qfi_pure_reference_states() {
        for n in [1usize, 2, 7, 20] {
            let f = qfi_pure(&noon_state(n).unwrap());
            let expect = (n * n) as f64;
            assert!((f - expect).abs() <= 1e-12 * expect);
        }
        // generator eigenstates carry no phase information
        let mut v = DVector::zeros(6);
        v[3] = C64::new(1.0, 0.0);
        assert!(qfi_pure(&SpinKet::new(5, v).unwrap()).abs() < 1e-12);

        // (|J,J> + |J,J-1>)/sqrt(2): two-point distribution {N, N-1}
        let n = 9;
        let mut v = DVector::zeros(n + 1);
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[n] = a;
        v[n - 1] = a;
        let f = qfi_pure(&SpinKet::new(n, v).unwrap());
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qfi_mixed_consistency() {
        let ket = SpinKet::from_real(6, &[0.2, 0.4, 0.1, 0.3, 0.5, 0.2, 0.4]).unwrap();
        let f_pure = qfi_pure(&ket);
        let f_mixed = qfi_mixed(&ket.density()).unwrap();
        assert!((f_pure - f_mixed).abs() < 1e-9);

        let f = qfi_mixed(&SpinDensity::maximally_mixed(8)).unwrap();
        assert!(f.abs() < 1e-10);
    }

    #[test]
    fn decohered_noon_loses_all_information() {
        let n = 6;
        let noon = noon_state(n).unwrap().density();
        let mut mat = noon.matrix().clone();
        mat[(0, n)] = C64::new(0.0, 0.0);
        mat[(n, 0)] = C64::new(0.0, 0.0);
        let rho = SpinDensity::new(n, mat).unwrap();
        assert!(qfi_mixed(&rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn lossy_endpoints() {
        let ket = SpinKet::from_real(5, &[0.4, 0.2, 0.1, 0.3, 0.5, 0.2]).unwrap();
        let full = qfi_lossy(&ket, 1.0).unwrap();
        assert!((full - qfi_pure(&ket)).abs() < 1e-9);
        let none = qfi_lossy(&ket, 0.0).unwrap();
        assert!(none.abs() < 1e-12);
        assert!(qfi_lossy(&ket, 1.5).is_err());
    }

    #[test]
    fn noon_fragility() {
        let n = 8;
        let eta = 0.85;
        let f = qfi_lossy(&noon_state(n).unwrap(), eta).unwrap();
        let expect = eta.powi(n as i32) * (n * n) as f64;
        assert!((f - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn lossy_matches_independent_branch_sum() {
        let ket = SpinKet::from_real(7, &[0.3, 0.1, 0.4, 0.2, 0.5, 0.1, 0.3, 0.2]).unwrap();
        let eta = 0.7;
        let together = qfi_lossy(&ket, eta).unwrap();
        let rho = ket.density();
        let mut separate = 0.0;
        for lost in 0..=7usize {
            let p = loss_probability(7, lost, eta).unwrap();
            let branch = conditional_loss_map(&rho, lost).unwrap();
            separate += p * qfi_mixed(&branch).unwrap();
        }
        assert!((together - separate).abs() < 1e-10, "{together} vs {separate}");
    }

    #[test]
    fn asymptotic_precision_values() {
        let v = asymptotic_precision(30, 0.5).unwrap();
        assert!((v - (1.0f64 / 30.0).sqrt()).abs() < 1e-15);
        for n in [2usize, 5, 20] {
            let v = asymptotic_precision(n, 0.5).unwrap();
            assert!((v - 1.0 / (n as f64).sqrt()).abs() < 1e-15);
        }
        // monotone decreasing in both arguments
        assert!(asymptotic_precision(10, 0.6).unwrap() < asymptotic_precision(10, 0.5).unwrap());
        assert!(asymptotic_precision(11, 0.5).unwrap() < asymptotic_precision(10, 0.5).unwrap());
        assert!(asymptotic_precision(10, 1.0).is_err());
        assert!(asymptotic_precision(10, 0.0).is_err());
        assert!(asymptotic_precision(0, 0.5).is_err());
    }

    #[test]
    fn superfidelity_equals_qfi_for_pure_states() {
        let ket = SpinKet::from_real(6, &[0.1, 0.3, 0.2, 0.5, 0.4, 0.2, 0.1]).unwrap();
        let lhs = superfidelity_qfi_bound(&ket.density());
        let rhs = qfi_pure(&ket);
        assert!((lhs - rhs).abs() < 1e-10);
        assert!(superfidelity_qfi_bound(&SpinDensity::maximally_mixed(5)).abs() < 1e-14);
    }

    #[test]
    fn superfidelity_bounds_mixed_qfi() {
        let n = 7;
        let ket = SpinKet::from_real(n, &[0.3, 0.2, 0.4, 0.1, 0.2, 0.5, 0.3, 0.2]).unwrap();
        for lost in 0..=3usize {
            let branch = conditional_loss_map(&ket.density(), lost).unwrap();
            let bound = superfidelity_qfi_bound(&branch);
            let fisher = qfi_mixed(&branch).unwrap();
            assert!(bound <= fisher + 1e-9, "L = {lost}: {bound} > {fisher}");
        }
    }

    #[test]
    fn qfi_invariant_under_phase_shift() {
        let ket = SpinKet::from_real(6, &[0.2, 0.3, 0.1, 0.4, 0.2, 0.5, 0.3]).unwrap();
        let eta = 0.6;
        let base = qfi_lossy(&ket, eta).unwrap();
        for varphi in [0.3, 1.9, -0.7] {
            let shifted = qfi_lossy(&ket.phase_shift(varphi), eta).unwrap();
            assert!((base - shifted).abs() < 1e-9);
        }
    }
}
