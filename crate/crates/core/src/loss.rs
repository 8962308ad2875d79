//! The equal-arm photon loss channel: binomial loss probabilities and the
//! trace-preserving conditional maps between fixed-photon-number subspaces.
//!
//! Losing L photons out of N maps the spin-N/2 space onto spin-(N-L)/2.
//! The conditional map itself carries no transmission dependence; eta only
//! weights the branches.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::indexed_map;
use crate::spin::{SpinDensity, C64};
use crate::su2::{log_binomial, log_factorial};

pub mod fock;

/// Probability that exactly `lost` of `n` photons are lost at transmission
/// `eta`: C(N,L) eta^(N-L) (1-eta)^L, assembled in log space.
pub fn loss_probability(n: usize, lost: usize, eta: f64) -> Result<f64> {
    if lost > n {
        return Err(Error::TooManyPhotonsLost {
            lost,
            n_photons: n,
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmissionOutOfRange { eta });
    }
    // 0^0 = 1 at the endpoints.
    if eta == 1.0 {
        return Ok(if lost == 0 { 1.0 } else { 0.0 });
    }
    if eta == 0.0 {
        return Ok(if lost == n { 1.0 } else { 0.0 });
    }
    let kept = n - lost;
    let ln = log_binomial(n, lost) + kept as f64 * eta.ln() + lost as f64 * (1.0 - eta).ln();
    Ok(ln.exp())
}

/// Kraus vectors of one conditional branch: the map
/// rho -> sum_l u_l rho u_l^T with u_l the banded monomial a^l b^(L-l)
/// scaled by sqrt(C(L,l) (N-L)!/N!).
#[derive(Debug, Clone)]
pub(crate) struct BranchMap {
    pub(crate) lost: usize,
    /// kraus[l][row] multiplies input index row + l.
    pub(crate) kraus: Vec<Vec<f64>>,
}

impl BranchMap {
    pub(crate) fn new(n: usize, lost: usize) -> Self {
        let out_dim = n - lost + 1;
        let ln_norm = log_factorial(n - lost) - log_factorial(n);
        let kraus = (0..=lost)
            .map(|l| {
                let k = lost - l;
                (0..out_dim)
                    .map(|row| {
                        let col = row + l;
                        let b_in = n - col;
                        if b_in < k {
                            return 0.0;
                        }
                        let ln = 0.5
                            * (ln_norm
                                + log_binomial(lost, l)
                                + log_factorial(col)
                                - log_factorial(col - l)
                                + log_factorial(b_in)
                                - log_factorial(b_in - k));
                        ln.exp()
                    })
                    .collect()
            })
            .collect();
        Self { lost, kraus }
    }

    /// Apply the branch map to an (N+1)x(N+1) matrix, producing the
    /// (N-L+1)x(N-L+1) image. Trace is preserved for valid densities.
    pub(crate) fn apply(&self, mat: &DMatrix<C64>) -> DMatrix<C64> {
        let out_dim = mat.nrows() - self.lost;
        let mut out = DMatrix::zeros(out_dim, out_dim);
        for (l, coeffs) in self.kraus.iter().enumerate() {
            for r in 0..out_dim {
                let cr = coeffs[r];
                if cr == 0.0 {
                    continue;
                }
                for c in 0..out_dim {
                    let w = cr * coeffs[c];
                    if w != 0.0 {
                        out[(r, c)] += mat[(r + l, c + l)] * w;
                    }
                }
            }
        }
        out
    }

    /// Image of a pure state: the stacked Kraus-vector columns
    /// u_l[row] = kraus[l][row] * c[row + l], so that the branch density is
    /// U U^dagger without ever forming the input projector.
    pub(crate) fn pure_columns(&self, amplitudes: &DVector<C64>) -> DMatrix<C64> {
        let out_dim = amplitudes.len() - self.lost;
        DMatrix::from_fn(out_dim, self.kraus.len(), |row, l| {
            amplitudes[row + l] * self.kraus[l][row]
        })
    }
}

/// All conditional branch maps for an N-photon input, built once and shared.
#[derive(Debug, Clone)]
pub(crate) struct LossMapSet {
    pub(crate) n: usize,
    pub(crate) branches: Vec<BranchMap>,
}

impl LossMapSet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            branches: (0..=n).map(|lost| BranchMap::new(n, lost)).collect(),
        }
    }
}

/// The conditional loss map Lambda^N_L applied to a density:
/// (N-L)!/N! * sum_l C(L,l) M_{l,L-l} rho M_{l,L-l}^dagger.
pub fn conditional_loss_map(rho: &SpinDensity, lost: usize) -> Result<SpinDensity> {
    let n = rho.n_photons();
    if lost > n {
        return Err(Error::TooManyPhotonsLost {
            lost,
            n_photons: n,
        });
    }
    let branch = BranchMap::new(n, lost);
    let out = branch.apply(rho.matrix());
    Ok(SpinDensity::from_trusted(n - lost, out))
}

/// Direct-sum decomposition of a state after equal-arm loss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossEnsemble {
    pub n_input: usize,
    pub eta: f64,
    /// Branches ascending in the number of lost photons.
    pub branches: Vec<LossBranch>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossBranch {
    pub lost: usize,
    pub probability: f64,
    pub rho: SpinDensity,
}

impl LossEnsemble {
    /// Sum of branch probabilities (1 for a complete ensemble).
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

/// Full ensemble {(L, p^N_L, Lambda^N_L(rho))} for L = 0..N, including
/// branches of vanishing probability so that the probabilities always sum
/// to one exactly.
pub fn full_loss_ensemble(rho: &SpinDensity, eta: f64) -> Result<LossEnsemble> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmissionOutOfRange { eta });
    }
    let n = rho.n_photons();
    let branches = indexed_map(n + 1, |lost| {
        let probability = loss_probability(n, lost, eta).expect("lost <= n by construction");
        let branch = BranchMap::new(n, lost);
        LossBranch {
            lost,
            probability,
            rho: SpinDensity::from_trusted(n - lost, branch.apply(rho.matrix())),
        }
    });
    Ok(LossEnsemble {
        n_input: n,
        eta,
        branches,
    })
}

#[allow(dead_code)]
fn complex(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}
