//! Brute-force Kraus channel in a truncated two-mode Fock space.
//!
//! This is validation support: it applies the loss channel with the raw
//! per-mode Kraus operators, without any of the fixed-photon-number
//! structure the rest of the crate relies on. Block-by-block agreement with
//! [`full_loss_ensemble`](super::full_loss_ensemble) is what certifies the
//! conditional maps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spin::{SpinDensity, C64};
use crate::su2::log_factorial;

/// The oracle is meant for small systems only.
pub const MAX_ORACLE_PHOTONS: usize = 12;

/// Two-mode density on the Fock grid {0..n_max} x {0..n_max}, row index
/// na * (n_max + 1) + nb.
#[derive(Debug, Clone)]
pub struct FockDensity {
    n_max: usize,
    matrix: DMatrix<C64>,
}

impl FockDensity {
    /// Embed a fixed-photon-number state into the truncated Fock grid.
    pub fn embed(rho: &SpinDensity) -> Result<Self> {
        let n = rho.n_photons();
        if n > MAX_ORACLE_PHOTONS {
            return Err(Error::TruncationExceeded {
                max_total: MAX_ORACLE_PHOTONS,
                found: n,
            });
        }
        let n_max = n;
        let side = n_max + 1;
        let mut matrix = DMatrix::zeros(side * side, side * side);
        for i in 0..=n {
            for j in 0..=n {
                // |i_a (n-i)_b>
                let row = i * side + (n - i);
                let col = j * side + (n - j);
                matrix[(row, col)] = rho.matrix()[(i, j)];
            }
        }
        Ok(Self { n_max, matrix })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Extract the total-photon-number block: its weight and the normalised
    /// density on the spin-(n/2) subspace. Weight 0 yields a zero matrix.
    pub fn block(&self, n_total: usize) -> (f64, DMatrix<C64>) {
        assert!(n_total <= self.n_max);
        let side = self.n_max + 1;
        let dim = n_total + 1;
        let mut block = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let row = i * side + (n_total - i);
                let col = j * side + (n_total - j);
                block[(i, j)] = self.matrix[(row, col)];
            }
        }
        let weight: f64 = block.diagonal().iter().map(|z| z.re).sum();
        if weight > 0.0 {
            let normalised = block.map(|z| z / C64::new(weight, 0.0));
            (weight, normalised)
        } else {
            (weight, block)
        }
    }
}

/// Amplitude <n-l| K_l |n> of the single-mode loss Kraus operator
/// K_l = (1-eta)^(l/2) / sqrt(l!) * eta^(n_hat/2) a^l.
fn kraus_amplitude(n: usize, l: usize, eta: f64) -> f64 {
    if l > n {
        return 0.0;
    }
    let falling = 0.5 * (log_factorial(n) - log_factorial(n - l) - log_factorial(l));
    let mut amp = falling.exp();
    if l > 0 {
        amp *= (1.0 - eta).powf(l as f64 / 2.0);
    }
    amp * eta.powf((n - l) as f64 / 2.0)
}

/// Apply the full two-mode loss channel by summing over every Kraus pair
/// (l photons from mode a, k from mode b).
pub fn kraus_oracle(rho: &FockDensity, eta: f64) -> Result<FockDensity> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmissionOutOfRange { eta });
    }
    let n_max = rho.n_max;
    let side = n_max + 1;
    let dim = side * side;
    let mut out = DMatrix::zeros(dim, dim);
    for l in 0..=n_max {
        for k in 0..=n_max {
            // K acts as |na, nb> -> c_a(na) c_b(nb) |na - l, nb - k>.
            for na in l..side {
                for nb in k..side {
                    let row_in = na * side + nb;
                    let row_out = (na - l) * side + (nb - k);
                    let ca = kraus_amplitude(na, l, eta) * kraus_amplitude(nb, k, eta);
                    if ca == 0.0 {
                        continue;
                    }
                    for na2 in l..side {
                        for nb2 in k..side {
                            let col_in = na2 * side + nb2;
                            let value = rho.matrix[(row_in, col_in)];
                            if value == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let cb = kraus_amplitude(na2, l, eta) * kraus_amplitude(nb2, k, eta);
                            let col_out = (na2 - l) * side + (nb2 - k);
                            out[(row_out, col_out)] += value * (ca * cb);
                        }
                    }
                }
            }
        }
    }
    Ok(FockDensity {
        n_max,
        matrix: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::full_loss_ensemble;
    use crate::spin::{noon_state, SpinKet};

    #[test]
    fn identity_channel_at_full_transmission() {
        let rho = noon_state(4).unwrap().density();
        let fock = FockDensity::embed(&rho).unwrap();
        let out = kraus_oracle(&fock, 1.0).unwrap();
        assert!((&out.matrix - &fock.matrix).norm() < 1e-14);
    }

    #[test]
    fn oracle_preserves_trace() {
        let ket = SpinKet::from_real(5, &[0.2, 0.4, 0.3, 0.1, 0.5, 0.3]).unwrap();
        let fock = FockDensity::embed(&ket.density()).unwrap();
        for eta in [0.0, 0.3, 0.8] {
            let out = kraus_oracle(&fock, eta).unwrap();
            assert!((out.trace() - 1.0).abs() < 1e-12, "eta = {eta}");
        }
    }

    #[test]
    fn blocks_match_conditional_maps_for_noon() {
        let n = 4;
        let eta = 0.8;
        let rho = noon_state(n).unwrap().density();
        let oracle = kraus_oracle(&FockDensity::embed(&rho).unwrap(), eta).unwrap();
        let ensemble = full_loss_ensemble(&rho, eta).unwrap();
        for branch in &ensemble.branches {
            let n_remaining = n - branch.lost;
            let (weight, block) = oracle.block(n_remaining);
            assert!(
                (weight - branch.probability).abs() < 1e-10,
                "L = {}: weight {weight} vs {}",
                branch.lost,
                branch.probability
            );
            assert!(
                (&block - branch.rho.matrix()).norm() < 1e-10,
                "L = {} block mismatch",
                branch.lost
            );
        }
    }

    #[test]
    fn embed_rejects_large_states() {
        let ket = SpinKet::from_real(13, &[1.0; 14]).unwrap();
        assert!(matches!(
            FockDensity::embed(&ket.density()),
            Err(Error::TruncationExceeded { .. })
        ));
    }
}
