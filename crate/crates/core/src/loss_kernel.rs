//! The loss transformation as a phase-space convolution: the exact zonal
//! kernel, its large-N asymptotic form, and the convolution itself.
//!
//! Losing L photons maps the Wigner function of an N-photon state onto the
//! (N-L)-photon sphere through a kernel that depends only on the polar
//! angle. A zonal kernel is diagonal in spherical-harmonic degree, so the
//! convolution is carried out in harmonic space rather than by a double
//! quadrature over the sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::BranchMap;
use crate::par::indexed_map;
use crate::quad::{gauss_legendre, legendre_sequence};
use crate::su2::{log_factorial, ThetaHarmonics};
use crate::wigner::{KernelTable, SphereGrid, WignerField};

/// Which expression produced a kernel profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Exact,
    Asymptotic,
    Order0,
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelKind::Exact => write!(f, "exact"),
            KernelKind::Asymptotic => write!(f, "asymptotic"),
            KernelKind::Order0 => write!(f, "order0"),
        }
    }
}

/// Polar profile of the loss convolution kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelProfile {
    pub n_input: usize,
    pub n_lost: usize,
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: KernelKind,
    /// Factor applied to enforce the sphere-integral normalisation
    /// (N+1)/(N-L+1); exactly 1 for the exact kernel.
    pub rescale_factor: f64,
}

impl KernelProfile {
    /// Divide by the peak value; geometry helpers below assume profiles
    /// sampled on an ascending theta axis starting near the peak at 0.
    pub fn peak_normalized(&self) -> KernelProfile {
        let peak = self
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let values = if peak != 0.0 {
            self.values.iter().map(|v| v / peak).collect()
        } else {
            self.values.clone()
        };
        KernelProfile {
            values,
            thetas: self.thetas.clone(),
            ..*self
        }
    }

    /// Full width at half maximum of the central peak, by linear
    /// interpolation between the bracketing nodes. The profile is even in
    /// theta, so the width is twice the crossing angle.
    pub fn fwhm(&self) -> Option<f64> {
        let (imax, peak) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if peak <= 0.0 {
            return None;
        }
        let half = peak / 2.0;
        for i in imax + 1..self.values.len() {
            if self.values[i] <= half {
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                let (t0, t1) = (self.thetas[i - 1], self.thetas[i]);
                let frac = (v0 - half) / (v0 - v1);
                return Some(2.0 * (t0 + frac * (t1 - t0)));
            }
        }
        None
    }

    /// Width of the best-fit Gaussian exp(-sin^2(theta) / (2 sigma^2))
    /// through the descending flank of the peak (values between 5% and 95%
    /// of the maximum). Oscillating tails are excluded by stopping at the
    /// first non-monotone node.
    pub fn gaussian_sigma(&self) -> Option<f64> {
        let (imax, peak) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if peak <= 0.0 {
            return None;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        let mut previous = peak;
        for i in imax + 1..self.values.len() {
            let v = self.values[i];
            if v <= 0.05 * peak || v > previous {
                break;
            }
            previous = v;
            if v <= 0.95 * peak {
                let z = 0.5 * self.thetas[i].sin().powi(2);
                let y = -(v / peak).ln();
                num += z * z;
                den += z * y;
            }
        }
        if den > 0.0 {
            Some((num / den).sqrt())
        } else {
            None
        }
    }
}

/// Diagonal of Lambda^N_L(w_hat_N(0)) on the (N-L)-photon space. The north
/// pole kernel is diagonal and the conditional map keeps it so.
fn lossy_pole_kernel_diagonal(n: usize, lost: usize) -> Vec<f64> {
    let table = KernelTable::new(n);
    let pole = ThetaHarmonics::new(n, 0.0);
    let diag = table.diagonal_at(&pole);
    let branch = BranchMap::new(n, lost);
    let out_dim = n - lost + 1;
    let mut out = vec![0.0; out_dim];
    for (l, coeffs) in branch.kraus.iter().enumerate() {
        for (row, &c) in coeffs.iter().enumerate() {
            out[row] += c * c * diag[row + l];
        }
    }
    out
}

/// Exact kernel profile: (N+1)/(4 pi) Tr[w_hat_{N-L}(Omega) Lambda^N_L(w_hat_N(0))],
/// a function of the polar angle only.
pub fn exact_kernel_profile(n: usize, lost: usize, thetas: &[f64]) -> Result<KernelProfile> {
    if lost > n {
        return Err(Error::TooManyPhotonsLost {
            lost,
            n_photons: n,
        });
    }
    let pole_diag = lossy_pole_kernel_diagonal(n, lost);
    let table = KernelTable::new(n - lost);
    let prefactor = (n as f64 + 1.0) / (4.0 * PI);
    let values = indexed_map(thetas.len(), |i| {
        let th = ThetaHarmonics::new(n - lost, thetas[i]);
        let diag = table.diagonal_at(&th);
        prefactor
            * diag
                .iter()
                .zip(&pole_diag)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    });
    Ok(KernelProfile {
        n_input: n,
        n_lost: lost,
        thetas: thetas.to_vec(),
        values,
        kind: KernelKind::Exact,
        rescale_factor: 1.0,
    })
}

/// ln Gamma(k + 1/2) = ln[(2k)! sqrt(pi) / (4^k k!)].
fn ln_gamma_half(k: usize) -> f64 {
    log_factorial(2 * k) + 0.5 * PI.ln() - 2.0 * k as f64 * 2.0f64.ln() - log_factorial(k)
}

fn order0_with_nodes(n: usize, k: usize, theta: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let m = (n - 2 * k) as i32;
    let (ct, st) = (theta.cos(), theta.sin());
    let mut real = 0.0;
    let mut imag = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        let base = w * (1.0 - x * x).powi(k as i32);
        let r = (ct * ct + x * x * st * st).sqrt();
        let ang = (x * st).atan2(ct);
        let mag = r.powi(m);
        real += base * mag * (m as f64 * ang).cos();
        imag += base * mag * (m as f64 * ang).sin();
    }
    // the integrand's imaginary part cancels by parity of the nodes
    debug_assert!(imag.abs() <= 1e-10, "parity residue {imag:e}");
    let prefactor = (n as f64 + 1.0) / (2.0 * PI.sqrt()) * (ln_gamma_half(k) - log_factorial(k)).exp();
    prefactor * real
}

/// Order-0 term of the asymptotic kernel, for an even loss count 2K, via
/// Gauss–Legendre quadrature of its integral representation. The
/// half-integer-degree Legendre closed form is deliberately not used.
pub fn order0_kernel(n: usize, k: usize, theta: f64) -> f64 {
    assert!(2 * k <= n, "order0_kernel needs 2K <= N");
    let (nodes, weights) = gauss_legendre(64.max(n));
    order0_with_nodes(n, k, theta, &nodes, &weights)
}

fn asymptotic_raw(n: usize, k2: usize, theta: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let nf = (n.max(1)) as f64;
    let bracket = 1.0 + (nf - k2 as f64) / nf * theta.cos() + k2 as f64 / nf;
    (n as f64 + 1.0) / (4.0 * PI) * bracket * order0_with_nodes(n, k2 / 2, theta, nodes, weights)
}

/// Asymptotic kernel profile, valid when N, L and N-L are all large. Odd
/// loss counts use the bracketed even order 2K = L - 1 inside the combined
/// expression. The profile is rescaled to the exact normalisation
/// (N+1)/(N-L+1); the applied factor is recorded.
pub fn asymptotic_kernel_profile(n: usize, lost: usize, thetas: &[f64]) -> Result<KernelProfile> {
    if lost > n {
        return Err(Error::TooManyPhotonsLost {
            lost,
            n_photons: n,
        });
    }
    let k2 = if lost % 2 == 0 { lost } else { lost - 1 };
    let (nodes, weights) = gauss_legendre(64.max(n));

    // Sphere integral of the raw profile, for the normalisation rescale.
    let (qx, qw) = gauss_legendre(64.max(n + 2));
    let mut integral = 0.0;
    for (&x, &w) in qx.iter().zip(&qw) {
        integral += w * asymptotic_raw(n, k2, x.acos(), &nodes, &weights);
    }
    integral *= 2.0 * PI;
    let target = (n as f64 + 1.0) / ((n - lost) as f64 + 1.0);
    let rescale_factor = if integral != 0.0 { target / integral } else { 1.0 };

    let values = indexed_map(thetas.len(), |i| {
        rescale_factor * asymptotic_raw(n, k2, thetas[i], &nodes, &weights)
    });
    Ok(KernelProfile {
        n_input: n,
        n_lost: lost,
        thetas: thetas.to_vec(),
        values,
        kind: KernelKind::Asymptotic,
        rescale_factor,
    })
}

/// Per-degree multipliers of the loss convolution: the Funk–Hecke
/// eigenvalues 2 pi * integral of L(theta) P_j(cos theta) d cos theta.
pub(crate) fn kernel_multipliers(n: usize, lost: usize) -> Result<Vec<f64>> {
    let remaining = n - lost;
    let (qx, qw) = gauss_legendre(n + 2);
    let thetas: Vec<f64> = qx.iter().map(|&x| x.acos()).collect();
    let profile = exact_kernel_profile(n, lost, &thetas)?;
    let mut out = vec![0.0; remaining + 1];
    for (q, &x) in qx.iter().enumerate() {
        let p = legendre_sequence(remaining, x);
        let w = qw[q] * profile.values[q] * 2.0 * PI;
        for (j, o) in out.iter_mut().enumerate() {
            *o += w * p[j];
        }
    }
    Ok(out)
}

/// Convolve a Wigner field with the loss kernel for `lost` photons,
/// yielding the field of the conditional output state on its default grid.
/// Harmonic coefficients above degree N-L are annihilated.
pub fn convolve_loss(field: &WignerField, lost: usize) -> Result<WignerField> {
    let n = field.n_photons();
    if lost > n {
        return Err(Error::TooManyPhotonsLost {
            lost,
            n_photons: n,
        });
    }
    let remaining = n - lost;
    let coeffs = field.harmonic_coefficients(n)?;
    let multipliers = kernel_multipliers(n, lost)?;
    let mut out = vec![num_complex::Complex::new(0.0, 0.0); (remaining + 1) * (remaining + 1)];
    for j in 0..=remaining {
        for mu in 0..(2 * j + 1) {
            let idx_out = j * j + mu;
            out[idx_out] = coeffs[j * j + mu] * multipliers[j];
        }
    }
    WignerField::from_harmonics(remaining, &out, remaining, SphereGrid::for_photons(remaining))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order0_reduces_to_character_at_k0() {
        for n in [3usize, 10, 27] {
            for theta in [0.3, 0.9, 1.4] {
                let got = order0_kernel(n, 0, theta);
                let expect = ((n as f64 + 1.0) * theta).sin() / theta.sin();
                assert!(
                    (got - expect).abs() < 1e-10 * expect.abs().max(1.0),
                    "n={n} theta={theta}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn order0_pole_limit() {
        for n in [4usize, 11, 30] {
            let got = order0_kernel(n, 0, 0.0);
            assert!((got - (n as f64 + 1.0)).abs() < 1e-10);
        }
        // (N+1)/(2K+1) at theta = 0 for general K
        let got = order0_kernel(12, 3, 0.0);
        assert!((got - 13.0 / 7.0).abs() < 1e-10);
    }

    #[test]
    fn order0_approaches_gaussian_at_large_k() {
        let n = 50;
        for k2 in [24usize, 26] {
            let k = k2 / 2;
            let sigma2 = k2 as f64 / (n as f64 * (n - k2) as f64);
            let peak = order0_kernel(n, k, 0.0);
            let gauss_peak = (n as f64 + 1.0) / k2 as f64;
            // compare shapes out to two sigma
            for frac in [0.5, 1.0, 1.5, 2.0] {
                let theta = frac * sigma2.sqrt();
                let got = order0_kernel(n, k, theta) / peak;
                let expect = (-(theta.sin().powi(2)) / (2.0 * sigma2)).exp();
                let rel = (got - expect).abs() / expect;
                assert!(
                    rel <= 0.05,
                    "2K={k2} theta={theta}: {got} vs {expect} (rel {rel})"
                );
            }
            // amplitude of the Gaussian form matches to the same order
            assert!((peak - 2.0 * gauss_peak).abs() / peak < 0.25);
        }
    }

    #[test]
    fn exact_kernel_normalisation() {
        // quadrature of the theta-only profile over the sphere
        let n = 10;
        for lost in [0usize, 4, 7] {
            let (qx, qw) = gauss_legendre(n + 2);
            let thetas: Vec<f64> = qx.iter().map(|&x| x.acos()).collect();
            let profile = exact_kernel_profile(n, lost, &thetas).unwrap();
            let integral: f64 = qw
                .iter()
                .zip(&profile.values)
                .map(|(&w, &v)| 2.0 * PI * w * v)
                .sum();
            let expect = (n as f64 + 1.0) / ((n - lost) as f64 + 1.0);
            assert!(
                (integral - expect).abs() < 1e-8,
                "L={lost}: {integral} vs {expect}"
            );
        }
    }

    #[test]
    fn kernel_multipliers_are_unity_for_identity_channel() {
        let mults = kernel_multipliers(9, 0).unwrap();
        for (j, &m) in mults.iter().enumerate() {
            assert!((m - 1.0).abs() < 1e-10, "j={j}: {m}");
        }
    }

    #[test]
    fn asymptotic_profile_is_normalised_after_rescale() {
        let n = 30;
        let lost = 15;
        let (qx, qw) = gauss_legendre(n + 2);
        let thetas: Vec<f64> = qx.iter().map(|&x| x.acos()).collect();
        let profile = asymptotic_kernel_profile(n, lost, &thetas).unwrap();
        let integral: f64 = qw
            .iter()
            .zip(&profile.values)
            .map(|(&w, &v)| 2.0 * PI * w * v)
            .sum();
        let expect = (n as f64 + 1.0) / ((n - lost) as f64 + 1.0);
        assert!((integral - expect).abs() < 1e-8);
        assert!(profile.rescale_factor.is_finite());
    }

    #[test]
    fn fwhm_of_reference_gaussian() {
        let sigma: f64 = 0.2;
        let thetas: Vec<f64> = (0..2000).map(|i| i as f64 * 1.5e-3).collect();
        let values: Vec<f64> = thetas
            .iter()
            .map(|t| (-t.sin().powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        let profile = KernelProfile {
            n_input: 0,
            n_lost: 0,
            thetas,
            values,
            kind: KernelKind::Order0,
            rescale_factor: 1.0,
        };
        // for sin(theta) ~ theta: FWHM = 2 sigma sqrt(2 ln 2)
        let expect = 2.0 * sigma * (2.0 * 2.0f64.ln()).sqrt();
        let got = profile.fwhm().unwrap();
        assert!((got - expect).abs() / expect < 0.01, "{got} vs {expect}");
        let fitted = profile.gaussian_sigma().unwrap();
        assert!((fitted - sigma).abs() / sigma < 0.01);
    }
}
