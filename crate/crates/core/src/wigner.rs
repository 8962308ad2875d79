//! Spin Wigner transform on the sphere: band-limited quadrature grids, the
//! kernel operator, forward/inverse transforms, overlaps and azimuthal
//! derivatives.
//!
//! Every field is sampled on a Gauss–Legendre x uniform grid that is exact
//! for the band limit of the states it carries. The kernel operator is
//! evaluated once per polar node; the azimuthal dependence enters only as
//! the phase twist exp(i (m1 - m2) phi), which makes whole-field evaluation
//! a short Fourier sum per node.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::half_int::HalfInt;
use crate::par::indexed_map;
use crate::quad::gauss_legendre;
use crate::spin::{SpinDensity, C64};
use crate::su2::{clebsch_gordan, ThetaHarmonics};

/// Tolerance on the imaginary residue of a field evaluation.
const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Quadrature grid on the sphere: Gauss–Legendre in cos(theta), uniform in
/// phi. Poles are never nodes. A grid declared for `max_photons` = M
/// integrates products of spherical harmonics of degree <= M each exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    max_photons: usize,
    theta: Vec<f64>,
    theta_weights: Vec<f64>,
    phi: Vec<f64>,
}

impl SphereGrid {
    /// Grid with explicit node counts. The declared band limit follows from
    /// the exactness requirements n_theta >= M+1 and n_phi >= 2M+1.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::EmptyGrid);
        }
        let max_photons = (n_theta - 1).min((n_phi - 1) / 2);
        let (x, w) = gauss_legendre(n_theta);
        // x ascending in cos(theta) means theta descending; store ascending.
        let theta: Vec<f64> = x.iter().rev().map(|&xi| xi.acos()).collect();
        let theta_weights: Vec<f64> = w.iter().rev().copied().collect();
        let phi = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        Ok(Self {
            max_photons,
            theta,
            theta_weights,
            phi,
        })
    }

    /// The default grid for an N-photon state: twice the exactness
    /// requirement in both directions, so squared integrands (bounds,
    /// overlaps) are still integrated exactly.
    pub fn for_photons(n: usize) -> Self {
        Self::new(2 * (n + 1), 4 * (n + 1)).expect("node counts are positive")
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    /// Largest photon number whose fields this grid handles exactly.
    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }

    /// Weight of the full solid-angle element at node (i, j).
    pub fn weight(&self, theta_index: usize) -> f64 {
        self.theta_weights[theta_index] * 2.0 * PI / self.phi.len() as f64
    }

    fn same_nodes(&self, other: &SphereGrid) -> bool {
        self.theta.len() == other.theta.len() && self.phi.len() == other.phi.len()
    }
}

/// Default grids for every photon number up to and including `n_max`,
/// indexed by photon number.
pub fn default_grids(n_max: usize) -> Vec<SphereGrid> {
    (0..=n_max).map(SphereGrid::for_photons).collect()
}

/// Sampled Wigner quasiprobability W(theta_i, phi_j), tagged with its
/// photon number. Values are real; the imaginary residue of the evaluation
/// is checked against 1e-10 before truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct WignerField {
    n_photons: usize,
    grid: SphereGrid,
    values: DMatrix<f64>,
}

impl WignerField {
    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    /// Value matrix, theta rows by phi columns.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Integral over the sphere; 4 pi / (N + 1) for a unit-trace source.
    pub fn integral(&self) -> f64 {
        let dphi = 2.0 * PI / self.grid.n_phi() as f64;
        let mut total = 0.0;
        for i in 0..self.grid.n_theta() {
            let mut row = 0.0;
            for j in 0..self.grid.n_phi() {
                row += self.values[(i, j)];
            }
            total += self.grid.theta_weights[i] * row * dphi;
        }
        total
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spherical-harmonic coefficients up to degree `j_max`, packed as
    /// index j^2 + (j + mu). Exactness requires the grid to resolve the
    /// product of this field with harmonics of degree j_max.
    pub fn harmonic_coefficients(&self, j_max: usize) -> Result<Vec<C64>> {
        let n_theta = self.grid.n_theta();
        let n_phi = self.grid.n_phi();
        if 2 * n_theta <= self.n_photons + j_max || n_phi <= self.n_photons + j_max {
            return Err(Error::GridTooCoarse {
                supported: self.grid.max_photons,
                needed: j_max,
            });
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let per_theta = indexed_map(n_theta, |i| {
            let th = ThetaHarmonics::new(j_max, self.grid.theta[i]);
            // G_mu = dphi * sum_j W_ij exp(-i mu phi_j)
            let mut g = vec![C64::new(0.0, 0.0); 2 * j_max + 1];
            for jphi in 0..n_phi {
                let w = self.values[(i, jphi)] * dphi;
                for (idx, gk) in g.iter_mut().enumerate() {
                    let mu = idx as i64 - j_max as i64;
                    *gk += C64::from_polar(w, -(mu as f64) * self.grid.phi[jphi]);
                }
            }
            let wt = self.grid.theta_weights[i];
            let mut partial = vec![C64::new(0.0, 0.0); (j_max + 1) * (j_max + 1)];
            for j in 0..=j_max {
                for mu in -(j as i64)..=(j as i64) {
                    let idx = j * j + (j as i64 + mu) as usize;
                    partial[idx] += g[(mu + j_max as i64) as usize] * (wt * th.ybar(j, mu));
                }
            }
            partial
        });
        let mut out = vec![C64::new(0.0, 0.0); (j_max + 1) * (j_max + 1)];
        for partial in per_theta {
            for (o, p) in out.iter_mut().zip(partial) {
                *o += p;
            }
        }
        Ok(out)
    }

    /// Rebuild a field from packed harmonic coefficients on a given grid.
    pub(crate) fn from_harmonics(
        n_photons: usize,
        coeffs: &[C64],
        j_max: usize,
        grid: SphereGrid,
    ) -> Result<WignerField> {
        let n_theta = grid.n_theta();
        let n_phi = grid.n_phi();
        let rows = indexed_map(n_theta, |i| {
            let th = ThetaHarmonics::new(j_max, grid.theta[i]);
            let mut h = vec![C64::new(0.0, 0.0); 2 * j_max + 1];
            for j in 0..=j_max {
                for mu in -(j as i64)..=(j as i64) {
                    let idx = j * j + (j as i64 + mu) as usize;
                    h[(mu + j_max as i64) as usize] += coeffs[idx] * th.ybar(j, mu);
                }
            }
            let mut row = vec![0.0; n_phi];
            let mut residue = 0.0f64;
            for (jphi, slot) in row.iter_mut().enumerate() {
                let mut v = C64::new(0.0, 0.0);
                for (idx, hm) in h.iter().enumerate() {
                    let mu = idx as i64 - j_max as i64;
                    v += hm * C64::from_polar(1.0, mu as f64 * grid.phi[jphi]);
                }
                residue = residue.max(v.im.abs());
                *slot = v.re;
            }
            (row, residue)
        });
        let mut values = DMatrix::zeros(n_theta, n_phi);
        let mut residue = 0.0f64;
        for (i, (row, r)) in rows.into_iter().enumerate() {
            residue = residue.max(r);
            for (j, v) in row.into_iter().enumerate() {
                values[(i, j)] = v;
            }
        }
        if residue > IMAG_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue { residue });
        }
        Ok(WignerField {
            n_photons,
            grid,
            values,
        })
    }
}

/// Precomputed Clebsch–Gordan weights of the Wigner kernel operator for one
/// photon number: w_hat(theta, 0)[r, c] = sum_j coef[r,c][j - |c-r|] *
/// ybar(j, c - r). Immutable after construction.
pub(crate) struct KernelTable {
    n: usize,
    coef: Vec<Vec<f64>>,
}

impl KernelTable {
    pub(crate) fn new(n: usize) -> Self {
        let dim = n + 1;
        let twice_j = n as i64;
        let big_j = HalfInt::from_twice(twice_j);
        let rows = indexed_map(dim, |r| {
            let m2 = HalfInt::from_twice(2 * r as i64 - twice_j);
            let mut row = Vec::with_capacity(dim);
            for c in 0..dim {
                let m1 = HalfInt::from_twice(2 * c as i64 - twice_j);
                let k = c as i64 - r as i64;
                let coefs: Vec<f64> = (k.unsigned_abs() as usize..=n)
                    .map(|j| {
                        let cg = clebsch_gordan(
                            big_j,
                            m2,
                            HalfInt::from_int(j as i64),
                            HalfInt::from_int(k),
                            big_j,
                            m1,
                        )
                        .expect("valid quantum numbers by construction");
                        (4.0 * PI).sqrt() * (2.0 * j as f64 + 1.0).sqrt() / (n as f64 + 1.0) * cg
                    })
                    .collect();
                row.push(coefs);
            }
            row
        });
        Self {
            n,
            coef: rows.into_iter().flatten().collect(),
        }
    }

    /// Real symmetric w_hat(theta, 0).
    pub(crate) fn matrix_at(&self, th: &ThetaHarmonics) -> DMatrix<f64> {
        let dim = self.n + 1;
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in r..dim {
                let k = (c - r) as i64;
                let coefs = &self.coef[r * dim + c];
                let mut sum = 0.0;
                for (offset, w) in coefs.iter().enumerate() {
                    sum += w * th.ybar(c - r + offset, k);
                }
                m[(r, c)] = sum;
                if r != c {
                    m[(c, r)] = sum;
                }
            }
        }
        m
    }

    /// Diagonal of w_hat(theta, 0); only degree-j Legendre terms enter.
    pub(crate) fn diagonal_at(&self, th: &ThetaHarmonics) -> Vec<f64> {
        let dim = self.n + 1;
        (0..dim)
            .map(|r| {
                let coefs = &self.coef[r * dim + r];
                coefs
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * th.ybar(j, 0))
                    .sum()
            })
            .collect()
    }

    /// Fourier coefficients S_k = sum_{c-r=k} w_hat(theta,0)[r,c] rho[c,r],
    /// indexed k + n, so that W(theta, phi) = sum_k S_k exp(i k phi).
    fn s_coefficients(&self, w_theta: &DMatrix<f64>, rho: &DMatrix<C64>) -> Vec<C64> {
        let dim = self.n + 1;
        let mut s = vec![C64::new(0.0, 0.0); 2 * self.n + 1];
        for r in 0..dim {
            for c in 0..dim {
                let k = (c + self.n) - r;
                s[k] += rho[(c, r)] * w_theta[(r, c)];
            }
        }
        s
    }
}

/// Imaginary leftovers of a Fourier coefficient set for a Hermitian source.
fn hermitian_residue(s: &[C64], n: usize) -> f64 {
    let mut residue = s[n].im.abs();
    for k in 1..=n {
        residue = residue.max((s[n + k] - s[n - k].conj()).norm());
    }
    residue
}

/// The kernel operator w_hat_N(Omega) as an explicit matrix; Hermitian with
/// unit trace, and covariant under rotations.
pub fn wigner_kernel_matrix(n: usize, theta: f64, phi: f64) -> DMatrix<C64> {
    let table = KernelTable::new(n);
    let th = ThetaHarmonics::new(n, theta);
    let base = table.matrix_at(&th);
    let dim = n + 1;
    DMatrix::from_fn(dim, dim, |r, c| {
        C64::from_polar(1.0, (c as f64 - r as f64) * phi) * base[(r, c)]
    })
}

fn phase_table(phis: &[f64], k_max: usize) -> Vec<Vec<C64>> {
    phis.iter()
        .map(|&phi| {
            (0..=k_max)
                .map(|k| C64::from_polar(1.0, k as f64 * phi))
                .collect()
        })
        .collect()
}

fn evaluate_field(
    rho: &SpinDensity,
    grid: &SphereGrid,
    derivative: bool,
) -> Result<WignerField> {
    let n = rho.n_photons();
    if grid.max_photons() < n {
        return Err(Error::GridTooCoarse {
            supported: grid.max_photons(),
            needed: n,
        });
    }
    let table = KernelTable::new(n);
    let phases = phase_table(&grid.phi, n);
    let n_theta = grid.n_theta();
    let n_phi = grid.n_phi();
    let rows = indexed_map(n_theta, |i| {
        let th = ThetaHarmonics::new(n, grid.theta[i]);
        let w_theta = table.matrix_at(&th);
        let s = table.s_coefficients(&w_theta, rho.matrix());
        let residue = hermitian_residue(&s, n);
        let mut row = vec![0.0; n_phi];
        for (jphi, slot) in row.iter_mut().enumerate() {
            let mut v = if derivative { 0.0 } else { s[n].re };
            for k in 1..=n {
                let z = s[n + k] * phases[jphi][k];
                v += if derivative {
                    -2.0 * k as f64 * z.im
                } else {
                    2.0 * z.re
                };
            }
            *slot = v;
        }
        (row, residue)
    });
    let mut values = DMatrix::zeros(n_theta, n_phi);
    let mut residue = 0.0f64;
    for (i, (row, r)) in rows.into_iter().enumerate() {
        residue = residue.max(r);
        for (j, v) in row.into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(WignerField {
        n_photons: n,
        grid: grid.clone(),
        values,
    })
}

/// W(Omega) = Tr[w_hat_N(Omega) rho] sampled on the grid.
pub fn wigner_function(rho: &SpinDensity, grid: &SphereGrid) -> Result<WignerField> {
    evaluate_field(rho, grid, false)
}

/// Azimuthal derivative dW/dphi, computed analytically by inserting the
/// factor i(m1 - m2) into the kernel expansion rather than by finite
/// differences.
pub fn phi_derivative(rho: &SpinDensity, grid: &SphereGrid) -> Result<WignerField> {
    evaluate_field(rho, grid, true)
}

/// Reconstruct the density from a sampled field:
/// rho = (N+1)/(4 pi) * integral of W(Omega) w_hat_N(Omega).
pub fn inverse_wigner(field: &WignerField) -> Result<SpinDensity> {
    let n = field.n_photons;
    let grid = &field.grid;
    if grid.max_photons() < n {
        return Err(Error::GridTooCoarse {
            supported: grid.max_photons(),
            needed: n,
        });
    }
    let table = KernelTable::new(n);
    let dim = n + 1;
    let n_phi = grid.n_phi();
    let dphi = 2.0 * PI / n_phi as f64;
    let partials = indexed_map(grid.n_theta(), |i| {
        let th = ThetaHarmonics::new(n, grid.theta[i]);
        let w_theta = table.matrix_at(&th);
        // G_k = dphi * sum_j W_ij exp(i k phi_j), k = -n..n
        let mut g = vec![C64::new(0.0, 0.0); 2 * n + 1];
        for jphi in 0..n_phi {
            let w = field.values[(i, jphi)] * dphi;
            for (idx, gk) in g.iter_mut().enumerate() {
                let k = idx as i64 - n as i64;
                *gk += C64::from_polar(w, k as f64 * grid.phi[jphi]);
            }
        }
        let wt = grid.theta_weights[i];
        DMatrix::from_fn(dim, dim, |r, c| {
            g[c + n - r] * (wt * w_theta[(r, c)])
        })
    });
    let mut acc: DMatrix<C64> = DMatrix::zeros(dim, dim);
    for p in partials {
        acc += p;
    }
    acc *= C64::new((n as f64 + 1.0) / (4.0 * PI), 0.0);
    Ok(SpinDensity::from_trusted(n, acc))
}

/// Traciality overlap (2J+1)/(4 pi) * integral of W_A W_B, equal to
/// Tr[A B] for operators on the same spin space.
pub fn overlap_trace(a: &WignerField, b: &WignerField) -> Result<f64> {
    if a.n_photons != b.n_photons || !a.grid.same_nodes(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let dphi = 2.0 * PI / a.grid.n_phi() as f64;
    let mut total = 0.0;
    for i in 0..a.grid.n_theta() {
        let mut row = 0.0;
        for j in 0..a.grid.n_phi() {
            row += a.values[(i, j)] * b.values[(i, j)];
        }
        total += a.grid.theta_weights[i] * row * dphi;
    }
    Ok((a.n_photons as f64 + 1.0) / (4.0 * PI) * total)
}

/// Field values along a fixed-polar-angle section, at the given azimuths.
pub fn azimuthal_section(rho: &SpinDensity, theta: f64, phis: &[f64]) -> Result<Vec<f64>> {
    let n = rho.n_photons();
    let table = KernelTable::new(n);
    let th = ThetaHarmonics::new(n, theta);
    let w_theta = table.matrix_at(&th);
    let s = table.s_coefficients(&w_theta, rho.matrix());
    let residue = hermitian_residue(&s, n);
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(phis
        .iter()
        .map(|&phi| {
            let mut v = s[n].re;
            for k in 1..=n {
                v += 2.0 * (s[n + k] * C64::from_polar(1.0, k as f64 * phi)).re;
            }
            v
        })
        .collect())
}

/// Magnitudes |S_k| of the azimuthal Fourier modes of W along a section:
/// W(theta, phi) = sum_k S_k exp(i k phi). Index k = 0..=N.
pub fn azimuthal_spectrum(rho: &SpinDensity, theta: f64) -> Result<Vec<f64>> {
    let n = rho.n_photons();
    let table = KernelTable::new(n);
    let th = ThetaHarmonics::new(n, theta);
    let w_theta = table.matrix_at(&th);
    let s = table.s_coefficients(&w_theta, rho.matrix());
    Ok((0..=n).map(|k| s[n + k].norm()).collect())
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n_photons: usize,
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    theta_weights: Vec<f64>,
    phi: Vec<f64>,
    /// Row-major values, theta rows by phi columns.
    values: Vec<f64>,
}

impl From<WignerField> for FieldRepr {
    fn from(f: WignerField) -> Self {
        let (n_theta, n_phi) = (f.grid.n_theta(), f.grid.n_phi());
        let mut values = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            for j in 0..n_phi {
                values.push(f.values[(i, j)]);
            }
        }
        Self {
            n_photons: f.n_photons,
            n_theta,
            n_phi,
            theta: f.grid.theta,
            theta_weights: f.grid.theta_weights,
            phi: f.grid.phi,
            values,
        }
    }
}

impl TryFrom<FieldRepr> for WignerField {
    type Error = Error;
    fn try_from(repr: FieldRepr) -> Result<Self> {
        let grid = SphereGrid::new(repr.n_theta, repr.n_phi)?;
        if repr.values.len() != repr.n_theta * repr.n_phi {
            return Err(Error::GridMismatch);
        }
        let values = DMatrix::from_fn(repr.n_theta, repr.n_phi, |i, j| {
            repr.values[i * repr.n_phi + j]
        });
        Ok(WignerField {
            n_photons: repr.n_photons,
            grid,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{noon_state, SpinKet};

    #[test]
    fn grid_declares_band_limit() {
        let grid = SphereGrid::for_photons(10);
        assert_eq!(grid.n_theta(), 22);
        assert_eq!(grid.n_phi(), 44);
        assert!(grid.max_photons() >= 10);
        // open rule: no polar nodes
        for &t in grid.theta_nodes() {
            assert!(t > 0.0 && t < PI);
        }
        for pair in grid.theta_nodes().windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn kernel_trace_is_one_and_hermitian() {
        let n = 10;
        let m = wigner_kernel_matrix(n, 0.9, 1.7);
        let trace: C64 = m.diagonal().iter().sum();
        assert!((trace.re - 1.0).abs() < 1e-11);
        assert!(trace.im.abs() < 1e-12);
        for r in 0..=n {
            for c in 0..=n {
                assert!((m[(r, c)] - m[(c, r)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_matches_direct_expansion() {
        // Independent assembly straight from the defining expansion,
        // without the shared table or the phase-twist shortcut.
        use crate::su2::spherical_harmonic;
        let n = 5;
        let (theta, phi) = (1.1, 0.6);
        let m = wigner_kernel_matrix(n, theta, phi);
        let big_j = HalfInt::from_twice(n as i64);
        for r in 0..=n {
            for c in 0..=n {
                let m2 = HalfInt::from_twice(2 * r as i64 - n as i64);
                let m1 = HalfInt::from_twice(2 * c as i64 - n as i64);
                let k = c as i64 - r as i64;
                let mut expect = C64::new(0.0, 0.0);
                for j in 0..=n {
                    if (k.unsigned_abs() as usize) > j {
                        continue;
                    }
                    let cg = clebsch_gordan(
                        big_j,
                        m2,
                        HalfInt::from_int(j as i64),
                        HalfInt::from_int(k),
                        big_j,
                        m1,
                    )
                    .unwrap();
                    let y = spherical_harmonic(j, k, theta, phi).unwrap();
                    expect += y * ((2.0 * j as f64 + 1.0).sqrt() * cg);
                }
                expect *= (4.0 * PI).sqrt() / (n as f64 + 1.0);
                assert!((m[(r, c)] - expect).norm() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn kernel_is_scalar_for_zero_photons() {
        let m = wigner_kernel_matrix(0, 1.2, 0.3);
        assert_eq!(m.nrows(), 1);
        assert!((m[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn maximally_mixed_field_is_flat() {
        let n = 7;
        let rho = SpinDensity::maximally_mixed(n);
        let grid = SphereGrid::for_photons(n);
        let field = wigner_function(&rho, &grid).unwrap();
        let expect = 1.0 / (n as f64 + 1.0);
        for v in field.values().iter() {
            assert!((v - expect).abs() < 1e-12);
        }
        assert!((field.integral() - 4.0 * PI / (n as f64 + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn all_up_state_peaks_at_north_pole() {
        let n = 8;
        let mut v = nalgebra::DVector::zeros(n + 1);
        v[n] = C64::new(1.0, 0.0);
        let rho = SpinKet::new(n, v).unwrap().density();
        let grid = SphereGrid::for_photons(n);
        let field = wigner_function(&rho, &grid).unwrap();
        // max over the grid must sit at the smallest theta node
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..grid.n_theta() {
            for j in 0..grid.n_phi() {
                if field.values()[(i, j)] > best.1 {
                    best = (i, field.values()[(i, j)]);
                }
            }
        }
        assert_eq!(best.0, 0, "peak not at the node closest to theta = 0");
    }

    #[test]
    fn grid_too_coarse_is_an_error() {
        let rho = SpinDensity::maximally_mixed(9);
        let grid = SphereGrid::new(5, 40).unwrap();
        assert!(matches!(
            wigner_function(&rho, &grid),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn inverse_of_flat_field_is_maximally_mixed() {
        let n = 6;
        let rho = SpinDensity::maximally_mixed(n);
        let grid = SphereGrid::for_photons(n);
        let field = wigner_function(&rho, &grid).unwrap();
        let back = inverse_wigner(&field).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-12);
        assert!((back.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_requires_matching_fields() {
        let a = wigner_function(
            &SpinDensity::maximally_mixed(4),
            &SphereGrid::for_photons(4),
        )
        .unwrap();
        let b = wigner_function(
            &SpinDensity::maximally_mixed(5),
            &SphereGrid::for_photons(5),
        )
        .unwrap();
        assert!(matches!(overlap_trace(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn overlap_with_maximally_mixed() {
        let n = 6;
        let grid = SphereGrid::for_photons(n);
        let ket = SpinKet::from_real(n, &[0.3, 0.2, 0.4, 0.1, 0.5, 0.2, 0.3]).unwrap();
        let pure = wigner_function(&ket.density(), &grid).unwrap();
        let mixed = wigner_function(&SpinDensity::maximally_mixed(n), &grid).unwrap();

        let purity = overlap_trace(&pure, &pure).unwrap();
        assert!((purity - 1.0).abs() < 1e-10);
        let cross = overlap_trace(&mixed, &pure).unwrap();
        assert!((cross - 1.0 / (n as f64 + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn phi_derivative_of_diagonal_state_vanishes() {
        let n = 6;
        let grid = SphereGrid::for_photons(n);
        let field = phi_derivative(&SpinDensity::maximally_mixed(n), &grid).unwrap();
        for v in field.values().iter() {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn phi_derivative_integrates_to_zero() {
        let n = 5;
        let ket = noon_state(n).unwrap();
        let grid = SphereGrid::for_photons(n);
        let field = phi_derivative(&ket.density(), &grid).unwrap();
        assert!(field.integral().abs() < 1e-10);
    }

    #[test]
    fn equator_section_matches_field_nodes() {
        let n = 4;
        let ket = noon_state(n).unwrap();
        let rho = ket.density();
        let grid = SphereGrid::for_photons(n);
        let field = wigner_function(&rho, &grid).unwrap();
        // pick an actual grid theta node and compare against the section
        let i = grid.n_theta() / 3;
        let section = azimuthal_section(&rho, grid.theta_nodes()[i], grid.phi_nodes()).unwrap();
        for j in 0..grid.n_phi() {
            assert!((section[j] - field.values()[(i, j)]).abs() < 1e-12);
        }
    }

    #[test]
    fn field_serde_roundtrip() {
        let n = 3;
        let field = wigner_function(
            &noon_state(n).unwrap().density(),
            &SphereGrid::for_photons(n),
        )
        .unwrap();
        let json = serde_json::to_string(&field).unwrap();
        let back: WignerField = serde_json::from_str(&json).unwrap();
        assert_eq!(back.n_photons(), n);
        assert!((back.values() - field.values()).norm() < 1e-14);
    }
}
