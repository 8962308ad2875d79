//! SU(2) special functions: log-factorials, Clebsch–Gordan coefficients,
//! Wigner d-matrices, spherical harmonics and rotation matrices.
//!
//! Phase conventions are Condon–Shortley throughout: the Racah closed form
//! for the coupling coefficients, d^j_{m,m'}(beta) = <j,m|exp(-i beta J_y)|j,m'>,
//! physics-convention spherical harmonics (Y_{1,0} = sqrt(3/4pi) cos(theta),
//! Y_{1,1} = -sqrt(3/8pi) sin(theta) e^{i phi}) and rotation matrices
//! D(alpha, beta, gamma) = exp(-i alpha J_z) exp(-i beta J_y) exp(-i gamma J_z).
//! The stretched-state unit tests pin these choices down.

use std::f64::consts::PI;
use std::sync::LazyLock;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::half_int::{check_jm, HalfInt};

type C64 = Complex<f64>;

const LOG_FACTORIAL_TABLE_LEN: usize = 1024;

static LOG_FACTORIALS: LazyLock<Vec<f64>> = LazyLock::new(|| {
    let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE_LEN);
    table.push(0.0);
    // Kahan-compensated running sum of ln k keeps the relative error at
    // the rounding level over the whole table.
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for k in 1..LOG_FACTORIAL_TABLE_LEN {
        let term = (k as f64).ln() - carry;
        let t = sum + term;
        carry = (t - sum) - term;
        sum = t;
        table.push(sum);
    }
    table
});

/// ln(n!).
pub fn log_factorial(n: usize) -> f64 {
    assert!(
        n < LOG_FACTORIAL_TABLE_LEN,
        "log_factorial: n = {n} out of supported range"
    );
    LOG_FACTORIALS[n]
}

/// ln(n!) for a half-integer known to be a nonnegative integer.
fn log_factorial_h(x: HalfInt) -> f64 {
    debug_assert!(x.is_factorial_arg(), "{x} is not a factorial argument");
    log_factorial((x.twice() / 2) as usize)
}

/// ln C(n, k).
pub(crate) fn log_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}

/// Clebsch–Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon–Shortley
/// convention, via the Racah closed form evaluated in log space with sign
/// bookkeeping. Selection-rule failures return 0; malformed (j, m) pairs
/// are domain errors.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    big_j: HalfInt,
    big_m: HalfInt,
) -> Result<f64> {
    check_jm(j1, m1)?;
    check_jm(j2, m2)?;
    check_jm(big_j, big_m)?;

    if big_m != m1 + m2 {
        return Ok(0.0);
    }
    // Triangle rule, and j1 + j2 + J must be an integer.
    let perim = j1 + j2 + big_j;
    if !perim.is_integer()
        || (j1 + j2 - big_j).twice() < 0
        || (j1 - j2 + big_j).twice() < 0
        || (-j1 + j2 + big_j).twice() < 0
    {
        return Ok(0.0);
    }

    let ln_pref = 0.5
        * ((big_j.twice() as f64 + 1.0).ln()
            + log_factorial_h(j1 + j2 - big_j)
            + log_factorial_h(j1 - j2 + big_j)
            + log_factorial_h(-j1 + j2 + big_j)
            - log_factorial_h(perim + HalfInt::ONE)
            + log_factorial_h(big_j + big_m)
            + log_factorial_h(big_j - big_m)
            + log_factorial_h(j1 - m1)
            + log_factorial_h(j1 + m1)
            + log_factorial_h(j2 - m2)
            + log_factorial_h(j2 + m2));

    // Summation bounds keep every factorial argument nonnegative.
    let k_min = 0i64
        .max((j2 - big_j - m1).twice() / 2)
        .max((j1 + m2 - big_j).twice() / 2);
    let k_max = ((j1 + j2 - big_j).twice() / 2)
        .min((j1 - m1).twice() / 2)
        .min((j2 + m2).twice() / 2);
    if k_min > k_max {
        return Ok(0.0);
    }

    let exponent = |k: i64| -> f64 {
        let kh = HalfInt::from_int(k);
        -(log_factorial(k as usize)
            + log_factorial_h(j1 + j2 - big_j - kh)
            + log_factorial_h(j1 - m1 - kh)
            + log_factorial_h(j2 + m2 - kh)
            + log_factorial_h(big_j - j2 + m1 + kh)
            + log_factorial_h(big_j - j1 - m2 + kh))
    };

    let e_max = (k_min..=k_max).map(exponent).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (exponent(k) - e_max).exp();
    }
    Ok(sum * (ln_pref + e_max).exp())
}

/// Wigner small d-matrix element d^j_{m,mp}(beta) = <j,m|exp(-i beta J_y)|j,mp>.
///
/// The direct sum formula is used up to 2j = 50; beyond that the alternating
/// sum cancels catastrophically, so the element is produced by a three-term
/// recursion in the bra projection seeded at the exactly-known edge column.
pub fn wigner_small_d(j: HalfInt, m: HalfInt, mp: HalfInt, beta: f64) -> Result<f64> {
    check_jm(j, m)?;
    check_jm(j, mp)?;
    // Near beta = 0 or pi the sum has a single dominant term and is safe at
    // any j, while the recursion would divide by sin(beta).
    if j.twice() <= 50 || beta.sin().abs() < 1e-6 {
        Ok(small_d_sum(j, m, mp, beta))
    } else {
        let column = small_d_column(j, mp, beta);
        Ok(column[((j + m).twice() / 2) as usize])
    }
}

/// Direct sum formula in log space.
fn small_d_sum(j: HalfInt, m: HalfInt, mp: HalfInt, beta: f64) -> f64 {
    let half = beta / 2.0;
    let (c, s) = (half.cos(), half.sin());
    let ln_pref = 0.5
        * (log_factorial_h(j + m)
            + log_factorial_h(j - m)
            + log_factorial_h(j + mp)
            + log_factorial_h(j - mp));

    let s_min = 0i64.max((mp - m).twice() / 2);
    let s_max = ((j + mp).twice() / 2).min((j - m).twice() / 2);
    let mut total = 0.0;
    for k in s_min..=s_max {
        let kh = HalfInt::from_int(k);
        let cos_pow = (j + mp).twice() / 2 - k + (j - m).twice() / 2 - k;
        let sin_pow = (m - mp).twice() / 2 + 2 * k;
        let mut ln_term = ln_pref
            - log_factorial_h(j + mp - kh)
            - log_factorial(k as usize)
            - log_factorial_h(HalfInt::from_int(k) + m - mp)
            - log_factorial_h(j - m - kh);
        if cos_pow != 0 {
            if c == 0.0 {
                continue;
            }
            ln_term += cos_pow as f64 * c.abs().ln();
        }
        if sin_pow != 0 {
            if s == 0.0 {
                continue;
            }
            ln_term += sin_pow as f64 * s.abs().ln();
        }
        let mut sign = if ((m - mp).twice() / 2 + k) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        if c < 0.0 && cos_pow % 2 != 0 {
            sign = -sign;
        }
        if s < 0.0 && sin_pow % 2 != 0 {
            sign = -sign;
        }
        total += sign * ln_term.exp();
    }
    total
}

/// Whole column d^j_{.,mp}(beta) via the recursion
/// a(m) d_{m+1} = 2 (mp - m cos b)/sin b * d_m - b(m) d_{m-1},
/// seeded at m = -j where the element is a single log-space product.
/// The column scales linearly in the seed, so intermediate overflow is
/// absorbed into an exponent carried separately.
fn small_d_column(j: HalfInt, mp: HalfInt, beta: f64) -> Vec<f64> {
    let dim = (j.twice() + 1) as usize;
    let jf = j.as_f64();
    let mpf = mp.as_f64();
    let (sb, cb) = (beta.sin(), beta.cos());
    let (ch, sh) = ((beta / 2.0).cos(), (beta / 2.0).sin());

    // ln |d_{-j, mp}| and its sign (negative half-angle factors can flip it
    // outside beta in (0, pi)).
    let ln_seed = 0.5 * (log_factorial_h(j + j) - log_factorial_h(j + mp) - log_factorial_h(j - mp))
        + (jf - mpf) * ch.abs().ln()
        + (jf + mpf) * sh.abs().ln();
    let mut seed_sign = 1.0;
    if ch < 0.0 && (j - mp).twice() / 2 % 2 != 0 {
        seed_sign = -seed_sign;
    }
    if sh < 0.0 && (j + mp).twice() / 2 % 2 != 0 {
        seed_sign = -seed_sign;
    }

    // Rolling pair (prev, cur) on a common scale; a rescale divides both and
    // moves the factor into the carried exponent, so stored entries stay
    // consistent with their recorded shift.
    let mut scaled = vec![0.0; dim];
    let mut shift = vec![0.0; dim];
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    let mut carried = 0.0f64;
    scaled[0] = cur;
    for idx in 0..dim - 1 {
        let mf = -jf + idx as f64;
        let a = ((jf - mf) * (jf + mf + 1.0)).sqrt();
        let b = ((jf + mf) * (jf - mf + 1.0)).sqrt();
        let mut next = (2.0 * (mpf - mf * cb) / sb * cur - b * prev) / a;
        if next.abs() > 1e250 {
            let f = next.abs();
            next /= f;
            cur /= f;
            carried += f.ln();
        }
        prev = cur;
        cur = next;
        scaled[idx + 1] = cur;
        shift[idx + 1] = carried;
    }
    let mut out = vec![0.0; dim];
    for idx in 0..dim {
        if scaled[idx] != 0.0 {
            let ln_mag = ln_seed + shift[idx] + scaled[idx].abs().ln();
            out[idx] = seed_sign * scaled[idx].signum() * ln_mag.exp();
        }
    }
    out
}

/// Spherical harmonic Y_{j,m}(theta, phi) in the physics convention.
pub fn spherical_harmonic(j: usize, m: i64, theta: f64, phi: f64) -> Result<C64> {
    if m.unsigned_abs() as usize > j {
        return Err(Error::InvalidAngularMomentum {
            twice_j: 2 * j as i64,
            twice_m: 2 * m,
        });
    }
    let table = ThetaHarmonics::new(j, theta);
    let magnitude = table.ybar(j, m);
    Ok(C64::from_polar(1.0, m as f64 * phi) * magnitude)
}

/// Theta-dependent part of the spherical harmonics up to degree `j_max`,
/// fully normalised: Y_{j,m}(theta, phi) = ybar(j, m) * exp(i m phi).
///
/// Built by the standard stable recursions on the spherical-harmonic
/// normalised associated Legendre functions, seeded in log space along the
/// sectoral diagonal.
pub(crate) struct ThetaHarmonics {
    j_max: usize,
    // q[idx(j, m)] for 0 <= m <= j, Condon–Shortley-free normalised ALP.
    q: Vec<f64>,
}

impl ThetaHarmonics {
    pub(crate) fn new(j_max: usize, theta: f64) -> Self {
        let x = theta.cos();
        let s = theta.sin();
        let len = (j_max + 1) * (j_max + 2) / 2;
        let mut q = vec![0.0; len];
        for m in 0..=j_max {
            // Sectoral seed Q_{m,m}.
            let q_mm = if m == 0 {
                1.0 / (4.0 * PI).sqrt()
            } else {
                if s == 0.0 {
                    0.0
                } else {
                    let ln = 0.5
                        * ((2.0 * m as f64 + 1.0).ln() - (4.0 * PI).ln() + log_factorial(2 * m)
                            - 2.0 * m as f64 * 2.0f64.ln()
                            - 2.0 * log_factorial(m))
                        + m as f64 * s.abs().ln();
                    ln.exp()
                }
            };
            q[Self::idx(m, m)] = q_mm;
            if m + 1 <= j_max {
                q[Self::idx(m + 1, m)] = x * (2.0 * m as f64 + 3.0).sqrt() * q_mm;
            }
            for j in (m + 2)..=j_max {
                let jf = j as f64;
                let mf = m as f64;
                let a = ((4.0 * jf * jf - 1.0) / (jf * jf - mf * mf)).sqrt();
                let b = (((2.0 * jf + 1.0) * ((jf - 1.0) * (jf - 1.0) - mf * mf))
                    / ((2.0 * jf - 3.0) * (jf * jf - mf * mf)))
                    .sqrt();
                q[Self::idx(j, m)] = a * x * q[Self::idx(j - 1, m)] - b * q[Self::idx(j - 2, m)];
            }
        }
        Self { j_max, q }
    }

    #[inline]
    fn idx(j: usize, m: usize) -> usize {
        j * (j + 1) / 2 + m
    }

    /// Real theta part of Y_{j,m} at phi = 0, Condon–Shortley phase included.
    #[inline]
    pub(crate) fn ybar(&self, j: usize, m: i64) -> f64 {
        debug_assert!(j <= self.j_max && m.unsigned_abs() as usize <= j);
        let value = self.q[Self::idx(j, m.unsigned_abs() as usize)];
        if m > 0 && m % 2 != 0 {
            -value
        } else {
            value
        }
    }
}

/// Full rotation matrix D^{N/2}_{m,m'}(alpha, beta, gamma) on the spin-N/2
/// space with rows and columns ordered by ascending m = -J..J.
pub fn wigner_rotation_matrix(n_photons: usize, alpha: f64, beta: f64, gamma: f64) -> DMatrix<C64> {
    let dim = n_photons + 1;
    let twice_j = n_photons as i64;
    let j = HalfInt::from_twice(twice_j);
    DMatrix::from_fn(dim, dim, |r, c| {
        let m = HalfInt::from_twice(2 * r as i64 - twice_j);
        let mp = HalfInt::from_twice(2 * c as i64 - twice_j);
        let d = wigner_small_d(j, m, mp, beta).expect("indices in range by construction");
        C64::from_polar(1.0, -(alpha * m.as_f64() + gamma * mp.as_f64())) * d
    })
}
