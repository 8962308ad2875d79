//! Multi-start derivative-free search for the input state maximising the
//! lossy QFI.
//!
//! The objective is smooth but non-concave over the amplitude sphere, so a
//! Nelder–Mead simplex (with the dimension-adaptive coefficients) is run
//! from a mix of structured and seeded random starting points, followed by
//! a tightening run around the incumbent. Amplitudes are real nonnegative
//! by default; a flag lifts that restriction so it stays empirically
//! checkable.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loss::{loss_probability, LossMapSet};
use crate::par::indexed_map;
use crate::spin::{SpinKet, C64};
use crate::wigner::default_grids;

use super::{
    asymptotic_precision, qfi_lossy, qfi_lossy_with_seq, wigner_qfi_bound, OptimizerMeta,
    PrecisionRecord,
};

/// Search configuration; the defaults match the reference sweeps.
#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    /// Independent simplex starts (structured seeds first, then random).
    pub restarts: usize,
    /// Iteration cap per simplex run.
    pub max_iters: usize,
    /// Relative function-spread convergence threshold.
    pub tol: f64,
    /// Seed for the random restarts; fully determines the output.
    pub seed: u64,
    /// Optimise over complex amplitudes instead of real nonnegative ones.
    pub allow_phases: bool,
    /// Restrict to states symmetric under m -> -m.
    pub symmetric: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 30_000,
            tol: 1e-10,
            seed: 0,
            allow_phases: false,
            symmetric: false,
        }
    }
}

/// Maximise the lossy QFI over N-photon input states. Returns the best
/// state found together with its precision record; deterministic for a
/// fixed seed. Non-convergence is flagged in the record, not an error.
pub fn optimize_input_state(
    n: usize,
    eta: f64,
    options: &OptimizeOptions,
) -> Result<(SpinKet, PrecisionRecord)> {
    if n == 0 {
        return Err(Error::ZeroPhotons);
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::TransmissionOutOfRange { eta });
    }
    let restarts = options.restarts.max(1);
    let maps = LossMapSet::new(n);
    let probs: Vec<f64> = (0..=n)
        .map(|lost| loss_probability(n, lost, eta).expect("lost <= n"))
        .collect();
    let param = Parameterization {
        n,
        symmetric: options.symmetric,
        allow_phases: options.allow_phases,
    };
    let objective = |x: &[f64]| -> f64 {
        match param.amplitudes(x) {
            Some(amps) => -qfi_lossy_with_seq(&maps, &probs, &amps),
            None => 0.0,
        }
    };

    let starts: Vec<Vec<f64>> = (0..restarts).map(|r| param.start(r, options.seed)).collect();
    let runs = indexed_map(restarts, |r| {
        nelder_mead(&objective, &starts[r], 0.25, options.max_iters, options.tol)
    });

    // Best-so-far merge in restart order, then a tightening run around the
    // incumbent with a smaller initial simplex.
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.value < runs[best].value {
            best = r;
        }
    }
    let polish = nelder_mead(
        &objective,
        &runs[best].x,
        0.05,
        options.max_iters,
        options.tol,
    );
    let total_iters: usize = runs.iter().map(|r| r.iters).sum::<usize>() + polish.iters;
    let (final_x, converged) = if polish.value <= runs[best].value {
        (polish.x.clone(), polish.converged)
    } else {
        (runs[best].x.clone(), runs[best].converged)
    };

    let amplitudes = param
        .amplitudes(&final_x)
        .expect("optimizer never returns a zero vector");
    let state = SpinKet::new(n, amplitudes)?;
    let fisher = qfi_lossy(&state, eta)?;
    let bound_wigner = wigner_qfi_bound(&state, eta, &default_grids(n))?;
    let record = PrecisionRecord {
        n_photons: n,
        eta,
        fisher,
        delta_phi: 1.0 / fisher.sqrt(),
        bound_asymptotic: asymptotic_precision(n, eta).ok(),
        bound_wigner,
        optimizer_meta: OptimizerMeta {
            restarts,
            iterations: total_iters,
            converged,
        },
    };
    Ok((state, record))
}

/// Map between simplex parameters and state amplitudes.
///
/// Real mode squares the parameters (smooth and automatically nonnegative)
/// and normalises; phase mode packs (re, im) pairs. The symmetric flag
/// shares one parameter between m and -m.
struct Parameterization {
    n: usize,
    symmetric: bool,
    allow_phases: bool,
}

impl Parameterization {
    fn free_amplitudes(&self) -> usize {
        if self.symmetric {
            (self.n + 2) / 2
        } else {
            self.n + 1
        }
    }

    fn dim(&self) -> usize {
        if self.allow_phases {
            2 * self.free_amplitudes()
        } else {
            self.free_amplitudes()
        }
    }

    fn amplitudes(&self, x: &[f64]) -> Option<DVector<C64>> {
        let h = self.free_amplitudes();
        let dim = self.n + 1;
        let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
        for i in 0..dim {
            let slot = if self.symmetric { i.min(self.n - i) } else { i };
            v[i] = if self.allow_phases {
                C64::new(x[slot], x[h + slot])
            } else {
                C64::new(x[slot] * x[slot], 0.0)
            };
        }
        let norm = v.norm();
        if norm < 1e-150 {
            return None;
        }
        Some(v / C64::new(norm, 0.0))
    }

    /// Starting point for restart `r`: a fixed family of structured shapes
    /// (N00N-like, flat, cosine window, squeezed-like Gaussians), then
    /// seeded random vectors on independent ChaCha streams.
    fn start(&self, r: usize, seed: u64) -> Vec<f64> {
        let half_n = self.n as f64 / 2.0;
        let profile: Vec<f64> = match r {
            0 => {
                let mut c = vec![0.0; self.n + 1];
                c[0] = 0.5;
                c[self.n] = 0.5;
                c
            }
            1 => vec![1.0; self.n + 1],
            2 => (0..=self.n)
                .map(|i| {
                    let m = i as f64 - half_n;
                    (std::f64::consts::PI * m / (self.n as f64 + 2.0)).cos()
                })
                .collect(),
            3 | 4 | 5 => {
                let widths = [0.25, 0.5, 1.0];
                let s = (widths[r - 3] * half_n).max(0.5);
                (0..=self.n)
                    .map(|i| {
                        let m = i as f64 - half_n;
                        (-m * m / (2.0 * s * s)).exp()
                    })
                    .collect()
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                return (0..self.dim())
                    .map(|_| {
                        if self.allow_phases {
                            rng.random_range(-1.0..1.0)
                        } else {
                            rng.random_range(0.1..1.0)
                        }
                    })
                    .collect();
            }
        };
        // fold the amplitude profile into parameter space
        let h = self.free_amplitudes();
        let mut x = vec![0.0; self.dim()];
        for (slot, value) in x.iter_mut().take(h).enumerate() {
            let c = profile[slot];
            *value = if self.allow_phases { c } else { c.abs().sqrt() };
        }
        x
    }
}

struct NmRun {
    x: Vec<f64>,
    value: f64,
    iters: usize,
    converged: bool,
}

/// Nelder–Mead minimisation with the dimension-adaptive coefficients of
/// Gao and Han; terminates on relative function spread across the simplex.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> NmRun {
    let dim = x0.len();
    let nf = dim as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let mut iters = 0;
    let mut converged = false;
    while iters < max_iters {
        iters += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        let spread = values[dim] - values[0];
        if spread.abs() <= tol * (values[0].abs() + tol) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for p in &simplex[..dim] {
            for (c, &xi) in centroid.iter_mut().zip(p) {
                *c += xi;
            }
        }
        for c in &mut centroid {
            *c /= nf;
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[dim])
            .map(|(&c, &w)| c + alpha * (c - w))
            .collect();
        let fr = f(&reflect);

        if fr < values[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(&c, &r)| c + beta * (r - c))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[dim] = expand;
                values[dim] = fe;
            } else {
                simplex[dim] = reflect;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflect;
            values[dim] = fr;
        } else if fr < values[dim] {
            let outside: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(&c, &r)| c + gamma * (r - c))
                .collect();
            let fo = f(&outside);
            if fo <= fr {
                simplex[dim] = outside;
                values[dim] = fo;
            } else {
                shrink(f, &mut simplex, &mut values, delta);
            }
        } else {
            let inside: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(&c, &w)| c - gamma * (c - w))
                .collect();
            let fi = f(&inside);
            if fi < values[dim] {
                simplex[dim] = inside;
                values[dim] = fi;
            } else {
                shrink(f, &mut simplex, &mut values, delta);
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    NmRun {
        x: simplex[best].clone(),
        value: values[best],
        iters,
        converged,
    }
}

fn shrink<F: Fn(&[f64]) -> f64>(
    f: &F,
    simplex: &mut [Vec<f64>],
    values: &mut [f64],
    delta: f64,
) {
    let best = simplex[0].clone();
    for i in 1..simplex.len() {
        for (xi, &bi) in simplex[i].iter_mut().zip(&best) {
            *xi = bi + delta * (*xi - bi);
        }
        values[i] = f(&simplex[i]);
    }
}
