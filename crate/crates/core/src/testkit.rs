//! Seeded generators for randomized checks. Test support only; not part of
//! the public API surface.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cmatrix::{c, CMat};
use crate::model::SensorModel;

/// Deterministic RNG for test generators.
pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut StdRng, scale: f64) -> Complex64 {
    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * (2.0 * scale)
}

pub fn random_cmat(rng: &mut StdRng, rows: usize, cols: usize, scale: f64) -> CMat {
    let mut draws = vec![Complex64::default(); rows * cols];
    for d in draws.iter_mut() {
        *d = random_complex(rng, scale);
    }
    CMat::from_fn(rows, cols, |i, j| draws[i * cols + j])
}

pub fn random_hermitian(rng: &mut StdRng, n: usize, scale: f64) -> CMat {
    random_cmat(rng, n, n, scale).hermitian_part()
}

/// Random dynamical matrix of dimension `m`, shifted to be stable with a
/// decay margin drawn from `[0.3, 1.3]` (units of kappa = 1) and obeying the
/// mode-1 frequency reference.
pub fn random_stable_htilde(rng: &mut StdRng, m: usize) -> CMat {
    let raw = random_cmat(rng, m, m, 1.0);
    let worst_im = raw
        .eigenvalues()
        .iter()
        .map(|w| w.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = 0.3 + rng.gen::<f64>();
    let mut shifted = raw.sub(&CMat::identity(m).scale(c(0.0, worst_im + margin)));
    // move the frequency reference onto mode 1
    let re11 = shifted[(0, 0)].re;
    shifted = shifted.sub(&CMat::identity(m).scale(c(re11, 0.0)));
    shifted
}

/// Random lossless dynamical matrix: Hermitian couplings plus the waveguide
/// damping only. Its transformed dissipation matrix vanishes identically,
/// which exercises the degenerate branch of the bath construction.
pub fn random_lossless_htilde(rng: &mut StdRng, m: usize) -> CMat {
    let mut h = random_hermitian(rng, m, 1.0);
    let re11 = h[(0, 0)].re;
    h = h.sub(&CMat::identity(m).scale(c(re11, 0.0)));
    let mut htilde = h;
    htilde[(0, 0)] += c(0.0, -0.5);
    htilde
}

/// Random stable model with the naive bath realization and a random
/// Hermitian perturbation.
pub fn random_stable_model(rng: &mut StdRng, m: usize) -> SensorModel {
    let htilde = random_stable_htilde(rng, m);
    let v = random_hermitian(rng, m, 1.0);
    SensorModel::from_hamiltonian(&htilde, 1.0, v).expect("generator produced a stable matrix")
}
