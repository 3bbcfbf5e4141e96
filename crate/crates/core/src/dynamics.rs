//! Time-domain validation: deterministic mean-field evolution and a c-number
//! Langevin Monte Carlo of the homodyne measurement record.
//!
//! For a linear network the classical (c-number) Langevin equation driven by
//! complex Gaussian white noise of per-channel strength `n + 1/2` reproduces
//! every symmetrized quantum moment of the true dynamics, which is exactly
//! what the homodyne noise density measures. Gain channels couple through the
//! conjugated noise variable; with circularly symmetric noise this changes no
//! statistics but keeps the bookkeeping aligned with the operator equation.
//!
//! Trajectories use one counter-based RNG stream per trajectory index, so an
//! ensemble is bit-identical for a given `(seed, n_traj, dt)` regardless of
//! how many threads it runs on.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{c, CMat};
use crate::error::{Error, Result};
use crate::model::SensorModel;
use crate::response;

/// Integration settings for the homodyne Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Integration step.
    pub dt: f64,
    /// Settling time discarded before the measurement window opens.
    pub t_settle: f64,
    /// Measurement window length.
    pub tau: f64,
    /// Number of trajectories.
    pub n_traj: usize,
    /// Master seed; trajectory `i` uses stream `i` of this seed.
    pub seed: u64,
}

impl SimConfig {
    /// Default settling time: twenty decay times of the slowest eigenvalue,
    /// so transients bias the mean at the 1e-8 level.
    pub fn for_model(model: &SensorModel, dt: f64, tau: f64, n_traj: usize, seed: u64) -> Result<Self> {
        model.ensure_stable(0.0)?;
        let margin = model.stability_margin();
        Ok(Self { dt, t_settle: 20.0 / margin, tau, n_traj, seed })
    }

    fn validate(&self, model: &SensorModel, epsilon: f64) -> Result<()> {
        if !(self.dt > 0.0) || !(self.tau > 0.0) || !(self.t_settle >= 0.0) {
            return Err(Error::InvalidRate("dt and tau must be positive".into()));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidRate("n_traj must be at least 1".into()));
        }
        let scale = model.htilde(epsilon).frobenius_norm() + model.delta().abs();
        let max_dt = 0.01 / scale;
        if self.dt > max_dt {
            return Err(Error::StepTooLarge { dt: self.dt, max_dt });
        }
        Ok(())
    }
}

/// Monte Carlo samples of the integrated homodyne current.
#[derive(Debug, Clone)]
pub struct HomodyneEnsemble {
    /// One integrated-current sample per trajectory, ordered by trajectory
    /// index.
    pub samples_m: Vec<f64>,
    /// Perturbation strength the ensemble was generated at.
    pub epsilon: f64,
    pub config: SimConfig,
}

impl HomodyneEnsemble {
    pub fn mean(&self) -> f64 {
        self.samples_m.iter().sum::<f64>() / self.samples_m.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.samples_m.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        self.samples_m.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    }

    pub fn stderr_mean(&self) -> f64 {
        (self.variance() / self.samples_m.len() as f64).sqrt()
    }
}

/// Empirical signal, noise, and SNR from a perturbed/unperturbed ensemble
/// pair, with jackknife standard errors.
#[derive(Debug, Clone)]
pub struct SnrEstimate {
    pub s_emp: f64,
    pub n_emp: f64,
    pub snr_emp: f64,
    pub s_stderr: f64,
    pub n_stderr: f64,
    pub snr_stderr: f64,
}

/// Steady-state mode amplitudes `alpha_i = -i (beta/sqrt(kappa)) chi_i1`.
pub fn steady_state_amplitudes(model: &SensorModel, epsilon: f64) -> Result<Vec<Complex64>> {
    let chi = response::susceptibility(model, 0.0, model.delta(), epsilon)?.chi;
    let pref = c(0.0, -model.beta() / model.kappa().sqrt());
    Ok((0..model.mode_count()).map(|i| pref * chi[(i, 0)]).collect())
}

/// Drift generator `M = i (delta I - Htilde[eps])` and drive vector
/// `b = -i sqrt(kappa) beta e1` of the mean-field equation `da/dt = M a + b`.
fn drift_parts(model: &SensorModel, epsilon: f64) -> (CMat, Vec<Complex64>) {
    let m = model.mode_count();
    let gen = CMat::identity(m)
        .scale(c(model.delta(), 0.0))
        .sub(&model.htilde(epsilon))
        .scale(c(0.0, 1.0));
    let mut b = vec![Complex64::default(); m];
    b[0] = c(0.0, -model.kappa().sqrt() * model.beta());
    (gen, b)
}

/// Deterministic mean-field evolution from vacuum, sampled on `t_grid`
/// (ascending from zero). Propagation between grid points is by the exact
/// matrix exponential, so accuracy is set by the grid only through rounding.
pub fn evolve_mean(model: &SensorModel, epsilon: f64, t_grid: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    model.ensure_stable(epsilon)?;
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRate("time grid must be ascending and start at t >= 0".into()));
    }
    let (gen, b) = drift_parts(model, epsilon);
    let alpha_ss = gen.solve(&b)?.iter().map(|z| -z).collect::<Vec<_>>();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut alpha = vec![Complex64::default(); model.mode_count()];
    let mut t_prev = 0.0;
    for &t in t_grid {
        let step = t - t_prev;
        if step > 0.0 {
            let prop = gen.scale(c(step, 0.0)).expm();
            // a(t+h) = a_ss + e^{Mh} (a(t) - a_ss)
            let shifted: Vec<Complex64> =
                alpha.iter().zip(&alpha_ss).map(|(a, s)| a - s).collect();
            let moved = prop.matvec(&shifted);
            alpha = moved.iter().zip(&alpha_ss).map(|(m, s)| m + s).collect();
        }
        t_prev = t;
        out.push(alpha.clone());
    }
    Ok(out)
}

/// Per-channel noise descriptor for the stochastic kick.
struct NoiseChannel {
    /// Column through which this channel drives the modes, premultiplied by
    /// the step scaling.
    column: Vec<Complex64>,
    /// Whether the conjugated noise variable enters (gain channels).
    conjugate: bool,
}

/// Simulate the homodyne record and integrate it over the measurement
/// window.
///
/// The quadrature phase is the unperturbed homodyne phase of the model; when
/// the response vanishes (for instance an undriven model used for pure noise
/// studies) the amplitude quadrature is used.
pub fn simulate_homodyne(
    model: &SensorModel,
    epsilon: f64,
    config: &SimConfig,
) -> Result<HomodyneEnsemble> {
    model.ensure_stable(epsilon)?;
    config.validate(model, epsilon)?;

    let phi = response::homodyne_phase(model).unwrap_or(0.0);
    let phase = Complex64::from_polar(1.0, phi);
    let kappa = model.kappa();
    let beta = model.beta();
    let dt = config.dt;

    let (gen, b) = drift_parts(model, epsilon);
    let prop = gen.scale(c(dt, 0.0)).expm();
    // (e^{M dt} - I) M^{-1} b, the exact deterministic increment per step
    let minv_b = gen.solve(&b)?;
    let drift: Vec<Complex64> = {
        let moved = prop.matvec(&minv_b);
        moved.iter().zip(&minv_b).map(|(a, s)| a - s).collect()
    };

    // noise channels: waveguide first, then gain baths, then loss baths
    let m = model.mode_count();
    let mut channels = Vec::new();
    let wg_strength = (model.nbar_waveguide() + 0.5) * dt;
    {
        let mut col = vec![Complex64::default(); m];
        col[0] = c(0.0, -kappa.sqrt()) * wg_strength.sqrt();
        channels.push(NoiseChannel { column: col, conjugate: false });
    }
    let y = model.gain_coupling();
    for j in 0..y.cols() {
        let strength = ((model.nbar_gain()[j] + 0.5) * dt).sqrt();
        let col = (0..m).map(|i| c(0.0, -(2.0f64).sqrt()) * y[(i, j)] * strength).collect();
        channels.push(NoiseChannel { column: col, conjugate: true });
    }
    let z = model.loss_coupling();
    for j in 0..z.cols() {
        let strength = ((model.nbar_loss()[j] + 0.5) * dt).sqrt();
        let col = (0..m).map(|i| c(0.0, -(2.0f64).sqrt()) * z[(i, j)] * strength).collect();
        channels.push(NoiseChannel { column: col, conjugate: false });
    }

    let n_settle = (config.t_settle / dt).round() as usize;
    let n_meas = (config.tau / dt).round() as usize;
    // the record uses the raw waveguide noise, scaled back to white-noise units
    let xi_scale = ((model.nbar_waveguide() + 0.5) / dt).sqrt();
    let current_pref = (2.0 * kappa).sqrt();

    let samples_m: Vec<f64> = (0..config.n_traj as u64)
        .into_par_iter()
        .map(|traj| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(traj);
            let normal = StandardNormal;
            let draw = |rng: &mut ChaCha8Rng| -> Complex64 {
                let re: f64 = normal.sample(rng);
                let im: f64 = normal.sample(rng);
                c(re, im) * std::f64::consts::FRAC_1_SQRT_2
            };
            let mut alpha = vec![Complex64::default(); m];
            let mut integral = 0.0f64;
            for step in 0..(n_settle + n_meas) {
                // all channel draws happen every step, in channel order, so
                // the stream layout is independent of the measurement window
                let w_wg = draw(&mut rng);
                let mut kick = vec![Complex64::default(); m];
                for (i, ci) in channels[0].column.iter().enumerate() {
                    kick[i] += ci * w_wg;
                }
                for ch in &channels[1..] {
                    let w = draw(&mut rng);
                    let w = if ch.conjugate { w.conj() } else { w };
                    for (i, ci) in ch.column.iter().enumerate() {
                        kick[i] += ci * w;
                    }
                }
                if step >= n_settle {
                    let xi_b = w_wg * xi_scale;
                    let b_out = beta + xi_b - c(0.0, kappa.sqrt()) * alpha[0];
                    integral += current_pref * (phase * b_out).re * dt;
                }
                let moved = prop.matvec(&alpha);
                for i in 0..m {
                    alpha[i] = moved[i] + drift[i] + kick[i];
                }
            }
            integral
        })
        .collect();

    Ok(HomodyneEnsemble { samples_m, epsilon, config: *config })
}

/// Compare a perturbed ensemble against its unperturbed partner.
///
/// The two ensembles must share every configuration field (including the
/// seed: common random numbers cancel in the mean difference).
pub fn empirical_snr(ens_eps: &HomodyneEnsemble, ens_0: &HomodyneEnsemble) -> Result<SnrEstimate> {
    if ens_eps.config != ens_0.config {
        return Err(Error::ConfigMismatch(format!(
            "{:?} vs {:?}",
            ens_eps.config, ens_0.config
        )));
    }
    if ens_eps.samples_m.len() != ens_0.samples_m.len() || ens_0.samples_m.len() < 2 {
        return Err(Error::ConfigMismatch("ensembles need equal length >= 2".into()));
    }
    let n = ens_0.samples_m.len();
    let estimate = |skip: Option<usize>| -> (f64, f64, f64) {
        let count = if skip.is_some() { n - 1 } else { n } as f64;
        let (mut se, mut s0, mut s0_sq) = (0.0, 0.0, 0.0);
        for i in 0..n {
            if Some(i) == skip {
                continue;
            }
            se += ens_eps.samples_m[i];
            s0 += ens_0.samples_m[i];
            s0_sq += ens_0.samples_m[i] * ens_0.samples_m[i];
        }
        let mean_e = se / count;
        let mean_0 = s0 / count;
        let s = (mean_e - mean_0).powi(2);
        let var0 = (s0_sq - count * mean_0 * mean_0) / (count - 1.0);
        (s, var0, s / var0)
    };
    let (s_emp, n_emp, snr_emp) = estimate(None);

    // jackknife over trajectories
    let loo: Vec<(f64, f64, f64)> = (0..n).map(|i| estimate(Some(i))).collect();
    let mut means = [0.0f64; 3];
    for vals in &loo {
        means[0] += vals.0;
        means[1] += vals.1;
        means[2] += vals.2;
    }
    for mean in &mut means {
        *mean /= n as f64;
    }
    let mut var = [0.0f64; 3];
    for vals in &loo {
        var[0] += (vals.0 - means[0]).powi(2);
        var[1] += (vals.1 - means[1]).powi(2);
        var[2] += (vals.2 - means[2]).powi(2);
    }
    let jack = |k: usize| ((n - 1) as f64 / n as f64 * var[k]).sqrt();

    Ok(SnrEstimate {
        s_emp,
        n_emp,
        snr_emp,
        s_stderr: jack(0),
        n_stderr: jack(1),
        snr_stderr: jack(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::metrics;

    #[test]
    fn steady_state_matches_photon_number() {
        for name in ["fig2-recip-nogain", "fig2-nonrecip", "chiral"] {
            let m = catalog::preset(name).unwrap();
            let alpha = steady_state_amplitudes(&m, 0.0).unwrap();
            let occ: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
            let nbar = metrics::photon_number(&m).unwrap();
            assert!((occ - nbar).abs() <= 1e-12 * nbar.max(1.0), "{name}");
        }
    }

    #[test]
    fn steady_state_single_mode_value() {
        let m = catalog::single_mode(1.0, 0.0).unwrap();
        let alpha = steady_state_amplitudes(&m, 0.0).unwrap();
        // alpha_1 = -2 i beta / sqrt(kappa)
        assert!((alpha[0] - c(0.0, -2.0 * m.beta())).norm() < 1e-13);
        let dark = m.with_beta(0.0).unwrap();
        assert!(steady_state_amplitudes(&dark, 0.0).unwrap()[0].norm() < 1e-15);
    }

    #[test]
    fn mean_evolution_settles_to_steady_state() {
        let m = catalog::preset("fig2-recip-gain").unwrap();
        let margin = m.stability_margin();
        let grid = [0.0, 1.0, 5.0, 20.0 / margin];
        let states = evolve_mean(&m, 0.0, &grid).unwrap();
        assert!(states[0].iter().all(|a| a.norm() == 0.0));
        let alpha_ss = steady_state_amplitudes(&m, 0.0).unwrap();
        let err: f64 = states
            .last()
            .unwrap()
            .iter()
            .zip(&alpha_ss)
            .map(|(a, s)| (a - s).norm())
            .sum();
        let scale: f64 = alpha_ss.iter().map(|s| s.norm()).sum();
        assert!(err <= 1e-6 * scale, "settling error {err}");
    }

    #[test]
    fn mean_evolution_matches_scalar_solution() {
        let m = catalog::single_mode(1.0, 0.2).unwrap();
        let grid = response::linspace(0.0, 10.0, 21);
        let states = evolve_mean(&m, 0.0, &grid).unwrap();
        let alpha_ss = steady_state_amplitudes(&m, 0.0).unwrap()[0];
        let pole = m.eigenvalues(0.0)[0]; // Htilde eigenvalue
        for (t, state) in grid.iter().zip(&states) {
            // a(t) = a_ss (1 - e^{i(delta - Htilde) t}) for the scalar mode
            let exact = alpha_ss * (c(1.0, 0.0) - (c(0.0, 1.0) * (m.delta() - pole) * t).exp());
            assert!((state[0] - exact).norm() <= 1e-10 * alpha_ss.norm().max(1e-3));
        }
    }

    #[test]
    fn ensembles_are_deterministic_and_seed_sensitive() {
        let m = catalog::single_mode(1.0, 0.0).unwrap();
        let config = SimConfig { dt: 2e-3, t_settle: 10.0, tau: 5.0, n_traj: 8, seed: 42 };
        let a = simulate_homodyne(&m, 0.0, &config).unwrap();
        let b = simulate_homodyne(&m, 0.0, &config).unwrap();
        assert_eq!(a.samples_m, b.samples_m, "bit-identical reruns");
        let other = SimConfig { seed: 43, ..config };
        let d = simulate_homodyne(&m, 0.0, &other).unwrap();
        assert_ne!(a.samples_m, d.samples_m);
    }

    #[test]
    fn undriven_shot_noise_variance() {
        let m = catalog::single_mode(1.0, 0.3).unwrap().with_beta(0.0).unwrap();
        let config = SimConfig { dt: 2e-3, t_settle: 5.0, tau: 20.0, n_traj: 600, seed: 7 };
        let ens = simulate_homodyne(&m, 0.0, &config).unwrap();
        assert!(ens.mean().abs() < 5.0 * ens.stderr_mean());
        // passive model: variance is exactly tau kappa / 2 up to sampling error
        let expect = config.tau * 0.5;
        let rel = (ens.variance() - expect).abs() / expect;
        assert!(rel < 0.15, "variance off by {rel}");
    }

    #[test]
    fn step_too_large_is_rejected() {
        let m = catalog::preset("fig5-splitting").unwrap();
        let config = SimConfig { dt: 5e-3, t_settle: 1.0, tau: 1.0, n_traj: 1, seed: 0 };
        assert!(matches!(
            simulate_homodyne(&m, 0.0, &config),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn identical_ensembles_have_zero_signal() {
        let m = catalog::preset("fig2-recip-nogain").unwrap();
        let config = SimConfig { dt: 2e-3, t_settle: 10.0, tau: 5.0, n_traj: 16, seed: 3 };
        let a = simulate_homodyne(&m, 0.02, &config).unwrap();
        let b = simulate_homodyne(&m, 0.02, &config).unwrap();
        let est = empirical_snr(&a, &b).unwrap();
        assert_eq!(est.s_emp, 0.0);

        let mismatched = SimConfig { tau: 6.0, ..config };
        let cfg_b = simulate_homodyne(&m, 0.0, &mismatched).unwrap();
        assert!(matches!(empirical_snr(&a, &cfg_b), Err(Error::ConfigMismatch(_))));
    }

    #[test]
    fn snr_grows_linearly_with_time() {
        let m = catalog::preset("fig2-recip-nogain").unwrap();
        let eps = 0.05;
        let seed = 11;
        let mut snrs = Vec::new();
        for tau in [12.5, 25.0] {
            let config = SimConfig { dt: 2e-3, t_settle: 70.0, tau, n_traj: 400, seed };
            let ens_e = simulate_homodyne(&m, eps, &config).unwrap();
            let ens_0 = simulate_homodyne(&m, 0.0, &config).unwrap();
            snrs.push(empirical_snr(&ens_e, &ens_0).unwrap().snr_emp);
        }
        let ratio = snrs[1] / snrs[0];
        assert!((1.6..=2.4).contains(&ratio), "SNR ratio {ratio} not ~2");
    }
}
