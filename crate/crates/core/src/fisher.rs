//! Quantum Fisher information of the output temporal mode.
//!
//! The integrated output field of a driven linear network is in a Gaussian
//! state, so the information available about a small parameter is fixed by
//! the first and second moments of one temporal mode. In the strong-drive
//! regime the second-moment contribution is negligible and the Fisher
//! information reduces to the displaced-mean form, which coincides exactly
//! with the homodyne SNR: homodyne detection extracts everything there is.
//!
//! Multi-tone driving splits the output into independent temporal modes, one
//! per drive frequency (asymptotically in the integration time); their Fisher
//! informations add, and the total can never beat putting all photons on the
//! single best detuning.

use crate::error::{Error, Result};
use crate::metrics;
use crate::model::SensorModel;
use crate::response;

/// First and second moments of the integrated output mode.
#[derive(Debug, Clone)]
pub struct GaussianMoments {
    /// Quadrature means `(q1, q2)` of the temporal mode.
    pub u: [f64; 2],
    /// Symmetrized 2x2 quadrature covariance (here always isotropic).
    pub w: [[f64; 2]; 2],
    /// Integration time.
    pub tau: f64,
    /// Perturbation the moments were evaluated at.
    pub epsilon: f64,
}

/// A multi-tone drive: distinct detunings with their amplitudes.
#[derive(Debug, Clone)]
pub struct ToneSet {
    tones: Vec<(f64, f64)>,
}

impl ToneSet {
    /// Build a tone set; detunings must be pairwise distinct.
    pub fn new(tones: Vec<(f64, f64)>) -> Result<Self> {
        if tones.is_empty() {
            return Err(Error::InvalidModel("tone set must not be empty".into()));
        }
        for (i, (di, _)) in tones.iter().enumerate() {
            for (dj, _) in tones.iter().skip(i + 1) {
                if (di - dj).abs() <= 1e-12 {
                    return Err(Error::DuplicateTones { delta: *di });
                }
            }
        }
        if tones.iter().any(|&(_, b)| b < 0.0) {
            return Err(Error::InvalidRate("tone amplitudes must be nonnegative".into()));
        }
        Ok(Self { tones })
    }

    pub fn tones(&self) -> &[(f64, f64)] {
        &self.tones
    }

    /// Coherent photon number each tone puts into the network.
    pub fn photon_numbers(&self, model: &SensorModel) -> Result<Vec<f64>> {
        self.tones
            .iter()
            .map(|&(delta, beta)| {
                let m = model.at_detuning(delta).with_beta(beta)?;
                metrics::photon_number(&m)
            })
            .collect()
    }
}

/// Moments of the output temporal mode after integrating for `tau`:
/// `u = sqrt(2 tau) beta (1 - Re chi_11, -Im chi_11)` and an isotropic
/// covariance set by the actual-bath noise density (taken at zeroth order in
/// the perturbation).
pub fn output_moments(model: &SensorModel, epsilon: f64, tau: f64) -> Result<GaussianMoments> {
    if !(tau > 0.0) {
        return Err(Error::InvalidRate(format!("tau = {tau} must be positive")));
    }
    let chi11 = response::susceptibility(model, 0.0, model.delta(), epsilon)?.chi[(0, 0)];
    let amp = (2.0 * tau).sqrt() * model.beta();
    let u = [amp * (1.0 - chi11.re), amp * (-chi11.im)];
    let w_diag = metrics::noise_psd(model)? / model.kappa();
    Ok(GaussianMoments {
        u,
        w: [[w_diag, 0.0], [0.0, w_diag]],
        tau,
        epsilon,
    })
}

/// Single-tone quantum Fisher information per unit perturbation squared,
/// `F = (du/deps) W^{-1} (du/deps)^T = 2 tau kappa |lambda|^2 / S_II[0]`.
///
/// The mean derivative is evaluated analytically through the response
/// coefficient, so `eps^2 F` reproduces the homodyne SNR identically.
pub fn qfi_single(model: &SensorModel, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidRate(format!("tau = {tau} must be positive")));
    }
    let lambda = response::lambda_response(model)?;
    let noise = metrics::noise_psd(model)?;
    Ok(2.0 * tau * model.kappa() * lambda.norm_sqr() / noise)
}

/// Per-photon measurement rate at a probe detuning, with the model's actual
/// baths, and its ceiling at the minimum noise level. Multiplying by the
/// photon number spent at that detuning gives the familiar rate.
pub fn per_tone_rate(model: &SensorModel, delta: f64) -> Result<(f64, f64)> {
    let probe = model.at_detuning(delta);
    let chi = response::susceptibility(&probe, 0.0, delta, 0.0)?.chi;
    let cvc = chi.matmul(probe.perturbation()).matmul(&chi)[(0, 0)];
    let occ: f64 = (0..chi.rows()).map(|i| chi[(i, 0)].norm_sqr()).sum();
    let noise = metrics::noise_psd(&probe)?;
    let noise_min = metrics::min_noise(&probe)?;
    let kappa = probe.kappa();
    let gamma = 2.0 * kappa * kappa * cvc.norm_sqr() / (noise * occ);
    let gamma_opt = 2.0 * kappa * kappa * cvc.norm_sqr() / (noise_min * occ);
    Ok((gamma, gamma_opt))
}

/// Multi-tone quantum Fisher information: one independent output temporal
/// mode per tone, each with the noise density of the model's actual baths at
/// that tone's detuning.
pub fn qfi_multitone(model: &SensorModel, tones: &ToneSet, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidRate(format!("tau = {tau} must be positive")));
    }
    let kappa = model.kappa();
    let mut total = 0.0;
    for &(delta, beta) in tones.tones() {
        let probe = model.at_detuning(delta).with_beta(beta)?;
        let nbar = metrics::photon_number(&probe)?;
        let (gamma, _) = per_tone_rate(model, delta)?;
        total += tau / (kappa * kappa) * nbar * gamma;
    }
    Ok(total)
}
