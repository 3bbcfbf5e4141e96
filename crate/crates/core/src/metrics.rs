//! Scalar performance figures and the fundamental bounds they obey.
//!
//! All rates are expressed in the same units as the model's `kappa`. The
//! photon-number normalization follows the coherent drive only: incoherent
//! photons injected by gain baths scale with the baths, not the drive, and are
//! excluded from `n_tot`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::cmatrix::{c, CMat};
use crate::error::{Error, Result};
use crate::model::SensorModel;
use crate::response;

/// Everything worth reporting about one model at one drive setting.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    /// Total steady-state coherent photon number over all modes.
    pub nbar_tot: f64,
    /// Homodyne signal power at the requested perturbation and time.
    pub signal_power: f64,
    /// Signal power of the ideal single-mode dispersive reference.
    pub s_epsilon: f64,
    /// Zero-frequency homodyne noise density of the model's actual baths.
    pub noise_psd: f64,
    /// Minimum noise density over all bath realizations of this dynamics.
    pub noise_psd_min: f64,
    /// Measurement rate with the actual baths.
    pub gamma_meas: f64,
    /// Measurement rate at the minimum noise level.
    pub gamma_opt: f64,
    /// Applicable fundamental bounds, keyed by name.
    pub bounds: BTreeMap<&'static str, f64>,
    /// Reciprocity of the two-mode coupling (trivially true otherwise).
    pub reciprocal: bool,
    /// Whether the drive is reflected with gain, `|1 - chi_11| > 1`.
    pub has_reflection_gain: bool,
}

fn chi_at_drive(model: &SensorModel) -> Result<CMat> {
    Ok(response::susceptibility(model, 0.0, model.delta(), 0.0)?.chi)
}

/// `(chi† chi)_11 = sum_i |chi_i1|^2`, the per-drive-photon occupancy factor.
fn chi_col_norm_sqr(chi: &CMat) -> f64 {
    (0..chi.rows()).map(|i| chi[(i, 0)].norm_sqr()).sum()
}

/// Total coherent photon number `n_tot = (beta^2/kappa) (chi† chi)_11`.
pub fn photon_number(model: &SensorModel) -> Result<f64> {
    let chi = chi_at_drive(model)?;
    Ok(model.beta().powi(2) / model.kappa() * chi_col_norm_sqr(&chi))
}

/// Signal power of the time-integrated homodyne current,
/// `S = 2 (beta^2/kappa) |(chi V chi)_11|^2 eps^2 tau^2`.
pub fn signal_power(model: &SensorModel, epsilon: f64, tau: f64) -> Result<f64> {
    let cvc = response::chi_v_chi_11(model)?;
    Ok(2.0 * model.beta().powi(2) / model.kappa() * cvc.norm_sqr() * (epsilon * tau).powi(2))
}

/// Signal power of the ideal single-mode dispersive measurement at the same
/// photon number, `S_eps = 8 eps^2 tau^2 n_tot`.
pub fn s_epsilon(epsilon: f64, tau: f64, nbar_tot: f64) -> f64 {
    8.0 * (epsilon * tau).powi(2) * nbar_tot
}

/// Zero-frequency noise density of the homodyne current.
///
/// With vacuum baths this is `kappa/2 (1 + (4/kappa)(chi YY† chi†)_11)`:
/// shot noise plus amplified vacuum entering through the gain baths. Thermal
/// occupancies add `n+1` factors on gain channels, `n` on loss channels, and
/// a reflected thermal term for the waveguide itself.
pub fn noise_psd(model: &SensorModel) -> Result<f64> {
    let chi = chi_at_drive(model)?;
    noise_psd_with_chi(model, &chi)
}

pub(crate) fn noise_psd_with_chi(model: &SensorModel, chi: &CMat) -> Result<f64> {
    let kappa = model.kappa();
    let gain_occ = CMat::from_real_diag(
        &model.nbar_gain().iter().map(|n| n + 1.0).collect::<Vec<_>>(),
    );
    let loss_occ = CMat::from_real_diag(model.nbar_loss());
    let y = model.gain_coupling();
    let z = model.loss_coupling();

    let mut excess = 0.0;
    if y.cols() > 0 {
        let g = chi.matmul(&y.matmul(&gain_occ).matmul(&y.dagger())).matmul(&chi.dagger());
        excess += g[(0, 0)].re;
    }
    if z.cols() > 0 {
        let l = chi.matmul(&z.matmul(&loss_occ).matmul(&z.dagger())).matmul(&chi.dagger());
        excess += l[(0, 0)].re;
    }
    let mut s = kappa / 2.0 * (1.0 + 4.0 / kappa * excess);
    if model.nbar_waveguide() > 0.0 {
        let r = c(1.0, 0.0) - chi[(0, 0)];
        s += kappa * model.nbar_waveguide() * r.norm_sqr();
    }
    Ok(s)
}

/// Heaviside step, `1` for strictly positive argument. At zero the factor it
/// multiplies vanishes, so the boundary convention is unobservable.
fn theta(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

fn min_noise_factor(chi11: Complex64) -> f64 {
    let excess = (c(1.0, 0.0) - chi11).norm_sqr() - 1.0;
    1.0 + 2.0 * theta(excess) * excess
}

/// Minimum homodyne noise density over every bath realization of the model's
/// dynamics: `kappa/2 (1 + 2 Theta[|1-chi_11|^2 - 1] (|1-chi_11|^2 - 1))`.
/// Exceeds shot noise exactly when the drive is reflected with gain.
pub fn min_noise(model: &SensorModel) -> Result<f64> {
    let chi = chi_at_drive(model)?;
    Ok(model.kappa() / 2.0 * min_noise_factor(chi[(0, 0)]))
}

/// Measurement rate `Gamma = 2 kappa^3 |lambda|^2 / (beta^2-normalized noise)`,
/// the long-time growth rate of the power SNR times `kappa^2/eps^2`.
/// `use_min_noise` substitutes the minimum noise level for the actual one.
pub fn measurement_rate(model: &SensorModel, use_min_noise: bool) -> Result<f64> {
    let chi = chi_at_drive(model)?;
    let cvc = chi.matmul(model.perturbation()).matmul(&chi)[(0, 0)];
    let noise = if use_min_noise {
        model.kappa() / 2.0 * min_noise_factor(chi[(0, 0)])
    } else {
        noise_psd_with_chi(model, &chi)?
    };
    let lambda_sqr = (model.beta() / model.kappa()).powi(2) * cvc.norm_sqr();
    Ok(2.0 * model.kappa().powi(3) * lambda_sqr / noise)
}

/// The measurement rate at the minimum possible noise level; no bath
/// realization of this dynamics can do better at this drive point.
pub fn optimal_rate(model: &SensorModel) -> Result<f64> {
    measurement_rate(model, true)
}

/// Rate-bound kernel `f(chi_11) = |chi_11|^2 / (1 + 2 Theta[.](|1-chi_11|^2-1))`.
/// Its global maximum is 4, reached only at `chi_11 = 2`.
pub fn f_chi(chi11: Complex64) -> f64 {
    chi11.norm_sqr() / min_noise_factor(chi11)
}

/// Bounds obeyed by any reciprocal two-mode sensor with a mode-coupling
/// perturbation: the signal power bound `S <= (1/4) S_eps |chi_11|^2` and the
/// rate bound `Gamma <= 16 kappa n_tot`.
///
/// Returns `(signal_bound, rate_bound)` at the given perturbation and time.
pub fn reciprocal_bounds(model: &SensorModel, epsilon: f64, tau: f64) -> Result<(f64, f64)> {
    let report = model.validate();
    if model.mode_count() == 2 && !report.reciprocal {
        let htilde = model.htilde(0.0);
        let asym = (htilde[(0, 1)].norm() - htilde[(1, 0)].norm()).abs();
        return Err(Error::NotReciprocal { asymmetry: asym });
    }
    require_coupling_perturbation(model)?;
    let chi = chi_at_drive(model)?;
    let nbar = model.beta().powi(2) / model.kappa() * chi_col_norm_sqr(&chi);
    let s_bound = 0.25 * s_epsilon(epsilon, tau, nbar) * chi[(0, 0)].norm_sqr();
    let rate_bound = 16.0 * model.kappa() * nbar;
    Ok((s_bound, rate_bound))
}

/// Rate bound for a fully directional sensor (`chi_21 = 0`):
/// `Gamma <= kappa n_tot |chi_12|^2`.
pub fn directional_bound(model: &SensorModel) -> Result<f64> {
    if model.mode_count() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: model.mode_count() });
    }
    let chi = chi_at_drive(model)?;
    let chi21 = chi[(1, 0)].norm();
    if chi21 > 1e-10 * chi.frobenius_norm() {
        return Err(Error::NotDirectional { chi21 });
    }
    let nbar = model.beta().powi(2) / model.kappa() * chi_col_norm_sqr(&chi);
    Ok(model.kappa() * nbar * chi[(0, 1)].norm_sqr())
}

/// Rate bound for sensing a shift of the mode-1 resonance frequency:
/// `Gamma <= 4 kappa n_tot f(chi_11) <= 16 kappa n_tot`.
pub fn freq_shift_bound(model: &SensorModel) -> Result<f64> {
    let e11 = CMat::unit(model.mode_count(), 0, 0);
    if model.perturbation().sub(&e11).frobenius_norm() > 1e-12 {
        return Err(Error::WrongPerturbation(
            "frequency-shift bound applies to V = e11".into(),
        ));
    }
    let chi = chi_at_drive(model)?;
    let nbar = model.beta().powi(2) / model.kappa() * chi_col_norm_sqr(&chi);
    Ok(4.0 * model.kappa() * nbar * f_chi(chi[(0, 0)]))
}

fn require_coupling_perturbation(model: &SensorModel) -> Result<()> {
    if model.mode_count() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: model.mode_count() });
    }
    let v = model.perturbation();
    let expect = CMat::from_rows(&[
        vec![c(0.0, 0.0), c(0.5, 0.0)],
        vec![c(0.5, 0.0), c(0.0, 0.0)],
    ])
    .expect("coupling matrix");
    if v.sub(&expect).frobenius_norm() > 1e-12 {
        return Err(Error::WrongPerturbation(
            "bound applies to the symmetric mode-coupling perturbation".into(),
        ));
    }
    Ok(())
}

/// Assemble the full report for one model at one `(epsilon, tau)`.
pub fn metrics_report(model: &SensorModel, epsilon: f64, tau: f64) -> Result<MetricsReport> {
    let chi = chi_at_drive(model)?;
    let nbar = model.beta().powi(2) / model.kappa() * chi_col_norm_sqr(&chi);
    let report = model.validate();
    let noise = noise_psd_with_chi(model, &chi)?;
    let noise_min = model.kappa() / 2.0 * min_noise_factor(chi[(0, 0)]);

    let mut bounds = BTreeMap::new();
    if let Ok((s_bound, rate_bound)) = reciprocal_bounds(model, epsilon, tau) {
        bounds.insert("signal_recip", s_bound);
        bounds.insert("rate_recip", rate_bound);
    }
    if let Ok(b) = directional_bound(model) {
        bounds.insert("rate_directional", b);
    }
    if let Ok(b) = freq_shift_bound(model) {
        bounds.insert("rate_freq_shift", b);
    }

    Ok(MetricsReport {
        nbar_tot: nbar,
        signal_power: signal_power(model, epsilon, tau)?,
        s_epsilon: s_epsilon(epsilon, tau, nbar),
        noise_psd: noise,
        noise_psd_min: noise_min,
        gamma_meas: measurement_rate(model, false)?,
        gamma_opt: optimal_rate(model)?,
        bounds,
        reciprocal: report.reciprocal,
        has_reflection_gain: (c(1.0, 0.0) - chi[(0, 0)]).norm() > 1.0,
    })
}
