//! Linear response of the driven sensor: susceptibility matrices, the
//! response coefficient of the output field, homodyne phase and current, and
//! drive-frequency scans of the output intensity.

use num_complex::Complex64;

use crate::cmatrix::{c, CMat};
use crate::error::{Error, Result};
use crate::model::SensorModel;

/// Susceptibility matrix with the evaluation point it was computed at.
#[derive(Debug, Clone)]
pub struct SusceptibilityResult {
    /// Dimensionless M x M response matrix.
    pub chi: CMat,
    /// Fourier frequency relative to the drive.
    pub omega: f64,
    /// Drive detuning.
    pub delta: f64,
    /// Perturbation strength.
    pub epsilon: f64,
}

/// Output intensity versus drive detuning, with detected resonance features.
#[derive(Debug, Clone)]
pub struct IntensitySpectrum {
    /// Ascending drive detunings.
    pub detunings: Vec<f64>,
    /// Output intensity at each detuning, in units of the drive power.
    pub intensities: Vec<f64>,
    /// Locations of resonance features (dips, and peaks rising above the
    /// off-resonant background), refined by parabolic interpolation.
    pub resonance_detunings: Vec<f64>,
}

/// Dimensionless susceptibility `chi[omega; delta; eps] =
/// i kappa [(omega + delta) I - Htilde[eps]]^(-1)`.
///
/// Requires the perturbed dynamical matrix to be stable; the drive and its
/// sidebands then never sit exactly on an undamped resonance.
pub fn susceptibility(
    model: &SensorModel,
    omega: f64,
    delta: f64,
    epsilon: f64,
) -> Result<SusceptibilityResult> {
    model.ensure_stable(epsilon)?;
    let m = model.mode_count();
    let shifted = CMat::identity(m)
        .scale(c(omega + delta, 0.0))
        .sub(&model.htilde(epsilon));
    let chi = shifted.inverse()?.scale(c(0.0, model.kappa()));
    Ok(SusceptibilityResult { chi, omega, delta, epsilon })
}

/// Zero-frequency susceptibility through the spectral representation:
/// `-i kappa adj(-delta I + Htilde) / prod_j (-delta + Omega_j)`.
///
/// Algebraically identical to [`susceptibility`] at `omega = 0`; kept as an
/// independent cross-check path through the adjugate and the eigenvalues.
pub fn susceptibility_eigenform(
    model: &SensorModel,
    delta: f64,
    epsilon: f64,
) -> Result<SusceptibilityResult> {
    model.ensure_stable(epsilon)?;
    let m = model.mode_count();
    let shifted = model.htilde(epsilon).sub(&CMat::identity(m).scale(c(delta, 0.0)));
    let adj = shifted.adjugate();
    let denom: Complex64 = model
        .eigenvalues(epsilon)
        .iter()
        .map(|om| om - delta)
        .product();
    if denom.norm() == 0.0 {
        return Err(Error::SingularMatrix { cond: f64::INFINITY });
    }
    let chi = adj.scale(c(0.0, -model.kappa()) / denom);
    Ok(SusceptibilityResult { chi, omega: 0.0, delta, epsilon })
}

/// `(chi V chi)_11` at the model's drive point, the building block of the
/// linear response coefficient and every signal-power expression.
pub fn chi_v_chi_11(model: &SensorModel) -> Result<Complex64> {
    let chi = susceptibility(model, 0.0, model.delta(), 0.0)?.chi;
    let cvc = chi.matmul(model.perturbation()).matmul(&chi);
    Ok(cvc[(0, 0)])
}

/// Linear response coefficient of the steady-state output field,
/// `lambda = i (beta/kappa) (chi V chi)_11`.
pub fn lambda_response(model: &SensorModel) -> Result<Complex64> {
    Ok(c(0.0, model.beta() / model.kappa()) * chi_v_chi_11(model)?)
}

/// Homodyne phase `phi = -arg(lambda)`, fixed by the unperturbed response.
///
/// Fails with [`Error::ZeroResponse`] when the perturbation produces no
/// first-order change in the output field at this drive point.
pub fn homodyne_phase(model: &SensorModel) -> Result<f64> {
    let cvc = chi_v_chi_11(model)?;
    // relative threshold: compare against the scale of chi and V
    let chi = susceptibility(model, 0.0, model.delta(), 0.0)?.chi;
    let scale = chi.frobenius_norm().powi(2) * model.perturbation().frobenius_norm() / model.kappa();
    if cvc.norm() <= 1e-14 * scale.max(1e-300) {
        return Err(Error::ZeroResponse);
    }
    let lambda = c(0.0, model.beta() / model.kappa()) * cvc;
    Ok(-lambda.arg())
}

/// Steady-state average homodyne current,
/// `<I> = sqrt(2 kappa) Re[e^{i phi} beta (1 - chi_11[0; delta; eps])]`,
/// with the phase fixed at `eps = 0`.
pub fn avg_homodyne_current(model: &SensorModel, epsilon: f64) -> Result<f64> {
    let phi = homodyne_phase(model)?;
    let chi11 = susceptibility(model, 0.0, model.delta(), epsilon)?.chi[(0, 0)];
    let phase = Complex64::from_polar(1.0, phi);
    Ok((2.0 * model.kappa()).sqrt() * (phase * model.beta() * (c(1.0, 0.0) - chi11)).re)
}

/// Coherent output intensity `P[delta] = beta^2 |1 - chi_11|^2`; amplified
/// vacuum fluctuations are not included.
pub fn output_intensity(model: &SensorModel, delta: f64, epsilon: f64) -> Result<f64> {
    let chi11 = susceptibility(model, 0.0, delta, epsilon)?.chi[(0, 0)];
    let r = c(1.0, 0.0) - chi11;
    Ok(model.beta().powi(2) * r.norm_sqr())
}

/// Scan the output intensity over a grid of drive detunings and locate
/// resonance features.
///
/// A feature is an interior local extremum of the sampled curve (sign change
/// of the discrete first difference) that is either a dip, or a peak rising
/// above the off-resonant background `beta^2`; the shallow maximum that
/// necessarily sits between two dips is not a resonance. Feature positions
/// are refined by parabolic interpolation through the extremal triple.
pub fn intensity_spectrum(
    model: &SensorModel,
    delta_grid: &[f64],
    epsilon: f64,
) -> Result<IntensitySpectrum> {
    if delta_grid.len() < 3 {
        return Err(Error::InvalidModel("intensity scan needs at least 3 grid points".into()));
    }
    if delta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidModel("detuning grid must be strictly ascending".into()));
    }
    let intensities: Vec<f64> = delta_grid
        .iter()
        .map(|&d| output_intensity(model, d, epsilon))
        .collect::<Result<_>>()?;

    let background = model.beta().powi(2);
    let mut resonances = Vec::new();
    for i in 1..intensities.len() - 1 {
        let (ym, y0, yp) = (intensities[i - 1], intensities[i], intensities[i + 1]);
        let is_min = y0 < ym && y0 <= yp;
        let is_max = y0 > ym && y0 >= yp;
        if !is_min && !is_max {
            continue;
        }
        if is_max && y0 <= background * (1.0 + 1e-9) {
            continue; // inter-dip bump below the background, not a resonance
        }
        let denom = ym - 2.0 * y0 + yp;
        let shift = if denom.abs() > 1e-300 { 0.5 * (ym - yp) / denom } else { 0.0 };
        let h = 0.5 * (delta_grid[i + 1] - delta_grid[i - 1]);
        resonances.push(delta_grid[i] + shift.clamp(-1.0, 1.0) * h);
    }

    Ok(IntensitySpectrum {
        detunings: delta_grid.to_vec(),
        intensities,
        resonance_detunings: resonances,
    })
}

/// Evenly spaced grid helper, inclusive of both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo, "linspace needs an ascending range");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cmatrix::c;

    #[test]
    fn single_mode_resonant_susceptibility_is_two() {
        let m = catalog::single_mode(1.0, 0.0).unwrap();
        let chi = susceptibility(&m, 0.0, 0.0, 0.0).unwrap().chi;
        assert!((chi[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn directional_susceptibility_closed_form() {
        // gamma1 = kappa, gamma2 = kappa/2, nu2 = 0, J = 1.5 kappa
        let p = catalog::TwoModeParams {
            kappa: 1.0,
            gamma1: 1.0,
            gamma2: 0.5,
            j: c(1.5, 0.0),
            nu2: 0.0,
        };
        let m = catalog::directional_two_mode(&p).unwrap();
        let chi = susceptibility(&m, 0.0, 0.0, 0.0).unwrap().chi;
        assert!((chi[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(chi[(1, 0)].norm() < 1e-12);
        assert!((chi[(0, 1)] - c(0.0, -6.0)).norm() < 1e-11);
    }

    #[test]
    fn eigenform_agrees_with_direct_inverse() {
        let p = catalog::TwoModeParams {
            kappa: 1.0,
            gamma1: 0.0,
            gamma2: -0.3,
            j: c(0.325, 0.0),
            nu2: 0.0,
        };
        let m = catalog::reciprocal_two_mode(&p).unwrap();
        for delta in [-1.5, -0.3, 0.0, 0.2, 1.0] {
            let direct = susceptibility(&m, 0.0, delta, 0.0).unwrap().chi;
            let eigen = susceptibility_eigenform(&m, delta, 0.0).unwrap().chi;
            assert!(
                direct.sub(&eigen).frobenius_norm() <= 1e-9 * direct.frobenius_norm(),
                "paths disagree at delta = {delta}"
            );
        }
    }

    #[test]
    fn eigenform_scalar_case() {
        let m = catalog::single_mode(1.0, 0.2).unwrap();
        let chi = susceptibility_eigenform(&m, 0.4, 0.0).unwrap().chi;
        let pole = m.eigenvalues(0.0)[0];
        let expect = c(0.0, -1.0) / (pole - 0.4);
        assert!((chi[(0, 0)] - expect).norm() < 1e-12);
    }

    #[test]
    fn lambda_zero_for_zero_perturbation() {
        let m = catalog::single_mode(1.0, 0.0)
            .unwrap()
            .with_perturbation(CMat::zeros(1, 1))
            .unwrap();
        assert_eq!(lambda_response(&m).unwrap(), c(0.0, 0.0));
        assert!(matches!(homodyne_phase(&m), Err(Error::ZeroResponse)));
    }

    #[test]
    fn lambda_single_mode_dispersive() {
        let m = catalog::single_mode(1.0, 0.0).unwrap();
        let lambda = lambda_response(&m).unwrap();
        // chi_11 = 2 so (chi V chi)_11 = 4 and lambda = 4 i beta / kappa
        let expect = c(0.0, 4.0 * m.beta());
        assert!((lambda - expect).norm() < 1e-13);
        assert!((homodyne_phase(&m).unwrap() + std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        // fully reflected drive in the orthogonal quadrature: mean current 0
        assert!(avg_homodyne_current(&m, 0.0).unwrap().abs() < 1e-13);
        // and the signal appears at first order in eps
        assert!(avg_homodyne_current(&m, 0.05).unwrap().abs() > 0.01);
    }

    #[test]
    fn homodyne_phase_of_real_lambda_is_zero() {
        let p = catalog::TwoModeParams {
            kappa: 1.0,
            gamma1: 0.0,
            gamma2: 0.2,
            j: c(0.2, 0.0),
            nu2: 0.0,
        };
        let m = catalog::reciprocal_two_mode(&p).unwrap();
        let lambda = lambda_response(&m).unwrap();
        assert!(lambda.re > 0.0 && lambda.im.abs() < 1e-12);
        assert!(homodyne_phase(&m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn current_slope_matches_lambda() {
        let p = catalog::TwoModeParams {
            kappa: 1.0,
            gamma1: 1.0,
            gamma2: 0.5,
            j: c(1.5, 0.0),
            nu2: 0.0,
        };
        let m = catalog::directional_two_mode(&p).unwrap();
        let lambda = lambda_response(&m).unwrap();
        let i0 = avg_homodyne_current(&m, 0.0).unwrap();
        for eps in [1e-4, 1e-5] {
            let i_eps = avg_homodyne_current(&m, eps).unwrap();
            let slope = (i_eps - i0) / eps;
            let expect = (2.0 * m.kappa()).sqrt() * lambda.norm();
            // finite-epsilon error is O(eps)
            assert!(
                (slope - expect).abs() <= 20.0 * eps * expect.max(1.0),
                "slope {slope} vs {expect} at eps = {eps}"
            );
        }
    }

    #[test]
    fn output_intensity_limits() {
        let m = catalog::single_mode(1.0, 0.0).unwrap();
        let b2 = m.beta().powi(2);
        // full reflection on resonance: |1 - 2|^2 = 1
        assert!((output_intensity(&m, 0.0, 0.0).unwrap() - b2).abs() < 1e-12);
        // far off resonance the mode decouples
        let far = output_intensity(&m, 1e6, 0.0).unwrap();
        assert!((far - b2).abs() < 1e-9 * b2);
    }

    #[test]
    fn spectrum_counts_fig5_style_features() {
        let m = catalog::preset("fig5-splitting").unwrap();
        let grid = linspace(-10.0, 14.0, 2001);

        let unperturbed = intensity_spectrum(&m, &grid, 0.0).unwrap();
        assert_eq!(unperturbed.resonance_detunings.len(), 1, "one dark-mode-hidden resonance");
        assert!(unperturbed.resonance_detunings[0].abs() < 0.02);

        let split = intensity_spectrum(&m, &grid, 0.3).unwrap();
        assert_eq!(split.resonance_detunings.len(), 2, "perturbation reveals the dark mode");

        // without the directional coupling the perturbation barely registers
        let p = catalog::TwoModeParams {
            kappa: 1.0,
            gamma1: 0.5,
            gamma2: 1.0,
            j: c(0.0, 0.0),
            nu2: 4.0,
        };
        let uncoupled = catalog::directional_two_mode(&p).unwrap();
        let flat = intensity_spectrum(&uncoupled, &grid, 0.3).unwrap();
        assert_eq!(flat.resonance_detunings.len(), 1);
        let baseline = intensity_spectrum(&uncoupled, &grid, 0.0).unwrap();
        let dev: f64 = flat
            .intensities
            .iter()
            .zip(&baseline.intensities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 0.02 * uncoupled.beta().powi(2), "spectrum nearly unchanged, dev = {dev}");
    }

    #[test]
    fn spectrum_independent_of_directional_coupling_at_zero_epsilon() {
        let grid = linspace(-10.0, 14.0, 501);
        let mut scans = Vec::new();
        for j in [0.0, 20.0, 50.0] {
            let m = catalog::preset_with_coupling("fig5-splitting", Some(j)).unwrap();
            scans.push(intensity_spectrum(&m, &grid, 0.0).unwrap().intensities);
        }
        for other in &scans[1..] {
            let dev: f64 = scans[0]
                .iter()
                .zip(other)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-10);
        }
    }

    #[test]
    fn unstable_model_is_rejected() {
        let m = catalog::single_mode(1.0, -0.5).unwrap();
        // eps strong enough to push the eigenvalue across the real axis
        assert!(susceptibility(&m, 0.0, 0.0, 0.0).is_ok());
        let gain_v = m.with_perturbation(CMat::identity(1)).unwrap();
        assert!(susceptibility(&gain_v, 0.0, 0.0, 0.0).is_ok());
        // a pure-gain single mode cannot be built stably at gamma1 = -kappa
        assert!(matches!(catalog::single_mode(1.0, -1.0), Err(Error::Unstable { .. })));
    }
}
