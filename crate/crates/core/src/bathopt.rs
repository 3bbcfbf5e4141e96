//! Systematic construction of minimum-noise bath realizations.
//!
//! A dynamical matrix fixes only the difference `YY† - ZZ†` of the gain and
//! loss coupling matrices; adding any PSD matrix to both sides realizes the
//! same dynamics with more noise. The construction here picks the realization
//! whose gain baths contribute nothing to the homodyne output at the chosen
//! drive point, which is the global noise minimum
//! `kappa/2 (1 + 2 Theta[.](|1-chi_11|^2 - 1))`.
//!
//! The route runs through the transformed Hermitian matrix
//! `h = chi (YY† - ZZ†) chi†`: one bordered PSD matrix clears the first row
//! and column of `h`, the remainder is split by eigenvalue sign, and both
//! pieces are mapped back through the inverse susceptibility. The noise
//! minimum can only be arranged at one drive detuning at a time.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cmatrix::{c, CMat, PSD_TOL};
use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{SensorModel, STABILITY_MARGIN};

/// A bath realization of a given dynamics, with its noise bookkeeping.
#[derive(Debug, Clone)]
pub struct BathRealization {
    /// Gain-bath couplings, M x N_Y.
    pub y: CMat,
    /// Loss-bath couplings, M x N_Z.
    pub z: CMat,
    /// Homodyne noise density achieved by this realization.
    pub achieved_noise: f64,
    /// The minimum noise density for this dynamics at this drive point.
    pub target_min_noise: f64,
    /// Reconstruction error of the dissipative generator.
    pub residual: f64,
}

/// Regularizer trigger: `|h_11|` below this fraction of `||h||` counts as
/// degenerate and is nudged before the sign split.
const H11_DEGENERATE_TOL: f64 = 1e-12;

fn check_square_stable(htilde: &CMat, kappa: f64) -> Result<()> {
    if !htilde.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "dynamical matrix is {}x{}",
            htilde.rows(),
            htilde.cols()
        )));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidRate(format!("kappa = {kappa} must be positive")));
    }
    let margin = htilde.eigenvalues().iter().map(|w| -w.im).fold(f64::INFINITY, f64::min);
    let required = STABILITY_MARGIN * kappa;
    if margin <= required {
        return Err(Error::Unstable { margin, required });
    }
    Ok(())
}

fn chi_of(htilde: &CMat, kappa: f64, delta: f64) -> Result<CMat> {
    let m = htilde.rows();
    let shifted = CMat::identity(m).scale(c(delta, 0.0)).sub(htilde);
    Ok(shifted.inverse()?.scale(c(0.0, kappa)))
}

/// The Hermitian matrix `h = chi (YY† - ZZ†) chi†` whose (1,1) entry decides
/// whether gain noise is avoidable: its first diagonal entry equals
/// `(kappa/2)(|1 - chi_11|^2 - 1)` independently of the realization.
pub fn h_matrix(htilde: &CMat, kappa: f64, delta: f64) -> Result<CMat> {
    check_square_stable(htilde, kappa)?;
    let chi = chi_of(htilde, kappa, delta)?;
    // (Htilde - Htilde†)/2i + (kappa/2) e11 = YY† - ZZ†
    let mut gen = htilde.antihermitian_part_over_i();
    gen[(0, 0)] += c(kappa / 2.0, 0.0);
    Ok(chi.matmul(&gen).matmul(&chi.dagger()).hermitian_part())
}

/// Bordered PSD matrix that clears the first row and column of `h` (or of
/// `-h`, depending on the sign of `h_11`): first row and column copy
/// `sign * h_1i`, diagonal entries `M |h_1j|^2 / |h_11|` for j > 1.
fn bordered_clearing_matrix(h: &CMat, sign: f64) -> CMat {
    let m = h.rows();
    let h11 = h[(0, 0)].re;
    let mut x = CMat::zeros(m, m);
    x[(0, 0)] = c(sign * h11, 0.0);
    for i in 1..m {
        x[(0, i)] = h[(0, i)].scale(sign);
        x[(i, 0)] = h[(i, 0)].scale(sign);
        x[(i, i)] = c(m as f64 * h[(0, i)].norm_sqr() / h11.abs(), 0.0);
    }
    x
}

fn assert_psd(tag: &str, m: &CMat, scale: f64) -> Result<()> {
    let (_, eigs) = m.herm_eig()?;
    let min_eig = eigs.first().copied().unwrap_or(0.0);
    if min_eig < -PSD_TOL * scale.max(1e-300) {
        return Err(Error::ConstructionFailed(format!(
            "{tag} lost positive semi-definiteness (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

/// Diagonalize a Hermitian matrix whose first row and column vanish, with the
/// basis kept pinned on mode 1: the first eigenvector is forced to e1 with
/// eigenvalue 0 by deleting row/column 1 and re-embedding, instead of trusting
/// an eigensolver to discover the null structure.
fn eig_with_pinned_first_mode(h: &CMat) -> Result<(CMat, Vec<f64>)> {
    let m = h.rows();
    if m == 1 {
        return Ok((CMat::identity(1), vec![0.0]));
    }
    let trailing = CMat::from_fn(m - 1, m - 1, |i, j| h[(i + 1, j + 1)]);
    let (u_t, l_t) = trailing.herm_eig()?;
    let mut u = CMat::zeros(m, m);
    u[(0, 0)] = c(1.0, 0.0);
    for i in 0..m - 1 {
        for j in 0..m - 1 {
            u[(i + 1, j + 1)] = u_t[(i, j)];
        }
    }
    let mut lambda = vec![0.0];
    lambda.extend(l_t);
    Ok((u, lambda))
}

/// Construct the bath realization of `htilde` that reaches the minimum
/// homodyne noise at drive detuning `delta`.
///
/// Returns the realized model (drive at `delta`, amplitude normalized to one
/// intracavity photon) together with the realization record. The noise target
/// is met exactly when `h_11 != 0`; the degenerate `h_11 = 0` case runs
/// through a small diagonal nudge and overshoots the target by a negligible
/// amount that is reported rather than hidden.
pub fn construct_min_noise(
    htilde: &CMat,
    kappa: f64,
    delta: f64,
    v: CMat,
) -> Result<(SensorModel, BathRealization)> {
    check_square_stable(htilde, kappa)?;
    let m = htilde.rows();
    let mut h = h_matrix(htilde, kappa, delta)?;
    let h_norm = h.frobenius_norm();

    // all dissipation comes from the waveguide: nothing to construct
    if h_norm <= 1e-13 * kappa.max(htilde.frobenius_norm()) {
        let y = CMat::zeros(m, 0);
        let z = CMat::zeros(m, 0);
        let model =
            SensorModel::with_vacuum(htilde.hermitian_part(), y.clone(), z.clone(), kappa, v, delta, 0.0)?;
        let beta = model.beta_for_unit_photon_number()?;
        let model = model.with_beta(beta)?;
        let residual = model.htilde(0.0).sub(htilde).frobenius_norm();
        let achieved_noise = metrics::noise_psd(&model)?;
        let target_min_noise = metrics::min_noise(&model)?;
        return Ok((model, BathRealization { y, z, achieved_noise, target_min_noise, residual }));
    }

    // degenerate first entry: nudge before branching
    if h[(0, 0)].re.abs() <= H11_DEGENERATE_TOL * h_norm {
        let rho = 1e-10 * h_norm.max(kappa);
        h[(0, 0)] += c(rho, 0.0);
    }
    let h11 = h[(0, 0)].re;
    let scale = h.frobenius_norm();

    // Gain and loss targets in the transformed frame: chi YY† chi† and
    // chi ZZ† chi†. For h11 < 0 the bordered matrix joins the loss side and
    // the gain side keeps (1,1) = 0; for h11 > 0 it is the gain side and
    // carries exactly h11 there.
    let (gain_t, loss_t) = if h11 < 0.0 {
        let x1 = bordered_clearing_matrix(&h, -1.0);
        assert_psd("bordered loss matrix", &x1, scale)?;
        let remainder = h.add(&x1).hermitian_part();
        check_cleared(&remainder, scale)?;
        let (u, lambda) = eig_with_pinned_first_mode(&remainder)?;
        let (x2p, x2m) = split_by_sign(&u, &lambda);
        (x2p, x1.add(&x2m))
    } else {
        let x1 = bordered_clearing_matrix(&h, 1.0);
        assert_psd("bordered gain matrix", &x1, scale)?;
        let remainder = h.sub(&x1).hermitian_part();
        check_cleared(&remainder, scale)?;
        let (u, lambda) = eig_with_pinned_first_mode(&remainder)?;
        let (x2p, x2m) = split_by_sign(&u, &lambda);
        (x1.add(&x2p), x2m)
    };
    assert_psd("transformed gain target", &gain_t, scale)?;
    assert_psd("transformed loss target", &loss_t, scale)?;

    // map back: X -> (delta I - Htilde) X (delta I - Htilde†) / kappa^2
    let back = CMat::identity(m).scale(c(delta, 0.0)).sub(htilde);
    let map_back = |x: &CMat| {
        back.matmul(x)
            .matmul(&back.dagger())
            .scale(c(1.0 / (kappa * kappa), 0.0))
            .hermitian_part()
    };
    let yy = map_back(&gain_t);
    let zz = map_back(&loss_t);
    assert_psd("gain coupling matrix", &yy, yy.frobenius_norm())?;
    assert_psd("loss coupling matrix", &zz, zz.frobenius_norm())?;
    let y = yy.psd_factor()?;
    let z = zz.psd_factor()?;

    let model = SensorModel::with_vacuum(htilde.hermitian_part(), y.clone(), z.clone(), kappa, v, delta, 0.0)?;
    let beta = model.beta_for_unit_photon_number()?;
    let model = model.with_beta(beta)?;

    let rebuilt = model.htilde(0.0);
    let residual = rebuilt.sub(htilde).frobenius_norm();
    let achieved_noise = metrics::noise_psd(&model)?;
    let target_min_noise = metrics::min_noise(&model)?;
    let realization =
        BathRealization { y, z, achieved_noise, target_min_noise, residual };
    Ok((model, realization))
}

fn check_cleared(remainder: &CMat, scale: f64) -> Result<()> {
    let m = remainder.rows();
    let worst = (0..m)
        .map(|i| remainder[(0, i)].norm().max(remainder[(i, 0)].norm()))
        .fold(0.0, f64::max);
    if worst > 1e-9 * scale.max(1e-300) {
        return Err(Error::ConstructionFailed(format!(
            "first row/column not cleared (residual {worst:.3e})"
        )));
    }
    Ok(())
}

fn split_by_sign(u: &CMat, lambda: &[f64]) -> (CMat, CMat) {
    let plus: Vec<f64> = lambda.iter().map(|l| (l.abs() + l) / 2.0).collect();
    let minus: Vec<f64> = lambda.iter().map(|l| (l.abs() - l) / 2.0).collect();
    let build = |d: &[f64]| {
        u.matmul(&CMat::from_real_diag(d))
            .matmul(&u.dagger())
            .hermitian_part()
    };
    (build(&plus), build(&minus))
}

/// A random valid realization of `htilde`: the naive split plus a random PSD
/// matrix added to both the gain and loss sides. Same dynamics, more noise;
/// used to probe the minimum-noise inequality.
pub fn random_realization(htilde: &CMat, kappa: f64, seed: u64) -> Result<SensorModel> {
    check_square_stable(htilde, kappa)?;
    let m = htilde.rows();
    let base = SensorModel::from_hamiltonian(htilde, kappa, CMat::unit(m, 0, 0))?;
    let mut rng = StdRng::seed_from_u64(seed);
    let sigma = htilde.frobenius_norm().sqrt() / m as f64;
    let mut draws = vec![Complex64::default(); m * m];
    for d in draws.iter_mut() {
        *d = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * (2.0 * sigma);
    }
    let r = CMat::from_fn(m, m, |i, j| draws[i * m + j]);
    let k = r.matmul(&r.dagger());
    let yy = base.gain_coupling().matmul(&base.gain_coupling().dagger()).add(&k);
    let zz = base.loss_coupling().matmul(&base.loss_coupling().dagger()).add(&k);
    let model = SensorModel::with_vacuum(
        htilde.hermitian_part(),
        yy.psd_factor()?,
        zz.psd_factor()?,
        kappa,
        CMat::unit(m, 0, 0),
        0.0,
        0.0,
    )?;
    let beta = model.beta_for_unit_photon_number()?;
    model.with_beta(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::response;

    fn fig2_gain_htilde() -> CMat {
        // reciprocal device with gain on mode 2 at its coalescence point
        CMat::from_rows(&[
            vec![c(0.0, -0.5), c(0.325, 0.0)],
            vec![c(0.325, 0.0), c(0.0, 0.15)],
        ])
        .unwrap()
    }

    #[test]
    fn h_matrix_single_mode_cases() {
        // waveguide-only mode: nothing left after removing the readout damping
        let bare = CMat::from_rows(&[vec![c(0.0, -0.5)]]).unwrap();
        let h = h_matrix(&bare, 1.0, 0.0).unwrap();
        assert!(h[(0, 0)].norm() < 1e-14);

        // gain: h_11 = |chi_11|^2 gamma/2 > 0
        let gamma = 0.4;
        let gainy = CMat::from_rows(&[vec![c(0.0, -(1.0 - gamma) / 2.0)]]).unwrap();
        let h = h_matrix(&gainy, 1.0, 0.0).unwrap();
        let chi11 = c(0.0, 1.0) / c(0.0, (1.0 - gamma) / 2.0);
        assert!((h[(0, 0)].re - chi11.norm_sqr() * gamma / 2.0).abs() < 1e-12);

        // h_11 always equals (kappa/2)(|1 - chi_11|^2 - 1)
        let expect = 0.5 * ((c(1.0, 0.0) - chi11).norm_sqr() - 1.0);
        assert!((h[(0, 0)].re - expect).abs() < 1e-12);
    }

    #[test]
    fn h_matrix_passive_chiral_needs_no_gain() {
        let m = catalog::chiral_waveguide(1.0, 1.0, 0.3).unwrap();
        let h = h_matrix(&m.htilde(0.0), 1.0, 0.0).unwrap();
        assert!(h[(0, 0)].re <= 1e-12, "passive system: h_11 <= 0");
    }

    #[test]
    fn waveguide_only_mode_gets_empty_baths() {
        let bare = CMat::from_rows(&[vec![c(0.0, -0.5)]]).unwrap();
        let (model, real) = construct_min_noise(&bare, 1.0, 0.0, CMat::identity(1)).unwrap();
        assert_eq!(model.gain_coupling().cols(), 0);
        // the degeneracy nudge may leave an O(1e-10) loss channel at most
        assert!(real.achieved_noise <= 0.5 + 1e-9);
        assert!((real.target_min_noise - 0.5).abs() < 1e-14);
        assert!(real.residual <= 1e-9);
    }

    #[test]
    fn gain_case_meets_min_noise() {
        let htilde = fig2_gain_htilde();
        let (model, real) = construct_min_noise(&htilde, 1.0, 0.0, catalog::coupling_perturbation()).unwrap();
        assert!(real.residual <= 1e-9 * htilde.frobenius_norm());
        assert!((real.achieved_noise - real.target_min_noise).abs() <= 1e-9);
        // with reflection gain the minimum exceeds shot noise
        assert!(real.target_min_noise > 0.5);
        // the naive split of this dynamics is pure gain (no loss channels),
        // and a realization without output-visible loss noise is itself
        // minimum-noise, so the two coincide here
        let naive = SensorModel::from_hamiltonian(&htilde, 1.0, catalog::coupling_perturbation()).unwrap();
        assert_eq!(naive.loss_coupling().cols(), 0);
        let naive_noise = metrics::noise_psd(&naive).unwrap();
        assert!((naive_noise - metrics::min_noise(&naive).unwrap()).abs() < 1e-12);
        assert!(naive_noise >= real.achieved_noise - 1e-10);
        assert!(model.validate().decomposition_residual < 1e-9);
    }

    #[test]
    fn directional_case_reaches_shot_noise() {
        let htilde = CMat::from_rows(&[
            vec![c(0.0, -1.0), c(1.5, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -0.25)],
        ])
        .unwrap();
        let (model, real) = construct_min_noise(&htilde, 1.0, 0.0, catalog::coupling_perturbation()).unwrap();
        // chi_11 = 1 here: no reflection gain, so shot noise is reachable
        assert!((real.achieved_noise - 0.5).abs() <= 1e-9);
        assert!((real.target_min_noise - 0.5).abs() < 1e-14);
        assert!(real.residual <= 1e-9 * htilde.frobenius_norm());
        // the realization needs plenty of gain, it just cannot be seen at DC
        assert!(model.gain_coupling().cols() > 0);
    }

    #[test]
    fn transformed_gain_entry_matches_target() {
        // (chi YY† chi†)_11 = max(h_11, 0) for both branches
        for htilde in [
            fig2_gain_htilde(),
            CMat::from_rows(&[
                vec![c(0.0, -1.0), c(1.5, 0.0)],
                vec![c(0.0, 0.0), c(0.0, -0.25)],
            ])
            .unwrap(),
        ] {
            let h = h_matrix(&htilde, 1.0, 0.0).unwrap();
            let (model, _) = construct_min_noise(&htilde, 1.0, 0.0, catalog::coupling_perturbation()).unwrap();
            let chi = response::susceptibility(&model, 0.0, 0.0, 0.0).unwrap().chi;
            let yy = model.gain_coupling().matmul(&model.gain_coupling().dagger());
            let seen = chi.matmul(&yy).matmul(&chi.dagger())[(0, 0)].re;
            let target = h[(0, 0)].re.max(0.0);
            assert!(
                (seen - target).abs() <= 1e-9 * h.frobenius_norm().max(1.0),
                "gain seen {seen} vs target {target}"
            );
        }
    }

    #[test]
    fn random_realizations_share_dynamics_and_obey_noise_floor() {
        let htilde = fig2_gain_htilde();
        let min = {
            let (model, _) = construct_min_noise(&htilde, 1.0, 0.0, CMat::unit(2, 0, 0)).unwrap();
            metrics::noise_psd(&model).unwrap()
        };
        let mut noises = Vec::new();
        for seed in 0..20u64 {
            let m = random_realization(&htilde, 1.0, seed).unwrap();
            assert!(m.htilde(0.0).sub(&htilde).frobenius_norm() <= 1e-9 * htilde.frobenius_norm());
            let n = metrics::noise_psd(&m).unwrap();
            assert!(n >= min - 1e-10, "noise floor violated: {n} < {min}");
            noises.push(n);
        }
        // different seeds give genuinely different realizations
        let spread = noises.iter().cloned().fold(f64::MIN, f64::max)
            - noises.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1e-3);
    }
}
