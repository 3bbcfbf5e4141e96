//! Canonical sensor families: the single dispersive mode, reciprocal and
//! directional two-mode devices, the passive chiral-waveguide realization,
//! and the degenerate-point bookkeeping for the reciprocal family.
//!
//! Every constructor normalizes the drive so the unperturbed steady state at
//! resonance holds one coherent photon in total, which makes rate and signal
//! figures directly comparable across devices.

use num_complex::Complex64;

use crate::bathopt;
use crate::cmatrix::{c, CMat};
use crate::error::{Error, Result};
use crate::model::SensorModel;

/// Parameters of the two-mode families.
///
/// `gamma1` and `gamma2` are local damping (positive) or anti-damping
/// (negative) rates on each mode, `j` the mode-mode coupling, and `nu2` the
/// frequency offset of mode 2. The readout waveguide always adds `kappa` of
/// damping to mode 1 on top of `gamma1`.
#[derive(Debug, Clone, Copy)]
pub struct TwoModeParams {
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub j: Complex64,
    pub nu2: f64,
}

/// Symmetric mode-coupling perturbation, the standard two-mode sensing target.
pub fn coupling_perturbation() -> CMat {
    CMat::from_rows(&[vec![c(0.0, 0.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(0.0, 0.0)]])
        .expect("2x2 coupling matrix")
}

fn local_baths(m: usize, rates: &[f64]) -> (CMat, CMat) {
    // one bath column per mode with nonzero local rate; gain for negative rates
    let mut gain_cols: Vec<Vec<Complex64>> = Vec::new();
    let mut loss_cols: Vec<Vec<Complex64>> = Vec::new();
    for (i, &g) in rates.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let mut col = vec![Complex64::default(); m];
        col[i] = c((g.abs() / 2.0).sqrt(), 0.0);
        if g > 0.0 {
            loss_cols.push(col);
        } else {
            gain_cols.push(col);
        }
    }
    let build = |cols: &[Vec<Complex64>]| {
        CMat::from_fn(m, cols.len(), |i, j| cols[j][i])
    };
    (build(&gain_cols), build(&loss_cols))
}

fn normalized(model: SensorModel) -> Result<SensorModel> {
    let beta = model.beta_for_unit_photon_number()?;
    model.with_beta(beta)
}

/// Single mode with local rate `gamma1` (loss for positive, gain for
/// negative) on top of the waveguide coupling; senses its own frequency
/// shift (`V = e11`).
pub fn single_mode(kappa: f64, gamma1: f64) -> Result<SensorModel> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidRate(format!("kappa = {kappa} must be positive")));
    }
    let (y, z) = local_baths(1, &[gamma1]);
    let model = SensorModel::with_vacuum(
        CMat::zeros(1, 1),
        y,
        z,
        kappa,
        CMat::identity(1),
        0.0,
        0.0,
    )?;
    model.ensure_stable(0.0)?;
    normalized(model)
}

/// Reciprocal two-mode sensor: real symmetric coupling `J`, local gain or
/// loss on each mode, coupling perturbation. `nu2` is ignored (the family is
/// defined with degenerate mode frequencies).
pub fn reciprocal_two_mode(p: &TwoModeParams) -> Result<SensorModel> {
    if !(p.kappa > 0.0) {
        return Err(Error::InvalidRate(format!("kappa = {} must be positive", p.kappa)));
    }
    if p.j.im != 0.0 || p.j.re < 0.0 {
        return Err(Error::InvalidRate(
            "reciprocal family takes a real nonnegative coupling J".into(),
        ));
    }
    let h = CMat::from_rows(&[vec![c(0.0, 0.0), p.j], vec![p.j, c(0.0, 0.0)]])?;
    let (y, z) = local_baths(2, &[p.gamma1, p.gamma2]);
    let model =
        SensorModel::with_vacuum(h, y, z, p.kappa, coupling_perturbation(), 0.0, 0.0)?;
    model.ensure_stable(0.0)?;
    normalized(model)
}

/// Directional two-mode sensor: mode 2 drives mode 1 through `J` but feels no
/// back-action. Baths are realized by the minimum-noise construction at the
/// drive point (resonance), which is what makes this family reach its rate
/// bound; pass `naive_baths = true` through [`directional_two_mode_with`] to
/// study the generic realization instead.
pub fn directional_two_mode(p: &TwoModeParams) -> Result<SensorModel> {
    directional_two_mode_with(p, false)
}

/// Directional two-mode sensor with an explicit bath-realization choice.
pub fn directional_two_mode_with(p: &TwoModeParams, naive_baths: bool) -> Result<SensorModel> {
    if !(p.kappa > 0.0) {
        return Err(Error::InvalidRate(format!("kappa = {} must be positive", p.kappa)));
    }
    let htilde = CMat::from_rows(&[
        vec![c(0.0, -(p.kappa + p.gamma1) / 2.0), p.j],
        vec![c(0.0, 0.0), c(p.nu2, -p.gamma2 / 2.0)],
    ])?;
    let model = if naive_baths {
        SensorModel::from_hamiltonian(&htilde, p.kappa, coupling_perturbation())?
    } else {
        let (model, _) =
            bathopt::construct_min_noise(&htilde, p.kappa, 0.0, coupling_perturbation())?;
        model
    };
    normalized(model)
}

/// Two modes coupled through a one-way (cascaded) waveguide with rates
/// `gamma1`, `gamma2`, plus the usual readout coupling on mode 1. Purely
/// passive: no gain baths, so the homodyne noise sits at the shot-noise floor
/// while the directional coupling `J = -i sqrt(gamma1 gamma2)` can be made
/// large.
///
/// The Hermitian coupling `H12 = -i sqrt(gamma1 gamma2)/2` together with the
/// rank-one collective loss column cancels the back-action path exactly,
/// which is checked by the decomposition residual in tests.
pub fn chiral_waveguide(kappa: f64, gamma1: f64, gamma2: f64) -> Result<SensorModel> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidRate(format!("kappa = {kappa} must be positive")));
    }
    if !(gamma1 > 0.0) || !(gamma2 > 0.0) {
        return Err(Error::InvalidRate(
            "chiral waveguide rates gamma1, gamma2 must be positive".into(),
        ));
    }
    let g = (gamma1 * gamma2).sqrt();
    let h = CMat::from_rows(&[
        vec![c(0.0, 0.0), c(0.0, -g / 2.0)],
        vec![c(0.0, g / 2.0), c(0.0, 0.0)],
    ])?;
    let z = CMat::from_rows(&[
        vec![c((gamma1 / 2.0).sqrt(), 0.0)],
        vec![c((gamma2 / 2.0).sqrt(), 0.0)],
    ])?;
    let model = SensorModel::with_vacuum(
        h,
        CMat::zeros(2, 0),
        z,
        kappa,
        coupling_perturbation(),
        0.0,
        0.0,
    )?;
    model.ensure_stable(0.0)?;
    normalized(model)
}

/// Coupling at which the reciprocal family's eigenvalues coalesce:
/// `J_ep = (kappa + gamma1 - gamma2) / 4`. Only meaningful while the
/// coalesced eigenvalue still decays, `kappa + gamma1 + gamma2 > 0`.
pub fn ep_condition(kappa: f64, gamma1: f64, gamma2: f64) -> Result<f64> {
    let total = kappa + gamma1 + gamma2;
    if total <= 0.0 {
        return Err(Error::UnstableEp { total_damping: total });
    }
    Ok((kappa + gamma1 - gamma2) / 4.0)
}

/// Eigenvalues of the perturbed dynamical matrix, sorted by real then
/// imaginary part. Defined for unstable models too; used in diagnostics.
pub fn eigenvalues(model: &SensorModel, epsilon: f64) -> Vec<Complex64> {
    model.eigenvalues(epsilon)
}

/// Eigenvalue splitting `Omega_+ - Omega_-` of a two-mode model.
pub fn splitting(model: &SensorModel, epsilon: f64) -> Result<Complex64> {
    if model.mode_count() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: model.mode_count() });
    }
    let e = model.eigenvalues(epsilon);
    Ok(e[1] - e[0])
}

/// Basis change that exhibits the coalesced reciprocal family as an
/// upper-triangular (non-diagonalizable) block, together with the transformed
/// dynamical and perturbation matrices for frequency-shift sensing.
///
/// Returns `(T, HJ, VJ)` with `HJ = T Htilde T^{-1}` upper triangular with
/// equal diagonal entries and off-diagonal `2J`, and `VJ = T e11 T^{-1}`,
/// whose nonzero anti-diagonal entry is what turns a linear perturbation into
/// a square-root eigenvalue splitting.
pub fn jordan_transform(p: &TwoModeParams) -> Result<(CMat, CMat, CMat)> {
    let j_ep = ep_condition(p.kappa, p.gamma1, p.gamma2)?;
    if (p.j - j_ep).norm() > 1e-10 * p.kappa {
        return Err(Error::NotAtEp { deviation: (p.j - j_ep).norm() });
    }
    let t = CMat::from_rows(&[
        vec![c(0.5, 0.0), c(0.0, -0.5)],
        vec![c(0.0, -0.5), c(0.5, 0.0)],
    ])?;
    let t_inv = CMat::from_rows(&[
        vec![c(1.0, 0.0), c(0.0, 1.0)],
        vec![c(0.0, 1.0), c(1.0, 0.0)],
    ])?;
    let htilde = CMat::from_rows(&[
        vec![c(0.0, -(p.kappa + p.gamma1) / 2.0), p.j],
        vec![p.j, c(0.0, -p.gamma2 / 2.0)],
    ])?;
    let hj = t.matmul(&htilde).matmul(&t_inv);
    let vj = t.matmul(&CMat::unit(2, 0, 0)).matmul(&t_inv);
    Ok((t, hj, vj))
}

/// Figure presets addressable from the command line.
pub const PRESET_NAMES: [&str; 6] = [
    "fig2-recip-nogain",
    "fig2-recip-gain",
    "fig2-nonrecip",
    "fig3-amplifier",
    "fig5-splitting",
    "chiral",
];

/// Look up a named preset. Rates are in units of `kappa = 1`.
pub fn preset(name: &str) -> Result<SensorModel> {
    preset_with_coupling(name, None)
}

/// Look up a preset, optionally overriding its mode-mode coupling `J`
/// (in units of kappa). Only the two-mode presets accept an override.
pub fn preset_with_coupling(name: &str, j_override: Option<f64>) -> Result<SensorModel> {
    let j = |default: f64| c(j_override.unwrap_or(default), 0.0);
    match name {
        // reciprocal device at its coalescence point, loss only
        "fig2-recip-nogain" => reciprocal_two_mode(&TwoModeParams {
            kappa: 1.0,
            gamma1: 0.0,
            gamma2: 0.2,
            j: j(0.2),
            nu2: 0.0,
        }),
        // reciprocal device at its coalescence point, mode 2 has gain
        "fig2-recip-gain" => reciprocal_two_mode(&TwoModeParams {
            kappa: 1.0,
            gamma1: 0.0,
            gamma2: -0.3,
            j: j(0.325),
            nu2: 0.0,
        }),
        // directional device that beats the reciprocal rate bound
        "fig2-nonrecip" => directional_two_mode(&TwoModeParams {
            kappa: 1.0,
            gamma1: 1.0,
            gamma2: 0.5,
            j: j(1.5),
            nu2: 0.0,
        }),
        // two-mode amplifier with matched total damping, never coalesces
        "fig3-amplifier" => reciprocal_two_mode(&TwoModeParams {
            kappa: 1.0,
            gamma1: -0.84,
            gamma2: 0.16,
            j: j(0.325),
            nu2: 0.0,
        }),
        // directional device with detuned second mode for splitting scans;
        // naive baths keep the one-way structure exact even at huge J, and
        // intensity scans never see the bath choice
        "fig5-splitting" => directional_two_mode_with(
            &TwoModeParams {
                kappa: 1.0,
                gamma1: 0.5,
                gamma2: 1.0,
                j: j(20.0),
                nu2: 4.0,
            },
            true,
        ),
        // passive one-way realization that beats the reciprocal bound
        "chiral" => {
            if j_override.is_some() {
                return Err(Error::InvalidRate(
                    "the chiral preset fixes J = -i sqrt(gamma1 gamma2)".into(),
                ));
            }
            chiral_waveguide(1.0, 1.0, 0.2)
        }
        other => Err(Error::InvalidModel(format!(
            "unknown preset '{other}' (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// One-line description of each preset for `catalog-list`.
pub fn preset_description(name: &str) -> &'static str {
    match name {
        "fig2-recip-nogain" => "reciprocal two-mode device at coalescence, loss only (g1=0, g2=0.2, J=0.2)",
        "fig2-recip-gain" => "reciprocal two-mode device at coalescence with gain (g1=0, g2=-0.3, J=0.325)",
        "fig2-nonrecip" => "directional two-mode device, min-noise baths (g1=1, g2=0.5, J=1.5)",
        "fig3-amplifier" => "two-mode amplifier, matched damping, never coalesces (k+g1=g2=0.16, J=0.325)",
        "fig5-splitting" => "directional device with detuned mode 2 for splitting scans (g1=0.5, g2=1, nu2=4, J=20)",
        "chiral" => "passive chiral-waveguide realization (g1=1, g2=0.2)",
        _ => "",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;
    use crate::response;

    /// Compare spectra as sets: near-degenerate pairs make sorted order
    /// unstable under last-bit perturbations.
    fn assert_spectra_close(got: &[Complex64], expect: &[Complex64], tol: f64) {
        assert_eq!(got.len(), expect.len());
        let mut used = vec![false; expect.len()];
        for g in got {
            let mut best = None;
            let mut best_dist = f64::INFINITY;
            for (i, e) in expect.iter().enumerate() {
                if !used[i] && (g - e).norm() < best_dist {
                    best_dist = (g - e).norm();
                    best = Some(i);
                }
            }
            let i = best.expect("expectation list exhausted");
            assert!(best_dist <= tol, "eigenvalue {g} is {best_dist:.3e} from {}", expect[i]);
            used[i] = true;
        }
    }

    #[test]
    fn single_mode_cases() {
        let ideal = single_mode(1.0, 0.0).unwrap();
        let chi = response::susceptibility(&ideal, 0.0, 0.0, 0.0).unwrap().chi;
        assert!((chi[(0, 0)] - c(2.0, 0.0)).norm() < 1e-13);

        let gainy = single_mode(1.0, -0.5).unwrap();
        let chi = response::susceptibility(&gainy, 0.0, 0.0, 0.0).unwrap().chi;
        assert!(chi[(0, 0)].norm() > 2.0, "reflection gain expected");
        assert!((chi[(0, 0)].norm() - 4.0).abs() < 1e-12);

        assert!(matches!(single_mode(1.0, -1.0), Err(Error::Unstable { .. })));
    }

    #[test]
    fn presets_validate_cleanly() {
        for name in PRESET_NAMES {
            let m = preset(name).unwrap();
            let report = m.validate();
            assert!(
                report.decomposition_residual <= 1e-9 * m.htilde(0.0).frobenius_norm().max(1.0),
                "{name}: residual {}",
                report.decomposition_residual
            );
            assert!(report.stability_margin_found > 0.0, "{name} must be stable");
            let nbar = metrics::photon_number(&m).unwrap();
            assert!((nbar - 1.0).abs() < 1e-10, "{name}: drive normalization");
        }
    }

    #[test]
    fn reciprocity_flags() {
        assert!(preset("fig2-recip-gain").unwrap().validate().reciprocal);
        assert!(!preset("fig2-nonrecip").unwrap().validate().reciprocal);
        assert!(!preset("chiral").unwrap().validate().reciprocal);
    }

    #[test]
    fn ep_condition_values() {
        assert!((ep_condition(1.0, 0.0, -0.3).unwrap() - 0.325).abs() < 1e-15);
        assert!((ep_condition(1.0, 0.0, 1.0).unwrap() - 0.0).abs() < 1e-15);
        assert!(matches!(ep_condition(1.0, -0.6, -0.5), Err(Error::UnstableEp { .. })));
    }

    #[test]
    fn fig2_gain_preset_sits_at_its_coalescence_point() {
        let m = preset("fig2-recip-gain").unwrap();
        let e = m.eigenvalues(0.0);
        assert!((e[0] - e[1]).norm() < 1e-7, "degenerate pair expected");
        assert!((e[0] - c(0.0, -0.175)).norm() < 1e-7);
    }

    #[test]
    fn directional_eigenvalues_and_splitting() {
        let m = preset("fig2-nonrecip").unwrap();
        let e = m.eigenvalues(0.0);
        // {-i(kappa+gamma1)/2, nu2 - i gamma2/2} = {-i, -0.25i}
        // min-noise baths reconstruct the dynamics to ~norm(YY') * eps_mach
        assert_spectra_close(&e, &[c(0.0, -1.0), c(0.0, -0.25)], 1e-11);

        // independent of J: exact on the one-way matrix itself, and within the
        // J-amplified reconstruction noise for bath-realized models
        for j in [0.0, 1.5, 20.0, 50.0] {
            let ideal = CMat::from_rows(&[
                vec![c(0.0, -1.0), c(j, 0.0)],
                vec![c(0.0, 0.0), c(0.0, -0.25)],
            ])
            .unwrap();
            assert_spectra_close(&ideal.eigenvalues(), &[c(0.0, -1.0), c(0.0, -0.25)], 1e-12);

            let p = TwoModeParams { kappa: 1.0, gamma1: 1.0, gamma2: 0.5, j: c(j, 0.0), nu2: 0.0 };
            let mj = directional_two_mode_with(&p, true).unwrap();
            assert_spectra_close(&mj.eigenvalues(0.0), &[c(0.0, -1.0), c(0.0, -0.25)], 1e-11);
        }

        // splitting at eps = 0 for the detuned preset
        let m5 = preset("fig5-splitting").unwrap();
        let s = splitting(&m5, 0.0).unwrap();
        // Omega_+ - Omega_- = nu2 - i(gamma2 - kappa - gamma1)/2 = 4 + 0.25i
        assert!((s - c(4.0, 0.25)).norm() < 1e-12);
    }

    #[test]
    fn directional_closed_form_eigenvalues_perturbed() {
        let p = TwoModeParams { kappa: 1.0, gamma1: 0.5, gamma2: 1.0, j: c(20.0, 0.0), nu2: 4.0 };
        let m = directional_two_mode_with(&p, true).unwrap();
        let eps = 0.3;
        let mean = c(p.nu2 / 2.0, -(p.kappa + p.gamma1 + p.gamma2) / 4.0);
        let disc = (p.j * eps / 2.0
            + c(eps * eps / 4.0, 0.0)
            + (c(p.nu2 / 2.0, (p.kappa + p.gamma1 - p.gamma2) / 4.0)
                * c(p.nu2 / 2.0, (p.kappa + p.gamma1 - p.gamma2) / 4.0)))
        .sqrt();
        let expect = [mean - disc, mean + disc];
        assert_spectra_close(&m.eigenvalues(eps), &expect, 1e-12);
    }

    #[test]
    fn chiral_construction_is_directional_and_quiet() {
        let m = chiral_waveguide(1.0, 1.0, 0.25).unwrap();
        let htilde = m.htilde(0.0);
        assert!(htilde[(1, 0)].norm() < 1e-12, "no back-action path");
        let g = (1.0f64 * 0.25).sqrt();
        assert!((htilde[(0, 1)] - c(0.0, -g)).norm() < 1e-12, "J = -i sqrt(g1 g2)");
        assert_eq!(m.gain_coupling().cols(), 0);
        assert!((metrics::noise_psd(&m).unwrap() - 0.5).abs() < 1e-14);

        // rate = 4 kappa nbar (gamma1/gamma2) when gamma1 = kappa
        let nbar = metrics::photon_number(&m).unwrap();
        let gamma = metrics::measurement_rate(&m, false).unwrap();
        assert!((gamma / (4.0 * nbar * (1.0 / 0.25)) - 1.0).abs() < 1e-10);
        assert!(matches!(chiral_waveguide(1.0, 0.0, 0.5), Err(Error::InvalidRate(_))));
    }

    #[test]
    fn jordan_transform_structure() {
        let p = TwoModeParams {
            kappa: 1.0,
            gamma1: 0.0,
            gamma2: -0.3,
            j: c(0.325, 0.0),
            nu2: 0.0,
        };
        let (_, hj, vj) = jordan_transform(&p).unwrap();
        assert!(hj[(1, 0)].norm() < 1e-12, "lower-left must vanish");
        assert!((hj[(0, 0)] - hj[(1, 1)]).norm() < 1e-12, "degenerate diagonal");
        assert!((hj[(0, 1)] - c(0.65, 0.0)).norm() < 1e-12, "off-diagonal 2J");
        assert!((hj[(0, 0)] - c(0.0, -0.175)).norm() < 1e-12);
        // transformed frequency-shift perturbation
        let expect = CMat::from_rows(&[
            vec![c(0.5, 0.0), c(0.0, 0.5)],
            vec![c(0.0, -0.5), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(vj.sub(&expect).frobenius_norm() < 1e-12);

        let off = TwoModeParams { j: c(0.4, 0.0), ..p };
        assert!(matches!(jordan_transform(&off), Err(Error::NotAtEp { .. })));
    }

    #[test]
    fn jordan_block_spectrum_matches_model() {
        let p = TwoModeParams {
            kappa: 1.0,
            gamma1: 0.0,
            gamma2: -0.3,
            j: c(0.325, 0.0),
            nu2: 0.0,
        };
        let (_, hj, vj) = jordan_transform(&p).unwrap();
        // same-bits source matrix: a defective point amplifies last-bit input
        // differences into sqrt-sized eigenvalue differences
        let htilde = CMat::from_rows(&[
            vec![c(0.0, -(p.kappa + p.gamma1) / 2.0), p.j],
            vec![p.j, c(0.0, -p.gamma2 / 2.0)],
        ])
        .unwrap();
        for eps in [0.0, 1e-3, 0.05] {
            let direct = htilde.add(&CMat::unit(2, 0, 0).scale(c(eps, 0.0))).eigenvalues();
            let transformed = hj.add(&vj.scale(c(eps, 0.0))).eigenvalues();
            // at the coalescence point itself, rounding in the similarity
            // products splits the pair by sqrt(eps_mach * J) ~ 1e-9
            let tol = if eps == 0.0 { 1e-7 } else { 1e-12 };
            assert_spectra_close(&direct, &transformed, tol);
        }
        // the bath-realized model reproduces the same dynamics up to rounding,
        // which the coalescence point stretches to sqrt size
        let model = reciprocal_two_mode(&p)
            .unwrap()
            .with_perturbation(CMat::unit(2, 0, 0))
            .unwrap();
        assert!(model.htilde(0.0).sub(&htilde).frobenius_norm() < 1e-14);
        assert_spectra_close(&model.eigenvalues(0.0), &htilde.eigenvalues(), 1e-7);
        assert_spectra_close(&model.eigenvalues(0.05), &htilde.add(&CMat::unit(2, 0, 0).scale(c(0.05, 0.0))).eigenvalues(), 1e-12);
    }
}
