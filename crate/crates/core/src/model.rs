//! Sensor data model: mode network, bath couplings, drive, and perturbation.
//!
//! A [`SensorModel`] fully specifies one sensing problem. Its dynamical matrix
//! is assembled as
//!
//! ```text
//! Htilde[eps] = H + eps*V + i*(Y Y† - Z Z† - (kappa/2) e11)
//! ```
//!
//! where `H` is the Hermitian mode-mode coupling, `Y` and `Z` couple the modes
//! to gain and loss baths, `kappa` is the readout-waveguide rate on mode 1,
//! and the Hermitian matrix `V` is how the parameter to be sensed enters the
//! dynamics. The decomposition into `(Y, Z)` is not unique: many bath choices
//! realize the same `Htilde`, and they differ in measurement noise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{c, CMat};
use crate::error::{Error, Result};

/// Stability margin, in units of kappa: every eigenvalue of `Htilde[0]` must
/// decay faster than this for steady-state analysis to apply.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Relative tolerance on the mode-1 frequency reference `Re Htilde_11 = 0`.
const FREQ_REF_TOL: f64 = 1e-9;

/// A driven coupled-mode sensor.
///
/// Immutable after construction; all analysis routines take `&self`.
#[derive(Debug, Clone)]
pub struct SensorModel {
    /// Hermitian mode-mode coupling (M x M), mode-1 diagonal entry zero.
    h: CMat,
    /// Gain-bath couplings (M x N_Y), sqrt-rate units.
    y: CMat,
    /// Loss-bath couplings (M x N_Z), sqrt-rate units.
    z: CMat,
    /// Readout-waveguide coupling rate to mode 1.
    kappa: f64,
    /// Hermitian perturbation matrix (dimensionless).
    v: CMat,
    /// Drive detuning from the mode-1 resonance.
    delta: f64,
    /// Drive amplitude, real and nonnegative by convention.
    beta: f64,
    /// Thermal occupancy of each gain bath (length N_Y).
    nbar_gain: Vec<f64>,
    /// Thermal occupancy of each loss bath (length N_Z).
    nbar_loss: Vec<f64>,
    /// Thermal occupancy of the readout waveguide.
    nbar_waveguide: f64,
}

/// Diagnostics from [`SensorModel::validate`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Residual of the bath decomposition identity; zero for models built
    /// from explicit `(Y, Z)`, nonzero when an independently supplied
    /// dynamical matrix disagrees with the stored baths.
    pub decomposition_residual: f64,
    /// Smallest decay rate among the eigenvalues of `Htilde[0]`
    /// (negative means an amplifying eigenvalue: unstable).
    pub stability_margin_found: f64,
    /// For two-mode models, whether `|H12| = |H21|` within tolerance.
    /// Trivially true for other mode counts.
    pub reciprocal: bool,
    pub messages: Vec<String>,
}

impl SensorModel {
    /// Build and check a model. Stability is *not* enforced here so that
    /// unstable models can still be constructed for spectral diagnostics;
    /// operations that need a steady state check it themselves.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        h: CMat,
        y: CMat,
        z: CMat,
        kappa: f64,
        v: CMat,
        delta: f64,
        beta: f64,
        nbar_gain: Vec<f64>,
        nbar_loss: Vec<f64>,
        nbar_waveguide: f64,
    ) -> Result<Self> {
        let m = h.rows();
        if m == 0 {
            return Err(Error::InvalidModel("at least one mode required".into()));
        }
        if !h.is_square() || !v.is_square() || v.rows() != m {
            return Err(Error::ShapeMismatch(format!(
                "H is {}x{}, V is {}x{}",
                h.rows(),
                h.cols(),
                v.rows(),
                v.cols()
            )));
        }
        if y.rows() != m || z.rows() != m {
            return Err(Error::ShapeMismatch("bath coupling rows must equal mode count".into()));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidRate(format!("kappa = {kappa} must be positive")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidRate(format!("beta = {beta} must be real and nonnegative")));
        }
        for mat in [&h, &v] {
            let asym = mat.hermitian_asymmetry();
            let tol = crate::cmatrix::HERMITIAN_TOL * mat.frobenius_norm().max(1e-300);
            if asym > tol {
                return Err(Error::NotHermitian { asymmetry: asym, tol });
            }
        }
        if h[(0, 0)].norm() > FREQ_REF_TOL * h.frobenius_norm().max(kappa) {
            return Err(Error::InvalidModel(format!(
                "mode-1 frequency reference violated: H_11 = {} (must be 0)",
                h[(0, 0)]
            )));
        }
        if nbar_gain.len() != y.cols() || nbar_loss.len() != z.cols() {
            return Err(Error::ShapeMismatch("one thermal occupancy per bath channel".into()));
        }
        if nbar_gain.iter().chain(&nbar_loss).chain([&nbar_waveguide]).any(|&n| n < 0.0) {
            return Err(Error::InvalidModel("thermal occupancies must be nonnegative".into()));
        }
        Ok(Self { h, y, z, kappa, v, delta, beta, nbar_gain, nbar_loss, nbar_waveguide })
    }

    /// Convenience constructor with vacuum baths.
    pub fn with_vacuum(h: CMat, y: CMat, z: CMat, kappa: f64, v: CMat, delta: f64, beta: f64) -> Result<Self> {
        let (ng, nl) = (y.cols(), z.cols());
        Self::new(h, y, z, kappa, v, delta, beta, vec![0.0; ng], vec![0.0; nl], 0.0)
    }

    pub fn mode_count(&self) -> usize {
        self.h.rows()
    }

    pub fn hermitian_coupling(&self) -> &CMat {
        &self.h
    }

    pub fn gain_coupling(&self) -> &CMat {
        &self.y
    }

    pub fn loss_coupling(&self) -> &CMat {
        &self.z
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn perturbation(&self) -> &CMat {
        &self.v
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nbar_gain(&self) -> &[f64] {
        &self.nbar_gain
    }

    pub fn nbar_loss(&self) -> &[f64] {
        &self.nbar_loss
    }

    pub fn nbar_waveguide(&self) -> f64 {
        self.nbar_waveguide
    }

    /// Copy of this model with a different drive detuning. Baths are kept
    /// as-is: retuning the drive does not re-optimize the dissipation.
    pub fn at_detuning(&self, delta: f64) -> Self {
        let mut m = self.clone();
        m.delta = delta;
        m
    }

    /// Copy with a different drive amplitude.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidRate(format!("beta = {beta} must be real and nonnegative")));
        }
        let mut m = self.clone();
        m.beta = beta;
        Ok(m)
    }

    /// Copy with a different (Hermitian) perturbation matrix.
    pub fn with_perturbation(&self, v: CMat) -> Result<Self> {
        if !v.is_square() || v.rows() != self.mode_count() {
            return Err(Error::ShapeMismatch("perturbation must be M x M".into()));
        }
        let asym = v.hermitian_asymmetry();
        let tol = crate::cmatrix::HERMITIAN_TOL * v.frobenius_norm().max(1e-300);
        if asym > tol {
            return Err(Error::NotHermitian { asymmetry: asym, tol });
        }
        let mut m = self.clone();
        m.v = v;
        Ok(m)
    }

    /// The gain-minus-loss generator `Y Y† - Z Z† - (kappa/2) e11`.
    fn dissipative_generator(&self) -> CMat {
        let m = self.mode_count();
        let yy = self.y.matmul(&self.y.dagger());
        let zz = self.z.matmul(&self.z.dagger());
        let mut a = yy.sub(&zz);
        a[(0, 0)] -= c(self.kappa / 2.0, 0.0);
        debug_assert_eq!(a.rows(), m);
        a
    }

    /// Dynamical matrix `Htilde[eps] = H + eps V + i (YY† - ZZ† - kappa/2 e11)`.
    pub fn htilde(&self, epsilon: f64) -> CMat {
        self.h
            .add(&self.v.scale(c(epsilon, 0.0)))
            .add(&self.dissipative_generator().scale(c(0.0, 1.0)))
    }

    /// Eigenvalues of `Htilde[eps]`, sorted by real then imaginary part.
    pub fn eigenvalues(&self, epsilon: f64) -> Vec<Complex64> {
        self.htilde(epsilon).eigenvalues()
    }

    /// Smallest decay rate of the unperturbed dynamical matrix,
    /// `-max_j Im Omega_j`.
    pub fn stability_margin(&self) -> f64 {
        stability_margin_of(&self.htilde(0.0))
    }

    /// Error out unless `Htilde[eps]` is strictly stable.
    pub fn ensure_stable(&self, epsilon: f64) -> Result<()> {
        let margin = stability_margin_of(&self.htilde(epsilon));
        let required = STABILITY_MARGIN * self.kappa;
        if margin <= required {
            return Err(Error::Unstable { margin, required });
        }
        Ok(())
    }

    /// Run the structural checks and report diagnostics without failing.
    pub fn validate(&self) -> ValidationReport {
        let htilde = self.htilde(0.0);
        let target = self.dissipative_generator();
        let residual = htilde.antihermitian_part_over_i().sub(&target).frobenius_norm();
        let margin = stability_margin_of(&htilde);
        let mut messages = Vec::new();

        let reciprocal = if self.mode_count() == 2 {
            let asym = (htilde[(0, 1)].norm() - htilde[(1, 0)].norm()).abs();
            asym <= 1e-10 * htilde.frobenius_norm()
        } else {
            true
        };

        if margin <= STABILITY_MARGIN * self.kappa {
            messages.push(format!(
                "unstable: slowest eigenvalue decays at rate {margin:.3e} (kappa = {})",
                self.kappa
            ));
        }
        if !reciprocal {
            messages.push("non-reciprocal mode-mode coupling".into());
        }

        ValidationReport {
            decomposition_residual: residual,
            stability_margin_found: margin,
            reciprocal,
            messages,
        }
    }

    /// Reconstruct a model from a dynamical matrix alone, using the *naive*
    /// bath realization: the dissipative generator is split into PSD gain and
    /// loss parts which are then factored into coupling matrices. This is one
    /// valid realization; it is generally not the minimum-noise one (see
    /// [`crate::bathopt::construct_min_noise`] for that).
    ///
    /// The drive defaults to resonance (`delta = 0`) with amplitude
    /// normalized to unit total intracavity photon number.
    pub fn from_hamiltonian(htilde: &CMat, kappa: f64, v: CMat) -> Result<Self> {
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
        let margin = stability_margin_of(htilde);
        if margin <= STABILITY_MARGIN * kappa {
            return Err(Error::Unstable { margin, required: STABILITY_MARGIN * kappa });
        }
        let h = htilde.hermitian_part();
        let mut a = htilde.antihermitian_part_over_i();
        a[(0, 0)] += c(kappa / 2.0, 0.0);
        let (gain, loss) = a.psd_split()?;
        let y = gain.psd_factor()?;
        let z = loss.psd_factor()?;
        let model = Self::with_vacuum(h, y, z, kappa, v, 0.0, 0.0)?;
        let beta = model.beta_for_unit_photon_number()?;
        model.with_beta(beta)
    }

    /// Drive amplitude that puts one coherent photon (in total, over all
    /// modes) into the steady state at the model's current detuning.
    pub fn beta_for_unit_photon_number(&self) -> Result<f64> {
        self.ensure_stable(0.0)?;
        let chi = crate::response::susceptibility(self, 0.0, self.delta, 0.0)?.chi;
        let occ: f64 = (0..self.mode_count()).map(|i| chi[(i, 0)].norm_sqr()).sum();
        Ok((self.kappa / occ).sqrt())
    }
}

fn stability_margin_of(htilde: &CMat) -> f64 {
    htilde
        .eigenvalues()
        .iter()
        .map(|w| -w.im)
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

/// Serialized form of a model. Complex numbers are two-element `[re, im]`
/// arrays and matrices are row-major nested arrays. All rates are in units of
/// `kappa`; the optional `units` field only documents that convention and
/// must be `"kappa"` when present.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelJson {
    #[serde(rename = "H")]
    pub h: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "Z")]
    pub z: Vec<Vec<[f64; 2]>>,
    pub kappa: f64,
    #[serde(rename = "V")]
    pub v: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub beta: f64,
    /// Per-bath thermal occupancies, gain baths first, then loss baths.
    /// May be omitted (all vacuum) or have length N_Y + N_Z.
    #[serde(default, rename = "nbar_th")]
    pub nbar_th: Vec<f64>,
    /// Thermal occupancy of the readout waveguide (default vacuum).
    #[serde(default)]
    pub nbar_wg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

fn mat_to_nested(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn nested_to_mat(v: &[Vec<[f64; 2]>], rows_hint: usize) -> Result<CMat> {
    if v.is_empty() {
        // an empty list means "no bath channels"
        return Ok(CMat::zeros(rows_hint, 0));
    }
    let cols = v[0].len();
    if v.iter().any(|row| row.len() != cols) {
        return Err(Error::InvalidModel("ragged matrix rows".into()));
    }
    if cols == 0 {
        return Ok(CMat::zeros(v.len(), 0));
    }
    let rows: Vec<Vec<Complex64>> = v
        .iter()
        .map(|row| row.iter().map(|&[re, im]| c(re, im)).collect())
        .collect();
    CMat::from_rows(&rows)
}

impl SensorModel {
    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            h: mat_to_nested(&self.h),
            y: mat_to_nested(&self.y),
            z: mat_to_nested(&self.z),
            kappa: self.kappa,
            v: mat_to_nested(&self.v),
            delta: self.delta,
            beta: self.beta,
            nbar_th: self.nbar_gain.iter().chain(&self.nbar_loss).copied().collect(),
            nbar_wg: self.nbar_waveguide,
            units: Some("kappa".into()),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self> {
        if let Some(units) = &json.units {
            if units != "kappa" {
                return Err(Error::InvalidModel(format!(
                    "unsupported units '{units}' (only 'kappa' is defined)"
                )));
            }
        }
        let h = nested_to_mat(&json.h, 0)?;
        let m = h.rows();
        let y = nested_to_mat(&json.y, m)?;
        let z = nested_to_mat(&json.z, m)?;
        let v = nested_to_mat(&json.v, m)?;
        let (ng, nl) = (y.cols(), z.cols());
        let (nbar_gain, nbar_loss) = if json.nbar_th.is_empty() {
            (vec![0.0; ng], vec![0.0; nl])
        } else if json.nbar_th.len() == ng + nl {
            (json.nbar_th[..ng].to_vec(), json.nbar_th[ng..].to_vec())
        } else {
            return Err(Error::InvalidModel(format!(
                "nbar_th must have one entry per bath channel ({} + {}), got {}",
                ng,
                nl,
                json.nbar_th.len()
            )));
        };
        Self::new(h, y, z, json.kappa, v, json.delta, json.beta, nbar_gain, nbar_loss, json.nbar_wg)
    }
}
