//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by model construction, linear algebra and analysis routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Matrix dimensions do not match the operation's requirements.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A matrix required to be Hermitian failed the Hermiticity check.
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds tolerance {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    /// A matrix required to be positive semi-definite has a significantly
    /// negative eigenvalue.
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    /// Matrix inversion hit a zero pivot or the condition estimate exceeded
    /// the cutoff. For susceptibilities this signals a drive exactly on an
    /// undamped resonance.
    #[error("singular matrix (condition estimate {cond:.3e})")]
    SingularMatrix { cond: f64 },

    /// The dynamical matrix has an eigenvalue on or above the real axis, so
    /// no steady state exists.
    #[error("unstable model: slowest eigenvalue decays at rate {margin:.3e} (must exceed {required:.3e})")]
    Unstable { margin: f64, required: f64 },

    /// The linear response coefficient vanishes: the perturbation is
    /// invisible at this drive point and no homodyne phase can be fixed.
    #[error("zero linear response: perturbation is invisible at this drive point")]
    ZeroResponse,

    /// Operation requires a reciprocal two-mode model.
    #[error("model is not reciprocal: |H12| and |H21| differ by {asymmetry:.3e}")]
    NotReciprocal { asymmetry: f64 },

    /// Operation requires a fully directional model (chi_21 = 0).
    #[error("model is not directional: |chi_21| = {chi21:.3e}")]
    NotDirectional { chi21: f64 },

    /// Operation requires a specific perturbation matrix form.
    #[error("wrong perturbation matrix: {0}")]
    WrongPerturbation(String),

    /// Two-mode parameters do not sit at the exceptional point.
    #[error("coupling J deviates from the exceptional-point value by {deviation:.3e}")]
    NotAtEp { deviation: f64 },

    /// Operation is only defined for a given mode count.
    #[error("operation requires {expected} modes, model has {found}")]
    WrongDimension { expected: usize, found: usize },

    /// Multi-tone drive contains two tones at the same detuning.
    #[error("duplicate drive tones at detuning {delta:.6e}")]
    DuplicateTones { delta: f64 },

    /// Ensembles being compared were generated with different configurations.
    #[error("simulation configs do not match: {0}")]
    ConfigMismatch(String),

    /// The minimum-noise bath construction produced a non-PSD intermediate.
    #[error("bath construction failed: {0}")]
    ConstructionFailed(String),

    /// A rate parameter is outside its allowed range.
    #[error("invalid rate: {0}")]
    InvalidRate(String),

    /// The exceptional-point condition is queried outside its stability range.
    #[error("no stable exceptional point: total damping {total_damping:.3e} is not positive")]
    UnstableEp { total_damping: f64 },

    /// Integration step exceeds the resolution bound for this model.
    #[error("time step {dt:.3e} too large (must be at most {max_dt:.3e})")]
    StepTooLarge { dt: f64, max_dt: f64 },

    /// A model file or value failed schema-level validation.
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
