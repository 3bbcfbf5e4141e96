//! Command-line front end: load a model (preset or JSON file), run one
//! analysis, and write deterministic CSV or JSON.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure
//! (instability or a singular solve), 4 I/O failure. Numeric output is
//! formatted with 17 significant digits so identical runs are byte-identical;
//! every rate column is in units of kappa and carries a `_per_kappa` header
//! suffix.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::catalog;
use crate::dynamics::{self, SimConfig};
use crate::error::Error;
use crate::fisher::{self, ToneSet};
use crate::metrics;
use crate::model::{ModelJson, SensorModel};
use crate::response;

/// Performance analysis of linear coupled-mode sensors.
#[derive(Debug, Parser)]
#[command(name = "nhsense", version, about)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the metrics report of a model at one drive setting.
    Metrics(MetricsArgs),
    /// Sweep signal power, measurement rate and bounds over drive detuning.
    Sweep(SweepArgs),
    /// Scan the output intensity over drive detuning.
    Spectrum(SpectrumArgs),
    /// Construct the minimum-noise bath realization of a model's dynamics.
    BathOpt(BathOptArgs),
    /// Quantum Fisher information, single- and multi-tone.
    Qfi(QfiArgs),
    /// Monte Carlo simulation of the integrated homodyne record.
    Simulate(SimulateArgs),
    /// List the built-in presets.
    CatalogList,
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Name of a built-in preset (see `catalog-list`).
    #[arg(long, conflicts_with = "model")]
    pub preset: Option<String>,
    /// Path to a model JSON file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Override the mode-mode coupling J of a two-mode preset (units of kappa).
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format for record-style results.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Perturbation strength (units of kappa).
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Integration time (units of 1/kappa).
    #[arg(long, default_value_t = 100.0)]
    pub tau: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Detuning grid `min:max:count` (units of kappa).
    #[arg(long, default_value = "-2:2:401", allow_hyphen_values = true)]
    pub delta: String,
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tau: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Detuning grid `min:max:count` (units of kappa).
    #[arg(long, default_value = "-10:14:2001", allow_hyphen_values = true)]
    pub delta: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BathOptArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Drive detuning the noise is minimized at (default: the model's).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct QfiArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, default_value_t = 100.0)]
    pub tau: f64,
    /// Extra drive tones `delta:beta,delta:beta,...` for the multi-tone value
    /// (the model's own tone is used when omitted).
    #[arg(long, allow_hyphen_values = true)]
    pub tones: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 50.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 2000)]
    pub n_traj: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Settling time before the window opens (default: 20 decay times).
    #[arg(long)]
    pub t_settle: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::Unstable { .. }
            | Error::SingularMatrix { .. }
            | Error::StepTooLarge { .. }
            | Error::ConstructionFailed(_)
            | Error::ZeroResponse => CliError::Numerical(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

/// 17-significant-digit lowercase scientific formatting; the same bits always
/// print the same bytes.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Validation(format!(
            "grid '{text}' must be min:max:count"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Validation(format!("bad grid start '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Validation(format!("bad grid end '{}'", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Validation(format!("bad grid count '{}'", parts[2])))?;
    if n < 2 || hi <= lo {
        return Err(CliError::Validation(format!("grid '{text}' must ascend with count >= 2")));
    }
    Ok(response::linspace(lo, hi, n))
}

fn load_model(source: &ModelSource) -> Result<SensorModel, CliError> {
    match (&source.preset, &source.model) {
        (Some(name), None) => Ok(catalog::preset_with_coupling(name, source.j)?),
        (None, Some(path)) => {
            if source.j.is_some() {
                return Err(CliError::Validation(
                    "--J only applies to presets; edit the model file instead".into(),
                ));
            }
            let text = std::fs::read_to_string(path)?;
            let json: ModelJson = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("model file parse error: {e}")))?;
            Ok(SensorModel::from_json(&json)?)
        }
        _ => Err(CliError::Validation("exactly one of --preset or --model is required".into())),
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Serialize)]
struct MetricsRecord {
    nbar_tot: f64,
    signal_power: f64,
    s_epsilon: f64,
    noise_psd_per_kappa: f64,
    noise_psd_min_per_kappa: f64,
    gamma_meas_per_kappa: f64,
    gamma_opt_per_kappa: f64,
    reciprocal: bool,
    has_reflection_gain: bool,
    bounds_per_kappa: std::collections::BTreeMap<String, f64>,
}

fn run_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let model = load_model(&args.source)?;
    let kappa = model.kappa();
    let report = metrics::metrics_report(&model, args.epsilon * kappa, args.tau / kappa)?;
    let record = MetricsRecord {
        nbar_tot: report.nbar_tot,
        signal_power: report.signal_power,
        s_epsilon: report.s_epsilon,
        noise_psd_per_kappa: report.noise_psd / kappa,
        noise_psd_min_per_kappa: report.noise_psd_min / kappa,
        gamma_meas_per_kappa: report.gamma_meas / kappa,
        gamma_opt_per_kappa: report.gamma_opt / kappa,
        reciprocal: report.reciprocal,
        has_reflection_gain: report.has_reflection_gain,
        bounds_per_kappa: report
            .bounds
            .iter()
            .map(|(k, v)| {
                let scaled = if k.starts_with("rate") { v / kappa } else { *v };
                (k.to_string(), scaled)
            })
            .collect(),
    };
    let content = if args.out.format == "json" {
        to_pretty_json(&record)?
    } else {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "nbar_tot,signal_power,s_epsilon,noise_psd_per_kappa,noise_psd_min_per_kappa,gamma_meas_per_kappa,gamma_opt_per_kappa"
        );
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_g17(record.nbar_tot),
            fmt_g17(record.signal_power),
            fmt_g17(record.s_epsilon),
            fmt_g17(record.noise_psd_per_kappa),
            fmt_g17(record.noise_psd_min_per_kappa),
            fmt_g17(record.gamma_meas_per_kappa),
            fmt_g17(record.gamma_opt_per_kappa),
        );
        s
    };
    write_output(args.out.output.as_deref(), &content)
}

fn run_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let model = load_model(&args.source)?;
    let kappa = model.kappa();
    let grid = parse_grid(&args.delta)?;
    let epsilon = args.epsilon * kappa;
    let tau = args.tau / kappa;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "Delta_per_kappa,S,S_bound_recip,Gamma_meas_per_kappa,Gamma_opt_per_kappa,recip_rate_bound_per_kappa"
    );
    for &d in &grid {
        // fixed measurement resource: the drive is renormalized at every
        // detuning so the circulating photon number stays at one
        let at = model.at_detuning(d * kappa);
        let at = at.with_beta(at.beta_for_unit_photon_number()?)?;
        let chi = response::susceptibility(&at, 0.0, at.delta(), 0.0)?.chi;
        let nbar = metrics::photon_number(&at)?;
        let signal = metrics::signal_power(&at, epsilon, tau)?;
        // the reciprocal-sensor ceilings, emitted for every model as reference
        let s_bound = 0.25 * metrics::s_epsilon(epsilon, tau, nbar) * chi[(0, 0)].norm_sqr();
        let rate_bound = 16.0 * kappa * nbar;
        let gamma_meas = metrics::measurement_rate(&at, false)?;
        let gamma_opt = metrics::optimal_rate(&at)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_g17(d),
            fmt_g17(signal),
            fmt_g17(s_bound),
            fmt_g17(gamma_meas / kappa),
            fmt_g17(gamma_opt / kappa),
            fmt_g17(rate_bound / kappa),
        );
    }
    write_output(args.out.output.as_deref(), &s)
}

fn run_spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let model = load_model(&args.source)?;
    let kappa = model.kappa();
    let grid = parse_grid(&args.delta)?;
    let grid_phys: Vec<f64> = grid.iter().map(|d| d * kappa).collect();
    let spectrum = response::intensity_spectrum(&model, &grid_phys, args.epsilon * kappa)?;
    let mut s = String::new();
    let _ = writeln!(s, "Delta_per_kappa,P");
    for (d, p) in grid.iter().zip(&spectrum.intensities) {
        let _ = writeln!(s, "{},{}", fmt_g17(*d), fmt_g17(*p));
    }
    write_output(args.out.output.as_deref(), &s)
}

#[derive(Serialize)]
struct BathOptRecord {
    y: Vec<Vec<[f64; 2]>>,
    z: Vec<Vec<[f64; 2]>>,
    achieved_noise_per_kappa: f64,
    target_min_noise_per_kappa: f64,
    residual: f64,
}

fn run_bath_opt(args: &BathOptArgs) -> Result<(), CliError> {
    let model = load_model(&args.source)?;
    let kappa = model.kappa();
    let delta = args.delta.map(|d| d * kappa).unwrap_or(model.delta());
    let (_, realization) = crate::bathopt::construct_min_noise(
        &model.htilde(0.0),
        kappa,
        delta,
        model.perturbation().clone(),
    )?;
    let to_nested = |m: &crate::cmatrix::CMat| -> Vec<Vec<[f64; 2]>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect()
    };
    let record = BathOptRecord {
        y: to_nested(&realization.y),
        z: to_nested(&realization.z),
        achieved_noise_per_kappa: realization.achieved_noise / kappa,
        target_min_noise_per_kappa: realization.target_min_noise / kappa,
        residual: realization.residual,
    };
    write_output(args.out.output.as_deref(), &to_pretty_json(&record)?)
}

#[derive(Serialize)]
struct QfiRecord {
    tau_per_kappa: f64,
    qfi_single: f64,
    qfi_multitone: f64,
    tones: Vec<QfiTone>,
}

#[derive(Serialize)]
struct QfiTone {
    delta_per_kappa: f64,
    beta: f64,
    nbar: f64,
    gamma_per_kappa: f64,
    gamma_opt_per_kappa: f64,
}

fn parse_tones(text: &str, kappa: f64) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|pair| {
            let mut it = pair.split(':');
            let (Some(d), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(CliError::Validation(format!("tone '{pair}' must be delta:beta")));
            };
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("bad tone detuning '{d}'")))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("bad tone amplitude '{b}'")))?;
            Ok((d * kappa, b * kappa.sqrt()))
        })
        .collect()
}

fn run_qfi(args: &QfiArgs) -> Result<(), CliError> {
    let model = load_model(&args.source)?;
    let kappa = model.kappa();
    let tau = args.tau / kappa;
    let tone_list = match &args.tones {
        Some(text) => parse_tones(text, kappa)?,
        None => vec![(model.delta(), model.beta())],
    };
    let tones = ToneSet::new(tone_list)?;
    let single = fisher::qfi_single(&model, tau)?;
    let multi = fisher::qfi_multitone(&model, &tones, tau)?;
    let mut tone_records = Vec::new();
    for (&(d, b), nbar) in tones.tones().iter().zip(tones.photon_numbers(&model)?) {
        let (gamma, gamma_opt) = fisher::per_tone_rate(&model, d)?;
        tone_records.push(QfiTone {
            delta_per_kappa: d / kappa,
            beta: b,
            nbar,
            gamma_per_kappa: gamma / kappa,
            gamma_opt_per_kappa: gamma_opt / kappa,
        });
    }
    let record = QfiRecord {
        tau_per_kappa: args.tau,
        qfi_single: single,
        qfi_multitone: multi,
        tones: tone_records,
    };
    write_output(args.out.output.as_deref(), &to_pretty_json(&record)?)
}

#[derive(Serialize)]
struct SimulateSidecar {
    epsilon_per_kappa: f64,
    config: SimConfig,
    homodyne_phase: f64,
    model_source: String,
}

fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let model = load_model(&args.source)?;
    let kappa = model.kappa();
    let epsilon = args.epsilon * kappa;
    let mut config = SimConfig::for_model(&model, args.dt / kappa, args.tau / kappa, args.n_traj, args.seed)?;
    if let Some(t_settle) = args.t_settle {
        config.t_settle = t_settle / kappa;
    }
    let ensemble = dynamics::simulate_homodyne(&model, epsilon, &config)?;

    let mut s = String::new();
    let _ = writeln!(s, "traj_index,m_value");
    for (i, m) in ensemble.samples_m.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i, fmt_g17(*m));
    }
    write_output(args.out.output.as_deref(), &s)?;

    // config echo rides along as a JSON sidecar when writing to a file
    if let Some(path) = &args.out.output {
        let sidecar = SimulateSidecar {
            epsilon_per_kappa: args.epsilon,
            config,
            homodyne_phase: response::homodyne_phase(&model).unwrap_or(0.0),
            model_source: args
                .source
                .preset
                .clone()
                .unwrap_or_else(|| args.source.model.as_ref().unwrap().display().to_string()),
        };
        let mut meta_path = path.clone();
        let mut name = meta_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        name.push_str(".meta.json");
        meta_path.set_file_name(name);
        std::fs::write(meta_path, to_pretty_json(&sidecar)?)?;
    }
    Ok(())
}

fn run_catalog_list() -> Result<(), CliError> {
    let mut s = String::new();
    for name in catalog::PRESET_NAMES {
        let _ = writeln!(s, "{name}: {}", catalog::preset_description(name));
    }
    write_output(None, &s)
}

/// Execute one parsed command. The binary wraps this with exit-code mapping.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    init_thread_pool();
    match &config.command {
        Command::Metrics(args) => run_metrics(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Spectrum(args) => run_spectrum(args),
        Command::BathOpt(args) => run_bath_opt(args),
        Command::Qfi(args) => run_qfi(args),
        Command::Simulate(args) => run_simulate(args),
        Command::CatalogList => run_catalog_list(),
    }
}

/// Honor `NHSENSE_THREADS` (0 or unset: automatic).
fn init_thread_pool() {
    if let Ok(value) = std::env::var("NHSENSE_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_format_is_lowercase_scientific() {
        assert_eq!(fmt_g17(0.125), "1.2500000000000000e-1");
        assert_eq!(fmt_g17(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_g17(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-2:2:5").unwrap();
        assert_eq!(g, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(parse_grid("2:-2:5").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn tone_parsing() {
        let tones = parse_tones("0:1, 0.5:0.25", 1.0).unwrap();
        assert_eq!(tones, vec![(0.0, 1.0), (0.5, 0.25)]);
        assert!(parse_tones("0", 1.0).is_err());
    }

    #[test]
    fn missing_model_file_is_io_error() {
        let source = ModelSource {
            preset: None,
            model: Some(PathBuf::from("/definitely/not/here.json")),
            j: None,
        };
        let err = load_model(&source).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn unknown_preset_is_validation_error() {
        let source = ModelSource { preset: Some("nope".into()), model: None, j: None };
        let err = load_model(&source).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
