//! JSON run configuration.
//!
//! Every physical quantity carries its unit in the key name (tau_c_ns,
//! j0_mhz); conversion to internal units (ns, rad/ns) happens in exactly one
//! place, here. `master_seed` has no default: a run that did not state its
//! seed is not reproducible and is rejected at load time. Unknown keys are
//! errors, not warnings.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::montecarlo::EnsembleConfig;
use crate::noise::{InitialSignMode, RtnParams};
use crate::protocol::{shulman_protocol, DbMode, Protocol, SweepConfig};

/// Reading of a bare "J0 = x MHz" quote: `Angular` takes x·10⁻³ rad/ns
/// directly, `Over2Pi` takes 2π·x·10⁻³ rad/ns (the J1, J2 reading).
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
pub enum J0Convention {
    #[serde(rename = "angular")]
    Angular,
    #[serde(rename = "over_2pi")]
    Over2Pi,
}

/// Fixed by the calibration run: the angular reading reproduces the
/// observed concurrence ceiling, the 2π reading overdamps it.
impl Default for J0Convention {
    fn default() -> Self {
        J0Convention::Angular
    }
}

pub const MHZ_TO_PER_NS: f64 = 1e-3;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_j0_mhz")]
    pub j0_mhz: f64,
    #[serde(default = "default_tau_c_ns")]
    pub tau_c_ns: f64,
    #[serde(default)]
    pub initial_sign_mode: InitialSignMode,
}

fn default_j0_mhz() -> f64 {
    11.6
}
fn default_tau_c_ns() -> f64 {
    9.0
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            j0_mhz: default_j0_mhz(),
            tau_c_ns: default_tau_c_ns(),
            initial_sign_mode: InitialSignMode::default(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default = "default_tau_prep_ns")]
    pub tau_prep_ns: f64,
    #[serde(default = "default_coupling_ratio")]
    pub coupling_ratio: f64,
    #[serde(default)]
    pub db_mode: DbMode,
    #[serde(default = "default_entangle_duration_ns")]
    pub entangle_duration_ns: f64,
}

fn default_preset() -> String {
    "shulman".into()
}
fn default_tau_prep_ns() -> f64 {
    25.0
}
fn default_coupling_ratio() -> f64 {
    1.0
}
fn default_entangle_duration_ns() -> f64 {
    600.0
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            preset: default_preset(),
            tau_prep_ns: default_tau_prep_ns(),
            coupling_ratio: default_coupling_ratio(),
            db_mode: DbMode::default(),
            entangle_duration_ns: default_entangle_duration_ns(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "default_n_trajectories")]
    pub n_trajectories: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_sample_dt_ns")]
    pub sample_dt_ns: f64,
}

fn default_n_trajectories() -> usize {
    5000
}
fn default_batch_size() -> usize {
    100
}
fn default_sample_dt_ns() -> f64 {
    1.0
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            n_trajectories: default_n_trajectories(),
            batch_size: default_batch_size(),
            sample_dt_ns: default_sample_dt_ns(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    #[serde(default = "default_trace_duration_ns")]
    pub duration_ns: f64,
    #[serde(default = "default_trace_dt_ns")]
    pub dt_ns: f64,
}

fn default_trace_duration_ns() -> f64 {
    600.0
}
fn default_trace_dt_ns() -> f64 {
    0.5
}

impl Default for TraceSection {
    fn default() -> Self {
        TraceSection {
            duration_ns: default_trace_duration_ns(),
            dt_ns: default_trace_dt_ns(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawSelfTest {
    pub c: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "default_spectrum_dt_ns")]
    pub dt_ns: f64,
    #[serde(default = "default_spectrum_duration_ns")]
    pub duration_ns: f64,
    #[serde(default = "default_n_realizations")]
    pub n_realizations: usize,
    #[serde(default = "default_tau_c_values_ns")]
    pub tau_c_values_ns: Vec<f64>,
    /// [f_lo, f_hi] in 1/ns; the power-law fit runs only when given.
    #[serde(default)]
    pub fit_band_per_ns: Option<[f64; 2]>,
    #[serde(default)]
    pub power_law_self_test: Option<PowerLawSelfTest>,
}

fn default_spectrum_dt_ns() -> f64 {
    0.5
}
fn default_spectrum_duration_ns() -> f64 {
    2000.0
}
fn default_n_realizations() -> usize {
    2000
}
fn default_tau_c_values_ns() -> Vec<f64> {
    vec![1.0, 10.0, 30.0]
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            dt_ns: default_spectrum_dt_ns(),
            duration_ns: default_spectrum_duration_ns(),
            n_realizations: default_n_realizations(),
            tau_c_values_ns: default_tau_c_values_ns(),
            fit_band_per_ns: None,
            power_law_self_test: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out_prefix: Option<String>,
    #[serde(default)]
    pub j0_convention: J0Convention,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub trace: TraceSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_json(&text)
    }

    /// Re-check every numeric constraint of the underlying types at load
    /// time, so a bad config fails before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.rtn_params()?;
        self.protocol()?;
        let e = &self.ensemble;
        if e.n_trajectories == 0 || e.batch_size == 0 || !e.n_trajectories.is_multiple_of(e.batch_size) {
            return Err(Error::Config(format!(
                "ensemble: batch_size {} must divide n_trajectories {}",
                e.batch_size, e.n_trajectories
            )));
        }
        if e.sample_dt_ns <= 0.0 {
            return Err(Error::Config("ensemble: sample_dt_ns must be positive".into()));
        }
        if self.trace.duration_ns <= 0.0 || self.trace.dt_ns <= 0.0 {
            return Err(Error::Config(
                "trace: duration_ns and dt_ns must be positive".into(),
            ));
        }
        let s = &self.spectrum;
        if s.dt_ns <= 0.0 || s.n_realizations == 0 || s.tau_c_values_ns.is_empty() {
            return Err(Error::Config(
                "spectrum: dt_ns positive, n_realizations and tau_c_values_ns nonempty".into(),
            ));
        }
        for &tau_c in &s.tau_c_values_ns {
            if tau_c <= 0.0 {
                return Err(Error::Config("spectrum: tau_c_values_ns must be positive".into()));
            }
            if s.duration_ns < 50.0 * tau_c {
                return Err(Error::Config(format!(
                    "spectrum: duration {} ns is under 50 correlation times for tau_c = {} ns",
                    s.duration_ns, tau_c
                )));
            }
        }
        if let Some([lo, hi]) = s.fit_band_per_ns {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::Config(
                    "spectrum: fit_band_per_ns must satisfy 0 < f_lo < f_hi".into(),
                ));
            }
        }
        if let Some(st) = s.power_law_self_test {
            if st.c <= 0.0 {
                return Err(Error::Config("spectrum: self-test amplitude must be positive".into()));
            }
        }
        Ok(())
    }

    /// Noise amplitude in rad/ns under the configured unit reading.
    pub fn j0_rad_per_ns(&self) -> f64 {
        let base = self.noise.j0_mhz * MHZ_TO_PER_NS;
        match self.j0_convention {
            J0Convention::Angular => base,
            J0Convention::Over2Pi => std::f64::consts::TAU * base,
        }
    }

    pub fn rtn_params(&self) -> Result<RtnParams> {
        RtnParams::new(
            self.j0_rad_per_ns(),
            self.noise.tau_c_ns,
            self.noise.initial_sign_mode,
        )
    }

    /// Same noise channel with the correlation time replaced, for the
    /// multi-τc spectrum batch.
    pub fn rtn_params_with_tau(&self, tau_c: f64) -> Result<RtnParams> {
        RtnParams::new(self.j0_rad_per_ns(), tau_c, self.noise.initial_sign_mode)
    }

    pub fn protocol(&self) -> Result<Protocol> {
        match self.protocol.preset.as_str() {
            "shulman" => shulman_protocol(
                self.protocol.tau_prep_ns,
                self.protocol.coupling_ratio,
                self.protocol.db_mode,
                self.protocol.entangle_duration_ns,
            ),
            other => Err(Error::Config(format!("unknown protocol preset '{other}'"))),
        }
    }

    pub fn ensemble_config(&self, sample_grid: Vec<f64>) -> EnsembleConfig {
        EnsembleConfig {
            n_trajectories: self.ensemble.n_trajectories,
            batch_size: self.ensemble.batch_size,
            master_seed: self.master_seed,
            sample_grid,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            n_trajectories: self.ensemble.n_trajectories,
            batch_size: self.ensemble.batch_size,
            master_seed: self.master_seed,
            db_mode: self.protocol.db_mode,
            base_entangle_duration: self.protocol.entangle_duration_ns,
        }
    }
}
