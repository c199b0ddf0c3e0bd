use std::fmt;
use std::path::Path;

use clap::Args;
use induco_core::params::gain_for_v2;
use induco_core::{DetectionParams, ExperimentParams, GateMode};
use serde::Deserialize;

/// Problem with the configuration file or flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Contents of a config file: `[experiment]` and `[detection]` tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentParams,
    pub detection: DetectionParams,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }
}

/// Per-field flags that override values from the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub gain: Option<f64>,
    /// Sets the gain from the mean photon number per mode.
    #[arg(long)]
    pub v2: Option<f64>,
    #[arg(long = "t_mag")]
    pub t_mag: Option<f64>,
    #[arg(long = "t_phase")]
    pub t_phase: Option<f64>,
    #[arg(long = "gamma_mag")]
    pub gamma_mag: Option<f64>,
    #[arg(long = "gamma_phase")]
    pub gamma_phase: Option<f64>,
    #[arg(long = "phi_p1")]
    pub phi_p1: Option<f64>,
    #[arg(long = "phi_p2")]
    pub phi_p2: Option<f64>,
    #[arg(long = "phi_s1")]
    pub phi_s1: Option<f64>,
    #[arg(long = "phi_s2")]
    pub phi_s2: Option<f64>,
    #[arg(long = "phi_i1")]
    pub phi_i1: Option<f64>,
    #[arg(long = "phi_i3")]
    pub phi_i3: Option<f64>,
    #[arg(long = "k_s")]
    pub k_s: Option<f64>,
    #[arg(long = "k_i")]
    pub k_i: Option<f64>,
    #[arg(long = "crystal_length")]
    pub crystal_length: Option<f64>,
    #[arg(long = "t_window")]
    pub t_window: Option<f64>,
    #[arg(long = "t_coherence")]
    pub t_coherence: Option<f64>,
    #[arg(long = "rate_signal")]
    pub rate_signal: Option<f64>,
    #[arg(long = "rate_idler")]
    pub rate_idler: Option<f64>,
    #[arg(long = "integration_time")]
    pub integration_time: Option<f64>,
    #[arg(long = "eta_signal")]
    pub eta_signal: Option<f64>,
    #[arg(long = "eta_idler")]
    pub eta_idler: Option<f64>,
    #[arg(long = "dark_rate_signal")]
    pub dark_rate_signal: Option<f64>,
    #[arg(long = "dark_rate_idler")]
    pub dark_rate_idler: Option<f64>,
    #[arg(long = "jitter_rms")]
    pub jitter_rms: Option<f64>,
    #[arg(long = "max_relative_error")]
    pub max_relative_error: Option<f64>,
    /// `triggered` or `free_running`.
    #[arg(long = "gate_mode")]
    pub gate_mode: Option<String>,
}

macro_rules! override_fields {
    ($src:expr, $dst:expr, [$($field:ident),*]) => {
        $(if let Some(v) = $src.$field {
            $dst.$field = v;
        })*
    };
}

impl Overrides {
    pub fn apply(&self, config: &mut Config) -> Result<(), ConfigError> {
        let exp = &mut config.experiment;
        override_fields!(
            self,
            exp,
            [
                gain,
                t_mag,
                t_phase,
                gamma_mag,
                gamma_phase,
                phi_p1,
                phi_p2,
                phi_s1,
                phi_s2,
                phi_i1,
                phi_i3,
                k_s,
                k_i,
                crystal_length
            ]
        );
        if let Some(v2) = self.v2 {
            if !(v2 >= 0.0) {
                return Err(ConfigError(format!("v2 must be non-negative, got {v2}")));
            }
            exp.gain = gain_for_v2(v2);
        }
        let det = &mut config.detection;
        override_fields!(
            self,
            det,
            [
                t_window,
                t_coherence,
                rate_signal,
                rate_idler,
                integration_time,
                eta_signal,
                eta_idler,
                dark_rate_signal,
                dark_rate_idler,
                max_relative_error
            ]
        );
        if let Some(j) = self.jitter_rms {
            det.jitter_rms = Some(j);
        }
        if let Some(mode) = &self.gate_mode {
            det.gate_mode = match mode.as_str() {
                "triggered" => GateMode::Triggered,
                "free_running" => GateMode::FreeRunning,
                other => return Err(ConfigError(format!("unknown gate_mode `{other}`"))),
            };
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_defaults() {
        let c = Config::parse(
            "[experiment]\nt_mag = 0.5\ngain = 0.1\n\n[detection]\nrng_seed = 7\ngate_mode = \"free_running\"\n",
        )
        .unwrap();
        assert_eq!(c.experiment.t_mag, 0.5);
        assert_eq!(c.experiment.gamma_mag, 1.0);
        assert_eq!(c.detection.rng_seed, 7);
        assert_eq!(c.detection.gate_mode, GateMode::FreeRunning);
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(Config::parse("[experiment]\nt_magg = 0.5\n").is_err());
        assert!(Config::parse("[detector]\nrng_seed = 1\n").is_err());
        assert!(Config::parse("gain = 1.0\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut c = Config::parse("[experiment]\nt_mag = 0.5\n").unwrap();
        let o = Overrides {
            t_mag: Some(0.25),
            v2: Some(0.01),
            gate_mode: Some("triggered".into()),
            ..Overrides::default()
        };
        o.apply(&mut c).unwrap();
        assert_eq!(c.experiment.t_mag, 0.25);
        assert!((c.experiment.v2() - 0.01).abs() < 1e-15);
        let bad = Overrides {
            gate_mode: Some("sometimes".into()),
            ..Overrides::default()
        };
        assert!(bad.apply(&mut c).is_err());
    }
}
