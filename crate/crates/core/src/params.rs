//! Physical and detection parameters of the two-crystal interferometer.
//!
//! Both parameter records are plain values. Every consumer calls
//! [`ExperimentParams::validate`] / [`DetectionParams::validate`] on entry,
//! which returns a canonical copy (phases wrapped into `[0, 2π)`) or a
//! [`Error::Range`] naming the offending field.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Interferometer parameters. Both crystals share one parametric gain.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    /// Parametric gain `G = σL` of each crystal.
    pub gain: f64,
    /// Amplitude transmission `|t|` of the idler loss element.
    pub t_mag: f64,
    pub t_phase: f64,
    /// Spatio-temporal overlap `|γ|` between the idler modes of the two crystals.
    pub gamma_mag: f64,
    pub gamma_phase: f64,
    pub phi_p1: f64,
    pub phi_p2: f64,
    pub phi_s1: f64,
    pub phi_s2: f64,
    pub phi_i1: f64,
    pub phi_i3: f64,
    /// Signal wavenumber (rad/m); only enters the `U`, `V` phase factors.
    pub k_s: f64,
    pub k_i: f64,
    /// Crystal length `L` (m).
    pub crystal_length: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            gain: 0.0,
            t_mag: 1.0,
            t_phase: 0.0,
            gamma_mag: 1.0,
            gamma_phase: 0.0,
            phi_p1: 0.0,
            phi_p2: 0.0,
            phi_s1: 0.0,
            phi_s2: 0.0,
            phi_i1: 0.0,
            phi_i3: 0.0,
            k_s: 0.0,
            k_i: 0.0,
            crystal_length: 20e-3,
        }
    }
}

impl ExperimentParams {
    /// Phase-free parameters with the given gain, transmission and overlap.
    pub fn new(gain: f64, t_mag: f64, gamma_mag: f64) -> Self {
        Self {
            gain,
            t_mag,
            gamma_mag,
            ..Self::default()
        }
    }

    /// Same as [`ExperimentParams::new`] but parameterized by the mean photon
    /// number per mode `|V|^2 = sinh^2 G`.
    pub fn from_v2(v2: f64, t_mag: f64, gamma_mag: f64) -> Self {
        Self::new(gain_for_v2(v2), t_mag, gamma_mag)
    }

    /// Mean photon number per mode, `|V|^2 = sinh^2 G`.
    pub fn v2(&self) -> f64 {
        let s = self.gain.sinh();
        s * s
    }

    /// `|U|^2 = cosh^2 G`.
    pub fn u2(&self) -> f64 {
        let c = self.gain.cosh();
        c * c
    }

    pub fn t(&self) -> Complex64 {
        Complex64::from_polar(self.t_mag, self.t_phase)
    }

    pub fn gamma(&self) -> Complex64 {
        Complex64::from_polar(self.gamma_mag, self.gamma_phase)
    }

    pub fn validate(&self) -> Result<Self> {
        check_finite("gain", self.gain)?;
        check_range("gain", self.gain, 0.0, f64::INFINITY)?;
        check_range("t_mag", self.t_mag, 0.0, 1.0)?;
        check_range("gamma_mag", self.gamma_mag, 0.0, 1.0)?;
        for (field, value) in [
            ("t_phase", self.t_phase),
            ("gamma_phase", self.gamma_phase),
            ("phi_p1", self.phi_p1),
            ("phi_p2", self.phi_p2),
            ("phi_s1", self.phi_s1),
            ("phi_s2", self.phi_s2),
            ("phi_i1", self.phi_i1),
            ("phi_i3", self.phi_i3),
            ("k_s", self.k_s),
            ("k_i", self.k_i),
        ] {
            check_finite(field, value)?;
        }
        check_range("crystal_length", self.crystal_length, 0.0, f64::INFINITY)?;

        Ok(Self {
            t_phase: wrap_phase(self.t_phase),
            gamma_phase: wrap_phase(self.gamma_phase),
            phi_p1: wrap_phase(self.phi_p1),
            phi_p2: wrap_phase(self.phi_p2),
            phi_s1: wrap_phase(self.phi_s1),
            phi_s2: wrap_phase(self.phi_s2),
            phi_i1: wrap_phase(self.phi_i1),
            phi_i3: wrap_phase(self.phi_i3),
            ..*self
        })
    }
}

/// Coincidence gate behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Each signal detection opens one gate; at most one coincidence per gate.
    #[default]
    Triggered,
    /// Every idler event inside an open gate counts.
    FreeRunning,
}

/// Detection and counting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionParams {
    /// Coincidence window `T_R` (s).
    pub t_window: f64,
    /// Signal-idler coherence time `T_c` (s).
    pub t_coherence: f64,
    /// Target singles rate of the signal detector (Hz).
    pub rate_signal: f64,
    /// Target singles rate of the idler detector (Hz).
    pub rate_idler: f64,
    /// Counting time per trial (s).
    pub integration_time: f64,
    pub eta_signal: f64,
    pub eta_idler: f64,
    pub rng_seed: u64,
    /// Uncorrelated background rate on the signal detector (Hz).
    pub dark_rate_signal: f64,
    pub dark_rate_idler: f64,
    /// RMS arrival jitter of an idler relative to its partner; `T_c` when unset.
    pub jitter_rms: Option<f64>,
    pub gate_mode: GateMode,
    /// Largest relative error accepted by the `Γ` estimator.
    pub max_relative_error: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            t_window: 2.5e-9,
            t_coherence: 580e-15,
            rate_signal: 2000.0,
            rate_idler: 2000.0,
            integration_time: 30.0,
            eta_signal: 1.0,
            eta_idler: 1.0,
            rng_seed: 0,
            dark_rate_signal: 0.0,
            dark_rate_idler: 0.0,
            jitter_rms: None,
            gate_mode: GateMode::Triggered,
            max_relative_error: 0.5,
        }
    }
}

impl DetectionParams {
    pub fn jitter(&self) -> f64 {
        self.jitter_rms.unwrap_or(self.t_coherence)
    }

    pub fn validate(&self) -> Result<Self> {
        check_range("t_window", self.t_window, f64::MIN_POSITIVE, f64::INFINITY)?;
        check_range(
            "t_coherence",
            self.t_coherence,
            f64::MIN_POSITIVE,
            f64::INFINITY,
        )?;
        if self.t_coherence >= self.t_window {
            return Err(Error::Range {
                field: "t_coherence",
                value: self.t_coherence,
                min: 0.0,
                max: self.t_window,
            });
        }
        check_range("rate_signal", self.rate_signal, 0.0, f64::INFINITY)?;
        check_range("rate_idler", self.rate_idler, 0.0, f64::INFINITY)?;
        check_range(
            "integration_time",
            self.integration_time,
            f64::MIN_POSITIVE,
            f64::INFINITY,
        )?;
        check_range("eta_signal", self.eta_signal, 0.0, 1.0)?;
        check_range("eta_idler", self.eta_idler, 0.0, 1.0)?;
        check_range(
            "dark_rate_signal",
            self.dark_rate_signal,
            0.0,
            f64::INFINITY,
        )?;
        check_range("dark_rate_idler", self.dark_rate_idler, 0.0, f64::INFINITY)?;
        if let Some(j) = self.jitter_rms {
            check_range("jitter_rms", j, 0.0, f64::INFINITY)?;
        }
        check_range(
            "max_relative_error",
            self.max_relative_error,
            f64::MIN_POSITIVE,
            f64::INFINITY,
        )?;
        Ok(*self)
    }
}

/// Gain that produces a mean photon number `v2` per mode.
pub fn gain_for_v2(v2: f64) -> f64 {
    v2.sqrt().asinh()
}

/// Reduces a phase into `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn check_finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Range {
            field,
            value,
            min: f64::NEG_INFINITY,
            max: f64::INFINITY,
        })
    }
}

fn check_range(field: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    // NaN fails both comparisons and lands here too
    if value >= min && value <= max {
        Ok(())
    } else {
        Err(Error::Range {
            field,
            value,
            min,
            max,
        })
    }
}
