use num_complex::Complex64;

use super::{
    bs_unitary, occupations, squeeze_unitary, TruncatedFockState, DEFAULT_BASIS_CAP,
    TRUNCATION_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::gaussian::{fringe_visibility, uniform_phase_grid, ModeLabel, FRINGE_SCAN_POINTS};
use crate::params::ExperimentParams;
use ModeLabel::*;

/// Input mode order of the oracle state vector.
pub const FOCK_MODES: [ModeLabel; 5] = [BS, BI, F, V3Aux, CS];
// what each slot of FOCK_MODES has become at the output
const OUTPUT_MODES: [ModeLabel; 5] = [S1, V3, I2, W3, S2];
const IDLER_DETECTOR: [ModeLabel; 2] = [V3, W3];

/// Largest gain accepted by [`low_gain_amplitudes`].
pub const LOW_GAIN_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub basis_cap: usize,
    pub truncation_tolerance: f64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            basis_cap: DEFAULT_BASIS_CAP,
            truncation_tolerance: TRUNCATION_TOLERANCE,
        }
    }
}

/// Expectation values of the truncated simulation. Correlation entries are
/// `None` when a mode involved carries no photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub cutoff: usize,
    pub n_s1: f64,
    pub n_s2: f64,
    pub n_i2: f64,
    pub n_i3: f64,
    pub g13: Option<f64>,
    pub g23: Option<f64>,
    pub g12: Option<f64>,
    pub visibility: Option<f64>,
    pub norm_deficit: f64,
}

impl OracleReport {
    pub fn is_vacuum(&self) -> bool {
        self.n_s1 == 0.0 && self.n_s2 == 0.0 && self.n_i3 == 0.0
    }
}

fn run_chain(
    params: &ExperimentParams,
    cutoff: usize,
    limits: &OracleLimits,
) -> Result<TruncatedFockState> {
    let p = params.validate()?;
    let (bs, bi, f, aux, cs) = (0, 1, 2, 3, 4);
    let mut state = TruncatedFockState::vacuum_capped(&FOCK_MODES, cutoff, limits.basis_cap)?;
    let (ks, ki) = (p.k_s * p.crystal_length, p.k_i * p.crystal_length);

    state.apply_two_mode(&squeeze_unitary(p.gain, p.phi_p1, cutoff)?, (bs, bi))?;
    state.apply_phase(bs, ks + p.phi_s1)?;
    state.apply_phase(bi, ki + p.phi_i1)?;
    state.apply_two_mode(&bs_unitary(p.t(), cutoff)?, (bi, f))?;
    state.apply_two_mode(&bs_unitary(p.gamma(), cutoff)?, (bi, aux))?;
    state.apply_two_mode(&squeeze_unitary(p.gain, p.phi_p2, cutoff)?, (cs, bi))?;
    state.apply_phase(cs, ks + p.phi_s2)?;
    state.apply_phase(bi, ki + p.phi_i3)?;
    state.apply_phase(aux, p.phi_i3)?;

    let deficit = state.norm_deficit();
    if deficit > limits.truncation_tolerance {
        return Err(Error::Truncation {
            deficit,
            tolerance: limits.truncation_tolerance,
        });
    }
    state.relabel(&OUTPUT_MODES)
}

fn defined(value: Result<f64>) -> Result<Option<f64>> {
    match value {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroPhoton(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs the whole chain on a truncated Fock space with default limits.
pub fn simulate(params: &ExperimentParams, cutoff: usize) -> Result<OracleReport> {
    simulate_with(params, cutoff, &OracleLimits::default())
}

pub fn simulate_with(
    params: &ExperimentParams,
    cutoff: usize,
    limits: &OracleLimits,
) -> Result<OracleReport> {
    let state = run_chain(params, cutoff, limits)?;
    let n_s1 = state.mean_photon(S1)?;
    let n_s2 = state.mean_photon(S2)?;
    let visibility = if n_s1 + n_s2 > 0.0 {
        let scan = state.fringe_scan(S1, S2, &uniform_phase_grid(FRINGE_SCAN_POINTS))?;
        Some(fringe_visibility(&scan)?)
    } else {
        None
    };
    Ok(OracleReport {
        cutoff,
        n_s1,
        n_s2,
        n_i2: state.mean_photon(I2)?,
        n_i3: state.mean_photon(V3)? + state.mean_photon(W3)?,
        g13: defined(state.g2_detector(S1, &IDLER_DETECTOR))?,
        g23: defined(state.g2_detector(S2, &IDLER_DETECTOR))?,
        g12: defined(state.g1(S1, S2))?,
        visibility,
        norm_deficit: state.norm_deficit(),
    })
}

/// Single-pair content of the low-gain output state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowGainReport {
    /// Normalized idler amplitudes `(i2, v3, w3)` accompanying a photon in `s1`.
    pub branch_ratios: [f64; 3],
    /// The same ratios for an ideal pair source: `(r, tγ, t√(1−γ²))`.
    pub expected_ratios: [f64; 3],
    /// `|⟨ψ1|ψ2⟩|` between the idler states heralded by `s1` and by `s2`.
    pub overlap: f64,
    /// `√(1 − overlap²)`.
    pub distinguishability: f64,
    pub vacuum_weight: f64,
    pub single_pair_weight: f64,
    pub double_pair_weight: f64,
    pub norm_deficit: f64,
}

/// Extracts the one-pair sector of the output state and compares it with
/// the ideal two-branch superposition.
pub fn low_gain_amplitudes(params: &ExperimentParams, cutoff: usize) -> Result<LowGainReport> {
    let p = params.validate()?;
    if p.gain > LOW_GAIN_LIMIT {
        return Err(Error::Regime(format!(
            "gain {} above low-gain limit {LOW_GAIN_LIMIT}",
            p.gain
        )));
    }
    if p.gain == 0.0 {
        return Err(Error::ZeroGain);
    }
    let state = run_chain(&p, cutoff, &OracleLimits::default())?;
    let norm = state.norm_sqr();

    // slots in output order: S1, V3, I2, W3, S2
    let idler_slots = [2, 1, 3];
    let heralded = |signal: usize| -> Result<Vec<Complex64>> {
        idler_slots
            .iter()
            .map(|&slot| {
                let mut occ = [0; 5];
                occ[signal] = 1;
                occ[slot] = 1;
                state.amplitude(&occ)
            })
            .collect()
    };
    let psi1 = normalize(heralded(0)?)?;
    let psi2 = normalize(heralded(4)?)?;
    let overlap = psi1
        .iter()
        .zip(&psi2)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm()
        .min(1.0);

    let mut weights = [0.0; 5];
    for (index, amp) in state.amplitudes().iter().enumerate() {
        let total: usize = occupations(index, cutoff, 5).iter().sum();
        if total < weights.len() {
            weights[total] += amp.norm_sqr() / norm;
        }
    }

    let (t, g) = (p.t_mag, p.gamma_mag);
    Ok(LowGainReport {
        branch_ratios: [psi1[0].norm(), psi1[1].norm(), psi1[2].norm()],
        expected_ratios: [
            (1.0 - t * t).max(0.0).sqrt(),
            t * g,
            t * (1.0 - g * g).max(0.0).sqrt(),
        ],
        overlap,
        distinguishability: (1.0 - overlap * overlap).max(0.0).sqrt(),
        vacuum_weight: weights[0],
        single_pair_weight: weights[2],
        double_pair_weight: weights[4],
        norm_deficit: state.norm_deficit(),
    })
}

fn normalize(v: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroPhoton("empty single-pair branch".into()));
    }
    Ok(v.into_iter().map(|a| a / norm).collect())
}
