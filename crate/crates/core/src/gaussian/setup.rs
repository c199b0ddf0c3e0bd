use super::{
    beamsplitter_map, fringe_visibility, phase_map, squeezer_map, uniform_phase_grid, vacuum,
    ModeLabel, MomentState,
};
use crate::error::Result;
use crate::params::ExperimentParams;

/// Output modes of [`build_setup`], in storage order.
pub const SETUP_MODES: [ModeLabel; 5] = [
    ModeLabel::S1,
    ModeLabel::S2,
    ModeLabel::I2,
    ModeLabel::V3,
    ModeLabel::W3,
];

/// The idler detector collects both idler spatio-temporal modes.
pub const IDLER_DETECTOR: [ModeLabel; 2] = [ModeLabel::V3, ModeLabel::W3];

// Slots of the input modes; slot i ends up as SETUP_MODES[i].
const INPUT_MODES: [ModeLabel; 5] = [
    ModeLabel::BS,
    ModeLabel::CS,
    ModeLabel::F,
    ModeLabel::BI,
    ModeLabel::V3Aux,
];
const SIGNAL_1: usize = 0;
const SIGNAL_2: usize = 1;
const LOSS_PORT: usize = 2;
const IDLER: usize = 3;
const OVERLAP_PORT: usize = 4;

/// Propagates the multimode vacuum through the whole interferometer:
///
/// 1. first crystal squeezes `(b_s, b_i)`, then propagation phases on `i1`, `s1`;
/// 2. loss element mixes the idler with the vacuum ancilla `f` (amplitude `t`);
///    the reflected port becomes `i2`;
/// 3. overlap element mixes the idler with `v3_aux` (amplitude `γ`); the
///    transmitted port is the mode `v3` seen by the second crystal, the other
///    port is the orthogonal mode `w3`;
/// 4. second crystal squeezes `(c_s, v3)`, then phases on `s2` and on the
///    idler path `i3 = {v3, w3}`.
pub fn build_setup(params: &ExperimentParams) -> Result<MomentState> {
    let p = params.validate()?;
    let k = INPUT_MODES.len();
    let chain = [
        squeezer_map(
            (SIGNAL_1, IDLER),
            p.gain,
            p.phi_p1,
            p.k_s,
            p.k_i,
            p.crystal_length,
            k,
        )?,
        phase_map(IDLER, p.phi_i1, k)?,
        phase_map(SIGNAL_1, p.phi_s1, k)?,
        beamsplitter_map((IDLER, LOSS_PORT), p.t(), k)?,
        beamsplitter_map((IDLER, OVERLAP_PORT), p.gamma(), k)?,
        squeezer_map(
            (SIGNAL_2, IDLER),
            p.gain,
            p.phi_p2,
            p.k_s,
            p.k_i,
            p.crystal_length,
            k,
        )?,
        phase_map(SIGNAL_2, p.phi_s2, k)?,
        phase_map(IDLER, p.phi_i3, k)?,
        phase_map(OVERLAP_PORT, p.phi_i3, k)?,
    ];
    let mut state = vacuum(&INPUT_MODES)?;
    for map in &chain {
        state = state.apply(map)?;
    }
    state.relabel(&SETUP_MODES)
}

/// Detected quantities of a built setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupObservables {
    pub n_s1: f64,
    pub n_s2: f64,
    /// Mean photons on the idler detector (`v3` + `w3`).
    pub n_i3: f64,
    pub g13: f64,
    pub g23: f64,
    pub g12: f64,
    /// Visibility of the `s1`/`s2` fringe, from a phase scan.
    pub visibility: f64,
}

/// Number of phases in the fringe scan used by [`observe`].
pub const FRINGE_SCAN_POINTS: usize = 720;

/// Extracts singles, `g2` against the idler detector, `|g1|` and the
/// fringe visibility from a state produced by [`build_setup`].
pub fn observe(state: &MomentState) -> Result<SetupObservables> {
    use ModeLabel::*;
    let n_i3 = IDLER_DETECTOR
        .iter()
        .map(|&m| state.mean_photon(m))
        .sum::<Result<f64>>()?;
    let scan = state.fringe_scan(S1, S2, &uniform_phase_grid(FRINGE_SCAN_POINTS))?;
    Ok(SetupObservables {
        n_s1: state.mean_photon(S1)?,
        n_s2: state.mean_photon(S2)?,
        n_i3,
        g13: state.g2_detector(S1, &IDLER_DETECTOR)?,
        g23: state.g2_detector(S2, &IDLER_DETECTOR)?,
        g12: state.g1(S1, S2)?,
        visibility: fringe_visibility(&scan)?,
    })
}
