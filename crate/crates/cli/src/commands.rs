use std::io::Write;

use anyhow::Result;
use induco_core::closed_form;
use induco_core::counting::{
    calibrate_efficiencies, distinguishability_estimate, estimate_big_gamma, gate_delays,
    pooled_delay_scan, CoincidenceHistogram, SignalArm,
};
use induco_core::gaussian::{
    build_setup, fringe_visibility, uniform_phase_grid, ModeLabel, FRINGE_SCAN_POINTS,
    IDLER_DETECTOR,
};
use induco_core::validation::CheckResult;
use induco_core::{fock, validation, DetectionParams, Error, ExperimentParams};
use rayon::prelude::*;

/// Columns shared by every sweep command.
pub const BASE_COLUMNS: [&str; 13] = [
    "t",
    "v2",
    "gamma",
    "g13",
    "g23",
    "g13_low",
    "g23_low",
    "D_trace",
    "D_from_g2",
    "D_highgain",
    "g12",
    "V_low",
    "residual",
];

/// Rows of formatted cells under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn with_extra(extra: &[&'static str], rows: Vec<Vec<String>>) -> Self {
        let mut header = BASE_COLUMNS.to_vec();
        header.extend_from_slice(extra);
        Self { header, rows }
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits, `NaN` for undefined values.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn or_nan(value: induco_core::Result<f64>) -> induco_core::Result<f64> {
    match value {
        Ok(v) => Ok(v),
        Err(Error::ZeroGain | Error::ZeroPhoton(_) | Error::Domain(_)) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

/// Correlation values measured by one method at one parameter point.
struct Measured {
    g13: f64,
    g23: f64,
    g12: f64,
    residual: f64,
}

fn base_cells(p: &ExperimentParams, m: &Measured) -> induco_core::Result<Vec<String>> {
    let (t, v2, gamma) = (p.t_mag, p.v2(), p.gamma_mag);
    let d_from_g2 = or_nan(closed_form::dist_from_g2_overlap(m.g13, m.g23, gamma))?;
    let residual = if m.residual.is_nan() {
        d_from_g2 * d_from_g2 + m.g12 * m.g12 - 1.0
    } else {
        m.residual
    };
    Ok(vec![
        num(t),
        num(v2),
        num(gamma),
        num(m.g13),
        num(m.g23),
        num(or_nan(closed_form::g13_low(t, v2))?),
        num(or_nan(closed_form::g23_low(t, v2))?),
        num(closed_form::dist_trace(t, gamma)),
        num(d_from_g2),
        num(closed_form::dist_highgain(t, v2)),
        num(m.g12),
        num(closed_form::visibility_low(t, gamma)),
        num(residual),
    ])
}

fn sweep_rows<F>(points: &[ExperimentParams], row: F) -> Result<Vec<Vec<String>>>
where
    F: Fn(&ExperimentParams) -> Result<Vec<String>> + Sync,
{
    points
        .par_iter()
        .map(|p| {
            p.validate()?;
            row(p)
        })
        .collect()
}

pub fn analytic(points: &[ExperimentParams]) -> Result<Table> {
    let rows = sweep_rows(points, |p| {
        let (t, v2) = (p.t_mag, p.v2());
        let m = Measured {
            g13: or_nan(closed_form::g13_full(t, v2))?,
            g23: or_nan(closed_form::g23_full(t, v2))?,
            g12: closed_form::g12_coherence(t, v2),
            residual: closed_form::complementarity_residual(t, v2),
        };
        Ok(base_cells(p, &m)?)
    })?;
    Ok(Table::with_extra(&[], rows))
}

pub fn engine(points: &[ExperimentParams]) -> Result<Table> {
    use ModeLabel::*;
    let rows = sweep_rows(points, |p| {
        let st = build_setup(p)?;
        let n_i3 = st.mean_photon(V3)? + st.mean_photon(W3)?;
        let scan = st.fringe_scan(S1, S2, &uniform_phase_grid(FRINGE_SCAN_POINTS))?;
        let m = Measured {
            g13: or_nan(st.g2_detector(S1, &IDLER_DETECTOR))?,
            g23: or_nan(st.g2_detector(S2, &IDLER_DETECTOR))?,
            g12: or_nan(st.g1(S1, S2))?,
            residual: f64::NAN,
        };
        let mut cells = base_cells(p, &m)?;
        cells.extend([
            num(st.mean_photon(S1)?),
            num(st.mean_photon(S2)?),
            num(n_i3),
            num(or_nan(fringe_visibility(&scan))?),
        ]);
        Ok(cells)
    })?;
    Ok(Table::with_extra(
        &["n_s1", "n_s2", "n_i3", "v_fringe"],
        rows,
    ))
}

pub fn oracle(points: &[ExperimentParams], cutoff: usize) -> Result<Table> {
    let rows = sweep_rows(points, |p| {
        let r = fock::simulate(p, cutoff)?;
        let m = Measured {
            g13: r.g13.unwrap_or(f64::NAN),
            g23: r.g23.unwrap_or(f64::NAN),
            g12: r.g12.unwrap_or(f64::NAN),
            residual: f64::NAN,
        };
        let mut cells = base_cells(p, &m)?;
        cells.extend([
            num(r.n_s1),
            num(r.n_s2),
            num(r.n_i3),
            num(r.visibility.unwrap_or(f64::NAN)),
            num(r.norm_deficit),
        ]);
        Ok(cells)
    })?;
    Ok(Table::with_extra(
        &["n_s1", "n_s2", "n_i3", "v_fringe", "norm_deficit"],
        rows,
    ))
}

/// Settings of the counting simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub detection: DetectionParams,
    pub trials: u64,
    /// Use the configured efficiencies instead of calibrating them to the
    /// target singles rates.
    pub raw_efficiencies: bool,
    pub half_width: usize,
}

pub const MC_COLUMNS: [&str; 9] = [
    "g13_err",
    "g23_err",
    "D_err",
    "r13_peak_hz",
    "r13_peak_err_hz",
    "r23_peak_hz",
    "r23_peak_err_hz",
    "r13_floor_hz",
    "r23_floor_hz",
];

pub const HISTOGRAM_COLUMNS: [&str; 6] = [
    "gate_delay_s",
    "rate_hz",
    "rate_err_hz",
    "arm",
    "t_mag",
    "seed",
];

/// Peak table and the delay histograms behind it.
pub struct McOutput {
    pub table: Table,
    pub histograms: Table,
}

pub fn monte_carlo(points: &[ExperimentParams], settings: &McSettings) -> Result<McOutput> {
    let results = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| mc_point(i, p, settings))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut hist_rows = Vec::new();
    for (row, hists) in results {
        rows.push(row);
        hist_rows.extend(hists);
    }
    Ok(McOutput {
        table: Table::with_extra(&MC_COLUMNS, rows),
        histograms: Table {
            header: HISTOGRAM_COLUMNS.to_vec(),
            rows: hist_rows,
        },
    })
}

fn mc_point(
    index: usize,
    p: &ExperimentParams,
    settings: &McSettings,
) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let p = p.validate()?;
    let det = if settings.raw_efficiencies {
        settings.detection.validate()?
    } else {
        calibrate_efficiencies(&p, &settings.detection)?
    };
    let delays = gate_delays(&det, settings.half_width);
    let base_seed = det.rng_seed.wrapping_add(2 * index as u64);
    let scan = |arm: SignalArm, seed: u64| -> Result<(CoincidenceHistogram, u64)> {
        let d = DetectionParams {
            rng_seed: seed,
            ..det
        };
        Ok((
            pooled_delay_scan(&p, &d, arm, &delays, settings.trials)?,
            seed,
        ))
    };
    let (h13, seed13) = scan(SignalArm::S1, base_seed)?;
    let (h23, seed23) = scan(SignalArm::S2, base_seed.wrapping_add(1))?;

    let e13 = estimate_big_gamma(&h13, &det)?;
    let e23 = estimate_big_gamma(&h23, &det)?;
    let d_err = match distinguishability_estimate(e13, e23, p.gamma_mag) {
        Ok((_, sigma)) => sigma,
        Err(Error::Domain(_)) => f64::NAN,
        Err(e) => return Err(e.into()),
    };
    let m = Measured {
        g13: 1.0 + e13.0,
        g23: 1.0 + e23.0,
        g12: f64::NAN,
        residual: f64::NAN,
    };
    let mut cells = base_cells(&p, &m)?;
    let (pk13, pk13_err) = h13.peak_rate()?;
    let (pk23, pk23_err) = h23.peak_rate()?;
    cells.extend([
        num(e13.1),
        num(e23.1),
        num(d_err),
        num(pk13),
        num(pk13_err),
        num(pk23),
        num(pk23_err),
        num(h13.floor_rate()?.0),
        num(h23.floor_rate()?.0),
    ]);

    let mut hist_rows = Vec::new();
    for (hist, arm, seed) in [(&h13, SignalArm::S1, seed13), (&h23, SignalArm::S2, seed23)] {
        for ((delay, rate), err) in hist
            .gate_delays
            .iter()
            .zip(hist.rates())
            .zip(hist.rate_errors())
        {
            hist_rows.push(vec![
                num(*delay),
                num(rate),
                num(err),
                arm.name().to_string(),
                num(p.t_mag),
                seed.to_string(),
            ]);
        }
    }
    Ok((cells, hist_rows))
}

/// Runs the acceptance checks; `quick` skips the Fock and Monte Carlo ones.
pub fn validate(quick: bool, trials: u64, seed: u64) -> Vec<CheckResult> {
    if quick {
        validation::run_quick()
    } else {
        validation::run_all(trials, seed)
    }
}
