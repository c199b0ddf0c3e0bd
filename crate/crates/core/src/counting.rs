//! Event-level Monte Carlo of the coincidence measurement in the low-gain
//! regime: each pair comes from exactly one crystal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{DetectionParams, ExperimentParams, GateMode};

/// Largest mean photon number per mode the pair picture is used for.
pub const MAX_EVENT_MODEL_V2: f64 = 1e-2;

/// Which signal beam reaches the signal detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalArm {
    S1,
    S2,
}

impl SignalArm {
    pub fn name(&self) -> &'static str {
        match self {
            SignalArm::S1 => "s1",
            SignalArm::S2 => "s2",
        }
    }
}

impl std::str::FromStr for SignalArm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s1" => Ok(SignalArm::S1),
            "s2" => Ok(SignalArm::S2),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    FirstCrystal,
    SecondCrystal,
    Background,
}

/// Detection times of one detector, sorted ascending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventStream {
    times: Vec<f64>,
    origins: Vec<Origin>,
}

impl EventStream {
    fn from_unsorted(mut events: Vec<(f64, Origin)>) -> Self {
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (times, origins) = events.into_iter().unzip();
        Self { times, origins }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn count(&self, origin: Origin) -> usize {
        self.origins.iter().filter(|&&o| o == origin).count()
    }
}

/// Pairs emitted per second by one crystal, `|V|^2 / T_c`.
pub fn pair_rate(params: &ExperimentParams, det: &DetectionParams) -> f64 {
    params.v2() / det.t_coherence
}

/// Chooses detector efficiencies so that the signal singles equal
/// `rate_signal` and the idler singles at `|t| = 1` equal `rate_idler`.
pub fn calibrate_efficiencies(
    params: &ExperimentParams,
    det: &DetectionParams,
) -> Result<DetectionParams> {
    let pairs = pair_rate(params, det);
    if pairs <= 0.0 {
        return Err(Error::ZeroGain);
    }
    let calibrated = DetectionParams {
        eta_signal: (det.rate_signal - det.dark_rate_signal) / pairs,
        eta_idler: (det.rate_idler - det.dark_rate_idler) / (2.0 * pairs),
        ..*det
    };
    calibrated.validate()
}

/// Independent random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .map(|p| p.sample(rng) as u64)
        .unwrap_or(0)
}

/// Draws signal and idler detections for one integration period.
///
/// Detected-pair, signal-only and idler-only events of each crystal are
/// independent thinned Poisson processes. A crystal's signal registers only
/// if its arm is selected; the idler of the first crystal survives the loss
/// element with probability `|t|^2`.
pub fn generate_streams<R: Rng>(
    params: &ExperimentParams,
    det: &DetectionParams,
    arm: SignalArm,
    rng: &mut R,
) -> Result<(EventStream, EventStream)> {
    let p = params.validate()?;
    let det = det.validate()?;
    if p.v2() > MAX_EVENT_MODEL_V2 {
        return Err(Error::Regime(format!(
            "v2 = {} exceeds {MAX_EVENT_MODEL_V2}",
            p.v2()
        )));
    }
    let span = det.integration_time;
    let pairs = pair_rate(&p, &det);
    let jitter =
        Normal::new(0.0, det.jitter()).map_err(|e| Error::Domain(format!("jitter: {e}")))?;

    let crystals = [
        (
            Origin::FirstCrystal,
            arm == SignalArm::S1,
            p.t_mag * p.t_mag * det.eta_idler,
        ),
        (Origin::SecondCrystal, arm == SignalArm::S2, det.eta_idler),
    ];
    let mut signal = Vec::new();
    let mut idler = Vec::new();
    for (origin, selected, eta_i) in crystals {
        let eta_s = if selected { det.eta_signal } else { 0.0 };
        let both = poisson(pairs * eta_s * eta_i * span, rng);
        for _ in 0..both {
            let t = rng.gen::<f64>() * span;
            signal.push((t, origin));
            let ti = t + jitter.sample(rng);
            if (0.0..span).contains(&ti) {
                idler.push((ti, origin));
            }
        }
        for _ in 0..poisson(pairs * eta_s * (1.0 - eta_i) * span, rng) {
            signal.push((rng.gen::<f64>() * span, origin));
        }
        for _ in 0..poisson(pairs * (1.0 - eta_s) * eta_i * span, rng) {
            idler.push((rng.gen::<f64>() * span, origin));
        }
    }
    for _ in 0..poisson(det.dark_rate_signal * span, rng) {
        signal.push((rng.gen::<f64>() * span, Origin::Background));
    }
    for _ in 0..poisson(det.dark_rate_idler * span, rng) {
        idler.push((rng.gen::<f64>() * span, Origin::Background));
    }
    Ok((
        EventStream::from_unsorted(signal),
        EventStream::from_unsorted(idler),
    ))
}

/// Counts coincidences for gates `[t_s + delay, t_s + delay + T_R)` opened
/// by every signal event.
pub fn gated_coincidences(
    signal: &EventStream,
    idler: &EventStream,
    det: &DetectionParams,
    gate_delay: f64,
) -> u64 {
    let idl = idler.times();
    let mut lo = 0;
    let mut count = 0;
    for &ts in signal.times() {
        let open = ts + gate_delay;
        let close = open + det.t_window;
        while lo < idl.len() && idl[lo] < open {
            lo += 1;
        }
        match det.gate_mode {
            GateMode::Triggered => {
                if lo < idl.len() && idl[lo] < close {
                    count += 1;
                }
            }
            GateMode::FreeRunning => {
                count += idl[lo..].iter().take_while(|&&t| t < close).count() as u64;
            }
        }
    }
    count
}

/// Gate delays `-T_R/2 + k T_R` for `k = -half_width ..= half_width`; the
/// central gate is centred on zero lag and the gates tile the axis.
pub fn gate_delays(det: &DetectionParams, half_width: usize) -> Vec<f64> {
    let h = half_width as i64;
    (-h..=h).map(|k| (k as f64 - 0.5) * det.t_window).collect()
}

/// Coincidence counts versus gate delay, pooled over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub gate_delays: Vec<f64>,
    pub counts: Vec<u64>,
    pub signal_counts: u64,
    pub idler_counts: u64,
    /// Total counting time (s).
    pub exposure: f64,
    pub t_window: f64,
}

impl CoincidenceHistogram {
    pub fn rates(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.exposure)
            .collect()
    }

    /// Poisson errors on [`Self::rates`].
    pub fn rate_errors(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| (c as f64).sqrt() / self.exposure)
            .collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| (c as f64).sqrt()).collect()
    }

    pub fn singles_rates(&self) -> (f64, f64) {
        (
            self.signal_counts as f64 / self.exposure,
            self.idler_counts as f64 / self.exposure,
        )
    }

    /// Bin whose gate contains zero lag.
    pub fn peak_index(&self) -> Option<usize> {
        self.gate_delays
            .iter()
            .position(|&d| d <= 0.0 && 0.0 < d + self.t_window)
    }

    /// Peak rate and its Poisson error.
    pub fn peak_rate(&self) -> Result<(f64, f64)> {
        let i = self
            .peak_index()
            .ok_or_else(|| Error::Domain("no gate contains zero delay".into()))?;
        Ok((self.rates()[i], self.rate_errors()[i]))
    }

    /// Mean rate over all bins except the peak, with its Poisson error.
    pub fn floor_rate(&self) -> Result<(f64, f64)> {
        let peak = self.peak_index();
        let (n, total) = self
            .counts
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != peak)
            .fold((0usize, 0u64), |(n, s), (_, &c)| (n + 1, s + c));
        if n == 0 {
            return Err(Error::Domain("no off-peak bins".into()));
        }
        let norm = n as f64 * self.exposure;
        Ok((total as f64 / norm, (total as f64).sqrt() / norm))
    }

    /// Adds another histogram taken on the same gate grid.
    pub fn merge(&mut self, other: &CoincidenceHistogram) -> Result<()> {
        if self.gate_delays != other.gate_delays || self.t_window != other.t_window {
            return Err(Error::DimensionMismatch {
                expected: self.gate_delays.len(),
                found: other.gate_delays.len(),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.signal_counts += other.signal_counts;
        self.idler_counts += other.idler_counts;
        self.exposure += other.exposure;
        Ok(())
    }
}

/// One trial: fresh streams, then a coincidence count per gate delay.
pub fn delay_scan(
    params: &ExperimentParams,
    det: &DetectionParams,
    arm: SignalArm,
    delays: &[f64],
    trial: u64,
) -> Result<CoincidenceHistogram> {
    let mut rng = trial_rng(det.rng_seed, trial);
    let (signal, idler) = generate_streams(params, det, arm, &mut rng)?;
    Ok(CoincidenceHistogram {
        gate_delays: delays.to_vec(),
        counts: delays
            .iter()
            .map(|&d| gated_coincidences(&signal, &idler, det, d))
            .collect(),
        signal_counts: signal.len() as u64,
        idler_counts: idler.len() as u64,
        exposure: det.integration_time,
        t_window: det.t_window,
    })
}

/// Runs `trials` independent delay scans in parallel and pools them.
/// The result depends only on the seed, not on thread scheduling.
pub fn pooled_delay_scan(
    params: &ExperimentParams,
    det: &DetectionParams,
    arm: SignalArm,
    delays: &[f64],
    trials: u64,
) -> Result<CoincidenceHistogram> {
    if trials == 0 {
        return Err(Error::Range {
            field: "trials",
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let scans = (0..trials)
        .into_par_iter()
        .map(|trial| delay_scan(params, det, arm, delays, trial))
        .collect::<Result<Vec<_>>>()?;
    let mut pooled = scans[0].clone();
    for scan in &scans[1..] {
        pooled.merge(scan)?;
    }
    Ok(pooled)
}

/// `Γ` from the peak rate and the measured singles,
/// `(T_R / T_c) (R / (R_m R_n T_R) - 1)`, with its Poisson error.
///
/// Fails when the peak's relative error exceeds `det.max_relative_error`.
pub fn estimate_big_gamma(
    hist: &CoincidenceHistogram,
    det: &DetectionParams,
) -> Result<(f64, f64)> {
    let i = hist
        .peak_index()
        .ok_or_else(|| Error::Domain("no gate contains zero delay".into()))?;
    let coinc = hist.counts[i] as f64;
    let relative_error = if coinc > 0.0 {
        1.0 / coinc.sqrt()
    } else {
        f64::INFINITY
    };
    if relative_error > det.max_relative_error || hist.signal_counts == 0 || hist.idler_counts == 0
    {
        return Err(Error::InsufficientCounts {
            relative_error,
            cap: det.max_relative_error,
        });
    }
    let (rm, rn) = hist.singles_rates();
    let rate = coinc / hist.exposure;
    let scale = det.t_window / det.t_coherence;
    let normalized = rate / (rm * rn * det.t_window);
    let rel =
        (1.0 / coinc + 1.0 / hist.signal_counts as f64 + 1.0 / hist.idler_counts as f64).sqrt();
    Ok((scale * (normalized - 1.0), scale * normalized * rel))
}

/// `D` from estimated `Γ13 ± σ13` and `Γ23 ± σ23` with overlap `|γ|`, with
/// its propagated standard error.
pub fn distinguishability_estimate(
    (g13, s13): (f64, f64),
    (g23, s23): (f64, f64),
    gamma_mag: f64,
) -> Result<(f64, f64)> {
    let d = crate::closed_form::dist_from_g2_overlap(1.0 + g13, 1.0 + g23, gamma_mag)?;
    let x = g13 / g23;
    let sigma_x = (s13 * s13 + x * x * s23 * s23).sqrt() / g23;
    let g2 = gamma_mag * gamma_mag;
    let sigma_d = if d > 0.0 {
        g2 * sigma_x / (2.0 * d)
    } else {
        (g2 * sigma_x).sqrt()
    };
    Ok((d, sigma_d))
}
