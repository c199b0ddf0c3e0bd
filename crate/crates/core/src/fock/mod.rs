//! Truncated Fock-space simulation of the interferometer.
//!
//! Every element is a unitary on a per-mode photon-number cutoff `d`;
//! expectation values are computed directly from the state vector.

mod setup;

pub use setup::{
    low_gain_amplitudes, simulate, simulate_with, LowGainReport, OracleLimits, OracleReport,
    FOCK_MODES, LOW_GAIN_LIMIT,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::ModeLabel;

type CMatrix = DMatrix<Complex64>;

/// Smallest supported per-mode cutoff.
pub const MIN_CUTOFF: usize = 4;
/// Default cap on the number of basis states `d^k`.
pub const DEFAULT_BASIS_CAP: usize = 100_000;
/// Default bound on the truncation error proxy.
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;
/// Bound on `‖O†O − I‖_max` restricted to states with at most `d − 2` photons.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Dense operator on `modes` modes, each truncated at `cutoff` levels.
/// Basis index is `Σ n_m d^(k-1-m)`, so mode 0 is most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    cutoff: usize,
    modes: usize,
    matrix: CMatrix,
}

impl TruncatedOperator {
    pub fn new(cutoff: usize, modes: usize, matrix: CMatrix) -> Result<Self> {
        let dim = cutoff.pow(modes as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            cutoff,
            modes,
            matrix,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            ..self.clone()
        }
    }

    /// `max |(O†O − I)_ij|` over basis states `i, j` with total photon
    /// number at most `d − 2`.
    pub fn unitarity_residual(&self) -> f64 {
        let safe: Vec<usize> = (0..self.matrix.nrows())
            .filter(|&i| {
                occupations(i, self.cutoff, self.modes)
                    .iter()
                    .sum::<usize>()
                    + 2
                    <= self.cutoff
            })
            .collect();
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for &i in &safe {
            for &j in &safe {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - delta).norm());
            }
        }
        worst
    }
}

fn occupations(mut index: usize, cutoff: usize, modes: usize) -> Vec<usize> {
    let mut occ = vec![0; modes];
    for slot in occ.iter_mut().rev() {
        *slot = index % cutoff;
        index /= cutoff;
    }
    occ
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::Range {
            field: "cutoff",
            value: cutoff as f64,
            min: MIN_CUTOFF as f64,
            max: f64::INFINITY,
        });
    }
    Ok(())
}

/// Single-mode `(lower, raise)` with `lower|n⟩ = √n |n−1⟩`.
pub fn ladder_ops(cutoff: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    check_cutoff(cutoff)?;
    let mut lower = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        lower[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let lower = TruncatedOperator::new(cutoff, 1, lower)?;
    let raise = lower.adjoint();
    Ok((lower, raise))
}

/// Two-mode squeezer `exp(κ a†b† − κ* ab)` with `κ = −i e^{iφ} G`, so that
/// `S†aS = cosh G a − i e^{iφ} sinh G b†`.
///
/// Fails with a truncation error if the squeezed vacuum leaves more than
/// [`TRUNCATION_TOLERANCE`] of its population on the top level.
pub fn squeeze_unitary(gain: f64, pump_phase: f64, cutoff: usize) -> Result<TruncatedOperator> {
    check_cutoff(cutoff)?;
    if !(gain >= 0.0) {
        return Err(Error::Range {
            field: "gain",
            value: gain,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let (a, _) = ladder_ops(cutoff)?;
    let id = CMatrix::identity(cutoff, cutoff);
    let a1 = a.matrix().kronecker(&id);
    let a2 = id.kronecker(a.matrix());
    let pair = &a1 * &a2;
    let kappa = Complex64::new(0.0, -1.0) * Complex64::from_polar(gain, pump_phase);
    let generator = pair.adjoint() * kappa - pair * kappa.conj();
    let op = TruncatedOperator::new(cutoff, 2, generator.exp())?;

    let mut state = TruncatedFockState::vacuum(&[ModeLabel::BS, ModeLabel::BI], cutoff)?;
    state.apply_two_mode(&op, (0, 1))?;
    let deficit = state.norm_deficit();
    if deficit > TRUNCATION_TOLERANCE {
        return Err(Error::Truncation {
            deficit,
            tolerance: TRUNCATION_TOLERANCE,
        });
    }
    Ok(op)
}

/// Number-conserving two-mode unitary realizing the mode map
/// `A = [[t, r], [−r*, t*]]` of [`crate::gaussian::beamsplitter_map`].
/// Components that would exceed the cutoff are dropped.
pub fn bs_unitary(amplitude: Complex64, cutoff: usize) -> Result<TruncatedOperator> {
    check_cutoff(cutoff)?;
    let t_mag = amplitude.norm();
    if !(t_mag <= 1.0 + 1e-15) {
        return Err(Error::Range {
            field: "amplitude",
            value: t_mag,
            min: 0.0,
            max: 1.0,
        });
    }
    let r = Complex64::new((1.0 - t_mag * t_mag).max(0.0).sqrt(), 0.0);
    // columns of A: where a_1† and a_2† are sent
    let col1 = [amplitude, -r.conj()];
    let col2 = [r, amplitude.conj()];

    let d = cutoff;
    let mut u = CMatrix::zeros(d * d, d * d);
    for n1 in 0..d {
        for n2 in 0..d {
            // polynomial in (x, y) = (a_1†, a_2†): coefficients indexed [x_power][y_power]
            let mut poly = vec![vec![Complex64::new(0.0, 0.0); n1 + n2 + 1]; n1 + n2 + 1];
            poly[0][0] = Complex64::new(1.0, 0.0);
            for col in std::iter::repeat(col1)
                .take(n1)
                .chain(std::iter::repeat(col2).take(n2))
            {
                let mut next = vec![vec![Complex64::new(0.0, 0.0); n1 + n2 + 1]; n1 + n2 + 1];
                for (i, row) in poly.iter().enumerate() {
                    for (j, &c) in row.iter().enumerate() {
                        if c.norm() == 0.0 {
                            continue;
                        }
                        if i < n1 + n2 {
                            next[i + 1][j] += c * col[0];
                        }
                        if j < n1 + n2 {
                            next[i][j + 1] += c * col[1];
                        }
                    }
                }
                poly = next;
            }
            let norm_in = (factorial(n1) * factorial(n2)).sqrt();
            for (i, row) in poly.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    if i < d && j < d && c.norm() != 0.0 {
                        let norm_out = (factorial(i) * factorial(j)).sqrt();
                        u[(i * d + j, n1 * d + n2)] = c * norm_out / norm_in;
                    }
                }
            }
        }
    }
    TruncatedOperator::new(cutoff, 2, u)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Multimode state vector in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedFockState {
    cutoff: usize,
    modes: Vec<ModeLabel>,
    amplitudes: Vec<Complex64>,
}

impl TruncatedFockState {
    pub fn vacuum(modes: &[ModeLabel], cutoff: usize) -> Result<Self> {
        Self::vacuum_capped(modes, cutoff, DEFAULT_BASIS_CAP)
    }

    pub fn vacuum_capped(modes: &[ModeLabel], cutoff: usize, basis_cap: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        let basis = (cutoff as u128).pow(modes.len() as u32);
        if basis > basis_cap as u128 {
            return Err(Error::Resource {
                basis: basis.min(usize::MAX as u128) as usize,
                cap: basis_cap,
            });
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::UnknownMode(format!("duplicate mode {m}")));
            }
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis as usize];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            cutoff,
            modes: modes.to_vec(),
            amplitudes,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn relabel(mut self, modes: &[ModeLabel]) -> Result<Self> {
        if modes.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                found: modes.len(),
            });
        }
        self.modes = modes.to_vec();
        Ok(self)
    }

    pub fn index_of(&self, mode: ModeLabel) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .ok_or_else(|| Error::UnknownMode(mode.to_string()))
    }

    fn stride(&self, slot: usize) -> usize {
        self.cutoff.pow((self.modes.len() - 1 - slot) as u32)
    }

    /// Amplitude of the basis state with the given occupations.
    pub fn amplitude(&self, occupation: &[usize]) -> Result<Complex64> {
        if occupation.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                found: occupation.len(),
            });
        }
        if occupation.iter().any(|&n| n >= self.cutoff) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let index = occupation
            .iter()
            .enumerate()
            .map(|(slot, &n)| n * self.stride(slot))
            .sum::<usize>();
        Ok(self.amplitudes[index])
    }

    /// Applies a two-mode operator to the slots `(first, second)`.
    pub fn apply_two_mode(&mut self, op: &TruncatedOperator, slots: (usize, usize)) -> Result<()> {
        let k = self.modes.len();
        let (p, q) = slots;
        if op.modes() != 2 || op.cutoff() != self.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff * self.cutoff,
                found: op.matrix().nrows(),
            });
        }
        if p == q || p >= k || q >= k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: p.max(q) + 1,
            });
        }
        let d = self.cutoff;
        let (sp, sq) = (self.stride(p), self.stride(q));
        let matrix = op.matrix();
        let mut local = vec![Complex64::new(0.0, 0.0); d * d];
        for base in 0..self.amplitudes.len() {
            if (base / sp) % d != 0 || (base / sq) % d != 0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    local[i * d + j] = self.amplitudes[base + i * sp + j * sq];
                }
            }
            for i in 0..d {
                for j in 0..d {
                    let row = i * d + j;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (col, &c) in local.iter().enumerate() {
                        acc += matrix[(row, col)] * c;
                    }
                    self.amplitudes[base + i * sp + j * sq] = acc;
                }
            }
        }
        Ok(())
    }

    /// `|n⟩ → e^{iθn}|n⟩` on one slot, i.e. `a → e^{iθ} a`.
    pub fn apply_phase(&mut self, slot: usize, theta: f64) -> Result<()> {
        if slot >= self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                found: slot + 1,
            });
        }
        let (d, s) = (self.cutoff, self.stride(slot));
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            let n = (index / s) % d;
            if n != 0 {
                *amp *= Complex64::from_polar(1.0, theta * n as f64);
            }
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Truncation error proxy: norm lost so far plus the population of basis
    /// states with any mode on its top level.
    pub fn norm_deficit(&self) -> f64 {
        let k = self.modes.len();
        let top = self.cutoff - 1;
        let edge: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| occupations(*i, self.cutoff, k).contains(&top))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        (1.0 - self.norm_sqr()).max(0.0) + edge
    }

    /// `a_m` applied to an arbitrary vector of this state's shape.
    fn lower_vec(&self, slot: usize, psi: &[Complex64]) -> Vec<Complex64> {
        let (d, s) = (self.cutoff, self.stride(slot));
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (index, o) in out.iter_mut().enumerate() {
            let n = (index / s) % d;
            if n + 1 < d {
                *o = psi[index + s] * ((n + 1) as f64).sqrt();
            }
        }
        out
    }

    /// `a_m |ψ⟩`.
    pub fn lowered(&self, mode: ModeLabel) -> Result<Vec<Complex64>> {
        Ok(self.lower_vec(self.index_of(mode)?, &self.amplitudes))
    }

    fn normalized_expectation(&self, value: f64) -> f64 {
        value / self.norm_sqr()
    }

    pub fn mean_photon(&self, mode: ModeLabel) -> Result<f64> {
        let v = self.lowered(mode)?;
        Ok(self.normalized_expectation(norm_sqr(&v)))
    }

    /// `⟨a_m† a_n⟩`.
    pub fn normal_corr(&self, m: ModeLabel, n: ModeLabel) -> Result<Complex64> {
        let am = self.lowered(m)?;
        let an = self.lowered(n)?;
        Ok(inner(&am, &an) / self.norm_sqr())
    }

    /// `⟨a_m† a_n† a_n a_m⟩` for distinct modes.
    pub fn pair_moment(&self, m: ModeLabel, n: ModeLabel) -> Result<f64> {
        if m == n {
            return Err(Error::UnknownMode(format!("{m} paired with itself")));
        }
        let am = self.lowered(m)?;
        let anm = self.lower_vec(self.index_of(n)?, &am);
        Ok(self.normalized_expectation(norm_sqr(&anm)))
    }

    pub fn g2(&self, m: ModeLabel, n: ModeLabel) -> Result<f64> {
        self.g2_detector(m, &[n])
    }

    /// `g2` between mode `m` and a detector that sums the given modes.
    pub fn g2_detector(&self, m: ModeLabel, detector: &[ModeLabel]) -> Result<f64> {
        let nm = self.mean_photon(m)?;
        let mut n_det = 0.0;
        let mut joint = 0.0;
        for &j in detector {
            n_det += self.mean_photon(j)?;
            joint += self.pair_moment(m, j)?;
        }
        if nm == 0.0 || n_det == 0.0 {
            return Err(Error::ZeroPhoton(format!("{m} or detector has no photons")));
        }
        Ok(joint / (nm * n_det))
    }

    pub fn g1(&self, m: ModeLabel, n: ModeLabel) -> Result<f64> {
        let nm = self.mean_photon(m)?;
        let nn = self.mean_photon(n)?;
        if nm == 0.0 || nn == 0.0 {
            return Err(Error::ZeroPhoton(format!("{m} or {n} has no photons")));
        }
        Ok(self.normal_corr(m, n)?.norm() / (nm * nn).sqrt())
    }

    /// Intensity `‖(a_m + e^{iφ} a_n)ψ‖²` at each phase.
    pub fn fringe_scan(
        &self,
        m: ModeLabel,
        n: ModeLabel,
        phases: &[f64],
    ) -> Result<Vec<(f64, f64)>> {
        let am = self.lowered(m)?;
        let an = self.lowered(n)?;
        let norm = self.norm_sqr();
        Ok(phases
            .iter()
            .map(|&phi| {
                let rot = Complex64::from_polar(1.0, phi);
                let intensity: f64 = am
                    .iter()
                    .zip(&an)
                    .map(|(&x, &y)| (x + rot * y).norm_sqr())
                    .sum();
                (phi, intensity / norm)
            })
            .collect())
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests;
