//! Zero-mean Gaussian states tracked through their second moments.
//!
//! A state over `k` modes is fully described by
//! `N_ij = <a_i† a_j>` and `M_ij = <a_i a_j>`. Linear bosonic maps
//! `a -> A a + B a†` (squeezers, beamsplitters, phase shifts) act on these
//! moments in closed form, and Wick factorization gives every fourth-order
//! correlator needed for `g2`.

mod setup;

pub use setup::{
    build_setup, observe, SetupObservables, FRINGE_SCAN_POINTS, IDLER_DETECTOR, SETUP_MODES,
};

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::closed_form::bogoliubov_uv;
use crate::error::{Error, Result};

/// Tolerance for the Bogoliubov conditions of a constructed map.
pub const MAP_TOLERANCE: f64 = 1e-12;
/// Tolerance for Hermiticity and positivity of a moment state.
pub const STATE_TOLERANCE: f64 = 1e-10;

type CMatrix = DMatrix<Complex64>;

/// Logical name of a tracked mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    /// Signal input of the first crystal.
    BS,
    /// Idler input of the first crystal.
    BI,
    /// Signal input of the second crystal.
    CS,
    /// Vacuum ancilla of the loss element.
    F,
    /// Vacuum ancilla of the idler overlap mixing.
    V3Aux,
    S1,
    S2,
    /// Idler reflected out by the loss element.
    I2,
    /// Idler mode shared with the second crystal.
    V3,
    /// Idler mode orthogonal to `V3`.
    W3,
}

impl ModeLabel {
    pub fn name(&self) -> &'static str {
        match self {
            ModeLabel::BS => "b_s",
            ModeLabel::BI => "b_i",
            ModeLabel::CS => "c_s",
            ModeLabel::F => "f",
            ModeLabel::V3Aux => "v3_aux",
            ModeLabel::S1 => "s1",
            ModeLabel::S2 => "s2",
            ModeLabel::I2 => "i2",
            ModeLabel::V3 => "v3",
            ModeLabel::W3 => "w3",
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bogoliubov transformation `a_out = A a_in + B a_in†`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBosonicMap {
    a_coeff: CMatrix,
    b_coeff: CMatrix,
}

impl LinearBosonicMap {
    /// Builds a map, rejecting coefficients that violate the Bogoliubov
    /// conditions `A A† - B B† = I` and `A Bᵀ = B Aᵀ`.
    pub fn new(a_coeff: CMatrix, b_coeff: CMatrix) -> Result<Self> {
        let k = a_coeff.nrows();
        for m in [&a_coeff, &b_coeff] {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: m.ncols().max(m.nrows()),
                });
            }
        }
        let map = Self { a_coeff, b_coeff };
        let residual = map.bogoliubov_residual();
        if residual > MAP_TOLERANCE {
            return Err(Error::Domain(format!(
                "coefficients violate the Bogoliubov conditions (residual {residual:.3e})"
            )));
        }
        Ok(map)
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            a_coeff: CMatrix::identity(modes, modes),
            b_coeff: CMatrix::zeros(modes, modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.a_coeff.nrows()
    }

    pub fn a_coeff(&self) -> &CMatrix {
        &self.a_coeff
    }

    pub fn b_coeff(&self) -> &CMatrix {
        &self.b_coeff
    }

    /// Largest entrywise violation of the two Bogoliubov conditions.
    pub fn bogoliubov_residual(&self) -> f64 {
        let (a, b) = (&self.a_coeff, &self.b_coeff);
        let k = a.nrows();
        let ccr = a * a.adjoint() - b * b.adjoint() - CMatrix::identity(k, k);
        let sym = a * b.transpose() - b * a.transpose();
        max_abs(&ccr).max(max_abs(&sym))
    }

    /// The map that applies `self` first and then `next`.
    pub fn then(&self, next: &LinearBosonicMap) -> Result<Self> {
        if next.modes() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                found: next.modes(),
            });
        }
        let (a1, b1) = (&self.a_coeff, &self.b_coeff);
        let (a2, b2) = (&next.a_coeff, &next.b_coeff);
        Ok(Self {
            a_coeff: a2 * a1 + b2 * b1.conjugate(),
            b_coeff: a2 * b1 + b2 * a1.conjugate(),
        })
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_pair(pair: (usize, usize), total_modes: usize) -> Result<()> {
    let (p, q) = pair;
    if p == q {
        return Err(Error::Domain(format!(
            "mode pair ({p}, {q}) must be distinct"
        )));
    }
    let worst = p.max(q);
    if worst >= total_modes {
        return Err(Error::DimensionMismatch {
            expected: total_modes,
            found: worst + 1,
        });
    }
    Ok(())
}

/// Two-mode parametric amplifier on `(signal, idler)`:
///
/// ```text
/// a_s = U_s b_s + V_s e^{iφ_p} b_i†
/// a_i = U_i b_i + V_i e^{iφ_p} b_s†
/// ```
///
/// with `U = cosh G e^{ikL}` and `V = -i sinh G e^{ikL}`, embedded in the
/// identity on all other modes.
pub fn squeezer_map(
    mode_pair: (usize, usize),
    gain: f64,
    pump_phase: f64,
    k_s: f64,
    k_i: f64,
    length: f64,
    total_modes: usize,
) -> Result<LinearBosonicMap> {
    check_pair(mode_pair, total_modes)?;
    if !(gain >= 0.0) {
        return Err(Error::Range {
            field: "gain",
            value: gain,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let (s, i) = mode_pair;
    let (u_s, v_s) = bogoliubov_uv(gain, k_s, length);
    let (u_i, v_i) = bogoliubov_uv(gain, k_i, length);
    let pump = Complex64::from_polar(1.0, pump_phase);

    let mut map = LinearBosonicMap::identity(total_modes);
    map.a_coeff[(s, s)] = u_s;
    map.a_coeff[(i, i)] = u_i;
    map.b_coeff[(s, i)] = v_s * pump;
    map.b_coeff[(i, s)] = v_i * pump;
    Ok(map)
}

/// Passive two-port with amplitude transmission `t` on `(first, second)`:
/// `A = [[t, r], [-r*, t*]]` with `r = sqrt(1 - |t|^2)`.
pub fn beamsplitter_map(
    mode_pair: (usize, usize),
    amplitude: Complex64,
    total_modes: usize,
) -> Result<LinearBosonicMap> {
    check_pair(mode_pair, total_modes)?;
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
    let (p, q) = mode_pair;
    let mut map = LinearBosonicMap::identity(total_modes);
    map.a_coeff[(p, p)] = amplitude;
    map.a_coeff[(p, q)] = r;
    map.a_coeff[(q, p)] = -r.conj();
    map.a_coeff[(q, q)] = amplitude.conj();
    Ok(map)
}

/// Propagation phase `a -> e^{iφ} a` on a single mode.
pub fn phase_map(mode: usize, phi: f64, total_modes: usize) -> Result<LinearBosonicMap> {
    if mode >= total_modes {
        return Err(Error::DimensionMismatch {
            expected: total_modes,
            found: mode + 1,
        });
    }
    let mut map = LinearBosonicMap::identity(total_modes);
    map.a_coeff[(mode, mode)] = Complex64::from_polar(1.0, phi);
    Ok(map)
}

/// Second moments of a zero-mean Gaussian multimode state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    modes: Vec<ModeLabel>,
    /// `<a_i† a_j>`
    n_corr: CMatrix,
    /// `<a_i a_j>`
    m_corr: CMatrix,
}

/// Multimode vacuum.
pub fn vacuum(modes: &[ModeLabel]) -> Result<MomentState> {
    check_unique(modes)?;
    let k = modes.len();
    Ok(MomentState {
        modes: modes.to_vec(),
        n_corr: CMatrix::zeros(k, k),
        m_corr: CMatrix::zeros(k, k),
    })
}

fn check_unique(modes: &[ModeLabel]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::Domain(format!("duplicate mode label {m}")));
        }
    }
    Ok(())
}

impl MomentState {
    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn n_corr(&self) -> &CMatrix {
        &self.n_corr
    }

    pub fn m_corr(&self) -> &CMatrix {
        &self.m_corr
    }

    pub fn index_of(&self, mode: ModeLabel) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .ok_or_else(|| Error::UnknownMode(mode.to_string()))
    }

    /// Applies `a -> A a + B a†` to the moments.
    ///
    /// Substituting the map and normal ordering with `[a_k, a_l†] = δ_kl`:
    ///
    /// ```text
    /// N' = A* N Aᵀ + A* M* Bᵀ + B* M Aᵀ + B* (I + Nᵀ) Bᵀ
    /// M' = A M Aᵀ + A (I + Nᵀ) Bᵀ + B N Aᵀ + B M* Bᵀ
    /// ```
    pub fn apply(&self, map: &LinearBosonicMap) -> Result<MomentState> {
        let k = self.modes.len();
        if map.modes() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: map.modes(),
            });
        }
        let a = &map.a_coeff;
        let b = &map.b_coeff;
        let a_conj = a.conjugate();
        let b_conj = b.conjugate();
        let a_t = a.transpose();
        let b_t = b.transpose();
        let m_conj = self.m_corr.conjugate();
        let anti = CMatrix::identity(k, k) + self.n_corr.transpose();

        let n_new = &a_conj * &self.n_corr * &a_t
            + &a_conj * &m_conj * &b_t
            + &b_conj * &self.m_corr * &a_t
            + &b_conj * &anti * &b_t;
        let m_new = a * &self.m_corr * &a_t
            + a * &anti * &b_t
            + b * &self.n_corr * &a_t
            + b * &m_conj * &b_t;

        Ok(MomentState {
            modes: self.modes.clone(),
            n_corr: n_new,
            m_corr: m_new,
        })
    }

    /// Renames the modes in place, keeping the moment matrices.
    pub fn relabel(mut self, modes: &[ModeLabel]) -> Result<MomentState> {
        if modes.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                found: modes.len(),
            });
        }
        check_unique(modes)?;
        self.modes = modes.to_vec();
        Ok(self)
    }

    pub fn mean_photon(&self, mode: ModeLabel) -> Result<f64> {
        let i = self.index_of(mode)?;
        Ok(self.n_corr[(i, i)].re)
    }

    pub fn total_photons(&self) -> f64 {
        self.n_corr.diagonal().iter().map(|z| z.re).sum()
    }

    /// `<a_m† a_n>`
    pub fn normal_corr(&self, m: ModeLabel, n: ModeLabel) -> Result<Complex64> {
        Ok(self.n_corr[(self.index_of(m)?, self.index_of(n)?)])
    }

    /// `<a_m a_n>`
    pub fn anomalous_corr(&self, m: ModeLabel, n: ModeLabel) -> Result<Complex64> {
        Ok(self.m_corr[(self.index_of(m)?, self.index_of(n)?)])
    }

    fn occupied(&self, mode: ModeLabel) -> Result<f64> {
        let n = self.mean_photon(mode)?;
        if n > 0.0 {
            Ok(n)
        } else {
            Err(Error::ZeroPhoton(mode.to_string()))
        }
    }

    /// Normalized intensity correlation between two modes. By Wick's theorem
    /// `<a_m† a_n† a_n a_m> = N_m N_n + |N_mn|^2 + |M_mn|^2`.
    pub fn g2(&self, m: ModeLabel, n: ModeLabel) -> Result<f64> {
        self.g2_detector(m, &[n])
    }

    /// `g2` between mode `m` and a detector that registers every mode in
    /// `detector` without resolving them.
    pub fn g2_detector(&self, m: ModeLabel, detector: &[ModeLabel]) -> Result<f64> {
        let n_m = self.occupied(m)?;
        let mut n_det = 0.0;
        let mut connected = 0.0;
        for &k in detector {
            n_det += self.mean_photon(k)?;
            connected += self.normal_corr(m, k)?.norm_sqr() + self.anomalous_corr(m, k)?.norm_sqr();
        }
        if !(n_det > 0.0) {
            let names: Vec<_> = detector.iter().map(ModeLabel::name).collect();
            return Err(Error::ZeroPhoton(names.join("+")));
        }
        Ok(1.0 + connected / (n_m * n_det))
    }

    /// `|<a_m† a_n>| / sqrt(N_m N_n)`
    pub fn g1(&self, m: ModeLabel, n: ModeLabel) -> Result<f64> {
        let n_m = self.occupied(m)?;
        let n_n = self.occupied(n)?;
        Ok(self.normal_corr(m, n)?.norm() / (n_m * n_n).sqrt())
    }

    /// Mean photon number of `a_m + e^{iφ} a_n` for each phase in the grid.
    pub fn fringe_scan(
        &self,
        m: ModeLabel,
        n: ModeLabel,
        phases: &[f64],
    ) -> Result<Vec<(f64, f64)>> {
        let n_m = self.mean_photon(m)?;
        let n_n = self.mean_photon(n)?;
        let cross = self.normal_corr(m, n)?;
        Ok(phases
            .iter()
            .map(|&phi| {
                let rotated = Complex64::from_polar(1.0, phi) * cross;
                (phi, n_m + n_n + 2.0 * rotated.re)
            })
            .collect())
    }

    /// Block matrix `[[Nᵀ + I, M], [M†, N]]`, the Gram matrix of
    /// `(a, a†)`; positive semidefinite for every physical state.
    pub fn covariance_blocks(&self) -> CMatrix {
        let k = self.modes.len();
        let mut big = CMatrix::zeros(2 * k, 2 * k);
        big.view_mut((0, 0), (k, k))
            .copy_from(&(self.n_corr.transpose() + CMatrix::identity(k, k)));
        big.view_mut((0, k), (k, k)).copy_from(&self.m_corr);
        big.view_mut((k, 0), (k, k))
            .copy_from(&self.m_corr.adjoint());
        big.view_mut((k, k), (k, k)).copy_from(&self.n_corr);
        big
    }

    /// Checks Hermiticity/positivity of `N`, symmetry of `M` and positivity
    /// of [`MomentState::covariance_blocks`], each to [`STATE_TOLERANCE`]
    /// relative to the scale of the moments.
    pub fn check_physical(&self) -> Result<()> {
        let scale = 1.0 + max_abs(&self.n_corr).max(max_abs(&self.m_corr));
        let tol = STATE_TOLERANCE * scale;
        let herm = max_abs(&(&self.n_corr - self.n_corr.adjoint()));
        let sym = max_abs(&(&self.m_corr - self.m_corr.transpose()));
        if herm > tol || sym > tol {
            return Err(Error::Domain(format!(
                "moment matrices lost their symmetry (hermiticity {herm:.2e}, symmetry {sym:.2e})"
            )));
        }
        let hermitian_part = (&self.n_corr + self.n_corr.adjoint()).scale(0.5);
        let min_n = min_eigenvalue(hermitian_part);
        let big = self.covariance_blocks();
        let min_big = min_eigenvalue((&big + big.adjoint()).scale(0.5));
        if min_n < -tol || min_big < -tol {
            return Err(Error::Domain(format!(
                "unphysical moments (min eigenvalues {min_n:.2e}, {min_big:.2e})"
            )));
        }
        Ok(())
    }
}

fn min_eigenvalue(hermitian: CMatrix) -> f64 {
    hermitian
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `n` equally spaced phases on `[0, 2π)`; contains `0` and `π` when `n` is even.
pub fn uniform_phase_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| std::f64::consts::TAU * k as f64 / n as f64)
        .collect()
}

/// `(max - min) / (max + min)` over a fringe scan.
pub fn fringe_visibility(scan: &[(f64, f64)]) -> Result<f64> {
    let (lo, hi) = scan
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, n)| {
            (lo.min(n), hi.max(n))
        });
    if scan.is_empty() || !(hi + lo > 0.0) {
        return Err(Error::ZeroPhoton("fringe scan".into()));
    }
    Ok((hi - lo) / (hi + lo))
}
