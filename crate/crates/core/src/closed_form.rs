//! Closed-form expressions for the induced-coherence interferometer.
//!
//! Everything here works on magnitudes only: `|t|`, `|γ|` and the mean
//! photon number per mode `v2 = |V|^2 = sinh^2 G` (so `|U|^2 = 1 + v2`).
//! These functions are the reference the Gaussian engine and the Fock
//! oracle are checked against.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Radicands of the distinguishability square roots within this distance of
/// zero are treated as zero. Below it they carry only rounding noise.
pub const RADICAND_TOLERANCE: f64 = 1e-12;

/// Bogoliubov coefficients `(U, V)` of one crystal of gain `G`:
/// `U = cosh G e^{ikL}`, `V = -i sinh G e^{ikL}`.
pub fn bogoliubov_uv(gain: f64, k: f64, length: f64) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, k * length);
    let u = phase * gain.cosh();
    let v = phase * Complex64::new(0.0, -gain.sinh());
    (u, v)
}

/// Mean photon numbers of the detected modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglesRates {
    pub n_s1: f64,
    pub n_s2: f64,
    pub n_i3: f64,
}

pub fn singles_rates(t_mag: f64, v2: f64) -> SinglesRates {
    let t2 = t_mag * t_mag;
    let u2 = 1.0 + v2;
    SinglesRates {
        n_s1: v2,
        n_s2: v2 * (1.0 + t2 * v2),
        n_i3: v2 * (1.0 + t2 * u2),
    }
}

fn require_gain(v2: f64) -> Result<()> {
    if v2 == 0.0 {
        Err(Error::ZeroGain)
    } else if v2 > 0.0 && v2.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "mean photon number {v2} must be positive"
        )))
    }
}

/// `g2` between signal `s1` and idler `i3`, valid at any gain.
pub fn g13_full(t_mag: f64, v2: f64) -> Result<f64> {
    require_gain(v2)?;
    let t2 = t_mag * t_mag;
    let u2 = 1.0 + v2;
    Ok(1.0 + t2 * u2 * u2 / ((1.0 + t2 * u2) * v2))
}

/// `g2` between signal `s2` and idler `i3`, valid at any gain.
pub fn g23_full(t_mag: f64, v2: f64) -> Result<f64> {
    require_gain(v2)?;
    let t2 = t_mag * t_mag;
    let t4 = t2 * t2;
    let u2 = 1.0 + v2;
    let u4 = u2 * u2;
    let u6 = u4 * u2;
    let loss = 1.0 - t2;
    let num = t4 * u6 + 2.0 * t2 * u4 - 2.0 * t4 * u4 + u2 * loss * loss;
    let den = v2 * (1.0 + t2 * v2) * (1.0 + t2 * u2);
    Ok(1.0 + num / den)
}

/// Low-gain form of [`g13_full`] (`|U|^2 ≈ 1`).
pub fn g13_low(t_mag: f64, v2: f64) -> Result<f64> {
    require_gain(v2)?;
    let t2 = t_mag * t_mag;
    Ok(1.0 + t2 / ((1.0 + t2) * v2))
}

/// Low-gain form of [`g23_full`].
pub fn g23_low(t_mag: f64, v2: f64) -> Result<f64> {
    require_gain(v2)?;
    let t2 = t_mag * t_mag;
    Ok(1.0 + 1.0 / ((1.0 + t2) * v2))
}

/// Normalized signal-idler correlations of both crystals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Pair {
    pub g13: f64,
    pub g23: f64,
}

impl G2Pair {
    pub fn full(t_mag: f64, v2: f64) -> Result<Self> {
        Ok(Self {
            g13: g13_full(t_mag, v2)?,
            g23: g23_full(t_mag, v2)?,
        })
    }

    pub fn low(t_mag: f64, v2: f64) -> Result<Self> {
        Ok(Self {
            g13: g13_low(t_mag, v2)?,
            g23: g23_low(t_mag, v2)?,
        })
    }

    /// `Γ = g2 - 1` for both pairs.
    pub fn big_gammas(&self) -> (f64, f64) {
        (self.g13 - 1.0, self.g23 - 1.0)
    }

    pub fn distinguishability(&self) -> Result<f64> {
        dist_from_g2(self.g13, self.g23)
    }

    pub fn distinguishability_with_overlap(&self, gamma_mag: f64) -> Result<f64> {
        dist_from_g2_overlap(self.g13, self.g23, gamma_mag)
    }
}

fn sqrt_radicand(radicand: f64, what: &str) -> Result<f64> {
    if radicand.is_nan() {
        return Err(Error::Domain(format!("{what}: radicand is NaN")));
    }
    if radicand.abs() <= RADICAND_TOLERANCE {
        Ok(0.0)
    } else if radicand < 0.0 {
        Err(Error::Domain(format!(
            "{what}: radicand {radicand:.3e} is negative"
        )))
    } else {
        Ok(radicand.sqrt())
    }
}

/// Which-crystal distinguishability from measured correlations,
/// `sqrt((g23 - g13) / (g23 - 1))`.
pub fn dist_from_g2(g13: f64, g23: f64) -> Result<f64> {
    if g23.is_nan() || g23 <= 1.0 {
        return Err(Error::Domain(format!("g23 = {g23} must exceed 1")));
    }
    sqrt_radicand((g23 - g13) / (g23 - 1.0), "dist_from_g2")
}

/// Distinguishability with an imperfect idler mode overlap `|γ|`,
/// `sqrt(1 - |γ|^2 (g13 - 1) / (g23 - 1))`.
pub fn dist_from_g2_overlap(g13: f64, g23: f64, gamma_mag: f64) -> Result<f64> {
    if g23.is_nan() || g23 <= 1.0 {
        return Err(Error::Domain(format!("g23 = {g23} must exceed 1")));
    }
    let g2 = gamma_mag * gamma_mag;
    sqrt_radicand(1.0 - g2 * (g13 - 1.0) / (g23 - 1.0), "dist_from_g2_overlap")
}

/// Trace distance between the idler states conditioned on the crystal of
/// origin, `sqrt(1 - |γ|^2 |t|^2)`.
pub fn dist_trace(t_mag: f64, gamma_mag: f64) -> f64 {
    let x = gamma_mag * t_mag;
    (1.0 - x * x).max(0.0).sqrt()
}

/// Low-gain fringe visibility `|γ||t|`.
pub fn visibility_low(t_mag: f64, gamma_mag: f64) -> f64 {
    gamma_mag * t_mag
}

/// Distinguishability at arbitrary gain in terms of `|t|` and `|V|^2`.
pub fn dist_highgain(t_mag: f64, v2: f64) -> f64 {
    let t2 = t_mag * t_mag;
    let t4 = t2 * t2;
    let num = 1.0 - t2 + t2 * (1.0 - t2) * v2;
    let den = 1.0 + 2.0 * t2 * v2 + t4 * v2 * v2;
    (num / den).max(0.0).sqrt()
}

/// Degree of first-order coherence between `s1` and `s2` at arbitrary gain.
pub fn g12_coherence(t_mag: f64, v2: f64) -> f64 {
    let t2 = t_mag * t_mag;
    t_mag * ((1.0 + v2) / (1.0 + v2 * t2)).sqrt()
}

/// `D^2 + (g12)^2 - 1`; zero for every input up to rounding.
pub fn complementarity_residual(t_mag: f64, v2: f64) -> f64 {
    let d = dist_highgain(t_mag, v2);
    let g = g12_coherence(t_mag, v2);
    d * d + g * g - 1.0
}

/// Coincidence rate inside a window `T_R` for singles rates `R_m`, `R_n`:
/// `R_m R_n T_R [1 + (T_c / T_R) Γ]`.
pub fn coincidence_rate(
    rate_m: f64,
    rate_n: f64,
    t_window: f64,
    t_coherence: f64,
    big_gamma: f64,
) -> f64 {
    rate_m * rate_n * t_window * (1.0 + t_coherence / t_window * big_gamma)
}

/// Approximate peak ratio `R13(|t|=1) / R13(|t|=0) ≈ T_c / (T_R |V|^2)`,
/// valid when that quantity is much larger than one.
pub fn ratio_r13(t_coherence: f64, t_window: f64, v2: f64) -> f64 {
    t_coherence / (t_window * v2)
}

/// Peak ratio `R23(|t|=1) / R23(|t|=0)`; independent of the transmission.
pub fn ratio_r23() -> f64 {
    1.0
}

/// Inverts [`ratio_r13`] for the mean photon number per mode.
pub fn v2_from_ratio_r13(ratio: f64, t_coherence: f64, t_window: f64) -> f64 {
    t_coherence / (t_window * ratio)
}

/// Fringe visibility of two superposed fields with mean photon numbers `n1`,
/// `n2` and first-order coherence `|g1|`: `sqrt(1 - Δ^2) |g1|`.
pub fn visibility_from_g1(n1: f64, n2: f64, g1_mag: f64) -> Result<f64> {
    if !(n1 >= 0.0 && n2 >= 0.0) || n1 + n2 == 0.0 {
        return Err(Error::Domain(format!(
            "photon numbers ({n1}, {n2}) must be non-negative and not both zero"
        )));
    }
    if !(0.0..=1.0).contains(&g1_mag) {
        return Err(Error::Domain(format!("|g1| = {g1_mag} outside [0, 1]")));
    }
    let delta = energy_imbalance(n1, n2);
    Ok((1.0 - delta * delta).sqrt() * g1_mag)
}

/// `Δ = |n1 - n2| / (n1 + n2)`.
pub fn energy_imbalance(n1: f64, n2: f64) -> f64 {
    (n1 - n2).abs() / (n1 + n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn bogoliubov_coefficients() {
        let (u, v) = bogoliubov_uv(0.0, 3.0, 0.1);
        assert_relative_eq!(u.re, 0.3f64.cos(), epsilon = 1e-15);
        assert_relative_eq!(u.im, 0.3f64.sin(), epsilon = 1e-15);
        assert_eq!(v.norm(), 0.0);

        let (u, v) = bogoliubov_uv(1.0, 0.0, 0.0);
        assert_relative_eq!(u.re, 1.543_080_634_815_243_7, max_relative = 1e-15);
        assert_eq!(u.im, 0.0);
        assert_eq!(v.re, 0.0);
        assert_relative_eq!(v.im, -1.175_201_193_643_801_4, max_relative = 1e-15);

        let (u, v) = bogoliubov_uv(0.7, 1.3e6, 2e-2);
        assert_relative_eq!(u.norm_sqr() - v.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn singles_rate_cases() {
        let r = singles_rates(0.0, 0.2);
        assert_eq!((r.n_s1, r.n_s2, r.n_i3), (0.2, 0.2, 0.2));

        let r = singles_rates(1.0, 0.01);
        assert_relative_eq!(r.n_s1, 0.01);
        assert_relative_eq!(r.n_s2, 0.0101, max_relative = 1e-14);
        assert_relative_eq!(r.n_i3, 0.0201, max_relative = 1e-14);

        let r = singles_rates(0.4, 0.0);
        assert_eq!((r.n_s1, r.n_s2, r.n_i3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn g13_cases() {
        assert_eq!(g13_full(0.0, 0.3).unwrap(), 1.0);
        // 1 + 1.01^2 / (2.01 * 0.01)
        assert_relative_eq!(
            g13_full(1.0, 0.01).unwrap(),
            51.751_243_781_094_53,
            max_relative = 1e-13
        );
        assert_eq!(g13_full(0.5, 0.0), Err(Error::ZeroGain));
        assert!(matches!(g13_full(0.5, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn g23_cases() {
        let v2 = 0.37;
        assert_relative_eq!(
            g23_full(0.0, v2).unwrap(),
            1.0 + (1.0 + v2) / v2,
            max_relative = 1e-14
        );
        for v2 in [1e-4, 0.01, 1.0, 7.5] {
            assert_relative_eq!(
                g23_full(1.0, v2).unwrap(),
                g13_full(1.0, v2).unwrap(),
                max_relative = 1e-14
            );
        }
        assert_eq!(g23_full(0.5, 0.0), Err(Error::ZeroGain));
    }

    #[test]
    fn low_gain_forms() {
        let v2 = 3e-3;
        assert_relative_eq!(g13_low(1.0, v2).unwrap(), 1.0 + 1.0 / (2.0 * v2));
        assert_relative_eq!(g23_low(1.0, v2).unwrap(), 1.0 + 1.0 / (2.0 * v2));
        assert_eq!(g13_low(0.0, v2).unwrap(), 1.0);
        assert_relative_eq!(g23_low(0.0, v2).unwrap(), 1.0 + 1.0 / v2);

        let (t, v2) = (0.5, 1e-4);
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        assert!(rel(g13_low(t, v2).unwrap(), g13_full(t, v2).unwrap()) <= 2e-4);
        assert!(rel(g23_low(t, v2).unwrap(), g23_full(t, v2).unwrap()) <= 2e-4);
    }

    #[test]
    fn dist_from_g2_cases() {
        assert_eq!(dist_from_g2(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(dist_from_g2(1.0, 2.0).unwrap(), 1.0);
        assert_relative_eq!(dist_from_g2(1.5, 2.0).unwrap(), 0.5f64.sqrt());
        assert!(matches!(dist_from_g2(1.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(dist_from_g2(2.5, 2.0), Err(Error::Domain(_))));
        // rounding-level excess of g13 over g23 is not an error
        assert_eq!(dist_from_g2(2.0 + 4e-16, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn dist_from_g2_overlap_cases() {
        for (g13, g23) in [(1.5, 2.0), (3.0, 7.0), (7.0, 7.0)] {
            assert_relative_eq!(
                dist_from_g2_overlap(g13, g23, 1.0).unwrap(),
                dist_from_g2(g13, g23).unwrap(),
                max_relative = 1e-15
            );
        }
        assert_eq!(dist_from_g2_overlap(40.0, 41.0, 0.0).unwrap(), 1.0);

        let v2 = 1e-6;
        let pair = G2Pair::low(1.0, v2).unwrap();
        assert_abs_diff_eq!(
            pair.distinguishability_with_overlap(0.855).unwrap(),
            (1.0f64 - 0.855 * 0.855).sqrt(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            dist_from_g2_overlap(pair.g13, pair.g23, 0.855).unwrap(),
            0.518_627,
            epsilon = 1e-6
        );
        assert!(matches!(
            dist_from_g2_overlap(5.0, 2.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn trace_distance_and_visibility() {
        assert_eq!(dist_trace(1.0, 1.0), 0.0);
        assert_eq!(dist_trace(0.0, 0.4), 1.0);
        assert_abs_diff_eq!(dist_trace(1.0, 0.855), 0.518_627, epsilon = 1e-6);
        assert_eq!(visibility_low(1.0, 1.0), 1.0);
        assert_eq!(visibility_low(1.0, 0.855), 0.855);
        assert_relative_eq!(visibility_low(0.5, 0.855), 0.4275);
    }

    #[test]
    fn high_gain_distinguishability() {
        for v2 in [1e-4, 0.3, 4.0, 50.0] {
            assert_eq!(dist_highgain(1.0, v2), 0.0);
            assert_eq!(dist_highgain(0.0, v2), 1.0);
        }
        assert_relative_eq!(
            dist_highgain(0.6, 1e-12),
            (1.0f64 - 0.36).sqrt(),
            max_relative = 1e-10
        );
        let from_g2 = G2Pair::full(0.5, 1.0)
            .unwrap()
            .distinguishability()
            .unwrap();
        assert_abs_diff_eq!(from_g2, dist_highgain(0.5, 1.0), epsilon = 1e-14);
    }

    #[test]
    fn first_order_coherence() {
        for v2 in [0.0, 0.1, 9.0] {
            assert_relative_eq!(g12_coherence(1.0, v2), 1.0);
        }
        assert_relative_eq!(g12_coherence(0.3, 1e12), 1.0, max_relative = 1e-10);
        assert_relative_eq!(g12_coherence(0.3, 0.0), 0.3);
        assert_relative_eq!(
            g12_coherence(0.5, 1.0),
            0.632_455_532_033_675_9,
            max_relative = 1e-14
        );
    }

    #[test]
    fn residual_cases() {
        assert!(complementarity_residual(0.5, 0.7).abs() <= 1e-12);
        assert_eq!(complementarity_residual(0.0, 0.42), 0.0);
    }

    #[test]
    fn coincidence_rate_model() {
        let floor = coincidence_rate(2000.0, 2000.0, 2.5e-9, 580e-15, 0.0);
        assert_relative_eq!(floor, 0.01, max_relative = 1e-14);

        let v2 = v2_from_ratio_r13(22.5, 580e-15, 2.5e-9);
        assert_relative_eq!(v2, 1.031_111_111_111_111e-5, max_relative = 1e-12);
        assert_relative_eq!(ratio_r13(580e-15, 2.5e-9, v2), 22.5, max_relative = 1e-14);
        assert_relative_eq!(
            ratio_r13(580e-15, 2.5e-9, 1.0),
            2.32e-4,
            max_relative = 1e-12
        );
        assert_eq!(ratio_r23(), 1.0);

        // Exact ratio: the idler singles double between |t| = 0 and 1, so
        // exact = 2 + T_c / (T_R v2) up to O(v2); the approximation drops the 2.
        let exact = |v2: f64| {
            let on = singles_rates(1.0, v2);
            let off = singles_rates(0.0, v2);
            let g1 = g13_low(1.0, v2).unwrap() - 1.0;
            let g0 = g13_low(0.0, v2).unwrap() - 1.0;
            coincidence_rate(on.n_s1, on.n_i3, 2.5e-9, 580e-15, g1)
                / coincidence_rate(off.n_s1, off.n_i3, 2.5e-9, 580e-15, g0)
        };
        for v2 in [1e-5, 1e-7, 1e-9] {
            let approx = ratio_r13(580e-15, 2.5e-9, v2);
            assert_relative_eq!(exact(v2), 2.0 + approx, max_relative = 2.0 * v2);
        }
    }

    #[test]
    fn visibility_from_first_order_coherence() {
        assert_relative_eq!(visibility_from_g1(3.0, 3.0, 0.7).unwrap(), 0.7);
        assert_eq!(visibility_from_g1(3.0, 0.0, 0.7).unwrap(), 0.0);
        assert_relative_eq!(
            visibility_from_g1(1.0, 3.0, 1.0).unwrap(),
            3f64.sqrt() / 2.0,
            max_relative = 1e-15
        );
        assert!(visibility_from_g1(0.0, 0.0, 0.5).is_err());
        assert!(visibility_from_g1(1.0, 1.0, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn appendix_identity(t in 0.0..=1.0f64, v2 in 1e-6..10.0f64) {
            let d = G2Pair::full(t, v2).unwrap().distinguishability().unwrap();
            prop_assert!((d - dist_highgain(t, v2)).abs() <= 1e-12);
        }

        #[test]
        fn complementarity(t in 0.0..=1.0f64, v2 in 0.0..1e3f64) {
            prop_assert!(complementarity_residual(t, v2).abs() <= 1e-12);
        }

        #[test]
        fn low_gain_trace_identity(t in 0.0..=1.0f64, g in 0.0..=1.0f64) {
            let d = dist_trace(t, g);
            let v = visibility_low(t, g);
            prop_assert!((d * d + v * v - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn low_gain_approximation_quality(t in 0.01..=1.0f64, v2 in 1e-7..1e-3f64) {
            let full = g13_full(t, v2).unwrap();
            let low = g13_low(t, v2).unwrap();
            prop_assert!((low - full).abs() / (full - 1.0) <= 3.0 * v2);
            let full = g23_full(t, v2).unwrap();
            let low = g23_low(t, v2).unwrap();
            prop_assert!((low - full).abs() / (full - 1.0) <= 3.0 * v2);
        }

        #[test]
        fn monotone_in_transmission(t in 0.0..0.99f64, dt in 1e-3..1e-2f64, v2 in 1e-4..10.0f64) {
            let t2 = (t + dt).min(1.0);
            prop_assert!(dist_highgain(t2, v2) <= dist_highgain(t, v2) + 1e-15);
            prop_assert!(g12_coherence(t2, v2) >= g12_coherence(t, v2) - 1e-15);
        }

        #[test]
        fn g23_dominates_g13(t in 0.0..0.999f64, v2 in 1e-4..10.0f64) {
            let pair = G2Pair::full(t, v2).unwrap();
            prop_assert!(pair.g23 > pair.g13);
            prop_assert!(pair.g13 >= 1.0);
        }
    }
}
