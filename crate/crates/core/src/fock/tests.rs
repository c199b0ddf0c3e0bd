use super::*;
use crate::closed_form;
use crate::gaussian::{build_setup, observe};
use crate::params::ExperimentParams;
use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn two_mode_vacuum(d: usize) -> TruncatedFockState {
    TruncatedFockState::vacuum(&[ModeLabel::BS, ModeLabel::BI], d).unwrap()
}

#[test]
fn ladder_matrix_elements() {
    let d = 6;
    let (lower, raise) = ladder_ops(d).unwrap();
    let (a, ad) = (lower.matrix(), raise.matrix());
    assert_eq!(a[(0, 1)], c(1.0, 0.0));
    assert_eq!(ad[(1, 0)], c(1.0, 0.0));
    assert_relative_eq!(a[(3, 4)].re, 2.0);
    let comm = a * ad - ad * a;
    for i in 0..d {
        for j in 0..d {
            let expected = match (i == j, i == d - 1) {
                (true, false) => 1.0,
                (true, true) => -((d - 1) as f64),
                _ => 0.0,
            };
            assert_abs_diff_eq!((comm[(i, j)] - expected).norm(), 0.0, epsilon = 1e-14);
        }
    }
    assert!(matches!(ladder_ops(3), Err(Error::Range { .. })));
}

#[test]
fn zero_gain_squeezer_is_identity() {
    let op = squeeze_unitary(0.0, 1.3, 5).unwrap();
    let id = CMatrix::identity(25, 25);
    assert_abs_diff_eq!((op.matrix() - id).norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn squeezed_vacuum_expansion() {
    let (g, phi) = (0.2, 0.7);
    let mut st = two_mode_vacuum(8);
    st.apply_two_mode(&squeeze_unitary(g, phi, 8).unwrap(), (0, 1))
        .unwrap();
    assert_abs_diff_eq!(
        st.mean_photon(ModeLabel::BS).unwrap(),
        g.sinh().powi(2),
        epsilon = 1e-6
    );
    let c0 = st.amplitude(&[0, 0]).unwrap();
    let c1 = st.amplitude(&[1, 1]).unwrap();
    let expected = c(0.0, -1.0) * Complex64::from_polar(g.tanh(), phi);
    assert_abs_diff_eq!((c1 / c0 - expected).norm(), 0.0, epsilon = 1e-10);
    assert_abs_diff_eq!(c0.norm(), 1.0 / g.cosh(), epsilon = 1e-10);
    assert_eq!(st.amplitude(&[1, 0]).unwrap().norm(), 0.0);
}

#[test]
fn strong_squeezing_on_small_cutoff_is_rejected() {
    assert!(matches!(
        squeeze_unitary(2.0, 0.0, 4),
        Err(Error::Truncation { .. })
    ));
}

#[test]
fn operators_are_unitary_on_safe_subspace() {
    for d in [4, 6, 8] {
        assert!(squeeze_unitary(0.3, 0.4, d).unwrap().unitarity_residual() <= UNITARITY_TOLERANCE);
        let bs = bs_unitary(Complex64::from_polar(0.6, 1.1), d).unwrap();
        assert!(bs.unitarity_residual() <= UNITARITY_TOLERANCE);
    }
}

#[test]
fn beamsplitter_matrix_elements() {
    let d = 5;
    let id = bs_unitary(c(1.0, 0.0), d).unwrap();
    assert_abs_diff_eq!(
        (id.matrix() - CMatrix::identity(d * d, d * d)).norm(),
        0.0,
        epsilon = 1e-15
    );

    let t = Complex64::from_polar(0.6, 0.4);
    let u = bs_unitary(t, d).unwrap();
    let m = u.matrix();
    // |10> -> t|10> - r*|01>
    assert_abs_diff_eq!((m[(d, d)] - t).norm(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!((m[(1, d)] - c(-0.8, 0.0)).norm(), 0.0, epsilon = 1e-15);
    // |11> -> sqrt2 t r |20> + (|t|² - r²)|11> - sqrt2 r t* |02>
    assert_abs_diff_eq!(
        (m[(2 * d, d + 1)] - t * 0.8 * 2f64.sqrt()).norm(),
        0.0,
        epsilon = 1e-14
    );
    assert_abs_diff_eq!(
        (m[(d + 1, d + 1)] - c(0.36 - 0.64, 0.0)).norm(),
        0.0,
        epsilon = 1e-14
    );

    for col in 0..d * d {
        for row in 0..d * d {
            let (n_in, n_out) = (col / d + col % d, row / d + row % d);
            if n_in != n_out {
                assert_eq!(m[(row, col)].norm(), 0.0);
            }
        }
    }
    assert!(bs_unitary(c(1.2, 0.0), d).is_err());
}

#[test]
fn basis_cap_is_enforced() {
    let modes = FOCK_MODES;
    assert!(matches!(
        TruncatedFockState::vacuum(&modes, 11),
        Err(Error::Resource {
            basis: 161_051,
            cap: DEFAULT_BASIS_CAP
        })
    ));
    let limits = OracleLimits {
        basis_cap: 1000,
        ..OracleLimits::default()
    };
    assert!(matches!(
        simulate_with(&ExperimentParams::new(0.1, 1.0, 1.0), 5, &limits),
        Err(Error::Resource { .. })
    ));
}

#[test]
fn zero_gain_reports_vacuum() {
    let r = simulate(&ExperimentParams::new(0.0, 0.4, 1.0), 4).unwrap();
    assert!(r.is_vacuum());
    assert_eq!(r.g13, None);
    assert_eq!(r.g12, None);
    assert_eq!(r.visibility, None);
    assert_eq!(r.norm_deficit, 0.0);
}

#[test]
fn g13_matches_closed_form_at_moderate_gain() {
    let r = simulate(&ExperimentParams::new(0.2, 0.5, 1.0), 8).unwrap();
    let cf = closed_form::g13_full(0.5, 0.2f64.sinh().powi(2)).unwrap();
    assert_abs_diff_eq!(r.g13.unwrap(), cf, epsilon = 1e-4);
}

#[test]
fn g13_at_one_percent_pair_probability() {
    let r = simulate(&ExperimentParams::from_v2(0.01, 1.0, 1.0), 8).unwrap();
    assert_relative_eq!(r.g13.unwrap(), 51.751_243_781, max_relative = 1e-6);
}

#[test]
fn overlap_limits_visibility() {
    let r = simulate(&ExperimentParams::new(0.05, 1.0, 0.855), 6).unwrap();
    assert_abs_diff_eq!(r.visibility.unwrap(), 0.855, epsilon = 1e-3);
}

#[test]
fn oracle_agrees_with_moment_engine() {
    for t in [0.0, 0.5, 1.0] {
        for gamma in [1.0, 0.855] {
            let p = ExperimentParams::new(0.2, t, gamma);
            let r = simulate(&p, 8).unwrap();
            let e = observe(&build_setup(&p).unwrap()).unwrap();
            let tol = (10.0 * r.norm_deficit).max(1e-4);
            assert_abs_diff_eq!(r.n_s1, e.n_s1, epsilon = tol);
            assert_abs_diff_eq!(r.n_s2, e.n_s2, epsilon = tol);
            assert_abs_diff_eq!(r.n_i3, e.n_i3, epsilon = tol);
            assert_abs_diff_eq!(r.g13.unwrap(), e.g13, epsilon = tol);
            assert_abs_diff_eq!(r.g23.unwrap(), e.g23, epsilon = tol);
            assert_abs_diff_eq!(r.g12.unwrap(), e.g12, epsilon = tol);
            assert_abs_diff_eq!(r.visibility.unwrap(), e.visibility, epsilon = tol);
        }
    }
}

#[test]
fn g13_gap_shrinks_with_cutoff() {
    let p = ExperimentParams::new(0.2, 0.5, 1.0);
    let exact = closed_form::g13_full(0.5, p.v2()).unwrap();
    let gaps: Vec<f64> = (4..=10)
        .map(|d| (simulate(&p, d).unwrap().g13.unwrap() - exact).abs())
        .collect();
    for pair in gaps.windows(2) {
        assert!(pair[1] < pair[0], "{gaps:?}");
    }
    assert!(gaps[gaps.len() - 1] <= 1e-4);
}

#[test]
fn low_gain_branch_limits() {
    let full = low_gain_amplitudes(&ExperimentParams::new(0.05, 1.0, 1.0), 6).unwrap();
    assert_abs_diff_eq!(full.branch_ratios[0], 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(full.branch_ratios[1], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(full.branch_ratios[2], 0.0, epsilon = 1e-12);
    assert!(full.distinguishability < 1e-6);

    let blocked = low_gain_amplitudes(&ExperimentParams::new(0.05, 0.0, 1.0), 6).unwrap();
    assert_abs_diff_eq!(blocked.branch_ratios[0], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(blocked.distinguishability, 1.0, epsilon = 1e-12);
}

#[test]
fn low_gain_partial_overlap() {
    let g = 0.05;
    let r = low_gain_amplitudes(&ExperimentParams::new(g, 0.6, 0.855), 6).unwrap();
    for (got, want) in r.branch_ratios.iter().zip(&r.expected_ratios) {
        assert_abs_diff_eq!(got, want, epsilon = g * g);
    }
    assert_abs_diff_eq!(
        r.distinguishability,
        closed_form::dist_trace(0.6, 0.855),
        epsilon = g * g
    );
    assert_abs_diff_eq!(r.distinguishability, 0.858_39, epsilon = g * g);
    assert!(r.vacuum_weight > 0.99);
    assert!(r.double_pair_weight < g.powi(4) * 10.0);
    assert!(r.single_pair_weight > r.double_pair_weight);
}

#[test]
fn low_gain_requires_low_gain() {
    assert!(matches!(
        low_gain_amplitudes(&ExperimentParams::new(0.2, 0.5, 1.0), 6),
        Err(Error::Regime(_))
    ));
    assert!(matches!(
        low_gain_amplitudes(&ExperimentParams::new(0.0, 0.5, 1.0), 6),
        Err(Error::ZeroGain)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn beamsplitters_unitary_for_any_amplitude(t in 0.0..=1.0f64, phi in 0.0..7.0f64, d in 4usize..8) {
        let bs = bs_unitary(Complex64::from_polar(t, phi), d).unwrap();
        prop_assert!(bs.unitarity_residual() <= UNITARITY_TOLERANCE);
    }

    #[test]
    fn oracle_tracks_engine_with_phases(
        t in 0.0..=1.0f64,
        gamma in 0.0..=1.0f64,
        phases in prop::array::uniform6(0.0..std::f64::consts::TAU),
    ) {
        let p = ExperimentParams {
            gain: 0.1,
            t_mag: t,
            gamma_mag: gamma,
            t_phase: phases[0],
            gamma_phase: phases[1],
            phi_p1: phases[2],
            phi_p2: phases[3],
            phi_s1: phases[4],
            phi_i3: phases[5],
            ..ExperimentParams::default()
        };
        let r = simulate(&p, 6).unwrap();
        let e = build_setup(&p).unwrap();
        let tol = (10.0 * r.norm_deficit).max(1e-6);
        use ModeLabel::*;
        prop_assert!((r.n_s2 - e.mean_photon(S2).unwrap()).abs() <= tol);
        prop_assert!((r.n_i2 - e.mean_photon(I2).unwrap()).abs() <= tol);
        prop_assert!((r.g12.unwrap() - e.g1(S1, S2).unwrap()).abs() <= 1e-4);
    }
}
