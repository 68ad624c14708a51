//! Checks against closed forms derived independently of the simulator.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use qsd_core::analysis::{
    desired_state, wigner_marginals, wigner_phase_distribution, MarginalAxis, PhaseSpaceGrid,
    QuadratureRule,
};
use qsd_core::detectors::{DetectorKind, DetectorModel};
use qsd_core::fock::{fidelity_to_pure, partial_trace, CutoffDim, DensityOperator, PureState, C64};
use qsd_core::optics::{
    beam_splitter_unitary, coherent_state_with_tolerance, BeamSplitterParams, SpdcParams,
};
use qsd_core::pipeline::{
    ideal_truncated_state, realistic_truncation, ClickPattern, Correction, IdealOutcome, QsdConfig,
    Source,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cut(n: usize) -> CutoffDim {
    CutoffDim::new(n).unwrap()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn coherent_amp(beta: C64, n: usize) -> C64 {
    (-beta.norm_sqr() / 2.0).exp() * beta.powu(n as u32) / factorial(n).sqrt()
}

/// `(t1 b1† - r1* (r2 c3† + t2* c2†)) |0>_b1 |t2 alpha>_c3 |-r2* alpha>_c2`,
/// the single-photon input after both splitters, as an amplitude on
/// `|b1, c2, c3>`.
fn analytic_output(
    alpha: C64,
    s1: &BeamSplitterParams,
    s2: &BeamSplitterParams,
    b1: usize,
    n2: usize,
    n3: usize,
) -> C64 {
    let (t1, r1, t2, r2) = (s1.t(), s1.r(), s2.t(), s2.r());
    let beta3 = t2 * alpha;
    let beta2 = -r2.conj() * alpha;
    match b1 {
        1 => t1 * coherent_amp(beta2, n2) * coherent_amp(beta3, n3),
        0 => {
            let via3 = if n3 > 0 {
                r2 * (n3 as f64).sqrt() * coherent_amp(beta3, n3 - 1) * coherent_amp(beta2, n2)
            } else {
                C64::new(0.0, 0.0)
            };
            let via2 = if n2 > 0 {
                t2.conj()
                    * (n2 as f64).sqrt()
                    * coherent_amp(beta2, n2 - 1)
                    * coherent_amp(beta3, n3)
            } else {
                C64::new(0.0, 0.0)
            };
            -r1.conj() * (via3 + via2)
        }
        _ => C64::new(0.0, 0.0),
    }
}

/// Builds `|1>_a1 |0>_a2 |alpha>_b3` and sends it through both splitters.
fn simulated_output(
    alpha: C64,
    s1: &BeamSplitterParams,
    s2: &BeamSplitterParams,
    levels: usize,
) -> PureState {
    let c = cut(levels);
    let mut pair = PureState::fock(&[1, 0], c).unwrap();
    beam_splitter_unitary(*s1, c)
        .apply_pure(&mut pair, 0, 1)
        .unwrap();
    let coh = coherent_state_with_tolerance(alpha, cut(levels - 1), 1.0)
        .unwrap()
        .with_cutoff(c)
        .unwrap();
    let mut psi = pair.tensor(&coh).unwrap();
    beam_splitter_unitary(*s2, c)
        .apply_pure(&mut psi, 2, 1)
        .unwrap();
    psi
}

#[test]
fn two_splitter_output_matches_the_analytic_amplitudes() {
    let alpha = C64::new(0.25, 0.3);
    let s1 = BeamSplitterParams::from_transmittance(0.35).unwrap();
    let s2 =
        BeamSplitterParams::new(C64::from_polar(0.8, 0.4), C64::from_polar(0.6, -1.1)).unwrap();
    let levels = 14;
    let psi = simulated_output(alpha, &s1, &s2, levels);
    // The truncated coherent input is renormalized; compare with that norm.
    let scale = (1.0 - qsd_core::fock::poisson_tail(alpha.norm_sqr(), levels - 1)).sqrt();
    for b1 in 0..2 {
        for n2 in 0..6 {
            for n3 in 0..6 {
                let got = psi.amplitude(&[b1, n2, n3]) * scale;
                let want = analytic_output(alpha, &s1, &s2, b1, n2, n3);
                assert!(
                    (got - want).norm() < 1e-12,
                    "({b1},{n2},{n3}): {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn projecting_c2_c3_onto_one_zero_gives_the_truncated_state() {
    let alpha = C64::new(-0.4, 0.7);
    let s1 = BeamSplitterParams::from_transmittance(0.5).unwrap();
    let s2 = BeamSplitterParams::from_transmittance(0.7).unwrap();
    let levels = 8;
    let rho = simulated_output(alpha, &s1, &s2, levels).to_density();
    let mut project = vec![0.0; levels];
    project[1] = 1.0;
    let mut none = vec![0.0; levels];
    none[0] = 1.0;
    let (rho, _) = qsd_core::fock::apply_diagonal_povm(&rho, 1, &project).unwrap();
    let (rho, _) = qsd_core::fock::apply_diagonal_povm(&rho, 2, &none).unwrap();
    let reduced = partial_trace(&rho, &[0]).unwrap().normalize().unwrap();
    let ideal = ideal_truncated_state(alpha, &s1, &s2, IdealOutcome::OneZero, cut(levels)).unwrap();
    assert_abs_diff_eq!(
        fidelity_to_pure(&reduced, &ideal).unwrap(),
        1.0,
        epsilon = 1e-12
    );
}

#[test]
fn random_exact_pair_runs_reproduce_the_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let alpha = C64::from_polar(rng.gen_range(0.0..2.0f64).sqrt(), rng.gen_range(-PI..PI));
        let mut cfg = QsdConfig::new(alpha, DetectorModel::ideal(DetectorKind::Pndc)).unwrap();
        cfg.source = Source::ExactPair;
        cfg.bs1 = BeamSplitterParams::from_transmittance(rng.gen_range(0.05..0.95)).unwrap();
        cfg.bs2 = BeamSplitterParams::from_transmittance(rng.gen_range(0.05..0.95)).unwrap();
        let out = realistic_truncation(&cfg, ClickPattern::standard(), Correction::Off).unwrap();
        let ideal =
            ideal_truncated_state(alpha, &cfg.bs1, &cfg.bs2, IdealOutcome::OneZero, cfg.cutoff)
                .unwrap();
        let proj = ideal.to_density();
        assert!((out.state.matrix() - proj.matrix()).norm() < 1e-10);
    }
}

#[test]
fn weak_source_approaches_the_ideal_state() {
    let alpha = C64::new(0.9, 0.2);
    let mut cfg = QsdConfig::new(alpha, DetectorModel::ideal(DetectorKind::Pndc)).unwrap();
    cfg.source = Source::SpdcMixed(SpdcParams::from_pair_probability(1e-8).unwrap());
    let out = realistic_truncation(&cfg, ClickPattern::standard(), Correction::Auto).unwrap();
    let ideal = ideal_truncated_state(alpha, &cfg.bs1, &cfg.bs2, IdealOutcome::OneZero, cfg.cutoff)
        .unwrap();
    assert!(fidelity_to_pure(&out.state, &ideal).unwrap() >= 1.0 - 1e-6);
}

/// Quadrature wavefunction of `|n>` for `X = (a + a†)/2`:
/// `(2/pi)^(1/4) H_n(sqrt2 x) e^{-x^2} / sqrt(2^n n!)`.
fn hermite_function(n: usize, x: f64) -> f64 {
    let y = 2f64.sqrt() * x;
    let (mut h0, mut h1) = (1.0, 2.0 * y);
    let h = match n {
        0 => h0,
        _ => {
            for k in 1..n {
                let h2 = 2.0 * y * h1 - 2.0 * k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    };
    (2.0 / PI).powf(0.25) * h * (-x * x).exp() / (2f64.powi(n as i32) * factorial(n)).sqrt()
}

#[test]
fn p_integrated_marginal_is_the_quadrature_distribution() {
    let c = cut(6);
    let alpha = C64::new(0.8, 0.5);
    let psi = coherent_state_with_tolerance(alpha, c, 1.0).unwrap();
    let rho = psi.to_density();
    let grid = PhaseSpaceGrid::new((-3.0, 3.0), (-3.0, 3.0), 25, 25).unwrap();
    let curve = wigner_marginals(&rho, MarginalAxis::IntegrateP, &grid).unwrap();
    for (x, got) in curve.coords.iter().zip(&curve.values) {
        let amp: C64 = (0..6)
            .map(|n| psi.amplitude(&[n]) * hermite_function(n, *x))
            .sum();
        assert_abs_diff_eq!(*got, amp.norm_sqr(), epsilon = 1e-10);
        assert!(*got >= -1e-9);
    }
}

#[test]
fn vacuum_marginal_is_gaussian() {
    let rho = DensityOperator::vacuum(1, cut(4)).unwrap();
    let curve =
        wigner_marginals(&rho, MarginalAxis::IntegrateP, &PhaseSpaceGrid::default()).unwrap();
    for (x, v) in curve.coords.iter().zip(&curve.values) {
        assert_abs_diff_eq!(
            *v,
            (2.0 / PI).sqrt() * (-2.0 * x * x).exp(),
            epsilon = 1e-12
        );
    }
}

#[test]
fn x_integrated_marginal_is_normalized() {
    let rho = desired_state(C64::new(0.0, 2.0), cut(16))
        .unwrap()
        .to_density();
    let grid = PhaseSpaceGrid::new((-6.0, 6.0), (-6.0, 6.0), 601, 601).unwrap();
    let curve = wigner_marginals(&rho, MarginalAxis::IntegrateX, &grid).unwrap();
    let total: f64 = curve.values.iter().sum::<f64>() * grid.dp();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
}

#[test]
fn qubit_phase_distribution_closed_form() {
    // P(theta) = 1/(2 pi) + Re(rho_10 e^{-i theta}) / sqrt(2 pi) for states in span{|0>, |1>}.
    for (mean, phase) in [(1.0, 0.0), (0.4, 1.3), (2.5, -2.0)] {
        let alpha = C64::from_polar(f64::sqrt(mean), phase);
        let rho = desired_state(alpha, cut(4)).unwrap().to_density();
        let curve = wigner_phase_distribution(&rho, &QuadratureRule::for_levels(4)).unwrap();
        let rho10 = rho.element(1, 0);
        for (th, v) in curve.coords.iter().zip(&curve.values) {
            let want =
                1.0 / (2.0 * PI) + (rho10 * C64::from_polar(1.0, -th)).re / (2.0 * PI).sqrt();
            assert_abs_diff_eq!(*v, want, epsilon = 1e-12);
        }
    }
}

#[test]
fn ideal_phase_distribution_minimum_and_peak() {
    let rho = desired_state(C64::new(1.0, 0.0), cut(16))
        .unwrap()
        .to_density();
    let curve = wigner_phase_distribution(&rho, &QuadratureRule::for_levels(16)).unwrap();
    let expected = 1.0 / (2.0 * PI) - 0.5 / (2.0 * PI).sqrt();
    assert_abs_diff_eq!(curve.min(), expected, epsilon = 1e-6);
    assert_abs_diff_eq!(curve.min(), -0.0403, epsilon = 1e-4);

    let alpha = C64::from_polar(0.8f64.sqrt(), PI / 2.0);
    let rho = desired_state(alpha, cut(16)).unwrap().to_density();
    let curve = wigner_phase_distribution(&rho, &QuadratureRule::for_levels(16)).unwrap();
    assert_abs_diff_eq!(curve.argmax(), PI / 2.0, epsilon = 1e-9);
}
