use std::f64::consts::PI;

use proptest::prelude::*;
use qsd_core::analysis::{
    wigner, wigner_at, wigner_phase_distribution, PhaseSpaceGrid, QuadratureRule,
};
use qsd_core::detectors::{DetectorKind, DetectorModel};
use qsd_core::fock::{
    apply_diagonal_povm, partial_trace, BasisIndexer, CutoffDim, DensityOperator, PureState, C64,
};
use qsd_core::optics::{beam_splitter_unitary, BeamSplitterParams};
use qsd_core::pipeline::{ideal_fidelity, ideal_truncated_state, IdealOutcome, SigmaZ};

fn cut(n: usize) -> CutoffDim {
    CutoffDim::new(n).unwrap()
}

fn state(amps: Vec<(f64, f64)>, modes: usize, levels: usize) -> PureState {
    let amps = amps.into_iter().map(|(re, im)| C64::new(re, im)).collect();
    PureState::new(amps, BasisIndexer::new(modes, cut(levels)).unwrap())
        .unwrap()
        .normalize()
        .unwrap()
}

fn amplitudes(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_filter("nonzero", |v| {
        v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
    })
}

fn splitter() -> impl Strategy<Value = BeamSplitterParams> {
    (0.0f64..=1.0, -PI..PI, -PI..PI).prop_map(|(t_sq, phi_t, phi_r)| {
        BeamSplitterParams::new(
            C64::from_polar(t_sq.sqrt(), phi_t),
            C64::from_polar((1.0 - t_sq).sqrt(), phi_r),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn splitter_blocks_are_unitary(params in splitter(), levels in 2usize..10) {
        let u = beam_splitter_unitary(params, cut(levels));
        for (_, blk) in u.complete_blocks() {
            let id = nalgebra::DMatrix::<C64>::identity(blk.nrows(), blk.ncols());
            prop_assert!((blk.adjoint() * blk - id).norm() < 1e-10);
        }
    }

    #[test]
    fn splitter_preserves_norm_below_the_cutoff(params in splitter(), amps in amplitudes(16)) {
        // Amplitudes only on |j, k> with j + k < 4, embedded in 8 levels.
        let levels = 8;
        let idx = BasisIndexer::new(2, cut(levels)).unwrap();
        let mut full = vec![C64::new(0.0, 0.0); idx.dim()];
        let mut it = amps.into_iter();
        for j in 0..4 {
            for k in 0..4 - j {
                let (re, im) = it.next().unwrap();
                full[idx.flat_index(&[j, k])] = C64::new(re, im);
            }
        }
        let mut psi = PureState::new(full, idx).unwrap();
        let before = psi.norm_sqr();
        beam_splitter_unitary(params, cut(levels)).apply_pure(&mut psi, 0, 1).unwrap();
        prop_assert!((psi.norm_sqr() - before).abs() < 1e-12 * before.max(1.0));
    }

    #[test]
    fn partial_trace_keeps_trace_and_hermiticity(amps in amplitudes(27), keep in 0usize..3) {
        let rho = state(amps, 3, 3).to_density();
        let red = partial_trace(&rho, &[keep]).unwrap();
        prop_assert!((red.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(red.hermiticity_error() < 1e-14);
        prop_assert!(red.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn click_outcomes_exhaust_probability(amps in amplitudes(9), eta in 0.0f64..=1.0, r_dark in 0.0f64..1e6) {
        let rho = state(amps, 2, 3).to_density();
        let model = DetectorModel::new(DetectorKind::Spc, eta, r_dark, 1e-8).unwrap();
        let total: f64 = (0..3)
            .map(|o| apply_diagonal_povm(&rho, 1, model.element(o, cut(3)).unwrap()).unwrap().1)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_z_twice_is_identity(amps in amplitudes(6)) {
        let psi = state(amps, 1, 6);
        let back = psi.sigma_z().unwrap().sigma_z().unwrap();
        prop_assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn wigner_integrates_to_one(amps in amplitudes(6)) {
        let rho = state(amps, 1, 6).to_density();
        let rule = QuadratureRule::for_levels(6);
        let phase = wigner_phase_distribution(&rho, &rule).unwrap();
        let total: f64 = phase.values.iter().sum::<f64>() * 2.0 * PI / rule.n_theta() as f64;
        prop_assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn wigner_ignores_global_phase(amps in amplitudes(5), phi in -PI..PI, x in -2.0f64..2.0, p in -2.0f64..2.0) {
        let psi = state(amps, 1, 5);
        let shifted = psi.clone().scaled(C64::from_polar(1.0, phi));
        let a = wigner_at(&psi.to_density(), x, p).unwrap();
        let b = wigner_at(&shifted.to_density(), x, p).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn wigner_rotates_with_the_state(amps in amplitudes(5)) {
        // |n> -> i^n |n> turns phase space by a quarter: W'(x, p) = W(p, -x).
        let psi = state(amps, 1, 5);
        let rotated: Vec<C64> = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, &a)| a * C64::new(0.0, 1.0).powu(n as u32))
            .collect();
        let rotated = PureState::new(rotated, psi.indexer().clone()).unwrap();
        let grid = PhaseSpaceGrid::new((-2.0, 2.0), (-2.0, 2.0), 9, 9).unwrap();
        let w = wigner(&psi.to_density(), &grid).unwrap();
        let wr = wigner(&rotated.to_density(), &grid).unwrap();
        let n = 9;
        for i in 0..n {
            for j in 0..n {
                // x_i = p_i on this symmetric grid; -x_i is index n-1-i.
                prop_assert!((wr.at(i, j) - w.at(j, n - 1 - i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fock_diagonal_states_have_flat_phase(weights in prop::collection::vec(0.0f64..1.0, 6)) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-3);
        let total: f64 = weights.iter().sum();
        let diag: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let rho = DensityOperator::diagonal(&diag, BasisIndexer::new(1, cut(6)).unwrap()).unwrap();
        let rule = QuadratureRule::new(QuadratureRule::for_levels(6).r_max(), 200, 24).unwrap();
        let phase = wigner_phase_distribution(&rho, &rule).unwrap();
        for v in phase.values {
            prop_assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_fidelity_is_the_overlap(mean in 0.0f64..4.0, phase in -PI..PI, b1 in splitter(), b2 in splitter()) {
        let alpha = C64::from_polar(mean.sqrt(), phase);
        let c = cut(3);
        if let Ok(f) = ideal_fidelity(alpha, &b1, &b2) {
            let psi = ideal_truncated_state(alpha, &b1, &b2, IdealOutcome::OneZero, c).unwrap();
            let desired = qsd_core::analysis::desired_state(alpha, c).unwrap();
            let overlap = psi.inner(&desired).unwrap().norm_sqr();
            prop_assert!((f - overlap).abs() < 1e-12);
        }
    }

    #[test]
    fn swapping_splitters_at_unit_intensity(t1 in 0.01f64..0.99, t2 in 0.01f64..0.99, phase in -PI..PI) {
        // Real t and imaginary r; the closed form is symmetric only at |alpha| = 1.
        let alpha = C64::from_polar(1.0, phase);
        let (a, b) = (
            BeamSplitterParams::from_transmittance(t1).unwrap(),
            BeamSplitterParams::from_transmittance(t2).unwrap(),
        );
        let f = ideal_fidelity(alpha, &a, &b).unwrap();
        let g = ideal_fidelity(alpha, &b, &a).unwrap();
        prop_assert!((f - g).abs() < 1e-12);
    }
}
