use crate::error::Result;
use crate::fock::{BasisIndexer, CutoffDim, PureState, C64};

/// Target of the truncation, `(|0> + alpha |1>) / sqrt(1 + |alpha|^2)`.
pub fn desired_state(alpha: C64, cutoff: CutoffDim) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); cutoff.levels()];
    amps[0] = C64::new(1.0, 0.0);
    amps[1] = alpha;
    PureState::new(amps, BasisIndexer::new(1, cutoff)?)?.normalize()
}

/// Fidelity of the fully dephased mixture `(|0><0| + |alpha|^2 |1><1|)/(1+|alpha|^2)`.
pub fn fidelity_dephased(alpha: C64) -> f64 {
    let a2 = alpha.norm_sqr();
    (1.0 + a2 * a2) / ((1.0 + a2) * (1.0 + a2))
}

/// Fidelity of a coherent state `|beta>` to the desired superposition, with
/// `delta` the phase of `beta` relative to `alpha`.
pub fn fidelity_coherent_baseline(alpha: C64, beta: C64, delta: f64) -> f64 {
    let ab = alpha.norm() * beta.norm();
    (-beta.norm_sqr()).exp() * (1.0 + 2.0 * ab * delta.cos() + ab * ab) / (1.0 + alpha.norm_sqr())
}

/// Intensity `|beta|^2` maximizing [`fidelity_coherent_baseline`] at zero
/// relative phase. Written as `2a / (1 + 2a + sqrt(1 + 4a))`, which stays
/// accurate as `a = |alpha|^2` goes to zero.
pub fn optimal_beta_sq(alpha: C64) -> f64 {
    let a = alpha.norm_sqr();
    2.0 * a / (1.0 + 2.0 * a + (1.0 + 4.0 * a).sqrt())
}

/// Optimal coherent amplitude, in phase with `alpha`.
pub fn optimal_beta(alpha: C64) -> C64 {
    C64::from_polar(optimal_beta_sq(alpha).sqrt(), alpha.arg())
}
