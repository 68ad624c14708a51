//! Evaluation of output states: reference fidelities, Wigner functions and
//! phase statistics.

mod baselines;
mod quadrature;
mod wigner;

pub use baselines::{
    desired_state, fidelity_coherent_baseline, fidelity_dephased, optimal_beta, optimal_beta_sq,
};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use wigner::{
    negativity, wigner, wigner_at, wigner_marginals, wigner_phase_distribution, Curve,
    MarginalAxis, Negativity, PhaseSpaceGrid, WignerField,
};
