//! Simulation of the quantum scissors device: optical state truncation of a
//! coherent input to a vacuum/one-photon superposition, with ideal and
//! realistic (lossy, dark-count-afflicted) photon counting.

pub mod analysis;
pub mod detectors;
pub mod error;
pub mod fock;
pub mod optics;
pub mod pipeline;

pub use detectors::{DetectorKind, DetectorModel, PovmElement};
pub use error::{QsdError, Result};
pub use fock::{BasisIndexer, CutoffDim, DensityOperator, PureState, C64};
pub use optics::{BeamSplitterParams, SpdcParams};
pub use pipeline::{
    realistic_truncation, ClickPattern, Correction, QsdConfig, Source, Strategy, TruncationResult,
};
