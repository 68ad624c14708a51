//! End-to-end scissors simulation.
//!
//! Mode layout for the realistic scheme: the down-conversion signal `a1` and
//! the vacuum port `a2` meet at BS1, giving the output mode `b1` and `b2`;
//! the idler `c1` heralds on D1. `b2` and the coherent beam `b3` meet at BS2
//! (`b3` on the first port) and leave as `c2` (to D2) and `c3` (to D3).

use std::fmt;
use std::str::FromStr;

use crate::analysis::desired_state;
use crate::detectors::{DetectorKind, DetectorModel};
use crate::error::{QsdError, Result};
use crate::fock::{
    apply_diagonal_povm, fidelity_to_pure, partial_trace, tensor_product, BasisIndexer, CutoffDim,
    DensityOperator, PureState, C64,
};
use crate::optics::{
    beam_splitter_unitary, coherent_state_with_tolerance, spdc_mixed, spdc_pure,
    BeamSplitterParams, SpdcParams, DEFAULT_TAIL_TOLERANCE,
};

/// Conditioning probabilities below this are treated as impossible outcomes.
pub const IMPOSSIBLE_THRESHOLD: f64 = 1e-300;

/// Pulse repetition rate assumed when none is configured (100 MHz).
pub const DEFAULT_REP_RATE: f64 = 1e8;

/// Pair weight per pulse used throughout the realistic scheme.
pub const DEFAULT_PAIR_PROBABILITY: f64 = 5e-4;

/// Photon source feeding `a1` and the herald mode `c1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// Phase-averaged down-conversion (random pump phase).
    SpdcMixed(SpdcParams),
    /// Down-conversion with a definite pump phase.
    SpdcPure(SpdcParams),
    /// Exactly one photon pair, `|1,1>`.
    ExactPair,
}

impl Source {
    fn max_pairs(&self) -> usize {
        match self {
            Source::SpdcMixed(p) | Source::SpdcPure(p) => p.pair_cutoff(),
            Source::ExactPair => 1,
        }
    }

    /// Weights of `|k,k>` seen by the herald, `k = 0..=max_pairs`.
    ///
    /// D1 is diagonal, so the pump phase drops out and pure and mixed
    /// down-conversion herald the same signal state.
    fn pair_weights(&self) -> Vec<f64> {
        match self {
            Source::SpdcMixed(p) | Source::SpdcPure(p) => p.pair_weights(),
            Source::ExactPair => vec![0.0, 1.0],
        }
    }

    fn two_mode_density(&self, cutoff: CutoffDim) -> Result<DensityOperator> {
        match self {
            Source::SpdcMixed(p) => spdc_mixed(*p, cutoff),
            Source::SpdcPure(p) => Ok(spdc_pure(*p, cutoff)?.to_density()),
            Source::ExactPair => Ok(PureState::fock(&[1, 1], cutoff)?.to_density()),
        }
    }
}

/// Full description of one realistic run.
#[derive(Debug, Clone, PartialEq)]
pub struct QsdConfig {
    pub alpha: C64,
    pub bs1: BeamSplitterParams,
    pub bs2: BeamSplitterParams,
    pub source: Source,
    pub d1: DetectorModel,
    pub d2: DetectorModel,
    pub d3: DetectorModel,
    pub cutoff: CutoffDim,
    pub rep_rate: f64,
    /// Coherent-state tail mass tolerated beyond the cutoff.
    pub tail_tolerance: f64,
}

impl QsdConfig {
    /// Balanced splitters, down-conversion with the default pair weight,
    /// the same detector model on D1-D3 and an automatic cutoff.
    pub fn new(alpha: C64, detector: DetectorModel) -> Result<Self> {
        Ok(Self {
            alpha,
            bs1: BeamSplitterParams::balanced(),
            bs2: BeamSplitterParams::balanced(),
            source: Source::SpdcMixed(SpdcParams::from_pair_probability(DEFAULT_PAIR_PROBABILITY)?),
            d1: detector,
            d2: detector,
            d3: detector,
            cutoff: default_cutoff(alpha.norm_sqr()),
            rep_rate: DEFAULT_REP_RATE,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        })
    }

    pub fn with_detectors(
        mut self,
        d1: DetectorModel,
        d2: DetectorModel,
        d3: DetectorModel,
    ) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self.d3 = d3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(QsdError::InvalidParameter("alpha must be finite".into()));
        }
        if !(self.rep_rate > 0.0) || !self.rep_rate.is_finite() {
            return Err(QsdError::InvalidParameter(format!(
                "repetition rate {} must be positive",
                self.rep_rate
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(QsdError::InvalidParameter(
                "tail tolerance must be positive".into(),
            ));
        }
        if self.source.max_pairs() >= self.cutoff.levels() {
            return Err(QsdError::CutoffTooSmall {
                current: self.cutoff.levels(),
                required: self.source.max_pairs() + 1,
                tail: 0.0,
                tolerance: self.tail_tolerance,
            });
        }
        Ok(())
    }
}

/// Default cutoff: 16 levels, raised until the coherent tail is below 1e-10.
pub fn default_cutoff(mean_photons: f64) -> CutoffDim {
    CutoffDim::new(CutoffDim::DEFAULT_LEVELS)
        .unwrap_or_default()
        .max(CutoffDim::for_coherent(
            mean_photons,
            DEFAULT_TAIL_TOLERANCE,
        ))
}

/// Outcome labels for D1, D2 and D3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClickPattern {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
}

impl ClickPattern {
    pub const fn new(n1: u32, n2: u32, n3: u32) -> Self {
        Self { n1, n2, n3 }
    }

    /// Herald, one photon at D2, none at D3.
    pub const fn standard() -> Self {
        Self::new(1, 1, 0)
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.n1, self.n2, self.n3)
    }
}

impl FromStr for ClickPattern {
    type Err = QsdError;

    /// Accepts counts, `click`/`no_click` and `2+`, e.g. `1,1,0` or
    /// `click,click,no_click`.
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .split(',')
            .map(|p| match p.trim().to_ascii_lowercase().as_str() {
                "click" => Ok(1),
                "no_click" | "noclick" | "no-click" => Ok(0),
                "2+" => Ok(2),
                other => other.parse::<u32>().map_err(|_| {
                    QsdError::InvalidParameter(format!("bad outcome label '{other}'"))
                }),
            })
            .collect::<Result<Vec<u32>>>()?;
        match labels[..] {
            [n1, n2, n3] => Ok(Self::new(n1, n2, n3)),
            _ => Err(QsdError::InvalidParameter(format!(
                "click pattern '{s}' needs three labels"
            ))),
        }
    }
}

/// Whether to flip the sign of odd Fock levels of the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    /// Flip exactly when D3 counts more than D2.
    #[default]
    Auto,
    On,
    Off,
}

impl Correction {
    pub fn resolve(self, pattern: ClickPattern) -> bool {
        match self {
            Correction::Auto => pattern.n3 > pattern.n2,
            Correction::On => true,
            Correction::Off => false,
        }
    }
}

impl FromStr for Correction {
    type Err = QsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Correction::Auto),
            "on" | "true" | "yes" => Ok(Correction::On),
            "off" | "false" | "no" => Ok(Correction::Off),
            other => Err(QsdError::InvalidParameter(format!(
                "unknown correction mode '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TruncationResult {
    /// Normalized state of `b1`.
    pub state: DensityOperator,
    pub probability_per_pulse: f64,
    pub rate_per_second: f64,
    pub fidelity_to_desired: f64,
    pub correction_applied: bool,
}

/// Ideal detection outcome at (D2, D3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealOutcome {
    /// One photon at D2, none at D3.
    OneZero,
    /// None at D2, one at D3.
    ZeroOne,
}

/// Projected output for perfect detectors and a single-photon input:
/// `(r1 t2)* |0> + r2* t1 alpha |1>` for [`IdealOutcome::OneZero`],
/// `r1* r2 |0> - t1 t2 alpha |1>` for [`IdealOutcome::ZeroOne`].
pub fn ideal_truncated_state(
    alpha: C64,
    bs1: &BeamSplitterParams,
    bs2: &BeamSplitterParams,
    outcome: IdealOutcome,
    cutoff: CutoffDim,
) -> Result<PureState> {
    let (t1, r1, t2, r2) = (bs1.t(), bs1.r(), bs2.t(), bs2.r());
    let (c0, c1) = match outcome {
        IdealOutcome::OneZero => ((r1 * t2).conj(), r2.conj() * t1 * alpha),
        IdealOutcome::ZeroOne => (r1.conj() * r2, -t1 * t2 * alpha),
    };
    let mut amps = vec![C64::new(0.0, 0.0); cutoff.levels()];
    amps[0] = c0;
    amps[1] = c1;
    let psi = PureState::new(amps, BasisIndexer::new(1, cutoff)?)?;
    if psi.norm_sqr() < IMPOSSIBLE_THRESHOLD {
        return Err(QsdError::Degenerate(
            "both amplitudes of the projected state vanish".into(),
        ));
    }
    psi.normalize()
}

/// Closed-form fidelity of the ideal (1,0)-heralded state to the desired
/// superposition.
pub fn ideal_fidelity(
    alpha: C64,
    bs1: &BeamSplitterParams,
    bs2: &BeamSplitterParams,
) -> Result<f64> {
    let (t1, r1, t2, r2) = (bs1.t(), bs1.r(), bs2.t(), bs2.r());
    let a2 = alpha.norm_sqr();
    let p0 = (r1 * t2).norm_sqr();
    let p1 = (t1 * r2).norm_sqr();
    let denom = (p0 + a2 * p1) * (1.0 + a2);
    if denom < IMPOSSIBLE_THRESHOLD {
        return Err(QsdError::Degenerate(
            "r1 t2 and alpha t1 r2 both vanish; the outcome never occurs".into(),
        ));
    }
    let cross = r1.conj() * r2 * t1.conj() * t2.conj() + r1 * r2.conj() * t1 * t2;
    Ok(((p0 + a2 * cross.re + a2 * a2 * p1) / denom).clamp(0.0, 1.0))
}

/// Probability of the ideal (1,0) outcome given one photon in `a1`:
/// `(|r1 t2|^2 + |alpha|^2 |t1 r2|^2) e^{-|alpha|^2}`.
pub fn ideal_detection_probability(
    alpha: C64,
    bs1: &BeamSplitterParams,
    bs2: &BeamSplitterParams,
) -> f64 {
    let a2 = alpha.norm_sqr();
    ((bs1.r() * bs2.t()).norm_sqr() + a2 * (bs1.t() * bs2.r()).norm_sqr()) * (-a2).exp()
}

/// Phase flip `sigma_z` on odd Fock levels of a single-mode state.
pub trait SigmaZ: Sized {
    fn sigma_z(&self) -> Result<Self>;
}

fn check_single_mode(indexer: &BasisIndexer) -> Result<()> {
    if indexer.modes() != 1 {
        return Err(QsdError::InvalidParameter(format!(
            "sigma_z correction acts on one mode, state has {}",
            indexer.modes()
        )));
    }
    Ok(())
}

fn parity(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl SigmaZ for PureState {
    fn sigma_z(&self) -> Result<Self> {
        check_single_mode(self.indexer())?;
        let amps = self
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, &a)| a * parity(n))
            .collect();
        PureState::new(amps, self.indexer().clone())
    }
}

impl SigmaZ for DensityOperator {
    fn sigma_z(&self) -> Result<Self> {
        check_single_mode(self.indexer())?;
        let m = self
            .matrix()
            .map_with_location(|i, j, v| v * parity(i) * parity(j));
        DensityOperator::from_matrix(m, self.indexer().clone())
    }
}

pub fn sigma_z_correct<S: SigmaZ>(state: &S) -> Result<S> {
    state.sigma_z()
}

struct Prepared {
    work: CutoffDim,
    coherent: PureState,
    pairs: Vec<f64>,
    povm: [Vec<f64>; 3],
}

/// Shared setup: the coherent input at the configured cutoff, re-embedded in
/// a working cutoff large enough that BS2 never pushes amplitude past it.
fn prepare(config: &QsdConfig, pattern: ClickPattern) -> Result<Prepared> {
    config.validate()?;
    let coherent =
        coherent_state_with_tolerance(config.alpha, config.cutoff, config.tail_tolerance)?;
    let work = CutoffDim::new(config.cutoff.levels() + config.source.max_pairs())?;
    let povm = [
        config.d1.element(pattern.n1, work)?.diagonal().to_vec(),
        config.d2.element(pattern.n2, work)?.diagonal().to_vec(),
        config.d3.element(pattern.n3, work)?.diagonal().to_vec(),
    ];
    Ok(Prepared {
        work,
        coherent: coherent.with_cutoff(work)?,
        pairs: config.source.pair_weights(),
        povm,
    })
}

fn finish(
    config: &QsdConfig,
    pattern: ClickPattern,
    correction: Correction,
    unnormalized: DensityOperator,
) -> Result<TruncationResult> {
    let probability = unnormalized.trace().re;
    if !(probability >= IMPOSSIBLE_THRESHOLD) {
        return Err(QsdError::ImpossibleOutcome(probability));
    }
    let mut state = unnormalized
        .scaled(1.0 / probability)
        .with_cutoff(config.cutoff)?;
    let correction_applied = correction.resolve(pattern);
    if correction_applied {
        state = state.sigma_z()?;
    }
    let fidelity = fidelity_to_pure(&state, &desired_state(config.alpha, config.cutoff)?)?;
    let probability = probability.min(1.0);
    Ok(TruncationResult {
        state,
        probability_per_pulse: probability,
        rate_per_second: probability * config.rep_rate,
        fidelity_to_desired: fidelity,
        correction_applied,
    })
}

/// Realistic truncation conditioned on `pattern`.
///
/// The heralded signal is diagonal in pair number, so each pair number `k`
/// is propagated as a pure state `|k>_a1 |0>_a2 |alpha>_b3` through both
/// splitters and the conditioned `b1` operators are summed with weight
/// `p_k Π_D1(k)`. This equals the density-operator evaluation of
/// [`realistic_truncation_dense`] while working on three modes only.
pub fn realistic_truncation(
    config: &QsdConfig,
    pattern: ClickPattern,
    correction: Correction,
) -> Result<TruncationResult> {
    let prep = prepare(config, pattern)?;
    let bs1 = beam_splitter_unitary(config.bs1, prep.work);
    let bs2 = beam_splitter_unitary(config.bs2, prep.work);
    let mut acc = DensityOperator::from_matrix(
        nalgebra::DMatrix::zeros(prep.work.levels(), prep.work.levels()),
        BasisIndexer::new(1, prep.work)?,
    )?;
    for (k, &p) in prep.pairs.iter().enumerate() {
        let weight = p * prep.povm[0][k];
        if weight == 0.0 {
            continue;
        }
        // Modes: b1, b2 (later c2), b3 (later c3).
        let mut pair = PureState::fock(&[k, 0], prep.work)?;
        bs1.apply_pure(&mut pair, 0, 1)?;
        let mut psi = pair.tensor(&prep.coherent)?;
        bs2.apply_pure(&mut psi, 2, 1)?;
        let reduced = psi.conditioned_reduction(&[0], &[(1, &prep.povm[1]), (2, &prep.povm[2])])?;
        acc = acc.add(&reduced.scaled(weight))?;
    }
    finish(config, pattern, correction, acc)
}

/// Reference evaluation on full density operators.
///
/// Builds `ρ_in = ρ_source(a1, c1) ⊗ |0><0|(a2) ⊗ |α><α|(b3)`, applies BS1,
/// conditions on D1 and traces `c1` out right away, then applies BS2 and
/// the remaining detectors. Memory grows as the fourth power of the working
/// cutoff, so this is meant for small cutoffs.
pub fn realistic_truncation_dense(
    config: &QsdConfig,
    pattern: ClickPattern,
    correction: Correction,
) -> Result<TruncationResult> {
    let prep = prepare(config, pattern)?;
    let work = prep.work;
    let vacuum = DensityOperator::vacuum(1, work)?;
    let rho = tensor_product(
        &tensor_product(&config.source.two_mode_density(work)?, &vacuum)?,
        &prep.coherent.to_density(),
    )?;
    // Modes: a1 -> b1, c1, a2 -> b2 -> c2, b3 -> c3.
    let rho = beam_splitter_unitary(config.bs1, work).apply_density(&rho, 0, 2)?;
    let (rho, _) = apply_diagonal_povm(&rho, 1, &prep.povm[0])?;
    let rho = partial_trace(&rho, &[0, 2, 3])?;
    let rho = beam_splitter_unitary(config.bs2, work).apply_density(&rho, 2, 1)?;
    let (rho, _) = apply_diagonal_povm(&rho, 1, &prep.povm[1])?;
    let (rho, _) = apply_diagonal_povm(&rho, 2, &prep.povm[2])?;
    finish(config, pattern, correction, partial_trace(&rho, &[0])?)
}

/// Heralded output rate, `probability_per_pulse * rep_rate`.
pub fn detection_rate(result: &TruncationResult, config: &QsdConfig) -> f64 {
    result.probability_per_pulse * config.rep_rate
}

/// Detector assignments for D1 and D2; D3 stays as configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// D1 CPC, D2 SPC.
    A,
    /// D1 CPC, D2 CPC.
    B,
    /// D1 SPC, D2 SPC.
    C,
    /// D1 SPC, D2 CPC.
    D,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::A, Strategy::B, Strategy::C, Strategy::D];

    pub fn kinds(self) -> (DetectorKind, DetectorKind) {
        use DetectorKind::{Cpc, Spc};
        match self {
            Strategy::A => (Cpc, Spc),
            Strategy::B => (Cpc, Cpc),
            Strategy::C => (Spc, Spc),
            Strategy::D => (Spc, Cpc),
        }
    }

    /// `config` with D1 and D2 replaced by the strategy's detector kinds.
    /// Each keeps its configured efficiency and resolution time and takes
    /// the typical dark-count rate of its kind.
    pub fn apply(self, config: &QsdConfig) -> Result<QsdConfig> {
        let (k1, k2) = self.kinds();
        let swap = |d: DetectorModel, kind: DetectorKind| {
            DetectorModel::new(kind, d.eta(), kind.typical_dark_rate(), d.tau_res())
        };
        let mut out = config.clone();
        out.d1 = swap(config.d1, k1)?;
        out.d2 = swap(config.d2, k2)?;
        Ok(out)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::A => "a",
            Strategy::B => "b",
            Strategy::C => "c",
            Strategy::D => "d",
        })
    }
}

impl FromStr for Strategy {
    type Err = QsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Strategy::A),
            "b" => Ok(Strategy::B),
            "c" => Ok(Strategy::C),
            "d" => Ok(Strategy::D),
            other => Err(QsdError::InvalidParameter(format!(
                "unknown strategy '{other}'"
            ))),
        }
    }
}

/// Runs the standard (herald, one, none) pattern under a strategy.
pub fn run_strategy(strategy: Strategy, config: &QsdConfig) -> Result<TruncationResult> {
    realistic_truncation(
        &strategy.apply(config)?,
        ClickPattern::standard(),
        Correction::Auto,
    )
}
