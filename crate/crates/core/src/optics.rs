//! Optical sources and passive elements in the truncated Fock basis.

use nalgebra::DMatrix;

use crate::error::{QsdError, Result};
use crate::fock::{BasisIndexer, CutoffDim, DensityOperator, PureState, C64, ONE, ZERO};

/// Tolerance for the coherent-state tail mass discarded by the cutoff.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Complex transmission and reflection amplitudes of a lossless beam splitter.
///
/// The first input port maps as `a† -> t a† - r* b†` and the second as
/// `b† -> r a† + t* b†`, which fixes `|00>` and conserves photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterParams {
    t: C64,
    r: C64,
}

impl BeamSplitterParams {
    pub fn new(t: C64, r: C64) -> Result<Self> {
        let total = t.norm_sqr() + r.norm_sqr();
        if (total - 1.0).abs() > 1e-12 {
            return Err(QsdError::InvalidParameter(format!(
                "beam splitter |t|^2 + |r|^2 = {total}, expected 1"
            )));
        }
        Ok(Self { t, r })
    }

    /// Real transmission and imaginary reflection: `t = sqrt(T)`, `r = i sqrt(1 - T)`.
    pub fn from_transmittance(transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(QsdError::InvalidParameter(format!(
                "transmittance {transmittance} outside [0, 1]"
            )));
        }
        Ok(Self {
            t: C64::new(transmittance.sqrt(), 0.0),
            r: C64::new(0.0, (1.0 - transmittance).sqrt()),
        })
    }

    /// 50:50 splitter in the default phase convention.
    pub fn balanced() -> Self {
        Self::from_transmittance(0.5).expect("valid transmittance")
    }

    pub fn identity() -> Self {
        Self { t: ONE, r: ZERO }
    }

    pub fn t(&self) -> C64 {
        self.t
    }

    pub fn r(&self) -> C64 {
        self.r
    }

    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// Parameters of the inverse transformation, `(t*, -r)`.
    pub fn inverse(&self) -> Self {
        Self {
            t: self.t.conj(),
            r: -self.r,
        }
    }
}

/// Beam-splitter unitary stored block by block in total photon number.
///
/// Block `N` acts on `|j, N - j>` for `j = 0..=N` (photons in the first port
/// listed first) and is exactly unitary; the cutoff only bites when a state
/// is embedded in a truncated two-mode space.
#[derive(Debug, Clone)]
pub struct BeamSplitterUnitary {
    levels: usize,
    blocks: Vec<DMatrix<C64>>,
}

impl BeamSplitterUnitary {
    pub fn new(params: BeamSplitterParams, cutoff: CutoffDim) -> Self {
        let levels = cutoff.levels();
        let max_total = 2 * (levels - 1);
        let blocks = (0..=max_total).map(|n| block(params, n)).collect();
        Self { levels, blocks }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Block for total photon number `total`.
    pub fn block(&self, total: usize) -> &DMatrix<C64> {
        &self.blocks[total]
    }

    /// Blocks with every basis state below the cutoff.
    pub fn complete_blocks(&self) -> impl Iterator<Item = (usize, &DMatrix<C64>)> {
        self.blocks.iter().enumerate().take(self.levels)
    }

    /// Dense `n_max^2 x n_max^2` matrix in the two-mode basis (first port slowest).
    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.levels;
        let mut m = DMatrix::zeros(n * n, n * n);
        for (total, blk) in self.blocks.iter().enumerate() {
            for j_in in 0..=total {
                let k_in = total - j_in;
                if j_in >= n || k_in >= n {
                    continue;
                }
                for j_out in 0..=total {
                    let k_out = total - j_out;
                    if j_out >= n || k_out >= n {
                        continue;
                    }
                    m[(j_out * n + k_out, j_in * n + k_in)] = blk[(j_out, j_in)];
                }
            }
        }
        m
    }

    /// Applies the unitary to modes `(first, second)` of a vector laid out
    /// with `indexer`.
    fn apply_to_slice(
        &self,
        data: &mut [C64],
        indexer: &BasisIndexer,
        first: usize,
        second: usize,
    ) {
        let n = self.levels;
        let (sa, sb) = (indexer.stride(first), indexer.stride(second));
        let mut input = vec![ZERO; 2 * n];
        let mut output = vec![ZERO; 2 * n];
        for base in 0..indexer.dim() {
            if indexer.occupation(base, first) != 0 || indexer.occupation(base, second) != 0 {
                continue;
            }
            for total in 0..=2 * (n - 1) {
                let lo = total.saturating_sub(n - 1);
                let hi = total.min(n - 1);
                let mut any = false;
                for j in lo..=hi {
                    let v = data[base + j * sa + (total - j) * sb];
                    input[j] = v;
                    any |= v != ZERO;
                }
                if !any {
                    continue;
                }
                let blk = &self.blocks[total];
                for (jo, out) in output.iter_mut().enumerate().take(hi + 1).skip(lo) {
                    let mut acc = ZERO;
                    for (ji, &x) in input.iter().enumerate().take(hi + 1).skip(lo) {
                        acc += blk[(jo, ji)] * x;
                    }
                    *out = acc;
                }
                for j in lo..=hi {
                    data[base + j * sa + (total - j) * sb] = output[j];
                }
            }
        }
    }

    pub fn apply_pure(&self, psi: &mut PureState, first: usize, second: usize) -> Result<()> {
        check_pair(psi.indexer(), first, second, self.levels)?;
        let indexer = psi.indexer().clone();
        self.apply_to_slice(psi.amplitudes_mut().as_mut_slice(), &indexer, first, second);
        Ok(())
    }

    pub fn apply_density(
        &self,
        rho: &DensityOperator,
        first: usize,
        second: usize,
    ) -> Result<DensityOperator> {
        let indexer = rho.indexer().clone();
        check_pair(&indexer, first, second, self.levels)?;
        let dim = indexer.dim();
        // U rho, then (U (U rho)^†)^† = U rho U^†.
        let mut m = rho.matrix().clone();
        for pass in 0..2 {
            for c in 0..dim {
                let col = &mut m.as_mut_slice()[c * dim..(c + 1) * dim];
                self.apply_to_slice(col, &indexer, first, second);
            }
            if pass == 0 {
                m = m.adjoint();
            }
        }
        DensityOperator::from_matrix(m.adjoint(), indexer)
    }
}

fn check_pair(indexer: &BasisIndexer, first: usize, second: usize, levels: usize) -> Result<()> {
    indexer.check_mode(first)?;
    indexer.check_mode(second)?;
    if first == second {
        return Err(QsdError::DuplicateMode(first));
    }
    if indexer.levels() != levels {
        return Err(QsdError::CutoffMismatch {
            left: indexer.levels(),
            right: levels,
        });
    }
    Ok(())
}

/// Block `total` of the splitter: column `m` is the image of `|m, total - m>`,
/// i.e. `(t a† - r* b†)^m (r a† + t* b†)^(total-m) |00> / sqrt(m! (total-m)!)`.
///
/// The product is expanded one creation operator at a time; every
/// intermediate vector is a normalized state, so no cancellation builds up.
fn block(params: BeamSplitterParams, total: usize) -> DMatrix<C64> {
    let (t, r) = (params.t, params.r);
    let first = (t, -r.conj());
    let second = (r, t.conj());
    let mut blk = DMatrix::zeros(total + 1, total + 1);
    let mut v = vec![ZERO; total + 1];
    let mut w = vec![ZERO; total + 1];
    for m in 0..=total {
        v.iter_mut().for_each(|x| *x = ZERO);
        v[0] = ONE;
        let mut photons = 0;
        let mut apply =
            |v: &mut Vec<C64>, (ca, cb): (C64, C64), count: usize, photons: &mut usize| {
                for i in 1..=count {
                    w.iter_mut().for_each(|x| *x = ZERO);
                    let k = *photons;
                    for j in 0..=k {
                        let x = v[j];
                        if x == ZERO {
                            continue;
                        }
                        w[j + 1] += ca * x * ((j + 1) as f64).sqrt();
                        w[j] += cb * x * ((k - j + 1) as f64).sqrt();
                    }
                    let norm = (i as f64).sqrt();
                    for j in 0..=k + 1 {
                        v[j] = w[j] / norm;
                    }
                    *photons += 1;
                }
            };
        apply(&mut v, second, total - m, &mut photons);
        apply(&mut v, first, m, &mut photons);
        for j in 0..=total {
            blk[(j, m)] = v[j];
        }
    }
    blk
}

/// Unitary for `params` on a cutoff, block-diagonal in total photon number.
pub fn beam_splitter_unitary(params: BeamSplitterParams, cutoff: CutoffDim) -> BeamSplitterUnitary {
    BeamSplitterUnitary::new(params, cutoff)
}

/// `U rho U†` on modes `(mode_a, mode_b)`, `mode_a` being the first port.
pub fn apply_beam_splitter(
    rho: &DensityOperator,
    mode_a: usize,
    mode_b: usize,
    params: BeamSplitterParams,
) -> Result<DensityOperator> {
    BeamSplitterUnitary::new(params, rho.indexer().cutoff()).apply_density(rho, mode_a, mode_b)
}

/// Coherent state `|alpha>` truncated to `cutoff` and renormalized.
///
/// Fock amplitudes are `exp(-|alpha|^2/2) alpha^n / sqrt(n!)`, the expansion of
/// `exp(-|alpha|^2/2) sum alpha^n (a†)^n / n! |0>` on normalized number states.
pub fn coherent_state(alpha: C64, cutoff: CutoffDim) -> Result<PureState> {
    coherent_state_with_tolerance(alpha, cutoff, DEFAULT_TAIL_TOLERANCE)
}

pub fn coherent_state_with_tolerance(
    alpha: C64,
    cutoff: CutoffDim,
    tolerance: f64,
) -> Result<PureState> {
    let mean = alpha.norm_sqr();
    let tail = crate::fock::poisson_tail(mean, cutoff.levels());
    if tail >= tolerance {
        return Err(QsdError::CutoffTooSmall {
            current: cutoff.levels(),
            required: CutoffDim::for_coherent(mean, tolerance).levels(),
            tail,
            tolerance,
        });
    }
    let mut amps = Vec::with_capacity(cutoff.levels());
    let mut c = C64::new((-mean / 2.0).exp(), 0.0);
    for n in 0..cutoff.levels() {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    PureState::new(amps, BasisIndexer::new(1, cutoff)?)?.normalize()
}

/// Down-conversion source parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcParams {
    gamma: f64,
    pump_phase: f64,
    pair_cutoff: usize,
}

impl SpdcParams {
    pub const DEFAULT_PAIR_CUTOFF: usize = 3;

    pub fn new(gamma: f64, pump_phase: f64, pair_cutoff: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(QsdError::InvalidParameter(format!(
                "gamma {gamma} outside [0, 1)"
            )));
        }
        if pair_cutoff < 1 {
            return Err(QsdError::InvalidParameter(
                "pair cutoff must be at least 1".into(),
            ));
        }
        if !pump_phase.is_finite() {
            return Err(QsdError::InvalidParameter(
                "pump phase must be finite".into(),
            ));
        }
        Ok(Self {
            gamma,
            pump_phase,
            pair_cutoff,
        })
    }

    /// From the one-pair weight per pulse, `gamma^2`.
    pub fn from_pair_probability(gamma_sq: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma_sq) {
            return Err(QsdError::InvalidParameter(format!(
                "gamma^2 {gamma_sq} outside [0, 1)"
            )));
        }
        Self::new(gamma_sq.sqrt(), 0.0, Self::DEFAULT_PAIR_CUTOFF)
    }

    pub fn with_pair_cutoff(self, pair_cutoff: usize) -> Result<Self> {
        Self::new(self.gamma, self.pump_phase, pair_cutoff)
    }

    pub fn with_pump_phase(self, pump_phase: f64) -> Result<Self> {
        Self::new(self.gamma, pump_phase, self.pair_cutoff)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_sq(&self) -> f64 {
        self.gamma * self.gamma
    }

    pub fn pump_phase(&self) -> f64 {
        self.pump_phase
    }

    pub fn pair_cutoff(&self) -> usize {
        self.pair_cutoff
    }

    /// Weight `gamma^(2 (pair_cutoff + 1))` bounding the discarded multi-pair tail.
    pub fn tail_bound(&self) -> f64 {
        self.gamma_sq().powi(self.pair_cutoff as i32 + 1)
    }

    /// Renormalized pair-number distribution `(1 - g^2) g^(2k)`, `k = 0..=pair_cutoff`.
    pub fn pair_weights(&self) -> Vec<f64> {
        let g2 = self.gamma_sq();
        let raw: Vec<f64> = (0..=self.pair_cutoff)
            .map(|k| (1.0 - g2) * g2.powi(k as i32))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    fn check_cutoff(&self, cutoff: CutoffDim) -> Result<()> {
        if self.pair_cutoff >= cutoff.levels() {
            return Err(QsdError::CutoffTooSmall {
                current: cutoff.levels(),
                required: self.pair_cutoff + 1,
                tail: self.tail_bound(),
                tolerance: 0.0,
            });
        }
        Ok(())
    }
}

/// Two-mode squeezed vacuum `sqrt(1-g^2) sum (g e^{i theta})^k |k>|k>`, cut at
/// `pair_cutoff` pairs and renormalized. Mode order is (signal, idler).
pub fn spdc_pure(params: SpdcParams, cutoff: CutoffDim) -> Result<PureState> {
    params.check_cutoff(cutoff)?;
    let indexer = BasisIndexer::new(2, cutoff)?;
    let mut amps = vec![ZERO; indexer.dim()];
    let step = C64::from_polar(params.gamma, params.pump_phase);
    let mut c = C64::new((1.0 - params.gamma_sq()).sqrt(), 0.0);
    for k in 0..=params.pair_cutoff {
        amps[indexer.flat_index(&[k, k])] = c;
        c *= step;
    }
    PureState::new(amps, indexer)?.normalize()
}

/// Phase-averaged down-conversion output, diagonal in `|k,k>`.
pub fn spdc_mixed(params: SpdcParams, cutoff: CutoffDim) -> Result<DensityOperator> {
    params.check_cutoff(cutoff)?;
    let indexer = BasisIndexer::new(2, cutoff)?;
    let mut diag = vec![0.0; indexer.dim()];
    for (k, w) in params.pair_weights().into_iter().enumerate() {
        diag[indexer.flat_index(&[k, k])] = w;
    }
    DensityOperator::diagonal(&diag, indexer)
}

/// Amplitude of an attenuated coherent beam, `sqrt(xi) alpha`.
pub fn attenuate(alpha: C64, xi: f64) -> Result<C64> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(QsdError::InvalidParameter(format!(
            "attenuation {xi} outside [0, 1]"
        )));
    }
    Ok(alpha * xi.sqrt())
}
