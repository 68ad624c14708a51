//! Truncated Fock-space linear algebra.
//!
//! Every state lives on `k` bosonic modes, each truncated to the Fock levels
//! `0..n_max`. Flat basis indices are row-major with mode 0 varying slowest,
//! so `|n_0, n_1, ..., n_{k-1}>` sits at `sum_i n_i * n_max^(k-1-i)`.
//!
//! In the scissors pipeline the modes are ordered as the optical lines appear
//! in the input density operator: the signal line (a1, later b1) first, then
//! the idler c1, then the second BS1 port (a2/b2, later c2) and finally the
//! coherent input (b3, later c3).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QsdError, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Number of Fock levels retained per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutoffDim(usize);

impl CutoffDim {
    /// Cutoff used when nothing else is configured.
    pub const DEFAULT_LEVELS: usize = 16;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(QsdError::InvalidCutoff(n_max));
        }
        Ok(Self(n_max))
    }

    pub fn levels(self) -> usize {
        self.0
    }

    /// Smallest cutoff whose Poisson tail beyond `n_max - 1` stays below
    /// `tolerance` for a coherent state of mean photon number `mean`.
    pub fn for_coherent(mean: f64, tolerance: f64) -> Self {
        let mut n = 2;
        while poisson_tail(mean, n) >= tolerance {
            n += 1;
        }
        Self(n)
    }
}

impl Default for CutoffDim {
    fn default() -> Self {
        Self(Self::DEFAULT_LEVELS)
    }
}

/// Probability mass of a Poisson distribution with mean `mean` at counts `>= n`.
pub fn poisson_tail(mean: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    let mut term = (-mean).exp();
    let mut head = term;
    for k in 1..n {
        term *= mean / k as f64;
        head += term;
    }
    if head < 0.5 {
        return 1.0 - head;
    }
    // Small tail: sum it directly instead of subtracting from one.
    let mut k = n;
    term *= mean / k as f64;
    let mut tail = 0.0;
    while term > tail * 1e-17 {
        tail += term;
        k += 1;
        term *= mean / k as f64;
    }
    tail
}

/// Bijection between flat indices and per-mode occupation numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisIndexer {
    modes: usize,
    cutoff: CutoffDim,
    strides: Vec<usize>,
    dim: usize,
}

impl BasisIndexer {
    pub fn new(modes: usize, cutoff: CutoffDim) -> Result<Self> {
        if modes == 0 {
            return Err(QsdError::InvalidParameter(
                "a state needs at least one mode".into(),
            ));
        }
        let n = cutoff.levels();
        let dim = (0..modes)
            .try_fold(1usize, |acc, _| acc.checked_mul(n))
            .ok_or_else(|| {
                QsdError::InvalidParameter("Hilbert-space dimension overflows".into())
            })?;
        let mut strides = vec![1; modes];
        for m in (0..modes.saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * n;
        }
        Ok(Self {
            modes,
            cutoff,
            strides,
            dim,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> CutoffDim {
        self.cutoff
    }

    pub fn levels(&self) -> usize {
        self.cutoff.levels()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    /// Flat index of an occupation tuple. Panics on out-of-range occupations.
    pub fn flat_index(&self, occupations: &[usize]) -> usize {
        assert_eq!(
            occupations.len(),
            self.modes,
            "occupation tuple has wrong length"
        );
        occupations
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| {
                assert!(n < self.levels(), "occupation {n} beyond cutoff");
                n * s
            })
            .sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        (0..self.modes).map(|m| self.occupation(flat, m)).collect()
    }

    #[inline]
    pub fn occupation(&self, flat: usize, mode: usize) -> usize {
        (flat / self.strides[mode]) % self.levels()
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            Err(QsdError::ModeOutOfRange {
                mode,
                modes: self.modes,
            })
        } else {
            Ok(())
        }
    }
}

/// Pure state as a complex amplitude vector over the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
    indexer: BasisIndexer,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, indexer: BasisIndexer) -> Result<Self> {
        if amplitudes.len() != indexer.dim() {
            return Err(QsdError::ShapeMismatch {
                expected: indexer.dim(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
            indexer,
        })
    }

    /// Product Fock state `|n_0, n_1, ...>`.
    pub fn fock(occupations: &[usize], cutoff: CutoffDim) -> Result<Self> {
        let indexer = BasisIndexer::new(occupations.len(), cutoff)?;
        if let Some(&n) = occupations.iter().find(|&&n| n >= cutoff.levels()) {
            return Err(QsdError::InvalidParameter(format!(
                "occupation {n} does not fit below cutoff {}",
                cutoff.levels()
            )));
        }
        let mut amplitudes = DVector::zeros(indexer.dim());
        amplitudes[indexer.flat_index(occupations)] = ONE;
        Ok(Self {
            amplitudes,
            indexer,
        })
    }

    pub fn vacuum(modes: usize, cutoff: CutoffDim) -> Result<Self> {
        Self::fock(&vec![0; modes], cutoff)
    }

    pub fn indexer(&self) -> &BasisIndexer {
        &self.indexer
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, occupations: &[usize]) -> C64 {
        self.amplitudes[self.indexer.flat_index(occupations)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QsdError::ZeroNorm);
        }
        self.amplitudes.unscale_mut(norm);
        Ok(self)
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        self.amplitudes *= factor;
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.indexer != other.indexer {
            return Err(QsdError::ShapeMismatch {
                expected: self.indexer.dim(),
                actual: other.indexer.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        check_same_cutoff(&self.indexer, &other.indexer)?;
        let indexer = BasisIndexer::new(
            self.indexer.modes() + other.indexer.modes(),
            self.indexer.cutoff(),
        )?;
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        Ok(Self {
            amplitudes,
            indexer,
        })
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            indexer: self.indexer.clone(),
        }
    }

    /// Re-embed a state into a larger cutoff (zero padding), or a smaller one
    /// if every dropped amplitude is exactly zero.
    pub fn with_cutoff(&self, cutoff: CutoffDim) -> Result<PureState> {
        let indexer = BasisIndexer::new(self.indexer.modes(), cutoff)?;
        let mut out = DVector::zeros(indexer.dim());
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let occ = self.indexer.multi_index(i);
            if occ.iter().any(|&n| n >= cutoff.levels()) {
                if a != ZERO {
                    return Err(QsdError::CutoffTooSmall {
                        current: cutoff.levels(),
                        required: occ.iter().max().copied().unwrap_or(0) + 1,
                        tail: a.norm_sqr(),
                        tolerance: 0.0,
                    });
                }
                continue;
            }
            out[indexer.flat_index(&occ)] = a;
        }
        Ok(PureState {
            amplitudes: out,
            indexer,
        })
    }

    /// Unnormalized reduced density operator on `keep`, after weighting the
    /// traced modes with diagonal POVM entries.
    ///
    /// `weights` lists `(mode, diagonal)` pairs; each mode must be traced out.
    /// Traced modes without an entry are weighted by the identity.
    pub fn conditioned_reduction(
        &self,
        keep: &[usize],
        weights: &[(usize, &[f64])],
    ) -> Result<DensityOperator> {
        let split = ModeSplit::new(&self.indexer, keep)?;
        for &(mode, diag) in weights {
            self.indexer.check_mode(mode)?;
            if split.keep.contains(&mode) {
                return Err(QsdError::InvalidParameter(format!(
                    "mode {mode} is both kept and measured"
                )));
            }
            check_povm_diagonal(diag, self.indexer.levels())?;
        }
        let kept_dim = split.kept.dim();
        let mut matrix = DMatrix::<C64>::zeros(kept_dim, kept_dim);
        let mut column = vec![ZERO; kept_dim];
        for t in 0..split.traced_dim {
            let base = split.traced_offsets[t];
            let mut w = 1.0;
            for &(mode, diag) in weights {
                w *= diag[self.indexer.occupation(base, mode)].max(0.0);
            }
            if w == 0.0 {
                continue;
            }
            let mut any = false;
            for (k, slot) in column.iter_mut().enumerate() {
                *slot = self.amplitudes[base + split.kept_offsets[k]];
                any |= *slot != ZERO;
            }
            if !any {
                continue;
            }
            for (i, &ci) in column.iter().enumerate() {
                if ci == ZERO {
                    continue;
                }
                let ci = ci * w;
                for (j, &cj) in column.iter().enumerate() {
                    matrix[(i, j)] += ci * cj.conj();
                }
            }
        }
        Ok(DensityOperator {
            matrix,
            indexer: split.kept,
        })
    }
}

/// Density operator over the truncated multimode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
    indexer: BasisIndexer,
}

impl DensityOperator {
    pub fn from_matrix(matrix: DMatrix<C64>, indexer: BasisIndexer) -> Result<Self> {
        if matrix.nrows() != indexer.dim() || matrix.ncols() != indexer.dim() {
            return Err(QsdError::ShapeMismatch {
                expected: indexer.dim(),
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { matrix, indexer })
    }

    /// Operator diagonal in the Fock basis with the given weights.
    pub fn diagonal(weights: &[f64], indexer: BasisIndexer) -> Result<Self> {
        if weights.len() != indexer.dim() {
            return Err(QsdError::ShapeMismatch {
                expected: indexer.dim(),
                actual: weights.len(),
            });
        }
        let diag = DVector::from_iterator(weights.len(), weights.iter().map(|&w| C64::new(w, 0.0)));
        Ok(Self {
            matrix: DMatrix::from_diagonal(&diag),
            indexer,
        })
    }

    pub fn vacuum(modes: usize, cutoff: CutoffDim) -> Result<Self> {
        Ok(PureState::vacuum(modes, cutoff)?.to_density())
    }

    pub fn indexer(&self) -> &BasisIndexer {
        &self.indexer
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn modes(&self) -> usize {
        self.indexer.modes()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let tr = self.trace().re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(QsdError::ZeroNorm);
        }
        self.matrix.unscale_mut(tr);
        Ok(self)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.matrix.scale_mut(factor);
        self
    }

    /// Sum of two operators on the same basis.
    pub fn add(&self, other: &DensityOperator) -> Result<DensityOperator> {
        if self.indexer != other.indexer {
            return Err(QsdError::ShapeMismatch {
                expected: self.indexer.dim(),
                actual: other.indexer.dim(),
            });
        }
        Ok(DensityOperator {
            matrix: &self.matrix + &other.matrix,
            indexer: self.indexer.clone(),
        })
    }

    /// Largest entry-wise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Photon-number distribution of one mode.
    pub fn photon_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        self.indexer.check_mode(mode)?;
        let mut dist = vec![0.0; self.indexer.levels()];
        for i in 0..self.indexer.dim() {
            dist[self.indexer.occupation(i, mode)] += self.matrix[(i, i)].re;
        }
        Ok(dist)
    }

    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        Ok(self
            .photon_distribution(mode)?
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum())
    }

    /// Matrix element `<m|rho|n>` of a single-mode operator.
    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Re-embed into another cutoff; populated levels must fit.
    pub fn with_cutoff(&self, cutoff: CutoffDim) -> Result<DensityOperator> {
        let indexer = BasisIndexer::new(self.indexer.modes(), cutoff)?;
        let map: Vec<Option<usize>> = (0..self.indexer.dim())
            .map(|i| {
                let occ = self.indexer.multi_index(i);
                occ.iter()
                    .all(|&n| n < cutoff.levels())
                    .then(|| indexer.flat_index(&occ))
            })
            .collect();
        let mut matrix = DMatrix::zeros(indexer.dim(), indexer.dim());
        for (i, mi) in map.iter().enumerate() {
            for (j, mj) in map.iter().enumerate() {
                let v = self.matrix[(i, j)];
                match (mi, mj) {
                    (Some(a), Some(b)) => matrix[(*a, *b)] = v,
                    _ if v.norm() > 0.0 => {
                        return Err(QsdError::CutoffTooSmall {
                            current: cutoff.levels(),
                            required: self.indexer.levels(),
                            tail: v.norm(),
                            tolerance: 0.0,
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(DensityOperator { matrix, indexer })
    }
}

fn check_same_cutoff(a: &BasisIndexer, b: &BasisIndexer) -> Result<()> {
    if a.levels() != b.levels() {
        return Err(QsdError::CutoffMismatch {
            left: a.levels(),
            right: b.levels(),
        });
    }
    Ok(())
}

pub(crate) fn check_povm_diagonal(diag: &[f64], levels: usize) -> Result<()> {
    if diag.len() != levels {
        return Err(QsdError::InvalidPovm(format!(
            "element has {} entries, cutoff has {levels} levels",
            diag.len()
        )));
    }
    if let Some(bad) = diag.iter().find(|&&w| !(w >= -1e-12) || w > 1.0 + 1e-12) {
        return Err(QsdError::InvalidPovm(format!("entry {bad} outside [0, 1]")));
    }
    Ok(())
}

/// Precomputed split of a basis into kept and traced modes.
struct ModeSplit {
    keep: Vec<usize>,
    kept: BasisIndexer,
    traced_dim: usize,
    kept_offsets: Vec<usize>,
    traced_offsets: Vec<usize>,
}

impl ModeSplit {
    fn new(indexer: &BasisIndexer, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(QsdError::EmptyKeepSet);
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        for w in keep.windows(2) {
            if w[0] == w[1] {
                return Err(QsdError::DuplicateMode(w[0]));
            }
        }
        for &m in &keep {
            indexer.check_mode(m)?;
        }
        let traced: Vec<usize> = (0..indexer.modes()).filter(|m| !keep.contains(m)).collect();
        let kept = BasisIndexer::new(keep.len(), indexer.cutoff())?;
        let offsets = |modes: &[usize]| -> Vec<usize> {
            let sub = BasisIndexer::new(modes.len().max(1), indexer.cutoff()).expect("valid");
            let count = if modes.is_empty() { 1 } else { sub.dim() };
            (0..count)
                .map(|i| {
                    modes
                        .iter()
                        .enumerate()
                        .map(|(pos, &m)| sub.occupation(i, pos) * indexer.stride(m))
                        .sum()
                })
                .collect()
        };
        let kept_offsets = offsets(&keep);
        let traced_offsets = offsets(&traced);
        Ok(Self {
            keep,
            kept,
            traced_dim: traced_offsets.len(),
            kept_offsets,
            traced_offsets,
        })
    }
}

/// `a ⊗ b`, with the modes of `a` first.
pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    check_same_cutoff(&a.indexer, &b.indexer)?;
    let indexer = BasisIndexer::new(a.modes() + b.modes(), a.indexer.cutoff())?;
    Ok(DensityOperator {
        matrix: a.matrix.kronecker(&b.matrix),
        indexer,
    })
}

/// Trace out every mode not listed in `keep`. Kept modes retain their
/// relative order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let split = ModeSplit::new(&rho.indexer, keep)?;
    let kept_dim = split.kept.dim();
    let mut out = DMatrix::<C64>::zeros(kept_dim, kept_dim);
    for &base in &split.traced_offsets {
        for (i, &oi) in split.kept_offsets.iter().enumerate() {
            for (j, &oj) in split.kept_offsets.iter().enumerate() {
                out[(i, j)] += rho.matrix[(base + oi, base + oj)];
            }
        }
    }
    Ok(DensityOperator {
        matrix: out,
        indexer: split.kept,
    })
}

/// Weight `rho` by a POVM element that is diagonal in the Fock basis of `mode`.
///
/// Returns `sqrt(Π) rho sqrt(Π)` (unnormalized) and its trace, the outcome
/// probability when `rho` has unit trace.
pub fn apply_diagonal_povm<E: AsRef<[f64]>>(
    rho: &DensityOperator,
    mode: usize,
    element: E,
) -> Result<(DensityOperator, f64)> {
    let diag = element.as_ref();
    rho.indexer.check_mode(mode)?;
    check_povm_diagonal(diag, rho.indexer.levels())?;
    let roots: Vec<f64> = diag.iter().map(|w| w.max(0.0).sqrt()).collect();
    let dim = rho.indexer.dim();
    let scale: Vec<f64> = (0..dim)
        .map(|i| roots[rho.indexer.occupation(i, mode)])
        .collect();
    let mut matrix = rho.matrix.clone();
    for j in 0..dim {
        for i in 0..dim {
            matrix[(i, j)] *= scale[i] * scale[j];
        }
    }
    let probability = matrix.trace().re;
    Ok((
        DensityOperator {
            matrix,
            indexer: rho.indexer.clone(),
        },
        probability,
    ))
}

/// `<psi|rho|psi>`, clamped to `[0, 1]`.
pub fn fidelity_to_pure(rho: &DensityOperator, psi: &PureState) -> Result<f64> {
    if rho.indexer != psi.indexer {
        return Err(QsdError::ShapeMismatch {
            expected: rho.indexer.dim(),
            actual: psi.indexer.dim(),
        });
    }
    let v = &psi.amplitudes;
    let f = v.dotc(&(&rho.matrix * v)).re;
    Ok(f.clamp(0.0, 1.0))
}
