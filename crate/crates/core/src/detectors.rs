//! POVMs for photon-counting detectors with finite efficiency and dark counts.
//!
//! Every element is diagonal in the Fock basis. Dead time is not simulated;
//! it is folded into the efficiency `eta`.

use std::fmt;
use std::str::FromStr;

use crate::error::{QsdError, Result};
use crate::fock::CutoffDim;

/// Default resolution window of the counting electronics, in seconds.
pub const DEFAULT_TAU_RES: f64 = 10e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    /// Photon-number-discriminating counter.
    Pndc,
    /// Conventional click/no-click counter.
    Cpc,
    /// Single-photon counter resolving 0, 1 and "2 or more".
    Spc,
}

impl DetectorKind {
    /// Highest valid outcome label, if the kind has a finite outcome set.
    pub fn max_outcome(self) -> Option<u32> {
        match self {
            DetectorKind::Pndc => None,
            DetectorKind::Cpc => Some(1),
            DetectorKind::Spc => Some(2),
        }
    }

    /// Typical dark-count rate (s⁻¹) of commercial devices of this kind.
    pub fn typical_dark_rate(self) -> f64 {
        match self {
            DetectorKind::Cpc => 100.0,
            DetectorKind::Spc => 1e4,
            DetectorKind::Pndc => 0.0,
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Pndc => "PNDC",
            DetectorKind::Cpc => "CPC",
            DetectorKind::Spc => "SPC",
        })
    }
}

impl FromStr for DetectorKind {
    type Err = QsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PNDC" => Ok(DetectorKind::Pndc),
            "CPC" => Ok(DetectorKind::Cpc),
            "SPC" => Ok(DetectorKind::Spc),
            other => Err(QsdError::InvalidParameter(format!(
                "unknown detector kind '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    kind: DetectorKind,
    eta: f64,
    r_dark: f64,
    tau_res: f64,
}

impl DetectorModel {
    pub fn new(kind: DetectorKind, eta: f64, r_dark: f64, tau_res: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(QsdError::InvalidParameter(format!(
                "efficiency {eta} outside [0, 1]"
            )));
        }
        if !(r_dark >= 0.0) || !r_dark.is_finite() {
            return Err(QsdError::InvalidParameter(format!(
                "dark-count rate {r_dark} must be >= 0"
            )));
        }
        if !(tau_res >= 0.0) || !tau_res.is_finite() {
            return Err(QsdError::InvalidParameter(format!(
                "resolution time {tau_res} must be >= 0"
            )));
        }
        Ok(Self {
            kind,
            eta,
            r_dark,
            tau_res,
        })
    }

    /// Unit efficiency, no dark counts.
    pub fn ideal(kind: DetectorKind) -> Self {
        Self {
            kind,
            eta: 1.0,
            r_dark: 0.0,
            tau_res: DEFAULT_TAU_RES,
        }
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn r_dark(&self) -> f64 {
        self.r_dark
    }

    pub fn tau_res(&self) -> f64 {
        self.tau_res
    }

    /// Mean dark count per resolution window, `tau_res * r_dark`.
    pub fn nu(&self) -> f64 {
        self.tau_res * self.r_dark
    }

    pub fn with_kind(self, kind: DetectorKind) -> Self {
        Self { kind, ..self }
    }

    /// POVM element for an outcome label of this detector's kind.
    ///
    /// Labels count clicks: CPC uses 0 (no click) and 1 (click); SPC uses
    /// 0, 1 and 2 (two or more); PNDC accepts any count.
    pub fn element(&self, outcome: u32, cutoff: CutoffDim) -> Result<PovmElement> {
        match self.kind {
            DetectorKind::Pndc => povm_pndc(outcome, self, cutoff),
            DetectorKind::Cpc => povm_cpc(CpcOutcome::try_from(outcome)?, self, cutoff),
            DetectorKind::Spc => povm_spc(SpcOutcome::try_from(outcome)?, self, cutoff),
        }
    }

    /// Outcome labels forming a complete measurement, with PNDC counts
    /// truncated at `n_max + ceil(10 nu) + 10`.
    pub fn complete_outcomes(&self, cutoff: CutoffDim) -> Vec<u32> {
        match self.kind {
            DetectorKind::Pndc => (0..=pndc_count_bound(self.nu(), cutoff)).collect(),
            DetectorKind::Cpc => vec![0, 1],
            DetectorKind::Spc => vec![0, 1, 2],
        }
    }
}

fn pndc_count_bound(nu: f64, cutoff: CutoffDim) -> u32 {
    (cutoff.levels() as f64 + (10.0 * nu).ceil() + 10.0) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpcOutcome {
    NoClick,
    Click,
}

impl TryFrom<u32> for CpcOutcome {
    type Error = QsdError;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            0 => Ok(CpcOutcome::NoClick),
            1 => Ok(CpcOutcome::Click),
            _ => Err(QsdError::InvalidParameter(format!(
                "a conventional counter cannot report {v} clicks"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpcOutcome {
    Zero,
    One,
    TwoOrMore,
}

impl TryFrom<u32> for SpcOutcome {
    type Error = QsdError;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            0 => Ok(SpcOutcome::Zero),
            1 => Ok(SpcOutcome::One),
            2 => Ok(SpcOutcome::TwoOrMore),
            _ => Err(QsdError::InvalidParameter(format!(
                "a single-photon counter reports 0, 1 or 2 (two or more), got {v}"
            ))),
        }
    }
}

/// Diagonal POVM element over the Fock levels of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    diagonal: Vec<f64>,
    kind: DetectorKind,
    outcome: u32,
}

impl PovmElement {
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn outcome(&self) -> u32 {
        self.outcome
    }

    /// Human-readable outcome label.
    pub fn label(&self) -> String {
        outcome_label(self.kind, self.outcome)
    }
}

impl AsRef<[f64]> for PovmElement {
    fn as_ref(&self) -> &[f64] {
        &self.diagonal
    }
}

pub fn outcome_label(kind: DetectorKind, outcome: u32) -> String {
    match (kind, outcome) {
        (DetectorKind::Cpc, 0) => "no_click".into(),
        (DetectorKind::Cpc, _) => "click".into(),
        (DetectorKind::Spc, 2) => "2+".into(),
        (_, n) => n.to_string(),
    }
}

fn check_kind(model: &DetectorModel, kind: DetectorKind) -> Result<()> {
    if model.kind != kind {
        return Err(QsdError::InvalidParameter(format!(
            "{kind} POVM requested for a {} detector",
            model.kind
        )));
    }
    Ok(())
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn binomial(m: usize, n: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    let n = n.min(m - n);
    (0..n).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Poisson dark-count weight `e^{-nu} nu^k / k!`.
fn dark_weight(nu: f64, k: u32) -> f64 {
    if k == 0 {
        return (-nu).exp();
    }
    if nu == 0.0 {
        return 0.0;
    }
    (-nu + k as f64 * nu.ln() - ln_factorial(k)).exp()
}

fn no_click_entries(model: &DetectorModel, cutoff: CutoffDim) -> Vec<f64> {
    let miss = 1.0 - model.eta;
    let dark = (-model.nu()).exp();
    (0..cutoff.levels())
        .map(|m| dark * miss.powi(m as i32))
        .collect()
}

/// Photon-number-discriminating counter, outcome of `clicks` counts: entry
/// `m` is `sum_n e^{-nu} nu^(N-n)/(N-n)! eta^n (1-eta)^(m-n) C(m, n)`.
pub fn povm_pndc(clicks: u32, model: &DetectorModel, cutoff: CutoffDim) -> Result<PovmElement> {
    check_kind(model, DetectorKind::Pndc)?;
    let (eta, nu) = (model.eta, model.nu());
    let diagonal = (0..cutoff.levels())
        .map(|m| {
            (0..=(clicks as usize).min(m))
                .map(|n| {
                    dark_weight(nu, clicks - n as u32)
                        * eta.powi(n as i32)
                        * (1.0 - eta).powi((m - n) as i32)
                        * binomial(m, n)
                })
                .sum::<f64>()
                .min(1.0)
        })
        .collect();
    Ok(PovmElement {
        diagonal,
        kind: DetectorKind::Pndc,
        outcome: clicks,
    })
}

/// Conventional counter: no-click entry `e^{-nu} (1-eta)^m`, click is the complement.
pub fn povm_cpc(
    outcome: CpcOutcome,
    model: &DetectorModel,
    cutoff: CutoffDim,
) -> Result<PovmElement> {
    check_kind(model, DetectorKind::Cpc)?;
    let none = no_click_entries(model, cutoff);
    let (diagonal, label) = match outcome {
        CpcOutcome::NoClick => (none, 0),
        CpcOutcome::Click => (none.into_iter().map(|p| 1.0 - p).collect(), 1),
    };
    Ok(PovmElement {
        diagonal,
        kind: DetectorKind::Cpc,
        outcome: label,
    })
}

/// Single-photon counter. The one-click entry is
/// `e^{-nu} [nu (1-eta)^m + eta m (1-eta)^(m-1)]`; the `m^n` weight of the
/// textbook form coincides with `C(m, n)` for `n <= 1`.
pub fn povm_spc(
    outcome: SpcOutcome,
    model: &DetectorModel,
    cutoff: CutoffDim,
) -> Result<PovmElement> {
    check_kind(model, DetectorKind::Spc)?;
    let (eta, nu) = (model.eta, model.nu());
    let zero = no_click_entries(model, cutoff);
    let one: Vec<f64> = (0..cutoff.levels())
        .map(|m| {
            let dark = nu * (1.0 - eta).powi(m as i32);
            let real = if m == 0 {
                0.0
            } else {
                eta * m as f64 * (1.0 - eta).powi(m as i32 - 1)
            };
            (-nu).exp() * (dark + real)
        })
        .collect();
    let (diagonal, label) = match outcome {
        SpcOutcome::Zero => (zero, 0),
        SpcOutcome::One => (one, 1),
        SpcOutcome::TwoOrMore => (
            zero.iter()
                .zip(&one)
                .map(|(z, o)| (1.0 - z - o).max(0.0))
                .collect(),
            2,
        ),
    };
    Ok(PovmElement {
        diagonal,
        kind: DetectorKind::Spc,
        outcome: label,
    })
}

/// Largest deviation from `sum_N Π_N = 1` over the Fock levels of `cutoff`.
pub fn completeness_residual(model: &DetectorModel, cutoff: CutoffDim) -> Result<f64> {
    let mut sum = vec![0.0; cutoff.levels()];
    for outcome in model.complete_outcomes(cutoff) {
        for (s, w) in sum
            .iter_mut()
            .zip(model.element(outcome, cutoff)?.diagonal())
        {
            *s += w;
        }
    }
    Ok(sum.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max))
}
