//! Resolution of one grid point's key map into simulator inputs.

use std::collections::BTreeMap;
use std::str::FromStr;

use qsd_core::detectors::{DetectorKind, DetectorModel, DEFAULT_TAU_RES};
use qsd_core::optics::{BeamSplitterParams, SpdcParams};
use qsd_core::pipeline::{
    default_cutoff, ClickPattern, Correction, QsdConfig, Source, Strategy,
    DEFAULT_PAIR_PROBABILITY, DEFAULT_REP_RATE,
};
use qsd_core::{CutoffDim, C64};

use crate::error::{CliError, Result};

/// Which state the state-based observables look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Realistic scheme with the configured source and detectors.
    Realistic,
    /// Perfect detectors and a single-photon input.
    Ideal,
    /// The target superposition itself.
    Desired,
    /// Target with all coherence between `|0>` and `|1>` removed.
    Dephased,
    /// Attenuated input `|sqrt(xi) alpha>`.
    Coherent,
    /// Coherent state of optimal amplitude.
    CoherentOpt,
    /// The coherent input `|alpha>`.
    Input,
}

impl FromStr for Scheme {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "realistic" => Scheme::Realistic,
            "ideal" => Scheme::Ideal,
            "desired" => Scheme::Desired,
            "dephased" => Scheme::Dephased,
            "coherent" => Scheme::Coherent,
            "coherent_opt" => Scheme::CoherentOpt,
            "input" => Scheme::Input,
            other => return Err(CliError::validation(format!("unknown scheme '{other}'"))),
        })
    }
}

/// Fully resolved inputs for one grid point.
#[derive(Debug, Clone)]
pub struct Point {
    pub config: QsdConfig,
    pub pattern: ClickPattern,
    pub correction: Correction,
    pub scheme: Scheme,
    pub strategy: Option<Strategy>,
    pub xi: f64,
}

fn core_err(key: &str) -> impl FnOnce(qsd_core::QsdError) -> CliError + '_ {
    move |e| CliError::validation(format!("{key}: {e}"))
}

struct Lookup<'a>(&'a BTreeMap<String, String>);

impl<'a> Lookup<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.0.get(key).map(String::as_str)
    }

    fn num(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::validation(format!("{key}: '{v}' is not a finite number"))
                }),
        }
    }

    /// First key present wins; falls back to `default`.
    fn num_chain(&self, keys: &[&str], default: f64) -> Result<f64> {
        match keys.iter().find(|k| self.raw(k).is_some()) {
            Some(k) => self.num(k, default),
            None => Ok(default),
        }
    }

    fn raw_chain(&self, keys: &[&str]) -> Option<&'a str> {
        keys.iter().find_map(|k| self.raw(k))
    }

    fn parse<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<T>()
                .map_err(|e| CliError::validation(format!("{key}: {e}"))),
        }
    }
}

fn splitter(look: &Lookup, which: &str) -> Result<BeamSplitterParams> {
    let key = format!("{which}.t_sq");
    let t_sq = look.num_chain(&[&key, "bs.t_sq"], 0.5)?;
    BeamSplitterParams::from_transmittance(t_sq).map_err(core_err(&key))
}

fn detector(look: &Lookup, which: &str) -> Result<DetectorModel> {
    let k = |field: &str| format!("detectors.{which}.{field}");
    let g = |field: &str| format!("detectors.{field}");
    let kind = match look.raw_chain(&[&k("kind"), &g("kind")]) {
        Some(v) => v
            .parse::<DetectorKind>()
            .map_err(core_err("detector kind"))?,
        None => DetectorKind::Cpc,
    };
    let eta = look.num_chain(&[&k("eta"), &g("eta")], 0.7)?;
    let r_dark = look.num_chain(&[&k("r_dark"), &g("r_dark")], kind.typical_dark_rate())?;
    let tau = look.num_chain(&[&k("tau_res"), &g("tau_res")], DEFAULT_TAU_RES)?;
    DetectorModel::new(kind, eta, r_dark, tau).map_err(core_err(&format!("detectors.{which}")))
}

fn source(look: &Lookup) -> Result<Source> {
    let gamma_sq = look.num("source.gamma_sq", DEFAULT_PAIR_PROBABILITY)?;
    let phase = look.num("source.pump_phase", 0.0)?;
    let pairs = look.num("source.pair_cutoff", SpdcParams::DEFAULT_PAIR_CUTOFF as f64)?;
    if pairs.fract() != 0.0 || pairs < 1.0 {
        return Err(CliError::validation(
            "source.pair_cutoff must be a positive integer",
        ));
    }
    if !(0.0..1.0).contains(&gamma_sq) {
        return Err(CliError::validation(format!(
            "source.gamma_sq {gamma_sq} outside [0, 1)"
        )));
    }
    let params =
        SpdcParams::new(gamma_sq.sqrt(), phase, pairs as usize).map_err(core_err("source"))?;
    match look.raw("source.kind").unwrap_or("mixed") {
        "mixed" => Ok(Source::SpdcMixed(params)),
        "pure" => Ok(Source::SpdcPure(params)),
        "exact_pair" => Ok(Source::ExactPair),
        other => Err(CliError::validation(format!(
            "unknown source kind '{other}'"
        ))),
    }
}

fn cutoff(look: &Lookup, mean: f64) -> Result<CutoffDim> {
    match look.raw("cutoff").unwrap_or("auto") {
        "auto" => Ok(default_cutoff(mean)),
        v => {
            let n: usize = v.parse().map_err(|_| {
                CliError::validation(format!("cutoff: '{v}' is neither 'auto' nor an integer"))
            })?;
            CutoffDim::new(n).map_err(core_err("cutoff"))
        }
    }
}

impl Point {
    pub fn resolve(map: &BTreeMap<String, String>) -> Result<Self> {
        let look = Lookup(map);
        let mean = look.num("alpha_sq", 1.0)?;
        if mean < 0.0 {
            return Err(CliError::validation("alpha_sq must be non-negative"));
        }
        let alpha = C64::from_polar(mean.sqrt(), look.num("alpha_phase", 0.0)?);
        let mut config = QsdConfig {
            alpha,
            bs1: splitter(&look, "bs1")?,
            bs2: splitter(&look, "bs2")?,
            source: source(&look)?,
            d1: detector(&look, "d1")?,
            d2: detector(&look, "d2")?,
            d3: detector(&look, "d3")?,
            cutoff: cutoff(&look, mean)?,
            rep_rate: look.num("rep_rate", DEFAULT_REP_RATE)?,
            tail_tolerance: qsd_core::optics::DEFAULT_TAIL_TOLERANCE,
        };
        let strategy = match look.raw("strategy").unwrap_or("none") {
            "none" => None,
            s => Some(s.parse::<Strategy>().map_err(core_err("strategy"))?),
        };
        if let Some(s) = strategy {
            config = s.apply(&config).map_err(core_err("strategy"))?;
        }
        config.validate().map_err(core_err("configuration"))?;
        let tail = qsd_core::fock::poisson_tail(mean, config.cutoff.levels());
        if tail >= config.tail_tolerance {
            return Err(CliError::validation(format!(
                "cutoff {} leaves coherent tail {tail:.3e} at alpha_sq = {mean}; need at least {} levels",
                config.cutoff.levels(),
                CutoffDim::for_coherent(mean, config.tail_tolerance).levels()
            )));
        }
        let pattern = look.parse("pattern", ClickPattern::standard())?;
        for (model, label) in [
            (config.d1, pattern.n1),
            (config.d2, pattern.n2),
            (config.d3, pattern.n3),
        ] {
            if let Some(max) = model.kind().max_outcome() {
                if label > max {
                    return Err(CliError::validation(format!(
                        "pattern {pattern}: a {} detector cannot report {label}",
                        model.kind()
                    )));
                }
            }
        }
        let xi = look.num("xi", 1.0)?;
        if !(0.0..=1.0).contains(&xi) {
            return Err(CliError::validation(format!("xi {xi} outside [0, 1]")));
        }
        Ok(Self {
            config,
            pattern,
            correction: look.parse("correction", Correction::Auto)?,
            scheme: look.parse("scheme", Scheme::Realistic)?,
            strategy,
            xi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults() {
        let p = Point::resolve(&BTreeMap::new()).unwrap();
        assert_eq!(p.config.d1.kind(), DetectorKind::Cpc);
        assert_eq!(p.config.d1.r_dark(), 100.0);
        assert_eq!(p.config.d2.eta(), 0.7);
        assert_eq!(p.config.cutoff.levels(), 16);
        assert_eq!(p.pattern, ClickPattern::standard());
        assert_eq!(p.scheme, Scheme::Realistic);
    }

    #[test]
    fn per_detector_keys_override_shared_ones() {
        let p = Point::resolve(&map(&[
            ("detectors.kind", "SPC"),
            ("detectors.d1.kind", "CPC"),
            ("detectors.eta", "0.4"),
            ("detectors.d3.eta", "0.9"),
        ]))
        .unwrap();
        assert_eq!(p.config.d1.kind(), DetectorKind::Cpc);
        assert_eq!(p.config.d2.kind(), DetectorKind::Spc);
        assert_eq!(p.config.d2.r_dark(), 1e4);
        assert_eq!(p.config.d1.eta(), 0.4);
        assert_eq!(p.config.d3.eta(), 0.9);
    }

    #[test]
    fn strategy_assigns_detector_kinds() {
        let p = Point::resolve(&map(&[("strategy", "d")])).unwrap();
        assert_eq!(p.config.d1.kind(), DetectorKind::Spc);
        assert_eq!(p.config.d2.kind(), DetectorKind::Cpc);
        assert_eq!(p.config.d1.r_dark(), 1e4);
    }

    #[test]
    fn invalid_points() {
        for bad in [
            vec![("detectors.eta", "1.5")],
            vec![("alpha_sq", "-1")],
            vec![("cutoff", "8"), ("alpha_sq", "4")],
            vec![("pattern", "1,2,0")],
            vec![("scheme", "magic")],
            vec![("bs1.t_sq", "x")],
            vec![("source.pair_cutoff", "1.5")],
        ] {
            assert!(Point::resolve(&map(&bad)).is_err(), "{bad:?}");
        }
    }
}
