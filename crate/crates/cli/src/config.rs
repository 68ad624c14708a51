//! Sweep configuration files.
//!
//! One `key = value` per line, `#` starts a comment. Keys are dotted
//! (`detectors.d1.kind = CPC`). A key prefixed with `sweep.` is swept over
//! either a numeric range `start:stop:step` (inclusive) or a comma-separated
//! list; list entries may be quoted when they contain commas themselves
//! (`sweep.pattern = "1,1,0", "1,2,1"`). Swept axes combine as a cartesian
//! product, the first declared axis varying slowest. Keys under `meta.` are
//! carried along verbatim and never interpreted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CliError, Result};

/// Keys describing one simulated configuration; these may be swept.
pub const POINT_KEYS: &[&str] = &[
    "alpha_sq",
    "alpha_phase",
    "bs.t_sq",
    "bs1.t_sq",
    "bs2.t_sq",
    "source.kind",
    "source.gamma_sq",
    "source.pump_phase",
    "source.pair_cutoff",
    "detectors.kind",
    "detectors.eta",
    "detectors.r_dark",
    "detectors.tau_res",
    "detectors.d1.kind",
    "detectors.d1.eta",
    "detectors.d1.r_dark",
    "detectors.d1.tau_res",
    "detectors.d2.kind",
    "detectors.d2.eta",
    "detectors.d2.r_dark",
    "detectors.d2.tau_res",
    "detectors.d3.kind",
    "detectors.d3.eta",
    "detectors.d3.r_dark",
    "detectors.d3.tau_res",
    "strategy",
    "pattern",
    "correction",
    "cutoff",
    "rep_rate",
    "scheme",
    "xi",
];

/// Keys that shape the whole run; these cannot be swept.
pub const GLOBAL_KEYS: &[&str] = &[
    "observables",
    "output",
    "on_impossible",
    "marginals",
    "wigner.x_min",
    "wigner.x_max",
    "wigner.p_min",
    "wigner.p_max",
    "wigner.nx",
    "wigner.np",
    "phase.nodes",
    "phase.n_theta",
    "phase.r_max",
];

/// Values of one swept key.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<String>),
}

impl SweepValues {
    /// Expanded values as config strings, in sweep order.
    pub fn expand(&self) -> Vec<String> {
        match self {
            SweepValues::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|i| {
                        let v = start + step * i as f64;
                        // Drop accumulated binary noise such as 0.30000000000000004.
                        let v = (v * 1e12).round() / 1e12;
                        format!("{v}")
                    })
                    .collect()
            }
            SweepValues::List(items) => items.clone(),
        }
    }

    fn to_text(&self) -> String {
        match self {
            SweepValues::Range { start, stop, step } => format!("{start}:{stop}:{step}"),
            SweepValues::List(items) => items
                .iter()
                .map(|s| {
                    if s.contains(',') || s.contains('"') {
                        format!("\"{s}\"")
                    } else {
                        s.clone()
                    }
                })
                .collect::<Vec<_>>()
                .join(", "),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: SweepValues,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepConfig {
    /// Fixed keys, point and global alike.
    pub settings: BTreeMap<String, String>,
    /// Swept keys in declaration order.
    pub sweeps: Vec<SweepAxis>,
    /// Free-form `meta.*` entries.
    pub meta: BTreeMap<String, String>,
}

fn split_list(raw: &str, line: usize) -> Result<Vec<String>> {
    let mut items = Vec::new();
    let mut rest = raw.trim();
    while !rest.is_empty() {
        let (item, tail) = if let Some(quoted) = rest.strip_prefix('"') {
            let end = quoted
                .find('"')
                .ok_or_else(|| CliError::validation(format!("line {line}: unterminated quote")))?;
            let tail = quoted[end + 1..].trim_start();
            let tail = match tail.strip_prefix(',') {
                Some(t) => t,
                None if tail.is_empty() => tail,
                None => {
                    return Err(CliError::validation(format!(
                        "line {line}: expected ',' after quoted value"
                    )))
                }
            };
            (quoted[..end].to_string(), tail)
        } else {
            match rest.split_once(',') {
                Some((item, tail)) => (item.trim().to_string(), tail),
                None => (rest.to_string(), ""),
            }
        };
        if item.is_empty() {
            return Err(CliError::validation(format!(
                "line {line}: empty list entry"
            )));
        }
        items.push(item);
        rest = tail.trim();
    }
    if items.is_empty() {
        return Err(CliError::validation(format!("line {line}: empty sweep")));
    }
    Ok(items)
}

fn parse_range(raw: &str, line: usize) -> Result<Option<SweepValues>> {
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Ok(None);
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::validation(format!("line {line}: '{s}' is not a number")))
    };
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(CliError::validation(format!(
            "line {line}: range {raw} is empty; need start <= stop and step > 0"
        )));
    }
    Ok(Some(SweepValues::Range { start, stop, step }))
}

fn strip_quotes(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(v)
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(pos) if !raw[..pos].contains('"') => &raw[..pos],
                _ => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::validation(format!("line {line}: expected 'key = value'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(CliError::validation(format!(
                    "line {line}: empty key or value"
                )));
            }
            if let Some(name) = key.strip_prefix("meta.") {
                cfg.meta
                    .insert(name.to_string(), strip_quotes(value).to_string());
            } else if let Some(name) = key.strip_prefix("sweep.") {
                if cfg.sweeps.iter().any(|a| a.key == name) {
                    return Err(CliError::validation(format!(
                        "line {line}: '{name}' swept twice"
                    )));
                }
                let values = match parse_range(value, line)? {
                    Some(range) => range,
                    None => SweepValues::List(split_list(value, line)?),
                };
                cfg.sweeps.push(SweepAxis {
                    key: name.to_string(),
                    values,
                });
            } else if cfg
                .settings
                .insert(key.to_string(), strip_quotes(value).to_string())
                .is_some()
            {
                return Err(CliError::validation(format!(
                    "line {line}: duplicate key '{key}'"
                )));
            }
        }
        Ok(cfg)
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "meta.{k} = {v}");
        }
        for (k, v) in &self.settings {
            if v.contains('#') || v.contains(',') {
                let _ = writeln!(out, "{k} = \"{v}\"");
            } else {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        for axis in &self.sweeps {
            let _ = writeln!(out, "sweep.{} = {}", axis.key, axis.values.to_text());
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(String::as_str)
    }

    /// Rejects unknown keys, unsweepable sweeps and keys both fixed and swept.
    pub fn check_keys(&self) -> Result<()> {
        for key in self.settings.keys() {
            if !POINT_KEYS.contains(&key.as_str()) && !GLOBAL_KEYS.contains(&key.as_str()) {
                return Err(CliError::validation(format!("unknown key '{key}'")));
            }
        }
        for axis in &self.sweeps {
            if GLOBAL_KEYS.contains(&axis.key.as_str()) {
                return Err(CliError::validation(format!(
                    "'{}' cannot be swept",
                    axis.key
                )));
            }
            if !POINT_KEYS.contains(&axis.key.as_str()) {
                return Err(CliError::validation(format!(
                    "unknown sweep key '{}'",
                    axis.key
                )));
            }
            if self.settings.contains_key(&axis.key) {
                return Err(CliError::validation(format!(
                    "'{}' is both fixed and swept",
                    axis.key
                )));
            }
        }
        Ok(())
    }

    /// Every grid point as a full key map, first sweep axis slowest.
    pub fn grid(&self) -> Vec<BTreeMap<String, String>> {
        let axes: Vec<(String, Vec<String>)> = self
            .sweeps
            .iter()
            .map(|a| (a.key.clone(), a.values.expand()))
            .collect();
        let mut points = vec![self.settings.clone()];
        for (key, values) in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# CPC fidelity scan
meta.description = fidelity vs intensity
alpha_phase = 0   # radians
detectors.kind = CPC
observables = fidelity, rate
sweep.detectors.eta = 1.0, 0.7
sweep.alpha_sq = 0:1:0.25
sweep.pattern = \"1,1,0\", \"1,0,1\"
";

    #[test]
    fn parses_settings_sweeps_and_meta() {
        let cfg = SweepConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.get("detectors.kind"), Some("CPC"));
        assert_eq!(cfg.get("alpha_phase"), Some("0"));
        assert_eq!(cfg.meta["description"], "fidelity vs intensity");
        assert_eq!(cfg.sweeps.len(), 3);
        assert_eq!(
            cfg.sweeps[1].values.expand(),
            vec!["0", "0.25", "0.5", "0.75", "1"]
        );
        assert_eq!(cfg.sweeps[2].values.expand(), vec!["1,1,0", "1,0,1"]);
        cfg.check_keys().unwrap();
    }

    #[test]
    fn grid_order_has_first_axis_slowest() {
        let cfg = SweepConfig::parse(SAMPLE).unwrap();
        let grid = cfg.grid();
        assert_eq!(grid.len(), 2 * 5 * 2);
        assert_eq!(grid[0]["detectors.eta"], "1.0");
        assert_eq!(grid[0]["pattern"], "1,1,0");
        assert_eq!(grid[1]["pattern"], "1,0,1");
        assert_eq!(grid[2]["alpha_sq"], "0.25");
        assert_eq!(grid[10]["detectors.eta"], "0.7");
    }

    #[test]
    fn canonical_text_round_trips() {
        let cfg = SweepConfig::parse(SAMPLE).unwrap();
        assert_eq!(SweepConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn range_expansion_is_clean() {
        let v = SweepValues::Range {
            start: 0.0,
            stop: 4.0,
            step: 0.1,
        }
        .expand();
        assert_eq!(v.len(), 41);
        assert_eq!(v[3], "0.3");
        assert_eq!(v[40], "4");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(SweepConfig::parse("alpha_sq").is_err());
        assert!(SweepConfig::parse("alpha_sq = 1\nalpha_sq = 2").is_err());
        assert!(SweepConfig::parse("sweep.alpha_sq = 1:0:0.1").is_err());
        assert!(SweepConfig::parse("sweep.alpha_sq = 0:1:0").is_err());
        assert!(SweepConfig::parse("sweep.pattern = \"1,1,0").is_err());
        let cfg = SweepConfig::parse("bogus = 1").unwrap();
        assert!(cfg.check_keys().is_err());
        let cfg = SweepConfig::parse("sweep.observables = fidelity, rate").unwrap();
        assert!(cfg.check_keys().is_err());
        let cfg = SweepConfig::parse("alpha_sq = 1\nsweep.alpha_sq = 0, 1").unwrap();
        assert!(cfg.check_keys().is_err());
    }
}
