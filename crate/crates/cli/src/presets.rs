//! Built-in sweeps that regenerate figure data (fig2a to fig12).
//!
//! A preset is a figure; it holds one or more series, each a complete sweep
//! config written to `<series id>.csv`. Series ids start with their panel
//! id, so `fig10b` selects one panel and `fig10` selects all of them.

use crate::config::SweepConfig;
use crate::error::{CliError, Result};

/// One CSV file of a figure.
#[derive(Debug, Clone, Copy)]
pub struct Series {
    pub id: &'static str,
    /// What to plot against what.
    pub axes: &'static str,
    pub config: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub id: &'static str,
    pub description: &'static str,
    pub series: &'static [Series],
}

pub const PRESETS: &[Preset] = &[
    Preset {
        id: "fig2",
        description: "Perfect scissors: fidelity over both transmittances at |alpha|^2 = 1, \
                      detection probability for equal splitters",
        series: &[
            Series {
                id: "fig2a",
                axes: "surface of ideal_fidelity and ideal_probability over bs1.t_sq (x) and bs2.t_sq (y); \
                       the corners (0,0) and (1,1) herald nothing and are NaN",
                config: "observables = ideal_fidelity, ideal_probability\n\
                         alpha_sq = 1\n\
                         on_impossible = skip\n\
                         sweep.bs1.t_sq = 0:1:0.05\n\
                         sweep.bs2.t_sq = 0:1:0.05\n",
            },
            Series {
                id: "fig2b",
                axes: "ideal_probability against bs.t_sq, one curve per alpha_sq",
                config: "observables = ideal_probability\n\
                         sweep.alpha_sq = 0.1, 0.5, 1.0, 1.5, 2.0\n\
                         sweep.bs.t_sq = 0:1:0.01\n",
            },
        ],
    },
    Preset {
        id: "fig4",
        description: "Number-resolving detectors, gamma^2 = 5e-4: fidelity for D2/D3 outcomes (1,0), (2,1), (3,2)",
        series: &[
            Series {
                id: "fig4a",
                axes: "fidelity against alpha_sq, one curve per pattern; eta = 0.5, r_dark = 1000/s",
                config: "observables = fidelity, probability, rate\n\
                         detectors.kind = PNDC\n\
                         detectors.eta = 0.5\n\
                         detectors.r_dark = 1000\n\
                         sweep.pattern = \"1,1,0\", \"1,2,1\", \"1,3,2\"\n\
                         sweep.alpha_sq = 0:4:0.1\n",
            },
            Series {
                id: "fig4b",
                axes: "fidelity against detectors.eta at alpha_sq = 0.4, one curve per (pattern, r_dark); \
                       r_dark 100/s solid, 1e4/s dotted",
                config: "observables = fidelity, probability, rate\n\
                         alpha_sq = 0.4\n\
                         detectors.kind = PNDC\n\
                         sweep.pattern = \"1,1,0\", \"1,2,1\", \"1,3,2\"\n\
                         sweep.detectors.r_dark = 100, 10000\n\
                         sweep.detectors.eta = 0:1:0.05\n",
            },
        ],
    },
    Preset {
        id: "fig5",
        description: "Conventional photon counters, r_dark = 100/s, gamma^2 = 5e-4",
        series: &[Series {
            id: "fig5",
            axes: "fidelity (left) and rate in heralds per second (right) against alpha_sq, one curve per eta",
            config: "observables = fidelity, probability, rate\n\
                     detectors.kind = CPC\n\
                     detectors.r_dark = 100\n\
                     sweep.detectors.eta = 1.0, 0.7, 0.5, 0.3, 0.1, 0.0\n\
                     sweep.alpha_sq = 0:4:0.1\n",
        }],
    },
    Preset {
        id: "fig6",
        description: "Single-photon counters, r_dark = 1e4/s, gamma^2 = 5e-4",
        series: &[Series {
            id: "fig6",
            axes: "fidelity (left) and rate in heralds per second (right) against alpha_sq, one curve per eta",
            config: "observables = fidelity, probability, rate\n\
                     detectors.kind = SPC\n\
                     detectors.r_dark = 10000\n\
                     sweep.detectors.eta = 1.0, 0.7, 0.5, 0.3, 0.1, 0.0\n\
                     sweep.alpha_sq = 0:4:0.1\n",
        }],
    },
    Preset {
        id: "fig7",
        description: "Detector strategies a-d at eta = 0.7, gamma^2 = 5e-4",
        series: &[Series {
            id: "fig7",
            axes: "fidelity (left) and rate (right) against alpha_sq, one curve per strategy",
            config: "observables = fidelity, probability, rate\n\
                     detectors.eta = 0.7\n\
                     sweep.strategy = a, b, c, d\n\
                     sweep.alpha_sq = 0:4:0.1\n",
        }],
    },
    Preset {
        id: "fig8",
        description: "Scissors output against a fully dephased qubit and the untruncated coherent state",
        series: &[
            Series {
                id: "fig8_scheme",
                axes: "fidelity against alpha_sq for CPC with eta = 1 (a) and 0.5 (b)",
                config: "observables = fidelity\n\
                         detectors.kind = CPC\n\
                         detectors.r_dark = 100\n\
                         sweep.detectors.eta = 1.0, 0.5\n\
                         sweep.alpha_sq = 0:4:0.1\n",
            },
            Series {
                id: "fig8_baselines",
                axes: "f_dephased (c) and f_coherent with beta = alpha (d) against alpha_sq",
                config: "observables = f_dephased, f_coherent\n\
                         xi = 1\n\
                         sweep.alpha_sq = 0:4:0.1\n",
            },
        ],
    },
    Preset {
        id: "fig9",
        description: "Scissors output against attenuated and optimally chosen coherent states",
        series: &[
            Series {
                id: "fig9_scheme",
                axes: "fidelity against alpha_sq for CPC with eta = 1.0 (a), 0.7 (b), 0.5 (c)",
                config: "observables = fidelity\n\
                         detectors.kind = CPC\n\
                         detectors.r_dark = 100\n\
                         sweep.detectors.eta = 1.0, 0.7, 0.5\n\
                         sweep.alpha_sq = 0:4:0.1\n",
            },
            Series {
                id: "fig9_baselines",
                axes: "f_coherent_opt (d) and f_coherent at xi = 0.5 (e) and xi = 1 (f) against alpha_sq; \
                       beta_sq_opt is the optimal coherent intensity",
                config: "observables = f_coherent, f_coherent_opt, beta_sq_opt\n\
                         sweep.xi = 0.5, 1\n\
                         sweep.alpha_sq = 0:4:0.1\n",
            },
        ],
    },
    Preset {
        id: "fig10",
        description: "Wigner function of the output for alpha_sq = 0.8, phase pi/2",
        series: &[
            Series {
                id: "fig10a",
                axes: "w over (x, p) for the perfect scissors",
                config: "observables = wigner, wigner_min, wigner_neg_volume\n\
                         scheme = ideal\n\
                         alpha_sq = 0.8\n\
                         alpha_phase = 1.5707963267948966\n",
            },
            Series {
                id: "fig10b",
                axes: "w over (x, p) for CPC, eta = 0.7, r_dark = 100/s, gamma^2 = 5e-4",
                config: "observables = wigner, wigner_min, wigner_neg_volume\n\
                         detectors.kind = CPC\n\
                         detectors.eta = 0.7\n\
                         detectors.r_dark = 100\n\
                         alpha_sq = 0.8\n\
                         alpha_phase = 1.5707963267948966\n",
            },
        ],
    },
    Preset {
        id: "fig11",
        description: "Wigner cuts and marginals against detector efficiency, alpha_sq = 0.4 (a) and 4.0 (b)",
        series: &[
            Series {
                id: "fig11a_ideal",
                axes: "marginal value against coord for each axis; perfect scissors (solid)",
                config: "observables = marginals\n\
                         scheme = ideal\n\
                         alpha_sq = 0.4\n",
            },
            Series {
                id: "fig11a_eta",
                axes: "marginal value against coord for each axis; CPC with eta = 0.5, 0.7, 1",
                config: "observables = marginals\n\
                         detectors.kind = CPC\n\
                         alpha_sq = 0.4\n\
                         sweep.detectors.eta = 0.5, 0.7, 1.0\n",
            },
            Series {
                id: "fig11b_ideal",
                axes: "marginal value against coord for each axis; perfect scissors (solid)",
                config: "observables = marginals\n\
                         scheme = ideal\n\
                         alpha_sq = 4.0\n",
            },
            Series {
                id: "fig11b_eta",
                axes: "marginal value against coord for each axis; CPC with eta = 0.5, 0.7, 1",
                config: "observables = marginals\n\
                         detectors.kind = CPC\n\
                         alpha_sq = 4.0\n\
                         sweep.detectors.eta = 0.5, 0.7, 1.0\n",
            },
        ],
    },
    Preset {
        id: "fig12",
        description: "Wigner phase distributions, alpha_sq = 1.0 (a) and 0.4 (b)",
        series: &[
            Series {
                id: "fig12a_reference",
                axes: "p_theta against theta for the coherent input (i) and the perfect scissors (ii)",
                config: "observables = phase_dist, phase_min\n\
                         alpha_sq = 1.0\n\
                         sweep.scheme = input, ideal\n",
            },
            Series {
                id: "fig12a_eta",
                axes: "p_theta against theta for CPC with eta = 1.0, 0.5, 0.2",
                config: "observables = phase_dist, phase_min\n\
                         detectors.kind = CPC\n\
                         alpha_sq = 1.0\n\
                         sweep.detectors.eta = 1.0, 0.5, 0.2\n",
            },
            Series {
                id: "fig12b_reference",
                axes: "p_theta against theta for the coherent input (i) and the perfect scissors (ii)",
                config: "observables = phase_dist, phase_min\n\
                         alpha_sq = 0.4\n\
                         sweep.scheme = input, ideal\n",
            },
            Series {
                id: "fig12b_eta",
                axes: "p_theta against theta for CPC with eta = 1.0, 0.5, 0.2",
                config: "observables = phase_dist, phase_min\n\
                         detectors.kind = CPC\n\
                         alpha_sq = 0.4\n\
                         sweep.detectors.eta = 1.0, 0.5, 0.2\n",
            },
        ],
    },
];

/// Series selected by a figure or panel id.
pub fn select(id: &str) -> Result<(&'static Preset, Vec<&'static Series>)> {
    for preset in PRESETS {
        let chosen: Vec<&Series> = if preset.id == id {
            preset.series.iter().collect()
        } else {
            preset
                .series
                .iter()
                .filter(|s| panel_of(s.id) == id)
                .collect()
        };
        if !chosen.is_empty() {
            return Ok((preset, chosen));
        }
    }
    Err(CliError::validation(format!(
        "unknown preset '{id}'; try list-presets"
    )))
}

/// `fig11a_eta` -> `fig11a`.
fn panel_of(series: &str) -> &str {
    series.split('_').next().unwrap_or(series)
}

impl Series {
    pub fn sweep(&self) -> SweepConfig {
        SweepConfig::parse(self.config).expect("built-in preset parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_series_validates() {
        for preset in PRESETS {
            for s in preset.series {
                crate::run::validate(&s.sweep()).unwrap_or_else(|e| panic!("{}: {e}", s.id));
            }
        }
    }

    #[test]
    fn selection_by_figure_and_panel() {
        assert_eq!(select("fig11").unwrap().1.len(), 4);
        assert_eq!(select("fig11a").unwrap().1.len(), 2);
        assert_eq!(select("fig2b").unwrap().1[0].id, "fig2b");
        assert_eq!(select("fig5").unwrap().1.len(), 1);
        assert!(select("fig3").is_err());
        assert!(select("fig1").is_err());
    }

    #[test]
    fn fig2b_has_five_curves() {
        let plan = crate::run::validate(&select("fig2b").unwrap().1[0].sweep()).unwrap();
        assert_eq!(plan.points.len(), 5 * 101);
    }
}
