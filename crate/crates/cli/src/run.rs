//! Evaluation of sweeps and CSV emission.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qsd_core::analysis::{
    desired_state, fidelity_coherent_baseline, fidelity_dephased, negativity, optimal_beta,
    optimal_beta_sq, wigner, wigner_marginals, wigner_phase_distribution, Curve, MarginalAxis,
    PhaseSpaceGrid, QuadratureRule, WignerField,
};
use qsd_core::fock::{fidelity_to_pure, BasisIndexer, DensityOperator};
use qsd_core::optics::coherent_state_with_tolerance;
use qsd_core::pipeline::{
    ideal_detection_probability, ideal_fidelity, ideal_truncated_state, realistic_truncation,
    IdealOutcome, SigmaZ, Source, TruncationResult,
};
use qsd_core::{QsdError, C64};
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::point::{Point, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Fidelity,
    Probability,
    Rate,
    Correction,
    IdealFidelity,
    IdealProbability,
    FDephased,
    FCoherent,
    FCoherentOpt,
    BetaSqOpt,
    WignerMin,
    WignerNegVolume,
    PhaseMin,
    PhaseArgmax,
    Wigner,
    Marginals,
    PhaseDist,
}

impl Observable {
    pub const ALL: [Observable; 17] = [
        Observable::Fidelity,
        Observable::Probability,
        Observable::Rate,
        Observable::Correction,
        Observable::IdealFidelity,
        Observable::IdealProbability,
        Observable::FDephased,
        Observable::FCoherent,
        Observable::FCoherentOpt,
        Observable::BetaSqOpt,
        Observable::WignerMin,
        Observable::WignerNegVolume,
        Observable::PhaseMin,
        Observable::PhaseArgmax,
        Observable::Wigner,
        Observable::Marginals,
        Observable::PhaseDist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Fidelity => "fidelity",
            Observable::Probability => "probability",
            Observable::Rate => "rate",
            Observable::Correction => "correction",
            Observable::IdealFidelity => "ideal_fidelity",
            Observable::IdealProbability => "ideal_probability",
            Observable::FDephased => "f_dephased",
            Observable::FCoherent => "f_coherent",
            Observable::FCoherentOpt => "f_coherent_opt",
            Observable::BetaSqOpt => "beta_sq_opt",
            Observable::WignerMin => "wigner_min",
            Observable::WignerNegVolume => "wigner_neg_volume",
            Observable::PhaseMin => "phase_min",
            Observable::PhaseArgmax => "phase_argmax",
            Observable::Wigner => "wigner",
            Observable::Marginals => "marginals",
            Observable::PhaseDist => "phase_dist",
        }
    }

    /// Whether the observable is a curve or field rather than one number.
    pub fn is_field(self) -> bool {
        matches!(
            self,
            Observable::Wigner | Observable::Marginals | Observable::PhaseDist
        )
    }

    fn needs_state(self) -> bool {
        !matches!(
            self,
            Observable::IdealFidelity
                | Observable::IdealProbability
                | Observable::FDephased
                | Observable::FCoherent
                | Observable::FCoherentOpt
                | Observable::BetaSqOpt
        )
    }
}

impl FromStr for Observable {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| CliError::validation(format!("unknown observable '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnImpossible {
    Error,
    /// Write NaN for every observable of the point.
    Skip,
}

/// A validated sweep ready to run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: SweepConfig,
    pub points: Vec<Point>,
    /// Sweep values of each point, as written to the CSV.
    pub labels: Vec<Vec<String>>,
    pub observables: Vec<Observable>,
    pub on_impossible: OnImpossible,
    pub grid: PhaseSpaceGrid,
    pub rule: Option<QuadratureRule>,
    pub marginals: Vec<MarginalAxis>,
    pub output: PathBuf,
}

fn global_num(cfg: &SweepConfig, key: &str, default: f64) -> Result<f64> {
    match cfg.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::validation(format!("{key}: '{v}' is not a number"))),
    }
}

fn global_count(cfg: &SweepConfig, key: &str, default: usize) -> Result<usize> {
    match cfg.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::validation(format!("{key}: '{v}' is not a count"))),
    }
}

fn list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Checks every key and grid point without running anything.
pub fn validate(config: &SweepConfig) -> Result<Plan> {
    config.check_keys()?;
    let observables = config
        .get("observables")
        .map(|raw| {
            list(raw)
                .map(Observable::from_str)
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?
        .unwrap_or_default();
    if observables.is_empty() {
        return Err(CliError::validation("at least one observable is required"));
    }
    let on_impossible = match config.get("on_impossible").unwrap_or("error") {
        "error" => OnImpossible::Error,
        "skip" => OnImpossible::Skip,
        other => {
            return Err(CliError::validation(format!(
                "on_impossible: unknown mode '{other}'"
            )))
        }
    };
    let d = PhaseSpaceGrid::default();
    let grid = PhaseSpaceGrid {
        x_min: global_num(config, "wigner.x_min", d.x_min)?,
        x_max: global_num(config, "wigner.x_max", d.x_max)?,
        p_min: global_num(config, "wigner.p_min", d.p_min)?,
        p_max: global_num(config, "wigner.p_max", d.p_max)?,
        nx: global_count(config, "wigner.nx", d.nx)?,
        np: global_count(config, "wigner.np", d.np)?,
    };
    grid.validate()
        .map_err(|e| CliError::validation(e.to_string()))?;
    let rule = match config.get("phase.r_max") {
        None => None,
        Some(_) => Some(
            QuadratureRule::new(
                global_num(config, "phase.r_max", 0.0)?,
                global_count(config, "phase.nodes", QuadratureRule::DEFAULT_NODES)?,
                global_count(
                    config,
                    "phase.n_theta",
                    QuadratureRule::DEFAULT_THETA_POINTS,
                )?,
            )
            .map_err(|e| CliError::validation(e.to_string()))?,
        ),
    };
    let nodes = global_count(config, "phase.nodes", QuadratureRule::DEFAULT_NODES)?;
    let n_theta = global_count(
        config,
        "phase.n_theta",
        QuadratureRule::DEFAULT_THETA_POINTS,
    )?;
    if nodes < 2 || n_theta < 2 {
        return Err(CliError::validation(
            "phase.nodes and phase.n_theta must be at least 2",
        ));
    }
    let marginals = match config.get("marginals") {
        None => MarginalAxis::ALL.to_vec(),
        Some(raw) => list(raw)
            .map(|s| {
                s.parse()
                    .map_err(|e: QsdError| CliError::validation(e.to_string()))
            })
            .collect::<Result<_>>()?,
    };
    let grid_maps = config.grid();
    let mut points = Vec::with_capacity(grid_maps.len());
    let mut labels = Vec::with_capacity(grid_maps.len());
    for map in &grid_maps {
        let point = Point::resolve(map)?;
        check_point(&point, &observables)?;
        points.push(point);
        labels.push(config.sweeps.iter().map(|a| map[&a.key].clone()).collect());
    }
    Ok(Plan {
        config: config.clone(),
        points,
        labels,
        observables,
        on_impossible,
        grid,
        rule,
        marginals,
        output: PathBuf::from(config.get("output").unwrap_or("sweep.csv")),
    })
}

fn check_point(point: &Point, observables: &[Observable]) -> Result<()> {
    let uses = |o: Observable| observables.contains(&o);
    if (uses(Observable::Probability) || uses(Observable::Rate))
        && !matches!(point.scheme, Scheme::Realistic | Scheme::Ideal)
    {
        return Err(CliError::validation(
            "probability and rate need scheme 'realistic' or 'ideal'",
        ));
    }
    if uses(Observable::Correction) && point.scheme != Scheme::Realistic {
        return Err(CliError::validation("correction needs scheme 'realistic'"));
    }
    if point.scheme == Scheme::Ideal {
        ideal_outcome(point)?;
    }
    Ok(())
}

fn ideal_outcome(point: &Point) -> Result<IdealOutcome> {
    match (point.pattern.n2, point.pattern.n3) {
        (1, 0) => Ok(IdealOutcome::OneZero),
        (0, 1) => Ok(IdealOutcome::ZeroOne),
        _ => Err(CliError::validation(format!(
            "scheme 'ideal' supports D2/D3 outcomes (1,0) and (0,1), got pattern {}",
            point.pattern
        ))),
    }
}

/// Everything computed at one grid point.
#[derive(Debug, Clone)]
pub struct PointOutput {
    pub scalars: Vec<f64>,
    pub wigner: Option<WignerField>,
    pub marginals: Vec<(MarginalAxis, Curve)>,
    pub phase: Option<Curve>,
}

struct Evaluated {
    state: DensityOperator,
    truncation: Option<TruncationResult>,
    ideal_probability: Option<f64>,
}

fn pair_probability(source: &Source) -> f64 {
    match source {
        Source::SpdcMixed(p) | Source::SpdcPure(p) => p.gamma_sq(),
        Source::ExactPair => 1.0,
    }
}

fn evaluate_state(point: &Point) -> qsd_core::Result<Evaluated> {
    let cfg = &point.config;
    let cut = cfg.cutoff;
    let plain = |state: DensityOperator| Evaluated {
        state,
        truncation: None,
        ideal_probability: None,
    };
    Ok(match point.scheme {
        Scheme::Realistic => {
            let r = realistic_truncation(cfg, point.pattern, point.correction)?;
            Evaluated {
                state: r.state.clone(),
                truncation: Some(r),
                ideal_probability: None,
            }
        }
        Scheme::Ideal => {
            let outcome =
                ideal_outcome(point).map_err(|e| QsdError::InvalidParameter(e.to_string()))?;
            let mut psi = ideal_truncated_state(cfg.alpha, &cfg.bs1, &cfg.bs2, outcome, cut)?;
            if point.correction.resolve(point.pattern) {
                psi = psi.sigma_z()?;
            }
            let p = match outcome {
                IdealOutcome::OneZero => ideal_detection_probability(cfg.alpha, &cfg.bs1, &cfg.bs2),
                IdealOutcome::ZeroOne => {
                    let a2 = cfg.alpha.norm_sqr();
                    ((cfg.bs1.r() * cfg.bs2.r()).norm_sqr()
                        + a2 * (cfg.bs1.t() * cfg.bs2.t()).norm_sqr())
                        * (-a2).exp()
                }
            };
            Evaluated {
                state: psi.to_density(),
                truncation: None,
                ideal_probability: Some(p),
            }
        }
        Scheme::Desired => plain(desired_state(cfg.alpha, cut)?.to_density()),
        Scheme::Dephased => {
            let a2 = cfg.alpha.norm_sqr();
            let mut diag = vec![0.0; cut.levels()];
            diag[0] = 1.0 / (1.0 + a2);
            diag[1] = a2 / (1.0 + a2);
            plain(DensityOperator::diagonal(
                &diag,
                BasisIndexer::new(1, cut)?,
            )?)
        }
        Scheme::Coherent => plain(coherent(cfg.alpha * point.xi.sqrt(), point)?),
        Scheme::CoherentOpt => plain(coherent(optimal_beta(cfg.alpha), point)?),
        Scheme::Input => plain(coherent(cfg.alpha, point)?),
    })
}

fn coherent(beta: C64, point: &Point) -> qsd_core::Result<DensityOperator> {
    Ok(
        coherent_state_with_tolerance(beta, point.config.cutoff, point.config.tail_tolerance)?
            .to_density(),
    )
}

fn evaluate(plan: &Plan, point: &Point) -> qsd_core::Result<PointOutput> {
    let cfg = &point.config;
    let needs_state = plan.observables.iter().any(|o| o.needs_state());
    let ev = if needs_state {
        Some(evaluate_state(point)?)
    } else {
        None
    };
    let state = ev.as_ref().map(|e| &e.state);
    let wants = |o: Observable| plan.observables.contains(&o);

    let field = if wants(Observable::Wigner)
        || wants(Observable::WignerMin)
        || wants(Observable::WignerNegVolume)
    {
        Some(wigner(state.expect("state evaluated"), &plan.grid)?)
    } else {
        None
    };
    let phase = if wants(Observable::PhaseDist)
        || wants(Observable::PhaseMin)
        || wants(Observable::PhaseArgmax)
    {
        let rho = state.expect("state evaluated");
        let rule = match &plan.rule {
            Some(r) => r.clone(),
            None => {
                let base = QuadratureRule::for_levels(rho.indexer().levels());
                let nodes =
                    global_count(&plan.config, "phase.nodes", QuadratureRule::DEFAULT_NODES)
                        .unwrap_or(QuadratureRule::DEFAULT_NODES);
                let n_theta = global_count(
                    &plan.config,
                    "phase.n_theta",
                    QuadratureRule::DEFAULT_THETA_POINTS,
                )
                .unwrap_or(QuadratureRule::DEFAULT_THETA_POINTS);
                QuadratureRule::new(base.r_max(), nodes, n_theta)?
            }
        };
        Some(wigner_phase_distribution(rho, &rule)?)
    } else {
        None
    };

    let mut scalars = Vec::new();
    for &o in plan.observables.iter().filter(|o| !o.is_field()) {
        let v = match o {
            Observable::Fidelity => fidelity_to_pure(
                state.expect("state evaluated"),
                &desired_state(cfg.alpha, cfg.cutoff)?,
            )?,
            Observable::Probability | Observable::Rate => {
                let ev = ev.as_ref().expect("state evaluated");
                let (p, rate) = match (&ev.truncation, ev.ideal_probability) {
                    (Some(t), _) => (t.probability_per_pulse, t.rate_per_second),
                    (None, Some(p)) => (p, p * pair_probability(&cfg.source) * cfg.rep_rate),
                    (None, None) => (f64::NAN, f64::NAN),
                };
                if o == Observable::Probability {
                    p
                } else {
                    rate
                }
            }
            Observable::Correction => {
                let applied = ev
                    .as_ref()
                    .and_then(|e| e.truncation.as_ref())
                    .map(|t| t.correction_applied);
                if applied == Some(true) {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::IdealFidelity => ideal_fidelity(cfg.alpha, &cfg.bs1, &cfg.bs2)?,
            Observable::IdealProbability => {
                ideal_detection_probability(cfg.alpha, &cfg.bs1, &cfg.bs2)
            }
            Observable::FDephased => fidelity_dephased(cfg.alpha),
            Observable::FCoherent => {
                fidelity_coherent_baseline(cfg.alpha, cfg.alpha * point.xi.sqrt(), 0.0)
            }
            Observable::FCoherentOpt => {
                fidelity_coherent_baseline(cfg.alpha, optimal_beta(cfg.alpha), 0.0)
            }
            Observable::BetaSqOpt => optimal_beta_sq(cfg.alpha),
            Observable::WignerMin => negativity(field.as_ref().expect("field computed")).min,
            Observable::WignerNegVolume => {
                negativity(field.as_ref().expect("field computed")).negative_volume
            }
            Observable::PhaseMin => phase.as_ref().expect("phase computed").min(),
            Observable::PhaseArgmax => phase.as_ref().expect("phase computed").argmax(),
            Observable::Wigner | Observable::Marginals | Observable::PhaseDist => unreachable!(),
        };
        scalars.push(v);
    }

    let marginals = if wants(Observable::Marginals) {
        let rho = state.expect("state evaluated");
        plan.marginals
            .iter()
            .map(|&axis| Ok((axis, wigner_marginals(rho, axis, &plan.grid)?)))
            .collect::<qsd_core::Result<_>>()?
    } else {
        Vec::new()
    };

    Ok(PointOutput {
        scalars,
        wigner: if wants(Observable::Wigner) {
            field
        } else {
            None
        },
        marginals,
        phase: if wants(Observable::PhaseDist) {
            phase
        } else {
            None
        },
    })
}

fn is_outcome_failure(e: &QsdError) -> bool {
    matches!(e, QsdError::ImpossibleOutcome(_) | QsdError::Degenerate(_))
}

/// Evaluates every grid point; results come back in grid order regardless
/// of how the work was scheduled.
pub fn evaluate_plan(plan: &Plan) -> Result<Vec<Option<PointOutput>>> {
    let results: Vec<qsd_core::Result<PointOutput>> =
        plan.points.par_iter().map(|p| evaluate(plan, p)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok(out) => Ok(Some(out)),
            Err(e) if plan.on_impossible == OnImpossible::Skip && is_outcome_failure(&e) => {
                Ok(None)
            }
            Err(e) => Err(CliError::Runtime {
                context: format!("grid point {} ({})", i, describe(plan, i)),
                source: e,
            }),
        })
        .collect()
}

fn describe(plan: &Plan, i: usize) -> String {
    plan.config
        .sweeps
        .iter()
        .zip(&plan.labels[i])
        .map(|(a, v)| format!("{} = {v}", a.key))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Fixed float format: 17 significant digits in scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Swept values are printed as floats when numeric and verbatim otherwise.
fn fmt_label(v: &str) -> String {
    match v.parse::<f64>() {
        Ok(x) => fmt_float(x),
        Err(_) => v.to_string(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

struct Table<'a> {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    plan: &'a Plan,
}

impl<'a> Table<'a> {
    fn create(plan: &'a Plan, path: PathBuf, columns: &[&str]) -> Result<Self> {
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        let header: Vec<&str> = plan
            .config
            .sweeps
            .iter()
            .map(|a| a.key.as_str())
            .chain(columns.iter().copied())
            .collect();
        writer.write_record(&header).map_err(csv_err(&path))?;
        Ok(Self { path, writer, plan })
    }

    fn row(&mut self, point: usize, values: impl IntoIterator<Item = String>) -> Result<()> {
        let record: Vec<String> = self.plan.labels[point]
            .iter()
            .map(|v| fmt_label(v))
            .chain(values)
            .collect();
        self.writer
            .write_record(&record)
            .map_err(csv_err(&self.path))
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

/// Writes the CSV files of an evaluated plan next to `output` and returns
/// their paths. Scalars go to `output` itself; fields get suffixed siblings.
pub fn write_outputs(
    plan: &Plan,
    results: &[Option<PointOutput>],
    output: &Path,
) -> Result<Vec<PathBuf>> {
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut written = Vec::new();
    let scalar_names: Vec<&str> = plan
        .observables
        .iter()
        .filter(|o| !o.is_field())
        .map(|o| o.name())
        .collect();
    if !scalar_names.is_empty() {
        let mut table = Table::create(plan, output.to_path_buf(), &scalar_names)?;
        for (i, r) in results.iter().enumerate() {
            let vals: Vec<String> = match r {
                Some(out) => out.scalars.iter().map(|&v| fmt_float(v)).collect(),
                None => vec![fmt_float(f64::NAN); scalar_names.len()],
            };
            table.row(i, vals)?;
        }
        written.push(table.finish()?);
    }
    if plan.observables.contains(&Observable::Wigner) {
        let mut table = Table::create(plan, sibling(output, "_wigner", "csv"), &["x", "p", "w"])?;
        let (xs, ps) = (plan.grid.xs(), plan.grid.ps());
        for (i, r) in results.iter().enumerate() {
            if let Some(field) = r.as_ref().and_then(|o| o.wigner.as_ref()) {
                for (a, x) in xs.iter().enumerate() {
                    for (b, p) in ps.iter().enumerate() {
                        table.row(i, [fmt_float(*x), fmt_float(*p), fmt_float(field.at(a, b))])?;
                    }
                }
            }
        }
        written.push(table.finish()?);
    }
    if plan.observables.contains(&Observable::Marginals) {
        let mut table = Table::create(
            plan,
            sibling(output, "_marginals", "csv"),
            &["axis", "coord", "value"],
        )?;
        for (i, r) in results.iter().enumerate() {
            for (axis, curve) in r.iter().flat_map(|o| o.marginals.iter()) {
                for (c, v) in curve.coords.iter().zip(&curve.values) {
                    table.row(i, [axis.name().to_string(), fmt_float(*c), fmt_float(*v)])?;
                }
            }
        }
        written.push(table.finish()?);
    }
    if plan.observables.contains(&Observable::PhaseDist) {
        let mut table = Table::create(
            plan,
            sibling(output, "_phase", "csv"),
            &["theta", "p_theta"],
        )?;
        for (i, r) in results.iter().enumerate() {
            if let Some(curve) = r.as_ref().and_then(|o| o.phase.as_ref()) {
                for (t, v) in curve.coords.iter().zip(&curve.values) {
                    table.row(i, [fmt_float(*t), fmt_float(*v)])?;
                }
            }
        }
        written.push(table.finish()?);
    }
    Ok(written)
}

/// Metadata sidecar: the config in canonical form plus `meta.*` entries.
/// It parses back into the same sweep.
pub fn write_sidecar(
    config: &SweepConfig,
    output: &Path,
    extra: &[(&str, String)],
) -> Result<PathBuf> {
    let mut cfg = config.clone();
    cfg.meta
        .insert("version".into(), env!("CARGO_PKG_VERSION").into());
    for (k, v) in extra {
        cfg.meta.insert((*k).into(), v.clone());
    }
    let path = sibling(output, "", "meta");
    let mut f = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    f.write_all(cfg.to_text().as_bytes())
        .map_err(io_err(&path))?;
    f.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Validates, evaluates and writes one sweep. `output` overrides the
/// config's own `output` key.
pub fn run_sweep(config: &SweepConfig, output: Option<&Path>) -> Result<Vec<PathBuf>> {
    let plan = validate(config)?;
    let output = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| plan.output.clone());
    let results = evaluate_plan(&plan)?;
    let mut written = write_outputs(&plan, &results, &output)?;
    written.push(write_sidecar(config, &output, &[])?);
    Ok(written)
}
