use std::f64::consts::PI;

use crate::analysis::quadrature::{gauss_legendre, QuadratureRule};
use crate::error::{QsdError, Result};
use crate::fock::{DensityOperator, C64};

/// Largest tolerated imaginary part of a computed Wigner value.
const IMAG_TOLERANCE: f64 = 1e-10;

/// Nodes used for the line integrals behind the marginals.
const MARGINAL_NODES: usize = 200;

/// Rectangular grid over the quadratures `X` and `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            p_min: -4.0,
            p_max: 4.0,
            nx: 201,
            np: 201,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

impl PhaseSpaceGrid {
    pub fn new(x: (f64, f64), p: (f64, f64), nx: usize, np: usize) -> Result<Self> {
        let grid = Self {
            x_min: x.0,
            x_max: x.1,
            p_min: p.0,
            p_max: p.1,
            nx,
            np,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [self.x_min, self.x_max, self.p_min, self.p_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(QsdError::InvalidGrid("bounds must be finite".into()));
        }
        if self.x_min >= self.x_max || self.p_min >= self.p_max {
            return Err(QsdError::InvalidGrid(
                "each lower bound must be below its upper bound".into(),
            ));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(QsdError::InvalidGrid("at least two points per axis".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }
}

/// Wigner values on a grid, `values[i * np + j] = W(xs[i], ps[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.np + j]
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let (nx, np) = (self.grid.nx, self.grid.np);
        let edge = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let mut sum = 0.0;
        for i in 0..nx {
            for j in 0..np {
                sum += edge(i, nx) * edge(j, np) * self.at(i, j);
            }
        }
        sum * self.grid.dx() * self.grid.dp()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Sampled one-dimensional function.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

impl Curve {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Coordinate of the largest value.
    pub fn argmax(&self) -> f64 {
        let (i, _) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                });
        self.coords[i]
    }
}

/// Cuts and projections of the Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarginalAxis {
    /// `W(X, 0)` over the grid's `X` points.
    XAtP0,
    /// `W(0, P)` over the grid's `P` points.
    PAtX0,
    /// `∫ W(X, P) dP` over the grid's `X` points.
    IntegrateP,
    /// `∫ W(X, P) dX` over the grid's `P` points.
    IntegrateX,
}

impl std::str::FromStr for MarginalAxis {
    type Err = QsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x_at_p0" => Ok(MarginalAxis::XAtP0),
            "p_at_x0" => Ok(MarginalAxis::PAtX0),
            "integrate_p" => Ok(MarginalAxis::IntegrateP),
            "integrate_x" => Ok(MarginalAxis::IntegrateX),
            other => Err(QsdError::InvalidParameter(format!(
                "unknown marginal '{other}'"
            ))),
        }
    }
}

impl MarginalAxis {
    pub const ALL: [MarginalAxis; 4] = [
        MarginalAxis::XAtP0,
        MarginalAxis::PAtX0,
        MarginalAxis::IntegrateP,
        MarginalAxis::IntegrateX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MarginalAxis::XAtP0 => "x_at_p0",
            MarginalAxis::PAtX0 => "p_at_x0",
            MarginalAxis::IntegrateP => "integrate_p",
            MarginalAxis::IntegrateX => "integrate_x",
        }
    }
}

/// Precomputed pieces of `W = (1/pi) sum rho_mn <n|T|m>`.
struct Evaluator<'a> {
    rho: &'a DensityOperator,
    levels: usize,
    /// `sqrt(n! / m!)` for `n <= m`, indexed `[n * levels + m]`.
    ratio: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(rho: &'a DensityOperator) -> Result<Self> {
        if rho.modes() != 1 {
            return Err(QsdError::InvalidParameter(format!(
                "Wigner function needs a single-mode state, got {} modes",
                rho.modes()
            )));
        }
        let levels = rho.indexer().levels();
        let ln_fact: Vec<f64> = (0..levels)
            .scan(0.0, |acc, k| {
                if k > 0 {
                    *acc += (k as f64).ln();
                }
                Some(*acc)
            })
            .collect();
        let mut ratio = vec![0.0; levels * levels];
        for n in 0..levels {
            for m in n..levels {
                ratio[n * levels + m] = (0.5 * (ln_fact[n] - ln_fact[m])).exp();
            }
        }
        Ok(Self { rho, levels, ratio })
    }

    /// For `m = n + d`,
    /// `<n|T|m> = (-1)^n 2 (2(X - iP))^d sqrt(n!/m!) e^{-2r^2} L_n^d(4r^2)`,
    /// and `<m|T|n>` is its conjugate.
    fn eval(&self, x: f64, p: f64) -> C64 {
        let n_lv = self.levels;
        let r2 = x * x + p * p;
        let y = 4.0 * r2;
        let gauss = (-2.0 * r2).exp();
        let z = C64::new(2.0 * x, -2.0 * p);
        let mut zd = C64::new(1.0, 0.0);
        let mut total = C64::new(0.0, 0.0);
        for d in 0..n_lv {
            let a = d as f64;
            let (mut l_prev, mut l_cur) = (0.0, 1.0);
            for n in 0..n_lv - d {
                if n > 0 {
                    let k = (n - 1) as f64;
                    let next = ((2.0 * k + 1.0 + a - y) * l_cur - (k + a) * l_prev) / (k + 1.0);
                    l_prev = l_cur;
                    l_cur = next;
                }
                let m = n + d;
                let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
                let t_nm = zd * (sign * self.ratio[n * n_lv + m] * gauss * l_cur);
                let m_ = self.rho.matrix();
                total += m_[(m, n)] * t_nm;
                if d > 0 {
                    total += m_[(n, m)] * t_nm.conj();
                }
            }
            zd *= z;
        }
        total / PI
    }

    fn eval_real(&self, x: f64, p: f64) -> Result<f64> {
        let w = self.eval(x, p);
        if w.im.abs() > IMAG_TOLERANCE {
            return Err(QsdError::NotHermitian(w.im.abs()));
        }
        Ok(w.re)
    }
}

/// `W(X, P)` at one point; the vacuum gives `2/pi` at the origin.
pub fn wigner_at(rho: &DensityOperator, x: f64, p: f64) -> Result<f64> {
    Evaluator::new(rho)?.eval_real(x, p)
}

pub fn wigner(rho: &DensityOperator, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    grid.validate()?;
    let ev = Evaluator::new(rho)?;
    let ps = grid.ps();
    let mut values = Vec::with_capacity(grid.nx * grid.np);
    for x in grid.xs() {
        for &p in &ps {
            values.push(ev.eval_real(x, p)?);
        }
    }
    Ok(WignerField {
        grid: *grid,
        values,
    })
}

/// Default half-width of the line integrals for `levels` Fock levels.
fn integration_radius(levels: usize) -> f64 {
    (levels as f64 / 2.0).sqrt() + 4.0
}

pub fn wigner_marginals(
    rho: &DensityOperator,
    axis: MarginalAxis,
    grid: &PhaseSpaceGrid,
) -> Result<Curve> {
    grid.validate()?;
    let ev = Evaluator::new(rho)?;
    let radius = integration_radius(ev.levels);
    let line = gauss_legendre(MARGINAL_NODES, -radius, radius);
    let integrate = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        line.iter()
            .try_fold(0.0, |acc, &(u, w)| Ok(acc + w * f(u)?))
    };
    let (coords, values) = match axis {
        MarginalAxis::XAtP0 => {
            let xs = grid.xs();
            let v = xs
                .iter()
                .map(|&x| ev.eval_real(x, 0.0))
                .collect::<Result<_>>()?;
            (xs, v)
        }
        MarginalAxis::PAtX0 => {
            let ps = grid.ps();
            let v = ps
                .iter()
                .map(|&p| ev.eval_real(0.0, p))
                .collect::<Result<_>>()?;
            (ps, v)
        }
        MarginalAxis::IntegrateP => {
            let xs = grid.xs();
            let v = xs
                .iter()
                .map(|&x| integrate(&|p| ev.eval_real(x, p)))
                .collect::<Result<_>>()?;
            (xs, v)
        }
        MarginalAxis::IntegrateX => {
            let ps = grid.ps();
            let v = ps
                .iter()
                .map(|&p| integrate(&|x| ev.eval_real(x, p)))
                .collect::<Result<_>>()?;
            (ps, v)
        }
    };
    Ok(Curve { coords, values })
}

/// Phase distribution `P(theta) = ∫ W(r cos theta, r sin theta) r dr`.
pub fn wigner_phase_distribution(rho: &DensityOperator, rule: &QuadratureRule) -> Result<Curve> {
    let ev = Evaluator::new(rho)?;
    let thetas = rule.thetas();
    let values = thetas
        .iter()
        .map(|&th| {
            let (s, c) = th.sin_cos();
            rule.radial().iter().try_fold(0.0, |acc, &(r, w)| {
                Ok(acc + w * r * ev.eval_real(r * c, r * s)?)
            })
        })
        .collect::<Result<_>>()?;
    Ok(Curve {
        coords: thetas,
        values,
    })
}

/// Depth and size of the negative region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negativity {
    /// Smallest grid value.
    pub min: f64,
    /// `∫ max(-W, 0) dX dP` by the rectangle rule.
    pub negative_volume: f64,
}

pub fn negativity(field: &WignerField) -> Negativity {
    let cell = field.grid.dx() * field.grid.dp();
    Negativity {
        min: field.min(),
        negative_volume: field.values.iter().map(|w| (-w).max(0.0)).sum::<f64>() * cell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{CutoffDim, PureState};
    use approx::assert_abs_diff_eq;

    fn fock(n: usize) -> DensityOperator {
        PureState::fock(&[n], CutoffDim::new(6).unwrap())
            .unwrap()
            .to_density()
    }

    #[test]
    fn origin_values_of_fock_states() {
        assert_abs_diff_eq!(
            wigner_at(&fock(0), 0.0, 0.0).unwrap(),
            2.0 / PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            wigner_at(&fock(1), 0.0, 0.0).unwrap(),
            -2.0 / PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            wigner_at(&fock(4), 0.0, 0.0).unwrap(),
            2.0 / PI,
            epsilon = 1e-14
        );
    }

    #[test]
    fn vacuum_is_gaussian() {
        for &(x, p) in &[(0.3f64, -0.2f64), (1.1, 0.7), (-2.0, 0.5)] {
            let expected = 2.0 / PI * (-2.0 * (x * x + p * p)).exp();
            assert_abs_diff_eq!(
                wigner_at(&fock(0), x, p).unwrap(),
                expected,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn one_photon_closed_form() {
        // W_1 = (2/pi)(4 r^2 - 1) e^{-2 r^2}
        for &(x, p) in &[(0.3f64, -0.2f64), (1.1, 0.7)] {
            let r2: f64 = x * x + p * p;
            let expected = 2.0 / PI * (4.0 * r2 - 1.0) * (-2.0 * r2).exp();
            assert_abs_diff_eq!(
                wigner_at(&fock(1), x, p).unwrap(),
                expected,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let c = CutoffDim::new(3).unwrap();
        let mut m = PureState::vacuum(1, c).unwrap().to_density().into_matrix();
        m[(0, 1)] = C64::new(0.3, 0.0);
        let rho =
            DensityOperator::from_matrix(m, crate::fock::BasisIndexer::new(1, c).unwrap()).unwrap();
        assert!(matches!(
            wigner_at(&rho, 0.2, 0.1),
            Err(QsdError::NotHermitian(_))
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(PhaseSpaceGrid::new((1.0, -1.0), (0.0, 1.0), 3, 3).is_err());
        assert!(PhaseSpaceGrid::new((0.0, 1.0), (0.0, 1.0), 1, 3).is_err());
        assert!(PhaseSpaceGrid::new((0.0, f64::NAN), (0.0, 1.0), 3, 3).is_err());
        let g = PhaseSpaceGrid::default();
        assert_eq!(g.xs().len(), 201);
        assert_abs_diff_eq!(g.dx(), 0.04, epsilon = 1e-15);
    }

    #[test]
    fn negativity_of_a_single_photon() {
        let field = wigner(
            &fock(1),
            &PhaseSpaceGrid::new((-4.0, 4.0), (-4.0, 4.0), 161, 161).unwrap(),
        )
        .unwrap();
        let neg = negativity(&field);
        assert_abs_diff_eq!(neg.min, -2.0 / PI, epsilon = 1e-12);
        // W < 0 inside r = 1/2; the negative part integrates to 2 e^{-1/2} - 1.
        let exact = 2.0 * (-0.5f64).exp() - 1.0;
        assert_abs_diff_eq!(neg.negative_volume, exact, epsilon = 5e-3);
        assert_abs_diff_eq!(field.integral(), 1.0, epsilon = 1e-9);
    }
}
