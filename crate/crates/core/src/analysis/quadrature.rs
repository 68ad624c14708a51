use std::f64::consts::PI;

use crate::error::{QsdError, Result};

/// Gauss-Legendre nodes and weights on `[a, b]`.
///
/// Roots of `P_n` come from Newton iteration started at the Chebyshev-like
/// guess `cos(pi (i + 3/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((mid - half * x, half * w));
    }
    out
}

/// Radial Gauss-Legendre rule on `[0, r_max]` plus a uniform angular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    radial: Vec<(f64, f64)>,
    r_max: f64,
    n_theta: usize,
}

impl QuadratureRule {
    pub const DEFAULT_NODES: usize = 200;
    pub const DEFAULT_THETA_POINTS: usize = 360;

    pub fn new(r_max: f64, nodes: usize, n_theta: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(QsdError::InvalidGrid(format!(
                "r_max {r_max} must be positive"
            )));
        }
        if nodes < 2 || n_theta < 2 {
            return Err(QsdError::InvalidGrid(
                "need at least two radial and two angular points".into(),
            ));
        }
        Ok(Self {
            radial: gauss_legendre(nodes, 0.0, r_max),
            r_max,
            n_theta,
        })
    }

    /// Default rule for states on `levels` Fock levels: `r_max = sqrt(levels/2) + 4`.
    pub fn for_levels(levels: usize) -> Self {
        Self::new(
            (levels as f64 / 2.0).sqrt() + 4.0,
            Self::DEFAULT_NODES,
            Self::DEFAULT_THETA_POINTS,
        )
        .expect("default rule is valid")
    }

    pub fn radial(&self) -> &[(f64, f64)] {
        &self.radial
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Angles `2 pi j / n_theta`.
    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|j| 2.0 * PI * j as f64 / self.n_theta as f64)
            .collect()
    }
}
