//! Velocity-integration rules.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Trapezoid,
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Integration bound as a multiple of the most probable speed.
    pub cutoff_sigmas: f64,
    pub node_count: usize,
    pub scheme: Scheme,
    /// When set, every evaluation is repeated with roughly twice the nodes
    /// and the two must agree to this relative tolerance.
    pub convergence_tol: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            cutoff_sigmas: 4.0,
            node_count: 4001,
            scheme: Scheme::GaussLegendre,
            convergence_tol: None,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::Config(format!(
                "quadrature.node_count must be at least 2, got {}",
                self.node_count
            )));
        }
        if self.scheme == Scheme::Trapezoid && self.node_count % 2 == 0 {
            return Err(Error::Config(format!(
                "trapezoid grids must have an odd node count, got {}",
                self.node_count
            )));
        }
        if !(self.cutoff_sigmas > 0.0 && self.cutoff_sigmas.is_finite()) {
            return Err(Error::Config(format!(
                "quadrature.cutoff_sigmas must be positive, got {}",
                self.cutoff_sigmas
            )));
        }
        if let Some(tol) = self.convergence_tol {
            if !(tol > 0.0) {
                return Err(Error::Config(format!(
                    "convergence tolerance must be positive, got {tol}"
                )));
            }
        }
        Ok(())
    }

    /// The next finer rule: doubled node count, kept odd for symmetric
    /// trapezoid grids so the old nodes stay nodes.
    pub fn refined(&self) -> Self {
        let node_count = match self.scheme {
            Scheme::Trapezoid => 2 * self.node_count - 1,
            Scheme::GaussLegendre => 2 * self.node_count,
        };
        Self { node_count, ..*self }
    }

    /// Nodes and weights on `[-half_width, half_width]`.
    pub fn rule(&self, half_width: f64) -> Vec<(f64, f64)> {
        match self.scheme {
            Scheme::Trapezoid => trapezoid_rule(self.node_count, -half_width, half_width),
            Scheme::GaussLegendre => gauss_legendre(self.node_count)
                .into_iter()
                .map(|(x, w)| (x * half_width, w * half_width))
                .collect(),
        }
    }
}

pub fn trapezoid_rule(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            (a + i as f64 * h, w)
        })
        .collect()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending in `x`.
///
/// Roots by Newton iteration on the three-term recurrence from the
/// Tricomi initial guess.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[n - 1 - i] = (x, w);
        out[i] = (-x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
