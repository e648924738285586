use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthPoint {
    /// K
    pub temperature: f64,
    pub atom_count: f64,
    /// s; NaN when the strength was supplied directly.
    pub measured_fwhm: f64,
    /// Γ_SR / Γ_I
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub mu: f64,
    pub mu_stderr: f64,
    /// `(strength - 1) - mu N` per point, in input order.
    pub residuals: Vec<f64>,
}

/// Least squares of `strength - 1 = mu N` through the origin.
///
/// `mu = Σ N y / Σ N²`; the standard error uses the residual variance with
/// `n - 1` degrees of freedom and is zero for a single point.
pub fn fit_mu(points: &[StrengthPoint]) -> Result<FitResult> {
    let snn: f64 = points.iter().map(|p| p.atom_count * p.atom_count).sum();
    if points.is_empty() || !(snn > 0.0) {
        return Err(Error::Degenerate("fit needs at least one point with N > 0".into()));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.atom_count.is_finite() && p.strength.is_finite() && p.atom_count >= 0.0))
    {
        return Err(Error::Domain(format!("invalid strength point {p:?}")));
    }
    let sny: f64 = points.iter().map(|p| p.atom_count * (p.strength - 1.0)).sum();
    let mu = sny / snn;
    let residuals: Vec<f64> = points.iter().map(|p| (p.strength - 1.0) - mu * p.atom_count).collect();
    let dof = points.len() - 1;
    let mu_stderr = if dof == 0 {
        0.0
    } else {
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / dof as f64;
        (s2 / snn).sqrt()
    };
    Ok(FitResult {
        mu,
        mu_stderr,
        residuals,
    })
}
