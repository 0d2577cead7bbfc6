//! Pointwise diagnostics and scaling fits.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{stable_sum, CompensatedSum};
use crate::special::gamma;
use crate::state::check_purity;

/// Quantum Fisher information `H(r) = 1/(1 − r²)` of the purity.
pub fn quantum_fisher(r: f64) -> Result<f64> {
    check_purity("r", r)?;
    if r == 1.0 {
        return Err(Error::Singular("quantum Fisher information"));
    }
    Ok(1.0 / ((1.0 - r) * (1.0 + r)))
}

/// Cramér–Rao variance floor `1/(N·H(r))` for `copies` copies.
pub fn cramer_rao_variance(r: f64, copies: u64) -> Result<f64> {
    Ok(1.0 / (copies as f64 * quantum_fisher(r)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseDecomposition {
    pub mse: f64,
    pub variance: f64,
    pub bias_sq: f64,
}

/// `MSE = Var + bias²` with population (1/n) moments.
pub fn mse_decompose(estimates: &[f64], true_r: f64) -> Result<MseDecomposition> {
    if estimates.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: estimates.len(),
        });
    }
    let n = estimates.len() as f64;
    let mean = stable_sum(estimates.iter().copied()) / n;
    let mut var = CompensatedSum::new();
    for &e in estimates {
        var.add((e - mean) * (e - mean));
    }
    let variance = var.value() / n;
    let bias = mean - true_r;
    let bias_sq = bias * bias;
    Ok(MseDecomposition {
        mse: variance + bias_sq,
        variance,
        bias_sq,
    })
}

/// Direct `⟨(R − r)²⟩`, without going through the decomposition.
pub fn mean_square_error(estimates: &[f64], true_r: f64) -> f64 {
    stable_sum(estimates.iter().map(|e| (e - true_r) * (e - true_r))) / estimates.len() as f64
}

/// `k_λ = 2^{2−λ} Γ(5/2−λ) Γ(3/2−λ) Γ(λ−2) / [π Γ(1−λ)]` for `0 < λ < 1`.
pub fn k_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "k_lambda needs 0 < lambda < 1, got {lambda}"
        )));
    }
    Ok(2f64.powf(2.0 - lambda) * gamma(2.5 - lambda) * gamma(1.5 - lambda) * gamma(lambda - 2.0)
        / (PI * gamma(1.0 - lambda)))
}

/// Lower bound on the prior-averaged adaptive fidelity,
/// `1 − 1/(2N₁) − 2^{λ−2} k_λ ⟨Θ²₁⟩^{2−λ}`, where `⟨Θ²₁⟩` is the mean square
/// tomography angle for pure states.
pub fn separable_lower_bound(n1: u64, lambda: f64, theta2_at_1: f64) -> Result<f64> {
    if n1 == 0 {
        return Err(Error::InvalidConfig("N1 must be positive".into()));
    }
    if !(theta2_at_1 >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "mean square angle must be non-negative, got {theta2_at_1}"
        )));
    }
    let k = k_lambda(lambda)?;
    Ok(1.0 - 0.5 / n1 as f64 - 2f64.powf(lambda - 2.0) * k * theta2_at_1.powf(2.0 - lambda))
}

/// Leading-order mean square tomography angle, `⟨Θ²_r⟩ = (6/N₀)(1/r² − 1/5)`.
pub fn tomography_theta2(r: f64, n0: u64) -> Result<f64> {
    check_purity("r", r)?;
    if r == 0.0 {
        return Err(Error::InvalidConfig("direction undefined at r = 0".into()));
    }
    if n0 == 0 {
        return Err(Error::TooFewShots { needed: 1, got: 0 });
    }
    Ok(6.0 / n0 as f64 * (1.0 / (r * r) - 0.2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// `c` in `y ≈ c·N^p`.
    pub coefficient: f64,
    /// `p` in `y ≈ c·N^p`.
    pub exponent: f64,
    /// Root-mean-square residual of `ln y`.
    pub residual: f64,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.coefficient * n.powf(self.exponent)
    }
}

/// Unweighted least squares of `ln y` against `ln N`.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: points.len(),
        });
    }
    for &(n, y) in points {
        if !(n > 0.0) {
            return Err(Error::NonPositive(n));
        }
        if !(y > 0.0) {
            return Err(Error::NonPositive(y));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, y)| (n.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mean_x = stable_sum(logs.iter().map(|p| p.0)) / m;
    let mean_y = stable_sum(logs.iter().map(|p| p.1)) / m;
    let sxx = stable_sum(logs.iter().map(|p| (p.0 - mean_x).powi(2)));
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("fit needs distinct N values".into()));
    }
    let sxy = stable_sum(logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)));
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let residual =
        (stable_sum(logs.iter().map(|p| (p.1 - intercept - exponent * p.0).powi(2))) / m).sqrt();
    Ok(ScalingFit {
        coefficient: intercept.exp(),
        exponent,
        residual,
    })
}
