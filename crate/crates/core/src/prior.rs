//! Isotropic priors with radial density `w(r) ∝ r²(1 − r²)^(−λ)`.
//!
//! `λ = 1/2` is the Bures prior `(4/π)r²(1 − r²)^(−1/2)` and `λ = 0` the
//! hard-sphere prior `3r²`. The density is integrable for every `λ < 1`
//! but diverges at `r = 1` when `λ > 0`.
//!
//! All radial integrals run over a variable `t ∈ [0, 1]` with
//! `1 − r = (1 − t)^k`. The exponent `k = (m + 1)/(1 − λ)` (smallest
//! integer `m ≥ 0` with `k ≥ 2`) turns the `(1 − r)^(−λ)` endpoint factor
//! into a non-negative integer power of `1 − t`, so Gauss–Legendre sees a
//! smooth integrand whatever `λ` is.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::error::{Error, Result};
use crate::numeric::stable_sum;
use crate::quadrature::GaussLegendre;
use crate::special::ln_gamma;
use crate::state::BlochVector;

/// Points in the inverse-CDF table.
pub const CDF_TABLE_POINTS: usize = 4096;
const CDF_PANEL_NODES: usize = 8;

/// One node of a radial quadrature rule.
#[derive(Debug, Clone, Copy)]
pub struct RadialNode {
    pub r: f64,
    /// `1 − r`, carried separately to keep precision near the pure states.
    pub one_minus_r: f64,
    /// `√(1 − r²)`.
    pub co_purity: f64,
    /// Quadrature weight times `w(r)·dr/dt`.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct PurityPrior {
    lambda: f64,
    normalization: f64,
    map_exponent: f64,
    cdf_table: Arc<Vec<f64>>,
}

impl PurityPrior {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda >= 1.0 {
            return Err(Error::InvalidPrior(lambda));
        }
        let normalization =
            (4.0 / PI.sqrt()) * (ln_gamma(2.5 - lambda) - ln_gamma(1.0 - lambda)).exp();
        let mut m = 0.0;
        while (m + 1.0) / (1.0 - lambda) < 2.0 {
            m += 1.0;
        }
        let mut prior = Self {
            lambda,
            normalization,
            map_exponent: (m + 1.0) / (1.0 - lambda),
            cdf_table: Arc::new(Vec::new()),
        };
        prior.cdf_table = Arc::new(prior.build_cdf_table());
        Ok(prior)
    }

    pub fn bures() -> Self {
        Self::new(0.5).expect("λ = 1/2 is valid")
    }

    pub fn hard_sphere() -> Self {
        Self::new(0.0).expect("λ = 0 is valid")
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(4/√π)·Γ(5/2 − λ)/Γ(1 − λ)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Normalized density `w(r)`.
    pub fn density(&self, r: f64) -> Result<f64> {
        crate::state::check_purity("r", r)?;
        if r == 1.0 {
            return match self.lambda {
                l if l > 0.0 => Err(Error::DivergentDensity(l)),
                l if l == 0.0 => Ok(self.normalization),
                _ => Ok(0.0),
            };
        }
        let one_minus_sq = (1.0 - r) * (1.0 + r);
        Ok(self.normalization * r * r * one_minus_sq.powf(-self.lambda))
    }

    fn t_to_node(&self, t: f64) -> (f64, f64, f64, f64) {
        let k = self.map_exponent;
        let v = 1.0 - t;
        let one_minus_r = v.powf(k);
        let r = 1.0 - one_minus_r;
        let co = (one_minus_r * (1.0 + r)).sqrt();
        let jacobian_density = self.normalization
            * r
            * r
            * (1.0 + r).powf(-self.lambda)
            * k
            * v.powf(k * (1.0 - self.lambda) - 1.0);
        (r, one_minus_r, co, jacobian_density)
    }

    fn r_to_t(&self, r: f64) -> f64 {
        1.0 - (1.0 - r).powf(1.0 / self.map_exponent)
    }

    /// Nodes for `∫₀¹ w(r) g(r) dr ≈ Σ weight·g(r)` built from `rule`.
    pub fn radial_nodes(&self, rule: &GaussLegendre) -> Vec<RadialNode> {
        rule.iter()
            .map(|(t, wt)| {
                let (r, one_minus_r, co_purity, density) = self.t_to_node(t);
                RadialNode {
                    r,
                    one_minus_r,
                    co_purity,
                    weight: wt * density,
                }
            })
            .collect()
    }

    /// `∫₀¹ w(r) dr` on the primary rule; 1 up to quadrature error.
    pub fn total_mass(&self) -> f64 {
        stable_sum(
            self.radial_nodes(GaussLegendre::primary())
                .iter()
                .map(|n| n.weight),
        )
    }

    /// `∫₀^r w(s) ds`.
    pub fn cdf(&self, r: f64) -> Result<f64> {
        crate::state::check_purity("r", r)?;
        let upper = self.r_to_t(r);
        let rule = GaussLegendre::primary();
        Ok(rule
            .integrate(0.0, upper, |t| self.t_to_node(t).3)
            .min(1.0))
    }

    fn build_cdf_table(&self) -> Vec<f64> {
        let panel = GaussLegendre::new(CDF_PANEL_NODES);
        let h = 1.0 / (CDF_TABLE_POINTS - 1) as f64;
        let mut table = Vec::with_capacity(CDF_TABLE_POINTS);
        let mut running = crate::numeric::CompensatedSum::new();
        table.push(0.0);
        for i in 0..CDF_TABLE_POINTS - 1 {
            let a = i as f64 * h;
            running.add(panel.integrate(a, a + h, |t| self.t_to_node(t).3));
            table.push(running.value());
        }
        let total = running.value();
        for c in table.iter_mut() {
            *c /= total;
        }
        table
    }

    /// `1 − r` for a uniform variate `u ∈ [0, 1)`, by linear interpolation
    /// of the tabulated inverse CDF in the mapped variable.
    ///
    /// For `λ` close to 1 a visible share of the prior mass sits within
    /// `f64::EPSILON` of `r = 1`; this complement keeps it resolved.
    pub fn quantile_complement(&self, u: f64) -> f64 {
        let table = &self.cdf_table;
        let h = 1.0 / (CDF_TABLE_POINTS - 1) as f64;
        let upper = table.partition_point(|&c| c <= u).clamp(1, CDF_TABLE_POINTS - 1);
        let lower = upper - 1;
        let span = table[upper] - table[lower];
        let frac = if span > 0.0 {
            ((u - table[lower]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let v = 1.0 - (lower as f64 + frac) * h;
        v.powf(self.map_exponent)
    }

    /// Radius for a uniform variate `u ∈ [0, 1)`; never exactly 1.
    pub fn quantile(&self, u: f64) -> f64 {
        (1.0 - self.quantile_complement(u)).min(1.0 - f64::EPSILON / 2.0)
    }

    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Draws a state: isotropic direction, radius distributed as `w(r)`.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> BlochVector {
        let r = self.sample_radius(rng);
        let n: [f64; 3] = UnitSphere.sample(rng);
        let direction = crate::state::UnitVector::normalize(n).expect("unit sphere sample");
        BlochVector::from_purity(r, direction).expect("radius in [0, 1)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        let hard = PurityPrior::hard_sphere();
        assert!((hard.density(0.5).unwrap() - 0.75).abs() < 1e-14);
        assert!((hard.density(1.0).unwrap() - 3.0).abs() < 1e-14);
        let bures = PurityPrior::bures();
        let expected = (4.0 / PI) * 0.25 / 0.75f64.sqrt();
        assert!((bures.density(0.5).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.36755).abs() < 1e-5);
        for lambda in [-1.0, 0.0, 0.5, 0.9] {
            assert_eq!(PurityPrior::new(lambda).unwrap().density(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn density_errors() {
        assert_eq!(
            PurityPrior::bures().density(1.0),
            Err(Error::DivergentDensity(0.5))
        );
        assert!(PurityPrior::bures().density(1.5).is_err());
        assert_eq!(PurityPrior::new(-1.0).unwrap().density(1.0), Ok(0.0));
    }

    #[test]
    fn rejects_non_normalizable_lambda() {
        assert_eq!(PurityPrior::new(1.0).unwrap_err(), Error::InvalidPrior(1.0));
        assert!(PurityPrior::new(1.5).is_err());
        assert!(PurityPrior::new(f64::NAN).is_err());
    }

    #[test]
    fn map_exponent_makes_endpoint_power_integral() {
        for lambda in [-1.0, -0.3, 0.0, 0.25, 0.5, 0.75, 0.95] {
            let p = PurityPrior::new(lambda).unwrap();
            let power = p.map_exponent * (1.0 - lambda) - 1.0;
            assert!(p.map_exponent >= 2.0 - 1e-12);
            assert!((power - power.round()).abs() < 1e-9 && power >= -1e-9);
        }
    }

    #[test]
    fn cdf_matches_radial_nodes() {
        let p = PurityPrior::bures();
        assert_eq!(p.cdf(0.0).unwrap(), 0.0);
        assert!((p.cdf(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.quantile(0.0)).abs() < 1e-12);
    }

    #[test]
    fn quantile_never_returns_one() {
        let p = PurityPrior::new(0.75).unwrap();
        assert!(p.quantile(1.0 - f64::EPSILON) < 1.0);
        assert!(p.quantile(0.999_999_999) < 1.0);
    }
}
