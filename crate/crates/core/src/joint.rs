//! The optimal joint (collective) measurement on `N` copies.
//!
//! The `N`-qubit space splits into spin-`j` blocks, the block `j` occurring
//! `n_j` times. Measuring which block the state lands in is optimal; given
//! block `j`, the best guess is `R_j = A_j/√(A_j² + B_j²)` with
//!
//! ```text
//! (A_j, B_j) = ∫ dr w(r) (r, √(1 − r²)) W_j(r),
//! W_j(r)     = Σ_{m=−j}^{j} p^{N/2−m} q^{N/2+m},   p = (1 − r)/2, q = (1 + r)/2,
//! ```
//!
//! and the maximal fidelity is `F = Σ_j n_j √(A_j² + B_j²)`.
//!
//! Spin is carried as the integer `two_j = 2j` throughout. Multiplicities
//! are exact big integers; every product with them happens in log space,
//! since `n_j` overflows `f64` long before `N = 2000`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numeric::{stable_sum, CompensatedSum};
use crate::prior::{PurityPrior, RadialNode};
use crate::quadrature::GaussLegendre;

/// Below this value of `1 − p/q` the geometric series is summed term by term.
pub const SERIES_SWITCH: f64 = 1e-6;
/// Largest accepted 256-vs-512-node disagreement, relative to the block's
/// fidelity contribution.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;
/// Contributions to the total fidelity below this are too small to check.
const NEGLIGIBLE_CONTRIBUTION: f64 = 1e-12;

/// How the sum over `m` in `W_j` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMethod {
    /// Closed-form geometric series, falling back to direct summation
    /// when `p/q` is within [`SERIES_SWITCH`] of 1.
    Auto,
    ClosedForm,
    Direct,
}

#[derive(Debug, Clone)]
pub struct SpinBlock {
    pub n_copies: u64,
    pub two_j: u64,
    pub multiplicity: BigUint,
    pub ln_multiplicity: f64,
    /// `A_j`; underflows to zero when `n_j` is astronomically large.
    pub a_j: f64,
    /// `B_j`; see [`SpinBlock::a_j`].
    pub b_j: f64,
    /// `n_j·A_j`.
    pub weighted_a: f64,
    /// `n_j·B_j`.
    pub weighted_b: f64,
    /// Optimal purity guess `R_j`.
    pub r_j: f64,
    /// Prior-averaged probability of landing in any copy of this block.
    pub probability: f64,
    /// Disagreement between the two quadrature rules.
    pub quadrature_error: f64,
}

impl SpinBlock {
    /// This block's term `n_j √(A_j² + B_j²)` of the maximal fidelity.
    pub fn contribution(&self) -> f64 {
        self.weighted_a.hypot(self.weighted_b)
    }
}

#[derive(Debug, Clone)]
pub struct JointBoundResult {
    pub n_copies: u64,
    pub blocks: Vec<SpinBlock>,
    pub f_max: f64,
    /// `N·(1 − F_max)`, which tends to 1/2.
    pub gap: f64,
}

pub fn check_block(n: u64, two_j: u64) -> Result<()> {
    if n == 0 || two_j > n || (n - two_j) % 2 != 0 {
        return Err(Error::InvalidBlock { n, two_j });
    }
    Ok(())
}

/// Valid values of `2j` for `N` copies, ascending.
pub fn block_spins(n: u64) -> impl Iterator<Item = u64> + Clone {
    (n % 2..=n).step_by(2)
}

/// `n_j = C(N, N/2 − j)·(2j + 1)/(N/2 + j + 1)`, exactly.
pub fn multiplicity(n: u64, two_j: u64) -> Result<BigUint> {
    check_block(n, two_j)?;
    let lower = (n - two_j) / 2;
    let mut binom = BigUint::one();
    for i in 1..=lower {
        binom *= n - lower + i;
        binom /= i;
    }
    let numerator = binom * (two_j + 1);
    let denominator = BigUint::from(n - lower + 1);
    debug_assert!((&numerator % &denominator).is_zero());
    Ok(numerator / denominator)
}

/// Natural log of a big integer without converting it to `f64` first.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * LN_2
}

/// Per-`r` quantities needed to evaluate `W_j(r)` for any block.
#[derive(Debug, Clone, Copy)]
struct WeightPoint {
    ln_p: f64,
    ln_q: f64,
    /// `ln(p/q)`.
    ln_ratio: f64,
    /// `1 − p/q`.
    ratio_gap: f64,
    pure: bool,
}

impl WeightPoint {
    fn from_one_minus_r(one_minus_r: f64) -> Self {
        let r = 1.0 - one_minus_r;
        let pure = one_minus_r == 0.0;
        let ln_p = if pure {
            f64::NEG_INFINITY
        } else {
            one_minus_r.ln() - LN_2
        };
        let ln_q = (-0.5 * one_minus_r).ln_1p();
        // ln(p/q) straight from r: differencing ln p and ln q loses all
        // relative precision as r → 0.
        let ln_ratio = if r < 0.5 {
            (-2.0 * r / (2.0 - one_minus_r)).ln_1p()
        } else {
            ln_p - ln_q
        };
        Self {
            ln_p,
            ln_q,
            ln_ratio,
            ratio_gap: r / (1.0 - 0.5 * one_minus_r),
            pure,
        }
    }

    fn ln_block_weight(&self, n: u64, two_j: u64, method: SeriesMethod) -> f64 {
        let low = (n - two_j) / 2;
        if self.pure {
            return if low == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        let terms = two_j + 1;
        let mut lead = (n - low) as f64 * self.ln_q;
        if low > 0 {
            lead += low as f64 * self.ln_p;
        }
        let direct = match method {
            SeriesMethod::Direct => true,
            SeriesMethod::ClosedForm => false,
            SeriesMethod::Auto => self.ratio_gap < SERIES_SWITCH,
        };
        let ln_series = if direct {
            stable_sum((0..terms).map(|k| (k as f64 * self.ln_ratio).exp())).ln()
        } else {
            (-(terms as f64 * self.ln_ratio).exp_m1()).ln() - self.ratio_gap.ln()
        };
        lead + ln_series
    }
}

/// `ln W_j(r)`, or `-inf` where the block is unreachable.
pub fn ln_block_weight(n: u64, two_j: u64, r: f64, method: SeriesMethod) -> Result<f64> {
    check_block(n, two_j)?;
    crate::state::check_purity("r", r)?;
    Ok(WeightPoint::from_one_minus_r(1.0 - r).ln_block_weight(n, two_j, method))
}

/// `W_j(r)`, the probability of one particular copy of block `j`.
pub fn block_weight(n: u64, two_j: u64, r: f64) -> Result<f64> {
    Ok(ln_block_weight(n, two_j, r, SeriesMethod::Auto)?.exp())
}

/// `n_j·W_j(r)`, the probability of landing in any copy of block `j`.
pub fn block_probability(n: u64, two_j: u64, r: f64) -> Result<f64> {
    let ln_mult = ln_biguint(&multiplicity(n, two_j)?);
    Ok((ln_mult + ln_block_weight(n, two_j, r, SeriesMethod::Auto)?).exp())
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    node: RadialNode,
    weight_point: WeightPoint,
}

/// Radial nodes of both quadrature rules, prepared for one prior.
struct JointGrid {
    primary: Vec<GridPoint>,
    refined: Vec<GridPoint>,
}

impl JointGrid {
    fn new(prior: &PurityPrior) -> Self {
        let prepare = |rule: &GaussLegendre| {
            prior
                .radial_nodes(rule)
                .into_iter()
                .map(|node| GridPoint {
                    node,
                    weight_point: WeightPoint::from_one_minus_r(node.one_minus_r),
                })
                .collect()
        };
        Self {
            primary: prepare(GaussLegendre::primary()),
            refined: prepare(GaussLegendre::refined()),
        }
    }

    /// `(n_j A_j, n_j B_j, n_j ∫ w W_j)` on one rule.
    fn integrate(points: &[GridPoint], n: u64, two_j: u64, ln_mult: f64) -> (f64, f64, f64) {
        let mut a = CompensatedSum::new();
        let mut b = CompensatedSum::new();
        let mut mass = CompensatedSum::new();
        for p in points {
            let ln_w = p.weight_point.ln_block_weight(n, two_j, SeriesMethod::Auto);
            let weight = p.node.weight * (ln_mult + ln_w).exp();
            a.add(weight * p.node.r);
            b.add(weight * p.node.co_purity);
            mass.add(weight);
        }
        (a.value(), b.value(), mass.value())
    }

    fn block(&self, n: u64, two_j: u64) -> Result<SpinBlock> {
        let multiplicity = multiplicity(n, two_j)?;
        let ln_mult = ln_biguint(&multiplicity);
        let (a_coarse, b_coarse, _) = Self::integrate(&self.primary, n, two_j, ln_mult);
        let (a, b, probability) = Self::integrate(&self.refined, n, two_j, ln_mult);
        let error = (a - a_coarse).abs().max((b - b_coarse).abs());
        let contribution = a.hypot(b);
        if error > QUADRATURE_TOLERANCE * contribution.max(NEGLIGIBLE_CONTRIBUTION) {
            return Err(Error::QuadratureFailure {
                n,
                two_j,
                estimate: error,
            });
        }
        let r_j = if contribution > 0.0 {
            a / contribution
        } else {
            // Unreachable block; any guess scores zero.
            0.0
        };
        let unscale = (-ln_mult).exp();
        Ok(SpinBlock {
            n_copies: n,
            two_j,
            a_j: unscale_value(a, ln_mult, unscale),
            b_j: unscale_value(b, ln_mult, unscale),
            multiplicity,
            ln_multiplicity: ln_mult,
            weighted_a: a,
            weighted_b: b,
            r_j,
            probability,
            quadrature_error: error,
        })
    }
}

fn unscale_value(x: f64, ln_mult: f64, unscale: f64) -> f64 {
    if unscale > 0.0 {
        x * unscale
    } else if x > 0.0 {
        (x.ln() - ln_mult).exp()
    } else {
        0.0
    }
}

/// `(A_j, B_j)` for block `2j` of `N` copies under `prior`.
pub fn block_integrals(n: u64, two_j: u64, prior: &PurityPrior) -> Result<(f64, f64)> {
    check_block(n, two_j)?;
    let block = JointGrid::new(prior).block(n, two_j)?;
    Ok((block.a_j, block.b_j))
}

/// `R = A/√(A² + B²)`, the maximizer of `A·R + B·√(1 − R²)` on `[0, 1]`.
pub fn optimal_estimate(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "block integrals must be non-negative, got ({a}, {b})"
        )));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::DegenerateIntegrals);
    }
    Ok(a / a.hypot(b))
}

/// Maximal average fidelity over all measurements on `N` copies.
///
/// Blocks are evaluated in parallel and summed in ascending `2j` order, so
/// the result does not depend on scheduling.
pub fn max_fidelity(n: u64, prior: &PurityPrior) -> Result<JointBoundResult> {
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one copy".into()));
    }
    let grid = JointGrid::new(prior);
    let spins: Vec<u64> = block_spins(n).collect();
    let blocks = spins
        .par_iter()
        .map(|&two_j| grid.block(n, two_j))
        .collect::<Result<Vec<_>>>()?;
    let f_max = stable_sum(blocks.iter().map(SpinBlock::contribution)).min(1.0);
    Ok(JointBoundResult {
        n_copies: n,
        gap: n as f64 * (1.0 - f_max),
        blocks,
        f_max,
    })
}
