//! Von Neumann spin measurements on product states.
//!
//! Measuring `(1 ± m̂·σ⃗)/2` on a copy of `ρ = (1 + r⃗·σ⃗)/2` gives `+1` with
//! probability `(1 + r⃗·m̂)/2`, so `k` copies along one axis yield a
//! binomial count. Nothing here ever touches a density matrix.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::state::{BlochVector, UnitVector};

/// Up to this many shots the count is drawn by CDF inversion.
pub const INVERSION_MAX_SHOTS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountPair {
    pub plus: u64,
    pub minus: u64,
}

impl CountPair {
    pub fn shots(&self) -> u64 {
        self.plus + self.minus
    }

    /// `2·plus/shots − 1`, the estimate of `r⃗·m̂`.
    pub fn mean_outcome(&self) -> f64 {
        2.0 * self.plus as f64 / self.shots() as f64 - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AxisCounts {
    pub x: CountPair,
    pub y: CountPair,
    pub z: CountPair,
}

impl AxisCounts {
    pub fn axes(&self) -> [CountPair; 3] {
        [self.x, self.y, self.z]
    }
}

/// Splits `n0` shots over x, y, z as evenly as possible, remainder to x then y.
pub fn tomography_budgets(n0: u64) -> [u64; 3] {
    let base = n0 / 3;
    let rem = n0 % 3;
    [base + u64::from(rem > 0), base + u64::from(rem > 1), base]
}

/// Exact binomial draw: inversion for small `shots`, BTPE otherwise.
pub fn sample_binomial<R: Rng + ?Sized>(shots: u64, p: f64, rng: &mut R) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if shots == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return shots;
    }
    if shots <= INVERSION_MAX_SHOTS {
        return if p > 0.5 {
            shots - binomial_inversion(shots, 1.0 - p, rng)
        } else {
            binomial_inversion(shots, p, rng)
        };
    }
    Binomial::new(shots, p)
        .expect("p is a probability")
        .sample(rng)
}

/// Sequential search of the CDF; `p ≤ 1/2` keeps `(1 − p)^shots` away from underflow.
fn binomial_inversion<R: Rng + ?Sized>(shots: u64, p: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let odds = p / (1.0 - p);
    let mut pmf = (1.0 - p).powi(shots as i32);
    let mut cdf = pmf;
    let mut k = 0;
    while u >= cdf && k < shots {
        pmf *= (shots - k) as f64 / (k + 1) as f64 * odds;
        k += 1;
        cdf += pmf;
    }
    k
}

/// Measures `shots` copies of `state` along `axis`.
pub fn measure_axis<R: Rng + ?Sized>(
    state: &BlochVector,
    axis: &UnitVector,
    shots: u64,
    rng: &mut R,
) -> CountPair {
    let p = 0.5 * (1.0 + state.projection(axis));
    let plus = sample_binomial(shots, p, rng);
    CountPair {
        plus,
        minus: shots - plus,
    }
}

/// Three-axis tomography with `n0` copies split by [`tomography_budgets`].
pub fn tomography_counts<R: Rng + ?Sized>(
    state: &BlochVector,
    n0: u64,
    rng: &mut R,
) -> Result<AxisCounts> {
    if n0 < 3 {
        return Err(Error::TooFewShots { needed: 3, got: n0 });
    }
    let [bx, by, bz] = tomography_budgets(n0);
    Ok(AxisCounts {
        x: measure_axis(state, &UnitVector::X, bx, rng),
        y: measure_axis(state, &UnitVector::Y, by, rng),
        z: measure_axis(state, &UnitVector::Z, bz, rng),
    })
}
