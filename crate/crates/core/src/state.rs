//! Qubit states as Bloch vectors and the purity figure of merit.

use crate::error::{Error, Result};

/// Norm slack tolerated before a vector is rejected as a state.
const NORM_SLACK: f64 = 1e-12;
/// Tolerance on `|axis| = 1` for measurement axes.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A direction in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector([f64; 3]);

impl UnitVector {
    pub const X: UnitVector = UnitVector([1.0, 0.0, 0.0]);
    pub const Y: UnitVector = UnitVector([0.0, 1.0, 0.0]);
    pub const Z: UnitVector = UnitVector([0.0, 0.0, 1.0]);

    /// Accepts a vector whose norm is 1 within [`UNIT_TOLERANCE`] and
    /// renormalizes it exactly.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = norm3(v);
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitAxis(norm));
        }
        Ok(Self(scale(v, 1.0 / norm)))
    }

    /// Direction of an arbitrary non-zero vector.
    pub fn normalize(v: [f64; 3]) -> Result<Self> {
        let norm = norm3(v);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self(scale(v, 1.0 / norm)))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot3(self.0, other.0)
    }

    /// Angle to `other` in `[0, π]`, accurate for small angles.
    pub fn angle_to(&self, other: &UnitVector) -> f64 {
        let c = cross3(self.0, other.0);
        norm3(c).atan2(self.dot(other))
    }
}

/// Bloch vector `r⃗` of the state `ρ = (1 + r⃗·σ⃗)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    components: [f64; 3],
}

impl BlochVector {
    pub const MAXIMALLY_MIXED: BlochVector = BlochVector {
        components: [0.0; 3],
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = [x, y, z];
        let norm = norm3(v);
        if !norm.is_finite() || norm > 1.0 + NORM_SLACK {
            return Err(Error::NotAState(norm));
        }
        let components = if norm > 1.0 { scale(v, 1.0 / norm) } else { v };
        Ok(Self { components })
    }

    /// State with purity `r` pointing along `direction`.
    pub fn from_purity(r: f64, direction: UnitVector) -> Result<Self> {
        check_purity("r", r)?;
        Ok(Self {
            components: scale(direction.0, r),
        })
    }

    pub fn components(&self) -> [f64; 3] {
        self.components
    }

    /// Purity `r = |r⃗|`, at most 1.
    pub fn purity(&self) -> f64 {
        norm3(self.components).min(1.0)
    }

    /// `n̂ = r⃗/r`, or `None` for the maximally mixed state.
    pub fn direction(&self) -> Option<UnitVector> {
        UnitVector::normalize(self.components).ok()
    }

    /// Projection `r⃗·m̂` onto a measurement axis.
    pub fn projection(&self, axis: &UnitVector) -> f64 {
        dot3(self.components, axis.0)
    }
}

/// A purity estimate, clamped to `[0, 1]`, with the unclamped read-out kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityEstimate {
    pub value: f64,
    pub raw: f64,
}

impl PurityEstimate {
    pub fn from_raw(raw: f64) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            raw,
        }
    }

    pub fn was_clamped(&self) -> bool {
        self.value != self.raw
    }
}

pub(crate) fn check_purity(what: &'static str, r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::PurityOutOfRange { what, value: r })
    }
}

/// `√(1 − r²)` evaluated as `√((1 − r)(1 + r))`.
pub(crate) fn co_purity(r: f64) -> f64 {
    ((1.0 - r) * (1.0 + r)).max(0.0).sqrt()
}

/// Fidelity `rR + √(1−r²)√(1−R²)` between purities `r` and `estimate`.
pub fn fidelity(r: f64, estimate: f64) -> Result<f64> {
    check_purity("r", r)?;
    check_purity("R", estimate)?;
    Ok(fidelity_unchecked(r, estimate))
}

#[inline]
pub(crate) fn fidelity_unchecked(r: f64, estimate: f64) -> f64 {
    (r * estimate + co_purity(r) * co_purity(estimate)).clamp(0.0, 1.0)
}

/// Geodesic (Bures) distance `½·arccos f(r, R)` between constant-purity shells.
pub fn bures_distance(r: f64, estimate: f64) -> Result<f64> {
    Ok(0.5 * fidelity(r, estimate)?.acos())
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    a[0].hypot(a[1]).hypot(a[2])
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
