//! Scalar abstraction for the numeric parts of the toolkit.
//!
//! Geometry and statistics are generic over [`Real`] so they can run in
//! `f32` or `f64`; the crate root pins the default instantiation with the
//! [`crate::Scalar`] alias.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable for kinematics and statistics.
pub trait Real: Float + FromPrimitive + ToPrimitive + NumAssign + Copy + std::fmt::Debug {
    /// Lossy conversion from `f64`, used to feed constants into generic code.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts into any Real")
    }

    /// Lossy conversion to `f64`, used to hand values to f64-only numerics.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn midpoint<S: Real>(a: S, b: S) -> S {
        (a + b) / S::from_f64_lossy(2.0)
    }

    #[test]
    fn generic_over_both_widths() {
        assert_eq!(midpoint(1.0f32, 3.0f32), 2.0f32);
        assert_eq!(midpoint(1.0f64, 3.0f64), 2.0f64);
    }
}
