//! Numeric bounds shared by the generic parts of the crate.
//!
//! Selection and constraint weights only need exact ring arithmetic and an
//! ordering, so they accept rationals as well as floats. Everything that
//! goes through a sigmoid or a logarithm is bounded by [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Clause weights, penalties and objective values.
pub trait Weight: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

impl<T> Weight for T where T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

/// Floating point scalars for model fitting and ranking metrics.
pub trait Real: Float + Weight + Send + Sync + 'static {}

impl<T> Real for T where T: Float + Weight + Send + Sync + 'static {}

/// Converts an `f64` constant into `W`.
///
/// Panics only if `W` cannot represent a finite configuration value, which
/// would be a programming error for every type this crate is used with.
pub(crate) fn cast<W: Weight>(value: f64) -> W {
    W::from_f64(value).unwrap_or_else(|| panic!("{value} is not representable"))
}

pub(crate) fn logistic<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus<T: Real>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}
