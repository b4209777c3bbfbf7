//! Scalar abstraction for the linear algebra kernel.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::traits::{One, Zero};

/// Field-like scalar: everything the elimination routines need.
///
/// Instantiated with `BigRational` for the exact pipeline; any other field
/// type satisfying the bounds (e.g. `f64` for quick experiments) also works,
/// though the analysis modules only ever use the exact instantiation.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}
