//! Floating-point scalar abstraction for the numerical core.
//!
//! Everything in this crate is generic over the real scalar type through
//! [`RealScalar`]; complex arithmetic is `num_complex::Complex<R>` on top of
//! it. Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::{Product, Sum};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait RealScalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Product
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for tolerance constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert to scalar")
    }

    /// Conversion from a `usize` count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must convert to scalar")
    }
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// Complex number over the crate's real scalar.
pub type Cx<R> = Complex<R>;

/// `Complex::new` shorthand.
#[inline]
pub fn cx<R: RealScalar>(re: R, im: R) -> Cx<R> {
    Complex::new(re, im)
}

/// Real number promoted to a complex value.
#[inline]
pub fn cre<R: RealScalar>(re: R) -> Cx<R> {
    Complex::new(re, R::zero())
}
