use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// The abstract differentiable scalar.
///
/// Implementations must perform bit-identical primal arithmetic: for a given
/// sequence of operations, the `f64`, [`crate::Dual`] and [`crate::Var`]
/// evaluations produce the same primal values to the last bit. This is what
/// lets a solver written once against `Scalar` be checked against its own
/// plain-float run.
///
/// Branching belongs to the caller and must inspect [`Scalar::value`] only:
///
/// ```
/// use autodiff::Scalar;
///
/// fn ramp<S: Scalar>(x: S) -> S {
///     if x.value() <= 0.0 {
///         S::constant(0.0)
///     } else {
///         x * x
///     }
/// }
///
/// let y = ramp(autodiff::Dual::variable(3.0));
/// assert_eq!((y.value, y.tangent), (9.0, 6.0));
/// assert_eq!(ramp(-2.0_f64), 0.0);
/// ```
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lifts a plain number into the scalar type with zero derivative.
    fn constant(value: f64) -> Self;

    /// The primal value. All control flow branches on this.
    fn value(&self) -> f64;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;

    /// Minimum by primal comparison; ties select `self`.
    fn min(self, other: Self) -> Self;

    /// Maximum by primal comparison; ties select `self`.
    fn max(self, other: Self) -> Self;

    /// `self^k` for a constant exponent, computed as `exp(k·ln(self))` so the
    /// arithmetic path is identical for every implementation. Callers guard
    /// the domain (`self > 0`).
    fn powf(self, exponent: f64) -> Self {
        (self.ln() * Self::constant(exponent)).exp()
    }

    /// Clamps from below at a constant threshold (derivative 0 on the clamped
    /// branch).
    fn clamp_min(self, floor: f64) -> Self {
        self.max(Self::constant(floor))
    }

    /// Applies a caller-supplied differentiable primitive: `f` maps the
    /// primal value to `(result, d result / d self)`.
    ///
    /// The primal expression inside `f` defines the value for every
    /// implementation, so plain and traced runs stay bit-identical; the
    /// stated partial becomes the recorded local derivative. This is the
    /// extension point for fusing a hot compound expression into a single
    /// tape node.
    fn custom_unary(self, f: impl FnOnce(f64) -> (f64, f64)) -> Self;

    /// Two-argument custom primitive: `f` maps the primal values to
    /// `(result, d/d self, d/d other)`.
    fn custom_binary(self, other: Self, f: impl FnOnce(f64, f64) -> (f64, f64, f64)) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(value: f64) -> Self {
        value
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }

    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }

    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }

    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        // Branch shape matches the Dual/Var implementations (ties -> self),
        // not f64::min, so primal trajectories stay bit-comparable.
        if self <= other {
            self
        } else {
            other
        }
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    #[inline]
    fn custom_unary(self, f: impl FnOnce(f64) -> (f64, f64)) -> Self {
        f(self).0
    }

    #[inline]
    fn custom_binary(self, other: Self, f: impl FnOnce(f64, f64) -> (f64, f64, f64)) -> Self {
        f(self, other).0
    }
}
