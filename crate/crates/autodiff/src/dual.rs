use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::Scalar;

/// Forward-mode dual number: a primal value paired with a tangent that the
/// chain rule propagates through every primitive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub tangent: f64,
}

impl Dual {
    /// A differentiation variable: tangent seeded to 1.
    #[inline]
    pub fn variable(value: f64) -> Self {
        Self {
            value,
            tangent: 1.0,
        }
    }

    #[inline]
    pub fn with_tangent(value: f64, tangent: f64) -> Self {
        Self { value, tangent }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            tangent: self.tangent + rhs.tangent,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            tangent: self.tangent - rhs.tangent,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self {
            value: self.value * rhs.value,
            tangent: self.tangent * rhs.value + self.value * rhs.tangent,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let value = self.value / rhs.value;
        Self {
            value,
            tangent: (self.tangent - value * rhs.tangent) / rhs.value,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Self {
        Self {
            value: -self.value,
            tangent: -self.tangent,
        }
    }
}

impl Scalar for Dual {
    #[inline]
    fn constant(value: f64) -> Self {
        Self {
            value,
            tangent: 0.0,
        }
    }

    #[inline]
    fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    fn exp(self) -> Self {
        let value = self.value.exp();
        Self {
            value,
            tangent: self.tangent * value,
        }
    }

    #[inline]
    fn ln(self) -> Self {
        Self {
            value: self.value.ln(),
            tangent: self.tangent / self.value,
        }
    }

    #[inline]
    fn sin(self) -> Self {
        Self {
            value: self.value.sin(),
            tangent: self.tangent * self.value.cos(),
        }
    }

    #[inline]
    fn cos(self) -> Self {
        Self {
            value: self.value.cos(),
            tangent: -self.tangent * self.value.sin(),
        }
    }

    #[inline]
    fn abs(self) -> Self {
        if self.value >= 0.0 {
            self
        } else {
            -self
        }
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        if self.value <= other.value {
            self
        } else {
            other
        }
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if self.value >= other.value {
            self
        } else {
            other
        }
    }

    #[inline]
    fn custom_unary(self, f: impl FnOnce(f64) -> (f64, f64)) -> Self {
        let (value, partial) = f(self.value);
        Self {
            value,
            tangent: self.tangent * partial,
        }
    }

    #[inline]
    fn custom_binary(self, other: Self, f: impl FnOnce(f64, f64) -> (f64, f64, f64)) -> Self {
        let (value, d_self, d_other) = f(self.value, other.value);
        Self {
            value,
            tangent: self.tangent * d_self + other.tangent * d_other,
        }
    }
}
