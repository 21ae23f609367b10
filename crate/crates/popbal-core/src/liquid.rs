use autodiff::Scalar;

use crate::error::ModelError;

/// Liquid-phase state: solute concentration in g per kg of solvent and the
/// (constant) temperature in °C. The supersaturation is derived, not stored.
///
/// Concentration is generic over the differentiable scalar so the mass
/// balance can be traced; temperature stays a plain number because the
/// simulated profiles are isothermal.
#[derive(Debug, Clone, Copy)]
pub struct LiquidState<S: Scalar = f64> {
    pub concentration: S,
    pub temp_c: f64,
}

impl<S: Scalar> LiquidState<S> {
    pub fn new(concentration: S, temp_c: f64) -> Result<Self, ModelError> {
        if concentration.value() < 0.0 {
            return Err(ModelError::Negative {
                name: "concentration",
                value: concentration.value(),
            });
        }
        Ok(Self {
            concentration,
            temp_c,
        })
    }
}
