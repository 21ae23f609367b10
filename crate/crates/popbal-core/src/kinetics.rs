//! Thermodynamics and growth kinetics, written over the abstract
//! differentiable scalar so every expression can be traced.
//!
//! Growth is clamped to exactly zero at supersaturation S <= 1 (growth-only
//! model, no dissolution); the clamp's derivative is zero on that branch.

use autodiff::Scalar;

use crate::error::{KineticsError, ModelError};
use crate::liquid::LiquidState;
use crate::material::MaterialProperties;

/// Arrhenius-type growth parameters for one crystal dimension:
/// `G = rate_coeff · exp(-activation_temp / (T + 273.15)) · (S - 1)^exponent`.
#[derive(Debug, Clone, Copy)]
pub struct ArrheniusParams<S: Scalar = f64> {
    /// Pre-exponential factor [µm/min].
    pub rate_coeff: S,
    /// Activation temperature in kelvin.
    pub activation_temp: S,
    /// Supersaturation exponent [-].
    pub exponent: S,
}

/// A growth-rate model with its estimable parameters.
#[derive(Debug, Clone)]
pub enum GrowthLaw<S: Scalar = f64> {
    Arrhenius {
        dim1: ArrheniusParams<S>,
        dim2: ArrheniusParams<S>,
    },
    /// `G = sum_j coeffs[j-1] · (S - 1)^j`, one coefficient vector per
    /// dimension. The shared-coefficient constructor clones one vector into
    /// both slots, which for traced scalars keeps both dimensions pointing at
    /// the same differentiation inputs.
    Polynomial { dim1: Vec<S>, dim2: Vec<S> },
}

impl<S: Scalar> GrowthLaw<S> {
    pub fn arrhenius(
        dim1: ArrheniusParams<S>,
        dim2: ArrheniusParams<S>,
    ) -> Result<Self, ModelError> {
        for (name, p) in [("dim1", &dim1), ("dim2", &dim2)] {
            if !(p.rate_coeff.value() > 0.0) {
                return Err(ModelError::NonPositive {
                    name: match name {
                        "dim1" => "rate_coeff (dim 1)",
                        _ => "rate_coeff (dim 2)",
                    },
                    value: p.rate_coeff.value(),
                });
            }
            if !(p.exponent.value() > 0.0) {
                return Err(ModelError::NonPositive {
                    name: match name {
                        "dim1" => "exponent (dim 1)",
                        _ => "exponent (dim 2)",
                    },
                    value: p.exponent.value(),
                });
            }
        }
        Ok(Self::Arrhenius { dim1, dim2 })
    }

    /// One coefficient vector applied to both dimensions.
    pub fn polynomial_shared(coeffs: Vec<S>) -> Result<Self, ModelError> {
        Self::polynomial_per_dim(coeffs.clone(), coeffs)
    }

    pub fn polynomial_per_dim(dim1: Vec<S>, dim2: Vec<S>) -> Result<Self, ModelError> {
        for coeffs in [&dim1, &dim2] {
            if coeffs.is_empty() {
                return Err(ModelError::EmptyPolynomial);
            }
            if let Some(bad) = coeffs.iter().find(|c| !(c.value() >= 0.0)) {
                return Err(ModelError::Negative {
                    name: "polynomial coefficient",
                    value: bad.value(),
                });
            }
        }
        Ok(Self::Polynomial { dim1, dim2 })
    }

    /// Number of independent parameters.
    pub fn parameter_count(&self) -> usize {
        match self {
            Self::Arrhenius { .. } => 6,
            Self::Polynomial { dim1, dim2 } => dim1.len() + dim2.len(),
        }
    }
}

impl GrowthLaw<f64> {
    /// The default Arrhenius growth law for both crystal dimensions.
    pub fn arrhenius_default() -> Self {
        Self::Arrhenius {
            dim1: ArrheniusParams {
                rate_coeff: 8.86e6,
                activation_temp: 2.45e3,
                exponent: 3.7,
            },
            dim2: ArrheniusParams {
                rate_coeff: 4.088e5,
                activation_temp: 2.4e3,
                exponent: 2.5,
            },
        }
    }

    /// Lifts all parameters into another scalar type as constants.
    pub fn lift<S: Scalar>(&self) -> GrowthLaw<S> {
        match self {
            Self::Arrhenius { dim1, dim2 } => GrowthLaw::Arrhenius {
                dim1: lift_params(dim1),
                dim2: lift_params(dim2),
            },
            Self::Polynomial { dim1, dim2 } => GrowthLaw::Polynomial {
                dim1: dim1.iter().map(|&c| S::constant(c)).collect(),
                dim2: dim2.iter().map(|&c| S::constant(c)).collect(),
            },
        }
    }
}

fn lift_params<S: Scalar>(p: &ArrheniusParams<f64>) -> ArrheniusParams<S> {
    ArrheniusParams {
        rate_coeff: S::constant(p.rate_coeff),
        activation_temp: S::constant(p.activation_temp),
        exponent: S::constant(p.exponent),
    }
}

/// Exponential solubility `c*(T) = a·exp(b·T)`, strictly positive.
pub fn solubility<S: Scalar>(temp_c: S, material: &MaterialProperties) -> S {
    S::constant(material.solubility_a) * (temp_c * S::constant(material.solubility_b)).exp()
}

/// Supersaturation S = c / c*(T), the thermodynamic driving force.
pub fn supersaturation<S: Scalar>(state: &LiquidState<S>, material: &MaterialProperties) -> S {
    state.concentration / solubility(S::constant(state.temp_c), material)
}

/// Growth rate along dimension `dim` (1 or 2) in µm/min.
///
/// Returns exactly zero for S <= 1: the model is growth-only and fractional
/// exponents are undefined for negative driving forces. `(S-1)^k` is
/// evaluated as `exp(k·ln(S-1))`, which the clamp guard keeps in-domain.
pub fn growth_rate<S: Scalar>(
    law: &GrowthLaw<S>,
    dim: usize,
    s_ratio: S,
    temp_c: f64,
) -> Result<S, KineticsError> {
    if dim != 1 && dim != 2 {
        return Err(KineticsError::UnknownDimension(dim));
    }
    if s_ratio.value() <= 1.0 {
        return Ok(S::constant(0.0));
    }
    let driving = s_ratio - S::constant(1.0);
    let rate = match law {
        GrowthLaw::Arrhenius { dim1, dim2 } => {
            let p = if dim == 1 { dim1 } else { dim2 };
            let kelvin = S::constant(temp_c + 273.15);
            let arrhenius = (-p.activation_temp / kelvin).exp();
            p.rate_coeff * arrhenius * (driving.ln() * p.exponent).exp()
        }
        GrowthLaw::Polynomial { dim1, dim2 } => {
            let coeffs = if dim == 1 { dim1 } else { dim2 };
            // Horner form of sum_j a_j u^j, lowest power outermost.
            let inner = coeffs
                .iter()
                .rev()
                .fold(S::constant(0.0), |acc, &a| acc * driving + a);
            inner * driving
        }
    };
    Ok(rate)
}
