use std::f64::consts::PI;

use crate::error::ModelError;

/// Crystal and solubility constants.
///
/// Units: `crystal_density` in g/µm³, `shape_factor` dimensionless,
/// `solubility_a` in g/kg and `solubility_b` in 1/°C for the exponential
/// solubility `c*(T) = a·exp(b·T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialProperties {
    pub crystal_density: f64,
    pub shape_factor: f64,
    pub solubility_a: f64,
    pub solubility_b: f64,
}

impl MaterialProperties {
    pub fn new(
        crystal_density: f64,
        shape_factor: f64,
        solubility_a: f64,
        solubility_b: f64,
    ) -> Result<Self, ModelError> {
        if !(crystal_density > 0.0) {
            return Err(ModelError::NonPositive {
                name: "crystal_density",
                value: crystal_density,
            });
        }
        if !(shape_factor > 0.0 && shape_factor <= 1.0) {
            return Err(ModelError::OutOfRange {
                name: "shape_factor",
                value: shape_factor,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self {
            crystal_density,
            shape_factor,
            solubility_a,
            solubility_b,
        })
    }

    /// ρc·kv, the factor converting the (1,2) cross moment into crystal mass
    /// per kilogram of solvent.
    pub fn volume_to_mass(&self) -> f64 {
        self.crystal_density * self.shape_factor
    }
}

impl Default for MaterialProperties {
    /// Cylindrical crystals with the default density and exponential
    /// solubility constants.
    fn default() -> Self {
        Self {
            crystal_density: 1.11e-12,
            shape_factor: PI / 4.0,
            solubility_a: 3.37,
            solubility_b: 0.036,
        }
    }
}
