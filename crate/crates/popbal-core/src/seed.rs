use crate::error::ModelError;

/// Marginal shape of the seed distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedShape {
    Normal,
    /// Log-normal, parametrized by its arithmetic mean and standard
    /// deviation (converted internally to the underlying normal parameters).
    LogNormal,
}

/// Seed population: independent marginals along the two lengths, scaled so
/// the seeded crystal mass equals `mass` grams per kilogram of solvent.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSpec {
    pub shape: SeedShape,
    pub mean_l1: f64,
    pub mean_l2: f64,
    pub sigma_l1: f64,
    pub sigma_l2: f64,
    pub mass: f64,
}

impl SeedSpec {
    pub fn new(
        shape: SeedShape,
        mean_l1: f64,
        mean_l2: f64,
        sigma_l1: f64,
        sigma_l2: f64,
        mass: f64,
    ) -> Result<Self, ModelError> {
        for (name, value) in [("sigma_l1", sigma_l1), ("sigma_l2", sigma_l2)] {
            if !(value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        if !(mass >= 0.0) {
            return Err(ModelError::Negative {
                name: "seed mass",
                value: mass,
            });
        }
        Ok(Self {
            shape,
            mean_l1,
            mean_l2,
            sigma_l1,
            sigma_l2,
            mass,
        })
    }
}

impl Default for SeedSpec {
    /// The default Gaussian seed: 400 x 250 µm mean, 30 µm spread, 1 g/kg.
    fn default() -> Self {
        Self {
            shape: SeedShape::Normal,
            mean_l1: 400.0,
            mean_l2: 250.0,
            sigma_l1: 30.0,
            sigma_l2: 30.0,
            mass: 1.0,
        }
    }
}
