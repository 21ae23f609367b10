use crate::error::ModelError;
use crate::grid::Grid2d;
use crate::material::MaterialProperties;
use crate::seed::SeedSpec;

/// How the solver records its trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Record at `output_sampling` uniformly spaced times; each requested
    /// time takes the state of the first step at or past it.
    OutputTimes,
    /// Record the state after every time step (used by the estimation loss,
    /// which interpolates between steps).
    EveryStep,
}

/// Everything a forward simulation needs besides the growth law, which is
/// passed separately so it can carry differentiable parameters.
///
/// Time is in minutes internally; use [`SimulationConfig::with_t_max_hours`]
/// when the horizon is specified in hours.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub grid: Grid2d,
    pub seed: SeedSpec,
    pub material: MaterialProperties,
    /// Horizon in minutes.
    pub t_max_min: f64,
    /// Constant operating temperature in °C.
    pub temp_c: f64,
    /// Initial concentration in g per kg solvent.
    pub c0: f64,
    /// Courant number for the CFL time step, in (0, 1).
    pub courant: f64,
    /// Number of uniformly spaced output times (including t = 0 and t_max).
    pub output_sampling: usize,
    pub sampling: SamplingMode,
}

impl SimulationConfig {
    pub fn new(grid: Grid2d, seed: SeedSpec, material: MaterialProperties) -> Self {
        Self {
            grid,
            seed,
            material,
            t_max_min: 60.0,
            temp_c: 15.0,
            c0: 8.0,
            courant: 0.9,
            output_sampling: 200,
            sampling: SamplingMode::OutputTimes,
        }
    }

    pub fn with_t_max_hours(mut self, hours: f64) -> Self {
        self.t_max_min = hours * 60.0;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.courant > 0.0 && self.courant < 1.0) {
            return Err(ModelError::OutOfRange {
                name: "courant",
                value: self.courant,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if !(self.t_max_min > 0.0) {
            return Err(ModelError::NonPositive {
                name: "t_max",
                value: self.t_max_min,
            });
        }
        if !(self.c0 >= 0.0) {
            return Err(ModelError::Negative {
                name: "c0",
                value: self.c0,
            });
        }
        if self.sampling == SamplingMode::OutputTimes && self.output_sampling < 2 {
            return Err(ModelError::TooFewSamples(self.output_sampling));
        }
        Ok(())
    }
}
