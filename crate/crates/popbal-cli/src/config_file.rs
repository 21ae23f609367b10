//! The run-configuration file: a TOML document with nested sections
//! mirroring the core domain types. Unknown keys are rejected so typos fail
//! loudly instead of silently falling back to defaults.

use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use popbal_core::estimate::EstimationSetup;
use popbal_core::{
    ArrheniusParams, Grid2d, GrowthLaw, MaterialProperties, SeedShape, SeedSpec, SimulationConfig,
};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    #[serde(default)]
    pub seed: SeedSection,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub growth: GrowthSection,
    pub simulation: SimulationSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub benchmark: Option<BenchmarkSection>,
    #[serde(default)]
    pub estimate: Option<EstimateSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub l1_max: f64,
    pub l2_max: f64,
    pub dl1: f64,
    pub dl2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedSection {
    pub shape: String,
    pub mean_l1: f64,
    pub mean_l2: f64,
    pub sigma_l1: f64,
    pub sigma_l2: f64,
    pub mass: f64,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            shape: "normal".into(),
            mean_l1: 400.0,
            mean_l2: 250.0,
            sigma_l1: 30.0,
            sigma_l2: 30.0,
            mass: 1.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialSection {
    pub crystal_density: f64,
    pub shape_factor: f64,
    pub solubility_a: f64,
    pub solubility_b: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        Self {
            crystal_density: 1.11e-12,
            shape_factor: PI / 4.0,
            solubility_a: 3.37,
            solubility_b: 0.036,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthSection {
    /// "arrhenius" or "polynomial".
    pub model: String,
    /// Arrhenius pre-exponential factors per dimension [µm/min].
    pub rate_coeff: [f64; 2],
    /// Arrhenius activation temperatures per dimension, in kelvin.
    pub activation_temp: [f64; 2],
    /// Arrhenius supersaturation exponents per dimension.
    pub exponent: [f64; 2],
    /// Polynomial coefficients (shared across dimensions unless
    /// `coefficients_dim2` is given).
    pub coefficients: Vec<f64>,
    pub coefficients_dim2: Option<Vec<f64>>,
}

impl Default for GrowthSection {
    fn default() -> Self {
        Self {
            model: "arrhenius".into(),
            rate_coeff: [8.86e6, 4.088e5],
            activation_temp: [2.45e3, 2.4e3],
            exponent: [3.7, 2.5],
            coefficients: Vec::new(),
            coefficients_dim2: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// Horizon; exactly one of the two units must be given.
    pub t_max_min: Option<f64>,
    pub t_max_h: Option<f64>,
    #[serde(default = "default_temp")]
    pub temp_c: f64,
    #[serde(default = "default_c0")]
    pub c0: f64,
    #[serde(default = "default_courant")]
    pub courant: f64,
    #[serde(default = "default_sampling")]
    pub output_sampling: usize,
}

fn default_temp() -> f64 {
    15.0
}

fn default_c0() -> f64 {
    8.0
}

fn default_courant() -> f64 {
    0.9
}

fn default_sampling() -> usize {
    200
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Relative tolerance for the oracle comparison.
    pub tolerance: f64,
    /// Fixed RK4 step count for the oracle trace.
    pub mom_steps: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            tolerance: 0.01,
            mom_steps: 20_000,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub bin_sizes: Vec<f64>,
    #[serde(default)]
    pub growth_ratio_factors: Vec<f64>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Verification guard; coarse grids carry a few percent of
    /// discretization error.
    #[serde(default = "default_guard")]
    pub tolerance: f64,
}

fn default_repeats() -> usize {
    10
}

fn default_guard() -> f64 {
    0.05
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub k_values: Vec<usize>,
    pub backends: Vec<String>,
    #[serde(default = "default_iterations")]
    pub n_iterations: usize,
    pub t_max_min: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_substeps")]
    pub mom_substeps: usize,
    /// Truth model used to generate the in-silico data: "arrhenius" (the
    /// default law) or "polynomial" with `truth_coefficients`.
    #[serde(default = "default_truth")]
    pub truth: String,
    #[serde(default)]
    pub truth_coefficients: Vec<f64>,
    #[serde(default = "default_shared")]
    pub shared_coefficients: bool,
    #[serde(default = "default_guard")]
    pub tolerance: f64,
}

fn default_iterations() -> usize {
    100
}

fn default_samples() -> usize {
    600
}

fn default_substeps() -> usize {
    10
}

fn default_truth() -> String {
    "arrhenius".into()
}

fn default_shared() -> bool {
    true
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid2d> {
        Ok(Grid2d::new(
            self.grid.l1_max,
            self.grid.l2_max,
            self.grid.dl1,
            self.grid.dl2,
        )?)
    }

    pub fn seed(&self) -> Result<SeedSpec> {
        let shape = match self.seed.shape.as_str() {
            "normal" => SeedShape::Normal,
            "log-normal" => SeedShape::LogNormal,
            other => bail!("unknown seed shape '{other}' (expected normal or log-normal)"),
        };
        Ok(SeedSpec::new(
            shape,
            self.seed.mean_l1,
            self.seed.mean_l2,
            self.seed.sigma_l1,
            self.seed.sigma_l2,
            self.seed.mass,
        )?)
    }

    pub fn material(&self) -> Result<MaterialProperties> {
        Ok(MaterialProperties::new(
            self.material.crystal_density,
            self.material.shape_factor,
            self.material.solubility_a,
            self.material.solubility_b,
        )?)
    }

    pub fn growth_law(&self) -> Result<GrowthLaw<f64>> {
        match self.growth.model.as_str() {
            "arrhenius" => Ok(GrowthLaw::arrhenius(
                ArrheniusParams {
                    rate_coeff: self.growth.rate_coeff[0],
                    activation_temp: self.growth.activation_temp[0],
                    exponent: self.growth.exponent[0],
                },
                ArrheniusParams {
                    rate_coeff: self.growth.rate_coeff[1],
                    activation_temp: self.growth.activation_temp[1],
                    exponent: self.growth.exponent[1],
                },
            )?),
            "polynomial" => {
                if self.growth.coefficients.is_empty() {
                    bail!("polynomial growth requires [growth] coefficients");
                }
                match &self.growth.coefficients_dim2 {
                    Some(dim2) => Ok(GrowthLaw::polynomial_per_dim(
                        self.growth.coefficients.clone(),
                        dim2.clone(),
                    )?),
                    None => Ok(GrowthLaw::polynomial_shared(
                        self.growth.coefficients.clone(),
                    )?),
                }
            }
            other => bail!("unknown growth model '{other}' (expected arrhenius or polynomial)"),
        }
    }

    pub fn t_max_min(&self) -> Result<f64> {
        match (self.simulation.t_max_min, self.simulation.t_max_h) {
            (Some(minutes), None) => Ok(minutes),
            (None, Some(hours)) => Ok(hours * 60.0),
            (Some(_), Some(_)) => bail!("give either t_max_min or t_max_h, not both"),
            (None, None) => bail!("the [simulation] section needs t_max_min or t_max_h"),
        }
    }

    pub fn simulation_config(&self) -> Result<SimulationConfig> {
        let mut cfg = SimulationConfig::new(self.grid()?, self.seed()?, self.material()?);
        cfg.t_max_min = self.t_max_min()?;
        cfg.temp_c = self.simulation.temp_c;
        cfg.c0 = self.simulation.c0;
        cfg.courant = self.simulation.courant;
        cfg.output_sampling = self.simulation.output_sampling;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn estimation_setup(&self) -> Result<(EstimationSetup, &EstimateSection)> {
        let section = self
            .estimate
            .as_ref()
            .context("the config has no [estimate] section")?;
        let mut setup = EstimationSetup::new(self.grid()?, self.seed()?, self.material()?);
        setup.courant = self.simulation.courant;
        setup.t_max_min = section.t_max_min;
        setup.n_samples = section.n_samples;
        setup.mom_substeps = section.mom_substeps;
        setup.shared_coefficients = section.shared_coefficients;
        Ok((setup, section))
    }

    pub fn truth_law(&self, section: &EstimateSection) -> Result<GrowthLaw<f64>> {
        match section.truth.as_str() {
            "arrhenius" => Ok(GrowthLaw::arrhenius_default()),
            "polynomial" => {
                if section.truth_coefficients.is_empty() {
                    bail!("polynomial truth requires truth_coefficients");
                }
                Ok(GrowthLaw::polynomial_shared(
                    section.truth_coefficients.clone(),
                )?)
            }
            other => bail!("unknown truth model '{other}'"),
        }
    }
}

pub fn load(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let config: RunConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    Ok(config)
}
