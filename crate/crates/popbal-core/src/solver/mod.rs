//! High-resolution finite-volume solver for the 2D growth PBE coupled to the
//! liquid-phase mass balance.
//!
//! Each time step: evaluate supersaturation and growth rates, take the CFL
//! step (truncated to land exactly on the horizon), advect the distribution
//! with Godunov splitting (L1 lines first, then L2 lines, every step), then
//! deplete the concentration by the crystal-volume increment.

mod kernel;
mod moments;
mod seed;
mod sweep;

pub use kernel::{ParallelKernel, SerialKernel, SweepKernel};
pub use moments::{cross_moment, moment_vector, pairwise_sum, MomentVector};
pub use seed::{seed_pssd, SEED_MASS_RECOVERY};
pub use sweep::{
    smoothness, sweep_1d, van_leer, NEGATIVE_ROUNDOFF_TOLERANCE, SMOOTHNESS_DENOMINATOR_GUARD,
};

use std::io::{self, Write};

use autodiff::Scalar;

use crate::config::{SamplingMode, SimulationConfig};
use crate::error::SolverError;
use crate::grid::Grid2d;
use crate::kinetics::{growth_rate, solubility, GrowthLaw};
use crate::liquid::LiquidState;
use crate::material::MaterialProperties;
use crate::pssd::Pssd;

/// State advanced by the solver loop.
#[derive(Debug, Clone)]
pub struct SolverState<S: Scalar = f64> {
    pub time: S,
    pub pssd: Pssd<S>,
    pub liquid: LiquidState<S>,
    pub step_count: usize,
}

/// Recorded trajectory of a simulation.
///
/// Under output-time sampling each requested time selects the first step at
/// or past it; a step covering several requested times is recorded once, so
/// the recorded times (the actual step times) stay strictly increasing. The
/// `m12` entries are the exact values the mass balance used.
#[derive(Debug, Clone)]
pub struct TimeSeries<S: Scalar = f64> {
    pub times: Vec<S>,
    pub concentrations: Vec<S>,
    pub moments: Vec<MomentVector<S>>,
    pub final_pssd: Option<Pssd<S>>,
    pub n_steps: usize,
    pub warnings: Vec<String>,
}

impl<S: Scalar> TimeSeries<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Total crystal volume trace, the (1,2) cross moment.
    pub fn crystal_volume(&self, index: usize) -> S {
        self.moments[index].m12
    }

    pub fn mean_l1(&self, index: usize) -> S {
        self.moments[index].mean_l1()
    }

    pub fn mean_l2(&self, index: usize) -> S {
        self.moments[index].mean_l2()
    }

    pub fn to_primal(&self) -> TimeSeries<f64> {
        TimeSeries {
            times: self.times.iter().map(|t| t.value()).collect(),
            concentrations: self.concentrations.iter().map(|c| c.value()).collect(),
            moments: self.moments.iter().map(|m| m.to_primal()).collect(),
            final_pssd: self.final_pssd.as_ref().map(|p| p.to_primal()),
            n_steps: self.n_steps,
            warnings: self.warnings.clone(),
        }
    }
}

impl TimeSeries<f64> {
    /// CSV dump with the shared trace schema.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t_min,c_g_per_kg,mu00,mu10,mu01,mu11,mu02,mu12")?;
        for k in 0..self.len() {
            let m = &self.moments[k];
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.times[k], self.concentrations[k], m.m00, m.m10, m.m01, m.m11, m.m02, m.m12
            )?;
        }
        Ok(())
    }
}

/// Stable explicit time step `ν·min(ΔL1/G1, ΔL2/G2)`.
///
/// A vanishing rate drops out of the minimum (its quotient is +∞); if both
/// rates vanish the result is +∞ and the caller jumps to the horizon.
pub fn cfl_dt<S: Scalar>(growth_l1: S, growth_l2: S, grid: &Grid2d, courant: f64) -> S {
    let q1 = S::constant(grid.dl1()) / growth_l1;
    let q2 = S::constant(grid.dl2()) / growth_l2;
    S::constant(courant) * q1.min(q2)
}

/// Discrete mass balance: `c_new = c_old − ρc·kv·(µ12_new − µ12_old)`.
pub fn update_concentration<S: Scalar>(
    c_old: S,
    pssd_old: &Pssd<S>,
    pssd_new: &Pssd<S>,
    material: &MaterialProperties,
) -> Result<S, SolverError> {
    update_concentration_from_moments(
        c_old,
        cross_moment(pssd_old, 1, 2),
        cross_moment(pssd_new, 1, 2),
        material,
    )
}

/// Moment-level form of the mass balance, used by the solver loop so the
/// traced quadratures are computed exactly once per step.
pub fn update_concentration_from_moments<S: Scalar>(
    c_old: S,
    m12_old: S,
    m12_new: S,
    material: &MaterialProperties,
) -> Result<S, SolverError> {
    let c_new = c_old - S::constant(material.volume_to_mass()) * (m12_new - m12_old);
    if c_new.value() < 0.0 {
        return Err(SolverError::InfeasibleConcentration {
            value: c_new.value(),
        });
    }
    Ok(c_new)
}

/// One dimensional-splitting step from precomputed growth rates and step
/// size: every L1 line swept, then every L2 line.
pub fn split_step<S: Scalar, K: SweepKernel<S>>(
    kernel: &K,
    state: &mut SolverState<S>,
    growth_l1: S,
    growth_l2: S,
    dt: S,
    material: &MaterialProperties,
) -> Result<(), SolverError> {
    let grid = state.pssd.grid().clone();
    let courant_l1 = growth_l1 * dt / S::constant(grid.dl1());
    let courant_l2 = growth_l2 * dt / S::constant(grid.dl2());
    let m12_old = cross_moment(&state.pssd, 1, 2);
    kernel.split_step(&mut state.pssd, courant_l1, courant_l2)?;
    let m12_new = cross_moment(&state.pssd, 1, 2);
    state.liquid.concentration = update_concentration_from_moments(
        state.liquid.concentration,
        m12_old,
        m12_new,
        material,
    )?;
    state.time = state.time + dt;
    state.step_count += 1;
    Ok(())
}

/// Runs the forward simulation with the given growth law and sweep kernel.
///
/// The law is passed separately from the configuration so that estimation
/// code can hand in one whose parameters are differentiation variables.
pub fn simulate<S: Scalar, K: SweepKernel<S>>(
    config: &SimulationConfig,
    law: &GrowthLaw<S>,
    kernel: &K,
) -> Result<TimeSeries<S>, SolverError> {
    config.validate()?;
    let grid = &config.grid;
    let material = &config.material;
    let t_max = config.t_max_min;

    let mut pssd: Pssd<S> = seed_pssd(&config.seed, grid, material)?.lift();
    let mut c = S::constant(config.c0);
    let mut t = S::constant(0.0);
    let mut n_steps = 0usize;
    let mut warnings = Vec::new();

    let saturation = solubility(config.temp_c, material);
    if config.c0 <= saturation {
        warnings.push(format!(
            "initial supersaturation {:.4} <= 1: growth-only kinetics leave the state unchanged",
            config.c0 / saturation
        ));
    }

    // Uniform output times including both endpoints; unused in EveryStep mode.
    let sample_times: Vec<f64> = match config.sampling {
        SamplingMode::OutputTimes => {
            let m = config.output_sampling;
            (0..m)
                .map(|k| t_max * k as f64 / (m - 1) as f64)
                .collect()
        }
        SamplingMode::EveryStep => Vec::new(),
    };

    let mut times: Vec<S> = Vec::new();
    let mut concentrations: Vec<S> = Vec::new();
    let mut moments: Vec<MomentVector<S>> = Vec::new();

    let mut current = moment_vector(&pssd);

    // Initial record at t = 0.
    times.push(S::constant(0.0));
    concentrations.push(c);
    moments.push(current);
    let mut next_sample = 1usize;

    while t.value() < t_max {
        let s_ratio = c / S::constant(saturation);
        let g1 = growth_rate(law, 1, s_ratio, config.temp_c)?;
        let g2 = growth_rate(law, 2, s_ratio, config.temp_c)?;

        if g1.value() == 0.0 && g2.value() == 0.0 {
            // No convection: the state is frozen for the rest of the horizon;
            // the pending-sample flush below performs the jump to t_max.
            break;
        }

        let dt_cfl = cfl_dt(g1, g2, grid, config.courant);
        let landed = !(t.value() + dt_cfl.value() < t_max);
        let dt = if landed {
            S::constant(t_max) - t
        } else {
            dt_cfl
        };

        let courant_l1 = g1 * dt / S::constant(grid.dl1());
        let courant_l2 = g2 * dt / S::constant(grid.dl2());
        kernel.split_step(&mut pssd, courant_l1, courant_l2)?;

        let updated = moment_vector(&pssd);
        c = update_concentration_from_moments(c, current.m12, updated.m12, material)?;
        current = updated;
        t = if landed { S::constant(t_max) } else { t + dt };
        n_steps += 1;

        match config.sampling {
            SamplingMode::EveryStep => {
                times.push(t);
                concentrations.push(c);
                moments.push(current);
            }
            SamplingMode::OutputTimes => {
                // Record this step once if it is the first to reach any
                // pending sample time; all sample times it covers collapse
                // onto it, keeping the recorded times strictly increasing.
                if next_sample < sample_times.len() && t.value() >= sample_times[next_sample] {
                    times.push(t);
                    concentrations.push(c);
                    moments.push(current);
                    while next_sample < sample_times.len()
                        && t.value() >= sample_times[next_sample]
                    {
                        next_sample += 1;
                    }
                }
            }
        }
    }

    // A stall jump leaves samples pending: the frozen state persists to the
    // horizon, recorded once at t_max.
    if next_sample < sample_times.len() {
        times.push(S::constant(t_max));
        concentrations.push(c);
        moments.push(current);
    }

    Ok(TimeSeries {
        times,
        concentrations,
        moments,
        final_pssd: Some(pssd),
        n_steps,
        warnings,
    })
}
