//! Inverse problem: growth-parameter estimation from in-silico experiments.
//!
//! Experimental truth comes from the moment oracle under a reference law;
//! the fitted model is the finite-volume solver with a polynomial growth law
//! whose coefficients are the parameter vector. The squared residuals over
//! concentration and the two mean lengths, each RMS-normalized per
//! experiment, form the loss. Gradients come from reverse-mode AD or from
//! forward-difference numerical differentiation (batched or strictly serial),
//! and Adam with a non-negativity projection does the optimization.

use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use autodiff::{Scalar, Tape};
use rayon::prelude::*;

use crate::config::{SamplingMode, SimulationConfig};
use crate::error::{EstimateError, SolverError};
use crate::grid::Grid2d;
use crate::kinetics::{solubility, GrowthLaw};
use crate::material::MaterialProperties;
use crate::mom::{mom_solve, moments_of_seed, MomentState};
use crate::seed::SeedSpec;
use crate::solver::{simulate, SerialKernel};

/// Loss value substituted when the forward model becomes infeasible; large
/// enough to repel the optimizer, finite enough to keep it alive.
pub const INFEASIBLE_LOSS_PENALTY: f64 = 1e12;

/// One in-silico experiment: operating point, sample times and the three
/// observed channels with their RMS scales.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub temp_c: f64,
    pub c0: f64,
    pub times: Vec<f64>,
    pub concentration: Vec<f64>,
    pub mean_l1: Vec<f64>,
    pub mean_l2: Vec<f64>,
    pub scale_c: f64,
    pub scale_l1: f64,
    pub scale_l2: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentSet {
    pub experiments: Vec<Experiment>,
}

/// Shared configuration for data generation and the forward model.
#[derive(Debug, Clone)]
pub struct EstimationSetup {
    pub grid: Grid2d,
    pub seed: SeedSpec,
    pub material: MaterialProperties,
    pub courant: f64,
    /// Experiment duration in minutes.
    pub t_max_min: f64,
    /// Number of uniform sample times per experiment.
    pub n_samples: usize,
    pub temperatures: Vec<f64>,
    pub supersaturations: Vec<f64>,
    /// Oracle RK4 steps per sample interval.
    pub mom_substeps: usize,
    /// One coefficient vector for both growth dimensions (the default), or
    /// the parameter vector split in half between them.
    pub shared_coefficients: bool,
}

impl EstimationSetup {
    pub fn new(grid: Grid2d, seed: SeedSpec, material: MaterialProperties) -> Self {
        Self {
            grid,
            seed,
            material,
            courant: 0.9,
            t_max_min: 120.0,
            n_samples: 600,
            temperatures: vec![10.0, 15.0, 20.0],
            supersaturations: vec![1.15, 1.25, 1.5],
            mom_substeps: 10,
            shared_coefficients: true,
        }
    }
}

/// Simulates the experimental campaign with the oracle under `law`: every
/// combination of temperature and initial supersaturation, sampled at
/// `n_samples` uniform times.
pub fn generate_experiments(
    law: &GrowthLaw<f64>,
    setup: &EstimationSetup,
) -> Result<ExperimentSet, EstimateError> {
    let mut experiments = Vec::new();
    let seed_moments = moments_of_seed(&setup.seed, &setup.material);
    for &temp_c in &setup.temperatures {
        for &s0 in &setup.supersaturations {
            let c0 = s0 * solubility(temp_c, &setup.material);
            let n_rk = setup.n_samples * setup.mom_substeps;
            let trace = mom_solve(
                MomentState::new(seed_moments, c0),
                temp_c,
                law,
                &setup.material,
                setup.t_max_min,
                n_rk,
            )?;
            let mut times = Vec::with_capacity(setup.n_samples);
            let mut concentration = Vec::with_capacity(setup.n_samples);
            let mut mean_l1 = Vec::with_capacity(setup.n_samples);
            let mut mean_l2 = Vec::with_capacity(setup.n_samples);
            for k in 1..=setup.n_samples {
                let state = &trace.states[k * setup.mom_substeps];
                times.push(trace.times[k * setup.mom_substeps]);
                concentration.push(state.c);
                mean_l1.push(state.moments.m10 / state.moments.m00);
                mean_l2.push(state.moments.m01 / state.moments.m00);
            }
            experiments.push(Experiment {
                temp_c,
                c0,
                scale_c: rms(&concentration),
                scale_l1: rms(&mean_l1),
                scale_l2: rms(&mean_l2),
                times,
                concentration,
                mean_l1,
                mean_l2,
            });
        }
    }
    Ok(ExperimentSet { experiments })
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Builds the candidate polynomial law from the parameter vector.
fn candidate_law<S: Scalar>(
    theta: &[S],
    setup: &EstimationSetup,
) -> Result<GrowthLaw<S>, EstimateError> {
    if let Some((index, bad)) = theta
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.value() >= 0.0))
    {
        return Err(EstimateError::NegativeTheta {
            index,
            value: bad.value(),
        });
    }
    if setup.shared_coefficients {
        Ok(GrowthLaw::polynomial_shared(theta.to_vec())?)
    } else {
        if !theta.len().is_multiple_of(2) {
            return Err(EstimateError::OddSplit(theta.len()));
        }
        let half = theta.len() / 2;
        Ok(GrowthLaw::polynomial_per_dim(
            theta[..half].to_vec(),
            theta[half..].to_vec(),
        )?)
    }
}

/// Piecewise-linear evaluation of a recorded series at `t`. The knot times
/// carry derivative information (step sizes depend on the parameters), so
/// weights are computed in traced arithmetic and the result is continuous in
/// the parameters.
fn interp_at<S: Scalar>(times: &[S], values: &[S], t: f64) -> S {
    let n = times.len();
    if t <= times[0].value() {
        return values[0];
    }
    if t >= times[n - 1].value() {
        return values[n - 1];
    }
    let j = times.partition_point(|x| x.value() < t);
    let t0 = times[j - 1];
    let t1 = times[j];
    let w = (S::constant(t) - t0) / (t1 - t0);
    values[j - 1] + w * (values[j] - values[j - 1])
}

/// Residual sum of squares of one experiment against the forward model.
fn loss_one<S: Scalar>(
    theta: &[S],
    experiment: &Experiment,
    setup: &EstimationSetup,
) -> Result<S, EstimateError> {
    let law = candidate_law(theta, setup)?;
    let mut config = SimulationConfig::new(
        setup.grid.clone(),
        setup.seed.clone(),
        setup.material.clone(),
    );
    config.t_max_min = setup.t_max_min;
    config.temp_c = experiment.temp_c;
    config.c0 = experiment.c0;
    config.courant = setup.courant;
    config.sampling = SamplingMode::EveryStep;

    let ts = match simulate(&config, &law, &SerialKernel) {
        Ok(ts) => ts,
        Err(SolverError::InfeasibleConcentration { .. }) => {
            return Ok(S::constant(INFEASIBLE_LOSS_PENALTY))
        }
        Err(e) => return Err(e.into()),
    };
    let mean_l1: Vec<S> = ts.moments.iter().map(|m| m.mean_l1()).collect();
    let mean_l2: Vec<S> = ts.moments.iter().map(|m| m.mean_l2()).collect();

    let inv_c = 1.0 / experiment.scale_c;
    let inv_l1 = 1.0 / experiment.scale_l1;
    let inv_l2 = 1.0 / experiment.scale_l2;
    let mut total = S::constant(0.0);
    for (k, &t) in experiment.times.iter().enumerate() {
        let r_c = (interp_at(&ts.times, &ts.concentrations, t)
            - S::constant(experiment.concentration[k]))
            * S::constant(inv_c);
        let r_l1 = (interp_at(&ts.times, &mean_l1, t) - S::constant(experiment.mean_l1[k]))
            * S::constant(inv_l1);
        let r_l2 = (interp_at(&ts.times, &mean_l2, t) - S::constant(experiment.mean_l2[k]))
            * S::constant(inv_l2);
        total = total + r_c * r_c + r_l1 * r_l1 + r_l2 * r_l2;
    }
    Ok(total)
}

/// The full estimation loss: the sum over all experiments.
pub fn loss<S: Scalar>(
    theta: &[S],
    experiments: &ExperimentSet,
    setup: &EstimationSetup,
) -> Result<S, EstimateError> {
    let mut total = S::constant(0.0);
    for experiment in &experiments.experiments {
        total = total + loss_one(theta, experiment, setup)?;
    }
    Ok(total)
}

/// Loss and gradient by one reverse pass per experiment (the loss is a sum,
/// so per-experiment tapes add up to the full gradient while keeping each
/// tape's memory bounded).
pub fn grad_ad(
    theta: &[f64],
    experiments: &ExperimentSet,
    setup: &EstimationSetup,
) -> Result<(f64, Vec<f64>), EstimateError> {
    let mut total = 0.0;
    let mut grad = vec![0.0; theta.len()];
    // One tape reused across experiments keeps the arena allocation warm.
    let tape = Tape::new();
    for experiment in &experiments.experiments {
        tape.reset();
        let vars: Vec<_> = theta.iter().map(|&v| tape.input(v)).collect();
        let out = loss_one(&vars, experiment, setup)?;
        total += out.value();
        let adjoints = tape.backward(out);
        for (g, v) in grad.iter_mut().zip(&vars) {
            *g += adjoints.get(*v);
        }
    }
    Ok((total, grad))
}

/// Scheduling of the forward-difference loss evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdVariant {
    /// The k perturbed losses evaluate concurrently.
    Batched,
    /// Strictly serial, one coordinate after another.
    Naive,
}

/// Forward-difference gradient of an arbitrary objective; the two variants
/// run the same arithmetic under different scheduling and return identical
/// values.
pub(crate) fn forward_difference_gradient<F>(
    objective: F,
    theta: &[f64],
    variant: NdVariant,
) -> Result<(f64, Vec<f64>), EstimateError>
where
    F: Fn(&[f64]) -> Result<f64, EstimateError> + Sync,
{
    let base = objective(theta)?;
    let one_coordinate = |i: usize| -> Result<f64, EstimateError> {
        let h = f64::EPSILON.sqrt() * theta[i].abs().max(1.0);
        let mut perturbed = theta.to_vec();
        perturbed[i] += h;
        Ok((objective(&perturbed)? - base) / h)
    };
    let grad = match variant {
        NdVariant::Naive => {
            let mut grad = Vec::with_capacity(theta.len());
            for i in 0..theta.len() {
                grad.push(one_coordinate(i)?);
            }
            grad
        }
        NdVariant::Batched => (0..theta.len())
            .into_par_iter()
            .map(one_coordinate)
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok((base, grad))
}

/// Loss and gradient by forward-difference numerical differentiation:
/// k + 1 loss evaluations with step `sqrt(machine epsilon)·max(1, |θ_i|)`.
pub fn grad_nd(
    theta: &[f64],
    experiments: &ExperimentSet,
    setup: &EstimationSetup,
    variant: NdVariant,
) -> Result<(f64, Vec<f64>), EstimateError> {
    forward_difference_gradient(
        |th: &[f64]| loss::<f64>(th, experiments, setup),
        theta,
        variant,
    )
}

/// Adam state with the non-negativity projection applied after every step.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub theta: Vec<f64>,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub iteration: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl OptimizerState {
    pub fn new(theta: Vec<f64>) -> Self {
        let k = theta.len();
        Self {
            theta,
            first_moment: vec![0.0; k],
            second_moment: vec![0.0; k],
            iteration: 0,
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// One bias-corrected Adam update followed by projection onto θ >= 0.
    pub fn adam_step(&mut self, gradient: &[f64]) -> Result<(), EstimateError> {
        if let Some((index, &value)) = gradient.iter().enumerate().find(|(_, g)| !g.is_finite()) {
            return Err(EstimateError::NonFiniteGradient { index, value });
        }
        self.iteration += 1;
        let t = self.iteration as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        for (i, &g) in gradient.iter().enumerate() {
            self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
            self.second_moment[i] =
                self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.first_moment[i] / bias1;
            let v_hat = self.second_moment[i] / bias2;
            self.theta[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            if self.theta[i] < 0.0 {
                self.theta[i] = 0.0;
            }
        }
        Ok(())
    }
}

/// Gradient back-end selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientBackend {
    Ad,
    NdBatched,
    NdNaive,
}

impl GradientBackend {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ad => "ad",
            Self::NdBatched => "nd-batched",
            Self::NdNaive => "nd-naive",
        }
    }
}

impl FromStr for GradientBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ad" => Ok(Self::Ad),
            "nd-batched" => Ok(Self::NdBatched),
            "nd-naive" => Ok(Self::NdNaive),
            other => Err(format!(
                "unknown backend '{other}' (expected ad, nd-batched or nd-naive)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub loss: f64,
    pub theta: Vec<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub k: usize,
    pub backend: GradientBackend,
    pub iterations: Vec<IterationRecord>,
    pub mean_iter_ms: f64,
}

impl EstimateReport {
    pub fn initial_loss(&self) -> f64 {
        self.iterations.first().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    pub fn final_loss(&self) -> f64 {
        self.iterations.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    /// Per-iteration CSV: `iteration,loss,theta_1..theta_k,wall_ms`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let theta_cols: Vec<String> = (1..=self.k).map(|i| format!("theta_{i}")).collect();
        writeln!(out, "iteration,loss,{},wall_ms", theta_cols.join(","))?;
        for record in &self.iterations {
            let theta: Vec<String> = record.theta.iter().map(|v| v.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{}",
                record.iteration,
                record.loss,
                theta.join(","),
                record.wall_ms
            )?;
        }
        Ok(())
    }
}

/// Aggregated timing CSV across runs: `k,backend,mean_iter_ms`.
pub fn write_timing_csv<W: Write>(reports: &[EstimateReport], out: &mut W) -> io::Result<()> {
    writeln!(out, "k,backend,mean_iter_ms")?;
    for report in reports {
        writeln!(
            out,
            "{},{},{}",
            report.k,
            report.backend.name(),
            report.mean_iter_ms
        )?;
    }
    Ok(())
}

/// Runs Adam for `n_iterations` from θ = (0.1, …, 0.1), recording the loss,
/// the parameters and the wall time of every iteration. There is no
/// convergence condition; the iteration count is the only stop.
pub fn estimate(
    experiments: &ExperimentSet,
    k: usize,
    backend: GradientBackend,
    setup: &EstimationSetup,
    n_iterations: usize,
) -> Result<EstimateReport, EstimateError> {
    assert!(k >= 1, "at least one parameter is required");
    let mut state = OptimizerState::new(vec![0.1; k]);
    let mut iterations = Vec::with_capacity(n_iterations);
    for iteration in 0..n_iterations {
        let started = Instant::now();
        let theta_now = state.theta.clone();
        let (loss_value, gradient) = match backend {
            GradientBackend::Ad => grad_ad(&theta_now, experiments, setup)?,
            GradientBackend::NdBatched => {
                grad_nd(&theta_now, experiments, setup, NdVariant::Batched)?
            }
            GradientBackend::NdNaive => grad_nd(&theta_now, experiments, setup, NdVariant::Naive)?,
        };
        state.adam_step(&gradient)?;
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;
        iterations.push(IterationRecord {
            iteration,
            loss: loss_value,
            theta: theta_now,
            wall_ms,
        });
    }
    let mean_iter_ms = iterations.iter().map(|r| r.wall_ms).sum::<f64>() / n_iterations as f64;
    Ok(EstimateReport {
        k,
        backend,
        iterations,
        mean_iter_ms,
    })
}
