//! Method-of-moments reference solver: for size-independent growth the PBE
//! closes into seven ODEs (six cross moments plus the concentration), which
//! a fixed-step classical Runge-Kutta integrator solves to high accuracy.
//! Every finite-volume simulation is verified against this trace.

use std::io::{self, Write};

use crate::error::SolverError;
use crate::kinetics::{growth_rate, solubility, GrowthLaw};
use crate::material::MaterialProperties;
use crate::seed::SeedSpec;
use crate::solver::MomentVector;

/// The closed moment set plus the liquid concentration.
#[derive(Debug, Clone, Copy)]
pub struct MomentState {
    pub moments: MomentVector<f64>,
    pub c: f64,
}

impl MomentState {
    pub fn new(moments: MomentVector<f64>, c: f64) -> Self {
        Self { moments, c }
    }

    fn to_array(self) -> [f64; 7] {
        let m = self.moments;
        [m.m00, m.m10, m.m01, m.m11, m.m02, m.m12, self.c]
    }

    fn from_array(y: [f64; 7]) -> Self {
        Self {
            moments: MomentVector {
                m00: y[0],
                m10: y[1],
                m01: y[2],
                m11: y[3],
                m02: y[4],
                m12: y[5],
            },
            c: y[6],
        }
    }
}

fn growth_pair(law: &GrowthLaw<f64>, s_ratio: f64, temp_c: f64) -> (f64, f64) {
    let g1 = growth_rate(law, 1, s_ratio, temp_c).expect("dimension 1 is valid");
    let g2 = growth_rate(law, 2, s_ratio, temp_c).expect("dimension 2 is valid");
    (g1, g2)
}

/// Time derivative of the moment system:
/// `dµpq/dt = p·G1·µ(p-1)q + q·G2·µp(q-1)`, and the concentration equation
/// is the exact negative of the µ12 equation scaled by ρc·kv.
pub fn mom_rhs(
    state: &MomentState,
    temp_c: f64,
    law: &GrowthLaw<f64>,
    material: &MaterialProperties,
) -> MomentState {
    let s_ratio = state.c / solubility(temp_c, material);
    let (g1, g2) = growth_pair(law, s_ratio, temp_c);
    let m = state.moments;
    let dm12 = g1 * m.m02 + 2.0 * g2 * m.m11;
    MomentState {
        moments: MomentVector {
            m00: 0.0,
            m10: g1 * m.m00,
            m01: g2 * m.m00,
            m11: g1 * m.m01 + g2 * m.m10,
            m02: 2.0 * g2 * m.m01,
            m12: dm12,
        },
        c: -material.volume_to_mass() * dm12,
    }
}

/// Moment trajectory sampled at every integrator step.
#[derive(Debug, Clone)]
pub struct MomTrace {
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
}

impl MomTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &MomentState {
        self.states.last().expect("trace has the initial state")
    }

    /// Same CSV schema as the solver's time series.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t_min,c_g_per_kg,mu00,mu10,mu01,mu11,mu02,mu12")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let m = s.moments;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                t, s.c, m.m00, m.m10, m.m01, m.m11, m.m02, m.m12
            )?;
        }
        Ok(())
    }
}

/// Integrates the moment system with classical fixed-step RK4.
pub fn mom_solve(
    initial: MomentState,
    temp_c: f64,
    law: &GrowthLaw<f64>,
    material: &MaterialProperties,
    t_max: f64,
    n_steps: usize,
) -> Result<MomTrace, SolverError> {
    assert!(n_steps >= 1, "n_steps must be at least 1");
    let dt = t_max / n_steps as f64;
    let mut y = initial.to_array();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    states.push(initial);

    let f = |y: &[f64; 7]| mom_rhs(&MomentState::from_array(*y), temp_c, law, material).to_array();
    for step in 1..=n_steps {
        let k1 = f(&y);
        let k2 = f(&advance(&y, &k1, dt / 2.0));
        let k3 = f(&advance(&y, &k2, dt / 2.0));
        let k4 = f(&advance(&y, &k3, dt));
        for i in 0..7 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y[6] < 0.0 {
            return Err(SolverError::InfeasibleConcentration { value: y[6] });
        }
        times.push(t_max * step as f64 / n_steps as f64);
        states.push(MomentState::from_array(y));
    }
    Ok(MomTrace { times, states })
}

fn advance(y: &[f64; 7], k: &[f64; 7], h: f64) -> [f64; 7] {
    let mut out = *y;
    for i in 0..7 {
        out[i] += h * k[i];
    }
    out
}

/// Analytic moments of the seed distribution with independent marginals.
///
/// Both supported shapes are parametrized by arithmetic mean and standard
/// deviation, so `E[L] = mean` and `E[L²] = mean² + σ²` hold for either.
pub fn moments_of_seed(seed: &SeedSpec, material: &MaterialProperties) -> MomentVector<f64> {
    let e_l1 = seed.mean_l1;
    let e_l2 = seed.mean_l2;
    let e_l2_sq = seed.mean_l2 * seed.mean_l2 + seed.sigma_l2 * seed.sigma_l2;
    let m00 = seed.mass / (material.volume_to_mass() * e_l1 * e_l2_sq);
    MomentVector {
        m00,
        m10: m00 * e_l1,
        m01: m00 * e_l2,
        m11: m00 * e_l1 * e_l2,
        m02: m00 * e_l2_sq,
        m12: m00 * e_l1 * e_l2_sq,
    }
}
