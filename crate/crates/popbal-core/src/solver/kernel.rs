//! Interchangeable sweep kernels for the dimensional-splitting step.
//!
//! [`SerialKernel`] walks the lines one by one and works for any scalar,
//! including taped ones. [`ParallelKernel`] distributes independent lines
//! across threads for plain-`f64` runs; every line executes exactly the same
//! arithmetic as in the serial kernel, so both produce bit-identical results.

use autodiff::Scalar;
use rayon::prelude::*;

use crate::error::SolverError;
use crate::pssd::Pssd;

use super::sweep::{sweep_line, SweepScratch};

/// Applies the two 1D sweeps of one dimensional-splitting step.
pub trait SweepKernel<S: Scalar> {
    /// Sweeps every L1 line, then every L2 line, with the given Courant
    /// numbers. A zero Courant number skips its sweep (the flux vanishes).
    fn split_step(
        &self,
        pssd: &mut Pssd<S>,
        courant_l1: S,
        courant_l2: S,
    ) -> Result<(), SolverError>;
}

/// Straightforward per-line loop; the reference kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct SerialKernel;

impl<S: Scalar> SweepKernel<S> for SerialKernel {
    fn split_step(
        &self,
        pssd: &mut Pssd<S>,
        courant_l1: S,
        courant_l2: S,
    ) -> Result<(), SolverError> {
        let (n1, n2) = (pssd.grid().n1(), pssd.grid().n2());
        let mut scratch = SweepScratch::default();
        if courant_l1.value() != 0.0 {
            let mut line = Vec::with_capacity(n1);
            for j in 0..n2 {
                line.clear();
                line.extend((0..n1).map(|i| pssd.get(i, j)));
                sweep_line(&mut line, courant_l1, &mut scratch)?;
                for (i, &v) in line.iter().enumerate() {
                    pssd.set(i, j, v);
                }
            }
        }
        if courant_l2.value() != 0.0 {
            for row in pssd.values_mut().chunks_mut(n2) {
                sweep_line(row, courant_l2, &mut scratch)?;
            }
        }
        Ok(())
    }
}

/// Data-parallel row/column batches on the global thread pool.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParallelKernel;

impl SweepKernel<f64> for ParallelKernel {
    fn split_step(
        &self,
        pssd: &mut Pssd<f64>,
        courant_l1: f64,
        courant_l2: f64,
    ) -> Result<(), SolverError> {
        let (n1, n2) = (pssd.grid().n1(), pssd.grid().n2());
        if courant_l1 != 0.0 {
            let columns: Vec<Vec<f64>> = (0..n2)
                .into_par_iter()
                .map(|j| {
                    let mut line: Vec<f64> = (0..n1).map(|i| pssd.get(i, j)).collect();
                    sweep_line(&mut line, courant_l1, &mut SweepScratch::default())?;
                    Ok(line)
                })
                .collect::<Result<_, SolverError>>()?;
            for (j, column) in columns.into_iter().enumerate() {
                for (i, v) in column.into_iter().enumerate() {
                    pssd.set(i, j, v);
                }
            }
        }
        if courant_l2 != 0.0 {
            pssd.values_mut()
                .par_chunks_mut(n2)
                .try_for_each(|row| sweep_line(row, courant_l2, &mut SweepScratch::default()))?;
        }
        Ok(())
    }
}
