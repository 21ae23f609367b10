use std::io::{self, Write};

use autodiff::Scalar;

use crate::error::ModelError;
use crate::grid::Grid2d;

/// Particle size-and-shape distribution: number density over the grid cells,
/// in crystals per µm² per kg of solvent. Row-major storage, first index is
/// the L1 bin.
#[derive(Debug, Clone)]
pub struct Pssd<S: Scalar = f64> {
    grid: Grid2d,
    values: Vec<S>,
}

impl<S: Scalar> Pssd<S> {
    /// Wraps an existing density array, checking shape and non-negativity.
    pub fn new(grid: Grid2d, values: Vec<S>) -> Result<Self, ModelError> {
        if values.len() != grid.cells() {
            return Err(ModelError::ShapeMismatch {
                expected: grid.cells(),
                got: values.len(),
            });
        }
        if let Some((index, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.value() >= 0.0))
        {
            return Err(ModelError::NegativeDensity {
                index,
                value: v.value(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2d) -> Self {
        let values = vec![S::constant(0.0); grid.cells()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2d {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.values[i * self.grid.n2() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.values[i * self.grid.n2() + j] = value;
    }

    /// Largest primal density.
    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.value())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Plain-number copy of the distribution.
    pub fn to_primal(&self) -> Pssd<f64> {
        Pssd {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.value()).collect(),
        }
    }
}

impl Pssd<f64> {
    /// Lifts the plain distribution into any scalar type as constants.
    pub fn lift<S: Scalar>(&self) -> Pssd<S> {
        Pssd {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| S::constant(v)).collect(),
        }
    }

    /// Flat CSV dump: `i,j,L1_center,L2_center,f`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "i,j,L1_center,L2_center,f")?;
        for i in 0..self.grid.n1() {
            for j in 0..self.grid.n2() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    i,
                    j,
                    self.grid.center_l1(i),
                    self.grid.center_l2(j),
                    self.get(i, j)
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2d {
        Grid2d::new(10.0, 5.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let err = Pssd::new(grid(), vec![0.0; 49]).unwrap_err();
        assert_eq!(
            err,
            ModelError::ShapeMismatch {
                expected: 50,
                got: 49
            }
        );
    }

    #[test]
    fn negative_entries_are_rejected() {
        let mut v = vec![0.0; 50];
        v[7] = -1e-3;
        assert!(matches!(
            Pssd::new(grid(), v),
            Err(ModelError::NegativeDensity { index: 7, .. })
        ));
    }

    #[test]
    fn indexing_is_row_major() {
        let mut p = Pssd::zeros(grid());
        p.set(2, 3, 5.0);
        assert_eq!(p.get(2, 3), 5.0);
        assert_eq!(p.values()[2 * 5 + 3], 5.0);
    }
}
