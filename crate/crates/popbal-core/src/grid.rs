use crate::error::ModelError;

/// The discretized size/shape domain: a uniform 2D mesh over the two
/// characteristic crystal lengths, in micrometres.
///
/// Construction rounds the bin counts up, so the effective extents stored
/// here satisfy `n1 * dl1 == l1_max` exactly and never truncate the requested
/// domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2d {
    n1: usize,
    n2: usize,
    dl1: f64,
    dl2: f64,
    l1_max: f64,
    l2_max: f64,
}

impl Grid2d {
    /// Builds a grid covering at least `l1_max x l2_max` with bins `dl1 x dl2`.
    pub fn new(l1_max: f64, l2_max: f64, dl1: f64, dl2: f64) -> Result<Self, ModelError> {
        for (name, value) in [
            ("l1_max", l1_max),
            ("l2_max", l2_max),
            ("dl1", dl1),
            ("dl2", dl2),
        ] {
            if !(value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        let n1 = (l1_max / dl1).ceil() as usize;
        let n2 = (l2_max / dl2).ceil() as usize;
        Ok(Self {
            n1,
            n2,
            dl1,
            dl2,
            l1_max: n1 as f64 * dl1,
            l2_max: n2 as f64 * dl2,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn dl1(&self) -> f64 {
        self.dl1
    }

    pub fn dl2(&self) -> f64 {
        self.dl2
    }

    /// Effective extent along the first length (a multiple of `dl1`).
    pub fn l1_max(&self) -> f64 {
        self.l1_max
    }

    pub fn l2_max(&self) -> f64 {
        self.l2_max
    }

    pub fn cells(&self) -> usize {
        self.n1 * self.n2
    }

    /// Centre coordinate of bin `i` along the first length.
    pub fn center_l1(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dl1
    }

    pub fn center_l2(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dl2
    }

    /// Cell area, the quadrature weight for every moment integral.
    pub fn cell_area(&self) -> f64 {
        self.dl1 * self.dl2
    }
}
