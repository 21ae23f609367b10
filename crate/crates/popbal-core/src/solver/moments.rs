//! Midpoint-rule moment quadrature with a fixed pairwise-summation tree.
//!
//! Every moment reduction in the solver goes through [`pairwise_sum`], whose
//! association order depends only on the term count. The serial and parallel
//! sweep kernels therefore feed bit-identical moment values into the mass
//! balance, which is what makes the kernel-equivalence contract exact.

use autodiff::Scalar;

use crate::pssd::Pssd;

/// Deterministic pairwise sum: fixed split at the midpoint, short runs
/// folded left-to-right.
pub fn pairwise_sum<S: Scalar>(terms: &[S]) -> S {
    match terms.len() {
        0 => S::constant(0.0),
        1..=8 => {
            let mut acc = terms[0];
            for &t in &terms[1..] {
                acc = acc + t;
            }
            acc
        }
        len => {
            let mid = len / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

/// The (p, q) cross moment of the distribution by midpoint quadrature at the
/// cell centres: `Σ_ij L1c_i^p · L2c_j^q · f_ij · ΔL1·ΔL2`.
pub fn cross_moment<S: Scalar>(pssd: &Pssd<S>, p: u32, q: u32) -> S {
    let grid = pssd.grid();
    let area = grid.cell_area();
    let weights_l2: Vec<f64> = (0..grid.n2())
        .map(|j| grid.center_l2(j).powi(q as i32))
        .collect();
    let mut terms = Vec::with_capacity(grid.cells());
    for i in 0..grid.n1() {
        let w1 = grid.center_l1(i).powi(p as i32) * area;
        for (j, w2) in weights_l2.iter().enumerate() {
            terms.push(pssd.get(i, j) * S::constant(w1 * w2));
        }
    }
    pairwise_sum(&terms)
}

/// The closed set of cross moments tracked by the solver and the oracle.
#[derive(Debug, Clone, Copy)]
pub struct MomentVector<S: Scalar = f64> {
    pub m00: S,
    pub m10: S,
    pub m01: S,
    pub m11: S,
    pub m02: S,
    pub m12: S,
}

impl<S: Scalar> MomentVector<S> {
    /// Number-weighted mean of the first length.
    pub fn mean_l1(&self) -> S {
        self.m10 / self.m00
    }

    pub fn mean_l2(&self) -> S {
        self.m01 / self.m00
    }

    pub fn to_primal(&self) -> MomentVector<f64> {
        MomentVector {
            m00: self.m00.value(),
            m10: self.m10.value(),
            m01: self.m01.value(),
            m11: self.m11.value(),
            m02: self.m02.value(),
            m12: self.m12.value(),
        }
    }
}

/// All six tracked moments in one pass, factorized through per-row partial
/// sums: each row contributes `Σ_j f`, `Σ_j L2c·f` and `Σ_j L2c²·f`, and the
/// six moments are L1-weighted pairwise sums of those. Same midpoint
/// quadrature as [`cross_moment`], at less than half the operation count.
pub fn moment_vector<S: Scalar>(pssd: &Pssd<S>) -> MomentVector<S> {
    let grid = pssd.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let area = grid.cell_area();
    let w_l2: Vec<f64> = (0..n2).map(|j| grid.center_l2(j)).collect();
    let w_l2_sq: Vec<f64> = w_l2.iter().map(|w| w * w).collect();

    let mut row_plain = Vec::with_capacity(n1);
    let mut row_l2 = Vec::with_capacity(n1);
    let mut row_l2_sq = Vec::with_capacity(n1);
    let mut buf: Vec<S> = Vec::with_capacity(n2);
    for i in 0..n1 {
        let row = &pssd.values()[i * n2..(i + 1) * n2];
        row_plain.push(pairwise_sum(row));
        buf.clear();
        buf.extend(row.iter().zip(&w_l2).map(|(&f, &w)| f * S::constant(w)));
        row_l2.push(pairwise_sum(&buf));
        buf.clear();
        buf.extend(row.iter().zip(&w_l2_sq).map(|(&f, &w)| f * S::constant(w)));
        row_l2_sq.push(pairwise_sum(&buf));
    }

    let mut weighted = |rows: &[S], with_l1: bool| -> S {
        if with_l1 {
            buf.clear();
            buf.extend(
                rows.iter()
                    .enumerate()
                    .map(|(i, &r)| r * S::constant(grid.center_l1(i))),
            );
            pairwise_sum(&buf) * S::constant(area)
        } else {
            pairwise_sum(rows) * S::constant(area)
        }
    };
    MomentVector {
        m00: weighted(&row_plain, false),
        m10: weighted(&row_plain, true),
        m01: weighted(&row_l2, false),
        m11: weighted(&row_l2, true),
        m02: weighted(&row_l2_sq, false),
        m12: weighted(&row_l2_sq, true),
    }
}
