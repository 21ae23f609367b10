//! Mechanical verification of solver output: every simulation used by the
//! benchmark and estimation pipelines is checked against the method-of-moments
//! oracle, and kernel variants are checked against each other.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::VerifyError;
use crate::mom::MomTrace;
use crate::pssd::Pssd;
use crate::solver::TimeSeries;

/// Denominator floor for relative deviations near zero.
const RELATIVE_FLOOR: f64 = 1e-12;

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub max_rel_deviation: f64,
    pub tolerance: f64,
    /// Index of the worst deviation; always present on failure.
    pub worst_index: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One JSON object per line, one line per check.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for check in &self.checks {
            let line = serde_json::to_string(check).expect("check serializes");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Compares the finite-volume concentration and crystal-volume traces against
/// the oracle by nearest-time pairing.
///
/// Each solver sample is paired with the nearest oracle sample; a pairing gap
/// larger than the local sample spacing means the traces are not comparable
/// and is an error, not a failure.
pub fn verify_against_mom(
    fvm: &TimeSeries<f64>,
    mom: &MomTrace,
    tol_rel: f64,
) -> Result<VerificationReport, VerifyError> {
    if fvm.is_empty() || mom.is_empty() {
        return Err(VerifyError::EmptyTrace);
    }
    let mut paired_c = Vec::with_capacity(fvm.len());
    let mut paired_m12 = Vec::with_capacity(fvm.len());
    for (k, &t) in fvm.times.iter().enumerate() {
        let j = nearest_index(&mom.times, t);
        let gap = (mom.times[j] - t).abs();
        let local_step = local_spacing(&fvm.times, k);
        if gap > local_step {
            return Err(VerifyError::IncomparableSampling {
                index: k,
                gap,
                local_step,
            });
        }
        paired_c.push(mom.states[j].c);
        paired_m12.push(mom.states[j].moments.m12);
    }

    let concentration = deviation_check(
        "concentration_vs_mom",
        fvm.concentrations.iter().copied(),
        paired_c.iter().copied(),
        tol_rel,
    );
    let volume = deviation_check(
        "crystal_volume_vs_mom",
        (0..fvm.len()).map(|k| fvm.moments[k].m12),
        paired_m12.iter().copied(),
        tol_rel,
    );
    Ok(VerificationReport {
        checks: vec![concentration, volume],
    })
}

/// Compares two distributions cell by cell: passes iff
/// `max |a_ij - b_ij| <= tol_abs · max(a)`. With `tol_abs = 0` this demands
/// bitwise-identical values, the contract between sweep kernels.
pub fn compare_pssd(
    a: &Pssd<f64>,
    b: &Pssd<f64>,
    tol_abs: f64,
) -> Result<VerificationReport, VerifyError> {
    if a.grid() != b.grid() {
        return Err(VerifyError::GridMismatch);
    }
    let scale = a.max_value();
    let mut worst = 0.0_f64;
    let mut worst_index = None;
    for (idx, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
        let d = (x - y).abs();
        if d > worst {
            worst = d;
            worst_index = Some(idx);
        }
    }
    let threshold = tol_abs * scale;
    let passed = worst <= threshold;
    Ok(VerificationReport {
        checks: vec![CheckOutcome {
            name: "pssd_comparison".into(),
            passed,
            max_rel_deviation: worst,
            tolerance: threshold,
            worst_index: if passed { None } else { worst_index },
        }],
    })
}

fn deviation_check(
    name: &str,
    got: impl Iterator<Item = f64>,
    reference: impl Iterator<Item = f64>,
    tol_rel: f64,
) -> CheckOutcome {
    let mut worst = 0.0_f64;
    let mut worst_index = None;
    for (k, (g, r)) in got.zip(reference).enumerate() {
        let dev = (g - r).abs() / r.abs().max(RELATIVE_FLOOR);
        if dev > worst {
            worst = dev;
            worst_index = Some(k);
        }
    }
    let passed = worst <= tol_rel;
    CheckOutcome {
        name: name.into(),
        passed,
        max_rel_deviation: worst,
        tolerance: tol_rel,
        worst_index: if passed { None } else { worst_index },
    }
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    let j = times.partition_point(|&x| x < t);
    if j == 0 {
        return 0;
    }
    if j == times.len() {
        return times.len() - 1;
    }
    if (times[j] - t).abs() < (t - times[j - 1]).abs() {
        j
    } else {
        j - 1
    }
}

fn local_spacing(times: &[f64], k: usize) -> f64 {
    let before = if k > 0 { times[k] - times[k - 1] } else { 0.0 };
    let after = if k + 1 < times.len() {
        times[k + 1] - times[k]
    } else {
        0.0
    };
    before.max(after).max(RELATIVE_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mom::MomentState;
    use crate::solver::MomentVector;

    fn toy_moments(m12: f64) -> MomentVector<f64> {
        MomentVector {
            m00: 1.0,
            m10: 1.0,
            m01: 1.0,
            m11: 1.0,
            m02: 1.0,
            m12,
        }
    }

    fn toy_series(times: &[f64], c: &[f64], m12: &[f64]) -> TimeSeries<f64> {
        TimeSeries {
            times: times.to_vec(),
            concentrations: c.to_vec(),
            moments: m12.iter().map(|&v| toy_moments(v)).collect(),
            final_pssd: None,
            n_steps: times.len(),
            warnings: vec![],
        }
    }

    fn toy_trace(times: &[f64], c: &[f64], m12: &[f64]) -> MomTrace {
        MomTrace {
            times: times.to_vec(),
            states: c
                .iter()
                .zip(m12)
                .map(|(&c, &v)| MomentState::new(toy_moments(v), c))
                .collect(),
        }
    }

    #[test]
    fn identical_traces_pass_with_zero_deviation() {
        let t = [0.0, 1.0, 2.0];
        let c = [8.0, 7.0, 6.5];
        let v = [1.0, 2.0, 3.0];
        let report =
            verify_against_mom(&toy_series(&t, &c, &v), &toy_trace(&t, &c, &v), 0.01).unwrap();
        assert!(report.passed());
        for check in &report.checks {
            assert_eq!(check.max_rel_deviation, 0.0);
            assert!(check.worst_index.is_none());
        }
    }

    #[test]
    fn perturbed_point_fails_and_reports_its_index() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let c = [8.0, 7.0, 6.5, 6.2];
        let v = [1.0, 2.0, 3.0, 4.0];
        let mut bad = c;
        bad[2] *= 1.05;
        let report =
            verify_against_mom(&toy_series(&t, &bad, &v), &toy_trace(&t, &c, &v), 0.01).unwrap();
        assert!(!report.passed());
        let failing = &report.checks[0];
        assert_eq!(failing.name, "concentration_vs_mom");
        assert_eq!(failing.worst_index, Some(2));
    }

    #[test]
    fn incomparable_sampling_is_an_error() {
        let fvm = toy_series(&[0.0, 1.0, 2.0], &[8.0; 3], &[1.0; 3]);
        let mom = toy_trace(&[0.0, 10.0], &[8.0, 8.0], &[1.0, 1.0]);
        assert!(matches!(
            verify_against_mom(&fvm, &mom, 0.01),
            Err(VerifyError::IncomparableSampling { .. })
        ));
    }

    #[test]
    fn jsonl_has_one_line_per_check() {
        let t = [0.0, 1.0];
        let report = verify_against_mom(
            &toy_series(&t, &[8.0, 7.0], &[1.0, 2.0]),
            &toy_trace(&t, &[8.0, 7.0], &[1.0, 2.0]),
            0.01,
        )
        .unwrap();
        let mut buf = Vec::new();
        report.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"passed\":true"));
    }

    #[test]
    fn pssd_comparison_detects_a_shift() {
        use crate::grid::Grid2d;
        let grid = Grid2d::new(8.0, 8.0, 1.0, 1.0).unwrap();
        let mut a = Pssd::zeros(grid.clone());
        a.set(3, 3, 1.0);
        let report = compare_pssd(&a, &a.clone(), 0.0).unwrap();
        assert!(report.passed());
        let mut b = Pssd::zeros(grid);
        b.set(3, 4, 1.0);
        let report = compare_pssd(&a, &b, 0.0).unwrap();
        assert!(!report.passed());
        assert!(report.checks[0].worst_index.is_some());
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        use crate::grid::Grid2d;
        let a = Pssd::zeros(Grid2d::new(8.0, 8.0, 1.0, 1.0).unwrap());
        let b = Pssd::zeros(Grid2d::new(8.0, 8.0, 2.0, 2.0).unwrap());
        assert!(matches!(
            compare_pssd(&a, &b, 0.0),
            Err(VerifyError::GridMismatch)
        ));
    }
}
