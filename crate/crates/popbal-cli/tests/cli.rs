//! End-to-end tests of the `popbal` binary: exit-code contract, emitted
//! files, and the CSV/JSONL surfaces.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

static DIR_SEQ: AtomicUsize = AtomicUsize::new(0);

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "popbal-cli-test-{}-{tag}-{}",
        std::process::id(),
        DIR_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn popbal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popbal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn popbal_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popbal"))
        .env("POPBAL_THREADS", threads)
        .args(args)
        .output()
        .expect("binary runs")
}

const BASE: &str = r#"
[grid]
l1_max = 800.0
l2_max = 450.0
dl1 = 25.0
dl2 = 25.0

[simulation]
t_max_min = 6.0
output_sampling = 20

[verify]
tolerance = 0.08
mom_steps = 8000
"#;

fn column(csv: &str, index: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|line| line.split(',').nth(index).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn simulate_writes_monotone_trace_and_final_pssd() {
    let dir = scratch_dir("simulate");
    let config = write_config(&dir, BASE);
    let out = popbal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let trace = fs::read_to_string(dir.join("timeseries.csv")).unwrap();
    assert!(trace.starts_with("t_min,c_g_per_kg,mu00,mu10,mu01,mu11,mu02,mu12"));
    let concentrations = column(&trace, 1);
    assert!(concentrations.windows(2).all(|w| w[1] <= w[0]));

    let pssd = fs::read_to_string(dir.join("final_pssd.csv")).unwrap();
    assert!(pssd.starts_with("i,j,L1_center,L2_center,f"));
    assert_eq!(pssd.lines().count(), 1 + 32 * 18);

    // Determinism: a second run reproduces the trace byte for byte.
    let dir2 = scratch_dir("simulate-again");
    let out = popbal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(trace, fs::read_to_string(dir2.join("timeseries.csv")).unwrap());
}

#[test]
fn parallel_kernel_output_is_independent_of_thread_count() {
    let dir = scratch_dir("threads");
    let config = write_config(&dir, BASE);
    let mut traces = Vec::new();
    for threads in ["1", "2"] {
        let out_dir = dir.join(format!("t{threads}"));
        let out = popbal_with_threads(
            &[
                "simulate",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
                "--kernel",
                "parallel",
            ],
            threads,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        traces.push(fs::read_to_string(out_dir.join("timeseries.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);

    // And the parallel kernel agrees byte-for-byte with the serial one.
    let serial_dir = dir.join("serial");
    let out = popbal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        serial_dir.to_str().unwrap(),
        "--kernel",
        "serial",
    ]);
    assert!(out.status.success());
    let serial = fs::read_to_string(serial_dir.join("timeseries.csv")).unwrap();
    assert_eq!(traces[0], serial);
}

#[test]
fn moments_command_writes_the_oracle_trace() {
    let dir = scratch_dir("moments");
    let config = write_config(&dir, BASE);
    let out = popbal(&[
        "moments",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = fs::read_to_string(dir.join("moments.csv")).unwrap();
    assert!(trace.starts_with("t_min,c_g_per_kg,mu00,mu10,mu01,mu11,mu02,mu12"));
    // Growth-only dynamics: the number moment stays constant along the trace.
    let m00 = column(&trace, 2);
    assert!(m00.iter().all(|&v| (v - m00[0]).abs() / m00[0] < 1e-12));
    let c = column(&trace, 1);
    assert!(c.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn saturated_start_gives_constant_concentration_and_a_warning() {
    let dir = scratch_dir("saturated");
    let config = write_config(
        &dir,
        &BASE.replace("t_max_min = 6.0", "t_max_min = 6.0\nc0 = 5.782943125562973"),
    );
    let out = popbal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("supersaturation"));
    let trace = fs::read_to_string(dir.join("timeseries.csv")).unwrap();
    let concentrations = column(&trace, 1);
    assert!(concentrations.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn malformed_config_exits_1_without_partial_outputs() {
    let dir = scratch_dir("malformed");
    let config = write_config(&dir, "[grid\nl1_max = ");
    let out = popbal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.join("timeseries.csv").exists());
    assert!(!dir.join("final_pssd.csv").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = scratch_dir("unknown-key");
    let config = write_config(&dir, &format!("{BASE}\n[simulation2]\nfoo = 1\n"));
    let out = popbal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let config = write_config(&dir, &BASE.replace("t_max_min = 6.0", "t_max_min = 6.0\ntypo = 3"));
    let out = popbal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_config_exits_1() {
    let out = popbal(&["verify", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_at_config_tolerance_and_fails_at_1e9() {
    let dir = scratch_dir("verify");
    let config = write_config(&dir, BASE);
    let out = popbal(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.join("verification.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(report.contains("\"passed\":true"));

    // A coarse grid cannot meet an absurdly tight tolerance: exit code 2.
    let tight = write_config(&dir, &BASE.replace("tolerance = 0.08", "tolerance = 1e-9"));
    let out = popbal(&[
        "verify",
        "--config",
        tight.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn benchmark_emits_one_row_per_sweep_point_and_kernel() {
    let dir = scratch_dir("benchmark");
    let config = write_config(
        &dir,
        &format!(
            "{BASE}\n[benchmark]\nbin_sizes = [40.0, 20.0]\ngrowth_ratio_factors = [1.0, 2.0]\nrepeats = 2\ntolerance = 0.2\n"
        ),
    );
    // A capped thread pool must not change anything but the timing columns.
    let out = popbal_with_threads(
        &[
            "benchmark",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ],
        "1",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("benchmark.csv")).unwrap();
    assert!(csv.starts_with("sweep_param,value,kernel,mean_ms,stddev_ms,n_steps"));
    assert_eq!(csv.lines().count(), 1 + (2 + 2) * 2);

    // CFL: a faster dimension-1 growth rate forces more steps.
    let steps: Vec<usize> = csv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("growth_ratio") && l.contains("serial"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(steps.len(), 2);
    assert!(steps[1] > steps[0], "steps {steps:?}");
}

#[test]
fn estimate_writes_per_run_files_and_timing_rows() {
    let dir = scratch_dir("estimate");
    let config = write_config(
        &dir,
        &format!(
            r#"{BASE}
[estimate]
k_values = [1, 2]
backends = ["ad", "nd-batched", "nd-naive"]
n_iterations = 2
t_max_min = 60.0
n_samples = 20
mom_substeps = 5
truth = "polynomial"
truth_coefficients = [0.5, 0.8]
tolerance = 0.5
"#
        ),
    );
    let out = popbal(&[
        "estimate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for k in [1, 2] {
        for backend in ["ad", "nd-batched", "nd-naive"] {
            let path = dir.join(format!("estimation_{backend}_k{k}.csv"));
            let csv = fs::read_to_string(&path).unwrap();
            let mut lines = csv.lines();
            let header = lines.next().unwrap();
            assert!(header.starts_with("iteration,loss,theta_1"));
            assert_eq!(lines.count(), 2);
            for value in column(&csv, 1) {
                assert!(value.is_finite());
            }
        }
    }
    let timing = fs::read_to_string(dir.join("iteration_timing.csv")).unwrap();
    assert!(timing.starts_with("k,backend,mean_iter_ms"));
    assert_eq!(timing.lines().count(), 1 + 6);

    // The ad and nd trajectories agree loss-for-loss within a few percent.
    let ad = fs::read_to_string(dir.join("estimation_ad_k2.csv")).unwrap();
    let nd = fs::read_to_string(dir.join("estimation_nd-batched_k2.csv")).unwrap();
    for (a, n) in column(&ad, 1).iter().zip(column(&nd, 1).iter()) {
        assert!((a - n).abs() / a.abs().max(1e-12) < 0.05, "ad {a} vs nd {n}");
    }
}
