//! Command-line front end for the population-balance solver: forward
//! simulations, the moment oracle, verification, benchmarks and parameter
//! estimation, all driven by one TOML config and emitting CSV/JSONL files.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 verification or quality
//! failure.

mod config_file;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use popbal_core::estimate::{
    estimate, generate_experiments, write_timing_csv, EstimateReport, GradientBackend,
};
use popbal_core::{
    mom_solve, moment_vector, moments_of_seed, seed_pssd, simulate, verify_against_mom,
    GrowthLaw, MomTrace, MomentState, ParallelKernel, SerialKernel, SimulationConfig, TimeSeries,
};

use config_file::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "popbal",
    about = "2D population-balance solver for batch crystallization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelChoice {
    Serial,
    Parallel,
}

#[derive(Debug, Parser)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Sweep kernel for single simulations.
    #[arg(long, value_enum, default_value = "serial")]
    kernel: KernelChoice,
}

#[derive(Debug, Parser)]
enum Command {
    /// Run a forward simulation and write the trace and final distribution.
    Simulate(CommonArgs),
    /// Integrate the method-of-moments oracle and write its trace.
    Moments(CommonArgs),
    /// Run the solver and the oracle, compare them, and write the report.
    Verify(CommonArgs),
    /// Time the solver across bin-size and step-count sweeps.
    Benchmark {
        #[command(flatten)]
        common: CommonArgs,
        /// Repeats per sweep point (overrides the config).
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Run gradient-based parameter estimation for each configured
    /// (k, backend) pair.
    Estimate(CommonArgs),
}

/// Verification or quality failure: distinct exit code from config errors.
#[derive(Debug)]
struct QualityFailure(String);

impl std::fmt::Display for QualityFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for QualityFailure {}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Moments(args) => cmd_moments(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Benchmark { common, repeats } => cmd_benchmark(common, *repeats),
        Command::Estimate(args) => cmd_estimate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<QualityFailure>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// POPBAL_THREADS caps the parallel kernel's thread pool.
fn configure_threads() {
    if let Ok(value) = std::env::var("POPBAL_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        } else {
            eprintln!("warning: ignoring unparsable POPBAL_THREADS='{value}'");
        }
    }
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    let file =
        File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn run_simulation(
    config: &SimulationConfig,
    law: &GrowthLaw<f64>,
    kernel: KernelChoice,
) -> Result<TimeSeries<f64>> {
    let ts = match kernel {
        KernelChoice::Serial => simulate(config, law, &SerialKernel)?,
        KernelChoice::Parallel => simulate(config, law, &ParallelKernel)?,
    };
    for warning in &ts.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(ts)
}

/// Oracle trace initialized from the discrete seed moments, so deviations
/// measure solver error rather than seed quadrature error.
fn oracle_trace(run: &RunConfig, config: &SimulationConfig, law: &GrowthLaw<f64>) -> Result<MomTrace> {
    let seed = seed_pssd(&config.seed, &config.grid, &config.material)?;
    Ok(mom_solve(
        MomentState::new(moment_vector(&seed), config.c0),
        config.temp_c,
        law,
        &config.material,
        config.t_max_min,
        run.verify.mom_steps,
    )?)
}

fn cmd_simulate(args: &CommonArgs) -> Result<()> {
    let run = config_file::load(&args.config)?;
    let config = run.simulation_config()?;
    let law = run.growth_law()?;
    let ts = run_simulation(&config, &law, args.kernel)?;
    let mut trace = out_file(&args.out, "timeseries.csv")?;
    ts.write_csv(&mut trace)?;
    trace.flush()?;
    let mut pssd_file = out_file(&args.out, "final_pssd.csv")?;
    ts.final_pssd
        .as_ref()
        .expect("simulate records the final distribution")
        .write_csv(&mut pssd_file)?;
    pssd_file.flush()?;
    println!(
        "simulate: {} steps, {} samples -> {}",
        ts.n_steps,
        ts.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_moments(args: &CommonArgs) -> Result<()> {
    let run = config_file::load(&args.config)?;
    let config = run.simulation_config()?;
    let law = run.growth_law()?;
    let initial = MomentState::new(
        moments_of_seed(&config.seed, &config.material),
        config.c0,
    );
    let trace = mom_solve(
        initial,
        config.temp_c,
        &law,
        &config.material,
        config.t_max_min,
        run.verify.mom_steps,
    )?;
    let mut file = out_file(&args.out, "moments.csv")?;
    trace.write_csv(&mut file)?;
    file.flush()?;
    println!(
        "moments: {} RK4 steps -> {}",
        trace.len() - 1,
        args.out.display()
    );
    Ok(())
}

fn cmd_verify(args: &CommonArgs) -> Result<()> {
    let run = config_file::load(&args.config)?;
    let config = run.simulation_config()?;
    let law = run.growth_law()?;
    let ts = run_simulation(&config, &law, args.kernel)?;
    let oracle = oracle_trace(&run, &config, &law)?;
    let report = verify_against_mom(&ts, &oracle, run.verify.tolerance)?;
    let mut file = out_file(&args.out, "verification.jsonl")?;
    report.write_jsonl(&mut file)?;
    file.flush()?;
    for check in &report.checks {
        println!(
            "{}: max rel dev {:.3e} (tol {:.1e}) -> {}",
            check.name,
            check.max_rel_deviation,
            check.tolerance,
            if check.passed { "pass" } else { "FAIL" }
        );
    }
    if !report.passed() {
        return Err(QualityFailure("verification failed".into()).into());
    }
    Ok(())
}

fn cmd_benchmark(args: &CommonArgs, repeats_override: Option<usize>) -> Result<()> {
    let run = config_file::load(&args.config)?;
    let section = run
        .benchmark
        .as_ref()
        .context("the config has no [benchmark] section")?;
    let repeats = repeats_override.unwrap_or(section.repeats).max(1);
    let base = run.simulation_config()?;
    let law = run.growth_law()?;

    let mut file = out_file(&args.out, "benchmark.csv")?;
    writeln!(file, "sweep_param,value,kernel,mean_ms,stddev_ms,n_steps")?;

    let measure = |sweep: &str, value: f64, config: &SimulationConfig, law: &GrowthLaw<f64>, file: &mut BufWriter<File>| -> Result<()> {
        // Every benchmarked configuration is verified before it is timed.
        let reference = run_simulation(config, law, KernelChoice::Serial)?;
        let oracle = oracle_trace(&run, config, law)?;
        let report = verify_against_mom(&reference, &oracle, section.tolerance)?;
        if !report.passed() {
            return Err(QualityFailure(format!(
                "verification failed for {sweep} = {value}"
            ))
            .into());
        }
        for kernel in [KernelChoice::Serial, KernelChoice::Parallel] {
            let mut samples = Vec::with_capacity(repeats);
            let mut n_steps = 0;
            for _ in 0..repeats {
                let started = Instant::now();
                let ts = run_simulation(config, law, kernel)?;
                samples.push(started.elapsed().as_secs_f64() * 1e3);
                n_steps = ts.n_steps;
            }
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                / samples.len() as f64;
            writeln!(
                file,
                "{sweep},{value},{},{mean},{},{n_steps}",
                match kernel {
                    KernelChoice::Serial => "serial",
                    KernelChoice::Parallel => "parallel",
                },
                var.sqrt()
            )?;
        }
        Ok(())
    };

    for &dl in &section.bin_sizes {
        let mut config = base.clone();
        config.grid = popbal_core::Grid2d::new(
            config.grid.l1_max(),
            config.grid.l2_max(),
            dl,
            dl,
        )?;
        measure("bin_size", dl, &config, &law, &mut file)?;
    }
    for &factor in &section.growth_ratio_factors {
        let mut scaled = law.clone();
        if let GrowthLaw::Arrhenius { dim1, .. } = &mut scaled {
            dim1.rate_coeff *= factor;
        }
        measure("growth_ratio", factor, &base, &scaled, &mut file)?;
    }
    file.flush()?;
    println!("benchmark -> {}", args.out.join("benchmark.csv").display());
    Ok(())
}

fn cmd_estimate(args: &CommonArgs) -> Result<()> {
    let run = config_file::load(&args.config)?;
    let (setup, section) = run.estimation_setup()?;
    let truth = run.truth_law(section)?;
    let experiments = generate_experiments(&truth, &setup)?;

    // Gate: the forward model must track the oracle under the truth law
    // before any estimation output is produced.
    {
        let mut config = SimulationConfig::new(
            setup.grid.clone(),
            setup.seed.clone(),
            setup.material.clone(),
        );
        config.t_max_min = setup.t_max_min;
        config.courant = setup.courant;
        config.output_sampling = 50;
        let ts = run_simulation(&config, &truth, KernelChoice::Serial)?;
        let oracle = oracle_trace(&run, &config, &truth)?;
        let report = verify_against_mom(&ts, &oracle, section.tolerance)?;
        if !report.passed() {
            return Err(QualityFailure(
                "forward model failed oracle verification under the truth law".into(),
            )
            .into());
        }
    }

    let mut reports: Vec<EstimateReport> = Vec::new();
    for &k in &section.k_values {
        for backend_name in &section.backends {
            let backend: GradientBackend = backend_name
                .parse()
                .map_err(|e: String| anyhow::anyhow!(e))?;
            let report = estimate(&experiments, k, backend, &setup, section.n_iterations)?;
            let name = format!("estimation_{}_k{}.csv", backend.name(), k);
            let mut file = out_file(&args.out, &name)?;
            report.write_csv(&mut file)?;
            file.flush()?;
            println!(
                "estimate k={k} backend={}: loss {:.4e} -> {:.4e}, {:.2} ms/iter",
                backend.name(),
                report.initial_loss(),
                report.final_loss(),
                report.mean_iter_ms
            );
            reports.push(report);
        }
    }
    let mut timing = out_file(&args.out, "iteration_timing.csv")?;
    write_timing_csv(&reports, &mut timing)?;
    timing.flush()?;
    Ok(())
}
