//! Property tests for the sweep kernel and the moment machinery.

use autodiff::{Dual, Scalar};
use popbal_core::*;
use proptest::prelude::*;

/// Total variation of a line embedded in zero ghost cells.
fn total_variation(line: &[f64]) -> f64 {
    let mut tv = line[0].abs();
    for w in line.windows(2) {
        tv += (w[1] - w[0]).abs();
    }
    tv + line[line.len() - 1].abs()
}

fn line_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0_f64..10.0, 4..40)
}

proptest! {
    /// The limited scheme is total-variation diminishing for any stable
    /// Courant number.
    #[test]
    fn sweep_is_tvd(line in line_strategy(), c in 0.0_f64..=1.0) {
        let out = sweep_1d(&line, c, 1.0, 1.0).unwrap();
        let before = total_variation(&line);
        let after = total_variation(&out);
        prop_assert!(
            after <= before * (1.0 + 1e-12) + 1e-12,
            "TV grew: {before} -> {after}"
        );
    }

    /// Entries stay non-negative through a sweep.
    #[test]
    fn sweep_preserves_non_negativity(line in line_strategy(), c in 0.0_f64..=1.0) {
        let out = sweep_1d(&line, c, 1.0, 1.0).unwrap();
        prop_assert!(out.iter().all(|&v| v >= 0.0));
    }

    /// Away from the outflow boundary the sweep conserves the line sum; with
    /// outflow the sum can only decrease.
    #[test]
    fn sweep_conserves_or_loses_at_the_boundary(
        body in prop::collection::vec(0.0_f64..10.0, 1..20),
        c in 0.0_f64..=1.0,
    ) {
        let mut line = vec![0.0; body.len() + 8];
        line[2..2 + body.len()].copy_from_slice(&body);
        let out = sweep_1d(&line, c, 1.0, 1.0).unwrap();
        let before: f64 = line.iter().sum();
        let after: f64 = out.iter().sum();
        if before > 0.0 {
            // Interior support: exact conservation to round-off.
            prop_assert!(((after - before) / before).abs() < 1e-12);
        }
        // Support spreads at most one cell downstream.
        prop_assert_eq!(out[line.len() - 1], 0.0);
    }

    /// A unit Courant number shifts any gently varying line exactly one cell.
    #[test]
    fn unit_courant_shifts_exactly(steps in prop::collection::vec(0.5_f64..2.0, 3..20)) {
        // Build a line whose neighbours stay within a factor of two, so the
        // flux cancellation is exact in floating point.
        let mut line = vec![1.0_f64];
        for s in &steps {
            let next = line.last().unwrap() * s;
            line.push(next);
        }
        let out = sweep_1d(&line, 2.0, 0.5, 1.0).unwrap();
        prop_assert_eq!(out[0], 0.0);
        for i in 1..line.len() {
            prop_assert_eq!(out[i].to_bits(), line[i - 1].to_bits());
        }
    }

    /// The serial and parallel kernels are bit-identical on random states.
    #[test]
    fn kernels_are_bit_identical(
        cells in prop::collection::vec(0.0_f64..5.0, 144),
        c1 in 0.0_f64..0.95,
        c2 in 0.0_f64..0.95,
    ) {
        let grid = Grid2d::new(12.0, 12.0, 1.0, 1.0).unwrap();
        let mut a = Pssd::new(grid.clone(), cells.clone()).unwrap();
        let mut b = Pssd::new(grid, cells).unwrap();
        SerialKernel.split_step(&mut a, c1, c2).unwrap();
        ParallelKernel.split_step(&mut b, c1, c2).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    /// Dual numbers with zero tangent reproduce the plain sweep bit for bit.
    #[test]
    fn sweep_is_scalar_generic(line in line_strategy(), c in 0.0_f64..=1.0) {
        let plain = sweep_1d(&line, c, 1.0, 1.0).unwrap();
        let dual_line: Vec<Dual> = line.iter().map(|&v| Dual::constant(v)).collect();
        let traced = sweep_1d(&dual_line, Dual::constant(c), Dual::constant(1.0), 1.0).unwrap();
        for (p, d) in plain.iter().zip(&traced) {
            prop_assert_eq!(p.to_bits(), d.value.to_bits());
        }
    }

    /// The van Leer limiter lies in the second-order TVD region.
    #[test]
    fn van_leer_is_in_the_tvd_region(theta in -50.0_f64..50.0) {
        let phi: f64 = popbal_core::solver::van_leer(theta);
        prop_assert!((0.0..2.0).contains(&phi));
        if theta > 0.0 {
            prop_assert!(phi <= 2.0 * theta + 1e-12);
        } else {
            prop_assert_eq!(phi, 0.0);
        }
    }

    /// Factorized and direct moment quadratures agree on random states.
    #[test]
    fn moment_routes_agree(cells in prop::collection::vec(0.0_f64..3.0, 60)) {
        let grid = Grid2d::new(30.0, 12.0, 3.0, 2.0).unwrap();
        let p = Pssd::new(grid, cells).unwrap();
        let mv = moment_vector(&p);
        for (got, (q_p, q_q)) in [
            (mv.m00, (0, 0)),
            (mv.m10, (1, 0)),
            (mv.m01, (0, 1)),
            (mv.m11, (1, 1)),
            (mv.m02, (0, 2)),
            (mv.m12, (1, 2)),
        ] {
            let direct = cross_moment(&p, q_p, q_q);
            if direct == 0.0 {
                prop_assert_eq!(got, 0.0);
            } else {
                prop_assert!(((got - direct) / direct).abs() < 1e-12);
            }
        }
    }
}

/// The limited scheme is second-order accurate on smooth profiles: halving
/// the bin width cuts the L1 advection error by about four (first-order
/// upwind would only halve it).
#[test]
fn refinement_shows_second_order_convergence() {
    fn l1_error(dl: f64) -> f64 {
        let n = (100.0 / dl) as usize;
        let gaussian: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * dl;
                (-0.5 * ((x - 30.0) / 8.0).powi(2)).exp()
            })
            .collect();
        let courant = 0.5;
        let shift_cells = (20.0 / dl) as usize; // 20 µm of transport
        let steps = (shift_cells as f64 / courant) as usize;
        let mut line = gaussian.clone();
        for _ in 0..steps {
            line = sweep_1d(&line, courant, 1.0, 1.0).unwrap();
        }
        // The total displacement is an exact whole number of cells, so the
        // reference is the initial profile shifted cell-wise.
        (0..n)
            .map(|i| {
                let exact = if i >= shift_cells {
                    gaussian[i - shift_cells]
                } else {
                    0.0
                };
                (line[i] - exact).abs() * dl
            })
            .sum()
    }
    let coarse = l1_error(1.0);
    let medium = l1_error(0.5);
    let fine = l1_error(0.25);
    assert!(
        coarse / medium > 3.0 && medium / fine > 3.0,
        "refinement ratios {:.2}, {:.2} are below second-order behaviour",
        coarse / medium,
        medium / fine
    );
}

/// A log-normal seed runs through the full solver and still tracks the
/// moment oracle (both shapes share the arithmetic mean/spread moments).
#[test]
fn log_normal_seed_tracks_the_oracle() {
    let grid = Grid2d::new(1200.0, 600.0, 10.0, 10.0).unwrap();
    let seed = SeedSpec::new(SeedShape::LogNormal, 400.0, 250.0, 30.0, 30.0, 1.0).unwrap();
    let mut cfg = SimulationConfig::new(grid, seed, MaterialProperties::default());
    cfg.t_max_min = 20.0;
    cfg.output_sampling = 40;
    let law = GrowthLaw::arrhenius_default();
    let ts = simulate(&cfg, &law, &SerialKernel).unwrap();
    let discrete_seed = seed_pssd(&cfg.seed, &cfg.grid, &cfg.material).unwrap();
    let oracle = mom_solve(
        MomentState::new(moment_vector(&discrete_seed), cfg.c0),
        cfg.temp_c,
        &law,
        &cfg.material,
        cfg.t_max_min,
        20_000,
    )
    .unwrap();
    let report = verify_against_mom(&ts, &oracle, 0.02).unwrap();
    assert!(
        report.passed(),
        "log-normal run deviates: {:?}",
        report
            .checks
            .iter()
            .map(|c| c.max_rel_deviation)
            .collect::<Vec<_>>()
    );
}

/// Stepping a full simulation with dual numbers carrying a real tangent in
/// the rate coefficient matches finite differences of the plain solver.
#[test]
fn simulation_tangent_matches_finite_differences() {
    let grid = Grid2d::new(700.0, 450.0, 25.0, 25.0).unwrap();
    let mut cfg = SimulationConfig::new(grid, SeedSpec::default(), MaterialProperties::default());
    cfg.t_max_min = 8.0;
    cfg.output_sampling = 5;

    let run = |scale: f64| -> f64 {
        let mut law = GrowthLaw::arrhenius_default();
        if let GrowthLaw::Arrhenius { dim1, .. } = &mut law {
            dim1.rate_coeff *= scale;
        }
        let ts = simulate(&cfg, &law, &SerialKernel).unwrap();
        ts.concentrations[ts.len() - 1]
    };

    // Forward-mode: tangent seeded on the dim-1 rate coefficient.
    let mut dual_law = GrowthLaw::arrhenius_default().lift::<Dual>();
    if let GrowthLaw::Arrhenius { dim1, .. } = &mut dual_law {
        let base = dim1.rate_coeff.value;
        dim1.rate_coeff = Dual::with_tangent(base, base); // d/d(scale)
    }
    let ts = simulate(&cfg, &dual_law, &SerialKernel).unwrap();
    let tangent = ts.concentrations[ts.len() - 1].tangent;

    let h = 1e-6;
    let fd = (run(1.0 + h) - run(1.0 - h)) / (2.0 * h);
    let rel = (tangent - fd).abs() / fd.abs().max(1e-12);
    assert!(rel < 1e-5, "dual {tangent} vs fd {fd} (rel {rel:.2e})");
}
