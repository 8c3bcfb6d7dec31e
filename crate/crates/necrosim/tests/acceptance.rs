//! Acceptance suite: eight end-to-end criteria covering the modified Bessel
//! kernel, the stationary annulus theory, the transformed-domain elliptic
//! solver, the linearization, the time stepper, and the symmetry contract.
//!
//! Each criterion is one test that prints a single pass/fail line (shown
//! with `--nocapture`) and enforces both its accuracy tolerances and its
//! runtime budget.

use std::sync::Mutex;
use std::time::Instant;

use necrosim::annulus_solver::{
    mode_solution, BoundaryData, EquationKind, SolverOptions, TransformedDomain,
};
use necrosim::evolution::{evolve, interface_velocity, EvolveOptions, InterfacePair, Termination};
use necrosim::linearization::{fd_jacobian_mode, principal_symbol, symbol_eigenvalues};
use necrosim::specfun::{bessel_i, bessel_k};
use necrosim::spectral::FourierSeries;
use necrosim::stationary::{
    psi0_critical, solve_stationary, zero_supply_certificate, Geometry, ModelParams,
};
use necrosim::Error;

/// Runs the criteria one at a time so each runtime budget measures an
/// isolated run rather than contention between concurrent heavy tests.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Print the criterion's single pass/fail line, then enforce it.
fn report(criterion: &str, passed: bool, detail: &str, elapsed: f64, budget: f64) {
    let ok = passed && elapsed <= budget;
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {status} — {detail} [{elapsed:.2} s / budget {budget:.0} s]");
    assert!(passed, "criterion {criterion} FAILED: {detail}");
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2} s > {budget} s"
    );
}

#[test]
fn criterion_1_bessel_kernel() {
    let _guard = serial();
    let t0 = Instant::now();
    let n = 200;
    let (lo, hi) = (1e-2_f64, 50.0_f64);
    let mut worst_wronskian = 0.0_f64;
    let mut worst_derivative = 0.0_f64;
    for k in 0..n {
        let x = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        let w = x * (bessel_i(0, x).unwrap() * bessel_k(1, x).unwrap()
            + bessel_i(1, x).unwrap() * bessel_k(0, x).unwrap())
            - 1.0;
        worst_wronskian = worst_wronskian.max(w.abs());

        let h = 1e-5 * x;
        let di = (bessel_i(0, x + h).unwrap() - bessel_i(0, x - h).unwrap()) / (2.0 * h);
        let dk = (bessel_k(0, x + h).unwrap() - bessel_k(0, x - h).unwrap()) / (2.0 * h);
        let i1 = bessel_i(1, x).unwrap();
        let k1 = bessel_k(1, x).unwrap();
        worst_derivative = worst_derivative.max((di - i1).abs() / i1.abs());
        worst_derivative = worst_derivative.max((dk + k1).abs() / k1.abs());
    }
    let passed = worst_wronskian <= 1e-12 && worst_derivative <= 1e-6;
    report(
        "1 (modified Bessel kernel)",
        passed,
        &format!(
            "Wronskian defect {worst_wronskian:.2e} (tol 1e-12), derivative identity defect {worst_derivative:.2e} (tol 1e-6) on 200 log-spaced points in [0.01, 50]"
        ),
        t0.elapsed().as_secs_f64(),
        1.0,
    );
}

#[test]
fn criterion_2_stationary_pair_reproduction() {
    let _guard = serial();
    let t0 = Instant::now();
    let ratios = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let outer_radii = [0.5, 1.0, 2.0, 5.0];
    let thresholds = [0.1, 1.0, 10.0];

    let mut worst_defect = 0.0_f64;
    let mut min_critical = f64::INFINITY;
    let mut solved = 0_usize;
    let mut critical_rejections = 0_usize;
    for r1 in outer_radii {
        for ratio in ratios {
            let geom = Geometry::new(r1, ratio * r1).unwrap();
            let psi0_c = psi0_critical(geom).unwrap();
            min_critical = min_critical.min(psi0_c);
            match solve_stationary(geom, psi0_c) {
                Err(Error::CriticalPsi0 { .. }) => critical_rejections += 1,
                other => panic!("psi0 = psi0_critical must be non-solvable, got {other:?}"),
            }
            for psi0 in thresholds {
                // The lattice excludes neighbourhoods of the critical value,
                // where the pair degenerates by construction.
                if (psi0 - psi0_c).abs() < 1e-3 * psi0_c {
                    continue;
                }
                let state = solve_stationary(geom, psi0).unwrap();
                worst_defect = worst_defect
                    .max(state.defects[0].abs())
                    .max(state.defects[1].abs());
                solved += 1;
            }
        }
    }
    let passed =
        worst_defect < 1e-10 && min_critical > 0.0 && critical_rejections == 32 && solved >= 90;
    report(
        "2 (stationary pair reproduction)",
        passed,
        &format!(
            "max stationarity residual {worst_defect:.2e} (tol 1e-10) over {solved} lattice cases, min critical threshold {min_critical:.3e} > 0, {critical_rejections}/32 critical rejections"
        ),
        t0.elapsed().as_secs_f64(),
        5.0,
    );
}

#[test]
fn criterion_3_no_annulus_without_supply() {
    let _guard = serial();
    let t0 = Instant::now();
    let mut worst_boundary = 0.0_f64;
    let mut min_margin = f64::INFINITY;
    for r1 in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let cert = zero_supply_certificate(r1, 500).unwrap();
        worst_boundary = worst_boundary.max(cert.boundary_value.abs());
        min_margin = min_margin.min(cert.min_slope_margin);
        assert_eq!(cert.samples, 500);
    }
    let passed = worst_boundary <= 1e-12 && min_margin > 0.0;
    report(
        "3 (zero-supply nonexistence)",
        passed,
        &format!(
            "max boundary defect {worst_boundary:.2e} (tol 1e-12), min slope margin {min_margin:.2e} > 0 at 500 interior samples for five outer radii"
        ),
        t0.elapsed().as_secs_f64(),
        1.0,
    );
}

#[test]
fn criterion_4_solver_oracle_equivalence() {
    let _guard = serial();
    let t0 = Instant::now();
    let geom = Geometry::new(2.0, 1.0).unwrap();
    let flat = FourierSeries::zero(4);

    // Max pointwise error over the reported grid for one (kind, mode, nr).
    let solve_error = |kind: EquationKind, m: u32, nr: usize| -> f64 {
        let options = SolverOptions {
            modes: 4,
            nr,
            oversample: 16,
            ..SolverOptions::default()
        };
        let domain = TransformedDomain::new(geom, &flat, &flat, options).unwrap();
        let data = BoundaryData {
            outer: FourierSeries::cosine(4, m as usize, 1.0).unwrap(),
            inner: FourierSeries::cosine(4, m as usize, 0.7).unwrap(),
        };
        let field = domain.solve(kind, &data).unwrap();
        let profile = field.mode_profile(m as i32).unwrap();
        let scale = if m == 0 { 1.0 } else { 0.5 };
        let mut err = 0.0_f64;
        for (r, value) in field.reported_radii().iter().zip(&profile) {
            let (u1, u2) = mode_solution(geom, kind, m, *r).unwrap();
            err = err.max((value.re - scale * (1.0 * u1 + 0.7 * u2)).abs());
            err = err.max(value.im.abs());
        }
        err
    };

    let mut max_err_fine = 0.0_f64;
    let mut ratios = Vec::new();
    for kind in [EquationKind::Laplace, EquationKind::ModifiedHelmholtz] {
        for m in 0..=3_u32 {
            let coarse = solve_error(kind, m, 128);
            let fine = solve_error(kind, m, 256);
            max_err_fine = max_err_fine.max(fine);
            ratios.push(coarse / fine);
        }
    }
    let (ratio_lo, ratio_hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    let passed = max_err_fine < 1e-8 && ratio_lo >= 3.4 && ratio_hi <= 4.6;
    report(
        "4 (solver oracle equivalence)",
        passed,
        &format!(
            "max error vs closed per-mode solutions {max_err_fine:.2e} at Nr=256 (tol 1e-8); halving ratios in [{ratio_lo:.2}, {ratio_hi:.2}] (required [3.4, 4.6]) over both kinds, modes 0..=3"
        ),
        t0.elapsed().as_secs_f64(),
        30.0,
    );
}

#[test]
fn criterion_5_linearization_consistency() {
    let _guard = serial();
    let t0 = Instant::now();
    let geom = Geometry::new(2.0, 1.0).unwrap();
    let params = ModelParams {
        a: 1.0,
        g: 1.0,
        psi0: 1.0,
    };

    // Probe the full nonlinear velocity map in single-mode directions and
    // compare with the multiplier symbol. Lower-order (curvature/transport)
    // content decays like 1/m^2, so the entrywise gate applies at m = 32.
    let mut summary = String::new();
    let mut worst_at_32 = 0.0_f64;
    for (m, modes) in [(8_u32, 16_usize), (16, 24), (32, 40)] {
        let options = SolverOptions {
            modes,
            nr: 129,
            oversample: 8,
            ..SolverOptions::default()
        };
        let jac = fd_jacobian_mode(geom, &params, m, 1e-6, options).unwrap();
        let sym = principal_symbol(geom, m as i32);
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let rel = (jac[i][j] - sym[i][j]).abs() / sym[i][j].abs();
                worst = worst.max(rel);
                if m == 32 {
                    worst_at_32 = worst_at_32.max(rel);
                    assert!(
                        rel <= 0.05,
                        "entry ({i},{j}) at m=32: probe {} vs symbol {} (rel {rel:.4})",
                        jac[i][j],
                        sym[i][j]
                    );
                }
            }
        }
        summary.push_str(&format!("m={m}: {:.2}%; ", 100.0 * worst));
    }

    // Large-mode limits: the symbol collapses onto decoupled single-interface
    // multipliers; verified to 1e-8 by m = 64.
    let m64 = principal_symbol(geom, 64);
    let m_cubed = 64.0_f64.powi(3);
    let (r1, r2) = (geom.r1(), geom.r2());
    let limit_defect = [
        (m64[0][0] / (-m_cubed / r1.powi(3)) - 1.0).abs(),
        (m64[1][1] / (-m_cubed / r2.powi(3)) - 1.0).abs(),
        m64[0][1].abs() / (m_cubed / (r1 * r1 * r2)),
        m64[1][0].abs() / (m_cubed / (r1 * r2 * r2)),
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);

    let passed = worst_at_32 <= 0.05 && limit_defect <= 1e-8;
    report(
        "5 (linearization consistency)",
        passed,
        &format!(
            "probe-vs-symbol worst entrywise deviation {summary}gate 5% at m=32 ({:.2}%); large-mode limit defect {limit_defect:.1e} at m=64 (tol 1e-8)",
            100.0 * worst_at_32
        ),
        t0.elapsed().as_secs_f64(),
        120.0,
    );
}

#[test]
fn criterion_6_stationarity_preservation() {
    let _guard = serial();
    let t0 = Instant::now();
    let geom = Geometry::new(5.0, 1.5).unwrap();
    let params = solve_stationary(geom, 1.0).unwrap().params();
    let opts = EvolveOptions {
        t_end: 0.1,
        dt: 1e-3,
        snapshot_stride: 1,
        solver: SolverOptions {
            modes: 8,
            nr: 161,
            oversample: 12,
            ..SolverOptions::default()
        },
        ..EvolveOptions::default()
    };
    let trajectory = evolve(geom, &params, &InterfacePair::flat(8), &opts).unwrap();
    let drift = trajectory
        .snapshots
        .iter()
        .map(|s| s.pair.sup_norm())
        .fold(0.0_f64, f64::max);
    let completed = matches!(trajectory.termination, Termination::Completed);
    let passed = drift < 1e-7 && completed && trajectory.steps == 100;
    report(
        "6 (stationarity preservation)",
        passed,
        &format!(
            "sup-norm drift {drift:.2e} (tol 1e-7) across {} IMEX steps of the stationary annulus, termination {:?}",
            trajectory.steps, trajectory.termination
        ),
        t0.elapsed().as_secs_f64(),
        60.0,
    );
}

#[test]
fn criterion_7_linear_regime_decay() {
    let _guard = serial();
    let t0 = Instant::now();
    let geom = Geometry::new(5.0, 1.5).unwrap();
    let params = solve_stationary(geom, 1.0).unwrap().params();
    let mode = 24_u32;
    let amplitude = 1e-4;
    let dt = 2e-4;

    let initial = InterfacePair::new(
        FourierSeries::cosine(32, mode as usize, amplitude).unwrap(),
        FourierSeries::zero(32),
    )
    .unwrap();
    let opts = EvolveOptions {
        t_end: 40.0 * dt,
        dt,
        snapshot_stride: 1,
        solver: SolverOptions {
            modes: 32,
            nr: 65,
            oversample: 4,
            ..SolverOptions::default()
        },
        ..EvolveOptions::default()
    };
    let trajectory = evolve(geom, &params, &initial, &opts).unwrap();

    // Fit the decay rate over the initial transient, skipping the first few
    // steps where the solver still projects onto the discrete eigenvector.
    let window_start = 10.0 * dt;
    let first = trajectory
        .snapshots
        .iter()
        .find(|s| s.time >= window_start * (1.0 - 1e-12))
        .unwrap();
    let last = trajectory.snapshots.last().unwrap();
    let a0 = first.pair.rho1().coeff(mode as i32).norm();
    let a1 = last.pair.rho1().coeff(mode as i32).norm();
    let rate = (a1 / a0).ln() / (last.time - first.time);
    let (dominant, _) = symbol_eigenvalues(geom, mode as i32);
    let rel = (rate - dominant).abs() / dominant.abs();
    let passed = rel <= 0.10 && a1 < a0 && rate < 0.0;
    report(
        "7 (linear-regime decay)",
        passed,
        &format!(
            "mode-{mode} seed of 1e-4 decays at {rate:.3} vs dominant symbol eigenvalue {dominant:.3} (deviation {:.1}%, tol 10%)",
            100.0 * rel
        ),
        t0.elapsed().as_secs_f64(),
        120.0,
    );
}

#[test]
fn criterion_8_symmetry_suite() {
    let _guard = serial();
    let t0 = Instant::now();
    let geom = Geometry::new(2.0, 1.0).unwrap();
    let params = ModelParams {
        a: 1.0,
        g: 1.0,
        psi0: 1.0,
    };
    let options = SolverOptions {
        modes: 8,
        nr: 65,
        oversample: 4,
        ..SolverOptions::default()
    };

    let rho1 = FourierSeries::cosine(8, 2, 0.04)
        .unwrap()
        .add(&FourierSeries::cosine(8, 3, 0.02).unwrap())
        .unwrap();
    let rho2 = FourierSeries::cosine(8, 3, 0.03).unwrap();
    let pair = InterfacePair::new(rho1, rho2).unwrap();
    let (phi1, phi2) = interface_velocity(geom, &params, &pair, options).unwrap();

    // Rotation by 2*pi/8 shifts both the solver grid (24 points) and the
    // dense assembly grid (64 points), so equivariance holds to rounding.
    let phi = std::f64::consts::PI / 4.0;
    let rotated = InterfacePair::new(pair.rho1().rotated(phi), pair.rho2().rotated(phi)).unwrap();
    let (rot1, rot2) = interface_velocity(geom, &params, &rotated, options).unwrap();
    let mut rotation_defect = 0.0_f64;
    for m in -8..=8_i32 {
        rotation_defect = rotation_defect
            .max((rot1.coeff(m) - phi1.rotated(phi).coeff(m)).norm())
            .max((rot2.coeff(m) - phi2.rotated(phi).coeff(m)).norm());
    }

    let reflected =
        InterfacePair::new(pair.rho1().reflected(), pair.rho2().reflected()).unwrap();
    let (ref1, ref2) = interface_velocity(geom, &params, &reflected, options).unwrap();
    let mut reflection_defect = 0.0_f64;
    for m in -8..=8_i32 {
        reflection_defect = reflection_defect
            .max((ref1.coeff(m) - phi1.reflected().coeff(m)).norm())
            .max((ref2.coeff(m) - phi2.reflected().coeff(m)).norm());
    }

    // Radial closure: a round configuration has a purely radial velocity —
    // every nonzero angular coefficient vanishes to rounding — and its
    // radial component matches the one-dimensional oracle.
    let closure_options = SolverOptions {
        modes: 8,
        nr: 129,
        oversample: 8,
        ..SolverOptions::default()
    };
    let round_params = ModelParams {
        a: 0.7,
        g: 2.0,
        psi0: 1.3,
    };
    let (c1, c2) = (0.05, -0.04);
    let mut round1 = FourierSeries::zero(8);
    round1.set_coeff(0, num_complex::Complex64::new(c1, 0.0));
    let mut round2 = FourierSeries::zero(8);
    round2.set_coeff(0, num_complex::Complex64::new(c2, 0.0));
    let round = InterfacePair::new(round1, round2).unwrap();
    let (w1, w2) = interface_velocity(geom, &round_params, &round, closure_options).unwrap();
    let mut purity_defect = 0.0_f64;
    for m in 1..=8_i32 {
        purity_defect = purity_defect
            .max(w1.coeff(m).norm())
            .max(w1.coeff(-m).norm())
            .max(w2.coeff(m).norm())
            .max(w2.coeff(-m).norm());
    }
    let (oracle1, oracle2) =
        necrosim::linearization::radial_velocity(geom, &round_params, c1, c2).unwrap();
    let oracle_gap = (w1.coeff(0).re - oracle1)
        .abs()
        .max((w2.coeff(0).re - oracle2).abs());

    let coeff_defect = rotation_defect.max(reflection_defect).max(purity_defect);
    let passed = coeff_defect <= 1e-10 && oracle_gap <= 1e-4;
    report(
        "8 (symmetry suite)",
        passed,
        &format!(
            "rotation defect {rotation_defect:.1e}, reflection defect {reflection_defect:.1e}, round-state purity {purity_defect:.1e} (all tol 1e-10); radial closure vs 1-D oracle {oracle_gap:.1e}"
        ),
        t0.elapsed().as_secs_f64(),
        30.0,
    );
}
