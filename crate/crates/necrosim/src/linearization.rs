//! Fourier-mode linearization of the interface velocity around a round
//! stationary annulus.
//!
//! When the two interfaces are perturbed by a single angular mode
//! `cos(m θ)`, the leading (third-order, curvature-driven) part of the
//! linearized velocity acts on the perturbation pair
//! `(ρ̂₁(m), ρ̂₂(m))` as multiplication by a real 2×2 matrix — the
//! *principal symbol* [`principal_symbol`]. Its entries carry the factor
//! `|m|³` of surface-tension smoothing together with cross-interface
//! coupling that decays like `(R₂/R₁)^{|m|}`.
//!
//! The module provides:
//!
//! * closed-form symbol matrices and their eigenvalues ([`principal_symbol`],
//!   [`symbol_eigenvalues`], [`spectrum_scan`]), evaluated in a form that
//!   stays finite for large `m` where the naive Bessel-quotient expressions
//!   overflow;
//! * a finite-difference probe of the *full* nonlinear velocity map
//!   ([`fd_jacobian_mode`]) that pushes single-mode perturbations through the
//!   transformed-domain elliptic solver, used to cross-validate the symbol;
//! * an independent radial oracle for the `m = 0` column
//!   ([`radial_velocity`]) built from the closed-form log/Bessel profiles on
//!   a dilated annulus.
//!
//! Sign convention: both eigenvalues of the symbol are strictly negative for
//! every `m ≥ 1`, i.e. single-mode perturbations of the stationary annulus
//! are damped at a rate growing like `m³`.

use crate::error::{Error, Result};
use crate::evolution::{interface_velocity, InterfacePair};
use crate::spectral::FourierSeries;
use crate::stationary::{Geometry, ModelParams};
use crate::annulus_solver::SolverOptions;

/// Principal (third-order) symbol of the linearized velocity at angular
/// mode `m`, as a real 2×2 matrix acting on `(ρ̂₁(m), ρ̂₂(m))`.
///
/// With `t = (R₂/R₁)^{|m|}` the entries are
///
/// ```text
/// [ -(1+t²)/(1-t²) · |m|³/R₁³      -2t/(1-t²) · |m|³/(R₁²R₂) ]
/// [ -2t/(1-t²) · |m|³/(R₁R₂²)     -(1+t²)/(1-t²) · |m|³/R₂³  ]
/// ```
///
/// The symbol depends only on the geometry (not on the model parameters):
/// it is the curvature-driven part of the velocity. `m = 0` returns the
/// zero matrix — the area mode has no third-order damping and is governed
/// entirely by lower-order terms.
pub fn principal_symbol(geom: Geometry, m: i32) -> [[f64; 2]; 2] {
    if m == 0 {
        return [[0.0, 0.0], [0.0, 0.0]];
    }
    let r1 = geom.r1();
    let r2 = geom.r2();
    let m_abs = m.unsigned_abs();
    let m3 = f64::from(m_abs).powi(3);
    // (R2/R1)^|m| < 1, so these combinations stay in range for any m even
    // though the Bessel-quotient form they summarise overflows early.
    let t = (r2 / r1).powi(m_abs as i32);
    let d = 1.0 - t * t;
    let sum_over_d = (1.0 + t * t) / d;
    let two_over_d = 2.0 * t / d;
    [
        [
            -sum_over_d * m3 / (r1 * r1 * r1),
            -two_over_d * m3 / (r1 * r1 * r2),
        ],
        [
            -two_over_d * m3 / (r1 * r2 * r2),
            -sum_over_d * m3 / (r2 * r2 * r2),
        ],
    ]
}

/// Eigenvalues of a real 2×2 matrix with `bc ≥ 0` (real spectrum),
/// returned as `(larger, smaller)`.
fn eigenvalues_2x2(a: [[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half_gap = 0.5 * (a[0][0] - a[1][1]);
    let disc = (half_gap * half_gap + a[0][1] * a[1][0]).max(0.0).sqrt();
    (mean + disc, mean - disc)
}

/// Eigenvalues of [`principal_symbol`] at mode `m`, `(dominant, fast)`.
///
/// The dominant (least negative) eigenvalue sets the slowest decay rate of
/// a mode-`m` perturbation; the other belongs to the rapidly damped inner
/// branch. For `m ≥ 1` both are strictly negative.
pub fn symbol_eigenvalues(geom: Geometry, m: i32) -> (f64, f64) {
    eigenvalues_2x2(principal_symbol(geom, m))
}

/// One row of a [`spectrum_scan`]: the symbol and its eigenvalues at `m`.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumPoint {
    /// Angular mode number.
    pub m: i32,
    /// Principal symbol matrix at this mode.
    pub matrix: [[f64; 2]; 2],
    /// `(dominant, fast)` eigenvalue pair of the matrix.
    pub eigenvalues: (f64, f64),
}

/// Tabulate the principal symbol and its spectrum for `m = 0 ..= max_mode`.
pub fn spectrum_scan(geom: Geometry, max_mode: u32) -> Vec<SpectrumPoint> {
    (0..=max_mode as i32)
        .map(|m| {
            let matrix = principal_symbol(geom, m);
            SpectrumPoint {
                m,
                matrix,
                eigenvalues: eigenvalues_2x2(matrix),
            }
        })
        .collect()
}

/// Extract the `cos(mθ)` coefficient of a real Fourier series.
fn cosine_coefficient(series: &FourierSeries, m: u32) -> f64 {
    let c = series.coeff(m as i32);
    if m == 0 {
        c.re
    } else {
        2.0 * c.re
    }
}

/// Finite-difference Jacobian column probe of the full velocity map.
///
/// Perturbs one interface at a time by `± eps · cos(mθ)` around the round
/// configuration, evaluates the complete nonlinear velocity functional
/// through the transformed-domain solver, and returns the central
/// difference of the `cos(mθ)` velocity coefficients:
///
/// ```text
/// J[i][j] = ∂ (mode-m velocity of interface i) / ∂ (mode-m shape of interface j)
/// ```
///
/// For `m` large enough that lower-order terms are negligible relative to
/// `|m|³` this matrix converges to [`principal_symbol`]; the discrepancy at
/// moderate `m` measures the first-order (transport) correction, which for
/// the diagonal entries is of relative size `≈ (A G / 2) R₁³ / m²`.
pub fn fd_jacobian_mode(
    geom: Geometry,
    params: &ModelParams,
    m: u32,
    eps: f64,
    options: SolverOptions,
) -> Result<[[f64; 2]; 2]> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Config(format!(
            "finite-difference step must be positive and finite, got {eps}"
        )));
    }
    let max_mode = options.modes;
    if (m as usize) > max_mode {
        return Err(Error::Contract(format!(
            "probe mode {m} exceeds solver mode cutoff {max_mode}"
        )));
    }
    let zero = FourierSeries::zero(max_mode);
    let mut jac = [[0.0_f64; 2]; 2];
    for j in 0..2 {
        let mut column = [[0.0_f64; 2]; 2]; // [sign][interface]
        for (s, sign) in [1.0_f64, -1.0].iter().enumerate() {
            let bump = FourierSeries::cosine(max_mode, m as usize, sign * eps)?;
            let pair = if j == 0 {
                InterfacePair::new(bump, zero.clone())?
            } else {
                InterfacePair::new(zero.clone(), bump)?
            };
            let (phi1, phi2) = interface_velocity(geom, params, &pair, options)?;
            column[s][0] = cosine_coefficient(&phi1, m);
            column[s][1] = cosine_coefficient(&phi2, m);
        }
        for i in 0..2 {
            jac[i][j] = (column[0][i] - column[1][i]) / (2.0 * eps);
        }
    }
    Ok(jac)
}

/// Interface velocities of a *round* configuration, from closed-form radial
/// profiles — an oracle for the `m = 0` behaviour of the full solver.
///
/// The interfaces sit at `s_i = R_i (1 + c_i)`; the harmonic pressure part
/// is `a ln r + b` and the nutrient is a modified-Bessel combination, both
/// determined by the same boundary data the transformed-domain solver
/// receives. The returned pair is
///
/// ```text
/// Φ_i = (ψ'(s_i) - p'(s_i)) / R_i ,
/// ```
///
/// which vanishes identically when `(A, G)` is the stationary pair for the
/// given geometry and `psi0` and `c₁ = c₂ = 0`.
pub fn radial_velocity(
    geom: Geometry,
    params: &ModelParams,
    c1: f64,
    c2: f64,
) -> Result<(f64, f64)> {
    use crate::stationary::{NutrientProfile, PressureProfile};
    let s1 = geom.r1() * (1.0 + c1);
    let s2 = geom.r2() * (1.0 + c2);
    let dilated = Geometry::new(s1, s2)?;
    let pressure = PressureProfile::new(dilated, params.ag(), params.psi0);
    let nutrient = NutrientProfile::new(dilated, params.g, params.psi0)?;
    let phi1 = (nutrient.derivative(s1)? - pressure.derivative(s1)) / geom.r1();
    let phi2 = (nutrient.derivative(s2)? - pressure.derivative(s2)) / geom.r2();
    Ok((phi1, phi2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::solve_stationary;

    fn geom_2_1() -> Geometry {
        Geometry::new(2.0, 1.0).unwrap()
    }

    /// At (R1, R2) = (2, 1), m = 1: t = 1/2, (1+t²)/(1-t²) = 5/3,
    /// 2t/(1-t²) = 4/3, so the symbol is exactly
    /// [[-5/24, -1/3], [-2/3, -5/3]].
    #[test]
    fn symbol_exact_fractions_at_mode_one() {
        let a = principal_symbol(geom_2_1(), 1);
        assert!((a[0][0] - (-5.0 / 24.0)).abs() < 1e-15, "{}", a[0][0]);
        assert!((a[0][1] - (-1.0 / 3.0)).abs() < 1e-15, "{}", a[0][1]);
        assert!((a[1][0] - (-2.0 / 3.0)).abs() < 1e-15, "{}", a[1][0]);
        assert!((a[1][1] - (-5.0 / 3.0)).abs() < 1e-15, "{}", a[1][1]);
    }

    /// Reference matrix at (2, 1), m = 8. With t = 2⁻⁸ the combinations
    /// are exact rationals: (1+t²)/(1-t²) = 65537/65535 and
    /// 2t/(1-t²) = 512/65535, so every entry is a ratio of integers. The
    /// dominant eigenvalue is frozen from an independent double-precision
    /// eigensolve of that matrix.
    #[test]
    fn symbol_matches_frozen_mode_eight_reference() {
        let a = principal_symbol(geom_2_1(), 8);
        let reference = [
            [-4_194_368.0 / 65_535.0, -65_536.0 / 65_535.0],
            [-131_072.0 / 65_535.0, -33_554_944.0 / 65_535.0],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let rel = (a[i][j] - reference[i][j]).abs() / reference[i][j].abs();
                assert!(rel < 1e-14, "entry ({i},{j}): {} vs {}", a[i][j], reference[i][j]);
            }
        }
        let (dominant, fast) = symbol_eigenvalues(geom_2_1(), 8);
        let rel = (dominant - (-63.997_488_913_571_49)).abs() / 63.997_488_913_571_49;
        assert!(rel < 1e-10, "dominant eigenvalue {dominant}");
        assert!(fast < dominant);
    }

    /// For well-separated interfaces the coupling dies like (R2/R1)^m and
    /// the diagonal approaches the single-interface value -m³/R_i³.
    #[test]
    fn symbol_decouples_at_large_mode() {
        let geom = geom_2_1();
        let m = 64;
        let a = principal_symbol(geom, m);
        let m3 = (m as f64).powi(3);
        let rel11 = (a[0][0] + m3 / 8.0).abs() / (m3 / 8.0);
        let rel22 = (a[1][1] + m3).abs() / m3;
        assert!(rel11 < 1e-12, "diagonal (1,1) limit defect {rel11}");
        assert!(rel22 < 1e-12, "diagonal (2,2) limit defect {rel22}");
        // Off-diagonal terms carry (R2/R1)^64 ≈ 5e-20 and are invisible at
        // the scale of the matrix.
        let scale = a[1][1].abs();
        assert!(a[0][1].abs() / scale < 1e-12);
        assert!(a[1][0].abs() / scale < 1e-12);
    }

    #[test]
    fn symbol_is_even_in_the_mode_number() {
        let geom = Geometry::new(1.7, 0.6).unwrap();
        for m in 1..=12 {
            let plus = principal_symbol(geom, m);
            let minus = principal_symbol(geom, -m);
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(plus[i][j], minus[i][j]);
                }
            }
        }
    }

    /// Every non-zero mode is damped: both eigenvalues strictly negative,
    /// and the dominant rate strengthens monotonically with m.
    #[test]
    fn spectrum_is_stable_and_monotone() {
        for (r1, r2) in [(2.0, 1.0), (5.0, 1.5), (1.2, 0.9), (10.0, 1.0)] {
            let geom = Geometry::new(r1, r2).unwrap();
            let scan = spectrum_scan(geom, 48);
            assert_eq!(scan.len(), 49);
            assert_eq!(scan[0].eigenvalues, (0.0, 0.0));
            let mut previous_dominant = 0.0_f64;
            for point in &scan[1..] {
                let (dominant, fast) = point.eigenvalues;
                assert!(dominant < 0.0, "m={} dominant {dominant}", point.m);
                assert!(fast <= dominant);
                assert!(
                    dominant < previous_dominant,
                    "decay rate must strengthen with m: m={} {dominant} vs {previous_dominant}",
                    point.m
                );
                previous_dominant = dominant;
            }
        }
    }

    /// Eigenvalues of the 2x2 helper against hand-computable matrices.
    #[test]
    fn eigenvalue_helper_matches_hand_results() {
        let (hi, lo) = eigenvalues_2x2([[2.0, 1.0], [1.0, 2.0]]);
        assert!((hi - 3.0).abs() < 1e-14 && (lo - 1.0).abs() < 1e-14);
        let (hi, lo) = eigenvalues_2x2([[-1.0, 0.0], [0.0, -4.0]]);
        assert!((hi + 1.0).abs() < 1e-14 && (lo + 4.0).abs() < 1e-14);
    }

    /// The radial oracle vanishes exactly at the stationary configuration
    /// and responds at first order to dilations.
    #[test]
    fn radial_velocity_vanishes_at_stationary_state() {
        let geom = geom_2_1();
        let state = solve_stationary(geom, 1.0).unwrap();
        let (phi1, phi2) = radial_velocity(geom, &state.params(), 0.0, 0.0).unwrap();
        // The profiles are built from the same closed forms the stationary
        // solve used, so the residual is pure rounding noise relative to the
        // O(G) size of the individual derivative terms.
        let scale = state.ag().abs().max(1.0);
        assert!(phi1.abs() / scale < 1e-12, "phi1 = {phi1}");
        assert!(phi2.abs() / scale < 1e-12, "phi2 = {phi2}");

        // The m = 0 Jacobian's (1,1) entry is ≈ -48.7 here, so a 1e-6
        // dilation must produce a velocity of a few times 1e-5.
        let (d1, _) = radial_velocity(geom, &state.params(), 1e-6, 0.0).unwrap();
        assert!(d1.abs() > 1e-5, "dilation must produce a velocity, got {d1}");
    }

    /// Full-solver finite-difference Jacobian at m = 0 against the radial
    /// oracle differentiated the same way.
    #[test]
    fn fd_jacobian_mode_zero_matches_radial_oracle() {
        let geom = geom_2_1();
        let params = ModelParams {
            a: 1.0,
            g: 1.0,
            psi0: 1.0,
        };
        let eps = 1e-5;
        let options = SolverOptions {
            modes: 8,
            nr: 129,
            oversample: 8,
            ..SolverOptions::default()
        };
        let jac = fd_jacobian_mode(geom, &params, 0, eps, options).unwrap();

        let mut oracle = [[0.0_f64; 2]; 2];
        for j in 0..2 {
            let (c1p, c2p) = if j == 0 { (eps, 0.0) } else { (0.0, eps) };
            let plus = radial_velocity(geom, &params, c1p, c2p).unwrap();
            let minus = radial_velocity(geom, &params, -c1p, -c2p).unwrap();
            oracle[0][j] = (plus.0 - minus.0) / (2.0 * eps);
            oracle[1][j] = (plus.1 - minus.1) / (2.0 * eps);
        }

        let scale = oracle
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..2 {
            for j in 0..2 {
                let diff = (jac[i][j] - oracle[i][j]).abs() / scale;
                assert!(
                    diff < 1e-6,
                    "m=0 Jacobian ({i},{j}): solver {} vs oracle {}",
                    jac[i][j],
                    oracle[i][j]
                );
            }
        }
    }

    /// At a moderately large mode the probed Jacobian reproduces the
    /// principal symbol up to the expected first-order correction.
    #[test]
    fn fd_jacobian_approaches_symbol_at_mode_eight() {
        let geom = geom_2_1();
        let params = ModelParams {
            a: 1.0,
            g: 1.0,
            psi0: 1.0,
        };
        let options = SolverOptions {
            modes: 16,
            nr: 129,
            oversample: 8,
            ..SolverOptions::default()
        };
        let jac = fd_jacobian_mode(geom, &params, 8, 1e-6, options).unwrap();
        let symbol = principal_symbol(geom, 8);
        // First-order transport and curvature corrections enter the probed
        // Jacobian at relative size O(1/m²); at m = 8 the measured
        // deviations are 10.0% on the outer diagonal and 1.1% on the inner
        // one, shrinking fourfold at m = 16 (the sharp principal-dominance
        // gate at m = 32 lives in the acceptance suite).
        for (i, tol) in [(0, 0.12), (1, 0.03)] {
            let rel = (jac[i][i] - symbol[i][i]).abs() / symbol[i][i].abs();
            assert!(
                rel < tol,
                "diagonal ({i},{i}): probed {} vs symbol {} (rel {rel})",
                jac[i][i],
                symbol[i][i]
            );
        }
        let scale = symbol[1][1].abs();
        for (i, j) in [(0, 1), (1, 0)] {
            let rel = (jac[i][j] - symbol[i][j]).abs() / scale;
            assert!(
                rel < 1e-3,
                "off-diagonal ({i},{j}): probed {} vs symbol {}",
                jac[i][j],
                symbol[i][j]
            );
        }
    }
}
