//! Time evolution of the two perturbed interfaces.
//!
//! The state is an [`InterfacePair`] `(ρ₁, ρ₂)` of real Fourier series: the
//! outer interface lives at radius `R₁ (1 + ρ₁(θ))`, the inner one at
//! `R₂ (1 + ρ₂(θ))`. One evaluation of the velocity functional
//! [`interface_velocity`]:
//!
//! 1. pulls the perturbed domain back to the reference annulus and solves
//!    the harmonic pressure part `q` (Laplace, curvature boundary data) and
//!    the nutrient `v` (modified Helmholtz, constant boundary data) with the
//!    transformed-domain solver;
//! 2. evaluates the kinematic trace `𝒞ᵢ(w) = w_r/α − R_iρ_i'/s_i² ·
//!    (w_θ − S_θ w_r/α)` of each field on each interface, which is exactly
//!    `∂_t s_i` for the level-set motion of `s = s_i(θ)` under the gradient
//!    flow of `w`;
//! 3. assembles the normal velocities
//!    `Φ_i = (𝒞ᵢ v − 𝒞ᵢ q)/R_i − (A G/2)(1 + ρ_i)`,
//!    where the last term is the trace of the explicit quadratic pressure
//!    part `A G |x|²/4` handled analytically. For a round configuration
//!    this reduces to `Φ_i = (ψ'(s_i) − p'(s_i))/R_i`, which vanishes at
//!    the stationary `(A, G)`.
//!
//! Time stepping ([`evolve`]) is first-order IMEX: the stiff third-order
//! principal symbol `P_m` of the linearization is treated implicitly per
//! angular mode, the remaining (lower-order and nonlinear) part of `Φ`
//! explicitly:
//!
//! ```text
//! (I − Δt P_m) ρ̂ⁿ⁺¹(m) = ρ̂ⁿ(m) + Δt (Φ̂ⁿ(m) − P_m ρ̂ⁿ(m))
//! ```
//!
//! The step size halves when a step would move an interface too far or
//! into the inadmissible set, and the run ends with a [`Termination`]
//! describing whether the final time was reached, the interfaces collided,
//! or the state stopped being finite; the partial trajectory up to that
//! point is always returned.

use num_complex::Complex64;

use crate::annulus_solver::{BoundaryData, EquationKind, Interface, SolverOptions, TransformedDomain};
use crate::error::{Error, Result};
use crate::linearization::principal_symbol;
use crate::spectral::FourierSeries;
use crate::stationary::{Geometry, ModelParams};

/// The two interface perturbations, kept real-symmetric and finite.
///
/// Both series share one degree; [`InterfacePair::new`] lifts the shorter
/// one. The pair does not enforce admissibility for a particular geometry —
/// that check belongs to the solver and the evolution guards, which know
/// the geometric bound.
#[derive(Debug, Clone)]
pub struct InterfacePair {
    rho1: FourierSeries,
    rho2: FourierSeries,
}

impl InterfacePair {
    /// Build a pair, lifting both series to a common degree, projecting
    /// onto exactly real functions and rejecting non-finite coefficients.
    pub fn new(rho1: FourierSeries, rho2: FourierSeries) -> Result<Self> {
        let degree = rho1.max_mode().max(rho2.max_mode());
        let mut rho1 = rho1.with_max_mode(degree);
        let mut rho2 = rho2.with_max_mode(degree);
        rho1.enforce_real_symmetry();
        rho2.enforce_real_symmetry();
        let finite = |s: &FourierSeries| s.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite(&rho1) || !finite(&rho2) {
            return Err(Error::Contract(
                "interface perturbations must have finite coefficients".into(),
            ));
        }
        Ok(Self { rho1, rho2 })
    }

    /// The flat pair `ρ₁ = ρ₂ = 0` of the given degree.
    pub fn flat(max_mode: usize) -> Self {
        Self {
            rho1: FourierSeries::zero(max_mode),
            rho2: FourierSeries::zero(max_mode),
        }
    }

    /// Outer interface perturbation.
    pub fn rho1(&self) -> &FourierSeries {
        &self.rho1
    }

    /// Inner interface perturbation.
    pub fn rho2(&self) -> &FourierSeries {
        &self.rho2
    }

    /// Common degree of the two series.
    pub fn max_mode(&self) -> usize {
        self.rho1.max_mode()
    }

    /// Larger of the two interface sup-norms.
    pub fn sup_norm(&self) -> f64 {
        self.rho1.sup_norm().max(self.rho2.sup_norm())
    }

    /// The same pair re-expressed with degree `max_mode` (truncating or
    /// zero-padding).
    pub fn with_max_mode(&self, max_mode: usize) -> Self {
        Self {
            rho1: self.rho1.with_max_mode(max_mode),
            rho2: self.rho2.with_max_mode(max_mode),
        }
    }
}

/// Pointwise curvature factor of the curve `r(θ) = 1 + ρ(θ)` on a uniform
/// `n`-point angular grid:
///
/// ```text
/// κ(ρ) = ((1+ρ)² + 2ρ'² − (1+ρ) ρ'') / ((1+ρ)² + ρ'²)^{3/2}
/// ```
///
/// The physical curvature of the interface `R_i (1 + ρ)` is `κ(ρ)/R_i`;
/// the factor is normalised so `κ(0) = 1` and `κ(c) = 1/(1+c)` for a pure
/// dilation, and its linearization at zero is `κ'(0)[h] = −h'' − h`.
pub fn curvature_samples(rho: &FourierSeries, n: usize) -> Result<Vec<f64>> {
    let p = rho.sample(n)?;
    let d1 = rho.derivative().sample(n)?;
    let d2 = rho.derivative().derivative().sample(n)?;
    Ok((0..n)
        .map(|k| {
            let one = 1.0 + p[k];
            let num = one * one + 2.0 * d1[k] * d1[k] - one * d2[k];
            let den = (one * one + d1[k] * d1[k]).powf(1.5);
            num / den
        })
        .collect())
}

/// Synthesise mode-space boundary derivative coefficients into angular
/// samples on an `n`-point grid.
fn synthesize_modes(coeffs: &[Complex64], max_mode: usize, n: usize) -> Result<Vec<f64>> {
    let mut series = FourierSeries::zero(max_mode);
    let mm = max_mode as i32;
    for (k, &c) in coeffs.iter().enumerate() {
        series.set_coeff(k as i32 - mm, c);
    }
    series.enforce_real_symmetry();
    series.sample(n)
}

/// Kinematic trace of a solved field on one interface, sampled on the
/// dense angular grid: `𝒞ᵢ(w) = w_r/α − (R_i ρ_i'/s_i²)(w_θ − S_θ w_r/α)`
/// evaluated at `r = R_i`, where `s_i = R_i (1 + ρ_i)` and
/// `S_θ(R_i, θ) = R_i ρ_i'(θ)`.
#[allow(clippy::too_many_arguments)]
fn kinematic_trace(
    w_r: &[f64],
    w_theta: &[f64],
    alpha: &[f64],
    rho_i: &[f64],
    drho_i: &[f64],
    radius: f64,
) -> Vec<f64> {
    let n = w_r.len();
    (0..n)
        .map(|k| {
            let s = radius * (1.0 + rho_i[k]);
            let s_theta = radius * drho_i[k];
            let radial = w_r[k] / alpha[k];
            radial - radius * drho_i[k] / (s * s) * (w_theta[k] - s_theta * radial)
        })
        .collect()
}

/// Normal velocities `(Φ₁, Φ₂)` of the two interfaces, as Fourier series of
/// the solver's angular degree.
///
/// Fails with [`Error::InterfaceCollision`] if the pair is outside the
/// admissible set of the geometry, with [`Error::NumericalBlowup`] if the
/// assembled boundary data is not finite (overflowing model parameters),
/// and propagates solver failures.
pub fn interface_velocity(
    geom: Geometry,
    params: &ModelParams,
    pair: &InterfacePair,
    options: SolverOptions,
) -> Result<(FourierSeries, FourierSeries)> {
    let m = options.modes;
    let domain = TransformedDomain::new(geom, pair.rho1(), pair.rho2(), options)?;
    let (r1, r2) = (geom.r1(), geom.r2());
    let ag = params.ag();

    // Dense grid for assembling products of series: fine enough that the
    // aliasing of smooth-data products back onto modes <= M is negligible.
    let n = (8 * m.max(1)).max(64);
    let p1 = pair.rho1().sample(n)?;
    let p2 = pair.rho2().sample(n)?;
    let d1 = pair.rho1().derivative().sample(n)?;
    let d2 = pair.rho2().derivative().sample(n)?;
    let kappa1 = curvature_samples(pair.rho1(), n)?;
    let kappa2 = curvature_samples(pair.rho2(), n)?;

    // Dirichlet data. Pressure: p = q + AG|x|²/4 with q harmonic, so q
    // carries the curvature data minus the quadratic part evaluated on the
    // moving interface. Nutrient: constant levels G and G - psi0.
    let q_outer_samples: Vec<f64> = (0..n)
        .map(|k| {
            let s = 1.0 + p1[k];
            kappa1[k] / r1 - 0.25 * ag * r1 * r1 * s * s
        })
        .collect();
    let q_inner_samples: Vec<f64> = (0..n)
        .map(|k| {
            let s = 1.0 + p2[k];
            -kappa2[k] / r2 - 0.25 * ag * r2 * r2 * s * s - params.psi0
        })
        .collect();
    let q_data = BoundaryData {
        outer: FourierSeries::from_samples(&q_outer_samples, m)?,
        inner: FourierSeries::from_samples(&q_inner_samples, m)?,
    };
    let v_data = BoundaryData {
        outer: FourierSeries::from_modes(m, &[(0, Complex64::new(params.g, 0.0))])?,
        inner: FourierSeries::from_modes(m, &[(0, Complex64::new(params.g - params.psi0, 0.0))])?,
    };
    let finite = |s: &FourierSeries| s.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite());
    if !finite(&q_data.outer) || !finite(&q_data.inner) || !finite(&v_data.outer) || !finite(&v_data.inner)
    {
        return Err(Error::NumericalBlowup { time: 0.0 });
    }

    let q_field = domain.solve(EquationKind::Laplace, &q_data)?;
    let v_field = domain.solve(EquationKind::ModifiedHelmholtz, &v_data)?;

    // Radial-map slope alpha(θ) shared by both interfaces.
    let alpha: Vec<f64> = (0..n)
        .map(|k| (r1 * (1.0 + p1[k]) - r2 * (1.0 + p2[k])) / (r1 - r2))
        .collect();

    // Boundary samples of w_r (solver, mode space -> dense grid) and w_θ
    // (exact derivative of the Dirichlet data).
    let q_r_outer = synthesize_modes(&q_field.boundary_radial_derivative(Interface::Outer), m, n)?;
    let q_r_inner = synthesize_modes(&q_field.boundary_radial_derivative(Interface::Inner), m, n)?;
    let v_r_outer = synthesize_modes(&v_field.boundary_radial_derivative(Interface::Outer), m, n)?;
    let v_r_inner = synthesize_modes(&v_field.boundary_radial_derivative(Interface::Inner), m, n)?;
    let q_t_outer = q_data.outer.derivative().sample(n)?;
    let q_t_inner = q_data.inner.derivative().sample(n)?;
    let v_t_outer = v_data.outer.derivative().sample(n)?;
    let v_t_inner = v_data.inner.derivative().sample(n)?;

    let trace_q1 = kinematic_trace(&q_r_outer, &q_t_outer, &alpha, &p1, &d1, r1);
    let trace_q2 = kinematic_trace(&q_r_inner, &q_t_inner, &alpha, &p2, &d2, r2);
    let trace_v1 = kinematic_trace(&v_r_outer, &v_t_outer, &alpha, &p1, &d1, r1);
    let trace_v2 = kinematic_trace(&v_r_inner, &v_t_inner, &alpha, &p2, &d2, r2);

    let phi1_samples: Vec<f64> = (0..n)
        .map(|k| (trace_v1[k] - trace_q1[k]) / r1 - 0.5 * ag * (1.0 + p1[k]))
        .collect();
    let phi2_samples: Vec<f64> = (0..n)
        .map(|k| (trace_v2[k] - trace_q2[k]) / r2 - 0.5 * ag * (1.0 + p2[k]))
        .collect();

    Ok((
        FourierSeries::from_samples(&phi1_samples, m)?,
        FourierSeries::from_samples(&phi2_samples, m)?,
    ))
}

/// One implicit-explicit update of the pair under velocities `(φ₁, φ₂)`.
fn imex_step(
    geom: Geometry,
    pair: &InterfacePair,
    phi1: &FourierSeries,
    phi2: &FourierSeries,
    dt: f64,
) -> InterfacePair {
    let mm = pair.max_mode() as i32;
    let mut new1 = FourierSeries::zero(pair.max_mode());
    let mut new2 = FourierSeries::zero(pair.max_mode());
    for m in -mm..=mm {
        let p = principal_symbol(geom, m);
        let x = [pair.rho1().coeff(m), pair.rho2().coeff(m)];
        let f = [phi1.coeff(m), phi2.coeff(m)];
        let rhs = [
            x[0] + (f[0] - x[0] * p[0][0] - x[1] * p[0][1]) * dt,
            x[1] + (f[1] - x[0] * p[1][0] - x[1] * p[1][1]) * dt,
        ];
        // (I - dt P) is strictly diagonally dominant for every mode (the
        // symbol's diagonal dominates its off-diagonal product), so the
        // 2x2 solve below never degenerates.
        let a = 1.0 - dt * p[0][0];
        let b = -dt * p[0][1];
        let c = -dt * p[1][0];
        let d = 1.0 - dt * p[1][1];
        let det = a * d - b * c;
        new1.set_coeff(m, (rhs[0] * d - rhs[1] * b) / det);
        new2.set_coeff(m, (rhs[1] * a - rhs[0] * c) / det);
    }
    new1.enforce_real_symmetry();
    new2.enforce_real_symmetry();
    InterfacePair {
        rho1: new1,
        rho2: new2,
    }
}

/// Advance the interface pair by a single IMEX step of size `dt`: the
/// principal multiplier part of the velocity is treated implicitly
/// (mode-diagonal 2x2 solves), the remaining nonlinear part explicitly.
///
/// Fails with [`Error::InterfaceCollision`] (at time `dt` relative to the
/// input state) when the stepped pair leaves the admissible band, and with
/// [`Error::NumericalBlowup`] when it stops being finite. For adaptive
/// multi-step integration use [`evolve`], which shares this update rule.
pub fn step(
    geom: Geometry,
    params: &ModelParams,
    pair: &InterfacePair,
    dt: f64,
    options: SolverOptions,
) -> Result<InterfacePair> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!(
            "step size must be positive and finite, got {dt}"
        )));
    }
    let (phi1, phi2) = interface_velocity(geom, params, pair, options)?;
    let next = imex_step(geom, pair, &phi1, &phi2, dt);
    let sup = next.sup_norm();
    if !sup.is_finite() {
        return Err(Error::NumericalBlowup { time: dt });
    }
    let bound = geom.admissible_bound();
    if sup >= bound {
        return Err(Error::InterfaceCollision {
            sup_norm: sup,
            bound,
            time: Some(dt),
        });
    }
    Ok(next)
}

/// Controls for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Final time to integrate to.
    pub t_end: f64,
    /// Initial (and maximal) step size.
    pub dt: f64,
    /// Smallest step size the controller may fall back to before declaring
    /// a collision or blowup.
    pub dt_min: f64,
    /// Hard cap on accepted steps.
    pub max_steps: usize,
    /// Record every `snapshot_stride`-th accepted state (the initial state
    /// and the final state are always recorded).
    pub snapshot_stride: usize,
    /// Fraction of the geometric admissibility bound treated as collision:
    /// the run stops once an interface sup-norm cannot be kept below
    /// `safety_fraction * bound`.
    pub safety_fraction: f64,
    /// Velocity-jump guard: a step is halved while
    /// `dt * sup|Φ| > max_step_fraction * bound`, so no single update moves
    /// an interface by more than this fraction of the admissible range.
    pub max_step_fraction: f64,
    /// Elliptic solver configuration used for every velocity evaluation.
    pub solver: SolverOptions,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            t_end: 0.1,
            dt: 1e-3,
            dt_min: 1e-9,
            max_steps: 100_000,
            snapshot_stride: 1,
            safety_fraction: 0.9,
            max_step_fraction: 0.05,
            solver: SolverOptions::default(),
        }
    }
}

/// Why an evolution run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// `t_end` was reached.
    Completed,
    /// The interfaces left the admissible set (touching interfaces or a
    /// degenerate radial map) and no permissible step size remained.
    Collision {
        /// Time at which the run stopped.
        time: f64,
        /// Offending interface sup-norm.
        sup_norm: f64,
        /// Geometric admissibility bound `(R₁-R₂)/(R₁+R₂)`.
        bound: f64,
    },
    /// The state or velocity stopped being finite.
    Blowup {
        /// Time at which the run stopped.
        time: f64,
    },
}

/// One recorded state of the evolution.
#[derive(Debug, Clone)]
pub struct Snapshot {
    /// Time of this state.
    pub time: f64,
    /// Step size in effect when it was recorded.
    pub dt: f64,
    /// Interface pair at this time.
    pub pair: InterfacePair,
    /// Sup-norm of the most recently evaluated velocity pair.
    pub velocity_sup: f64,
}

/// Result of an evolution run: the recorded snapshots (always including
/// the initial and final states), the final state, and why it stopped.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Recorded states, in time order.
    pub snapshots: Vec<Snapshot>,
    /// Why the run ended.
    pub termination: Termination,
    /// State at `final_time`.
    pub final_pair: InterfacePair,
    /// Time actually reached.
    pub final_time: f64,
    /// Number of accepted steps.
    pub steps: usize,
}

/// Integrate the interface pair from `t = 0` to `opts.t_end`.
///
/// Collision and blowup are reported through [`Trajectory::termination`]
/// together with the partial trajectory, not as errors; errors are
/// reserved for invalid configuration and genuine solver failures.
pub fn evolve(
    geom: Geometry,
    params: &ModelParams,
    initial: &InterfacePair,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(opts.t_end.is_finite() && opts.t_end > 0.0) {
        return Err(Error::Config(format!(
            "final time must be positive and finite, got {}",
            opts.t_end
        )));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::Config(format!(
            "step size must be positive and finite, got {}",
            opts.dt
        )));
    }
    if opts.snapshot_stride == 0 {
        return Err(Error::Config("snapshot stride must be at least 1".into()));
    }
    if !(0.0 < opts.safety_fraction && opts.safety_fraction < 1.0) {
        return Err(Error::Config(format!(
            "safety fraction must lie in (0, 1), got {}",
            opts.safety_fraction
        )));
    }
    if initial.max_mode() > opts.solver.modes {
        return Err(Error::Contract(format!(
            "initial pair degree {} exceeds solver truncation {}",
            initial.max_mode(),
            opts.solver.modes
        )));
    }

    let bound = geom.admissible_bound();
    let guard_sup = opts.safety_fraction * bound;
    let dt_min = opts.dt_min.min(opts.dt).max(f64::MIN_POSITIVE);
    let mut pair = initial.with_max_mode(opts.solver.modes);
    let mut t = 0.0_f64;
    let mut dt = opts.dt;
    let mut steps = 0_usize;
    let mut last_velocity = f64::NAN;
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut termination = Termination::Completed;

    if pair.sup_norm() >= guard_sup {
        // The seed already sits in the guard band: report a zero-length
        // trajectory with a collision verdict rather than an error, so
        // callers can treat "starts collided" and "ran into a collision"
        // uniformly.
        let snapshot = Snapshot {
            time: 0.0,
            dt,
            pair: pair.clone(),
            velocity_sup: f64::NAN,
        };
        return Ok(Trajectory {
            snapshots: vec![snapshot],
            termination: Termination::Collision {
                time: 0.0,
                sup_norm: pair.sup_norm(),
                bound,
            },
            final_pair: pair,
            final_time: 0.0,
            steps: 0,
        });
    }

    'run: while t < opts.t_end * (1.0 - 1e-12) {
        if steps >= opts.max_steps {
            return Err(Error::Config(format!(
                "step budget of {} exhausted at t = {t} before reaching t_end = {}",
                opts.max_steps, opts.t_end
            )));
        }
        let (phi1, phi2) = match interface_velocity(geom, params, &pair, opts.solver) {
            Ok(phi) => phi,
            Err(Error::InterfaceCollision { sup_norm, bound, .. }) => {
                termination = Termination::Collision {
                    time: t,
                    sup_norm,
                    bound,
                };
                break 'run;
            }
            Err(Error::NumericalBlowup { .. }) => {
                termination = Termination::Blowup { time: t };
                break 'run;
            }
            Err(e) => return Err(e),
        };
        let velocity_sup = phi1.sup_norm().max(phi2.sup_norm());
        last_velocity = velocity_sup;
        if !velocity_sup.is_finite() {
            termination = Termination::Blowup { time: t };
            break 'run;
        }
        if steps % opts.snapshot_stride == 0 {
            snapshots.push(Snapshot {
                time: t,
                dt,
                pair: pair.clone(),
                velocity_sup,
            });
        }

        let mut dt_step = dt.min(opts.t_end - t);
        while dt_step > dt_min && dt_step * velocity_sup > opts.max_step_fraction * bound {
            dt_step *= 0.5;
        }
        loop {
            let candidate = imex_step(geom, &pair, &phi1, &phi2, dt_step);
            let sup = candidate.sup_norm();
            if sup.is_finite() && sup < guard_sup {
                pair = candidate;
                t += dt_step;
                steps += 1;
                dt = (dt_step * 1.2).min(opts.dt);
                break;
            }
            if dt_step <= dt_min {
                termination = if sup.is_finite() {
                    Termination::Collision {
                        time: t,
                        sup_norm: sup,
                        bound,
                    }
                } else {
                    Termination::Blowup { time: t }
                };
                break 'run;
            }
            dt_step *= 0.5;
        }
    }

    let record_final = snapshots
        .last()
        .map(|s| (s.time - t).abs() > 1e-15 * t.max(1.0))
        .unwrap_or(true);
    if record_final {
        snapshots.push(Snapshot {
            time: t,
            dt,
            pair: pair.clone(),
            velocity_sup: last_velocity,
        });
    }

    Ok(Trajectory {
        snapshots,
        termination,
        final_pair: pair,
        final_time: t,
        steps,
    })
}
