//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the numerical kernels and the CLI layer.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a special function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// A special-function value overflowed the representable range.
    #[error("range error in {func}: overflow at order {order}, argument {x}")]
    Range { func: &'static str, order: u32, x: f64 },

    /// Annulus radii do not satisfy 0 < R2 < R1.
    #[error("degenerate annulus: r1 = {r1}, r2 = {r2} (need 0 < r2 < r1)")]
    DegenerateAnnulus { r1: f64, r2: f64 },

    /// An interface perturbation exceeds the admissible amplitude bound,
    /// so the two interfaces may touch and the domain map degenerates.
    #[error("interface collision: sup-norm {sup_norm} exceeds admissible bound {bound}{}",
            time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    InterfaceCollision {
        sup_norm: f64,
        bound: f64,
        time: Option<f64>,
    },

    /// The nutrient threshold sits in the critical band where the
    /// compatibility system for the stationary annulus degenerates: the
    /// proliferation coefficient diverges as psi0 approaches the critical
    /// value, so no stationary pair (A, G) exists there.
    #[error("psi0 = {psi0} is within the critical band around psi0_c = {psi0_critical}: the stationary system has no solution")]
    CriticalPsi0 { psi0: f64, psi0_critical: f64 },

    /// The iterative linear solver did not reach the requested tolerance.
    #[error("linear solve failed: relative residual {residual:.3e} after {iterations} iterations (tol {tol:.1e})")]
    SolveFailure {
        residual: f64,
        iterations: usize,
        tol: f64,
    },

    /// Mismatched discretizations passed to an operation (e.g. boundary
    /// data with a different mode count than the solver grid).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A time step produced non-finite interface coefficients.
    #[error("numerical blow-up at t = {time}")]
    NumericalBlowup { time: f64 },

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while reading config or writing outputs.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
