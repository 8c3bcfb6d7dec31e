//! Radially symmetric stationary annuli.
//!
//! For radii `R_1 > R_2 > 0` (outer, inner) and a nutrient consumption
//! threshold `psi0 > 0`, a radially symmetric configuration is stationary
//! when the pressure and nutrient profiles
//!
//! ```text
//! p(r)   = (A G / 4) r^2 + a ln r + b,
//! psi(r) = c_I I_0(r) + c_K K_0(r),
//! ```
//!
//! with boundary values `p(R_1) = 1/R_1`, `p(R_2) = -1/R_2 - psi0`,
//! `psi(R_1) = G`, `psi(R_2) = G - psi0`, have matching radial derivatives
//! at both interfaces (zero normal velocity). Eliminating the profile
//! coefficients leaves a 2x2 linear system
//!
//! ```text
//! a_i G + b_i (A G) = c_i,   i = 1, 2,
//! ```
//!
//! whose coefficients involve only the radii, `psi0`, and modified Bessel
//! values at the radii. The system is uniquely solvable for every
//! `psi0 > 0` except one critical value `psi0_c(R_1, R_2)` at which the
//! proliferation coefficient `A` diverges; [`psi0_critical`] evaluates it
//! in closed form and [`solve_stationary`] refuses a narrow relative band
//! around it.
//!
//! [`uniqueness_certificate`] numerically certifies the monotonicity fact
//! behind unique solvability: `x -> x (K_0(R_1) I_1(x) + I_0(R_1) K_1(x))`
//! strictly decreases on `(0, R_1]`.

use crate::error::{Error, Result};
use crate::specfun::{bessel_i, bessel_k};

/// Relative half-width of the rejected band around the critical threshold.
pub const CRITICAL_BAND: f64 = 1e-9;

/// A validated annulus: outer radius `r1`, inner radius `r2`,
/// `0 < r2 < r1 < inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    r1: f64,
    r2: f64,
}

impl Geometry {
    /// Validate and build an annulus geometry.
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1.is_finite() && r2.is_finite() && r2 > 0.0 && r1 > r2) {
            return Err(Error::DegenerateAnnulus { r1, r2 });
        }
        Ok(Self { r1, r2 })
    }

    /// Outer radius.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// Inner radius.
    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// `ln(R_1 / R_2)` (positive).
    pub fn log_ratio(&self) -> f64 {
        (self.r1 / self.r2).ln()
    }

    /// Amplitude bound for admissible interface perturbations:
    /// `(R_1 - R_2) / (R_1 + R_2)`. Perturbation pairs with sup-norm
    /// strictly below this keep the mapped interfaces disjoint and the
    /// domain diffeomorphism orientation-preserving.
    pub fn admissible_bound(&self) -> f64 {
        (self.r1 - self.r2) / (self.r1 + self.r2)
    }
}

/// Radial pressure profile `p(r) = (ag/4) r^2 + a ln r + b`.
#[derive(Debug, Clone, Copy)]
pub struct PressureProfile {
    /// Product `A G` (the source strength of the pressure equation).
    pub ag: f64,
    /// Coefficient of `ln r`.
    pub log_coeff: f64,
    /// Additive constant.
    pub offset: f64,
}

impl PressureProfile {
    /// Build the profile matching `p(R_1) = 1/R_1`,
    /// `p(R_2) = -1/R_2 - psi0`.
    pub fn new(geom: Geometry, ag: f64, psi0: f64) -> Self {
        let (r1, r2) = (geom.r1, geom.r2);
        let log_coeff =
            (1.0 / r1 + 1.0 / r2 + ag * (r2 * r2 - r1 * r1) / 4.0 + psi0) / geom.log_ratio();
        let offset = 1.0 / r1 - ag * r1 * r1 / 4.0 - log_coeff * r1.ln();
        Self {
            ag,
            log_coeff,
            offset,
        }
    }

    /// `p(r)`.
    pub fn eval(&self, r: f64) -> f64 {
        0.25 * self.ag * r * r + self.log_coeff * r.ln() + self.offset
    }

    /// `p'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        0.5 * self.ag * r + self.log_coeff / r
    }
}

/// Radial nutrient profile `psi(r) = c_i I_0(r) + c_k K_0(r)`.
#[derive(Debug, Clone, Copy)]
pub struct NutrientProfile {
    /// Coefficient of `I_0`.
    pub c_i: f64,
    /// Coefficient of `K_0`.
    pub c_k: f64,
}

impl NutrientProfile {
    /// Build the profile matching `psi(R_1) = g`, `psi(R_2) = g - psi0`.
    pub fn new(geom: Geometry, g: f64, psi0: f64) -> Result<Self> {
        let (r1, r2) = (geom.r1, geom.r2);
        let (i0_r1, i0_r2) = (bessel_i(0, r1)?, bessel_i(0, r2)?);
        let (k0_r1, k0_r2) = (bessel_k(0, r1)?, bessel_k(0, r2)?);
        let det = i0_r1 * k0_r2 - i0_r2 * k0_r1;
        let c_i = (g * k0_r2 + (psi0 - g) * k0_r1) / det;
        let c_k = (-g * i0_r2 - (psi0 - g) * i0_r1) / det;
        Ok(Self { c_i, c_k })
    }

    /// `psi(r)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.c_i * bessel_i(0, r)? + self.c_k * bessel_k(0, r)?)
    }

    /// `psi'(r) = c_i I_1(r) - c_k K_1(r)`.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        Ok(self.c_i * bessel_i(1, r)? - self.c_k * bessel_k(1, r)?)
    }
}

/// Coefficients of the 2x2 compatibility system `a_i G + b_i (A G) = c_i`.
#[derive(Debug, Clone, Copy)]
pub struct SystemCoefficients {
    /// `a_i` for `i = 1, 2` (outer, inner).
    pub a: [f64; 2],
    /// `b_i` (independent of `psi0`).
    pub b: [f64; 2],
    /// `c_i` (affine in `psi0`).
    pub c: [f64; 2],
}

/// Assemble the compatibility system at the two radii.
pub fn system_coefficients(geom: Geometry, psi0: f64) -> Result<SystemCoefficients> {
    let (r1, r2) = (geom.r1, geom.r2);
    let el = geom.log_ratio();
    let (i0_r1, i0_r2) = (bessel_i(0, r1)?, bessel_i(0, r2)?);
    let (k0_r1, k0_r2) = (bessel_k(0, r1)?, bessel_k(0, r2)?);
    let det = i0_r1 * k0_r2 - i0_r2 * k0_r1;

    let mut a = [0.0; 2];
    let mut b = [0.0; 2];
    let mut c = [0.0; 2];
    for (slot, ri) in [r1, r2].into_iter().enumerate() {
        let i1_ri = bessel_i(1, ri)?;
        let k1_ri = bessel_k(1, ri)?;
        a[slot] = ((k0_r2 - k0_r1) * i1_ri - (i0_r1 - i0_r2) * k1_ri) / det;
        b[slot] = (r1 * r1 - r2 * r2) / (4.0 * el * ri) - ri / 2.0;
        c[slot] = -psi0 * (k0_r1 * i1_ri + i0_r1 * k1_ri) / det
            + (1.0 / r1 + 1.0 / r2 + psi0) / (el * ri);
    }
    Ok(SystemCoefficients { a, b, c })
}

/// The critical nutrient threshold `psi0_c(R_1, R_2) > 0` at which the
/// compatibility system degenerates (`b_1 c_2 - b_2 c_1 = 0`).
pub fn psi0_critical(geom: Geometry) -> Result<f64> {
    Ok(psi0_critical_parts(geom)?.0)
}

/// `(psi0_c, numerator, denominator)`; both parts are strictly negative,
/// which is what makes the ratio positive. Exposed for certification tests.
pub(crate) fn psi0_critical_parts(geom: Geometry) -> Result<(f64, f64, f64)> {
    let (r1, r2) = (geom.r1, geom.r2);
    let el = geom.log_ratio();
    let (i0_r1, i0_r2) = (bessel_i(0, r1)?, bessel_i(0, r2)?);
    let (k0_r1, k0_r2) = (bessel_k(0, r1)?, bessel_k(0, r2)?);
    let det = i0_r1 * k0_r2 - i0_r2 * k0_r1;

    let b1 = (r1 * r1 - r2 * r2) / (4.0 * el * r1) - r1 / 2.0;
    let b2 = (r1 * r1 - r2 * r2) / (4.0 * el * r2) - r2 / 2.0;
    let e1 = (k0_r1 * bessel_i(1, r1)? + i0_r1 * bessel_k(1, r1)?) / det;
    let e2 = (k0_r1 * bessel_i(1, r2)? + i0_r1 * bessel_k(1, r2)?) / det;

    // b1 / R2 - b2 / R1 collapses to (R2^2 - R1^2) / (2 R1 R2) exactly;
    // keep the explicit form so the cancellation is visible to tests.
    let num = (1.0 / r1 + 1.0 / r2) / el * (b1 / r2 - b2 / r1);
    let den = (b1 * e2 - b2 * e1) + (r1 * r1 - r2 * r2) / (2.0 * r1 * r2 * el);
    Ok((num / den, num, den))
}

/// The model parameter triple entering the interface velocity: the
/// proliferation coefficient `A`, the outer nutrient level `G`, and the
/// consumption threshold `psi0`. Any triple can drive the evolution;
/// [`solve_stationary`] produces the unique triple (for given `psi0`) that
/// makes the round annulus stationary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Proliferation coefficient `A`.
    pub a: f64,
    /// Outer nutrient boundary level `G`.
    pub g: f64,
    /// Nutrient consumption threshold `psi0`.
    pub psi0: f64,
}

impl ModelParams {
    /// Product `A G`.
    pub fn ag(&self) -> f64 {
        self.a * self.g
    }
}

/// A stationary annulus: the unique compatible pair `(A, G)` together with
/// the resulting radial profiles and the achieved stationarity defects.
#[derive(Debug, Clone, Copy)]
pub struct StationaryState {
    /// Annulus geometry.
    pub geometry: Geometry,
    /// Nutrient consumption threshold.
    pub psi0: f64,
    /// Proliferation coefficient `A`.
    pub a: f64,
    /// Nutrient boundary level `G` (`psi = G` on the outer interface).
    pub g: f64,
    /// Radial pressure profile.
    pub pressure: PressureProfile,
    /// Radial nutrient profile.
    pub nutrient: NutrientProfile,
    /// Scaled stationarity defects at `(R_1, R_2)`: the residual of
    /// `psi'(R_i) = p'(R_i)` divided by the largest magnitude among its
    /// terms, so the value is a relative measure independent of how large
    /// `G` happens to be.
    pub defects: [f64; 2],
}

impl StationaryState {
    /// Product `A G`.
    pub fn ag(&self) -> f64 {
        self.a * self.g
    }

    /// The `(A, G, psi0)` triple of this state, for driving the evolution.
    pub fn params(&self) -> ModelParams {
        ModelParams {
            a: self.a,
            g: self.g,
            psi0: self.psi0,
        }
    }
}

/// Solve the compatibility system for the unique stationary pair `(A, G)`.
///
/// Fails with [`Error::CriticalPsi0`] when `psi0` lies within a relative
/// band [`CRITICAL_BAND`] of the critical threshold, where `A` diverges.
pub fn solve_stationary(geom: Geometry, psi0: f64) -> Result<StationaryState> {
    if !(psi0.is_finite() && psi0 > 0.0) {
        return Err(Error::Domain {
            func: "solve_stationary",
            msg: format!("psi0 must be positive and finite (got {psi0})"),
        });
    }
    let psi0_c = psi0_critical(geom)?;
    if (psi0 - psi0_c).abs() < CRITICAL_BAND * psi0_c {
        return Err(Error::CriticalPsi0 {
            psi0,
            psi0_critical: psi0_c,
        });
    }

    let SystemCoefficients { a, b, c } = system_coefficients(geom, psi0)?;
    let det_ab = a[0] * b[1] - a[1] * b[0];
    let det_cb = c[0] * b[1] - c[1] * b[0];
    let g = det_cb / det_ab;
    let big_a = (a[0] * c[1] - a[1] * c[0]) / det_cb;
    let ag = big_a * g;

    let pressure = PressureProfile::new(geom, ag, psi0);
    let nutrient = NutrientProfile::new(geom, g, psi0)?;
    let defects = stationarity_defects(geom, &pressure, &nutrient)?;

    Ok(StationaryState {
        geometry: geom,
        psi0,
        a: big_a,
        g,
        pressure,
        nutrient,
        defects,
    })
}

/// Scaled stationarity defects `|psi'(R_i) - p'(R_i)| / max term` at the
/// two radii for the given profiles.
pub fn stationarity_defects(
    geom: Geometry,
    pressure: &PressureProfile,
    nutrient: &NutrientProfile,
) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (slot, ri) in [geom.r1, geom.r2].into_iter().enumerate() {
        let t1 = nutrient.c_i * bessel_i(1, ri)?;
        let t2 = nutrient.c_k * bessel_k(1, ri)?;
        let t3 = pressure.log_coeff / ri;
        let t4 = 0.5 * pressure.ag * ri;
        let scale = t1.abs().max(t2.abs()).max(t3.abs()).max(t4.abs()).max(1.0);
        out[slot] = ((t1 - t2) - (t3 + t4)).abs() / scale;
    }
    Ok(out)
}

/// Numerical certificate for the monotonicity fact behind uniqueness.
#[derive(Debug, Clone, Copy)]
pub struct UniquenessCertificate {
    /// `g(R_2) = R_2 W(R_2) - R_1 W(R_1)` where
    /// `W(x) = K_0(R_1) I_1(x) + I_0(R_1) K_1(x)`; positive.
    pub inner_gap: f64,
    /// Largest sampled value of `g'(x) = x (I_0(x) K_0(R_1) - I_0(R_1) K_0(x))`
    /// on `(0, R_1)`; strictly negative.
    pub max_slope: f64,
    /// `R_2/R_1 - W(R_1)/W(R_2)`, evaluated in the cancellation-free form
    /// `R_2 g(R_2) / (R_1 (g(R_2) + R_1 W(R_1)))`; positive.
    pub ratio_gap: f64,
}

impl UniquenessCertificate {
    /// True when every inequality in the certificate holds strictly.
    pub fn holds(&self) -> bool {
        self.inner_gap > 0.0 && self.max_slope < 0.0 && self.ratio_gap > 0.0
    }
}

/// Certify, on `samples` interior points, that `x W(x)` strictly decreases
/// on `(0, R_1]` — the fact that pins down the sign of the critical
/// threshold's denominator and with it unique solvability off the critical
/// value.
pub fn uniqueness_certificate(geom: Geometry, samples: usize) -> Result<UniquenessCertificate> {
    let (r1, r2) = (geom.r1, geom.r2);
    let w = |x: f64| -> Result<f64> {
        Ok(bessel_k(0, r1)? * bessel_i(1, x)? + bessel_i(0, r1)? * bessel_k(1, x)?)
    };
    let w_r1 = w(r1)?;
    let g_r2 = r2 * w(r2)? - r1 * w_r1;

    let mut max_slope = f64::NEG_INFINITY;
    let n = samples.max(3);
    for j in 1..=n {
        let x = r1 * j as f64 / (n + 1) as f64;
        let slope =
            x * (bessel_i(0, x)? * bessel_k(0, r1)? - bessel_i(0, r1)? * bessel_k(0, x)?);
        max_slope = max_slope.max(slope);
    }

    let ratio_gap = r2 * g_r2 / (r1 * (g_r2 + r1 * w_r1));
    Ok(UniquenessCertificate {
        inner_gap: g_r2,
        max_slope,
        ratio_gap,
    })
}

/// Certificate that no stationary annulus exists when the nutrient supply
/// level `G` vanishes.
///
/// A zero-supply annulus would force the radius ratio `R_2/R_1` to equal a
/// ratio of values of `W(x) = K_0(R_1) I_1(x) + I_0(R_1) K_1(x)`. The
/// auxiliary map `g(x) = x W(x) - R_1 W(R_1)` vanishes at `x = R_1` and has
/// derivative `g'(x) = x (I_0(x) K_0(R_1) - I_0(R_1) K_0(x))`, which is
/// strictly negative on `(0, R_1)` because `I_0` increases and `K_0`
/// decreases. Hence `g` has no second zero and no admissible inner radius
/// exists.
#[derive(Debug, Clone, Copy)]
pub struct ZeroSupplyCertificate {
    /// `g(R_1)`, measured against the exact anchor value
    /// (`x (K_0 I_1 + I_0 K_1)(x) = 1` at equal arguments); ~0.
    pub boundary_value: f64,
    /// Minimum of `-g'(x)` over the interior samples; strictly positive.
    pub min_slope_margin: f64,
    /// Number of interior sample points inspected.
    pub samples: usize,
}

impl ZeroSupplyCertificate {
    /// True when the boundary value vanishes to rounding and every sampled
    /// slope is strictly negative.
    pub fn holds(&self) -> bool {
        self.boundary_value.abs() <= 1e-12 && self.min_slope_margin > 0.0 && self.samples >= 2
    }
}

/// Evaluate the zero-supply nonexistence certificate for an outer radius,
/// sampling the slope at `samples` strictly interior points.
pub fn zero_supply_certificate(r1: f64, samples: usize) -> Result<ZeroSupplyCertificate> {
    if !(r1.is_finite() && r1 > 0.0) {
        return Err(Error::Config(format!(
            "outer radius must be positive and finite, got {r1}"
        )));
    }
    if samples < 2 {
        return Err(Error::Config(format!(
            "need at least 2 interior samples, got {samples}"
        )));
    }
    let k0_r1 = bessel_k(0, r1)?;
    let i0_r1 = bessel_i(0, r1)?;
    // x (K_0(R_1) I_1 + I_0(R_1) K_1)(x) at x = R_1 collapses to the
    // same-argument cross product, which is exactly 1/x scaled by x.
    let boundary_value = r1 * (k0_r1 * bessel_i(1, r1)? + i0_r1 * bessel_k(1, r1)?) - 1.0;
    let mut min_margin = f64::INFINITY;
    for j in 1..=samples {
        let x = r1 * j as f64 / (samples + 1) as f64;
        let slope = x * (bessel_i(0, x)? * k0_r1 - i0_r1 * bessel_k(0, x)?);
        min_margin = min_margin.min(-slope);
    }
    Ok(ZeroSupplyCertificate {
        boundary_value,
        min_slope_margin: min_margin,
        samples,
    })
}

/// Residual of the radius-ratio equation a zero-supply annulus would have
/// to satisfy:
///
/// `R_2/R_1 - (K_0(R_1) I_1(R_1) + I_0(R_1) K_1(R_1)) / (K_0(R_1) I_1(R_2) + I_0(R_1) K_1(R_2))`.
///
/// Accepts `0 < R_2 <= R_1` (equality allowed, unlike [`Geometry`]). The
/// residual vanishes iff `R_2 = R_1` and is strictly positive for
/// `R_2 < R_1` — the quantitative face of [`zero_supply_certificate`].
pub fn radius_ratio_residual(r1: f64, r2: f64) -> Result<f64> {
    if !(r1.is_finite() && r2.is_finite() && r2 > 0.0 && r2 <= r1) {
        return Err(Error::Config(format!(
            "radii must satisfy 0 < R2 <= R1, got R1 = {r1}, R2 = {r2}"
        )));
    }
    let k0_r1 = bessel_k(0, r1)?;
    let i0_r1 = bessel_i(0, r1)?;
    let w = |x: f64| -> Result<f64> {
        Ok(k0_r1 * bessel_i(1, x)? + i0_r1 * bessel_k(1, x)?)
    };
    Ok(r2 / r1 - w(r1)? / w(r2)?)
}
