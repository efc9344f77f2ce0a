//! How much a measuring observer disturbs the carrier state: the limiting
//! fidelity constant λ, its finite-`N` counterpart and the trace-distance
//! bounds that follow from it.

use core::f64::consts::PI;

use num_traits::Float;

use crate::encoding::{b_norm_squared, EncodingSpec};
use crate::likelihood::overlap;
use crate::quadrature::{adaptive, GaussLegendre};
use crate::su2::HaarGrid;
use crate::{Error, Result};

/// Radius of the series patches around removable singularities.
const PATCH: f64 = 1e-3;

/// `sin x / x`, by its degree-8 Taylor polynomial for `|x| < 1e−3`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < PATCH {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() / x
    }
}

/// `sin⁴x / (x² (x² − π²)⁴)`, finite everywhere.
pub fn lambda_integrand(x: f64) -> f64 {
    let a = x.abs();
    if a < PATCH {
        a * a * sinc(a).powi(4) / (a * a - PI * PI).powi(4)
    } else {
        // sin⁴x = sin⁴(x − π) and (x² − π²)⁴ = (x − π)⁴ (x + π)⁴
        sinc(a - PI).powi(4) / (a * a * (a + PI).powi(4))
    }
}

const LAMBDA_PREFACTOR: f64 = 12.0 * PI * PI * PI;

/// `12π³ · 2∫_X^∞ x⁻¹⁰ (1 − π²/X²)⁻⁴ dx`, bounding the truncated tail.
pub fn lambda_tail_bound(x_max: f64) -> f64 {
    2.0 * LAMBDA_PREFACTOR * (1.0 - PI * PI / (x_max * x_max)).powi(-4) / (9.0 * x_max.powi(9))
}

/// Truncated value of λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    /// `12π³ ∫_{−X}^{X}` of the integrand.
    pub value: f64,
    pub cutoff: f64,
    /// Upper bound on the omitted tails.
    pub tail_bound: f64,
    /// Estimated quadrature error.
    pub quadrature_error: f64,
}

/// λ truncated at `±x_max` (`x_max > π`) with absolute quadrature tolerance
/// `abs_tol` on the final value.
pub fn lambda_with_cutoff(x_max: f64, abs_tol: f64) -> Result<LambdaEstimate> {
    if !(x_max > PI) || !x_max.is_finite() {
        return Err(Error::Domain("cutoff must exceed pi"));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive"));
    }
    let scale = 2.0 * LAMBDA_PREFACTOR;
    let rule = GaussLegendre::new(8);
    let initial = (x_max / (0.5 * PI)).ceil() as usize;
    let est = adaptive(
        &rule,
        lambda_integrand,
        0.0,
        x_max,
        initial,
        abs_tol / scale,
        1 << 20,
    )?;
    Ok(LambdaEstimate {
        value: scale * est.value,
        cutoff: x_max,
        tail_bound: lambda_tail_bound(x_max),
        quadrature_error: scale * est.error,
    })
}

/// `λ = 12π³ ∫ sin⁴x / (x² (x² − π²)⁴) dx ≈ 0.236` to relative tolerance
/// `rel_tol ∈ (1e−12, 1e−2)`.
pub fn lambda_constant(rel_tol: f64) -> Result<f64> {
    if !(rel_tol > 1e-12 && rel_tol < 1e-2) {
        return Err(Error::Domain("rel_tol must lie in (1e-12, 1e-2)"));
    }
    // λ > 0.2, so half the budget each for tail and quadrature suffices.
    let budget = 0.5 * rel_tol * 0.2;
    let mut x_max = 4.0 * PI;
    while lambda_tail_bound(x_max) > budget {
        x_max *= 2.0;
    }
    Ok(lambda_with_cutoff(x_max, budget)?.value)
}

/// `[(2/π) ∫ p(θ)² sin²θ dθ / ‖B‖²]^k`.
pub fn finite_j_fidelity(n_spins: usize, k: usize, grid: &HaarGrid) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("observer count must be at least 1"));
    }
    let spec = EncodingSpec::new(n_spins)?;
    grid.check_theta(n_spins, 2 * crate::su2::PANELS_PER_OSCILLATION)?;
    let single = grid.integrate_class(|t| overlap(&spec, t).powi(4)) / b_norm_squared(n_spins)?;
    Ok(single.powi(k as i32))
}

/// Fuchs–van de Graaf bounds `(1 − F, √(1 − F))` with `F = λ^k`.
pub fn trace_distance_bounds(k: usize, lambda: f64) -> Result<(f64, f64)> {
    if k < 1 {
        return Err(Error::Domain("observer count must be at least 1"));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain("lambda must lie in (0, 1)"));
    }
    Ok(bounds_from_fidelity(lambda.powi(k as i32)))
}

fn bounds_from_fidelity(f: f64) -> (f64, f64) {
    let d = (1.0 - f).clamp(0.0, 1.0);
    (d, d.sqrt())
}

/// Finite-`N` fidelity and the bounds it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteJ {
    pub n_spins: usize,
    pub fidelity: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Asymptotic disturbance for `k` observers, optionally with a finite-`N`
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceReport {
    pub lambda: f64,
    pub k: usize,
    /// `λ^k`.
    pub fidelity_limit: f64,
    /// `1 − λ^k`.
    pub lower_bound: f64,
    /// `√(1 − λ^k)`.
    pub upper_bound: f64,
    pub finite_j: Option<FiniteJ>,
}

/// Tolerance used for λ inside reports.
pub const REPORT_LAMBDA_TOL: f64 = 1e-10;

impl DisturbanceReport {
    pub fn new(k: usize, lambda: f64) -> Result<Self> {
        let (lower_bound, upper_bound) = trace_distance_bounds(k, lambda)?;
        Ok(Self {
            lambda,
            k,
            fidelity_limit: lambda.powi(k as i32),
            lower_bound,
            upper_bound,
            finite_j: None,
        })
    }

    /// Attaches `finite_j_fidelity(n_spins, k)`.
    pub fn with_finite_j(mut self, n_spins: usize, grid: &HaarGrid) -> Result<Self> {
        let fidelity = finite_j_fidelity(n_spins, self.k, grid)?;
        let (lower, upper) = bounds_from_fidelity(fidelity);
        self.finite_j = Some(FiniteJ {
            n_spins,
            fidelity,
            lower,
            upper,
        });
        Ok(self)
    }
}

/// The `k = 1` report with the finite-`N` fidelity attached.
pub fn single_observer_disturbance(n_spins: usize, grid: &HaarGrid) -> Result<DisturbanceReport> {
    DisturbanceReport::new(1, lambda_constant(REPORT_LAMBDA_TOL)?)?.with_finite_j(n_spins, grid)
}
