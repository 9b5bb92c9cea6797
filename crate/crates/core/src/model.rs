//! Problem parameters, radial weight evaluation and the exponent algebra.
//!
//! The density weight ρ is a radial function pinned between two power laws,
//!
//!   k (1 + y)^{-γ}  ≤  ρ(y)  ≤  K y^{-γ},   γ ∈ [0, 2),
//!
//! which keeps ρ locally integrable against the surface measure σ_N y^{N-1}
//! even when it is singular at the origin. Everything downstream (meshes,
//! norms, the solver) consumes weights only through exact per-cell masses
//! ∫ ρ σ_N y^{N-1} dy, never through pointwise values at y = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of log-spaced radii used to validate the two-sided weight bound.
const SANDWICH_PROBES: usize = 64;
const SANDWICH_LO: f64 = 1e-6;
const SANDWICH_HI: f64 = 1e6;

/// Γ(n/2) for integer n ≥ 1, by the half-integer recurrence.
fn gamma_half(n: u32) -> f64 {
    assert!(n >= 1);
    let mut x = if n.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut k = if n.is_multiple_of(2) { 2 } else { 1 };
    while k + 2 <= n {
        x *= k as f64 / 2.0;
        k += 2;
    }
    x
}

/// Surface area of the unit sphere in dimension `dim`: σ_N = 2 π^{N/2} / Γ(N/2).
pub fn unit_sphere_area(dim: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

/// How the radial density is realized.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum WeightKind {
    /// ρ(y) = y^{-γ}, singular at the origin for γ > 0.
    PurePower,
    /// ρ(y) = (ε² + y²)^{-γ/2}; ε = 0 reduces to the pure power.
    RegularizedPower { epsilon: f64 },
    /// Tabulated radial samples, piecewise-linear in between and clamped
    /// to the end values outside the table.
    UserRadial { radii: Vec<f64>, values: Vec<f64> },
}

/// A radial weight together with its sandwich constants.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WeightSpec {
    pub gamma: f64,
    /// Lower sandwich constant k in k (1+y)^{-γ} ≤ ρ(y).
    pub k_lower: f64,
    /// Upper sandwich constant K in ρ(y) ≤ K y^{-γ}.
    pub k_upper: f64,
    pub kind: WeightKind,
}

impl WeightSpec {
    /// ρ(y) = y^{-γ}; both sandwich bounds hold with k = K = 1.
    pub fn pure_power(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0, 1.0, WeightKind::PurePower)
    }

    /// ρ(y) = (ε² + y²)^{-γ/2} with ε ∈ [0, 1]; k = K = 1 still works since
    /// (ε² + y²)^{1/2} ≤ 1 + y for ε ≤ 1.
    pub fn regularized_power(gamma: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid(format!(
                "regularization epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        Self::new(gamma, 1.0, 1.0, WeightKind::RegularizedPower { epsilon })
    }

    /// Tabulated radial weight. The caller supplies the sandwich constants,
    /// which are validated on the probe set.
    pub fn user_radial(gamma: f64, radii: Vec<f64>, values: Vec<f64>, k_lower: f64, k_upper: f64) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::invalid("user weight needs at least two (radius, value) samples"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
            return Err(Error::invalid("user weight radii must be nonnegative and strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::invalid("user weight values must be finite and positive"));
        }
        Self::new(gamma, k_lower, k_upper, WeightKind::UserRadial { radii, values })
    }

    pub fn new(gamma: f64, k_lower: f64, k_upper: f64, kind: WeightKind) -> Result<Self> {
        if !(0.0..2.0).contains(&gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 2), got {gamma}")));
        }
        if !(k_lower > 0.0 && k_lower <= k_upper && k_upper.is_finite()) {
            return Err(Error::invalid(format!(
                "sandwich constants need 0 < k ≤ K, got k = {k_lower}, K = {k_upper}"
            )));
        }
        let spec = WeightSpec { gamma, k_lower, k_upper, kind };
        spec.assert_sandwich()?;
        Ok(spec)
    }

    /// True when the weight is genuinely singular at y = 0.
    pub fn singular_at_origin(&self) -> bool {
        self.gamma > 0.0
            && match &self.kind {
                WeightKind::PurePower => true,
                WeightKind::RegularizedPower { epsilon } => *epsilon == 0.0,
                WeightKind::UserRadial { .. } => false,
            }
    }

    /// Pointwise density at radius y > 0.
    pub fn eval(&self, y: f64) -> Result<f64> {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::domain(format!("weight evaluated at invalid radius {y}")));
        }
        if y == 0.0 && self.singular_at_origin() {
            return Err(Error::domain("pure-power weight is singular at y = 0"));
        }
        Ok(self.eval_unchecked(y))
    }

    fn eval_unchecked(&self, y: f64) -> f64 {
        match &self.kind {
            WeightKind::PurePower => y.powf(-self.gamma),
            WeightKind::RegularizedPower { epsilon } => {
                (epsilon * epsilon + y * y).powf(-self.gamma / 2.0)
            }
            WeightKind::UserRadial { radii, values } => {
                if y <= radii[0] {
                    return values[0];
                }
                if y >= *radii.last().unwrap() {
                    return *values.last().unwrap();
                }
                let j = radii.partition_point(|r| *r <= y) - 1;
                let t = (y - radii[j]) / (radii[j + 1] - radii[j]);
                values[j] + t * (values[j + 1] - values[j])
            }
        }
    }

    /// Re-checks k (1+y)^{-γ} ≤ ρ(y) ≤ K y^{-γ} on the log-spaced probe set.
    pub fn assert_sandwich(&self) -> Result<()> {
        let (lo, hi) = (SANDWICH_LO.ln(), SANDWICH_HI.ln());
        for i in 0..SANDWICH_PROBES {
            let y = (lo + (hi - lo) * i as f64 / (SANDWICH_PROBES - 1) as f64).exp();
            let rho = self.eval_unchecked(y);
            let lower = self.k_lower * (1.0 + y).powf(-self.gamma);
            let upper = self.k_upper * y.powf(-self.gamma);
            // Allow a pure round-off margin so that k = K = 1 passes exactly.
            let slack = 1.0 + 1e-12;
            if rho * slack < lower || rho > upper * slack {
                return Err(Error::invalid(format!(
                    "weight violates sandwich bound at y = {y:e}: {lower:e} ≤ {rho:e} ≤ {upper:e} fails"
                )));
            }
        }
        Ok(())
    }
}

/// Problem data for ρ uₜ = Δ(uᵐ) in radial coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Spatial dimension N ≥ 3.
    pub dim: u32,
    /// Nonlinearity exponent m > 1.
    pub m: f64,
    pub weight: WeightSpec,
    /// Optional blow-up horizon used by the elliptic profile construction.
    pub t_factor: Option<f64>,
}

impl ProblemParams {
    pub fn new(dim: u32, m: f64, weight: WeightSpec) -> Result<Self> {
        if dim < 3 {
            return Err(Error::invalid(format!("dimension must be ≥ 3, got {dim}")));
        }
        if !(m > 1.0 && m.is_finite()) {
            return Err(Error::invalid(format!("nonlinearity exponent must satisfy m > 1, got {m}")));
        }
        Ok(ProblemParams { dim, m, weight, t_factor: None })
    }

    pub fn with_horizon(mut self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("horizon must be positive, got {t}")));
        }
        self.t_factor = Some(t);
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.weight.gamma
    }

    pub fn exponents(&self) -> Exponents {
        derive_exponents(self)
    }
}

/// The recurring exponents of the theory.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Exponents {
    /// λ₁ = (N-γ) / ((N-γ)(m-1) + 2-γ), the smoothing rate t^{-λ₁}.
    pub lambda1: f64,
    /// θ = (2-γ) / (N-γ).
    pub theta: f64,
    /// κ = λ₁ (m-1), the blow-up rate of the explicit family.
    pub kappa: f64,
    /// (2-γ)/(m-1): the critical spatial growth rate separating local
    /// existence from immediate nonexistence.
    pub critical_rate: f64,
}

/// Closed-form exponents; they satisfy θλ₁ + λ₁(m-1) = 1 identically.
pub fn derive_exponents(params: &ProblemParams) -> Exponents {
    let n = params.dim as f64;
    let g = params.weight.gamma;
    let m = params.m;
    let lambda1 = (n - g) / ((n - g) * (m - 1.0) + 2.0 - g);
    let theta = (2.0 - g) / (n - g);
    Exponents {
        lambda1,
        theta,
        kappa: lambda1 * (m - 1.0),
        critical_rate: (2.0 - g) / (m - 1.0),
    }
}

/// Mass ∫_{y_a}^{y_b} ρ(y) σ_N y^{N-1} dy of a radial cell.
///
/// Pure powers integrate in closed form, σ_N (y_b^{N-γ} - y_a^{N-γ})/(N-γ),
/// which stays finite down to y_a = 0 for γ < 2. Tabulated weights integrate
/// their linear pieces exactly; the regularized power falls back to adaptive
/// quadrature at relative tolerance 1e-10.
pub fn weight_cell_mass(spec: &WeightSpec, dim: u32, y_a: f64, y_b: f64) -> Result<f64> {
    if !(y_a.is_finite() && y_b.is_finite()) || y_a < 0.0 || y_b < y_a {
        return Err(Error::domain(format!("invalid cell [{y_a}, {y_b}]")));
    }
    if y_a == y_b {
        return Ok(0.0);
    }
    let sigma = unit_sphere_area(dim);
    let n = dim as f64;
    match &spec.kind {
        WeightKind::PurePower => Ok(pure_power_mass(sigma, n, spec.gamma, y_a, y_b)),
        WeightKind::RegularizedPower { epsilon } => {
            if *epsilon == 0.0 {
                return Ok(pure_power_mass(sigma, n, spec.gamma, y_a, y_b));
            }
            let g = spec.gamma;
            let eps2 = epsilon * epsilon;
            let f = |y: f64| sigma * y.powf(n - 1.0) * (eps2 + y * y).powf(-g / 2.0);
            adaptive_simpson(&f, y_a, y_b, 1e-10).ok_or_else(|| {
                Error::numeric(format!(
                    "cell-mass quadrature did not converge on [{y_a}, {y_b}] (gamma = {g}, eps = {epsilon})"
                ))
            })
        }
        WeightKind::UserRadial { radii, values } => {
            Ok(user_radial_mass(sigma, dim, radii, values, y_a, y_b))
        }
    }
}

fn pure_power_mass(sigma: f64, n: f64, gamma: f64, y_a: f64, y_b: f64) -> f64 {
    let p = n - gamma;
    sigma * (y_b.powf(p) - y_a.powf(p)) / p
}

/// ∫ σ y^{N-1} (α y + β) dy over [a, b], the exact moment of one linear piece.
fn linear_piece_mass(sigma: f64, dim: u32, alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    let n = dim as f64;
    let i1 = (b.powi(dim as i32 + 1) - a.powi(dim as i32 + 1)) / (n + 1.0);
    let i0 = (b.powi(dim as i32) - a.powi(dim as i32)) / n;
    sigma * (alpha * i1 + beta * i0)
}

fn user_radial_mass(sigma: f64, dim: u32, radii: &[f64], values: &[f64], y_a: f64, y_b: f64) -> f64 {
    let mut total = 0.0;
    // Clamped constant extension below the first and above the last sample.
    let first = radii[0];
    let last = *radii.last().unwrap();
    if y_a < first {
        let hi = y_b.min(first);
        total += linear_piece_mass(sigma, dim, 0.0, values[0], y_a, hi);
    }
    if y_b > last {
        let lo = y_a.max(last);
        total += linear_piece_mass(sigma, dim, 0.0, *values.last().unwrap(), lo, y_b);
    }
    for j in 0..radii.len() - 1 {
        let lo = y_a.max(radii[j]);
        let hi = y_b.min(radii[j + 1]);
        if lo >= hi {
            continue;
        }
        let slope = (values[j + 1] - values[j]) / (radii[j + 1] - radii[j]);
        let intercept = values[j] - slope * radii[j];
        total += linear_piece_mass(sigma, dim, slope, intercept, lo, hi);
    }
    total
}

/// Adaptive Simpson quadrature; returns None if the recursion depth is
/// exhausted before the tolerance is met.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Option<f64> {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let c = 0.5 * (a + b);
        let fc = f(c);
        ((b - a) / 6.0 * (fa + 4.0 * fc + fb), c, fc)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        c: f64,
        fc: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Option<f64> {
        let (left, cl, fcl) = simpson(f, a, fa, c, fc);
        let (right, cr, fcr) = simpson(f, c, fc, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Some(left + right + delta / 15.0);
        }
        if depth == 0 {
            return None;
        }
        let l = recurse(f, a, fa, c, fc, cl, fcl, left, tol / 2.0, depth - 1)?;
        let r = recurse(f, c, fc, b, fb, cr, fcr, right, tol / 2.0, depth - 1)?;
        Some(l + r)
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, c, fc) = simpson(f, a, fa, b, fb);
    let tol = rel_tol * whole.abs().max(1e-300);
    recurse(f, a, fa, b, fb, c, fc, whole, tol, 48)
}

/// Guaranteed existence time C₁ / ‖·‖^{m-1}; infinite for tail-vanishing data.
pub fn existence_time(norm_1r: f64, m: f64, c1: f64) -> f64 {
    assert!(norm_1r >= 0.0 && c1 > 0.0 && m > 1.0);
    if norm_1r == 0.0 {
        f64::INFINITY
    } else {
        c1 / norm_1r.powf(m - 1.0)
    }
}
