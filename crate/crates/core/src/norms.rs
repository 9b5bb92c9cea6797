//! Weighted growth norms on grid functions.
//!
//! For r ≥ 1 the norm families are suprema over ball radii R ≥ r of
//!
//!   ‖f‖_{p,r} = sup_R R^{-(2-γ)/(m-1) - (N-γ)/p} (∫_{B_R} |f|^p ρ dx)^{1/p},
//!   ‖f‖_{∞,r} = sup_R R^{-(2-γ)/(m-1)} ‖f‖_{L^∞(B_R)},
//!
//! together with the cut-off variants |f|_{p,r} (integrals of φ_R f over all
//! of space), the tail functional ℓ(f) = lim_r ‖f‖_{1,r} whose vanishing
//! characterizes global-in-time data, and the auxiliary L¹(Φ_α) norm with
//! Φ_α = (1+|x|²)^{-α}. On a bounded mesh every supremum is taken over the
//! finite probe set of node and cell-edge radii, and a report flags when it
//! sits at the outer boundary (the true supremum may continue beyond).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{prefix_abs_pow_integrals, GridFunction};
use crate::model::weight_cell_mass;

/// Outcome of one norm evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    /// Probe radius where the supremum was attained.
    pub argmax_r: f64,
    /// True when the supremum sits at the mesh boundary, so the reported
    /// value is only a lower bound for the true supremum.
    pub truncation_note: bool,
}

/// Smooth cut-off profile: φ ≡ 1 on \[0,1\], φ ≡ 0 on \[2,∞), a degree-7
/// smoothstep in between (three vanishing derivatives at both junctions).
/// Fixed once so the |·|_{p,r} norms are reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub fn standard() -> Self {
        CutoffProfile
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 1.0 {
            1.0
        } else if s >= 2.0 {
            0.0
        } else {
            let x = s - 1.0;
            let x3 = x * x * x;
            1.0 - x3 * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x3)
        }
    }
}

/// Φ_α(x) = (1 + |x|²)^{-α}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhiAlpha {
    pub alpha: f64,
}

impl PhiAlpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("Phi_alpha exponent must be positive, got {alpha}")));
        }
        Ok(PhiAlpha { alpha })
    }

    pub fn eval(&self, y: f64) -> f64 {
        (1.0 + y * y).powf(-self.alpha)
    }
}

/// -(2-γ)/(m-1) - (N-γ)/p; pass p = ∞ as `None`.
fn growth_exponent(f: &GridFunction, m: f64, p: Option<f64>) -> f64 {
    let g = f.grid.weight.gamma;
    let n = f.grid.dim as f64;
    let base = -(2.0 - g) / (m - 1.0);
    match p {
        Some(p) => base - (n - g) / p,
        None => base,
    }
}

fn check_r(f: &GridFunction, r: f64) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::invalid(format!("norm base radius must satisfy r ≥ 1, got {r}")));
    }
    if f.grid.r_max() < r {
        return Err(Error::domain(format!(
            "mesh extent {} is smaller than the norm base radius {r}",
            f.grid.r_max()
        )));
    }
    Ok(())
}

/// Probe radii for the supremum: r itself plus every node and cell edge in
/// (r, hi]. For piecewise data this captures the discrete supremum exactly
/// up to the interpolation within a single interval.
enum Probe {
    Radius(f64),
    Node(usize),
    Edge(usize),
}

fn probes(f: &GridFunction, r: f64, hi: f64) -> Vec<Probe> {
    let grid = &f.grid;
    let mut out = vec![Probe::Radius(r)];
    for (j, &y) in grid.nodes.iter().enumerate() {
        if y > r && y <= hi {
            out.push(Probe::Node(j));
        }
    }
    for i in 1..grid.cell_edges.len() - 1 {
        let e = grid.cell_edges[i];
        if e > r && e <= hi {
            out.push(Probe::Edge(i));
        }
    }
    out
}

/// Cumulative ∫_{B_R} |f|^p ρ dx evaluated at structured probes.
struct BallIntegral<'a> {
    f: &'a GridFunction,
    g: Vec<f64>,
    prefix: Vec<f64>,
}

impl<'a> BallIntegral<'a> {
    fn new(f: &'a GridFunction, p: f64) -> Self {
        let g = f.values.iter().map(|v| v.abs().powf(p)).collect();
        let prefix = prefix_abs_pow_integrals(f, p);
        BallIntegral { f, g, prefix }
    }

    fn at(&self, probe: &Probe) -> Result<(f64, f64)> {
        let grid = &self.f.grid;
        match probe {
            Probe::Node(j) => Ok((grid.nodes[*j], self.prefix[*j])),
            Probe::Edge(i) => {
                // Edge i is the midpoint of interval i-1; the trapezoid over
                // the left half pairs g at the node with g at the midpoint.
                let j = i - 1;
                let mid = 0.5 * (self.g[j] + self.g[j + 1]);
                let val = self.prefix[j] + 0.5 * (self.g[j] + mid) * grid.left_half_mass(j);
                Ok((grid.cell_edges[*i], val))
            }
            Probe::Radius(r) => {
                let j = grid.node_before(*r);
                let mut val = self.prefix[j.min(self.prefix.len() - 1)];
                if j < grid.nodes.len() - 1 && *r > grid.nodes[j] {
                    let m = weight_cell_mass(&grid.weight, grid.dim, grid.nodes[j], *r)?;
                    let t = (*r - grid.nodes[j]) / (grid.nodes[j + 1] - grid.nodes[j]);
                    let g_r = self.g[j] + t * (self.g[j + 1] - self.g[j]);
                    val += 0.5 * (self.g[j] + g_r) * m;
                }
                Ok((*r, val))
            }
        }
    }
}

fn sup_over_probes(
    pairs: impl Iterator<Item = (f64, f64)>,
    r_max: f64,
) -> NormReport {
    let mut best = f64::NEG_INFINITY;
    let mut argmax = r_max;
    let mut at_boundary = 0.0;
    for (radius, value) in pairs {
        if value > best {
            best = value;
            argmax = radius;
        }
        if radius == r_max {
            at_boundary = value;
        }
    }
    let value = best.max(0.0);
    NormReport {
        value,
        argmax_r: argmax,
        truncation_note: value > 0.0 && at_boundary >= value * (1.0 - 1e-4),
    }
}

/// ‖f‖_{1,r}: the growth-weighted L¹(ρ) average.
pub fn norm_1r(f: &GridFunction, m: f64, r: f64) -> Result<NormReport> {
    norm_pr(f, m, 1.0, r)
}

/// ‖f‖_{p,r} for p ∈ [1, ∞).
pub fn norm_pr(f: &GridFunction, m: f64, p: f64, r: f64) -> Result<NormReport> {
    check_r(f, r)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("norm order must satisfy 1 ≤ p < ∞, got {p}")));
    }
    let e = growth_exponent(f, m, Some(p));
    let integral = BallIntegral::new(f, p);
    let mut pairs = Vec::new();
    for probe in probes(f, r, f.grid.r_max()) {
        let (radius, val) = integral.at(&probe)?;
        pairs.push((radius, radius.powf(e) * val.powf(1.0 / p)));
    }
    Ok(sup_over_probes(pairs.into_iter(), f.grid.r_max()))
}

/// ‖f‖_{∞,r}: node maxima, no quadrature.
pub fn norm_inf_r(f: &GridFunction, m: f64, r: f64) -> Result<NormReport> {
    check_r(f, r)?;
    let e = growth_exponent(f, m, None);
    let grid = &f.grid;
    // Prefix maxima of |f| over nodes; between nodes the numerator is
    // constant and R^e decreasing, so left endpoints realize the sup.
    let mut pm = Vec::with_capacity(grid.nodes.len());
    let mut acc = 0.0f64;
    for v in &f.values {
        acc = acc.max(v.abs());
        pm.push(acc);
    }
    let mut pairs = vec![(r, r.powf(e) * pm[grid.node_before(r)])];
    for (j, &y) in grid.nodes.iter().enumerate() {
        if y > r {
            pairs.push((y, y.powf(e) * pm[j]));
        }
    }
    Ok(sup_over_probes(pairs.into_iter(), grid.r_max()))
}

/// |f|_{p,r}: cut-off variant integrating φ_R f over the whole mesh.
/// Requires the mesh to reach 2R for every probe, hence R_max ≥ 4r.
pub fn cutoff_norm_pr(
    f: &GridFunction,
    m: f64,
    p: f64,
    r: f64,
    cutoff: &CutoffProfile,
) -> Result<NormReport> {
    check_r(f, r)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("norm order must satisfy 1 ≤ p < ∞, got {p}")));
    }
    let grid = &f.grid;
    if grid.r_max() < 4.0 * r {
        return Err(Error::domain(format!(
            "cut-off norm needs R_max ≥ 4r; mesh reaches {} for r = {r}",
            grid.r_max()
        )));
    }
    let e = growth_exponent(f, m, Some(p));
    let half = grid.r_max() / 2.0;
    let mut pairs = Vec::new();
    for probe in probes(f, r, half) {
        let radius = match probe {
            Probe::Radius(x) => x,
            Probe::Node(j) => grid.nodes[j],
            Probe::Edge(i) => grid.cell_edges[i],
        };
        // Trapezoid of (φ(y/R)|f|)^p; the integrand vanishes beyond 2R.
        let mut integral = 0.0;
        let mut prev = (cutoff.eval(grid.nodes[0] / radius) * f.values[0].abs()).powf(p);
        for j in 0..grid.nodes.len() - 1 {
            let y_next = grid.nodes[j + 1];
            let next = (cutoff.eval(y_next / radius) * f.values[j + 1].abs()).powf(p);
            integral += 0.5 * (prev + next) * grid.interval_weight_mass[j];
            prev = next;
            if y_next >= 2.0 * radius {
                break;
            }
        }
        pairs.push((radius, radius.powf(e) * integral.powf(1.0 / p)));
    }
    Ok(sup_over_probes(pairs.into_iter(), half))
}

/// Tail functional report: the decreasing sequence r ↦ ‖f‖_{1,r}, an Aitken
/// extrapolation of its limit, and the tail-vanishing classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    /// (r, ‖f‖_{1,r}) along the schedule.
    pub values: Vec<(f64, f64)>,
    /// Extrapolated limit; exact for geometrically decaying sequences and
    /// falling back to the last value when the sequence has stalled.
    pub limit_estimate: f64,
    pub last_value: f64,
    /// True when the limit estimate is below `x0_rel_tol · ‖f‖_{1,1}`.
    pub in_x0: bool,
}

/// ℓ(f) = lim_{r→∞} ‖f‖_{1,r}, estimated along an increasing schedule of
/// base radii. A finite mesh cannot certify the limit; the classification
/// tolerance is explicit and the whole sequence is reported.
pub fn ell_tail(f: &GridFunction, m: f64, schedule: &[f64], x0_rel_tol: f64) -> Result<TailReport> {
    if schedule.len() < 3 {
        return Err(Error::invalid(format!(
            "tail schedule needs at least 3 radii, got {}",
            schedule.len()
        )));
    }
    let r_max = f.grid.r_max();
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] < 1.0 {
        return Err(Error::invalid("tail schedule must be increasing with radii ≥ 1"));
    }
    if *schedule.last().unwrap() > r_max / 2.0 {
        return Err(Error::domain(format!(
            "tail schedule must stay within [1, R_max/2] = [1, {}]",
            r_max / 2.0
        )));
    }
    let mut values = Vec::with_capacity(schedule.len());
    for &r in schedule {
        values.push((r, norm_1r(f, m, r)?.value));
    }
    let n = values.len();
    let (a0, a1, a2) = (values[n - 3].1, values[n - 2].1, values[n - 1].1);
    let denom = (a2 - a1) - (a1 - a0);
    let limit_estimate = if denom.abs() <= 1e-13 * a2.abs().max(1e-300) {
        a2
    } else {
        (a2 - (a2 - a1) * (a2 - a1) / denom).max(0.0)
    };
    let reference = norm_1r(f, m, 1.0)?.value.max(1e-300);
    Ok(TailReport {
        values,
        limit_estimate,
        last_value: a2,
        in_x0: limit_estimate <= x0_rel_tol * reference,
    })
}

/// L¹(Φ_α) norm with an explicit truncation-tail bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhiAlphaReport {
    pub value: f64,
    /// Geometric bound on the mass beyond the mesh,
    /// 2α R_max^{-(2α-ω)}/(2α-ω) · ‖f‖_{1,1} with ω the growth exponent;
    /// infinite when 2α ≤ ω.
    pub tail_bound: f64,
}

/// ∫ |f| Φ_α ρ dx over the mesh.
pub fn norm_phi_alpha(f: &GridFunction, m: f64, alpha: f64) -> Result<PhiAlphaReport> {
    let phi = PhiAlpha::new(alpha)?;
    let grid = &f.grid;
    let g: Vec<f64> = f
        .values
        .iter()
        .zip(&grid.nodes)
        .map(|(v, &y)| v.abs() * phi.eval(y))
        .collect();
    let mut value = 0.0;
    for j in 0..g.len() - 1 {
        value += 0.5 * (g[j] + g[j + 1]) * grid.interval_weight_mass[j];
    }
    let gamma = grid.weight.gamma;
    let n = grid.dim as f64;
    let omega = (2.0 - gamma) / (m - 1.0) + n - gamma;
    let tail_bound = if 2.0 * alpha > omega {
        let norm = norm_1r(f, m, 1.0)?.value;
        2.0 * alpha * grid.r_max().powf(omega - 2.0 * alpha) / (2.0 * alpha - omega) * norm
    } else {
        f64::INFINITY
    };
    Ok(PhiAlphaReport { value, tail_bound })
}

/// Both sides of the tail identity for sup-norm data: lim_r ‖f‖_{∞,r}
/// equals the essential limsup of |x|^{-(2-γ)/(m-1)} |f(x)| at infinity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LimsupReport {
    /// ‖f‖_{∞,r} at the largest usable base radius (R_max/2).
    pub norm_tail: f64,
    /// max |f(y)| / y^{(2-γ)/(m-1)} over far-field nodes y ≥ R_max/10.
    pub farfield_ratio: f64,
}

pub fn limsup_rate(f: &GridFunction, m: f64) -> Result<LimsupReport> {
    let grid = &f.grid;
    let r_tail = (grid.r_max() / 2.0).max(1.0);
    let norm_tail = norm_inf_r(f, m, r_tail)?.value;
    let crit = (2.0 - grid.weight.gamma) / (m - 1.0);
    let lo = grid.r_max() / 10.0;
    let farfield_ratio = grid
        .nodes
        .iter()
        .zip(&f.values)
        .filter(|(&y, _)| y >= lo)
        .map(|(&y, &v)| v.abs() / y.powf(crit))
        .fold(0.0f64, f64::max);
    Ok(LimsupReport { norm_tail, farfield_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::model::{ProblemParams, WeightSpec};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    use std::sync::Arc;

    // Workhorse configuration: N = 3, γ = 1, m = 2, pure power weight.
    fn setup(r_max: f64, cells: usize, stretch: f64) -> (ProblemParams, Arc<RadialGrid>) {
        let p = ProblemParams::new(3, 2.0, WeightSpec::pure_power(1.0).unwrap()).unwrap();
        let g = RadialGrid::build(&p, r_max, cells, stretch).unwrap();
        (p, g)
    }

    /// Random piecewise-linear bump data supported inside `support`.
    fn random_bumps(grid: &Arc<RadialGrid>, rng: &mut StdRng, support: f64) -> GridFunction {
        let n_bumps = rng.gen_range(1..=3);
        let bumps: Vec<(f64, f64, f64)> = (0..n_bumps)
            .map(|_| {
                (
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(0.0..support * 0.7),
                    rng.gen_range(support * 0.05..support * 0.3),
                )
            })
            .collect();
        GridFunction::from_fn(grid, |y| {
            bumps
                .iter()
                .map(|&(a, c, w)| a * (1.0 - ((y - c) / w).abs()).max(0.0))
                .sum()
        })
    }

    #[test]
    fn norm_1r_constant_attains_at_base_radius() {
        let (_, g) = setup(100.0, 800, 1.01);
        let f = GridFunction::constant(&g, 1.0);
        // Mass of B_R is 2πR², exponent -3: sup of 2π/R over R ≥ 1 is 2π at R = 1.
        let rep = norm_1r(&f, 2.0, 1.0).unwrap();
        assert_relative_eq!(rep.value, 2.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(rep.argmax_r, 1.0, max_relative = 1e-12);
        assert!(!rep.truncation_note);
    }

    #[test]
    fn norm_1r_critical_growth_is_r_independent() {
        let (_, g) = setup(100.0, 800, 1.01);
        let f = GridFunction::from_fn(&g, |y| y);
        for r in [1.0, 2.0, 8.0] {
            let rep = norm_1r(&f, 2.0, r).unwrap();
            assert_relative_eq!(rep.value, 4.0 * PI / 3.0, max_relative = 1e-4);
        }
        // Constant in R all the way out: the boundary carries the sup too.
        assert!(norm_1r(&f, 2.0, 1.0).unwrap().truncation_note);
        let zero = GridFunction::constant(&g, 0.0);
        assert_eq!(norm_1r(&zero, 2.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn norm_inf_examples() {
        let (_, g) = setup(100.0, 800, 1.01);
        let lin = GridFunction::from_fn(&g, |y| y);
        for r in [1.0, 3.0] {
            assert_relative_eq!(norm_inf_r(&lin, 2.0, r).unwrap().value, 1.0, max_relative = 1e-9);
        }
        let one = GridFunction::constant(&g, 1.0);
        for r in [1.0, 4.0] {
            assert_relative_eq!(norm_inf_r(&one, 2.0, r).unwrap().value, 1.0 / r, max_relative = 1e-9);
        }
    }

    #[test]
    fn norms_reject_bad_base_radius() {
        let (_, g) = setup(10.0, 64, 1.0);
        let f = GridFunction::constant(&g, 1.0);
        assert!(norm_1r(&f, 2.0, 0.5).is_err());
        assert!(matches!(norm_1r(&f, 2.0, 20.0), Err(Error::Domain(_))));
        assert!(matches!(cutoff_norm_pr(&f, 2.0, 1.0, 4.0, &CutoffProfile::standard()), Err(Error::Domain(_))));
    }

    #[test]
    fn norms_decrease_in_base_radius() {
        let (_, g) = setup(64.0, 600, 1.01);
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let f = random_bumps(&g, &mut rng, 16.0);
            for p in [1.0, 2.0] {
                let a = norm_pr(&f, 2.0, p, 1.0).unwrap().value;
                let b = norm_pr(&f, 2.0, p, 2.0).unwrap().value;
                let c = norm_pr(&f, 2.0, p, 4.0).unwrap().value;
                assert!(a >= b - 1e-14 && b >= c - 1e-14, "monotonicity in r failed: {a} {b} {c}");
            }
            let a = norm_inf_r(&f, 2.0, 1.0).unwrap().value;
            let b = norm_inf_r(&f, 2.0, 4.0).unwrap().value;
            assert!(a >= b - 1e-14);
        }
    }

    #[test]
    fn holder_chain_with_measured_constant() {
        // ‖f‖_{p,r} ≤ c(p,q) ‖f‖_{q,r} with c from the discrete ball masses:
        // c = sup_R (mass(B_R) R^{-(N-γ)})^{1/p - 1/q}.
        let (_, g) = setup(64.0, 600, 1.01);
        let mut rng = StdRng::seed_from_u64(11);
        let (p, q) = (1.0, 2.0);
        let mut c: f64 = 0.0;
        for &e in g.cell_edges.iter().skip(1) {
            let mass = g.ball_mass(e).unwrap();
            c = c.max((mass * e.powf(-2.0)).powf(1.0 / p - 1.0 / q));
        }
        for _ in 0..50 {
            let f = random_bumps(&g, &mut rng, 16.0);
            let np = norm_pr(&f, 2.0, p, 1.0).unwrap().value;
            let nq = norm_pr(&f, 2.0, q, 1.0).unwrap().value;
            assert!(np <= c * nq * (1.0 + 1e-12), "Hölder chain failed: {np} > {c} * {nq}");
        }
    }

    #[test]
    fn cutoff_profile_satisfies_junction_conditions() {
        let phi = CutoffProfile::standard();
        assert_eq!(phi.eval(0.0), 1.0);
        assert_eq!(phi.eval(1.0), 1.0);
        assert_eq!(phi.eval(2.0), 0.0);
        assert_eq!(phi.eval(5.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = phi.eval(1.0 + i as f64 / 100.0);
            assert!((0.0..=1.0).contains(&v) && v <= prev + 1e-15, "not monotone at {i}");
            prev = v;
        }
        // C¹ join: finite differences of φ vanish at both ends of [1,2].
        let d = 1e-5;
        assert!((phi.eval(1.0 + d) - phi.eval(1.0)).abs() / d < 1e-3);
        assert!((phi.eval(2.0) - phi.eval(2.0 - d)).abs() / d < 1e-3);
    }

    #[test]
    fn cutoff_norm_equivalence_sandwich() {
        let (_, g) = setup(64.0, 600, 1.01);
        let phi = CutoffProfile::standard();
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let f = random_bumps(&g, &mut rng, 14.0);
            for p in [1.0, 2.0] {
                let plain = norm_pr(&f, 2.0, p, 1.0).unwrap().value;
                let cut = cutoff_norm_pr(&f, 2.0, p, 1.0, &phi).unwrap().value;
                let factor = 2.0f64.powf(1.0 + 2.0 / p);
                assert!(
                    plain <= cut * (1.0 + 1e-12) && cut <= factor * plain * (1.0 + 1e-12),
                    "sandwich failed at p = {p}: plain {plain}, cutoff {cut}, factor {factor}"
                );
            }
        }
    }

    #[test]
    fn cutoff_norm_critical_growth_in_paper_bracket() {
        let (_, g) = setup(100.0, 800, 1.01);
        let f = GridFunction::from_fn(&g, |y| y);
        let v = cutoff_norm_pr(&f, 2.0, 1.0, 1.0, &CutoffProfile::standard()).unwrap().value;
        let lo = 4.0 * PI / 3.0;
        assert!(v >= lo * (1.0 - 1e-9) && v <= 8.0 * lo * (1.0 + 1e-9), "got {v}");
    }

    #[test]
    fn cutoff_agrees_with_plain_for_supported_data() {
        // f supported in B_r with φ ≡ 1 there: the R = r integrals coincide.
        let (_, g) = setup(64.0, 600, 1.01);
        let f = GridFunction::from_fn(&g, |y| (1.0 - y).max(0.0));
        let plain = norm_pr(&f, 2.0, 1.0, 1.0).unwrap();
        let cut = cutoff_norm_pr(&f, 2.0, 1.0, 1.0, &CutoffProfile::standard()).unwrap();
        // The straddling interval at the support edge is split exactly by the
        // plain norm but trapezoided whole by the cut-off norm.
        assert_relative_eq!(plain.value, cut.value, max_relative = 1e-4);
    }

    #[test]
    fn tail_functional_classification() {
        let (_, g) = setup(256.0, 900, 1.015);
        let schedule = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];
        // Constants vanish at the tail: values 2π/r, Aitken limit 0.
        let one = GridFunction::constant(&g, 1.0);
        let rep = ell_tail(&one, 2.0, &schedule, 1e-3).unwrap();
        assert!(rep.in_x0, "constant datum should classify as tail-vanishing: {rep:?}");
        for w in rep.values.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
        // Critical growth keeps a positive tail.
        let lin = GridFunction::from_fn(&g, |y| y);
        let rep = ell_tail(&lin, 2.0, &schedule, 1e-3).unwrap();
        assert!(!rep.in_x0);
        assert_relative_eq!(rep.limit_estimate, 4.0 * PI / 3.0, max_relative = 1e-3);
        // Zero datum has zero tail.
        let zero = GridFunction::constant(&g, 0.0);
        assert_eq!(ell_tail(&zero, 2.0, &schedule, 1e-3).unwrap().limit_estimate, 0.0);
        // Short schedules are rejected.
        assert!(ell_tail(&one, 2.0, &[1.0, 2.0], 1e-3).is_err());
    }

    #[test]
    fn phi_alpha_embedding_bound() {
        let (_, g) = setup(100.0, 800, 1.01);
        let mut rng = StdRng::seed_from_u64(17);
        let alpha = 3.0;
        let omega = 3.0; // (2-γ)/(m-1) + N - γ for the workhorse parameters
        for _ in 0..20 {
            let mut f = random_bumps(&g, &mut rng, 20.0);
            // Add a critical-growth component so the bound is exercised by
            // data that are not compactly supported.
            let slope = rng.gen_range(0.0..0.5);
            f = GridFunction::from_fn(&g, |y| f.value_at(y) + slope * y);
            let r = 1.0;
            let lhs = norm_phi_alpha(&f, 2.0, alpha).unwrap().value;
            let n1 = norm_1r(&f, 2.0, r).unwrap().value;
            let bound =
                (r.powf(omega) + 2.0 * alpha * r.powf(omega - 2.0 * alpha) / (2.0 * alpha - omega)) * n1;
            assert!(lhs <= bound * (1.0 + 1e-9), "embedding bound violated: {lhs} > {bound}");
        }
        let zero = GridFunction::constant(&g, 0.0);
        assert_eq!(norm_phi_alpha(&zero, 2.0, alpha).unwrap().value, 0.0);
    }

    #[test]
    fn phi_alpha_value_converges_in_mesh_extent() {
        // For f ≡ 1, γ = 1, α = 3: ∫ Φ₃ ρ dx = 4π ∫ y (1+y²)^{-3} dy = π.
        let exact = PI;
        let (_, g1) = setup(50.0, 400, 1.01);
        let (_, g2) = setup(100.0, 500, 1.01);
        let a = norm_phi_alpha(&GridFunction::constant(&g1, 1.0), 2.0, 3.0).unwrap();
        let b = norm_phi_alpha(&GridFunction::constant(&g2, 1.0), 2.0, 3.0).unwrap();
        for rep in [&a, &b] {
            assert!(
                rep.value <= exact * (1.0 + 1e-3) && rep.value >= exact - rep.tail_bound - 1e-3 * exact,
                "value {} outside [{} - tail {}, {}]",
                rep.value,
                exact,
                rep.tail_bound,
                exact
            );
        }
        assert!(b.tail_bound < a.tail_bound);
    }

    #[test]
    fn limsup_identity_on_the_grid() {
        let (_, g) = setup(1000.0, 900, 1.012);
        let lin = GridFunction::from_fn(&g, |y| y);
        let rep = limsup_rate(&lin, 2.0).unwrap();
        assert_relative_eq!(rep.norm_tail, 1.0, max_relative = 1e-6);
        assert_relative_eq!(rep.farfield_ratio, 1.0, max_relative = 1e-6);

        let one = GridFunction::constant(&g, 1.0);
        let rep = limsup_rate(&one, 2.0).unwrap();
        assert!(rep.norm_tail < 3e-3 && rep.farfield_ratio < 1.1e-2, "{rep:?}");

        let osc = GridFunction::from_fn(&g, |y| y + y.sin());
        let rep = limsup_rate(&osc, 2.0).unwrap();
        assert!((rep.norm_tail - 1.0).abs() <= 0.02, "norm tail {}", rep.norm_tail);
        assert!((rep.farfield_ratio - 1.0).abs() <= 0.02, "far-field {}", rep.farfield_ratio);
        assert!((rep.norm_tail - rep.farfield_ratio).abs() <= 0.02);
    }

    #[test]
    fn lower_semicontinuity_under_truncation() {
        // fₙ = clamp(f, n) · χ_{Bₙ} increases to f; the norms must follow
        // monotonically from below (discrete Fatou).
        let (_, g) = setup(100.0, 800, 1.01);
        let f = GridFunction::from_fn(&g, |y| y);
        let full = norm_1r(&f, 2.0, 1.0).unwrap().value;
        let mut prev = 0.0;
        for n in [2.0, 4.0, 8.0, 16.0] {
            let fi = GridFunction::from_fn(&g, |y| if y < n { y.min(n) } else { 0.0 });
            let v = norm_1r(&fi, 2.0, 1.0).unwrap().value;
            assert!(v >= prev - 1e-14 && v <= full * (1.0 + 1e-12));
            prev = v;
        }
        assert_relative_eq!(prev, full, max_relative = 1e-4);
    }

    #[test]
    fn truncation_convergence_dichotomy() {
        let (_, g) = setup(256.0, 900, 1.015);
        // Tail-vanishing datum: ‖fₙ - f‖_{1,r} → 0.
        let one = GridFunction::constant(&g, 1.0);
        let mut prev = f64::INFINITY;
        for n in [4.0, 8.0, 16.0, 32.0] {
            let fi = GridFunction::from_fn(&g, |y| if y < n { 1.0 } else { 0.0 });
            let diff = one.zip_map(&fi, |a, b| a - b);
            let d = norm_1r(&diff, 2.0, 1.0).unwrap().value;
            assert!(d < prev, "truncation distance should decrease: {d} vs {prev}");
            prev = d;
        }
        // sup_R R^{-3} 2π(R²-n²)₊ = 4π/(3√3 n): O(1/n) decay.
        assert!(prev <= 1.1 * 4.0 * PI / (3.0 * 3.0f64.sqrt() * 32.0));

        // Critical growth: the distance stays pinned at ℓ(f) > 0.
        let lin = GridFunction::from_fn(&g, |y| y);
        let ell = 4.0 * PI / 3.0;
        for n in [4.0, 8.0, 16.0] {
            let fi = GridFunction::from_fn(&g, |y| if y < n { y.min(n) } else { 0.0 });
            let diff = lin.zip_map(&fi, |a, b| a - b);
            let d = norm_1r(&diff, 2.0, 1.0).unwrap().value;
            assert!(d >= 0.9 * ell, "critical datum lost its tail: {d} < {ell}");
        }
    }
}
