//! Radial meshes and quadrature against the singular weight.
//!
//! Nodes run from y₀ = 0 to y_M = R_max; around each node sits a control
//! volume bounded by interval midpoints. The weight enters only through
//! exact cell masses ∫ ρ σ_N y^{N-1} dy, so the singularity of ρ at the
//! origin never has to be evaluated pointwise.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{weight_cell_mass, ProblemParams, WeightSpec};

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub dim: u32,
    pub weight: WeightSpec,
    /// Strictly increasing radii, `nodes[0] = 0`, `nodes[M] = r_max`.
    pub nodes: Vec<f64>,
    /// Control-volume boundaries: `edges[0] = 0`, `edges[i]` the midpoint of
    /// `(nodes[i-1], nodes[i])`, `edges[M+1] = r_max`.
    pub cell_edges: Vec<f64>,
    /// Weight mass of the control volume around each node.
    pub cell_weight_mass: Vec<f64>,
    /// Weight mass of each interval `[nodes[j], nodes[j+1]]`.
    pub interval_weight_mass: Vec<f64>,
    /// Weight mass of `[nodes[j], edges[j+1]]`, the left half of interval j.
    left_half_mass: Vec<f64>,
}

impl RadialGrid {
    /// Geometric mesh with `cells` intervals reaching `r_max`; stretch = 1
    /// gives a uniform mesh, stretch > 1 widens cells toward the far field.
    pub fn build(params: &ProblemParams, r_max: f64, cells: usize, stretch: f64) -> Result<Arc<Self>> {
        if !(r_max.is_finite() && r_max > 0.0) || !stretch.is_finite() || stretch < 1.0 {
            return Err(Error::invalid(format!(
                "grid needs finite r_max > 0 and stretch ≥ 1, got r_max = {r_max}, stretch = {stretch}"
            )));
        }
        if cells < 16 {
            return Err(Error::invalid(format!("grid needs at least 16 cells, got {cells}")));
        }
        let m = cells;
        let h0 = if stretch == 1.0 {
            r_max / m as f64
        } else {
            r_max * (stretch - 1.0) / (stretch.powi(m as i32) - 1.0)
        };
        let mut nodes = Vec::with_capacity(m + 1);
        nodes.push(0.0);
        let mut h = h0;
        for _ in 0..m {
            let y = nodes.last().unwrap() + h;
            nodes.push(y);
            h *= stretch;
        }
        nodes[m] = r_max; // kill accumulated round-off at the outer boundary

        let mut cell_edges = Vec::with_capacity(m + 2);
        cell_edges.push(0.0);
        for i in 1..=m {
            cell_edges.push(0.5 * (nodes[i - 1] + nodes[i]));
        }
        cell_edges.push(r_max);

        let weight = &params.weight;
        let mut cell_weight_mass = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let mass = weight_cell_mass(weight, params.dim, cell_edges[i], cell_edges[i + 1])?;
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::numeric(format!("non-positive cell mass {mass} at cell {i}")));
            }
            cell_weight_mass.push(mass);
        }
        let mut interval_weight_mass = Vec::with_capacity(m);
        let mut left_half_mass = Vec::with_capacity(m);
        for j in 0..m {
            let left = weight_cell_mass(weight, params.dim, nodes[j], cell_edges[j + 1])?;
            let full = left + weight_cell_mass(weight, params.dim, cell_edges[j + 1], nodes[j + 1])?;
            left_half_mass.push(left);
            interval_weight_mass.push(full);
        }

        Ok(Arc::new(RadialGrid {
            dim: params.dim,
            weight: weight.clone(),
            nodes,
            cell_edges,
            cell_weight_mass,
            interval_weight_mass,
            left_half_mass,
        }))
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the last node with radius ≤ y.
    pub fn node_before(&self, y: f64) -> usize {
        match self.nodes.partition_point(|r| *r <= y) {
            0 => 0,
            i => i - 1,
        }
    }

    /// Total weight mass of the ball of radius `r` (exact partial cell).
    pub fn ball_mass(&self, r: f64) -> Result<f64> {
        if r > self.r_max() * (1.0 + 1e-12) {
            return Err(Error::domain(format!("radius {r} exceeds mesh extent {}", self.r_max())));
        }
        let j = self.node_before(r);
        let mut mass: f64 = self.interval_weight_mass[..j].iter().sum();
        if j < self.nodes.len() - 1 && r > self.nodes[j] {
            mass += weight_cell_mass(&self.weight, self.dim, self.nodes[j], r.min(self.r_max()))?;
        }
        Ok(mass)
    }

    pub(crate) fn left_half_mass(&self, j: usize) -> f64 {
        self.left_half_mass[j]
    }
}

/// A radial function sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes.len() {
            return Err(Error::invalid(format!(
                "value count {} does not match node count {}",
                values.len(),
                grid.nodes.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&y| f(y)).collect();
        GridFunction { grid: Arc::clone(grid), values }
    }

    pub fn constant(grid: &Arc<RadialGrid>, c: f64) -> Self {
        GridFunction { grid: Arc::clone(grid), values: vec![c; grid.nodes.len()] }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "grid functions live on different meshes");
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Piecewise-linear interpolation within the mesh.
    pub fn value_at(&self, y: f64) -> f64 {
        let nodes = &self.grid.nodes;
        if y <= 0.0 {
            return self.values[0];
        }
        if y >= self.grid.r_max() {
            return *self.values.last().unwrap();
        }
        let j = self.grid.node_before(y);
        let t = (y - nodes[j]) / (nodes[j + 1] - nodes[j]);
        self.values[j] + t * (self.values[j + 1] - self.values[j])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Lumped node-mass sum Σ mass_i v_i, the scheme's own discrete ∫ v ρ dx.
    /// Exactly conserved by the flux-form solver.
    pub fn lumped_weighted_sum(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.cell_weight_mass)
            .map(|(&v, &m)| v * m)
            .sum()
    }

    /// Lumped Σ mass_i |v_i|, the discrete L¹(ρ) norm contracted by the solver.
    pub fn lumped_weighted_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.cell_weight_mass)
            .map(|(&v, &m)| v.abs() * m)
            .sum()
    }

    /// Writes `radius,value` CSV rows.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "radius,value")?;
        for (y, v) in self.grid.nodes.iter().zip(&self.values) {
            writeln!(out, "{y},{v}")?;
        }
        Ok(())
    }
}

/// ∫_{B_R} f ρ dx by a trapezoidal-in-value, exact-in-weight-mass rule:
/// every interval contributes its exact weight mass times the mean of the
/// endpoint values, and the partial boundary interval is split exactly.
pub fn integrate_weighted(f: &GridFunction, r: f64) -> Result<f64> {
    let grid = &f.grid;
    if r > grid.r_max() * (1.0 + 1e-12) {
        return Err(Error::domain(format!("radius {r} exceeds mesh extent {}", grid.r_max())));
    }
    if r <= 0.0 {
        return Ok(0.0);
    }
    let r = r.min(grid.r_max());
    let j = grid.node_before(r);
    let mut total = 0.0;
    for i in 0..j {
        total += 0.5 * (f.values[i] + f.values[i + 1]) * grid.interval_weight_mass[i];
    }
    if j < grid.nodes.len() - 1 && r > grid.nodes[j] {
        let partial = weight_cell_mass(&grid.weight, grid.dim, grid.nodes[j], r)?;
        total += 0.5 * (f.values[j] + f.value_at(r)) * partial;
    }
    Ok(total)
}

/// Prefix integrals of |f|^p at every node radius, reusing exact interval
/// masses. `prefix[j]` is the quadrature of |f|^p over the ball of radius `nodes[j]`.
pub(crate) fn prefix_abs_pow_integrals(f: &GridFunction, p: f64) -> Vec<f64> {
    let g: Vec<f64> = f.values.iter().map(|v| v.abs().powf(p)).collect();
    let mut prefix = Vec::with_capacity(g.len());
    prefix.push(0.0);
    for j in 0..g.len() - 1 {
        let inc = 0.5 * (g[j] + g[j + 1]) * f.grid.interval_weight_mass[j];
        prefix.push(prefix[j] + inc);
    }
    prefix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::unit_sphere_area;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(gamma: f64) -> ProblemParams {
        ProblemParams::new(3, 2.0, WeightSpec::pure_power(gamma).unwrap()).unwrap()
    }

    #[test]
    fn uniform_mesh_spacing() {
        let g = RadialGrid::build(&params(1.0), 1.0, 100, 1.0).unwrap();
        assert_eq!(g.nodes.len(), 101);
        for w in g.nodes.windows(2) {
            assert_relative_eq!(w[1] - w[0], 0.01, max_relative = 1e-12);
        }
    }

    #[test]
    fn geometric_mesh_width_ratio() {
        let m = 400;
        let stretch = 1.01;
        let g = RadialGrid::build(&params(1.0), 1e3, m, stretch).unwrap();
        let first = g.nodes[1] - g.nodes[0];
        let last = g.nodes[m] - g.nodes[m - 1];
        assert_relative_eq!(last / first, stretch.powi(m as i32 - 1), max_relative = 1e-6);
    }

    #[test]
    fn total_mass_matches_closed_form_on_stretched_mesh() {
        let g = RadialGrid::build(&params(1.0), 50.0, 200, 1.02).unwrap();
        let total: f64 = g.cell_weight_mass.iter().sum();
        assert_relative_eq!(total, 2.0 * PI * 2500.0, max_relative = 1e-10);
        // Per-cell masses also telescope against the ball mass at any edge.
        let r = g.cell_edges[77];
        let inside: f64 = g.cell_weight_mass[..77].iter().sum();
        assert_relative_eq!(inside, 2.0 * PI * r * r, max_relative = 1e-10);
    }

    #[test]
    fn integrate_constant_and_zero() {
        let g = RadialGrid::build(&params(1.0), 10.0, 100, 1.0).unwrap();
        let one = GridFunction::constant(&g, 1.0);
        assert_relative_eq!(integrate_weighted(&one, 1.0).unwrap(), 2.0 * PI, max_relative = 1e-10);
        let zero = GridFunction::constant(&g, 0.0);
        assert_eq!(integrate_weighted(&zero, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn integrate_critical_growth_datum() {
        // f(y) = y against γ = 1 in N = 3: ∫_{B_R} y ρ dx = σ₃ R³/3.
        let g = RadialGrid::build(&params(1.0), 10.0, 400, 1.0).unwrap();
        let f = GridFunction::from_fn(&g, |y| y);
        let sigma = unit_sphere_area(3);
        for r in [2.0f64, 5.0, 10.0] {
            let exact = sigma * r.powi(3) / 3.0;
            let got = integrate_weighted(&f, r).unwrap();
            assert_relative_eq!(got, exact, max_relative = 2e-4); // O(h²)
        }
    }

    #[test]
    fn integrate_rejects_radius_beyond_mesh() {
        let g = RadialGrid::build(&params(1.0), 10.0, 32, 1.0).unwrap();
        let f = GridFunction::constant(&g, 1.0);
        assert!(matches!(integrate_weighted(&f, 10.5), Err(Error::Domain(_))));
    }

    #[test]
    fn quadrature_is_second_order() {
        // Smooth integrand, uniform refinement: the error slope should be ≈ 2.
        let exact = {
            // ∫_0^5 cos(y) y^{-1} 4π y² dy = 4π ∫ y cos y = 4π (cos y + y sin y)|₀⁵
            4.0 * PI * ((5.0f64).cos() + 5.0 * (5.0f64).sin() - 1.0)
        };
        let mut errs = Vec::new();
        for m in [64usize, 128, 256, 512] {
            let g = RadialGrid::build(&params(1.0), 5.0, m, 1.0).unwrap();
            let f = GridFunction::from_fn(&g, |y| y.cos());
            errs.push((integrate_weighted(&f, 5.0).unwrap() - exact).abs());
        }
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!(
                (1.8..=2.2).contains(&slope),
                "refinement slope {slope} outside [1.8, 2.2] (errors {errs:?})"
            );
        }
    }

    #[test]
    fn region_additivity_at_interior_edges() {
        let g = RadialGrid::build(&params(0.5), 10.0, 100, 1.0).unwrap();
        let f = GridFunction::from_fn(&g, |y| (1.0 + y).ln());
        // Splitting at any node radius is exact: the composite rule sums intervals.
        let r_split = g.nodes[37];
        let whole = integrate_weighted(&f, 10.0).unwrap();
        let inner = integrate_weighted(&f, r_split).unwrap();
        let outer: f64 = (37..100)
            .map(|i| 0.5 * (f.values[i] + f.values[i + 1]) * g.interval_weight_mass[i])
            .sum();
        assert_relative_eq!(inner + outer, whole, max_relative = 1e-14);
    }

    #[test]
    fn rejects_tiny_meshes_and_bad_parameters() {
        assert!(RadialGrid::build(&params(1.0), 10.0, 8, 1.0).is_err());
        assert!(RadialGrid::build(&params(1.0), f64::NAN, 32, 1.0).is_err());
        assert!(RadialGrid::build(&params(1.0), 10.0, 32, 0.5).is_err());
    }

    #[test]
    fn csv_round_trip_format() {
        let g = RadialGrid::build(&params(1.0), 1.0, 16, 1.0).unwrap();
        let f = GridFunction::from_fn(&g, |y| y * y);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("radius,value"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
    }
}
