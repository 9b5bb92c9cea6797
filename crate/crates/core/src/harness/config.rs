//! TOML experiment configuration.
//!
//! Every key is optional; experiments fall back to their desk-scale
//! defaults. The full schema is documented in the repository README.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid};
use crate::model::{ProblemParams, WeightSpec};
use crate::profiles::{compact_profile, shoot_profile, ExplicitFamily, ShootOptions};
use crate::solver::SolverOptions;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub datum: DatumSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub dim: Option<u32>,
    pub m: Option<f64>,
    pub gamma: Option<f64>,
    /// "pure_power" | "regularized_power" | "user_radial".
    pub weight_kind: Option<String>,
    pub epsilon: Option<f64>,
    pub k_lower: Option<f64>,
    pub k_upper: Option<f64>,
    pub weight_radii: Option<Vec<f64>>,
    pub weight_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r_max: Option<f64>,
    pub cells: Option<usize>,
    pub stretch: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSection {
    /// "explicit" | "profile" | "compact" | "power" | "csv".
    pub kind: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub beta: Option<f64>,
    pub t_horizon: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub amplitude: Option<f64>,
    pub exponent: Option<f64>,
    pub path: Option<String>,
    /// Optional truncation index: apply τ_n(·) χ_{B_n} to the datum.
    pub truncate_n: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt_init: Option<f64>,
    pub dt_max: Option<f64>,
    pub newton_tol: Option<f64>,
    pub newton_max_iters: Option<usize>,
    /// "zero_flux" | "dirichlet_explicit" | "dirichlet_separable" | "dirichlet_barrier".
    pub bc: Option<String>,
    pub blowup_factor: Option<f64>,
    pub t_end: Option<f64>,
    pub trace_points: Option<usize>,
    pub output_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::config(format!("cannot read config {}: {e}", path.as_ref().display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn problem_params(&self) -> Result<ProblemParams> {
        let p = &self.problem;
        let gamma = p.gamma.unwrap_or(1.0);
        let kind = p.weight_kind.as_deref().unwrap_or("pure_power");
        let weight = match kind {
            "pure_power" => WeightSpec::pure_power(gamma)?,
            "regularized_power" => WeightSpec::regularized_power(gamma, p.epsilon.unwrap_or(0.0))?,
            "user_radial" => {
                let radii = p
                    .weight_radii
                    .clone()
                    .ok_or_else(|| Error::config("user_radial weight needs weight_radii"))?;
                let values = p
                    .weight_values
                    .clone()
                    .ok_or_else(|| Error::config("user_radial weight needs weight_values"))?;
                WeightSpec::user_radial(
                    gamma,
                    radii,
                    values,
                    p.k_lower.unwrap_or(1.0),
                    p.k_upper.unwrap_or(1.0),
                )?
            }
            other => return Err(Error::config(format!("unknown weight kind `{other}`"))),
        };
        ProblemParams::new(p.dim.unwrap_or(3), p.m.unwrap_or(2.0), weight)
    }

    pub fn build_grid(
        &self,
        params: &ProblemParams,
        default_r_max: f64,
        default_cells: usize,
        default_stretch: f64,
    ) -> Result<Arc<RadialGrid>> {
        RadialGrid::build(
            params,
            self.grid.r_max.unwrap_or(default_r_max),
            self.grid.cells.unwrap_or(default_cells),
            self.grid.stretch.unwrap_or(default_stretch),
        )
    }

    /// Builds the datum described by `[datum]`; `profile` data shoot the
    /// elliptic profile on the given grid first.
    pub fn build_datum(&self, params: &ProblemParams, grid: &Arc<RadialGrid>) -> Result<GridFunction> {
        let d = &self.datum;
        let kind = d.kind.as_deref().unwrap_or("explicit");
        let datum = match kind {
            "explicit" => {
                let fam = ExplicitFamily::new(params, d.a.unwrap_or(1.0), d.b.unwrap_or(1.0 / 6.0))?;
                fam.datum(grid)
            }
            "profile" => {
                let prof = shoot_profile(
                    params,
                    d.beta.unwrap_or(1.0),
                    d.t_horizon.unwrap_or(1.0),
                    grid,
                    &ShootOptions::default(),
                )?;
                prof.w()
            }
            "compact" => compact_profile(
                params,
                grid,
                d.c1.unwrap_or(1.0),
                d.c2.unwrap_or(1.0),
                d.c3.unwrap_or(1.0),
            )?,
            "power" => {
                let amp = d.amplitude.unwrap_or(1.0);
                let s = d.exponent.unwrap_or(1.0);
                GridFunction::from_fn(grid, |y| amp * y.powf(s))
            }
            "csv" => {
                let path = d
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::config("csv datum needs a `path`"))?;
                read_csv_datum(path, grid)?
            }
            other => return Err(Error::config(format!("unknown datum kind `{other}`"))),
        };
        Ok(match d.truncate_n {
            Some(n) if n > 0.0 => crate::solver::truncate_datum(&datum, n),
            Some(n) => return Err(Error::config(format!("truncate_n must be positive, got {n}"))),
            None => datum,
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        let s = &self.solver;
        let mut opts = SolverOptions::default();
        if let Some(x) = s.dt_init {
            opts.dt_init = x;
        }
        if let Some(x) = s.dt_max {
            opts.dt_max = x;
        }
        if let Some(x) = s.newton_tol {
            opts.newton_tol = x;
        }
        if let Some(x) = s.newton_max_iters {
            opts.newton_max_iters = x;
        }
        if let Some(x) = s.blowup_factor {
            opts.blowup_factor = x;
        }
        if let Some(x) = s.trace_points {
            opts.trace_points = x;
        }
        if let Some(x) = &s.output_times {
            opts.output_times = x.clone();
        }
        opts.trace_r = self.norms.r.unwrap_or(1.0);
        opts.trace_alpha = self.norms.alpha.unwrap_or(3.0);
        opts
    }

    /// α for the L¹(Φ_α) traces, validated against the embedding condition
    /// α > (2-γ)/(2(m-1)) + (N-γ)/2.
    pub fn validated_alpha(&self, params: &ProblemParams) -> Result<f64> {
        let alpha = self.norms.alpha.unwrap_or(3.0);
        let g = params.gamma();
        let n = params.dim as f64;
        let floor = (2.0 - g) / (2.0 * (params.m - 1.0)) + (n - g) / 2.0;
        if alpha <= floor {
            return Err(Error::config(format!(
                "alpha = {alpha} violates the embedding condition alpha > {floor}"
            )));
        }
        Ok(alpha)
    }

    pub fn norm_r(&self) -> f64 {
        self.norms.r.unwrap_or(1.0)
    }
}

fn read_csv_datum(path: &str, grid: &Arc<RadialGrid>) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read datum csv {path}: {e}")))?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 && line.trim().to_lowercase().starts_with("radius") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (r, v) = (cols.next(), cols.next());
        match (r, v) {
            (Some(r), Some(v)) => {
                let r: f64 = r.trim().parse().map_err(|_| {
                    Error::config(format!("bad radius `{r}` on line {} of {path}", i + 1))
                })?;
                let v: f64 = v.trim().parse().map_err(|_| {
                    Error::config(format!("bad value `{v}` on line {} of {path}", i + 1))
                })?;
                radii.push(r);
                values.push(v);
            }
            _ => return Err(Error::config(format!("line {} of {path} is not radius,value", i + 1))),
        }
    }
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(format!("{path} must hold ≥ 2 rows with increasing radii")));
    }
    Ok(GridFunction::from_fn(grid, |y| {
        if y <= radii[0] {
            values[0]
        } else if y >= *radii.last().unwrap() {
            *values.last().unwrap()
        } else {
            let j = radii.partition_point(|r| *r <= y) - 1;
            let t = (y - radii[j]) / (radii[j + 1] - radii[j]);
            values[j] + t * (values[j + 1] - values[j])
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_the_workhorse_problem() {
        let cfg = ExperimentConfig::default();
        let p = cfg.problem_params().unwrap();
        assert_eq!(p.dim, 3);
        assert_eq!(p.m, 2.0);
        assert_eq!(p.gamma(), 1.0);
        let g = cfg.build_grid(&p, 10.0, 64, 1.0).unwrap();
        let f = cfg.build_datum(&p, &g).unwrap();
        assert!(f.is_finite());
    }

    #[test]
    fn parses_sectioned_keys() {
        let cfg = ExperimentConfig::parse(
            r#"
            [problem]
            gamma = 0.5
            m = 3.0

            [grid]
            r_max = 25.0
            cells = 128

            [datum]
            kind = "compact"
            c1 = 2.0

            [norms]
            alpha = 4.0
            "#,
        )
        .unwrap();
        let p = cfg.problem_params().unwrap();
        assert_eq!(p.gamma(), 0.5);
        assert_eq!(cfg.grid.cells, Some(128));
        assert_eq!(cfg.norms.alpha, Some(4.0));
        assert!(ExperimentConfig::parse("[problem]\nnot_a_key = 1").is_err());
    }

    #[test]
    fn alpha_embedding_condition_is_enforced() {
        let cfg = ExperimentConfig::parse("[norms]\nalpha = 1.0").unwrap();
        let p = cfg.problem_params().unwrap();
        // Floor is 0.5 + 1.0 = 1.5 for the workhorse parameters.
        assert!(cfg.validated_alpha(&p).is_err());
        let cfg = ExperimentConfig::parse("[norms]\nalpha = 1.6").unwrap();
        assert!(cfg.validated_alpha(&p).is_ok());
    }

    #[test]
    fn csv_datum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("datum.csv");
        std::fs::write(&path, "radius,value\n0.0,1.0\n5.0,0.5\n10.0,0.0\n").unwrap();
        let cfg = ExperimentConfig::parse(&format!(
            "[datum]\nkind = \"csv\"\npath = \"{}\"",
            path.display()
        ))
        .unwrap();
        let p = cfg.problem_params().unwrap();
        let g = cfg.build_grid(&p, 10.0, 64, 1.0).unwrap();
        let f = cfg.build_datum(&p, &g).unwrap();
        assert!((f.value_at(0.0) - 1.0).abs() < 1e-12);
        assert!((f.value_at(5.0) - 0.5).abs() < 1e-2);
    }
}
