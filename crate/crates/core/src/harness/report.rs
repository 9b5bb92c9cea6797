//! Experiment reports and artifact writers.
//!
//! A report lists one record per checked assertion: the claim label, the
//! measured value, the admissible interval, and the verdict. Quantities and
//! inputs are kept in ordered maps so serialization is byte-stable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::profiles::EllipticProfile;
use crate::solver::Trajectory;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// The mathematical claim being checked, e.g. "L1(rho) contraction".
    pub claim: String,
    pub measured: f64,
    /// Admissible interval [lo, hi]; one-sided checks leave the other side
    /// unbounded.
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    /// Echo of the inputs that shaped the run.
    pub inputs: BTreeMap<String, String>,
    pub assertions: Vec<Assertion>,
    /// Additional measured quantities worth reporting without a verdict.
    pub quantities: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            seed,
            inputs: BTreeMap::new(),
            assertions: Vec::new(),
            quantities: BTreeMap::new(),
            artifacts: Vec::new(),
            passed: true,
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl ToString) {
        self.inputs.insert(key.into(), value.to_string());
    }

    pub fn quantity(&mut self, key: impl Into<String>, value: f64) {
        self.quantities.insert(key.into(), value);
    }

    pub fn check_range(
        &mut self,
        name: impl Into<String>,
        claim: impl Into<String>,
        measured: f64,
        lo: f64,
        hi: f64,
    ) -> bool {
        let pass = measured.is_finite() && measured >= lo && measured <= hi;
        self.assertions.push(Assertion {
            name: name.into(),
            claim: claim.into(),
            measured,
            lo,
            hi,
            pass,
        });
        self.passed &= pass;
        pass
    }

    pub fn check_le(
        &mut self,
        name: impl Into<String>,
        claim: impl Into<String>,
        measured: f64,
        hi: f64,
    ) -> bool {
        self.check_range(name, claim, measured, f64::NEG_INFINITY, hi)
    }

    pub fn check_ge(
        &mut self,
        name: impl Into<String>,
        claim: impl Into<String>,
        measured: f64,
        lo: f64,
    ) -> bool {
        self.check_range(name, claim, measured, lo, f64::INFINITY)
    }

    pub fn check_flag(&mut self, name: impl Into<String>, claim: impl Into<String>, ok: bool) -> bool {
        self.check_range(name, claim, if ok { 1.0 } else { 0.0 }, 1.0, 1.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        if let Some(parent) = path.as_ref().parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path.as_ref(), self.to_json())?;
        Ok(())
    }

    /// One line per assertion, suitable for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.assertions
            .iter()
            .map(|a| {
                format!(
                    "[{}] {} :: {} = {:.6e} in [{:.3e}, {:.3e}]",
                    if a.pass { "PASS" } else { "FAIL" },
                    a.name,
                    a.claim,
                    a.measured,
                    a.lo,
                    a.hi
                )
            })
            .collect()
    }
}

/// Collects artifact files for one experiment; a `None` directory makes
/// every writer a no-op so experiments stay cheap in test harnesses.
/// Recorded paths are relative to the output directory, keeping reports
/// byte-identical regardless of where they are written.
pub struct Artifacts {
    dir: Option<PathBuf>,
    pub paths: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: Option<&Path>) -> Self {
        Artifacts { dir: dir.map(|p| p.to_path_buf()), paths: Vec::new() }
    }

    fn target(&mut self, name: &str) -> Option<PathBuf> {
        let dir = self.dir.clone()?;
        self.paths.push(name.to_string());
        Some(dir.join(name))
    }

    pub fn grid_csv(&mut self, name: &str, f: &GridFunction) -> Result<()> {
        if let Some(path) = self.target(name) {
            ensure_parent(&path)?;
            let mut file = fs::File::create(path)?;
            f.write_csv(&mut file)?;
        }
        Ok(())
    }

    pub fn profile_csv(&mut self, name: &str, prof: &EllipticProfile) -> Result<()> {
        if let Some(path) = self.target(name) {
            ensure_parent(&path)?;
            let mut file = fs::File::create(path)?;
            prof.write_csv(&mut file)?;
        }
        Ok(())
    }

    /// Long-format snapshot table: `time,radius,value`.
    pub fn trajectory_csv(&mut self, name: &str, traj: &Trajectory) -> Result<()> {
        if let Some(path) = self.target(name) {
            ensure_parent(&path)?;
            let mut file = fs::File::create(path)?;
            writeln!(file, "time,radius,value")?;
            for (t, f) in &traj.snapshots {
                for (y, v) in f.grid.nodes.iter().zip(&f.values) {
                    writeln!(file, "{t},{y},{v}")?;
                }
            }
        }
        Ok(())
    }

    /// Norm traces plus the event log as JSON.
    pub fn traces_json(&mut self, name: &str, traj: &Trajectory) -> Result<()> {
        if let Some(path) = self.target(name) {
            ensure_parent(&path)?;
            let doc = serde_json::json!({
                "times": traj.times,
                "norm_1r": traj.norm_1r,
                "norm_inf_r": traj.norm_inf_r,
                "weighted_mass": traj.weighted_mass,
                "l1_phi_alpha": traj.l1_phi_alpha,
                "sup_trace": traj.sup_trace,
                "dt_history": traj.dt_history,
                "events": traj.events,
                "final_time": traj.final_time,
                "blowup": traj.blowup,
            });
            fs::write(path, serde_json::to_string_pretty(&doc).expect("trace serialization"))?;
        }
        Ok(())
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(Error::Io)?;
    }
    Ok(())
}
