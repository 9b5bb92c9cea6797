//! Implicit finite-volume time integration of ρ uₜ = Δ(uᵐ) in radial form.
//!
//! The scheme is vertex-centered: each node owns the control volume between
//! the neighboring interval midpoints, carries the exact weight mass
//! ∫ ρ σ_N y^{N-1} dy of that volume, and exchanges fluxes
//! σ_N y_edge^{N-1} (V_{i+1} - V_i)/Δy of the pressure variable
//! V = |u|^{m-1} u. Backward Euler steps are solved by damped Newton on the
//! resulting M-matrix system, which hands the discrete solution the same
//! structure the continuous theory guarantees: ordering of ordered data,
//! L¹(ρ) contraction, sup-norm non-expansion for zero-flux runs, and exact
//! conservation of Σ mass_i u_i in flux form.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::model::{unit_sphere_area, ProblemParams};
use crate::norms::{norm_1r, norm_inf_r, PhiAlpha};
use crate::profiles::{Barrier, EllipticProfile, ExplicitFamily};

/// Jacobian regularization at the degeneracy u = 0.
const JACOBIAN_EPS: f64 = 1e-12;

/// Step-size adaptation knobs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepController {
    /// Grow dt when Newton needed at most this many iterations.
    pub target_newton_lo: usize,
    /// Shrink dt when Newton needed at least this many iterations.
    pub target_newton_hi: usize,
    pub grow: f64,
    pub shrink: f64,
    /// Halve the next dt when the relative solution change exceeds this.
    pub max_rel_change: f64,
    /// Near blow-up, cap dt at this fraction of the fitted remaining time.
    pub blowup_dt_frac: f64,
    /// False freezes dt at dt_init (events still clip), so paired runs share
    /// one time grid and the discrete comparison arguments apply exactly.
    pub adaptive: bool,
}

impl Default for StepController {
    fn default() -> Self {
        StepController {
            target_newton_lo: 2,
            target_newton_hi: 5,
            grow: 1.25,
            shrink: 0.7,
            max_rel_change: 0.2,
            blowup_dt_frac: 0.05,
            adaptive: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    pub dt_init: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Blow-up trigger: sup-norm threshold as a multiple of the initial sup.
    pub blowup_factor: f64,
    pub controller: StepController,
    /// Base radius for the ‖·‖_{1,r}, ‖·‖_{∞,r} traces.
    pub trace_r: f64,
    /// Exponent of the L¹(Φ_α) trace.
    pub trace_alpha: f64,
    /// Number of log-spaced trace times in (0, t_end].
    pub trace_points: usize,
    /// Times at which full snapshots are stored (hit exactly).
    pub output_times: Vec<f64>,
    /// Trailing points used by the blow-up fit.
    pub fit_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dt_init: 1e-4,
            dt_max: 0.05,
            newton_tol: 1e-10,
            newton_max_iters: 25,
            blowup_factor: 1e6,
            controller: StepController::default(),
            trace_r: 1.0,
            trace_alpha: 3.0,
            trace_points: 48,
            output_times: Vec::new(),
            fit_window: 12,
        }
    }
}

impl SolverOptions {
    pub fn fixed_dt(dt: f64) -> Self {
        SolverOptions {
            dt_init: dt,
            dt_max: dt,
            controller: StepController { adaptive: false, ..StepController::default() },
            ..SolverOptions::default()
        }
    }
}

/// Far-field closure at y = R_max.
#[derive(Debug, Clone)]
pub enum BoundaryCondition {
    /// Reflecting outer boundary; conserves Σ mass_i u_i exactly.
    ZeroFlux,
    /// u(R_max, t) = w_outer (1 - t/T)^{-1/(m-1)}, the separable family.
    DirichletSeparable { w_outer: f64, t_horizon: f64 },
    /// u(R_max, t) from a calibrated supersolution barrier.
    DirichletBarrier(Barrier),
    /// u(R_max, t) from the explicit pure-power family.
    DirichletExplicit(ExplicitFamily),
}

impl BoundaryCondition {
    pub fn separable(profile: &EllipticProfile, y_outer: f64) -> Self {
        BoundaryCondition::DirichletSeparable {
            w_outer: profile.w_at(y_outer),
            t_horizon: profile.t_horizon,
        }
    }

    /// Blow-up horizon of the boundary data, when it has one.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            BoundaryCondition::ZeroFlux => None,
            BoundaryCondition::DirichletSeparable { t_horizon, .. } => Some(*t_horizon),
            BoundaryCondition::DirichletBarrier(b) => Some(b.s_horizon),
            BoundaryCondition::DirichletExplicit(f) => Some(f.t_horizon),
        }
    }
}

/// Boundary value at time t. Zero flux mirrors the interior value (ghost
/// node); Dirichlet modes evaluate their family and fail past its horizon.
pub fn bc_value(
    bc: &BoundaryCondition,
    params: &ProblemParams,
    t: f64,
    y_outer: f64,
    interior: f64,
) -> Result<f64> {
    match bc {
        BoundaryCondition::ZeroFlux => Ok(interior),
        BoundaryCondition::DirichletSeparable { w_outer, t_horizon } => {
            if t >= *t_horizon {
                return Err(Error::domain(format!(
                    "separable boundary data blow up at t = {t_horizon}; asked for t = {t}"
                )));
            }
            Ok(w_outer * (1.0 - t / t_horizon).powf(-1.0 / (params.m - 1.0)))
        }
        BoundaryCondition::DirichletBarrier(b) => b.value(y_outer, t),
        BoundaryCondition::DirichletExplicit(f) => f.value(y_outer, t),
    }
}

/// A boundary closure with any time dependence already evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcValue {
    ZeroFlux,
    Dirichlet(f64),
}

/// τ_n(u₀) χ_{B_n}: clamp the values to [-n, n] and zero them outside B_n.
pub fn truncate_datum(u0: &GridFunction, n: f64) -> GridFunction {
    assert!(n > 0.0, "truncation index must be positive");
    let nodes = u0.grid.nodes.clone();
    let values = u0
        .values
        .iter()
        .zip(&nodes)
        .map(|(&v, &y)| if y >= n { 0.0 } else { v.clamp(-n, n) })
        .collect();
    GridFunction { grid: Arc::clone(&u0.grid), values }
}

/// Signed pressure V(u) = |u|^{m-1} u and its derivative m |u|^{m-1}.
#[inline]
fn pressure(u: f64, m: f64) -> f64 {
    u.abs().powf(m - 1.0) * u
}

#[inline]
fn pressure_slope(u: f64, m: f64) -> f64 {
    m * u.abs().powf(m - 1.0)
}

/// One backward-Euler step. Returns the new state and the Newton count.
pub fn step_implicit(
    params: &ProblemParams,
    state: &GridFunction,
    dt: f64,
    bc: &BcValue,
    opts: &SolverOptions,
) -> Result<(GridFunction, usize)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !state.is_finite() {
        return Err(Error::invalid("state contains non-finite values"));
    }
    let grid = &state.grid;
    let m = params.m;
    let n_nodes = grid.nodes.len();
    let sigma = unit_sphere_area(grid.dim);

    // Transmissibilities at interval midpoints: σ_N e^{N-1} / Δy.
    let coef: Vec<f64> = (0..n_nodes - 1)
        .map(|j| {
            sigma * grid.cell_edges[j + 1].powi(grid.dim as i32 - 1)
                / (grid.nodes[j + 1] - grid.nodes[j])
        })
        .collect();

    let dirichlet = match bc {
        BcValue::ZeroFlux => None,
        BcValue::Dirichlet(g) => Some(*g),
    };
    let n_unk = if dirichlet.is_some() { n_nodes - 1 } else { n_nodes };
    let mass = &grid.cell_weight_mass;
    let scale = 1.0 + state.max_abs().max(dirichlet.map_or(0.0, f64::abs));

    let mut u = state.values.clone();
    if let Some(g) = dirichlet {
        u[n_nodes - 1] = g;
    }

    let residual = |u: &[f64], out: &mut Vec<f64>| {
        out.clear();
        let v: Vec<f64> = u.iter().map(|&x| pressure(x, m)).collect();
        for i in 0..n_unk {
            let flux_hi = if i < n_nodes - 1 { coef[i] * (v[i + 1] - v[i]) } else { 0.0 };
            let flux_lo = if i > 0 { coef[i - 1] * (v[i] - v[i - 1]) } else { 0.0 };
            out.push(mass[i] * (u[i] - state.values[i]) - dt * (flux_hi - flux_lo));
        }
    };
    let scaled_norm = |g: &[f64]| -> f64 {
        g.iter()
            .enumerate()
            .map(|(i, r)| r.abs() / (mass[i] * scale))
            .fold(0.0, f64::max)
    };

    let mut g_vec = Vec::with_capacity(n_unk);
    let mut g_trial = Vec::with_capacity(n_unk);
    residual(&u, &mut g_vec);
    let mut res = scaled_norm(&g_vec);
    let mut iters = 0;
    while res > opts.newton_tol {
        if iters >= opts.newton_max_iters {
            return Err(Error::numeric(format!(
                "Newton stalled at scaled residual {res:e} after {iters} iterations"
            )));
        }
        // Tridiagonal Jacobian: d/du_j of the residual row i.
        let slope: Vec<f64> = u.iter().map(|&x| pressure_slope(x, m) + JACOBIAN_EPS).collect();
        let mut lower = vec![0.0; n_unk];
        let mut diag = vec![0.0; n_unk];
        let mut upper = vec![0.0; n_unk];
        for i in 0..n_unk {
            let c_hi = if i < n_nodes - 1 { coef[i] } else { 0.0 };
            let c_lo = if i > 0 { coef[i - 1] } else { 0.0 };
            diag[i] = mass[i] + dt * (c_hi + c_lo) * slope[i];
            if i > 0 {
                lower[i] = -dt * c_lo * slope[i - 1];
            }
            if i + 1 < n_unk {
                upper[i] = -dt * c_hi * slope[i + 1];
            }
        }
        let delta = solve_tridiagonal(&lower, &diag, &upper, &g_vec);

        // Damped line search on the scaled residual norm.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(i, &x)| if i < n_unk { x - step * delta[i] } else { x })
                .collect();
            residual(&trial, &mut g_trial);
            let res_trial = scaled_norm(&g_trial);
            if res_trial < res {
                u = trial;
                std::mem::swap(&mut g_vec, &mut g_trial);
                res = res_trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iters += 1;
        if !accepted {
            return Err(Error::numeric(format!(
                "Newton line search found no descent at scaled residual {res:e}"
            )));
        }
    }
    Ok((GridFunction { grid: Arc::clone(grid), values: u }, iters))
}

/// Thomas algorithm for a tridiagonal system.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Result of the affine fit of sup-norm^{-(m-1)} against time.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlowupFit {
    pub t_fit: f64,
    /// Time span of the fitted window.
    pub window: (f64, f64),
    /// RMS misfit of the affine model, relative to the window mean.
    pub rms: f64,
    pub points: usize,
}

/// Fits ‖u(t)‖_∞^{-(m-1)} ≈ slope (T - t) over the last `window` points
/// before the threshold crossing; exact for separable blow-up where that
/// quantity is affine in t. Returns None when the trace never crosses.
pub fn detect_blowup(
    times: &[f64],
    sup_norms: &[f64],
    m: f64,
    threshold: f64,
    window: usize,
) -> Result<Option<BlowupFit>> {
    assert_eq!(times.len(), sup_norms.len());
    let cross = match sup_norms.iter().position(|&s| s >= threshold) {
        Some(i) => i,
        None => return Ok(None),
    };
    let lo = (cross + 1).saturating_sub(window.max(3));
    let ts = &times[lo..=cross];
    let zs: Vec<f64> = sup_norms[lo..=cross].iter().map(|&s| s.powf(-(m - 1.0))).collect();
    if ts.len() < 3 {
        return Err(Error::numeric(format!(
            "blow-up fit needs at least 3 trailing points, have {}",
            ts.len()
        )));
    }
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let mz = zs.iter().sum::<f64>() / n;
    let (num, den) = ts
        .iter()
        .zip(&zs)
        .fold((0.0, 0.0), |(num, den), (&t, &z)| {
            (num + (t - mt) * (z - mz), den + (t - mt) * (t - mt))
        });
    let slope = num / den; // z decreases toward the blow-up time
    if slope >= 0.0 || slope.is_nan() {
        return Err(Error::numeric("blow-up fit has non-negative slope; trace is not blowing up"));
    }
    let intercept = mz - slope * mt;
    let t_fit = -intercept / slope;
    let rms = (ts
        .iter()
        .zip(&zs)
        .map(|(&t, &z)| {
            let e = z - (intercept + slope * t);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt()
        / mz.abs().max(1e-300);
    Ok(Some(BlowupFit { t_fit, window: (ts[0], *ts.last().unwrap()), rms, points: ts.len() }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Event {
    BlowupDetected { t_detect: f64, fit: BlowupFit },
    NewtonRetry { t: f64, dt: f64 },
}

/// Time-integration record: norm traces on a log-spaced schedule, snapshots
/// at requested times, the full sup-norm history, and the event log.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Trace times, starting at t = 0.
    pub times: Vec<f64>,
    pub norm_1r: Vec<f64>,
    pub norm_inf_r: Vec<f64>,
    /// Lumped Σ mass_i u_i, the exactly conserved discrete ∫ u ρ dx.
    pub weighted_mass: Vec<f64>,
    /// Lumped Σ mass_i Φ_α(y_i) |u_i|.
    pub l1_phi_alpha: Vec<f64>,
    pub snapshots: Vec<(f64, GridFunction)>,
    /// (t, sup |u|) at every accepted step.
    pub sup_trace: Vec<(f64, f64)>,
    pub dt_history: Vec<(f64, f64)>,
    pub events: Vec<Event>,
    pub final_state: GridFunction,
    pub final_time: f64,
    pub blowup: Option<BlowupFit>,
}

impl Trajectory {
    /// State at a recorded snapshot time.
    pub fn snapshot_at(&self, t: f64) -> Option<&GridFunction> {
        self.snapshots
            .iter()
            .find(|(s, _)| (s - t).abs() <= 1e-9 * (1.0 + t.abs()))
            .map(|(_, f)| f)
    }
}

/// Integrates to `t_end`, a blow-up detection, or an unrecoverable failure.
pub fn solve(
    params: &ProblemParams,
    u0: &GridFunction,
    t_end: f64,
    bc: &BoundaryCondition,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("t_end must be positive, got {t_end}")));
    }
    if opts.blowup_factor <= 1.0 {
        return Err(Error::invalid(format!(
            "blow-up factor must exceed 1 so the threshold clears the initial sup norm, got {}",
            opts.blowup_factor
        )));
    }
    if !u0.is_finite() {
        return Err(Error::invalid("initial datum contains non-finite values"));
    }
    let grid = &u0.grid;
    let m = params.m;
    let phi = PhiAlpha::new(opts.trace_alpha)?;
    let initial_sup = u0.max_abs();
    let threshold = opts.blowup_factor * initial_sup.max(1e-300);

    // Event times: log-spaced traces plus requested snapshots, hit exactly.
    let mut trace_times = Vec::new();
    if opts.trace_points > 0 {
        let t_lo = (t_end * 1e-4).max(opts.dt_init);
        for k in 0..opts.trace_points {
            let f = k as f64 / (opts.trace_points - 1).max(1) as f64;
            trace_times.push(t_lo * (t_end / t_lo).powf(f));
        }
    }
    let mut event_times: Vec<f64> = trace_times
        .iter()
        .chain(opts.output_times.iter())
        .copied()
        .filter(|&t| t > 0.0 && t <= t_end * (1.0 + 1e-12))
        .collect();
    event_times.push(t_end);
    event_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    event_times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t_end);

    let is_near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
    let mut traj = Trajectory {
        times: Vec::new(),
        norm_1r: Vec::new(),
        norm_inf_r: Vec::new(),
        weighted_mass: Vec::new(),
        l1_phi_alpha: Vec::new(),
        snapshots: Vec::new(),
        sup_trace: vec![(0.0, initial_sup)],
        dt_history: Vec::new(),
        events: Vec::new(),
        final_state: u0.clone(),
        final_time: 0.0,
        blowup: None,
    };
    let record_traces = |traj: &mut Trajectory, t: f64, u: &GridFunction| -> Result<()> {
        traj.times.push(t);
        traj.norm_1r.push(norm_1r(u, m, opts.trace_r)?.value);
        traj.norm_inf_r.push(norm_inf_r(u, m, opts.trace_r)?.value);
        traj.weighted_mass.push(u.lumped_weighted_sum());
        traj.l1_phi_alpha.push(
            u.values
                .iter()
                .zip(&u.grid.nodes)
                .zip(&u.grid.cell_weight_mass)
                .map(|((&v, &y), &mass)| v.abs() * phi.eval(y) * mass)
                .sum(),
        );
        Ok(())
    };
    record_traces(&mut traj, 0.0, u0)?;

    let mut u = u0.clone();
    let mut t = 0.0;
    let mut dt = opts.dt_init.min(opts.dt_max);
    let mut next_event = 0usize;
    let mut running_fit: Option<f64> = None;
    let mut steps = 0usize;
    const MAX_STEPS: usize = 400_000;

    while t < t_end * (1.0 - 1e-12) {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::numeric(format!("exceeded {MAX_STEPS} steps at t = {t}")));
        }
        while next_event < event_times.len() && event_times[next_event] <= t * (1.0 + 1e-12) {
            next_event += 1;
        }
        let target = event_times.get(next_event).copied().unwrap_or(t_end);

        let mut dt_try = dt.min(opts.dt_max).min(target - t);
        if let Some(h) = bc.horizon() {
            // Never step onto the boundary-data singularity.
            dt_try = dt_try.min(0.5 * (h - t));
            if dt_try <= 0.0 {
                return Err(Error::numeric(format!(
                    "boundary data horizon {h} reached at t = {t} without blow-up detection"
                )));
            }
        }
        if let Some(t_fit) = running_fit {
            if t_fit > t {
                dt_try = dt_try.min(opts.controller.blowup_dt_frac * (t_fit - t)).max(1e-14 * t_end);
            }
        }

        // Attempt the step, halving dt on Newton failure.
        let mut attempt = dt_try;
        let (new_u, iters) = loop {
            let g = bc_value(bc, params, t + attempt, grid.r_max(), u.values[u.values.len() - 1])
                .map_err(|e| Error::numeric(format!("boundary evaluation failed: {e}")))?;
            let bcv = match bc {
                BoundaryCondition::ZeroFlux => BcValue::ZeroFlux,
                _ => BcValue::Dirichlet(g),
            };
            match step_implicit(params, &u, attempt, &bcv, opts) {
                Ok(ok) => break ok,
                Err(Error::Numeric(_)) if attempt > 1e-13 * t_end => {
                    traj.events.push(Event::NewtonRetry { t, dt: attempt });
                    attempt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };

        let sup = new_u.max_abs();
        let rel_change = u
            .values
            .iter()
            .zip(&new_u.values)
            .map(|(&a, &b)| (b - a).abs())
            .fold(0.0f64, f64::max)
            / (1.0 + sup);
        t += attempt;
        u = new_u;
        traj.sup_trace.push((t, sup));
        traj.dt_history.push((t, attempt));

        if next_event < event_times.len() && is_near(t, event_times[next_event]) {
            t = event_times[next_event];
            record_traces(&mut traj, t, &u)?;
            if opts.output_times.iter().any(|&s| is_near(t, s)) {
                traj.snapshots.push((t, u.clone()));
            }
            next_event += 1;
        }

        if sup >= threshold {
            let (ts, ss): (Vec<f64>, Vec<f64>) = traj.sup_trace.iter().copied().unzip();
            let fit = detect_blowup(&ts, &ss, m, threshold, opts.fit_window)?
                .expect("threshold crossing implies a detection");
            traj.events.push(Event::BlowupDetected { t_detect: t, fit });
            traj.blowup = Some(fit);
            break;
        }

        // Maintain a running horizon estimate once the trace has grown.
        if sup >= 4.0 * initial_sup.max(1e-300) && steps.is_multiple_of(5) {
            let (ts, ss): (Vec<f64>, Vec<f64>) = traj.sup_trace.iter().copied().unzip();
            if let Ok(Some(fit)) = detect_blowup(&ts, &ss, m, sup, opts.fit_window) {
                if fit.t_fit > t {
                    running_fit = Some(fit.t_fit);
                }
            }
        }

        if opts.controller.adaptive {
            if iters <= opts.controller.target_newton_lo {
                dt = (attempt * opts.controller.grow).min(opts.dt_max);
            } else if iters >= opts.controller.target_newton_hi {
                dt = attempt * opts.controller.shrink;
            } else {
                dt = attempt;
            }
            if rel_change > opts.controller.max_rel_change {
                dt *= 0.5;
            }
        } else {
            dt = opts.dt_init;
        }
    }

    traj.final_state = u;
    traj.final_time = t;
    Ok(traj)
}
