//! The named verification experiments.
//!
//! Every experiment is a pure function of (config, seed): it builds its own
//! meshes, runs the kernels at desk scale, and returns a report whose
//! assertions pin the claims under test with explicit bounds. Randomized
//! trials draw from a counter-seeded generator so reports are reproducible.

use std::path::Path;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid};
use crate::model::{existence_time, ProblemParams};
use crate::norms::{
    cutoff_norm_pr, ell_tail, limsup_rate, norm_1r, norm_inf_r, norm_phi_alpha, norm_pr,
    CutoffProfile, PhiAlpha,
};
use crate::profiles::{compact_profile, shoot_profile, ExplicitFamily, ShootOptions};
use crate::solver::{solve, BoundaryCondition, SolverOptions, Trajectory};

use super::config::ExperimentConfig;
use super::report::{Artifacts, ExperimentReport};

pub const EXPERIMENT_NAMES: &[&str] = &[
    "explicit_convergence",
    "smoothing",
    "contraction_ordering",
    "blowup",
    "bc_monotonicity",
    "norm_suite",
];

pub fn run_experiment(
    name: &str,
    cfg: &ExperimentConfig,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<ExperimentReport> {
    match name {
        "explicit_convergence" => exp_explicit_convergence(cfg, seed, out_dir),
        "smoothing" => exp_smoothing(cfg, seed, out_dir),
        "contraction_ordering" => exp_contraction_ordering(cfg, seed, out_dir),
        "blowup" => exp_blowup(cfg, seed, out_dir),
        "bc_monotonicity" => exp_bc_monotonicity(cfg, seed, out_dir),
        "norm_suite" => exp_norm_suite(cfg, seed, out_dir),
        "calibrate" => calibrate_existence_constant(cfg, seed, out_dir),
        other => Err(Error::config(format!(
            "unknown experiment `{other}`; known: {EXPERIMENT_NAMES:?} and `calibrate`"
        ))),
    }
}

/// Runs every named experiment, in parallel, with per-experiment seeds
/// derived from the base seed so results do not depend on scheduling.
pub fn run_all(
    cfg: &ExperimentConfig,
    seed: u64,
    out_dir: Option<&Path>,
) -> Vec<(String, Result<ExperimentReport>)> {
    EXPERIMENT_NAMES
        .par_iter()
        .enumerate()
        .map(|(i, name)| {
            let sub_seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1));
            let sub_dir = out_dir.map(|d| d.join(name));
            (
                name.to_string(),
                run_experiment(name, cfg, sub_seed, sub_dir.as_deref()),
            )
        })
        .collect()
}

fn max_rel_err(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| (x - y).abs() / y.abs().max(1e-300))
        .fold(0.0, f64::max)
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (num, den) = xs
        .iter()
        .zip(ys)
        .fold((0.0, 0.0), |(num, den), (&x, &y)| {
            (num + (x - mx) * (y - my), den + (x - mx) * (x - mx))
        });
    num / den
}

/// Convergence against the explicit pure-power solution: base-run accuracy,
/// second order in space, first order in time.
pub fn exp_explicit_convergence(
    cfg: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("explicit_convergence", seed);
    let mut art = Artifacts::new(out);
    let params = cfg.problem_params()?;
    let family = ExplicitFamily::new(
        &params,
        cfg.datum.a.unwrap_or(1.0),
        cfg.datum.b.unwrap_or(1.0 / 6.0),
    )?;
    let r_max = cfg.grid.r_max.unwrap_or(50.0);
    let cells = cfg.grid.cells.unwrap_or(400);
    let t_end = cfg.solver.t_end.unwrap_or(0.5);
    if t_end >= family.t_horizon {
        return Err(Error::config(format!(
            "t_end = {t_end} is past the family horizon {}",
            family.t_horizon
        )));
    }
    rep.input("kappa", family.kappa);
    rep.input("t_horizon", family.t_horizon);
    rep.input("grid", format!("r_max={r_max}, cells={cells}"));
    rep.input("t_end", t_end);

    // Base run with the adaptive controller.
    let bc = BoundaryCondition::DirichletExplicit(family);
    let grid = RadialGrid::build(&params, r_max, cells, 1.0)?;
    let u0 = family.datum(&grid);
    let mut opts = cfg.solver_options();
    opts.dt_max = cfg.solver.dt_max.unwrap_or(2e-3);
    opts.trace_points = 16;
    let traj = solve(&params, &u0, t_end, &bc, &opts)?;
    let exact = family.sample(&grid, t_end)?;
    let err = max_rel_err(&traj.final_state, &exact);
    rep.check_le(
        "explicit-reproduction",
        "closed-form blow-up family reproduced at t_end",
        err,
        0.02,
    );
    art.grid_csv("final_state.csv", &traj.final_state)?;
    art.grid_csv("final_exact.csv", &exact)?;
    art.traces_json("traces.json", &traj)?;

    // Spatial order at a time step small enough to be invisible. The error
    // is measured away from the coordinate origin: the polar node pairs the
    // singular weight with the family's kinked profile (u'(0+) > 0), which
    // makes that single half-cell locally first order while the rest of the
    // mesh is second order. The all-node error still enters the 2% check.
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for m in [(cells / 8).max(16), (cells / 4).max(32), (cells / 2).max(64)] {
        let g = RadialGrid::build(&params, r_max, m, 1.0)?;
        let mut o = SolverOptions::fixed_dt(1.25e-5);
        o.trace_points = 0;
        let t = solve(&params, &family.datum(&g), t_end, &bc, &o)?;
        let exact = family.sample(&g, t_end)?;
        let e_interior = g
            .nodes
            .iter()
            .zip(&t.final_state.values)
            .zip(&exact.values)
            .filter(|((&y, _), _)| y >= 1.0)
            .map(|((_, &a), &b)| (a - b).abs() / b.abs())
            .fold(0.0f64, f64::max);
        hs.push((r_max / m as f64).ln());
        errs.push(e_interior.ln());
        rep.quantity(format!("spatial_err_interior_m{m}"), e_interior);
        rep.quantity(
            format!("spatial_err_all_m{m}"),
            max_rel_err(&t.final_state, &exact),
        );
    }
    let spatial_slope = ls_slope(&hs, &errs);
    rep.check_range(
        "spatial-order",
        "flux scheme converges at second order in mesh width away from the origin cell",
        spatial_slope,
        1.7,
        2.3,
    );

    // Temporal order against a fine-step reference on the same mesh, which
    // cancels the spatial error exactly.
    let mut o_ref = SolverOptions::fixed_dt(2.5e-4);
    o_ref.trace_points = 0;
    let reference = solve(&params, &u0, t_end, &bc, &o_ref)?;
    let scale = reference.final_state.max_abs();
    let mut dts = Vec::new();
    let mut terrs = Vec::new();
    for dt in [8e-3, 4e-3, 2e-3] {
        let mut o = SolverOptions::fixed_dt(dt);
        o.trace_points = 0;
        let t = solve(&params, &u0, t_end, &bc, &o)?;
        let e = t
            .final_state
            .values
            .iter()
            .zip(&reference.final_state.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            / scale;
        dts.push(dt.ln());
        terrs.push(e.ln());
        rep.quantity(format!("temporal_err_dt{dt}"), e);
    }
    let temporal_slope = ls_slope(&dts, &terrs);
    rep.check_range(
        "temporal-order",
        "backward Euler converges at first order in the time step",
        temporal_slope,
        0.8,
        1.2,
    );
    rep.quantity("spatial_slope", spatial_slope);
    rep.quantity("temporal_slope", temporal_slope);
    rep.artifacts = art.paths;
    Ok(rep)
}

/// Instantaneous L¹→L∞ smoothing: the ratio ‖u(t)‖_{∞,r} t^{λ₁} / ‖u₀‖_{1,r}^{θλ₁}
/// stays bounded on (0, T_r) with an empirical constant stable under mesh
/// refinement and under truncation of critical-growth data.
pub fn exp_smoothing(cfg: &ExperimentConfig, seed: u64, out: Option<&Path>) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("smoothing", seed);
    let mut art = Artifacts::new(out);
    let params = cfg.problem_params()?;
    let e = params.exponents();
    let r = cfg.norm_r();
    let m = params.m;

    // The estimates hold on a window (0, c₁/‖u₀‖^{m-1}) with a small proof
    // constant c₁. Critical-growth data genuinely blow up at roughly
    // 0.7–1.0 / ‖u₀‖^{m-1} (the measured existence-time bracket), so the
    // smoothing window constant must sit well below that; two decades of t
    // inside c₁ = 0.05 keep the empirical constants in the uniform regime.
    const C1_WINDOW: f64 = 0.05;
    rep.input("c1_window", C1_WINDOW);
    let run = |u0: &GridFunction| -> Result<(f64, f64, Trajectory)> {
        let norm0 = norm_1r(u0, m, r)?.value;
        if norm0 <= 0.0 {
            return Err(Error::invalid("smoothing experiment rejects data with zero ‖·‖_{1,r} norm"));
        }
        let t_end = existence_time(norm0, m, C1_WINDOW);
        let mut opts = cfg.solver_options();
        opts.trace_points = 33;
        opts.dt_init = 1e-4 * t_end;
        opts.dt_max = t_end / 50.0;
        let traj = solve(&params, u0, t_end, &BoundaryCondition::ZeroFlux, &opts)?;
        let mut c2: f64 = 0.0;
        let mut c3: f64 = 0.0;
        for (i, &t) in traj.times.iter().enumerate() {
            // Constants taken over the last two decades of the window.
            if t < t_end / 100.0 {
                continue;
            }
            c2 = c2.max(traj.norm_1r[i] / norm0);
            c3 = c3.max(traj.norm_inf_r[i] * t.powf(e.lambda1) / norm0.powf(e.theta * e.lambda1));
        }
        Ok((c2, c3, traj))
    };

    // Integrable datum (configurable, compact source profile by default),
    // on the base and the refined mesh.
    let cells = cfg.grid.cells.unwrap_or(600);
    let g_base = cfg.build_grid(&params, 120.0, cells, 1.012)?;
    let g_fine = RadialGrid::build(&params, g_base.r_max(), 2 * cells, cfg.grid.stretch.unwrap_or(1.012))?;
    let (u_base, u_fine) = if cfg.datum.kind.is_some() {
        (cfg.build_datum(&params, &g_base)?, cfg.build_datum(&params, &g_fine)?)
    } else {
        (
            compact_profile(&params, &g_base, 1.0, 1.0, 1.0)?,
            compact_profile(&params, &g_fine, 1.0, 1.0, 1.0)?,
        )
    };
    let (c2_base, c3_base, traj) = run(&u_base)?;
    let (c2_fine, c3_fine, _) = run(&u_fine)?;
    rep.quantity("c2_compact", c2_base);
    rep.quantity("c3_compact", c3_base);
    rep.quantity("c2_compact_refined", c2_fine);
    rep.quantity("c3_compact_refined", c3_fine);
    rep.check_flag(
        "smoothing-ratio-finite",
        "sup-norm smoothing ratio is bounded over two decades of t",
        c3_base.is_finite() && c3_base > 0.0 && c2_base.is_finite(),
    );
    rep.check_le(
        "smoothing-stability-refinement",
        "empirical smoothing constant stable under one mesh refinement",
        (c3_fine / c3_base - 1.0).abs(),
        0.2,
    );
    rep.check_le(
        "l1-stability-refinement",
        "empirical growth-norm constant stable under one mesh refinement",
        (c2_fine / c2_base - 1.0).abs(),
        0.2,
    );
    art.traces_json("compact_traces.json", &traj)?;

    // Truncations of the critical-growth datum.
    let mut c3_by_n = Vec::new();
    for n in [10.0, 20.0, 40.0] {
        let datum = GridFunction::from_fn(&g_base, |y| if y < n { y.min(n) } else { 0.0 });
        let (_, c3, _) = run(&datum)?;
        rep.quantity(format!("c3_truncated_n{n}"), c3);
        c3_by_n.push(c3);
    }
    let spread = c3_by_n.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        / c3_by_n.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    rep.check_le(
        "smoothing-stability-truncation",
        "empirical smoothing constant stable across truncation indices",
        spread,
        1.2,
    );
    rep.artifacts = art.paths;
    Ok(rep)
}

fn random_bumps(grid: &Arc<RadialGrid>, rng: &mut StdRng, support: f64, nonneg: bool) -> GridFunction {
    let n_bumps = rng.gen_range(1..=3);
    let bumps: Vec<(f64, f64, f64)> = (0..n_bumps)
        .map(|_| {
            let amp = if nonneg { rng.gen_range(0.05..2.0) } else { rng.gen_range(-2.0..2.0) };
            (
                amp,
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

/// Discrete L¹(ρ) contraction, nodewise ordering, and the weighted-L¹
/// continuous-dependence form with the imposed exponent θλ₁.
pub fn exp_contraction_ordering(
    cfg: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("contraction_ordering", seed);
    let mut art = Artifacts::new(out);
    let params = cfg.problem_params()?;
    let e = params.exponents();
    let alpha = cfg.validated_alpha(&params)?;
    let phi = PhiAlpha::new(alpha)?;
    let grid = cfg.build_grid(&params, 10.0, 150, 1.0)?;
    let snapshot_times = vec![0.005, 0.01, 0.02, 0.04];
    let t_end = 0.04;
    let mut opts = SolverOptions::fixed_dt(2e-3);
    opts.output_times = snapshot_times.clone();
    opts.trace_points = 0;
    let bc = BoundaryCondition::ZeroFlux;
    let pairs = 20usize;
    let mut rng = StdRng::seed_from_u64(seed);

    let weighted_abs = |f: &GridFunction| f.lumped_weighted_abs();
    let phi_abs = |f: &GridFunction| -> f64 {
        f.values
            .iter()
            .zip(&f.grid.nodes)
            .zip(&f.grid.cell_weight_mass)
            .map(|((&v, &y), &mass)| v.abs() * phi.eval(y) * mass)
            .sum()
    };

    // Identical data give bitwise identical trajectories.
    let twin = random_bumps(&grid, &mut rng, 4.0, false);
    let ta = solve(&params, &twin, t_end, &bc, &opts)?;
    let tb = solve(&params, &twin, t_end, &bc, &opts)?;
    let twin_gap = weighted_abs(&ta.final_state.zip_map(&tb.final_state, |a, b| a - b));
    rep.check_le(
        "identical-pair",
        "identical data keep zero distance at all times",
        twin_gap,
        0.0,
    );

    // Random integrable pairs: contraction factor and the Φ_α growth form.
    let mut worst_factor: f64 = 0.0;
    let mut worst_phi_excess: f64 = 0.0;
    let mut c_fits = Vec::new();
    for _ in 0..pairs {
        let u0 = random_bumps(&grid, &mut rng, 4.0, false);
        let v0 = random_bumps(&grid, &mut rng, 4.0, false);
        let tu = solve(&params, &u0, t_end, &bc, &opts)?;
        let tv = solve(&params, &v0, t_end, &bc, &opts)?;
        let d0 = weighted_abs(&u0.zip_map(&v0, |a, b| a - b));
        let dphi0 = phi_abs(&u0.zip_map(&v0, |a, b| a - b));
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &t in &snapshot_times {
            let (su, sv) = match (tu.snapshot_at(t), tv.snapshot_at(t)) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            let diff = su.zip_map(sv, |a, b| a - b);
            worst_factor = worst_factor.max(weighted_abs(&diff) / d0);
            let ratio = phi_abs(&diff) / dphi0;
            xs.push(t.powf(e.theta * e.lambda1));
            ys.push(ratio.max(1e-300).ln());
        }
        // c fitted through the origin with the exponent θλ₁ imposed.
        let c = xs.iter().zip(&ys).map(|(&x, &y)| x * y).sum::<f64>()
            / xs.iter().map(|&x| x * x).sum::<f64>();
        c_fits.push(c);
        for (&x, &y) in xs.iter().zip(&ys) {
            worst_phi_excess = worst_phi_excess.max(y.exp() / (c.max(0.0) * x).exp());
        }
    }
    rep.quantity("c4_fit_mean", c_fits.iter().sum::<f64>() / c_fits.len() as f64);
    rep.check_le(
        "l1-contraction",
        "discrete L1(rho) distance never expands beyond Newton tolerance",
        worst_factor,
        1.0 + 1e-6,
    );
    rep.check_le(
        "phi-alpha-growth-form",
        "weighted-L1 distance obeys exp(c t^(theta lambda1)) with fitted c",
        worst_phi_excess,
        1.2,
    );

    // Ordered pairs stay ordered.
    let mut worst_violation: f64 = 0.0;
    for _ in 0..pairs {
        let base = random_bumps(&grid, &mut rng, 4.0, false);
        let bump = random_bumps(&grid, &mut rng, 4.0, true);
        let v0 = base.zip_map(&bump, |a, b| a + b);
        let tu = solve(&params, &base, t_end, &bc, &opts)?;
        let tv = solve(&params, &v0, t_end, &bc, &opts)?;
        let scale = 1.0 + tv.final_state.max_abs();
        for &t in &snapshot_times {
            if let (Some(su), Some(sv)) = (tu.snapshot_at(t), tv.snapshot_at(t)) {
                for (a, b) in su.values.iter().zip(&sv.values) {
                    worst_violation = worst_violation.max((a - b) / scale);
                }
            }
        }
    }
    rep.check_le(
        "ordering-random-pairs",
        "ordered data produce ordered discrete solutions",
        worst_violation,
        1e-8,
    );

    // Ordered separable boundary data from an ordered profile pair.
    let shoot_opts = ShootOptions::default();
    let lo = shoot_profile(&params, 1.0, 1.0, &grid, &shoot_opts)?;
    let hi = shoot_profile(&params, 2.0, 1.0, &grid, &shoot_opts)?;
    let tu = solve(&params, &lo.w(), t_end, &BoundaryCondition::separable(&lo, grid.r_max()), &opts)?;
    let tv = solve(&params, &hi.w(), t_end, &BoundaryCondition::separable(&hi, grid.r_max()), &opts)?;
    let mut worst_profile: f64 = 0.0;
    let scale = 1.0 + tv.final_state.max_abs();
    for &t in &snapshot_times {
        if let (Some(su), Some(sv)) = (tu.snapshot_at(t), tv.snapshot_at(t)) {
            for (a, b) in su.values.iter().zip(&sv.values) {
                worst_profile = worst_profile.max((a - b) / scale);
            }
        }
    }
    rep.check_le(
        "ordering-profile-pair",
        "separable solutions from ordered center values stay ordered",
        worst_profile,
        1e-8,
    );
    art.trajectory_csv("profile_pair_low.csv", &tu)?;
    rep.artifacts = art.paths;
    Ok(rep)
}

/// Blow-up: fitted horizon of separable runs, the sandwich comparison, and
/// the two-sided bracket for T · ℓ(W_β)^{m-1}.
pub fn exp_blowup(cfg: &ExperimentConfig, seed: u64, out: Option<&Path>) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("blowup", seed);
    let mut art = Artifacts::new(out);
    let params = cfg.problem_params()?;
    let m = params.m;
    let shoot_opts = ShootOptions::default();

    // Far mesh for tail functionals, solver mesh for time integration.
    let g_far = RadialGrid::build(&params, 1e3, 800, 1.02)?;
    let g_run = cfg.build_grid(&params, 15.0, 240, 1.005)?;
    let schedule = [4.0, 16.0, 64.0, 256.0, 500.0];

    // Sweep the (β, T) family: T · ℓ^{m-1} must sit in a stable bracket.
    let betas = [0.5, 1.0, 2.0, 4.0];
    let horizons = [0.5, 1.0, 2.0];
    let mut products = Vec::new();
    let mut ell_unit_beta = 0.0;
    for &beta in &betas {
        for &t_horizon in &horizons {
            let prof = shoot_profile(&params, beta, t_horizon, &g_far, &shoot_opts)?;
            let tail = ell_tail(&prof.w(), m, &schedule, 1e-3)?;
            let q = t_horizon * tail.limit_estimate.powf(m - 1.0);
            products.push(q);
            rep.quantity(format!("t_ell_product_beta{beta}_T{t_horizon}"), q);
            if beta == 1.0 && t_horizon == 1.0 {
                ell_unit_beta = tail.limit_estimate;
            }
        }
    }
    let (q_min, q_max) = products
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(q), hi.max(q)));
    rep.quantity("c_lower_bracket", q_min);
    rep.quantity("c_upper_bracket", q_max);
    rep.check_le(
        "existence-time-bracket",
        "T ell(W_beta)^(m-1) stable within a factor 2 across the family",
        q_max / q_min,
        2.0,
    );
    // The guaranteed-existence-time formula with the bracket midpoint
    // recovers the true horizon within the bracket spread.
    let c1_mid = (q_min * q_max).sqrt();
    let t_pred = existence_time(ell_unit_beta, m, c1_mid);
    rep.check_range(
        "existence-time-formula",
        "calibrated C1 / ell^(m-1) brackets the true horizon",
        t_pred,
        0.5,
        2.0,
    );

    // Main separable run: datum W_β, horizon T = 1.
    let prof = shoot_profile(&params, 1.0, 1.0, &g_run, &shoot_opts)?;
    art.profile_csv("profile_beta1.csv", &prof)?;
    let mut opts = cfg.solver_options();
    opts.output_times = vec![0.2, 0.4, 0.6, 0.8];
    let bc = BoundaryCondition::separable(&prof, g_run.r_max());
    let traj = solve(&params, &prof.w(), 1.0, &bc, &opts)?;
    let fit = traj
        .blowup
        .ok_or_else(|| Error::numeric("separable run did not reach the blow-up threshold"))?;
    rep.quantity("t_fit_main", fit.t_fit);
    rep.check_range(
        "blowup-time-main",
        "fitted blow-up time of the separable run matches the horizon",
        fit.t_fit,
        0.9,
        1.1,
    );
    art.traces_json("separable_traces.json", &traj)?;

    // Sandwich datum between two ordered profiles with the same horizon.
    let lo = shoot_profile(&params, 0.5, 1.0, &g_run, &shoot_opts)?;
    let hi = shoot_profile(&params, 2.0, 1.0, &g_run, &shoot_opts)?;
    let mid = lo.w().zip_map(&hi.w(), |a, b| 0.5 * (a + b));
    let bc_mid = BoundaryCondition::DirichletSeparable {
        w_outer: 0.5 * (lo.w_at(g_run.r_max()) + hi.w_at(g_run.r_max())),
        t_horizon: 1.0,
    };
    let traj_mid = solve(&params, &mid, 1.0, &bc_mid, &opts)?;
    let fit_mid = traj_mid
        .blowup
        .ok_or_else(|| Error::numeric("sandwich run did not reach the blow-up threshold"))?;
    rep.quantity("t_fit_sandwich", fit_mid.t_fit);
    rep.check_range(
        "blowup-time-sandwich",
        "sandwiched datum blows up at the shared horizon",
        fit_mid.t_fit,
        0.85,
        1.15,
    );
    let mut sandwich_excess: f64 = 0.0;
    for &(t, ref u) in &traj_mid.snapshots {
        let factor = lo.separable_factor(t)?;
        for ((&v, &wl), &wh) in u.values.iter().zip(&lo.w().values).zip(&hi.w().values) {
            let (floor, ceil) = (factor * wl, factor * wh);
            sandwich_excess = sandwich_excess.max((floor - v) / floor.abs().max(1e-300));
            sandwich_excess = sandwich_excess.max((v - ceil) / ceil.abs().max(1e-300));
        }
    }
    rep.check_ge(
        "sandwich-snapshots",
        "sandwich run recorded enough comparison snapshots",
        traj_mid.snapshots.len() as f64,
        3.0,
    );
    rep.check_le(
        "sandwich-comparison",
        "trajectory stays between the bounding separable solutions",
        sandwich_excess,
        0.05,
    );
    rep.artifacts = art.paths;
    Ok(rep)
}

/// Time-scaling monotonicity: t^{1/(m-1)} u(y, t) is nondecreasing along
/// nonnegative zero-flux runs.
pub fn exp_bc_monotonicity(
    cfg: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("bc_monotonicity", seed);
    let mut art = Artifacts::new(out);
    let params = cfg.problem_params()?;
    let m = params.m;
    let grid = cfg.build_grid(&params, 12.0, 150, 1.0)?;
    let t_end = 0.3;
    let snapshot_times: Vec<f64> = (0..16)
        .map(|k| 3e-3 * (t_end / 3e-3_f64).powf(k as f64 / 15.0))
        .collect();
    let mut opts = cfg.solver_options();
    opts.output_times = snapshot_times;
    opts.trace_points = 8;

    let fam = ExplicitFamily::new(&params, 1.0, 1.0 / 6.0)?;
    let families: Vec<(&str, GridFunction)> = vec![
        ("compact", compact_profile(&params, &grid, 1.0, 1.0, 1.0)?),
        ("constant", GridFunction::constant(&grid, 0.7)),
        ("explicit-datum", fam.datum(&grid)),
    ];
    for (name, u0) in families {
        let traj = solve(&params, &u0, t_end, &BoundaryCondition::ZeroFlux, &opts)?;
        let scale = traj
            .snapshots
            .iter()
            .map(|(_, f)| f.max_abs())
            .fold(0.0f64, f64::max);
        let mut worst: f64 = 0.0;
        for pair in traj.snapshots.windows(2) {
            let (t1, ref f1) = pair[0];
            let (t2, ref f2) = pair[1];
            let (s1, s2) = (t1.powf(1.0 / (m - 1.0)), t2.powf(1.0 / (m - 1.0)));
            for (a, b) in f1.values.iter().zip(&f2.values) {
                worst = worst.max(s1 * a - s2 * b);
            }
        }
        rep.quantity(format!("worst_violation_{name}"), worst);
        rep.check_le(
            format!("time-scaling-monotonicity-{name}"),
            "t^(1/(m-1)) u is nondecreasing nodewise on zero-flux runs",
            worst,
            1e-6 * scale,
        );
        if name == "compact" {
            art.trajectory_csv("compact_snapshots.csv", &traj)?;
        }
    }
    rep.artifacts = art.paths;
    Ok(rep)
}

/// Norm machinery property battery: closed forms, norm equivalence, the
/// Φ_α embedding, tail dichotomy, the far-field sup identity, and the
/// exponent identity.
pub fn exp_norm_suite(cfg: &ExperimentConfig, seed: u64, _out: Option<&Path>) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("norm_suite", seed);
    let params = cfg.problem_params()?;
    let m = params.m;
    let alpha = cfg.validated_alpha(&params)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let g_main = cfg.build_grid(&params, 100.0, 800, 1.01)?;
    let g_tail = RadialGrid::build(&params, 256.0, 900, 1.015)?;
    let g_far = RadialGrid::build(&params, 1000.0, 900, 1.012)?;

    // Closed-form norms of the power family on the workhorse parameters.
    if params.dim == 3 && params.gamma() == 1.0 && m == 2.0 {
        use std::f64::consts::PI;
        let mut worst: f64 = 0.0;
        for s in [0.0, 0.5, 1.0] {
            let f = GridFunction::from_fn(&g_main, |y| y.powf(s));
            let n1 = norm_1r(&f, m, 1.0)?.value;
            let exact1 = 4.0 * PI / (s + 2.0);
            let n2 = norm_pr(&f, m, 2.0, 1.0)?.value;
            let exact2 = (4.0 * PI / (2.0 * s + 2.0)).sqrt();
            let ninf = norm_inf_r(&f, m, 1.0)?.value;
            worst = worst
                .max((n1 - exact1).abs() / exact1)
                .max((n2 - exact2).abs() / exact2)
                .max((ninf - 1.0).abs());
        }
        rep.check_le(
            "power-family-closed-forms",
            "growth norms of power data match their closed forms",
            worst,
            5e-3,
        );
    }

    // Equivalence of the plain and cut-off norms on random data.
    let phi = CutoffProfile::standard();
    let p_cfg = cfg.norms.p.unwrap_or(2.0);
    let mut sandwich_ok = true;
    for _ in 0..100 {
        let f = random_bumps(&g_main, &mut rng, 14.0, false);
        for p in [1.0, p_cfg] {
            let plain = norm_pr(&f, m, p, 1.0)?.value;
            let cut = cutoff_norm_pr(&f, m, p, 1.0, &phi)?.value;
            let g = params.gamma();
            let factor = 2f64.powf((2.0 - g) / (m - 1.0) + (params.dim as f64 - g) / p);
            sandwich_ok &= plain <= cut * (1.0 + 1e-12) && cut <= factor * plain * (1.0 + 1e-12);
        }
    }
    rep.check_flag(
        "cutoff-equivalence",
        "plain and cut-off norms are equivalent with the dyadic constant",
        sandwich_ok,
    );

    // Embedding into L¹(Φ_α) with the explicit constant.
    let g = params.gamma();
    let omega = (2.0 - g) / (m - 1.0) + params.dim as f64 - g;
    let mut min_slack = f64::INFINITY;
    for _ in 0..20 {
        let base = random_bumps(&g_main, &mut rng, 20.0, false);
        let slope = rng.gen_range(0.0..0.5);
        let f = GridFunction::from_fn(&g_main, |y| base.value_at(y) + slope * y);
        let lhs = norm_phi_alpha(&f, m, alpha)?.value;
        let n1 = norm_1r(&f, m, 1.0)?.value;
        let bound = (1.0 + 2.0 * alpha / (2.0 * alpha - omega)) * n1;
        min_slack = min_slack.min((bound - lhs) / bound);
    }
    rep.check_ge(
        "phi-alpha-embedding",
        "growth norm controls the L1(Phi_alpha) norm with the explicit constant",
        min_slack,
        0.0,
    );

    // Tail dichotomy: constants vanish, critical growth persists.
    let schedule = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0];
    let one = ell_tail(&GridFunction::constant(&g_tail, 1.0), m, &schedule, 1e-3)?;
    let lin = ell_tail(&GridFunction::from_fn(&g_tail, |y| y), m, &schedule, 1e-3)?;
    rep.check_flag(
        "tail-dichotomy",
        "tail functional vanishes for constants and persists for critical growth",
        one.in_x0 && !lin.in_x0,
    );
    rep.quantity("ell_critical", lin.limit_estimate);

    // Far-field sup identity.
    let osc = GridFunction::from_fn(&g_far, |y| y + y.sin());
    let rate = limsup_rate(&osc, m)?;
    rep.check_le(
        "limsup-identity",
        "tail of the sup norm equals the essential far-field ratio",
        (rate.norm_tail - rate.farfield_ratio).abs().max((rate.norm_tail - 1.0).abs()),
        0.02,
    );

    // Exponent identity over randomized parameter triples.
    let mut worst_identity: f64 = 0.0;
    for _ in 0..1000 {
        let dim = rng.gen_range(3u32..12);
        let mm = rng.gen_range(1.0001..6.0);
        let gg = rng.gen_range(0.0..1.999);
        let p = ProblemParams::new(dim, mm, crate::model::WeightSpec::pure_power(gg)?)?;
        let e = p.exponents();
        worst_identity = worst_identity.max((e.theta * e.lambda1 + e.lambda1 * (mm - 1.0) - 1.0).abs());
    }
    rep.check_le(
        "exponent-identity",
        "theta lambda1 + lambda1 (m-1) = 1 to machine precision",
        worst_identity,
        1e-14,
    );
    Ok(rep)
}

/// Brackets the existence-time constant empirically: every (β, T) profile
/// yields one sample T_fit · ℓ(W_β)^{m-1} from a measured blow-up.
pub fn calibrate_existence_constant(
    cfg: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("calibrate", seed);
    let art = Artifacts::new(out);
    let params = cfg.problem_params()?;
    let m = params.m;
    let shoot_opts = ShootOptions::default();
    let g_far = RadialGrid::build(&params, 1e3, 800, 1.02)?;
    let g_run = cfg.build_grid(&params, 15.0, 240, 1.005)?;
    let schedule = [4.0, 16.0, 64.0, 256.0, 500.0];
    let mut samples = Vec::new();
    for beta in [0.5, 1.0, 2.0, 4.0] {
        for t_horizon in [0.5, 1.0, 2.0] {
            let far = shoot_profile(&params, beta, t_horizon, &g_far, &shoot_opts)?;
            let ell = ell_tail(&far.w(), m, &schedule, 1e-3)?.limit_estimate;
            let prof = shoot_profile(&params, beta, t_horizon, &g_run, &shoot_opts)?;
            let bc = BoundaryCondition::separable(&prof, g_run.r_max());
            let opts = cfg.solver_options();
            let traj = solve(&params, &prof.w(), t_horizon, &bc, &opts)?;
            let fit = traj.blowup.ok_or_else(|| {
                Error::numeric(format!("run (beta={beta}, T={t_horizon}) did not blow up"))
            })?;
            rep.check_range(
                format!("blowup-detected-beta{beta}-T{t_horizon}"),
                "separable run blows up at its horizon",
                fit.t_fit / t_horizon,
                0.85,
                1.15,
            );
            samples.push(fit.t_fit * ell.powf(m - 1.0));
        }
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(q), hi.max(q)));
    rep.quantity("c1_bracket_lo", lo);
    rep.quantity("c1_bracket_hi", hi);
    rep.quantity("c1_geometric_mid", (lo * hi).sqrt());
    rep.artifacts = art.paths;
    Ok(rep)
}
