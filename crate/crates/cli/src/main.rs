//! `wpme` — drive the weighted porous-medium lab from the command line.
//!
//! Subcommands: `solve` (time integration with CSV/JSON artifacts),
//! `profile` (elliptic shooting), `norms` (norm property battery),
//! `experiment <name|all>` (named verification experiments), `calibrate`
//! (empirical bracketing of the existence-time constant).
//!
//! Exit codes: 0 all assertions passed, 1 an assertion failed, 2 usage or
//! configuration error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wpme_core::harness::report::Artifacts;
use wpme_core::harness::{run_experiment, ExperimentConfig, EXPERIMENT_NAMES};
use wpme_core::profiles::{calibrate_barrier, shoot_profile, ExplicitFamily, ShootOptions};
use wpme_core::solver::{solve, BoundaryCondition};
use wpme_core::{Error, Result};

#[derive(Parser)]
#[command(name = "wpme", version, about = "Radial finite-volume lab for the weighted porous medium equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (falls back to $WPME_OUT_DIR, then the config's
    /// `[output]` dir, then ./wpme_out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized property trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Thread budget for the experiment pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one initial-value problem and write snapshot/trace artifacts.
    Solve,
    /// Shoot the radial elliptic profile and write radius,w,v samples.
    Profile,
    /// Run the weighted-norm property battery.
    Norms,
    /// Run a named verification experiment, or `all`.
    Experiment { name: String },
    /// Bracket the existence-time constant from blow-up sweeps.
    Calibrate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numeric(_) => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("cannot size the thread pool: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("WPME_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("wpme_out"));
    std::fs::create_dir_all(&out)?;

    match &cli.command {
        Command::Solve => cmd_solve(&cfg, &out),
        Command::Profile => cmd_profile(&cfg, &out),
        Command::Norms => cmd_report(&cfg, "norm_suite", cli.seed, &out),
        Command::Experiment { name } if name == "all" => cmd_all(&cfg, cli.seed, &out),
        Command::Experiment { name } => cmd_report(&cfg, name, cli.seed, &out),
        Command::Calibrate => cmd_report(&cfg, "calibrate", cli.seed, &out),
    }
}

fn cmd_solve(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<ExitCode> {
    let params = cfg.problem_params()?;
    let grid = cfg.build_grid(&params, 50.0, 400, 1.0)?;
    let datum = cfg.build_datum(&params, &grid)?;
    let opts = cfg.solver_options();
    let bc = match cfg.solver.bc.as_deref().unwrap_or("zero_flux") {
        "zero_flux" => BoundaryCondition::ZeroFlux,
        "dirichlet_explicit" => BoundaryCondition::DirichletExplicit(ExplicitFamily::new(
            &params,
            cfg.datum.a.unwrap_or(1.0),
            cfg.datum.b.unwrap_or(1.0 / 6.0),
        )?),
        "dirichlet_separable" => {
            let prof = shoot_profile(
                &params,
                cfg.datum.beta.unwrap_or(1.0),
                cfg.datum.t_horizon.unwrap_or(1.0),
                &grid,
                &ShootOptions::default(),
            )?;
            BoundaryCondition::separable(&prof, grid.r_max())
        }
        "dirichlet_barrier" => {
            BoundaryCondition::DirichletBarrier(calibrate_barrier(&params, &datum, cfg.norm_r())?)
        }
        other => return Err(Error::config(format!("unknown boundary mode `{other}`"))),
    };
    let t_end = cfg.solver.t_end.unwrap_or(0.5);
    let traj = solve(&params, &datum, t_end, &bc, &opts)?;

    let mut art = Artifacts::new(Some(out));
    art.grid_csv("datum.csv", &datum)?;
    art.grid_csv("final_state.csv", &traj.final_state)?;
    art.trajectory_csv("snapshots.csv", &traj)?;
    art.traces_json("traces.json", &traj)?;
    println!(
        "integrated to t = {:.6} in {} steps; {} event(s) logged",
        traj.final_time,
        traj.dt_history.len(),
        traj.events.len()
    );
    if let Some(fit) = traj.blowup {
        println!("blow-up detected: fitted horizon {:.6} (window {:?})", fit.t_fit, fit.window);
    }
    for path in art.paths {
        println!("wrote {}", out.join(path).display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_profile(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<ExitCode> {
    let params = cfg.problem_params()?;
    let grid = cfg.build_grid(&params, 1e3, 800, 1.02)?;
    let prof = shoot_profile(
        &params,
        cfg.datum.beta.unwrap_or(1.0),
        cfg.datum.t_horizon.unwrap_or(1.0),
        &grid,
        &ShootOptions::default(),
    )?;
    let mut art = Artifacts::new(Some(out));
    art.profile_csv("profile.csv", &prof)?;
    println!(
        "profile beta = {}, horizon = {}: {} Picard sweeps, residual {:.3e}, far-field slope {:.4}",
        prof.beta, prof.t_horizon, prof.picard_iters, prof.residual, prof.asymptotic_slope
    );
    for path in art.paths {
        println!("wrote {}", out.join(path).display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(cfg: &ExperimentConfig, name: &str, seed: u64, out: &std::path::Path) -> Result<ExitCode> {
    let dir = out.join(name);
    let report = run_experiment(name, cfg, seed, Some(&dir))?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    let path = dir.join("report.json");
    report.write(&path)?;
    println!("wrote {}", path.display());
    println!("[{}] experiment {name}", if report.passed { "PASS" } else { "FAIL" });
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_all(cfg: &ExperimentConfig, seed: u64, out: &std::path::Path) -> Result<ExitCode> {
    let results = wpme_core::harness::run_all(cfg, seed, Some(out));
    let mut all_pass = true;
    for (name, result) in results {
        {
            let report = result?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            report.write(out.join(&name).join("report.json"))?;
            println!("[{}] experiment {name}", if report.passed { "PASS" } else { "FAIL" });
            all_pass &= report.passed;
        }
    }
    let _ = EXPERIMENT_NAMES;
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
