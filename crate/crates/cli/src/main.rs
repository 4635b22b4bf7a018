mod args;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use udw_witness::field::{mode_function, ModeSpec};
use udw_witness::oracle::{run_suite, SuiteConfig};
use udw_witness::response::{ChiMethod, QuadratureOptions};
use udw_witness::scan::{self, AveragingWindow, ScanPoint};
use udw_witness::witness::{
    uniform_grid, violation_metrics, witness_series, witness_series_for_mode, SeriesOptions,
    StateSpec,
};
use udw_witness::{CavityConfig64, CouplingSpec64, Error, Result, TrajectorySpec64};

use args::{Cli, Command, Physics, TrajArg};

fn exit_code(e: &Error) -> u8 {
    if e.is_invalid_parameter() {
        2
    } else {
        3
    }
}

struct Setup {
    cavity: CavityConfig64,
    coupling: CouplingSpec64,
    opts: SeriesOptions<f64>,
}

fn setup(p: &Physics) -> Result<Setup> {
    if !(p.tol > 0.0) {
        return Err(Error::InvalidParameter {
            field: "tol",
            reason: format!("tolerance must be > 0, got {}", p.tol),
        });
    }
    if p.jobs == Some(0) {
        return Err(Error::InvalidParameter {
            field: "jobs",
            reason: "need at least one worker".into(),
        });
    }
    let cavity = match p.x0 {
        Some(x0) => CavityConfig64::new(p.length, p.m, p.k0, x0)?,
        None => CavityConfig64::at_antinode(p.length, p.m, p.k0)?,
    };
    let lambda = p.lambda.unwrap_or(2.0 * f64::from(p.k0).sqrt());
    let method = if p.force_quadrature {
        ChiMethod::ForceQuadrature
    } else {
        ChiMethod::Auto
    };
    Ok(Setup {
        cavity,
        coupling: CouplingSpec64::new(lambda)?,
        opts: SeriesOptions {
            method,
            quadrature: QuadratureOptions::with_tol(p.tol),
        },
    })
}

fn trajectory(t: TrajArg, cavity: &CavityConfig64) -> Result<TrajectorySpec64> {
    match t {
        TrajArg::Static => TrajectorySpec64::fixed(cavity.x0, cavity.length),
        TrajArg::Inertial(v) => TrajectorySpec64::inertial(v, cavity.x0, cavity.length),
        TrajArg::Accel(a) => TrajectorySpec64::accelerated(a, cavity.x0, cavity.length),
    }
}

fn emit(p: &Physics, text: &str) -> std::result::Result<(), (u8, String)> {
    let io = |e: std::io::Error| (3, format!("cannot write output: {e}"));
    match &p.out {
        Some(path) => std::fs::write(path, text).map_err(io),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(io)
        }
    }
}

fn install_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // only fails if a pool already exists, in which case it is reused
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

type CmdResult = std::result::Result<(), (u8, String)>;

fn fail(e: Error) -> (u8, String) {
    (exit_code(&e), e.to_string())
}

fn cmd_witness(a: &args::WitnessArgs) -> CmdResult {
    let s = setup(&a.physics).map_err(fail)?;
    install_jobs(a.physics.jobs);
    let state = StateSpec::new(a.state, a.physics.k0).map_err(fail)?;
    let traj = trajectory(a.traj, &s.cavity).map_err(fail)?;
    let taus = uniform_grid(a.tau_max, a.samples).map_err(fail)?;
    let series = match a.omega_override {
        None => witness_series(&state, &s.cavity, &s.coupling, &traj, &taus, &s.opts),
        Some(omega) => {
            if a.traj != TrajArg::Static {
                return Err(fail(Error::InvalidParameter {
                    field: "omega_override",
                    reason: "a prescribed frequency is only supported for a static detector".into(),
                }));
            }
            // --lambda is the full coupling; undo the mode amplitude at x0
            let amp = mode_function(a.physics.k0, s.cavity.length, s.cavity.x0).map_err(fail)?;
            if amp == 0.0 {
                return Err(fail(Error::InvalidParameter {
                    field: "x0",
                    reason: "detector sits on a node of the probed mode".into(),
                }));
            }
            let mode = ModeSpec::with_omega(a.physics.k0, s.cavity.length, omega).map_err(fail)?;
            let coupling = CouplingSpec64::new(s.coupling.lambda() / amp).map_err(fail)?;
            witness_series_for_mode(&state, &mode, &coupling, &traj, &taus, &s.opts)
        }
    }
    .map_err(fail)?;
    emit(&a.physics, &output::series_csv(&series))?;
    if let Some(f) = series.failures.first() {
        for f in &series.failures {
            eprintln!(
                "warning: sample {} (tau={}, branch {}): {}",
                f.index,
                f.tau,
                f.branch.as_str(),
                f.error
            );
        }
        return Err((
            exit_code(&f.error),
            format!(
                "{} of {} samples failed; first at sample {} (tau={}, branch {})",
                series.failures.len(),
                series.len(),
                f.index,
                f.tau,
                f.branch.as_str()
            ),
        ));
    }
    if let Ok(m) = violation_metrics(&series) {
        match m.first_violation_tau {
            Some(t) => eprintln!(
                "max |W| = {} at tau = {}; first violation at tau = {t}",
                m.max_abs_w, m.argmax_tau
            ),
            None => eprintln!(
                "max |W| = {} at tau = {}; no violation",
                m.max_abs_w, m.argmax_tau
            ),
        }
    }
    Ok(())
}

fn finish_scan(p: &Physics, param: &str, metric: &str, points: &[ScanPoint<f64>]) -> CmdResult {
    for w in points.iter().filter_map(|p| p.warning.as_deref()) {
        eprintln!("warning: {w}");
    }
    emit(p, &output::scan_csv(param, metric, points))
}

fn cmd_scan_velocity(a: &args::VelocityArgs) -> CmdResult {
    let s = setup(&a.physics).map_err(fail)?;
    let state = StateSpec::new(a.state, a.physics.k0).map_err(fail)?;
    let vs = scan::linspace(a.range.from, a.range.to, a.range.steps).map_err(fail)?;
    if vs.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(fail(Error::InvalidParameter {
            field: "from",
            reason: "velocities must lie in (0, 1)".into(),
        }));
    }
    let window = AveragingWindow {
        tau_max: a.tau_max,
        samples: a.samples,
        t1: a.t1,
        t2: a.t2,
    };
    if !(a.t1 < a.t2) || a.t1 < 0.0 || a.t2 > a.tau_max {
        return Err(fail(Error::InvalidParameter {
            field: "t2",
            reason: format!(
                "window [{}, {}] must be increasing and inside [0, {}]",
                a.t1, a.t2, a.tau_max
            ),
        }));
    }
    uniform_grid(a.tau_max, a.samples).map_err(fail)?;
    let points = scan::scan_velocity(
        &state,
        &s.cavity,
        &s.coupling,
        &vs,
        &window,
        &s.opts,
        a.physics.jobs,
    )
    .map_err(fail)?;
    finish_scan(&a.physics, "v", "mean_abs_w", &points)
}

fn cmd_scan_acceleration(a: &args::AccelerationArgs) -> CmdResult {
    let s = setup(&a.physics).map_err(fail)?;
    let state = StateSpec::new(a.state, a.physics.k0).map_err(fail)?;
    let accs = scan::linspace(a.range.from, a.range.to, a.range.steps).map_err(fail)?;
    if !(a.range.from > 0.0) {
        return Err(fail(Error::InvalidParameter {
            field: "from",
            reason: "accelerations must be > 0".into(),
        }));
    }
    let points = scan::scan_acceleration(
        &state,
        &s.cavity,
        &s.coupling,
        &accs,
        a.eval_at,
        &s.opts,
        a.physics.jobs,
    )
    .map_err(fail)?;
    finish_scan(&a.physics, "a", "asymptote_abs_w", &points)
}

fn cmd_scan_alpha(a: &args::AlphaArgs) -> CmdResult {
    let s = setup(&a.physics).map_err(fail)?;
    if a.traj == TrajArg::Static {
        return Err(fail(Error::InvalidParameter {
            field: "traj",
            reason: "the asymptote needs a trajectory that reaches the wall".into(),
        }));
    }
    let traj = trajectory(a.traj, &s.cavity).map_err(fail)?;
    let alphas = scan::linspace(a.range.from, a.range.to, a.range.steps).map_err(fail)?;
    if !(a.range.from > 0.0) {
        return Err(fail(Error::InvalidParameter {
            field: "from",
            reason: "cat amplitudes must be > 0".into(),
        }));
    }
    let points = scan::scan_alpha(
        &s.cavity,
        &s.coupling,
        &traj,
        &alphas,
        a.eval_at,
        &s.opts,
        a.physics.jobs,
    )
    .map_err(fail)?;
    finish_scan(&a.physics, "alpha0", "asymptote_abs_w", &points)
}

fn cmd_oracle(a: &args::OracleArgs) -> CmdResult {
    let entries = run_suite(&SuiteConfig {
        cutoff: a.cutoff,
        k_max: a.kmax,
        only: a.state,
        include_trotter: !a.no_trotter,
    });
    let mut first_failure = None;
    for e in &entries {
        match &e.outcome {
            Ok((gap, threshold)) => {
                let tag = if e.passed() { "ok  " } else { "FAIL" };
                println!(
                    "{tag} {:<40} gap {gap:.3e} (threshold {threshold:e})",
                    e.name
                );
            }
            Err(err) => println!("FAIL {:<40} {err}", e.name),
        }
        if !e.passed() && first_failure.is_none() {
            first_failure = Some(e);
        }
    }
    match first_failure {
        None => Ok(()),
        Some(e) => {
            let code = match &e.outcome {
                Err(err) => exit_code(err),
                Ok(_) => 3,
            };
            Err((code, format!("oracle check failed: {}", e.name)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Witness(a) => cmd_witness(a),
        Command::ScanVelocity(a) => cmd_scan_velocity(a),
        Command::ScanAcceleration(a) => cmd_scan_acceleration(a),
        Command::ScanAlpha(a) => cmd_scan_alpha(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
