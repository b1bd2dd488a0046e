//! Single runs: time loop, snapshots and the per-step report.

use std::fs;
use std::path::PathBuf;

use nonlocal_core::diagnostics::{RunReport, StepRecord};
use nonlocal_core::{Field, Grid, ModelSpec, Solver, SolverState};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::snapshot::save_snapshot;
use crate::table::report_csv;

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub state: SolverState,
    /// `(t, field)` at every snapshot time, including `t = 0` and `t = T`.
    pub snapshots: Vec<(f64, Field)>,
    pub files: Vec<PathBuf>,
    pub dt: f64,
}

/// Builds the solver and its step size; a fixed `dt-ratio` may not exceed
/// the CFL step.
pub fn prepare(cfg: &RunConfig, model: ModelSpec) -> Result<(Solver, f64)> {
    let grid = Grid::new(cfg.grid)?;
    let solver = Solver::new(grid, model, cfg.scheme, cfg.convolution)?;
    let dt = match cfg.dt_ratio {
        None => solver.max_dt(),
        Some(r) => {
            let dt = r * grid.dx();
            if dt > solver.max_dt() * (1.0 + 1e-12) {
                return Err(CliError::Config(format!(
                    "dt-ratio {r} gives Δt = {dt:e}, above the CFL step {:e}",
                    solver.max_dt()
                )));
            }
            dt
        }
    };
    Ok((solver, dt))
}

/// Times at which snapshots are taken: `0`, every `every`, and `t_end`.
pub fn snapshot_times(t_end: f64, every: Option<f64>) -> Vec<f64> {
    let mut times = vec![0.0];
    if let Some(d) = every {
        let mut n = 1usize;
        loop {
            let t = n as f64 * d;
            // skip a multiple that lands within rounding of t_end
            if t >= t_end * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            n += 1;
        }
    }
    times.push(t_end);
    times
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    run_model(cfg, cfg.model_spec()?)
}

/// As [`run`] with an explicit model; `model.domain` is ignored in favour of
/// `cfg.grid`.
pub fn run_model(cfg: &RunConfig, mut model: ModelSpec) -> Result<RunOutcome> {
    model.domain = cfg.grid;
    let (solver, dt) = prepare(cfg, model)?;
    let grid = *solver.grid();
    log::info!(
        "{} on {}x{}, order {}, dt = {dt:e}, T = {}",
        solver.model().name,
        grid.nx(),
        grid.ny(),
        cfg.scheme.order,
        cfg.t_end
    );
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut state = solver.initial_state(cfg.samples)?;
    let mut report = RunReport::new();
    report.push(StepRecord::measure(0, 0.0, &state.field, &grid))?;
    let mut snapshots = Vec::new();
    let mut files = Vec::new();
    for (n, &t) in snapshot_times(cfg.t_end, cfg.snap_every).iter().enumerate() {
        if t > 0.0 {
            let mut failed = None;
            solver.advance_to(&mut state, t, dt, &mut |s| {
                if failed.is_none() {
                    if let Err(e) = report.push(StepRecord::measure(s.steps, s.t, &s.field, &grid)) {
                        failed = Some(e);
                    }
                }
            })?;
            if let Some(e) = failed {
                return Err(e.into());
            }
        }
        if let Some(dir) = &cfg.out {
            let path = dir.join(format!("snap_{n:04}.csv"));
            save_snapshot(&path, state.t, &grid, &state.field)?;
            files.push(path);
        }
        log::info!("t = {} after {} steps", state.t, state.steps);
        snapshots.push((state.t, state.field.clone()));
    }
    if let Some(dir) = &cfg.out {
        let path = dir.join("report.csv");
        fs::write(&path, report_csv(&report)).map_err(|e| CliError::io(&path, e))?;
        files.push(path);
    }
    Ok(RunOutcome {
        report,
        state,
        snapshots,
        files,
        dt,
    })
}
