//! Forward-Euler stages and the time loop.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_mesh_restriction, compute_dt, face_values, lax_friedrichs, limited_slopes};
use super::{Order, SchemeConfig};
use crate::convolution::{face_averages, ConvolutionEngine, ConvolutionMethod, FaceConvolutions};
use crate::error::{Error, Result};
use crate::grid::{fill_ghosts, project_initial, BoundaryKind, Field, GhostedField, Grid};
use crate::models::{ModelSpec, NonlocalTerm};
use crate::par;

/// Field produced inside a time step, reported to step observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// `ρ⁽¹⁾` of the second-order scheme.
    First,
    /// `ρ⁽²⁾` of the second-order scheme.
    Second,
    /// `ρⁿ⁺¹`.
    Update,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::First => "stage 1",
            Stage::Second => "stage 2",
            Stage::Update => "update",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub field: Field,
    pub t: f64,
    pub steps: usize,
}

impl SolverState {
    pub fn new(field: Field) -> Self {
        Self {
            field,
            t: 0.0,
            steps: 0,
        }
    }
}

/// A model discretized on a grid with a fixed scheme configuration.
#[derive(Debug)]
pub struct Solver {
    grid: Grid,
    model: ModelSpec,
    config: SchemeConfig,
    engine: Option<ConvolutionEngine>,
    max_dt: f64,
}

impl Solver {
    pub fn new(
        grid: Grid,
        model: ModelSpec,
        config: SchemeConfig,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        model.validate()?;
        config.validate()?;
        let engine = match &model.nonlocal {
            NonlocalTerm::Convolution { kernel_x, kernel_y } => Some(ConvolutionEngine::new(
                &grid, kernel_x, kernel_y, config.bc, method,
            )?),
            NonlocalTerm::LocalAverage => None,
        };
        match model.growth {
            Some(m) => {
                check_mesh_restriction(&grid, m);
            }
            None => log::debug!(
                "growth constant of {} unset; mesh restriction unchecked",
                model.name
            ),
        }
        let max_dt = compute_dt(&model, &config, &grid)?;
        Ok(Self {
            grid,
            model,
            config,
            engine,
            max_dt,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    /// The convolution engine, absent for local models.
    pub fn engine(&self) -> Option<&ConvolutionEngine> {
        self.engine.as_ref()
    }

    /// The CFL step for this grid and configuration.
    pub fn max_dt(&self) -> f64 {
        self.max_dt
    }

    /// The model's initial datum averaged over each cell.
    pub fn initial_state(&self, samples_per_axis: usize) -> Result<SolverState> {
        let ic = &self.model.initial;
        let field = project_initial(&self.grid, self.model.n_species, samples_per_axis, |x, y, out| {
            ic(x, y, out)
        })?;
        Ok(SolverState::new(field))
    }

    /// `A` at x-faces and `B` at y-faces for `field`.
    pub fn nonlocal_terms(&self, field: &Field, ghosted: &GhostedField) -> Result<FaceConvolutions> {
        match &self.engine {
            Some(e) => e.evaluate(field),
            None => Ok(face_averages(ghosted)),
        }
    }

    fn check_field(&self, field: &Field) -> Result<()> {
        if !field.matches(&self.grid) || field.n_species() != self.model.n_species {
            return Err(Error::DimensionMismatch(alloc::format!(
                "field is {}x{} with {} species; grid is {}x{}, model has {}",
                field.nx(),
                field.ny(),
                field.n_species(),
                self.grid.nx(),
                self.grid.ny(),
                self.model.n_species
            )));
        }
        Ok(())
    }

    /// One conservative forward-Euler update of `field` from time `t`.
    pub fn euler_stage(&self, field: &Field, t: f64, dt: f64) -> Result<Field> {
        self.stage(field, t, dt, Stage::Update)
    }

    fn stage(&self, field: &Field, t: f64, dt: f64, label: Stage) -> Result<Field> {
        self.check_field(field)?;
        let g = &self.grid;
        let (nx, ny, n) = (g.nx(), g.ny(), self.model.n_species);
        let bc = self.config.bc;
        let ghosted = fill_ghosts(field, bc, 2)?;
        let slopes = limited_slopes(&ghosted, self.config.effective_theta());
        let faces = face_values(&ghosted, &slopes);
        let nonlocal = self.nonlocal_terms(field, &ghosted)?;
        let (lx, ly) = (dt / g.dx(), dt / g.dy());
        let (alpha, beta) = (self.config.alpha, self.config.beta);

        // Fluxes are stored (face, species) interleaved.
        let ys = g.y_centers();
        let mut fx = vec![0.0; (nx + 1) * ny * n];
        let flux_x = &*self.model.flux_x;
        let a = nonlocal.a_values();
        let ma = a.len() / ((nx + 1) * ny);
        par::for_each_row(&mut fx, ny * n, |fi, row| {
            if bc == BoundaryKind::NoFlow && (fi == 0 || fi == nx) {
                return;
            }
            let mut traces = vec![[0.0; 2]; ny * n];
            let mut values = vec![[0.0; 2]; ny * n];
            for (j, tr) in traces.chunks_mut(n).enumerate() {
                for (k, slot) in tr.iter_mut().enumerate() {
                    *slot = [faces.x_minus(k, fi, j), faces.x_plus(k, fi, j)];
                }
            }
            let line = &a[fi * ny * ma..(fi + 1) * ny * ma];
            flux_x.eval_line(t, g.x_face(fi), &ys, line, &traces, &mut values);
            for ((r, &[u, v]), f) in row.iter_mut().zip(&traces).zip(&values) {
                *r = lax_friedrichs(f[0], f[1], u, v, alpha, lx);
            }
        });
        let yf = g.y_faces();
        let mut fy = vec![0.0; nx * (ny + 1) * n];
        let flux_y = &*self.model.flux_y;
        let b = nonlocal.b_values();
        let mb = b.len() / (nx * (ny + 1));
        par::for_each_row(&mut fy, (ny + 1) * n, |i, row| {
            let mut traces = vec![[0.0; 2]; (ny + 1) * n];
            let mut values = vec![[0.0; 2]; (ny + 1) * n];
            for (fj, tr) in traces.chunks_mut(n).enumerate() {
                for (k, slot) in tr.iter_mut().enumerate() {
                    *slot = [faces.y_minus(k, i, fj), faces.y_plus(k, i, fj)];
                }
            }
            let line = &b[i * (ny + 1) * mb..(i + 1) * (ny + 1) * mb];
            flux_y.eval_line(t, g.x_center(i), &yf, line, &traces, &mut values);
            for ((r, &[u, v]), f) in row.iter_mut().zip(&traces).zip(&values) {
                *r = lax_friedrichs(f[0], f[1], u, v, beta, ly);
            }
            if bc == BoundaryKind::NoFlow {
                row[..n].fill(0.0);
                row[ny * n..].fill(0.0);
            }
        });
        if bc == BoundaryKind::Periodic {
            // The two boundary faces are the same face.
            let s = nx * ny * n;
            fx.copy_within(s..s + ny * n, 0);
            for i in 0..nx {
                let base = i * (ny + 1) * n;
                fy.copy_within(base + ny * n..base + (ny + 1) * n, base);
            }
        }
        if let Some(pos) = fx.iter().position(|v| !v.is_finite()) {
            let (face, k) = (pos / n, pos % n);
            return Err(Error::NonFiniteFlux {
                direction: 'x',
                species: k,
                face: (face / ny, face % ny),
                t,
            });
        }
        if let Some(pos) = fy.iter().position(|v| !v.is_finite()) {
            let (face, k) = (pos / n, pos % n);
            return Err(Error::NonFiniteFlux {
                direction: 'y',
                species: k,
                face: (face / (ny + 1), face % (ny + 1)),
                t,
            });
        }

        let mut out = Field::zeros(n, nx, ny);
        let (fx, fy) = (&fx[..], &fy[..]);
        par::for_each_row(out.as_mut_slice(), ny, |r, row| {
            let (k, i) = (r / nx, r % nx);
            let rho = field.species(k);
            for j in 0..ny {
                let east = fx[((i + 1) * ny + j) * n + k];
                let west = fx[(i * ny + j) * n + k];
                let north = fy[(i * (ny + 1) + j + 1) * n + k];
                let south = fy[(i * (ny + 1) + j) * n + k];
                row[j] = rho[i * ny + j] - lx * (east - west) - ly * (north - south);
            }
        });
        if let Some((k, i, j)) = out.first_non_finite() {
            return Err(Error::NonFiniteState {
                stage: label.name(),
                species: k,
                i,
                j,
                t,
            });
        }
        Ok(out)
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &mut SolverState, dt: f64) -> Result<()> {
        self.step_observed(state, dt, &mut |_, _| {})
    }

    /// As [`Solver::step`], reporting every intermediate field.
    pub fn step_observed(
        &self,
        state: &mut SolverState,
        dt: f64,
        observer: &mut dyn FnMut(Stage, &Field),
    ) -> Result<()> {
        debug_assert!(
            dt > 0.0 && dt <= self.max_dt * (1.0 + 1e-12),
            "time step {dt} exceeds the CFL step {}",
            self.max_dt
        );
        let t = state.t;
        let next = match self.config.order {
            Order::First => self.stage(&state.field, t, dt, Stage::Update)?,
            Order::Second => {
                let s1 = self.stage(&state.field, t, dt, Stage::First)?;
                observer(Stage::First, &s1);
                let s2 = self.stage(&s1, t + dt, dt, Stage::Second)?;
                observer(Stage::Second, &s2);
                average(&state.field, &s2)
            }
        };
        observer(Stage::Update, &next);
        state.field = next;
        state.t = t + dt;
        state.steps += 1;
        Ok(())
    }

    /// Steps with `dt` until `t_end`, shortening the last step to land on it.
    ///
    /// `after_step` sees the state after every completed step.
    pub fn advance_to(
        &self,
        state: &mut SolverState,
        t_end: f64,
        dt: f64,
        after_step: &mut dyn FnMut(&SolverState),
    ) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "time step must be positive, got {dt}"
            )));
        }
        while state.t < t_end {
            let remaining = t_end - state.t;
            let last = remaining <= dt * (1.0 + 1e-10);
            let h = if last { remaining } else { dt };
            self.step(state, h)?;
            if last {
                state.t = t_end;
            }
            after_step(state);
        }
        Ok(())
    }
}

fn average(a: &Field, b: &Field) -> Field {
    let data: Vec<f64> = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    Field::from_vec(a.n_species(), a.nx(), a.ny(), data).expect("same shape")
}
