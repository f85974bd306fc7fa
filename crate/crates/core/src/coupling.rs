//! Velocity moments, the split-step integrator for the coupled system, and
//! trajectory recording.

use std::sync::Arc;

use crate::burgers::{
    burgers_step_with, stable_dt, DragSource, LocalLaxFriedrichs, MinmodMuscl, NonFinite, NumericalFlux, Reconstruction,
};
use crate::config::{FrameRecording, SimConfig};
use crate::connector::ConnectorProfile;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField};
use crate::grid::PhaseGrid;
use crate::init::{make_initial_data, InitialState};
use crate::registry::Registries;
use crate::vlasov::{vlasov_step_with, CharacteristicIntegrator, Deposit, ExponentialMidpoint, KineticScheme};

/// Velocity moments of `f` per x-cell, by midpoint quadrature over the v-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    /// ∫ f dv
    pub rho: Vec<f64>,
    /// ∫ f v dv
    pub j: Vec<f64>,
    /// ∫ f v² dv
    pub e2: Vec<f64>,
}

pub fn moments(f: &KineticField, grid: &PhaseGrid) -> Moments {
    let dv = grid.dv();
    let vs = grid.v_centers();
    let mut rho = Vec::with_capacity(grid.nx);
    let mut j = Vec::with_capacity(grid.nx);
    let mut e2 = Vec::with_capacity(grid.nx);
    for i in 0..grid.nx {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (fv, &v) in f.row(i).iter().zip(&vs) {
            a += fv;
            b += fv * v;
            c += fv * v * v;
        }
        rho.push(a * dv);
        j.push(b * dv);
        e2.push(c * dv);
    }
    Moments { rho, j, e2 }
}

impl Moments {
    /// Drag force on the gas, `∫ f (v - u) dv = j - u ρ`.
    pub fn drag_source(&self, u: &FluidField) -> DragSource {
        DragSource {
            s: self
                .j
                .iter()
                .zip(&self.rho)
                .zip(&u.u)
                .map(|((j, r), u)| j - u * r)
                .collect(),
        }
    }
}

/// Numerical strategies used by a run.
#[derive(Clone)]
pub struct Schemes {
    pub flux: Arc<dyn NumericalFlux>,
    pub reconstruction: Arc<dyn Reconstruction>,
    pub kinetic: Arc<dyn KineticScheme>,
    pub integrator: Arc<dyn CharacteristicIntegrator>,
    /// Multiplier on the drag source (1 in normal runs).
    pub drag_sign: f64,
    /// Burgers substeps per kinetic step.
    pub fluid_substeps: usize,
}

impl Default for Schemes {
    fn default() -> Self {
        Schemes {
            flux: Arc::new(LocalLaxFriedrichs),
            reconstruction: Arc::new(MinmodMuscl),
            kinetic: Arc::new(Deposit),
            integrator: Arc::new(ExponentialMidpoint),
            drag_sign: 1.0,
            fluid_substeps: 1,
        }
    }
}

impl std::fmt::Debug for Schemes {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Schemes")
            .field("flux", &self.flux.name())
            .field("reconstruction", &self.reconstruction.name())
            .field("kinetic", &self.kinetic.name())
            .field("integrator", &self.integrator.name())
            .field("drag_sign", &self.drag_sign)
            .field("fluid_substeps", &self.fluid_substeps)
            .finish()
    }
}

impl Schemes {
    pub fn from_config(config: &SimConfig, registries: &Registries) -> Result<Self> {
        Ok(Schemes {
            flux: registries.fluxes.get(&config.flux)?,
            reconstruction: registries.reconstructions.get(&config.reconstruction)?,
            kinetic: registries.kinetic_schemes.get(&config.kinetic_scheme)?,
            integrator: registries.integrators.get(&config.integrator)?,
            drag_sign: config.drag_sign,
            fluid_substeps: config.fluid_substeps,
        })
    }
}

/// Strang splitting: half kinetic step with `u` frozen, full Burgers step
/// driven by the mid-step drag `j - uρ`, half kinetic step with the new `u`.
///
/// With `fluid_substeps = m > 1` the Burgers part is m equal substeps, each
/// recomputing `j - uρ` from the mid-step moments and the current `u`.
pub fn strang_step(
    u: &FluidField,
    f: &KineticField,
    epsilon: f64,
    dt: f64,
    grid: &PhaseGrid,
) -> std::result::Result<(FluidField, KineticField), NonFinite> {
    strang_step_with(&Schemes::default(), u, f, epsilon, dt, grid)
}

pub fn strang_step_with(
    schemes: &Schemes,
    u: &FluidField,
    f: &KineticField,
    epsilon: f64,
    dt: f64,
    grid: &PhaseGrid,
) -> std::result::Result<(FluidField, KineticField), NonFinite> {
    if f.is_zero() {
        let u_next = burgers_step_with(
            schemes.flux.as_ref(),
            schemes.reconstruction.as_ref(),
            u,
            &DragSource::zeros(u.len()),
            epsilon,
            dt,
            grid,
        )?;
        return Ok((u_next, f.clone()));
    }
    let (kinetic, integrator) = (schemes.kinetic.as_ref(), schemes.integrator.as_ref());
    let f_half = vlasov_step_with(kinetic, integrator, f, u, 0.5 * dt, grid);
    let mid = moments(&f_half, grid);
    let m = schemes.fluid_substeps.max(1);
    let h = dt / m as f64;
    let mut u_next = u.clone();
    for _ in 0..m {
        let mut source = mid.drag_source(&u_next);
        if schemes.drag_sign != 1.0 {
            source.s.iter_mut().for_each(|s| *s *= schemes.drag_sign);
        }
        u_next = burgers_step_with(
            schemes.flux.as_ref(),
            schemes.reconstruction.as_ref(),
            &u_next,
            &source,
            epsilon,
            h,
            grid,
        )?;
    }
    let f_next = vlasov_step_with(kinetic, integrator, &f_half, &u_next, 0.5 * dt, grid);
    Ok((u_next, f_next))
}

/// State handed to observers at t = 0 and after every step.
pub struct StepState<'a> {
    pub step: usize,
    pub t: f64,
    /// Step that produced this state (0 for the initial state).
    pub dt: f64,
    pub u: &'a FluidField,
    pub f: &'a KineticField,
    pub moments: &'a Moments,
    pub grid: &'a PhaseGrid,
    pub epsilon: f64,
    pub connector: &'a ConnectorProfile,
}

impl StepState<'_> {
    /// ∫ f (v - u) dv per cell.
    pub fn drag_source(&self) -> DragSource {
        self.moments.drag_source(self.u)
    }
}

/// Receives every state of a run, in time order.
pub trait StepObserver {
    fn observe(&mut self, state: &StepState<'_>);
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: FluidField,
    pub f: KineticField,
}

/// Per-step fields kept when frame recording is enabled.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub u: FluidField,
    /// ∫ f (v - u) dv at this state.
    pub source: Vec<f64>,
    pub f: Option<KineticField>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SimConfig,
    pub grid: PhaseGrid,
    pub connector: ConnectorProfile,
    /// Snapshot times; strictly increasing, starting at 0.
    pub times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// One record per state, including the initial one.
    pub records: Vec<DiagnosticsRecord>,
    pub frames: Vec<Frame>,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    pub fn steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectory always holds the initial snapshot")
    }

    pub(crate) fn fluid_frames(&self) -> Result<&[Frame]> {
        if self.frames.is_empty() {
            return Err(Error::MissingData(
                "per-step frames (set record_frames = fluid or full)",
            ));
        }
        Ok(&self.frames)
    }

    pub(crate) fn kinetic_frames(&self) -> Result<&[Frame]> {
        let frames = self.fluid_frames()?;
        if frames.iter().any(|fr| fr.f.is_none()) {
            return Err(Error::MissingData("per-step kinetic frames (set record_frames = full)"));
        }
        Ok(frames)
    }
}

/// A run that stopped early; `partial` ends with the last good state.
#[derive(Clone, Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for RunFailure {}

/// A configured run: initial data plus schemes.
pub struct Simulation {
    pub config: SimConfig,
    pub schemes: Schemes,
    pub initial: InitialState,
}

impl Simulation {
    pub fn new(config: &SimConfig, registries: &Registries) -> Result<Self> {
        config.validate()?;
        Ok(Simulation {
            config: config.clone(),
            schemes: Schemes::from_config(config, registries)?,
            initial: make_initial_data(config, registries)?,
        })
    }

    /// Runs from explicitly supplied initial fields.
    pub fn from_state(config: &SimConfig, schemes: Schemes, initial: InitialState) -> Result<Self> {
        config.validate()?;
        if initial.u.len() != config.grid.nx || (initial.f.nx, initial.f.nv) != (config.grid.nx, config.grid.nv) {
            return Err(Error::domain("initial fields do not match the configured grid"));
        }
        Ok(Simulation {
            config: config.clone(),
            schemes,
            initial,
        })
    }

    pub fn run(&self) -> std::result::Result<Trajectory, RunFailure> {
        self.run_observed(&mut [])
    }

    pub fn run_observed(&self, observers: &mut [&mut dyn StepObserver]) -> std::result::Result<Trajectory, RunFailure> {
        let cfg = &self.config;
        let grid = cfg.grid;
        let connector = &self.initial.connector;
        let eps = cfg.epsilon;
        let mut u = self.initial.u.clone();
        let mut f = self.initial.f.clone();
        let mut t = 0.0;
        let mut step = 0usize;

        let mut traj = Trajectory {
            config: cfg.clone(),
            grid,
            connector: connector.clone(),
            times: vec![0.0],
            snapshots: vec![Snapshot {
                t: 0.0,
                u: u.clone(),
                f: f.clone(),
            }],
            records: Vec::new(),
            frames: Vec::new(),
        };
        let mut pending = cfg.output_times.iter().copied().filter(|&s| s > 0.0).peekable();

        let mut emit = |traj: &mut Trajectory, step: usize, t: f64, dt: f64, u: &FluidField, f: &KineticField| {
            let m = moments(f, &grid);
            let state = StepState {
                step,
                t,
                dt,
                u,
                f,
                moments: &m,
                grid: &grid,
                epsilon: eps,
                connector,
            };
            traj.records.push(DiagnosticsRecord::from_state(&state, cfg.window));
            match cfg.record_frames {
                FrameRecording::None => {}
                FrameRecording::Fluid | FrameRecording::Full => traj.frames.push(Frame {
                    t,
                    u: u.clone(),
                    source: state.drag_source().s,
                    f: (cfg.record_frames == FrameRecording::Full).then(|| f.clone()),
                }),
            }
            for obs in observers.iter_mut() {
                obs.observe(&state);
            }
        };

        emit(&mut traj, 0, 0.0, 0.0, &u, &f);

        while t < cfg.t_final {
            let mut dt = stable_dt(&u, eps, &grid, cfg.cfl);
            if !f.is_zero() {
                dt *= self.schemes.fluid_substeps.max(1) as f64;
            }
            let last = t + dt >= cfg.t_final;
            if last {
                dt = cfg.t_final - t;
            }
            match strang_step_with(&self.schemes, &u, &f, eps, dt, &grid) {
                Ok((un, fnext)) => {
                    u = un;
                    f = fnext;
                }
                Err(_) => {
                    let error = Error::Blowup {
                        step: step + 1,
                        t: t + dt,
                    };
                    if traj.times.last() != Some(&t) {
                        traj.times.push(t);
                        traj.snapshots.push(Snapshot { t, u, f });
                    }
                    return Err(RunFailure { error, partial: traj });
                }
            }
            step += 1;
            t = if last { cfg.t_final } else { t + dt };
            emit(&mut traj, step, t, dt, &u, &f);

            let mut crossed = false;
            while pending.peek().is_some_and(|&s| s <= t) {
                pending.next();
                crossed = true;
            }
            if (crossed || last) && traj.times.last() != Some(&t) {
                traj.times.push(t);
                traj.snapshots.push(Snapshot {
                    t,
                    u: u.clone(),
                    f: f.clone(),
                });
            }
        }
        Ok(traj)
    }
}

/// Builds the run from `config` with the built-in registries and executes it.
pub fn run(config: &SimConfig) -> std::result::Result<Trajectory, RunFailure> {
    let registries = Registries::builtin();
    let sim = Simulation::new(config, &registries).map_err(|error| RunFailure {
        error,
        partial: empty_trajectory(config),
    })?;
    sim.run()
}

fn empty_trajectory(config: &SimConfig) -> Trajectory {
    let grid = config.grid;
    Trajectory {
        config: config.clone(),
        grid,
        connector: ConnectorProfile {
            l0: config.connector_l0,
            u_minus: config.u_minus,
            u_plus: config.u_plus,
            values: Vec::new(),
        },
        times: Vec::new(),
        snapshots: Vec::new(),
        records: Vec::new(),
        frames: Vec::new(),
    }
}
