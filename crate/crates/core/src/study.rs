//! Vanishing-viscosity sweeps: one run per ε on a grid with dx ≤ ε/ratio,
//! compared on a common window K × [0, T].

use rayon::prelude::*;

use crate::config::{FrameRecording, SimConfig};
use crate::coupling::Simulation;
use crate::coupling::{StepObserver, StepState};
use crate::diagnostics::{
    default_phase_test_functions, default_test_functions, BurgersResidual, BurgersWeakAccumulator, TestFunction,
    Trapezoid, VlasovWeakAccumulator,
};
use crate::error::{Error, Result};
use crate::field::FluidField;
use crate::grid::PhaseGrid;
use crate::registry::Registries;

/// Exponents of the L^r distances.
pub const R_EXPONENTS: [f64; 3] = [1.0, 2.0, 4.0];

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub base: SimConfig,
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    /// Runs use dx ≤ ε / dx_ratio.
    pub dx_ratio: f64,
    /// Refine nv together with nx.
    pub refine_v: bool,
    pub window: (f64, f64),
    /// Number of uniform time intervals for the distance quadrature.
    pub time_samples: usize,
    pub burgers_tests: Vec<TestFunction>,
    /// Empty for runs without particles.
    pub vlasov_tests: Vec<TestFunction>,
}

/// Planned grid of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunEstimate {
    pub epsilon: f64,
    pub nx: usize,
    pub nv: usize,
    pub steps: usize,
}

impl RunEstimate {
    pub fn cell_steps(&self) -> f64 {
        self.nx as f64 * self.nv as f64 * self.steps as f64
    }
}

impl SweepPlan {
    /// Plan from the `sweep_*` settings of a config, with the default test functions.
    pub fn from_config(config: &SimConfig) -> Result<Self> {
        let t = config.t_final;
        let plan = SweepPlan {
            base: config.clone(),
            eps_list: config.sweep.eps_list.clone(),
            dx_ratio: config.sweep.dx_ratio,
            refine_v: config.sweep.refine_v,
            window: config.window,
            time_samples: config.sweep.time_samples,
            burgers_tests: default_test_functions(t),
            vlasov_tests: if config.kinetic.family == "zero" {
                Vec::new()
            } else {
                default_phase_test_functions(t)
            },
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.eps_list.is_empty() {
            return Err(Error::invalid("sweep_eps", "needs at least one value"));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::invalid("sweep_eps", "values must lie in (0, 1)"));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("sweep_eps", "must be strictly decreasing"));
        }
        if !(self.dx_ratio > 0.0) {
            return Err(Error::invalid("sweep_dx_ratio", "must be positive"));
        }
        if self.time_samples < 1 {
            return Err(Error::invalid("sweep_time_samples", "must be at least 1"));
        }
        let g = &self.base.grid;
        if !(self.window.0 > g.x_min && self.window.1 < g.x_max && self.window.0 < self.window.1) {
            return Err(Error::invalid(
                "window_min",
                "window must lie strictly inside the x-domain",
            ));
        }
        Ok(())
    }

    /// Run configurations. Grids are nested: every nx is an integer
    /// multiple of the coarsest one.
    pub fn run_configs(&self) -> Result<Vec<SimConfig>> {
        self.validate()?;
        let g = self.base.grid;
        let len = g.x_max - g.x_min;
        let eps0 = self.eps_list[0];
        let nx0 = ((len * self.dx_ratio / eps0) - 1e-9).ceil().max(4.0) as usize;
        self.eps_list
            .iter()
            .map(|&eps| {
                let m = ((eps0 / eps) - 1e-9).ceil().max(1.0) as usize;
                let nv = if self.refine_v { g.nv * m } else { g.nv };
                let mut c = self.base.clone();
                c.epsilon = eps;
                c.grid = g.with_resolution(nx0 * m, nv)?;
                c.window = self.window;
                c.record_frames = FrameRecording::None;
                c.output_times = Vec::new();
                debug_assert!(c.grid.dx() <= eps / self.dx_ratio * (1.0 + 1e-12));
                Ok(c)
            })
            .collect()
    }

    /// Grid sizes and step counts, before anything runs.
    pub fn estimate(&self) -> Result<Vec<RunEstimate>> {
        Ok(self
            .run_configs()?
            .iter()
            .map(|c| {
                let dx = c.grid.dx();
                let umax = c
                    .u_minus
                    .abs()
                    .max(c.u_plus.abs())
                    .max(c.fluid.amplitude.abs() + c.u_minus.abs().max(c.u_plus.abs()))
                    .max(1e-12);
                let dt = c.cfl * (dx / umax).min(dx * dx / (2.0 * c.epsilon));
                RunEstimate {
                    epsilon: c.epsilon,
                    nx: c.grid.nx,
                    nv: c.grid.nv,
                    steps: (c.t_final / dt).ceil() as usize,
                }
            })
            .collect())
    }

    /// Coarsest grid of the sweep, on which distances are measured.
    pub fn coarse_grid(&self) -> Result<PhaseGrid> {
        Ok(self.run_configs()?[0].grid)
    }
}

/// Cell averages of `u` over the cells of `coarse` lying inside `k`.
///
/// `fine` must refine `coarse` by an integer factor with aligned cell edges.
pub fn restrict_to_window(u: &FluidField, fine: &PhaseGrid, coarse: &PhaseGrid, k: (f64, f64)) -> Result<Vec<f64>> {
    if u.len() != fine.nx {
        return Err(Error::domain("field length does not match the fine grid"));
    }
    let ratio = coarse.dx() / fine.dx();
    let r = ratio.round();
    let offset = (coarse.x_min - fine.x_min) / fine.dx();
    if r < 1.0 || (ratio - r).abs() > 1e-9 * r || (offset - offset.round()).abs() > 1e-9 * fine.nx as f64 {
        return Err(Error::domain(
            "grids are not nested (non-integer refinement or misaligned edges)",
        ));
    }
    let (r, offset) = (r as usize, offset.round() as isize);
    let cells = window_cells(coarse, k);
    cells
        .map(|c| {
            let start = offset + (c * r) as isize;
            if start < 0 || start as usize + r > fine.nx {
                return Err(Error::domain("window cell is not covered by the fine grid"));
            }
            let s = start as usize;
            Ok(u.u[s..s + r].iter().sum::<f64>() / r as f64)
        })
        .collect()
}

/// Indices of coarse cells lying inside `k`.
pub fn window_cells(coarse: &PhaseGrid, k: (f64, f64)) -> std::ops::Range<usize> {
    let dx = coarse.dx();
    let tol = 1e-9 * dx;
    let lo = ((k.0 - coarse.x_min - tol) / dx).ceil().max(0.0) as usize;
    let hi = (((k.1 - coarse.x_min + tol) / dx).floor().max(0.0) as usize).min(coarse.nx);
    lo..hi.max(lo)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Exact,
    Value(f64),
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Rate::Exact => None,
            Rate::Value(v) => Some(*v),
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Exact => write!(f, "exact"),
            Rate::Value(v) => write!(f, "{v:.4}"),
        }
    }
}

/// Least-squares slope of ln(distance) against ln(ε).
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<Rate> {
    if pairs.len() < 2 {
        return Err(Error::domain("rate fit needs at least two pairs"));
    }
    if pairs.iter().any(|&(e, d)| !(e > 0.0) || !(d >= 0.0) || !d.is_finite()) {
        return Err(Error::domain(
            "rate fit needs positive ε and finite non-negative distances",
        ));
    }
    if pairs.iter().any(|&(_, d)| d == 0.0) {
        return Ok(Rate::Exact);
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("rate fit needs distinct ε values"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(Rate::Value(sxy / sxx))
}

/// u restricted to the comparison window at uniform times, linearly
/// interpolated between the bracketing steps.
struct WindowSampler {
    fine: PhaseGrid,
    coarse: PhaseGrid,
    window: (f64, f64),
    times: Vec<f64>,
    next: usize,
    prev: Option<(f64, Vec<f64>)>,
    samples: Vec<Vec<f64>>,
}

impl StepObserver for WindowSampler {
    fn observe(&mut self, state: &StepState<'_>) {
        let cur = restrict_to_window(state.u, &self.fine, &self.coarse, self.window).expect("sweep grids are nested");
        while self.next < self.times.len() && self.times[self.next] <= state.t {
            let tau = self.times[self.next];
            let sample = match &self.prev {
                Some((tp, up)) if state.t > *tp && tau > *tp => {
                    let w = (tau - tp) / (state.t - tp);
                    up.iter().zip(&cur).map(|(a, b)| (1.0 - w) * a + w * b).collect()
                }
                _ => cur.clone(),
            };
            self.samples.push(sample);
            self.next += 1;
        }
        self.prev = Some((state.t, cur));
    }
}

/// ⟨∫f dv, φ⟩, ⟨∫fv dv, φ⟩ and ⟨u∫f dv, φ⟩ over space-time.
struct MomentFunctionals {
    tests: Vec<TestFunction>,
    bx: Vec<Vec<f64>>,
    dx: f64,
    trap: Trapezoid,
}

impl StepObserver for MomentFunctionals {
    fn observe(&mut self, state: &StepState<'_>) {
        let m = state.moments;
        let mut values = Vec::with_capacity(3 * self.tests.len());
        for (p, b) in self.tests.iter().zip(&self.bx) {
            let bt = p.t.value(state.t);
            let (mut a, mut c, mut d) = (0.0, 0.0, 0.0);
            for i in 0..b.len() {
                let w = b[i] * bt;
                a += m.rho[i] * w;
                c += m.j[i] * w;
                d += state.u.u[i] * m.rho[i] * w;
            }
            values.extend([a * self.dx, c * self.dx, d * self.dx]);
        }
        self.trap.push(state.t, values);
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub epsilon: f64,
    pub grid: PhaseGrid,
    pub steps: usize,
    pub final_time: f64,
    pub sup_energy: f64,
    /// ∫₀ᵀ∫_K u⁴
    pub l4_window: f64,
    /// max_t |mass(t) - mass(0)| / mass(0); 0 without particles.
    pub relative_mass_drift: f64,
    pub min_f: f64,
    pub burgers: Vec<BurgersResidual>,
    pub vlasov: Vec<f64>,
    /// Per test function: density, momentum and drag-weighted density pairings.
    pub functionals: Vec<[f64; 3]>,
    /// u on the window cells at the sample times.
    pub samples: Vec<Vec<f64>>,
    pub final_u: FluidField,
    pub failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub plan: SweepPlan,
    pub coarse: PhaseGrid,
    pub runs: Vec<RunSummary>,
    /// d_r(ε_k, ε_{k+1}) for r = 1, 2, 4; NaN where a run failed.
    pub distances: Vec<[f64; 3]>,
    /// |functional(ε_k) - functional(ε_{k+1})| per test function.
    pub functional_diffs: Vec<Vec<[f64; 3]>>,
    /// Rates of d_r against ε, when at least two distances exist.
    pub rates: Option<[Rate; 3]>,
    /// max/min of the window L⁴ integral over ε.
    pub l4_ratio: f64,
    /// (max - min)/max of sup_t E over ε.
    pub energy_spread: f64,
}

impl SweepReport {
    pub fn failures(&self) -> Vec<(f64, &str)> {
        self.runs
            .iter()
            .filter_map(|r| r.failure.as_deref().map(|m| (r.epsilon, m)))
            .collect()
    }
}

fn run_one(cfg: &SimConfig, plan: &SweepPlan, coarse: &PhaseGrid, registries: &Registries) -> Result<RunSummary> {
    let sim = Simulation::new(cfg, registries)?;
    let t_final = cfg.t_final;
    let n = plan.time_samples;
    let mut sampler = WindowSampler {
        fine: cfg.grid,
        coarse: *coarse,
        window: plan.window,
        times: (0..=n).map(|j| t_final * j as f64 / n as f64).collect(),
        next: 0,
        prev: None,
        samples: Vec::new(),
    };
    let mut burgers = BurgersWeakAccumulator::new(&plan.burgers_tests, &cfg.grid, cfg.epsilon, t_final)?;
    let mut vlasov = VlasovWeakAccumulator::new(&plan.vlasov_tests, &cfg.grid, t_final)?;
    let mut functionals = MomentFunctionals {
        tests: plan.burgers_tests.clone(),
        bx: plan
            .burgers_tests
            .iter()
            .map(|p| p.x.tabulate(&cfg.grid.x_centers()).0)
            .collect(),
        dx: cfg.grid.dx(),
        trap: Trapezoid::default(),
    };
    let mut min_f = MinTracker(f64::INFINITY);
    let outcome = {
        let mut observers: Vec<&mut dyn StepObserver> = vec![&mut sampler, &mut burgers, &mut functionals, &mut min_f];
        if !plan.vlasov_tests.is_empty() {
            observers.push(&mut vlasov);
        }
        sim.run_observed(&mut observers)
    };
    let (traj, failure) = match outcome {
        Ok(t) => (t, None),
        Err(e) => (e.partial, Some(e.error.to_string())),
    };
    let m0 = traj.records.first().map_or(0.0, |r| r.mass);
    let relative_mass_drift = if m0 > 0.0 {
        traj.records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max) / m0
    } else {
        0.0
    };
    let mut l4 = Trapezoid::default();
    for r in &traj.records {
        l4.push(r.t, vec![r.u4_window]);
    }
    let totals = functionals.trap.totals();
    Ok(RunSummary {
        epsilon: cfg.epsilon,
        grid: cfg.grid,
        steps: traj.steps(),
        final_time: traj.final_time(),
        sup_energy: traj.records.iter().map(|r| r.energy).fold(0.0, f64::max),
        l4_window: l4.totals().first().copied().unwrap_or(0.0),
        relative_mass_drift,
        min_f: min_f.0,
        burgers: burgers.finish(),
        vlasov: if plan.vlasov_tests.is_empty() {
            Vec::new()
        } else {
            vlasov.finish()
        },
        functionals: (0..plan.burgers_tests.len())
            .map(|k| [totals[3 * k], totals[3 * k + 1], totals[3 * k + 2]])
            .collect(),
        samples: sampler.samples,
        final_u: traj.last_snapshot().u.clone(),
        failure,
    })
}

struct MinTracker(f64);

impl StepObserver for MinTracker {
    fn observe(&mut self, state: &StepState<'_>) {
        self.0 = self.0.min(state.f.min_value());
    }
}

/// ‖a - b‖_{L^r(K × [0,T])} from window samples at uniform times.
fn sampled_distance(a: &[Vec<f64>], b: &[Vec<f64>], dx: f64, t_final: f64, r: f64) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return f64::NAN;
    }
    let h = if n > 1 { t_final / (n - 1) as f64 } else { 0.0 };
    let mut total = 0.0;
    for k in 0..n {
        let w = if n == 1 {
            1.0
        } else if k == 0 || k == n - 1 {
            0.5 * h
        } else {
            h
        };
        let s: f64 = a[k].iter().zip(&b[k]).map(|(x, y)| (x - y).abs().powf(r)).sum();
        total += w * s * dx;
    }
    total.powf(1.0 / r)
}

/// Runs every ε of the plan (in parallel) and assembles the report.
///
/// A failed run is annotated in its summary; distances touching it are NaN.
pub fn run_sweep(plan: &SweepPlan, registries: &Registries) -> Result<SweepReport> {
    let configs = plan.run_configs()?;
    let coarse = configs[0].grid;
    let runs: Vec<RunSummary> = configs
        .par_iter()
        .map(|c| run_one(c, plan, &coarse, registries))
        .collect::<Result<Vec<_>>>()?;

    let t_final = plan.base.t_final;
    let dxc = coarse.dx();
    let mut distances = Vec::new();
    let mut functional_diffs = Vec::new();
    for w in runs.windows(2) {
        let ok = w[0].failure.is_none() && w[1].failure.is_none();
        let d = R_EXPONENTS.map(|r| {
            if ok {
                sampled_distance(&w[0].samples, &w[1].samples, dxc, t_final, r)
            } else {
                f64::NAN
            }
        });
        distances.push(d);
        functional_diffs.push(
            w[0].functionals
                .iter()
                .zip(&w[1].functionals)
                .map(|(a, b)| [0, 1, 2].map(|k| if ok { (a[k] - b[k]).abs() } else { f64::NAN }))
                .collect(),
        );
    }
    let rates = if distances.len() >= 2 && distances.iter().all(|d| d.iter().all(|v| v.is_finite())) {
        let mut out = [Rate::Exact; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let pairs: Vec<(f64, f64)> = runs.iter().zip(&distances).map(|(r, d)| (r.epsilon, d[k])).collect();
            *slot = fit_rate(&pairs)?;
        }
        Some(out)
    } else {
        None
    };
    let good: Vec<&RunSummary> = runs.iter().filter(|r| r.failure.is_none()).collect();
    let l4: Vec<f64> = good.iter().map(|r| r.l4_window).collect();
    let l4_ratio = ratio_max_min(&l4);
    let sup_e: Vec<f64> = good.iter().map(|r| r.sup_energy).collect();
    let emax = sup_e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let emin = sup_e.iter().copied().fold(f64::INFINITY, f64::min);
    let energy_spread = if emax > 0.0 { (emax - emin) / emax } else { 0.0 };

    Ok(SweepReport {
        plan: plan.clone(),
        coarse,
        runs,
        distances,
        functional_diffs,
        rates,
        l4_ratio,
        energy_spread,
    })
}

fn ratio_max_min(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    if v.is_empty() {
        f64::NAN
    } else if max == 0.0 {
        1.0
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_rate_examples() {
        let e = [0.1, 0.05, 0.025];
        let r = fit_rate(&[(e[0], 0.4), (e[1], 0.2), (e[2], 0.1)]).unwrap();
        assert!((r.value().unwrap() - 1.0).abs() < 1e-12);
        let r = fit_rate(&[(e[0], 0.4), (e[1], 0.1), (e[2], 0.025)]).unwrap();
        assert!((r.value().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_rate(&[(0.1, 0.0), (0.05, 0.0)]).unwrap(), Rate::Exact);
        assert!(fit_rate(&[(0.1, 1.0)]).is_err());
    }

    fn grids() -> (PhaseGrid, PhaseGrid) {
        (
            PhaseGrid::new(-2.0, 2.0, 160, -1.0, 1.0, 4).unwrap(),
            PhaseGrid::new(-2.0, 2.0, 40, -1.0, 1.0, 4).unwrap(),
        )
    }

    #[test]
    fn restriction_identity_and_constants() {
        let (fine, coarse) = grids();
        let u = FluidField::new(coarse.x_centers().iter().map(|x| x.sin()).collect(), 0.0, 0.0);
        let r = restrict_to_window(&u, &coarse, &coarse, (-1.0, 1.0)).unwrap();
        assert_eq!(r, u.u[10..30].to_vec());
        let c = FluidField::constant(&fine, 0.7);
        let r = restrict_to_window(&c, &fine, &coarse, (-1.0, 1.0)).unwrap();
        assert!(r.iter().all(|&v| (v - 0.7).abs() < 1e-15));
        assert_eq!(r.len(), 20);
    }

    #[test]
    fn restriction_of_linear_profile_is_exact() {
        let (fine, coarse) = grids();
        let u = FluidField::new(fine.x_centers().iter().map(|x| 3.0 * x - 1.0).collect(), 0.0, 0.0);
        let r = restrict_to_window(&u, &fine, &coarse, (-1.0, 1.0)).unwrap();
        let cells = window_cells(&coarse, (-1.0, 1.0));
        for (k, c) in cells.enumerate() {
            assert!((r[k] - (3.0 * coarse.x(c) - 1.0)).abs() < 1e-13);
        }
        // window integral preserved
        let fine_int: f64 = (0..fine.nx)
            .filter(|&i| fine.x(i).abs() < 1.0)
            .map(|i| u.u[i])
            .sum::<f64>()
            * fine.dx();
        let coarse_int: f64 = r.iter().sum::<f64>() * coarse.dx();
        assert!((fine_int - coarse_int).abs() < 1e-13);
    }

    #[test]
    fn non_nested_grids_are_rejected() {
        let fine = PhaseGrid::new(-2.0, 2.0, 150, -1.0, 1.0, 4).unwrap();
        let coarse = PhaseGrid::new(-2.0, 2.0, 40, -1.0, 1.0, 4).unwrap();
        let u = FluidField::constant(&fine, 1.0);
        assert!(matches!(
            restrict_to_window(&u, &fine, &coarse, (-1.0, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn plan_grids_obey_the_coupling_rule_and_nest() {
        let mut cfg = SimConfig::default();
        cfg.grid = PhaseGrid::new(-3.0, 3.0, 100, -1.5, 1.5, 30).unwrap();
        cfg.sweep.eps_list = vec![0.1, 0.05, 0.03];
        let plan = SweepPlan::from_config(&cfg).unwrap();
        let cs = plan.run_configs().unwrap();
        for c in &cs {
            assert!(c.grid.dx() <= c.epsilon / 4.0 * (1.0 + 1e-12));
            assert_eq!(c.grid.nx % cs[0].grid.nx, 0);
        }
    }

    #[test]
    fn plan_rejects_increasing_eps() {
        let mut cfg = SimConfig::default();
        cfg.sweep.eps_list = vec![0.05, 0.1];
        assert!(SweepPlan::from_config(&cfg).is_err());
    }

    #[test]
    fn single_eps_gives_empty_tables() {
        let mut cfg = SimConfig::default();
        cfg.grid = PhaseGrid::new(-2.0, 2.0, 40, -1.0, 1.0, 8).unwrap();
        cfg.t_final = 0.1;
        cfg.sweep.eps_list = vec![0.2];
        let plan = SweepPlan::from_config(&cfg).unwrap();
        let rep = run_sweep(&plan, &Registries::builtin()).unwrap();
        assert!(rep.distances.is_empty() && rep.functional_diffs.is_empty());
        assert!(rep.rates.is_none());
        assert_eq!(rep.runs.len(), 1);
        assert_eq!(rep.runs[0].burgers.len(), 5);
        assert_eq!(rep.runs[0].samples.len(), cfg.sweep.time_samples + 1);
    }
}
