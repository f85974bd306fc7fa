//! Quantities computed from discrete fields and trajectories: energies and
//! dissipations, L⁴ on windows, entropy pairs, weak-form residuals,
//! truncated moments and level-set bands.
//!
//! Space and velocity integrals use the midpoint rule on cell centers; time
//! integrals use the trapezoid rule on the recorded step times.

mod energy;
mod entropy;
mod kinetic;
mod testfn;
mod weak;

pub use energy::{
    cumulative_dissipation, energy_balance_residual, fit_gronwall, gronwall_bound_check, l4_local, momentum_drift,
    relative_energy, GronwallConstants, GronwallReport,
};
pub use entropy::{
    entropy_production, make_entropy_triple, EntropyPairing, EntropyProductionAccumulator, EntropyTriple,
};
pub use kinetic::{
    band_masses, band_transport_check, level_set_decomposition, level_set_decomposition_scaled, truncated_moment,
    BandTransport, MomentKind, TruncatedMoment,
};
pub use testfn::{default_phase_test_functions, default_test_functions, Bump, TestFunction};
pub use weak::{
    weak_residual_burgers, weak_residual_vlasov, BurgersResidual, BurgersWeakAccumulator, VlasovWeakAccumulator,
};

use crate::coupling::{StepState, Trajectory};
use crate::field::{FluidField, KineticField};
use crate::grid::PhaseGrid;

/// Scalar diagnostics of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    /// Step that led to this state; 0 for the initial state.
    pub dt: f64,
    /// ½∫(u-ū)² + ½∫∫f(1+v²)
    pub energy: f64,
    /// ∫∫ f (v-u)²
    pub drag_dissipation: f64,
    /// ε ∫ u_x²
    pub viscous_dissipation: f64,
    pub mass: f64,
    /// ∫(u-ū) + ∫∫ f v
    pub momentum: f64,
    pub boundary_mass_indicator: f64,
    /// ∫_K u⁴ over the configured window K.
    pub u4_window: f64,
}

impl DiagnosticsRecord {
    pub fn from_state(state: &StepState<'_>, window: (f64, f64)) -> Self {
        let grid = state.grid;
        let dx = grid.dx();
        let m = state.moments;
        let ubar = &state.connector.values;
        let u = &state.u.u;

        let mut fluid_energy = 0.0;
        let mut fluid_momentum = 0.0;
        let mut drag = 0.0;
        for i in 0..grid.nx {
            let w = u[i] - ubar[i];
            fluid_energy += w * w;
            fluid_momentum += w;
            drag += (m.e2[i] - 2.0 * u[i] * m.j[i] + u[i] * u[i] * m.rho[i]).max(0.0);
        }
        let mass: f64 = m.rho.iter().sum::<f64>() * dx;
        let kinetic_energy: f64 = m.rho.iter().zip(&m.e2).map(|(r, e)| r + e).sum::<f64>() * dx;
        let particle_momentum: f64 = m.j.iter().sum::<f64>() * dx;

        DiagnosticsRecord {
            step: state.step,
            t: state.t,
            dt: state.dt,
            energy: 0.5 * fluid_energy * dx + 0.5 * kinetic_energy,
            drag_dissipation: drag * dx,
            viscous_dissipation: state.epsilon * gradient_squared(u, dx) * dx,
            mass,
            momentum: fluid_momentum * dx + particle_momentum,
            boundary_mass_indicator: state.f.boundary_mass_fraction(),
            u4_window: window_integral(grid, window, |i| u[i].powi(4)),
        }
    }
}

/// Σ u_x² with centered differences, one-sided at the two end cells.
pub(crate) fn gradient_squared(u: &[f64], dx: f64) -> f64 {
    let n = u.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let d = if i == 0 {
            (u[1] - u[0]) / dx
        } else if i == n - 1 {
            (u[n - 1] - u[n - 2]) / dx
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * dx)
        };
        s += d * d;
    }
    s
}

/// Fraction of cell `i` covered by the interval `window`.
pub(crate) fn overlap_weight(grid: &PhaseGrid, i: usize, window: (f64, f64)) -> f64 {
    let dx = grid.dx();
    let lo = grid.x_min + i as f64 * dx;
    let hi = lo + dx;
    ((hi.min(window.1) - lo.max(window.0)) / dx).clamp(0.0, 1.0)
}

/// ∫_K g dx with cells weighted by their overlap with K.
pub(crate) fn window_integral(grid: &PhaseGrid, window: (f64, f64), g: impl Fn(usize) -> f64) -> f64 {
    let dx = grid.dx();
    (0..grid.nx)
        .map(|i| {
            let w = overlap_weight(grid, i, window);
            if w > 0.0 {
                w * g(i)
            } else {
                0.0
            }
        })
        .sum::<f64>()
        * dx
}

/// Fields at one recorded time, as seen by time-integrated diagnostics.
pub struct Sample<'a> {
    pub t: f64,
    pub u: &'a FluidField,
    /// ∫ f (v - u) dv per cell.
    pub source: &'a [f64],
    pub f: Option<&'a KineticField>,
}

/// Running trapezoid sums of several integrands over nonuniform times.
#[derive(Clone, Debug, Default)]
pub struct Trapezoid {
    last: Option<(f64, Vec<f64>)>,
    total: Vec<f64>,
}

impl Trapezoid {
    pub fn push(&mut self, t: f64, values: Vec<f64>) {
        match &self.last {
            Some((t0, v0)) => {
                let h = t - t0;
                for ((acc, a), b) in self.total.iter_mut().zip(v0).zip(&values) {
                    *acc += 0.5 * h * (a + b);
                }
            }
            None => self.total = vec![0.0; values.len()],
        }
        self.last = Some((t, values));
    }

    pub fn totals(&self) -> &[f64] {
        &self.total
    }

    pub fn is_started(&self) -> bool {
        self.last.is_some()
    }
}

/// Replays recorded frames as samples.
pub(crate) fn fluid_samples(traj: &Trajectory) -> crate::error::Result<impl Iterator<Item = Sample<'_>>> {
    Ok(traj.fluid_frames()?.iter().map(|fr| Sample {
        t: fr.t,
        u: &fr.u,
        source: &fr.source,
        f: fr.f.as_ref(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connector::build_connector;
    use crate::coupling::{moments, StepState};

    fn state_record(u: &FluidField, f: &KineticField, grid: &PhaseGrid, eps: f64) -> DiagnosticsRecord {
        let conn = build_connector(u.u_minus, u.u_plus, 1.0, grid).unwrap();
        let m = moments(f, grid);
        let st = StepState {
            step: 0,
            t: 0.0,
            dt: 0.0,
            u,
            f,
            moments: &m,
            grid,
            epsilon: eps,
            connector: &conn,
        };
        DiagnosticsRecord::from_state(&st, (-1.0, 1.0))
    }

    #[test]
    fn record_of_rest_state() {
        let g = PhaseGrid::new(-4.0, 4.0, 64, -3.0, 3.0, 32).unwrap();
        let r = state_record(&FluidField::constant(&g, 0.0), &KineticField::zeros(&g), &g, 0.1);
        assert_eq!(
            (
                r.energy,
                r.drag_dissipation,
                r.viscous_dissipation,
                r.mass,
                r.momentum,
                r.u4_window
            ),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn drag_dissipation_matches_direct_sum() {
        let g = PhaseGrid::new(-4.0, 4.0, 40, -3.0, 3.0, 48).unwrap();
        let u = FluidField::new(g.x_centers().iter().map(|x| 0.3 * (-x * x).exp()).collect(), 0.0, 0.0);
        let f = KineticField::from_fn(&g, |x, v| (-(x * x) - 4.0 * (v - 0.2).powi(2)).exp());
        let r = state_record(&u, &f, &g, 0.0);
        let mut direct = 0.0;
        for i in 0..g.nx {
            for j in 0..g.nv {
                direct += f.get(i, j) * (g.v(j) - u.u[i]).powi(2);
            }
        }
        direct *= g.dx() * g.dv();
        assert!((r.drag_dissipation - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn window_integral_uses_overlap() {
        // cells of width 0.5 from -2; window [-0.25, 0.75] covers 2 full cells' worth
        let g = PhaseGrid::new(-2.0, 2.0, 8, -1.0, 1.0, 4).unwrap();
        let v = window_integral(&g, (-0.25, 0.75), |_| 1.0);
        assert!((v - 1.0).abs() < 1e-15);
        let u = FluidField::constant(&g, 1.0);
        let r = state_record(&u, &KineticField::zeros(&g), &g, 0.0);
        assert!((r.u4_window - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let mut tr = Trapezoid::default();
        for t in [0.0, 0.1, 0.35, 0.6, 1.0] {
            tr.push(t, vec![2.0 * t, 1.0]);
        }
        assert!((tr.totals()[0] - 1.0).abs() < 1e-15);
        assert!((tr.totals()[1] - 1.0).abs() < 1e-15);
    }
}
