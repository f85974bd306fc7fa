use super::{window_integral, DiagnosticsRecord, Trapezoid};
use crate::connector::ConnectorProfile;
use crate::coupling::Trajectory;
use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField};
use crate::grid::PhaseGrid;

/// E[u, f] = ½∫(u - ū)² + ½∫∫ f (1 + v²).
pub fn relative_energy(u: &FluidField, f: &KineticField, ubar: &ConnectorProfile, grid: &PhaseGrid) -> f64 {
    let dx = grid.dx();
    let fluid: f64 =
        u.u.iter()
            .zip(&ubar.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            * dx;
    0.5 * fluid + 0.5 * (f.mass(grid) + f.second_moment(grid))
}

/// ∫₀ᵗ (drag + viscous dissipation), trapezoid on the record times.
pub fn cumulative_dissipation(records: &[DiagnosticsRecord]) -> Vec<f64> {
    let mut tr = Trapezoid::default();
    records
        .iter()
        .map(|r| {
            tr.push(r.t, vec![r.drag_dissipation + r.viscous_dissipation]);
            tr.totals()[0]
        })
        .collect()
}

/// r(t) = E(t) + ∫₀ᵗ(drag + viscous) - E(0) at every recorded time.
///
/// Only meaningful when ū is constant; other runs are refused.
pub fn energy_balance_residual(traj: &Trajectory) -> Result<Vec<f64>> {
    if traj.config.u_minus != traj.config.u_plus {
        return Err(Error::domain(
            "energy identity needs u_minus == u_plus; use gronwall_bound_check instead",
        ));
    }
    let e0 = traj.records.first().map_or(0.0, |r| r.energy);
    Ok(cumulative_dissipation(&traj.records)
        .into_iter()
        .zip(&traj.records)
        .map(|(d, r)| r.energy + d - e0)
        .collect())
}

/// P(t) - P(0) at every recorded time.
pub fn momentum_drift(traj: &Trajectory) -> Vec<f64> {
    let p0 = traj.records.first().map_or(0.0, |r| r.momentum);
    traj.records.iter().map(|r| r.momentum - p0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GronwallConstants {
    pub c1: f64,
    pub c2: f64,
}

impl GronwallConstants {
    pub fn envelope(&self, e0: f64, t: f64) -> f64 {
        (e0 + self.c2 * t) * (self.c1 * t).exp()
    }
}

/// Fits `G(t) ≤ (E₀ + C₂t)e^{C₁t}` to the series `G`.
///
/// C₁ is the least-squares slope of `ln(G + 1)` against t, clamped at 0;
/// C₂ is the smallest value making the envelope hold at every sample.
pub fn fit_gronwall(times: &[f64], g: &[f64], e0: f64) -> GronwallConstants {
    let n = times.len() as f64;
    let c1 = if times.len() < 2 {
        0.0
    } else {
        let mt = times.iter().sum::<f64>() / n;
        let ys: Vec<f64> = g.iter().map(|v| (v + 1.0).ln()).collect();
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
        let sxy: f64 = times.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
        if sxx > 0.0 {
            (sxy / sxx).max(0.0)
        } else {
            0.0
        }
    };
    let c2 = times
        .iter()
        .zip(g)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, v)| (v * (-c1 * t).exp() - e0) / t)
        .fold(0.0, f64::max);
    GronwallConstants { c1, c2 }
}

#[derive(Clone, Debug)]
pub struct GronwallReport {
    pub constants: GronwallConstants,
    pub times: Vec<f64>,
    /// E(t) + ∫₀ᵗ(drag + viscous)
    pub lhs: Vec<f64>,
    pub envelope: Vec<f64>,
    /// max(lhs - envelope); ≤ 0 when the bound holds.
    pub max_excess: f64,
    pub holds: bool,
}

impl GronwallReport {
    /// Evaluates a trajectory's left side against given constants.
    pub fn against(records: &[DiagnosticsRecord], constants: GronwallConstants, tol: f64) -> Self {
        let e0 = records.first().map_or(0.0, |r| r.energy);
        let times: Vec<f64> = records.iter().map(|r| r.t).collect();
        let lhs: Vec<f64> = cumulative_dissipation(records)
            .into_iter()
            .zip(records)
            .map(|(d, r)| r.energy + d)
            .collect();
        let envelope: Vec<f64> = times.iter().map(|&t| constants.envelope(e0, t)).collect();
        let max_excess = lhs
            .iter()
            .zip(&envelope)
            .map(|(l, e)| l - e)
            .fold(f64::NEG_INFINITY, f64::max);
        GronwallReport {
            constants,
            times,
            lhs,
            envelope,
            max_excess,
            holds: max_excess <= tol,
        }
    }
}

/// Fits Gronwall constants to a run and checks its own envelope.
pub fn gronwall_bound_check(traj: &Trajectory) -> GronwallReport {
    let records = &traj.records;
    let e0 = records.first().map_or(0.0, |r| r.energy);
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let lhs: Vec<f64> = cumulative_dissipation(records)
        .into_iter()
        .zip(records)
        .map(|(d, r)| r.energy + d)
        .collect();
    let constants = fit_gronwall(&times, &lhs, e0);
    GronwallReport::against(records, constants, 1e-12 * e0.max(1.0))
}

/// ∫₀ᵀ ∫_K u⁴ dx dt.
///
/// Uses per-step frames when recorded; otherwise `K` must be the configured
/// window, whose integrand every record carries.
pub fn l4_local(traj: &Trajectory, k: (f64, f64)) -> Result<f64> {
    let g = &traj.grid;
    if !(k.0 < k.1 && k.0 >= g.x_min && k.1 <= g.x_max) {
        return Err(Error::domain(format!(
            "window [{}, {}] is not inside the x-domain",
            k.0, k.1
        )));
    }
    let mut tr = Trapezoid::default();
    if !traj.frames.is_empty() {
        for fr in &traj.frames {
            tr.push(fr.t, vec![window_integral(g, k, |i| fr.u.u[i].powi(4))]);
        }
    } else if k == traj.config.window {
        for r in &traj.records {
            tr.push(r.t, vec![r.u4_window]);
        }
    } else {
        return Err(Error::MissingData(
            "per-step frames for a window other than the configured one",
        ));
    }
    Ok(tr.totals().first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connector::build_connector;

    #[test]
    fn energy_examples() {
        let g = PhaseGrid::new(-4.0, 4.0, 160, -6.0, 6.0, 240).unwrap();
        let ubar = build_connector(1.0, 0.0, 1.0, &g).unwrap();
        let u = FluidField::new(ubar.values.clone(), 1.0, 0.0);
        assert_eq!(relative_energy(&u, &KineticField::zeros(&g), &ubar, &g), 0.0);

        // u = ū, Gaussian in v with unit mass and variance, localized in x
        let f = KineticField::from_fn(&g, |x, v| {
            (-v * v / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt() * (-x * x / 0.5).exp()
                / (0.5 * std::f64::consts::PI).sqrt()
        });
        let e = relative_energy(&u, &f, &ubar, &g);
        assert!((e - 1.0).abs() < 1e-3, "{e}");

        // u = ū + 1 on [-1, 1]
        let bumped: Vec<f64> = g
            .x_centers()
            .iter()
            .zip(&ubar.values)
            .map(|(x, b)| if x.abs() < 1.0 { b + 1.0 } else { *b })
            .collect();
        let e = relative_energy(&FluidField::new(bumped, 1.0, 0.0), &KineticField::zeros(&g), &ubar, &g);
        assert!((e - 1.0).abs() < 1e-12, "{e}");
    }

    #[test]
    fn gronwall_fit_recovers_exponential() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        let g: Vec<f64> = times.iter().map(|t| 2.0 * (0.5 * t).exp()).collect();
        let c = fit_gronwall(&times, &g, 2.0);
        assert!(c.c1 > 0.0);
        for (t, v) in times.iter().zip(&g) {
            assert!(*v <= c.envelope(2.0, *t) + 1e-12);
        }
    }

    #[test]
    fn gronwall_fit_of_decreasing_series_is_zero() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let g: Vec<f64> = times.iter().map(|t| 1.0 - 0.1 * t).collect();
        let c = fit_gronwall(&times, &g, 1.0);
        assert_eq!(c, GronwallConstants { c1: 0.0, c2: 0.0 });
    }
}
