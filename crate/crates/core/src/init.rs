//! Initial-data families, selected by name through [`Registries`].

use crate::config::{FluidInit, KineticInit, SimConfig};
use crate::connector::{build_connector, ConnectorProfile};
use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField};
use crate::grid::PhaseGrid;
use crate::registry::{Named, Registries};

pub struct InitContext<'a> {
    pub grid: &'a PhaseGrid,
    pub epsilon: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub connector: &'a ConnectorProfile,
}

pub trait FluidProfile: Named + Send + Sync {
    /// Samples u₀ at the x-cell centers.
    fn build(&self, params: &FluidInit, ctx: &InitContext<'_>) -> Result<Vec<f64>>;
}

pub trait KineticProfile: Named + Send + Sync {
    fn build(&self, params: &KineticInit, grid: &PhaseGrid) -> Result<KineticField>;
}

/// Smoothed Riemann step `u⁻ + (u⁺ - u⁻)(1 + tanh((x - c)/w))/2`.
///
/// The default width `4ε/|u⁻ - u⁺|` makes a decreasing step the exact
/// viscous traveling wave.
pub struct RiemannFluid;

impl RiemannFluid {
    pub fn default_width(ctx: &InitContext<'_>) -> f64 {
        let jump = (ctx.u_minus - ctx.u_plus).abs();
        if ctx.epsilon > 0.0 && jump > 0.0 {
            4.0 * ctx.epsilon / jump
        } else {
            2.0 * ctx.grid.dx()
        }
    }
}

impl Named for RiemannFluid {
    fn name(&self) -> &'static str {
        "riemann"
    }
}

impl FluidProfile for RiemannFluid {
    fn build(&self, params: &FluidInit, ctx: &InitContext<'_>) -> Result<Vec<f64>> {
        let w = params.width.unwrap_or_else(|| RiemannFluid::default_width(ctx));
        let (um, up) = (ctx.u_minus, ctx.u_plus);
        Ok(ctx
            .grid
            .x_centers()
            .into_iter()
            .map(|x| um + (up - um) * 0.5 * (1.0 + ((x - params.center) / w).tanh()))
            .collect())
    }
}

/// Gaussian bump on top of the connector: `ū(x) + A exp(-(x - c)²/(2w²))`.
pub struct BumpFluid;

impl Named for BumpFluid {
    fn name(&self) -> &'static str {
        "bump"
    }
}

impl FluidProfile for BumpFluid {
    fn build(&self, params: &FluidInit, ctx: &InitContext<'_>) -> Result<Vec<f64>> {
        let w = params.width.unwrap_or(0.5);
        let a = params.amplitude;
        let g = |x: f64| a * (-(x - params.center).powi(2) / (2.0 * w * w)).exp();
        let edge = g(ctx.grid.x_min).abs().max(g(ctx.grid.x_max).abs());
        if edge > 1e-10 * a.abs().max(1.0) {
            return Err(Error::domain(format!(
                "bump (center {}, width {w}) does not decay inside the x-domain",
                params.center
            )));
        }
        Ok(ctx
            .grid
            .x_centers()
            .into_iter()
            .zip(&ctx.connector.values)
            .map(|(x, ub)| ub + g(x))
            .collect())
    }
}

/// The connector profile itself, u₀ = ū.
pub struct ConnectorFluid;

impl Named for ConnectorFluid {
    fn name(&self) -> &'static str {
        "connector"
    }
}

impl FluidProfile for ConnectorFluid {
    fn build(&self, _params: &FluidInit, ctx: &InitContext<'_>) -> Result<Vec<f64>> {
        Ok(ctx.connector.values.clone())
    }
}

/// Constant state; needs equal far-field states.
pub struct ConstantFluid;

impl Named for ConstantFluid {
    fn name(&self) -> &'static str {
        "constant"
    }
}

impl FluidProfile for ConstantFluid {
    fn build(&self, _params: &FluidInit, ctx: &InitContext<'_>) -> Result<Vec<f64>> {
        if ctx.u_minus != ctx.u_plus {
            return Err(Error::domain("constant fluid profile needs u_minus == u_plus"));
        }
        Ok(vec![ctx.u_minus; ctx.grid.nx])
    }
}

pub struct ZeroKinetic;

impl Named for ZeroKinetic {
    fn name(&self) -> &'static str {
        "zero"
    }
}

impl KineticProfile for ZeroKinetic {
    fn build(&self, _params: &KineticInit, grid: &PhaseGrid) -> Result<KineticField> {
        Ok(KineticField::zeros(grid))
    }
}

fn check_support(grid: &PhaseGrid, x0: f64, hx: f64, v0: f64, hv: f64) -> Result<()> {
    if x0 - hx <= grid.x_min || x0 + hx >= grid.x_max || v0 - hv <= grid.v_min || v0 + hv >= grid.v_max {
        return Err(Error::domain(format!(
            "kinetic support [{}, {}] x [{}, {}] exceeds the grid",
            x0 - hx,
            x0 + hx,
            v0 - hv,
            v0 + hv
        )));
    }
    Ok(())
}

/// Normalized 2D Gaussian of the given mass, cut off on the ellipse of
/// radius `cutoff` standard deviations.
pub struct GaussianKinetic;

impl Named for GaussianKinetic {
    fn name(&self) -> &'static str {
        "gaussian"
    }
}

impl KineticProfile for GaussianKinetic {
    fn build(&self, p: &KineticInit, grid: &PhaseGrid) -> Result<KineticField> {
        if !(p.sigma_x > 0.0 && p.sigma_v > 0.0) {
            return Err(Error::domain("gaussian widths must be positive"));
        }
        if p.mass < 0.0 {
            return Err(Error::domain("kinetic mass must be non-negative"));
        }
        check_support(grid, p.x0, p.cutoff * p.sigma_x, p.v0, p.cutoff * p.sigma_v)?;
        let norm = p.mass / (2.0 * std::f64::consts::PI * p.sigma_x * p.sigma_v);
        let r2max = p.cutoff * p.cutoff;
        Ok(KineticField::from_fn(grid, |x, v| {
            let a = (x - p.x0) / p.sigma_x;
            let b = (v - p.v0) / p.sigma_v;
            let r2 = a * a + b * b;
            if r2 <= r2max {
                norm * (-0.5 * r2).exp()
            } else {
                0.0
            }
        }))
    }
}

/// Uniform density on `[x0 ± half_x] × [v0 ± half_v]` carrying `mass`.
pub struct BoxKinetic;

impl Named for BoxKinetic {
    fn name(&self) -> &'static str {
        "box"
    }
}

impl KineticProfile for BoxKinetic {
    fn build(&self, p: &KineticInit, grid: &PhaseGrid) -> Result<KineticField> {
        if !(p.half_x > 0.0 && p.half_v > 0.0) {
            return Err(Error::domain("box half-widths must be positive"));
        }
        if p.mass < 0.0 {
            return Err(Error::domain("kinetic mass must be non-negative"));
        }
        check_support(grid, p.x0, p.half_x, p.v0, p.half_v)?;
        let height = p.mass / (4.0 * p.half_x * p.half_v);
        Ok(KineticField::from_fn(grid, |x, v| {
            if (x - p.x0).abs() <= p.half_x && (v - p.v0).abs() <= p.half_v {
                height
            } else {
                0.0
            }
        }))
    }
}

/// Initial state of a run.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub u: FluidField,
    pub f: KineticField,
    pub connector: ConnectorProfile,
}

pub fn make_initial_data(config: &SimConfig, registries: &Registries) -> Result<InitialState> {
    let grid = &config.grid;
    let connector = build_connector(config.u_minus, config.u_plus, config.connector_l0, grid)?;
    let ctx = InitContext {
        grid,
        epsilon: config.epsilon,
        u_minus: config.u_minus,
        u_plus: config.u_plus,
        connector: &connector,
    };
    let u = registries
        .fluid_profiles
        .get(&config.fluid.family)?
        .build(&config.fluid, &ctx)?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("fluid initial data is not finite"));
    }
    let f = registries
        .kinetic_profiles
        .get(&config.kinetic.family)?
        .build(&config.kinetic, grid)?;
    Ok(InitialState {
        u: FluidField::new(u, config.u_minus, config.u_plus),
        f,
        connector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registries() -> Registries {
        Registries::builtin()
    }

    #[test]
    fn zero_kinetic_with_smoothed_step() {
        let cfg = SimConfig::default();
        let s = make_initial_data(&cfg, &registries()).unwrap();
        assert!(s.f.is_zero());
        let g = &cfg.grid;
        // tanh step of width 4ε about the origin, decreasing from 1 to 0
        for (i, &u) in s.u.u.iter().enumerate() {
            let expect = 0.5 - 0.5 * (g.x(i) / (4.0 * cfg.epsilon)).tanh();
            assert!((u - expect).abs() < 1e-15);
        }
        assert!(s.u.u[0] > 0.999 && s.u.u[g.nx - 1] < 1e-3);
    }

    #[test]
    fn gaussian_mass_matches_2d_quadrature_oracle() {
        // Oracle: tensor Gauss-Hermite-free check. Integrate the same Gaussian with
        // a 4x finer midpoint rule written independently of the profile code.
        let mut cfg = SimConfig::default();
        cfg.kinetic.family = "gaussian".into();
        let s = make_initial_data(&cfg, &registries()).unwrap();
        let mass = s.f.mass(&cfg.grid);
        let n = 800;
        let (hx, hv) = (20.0 / n as f64, 16.0 / n as f64);
        let mut oracle = 0.0;
        for a in 0..n {
            let x = -10.0 + (a as f64 + 0.5) * hx;
            for b in 0..n {
                let v = -8.0 + (b as f64 + 0.5) * hv;
                let r2 = x * x + v * v;
                if r2 <= 36.0 {
                    oracle += (-0.5 * r2).exp() / (2.0 * std::f64::consts::PI);
                }
            }
        }
        oracle *= hx * hv;
        assert!((oracle - 1.0).abs() < 1e-6, "oracle {oracle}");
        assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
        assert!(s.f.min_value() >= 0.0);
    }

    #[test]
    fn support_outside_grid_is_rejected() {
        let mut cfg = SimConfig::default();
        cfg.kinetic.family = "gaussian".into();
        cfg.kinetic.x0 = 8.0;
        assert!(matches!(make_initial_data(&cfg, &registries()), Err(Error::Domain(_))));
        cfg.kinetic.family = "box".into();
        cfg.kinetic.x0 = 0.0;
        cfg.kinetic.half_v = 9.0;
        assert!(matches!(make_initial_data(&cfg, &registries()), Err(Error::Domain(_))));
    }

    #[test]
    fn box_mass() {
        let mut cfg = SimConfig::default();
        cfg.grid.nx = 200;
        cfg.grid.nv = 160;
        cfg.kinetic.family = "box".into();
        cfg.kinetic.mass = 2.0;
        cfg.kinetic.half_x = 1.0;
        cfg.kinetic.half_v = 1.0;
        let s = make_initial_data(&cfg, &registries()).unwrap();
        assert!((s.f.mass(&cfg.grid) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_family_is_an_error() {
        let mut cfg = SimConfig::default();
        cfg.fluid.family = "sawtooth".into();
        assert!(matches!(
            make_initial_data(&cfg, &registries()),
            Err(Error::UnknownStrategy { .. })
        ));
    }

    #[test]
    fn constant_needs_equal_states() {
        let mut cfg = SimConfig::default();
        cfg.fluid.family = "constant".into();
        assert!(make_initial_data(&cfg, &registries()).is_err());
        cfg.u_plus = 1.0;
        let s = make_initial_data(&cfg, &registries()).unwrap();
        assert!(s.u.u.iter().all(|&u| u == 1.0));
    }
}
