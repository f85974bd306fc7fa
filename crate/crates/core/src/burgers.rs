//! Viscous Burgers step with a prescribed drag source.
//!
//! Finite-volume update on cell averages:
//!
//! u'ᵢ = uᵢ - (dt/dx)(F_{i+1/2} - F_{i-1/2}) + dt·ε·(u_{i+1} - 2uᵢ + u_{i-1})/dx² + dt·sᵢ
//!
//! with ghost cells pinned to the far-field states. Face fluxes act on
//! reconstructed left/right states: piecewise constant (first order) or
//! minmod-limited linear (MUSCL).

use crate::field::FluidField;
use crate::grid::PhaseGrid;
use crate::registry::Named;

/// Two-point numerical flux for the Burgers flux `u²/2`.
pub trait NumericalFlux: Named + Send + Sync {
    fn flux(&self, ul: f64, ur: f64) -> f64;
}

/// Local Lax-Friedrichs (Rusanov) flux.
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalLaxFriedrichs;

impl Named for LocalLaxFriedrichs {
    fn name(&self) -> &'static str {
        "llf"
    }
}

impl NumericalFlux for LocalLaxFriedrichs {
    #[inline]
    fn flux(&self, ul: f64, ur: f64) -> f64 {
        let alpha = ul.abs().max(ur.abs());
        0.25 * (ul * ul + ur * ur) - 0.5 * alpha * (ur - ul)
    }
}

/// Exact Riemann-solver (Godunov) flux for Burgers.
#[derive(Clone, Copy, Debug, Default)]
pub struct GodunovFlux;

impl Named for GodunovFlux {
    fn name(&self) -> &'static str {
        "godunov"
    }
}

impl NumericalFlux for GodunovFlux {
    #[inline]
    fn flux(&self, ul: f64, ur: f64) -> f64 {
        if ul <= ur {
            // rarefaction: minimize u²/2 over [ul, ur]
            if ul > 0.0 {
                0.5 * ul * ul
            } else if ur < 0.0 {
                0.5 * ur * ur
            } else {
                0.0
            }
        } else {
            0.5 * ul.abs().max(ur.abs()).powi(2)
        }
    }
}

/// Left and right states at the cell faces.
pub trait Reconstruction: Named + Send + Sync {
    /// Writes `(u_L, u_R)` at faces `0..=n`; face `k` separates cells `k-1` and `k`.
    fn face_states(&self, u: &FluidField, out: &mut Vec<(f64, f64)>);
}

/// Cell averages used as face states.
#[derive(Clone, Copy, Debug, Default)]
pub struct PiecewiseConstant;

impl Named for PiecewiseConstant {
    fn name(&self) -> &'static str {
        "constant"
    }
}

impl Reconstruction for PiecewiseConstant {
    fn face_states(&self, u: &FluidField, out: &mut Vec<(f64, f64)>) {
        out.clear();
        out.extend((0..=u.len() as isize).map(|k| (u.with_ghost(k - 1), u.with_ghost(k))));
    }
}

/// Piecewise linear with minmod-limited slopes; ghost cells are flat.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinmodMuscl;

impl Named for MinmodMuscl {
    fn name(&self) -> &'static str {
        "minmod"
    }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl Reconstruction for MinmodMuscl {
    fn face_states(&self, u: &FluidField, out: &mut Vec<(f64, f64)>) {
        let n = u.len() as isize;
        let slope = |i: isize| {
            if i < 0 || i >= n {
                0.0
            } else {
                let c = u.with_ghost(i);
                minmod(c - u.with_ghost(i - 1), u.with_ghost(i + 1) - c)
            }
        };
        out.clear();
        out.extend((0..=n).map(|k| {
            (
                u.with_ghost(k - 1) + 0.5 * slope(k - 1),
                u.with_ghost(k) - 0.5 * slope(k),
            )
        }));
    }
}

/// Drag force per unit length, `sᵢ = ∫ f(xᵢ, v)(v - u(xᵢ)) dv`.
#[derive(Clone, Debug, PartialEq)]
pub struct DragSource {
    pub s: Vec<f64>,
}

impl DragSource {
    pub fn zeros(n: usize) -> Self {
        DragSource { s: vec![0.0; n] }
    }
}

/// Largest stable explicit step, `cfl · min(dx/max|u|, dx²/(2ε))`.
///
/// A term whose denominator vanishes is dropped; with both gone the step is
/// `cfl · dx`.
pub fn stable_dt(u: &FluidField, epsilon: f64, grid: &PhaseGrid, cfl: f64) -> f64 {
    let dx = grid.dx();
    let umax = u.max_abs();
    let mut limit = f64::INFINITY;
    if umax > 0.0 {
        limit = limit.min(dx / umax);
    }
    if epsilon > 0.0 {
        limit = limit.min(dx * dx / (2.0 * epsilon));
    }
    if limit.is_infinite() {
        limit = dx;
    }
    cfl * limit
}

/// Index of the first non-finite cell produced by a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonFinite {
    pub cell: usize,
}

/// One explicit step with the local Lax-Friedrichs flux on MUSCL states.
pub fn burgers_step(
    u: &FluidField,
    source: &DragSource,
    epsilon: f64,
    dt: f64,
    grid: &PhaseGrid,
) -> Result<FluidField, NonFinite> {
    burgers_step_with(&LocalLaxFriedrichs, &MinmodMuscl, u, source, epsilon, dt, grid)
}

pub fn burgers_step_with(
    flux: &dyn NumericalFlux,
    recon: &dyn Reconstruction,
    u: &FluidField,
    source: &DragSource,
    epsilon: f64,
    dt: f64,
    grid: &PhaseGrid,
) -> Result<FluidField, NonFinite> {
    let n = u.len();
    assert_eq!(source.s.len(), n, "drag source length must match nx");
    let dx = grid.dx();
    let lam = dt / dx;
    let nu = epsilon * dt / (dx * dx);

    let mut states = Vec::with_capacity(n + 1);
    recon.face_states(u, &mut states);
    let faces: Vec<f64> = states.iter().map(|&(l, r)| flux.flux(l, r)).collect();

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ui = u.u[i];
        let left = u.with_ghost(i as isize - 1);
        let right = u.with_ghost(i as isize + 1);
        let next = ui - lam * (faces[i + 1] - faces[i]) + nu * (right - 2.0 * ui + left) + dt * source.s[i];
        if !next.is_finite() {
            return Err(NonFinite { cell: i });
        }
        out.push(next);
    }
    Ok(FluidField::new(out, u.u_minus, u.u_plus))
}
