//! Monotone reference profile joining the far-field states.

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;

/// C¹ monotone profile equal to `u_minus` for `x <= -l0` and `u_plus` for
/// `x >= l0`, joined by the cubic smoothstep `3θ² - 2θ³`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectorProfile {
    pub l0: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    /// ū sampled at the x-cell centers.
    pub values: Vec<f64>,
}

impl ConnectorProfile {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        connector_value(self.u_minus, self.u_plus, self.l0, x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        if x <= -self.l0 || x >= self.l0 {
            return 0.0;
        }
        let theta = (x + self.l0) / (2.0 * self.l0);
        (self.u_plus - self.u_minus) * 6.0 * theta * (1.0 - theta) / (2.0 * self.l0)
    }

    pub fn is_constant(&self) -> bool {
        self.u_minus == self.u_plus
    }
}

#[inline]
fn connector_value(u_minus: f64, u_plus: f64, l0: f64, x: f64) -> f64 {
    if x <= -l0 {
        return u_minus;
    }
    if x >= l0 {
        return u_plus;
    }
    let theta = (x + l0) / (2.0 * l0);
    let s = theta * theta * (3.0 - 2.0 * theta);
    u_minus + (u_plus - u_minus) * s
}

pub fn build_connector(u_minus: f64, u_plus: f64, l0: f64, grid: &PhaseGrid) -> Result<ConnectorProfile> {
    if !(l0 > 0.0) {
        return Err(Error::domain(format!(
            "connector half-width must be positive, got {l0}"
        )));
    }
    if !(l0 < grid.x_max && -l0 > grid.x_min) {
        return Err(Error::domain(format!(
            "transition zone [-{l0}, {l0}] not inside [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    let values = grid
        .x_centers()
        .into_iter()
        .map(|x| connector_value(u_minus, u_plus, l0, x))
        .collect();
    Ok(ConnectorProfile {
        l0,
        u_minus,
        u_plus,
        values,
    })
}
