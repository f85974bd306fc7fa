//! Uniform phase-space grid.
//!
//! Values live at cell centers. The fluid velocity uses the x-axis only; the
//! particle distribution uses the full `nx × nv` tensor grid, stored x-major.

use crate::error::{Error, Result};

/// Uniform tensor grid in `(x, v)`; the fluid grid is its x-axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub nv: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, nx: usize, v_min: f64, v_max: f64, nv: usize) -> Result<Self> {
        let grid = PhaseGrid {
            x_min,
            x_max,
            nx,
            v_min,
            v_max,
            nv,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 4 {
            return Err(Error::invalid("nx", format!("need at least 4 cells, got {}", self.nx)));
        }
        if self.nv < 4 {
            return Err(Error::invalid("nv", format!("need at least 4 cells, got {}", self.nv)));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_max <= self.x_min {
            return Err(Error::invalid("x_max", "x_max must exceed x_min"));
        }
        if !(self.v_min.is_finite() && self.v_max.is_finite()) || self.v_max <= self.v_min {
            return Err(Error::invalid("v_max", "v_max must exceed v_min"));
        }
        if !(self.v_min < 0.0 && 0.0 < self.v_max) {
            return Err(Error::invalid("v_min", "velocity range must bracket zero"));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    #[inline]
    pub fn dv(&self) -> f64 {
        (self.v_max - self.v_min) / self.nv as f64
    }

    /// Center of x-cell `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    /// Center of v-cell `j`.
    #[inline]
    pub fn v(&self, j: usize) -> f64 {
        self.v_min + (j as f64 + 0.5) * self.dv()
    }

    pub fn x_centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn v_centers(&self) -> Vec<f64> {
        (0..self.nv).map(|j| self.v(j)).collect()
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.nx * self.nv
    }

    /// Same bounds, different resolution.
    pub fn with_resolution(&self, nx: usize, nv: usize) -> Result<Self> {
        PhaseGrid::new(self.x_min, self.x_max, nx, self.v_min, self.v_max, nv)
    }

    pub fn contains_x(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}
