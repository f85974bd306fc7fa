//! Fluid and kinetic fields on a [`PhaseGrid`].

use crate::grid::PhaseGrid;

/// Bulk gas velocity at x-cell centers plus its far-field states.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidField {
    pub u: Vec<f64>,
    pub u_minus: f64,
    pub u_plus: f64,
}

impl FluidField {
    pub fn new(u: Vec<f64>, u_minus: f64, u_plus: f64) -> Self {
        FluidField { u, u_minus, u_plus }
    }

    pub fn constant(grid: &PhaseGrid, c: f64) -> Self {
        FluidField::new(vec![c; grid.nx], c, c)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite()) && self.u_minus.is_finite() && self.u_plus.is_finite()
    }

    /// Value in cell `i`, where `-1` and `nx` address the ghost cells.
    #[inline]
    pub fn with_ghost(&self, i: isize) -> f64 {
        if i < 0 {
            self.u_minus
        } else if i as usize >= self.u.len() {
            self.u_plus
        } else {
            self.u[i as usize]
        }
    }

    /// Max of |u| over interior and ghost values.
    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .fold(self.u_minus.abs().max(self.u_plus.abs()), |m, v| m.max(v.abs()))
    }

    pub fn interpolator<'a>(&'a self, grid: &PhaseGrid) -> FluidInterp<'a> {
        FluidInterp {
            field: self,
            origin: grid.x_min - 0.5 * grid.dx(),
            inv_dx: 1.0 / grid.dx(),
        }
    }

    /// Linear interpolation between cell centers, extended by the ghost states.
    pub fn value_at(&self, grid: &PhaseGrid, x: f64) -> f64 {
        self.interpolator(grid).eval(x)
    }
}

/// Piecewise-linear reconstruction of a [`FluidField`].
///
/// Node `k` of the extended array sits at `x_min + (k - 1/2) dx` and holds the
/// left ghost for `k = 0`, cell `k - 1` for `1 <= k <= nx`, and the right ghost
/// for `k = nx + 1`. Outside that range the far-field constants apply.
#[derive(Clone, Copy)]
pub struct FluidInterp<'a> {
    field: &'a FluidField,
    origin: f64,
    inv_dx: f64,
}

impl FluidInterp<'_> {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.field.u.len();
        let s = (x - self.origin) * self.inv_dx;
        if !(s > 0.0) {
            return self.field.u_minus;
        }
        if s >= (n + 1) as f64 {
            return self.field.u_plus;
        }
        let k = s.floor() as usize;
        let w = s - k as f64;
        let a = self.node(k);
        let b = self.node(k + 1);
        a + w * (b - a)
    }

    #[inline]
    fn node(&self, k: usize) -> f64 {
        if k == 0 {
            self.field.u_minus
        } else if k > self.field.u.len() {
            self.field.u_plus
        } else {
            self.field.u[k - 1]
        }
    }
}

/// Particle distribution on the tensor grid, x-major (`data[i * nv + j]`).
/// Implicitly zero outside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticField {
    pub nx: usize,
    pub nv: usize,
    pub data: Vec<f64>,
}

impl KineticField {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        KineticField {
            nx: grid.nx,
            nv: grid.nv,
            data: vec![0.0; grid.cells()],
        }
    }

    pub fn from_fn(grid: &PhaseGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.cells());
        for i in 0..grid.nx {
            let x = grid.x(i);
            for j in 0..grid.nv {
                data.push(f(x, grid.v(j)));
            }
        }
        KineticField {
            nx: grid.nx,
            nv: grid.nv,
            data,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.nv + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.nv..(i + 1) * self.nv]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// ∫∫ f dv dx by midpoint quadrature.
    pub fn mass(&self, grid: &PhaseGrid) -> f64 {
        self.data.iter().sum::<f64>() * grid.dx() * grid.dv()
    }

    /// ∫∫ f v² dv dx.
    pub fn second_moment(&self, grid: &PhaseGrid) -> f64 {
        let vs = grid.v_centers();
        let mut s = 0.0;
        for i in 0..self.nx {
            s += self.row(i).iter().zip(&vs).map(|(f, v)| f * v * v).sum::<f64>();
        }
        s * grid.dx() * grid.dv()
    }

    /// Fraction of total mass held in the two outermost cells at each end
    /// of both axes. Zero for a zero field.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let total: f64 = self.data.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for i in 0..self.nx {
            let row = self.row(i);
            if i < 2 || i + 2 >= self.nx {
                edge += row.iter().sum::<f64>();
            } else {
                edge += row[0] + row[1] + row[self.nv - 2] + row[self.nv - 1];
            }
        }
        edge / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(0.0, 1.0, 10, -1.0, 1.0, 8).unwrap()
    }

    #[test]
    fn interpolation_hits_centers_and_ghosts() {
        let g = grid();
        let u = FluidField::new((0..10).map(|i| i as f64).collect(), -5.0, 20.0);
        assert_eq!(u.value_at(&g, g.x(3)), 3.0);
        assert!((u.value_at(&g, 0.5 * (g.x(3) + g.x(4))) - 3.5).abs() < 1e-14);
        // halfway between the left ghost node and cell 0
        assert!((u.value_at(&g, 0.0) - (-2.5)).abs() < 1e-14);
        assert_eq!(u.value_at(&g, -3.0), -5.0);
        assert_eq!(u.value_at(&g, 3.0), 20.0);
    }

    #[test]
    fn boundary_fraction_counts_edges() {
        let g = grid();
        let mut f = KineticField::zeros(&g);
        f.data[5 * 8 + 4] = 1.0;
        assert_eq!(f.boundary_mass_fraction(), 0.0);
        f.data[5 * 8] = 1.0;
        assert!((f.boundary_mass_fraction() - 0.5).abs() < 1e-15);
    }
}
