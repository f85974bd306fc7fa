use crate::error::{Error, Result};
use crate::grid::PhaseGrid;

/// sup |B'| for B(θ) = (1 - θ²)³, attained at θ² = 1/5.
const SUP_DB: f64 = 1.717_300_206_719_838;

/// One-dimensional bump `B((y - c)/r)` with `B(θ) = (1 - θ²)³` on |θ| ≤ 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub c: f64,
    pub r: f64,
}

impl Bump {
    pub fn new(c: f64, r: f64) -> Self {
        Bump { c, r }
    }

    #[inline]
    pub fn value(&self, y: f64) -> f64 {
        let th = (y - self.c) / self.r;
        if th.abs() >= 1.0 {
            return 0.0;
        }
        let a = 1.0 - th * th;
        a * a * a
    }

    #[inline]
    pub fn deriv(&self, y: f64) -> f64 {
        let th = (y - self.c) / self.r;
        if th.abs() >= 1.0 {
            return 0.0;
        }
        let a = 1.0 - th * th;
        -6.0 * th * a * a / self.r
    }

    pub fn sup_deriv(&self) -> f64 {
        SUP_DB / self.r
    }

    pub fn support(&self) -> (f64, f64) {
        (self.c - self.r, self.c + self.r)
    }

    /// Values and derivatives at the given points.
    pub(crate) fn tabulate(&self, ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            ys.iter().map(|&y| self.value(y)).collect(),
            ys.iter().map(|&y| self.deriv(y)).collect(),
        )
    }
}

/// Tensor-product bump φ(x, t) or φ(x, v, t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    pub x: Bump,
    pub t: Bump,
    /// Velocity factor; `None` for a space-time function.
    pub v: Option<Bump>,
}

impl TestFunction {
    pub fn space_time(xc: f64, rx: f64, tc: f64, rt: f64) -> Self {
        TestFunction {
            x: Bump::new(xc, rx),
            t: Bump::new(tc, rt),
            v: None,
        }
    }

    pub fn with_velocity(mut self, vc: f64, rv: f64) -> Self {
        self.v = Some(Bump::new(vc, rv));
        self
    }

    pub fn is_phase_space(&self) -> bool {
        self.v.is_some()
    }

    /// φ(x, v, t); a space-time function ignores `v`.
    pub fn value(&self, x: f64, v: f64, t: f64) -> f64 {
        self.x.value(x) * self.t.value(t) * self.v.map_or(1.0, |b| b.value(v))
    }

    /// (φ_x, φ_v, φ_t); φ_v is 0 for a space-time function.
    pub fn gradient(&self, x: f64, v: f64, t: f64) -> (f64, f64, f64) {
        let (bx, dbx) = (self.x.value(x), self.x.deriv(x));
        let (bt, dbt) = (self.t.value(t), self.t.deriv(t));
        let (bv, dbv) = self.v.map_or((1.0, 0.0), |b| (b.value(v), b.deriv(v)));
        (dbx * bv * bt, bx * dbv * bt, bx * bv * dbt)
    }

    /// sup|φ| + Σ sup|∂φ|.
    pub fn c1_norm(&self) -> f64 {
        1.0 + self.x.sup_deriv() + self.t.sup_deriv() + self.v.map_or(0.0, |b| b.sup_deriv())
    }

    /// Checks compact support inside the grid interior and φ(·, T) = 0.
    pub fn validate(&self, grid: &PhaseGrid, t_final: f64) -> Result<()> {
        if !(self.x.r > 0.0 && self.t.r > 0.0 && self.v.map_or(true, |b| b.r > 0.0)) {
            return Err(Error::domain("test function radii must be positive"));
        }
        let (a, b) = self.x.support();
        if a <= grid.x_min || b >= grid.x_max {
            return Err(Error::domain(format!(
                "test function x-support [{a}, {b}] is not inside ({}, {})",
                grid.x_min, grid.x_max
            )));
        }
        if let Some(vb) = self.v {
            let (a, b) = vb.support();
            if a <= grid.v_min || b >= grid.v_max {
                return Err(Error::domain(format!(
                    "test function v-support [{a}, {b}] is not inside ({}, {})",
                    grid.v_min, grid.v_max
                )));
            }
        }
        let end = self.t.support().1;
        if end > t_final * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::domain(format!(
                "test function does not vanish at t = T (time support ends at {end} > {t_final})"
            )));
        }
        Ok(())
    }
}

/// Five space-time bumps around the origin, scaled to `[0, t_final]`.
pub fn default_test_functions(t_final: f64) -> Vec<TestFunction> {
    let t = t_final;
    vec![
        TestFunction::space_time(0.0, 0.5, 0.5 * t, 0.5 * t),
        TestFunction::space_time(0.25, 0.5, 0.25 * t, 0.5 * t),
        TestFunction::space_time(0.5, 0.75, 0.5 * t, 0.45 * t),
        TestFunction::space_time(-0.5, 0.5, 0.5 * t, 0.5 * t),
        TestFunction::space_time(0.0, 1.0, 0.4 * t, 0.6 * t),
    ]
}

/// The default placements with a velocity bump on `[-0.7, 0.9]`.
pub fn default_phase_test_functions(t_final: f64) -> Vec<TestFunction> {
    default_test_functions(t_final)
        .into_iter()
        .map(|p| p.with_velocity(0.1, 0.8))
        .collect()
}
