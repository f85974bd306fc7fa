//! Weak-form residuals of the inviscid system against tensor bumps.
//!
//! Burgers: ∫φ(x,0)u₀ + ∫₀ᵀ∫(uφ_t + ½u²φ_x + φ∫f(v-u)dv).
//! Vlasov:  ∫∫φ(x,v,0)f₀ + ∫₀ᵀ∫∫(fφ_t + fvφ_x + f(u-v)φ_v).
//!
//! For a viscous solution the Burgers residual equals ε∫∫u_xφ_x, reported
//! separately together with its Cauchy-Schwarz bound
//! √ε (∫∫εu_x²)^{1/2} ‖φ_x‖_{L²}.

use super::{fluid_samples, Sample, TestFunction, Trapezoid};
use crate::coupling::{StepObserver, StepState, Trajectory};
use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField};
use crate::grid::PhaseGrid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurgersResidual {
    pub residual: f64,
    /// ε ∫∫ u_x φ_x
    pub viscous_pairing: f64,
    /// √ε (∫∫ εu_x²)^{1/2} ‖φ_x‖_{L²}; bounds |viscous_pairing|.
    pub cs_bound: f64,
    pub c1_norm: f64,
}

impl BurgersResidual {
    pub fn normalized(&self) -> f64 {
        self.residual / self.c1_norm
    }
}

/// x-factor of a bump tabulated on cell centers and interior faces,
/// with the index range of centers where it is nonzero.
struct XTable {
    b: Vec<f64>,
    db: Vec<f64>,
    db_face: Vec<f64>,
    lo: usize,
    hi: usize,
}

impl XTable {
    fn new(phi: &TestFunction, grid: &PhaseGrid) -> Self {
        let xs = grid.x_centers();
        let (b, db) = phi.x.tabulate(&xs);
        let faces: Vec<f64> = (1..grid.nx).map(|i| grid.x_min + i as f64 * grid.dx()).collect();
        let db_face = faces.iter().map(|&x| phi.x.deriv(x)).collect();
        let (lo, hi) = support_range(&b, &db);
        XTable { b, db, db_face, lo, hi }
    }
}

/// Smallest index range [lo, hi) outside which both tables vanish.
fn support_range(b: &[f64], db: &[f64]) -> (usize, usize) {
    let nz = |k: usize| b[k] != 0.0 || db[k] != 0.0;
    let lo = (0..b.len()).find(|&k| nz(k)).unwrap_or(b.len());
    let hi = (0..b.len()).rev().find(|&k| nz(k)).map_or(lo, |k| k + 1);
    (lo, hi)
}

/// Streaming Burgers residuals for a fixed set of space-time test functions.
pub struct BurgersWeakAccumulator {
    tests: Vec<TestFunction>,
    tables: Vec<XTable>,
    grid: PhaseGrid,
    epsilon: f64,
    initial: Vec<f64>,
    trap: Trapezoid,
}

impl BurgersWeakAccumulator {
    pub fn new(tests: &[TestFunction], grid: &PhaseGrid, epsilon: f64, t_final: f64) -> Result<Self> {
        for p in tests {
            if p.is_phase_space() {
                return Err(Error::domain("Burgers residual needs a space-time test function"));
            }
            p.validate(grid, t_final)?;
        }
        Ok(BurgersWeakAccumulator {
            tests: tests.to_vec(),
            tables: tests.iter().map(|p| XTable::new(p, grid)).collect(),
            grid: *grid,
            epsilon,
            initial: Vec::new(),
            trap: Trapezoid::default(),
        })
    }

    pub fn push(&mut self, s: &Sample<'_>) {
        let dx = self.grid.dx();
        let u = &s.u.u;
        if !self.trap.is_started() {
            self.initial = self
                .tests
                .iter()
                .zip(&self.tables)
                .map(|(p, tb)| {
                    let bt = p.t.value(s.t);
                    (tb.lo..tb.hi).map(|i| tb.b[i] * bt * u[i]).sum::<f64>() * dx
                })
                .collect();
        }
        let mut values = Vec::with_capacity(3 * self.tests.len() + 1);
        for (p, tb) in self.tests.iter().zip(&self.tables) {
            let (bt, dbt) = (p.t.value(s.t), p.t.deriv(s.t));
            let mut g = 0.0;
            for i in tb.lo..tb.hi {
                g += u[i] * tb.b[i] * dbt + 0.5 * u[i] * u[i] * tb.db[i] * bt + tb.b[i] * bt * s.source[i];
            }
            let mut pair = 0.0;
            let mut phix2 = 0.0;
            for (k, &d) in tb.db_face.iter().enumerate() {
                if d != 0.0 {
                    pair += (u[k + 1] - u[k]) / dx * d * bt;
                    phix2 += (d * bt) * (d * bt);
                }
            }
            values.extend([g * dx, self.epsilon * pair * dx, phix2 * dx]);
        }
        let ux2: f64 = u.windows(2).map(|w| ((w[1] - w[0]) / dx).powi(2)).sum();
        values.push(self.epsilon * ux2 * dx);
        self.trap.push(s.t, values);
    }

    pub fn finish(&self) -> Vec<BurgersResidual> {
        let tot = self.trap.totals();
        if tot.is_empty() {
            return Vec::new();
        }
        let visc = *tot.last().unwrap();
        self.tests
            .iter()
            .enumerate()
            .map(|(k, p)| BurgersResidual {
                residual: self.initial[k] + tot[3 * k],
                viscous_pairing: tot[3 * k + 1],
                cs_bound: self.epsilon.sqrt() * visc.max(0.0).sqrt() * tot[3 * k + 2].sqrt(),
                c1_norm: p.c1_norm(),
            })
            .collect()
    }
}

impl StepObserver for BurgersWeakAccumulator {
    fn observe(&mut self, state: &StepState<'_>) {
        let src = state.drag_source();
        self.push(&Sample {
            t: state.t,
            u: state.u,
            source: &src.s,
            f: Some(state.f),
        });
    }
}

pub fn weak_residual_burgers(traj: &Trajectory, phi: &TestFunction) -> Result<BurgersResidual> {
    let mut acc = BurgersWeakAccumulator::new(&[*phi], &traj.grid, traj.config.epsilon, traj.config.t_final)?;
    for s in fluid_samples(traj)? {
        acc.push(&s);
    }
    Ok(acc.finish()[0])
}

struct PhaseTable {
    x: XTable,
    bv: Vec<f64>,
    dbv: Vec<f64>,
    vlo: usize,
    vhi: usize,
}

/// Streaming Vlasov residuals for a fixed set of phase-space test functions.
pub struct VlasovWeakAccumulator {
    tests: Vec<TestFunction>,
    tables: Vec<PhaseTable>,
    grid: PhaseGrid,
    vs: Vec<f64>,
    initial: Vec<f64>,
    trap: Trapezoid,
}

impl VlasovWeakAccumulator {
    pub fn new(tests: &[TestFunction], grid: &PhaseGrid, t_final: f64) -> Result<Self> {
        let vs = grid.v_centers();
        let mut tables = Vec::with_capacity(tests.len());
        for p in tests {
            let vb =
                p.v.ok_or_else(|| Error::domain("Vlasov residual needs a phase-space test function"))?;
            p.validate(grid, t_final)?;
            let (bv, dbv) = vb.tabulate(&vs);
            let (vlo, vhi) = support_range(&bv, &dbv);
            tables.push(PhaseTable {
                x: XTable::new(p, grid),
                bv,
                dbv,
                vlo,
                vhi,
            });
        }
        Ok(VlasovWeakAccumulator {
            tests: tests.to_vec(),
            tables,
            grid: *grid,
            vs,
            initial: Vec::new(),
            trap: Trapezoid::default(),
        })
    }

    pub fn push(&mut self, t: f64, u: &FluidField, f: &KineticField) {
        let cell = self.grid.dx() * self.grid.dv();
        let vs = &self.vs;
        if !self.trap.is_started() {
            self.initial = self
                .tests
                .iter()
                .zip(&self.tables)
                .map(|(p, tb)| {
                    let bt = p.t.value(t);
                    let mut s = 0.0;
                    for i in tb.x.lo..tb.x.hi {
                        let row = f.row(i);
                        let inner: f64 = (tb.vlo..tb.vhi).map(|j| row[j] * tb.bv[j]).sum();
                        s += tb.x.b[i] * inner;
                    }
                    s * bt * cell
                })
                .collect();
        }
        let values = self
            .tests
            .iter()
            .zip(&self.tables)
            .map(|(p, tb)| {
                let (bt, dbt) = (p.t.value(t), p.t.deriv(t));
                if bt == 0.0 && dbt == 0.0 {
                    return 0.0;
                }
                let mut s = 0.0;
                for i in tb.x.lo..tb.x.hi {
                    let row = f.row(i);
                    let (bx, dbx, ui) = (tb.x.b[i], tb.x.db[i], u.u[i]);
                    let mut inner = 0.0;
                    for j in tb.vlo..tb.vhi {
                        let v = vs[j];
                        inner +=
                            row[j] * (bx * tb.bv[j] * dbt + v * dbx * tb.bv[j] * bt + (ui - v) * bx * tb.dbv[j] * bt);
                    }
                    s += inner;
                }
                s * cell
            })
            .collect();
        self.trap.push(t, values);
    }

    /// Residual per test function.
    pub fn finish(&self) -> Vec<f64> {
        self.trap
            .totals()
            .iter()
            .zip(&self.initial)
            .map(|(a, b)| a + b)
            .collect()
    }
}

impl StepObserver for VlasovWeakAccumulator {
    fn observe(&mut self, state: &StepState<'_>) {
        self.push(state.t, state.u, state.f);
    }
}

pub fn weak_residual_vlasov(traj: &Trajectory, phi: &TestFunction) -> Result<f64> {
    let mut acc = VlasovWeakAccumulator::new(&[*phi], &traj.grid, traj.config.t_final)?;
    for fr in traj.kinetic_frames()? {
        acc.push(fr.t, &fr.u, fr.f.as_ref().expect("kinetic frames carry f"));
    }
    Ok(acc.finish()[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(-2.0, 2.0, 400, -3.0, 3.0, 240).unwrap()
    }

    /// Feeds analytic fields at uniform times.
    fn burgers_on(
        phi: &TestFunction,
        eps: f64,
        nt: usize,
        u_of: impl Fn(f64, f64) -> f64,
        src: impl Fn(f64, f64) -> f64,
    ) -> BurgersResidual {
        let g = grid();
        let mut acc = BurgersWeakAccumulator::new(&[*phi], &g, eps, 1.0).unwrap();
        for k in 0..=nt {
            let t = k as f64 / nt as f64;
            let u = FluidField::new(g.x_centers().iter().map(|&x| u_of(x, t)).collect(), 0.0, 0.0);
            let s: Vec<f64> = g.x_centers().iter().map(|&x| src(x, t)).collect();
            acc.push(&Sample {
                t,
                u: &u,
                source: &s,
                f: None,
            });
        }
        acc.finish()[0]
    }

    #[test]
    fn zero_fields_give_zero() {
        let phi = TestFunction::space_time(0.0, 0.5, 0.5, 0.5);
        let r = burgers_on(&phi, 0.1, 20, |_, _| 0.0, |_, _| 0.0);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.viscous_pairing, 0.0);
    }

    #[test]
    fn traveling_wave_residual_is_the_viscous_pairing() {
        let eps = 0.05;
        let wave = |x: f64, t: f64| 0.5 - 0.5 * ((x - 0.5 * t) / (4.0 * eps)).tanh();
        for phi in super::super::default_test_functions(1.0) {
            let r = burgers_on(&phi, eps, 2000, wave, |_, _| 0.0);
            assert!(r.viscous_pairing.abs() <= r.cs_bound + 1e-15);
            assert!(
                (r.residual - r.viscous_pairing).abs() < 2e-4,
                "{} vs {}",
                r.residual,
                r.viscous_pairing
            );
        }
    }

    #[test]
    fn residual_is_linear_in_the_source() {
        let phi = TestFunction::space_time(0.2, 0.6, 0.5, 0.5);
        let a = burgers_on(&phi, 0.0, 50, |_, _| 0.0, |x, t| x * t);
        let b = burgers_on(&phi, 0.0, 50, |_, _| 0.0, |x, t| 3.0 * x * t);
        assert!((3.0 * a.residual - b.residual).abs() < 1e-14);
    }

    #[test]
    fn space_time_kind_is_enforced() {
        let g = grid();
        let p = TestFunction::space_time(0.0, 0.5, 0.5, 0.5);
        assert!(BurgersWeakAccumulator::new(&[p.with_velocity(0.0, 1.0)], &g, 0.1, 1.0).is_err());
        assert!(VlasovWeakAccumulator::new(&[p], &g, 1.0).is_err());
    }

    #[test]
    fn pushed_forward_gaussian_is_a_weak_solution() {
        // u ≡ U: V = U + (v0 - U)e^{-t}, X = x0 + Ut + (v0 - U)(1 - e^{-t}),
        // f(x, v, t) = e^t f0(x0, v0).
        let g = grid();
        let big_u = 0.5;
        let f0 = |x: f64, v: f64| (-(x * x) / 0.08 - v * v / 0.18).exp();
        let phi = TestFunction::space_time(0.3, 0.9, 0.5, 0.5).with_velocity(0.2, 1.2);
        let mut acc = VlasovWeakAccumulator::new(&[phi], &g, 1.0).unwrap();
        let u = FluidField::constant(&g, big_u);
        let nt = 400;
        for k in 0..=nt {
            let t = k as f64 / nt as f64;
            let e = t.exp();
            let f = KineticField::from_fn(&g, |x, v| {
                let v0 = big_u + (v - big_u) * e;
                let x0 = x - big_u * t - (v0 - big_u) * (1.0 - (-t).exp());
                e * f0(x0, v0)
            });
            acc.push(t, &u, &f);
        }
        let r = acc.finish()[0];
        assert!(r.abs() < 1e-4, "residual {r}");
    }
}
