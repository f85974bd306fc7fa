//! Truncated entropy triples (Iₙ, Fₙ, Φₙ) and their weak production.
//!
//! Iₙ(u) = u for |u| ≤ n and 0 for |u| ≥ 2n. On n ≤ |u| ≤ 2n, with
//! s = (|u| - n)/n, the slope is
//!
//!   Iₙ'(u) = 1 - S(s) - 2 b(s),
//!
//! S the cubic smoothstep and b a plateau of height 1 with smoothstep
//! ramps of width δ = 1/4. Then Iₙ is C², odd, |Iₙ| ≤ |u|, |Iₙ'| < 2 and
//! ∫ₙ²ⁿ Iₙ' = n(½ - 2(1 - δ)) = -n, so Iₙ(2n) = 0.
//!
//! Fₙ(u) = ∫₀ᵘ Iₙ'(s)s ds and Φₙ(u) = ∫₀ᵘ Fₙ'(s)s ds are tabulated by
//! adaptive Simpson quadrature and read back by cubic Hermite interpolation
//! with their exact derivatives.

use super::{fluid_samples, Sample, TestFunction, Trapezoid};
use crate::coupling::{StepObserver, StepState, Trajectory};
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;

const DELTA: f64 = 0.25;
/// 4096 intervals on [0, 2n]; the joints n, (1 + δ)n, (2 - δ)n fall on nodes.
const TABLE_POINTS: usize = 4097;
const QUAD_TOL: f64 = 1e-10;

#[inline]
fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

#[inline]
fn smoothstep_d(s: f64) -> f64 {
    6.0 * s * (1.0 - s)
}

/// ∫₀ˢ smoothstep
#[inline]
fn smoothstep_int(s: f64) -> f64 {
    s * s * s - 0.5 * s * s * s * s
}

/// Odd extension of a value computed at |u|.
#[inline]
fn odd(mag: f64, u: f64) -> f64 {
    if u < 0.0 {
        -mag
    } else {
        mag
    }
}

fn plateau(s: f64) -> f64 {
    if s < DELTA {
        smoothstep(s / DELTA)
    } else if s > 1.0 - DELTA {
        smoothstep((1.0 - s) / DELTA)
    } else {
        1.0
    }
}

fn plateau_d(s: f64) -> f64 {
    if s < DELTA {
        smoothstep_d(s / DELTA) / DELTA
    } else if s > 1.0 - DELTA {
        -smoothstep_d((1.0 - s) / DELTA) / DELTA
    } else {
        0.0
    }
}

fn plateau_int(s: f64) -> f64 {
    if s < DELTA {
        DELTA * smoothstep_int(s / DELTA)
    } else if s > 1.0 - DELTA {
        (1.0 - DELTA) - DELTA * smoothstep_int((1.0 - s) / DELTA)
    } else {
        0.5 * DELTA + (s - DELTA)
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[derive(Clone, Debug)]
pub struct EntropyTriple {
    pub n: u32,
    h: f64,
    /// Fₙ and Φₙ at uᵢ = i·h on [0, 2n].
    f_table: Vec<f64>,
    phi_table: Vec<f64>,
}

pub fn make_entropy_triple(n: u32) -> Result<EntropyTriple> {
    if n < 1 {
        return Err(Error::domain("entropy truncation level must be at least 1"));
    }
    let nf = n as f64;
    let h = 2.0 * nf / (TABLE_POINTS - 1) as f64;
    let mut t = EntropyTriple {
        n,
        h,
        f_table: Vec::with_capacity(TABLE_POINTS),
        phi_table: Vec::with_capacity(TABLE_POINTS),
    };
    let tol = QUAD_TOL / TABLE_POINTS as f64;
    let (mut fa, mut pa) = (0.0, 0.0);
    t.f_table.push(0.0);
    t.phi_table.push(0.0);
    for k in 1..TABLE_POINTS {
        let (a, b) = ((k - 1) as f64 * h, k as f64 * h);
        fa += adaptive_simpson(&|s| t.i_prime(s) * s, a, b, tol);
        pa += adaptive_simpson(&|s| t.i_prime(s) * s * s, a, b, tol);
        t.f_table.push(fa);
        t.phi_table.push(pa);
    }
    Ok(t)
}

impl EntropyTriple {
    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn i(&self, u: f64) -> f64 {
        let (a, n) = (u.abs(), self.nf());
        let mag = if a <= n {
            a
        } else if a >= 2.0 * n {
            0.0
        } else {
            let s = (a - n) / n;
            n * (1.0 + s - smoothstep_int(s) - 2.0 * plateau_int(s))
        };
        odd(mag, u)
    }

    pub fn i_prime(&self, u: f64) -> f64 {
        let (a, n) = (u.abs(), self.nf());
        if a <= n {
            1.0
        } else if a >= 2.0 * n {
            0.0
        } else {
            let s = (a - n) / n;
            1.0 - smoothstep(s) - 2.0 * plateau(s)
        }
    }

    pub fn i_second(&self, u: f64) -> f64 {
        let (a, n) = (u.abs(), self.nf());
        if a <= n || a >= 2.0 * n {
            0.0
        } else {
            let s = (a - n) / n;
            odd((-smoothstep_d(s) - 2.0 * plateau_d(s)) / n, u)
        }
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        self.i_prime(u) * u
    }

    pub fn phi_prime(&self, u: f64) -> f64 {
        self.i_prime(u) * u * u
    }

    /// Hermite interpolation in `table` at |u| ∈ [0, 2n].
    fn lookup(&self, table: &[f64], a: f64, d: impl Fn(f64) -> f64) -> f64 {
        let k = ((a / self.h) as usize).min(TABLE_POINTS - 2);
        let (x0, x1) = (k as f64 * self.h, (k + 1) as f64 * self.h);
        let s = (a - x0) / self.h;
        let (y0, y1) = (table[k], table[k + 1]);
        let (m0, m1) = (d(x0) * self.h, d(x1) * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }

    /// Fₙ, even.
    pub fn f(&self, u: f64) -> f64 {
        let (a, n) = (u.abs(), self.nf());
        if a <= n {
            0.5 * a * a
        } else if a >= 2.0 * n {
            self.f_table[TABLE_POINTS - 1]
        } else {
            self.lookup(&self.f_table, a, |s| self.f_prime(s))
        }
    }

    /// Φₙ, odd.
    pub fn phi(&self, u: f64) -> f64 {
        let (a, n) = (u.abs(), self.nf());
        let mag = if a <= n {
            a * a * a / 3.0
        } else if a >= 2.0 * n {
            self.phi_table[TABLE_POINTS - 1]
        } else {
            self.lookup(&self.phi_table, a, |s| self.phi_prime(s))
        };
        odd(mag, u)
    }
}

/// Weak production of the pairs (Iₙ, Fₙ) and (Fₙ, Φₙ) against φ, with the
/// right-hand sides ∫∫ Iₙ'(u)(εu_xx + s)φ and ∫∫ Fₙ'(u)(εu_xx + s)φ split
/// into viscous and drag parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPairing {
    /// ⟨∂_t Iₙ(u) + ∂_x Fₙ(u), φ⟩
    pub a: f64,
    /// ⟨∂_t Fₙ(u) + ∂_x Φₙ(u), φ⟩
    pub b: f64,
    pub viscous_a: f64,
    pub drag_a: f64,
    pub viscous_b: f64,
    pub drag_b: f64,
    pub c1_norm: f64,
}

impl EntropyPairing {
    pub fn rhs_a(&self) -> f64 {
        self.viscous_a + self.drag_a
    }

    pub fn rhs_b(&self) -> f64 {
        self.viscous_b + self.drag_b
    }

    pub fn normalized(&self) -> (f64, f64) {
        (self.a / self.c1_norm, self.b / self.c1_norm)
    }
}

pub struct EntropyProductionAccumulator {
    triple: EntropyTriple,
    tests: Vec<TestFunction>,
    xb: Vec<(Vec<f64>, Vec<f64>)>,
    grid: PhaseGrid,
    epsilon: f64,
    initial: Vec<[f64; 2]>,
    trap: Trapezoid,
}

impl EntropyProductionAccumulator {
    pub fn new(
        triple: &EntropyTriple,
        tests: &[TestFunction],
        grid: &PhaseGrid,
        epsilon: f64,
        t_final: f64,
    ) -> Result<Self> {
        let xs = grid.x_centers();
        for p in tests {
            if p.is_phase_space() {
                return Err(Error::domain("entropy production needs a space-time test function"));
            }
            p.validate(grid, t_final)?;
        }
        Ok(EntropyProductionAccumulator {
            triple: triple.clone(),
            tests: tests.to_vec(),
            xb: tests.iter().map(|p| p.x.tabulate(&xs)).collect(),
            grid: *grid,
            epsilon,
            initial: Vec::new(),
            trap: Trapezoid::default(),
        })
    }

    pub fn push(&mut self, s: &Sample<'_>) {
        let dx = self.grid.dx();
        let n = self.grid.nx;
        let tr = &self.triple;
        let u = s.u;
        let iu: Vec<f64> = u.u.iter().map(|&v| tr.i(v)).collect();
        let fu: Vec<f64> = u.u.iter().map(|&v| tr.f(v)).collect();
        let phiu: Vec<f64> = u.u.iter().map(|&v| tr.phi(v)).collect();
        let ip: Vec<f64> = u.u.iter().map(|&v| tr.i_prime(v)).collect();
        let uxx: Vec<f64> = (0..n)
            .map(|i| (u.with_ghost(i as isize + 1) - 2.0 * u.u[i] + u.with_ghost(i as isize - 1)) / (dx * dx))
            .collect();
        if !self.trap.is_started() {
            self.initial = self
                .tests
                .iter()
                .zip(&self.xb)
                .map(|(p, (b, _))| {
                    let bt = p.t.value(s.t);
                    let (mut a, mut c) = (0.0, 0.0);
                    for i in 0..n {
                        a -= iu[i] * b[i] * bt;
                        c -= fu[i] * b[i] * bt;
                    }
                    [a * dx, c * dx]
                })
                .collect();
        }
        let mut values = Vec::with_capacity(6 * self.tests.len());
        for (p, (b, db)) in self.tests.iter().zip(&self.xb) {
            let (bt, dbt) = (p.t.value(s.t), p.t.deriv(s.t));
            let mut acc = [0.0; 6];
            for i in 0..n {
                if b[i] == 0.0 && db[i] == 0.0 {
                    continue;
                }
                let (phi, phi_x, phi_t) = (b[i] * bt, db[i] * bt, b[i] * dbt);
                let fp = ip[i] * u.u[i];
                let visc = self.epsilon * uxx[i] * phi;
                let drag = s.source[i] * phi;
                acc[0] -= iu[i] * phi_t + fu[i] * phi_x;
                acc[1] -= fu[i] * phi_t + phiu[i] * phi_x;
                acc[2] += ip[i] * visc;
                acc[3] += ip[i] * drag;
                acc[4] += fp * visc;
                acc[5] += fp * drag;
            }
            values.extend(acc.iter().map(|v| v * dx));
        }
        self.trap.push(s.t, values);
    }

    pub fn finish(&self) -> Vec<EntropyPairing> {
        let tot = self.trap.totals();
        self.tests
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let v = &tot[6 * k..6 * k + 6];
                EntropyPairing {
                    a: self.initial[k][0] + v[0],
                    b: self.initial[k][1] + v[1],
                    viscous_a: v[2],
                    drag_a: v[3],
                    viscous_b: v[4],
                    drag_b: v[5],
                    c1_norm: p.c1_norm(),
                }
            })
            .collect()
    }
}

impl StepObserver for EntropyProductionAccumulator {
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

pub fn entropy_production(traj: &Trajectory, triple: &EntropyTriple, phi: &TestFunction) -> Result<EntropyPairing> {
    let mut acc =
        EntropyProductionAccumulator::new(triple, &[*phi], &traj.grid, traj.config.epsilon, traj.config.t_final)?;
    for s in fluid_samples(traj)? {
        acc.push(&s);
    }
    Ok(acc.finish()[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn level_zero_is_rejected() {
        assert!(matches!(make_entropy_triple(0), Err(Error::Domain(_))));
    }

    #[test]
    fn identity_and_closed_forms_below_n() {
        for n in [1, 2, 5] {
            let t = make_entropy_triple(n).unwrap();
            let nf = n as f64;
            for k in 0..=200 {
                let u = -nf + 2.0 * nf * k as f64 / 200.0;
                assert_eq!(t.i(u), u);
                assert_eq!(t.i_prime(u), 1.0);
                assert!((t.f(u) - u * u / 2.0).abs() < 1e-8);
                assert!((t.phi(u) - u * u * u / 3.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn vanishes_beyond_2n() {
        let t = make_entropy_triple(3).unwrap();
        for u in [6.0, -6.0, 7.5, -100.0] {
            assert_eq!(t.i(u), 0.0);
            assert_eq!(t.i_prime(u), 0.0);
        }
        assert!(t.i(6.0 - 1e-9).abs() < 1e-9);
    }

    #[test]
    fn pointwise_bounds_on_dense_samples() {
        for n in [1, 4] {
            let t = make_entropy_triple(n).unwrap();
            let nf = n as f64;
            let m = 100_000;
            for k in 0..=m {
                let u = -3.0 * nf + 6.0 * nf * k as f64 / m as f64;
                assert!(t.i(u).abs() <= u.abs() + 1e-15);
                assert!(t.i_prime(u).abs() <= 2.0);
            }
        }
    }

    #[test]
    fn c2_continuity_at_the_joints() {
        let t = make_entropy_triple(2).unwrap();
        let h = 1e-4;
        for knot in [-4.0, -2.0, 2.0, 4.0] {
            // value continuity and matching one-sided second differences
            let left = (t.i(knot) - 2.0 * t.i(knot - h) + t.i(knot - 2.0 * h)) / (h * h);
            let right = (t.i(knot + 2.0 * h) - 2.0 * t.i(knot + h) + t.i(knot)) / (h * h);
            assert!((left - right).abs() < 1e-6 / h, "I'' jump at {knot}: {left} vs {right}");
            let dl = (t.i(knot) - t.i(knot - h)) / h;
            let dr = (t.i(knot + h) - t.i(knot)) / h;
            assert!((dl - dr).abs() < 1e-3, "I' jump at {knot}");
            // three-point second difference straddling the knot
            let c = (t.i(knot + h) - 2.0 * t.i(knot) + t.i(knot - h)) / (h * h);
            assert!((c - t.i_second(knot)).abs() < 1e-2);
        }
    }

    #[test]
    fn derivatives_match_difference_quotients() {
        let t = make_entropy_triple(1).unwrap();
        let h = 1e-6;
        for k in 0..400 {
            let u = -2.5 + 5.0 * k as f64 / 399.0;
            let di = (t.i(u + h) - t.i(u - h)) / (2.0 * h);
            let df = (t.f(u + h) - t.f(u - h)) / (2.0 * h);
            let dp = (t.phi(u + h) - t.phi(u - h)) / (2.0 * h);
            assert!((di - t.i_prime(u)).abs() < 1e-6);
            assert!((df - t.f_prime(u)).abs() < 1e-6);
            assert!((dp - t.phi_prime(u)).abs() < 1e-6);
        }
    }

    #[test]
    fn tables_agree_with_direct_quadrature() {
        let t = make_entropy_triple(2).unwrap();
        for u in [2.1, 2.5, 3.0, 3.37, 3.9, 4.0, 5.0] {
            let fd = adaptive_simpson(&|s| t.i_prime(s) * s, 0.0, u, 1e-12);
            let pd = adaptive_simpson(&|s| t.i_prime(s) * s * s, 0.0, u, 1e-12);
            assert!((t.f(u) - fd).abs() < 1e-9);
            assert!((t.f(-u) - fd).abs() < 1e-9);
            assert!((t.phi(u) - pd).abs() < 1e-9);
            assert!((t.phi(-u) + pd).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn parity(u in -10.0f64..10.0) {
            let t = make_entropy_triple(2).unwrap();
            prop_assert_eq!(t.i(-u), -t.i(u));
            prop_assert_eq!(t.f(-u), t.f(u));
            prop_assert_eq!(t.phi(-u), -t.phi(u));
        }
    }
}
