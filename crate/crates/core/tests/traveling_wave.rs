use bvlab::{run, PhaseGrid, SimConfig};

fn shock(eps: f64, nx: usize) -> SimConfig {
    let mut c = SimConfig::default();
    c.epsilon = eps;
    c.t_final = 1.0;
    c.grid = PhaseGrid::new(-3.0, 3.0, nx, -1.0, 1.0, 4).unwrap();
    c.u_minus = 1.0;
    c.u_plus = 0.0;
    c.output_times = vec![0.5];
    c
}

/// (L-inf over snapshots, L1 at the final time) against the traveling wave.
fn errors(c: &SimConfig) -> (f64, f64) {
    let traj = run(c).unwrap();
    let eps = c.epsilon;
    let exact = |x: f64, t: f64| 0.5 - 0.5 * ((x - 0.5 * t) / (4.0 * eps)).tanh();
    let xs = c.grid.x_centers();
    let linf = traj
        .snapshots
        .iter()
        .flat_map(|s| xs.iter().zip(&s.u.u).map(move |(x, u)| (u - exact(*x, s.t)).abs()))
        .fold(0.0, f64::max);
    let last = traj.last_snapshot();
    let l1 = xs
        .iter()
        .zip(&last.u.u)
        .map(|(x, u)| (u - exact(*x, last.t)).abs())
        .sum::<f64>()
        * c.grid.dx();
    (linf, l1)
}

#[test]
fn traveling_wave_is_reproduced_and_converges() {
    let (linf, l1) = errors(&shock(0.1, 240));
    let (linf2, l12) = errors(&shock(0.1, 480));
    assert!(linf <= 1e-2 && linf2 <= linf, "{linf} {linf2}");
    assert!(l1 / l12 >= 1.7, "{l1} {l12}");
}

#[test]
fn first_order_reconstruction_is_still_convergent() {
    let mut a = shock(0.1, 240);
    a.reconstruction = "constant".into();
    let mut b = shock(0.1, 480);
    b.reconstruction = "constant".into();
    let (_, l1) = errors(&a);
    let (_, l12) = errors(&b);
    assert!(l12 < l1 && l1 / l12 > 1.5, "{l1} {l12}");
}

#[test]
fn godunov_flux_agrees_with_llf() {
    let a = shock(0.1, 240);
    let mut b = a.clone();
    b.flux = "godunov".into();
    let (_, la) = errors(&a);
    let (_, lb) = errors(&b);
    assert!((la - lb).abs() < 0.5 * la.max(lb), "{la} {lb}");
}
