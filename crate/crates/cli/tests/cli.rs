use std::path::Path;
use std::process::{Command, Output};

use bvlab::{FluidField, KineticField, PhaseGrid};
use bvlab_cli::snapshot::{load_snapshot, read_snapshot, write_snapshot};
use bvlab_cli::{load_config, CliError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BURGERS: &str = "\
epsilon = 0.1
t_final = 0.2
x_min = -2
x_max = 2
nx = 40
v_min = -1
v_max = 1
nv = 4
u_minus = 1
u_plus = 0
f_init = zero
output_times = 0.1
";

fn bvlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvlab"))
        .args(args)
        .env("BVLAB_OUT", out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("case.conf");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_csv_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BURGERS);
    let out = dir.path().join("out");
    let o = bvlab(&out, &["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("diagnostics.csv").is_file());
    assert!(out.join("snapshot_000.txt").is_file());
    assert!(out.join("snapshot_002.txt").is_file());
    let stdout = String::from_utf8_lossy(&o.stdout);
    for key in ["E(t)", "mass drift", "momentum drift"] {
        assert!(stdout.contains(key), "{stdout}");
    }
}

#[test]
fn bad_cfl_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BURGERS}cfl = 1.5\n"));
    let o = bvlab(&dir.path().join("out"), &["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("cfl") && err.contains("line 13"), "{err}");
}

#[test]
fn zero_final_time_gives_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BURGERS);
    let out = dir.path().join("out");
    let o = bvlab(&out, &["run", "--config", &cfg, "t_final=0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("snapshot_000.txt").is_file());
    assert!(!out.join("snapshot_001.txt").exists());
}

#[test]
fn override_beats_file_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BURGERS);
    let c = load_config(Some(Path::new(&cfg)), &["nx=50".into(), "epsilon = 0.2".into()]).unwrap();
    assert_eq!(c.grid.nx, 50);
    assert_eq!(c.epsilon, 0.2);
    let c = load_config(Some(Path::new(&cfg)), &[]).unwrap();
    assert_eq!(c.grid.nx, 40);

    let out = dir.path().join("out");
    let o = bvlab(&out, &["run", "--config", &cfg, "nx=20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = std::fs::read_to_string(out.join("config.conf")).unwrap();
    assert!(written.lines().any(|l| l.replace(' ', "") == "nx=20"), "{written}");
}

#[test]
fn bad_inputs_exit_with_status_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for args in [
        vec!["run", "flux=weno5"],
        vec!["run", "kinetic_scheme=spectral"],
        vec!["run", "no_such_key=1"],
        vec!["run", "not-an-override"],
        vec!["sweep", "sweep_eps=0.05,0.1"],
        vec!["verify", "--config", "/nonexistent/bvlab.conf"],
        vec!["report", "/nonexistent/run"],
    ] {
        let o = bvlab(&out, &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let e = load_config(None, &["integrator=euler".into()]).unwrap_err();
    assert!(matches!(e, CliError::Config(_)));
}

#[test]
fn report_summarizes_a_run_and_rejects_other_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BURGERS);
    let out = dir.path().join("out");
    assert_eq!(bvlab(&out, &["run", "--config", &cfg]).status.code(), Some(0));
    let o = bvlab(&out, &["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["energy.dat", "dissipation.dat", "invariants.dat", "report.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(bvlab(&out, &["report", empty.to_str().unwrap()]).status.code(), Some(2));

    std::fs::write(empty.join("diagnostics.csv"), "step,t\n0,zero\n").unwrap();
    assert_eq!(bvlab(&out, &["report", empty.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sweep_writes_tables_and_report_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BURGERS);
    let out = dir.path().join("sweep");
    let o = bvlab(
        &out,
        &["sweep", "--config", &cfg, "sweep_eps=0.2,0.1", "sweep_time_samples=4"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "sweep_runs.csv",
        "sweep_distances.csv",
        "sweep_residuals.csv",
        "sweep_functionals.csv",
        "sweep_summary.txt",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(out.join("eps_0.1_nx_160_nv_4").join("u_final.dat").is_file());
    let o = bvlab(&out, &["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("distances.dat").is_file());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = "\
t_final = 0.2
x_min = -3
x_max = 3
nx = 60
v_min = -2
v_max = 2
nv = 40
u_minus = 0
u_plus = 0
u_init = bump
u_width = 0.4
f_init = gaussian
f_mass = 0.5
f_sigma_x = 0.35
f_sigma_v = 0.25
output_times = 0.1
";
    let cfg = write_config(dir.path(), text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(bvlab(&a, &["run", "--config", &cfg]).status.code(), Some(0));
    assert_eq!(bvlab(&b, &["run", "--config", &cfg]).status.code(), Some(0));
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        assert_eq!(
            std::fs::read(a.join(&n)).unwrap(),
            std::fs::read(b.join(&n)).unwrap(),
            "{n:?}"
        );
    }
    let snap = load_snapshot(&a.join("snapshot_001.txt")).unwrap();
    assert!(snap.f.min_value() >= 0.0 && snap.f.mass(&snap.grid) > 0.0);
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = PhaseGrid::new(-1.5, 2.25, 9, -3.0, 3.0, 6).unwrap();
    let specials = [
        0.0,
        -0.0,
        f64::MIN_POSITIVE,
        5e-324,
        f64::MAX,
        1.0 / 3.0,
        -2.0f64.sqrt(),
    ];
    for round in 0..50 {
        let u = FluidField::new(
            (0..g.nx)
                .map(|i| {
                    if i < specials.len() && round == 0 {
                        specials[i]
                    } else {
                        rng.gen::<f64>() * 1e3 - 500.0
                    }
                })
                .collect(),
            rng.gen(),
            -rng.gen::<f64>(),
        );
        let f = KineticField::from_fn(&g, |_, _| rng.gen::<f64>().powi(40));
        let (eps, t) = (rng.gen::<f64>(), rng.gen::<f64>());
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, eps, t, &u, &f).unwrap();
        let back = read_snapshot(&mut buf.as_slice()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.u.u), bits(&u.u));
        assert_eq!(bits(&back.f.data), bits(&f.data));
        assert_eq!(back.grid, g);
        assert_eq!((back.epsilon.to_bits(), back.t.to_bits()), (eps.to_bits(), t.to_bits()));
        assert_eq!(
            (back.u.u_minus.to_bits(), back.u.u_plus.to_bits()),
            (u.u_minus.to_bits(), u.u_plus.to_bits())
        );
        let mut again = Vec::new();
        write_snapshot(&mut again, &back.grid, back.epsilon, back.t, &back.u, &back.f).unwrap();
        assert_eq!(again, buf);
    }
}

#[test]
fn flipped_drag_sign_fails_the_energy_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = bvlab(
        &dir.path().join("out"),
        &["verify", "--only", "5", "debug_drag_sign=-1"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion  5 FAIL"));
}

#[test]
fn verify_runs_a_single_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = bvlab(&dir.path().join("out"), &["verify", "--only", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("criterion")).count(), 1);
    assert_eq!(
        bvlab(&dir.path().join("out"), &["verify", "--only", "13"])
            .status
            .code(),
        Some(2)
    );
}
