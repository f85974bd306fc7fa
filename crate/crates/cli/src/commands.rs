//! The four subcommands. Each returns a process exit status:
//! 0 success, 1 verification failure, 2 bad input, 3 blowup, 4 partial
//! sweep failure.

use std::path::{Path, PathBuf};

use bvlab::config::{parse_config, parse_override};
use bvlab::coupling::{Schemes, Trajectory};
use bvlab::diagnostics::momentum_drift;
use bvlab::study::{run_sweep, SweepPlan, SweepReport};
use bvlab::{Registries, SimConfig, Simulation};

use crate::error::CliError;
use crate::snapshot::write_snapshot;
use crate::table::{real, save_csv, save_dat, write_csv, write_diagnostics};
use crate::verify;

/// `BVLAB_OUT` if set, else the config's `output_root`.
pub fn output_root(cfg: &SimConfig) -> PathBuf {
    match std::env::var_os("BVLAB_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(&cfg.output_root),
    }
}

/// Reads the config file (if any) on top of the defaults, applies
/// `key=value` overrides and checks that every named strategy exists.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<SimConfig, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?,
        None => String::new(),
    };
    let pairs = overrides
        .iter()
        .map(|a| parse_override(a).ok_or_else(|| CliError::Config(format!("override `{a}` is not key=value"))))
        .collect::<Result<Vec<_>, _>>()?;
    let source = path.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string());
    let cfg =
        parse_config(SimConfig::default(), &text, &pairs).map_err(|e| CliError::Config(format!("{source}: {e}")))?;
    check_strategies(&cfg)?;
    Ok(cfg)
}

fn check_strategies(cfg: &SimConfig) -> Result<(), CliError> {
    let reg = Registries::builtin();
    let bad = |e: bvlab::Error| CliError::Config(e.to_string());
    Schemes::from_config(cfg, &reg).map_err(bad)?;
    reg.fluid_profiles.get(&cfg.fluid.family).map_err(bad)?;
    reg.kinetic_profiles.get(&cfg.kinetic.family).map_err(bad)?;
    Ok(())
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    create_dir(dir)?;
    for (name, bytes) in files {
        let p = dir.join(name);
        std::fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(())
}

/// max_t |mass(t) - mass(0)| relative to mass(0), or absolute without particles.
pub fn mass_drift(traj: &Trajectory) -> f64 {
    let m0 = traj.records.first().map_or(0.0, |r| r.mass);
    let d = traj.records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    if m0 > 0.0 {
        d / m0
    } else {
        d
    }
}

pub fn run_summary(traj: &Trajectory) -> String {
    let last = traj.records.last();
    let p = momentum_drift(traj).iter().fold(0.0f64, |a, b| a.max(b.abs()));
    format!(
        "steps = {}\nt = {}\nE(t) = {:.10e}\nE(0) = {:.10e}\nrelative mass drift = {:.3e}\nmomentum drift = {:.3e}\nsnapshots = {}\n",
        traj.steps(),
        traj.final_time(),
        last.map_or(f64::NAN, |r| r.energy),
        traj.records.first().map_or(f64::NAN, |r| r.energy),
        mass_drift(traj),
        p,
        traj.snapshots.len(),
    )
}

/// Every file `run` writes for a trajectory, as (name, contents).
pub fn run_files(traj: &Trajectory) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![("config.conf".to_string(), traj.config.to_text().into_bytes())];
    let mut csv = Vec::new();
    write_diagnostics(&mut csv, &traj.records).expect("writing to memory");
    files.push(("diagnostics.csv".to_string(), csv));
    for (k, s) in traj.snapshots.iter().enumerate() {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &traj.grid, traj.config.epsilon, s.t, &s.u, &s.f).expect("writing to memory");
        files.push((format!("snapshot_{k:03}.txt"), buf));
    }
    files.push(("summary.txt".to_string(), run_summary(traj).into_bytes()));
    files
}

fn try_run(config: Option<&Path>, overrides: &[String]) -> Result<(), CliError> {
    let cfg = load_config(config, overrides)?;
    let dir = output_root(&cfg);
    let sim = Simulation::new(&cfg, &Registries::builtin()).map_err(|e| CliError::Config(e.to_string()))?;
    match sim.run() {
        Ok(traj) => {
            write_files(&dir, &run_files(&traj))?;
            print!("{}", run_summary(&traj));
            println!("output = {}", dir.display());
            Ok(())
        }
        Err(fail) => {
            write_files(&dir, &run_files(&fail.partial))?;
            Err(CliError::Blowup(format!(
                "{}; last good state written to {}",
                fail.error,
                dir.display()
            )))
        }
    }
}

pub fn cmd_run(config: Option<&Path>, overrides: &[String]) -> i32 {
    match try_run(config, overrides) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

fn run_dir_name(eps: f64, nx: usize, nv: usize) -> String {
    format!("eps_{eps}_nx_{nx}_nv_{nv}")
}

pub fn sweep_summary(rep: &SweepReport) -> String {
    let mut s = String::new();
    s += "epsilon nx nv steps sup_E l4_window mass_drift status\n";
    for r in &rep.runs {
        s += &format!(
            "{} {} {} {} {:.6e} {:.6e} {:.3e} {}\n",
            r.epsilon,
            r.grid.nx,
            r.grid.nv,
            r.steps,
            r.sup_energy,
            r.l4_window,
            r.relative_mass_drift,
            r.failure.as_deref().unwrap_or("ok")
        );
    }
    s += "distances d_r(eps, next eps) for r = 1, 2, 4\n";
    for (w, d) in rep.runs.windows(2).zip(&rep.distances) {
        s += &format!(
            "{} {} {:.6e} {:.6e} {:.6e}\n",
            w[0].epsilon, w[1].epsilon, d[0], d[1], d[2]
        );
    }
    if let Some(rates) = &rep.rates {
        s += &format!("rates in eps: {} {} {}\n", rates[0], rates[1], rates[2]);
    }
    s += &format!(
        "l4 max/min = {:.4}\nsup E spread = {:.4}\n",
        rep.l4_ratio, rep.energy_spread
    );
    s
}

fn write_sweep(dir: &Path, rep: &SweepReport) -> Result<(), CliError> {
    create_dir(dir)?;
    let runs: Vec<Vec<String>> = rep
        .runs
        .iter()
        .map(|r| {
            vec![
                real(r.epsilon),
                r.grid.nx.to_string(),
                r.grid.nv.to_string(),
                r.steps.to_string(),
                real(r.final_time),
                real(r.sup_energy),
                real(r.l4_window),
                real(r.relative_mass_drift),
                real(r.min_f),
                u8::from(r.failure.is_some()).to_string(),
            ]
        })
        .collect();
    save_csv(
        &dir.join("sweep_runs.csv"),
        &[
            "epsilon",
            "nx",
            "nv",
            "steps",
            "final_time",
            "sup_energy",
            "l4_window",
            "relative_mass_drift",
            "min_f",
            "failed",
        ],
        &runs,
    )?;

    let mut dist = Vec::new();
    let mut func = Vec::new();
    for ((w, d), fd) in rep.runs.windows(2).zip(&rep.distances).zip(&rep.functional_diffs) {
        dist.push(vec![
            real(w[0].epsilon),
            real(w[1].epsilon),
            real(d[0]),
            real(d[1]),
            real(d[2]),
        ]);
        for (k, a) in fd.iter().enumerate() {
            func.push(vec![
                real(w[0].epsilon),
                real(w[1].epsilon),
                k.to_string(),
                real(a[0]),
                real(a[1]),
                real(a[2]),
            ]);
        }
    }
    save_csv(
        &dir.join("sweep_distances.csv"),
        &["eps_coarse", "eps_fine", "d1", "d2", "d4"],
        &dist,
    )?;
    save_csv(
        &dir.join("sweep_functionals.csv"),
        &["eps_coarse", "eps_fine", "test", "density", "momentum", "drag_density"],
        &func,
    )?;

    let mut res = Vec::new();
    for r in &rep.runs {
        for (k, b) in r.burgers.iter().enumerate() {
            let v = r.vlasov.get(k).copied().unwrap_or(f64::NAN);
            res.push(vec![
                real(r.epsilon),
                k.to_string(),
                real(b.residual),
                real(b.viscous_pairing),
                real(b.cs_bound),
                real(b.c1_norm),
                real(v),
            ]);
        }
    }
    save_csv(
        &dir.join("sweep_residuals.csv"),
        &[
            "epsilon",
            "test",
            "burgers_residual",
            "viscous_pairing",
            "cs_bound",
            "c1_norm",
            "vlasov_residual",
        ],
        &res,
    )?;

    for r in &rep.runs {
        let sub = dir.join(run_dir_name(r.epsilon, r.grid.nx, r.grid.nv));
        create_dir(&sub)?;
        save_dat(
            &sub.join("u_final.dat"),
            &["x", "u"],
            &[&r.grid.x_centers(), &r.final_u.u],
        )?;
        let mut buf = Vec::new();
        let header: Vec<String> = (0..r.samples.first().map_or(0, Vec::len))
            .map(|k| format!("c{k}"))
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = r.samples.iter().map(|s| s.iter().map(|v| real(*v)).collect()).collect();
        write_csv(&mut buf, &header, &rows).expect("writing to memory");
        let p = sub.join("window_samples.csv");
        std::fs::write(&p, buf).map_err(|e| CliError::io(&p, e))?;
        if let Some(msg) = &r.failure {
            let p = sub.join("failure.txt");
            std::fs::write(&p, format!("{msg}\n")).map_err(|e| CliError::io(&p, e))?;
        }
    }
    let p = dir.join("sweep_summary.txt");
    std::fs::write(&p, sweep_summary(rep)).map_err(|e| CliError::io(&p, e))
}

fn try_sweep(config: Option<&Path>, overrides: &[String]) -> Result<i32, CliError> {
    let cfg = load_config(config, overrides)?;
    let dir = output_root(&cfg);
    let plan = SweepPlan::from_config(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    for e in plan.estimate().map_err(|e| CliError::Config(e.to_string()))? {
        println!(
            "planned eps = {} nx = {} nv = {} steps ~ {}",
            e.epsilon, e.nx, e.nv, e.steps
        );
    }
    let rep = run_sweep(&plan, &Registries::builtin()).map_err(|e| CliError::Config(e.to_string()))?;
    write_sweep(&dir, &rep)?;
    print!("{}", sweep_summary(&rep));
    println!("output = {}", dir.display());
    let failures = rep.failures();
    for (eps, msg) in &failures {
        eprintln!("eps = {eps}: {msg}");
    }
    Ok(if failures.is_empty() { 0 } else { 4 })
}

pub fn cmd_sweep(config: Option<&Path>, overrides: &[String]) -> i32 {
    match try_sweep(config, overrides) {
        Ok(code) => code,
        Err(e) => report_error(&e),
    }
}

/// Runs the acceptance suite with the config's strategy and debug
/// settings applied to the built-in benchmarks.
pub fn cmd_verify(config: Option<&Path>, overrides: &[String], only: Option<u32>) -> i32 {
    let cfg = match load_config(config, overrides) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    if let Some(n) = only {
        if !(1..=12).contains(&n) {
            return report_error(&CliError::Config(format!("--only expects a criterion 1-12, got {n}")));
        }
    }
    let outcomes = verify::run_suite(&cfg, only, |o| println!("{o}"));
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    i32::from(failed > 0)
}

fn try_report(dir: &Path) -> Result<String, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Malformed {
            path: dir.to_path_buf(),
            reason: "not a directory".into(),
        });
    }
    if dir.join("diagnostics.csv").is_file() {
        report::run_report(dir)
    } else if dir.join("sweep_runs.csv").is_file() {
        report::sweep_report(dir)
    } else {
        Err(CliError::Malformed {
            path: dir.to_path_buf(),
            reason: "neither diagnostics.csv nor sweep_runs.csv found".into(),
        })
    }
}

pub fn cmd_report(dir: &Path) -> i32 {
    match try_report(dir) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => report_error(&e),
    }
}

mod report {
    use std::path::Path;

    use crate::error::CliError;
    use crate::table::{load_numeric_csv, save_dat, DIAGNOSTICS_COLUMNS};

    fn write_text(dir: &Path, text: &str) -> Result<(), CliError> {
        let p = dir.join("report.txt");
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    }

    fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
        v.fold(0.0, |a, b| a.max(b.abs()))
    }

    pub(super) fn run_report(dir: &Path) -> Result<String, CliError> {
        let path = dir.join("diagnostics.csv");
        let t = load_numeric_csv(&path, DIAGNOSTICS_COLUMNS)?;
        if t.rows.is_empty() {
            return Err(CliError::Malformed {
                path,
                reason: "no records".into(),
            });
        }
        let col = |n: &str| t.column(n).expect("checked column");
        let (time, energy, cum) = (col("t"), col("energy"), col("cumulative_dissipation"));
        let (mass, mom) = (col("mass"), col("momentum"));
        let balance: Vec<f64> = energy.iter().zip(&cum).map(|(e, d)| e + d - energy[0]).collect();
        save_dat(
            &dir.join("energy.dat"),
            &["t", "energy", "cumulative_dissipation", "balance"],
            &[&time, &energy, &cum, &balance],
        )?;
        save_dat(
            &dir.join("dissipation.dat"),
            &["t", "drag_dissipation", "viscous_dissipation"],
            &[&time, &col("drag_dissipation"), &col("viscous_dissipation")],
        )?;
        save_dat(
            &dir.join("invariants.dat"),
            &["t", "mass", "momentum"],
            &[&time, &mass, &mom],
        )?;
        let mut snaps: Vec<String> = std::fs::read_dir(dir)
            .map_err(|e| CliError::io(dir, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.starts_with("snapshot_"))
            .collect();
        snaps.sort();
        let m0 = mass[0];
        let dm = max_abs(mass.iter().map(|m| m - m0));
        let n = time.len();
        let text = format!(
            "records = {n}\nt_final = {}\nE(0) = {:.10e}\nE(t_final) = {:.10e}\nmax |E + int diss - E(0)| = {:.3e}\nmass drift = {:.3e}\nmomentum drift = {:.3e}\nsnapshots = {}\nwrote energy.dat dissipation.dat invariants.dat\n",
            time[n - 1],
            energy[0],
            energy[n - 1],
            max_abs(balance.iter().copied()),
            if m0 > 0.0 { dm / m0 } else { dm },
            max_abs(mom.iter().map(|p| p - mom[0])),
            snaps.join(" "),
        );
        write_text(dir, &text)?;
        Ok(text)
    }

    pub(super) fn sweep_report(dir: &Path) -> Result<String, CliError> {
        let runs = load_numeric_csv(
            &dir.join("sweep_runs.csv"),
            &["epsilon", "sup_energy", "l4_window", "failed"],
        )?;
        let dist = load_numeric_csv(&dir.join("sweep_distances.csv"), &["eps_coarse", "d1", "d2", "d4"])?;
        let col = |t: &crate::table::NumericTable, n: &str| t.column(n).expect("checked column");
        let eps = col(&runs, "epsilon");
        save_dat(
            &dir.join("runs.dat"),
            &["epsilon", "sup_energy", "l4_window"],
            &[&eps, &col(&runs, "sup_energy"), &col(&runs, "l4_window")],
        )?;
        let (de, d1, d2, d4) = (
            col(&dist, "eps_coarse"),
            col(&dist, "d1"),
            col(&dist, "d2"),
            col(&dist, "d4"),
        );
        save_dat(
            &dir.join("distances.dat"),
            &["eps_coarse", "d1", "d2", "d4"],
            &[&de, &d1, &d2, &d4],
        )?;
        let l4 = col(&runs, "l4_window");
        let lmax = l4.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lmin = l4.iter().copied().fold(f64::INFINITY, f64::min);
        let failed = col(&runs, "failed").iter().filter(|&&f| f != 0.0).count();
        let mut text = format!(
            "runs = {} (failed {failed})\nl4 max/min = {:.4}\n",
            eps.len(),
            lmax / lmin
        );
        text += "eps_coarse d1 d2 d4\n";
        for k in 0..de.len() {
            text += &format!("{} {:.4e} {:.4e} {:.4e}\n", de[k], d1[k], d2[k], d4[k]);
        }
        text += "wrote runs.dat distances.dat\n";
        write_text(dir, &text)?;
        Ok(text)
    }
}
