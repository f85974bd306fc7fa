//! Simulation configuration and its flat `key = value` text schema.
//!
//! One setting per line, `#` starts a comment, keys are lowercase
//! snake_case. Unknown keys are rejected. See the README for the full table.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;

/// Which per-step fields a run keeps in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameRecording {
    /// Per-step scalar diagnostics only.
    None,
    /// Fluid velocity and drag source at every step.
    Fluid,
    /// Fluid and kinetic fields at every step.
    Full,
}

impl FrameRecording {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(FrameRecording::None),
            "fluid" => Some(FrameRecording::Fluid),
            "full" => Some(FrameRecording::Full),
            _ => None,
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            FrameRecording::None => "none",
            FrameRecording::Fluid => "fluid",
            FrameRecording::Full => "full",
        }
    }
}

/// Fluid initial data: a registered profile name and its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidInit {
    pub family: String,
    pub center: f64,
    /// Transition width; `None` picks the profile's own default.
    pub width: Option<f64>,
    pub amplitude: f64,
}

/// Kinetic initial data: a registered profile name and its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticInit {
    pub family: String,
    pub mass: f64,
    pub x0: f64,
    pub v0: f64,
    pub sigma_x: f64,
    pub sigma_v: f64,
    /// Gaussian support radius in units of σ.
    pub cutoff: f64,
    pub half_x: f64,
    pub half_v: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSettings {
    pub eps_list: Vec<f64>,
    /// Grid coupling: dx ≤ ε / dx_ratio.
    pub dx_ratio: f64,
    /// Refine dv in proportion to dx along the sweep.
    pub refine_v: bool,
    pub time_samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub epsilon: f64,
    pub t_final: f64,
    pub cfl: f64,
    pub grid: PhaseGrid,
    pub u_minus: f64,
    pub u_plus: f64,
    pub connector_l0: f64,
    pub fluid: FluidInit,
    pub kinetic: KineticInit,
    pub flux: String,
    pub reconstruction: String,
    pub kinetic_scheme: String,
    pub integrator: String,
    pub output_times: Vec<f64>,
    pub record_frames: FrameRecording,
    /// Compact window K used by the per-step ∫_K u⁴ diagnostic.
    pub window: (f64, f64),
    /// Multiplier on the drag source; -1 injects a sign error for mutation checks.
    pub drag_sign: f64,
    /// Burgers substeps per kinetic step in coupled runs.
    pub fluid_substeps: usize,
    pub output_root: String,
    pub sweep: SweepSettings,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            epsilon: 0.05,
            t_final: 1.0,
            cfl: 0.4,
            grid: PhaseGrid {
                x_min: -10.0,
                x_max: 10.0,
                nx: 400,
                v_min: -8.0,
                v_max: 8.0,
                nv: 64,
            },
            u_minus: 1.0,
            u_plus: 0.0,
            connector_l0: 1.0,
            fluid: FluidInit {
                family: "riemann".into(),
                center: 0.0,
                width: None,
                amplitude: 0.5,
            },
            kinetic: KineticInit {
                family: "zero".into(),
                mass: 1.0,
                x0: 0.0,
                v0: 0.0,
                sigma_x: 1.0,
                sigma_v: 1.0,
                cutoff: 6.0,
                half_x: 1.0,
                half_v: 1.0,
            },
            flux: "llf".into(),
            reconstruction: "minmod".into(),
            kinetic_scheme: "deposit".into(),
            integrator: "exp_midpoint".into(),
            output_times: Vec::new(),
            record_frames: FrameRecording::None,
            window: (-1.0, 1.0),
            drag_sign: 1.0,
            fluid_substeps: 1,
            output_root: "bvlab_out".into(),
            sweep: SweepSettings {
                eps_list: vec![0.1, 0.05, 0.025, 0.0125],
                dx_ratio: 4.0,
                refine_v: false,
                time_samples: 20,
            },
        }
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "epsilon",
    "t_final",
    "cfl",
    "x_min",
    "x_max",
    "nx",
    "v_min",
    "v_max",
    "nv",
    "u_minus",
    "u_plus",
    "connector_l0",
    "flux",
    "reconstruction",
    "kinetic_scheme",
    "integrator",
    "fluid_substeps",
    "u_init",
    "u_center",
    "u_width",
    "u_amplitude",
    "f_init",
    "f_mass",
    "f_x0",
    "f_v0",
    "f_sigma_x",
    "f_sigma_v",
    "f_cutoff",
    "f_half_x",
    "f_half_v",
    "output_times",
    "record_frames",
    "window_min",
    "window_max",
    "debug_drag_sign",
    "output_root",
    "sweep_eps",
    "sweep_dx_ratio",
    "sweep_refine_v",
    "sweep_time_samples",
];

/// Where a configuration entry came from, for error messages.
#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => write!(f, "command-line override"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub key: Option<String>,
    pub message: String,
}

fn parse_f64(key: &str, value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{key}` expects a finite number, got `{value}`"))
}

fn parse_usize(key: &str, value: &str) -> std::result::Result<usize, String> {
    value
        .parse::<usize>()
        .map_err(|_| format!("`{key}` expects a non-negative integer, got `{value}`"))
}

fn parse_list(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{key}` expects true/false, got `{value}`")),
    }
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

impl SimConfig {
    /// Sets one key from its textual value. Validation of cross-key
    /// invariants happens in [`SimConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key {
            "epsilon" => self.epsilon = parse_f64(key, value)?,
            "t_final" => self.t_final = parse_f64(key, value)?,
            "cfl" => self.cfl = parse_f64(key, value)?,
            "x_min" => self.grid.x_min = parse_f64(key, value)?,
            "x_max" => self.grid.x_max = parse_f64(key, value)?,
            "nx" => self.grid.nx = parse_usize(key, value)?,
            "v_min" => self.grid.v_min = parse_f64(key, value)?,
            "v_max" => self.grid.v_max = parse_f64(key, value)?,
            "nv" => self.grid.nv = parse_usize(key, value)?,
            "u_minus" => self.u_minus = parse_f64(key, value)?,
            "u_plus" => self.u_plus = parse_f64(key, value)?,
            "connector_l0" => self.connector_l0 = parse_f64(key, value)?,
            "flux" => self.flux = value.to_string(),
            "reconstruction" => self.reconstruction = value.to_string(),
            "kinetic_scheme" => self.kinetic_scheme = value.to_string(),
            "integrator" => self.integrator = value.to_string(),
            "fluid_substeps" => self.fluid_substeps = parse_usize(key, value)?,
            "u_init" => self.fluid.family = value.to_string(),
            "u_center" => self.fluid.center = parse_f64(key, value)?,
            "u_width" => {
                self.fluid.width = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "u_amplitude" => self.fluid.amplitude = parse_f64(key, value)?,
            "f_init" => self.kinetic.family = value.to_string(),
            "f_mass" => self.kinetic.mass = parse_f64(key, value)?,
            "f_x0" => self.kinetic.x0 = parse_f64(key, value)?,
            "f_v0" => self.kinetic.v0 = parse_f64(key, value)?,
            "f_sigma_x" => self.kinetic.sigma_x = parse_f64(key, value)?,
            "f_sigma_v" => self.kinetic.sigma_v = parse_f64(key, value)?,
            "f_cutoff" => self.kinetic.cutoff = parse_f64(key, value)?,
            "f_half_x" => self.kinetic.half_x = parse_f64(key, value)?,
            "f_half_v" => self.kinetic.half_v = parse_f64(key, value)?,
            "output_times" => self.output_times = parse_list(key, value)?,
            "record_frames" => {
                self.record_frames = FrameRecording::parse(value)
                    .ok_or_else(|| format!("`{key}` expects none|fluid|full, got `{value}`"))?
            }
            "window_min" => self.window.0 = parse_f64(key, value)?,
            "window_max" => self.window.1 = parse_f64(key, value)?,
            "debug_drag_sign" => {
                let s = parse_f64(key, value)?;
                if s != 1.0 && s != -1.0 {
                    return Err(format!("`{key}` must be 1 or -1, got `{value}`"));
                }
                self.drag_sign = s;
            }
            "output_root" => self.output_root = value.to_string(),
            "sweep_eps" => self.sweep.eps_list = parse_list(key, value)?,
            "sweep_dx_ratio" => self.sweep.dx_ratio = parse_f64(key, value)?,
            "sweep_refine_v" => self.sweep.refine_v = parse_bool(key, value)?,
            "sweep_time_samples" => self.sweep.time_samples = parse_usize(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Textual value of a key, the inverse of [`SimConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        let s = match key {
            "epsilon" => format!("{}", self.epsilon),
            "t_final" => format!("{}", self.t_final),
            "cfl" => format!("{}", self.cfl),
            "x_min" => format!("{}", self.grid.x_min),
            "x_max" => format!("{}", self.grid.x_max),
            "nx" => format!("{}", self.grid.nx),
            "v_min" => format!("{}", self.grid.v_min),
            "v_max" => format!("{}", self.grid.v_max),
            "nv" => format!("{}", self.grid.nv),
            "u_minus" => format!("{}", self.u_minus),
            "u_plus" => format!("{}", self.u_plus),
            "connector_l0" => format!("{}", self.connector_l0),
            "flux" => self.flux.clone(),
            "reconstruction" => self.reconstruction.clone(),
            "kinetic_scheme" => self.kinetic_scheme.clone(),
            "integrator" => self.integrator.clone(),
            "fluid_substeps" => format!("{}", self.fluid_substeps),
            "u_init" => self.fluid.family.clone(),
            "u_center" => format!("{}", self.fluid.center),
            "u_width" => self.fluid.width.map_or("auto".to_string(), |w| format!("{w}")),
            "u_amplitude" => format!("{}", self.fluid.amplitude),
            "f_init" => self.kinetic.family.clone(),
            "f_mass" => format!("{}", self.kinetic.mass),
            "f_x0" => format!("{}", self.kinetic.x0),
            "f_v0" => format!("{}", self.kinetic.v0),
            "f_sigma_x" => format!("{}", self.kinetic.sigma_x),
            "f_sigma_v" => format!("{}", self.kinetic.sigma_v),
            "f_cutoff" => format!("{}", self.kinetic.cutoff),
            "f_half_x" => format!("{}", self.kinetic.half_x),
            "f_half_v" => format!("{}", self.kinetic.half_v),
            "output_times" => fmt_list(&self.output_times),
            "record_frames" => self.record_frames.as_str().to_string(),
            "window_min" => format!("{}", self.window.0),
            "window_max" => format!("{}", self.window.1),
            "debug_drag_sign" => format!("{}", self.drag_sign),
            "output_root" => self.output_root.clone(),
            "sweep_eps" => fmt_list(&self.sweep.eps_list),
            "sweep_dx_ratio" => format!("{}", self.sweep.dx_ratio),
            "sweep_refine_v" => format!("{}", self.sweep.refine_v),
            "sweep_time_samples" => format!("{}", self.sweep.time_samples),
            _ => return None,
        };
        Some(s)
    }

    /// Canonical text form; parsing it reproduces this config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.get(key).unwrap_or_default());
            out.push('\n');
        }
        out
    }

    /// Checks every single- and cross-key invariant; the error names the key.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in [0, 1), got {}", self.epsilon),
            ));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::invalid("cfl", format!("must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::invalid(
                "t_final",
                format!("must be non-negative, got {}", self.t_final),
            ));
        }
        self.grid.validate()?;
        if !(self.connector_l0 > 0.0 && self.connector_l0 < self.grid.x_max && -self.connector_l0 > self.grid.x_min) {
            return Err(Error::invalid(
                "connector_l0",
                format!(
                    "transition zone [-L0, L0] must sit inside the x-domain, got L0 = {}",
                    self.connector_l0
                ),
            ));
        }
        let (a, b) = self.window;
        if !(a < b && a > self.grid.x_min && b < self.grid.x_max) {
            return Err(Error::invalid(
                "window_min",
                "window must be a non-empty interval strictly inside the x-domain",
            ));
        }
        if let Some(w) = self.fluid.width {
            if !(w > 0.0) {
                return Err(Error::invalid("u_width", "must be positive"));
            }
        }
        let mut last = f64::NEG_INFINITY;
        for &t in &self.output_times {
            if !(t >= 0.0 && t > last) {
                return Err(Error::invalid(
                    "output_times",
                    "must be non-negative and strictly increasing",
                ));
            }
            last = t;
        }
        if self.fluid_substeps < 1 {
            return Err(Error::invalid("fluid_substeps", "must be at least 1"));
        }
        if self.sweep.dx_ratio <= 0.0 {
            return Err(Error::invalid("sweep_dx_ratio", "must be positive"));
        }
        Ok(())
    }
}

/// Parses configuration text on top of `base`, then applies `overrides`
/// (which take precedence), then validates.
pub fn parse_config(
    base: SimConfig,
    text: &str,
    overrides: &[(String, String)],
) -> std::result::Result<SimConfig, ConfigError> {
    let mut cfg = base;
    let mut origin_of: Vec<(String, Origin)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
            origin: Origin::Line(line_no),
            key: None,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        cfg.set(key, value).map_err(|message| ConfigError {
            origin: Origin::Line(line_no),
            key: Some(key.to_string()),
            message,
        })?;
        origin_of.push((key.to_string(), Origin::Line(line_no)));
    }
    for (key, value) in overrides {
        cfg.set(key, value).map_err(|message| ConfigError {
            origin: Origin::Override,
            key: Some(key.clone()),
            message,
        })?;
        origin_of.push((key.clone(), Origin::Override));
    }
    cfg.validate().map_err(|e| {
        let key = match &e {
            Error::InvalidConfig { key, .. } => Some(key.clone()),
            _ => None,
        };
        let origin = key
            .as_ref()
            .and_then(|k| origin_of.iter().rev().find(|(name, _)| name == k))
            .map(|(_, o)| o.clone())
            .unwrap_or(Origin::Line(0));
        ConfigError {
            origin,
            key,
            message: e.to_string(),
        }
    })?;
    Ok(cfg)
}

/// Splits a `key=value` override.
pub fn parse_override(arg: &str) -> Option<(String, String)> {
    let (k, v) = arg.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let mut cfg = SimConfig::default();
        cfg.output_times = vec![0.25, 0.5];
        cfg.fluid.width = Some(0.3);
        let parsed = parse_config(SimConfig::default(), &cfg.to_text(), &[]).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn every_key_is_settable() {
        let cfg = SimConfig::default();
        for key in KEYS {
            let mut c = cfg.clone();
            let v = cfg.get(key).unwrap();
            c.set(key, &v).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config(SimConfig::default(), "epsilon = 0.1\n\nbogus = 3\n", &[]).unwrap_err();
        assert_eq!(err.origin, Origin::Line(3));
        assert!(err.message.contains("bogus"));
    }

    #[test]
    fn invalid_cfl_names_key_and_line() {
        let err = parse_config(SimConfig::default(), "# header\ncfl = 1.5\n", &[]).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("cfl"));
        assert_eq!(err.origin, Origin::Line(2));
        assert!(err.to_string().contains("cfl"));
    }

    #[test]
    fn overrides_beat_file_values() {
        let cfg = parse_config(
            SimConfig::default(),
            "epsilon = 0.1\nnx = 100\n",
            &[("epsilon".into(), "0.02".into())],
        )
        .unwrap();
        assert_eq!(cfg.epsilon, 0.02);
        assert_eq!(cfg.grid.nx, 100);
    }

    #[test]
    fn malformed_line_is_rejected() {
        let err = parse_config(SimConfig::default(), "epsilon 0.1\n", &[]).unwrap_err();
        assert_eq!(err.origin, Origin::Line(1));
    }

    #[test]
    fn epsilon_bounds() {
        let mut c = SimConfig::default();
        c.epsilon = 1.0;
        assert!(c.validate().is_err());
        c.epsilon = 0.0;
        assert!(c.validate().is_ok());
    }
}
