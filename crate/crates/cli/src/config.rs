//! Scenario configuration shared by all subcommands.
//!
//! Values come from four layers applied in order: built-in defaults, a
//! named preset, a `key = value` config file and finally command-line
//! flags. Config keys are the long flag names.

use std::fmt::Write as _;
use std::path::PathBuf;

use swdecay_core::analysis::Window;
use swdecay_core::dynamics::Method;
use swdecay_core::{ModelParams, SpatialGrid, TimeGrid};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn tag(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub const PRESETS: [&str; 6] = ["fig2a", "fig2b", "fig3", "fig4", "fig5", "tail"];

pub const KEYS: [&str; 21] = [
    "preset",
    "rabi",
    "gamma",
    "recoil",
    "detuning",
    "phase",
    "time",
    "tmin",
    "tmax",
    "nt",
    "nx",
    "orders",
    "tol",
    "methods",
    "window",
    "windows",
    "probe",
    "format",
    "out",
    "trajectory",
    "input",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub rabi: f64,
    pub gamma: f64,
    pub recoil: f64,
    pub detuning: f64,
    pub phase: f64,
    /// Snapshot time for the density command.
    pub time: f64,
    pub tmin: f64,
    pub tmax: f64,
    pub nt: usize,
    pub nx: usize,
    /// Highest diffraction order |n| reported.
    pub orders: usize,
    pub tol: f64,
    pub methods: Vec<Method>,
    /// Fit window; defaults to the narrow-zone onset up to `tmax`.
    pub window: Option<Window>,
    /// Windows for the suppression ratio.
    pub windows: Vec<Window>,
    pub probe: bool,
    /// Output format; each command has its own default when unset.
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            preset: None,
            rabi: 5.0,
            gamma: 1.0,
            recoil: 0.0,
            detuning: 0.0,
            phase: 0.0,
            time: 2.0,
            tmin: 0.0,
            tmax: 6.0,
            nt: 121,
            nx: 401,
            orders: 8,
            tol: 1e-9,
            methods: vec![
                Method::Quadrature,
                Method::ModeSum,
                Method::Asymptotic,
                Method::TwoLevel,
            ],
            window: None,
            windows: vec![(1.0, 3.0), (3.0, 5.0), (5.0, 7.0)],
            probe: false,
            format: None,
            out: None,
            trajectory: None,
            input: None,
        }
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = value
        .parse()
        .map_err(|_| usage(format!("{key}: expected a number, got '{value}'")))?;
    if !v.is_finite() {
        return Err(usage(format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .parse()
        .map_err(|_| usage(format!("{key}: expected a non-negative integer, got '{value}'")))
}

fn parse_window(key: &str, value: &str) -> Result<Window, CliError> {
    let (a, b) = value
        .split_once(':')
        .ok_or_else(|| usage(format!("{key}: expected 'start:end', got '{value}'")))?;
    let w = (parse_f64(key, a.trim())?, parse_f64(key, b.trim())?);
    if w.0 > w.1 {
        return Err(usage(format!("{key}: window start exceeds end in '{value}'")));
    }
    Ok(w)
}

fn emit_window(w: Window) -> String {
    format!("{:?}:{:?}", w.0, w.1)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(usage(format!("{key}: expected true or false, got '{value}'"))),
    }
}

/// `key = value` lines; blank lines and `#` comments are skipped.
fn parse_entries(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

impl ScenarioConfig {
    /// Overwrites the fields bound by a named preset.
    pub fn apply_preset(&mut self, name: &str) -> Result<(), CliError> {
        match name {
            // 2|Ω|/Γ = 1/√2 and 2√2.
            "fig2a" => self.rabi = 0.5 * std::f64::consts::FRAC_1_SQRT_2,
            "fig2b" => self.rabi = std::f64::consts::SQRT_2,
            "fig3" => {
                self.rabi = 3.0;
                self.time = 2.0;
            }
            "fig4" => {
                self.rabi = 5.0;
                self.tmin = 0.0;
                self.tmax = 6.0;
                self.nt = 121;
                self.orders = 6;
            }
            "fig5" => {
                self.rabi = 5.0;
                self.tmin = 0.0;
                self.tmax = 6.0;
                self.nt = 601;
            }
            "tail" => {
                self.rabi = 5.0;
                self.tmin = 50.0;
                self.tmax = 400.0;
                self.nt = 351;
                self.window = Some((50.0, 400.0));
            }
            _ => {
                return Err(usage(format!(
                    "unknown preset '{name}' (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        }
        self.gamma = 1.0;
        self.preset = Some(name.to_string());
        Ok(())
    }

    /// Sets one field from its textual form. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        let path = || (!value.is_empty()).then(|| PathBuf::from(value));
        match key {
            "preset" => self.apply_preset(value)?,
            "rabi" => self.rabi = parse_f64(key, value)?,
            "gamma" => self.gamma = parse_f64(key, value)?,
            "recoil" => self.recoil = parse_f64(key, value)?,
            "detuning" => self.detuning = parse_f64(key, value)?,
            "phase" => self.phase = parse_f64(key, value)?,
            "time" => self.time = parse_f64(key, value)?,
            "tmin" => self.tmin = parse_f64(key, value)?,
            "tmax" => self.tmax = parse_f64(key, value)?,
            "nt" => self.nt = parse_usize(key, value)?,
            "nx" => self.nx = parse_usize(key, value)?,
            "orders" => self.orders = parse_usize(key, value)?,
            "tol" => {
                let v = parse_f64(key, value)?;
                if !(v > 0.0) {
                    return Err(usage(format!("tol must be positive, got {v}")));
                }
                self.tol = v;
            }
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        Method::from_tag(s).ok_or_else(|| usage(format!("methods: unknown method '{s}'")))
                    })
                    .collect::<Result<_, _>>()?
            }
            "window" => {
                self.window = if value.is_empty() {
                    None
                } else {
                    Some(parse_window(key, value)?)
                }
            }
            "windows" => {
                self.windows = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_window(key, s))
                    .collect::<Result<_, _>>()?
            }
            "probe" => self.probe = parse_bool(key, value)?,
            "format" => {
                self.format = match value {
                    "" => None,
                    "csv" => Some(Format::Csv),
                    "json" => Some(Format::Json),
                    _ => return Err(usage(format!("format: expected csv or json, got '{value}'"))),
                }
            }
            "out" => self.out = path(),
            "trajectory" => self.trajectory = path(),
            "input" => self.input = path(),
            _ => return Err(usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Builds a config from an optional config-file text and flag entries.
    ///
    /// Layers: defaults, preset (a flag preset wins over a file preset),
    /// remaining file keys, remaining flags.
    pub fn resolve(file_text: Option<&str>, flags: &[(String, String)]) -> Result<Self, CliError> {
        let file = match file_text {
            Some(text) => parse_entries(text)?,
            None => Vec::new(),
        };
        let is_preset = |(k, _): &&(String, String)| k == "preset";
        let preset = flags.iter().find(is_preset).or_else(|| file.iter().find(is_preset));
        let mut config = ScenarioConfig::default();
        if let Some((_, name)) = preset {
            config.apply_preset(name.trim())?;
        }
        for (key, value) in file.iter().chain(flags).filter(|e| !is_preset(e)) {
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        ScenarioConfig::resolve(Some(text), &[])
    }

    /// Writes every field in config-file form; `parse(emit())` is lossless.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(p) = &self.preset {
            put("preset", p.clone());
        }
        put("rabi", format!("{:?}", self.rabi));
        put("gamma", format!("{:?}", self.gamma));
        put("recoil", format!("{:?}", self.recoil));
        put("detuning", format!("{:?}", self.detuning));
        put("phase", format!("{:?}", self.phase));
        put("time", format!("{:?}", self.time));
        put("tmin", format!("{:?}", self.tmin));
        put("tmax", format!("{:?}", self.tmax));
        put("nt", self.nt.to_string());
        put("nx", self.nx.to_string());
        put("orders", self.orders.to_string());
        put("tol", format!("{:?}", self.tol));
        put(
            "methods",
            self.methods.iter().map(|m| m.tag()).collect::<Vec<_>>().join(","),
        );
        put("window", self.window.map(emit_window).unwrap_or_default());
        put(
            "windows",
            self.windows.iter().map(|w| emit_window(*w)).collect::<Vec<_>>().join(","),
        );
        put("probe", self.probe.to_string());
        put("format", self.format.map(|f| f.tag().to_string()).unwrap_or_default());
        let p = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        put("out", p(&self.out));
        put("trajectory", p(&self.trajectory));
        put("input", p(&self.input));
        out
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.rabi, self.gamma)?
            .with_recoil(self.recoil)?
            .with_detuning(self.detuning)?
            .with_phase(self.phase)?)
    }

    pub fn spatial_grid(&self) -> Result<SpatialGrid, CliError> {
        SpatialGrid::new(self.nx).map_err(|e| usage(format!("nx: {e}")))
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        if self.nt < 2 {
            return Err(usage(format!("nt must be at least 2, got {}", self.nt)));
        }
        TimeGrid::uniform(self.tmin, self.tmax, self.nt).map_err(|e| usage(format!("time grid: {e}")))
    }
}
