//! Subcommand implementations. Each returns the files to write; the
//! caller owns all I/O so the commands stay pure and testable.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::{json, Map, Number, Value};
use swdecay_core::analysis::{self, PowerLawFit, Window};
use swdecay_core::diffraction::{self, closed_form_partials};
use swdecay_core::dynamics::{self, Channel, Method, PopulationSeries, SERIES_CSV_HEADER};
use swdecay_core::ladder::{self, LadderOptions};
use swdecay_core::output::{csv_line, fmt_f64};
use swdecay_core::quadrature::QuadSpec;
use swdecay_core::quasienergy::zone_table;
use swdecay_core::{ModelParams, TimeGrid};

use crate::config::{Format, ScenarioConfig};
use crate::CliError;

/// One output file; `path == None` means standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub content: String,
}

pub const DENSITY_CSV_HEADER: &str =
    "xi,prob_m,prob_e,gauss_prob_m,gauss_prob_e,density_m,density_e,gauss_density_m,gauss_density_e";
pub const DIFFRACTION_CSV_HEADER: &str = "t,n,channel,w_fourier,w_closed";
pub const LADDER_CSV_HEADER: &str = "t,w_m,w_e,boundary_norm,asymmetry,dissipated";
pub const FIT_CSV_HEADER: &str =
    "channel,exponent,prefactor,rms_residual,window_min,window_max,expected_exponent,expected_prefactor";

fn primary(config: &ScenarioConfig, csv: String) -> Vec<Artifact> {
    let content = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => csv,
        Format::Json => csv_to_json(&csv),
    };
    vec![Artifact {
        path: config.out.clone(),
        content,
    }]
}

/// Converts a CSV table to `{"columns": [...], "rows": [[...], ...]}`.
/// Numeric cells become JSON numbers; everything else stays a string.
pub fn csv_to_json(csv: &str) -> String {
    let mut lines = csv.lines();
    let columns: Vec<Value> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(|c| Value::String(c.to_string()))
        .collect();
    let rows: Vec<Value> = lines
        .map(|line| {
            Value::Array(
                line.split(',')
                    .map(|cell| match cell.parse::<f64>().ok().and_then(Number::from_f64) {
                        Some(n) => Value::Number(n),
                        None => Value::String(cell.to_string()),
                    })
                    .collect(),
            )
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&json!({ "columns": columns, "rows": rows }))
        .expect("JSON values serialize");
    out.push('\n');
    out
}

fn quad_spec(config: &ScenarioConfig) -> QuadSpec {
    QuadSpec::with_abs_tol(config.tol)
}

fn ladder_options(config: &ScenarioConfig) -> LadderOptions {
    LadderOptions {
        rtol: config.tol,
        atol: config.tol * 1e-3,
        ..Default::default()
    }
}

pub fn cmd_zones(config: &ScenarioConfig) -> Result<Vec<Artifact>, CliError> {
    let params = config.params()?;
    let grid = config.spatial_grid()?;
    Ok(primary(config, zone_table(&params, &grid).to_csv()))
}

pub fn cmd_density(config: &ScenarioConfig) -> Result<Vec<Artifact>, CliError> {
    let params = config.params()?;
    let grid = config.spatial_grid()?;
    let t = config.time;
    if t < 0.0 {
        return Err(CliError::Usage(format!("time must be >= 0, got {t}")));
    }
    let mut csv = format!("{DENSITY_CSV_HEADER}\n");
    let pi = std::f64::consts::PI;
    for &xi in grid.points() {
        let (pm, pe) = dynamics::probabilities(&params, xi, t);
        let (gm, ge) = dynamics::gaussian_density(&params, xi, t);
        let cells = [xi, pm, pe, gm * pi, ge * pi, pm / pi, pe / pi, gm, ge].map(fmt_f64);
        let _ = writeln!(csv, "{}", csv_line(cells));
    }
    Ok(primary(config, csv))
}

fn series_for(
    method: Method,
    params: &ModelParams,
    times: &TimeGrid,
    config: &ScenarioConfig,
) -> Result<PopulationSeries, CliError> {
    Ok(match method {
        Method::Quadrature => dynamics::quadrature_series(params, times, &quad_spec(config))?,
        Method::ModeSum => diffraction::mode_sum_series(params, times, config.tol)?,
        Method::Ladder => ladder::integrate(params, times, &ladder_options(config))?.series,
        Method::Asymptotic => {
            let positive: Vec<f64> = times.points().iter().copied().filter(|&t| t > 0.0).collect();
            let grid = TimeGrid::new(positive)
                .map_err(|_| CliError::Usage("asymptotic method needs a time > 0".into()))?;
            dynamics::asymptotic_series(params, &grid)?
        }
        Method::TwoLevel => dynamics::two_level_series(params, times),
        Method::Gaussian => {
            // Integral of the Gaussian densities over the whole line.
            let positive: Vec<f64> = times.points().iter().copied().filter(|&t| t > 0.0).collect();
            let grid = TimeGrid::new(positive)
                .map_err(|_| CliError::Usage("gaussian method needs a time > 0".into()))?;
            let (w_m, w_e) = grid
                .points()
                .iter()
                .map(|&t| dynamics::asymptotic_totals(params, t))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .unzip();
            PopulationSeries {
                times: grid,
                w_m,
                w_e,
                method: Method::Gaussian,
            }
        }
    })
}

pub fn cmd_totals(config: &ScenarioConfig) -> Result<Vec<Artifact>, CliError> {
    let params = config.params()?;
    let times = config.time_grid()?;
    if config.methods.is_empty() {
        return Err(CliError::Usage("no methods selected".into()));
    }
    let mut csv = format!("{SERIES_CSV_HEADER}\n");
    for &method in &config.methods {
        csv.push_str(&series_for(method, &params, &times, config)?.csv_rows());
    }
    Ok(primary(config, csv))
}

pub fn cmd_diffraction(config: &ScenarioConfig) -> Result<Vec<Artifact>, CliError> {
    let params = config.params()?;
    let times = config.time_grid()?;
    if config.orders < 1 {
        return Err(CliError::Usage("orders must be at least 1".into()));
    }
    let n_max = config.orders as i64;
    let half: Vec<usize> = (0..=config.orders / 2).collect();
    let mut csv = format!("{DIFFRACTION_CSV_HEADER}\n");
    for &t in times.points() {
        let spectrum = diffraction::amplitudes(&params, t, config.orders)?;
        let (cm, ce) = closed_form_partials(&params, t, &half, config.tol)?;
        for n in -n_max..=n_max {
            let k = n.unsigned_abs() as usize;
            let w_m = spectrum.amplitude_m(n).map_or(0.0, |a| a.norm_sqr());
            let w_e = spectrum.amplitude_e(n).map_or(0.0, |a| a.norm_sqr());
            let closed_m = if k % 2 == 0 { cm[k / 2] } else { 0.0 };
            let closed_e = if k % 2 == 1 { ce[k / 2] } else { 0.0 };
            for (channel, w, c) in [("m", w_m, closed_m), ("e", w_e, closed_e)] {
                let _ = writeln!(
                    csv,
                    "{},{n},{channel},{},{}",
                    fmt_f64(t),
                    fmt_f64(w),
                    fmt_f64(c)
                );
            }
        }
    }
    Ok(primary(config, csv))
}

pub fn cmd_ladder(config: &ScenarioConfig) -> Result<Vec<Artifact>, CliError> {
    let params = config.params()?;
    let times = config.time_grid()?;
    let opts = ladder_options(config);
    let run = ladder::integrate(&params, &times, &opts)?;
    let probe = if config.probe {
        Some(ladder::adiabaticity_probe(&params, &times, &opts)?)
    } else {
        None
    };

    let mut csv = String::from(LADDER_CSV_HEADER);
    if probe.is_some() {
        csv.push_str(",d_m,d_e");
    }
    csv.push('\n');
    for (j, &t) in times.points().iter().enumerate() {
        let s = &run.snapshots[j];
        let mut cells = vec![
            t,
            run.series.w_m[j],
            run.series.w_e[j],
            run.boundary_norm[j],
            s.mirror_asymmetry(),
            run.dissipated[j],
        ];
        if let Some(p) = &probe {
            cells.push(p.d_m[j]);
            cells.push(p.d_e[j]);
        }
        let _ = writeln!(csv, "{}", csv_line(cells.into_iter().map(fmt_f64)));
    }

    let mut artifacts = primary(config, csv);
    if let Some(path) = &config.trajectory {
        let traj = run.trajectory_csv();
        artifacts.push(Artifact {
            path: Some(path.clone()),
            content: match config.format.unwrap_or(Format::Csv) {
                Format::Csv => traj,
                Format::Json => csv_to_json(&traj),
            },
        });
    }
    Ok(artifacts)
}

fn expected_tail(params: &ModelParams, channel: Channel) -> Result<(f64, f64), CliError> {
    let (a_m, a_e) = dynamics::asymptotic_totals(params, 1.0)?;
    Ok(match channel {
        Channel::Metastable => (-0.5, a_m),
        Channel::Excited => (-1.5, a_e),
    })
}

fn fit_json(channel: Channel, fit: &PowerLawFit, expected: (f64, f64)) -> Value {
    json!({
        "channel": channel.tag(),
        "exponent": fit.exponent,
        "prefactor": fit.prefactor,
        "rms_residual": fit.rms_residual,
        "window": [fit.window.0, fit.window.1],
        "expected_exponent": expected.0,
        "expected_prefactor": expected.1,
    })
}

/// Series for the power-law fit: ingested if `input` is set, else quadrature.
fn fit_series(
    config: &ScenarioConfig,
    params: &ModelParams,
    ingested: &[PopulationSeries],
) -> Result<PopulationSeries, CliError> {
    if config.input.is_some() {
        return ingested
            .iter()
            .find(|s| !matches!(s.method, Method::TwoLevel | Method::Asymptotic | Method::Gaussian))
            .cloned()
            .ok_or_else(|| CliError::Usage("input holds no exact population series".into()));
    }
    Ok(dynamics::quadrature_series(params, &config.time_grid()?, &quad_spec(config))?)
}

fn suppression_json(
    config: &ScenarioConfig,
    params: &ModelParams,
    ingested: &[PopulationSeries],
) -> Result<Value, CliError> {
    if config.windows.is_empty() {
        return Ok(Value::Null);
    }
    let (series, reference) = if config.input.is_some() {
        let series = fit_series(config, params, ingested)?;
        let reference = ingested
            .iter()
            .find(|s| s.method == Method::TwoLevel && s.times == series.times)
            .cloned()
            .unwrap_or_else(|| dynamics::two_level_series(params, &series.times));
        (series, reference)
    } else {
        // 100 samples per unit Γt across the union of the windows.
        let end = config.windows.iter().map(|w| w.1).fold(0.0, f64::max);
        let count = (100.0 * end).ceil() as usize + 1;
        let times = TimeGrid::uniform(0.0, end, count.max(2))?;
        (
            dynamics::quadrature_series(params, &times, &quad_spec(config))?,
            dynamics::two_level_series(params, &times),
        )
    };
    let t = series.times.points();
    let (first, last) = (t[0], series.times.last());
    let mut ratios = Vec::new();
    let mut entries = Vec::new();
    for &w in &config.windows {
        // An ingested series may not cover every window.
        let r = if w.0 >= first && w.1 <= last {
            Some(analysis::suppression_ratio(t, &series.w_m, &reference.w_m, w)?)
        } else {
            None
        };
        ratios.push(r);
        entries.push(json!({ "window": [w.0, w.1], "ratio": r }));
    }
    let decreasing = match ratios.iter().copied().collect::<Option<Vec<f64>>>() {
        Some(r) => json!(r.windows(2).all(|p| p[1] < p[0])),
        None => Value::Null,
    };
    let mut obj = Map::new();
    obj.insert("channel".into(), json!("m"));
    obj.insert("reference".into(), json!(Method::TwoLevel.tag()));
    obj.insert("windows".into(), Value::Array(entries));
    obj.insert("strictly_decreasing".into(), decreasing);
    Ok(Value::Object(obj))
}

pub fn cmd_fit(config: &ScenarioConfig, input_text: Option<&str>) -> Result<Vec<Artifact>, CliError> {
    let params = config.params()?;
    let ingested = match input_text {
        Some(text) => PopulationSeries::parse_csv(text)?,
        None => Vec::new(),
    };
    let series = fit_series(config, &params, &ingested)?;
    let t = series.times.points();
    let window: Window = config
        .window
        .unwrap_or_else(|| analysis::default_fit_window(&params, series.times.last()));

    let mut fits = Vec::new();
    let mut csv = format!("{FIT_CSV_HEADER}\n");
    for channel in [Channel::Metastable, Channel::Excited] {
        let fit = analysis::fit_power_law(t, series.channel(channel), window)?;
        let expected = expected_tail(&params, channel)?;
        fits.push(fit_json(channel, &fit, expected));
        let cells = [
            fit.exponent,
            fit.prefactor,
            fit.rms_residual,
            fit.window.0,
            fit.window.1,
            expected.0,
            expected.1,
        ]
        .map(fmt_f64);
        let _ = writeln!(csv, "{},{}", channel.tag(), csv_line(cells));
    }

    let content = match config.format.unwrap_or(Format::Json) {
        Format::Csv => csv,
        Format::Json => {
            let suppression = suppression_json(config, &params, &ingested)?;
            let report = json!({
                "method": series.method.tag(),
                "fits": fits,
                "suppression": suppression,
            });
            let mut s = serde_json::to_string_pretty(&report).expect("JSON values serialize");
            s.push('\n');
            s
        }
    };
    Ok(vec![Artifact {
        path: config.out.clone(),
        content,
    }])
}
