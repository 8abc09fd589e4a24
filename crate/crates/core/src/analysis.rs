//! Power-law tail fits, oscillation metrics and suppression ratios.
//!
//! All functions take a time array and a matching value array; a window
//! `(t_min, t_max)` selects the closed range of samples used.

use crate::error::{Error, Result};
use crate::model::{narrow_zone_onset, ModelParams};

pub type Window = (f64, f64);

/// Peaks whose prominence falls below this are treated as noise.
pub const MIN_PROMINENCE: f64 = 1e-6;
pub const MIN_FIT_POINTS: usize = 8;
pub const MIN_PEAKS: usize = 3;
/// |Ω|²t/Γ at which the default fit window opens.
pub const FIT_ONSET_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual of the log-log fit.
    pub rms_residual: f64,
    pub window: Window,
}

impl PowerLawFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.prefactor * t.powf(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationMetrics {
    pub peak_times: Vec<f64>,
    pub peak_values: Vec<f64>,
    pub mean_period: f64,
    pub modulation_depth: f64,
}

fn check_lengths(t: &[f64], y: &[f64]) -> Result<()> {
    if t.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "time and value arrays differ in length ({} vs {})",
            t.len(),
            y.len()
        )));
    }
    Ok(())
}

fn window_range(t: &[f64], window: Window) -> Result<std::ops::Range<usize>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "window [{lo}, {hi}] is not a finite interval"
        )));
    }
    let start = t.partition_point(|&x| x < lo);
    let end = t.partition_point(|&x| x <= hi);
    Ok(start..end.max(start))
}

/// Ordinary least squares of ln w on ln t over the window.
pub fn fit_power_law(t: &[f64], w: &[f64], window: Window) -> Result<PowerLawFit> {
    check_lengths(t, w)?;
    let range = window_range(t, window)?;
    if range.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            found: range.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let (ts, ws) = (&t[range.clone()], &w[range]);
    if let Some((&tt, &v)) = ts.iter().zip(ws).find(|(&tt, &v)| !(tt > 0.0 && v > 0.0)) {
        return Err(Error::NonPositiveValues { t: tt, value: v });
    }

    let x: Vec<f64> = ts.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = ws.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "fit window contains a single distinct time".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        rms_residual: (ss / n).sqrt(),
        window,
    })
}

/// Window starting where the narrow-zone ratio |Ω|²t/Γ reaches ten.
pub fn default_fit_window(params: &ModelParams, t_max: f64) -> Window {
    (narrow_zone_onset(params, FIT_ONSET_RATIO), t_max)
}

/// (max − min)/(max + min) over the window; zero for a flat series.
pub fn modulation_depth(t: &[f64], y: &[f64], window: Window) -> Result<f64> {
    check_lengths(t, y)?;
    let range = window_range(t, window)?;
    if range.is_empty() {
        return Err(Error::InsufficientData {
            found: 0,
            needed: 1,
        });
    }
    let ys = &y[range];
    let max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(&v) = ys.iter().find(|v| **v < 0.0) {
        let at = t[y.iter().position(|x| *x == v).unwrap_or(0)];
        return Err(Error::NonPositiveValues { t: at, value: v });
    }
    if max + min == 0.0 {
        return Ok(0.0);
    }
    Ok((max - min) / (max + min))
}

// Vertex of the parabola through three points.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (d0, d2) = (x[0] - x[1], x[2] - x[1]);
    let (e0, e2) = (y[0] - y[1], y[2] - y[1]);
    // y − y1 = b·(x − x1) + c·(x − x1)²
    let det = d0 * d2 * (d2 - d0);
    let c = (e2 * d0 - e0 * d2) / det;
    let b = (e0 * d2 * d2 - e2 * d0 * d0) / det;
    if c >= 0.0 {
        return (x[1], y[1]);
    }
    let dx = (-b / (2.0 * c)).clamp(d0, d2);
    (x[1] + dx, y[1] + b * dx + c * dx * dx)
}

/// Local maxima in the window with parabolic refinement.
///
/// A sample is a candidate when it rises above its left neighbour and is
/// not below its right one. Its prominence is measured against the lowest
/// values between it and the neighbouring candidates (or window edges).
pub fn find_peaks(t: &[f64], y: &[f64], window: Window) -> Result<(Vec<f64>, Vec<f64>)> {
    check_lengths(t, y)?;
    let range = window_range(t, window)?;
    let (ts, ys) = (&t[range.clone()], &y[range]);
    let candidates: Vec<usize> = (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .collect();

    let min_between = |a: usize, b: usize| ys[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (k, &i) in candidates.iter().enumerate() {
        let left = if k == 0 { 0 } else { candidates[k - 1] };
        let right = candidates.get(k + 1).copied().unwrap_or(ys.len() - 1);
        let base = min_between(left, i).max(min_between(i, right));
        if ys[i] - base < MIN_PROMINENCE {
            continue;
        }
        let (tp, yp) = parabolic_vertex(
            [ts[i - 1], ts[i], ts[i + 1]],
            [ys[i - 1], ys[i], ys[i + 1]],
        );
        if times.last().map_or(true, |&last| tp > last) {
            times.push(tp);
            values.push(yp);
        }
    }
    Ok((times, values))
}

pub fn oscillation_metrics(t: &[f64], y: &[f64], window: Window) -> Result<OscillationMetrics> {
    let (peak_times, peak_values) = find_peaks(t, y, window)?;
    if peak_times.len() < MIN_PEAKS {
        return Err(Error::TooFewPeaks {
            found: peak_times.len(),
            needed: MIN_PEAKS,
        });
    }
    let mean_period = (peak_times[peak_times.len() - 1] - peak_times[0])
        / (peak_times.len() - 1) as f64;
    Ok(OscillationMetrics {
        mean_period,
        modulation_depth: modulation_depth(t, y, window)?,
        peak_times,
        peak_values,
    })
}

/// Modulation depth of `series` relative to `reference` on a shared grid.
pub fn suppression_ratio(t: &[f64], series: &[f64], reference: &[f64], window: Window) -> Result<f64> {
    check_lengths(t, reference)?;
    let num = modulation_depth(t, series, window)?;
    let den = modulation_depth(t, reference, window)?;
    if den == 0.0 {
        return Err(Error::InvalidParameter(
            "reference series does not oscillate in the window".into(),
        ));
    }
    Ok(num / den)
}
