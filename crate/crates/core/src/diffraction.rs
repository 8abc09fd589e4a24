//! Diffraction-order amplitudes and partial probabilities.
//!
//! Order n carries momentum p₀ + nħk. The amplitudes are the Fourier
//! coefficients of φ over one full period 2π of cos ξ,
//!
//! a_n = (1/2π) ∫₀^{2π} φ(ξ, t) e^{−inξ} dξ,
//!
//! which reduces to (1/π)∫₀^π for the orders allowed by parity: φ_m has
//! period π (even orders only) and φ_e flips sign under ξ → ξ + π (odd
//! orders only). Parseval then gives Σ|a_n|² = W_tot.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::dynamics::{wavefunctions, Method, PopulationSeries};
use crate::error::{Error, Result};
use crate::model::{ModelParams, TimeGrid};
use crate::output::{csv_line, fmt_f64};
use crate::quadrature::{integrate, QuadSpec};
use crate::special::{bessel_i01_scaled, bessel_i1_over_x_scaled, bessel_j_seq};

/// Change in any amplitude between successive grid doublings that counts as converged.
const GRID_TOL: f64 = 1e-10;
const MAX_GRID: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionSpectrum {
    pub t: f64,
    pub orders: Vec<i64>,
    pub a_m: Vec<Complex64>,
    pub a_e: Vec<Complex64>,
    pub w_m: Vec<f64>,
    pub w_e: Vec<f64>,
    /// Number of samples per period used for the transform.
    pub grid_points: usize,
}

pub const SPECTRUM_CSV_HEADER: &str = "t,n,channel,re_a,im_a,w";

impl DiffractionSpectrum {
    fn index(&self, n: i64) -> Option<usize> {
        let first = *self.orders.first()?;
        let idx = usize::try_from(n - first).ok()?;
        (idx < self.orders.len()).then_some(idx)
    }

    pub fn amplitude_m(&self, n: i64) -> Option<Complex64> {
        self.index(n).map(|i| self.a_m[i])
    }

    pub fn amplitude_e(&self, n: i64) -> Option<Complex64> {
        self.index(n).map(|i| self.a_e[i])
    }

    /// Largest amplitude among the orders forbidden by parity
    /// (odd orders of the metastable channel, even orders of the excited one).
    pub fn max_forbidden(&self) -> f64 {
        self.orders
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                if n % 2 == 0 {
                    self.a_e[i].norm()
                } else {
                    self.a_m[i].norm()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn total_m(&self) -> f64 {
        self.w_m.iter().sum()
    }

    pub fn total_e(&self) -> f64 {
        self.w_e.iter().sum()
    }

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (i, &n) in self.orders.iter().enumerate() {
            for (channel, a, w) in [("m", self.a_m[i], self.w_m[i]), ("e", self.a_e[i], self.w_e[i])] {
                let cells = [
                    fmt_f64(self.t),
                    n.to_string(),
                    channel.to_string(),
                    fmt_f64(a.re),
                    fmt_f64(a.im),
                    fmt_f64(w),
                ];
                let _ = writeln!(out, "{}", csv_line(cells));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{SPECTRUM_CSV_HEADER}\n{}", self.csv_rows())
    }
}

fn fourier_coefficients(
    params: &ModelParams,
    t: f64,
    n_max: usize,
    points: usize,
    planner: &mut FftPlanner<f64>,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let step = 2.0 * std::f64::consts::PI / points as f64;
    let (mut m, mut e): (Vec<Complex64>, Vec<Complex64>) = (0..points)
        .map(|j| wavefunctions(params, j as f64 * step, t))
        .unzip();
    let fft = planner.plan_fft_forward(points);
    fft.process(&mut m);
    fft.process(&mut e);
    let scale = 1.0 / points as f64;
    let pick = |data: &[Complex64]| -> Vec<Complex64> {
        (-(n_max as i64)..=n_max as i64)
            .map(|n| data[n.rem_euclid(points as i64) as usize] * scale)
            .collect()
    };
    (pick(&m), pick(&e))
}

/// Amplitudes of orders −n_max..=n_max from a uniform-grid FFT of the
/// adiabatic solution.
///
/// The grid starts at 8·n_max samples (at least 64) and is doubled until no
/// amplitude moves by more than 1e-10 between doublings.
pub fn amplitudes(params: &ModelParams, t: f64, n_max: usize) -> Result<DiffractionSpectrum> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let mut planner = FftPlanner::new();
    let mut points = (8 * n_max).max(64).next_power_of_two();
    let mut current = fourier_coefficients(params, t, n_max, points, &mut planner);
    loop {
        if 2 * points > MAX_GRID {
            return Err(Error::GridNotConverged {
                points,
                change: f64::NAN,
            });
        }
        points *= 2;
        let refined = fourier_coefficients(params, t, n_max, points, &mut planner);
        let change = current
            .0
            .iter()
            .zip(&refined.0)
            .chain(current.1.iter().zip(&refined.1))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        current = refined;
        if change < GRID_TOL {
            break;
        }
    }
    let (a_m, a_e) = current;
    Ok(DiffractionSpectrum {
        t,
        orders: (-(n_max as i64)..=n_max as i64).collect(),
        w_m: a_m.iter().map(|a| a.norm_sqr()).collect(),
        w_e: a_e.iter().map(|a| a.norm_sqr()).collect(),
        a_m,
        a_e,
        grid_points: points,
    })
}

/// Closed-form partial probabilities W_{2n}^{(m)} and W_{2n+1}^{(e)} for each
/// requested `n`, from one shared quadrature over z ∈ [0, 1].
///
/// With b = |Ω|t/2, a = Γt/4 and u = a√(1−z²):
///
/// √W_{2n}^{(m)} = e^{−a}[J_{2n}(b) + a ∫ J_{2n}(bz)(I₁(u)/√(1−z²) + I₀(u)) dz]
/// √W_{2n+1}^{(e)} = (b/2) e^{−a} ∫ I₀(u)(J_{2n+2}(bz) − J_{2n}(bz)) dz
///
/// The factor e^{−a} is folded into scaled modified Bessel functions, and
/// I₁(u)/√(1−z²) = a·I₁(u)/u is evaluated through its regular series.
/// `tol` bounds the absolute quadrature error of the amplitudes.
pub fn closed_form_partials(
    params: &ModelParams,
    t: f64,
    orders: &[usize],
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if orders.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let b = 0.5 * params.rabi * t;
    let a = 0.25 * params.gamma * t;
    let top = 2 * orders.iter().copied().max().unwrap_or(0) + 2;
    let count = orders.len();

    let integrals = integrate(
        |z, out: &mut [f64]| {
            let j = bessel_j_seq(top, b * z);
            let u = a * (1.0 - z * z).max(0.0).sqrt();
            let (i0, _) = bessel_i01_scaled(u);
            let shift = (u - a).exp();
            let m_weight = a * shift * (a * bessel_i1_over_x_scaled(u) + i0);
            let e_weight = 0.5 * b * shift * i0;
            for (k, &n) in orders.iter().enumerate() {
                out[k] = m_weight * j[2 * n];
                out[count + k] = e_weight * (j[2 * n + 2] - j[2 * n]);
            }
        },
        2 * count,
        0.0,
        1.0,
        &QuadSpec::with_abs_tol(tol),
    )?;

    let j_end = bessel_j_seq(top, b);
    let decay = (-a).exp();
    let w_m = orders
        .iter()
        .enumerate()
        .map(|(k, &n)| (decay * j_end[2 * n] + integrals[k]).powi(2))
        .collect();
    let w_e = (0..count).map(|k| integrals[count + k].powi(2)).collect();
    Ok((w_m, w_e))
}

/// W_{2n}^{(m)}(t) from the closed-form Bessel integral.
pub fn partial_m(params: &ModelParams, t: f64, n: usize, tol: f64) -> Result<f64> {
    Ok(closed_form_partials(params, t, &[n], tol)?.0[0])
}

/// W_{2n+1}^{(e)}(t) from the closed-form Bessel integral.
pub fn partial_e(params: &ModelParams, t: f64, n: usize, tol: f64) -> Result<f64> {
    Ok(closed_form_partials(params, t, &[n], tol)?.1[0])
}

/// Totals obtained by summing partial probabilities over diffraction orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSum {
    pub w_m: f64,
    pub w_e: f64,
    /// Largest |n| included in the sum.
    pub n_used: usize,
}

/// Default cap on the physical order reached by [`totals_from_sum`].
pub fn default_order_limit(params: &ModelParams, t: f64) -> usize {
    4 * (params.rabi * t).ceil() as usize + 32
}

/// W_tot by summing closed-form partials outward in |n|.
///
/// A shell j holds orders ±2j (metastable) and ±(2j+1) (excited). The sum
/// stops once it has passed the Bessel argument |Ω|t/2 and the last two
/// shells together carry less than `tail_tol`.
pub fn totals_from_sum(params: &ModelParams, t: f64, tail_tol: f64) -> Result<ModeSum> {
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidParameter("tail_tol must be positive".into()));
    }
    let limit = default_order_limit(params, t);
    let argument = 0.5 * params.rabi * t;
    let quad_tol = (1e-3 * tail_tol).clamp(1e-13, 1e-10);
    let mut shells = ((argument / 2.0).ceil() as usize + 8).min(limit / 2 + 1);
    let mut last_tail = f64::INFINITY;

    loop {
        let orders: Vec<usize> = (0..shells).collect();
        let (w_m, w_e) = closed_form_partials(params, t, &orders, quad_tol)?;
        let mut sum_m = 0.0;
        let mut sum_e = 0.0;
        let mut previous_shell = f64::INFINITY;
        for j in 0..shells {
            let mult = if j == 0 { 1.0 } else { 2.0 };
            let shell_m = mult * w_m[j];
            let shell_e = 2.0 * w_e[j];
            sum_m += shell_m;
            sum_e += shell_e;
            let shell = shell_m + shell_e;
            let tail = shell + previous_shell;
            let top_order = 2 * j + 1;
            if j >= 1 && top_order as f64 > argument && tail < tail_tol {
                return Ok(ModeSum {
                    w_m: sum_m,
                    w_e: sum_e,
                    n_used: top_order,
                });
            }
            previous_shell = shell;
            last_tail = tail;
        }
        if 2 * shells + 1 >= limit {
            return Err(Error::TailNotConverged {
                order: 2 * shells - 1,
                tail: last_tail,
            });
        }
        shells = (2 * shells).min(limit / 2 + 1);
    }
}

/// Mode-sum totals over a time grid, evaluated in parallel.
pub fn mode_sum_series(
    params: &ModelParams,
    times: &TimeGrid,
    tail_tol: f64,
) -> Result<PopulationSeries> {
    let values: Result<Vec<ModeSum>> = times
        .points()
        .par_iter()
        .map(|&t| totals_from_sum(params, t, tail_tol))
        .collect();
    let values = values?;
    Ok(PopulationSeries {
        times: times.clone(),
        w_m: values.iter().map(|v| v.w_m).collect(),
        w_e: values.iter().map(|v| v.w_e).collect(),
        method: Method::ModeSum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::total_populations;
    use crate::special::bessel_j;

    fn p(rabi: f64, gamma: f64) -> ModelParams {
        ModelParams::new(rabi, gamma).unwrap()
    }

    #[test]
    fn initial_spectrum() {
        let s = amplitudes(&p(5.0, 1.0), 0.0, 6).unwrap();
        for (i, &n) in s.orders.iter().enumerate() {
            let expected = if n == 0 { 1.0 } else { 0.0 };
            assert!((s.a_m[i] - expected).norm() < 1e-15);
            assert!(s.a_e[i].norm() < 1e-15);
        }
    }

    #[test]
    fn parity_selection_and_mirror() {
        let s = amplitudes(&p(5.0, 1.0), 2.0, 16).unwrap();
        assert!(s.max_forbidden() <= 1e-12, "{}", s.max_forbidden());
        for n in 1..=16 {
            let (i, j) = (s.index(n).unwrap(), s.index(-n).unwrap());
            assert!((s.w_m[i] - s.w_m[j]).abs() < 1e-14);
            assert!((s.w_e[i] - s.w_e[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn parseval_against_quadrature() {
        let params = p(5.0, 1.0);
        let s = amplitudes(&params, 2.0, 24).unwrap();
        let (m, e) = total_populations(&params, 2.0, &QuadSpec::with_abs_tol(1e-12)).unwrap();
        assert!((s.total_m() - m).abs() < 1e-8);
        assert!((s.total_e() - e).abs() < 1e-8);
    }

    #[test]
    fn closed_forms_at_zero_time() {
        let params = p(5.0, 1.0);
        assert!((partial_m(&params, 0.0, 0, 1e-12).unwrap() - 1.0).abs() < 1e-15);
        for n in 1..4 {
            assert_eq!(partial_m(&params, 0.0, n, 1e-12).unwrap(), 0.0);
        }
        for n in 0..4 {
            assert_eq!(partial_e(&params, 0.0, n, 1e-12).unwrap(), 0.0);
        }
    }

    #[test]
    fn undamped_closed_forms_are_raman_nath() {
        let params = p(4.0, 0.0);
        let t = 3.0;
        let b = 0.5 * 4.0 * t;
        for n in 0..8 {
            let jm = bessel_j(2 * n, b);
            let je = bessel_j(2 * n + 1, b);
            assert!((partial_m(&params, t, n, 1e-12).unwrap() - jm * jm).abs() < 1e-14);
            assert!((partial_e(&params, t, n, 1e-12).unwrap() - je * je).abs() < 1e-11);
        }
        let s = amplitudes(&params, t, 4).unwrap();
        let w1 = partial_e(&params, t, 0, 1e-12).unwrap();
        assert!((s.w_e[s.index(1).unwrap()] - w1).abs() < 1e-10);
    }

    #[test]
    fn closed_forms_match_fourier() {
        let params = p(5.0, 1.0);
        let t = 2.0;
        let s = amplitudes(&params, t, 16).unwrap();
        for n in 0..=5usize {
            let wm = partial_m(&params, t, n, 1e-12).unwrap();
            let we = partial_e(&params, t, n, 1e-12).unwrap();
            let fm = s.w_m[s.index(2 * n as i64).unwrap()];
            let fe = s.w_e[s.index(2 * n as i64 + 1).unwrap()];
            assert!((wm - fm).abs() < 1e-8, "m {n}: {wm} vs {fm}");
            assert!((we - fe).abs() < 1e-8, "e {n}: {we} vs {fe}");
        }
    }

    #[test]
    fn mode_sum_unitary_without_decay() {
        let params = p(3.0, 0.0);
        for &t in &[0.5, 4.0, 11.0] {
            let s = totals_from_sum(&params, t, 1e-12).unwrap();
            assert!((s.w_m + s.w_e - 1.0).abs() < 1e-11, "t {t}");
        }
    }

    #[test]
    fn mode_sum_at_zero_time() {
        let s = totals_from_sum(&p(5.0, 1.0), 0.0, 1e-10).unwrap();
        assert_eq!((s.w_m, s.w_e), (1.0, 0.0));
        assert!(s.n_used <= 5);
    }

    #[test]
    fn mode_sum_matches_quadrature() {
        let params = p(5.0, 1.0);
        for &t in &[0.7, 2.0, 5.5] {
            let s = totals_from_sum(&params, t, 1e-10).unwrap();
            let (m, e) = total_populations(&params, t, &QuadSpec::with_abs_tol(1e-12)).unwrap();
            assert!((s.w_m - m).abs() < 1e-9, "t {t}");
            assert!((s.w_e - e).abs() < 1e-9, "t {t}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(amplitudes(&p(1.0, 1.0), 1.0, 0).is_err());
        assert!(totals_from_sum(&p(1.0, 1.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn spectrum_csv_layout() {
        let s = amplitudes(&p(2.0, 1.0), 1.0, 2).unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SPECTRUM_CSV_HEADER));
        assert_eq!(lines.count(), 10);
    }
}
