//! Position-resolved solution of the adiabatic initial-value problem.
//!
//! Starting from φ_m = 1, φ_e = 0 the local amplitudes are
//!
//! φ_m = e^{−Γt/4} [cos(st) + (Γ/4) sin(st)/s]
//! φ_e = i (Ω* cos ξ / 2) e^{−Γt/4} sin(st)/s
//!
//! with s² = (|Ω|² cos² ξ − Γ²/4)/4. Both cos(st) and sin(st)/s are entire
//! in s², so this form stays regular at branch points where the
//! eigenvector expansion breaks down.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SpatialGrid, TimeGrid};
use crate::output::{csv_line, fmt_f64};
use crate::quadrature::{integrate, QuadSpec};
use crate::quasienergy::gamma_pm;

/// Default distance |2|Ω cos ξ| − Γ| below which branch coefficients are refused.
pub const DEFAULT_BRANCH_EPS: f64 = 1e-6;

/// |s t| below which the power series replaces the closed forms.
const SERIES_SWITCH: f64 = 1e-3;

/// Weights of the two quasienergy branches in φ_m and φ_e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCoefficients {
    pub a_m_plus: Complex64,
    pub a_m_minus: Complex64,
    pub a_e_plus: Complex64,
    pub a_e_minus: Complex64,
}

/// Branch coefficients at `xi`.
///
/// Fails with [`Error::BranchDegenerate`] within `eps_branch · Γ` of a
/// branch point (or within `eps_branch` when Γ = 0).
pub fn coefficients(
    params: &ModelParams,
    xi: f64,
    eps_branch: f64,
) -> Result<BranchCoefficients> {
    let coupling = params.omega() * xi.cos();
    let distance = (2.0 * coupling.norm() - params.gamma).abs();
    let scale = if params.gamma > 0.0 { params.gamma } else { 1.0 };
    if distance <= eps_branch * scale {
        return Err(Error::BranchDegenerate { xi, distance });
    }
    let g = params.gamma;
    let root = Complex64::new(4.0 * params.coupling_sq(xi) - g * g, 0.0).sqrt();
    let pair = gamma_pm(params, xi);
    let conj_coupling = coupling.conj();
    Ok(BranchCoefficients {
        a_m_plus: -2.0 * pair.gamma_minus / root,
        a_m_minus: 2.0 * pair.gamma_plus / root,
        a_e_plus: -conj_coupling / root,
        a_e_minus: conj_coupling / root,
    })
}

/// Two-branch superposition Σ± A± e^{−iγ± t}.
pub fn superposition(
    params: &ModelParams,
    xi: f64,
    t: f64,
    coeffs: &BranchCoefficients,
) -> (Complex64, Complex64) {
    let pair = gamma_pm(params, xi);
    let ep = (-Complex64::i() * pair.gamma_plus * t).exp();
    let em = (-Complex64::i() * pair.gamma_minus * t).exp();
    (
        coeffs.a_m_plus * ep + coeffs.a_m_minus * em,
        coeffs.a_e_plus * ep + coeffs.a_e_minus * em,
    )
}

/// Damped entire functions of s²: returns (e^{−Γt/4} cos(st), e^{−Γt/4} sin(st)/s).
fn damped_propagators(q: f64, gamma: f64, t: f64) -> (f64, f64) {
    let s2 = 0.25 * (q - 0.25 * gamma * gamma);
    let x2 = s2 * t * t;
    if x2.abs() < SERIES_SWITCH * SERIES_SWITCH {
        let decay = (-0.25 * gamma * t).exp();
        let cos = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        return (decay * cos, decay * t * sinc);
    }
    if s2 > 0.0 {
        let s = s2.sqrt();
        let decay = (-0.25 * gamma * t).exp();
        let (sin, cos) = (s * t).sin_cos();
        (decay * cos, decay * sin / s)
    } else {
        // Overdamped: write e^{−Γt/4}cosh(κt) through the slow rate
        // κ − Γ/4 = −(q/4)/(κ + Γ/4), which avoids cancellation.
        let kappa = (-s2).sqrt();
        let slow = (-0.25 * q / (kappa + 0.25 * gamma) * t).exp();
        let fast = (-2.0 * kappa * t).exp();
        let cos = 0.5 * slow * (1.0 + fast);
        let sinc = -0.5 * slow * (-2.0 * kappa * t).exp_m1() / kappa;
        (cos, sinc)
    }
}

/// φ_m(ξ, t) and φ_e(ξ, t) from the uniform initial state.
pub fn wavefunctions(params: &ModelParams, xi: f64, t: f64) -> (Complex64, Complex64) {
    let q = params.coupling_sq(xi);
    let (cos, sinc) = damped_propagators(q, params.gamma, t);
    let phi_m = Complex64::new(cos + 0.25 * params.gamma * sinc, 0.0);
    let coupling_conj = (params.omega() * xi.cos()).conj();
    let phi_e = Complex64::i() * coupling_conj * (0.5 * sinc);
    (phi_m, phi_e)
}

/// Raw probabilities (|φ_m|², |φ_e|²).
pub fn probabilities(params: &ModelParams, xi: f64, t: f64) -> (f64, f64) {
    let (m, e) = wavefunctions(params, xi, t);
    (m.norm_sqr(), e.norm_sqr())
}

/// Probability densities per unit ξ, (1/π)|φ|².
pub fn density(params: &ModelParams, xi: f64, t: f64) -> (f64, f64) {
    let (m, e) = probabilities(params, xi, t);
    (m / PI, e / PI)
}

/// Total populations W_tot = (1/π)∫₀^π |φ|² dξ.
///
/// The integrand is symmetric about the node, so only [0, π/2] is
/// integrated. Tolerances in `quad` apply to the returned totals.
pub fn total_populations(params: &ModelParams, t: f64, quad: &QuadSpec) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((1.0, 0.0));
    }
    // The integral over the half period is scaled by 2/π afterwards.
    let half_spec = QuadSpec {
        abs_tol: quad.abs_tol * FRAC_PI_2,
        ..*quad
    };
    let v = integrate(
        |xi, out: &mut [f64]| {
            let (m, e) = probabilities(params, xi, t);
            out[0] = m;
            out[1] = e;
        },
        2,
        0.0,
        FRAC_PI_2,
        &half_spec,
    )?;
    Ok((v[0] / FRAC_PI_2, v[1] / FRAC_PI_2))
}

/// Long-time Gaussian approximation of the densities around the node,
/// ((1/π) e^{−A y²}, (1/π)(|Ω|²/Γ²) y² e^{−A y²}) with y = ξ − π/2 and
/// A = |Ω|² t/Γ.
pub fn gaussian_density(params: &ModelParams, xi: f64, t: f64) -> (f64, f64) {
    let y = xi - FRAC_PI_2;
    let r2 = params.rabi * params.rabi;
    let envelope = (-r2 * t / params.gamma * y * y).exp();
    let e = r2 / (params.gamma * params.gamma) * y * y * envelope;
    (envelope / PI, e / PI)
}

/// Location offset kΔx and height e⁻¹/(Γt) of the excited-state peak of the
/// Gaussian approximation (raw |φ_e|², not divided by π).
pub fn gaussian_excited_peak(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let offset = crate::quasienergy::delta_x(params, t)?;
    Ok((offset, (-1.0f64).exp() / (params.gamma * t)))
}

/// Long-time power laws (W_m, W_e) = (Γ^{1/2}/(|Ω|√(πt)), 1/(2|Ω|√(πΓ) t^{3/2})).
pub fn asymptotic_totals(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "asymptotic totals need t > 0, got {t}"
        )));
    }
    let r = params.rabi;
    let g = params.gamma;
    let w_m = g.sqrt() / (r * (PI * t).sqrt());
    let w_e = 1.0 / (2.0 * r * (PI * g).sqrt() * t.powf(1.5));
    Ok((w_m, w_e))
}

/// Populations of a two-level atom driven at the full standing-wave
/// amplitude, i.e. the antinode dynamics.
pub fn two_level_reference(params: &ModelParams, t: f64) -> (f64, f64) {
    probabilities(params, 0.0, t)
}

/// Complex wavefunction snapshot on a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    pub grid: SpatialGrid,
    pub t: f64,
    pub phi_m: Vec<Complex64>,
    pub phi_e: Vec<Complex64>,
}

pub const FIELD_CSV_HEADER: &str = "xi,re_m,im_m,re_e,im_e";

impl FieldProfile {
    pub fn new(params: &ModelParams, grid: &SpatialGrid, t: f64) -> Self {
        let (phi_m, phi_e) = grid
            .points()
            .iter()
            .map(|&xi| wavefunctions(params, xi, t))
            .unzip();
        FieldProfile {
            grid: grid.clone(),
            t,
            phi_m,
            phi_e,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{FIELD_CSV_HEADER}\n");
        for (j, &xi) in self.grid.points().iter().enumerate() {
            let (m, e) = (self.phi_m[j], self.phi_e[j]);
            let cells = [xi, m.re, m.im, e.re, e.im].map(fmt_f64);
            let _ = writeln!(out, "{}", csv_line(cells));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Quadrature,
    ModeSum,
    Ladder,
    Asymptotic,
    Gaussian,
    TwoLevel,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ModeSum => "mode_sum",
            Method::Ladder => "ladder",
            Method::Asymptotic => "asymptotic",
            Method::Gaussian => "gaussian",
            Method::TwoLevel => "two_level",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Method> {
        [
            Method::Quadrature,
            Method::ModeSum,
            Method::Ladder,
            Method::Asymptotic,
            Method::Gaussian,
            Method::TwoLevel,
        ]
        .into_iter()
        .find(|m| m.tag() == tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Metastable,
    Excited,
}

impl Channel {
    pub fn tag(&self) -> &'static str {
        match self {
            Channel::Metastable => "m",
            Channel::Excited => "e",
        }
    }
}

/// Total populations sampled over time by one method.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSeries {
    pub times: TimeGrid,
    pub w_m: Vec<f64>,
    pub w_e: Vec<f64>,
    pub method: Method,
}

pub const SERIES_CSV_HEADER: &str = "t,w_m,w_e,method";

impl PopulationSeries {
    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::Metastable => &self.w_m,
            Channel::Excited => &self.w_e,
        }
    }

    /// CSV body rows (no header).
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (j, &t) in self.times.points().iter().enumerate() {
            let _ = writeln!(
                out,
                "{}",
                csv_line([
                    fmt_f64(t),
                    fmt_f64(self.w_m[j]),
                    fmt_f64(self.w_e[j]),
                    self.method.tag().to_string(),
                ])
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{SERIES_CSV_HEADER}\n{}", self.csv_rows())
    }

    /// Parses rows written by [`PopulationSeries::to_csv`] (any subset of methods).
    pub fn parse_csv(text: &str) -> Result<Vec<PopulationSeries>> {
        let bad = |msg: String| Error::InvalidParameter(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == SERIES_CSV_HEADER => {}
            other => return Err(bad(format!("unexpected series header {other:?}"))),
        }
        let mut grouped: Vec<(Method, Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::new();
        for line in lines {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(bad(format!("expected 4 columns in {line:?}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            let method =
                Method::from_tag(cols[3]).ok_or_else(|| bad(format!("unknown method {}", cols[3])))?;
            let idx = match grouped.iter().position(|g| g.0 == method) {
                Some(i) => i,
                None => {
                    grouped.push((method, Vec::new(), Vec::new(), Vec::new()));
                    grouped.len() - 1
                }
            };
            let g = &mut grouped[idx];
            g.1.push(num(cols[0])?);
            g.2.push(num(cols[1])?);
            g.3.push(num(cols[2])?);
        }
        grouped
            .into_iter()
            .map(|(method, t, w_m, w_e)| {
                Ok(PopulationSeries {
                    times: TimeGrid::new(t)?,
                    w_m,
                    w_e,
                    method,
                })
            })
            .collect()
    }
}

/// Quadrature totals at every time of `times`, evaluated in parallel.
pub fn quadrature_series(
    params: &ModelParams,
    times: &TimeGrid,
    quad: &QuadSpec,
) -> Result<PopulationSeries> {
    let values: Result<Vec<(f64, f64)>> = times
        .points()
        .par_iter()
        .map(|&t| total_populations(params, t, quad))
        .collect();
    let (w_m, w_e) = values?.into_iter().unzip();
    Ok(PopulationSeries {
        times: times.clone(),
        w_m,
        w_e,
        method: Method::Quadrature,
    })
}

/// Closed-form asymptotic totals; every time must be positive.
pub fn asymptotic_series(params: &ModelParams, times: &TimeGrid) -> Result<PopulationSeries> {
    let values: Result<Vec<(f64, f64)>> = times
        .points()
        .iter()
        .map(|&t| asymptotic_totals(params, t))
        .collect();
    let (w_m, w_e) = values?.into_iter().unzip();
    Ok(PopulationSeries {
        times: times.clone(),
        w_m,
        w_e,
        method: Method::Asymptotic,
    })
}

pub fn two_level_series(params: &ModelParams, times: &TimeGrid) -> PopulationSeries {
    let (w_m, w_e) = times
        .points()
        .iter()
        .map(|&t| two_level_reference(params, t))
        .unzip();
    PopulationSeries {
        times: times.clone(),
        w_m,
        w_e,
        method: Method::TwoLevel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng as Rng64;
    use rand::{Rng, SeedableRng};

    fn p(rabi: f64, gamma: f64) -> ModelParams {
        ModelParams::new(rabi, gamma).unwrap()
    }

    #[test]
    fn node_coefficients() {
        let c = coefficients(&p(5.0, 1.0), FRAC_PI_2, DEFAULT_BRANCH_EPS).unwrap();
        assert!((c.a_m_plus - 1.0).norm() < 1e-15);
        assert!(c.a_m_minus.norm() < 1e-15);
        assert!(c.a_e_plus.norm() < 1e-15 && c.a_e_minus.norm() < 1e-15);
    }

    #[test]
    fn undamped_coefficients_split_evenly() {
        let params = p(2.0, 0.0).with_phase(0.7).unwrap();
        let xi = 0.4;
        let c = coefficients(&params, xi, DEFAULT_BRANCH_EPS).unwrap();
        assert!((c.a_m_plus - 0.5).norm() < 1e-15);
        assert!((c.a_m_minus - 0.5).norm() < 1e-15);
        let coupling = (params.omega() * xi.cos()).conj();
        let expected = -coupling / (2.0 * coupling.norm());
        assert!((c.a_e_plus - expected).norm() < 1e-15);
        assert!((c.a_e_minus + expected).norm() < 1e-15);
    }

    #[test]
    fn coefficient_sum_rules_and_reconstruction() {
        let params = p(5.0, 1.0);
        let c = coefficients(&params, 0.0, DEFAULT_BRANCH_EPS).unwrap();
        assert!((c.a_m_plus + c.a_m_minus - 1.0).norm() < 1e-10);
        assert!((c.a_e_plus + c.a_e_minus).norm() < 1e-10);
        let (m, e) = superposition(&params, 0.0, 0.0, &c);
        assert!((m - 1.0).norm() < 1e-14 && e.norm() < 1e-14);
    }

    #[test]
    fn degenerate_branch_is_refused() {
        let params = p(0.5, 1.0);
        assert!(matches!(
            coefficients(&params, 0.0, DEFAULT_BRANCH_EPS),
            Err(Error::BranchDegenerate { .. })
        ));
    }

    #[test]
    fn initial_state() {
        let params = p(4.0, 1.0).with_phase(1.1).unwrap();
        for j in 0..=20 {
            let (m, e) = wavefunctions(&params, PI * j as f64 / 20.0, 0.0);
            assert_eq!(m, Complex64::new(1.0, 0.0));
            assert_eq!(e.norm(), 0.0);
        }
    }

    #[test]
    fn undamped_rabi_limit() {
        let params = p(3.0, 0.0);
        for &(xi, t) in &[(0.3, 1.7), (1.2, 9.0), (0.0, 0.5)] {
            let (m, e) = probabilities(&params, xi, t);
            let phase = 3.0 * f64::cos(xi) * t / 2.0;
            assert!((m - phase.cos().powi(2)).abs() < 1e-14);
            assert!((e - phase.sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn branch_point_double_root() {
        let params = p(0.5, 1.0);
        for &t in &[0.0, 0.3, 2.0, 10.0, 80.0] {
            let (m, e) = wavefunctions(&params, 0.0, t);
            let decay = (-t / 4.0f64).exp();
            assert!((m.re - (1.0 + t / 4.0) * decay).abs() < 1e-15);
            assert!((e.norm() - t / 4.0 * decay).abs() < 1e-15);
        }
    }

    #[test]
    fn series_switch_is_continuous() {
        // Choose ξ so that |s t| straddles the 1e-3 switch at t = 1.
        let params = p(2.0, 1.0);
        let c_at = |st: f64| {
            let q = 4.0 * st * st + 0.25;
            (q.sqrt() / 2.0).acos()
        };
        let below = wavefunctions(&params, c_at(0.999e-3), 1.0);
        let above = wavefunctions(&params, c_at(1.001e-3), 1.0);
        assert!((below.0 - above.0).norm() < 1e-8);
        assert!((below.1 - above.1).norm() < 1e-8);
    }

    #[test]
    fn superposition_matches_regular_form() {
        let mut rng = Rng64::seed_from_u64(7);
        for _ in 0..500 {
            let params = p(rng.gen_range(0.0..8.0), rng.gen_range(0.1..2.0))
                .with_phase(rng.gen_range(-3.0..3.0))
                .unwrap();
            let xi = rng.gen_range(0.0..PI);
            let t = rng.gen_range(0.0..15.0);
            let Ok(c) = coefficients(&params, xi, 1e-3) else {
                continue;
            };
            let (m1, e1) = superposition(&params, xi, t, &c);
            let (m2, e2) = wavefunctions(&params, xi, t);
            assert!((m1 - m2).norm() < 1e-10, "xi {xi} t {t}: {m1} vs {m2}");
            assert!((e1 - e2).norm() < 1e-10, "xi {xi} t {t}: {e1} vs {e2}");
        }
    }

    #[test]
    fn node_never_moves() {
        let params = p(5.0, 1.0);
        for &t in &[0.0, 1.0, 17.0, 400.0] {
            let (m, e) = wavefunctions(&params, FRAC_PI_2, t);
            assert!((m.re - 1.0).abs() < 1e-15 && m.im == 0.0);
            assert!(e.norm() < 1e-15);
        }
    }

    #[test]
    fn pointwise_dissipation() {
        // d/dt(|φ_m|² + |φ_e|²) = −Γ|φ_e|², checked with central differences.
        let mut rng = Rng64::seed_from_u64(11);
        let params = p(5.0, 1.0);
        let h = 1e-5;
        for _ in 0..200 {
            let xi = rng.gen_range(0.0..PI);
            let t = rng.gen_range(0.1..10.0);
            let norm = |t: f64| {
                let (m, e) = probabilities(&params, xi, t);
                m + e
            };
            let numeric = (norm(t + h) - norm(t - h)) / (2.0 * h);
            let analytic = -params.gamma * probabilities(&params, xi, t).1;
            assert!(
                (numeric - analytic).abs() <= 1e-6 * analytic.abs().max(1e-3),
                "xi {xi} t {t}: {numeric} vs {analytic}"
            );
        }
    }

    #[test]
    fn weak_local_coupling_matches_exponential() {
        // q = |Ω cos ξ|² ≪ Γ² = 1: expanding the slow root gives
        // |φ_m|² ≈ (1 + 2q + 7q²) exp(−(q + q² + 2q³) t).
        let params = p(5.0, 1.0);
        let t = 50.0;
        for j in 1..=20 {
            let xi = FRAC_PI_2 - 0.001 * j as f64;
            let (m, _) = probabilities(&params, xi, t);
            let q = 25.0 * xi.cos().powi(2);
            let approx = (1.0 + 2.0 * q + 7.0 * q * q) * (-(q + q * q + 2.0 * q.powi(3)) * t).exp();
            assert!((m - approx).abs() < 50.0 * q.powi(3), "xi {xi}: {m} vs {approx}");
        }
    }

    #[test]
    fn densities() {
        let params = p(3.0, 1.0);
        let (m, e) = density(&params, 0.7, 0.0);
        assert!((m - 1.0 / PI).abs() < 1e-16 && e == 0.0);
        let (m, e) = density(&params, FRAC_PI_2, 3.0);
        assert!((m - 1.0 / PI).abs() < 1e-15 && e < 1e-30);
    }

    #[test]
    fn totals_at_zero_and_unitary() {
        let spec = QuadSpec::default();
        assert_eq!(total_populations(&p(5.0, 1.0), 0.0, &spec).unwrap(), (1.0, 0.0));
        let params = p(2.0, 0.0);
        for j in 1..=4 {
            let t = 2.0 * PI * j as f64 / 2.0;
            let (m, e) = total_populations(&params, t, &spec).unwrap();
            assert!((m + e - 1.0).abs() < 1e-12);
            // Dense midpoint-rule oracle.
            let n = 200_000;
            let riemann: f64 = (0..n)
                .map(|k| {
                    let xi = PI * (k as f64 + 0.5) / n as f64;
                    (2.0 * xi.cos() * t / 2.0).cos().powi(2)
                })
                .sum::<f64>()
                / n as f64;
            assert!((m - riemann).abs() < 1e-8, "t {t}: {m} vs {riemann}");
        }
    }

    #[test]
    fn long_time_total_near_asymptote() {
        let params = p(5.0, 1.0);
        let t = 50.0;
        let (m, _) = total_populations(&params, t, &QuadSpec::with_abs_tol(1e-12)).unwrap();
        let n = 1_000_000;
        let riemann = (0..n)
            .map(|k| {
                let xi = PI * (k as f64 + 0.5) / n as f64;
                probabilities(&params, xi, t).0
            })
            .sum::<f64>()
            / n as f64;
        assert!((m - riemann).abs() < 1e-9);
        let (m_as, _) = asymptotic_totals(&params, t).unwrap();
        assert!((m_as - 0.01596).abs() < 1e-5);
        assert!(((m - m_as) / m_as).abs() < 0.1);
    }

    #[test]
    fn asymptotic_values() {
        let params = p(5.0, 1.0);
        let (m, e) = asymptotic_totals(&params, 100.0).unwrap();
        assert!((m - 0.011_284).abs() < 1e-6);
        assert!((e - 5.6419e-5).abs() < 1e-9);
        assert!((e / m - 1.0 / 200.0).abs() < 1e-15);
        assert!(asymptotic_totals(&params, 0.0).is_err());
    }

    #[test]
    fn gaussian_peak_height() {
        let params = p(3.0, 1.0);
        let t = 2.0;
        let (offset, height) = gaussian_excited_peak(&params, t).unwrap();
        assert!((offset - 1.0 / (3.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((height - 0.183_939_720_585_721_2).abs() < 1e-15);
        let (_, at_peak) = gaussian_density(&params, FRAC_PI_2 + offset, t);
        assert!((PI * at_peak - height).abs() < 1e-15);
        let (m, e) = gaussian_density(&params, FRAC_PI_2, t);
        assert!((m - 1.0 / PI).abs() < 1e-16 && e == 0.0);
    }

    #[test]
    fn gaussian_approaches_exact_near_node() {
        let params = p(5.0, 1.0);
        let t = 20.0;
        let dx = crate::quasienergy::delta_x(&params, t).unwrap();
        for j in -200..=200 {
            let xi = FRAC_PI_2 + 2.0 * dx * j as f64 / 200.0;
            let exact = density(&params, xi, t);
            let approx = gaussian_density(&params, xi, t);
            assert!((exact.0 - approx.0).abs() <= 0.05 / PI);
            assert!((exact.1 - approx.1).abs() <= 0.05 / PI);
        }
    }

    #[test]
    fn reference_oscillation() {
        let undamped = p(5.0, 0.0);
        for &t in &[0.0, 0.4, 1.3] {
            let (m, _) = two_level_reference(&undamped, t);
            assert!((m - (2.5 * t).cos().powi(2)).abs() < 1e-14);
        }
        assert_eq!(two_level_reference(&p(5.0, 1.0), 0.0), (1.0, 0.0));
    }

    #[test]
    fn series_csv_round_trip() {
        let params = p(5.0, 1.0);
        let times = TimeGrid::uniform(0.0, 2.0, 5).unwrap();
        let series = quadrature_series(&params, &times, &QuadSpec::default()).unwrap();
        let reference = two_level_series(&params, &times);
        let text = format!("{}{}", series.to_csv(), reference.csv_rows());
        let parsed = PopulationSeries::parse_csv(&text).unwrap();
        assert_eq!(parsed, vec![series, reference]);
    }

    #[test]
    fn parallel_series_is_bitwise_sequential() {
        let params = p(5.0, 1.0);
        let times = TimeGrid::uniform(0.0, 6.0, 25).unwrap();
        let spec = QuadSpec::default();
        let series = quadrature_series(&params, &times, &spec).unwrap();
        for (j, &t) in times.points().iter().enumerate() {
            let (m, e) = total_populations(&params, t, &spec).unwrap();
            assert_eq!(m.to_bits(), series.w_m[j].to_bits());
            assert_eq!(e.to_bits(), series.w_e[j].to_bits());
        }
    }
}
