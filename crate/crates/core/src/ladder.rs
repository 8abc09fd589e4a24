//! Direct integration of the coupled diffraction-amplitude equations
//!
//! i ȧ_n^(m) = (n²ω_r + nδ) a_n^(m) − (Ω/4)(a_{n−1}^(e) + a_{n+1}^(e))
//! i ȧ_n^(e) = (n²ω_r + nδ − iΓ/2) a_n^(e) − (Ω*/4)(a_{n−1}^(m) + a_{n+1}^(m))
//!
//! truncated to |n| ≤ N with zero amplitudes beyond the edge, stepped with
//! the Dormand–Prince 5(4) embedded pair.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::dynamics::{Method, PopulationSeries};
use crate::error::{Error, Result};
use crate::model::{ModelParams, TimeGrid};
use crate::output::{csv_line, fmt_f64};

/// Amplitudes of all retained orders at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderState {
    pub t: f64,
    /// N; orders run over −N..=N.
    pub truncation: usize,
    pub a_m: Vec<Complex64>,
    pub a_e: Vec<Complex64>,
}

impl LadderState {
    /// All population in the metastable zeroth order.
    pub fn initial(truncation: usize) -> Self {
        let len = 2 * truncation + 1;
        let mut a_m = vec![Complex64::new(0.0, 0.0); len];
        a_m[truncation] = Complex64::new(1.0, 0.0);
        LadderState {
            t: 0.0,
            truncation,
            a_m,
            a_e: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn order(&self, index: usize) -> i64 {
        index as i64 - self.truncation as i64
    }

    pub fn index(&self, n: i64) -> Option<usize> {
        let idx = usize::try_from(n + self.truncation as i64).ok()?;
        (idx < self.a_m.len()).then_some(idx)
    }

    pub fn w_m(&self) -> f64 {
        self.a_m.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn w_e(&self) -> f64 {
        self.a_e.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.w_m() + self.w_e()
    }

    /// Population held by the outermost orders ±N.
    pub fn boundary_norm(&self) -> f64 {
        let last = self.a_m.len() - 1;
        [0, last]
            .iter()
            .map(|&i| self.a_m[i].norm_sqr() + self.a_e[i].norm_sqr())
            .sum()
    }

    /// max_n |W_n − W_{−n}| over both channels.
    pub fn mirror_asymmetry(&self) -> f64 {
        let len = self.a_m.len();
        (0..self.truncation)
            .map(|i| {
                let j = len - 1 - i;
                let dm = (self.a_m[i].norm_sqr() - self.a_m[j].norm_sqr()).abs();
                let de = (self.a_e[i].norm_sqr() - self.a_e[j].norm_sqr()).abs();
                dm.max(de)
            })
            .fold(0.0, f64::max)
    }

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for i in 0..self.a_m.len() {
            for (channel, a) in [("m", self.a_m[i]), ("e", self.a_e[i])] {
                let cells = [
                    fmt_f64(self.t),
                    self.order(i).to_string(),
                    channel.to_string(),
                    fmt_f64(a.re),
                    fmt_f64(a.im),
                ];
                let _ = writeln!(out, "{}", csv_line(cells));
            }
        }
        out
    }
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,n,channel,re,im";
pub const SUMMARY_CSV_HEADER: &str = "t,w_m,w_e,boundary_norm";

/// Time derivative of the amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderDerivative {
    pub da_m: Vec<Complex64>,
    pub da_e: Vec<Complex64>,
}

/// Exact right-hand side with absorbing (zero) values beyond ±N.
pub fn rhs_full(params: &ModelParams, state: &LadderState) -> LadderDerivative {
    let len = state.a_m.len();
    let mut y = Vec::with_capacity(2 * len + 1);
    y.extend_from_slice(&state.a_m);
    y.extend_from_slice(&state.a_e);
    y.push(Complex64::new(0.0, 0.0));
    let mut dy = vec![Complex64::new(0.0, 0.0); y.len()];
    Rhs::new(params, state.truncation).eval(&y, &mut dy);
    LadderDerivative {
        da_m: dy[..len].to_vec(),
        da_e: dy[len..2 * len].to_vec(),
    }
}

// Packed layout: [a_m (2N+1) | a_e (2N+1) | dissipated], where the last
// slot integrates Γ Σ|a_e|² for the norm-balance audit.
struct Rhs {
    len: usize,
    /// n²ω_r + nδ per order.
    shift: Vec<f64>,
    half_gamma: f64,
    gamma: f64,
    quarter_omega: Complex64,
}

impl Rhs {
    fn new(params: &ModelParams, truncation: usize) -> Self {
        let shift = (0..2 * truncation + 1)
            .map(|i| {
                let n = i as f64 - truncation as f64;
                n * n * params.recoil + n * params.detuning
            })
            .collect();
        Rhs {
            len: 2 * truncation + 1,
            shift,
            half_gamma: 0.5 * params.gamma,
            gamma: params.gamma,
            quarter_omega: 0.25 * params.omega(),
        }
    }

    fn eval(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let len = self.len;
        let (m, rest) = y.split_at(len);
        let e = &rest[..len];
        let minus_i = Complex64::new(0.0, -1.0);
        let w = self.quarter_omega;
        let wc = w.conj();
        let zero = Complex64::new(0.0, 0.0);
        let mut loss = 0.0;
        for i in 0..len {
            let e_nb = if i > 0 { e[i - 1] } else { zero } + if i + 1 < len { e[i + 1] } else { zero };
            let m_nb = if i > 0 { m[i - 1] } else { zero } + if i + 1 < len { m[i + 1] } else { zero };
            dy[i] = minus_i * (self.shift[i] * m[i] - w * e_nb);
            dy[len + i] =
                minus_i * (Complex64::new(self.shift[i], -self.half_gamma) * e[i] - wc * m_nb);
            loss += e[i].norm_sqr();
        }
        dy[2 * len] = Complex64::new(self.gamma * loss, 0.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions {
    /// Per-step relative tolerance.
    pub rtol: f64,
    pub atol: f64,
    /// Boundary orders may hold at most 10× this population before the
    /// truncation is widened.
    pub tail_tol: f64,
    /// Initial N; defaults to ⌈|Ω| t_end⌉ + 16.
    pub truncation: Option<usize>,
    pub max_truncation: usize,
    pub max_steps: usize,
}

impl Default for LadderOptions {
    fn default() -> Self {
        LadderOptions {
            rtol: 1e-9,
            atol: 1e-12,
            tail_tol: 1e-12,
            truncation: None,
            max_truncation: 4096,
            max_steps: 5_000_000,
        }
    }
}

pub fn default_truncation(params: &ModelParams, t_end: f64) -> usize {
    (params.rabi * t_end).ceil() as usize + 16
}

/// Result of one ladder integration sampled at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRun {
    pub series: PopulationSeries,
    pub boundary_norm: Vec<f64>,
    /// Γ∫Σ|a_e|² dt accumulated alongside the amplitudes.
    pub dissipated: Vec<f64>,
    pub snapshots: Vec<LadderState>,
    pub steps: usize,
}

impl LadderRun {
    pub fn final_state(&self) -> &LadderState {
        self.snapshots.last().expect("run has at least one sample")
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_CSV_HEADER}\n");
        for (j, &t) in self.series.times.points().iter().enumerate() {
            let cells = [t, self.series.w_m[j], self.series.w_e[j], self.boundary_norm[j]].map(fmt_f64);
            let _ = writeln!(out, "{}", csv_line(cells));
        }
        out
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = format!("{TRAJECTORY_CSV_HEADER}\n");
        for s in &self.snapshots {
            out.push_str(&s.csv_rows());
        }
        out
    }
}

// Dormand–Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper {
    rhs: Rhs,
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    rtol: f64,
    atol: f64,
}

impl Stepper {
    fn new(rhs: Rhs, dim: usize, rtol: f64, atol: f64) -> Self {
        let zeros = || vec![Complex64::new(0.0, 0.0); dim];
        Stepper {
            rhs,
            k: std::array::from_fn(|_| zeros()),
            stage: zeros(),
            y_new: zeros(),
            rtol,
            atol,
        }
    }

    fn combine(&mut self, y: &[Complex64], h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..y.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(s, c) in coeffs {
                acc += self.k[s][i] * c;
            }
            self.stage[i] = y[i] + acc * h;
        }
    }

    /// Attempts one step; on acceptance `y_new` and `k[6]` hold the new
    /// state and its derivative. Returns the scaled error norm.
    fn attempt(&mut self, y: &[Complex64], h: f64) -> f64 {
        self.combine(y, h, &[(0, A21)]);
        self.rhs.eval(&self.stage, &mut self.k[1]);
        self.combine(y, h, &[(0, A31), (1, A32)]);
        self.rhs.eval(&self.stage, &mut self.k[2]);
        self.combine(y, h, &[(0, A41), (1, A42), (2, A43)]);
        self.rhs.eval(&self.stage, &mut self.k[3]);
        self.combine(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        self.rhs.eval(&self.stage, &mut self.k[4]);
        self.combine(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        self.rhs.eval(&self.stage, &mut self.k[5]);
        self.combine(y, h, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
        std::mem::swap(&mut self.stage, &mut self.y_new);
        self.rhs.eval(&self.y_new, &mut self.k[6]);

        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let scale = self.atol + self.rtol * y[i].norm().max(self.y_new[i].norm());
            err = err.max(e.norm() / scale);
        }
        err
    }
}

fn snapshot(y: &[Complex64], truncation: usize, t: f64) -> LadderState {
    let len = 2 * truncation + 1;
    LadderState {
        t,
        truncation,
        a_m: y[..len].to_vec(),
        a_e: y[len..2 * len].to_vec(),
    }
}

enum Attempt {
    Done(LadderRun),
    Leaked(f64),
}

fn run_once(
    params: &ModelParams,
    times: &TimeGrid,
    truncation: usize,
    opts: &LadderOptions,
) -> Result<Attempt> {
    let initial = LadderState::initial(truncation);
    let len = initial.a_m.len();
    let mut y = Vec::with_capacity(2 * len + 1);
    y.extend_from_slice(&initial.a_m);
    y.extend_from_slice(&initial.a_e);
    y.push(Complex64::new(0.0, 0.0));

    let rhs = Rhs::new(params, truncation);
    let n = truncation as f64;
    let fastest = params.rabi + params.gamma + n * n * params.recoil + n * params.detuning.abs() + 1.0;
    let mut h = 0.05 / fastest;
    let mut stepper = Stepper::new(rhs, y.len(), opts.rtol, opts.atol);
    stepper.rhs.eval(&y, &mut stepper.k[0]);

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut dissipated = Vec::with_capacity(times.len());
    let leak_limit = 10.0 * opts.tail_tol;

    for &target in times.points() {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { t });
            }
            let err = stepper.attempt(&y, step);
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeUnderflow { t });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut stepper.y_new);
                stepper.k.swap(0, 6);
                if !last {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
            }
        }
        let state = snapshot(&y, truncation, target);
        let boundary = state.boundary_norm();
        if boundary > leak_limit {
            return Ok(Attempt::Leaked(boundary));
        }
        snapshots.push(state);
        dissipated.push(y[2 * len].re);
    }

    let boundary_norm = snapshots.iter().map(|s| s.boundary_norm()).collect();
    let series = PopulationSeries {
        times: times.clone(),
        w_m: snapshots.iter().map(|s| s.w_m()).collect(),
        w_e: snapshots.iter().map(|s| s.w_e()).collect(),
        method: Method::Ladder,
    };
    Ok(Attempt::Done(LadderRun {
        series,
        boundary_norm,
        dissipated,
        snapshots,
        steps,
    }))
}

/// Integrates from a₀^(m) = 1 and samples the state at every time of `times`.
///
/// The truncation is doubled and the run restarted whenever the boundary
/// orders pick up more than 10·`tail_tol` of population.
pub fn integrate(params: &ModelParams, times: &TimeGrid, opts: &LadderOptions) -> Result<LadderRun> {
    let mut truncation = opts
        .truncation
        .unwrap_or_else(|| default_truncation(params, times.last()))
        .max(1);
    loop {
        match run_once(params, times, truncation, opts)? {
            Attempt::Done(run) => return Ok(run),
            Attempt::Leaked(boundary_norm) => {
                if 2 * truncation > opts.max_truncation {
                    return Err(Error::TruncationExceeded {
                        truncation,
                        boundary_norm,
                    });
                }
                truncation *= 2;
            }
        }
    }
}

/// |W^{full} − W^{adiabatic}| for both channels over time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub times: TimeGrid,
    pub d_m: Vec<f64>,
    pub d_e: Vec<f64>,
}

/// Compares the ladder with recoil against the same ladder with ω_r = 0.
///
/// Detuning is kept in both runs, so the difference isolates the recoil
/// anharmonicity neglected by the adiabatic approximation.
pub fn adiabaticity_probe(
    params: &ModelParams,
    times: &TimeGrid,
    opts: &LadderOptions,
) -> Result<ProbeSeries> {
    let full = integrate(params, times, opts)?;
    let adiabatic_params = ModelParams {
        recoil: 0.0,
        ..*params
    };
    let adiabatic = integrate(&adiabatic_params, times, opts)?;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    Ok(ProbeSeries {
        times: times.clone(),
        d_m: diff(&full.series.w_m, &adiabatic.series.w_m),
        d_e: diff(&full.series.w_e, &adiabatic.series.w_e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffraction::closed_form_partials;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn p(rabi: f64, gamma: f64) -> ModelParams {
        ModelParams::new(rabi, gamma).unwrap()
    }

    fn random_state(rng: &mut StdRng, truncation: usize) -> LadderState {
        let mut s = LadderState::initial(truncation);
        for a in s.a_m.iter_mut().chain(s.a_e.iter_mut()) {
            *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        s
    }

    #[test]
    fn rhs_from_ground_order() {
        let params = p(3.0, 1.0).with_phase(0.4).unwrap();
        let d = rhs_full(&params, &LadderState::initial(4));
        let expected = Complex64::i() * params.omega().conj() / 4.0;
        for (i, v) in d.da_e.iter().enumerate() {
            let n = i as i64 - 4;
            if n.abs() == 1 {
                assert!((v - expected).norm() < 1e-15);
            } else {
                assert_eq!(v.norm(), 0.0);
            }
        }
        assert!(d.da_m.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rhs_norm_flux_identity() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let params = p(rng.gen_range(0.0..6.0), rng.gen_range(0.0..2.0))
                .with_phase(rng.gen_range(-3.0..3.0))
                .unwrap()
                .with_recoil(rng.gen_range(0.0..0.1))
                .unwrap()
                .with_detuning(rng.gen_range(-1.0..1.0))
                .unwrap();
            let s = random_state(&mut rng, 7);
            let d = rhs_full(&params, &s);
            let flux: f64 = s
                .a_m
                .iter()
                .zip(&d.da_m)
                .chain(s.a_e.iter().zip(&d.da_e))
                .map(|(a, da)| 2.0 * (a.conj() * da).re)
                .sum();
            let expected = -params.gamma * s.w_e();
            assert!((flux - expected).abs() < 1e-12 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn uncoupled_phase_rotation() {
        let params = ModelParams {
            rabi: 0.0,
            recoil: 0.03,
            detuning: 0.2,
            ..Default::default()
        };
        let mut s = LadderState::initial(3);
        s.a_m = vec![Complex64::new(1.0, 0.0); 7];
        let d = rhs_full(&params, &s);
        for (i, v) in d.da_m.iter().enumerate() {
            let n = s.order(i) as f64;
            let rate = n * n * 0.03 + n * 0.2;
            assert!((v - Complex64::new(0.0, -rate)).norm() < 1e-15);
        }
    }

    #[test]
    fn no_coupling_stays_put() {
        let params = p(0.0, 1.0);
        let times = TimeGrid::uniform(0.0, 20.0, 11).unwrap();
        let run = integrate(&params, &times, &LadderOptions::default()).unwrap();
        for s in &run.snapshots {
            assert_eq!(s.a_m[s.truncation], Complex64::new(1.0, 0.0));
            assert_eq!(s.norm(), 1.0);
        }
    }

    #[test]
    fn unitary_without_decay() {
        let params = p(4.0, 0.0);
        let times = TimeGrid::uniform(0.0, 10.0, 21).unwrap();
        let run = integrate(&params, &times, &LadderOptions::default()).unwrap();
        for s in &run.snapshots {
            assert!((s.norm() - 1.0).abs() < 1e-9, "t {}: {}", s.t, s.norm());
        }
    }

    #[test]
    fn norm_balance_and_mirror_symmetry() {
        let params = p(5.0, 1.0);
        let times = TimeGrid::uniform(0.0, 6.0, 31).unwrap();
        let run = integrate(&params, &times, &LadderOptions::default()).unwrap();
        let mut previous = f64::INFINITY;
        for (s, lost) in run.snapshots.iter().zip(&run.dissipated) {
            assert!((1.0 - s.norm() - lost).abs() < 1e-6);
            assert!(s.norm() <= previous + 1e-12);
            assert!(s.mirror_asymmetry() < 1e-9);
            previous = s.norm();
        }
    }

    #[test]
    fn matches_closed_forms() {
        let params = p(5.0, 1.0);
        let times = TimeGrid::new(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        let opts = LadderOptions {
            rtol: 1e-11,
            atol: 1e-14,
            ..Default::default()
        };
        let run = integrate(&params, &times, &opts).unwrap();
        for s in &run.snapshots[1..] {
            let orders: Vec<usize> = (0..12).collect();
            let (wm, we) = closed_form_partials(&params, s.t, &orders, 1e-12).unwrap();
            for n in 0..12usize {
                let m = s.a_m[s.index(2 * n as i64).unwrap()].norm_sqr();
                let e = s.a_e[s.index(2 * n as i64 + 1).unwrap()].norm_sqr();
                assert!((m - wm[n]).abs() < 1e-6, "t {} m {n}", s.t);
                assert!((e - we[n]).abs() < 1e-6, "t {} e {n}", s.t);
            }
        }
    }

    #[test]
    fn detuning_breaks_mirror_symmetry() {
        let params = p(5.0, 1.0)
            .with_detuning(0.2)
            .unwrap()
            .with_recoil(0.05)
            .unwrap();
        let times = TimeGrid::uniform(0.0, 4.0, 5).unwrap();
        let run = integrate(&params, &times, &LadderOptions::default()).unwrap();
        assert!(run.final_state().mirror_asymmetry() > 1e-4);
    }

    #[test]
    fn detuning_alone_keeps_mirror_symmetry() {
        // Without recoil a_n ↦ conj(a_{-n}) (with a sign on the excited
        // channel) maps the equations onto themselves, so populations stay
        // symmetric even at δ ≠ 0.
        let params = p(5.0, 1.0).with_detuning(0.2).unwrap();
        let times = TimeGrid::uniform(0.0, 4.0, 5).unwrap();
        let run = integrate(&params, &times, &LadderOptions::default()).unwrap();
        assert!(run.final_state().mirror_asymmetry() < 1e-9);
    }

    #[test]
    fn truncation_widens_on_leak() {
        let params = p(5.0, 1.0);
        let times = TimeGrid::uniform(0.0, 4.0, 3).unwrap();
        let opts = LadderOptions {
            truncation: Some(2),
            ..Default::default()
        };
        let run = integrate(&params, &times, &opts).unwrap();
        assert!(run.final_state().truncation > 2);
        assert!(run.final_state().boundary_norm() <= 10.0 * opts.tail_tol);

        let capped = LadderOptions {
            truncation: Some(2),
            max_truncation: 4,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&params, &times, &capped),
            Err(Error::TruncationExceeded { .. })
        ));
    }

    #[test]
    fn tolerance_convergence() {
        let params = p(5.0, 1.0);
        let times = TimeGrid::new(vec![0.0, 4.0]).unwrap();
        let run_at = |rtol: f64| {
            let opts = LadderOptions {
                rtol,
                atol: rtol * 1e-3,
                ..Default::default()
            };
            integrate(&params, &times, &opts).unwrap()
        };
        let reference = run_at(1e-13);
        let error = |rtol: f64| {
            let s = run_at(rtol);
            let (a, b) = (s.final_state(), reference.final_state());
            a.a_m
                .iter()
                .zip(&b.a_m)
                .chain(a.a_e.iter().zip(&b.a_e))
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        };
        let coarse = error(1e-6);
        let fine = error(1e-8);
        // Error per unit tolerance stays bounded and the error shrinks.
        assert!(fine < coarse / 10.0, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn probe_without_recoil_is_zero() {
        let params = p(5.0, 1.0);
        let times = TimeGrid::uniform(0.0, 2.0, 5).unwrap();
        let probe = adiabaticity_probe(&params, &times, &LadderOptions::default()).unwrap();
        assert!(probe.d_m.iter().chain(&probe.d_e).all(|&d| d == 0.0));
    }

    #[test]
    fn csv_exports() {
        let params = p(1.0, 1.0);
        let times = TimeGrid::uniform(0.0, 1.0, 3).unwrap();
        let opts = LadderOptions {
            truncation: Some(20),
            ..Default::default()
        };
        let run = integrate(&params, &times, &opts).unwrap();
        assert_eq!(run.summary_csv().lines().count(), 4);
        assert!(run.summary_csv().starts_with(SUMMARY_CSV_HEADER));
        assert_eq!(run.trajectory_csv().lines().count(), 1 + 3 * 41 * 2);
    }
}
