//! Dimensionless model parameters, grids and regime diagnostics.
//!
//! Rates are measured in units of the excited-level width (Γ = 1 by
//! default), times in 1/Γ and positions as ξ = kx. One period of the
//! standing-wave intensity is ξ ∈ [0, π]; the node sits at ξ = π/2.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default factor used to operationalize "much larger than".
pub const DEFAULT_MARGIN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// |Ω|, the Rabi frequency magnitude.
    pub rabi: f64,
    /// arg(Ω) in radians.
    pub rabi_phase: f64,
    /// Γ, width of the excited level.
    pub gamma: f64,
    /// ω_r = k²/2m.
    pub recoil: f64,
    /// δ = k·p₀ₓ/m.
    pub detuning: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            rabi: 1.0,
            rabi_phase: 0.0,
            gamma: 1.0,
            recoil: 0.0,
            detuning: 0.0,
        }
    }
}

impl ModelParams {
    /// Resonant, normal-incidence parameters without recoil.
    pub fn new(rabi: f64, gamma: f64) -> Result<Self> {
        let params = ModelParams {
            rabi,
            gamma,
            ..Default::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_recoil(mut self, recoil: f64) -> Result<Self> {
        self.recoil = recoil;
        self.validate()?;
        Ok(self)
    }

    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        self.detuning = detuning;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phase(mut self, rabi_phase: f64) -> Result<Self> {
        self.rabi_phase = rabi_phase;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.rabi, self.rabi_phase, self.gamma, self.recoil, self.detuning]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.rabi < 0.0 {
            return Err(Error::InvalidParameter(format!("rabi = {} < 0", self.rabi)));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma = {} < 0", self.gamma)));
        }
        if self.recoil < 0.0 {
            return Err(Error::InvalidParameter(format!("recoil = {} < 0", self.recoil)));
        }
        Ok(())
    }

    /// Complex Rabi frequency Ω = |Ω| e^{i arg Ω}.
    pub fn omega(&self) -> Complex64 {
        Complex64::from_polar(self.rabi, self.rabi_phase)
    }

    /// |Ω|² cos² ξ, the squared local coupling.
    pub(crate) fn coupling_sq(&self, xi: f64) -> f64 {
        let c = self.rabi * xi.cos();
        c * c
    }
}

/// Uniform grid over one period ξ ∈ [0, π], both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    xi: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidParameter(format!(
                "spatial grid needs at least 3 points, got {count}"
            )));
        }
        let step = PI / (count - 1) as f64;
        let xi = (0..count).map(|j| j as f64 * step).collect();
        Ok(SpatialGrid { xi })
    }

    pub fn points(&self) -> &[f64] {
        &self.xi
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Strictly increasing, non-negative sample times Γt.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidParameter("time grid is empty".into()));
        }
        if !t.iter().all(|v| v.is_finite()) || t[0] < 0.0 {
            return Err(Error::InvalidParameter("times must be finite and >= 0".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        Ok(TimeGrid { t })
    }

    /// `count` evenly spaced times from `start` to `end` inclusive.
    pub fn uniform(start: f64, end: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::InvalidParameter("time grid is empty".into())),
            1 => TimeGrid::new(vec![start]),
            _ => {
                let step = (end - start) / (count - 1) as f64;
                let mut t: Vec<f64> = (0..count).map(|j| start + j as f64 * step).collect();
                t[count - 1] = end;
                TimeGrid::new(t)
            }
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.t[self.t.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeFlags {
    pub narrow_zone: bool,
    /// `None` when the recoil frequency is zero and the bound is infinite.
    pub adiabaticity: Option<bool>,
    pub strong_coupling: bool,
    pub transverse_drift: bool,
}

/// Dimensionless ratios behind the asymptotic validity conditions.
///
/// Every ratio is "good" when large for `narrow_zone_ratio` and
/// `strong_coupling_ratio`, and "good" when small for the other two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// |Ω|² t / Γ.
    pub narrow_zone_ratio: f64,
    /// |Ω| t / sqrt(Γ/ω_r); zero when ω_r = 0.
    pub adiabaticity_ratio: f64,
    /// |Ω| / Γ.
    pub strong_coupling_ratio: f64,
    /// k|v₀ₓ| t · |Ω| sqrt(t/Γ).
    pub transverse_drift_ratio: f64,
    pub margin: f64,
    pub flags: RegimeFlags,
}

/// Evaluates the narrow-zone, adiabaticity, strong-coupling and
/// transverse-drift conditions at interaction time `t`.
///
/// `v0x` is the transverse velocity in units of Γ/k. The margin is the
/// factor standing in for "≫"; it must exceed one.
pub fn validate_regime(params: &ModelParams, t: f64, v0x: f64, margin: f64) -> RegimeReport {
    let rabi = params.rabi;
    let gamma = params.gamma;

    let narrow_zone_ratio = rabi * rabi * t / gamma;
    let adiabaticity_ratio = if params.recoil > 0.0 {
        rabi * t / (gamma / params.recoil).sqrt()
    } else {
        0.0
    };
    let strong_coupling_ratio = rabi / gamma;
    let transverse_drift_ratio = v0x.abs() * t * rabi * (t / gamma).sqrt();

    let flags = RegimeFlags {
        narrow_zone: narrow_zone_ratio >= margin,
        adiabaticity: (params.recoil > 0.0).then(|| adiabaticity_ratio <= 1.0 / margin),
        strong_coupling: strong_coupling_ratio >= margin,
        transverse_drift: transverse_drift_ratio <= 1.0 / margin,
    };

    RegimeReport {
        narrow_zone_ratio,
        adiabaticity_ratio,
        strong_coupling_ratio,
        transverse_drift_ratio,
        margin,
        flags,
    }
}

/// Earliest time at which |Ω|²t/Γ reaches `ratio`.
pub fn narrow_zone_onset(params: &ModelParams, ratio: f64) -> f64 {
    ratio * params.gamma / (params.rabi * params.rabi)
}
