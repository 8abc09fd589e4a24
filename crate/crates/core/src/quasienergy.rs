//! Complex quasienergies of the position-dependent two-level Hamiltonian.
//!
//! With the kinetic energy dropped, ξ = kx is a parameter and the
//! Hamiltonian at each point has eigenvalues
//!
//! γ±(ξ) = −iΓ/4 ± ½ sqrt(|Ω|² cos² ξ − Γ²/4)
//!
//! taken with the principal root, so the "+" branch is always the slowly
//! decaying one (Im γ₊ ≥ Im γ₋).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SpatialGrid};
use crate::output::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasienergyPair {
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
}

/// Quasienergies at position `xi`.
pub fn gamma_pm(params: &ModelParams, xi: f64) -> QuasienergyPair {
    let q = params.coupling_sq(xi);
    let g = params.gamma;
    let disc = q - 0.25 * g * g;
    if disc >= 0.0 {
        let root = 0.5 * disc.sqrt();
        QuasienergyPair {
            gamma_plus: Complex64::new(root, -0.25 * g),
            gamma_minus: Complex64::new(-root, -0.25 * g),
        }
    } else {
        // Purely imaginary pair. γ₋ has no cancellation; γ₊ follows from
        // the determinant γ₊γ₋ = −q/4.
        let minus = -(0.25 * g + 0.5 * (-disc).sqrt());
        let plus = 0.25 * q / minus;
        QuasienergyPair {
            gamma_plus: Complex64::new(0.0, plus),
            gamma_minus: Complex64::new(0.0, minus),
        }
    }
}

/// Level widths (Γ₊, Γ₋) = −2 Im γ±. Both lie in [0, Γ] and sum to Γ.
pub fn widths(params: &ModelParams, xi: f64) -> (f64, f64) {
    let pair = gamma_pm(params, xi);
    (-2.0 * pair.gamma_plus.im, -2.0 * pair.gamma_minus.im)
}

/// Weak-coupling complex potential −i|Ω|² cos² ξ / 2Γ.
pub fn cy_potential(params: &ModelParams, xi: f64) -> Complex64 {
    Complex64::new(0.0, -0.5 * params.coupling_sq(xi) / params.gamma)
}

/// Narrow width near the node, (|Ω|²/Γ)(ξ − π/2)².
pub fn width_parabolic(params: &ModelParams, xi: f64) -> f64 {
    let d = xi - FRAC_PI_2;
    params.rabi * params.rabi / params.gamma * d * d
}

/// Effective local Rabi frequency |Ω cos ξ|.
pub fn omega_eff(params: &ModelParams, xi: f64) -> f64 {
    (params.rabi * xi.cos()).abs()
}

/// Width kΔx = sqrt(Γ/t)/|Ω| of the slowly decaying region around the node.
pub fn delta_x(params: &ModelParams, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("delta_x needs t > 0, got {t}")));
    }
    Ok((params.gamma / t).sqrt() / params.rabi)
}

/// Positions in [0, π] where 2|Ω cos ξ| = Γ and the two branches meet.
pub fn branch_points(params: &ModelParams) -> Vec<f64> {
    if params.rabi == 0.0 {
        return Vec::new();
    }
    let c = params.gamma / (2.0 * params.rabi);
    if c > 1.0 {
        return Vec::new();
    }
    let xi = c.acos();
    if (xi - (PI - xi)).abs() < f64::EPSILON {
        vec![xi]
    } else {
        vec![xi, PI - xi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneRow {
    pub xi: f64,
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    pub width_plus: f64,
    pub width_minus: f64,
}

impl ZoneRow {
    pub fn upper_plus(&self) -> f64 {
        self.gamma_plus.re + 0.5 * self.width_plus
    }

    pub fn lower_plus(&self) -> f64 {
        self.gamma_plus.re - 0.5 * self.width_plus
    }

    pub fn upper_minus(&self) -> f64 {
        self.gamma_minus.re + 0.5 * self.width_minus
    }

    pub fn lower_minus(&self) -> f64 {
        self.gamma_minus.re - 0.5 * self.width_minus
    }
}

/// Broadened quasienergy zones sampled over a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneTable {
    pub rows: Vec<ZoneRow>,
}

pub const ZONE_CSV_HEADER: &str =
    "xi,re_gp,im_gp,re_gm,im_gm,width_p,width_m,upper_p,lower_p,upper_m,lower_m";

impl ZoneTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ZONE_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let cols = [
                row.xi,
                row.gamma_plus.re,
                row.gamma_plus.im,
                row.gamma_minus.re,
                row.gamma_minus.im,
                row.width_plus,
                row.width_minus,
                row.upper_plus(),
                row.lower_plus(),
                row.upper_minus(),
                row.lower_minus(),
            ];
            let line: Vec<String> = cols.iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

pub fn zone_table(params: &ModelParams, grid: &SpatialGrid) -> ZoneTable {
    let rows = grid
        .points()
        .iter()
        .map(|&xi| {
            let pair = gamma_pm(params, xi);
            ZoneRow {
                xi,
                gamma_plus: pair.gamma_plus,
                gamma_minus: pair.gamma_minus,
                width_plus: -2.0 * pair.gamma_plus.im,
                width_minus: -2.0 * pair.gamma_minus.im,
            }
        })
        .collect();
    ZoneTable { rows }
}
