//! Globally adaptive Gauss–Kronrod (7, 15) quadrature for vector-valued
//! integrands.
//!
//! All components share the same panels, so complementary integrands
//! (e.g. the two channel densities) are integrated on identical nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to an initial panel.
    pub max_depth: u32,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_depth: 20,
            initial_panels: 8,
            max_panels: 50_000,
        }
    }
}

impl QuadSpec {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        QuadSpec {
            abs_tol,
            ..Default::default()
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F>(f: &F, dim: usize, a: f64, b: f64, depth: u32, buf: &mut [f64]) -> Panel
where
    F: Fn(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, buf);
    for c in 0..dim {
        kronrod[c] = WGK[7] * buf[c];
        gauss[c] = WG[3] * buf[c];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        for x in [center - dx, center + dx] {
            f(x, buf);
            for c in 0..dim {
                kronrod[c] += WGK[j] * buf[c];
                if j % 2 == 1 {
                    gauss[c] += WG[j / 2] * buf[c];
                }
            }
        }
    }

    let mut error = 0.0f64;
    for c in 0..dim {
        kronrod[c] *= half;
        gauss[c] *= half;
        error = error.max((kronrod[c] - gauss[c]).abs());
    }
    Panel {
        a,
        b,
        depth,
        value: kronrod,
        error,
    }
}

/// Integrates a `dim`-component function over [a, b].
///
/// The closure writes the integrand values at `x` into its slice argument.
/// Refinement stops once the summed panel error estimate drops below
/// `max(abs_tol, rel_tol · max_c |I_c|)`.
pub fn integrate<F>(f: F, dim: usize, a: f64, b: f64, spec: &QuadSpec) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]),
{
    if a == b {
        return Ok(vec![0.0; dim]);
    }
    let mut buf = vec![0.0; dim];
    let n0 = spec.initial_panels.max(1);
    let width = (b - a) / n0 as f64;

    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    for j in 0..n0 {
        let lo = a + j as f64 * width;
        let hi = if j + 1 == n0 { b } else { lo + width };
        heap.push(gauss_kronrod(&f, dim, lo, hi, 0, &mut buf));
    }

    loop {
        let (total, error) = summarize(heap.iter().chain(frozen.iter()), dim);
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tolerance = spec.abs_tol.max(spec.rel_tol * scale);
        if error <= tolerance {
            return Ok(ordered_total(heap.into_iter().chain(frozen), dim));
        }

        let worst = loop {
            match heap.pop() {
                Some(p) if p.depth >= spec.max_depth => frozen.push(p),
                other => break other,
            }
        };
        let Some(worst) = worst else {
            return Err(Error::QuadratureNotConverged {
                estimate: error,
                tolerance,
            });
        };
        if heap.len() + frozen.len() + 2 > spec.max_panels {
            return Err(Error::QuadratureNotConverged {
                estimate: error,
                tolerance,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(gauss_kronrod(&f, dim, worst.a, mid, worst.depth + 1, &mut buf));
        heap.push(gauss_kronrod(&f, dim, mid, worst.b, worst.depth + 1, &mut buf));
    }
}

fn summarize<'a, I: Iterator<Item = &'a Panel>>(panels: I, dim: usize) -> (Vec<f64>, f64) {
    let mut total = vec![0.0; dim];
    let mut error = 0.0;
    for p in panels {
        for c in 0..dim {
            total[c] += p.value[c];
        }
        error += p.error;
    }
    (total, error)
}

// Sum panels left to right so the result does not depend on heap order.
fn ordered_total<I: Iterator<Item = Panel>>(panels: I, dim: usize) -> Vec<f64> {
    let mut panels: Vec<Panel> = panels.collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = vec![0.0; dim];
    for p in &panels {
        for c in 0..dim {
            total[c] += p.value[c];
        }
    }
    total
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x, out: &mut [f64]| out[0] = f(x), 1, a, b, spec).map(|v| v[0])
}
