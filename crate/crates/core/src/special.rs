//! Bessel functions J_n and modified Bessel functions I_0, I_1.
//!
//! J_n is evaluated for a whole range of orders at once by Miller's
//! downward recurrence normalized with J₀ + 2ΣJ₂ₖ = 1; small arguments
//! use the ascending series. I₀ and I₁ are kept in exponentially scaled
//! form e^{-x}I(x) so they can be combined with decaying prefactors
//! without overflow.

/// Arguments up to this value use the ascending series for J_n.
const J_SERIES_LIMIT: f64 = 2.0;
/// Arguments up to this value use the ascending series for I_0, I_1.
const I_SERIES_LIMIT: f64 = 30.0;
const RESCALE_ABOVE: f64 = 1e250;

/// J_0(x), …, J_{n_max}(x).
pub fn bessel_j_seq(n_max: usize, x: f64) -> Vec<f64> {
    if x < 0.0 {
        let mut v = bessel_j_seq(n_max, -x);
        for (n, val) in v.iter_mut().enumerate() {
            if n % 2 == 1 {
                *val = -*val;
            }
        }
        return v;
    }
    if x == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        return v;
    }
    if x <= J_SERIES_LIMIT {
        return j_series(n_max, x);
    }
    j_miller(n_max, x)
}

/// J_n(x) for a single order.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_seq(n, x)[n]
}

fn j_series(n_max: usize, x: f64) -> Vec<f64> {
    let half = 0.5 * x;
    let q = -half * half;
    let mut out = Vec::with_capacity(n_max + 1);
    // (x/2)^n / n!
    let mut lead = 1.0;
    for n in 0..=n_max {
        if n > 0 {
            lead *= half / n as f64;
        }
        let mut term = lead;
        let mut sum = lead;
        let mut k = 1.0;
        while term.abs() > 1e-17 * sum.abs() {
            term *= q / (k * (n as f64 + k));
            sum += term;
            k += 1.0;
        }
        out.push(sum);
    }
    out
}

fn j_miller(n_max: usize, x: f64) -> Vec<f64> {
    let base = (n_max as f64).max(x);
    let mut start = (base + 30.0 + (60.0 * base).sqrt()).ceil() as usize;
    start += start % 2;

    let mut vals = vec![0.0; start + 2];
    vals[start] = 1.0;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let next = k as f64 * two_over_x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in &mut vals[k - 1..] {
                *v /= RESCALE_ABOVE;
            }
        }
    }

    let mut norm = vals[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * vals[k];
    }
    vals.truncate(n_max + 1);
    for v in &mut vals {
        *v /= norm;
    }
    vals
}

/// Exponentially scaled (e^{-|x|}I₀(x), e^{-|x|}I₁(x)).
pub fn bessel_i01_scaled(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (i0, i1) = if ax <= I_SERIES_LIMIT {
        let (s0, s1) = i_series(ax);
        let e = (-ax).exp();
        (e * s0, e * ax * s1)
    } else {
        (i_asymptotic(0.0, ax), i_asymptotic(1.0, ax))
    };
    (i0, if x < 0.0 { -i1 } else { i1 })
}

/// (I₀(x), I₁(x)). Overflows to infinity for |x| beyond about 713.
pub fn bessel_i01(x: f64) -> (f64, f64) {
    let (i0, i1) = bessel_i01_scaled(x);
    let e = x.abs().exp();
    (i0 * e, i1 * e)
}

/// e^{-x} I₁(x)/x for x ≥ 0, regular at x = 0 where it equals 1/2.
pub fn bessel_i1_over_x_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= I_SERIES_LIMIT {
        (-ax).exp() * i_series(ax).1
    } else {
        i_asymptotic(1.0, ax) / ax
    }
}

// Σ (x²/4)^k/(k!)² and ½ Σ (x²/4)^k/(k!(k+1)!), i.e. I₀(x) and I₁(x)/x.
fn i_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5;
    let mut s0 = t0;
    let mut s1 = t1;
    let mut k = 1.0;
    while t0 > 1e-17 * s0 {
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        s0 += t0;
        s1 += t1;
        k += 1.0;
    }
    (s0, s1)
}

// e^{-x} I_ν(x) ≈ (2πx)^{-1/2} Σ (−1)^k Π_j (4ν² − (2j−1)²) / (k! (8x)^k).
fn i_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
