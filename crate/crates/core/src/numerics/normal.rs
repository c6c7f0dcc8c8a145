//! Standard normal distribution: density, CDF, tails, interval masses,
//! quantiles and truncated sampling.
//!
//! Upper tails above 2.5 come from the Mills-ratio continued fraction, so
//! `Q(x)` keeps full relative precision deep into the tail and `ln Q(x)`
//! never underflows. Below 2.5 the Taylor series of `Φ` around zero is used.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::rng::Rng;

/// ln √(2π)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SERIES_CUTOFF: f64 = 2.5;

/// `exp(-x²/2)` with the square split so the large part is exact.
fn gauss_kernel(x: f64) -> f64 {
    let x = x.abs();
    if x == f64::INFINITY {
        return 0.0;
    }
    let xh = (x * 16.0).trunc() / 16.0;
    let lo = (x - xh) * (x + xh);
    (-0.5 * xh * xh).exp() * (-0.5 * lo).exp()
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * gauss_kernel(x)
}

/// Natural log of the standard normal density.
pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Σ x^{2k+1}/(2k+1)!!, so that Φ(x) = ½ + φ(x)·S(x).
fn taylor_sum(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    loop {
        k += 2.0;
        term *= x2 / k;
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
    }
}

/// Mills ratio R(x) = Q(x)/φ(x) for x ≥ 2.5 by the continued fraction
/// 1/(x+1/(x+2/(x+3/(x+…)))), evaluated with the modified Lentz method.
fn mills_ratio(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Upper tail Q(x) = 1 − Φ(x).
pub fn upper_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    if x >= SERIES_CUTOFF {
        pdf(x) * mills_ratio(x)
    } else if x > -SERIES_CUTOFF {
        0.5 - pdf(x) * taylor_sum(x)
    } else {
        1.0 - pdf(x) * mills_ratio(-x)
    }
}

/// Natural log of Q(x); finite for every finite x.
pub fn ln_upper_tail(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x >= SERIES_CUTOFF {
        ln_pdf(x) + mills_ratio(x).ln()
    } else if x > -SERIES_CUTOFF {
        upper_tail(x).ln()
    } else {
        (-upper_tail(-x)).ln_1p()
    }
}

/// Standard normal CDF Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    upper_tail(-x)
}

/// Natural log of Φ(x).
pub fn ln_cdf(x: f64) -> f64 {
    ln_upper_tail(-x)
}

fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        const N: usize = 16;
        let mut out = Vec::with_capacity(N);
        for i in 0..N {
            // Newton on P_N starting from the Chebyshev-like guess.
            let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

/// ∫_a^b exp(-(x²−c²)/2) dx by Gauss–Legendre, for a narrow interval with
/// `c` its endpoint closest to zero.
fn scaled_narrow_integral(a: f64, b: f64, c: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for &(t, w) in gauss_legendre() {
        let x = mid + half * t;
        s += w * (-0.5 * (x - c) * (x + c)).exp();
    }
    s * half
}

fn is_narrow(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && (b - a) * 1f64.max(a.abs()).max(b.abs()) <= 1.0
}

fn nearest_to_zero(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        a
    } else if b < 0.0 {
        b
    } else {
        0.0
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(())
}

/// Φ(b) − Φ(a) with small relative error, including far tails and narrow
/// intervals.
pub fn interval_mass(a: f64, b: f64) -> Result<f64> {
    check_interval(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    if is_narrow(a, b) {
        let c = nearest_to_zero(a, b);
        return Ok(pdf(c) * scaled_narrow_integral(a, b, c));
    }
    Ok(if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(-a) - upper_tail(b)
    })
}

/// ln(Φ(b) − Φ(a)); finite whenever the interval has positive width.
pub fn log_interval_mass(a: f64, b: f64) -> Result<f64> {
    check_interval(a, b)?;
    if a == b {
        return Ok(f64::NEG_INFINITY);
    }
    if is_narrow(a, b) {
        let c = nearest_to_zero(a, b);
        return Ok(ln_pdf(c) + scaled_narrow_integral(a, b, c).ln());
    }
    let tail_diff = |lo: f64, hi: f64| {
        let la = ln_upper_tail(lo);
        let lb = ln_upper_tail(hi);
        la + (-(lb - la).exp_m1()).ln()
    };
    Ok(if a >= 0.0 {
        tail_diff(a, b)
    } else if b <= 0.0 {
        tail_diff(-b, -a)
    } else {
        interval_mass(a, b)?.ln()
    })
}

/// Acklam's rational approximation to Φ⁻¹ (relative error about 1e-9),
/// used as the starting point for Newton refinement.
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const P_LOW: f64 = 0.02425;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// The y with ln Q(y) = `ln_q`, for `ln_q ≤ ln ½` (so y ≥ 0 up to rounding).
pub fn upper_quantile_ln(ln_q: f64) -> f64 {
    if ln_q == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    let mut y = if ln_q > -700.0 {
        -acklam(ln_q.exp())
    } else {
        // Leading-order tail inversion; Newton below does the rest.
        let t = -2.0 * ln_q;
        (t - t.ln() - (2.0 * PI).ln()).sqrt()
    };
    // ln Q is concave and decreasing, so Newton converges monotonically
    // after the first step.
    for _ in 0..100 {
        let lq = ln_upper_tail(y);
        let step = (lq - ln_q) * (lq - ln_pdf(y)).exp();
        y += step;
        if step.abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
            break;
        }
    }
    y
}

/// Inverse CDF Φ⁻¹(p) for p ∈ (0, 1).
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p <= 0.5 {
        -upper_quantile_ln(p.ln())
    } else {
        // 1 − p is exact for p ≥ ½.
        upper_quantile_ln((1.0 - p).ln())
    }
}

/// One draw from N(0,1) conditioned on [a, b).
pub fn truncated_normal_sample(a: f64, b: f64, rng: &mut Rng) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::InvalidInterval { a, b });
    }
    if log_interval_mass(a, b)? == f64::NEG_INFINITY {
        return Err(Error::ZeroMass);
    }
    let u = rng.uniform();
    let x = if a >= 0.0 {
        upper_tail_draw(a, b, u)
    } else if b <= 0.0 {
        -upper_tail_draw(-b, -a, u)
    } else {
        let pa = std_normal_cdf(a);
        quantile(pa + u * interval_mass(a, b)?)
    };
    Ok(clamp_half_open(x, a, b))
}

/// Inverse-CDF draw on [a, b) with a ≥ 0, carried out in log-tail space.
fn upper_tail_draw(a: f64, b: f64, u: f64) -> f64 {
    let la = ln_upper_tail(a);
    let lb = ln_upper_tail(b);
    let frac = -(lb - la).exp_m1();
    upper_quantile_ln(la + (-u * frac).ln_1p())
}

fn clamp_half_open(x: f64, a: f64, b: f64) -> f64 {
    if x < a {
        a
    } else if x >= b {
        b.next_down().max(a)
    } else {
        x
    }
}
