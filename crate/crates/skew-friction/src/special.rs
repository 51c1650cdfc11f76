//! Scalar special functions and the first-passage kernel that every
//! analytic density in this crate is assembled from.
//!
//! `erf`/`erfc` are the SunPro double-precision ports from `libm`
//! (relative accuracy a few ulp over the whole range, well inside the
//! 1e-12 budget the densities need). The scaled complement `erfcx` and
//! the log-space kernel provide overflow-free tail evaluation.

use crate::error::{Error, Result};

pub const SQRT_2PI: f64 = 2.5066282746310002;
const FRAC_1_SQRT_PI: f64 = 0.5641895835477563;

/// Standard error function.
pub fn erf(z: f64) -> f64 {
    libm::erf(z)
}

/// Complementary error function `1 - erf(z)`, computed without
/// cancellation for large positive arguments.
pub fn erfc(z: f64) -> f64 {
    libm::erfc(z)
}

/// Scaled complementary error function `exp(z^2) * erfc(z)`.
///
/// Finite for arbitrarily large positive `z`; for negative `z` the
/// result overflows to `+inf` once `z^2` exceeds ~709 in the exponent,
/// matching the true value's magnitude.
pub fn erfcx(z: f64) -> f64 {
    if z < 0.0 {
        // erfc(z) = 2 - erfc(-z)
        return 2.0 * (z * z).exp() - erfcx(-z);
    }
    if z <= 6.5 {
        libm::erfc(z) * (z * z).exp()
    } else {
        // Asymptotic series erfcx(z) ~ 1/(z sqrt(pi)) * sum (-1)^k (2k-1)!! / (2 z^2)^k,
        // truncated at the smallest term; past z = 6.5 that is below f64
        // precision, so the series is effectively exact here.
        let r = 1.0 / (2.0 * z * z);
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 1..60u32 {
            let next = term * -(2.0 * k as f64 - 1.0) * r;
            if next.abs() >= term.abs() || next.abs() < 1e-18 * sum.abs() {
                if next.abs() < term.abs() {
                    sum += next;
                }
                break;
            }
            term = next;
            sum += term;
        }
        FRAC_1_SQRT_PI / z * sum
    }
}

/// Density of the first passage time to zero of standard Brownian motion
/// started at `y`: `h(s, y) = |y| / sqrt(2 pi s^3) * exp(-y^2 / (2 s))`.
pub fn first_passage_density(s: f64, y: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!(
            "first_passage_density requires s > 0, got s = {s}"
        )));
    }
    if !y.is_finite() {
        return Err(Error::domain(format!(
            "first_passage_density requires finite y, got y = {y}"
        )));
    }
    Ok(fp_kernel(s, y))
}

/// Centered Gaussian density with variance `s`: `exp(-x^2/(2s)) / sqrt(2 pi s)`.
pub fn gaussian_pdf(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!(
            "gaussian_pdf requires s > 0, got s = {s}"
        )));
    }
    Ok((-x * x / (2.0 * s)).exp() / (s.sqrt() * SQRT_2PI))
}

/// Unchecked first-passage kernel. `s <= 0` and `y = 0` return the
/// limiting value 0 so support boundaries of the joint densities can be
/// evaluated on closed grids.
pub(crate) fn fp_kernel(s: f64, y: f64) -> f64 {
    if s <= 0.0 || y == 0.0 {
        return 0.0;
    }
    // exp underflow gives exact 0 for s -> 0 with y != 0.
    y.abs() / (SQRT_2PI * (s * s * s).sqrt()) * (-y * y / (2.0 * s)).exp()
}

/// `ln h(s, y)`; `-inf` off the support.
pub(crate) fn ln_fp_kernel(s: f64, y: f64) -> f64 {
    if s <= 0.0 || y == 0.0 {
        return f64::NEG_INFINITY;
    }
    y.abs().ln() - SQRT_2PI.ln() - 1.5 * s.ln() - y * y / (2.0 * s)
}

/// `exp` that maps `-inf` to exact 0 without touching NaN semantics.
pub(crate) fn exp_or_zero(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else {
        x.exp()
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}
