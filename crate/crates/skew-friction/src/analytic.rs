//! Closed-form densities of the skew dry-friction process started at
//! the origin: the marginal law of `X_T`, the joint laws with the last
//! visit to the origin `tau`, the pre-`tau` nonnegative occupation `V`,
//! the total nonnegative occupation `U`, and the local time `L_T`.
//!
//! Every multi-variable density here marginalizes to the next one in
//! the chain by integrating out a single variable; the consistency
//! tests exercise each step by quadrature.
//!
//! All assembly happens in log space, so products of huge exponential
//! weights with kernels that underflow come out as exact zeros instead
//! of NaNs.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{self, QuadratureSpec};
use crate::special::{erfcx, exp_or_zero, ln_fp_kernel, normal_cdf, SQRT_2PI};

/// Which form of the occupation/local-time joint density to evaluate.
///
/// The published closed form omits two first-passage factors that its
/// own derivation (integrating the `(U, X_T, L_T)` joint over `x`)
/// produces; with them restored the density normalizes to 1 and matches
/// simulation. The verbatim form is kept evaluable to document the
/// discrepancy -- at `m = 0`, `p = 1/2` it carries total mass `2 T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OccupationForm {
    Corrected,
    Verbatim,
}

fn check_l(l: f64) -> Result<()> {
    if !(l >= 0.0) {
        return Err(Error::domain(format!("local time l must be >= 0, got {l}")));
    }
    Ok(())
}

fn check_ordering(t: f64, v: f64, horizon: f64) -> Result<()> {
    if !(0.0 <= v && v <= t && t <= horizon) {
        return Err(Error::domain(format!(
            "need 0 <= v <= t <= T, got v = {v}, t = {t}, T = {horizon}"
        )));
    }
    Ok(())
}

/// Zero-drift skeleton: the joint density of `(tau, V, X_T, L_T)` for
/// skew Brownian motion without drift,
/// `2p h(v, lp) h(t-v, lq) h(T-t, x)` for `x >= 0` (with `2q` below).
pub fn skeleton_density(t: f64, v: f64, x: f64, l: f64, p: f64, horizon: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    check_ordering(t, v, horizon)?;
    check_l(l)?;
    Ok(exp_or_zero(ln_skeleton(t, v, x, l, p, horizon)))
}

fn ln_skeleton(t: f64, v: f64, x: f64, l: f64, p: f64, horizon: f64) -> f64 {
    let q = 1.0 - p;
    let weight = if x >= 0.0 { 2.0 * p } else { 2.0 * q };
    weight.ln()
        + ln_fp_kernel(v, l * p)
        + ln_fp_kernel(t - v, l * q)
        + ln_fp_kernel(horizon - t, x)
}

/// Girsanov exponent converting the zero-drift skeleton to the drifted
/// process: `-(m1^2 v + m2^2 (T-v))/2 - l (m1 p - q m2) + m(x) x`.
fn girsanov_exponent(v: f64, x: f64, l: f64, params: &ModelParams) -> f64 {
    let (m1, m2) = (params.m1(), params.m2());
    let (p, q) = (params.p(), params.q());
    let horizon = params.horizon();
    -(m1 * m1 * v + m2 * m2 * (horizon - v)) / 2.0 - l * (m1 * p - q * m2) + params.drift_at(x) * x
}

/// Joint density of `(tau, V, X_T, L_T)` under general two-valued drift.
pub fn joint_tau_v_x_l(t: f64, v: f64, x: f64, l: f64, params: &ModelParams) -> Result<f64> {
    check_ordering(t, v, params.horizon())?;
    check_l(l)?;
    let ln = ln_skeleton(t, v, x, l, params.p(), params.horizon())
        + girsanov_exponent(v, x, l, params);
    Ok(exp_or_zero(ln))
}

/// Dry-friction weight `exp(-m^2 T / 2 - m |x| + l m)` in log form.
fn ln_friction_weight(x: f64, l: f64, m: f64, horizon: f64) -> f64 {
    -m * m * horizon / 2.0 - m * x.abs() + l * m
}

/// Joint density of `(tau, X_T, L_T)`; dry friction only.
pub fn joint_tau_x_l(t: f64, x: f64, l: f64, params: &ModelParams) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    if !(0.0 <= t && t <= horizon) {
        return Err(Error::domain(format!("need 0 <= t <= T, got t = {t}, T = {horizon}")));
    }
    check_l(l)?;
    let weight = if x >= 0.0 { 2.0 * params.p() } else { 2.0 * params.q() };
    let ln = weight.ln()
        + ln_fp_kernel(t, l)
        + ln_fp_kernel(horizon - t, x)
        + ln_friction_weight(x, l, m, horizon);
    Ok(exp_or_zero(ln))
}

/// Joint density of `(X_T, L_T)`; dry friction only.
pub fn joint_x_l(x: f64, l: f64, params: &ModelParams) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    check_l(l)?;
    let weight = if x >= 0.0 { 2.0 * params.p() } else { 2.0 * params.q() };
    let ln = weight.ln()
        + ln_fp_kernel(horizon, l + x.abs())
        + ln_friction_weight(x, l, m, horizon);
    Ok(exp_or_zero(ln))
}

/// Marginal density of `X_T`; dry friction only.
///
/// For `x >= 0`:
/// `2p ( exp(-(mT+x)^2 / 2T) / sqrt(2 pi T) + (m/2) e^{-2mx} [1 + erf((mT-x)/sqrt(2T))] )`,
/// mirrored with `q` below zero. The bracketed product is routed
/// through `erfcx` once the erf argument goes negative, which removes
/// both overflow and cancellation in the tails.
pub fn marginal_density(x: f64, params: &ModelParams) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    let weight = if x >= 0.0 { 2.0 * params.p() } else { 2.0 * params.q() };
    let ax = x.abs();
    let sqrt2t = (2.0 * horizon).sqrt();

    let gauss = (-(m * horizon + ax) * (m * horizon + ax) / (2.0 * horizon)).exp()
        / (horizon.sqrt() * SQRT_2PI);
    let z = (ax - m * horizon) / sqrt2t;
    let tail = if z <= 0.0 {
        // erf argument nonnegative: no cancellation, e^{-2 m |x|} <= 1 for m >= 0
        m / 2.0 * (-2.0 * m * ax).exp() * (1.0 + crate::special::erf(-z))
    } else {
        // e^{-2 m |x|} erfc(z) = erfcx(z) e^{-(|x| + m T)^2 / (2 T)}
        m / 2.0 * erfcx(z) * (-(ax + m * horizon) * (ax + m * horizon) / (2.0 * horizon)).exp()
    };
    Ok(weight * (gauss + tail))
}

/// CDF of `X_T`; dry friction only. Closed form, exact up to `erf`.
///
/// For `x >= 0`: `q + p [ Phi((x + mT)/sqrt(T)) - (1/2) e^{-2mx} (1 + erf((mT-x)/sqrt(2T))) ]`,
/// and the mirror image below zero. `F(0) = q` for every `m`.
pub fn marginal_cdf(x: f64, params: &ModelParams) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    let (p, q) = (params.p(), params.q());
    let ax = x.abs();
    let sqrt2t = (2.0 * horizon).sqrt();

    // (1/2) e^{-2 m |x|} (1 + erf((mT - |x|)/sqrt(2T))), evaluated stably
    let z = (ax - m * horizon) / sqrt2t;
    let reflected = if z <= 0.0 {
        0.5 * (-2.0 * m * ax).exp() * (1.0 + crate::special::erf(-z))
    } else {
        0.5 * erfcx(z) * (-(ax + m * horizon) * (ax + m * horizon) / (2.0 * horizon)).exp()
    };

    if x >= 0.0 {
        Ok(q + p * (normal_cdf((x + m * horizon) / horizon.sqrt()) - reflected))
    } else {
        Ok(q * (normal_cdf((x - m * horizon) / horizon.sqrt()) + reflected))
    }
}

/// Joint density of `(tau, U, X_T, L_T)`; dry friction only.
///
/// Support: for `x >= 0`, `T - t <= u <= T`; for `x < 0`, `u <= t`.
/// Off-support points evaluate to 0.
pub fn joint_tau_u_x_l(t: f64, u: f64, x: f64, l: f64, params: &ModelParams) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    check_l(l)?;
    if !(0.0 <= t && t <= horizon && 0.0 <= u && u <= horizon) {
        return Ok(0.0);
    }
    let ln = if x >= 0.0 {
        if u < horizon - t {
            return Ok(0.0);
        }
        (2.0 * params.p()).ln()
            + ln_fp_kernel(u + t - horizon, l * params.p())
            + ln_fp_kernel(horizon - u, l * params.q())
            + ln_fp_kernel(horizon - t, x)
            + ln_friction_weight(x, l, m, horizon)
    } else {
        if u > t {
            return Ok(0.0);
        }
        (2.0 * params.q()).ln()
            + ln_fp_kernel(u, l * params.p())
            + ln_fp_kernel(t - u, l * params.q())
            + ln_fp_kernel(horizon - t, x)
            + ln_friction_weight(x, l, m, horizon)
    };
    Ok(exp_or_zero(ln))
}

/// Joint density of `(U, X_T, L_T)`; dry friction only.
pub fn joint_u_x_l(u: f64, x: f64, l: f64, params: &ModelParams) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    check_l(l)?;
    if !(0.0 < u && u < horizon) {
        return Ok(0.0);
    }
    let ln = if x >= 0.0 {
        (2.0 * params.p()).ln()
            + ln_fp_kernel(u, l * params.p() + x)
            + ln_fp_kernel(horizon - u, l * params.q())
            + ln_friction_weight(x, l, m, horizon)
    } else {
        (2.0 * params.q()).ln()
            + ln_fp_kernel(horizon - u, l * params.q() + x.abs())
            + ln_fp_kernel(u, l * params.p())
            + ln_friction_weight(x, l, m, horizon)
    };
    Ok(exp_or_zero(ln))
}

/// The auxiliary function appearing in the occupation/local-time joint:
/// `F(y, l, c) = exp(-l^2 c^2 / 2y) / sqrt(2 pi y)
///              - (m/2) erfc((lc + my)/sqrt(2y)) exp(lmc + m^2 y / 2)`.
///
/// Identically `int_0^inf h(y, lc + x) e^{-m x} dx`, which is how the
/// tests pin it down. The erfc-times-exp product is folded into `erfcx`
/// so the tail evaluation never overflows.
pub fn f_aux(y: f64, l: f64, c: f64, m: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("f_aux requires y > 0, got {y}")));
    }
    check_l(l)?;
    Ok(exp_or_zero(ln_f_aux(y, l, c, m)))
}

/// `ln F(y, l, c)`; `-inf` when the value underflows to 0.
fn ln_f_aux(y: f64, l: f64, c: f64, m: f64) -> f64 {
    let z = (l * c + m * y) / (2.0 * y).sqrt();
    if z >= 0.0 {
        // exp(lmc + m^2 y / 2 - z^2) = exp(-l^2 c^2 / 2y)
        let bracket = 1.0 / (y.sqrt() * SQRT_2PI) - m / 2.0 * erfcx(z);
        if bracket <= 0.0 {
            // true value is positive; rounding cancelled it away
            return f64::NEG_INFINITY;
        }
        -l * l * c * c / (2.0 * y) + bracket.ln()
    } else {
        // only reachable for m < 0 (untested regime); direct evaluation
        let direct = (-l * l * c * c / (2.0 * y)).exp() / (y.sqrt() * SQRT_2PI)
            - m / 2.0 * crate::special::erfc(z) * (l * m * c + m * m * y / 2.0).exp();
        direct.ln()
    }
}

/// Joint density of `(U, L_T)`; dry friction only.
///
/// Corrected form (the default everywhere):
/// `2 e^{-m^2 T/2 + lm} [ p F(u,l,p) h(T-u, lq) + q F(T-u,l,q) h(u, lp) ]`.
pub fn joint_u_l(u: f64, l: f64, params: &ModelParams) -> Result<f64> {
    joint_u_l_form(u, l, params, OccupationForm::Corrected)
}

/// As [`joint_u_l`], with explicit selection of the corrected or the
/// verbatim published form.
pub fn joint_u_l_form(u: f64, l: f64, params: &ModelParams, form: OccupationForm) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    check_l(l)?;
    if !(0.0 < u && u < horizon) {
        return Ok(0.0);
    }
    let (p, q) = (params.p(), params.q());
    let prefix = std::f64::consts::LN_2 - m * m * horizon / 2.0 + l * m;
    let (ln_h1, ln_h2) = match form {
        OccupationForm::Corrected => (
            ln_fp_kernel(horizon - u, l * q),
            ln_fp_kernel(u, l * p),
        ),
        OccupationForm::Verbatim => (0.0, 0.0),
    };
    let term1 = exp_or_zero(prefix + p.ln() + ln_f_aux(u, l, p, m) + ln_h1);
    let term2 = exp_or_zero(prefix + q.ln() + ln_f_aux(horizon - u, l, q, m) + ln_h2);
    Ok(term1 + term2)
}

/// Density of the occupation time `U`, as the semi-infinite integral of
/// [`joint_u_l`] over the local time.
pub fn occupation_density(u: f64, params: &ModelParams) -> Result<f64> {
    occupation_density_with(u, params, OccupationForm::Corrected, &QuadratureSpec::default())
}

pub fn occupation_density_with(
    u: f64,
    params: &ModelParams,
    form: OccupationForm,
    spec: &QuadratureSpec,
) -> Result<f64> {
    params.friction()?;
    let horizon = params.horizon();
    if !(0.0 < u && u < horizon) {
        return Err(Error::domain(format!(
            "occupation density requires 0 < u < T, got u = {u}, T = {horizon}"
        )));
    }
    let (value, _) = quadrature::integrate_semi_infinite(
        |l| joint_u_l_form(u, l, params, form).unwrap_or(0.0),
        0.0,
        spec,
    )?;
    Ok(value)
}

/// Marginal density of the local time `L_T`:
/// `2 e^{-m^2 T/2 + lm} F(T, l, 1)`. Independent of the skewness `p`.
pub fn local_time_density(l: f64, params: &ModelParams) -> Result<f64> {
    let m = params.friction()?;
    let horizon = params.horizon();
    check_l(l)?;
    let ln = std::f64::consts::LN_2 - m * m * horizon / 2.0 + l * m + ln_f_aux(horizon, l, 1.0, m);
    Ok(exp_or_zero(ln))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::first_passage_density;

    fn h(s: f64, y: f64) -> f64 {
        crate::special::fp_kernel(s, y)
    }

    // Frozen from a 40-digit evaluation (mpmath).
    const SKELETON_EX: f64 = 0.38902500243461205;
    const MARGINAL_EX: f64 = 0.7059564769475755; // x=0.3, p=0.7, m=0.5, T=1
    const JOINT_U_L_EX: f64 = 0.38612941052021563; // u=0.5, l=1, p=0.5, m=0, T=1
    const LOCAL_TIME_M0: f64 = 0.4839414490382867; // l=1, m=0, T=1
    const LOCAL_TIME_EX: f64 = 0.5473421905778682; // l=0.8, m=0.5, T=1
    const F_AUX_EX: f64 = 0.23664431058712916; // y=1, l=1, c=0.5, m=0.5
    const F_AUX_BIG: f64 = 7.087746519248999e-137; // y=1, l=50, c=0.5, m=2
    const CDF_03: f64 = 0.5513129179101227; // x=0.3, p=0.7, m=0.5, T=1
    const CDF_M12: f64 = 0.035233054290380899; // x=-1.2, same params
    const NORMAL0: f64 = 0.3989422804014327;

    fn dry(p: f64, m: f64, t: f64) -> ModelParams {
        ModelParams::dry_friction(p, m, t).unwrap()
    }

    #[test]
    fn skeleton_matches_kernel_product() {
        let v = skeleton_density(0.8, 0.3, 0.4, 1.0, 0.7, 1.0).unwrap();
        let direct = 2.0 * 0.7 * h(0.3, 0.7) * h(0.5, 0.3) * h(0.2, 0.4);
        assert!((v - direct).abs() < 1e-15 * direct);
        assert!((v - SKELETON_EX).abs() < 1e-12);
    }

    #[test]
    fn skeleton_branch_symmetry_and_zeros() {
        let a = skeleton_density(0.8, 0.3, 0.5, 1.0, 0.5, 1.0).unwrap();
        let b = skeleton_density(0.8, 0.3, -0.5, 1.0, 0.5, 1.0).unwrap();
        assert!((a - b).abs() < 1e-16);
        // l = 0 with v > 0 kills h(v, lp)
        assert_eq!(skeleton_density(0.8, 0.3, 0.5, 0.0, 0.5, 1.0).unwrap(), 0.0);
        // ordering violations are domain errors
        assert!(skeleton_density(0.3, 0.5, 0.1, 1.0, 0.5, 1.0).is_err());
        assert!(skeleton_density(0.8, 0.3, 0.1, -1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn joint_tau_v_x_l_reduces_to_skeleton_at_zero_drift() {
        let params = dry(0.7, 0.0, 1.0);
        for (t, v, x, l) in [(0.8, 0.3, 0.4, 1.0), (0.5, 0.1, -0.2, 0.6)] {
            let a = joint_tau_v_x_l(t, v, x, l, &params).unwrap();
            let b = skeleton_density(t, v, x, l, 0.7, 1.0).unwrap();
            assert!((a - b).abs() < 1e-15 * b.max(1.0));
        }
    }

    #[test]
    fn dry_friction_exponent_reduction() {
        // m = 0.5, v = 0.3, T = 1, x = 0.4, l = 1: exponent -0.125 - 0.2 + 0.5
        let params = dry(0.7, 0.5, 1.0);
        let a = joint_tau_v_x_l(0.8, 0.3, 0.4, 1.0, &params).unwrap();
        let b = skeleton_density(0.8, 0.3, 0.4, 1.0, 0.7, 1.0).unwrap()
            * (-0.125f64 - 0.2 + 0.5).exp();
        assert!((a - b).abs() < 1e-14 * b);
        // general parameterization with m1 = -m, m2 = m agrees
        let gen = ModelParams::general(0.7, -0.5, 0.5, 1.0).unwrap();
        let c = joint_tau_v_x_l(0.8, 0.3, 0.4, 1.0, &gen).unwrap();
        assert!((a - c).abs() < 1e-14 * a);
    }

    #[test]
    fn joint_tau_x_l_zero_drift_factorizes() {
        let params = dry(0.5, 0.0, 1.0);
        let v = joint_tau_x_l(0.5, 0.5, 0.5, &params).unwrap();
        let expected = h(0.5, 0.5) * h(0.5, 0.5);
        assert!((v - expected).abs() < 1e-15);
        assert_eq!(joint_tau_x_l(0.5, 0.5, 0.0, &params).unwrap(), 0.0);
    }

    #[test]
    fn dry_friction_only_chains_reject_general_drift() {
        let gen = ModelParams::general(0.5, 0.1, 0.2, 1.0).unwrap();
        assert!(joint_tau_x_l(0.5, 0.5, 0.5, &gen).is_err());
        assert!(joint_x_l(0.5, 0.5, &gen).is_err());
        assert!(marginal_density(0.0, &gen).is_err());
        assert!(marginal_cdf(0.0, &gen).is_err());
        assert!(joint_u_l(0.5, 0.5, &gen).is_err());
        assert!(local_time_density(0.5, &gen).is_err());
        assert!(occupation_density(0.5, &gen).is_err());
    }

    #[test]
    fn joint_x_l_levy_reduction() {
        let params = dry(0.5, 0.0, 1.0);
        let v = joint_x_l(0.5, 0.5, &params).unwrap();
        assert!((v - first_passage_density(1.0, 1.0).unwrap()).abs() < 1e-15);
        // x < 0 branch uses l + |x|
        let v = joint_x_l(-0.5, 0.5, &params).unwrap();
        assert!((v - first_passage_density(1.0, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn marginal_density_values_and_symmetry() {
        let std_normal = dry(0.5, 0.0, 1.0);
        assert!((marginal_density(0.0, &std_normal).unwrap() - NORMAL0).abs() < 1e-15);
        let params = dry(0.7, 0.5, 1.0);
        let v = marginal_density(0.3, &params).unwrap();
        assert!((v - MARGINAL_EX).abs() < 1e-12);
        // skew symmetry
        let mirrored = params.mirrored();
        let w = marginal_density(-0.3, &mirrored).unwrap();
        assert!((v - w).abs() < 1e-14 * v);
    }

    #[test]
    fn marginal_density_tails_are_finite_and_tiny() {
        let params = dry(0.3, 2.0, 4.0);
        for x in [-60.0, -25.0, 25.0, 60.0] {
            let v = marginal_density(x, &params).unwrap();
            assert!(v.is_finite() && v >= 0.0);
            assert!(v < 1e-10);
        }
    }

    #[test]
    fn marginal_cdf_values() {
        let symmetric = dry(0.5, 0.0, 1.0);
        assert!((marginal_cdf(0.0, &symmetric).unwrap() - 0.5).abs() < 1e-15);
        let params = dry(0.7, 0.5, 1.0);
        assert!((marginal_cdf(0.3, &params).unwrap() - CDF_03).abs() < 1e-14);
        assert!((marginal_cdf(-1.2, &params).unwrap() - CDF_M12).abs() < 1e-14);
        // mass of the negative half-line is q for every m
        for m in [0.0, 0.5, 2.0] {
            let params = dry(0.7, m, 1.0);
            assert!((marginal_cdf(0.0, &params).unwrap() - 0.3).abs() < 1e-14);
        }
        // total mass
        let params = dry(0.3, 1.0, 2.0);
        let far = 20.0 * params.horizon().sqrt() + params.horizon();
        assert!((marginal_cdf(far, &params).unwrap() - 1.0).abs() < 1e-8);
        assert!(marginal_cdf(-far, &params).unwrap() < 1e-8);
    }

    #[test]
    fn marginal_cdf_monotone() {
        let params = dry(0.3, 1.0, 1.0);
        let mut prev = -1.0;
        for i in 0..=400 {
            let x = -6.0 + i as f64 * 0.03;
            let f = marginal_cdf(x, &params).unwrap();
            assert!(f >= prev - 1e-15, "CDF decreased at x = {x}");
            prev = f;
        }
    }

    #[test]
    fn joint_tau_u_change_of_variables() {
        let params = dry(0.6, 0.5, 1.0);
        let (t, v, l) = (0.8, 0.2, 1.0);
        // x >= 0: u = T - t + v
        let x = 0.5;
        let a = joint_tau_u_x_l(t, 1.0 - t + v, x, l, &params).unwrap();
        let b = joint_tau_v_x_l(t, v, x, l, &params).unwrap();
        assert!((a - b).abs() < 1e-15 * b.max(1.0));
        // x < 0: u = v
        let x = -0.5;
        let a = joint_tau_u_x_l(t, v, x, l, &params).unwrap();
        let b = joint_tau_v_x_l(t, v, x, l, &params).unwrap();
        assert!((a - b).abs() < 1e-15 * b.max(1.0));
    }

    #[test]
    fn joint_tau_u_off_support_vanishes() {
        let params = dry(0.6, 0.5, 1.0);
        // x >= 0 requires u >= T - t
        assert_eq!(joint_tau_u_x_l(0.3, 0.2, 0.5, 1.0, &params).unwrap(), 0.0);
        // x < 0 requires u <= t
        assert_eq!(joint_tau_u_x_l(0.3, 0.5, -0.5, 1.0, &params).unwrap(), 0.0);
        assert_eq!(joint_tau_u_x_l(0.3, 1.5, 0.5, 1.0, &params).unwrap(), 0.0);
        assert!(joint_tau_u_x_l(0.3, 0.5, 0.5, -1.0, &params).is_err());
    }

    #[test]
    fn joint_u_x_l_edges() {
        let params = dry(0.6, 0.5, 1.0);
        // l = 0 with x > 0 kills h(T-u, lq)
        assert_eq!(joint_u_x_l(0.6, 0.4, 0.0, &params).unwrap(), 0.0);
        assert_eq!(joint_u_x_l(1.2, 0.4, 0.9, &params).unwrap(), 0.0);
        assert_eq!(joint_u_x_l(-0.2, 0.4, 0.9, &params).unwrap(), 0.0);
    }

    #[test]
    fn f_aux_values() {
        // m = 0 collapses to a plain Gaussian factor
        assert!((f_aux(1.0, 0.0, 1.0, 0.0).unwrap() - NORMAL0).abs() < 1e-15);
        let v = f_aux(1.0, 1.0, 0.5, 0.5).unwrap();
        assert!(((v - F_AUX_EX) / F_AUX_EX).abs() < 1e-13);
        // large-argument stability
        let v = f_aux(1.0, 50.0, 0.5, 2.0).unwrap();
        assert!(v.is_finite());
        assert!(((v - F_AUX_BIG) / F_AUX_BIG).abs() < 1e-8);
        assert!(f_aux(0.0, 1.0, 0.5, 0.5).is_err());
        assert!(f_aux(-1.0, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn joint_u_l_closed_form_point() {
        let params = dry(0.5, 0.0, 1.0);
        let v = joint_u_l(0.5, 1.0, &params).unwrap();
        assert!((v - JOINT_U_L_EX).abs() < 1e-13);
        // l T/(4 pi) exp(-l^2 T/(8 u (T-u))) / (u (T-u))^{3/2} at m = 0, p = 1/2
        let (u, l) = (0.3, 0.7);
        let closed = l / (4.0 * std::f64::consts::PI)
            * (-l * l / (8.0 * u * (1.0 - u))).exp()
            / (u * (1.0 - u)).powf(1.5);
        let v = joint_u_l(u, l, &params).unwrap();
        assert!((v - closed).abs() < 1e-13 * closed);
        // outside (0, T)
        assert_eq!(joint_u_l(1.5, 1.0, &params).unwrap(), 0.0);
        assert_eq!(joint_u_l(-0.5, 1.0, &params).unwrap(), 0.0);
    }

    #[test]
    fn verbatim_form_differs() {
        let params = dry(0.5, 0.5, 1.0);
        let a = joint_u_l_form(0.4, 0.8, &params, OccupationForm::Corrected).unwrap();
        let b = joint_u_l_form(0.4, 0.8, &params, OccupationForm::Verbatim).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn occupation_density_arcsine_reduction() {
        let params = dry(0.5, 0.0, 1.0);
        for (u, expected) in [(0.5, 2.0 / std::f64::consts::PI), (0.2, 0.7957747154594768)] {
            let v = occupation_density(u, &params).unwrap();
            assert!((v - expected).abs() < 1e-6, "u = {u}: {v} vs {expected}");
        }
        assert!(occupation_density(0.0, &params).is_err());
        assert!(occupation_density(1.0, &params).is_err());
    }

    #[test]
    fn local_time_density_values_and_p_independence() {
        let params = dry(0.5, 0.0, 1.0);
        assert!((local_time_density(1.0, &params).unwrap() - LOCAL_TIME_M0).abs() < 1e-13);
        let a = local_time_density(0.8, &dry(0.3, 0.5, 1.0)).unwrap();
        let b = local_time_density(0.8, &dry(0.7, 0.5, 1.0)).unwrap();
        assert_eq!(a, b);
        assert!((a - LOCAL_TIME_EX).abs() < 1e-13);
        assert!(local_time_density(-0.1, &params).is_err());
    }

    #[test]
    fn nonnegative_on_parameter_grid() {
        for &p in &[0.1, 0.5, 0.9] {
            for &m in &[0.0, 0.5, 2.0] {
                for &t in &[0.25, 1.0, 4.0] {
                    let params = dry(p, m, t);
                    for i in 0..12 {
                        let x = -3.0 * t.sqrt() + i as f64 * 0.5 * t.sqrt();
                        let l = 0.3 * i as f64 * t.sqrt();
                        let u = (0.08 * (i + 1) as f64) * t;
                        assert!(marginal_density(x, &params).unwrap() >= 0.0);
                        assert!(joint_x_l(x, l, &params).unwrap() >= 0.0);
                        assert!(joint_u_l(u.min(t * 0.99), l, &params).unwrap() >= 0.0);
                        assert!(local_time_density(l, &params).unwrap() >= 0.0);
                    }
                }
            }
        }
    }
}
