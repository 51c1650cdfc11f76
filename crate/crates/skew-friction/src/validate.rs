//! Statistical and numerical comparison machinery: KS distances,
//! histogram chi-square tests, normalization and consistency checks,
//! assembled into a replayable evidence report.

use crate::analytic::{self, OccupationForm};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{self, EndpointStrategy, QuadratureSpec};
use crate::simulate::{self, LatticeConfig};
use serde::{Deserialize, Serialize};

/// Sup-norm distance between the empirical CDF of a sample and an
/// analytic CDF, evaluated at the sample points (both one-sided gaps).
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("ks_distance requires a nonempty sample"));
    }
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(sup)
}

/// Pearson chi-square statistic against expected cell masses, merging
/// adjacent cells until every merged group has expected count >= 5.
/// Returns `(statistic, degrees of freedom)`.
pub fn chi2_statistic(observed: &[u64], expected_masses: &[f64], n: u64) -> Result<(f64, usize)> {
    if observed.len() != expected_masses.len() {
        return Err(Error::domain("observed/expected length mismatch"));
    }
    if expected_masses.iter().any(|&m| !(m >= 0.0)) {
        return Err(Error::domain("expected masses must be nonnegative"));
    }
    let mut groups: Vec<(f64, f64)> = Vec::new(); // (observed, expected count)
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &mass) in observed.iter().zip(expected_masses) {
        acc_o += o as f64;
        acc_e += mass * n as f64;
        if acc_e >= 5.0 {
            groups.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        if let Some(last) = groups.last_mut() {
            last.0 += acc_o;
            last.1 += acc_e;
        }
    }
    if groups.len() < 2 {
        return Err(Error::domain("all cells merged away; not enough expected mass"));
    }
    let stat = groups
        .iter()
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum::<f64>();
    Ok((stat, groups.len() - 1))
}

/// Upper tail of the chi-square distribution: `P(X > stat)` with `dof`
/// degrees of freedom, via the regularized incomplete gamma function.
pub fn chi2_pvalue(stat: f64, dof: usize) -> f64 {
    gamma_q(dof as f64 / 2.0, stat / 2.0)
}

/// Regularized upper incomplete gamma `Q(a, x)`; series for `x < a + 1`,
/// Lentz continued fraction otherwise.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        // P(a, x) by series
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        1.0 - sum * (-x + a * x.ln() - libm::lgamma(a)).exp()
    } else {
        // Q(a, x) by continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x + a * x.ln() - libm::lgamma(a)).exp() * h
    }
}

/// Piecewise-linear CDF table over a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct CdfTable {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl CdfTable {
    /// Cumulative Simpson integration of `density` over `[a, b]` with an
    /// even number of panels.
    pub fn from_density<F: Fn(f64) -> f64>(density: F, a: f64, b: f64, points: usize) -> Self {
        let n = if points % 2 == 0 { points } else { points + 1 };
        let h = (b - a) / n as f64;
        let vals: Vec<f64> = (0..=n).map(|i| density(a + i as f64 * h)).collect();
        let mut fs = vec![0.0; n + 1];
        for i in (2..=n).step_by(2) {
            fs[i] = fs[i - 2] + h / 3.0 * (vals[i - 2] + 4.0 * vals[i - 1] + vals[i]);
            // midpoint by half-panel Simpson
            fs[i - 1] = fs[i - 2] + h / 12.0 * (5.0 * vals[i - 2] + 8.0 * vals[i - 1] - vals[i]);
        }
        let xs = (0..=n).map(|i| a + i as f64 * h).collect();
        CdfTable { xs, fs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return *self.fs.last().unwrap();
        }
        let idx = self.xs.partition_point(|&p| p < x).max(1);
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (f0, f1) = (self.fs[idx - 1], self.fs[idx]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    pub fn total(&self) -> f64 {
        *self.fs.last().unwrap()
    }
}

/// CDF of the occupation time, tabulated in the angle variable
/// `u = T sin^2(theta/2)` to absorb the endpoint singularities.
pub fn occupation_cdf_table(params: &ModelParams, form: OccupationForm) -> Result<CdfTable> {
    let horizon = params.horizon();
    let spec = QuadratureSpec::default().loosened(10.0);
    let n = 400;
    let h = std::f64::consts::PI / n as f64;
    // integrand in theta: occ(u(theta)) * (T/2) sin(theta); its limits at
    // theta = 0 and pi are finite and generally nonzero, so the endpoint
    // samples are taken just inside rather than set to zero
    let g = |theta: f64| -> Result<f64> {
        let theta = theta.clamp(h / 64.0, std::f64::consts::PI - h / 64.0);
        let s = (0.5 * theta).sin();
        let u = horizon * s * s;
        Ok(analytic::occupation_density_with(u, params, form, &spec)? * 0.5 * horizon * theta.sin())
    };
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        vals.push(g(i as f64 * h)?);
    }
    // cumulative Simpson over theta, then reparameterize on eval
    let mut fs = vec![0.0; n + 1];
    for i in (2..=n).step_by(2) {
        fs[i] = fs[i - 2] + h / 3.0 * (vals[i - 2] + 4.0 * vals[i - 1] + vals[i]);
        fs[i - 1] = fs[i - 2] + h / 12.0 * (5.0 * vals[i - 2] + 8.0 * vals[i - 1] - vals[i]);
    }
    let xs = (0..=n)
        .map(|i| {
            let s = (0.5 * i as f64 * h).sin();
            horizon * s * s
        })
        .collect();
    Ok(CdfTable { xs, fs })
}

/// CDF of the local time over `[0, l_max]` with `l_max` chosen from the
/// density's Gaussian decay.
pub fn local_time_cdf_table(params: &ModelParams) -> Result<CdfTable> {
    let horizon = params.horizon();
    let m = params.friction()?;
    let l_max = (m.max(0.0) * horizon + 10.0 * horizon.sqrt()).max(1.0);
    let density = |l: f64| analytic::local_time_density(l, params).unwrap_or(0.0);
    Ok(CdfTable::from_density(density, 0.0, l_max, 800))
}

/// Closed-form CDF of `X_T` as a callable for KS use.
pub fn marginal_cdf_fn(params: &ModelParams) -> Result<impl Fn(f64) -> f64 + '_> {
    params.friction()?;
    let params = *params;
    Ok(move |x: f64| analytic::marginal_cdf(x, &params).unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Normalization,
    Reduction,
    Consistency,
    Ks,
    Chi2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Ci,
    Full,
}

/// One named check. `observed` is always a deviation or distance, so
/// `pass == (observed <= threshold)` uniformly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub profile: Profile,
    pub params: ModelParams,
    pub lattice: LatticeConfig,
    pub occupation_form: OccupationForm,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Human-readable fixed-width table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<44} {:>12} {:>12}  {}\n",
            "check", "observed", "threshold", "result"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<44} {:>12.4e} {:>12.4e}  {}\n",
                c.name,
                c.observed,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        let status = if self.all_pass() { "PASS" } else { "FAIL" };
        out.push_str(&format!("overall: {status}\n"));
        out
    }
}

struct Battery {
    checks: Vec<CheckResult>,
}

impl Battery {
    fn push(&mut self, name: &str, kind: CheckKind, observed: f64, threshold: f64, note: &str) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            kind,
            observed,
            threshold,
            pass: observed <= threshold,
            note: note.to_string(),
        });
    }
}

fn dry(p: f64, m: f64, t: f64) -> ModelParams {
    ModelParams::dry_friction(p, m, t).expect("valid battery parameters")
}

/// Expected masses of a 2-D histogram's cells under `density`, cell by
/// cell, inner variable integrated first.
pub fn cell_masses<F: Fn(f64, f64) -> f64 + Copy>(
    density: F,
    x_edges: &[f64],
    y_edges: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let mut masses = Vec::with_capacity((x_edges.len() - 1) * (y_edges.len() - 1));
    for xw in x_edges.windows(2) {
        for yw in y_edges.windows(2) {
            let (v, _) = quadrature::integrate_finite(
                |x| {
                    quadrature::integrate_finite(|y| density(x, y), yw[0], yw[1], &spec.loosened(0.1))
                        .map(|r| r.0)
                        .unwrap_or(0.0)
                },
                xw[0],
                xw[1],
                spec,
            )?;
            masses.push(v.max(0.0));
        }
    }
    Ok(masses)
}

/// Run the complete check battery. Individual check failures are
/// recorded in the report; only infrastructure failures error out.
pub fn run_full_validation(
    params: &ModelParams,
    lattice: &LatticeConfig,
    profile: Profile,
    form: OccupationForm,
) -> Result<ValidationReport> {
    let mut battery = Battery { checks: Vec::new() };
    deterministic_checks(&mut battery, params, form)?;
    monte_carlo_checks(&mut battery, params, lattice, profile)?;
    if profile == Profile::Full {
        erratum_discrimination_checks(&mut battery, lattice)?;
        weak_convergence_check(&mut battery, lattice)?;
    }
    Ok(ValidationReport {
        profile,
        params: *params,
        lattice: *lattice,
        occupation_form: form,
        checks: battery.checks,
    })
}

fn deterministic_checks(b: &mut Battery, params: &ModelParams, form: OccupationForm) -> Result<()> {
    let spec = QuadratureSpec::default();
    let horizon = params.horizon();

    // first-passage time density integrates to 1 over time; the
    // s^{-3/2} tail needs the algebraic substitution
    let time_spec = QuadratureSpec {
        tail_strategy: quadrature::TailStrategy::AlgebraicSubstitution,
        ..spec
    };
    let mut worst = 0.0f64;
    for y in [0.5, 1.0, 3.0] {
        let (v, _) = quadrature::integrate_semi_infinite(
            |s| crate::special::first_passage_density(s, y).unwrap_or(0.0),
            0.0,
            &time_spec,
        )?;
        worst = worst.max((v - 1.0).abs());
    }
    b.push("special.h_time_normalization", CheckKind::Normalization, worst, 1e-8, "int_0^inf h(s,y) ds = 1");

    // convolution identities of the hitting-time kernel
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        for l in [0.3, 1.0, 2.0] {
            for p in [0.1, 0.5, 0.9] {
                let q = 1.0 - p;
                let (v, _) = quadrature::integrate_finite(
                    |s| {
                        crate::special::fp_kernel(s, l * p)
                            * crate::special::fp_kernel(t - s, l * q)
                    },
                    0.0,
                    t,
                    &spec,
                )?;
                worst = worst.max((v - crate::special::fp_kernel(t, l)).abs());
            }
        }
    }
    b.push("special.convolution_skew", CheckKind::Consistency, worst, 1e-8, "int h(v,lp)h(t-v,lq)dv = h(t,l)");

    let mut worst = 0.0f64;
    for t_total in [0.5, 1.0, 2.0] {
        for l in [0.3, 1.0, 2.0] {
            for x in [0.2, 0.7, 1.5] {
                let (v, _) = quadrature::integrate_finite(
                    |t| {
                        crate::special::fp_kernel(t, l)
                            * crate::special::fp_kernel(t_total - t, x)
                    },
                    0.0,
                    t_total,
                    &spec,
                )?;
                worst = worst.max((v - crate::special::fp_kernel(t_total, l + x)).abs());
            }
        }
    }
    b.push("special.convolution_shift", CheckKind::Consistency, worst, 1e-8, "int h(t,l)h(T-t,x)dt = h(T,l+|x|)");

    // erf monotone / erfc positive decreasing
    let mut worst = 0.0f64;
    let mut prev_erf = f64::NEG_INFINITY;
    let mut prev_erfc = f64::INFINITY;
    for i in 0..=200 {
        let z = -5.0 + i as f64 * 0.05;
        let e = crate::special::erf(z);
        let c = crate::special::erfc(z);
        if e < prev_erf {
            worst = worst.max(prev_erf - e);
        }
        if c > prev_erfc || c <= 0.0 {
            worst = worst.max(1.0);
        }
        prev_erf = e;
        prev_erfc = c;
    }
    b.push("special.erf_monotone", CheckKind::Reduction, worst, 0.0, "erf increasing, erfc positive decreasing");

    // normalizations at the given parameters
    let far = 20.0 * horizon.sqrt() + params.friction()?.abs() * horizon;
    let (neg, _) = quadrature::integrate_finite(
        |x| analytic::marginal_density(x, params).unwrap_or(0.0),
        -far,
        0.0,
        &spec,
    )?;
    let (pos, _) = quadrature::integrate_finite(
        |x| analytic::marginal_density(x, params).unwrap_or(0.0),
        0.0,
        far,
        &spec,
    )?;
    b.push("analytic.marginal_normalization", CheckKind::Normalization, (neg + pos - 1.0).abs(), 1e-8, "");

    let xl_mass = {
        let inner = |x: f64| {
            quadrature::integrate_semi_infinite(
                |l| analytic::joint_x_l(x, l, params).unwrap_or(0.0),
                0.0,
                &spec.loosened(0.1),
            )
            .map(|r| r.0)
            .unwrap_or(0.0)
        };
        let (neg, _) = quadrature::integrate_finite(&inner, -far, 0.0, &spec.loosened(10.0))?;
        let (pos, _) = quadrature::integrate_finite(&inner, 0.0, far, &spec.loosened(10.0))?;
        neg + pos
    };
    b.push("analytic.joint_x_l_normalization", CheckKind::Normalization, (xl_mass - 1.0).abs(), 1e-6, "");

    let ul_mass = occupation_mass(params, form)?;
    b.push("analytic.joint_u_l_normalization", CheckKind::Normalization, (ul_mass - 1.0).abs(), 1e-5,
        "2-D mass of the occupation/local-time joint");
    b.push("analytic.occupation_normalization", CheckKind::Normalization, (ul_mass - 1.0).abs(), 1e-5,
        "int_0^T occupation_density du, via the l-integral");

    let (lt_mass, _) = quadrature::integrate_semi_infinite(
        |l| analytic::local_time_density(l, params).unwrap_or(0.0),
        0.0,
        &spec,
    )?;
    b.push("analytic.local_time_normalization", CheckKind::Normalization, (lt_mass - 1.0).abs(), 1e-8, "");

    // marginal chain: int joint_x_l dl = marginal_density
    let mut worst = 0.0f64;
    for x in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        let (v, _) = quadrature::integrate_semi_infinite(
            |l| analytic::joint_x_l(x, l, params).unwrap_or(0.0),
            0.0,
            &spec,
        )?;
        worst = worst.max((v - analytic::marginal_density(x, params)?).abs());
    }
    b.push("analytic.marginal_chain", CheckKind::Consistency, worst, 1e-8, "l-integral of (X_T, L_T) joint");

    // occupation chain: iint joint_u_x_l dx dl = occupation_density
    let mut worst = 0.0f64;
    for frac in [0.25, 0.5, 0.8] {
        let u = frac * horizon;
        let (v, _) = quadrature::integrate_semi_infinite(
            |l| {
                let inner_neg = quadrature::integrate_finite(
                    |x| analytic::joint_u_x_l(u, x, l, params).unwrap_or(0.0),
                    -far,
                    0.0,
                    &spec.loosened(0.1),
                )
                .map(|r| r.0)
                .unwrap_or(0.0);
                let inner_pos = quadrature::integrate_finite(
                    |x| analytic::joint_u_x_l(u, x, l, params).unwrap_or(0.0),
                    0.0,
                    far,
                    &spec.loosened(0.1),
                )
                .map(|r| r.0)
                .unwrap_or(0.0);
                inner_neg + inner_pos
            },
            0.0,
            &spec.loosened(10.0),
        )?;
        worst = worst.max((v - analytic::occupation_density(u, params)?).abs());
    }
    b.push("analytic.occupation_chain", CheckKind::Consistency, worst, 1e-6, "x,l-integral of (U, X_T, L_T) joint");

    // cross-marginal: int_0^T joint_u_l du = local_time_density
    let mut worst = 0.0f64;
    for l in [0.2, 1.0, 3.0] {
        let l = l * horizon.sqrt();
        let (v, _) = quadrature::integrate_finite(
            |u| analytic::joint_u_l(u, l, params).unwrap_or(0.0),
            0.0,
            horizon,
            &spec.with_endpoint(EndpointStrategy::SqrtSingularity),
        )?;
        worst = worst.max((v - analytic::local_time_density(l, params)?).abs());
    }
    b.push("analytic.cross_marginal", CheckKind::Consistency, worst, 1e-6, "u-integral of (U, L_T) joint");

    // zero-drift reductions at (p, m) = (1/2, 0)
    let std_params = dry(0.5, 0.0, 1.0);
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let x = -4.0 + 0.08 * i as f64;
        let normal = crate::special::gaussian_pdf(1.0, x)?;
        worst = worst.max((analytic::marginal_density(x, &std_params)? - normal).abs());
    }
    b.push("analytic.zero_drift_normal", CheckKind::Reduction, worst, 1e-12, "N(0, T) marginal");

    let mut worst = 0.0f64;
    for i in 0..=20 {
        for j in 0..=20 {
            let x = -3.0 + 0.3 * i as f64;
            let l = 0.15 * j as f64;
            let levy = crate::special::fp_kernel(1.0, l + x.abs());
            worst = worst.max((analytic::joint_x_l(x, l, &std_params)? - levy).abs());
        }
    }
    b.push("analytic.zero_drift_levy", CheckKind::Reduction, worst, 1e-12, "h(T, l + |x|) joint");

    let mut worst = 0.0f64;
    for i in 1..=19 {
        let u = 0.05 * i as f64;
        let arcsine = 1.0 / (std::f64::consts::PI * (u * (1.0 - u)).sqrt());
        worst = worst.max((analytic::occupation_density(u, &std_params)? - arcsine).abs());
    }
    b.push("analytic.zero_drift_arcsine", CheckKind::Reduction, worst, 1e-6, "arcsine occupation law");

    // skew symmetry
    let mirrored = params.mirrored();
    let mut worst = 0.0f64;
    // Grid avoids x = 0: the density has a kink there and the one-sided
    // value differs between p and 1 - p by design.
    for i in 0..=40 {
        let x = (-2.05 + 0.1 * i as f64) * horizon.sqrt();
        worst = worst.max(
            (analytic::marginal_density(x, params)? - analytic::marginal_density(-x, &mirrored)?)
                .abs(),
        );
    }
    b.push("analytic.skew_symmetry_marginal", CheckKind::Reduction, worst, 1e-12, "f(x; p) = f(-x; 1-p)");

    let mut worst = 0.0f64;
    for frac in [0.15, 0.4, 0.65, 0.9] {
        let u = frac * horizon;
        worst = worst.max(
            (analytic::occupation_density(u, params)?
                - analytic::occupation_density(horizon - u, &mirrored)?)
            .abs(),
        );
    }
    b.push("analytic.skew_symmetry_occupation", CheckKind::Reduction, worst, 1e-8, "occ(u; p) = occ(T-u; 1-p)");

    // nonnegativity sweep
    let mut min_seen = 0.0f64;
    for &p in &[0.1, 0.5, 0.9] {
        for &m in &[0.0, 0.5, 2.0] {
            for &t in &[0.25, 1.0, 4.0] {
                let ps = dry(p, m, t);
                for i in 0..8 {
                    let x = (-2.1 + 0.6 * i as f64) * t.sqrt();
                    let l = 0.4 * i as f64 * t.sqrt();
                    let u = (0.115 * (i + 1) as f64) * t;
                    min_seen = min_seen
                        .min(analytic::marginal_density(x, &ps)?)
                        .min(analytic::joint_x_l(x, l, &ps)?)
                        .min(analytic::joint_u_l(u, l, &ps)?)
                        .min(analytic::local_time_density(l, &ps)?);
                }
            }
        }
    }
    b.push("analytic.nonnegativity", CheckKind::Reduction, (-min_seen).max(0.0), 0.0, "densities nonnegative on parameter grid");

    // erratum detection: verbatim printed form carries mass 2T at m = 0, p = 1/2
    let erratum_params = dry(0.5, 0.0, 1.0);
    let verbatim_mass = occupation_mass(&erratum_params, OccupationForm::Verbatim)?;
    let corrected_mass = occupation_mass(&erratum_params, OccupationForm::Corrected)?;
    b.push("analytic.pdf2_verbatim_mass_2t", CheckKind::Normalization,
        (verbatim_mass - 2.0 * erratum_params.horizon()).abs(), 1e-3,
        "published closed form integrates to 2T, not 1");
    b.push("analytic.pdf2_corrected_mass", CheckKind::Normalization,
        (corrected_mass - 1.0).abs(), 1e-5, "corrected form integrates to 1");

    Ok(())
}

/// Total mass of the occupation/local-time joint: the u-integral of the
/// l-integral, with the arcsine-type endpoint substitution in u.
pub fn occupation_mass(params: &ModelParams, form: OccupationForm) -> Result<f64> {
    let spec = QuadratureSpec::default();
    let horizon = params.horizon();
    let (mass, _) = quadrature::integrate_finite(
        |u| {
            if u <= 0.0 || u >= horizon {
                return 0.0;
            }
            analytic::occupation_density_with(u, params, form, &spec.loosened(0.1)).unwrap_or(0.0)
        },
        0.0,
        horizon,
        &spec.loosened(10.0).with_endpoint(EndpointStrategy::SqrtSingularity),
    )?;
    Ok(mass)
}

fn monte_carlo_checks(
    b: &mut Battery,
    params: &ModelParams,
    lattice: &LatticeConfig,
    _profile: Profile,
) -> Result<()> {
    let paths = simulate::simulate_paths(params, lattice)?;
    let n = paths.len() as f64;

    let mut xs: Vec<f64> = paths.iter().map(|f| f.x_t).collect();
    let cdf = marginal_cdf_fn(params)?;
    let ks_x = ks_distance(&mut xs, &cdf)?;
    b.push("simulate.ks_x", CheckKind::Ks, ks_x, 0.01, "empirical X_T vs marginal CDF");

    let occ_cdf = occupation_cdf_table(params, OccupationForm::Corrected)?;
    let mut us: Vec<f64> = paths.iter().map(|f| f.u).collect();
    let ks_u = ks_distance(&mut us, |u| occ_cdf.eval(u))?;
    b.push("simulate.ks_u", CheckKind::Ks, ks_u, 0.02, "empirical U vs occupation CDF");

    let lt_cdf = local_time_cdf_table(params)?;
    let mut ls: Vec<f64> = paths.iter().map(|f| f.l_t).collect();
    let ks_l = ks_distance(&mut ls, |l| lt_cdf.eval(l))?;
    b.push("simulate.ks_l", CheckKind::Ks, ks_l, 0.02, "empirical L_T (window estimator) vs local-time CDF");

    let mut lv: Vec<f64> = paths.iter().map(|f| f.l_t_visits).collect();
    let ks_lv = ks_distance(&mut lv, |l| lt_cdf.eval(l))?;
    b.push("simulate.ks_l_visits", CheckKind::Ks, ks_lv, 0.02, "empirical L_T (visit estimator) vs local-time CDF");

    let frac = paths.iter().filter(|f| f.x_t >= 0.0).count() as f64 / n;
    let se = (params.p() * params.q() / n).sqrt();
    b.push("simulate.sign_law", CheckKind::Consistency, (frac - params.p()).abs(), 3.0 * se + 0.01,
        "P(X_T >= 0) = p");

    // per-path invariant (asserted during simulation; re-checked here)
    let bad = paths
        .iter()
        .filter(|f| !(0.0 <= f.v && f.v <= f.tau && f.tau <= params.horizon() + 1e-9))
        .count();
    b.push("simulate.path_invariants", CheckKind::Consistency, bad as f64, 0.0, "0 <= v <= tau <= T on every path");

    // joint (x, l) structure against the analytic joint density
    let summary = simulate::summarize(params, lattice, &paths);
    let masses = cell_masses(
        |x, l| analytic::joint_x_l(x, l, params).unwrap_or(0.0),
        &summary.joint_x_l.x_edges,
        &summary.joint_x_l.y_edges,
        &QuadratureSpec::default().loosened(100.0),
    )?;
    let (stat, dof) = chi2_statistic(&summary.joint_x_l.counts, &masses, summary.n_paths)?;
    let pvalue = chi2_pvalue(stat, dof);
    b.push("simulate.joint_x_l_chi2", CheckKind::Chi2, 1.0 - pvalue, 0.99,
        &format!("stat {stat:.1}, dof {dof}; accept at 1% significance"));

    Ok(())
}

/// The Monte Carlo side of the misprint analysis: the `(U, L_T)`
/// histogram must fit the corrected joint and reject the verbatim one.
fn erratum_discrimination_checks(b: &mut Battery, lattice: &LatticeConfig) -> Result<()> {
    let params = dry(0.5, 0.5, 1.0);
    let paths = simulate::simulate_paths(&params, lattice)?;
    let summary = simulate::summarize(&params, lattice, &paths);
    let spec = QuadratureSpec::default().loosened(100.0);

    let corrected = cell_masses(
        |u, l| analytic::joint_u_l_form(u, l, &params, OccupationForm::Corrected).unwrap_or(0.0),
        &summary.joint_u_l.x_edges,
        &summary.joint_u_l.y_edges,
        &spec,
    )?;
    let (stat, dof) = chi2_statistic(&summary.joint_u_l.counts, &corrected, summary.n_paths)?;
    let p_corr = chi2_pvalue(stat, dof);
    b.push("simulate.erratum_chi2_corrected", CheckKind::Chi2, 1.0 - p_corr, 0.99,
        &format!("stat {stat:.1}, dof {dof}"));

    let verbatim = cell_masses(
        |u, l| analytic::joint_u_l_form(u, l, &params, OccupationForm::Verbatim).unwrap_or(0.0),
        &summary.joint_u_l.x_edges,
        &summary.joint_u_l.y_edges,
        &spec,
    )?;
    let (stat, dof) = chi2_statistic(&summary.joint_u_l.counts, &verbatim, summary.n_paths)?;
    let p_verb = chi2_pvalue(stat, dof);
    b.push("simulate.erratum_chi2_verbatim", CheckKind::Chi2, p_verb, 1e-6,
        &format!("stat {stat:.1}, dof {dof}; published form must be rejected"));

    Ok(())
}

fn weak_convergence_check(b: &mut Battery, lattice: &LatticeConfig) -> Result<()> {
    let mut worst = f64::NEG_INFINITY;
    for (p, m) in [(0.5, 0.0), (0.7, 0.5), (0.3, 1.0)] {
        let params = dry(p, m, 1.0);
        let cdf = marginal_cdf_fn(&params)?;
        let coarse = LatticeConfig {
            delta: lattice.delta * 2.0,
            ..*lattice
        };
        let mut xs: Vec<f64> = simulate::simulate_paths(&params, &coarse)?
            .iter()
            .map(|f| f.x_t)
            .collect();
        let ks_coarse = ks_distance(&mut xs, &cdf)?;
        let mut xs: Vec<f64> = simulate::simulate_paths(&params, lattice)?
            .iter()
            .map(|f| f.x_t)
            .collect();
        let ks_fine = ks_distance(&mut xs, &cdf)?;
        worst = worst.max(ks_fine - ks_coarse);
    }
    let noise = 3.0 * 1.36 / (lattice.path_budget as f64).sqrt();
    b.push("simulate.weak_convergence", CheckKind::Ks, worst, noise,
        "KS shrinks when delta halves, within sampling noise");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_perfectly_placed_sample_is_small() {
        let n = 1000;
        // quantiles of U(0,1) at ranks (i - 0.5)/n
        let mut sample: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&mut sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.5 / n as f64 + 1e-12, "d = {d}");
    }

    #[test]
    fn ks_of_constant_sample_at_median() {
        let mut sample = vec![0.5; 100];
        let d = ks_distance(&mut sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(ks_distance(&mut [], |_| 0.5).is_err());
    }

    #[test]
    fn ks_uniform_draws_under_critical_value() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut passes = 0;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 100_000;
            let mut sample: Vec<f64> =
                (0..n).map(|_| rng.next_u64() as f64 / u64::MAX as f64).collect();
            let d = ks_distance(&mut sample, |x| x.clamp(0.0, 1.0)).unwrap();
            if d < 1.36 / (n as f64).sqrt() {
                passes += 1;
            }
        }
        assert!(passes >= 90, "only {passes}/100 under the KS critical value");
    }

    #[test]
    fn chi2_statistic_basics() {
        // observed exactly n * expected -> 0
        let masses = vec![0.25; 4];
        let (stat, dof) = chi2_statistic(&[25, 25, 25, 25], &masses, 100).unwrap();
        assert_eq!(stat, 0.0);
        assert_eq!(dof, 3);
        // one unit moved between two equal cells of expectation E -> 2/E
        let (stat, _) = chi2_statistic(&[51, 49], &[0.5, 0.5], 100).unwrap();
        assert!((stat - 2.0 / 50.0).abs() < 1e-12);
        // all cells merged away
        assert!(chi2_statistic(&[1, 0], &[0.001, 0.001], 100).is_err());
    }

    #[test]
    fn chi2_multinomial_calibration() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let cells = 50;
        let n = 100_000u64;
        let masses = vec![1.0 / cells as f64; cells];
        let mut ok = 0;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 1000);
            let mut counts = vec![0u64; cells];
            for _ in 0..n {
                counts[(rng.next_u64() % cells as u64) as usize] += 1;
            }
            let (stat, dof) = chi2_statistic(&counts, &masses, n).unwrap();
            let dof = dof as f64;
            if (stat - dof).abs() <= 4.0 * (2.0 * dof).sqrt() {
                ok += 1;
            }
        }
        assert!(ok >= 99, "chi2 stat outside moment band in {} of 100 seeds", 100 - ok);
    }

    #[test]
    fn gamma_q_known_values() {
        // chi2 with 2 dof: Q = exp(-x/2)
        for x in [0.5, 2.0, 10.0] {
            assert!((chi2_pvalue(x, 2) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
        // chi2 with 1 dof: Q = erfc(sqrt(x/2))
        for x in [0.5, 4.0] {
            let expect = crate::special::erfc((x / 2.0f64).sqrt());
            assert!((chi2_pvalue(x, 1) - expect).abs() < 1e-12);
        }
        assert!((gamma_q(2.5, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cdf_table_matches_closed_form() {
        let table = CdfTable::from_density(
            |x| crate::special::gaussian_pdf(1.0, x).unwrap(),
            -8.0,
            8.0,
            400,
        );
        // piecewise-linear interpolation carries O(h^2) error between nodes
        for z in [-2.0, -0.5, 0.0, 1.0, 2.5] {
            let exact = crate::special::normal_cdf(z);
            assert!((table.eval(z) - exact).abs() < 1e-4, "z = {z}");
        }
        assert!((table.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn occupation_cdf_arcsine() {
        let params = ModelParams::dry_friction(0.5, 0.0, 1.0).unwrap();
        let table = occupation_cdf_table(&params, OccupationForm::Corrected).unwrap();
        for u in [0.1f64, 0.3, 0.5, 0.8] {
            let exact = 2.0 / std::f64::consts::PI * (u.sqrt()).asin();
            assert!(
                (table.eval(u) - exact).abs() < 1e-4,
                "u = {u}: table {} vs exact {exact}",
                table.eval(u)
            );
        }
    }

    #[test]
    fn report_round_trips() {
        let report = ValidationReport {
            profile: Profile::Ci,
            params: ModelParams::dry_friction(0.5, 0.0, 1.0).unwrap(),
            lattice: LatticeConfig::default(),
            occupation_form: OccupationForm::Corrected,
            checks: vec![CheckResult {
                name: "x".into(),
                kind: CheckKind::Ks,
                observed: 0.5,
                threshold: 1.0,
                pass: true,
                note: String::new(),
            }],
        };
        let json = serde_json::to_string(&report).unwrap();
        let back: ValidationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        assert!(report.render_table().contains("PASS"));
    }
}
