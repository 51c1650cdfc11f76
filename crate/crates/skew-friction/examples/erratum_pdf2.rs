//! The misprint in the published (U, L_T) joint density, demonstrated
//! three ways: total mass, a known closed-form slice, and Monte Carlo.
//!
//! The published closed form drops two first-passage factors that its
//! own derivation produces. As printed it integrates to 2T instead
//! of 1. Restoring the factors fixes the normalization and matches
//! simulation; this crate ships both forms so the discrepancy stays
//! reproducible.
//!
//! Run with: cargo run --release --example erratum_pdf2

use skew_friction::analytic::{self, OccupationForm};
use skew_friction::model::ModelParams;
use skew_friction::simulate::{self, LatticeConfig};
use skew_friction::validate::{self, cell_masses, chi2_pvalue, chi2_statistic};

fn main() -> skew_friction::Result<()> {
    // 1. total mass at m = 0, p = 1/2, T = 1
    let flat = ModelParams::dry_friction(0.5, 0.0, 1.0)?;
    let verbatim = validate::occupation_mass(&flat, OccupationForm::Verbatim)?;
    let corrected = validate::occupation_mass(&flat, OccupationForm::Corrected)?;
    println!("total mass of the (U, L_T) joint at p = 1/2, m = 0, T = 1:");
    println!("  as printed: {verbatim:.6}   (2T, not a probability density)");
    println!("  corrected:  {corrected:.6}");
    println!();

    // 2. the corrected form reproduces the known zero-drift closed form
    // l T / (4 pi) * exp(-l^2 T / (8 u (T-u))) / (u (T-u))^{3/2}
    let (u, l) = (0.5, 1.0);
    let exact = l / (4.0 * std::f64::consts::PI)
        * (-l * l / (8.0 * u * (1.0 - u))).exp()
        / (u * (1.0 - u)).powf(1.5);
    println!("zero-drift joint at (u, l) = ({u}, {l}):");
    println!("  closed form: {exact:.10}");
    println!("  corrected:   {:.10}", analytic::joint_u_l_form(u, l, &flat, OccupationForm::Corrected)?);
    println!("  as printed:  {:.10}", analytic::joint_u_l_form(u, l, &flat, OccupationForm::Verbatim)?);
    println!();

    // 3. Monte Carlo chi-square at (p, m) = (0.5, 0.5): the data accept
    // the corrected form and crush the printed one
    let params = ModelParams::dry_friction(0.5, 0.5, 1.0)?;
    // Fine lattice, moderate sample: the O(delta) estimator bias must
    // stay below chi-square resolution or even the correct density gets
    // rejected, while the factor-2 defect needs no sample size at all.
    let config = LatticeConfig {
        delta: 0.005,
        path_budget: 20_000,
        ..LatticeConfig::default()
    };
    println!("simulating {} paths for the (U, L_T) histogram...", config.path_budget);
    let paths = simulate::simulate_paths(&params, &config)?;
    let summary = simulate::summarize(&params, &config, &paths);
    let spec = skew_friction::QuadratureSpec::default().loosened(100.0);
    for form in [OccupationForm::Corrected, OccupationForm::Verbatim] {
        let masses = cell_masses(
            |uu, ll| analytic::joint_u_l_form(uu, ll, &params, form).unwrap_or(0.0),
            &summary.joint_u_l.x_edges,
            &summary.joint_u_l.y_edges,
            &spec,
        )?;
        let (stat, dof) = chi2_statistic(&summary.joint_u_l.counts, &masses, summary.n_paths)?;
        println!(
            "  {form:?}: chi2 = {stat:.1} on {dof} dof, p-value = {:.3e}",
            chi2_pvalue(stat, dof)
        );
    }
    Ok(())
}
