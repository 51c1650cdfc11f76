//! End-to-end validation report from the library API.
//!
//! Runs the same battery the `validate` CLI subcommand uses: analytic
//! self-consistency (normalizations, convolution identities, reductions
//! to the zero-drift special cases) plus Monte Carlo agreement at a
//! small lattice budget, and prints the check table.
//!
//! Run with: cargo run --release --example validation_report

use skew_friction::model::ModelParams;
use skew_friction::simulate::LatticeConfig;
use skew_friction::validate::{run_full_validation, Profile};
use skew_friction::OccupationForm;

fn main() -> skew_friction::Result<()> {
    let params = ModelParams::dry_friction(0.7, 0.5, 1.0)?;
    let lattice = LatticeConfig {
        delta: 0.02,
        path_budget: 10_000,
        ..LatticeConfig::default()
    };
    let report = run_full_validation(&params, &lattice, Profile::Ci, OccupationForm::Corrected)?;
    println!("{}", report.render_table());
    println!(
        "overall: {} ({} checks)",
        if report.all_pass() { "PASS" } else { "FAIL" },
        report.checks.len()
    );
    println!();
    println!(
        "Monte Carlo thresholds assume a generous budget; at {} paths and",
        lattice.path_budget
    );
    println!("delta = {} a KS check can land above its line without", lattice.delta);
    println!("indicating a defect. The analytic checks must always pass.");
    Ok(())
}
