//! Tabulate the marginal law of X_T and show the sign law P(X_T >= 0) = p.
//!
//! Run with: cargo run --example marginal_density

use skew_friction::analytic;
use skew_friction::model::ModelParams;

fn main() -> skew_friction::Result<()> {
    let params = ModelParams::dry_friction(0.7, 0.5, 1.0)?;
    println!("skew p = {}, friction m = {}, horizon T = {}", params.p(), 0.5, params.horizon());
    println!();
    println!("{:>8} {:>12} {:>12}", "x", "density", "cdf");
    for i in 0..=16 {
        let x = -4.0 + 0.5 * i as f64;
        println!(
            "{:>8.2} {:>12.6} {:>12.6}",
            x,
            analytic::marginal_density(x, &params)?,
            analytic::marginal_cdf(x, &params)?
        );
    }
    println!();

    // the mass on the nonnegative half-line is exactly p, whatever the
    // friction level
    for m in [0.0, 0.5, 2.0] {
        let params = ModelParams::dry_friction(0.7, m, 1.0)?;
        let sign_mass = 1.0 - analytic::marginal_cdf(0.0, &params)?;
        println!("m = {m}: P(X_T >= 0) = {sign_mass:.12}");
    }

    // the density has a kink at the origin: the one-sided values differ
    // by the factor p/q
    let params = ModelParams::dry_friction(0.7, 0.5, 1.0)?;
    let above = analytic::marginal_density(0.0, &params)?;
    let below = analytic::marginal_density(-1e-12, &params)?;
    println!();
    println!("density just above 0: {above:.6}");
    println!("density just below 0: {below:.6}  (ratio {:.4} = p/q)", above / below);
    Ok(())
}
