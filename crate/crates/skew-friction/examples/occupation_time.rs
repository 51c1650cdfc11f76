//! Occupation time of the nonnegative half-line: density across skew
//! and friction levels, with the arcsine law as the zero-drift anchor.
//!
//! Run with: cargo run --example occupation_time

use skew_friction::analytic;
use skew_friction::model::ModelParams;

fn main() -> skew_friction::Result<()> {
    // at p = 1/2, m = 0 the occupation time follows the arcsine law
    let flat = ModelParams::dry_friction(0.5, 0.0, 1.0)?;
    println!("{:>6} {:>12} {:>12}", "u", "density", "arcsine");
    for i in 1..=9 {
        let u = 0.1 * i as f64;
        let arcsine = 1.0 / (std::f64::consts::PI * (u * (1.0 - u)).sqrt());
        println!(
            "{:>6.2} {:>12.6} {:>12.6}",
            u,
            analytic::occupation_density(u, &flat)?,
            arcsine
        );
    }
    println!();

    // skewness tilts the U-shape; friction deepens the well because the
    // path keeps getting pulled back to the origin
    println!(
        "{:>6} {:>14} {:>14} {:>14}",
        "u", "p=0.7,m=0", "p=0.7,m=0.5", "p=0.3,m=0.5"
    );
    let configs = [
        ModelParams::dry_friction(0.7, 0.0, 1.0)?,
        ModelParams::dry_friction(0.7, 0.5, 1.0)?,
        ModelParams::dry_friction(0.3, 0.5, 1.0)?,
    ];
    for i in 1..=9 {
        let u = 0.1 * i as f64;
        print!("{u:>6.2}");
        for params in &configs {
            print!(" {:>14.6}", analytic::occupation_density(u, params)?);
        }
        println!();
    }
    println!();

    // the skew symmetry: occ(u; p) = occ(T - u; 1 - p)
    let params = ModelParams::dry_friction(0.7, 0.5, 1.0)?;
    let mirrored = params.mirrored();
    let a = analytic::occupation_density(0.3, &params)?;
    let b = analytic::occupation_density(0.7, &mirrored)?;
    println!("occ(0.3; p=0.7) = {a:.10}");
    println!("occ(0.7; p=0.3) = {b:.10}");
    Ok(())
}
