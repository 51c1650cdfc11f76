//! The law of the symmetric local time at the origin, and its striking
//! independence from the skew parameter.
//!
//! Run with: cargo run --example local_time

use skew_friction::analytic;
use skew_friction::model::ModelParams;

fn main() -> skew_friction::Result<()> {
    // friction concentrates local time: mass shifts toward larger L_T
    // because the path is pushed back to the origin
    println!("{:>6} {:>12} {:>12} {:>12}", "l", "m=0", "m=0.5", "m=2");
    let ms = [0.0, 0.5, 2.0];
    for i in 0..=12 {
        let l = 0.25 * i as f64;
        print!("{l:>6.2}");
        for &m in &ms {
            let params = ModelParams::dry_friction(0.5, m, 1.0)?;
            print!(" {:>12.6}", analytic::local_time_density(l, &params)?);
        }
        println!();
    }
    println!();

    // the local-time marginal does not depend on p at all: excursion
    // signs change where the path goes, not how long it sits at zero
    for p in [0.1, 0.5, 0.9] {
        let params = ModelParams::dry_friction(p, 0.5, 1.0)?;
        println!("p = {p}: density at l = 1 is {:.12}", analytic::local_time_density(1.0, &params)?);
    }
    println!();

    // zero-drift anchor: L_T has the half-normal law, E[L_T] = sqrt(2T/pi)
    let params = ModelParams::dry_friction(0.5, 0.0, 1.0)?;
    let expect = (2.0 / std::f64::consts::PI).sqrt();
    let at_zero = analytic::local_time_density(0.0, &params)?;
    println!("half-normal check at m = 0:");
    println!("  density at l = 0: {at_zero:.10} (2 phi(0) = {:.10})", 2.0 * 0.3989422804014327);
    println!("  E[L_T] = sqrt(2T/pi) = {expect:.10}");
    Ok(())
}
