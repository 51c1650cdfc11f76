//! Lattice Monte Carlo oracle: simulate the skew walk with drift and
//! compare its empirical CDFs against the closed forms.
//!
//! Run with: cargo run --release --example monte_carlo

use skew_friction::analytic;
use skew_friction::model::ModelParams;
use skew_friction::simulate::{self, LatticeConfig};
use skew_friction::validate::{self, ks_distance};

fn main() -> skew_friction::Result<()> {
    let params = ModelParams::dry_friction(0.7, 0.5, 1.0)?;
    let config = LatticeConfig {
        delta: 0.01,
        path_budget: 50_000,
        seed: 42,
        ..LatticeConfig::default()
    };
    println!(
        "simulating {} paths on a lattice with spacing {} ({} steps each)",
        config.path_budget,
        config.delta,
        config.steps(params.horizon())
    );
    let paths = simulate::simulate_paths(&params, &config)?;

    let frac = paths.iter().filter(|f| f.x_t >= 0.0).count() as f64 / paths.len() as f64;
    println!("P(X_T >= 0): empirical {frac:.4}, exact {}", params.p());

    let mut xs: Vec<f64> = paths.iter().map(|f| f.x_t).collect();
    let ks_x = ks_distance(&mut xs, |x| analytic::marginal_cdf(x, &params).unwrap())?;
    println!("KS distance, X_T vs closed-form CDF: {ks_x:.4}");

    let occ = validate::occupation_cdf_table(&params, skew_friction::OccupationForm::Corrected)?;
    let mut us: Vec<f64> = paths.iter().map(|f| f.u).collect();
    let ks_u = ks_distance(&mut us, |u| occ.eval(u))?;
    println!("KS distance, occupation time U:      {ks_u:.4}");

    let lt = validate::local_time_cdf_table(&params)?;
    let mut ls: Vec<f64> = paths.iter().map(|f| f.l_t).collect();
    let ks_l = ks_distance(&mut ls, |l| lt.eval(l))?;
    println!("KS distance, local time L_T:         {ks_l:.4}");

    // the two local-time estimators (epsilon-window occupation and
    // delta x zero-visit count) agree path by path up to lattice error
    let max_gap = paths
        .iter()
        .map(|f| (f.l_t - f.l_t_visits).abs())
        .fold(0.0f64, f64::max);
    println!("largest gap between the two local-time estimators: {max_gap:.4}");

    // per-path identity: U - V = (T - tau) on {X_T >= 0}, up to one step
    let dt = config.delta * config.delta;
    let bad = paths
        .iter()
        .filter(|f| {
            let rhs = if f.x_t >= 0.0 { params.horizon() - f.tau } else { 0.0 };
            (f.u - f.v - rhs).abs() > 2.0 * dt + 1e-12
        })
        .count();
    println!("paths violating the U - V = (T - tau) 1{{X_T >= 0}} identity: {bad}");

    // identical seed, identical run
    let rerun = simulate::simulate_paths(&params, &config)?;
    println!("re-simulation with the same seed is identical: {}", rerun == paths);
    Ok(())
}
