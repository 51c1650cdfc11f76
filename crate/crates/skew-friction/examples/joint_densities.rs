//! The ladder of joint laws: from the four-variable (tau, V, X_T, L_T)
//! density down to the two-variable marginals, with the marginalization
//! steps checked numerically along the way.
//!
//! Run with: cargo run --example joint_densities

use skew_friction::analytic;
use skew_friction::model::ModelParams;
use skew_friction::quadrature::{self, EndpointStrategy, QuadratureSpec};

fn main() -> skew_friction::Result<()> {
    let params = ModelParams::dry_friction(0.6, 0.5, 1.0)?;
    let spec = QuadratureSpec::default();

    let (t, v, x, l) = (0.6, 0.25, 0.4, 0.8);
    println!("joint_tau_v_x_l({t}, {v}, {x}, {l}) = {:.8}", analytic::joint_tau_v_x_l(t, v, x, l, &params)?);
    println!("joint_tau_x_l({t}, {x}, {l})       = {:.8}", analytic::joint_tau_x_l(t, x, l, &params)?);
    println!("joint_x_l({x}, {l})              = {:.8}", analytic::joint_x_l(x, l, &params)?);
    println!("joint_u_x_l(0.5, {x}, {l})       = {:.8}", analytic::joint_u_x_l(0.5, x, l, &params)?);
    println!("joint_u_l(0.5, {l})              = {:.8}", analytic::joint_u_l(0.5, l, &params)?);
    println!();

    // integrating out the pre-tau occupation V recovers the (tau, X, L) law
    let (got, _) = quadrature::integrate_finite(
        |vv| analytic::joint_tau_v_x_l(t, vv, x, l, &params).unwrap_or(0.0),
        0.0,
        t,
        &spec.with_endpoint(EndpointStrategy::SqrtSingularity),
    )?;
    println!("int_0^t joint_tau_v_x_l dv = {got:.10}");
    println!("joint_tau_x_l              = {:.10}", analytic::joint_tau_x_l(t, x, l, &params)?);
    println!();

    // integrating out the last visit recovers the (X, L) law
    let (got, _) = quadrature::integrate_finite(
        |tt| analytic::joint_tau_x_l(tt, x, l, &params).unwrap_or(0.0),
        0.0,
        1.0,
        &spec.with_endpoint(EndpointStrategy::SqrtSingularity),
    )?;
    println!("int_0^T joint_tau_x_l dt = {got:.10}");
    println!("joint_x_l                = {:.10}", analytic::joint_x_l(x, l, &params)?);
    println!();

    // the general two-valued drift joint accepts m1 != m2; dry friction
    // is the symmetric special case
    let general = ModelParams::general(0.6, 0.3, 0.9, 1.0)?;
    println!("general drift (m1 = 0.3, m2 = 0.9):");
    println!("joint_tau_v_x_l({t}, {v}, {x}, {l}) = {:.8}", analytic::joint_tau_v_x_l(t, v, x, l, &general)?);
    // the reduced chains require dry friction and say so
    match analytic::marginal_density(x, &general) {
        Err(e) => println!("marginal under general drift: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
