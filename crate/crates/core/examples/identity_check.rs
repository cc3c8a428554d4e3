//! Residuals of the curvature identities for a few connections on one fixture.

use papm::chart::ChartManifold;
use papm::connection::ConnectionParams;
use papm::identities::{
    verify_decomposition, verify_nabla_q, verify_ricci_scalar, verify_theta_derivatives,
    verify_torsion_curvature, Ingredients,
};

fn main() -> papm::Result<()> {
    let m = ChartManifold::conformal_product(2, |x| Ok(x[0] + x[2] * x[2]))?;
    let u = [0.2, 0.1, -0.3, 0.4];
    println!(
        "{:<18} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "connection", "torsion", "∇'Q", "R - R'", "τ", "θ-derivs"
    );
    for cp in [
        ConnectionParams::new(0.0, 0.0),
        ConnectionParams::new(0.0, -0.125),
        ConnectionParams::new(0.7, -0.4),
    ] {
        let ing = Ingredients::compute(&m, &u, cp)?;
        println!(
            "{:<18} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
            cp.to_string(),
            verify_torsion_curvature(&ing),
            verify_nabla_q(&ing),
            verify_decomposition(&ing),
            verify_ricci_scalar(&ing).tau,
            verify_theta_derivatives(&ing),
        );
    }
    Ok(())
}
