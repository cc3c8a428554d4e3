//! Curvature of the Levi-Civita connection and of a natural connection on a chart.

use papm::chart::{ChartManifold, Connection};
use papm::connection::NamedConnection;
use papm::structure::curvature_residual;

fn main() -> papm::Result<()> {
    let m = ChartManifold::conformal_product(2, |x| Ok(x[0] * x[2]))?;
    let u = [0.1, -0.2, 0.3, 0.05];
    println!("W1 residual: {:.2e}", m.w1_residual(&u)?);
    println!("θ = {:?}", m.theta_at(&u)?.as_slice());
    let lc = m.curvature(&u, Connection::LeviCivita)?;
    println!("τ (Levi-Civita) = {:.6}", lc.tau);
    for named in [NamedConnection::D, NamedConnection::Canonical] {
        let conn = Connection::Natural(named.params(2));
        let k = m.curvature(&u, conn)?;
        let r = curvature_residual(&k.r, &m.structure_at(&u)?);
        let (ng, np) = m.naturality_residuals(&u, conn)?;
        println!(
            "{:<10} P-tensor residual {:.2e} (Bianchi {:.2e}); |∇'g| {:.1e}, |∇'P| {:.1e}",
            named.name(),
            r.p_tensor(),
            r.bianchi,
            ng,
            np
        );
    }
    Ok(())
}
