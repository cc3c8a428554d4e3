//! Parallel torsion: the numerical equivalence with parallel θ, and the decision table.

use papm::chart::ChartManifold;
use papm::classify::classify_parallel_torsion;
use papm::connection::{w_bilinear, ConnectionParams};
use papm::identities::torsion_parallel_residual;
use papm::structure::class_flags;

fn main() -> papm::Result<()> {
    let m = ChartManifold::conformal_product(2, |x| Ok(x[0] * x[2]))?;
    let u = [0.1, -0.2, 0.3, 0.05];
    for cp in [
        ConnectionParams::new(0.0, 0.0),
        ConnectionParams::new(0.3, -0.1),
    ] {
        let (t, th) = torsion_parallel_residual(&m, &u, cp)?;
        println!("{cp}: |∇'T| = {t:.3e}, |∇'θ| = {th:.3e}");
    }
    let pt = m.point_of(&u)?;
    let flags = class_flags(&pt, 1e-8)?;
    let w = w_bilinear(&pt);
    for cp in [
        ConnectionParams::new(0.0, 0.0),
        ConnectionParams::new(0.0, -0.2),
        ConnectionParams::new(0.5, 0.0),
        ConnectionParams::new(0.5, -0.2),
    ] {
        let v = classify_parallel_torsion(cp, &w, &flags, 1e-10);
        println!(
            "{cp}: case {:?}, needs \"{}\", satisfied here: {}",
            v.case_id, v.requires, v.satisfied
        );
    }
    Ok(())
}
