//! Predicted versus numerical P-tensor verdicts on the two catalog fixtures.

use papm::chart::{ChartManifold, Connection};
use papm::classify::{classify_connection, ClosednessEvidence};
use papm::connection::NamedConnection;
use papm::structure::curvature_residual;

fn main() -> papm::Result<()> {
    let points = [[0.1, -0.2, 0.3, 0.05], [-0.3, 0.2, 0.0, 0.4]];
    for (name, w) in [
        (
            "w = x1*x3",
            (|x: &[f64]| Ok(x[0] * x[2])) as fn(&[f64]) -> papm::Result<f64>,
        ),
        ("w = x1 + x3^2", |x: &[f64]| Ok(x[0] + x[2] * x[2])),
    ] {
        let m = ChartManifold::conformal_product(2, w)?;
        let res: Vec<_> = points
            .iter()
            .map(|u| m.closedness_residuals(u))
            .collect::<papm::Result<_>>()?;
        let ev = ClosednessEvidence::aggregate(res, 1e-6);
        println!(
            "{name}: θ closed {}, θ∘P closed {}",
            ev.theta_closed, ev.theta_p_closed
        );
        for named in [
            NamedConnection::D,
            NamedConnection::DTilde,
            NamedConnection::Canonical,
        ] {
            let cp = named.params(2);
            let v = classify_connection(cp, 2, &ev);
            let mut worst = 0.0f64;
            for u in &points {
                let r = m.curvature(u, Connection::Natural(cp))?.r;
                worst = worst.max(curvature_residual(&r, &m.structure_at(u)?).p_tensor());
            }
            println!(
                "  {:<10} clause {:?}: expected {}, residual {:.2e}",
                named.name(),
                v.clause,
                v.p_tensor_expected,
                worst
            );
        }
    }
    Ok(())
}
