//! Parse, print and evaluate field expressions, and build a chart from a spec.

use papm::dsl::{build_manifold, parse, FieldSpec};

fn main() -> papm::Result<()> {
    for src in [
        "x1*x3",
        "sin(x1)+x3^2",
        "-x1^2 / (1 + exp(x2))",
        "x1+*x2",
        "1/ (x1-x1)",
    ] {
        match parse(src) {
            Ok(e) => match e.eval(&[2.0, 0.0, 5.0, 0.0]) {
                Ok(v) => println!("{src:<24} → {e:<24} = {v}"),
                Err(err) => println!("{src:<24} → {e:<24} : {err}"),
            },
            Err(err) => println!("{src:<24} ✗ {err}"),
        }
    }
    let fs = FieldSpec::ConformalProduct {
        n: 2,
        u: parse("x1*x3")?,
    };
    let m = build_manifold(&fs, &[vec![0.1, 0.2, 0.3, 0.4]])?;
    println!(
        "θ at (0.1,0.2,0.3,0.4): {:?}",
        m.theta_at(&[0.1, 0.2, 0.3, 0.4])?.as_slice()
    );
    Ok(())
}
