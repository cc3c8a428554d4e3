//! Torsion and transformation tensors of the named connections at one point.

use papm::connection::{connection_increment, discriminant, q_tensor, torsion, NamedConnection};
use papm::random::random_point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> papm::Result<()> {
    let pt = random_point(2, &mut ChaCha8Rng::seed_from_u64(1));
    for named in [
        NamedConnection::D,
        NamedConnection::DTilde,
        NamedConnection::Canonical,
    ] {
        let cp = named.params(2);
        println!(
            "{:<10} {cp}  Δ = {:+.4}  |T| = {:.3}  |Q| = {:.3}",
            named.name(),
            discriminant(cp, 2),
            torsion(&pt, cp).max_abs(),
            q_tensor(&pt, cp).max_abs(),
        );
    }
    let [d, dt, c] = [
        NamedConnection::D,
        NamedConnection::DTilde,
        NamedConnection::Canonical,
    ]
    .map(|k| connection_increment(&pt, k.params(2)).map(|q| q.components()));
    let mid = (&d? + &dt?).scale(0.5);
    println!("canonical is the midpoint: {:.1e}", mid.max_abs_diff(&c?));
    Ok(())
}
