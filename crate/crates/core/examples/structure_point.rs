//! Build a random W1 point, recover θ from its fundamental tensor and classify it.

use papm::random::random_point;
use papm::structure::{build_f, check_f_properties, class_flags, validate};
use papm::tensor::trace_contract;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> papm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pt = random_point(2, &mut rng);
    println!("violations: {:?}", validate(&pt));
    let f = build_f(&pt);
    println!("F-identity violations: {:?}", check_f_properties(&f, &pt.p));
    let theta = trace_contract(&f, &pt.g_inv()?)?;
    println!("θ recovered to {:.1e}", theta.max_abs_diff(&pt.theta));

    let odd = pt.with_theta((&pt.theta - &pt.theta_p()).scale(0.5));
    println!("random θ:  {:?}", class_flags(&pt, 1e-8)?.theta_parity);
    println!("odd part:  {:?}", class_flags(&odd, 1e-8)?.theta_parity);
    Ok(())
}
