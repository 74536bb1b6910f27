//! The two commutator identities that pin every sign convention.
//!
//! For a lifted symbol `S` of degree `k` and weight `delta`, iterating the
//! invariant divergence and differentiating along a fundamental fiber
//! direction `h` commute up to an exact multiple of the contraction
//! `i(h)`; for a lifted density the analogous defect is a symmetric product
//! with `h`. Both operations assert their identities internally and return
//! the defect, so a successful run is the proof of consistency.

use cartanq::algebra::ValueSpec;
use cartanq::calculus::{derivative_commutator_defect, divergence_commutator_defect};
use cartanq::exact::rational::{int, rat};
use cartanq::fiber::FiberFunction;
use cartanq::geometry::normal_cartan;
use cartanq::verify::{random_base_poly, random_connection, random_symbol};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cartanq::Result<()> {
    let m = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let nc = normal_cartan(&random_connection(&mut rng, m, 1))?;
    let h = [int(2), rat(-1, 3)];

    let delta = rat(1, 5);
    for k in 1..=3usize {
        let s = random_symbol(&mut rng, m, k, delta.clone());
        for l in 1..=k {
            let defect = divergence_commutator_defect(&s, &h, l, &nc)?;
            println!(
                "divergence defect k={k} l={l}: identity holds, defect {} zero",
                if defect.is_zero() { "is" } else { "is not" }
            );
        }
    }

    let lambda = rat(1, 2);
    let f = FiberFunction::from_fn(m, ValueSpec::density(lambda), |_, _| {
        random_base_poly(&mut rng, m, 2)
    });
    for k in 0..=3usize {
        let defect = derivative_commutator_defect(&f, &h, k, &nc)?;
        println!(
            "derivative defect k={k}: identity holds, defect {} zero",
            if defect.is_zero() { "is" } else { "is not" }
        );
    }

    // at the critical weight the divergence defect vanishes outright
    let crit = rat((m + 2 * 2 - 1) as i64, (m + 1) as i64);
    let s = random_symbol(&mut rng, m, 2, crit);
    let defect = divergence_commutator_defect(&s, &h, 1, &nc)?;
    println!(
        "critical-weight divergence defect k=2 l=1: zero: {}",
        defect.is_zero()
    );
    Ok(())
}
