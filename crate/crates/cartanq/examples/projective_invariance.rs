//! Invariance under projective changes of the connection.
//!
//! Shifting a connection along a one-form preserves its paths, and the
//! quantization only sees the path structure: the operators built from the
//! original and the shifted connection agree coefficient by coefficient.

use cartanq::exact::poly::Poly;
use cartanq::exact::rational::rat;
use cartanq::geometry::{projective_shift, OneForm};
use cartanq::quantization::{quantize, Weights};
use cartanq::verify::{random_connection, random_symbol};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cartanq::Result<()> {
    let m = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let w = Weights::new(rat(1, 2), rat(3, 4));
    let g = random_connection(&mut rng, m, 2);
    let alpha = OneForm::new(
        m,
        vec![Poly::var(4, 1), &Poly::var(4, 0) * &Poly::var(4, 0)],
    )?;
    let shifted = projective_shift(&g, &alpha);

    for k in 0..=2usize {
        let s = random_symbol(&mut rng, m, k, w.delta());
        let q1 = quantize(&g, &s, &w)?;
        let q2 = quantize(&shifted, &s, &w)?;
        println!("order {k}: operators identical: {}", q1 == q2);
    }
    Ok(())
}
