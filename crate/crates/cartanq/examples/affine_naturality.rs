//! Naturality of the quantization under affine chart changes.
//!
//! Transporting the connection, the symbol and the densities through
//! `x -> A x + b` and quantizing commutes with transporting the operator.
//! Density factors are exact rational powers of `|det A|`, so the whole
//! comparison is structural equality.

use cartanq::affine::AffineMap;
use cartanq::exact::rational::{int, rat};
use cartanq::quantization::{quantize, Weights};
use cartanq::verify::{random_connection, random_symbol};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cartanq::Result<()> {
    let m = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(23);

    // a unimodular shear with a shift
    let phi = AffineMap::new(
        m,
        vec![vec![int(1), rat(1, 2)], vec![int(1), rat(3, 2)]],
        vec![int(1), rat(-1, 3)],
    )?;
    let w = Weights::new(rat(1, 3), rat(2, 3));
    let g = random_connection(&mut rng, m, 1);
    for k in 0..=2usize {
        let s = random_symbol(&mut rng, m, k, w.delta());
        let lhs = quantize(&phi.pullback_connection(&g)?, &phi.pullback_symbol(&s)?, &w)?;
        let rhs = phi.pullback_operator(&quantize(&g, &s, &w)?)?;
        println!(
            "unimodular map, order {k}: transported operators equal: {}",
            lhs == rhs
        );
    }

    // |det A| = 4 needs weights whose powers of 4 stay rational
    let scale = AffineMap::new(
        m,
        vec![vec![int(2), int(0)], vec![int(1), int(2)]],
        vec![int(0), int(1)],
    )?;
    let w = Weights::new(rat(1, 2), rat(3, 2));
    let s = random_symbol(&mut rng, m, 2, w.delta());
    let lhs = quantize(
        &scale.pullback_connection(&g)?,
        &scale.pullback_symbol(&s)?,
        &w,
    )?;
    let rhs = scale.pullback_operator(&quantize(&g, &s, &w)?)?;
    println!(
        "|det| = 4 map, order 2: transported operators equal: {}",
        lhs == rhs
    );
    Ok(())
}
