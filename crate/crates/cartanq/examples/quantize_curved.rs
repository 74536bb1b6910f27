//! Second-order quantization on a curved chart.
//!
//! Runs the full pipeline for a degree-2 symbol over a non-flat connection:
//! lifts the symbol, iterates the invariant divergence and derivative,
//! contracts, projects, and extracts the operator by monomial probing. The
//! principal symbol of the result is the input symbol, exactly.

use cartanq::algebra::ValueSpec;
use cartanq::exact::poly::Poly;
use cartanq::exact::rational::{int, rat};
use cartanq::fiber::FiberFunction;
use cartanq::geometry::ChristoffelField;
use cartanq::quantization::{principal_symbol, quantize, Weights};

fn main() -> cartanq::Result<()> {
    let m = 2;
    let w = Weights::new(rat(1, 3), rat(8, 15)); // delta = 1/5
    let g = ChristoffelField::from_fn(m, |i, j, k| match (i, j, k) {
        (0, 0, 0) => Poly::var(4, 1),
        (1, 0, 1) | (1, 1, 0) => Poly::var(4, 0).scale(&int(2)),
        _ => Poly::zero(4),
    })?;

    // S = e_1 e_1 + x1 e_1 e_2
    let s = FiberFunction::from_fn(m, ValueSpec::symbol(2, w.delta()), |_, con| match con {
        [0, 0] => Poly::one(4),
        [0, 1] => Poly::var(4, 0),
        _ => Poly::zero(4),
    });

    let q = quantize(&g, &s, &w)?;
    println!("order: {}", q.order());
    println!("operator terms:");
    for (alpha, c) in q.terms() {
        println!("  {alpha:?} -> {c}");
    }

    let sigma = principal_symbol(&q, 2);
    println!("\nprincipal symbol equals the input: {}", sigma == s);

    println!(
        "\nQ(S)(x1*x2) = {}",
        q.apply(&(&Poly::var(4, 0) * &Poly::var(4, 1)))
    );
    Ok(())
}
