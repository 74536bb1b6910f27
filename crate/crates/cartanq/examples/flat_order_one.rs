//! First-order quantization on the flat chart.
//!
//! For a degree-1 symbol the operator comes out in closed form:
//! `f -> S^i d_i f + lambda/(1 - delta) (d_i S^i) f`. This example builds it
//! through the full pipeline and prints both the coefficient table and the
//! operator, so the closed form can be read off.

use cartanq::algebra::ValueSpec;
use cartanq::exact::poly::Poly;
use cartanq::exact::rational::rat;
use cartanq::fiber::FiberFunction;
use cartanq::geometry::ChristoffelField;
use cartanq::quantization::{quantize, table_for, Weights};

fn main() -> cartanq::Result<()> {
    let m = 2;
    let w = Weights::new(rat(1, 2), rat(7, 10)); // lambda = 1/2, delta = 1/5
    let flat = ChristoffelField::flat(m)?;

    // S = x2^2 e_1 + x1 x2 e_2, with divergence x1
    let s = FiberFunction::from_fn(m, ValueSpec::symbol(1, w.delta()), |_, con| match con {
        [0] => &Poly::var(4, 1) * &Poly::var(4, 1),
        [1] => &Poly::var(4, 0) * &Poly::var(4, 1),
        _ => unreachable!(),
    });

    let table = table_for(m, 1, &w)?;
    println!(
        "coefficients C_{{1,l}}: {:?}",
        table.c.iter().map(|c| c.to_string()).collect::<Vec<_>>()
    );
    println!(
        "expected C_{{1,1}} = lambda/(1-delta) = {}",
        rat(1, 2) / rat(4, 5)
    );

    let q = quantize(&flat, &s, &w)?;
    println!("\noperator terms (multi-index -> coefficient):");
    for (alpha, c) in q.terms() {
        println!("  {alpha:?} -> {c}");
    }

    // apply to f = x1: S^1 + C_{1,1} (div S) x1
    let f = Poly::var(4, 0);
    println!("\nQ(S)(x1) = {}", q.apply(&f));
    Ok(())
}
