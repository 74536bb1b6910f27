//! The invariant calculus on the trivialized bundle, step by step.
//!
//! Shows the solved frames (base, fiber and compensation parts), a first
//! invariant derivative of a lifted density with its fiber-dependent
//! compensation terms, the reduction to covariant derivatives at the fiber
//! origin, and a divergence.

use cartanq::algebra::ValueSpec;
use cartanq::calculus::{divergence, invariant_derivative, OmegaRealization};
use cartanq::exact::poly::Poly;
use cartanq::exact::rational::rat;
use cartanq::fiber::{lift, FiberFunction};
use cartanq::geometry::{normal_cartan, ChristoffelField};

fn main() -> cartanq::Result<()> {
    let m = 2;
    let g = ChristoffelField::from_fn(m, |i, j, k| {
        if (i, j, k) == (0, 0, 0) {
            Poly::var(4, 1)
        } else {
            Poly::zero(4)
        }
    })?;
    let nc = normal_cartan(&g)?;

    let om = OmegaRealization::new(&nc);
    println!("frame for direction 1:");
    let fr = om.direction(0);
    for (q, b) in fr.fiber.iter().enumerate() {
        println!("  fiber part b[{}] = {b}", q + 1);
    }
    for (i, row) in fr.compensation.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            println!("  compensation c[{}][{}] = {c}", i + 1, j + 1);
        }
    }

    let lambda = rat(1, 2);
    let f = lift(&FiberFunction::from_fn(
        m,
        ValueSpec::density(lambda),
        |_, _| &Poly::var(4, 0) * &Poly::var(4, 0),
    ))?;
    let d = invariant_derivative(&f, &nc);
    println!("\ninvariant derivative of the lifted density x1^2 (weight 1/2):");
    for j in 0..m {
        println!("  slot {}: {}", j + 1, d.component(&[j as u8], &[]));
    }
    println!("at the fiber origin:");
    let origin = d.at_fiber_origin();
    for j in 0..m {
        println!("  slot {}: {}", j + 1, origin.component(&[j as u8], &[]));
    }

    let s = FiberFunction::from_fn(m, ValueSpec::symbol(1, rat(1, 5)), |_, con| match con {
        [0] => Poly::var(4, 0),
        _ => Poly::var(4, 1),
    });
    let div = divergence(&s, &nc)?;
    println!(
        "\ndivergence of S = x1 e_1 + x2 e_2 at the fiber origin: {}",
        div.at_fiber_origin().component(&[], &[])
    );
    Ok(())
}
