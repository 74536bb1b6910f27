//! Constructing the normal Cartan data of a polynomial connection.
//!
//! Solves the trace condition for the correction tensor `P`, prints it, and
//! verifies the two normality postconditions on the graded curvature: the
//! torsion component vanishes and the `g_0` trace vanishes, both as exact
//! polynomial identities.

use cartanq::exact::poly::Poly;
use cartanq::geometry::{cartan_curvature, curvature, normal_cartan, ricci, ChristoffelField};

fn main() -> cartanq::Result<()> {
    let m = 2;
    // Gamma^1_{11} = x2, Gamma^2_{12} = Gamma^2_{21} = x1 x2, rest zero
    let g = ChristoffelField::from_fn(m, |i, j, k| match (i, j, k) {
        (0, 0, 0) => Poly::var(4, 1),
        (1, 0, 1) | (1, 1, 0) => &Poly::var(4, 0) * &Poly::var(4, 1),
        _ => Poly::zero(4),
    })?;

    let ric = ricci(&curvature(&g));
    println!("Ricci tensor:");
    for (j, row) in ric.iter().enumerate() {
        for (l, e) in row.iter().enumerate() {
            println!("  Ric[{}][{}] = {e}", j + 1, l + 1);
        }
    }

    let nc = normal_cartan(&g)?;
    println!("\ncorrection tensor P:");
    for (j, row) in nc.p_tensor.iter().enumerate() {
        for (l, e) in row.iter().enumerate() {
            println!("  P[{}][{}] = {e}", j + 1, l + 1);
        }
    }

    let om = cartan_curvature(&nc);
    println!(
        "\ntorsion component identically zero: {}",
        om.minus_one.iter().all(Poly::is_zero)
    );
    println!(
        "g0 curvature trace identically zero: {}",
        om.zero_trace().iter().flatten().all(Poly::is_zero)
    );
    println!(
        "g1 curvature vanishes identically:   {}",
        om.one.iter().all(Poly::is_zero)
    );
    Ok(())
}
