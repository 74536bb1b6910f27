//! Equivariance of the flat quantization under the projective symmetry
//! algebra, and its falsification under coefficient mutations.
//!
//! The flat chart carries `m^2 + 2m` polynomial symmetry fields (constant,
//! linear and quadratic). The residual `L_X Q(S) - Q(L_X S)` vanishes
//! identically for every generator exactly when the coefficient table
//! satisfies its recurrence; bumping any coefficient is detected by some
//! quadratic generator.

use cartanq::exact::rational::{int, rat};
use cartanq::quantization::{
    flat_equivariance_residual, projective_vector_fields, table_for, Weights,
};
use cartanq::verify::random_symbol;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cartanq::Result<()> {
    let m = 2;
    let k = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = Weights::new(rat(1, 2), rat(9, 10));
    let s = random_symbol(&mut rng, m, k, w.delta());
    let table = table_for(m, k, &w)?;

    let fields = projective_vector_fields(m);
    println!(
        "generators: {} (expected m^2 + 2m = {})",
        fields.len(),
        m * m + 2 * m
    );
    for (i, x) in fields.iter().enumerate() {
        let r = flat_equivariance_residual(&w, &s, x, &table)?;
        println!(
            "  generator {i:2}: residual identically zero: {}",
            r.is_zero()
        );
    }

    println!("\nmutations of the coefficient table:");
    let quadratic = &fields[m + m * m..];
    for l in 0..=k {
        let mut bad = table.clone();
        bad.c[l] += int(1);
        let detected = quadratic.iter().any(|x| {
            flat_equivariance_residual(&w, &s, x, &bad)
                .map(|r| !r.is_zero())
                .unwrap_or(true)
        });
        println!("  C[{l}] + 1: detected by a quadratic generator: {detected}");
    }
    Ok(())
}
