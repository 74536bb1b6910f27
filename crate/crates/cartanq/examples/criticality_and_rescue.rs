//! Critical shifts and the rescue dichotomy.
//!
//! Scans which `(k, l)` pairs obstruct the coefficient formula for a few
//! shift values, then shows the two sides of the critical case at
//! `delta = 1, k = 1`: the argument weight `lambda = 0` admits a rescued
//! table with a zeroed tail, while `lambda = 1/3` admits no equivariant
//! quantization at all.

use cartanq::exact::rational::{int, rat};
use cartanq::quantization::{critical_pairs, rescue_table, RescueOutcome, Weights};

fn main() {
    let m = 2;
    for delta in [int(0), int(1), rat(5, 3), int(2)] {
        let pairs = critical_pairs(m, 4, &delta);
        println!("delta = {delta}: critical pairs up to k = 4: {pairs:?}");
    }

    println!("\ncritical case delta = 1, k = 1:");
    for lambda in [int(0), rat(1, 3)] {
        let w = Weights::new(lambda.clone(), &lambda + &int(1));
        match rescue_table(m, 1, &w) {
            RescueOutcome::Rescued(t) => println!(
                "  lambda = {lambda}: rescued table {:?}, zeroed from index {:?}",
                t.c.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                t.zeroed_from
            ),
            RescueOutcome::NoExistence { admissible_lambdas } => println!(
                "  lambda = {lambda}: no equivariant quantization (admissible lambdas: {:?})",
                admissible_lambdas
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
            ),
        }
    }
}
