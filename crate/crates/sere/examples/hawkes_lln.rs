//! Event-rate law of large numbers: N(T)/T approaches
//! lambda/(1 - alpha/beta) for the exponential-kernel Hawkes process.

use sere::{simulate_hawkes, ExpHawkesKernel};

fn main() {
    let kernel = ExpHawkesKernel::new(1.0, 1.0, 2.0).unwrap();
    println!("lambda_hat = {}", kernel.lambda_hat());
    for t in [100.0, 1_000.0, 10_000.0] {
        let rate: f64 = (0..20)
            .map(|seed| simulate_hawkes(&kernel, t, seed).unwrap().len() as f64 / t)
            .sum::<f64>()
            / 20.0;
        println!("T = {t:>7}: mean N(T)/T over 20 seeds = {rate:.4}");
    }
}
