//! Risk process R(t) = u + c t - sum a(x_k): Monte Carlo ruin
//! probabilities over a ladder of initial capitals.

use nalgebra::dmatrix;
use sere::{ruin_probability_mc, ExpHawkesKernel, FiniteMarkovChain};

fn main() {
    let kernel = ExpHawkesKernel::new(1.0, 0.5, 2.0).unwrap();
    let chain = FiniteMarkovChain::new(dmatrix![0.7, 0.3; 0.4, 0.6]).unwrap();
    let claims = [1.0, 2.0];
    for u in [0.0, 2.0, 5.0, 10.0, 20.0] {
        let est = ruin_probability_mc(&kernel, &chain, 0, u, 2.2, &claims, 50.0, 5000, 17).unwrap();
        println!("u = {u:>5}: ruin probability {:.4} +- {:.4}", est.probability, est.std_err);
    }
}
