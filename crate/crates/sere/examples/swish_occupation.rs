//! The switching process x(t) = x_{N(t)}: long-run occupation fractions
//! match the chain's stationary distribution.

use nalgebra::dmatrix;
use sere::{ExpHawkesKernel, FiniteMarkovChain, SwishPath};

fn main() {
    let kernel = ExpHawkesKernel::new(1.0, 1.0, 2.0).unwrap();
    let chain = FiniteMarkovChain::new(dmatrix![0.9, 0.1; 0.5, 0.5]).unwrap();
    let rho = chain.stationary_distribution().unwrap();
    let horizon = 10_000.0;
    let path = SwishPath::simulate(&kernel, &chain, 0, horizon, 7).unwrap();

    let mut occupancy = vec![0.0; chain.n_states()];
    let mut prev = 0.0;
    for (k, &tau) in path.events().times().iter().enumerate() {
        occupancy[path.states()[k]] += tau - prev;
        prev = tau;
    }
    occupancy[*path.states().last().unwrap()] += horizon - prev;

    println!("stationary rho    = {:?}", rho.as_slice());
    println!(
        "occupation shares = {:?}",
        occupancy.iter().map(|t| t / horizon).collect::<Vec<_>>()
    );
}
