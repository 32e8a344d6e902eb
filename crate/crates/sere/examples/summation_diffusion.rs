//! Diffusion regime for the summation on a Markov chain: endpoint
//! variance of eps * sum a(x_k) over the horizon t/eps^2 against both the
//! closed-form value and the chain-CLT oracle lambda_hat * sigma2_chain.

use nalgebra::dmatrix;
use sere::{
    compound_path, summation_sigma2, ExpHawkesKernel, FiniteMarkovChain, LimitSpec, SwishPath,
};

fn main() {
    let kernel = ExpHawkesKernel::new(1.0, 1.0, 2.0).unwrap();
    let chain = FiniteMarkovChain::new(dmatrix![0.5, 0.5; 0.5, 0.5]).unwrap();
    let a = [1.0, -1.0];
    let spec = LimitSpec::from_model(&kernel, &chain, None, 0).unwrap();
    let sigma2 = summation_sigma2(&a, &chain, &spec).unwrap();
    println!("formula sigma^2 = {:.4}, oracle lambda_hat*sigma2_chain = {:.4}", sigma2.formula, sigma2.oracle);

    let eps = 0.05;
    let horizon = 1.0 / (eps * eps);
    let n = 2000;
    let endpoints: Vec<f64> = (0..n)
        .map(|seed| {
            let path = SwishPath::simulate(&kernel, &chain, 0, horizon, seed).unwrap();
            eps * compound_path(&path, &a, 0.0).endpoint()
        })
        .collect();
    let (mean, var) = sere::stats::mean_var(&endpoints);
    println!("eps = {eps}: endpoint mean {mean:.4}, variance {var:.4} (oracle {:.4})", sigma2.oracle);
}
