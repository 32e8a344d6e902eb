//! Averaging regime for a matrix-valued evolution: the Monte Carlo mean
//! of V_eps(t) f approaches exp(G_hat t) f with
//! G_hat = lambda_hat (m rho[Gamma] + rho[D1]).

use nalgebra::{dmatrix, dvector, DMatrix};
use sere::{
    averaged_evolution, averaged_generator, simulate_scaled_evolution, ExpHawkesKernel,
    FiniteMarkovChain, LimitSpec, MatrixFamily, ScalingOrder,
};

fn main() {
    let kernel = ExpHawkesKernel::new(1.0, 1.0, 2.0).unwrap();
    let chain = FiniteMarkovChain::new(dmatrix![0.9, 0.1; 0.5, 0.5]).unwrap();
    let family = MatrixFamily::new(
        vec![dmatrix![0.1, 0.3; -0.2, 0.0], dmatrix![-0.1, 0.0; 0.4, 0.2]],
        vec![DMatrix::zeros(2, 2), dmatrix![0.2, 0.0; 0.0, -0.1]],
        None,
    )
    .unwrap();
    let f = dvector![1.0, -0.5];
    let spec = LimitSpec::from_model(&kernel, &chain, None, 0).unwrap();
    let limit = averaged_evolution(&averaged_generator(&family, &spec), 1.0, &f).unwrap();
    println!("limit e^(G_hat) f = [{:.4}, {:.4}]", limit[0], limit[1]);

    for eps in [0.2, 0.1, 0.05] {
        let n = 2000;
        let mut mean = dvector![0.0, 0.0];
        for seed in 0..n {
            mean += simulate_scaled_evolution(
                &kernel, &chain, &family, &f, eps, 1.0, ScalingOrder::Averaging, seed,
            )
            .unwrap();
        }
        mean /= n as f64;
        println!(
            "eps = {eps:>4}: mean V_eps(1) f = [{:.4}, {:.4}], max dev {:.4}",
            mean[0],
            mean[1],
            (&mean - &limit).amax()
        );
    }
}
