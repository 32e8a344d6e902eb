//! Compound path z0 + sum a(x_k) and the geometric price
//! S0 prod (1 + c(x_k)) on the same switching path; the log-price is a
//! compound path with marks ln(1 + c).

use nalgebra::dmatrix;
use sere::{compound_path, geometric_compound_path, ExpHawkesKernel, FiniteMarkovChain, SwishPath};

fn main() {
    let kernel = ExpHawkesKernel::new(1.0, 1.0, 2.0).unwrap();
    let chain = FiniteMarkovChain::new(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
    let path = SwishPath::simulate(&kernel, &chain, 0, 10.0, 11).unwrap();

    let z = compound_path(&path, &[1.0, -1.0], 0.0);
    let s = geometric_compound_path(&path, &[0.02, -0.015], 100.0).unwrap();
    println!("events: {}", path.events().len());
    println!("compound endpoint (alternating +-1 marks): {}", z.endpoint());
    println!("price endpoint: {:.4}  (log return {:+.4})", s.endpoint(), (s.endpoint() / 100.0).ln());
    for i in (0..z.times.len()).step_by(z.times.len() / 5 + 1) {
        println!("t = {:6.3}  z = {:4}  S = {:8.4}  state = {}", z.times[i], z.values[i], s.values[i], z.states[i]);
    }
}
