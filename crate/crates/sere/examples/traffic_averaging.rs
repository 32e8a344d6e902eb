//! Averaging regime for the traffic process: the harness compares the
//! Monte Carlo mean path of the scaled process against the averaged ODE
//! dz/dt = lambda_hat m rho[v(z, .)] down the epsilon ladder.

use sere::harness::config::ExperimentConfig;
use sere::harness::run::run_experiment;

fn main() {
    let cfg = ExperimentConfig::from_toml(
        r#"
kind = "averaging_traffic"
lambda = 2.0
alpha = 0.0
beta = 1.0
transition = [[0.5, 0.5], [0.5, 0.5]]
epsilon_ladder = [0.2, 0.1, 0.05]
n_replicas = 1000
seed = 4
t = 1.0
c0 = [2.0, 0.0]
c1 = [-0.5, -0.5]
"#,
    )
    .unwrap();
    let report = run_experiment(&cfg, 0).unwrap();
    print!("{}", report.to_csv());
    println!("# abs_error = sup-distance between mean path and ODE; passed = {}", report.passed);
}
