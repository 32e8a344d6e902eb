//! Self-exciting random evolutions: a Markov chain read at the event
//! counts of an exponential-kernel Hawkes process (`x(t) = x_{N(t)}`),
//! the scalar and operator-valued processes built on that pair, and the
//! averaging / diffusion limits of their scaled versions, with a
//! verification harness that checks simulations against the closed-form
//! limit objects.
//!
//! Module map:
//!
//! - [`hawkes`]: exponential-kernel Hawkes simulation (exact thinning)
//!   and inter-arrival moment estimation;
//! - [`markov`]: finite chains, stationary distributions, the potential
//!   matrix and chain CLT variance;
//! - [`swish`]: the switching process and the concrete paths (compound,
//!   impulse traffic, switched diffusion, geometric price, risk/ruin);
//! - [`evolution`]: matrix-valued product evolutions and their scaled
//!   (averaging / diffusion) versions;
//! - [`limit`]: the limit generators, ODE/SDE coefficients and variance
//!   formulas, each paired with an independent oracle where one exists;
//! - [`harness`]: experiment configs, Monte Carlo ensembles and
//!   machine-readable verification reports;
//! - [`stats`], [`rng`], [`error`]: support.

pub mod error;
pub mod evolution;
pub mod harness;
pub mod hawkes;
pub mod limit;
pub mod markov;
pub mod rng;
pub mod stats;
pub mod swish;

pub use error::{Result, SereError};
pub use evolution::{
    balance_residual, evolve_product, integral_equation_residual, matrix_exponential,
    simulate_scaled_evolution, MatrixFamily, OperatorOrdering, ScalingOrder,
};
pub use hawkes::{
    estimate_interarrival_moments, intensity_at, simulate_hawkes, EventSequence, ExpHawkesKernel,
    MomentEstimate,
};
pub use limit::{
    averaged_evolution, averaged_generator, averaged_summation_drift, averaged_traffic_ode,
    diffusion_generator, euler_maruyama, summation_sigma2, traffic_diffusion_coeffs, LimitSpec,
    SDECoefficients, Sigma2,
};
pub use markov::{FiniteMarkovChain, PotentialMatrix, StationaryDistribution};
pub use swish::{
    compound_path, compound_path_cfg, geometric_compound_path, geometric_compound_path_cfg,
    impulse_traffic_path, risk_path, ruin_probability_mc, switched_diffusion_path,
    AffineRateFamily, RuinEstimate, SwishPath, Trajectory,
};
