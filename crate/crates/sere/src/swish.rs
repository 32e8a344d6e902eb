//! The SwishP process `x(t) = x_{N(t)}` (a Markov chain read at Hawkes
//! event counts) and the concrete processes built on top of it:
//!
//! - compound path `z + sum_{k<=N(t)} a(x_k)`,
//! - impulse traffic `z + int v(z, x(s)) ds + sum a(x_k)`,
//! - switched diffusion `d xi = a(xi, x(t)) dt + b(xi, x(t)) dw`,
//! - geometric compound price `S0 prod_{k=0}^{N(t)} (1 + c(x_k))`,
//! - risk process `R(t) = u + c t - sum a(x_k)` with Monte Carlo ruin
//!   probabilities.
//!
//! All paths are cadlag: the state and the trajectory value at an event
//! time are the post-jump ones. Hawkes events, chain steps and Wiener
//! increments come from independent sub-streams of the master seed.

use crate::error::{Result, SereError};
use crate::hawkes::{simulate_hawkes, EventSequence, ExpHawkesKernel};
use crate::markov::FiniteMarkovChain;
use crate::rng::{lane, replica_index, rng_for, split_seed};
use crate::stats::binomial_std_err;
use rayon::prelude::*;

/// Interleaved Hawkes events and chain states; `states` has one more
/// entry than there are events (the initial state is included).
#[derive(Debug, Clone, PartialEq)]
pub struct SwishPath {
    events: EventSequence,
    states: Vec<usize>,
}

impl SwishPath {
    /// Simulate the SwishP on `[0, horizon]`. The Hawkes events and the
    /// chain states are drawn from independent sub-streams of `seed`.
    pub fn simulate(
        kernel: &ExpHawkesKernel,
        chain: &FiniteMarkovChain,
        x0: usize,
        horizon: f64,
        seed: u64,
    ) -> Result<Self> {
        let events = simulate_hawkes(kernel, horizon, seed)?;
        let mut chain_rng = rng_for(seed, lane::CHAIN, 0);
        let states = chain.simulate_with(x0, events.len() + 1, &mut chain_rng)?;
        Ok(Self { events, states })
    }

    pub fn from_parts(events: EventSequence, states: Vec<usize>) -> Result<Self> {
        if states.len() != events.len() + 1 {
            return Err(SereError::InvalidConfig(format!(
                "need {} states for {} events, got {}",
                events.len() + 1,
                events.len(),
                states.len()
            )));
        }
        Ok(Self { events, states })
    }

    pub fn events(&self) -> &EventSequence {
        &self.events
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn horizon(&self) -> f64 {
        self.events.horizon()
    }

    /// `x(t) = x_{N(t)}`, right-continuous at events.
    pub fn state_at(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(SereError::OutOfHorizon { t, horizon: self.horizon() });
        }
        Ok(self.states[self.events.count_up_to(t)])
    }
}

/// Sampled scalar trajectory; `states[i]` is the SwishP state at
/// `times[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub states: Vec<usize>,
}

impl Trajectory {
    /// Last recorded value.
    pub fn endpoint(&self) -> f64 {
        *self.values.last().expect("non-empty trajectory")
    }

    /// Value at time `t` for a piecewise-constant reading of the samples
    /// (value of the latest sample at or before `t`).
    pub fn value_before(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t);
        self.values[i.saturating_sub(1)]
    }
}

/// Per-state affine rate family `v(z, x) = c0(x) + c1(x) z`, with exact
/// derivative `v'(z, x) = c1(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRateFamily {
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
}

impl AffineRateFamily {
    pub fn new(c0: Vec<f64>, c1: Vec<f64>) -> Result<Self> {
        if c0.len() != c1.len() || c0.is_empty() {
            return Err(SereError::InvalidConfig("c0 and c1 must have equal, nonzero length".into()));
        }
        if c0.iter().chain(&c1).any(|v| !v.is_finite()) {
            return Err(SereError::InvalidConfig("non-finite rate coefficient".into()));
        }
        Ok(Self { c0, c1 })
    }

    /// Constant-in-z family `v(z, x) = a(x)`.
    pub fn constant(a: &[f64]) -> Self {
        Self { c0: a.to_vec(), c1: vec![0.0; a.len()] }
    }

    pub fn n_states(&self) -> usize {
        self.c0.len()
    }

    pub fn eval(&self, z: f64, x: usize) -> f64 {
        self.c0[x] + self.c1[x] * z
    }

    /// Exact flow of `dz/ds = c0(x) + c1(x) z` over a time step `h`.
    pub fn flow(&self, z: f64, x: usize, h: f64) -> f64 {
        let (c0, c1) = (self.c0[x], self.c1[x]);
        if c1 == 0.0 {
            z + c0 * h
        } else {
            z * (c1 * h).exp() + c0 * (c1 * h).exp_m1() / c1
        }
    }
}

/// `z(t) = z0 + sum_{k=1}^{N(t)} a(x_k)`; with `include_initial_mark` the
/// sum starts at `k = 0` (an extra jump of `a(x_0)` at time zero).
pub fn compound_path_cfg(path: &SwishPath, a: &[f64], z0: f64, include_initial_mark: bool) -> Trajectory {
    let n = path.events().len();
    let mut times = Vec::with_capacity(n + 2);
    let mut values = Vec::with_capacity(n + 2);
    let mut states = Vec::with_capacity(n + 2);
    let mut z = z0;
    if include_initial_mark {
        z += a[path.states[0]];
    }
    times.push(0.0);
    values.push(z);
    states.push(path.states[0]);
    for (k, &tau) in path.events().times().iter().enumerate() {
        z += a[path.states[k + 1]];
        times.push(tau);
        values.push(z);
        states.push(path.states[k + 1]);
    }
    if times.last().copied() != Some(path.horizon()) {
        times.push(path.horizon());
        values.push(z);
        states.push(*path.states.last().unwrap());
    }
    Trajectory { times, values, states }
}

/// General compound Hawkes process, jumps at `tau_k` by `a(x_k)`.
pub fn compound_path(path: &SwishPath, a: &[f64], z0: f64) -> Trajectory {
    compound_path_cfg(path, a, z0, false)
}

/// Impulse traffic: exact affine flow between events, jump `a(x_k)` at
/// each event; output refined to steps of at most `dt`.
pub fn impulse_traffic_path(
    path: &SwishPath,
    v: &AffineRateFamily,
    a: &[f64],
    z0: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(SereError::NonPositiveParameter { name: "dt", value: dt });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut states = Vec::new();
    let mut z = z0;
    let mut t = 0.0;
    times.push(0.0);
    values.push(z);
    states.push(path.states[0]);
    let n = path.events().len();
    for k in 0..=n {
        let x = path.states[k];
        let seg_end = if k < n { path.events().times()[k] } else { path.horizon() };
        let len = seg_end - t;
        if len > 0.0 {
            let n_sub = (len / dt).ceil().max(1.0) as usize;
            let h = len / n_sub as f64;
            for i in 1..=n_sub {
                // land exactly on the segment end despite rounding
                let ti = if i == n_sub { seg_end } else { t + h * i as f64 };
                times.push(ti);
                values.push(v.flow(z, x, ti - t));
                states.push(x);
            }
            z = v.flow(z, x, len);
        }
        t = seg_end;
        if k < n {
            // jump a(x_{k+1}) at tau_{k+1}, recorded as the cadlag value
            z += a[path.states[k + 1]];
            *values.last_mut().unwrap() = z;
            *states.last_mut().unwrap() = path.states[k + 1];
        }
    }
    Ok(Trajectory { times, values, states })
}

/// Geometric compound price `S0 prod (1 + c(x_k))`; the product starts at
/// `k = 0`, so the initial state contributes one factor at time zero.
pub fn geometric_compound_path(path: &SwishPath, c: &[f64], s0: f64) -> Result<Trajectory> {
    geometric_compound_path_cfg(path, c, s0, true)
}

pub fn geometric_compound_path_cfg(
    path: &SwishPath,
    c: &[f64],
    s0: f64,
    include_initial_mark: bool,
) -> Result<Trajectory> {
    if !(s0 > 0.0) {
        return Err(SereError::NonPositiveParameter { name: "S0", value: s0 });
    }
    for (x, &cx) in c.iter().enumerate() {
        if cx <= -1.0 {
            return Err(SereError::InvalidMark { state: x, value: cx });
        }
    }
    let n = path.events().len();
    let mut times = Vec::with_capacity(n + 2);
    let mut values = Vec::with_capacity(n + 2);
    let mut states = Vec::with_capacity(n + 2);
    let mut s = s0;
    if include_initial_mark {
        s *= 1.0 + c[path.states[0]];
    }
    times.push(0.0);
    values.push(s);
    states.push(path.states[0]);
    for (k, &tau) in path.events().times().iter().enumerate() {
        s *= 1.0 + c[path.states[k + 1]];
        times.push(tau);
        values.push(s);
        states.push(path.states[k + 1]);
    }
    if times.last().copied() != Some(path.horizon()) {
        times.push(path.horizon());
        values.push(s);
        states.push(*path.states.last().unwrap());
    }
    Ok(Trajectory { times, values, states })
}

/// Risk process `R(t) = u + c t - sum_{k<=N(t)} a(x_k)`, sampled at event
/// times and the horizon (claims are the only downward moves when
/// `c >= 0`, so this sampling is exact for ruin detection).
pub fn risk_path(path: &SwishPath, u: f64, premium: f64, a: &[f64]) -> Trajectory {
    if a.iter().any(|&v| v < 0.0) {
        log::warn!("risk process with negative claim sizes; ruin check at event times only");
    }
    let n = path.events().len();
    let mut times = Vec::with_capacity(n + 2);
    let mut values = Vec::with_capacity(n + 2);
    let mut states = Vec::with_capacity(n + 2);
    times.push(0.0);
    values.push(u);
    states.push(path.states[0]);
    let mut claims = 0.0;
    for (k, &tau) in path.events().times().iter().enumerate() {
        claims += a[path.states[k + 1]];
        times.push(tau);
        values.push(u + premium * tau - claims);
        states.push(path.states[k + 1]);
    }
    if times.last().copied() != Some(path.horizon()) {
        times.push(path.horizon());
        values.push(u + premium * path.horizon() - claims);
        states.push(*path.states.last().unwrap());
    }
    Trajectory { times, values, states }
}

/// Ruin probability estimate with binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinEstimate {
    pub probability: f64,
    pub std_err: f64,
    pub n_replicas: usize,
}

/// Monte Carlo ruin probability over `n_replicas` independent paths:
/// the fraction with `inf_{t <= horizon} R(t) < 0`. Replicas run in
/// parallel with derived sub-seeds; the result does not depend on the
/// number of threads.
#[allow(clippy::too_many_arguments)]
pub fn ruin_probability_mc(
    kernel: &ExpHawkesKernel,
    chain: &FiniteMarkovChain,
    x0: usize,
    u: f64,
    premium: f64,
    a: &[f64],
    horizon: f64,
    n_replicas: usize,
    seed: u64,
) -> Result<RuinEstimate> {
    if n_replicas < 100 {
        return Err(SereError::InsufficientSamples { available: n_replicas, required: 100 });
    }
    let ruined: usize = (0..n_replicas)
        .into_par_iter()
        .map(|rep| {
            let sub = split_seed(seed, lane::REPLICA, replica_index(0, rep));
            let path = SwishPath::simulate(kernel, chain, x0, horizon, sub).expect("valid inputs");
            let traj = risk_path(&path, u, premium, a);
            usize::from(traj.values.iter().any(|&r| r < 0.0))
        })
        .sum();
    let p = ruined as f64 / n_replicas as f64;
    Ok(RuinEstimate { probability: p, std_err: binomial_std_err(p, n_replicas), n_replicas })
}

/// Euler-Maruyama for `d xi = (c0(x) + c1(x) xi) dt + vol(x) dw` with
/// SwishP switchings; the grid is aligned to the switching times and the
/// Wiener increments come from a dedicated sub-stream of `seed`.
pub fn switched_diffusion_path(
    path: &SwishPath,
    drift: &AffineRateFamily,
    vol: &[f64],
    xi0: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(SereError::NonPositiveParameter { name: "dt", value: dt });
    }
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut rng = rng_for(seed, lane::WIENER, 0);
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut states = Vec::new();
    let mut xi = xi0;
    let mut t = 0.0;
    times.push(0.0);
    values.push(xi);
    states.push(path.states[0]);
    let n = path.events().len();
    for k in 0..=n {
        let x = path.states[k];
        let seg_end = if k < n { path.events().times()[k] } else { path.horizon() };
        let len = seg_end - t;
        if len > 0.0 {
            let n_sub = (len / dt).ceil().max(1.0) as usize;
            let h = len / n_sub as f64;
            let sqrt_h = h.sqrt();
            for i in 1..=n_sub {
                let z: f64 = rng.sample(StandardNormal);
                xi += drift.eval(xi, x) * h + vol[x] * sqrt_h * z;
                times.push(t + h * i as f64);
                values.push(xi);
                states.push(x);
            }
        }
        t = seg_end;
        if k < n {
            *states.last_mut().unwrap() = path.states[k + 1];
        }
    }
    Ok(Trajectory { times, values, states })
}
