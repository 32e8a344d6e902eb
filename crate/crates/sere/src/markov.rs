//! Finite-state Markov chains: validation, simulation, stationary
//! distribution, and the potential (fundamental) matrix
//! `R0 = (I - P + Pi)^{-1}` where `Pi` is the rank-one matrix whose rows
//! are the stationary distribution. `R0` satisfies `R0 (I - P) = I - Pi`.
//!
//! The chain-CLT step variance `rho[a_bar (2 R0 - I - Pi) a_bar]` is also
//! provided; it is the independent oracle for the diffusion limits.
//!
//! Ergodicity is checked structurally (strong connectivity of the support
//! graph plus aperiodicity via a gcd of cycle lengths) and exposed as a
//! flag. The stationary distribution and the potential matrix only need
//! irreducibility, so that is the fatal gate; a periodic chain such as the
//! two-state alternation still has `rho = (1/2, 1/2)` and a well-defined
//! `R0`.

use crate::error::{Result, SereError};
use crate::rng::{lane, rng_for};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const ROW_SUM_TOL: f64 = 1e-12;

/// Finite state set with a validated stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMarkovChain {
    transition: DMatrix<f64>,
    irreducible: bool,
    aperiodic: bool,
}

impl FiniteMarkovChain {
    /// Validate a square row-stochastic matrix. Irreducibility and
    /// aperiodicity are computed up front; a reducible chain is accepted
    /// for plain simulation but rejected by the stationary operations.
    pub fn new(transition: DMatrix<f64>) -> Result<Self> {
        let n = transition.nrows();
        if n == 0 || transition.ncols() != n {
            return Err(SereError::InvalidConfig(format!(
                "transition matrix must be square and non-empty, got {}x{}",
                transition.nrows(),
                transition.ncols()
            )));
        }
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let p = transition[(i, j)];
                if !(0.0..=1.0 + ROW_SUM_TOL).contains(&p) {
                    return Err(SereError::NotStochastic { row: i, sum: p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(SereError::NotStochastic { row: i, sum });
            }
        }
        let irreducible = is_strongly_connected(&transition);
        let aperiodic = irreducible && period(&transition) == 1;
        Ok(Self { transition, irreducible, aperiodic })
    }

    pub fn n_states(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// Irreducible and aperiodic.
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }

    /// Simulate `n` steps starting from `x0` (the returned sequence has
    /// length `n` and starts with `x0`).
    pub fn simulate(&self, x0: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
        let mut rng = rng_for(seed, lane::CHAIN, 0);
        self.simulate_with(x0, n, &mut rng)
    }

    pub(crate) fn simulate_with(&self, x0: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        if x0 >= self.n_states() {
            return Err(SereError::InvalidConfig(format!(
                "initial state {x0} out of range (n_states = {})",
                self.n_states()
            )));
        }
        let mut states = Vec::with_capacity(n);
        let mut x = x0;
        for _ in 0..n {
            states.push(x);
            x = self.step(x, rng.gen());
        }
        Ok(states)
    }

    /// One transition by inverse-CDF sampling of row `x`.
    pub(crate) fn step(&self, x: usize, u: f64) -> usize {
        let n = self.n_states();
        let mut acc = 0.0;
        for j in 0..n {
            acc += self.transition[(x, j)];
            if u < acc {
                return j;
            }
        }
        n - 1
    }

    /// Stationary distribution by direct linear solve of `rho P = rho`,
    /// `sum rho = 1`. Requires irreducibility.
    pub fn stationary_distribution(&self) -> Result<StationaryDistribution> {
        if !self.irreducible {
            return Err(SereError::NotErgodic);
        }
        let n = self.n_states();
        // (P^T - I) rho = 0 with the last equation replaced by sum rho = 1.
        let mut a = self.transition.transpose() - DMatrix::identity(n, n);
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let rho = a.lu().solve(&b).ok_or(SereError::SingularSystem)?;
        Ok(StationaryDistribution { rho })
    }

    /// Potential matrix `R0 = (I - P + Pi)^{-1}` (fundamental-matrix
    /// convention), satisfying `R0 (I - P) = I - Pi`.
    pub fn potential_matrix(&self) -> Result<PotentialMatrix> {
        let rho = self.stationary_distribution()?;
        let n = self.n_states();
        let pi = rho.projector();
        let r0 = (DMatrix::identity(n, n) - &self.transition + pi)
            .try_inverse()
            .ok_or(SereError::SingularSystem)?;
        Ok(PotentialMatrix { r0 })
    }

    /// Asymptotic variance of `n^{-1/2} sum_{k<n} a_bar(x_k)` where `a_bar`
    /// is the stationary centering of the marks:
    /// `sigma^2 = rho[a_bar (2 R0 - I - Pi) a_bar]`.
    pub fn step_variance(&self, a: &[f64]) -> Result<f64> {
        let n = self.n_states();
        assert_eq!(a.len(), n, "one mark per state");
        let rho = self.stationary_distribution()?;
        let r0 = self.potential_matrix()?;
        let mean: f64 = (0..n).map(|i| rho.rho[i] * a[i]).sum();
        let centered = DVector::from_iterator(n, a.iter().map(|&v| v - mean));
        let pi = rho.projector();
        let mid = (2.0 * &r0.r0 - DMatrix::identity(n, n) - pi) * &centered;
        let sigma2: f64 = (0..n).map(|i| rho.rho[i] * centered[i] * mid[i]).sum();
        Ok(sigma2.max(0.0))
    }
}

/// Probability vector `rho` with `rho P = rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    rho: DVector<f64>,
}

impl StationaryDistribution {
    pub fn as_slice(&self) -> &[f64] {
        self.rho.as_slice()
    }

    pub fn n_states(&self) -> usize {
        self.rho.len()
    }

    /// Expectation of per-state values under `rho`.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.rho.iter().zip(values).map(|(r, v)| r * v).sum()
    }

    /// Rank-one projector `Pi` whose rows are all `rho`.
    pub fn projector(&self) -> DMatrix<f64> {
        let n = self.rho.len();
        DMatrix::from_fn(n, n, |_, j| self.rho[j])
    }
}

/// Fundamental matrix `R0` of an irreducible chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialMatrix {
    r0: DMatrix<f64>,
}

impl PotentialMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r0
    }
}

fn support_edges(p: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = p.nrows();
    (0..n)
        .map(|i| (0..n).filter(|&j| p[(i, j)] > 0.0).collect())
        .collect()
}

fn reachable(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn is_strongly_connected(p: &DMatrix<f64>) -> bool {
    let adj = support_edges(p);
    let n = p.nrows();
    (0..n).all(|i| reachable(&adj, i).iter().all(|&b| b))
}

/// Period of a strongly connected support graph: gcd over all edges (u, v)
/// of `level[u] + 1 - level[v]` for a BFS levelling from state 0.
fn period(p: &DMatrix<f64>) -> u64 {
    let adj = support_edges(p);
    let n = p.nrows();
    let mut level = vec![None::<i64>; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    level[0] = Some(0);
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            match level[v] {
                None => {
                    level[v] = Some(level[u].unwrap() + 1);
                    queue.push_back(v);
                }
                Some(lv) => {
                    let d = (level[u].unwrap() + 1 - lv).unsigned_abs();
                    g = gcd(g, d);
                }
            }
        }
    }
    g.max(1)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
