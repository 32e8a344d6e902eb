//! Finite-dimensional (d x d matrix) random evolutions driven by a SwishP.
//!
//! The evolution is the product
//!
//! ```text
//! V(t) = exp((t - tau_N) G(x_N)) * D(x_N) * exp(theta_N G(x_{N-1})) * ...
//!        * D(x_1) * exp(theta_1 G(x_0))
//! ```
//!
//! with the newest factor on the left: between events `dV/dt = G(x(t)) V`,
//! and at each event `V` jumps to `D(x_k) V`. Scaled variants run the path
//! on the horizon `t/eps` (averaging, `D = I + eps D1`) or `t/eps^2`
//! (diffusion, `D = I + eps D1 + eps^2 D2`) with every semigroup duration
//! multiplied by `eps`.
//!
//! The integral-equation residual cross-checks the product against the
//! defining integral equation. The source equation prints the operators on
//! the other side of `V` (`V(s) G(x(s))`), which differs for non-commuting
//! matrices; the product form above is taken as ground truth and the
//! written right-action ordering is available behind
//! [`OperatorOrdering::LiteralRightAction`] as a diagnostic.

use crate::error::{Result, SereError};
use crate::hawkes::ExpHawkesKernel;
use crate::markov::{FiniteMarkovChain, StationaryDistribution};
use crate::swish::SwishPath;
use nalgebra::{DMatrix, DVector};

/// Per-state generator `G(x)` and jump expansion terms `D1(x)`, `D2(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFamily {
    dim: usize,
    gamma: Vec<DMatrix<f64>>,
    d1: Vec<DMatrix<f64>>,
    d2: Vec<DMatrix<f64>>,
}

impl MatrixFamily {
    pub fn new(gamma: Vec<DMatrix<f64>>, d1: Vec<DMatrix<f64>>, d2: Option<Vec<DMatrix<f64>>>) -> Result<Self> {
        let n_states = gamma.len();
        if n_states == 0 || d1.len() != n_states {
            return Err(SereError::InvalidConfig("gamma and d1 must have one matrix per state".into()));
        }
        let dim = gamma[0].nrows();
        let d2 = d2.unwrap_or_else(|| vec![DMatrix::zeros(dim, dim); n_states]);
        if d2.len() != n_states {
            return Err(SereError::InvalidConfig("d2 must have one matrix per state".into()));
        }
        for m in gamma.iter().chain(&d1).chain(&d2) {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(SereError::InvalidConfig(format!(
                    "all matrices must be {dim}x{dim}"
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(SereError::InvalidConfig("non-finite matrix entry".into()));
            }
        }
        Ok(Self { dim, gamma, d1, d2 })
    }

    /// Scalar (d = 1) family from per-state rates.
    pub fn scalar(gamma: &[f64], d1: &[f64], d2: Option<&[f64]>) -> Result<Self> {
        let wrap = |v: &[f64]| v.iter().map(|&g| DMatrix::from_element(1, 1, g)).collect::<Vec<_>>();
        Self::new(wrap(gamma), wrap(d1), d2.map(wrap))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_states(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self, x: usize) -> &DMatrix<f64> {
        &self.gamma[x]
    }

    pub fn d1(&self, x: usize) -> &DMatrix<f64> {
        &self.d1[x]
    }

    pub fn d2(&self, x: usize) -> &DMatrix<f64> {
        &self.d2[x]
    }

    /// Jump operator `D^eps(x)` truncated at the given order
    /// (`o(eps)` / `o(eps^2)` terms identically zero).
    pub fn jump_operator(&self, x: usize, epsilon: f64, order: ScalingOrder) -> DMatrix<f64> {
        let mut d = DMatrix::identity(self.dim, self.dim) + epsilon * &self.d1[x];
        if order == ScalingOrder::Diffusion {
            d += epsilon * epsilon * &self.d2[x];
        }
        d
    }
}

/// Time scaling of the series scheme: averaging runs the path on `t/eps`,
/// diffusion on `t/eps^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingOrder {
    Averaging,
    Diffusion,
}

impl ScalingOrder {
    pub fn horizon(&self, t: f64, epsilon: f64) -> f64 {
        match self {
            ScalingOrder::Averaging => t / epsilon,
            ScalingOrder::Diffusion => t / (epsilon * epsilon),
        }
    }
}

/// Which side of `V` the operators act on in the integral-equation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OperatorOrdering {
    /// `dV = G(x(t)) V dt`, jumps `[D - I] V(tau-)`; consistent with the
    /// product formula.
    #[default]
    ProductConsistent,
    /// Operators printed to the right of `V`: `V(s) G(x(s))` and
    /// `V(tau-)[D - I]`. Diagnostic only; the residual does not vanish for
    /// non-commuting families.
    LiteralRightAction,
}

const EXPM_NORM_LIMIT: f64 = 500.0;
const NORM_GROWTH_WARN: f64 = 1e6;

/// `exp(t M)` by scaling and squaring with a Taylor core; relative error
/// below 1e-10 for `||t M|| <= 50`.
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let dim = m.nrows();
    let a = m * t;
    let norm = a.iter().map(|v| v.abs()).fold(0.0f64, f64::max) * dim as f64;
    if !norm.is_finite() || norm > EXPM_NORM_LIMIT {
        return Err(SereError::Overflow { norm });
    }
    // scale so the argument norm is at most 1/2
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let b = &a / 2f64.powi(s as i32);
    let mut result = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &b / k as f64;
        let tn = term.amax();
        result += &term;
        if tn < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    Ok(result)
}

/// Evaluate the scaled product evolution on an already-simulated path.
///
/// Needs `path.horizon() >= t/eps` (averaging) or `t/eps^2` (diffusion);
/// events beyond the needed horizon are ignored. Factors are applied in
/// chronological order `k = 1..N`, newest on the left.
pub fn evolve_product(
    path: &SwishPath,
    family: &MatrixFamily,
    epsilon: f64,
    t: f64,
    order: ScalingOrder,
) -> Result<DMatrix<f64>> {
    if !(epsilon > 0.0) {
        return Err(SereError::NonPositiveParameter { name: "epsilon", value: epsilon });
    }
    let needed = order.horizon(t, epsilon);
    if path.horizon() + 1e-12 < needed {
        return Err(SereError::HorizonTooShort { needed, available: path.horizon() });
    }
    let n = path.events().count_up_to(needed);
    let mut v = DMatrix::identity(family.dim(), family.dim());
    let mut prev_tau = 0.0;
    let mut warned = false;
    for k in 0..n {
        let tau = path.events().times()[k];
        let theta = tau - prev_tau;
        let x_prev = path.states()[k];
        let x_new = path.states()[k + 1];
        v = matrix_exponential(family.gamma(x_prev), epsilon * theta)? * v;
        v = family.jump_operator(x_new, epsilon, order) * v;
        prev_tau = tau;
        if !warned && v.amax() > NORM_GROWTH_WARN {
            log::warn!("evolution norm exceeded {NORM_GROWTH_WARN:e} after event {k}");
            warned = true;
        }
    }
    let x_last = path.states()[n];
    v = matrix_exponential(family.gamma(x_last), epsilon * (needed - prev_tau))? * v;
    Ok(v)
}

/// Simulate a fresh SwishP at the required horizon and return
/// `V_eps(t) f` for one replica.
#[allow(clippy::too_many_arguments)]
pub fn simulate_scaled_evolution(
    kernel: &ExpHawkesKernel,
    chain: &FiniteMarkovChain,
    family: &MatrixFamily,
    f: &DVector<f64>,
    epsilon: f64,
    t: f64,
    order: ScalingOrder,
    seed: u64,
) -> Result<DVector<f64>> {
    if !(epsilon > 0.0) || epsilon > 1.0 {
        return Err(SereError::InvalidConfig(format!("epsilon must be in (0, 1], got {epsilon}")));
    }
    let horizon = order.horizon(t, epsilon);
    let path = SwishPath::simulate(kernel, chain, 0, horizon, seed)?;
    let v = evolve_product(&path, family, epsilon, t, order)?;
    Ok(v * f)
}

/// Max-norm residual of the unscaled (`eps = 1`) integral equation
///
/// ```text
/// V(t) f = f + int_0^t G(x(s)) V(s) f ds + sum_{tau_k <= t} [D(x_k) - I] V(tau_k-) f
/// ```
///
/// with composite trapezoid quadrature on a grid containing all event
/// times (step at most `dt`); expected `O(dt^2)`.
pub fn integral_equation_residual(
    path: &SwishPath,
    family: &MatrixFamily,
    f: &DVector<f64>,
    t: f64,
    dt: f64,
    ordering: OperatorOrdering,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(SereError::NonPositiveParameter { name: "dt", value: dt });
    }
    if path.horizon() + 1e-12 < t {
        return Err(SereError::HorizonTooShort { needed: t, available: path.horizon() });
    }
    let dim = family.dim();
    let n = path.events().count_up_to(t);
    let mut integral = DVector::zeros(dim);
    let mut jumps = DVector::zeros(dim);
    let mut v = DMatrix::identity(dim, dim);
    let mut seg_start = 0.0;
    for k in 0..=n {
        let x = path.states()[k];
        let seg_end = if k < n { path.events().times()[k] } else { t };
        let len = seg_end - seg_start;
        if len > 0.0 {
            let n_sub = (len / dt).ceil().max(1.0) as usize;
            let h = len / n_sub as f64;
            let step = matrix_exponential(family.gamma(x), h)?;
            let mut g_prev = integrand(&v, family.gamma(x), f, ordering);
            for _ in 0..n_sub {
                v = &step * &v;
                let g_next = integrand(&v, family.gamma(x), f, ordering);
                integral += (&g_prev + &g_next) * (h / 2.0);
                g_prev = g_next;
            }
        }
        seg_start = seg_end;
        if k < n {
            let x_new = path.states()[k + 1];
            let d = family.jump_operator(x_new, 1.0, ScalingOrder::Diffusion);
            let id = DMatrix::identity(dim, dim);
            match ordering {
                OperatorOrdering::ProductConsistent => jumps += (&d - &id) * (&v * f),
                OperatorOrdering::LiteralRightAction => jumps += &v * ((&d - &id) * f),
            }
            v = d * v;
        }
    }
    let lhs = &v * f;
    let rhs = f + integral + jumps;
    Ok((lhs - rhs).amax())
}

fn integrand(v: &DMatrix<f64>, gamma: &DMatrix<f64>, f: &DVector<f64>, ordering: OperatorOrdering) -> DVector<f64> {
    match ordering {
        OperatorOrdering::ProductConsistent => gamma * (v * f),
        OperatorOrdering::LiteralRightAction => v * (gamma * f),
    }
}

/// Max-norm of `sum_x rho(x) [m G(x) + D1(x)]`; the balance condition of
/// the diffusion regime holds iff this matrix vanishes.
pub fn balance_residual(family: &MatrixFamily, rho: &StationaryDistribution, m: f64) -> f64 {
    let dim = family.dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for (x, &r) in rho.as_slice().iter().enumerate() {
        acc += r * (m * family.gamma(x) + family.d1(x));
    }
    acc.amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::EventSequence;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    fn kernel() -> ExpHawkesKernel {
        ExpHawkesKernel::new(1.0, 1.0, 2.0).unwrap()
    }

    fn chain2() -> FiniteMarkovChain {
        FiniteMarkovChain::new(dmatrix![0.9, 0.1; 0.5, 0.5]).unwrap()
    }

    #[test]
    fn expm_basics() {
        let z = DMatrix::<f64>::zeros(2, 2);
        assert!((matrix_exponential(&z, 1.0).unwrap() - DMatrix::identity(2, 2)).amax() < 1e-15);

        let d = dmatrix![1.0, 0.0; 0.0, -1.0];
        let e = matrix_exponential(&d, 1.0).unwrap();
        assert_relative_eq!(e[(0, 0)], 1f64.exp(), epsilon = 1e-12);
        assert_relative_eq!(e[(1, 1)], (-1f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(e[(0, 1)], 0.0, epsilon = 1e-15);

        // nilpotent: exp(tM) = I + tM exactly
        let nil = dmatrix![0.0, 1.0; 0.0, 0.0];
        let e = matrix_exponential(&nil, 3.0).unwrap();
        assert_relative_eq!(e[(0, 1)], 3.0, epsilon = 1e-12);
        assert_relative_eq!(e[(0, 0)], 1.0, epsilon = 1e-12);

        assert!(matches!(
            matrix_exponential(&dmatrix![1e5, 0.0; 0.0, 1e5], 1.0),
            Err(SereError::Overflow { .. })
        ));
    }

    #[test]
    fn expm_moderate_norm_accuracy() {
        // diagonal with |tM| = 50: compare to scalar exp
        let d = dmatrix![5.0, 0.0; 0.0, -5.0];
        let e = matrix_exponential(&d, 10.0).unwrap();
        assert_relative_eq!(e[(0, 0)], 50f64.exp(), max_relative = 1e-10);
        assert_relative_eq!(e[(1, 1)], (-50f64).exp(), max_relative = 1e-10);
    }

    fn single_state_path(horizon: f64) -> SwishPath {
        let events = EventSequence::new(horizon, vec![]).unwrap();
        SwishPath::from_parts(events, vec![0]).unwrap()
    }

    #[test]
    fn empty_product_is_one_semigroup_factor() {
        let g = dmatrix![0.1, 0.4; -0.2, 0.3];
        let family = MatrixFamily::new(vec![g.clone()], vec![DMatrix::zeros(2, 2)], None).unwrap();
        let path = single_state_path(2.0);
        let v = evolve_product(&path, &family, 1.0, 2.0, ScalingOrder::Averaging).unwrap();
        let expected = matrix_exponential(&g, 2.0).unwrap();
        assert!((v - expected).amax() < 1e-12);
    }

    #[test]
    fn state_independent_gamma_collapses() {
        // D1 = D2 = 0 and Gamma constant: V = exp(t Gamma) for any path
        let g = dmatrix![0.0, 0.5; -0.5, 0.1];
        let family = MatrixFamily::new(
            vec![g.clone(), g.clone()],
            vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
            None,
        )
        .unwrap();
        let path = SwishPath::simulate(&kernel(), &chain2(), 0, 5.0, 21).unwrap();
        let v = evolve_product(&path, &family, 1.0, 5.0, ScalingOrder::Averaging).unwrap();
        let expected = matrix_exponential(&g, 5.0).unwrap();
        assert!((v - expected).amax() < 1e-10);
    }

    #[test]
    fn scalar_closed_form() {
        // d = 1, D = 1: V = exp(sum gamma(x_{k-1}) theta_k + gamma(x_N)(t - tau_N))
        let gamma = [0.3, -0.6];
        let family = MatrixFamily::scalar(&gamma, &[0.0, 0.0], None).unwrap();
        let path = SwishPath::simulate(&kernel(), &chain2(), 0, 8.0, 22).unwrap();
        let v = evolve_product(&path, &family, 1.0, 8.0, ScalingOrder::Averaging).unwrap();

        let mut exponent = 0.0;
        let mut prev = 0.0;
        let n = path.events().count_up_to(8.0);
        for k in 0..n {
            let tau = path.events().times()[k];
            exponent += gamma[path.states()[k]] * (tau - prev);
            prev = tau;
        }
        exponent += gamma[path.states()[n]] * (8.0 - prev);
        assert_relative_eq!(v[(0, 0)], exponent.exp(), max_relative = 1e-10);
    }

    #[test]
    fn horizon_too_short() {
        let family = MatrixFamily::scalar(&[0.0, 0.0], &[0.0, 0.0], None).unwrap();
        let path = SwishPath::simulate(&kernel(), &chain2(), 0, 5.0, 23).unwrap();
        assert!(matches!(
            evolve_product(&path, &family, 0.1, 1.0, ScalingOrder::Averaging),
            Err(SereError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn residual_identity_cases() {
        // D = I, Gamma = 0: V = I, residual exactly 0
        let family = MatrixFamily::new(
            vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
            vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
            None,
        )
        .unwrap();
        let path = SwishPath::simulate(&kernel(), &chain2(), 0, 2.0, 24).unwrap();
        let f = dvector![1.0, -0.5];
        let r = integral_equation_residual(&path, &family, &f, 2.0, 1e-2, OperatorOrdering::default()).unwrap();
        assert!(r < 1e-14, "residual {r}");
    }

    #[test]
    fn residual_single_state_semigroup() {
        let g = dmatrix![0.2, 0.7; -0.4, -0.1];
        let family = MatrixFamily::new(vec![g], vec![DMatrix::zeros(2, 2)], None).unwrap();
        let path = single_state_path(1.0);
        let f = dvector![1.0, 1.0];
        let r = integral_equation_residual(&path, &family, &f, 1.0, 1e-3, OperatorOrdering::default()).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn residual_quadrature_order() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut rand_mat = |scale: f64| {
            DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-scale..scale))
        };
        let family = MatrixFamily::new(
            vec![rand_mat(0.5), rand_mat(0.5)],
            vec![rand_mat(0.3), rand_mat(0.3)],
            None,
        )
        .unwrap();
        let path = SwishPath::simulate(&kernel(), &chain2(), 0, 1.0, 25).unwrap();
        let f = dvector![0.8, -0.6];
        let r1 = integral_equation_residual(&path, &family, &f, 1.0, 2e-2, OperatorOrdering::default()).unwrap();
        let r2 = integral_equation_residual(&path, &family, &f, 1.0, 1e-2, OperatorOrdering::default()).unwrap();
        let ratio = r1 / r2;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio} (r1 {r1}, r2 {r2})");
    }

    #[test]
    fn literal_ordering_differs_for_non_commuting() {
        let family = MatrixFamily::new(
            vec![dmatrix![0.0, 1.0; 0.0, 0.0], dmatrix![0.0, 0.0; 1.0, 0.0]],
            vec![dmatrix![0.1, 0.0; 0.0, -0.1], dmatrix![0.0, 0.2; 0.2, 0.0]],
            None,
        )
        .unwrap();
        // fixed path with state changes so the non-commuting factors mix
        let events = EventSequence::new(2.0, vec![0.5, 1.0, 1.5]).unwrap();
        let path = SwishPath::from_parts(events, vec![0, 1, 0, 1]).unwrap();
        let f = dvector![1.0, -0.7];
        let consistent =
            integral_equation_residual(&path, &family, &f, 2.0, 1e-3, OperatorOrdering::ProductConsistent).unwrap();
        let literal =
            integral_equation_residual(&path, &family, &f, 2.0, 1e-3, OperatorOrdering::LiteralRightAction).unwrap();
        assert!(consistent < 1e-5, "consistent {consistent}");
        assert!(literal > 100.0 * consistent, "literal {literal} vs {consistent}");
    }

    #[test]
    fn factor_count_matches_event_count() {
        // Gamma = 0, D1 = G: V = (I + eps G)^N
        let g = dmatrix![0.0, 0.1; -0.1, 0.0];
        let family = MatrixFamily::new(
            vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
            vec![g.clone(), g.clone()],
            None,
        )
        .unwrap();
        let eps = 0.25;
        let t = 1.0;
        let path = SwishPath::simulate(&kernel(), &chain2(), 0, t / eps, 27).unwrap();
        let n = path.events().count_up_to(t / eps);
        let v = evolve_product(&path, &family, eps, t, ScalingOrder::Averaging).unwrap();
        let step = DMatrix::identity(2, 2) + eps * &g;
        let mut expected = DMatrix::identity(2, 2);
        for _ in 0..n {
            expected = &step * expected;
        }
        assert!((v - expected).amax() < 1e-10);
    }

    #[test]
    fn scaled_scalar_growth_rate() {
        // Gamma = 0, D1 = g (scalar): V_eps(t) = (1 + eps g)^{N(t/eps)};
        // log V / t -> lambda_hat * g as eps -> 0 by the Hawkes LLN
        let g = 0.5;
        let family = MatrixFamily::scalar(&[0.0, 0.0], &[g, g], None).unwrap();
        let k = kernel(); // lambda_hat = 2
        let f = dvector![1.0];
        let t = 1.0;
        let mut devs = Vec::new();
        for eps in [0.1, 0.01] {
            let n_reps = 200;
            let mut acc = 0.0;
            for rep in 0..n_reps {
                let v = simulate_scaled_evolution(&k, &chain2(), &family, &f, eps, t, ScalingOrder::Averaging, rep)
                    .unwrap();
                acc += v[0].ln() / (eps * g).ln_1p();
            }
            // acc/n estimates E N(t/eps); eps * that ~ lambda_hat * t
            let rate = acc / n_reps as f64 * eps;
            devs.push((rate - 2.0f64).abs());
        }
        assert!(devs[1] < devs[0] || devs[1] < 0.05, "devs {devs:?}");
    }

    #[test]
    fn balance_residual_cases() {
        let chain = chain2();
        let rho = chain.stationary_distribution().unwrap();
        let m = 0.5;
        // D1 = -m Gamma pointwise: residual 0
        let g0 = dmatrix![0.3, -0.1; 0.2, 0.0];
        let g1 = dmatrix![-0.2, 0.4; 0.1, 0.5];
        let family = MatrixFamily::new(
            vec![g0.clone(), g1.clone()],
            vec![-m * &g0, -m * &g1],
            None,
        )
        .unwrap();
        assert!(balance_residual(&family, &rho, m) < 1e-14);

        // scalar gamma with rho[gamma] = 0, D1 = 0
        let r = rho.as_slice();
        let gam = [1.0, -r[0] / r[1]];
        let fam2 = MatrixFamily::scalar(&gam, &[0.0, 0.0], None).unwrap();
        assert!(balance_residual(&fam2, &rho, m) < 1e-12);

        // generic non-balanced family
        let fam3 = MatrixFamily::scalar(&[1.0, 1.0], &[0.0, 0.0], None).unwrap();
        assert!(balance_residual(&fam3, &rho, m) > 0.1);
    }
}
