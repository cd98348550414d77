//! Independent per-objective Gaussian-process regression with a Matérn 5/2
//! kernel and per-dimension length scales.
//!
//! Targets are standardized internally and modelled by a centered process;
//! hyperparameters maximize the log marginal likelihood by projected
//! gradient ascent in log space from several starts. Training rows are
//! brought into a canonical order first, so predictions are invariant to
//! input permutation down to the last bit.

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dist::BiGaussian;

const SQRT_5: f64 = 2.236_067_977_499_79;

/// Decision points with their objective pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<[f64; 2]>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<[f64; 2]>) -> Result<Self, GpError> {
        if x.len() != y.len() || x.is_empty() {
            return Err(GpError::InvalidData(
                "inputs and targets must be non-empty and of equal length".into(),
            ));
        }
        let d = x[0].len();
        for row in &x {
            if row.len() != d || row.iter().any(|v| !v.is_finite()) {
                return Err(GpError::InvalidData(
                    "ragged or non-finite decision vector".into(),
                ));
            }
        }
        if y.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(GpError::InvalidData("non-finite target".into()));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("at least two distinct training points are required")]
    TooFewPoints,
    #[error("objective index must be 1 or 2, got {0}")]
    BadObjectiveIndex(usize),
    #[error("training covariance stayed singular up to jitter {0:.1e}")]
    SingularCovariance(f64),
}

/// Kernel hyperparameters in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct GpHyperparams {
    pub log_signal_var: f64,
    pub log_length_scales: Vec<f64>,
}

/// Fit settings; the defaults match the optimizer budget used throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct GpConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    /// Length-scale bounds as factors of the domain width.
    pub lengthscale_bounds: [f64; 2],
    /// Signal-variance bounds as factors of the (standardized) target
    /// variance.
    pub signal_bounds: [f64; 2],
    pub jitter_initial: f64,
    pub jitter_max: f64,
    /// Domain width per dimension used to scale the length-scale bounds.
    pub domain_width: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            n_starts: 8,
            max_iters: 60,
            lengthscale_bounds: [1e-2, 1e2],
            signal_bounds: [1e-6, 1e3],
            jitter_initial: 1e-10,
            jitter_max: 1e-4,
            domain_width: 1.0,
        }
    }
}

/// Posterior Gaussian process for one objective.
#[derive(Debug, Clone)]
pub struct GpModel {
    x_train: Vec<Vec<f64>>,
    hyper: GpHyperparams,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    alpha: DVector<f64>,
    lml: f64,
    jitter: f64,
    y_mean: f64,
    y_std: f64,
}

impl GpModel {
    pub fn hyperparams(&self) -> &GpHyperparams {
        &self.hyper
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and variance (raw target units) at `x`.
    pub fn predict_one(&self, x: &[f64]) -> (f64, f64) {
        let scales: Vec<f64> = self
            .hyper
            .log_length_scales
            .iter()
            .map(|l| l.exp())
            .collect();
        let signal = self.hyper.log_signal_var.exp();
        let k_star = DVector::from_fn(self.x_train.len(), |i, _| {
            matern52(x, &self.x_train[i], &scales, signal)
        });
        let mean_std = k_star.dot(&self.alpha);
        let v = self.chol.solve(&k_star);
        let var_std = (signal - k_star.dot(&v)).max(0.0);
        (
            self.y_mean + self.y_std * mean_std,
            self.y_std * self.y_std * var_std,
        )
    }
}

/// Posterior predictive law of the objective pair at `x`.
pub fn predict(m1: &GpModel, m2: &GpModel, x: &[f64]) -> BiGaussian {
    let (mu1, var1) = m1.predict_one(x);
    let (mu2, var2) = m2.predict_one(x);
    BiGaussian {
        mu1,
        mu2,
        sigma1: var1.max(0.0).sqrt(),
        sigma2: var2.max(0.0).sqrt(),
    }
}

/// Fits one objective with default settings and a cold start.
pub fn fit(data: &Dataset, objective_index: usize) -> Result<GpModel, GpError> {
    fit_with(data, objective_index, &GpConfig::default(), None)
}

/// Fits one objective; `warm` seeds the search with a previous optimum and
/// shrinks the multi-start budget to a local polish.
pub fn fit_with(
    data: &Dataset,
    objective_index: usize,
    cfg: &GpConfig,
    warm: Option<&GpHyperparams>,
) -> Result<GpModel, GpError> {
    if objective_index != 1 && objective_index != 2 {
        return Err(GpError::BadObjectiveIndex(objective_index));
    }
    if data.len() < 2 {
        return Err(GpError::TooFewPoints);
    }
    let d = data.dim();

    // Canonical row order makes the fit permutation-invariant.
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        data.x[a]
            .iter()
            .zip(&data.x[b])
            .map(|(u, v)| u.total_cmp(v))
            .find(|c| !c.is_eq())
            .unwrap_or_else(|| {
                data.y[a][objective_index - 1].total_cmp(&data.y[b][objective_index - 1])
            })
    });
    let x: Vec<Vec<f64>> = order.iter().map(|&i| data.x[i].clone()).collect();
    let y_raw: Vec<f64> = order
        .iter()
        .map(|&i| data.y[i][objective_index - 1])
        .collect();

    let n = y_raw.len();
    let y_mean = y_raw.iter().sum::<f64>() / n as f64;
    let y_var = y_raw.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
    let y_std = y_var.sqrt().max(1e-12);
    let y_std_vec: Vec<f64> = y_raw.iter().map(|v| (v - y_mean) / y_std).collect();
    let y = DVector::from_column_slice(&y_std_vec);

    let lo = [
        cfg.signal_bounds[0].ln(),
        (cfg.lengthscale_bounds[0] * cfg.domain_width).ln(),
    ];
    let hi = [
        cfg.signal_bounds[1].ln(),
        (cfg.lengthscale_bounds[1] * cfg.domain_width).ln(),
    ];
    let clamp_theta = |theta: &mut [f64]| {
        theta[0] = theta[0].clamp(lo[0], hi[0]);
        for l in theta[1..].iter_mut() {
            *l = l.clamp(lo[1], hi[1]);
        }
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        if w.log_length_scales.len() == d {
            let mut theta = Vec::with_capacity(d + 1);
            theta.push(w.log_signal_var);
            theta.extend_from_slice(&w.log_length_scales);
            clamp_theta(&mut theta);
            starts.push(theta);
        }
    }
    // Heuristic start: unit signal variance, medium length scales.
    let mut base = vec![0.0; d + 1];
    for l in base[1..].iter_mut() {
        *l = (0.5 * cfg.domain_width).ln();
    }
    clamp_theta(&mut base);
    starts.push(base);
    if warm.is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6770_5f66_6974); // constant: fit must be deterministic
        while starts.len() < cfg.n_starts {
            let theta: Vec<f64> = (0..=d)
                .map(|k| {
                    let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
                    let (a, b) = if k == 0 {
                        (lo[0], hi[0])
                    } else {
                        (lo[1], hi[1])
                    };
                    // Bias random starts toward the middle decades.
                    a + (b - a) * (0.25 + 0.5 * u)
                })
                .collect();
            starts.push(theta);
        }
    }

    let problem = LmlProblem { x: &x, y: &y, cfg };
    let mut best: Option<(f64, Vec<f64>, FitState)> = None;
    for start in &starts {
        let (theta, value, state) = ascend(&problem, start.clone(), cfg.max_iters, &clamp_theta)?;
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, theta, state));
        }
    }
    let (lml, theta, state) = best.expect("at least one start");

    Ok(GpModel {
        x_train: x,
        hyper: GpHyperparams {
            log_signal_var: theta[0],
            log_length_scales: theta[1..].to_vec(),
        },
        chol: state.chol,
        alpha: state.alpha,
        lml,
        jitter: state.jitter,
        y_mean,
        y_std,
    })
}

struct LmlProblem<'a> {
    x: &'a [Vec<f64>],
    y: &'a DVector<f64>,
    cfg: &'a GpConfig,
}

struct FitState {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
}

impl<'a> LmlProblem<'a> {
    /// Factorizes K(theta) + jitter I, escalating jitter on failure.
    fn factorize(&self, theta: &[f64]) -> Result<(f64, FitState), GpError> {
        let n = self.x.len();
        let signal = theta[0].exp();
        let scales: Vec<f64> = theta[1..].iter().map(|l| l.exp()).collect();
        let mut jitter = self.cfg.jitter_initial;
        loop {
            let k = DMatrix::from_fn(n, n, |i, j| {
                let v = matern52(&self.x[i], &self.x[j], &scales, signal);
                if i == j {
                    v + jitter
                } else {
                    v
                }
            });
            if let Some(chol) = nalgebra::Cholesky::new(k) {
                let alpha = chol.solve(self.y);
                let log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
                let lml = -0.5 * self.y.dot(&alpha)
                    - log_det
                    - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
                return Ok((
                    lml,
                    FitState {
                        chol,
                        alpha,
                        jitter,
                    },
                ));
            }
            jitter *= 10.0;
            if jitter > self.cfg.jitter_max {
                return Err(GpError::SingularCovariance(jitter));
            }
        }
    }

    /// Gradient of the log marginal likelihood w.r.t. the log-space
    /// hyperparameters at a factorized state.
    fn gradient(&self, theta: &[f64], state: &FitState) -> Vec<f64> {
        let n = self.x.len();
        let d = theta.len() - 1;
        let signal = theta[0].exp();
        let scales: Vec<f64> = theta[1..].iter().map(|l| l.exp()).collect();
        let k_inv = state.chol.inverse();
        // W = alpha alpha^T − K^{-1}; grad_j = 0.5 tr(W dK/dtheta_j).
        let mut grad = vec![0.0; d + 1];
        for i in 0..n {
            for j in 0..n {
                let w = state.alpha[i] * state.alpha[j] - k_inv[(i, j)];
                let (r2, dists) = scaled_dist(&self.x[i], &self.x[j], &scales);
                let r = r2.sqrt();
                let e = (-SQRT_5 * r).exp();
                let k_val = signal * (1.0 + SQRT_5 * r + 5.0 / 3.0 * r2) * e;
                // d k / d log signal_var = k (noise excluded).
                grad[0] += 0.5 * w * k_val;
                // d k / d log l_m = 5/3 signal (1 + sqrt5 r) e^{-sqrt5 r} * (delta_m / l_m)^2.
                let common = 5.0 / 3.0 * signal * (1.0 + SQRT_5 * r) * e;
                for (m, dm2) in dists.iter().enumerate() {
                    grad[1 + m] += 0.5 * w * common * dm2;
                }
            }
        }
        grad
    }
}

/// Projected gradient ascent with a backtracking step; returns the best
/// iterate, its value and factorization.
fn ascend(
    problem: &LmlProblem,
    mut theta: Vec<f64>,
    max_iters: usize,
    clamp_theta: &impl Fn(&mut [f64]),
) -> Result<(Vec<f64>, f64, FitState), GpError> {
    let (mut value, mut state) = problem.factorize(&theta)?;
    let mut step = 0.1;
    for _ in 0..max_iters {
        let grad = problem.gradient(&theta, &state);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-6 {
            break;
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut cand: Vec<f64> = theta
                .iter()
                .zip(&grad)
                .map(|(t, g)| t + step * g / gnorm.max(1.0))
                .collect();
            clamp_theta(&mut cand);
            if cand == theta {
                break;
            }
            match problem.factorize(&cand) {
                Ok((v, s)) if v > value => {
                    theta = cand;
                    value = v;
                    state = s;
                    improved = true;
                    step *= 1.5;
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !improved || step < 1e-8 {
            break;
        }
    }
    Ok((theta, value, state))
}

/// Matérn 5/2 with per-dimension length scales.
fn matern52(a: &[f64], b: &[f64], scales: &[f64], signal: f64) -> f64 {
    let mut r2 = 0.0;
    for m in 0..a.len() {
        let d = (a[m] - b[m]) / scales[m];
        r2 += d * d;
    }
    let r = r2.sqrt();
    signal * (1.0 + SQRT_5 * r + 5.0 / 3.0 * r2) * (-SQRT_5 * r).exp()
}

/// Squared scaled distance plus the per-dimension squared components.
fn scaled_dist(a: &[f64], b: &[f64], scales: &[f64]) -> (f64, Vec<f64>) {
    let mut r2 = 0.0;
    let mut parts = Vec::with_capacity(a.len());
    for m in 0..a.len() {
        let d = (a[m] - b[m]) / scales[m];
        let d2 = d * d;
        r2 += d2;
        parts.push(d2);
    }
    (r2, parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset() -> Dataset {
        Dataset::new(
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![[0.0, 1.0], [1.0, 0.5], [0.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn interpolates_training_points() {
        let data = toy_dataset();
        let model = fit(&data, 1).unwrap();
        for (x, y) in data.x.iter().zip(&data.y) {
            let (mean, var) = model.predict_one(x);
            assert!((mean - y[0]).abs() < 1e-4, "mean {mean} vs {}", y[0]);
            assert!(var >= 0.0 && var.sqrt() < 1e-3);
        }
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let data = toy_dataset();
        let model = fit(&data, 1).unwrap();
        let signal = model.hyperparams().log_signal_var.exp();
        let (_, var) = model.predict_one(&[1e6]);
        let var_std = var / (model.y_std * model.y_std);
        assert!(
            (var_std - signal).abs() / signal < 0.01,
            "far variance {var_std} vs prior {signal}"
        );
    }

    #[test]
    fn constant_targets() {
        let data = Dataset::new(
            vec![vec![0.0], vec![0.4], vec![0.9]],
            vec![[2.5, 0.0], [2.5, 0.0], [2.5, 0.0]],
        )
        .unwrap();
        let model = fit(&data, 1).unwrap();
        for x in [0.1, 0.5, 0.8] {
            let (mean, var) = model.predict_one(&[x]);
            assert!((mean - 2.5).abs() < 1e-6);
            assert!(var >= 0.0);
        }
        let (_, var_at_train) = model.predict_one(&[0.4]);
        assert!(var_at_train < 1e-9);
    }

    #[test]
    fn duplicate_inputs_resolved_by_jitter() {
        // Conflicting targets at one input: the posterior mean lands between
        // them instead of failing.
        let data = Dataset::new(
            vec![vec![0.3], vec![0.3], vec![0.9]],
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]],
        )
        .unwrap();
        let model = fit(&data, 1).unwrap();
        let (mean, _) = model.predict_one(&[0.3]);
        assert!(mean > 0.05 && mean < 0.95, "mean = {mean}");
    }

    #[test]
    fn variance_nonnegative_everywhere() {
        let data = toy_dataset();
        let m1 = fit(&data, 1).unwrap();
        let m2 = fit(&data, 2).unwrap();
        for k in 0..200 {
            let x = [-1.0 + 3.0 * k as f64 / 200.0];
            let pred = predict(&m1, &m2, &x);
            assert!(pred.sigma1 >= 0.0 && pred.sigma2 >= 0.0);
        }
    }

    #[test]
    fn fitted_lml_beats_every_start() {
        // Refitting from the fitted hyperparameters cannot do better than
        // the multi-start result.
        let data = Dataset::new(
            vec![
                vec![0.0, 0.1],
                vec![0.3, 0.9],
                vec![0.7, 0.2],
                vec![1.0, 0.6],
            ],
            vec![[0.1, 0.0], [0.9, 0.0], [0.4, 0.0], [0.7, 0.0]],
        )
        .unwrap();
        let model = fit(&data, 1).unwrap();
        let warm = fit_with(&data, 1, &GpConfig::default(), Some(model.hyperparams())).unwrap();
        assert!(warm.log_marginal_likelihood() >= model.log_marginal_likelihood() - 1e-9);
    }

    #[test]
    fn permutation_invariant_predictions() {
        let data = Dataset::new(
            vec![
                vec![0.1, 0.2],
                vec![0.8, 0.3],
                vec![0.4, 0.9],
                vec![0.6, 0.5],
            ],
            vec![[0.3, 0.1], [0.7, 0.9], [0.2, 0.4], [0.9, 0.6]],
        )
        .unwrap();
        let shuffled = Dataset::new(
            vec![
                vec![0.6, 0.5],
                vec![0.1, 0.2],
                vec![0.4, 0.9],
                vec![0.8, 0.3],
            ],
            vec![[0.9, 0.6], [0.3, 0.1], [0.2, 0.4], [0.7, 0.9]],
        )
        .unwrap();
        let a = fit(&data, 1).unwrap();
        let b = fit(&shuffled, 1).unwrap();
        for x in [[0.25, 0.25], [0.5, 0.7], [0.9, 0.1]] {
            let (ma, va) = a.predict_one(&x);
            let (mb, vb) = b.predict_one(&x);
            assert_eq!(ma, mb);
            assert_eq!(va, vb);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = toy_dataset();
        assert!(matches!(fit(&data, 0), Err(GpError::BadObjectiveIndex(0))));
        assert!(matches!(fit(&data, 3), Err(GpError::BadObjectiveIndex(3))));
        let single = Dataset::new(vec![vec![0.0]], vec![[1.0, 1.0]]).unwrap();
        assert!(matches!(fit(&single, 1), Err(GpError::TooFewPoints)));
        assert!(Dataset::new(vec![vec![0.0]], vec![]).is_err());
        assert!(Dataset::new(vec![vec![f64::NAN]], vec![[0.0, 0.0]]).is_err());
    }
}
