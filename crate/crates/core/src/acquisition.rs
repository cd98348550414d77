//! Acquisition functions over the predictive law of an objective point:
//! probability of improvement, its epsilon-shifted variant, the optimistic
//! hypervolume bound, and the two distribution-based criteria (quantile
//! upper confidence bound and epsilon probability of hypervolume
//! improvement), plus their iteration schedules.

use crate::dist::{BiGaussian, DistError, HviDistribution};
use crate::gauss::Gaussian1D;
use crate::pareto::{CellGrid, ParetoFront2D, Point2};

/// Probability that the objective point is non-dominated with respect to the
/// front: the exact sum of Gaussian box masses over the non-dominated cells,
/// no quadrature involved.
pub fn poi(pred: &BiGaussian, front: &ParetoFront2D) -> f64 {
    poi_on_grid(pred, &CellGrid::new(front))
}

/// `poi` against a precomputed cell grid.
pub fn poi_on_grid(pred: &BiGaussian, grid: &CellGrid) -> f64 {
    let n = grid.n();
    let g1 = Gaussian1D::new(pred.mu1, pred.sigma1.max(1e-300)).expect("positive sd");
    let g2 = Gaussian1D::new(pred.mu2, pred.sigma2.max(1e-300)).expect("positive sd");
    // Column masses (last column extends beyond the reference point) and row
    // masses likewise; the diagonal i + j <= n collects the non-dominated
    // region of the plain front, including the two outer strips.
    let mut phi1 = Vec::with_capacity(n + 2);
    for k in 0..=(n + 1) {
        phi1.push(g1.cdf(grid.q1(k)));
    }
    let mut phi2 = Vec::with_capacity(n + 2);
    for k in 0..=(n + 1) {
        phi2.push(g2.cdf(grid.q2(k)));
    }
    let col = |i: usize| {
        if i == n {
            1.0 - phi1[n]
        } else {
            phi1[i + 1] - phi1[i]
        }
    };
    let row = |j: usize| {
        if j == n {
            1.0 - phi2[1]
        } else {
            phi2[n - j] - phi2[n + 1 - j]
        }
    };
    let mut mass = 0.0;
    for i in 0..=n {
        let ci = col(i);
        if ci == 0.0 {
            continue;
        }
        for j in 0..=(n - i) {
            mass += ci * row(j);
        }
    }
    mass.clamp(0.0, 1.0)
}

/// Probability of improvement after shifting the predictive mean by `eps`
/// in both objectives (worsening it, since both are minimized).
pub fn eps_poi(pred: &BiGaussian, front: &ParetoFront2D, eps: f64) -> f64 {
    debug_assert!(eps >= 0.0);
    let shifted = BiGaussian {
        mu1: pred.mu1 + eps,
        mu2: pred.mu2 + eps,
        ..*pred
    };
    poi(&shifted, front)
}

/// Hypervolume improvement of the optimistic point `mean − omega * sd`.
pub fn naive_ucb(pred: &BiGaussian, front: &ParetoFront2D, omega: f64) -> f64 {
    debug_assert!(omega >= 0.0);
    front.hvi_plus(Point2::new(
        pred.mu1 - omega * pred.sigma1,
        pred.mu2 - omega * pred.sigma2,
    ))
}

/// The `omega`-quantile of the improvement distribution: the improvement
/// value bounding the one-sided confidence interval of level `omega`.
pub fn ucb(dist: &HviDistribution, omega: f64) -> Result<f64, DistError> {
    dist.quantile(omega)
}

/// Probability of improving the current hypervolume by at least the fraction
/// `eps`: `1 − CDF(eps * HV(front))`.
pub fn eps_pohvi(dist: &HviDistribution, front: &ParetoFront2D, eps: f64) -> f64 {
    debug_assert!(eps >= 0.0);
    1.0 - dist.marginal_cdf(eps * front.hypervolume())
}

/// Hyperparameter schedules over the model-based iteration counter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Constant(f64),
    /// `initial * exp(-rate * t)`.
    ExponentialDecay {
        initial: f64,
        rate: f64,
    },
    /// `sqrt(t / ln t)`, clamped to `cap` where the expression is undefined
    /// (t = 0, 1) or exceeds it.
    NaiveUcbOmega {
        cap: f64,
    },
    /// `Phi(0.55 * sqrt(ln(25 t)))`, clamped into (0, 1); the undefined
    /// t = 0 takes the t = 1 value.
    UcbOmega,
}

impl Schedule {
    /// Decay schedule used for the epsilon of the hypervolume-improvement
    /// probability.
    pub fn eps_pohvi_default() -> Self {
        Schedule::ExponentialDecay {
            initial: 0.05,
            rate: 0.02,
        }
    }

    pub fn naive_ucb_default() -> Self {
        Schedule::NaiveUcbOmega { cap: 10.0 }
    }

    pub fn value(&self, t: u32) -> f64 {
        match *self {
            Schedule::Constant(c) => c,
            Schedule::ExponentialDecay { initial, rate } => initial * (-rate * t as f64).exp(),
            Schedule::NaiveUcbOmega { cap } => {
                if t < 2 {
                    return cap;
                }
                let t = t as f64;
                (t / t.ln()).sqrt().min(cap)
            }
            Schedule::UcbOmega => {
                let t = t.max(1) as f64;
                let omega = crate::gauss::std_cdf(0.55 * (25.0 * t).ln().sqrt());
                omega.clamp(1e-6, 1.0 - 1e-6)
            }
        }
    }
}

/// Schedule evaluation at one iteration.
pub fn schedule_value(s: &Schedule, t: u32) -> f64 {
    s.value(t)
}
