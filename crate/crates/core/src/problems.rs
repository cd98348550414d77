//! The bi-objective ZDT benchmark problems (1-4 and 6) and Latin-hypercube
//! designs of experiments.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::pareto::Point2;

/// Per-dimension `[lo, hi]` box bounds of the decision space.
pub type Bounds = Vec<[f64; 2]>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem name `{0}`")]
    UnknownName(String),
    #[error("decision vector has {got} dimensions, expected {expected}")]
    WrongDimension { got: usize, expected: usize },
    #[error("coordinate {index} = {value} outside [{lo}, {hi}]")]
    OutOfDomain {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

/// One ZDT test problem over the unit box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
}

impl Problem {
    pub fn by_name(name: &str) -> Result<Self, ProblemError> {
        match name.to_ascii_lowercase().as_str() {
            "zdt1" => Ok(Self::Zdt1),
            "zdt2" => Ok(Self::Zdt2),
            "zdt3" => Ok(Self::Zdt3),
            "zdt4" => Ok(Self::Zdt4),
            "zdt6" => Ok(Self::Zdt6),
            other => Err(ProblemError::UnknownName(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zdt1 => "zdt1",
            Self::Zdt2 => "zdt2",
            Self::Zdt3 => "zdt3",
            Self::Zdt4 => "zdt4",
            Self::Zdt6 => "zdt6",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zdt1 | Self::Zdt2 | Self::Zdt3 => 30,
            Self::Zdt4 | Self::Zdt6 => 10,
        }
    }

    pub fn bounds(&self) -> Bounds {
        vec![[0.0, 1.0]; self.dim()]
    }

    /// Evaluates the objective pair; rejects vectors outside the box.
    pub fn evaluate(&self, x: &[f64]) -> Result<Point2, ProblemError> {
        if x.len() != self.dim() {
            return Err(ProblemError::WrongDimension {
                got: x.len(),
                expected: self.dim(),
            });
        }
        for (index, &value) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(ProblemError::OutOfDomain {
                    index,
                    value,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(self.evaluate_unchecked(x))
    }

    fn evaluate_unchecked(&self, x: &[f64]) -> Point2 {
        let n = x.len() as f64;
        let tail: f64 = x.iter().skip(1).sum();
        match self {
            Self::Zdt1 => {
                let f1 = x[0];
                let g = 1.0 + 9.0 * tail / (n - 1.0);
                Point2::new(f1, g * (1.0 - (f1 / g).sqrt()))
            }
            Self::Zdt2 => {
                let f1 = x[0];
                let g = 1.0 + 9.0 * tail / (n - 1.0);
                Point2::new(f1, g * (1.0 - (f1 / g).powi(2)))
            }
            Self::Zdt3 => {
                let f1 = x[0];
                let g = 1.0 + 9.0 * tail / (n - 1.0);
                let h = 1.0 - (f1 / g).sqrt() - (f1 / g) * (10.0 * PI * f1).sin();
                Point2::new(f1, g * h)
            }
            Self::Zdt4 => {
                let f1 = x[0];
                let g = 1.0
                    + 10.0 * (n - 1.0)
                    + x.iter()
                        .skip(1)
                        .map(|&v| v * v - 10.0 * (4.0 * PI * v).cos())
                        .sum::<f64>();
                Point2::new(f1, g * (1.0 - (f1 / g).sqrt()))
            }
            Self::Zdt6 => {
                let f1 = 1.0 - (-4.0 * x[0]).exp() * (6.0 * PI * x[0]).sin().powi(6);
                let g = 1.0 + 9.0 * (tail / (n - 1.0)).powf(0.25);
                Point2::new(f1, g * (1.0 - (f1 / g).powi(2)))
            }
        }
    }
}

/// A Latin-hypercube plan: `n_points` samples, one per stratum and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoePlan {
    pub n_points: usize,
    pub seed: u64,
}

/// Latin-hypercube samples over `bounds`: per dimension the strata are a
/// random permutation and each value sits uniformly inside its stratum.
/// Deterministic per seed.
pub fn lhs(plan: &DoePlan, bounds: &[[f64; 2]]) -> Vec<Vec<f64>> {
    let n = plan.n_points;
    let d = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut points = vec![vec![0.0; d]; n];
    for (j, &[lo, hi]) in bounds.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (i, point) in points.iter_mut().enumerate() {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
            point[j] = lo + (strata[i] as f64 + u) / n as f64 * (hi - lo);
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zdt1_anchor_values() {
        let p = Problem::Zdt1;
        let zeros = vec![0.0; 30];
        let y = p.evaluate(&zeros).unwrap();
        assert!((y.y1 - 0.0).abs() < 1e-15 && (y.y2 - 1.0).abs() < 1e-15);
        let mut x = vec![0.0; 30];
        x[0] = 1.0;
        let y = p.evaluate(&x).unwrap();
        assert!((y.y1 - 1.0).abs() < 1e-15 && y.y2.abs() < 1e-15);
    }

    #[test]
    fn zdt2_anchor_value() {
        let y = Problem::Zdt2.evaluate(&vec![0.0; 30]).unwrap();
        assert!((y.y1 - 0.0).abs() < 1e-15 && (y.y2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zdt1_front_shape() {
        let p = Problem::Zdt1;
        for k in 0..=20 {
            let mut x = vec![0.0; 30];
            x[0] = k as f64 / 20.0;
            let y = p.evaluate(&x).unwrap();
            assert!((y.y2 - (1.0 - y.y1.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn zdt4_multimodal_but_front_at_zero_tail() {
        let p = Problem::Zdt4;
        let mut x = vec![0.0; 10];
        x[0] = 0.25;
        let y = p.evaluate(&x).unwrap();
        assert!((y.y2 - (1.0 - 0.25f64.sqrt())).abs() < 1e-12);
        // Off the front the Rastrigin-style tail pushes g far above 1.
        let x = vec![0.25; 10];
        let y = p.evaluate(&x).unwrap();
        assert!(y.y2 > 10.0);
    }

    #[test]
    fn zdt6_front_range() {
        let p = Problem::Zdt6;
        let mut min_f1: f64 = f64::INFINITY;
        for k in 0..=1000 {
            let mut x = vec![0.0; 10];
            x[0] = k as f64 / 1000.0;
            let y = p.evaluate(&x).unwrap();
            min_f1 = min_f1.min(y.y1);
            assert!(y.y1 <= 1.0 + 1e-12);
        }
        assert!((min_f1 - 0.28).abs() < 0.01, "min f1 = {min_f1}");
    }

    #[test]
    fn evaluate_never_nan_on_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for p in [
            Problem::Zdt1,
            Problem::Zdt2,
            Problem::Zdt3,
            Problem::Zdt4,
            Problem::Zdt6,
        ] {
            for _ in 0..200 {
                let x: Vec<f64> = (0..p.dim())
                    .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0))
                    .collect();
                let y = p.evaluate(&x).unwrap();
                assert!(y.is_finite(), "{:?} produced {:?}", p, y);
            }
        }
    }

    #[test]
    fn evaluate_rejects_bad_input() {
        assert!(matches!(
            Problem::Zdt1.evaluate(&[0.5; 10]),
            Err(ProblemError::WrongDimension { .. })
        ));
        let mut x = vec![0.5; 30];
        x[3] = 1.5;
        assert!(matches!(
            Problem::Zdt1.evaluate(&x),
            Err(ProblemError::OutOfDomain { index: 3, .. })
        ));
        assert!(Problem::by_name("zdt5").is_err());
        assert_eq!(Problem::by_name("ZDT3").unwrap(), Problem::Zdt3);
    }

    #[test]
    fn lhs_stratification() {
        let bounds = vec![[0.0, 1.0]; 30];
        let plan = DoePlan {
            n_points: 30,
            seed: 99,
        };
        let pts = lhs(&plan, &bounds);
        assert_eq!(pts.len(), 30);
        for j in 0..30 {
            let mut strata: Vec<usize> = pts.iter().map(|p| (p[j] * 30.0) as usize).collect();
            strata.sort_unstable();
            let expect: Vec<usize> = (0..30).collect();
            assert_eq!(strata, expect, "dimension {j} not stratified");
        }
        // Determinism and seed sensitivity.
        assert_eq!(pts, lhs(&plan, &bounds));
        assert_ne!(
            pts,
            lhs(
                &DoePlan {
                    n_points: 30,
                    seed: 100
                },
                &bounds
            )
        );
        let single = lhs(
            &DoePlan {
                n_points: 1,
                seed: 7,
            },
            &[[2.0, 4.0]],
        );
        assert_eq!(single.len(), 1);
        assert!(single[0][0] >= 2.0 && single[0][0] < 4.0);
    }
}
