//! Exact distribution of the hypervolume improvement for bi-objective
//! Bayesian optimization, with distribution-based acquisition functions, a
//! Monte-Carlo oracle, Gaussian-process surrogates, the ZDT benchmark suite
//! and a sequential optimization driver.

pub mod acquisition;
pub mod bo;
pub mod dist;
pub mod gauss;
pub mod gp;
pub mod mc;
pub mod pareto;
pub mod problems;
pub mod report;

pub use dist::{BiGaussian, BuildOptions, CellLaw, HviDistribution};
pub use gauss::{Gaussian1D, Quadrature, QuadratureConfig};
pub use pareto::{Cell, CellGrid, CellKind, ParetoFront2D, Point2};
