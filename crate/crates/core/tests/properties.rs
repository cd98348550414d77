//! Randomized invariants of the geometry and the distribution, including
//! property tests over arbitrary observation sets.

mod common;

use proptest::prelude::*;
use rand_chacha::rand_core::RngCore;

use hvi_core::dist::{BiGaussian, BuildOptions, HviDistribution};
use hvi_core::gauss::QuadratureConfig;
use hvi_core::mc::{self, EmpiricalDistribution, McConfig};
use hvi_core::pareto::{self, decompose_cells, CellGrid, CellKind, ParetoFront2D, Point2};

use common::{random_front, random_pred, rng, unit};

#[test]
fn generalized_hvi_continuous_across_cell_boundaries() {
    let mut r = rng(11);
    let eps = 1e-11;
    for _ in 0..300 {
        let front = random_front(&mut r, 12);
        if front.is_empty() {
            continue;
        }
        let grid = CellGrid::new(&front);
        let n = grid.n();
        // A random finite vertical grid line and a random height.
        let k = 1 + (r.next_u64() as usize) % (n + 1);
        let x = grid.q1(k);
        let y2 = -1.0 + 12.0 * unit(&mut r);
        let left = front.generalized_hvi(Point2::new(x - eps, y2));
        let right = front.generalized_hvi(Point2::new(x + eps, y2));
        assert!(
            (left - right).abs() <= 1e-9,
            "jump across x = {x}: {left} vs {right}"
        );
        // Same across a finite horizontal line (index shifted down by one).
        let y = grid.q2(k - 1);
        let x1 = -1.0 + 12.0 * unit(&mut r);
        let below = front.generalized_hvi(Point2::new(x1, y - eps));
        let above = front.generalized_hvi(Point2::new(x1, y + eps));
        assert!(
            (below - above).abs() <= 1e-9,
            "jump across y = {y}: {below} vs {above}"
        );
    }
}

#[test]
fn cell_formula_matches_staircase_sweeps() {
    // The shifted-product form reconstructed from grid corners must agree
    // with the hypervolume-difference sweep on the non-dominated side and
    // with the penalty area on the dominated side.
    let mut r = rng(99);
    for _ in 0..500 {
        let front = random_front(&mut r, 15);
        let grid = CellGrid::new(&front);
        let n = grid.n();
        let y = Point2::new(10.0 * unit(&mut r), 10.0 * unit(&mut r));
        let i = (0..=n)
            .rev()
            .find(|&i| grid.q1(i) <= y.y1)
            .expect("column exists");
        let j = (0..=n)
            .rev()
            .find(|&j| grid.q2(n + 1 - j) <= y.y2)
            .expect("row exists");
        let (a1, a2) = (grid.q1(n + 1 - j), grid.q2(i));
        let value = match grid.kind(i.min(n), j.min(n)) {
            CellKind::NonDominated => {
                let l1 = a1 - grid.q1(i + 1);
                let l2 = a2 - grid.q2(n - j);
                let gamma = grid.hvi_plus_at_corner(i + 1, n - j) - l1 * l2;
                (a1 - y.y1) * (a2 - y.y2) + gamma
            }
            CellKind::Dominated => {
                let l1 = grid.q1(i) - a1;
                let l2 = grid.q2(n + 1 - j) - a2;
                let gamma = grid.hvi_minus_abs_at_corner(i, n + 1 - j) - l1 * l2;
                -((y.y1 - a1) * (y.y2 - a2) + gamma)
            }
        };
        let sweep = front.generalized_hvi(y);
        assert!(
            (value - sweep).abs() <= 1e-12 * sweep.abs().max(1.0),
            "cell formula {value} vs sweep {sweep} at ({}, {})",
            y.y1,
            y.y2
        );
    }
}

#[test]
fn cell_probabilities_sum_to_one_before_pruning() {
    let quad = QuadratureConfig::default();
    let no_prune = BuildOptions {
        prune_sigma: f64::INFINITY,
        ..BuildOptions::default()
    };
    let mut r = rng(2718);
    for _ in 0..100 {
        let front = random_front(&mut r, 20);
        let pred = random_pred(&mut r);
        let dist = HviDistribution::build_with(&front, &pred, &quad, &no_prune).unwrap();
        let total: f64 = dist.cells().iter().map(|c| c.prob).sum();
        assert!((total - 1.0).abs() <= 1e-9, "cell masses sum to {total}");
    }
}

#[test]
fn poi_complements_dominated_mass() {
    let quad = QuadratureConfig::default();
    let no_prune = BuildOptions {
        prune_sigma: f64::INFINITY,
        ..BuildOptions::default()
    };
    let mut r = rng(1618);
    for _ in 0..50 {
        let front = random_front(&mut r, 15);
        let pred = random_pred(&mut r);
        let dist = HviDistribution::build_with(&front, &pred, &quad, &no_prune).unwrap();
        let dominated: f64 = dist
            .cells()
            .iter()
            .filter(|c| c.kind == CellKind::Dominated)
            .map(|c| c.prob)
            .sum();
        let poi = hvi_core::acquisition::poi(&pred, &front);
        assert!(
            (poi + dominated - 1.0).abs() <= 1e-9,
            "poi {poi} + dominated {dominated} != 1"
        );
    }
}

#[test]
fn hvi_minus_nonpositive_and_zero_only_on_staircase() {
    let mut r = rng(4242);
    for _ in 0..200 {
        let front = random_front(&mut r, 10);
        if front.is_empty() {
            continue;
        }
        // Strictly dominated interior points get a strictly negative value.
        let base = front.points()[(r.next_u64() as usize) % front.len()];
        let y = Point2::new(base.y1 + 0.05, base.y2 + 0.05);
        let v = front.hvi_minus(y).unwrap();
        assert!(v < 0.0, "interior dominated point scored {v}");
        // Staircase points themselves sit at zero.
        assert_eq!(front.hvi_minus(base).unwrap(), 0.0);
        // Moving away componentwise never increases the value.
        let further = Point2::new(y.y1 + 0.1, y.y2 + 0.1);
        assert!(front.hvi_minus(further).unwrap() <= v);
    }
}

#[test]
fn exact_cdf_within_dkw_band_on_random_instances() {
    // 50 random (front, predictive) pairs against 1e5-sample empirical CDFs
    // on a dense grid, held to the 99% confidence band.
    let quad = QuadratureConfig::default();
    let opts = BuildOptions {
        prune_sigma: 6.0,
        ..BuildOptions::default()
    };
    let mut r = rng(86);
    let mut worst: f64 = 0.0;
    for inst in 0..50 {
        let front = random_front(&mut r, 20);
        let pred = random_pred(&mut r);
        let dist = HviDistribution::build_with(&front, &pred, &quad, &opts).unwrap();
        let samples = mc::sample_hvi(
            &front,
            &pred,
            &McConfig {
                n_samples: 100_000,
                seed: 9000 + inst,
            },
        );
        let emp = EmpiricalDistribution::new(samples).unwrap();
        let (lo, hi) = dist.support();
        let mut sup: f64 = 0.0;
        for k in 0..=2000 {
            let d = lo + (hi - lo) * k as f64 / 2000.0;
            sup = sup.max((dist.marginal_cdf(d) - emp.cdf(d)).abs());
        }
        worst = worst.max(sup);
        assert!(sup <= 0.0086, "instance {inst}: sup-norm {sup}");
    }
    println!("exact vs MC over 50 random instances: worst sup-norm = {worst:.5}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_returns_minimal_elements(
        raw in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 0..40)
    ) {
        let points: Vec<Point2> = raw.iter().map(|&(a, b)| Point2::new(a, b)).collect();
        let front = pareto::non_dominated_filter(&points);
        // Mutually non-dominated and sorted.
        for w in front.windows(2) {
            prop_assert!(w[0].y1 < w[1].y1 && w[0].y2 > w[1].y2);
        }
        // Every input point is represented: kept, or dominated by a keeper.
        for p in &points {
            prop_assert!(
                front.iter().any(|q| pareto::weakly_dominates(*q, *p)),
                "point ({}, {}) lost", p.y1, p.y2
            );
        }
    }

    #[test]
    fn hypervolume_monotone_under_insertion(
        raw in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..30),
        extra in (0.0f64..10.0, 0.0f64..10.0)
    ) {
        let reference = Point2::new(10.0, 10.0);
        let points: Vec<Point2> = raw.iter().map(|&(a, b)| Point2::new(a, b)).collect();
        let front = ParetoFront2D::from_observations(&points, reference).unwrap();
        let hv = front.hypervolume();
        let mut bigger = points.clone();
        bigger.push(Point2::new(extra.0, extra.1));
        let grown = ParetoFront2D::from_observations(&bigger, reference).unwrap();
        prop_assert!(grown.hypervolume() >= hv - 1e-12);
        // The improvement of the added point is exactly the growth.
        let gain = front.hvi_plus(Point2::new(extra.0, extra.1));
        prop_assert!((grown.hypervolume() - hv - gain).abs() <= 1e-9);
    }

    #[test]
    fn cells_tile_the_clipped_box(seed in any::<u64>()) {
        let mut r = rng(seed);
        let front = random_front(&mut r, 12);
        let cells = decompose_cells(&front);
        let n = front.len();
        prop_assert_eq!(cells.len(), (n + 1) * (n + 1));
        let clip = -5.0;
        let mut total = 0.0;
        for cell in &cells {
            let x0 = cell.lower.y1.max(clip);
            let y0 = cell.lower.y2.max(clip);
            total += (cell.upper.y1 - x0).max(0.0) * (cell.upper.y2 - y0).max(0.0);
        }
        let expect = (10.0 - clip) * (10.0 - clip);
        prop_assert!((total - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn marginal_cdf_bounded_and_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let front = random_front(&mut r, 10);
        let pred = random_pred(&mut r);
        let quad = QuadratureConfig::default();
        let dist = HviDistribution::build(&front, &pred, &quad).unwrap();
        let (lo, hi) = dist.support();
        let mut prev = 0.0;
        for k in 0..=50 {
            let d = lo - 1.0 + (hi - lo + 2.0) * k as f64 / 50.0;
            let c = dist.marginal_cdf(d);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(c >= prev - 1e-9);
            prev = c;
        }
    }
}

#[test]
fn bigaussian_validation() {
    assert!(BiGaussian::new(0.0, 0.0, -1.0, 1.0).is_err());
    assert!(BiGaussian::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
    assert!(BiGaussian::new(0.0, 0.0, 0.0, 0.0).is_ok());
}
