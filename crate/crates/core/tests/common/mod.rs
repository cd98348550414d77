//! Shared oracles and instance generators for the integration suites.
//!
//! The rectangle-union oracle computes areas by coordinate compression and
//! never touches the staircase sweeps it is checking.
#![allow(dead_code)] // not every suite uses every helper

use hvi_core::dist::BiGaussian;
use hvi_core::pareto::{ParetoFront2D, Point2};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Exact area of a union of axis-aligned rectangles `[x0, x1] x [y0, y1]`.
pub fn rect_union_area(rects: &[[f64; 4]]) -> f64 {
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r[0], r[2]]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r[1], r[3]]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut area = 0.0;
    for wx in xs.windows(2) {
        let mx = 0.5 * (wx[0] + wx[1]);
        for wy in ys.windows(2) {
            let my = 0.5 * (wy[0] + wy[1]);
            if rects
                .iter()
                .any(|r| r[0] <= mx && mx <= r[2] && r[1] <= my && my <= r[3])
            {
                area += (wx[1] - wx[0]) * (wy[1] - wy[0]);
            }
        }
    }
    area
}

/// Hypervolume of a point set by the rectangle-union oracle.
pub fn oracle_hv(points: &[Point2], r: Point2) -> f64 {
    let rects: Vec<[f64; 4]> = points
        .iter()
        .filter(|p| p.y1 < r.y1 && p.y2 < r.y2)
        .map(|p| [p.y1, p.y2, r.y1, r.y2])
        .collect();
    rect_union_area(&rects)
}

/// Generalized hypervolume improvement straight from the definition: the
/// positive branch as a hypervolume difference of box unions, the negative
/// branch as the union of boxes between the front points weakly dominating
/// the (reference-clipped) point and that point.
pub fn oracle_generalized_hvi(front: &ParetoFront2D, y: Point2) -> f64 {
    let r = front.ref_point();
    let dominated = y.y1 >= r.y1
        || y.y2 >= r.y2
        || front
            .points()
            .iter()
            .any(|p| p.y1 <= y.y1 && p.y2 <= y.y2 && (p.y1 != y.y1 || p.y2 != y.y2));
    if !dominated {
        let mut with = front.points().to_vec();
        with.push(y);
        return oracle_hv(&with, r) - oracle_hv(front.points(), r);
    }
    let clip = Point2::new(y.y1.min(r.y1), y.y2.min(r.y2));
    let rects: Vec<[f64; 4]> = front
        .points()
        .iter()
        .filter(|p| p.y1 <= clip.y1 && p.y2 <= clip.y2)
        .map(|p| [p.y1, p.y2, clip.y1, clip.y2])
        .collect();
    -rect_union_area(&rects)
}

/// Random strictly ordered front of up to `n_max` points inside `[0, 10]^2`
/// with reference point `(10, 10)`; stratified coordinates keep the order
/// strict for every draw.
pub fn random_front(rng: &mut ChaCha8Rng, n_max: usize) -> ParetoFront2D {
    let n = (rng.next_u64() % (n_max as u64 + 1)) as usize;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let y1 = 0.25 + (i as f64 + unit(rng)) * 9.0 / n as f64;
        let y2 = 9.75 - (i as f64 + unit(rng)) * 9.0 / n as f64;
        points.push(Point2::new(y1, y2));
    }
    ParetoFront2D::new(points, Point2::new(10.0, 10.0)).expect("stratified points are strict")
}

/// Random predictive law kept at least seven standard deviations inside the
/// reference walls, so censoring atoms and beyond-box mass are negligible.
pub fn random_pred(rng: &mut ChaCha8Rng) -> BiGaussian {
    let mu1 = 1.5 + 5.0 * unit(rng);
    let mu2 = 1.5 + 5.0 * unit(rng);
    let cap = |mu: f64| ((10.0 - mu) / 7.0).min(0.8);
    let sigma1 = 0.15 + (cap(mu1) - 0.15) * unit(rng);
    let sigma2 = 0.15 + (cap(mu2) - 0.15) * unit(rng);
    BiGaussian::new(mu1, mu2, sigma1, sigma2).expect("finite parameters")
}
