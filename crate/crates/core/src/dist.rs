//! Exact distribution of the generalized hypervolume improvement under an
//! independent bivariate Gaussian predictive law.
//!
//! The reference box is decomposed into cells on which the improvement is a
//! shifted product of two non-negative truncated Gaussians. Per cell the
//! conditional PDF/CDF reduce to one-dimensional integrals; the marginal law
//! mixes them with the cell occupation probabilities. Cells on the outermost
//! row/column are extended beyond the reference point so the predictive mass
//! sums to one: improvement values out there saturate at the box edge, which
//! shows up as pinned-coordinate pieces (and, on the staircase continuation,
//! as point masses at zero).

use thiserror::Error;

use crate::gauss::{self, Gaussian1D, QuadratureConfig};
use crate::pareto::{CellGrid, CellKind, FrontError, ParetoFront2D, Point2};

/// Independent bivariate Gaussian predictive law for an objective point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiGaussian {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("invalid predictive law: mu = ({mu1}, {mu2}), sigma = ({sigma1}, {sigma2})")]
    InvalidPredictive {
        mu1: f64,
        mu2: f64,
        sigma1: f64,
        sigma2: f64,
    },
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error("quantile level {0} outside (0, 1)")]
    OmegaOutOfRange(f64),
}

impl BiGaussian {
    pub fn new(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64) -> Result<Self, DistError> {
        if mu1.is_finite() && mu2.is_finite() && sigma1 >= 0.0 && sigma2 >= 0.0 {
            Ok(Self {
                mu1,
                mu2,
                sigma1,
                sigma2,
            })
        } else {
            Err(DistError::InvalidPredictive {
                mu1,
                mu2,
                sigma1,
                sigma2,
            })
        }
    }

    pub fn mean(&self) -> Point2 {
        Point2::new(self.mu1, self.mu2)
    }
}

/// Build knobs beyond the quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Cells are discarded when they fall outside the `prune_sigma` band of
    /// the predictive mean in both coordinates.
    pub prune_sigma: f64,
    /// Infinite cell bounds are clipped at `clip_sigma` standard deviations
    /// when finite integration limits are required.
    pub clip_sigma: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            prune_sigma: 3.0,
            clip_sigma: 6.0,
        }
    }
}

/// Standard deviations below this collapse the coordinate to its mean.
const DIRAC_SIGMA: f64 = 1e-12;
/// Truncation intervals narrower than this are treated as a constant.
const ZERO_WIDTH: f64 = 1e-14;
/// Pieces lighter than this carry no measurable mass and are dropped.
const NEGLIGIBLE_PROB: f64 = 1e-300;

/// Marginal law of one oriented coordinate inside a cell.
#[derive(Debug, Clone, Copy)]
enum VarLaw {
    /// Gaussian with the given mean/sd truncated to `[lo, hi]`; `hi` may be
    /// infinite, `hi_s` is the finite support clip. `cdf_lo`/`cdf_hi` are the
    /// untruncated CDF values at the bounds and `d` the normalizer.
    Trunc {
        mean: f64,
        sd: f64,
        lo: f64,
        hi: f64,
        hi_s: f64,
        cdf_lo: f64,
        cdf_hi: f64,
        d: f64,
    },
    /// Coordinate pinned at a constant (degenerate sd, censored extension or
    /// zero-width truncation).
    Fixed(f64),
}

impl VarLaw {
    fn lo(&self) -> f64 {
        match *self {
            VarLaw::Trunc { lo, .. } => lo,
            VarLaw::Fixed(c) => c,
        }
    }

    fn hi_support(&self) -> f64 {
        match *self {
            VarLaw::Trunc { hi_s, .. } => hi_s,
            VarLaw::Fixed(c) => c,
        }
    }
}

/// Conditional law of the generalized improvement on (part of) one cell:
/// `Δ = sign · (Z1 · Z2 + gamma)` with the `Z` laws above.
#[derive(Debug, Clone)]
pub struct CellLaw {
    /// Grid index of the owning cell.
    pub cell: (usize, usize),
    /// Probability of the predictive point landing in this piece.
    pub prob: f64,
    /// Which side of the front the cell lies on (`+1` / `-1` sign).
    pub kind: CellKind,
    /// Cell offset of the shifted product.
    pub gamma: f64,
    z1: VarLaw,
    z2: VarLaw,
    support: (f64, f64),
}

impl CellLaw {
    fn sign(&self) -> f64 {
        match self.kind {
            CellKind::NonDominated => 1.0,
            CellKind::Dominated => -1.0,
        }
    }

    /// Improvement values this piece can produce.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// True when the piece is a point mass.
    pub fn is_atom(&self) -> bool {
        match (&self.z1, &self.z2) {
            (VarLaw::Fixed(_), VarLaw::Fixed(_)) => true,
            (VarLaw::Fixed(c), _) | (_, VarLaw::Fixed(c)) => *c == 0.0,
            _ => false,
        }
    }

    /// Oriented truncation bounds of the two coordinates, when not pinned.
    #[allow(clippy::type_complexity)]
    pub fn bounds(&self) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
        let get = |v: &VarLaw| match *v {
            VarLaw::Trunc { lo, hi, .. } => Some((lo, hi)),
            VarLaw::Fixed(_) => None,
        };
        (get(&self.z1), get(&self.z2))
    }

    fn atom_location(&self) -> Option<f64> {
        match (&self.z1, &self.z2) {
            (VarLaw::Fixed(a), VarLaw::Fixed(b)) => Some(self.sign() * (a * b + self.gamma)),
            (VarLaw::Fixed(c), _) | (_, VarLaw::Fixed(c)) if *c == 0.0 => {
                Some(self.sign() * self.gamma)
            }
            _ => None,
        }
    }
}

/// Conditional density of one piece at `delta`.
pub fn conditional_pdf(cl: &CellLaw, delta: f64, quad: &QuadratureConfig) -> f64 {
    let (s_lo, s_hi) = cl.support;
    if delta < s_lo || delta > s_hi {
        return 0.0;
    }
    let p = cl.sign() * delta - cl.gamma;
    match (&cl.z1, &cl.z2) {
        (VarLaw::Fixed(_), VarLaw::Fixed(_)) => 0.0,
        (VarLaw::Fixed(c), t @ VarLaw::Trunc { .. })
        | (t @ VarLaw::Trunc { .. }, VarLaw::Fixed(c)) => {
            if *c == 0.0 {
                return 0.0; // point mass, no density
            }
            let VarLaw::Trunc {
                mean,
                sd,
                lo,
                hi,
                d,
                ..
            } = *t
            else {
                unreachable!()
            };
            let z = p / c;
            if z < lo || z > hi {
                return 0.0;
            }
            let g = Gaussian1D::new(mean, sd).expect("trunc law has positive sd");
            d * g.pdf(z) / c
        }
        (
            VarLaw::Trunc {
                mean: m1,
                sd: sd1,
                lo: lo1,
                hi: hi1,
                d: d1,
                ..
            },
            VarLaw::Trunc {
                mean: m2,
                sd: sd2,
                lo: lo2,
                hi: hi2,
                d: d2,
                ..
            },
        ) => {
            let lo_prod = lo1 * lo2;
            if p <= lo_prod {
                return 0.0;
            }
            // Integration range: zeta in [lo1, hi1] with p/zeta in [lo2, hi2],
            // narrowed to where both Gaussian factors carry mass (the second
            // factor maps to an interval in zeta through p/zeta).
            let alpha = lo1.max(p / hi2);
            let beta = hi1.min(p / lo2); // p/0 = +inf handles lo2 == 0
            let reach1 = quadrature_reach(*sd1);
            let reach2 = quadrature_reach(*sd2);
            let mut a = alpha.max(m1 - reach1);
            let mut b = beta.min(m1 + reach1);
            if m2 + reach2 > 0.0 {
                a = a.max(p / (m2 + reach2));
            }
            if m2 - reach2 > 0.0 {
                b = b.min(p / (m2 - reach2));
            }
            if a >= b {
                return 0.0;
            }
            let g1 = Gaussian1D::new(*m1, *sd1).expect("positive sd");
            let g2 = Gaussian1D::new(*m2, *sd2).expect("positive sd");
            let integrand = |zeta: f64| {
                let f2 = g2.pdf(p / zeta);
                if f2 == 0.0 {
                    0.0
                } else {
                    g1.pdf(zeta) * f2 / zeta
                }
            };
            let q = gauss::integrate(integrand, a, b, quad)
                .map(|q| q.value)
                .unwrap_or(f64::NAN);
            (d1 * d2 * q).max(0.0)
        }
    }
}

/// Conditional cumulative distribution of one piece at `delta`, clamped to
/// `[0, 1]` outside the support.
pub fn conditional_cdf(cl: &CellLaw, delta: f64, quad: &QuadratureConfig) -> f64 {
    if let Some(loc) = cl.atom_location() {
        return if delta >= loc { 1.0 } else { 0.0 };
    }
    let (s_lo, s_hi) = cl.support;
    if delta < s_lo {
        return 0.0;
    }
    if delta >= s_hi {
        return 1.0;
    }
    let p = cl.sign() * delta - cl.gamma;
    let cdf_s = product_cdf(&cl.z1, &cl.z2, p, quad);
    let value = match cl.kind {
        CellKind::NonDominated => cdf_s,
        CellKind::Dominated => 1.0 - cdf_s,
    };
    value.clamp(0.0, 1.0)
}

/// CDF of `Z1 * Z2` at `p` for the (non-atomic) variable laws.
fn product_cdf(z1: &VarLaw, z2: &VarLaw, p: f64, quad: &QuadratureConfig) -> f64 {
    match (z1, z2) {
        (VarLaw::Fixed(c), t @ VarLaw::Trunc { .. })
        | (t @ VarLaw::Trunc { .. }, VarLaw::Fixed(c)) => {
            let VarLaw::Trunc {
                lo,
                hi,
                cdf_lo,
                d,
                mean,
                sd,
                ..
            } = *t
            else {
                unreachable!()
            };
            debug_assert!(*c > 0.0, "zero pins are atoms");
            let z = p / c;
            if z <= lo {
                0.0
            } else if z >= hi {
                1.0
            } else {
                let g = Gaussian1D::new(mean, sd).expect("positive sd");
                (d * (g.cdf(z) - cdf_lo)).clamp(0.0, 1.0)
            }
        }
        (
            VarLaw::Trunc {
                mean: m1,
                sd: sd1,
                lo: lo1,
                hi: hi1,
                hi_s: hi1_s,
                cdf_lo: c1_lo,
                d: d1,
                ..
            },
            VarLaw::Trunc {
                mean: m2,
                sd: sd2,
                lo: lo2,
                cdf_lo: c2_lo,
                cdf_hi: c2_hi,
                d: d2,
                hi: hi2,
                hi_s: hi2_s,
            },
        ) => {
            let lo_prod = lo1 * lo2;
            if p <= lo_prod {
                return 0.0;
            }
            if p >= hi1_s * hi2_s {
                return 1.0;
            }
            let g1 = Gaussian1D::new(*m1, *sd1).expect("positive sd");
            let g2 = Gaussian1D::new(*m2, *sd2).expect("positive sd");
            let alpha = lo1.max(p / hi2);
            let beta = hi1.min(p / lo2).max(alpha);
            // Boundary terms of the closed form.
            let phi1_alpha = g1.cdf(alpha);
            let phi1_beta = g1.cdf(beta);
            let boundary = c2_hi * (phi1_alpha - c1_lo) + c2_lo * (c1_lo - phi1_beta);
            // On [alpha, beta] the integrand is phi1(zeta) * Phi2(p/zeta).
            // Below cut_lo the second factor is 1 to working precision and
            // the stretch integrates in closed form; above cut_hi it
            // vanishes. Quadrature covers only the transition band where the
            // first coordinate also carries mass.
            let reach2 = quadrature_reach(*sd2);
            let cut_lo = if m2 + reach2 > 0.0 {
                p / (m2 + reach2)
            } else {
                f64::INFINITY
            };
            let cut_hi = if m2 - reach2 > 0.0 {
                p / (m2 - reach2)
            } else {
                f64::INFINITY
            };
            let ones_end = cut_lo.clamp(alpha, beta);
            let ones_part = g1.cdf(ones_end) - phi1_alpha;
            let reach1 = quadrature_reach(*sd1);
            let a = ones_end.max(m1 - reach1);
            let b = beta.min(cut_hi).min(m1 + reach1);
            let middle = if a < b {
                gauss::integrate(|zeta: f64| g1.pdf(zeta) * g2.cdf(p / zeta), a, b, quad)
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN)
            } else {
                0.0
            };
            (d1 * d2 * (boundary + ones_part + middle)).clamp(0.0, 1.0)
        }
        (VarLaw::Fixed(_), VarLaw::Fixed(_)) => unreachable!("atoms handled by caller"),
    }
}

fn quadrature_reach(sd: f64) -> f64 {
    // Mass beyond 6.5 standard deviations is far below the integration
    // tolerance; keeping panels near the mean protects the error estimate.
    6.5 * sd
}

/// Marginal law of the generalized hypervolume improvement: a probability
/// mixture of per-cell conditional laws.
#[derive(Debug, Clone)]
pub struct HviDistribution {
    front: ParetoFront2D,
    pred: BiGaussian,
    quad: QuadratureConfig,
    opts: BuildOptions,
    cells: Vec<CellLaw>,
    support: (f64, f64),
    retained_mass: f64,
    atom_mass: f64,
    grid_n: usize,
}

impl HviDistribution {
    /// Builds the distribution with default options.
    pub fn build(
        front: &ParetoFront2D,
        pred: &BiGaussian,
        quad: &QuadratureConfig,
    ) -> Result<Self, DistError> {
        let grid = CellGrid::new(front);
        Self::from_grid(front, &grid, pred, quad, &BuildOptions::default())
    }

    pub fn build_with(
        front: &ParetoFront2D,
        pred: &BiGaussian,
        quad: &QuadratureConfig,
        opts: &BuildOptions,
    ) -> Result<Self, DistError> {
        let grid = CellGrid::new(front);
        Self::from_grid(front, &grid, pred, quad, opts)
    }

    /// Builds from a precomputed cell grid; the grid must belong to `front`.
    /// Lets callers scoring many predictive laws against one front skip the
    /// decomposition work.
    pub fn from_grid(
        front: &ParetoFront2D,
        grid: &CellGrid,
        pred: &BiGaussian,
        quad: &QuadratureConfig,
        opts: &BuildOptions,
    ) -> Result<Self, DistError> {
        if !(pred.sigma1 >= 0.0 && pred.sigma2 >= 0.0)
            || !pred.mu1.is_finite()
            || !pred.mu2.is_finite()
        {
            return Err(DistError::InvalidPredictive {
                mu1: pred.mu1,
                mu2: pred.mu2,
                sigma1: pred.sigma1,
                sigma2: pred.sigma2,
            });
        }
        let builder = Builder {
            grid,
            front,
            pred: *pred,
            opts: *opts,
        };
        let cells = builder.pieces();
        let mut support = (f64::INFINITY, f64::NEG_INFINITY);
        let mut retained = 0.0;
        let mut atom_mass = 0.0;
        for piece in &cells {
            support.0 = support.0.min(piece.support.0);
            support.1 = support.1.max(piece.support.1);
            retained += piece.prob;
            if piece.is_atom() {
                atom_mass += piece.prob;
            }
        }
        if cells.is_empty() {
            support = (0.0, 0.0);
        }
        Ok(Self {
            front: front.clone(),
            pred: *pred,
            quad: *quad,
            opts: *opts,
            cells,
            support,
            retained_mass: retained,
            atom_mass,
            grid_n: grid.n(),
        })
    }

    pub fn front(&self) -> &ParetoFront2D {
        &self.front
    }

    pub fn pred(&self) -> &BiGaussian {
        &self.pred
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn options(&self) -> &BuildOptions {
        &self.opts
    }

    /// Retained conditional pieces (several may share one grid cell).
    pub fn cells(&self) -> &[CellLaw] {
        &self.cells
    }

    /// Number of cells in the full decomposition before pruning.
    pub fn cell_count_total(&self) -> usize {
        (self.grid_n + 1) * (self.grid_n + 1)
    }

    /// Number of distinct grid cells that survived pruning.
    pub fn cell_count_retained(&self) -> usize {
        let mut seen: Vec<(usize, usize)> = self.cells.iter().map(|c| c.cell).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Probability mass of the retained pieces; the complement was pruned.
    pub fn retained_mass(&self) -> f64 {
        self.retained_mass
    }

    pub fn pruned_mass(&self) -> f64 {
        (1.0 - self.retained_mass).max(0.0)
    }

    /// Mass sitting in point masses (censored boundary values and Dirac
    /// predictive coordinates); the density does not account for it.
    pub fn atom_mass(&self) -> f64 {
        self.atom_mass
    }

    /// Smallest and largest improvement values carrying mass.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Sorted distinct endpoints of the piece supports plus the interior
    /// points where the integral bounds switch branches; between consecutive
    /// entries the marginal density is smooth, which makes piecewise
    /// integration reliable.
    pub fn support_breakpoints(&self) -> Vec<f64> {
        let mut points = Vec::with_capacity(4 * self.cells.len());
        for piece in &self.cells {
            points.push(piece.support.0);
            points.push(piece.support.1);
            if let (
                VarLaw::Trunc {
                    lo: lo1, hi_s: h1, ..
                },
                VarLaw::Trunc {
                    lo: lo2, hi_s: h2, ..
                },
            ) = (&piece.z1, &piece.z2)
            {
                let s = piece.sign();
                points.push(s * (lo1 * h2 + piece.gamma));
                points.push(s * (h1 * lo2 + piece.gamma));
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    /// Marginal density at `delta`.
    pub fn marginal_pdf(&self, delta: f64) -> f64 {
        self.cells
            .iter()
            .map(|cl| cl.prob * conditional_pdf(cl, delta, &self.quad))
            .sum()
    }

    /// Marginal cumulative distribution at `delta`; non-decreasing, reaching
    /// the retained mass at the upper support end.
    pub fn marginal_cdf(&self, delta: f64) -> f64 {
        self.cells
            .iter()
            .map(|cl| cl.prob * conditional_cdf(cl, delta, &self.quad))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Quantile of the marginal law: the leftmost `delta` with
    /// `marginal_cdf(delta) >= omega`, located by Newton steps inside a
    /// maintained bracket with bisection fallback.
    pub fn quantile(&self, omega: f64) -> Result<f64, DistError> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(DistError::OmegaOutOfRange(omega));
        }
        let (mut lo, mut hi) = self.support;
        if lo == hi {
            return Ok(lo);
        }
        // The CDF may top out below omega when mass was pruned; aim for the
        // achievable part and fall back to the support edge otherwise.
        let target = omega.min(self.retained_mass);
        let width = hi - lo;
        let tol = 1e-7;

        // Probability-weighted midpoint of the piece supports.
        let mut x = if self.retained_mass > 0.0 {
            self.cells
                .iter()
                .map(|c| c.prob * 0.5 * (c.support.0 + c.support.1))
                .sum::<f64>()
                / self.retained_mass
        } else {
            0.5 * (lo + hi)
        };

        for _ in 0..200 {
            let f = self.marginal_cdf(x) - target;
            if f >= 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if f.abs() <= tol || hi - lo <= 1e-13 * width.max(1.0) {
                break;
            }
            let pdf = self.marginal_pdf(x);
            let newton = if pdf > 1e-12 { x - f / pdf } else { f64::NAN };
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        // Walk left onto the leftmost point of a flat stretch.
        let mut left = hi;
        for _ in 0..60 {
            if lo >= left - 1e-13 * width.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + left);
            if self.marginal_cdf(mid) >= target {
                left = mid;
            } else {
                lo = mid;
            }
        }
        Ok(left)
    }
}

struct Builder<'a> {
    grid: &'a CellGrid,
    front: &'a ParetoFront2D,
    pred: BiGaussian,
    opts: BuildOptions,
}

/// Where the censored extension of a coordinate sits relative to its in-cell
/// truncation interval, in oriented coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ext {
    None,
    Below,
    Above,
}

/// Oriented description of one coordinate inside one cell.
struct VarSpec {
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    ext: Ext,
    /// Probability of the in-cell interval under the (untruncated) marginal.
    mass_in: f64,
    /// Probability of the censored extension.
    mass_out: f64,
    cdf_lo: f64,
    cdf_hi: f64,
}

struct VarPart {
    mass: f64,
    law: VarLaw,
}

impl<'a> Builder<'a> {
    fn pieces(&self) -> Vec<CellLaw> {
        let dirac1 = self.pred.sigma1 < DIRAC_SIGMA;
        let dirac2 = self.pred.sigma2 < DIRAC_SIGMA;
        if dirac1 && dirac2 {
            let delta = self.front.generalized_hvi(self.pred.mean());
            let (i, j) = self.mean_cell();
            let kind = self.grid.kind(i, j);
            let sign = match kind {
                CellKind::NonDominated => 1.0,
                CellKind::Dominated => -1.0,
            };
            return vec![CellLaw {
                cell: (i, j),
                prob: 1.0,
                kind,
                gamma: sign * delta,
                z1: VarLaw::Fixed(0.0),
                z2: VarLaw::Fixed(0.0),
                support: (delta, delta),
            }];
        }

        let n = self.grid.n();
        let mut out = Vec::new();
        if dirac1 {
            let i = self.column_of(self.pred.mu1);
            for j in 0..=n {
                self.push_cell_pieces(&mut out, i, j, Some(self.pred.mu1), None);
            }
        } else if dirac2 {
            let j = self.row_of(self.pred.mu2);
            for i in 0..=n {
                self.push_cell_pieces(&mut out, i, j, None, Some(self.pred.mu2));
            }
        } else {
            for i in 0..=n {
                for j in 0..=n {
                    if self.pruned(i, j) {
                        continue;
                    }
                    self.push_cell_pieces(&mut out, i, j, None, None);
                }
            }
        }
        out
    }

    /// A cell is pruned only when it misses the predictive band in both
    /// coordinates; rows or columns under the band always stay.
    fn pruned(&self, i: usize, j: usize) -> bool {
        let n = self.grid.n();
        let k = self.opts.prune_sigma;
        let x_lo = self.grid.q1(i);
        let x_hi = if i == n {
            f64::INFINITY
        } else {
            self.grid.q1(i + 1)
        };
        let y_lo = self.grid.q2(n + 1 - j);
        let y_hi = if j == n {
            f64::INFINITY
        } else {
            self.grid.q2(n - j)
        };
        let x_touch = x_lo <= self.pred.mu1 + k * self.pred.sigma1
            && x_hi >= self.pred.mu1 - k * self.pred.sigma1;
        let y_touch = y_lo <= self.pred.mu2 + k * self.pred.sigma2
            && y_hi >= self.pred.mu2 - k * self.pred.sigma2;
        !(x_touch || y_touch)
    }

    /// Column whose half-open x interval contains `x` (the last column also
    /// covers everything beyond the reference point).
    fn column_of(&self, x: f64) -> usize {
        let n = self.grid.n();
        for i in 0..n {
            if x < self.grid.q1(i + 1) {
                return i;
            }
        }
        n
    }

    fn row_of(&self, y: f64) -> usize {
        let n = self.grid.n();
        for j in 0..n {
            if y < self.grid.q2(n - j) {
                return j;
            }
        }
        n
    }

    fn mean_cell(&self) -> (usize, usize) {
        (self.column_of(self.pred.mu1), self.row_of(self.pred.mu2))
    }

    /// Oriented spec of the first coordinate inside cell `(i, j)`.
    fn var1(&self, i: usize, j: usize, kind: CellKind) -> VarSpec {
        let n = self.grid.n();
        let anchor = self.grid.q1(n + 1 - j);
        let cell_lo = self.grid.q1(i);
        let cell_hi = self.grid.q1(i + 1);
        let g = (self.pred.mu1, self.pred.sigma1);
        match kind {
            // z = anchor − y1, decreasing in y1.
            CellKind::NonDominated => self.oriented(anchor, -1.0, cell_lo, cell_hi, i == n, g),
            // z = y1 − anchor, increasing in y1.
            CellKind::Dominated => self.oriented(anchor, 1.0, cell_lo, cell_hi, i == n, g),
        }
    }

    fn var2(&self, i: usize, j: usize, kind: CellKind) -> VarSpec {
        let n = self.grid.n();
        let anchor = self.grid.q2(i);
        let cell_lo = self.grid.q2(n + 1 - j);
        let cell_hi = self.grid.q2(n - j);
        let g = (self.pred.mu2, self.pred.sigma2);
        match kind {
            CellKind::NonDominated => self.oriented(anchor, -1.0, cell_lo, cell_hi, j == n, g),
            CellKind::Dominated => self.oriented(anchor, 1.0, cell_lo, cell_hi, j == n, g),
        }
    }

    /// Maps the objective interval `[cell_lo, cell_hi]` into the oriented
    /// coordinate `z = orient * (y − anchor)` and attaches the censored
    /// extension for cells on the outer rim.
    fn oriented(
        &self,
        anchor: f64,
        orient: f64,
        cell_lo: f64,
        cell_hi: f64,
        extended: bool,
        (mu, sigma): (f64, f64),
    ) -> VarSpec {
        let marginal = Gaussian1D::new(mu, sigma.max(DIRAC_SIGMA)).expect("positive sd");
        let cdf_at = |y: f64| marginal.cdf(y);
        let (lo, hi, ext, mass_in, mass_out, cdf_lo, cdf_hi);
        if orient < 0.0 {
            lo = anchor - cell_hi;
            hi = if cell_lo == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                anchor - cell_lo
            };
            // Extension beyond the box maps below the truncation interval.
            ext = if extended { Ext::Below } else { Ext::None };
            let c_hi_y = cdf_at(cell_hi);
            let c_lo_y = cdf_at(cell_lo);
            mass_in = (c_hi_y - c_lo_y).max(0.0);
            mass_out = if extended { 1.0 - c_hi_y } else { 0.0 };
            cdf_lo = 1.0 - c_hi_y;
            cdf_hi = 1.0 - c_lo_y;
        } else {
            lo = cell_lo - anchor;
            hi = cell_hi - anchor;
            ext = if extended { Ext::Above } else { Ext::None };
            let c_hi_y = cdf_at(cell_hi);
            let c_lo_y = cdf_at(cell_lo);
            mass_in = (c_hi_y - c_lo_y).max(0.0);
            mass_out = if extended { 1.0 - c_hi_y } else { 0.0 };
            cdf_lo = c_lo_y;
            cdf_hi = c_hi_y;
        }
        VarSpec {
            mean: orient * (mu - anchor),
            sd: sigma,
            lo,
            hi,
            ext,
            mass_in,
            mass_out,
            cdf_lo,
            cdf_hi,
        }
    }

    /// In-cell and censored parts of one coordinate. A `pin` replaces the
    /// whole coordinate by its (censored) deterministic value.
    fn parts(
        &self,
        spec: &VarSpec,
        pin: Option<f64>,
        anchor_origin: f64,
        orient: f64,
    ) -> Vec<VarPart> {
        if let Some(y) = pin {
            let z = orient * (y - anchor_origin);
            let clamped = z.clamp(spec.lo, spec.hi.min(f64::MAX));
            return vec![VarPart {
                mass: 1.0,
                law: VarLaw::Fixed(clamped),
            }];
        }
        let mut parts = Vec::with_capacity(2);
        if spec.mass_in > NEGLIGIBLE_PROB {
            let hi_s = spec
                .hi
                .min((spec.mean + self.opts.clip_sigma * spec.sd).max(spec.lo));
            let width = hi_s - spec.lo;
            let law = if width < ZERO_WIDTH || width < 1e-12 * spec.lo.abs() {
                VarLaw::Fixed(0.5 * (spec.lo + hi_s))
            } else {
                VarLaw::Trunc {
                    mean: spec.mean,
                    sd: spec.sd,
                    lo: spec.lo,
                    hi: spec.hi,
                    hi_s,
                    cdf_lo: spec.cdf_lo,
                    cdf_hi: spec.cdf_hi,
                    d: 1.0 / (spec.cdf_hi - spec.cdf_lo),
                }
            };
            parts.push(VarPart {
                mass: spec.mass_in,
                law,
            });
        }
        if spec.mass_out > NEGLIGIBLE_PROB {
            let censor = match spec.ext {
                Ext::Below => spec.lo,
                Ext::Above => spec.hi,
                Ext::None => unreachable!("mass_out only for extended cells"),
            };
            parts.push(VarPart {
                mass: spec.mass_out,
                law: VarLaw::Fixed(censor),
            });
        }
        parts
    }

    fn push_cell_pieces(
        &self,
        out: &mut Vec<CellLaw>,
        i: usize,
        j: usize,
        pin1: Option<f64>,
        pin2: Option<f64>,
    ) {
        let n = self.grid.n();
        let kind = self.grid.kind(i, j);
        let spec1 = self.var1(i, j, kind);
        let spec2 = self.var2(i, j, kind);
        let gamma = match kind {
            CellKind::NonDominated => {
                self.grid.hvi_plus_at_corner(i + 1, n - j) - spec1.lo * spec2.lo
            }
            CellKind::Dominated => {
                self.grid.hvi_minus_abs_at_corner(i, n + 1 - j) - spec1.lo * spec2.lo
            }
        };
        let orient = match kind {
            CellKind::NonDominated => -1.0,
            CellKind::Dominated => 1.0,
        };
        let anchor1 = self.grid.q1(n + 1 - j);
        let anchor2 = self.grid.q2(i);
        let parts1 = self.parts(&spec1, pin1, anchor1, orient);
        let parts2 = self.parts(&spec2, pin2, anchor2, orient);
        for p1 in &parts1 {
            for p2 in &parts2 {
                let prob = p1.mass * p2.mass;
                if prob <= NEGLIGIBLE_PROB {
                    continue;
                }
                let s_lo = p1.law.lo() * p2.law.lo() + gamma;
                let s_hi = p1.law.hi_support() * p2.law.hi_support() + gamma;
                let support = match kind {
                    CellKind::NonDominated => (s_lo, s_hi),
                    CellKind::Dominated => (-s_hi, -s_lo),
                };
                out.push(CellLaw {
                    cell: (i, j),
                    prob,
                    kind,
                    gamma,
                    z1: p1.law,
                    z2: p2.law,
                    support,
                });
            }
        }
    }
}
