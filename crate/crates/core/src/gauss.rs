//! Scalar Gaussian primitives and adaptive Gauss–Kronrod quadrature.
//!
//! The quadrature pairs a 21-point Kronrod rule with its embedded 10-point
//! Gauss rule and refines the subinterval with the worst error estimate
//! first, up to a fixed subinterval budget.

use std::collections::BinaryHeap;

use thiserror::Error;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussError {
    #[error("sigma must be strictly positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
}

/// A one-dimensional Gaussian with strictly positive standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    mu: f64,
    sigma: f64,
}

impl Gaussian1D {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, GaussError> {
        if sigma <= 0.0 || !sigma.is_finite() || !mu.is_finite() {
            return Err(GaussError::NonPositiveSigma(sigma));
        }
        Ok(Self { mu, sigma })
    }

    pub fn standard() -> Self {
        Self {
            mu: 0.0,
            sigma: 1.0,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Density at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        INV_SQRT_2PI / self.sigma * (-0.5 * z * z).exp()
    }

    /// Cumulative distribution at `x`; `±∞` map to 0 and 1 exactly.
    pub fn cdf(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        let z = (x - self.mu) / self.sigma;
        std_cdf(z)
    }

    /// Quantile: `x` with `|cdf(x) − p| <= 1e-12`, by an erfc-inverse seed
    /// polished with two Newton steps.
    pub fn quantile(&self, p: f64) -> Result<f64, GaussError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(GaussError::ProbabilityOutOfRange(p));
        }
        Ok(self.mu + self.sigma * std_quantile(p))
    }
}

/// Standard normal CDF through the complementary error function.
pub fn std_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal density.
pub fn std_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal quantile: rational initial guess polished by Newton
/// against the high-precision `std_cdf`.
pub fn std_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let mut z = quantile_seed(p);
    for _ in 0..2 {
        let f = std_cdf(z) - p;
        let d = std_pdf(z);
        if d <= f64::MIN_POSITIVE {
            break;
        }
        z -= f / d;
    }
    z
}

// Rational approximations of erf/erfc after W. J. Cody, "Rational Chebyshev
// approximation for the error function", with the split-exponential trick
// that keeps the relative error near machine precision over the whole range.

#[allow(clippy::excessive_precision)]
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_47e3,
    1.857_777_061_846_031_53e-1,
];
#[allow(clippy::excessive_precision)]
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];
#[allow(clippy::excessive_precision)]
const ERF_C: [f64; 9] = [
    5.641_884_969_886_700_9e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
    2.153_115_354_744_038_46e-8,
];
#[allow(clippy::excessive_precision)]
const ERF_D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];
#[allow(clippy::excessive_precision)]
const ERF_P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
#[allow(clippy::excessive_precision)]
const ERF_Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];
const INV_SQRT_PI: f64 = 5.641_895_835_477_563e-1;

/// erfc for `x >= 0.46875` via the two outer Cody intervals (no final
/// reflection applied).
fn erfc_positive(y: f64) -> f64 {
    debug_assert!(y >= 0.46875);
    if y >= 26.543 {
        return 0.0;
    }
    let result = if y <= 4.0 {
        let mut num = ERF_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERF_C[i]) * y;
            den = (den + ERF_D[i]) * y;
        }
        (num + ERF_C[7]) / (den + ERF_D[7])
    } else {
        let z = 1.0 / (y * y);
        let mut num = ERF_P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + ERF_P[i]) * z;
            den = (den + ERF_Q[i]) * z;
        }
        let r = z * (num + ERF_P[4]) / (den + ERF_Q[4]);
        (INV_SQRT_PI - r) / y
    };
    // exp(-y^2) split into an exactly representable part and a remainder.
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * result
}

/// Error function, relative accuracy around 1e-16.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        let z = if y > 1e-300 { y * y } else { 0.0 };
        let mut num = ERF_A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + ERF_A[i]) * z;
            den = (den + ERF_B[i]) * z;
        }
        return x * (num + ERF_A[3]) / (den + ERF_B[3]);
    }
    let e = 1.0 - erfc_positive(y);
    if x < 0.0 {
        -e
    } else {
        e
    }
}

/// Complementary error function, relatively accurate into the deep tail.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        return 1.0 - erf(x);
    }
    let tail = erfc_positive(y);
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

// Inverse normal CDF seed (P. J. Acklam's rational approximation, absolute
// error ~1e-9; Newton polishing above brings it to full precision).
fn quantile_seed(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239e0,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838e0,
        -2.549_732_539_343_734e0,
        4.374_664_141_464_968e0,
        2.938_163_982_698_783e0,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996e0,
        3.754_408_661_907_416e0,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    }
}

/// Settings for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Target absolute error of the whole integral.
    pub abs_tol: f64,
    /// Budget of subintervals; refinement stops once it is reached.
    pub max_subintervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_subintervals: 50,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFiniteIntegrand(f64),
    #[error("invalid integration interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
}

/// Outcome of an adaptive integration. `converged` is false when the
/// subinterval budget ran out before the error target was met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_estimate: f64,
    pub converged: bool,
}

// 21-point Kronrod nodes and weights with the embedded 10-point Gauss rule
// (QUADPACK dqk21 constants). Nodes are on [0, 1]; even indices are the
// Gauss points.
#[allow(clippy::excessive_precision)]
const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod panel on `[a, b]`; returns the Kronrod value and the
/// |Kronrod − Gauss| error estimate.
fn gk21_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, QuadError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFiniteIntegrand(x))
        }
    };

    let fc = eval(center)?;
    let mut kronrod = WGK21[10] * fc;
    let mut gauss = 0.0;
    for (idx, &x) in XGK21.iter().enumerate().take(10) {
        let dx = half * x;
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        let sum = f1 + f2;
        kronrod += WGK21[idx] * sum;
        if idx % 2 == 1 {
            gauss += WG10[idx / 2] * sum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    Ok((value, err))
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive integration of `f` over the finite interval `[a, b]`: the
/// subinterval with the largest error estimate is bisected until the summed
/// estimate drops below `cfg.abs_tol` or `cfg.max_subintervals` is reached.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Quadrature, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidInterval(a, b));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            err_estimate: 0.0,
            converged: true,
        });
    }
    let (value, err) = gk21_panel(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let mut total_err = err;

    while total_err > cfg.abs_tol && heap.len() < cfg.max_subintervals {
        let worst = heap.pop().expect("heap never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval no longer splittable at f64 resolution.
            heap.push(worst);
            break;
        }
        total_err -= worst.err;
        let (lv, le) = gk21_panel(&mut f, worst.a, mid)?;
        let (rv, re) = gk21_panel(&mut f, mid, worst.b)?;
        total_err += le + re;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
    }

    let value: f64 = heap.iter().map(|s| s.value).sum();
    Ok(Quadrature {
        value,
        err_estimate: total_err,
        converged: total_err <= cfg.abs_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_reference_values() {
        let std = Gaussian1D::standard();
        assert!((std.pdf(0.0) - 0.3989422804).abs() < 1e-10);
        assert!((std.pdf(1.0) - 0.2419707245).abs() < 1e-10);
        let g = Gaussian1D::new(2.0, 3.0).unwrap();
        assert!((g.pdf(2.0) - 0.1329807601).abs() < 1e-10);
    }

    #[test]
    fn cdf_reference_values() {
        let std = Gaussian1D::standard();
        assert_eq!(std.cdf(0.0), 0.5);
        assert_eq!(std.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(std.cdf(f64::INFINITY), 1.0);
        assert!((std.cdf(1.959963985) - 0.975).abs() < 1e-9);
        // Central-range accuracy against high-precision values.
        assert!((std.cdf(1.0) - 0.841_344_746_068_543).abs() < 2e-16);
        assert!((std.cdf(-2.0) - 0.022_750_131_948_179_21).abs() < 1e-17);
    }

    #[test]
    fn quantile_round_trip() {
        let std = Gaussian1D::standard();
        assert_eq!(std.quantile(0.5).unwrap(), 0.0);
        assert!((std.quantile(0.975).unwrap() - 1.959963985).abs() < 1e-8);
        let g = Gaussian1D::new(3.0, 2.0).unwrap();
        assert!((g.quantile(0.5).unwrap() - 3.0).abs() < 1e-14);
        for &p in &[1e-8, 1e-4, 0.1, 0.3, 0.5, 0.9, 0.9999, 1.0 - 1e-8] {
            let x = std.quantile(p).unwrap();
            assert!((std.cdf(x) - p).abs() <= 1e-12, "p = {p}");
        }
        assert!(std.quantile(0.0).is_err());
        assert!(std.quantile(1.0).is_err());
    }

    #[test]
    fn integrates_constants_and_polynomials() {
        let cfg = QuadratureConfig::default();
        let one = integrate(|_| 1.0, 0.0, 1.0, &cfg).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        assert!(one.converged);
        let x2 = integrate(|x| x * x, 0.0, 3.0, &cfg).unwrap();
        assert!((x2.value - 9.0).abs() < 1e-10);
    }

    #[test]
    fn kronrod_exact_for_degree_31() {
        let cfg = QuadratureConfig::default();
        // x^31 on [0, 2]: exact value 2^32 / 32.
        let q = integrate(|x| x.powi(31), 0.0, 2.0, &cfg).unwrap();
        let exact = 2f64.powi(32) / 32.0;
        assert!((q.value - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn integrates_normal_density() {
        let cfg = QuadratureConfig::default();
        let q = integrate(std_pdf, -8.0, 8.0, &cfg).unwrap();
        assert!((q.value - 1.0).abs() < 1e-10);
        assert!(q.err_estimate <= 1e-8);
    }

    #[test]
    fn interval_additivity() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64| (x.sin() + 2.0).ln();
        let whole = integrate(f, 0.0, 5.0, &cfg).unwrap().value;
        let left = integrate(f, 0.0, 2.2, &cfg).unwrap().value;
        let right = integrate(f, 2.2, 5.0, &cfg).unwrap().value;
        assert!((left + right - whole).abs() <= 2.0 * cfg.abs_tol);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig {
            abs_tol: 1e-14,
            max_subintervals: 2,
        };
        // A kinked integrand the two allowed panels cannot resolve to 1e-14.
        let q = integrate(|x: f64| (x - 0.3371).abs().sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!(!q.converged);
        assert!(q.err_estimate > cfg.abs_tol);
    }

    #[test]
    fn rejects_nan_integrand() {
        let cfg = QuadratureConfig::default();
        let res = integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &cfg);
        assert!(matches!(res, Err(QuadError::NonFiniteIntegrand(_))));
        assert!(matches!(
            integrate(|x| x, 1.0, 0.0, &cfg),
            Err(QuadError::InvalidInterval(..))
        ));
    }

    #[test]
    fn phi_monotone_and_inverse_consistent() {
        let std = Gaussian1D::standard();
        let mut prev = 0.0;
        for k in 0..=1000 {
            let x = -8.0 + 16.0 * (k as f64) / 1000.0;
            let c = std.cdf(x);
            assert!(c >= prev);
            prev = c;
        }
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let x = std.quantile(p).unwrap();
            assert!((std.cdf(x) - p).abs() < 1e-10);
        }
    }
}
