use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Gauss-Kronrod rule (10-point Gauss embedded).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
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
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
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

/// Stopping parameters for [`quad_semiinfinite_with`]. The iteration stops as
/// soon as the error estimate is below `max(abs_tol, rel_tol·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadConfig {
    pub fn absolute(tol: f64) -> Self {
        QuadConfig { abs_tol: tol, rel_tol: 0.0, max_panels: 4000 }
    }

    pub fn relative(tol: f64) -> Self {
        QuadConfig { abs_tol: 0.0, rel_tol: tol, max_panels: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// ∫₀^∞ f(t) dt with absolute error target `tol`.
pub fn quad_semiinfinite<F>(f: F, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    quad_semiinfinite_with(f, &QuadConfig::absolute(tol))
}

/// ∫₀^∞ f(t) dt.
///
/// The half line is split at t = 1. The outer piece is mapped to (0, 1] by
/// t = 1/u, so the decaying tail is compressed into panels near u = 0 whose
/// contribution vanishes with the integrand's envelope. Both pieces share one
/// global adaptive bisection driven by the panel with the largest error.
pub fn quad_semiinfinite_with<F>(f: F, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    if !(cfg.abs_tol >= 0.0 && cfg.rel_tol >= 0.0) || (cfg.abs_tol == 0.0 && cfg.rel_tol == 0.0) {
        return Err(Error::domain("quad_semiinfinite", "tolerances must be >= 0 and not both zero"));
    }
    let inner = |t: f64| f(t);
    let outer = |u: f64| {
        let t = 1.0 / u;
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * t * t
        }
    };
    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    for segment in [Segment::Inner, Segment::Outer] {
        let panel = match segment {
            Segment::Inner => Panel::eval(&inner, 0.0, 1.0, segment),
            Segment::Outer => Panel::eval(&outer, 0.0, 1.0, segment),
        };
        evaluations += 21;
        heap.push(panel?);
    }

    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult { value, error, evaluations });
        }
        if heap.len() >= cfg.max_panels {
            return Err(Error::Quadrature { estimate: value, error, target });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) || worst.hi - worst.lo < 1e-15 * worst.hi.abs().max(1e-300) {
            // cannot refine further; the remaining error is a rounding floor
            let error_rest: f64 = heap.iter().map(|p| p.error).sum();
            if error_rest + worst.error <= target || worst.error < f64::EPSILON * value.abs() {
                heap.push(Panel { error: 0.0, ..worst });
                continue;
            }
            return Err(Error::Quadrature { estimate: value, error, target });
        }
        let (left, right) = match worst.segment {
            Segment::Inner => (
                Panel::eval(&inner, worst.lo, mid, Segment::Inner)?,
                Panel::eval(&inner, mid, worst.hi, Segment::Inner)?,
            ),
            Segment::Outer => (
                Panel::eval(&outer, worst.lo, mid, Segment::Outer)?,
                Panel::eval(&outer, mid, worst.hi, Segment::Outer)?,
            ),
        };
        evaluations += 42;
        heap.push(left);
        heap.push(right);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    segment: Segment,
}

impl Panel {
    fn eval<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64, segment: Segment) -> Result<Panel> {
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let fc = g(center);
        let mut res_g = 0.0;
        let mut res_k = fc * WGK[10];
        let mut res_abs = res_k.abs();
        let mut fv1 = [0.0; 10];
        let mut fv2 = [0.0; 10];
        for j in 0..10 {
            let dx = half * XGK[j];
            let f1 = g(center - dx);
            let f2 = g(center + dx);
            fv1[j] = f1;
            fv2[j] = f2;
            res_k += WGK[j] * (f1 + f2);
            res_abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        }
        let value = res_k * half;
        res_abs *= half.abs();
        res_asc *= half.abs();
        if !value.is_finite() {
            return Err(Error::Quadrature { estimate: value, error: f64::INFINITY, target: 0.0 });
        }
        let mut error = ((res_k - res_g) * half).abs();
        if res_asc != 0.0 && error != 0.0 {
            error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            error = error.max(50.0 * f64::EPSILON * res_abs);
        }
        Ok(Panel { lo, hi, value, error, segment })
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}
