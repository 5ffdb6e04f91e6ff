//! Adaptive Gauss-Kronrod quadrature.
//!
//! Every integral in the crate goes through [`integrate`], a globally
//! adaptive 21-point Gauss-Kronrod scheme in the style of QUADPACK's QAG:
//! the subinterval with the largest error estimate is bisected until the
//! summed error estimate drops below `max(abs_tol, rel_tol * |I|)`.
//! Singular endpoints are handled by the callers through changes of
//! variables, so the integrands seen here are at worst mildly singular.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of live subintervals of one integral.
const MAX_INTERVALS: usize = 20_000;

/// Tolerances and limits shared by all integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any initial subinterval.
    pub max_depth: u32,
    /// Sample count of the Monte Carlo Brillouin-zone estimate.
    pub mc_samples: usize,
    /// Seed of the Monte Carlo stream.
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_depth: 50,
            mc_samples: 1_000_000,
            seed: 0x5eed_2d4b,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Config(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.mc_samples < 10_000 {
            return Err(Error::Config(format!(
                "mc_samples must be at least 10000, got {}",
                self.mc_samples
            )));
        }
        Ok(())
    }

    /// Same limits with the tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        QuadratureConfig {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
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

/// One 21-point Kronrod panel: (integral, error estimate).
fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let result = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the
/// subdivision given by `points` (endpoints included, strictly increasing).
///
/// `name` identifies the integral in error messages.
pub fn integrate<F>(name: &str, f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if points.len() < 2 {
        return Err(Error::Config(format!(
            "integral `{name}` needs at least two breakpoints"
        )));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Config(format!(
            "integral `{name}` has non-increasing or non-finite breakpoints {points:?}"
        )));
    }

    let mut heap = BinaryHeap::with_capacity(64);
    let mut active_value = 0.0;
    let mut active_error = 0.0;
    let mut settled_value = 0.0;
    let mut settled_error = 0.0;
    let mut settled_count = 0usize;
    let mut evaluations = 0usize;

    let check = |value: f64, a: f64, b: f64| -> Result<()> {
        if value.is_finite() {
            Ok(())
        } else {
            Err(Error::NonConvergence {
                integral: format!("{name} (non-finite integrand on [{a:e}, {b:e}])"),
                estimate: value,
                error: f64::INFINITY,
                tolerance: 0.0,
                intervals: 0,
            })
        }
    };

    for w in points.windows(2) {
        let (value, error) = kronrod21(&f, w[0], w[1]);
        evaluations += 21;
        check(value, w[0], w[1])?;
        active_value += value;
        active_error += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
            depth: 0,
        });
    }

    let mut iteration = 0usize;
    loop {
        iteration += 1;
        if iteration.is_multiple_of(256) {
            // limit drift of the running sums
            active_value = heap.iter().map(|s| s.value).sum();
            active_error = heap.iter().map(|s| s.error).sum();
        }
        let value = settled_value + active_value;
        let error = settled_error + active_error;
        let tolerance = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        let intervals = heap.len() + settled_count;

        if error <= tolerance {
            let exact_error = settled_error + heap.iter().map(|s| s.error).sum::<f64>();
            let value = settled_value + heap.iter().map(|s| s.value).sum::<f64>();
            return Ok(Estimate {
                value,
                error: exact_error,
                intervals,
                evaluations,
            });
        }

        let worst = match heap.pop() {
            Some(s) => s,
            None => {
                return Err(Error::NonConvergence {
                    integral: name.to_string(),
                    estimate: value,
                    error,
                    tolerance,
                    intervals,
                })
            }
        };

        active_value -= worst.value;
        active_error -= worst.error;
        let mid = 0.5 * (worst.a + worst.b);
        let splittable = mid > worst.a && mid < worst.b;
        if worst.depth >= cfg.max_depth || !splittable || intervals >= MAX_INTERVALS {
            settled_value += worst.value;
            settled_error += worst.error;
            settled_count += 1;
            continue;
        }

        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = kronrod21(&f, a, b);
            evaluations += 21;
            check(v, a, b)?;
            active_value += v;
            active_error += e;
            heap.push(Segment {
                a,
                b,
                value: v,
                error: e,
                depth: worst.depth + 1,
            });
        }
    }
}

/// Value-only wrapper around [`integrate`].
pub fn integral<F>(name: &str, f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(name, f, points, cfg).map(|e| e.value)
}

/// Fixed composite 21-point Kronrod rule on `panels` equal panels.
pub fn composite_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            kronrod21(&f, lo, lo + h).0
        })
        .sum()
}
