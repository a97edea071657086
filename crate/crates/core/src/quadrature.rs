//! Adaptive Gauss–Kronrod (G10/K21) quadrature over vector-valued integrands.
//!
//! All components share one adaptive partition. An interval is refined while
//! any component's accumulated error exceeds its own relative tolerance, so
//! every moment in a sequence is resolved to the same relative accuracy even
//! when the components span hundreds of orders of magnitude.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [0, 1]; odd indices are the Gauss-10 nodes.
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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_719_540_319,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss-10 weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerance settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Absolute error floor, relative to the largest component magnitude.
    pub abs_floor: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_floor: 1e-300,
            max_intervals: 20_000,
        }
    }
}

/// Integral estimates with their accumulated error bounds.
#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    priority: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
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
        self.priority.total_cmp(&other.priority)
    }
}

fn kronrod21<F>(f: &F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, buf);
    for c in 0..dim {
        kron[c] += WGK[10] * buf[c];
    }
    for (idx, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        for &sign in &[-1.0, 1.0] {
            f(center + sign * dx, buf);
            for c in 0..dim {
                kron[c] += wk * buf[c];
                if idx % 2 == 1 {
                    gauss[c] += WG[idx / 2] * buf[c];
                }
            }
        }
    }
    let errors = kron
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * half).abs())
        .collect();
    let values = kron.into_iter().map(|k| k * half).collect();
    (values, errors)
}

/// Integrates the `dim`-component function `f` over the partition given by
/// `breakpoints` (sorted, at least two entries).
pub fn integrate<F>(f: F, breakpoints: &[f64], dim: usize, cfg: QuadratureConfig) -> QuadratureResult
where
    F: Fn(f64, &mut [f64]),
{
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut buf = vec![0.0; dim];
    let mut totals = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    let mut heap = BinaryHeap::new();

    let mut segments = Vec::with_capacity(breakpoints.len() - 1);
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (values, errors) = kronrod21(&f, w[0], w[1], dim, &mut buf);
        for c in 0..dim {
            totals[c] += values[c];
            total_err[c] += errors[c];
        }
        segments.push(Segment {
            a: w[0],
            b: w[1],
            values,
            errors,
            priority: 0.0,
        });
    }

    let priority = |errors: &[f64], totals: &[f64], floor: f64| {
        errors
            .iter()
            .zip(totals)
            .map(|(e, t)| e / (t.abs() * cfg.rel_tol + floor))
            .fold(0.0_f64, f64::max)
    };

    let floor = cfg.abs_floor;
    for mut s in segments {
        s.priority = priority(&s.errors, &totals, floor);
        heap.push(s);
    }

    loop {
        let done = total_err
            .iter()
            .zip(&totals)
            .all(|(e, t)| *e <= t.abs() * cfg.rel_tol + floor);
        if done || heap.len() >= cfg.max_intervals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in f64
            heap.push(Segment {
                priority: -1.0,
                ..worst
            });
            continue;
        }
        let (lv, le) = kronrod21(&f, worst.a, mid, dim, &mut buf);
        let (rv, re) = kronrod21(&f, mid, worst.b, dim, &mut buf);
        for c in 0..dim {
            totals[c] += lv[c] + rv[c] - worst.values[c];
            total_err[c] += le[c] + re[c] - worst.errors[c];
        }
        let lp = priority(&le, &totals, floor);
        let rp = priority(&re, &totals, floor);
        heap.push(Segment {
            a: worst.a,
            b: mid,
            values: lv,
            errors: le,
            priority: lp,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            values: rv,
            errors: re,
            priority: rp,
        });
    }

    // Re-sum from the final partition to shed the rounding accumulated by
    // the incremental updates above.
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let intervals = heap.len();
    for s in heap.into_vec() {
        for c in 0..dim {
            values[c] += s.values[c];
            errors[c] += s.errors[c];
        }
    }
    QuadratureResult {
        values,
        errors,
        intervals,
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, pieces: usize, cfg: QuadratureConfig) -> f64
where
    F: Fn(f64) -> f64,
{
    let pieces = pieces.max(1);
    let breaks: Vec<f64> = (0..=pieces)
        .map(|i| a + (b - a) * i as f64 / pieces as f64)
        .collect();
    integrate(|x, out| out[0] = f(x), &breaks, 1, cfg).values[0]
}
