//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature for vector-valued integrands.
//!
//! All components share one subdivision; the error that drives refinement is the
//! component-wise maximum of the QUADPACK-style rescaled Kronrod/Gauss difference.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

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
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7, 9.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Number of equal-width panels the interval is split into before adapting.
    pub initial_intervals: usize,
    pub max_intervals: usize,
}

impl<T: Scalar> Default for QuadratureOptions<T> {
    fn default() -> Self {
        let floor = T::epsilon() * T::lit(100.0);
        Self {
            rel_tol: T::lit(1e-10).max(floor),
            abs_tol: T::lit(1e-15).max(T::epsilon() * T::epsilon()),
            initial_intervals: 16,
            max_intervals: 20_000,
        }
    }
}

impl<T: Scalar> QuadratureOptions<T> {
    /// Same tolerances with twice as many starting panels.
    pub fn refined(self) -> Self {
        Self {
            initial_intervals: self.initial_intervals * 2,
            max_intervals: self.max_intervals * 2,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate<T, const N: usize> {
    pub value: [T; N],
    /// Estimated absolute error, maximum over components.
    pub error: T,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T, const N: usize> {
    a: T,
    b: T,
    value: [T; N],
    error: T,
}

impl<T: Scalar, const N: usize> PartialEq for Panel<T, N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar, const N: usize> Eq for Panel<T, N> {}

impl<T: Scalar, const N: usize> PartialOrd for Panel<T, N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar, const N: usize> Ord for Panel<T, N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .to_f64_lossy()
            .total_cmp(&other.error.to_f64_lossy())
    }
}

fn rescale_error<T: Scalar>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err.abs();
    if res_asc != T::zero() && scaled != T::zero() {
        let scale = (T::lit(200.0) * scaled / res_asc).powf(T::lit(1.5));
        scaled = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let fifty_eps = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        scaled = scaled.max(fifty_eps * res_abs);
    }
    scaled
}

fn kronrod21<T, const N: usize, F>(f: &mut F, a: T, b: T) -> Panel<T, N>
where
    T: Scalar,
    F: FnMut(T) -> [T; N],
{
    let two = T::lit(2.0);
    let center = (a + b) / two;
    let half = (b - a) / two;
    let abs_half = half.abs();

    let f_center = f(center);
    let mut samples = [[T::zero(); N]; 21];
    samples[10] = f_center;
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        samples[j] = f(center - dx);
        samples[20 - j] = f(center + dx);
    }

    let mut value = [T::zero(); N];
    let mut error = T::zero();
    for k in 0..N {
        let mut kronrod = samples[10][k] * T::lit(WGK[10]);
        let mut gauss = T::zero();
        let mut res_abs = kronrod.abs();
        for j in 0..10 {
            let pair = samples[j][k] + samples[20 - j][k];
            kronrod += T::lit(WGK[j]) * pair;
            res_abs += T::lit(WGK[j]) * (samples[j][k].abs() + samples[20 - j][k].abs());
            if j % 2 == 1 {
                gauss += T::lit(WG[j / 2]) * pair;
            }
        }
        let mean = kronrod / two;
        let mut res_asc = T::lit(WGK[10]) * (samples[10][k] - mean).abs();
        for j in 0..10 {
            res_asc += T::lit(WGK[j])
                * ((samples[j][k] - mean).abs() + (samples[20 - j][k] - mean).abs());
        }
        value[k] = kronrod * half;
        let err = rescale_error(
            (kronrod - gauss) * half,
            res_abs * abs_half,
            res_asc * abs_half,
        );
        error = error.max(err);
    }
    Panel { a, b, value, error }
}

/// Integrates every component of `f` over `[a, b]`.
///
/// Refinement stops once the summed error estimate drops below
/// `max(abs_tol, rel_tol * max_k |I_k|)`. Running out of panels, or panels
/// shrinking to the floating point resolution, yields [`Error::Quadrature`].
pub fn integrate<T, const N: usize, F>(
    mut f: F,
    a: T,
    b: T,
    opts: &QuadratureOptions<T>,
) -> Result<QuadratureEstimate<T, N>>
where
    T: Scalar,
    F: FnMut(T) -> [T; N],
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::domain(format!(
            "invalid integration interval [{a}, {b}]"
        )));
    }
    if opts.initial_intervals == 0 || opts.max_intervals < opts.initial_intervals {
        return Err(Error::domain("invalid quadrature panel limits"));
    }
    if a == b {
        return Ok(QuadratureEstimate {
            value: [T::zero(); N],
            error: T::zero(),
            intervals: 0,
            evaluations: 0,
        });
    }

    let n0 = opts.initial_intervals;
    let width = (b - a) / T::from_usize(n0).unwrap();
    let mut heap = BinaryHeap::with_capacity(opts.max_intervals + 1);
    for i in 0..n0 {
        let lo = a + width * T::from_usize(i).unwrap();
        let hi = if i + 1 == n0 {
            b
        } else {
            a + width * T::from_usize(i + 1).unwrap()
        };
        heap.push(kronrod21(&mut f, lo, hi));
    }
    let mut evaluations = 21 * n0;

    let totals = |heap: &BinaryHeap<Panel<T, N>>| {
        let mut value = [T::zero(); N];
        let mut error = T::zero();
        for p in heap.iter() {
            for k in 0..N {
                value[k] += p.value[k];
            }
            error += p.error;
        }
        (value, error)
    };
    let target = |value: &[T; N]| {
        let scale = value.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        opts.abs_tol.max(opts.rel_tol * scale)
    };

    let (mut value, mut error) = totals(&heap);
    while error > target(&value) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                achieved: error.to_f64_lossy(),
                requested: target(&value).to_f64_lossy(),
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = (worst.a + worst.b) / T::lit(2.0);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                achieved: error.to_f64_lossy(),
                requested: target(&value).to_f64_lossy(),
                intervals: heap.len() + 1,
            });
        }
        let left = kronrod21(&mut f, worst.a, mid);
        let right = kronrod21(&mut f, mid, worst.b);
        evaluations += 42;
        for k in 0..N {
            value[k] += left.value[k] + right.value[k] - worst.value[k];
        }
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if error <= target(&value) {
            // resum to discard drift from the incremental updates
            (value, error) = totals(&heap);
        }
    }

    Ok(QuadratureEstimate {
        value,
        error,
        intervals: heap.len(),
        evaluations,
    })
}
