//! One-dimensional quadrature: fixed Gauss–Legendre rules and a globally
//! adaptive 21-point Gauss–Kronrod integrator for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{LabError, Result};

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`, nodes ascending.
pub fn gauss_legendre_unit(n: usize) -> Result<Vec<(f64, f64)>> {
    let rule = GaussLegendre::new(n)
        .map_err(|_| LabError::Domain(format!("Gauss-Legendre rule needs at least 2 nodes, got {n}")))?;
    let mut pairs: Vec<(f64, f64)> =
        rule.into_node_weight_pairs().into_iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

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

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult<const N: usize> {
    pub value: [f64; N],
    /// Sum over subintervals of the per-interval error estimates (max over components).
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<const N: usize>(f: &mut impl FnMut(f64) -> [f64; N], a: f64, b: f64) -> ([f64; N], f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut resabs = [0.0; N];
    for c in 0..N {
        kron[c] = WGK[10] * fc[c];
        resabs[c] = WGK[10] * fc[c].abs();
    }
    let mut samples = [[0.0; N]; 21];
    samples[20] = fc;
    for k in 0..10 {
        let dx = half * XGK[k];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * k] = f1;
        samples[2 * k + 1] = f2;
        for c in 0..N {
            let s = f1[c] + f2[c];
            kron[c] += WGK[k] * s;
            resabs[c] += WGK[k] * (f1[c].abs() + f2[c].abs());
            if k % 2 == 1 {
                gauss[c] += WG[k / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for c in 0..N {
        let mean = 0.5 * kron[c];
        let mut resasc = WGK[10] * (fc[c] - mean).abs();
        for k in 0..10 {
            resasc += WGK[k] * ((samples[2 * k][c] - mean).abs() + (samples[2 * k + 1][c] - mean).abs());
        }
        let resasc = resasc * half.abs();
        let abs = resabs[c] * half.abs();
        let mut e = ((kron[c] - gauss[c]) * half).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * abs);
        }
        err = err.max(e);
        kron[c] *= half;
    }
    (kron, err)
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// partition and bisecting the worst panel until the summed error estimate is
/// below `abs_tol` or `max_intervals` is reached.
pub fn integrate_adaptive<const N: usize>(
    mut f: impl FnMut(f64) -> [f64; N],
    breaks: &[f64],
    abs_tol: f64,
    max_intervals: usize,
) -> AdaptiveResult<N> {
    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            continue;
        }
        let (value, error) = gk21(&mut f, a, b);
        evaluations += 21;
        total_err += error;
        heap.push(Panel { a, b, value, error });
    }
    while total_err > abs_tol && heap.len() < max_intervals {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Deterministic summation order, independent of heap layout.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = [0.0; N];
    let mut error = 0.0;
    for p in &panels {
        for (v, pv) in value.iter_mut().zip(p.value) {
            *v += pv;
        }
        error += p.error;
    }
    AdaptiveResult { value, error, intervals: panels.len(), evaluations }
}
