//! Globally adaptive Gauss–Kronrod (10/21-point) integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

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
    0.123_491_976_262_065_851_077_600_525_889_350,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping criteria for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> QuadOptions<T> {
    pub fn rel(rel_tol: T) -> Self {
        Self {
            abs_tol: T::zero(),
            rel_tol,
            max_intervals: 4000,
        }
    }

    pub fn with_abs(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self::rel(T::lit(1e-12))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod21<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let centre = half * (a + b);
    let hl = half * (b - a);
    let fc = f(centre);
    let mut resk = fc * T::lit(WGK[10]);
    let mut resabs = resk.abs();
    let mut resg = T::zero();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = hl * T::lit(XGK[j]);
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        resk += w * (f1 + f2);
        resabs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let reskh = resk * half;
    let mut resasc = T::lit(WGK[10]) * (fc - reskh).abs();
    for j in 0..10 {
        resasc += T::lit(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * hl;
    let resabs = resabs * hl.abs();
    let resasc = resasc * hl.abs();
    let mut error = ((resk - resg) * hl).abs();
    if resasc != T::zero() && error != T::zero() {
        let scale = (T::lit(200.0) * error / resasc).powf(T::lit(1.5));
        error = resasc * scale.min(T::one());
    }
    let floor = T::lit(50.0) * T::epsilon() * resabs;
    if resabs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        error = error.max(floor);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<QuadResult<T>> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// subdivision. Breakpoints must be nondecreasing.
pub fn integrate_with_breaks<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breaks: &[T],
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    assert!(breaks.len() >= 2, "need at least two breakpoints");
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod21(&mut f, w[0], w[1]));
            evals += 21;
        }
    }
    loop {
        let (value, error) = totals(&heap);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                evaluations: evals,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailed {
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => {
                return Ok(QuadResult {
                    value: T::zero(),
                    error: T::zero(),
                    evaluations: evals,
                })
            }
        };
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in this precision
            let (value, error) = totals(&heap);
            return Err(Error::QuadratureFailed {
                estimate: (value + worst.value).to_f64_lossy(),
                error: (error + worst.error).to_f64_lossy(),
            });
        }
        heap.push(kronrod21(&mut f, worst.a, mid));
        heap.push(kronrod21(&mut f, mid, worst.b));
        evals += 42;
    }
}

fn totals<T: Real>(heap: &BinaryHeap<Segment<T>>) -> (T, T) {
    let mut v = CompensatedSum::new();
    let mut e = CompensatedSum::new();
    for s in heap.iter() {
        v.add(s.value);
        e.add(s.error);
    }
    (v.value(), e.value())
}

/// Iterated adaptive integration over a rectangle.
///
/// The reported error adds the outer estimate to the worst inner estimate
/// times the outer width.
pub fn integrate_2d<T: Real, F: FnMut(T, T) -> T>(
    mut f: F,
    u: (T, T),
    v: (T, T),
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol / ((u.1 - u.0).abs() * T::lit(10.0)).max(T::one()),
        rel_tol: opts.rel_tol * T::lit(0.1),
        max_intervals: opts.max_intervals,
    };
    let mut worst_inner = T::zero();
    let mut evals = 0usize;
    let mut failure: Option<Error> = None;
    let outer = integrate(
        |uu| {
            if failure.is_some() {
                return T::zero();
            }
            match integrate(|vv| f(uu, vv), v.0, v.1, &inner_opts) {
                Ok(r) => {
                    worst_inner = worst_inner.max(r.error);
                    evals += r.evaluations;
                    r.value
                }
                Err(e) => {
                    failure = Some(e);
                    T::zero()
                }
            }
        },
        u.0,
        u.1,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    Ok(QuadResult {
        value: outer.value,
        error: outer.error + worst_inner * (u.1 - u.0).abs(),
        evaluations: evals,
    })
}
