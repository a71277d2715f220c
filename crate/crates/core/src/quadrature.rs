//! Gauss–Legendre rules, adaptive Gauss–Kronrod integration and the
//! divergence test used for singular radial integrands.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::par::ordered_sum;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule on [-1, 1] by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared rule from a process-wide cache.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_056,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// One 21-point Kronrod panel: (value, |K21 - G10|).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-9,
            rel: 1e-11,
            max_panels: 4000,
        }
    }
}

impl Tolerance {
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    pub fn into_result(self, quantity: &str) -> Result<f64> {
        if !self.value.is_finite() {
            return Err(Error::Divergent {
                quantity: quantity.to_string(),
            });
        }
        if !self.converged {
            return Err(Error::Quadrature {
                quantity: quantity.to_string(),
                error: self.error,
            });
        }
        Ok(self.value)
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
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

/// Globally adaptive Gauss–Kronrod over the consecutive intervals of `edges`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, edges: &[f64], tol: Tolerance) -> Estimate {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in edges.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error) = gk21(&f, w[0], w[1]);
        total += value;
        err += error;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let mut converged = true;
    while err > tol.target(total) {
        if !total.is_finite() || heap.len() >= tol.max_panels {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            converged = false;
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = ordered_sum(panels.iter().map(|p| p.value));
    let error = ordered_sum(panels.iter().map(|p| p.error));
    Estimate {
        value,
        error,
        converged: converged && value.is_finite(),
    }
}

/// Default radial integration window.
pub const RADIAL_LO: f64 = 1e-10;
pub const RADIAL_HI: f64 = 1e10;

/// ∫_lo^hi f(r) dr evaluated in u = ln r, with extra breakpoints in r.
pub fn integrate_radial<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Estimate {
    let (ua, ub) = (lo.ln(), hi.ln());
    let panels = ((ub - ua) / 2.0).ceil().max(1.0) as usize;
    let mut edges: Vec<f64> = (0..=panels)
        .map(|i| ua + (ub - ua) * i as f64 / panels as f64)
        .collect();
    edges.extend(
        breaks
            .iter()
            .filter(|&&r| r > lo && r < hi && r.is_finite())
            .map(|r| r.ln()),
    );
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    integrate(
        |u| {
            let r = u.exp();
            let v = f(r);
            if v == 0.0 {
                0.0
            } else {
                v * r
            }
        },
        &edges,
        tol,
    )
}

/// Inner cutoffs used to probe an integrable singularity at r = 0. Each
/// level doubles the number of decades resolved next to the origin.
pub const ORIGIN_CUTOFFS: [f64; 4] = [1e-8, 1e-16, 1e-32, 1e-64];
/// Relative growth per level above which a level counts as growing.
pub const DIVERGENCE_GROWTH: f64 = 0.10;
/// Each cutoff squares the previous one, so a logarithmic or power
/// divergence at least doubles the increment per level while a convergent
/// tail r^{s−1}, s > 0, multiplies it by x(1+x) < 2 with x = cutoff^s.
pub const DIVERGENCE_INCREMENT_RATIO: f64 = 1.998;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refined {
    Finite(f64),
    Divergent([f64; 4]),
}

impl Refined {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Refined::Divergent(_))
    }

    pub fn finite(self, quantity: &str) -> Result<f64> {
        match self {
            Refined::Finite(v) => Ok(v),
            Refined::Divergent(_) => Err(Error::Divergent {
                quantity: quantity.to_string(),
            }),
        }
    }
}

/// Evaluates a nonnegative integral at successively smaller inner cutoffs and
/// declares divergence when every refinement increases it by more than 10%
/// and the last increment is at least twice the one before.
pub fn refine_toward_origin<F: FnMut(f64) -> Result<f64>>(mut integral: F) -> Result<Refined> {
    let mut levels = [0.0; 4];
    for (slot, &cut) in levels.iter_mut().zip(ORIGIN_CUTOFFS.iter()) {
        *slot = match integral(cut) {
            Ok(v) => v,
            Err(Error::Divergent { .. }) | Err(Error::Quadrature { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
    }
    let growing = levels
        .windows(2)
        .all(|w| !w[1].is_finite() || w[1] > w[0] * (1.0 + DIVERGENCE_GROWTH));
    let accelerating = levels[3] - levels[2] >= DIVERGENCE_INCREMENT_RATIO * (levels[2] - levels[1]);
    if (growing && accelerating) || !levels[3].is_finite() {
        Ok(Refined::Divergent(levels))
    } else {
        Ok(Refined::Finite(levels[3]))
    }
}
