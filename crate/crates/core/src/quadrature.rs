//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Semi-infinite ranges are truncated at the point where the integrand has
//! fallen below `tail_cutoff` times its observed peak, found by a geometric
//! scan outward from the finite endpoint.

// Nodes and weights are the standard tabulated digits.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
    /// Fraction of the integrand peak below which an infinite tail is cut.
    pub tail_cutoff: T,
}

impl<T: Scalar> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-10),
            max_intervals: 2000,
            tail_cutoff: T::lit(1e-16),
        }
    }
}

impl<T: Scalar> QuadOptions<T> {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol: T::lit(abs_tol), rel_tol: T::lit(rel_tol), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    frozen: bool,
}

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<(T, T)> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let wk = T::lit(WGK[j]);
        res_k = res_k + wk * (f1 + f2);
        res_abs = res_abs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::NonFinite(format!(
            "integrand on [{a}, {b}] produced a non-finite value"
        )));
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hl = half_len.abs();
    let value = res_k * half_len;
    res_abs = res_abs * hl;
    res_asc = res_asc * hl;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc > T::zero() && err > T::zero() {
        let scaled = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * scaled.min(T::one());
    }
    let round_floor = T::lit(50.0) * T::epsilon() * res_abs;
    if round_floor > T::min_positive_value() {
        err = err.max(round_floor);
    }
    Ok((value, err))
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T: Scalar, F: FnMut(T) -> T>(
    f: F,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<Integral<T>> {
    integrate_breaks(f, &[a, b], opts)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (which must be sorted).
pub fn integrate_breaks<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    points: &[T],
    opts: &QuadOptions<T>,
) -> Result<Integral<T>> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need at least two breakpoints".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("integration limits".into()));
    }
    let mut segments: Vec<Segment<T>> = Vec::with_capacity(64);
    for w in points.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidParameter("breakpoints must be sorted".into()));
        }
        if w[1] == w[0] {
            continue;
        }
        let (value, error) = gk15(&mut f, w[0], w[1])?;
        segments.push(Segment { a: w[0], b: w[1], value, error, frozen: false });
    }
    let mut evaluations = 15 * segments.len();
    loop {
        let total: T = segments.iter().fold(T::zero(), |s, g| s + g.value);
        let err: T = segments.iter().fold(T::zero(), |s, g| s + g.error);
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol {
            return Ok(Integral { value: total, error: err, evaluations });
        }
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.frozen)
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(quad_failure(total, err));
        };
        if segments.len() >= opts.max_intervals {
            return Err(quad_failure(total, err));
        }
        let seg = segments[i];
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b || (seg.b - seg.a) <= T::lit(16.0) * T::epsilon() * mid.abs() {
            segments[i].frozen = true;
            continue;
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, seg.b)?;
        evaluations += 30;
        segments[i] = Segment { a: seg.a, b: mid, value: v1, error: e1, frozen: false };
        segments.push(Segment { a: mid, b: seg.b, value: v2, error: e2, frozen: false });
    }
}

fn quad_failure<T: Scalar>(total: T, err: T) -> Error {
    Error::Quadrature {
        estimate: total.to_f64().unwrap_or(f64::NAN),
        error: err.to_f64().unwrap_or(f64::NAN),
    }
}

const SCAN_START: f64 = 1e-10;
const SCAN_GROWTH: f64 = 1.5;
const SCAN_STEPS: usize = 240;
const PANEL_RATIO: f64 = 4.0;

/// Result of scanning outward from the finite endpoint.
struct TailScan<T> {
    /// Offset where the integrand first departs from its endpoint behaviour.
    onset: T,
    peak_at: T,
    cut: T,
}

/// Scans `|f|` on a geometric grid of offsets from `a` and locates the cut
/// beyond which it stays below `cutoff · peak`. Returns `None` when the
/// integrand vanishes along the whole scan.
fn scan_tail<T: Scalar, F: FnMut(T) -> T>(
    f: &mut F,
    a: T,
    dir: Direction,
    cutoff: T,
) -> Result<Option<TailScan<T>>> {
    let at = |d: T| match dir {
        Direction::Up => a + d,
        Direction::Down => a - d,
    };
    let f0 = f(a).abs();
    if !f0.is_finite() {
        return Err(Error::NonFinite(format!("integrand at endpoint {a}")));
    }
    let mut samples: Vec<(T, T)> = Vec::with_capacity(96);
    let mut peak = f0;
    let mut peak_at = T::zero();
    let mut below = 0usize;
    let mut d = T::lit(SCAN_START);
    let growth = T::lit(SCAN_GROWTH);
    let mut cut = None;
    for _ in 0..SCAN_STEPS {
        let v = f(at(d)).abs();
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand at offset {d}")));
        }
        samples.push((d, v));
        if v > peak {
            peak = v;
            peak_at = d;
            below = 0;
        } else if peak > T::zero() && v <= cutoff * peak {
            below += 1;
            if below >= 3 {
                cut = Some(d);
                break;
            }
        } else {
            below = 0;
        }
        d = d * growth;
    }
    if peak == T::zero() {
        return Ok(None);
    }
    let Some(cut) = cut else {
        return Err(Error::Quadrature { estimate: f64::NAN, error: f64::INFINITY });
    };
    let change = T::lit(1e-3) * peak;
    let onset = samples
        .iter()
        .position(|&(_, v)| (v - f0).abs() > change)
        .map(|i| if i == 0 { samples[0].0 } else { samples[i - 1].0 })
        .unwrap_or(samples[0].0);
    Ok(Some(TailScan { onset, peak_at, cut }))
}

/// Integrates `f` from `a` to `+∞` (`Direction::Up`) or `-∞` (`Direction::Down`).
pub fn integrate_to_infinity<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    dir: Direction,
    opts: &QuadOptions<T>,
) -> Result<Integral<T>> {
    let Some(scan) = scan_tail(&mut f, a, dir, opts.tail_cutoff)? else {
        return Ok(Integral { value: T::zero(), error: T::zero(), evaluations: SCAN_STEPS });
    };
    // geometric panels from the onset out to the cut keep the adaptive scheme
    // from accepting one coarse panel over narrow or slowly decaying mass
    let mut offsets: Vec<T> = vec![T::zero(), scan.cut];
    if scan.peak_at > T::zero() && scan.peak_at < scan.cut {
        offsets.push(scan.peak_at);
    }
    let mut d = scan.onset;
    while d < scan.cut {
        offsets.push(d);
        d = d * T::lit(PANEL_RATIO);
    }
    offsets.sort_by(|x, y| x.partial_cmp(y).unwrap());
    offsets.dedup();
    // the downward branch is integrated as g(t) = f(a - t) so that mirror
    // images of an integrand give bit-identical results
    let out = match dir {
        Direction::Up => {
            let pts: Vec<T> = offsets.iter().map(|&d| a + d).collect();
            integrate_breaks(f, &pts, opts)?
        }
        Direction::Down => integrate_breaks(|t| f(a - t), &offsets, opts)?,
    };
    Ok(out)
}

/// Integrates `f` over the whole real line, split at `center`.
pub fn integrate_real_line<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    center: T,
    opts: &QuadOptions<T>,
) -> Result<Integral<T>> {
    let up = integrate_to_infinity(&mut f, center, Direction::Up, opts)?;
    let down = integrate_to_infinity(&mut f, center, Direction::Down, opts)?;
    Ok(Integral {
        value: up.value + down.value,
        error: up.error + down.error,
        evaluations: up.evaluations + down.evaluations,
    })
}
