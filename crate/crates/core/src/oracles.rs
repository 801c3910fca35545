//! Independent ground truth for the tail of `T_β(n)`.
//!
//! * For spherically symmetric laws `T(n)/√n` is one coordinate of a uniform
//!   point on the sphere, so `P(T(n) > t) = ½ I_{1-t²/n}((n-1)/2, ½)` for `t ≥ 0`.
//! * For `n ≤ 4` the tail is integrated directly over the region
//!   `{v : g_β(v) > n^{1-1/β} - ε}` in the coordinates `x = z·(1, v)`.
//! * Discrete counterexamples are enumerated.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{criterion, criterion_max};
use crate::density::{h_profile_unchecked, DensityModel, ProfileVariant};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Integral, QuadOptions};
use crate::scalar::Scalar;
use crate::special::betainc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    SphereExact,
    RegionQuadrature,
    Enumeration,
}

/// Integrand used by the region integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionIntegrand {
    /// `Π_j v(j) · ∫_R f(z, z·v) dz`.
    Paper,
    /// `∫_0^∞ z^{n-1} f(z, z·v) dz`, the exact change of variables.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub method: OracleMethod,
    pub error_estimate: f64,
    pub n: usize,
    pub beta: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrand: Option<RegionIntegrand>,
}

/// `P(T(n) > t)` for a spherically symmetric law on R^n.
pub fn sphere_tail_probability<T: Scalar>(n: usize, t: T) -> Result<T> {
    if n < 2 {
        return invalid(format!("n must be ≥ 2 (got {n})"));
    }
    let root = T::count(n).sqrt();
    let slack = T::one() + T::lit(4.0) * T::epsilon();
    if !t.is_finite() || t.abs() > root * slack {
        return invalid(format!("threshold {t} outside [-√n, √n]"));
    }
    let s = t.abs();
    if s >= root {
        return Ok(if t > T::zero() { T::zero() } else { T::one() });
    }
    // I_x(·, ½) has infinite slope at x = 1, so x must be exact at s = 0;
    // near s = √n the product form avoids cancellation
    let ratio = s * s / T::count(n);
    let x = if ratio < T::lit(0.5) {
        T::one() - ratio
    } else {
        (root - s) * (root + s) / T::count(n)
    };
    let half = T::lit(0.5);
    let upper = half * betainc(T::count(n - 1) * half, half, x)?;
    Ok(if t >= T::zero() { upper } else { T::one() - upper })
}

pub fn sphere_tail_exact(n: usize, threshold: f64) -> Result<OracleResult> {
    let value = sphere_tail_probability(n, threshold)?;
    Ok(OracleResult {
        value,
        method: OracleMethod::SphereExact,
        error_estimate: 1e-14 * value,
        n,
        beta: 2.0,
        threshold,
        epsilon: Some((n as f64).sqrt() - threshold),
        integrand: None,
    })
}

/// Tolerances for the nested region quadrature.
#[derive(Debug, Clone, Copy)]
pub struct RegionOptions {
    pub rel_tol: f64,
    pub max_radius: f64,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_radius: 1e6 }
    }
}

/// Distance from `1` along the unit direction `u` to the boundary of
/// `{v : g_β(v) > level}`. The superlevel sets are convex, so each ray from
/// the maximiser crosses the boundary once.
pub fn region_radius(u: &[f64], beta: f64, level: f64, max_radius: f64) -> Result<f64> {
    let mut v = vec![0.0; u.len()];
    let mut excess = |r: f64| {
        for (slot, &uj) in v.iter_mut().zip(u) {
            *slot = 1.0 + r * uj;
        }
        criterion(&v, beta) - level
    };
    if !(excess(0.0) > 0.0) {
        return Err(Error::RegionDetection(format!("level {level} is not below the maximum")));
    }
    let mut lo = 0.0;
    let mut hi = 0.5;
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > max_radius {
            return Err(Error::RegionDetection(format!(
                "region unbounded along direction {u:?} (radius > {max_radius})"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest ε for which the region is bounded and the mirrored `z < 0`
/// branch cannot reach the right tail: `n^{1-1/β} - (n-1)^{1-1/β}`.
pub fn region_epsilon_limit(n: usize, beta: f64) -> f64 {
    criterion_max::<f64>(n, beta) - criterion_max::<f64>(n - 1, beta)
}

pub fn region_tail_integral(
    model: &DensityModel,
    n: usize,
    epsilon: f64,
    beta: f64,
    integrand: RegionIntegrand,
) -> Result<OracleResult> {
    region_tail_integral_with(model, n, epsilon, beta, integrand, &RegionOptions::default())
}

/// Integrates the tail over the `v`-region in radial coordinates about `1`.
pub fn region_tail_integral_with(
    model: &DensityModel,
    n: usize,
    epsilon: f64,
    beta: f64,
    integrand: RegionIntegrand,
    opts: &RegionOptions,
) -> Result<OracleResult> {
    if !(2..=4).contains(&n) {
        return invalid(format!("region integration supports n in 2..=4 (got {n})"));
    }
    if model.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: model.n() });
    }
    if !(beta > 1.0) {
        return invalid(format!("beta must be > 1 (got {beta})"));
    }
    let limit = region_epsilon_limit(n, beta);
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(Error::OutsideValidity(format!(
            "epsilon must lie in (0, {limit}) for a bounded region (got {epsilon})"
        )));
    }
    let level = criterion_max::<f64>(n, beta) - epsilon;
    let d = n - 1;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let record = |e: Error| {
        failure.borrow_mut().get_or_insert(e);
    };

    let h_opts = QuadOptions::with_tolerances(1e-300, opts.rel_tol * 1e-2);
    let r_opts = QuadOptions::with_tolerances(1e-300, opts.rel_tol * 1e-2);
    let a_opts = QuadOptions::with_tolerances(1e-300, opts.rel_tol * 1e-1);

    let point_value = |v: &[f64]| -> f64 {
        let variant = match integrand {
            RegionIntegrand::Paper => ProfileVariant::Paper,
            RegionIntegrand::Weighted => ProfileVariant::Weighted,
        };
        match h_profile_unchecked(model, v, variant, &h_opts) {
            Ok(h) => match integrand {
                RegionIntegrand::Paper => v.iter().product::<f64>() * h.value,
                RegionIntegrand::Weighted => h.value,
            },
            Err(e) => {
                record(e);
                0.0
            }
        }
    };

    // ∫_0^{ρ(u)} F(1 + r u) r^{d-1} dr
    let radial = |u: &[f64]| -> f64 {
        let rho = match region_radius(u, beta, level, opts.max_radius) {
            Ok(r) => r,
            Err(e) => {
                record(e);
                return 0.0;
            }
        };
        let mut v = vec![0.0; u.len()];
        let res = integrate(
            |r: f64| {
                for (slot, &uj) in v.iter_mut().zip(u) {
                    *slot = 1.0 + r * uj;
                }
                point_value(&v) * r.powi(d as i32 - 1)
            },
            0.0,
            rho,
            &r_opts,
        );
        match res {
            Ok(i) => i.value,
            Err(e) => {
                record(e);
                0.0
            }
        }
    };

    let total = match d {
        1 => {
            let value = radial(&[1.0]) + radial(&[-1.0]);
            Integral { value, error: value * opts.rel_tol, evaluations: 0 }
        }
        2 => periodic_trapezoid(|theta: f64| radial(&[theta.cos(), theta.sin()]), opts.rel_tol)?,
        _ => periodic_trapezoid(
            |theta: f64| {
                let (st, ct) = theta.sin_cos();
                let inner = integrate(
                    |phi: f64| {
                        let (sp, cp) = phi.sin_cos();
                        radial(&[sp * ct, sp * st, cp]) * sp
                    },
                    0.0,
                    PI,
                    &a_opts,
                );
                match inner {
                    Ok(i) => i.value,
                    Err(e) => {
                        record(e);
                        0.0
                    }
                }
            },
            opts.rel_tol,
        )?,
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(OracleResult {
        value: total.value,
        method: OracleMethod::RegionQuadrature,
        error_estimate: total.error,
        n,
        beta,
        threshold: level,
        epsilon: Some(epsilon),
        integrand: Some(integrand),
    })
}

/// Trapezoid rule over one period, doubled until successive sums agree.
/// Exponentially convergent for smooth periodic integrands.
fn periodic_trapezoid<F: FnMut(f64) -> f64>(mut f: F, rel_tol: f64) -> Result<Integral<f64>> {
    const MAX_POINTS: usize = 1 << 14;
    let mut points = 8;
    let mut sum: f64 = (0..points).map(|k| f(2.0 * PI * k as f64 / points as f64)).sum();
    let mut estimate = 2.0 * PI * sum / points as f64;
    while points < MAX_POINTS {
        let fresh: f64 = (0..points).map(|k| f(2.0 * PI * (k as f64 + 0.5) / points as f64)).sum();
        sum += fresh;
        points *= 2;
        let next = 2.0 * PI * sum / points as f64;
        let change = (next - estimate).abs();
        estimate = next;
        if change <= rel_tol * next.abs() {
            return Ok(Integral { value: next, error: change, evaluations: points });
        }
    }
    Err(Error::Quadrature { estimate, error: f64::NAN })
}

/// Largest `n` accepted by the Rademacher enumeration.
pub const MAX_ENUMERATION_N: usize = 24;

/// `P(T(n) > threshold)` for i.i.d. Rademacher signs, by enumerating all `2^n` sign vectors.
pub fn rademacher_tail_enumerate(n: usize, threshold: f64) -> Result<OracleResult> {
    if !(1..=MAX_ENUMERATION_N).contains(&n) {
        return invalid(format!("enumeration supports 1 ≤ n ≤ {MAX_ENUMERATION_N} (got {n})"));
    }
    let root = (n as f64).sqrt();
    let total: u64 = 1 << n;
    let hits = (0..total)
        .filter(|mask| {
            let minus = mask.count_ones() as f64;
            let sum = n as f64 - 2.0 * minus;
            sum / root > threshold
        })
        .count() as u64;
    Ok(OracleResult {
        value: hits as f64 / total as f64,
        method: OracleMethod::Enumeration,
        error_estimate: 0.0,
        n,
        beta: 2.0,
        threshold,
        epsilon: Some(root - threshold),
        integrand: None,
    })
}

/// Exact Rademacher tail at `√n - ε` inside the window `0 < ε < (2√n)^{-1}`,
/// where it equals `2^{-n}`.
pub fn rademacher_tail_exact(n: usize, epsilon: f64) -> Result<OracleResult> {
    let window = 0.5 / (n as f64).sqrt();
    if !(epsilon > 0.0 && epsilon < window) {
        return Err(Error::OutsideValidity(format!(
            "epsilon must lie in (0, {window}) (got {epsilon})"
        )));
    }
    rademacher_tail_enumerate(n, (n as f64).sqrt() - epsilon)
}

/// Tail at `√n - ε` when `ξ(1) ≡ 0` and the other coordinates are i.i.d. standard
/// normal. Reduces to the sphere law in dimension `n - 1`, whose support ends at `√(n-1)`.
pub fn degenerate_component_check(n: usize, epsilon: f64) -> Result<OracleResult> {
    if n < 3 {
        return invalid(format!("the degenerate-coordinate model needs n ≥ 3 (got {n})"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return invalid(format!("epsilon must be positive (got {epsilon})"));
    }
    let threshold = (n as f64).sqrt() - epsilon;
    let reduced_max = ((n - 1) as f64).sqrt();
    let value = if threshold >= reduced_max {
        0.0
    } else if threshold < -reduced_max {
        1.0
    } else {
        sphere_tail_probability(n - 1, threshold)?
    };
    Ok(OracleResult {
        value,
        method: OracleMethod::SphereExact,
        error_estimate: 1e-14 * value,
        n,
        beta: 2.0,
        threshold,
        epsilon: Some(epsilon),
        integrand: None,
    })
}

/// Least-squares fit of `log q = log c + e log ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub expected_exponent: f64,
    pub epsilon_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// Whether the fitted exponent is within `EXPONENT_TOLERANCE` of `(n-1)/2`.
    pub conforms: bool,
}

pub const FIT_RESIDUAL_THRESHOLD: f64 = 0.05;
pub const EXPONENT_TOLERANCE: f64 = 0.02;

pub fn leading_coeff_fit<F>(mut evaluator: F, n: usize, grid: &[f64]) -> Result<CoefficientFit>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid.len() < 4 {
        return invalid("the epsilon grid needs at least four points");
    }
    if grid.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return invalid("epsilon grid values must be positive");
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return invalid("epsilon grid must be strictly decreasing");
    }
    let values = grid.iter().map(|&e| evaluator(e)).collect::<Result<Vec<_>>>()?;
    if let Some((e, q)) = grid.iter().zip(&values).find(|(_, &q)| !(q > 0.0)) {
        return Err(Error::Degenerate(format!("tail is {q} at epsilon {e}; no power law to fit")));
    }
    let xs: Vec<f64> = grid.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|q| q.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    if residual > FIT_RESIDUAL_THRESHOLD {
        return Err(Error::NonPowerLaw { residual, threshold: FIT_RESIDUAL_THRESHOLD });
    }
    let expected_exponent = (n as f64 - 1.0) / 2.0;
    Ok(CoefficientFit {
        coefficient: intercept.exp(),
        exponent,
        expected_exponent,
        epsilon_grid: grid.to_vec(),
        values,
        residual,
        conforms: (exponent - expected_exponent).abs() <= EXPONENT_TOLERANCE,
    })
}

/// `count` points from `start` to `end` with constant ratio.
pub fn geometric_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let ratio = (end / start).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| start * ratio.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_examples() {
        let t = 2f64.sqrt() - 0.01;
        let r = sphere_tail_exact(2, t).unwrap();
        let want = (1.0 - 0.01 / 2f64.sqrt()).acos() / PI;
        assert!((r.value - want).abs() < 1e-14);
        assert!((r.value - 0.037876).abs() < 1e-6);
        for n in 2..10 {
            assert!((sphere_tail_exact(n, 0.0).unwrap().value - 0.5).abs() < 1e-14);
        }
        let r = sphere_tail_exact(3, 3f64.sqrt() - 0.1).unwrap();
        assert!((r.value - 0.1 / (2.0 * 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn sphere_n3_is_linear_in_epsilon() {
        // uniform marginal on [-1, 1]: P(U > s) = (1 - s)/2
        for &eps in &[1e-6, 1e-3, 0.3, 1.0, 1.5] {
            let p = sphere_tail_probability(3, 3f64.sqrt() - eps).unwrap();
            let want = eps / (2.0 * 3f64.sqrt());
            assert!((p - want).abs() < 1e-13 * want.max(1e-3), "eps={eps}");
        }
    }

    #[test]
    fn sphere_boundaries_and_sign() {
        assert_eq!(sphere_tail_probability(4, 2.0f64).unwrap(), 0.0);
        assert!(sphere_tail_probability(4, 2.1f64).is_err());
        let p = sphere_tail_probability(5, 0.7f64).unwrap();
        let q = sphere_tail_probability(5, -0.7f64).unwrap();
        assert!((p + q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_monotone() {
        for n in 2..7 {
            let root = (n as f64).sqrt();
            let mut prev = 1.0;
            for k in 0..=200 {
                let t = -root + 2.0 * root * k as f64 / 200.0;
                let p = sphere_tail_probability(n, t).unwrap();
                assert!(p <= prev + 1e-15);
                prev = p;
            }
            assert_eq!(prev, 0.0);
        }
    }

    #[test]
    fn region_radius_n2_closed_form() {
        // for n = 2, β = 2 the boundary solves (1+v)/√(1+v²) = level
        let level = 2f64.sqrt() - 0.05;
        let r_plus = region_radius(&[1.0], 2.0, level, 1e6).unwrap();
        let v = 1.0 + r_plus;
        assert!(((1.0 + v) / (1.0 + v * v).sqrt() - level).abs() < 1e-13);
    }

    #[test]
    fn region_weighted_matches_sphere() {
        let m = DensityModel::standard_normal(2).unwrap();
        let r = region_tail_integral(&m, 2, 0.01, 2.0, RegionIntegrand::Weighted).unwrap();
        let s = sphere_tail_exact(2, 2f64.sqrt() - 0.01).unwrap();
        assert!((r.value - s.value).abs() < 1e-6 * s.value, "{} vs {}", r.value, s.value);
        let m = DensityModel::standard_normal(3).unwrap();
        let r = region_tail_integral(&m, 3, 0.1, 2.0, RegionIntegrand::Weighted).unwrap();
        assert!((r.value - 0.1 / (2.0 * 3f64.sqrt())).abs() < 1e-6 * r.value);
    }

    #[test]
    fn region_paper_integrand_overshoots() {
        // for n = 2 the paper integrand is v·∫_R f(z, zv) dz against the exact
        // ∫_0^∞ z f(z, zv) dz; at v = 1 these differ by 2√π
        let m = DensityModel::standard_normal(2).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.01, 0.001] {
            let p = region_tail_integral(&m, 2, eps, 2.0, RegionIntegrand::Paper).unwrap();
            let s = sphere_tail_exact(2, 2f64.sqrt() - eps).unwrap();
            let gap = (p.value / s.value / (2.0 * PI.sqrt()) - 1.0).abs();
            assert!(gap < 0.03 && gap < prev, "eps {eps} gap {gap}");
            prev = gap;
        }
    }

    #[test]
    fn region_rejects_invalid() {
        let m = DensityModel::standard_normal(2).unwrap();
        assert!(region_tail_integral(&m, 2, 0.5, 2.0, RegionIntegrand::Weighted).is_err());
        let m5 = DensityModel::standard_normal(5).unwrap();
        assert!(region_tail_integral(&m5, 5, 0.01, 2.0, RegionIntegrand::Weighted).is_err());
        assert!(region_tail_integral(&m, 3, 0.01, 2.0, RegionIntegrand::Weighted).is_err());
    }

    #[test]
    fn rademacher_examples() {
        assert_eq!(rademacher_tail_exact(3, 0.1).unwrap().value, 0.125);
        assert_eq!(rademacher_tail_exact(2, 0.2).unwrap().value, 0.25);
        assert_eq!(rademacher_tail_exact(4, 0.12).unwrap().value, 0.0625);
        assert!(rademacher_tail_exact(4, 0.26).is_err());
        assert!(rademacher_tail_enumerate(25, 0.0).is_err());
        // P(T(3) > 0) = P(at most one minus sign) = 4/8
        assert_eq!(rademacher_tail_enumerate(3, 0.0).unwrap().value, 0.5);
    }

    #[test]
    fn degenerate_examples() {
        assert_eq!(degenerate_component_check(3, 0.2).unwrap().value, 0.0);
        assert_eq!(degenerate_component_check(4, 0.25).unwrap().value, 0.0);
        let r = degenerate_component_check(3, 0.35).unwrap();
        let want = sphere_tail_probability(2, 3f64.sqrt() - 0.35).unwrap();
        assert!(r.value > 0.0 && r.value == want);
        assert!(degenerate_component_check(2, 0.1).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_power_law() {
        let grid = geometric_grid(1e-2, 1e-6, 9);
        let fit = leading_coeff_fit(|e| Ok(0.731 * e.powf(1.37)), 3, &grid).unwrap();
        assert!((fit.coefficient - 0.731).abs() < 1e-10);
        assert!((fit.exponent - 1.37).abs() < 1e-10);
    }

    #[test]
    fn fit_on_sphere_oracle() {
        let grid = geometric_grid(1e-2, 1e-5, 7);
        let fit = leading_coeff_fit(|e| sphere_tail_probability(2, 2f64.sqrt() - e), 2, &grid).unwrap();
        // curvature of arccos over the grid shifts the fit slightly above 2^{1/4}/π
        assert!((fit.coefficient - 0.37855).abs() < 5e-4, "{}", fit.coefficient);
        assert!((fit.exponent - 0.5).abs() < 1e-3);
        let fit = leading_coeff_fit(|e| sphere_tail_probability(3, 3f64.sqrt() - e), 3, &grid).unwrap();
        assert!((fit.coefficient - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-10);
        assert!((fit.exponent - 1.0).abs() < 1e-10);
        assert!(fit.residual < 1e-10 && fit.conforms);
    }

    #[test]
    fn fit_flags_rademacher() {
        let grid = geometric_grid(1e-1, 1e-4, 6);
        let fit = leading_coeff_fit(|e| Ok(rademacher_tail_exact(3, e)?.value), 3, &grid).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        assert!(!fit.conforms);
    }

    #[test]
    fn fit_rejects_bad_grids() {
        assert!(leading_coeff_fit(Ok, 2, &[0.1, 0.01, 0.001]).is_err());
        assert!(leading_coeff_fit(Ok, 2, &[0.1, 0.2, 0.01, 0.001]).is_err());
        // strongly curved in log-log
        let grid = geometric_grid(1.0, 1e-8, 8);
        let err = leading_coeff_fit(|e: f64| Ok((-1.0 / e).exp() + e), 2, &grid);
        assert!(err.is_err());
    }
}
