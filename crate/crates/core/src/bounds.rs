//! Non-asymptotic tail bounds from quadratic control of the criterion
//! around its maximiser.
//!
//! With `u = v - 1` the curvature functionals are
//! `λ = inf (g(1) - g(v)) / |u|²` and `μ = sup` of the same ratio over
//! `0 < |u| ≤ 1`. The superlevel region `{g > g(1) - ε}` then lies inside the
//! ball `|u|² ≤ ε/λ` and contains the ball `|u|² ≤ ε/μ`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{criterion, criterion_max, AntiHessianSpec};
use crate::density::{h_profile_unchecked, DensityModel, ProfileVariant};
use crate::error::{invalid, Error, Result};
use crate::oracles::{region_epsilon_limit, region_radius, region_tail_integral, RegionIntegrand};
use crate::quadrature::QuadOptions;
use crate::special::unit_ball_volume;

/// Points excluded around `v = 1`, where the ratio is replaced by its limit.
pub const EXCLUSION_RADIUS: f64 = 1e-6;
const CURVATURE_STARTS: usize = 64;
const ENVELOPE_STARTS: usize = 16;
const MAX_LOCAL_EVALS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curvature {
    pub n: usize,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Extremes found by the optimiser, before the eigenvalue bracket.
    pub lambda_found: f64,
    pub mu_found: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
    /// `½ λ_min(A)` and `½ λ_max(A)`, the limits of the ratio at `v = 1`.
    pub half_eigen_min: f64,
    pub half_eigen_max: f64,
    pub evaluations: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsCertificate {
    pub n: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub mu: f64,
    #[serde(rename = "H")]
    pub h_sup: f64,
    #[serde(rename = "G")]
    pub g_inf: f64,
    pub upper: f64,
    pub lower: f64,
    pub upper_radius: f64,
    pub lower_radius: f64,
    pub h_argmax: Vec<f64>,
    pub g_argmin: Vec<f64>,
    pub evaluations: usize,
    pub certified: bool,
}

/// Best point of a local search.
#[derive(Debug, Clone)]
struct Extremum {
    value: f64,
    point: Vec<f64>,
    evaluations: usize,
    converged: bool,
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Radial projection onto the shell `r_min ≤ |u| ≤ r_max`.
fn project(u: &mut [f64], r_min: f64, r_max: f64) {
    let r = norm(u);
    if r > r_max {
        u.iter_mut().for_each(|x| *x *= r_max / r);
    } else if r < r_min && r > 0.0 {
        u.iter_mut().for_each(|x| *x *= r_min / r);
    } else if r == 0.0 && r_min > 0.0 {
        u[0] = r_min;
    }
}

/// Compass search minimising `f` on a shell, halving the step on failure.
fn compass_search<F>(f: &F, start: Vec<f64>, step: f64, tol: f64, shell: (f64, f64)) -> Result<Extremum>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut x = start;
    project(&mut x, shell.0, shell.1);
    let mut fx = f(&x)?;
    let mut evals = 1;
    let mut step = step;
    while step > tol {
        if evals > MAX_LOCAL_EVALS {
            return Ok(Extremum { value: fx, point: x, evaluations: evals, converged: false });
        }
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * step;
                project(&mut y, shell.0, shell.1);
                let fy = f(&y)?;
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(Extremum { value: fx, point: x, evaluations: evals, converged: true })
}

/// Tensor grid over `[-r, r]^d` restricted to the shell.
fn shell_grid(d: usize, per_axis: usize, shell: (f64, f64)) -> Vec<Vec<f64>> {
    let r = shell.1;
    let coord = |k: usize| -r + 2.0 * r * k as f64 / (per_axis - 1) as f64;
    let total = per_axis.pow(d as u32);
    (0..total)
        .filter_map(|mut idx| {
            let mut u = Vec::with_capacity(d);
            for _ in 0..d {
                u.push(coord(idx % per_axis));
                idx /= per_axis;
            }
            let len = norm(&u);
            (len >= shell.0 && len <= r * (1.0 + 1e-12)).then_some(u)
        })
        .collect()
}

/// Deterministic starting points: axis and diagonal directions at the outer
/// radius, then ChaCha-drawn points in the ball.
fn multistart_points(d: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    let mut starts = Vec::with_capacity(count);
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut u = vec![0.0; d];
            u[i] = sign * radius;
            starts.push(u);
        }
    }
    for sign in [1.0, -1.0] {
        starts.push(vec![sign * radius / (d as f64).sqrt(); d]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba11);
    while starts.len() < count {
        let u: Vec<f64> = (0..d).map(|_| 2.0 * unit(&mut rng) - 1.0).collect();
        if norm(&u) <= 1.0 {
            starts.push(u.into_iter().map(|x| x * radius).collect());
        }
    }
    starts.truncate(count.max(2 * d + 2));
    starts
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Global minimum of `f` on the shell: grid seeding for `d ≤ 3`, multistart beyond.
fn minimise<F>(f: &F, d: usize, shell: (f64, f64), grid_per_axis: [usize; 3], starts: usize) -> Result<Extremum>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let tol = 1e-10 * shell.1;
    let seeds: Vec<(Vec<f64>, f64)> = if d <= 3 {
        let per_axis = grid_per_axis[d - 1];
        let grid = shell_grid(d, per_axis, shell);
        let values = grid.par_iter().map(|u| f(u)).collect::<Result<Vec<f64>>>()?;
        let spacing = 2.0 * shell.1 / (per_axis - 1) as f64;
        let best = argmin(&values);
        let mut seeds = vec![(grid[best].clone(), spacing)];
        // boundary optima are common; seed the outer shell's best point as well
        let outer = (0..grid.len())
            .filter(|&i| norm(&grid[i]) > shell.1 - spacing)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        if let Some(i) = outer {
            if i != best {
                seeds.push((grid[i].clone(), spacing));
            }
        }
        let mut total = grid.len();
        let mut results = Vec::new();
        for (u, step) in seeds {
            let e = compass_search(f, u, step, tol, shell)?;
            total += e.evaluations;
            results.push(e);
        }
        let mut best = pick_min(results);
        best.evaluations = total;
        return Ok(best);
    } else {
        multistart_points(d, starts, shell.1).into_iter().map(|u| (u, 0.25 * shell.1)).collect()
    };
    let results = seeds
        .into_par_iter()
        .map(|(u, step)| compass_search(f, u, step, tol, shell))
        .collect::<Result<Vec<_>>>()?;
    let total = results.iter().map(|e| e.evaluations).sum();
    let mut best = pick_min(results);
    best.evaluations = total;
    Ok(best)
}

fn argmin(values: &[f64]) -> usize {
    (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("non-empty grid")
}

/// Order-free reduction: smallest value, ties broken by the lexicographic point.
fn pick_min(results: Vec<Extremum>) -> Extremum {
    let converged = results.iter().all(|e| e.converged);
    let mut best = results
        .into_iter()
        .min_by(|a, b| {
            a.value.total_cmp(&b.value).then_with(|| {
                a.point
                    .iter()
                    .zip(&b.point)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .expect("at least one start");
    best.converged = converged;
    best
}

fn to_v(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| 1.0 + x).collect()
}

/// `λ(g)` and `μ(g)` for the criterion `g_β` in dimension `n`.
pub fn curvature_functionals(n: usize, beta: f64) -> Result<Curvature> {
    let spec = AntiHessianSpec::new(n, beta)?;
    let (e_min, e_max) = spec.structure_in(crate::analytic::EntryForm::Beta)?.eigen_range();
    let d = n - 1;
    let top = criterion_max::<f64>(n, beta);
    let ratio = |u: &[f64]| -> Result<f64> {
        let r2: f64 = u.iter().map(|x| x * x).sum();
        Ok((top - criterion(&to_v(u), beta)) / r2)
    };
    let neg_ratio = |u: &[f64]| ratio(u).map(|r| -r);
    let shell = (EXCLUSION_RADIUS, 1.0);
    let grid = [401, 401, 161];
    let low = minimise(&ratio, d, shell, grid, CURVATURE_STARTS)?;
    let high = minimise(&neg_ratio, d, shell, grid, CURVATURE_STARTS)?;
    let half_min = 0.5 * e_min;
    let half_max = 0.5 * e_max;
    let lambda = low.value.min(half_min);
    let mu = (-high.value).max(half_max);
    if !(lambda > 0.0) {
        return Err(Error::Convergence(format!("curvature infimum is not positive ({lambda})")));
    }
    Ok(Curvature {
        n,
        beta,
        lambda,
        mu,
        lambda_found: low.value,
        mu_found: -high.value,
        argmin: to_v(&low.point),
        argmax: to_v(&high.point),
        half_eigen_min: half_min,
        half_eigen_max: half_max,
        evaluations: low.evaluations + high.evaluations,
        certified: low.converged && high.converged,
    })
}

/// Upper and lower bounds on the right tail at `g(1) - ε`.
pub fn envelope_bounds(model: &DensityModel, epsilon: f64, curvature: &Curvature) -> Result<BoundsCertificate> {
    let n = curvature.n;
    if model.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: model.n() });
    }
    if !(epsilon > 0.0 && epsilon < curvature.lambda) {
        return Err(Error::OutsideValidity(format!(
            "epsilon must lie in (0, λ) = (0, {}) (got {epsilon})",
            curvature.lambda
        )));
    }
    let d = n - 1;
    let opts = QuadOptions::with_tolerances(1e-300, 1e-11);
    let integrand = |u: &[f64]| -> Result<f64> {
        let v = to_v(u);
        let h = h_profile_unchecked(model, &v, ProfileVariant::Paper, &opts)?;
        Ok(v.iter().map(|x| x.abs()).product::<f64>() * h.value)
    };
    let neg = |u: &[f64]| integrand(u).map(|x| -x);
    let grid = [201, 31, 13];
    let r_up = (epsilon / curvature.lambda).sqrt();
    let r_low = (epsilon / curvature.mu).sqrt();
    let sup = minimise(&neg, d, (0.0, r_up), grid, ENVELOPE_STARTS)?;
    let inf = minimise(&integrand, d, (0.0, r_low), grid, ENVELOPE_STARTS)?;
    let h_sup = -sup.value;
    let g_inf = inf.value;
    let volume = unit_ball_volume::<f64>(d);
    let upper = h_sup * volume * r_up.powi(d as i32);
    let lower = g_inf * volume * r_low.powi(d as i32);
    Ok(BoundsCertificate {
        n,
        beta: curvature.beta,
        epsilon,
        lambda: curvature.lambda,
        mu: curvature.mu,
        h_sup,
        g_inf,
        upper,
        lower,
        upper_radius: r_up,
        lower_radius: r_low,
        h_argmax: to_v(&sup.point),
        g_argmin: to_v(&inf.point),
        evaluations: sup.evaluations + inf.evaluations,
        certified: curvature.certified && sup.converged && inf.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub n: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub lower: f64,
    pub integral: f64,
    pub integral_error: f64,
    pub upper: f64,
    pub holds: bool,
    /// Largest and smallest boundary radius of the region `{g > g(1) - ε}`.
    pub region_max_radius: f64,
    pub region_min_radius: f64,
    /// Region inside the upper-bound ball and containing the lower-bound ball.
    pub region_contained: bool,
    pub certificate: BoundsCertificate,
}

/// Checks `lower ≤ ∫ Π v(j) h(v) dv ≤ upper` at `β = 2`.
pub fn validate_sandwich(model: &DensityModel, n: usize, epsilon: f64) -> Result<SandwichReport> {
    validate_sandwich_beta(model, n, epsilon, 2.0)
}

pub fn validate_sandwich_beta(model: &DensityModel, n: usize, epsilon: f64, beta: f64) -> Result<SandwichReport> {
    if !(2..=4).contains(&n) {
        return invalid(format!("the sandwich check needs the region oracle, n in 2..=4 (got {n})"));
    }
    let curvature = curvature_functionals(n, beta)?;
    let certificate = envelope_bounds(model, epsilon, &curvature)?;
    let limit = region_epsilon_limit(n, beta);
    if epsilon >= limit {
        return Err(Error::OutsideValidity(format!("region unbounded for epsilon ≥ {limit}")));
    }
    let integral = region_tail_integral(model, n, epsilon, beta, RegionIntegrand::Paper)?;
    let level = criterion_max::<f64>(n, beta) - epsilon;
    let radii = boundary_directions(n - 1)
        .iter()
        .map(|u| region_radius(u, beta, level, 1e6))
        .collect::<Result<Vec<f64>>>()?;
    let max_r = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_r = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let slack = 1e-9;
    let holds = certificate.lower <= integral.value * (1.0 + slack)
        && integral.value <= certificate.upper * (1.0 + slack);
    let region_contained = max_r <= certificate.upper_radius * (1.0 + slack)
        && min_r >= certificate.lower_radius * (1.0 - slack);
    Ok(SandwichReport {
        n,
        beta,
        epsilon,
        lower: certificate.lower,
        integral: integral.value,
        integral_error: integral.error_estimate,
        upper: certificate.upper,
        holds,
        region_max_radius: max_r,
        region_min_radius: min_r,
        region_contained,
        certificate,
    })
}

fn boundary_directions(d: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..128)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 128.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut dirs = Vec::new();
            for i in 0..48 {
                let t = 2.0 * PI * i as f64 / 48.0;
                for j in 0..=24 {
                    let p = PI * j as f64 / 24.0;
                    dirs.push(vec![p.sin() * t.cos(), p.sin() * t.sin(), p.cos()]);
                }
            }
            dirs
        }
    }
}
