//! Joint densities on R^n and their radial profiles along rays `z·(1, v)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_real_line, integrate_to_infinity, Direction, Integral, QuadOptions};
use crate::special::ln_gamma;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Univariate family for models with independent, identically distributed coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum IidFamily {
    StandardNormal,
    Normal { mean: f64, sd: f64 },
    /// Student-t with `nu > 2` degrees of freedom.
    StudentT { nu: f64 },
    /// `shift + |N(0,1)|`; strictly positive when `shift > 0`.
    FoldedNormal { shift: f64 },
}

impl IidFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            IidFamily::StandardNormal => Ok(()),
            IidFamily::Normal { mean, sd } => {
                if !mean.is_finite() || !(sd > 0.0) || !sd.is_finite() {
                    return invalid(format!("normal needs finite mean and sd > 0 (got {mean}, {sd})"));
                }
                Ok(())
            }
            IidFamily::StudentT { nu } => {
                if !(nu > 2.0) || !nu.is_finite() {
                    return invalid(format!("student-t needs nu > 2 (got {nu})"));
                }
                Ok(())
            }
            IidFamily::FoldedNormal { shift } => {
                if !shift.is_finite() {
                    return Err(Error::NonFinite("folded-normal shift".into()));
                }
                Ok(())
            }
        }
    }

    #[inline]
    fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            IidFamily::StandardNormal => -0.5 * x * x - LN_SQRT_2PI,
            IidFamily::Normal { mean, sd } => {
                let u = (x - mean) / sd;
                -0.5 * u * u - LN_SQRT_2PI - sd.ln()
            }
            IidFamily::StudentT { nu } => {
                ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln()
                    - 0.5 * (nu + 1.0) * (1.0 + x * x / nu).ln()
            }
            IidFamily::FoldedNormal { shift } => {
                if x < shift {
                    f64::NEG_INFINITY
                } else {
                    let u = x - shift;
                    std::f64::consts::LN_2 - 0.5 * u * u - LN_SQRT_2PI
                }
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        match *self {
            IidFamily::StandardNormal | IidFamily::StudentT { .. } => true,
            IidFamily::Normal { mean, .. } => mean == 0.0,
            IidFamily::FoldedNormal { .. } => false,
        }
    }
}

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DensityKind {
    Iid(IidFamily),
    /// Multivariate normal, stored through the lower Cholesky factor of the covariance.
    Gaussian {
        mean: Vec<f64>,
        covariance: Vec<f64>,
        cholesky: Vec<f64>,
        ln_norm: f64,
    },
    /// Caller-supplied density; must return finite non-negative values.
    User(DensityFn),
}

impl fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::Iid(fam) => f.debug_tuple("Iid").field(fam).finish(),
            DensityKind::Gaussian { mean, covariance, .. } => f
                .debug_struct("Gaussian")
                .field("mean", mean)
                .field("covariance", covariance)
                .finish(),
            DensityKind::User(_) => f.write_str("User(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityModel {
    n: usize,
    kind: DensityKind,
}

impl DensityModel {
    pub fn iid(family: IidFamily, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("dimension must be positive");
        }
        family.validate()?;
        Ok(Self { n, kind: DensityKind::Iid(family) })
    }

    pub fn standard_normal(n: usize) -> Result<Self> {
        Self::iid(IidFamily::StandardNormal, n)
    }

    /// Multivariate normal with row-major covariance.
    pub fn gaussian(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return invalid("dimension must be positive");
        }
        if covariance.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: covariance.len() });
        }
        if mean.iter().chain(&covariance).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("gaussian parameters".into()));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (covariance[i * n + j], covariance[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return invalid("covariance must be symmetric");
                }
            }
        }
        let cholesky = cholesky(&covariance, n)?;
        let ln_det: f64 = (0..n).map(|i| cholesky[i * n + i].ln()).sum::<f64>() * 2.0;
        let ln_norm = -(n as f64) * LN_SQRT_2PI - 0.5 * ln_det;
        Ok(Self { n, kind: DensityKind::Gaussian { mean, covariance, cholesky, ln_norm } })
    }

    /// Zero-mean, unit-variance normal with every pairwise correlation equal to `rho`.
    pub fn equicorrelated_gaussian(n: usize, rho: f64) -> Result<Self> {
        let cov = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { rho }).collect();
        Self::gaussian(vec![0.0; n], cov)
    }

    pub fn from_fn(n: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if n == 0 {
            return invalid("dimension must be positive");
        }
        Ok(Self { n, kind: DensityKind::User(Arc::new(f)) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// Density value without dimension or sign checks.
    #[inline]
    pub(crate) fn density_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DensityKind::Iid(fam) => x.iter().map(|&xi| fam.ln_pdf(xi)).sum::<f64>().exp(),
            DensityKind::Gaussian { mean, cholesky, ln_norm, .. } => {
                let n = self.n;
                // forward substitution L y = x - mean
                let mut quad = 0.0;
                let mut y = [0.0f64; 16];
                let mut heap;
                let y: &mut [f64] = if n <= 16 {
                    &mut y[..n]
                } else {
                    heap = vec![0.0; n];
                    &mut heap
                };
                for i in 0..n {
                    let mut s = x[i] - mean[i];
                    for k in 0..i {
                        s -= cholesky[i * n + k] * y[k];
                    }
                    y[i] = s / cholesky[i * n + i];
                    quad += y[i] * y[i];
                }
                (ln_norm - 0.5 * quad).exp()
            }
            DensityKind::User(f) => f(x),
        }
    }

    /// `f(x) = f(-x)` for all x (known for built-in families only).
    pub fn is_centrally_symmetric(&self) -> bool {
        match &self.kind {
            DensityKind::Iid(fam) => fam.is_symmetric(),
            DensityKind::Gaussian { mean, .. } => mean.iter().all(|&m| m == 0.0),
            DensityKind::User(_) => false,
        }
    }

    /// Invariant under rotations about the origin.
    pub fn is_spherically_symmetric(&self) -> bool {
        match &self.kind {
            DensityKind::Iid(IidFamily::StandardNormal) => true,
            DensityKind::Iid(IidFamily::Normal { mean, .. }) => *mean == 0.0,
            DensityKind::Iid(_) => self.n == 1 && self.is_centrally_symmetric(),
            DensityKind::Gaussian { mean, covariance, .. } => {
                let n = self.n;
                let c0 = covariance[0];
                mean.iter().all(|&m| m == 0.0)
                    && (0..n * n).all(|k| {
                        let want = if k / n == k % n { c0 } else { 0.0 };
                        covariance[k] == want
                    })
            }
            DensityKind::User(_) => false,
        }
    }
}

fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return invalid("covariance is not positive definite");
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Evaluates the joint density at `x`.
pub fn eval_density(model: &DensityModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.n {
        return Err(Error::DimensionMismatch { expected: model.n, got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("density argument".into()));
    }
    let f = model.density_unchecked(x);
    if !(f >= 0.0) || !f.is_finite() {
        return invalid(format!("density returned {f}; must be finite and non-negative"));
    }
    Ok(f)
}

/// Which one-dimensional integral along the ray `z·(1, v)` to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileVariant {
    /// `∫_R f(z, z·v) dz`.
    Paper,
    /// `∫_0^∞ z^{n-1} f(z, z·v) dz`.
    Weighted,
    /// `∫_{-∞}^0 |z|^{n-1} f(z, z·v) dz`.
    WeightedMirror,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfileQuery {
    pub v: Vec<f64>,
    pub variant: ProfileVariant,
}

impl RadialProfileQuery {
    pub fn new(v: Vec<f64>, variant: ProfileVariant) -> Self {
        Self { v, variant }
    }

    /// The query at `v = 1` (or `-1` when `negative`) for dimension `n`.
    pub fn at_ones(n: usize, negative: bool, variant: ProfileVariant) -> Self {
        let s = if negative { -1.0 } else { 1.0 };
        Self { v: vec![s; n.saturating_sub(1)], variant }
    }
}

/// Radial profile `h(v)` with the default quadrature options.
pub fn h_profile(model: &DensityModel, query: &RadialProfileQuery) -> Result<f64> {
    Ok(h_profile_with(model, query, &QuadOptions::default())?.value)
}

pub fn h_profile_with(
    model: &DensityModel,
    query: &RadialProfileQuery,
    opts: &QuadOptions<f64>,
) -> Result<Integral<f64>> {
    let n = model.n;
    if n < 2 {
        return invalid("radial profile needs n ≥ 2");
    }
    if query.v.len() != n - 1 {
        return Err(Error::DimensionMismatch { expected: n - 1, got: query.v.len() });
    }
    if query.v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("profile point".into()));
    }
    h_profile_unchecked(model, &query.v, query.variant, opts)
}

pub(crate) fn h_profile_unchecked(
    model: &DensityModel,
    v: &[f64],
    variant: ProfileVariant,
    opts: &QuadOptions<f64>,
) -> Result<Integral<f64>> {
    let n = model.n;
    let mut buf = vec![0.0; n];
    let power = (n - 1) as i32;
    let mut bad = false;
    let mut ray = |z: f64, weighted: bool| {
        buf[0] = z;
        for (slot, &vj) in buf[1..].iter_mut().zip(v) {
            *slot = z * vj;
        }
        let f = model.density_unchecked(&buf);
        if !(f >= 0.0) || !f.is_finite() {
            bad = true;
            return 0.0;
        }
        if weighted {
            z.abs().powi(power) * f
        } else {
            f
        }
    };
    let out = match variant {
        ProfileVariant::Paper => integrate_real_line(|z| ray(z, false), 0.0, opts)?,
        ProfileVariant::Weighted => integrate_to_infinity(|z| ray(z, true), 0.0, Direction::Up, opts)?,
        ProfileVariant::WeightedMirror => {
            integrate_to_infinity(|z| ray(z, true), 0.0, Direction::Down, opts)?
        }
    };
    if bad {
        return invalid("density returned a negative or non-finite value along the ray");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_real_line;

    #[test]
    fn density_examples() {
        let m = DensityModel::standard_normal(2).unwrap();
        assert!((eval_density(&m, &[0.0, 0.0]).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let m = DensityModel::equicorrelated_gaussian(2, 0.5).unwrap();
        let want = 1.0 / (2.0 * PI * 0.75f64.sqrt());
        assert!((eval_density(&m, &[0.0, 0.0]).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.183776).abs() < 1e-6);
        let m = DensityModel::standard_normal(3).unwrap();
        let want = (2.0 * PI).powf(-1.5) * (-1.5f64).exp();
        assert!((eval_density(&m, &[1.0, 1.0, 1.0]).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn density_errors() {
        let m = DensityModel::standard_normal(2).unwrap();
        assert!(matches!(eval_density(&m, &[0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(eval_density(&m, &[0.0, f64::NAN]), Err(Error::NonFinite(_))));
        let u = DensityModel::from_fn(1, |_| -1.0).unwrap();
        assert!(eval_density(&u, &[0.0]).is_err());
    }

    #[test]
    fn model_construction_errors() {
        assert!(DensityModel::iid(IidFamily::StudentT { nu: 2.0 }, 3).is_err());
        assert!(DensityModel::iid(IidFamily::Normal { mean: 0.0, sd: 0.0 }, 3).is_err());
        assert!(DensityModel::gaussian(vec![0.0, 0.0], vec![1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(DensityModel::gaussian(vec![0.0, 0.0], vec![1.0, 0.1, 0.2, 1.0]).is_err());
        assert!(DensityModel::gaussian(vec![0.0, 0.0], vec![1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn student_t_matches_statrs() {
        use statrs::distribution::{Continuous, StudentsT};
        let t = StudentsT::new(0.0, 1.0, 5.0).unwrap();
        let m = DensityModel::iid(IidFamily::StudentT { nu: 5.0 }, 1).unwrap();
        for &x in &[-3.0, -0.2, 0.0, 1.7, 10.0] {
            let ours = eval_density(&m, &[x]).unwrap();
            assert!((ours - t.pdf(x)).abs() < 1e-14 * t.pdf(x).max(1e-10) + 1e-16);
        }
    }

    #[test]
    fn folded_normal_support() {
        let m = DensityModel::iid(IidFamily::FoldedNormal { shift: 1.0 }, 2).unwrap();
        assert_eq!(eval_density(&m, &[0.5, 2.0]).unwrap(), 0.0);
        let want = 4.0 / (2.0 * PI);
        assert!((eval_density(&m, &[1.0, 1.0]).unwrap() - want).abs() < 1e-14);
        assert!(!m.is_centrally_symmetric());
    }

    #[test]
    fn symmetry_flags() {
        assert!(DensityModel::standard_normal(3).unwrap().is_spherically_symmetric());
        assert!(!DensityModel::equicorrelated_gaussian(3, 0.5).unwrap().is_spherically_symmetric());
        assert!(DensityModel::equicorrelated_gaussian(3, 0.5).unwrap().is_centrally_symmetric());
        let t = DensityModel::iid(IidFamily::StudentT { nu: 4.0 }, 3).unwrap();
        assert!(t.is_centrally_symmetric() && !t.is_spherically_symmetric());
    }

    #[test]
    fn profile_examples() {
        let m = DensityModel::standard_normal(2).unwrap();
        let paper = h_profile(&m, &RadialProfileQuery::new(vec![1.0], ProfileVariant::Paper)).unwrap();
        // ∫ (2π)^{-1} e^{-z²} dz = 1/(2√π)
        assert!((paper - 0.5 / PI.sqrt()).abs() < 1e-12);
        let w = h_profile(&m, &RadialProfileQuery::new(vec![1.0], ProfileVariant::Weighted)).unwrap();
        assert!((w - 1.0 / (4.0 * PI)).abs() < 1e-13);

        let m = DensityModel::equicorrelated_gaussian(2, 0.5).unwrap();
        let paper = h_profile(&m, &RadialProfileQuery::new(vec![1.0], ProfileVariant::Paper)).unwrap();
        let want = 0.5 / (PI * 0.5).sqrt();
        assert!((paper - want).abs() < 1e-12);
        assert!((want - 0.398942).abs() < 1e-6);

        let m = DensityModel::standard_normal(3).unwrap();
        let a = h_profile(&m, &RadialProfileQuery::new(vec![-1.0, -1.0], ProfileVariant::Paper)).unwrap();
        let b = h_profile(&m, &RadialProfileQuery::new(vec![1.0, 1.0], ProfileVariant::Paper)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn paper_profile_at_ones_for_standard_normal() {
        for n in 2..=6 {
            let m = DensityModel::standard_normal(n).unwrap();
            let h = h_profile(&m, &RadialProfileQuery::at_ones(n, false, ProfileVariant::Paper)).unwrap();
            let want = (2.0 * PI).powf(-((n - 1) as f64) / 2.0) / (n as f64).sqrt();
            assert!((h - want).abs() / want < 1e-10, "n={n}: {h} vs {want}");
        }
    }

    #[test]
    fn weighted_profile_closed_form() {
        // ∫_0^∞ z^{n-1}(2π)^{-n/2} e^{-n z²/2} dz = (2π)^{-n/2} Γ(n/2) (n/2)^{-n/2} / 2
        for n in 2..=6 {
            let m = DensityModel::standard_normal(n).unwrap();
            let nf = n as f64;
            let want = (2.0 * PI).powf(-nf / 2.0) * 0.5 * crate::special::gamma(nf / 2.0)
                * (nf / 2.0).powf(-nf / 2.0);
            let h = h_profile(&m, &RadialProfileQuery::at_ones(n, false, ProfileVariant::Weighted)).unwrap();
            assert!((h - want).abs() / want < 1e-10);
            let hm = h_profile(&m, &RadialProfileQuery::at_ones(n, false, ProfileVariant::WeightedMirror)).unwrap();
            assert_eq!(h, hm);
        }
    }

    #[test]
    fn change_of_variables_recovers_total_mass() {
        // weighted + mirror, integrated over all v, is the full probability.
        let m = DensityModel::gaussian(vec![0.3, -0.2], vec![1.0, 0.5, 0.5, 2.0]).unwrap();
        let opts = QuadOptions::with_tolerances(1e-11, 1e-9);
        let outer = QuadOptions::with_tolerances(1e-9, 1e-8);
        let total = integrate_real_line(
            |v| {
                let w = h_profile_unchecked(&m, &[v], ProfileVariant::Weighted, &opts).unwrap().value;
                let r = h_profile_unchecked(&m, &[v], ProfileVariant::WeightedMirror, &opts).unwrap().value;
                w + r
            },
            0.0,
            &outer,
        )
        .unwrap();
        assert!((total.value - 1.0).abs() < 1e-6, "{}", total.value);
    }

    #[test]
    fn truncation_threshold_invariance() {
        let m = DensityModel::iid(IidFamily::StudentT { nu: 3.0 }, 3).unwrap();
        let q = RadialProfileQuery::at_ones(3, false, ProfileVariant::Weighted);
        let base = h_profile_with(&m, &q, &QuadOptions::default()).unwrap();
        let halved = QuadOptions { tail_cutoff: 0.5e-16, ..QuadOptions::default() };
        let tight = h_profile_with(&m, &q, &halved).unwrap();
        assert!((base.value - tight.value).abs() <= 2.0 * base.error.max(1e-12 * base.value));
    }

    #[test]
    fn profile_dimension_checked() {
        let m = DensityModel::standard_normal(3).unwrap();
        let q = RadialProfileQuery::new(vec![1.0], ProfileVariant::Paper);
        assert!(matches!(h_profile(&m, &q), Err(Error::DimensionMismatch { .. })));
    }
}
