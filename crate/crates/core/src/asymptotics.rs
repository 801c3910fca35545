//! Leading-order tail constants and predictions.
//!
//! For a density `f` on R^n the right tail `P(T_β(n) > n^{1-1/β} - ε)` behaves
//! like `K_β(n) · h(1) · ε^{(n-1)/2}` as `ε → 0+`. Two variants are carried:
//!
//! * `Paper`: the constant and profile exactly as printed, i.e. the ellipsoid
//!   `{(A u, u) < ε}` with the printed determinant and the unweighted profile
//!   `∫_R f(z, z·1) dz`.
//! * `Corrected`: the ellipsoid `{½(A u, u) < ε}` from the second-order
//!   expansion, the eigenvalue-product determinant, and the profile carrying the
//!   Jacobian weight `z^{n-1}` over `z > 0`.

use serde::{Deserialize, Serialize};

use crate::analytic::{criterion_max, AntiHessianSpec, EntryForm};
use crate::density::{h_profile, DensityModel, ProfileVariant, RadialProfileQuery};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::special::{ln_gamma, ln_unit_ball_volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Paper,
    Corrected,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Paper => "paper",
            Variant::Corrected => "corrected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Right,
    Left,
    TwoSided,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
            Side::TwoSided => "two-sided",
        }
    }
}

/// One tail question: `P(T_β(n) > n^{1-1/β} - ε)` (or its left / two-sided analogue).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    pub n: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub side: Side,
}

impl TailQuery {
    pub fn new(n: usize, epsilon: f64, beta: f64, side: Side) -> Result<Self> {
        if n < 2 {
            return invalid(format!("n must be ≥ 2 (got {n})"));
        }
        if !(beta > 1.0) || !beta.is_finite() {
            return invalid(format!("beta must be > 1 (got {beta})"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("epsilon must lie in (0, 1) (got {epsilon})"));
        }
        if side != Side::Right && beta != 2.0 {
            return invalid("left and two-sided tails are only available for beta = 2");
        }
        if epsilon >= criterion_max(n, beta) {
            return Err(Error::OutsideValidity(format!(
                "epsilon {epsilon} ≥ maximal statistic {}",
                criterion_max(n, beta)
            )));
        }
        Ok(Self { n, epsilon, beta, side })
    }

    pub fn right(n: usize, epsilon: f64) -> Result<Self> {
        Self::new(n, epsilon, 2.0, Side::Right)
    }

    /// Threshold `B = n^{1-1/β} - ε`.
    pub fn threshold(&self) -> f64 {
        criterion_max(self.n, self.beta) - self.epsilon
    }
}

/// The multiplicative constant `K` with its determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KConstant<T> {
    pub n: usize,
    pub beta: T,
    pub variant: Variant,
    pub value: T,
    pub ln_value: T,
    /// Determinant entering the constant (printed formula for `Paper`).
    pub det: T,
    pub ln_det: T,
}

/// `K_β(n)` in the requested variant, using the classical entry formulas at β = 2.
pub fn k_constant<T: Scalar>(n: usize, beta: T, variant: Variant) -> Result<KConstant<T>> {
    let spec = AntiHessianSpec::new(n, beta)?;
    k_constant_in(n, beta, variant, spec.default_form())
}

/// `K_β(n)` using an explicit entry form. Evaluated in the log domain.
pub fn k_constant_in<T: Scalar>(
    n: usize,
    beta: T,
    variant: Variant,
    form: EntryForm,
) -> Result<KConstant<T>> {
    let spec = AntiHessianSpec::new(n, beta)?;
    let half_dim = T::count(n - 1) * T::lit(0.5);
    let ln2 = T::LN_2();
    let ln_ball = ln_unit_ball_volume::<T>(n - 1);
    let (ln_det, ln_value) = match variant {
        Variant::Paper => {
            let ln_det = spec.ln_paper_det_in(form)?;
            (ln_det, -half_dim * ln2 - T::lit(0.5) * ln_det + ln_ball)
        }
        Variant::Corrected => {
            let ln_det = spec.ln_det_in(form)?;
            (ln_det, half_dim * ln2 - T::lit(0.5) * ln_det + ln_ball)
        }
    };
    Ok(KConstant { n, beta, variant, value: ln_value.exp(), ln_value, det: ln_det.exp(), ln_det })
}

/// Asymptotic tail value `constant · ε^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub n: usize,
    pub beta: f64,
    #[serde(rename = "eps")]
    pub epsilon: f64,
    pub side: Side,
    pub variant: Variant,
    #[serde(rename = "K")]
    pub k: f64,
    pub h: f64,
    pub det: f64,
    pub constant: f64,
    pub exponent: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Prediction {
    /// The same prediction at another `ε`.
    pub fn at(&self, epsilon: f64) -> Prediction {
        Prediction { epsilon, value: self.constant * epsilon.powf(self.exponent), ..self.clone() }
    }
}

fn profile_at_ones(model: &DensityModel, n: usize, negative: bool, variant: ProfileVariant) -> Result<f64> {
    h_profile(model, &RadialProfileQuery::at_ones(n, negative, variant))
}

/// Leading-order tail prediction for `model`.
pub fn predict_tail(model: &DensityModel, query: &TailQuery, variant: Variant) -> Result<Prediction> {
    if model.n() != query.n {
        return Err(Error::DimensionMismatch { expected: query.n, got: model.n() });
    }
    let n = query.n;
    let (right, left) = match variant {
        Variant::Paper => (
            (ProfileVariant::Paper, false),
            (ProfileVariant::Paper, true),
        ),
        Variant::Corrected => (
            (ProfileVariant::Weighted, false),
            (ProfileVariant::WeightedMirror, false),
        ),
    };
    let h = match query.side {
        Side::Right => profile_at_ones(model, n, right.1, right.0)?,
        Side::Left => profile_at_ones(model, n, left.1, left.0)?,
        Side::TwoSided => {
            profile_at_ones(model, n, right.1, right.0)? + profile_at_ones(model, n, left.1, left.0)?
        }
    };
    if !(h > 0.0) {
        return Err(Error::Degenerate(format!(
            "radial profile is {h} at the maximiser; the leading term vanishes"
        )));
    }
    let k = k_constant(n, query.beta, variant)?;
    let exponent = (n - 1) as f64 / 2.0;
    let constant = k.value * h;
    let mut warnings = Vec::new();
    if query.epsilon > 0.5 {
        warnings.push(format!("epsilon = {} > 0.5; asymptotic regime questionable", query.epsilon));
    }
    Ok(Prediction {
        n,
        beta: query.beta,
        epsilon: query.epsilon,
        side: query.side,
        variant,
        k: k.value,
        h,
        det: k.det,
        constant,
        exponent,
        value: constant * query.epsilon.powf(exponent),
        warnings,
    })
}

/// Tail for an integrand vanishing like `[(A(v-1), (v-1))]^{γ/2}` at the maximiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaVariantQuery {
    pub n: usize,
    pub gamma: f64,
    pub epsilon: f64,
}

impl GammaVariantQuery {
    pub fn new(n: usize, gamma: f64, epsilon: f64) -> Result<Self> {
        if n < 2 {
            return invalid(format!("n must be ≥ 2 (got {n})"));
        }
        if !(gamma > 1.0 - n as f64) {
            return invalid(format!("gamma must exceed 1 - n = {} (got {gamma})", 1.0 - n as f64));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("epsilon must lie in (0, 1) (got {epsilon})"));
        }
        Ok(Self { n, gamma, epsilon })
    }
}

/// Evaluates `2^{-(n-3)/2} (det A)^{-1/2} π^{(n-1)/2} / Γ((n-1)/2) · ε^{(n+γ-1)/2} / (n+γ-1)`
/// with the printed determinant.
pub fn predict_gamma_variant(query: &GammaVariantQuery) -> Result<Prediction> {
    let n = query.n;
    let nf = n as f64;
    let spec = AntiHessianSpec::<f64>::classical(n)?;
    let ln_det = spec.ln_paper_det_in(EntryForm::Classical)?;
    let shifted = nf + query.gamma - 1.0;
    let ln_c = -(nf - 3.0) / 2.0 * std::f64::consts::LN_2 - 0.5 * ln_det
        + (nf - 1.0) / 2.0 * std::f64::consts::PI.ln()
        - ln_gamma((nf - 1.0) / 2.0)
        - shifted.ln();
    let constant = ln_c.exp();
    let exponent = shifted / 2.0;
    Ok(Prediction {
        n,
        beta: 2.0,
        epsilon: query.epsilon,
        side: Side::Right,
        variant: Variant::Paper,
        k: constant,
        h: 1.0,
        det: ln_det.exp(),
        constant,
        exponent,
        value: constant * query.epsilon.powf(exponent),
        warnings: Vec::new(),
    })
}

/// `(n, log_n K_β(n) / n)` for the printed constant, evaluated in the log domain.
pub fn log_growth_check(beta: f64, n_values: &[usize]) -> Result<Vec<(usize, f64)>> {
    n_values
        .iter()
        .map(|&n| {
            let k = k_constant(n, beta, Variant::Paper)?;
            let nf = n as f64;
            Ok((n, k.ln_value / nf.ln() / nf))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `exp(-B²/2)`.
    Jing,
    /// `exp(-B² n^{2/β - 1} / 2)`, for β ∈ (1, 2].
    Fan,
    /// 0 at or beyond the maximal value `n^{1-1/β}`, 1 below it.
    HolderCutoff,
}

/// Literature reference bounds on `P(T_β(n) > B)`.
pub fn reference_bound(kind: BoundKind, b: f64, n: usize, beta: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return invalid(format!("threshold B must be positive (got {b})"));
    }
    if n < 1 {
        return invalid("n must be positive");
    }
    match kind {
        BoundKind::Jing => Ok((-0.5 * b * b).exp()),
        BoundKind::Fan => {
            if !(beta > 1.0 && beta <= 2.0) {
                return invalid(format!("the Fan bound needs beta in (1, 2] (got {beta})"));
            }
            Ok((-0.5 * b * b * (n as f64).powf(2.0 / beta - 1.0)).exp())
        }
        BoundKind::HolderCutoff => {
            if !(beta > 1.0) {
                return invalid(format!("beta must be > 1 (got {beta})"));
            }
            // √n is not exactly representable; compare with a relative guard.
            let max = criterion_max(n, beta);
            Ok(if b >= max * (1.0 - 4.0 * f64::EPSILON) { 0.0 } else { 1.0 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn k_examples() {
        let k = k_constant(2, 2.0f64, Variant::Paper).unwrap();
        assert!(rel(k.value, 2f64.powf(1.25)) < 1e-13);
        let k = k_constant(2, 2.0f64, Variant::Corrected).unwrap();
        assert!(rel(k.value, 2f64.powf(2.25)) < 1e-13);
        let k = k_constant(3, 2.0f64, Variant::Corrected).unwrap();
        assert!(rel(k.value, 6.0 * PI) < 1e-13);
    }

    #[test]
    fn k_continuity_at_beta_two() {
        for n in 2..=10 {
            for v in [Variant::Paper, Variant::Corrected] {
                let classical = k_constant_in(n, 2.0f64, v, EntryForm::Classical).unwrap();
                let beta = k_constant_in(n, 2.0f64, v, EntryForm::Beta).unwrap();
                assert!(rel(classical.value, beta.value) < 1e-12, "n={n} {v:?}");
            }
        }
    }

    #[test]
    fn k_rejects_invalid() {
        assert!(k_constant(1, 2.0f64, Variant::Paper).is_err());
        assert!(k_constant(3, 1.0f64, Variant::Corrected).is_err());
    }

    #[test]
    fn k_large_n_is_finite() {
        let k = k_constant(5000, 3.0f64, Variant::Paper).unwrap();
        assert!(k.ln_value.is_finite() && k.ln_value < 0.0);
    }

    #[test]
    fn predict_examples_n2() {
        let m = DensityModel::standard_normal(2).unwrap();
        let q = TailQuery::right(2, 0.01).unwrap();
        let c = predict_tail(&m, &q, Variant::Corrected).unwrap();
        assert!(rel(c.constant, 2f64.powf(0.25) / PI) < 1e-10);
        assert!((c.value - 0.037854).abs() < 1e-6);
        let p = predict_tail(&m, &q, Variant::Paper).unwrap();
        assert!((p.value - 0.067094).abs() < 1e-6);
        assert!(rel(p.constant / c.constant, PI.sqrt()) < 1e-10);
    }

    #[test]
    fn predict_example_n3() {
        let m = DensityModel::standard_normal(3).unwrap();
        let q = TailQuery::right(3, 0.2).unwrap();
        let c = predict_tail(&m, &q, Variant::Corrected).unwrap();
        assert!(rel(c.constant, 1.0 / (2.0 * 3f64.sqrt())) < 1e-10);
        assert_eq!(c.exponent, 1.0);
    }

    #[test]
    fn two_sided_is_sum_of_sides() {
        let m = DensityModel::standard_normal(3).unwrap();
        for v in [Variant::Paper, Variant::Corrected] {
            let r = predict_tail(&m, &TailQuery::new(3, 0.1, 2.0, Side::Right).unwrap(), v).unwrap();
            let l = predict_tail(&m, &TailQuery::new(3, 0.1, 2.0, Side::Left).unwrap(), v).unwrap();
            let t = predict_tail(&m, &TailQuery::new(3, 0.1, 2.0, Side::TwoSided).unwrap(), v).unwrap();
            assert!(rel(t.value, r.value + l.value) < 1e-15);
            assert!(rel(t.value, 2.0 * r.value) < 1e-15);
        }
    }

    #[test]
    fn asymmetric_model_sides_differ() {
        let m = DensityModel::iid(crate::density::IidFamily::Normal { mean: 0.5, sd: 1.0 }, 2).unwrap();
        let r = predict_tail(&m, &TailQuery::new(2, 0.1, 2.0, Side::Right).unwrap(), Variant::Corrected).unwrap();
        let l = predict_tail(&m, &TailQuery::new(2, 0.1, 2.0, Side::Left).unwrap(), Variant::Corrected).unwrap();
        assert!(r.value > l.value);
    }

    #[test]
    fn query_validation() {
        assert!(TailQuery::new(1, 0.1, 2.0, Side::Right).is_err());
        assert!(TailQuery::new(3, 0.0, 2.0, Side::Right).is_err());
        assert!(TailQuery::new(3, 1.0, 2.0, Side::Right).is_err());
        assert!(TailQuery::new(3, 0.1, 3.0, Side::Left).is_err());
        assert!(TailQuery::new(3, 0.1, 3.0, Side::Right).is_ok());
        assert!((TailQuery::right(4, 0.25).unwrap().threshold() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn degenerate_profile_signalled() {
        // density vanishing on the diagonal ray
        let m = DensityModel::iid(crate::density::IidFamily::FoldedNormal { shift: 1.0 }, 2).unwrap();
        let q = TailQuery::new(2, 0.1, 2.0, Side::Left).unwrap();
        assert!(matches!(predict_tail(&m, &q, Variant::Corrected), Err(Error::Degenerate(_))));
    }

    #[test]
    fn large_epsilon_warns() {
        let m = DensityModel::standard_normal(3).unwrap();
        let p = predict_tail(&m, &TailQuery::right(3, 0.7).unwrap(), Variant::Corrected).unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn gamma_variant_reduces_at_zero() {
        let q = GammaVariantQuery::new(3, 0.0, 0.05).unwrap();
        let p = predict_gamma_variant(&q).unwrap();
        let k = k_constant(3, 2.0f64, Variant::Paper).unwrap();
        assert!(rel(p.constant, k.value) < 1e-12);
        assert_eq!(p.exponent, 1.0);
        let q = GammaVariantQuery::new(2, 1.0, 0.04).unwrap();
        let p = predict_gamma_variant(&q).unwrap();
        assert_eq!(p.exponent, 1.0);
        assert!(rel(p.at(0.08).value / p.value, 2.0) < 1e-14);
        assert!(GammaVariantQuery::new(4, -3.1, 0.1).is_err());
    }

    #[test]
    fn growth_check_signs() {
        // K exceeds 1 at n = 10; the ratio only turns negative for larger n
        let r = log_growth_check(2.0, &[10, 100, 2000]).unwrap();
        assert!((r[0].1 - 0.129846).abs() < 1e-5, "{}", r[0].1);
        assert!(r[1].1 < 0.0 && r[2].1 < r[1].1);
    }

    #[test]
    fn reference_bounds() {
        assert!((reference_bound(BoundKind::Jing, 2.0, 4, 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(
            reference_bound(BoundKind::Fan, 2.0, 4, 2.0).unwrap(),
            reference_bound(BoundKind::Jing, 2.0, 4, 2.0).unwrap()
        );
        for n in 2..20 {
            let b = (n as f64).sqrt();
            assert_eq!(reference_bound(BoundKind::HolderCutoff, b, n, 2.0).unwrap(), 0.0);
            assert_eq!(reference_bound(BoundKind::HolderCutoff, b - 0.01, n, 2.0).unwrap(), 1.0);
        }
        assert!(reference_bound(BoundKind::Fan, 1.0, 4, 2.5).is_err());
        assert!(reference_bound(BoundKind::Jing, -1.0, 4, 2.0).is_err());
    }
}
