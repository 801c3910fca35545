//! Tail asymptotics, non-asymptotic bounds and exact oracles for
//! self-normalized sums `T(n) = Σ ξ(i) / (Σ |ξ(i)|^β)^{1/β}`.
//!
//! The linear-algebra, special-function and quadrature layers are generic over
//! [`Scalar`] (`f32` or `f64`); the aliases below fix the scalar for common use.
//! Density-dependent code works in `f64`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod asymptotics;
pub mod bounds;
pub mod density;
pub mod error;
pub mod montecarlo;
pub mod oracles;
pub mod quadrature;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use asymptotics::{predict_tail, Prediction, Side, TailQuery, Variant};
pub use bounds::{curvature_functionals, envelope_bounds, validate_sandwich, BoundsCertificate, Curvature};
pub use density::{DensityModel, IidFamily, ProfileVariant};
pub use montecarlo::{estimate_tail, MCEstimate, SampleSource, SamplerSpec, StatisticKind, StatisticSpec};
pub use oracles::{OracleResult, RegionIntegrand};

pub type DenseMatrix64 = analytic::DenseMatrix<f64>;
pub type DenseMatrix32 = analytic::DenseMatrix<f32>;
pub type StructuredMatrix64 = analytic::StructuredMatrix<f64>;
pub type StructuredMatrix32 = analytic::StructuredMatrix<f32>;
pub type AntiHessianSpec64 = analytic::AntiHessianSpec<f64>;
pub type AntiHessianSpec32 = analytic::AntiHessianSpec<f32>;
pub type CriterionPoint64 = analytic::CriterionPoint<f64>;
pub type CriterionPoint32 = analytic::CriterionPoint<f32>;
pub type KConstant64 = asymptotics::KConstant<f64>;
pub type KConstant32 = asymptotics::KConstant<f32>;
pub type QuadOptions64 = quadrature::QuadOptions<f64>;
pub type Integral64 = quadrature::Integral<f64>;
