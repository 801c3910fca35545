//! Two-parameter structured matrices, the criterion functions `g` and
//! `g_β`, their anti-Hessians at the maximiser `v = 1`, and determinants.
//!
//! The criterion for the β-norming statistic is
//!
//! ```text
//! g_β(v) = (1 + Σ v_j) / (1 + Σ |v_j|^β)^{1/β},   v ∈ R^{n-1}
//! ```
//!
//! maximised at `v = 1` with value `n^{1 - 1/β}`. The classical case is β = 2.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Largest dense matrix this module will materialise.
pub const MAX_DENSE: usize = 64;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(size: usize) -> Self {
        Self { size, data: vec![T::zero(); size * size] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.data[i * size + i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let size = rows.len();
        let mut data = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::DimensionMismatch { expected: size, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { size, data })
    }

    pub fn from_row_major(size: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::DimensionMismatch { expected: size * size, got: data.len() });
        }
        Ok(Self { size, data })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.size + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn negated(&self) -> Self {
        Self { size: self.size, data: self.data.iter().map(|&x| -x).collect() }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.size)
            .map(|i| {
                self.data[i * self.size..(i + 1) * self.size]
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |s, (&a, &b)| s + a * b)
            })
            .collect()
    }
}

/// The `m × m` symmetric matrix with `a` on the diagonal and `b` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredMatrix<T> {
    pub m: usize,
    pub a: T,
    pub b: T,
}

impl<T: Scalar> StructuredMatrix<T> {
    pub fn new(m: usize, a: T, b: T) -> Result<Self> {
        if m == 0 {
            return invalid("structured matrix size must be at least 1");
        }
        Ok(Self { m, a, b })
    }

    /// Eigenvalues `(a - b, a + (m - 1) b)`; the first has multiplicity `m - 1`.
    pub fn eigenvalues(&self) -> (T, T) {
        (self.a - self.b, self.a + T::count(self.m - 1) * self.b)
    }

    /// Smallest and largest eigenvalue.
    pub fn eigen_range(&self) -> (T, T) {
        let (e1, e2) = self.eigenvalues();
        if self.m == 1 {
            (e2, e2)
        } else {
            (e1.min(e2), e1.max(e2))
        }
    }

    /// Matrix-vector product without materialising the matrix.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let total = x.iter().fold(T::zero(), |s, &v| s + v);
        x.iter().map(|&xi| (self.a - self.b) * xi + self.b * total).collect()
    }

    pub fn to_dense(&self) -> Result<DenseMatrix<T>> {
        if self.m > MAX_DENSE {
            return invalid(format!(
                "refusing to materialise a {0}x{0} matrix (limit {MAX_DENSE})",
                self.m
            ));
        }
        let mut d = DenseMatrix::zeros(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                d.set(i, j, if i == j { self.a } else { self.b });
            }
        }
        Ok(d)
    }
}

/// Determinant of the structured matrix as the product of its eigenvalues,
/// `(a - b)^{m-1} (a + (m - 1) b)`.
pub fn det_eigen_closed<T: Scalar>(m: usize, a: T, b: T) -> T {
    let (e1, e2) = (a - b, a + T::count(m.saturating_sub(1)) * b);
    e1.powi((m.saturating_sub(1)) as i32) * e2
}

/// Determinant by LU factorisation with partial pivoting.
pub fn det_numeric<T: Scalar>(matrix: &DenseMatrix<T>) -> Result<T> {
    if matrix.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix entries".into()));
    }
    let n = matrix.size();
    let mut lu = matrix.as_slice().to_vec();
    let mut det = T::one();
    for k in 0..n {
        let (piv, piv_abs) = (k..n)
            .map(|i| (i, lu[i * n + k].abs()))
            .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs == T::zero() {
            return Ok(T::zero());
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let p = lu[k * n + k];
        det = det * p;
        for i in (k + 1)..n {
            let factor = lu[i * n + k] / p;
            if factor == T::zero() {
                continue;
            }
            for j in (k + 1)..n {
                lu[i * n + j] = lu[i * n + j] - factor * lu[k * n + j];
            }
        }
    }
    Ok(det)
}

/// Which printed entry formulas to use for the anti-Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryForm {
    /// `a(j,j) = n^{-1/2} - n^{-3/2}`, `a(j,k) = -n^{-3/2}`; β must be 2.
    Classical,
    /// `(β - 1)[n^{-1/β} - n^{-1-1/β}]` and `-(β - 1) n^{-1-1/β}`.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiHessianSpec<T> {
    pub n: usize,
    pub beta: T,
}

impl<T: Scalar> AntiHessianSpec<T> {
    pub fn new(n: usize, beta: T) -> Result<Self> {
        if n < 2 {
            return invalid(format!("n must be ≥ 2 (got {n})"));
        }
        if !(beta > T::one()) || !beta.is_finite() {
            return invalid(format!("beta must be > 1 (got {beta})"));
        }
        Ok(Self { n, beta })
    }

    pub fn classical(n: usize) -> Result<Self> {
        Self::new(n, T::lit(2.0))
    }

    pub fn is_classical(&self) -> bool {
        self.beta == T::lit(2.0)
    }

    /// The form used by default: classical entries at β = 2, β entries otherwise.
    pub fn default_form(&self) -> EntryForm {
        if self.is_classical() {
            EntryForm::Classical
        } else {
            EntryForm::Beta
        }
    }

    /// `(diagonal, off-diagonal)` entries of the anti-Hessian.
    pub fn entries_in(&self, form: EntryForm) -> Result<(T, T)> {
        let n = T::count(self.n);
        match form {
            EntryForm::Classical => {
                if !self.is_classical() {
                    return invalid("classical entry formulas require beta = 2");
                }
                let a = n.powf(T::lit(-0.5)) - n.powf(T::lit(-1.5));
                let b = -n.powf(T::lit(-1.5));
                Ok((a, b))
            }
            EntryForm::Beta => {
                let bm1 = self.beta - T::one();
                let inv = T::one() / self.beta;
                let a = bm1 * (n.powf(-inv) - n.powf(-T::one() - inv));
                let b = -bm1 * n.powf(-T::one() - inv);
                Ok((a, b))
            }
        }
    }

    pub fn structure_in(&self, form: EntryForm) -> Result<StructuredMatrix<T>> {
        let (a, b) = self.entries_in(form)?;
        StructuredMatrix::new(self.n - 1, a, b)
    }

    pub fn structure(&self) -> StructuredMatrix<T> {
        self.structure_in(self.default_form()).expect("default form is always valid")
    }

    /// The printed determinant formula: `n^{-(n-2)/2}(2n^{-1/2} - 3n^{-3/2})`
    /// in the classical form, `(β-1)^{n-1} n^{-(n-2)/β}[2n^{-1/β} - 3n^{-1-1/β}]`
    /// in the β form.
    pub fn paper_det_in(&self, form: EntryForm) -> Result<T> {
        Ok(self.ln_paper_det_in(form)?.exp())
    }

    pub fn ln_paper_det_in(&self, form: EntryForm) -> Result<T> {
        let n = T::count(self.n);
        let ln_n = n.ln();
        match form {
            EntryForm::Classical => {
                if !self.is_classical() {
                    return invalid("classical determinant formula requires beta = 2");
                }
                let tail = T::lit(2.0) * n.powf(T::lit(-0.5)) - T::lit(3.0) * n.powf(T::lit(-1.5));
                Ok(-(n - T::lit(2.0)) / T::lit(2.0) * ln_n + tail.ln())
            }
            EntryForm::Beta => {
                let inv = T::one() / self.beta;
                let tail = T::lit(2.0) * n.powf(-inv) - T::lit(3.0) * n.powf(-T::one() - inv);
                Ok((n - T::one()) * (self.beta - T::one()).ln() - (n - T::lit(2.0)) * inv * ln_n
                    + tail.ln())
            }
        }
    }

    /// Log of the eigenvalue-product determinant, valid for any `n`.
    pub fn ln_det_in(&self, form: EntryForm) -> Result<T> {
        let s = self.structure_in(form)?;
        let (e1, e2) = s.eigenvalues();
        Ok(T::count(s.m - 1) * e1.ln() + e2.ln())
    }
}

/// Anti-Hessian `A` (or `A_β`) materialised as an `(n-1) × (n-1)` matrix.
pub fn build_anti_hessian<T: Scalar>(spec: &AntiHessianSpec<T>) -> Result<DenseMatrix<T>> {
    spec.structure().to_dense()
}

/// The determinant exactly as printed (see [`AntiHessianSpec::paper_det_in`]).
pub fn det_anti_hessian_paper<T: Scalar>(spec: &AntiHessianSpec<T>) -> Result<T> {
    spec.paper_det_in(spec.default_form())
}

/// The eigenvalue-product determinant of the anti-Hessian.
pub fn det_anti_hessian<T: Scalar>(spec: &AntiHessianSpec<T>) -> T {
    let s = spec.structure();
    det_eigen_closed(s.m, s.a, s.b)
}

/// A point `v ∈ R^{n-1}` at which to evaluate `g_β`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionPoint<T> {
    pub v: Vec<T>,
    pub beta: T,
}

impl<T: Scalar> CriterionPoint<T> {
    pub fn new(v: Vec<T>, beta: T) -> Result<Self> {
        if v.is_empty() {
            return invalid("criterion point must have dimension n - 1 ≥ 1");
        }
        if !(beta > T::one()) {
            return invalid(format!("beta must be > 1 (got {beta})"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("criterion point".into()));
        }
        Ok(Self { v, beta })
    }

    /// The maximiser `v = 1` for dimension `n`.
    pub fn ones(n: usize, beta: T) -> Result<Self> {
        if n < 2 {
            return invalid(format!("n must be ≥ 2 (got {n})"));
        }
        Self::new(vec![T::one(); n - 1], beta)
    }

    pub fn n(&self) -> usize {
        self.v.len() + 1
    }
}

/// `g_β` without domain checks; uses `|v_j|^β` so it is defined on all of R^{n-1}.
#[inline]
pub fn criterion<T: Scalar>(v: &[T], beta: T) -> T {
    let one = T::one();
    let sum = v.iter().fold(one, |s, &x| s + x);
    if beta == T::lit(2.0) {
        sum / v.iter().fold(one, |s, &x| s + x * x).sqrt()
    } else {
        sum / v.iter().fold(one, |s, &x| s + x.abs().powf(beta)).powf(one / beta)
    }
}

/// Maximum of `g_β`, `n^{1 - 1/β}`.
pub fn criterion_max<T: Scalar>(n: usize, beta: T) -> T {
    T::count(n).powf(T::one() - T::one() / beta)
}

/// Evaluates `g_β` at the point. For β ≠ 2 the coordinates must be non-negative.
pub fn g_value<T: Scalar>(point: &CriterionPoint<T>) -> Result<T> {
    if point.beta != T::lit(2.0) && point.v.iter().any(|&x| x < T::zero()) {
        return invalid("g_beta is defined on the non-negative orthant for beta != 2");
    }
    Ok(criterion(&point.v, point.beta))
}

/// Central-difference Hessian of `g_β` with one Richardson extrapolation step.
///
/// The base step is `ε^{1/6} · max(1, |v_j|)`; combining steps `h` and `h/2`
/// cancels the `O(h²)` truncation term.
pub fn hessian_fd<T: Scalar>(point: &CriterionPoint<T>) -> Result<DenseMatrix<T>> {
    let d = point.v.len();
    let base = T::epsilon().powf(T::one() / T::lit(6.0));
    let steps: Vec<T> = point.v.iter().map(|x| base * x.abs().max(T::one())).collect();
    for (j, (&x, &h)) in point.v.iter().zip(&steps).enumerate() {
        let half = h * T::lit(0.5);
        if !(half > T::zero()) || x + half == x || x - half == x {
            return Err(Error::StepUnderflow(j));
        }
        if point.beta != T::lit(2.0) && x - h <= T::zero() {
            return invalid(format!(
                "coordinate {j} = {x} is within one step of the beta != 2 boundary"
            ));
        }
    }
    let coarse = central_hessian(&point.v, point.beta, &steps);
    let fine_steps: Vec<T> = steps.iter().map(|&h| h * T::lit(0.5)).collect();
    let fine = central_hessian(&point.v, point.beta, &fine_steps);
    let mut out = DenseMatrix::zeros(d);
    let four = T::lit(4.0);
    let three = T::lit(3.0);
    for i in 0..d {
        for j in 0..d {
            out.set(i, j, (four * fine.get(i, j) - coarse.get(i, j)) / three);
        }
    }
    Ok(out)
}

fn central_hessian<T: Scalar>(v: &[T], beta: T, steps: &[T]) -> DenseMatrix<T> {
    let d = v.len();
    let mut out = DenseMatrix::zeros(d);
    let mut work = v.to_vec();
    let f0 = criterion(v, beta);
    let eval = |work: &mut Vec<T>, shifts: &[(usize, T)]| {
        for &(k, s) in shifts {
            work[k] = v[k] + s;
        }
        let r = criterion(work, beta);
        for &(k, _) in shifts {
            work[k] = v[k];
        }
        r
    };
    for i in 0..d {
        let hi = steps[i];
        let fp = eval(&mut work, &[(i, hi)]);
        let fm = eval(&mut work, &[(i, -hi)]);
        out.set(i, i, (fp - T::lit(2.0) * f0 + fm) / (hi * hi));
        for (j, &hj) in steps.iter().enumerate().skip(i + 1) {
            let fpp = eval(&mut work, &[(i, hi), (j, hj)]);
            let fpm = eval(&mut work, &[(i, hi), (j, -hj)]);
            let fmp = eval(&mut work, &[(i, -hi), (j, hj)]);
            let fmm = eval(&mut work, &[(i, -hi), (j, -hj)]);
            let val = (fpp - fpm - fmp + fmm) / (T::lit(4.0) * hi * hj);
            out.set(i, j, val);
            out.set(j, i, val);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn closed_determinant_examples() {
        assert_eq!(det_eigen_closed(1, 5.0f64, 0.0), 5.0);
        assert_eq!(det_eigen_closed(2, 2.0f64, 1.0), 3.0);
        assert_eq!(det_eigen_closed(3, 1.0f64, 1.0), 0.0);
    }

    #[test]
    fn numeric_determinant_examples() {
        assert!((det_numeric(&DenseMatrix::<f64>::identity(4)).unwrap() - 1.0).abs() < 1e-15);
        let m = StructuredMatrix::new(2, 2.0f64, 1.0).unwrap().to_dense().unwrap();
        // cofactor expansion: 2·2 − 1·1
        assert!((det_numeric(&m).unwrap() - 3.0).abs() < 1e-14);
        let m = StructuredMatrix::new(3, 1.0f64, 1.0).unwrap().to_dense().unwrap();
        assert!(det_numeric(&m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn numeric_determinant_rejects_nan() {
        let mut m = DenseMatrix::<f64>::identity(3);
        m.set(1, 2, f64::NAN);
        assert!(matches!(det_numeric(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn numeric_determinant_general_matrix() {
        // det by cofactor expansion: 2(0·1 − 1·1) − 1(1·1 − 1·0) + 3(1·1 − 0·0) = −2 − 1 + 3
        let m = DenseMatrix::from_rows(&[
            vec![2.0f64, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        assert!(det_numeric(&m).unwrap().abs() < 1e-14);
        let m = DenseMatrix::from_rows(&[vec![0.0f64, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((det_numeric(&m).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn materialisation_cap() {
        assert!(StructuredMatrix::new(65, 1.0f64, 0.0).unwrap().to_dense().is_err());
        assert!(StructuredMatrix::new(0, 1.0f64, 0.0).is_err());
    }

    #[test]
    fn anti_hessian_examples() {
        let a = build_anti_hessian(&AntiHessianSpec::new(2, 2.0f64).unwrap()).unwrap();
        assert_eq!(a.size(), 1);
        assert!(rel(a.get(0, 0), 2f64.powf(-1.5)) < 1e-14);

        let a = build_anti_hessian(&AntiHessianSpec::new(3, 2.0f64).unwrap()).unwrap();
        assert!(rel(a.get(0, 0), 2.0 * 3f64.powf(-1.5)) < 1e-14);
        assert!(rel(a.get(0, 1), -(3f64.powf(-1.5))) < 1e-14);
        assert!((a.get(0, 0) - 0.384900).abs() < 1e-6);

        let a = build_anti_hessian(&AntiHessianSpec::new(2, 3.0f64).unwrap()).unwrap();
        let want = 2.0 * (2f64.powf(-1.0 / 3.0) - 2f64.powf(-4.0 / 3.0));
        assert!(rel(a.get(0, 0), want) < 1e-14);
        assert!((a.get(0, 0) - 0.793701).abs() < 1e-6);
    }

    #[test]
    fn anti_hessian_rejects_invalid() {
        assert!(AntiHessianSpec::new(1, 2.0f64).is_err());
        assert!(AntiHessianSpec::new(3, 1.0f64).is_err());
        assert!(AntiHessianSpec::new(3, 0.5f64).is_err());
    }

    #[test]
    fn paper_determinant_vs_numeric() {
        let s = AntiHessianSpec::new(2, 2.0f64).unwrap();
        assert!(rel(det_anti_hessian_paper(&s).unwrap(), 2f64.powf(-1.5)) < 1e-14);
        let s = AntiHessianSpec::new(3, 2.0f64).unwrap();
        assert!(rel(det_anti_hessian_paper(&s).unwrap(), 1.0 / 3.0) < 1e-14);
        let numeric = det_numeric(&build_anti_hessian(&s).unwrap()).unwrap();
        // (2·3^{-3/2})² − (3^{-3/2})² = 3·3^{-3} = 1/9
        assert!(rel(numeric, 1.0 / 9.0) < 1e-13);
        assert!(rel(det_anti_hessian(&s), 1.0 / 9.0) < 1e-13);
    }

    #[test]
    fn log_determinants_consistent() {
        for n in 2..30 {
            for &beta in &[1.5f64, 2.0, 3.0] {
                let s = AntiHessianSpec::new(n, beta).unwrap();
                let f = s.default_form();
                assert!(rel(s.ln_det_in(f).unwrap().exp(), det_anti_hessian(&s)) < 1e-12);
                assert!(rel(
                    s.paper_det_in(f).unwrap(),
                    s.ln_paper_det_in(f).unwrap().exp()
                ) < 1e-15);
            }
        }
    }

    #[test]
    fn classical_form_requires_beta_two() {
        let s = AntiHessianSpec::new(4, 3.0f64).unwrap();
        assert!(s.entries_in(EntryForm::Classical).is_err());
        assert!(s.paper_det_in(EntryForm::Classical).is_err());
    }

    #[test]
    fn g_examples() {
        let p = CriterionPoint::ones(3, 2.0f64).unwrap();
        assert!(rel(g_value(&p).unwrap(), 3f64.sqrt()) < 1e-15);
        let p = CriterionPoint::new(vec![0.0f64], 2.0).unwrap();
        assert_eq!(g_value(&p).unwrap(), 1.0);
        let p = CriterionPoint::ones(4, 3.0f64).unwrap();
        assert!(rel(g_value(&p).unwrap(), 4f64.powf(2.0 / 3.0)) < 1e-14);
        assert!((g_value(&p).unwrap() - 2.519842).abs() < 1e-6);
    }

    #[test]
    fn g_rejects_negative_for_non_classical() {
        let p = CriterionPoint::new(vec![-0.5f64, 1.0], 3.0).unwrap();
        assert!(g_value(&p).is_err());
        let p = CriterionPoint::new(vec![-0.5f64, 1.0], 2.0).unwrap();
        assert!(g_value(&p).is_ok());
        assert!(CriterionPoint::<f64>::new(vec![], 2.0).is_err());
    }

    #[test]
    fn hessian_fd_one_dimensional() {
        // Second derivative of v ↦ (1+v)/√(1+v²) at v = 1, by an independent
        // five-point stencil with a wide step.
        let f = |v: f64| (1.0 + v) / (1.0 + v * v).sqrt();
        let h = 1e-3;
        let oracle = (-f(1.0 + 2.0 * h) + 16.0 * f(1.0 + h) - 30.0 * f(1.0) + 16.0 * f(1.0 - h)
            - f(1.0 - 2.0 * h))
            / (12.0 * h * h);
        assert!((oracle + 2f64.powf(-1.5)).abs() < 1e-6);
        let p = CriterionPoint::ones(2, 2.0f64).unwrap();
        let hfd = hessian_fd(&p).unwrap();
        assert!((hfd.get(0, 0) - oracle).abs() < 1e-6);
        assert!((hfd.get(0, 0) + 2f64.powf(-1.5)).abs() < 1e-8);
    }

    #[test]
    fn hessian_fd_matches_anti_hessian_n3() {
        let p = CriterionPoint::ones(3, 2.0f64).unwrap();
        let neg = hessian_fd(&p).unwrap().negated();
        let a = build_anti_hessian(&AntiHessianSpec::new(3, 2.0f64).unwrap()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel(neg.get(i, j), a.get(i, j)) < 1e-5);
            }
        }
    }

    #[test]
    fn hessian_fd_beta_off_diagonal() {
        let p = CriterionPoint::ones(3, 1.5f64).unwrap();
        let neg = hessian_fd(&p).unwrap().negated();
        let want = -0.5 * 3f64.powf(-1.0 - 2.0 / 3.0);
        assert!(rel(neg.get(0, 1), want) < 1e-5, "{} vs {want}", neg.get(0, 1));
    }

    #[test]
    fn hessian_fd_boundary_rejected() {
        let p = CriterionPoint::new(vec![1e-5f64, 1.0], 3.0).unwrap();
        assert!(hessian_fd(&p).is_err());
    }

    #[test]
    fn hessian_fd_single_precision() {
        let p = CriterionPoint::ones(2, 2.0f32).unwrap();
        let h = hessian_fd(&p).unwrap();
        assert!((h.get(0, 0) + 2f32.powf(-1.5)).abs() < 1e-2);
    }

    #[test]
    fn structured_apply_matches_dense() {
        let s = StructuredMatrix::new(5, 1.3f64, -0.2).unwrap();
        let x = [0.1, -2.0, 3.0, 0.5, 1.0];
        let dense = s.to_dense().unwrap().mul_vec(&x);
        for (a, b) in s.apply(&x).iter().zip(&dense) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
