//! Float64 reference inverse, forward errors and conditioning.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{Kind, TriMatrix};

/// Forward substitution in float64 against each unit column.
pub fn reference_inverse(a: &TriMatrix) -> Result<TriMatrix> {
    if !a.satisfies(Kind::UnitLower) {
        return Err(Error::Structure("reference inverse needs unit lower triangular input".into()));
    }
    let n = a.n();
    let mut x = TriMatrix::identity(n).into_vec();
    for i in 1..n {
        let (done, rest) = x.split_at_mut(i * n);
        let row = &mut rest[..n];
        for k in 0..i {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            for (dst, &v) in row[..=k].iter_mut().zip(&done[k * n..k * n + k + 1]) {
                *dst -= aik * v;
            }
        }
    }
    Ok(TriMatrix::from_raw(n, x))
}

/// Forward errors of an approximate inverse against the float64 truth.
///
/// Any non-finite entry in the approximation sets every error field to NaN
/// and is counted in `nonfinite`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub max_abs: f64,
    /// Largest `|x - t| / |t|` over the lower triangle, skipping `|t| < 1e-300`.
    pub max_rel: f64,
    pub frob_rel: f64,
    /// `||I - X A||_F`, NaN when no input was supplied.
    pub residual: f64,
    pub nonfinite: usize,
}

impl ErrorReport {
    pub fn is_finite(&self) -> bool {
        self.nonfinite == 0
    }
}

pub fn error_report(truth: &TriMatrix, approx: &TriMatrix, input: Option<&TriMatrix>) -> Result<ErrorReport> {
    truth.check_same_shape(approx)?;
    let nonfinite = approx.as_slice().iter().filter(|v| !v.is_finite()).count();
    let residual = match input {
        Some(a) => approx.residual_frob(a)?,
        None => f64::NAN,
    };
    if nonfinite > 0 {
        return Ok(ErrorReport { max_abs: f64::NAN, max_rel: f64::NAN, frob_rel: f64::NAN, residual, nonfinite });
    }
    let n = truth.n();
    let (mut max_abs, mut max_rel, mut diff2) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let (t, x) = (truth.get(i, j), approx.get(i, j));
            let d = (x - t).abs();
            max_abs = max_abs.max(d);
            diff2 += d * d;
            if j <= i && t.abs() >= 1e-300 {
                max_rel = max_rel.max(d / t.abs());
            }
        }
    }
    let frob_rel = diff2.sqrt() / truth.frobenius();
    Ok(ErrorReport { max_abs, max_rel, frob_rel, residual, nonfinite })
}

fn to_nalgebra(m: &TriMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.n(), m.n(), m.as_slice())
}

/// 2-norm condition number from singular values.
pub fn condition_number(a: &TriMatrix) -> Result<f64> {
    let sv = to_nalgebra(a).singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin / smax < a.n() as f64 * f64::EPSILON {
        return Err(Error::Singular(smin / smax));
    }
    Ok(smax / smin)
}

/// True when every entry of `inv` lies in `[-1 - tol, 1 + tol]`.
pub fn inverse_entry_bound_check(inv: &TriMatrix, tol: f64) -> bool {
    inv.as_slice().iter().all(|v| v.abs() <= 1.0 + tol)
}

/// Median over finite values, NaN if there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_allones_worstcase, gen_deltanet};
    use proptest::prelude::*;

    #[test]
    fn reference_of_allones() {
        let a = gen_allones_worstcase(4, 1.0).unwrap();
        let x = reference_inverse(&a).unwrap();
        let expect = [[1., 0., 0., 0.], [-1., 1., 0., 0.], [0., -1., 1., 0.], [0., 0., -1., 1.]];
        assert_eq!(x.to_rows(), expect.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    }

    #[test]
    fn report_zero_for_truth() {
        let a = gen_deltanet(16, 16, 1).unwrap();
        let t = reference_inverse(&a).unwrap();
        let r = error_report(&t, &t, Some(&a)).unwrap();
        assert_eq!((r.max_abs, r.max_rel, r.frob_rel, r.nonfinite), (0.0, 0.0, 0.0, 0));
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn nonfinite_poisons_errors() {
        let t = TriMatrix::identity(2);
        let x = TriMatrix::from_rows(&[[1.0, 0.0], [f64::INFINITY, 1.0]]).unwrap();
        let r = error_report(&t, &x, None).unwrap();
        assert_eq!(r.nonfinite, 1);
        assert!(r.max_abs.is_nan() && r.frob_rel.is_nan() && r.max_rel.is_nan());
    }

    #[test]
    fn known_relative_errors() {
        let t = TriMatrix::from_rows(&[[1.0, 0.0], [-2.0, 1.0]]).unwrap();
        let x = TriMatrix::from_rows(&[[1.0, 0.0], [-2.5, 1.0]]).unwrap();
        let r = error_report(&t, &x, None).unwrap();
        assert_eq!(r.max_abs, 0.5);
        assert_eq!(r.max_rel, 0.25);
        assert!((r.frob_rel - 0.5 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn condition_of_identity_and_singular() {
        assert!((condition_number(&TriMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-12);
        let s = TriMatrix::new(2, vec![1.0, 0.0, 1.0, 0.0], Kind::General).unwrap();
        assert!(matches!(condition_number(&s), Err(Error::Singular(_))));
    }

    #[test]
    fn median_basics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, f64::NAN, 2.0, 3.0]), 2.5);
        assert!(median(&[f64::NAN]).is_nan());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn deltanet_conditioning_and_entries(n in 2usize..48, seed in 0u64..1000) {
            let a = gen_deltanet(n, n, seed).unwrap();
            let kappa = condition_number(&a).unwrap();
            prop_assert!(kappa <= (n * n) as f64 * (1.0 + 1e-9));
            let x = reference_inverse(&a).unwrap();
            prop_assert!(inverse_entry_bound_check(&x, 1e-9));
            let r = x.residual_frob(&a).unwrap();
            prop_assert!(r < 1e-10);
        }
    }
}
