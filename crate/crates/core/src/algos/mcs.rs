use super::{require_unit_lower, Ops};
use crate::algos::Inversion;
use crate::error::Result;
use crate::fpsim::PrecisionPolicy;
use crate::matrix::TriMatrix;

/// Column sweep written as `A⁻¹ = M_0 M_1 ⋯ M_{n-2}`, where `M_k` is the
/// identity with column `k` below the diagonal replaced by `-A[k+1.., k]`.
/// The product is accumulated from the right: `X ← X M_k` for
/// `k = n-2, …, 0`.
pub fn mcs_invert(a: &TriMatrix, policy: PrecisionPolicy) -> Result<Inversion> {
    require_unit_lower(a)?;
    let n = a.n();
    let mut ops = Ops::new(policy);
    let mut x = TriMatrix::identity(n);
    for k in (0..n.saturating_sub(1)).rev() {
        let mut m = TriMatrix::identity(n).into_vec();
        for i in k + 1..n {
            m[i * n + k] = -a.get(i, k);
        }
        x = ops.mm(&x, &TriMatrix::from_raw(n, m));
        ops.trace.steps += 1;
    }
    Ok(ops.finish(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allones_three() {
        let a = TriMatrix::from_rows(&[[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0]]).unwrap();
        let x = mcs_invert(&a, PrecisionPolicy::exact()).unwrap();
        assert_eq!(
            x.matrix.to_rows(),
            vec![vec![1.0, 0.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, -1.0, 1.0]]
        );
        assert_eq!(x.trace.matmuls, 2);
    }

    #[test]
    fn inverse_of_minus_ones() {
        // I - (all-ones strict lower): inverse has 2^{i-j-1} below the diagonal
        let a = TriMatrix::from_rows(&[[1.0, 0.0, 0.0], [-1.0, 1.0, 0.0], [-1.0, -1.0, 1.0]]).unwrap();
        let x = mcs_invert(&a, PrecisionPolicy::exact()).unwrap();
        assert_eq!(
            x.matrix.to_rows(),
            vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![2.0, 1.0, 1.0]]
        );
    }

    #[test]
    fn one_by_one() {
        let x = mcs_invert(&TriMatrix::identity(1), PrecisionPolicy::exact()).unwrap();
        assert_eq!(x.matrix.to_rows(), vec![vec![1.0]]);
        assert_eq!(x.trace.matmuls, 0);
    }
}
