use super::{require_unit_lower, Inversion, InversionTrace};
use crate::error::Result;
use crate::fpsim::{round_to_format, PrecisionPolicy};
use crate::matrix::TriMatrix;

/// Forward substitution against every unit column at once.
///
/// Step `k` applies the rank-one update `X[k+1.., :] -= A[k+1.., k] X[k, :]`,
/// so the vector work shrinks from `n - 1` rows down to one. Each product
/// and difference is rounded to the storage format.
pub fn vcs_invert(a: &TriMatrix, policy: PrecisionPolicy) -> Result<Inversion> {
    require_unit_lower(a)?;
    let n = a.n();
    let fmt = policy.storage;
    let mut x = TriMatrix::identity(n).into_vec();
    for k in 0..n {
        let (head, tail) = x.split_at_mut((k + 1) * n);
        let xk = &head[k * n..k * n + k + 1];
        for i in k + 1..n {
            let aik = a.get(i, k);
            let row = &mut tail[(i - k - 1) * n..(i - k - 1) * n + k + 1];
            for (dst, &v) in row.iter_mut().zip(xk) {
                *dst = round_to_format(*dst - round_to_format(aik * v, fmt), fmt);
            }
        }
    }
    let trace = InversionTrace { steps: n, ..Default::default() };
    Ok(Inversion { matrix: TriMatrix::from_raw(n, x), trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpsim::FloatFormat;

    #[test]
    fn two_by_two() {
        let a = TriMatrix::from_rows(&[[1.0, 0.0], [3.0, 1.0]]).unwrap();
        let x = vcs_invert(&a, PrecisionPolicy::exact()).unwrap();
        assert_eq!(x.matrix.to_rows(), vec![vec![1.0, 0.0], vec![-3.0, 1.0]]);
        assert_eq!(x.trace.matmuls, 0);
    }

    #[test]
    fn allones_three() {
        let a = TriMatrix::from_rows(&[[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0]]).unwrap();
        let x = vcs_invert(&a, PrecisionPolicy::for_input(FloatFormat::FP16)).unwrap();
        assert_eq!(
            x.matrix.to_rows(),
            vec![vec![1.0, 0.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, -1.0, 1.0]]
        );
    }
}
