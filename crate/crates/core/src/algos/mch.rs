use super::{log2_exact, require_unit_lower, strict_part, Ops};
use crate::algos::Inversion;
use crate::error::{Error, Result};
use crate::fpsim::PrecisionPolicy;
use crate::matrix::TriMatrix;

/// Truncated Neumann series `Σ (-L)^k` evaluated by repeated squaring:
/// `X = I - L`, `Y = L`, then `log₂(n/2)` passes of `Y ← Y²`, `X ← X + X Y`.
///
/// `n` must be a power of two, at least 2.
pub fn mch_invert(a: &TriMatrix, policy: PrecisionPolicy) -> Result<Inversion> {
    require_unit_lower(a)?;
    let mut ops = Ops::new(policy);
    let x = mch_core(&strict_part(a), a.n(), &mut ops)?;
    Ok(ops.finish(x))
}

/// MCH on a strictly lower `l` whose nonzero pattern splits into diagonal
/// blocks of `size` (so `log₂(size/2)` passes suffice). With `size = n` this
/// is plain MCH; with block-diagonal `l` it inverts every block at once.
pub(super) fn mch_core(l: &TriMatrix, size: usize, ops: &mut Ops) -> Result<TriMatrix> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!("MCH needs n >= 2, got {size}")));
    }
    let passes = log2_exact(size)? - 1;
    let n = l.n();
    let mut x = TriMatrix::identity(n).zip_map(l, |i, v| i - v)?;
    let mut y = l.clone();
    for _ in 0..passes {
        y = ops.mm(&y, &y);
        ops.trace.iterate_max.push(y.max_abs());
        let xy = ops.mm(&x, &y);
        x = ops.add(&x, &xy);
        ops.trace.steps += 1;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpsim::FloatFormat;
    use crate::gen::{gen_allones_worstcase, gen_deltanet};
    use crate::metrics::reference_inverse;

    #[test]
    fn two_by_two_needs_no_products() {
        let a = TriMatrix::from_rows(&[[1.0, 0.0], [0.5, 1.0]]).unwrap();
        let x = mch_invert(&a, PrecisionPolicy::exact()).unwrap();
        assert_eq!(x.matrix.to_rows(), vec![vec![1.0, 0.0], vec![-0.5, 1.0]]);
        assert_eq!(x.trace.matmuls, 0);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let a = TriMatrix::identity(6);
        assert!(matches!(mch_invert(&a, PrecisionPolicy::exact()), Err(Error::NotPowerOfTwo(6))));
    }

    #[test]
    fn exact_in_float64_and_counts() {
        for n in [4, 8, 16, 32] {
            let a = gen_deltanet(n, n, 11).unwrap();
            let x = mch_invert(&a, PrecisionPolicy::exact()).unwrap();
            let t = reference_inverse(&a).unwrap();
            let err = x.matrix.zip_map(&t, |p, q| p - q).unwrap().frobenius() / t.frobenius();
            assert!(err < 1e-9, "n={n} err={err}");
            assert_eq!(x.trace.matmuls, 2 * (n.trailing_zeros() as usize - 1));
        }
    }

    #[test]
    fn allones_fp16_goes_nonfinite() {
        let a = gen_allones_worstcase(64, 1.0).unwrap();
        let x = mch_invert(&a, PrecisionPolicy::for_input(FloatFormat::FP16)).unwrap();
        assert!(!x.matrix.is_finite());
    }
}
