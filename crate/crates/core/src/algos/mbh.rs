use super::{log2_exact, require_unit_lower, strict_part, Ops};
use crate::algos::Inversion;
use crate::error::{Error, Result};
use crate::fpsim::PrecisionPolicy;
use crate::matrix::{diag_blocks, BlockSpec, Parity, TriMatrix};

/// Unrolled block recursion. Starting from block size `b0`, each pass merges
/// pairs of inverted diagonal blocks:
/// `X ← D_e + D_o - (D_o L) D_e`, where `D_e`/`D_o` keep the even/odd
/// `b x b` diagonal blocks of `X`.
///
/// `x0` must already hold the inverses of the `b0 x b0` diagonal blocks of
/// `a`. Without it `b0` must be 1 and the iteration starts from `I`.
pub fn mbh_invert(
    a: &TriMatrix,
    x0: Option<&TriMatrix>,
    b0: usize,
    policy: PrecisionPolicy,
) -> Result<Inversion> {
    require_unit_lower(a)?;
    let mut ops = Ops::new(policy);
    let x = mbh_core(&strict_part(a), x0, b0, &mut ops)?;
    Ok(ops.finish(x))
}

pub(super) fn mbh_core(
    l: &TriMatrix,
    x0: Option<&TriMatrix>,
    b0: usize,
    ops: &mut Ops,
) -> Result<TriMatrix> {
    let n = l.n();
    if b0 == 0 || n % b0 != 0 {
        return Err(Error::InvalidParameter(format!("block size {b0} does not divide n = {n}")));
    }
    log2_exact(n / b0)?;
    let mut x = match x0 {
        Some(x0) => {
            l.check_same_shape(x0)?;
            x0.clone()
        }
        None if b0 == 1 => TriMatrix::identity(n),
        None => {
            return Err(Error::InvalidParameter(format!(
                "MBH from b0 = {b0} needs the inverted diagonal blocks"
            )))
        }
    };
    let mut b = b0;
    while b < n {
        let spec = BlockSpec::new(b)?;
        let de = diag_blocks(&x, spec, Parity::Even)?;
        let dol = {
            let d_o = diag_blocks(&x, spec, Parity::Odd)?;
            let t = ops.mm(&d_o, l);
            x = de.zip_map(&d_o, |p, q| p + q)?;
            t
        };
        let corr = ops.mm(&dol, &de);
        x = ops.sub(&x, &corr);
        ops.trace.steps += 1;
        b *= 2;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpsim::FloatFormat;
    use crate::gen::gen_deltanet;
    use crate::harness::verify::recursive_block_inverse;
    use crate::metrics::reference_inverse;

    #[test]
    fn base_case_two() {
        let a = TriMatrix::from_rows(&[[1.0, 0.0], [0.25, 1.0]]).unwrap();
        let x = mbh_invert(&a, None, 1, PrecisionPolicy::exact()).unwrap();
        assert_eq!(x.matrix.to_rows(), vec![vec![1.0, 0.0], vec![-0.25, 1.0]]);
        assert_eq!(x.trace.matmuls, 2);
    }

    #[test]
    fn matches_recursive_oracle() {
        for fmt in [FloatFormat::FP64, FloatFormat::FP32, FloatFormat::FP16] {
            let policy = PrecisionPolicy::for_input(fmt);
            for n in [2, 4, 8, 16, 32, 64] {
                let a = crate::fpsim::quantize(&gen_deltanet(n, n, 5).unwrap(), fmt);
                let x = mbh_invert(&a, None, 1, policy).unwrap().matrix;
                let r = recursive_block_inverse(&a, policy).unwrap();
                let t = reference_inverse(&a).unwrap();
                let diff = x.zip_map(&r, |p, q| (p - q).abs()).unwrap().max_abs();
                let tol = 10.0 * fmt.unit_roundoff() * t.max_abs() * n as f64;
                assert!(diff <= tol, "{fmt} n={n} diff={diff}");
            }
        }
    }

    #[test]
    fn exact_in_float64() {
        let a = gen_deltanet(128, 128, 2).unwrap();
        let x = mbh_invert(&a, None, 1, PrecisionPolicy::exact()).unwrap();
        let t = reference_inverse(&a).unwrap();
        let err = x.matrix.zip_map(&t, |p, q| p - q).unwrap().frobenius() / t.frobenius();
        assert!(err < 1e-12, "{err}");
        assert_eq!(x.trace.matmuls, 14);
    }

    #[test]
    fn seeded_start_needs_blocks() {
        let a = TriMatrix::identity(8);
        assert!(mbh_invert(&a, None, 2, PrecisionPolicy::exact()).is_err());
        assert!(mbh_invert(&a, None, 3, PrecisionPolicy::exact()).is_err());
    }
}
