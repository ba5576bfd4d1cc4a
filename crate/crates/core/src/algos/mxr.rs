use super::ir::ir_core;
use super::mbh::mbh_core;
use super::mch::mch_core;
use super::{require_unit_lower, strict_part, Ops};
use crate::algos::Inversion;
use crate::error::{Error, Result};
use crate::fpsim::PrecisionPolicy;
use crate::matrix::{diag_blocks, BlockSpec, Parity, TriMatrix};

/// Mixed scheme: MCH inverts all `b0 x b0` diagonal blocks in one batched
/// pass, `r` refinement steps polish them against the block diagonal of
/// `A`, and MBH merges them up to full size.
///
/// With `b0 = n` this is MCH (plus refinement).
pub fn mxr_invert(a: &TriMatrix, b0: usize, r: usize, policy: PrecisionPolicy) -> Result<Inversion> {
    require_unit_lower(a)?;
    let n = a.n();
    if b0 < 2 || !b0.is_power_of_two() || n % b0 != 0 {
        return Err(Error::InvalidParameter(format!(
            "MXR block size must be a power of two >= 2 dividing n = {n}, got {b0}"
        )));
    }
    let spec = BlockSpec::new(b0)?;
    let l = strict_part(a);
    let mut ops = Ops::new(policy);
    let mut y = mch_core(&diag_blocks(&l, spec, Parity::All)?, b0, &mut ops)?;
    if r > 0 {
        let ad = diag_blocks(a, spec, Parity::All)?;
        for _ in 0..r {
            y = ir_core(&y, &ad, &mut ops);
        }
    }
    let x = mbh_core(&l, Some(&y), b0, &mut ops)?;
    Ok(ops.finish(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algos::mch_invert;
    use crate::fpsim::{quantize, FloatFormat};
    use crate::gen::gen_deltanet;
    use crate::metrics::reference_inverse;

    #[test]
    fn full_block_is_mch() {
        for fmt in [FloatFormat::FP32, FloatFormat::FP16] {
            let a = quantize(&gen_deltanet(64, 64, 9).unwrap(), fmt);
            let p = PrecisionPolicy::for_input(fmt);
            let x = mxr_invert(&a, 64, 0, p).unwrap().matrix;
            let y = mch_invert(&a, p).unwrap().matrix;
            let same = x.as_slice().iter().zip(y.as_slice()).all(|(u, v)| u.to_bits() == v.to_bits());
            assert!(same);
        }
    }

    #[test]
    fn matmul_count() {
        let a = gen_deltanet(128, 128, 1).unwrap();
        for (b0, r) in [(2, 0), (16, 0), (16, 1), (32, 2)] {
            let x = mxr_invert(&a, b0, r, PrecisionPolicy::exact()).unwrap();
            let lg = |v: usize| v.trailing_zeros() as usize;
            assert_eq!(x.trace.matmuls, 2 * (lg(b0) - 1) + 2 * r + 2 * lg(128 / b0));
            let t = reference_inverse(&a).unwrap();
            let err = x.matrix.zip_map(&t, |p, q| p - q).unwrap().frobenius() / t.frobenius();
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn bad_block_sizes() {
        let a = TriMatrix::identity(16);
        for b0 in [0, 1, 3, 32] {
            assert!(mxr_invert(&a, b0, 0, PrecisionPolicy::exact()).is_err(), "b0={b0}");
        }
    }
}
