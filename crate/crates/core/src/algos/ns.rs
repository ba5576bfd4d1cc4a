use super::{require_unit_lower, InitialGuess, Ops};
use crate::algos::Inversion;
use crate::error::Result;
use crate::fpsim::{round_to_format, PrecisionPolicy};
use crate::matrix::TriMatrix;

/// Newton–Schulz: `Y = A X`, `X ← 2X - X Y`, repeated `m` times.
///
/// `trace.residuals[k]` is `||I - X_k A||_F` in float64 for `k = 0..=m`.
pub fn ns_invert(a: &TriMatrix, m: usize, x0: InitialGuess, policy: PrecisionPolicy) -> Result<Inversion> {
    require_unit_lower(a)?;
    let n = a.n();
    let c = round_to_format(x0.scale(n), policy.storage);
    let mut ops = Ops::new(policy);
    let mut x = TriMatrix::identity(n).map(|v| v * c);
    ops.trace.residuals.push(x.residual_frob(a)?);
    for _ in 0..m {
        let y = ops.mm(a, &x);
        let xy = ops.mm(&x, &y);
        let two_x = ops.add(&x, &x);
        x = ops.sub(&two_x, &xy);
        ops.trace.steps += 1;
        ops.trace.iterate_max.push(x.max_abs());
        ops.trace.residuals.push(x.residual_frob(a)?);
    }
    Ok(ops.finish(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_deltanet;

    #[test]
    fn zero_iterations_returns_guess() {
        let a = gen_deltanet(8, 8, 0).unwrap();
        let x = ns_invert(&a, 0, InitialGuess::Identity, PrecisionPolicy::exact()).unwrap();
        assert_eq!(x.matrix, TriMatrix::identity(8));
        assert_eq!(x.trace.matmuls, 0);
        assert_eq!(x.trace.residuals.len(), 1);
    }

    #[test]
    fn identity_start_squares_residual() {
        let a = gen_deltanet(16, 16, 4).unwrap();
        let x = ns_invert(&a, 4, InitialGuess::Identity, PrecisionPolicy::exact()).unwrap();
        // I - X_k A = (I - A)^{2^k}, nilpotent of index 16
        assert!(x.trace.residuals[4] < 1e-12, "{:?}", x.trace.residuals);
        assert_eq!(x.trace.matmuls, 8);
    }

    #[test]
    fn scaled_start_contracts() {
        let a = gen_deltanet(32, 32, 4).unwrap();
        let x = ns_invert(&a, 14, InitialGuess::InverseDim, PrecisionPolicy::exact()).unwrap();
        let r = &x.trace.residuals;
        assert!(r[14] < r[0] && r[14] < 1e-6, "{r:?}");
    }
}
