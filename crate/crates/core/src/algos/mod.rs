//! Triangular inversion algorithms.
//!
//! Every routine expects a unit lower triangular `A` already on the storage
//! grid of its [`PrecisionPolicy`]. Intermediates stay in the storage format
//! and matrix products go through [`emulated_matmul`]. Non-finite values
//! produced along the way are returned, not raised.

mod bound;
mod ir;
mod mbh;
mod mch;
mod mcs;
mod method;
mod mxr;
mod ns;
mod vcs;

pub use bound::mch_error_bound;
pub use ir::ir_refine;
pub use mbh::mbh_invert;
pub use mch::mch_invert;
pub use mcs::mcs_invert;
pub use method::{parse_method_list, MethodDefaults};
pub use mxr::mxr_invert;
pub use ns::ns_invert;
pub use vcs::vcs_invert;

use crate::error::{Error, Result};
use crate::fpsim::{emulated_add, emulated_matmul, emulated_sub, PrecisionPolicy};
use crate::matrix::{Kind, TriMatrix};

/// Starting guess for Newton–Schulz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialGuess {
    /// `X₀ = I`. For unit lower triangular `A` the residual `I - A` is
    /// nilpotent and the iteration is exact after `⌈log₂ n⌉` steps.
    Identity,
    /// `X₀ = c I`.
    Scaled(f64),
    /// `X₀ = I / n`.
    InverseDim,
}

impl InitialGuess {
    pub fn scale(self, n: usize) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Scaled(c) => c,
            Self::InverseDim => 1.0 / n as f64,
        }
    }
}

/// Inversion procedure and its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Vectorized column sweep.
    Vcs,
    /// Column sweep as a chain of `n - 1` matrix products.
    Mcs,
    /// Neumann series by repeated squaring.
    Mch,
    /// Unrolled block recursion starting from 1x1 blocks.
    Mbh,
    /// MCH on `b0 x b0` diagonal blocks, `r` refinement steps on those
    /// blocks, then MBH. `b0` is clamped to `n` for small matrices.
    Mxr { b0: usize, r: usize },
    /// `m` Newton–Schulz iterations.
    Ns { m: usize, x0: InitialGuess },
    /// One [`ir_refine`] step applied to the output of `inner`.
    Refined(Box<Method>),
}

/// A method bound to a precision policy.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmConfig {
    pub method: Method,
    pub policy: PrecisionPolicy,
}

impl AlgorithmConfig {
    pub fn new(method: Method, policy: PrecisionPolicy) -> Self {
        Self { method, policy }
    }

    pub fn run(&self, a: &TriMatrix) -> Result<Inversion> {
        run_method(&self.method, a, self.policy)
    }
}

fn run_method(method: &Method, a: &TriMatrix, policy: PrecisionPolicy) -> Result<Inversion> {
    match method {
        Method::Vcs => vcs_invert(a, policy),
        Method::Mcs => mcs_invert(a, policy),
        Method::Mch => mch_invert(a, policy),
        Method::Mbh => mbh_invert(a, None, 1, policy),
        Method::Mxr { b0, r } => mxr_invert(a, (*b0).min(a.n()), *r, policy),
        Method::Ns { m, x0 } => ns_invert(a, *m, *x0, policy),
        Method::Refined(inner) => {
            let first = run_method(inner, a, policy)?;
            let refined = ir_refine(&first.matrix, a, policy)?;
            Ok(Inversion { matrix: refined.matrix, trace: first.trace.then(refined.trace) })
        }
    }
}

/// Bookkeeping collected while an algorithm runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InversionTrace {
    /// Full `n x n` emulated products executed.
    pub matmuls: usize,
    /// Outer iterations (columns for VCS, loop passes otherwise).
    pub steps: usize,
    /// `||I - X_k A||_F` in host `f64`, one entry per recorded iterate.
    pub residuals: Vec<f64>,
    /// Largest magnitude of the growing iterate after each step (`Y` for
    /// MCH, `X` for Newton–Schulz).
    pub iterate_max: Vec<f64>,
}

impl InversionTrace {
    fn then(mut self, next: InversionTrace) -> Self {
        self.matmuls += next.matmuls;
        self.steps += next.steps;
        self.residuals.extend(next.residuals);
        self.iterate_max.extend(next.iterate_max);
        self
    }
}

/// Output of an inversion routine.
#[derive(Clone, Debug)]
pub struct Inversion {
    pub matrix: TriMatrix,
    pub trace: InversionTrace,
}

/// Policy-bound primitive operations that count matrix products.
struct Ops {
    policy: PrecisionPolicy,
    trace: InversionTrace,
}

impl Ops {
    fn new(policy: PrecisionPolicy) -> Self {
        Self { policy, trace: InversionTrace::default() }
    }

    fn mm(&mut self, a: &TriMatrix, b: &TriMatrix) -> TriMatrix {
        self.trace.matmuls += 1;
        emulated_matmul(a, b, self.policy).expect("operands share a shape")
    }

    fn add(&self, a: &TriMatrix, b: &TriMatrix) -> TriMatrix {
        emulated_add(a, b, self.policy.storage).expect("operands share a shape")
    }

    fn sub(&self, a: &TriMatrix, b: &TriMatrix) -> TriMatrix {
        emulated_sub(a, b, self.policy.storage).expect("operands share a shape")
    }

    fn finish(self, matrix: TriMatrix) -> Inversion {
        Inversion { matrix, trace: self.trace }
    }
}

fn require_unit_lower(a: &TriMatrix) -> Result<()> {
    if a.kind() == Kind::UnitLower || a.satisfies(Kind::UnitLower) {
        Ok(())
    } else {
        Err(Error::Structure("expected a unit lower triangular matrix".into()))
    }
}

/// `A - I` for unit lower triangular `A` (exact: only the diagonal changes).
fn strict_part(a: &TriMatrix) -> TriMatrix {
    crate::matrix::strict_tril(a)
}

fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros())
}

/// Zero-pads `a` with an identity block up to the next power of two, runs
/// `invert`, and returns the leading corner. Lets the power-of-two methods
/// handle any size.
pub fn invert_padded(
    a: &TriMatrix,
    invert: impl FnOnce(&TriMatrix) -> Result<Inversion>,
) -> Result<Inversion> {
    let n = a.n();
    let size = n.next_power_of_two().max(2);
    if size == n {
        return invert(a);
    }
    let padded = crate::matrix::pad_with_identity(a, size)?;
    let out = invert(&padded)?;
    Ok(Inversion { matrix: crate::matrix::leading_block(&out.matrix, n)?, trace: out.trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_deltanet;
    use crate::metrics::reference_inverse;

    #[test]
    fn padding_helper_recovers_inverse() {
        let a = gen_deltanet(12, 12, 3).unwrap();
        let out = invert_padded(&a, |p| mch_invert(p, PrecisionPolicy::exact())).unwrap();
        let truth = reference_inverse(&a).unwrap();
        let err = out.matrix.zip_map(&truth, |x, y| x - y).unwrap().frobenius() / truth.frobenius();
        assert!(err < 1e-12, "{err}");
        assert_eq!(out.matrix.n(), 12);
    }

    #[test]
    fn dispatch_rejects_non_unit_input() {
        let a = TriMatrix::from_rows(&[[2.0, 0.0], [1.0, 1.0]]).unwrap();
        for m in [Method::Vcs, Method::Mcs, Method::Mch, Method::Mbh, Method::Ns { m: 1, x0: InitialGuess::Identity }] {
            assert!(AlgorithmConfig::new(m, PrecisionPolicy::exact()).run(&a).is_err());
        }
    }
}
