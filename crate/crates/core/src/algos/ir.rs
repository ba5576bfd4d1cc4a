use super::{require_unit_lower, Ops};
use crate::algos::Inversion;
use crate::error::Result;
use crate::fpsim::PrecisionPolicy;
use crate::matrix::TriMatrix;

/// One step of iterative refinement: `Y + (I - Y A) Y`.
pub fn ir_refine(y: &TriMatrix, a: &TriMatrix, policy: PrecisionPolicy) -> Result<Inversion> {
    require_unit_lower(a)?;
    y.check_same_shape(a)?;
    let mut ops = Ops::new(policy);
    let out = ir_core(y, a, &mut ops);
    Ok(ops.finish(out))
}

pub(super) fn ir_core(y: &TriMatrix, a: &TriMatrix, ops: &mut Ops) -> TriMatrix {
    let ya = ops.mm(y, a);
    let r = ops.sub(&TriMatrix::identity(a.n()), &ya);
    let ry = ops.mm(&r, y);
    ops.trace.steps += 1;
    ops.add(y, &ry)
}
