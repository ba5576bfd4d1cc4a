//! Dense square matrices with an optional triangular structure tag.
//!
//! Storage is row-major `f64`. Values produced under a reduced precision
//! policy are still carried in `f64`, constrained to the target grid by
//! [`crate::fpsim`].

use std::fmt;

use crate::error::{Error, Result};

/// Structural tag carried by a [`TriMatrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    General,
    /// Zero on and above the diagonal.
    StrictLower,
    /// Ones on the diagonal, zero above it.
    UnitLower,
}

/// Which diagonal blocks [`diag_blocks`] keeps. Block indices start at 0,
/// and block 0 is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    All,
}

/// Edge length of the square diagonal blocks used by the blocked algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    b: usize,
}

impl BlockSpec {
    pub fn new(b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidParameter("block size must be positive".into()));
        }
        Ok(Self { b })
    }

    pub fn size(self) -> usize {
        self.b
    }

    fn check_divides(self, n: usize) -> Result<()> {
        if n % self.b != 0 {
            return Err(Error::DimensionMismatch(format!(
                "block size {} does not divide n = {n}",
                self.b
            )));
        }
        Ok(())
    }
}

/// Dense `n x n` matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct TriMatrix {
    n: usize,
    data: Vec<f64>,
    kind: Kind,
}

impl TriMatrix {
    /// Builds a matrix and checks that `data` satisfies `kind` exactly.
    pub fn new(n: usize, data: Vec<f64>, kind: Kind) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("n must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                data.len()
            )));
        }
        let m = Self { n, data, kind: Kind::General };
        if kind != Kind::General && !m.satisfies(kind) {
            return Err(Error::Structure(format!("data is not {kind:?}")));
        }
        Ok(Self { kind, ..m })
    }

    /// Builds a general matrix from nested rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(n, data, Kind::General)
    }

    /// Wraps data whose structure is known to the caller, retagging it with
    /// the tightest kind it actually satisfies.
    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        let mut m = Self { n, data, kind: Kind::General };
        m.kind = m.detect_kind();
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data, kind: Kind::UnitLower }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n], kind: Kind::StrictLower }
    }

    /// `n x n` matrix with every entry strictly below the diagonal equal to `value`.
    pub fn strict_lower_constant(n: usize, value: f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = value;
            }
        }
        Self { n, data, kind: Kind::StrictLower }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Returns true if the entries satisfy `kind` exactly.
    pub fn satisfies(&self, kind: Kind) -> bool {
        let n = self.n;
        match kind {
            Kind::General => true,
            Kind::StrictLower => {
                (0..n).all(|i| (i..n).all(|j| self.data[i * n + j] == 0.0))
            }
            Kind::UnitLower => (0..n).all(|i| {
                self.data[i * n + i] == 1.0 && (i + 1..n).all(|j| self.data[i * n + j] == 0.0)
            }),
        }
    }

    pub fn detect_kind(&self) -> Kind {
        if self.satisfies(Kind::UnitLower) {
            Kind::UnitLower
        } else if self.satisfies(Kind::StrictLower) {
            Kind::StrictLower
        } else {
            Kind::General
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.n, self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.n, data))
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{0}x{0} vs {1}x{1}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self::from_raw(n, data)
    }

    /// Exact host `f64` product, `k` summed left to right without fused
    /// multiply-add. Used for diagnostics and as an oracle.
    pub fn matmul_f64(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.data[i * n + k] * other.data[k * n + j];
                }
                data[i * n + j] = acc;
            }
        }
        Ok(Self::from_raw(n, data))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| if x.abs() > m || x.is_nan() { x.abs() } else { m })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `||I - self * a||_F` evaluated in host `f64`.
    pub fn residual_frob(&self, a: &Self) -> Result<f64> {
        let p = self.matmul_f64(a)?;
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r = if i == j { 1.0 } else { 0.0 } - p.data[i * n + j];
                s += r * r;
            }
        }
        Ok(s.sqrt())
    }
}

impl fmt::Debug for TriMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TriMatrix {{ n: {}, kind: {:?} }}", self.n, self.kind)?;
        for r in self.data.chunks(self.n) {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

/// Keeps the entries strictly below the diagonal (the `L⁻` mask).
pub fn strict_tril(m: &TriMatrix) -> TriMatrix {
    let n = m.n;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n..i * n + i].copy_from_slice(&m.data[i * n..i * n + i]);
    }
    TriMatrix { n, data, kind: Kind::StrictLower }
}

/// `I + L` for a strictly lower triangular `L`.
pub fn unit_lower_from_strict(l: &TriMatrix) -> Result<TriMatrix> {
    if !l.satisfies(Kind::StrictLower) {
        return Err(Error::Structure("expected a strictly lower triangular matrix".into()));
    }
    let n = l.n;
    let mut data = l.data.clone();
    for i in 0..n {
        data[i * n + i] = 1.0;
    }
    Ok(TriMatrix { n, data, kind: Kind::UnitLower })
}

/// Keeps the selected `b x b` diagonal blocks of `m` and zeroes the rest.
pub fn diag_blocks(m: &TriMatrix, spec: BlockSpec, parity: Parity) -> Result<TriMatrix> {
    spec.check_divides(m.n)?;
    let (n, b) = (m.n, spec.b);
    let mut data = vec![0.0; n * n];
    for blk in 0..n / b {
        let keep = match parity {
            Parity::All => true,
            Parity::Even => blk % 2 == 0,
            Parity::Odd => blk % 2 == 1,
        };
        if !keep {
            continue;
        }
        let lo = blk * b;
        for i in lo..lo + b {
            data[i * n + lo..i * n + lo + b].copy_from_slice(&m.data[i * n + lo..i * n + lo + b]);
        }
    }
    let kind = match (m.kind, parity) {
        (Kind::StrictLower, _) => Kind::StrictLower,
        (Kind::UnitLower, Parity::All) => Kind::UnitLower,
        _ => Kind::General,
    };
    Ok(TriMatrix { n, data, kind })
}

/// Embeds `a` in the leading corner of a `size x size` identity. The inverse
/// of the padded matrix carries the inverse of `a` in the same corner.
pub fn pad_with_identity(a: &TriMatrix, size: usize) -> Result<TriMatrix> {
    if size < a.n {
        return Err(Error::DimensionMismatch(format!(
            "cannot pad {0}x{0} down to {size}",
            a.n
        )));
    }
    let mut data = vec![0.0; size * size];
    for i in 0..size {
        if i < a.n {
            data[i * size..i * size + a.n].copy_from_slice(a.row(i));
        } else {
            data[i * size + i] = 1.0;
        }
    }
    Ok(TriMatrix::from_raw(size, data))
}

/// Leading `k x k` corner of `m`.
pub fn leading_block(m: &TriMatrix, k: usize) -> Result<TriMatrix> {
    if k == 0 || k > m.n {
        return Err(Error::DimensionMismatch(format!("cannot take {k}x{k} corner of n = {}", m.n)));
    }
    let mut data = Vec::with_capacity(k * k);
    for i in 0..k {
        data.extend_from_slice(&m.row(i)[..k]);
    }
    Ok(TriMatrix::from_raw(k, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> TriMatrix {
        TriMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn strict_tril_examples() {
        assert_eq!(strict_tril(&m(&[&[5.0]])).to_rows(), vec![vec![0.0]]);
        let t = strict_tril(&m(&[&[1.0, 2.0], &[3.0, 4.0]]));
        assert_eq!(t.to_rows(), vec![vec![0.0, 0.0], vec![3.0, 0.0]]);
        assert_eq!(t.kind(), Kind::StrictLower);

        let ones = TriMatrix::new(3, vec![1.0; 9], Kind::General).unwrap();
        assert_eq!(
            strict_tril(&ones).to_rows(),
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn unit_lower_examples() {
        let a = 0.37;
        let l = strict_tril(&m(&[&[0.0, 0.0], &[a, 0.0]]));
        assert_eq!(unit_lower_from_strict(&l).unwrap().to_rows(), vec![vec![1.0, 0.0], vec![a, 1.0]]);
        assert_eq!(unit_lower_from_strict(&TriMatrix::zeros(4)).unwrap(), TriMatrix::identity(4));
        let neg = unit_lower_from_strict(&TriMatrix::strict_lower_constant(3, -1.0)).unwrap();
        assert_eq!(
            neg.to_rows(),
            vec![vec![1.0, 0.0, 0.0], vec![-1.0, 1.0, 0.0], vec![-1.0, -1.0, 1.0]]
        );
        assert!(unit_lower_from_strict(&TriMatrix::identity(2)).is_err());
    }

    #[test]
    fn diag_block_examples() {
        let id = TriMatrix::identity(4);
        let b2 = BlockSpec::new(2).unwrap();
        assert_eq!(diag_blocks(&id, b2, Parity::All).unwrap(), id);
        let even = diag_blocks(&id, b2, Parity::Even).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| even.get(i, i)).collect();
        assert_eq!(diag, vec![1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            diag_blocks(&id, BlockSpec::new(3).unwrap(), Parity::All),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn base_case_parity_matches_unrolled_derivation() {
        // n = 2, b = 1: the even part carries (0,0) and the odd part (1,1).
        let id = TriMatrix::identity(2);
        let b1 = BlockSpec::new(1).unwrap();
        assert_eq!(diag_blocks(&id, b1, Parity::Even).unwrap().to_rows(), vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(diag_blocks(&id, b1, Parity::Odd).unwrap().to_rows(), vec![vec![0.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn constructor_rejects_bad_structure() {
        assert!(TriMatrix::new(2, vec![1.0, 0.5, 0.0, 1.0], Kind::UnitLower).is_err());
        assert!(TriMatrix::new(2, vec![0.0, 0.0, 0.3, 1.0], Kind::StrictLower).is_err());
        assert!(TriMatrix::new(0, vec![], Kind::General).is_err());
        assert!(TriMatrix::new(2, vec![1.0; 3], Kind::General).is_err());
    }

    #[test]
    fn padding_and_corner_round_trip() {
        let a = m(&[&[1.0, 0.0, 0.0], &[0.5, 1.0, 0.0], &[0.25, -0.5, 1.0]]);
        let p = pad_with_identity(&a, 4).unwrap();
        assert_eq!(p.kind(), Kind::UnitLower);
        assert_eq!(p.get(3, 3), 1.0);
        assert_eq!(leading_block(&p, 3).unwrap().as_slice(), a.as_slice());
    }

    fn square(max_n: usize) -> impl Strategy<Value = TriMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(-4.0f64..4.0, n * n)
                .prop_map(move |d| TriMatrix::new(n, d, Kind::General).unwrap())
        })
    }

    proptest! {
        #[test]
        fn even_plus_odd_is_all(a in square(16), b_log in 0u32..4) {
            let b = 1usize << b_log;
            prop_assume!(a.n() % b == 0);
            let spec = BlockSpec::new(b).unwrap();
            let e = diag_blocks(&a, spec, Parity::Even).unwrap();
            let o = diag_blocks(&a, spec, Parity::Odd).unwrap();
            let all = diag_blocks(&a, spec, Parity::All).unwrap();
            let sum = e.zip_map(&o, |x, y| x + y).unwrap();
            prop_assert_eq!(sum.as_slice(), all.as_slice());
        }

        #[test]
        fn strict_tril_is_idempotent(a in square(12)) {
            let once = strict_tril(&a);
            prop_assert_eq!(strict_tril(&once), once);
        }

        #[test]
        fn unit_lower_round_trips_through_strict_part(a in square(12)) {
            let unit = unit_lower_from_strict(&strict_tril(&a)).unwrap();
            let minus_i = unit.zip_map(&TriMatrix::identity(a.n()), |x, y| x - y).unwrap();
            prop_assert_eq!(unit_lower_from_strict(&strict_tril(&minus_i)).unwrap(), unit);
        }
    }
}
