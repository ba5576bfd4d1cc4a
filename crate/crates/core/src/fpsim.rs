//! Emulation of reduced-precision binary floating-point formats.
//!
//! Every format here is a subset of binary64, so values stay in `f64` and
//! are snapped to the target grid after each scalar operation. Rounding is
//! round-to-nearest, ties-to-even, with gradual underflow and overflow to
//! infinity. Because binary64 carries more than twice the significand bits
//! of every narrower preset plus two, a single `f64` operation followed by
//! rounding gives the same result as the operation performed natively in
//! the narrower format.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::TriMatrix;

/// A binary floating-point format: `t` stored significand bits (the implicit
/// leading one excluded) and `p` exponent bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    t: u32,
    p: u32,
}

impl FloatFormat {
    pub const FP16: Self = Self { t: 10, p: 5 };
    pub const BF16: Self = Self { t: 7, p: 8 };
    pub const FP32: Self = Self { t: 23, p: 8 };
    pub const FP64: Self = Self { t: 52, p: 11 };

    pub const PRESETS: [Self; 4] = [Self::FP16, Self::BF16, Self::FP32, Self::FP64];

    /// A custom format. The grid must fit inside binary64.
    pub fn new(t: u32, p: u32) -> Result<Self> {
        let f = Self { t, p };
        if !(1..=52).contains(&t) || !(2..=11).contains(&p) || f.emin() - (t as i32) < -1074 {
            return Err(Error::InvalidParameter(format!(
                "format t={t}, p={p} does not embed in binary64"
            )));
        }
        Ok(f)
    }

    pub fn significand_bits(self) -> u32 {
        self.t
    }

    pub fn exponent_bits(self) -> u32 {
        self.p
    }

    /// Machine precision `u = 2^-t`.
    pub fn unit_roundoff(self) -> f64 {
        pow2(-(self.t as i32))
    }

    pub fn emax(self) -> i32 {
        (1 << (self.p - 1)) - 1
    }

    pub fn emin(self) -> i32 {
        1 - self.emax()
    }

    /// Largest finite magnitude, `(2 - 2^-t) * 2^emax`.
    pub fn max_finite(self) -> f64 {
        if self == Self::FP64 {
            return f64::MAX;
        }
        (2.0 - pow2(-(self.t as i32))) * pow2(self.emax())
    }

    /// Smallest positive subnormal, `2^(emin - t)`.
    pub fn min_subnormal(self) -> f64 {
        pow2(self.emin() - self.t as i32)
    }

    /// Short CLI name, or `t<t>p<p>` for custom formats.
    pub fn name(self) -> String {
        match self {
            Self::FP16 => "fp16".into(),
            Self::BF16 => "bf16".into(),
            Self::FP32 => "fp32".into(),
            Self::FP64 => "fp64".into(),
            Self { t, p } => format!("t{t}p{p}"),
        }
    }

    /// Whether every value of `self` is representable in `other`.
    pub fn is_subset_of(self, other: Self) -> bool {
        self.t <= other.t && self.p <= other.p
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for FloatFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fp16" | "f16" | "float16" | "half" => Ok(Self::FP16),
            "bf16" | "bfloat16" => Ok(Self::BF16),
            "fp32" | "f32" | "float32" | "single" => Ok(Self::FP32),
            "fp64" | "f64" | "float64" | "double" | "oracle" => Ok(Self::FP64),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Storage format for matrices between algorithm steps, and accumulation
/// format for every multiply and add inside a matrix product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionPolicy {
    pub storage: FloatFormat,
    pub accumulate: FloatFormat,
}

impl PrecisionPolicy {
    pub fn new(storage: FloatFormat, accumulate: FloatFormat) -> Result<Self> {
        if !storage.is_subset_of(accumulate) {
            return Err(Error::InvalidParameter(format!(
                "accumulation format {accumulate} is coarser than storage {storage}"
            )));
        }
        Ok(Self { storage, accumulate })
    }

    /// Everything in binary64.
    pub fn exact() -> Self {
        Self { storage: FloatFormat::FP64, accumulate: FloatFormat::FP64 }
    }

    /// Inputs and intermediates kept in `input`, products accumulated in
    /// float32 (float64 when the input itself is float64).
    pub fn for_input(input: FloatFormat) -> Self {
        if input.is_subset_of(FloatFormat::FP32) {
            Self { storage: input, accumulate: FloatFormat::FP32 }
        } else {
            Self { storage: input, accumulate: FloatFormat::FP64 }
        }
    }
}

#[inline]
fn pow2(k: i32) -> f64 {
    if k >= -1022 {
        debug_assert!(k <= 1023);
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// `x * 2^k`, exact as long as the result is a normal or subnormal binary64.
#[inline]
fn scale2(x: f64, k: i32) -> f64 {
    if k > 1023 {
        x * pow2(1023) * pow2(k - 1023)
    } else if k < -1022 {
        x * pow2(-1022) * pow2(k + 1022)
    } else {
        x * pow2(k)
    }
}

/// Rounds `x` to the nearest value of `fmt`, ties to even.
///
/// Magnitudes past the largest finite value become infinite, subnormals of
/// `fmt` are kept, NaN stays NaN.
#[inline]
pub fn round_to_format(x: f64, fmt: FloatFormat) -> f64 {
    if fmt == FloatFormat::FP64 || x == 0.0 || !x.is_finite() {
        return x;
    }
    let biased = ((x.to_bits() >> 52) & 0x7ff) as i32;
    // binary64 subnormals sit below every narrower emin anyway
    let e = (biased - 1023).max(-1022);
    let q = e.max(fmt.emin()) - fmt.t as i32;
    let r = scale2(scale2(x, -q).round_ties_even(), q);
    if r.abs() > fmt.max_finite() {
        f64::INFINITY.copysign(x)
    } else {
        r
    }
}

/// Elementwise [`round_to_format`].
pub fn quantize(m: &TriMatrix, fmt: FloatFormat) -> TriMatrix {
    m.map(|x| round_to_format(x, fmt))
}

/// `A * B` under `policy`.
///
/// Each entry is the left-to-right sum over `k` of `a[i][k] * b[k][j]`, with
/// every product and every partial sum rounded to `policy.accumulate`; the
/// finished entry is rounded to `policy.storage`. Inputs are expected on the
/// storage grid. Non-finite values propagate (`0 * inf` is NaN).
pub fn emulated_matmul(a: &TriMatrix, b: &TriMatrix, policy: PrecisionPolicy) -> Result<TriMatrix> {
    a.check_same_shape(b)?;
    let n = a.n();
    let data = match policy.accumulate {
        FloatFormat::FP64 => rowwise_f64(a.as_slice(), b.as_slice(), n),
        FloatFormat::FP32 => rowwise_f32(a.as_slice(), b.as_slice(), n),
        acc => rowwise_rounded(a.as_slice(), b.as_slice(), n, acc),
    };
    let data = data.into_iter().map(|x| round_to_format(x, policy.storage)).collect();
    Ok(TriMatrix::from_raw(n, data))
}

/// Same contract as [`emulated_matmul`], but every scalar operation goes
/// through [`round_to_format`] even when the accumulation format is native.
/// Slow; exists to cross-check the native fast paths.
pub fn emulated_matmul_scalar(
    a: &TriMatrix,
    b: &TriMatrix,
    policy: PrecisionPolicy,
) -> Result<TriMatrix> {
    a.check_same_shape(b)?;
    let n = a.n();
    let data = rowwise_rounded(a.as_slice(), b.as_slice(), n, policy.accumulate)
        .into_iter()
        .map(|x| round_to_format(x, policy.storage))
        .collect();
    Ok(TriMatrix::from_raw(n, data))
}

// The i-k-j loop order keeps one running sum per output entry in `acc`, so
// each entry still sees its terms in increasing k.
fn rowwise_f64(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        let acc = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            for (s, &bkj) in acc.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                *s += aik * bkj;
            }
        }
    }
    out
}

fn rowwise_f32(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let a32: Vec<f32> = a.iter().map(|&x| x as f32).collect();
    let b32: Vec<f32> = b.iter().map(|&x| x as f32).collect();
    let mut acc = vec![0.0f32; n];
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        acc.fill(0.0);
        for k in 0..n {
            let aik = a32[i * n + k];
            for (s, &bkj) in acc.iter_mut().zip(&b32[k * n..(k + 1) * n]) {
                *s += aik * bkj;
            }
        }
        out.extend(acc.iter().map(|&x| x as f64));
    }
    out
}

fn rowwise_rounded(a: &[f64], b: &[f64], n: usize, fmt: FloatFormat) -> Vec<f64> {
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        let acc = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            for (s, &bkj) in acc.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                let prod = round_to_format(aik * bkj, fmt);
                *s = round_to_format(*s + prod, fmt);
            }
        }
    }
    out
}

/// Elementwise `A + B` rounded to `fmt`.
pub fn emulated_add(a: &TriMatrix, b: &TriMatrix, fmt: FloatFormat) -> Result<TriMatrix> {
    a.zip_map(b, |x, y| round_to_format(x + y, fmt))
}

/// Elementwise `A - B` rounded to `fmt`.
pub fn emulated_sub(a: &TriMatrix, b: &TriMatrix, fmt: FloatFormat) -> Result<TriMatrix> {
    a.zip_map(b, |x, y| round_to_format(x - y, fmt))
}
