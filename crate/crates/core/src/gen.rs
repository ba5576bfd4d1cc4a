//! Chunk-matrix generators.
//!
//! All randomness comes from `ChaCha8Rng` seeded with a `u64`, so a given
//! `(parameters, seed)` pair always yields the same matrix.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{unit_lower_from_strict, Kind, TriMatrix};

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How key rows are drawn before normalization to unit length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KeySampler {
    /// Standard normal coordinates: uniform on the whole sphere.
    Isotropic,
    /// Absolute values of standard normal coordinates: uniform on the
    /// positive orthant of the sphere, so every pair of keys has a
    /// non-negative inner product.
    #[default]
    Orthant,
}

impl FromStr for KeySampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isotropic" | "sphere" | "gaussian" => Ok(Self::Isotropic),
            "orthant" | "positive" => Ok(Self::Orthant),
            _ => Err(Error::InvalidParameter(format!("unknown key sampler `{s}`"))),
        }
    }
}

impl fmt::Display for KeySampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Isotropic => "isotropic",
            Self::Orthant => "orthant",
        })
    }
}

/// Row-major `rows x dim` key matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Keys {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Keys {
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{dim} keys need {} values, got {}",
                rows * dim,
                data.len()
            )));
        }
        Ok(Self { rows, dim, data })
    }

    /// Unit-norm rows drawn with `sampler`.
    pub fn sample_unit(rows: usize, dim: usize, sampler: KeySampler, rng: &mut impl Rng) -> Self {
        let mut data = Vec::with_capacity(rows * dim);
        for _ in 0..rows {
            let start = data.len();
            for _ in 0..dim {
                let g: f64 = rng.sample(StandardNormal);
                data.push(match sampler {
                    KeySampler::Isotropic => g,
                    KeySampler::Orthant => g.abs(),
                });
            }
            let row = &mut data[start..];
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            // a zero draw has probability zero; keep the row finite regardless
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            } else {
                row[0] = 1.0;
            }
        }
        Self { rows, dim, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn slice_rows(&self, lo: usize, hi: usize) -> Self {
        Self { rows: hi - lo, dim: self.dim, data: self.data[lo * self.dim..hi * self.dim].to_vec() }
    }

    /// `strict_tril(K Kᵀ)` in host `f64`.
    pub fn strict_gram(&self) -> TriMatrix {
        let n = self.rows;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
            }
        }
        TriMatrix::new(n, data, Kind::StrictLower).expect("strict part by construction")
    }
}

/// The pairwise key function applied before the strict-lower mask.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiKind {
    /// `K Kᵀ`.
    PlainKkt,
    /// `diag(β) K Kᵀ`, β per row in `[0, 2)`.
    DeltaNetBeta(Vec<f64>),
    /// `K Kᵀ` with entry `(i, j)` scaled by `γ[j+1] * ... * γ[i]`.
    DecayScaled(Vec<f64>),
}

impl PhiKind {
    /// Same decay factor on every row.
    pub fn uniform_decay(gamma: f64, n: usize) -> Self {
        Self::DecayScaled(vec![gamma; n])
    }

    fn param_len(&self) -> Option<usize> {
        match self {
            Self::PlainKkt => None,
            Self::DeltaNetBeta(v) | Self::DecayScaled(v) => Some(v.len()),
        }
    }

    fn slice(&self, lo: usize, hi: usize) -> Self {
        match self {
            Self::PlainKkt => Self::PlainKkt,
            Self::DeltaNetBeta(v) => Self::DeltaNetBeta(v[lo..hi].to_vec()),
            Self::DecayScaled(v) => Self::DecayScaled(v[lo..hi].to_vec()),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::PlainKkt => Ok(()),
            Self::DeltaNetBeta(b) => {
                if b.len() != n {
                    return Err(Error::DimensionMismatch(format!("{} betas for {n} rows", b.len())));
                }
                if let Some(bad) = b.iter().find(|x| !(0.0..2.0).contains(*x)) {
                    return Err(Error::InvalidParameter(format!("beta {bad} outside [0, 2)")));
                }
                Ok(())
            }
            Self::DecayScaled(g) => check_gammas(g, n),
        }
    }
}

fn check_gammas(g: &[f64], n: usize) -> Result<()> {
    if g.len() != n {
        return Err(Error::DimensionMismatch(format!("{} decay factors for {n} rows", g.len())));
    }
    if let Some(bad) = g.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
        return Err(Error::InvalidParameter(format!("decay factor {bad} outside (0, 1]")));
    }
    Ok(())
}

/// Scales entry `(i, j)`, `i > j`, of the strict-lower part of `a` by
/// `γ[j+1] * ... * γ[i]`. The diagonal and upper part are untouched.
pub fn apply_decay(a: &TriMatrix, gammas: &[f64]) -> Result<TriMatrix> {
    let n = a.n();
    check_gammas(gammas, n)?;
    let mut data = a.as_slice().to_vec();
    for i in 0..n {
        let mut factor = 1.0;
        for j in (0..i).rev() {
            factor *= gammas[j + 1];
            data[i * n + j] *= factor;
        }
    }
    TriMatrix::new(n, data, a.kind())
}

/// DeltaNet-style chunk matrix `I + strict_tril(K Kᵀ)` with unit-norm key rows.
///
/// Every entry lies in `[-1, 1]`. Uses the default [`KeySampler`].
pub fn gen_deltanet(n: usize, d: usize, seed: u64) -> Result<TriMatrix> {
    gen_deltanet_with(n, d, seed, KeySampler::default())
}

pub fn gen_deltanet_with(n: usize, d: usize, seed: u64, sampler: KeySampler) -> Result<TriMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("n and d must be positive".into()));
    }
    let keys = Keys::sample_unit(n, d, sampler, &mut rng_for(seed));
    Ok(deltanet_from_keys(&keys))
}

/// `I + strict_tril(K Kᵀ)`.
pub fn deltanet_from_keys(keys: &Keys) -> TriMatrix {
    unit_lower_from_strict(&keys.strict_gram()).expect("strict part by construction")
}

/// `I - strict_tril(φ(K, Kᵀ))`.
pub fn gen_with_phi(keys: &Keys, phi: &PhiKind) -> Result<TriMatrix> {
    let n = keys.rows();
    if n == 0 {
        return Err(Error::InvalidParameter("empty key matrix".into()));
    }
    phi.validate(n)?;
    let gram = keys.strict_gram();
    let mut data = gram.into_vec();
    if let PhiKind::DeltaNetBeta(beta) = phi {
        for (i, b) in beta.iter().enumerate() {
            data[i * n..(i + 1) * n].iter_mut().for_each(|x| *x *= b);
        }
    }
    let neg = TriMatrix::new(n, data.into_iter().map(|x| -x).collect(), Kind::StrictLower)?;
    let a = unit_lower_from_strict(&neg)?;
    match phi {
        PhiKind::DecayScaled(g) => apply_decay(&a, g),
        _ => Ok(a),
    }
}

/// `I + strict_tril(G)` with standard normal `G`: triangular matrices whose
/// condition number grows exponentially in `n`.
pub fn gen_gaussian_tril(n: usize, seed: u64) -> Result<TriMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut rng = rng_for(seed);
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            data[i * n + j] = rng.sample(StandardNormal);
        }
        data[i * n + i] = 1.0;
    }
    TriMatrix::new(n, data, Kind::UnitLower)
}

/// `I + sign * (all-ones strict lower)`. With `sign = -1` the inverse has
/// entries `2^(i-j-1)` below the diagonal.
pub fn gen_allones_worstcase(n: usize, sign: f64) -> Result<TriMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
    }
    unit_lower_from_strict(&TriMatrix::strict_lower_constant(n, sign))
}

/// Per-chunk matrices of a key sequence.
#[derive(Clone, Debug)]
pub struct ChunkSet {
    pub chunks: Vec<TriMatrix>,
    pub chunk_len: usize,
    pub seq_len: usize,
}

/// Splits the key rows into chunks of `chunk_len` (the last possibly shorter)
/// and builds each chunk with [`gen_with_phi`].
///
/// `phi` parameters may be given per token (length = sequence length) or per
/// chunk position (length = `chunk_len`).
pub fn chunk_sequence(keys: &Keys, chunk_len: usize, phi: &PhiKind) -> Result<ChunkSet> {
    let seq_len = keys.rows();
    if seq_len == 0 {
        return Err(Error::InvalidParameter("empty key matrix".into()));
    }
    if chunk_len == 0 {
        return Err(Error::InvalidParameter("chunk length must be positive".into()));
    }
    let per_token = match phi.param_len() {
        None => false,
        Some(len) if len == seq_len => true,
        Some(len) if len == chunk_len => false,
        Some(len) => {
            return Err(Error::DimensionMismatch(format!(
                "{len} phi parameters for sequence length {seq_len} and chunk length {chunk_len}"
            )))
        }
    };
    let chunks = (0..seq_len.div_ceil(chunk_len))
        .map(|k| {
            let lo = k * chunk_len;
            let hi = (lo + chunk_len).min(seq_len);
            let local = if per_token { phi.slice(lo, hi) } else { phi.slice(0, hi - lo) };
            gen_with_phi(&keys.slice_rows(lo, hi), &local)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChunkSet { chunks, chunk_len, seq_len })
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    // exact while binom(n, k) fits in u128; dividing out the gcd first keeps
    // the intermediate product in range too
    let mut acc: u128 = 1;
    for i in 0..k {
        let (num, den) = ((n - i) as u128, (i + 1) as u128);
        let g = gcd(acc, den);
        acc = (acc / g) * (num / (den / g));
    }
    acc as f64
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Entry `(i, j)` (1-based) of the `k`-th power of the all-ones strict lower
/// `n x n` matrix: `binom(i - j - 1, k - 1)`, zero when `i - j < k`.
pub fn strict_power_entry(n: usize, k: usize, i: usize, j: usize) -> Result<f64> {
    if k == 0 || j == 0 || j >= i || i > n {
        return Err(Error::IndexOutOfRange(format!(
            "need 1 <= j < i <= n and k >= 1, got n={n}, k={k}, i={i}, j={j}"
        )));
    }
    Ok(binomial((i - j - 1) as u64, (k - 1) as u64))
}

/// Which matrix family a sweep draws from.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `I + strict_tril(K Kᵀ)`; `d = None` means `d = n`.
    DeltaNet { d: Option<usize>, sampler: KeySampler },
    Gaussian,
    AllOnes { sign: f64 },
}

/// A generator addressable by a parameter string such as
/// `kind=deltanet,n=64,d=64,seed=7`.
///
/// `n` and `seed` are optional here because sweeps supply them per row.
/// `gamma` applies a uniform decay to the strict-lower part.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub gamma: Option<f64>,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            family: Family::DeltaNet { d: None, sampler: KeySampler::default() },
            n: None,
            seed: None,
            gamma: None,
        }
    }
}

impl GeneratorSpec {
    pub fn generate(&self, n: usize, seed: u64) -> Result<TriMatrix> {
        let a = match &self.family {
            Family::DeltaNet { d, sampler } => gen_deltanet_with(n, d.unwrap_or(n), seed, *sampler)?,
            Family::Gaussian => gen_gaussian_tril(n, seed)?,
            Family::AllOnes { sign } => gen_allones_worstcase(n, *sign)?,
        };
        match self.gamma {
            Some(g) if g != 1.0 => apply_decay(&a, &vec![g; n]),
            _ => Ok(a),
        }
    }

    /// Uses the embedded `n` and `seed`.
    pub fn build(&self) -> Result<TriMatrix> {
        let n = self.n.ok_or_else(|| Error::InvalidParameter("generator needs n".into()))?;
        self.generate(n, self.seed.unwrap_or(0))
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma: Some(gamma), ..self.clone() }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidParameter(format!("generator `{s}`: {what}"));
        let mut kind = None;
        let mut spec = GeneratorSpec::default();
        let (mut d, mut sampler, mut sign) = (None, KeySampler::default(), -1.0);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').unwrap_or(("kind", part));
            match key.trim() {
                "kind" => kind = Some(value.trim().to_string()),
                "n" => spec.n = Some(value.parse().map_err(|_| bad("bad n"))?),
                "d" => d = Some(value.parse().map_err(|_| bad("bad d"))?),
                "seed" => spec.seed = Some(value.parse().map_err(|_| bad("bad seed"))?),
                "gamma" => spec.gamma = Some(value.parse().map_err(|_| bad("bad gamma"))?),
                "sampler" => sampler = value.parse()?,
                "sign" => sign = value.parse().map_err(|_| bad("bad sign"))?,
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        spec.family = match kind.as_deref().unwrap_or("deltanet") {
            "deltanet" => Family::DeltaNet { d, sampler },
            "gaussian" | "vt" => Family::Gaussian,
            "allones" => Family::AllOnes { sign },
            other => return Err(bad(&format!("unknown kind `{other}`"))),
        };
        if let Some(g) = spec.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(bad("gamma must be in (0, 1]"));
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::DeltaNet { d, sampler } => {
                write!(f, "kind=deltanet,sampler={sampler}")?;
                if let Some(d) = d {
                    write!(f, ",d={d}")?;
                }
            }
            Family::Gaussian => write!(f, "kind=gaussian")?,
            Family::AllOnes { sign } => write!(f, "kind=allones,sign={sign}")?,
        }
        if let Some(g) = self.gamma {
            write!(f, ",gamma={g}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpsim::{emulated_matmul, PrecisionPolicy};

    #[test]
    fn deltanet_basics() {
        assert_eq!(gen_deltanet(1, 4, 3).unwrap(), TriMatrix::identity(1));
        for sampler in [KeySampler::Isotropic, KeySampler::Orthant] {
            for seed in 0..20 {
                let a = gen_deltanet_with(24, 8, seed, sampler).unwrap();
                assert_eq!(a.kind(), Kind::UnitLower);
                assert!(a.max_abs() <= 1.0 + 1e-15);
            }
        }
        assert_eq!(gen_deltanet(16, 16, 5).unwrap(), gen_deltanet(16, 16, 5).unwrap());
        assert_ne!(gen_deltanet(16, 16, 5).unwrap(), gen_deltanet(16, 16, 6).unwrap());
    }

    #[test]
    fn orthant_keys_give_nonnegative_entries() {
        let a = gen_deltanet_with(32, 32, 1, KeySampler::Orthant).unwrap();
        assert!(a.as_slice().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn phi_zero_beta_is_identity() {
        let keys = Keys::sample_unit(8, 4, KeySampler::Isotropic, &mut rng_for(2));
        let a = gen_with_phi(&keys, &PhiKind::DeltaNetBeta(vec![0.0; 8])).unwrap();
        assert_eq!(a, TriMatrix::identity(8));
    }

    #[test]
    fn plain_kkt_is_the_negated_legacy_form() {
        let keys = Keys::sample_unit(12, 6, KeySampler::Isotropic, &mut rng_for(4));
        let minus = gen_with_phi(&keys, &PhiKind::PlainKkt).unwrap();
        let plus = deltanet_from_keys(&keys);
        for i in 0..12 {
            for j in 0..i {
                assert_eq!(minus.get(i, j), -plus.get(i, j));
            }
            assert_eq!(minus.get(i, i), 1.0);
        }
        let ones = gen_with_phi(&keys, &PhiKind::uniform_decay(1.0, 12)).unwrap();
        assert_eq!(ones, minus);
    }

    #[test]
    fn beta_scales_rows() {
        let keys = Keys::sample_unit(6, 3, KeySampler::Orthant, &mut rng_for(8));
        let beta = vec![0.5, 1.0, 1.5, 0.25, 1.9, 0.0];
        let a = gen_with_phi(&keys, &PhiKind::DeltaNetBeta(beta.clone())).unwrap();
        let plain = gen_with_phi(&keys, &PhiKind::PlainKkt).unwrap();
        for i in 0..6 {
            for j in 0..i {
                assert!((a.get(i, j) - beta[i] * plain.get(i, j)).abs() < 1e-15);
            }
        }
        assert!(gen_with_phi(&keys, &PhiKind::DeltaNetBeta(vec![1.0; 5])).is_err());
        assert!(gen_with_phi(&keys, &PhiKind::DeltaNetBeta(vec![2.5; 6])).is_err());
    }

    #[test]
    fn decay_follows_cumulative_row_product() {
        let a = gen_allones_worstcase(4, 1.0).unwrap();
        let g = [1.0, 0.5, 0.25, 0.5];
        let d = apply_decay(&a, &g).unwrap();
        assert_eq!(d.get(1, 0), 0.5);
        assert_eq!(d.get(2, 1), 0.25);
        assert_eq!(d.get(2, 0), 0.125);
        assert_eq!(d.get(3, 0), 0.0625);
        assert_eq!(d.get(3, 2), 0.5);
        assert_eq!(d.get(3, 3), 1.0);
        assert!(apply_decay(&a, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(apply_decay(&a, &[1.0; 3]).is_err());
    }

    #[test]
    fn decay_never_increases_magnitudes() {
        for seed in 0..10 {
            let a = gen_deltanet_with(32, 16, seed, KeySampler::Isotropic).unwrap();
            let g: Vec<f64> = (0..32).map(|i| 0.5 + 0.5 * ((i * 7 + seed as usize) % 10) as f64 / 10.0).collect();
            let d = apply_decay(&a, &g).unwrap();
            for (x, y) in d.as_slice().iter().zip(a.as_slice()) {
                assert!(x.abs() <= y.abs());
            }
        }
    }

    #[test]
    fn gaussian_structure() {
        assert_eq!(gen_gaussian_tril(1, 0).unwrap(), TriMatrix::identity(1));
        let a = gen_gaussian_tril(2, 9).unwrap();
        assert_eq!(a.kind(), Kind::UnitLower);
        assert_ne!(a.get(1, 0), 0.0);
    }

    #[test]
    fn allones_examples() {
        let a = gen_allones_worstcase(3, -1.0).unwrap();
        assert_eq!(a.to_rows(), vec![vec![1.0, 0.0, 0.0], vec![-1.0, 1.0, 0.0], vec![-1.0, -1.0, 1.0]]);
        assert_eq!(gen_allones_worstcase(1, -1.0).unwrap(), TriMatrix::identity(1));
        assert!(gen_allones_worstcase(3, 2.0).is_err());
    }

    #[test]
    fn chunking() {
        let keys = Keys::sample_unit(100, 8, KeySampler::Orthant, &mut rng_for(1));
        let set = chunk_sequence(&keys, 64, &PhiKind::PlainKkt).unwrap();
        let sizes: Vec<usize> = set.chunks.iter().map(TriMatrix::n).collect();
        assert_eq!(sizes, vec![64, 36]);

        let head = keys.slice_rows(0, 64);
        let single = chunk_sequence(&head, 64, &PhiKind::PlainKkt).unwrap();
        assert_eq!(single.chunks.len(), 1);
        assert_eq!(single.chunks[0], gen_with_phi(&head, &PhiKind::PlainKkt).unwrap());

        // second chunk depends only on its own rows
        let two = keys.slice_rows(0, 16);
        let set = chunk_sequence(&two, 8, &PhiKind::PlainKkt).unwrap();
        assert_eq!(set.chunks[1], gen_with_phi(&two.slice_rows(8, 16), &PhiKind::PlainKkt).unwrap());

        // per-token and per-chunk parameters
        let betas: Vec<f64> = (0..100).map(|i| (i % 7) as f64 / 7.0).collect();
        let set = chunk_sequence(&keys, 64, &PhiKind::DeltaNetBeta(betas.clone())).unwrap();
        assert_eq!(
            set.chunks[1],
            gen_with_phi(&keys.slice_rows(64, 100), &PhiKind::DeltaNetBeta(betas[64..].to_vec())).unwrap()
        );
        assert!(chunk_sequence(&keys, 64, &PhiKind::DeltaNetBeta(vec![1.0; 64])).is_ok());
        assert!(chunk_sequence(&keys, 64, &PhiKind::DeltaNetBeta(vec![1.0; 10])).is_err());
        assert!(chunk_sequence(&Keys::new(0, 4, vec![]).unwrap(), 4, &PhiKind::PlainKkt).is_err());
    }

    #[test]
    fn strict_power_examples() {
        assert_eq!(strict_power_entry(4, 2, 4, 1).unwrap(), 2.0);
        for i in 2..=9 {
            for j in 1..i {
                assert_eq!(strict_power_entry(9, 1, i, j).unwrap(), 1.0);
            }
        }
        assert_eq!(strict_power_entry(8, 4, 8, 1).unwrap(), 20.0);
        assert_eq!(strict_power_entry(8, 5, 4, 1).unwrap(), 0.0);
        assert!(strict_power_entry(4, 1, 2, 2).is_err());
        assert!(strict_power_entry(4, 0, 3, 1).is_err());
        assert!(strict_power_entry(4, 1, 5, 1).is_err());
    }

    #[test]
    fn matrix_powers_match_binomials() {
        let exact = PrecisionPolicy::exact();
        for n in [2usize, 5, 8, 17, 32] {
            let l = TriMatrix::strict_lower_constant(n, 1.0);
            let mut p = l.clone();
            for k in 1..=n {
                for i in 2..=n {
                    for j in 1..i {
                        assert_eq!(p.get(i - 1, j - 1), strict_power_entry(n, k, i, j).unwrap());
                    }
                }
                p = emulated_matmul(&p, &l, exact).unwrap();
            }
        }
    }

    #[test]
    fn generator_spec_strings() {
        let s: GeneratorSpec = "kind=deltanet,n=64,d=64,seed=7".parse().unwrap();
        assert_eq!(s.n, Some(64));
        assert_eq!(s.seed, Some(7));
        assert_eq!(s.build().unwrap(), gen_deltanet(64, 64, 7).unwrap());
        let g: GeneratorSpec = "gaussian".parse().unwrap();
        assert_eq!(g.family, Family::Gaussian);
        let o: GeneratorSpec = "kind=allones,sign=1".parse().unwrap();
        assert_eq!(o.generate(3, 0).unwrap(), gen_allones_worstcase(3, 1.0).unwrap());
        assert!("kind=deltanet,gamma=1.5".parse::<GeneratorSpec>().is_err());
        assert!("kind=nope".parse::<GeneratorSpec>().is_err());
        let round: GeneratorSpec = s.to_string().parse().unwrap();
        assert_eq!(round.family, s.family);
    }
}
