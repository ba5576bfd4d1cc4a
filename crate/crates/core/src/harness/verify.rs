//! The invariant suite behind `trinv verify`.
//!
//! Each check returns a [`Criterion`] with a pass flag and the measurements
//! behind it, so callers can print one line per check and decide how to
//! exit.

use std::fmt;

use super::dataset::Dataset;
use super::plot::render_panels;
use super::sweep::{run_decay_sweep, run_ns_iteration_sweep, run_sweep, ExperimentSpec, NsSweepSpec};
use crate::algos::{
    ir_refine, mbh_invert, mch_invert, mxr_invert, AlgorithmConfig, InitialGuess, Method,
};
use crate::error::Result;
use crate::fpsim::{emulated_matmul, quantize, round_to_format, FloatFormat, PrecisionPolicy};
use crate::gen::{gen_allones_worstcase, gen_gaussian_tril, strict_power_entry, GeneratorSpec, KeySampler};
use crate::matrix::{leading_block, strict_tril, TriMatrix};
use crate::metrics::{condition_number, error_report, inverse_entry_bound_check, median, reference_inverse};

#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    /// Measurements; failing cells are prefixed with `FAIL`.
    pub details: Vec<String>,
}

impl Criterion {
    fn new(id: u8, title: &'static str) -> Self {
        Self { id, title, passed: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.details.push(what);
        } else {
            self.passed = false;
            self.details.push(format!("FAIL {what}"));
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &String> {
        self.details.iter().filter(|d| d.starts_with("FAIL"))
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2}. {}", self.id, self.title)?;
        let bad: Vec<_> = self.failures().collect();
        if !bad.is_empty() {
            write!(f, " ({} failing: {})", bad.len(), bad[0].trim_start_matches("FAIL "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Draws per cell for the sweep-based checks.
    pub trials: usize,
    pub seed: u64,
    /// Draws per size for the conditioning check.
    pub draws: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { trials: 10, seed: 0, draws: 200 }
    }
}

const SIZES: [usize; 4] = [16, 32, 64, 128];

fn stable_methods() -> Vec<Method> {
    vec![
        Method::Vcs,
        Method::Mcs,
        Method::Mbh,
        Method::Ns { m: 12, x0: InitialGuess::InverseDim },
        Method::Mxr { b0: 16, r: 1 },
    ]
}

fn frob_rel(x: &TriMatrix, t: &TriMatrix) -> f64 {
    match error_report(t, x, None) {
        Ok(r) => r.frob_rel,
        Err(_) => f64::NAN,
    }
}

fn same_bits(a: &TriMatrix, b: &TriMatrix) -> bool {
    a.n() == b.n() && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn log2(n: usize) -> usize {
    n.trailing_zeros() as usize
}

/// Textbook block recursion
/// `[[A11, 0], [A21, A22]]⁻¹ = [[X11, 0], [-(X22 A21) X11, X22]]`.
pub(crate) fn recursive_block_inverse(a: &TriMatrix, policy: PrecisionPolicy) -> Result<TriMatrix> {
    let n = a.n();
    if n == 1 {
        return Ok(TriMatrix::identity(1));
    }
    let h = n / 2;
    let sub = |r0: usize, c0: usize| {
        let mut d = Vec::with_capacity(h * h);
        for i in 0..h {
            d.extend_from_slice(&a.row(r0 + i)[c0..c0 + h]);
        }
        TriMatrix::from_raw(h, d)
    };
    let x11 = recursive_block_inverse(&leading_block(a, h)?, policy)?;
    let x22 = recursive_block_inverse(&sub(h, h), policy)?;
    let t = emulated_matmul(&x22, &sub(h, 0), policy)?;
    let c = emulated_matmul(&t, &x11, policy)?;
    let mut out = vec![0.0; n * n];
    for i in 0..h {
        out[i * n..i * n + h].copy_from_slice(x11.row(i));
        out[(h + i) * n + h..(h + i) * n + n].copy_from_slice(x22.row(i));
        for j in 0..h {
            out[(h + i) * n + j] = round_to_format(-c.get(i, j), policy.storage);
        }
    }
    Ok(TriMatrix::from_raw(n, out))
}

/// Float64 agreement with the reference inverse.
pub fn oracle_agreement(opts: &VerifyOptions) -> Result<Criterion> {
    let mut c = Criterion::new(1, "float64 oracle agreement (frob_rel <= 1e-12)");
    let gen = GeneratorSpec::default();
    for n in [4usize, 8, 16, 32, 64, 128] {
        let mut methods = vec![
            Method::Vcs,
            Method::Mcs,
            Method::Mbh,
            Method::Mxr { b0: 16, r: 0 },
            Method::Ns { m: n.next_power_of_two().trailing_zeros() as usize, x0: InitialGuess::Identity },
        ];
        if n <= 32 {
            methods.push(Method::Mch);
        }
        let mut worst = vec![0.0f64; methods.len()];
        for t in 0..opts.trials {
            let a = gen.generate(n, opts.seed + t as u64)?;
            let truth = reference_inverse(&a)?;
            for (k, m) in methods.iter().enumerate() {
                let x = AlgorithmConfig::new(m.clone(), PrecisionPolicy::exact()).run(&a)?;
                let e = frob_rel(&x.matrix, &truth);
                worst[k] = if e.is_nan() { f64::NAN } else { worst[k].max(e) };
            }
        }
        for (m, w) in methods.iter().zip(worst) {
            c.check(w <= 1e-12, format!("{m} n={n}: max frob_rel {w:.2e}"));
        }
    }
    Ok(c)
}

/// The fp32/fp16/bf16 sweep shared by criteria 2 to 4.
pub fn precision_sweep(opts: &VerifyOptions) -> Result<Dataset> {
    let mut methods = stable_methods();
    methods.push(Method::Mxr { b0: 16, r: 0 });
    methods.push(Method::Mch);
    run_sweep(&ExperimentSpec {
        sizes: SIZES.to_vec(),
        formats: vec![FloatFormat::FP32, FloatFormat::FP16, FloatFormat::BF16],
        methods,
        trials: opts.trials,
        seed: opts.seed,
        ..Default::default()
    })
}

fn med(ds: &Dataset, m: &Method, n: usize, f: &str) -> f64 {
    ds.median_of(&m.to_string(), n, f).map_or(f64::NAN, |r| r.frob_rel)
}

pub fn float32_regime(ds: &Dataset) -> Criterion {
    let mut c = Criterion::new(2, "float32: stable <= 1e-5, MXR(r=0) in [1e-5, 1e-2], MCH > 1e-1 at n >= 64");
    for n in SIZES {
        for m in stable_methods() {
            let v = med(ds, &m, n, "fp32");
            c.check(v <= 1e-5, format!("{m} n={n}: median {v:.2e}"));
        }
        let v = med(ds, &Method::Mxr { b0: 16, r: 0 }, n, "fp32");
        c.check((1e-5..=1e-2).contains(&v), format!("MXR(r=0) n={n}: median {v:.2e}"));
        if n >= 64 {
            let v = med(ds, &Method::Mch, n, "fp32");
            c.check(v > 1e-1 || v.is_nan(), format!("MCH n={n}: median {v:.2e}"));
        }
    }
    c
}

pub fn float16_regime(ds: &Dataset) -> Criterion {
    let mut c = Criterion::new(3, "float16: MCH non-finite at n >= 32, stable <= 5e-3");
    for n in SIZES {
        if n >= 32 {
            let rows: Vec<_> =
                ds.trial_rows().filter(|r| r.method == "MCH" && r.n == n && r.format == "fp16").collect();
            let bad = rows.iter().filter(|r| r.nonfinite > 0).count();
            c.check(!rows.is_empty() && bad == rows.len(), format!("MCH n={n}: {bad}/{} trials non-finite", rows.len()));
        }
        for m in stable_methods() {
            let v = med(ds, &m, n, "fp16");
            c.check(v <= 5e-3, format!("{m} n={n}: median {v:.2e}"));
        }
    }
    c
}

pub fn bfloat16_regime(ds: &Dataset) -> Criterion {
    let mut c = Criterion::new(4, "bfloat16: MCH finite but >= 1e-1 at n >= 32, stable bf16 worse than fp16");
    for n in SIZES {
        let rows: Vec<_> = ds.trial_rows().filter(|r| r.method == "MCH" && r.n == n && r.format == "bf16").collect();
        let bad = rows.iter().filter(|r| r.nonfinite > 0).count();
        c.check(!rows.is_empty() && bad == 0, format!("MCH n={n}: {bad}/{} trials non-finite", rows.len()));
        if n >= 32 {
            let v = med(ds, &Method::Mch, n, "bf16");
            c.check(v >= 1e-1, format!("MCH n={n}: median {v:.2e}"));
        }
        for m in stable_methods() {
            let (b, h) = (med(ds, &m, n, "bf16"), med(ds, &m, n, "fp16"));
            c.check(b > h, format!("{m} n={n}: bf16 {b:.2e} vs fp16 {h:.2e}"));
        }
    }
    c
}

pub fn conditioning(opts: &VerifyOptions) -> Result<Criterion> {
    let mut c = Criterion::new(5, "conditioning: DeltaNet kappa <= n^2 and |inverse| <= 1, VT kappa >> n^2");
    let gen = GeneratorSpec::default();
    for n in SIZES {
        let (mut worst_kappa, mut entry_ok) = (0.0f64, true);
        for t in 0..opts.draws {
            let a = gen.generate(n, opts.seed + t as u64)?;
            worst_kappa = worst_kappa.max(condition_number(&a).unwrap_or(f64::INFINITY));
            entry_ok &= inverse_entry_bound_check(&reference_inverse(&a)?, 1e-9);
        }
        let bound = (n * n) as f64;
        c.check(worst_kappa <= bound * (1.0 + 1e-9), format!("n={n}: max kappa {worst_kappa:.1} vs {bound}"));
        c.check(entry_ok, format!("n={n}: inverse entries within [-1, 1] over {} draws", opts.draws));
    }
    let kappas: Vec<f64> = (0..opts.draws.max(1))
        .map(|t| {
            gen_gaussian_tril(64, opts.seed + t as u64)
                .map(|a| condition_number(&a).unwrap_or(f64::INFINITY))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let m = median(&kappas);
    c.check(m > 10.0 * 64.0 * 64.0, format!("Gaussian n=64: median kappa {m:.2e}"));
    Ok(c)
}

fn unit_lower_zoo(seed: u64) -> Result<Vec<(String, TriMatrix)>> {
    let mut zoo = Vec::new();
    for n in [2, 3, 5, 8, 16, 31, 64, 128] {
        for s in 0..3u64 {
            for sampler in [KeySampler::Orthant, KeySampler::Isotropic] {
                let g = GeneratorSpec { family: crate::gen::Family::DeltaNet { d: None, sampler }, ..Default::default() };
                zoo.push((format!("deltanet/{sampler} n={n} seed={}", seed + s), g.generate(n, seed + s)?));
            }
        }
        for sign in [1.0, -1.0] {
            zoo.push((format!("allones sign={sign} n={n}"), gen_allones_worstcase(n, sign)?));
        }
        if n <= 16 {
            zoo.push((format!("gaussian n={n}"), gen_gaussian_tril(n, seed)?));
        }
    }
    Ok(zoo)
}

pub fn ns_termination(opts: &VerifyOptions) -> Result<Criterion> {
    let mut c = Criterion::new(6, "Newton-Schulz from I terminates in ceil(log2 n) steps with quadratic contraction");
    for (name, a) in unit_lower_zoo(opts.seed)? {
        let n = a.n();
        let steps = n.next_power_of_two().trailing_zeros() as usize;
        let x = crate::algos::ns_invert(&a, steps, InitialGuess::Identity, PrecisionPolicy::exact())?;
        let inv_norm = reference_inverse(&a)?.frobenius();
        let r = &x.trace.residuals;
        let last = r[steps];
        c.check(last <= 1e-10 * inv_norm, format!("{name}: residual {last:.2e} after {steps} steps"));
        let contract = r.windows(2).all(|w| w[1] <= w[0] * w[0] + 1e-10);
        c.check(contract, format!("{name}: contraction {:?}", r.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>()));
    }
    Ok(c)
}

pub fn structural_equivalences(opts: &VerifyOptions) -> Result<Criterion> {
    let mut c = Criterion::new(7, "unrolled MBH = recursive, MXR(b0=n) = MCH, decay sweep at 1 = plain sweep");
    let gen = GeneratorSpec::default();
    for n in [2, 4, 8] {
        for t in 0..opts.trials {
            let a = gen.generate(n, opts.seed + t as u64)?;
            let p = PrecisionPolicy::exact();
            let ok = same_bits(&mbh_invert(&a, None, 1, p)?.matrix, &recursive_block_inverse(&a, p)?);
            c.check(ok, format!("MBH n={n} seed={}: bit-equal to recursion", opts.seed + t as u64));
        }
    }
    for n in [16, 32, 64] {
        for f in [FloatFormat::FP64, FloatFormat::FP32, FloatFormat::FP16, FloatFormat::BF16] {
            let a = quantize(&gen.generate(n, opts.seed)?, f);
            let p = PrecisionPolicy::for_input(f);
            let ok = same_bits(&mxr_invert(&a, n, 0, p)?.matrix, &mch_invert(&a, p)?.matrix);
            c.check(ok, format!("MXR(b0={n}) {f}: bit-equal to MCH"));
        }
    }
    let spec = ExperimentSpec {
        sizes: vec![16, 32],
        formats: vec![FloatFormat::FP16, FloatFormat::FP32],
        trials: opts.trials.min(3),
        seed: opts.seed,
        ..Default::default()
    };
    let plain = run_sweep(&spec)?;
    let decayed = run_decay_sweep(&spec, &[1.0])?;
    let ok = plain.rows.len() == decayed.rows.len()
        && plain.rows.iter().zip(&decayed.rows).all(|(a, b)| a.core() == b.core());
    c.check(ok, format!("decay sweep at gamma=1 vs plain sweep: {} rows", plain.rows.len()));
    Ok(c)
}

pub fn matmul_counts(opts: &VerifyOptions) -> Result<Criterion> {
    let mut c = Criterion::new(8, "matmul counts match the closed forms");
    let gen = GeneratorSpec::default();
    let p = PrecisionPolicy::for_input(FloatFormat::FP32);
    for n in [2, 4, 8, 16, 32, 64, 128] {
        let a = gen.generate(n, opts.seed)?;
        let mut cases: Vec<(Method, usize)> = vec![
            (Method::Mcs, n - 1),
            (Method::Mch, 2 * (log2(n) - 1)),
            (Method::Mbh, 2 * log2(n)),
            (Method::Vcs, 0),
        ];
        for m in [0, 1, 6, 12] {
            cases.push((Method::Ns { m, x0: InitialGuess::InverseDim }, 2 * m));
        }
        for b0 in [2, 4, 8, 16].into_iter().filter(|&b| b <= n) {
            for r in 0..3 {
                cases.push((Method::Mxr { b0, r }, 2 * (log2(b0) - 1) + 2 * r + 2 * log2(n / b0)));
            }
        }
        for (m, want) in cases {
            let got = AlgorithmConfig::new(m.clone(), p).run(&a)?.trace.matmuls;
            c.check(got == want, format!("{m} n={n}: {got} (expected {want})"));
        }
        let got = ir_refine(&a, &a, p)?.trace.matmuls;
        c.check(got == 2, format!("IR n={n}: {got} (expected 2)"));
    }
    Ok(c)
}

pub fn growth_witness() -> Result<Criterion> {
    let mut c = Criterion::new(9, "repeated squaring of the all-ones strict lower matrix matches binomials");
    for n in [2, 4, 8, 16, 32] {
        let mut y = strict_tril(&gen_allones_worstcase(n, 1.0)?);
        let mut power = 1;
        let mut ok = true;
        for _ in 0..log2(n / 2) {
            y = emulated_matmul(&y, &y, PrecisionPolicy::exact())?;
            power *= 2;
            for i in 0..n {
                for j in 0..n {
                    let want = if i > j { strict_power_entry(n, power, i + 1, j + 1)? } else { 0.0 };
                    ok &= y.get(i, j) == want;
                }
            }
        }
        c.check(ok, format!("n={n}: L^k entries for k up to {power}"));
        if n >= 4 {
            let corner = y.get(n - 1, 0);
            let want = strict_power_entry(n, n / 2, n, 1)?;
            let binom = (1..n / 2).fold(1.0f64, |acc, i| acc * (n - 1 - i) as f64 / i as f64).round();
            c.check(corner == want && corner == binom, format!("n={n}: (L^{})[n,1] = {corner}", n / 2));
        }
    }
    Ok(c)
}

pub fn ir_efficacy(opts: &VerifyOptions) -> Result<Criterion> {
    let mut c = Criterion::new(10, "one refinement step on float32 MXR(r=0) at n=64 gains >= 10x");
    let gen = GeneratorSpec::default();
    let p = PrecisionPolicy::for_input(FloatFormat::FP32);
    let (mut before, mut after) = (Vec::new(), Vec::new());
    for t in 0..opts.trials {
        let a = quantize(&gen.generate(64, opts.seed + t as u64)?, FloatFormat::FP32);
        let truth = reference_inverse(&a)?;
        let y = mxr_invert(&a, 16, 0, p)?.matrix;
        before.push(frob_rel(&y, &truth));
        after.push(frob_rel(&ir_refine(&y, &a, p)?.matrix, &truth));
    }
    let (b, a) = (median(&before), median(&after));
    c.check(b >= 10.0 * a, format!("median {b:.2e} -> {a:.2e} ({:.1}x)", b / a));
    Ok(c)
}

pub fn determinism(opts: &VerifyOptions) -> Result<Criterion> {
    let mut c = Criterion::new(11, "identical specs give byte-identical CSV");
    let spec = ExperimentSpec {
        sizes: vec![16, 32],
        trials: opts.trials.min(3),
        seed: opts.seed,
        ..Default::default()
    };
    let twice = |f: &(dyn Fn() -> Result<Dataset> + Sync)| -> Result<bool> {
        let a = f()?.to_csv_string();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| {
            crate::error::Error::InvalidParameter(e.to_string())
        })?;
        let b = one.install(f)?.to_csv_string();
        Ok(a == b && a == f()?.to_csv_string())
    };
    c.check(twice(&|| run_sweep(&spec))?, "sweep".into());
    let ns = NsSweepSpec { sizes: vec![32], m_values: vec![0, 3, 6], trials: spec.trials, seed: opts.seed, ..Default::default() };
    c.check(twice(&|| run_ns_iteration_sweep(&ns))?, "ns-sweep".into());
    c.check(twice(&|| run_decay_sweep(&spec, &[1.0, 0.9]))?, "decay-sweep".into());
    let ds = run_sweep(&spec)?;
    c.check(render_panels(&ds) == render_panels(&ds), "plot".into());
    Ok(c)
}

/// Runs every criterion in order.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<Criterion>> {
    let ds = precision_sweep(opts)?;
    Ok(vec![
        oracle_agreement(opts)?,
        float32_regime(&ds),
        float16_regime(&ds),
        bfloat16_regime(&ds),
        conditioning(opts)?,
        ns_termination(opts)?,
        structural_equivalences(opts)?,
        matmul_counts(opts)?,
        growth_witness()?,
        ir_efficacy(opts)?,
        determinism(opts)?,
    ])
}
