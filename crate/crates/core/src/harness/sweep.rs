//! Seeded accuracy sweeps.

use rayon::prelude::*;

use super::dataset::{Dataset, DatasetKind, Row};
use crate::algos::{AlgorithmConfig, InitialGuess, Method};
use crate::error::{Error, Result};
use crate::fpsim::{quantize, FloatFormat, PrecisionPolicy};
use crate::gen::GeneratorSpec;
use crate::matrix::TriMatrix;
use crate::metrics::{error_report, reference_inverse};

/// One sweep: every (trial, size, format, method) cell produces one row.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub generator: GeneratorSpec,
    pub sizes: Vec<usize>,
    pub formats: Vec<FloatFormat>,
    pub methods: Vec<Method>,
    pub trials: usize,
    /// Trial `t` draws its matrix with seed `seed + t`.
    pub seed: u64,
    /// Accumulation format; `None` picks [`PrecisionPolicy::for_input`].
    pub accumulate: Option<FloatFormat>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            generator: GeneratorSpec::default(),
            sizes: vec![16, 32, 64, 128],
            formats: vec![FloatFormat::FP16, FloatFormat::BF16, FloatFormat::FP32],
            methods: default_methods(),
            trials: 50,
            seed: 0,
            accumulate: None,
        }
    }
}

pub fn default_methods() -> Vec<Method> {
    vec![
        Method::Vcs,
        Method::Mcs,
        Method::Mch,
        Method::Mbh,
        Method::Mxr { b0: 16, r: 0 },
        Method::Mxr { b0: 16, r: 1 },
        Method::Ns { m: 12, x0: InitialGuess::InverseDim },
    ]
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.formats.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidParameter("sizes, formats and methods must be nonempty".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidParameter(format!("bad size {n}")));
        }
        for &f in &self.formats {
            self.policy(f)?;
        }
        Ok(())
    }

    pub fn policy(&self, input: FloatFormat) -> Result<PrecisionPolicy> {
        match self.accumulate {
            Some(acc) => PrecisionPolicy::new(input, acc),
            None => Ok(PrecisionPolicy::for_input(input)),
        }
    }

    pub fn expected_rows(&self) -> usize {
        self.trials * self.sizes.len() * self.formats.len() * self.methods.len()
    }
}

/// Runs `f` on a pool capped by `TRINV_THREADS` when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("TRINV_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    match cap {
        Some(k) if k > 0 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Rows for one generated matrix: formats outer, methods inner.
fn cell_rows(
    a: &TriMatrix,
    seed: u64,
    spec: &ExperimentSpec,
    methods: &[Method],
) -> Result<Vec<Row>> {
    let mut rows = Vec::with_capacity(spec.formats.len() * methods.len());
    for &fmt in &spec.formats {
        let aq = quantize(a, fmt);
        let truth = reference_inverse(&aq)?;
        let policy = spec.policy(fmt)?;
        for m in methods {
            let out = AlgorithmConfig::new(m.clone(), policy).run(&aq)?;
            let report = error_report(&truth, &out.matrix, Some(&aq))?;
            rows.push(Row::from_report(m.to_string(), a.n(), fmt.name(), seed, &report));
        }
    }
    Ok(rows)
}

/// Trial-major, then size: the canonical row order.
fn run_cells(
    spec: &ExperimentSpec,
    generator: &GeneratorSpec,
    methods: &[Method],
) -> Result<Vec<Row>> {
    let jobs: Vec<(usize, usize)> =
        (0..spec.trials).flat_map(|t| spec.sizes.iter().map(move |&n| (t, n))).collect();
    let chunks = with_thread_cap(|| {
        jobs.par_iter()
            .map(|&(t, n)| {
                let seed = spec.seed.wrapping_add(t as u64);
                let a = generator.generate(n, seed)?;
                cell_rows(&a, seed, spec, methods)
            })
            .collect::<Vec<Result<Vec<Row>>>>()
    });
    let mut rows = Vec::with_capacity(spec.expected_rows());
    for c in chunks {
        rows.extend(c?);
    }
    Ok(rows)
}

pub fn run_sweep(spec: &ExperimentSpec) -> Result<Dataset> {
    spec.validate()?;
    let rows = run_cells(spec, &spec.generator, &spec.methods)?;
    let mut ds = Dataset::new(DatasetKind::Sweep, rows);
    ds.append_medians();
    Ok(ds)
}

/// Newton–Schulz error against iteration count.
#[derive(Clone, Debug, PartialEq)]
pub struct NsSweepSpec {
    pub generator: GeneratorSpec,
    pub sizes: Vec<usize>,
    pub formats: Vec<FloatFormat>,
    pub m_values: Vec<usize>,
    pub x0: InitialGuess,
    pub trials: usize,
    pub seed: u64,
    pub accumulate: Option<FloatFormat>,
}

impl Default for NsSweepSpec {
    fn default() -> Self {
        Self {
            generator: GeneratorSpec::default(),
            sizes: vec![64],
            formats: vec![FloatFormat::FP32],
            m_values: (0..=14).collect(),
            x0: InitialGuess::InverseDim,
            trials: 50,
            seed: 0,
            accumulate: None,
        }
    }
}

pub fn run_ns_iteration_sweep(spec: &NsSweepSpec) -> Result<Dataset> {
    if spec.m_values.is_empty() {
        return Err(Error::InvalidParameter("m_values must be nonempty".into()));
    }
    let methods: Vec<Method> = spec.m_values.iter().map(|&m| Method::Ns { m, x0: spec.x0 }).collect();
    let inner = ExperimentSpec {
        generator: spec.generator.clone(),
        sizes: spec.sizes.clone(),
        formats: spec.formats.clone(),
        methods,
        trials: spec.trials,
        seed: spec.seed,
        accumulate: spec.accumulate,
    };
    inner.validate()?;
    let mut rows = run_cells(&inner, &inner.generator, &inner.methods)?;
    let per_row = spec.m_values.len();
    for (i, r) in rows.iter_mut().enumerate() {
        r.m = Some(spec.m_values[i % per_row]);
    }
    let mut ds = Dataset::new(DatasetKind::NsSweep, rows);
    ds.append_medians();
    Ok(ds)
}

/// Repeats `spec` once per decay factor, `γ` outermost.
pub fn run_decay_sweep(spec: &ExperimentSpec, gammas: &[f64]) -> Result<Dataset> {
    spec.validate()?;
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("gammas must be nonempty".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
        return Err(Error::InvalidParameter(format!("decay factor {g} outside (0, 1]")));
    }
    let mut rows = Vec::new();
    for &g in gammas {
        let generator = spec.generator.with_gamma(g);
        let mut part = run_cells(spec, &generator, &spec.methods)?;
        for r in &mut part {
            r.gamma = Some(g);
        }
        rows.extend(part);
    }
    let mut ds = Dataset::new(DatasetKind::DecaySweep, rows);
    ds.append_medians();
    Ok(ds)
}
