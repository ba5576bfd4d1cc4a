use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use trinv::harness::{
    emit_plots, run_all, run_decay_sweep, run_ns_iteration_sweep, run_sweep, with_thread_cap, Dataset,
    SweepConfig, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "trinv", version, about = "Accuracy sweeps for unit lower triangular inversion")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Error of every method across sizes and formats.
    Sweep(SweepArgs),
    /// Newton–Schulz error against iteration count.
    NsSweep {
        #[command(flatten)]
        common: SweepArgs,
        /// Iteration counts, e.g. `0,2,4,6,8,10,12,14`.
        #[arg(long)]
        m_values: Option<String>,
        /// Initial guess: `I`, `1/n` or a scale factor.
        #[arg(long)]
        x0: Option<String>,
    },
    /// The sweep repeated under per-step decay factors.
    DecaySweep {
        #[command(flatten)]
        common: SweepArgs,
        /// Decay factors in (0, 1].
        #[arg(long)]
        gammas: Option<String>,
    },
    /// Render SVG panels from a dataset.
    Plot {
        input: PathBuf,
        /// Output directory (defaults to the dataset's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite; exits nonzero if any check fails.
    Verify {
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print every measurement, not only the summary lines.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Args, Clone, Default)]
struct SweepArgs {
    /// Comma-separated matrix sizes.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated formats (fp16, bf16, fp32, fp64).
    #[arg(long)]
    formats: Option<String>,
    /// Comma-separated method labels, e.g. `VCS,MCH,MXR(b0=8,r=1),NS-12`.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Key head dimension (defaults to n).
    #[arg(long)]
    d: Option<usize>,
    /// Base block size for bare `MXR`.
    #[arg(long)]
    b0: Option<usize>,
    /// Refinement steps for bare `MXR`.
    #[arg(long)]
    refine: Option<usize>,
    /// Generator, e.g. `kind=deltanet,sampler=isotropic` or `kind=gaussian`.
    #[arg(long)]
    generator: Option<String>,
    /// Accumulation format (defaults to fp32, or fp64 for fp64 input).
    #[arg(long)]
    accumulate: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with the same keys; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|_| anyhow::anyhow!("bad {what} `{p}`")))
        .collect()
}

impl SweepArgs {
    fn resolve(&self, extra: SweepConfig) -> anyhow::Result<SweepConfig> {
        let file = match &self.config {
            Some(p) => SweepConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => SweepConfig::default(),
        };
        let flags = SweepConfig {
            generator: self.generator.clone(),
            sizes: self.sizes.as_deref().map(|s| list(s, "size")).transpose()?,
            formats: self.formats.as_deref().map(|s| list(s, "format")).transpose()?,
            methods: self.methods.clone().map(|m| vec![m]),
            trials: self.trials,
            seed: self.seed,
            d: self.d,
            b0: self.b0,
            refine: self.refine,
            accumulate: self.accumulate.clone(),
            out: self.out.clone(),
            ..extra
        };
        Ok(file.overlay(flags))
    }
}

fn write_dataset(ds: &Dataset, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            ds.save(p).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("wrote {} rows to {}", ds.rows.len(), p.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            ds.write_to(&mut stdout)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.verb {
        Verb::Sweep(args) => {
            let cfg = args.resolve(SweepConfig::default())?;
            let spec = cfg.experiment()?;
            let ds = with_thread_cap(|| run_sweep(&spec))?;
            write_dataset(&ds, cfg.out.as_ref())?;
        }
        Verb::NsSweep { common, m_values, x0 } => {
            let extra = SweepConfig {
                m_values: m_values.as_deref().map(|s| list(s, "iteration count")).transpose()?,
                x0,
                ..Default::default()
            };
            let cfg = common.resolve(extra)?;
            if cfg.methods.is_some() {
                bail!("ns-sweep takes --m-values, not --methods");
            }
            let spec = cfg.ns_sweep()?;
            let ds = with_thread_cap(|| run_ns_iteration_sweep(&spec))?;
            write_dataset(&ds, cfg.out.as_ref())?;
        }
        Verb::DecaySweep { common, gammas } => {
            let extra = SweepConfig {
                gammas: gammas.as_deref().map(|s| list(s, "decay factor")).transpose()?,
                ..Default::default()
            };
            let cfg = common.resolve(extra)?;
            let spec = cfg.experiment()?;
            let gammas = cfg.gamma_list();
            let ds = with_thread_cap(|| run_decay_sweep(&spec, &gammas))?;
            write_dataset(&ds, cfg.out.as_ref())?;
        }
        Verb::Plot { input, out } => {
            let ds = Dataset::load(&input).with_context(|| format!("reading {}", input.display()))?;
            let dir = out.unwrap_or_else(|| input.parent().map(PathBuf::from).unwrap_or_default());
            let res = emit_plots(&ds, &dir)?;
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            for f in &res.files {
                println!("{}", f.display());
            }
        }
        Verb::Verify { trials, seed, verbose } => {
            let opts = VerifyOptions { trials, seed, ..Default::default() };
            let results = with_thread_cap(|| run_all(&opts))?;
            let mut ok = true;
            for c in &results {
                println!("{c}");
                if verbose {
                    for d in &c.details {
                        println!("      {d}");
                    }
                }
                ok &= c.passed;
            }
            let passed = results.iter().filter(|c| c.passed).count();
            println!("{passed}/{} criteria passed", results.len());
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
