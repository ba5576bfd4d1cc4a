//! Declarative sweep configuration. Every key is optional; CLI flags
//! override whatever the file sets.
//!
//! ```toml
//! generator = "kind=deltanet,sampler=orthant"
//! sizes = [16, 32, 64, 128]
//! formats = ["fp16", "bf16", "fp32"]
//! methods = ["VCS", "MCH", "MXR", "NS-12"]
//! trials = 50
//! seed = 0
//! b0 = 16
//! refine = 0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::sweep::{default_methods, ExperimentSpec, NsSweepSpec};
use crate::algos::{parse_method_list, MethodDefaults};
use crate::error::{Error, Result};
use crate::fpsim::FloatFormat;
use crate::gen::{Family, GeneratorSpec};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub generator: Option<String>,
    pub sizes: Option<Vec<usize>>,
    pub formats: Option<Vec<String>>,
    pub methods: Option<Vec<String>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// Head dimension for DeltaNet keys.
    pub d: Option<usize>,
    pub b0: Option<usize>,
    pub refine: Option<usize>,
    pub accumulate: Option<String>,
    pub out: Option<PathBuf>,
    pub gammas: Option<Vec<f64>>,
    pub m_values: Option<Vec<usize>>,
    pub x0: Option<String>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: SweepConfig) -> SweepConfig {
        macro_rules! pick {
            ($($f:ident),*) => { SweepConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(generator, sizes, formats, methods, trials, seed, d, b0, refine, accumulate, out, gammas, m_values, x0)
    }

    fn generator_spec(&self) -> Result<GeneratorSpec> {
        let mut g: GeneratorSpec = match &self.generator {
            Some(s) => s.parse()?,
            None => GeneratorSpec::default(),
        };
        if let (Some(d), Family::DeltaNet { d: slot, .. }) = (self.d, &mut g.family) {
            *slot = Some(d);
        }
        Ok(g)
    }

    fn format_list(&self, default: &[FloatFormat]) -> Result<Vec<FloatFormat>> {
        match &self.formats {
            Some(v) => v.iter().map(|s| s.parse()).collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn accumulate_format(&self) -> Result<Option<FloatFormat>> {
        self.accumulate.as_deref().map(str::parse).transpose()
    }

    fn method_defaults(&self) -> Result<MethodDefaults> {
        let mut d = MethodDefaults::default();
        if let Some(b0) = self.b0 {
            d.b0 = b0;
        }
        if let Some(r) = self.refine {
            d.r = r;
        }
        if let Some(x0) = &self.x0 {
            d.x0 = x0.parse()?;
        }
        Ok(d)
    }

    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let base = ExperimentSpec::default();
        let defaults = self.method_defaults()?;
        let methods = match &self.methods {
            Some(v) => parse_method_list(&v.join(","), defaults)?,
            None if self.b0.is_some() || self.refine.is_some() => {
                parse_method_list("VCS,MCS,MCH,MBH,MXR,MXR+IR,NS", defaults)?
            }
            None => default_methods(),
        };
        let spec = ExperimentSpec {
            generator: self.generator_spec()?,
            sizes: self.sizes.clone().unwrap_or(base.sizes),
            formats: self.format_list(&base.formats)?,
            methods,
            trials: self.trials.unwrap_or(base.trials),
            seed: self.seed.unwrap_or(base.seed),
            accumulate: self.accumulate_format()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ns_sweep(&self) -> Result<NsSweepSpec> {
        let base = NsSweepSpec::default();
        let x0 = match &self.x0 {
            Some(s) => s.parse()?,
            None => base.x0,
        };
        Ok(NsSweepSpec {
            generator: self.generator_spec()?,
            sizes: self.sizes.clone().unwrap_or(base.sizes),
            formats: self.format_list(&base.formats)?,
            m_values: self.m_values.clone().unwrap_or(base.m_values),
            x0,
            trials: self.trials.unwrap_or(base.trials),
            seed: self.seed.unwrap_or(base.seed),
            accumulate: self.accumulate_format()?,
        })
    }

    pub fn gamma_list(&self) -> Vec<f64> {
        self.gammas.clone().unwrap_or_else(|| vec![1.0, 0.99, 0.95, 0.9])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algos::{InitialGuess, Method};

    #[test]
    fn file_then_flags() {
        let file = SweepConfig::parse("sizes = [16]\ntrials = 4\nformats = [\"fp16\"]\nb0 = 8\nmethods = [\"MXR\"]\n").unwrap();
        let flags = SweepConfig { trials: Some(2), ..Default::default() };
        let spec = file.overlay(flags).experiment().unwrap();
        assert_eq!(spec.sizes, vec![16]);
        assert_eq!(spec.trials, 2);
        assert_eq!(spec.formats, vec![FloatFormat::FP16]);
        assert_eq!(spec.methods, vec![Method::Mxr { b0: 8, r: 0 }]);
    }

    #[test]
    fn head_dim_reaches_generator() {
        let c = SweepConfig { d: Some(8), ..Default::default() };
        match c.experiment().unwrap().generator.family {
            Family::DeltaNet { d, .. } => assert_eq!(d, Some(8)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_values_fail() {
        assert!(SweepConfig::parse("sizez = [1]").is_err());
        let c = SweepConfig { formats: Some(vec!["fp8".into()]), ..Default::default() };
        assert!(c.experiment().is_err());
        let c = SweepConfig { methods: Some(vec!["LU".into()]), ..Default::default() };
        assert!(c.experiment().is_err());
    }

    #[test]
    fn ns_defaults() {
        let s = SweepConfig::default().ns_sweep().unwrap();
        assert_eq!(s.sizes, vec![64]);
        assert_eq!(s.m_values.len(), 15);
        let s = SweepConfig { x0: Some("I".into()), ..Default::default() }.ns_sweep().unwrap();
        assert_eq!(s.x0, InitialGuess::Identity);
    }
}
