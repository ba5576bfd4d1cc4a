use std::fmt;
use std::str::FromStr;

use super::{InitialGuess, Method};
use crate::error::{Error, Result};

/// Parameters filled in for bare `MXR` and `NS` labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodDefaults {
    pub b0: usize,
    pub r: usize,
    pub ns_steps: usize,
    pub x0: InitialGuess,
}

impl Default for MethodDefaults {
    fn default() -> Self {
        Self { b0: 16, r: 0, ns_steps: 12, x0: InitialGuess::InverseDim }
    }
}

impl fmt::Display for InitialGuess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("I"),
            Self::InverseDim => f.write_str("1/n"),
            Self::Scaled(c) => write!(f, "{c}"),
        }
    }
}

impl FromStr for InitialGuess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "identity" => Ok(Self::Identity),
            "1/n" | "inv_n" | "invn" => Ok(Self::InverseDim),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite() && *c > 0.0)
                .map(Self::Scaled)
                .ok_or_else(|| Error::InvalidParameter(format!("bad initial guess {s:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vcs => f.write_str("VCS"),
            Self::Mcs => f.write_str("MCS"),
            Self::Mch => f.write_str("MCH"),
            Self::Mbh => f.write_str("MBH"),
            Self::Mxr { b0: 16, r: 0 } => f.write_str("MXR"),
            Self::Mxr { b0: 16, r: 1 } => f.write_str("MXR+IR"),
            Self::Mxr { b0, r } => write!(f, "MXR(b0={b0},r={r})"),
            Self::Ns { m, x0: InitialGuess::InverseDim } => write!(f, "NS-{m}"),
            Self::Ns { m, x0 } => write!(f, "NS(m={m},x0={x0})"),
            Self::Refined(inner) => write!(f, "IR({inner})"),
        }
    }
}

impl Method {
    /// Parses a method label. Bare `MXR`, `MXR+IR` and `NS` take their
    /// parameters from `defaults`.
    pub fn parse_with(s: &str, defaults: MethodDefaults) -> Result<Self> {
        let s = s.trim();
        let upper = s.to_ascii_uppercase();
        let bad = || Error::UnknownMethod(s.to_string());
        if let Some(inner) = upper.strip_prefix("IR(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Self::Refined(Box::new(Self::parse_with(inner, defaults)?)));
        }
        match upper.as_str() {
            "VCS" => return Ok(Self::Vcs),
            "MCS" => return Ok(Self::Mcs),
            "MCH" => return Ok(Self::Mch),
            "MBH" => return Ok(Self::Mbh),
            "MXR" => return Ok(Self::Mxr { b0: defaults.b0, r: defaults.r }),
            "MXR+IR" => return Ok(Self::Mxr { b0: defaults.b0, r: defaults.r.max(1) }),
            "NS" => return Ok(Self::Ns { m: defaults.ns_steps, x0: defaults.x0 }),
            _ => {}
        }
        if let Some(m) = upper.strip_prefix("NS-") {
            let m = m.parse().map_err(|_| bad())?;
            return Ok(Self::Ns { m, x0: defaults.x0 });
        }
        let (head, args) = upper
            .strip_suffix(')')
            .and_then(|r| r.split_once('('))
            .ok_or_else(bad)?;
        let mut kv = Vec::new();
        for part in args.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            kv.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        let num = |v: &str| v.parse::<usize>().map_err(|_| bad());
        match head.trim() {
            "MXR" => {
                let (mut b0, mut r) = (defaults.b0, defaults.r);
                for (k, v) in &kv {
                    match k.as_str() {
                        "b0" => b0 = num(v)?,
                        "r" => r = num(v)?,
                        _ => return Err(bad()),
                    }
                }
                Ok(Self::Mxr { b0, r })
            }
            "NS" => {
                let (mut m, mut x0) = (defaults.ns_steps, defaults.x0);
                for (k, v) in &kv {
                    match k.as_str() {
                        "m" => m = num(v)?,
                        "x0" => x0 = v.parse()?,
                        _ => return Err(bad()),
                    }
                }
                Ok(Self::Ns { m, x0 })
            }
            _ => Err(bad()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with(s, MethodDefaults::default())
    }
}

/// Comma-separated method labels. Commas inside parentheses stay with their label.
pub fn parse_method_list(s: &str, defaults: MethodDefaults) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(Method::parse_with(&s[start..i], defaults)?);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(Method::parse_with(&s[start..], defaults)?);
    }
    if out.is_empty() {
        return Err(Error::UnknownMethod(s.to_string()));
    }
    Ok(out)
}
