//! Versioned CSV datasets.
//!
//! The first line is `# trinv-csv v1 kind=<kind>`, followed by a CSV header
//! and one row per (trial, size, format, method) cell. Median rows use the
//! literal seed `median` and come after the trial rows.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{median, ErrorReport};

pub const MAGIC: &str = "# trinv-csv v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetKind {
    Sweep,
    NsSweep,
    DecaySweep,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sweep => "sweep",
            Self::NsSweep => "ns-sweep",
            Self::DecaySweep => "decay-sweep",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sweep" => Ok(Self::Sweep),
            "ns-sweep" => Ok(Self::NsSweep),
            "decay-sweep" => Ok(Self::DecaySweep),
            _ => Err(Error::Dataset(format!("unknown dataset kind `{s}`"))),
        }
    }
}

/// `None` marks an aggregate (median) row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeedTag(pub Option<u64>);

impl SeedTag {
    pub fn is_median(self) -> bool {
        self.0.is_none()
    }
}

impl Serialize for SeedTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_str("median"),
        }
    }
}

impl<'de> Deserialize<'de> for SeedTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "median" {
            return Ok(Self(None));
        }
        s.parse().map(|v| Self(Some(v))).map_err(serde::de::Error::custom)
    }
}

/// Floats are written with the shortest round-trip representation.
mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:e}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }

    pub mod opt {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_str(&format!("{v}")),
                None => s.serialize_str(""),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            let s = String::deserialize(d)?;
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub method: String,
    pub n: usize,
    pub format: String,
    pub seed: SeedTag,
    #[serde(with = "float")]
    pub max_abs: f64,
    #[serde(with = "float")]
    pub max_rel: f64,
    #[serde(with = "float")]
    pub frob_rel: f64,
    #[serde(with = "float")]
    pub residual: f64,
    pub nonfinite: usize,
    #[serde(with = "float::opt", default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub m: Option<usize>,
}

impl Row {
    pub fn from_report(method: String, n: usize, format: String, seed: u64, r: &ErrorReport) -> Self {
        Self {
            method,
            n,
            format,
            seed: SeedTag(Some(seed)),
            max_abs: r.max_abs,
            max_rel: r.max_rel,
            frob_rel: r.frob_rel,
            residual: r.residual,
            nonfinite: r.nonfinite,
            gamma: None,
            m: None,
        }
    }

    /// Same cell, ignoring the seed.
    fn cell(&self) -> (String, usize, String, Option<u64>, Option<usize>) {
        (self.method.clone(), self.n, self.format.clone(), self.gamma.map(f64::to_bits), self.m)
    }

    /// Columns shared by every dataset kind.
    pub fn core(&self) -> (&str, usize, &str, SeedTag, [u64; 4], usize) {
        let bits = [self.max_abs, self.max_rel, self.frob_rel, self.residual].map(f64::to_bits);
        (&self.method, self.n, &self.format, self.seed, bits, self.nonfinite)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub kind: DatasetKind,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(kind: DatasetKind, rows: Vec<Row>) -> Self {
        Self { kind, rows }
    }

    fn columns(&self) -> &'static [&'static str] {
        const BASE: &[&str] = &[
            "method", "n", "format", "seed", "max_abs", "max_rel", "frob_rel", "residual", "nonfinite",
        ];
        const DECAY: &[&str] = &[
            "method", "n", "format", "seed", "max_abs", "max_rel", "frob_rel", "residual", "nonfinite", "gamma",
        ];
        const NS: &[&str] = &[
            "method", "n", "format", "seed", "max_abs", "max_rel", "frob_rel", "residual", "nonfinite", "m",
        ];
        match self.kind {
            DatasetKind::Sweep => BASE,
            DatasetKind::DecaySweep => DECAY,
            DatasetKind::NsSweep => NS,
        }
    }

    pub fn trial_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.seed.is_median())
    }

    pub fn median_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.seed.is_median())
    }

    /// Appends one median row per cell, in order of first appearance.
    /// `nonfinite` on a median row counts the trials with non-finite output.
    pub fn append_medians(&mut self) {
        let mut cells: Vec<((String, usize, String, Option<u64>, Option<usize>), Vec<&Row>)> = Vec::new();
        for r in self.trial_rows() {
            let key = r.cell();
            match cells.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(r),
                None => cells.push((key, vec![r])),
            }
        }
        let med: Vec<Row> = cells
            .into_iter()
            .map(|(_, rows)| {
                let pick = |f: fn(&Row) -> f64| median(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
                Row {
                    seed: SeedTag(None),
                    max_abs: pick(|r| r.max_abs),
                    max_rel: pick(|r| r.max_rel),
                    frob_rel: pick(|r| r.frob_rel),
                    residual: pick(|r| r.residual),
                    nonfinite: rows.iter().filter(|r| r.nonfinite > 0).count(),
                    ..rows[0].clone()
                }
            })
            .collect();
        self.rows.extend(med);
    }

    /// Median row for a cell, if present.
    pub fn median_of(&self, method: &str, n: usize, format: &str) -> Option<&Row> {
        self.median_rows().find(|r| r.method == method && r.n == n && r.format == format)
    }

    pub fn write_to(&self, out: impl Write) -> Result<()> {
        let mut out = out;
        writeln!(out, "{MAGIC} kind={}", self.kind)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(self.columns())?;
        for r in &self.rows {
            let mut rec = vec![
                r.method.clone(),
                r.n.to_string(),
                r.format.clone(),
                match r.seed.0 {
                    Some(s) => s.to_string(),
                    None => "median".into(),
                },
                format!("{:e}", r.max_abs),
                format!("{:e}", r.max_rel),
                format!("{:e}", r.frob_rel),
                format!("{:e}", r.residual),
                r.nonfinite.to_string(),
            ];
            match self.kind {
                DatasetKind::Sweep => {}
                DatasetKind::DecaySweep => rec.push(r.gamma.map(|g| g.to_string()).unwrap_or_default()),
                DatasetKind::NsSweep => rec.push(r.m.map(|m| m.to_string()).unwrap_or_default()),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from(input: impl Read) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let first = first.trim_end();
        let rest = first
            .strip_prefix(MAGIC)
            .ok_or_else(|| Error::Dataset(format!("missing `{MAGIC}` header line")))?;
        let kind = rest
            .trim()
            .strip_prefix("kind=")
            .ok_or_else(|| Error::Dataset("header line lacks kind=".into()))?
            .parse()?;
        let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            rows.push(rec?);
        }
        let ds = Self { kind, rows };
        let headers = rdr.headers()?.iter().map(str::to_string).collect::<Vec<_>>();
        if headers != ds.columns() {
            return Err(Error::Dataset(format!("unexpected columns {headers:?}")));
        }
        Ok(ds)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}
