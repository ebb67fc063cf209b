//! Result rows and their CSV and JSON encodings.
//!
//! Nothing that varies between identical runs (worker count, timing) is
//! written, so outputs can be compared byte for byte.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::Format;

pub const SCHEMA: u32 = 1;

pub const COLUMNS: [&str; 14] = [
    "engine",
    "manifold",
    "quantity",
    "k",
    "n",
    "alpha",
    "value",
    "uncertainty",
    "seed",
    "reduced",
    "reduced_uncertainty",
    "agreement",
    "target",
    "exact",
];

/// One output line. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub engine: &'static str,
    pub manifold: String,
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_uncertainty: Option<f64>,
    /// Absolute difference from the cross-check value of the same quantity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Exact rational form of `value`, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl Row {
    pub fn new(engine: &'static str, manifold: &str, quantity: &str, value: f64) -> Self {
        Self {
            engine,
            manifold: manifold.into(),
            quantity: quantity.into(),
            k: None,
            n: None,
            alpha: None,
            value,
            uncertainty: None,
            seed: None,
            reduced: None,
            reduced_uncertainty: None,
            agreement: None,
            target: None,
            exact: None,
        }
    }

    fn cells(&self) -> [String; 14] {
        fn opt<T: ToString>(x: &Option<T>) -> String {
            x.as_ref().map_or_else(String::new, T::to_string)
        }
        [
            self.engine.into(),
            self.manifold.clone(),
            self.quantity.clone(),
            opt(&self.k),
            opt(&self.n),
            opt(&self.alpha),
            self.value.to_string(),
            opt(&self.uncertainty),
            opt(&self.seed),
            opt(&self.reduced),
            opt(&self.reduced_uncertainty),
            opt(&self.agreement),
            opt(&self.target),
            opt(&self.exact),
        ]
    }
}

/// A fitted `1/N` coefficient, repeated at the top level of JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub k: u32,
    pub value: f64,
    pub stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub fits: Vec<FitSummary>,
}

impl Report {
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> Vec<u8> {
        let mut buf = format!("# schema={SCHEMA}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(COLUMNS).expect("write to memory");
            for r in &self.rows {
                w.write_record(r.cells()).expect("write to memory");
            }
            w.flush().expect("write to memory");
        }
        buf
    }

    fn json(&self) -> Vec<u8> {
        // serde_json maps are ordered by key, so this is canonical
        let mut v = json!({ "schema": SCHEMA, "rows": self.rows });
        if !self.fits.is_empty() {
            v["fitted_c1"] = serde_json::to_value(&self.fits).expect("fits serialize");
        }
        let mut out = serde_json::to_vec_pretty(&v).expect("value serializes");
        out.push(b'\n');
        out
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
