//! Dataset CSV, model files and figure tables.
//!
//! Dataset format:
//!
//! ```text
//! # d = 3
//! # F = 0.9
//! # epsilon = 0.001
//! # superactivation = 6
//! N,E_total
//! 6,1
//! 36,18.648
//! ```
//!
//! Lines starting with `#` are comments; those of the form `# key = value`
//! carry metadata. The first other non-blank line must be the header
//! `N,E_total`. Each row holds a positive integer copy count and the total
//! (not per-copy) quantifier value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::model::{ClosureSpec, EVector, ScalingModel};

pub const DATASET_HEADER: &str = "N,E_total";
pub const FIGURE_HEADER: &str = "N,model_per_copy,data_per_copy";
pub const MODEL_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_PRECISION: usize = 6;
pub const PRECISION_ENV: &str = "QADD_PRECISION";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub copies: u64,
    pub total: f64,
}

impl DataPoint {
    pub fn per_copy(&self) -> f64 {
        self.total / self.copies as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetMetadata {
    pub dimension: Option<u32>,
    pub fidelity: Option<f64>,
    pub epsilon: Option<f64>,
    pub superactivation_copies: Option<u64>,
    pub other: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub metadata: DatasetMetadata,
    points: Vec<DataPoint>,
}

impl Dataset {
    pub fn new(points: Vec<DataPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            check_point(p).map_err(Error::Invalid)?;
            if i > 0 && p.copies <= points[i - 1].copies {
                return Err(Error::Invalid(format!(
                    "copy counts must be strictly increasing (N = {} after N = {})",
                    p.copies,
                    points[i - 1].copies
                )));
            }
        }
        Ok(Self {
            metadata: DatasetMetadata::default(),
            points,
        })
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn get(&self, copies: u64) -> Option<&DataPoint> {
        self.points
            .binary_search_by_key(&copies, |p| p.copies)
            .ok()
            .map(|i| &self.points[i])
    }

    /// `(N, E/N)` pairs.
    pub fn per_copy(&self) -> Vec<(u64, f64)> {
        self.points.iter().map(|p| (p.copies, p.per_copy())).collect()
    }

    /// Places where the total decreases by more than `1e-9`.
    pub fn monotonicity_warnings(&self) -> Vec<String> {
        self.points
            .windows(2)
            .filter(|w| w[1].total < w[0].total - 1e-9)
            .map(|w| {
                format!(
                    "E_total decreases from {} at N = {} to {} at N = {}",
                    w[0].total, w[0].copies, w[1].total, w[1].copies
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        if let Some(d) = m.dimension {
            let _ = writeln!(out, "# d = {d}");
        }
        if let Some(f) = m.fidelity {
            let _ = writeln!(out, "# F = {f}");
        }
        if let Some(e) = m.epsilon {
            let _ = writeln!(out, "# epsilon = {e}");
        }
        if let Some(s) = m.superactivation_copies {
            let _ = writeln!(out, "# superactivation = {s}");
        }
        for (k, v) in &m.other {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(DATASET_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.copies, p.total);
        }
        out
    }
}

fn check_point(p: &DataPoint) -> std::result::Result<(), String> {
    if p.copies == 0 {
        return Err("N must be a positive integer".into());
    }
    if !p.total.is_finite() || p.total < 0.0 {
        return Err(format!("E_total must be finite and non-negative, got {}", p.total));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string())
}

pub fn parse_dataset(text: &str, source: &str) -> Result<LoadedDataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut metadata = DatasetMetadata::default();
    let mut header_seen = false;
    let mut points: Vec<DataPoint> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=').or_else(|| comment.split_once(':')) {
                apply_metadata(&mut metadata, key.trim(), value.trim())
                    .map_err(|m| err(line_no, m))?;
            }
            continue;
        }
        if !header_seen {
            let normalized: String = line.split(',').map(str::trim).collect::<Vec<_>>().join(",");
            if normalized != DATASET_HEADER {
                return Err(err(line_no, format!("expected header `{DATASET_HEADER}`, found `{line}`")));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(err(line_no, format!("expected 2 fields, found {}", fields.len())));
        }
        let copies: u64 = fields[0]
            .parse()
            .map_err(|_| err(line_no, format!("N `{}` is not a positive integer", fields[0])))?;
        let total: f64 = fields[1]
            .parse()
            .map_err(|_| err(line_no, format!("E_total `{}` is not a number", fields[1])))?;
        let point = DataPoint { copies, total };
        check_point(&point).map_err(|m| err(line_no, m))?;
        if let Some(prev) = points.last() {
            if copies == prev.copies {
                return Err(err(line_no, format!("duplicate N = {copies}")));
            }
            if copies < prev.copies {
                return Err(err(line_no, format!("N = {copies} is not increasing (previous {})", prev.copies)));
            }
        }
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::EmptyDataset {
            path: source.to_string(),
        });
    }
    let dataset = Dataset { metadata, points };
    let warnings = dataset.monotonicity_warnings();
    Ok(LoadedDataset { dataset, warnings })
}

fn apply_metadata(m: &mut DatasetMetadata, key: &str, value: &str) -> std::result::Result<(), String> {
    let bad = |what: &str| format!("metadata `{key}`: `{value}` is not a valid {what}");
    match key.to_ascii_lowercase().as_str() {
        "d" | "dimension" => m.dimension = Some(value.parse().map_err(|_| bad("integer"))?),
        "f" | "fidelity" => m.fidelity = Some(value.parse().map_err(|_| bad("number"))?),
        "epsilon" | "eps" => m.epsilon = Some(value.parse().map_err(|_| bad("number"))?),
        "superactivation" | "n_sa" | "superactivation_copies" => {
            m.superactivation_copies = Some(value.parse().map_err(|_| bad("integer"))?)
        }
        _ => {
            m.other.insert(key.to_string(), value.to_string());
        }
    }
    Ok(())
}

/// Versioned on-disk description of a model (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub base: u64,
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure: Option<Vec<f64>>,
    pub evector: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl ModelFile {
    pub fn from_model(model: &ScalingModel, notes: Option<String>) -> Self {
        let (exponents, closure) = match model.exponents() {
            Some(e) => (Some(e.to_vec()), None),
            None => (None, Some(model.closure().params().to_vec())),
        };
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            base: model.base(),
            q: model.order(),
            exponents,
            closure,
            evector: model.evector().values().to_vec(),
            notes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported schema version {} (expected {MODEL_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let params = match (&self.exponents, &self.closure) {
            (Some(p), None) | (None, Some(p)) => p,
            _ => {
                return Err(Error::Invalid(
                    "model file needs exactly one of `exponents` and `closure`".into(),
                ))
            }
        };
        if params.len() != self.q || self.evector.len() != self.q {
            return Err(Error::Invalid(format!(
                "q = {} but parameters have length {} and e-vector length {}",
                self.q,
                params.len(),
                self.evector.len()
            )));
        }
        Ok(())
    }

    pub fn to_model(&self) -> Result<ScalingModel> {
        self.validate()?;
        let evector = EVector::new(self.evector.clone())?;
        match (&self.exponents, &self.closure) {
            (Some(nu), _) => ScalingModel::from_exponents(self.base, nu.clone(), evector),
            (_, Some(c)) => ScalingModel::from_closure(self.base, ClosureSpec::new(c.clone())?, evector),
            _ => unreachable!("validated"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes") + "\n"
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ScalingModel> {
    ModelFile::parse(&std::fs::read_to_string(path)?)?.to_model()
}

pub fn write_model(path: impl AsRef<Path>, model: &ScalingModel, notes: Option<String>) -> Result<()> {
    std::fs::write(path, ModelFile::from_model(model, notes).to_json())?;
    Ok(())
}

/// Print precision: explicit flag, else `QADD_PRECISION`, else 6.
pub fn resolve_precision(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
    })
    .filter(|&p| p > 0)
    .unwrap_or(DEFAULT_PRECISION)
}

/// Fixed-point decimal with `sig` significant digits.
pub fn format_sig(value: f64, sig: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let sig = sig.max(1);
    let decimals = if value == 0.0 {
        sig - 1
    } else {
        let mag = value.abs().log10().floor() as i64;
        (sig as i64 - 1 - mag).clamp(0, 40) as usize
    };
    format!("{value:.decimals$}")
}

/// Table `N,model_per_copy,data_per_copy` over integer `N` in `range`, with
/// the data column blank where the dataset has no point.
pub fn emit_figure_data(
    model: &ScalingModel,
    dataset: Option<&Dataset>,
    range: RangeInclusive<u64>,
    precision: usize,
) -> Result<String> {
    if let Some(sa) = dataset.and_then(|d| d.metadata.superactivation_copies) {
        if sa != model.base() {
            return Err(Error::Invalid(format!(
                "dataset superactivation copies {sa} differ from model base {}",
                model.base()
            )));
        }
    }
    if *range.start() == 0 {
        return Err(Error::Invalid("copy range must start at 1 or above".into()));
    }
    let cf = ClosedForm::for_model(model)?;
    let e = model.evector().values();
    let mut out = String::from(FIGURE_HEADER);
    out.push('\n');
    for n in range {
        let value = cf.eval(e, n as f64)? / n as f64;
        let data = dataset
            .and_then(|d| d.get(n))
            .map(|p| format_sig(p.per_copy(), precision))
            .unwrap_or_default();
        let _ = writeln!(out, "{n},{},{data}", format_sig(value, precision));
    }
    Ok(out)
}
