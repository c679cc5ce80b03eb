//! JSON file formats for matrices, product vectors and run reports.
//!
//! Matrix entries are written with 17 significant digits so every `f64`
//! survives a write/read cycle unchanged.

use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;

use crate::bases::LocalBasisDecomposition;
use crate::error::{Error, Result};
use crate::fef::FefResult;
use crate::linalg::{ComplexMatrix, C64};
use crate::measure::EstimateReport;
use crate::optimality::{OptimalityCertificate, ProductVector};
use crate::states::DensityMatrix;
use crate::witness::{Detection, ValidationReport, WitnessKind, WitnessOperator};

pub const SCHEMA_VERSION: &str = "1.0";
pub const INDEX_CONVENTION: &str = "row-major; composite index a*dB + b; subsystem A is the first tensor factor";

/// Scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn precise_raw(x: f64) -> std::result::Result<Box<RawValue>, serde_json::Error> {
    if !x.is_finite() {
        return Err(serde::ser::Error::custom("non-finite matrix entry"));
    }
    RawValue::from_string(format_f64(x))
}

fn serialize_rows<S: Serializer>(rows: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut outer = s.serialize_seq(Some(rows.len()))?;
    for row in rows {
        let raw: Vec<Box<RawValue>> = row.iter().map(|&x| precise_raw(x)).collect::<std::result::Result<_, _>>().map_err(serde::ser::Error::custom)?;
        outer.serialize_element(&raw)?;
    }
    outer.end()
}

fn split(m: &ComplexMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].re).collect()).collect();
    let im = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].im).collect()).collect();
    (re, im)
}

fn join(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<ComplexMatrix> {
    let rows = re.len();
    if im.len() != rows {
        return Err(Error::Format(format!("re has {rows} rows, im has {}", im.len())));
    }
    let cols = re.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows * cols);
    for (r, (a, b)) in re.iter().zip(im).enumerate() {
        if a.len() != cols || b.len() != cols {
            return Err(Error::Format(format!("ragged row {r}")));
        }
        data.extend(a.iter().zip(b).map(|(&x, &y)| C64::new(x, y)));
    }
    ComplexMatrix::from_vec(rows, cols, data)
}

/// `#[serde(with)]` helper writing a matrix as `{rows, cols, re, im}`.
pub mod matrix_serde {
    use super::*;

    #[derive(Serialize)]
    struct Out {
        rows: usize,
        cols: usize,
        #[serde(serialize_with = "serialize_rows")]
        re: Vec<Vec<f64>>,
        #[serde(serialize_with = "serialize_rows")]
        im: Vec<Vec<f64>>,
    }

    #[derive(Deserialize)]
    struct In {
        rows: usize,
        cols: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (re, im) = split(m);
        Out { rows: m.rows(), cols: m.cols(), re, im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let raw = In::deserialize(d)?;
        let m = join(&raw.re, &raw.im).map_err(serde::de::Error::custom)?;
        if m.rows() != raw.rows || m.cols() != raw.cols {
            return Err(serde::de::Error::custom("matrix shape disagrees with rows/cols"));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    State,
    Witness,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub schema_version: String,
    pub kind: MatrixKind,
    /// `[dA, dB]` for bipartite operators, `[n]` otherwise.
    pub dims: Vec<usize>,
    #[serde(serialize_with = "serialize_rows")]
    pub re: Vec<Vec<f64>>,
    #[serde(serialize_with = "serialize_rows")]
    pub im: Vec<Vec<f64>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl MatrixFile {
    pub fn from_matrix(kind: MatrixKind, dims: Vec<usize>, m: &ComplexMatrix) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || n != m.rows() || !m.is_square() {
            return Err(Error::DimensionMismatch(format!("dims {dims:?} for a {}x{} matrix", m.rows(), m.cols())));
        }
        let (re, im) = split(m);
        let mut metadata = BTreeMap::new();
        metadata.insert("index_convention".to_string(), Value::from(INDEX_CONVENTION));
        Ok(Self { schema_version: SCHEMA_VERSION.to_string(), kind, dims, re, im, metadata })
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Checks shapes and returns the matrix.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let m = join(&self.re, &self.im)?;
        let n: usize = self.dims.iter().product();
        if self.dims.is_empty() || m.rows() != n || m.cols() != n {
            return Err(Error::Format(format!("dims {:?} do not match a {}x{} matrix", self.dims, m.rows(), m.cols())));
        }
        Ok(m)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported schema_version {}", f.schema_version)));
        }
        f.to_matrix()?;
        Ok(f)
    }

    /// Pretty JSON with one matrix row per line.
    pub fn to_json(&self) -> Result<String> {
        let fmt = |e: serde_json::Error| Error::Format(e.to_string());
        let rows = |m: &[Vec<f64>]| -> Result<String> {
            let lines = m
                .iter()
                .map(|row| {
                    let cells = row.iter().map(|&x| precise_raw(x).map(|r| r.get().to_string())).collect::<std::result::Result<Vec<_>, _>>();
                    cells.map(|c| format!("    [{}]", c.join(", ")))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(fmt)?;
            Ok(format!("[\n{}\n  ]", lines.join(",\n")))
        };
        let metadata = serde_json::to_string_pretty(&self.metadata).map_err(fmt)?.replace('\n', "\n  ");
        Ok(format!(
            "{{\n  \"schema_version\": {},\n  \"kind\": {},\n  \"dims\": {},\n  \"metadata\": {},\n  \"re\": {},\n  \"im\": {}\n}}\n",
            serde_json::to_string(&self.schema_version).map_err(fmt)?,
            serde_json::to_string(&self.kind).map_err(fmt)?,
            serde_json::to_string(&self.dims).map_err(fmt)?,
            metadata,
            rows(&self.re)?,
            rows(&self.im)?,
        ))
    }

    fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            &[a, b] => Ok((a, b)),
            other => Err(Error::Format(format!("expected bipartite dims [dA, dB], got {other:?}"))),
        }
    }

    pub fn meta_str(&self, key: &str) -> Option<&str> {
        self.metadata.get(key).and_then(Value::as_str)
    }
}

pub fn witness_to_file(w: &WitnessOperator) -> Result<MatrixFile> {
    let kind = match w.kind {
        WitnessKind::Entanglement => "entanglement",
        WitnessKind::Teleportation => "teleportation",
    };
    Ok(MatrixFile::from_matrix(MatrixKind::Witness, vec![w.d, w.d], &w.matrix)?
        .with_meta("witness_kind", kind)
        .with_meta("provenance", w.provenance.clone()))
}

/// Reads a witness; the kind defaults to teleportation when not recorded.
pub fn witness_from_file(f: &MatrixFile) -> Result<WitnessOperator> {
    if f.kind != MatrixKind::Witness && f.kind != MatrixKind::Operator {
        return Err(Error::Format(format!("expected a witness file, got {:?}", f.kind)));
    }
    let (a, b) = f.bipartite_dims()?;
    if a != b {
        return Err(Error::DimensionMismatch(format!("witness needs equal local dimensions, got {a}x{b}")));
    }
    let kind = match f.meta_str("witness_kind") {
        None | Some("teleportation") => WitnessKind::Teleportation,
        Some("entanglement") => WitnessKind::Entanglement,
        Some(other) => return Err(Error::Format(format!("unknown witness_kind {other}"))),
    };
    let provenance = f.meta_str("provenance").unwrap_or("file").to_string();
    // Hermiticity is left to `validate`, which reports it as a failed check.
    WitnessOperator::from_matrix(kind, a, f.to_matrix()?, provenance)
}

pub fn state_to_file(rho: &DensityMatrix, provenance: &str, seed: Option<u64>) -> Result<MatrixFile> {
    let (a, b) = rho.dims();
    let mut f = MatrixFile::from_matrix(MatrixKind::State, vec![a, b], rho.matrix())?.with_meta("provenance", provenance);
    if let Some(s) = seed {
        f = f.with_meta("seed", s);
    }
    Ok(f)
}

pub fn state_from_file(f: &MatrixFile) -> Result<DensityMatrix> {
    if f.kind != MatrixKind::State {
        return Err(Error::Format(format!("expected a state file, got {:?}", f.kind)));
    }
    DensityMatrix::new(f.bipartite_dims()?, f.to_matrix()?)
}

/// One product vector; amplitudes are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductVectorEntry {
    pub e: Vec<C64>,
    pub f: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductVectorFile {
    pub schema_version: String,
    pub vectors: Vec<ProductVectorEntry>,
}

impl ProductVectorFile {
    pub fn from_vectors(vs: &[ProductVector]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            vectors: vs.iter().map(|v| ProductVectorEntry { e: v.e.clone(), f: v.f.clone() }).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported schema_version {}", f.schema_version)));
        }
        Ok(f)
    }

    /// Vectors are used as given, without normalization.
    pub fn to_vectors(&self) -> Result<Vec<ProductVector>> {
        self.vectors
            .iter()
            .map(|v| {
                if v.e.is_empty() || v.e.len() != v.f.len() {
                    return Err(Error::DimensionMismatch(format!("local factors of length {} and {}", v.e.len(), v.f.len())));
                }
                if v.e.iter().chain(&v.f).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite);
                }
                Ok(ProductVector::new(v.e.clone(), v.f.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub tol: f64,
    pub verdict: Detection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub kind: MatrixKind,
    pub dims: Vec<usize>,
    pub min_eigenvalue: f64,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum ReportPayload {
    Evaluation(Evaluation),
    Validation(ValidationReport),
    Certificate(OptimalityCertificate),
    Fef(FefResult),
    Estimate(EstimateReport),
    Decomposition(LocalBasisDecomposition),
    Build(BuildSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: Vec<String>,
    pub inputs: Vec<InputRecord>,
    pub seeds: BTreeMap<String, u64>,
    pub result: ReportPayload,
    pub wall_time_s: f64,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}
