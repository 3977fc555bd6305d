//! JSON file formats for channels, ensembles, states and Hamiltonians.
//!
//! Matrices are nested arrays of `[re, im]` pairs, row-major. Floats are written in
//! shortest round-trip form, so emitted files re-parse bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channels::{Ensemble, KrausChannel};
use crate::error::{Error, Result};
use crate::matcore::{c, eigh, frobenius, CMatrix, DensityMatrix, HermitianOperator, NORM_TOL};

/// Kraus files within this completeness deviation are renormalized on load.
pub const RENORMALIZE_TOL: f64 = 1e-6;

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDoc {
    pub prob: f64,
    pub state: MatrixDoc,
}

pub fn matrix_doc(m: &CMatrix) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn channel_doc(chan: &KrausChannel) -> ChannelDoc {
    ChannelDoc {
        dim_in: chan.dim_in(),
        dim_out: chan.dim_out(),
        kraus: chan.kraus_ops().iter().map(matrix_doc).collect(),
    }
}

pub fn ensemble_doc(ens: &Ensemble) -> Vec<MemberDoc> {
    ens.items()
        .iter()
        .map(|(p, r)| MemberDoc {
            prob: *p,
            state: matrix_doc(r.matrix()),
        })
        .collect()
}

pub fn channel_to_json(chan: &KrausChannel) -> String {
    to_json(&channel_doc(chan))
}

pub fn ensemble_to_json(ens: &Ensemble) -> String {
    to_json(&ensemble_doc(ens))
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    to_json(&matrix_doc(m))
}

/// Indented JSON with matrix rows kept on one line.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("report serializes");
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(xs) => xs.iter().all(|x| !x.is_array() && !x.is_object()),
        _ => true,
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(xs) if xs.is_empty() => out.push_str("[]"),
        // a row of scalars or of [re, im] pairs
        Value::Array(xs) if xs.iter().all(is_flat) => {
            out.push_str(&serde_json::to_string(v).expect("serializable").replace(',', ", "));
        }
        Value::Array(xs) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("string key"));
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("serializable")),
    }
}

/// Source text with a name for diagnostics.
struct Source<'a> {
    path: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn error_at(&self, offset: usize, message: String) -> Error {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Parse {
            path: self.path.to_string(),
            line,
            column,
            message,
        }
    }

    /// Points at the first occurrence of `"key"`, or the start of the document.
    fn error_near(&self, key: &str, message: String) -> Error {
        let offset = if key.is_empty() { 0 } else { self.text.find(&format!("\"{key}\"")).unwrap_or(0) };
        self.error_at(offset, message)
    }

    fn decode<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_str(self.text).map_err(|e| Error::Parse {
            path: self.path.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
        })
    }

    fn matrix(&self, doc: &MatrixDoc, key: &str, label: &str, rows: usize, cols: usize) -> Result<CMatrix> {
        if doc.len() != rows {
            return Err(self.error_near(key, format!("{label}: expected {rows} rows, found {}", doc.len())));
        }
        let mut m = CMatrix::zeros(rows, cols);
        for (i, row) in doc.iter().enumerate() {
            if row.len() != cols {
                return Err(self.error_near(key, format!("{label}: row {i} has {} entries, expected {cols}", row.len())));
            }
            for (j, &[a, b]) in row.iter().enumerate() {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(self.error_near(key, format!("{label}: non-finite entry at ({i}, {j})")));
                }
                m[(i, j)] = c(a, b);
            }
        }
        Ok(m)
    }

    fn square(&self, doc: &MatrixDoc, key: &str, label: &str) -> Result<CMatrix> {
        let n = doc.len();
        if n == 0 {
            return Err(self.error_near(key, format!("{label}: empty matrix")));
        }
        self.matrix(doc, key, label, n, n)
    }

    fn wrap(&self, key: &str, err: Error) -> Error {
        match err {
            Error::Parse { .. } | Error::Io(_) => err,
            other => self.error_near(key, other.to_string()),
        }
    }
}

/// Parses a channel document. Kraus sets with `‖ΣV†V − I‖ ≤ tol` are renormalized
/// as `V S^{-1/2}`; larger deviations are rejected.
pub fn parse_channel(text: &str, path: &str, tol: f64) -> Result<KrausChannel> {
    let src = Source { path, text };
    let doc: ChannelDoc = src.decode()?;
    if doc.dim_in == 0 || doc.dim_out == 0 {
        return Err(src.error_near("dim_in", "dimensions must be positive".into()));
    }
    if doc.kraus.is_empty() {
        return Err(src.error_near("kraus", "Kraus operator list is empty".into()));
    }
    let ops = doc
        .kraus
        .iter()
        .enumerate()
        .map(|(k, m)| src.matrix(m, "kraus", &format!("kraus[{k}]"), doc.dim_out, doc.dim_in))
        .collect::<Result<Vec<_>>>()?;
    let mut s = CMatrix::zeros(doc.dim_in, doc.dim_in);
    for v in &ops {
        s += v.adjoint() * v;
    }
    let deviation = frobenius(&(&s - CMatrix::identity(doc.dim_in, doc.dim_in)));
    if deviation > tol {
        return Err(src.error_near(
            "kraus",
            format!("completeness violated: ‖ΣV†V − I‖ = {deviation:.3e} exceeds {tol:.1e}"),
        ));
    }
    // rounding-level deviations are kept verbatim so emitted files re-parse exactly
    let ops = if deviation > NORM_TOL {
        let inv_sqrt = eigh(&s).map_err(|e| src.wrap("kraus", e))?.apply(|x| 1.0 / x.sqrt());
        ops.into_iter().map(|v| v * &inv_sqrt).collect()
    } else {
        ops
    };
    KrausChannel::new(ops).map_err(|e| src.wrap("kraus", e))
}

pub fn parse_state(text: &str, path: &str) -> Result<DensityMatrix> {
    let src = Source { path, text };
    let doc: MatrixDoc = src.decode()?;
    let m = src.square(&doc, "", "state")?;
    DensityMatrix::new(m).map_err(|e| src.error_at(0, e.to_string()))
}

pub fn parse_hamiltonian(text: &str, path: &str) -> Result<HermitianOperator> {
    let src = Source { path, text };
    let doc: MatrixDoc = src.decode()?;
    let m = src.square(&doc, "", "hamiltonian")?;
    HermitianOperator::new(m).map_err(|e| src.error_at(0, e.to_string()))
}

pub fn parse_ensemble(text: &str, path: &str) -> Result<Ensemble> {
    let src = Source { path, text };
    let doc: Vec<MemberDoc> = src.decode()?;
    if doc.is_empty() {
        return Err(src.error_at(0, "ensemble is empty".into()));
    }
    let mut items = Vec::with_capacity(doc.len());
    for (i, member) in doc.iter().enumerate() {
        let offset = nth_key(text, "state", i);
        let m = src.square(&member.state, "state", &format!("member {i}"))?;
        let rho = DensityMatrix::new(m).map_err(|e| src.error_at(offset, format!("member {i}: {e}")))?;
        items.push((member.prob, rho));
    }
    Ensemble::new(items).map_err(|e| src.error_at(0, e.to_string()))
}

fn nth_key(text: &str, key: &str, n: usize) -> usize {
    text.match_indices(&format!("\"{key}\"")).nth(n).map_or(0, |(i, _)| i)
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn read_channel(path: &Path, tol: f64) -> Result<KrausChannel> {
    parse_channel(&read(path)?, &path.display().to_string(), tol)
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    parse_state(&read(path)?, &path.display().to_string())
}

pub fn read_hamiltonian(path: &Path) -> Result<HermitianOperator> {
    parse_hamiltonian(&read(path)?, &path.display().to_string())
}

pub fn read_ensemble(path: &Path) -> Result<Ensemble> {
    parse_ensemble(&read(path)?, &path.display().to_string())
}
