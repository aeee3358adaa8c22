//! CSV traces of solver runs.
//!
//! One row per iteration with the columns in [`COLUMNS`]. Cells that do
//! not apply (no step on a terminal row, policy fields the policy does not
//! have, iterations that were not certified) are empty. Floats use Rust's
//! shortest round-trip formatting, so equal runs give byte-identical files.

use std::io::{Read, Write};
use std::path::Path;

use mirror_polyak::{IterationRecord, PolicySnapshot};

use crate::error::{HarnessError, Result};

pub const COLUMNS: [&str; 11] = [
    "k",
    "f_x",
    "best_f",
    "eta",
    "target",
    "g_dual_norm",
    "delta",
    "sigma",
    "level",
    "certifier_residual",
    "domain_violation",
];

/// Index of the certifier column, which depends on the certify cadence.
pub const RESIDUAL_COLUMN: usize = 9;

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Render one record as its CSV cells.
pub fn row_cells(r: &IterationRecord) -> [String; 11] {
    let (delta, sigma, level) = match r.policy {
        PolicySnapshot::Classic => (None, None, None),
        PolicySnapshot::Adaptive { delta } => (Some(delta), None, None),
        PolicySnapshot::Level { delta, sigma, level, .. } => (Some(delta), Some(sigma), Some(level)),
    };
    [
        r.k.to_string(),
        r.f_x.to_string(),
        r.best_f.to_string(),
        opt(r.eta),
        opt(r.target),
        opt(r.g_dual_norm),
        opt(delta),
        opt(sigma),
        level.map(|l| l.to_string()).unwrap_or_default(),
        opt(r.certifier_residual),
        r.domain_violation.to_string(),
    ]
}

pub fn write_trace<W: Write>(out: W, history: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| HarnessError::Runtime(format!("writing trace: {e}"));
    w.write_record(COLUMNS).map_err(wrap)?;
    for r in history {
        w.write_record(row_cells(r)).map_err(wrap)?;
    }
    w.flush().map_err(|e| HarnessError::Runtime(format!("writing trace: {e}")))?;
    Ok(())
}

pub fn write_trace_file(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), history)
}

/// Read a trace back as raw cells, checking the header.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<Vec<String>>> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |msg: String| HarnessError::Runtime(format!("malformed trace: {msg}"));
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(bad(format!("expected header {}", COLUMNS.join(","))));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

pub fn read_trace_file(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_trace(std::io::BufReader::new(file))
}
