//! File formats.
//!
//! * Matrix-sequence container (`.msq`): line 1 is the literal header
//!   `tsglasso-matseq v1`, line 2 is `F p`, followed by `F·p` lines of
//!   `2p` whitespace-separated floats (`re im` per entry, rows in order,
//!   bins in order). Floats are written with shortest round-trip
//!   formatting, so write→read→write is byte-stable.
//! * Samples: CSV with an optional header row (`N` data rows × `p`
//!   columns), or a raw binary layout `TSGLSMP1 | N:u64le | p:u64le |
//!   N·p f64le` row-major.
//! * Edge list: one `i j` pair per line, 1-based, `i < j`.
//! * Solver diagnostics: CSV `iter,objective,primal_res,dual_res`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::graph::EdgeSet;
use crate::matseq::{CMatrix, MatrixSequence};
use crate::solver::GlassoResult;
use crate::spectrum::SampleMatrix;

const MATSEQ_HEADER: &str = "tsglasso-matseq v1";
const SAMPLES_MAGIC: &[u8; 8] = b"TSGLSMP1";

pub fn write_matrix_sequence(path: &Path, seq: &MatrixSequence) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_sequence_to(&mut w, seq)
}

pub fn write_matrix_sequence_to(w: &mut impl Write, seq: &MatrixSequence) -> Result<()> {
    writeln!(w, "{MATSEQ_HEADER}")?;
    writeln!(w, "{} {}", seq.f_len(), seq.dim())?;
    let p = seq.dim();
    for m in seq.mats() {
        for i in 0..p {
            let mut line = String::new();
            for j in 0..p {
                if j > 0 {
                    line.push(' ');
                }
                let v = m[(i, j)];
                line.push_str(&format!("{} {}", v.re, v.im));
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

pub fn read_matrix_sequence(path: &Path) -> Result<MatrixSequence> {
    read_matrix_sequence_from(&mut BufReader::new(File::open(path)?))
}

pub fn read_matrix_sequence_from(r: &mut impl BufRead) -> Result<MatrixSequence> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Format("empty matrix-sequence file".into()))??;
    if header.trim() != MATSEQ_HEADER {
        return Err(CoreError::Format(format!(
            "expected header '{MATSEQ_HEADER}', found '{header}'"
        )));
    }
    let dims = lines
        .next()
        .ok_or_else(|| CoreError::Format("missing dimension line".into()))??;
    let mut it = dims.split_whitespace();
    let f_len: usize = parse_token(it.next(), "F")?;
    let p: usize = parse_token(it.next(), "p")?;
    if f_len == 0 || p == 0 {
        return Err(CoreError::Format(format!("bad dimensions F={f_len} p={p}")));
    }
    let mut mats = Vec::with_capacity(f_len);
    for f in 0..f_len {
        let mut m = CMatrix::zeros(p, p);
        for i in 0..p {
            let line = lines.next().ok_or_else(|| {
                CoreError::Format(format!("truncated file at bin {f}, row {i}"))
            })??;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| CoreError::Format(format!("bad float '{t}'")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != 2 * p {
                return Err(CoreError::Format(format!(
                    "bin {f} row {i}: expected {} values, found {}",
                    2 * p,
                    vals.len()
                )));
            }
            for j in 0..p {
                m[(i, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
            }
        }
        mats.push(m);
    }
    MatrixSequence::new(mats)
}

pub fn write_samples_csv(path: &Path, x: &SampleMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let p = x.dim();
    w.write_record((1..=p).map(|j| format!("x{j}")))?;
    for n in 0..x.n_samples() {
        w.write_record((0..p).map(|j| x.data()[(n, j)].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a samples CSV; the header row is optional and detected by
/// attempting to parse the first record as numbers.
pub fn read_samples_csv(path: &Path) -> Result<SampleMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(BufReader::new(File::open(path)?));
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(vals) => rows.push(vals),
            Err(_) if idx == 0 => continue, // header row
            Err(_) => {
                return Err(CoreError::Format(format!(
                    "non-numeric value in data row {idx}"
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(CoreError::Format("no data rows".into()));
    }
    let p = rows[0].len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(CoreError::Format("ragged rows".into()));
    }
    let data = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    SampleMatrix::new(data)
}

pub fn write_samples_bin(path: &Path, x: &SampleMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SAMPLES_MAGIC)?;
    w.write_all(&(x.n_samples() as u64).to_le_bytes())?;
    w.write_all(&(x.dim() as u64).to_le_bytes())?;
    for n in 0..x.n_samples() {
        for j in 0..x.dim() {
            w.write_all(&x.data()[(n, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_samples_bin(path: &Path) -> Result<SampleMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SAMPLES_MAGIC {
        return Err(CoreError::Format("bad samples magic".into()));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let n = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8)?;
    let p = u64::from_le_bytes(buf8) as usize;
    if n == 0 || p == 0 || n.checked_mul(p).is_none() {
        return Err(CoreError::Format(format!("bad binary dimensions {n}x{p}")));
    }
    let mut data = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            r.read_exact(&mut buf8)?;
            data[(i, j)] = f64::from_le_bytes(buf8);
        }
    }
    SampleMatrix::new(data)
}

/// Writes one `i j` line per edge, 1-based, `i < j`.
pub fn write_edge_set(path: &Path, edges: &EdgeSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, j) in edges.iter() {
        writeln!(w, "{} {}", i + 1, j + 1)?;
    }
    Ok(())
}

/// Reads an edge list over `p` nodes (the file itself does not carry the
/// node count).
pub fn read_edge_set(path: &Path, p: usize) -> Result<EdgeSet> {
    let r = BufReader::new(File::open(path)?);
    let mut pairs = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let i: usize = parse_token(it.next(), "edge endpoint")?;
        let j: usize = parse_token(it.next(), "edge endpoint")?;
        if i == 0 || j == 0 {
            return Err(CoreError::Format("edge endpoints are 1-based".into()));
        }
        pairs.push((i - 1, j - 1));
    }
    EdgeSet::new(p, pairs)
}

/// Writes the per-iteration solver diagnostics CSV.
pub fn write_diagnostics_csv(path: &Path, result: &GlassoResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["iter", "objective", "primal_res", "dual_res"])?;
    for (k, ((obj, pri), dual)) in result
        .objective_trace
        .iter()
        .zip(&result.primal_residual_trace)
        .zip(&result.dual_residual_trace)
        .enumerate()
    {
        w.write_record([
            (k + 1).to_string(),
            obj.to_string(),
            pri.to_string(),
            dual.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_token<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| CoreError::Format(format!("missing {what}")))?
        .parse::<T>()
        .map_err(|_| CoreError::Format(format!("bad {what}")))
}
