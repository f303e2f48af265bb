//! Sparse `label index:value …` text files.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{Label, LabeledPoint, WeightedDataset};

/// Positive labels map to `+1`; zero and negative labels both map to `−1`.
fn parse_label(tok: &str, line: usize) -> Result<Label> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse { line, message: format!("bad label `{tok}`") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("bad label `{tok}`") });
    }
    Ok(Label::from_sign(v))
}

/// Reads a dataset of dimension `dim`; every index must lie in `1..=dim`.
pub fn parse_libsvm(reader: impl BufRead, dim: usize) -> Result<WeightedDataset> {
    let mut ds = WeightedDataset::new(dim)?;
    for (i, line) in reader.lines().enumerate() {
        let no = i + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let label = parse_label(toks.next().expect("nonempty line"), no)?;
        let mut coords = vec![0.0; dim];
        let mut last = 0usize;
        for tok in toks {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: no, message: format!("expected index:value, got `{tok}`") })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse { line: no, message: format!("bad index `{idx}`") })?;
            let val: f64 = val.parse().map_err(|_| Error::Parse { line: no, message: format!("bad value `{val}`") })?;
            if idx == 0 || idx > dim {
                return Err(Error::Parse { line: no, message: format!("index {idx} outside 1..={dim}") });
            }
            if idx <= last {
                return Err(Error::Parse { line: no, message: format!("index {idx} does not increase after {last}") });
            }
            last = idx;
            coords[idx - 1] = val;
        }
        ds.push(LabeledPoint::new(coords, label))?;
    }
    Ok(ds)
}

pub fn read_libsvm(path: impl AsRef<Path>, dim: usize) -> Result<WeightedDataset> {
    parse_libsvm(BufReader::new(std::fs::File::open(path)?), dim)
}

/// Largest feature index in a file, to size a dataset whose dimension is unknown.
pub fn infer_dim(path: impl AsRef<Path>) -> Result<usize> {
    let mut dim = 0;
    for (i, line) in BufReader::new(std::fs::File::open(path)?).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split_whitespace().skip(1) {
            let idx = tok
                .split_once(':')
                .and_then(|(i, _)| i.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse { line: i + 1, message: format!("expected index:value, got `{tok}`") })?;
            dim = dim.max(idx);
        }
    }
    Ok(dim)
}

/// One line per point; zero coordinates are omitted and values use the
/// shortest text that reads back to the same `f64`.
pub fn format_libsvm(ds: &WeightedDataset) -> String {
    let mut out = String::new();
    for p in ds.points() {
        out.push_str(match p.label {
            Label::Positive => "+1",
            Label::Negative => "-1",
        });
        for (j, v) in p.coords.iter().enumerate() {
            if *v != 0.0 {
                let _ = write!(out, " {}:{}", j + 1, v);
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_libsvm(ds: &WeightedDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(format_libsvm(ds).as_bytes())?;
    f.flush()?;
    Ok(())
}
