//! Vector-set and trial-list files.
//!
//! Text vectors: a `VEC1 <dim>` header, then `id label v1 ... vD` per line.
//! Binary vectors: magic `VEC1`, u32 dim, u32 count, then per record a
//! length-prefixed UTF-8 id, an i64 label and `dim` f64 values, all
//! little-endian. Trial lists: `enroll_id test_id target|nontarget`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io_util::{fmt_real, parse_real, read_file, read_text, write_atomic, Reader, Writer};
use crate::numerics::Matrix;
use crate::scalar::Real;

use super::{Trial, TrialList, VectorSet};

const MAGIC: &[u8; 4] = b"VEC1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFormat {
    Text,
    Binary,
}

impl VectorFormat {
    /// Binary for a `.bin` extension, text otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => VectorFormat::Binary,
            _ => VectorFormat::Text,
        }
    }
}

pub fn write_vectors_text<T: Real>(set: &VectorSet<T>) -> String {
    let mut out = String::with_capacity(set.len() * (set.dim() * 20 + 16));
    writeln!(out, "VEC1 {}", set.dim()).unwrap();
    for i in 0..set.len() {
        write!(out, "{} {}", set.ids()[i], set.labels()[i]).unwrap();
        for &x in set.vector(i) {
            out.push(' ');
            out.push_str(&fmt_real(x));
        }
        out.push('\n');
    }
    out
}

pub fn read_vectors_text<T: Real>(text: &str) -> Result<VectorSet<T>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse("line 1", "empty vector file"))?;
    let mut head = header.split_whitespace();
    let magic = head.next().unwrap_or("");
    if magic != "VEC1" {
        return Err(Error::BadMagic {
            expected: "VEC1".into(),
            found: magic.chars().take(4).collect(),
        });
    }
    let dim: usize = head
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse("line 1", "header must be `VEC1 <dim>`"))?;

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for (lineno, line) in lines {
        let loc = || format!("line {}", lineno + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let id = toks.next().unwrap();
        let label: i64 = toks
            .next()
            .ok_or_else(|| Error::parse(loc(), "missing label"))?
            .parse()
            .map_err(|_| Error::parse(loc(), "label is not an integer"))?;
        let before = data.len();
        for tok in toks {
            data.push(parse_real::<T>(tok, loc)?);
        }
        if data.len() - before != dim {
            return Err(Error::parse(
                loc(),
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        ids.push(id.to_string());
        labels.push(label);
    }
    let n = ids.len();
    VectorSet::new(ids, labels, Matrix::from_vec(n, dim, data)?)
}

pub fn write_vectors_binary<T: Real>(set: &VectorSet<T>) -> Vec<u8> {
    let mut w = Writer::new();
    w.magic(MAGIC);
    w.u32(set.dim());
    w.u32(set.len());
    for i in 0..set.len() {
        w.str(&set.ids()[i]);
        w.i64(set.labels()[i]);
        w.f64s(set.vector(i));
    }
    w.into_bytes()
}

pub fn read_vectors_binary<T: Real>(bytes: &[u8]) -> Result<VectorSet<T>> {
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC)?;
    let dim = r.u32("dimension")?;
    let n = r.u32("record count")?;
    let mut ids = Vec::with_capacity(n.min(1 << 20));
    let mut labels = Vec::with_capacity(n.min(1 << 20));
    let mut data = Vec::with_capacity(n.min(1 << 20) * dim);
    for _ in 0..n {
        ids.push(r.str("utterance id")?);
        labels.push(r.i64("label")?);
        data.extend(r.f64s::<T>(dim, "vector")?);
    }
    if !r.at_end() {
        return Err(Error::parse("end of file", "trailing bytes after last record"));
    }
    VectorSet::new(ids, labels, Matrix::from_vec(n, dim, data)?)
}

/// Reads either format; text files start with `VEC1` followed by whitespace
/// and a decimal dimension.
pub fn read_vectors<T: Real>(path: &Path) -> Result<VectorSet<T>> {
    let bytes = read_file(path)?;
    let is_text = bytes.len() > 5
        && &bytes[..4] == MAGIC
        && (bytes[4] == b' ' || bytes[4] == b'\t')
        && bytes[5].is_ascii_digit();
    if is_text {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::parse(path.display().to_string(), "file is not valid UTF-8"))?;
        read_vectors_text(&text)
    } else if bytes.len() >= 4 && &bytes[..4] == MAGIC {
        read_vectors_binary(&bytes)
    } else {
        // text parser reports the bad magic with the expected value
        read_vectors_text(&String::from_utf8_lossy(&bytes))
    }
}

pub fn write_vectors<T: Real>(path: &Path, set: &VectorSet<T>, format: VectorFormat) -> Result<()> {
    match format {
        VectorFormat::Text => write_atomic(path, write_vectors_text(set).as_bytes()),
        VectorFormat::Binary => write_atomic(path, &write_vectors_binary(set)),
    }
}

pub fn write_trials(path: &Path, trials: &TrialList) -> Result<()> {
    let mut out = String::new();
    for t in &trials.trials {
        let kind = if t.target { "target" } else { "nontarget" };
        writeln!(out, "{} {} {}", t.enroll, t.test, kind).unwrap();
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_trials(path: &Path) -> Result<TrialList> {
    let text = read_text(path)?;
    let mut trials = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let loc = format!("{} line {}", path.display(), lineno + 1);
        if toks.len() != 3 {
            return Err(Error::parse(loc, "expected `enroll_id test_id target|nontarget`"));
        }
        let target = match toks[2] {
            "target" => true,
            "nontarget" => false,
            other => return Err(Error::parse(loc, format!("unknown trial kind {other:?}"))),
        };
        trials.push(Trial {
            enroll: toks[0].to_string(),
            test: toks[1].to_string(),
            target,
        });
    }
    Ok(TrialList { trials })
}
