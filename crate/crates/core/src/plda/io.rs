//! `PLD1` model container and text score files.
//!
//! Container layout (little-endian): magic `PLD1`, u32 dim, mean (f64 × dim),
//! Σ_b and Σ_w (f64 × dim × dim each, row-major).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io_util::{fmt_real, parse_real, read_file, read_text, write_atomic, Reader, Writer};
use crate::numerics::Matrix;
use crate::scalar::Real;

use super::PldaModel;

pub(crate) const PLDA_MAGIC: &[u8; 4] = b"PLD1";

impl<T: Real> PldaModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.magic(PLDA_MAGIC);
        w.u32(self.dim());
        w.f64s(&self.mean);
        w.f64s(self.sigma_b.as_slice());
        w.f64s(self.sigma_w.as_slice());
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(PLDA_MAGIC)?;
        let d = r.u32("dimension")?;
        let mean = r.f64s(d, "mean")?;
        let sigma_b = Matrix::from_vec(d, d, r.f64s(d * d, "sigma_b")?)?;
        let sigma_w = Matrix::from_vec(d, d, r.f64s(d * d, "sigma_w")?)?;
        if !r.at_end() {
            return Err(Error::parse("trailer", "unexpected bytes after sigma_w"));
        }
        Ok(Self {
            mean,
            sigma_b,
            sigma_w,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_file(path)?)
    }
}

/// One line of a score file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLine {
    pub enroll: String,
    pub test: String,
    pub score: f64,
}

/// Writes `enroll_id test_id score` lines.
pub fn write_scores(path: &Path, lines: &[ScoreLine]) -> Result<()> {
    let mut s = String::new();
    for l in lines {
        writeln!(s, "{} {} {}", l.enroll, l.test, fmt_real(l.score)).unwrap();
    }
    write_atomic(path, s.as_bytes())
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreLine>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let loc = || format!("{}:{}", path.display(), i + 1);
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::parse(loc(), "expected `enroll_id test_id score`"));
        }
        out.push(ScoreLine {
            enroll: f[0].to_string(),
            test: f[1].to_string(),
            score: parse_real(f[2], loc)?,
        });
    }
    Ok(out)
}
