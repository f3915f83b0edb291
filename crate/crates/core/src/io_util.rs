//! Little-endian container helpers shared by the model and data formats.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp_name = format!(".{}.tmp{}", name.to_string_lossy(), std::process::id());
    let tmp = match dir {
        Some(d) => d.join(tmp_name),
        None => Path::new(&tmp_name).to_path_buf(),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn magic(&mut self, m: &[u8; 4]) {
        self.buf.extend_from_slice(m);
    }

    pub fn u32(&mut self, x: usize) {
        let x = u32::try_from(x).expect("count fits in u32");
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn i64(&mut self, x: i64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn f64s<T: Real>(&mut self, xs: &[T]) {
        for &x in xs {
            self.buf.extend_from_slice(&x.as_f64().to_le_bytes());
        }
    }

    pub fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

/// Cursor over a byte buffer that reports offsets in its errors.
pub struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::parse(
                format!("offset {}", self.pos),
                format!("truncated while reading {what}"),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn expect_magic(&mut self, magic: &[u8; 4]) -> Result<()> {
        let found = if self.bytes.len() - self.pos < 4 {
            &self.bytes[self.pos..]
        } else {
            &self.bytes[self.pos..self.pos + 4]
        };
        if found != magic {
            return Err(Error::BadMagic {
                expected: String::from_utf8_lossy(magic).into_owned(),
                found: String::from_utf8_lossy(found).into_owned(),
            });
        }
        self.pos += 4;
        Ok(())
    }

    pub fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    }

    pub fn i64(&mut self, what: &str) -> Result<i64> {
        let b = self.take(8, what)?;
        Ok(i64::from_le_bytes(b.try_into().unwrap()))
    }

    pub fn f64s<T: Real>(&mut self, n: usize, what: &str) -> Result<Vec<T>> {
        let start = self.pos;
        let b = self.take(n.checked_mul(8).unwrap_or(usize::MAX), what)?;
        let out: Vec<T> = b
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap())))
            .collect();
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(
                format!("offset {start}"),
                format!("non-finite value in {what}"),
            ));
        }
        Ok(out)
    }

    pub fn str(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)?;
        let at = self.pos;
        let b = self.take(n, what)?;
        String::from_utf8(b.to_vec())
            .map_err(|_| Error::parse(format!("offset {at}"), format!("{what} is not UTF-8")))
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut f = fs::File::open(path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    Ok(buf)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData => {
            Error::parse(path.display().to_string(), "file is not valid UTF-8")
        }
        _ => Error::Io(e),
    })
}

/// Parses a float token, reporting `location` on failure.
pub fn parse_real<T: Real>(tok: &str, location: impl Fn() -> String) -> Result<T> {
    let x: f64 = tok
        .parse()
        .map_err(|_| Error::parse(location(), format!("not a number: {tok:?}")))?;
    if !x.is_finite() {
        return Err(Error::parse(location(), format!("non-finite value {tok:?}")));
    }
    Ok(T::lit(x))
}

/// Shortest representation that parses back to the identical `f64`.
pub fn fmt_real<T: Real>(x: T) -> String {
    format!("{:?}", x.as_f64())
}
