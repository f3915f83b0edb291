//! `LIN1` transform container.
//!
//! Layout (little-endian): magic `LIN1`, u32 kind code (0 whiten, 1 pca,
//! 2 lda, 3 ldan, 4 lengthnorm), u32 out, u32 in, offset (f64 × in),
//! projection (f64 × out × in, row-major).

use std::path::Path;

use crate::error::{Error, Result};
use crate::io_util::{read_file, write_atomic, Reader, Writer};
use crate::numerics::Matrix;
use crate::scalar::Real;

use super::{LinearTransform, TransformKind};

pub(crate) const LINEAR_MAGIC: &[u8; 4] = b"LIN1";

impl<T: Real> LinearTransform<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.magic(LINEAR_MAGIC);
        w.u32(self.kind.code());
        w.u32(self.out_dim());
        w.u32(self.in_dim());
        w.f64s(&self.offset);
        w.f64s(self.projection.as_slice());
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(LINEAR_MAGIC)?;
        let code = r.u32("kind")?;
        let kind = TransformKind::from_code(code)
            .ok_or_else(|| Error::parse("kind", format!("unknown transform kind {code}")))?;
        let out = r.u32("output dimension")?;
        let inp = r.u32("input dimension")?;
        let offset = r.f64s(inp, "offset")?;
        let proj = r.f64s(out * inp, "projection")?;
        if !r.at_end() {
            return Err(Error::parse("trailer", "unexpected bytes after projection"));
        }
        Self::new(Matrix::from_vec(out, inp, proj)?, offset, kind)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_file(path)?)
    }
}
