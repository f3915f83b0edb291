//! Flow container (`DNF1`) followed by an optional `PRI1` prior-means
//! section: u32 dim, u32 class count, then per class an i64 label and the
//! mean (f64 × dim), in ascending label order.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::{read_flow, write_flow, FlowStack};
use crate::io_util::{read_file, write_atomic, Reader, Writer};
use crate::scalar::Real;

use super::ClassPriors;

const PRIOR_MAGIC: &[u8; 4] = b"PRI1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub stack: FlowStack<T>,
    pub priors: Option<ClassPriors<T>>,
}

impl<T: Real> Checkpoint<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        write_flow(&mut w, &self.stack);
        if let Some(p) = &self.priors {
            w.magic(PRIOR_MAGIC);
            w.u32(p.dim());
            w.u32(p.len());
            for (&label, mean) in p.means() {
                w.i64(label);
                w.f64s(mean);
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let stack: FlowStack<T> = read_flow(&mut r)?;
        if r.at_end() {
            return Ok(Self { stack, priors: None });
        }
        r.expect_magic(PRIOR_MAGIC)?;
        let dim = r.u32("prior dimension")?;
        if dim != stack.dim() {
            return Err(Error::DimensionMismatch {
                expected: stack.dim(),
                found: dim,
            });
        }
        let count = r.u32("prior count")?;
        let mut means = BTreeMap::new();
        for i in 0..count {
            let label = r.i64("prior label")?;
            let mean = r.f64s(dim, &format!("prior mean {i}"))?;
            if means.insert(label, mean).is_some() {
                return Err(Error::parse("prior section", format!("duplicate label {label}")));
            }
        }
        if !r.at_end() {
            return Err(Error::parse("trailer", "unexpected bytes after prior section"));
        }
        Ok(Self {
            stack,
            priors: Some(ClassPriors::new(dim, means)?),
        })
    }
}

pub fn save_checkpoint<T: Real>(
    path: &Path,
    stack: &FlowStack<T>,
    priors: Option<&ClassPriors<T>>,
) -> Result<()> {
    let c = Checkpoint {
        stack: stack.clone(),
        priors: priors.cloned(),
    };
    write_atomic(path, &c.to_bytes())
}

pub fn load_checkpoint<T: Real>(path: &Path) -> Result<Checkpoint<T>> {
    Checkpoint::from_bytes(&read_file(path)?)
}
