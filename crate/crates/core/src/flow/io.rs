//! `DNF1` flow container.
//!
//! Layout (little-endian): magic `DNF1`, u32 dim, u32 block count, then per
//! block the permutation (u32 × dim), u32 layer count (always 5), and per
//! layer u32 out, u32 in, weights (f64, row-major) and biases (f64). Masks are
//! implied by the layer shapes and are rebuilt on load.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io_util::{fmt_real, read_file, write_atomic, Reader, Writer};
use crate::scalar::Real;

use super::{FlowStack, MafBlock, MaskedConditioner};

pub(crate) const FLOW_MAGIC: &[u8; 4] = b"DNF1";

pub(crate) fn write_flow<T: Real>(w: &mut Writer, stack: &FlowStack<T>) {
    w.magic(FLOW_MAGIC);
    w.u32(stack.dim());
    w.u32(stack.blocks().len());
    for b in stack.blocks() {
        for &p in b.permutation() {
            w.u32(p);
        }
        let layers = b.conditioner().layers();
        w.u32(layers.len());
        for l in layers {
            w.u32(l.out_dim);
            w.u32(l.in_dim);
            w.f64s(&l.weight);
            w.f64s(&l.bias);
        }
    }
}

pub(crate) fn read_flow<T: Real>(r: &mut Reader<'_>) -> Result<FlowStack<T>> {
    r.expect_magic(FLOW_MAGIC)?;
    let dim = r.u32("dimension")?;
    let n_blocks = r.u32("block count")?;
    let mut blocks = Vec::with_capacity(n_blocks.min(1024));
    for bi in 0..n_blocks {
        let mut perm = Vec::with_capacity(dim);
        for _ in 0..dim {
            perm.push(r.u32("permutation")?);
        }
        let n_layers = r.u32("layer count")?;
        if n_layers != 5 {
            return Err(Error::parse(
                format!("block {bi}"),
                format!("expected 5 layers, found {n_layers}"),
            ));
        }
        let mut shapes = Vec::with_capacity(5);
        let mut params: Vec<Vec<T>> = Vec::with_capacity(5);
        for li in 0..5 {
            let out = r.u32("layer rows")?;
            let inp = r.u32("layer cols")?;
            shapes.push((out, inp));
            let what = format!("block {bi} layer {li}");
            let mut p = r.f64s::<T>(out * inp, &what)?;
            p.extend(r.f64s::<T>(out, &what)?);
            params.push(p);
        }
        let widths = [shapes[0].0, shapes[1].0, shapes[2].0];
        let mut cond = MaskedConditioner::zeros(dim, widths)
            .map_err(|e| Error::parse(format!("block {bi}"), e.to_string()))?;
        for (li, (l, &(out, inp))) in cond.layers_mut().into_iter().zip(&shapes).enumerate() {
            if (l.out_dim, l.in_dim) != (out, inp) {
                return Err(Error::parse(
                    format!("block {bi} layer {li}"),
                    format!(
                        "shape {out}x{inp} inconsistent with dim {dim} and widths {widths:?}"
                    ),
                ));
            }
            l.read_params(&params[li]);
        }
        blocks.push(
            MafBlock::new(cond, perm)
                .map_err(|e| Error::parse(format!("block {bi}"), e.to_string()))?,
        );
    }
    FlowStack::from_blocks(dim, blocks)
}

impl<T: Real> FlowStack<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        write_flow(&mut w, self);
        w.into_bytes()
    }

    /// Parses a flow container; any trailing sections are ignored.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        read_flow(&mut Reader::new(bytes))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_file(path)?)
    }

    /// Plain-text dump carrying the same information as the binary container.
    pub fn to_text(&self) -> String {
        const NAMES: [&str; 5] = ["hidden0", "hidden1", "hidden2", "mu_head", "alpha_head"];
        let mut s = String::new();
        writeln!(s, "DNF1 dim {} blocks {}", self.dim(), self.blocks().len()).unwrap();
        for (bi, b) in self.blocks().iter().enumerate() {
            let perm: Vec<String> = b.permutation().iter().map(|p| p.to_string()).collect();
            writeln!(s, "block {bi} perm {}", perm.join(" ")).unwrap();
            for (name, l) in NAMES.iter().zip(b.conditioner().layers()) {
                writeln!(s, "  layer {name} {}x{}", l.out_dim, l.in_dim).unwrap();
                for r in 0..l.out_dim {
                    let row: Vec<String> = l.weight[r * l.in_dim..(r + 1) * l.in_dim]
                        .iter()
                        .map(|&x| fmt_real(x))
                        .collect();
                    writeln!(s, "    w {}", row.join(" ")).unwrap();
                }
                let bias: Vec<String> = l.bias.iter().map(|&x| fmt_real(x)).collect();
                writeln!(s, "    b {}", bias.join(" ")).unwrap();
            }
        }
        s
    }
}
