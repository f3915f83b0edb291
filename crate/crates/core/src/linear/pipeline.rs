use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::flow::FlowStack;
use crate::io_util::{read_text, write_atomic};
use crate::scalar::Real;

use super::LinearTransform;

#[derive(Debug, Clone)]
pub enum Stage<T> {
    Linear(LinearTransform<T>),
    /// Maps `x` to its latent code `z`.
    Flow(FlowStack<T>),
}

impl<T: Real> Stage<T> {
    pub fn in_dim(&self) -> usize {
        match self {
            Stage::Linear(t) => t.in_dim(),
            Stage::Flow(f) => f.dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Stage::Linear(t) => t.out_dim(),
            Stage::Flow(f) => f.dim(),
        }
    }

    pub fn apply_vector(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            Stage::Linear(t) => t.apply_vector(x),
            Stage::Flow(f) => f.normalize(x).map(|(z, _)| z),
        }
    }

    pub fn apply(&self, set: &VectorSet<T>) -> Result<VectorSet<T>> {
        if set.dim() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim(),
                found: set.dim(),
            });
        }
        set.par_try_map(self.out_dim(), |x| self.apply_vector(x))
    }
}

/// Ordered chain of linear and flow stages, e.g. DNF followed by LDA.
#[derive(Debug, Clone)]
pub struct Pipeline<T> {
    stages: Vec<Stage<T>>,
}

impl<T: Real> Pipeline<T> {
    pub fn new(stages: Vec<Stage<T>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidConfig("pipeline has no stages".into()));
        }
        for (i, w) in stages.windows(2).enumerate() {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::InvalidConfig(format!(
                    "stage {} outputs {} dims but stage {} expects {}",
                    i,
                    w[0].out_dim(),
                    i + 1,
                    w[1].in_dim()
                )));
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Stage<T>] {
        &self.stages
    }

    pub fn in_dim(&self) -> usize {
        self.stages[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.stages[self.stages.len() - 1].out_dim()
    }

    /// Appends a stage, checking that dimensions chain.
    pub fn then(mut self, stage: Stage<T>) -> Result<Self> {
        self.stages.push(stage);
        Self::new(self.stages)
    }

    pub fn apply_vector(&self, x: &[T]) -> Result<Vec<T>> {
        let mut v = x.to_vec();
        for s in &self.stages {
            v = s.apply_vector(&v)?;
        }
        Ok(v)
    }

    pub fn apply(&self, set: &VectorSet<T>) -> Result<VectorSet<T>> {
        if set.dim() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim(),
                found: set.dim(),
            });
        }
        set.par_try_map(self.out_dim(), |x| self.apply_vector(x))
    }

    /// Reads a manifest: one `linear <path>` or `flow <path>` per line, paths
    /// relative to the manifest's directory. Blank lines and `#` comments are
    /// skipped.
    pub fn load_manifest(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut stages = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let loc = || format!("{}:{}", path.display(), lineno + 1);
            let (kind, file) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(loc(), "expected `<linear|flow> <path>`"))?;
            let file = base.join(file.trim());
            let stage = match kind {
                "linear" => Stage::Linear(LinearTransform::load(&file)?),
                "flow" => Stage::Flow(FlowStack::load(&file)?),
                other => return Err(Error::parse(loc(), format!("unknown stage kind `{other}`"))),
            };
            stages.push(stage);
        }
        Self::new(stages).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }

    /// Writes each stage next to the manifest as `<stem>.<i>.lin|dnf` and the
    /// manifest itself last.
    pub fn save_manifest(&self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new("."));
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "pipeline".into());
        let mut text = String::new();
        for (i, s) in self.stages.iter().enumerate() {
            let (kind, name, bytes) = match s {
                Stage::Linear(t) => ("linear", format!("{stem}.{i}.lin"), t.to_bytes()),
                Stage::Flow(f) => ("flow", format!("{stem}.{i}.dnf"), f.to_bytes()),
            };
            write_atomic(&PathBuf::from(base).join(&name), &bytes)?;
            writeln!(text, "{kind} {name}").unwrap();
        }
        write_atomic(path, text.as_bytes())
    }
}
