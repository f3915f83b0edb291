//! Flat `key = value` run configuration merged with command-line flags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dnf_core::{Error, Result};
use sha2::{Digest, Sha256};

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let loc = format!("{origin}:{}", i + 1);
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            location: loc.clone(),
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().replace('-', "_");
        if key.is_empty() {
            return Err(Error::Parse {
                location: loc,
                message: "empty key".into(),
            });
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Parse {
                location: loc,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(map)
}

/// Resolves each setting from its flag, else the config file, else a default,
/// and remembers the effective values for the run log.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    queried: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

fn bad(msg: String) -> Error {
    Error::InvalidConfig(msg)
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            ..Self::default()
        }
    }

    pub fn opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        self.queried.insert(key.to_string());
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.parse()
                        .map_err(|_| bad(format!("config key `{key}`: cannot parse {s:?}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn req<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T> {
        self.opt(key, flag)?
            .ok_or_else(|| bad(format!("missing required setting `{key}` (flag --{})", key.replace('_', "-"))))
    }

    /// Comma-separated list in the config file, repeated flag on the command line.
    pub fn list(&mut self, key: &str, flag: Vec<String>) -> Vec<String> {
        self.queried.insert(key.to_string());
        let items: Vec<String> = if !flag.is_empty() {
            flag
        } else {
            self.file
                .get(key)
                .map(|s| s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect())
                .unwrap_or_default()
        };
        if !items.is_empty() {
            self.resolved.insert(key.to_string(), items.join(","));
        }
        items
    }

    /// Input file that must exist.
    pub fn input(&mut self, key: &str, flag: Option<String>) -> Result<PathBuf> {
        let p = PathBuf::from(self.req::<String>(key, flag)?);
        check_input(&p)?;
        Ok(p)
    }

    /// Output file whose directory must exist.
    pub fn output(&mut self, key: &str, flag: Option<String>) -> Result<PathBuf> {
        let p = PathBuf::from(self.req::<String>(key, flag)?);
        check_output(&p)?;
        Ok(p)
    }

    pub fn opt_output(&mut self, key: &str, flag: Option<String>) -> Result<Option<PathBuf>> {
        match self.opt::<String>(key, flag)? {
            Some(s) => {
                let p = PathBuf::from(s);
                check_output(&p)?;
                Ok(Some(p))
            }
            None => Ok(None),
        }
    }

    /// Fails on config keys the command never asked for.
    pub fn finish(&self) -> Result<()> {
        let unknown: Vec<&str> = self
            .file
            .keys()
            .filter(|k| !self.queried.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(bad(format!("unknown config key(s): {}", unknown.join(", "))))
        }
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    /// SHA-256 over the command name and the sorted effective settings.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for (k, v) in &self.resolved {
            h.update(b"\n");
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn check_input(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input file not found: {}", p.display()),
        )))
    }
}

pub fn check_output(p: &Path) -> Result<()> {
    match p.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(d) if !d.is_dir() => Err(bad(format!("output directory does not exist: {}", d.display()))),
        _ => Ok(()),
    }
}
