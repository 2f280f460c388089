//! Flat key=value configuration files and thread-count resolution.
//!
//! Every flag can also be supplied in the config file under its long name
//! (e.g. `omega=1`, `N=40`, `t-end=6.28`); explicit command-line flags always
//! win. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

use crate::commands::Cli;

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    bail!(
                        "config line {} is not key=value: {line:?}",
                        lineno + 1
                    );
                };
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self { values })
    }

    /// explicit flag -> config value -> default.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        explicit: Option<&T>,
        key: &str,
        default: T,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = explicit {
            return Ok(v.clone());
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config key {key}={raw:?}: {e}")),
            None => Ok(default),
        }
    }

    /// Same, but with no default: stays None when absent everywhere.
    pub fn resolve_opt<T: FromStr + Clone>(
        &self,
        explicit: Option<&T>,
        key: &str,
    ) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = explicit {
            return Ok(Some(v.clone()));
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key}={raw:?}: {e}")),
            None => Ok(None),
        }
    }
}

/// --threads flag, then NLS_THREADS, then all cores.
pub fn resolve_threads(cli: &Cli) -> Result<usize> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        return Ok(t);
    }
    if let Ok(env) = std::env::var("NLS_THREADS") {
        let t: usize = env
            .parse()
            .map_err(|_| anyhow::anyhow!("NLS_THREADS={env:?} is not a thread count"))?;
        if t == 0 {
            bail!("NLS_THREADS must be positive");
        }
        return Ok(t);
    }
    Ok(std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1))
}
