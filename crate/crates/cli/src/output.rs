//! Deterministic report emission: JSON with sorted keys and shortest-roundtrip
//! float formatting, so repeated runs with the same inputs diff cleanly.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Serialize through `serde_json::Value` (BTreeMap-backed, so keys come out
/// sorted) and write with a trailing newline. Path "-" writes to stdout.
pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let value = serde_json::to_value(value).context("serializing report")?;
    let mut text = serde_json::to_string_pretty(&value).context("formatting report")?;
    text.push('\n');
    write_text(&text, path)
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    if path.as_os_str() == "-" {
        print!("{text}");
        return Ok(());
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// CSV rows for trajectories: t outer, mode index inner.
pub fn trajectory_csv(traj: &nls_core::CoefficientTrajectory) -> String {
    let mut out = String::from("t,n,re,im\n");
    for (k, &t) in traj.times.iter().enumerate() {
        for (n, samples) in traj.values.iter() {
            let v = samples[k];
            out.push_str(&format!("{t},{n},{},{}\n", v.re, v.im));
        }
    }
    out
}

pub fn grid_csv(rows: &[nls_core::evaluate::GridRow]) -> String {
    let mut out = String::from("t,x,re,im,abs\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.t, r.x, r.re, r.im, r.abs
        ));
    }
    out
}
