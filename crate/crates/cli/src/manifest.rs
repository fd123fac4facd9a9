//! Run manifests: the inputs and parameters behind a trace, stored next to it
//! as `key=value` lines.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub const HEADER: &str = "# fpboost run manifest";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    /// Starts a manifest with the subcommand and tool version.
    pub fn new(subcommand: &str) -> Self {
        let mut m = Self { entries: Vec::new() };
        m.set("subcommand", subcommand);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m
    }

    /// Sets `key`, replacing an earlier value. Keys may not contain `=`,
    /// line breaks or leading `#`.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        assert!(
            !key.is_empty() && !key.contains(['=', '\n', '\r']) && !key.starts_with('#') && key.trim() == key,
            "bad manifest key {key:?}"
        );
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(&escape(v));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("manifest line {}: expected key=value", i + 1)))?;
            entries.push((k.to_string(), unescape(v).map_err(|m| CliError::input(format!("manifest line {}: {m}", i + 1)))?));
        }
        Ok(Self { entries })
    }

    /// `trace.csv` becomes `trace.manifest.txt`.
    pub fn path_for(trace: &Path) -> PathBuf {
        trace.with_extension("manifest.txt")
    }

    pub fn write_beside(&self, trace: &Path) -> CliResult<PathBuf> {
        let path = Self::path_for(trace);
        fs::write(&path, self.to_text())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

fn escape(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    for ch in v.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(v: &str) -> Result<String, String> {
    let mut out = String::with_capacity(v.len());
    let mut chars = v.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("bad escape {other:?}")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_awkward_values() {
        let mut m = RunManifest::new("eig");
        m.set("input", "dir with spaces/a=b.csv");
        m.set("note", "two\nlines\\ and \r");
        m.set("alpha", 0.1f64);
        m.set("alpha", 2f64);
        let back = RunManifest::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get("alpha"), Some("2"));
    }

    #[test]
    fn manifest_path_sits_beside_trace() {
        assert_eq!(RunManifest::path_for(Path::new("out/run.csv")), PathBuf::from("out/run.manifest.txt"));
    }
}
