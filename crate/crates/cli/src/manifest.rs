//! Structured key-value run manifests with atomic writes.
//!
//! Manifest content is fully deterministic for a given config and build;
//! wall-clock timings are logged to stderr by the runner instead of being
//! written here, so repeated runs produce byte-identical trees.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Default, Clone)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(kind: &str) -> Self {
        let mut m = Self::default();
        m.push("format_version", FORMAT_VERSION);
        m.push("kind", kind);
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_real(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), format!("{value:.11e}")));
    }

    /// Flattens `key = value` lines under a prefix.
    pub fn push_block(&mut self, prefix: &str, body: &str) {
        for line in body.lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                self.entries.push((format!("{prefix}.{}", k.trim()), v.trim().to_string()));
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k} {v}").unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, &self.render())
    }
}

/// Write-temp-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_preserves_insertion_order() {
        let mut m = Manifest::new("point");
        m.push("basis.dim_even", 42);
        m.push_real("quench.e0", 11.473648);
        let text = m.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("format_version {FORMAT_VERSION}"));
        assert_eq!(lines[1], "kind point");
        assert_eq!(lines[2], "basis.dim_even 42");
        assert!(lines[3].starts_with("quench.e0 1.14736480000e1"));
    }

    #[test]
    fn config_block_flattens() {
        let mut m = Manifest::new("run");
        m.push_block("config", "dt = 5.00000000000e-3\ng_a = 2.50000000000e1\n");
        let text = m.render();
        assert!(text.contains("config.dt 5.00000000000e-3"));
        assert!(text.contains("config.g_a 2.50000000000e1"));
    }

    #[test]
    fn atomic_write_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.txt");
        let m = Manifest::new("run");
        m.write(&path).unwrap();
        let back = std::fs::read_to_string(&path).unwrap();
        assert_eq!(back, m.render());
        assert!(!path.with_extension("tmp").exists());
    }
}
