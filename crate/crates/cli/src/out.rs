//! Output plumbing: `# key: value` headers and file-or-stdout sinks.

use equilab_core::Result;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Run configuration, serialized as comment lines at the top of every output.
#[derive(Default)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str) -> Self {
        let mut h = Header::default();
        h.push("equilab", env!("CARGO_PKG_VERSION"));
        h.push("command", command);
        h
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            for (i, line) in v.lines().enumerate() {
                if i == 0 {
                    let _ = writeln!(s, "# {k}: {line}");
                } else {
                    let _ = writeln!(s, "#   {line}");
                }
            }
            if v.is_empty() {
                let _ = writeln!(s, "# {k}:");
            }
        }
        s
    }
}

/// Write `header + body` to `out` (parents created) or to stdout.
pub fn emit(out: Option<&Path>, header: &Header, body: &str) -> Result<()> {
    let text = format!("{}{}", header.render(), body);
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

/// Shortest round-trip float text, switching to exponent form far from 1.
pub struct F(pub f64);

impl std::fmt::Display for F {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if self.0 == 0.0 || !self.0.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}
