//! Output formatting shared by all subcommands.
//!
//! Every document starts with a header naming the tool version, the
//! subcommand, the fully resolved configuration and a fingerprint of each
//! input dataset. In `table` and `delimited` output the header is a block of
//! `# ` comment lines; in `structured` output it is the `meta` object.

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "confsel";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub name: String,
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
    /// First 16 hex digits of the SHA-256 of the raw input bytes.
    pub sha256: String,
}

pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Header {
    pub command: &'static str,
    pub config: Vec<(&'static str, String)>,
    pub datasets: Vec<Fingerprint>,
}

impl Header {
    pub fn comment_block(&self) -> String {
        let mut s = format!("# {TOOL} {VERSION}\n# command: {}\n", self.command);
        let cfg: Vec<String> = self
            .config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        s.push_str(&format!("# config: {}\n", cfg.join(" ")));
        for d in &self.datasets {
            s.push_str(&format!(
                "# dataset: {} rows={} features={} classes={} sha256={}\n",
                d.name, d.rows, d.features, d.classes, d.sha256
            ));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let mut cfg = Map::new();
        for (k, v) in &self.config {
            cfg.insert((*k).to_string(), Value::String(v.clone()));
        }
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config": cfg,
            "datasets": self.datasets,
        })
    }
}

/// Fixed 6-decimal rendering used in tables.
pub fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

/// Shortest representation that round-trips, used in machine-readable output.
pub fn exact(v: f64) -> String {
    format!("{v}")
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Left-aligned columns separated by two spaces, no trailing whitespace.
pub fn render_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let mut l = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                l.push_str("  ");
            }
            l.push_str(c);
            if i + 1 < cells.len() {
                l.push_str(&" ".repeat(widths[i] - c.chars().count()));
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(headers);
    for r in rows {
        line(r);
    }
    out
}

/// RFC 4180 style comma-separated records.
pub fn render_delimited(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(headers).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn render_json(header: &Header, body: Map<String, Value>) -> String {
    let mut doc = Map::new();
    doc.insert("meta".into(), header.to_json());
    doc.extend(body);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serialization");
    s.push('\n');
    s
}
