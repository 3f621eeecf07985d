//! Golden-file cases: committed CLI outputs that must be reproduced byte for
//! byte, and the machinery to regenerate them with a drift report.
//!
//! Cases are listed in a TOML manifest (`[[case]]` tables). Arguments that
//! start with `data/` are resolved against the workspace root, so the
//! outputs do not depend on the working directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Anchored to a published claim; drift is never accepted silently.
    Published,
    /// Computed by this toolkit and checked by an independent oracle.
    Derived,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GoldenCase {
    pub name: String,
    pub args: Vec<String>,
    /// File name of the expected output, relative to the manifest directory.
    pub expected: String,
    pub provenance: Provenance,
    pub note: String,
    #[serde(default)]
    pub exit_code: i32,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    case: Vec<GoldenCase>,
}

pub fn load_manifest(path: &Path) -> Result<Vec<GoldenCase>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(m.case)
}

/// Workspace root, found from this crate's manifest directory.
pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("crate lives in <root>/crates/<name>")
        .to_path_buf()
}

pub fn default_golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Runs a case in-process; returns the exit code and standard output.
pub fn run_case(case: &GoldenCase, root: &Path) -> (i32, Vec<u8>) {
    let mut argv: Vec<String> = vec!["confsel".into()];
    argv.extend(case.args.iter().map(|a| {
        if a.starts_with("data/") {
            root.join(a).to_string_lossy().into_owned()
        } else {
            a.clone()
        }
    }));
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = crate::run(argv, &mut std::io::empty(), &mut out, &mut err);
    (code, out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Drift {
    Unchanged,
    /// No expected file existed yet.
    Created,
    Changed {
        /// One-based line where old and new output first differ.
        first_line: usize,
        old_lines: usize,
        new_lines: usize,
    },
    /// The command exited with an unexpected code.
    ExitCode {
        expected: i32,
        actual: i32,
    },
}

#[derive(Debug, Clone)]
pub struct CaseChange {
    pub name: String,
    pub provenance: Provenance,
    pub drift: Drift,
    pub written: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ChangeReport {
    pub changes: Vec<CaseChange>,
}

impl ChangeReport {
    /// Cases whose output differs from (or was missing in) the committed file.
    pub fn drifted(&self) -> impl Iterator<Item = &CaseChange> {
        self.changes.iter().filter(|c| c.drift != Drift::Unchanged)
    }

    pub fn is_clean(&self) -> bool {
        self.drifted().next().is_none()
    }

    /// Drift in published-result cases; these are reported but not written
    /// unless explicitly accepted.
    pub fn published_drift(&self) -> impl Iterator<Item = &CaseChange> {
        self.drifted().filter(|c| {
            c.provenance == Provenance::Published && matches!(c.drift, Drift::Changed { .. })
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in self.drifted() {
            let what = match &c.drift {
                Drift::Unchanged => unreachable!(),
                Drift::Created => "created".to_string(),
                Drift::Changed {
                    first_line,
                    old_lines,
                    new_lines,
                } => format!("changed from line {first_line} ({old_lines} -> {new_lines} lines)"),
                Drift::ExitCode { expected, actual } => {
                    format!("exit code {actual}, expected {expected}")
                }
            };
            let loud = if c.provenance == Provenance::Published
                && matches!(c.drift, Drift::Changed { .. })
            {
                "!! PUBLISHED-RESULT DRIFT !! "
            } else {
                ""
            };
            let status = if c.written { "updated" } else { "not written" };
            let _ = writeln!(s, "{loud}{}: {what} [{status}]", c.name);
        }
        s
    }
}

fn compare(old: &[u8], new: &[u8]) -> Drift {
    if old == new {
        return Drift::Unchanged;
    }
    let old = String::from_utf8_lossy(old);
    let new = String::from_utf8_lossy(new);
    let first_line = old
        .lines()
        .zip(new.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| old.lines().count().min(new.lines().count()))
        + 1;
    Drift::Changed {
        first_line,
        old_lines: old.lines().count(),
        new_lines: new.lines().count(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RegenOptions {
    /// Overwrite published-result goldens that drifted.
    pub accept_published_drift: bool,
    /// Report only; write nothing.
    pub dry_run: bool,
}

/// Re-runs every case and rewrites the expected files that changed.
pub fn regenerate(
    cases: &[GoldenCase],
    golden_dir: &Path,
    root: &Path,
    opts: RegenOptions,
) -> std::io::Result<ChangeReport> {
    let mut report = ChangeReport::default();
    for case in cases {
        let path = golden_dir.join(&case.expected);
        let (code, out) = run_case(case, root);
        let drift = if code != case.exit_code {
            Drift::ExitCode {
                expected: case.exit_code,
                actual: code,
            }
        } else {
            match fs::read(&path) {
                Ok(old) => compare(&old, &out),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Drift::Created,
                Err(e) => return Err(e),
            }
        };
        let blocked = case.provenance == Provenance::Published
            && matches!(drift, Drift::Changed { .. })
            && !opts.accept_published_drift;
        let writable = matches!(drift, Drift::Created | Drift::Changed { .. });
        let written = writable && !blocked && !opts.dry_run;
        if written {
            fs::write(&path, &out)?;
        }
        report.changes.push(CaseChange {
            name: case.name.clone(),
            provenance: case.provenance,
            drift,
            written,
        });
    }
    Ok(report)
}
