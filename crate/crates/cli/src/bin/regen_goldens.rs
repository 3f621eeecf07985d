//! Regenerates the golden CLI outputs and prints a drift report.
//!
//! Usage: regen-goldens [--dry-run] [--accept-published-drift] [--force]

use std::process::{Command, ExitCode};

use confsel::golden::{
    default_golden_dir, load_manifest, regenerate, workspace_root, RegenOptions,
};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut opts = RegenOptions::default();
    let mut force = false;
    for a in &args {
        match a.as_str() {
            "--dry-run" => opts.dry_run = true,
            "--accept-published-drift" => opts.accept_published_drift = true,
            "--force" => force = true,
            other => {
                eprintln!("unknown flag {other}\nusage: regen-goldens [--dry-run] [--accept-published-drift] [--force]");
                return ExitCode::from(2);
            }
        }
    }

    let dir = default_golden_dir();
    let root = workspace_root();
    if !force && !opts.dry_run {
        let status = Command::new("git")
            .arg("-C")
            .arg(&root)
            .args(["status", "--porcelain", "--"])
            .arg(&dir)
            .output();
        match status {
            Ok(o) if o.status.success() && !o.stdout.is_empty() => {
                eprintln!(
                    "golden directory has uncommitted changes; commit or stash them, or pass --force\n{}",
                    String::from_utf8_lossy(&o.stdout)
                );
                return ExitCode::from(2);
            }
            Ok(_) => {}
            Err(e) => eprintln!("warning: cannot check working tree ({e}); continuing"),
        }
    }

    let cases = match load_manifest(&dir.join("cases.toml")) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    };
    let report = match regenerate(&cases, &dir, &root, opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cannot write goldens: {e}");
            return ExitCode::from(3);
        }
    };
    if report.is_clean() {
        println!("{} cases, no drift", cases.len());
        return ExitCode::SUCCESS;
    }
    print!("{}", report.render());
    if report.published_drift().any(|c| !c.written) {
        eprintln!(
            "published-result goldens drifted; rerun with --accept-published-drift after review"
        );
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
