use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliResult;

/// Files and metrics produced by one run.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub metrics: Vec<(String, String)>,
    /// Lines echoed to stdout.
    pub summary: Vec<String>,
    /// Set when a built-in oracle check failed; artifacts are still written.
    pub check_failure: Option<String>,
}

impl Artifacts {
    pub fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn metric(&mut self, key: impl Into<String>, value: impl Display) {
        self.metrics.push((key.into(), value.to_string()));
    }

    pub fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.check_failure.is_none() {
            self.check_failure = Some(what());
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    preset: Option<&'a str>,
    seed: u64,
    version: &'a str,
    config_sha256: &'a str,
    files: Vec<&'a str>,
}

/// `--out`, else `$MEMNET_OUT/<experiment>`, else `memnet-out/<experiment>`.
pub fn out_dir(flag: Option<&Path>, env_root: Option<&Path>, experiment: &str) -> PathBuf {
    match (flag, env_root) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(root)) => root.join(experiment),
        (None, None) => PathBuf::from("memnet-out").join(experiment),
    }
}

pub struct RunInfo<'a> {
    pub experiment: &'a str,
    pub preset: Option<&'a str>,
    pub seed: u64,
    pub config_sha256: &'a str,
    pub config_json: String,
}

pub fn write(dir: &Path, info: &RunInfo<'_>, a: &Artifacts) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    for (name, contents) in &a.files {
        fs::write(dir.join(name), contents)?;
    }
    let mut metrics = String::new();
    for (k, v) in &a.metrics {
        metrics.push_str(&format!("{k}={v}\n"));
    }
    fs::write(dir.join("metrics.txt"), metrics)?;
    fs::write(dir.join("config.json"), &info.config_json)?;
    let manifest = Manifest {
        experiment: info.experiment,
        preset: info.preset,
        seed: info.seed,
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: info.config_sha256,
        files: a.files.iter().map(|(n, _)| n.as_str()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(())
}

/// CSV text from a header and rows of displayable cells.
pub fn csv<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.as_ref().join(","));
        s.push('\n');
    }
    s
}
