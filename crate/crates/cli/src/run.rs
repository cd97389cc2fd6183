use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::Format;

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, ids, files or parameters: exit code 1.
    Config(String),
    /// A numerical check failed: exit code 2.
    Numerical { message: String, report: Option<PathBuf> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical { .. } => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "error: {m}"),
            CliError::Numerical { message, report: Some(p) } => write!(f, "numerical check failed: {message}\nreport: {}", p.display()),
            CliError::Numerical { message, report: None } => write!(f, "numerical check failed: {message}"),
        }
    }
}

impl From<acimsel::Error> for CliError {
    fn from(e: acimsel::Error) -> Self {
        use acimsel::Error::*;
        match e {
            Assertion(_) | Convergence(_) | NonInvertible(_) | Inconsistent(_) | Structural(_) | Ambiguous { .. } | Construction(_) => {
                CliError::Numerical { message: e.to_string(), report: None }
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Output directory of one run and the manifest describing it.
pub struct Run {
    dir: PathBuf,
    format: Option<Format>,
    artifacts: Vec<String>,
    manifest: Map<String, Value>,
}

impl Run {
    pub fn new(out: &Path, name: &str, format: Option<Format>, command: &impl Serialize) -> CliResult<Self> {
        let dir = out.join(name);
        fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        let mut manifest = Map::new();
        manifest.insert("tool".into(), json!("acimsel"));
        manifest.insert("versions".into(), json!({"cli": env!("CARGO_PKG_VERSION"), "core": acimsel::VERSION}));
        manifest.insert("run".into(), json!(name));
        manifest.insert("config".into(), serde_json::to_value(command).expect("arguments serialize"));
        manifest.insert("replay".into(), json!(replay_argv()));
        manifest.insert("format".into(), json!(format));
        Ok(Run { dir, format, artifacts: Vec::new(), manifest })
    }

    pub fn csv(&self) -> bool {
        self.format != Some(Format::Json)
    }

    pub fn json(&self) -> bool {
        self.format != Some(Format::Csv)
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        self.manifest.insert(key.into(), serde_json::to_value(value).expect("manifest entries serialize"));
    }

    pub fn write_text(&mut self, file: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(file);
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        self.artifacts.push(file.into());
        Ok(path)
    }

    pub fn write_json(&mut self, file: &str, value: &impl Serialize) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write_text(file, &text)
    }

    pub fn write_csv(&mut self, file: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<PathBuf> {
        let mut buf = Vec::new();
        let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
        acimsel::io::write_csv(&mut buf, &header, rows)?;
        self.write_text(file, &String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Writes `manifest.json` with the final status.
    pub fn finish(mut self, failure: Option<&str>) -> CliResult<PathBuf> {
        let status = match failure {
            None => json!({"ok": true}),
            Some(m) => json!({"ok": false, "failed_check": m}),
        };
        self.manifest.insert("status".into(), status);
        self.manifest.insert("artifacts".into(), json!(self.artifacts));
        let path = self.path("manifest.json");
        let mut text = serde_json::to_string_pretty(&Value::Object(self.manifest)).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        Ok(path)
    }
}

/// Command line minus the program path and the output directory.
fn replay_argv() -> Vec<String> {
    let mut out = vec!["acimsel".to_string()];
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--out" || a == "-o" {
            args.next();
        } else if !a.starts_with("--out=") {
            out.push(a);
        }
    }
    out
}

/// File-name-safe form of an id such as `ex2.1/tau1`.
pub fn slug(text: &str) -> String {
    text.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}
