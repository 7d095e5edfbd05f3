use std::fs;
use std::io::Write;
use std::path::Path;

use lagfib_core::io::to_canonical_json;
use lagfib_core::Error;
use serde::Serialize;

#[derive(Debug)]
pub enum Failure {
    /// A precondition of the requested analysis does not hold (exit 2).
    Refused {
        diagnostic: String,
        output: Option<std::path::PathBuf>,
    },
    /// Unreadable input, schema or configuration problem (exit 1).
    Config(String),
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    status: &'a str,
    module: &'a str,
    message: String,
}

impl Failure {
    pub fn from_core(e: Error, output: Option<&Path>) -> Self {
        let diag = |status| {
            to_canonical_json(&Diagnostic {
                status,
                module: e.module(),
                message: e.to_string(),
            })
        };
        if e.is_refusal() {
            Failure::Refused {
                diagnostic: diag("refused"),
                output: output.map(Path::to_path_buf),
            }
        } else {
            Failure::Config(diag("error"))
        }
    }

    pub fn config(module: &str, message: impl Into<String>) -> Self {
        Failure::Config(to_canonical_json(&Diagnostic {
            status: "error",
            module,
            message: message.into(),
        }))
    }
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure::config("cli", e.to_string()))
        }
        Some(p) => {
            let dir = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let write = || -> std::io::Result<()> {
                let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
                tmp.write_all(text.as_bytes())?;
                tmp.write_all(b"\n")?;
                tmp.as_file().sync_all()?;
                tmp.persist(p).map_err(|e| e.error)?;
                Ok(())
            };
            write().map_err(|e| Failure::config("cli", format!("cannot write {}: {e}", p.display())))
        }
    }
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::config("cli", format!("cannot read {}: {e}", path.display())))
}
