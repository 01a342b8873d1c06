use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use cran_rates::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self { code: EXIT_VERIFICATION, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::ModelDomain(_) => EXIT_DOMAIN,
            Error::MarkovViolation { .. }
            | Error::TooLarge { .. }
            | Error::TooManyRelays { .. }
            | Error::SingularNoise { .. }
            | Error::IllConditioned { .. }
            | Error::InfeasibleQuantizer { .. }
            | Error::InfeasibleTimeShare(_)
            | Error::DegenerateAlpha { .. }
            | Error::NonFinite(_)
            | Error::OptimizerFailed(_) => EXIT_PRECONDITION,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let Some(path) = path else {
        std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::config(format!("stdout: {e}")))?;
        return Ok(());
    };
    let io = |e: std::io::Error| Failure::config(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `stem_label.ext` next to `path`.
pub fn labelled(path: &Path, label: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{label}"),
    };
    path.with_file_name(name)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
