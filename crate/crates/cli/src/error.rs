use std::fmt;
use std::path::Path;

use ellipse_sandpile::apollonian::ClassifyError;
use ellipse_sandpile::cache::CacheError;
use ellipse_sandpile::circle::CircleError;
use ellipse_sandpile::config::ConfigError;
use ellipse_sandpile::identity::{AuditError, IdentityError};
use ellipse_sandpile::pattern::PatternError;
use ellipse_sandpile::render::RenderError;
use ellipse_sandpile::sweep::SweepError;
use ellipse_sandpile::GeometryError;
use serde_json::json;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_AUDIT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_CACHE: i32 = 4;

/// An error with its exit code and a short machine-readable kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, kind: &str, message: impl fmt::Display) -> Self {
        CliError { code, kind: kind.to_string(), message: message.to_string() }
    }

    pub fn config(message: impl fmt::Display) -> Self {
        CliError::new(EXIT_CONFIG, "Config", message)
    }

    pub fn audit(kind: &str, message: impl fmt::Display) -> Self {
        CliError::new(EXIT_AUDIT, kind, message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::config(format!("{}: {err}", path.display()))
    }

    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.kind, "code": self.code, "message": self.message}}).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::config(e)
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::new(EXIT_CONFIG, "Geometry", e)
    }
}

impl From<CircleError> for CliError {
    fn from(e: CircleError) -> Self {
        let kind = match e {
            CircleError::InvalidRadius(_) => "InvalidRadius",
            CircleError::RadiusTooLarge(_) => "RadiusTooLarge",
            CircleError::Domain(_) => "Domain",
        };
        CliError::new(EXIT_CONFIG, kind, e)
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        let kind = match e {
            CacheError::CacheChecksumMismatch { .. } => "CacheChecksumMismatch",
            CacheError::BadMagic { .. } => "BadMagic",
            CacheError::Length => "Length",
            CacheError::Io { .. } => "Io",
            _ => "Cache",
        };
        CliError::new(EXIT_CACHE, kind, e)
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        CliError { code: EXIT_AUDIT, kind: variant_name(&e), message: e.to_string() }
    }
}

/// The variant name of an enum value, from its `Debug` form.
fn variant_name(e: &impl fmt::Debug) -> String {
    let mut text = format!("{e:?}");
    text.truncate(text.find(|c: char| !c.is_alphanumeric()).unwrap_or(text.len()));
    text
}

impl From<IdentityError> for CliError {
    fn from(e: IdentityError) -> Self {
        CliError::new(EXIT_RUNTIME, "Identity", e)
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> Self {
        CliError::new(EXIT_RUNTIME, "Pattern", e)
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Geometry(g) => g.into(),
            SweepError::InvalidRadius => CliError::config(e),
            other => CliError::new(EXIT_RUNTIME, "Sweep", other),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        CliError::new(EXIT_CONFIG, "UnknownValue", e)
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        let kind = match e {
            ClassifyError::Indeterminate { .. } => "Indeterminate",
            ClassifyError::NonFinite => "NonFinite",
        };
        CliError::new(EXIT_CONFIG, kind, e)
    }
}
