//! JSON forms of ellipse specifications.
//!
//! ```json
//! {"a": [["10/9", "1/3"], ["1/3", 1]], "k": "18^2", "p": [0.47, 0.5]}
//! ```
//!
//! Scalars may be JSON numbers or strings in the syntax of
//! [`parse_exact`](crate::exact::parse_exact); numbers are read from their
//! decimal text, so `0.47` means exactly 47/100. `p` is optional.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::exact::{canonical_string, parse_exact};
use crate::geometry::{EllipseSpec, GeometryError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: expected a number or numeric string, got {value}")]
    Scalar { field: String, value: String },
    #[error("matrix is not symmetric")]
    Asymmetric,
    #[error("k is required")]
    MissingK,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The wire form of a specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub a: [[Value; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<[Value; 2]>,
}

fn scalar(field: &str, v: &Value) -> Result<BigRational, ConfigError> {
    let bad = || ConfigError::Scalar { field: field.to_string(), value: v.to_string() };
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(bad()),
    };
    parse_exact(&text).map_err(|_| bad())
}

impl SpecJson {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    /// The matrix entries `(a11, a12, a22)`.
    pub fn matrix(&self) -> Result<[BigRational; 3], ConfigError> {
        let a11 = scalar("a[0][0]", &self.a[0][0])?;
        let a12 = scalar("a[0][1]", &self.a[0][1])?;
        let a21 = scalar("a[1][0]", &self.a[1][0])?;
        let a22 = scalar("a[1][1]", &self.a[1][1])?;
        if a12 != a21 {
            return Err(ConfigError::Asymmetric);
        }
        Ok([a11, a12, a22])
    }

    /// The specification, with `k` replaced by `k_override` when given.
    pub fn to_spec(&self, k_override: Option<&BigRational>) -> Result<EllipseSpec, ConfigError> {
        let [a11, a12, a22] = self.matrix()?;
        let k = match (k_override, &self.k) {
            (Some(k), _) => k.clone(),
            (None, Some(v)) => scalar("k", v)?,
            (None, None) => return Err(ConfigError::MissingK),
        };
        let p = match &self.p {
            Some([x, y]) => [scalar("p[0]", x)?, scalar("p[1]", y)?],
            None => [BigRational::zero(), BigRational::zero()],
        };
        Ok(EllipseSpec::new(a11, a12, a22, k, p)?)
    }
}

/// The canonical JSON text of a specification: reduced fractions as
/// strings, fixed key order, no whitespace. Equal specifications give equal
/// text.
pub fn canonical_json(spec: &EllipseSpec) -> String {
    let s = |q: &BigRational| Value::String(canonical_string(q));
    let [px, py] = spec.center();
    let doc = SpecJson {
        a: [[s(spec.a11()), s(spec.a12())], [s(spec.a12()), s(spec.a22())]],
        k: Some(s(spec.k())),
        p: Some([s(px), s(py)]),
    };
    serde_json::to_string(&doc).expect("plain values serialize")
}
