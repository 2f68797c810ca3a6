//! Versioned JSON envelope for trained models and other artifacts:
//! `{"format_version": 1, "kind": ..., "payload": ...}`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

pub const KIND_PIPELINE: &str = "pipeline";
pub const KIND_CODING_MATRIX: &str = "coding_matrix";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    pub format_version: u64,
    pub kind: String,
    pub payload: serde_json::Value,
}

impl Archive {
    pub fn wrap<T: Serialize>(kind: &str, payload: &T) -> Result<Self> {
        Ok(Self {
            format_version: FORMAT_VERSION,
            kind: kind.to_string(),
            payload: serde_json::to_value(payload)?,
        })
    }

    /// Parses an envelope, rejecting unknown format versions before looking
    /// at anything else.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let found = raw
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Config("archive has no numeric format_version".into()))?;
        if found != FORMAT_VERSION {
            return Err(Error::Version {
                found,
                supported: FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_value(raw)?)
    }

    pub fn unwrap<T: DeserializeOwned>(self, kind: &str) -> Result<T> {
        if self.kind != kind {
            return Err(Error::Config(format!(
                "archive holds {:?}, expected {kind:?}",
                self.kind
            )));
        }
        Ok(serde_json::from_value(self.payload)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn save<T: Serialize>(path: impl AsRef<Path>, kind: &str, payload: &T) -> Result<()> {
    let path = path.as_ref();
    let text = Archive::wrap(kind, payload)?.to_json()?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load<T: DeserializeOwned>(path: impl AsRef<Path>, kind: &str) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Archive::parse(&text)?.unwrap(kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecoc::{random_code, CodingMatrix};
    use crate::experiment::{generate_synthetic, MethodConfig, Pipeline, SyntheticSpec};

    #[test]
    fn round_trip_pipeline() {
        let ds = generate_synthetic(&SyntheticSpec {
            classes: 3,
            per_class: 6,
            dim: 4,
            center_spread: 2.0,
            noise_sigma: 0.5,
            seed: 1,
        })
        .unwrap();
        for method in [
            MethodConfig::svm(),
            MethodConfig::dt(),
            MethodConfig::Ecoc {
                code_length: 6,
                pic: Default::default(),
                decoding: Default::default(),
            },
        ] {
            let p = Pipeline::fit(&ds, &method, Some(3), 2).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.json");
            save(&path, KIND_PIPELINE, &p).unwrap();
            let back: Pipeline = load(&path, KIND_PIPELINE).unwrap();
            assert_eq!(back.predict_all(&ds).unwrap(), p.predict_all(&ds).unwrap());
        }
    }

    #[test]
    fn version_and_kind_checks() {
        let code = random_code(4, 6, 0).unwrap();
        let text = Archive::wrap(KIND_CODING_MATRIX, &code)
            .unwrap()
            .to_json()
            .unwrap();
        let back: CodingMatrix = Archive::parse(&text)
            .unwrap()
            .unwrap(KIND_CODING_MATRIX)
            .unwrap();
        assert_eq!(back, code);
        assert!(matches!(
            Archive::parse(&text)
                .unwrap()
                .unwrap::<CodingMatrix>(KIND_PIPELINE),
            Err(Error::Config(_))
        ));
        let future = text.replace("\"format_version\":1", "\"format_version\":2");
        match Archive::parse(&future) {
            Err(
                e @ Error::Version {
                    found: 2,
                    supported: 1,
                },
            ) => {
                assert_eq!(e.kind(), crate::error::ErrorKind::Config)
            }
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
