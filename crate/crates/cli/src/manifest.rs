//! Run manifests: what was asked, with which settings, and a digest of the
//! emitted result.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub tool_version: String,
    pub precision_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    /// SHA-256 of the compact JSON encoding of the result.
    pub result_digest: String,
}

/// SHA-256 over `serde_json::to_string(result)`. Object keys are sorted by
/// `serde_json::Value`, so the digest is recomputable from emitted output.
pub fn digest(result: &Value) -> String {
    let text = serde_json::to_string(result).expect("JSON values serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value, precision_bits: u32, result: &Value, wall_time_ms: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            precision_bits,
            wall_time_ms,
            result_digest: digest(result),
        }
    }

    pub fn verify(&self, result: &Value) -> bool {
        self.result_digest == digest(result)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub manifest: RunManifest,
    pub result: Value,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_survives_reparse() {
        let result = json!({"b": [1.5, 1e-300, "x"], "a": {"z": null, "y": -0.0}});
        let m = RunManifest::new("verify", json!({"order": 3}), 256, &result, None);
        let text = serde_json::to_string_pretty(&Envelope { manifest: m, result }).unwrap();
        let back: Envelope = serde_json::from_str(&text).unwrap();
        assert!(back.manifest.verify(&back.result));
        assert!(!text.contains("wall_time_ms"));
    }

    #[test]
    fn digest_changes_with_content() {
        assert_ne!(digest(&json!([1])), digest(&json!([2])));
    }
}
