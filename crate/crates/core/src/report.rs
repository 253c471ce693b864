//! Self-contained run reports: every report embeds the full input spec so
//! a run can be replayed byte-for-byte, and carries a content hash over
//! everything except the timestamp.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::family::{FamilySpec, Metric, Verdict};
use crate::tolerances::Tolerances;

/// Moduli of one refinement level as stored in reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSummary {
    pub depth: usize,
    pub points: usize,
    pub step: f64,
    pub graph_modulus: Option<f64>,
    pub riesz_modulus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twisted_riesz_modulus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugated_riesz_modulus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_deviation: Option<f64>,
}

/// A reproducible record of one command run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub spec: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    #[serde(default)]
    pub refine: usize,
    pub tolerances: Tolerances,
    pub grid_history: Vec<LevelSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub artifacts: Vec<String>,
    /// SHA-256 over the canonical JSON of this report with `content_hash`
    /// and `timestamp` cleared.
    pub content_hash: String,
    /// Seconds since the epoch; excluded from the hash.
    pub timestamp: String,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        command: &str,
        spec: FamilySpec,
        metric: Option<Metric>,
        refine: usize,
        tolerances: Tolerances,
        grid_history: Vec<LevelSummary>,
        verdict: Option<Verdict>,
        artifacts: Vec<String>,
    ) -> Self {
        let mut report = RunReport {
            schema: 1,
            command: command.to_string(),
            spec,
            metric,
            refine,
            tolerances,
            grid_history,
            verdict,
            artifacts,
            content_hash: String::new(),
            timestamp: String::new(),
        };
        report.content_hash = report.compute_hash();
        report.timestamp = now_epoch_seconds();
        report
    }

    /// Hash of the hashable content (timestamp and stored hash cleared).
    pub fn compute_hash(&self) -> String {
        let mut stripped = self.clone();
        stripped.content_hash = String::new();
        stripped.timestamp = String::new();
        let bytes = serde_json::to_vec(&stripped).expect("report serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hex_encode(&hasher.finalize())
    }

    /// `true` iff the stored hash matches the content.
    pub fn verify_hash(&self) -> bool {
        self.content_hash == self.compute_hash()
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn now_epoch_seconds() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".to_string())
}

fn hex_encode(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
