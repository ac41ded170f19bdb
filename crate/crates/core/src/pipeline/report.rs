use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assignment::{Characteristics, JawKind};
use crate::landmarks::Landmark;
use crate::orientation::Frame;
use crate::segmentation::RejectReason;
use crate::Vec3;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineStage {
    Orientation,
    Segmentation,
    Assignment,
}

impl PipelineStage {
    /// Process exit code for a run that stopped at this stage.
    pub fn exit_code(self) -> i32 {
        match self {
            PipelineStage::Orientation => 3,
            PipelineStage::Segmentation => 4,
            PipelineStage::Assignment => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: PipelineStage,
    pub message: String,
}

/// One blob that went into a tooth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartReport {
    /// Assigned type code, e.g. `LL6.0` for the mesial half.
    pub code: String,
    pub blob: usize,
    pub characteristics: Characteristics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToothReport {
    pub code: String,
    pub partial: bool,
    pub anomalous: bool,
    pub face_count: usize,
    /// SHA-256 of the sorted face indices as little-endian u32.
    pub face_digest: String,
    pub parts: Vec<PartReport>,
    pub landmarks: Vec<Landmark>,
    pub landmark_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobReport {
    pub blob: usize,
    pub face_count: usize,
    pub face_digest: String,
    pub characteristics: Characteristics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedReport {
    pub peaks: Vec<Vec3>,
    pub face_count: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pitch_correction_deg: Option<f64>,
    pub peak_count: usize,
    pub kept_peak_count: usize,
    pub threshold: Option<f64>,
    /// `(threshold, tooth area)` for every rung of the ladder.
    pub threshold_scores: Vec<(f64, f64)>,
    pub rejected_groups: Vec<RejectedReport>,
    pub objective: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkReport {
    pub schema_version: u32,
    pub model_id: String,
    pub jaw_kind: JawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_failure: Option<StageFailure>,
    pub frame: Option<Frame>,
    /// Teeth in arch order.
    pub teeth: Vec<ToothReport>,
    pub unassigned_blobs: Vec<BlobReport>,
    /// Whole-tooth codes with no blob assigned.
    pub missing_types: Vec<String>,
    pub diagnostics: Diagnostics,
}

impl LandmarkReport {
    pub fn empty(model_id: &str, jaw_kind: JawKind) -> Self {
        LandmarkReport {
            schema_version: REPORT_SCHEMA_VERSION,
            model_id: model_id.to_string(),
            jaw_kind,
            stage_failure: None,
            frame: None,
            teeth: Vec::new(),
            unassigned_blobs: Vec::new(),
            missing_types: Vec::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn exit_code(&self) -> i32 {
        self.stage_failure.as_ref().map_or(0, |f| f.stage.exit_code())
    }

    pub fn landmarks(&self) -> impl Iterator<Item = &Landmark> {
        self.teeth.iter().flat_map(|t| &t.landmarks)
    }
}

pub fn face_digest(faces: &[u32]) -> String {
    let mut sorted = faces.to_vec();
    sorted.sort_unstable();
    let mut h = Sha256::new();
    for f in sorted {
        h.update(f.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
