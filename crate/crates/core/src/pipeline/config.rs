use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{JawKind, DEFAULT_FUSSINESS};
use crate::landmarks::IncisorRule;
use crate::peaks::DEFAULT_HEIGHT_THRESHOLD;
use crate::segmentation::{threshold_ladder, CleaningRules, SegmentationConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{name} must be a positive finite length, got {value}")]
    Length { name: &'static str, value: f64 },
    #[error("fussiness must be finite and non-negative, got {0}")]
    Fussiness(f64),
    #[error("threshold ladder must hold at least one positive finite value")]
    Ladder,
    #[error("overlap fraction must lie in (0, 1], got {0}")]
    Overlap(f64),
}

/// Everything that steers one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub jaw_kind: JawKind,
    /// Peaks this far or further below the highest one are dropped, mm.
    #[serde(default = "default_height")]
    pub height_threshold_mm: f64,
    #[serde(default = "default_spill")]
    pub spill_radius_mm: f64,
    #[serde(default = "default_fussiness")]
    pub fussiness: f64,
    /// Candidate crease-cost thresholds, mm⁻¹.
    #[serde(default = "default_ladder")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_overlap")]
    pub overlap_fraction: f64,
    #[serde(default = "default_steep")]
    pub steep_ratio: f64,
    #[serde(default)]
    pub incisor_rule: IncisorRule,
    /// Skip the landmark stage and report segmentation and labels only.
    #[serde(default)]
    pub skip_landmarks: bool,
    /// Vertices closer than this merge when indexing an STL, mm. `0` merges
    /// exact duplicates only.
    #[serde(default)]
    pub snap_tolerance_mm: f64,
}

fn default_height() -> f64 {
    DEFAULT_HEIGHT_THRESHOLD
}

fn default_spill() -> f64 {
    SegmentationConfig::default().spill_radius
}

fn default_fussiness() -> f64 {
    DEFAULT_FUSSINESS
}

fn default_ladder() -> Vec<f64> {
    threshold_ladder(0.05, 3.0, 12)
}

fn default_overlap() -> f64 {
    SegmentationConfig::default().overlap_fraction
}

fn default_steep() -> f64 {
    CleaningRules::default().steep_ratio
}

impl PipelineConfig {
    pub fn new(jaw_kind: JawKind) -> Self {
        PipelineConfig {
            jaw_kind,
            height_threshold_mm: default_height(),
            spill_radius_mm: default_spill(),
            fussiness: default_fussiness(),
            thresholds: default_ladder(),
            overlap_fraction: default_overlap(),
            steep_ratio: default_steep(),
            incisor_rule: IncisorRule::default(),
            skip_landmarks: false,
            snap_tolerance_mm: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Length { name, value })
            }
        };
        positive("height_threshold_mm", self.height_threshold_mm)?;
        positive("spill_radius_mm", self.spill_radius_mm)?;
        positive("steep_ratio", self.steep_ratio)?;
        if !(self.snap_tolerance_mm.is_finite() && self.snap_tolerance_mm >= 0.0) {
            return Err(ConfigError::Length {
                name: "snap_tolerance_mm",
                value: self.snap_tolerance_mm,
            });
        }
        if !(self.fussiness.is_finite() && self.fussiness >= 0.0) {
            return Err(ConfigError::Fussiness(self.fussiness));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(ConfigError::Ladder);
        }
        if !(self.overlap_fraction > 0.0 && self.overlap_fraction <= 1.0) {
            return Err(ConfigError::Overlap(self.overlap_fraction));
        }
        Ok(())
    }

    pub fn segmentation(&self) -> SegmentationConfig {
        SegmentationConfig {
            spill_radius: self.spill_radius_mm,
            thresholds: self.thresholds.clone(),
            overlap_fraction: self.overlap_fraction,
            rules: CleaningRules {
                steep_ratio: self.steep_ratio,
                ..CleaningRules::default()
            },
        }
    }
}
