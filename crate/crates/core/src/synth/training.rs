//! Reference databases built from labeled synthetic jaws.

use std::collections::BTreeMap;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate, SynthError, SynthModel, SynthSpec};
use crate::assignment::{tooth_types, Characteristics, DatabaseBuilder, JawKind, MolarRole, Side, TrainingDatabase, ToothType};
use crate::pipeline::{segment_mesh, PipelineConfig};

/// A blob takes the ground-truth label covering at least this share of it.
const MIN_LABEL_SHARE: f64 = 0.5;
const MISSING_RATE: f64 = 0.04;
/// Wider than the generator default so the references cover test jaws.
const TRAINING_JITTER: f64 = 0.06;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub models: usize,
    /// Models whose segmentation failed and were left out.
    pub failed: Vec<u64>,
    pub labeled_blobs: usize,
    /// Blobs with no clear ground-truth owner.
    pub unlabeled_blobs: usize,
}

/// Varied jaws for training: third molars in about half, molars cycling
/// through whole, split, mesial-only and distal-only renderings, mesh
/// spacing and crown sizes drawn at random, and an occasional missing
/// tooth, crowded front or cheek scrap.
pub fn training_specs(jaw: JawKind, count: usize, seed: u64) -> Vec<SynthSpec> {
    let molars: Vec<ToothType> = tooth_types(jaw).into_iter().filter(|t| t.role == MolarRole::Whole).collect();
    (0..count)
        .map(|i| {
            let model_seed = seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(model_seed ^ 0x5e_ed0f_7a1e);
            let mut spec = SynthSpec::new(jaw, model_seed);
            spec.third_molars = jaw.is_adult() && i % 2 == 0;
            for (k, t) in molars.iter().enumerate() {
                if t.tooth == '8' && !spec.third_molars {
                    continue;
                }
                match (i / 2 + k) % 6 {
                    3 => spec.split.push(t.code.clone()),
                    4 => spec.partial.push(t.code.clone()),
                    5 if k % 2 == 0 => spec.distal_only.push(t.code.clone()),
                    _ => {}
                }
            }
            let rendered: Vec<&String> = spec.split.iter().chain(&spec.partial).chain(&spec.distal_only).collect();
            for &t in jaw.teeth() {
                for side in [Side::Left, Side::Right] {
                    let code = ToothType::new(jaw, side, t, MolarRole::None).whole_code();
                    if rng.random_bool(MISSING_RATE) && !rendered.contains(&&code) && (t != '8' || spec.third_molars) {
                        spec.missing.push(code);
                    }
                }
            }
            if rng.random_bool(0.3) {
                spec.crowding = rng.random_range(0.2..1.2);
            }
            spec.cheek_fragment = rng.random_bool(0.2);
            spec.size_jitter = TRAINING_JITTER;
            spec.grid_spacing = rng.random_range(0.27..0.33);
            spec
        })
        .collect()
}

/// Characteristics of every blob that clearly belongs to one generated body,
/// labeled with that body's code.
pub fn labeled_parts(model: &SynthModel, config: &PipelineConfig) -> Result<(Vec<(String, Characteristics)>, usize), String> {
    let seg = segment_mesh(&model.mesh, config).map_err(|f| f.message)?;
    let mut parts = Vec::new();
    let mut unlabeled = 0;
    for (blob, ch) in seg.segmentation.chosen.blobs.iter().zip(&seg.characteristics) {
        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        for &f in &blob.faces {
            if let Some(b) = model.truth.face_labels[f as usize] {
                *votes.entry(b).or_default() += 1;
            }
        }
        let best = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)));
        match best {
            Some((&b, &n)) if n as f64 >= MIN_LABEL_SHARE * blob.faces.len() as f64 => {
                parts.push((model.truth.bodies[b].code.clone(), *ch));
            }
            _ => unlabeled += 1,
        }
    }
    Ok((parts, unlabeled))
}

#[derive(Debug, thiserror::Error)]
pub enum TrainingError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("no training model could be segmented")]
    NothingUsable,
}

/// Generates `count` jaws, segments them, and pools the labeled blobs.
pub fn train_synthetic(
    jaw: JawKind,
    count: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<(TrainingDatabase, TrainingSummary), TrainingError> {
    let specs = training_specs(jaw, count, seed);
    let results: Vec<Result<Result<_, String>, SynthError>> = specs
        .par_iter()
        .map(|spec| generate(spec).map(|m| labeled_parts(&m, config)))
        .collect();
    let mut builder = DatabaseBuilder::new(jaw);
    let mut summary = TrainingSummary::default();
    for (spec, r) in specs.iter().zip(results) {
        match r? {
            Ok((parts, unlabeled)) => {
                summary.models += 1;
                summary.labeled_blobs += parts.len();
                summary.unlabeled_blobs += unlabeled;
                builder.add_model(&parts);
            }
            Err(e) => {
                warn!("training model {} failed: {e}", spec.seed);
                summary.failed.push(spec.seed);
            }
        }
    }
    if summary.models == 0 {
        return Err(TrainingError::NothingUsable);
    }
    Ok((builder.build(), summary))
}
